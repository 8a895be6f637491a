use nilcsat::canonical::canonicalize;
use nilcsat::ccircuit::{extract_cc, simulated_bit};
use nilcsat::gf::{codim_bound, isolate_point};
use nilcsat::random::{random_circuit, random_cnf, random_level_function, random_point};
use nilcsat::reduction::{lift_witness, reduce};
use nilcsat::s4::{check_clause_part, reduce_s4, solve_s4_by_cosets};
use nilcsat::solver::{
    ceqv, combine_system_v, restrict_to_slice, solve_brute, solve_random, solve_sparse, value_counts,
    CeqvStatus, Method, SliceSet, Status, BRUTE_CEILING,
};
use nilcsat::terms::parse;
use nilcsat::{AlgebraSpec, CnfFormula, Instance, SupportBound};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn specs() -> Vec<AlgebraSpec> {
    ["2,3", "2,3,2", "3,2,3"]
        .iter()
        .map(|s| AlgebraSpec::parse(s).unwrap())
        .collect()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_evaluates_like_the_circuit(seed in any::<u64>(), which in 0usize..3, n in 0usize..4, size in 1usize..30) {
        let spec = &specs()[which];
        let mut r = rng(seed);
        let c = random_circuit(spec, n, size, &mut r);
        let form = canonicalize(&c);
        for _ in 0..20 {
            let x = random_point(spec, n, &mut r);
            prop_assert_eq!(form.evaluate(spec, &x).unwrap(), c.evaluate(&x).unwrap());
        }
        let back = form.to_circuit(spec);
        let x = random_point(spec, n, &mut r);
        prop_assert_eq!(back.evaluate(&x).unwrap(), c.evaluate(&x).unwrap());
    }

    #[test]
    fn printed_terms_parse_back(seed in any::<u64>(), n in 1usize..4, size in 1usize..20) {
        let spec = AlgebraSpec::parse("2,3,2").unwrap();
        let mut r = rng(seed);
        let c = random_circuit(&spec, n, size, &mut r);
        let text = c.print(1 << 20).unwrap();
        let back = parse(&spec, &text, Some(n)).unwrap();
        let x = random_point(&spec, n, &mut r);
        prop_assert_eq!(back.evaluate(&x).unwrap(), c.evaluate(&x).unwrap());
    }

    #[test]
    fn compiled_level_functions_match_tables(seed in any::<u64>(), which in 0usize..2, m in 0usize..4) {
        let spec = &specs()[which];
        let mut r = rng(seed);
        let source = if spec.h() == 2 { 2 } else { 2 + (seed % 2) as usize };
        let target = 1 + (seed / 2 % (source as u64 - 1)) as usize;
        let g = random_level_function(spec, source, target, m, &mut r);
        // `represent` re-verifies exhaustively; a failure is an error.
        let c = nilcsat::funcrep::represent(&g, spec).unwrap();
        prop_assert!((c.size() as u128) <= g.size_envelope(spec));
    }

    #[test]
    fn extracted_cc_circuits_simulate(seed in any::<u64>(), n in 1usize..5, size in 1usize..30) {
        let spec = AlgebraSpec::parse("2,3,2").unwrap();
        let c = random_circuit(&spec, n, size, &mut rng(seed));
        for (j, k) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            let cc = extract_cc(&c, j, k).unwrap();
            prop_assert_eq!(cc.depth(), k - j);
            for bits in 0u32..1 << n {
                let b: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
                prop_assert_eq!(cc.eval(&b).unwrap(), simulated_bit(&c, j, k, &b).unwrap());
            }
        }
    }

    #[test]
    fn sparse_exhaustive_agrees_with_brute(seed in any::<u64>(), which in 0usize..2, n in 0usize..4, size in 1usize..25) {
        let spec = &specs()[which];
        let mut r = rng(seed);
        let c = random_circuit(spec, n, size, &mut r);
        let d = nilcsat::random::random_elem(spec, &mut r);
        let inst = Instance::new(c, d).unwrap();
        let b = solve_brute(&inst, BRUTE_CEILING).unwrap();
        let s = solve_sparse(&inst, SupportBound::exhaustive(), BRUTE_CEILING).unwrap();
        prop_assert_eq!(b.status, s.status);
        if let Some(w) = &s.witness {
            inst.check_witness(w).unwrap();
        }
        let rr = solve_random(&inst, 200, seed).unwrap();
        if let Some(w) = &rr.witness {
            inst.check_witness(w).unwrap();
        }
    }

    #[test]
    fn ceqv_matches_value_counts(seed in any::<u64>(), n in 0usize..3, size in 1usize..20) {
        let spec = AlgebraSpec::parse("2,3").unwrap();
        let c = random_circuit(&spec, n, size, &mut rng(seed));
        let counts = value_counts(&c, BRUTE_CEILING).unwrap();
        let r = ceqv(&c, Method::Brute { ceiling: BRUTE_CEILING }).unwrap();
        let identically_zero = counts[1..].iter().all(|&x| x == 0);
        prop_assert_eq!(r.status == CeqvStatus::Equiv, identically_zero);
    }

    #[test]
    fn combined_systems_are_two_valued(seed in any::<u64>(), n in 1usize..3, size in 1usize..20) {
        let spec = AlgebraSpec::parse("2,3,2").unwrap();
        let mut r = rng(seed);
        let c = random_circuit(&spec, n, size, &mut r);
        let form = canonicalize(&c);
        let k = 1 + (seed % 3) as usize;
        let slice = SliceSet::new(&spec, random_point(&spec, n, &mut r), k).unwrap();
        let sys = restrict_to_slice(&form, &spec, &slice).unwrap();
        let star = combine_system_v(&sys, &spec, Default::default()).unwrap();
        for b in slice.points(&spec, 1000).unwrap() {
            prop_assert_eq!(star.evaluate(&b).unwrap() == spec.unit(1), sys.holds(&spec, &b));
            prop_assert_eq!(sys.holds(&spec, &b), c.evaluate(&b).unwrap().is_zero());
        }
        for _ in 0..50 {
            let v = star.evaluate(&random_point(&spec, n, &mut r)).unwrap();
            prop_assert!(v.is_zero() || v == spec.unit(1));
        }
    }

    #[test]
    fn isolation_yields_singletons(seed in any::<u64>(), qi in 0usize..3, n in 1usize..6, count in 1usize..60) {
        let q = [2u32, 3, 5][qi];
        let mut r = rng(seed);
        use rand::Rng;
        let z: Vec<Vec<u32>> = (0..count).map(|_| (0..n).map(|_| r.gen_range(0..q)).collect()).collect();
        let iso = isolate_point(q, &z).unwrap();
        let hits: std::collections::BTreeSet<&Vec<u32>> = z.iter().filter(|v| iso.hyperplanes.contains(v)).collect();
        prop_assert_eq!(hits.len(), 1);
        prop_assert!(hits.contains(&iso.point));
        let distinct: std::collections::BTreeSet<&Vec<u32>> = z.iter().collect();
        prop_assert!(iso.codim() <= codim_bound(q, distinct.len()));
        prop_assert_eq!(iso.hyperplanes.codim(), Some(iso.codim()));
        for cut in &iso.cuts {
            prop_assert!(cut.after >= 1 && cut.after < cut.before);
        }
    }

    #[test]
    fn dimacs_round_trips(seed in any::<u64>(), n in 1usize..6, m in 0usize..6) {
        let f = random_cnf(n, m, 3, &mut rng(seed));
        prop_assert_eq!(CnfFormula::parse_dimacs(&f.to_dimacs()).unwrap(), f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reduction_preserves_satisfiability(seed in any::<u64>(), n in 1usize..3, m in 1usize..4) {
        let spec = AlgebraSpec::parse("2,3").unwrap();
        let phi = random_cnf(n, m, 3, &mut rng(seed));
        let out = reduce(&phi, &spec).unwrap();
        let inst = Instance::new(out.circuit.clone(), out.target).unwrap();
        let solved = solve_brute(&inst, BRUTE_CEILING).unwrap().status == Status::Sat;
        let boolean = phi.brute_force();
        prop_assert_eq!(solved, boolean.is_some());
        if let Some(beta) = boolean {
            inst.check_witness(&lift_witness(&spec, &beta)).unwrap();
        }
    }

    #[test]
    fn s4_reduction_preserves_satisfiability(seed in any::<u64>(), n in 1usize..4, m in 1usize..4) {
        let phi = random_cnf(n, m, 3, &mut rng(seed));
        let r = reduce_s4(&phi);
        prop_assert_eq!(solve_s4_by_cosets(&r).unwrap().is_some(), phi.brute_force().is_some());
        for part in &r.parts {
            prop_assert_eq!(check_clause_part(part, 500, seed), 0);
        }
    }
}
