//! CSAT and CEQV decision procedures.
//!
//! Candidate spaces are cut into fixed blocks that workers take in any order;
//! the reported witness is always the one with the smallest canonical index,
//! so results do not depend on the worker count. Random sampling draws block
//! `b` from the ChaCha8 stream `b` of the seed.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{AlgebraSpec, DElem};
use crate::canonical::{CanonicalForm, LevelForm};
use crate::error::{Error, Result};
use crate::funcrep::{build_and_with, CompileLimits};
use crate::gf::{isolate_point, AffineSystem};
use crate::terms::{Builder, Circuit, NodeId};

/// Default ceiling on the number of evaluations of an exhaustive pass.
pub const BRUTE_CEILING: u128 = 100_000_000;

const BLOCK: u64 = 4096;
const SAMPLE_BLOCK: u64 = 1024;

/// The equation `circuit(x) = target`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub circuit: Circuit,
    pub target: DElem,
}

impl Instance {
    pub fn new(circuit: Circuit, target: DElem) -> Result<Self> {
        circuit.spec().check(&target)?;
        Ok(Instance { circuit, target })
    }

    pub fn zero(circuit: Circuit) -> Self {
        let target = circuit.spec().zero();
        Instance { circuit, target }
    }

    pub fn spec(&self) -> &AlgebraSpec {
        self.circuit.spec()
    }

    pub fn arity(&self) -> usize {
        self.circuit.arity()
    }

    /// Independent re-evaluation of a claimed witness.
    pub fn check_witness(&self, x: &[DElem]) -> Result<()> {
        let v = self.circuit.evaluate(x)?;
        if v == self.target {
            Ok(())
        } else {
            Err(Error::NotASolution(format!("value {v}, expected {}", self.target)))
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Goal {
    Equals(DElem),
    NonZero,
}

impl Goal {
    #[inline]
    fn hit(self, v: &DElem) -> bool {
        match self {
            Goal::Equals(d) => *v == d,
            Goal::NonZero => !v.is_zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "SAT")]
    Sat,
    #[serde(rename = "UNSAT")]
    Unsat,
    #[serde(rename = "UNSAT-AT-BOUND")]
    UnsatAtBound,
    #[serde(rename = "GIVE-UP")]
    GiveUp,
}

impl Status {
    pub fn is_decided(self) -> bool {
        matches!(self, Status::Sat | Status::Unsat)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub status: Status,
    pub witness: Option<Vec<DElem>>,
    /// Number of nonzero coordinates of the witness.
    pub support: Option<usize>,
    /// Candidates examined up to and including the witness, in canonical
    /// order.
    pub evaluations: u64,
    /// Resolved support bound of a sparse search.
    pub bound: Option<usize>,
}

impl SolveReport {
    fn found(x: Vec<DElem>, evaluations: u64, bound: Option<usize>) -> Self {
        let support = x.iter().filter(|a| !a.is_zero()).count();
        SolveReport {
            status: Status::Sat,
            witness: Some(x),
            support: Some(support),
            evaluations,
            bound,
        }
    }

    fn none(status: Status, evaluations: u64, bound: Option<usize>) -> Self {
        SolveReport {
            status,
            witness: None,
            support: None,
            evaluations,
            bound,
        }
    }
}

#[derive(Default)]
struct Scratch {
    x: Vec<DElem>,
    nodes: Vec<DElem>,
}

/// Smallest index in `0..total` accepted by `test`.
fn first_hit(total: u64, block: u64, test: impl Fn(u64, &mut Scratch) -> bool + Sync) -> Option<u64> {
    let blocks = total.div_ceil(block);
    (0..blocks).into_par_iter().find_map_first(|b| {
        let mut s = Scratch::default();
        (b * block..((b + 1) * block).min(total)).find(|&i| test(i, &mut s))
    })
}

fn tuple_count(spec: &AlgebraSpec, n: usize, ceiling: u128) -> Result<u64> {
    let size = spec.carrier_size();
    let total = (0..n).try_fold(1u128, |acc, _| acc.checked_mul(size)).unwrap_or(u128::MAX);
    if total > ceiling {
        return Err(Error::ceiling("exhaustive evaluation count", total, ceiling));
    }
    Ok(total as u64)
}

/// The `idx`-th tuple of `D^n` in lexicographic order.
fn decode_tuple(spec: &AlgebraSpec, n: usize, mut idx: u64, out: &mut Vec<DElem>) {
    let size = spec.carrier_size() as u64;
    out.clear();
    out.resize(n, spec.zero());
    for slot in out.iter_mut().rev() {
        *slot = spec.elem_at((idx % size) as usize);
        idx /= size;
    }
}

fn brute(circuit: &Circuit, goal: Goal, ceiling: u128) -> Result<SolveReport> {
    let spec = circuit.spec();
    let n = circuit.arity();
    let total = tuple_count(spec, n, ceiling)?;
    let hit = first_hit(total, BLOCK, |i, s| {
        decode_tuple(spec, n, i, &mut s.x);
        goal.hit(&circuit.eval_with(&s.x, &mut s.nodes))
    });
    Ok(match hit {
        Some(i) => {
            let mut x = Vec::new();
            decode_tuple(spec, n, i, &mut x);
            SolveReport::found(x, i + 1, None)
        }
        None => SolveReport::none(Status::Unsat, total, None),
    })
}

/// Exhaustive search in lexicographic order of `D^n`.
pub fn solve_brute(inst: &Instance, ceiling: u128) -> Result<SolveReport> {
    brute(&inst.circuit, Goal::Equals(inst.target), ceiling)
}

/// `|t^{-1}(d)|`.
pub fn count_solutions(inst: &Instance, ceiling: u128) -> Result<u64> {
    let counts = value_counts(&inst.circuit, ceiling)?;
    Ok(counts[inst.spec().index_of(&inst.target)])
}

/// `|t^{-1}(d)|` for every `d`, indexed by the lexicographic index of `d`.
pub fn value_counts(circuit: &Circuit, ceiling: u128) -> Result<Vec<u64>> {
    let spec = circuit.spec();
    let n = circuit.arity();
    let total = tuple_count(spec, n, ceiling)?;
    let size = spec.carrier_size();
    if size > 1 << 20 {
        return Err(Error::ceiling("value table size", size, 1 << 20));
    }
    let size = size as usize;
    let blocks = total.div_ceil(BLOCK);
    Ok((0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut s = Scratch::default();
            let mut counts = vec![0u64; size];
            for i in b * BLOCK..((b + 1) * BLOCK).min(total) {
                decode_tuple(spec, n, i, &mut s.x);
                counts[spec.index_of(&circuit.eval_with(&s.x, &mut s.nodes))] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; size],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "preset", rename_all = "lowercase")]
pub enum BoundPreset {
    /// `ceil(c * log2(size)^(h-1))`.
    Sesh { c: f64 },
    /// The arity: complete.
    Exhaustive,
    Fixed { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportBound {
    pub preset: BoundPreset,
    /// Keep enlarging the support past the bound up to the arity.
    pub escalate: bool,
}

impl SupportBound {
    pub fn sesh(c: f64) -> Self {
        SupportBound {
            preset: BoundPreset::Sesh { c },
            escalate: false,
        }
    }

    pub fn exhaustive() -> Self {
        SupportBound {
            preset: BoundPreset::Exhaustive,
            escalate: false,
        }
    }

    pub fn fixed(k: usize) -> Self {
        SupportBound {
            preset: BoundPreset::Fixed { k },
            escalate: false,
        }
    }

    pub fn escalating(self, escalate: bool) -> Self {
        SupportBound { escalate, ..self }
    }

    /// The bound for a circuit of `size` nodes over `h` levels with `n`
    /// variables, capped at `n`.
    pub fn resolve(&self, size: usize, h: usize, n: usize) -> usize {
        let b = match self.preset {
            BoundPreset::Sesh { c } => sesh_bound(c, size, h),
            BoundPreset::Exhaustive => n,
            BoundPreset::Fixed { k } => k,
        };
        b.min(n)
    }
}

pub fn sesh_bound(c: f64, size: usize, h: usize) -> usize {
    let l = (size.max(1) as f64).log2();
    let v = (c * l.powi(h as i32 - 1)).ceil();
    if v.is_finite() && v > 0.0 {
        v.min(usize::MAX as f64) as usize
    } else {
        0
    }
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| {
        acc.saturating_mul((n - i) as u128) / (i as u128 + 1)
    })
}

/// The `rank`-th `r`-subset of `0..n` in lexicographic order.
fn unrank_subset(n: usize, r: usize, mut rank: u128, out: &mut Vec<usize>) {
    out.clear();
    let mut c = 0;
    for i in 0..r {
        loop {
            let count = binom(n - c - 1, r - i - 1);
            if rank < count {
                break;
            }
            rank -= count;
            c += 1;
        }
        out.push(c);
        c += 1;
    }
}

fn sparse(circuit: &Circuit, goal: Goal, bound: SupportBound, ceiling: u128) -> Result<SolveReport> {
    let spec = circuit.spec();
    let n = circuit.arity();
    let b = bound.resolve(circuit.size(), spec.h(), n);
    let limit = if bound.escalate { n } else { b };
    let nonzero = spec.carrier_size() - 1;
    let mut evaluations = 0u64;
    for r in 0..=limit {
        let values = (0..r).try_fold(1u128, |acc, _| acc.checked_mul(nonzero)).unwrap_or(u128::MAX);
        let count = binom(n, r).saturating_mul(values);
        if count > ceiling {
            return Err(Error::ceiling("sparse candidate count", count, ceiling));
        }
        let count = count as u64;
        let decode = |i: u64, x: &mut Vec<DElem>, support: &mut Vec<usize>| {
            let values = values as u64;
            unrank_subset(n, r, (i / values) as u128, support);
            let mut v = i % values;
            x.clear();
            x.resize(n, spec.zero());
            for &pos in support.iter().rev() {
                x[pos] = spec.elem_at((v % nonzero as u64) as usize + 1);
                v /= nonzero as u64;
            }
        };
        let hit = first_hit(count, BLOCK, |i, s| {
            let mut support = Vec::with_capacity(r);
            decode(i, &mut s.x, &mut support);
            goal.hit(&circuit.eval_with(&s.x, &mut s.nodes))
        });
        if let Some(i) = hit {
            let mut x = Vec::new();
            decode(i, &mut x, &mut Vec::new());
            return Ok(SolveReport::found(x, evaluations + i + 1, Some(b)));
        }
        evaluations += count;
    }
    let status = if limit == n {
        Status::Unsat
    } else {
        Status::UnsatAtBound
    };
    Ok(SolveReport::none(status, evaluations, Some(b)))
}

/// Tries all assignments with at most `B` nonzero coordinates: support size
/// ascending, supports lexicographically, values lexicographically.
pub fn solve_sparse(inst: &Instance, bound: SupportBound, ceiling: u128) -> Result<SolveReport> {
    sparse(&inst.circuit, Goal::Equals(inst.target), bound, ceiling)
}

fn sample_into<R: Rng>(spec: &AlgebraSpec, n: usize, rng: &mut R, x: &mut Vec<DElem>, coords: &mut Vec<u32>) {
    x.clear();
    for _ in 0..n {
        coords.clear();
        coords.extend(spec.primes().iter().map(|&p| rng.gen_range(0..p)));
        x.push(spec.elem(coords).expect("sampled residues are in range"));
    }
}

/// Calls `visit` on the samples of block `b` in order until it returns true.
fn sample_block(
    spec: &AlgebraSpec,
    n: usize,
    seed: u64,
    b: u64,
    len: u64,
    mut visit: impl FnMut(u64, &[DElem]) -> bool,
) -> Option<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(b);
    let mut x = Vec::with_capacity(n);
    let mut coords = Vec::with_capacity(spec.h());
    for i in 0..len {
        sample_into(spec, n, &mut rng, &mut x, &mut coords);
        if visit(b * SAMPLE_BLOCK + i, &x) {
            return Some(b * SAMPLE_BLOCK + i);
        }
    }
    None
}

fn random(circuit: &Circuit, goal: Goal, budget: u64, seed: u64) -> SolveReport {
    let spec = circuit.spec();
    let n = circuit.arity();
    let blocks = budget.div_ceil(SAMPLE_BLOCK);
    let hit = (0..blocks).into_par_iter().find_map_first(|b| {
        let len = SAMPLE_BLOCK.min(budget - b * SAMPLE_BLOCK);
        let mut scratch = Vec::new();
        let mut found = None;
        sample_block(spec, n, seed, b, len, |_, x| {
            if goal.hit(&circuit.eval_with(x, &mut scratch)) {
                found = Some(x.to_vec());
                true
            } else {
                false
            }
        })
        .map(|i| (i, found.expect("hit recorded")))
    });
    match hit {
        Some((i, x)) => SolveReport::found(x, i + 1, None),
        None => SolveReport::none(Status::GiveUp, budget, None),
    }
}

/// Uniform sampling of `budget` tuples; GIVE-UP is not a proof of
/// unsatisfiability.
pub fn solve_random(inst: &Instance, budget: u64, seed: u64) -> Result<SolveReport> {
    if budget == 0 {
        return Err(Error::InvalidArgument("sample budget must be at least 1".into()));
    }
    Ok(random(&inst.circuit, Goal::Equals(inst.target), budget, seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "solver", rename_all = "lowercase")]
pub enum Method {
    Brute { ceiling: u128 },
    Sparse { bound: SupportBound, ceiling: u128 },
    Random { budget: u64, seed: u64 },
}

impl Method {
    fn search(&self, circuit: &Circuit, goal: Goal) -> Result<SolveReport> {
        match *self {
            Method::Brute { ceiling } => brute(circuit, goal, ceiling),
            Method::Sparse { bound, ceiling } => sparse(circuit, goal, bound, ceiling),
            Method::Random { budget, seed } => {
                if budget == 0 {
                    return Err(Error::InvalidArgument("sample budget must be at least 1".into()));
                }
                Ok(random(circuit, goal, budget, seed))
            }
        }
    }
}

pub fn solve(inst: &Instance, method: Method) -> Result<SolveReport> {
    method.search(&inst.circuit, Goal::Equals(inst.target))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CeqvStatus {
    #[serde(rename = "EQUIV")]
    Equiv,
    #[serde(rename = "NOT-EQUIV")]
    NotEquiv,
    #[serde(rename = "EQUIV-AT-BOUND")]
    EquivAtBound,
    #[serde(rename = "GIVE-UP")]
    GiveUp,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CeqvReport {
    pub status: CeqvStatus,
    pub counterexample: Option<Vec<DElem>>,
    pub value: Option<DElem>,
    pub evaluations: u64,
}

/// Decides `t ≡ 0` by searching for a solution of `t(x) = d` with `d != 0`;
/// the searches for all `d` share one pass over the candidates.
pub fn ceqv(t: &Circuit, method: Method) -> Result<CeqvReport> {
    let r = method.search(t, Goal::NonZero)?;
    let value = match &r.witness {
        Some(x) => Some(t.evaluate(x)?),
        None => None,
    };
    let status = match r.status {
        Status::Sat => CeqvStatus::NotEquiv,
        Status::Unsat => CeqvStatus::Equiv,
        Status::UnsatAtBound => CeqvStatus::EquivAtBound,
        Status::GiveUp => CeqvStatus::GiveUp,
    };
    Ok(CeqvReport {
        status,
        counterexample: r.witness,
        value,
        evaluations: r.evaluations,
    })
}

/// `E^k(u)`: tuples agreeing with `u` on every level except `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SliceSet {
    pub u: Vec<DElem>,
    pub k: usize,
}

fn with_level(spec: &AlgebraSpec, a: &DElem, k: usize, value: u32) -> DElem {
    let mut c = a.coords();
    c[k - 1] = value % spec.prime(k);
    spec.elem(&c).expect("residues in range")
}

impl SliceSet {
    pub fn new(spec: &AlgebraSpec, u: Vec<DElem>, k: usize) -> Result<Self> {
        spec.check_level(k, 1, spec.h())?;
        for a in &u {
            spec.check(a)?;
        }
        Ok(SliceSet { u, k })
    }

    pub fn contains(&self, b: &[DElem]) -> bool {
        b.len() == self.u.len()
            && b.iter().zip(&self.u).all(|(x, y)| {
                (1..=x.h()).all(|j| j == self.k || x.coord(j) == y.coord(j))
            })
    }

    pub fn size(&self, spec: &AlgebraSpec) -> u128 {
        (spec.prime(self.k) as u128).saturating_pow(self.u.len() as u32)
    }

    /// The point whose level-`k` coordinates are `values`.
    pub fn point(&self, spec: &AlgebraSpec, values: &[u32]) -> Vec<DElem> {
        self.u
            .iter()
            .zip(values)
            .map(|(a, &v)| with_level(spec, a, self.k, v))
            .collect()
    }

    /// All points, level-`k` coordinate vectors in lexicographic order.
    pub fn points(&self, spec: &AlgebraSpec, ceiling: u128) -> Result<Vec<Vec<DElem>>> {
        let size = self.size(spec);
        if size > ceiling {
            return Err(Error::ceiling("slice size", size, ceiling));
        }
        let p = spec.prime(self.k);
        let n = self.u.len();
        Ok((0..size as usize)
            .map(|idx| self.point(spec, &crate::funcrep::decode(idx, p, n)))
            .collect())
    }
}

/// `t(b) = 0` restricted to `b ∈ E^k(u)`: constants at the levels above `k`
/// and one equation per level `1..=k`, each reading only the `e_k(b_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReducedSystem {
    pub k: usize,
    /// Values at levels `k+1..=h`; each must vanish.
    pub upper: Vec<u32>,
    /// `levels[j - 1]` is the level-`j` equation `form = 0`.
    pub levels: Vec<Arc<LevelForm>>,
}

impl ReducedSystem {
    pub fn arity(&self) -> usize {
        self.levels[0].arity()
    }

    pub fn holds(&self, spec: &AlgebraSpec, b: &[DElem]) -> bool {
        self.upper.iter().all(|&c| c == 0) && self.levels.iter().all(|f| f.eval(spec, b) == 0)
    }
}

pub fn restrict_to_slice(form: &CanonicalForm, spec: &AlgebraSpec, slice: &SliceSet) -> Result<ReducedSystem> {
    if slice.u.len() != form.arity {
        return Err(Error::ArityMismatch {
            expected: form.arity,
            got: slice.u.len(),
        });
    }
    if form.h() != spec.h() {
        return Err(Error::SpecMismatch);
    }
    let k = slice.k;
    let specialized: Vec<Arc<LevelForm>> = (1..=spec.h())
        .map(|j| form.level(j).specialize(spec, &slice.u, k))
        .collect();
    let upper = specialized[k..].iter().map(|f| f.constant).collect();
    let levels = specialized[..k].to_vec();
    Ok(ReducedSystem { k, upper, levels })
}

type Poly = BTreeMap<u64, u32>;

fn poly_mul(a: &Poly, b: &Poly, p: u32) -> Poly {
    let mut out = Poly::new();
    for (&ma, &ca) in a {
        for (&mb, &cb) in b {
            let e = out.entry(ma | mb).or_insert(0);
            *e = (*e + ca * cb) % p;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// A single equation `t*(b) = e_1 1` equivalent on the slice to the whole
/// system, with `t*` taking only the values `0` and `e_1 1`.
///
/// With `w_s = v_1(z_s)` for the inner forms `z_s` of the level-1 equation
/// `A = c + sum kappa_s w_s`, and `w_j = v_1 v_2 ... v_{j-1}(r_j)` for the
/// level-`j` equations `r_j` (`j >= 2`), `t*` is
/// `(1 - A^(p_1 - 1)) * prod_j (1 - w_j)` expanded into multilinear monomials
/// in the `w`'s; a monomial `prod_{s in S} w_s` is the gadget
/// `AND^{|S|}_1(z_S)`. For `k = 1` the single equation is linear and `t*` is
/// `e_1 1 - r_1`, which needs `p_1 = 2`.
pub fn combine_system_v(system: &ReducedSystem, spec: &AlgebraSpec, limits: CompileLimits) -> Result<Circuit> {
    let n = system.arity();
    let mut b = Builder::new(spec, n);
    let args: Vec<NodeId> = (0..n).map(|i| b.var(i)).collect();
    if system.upper.iter().any(|&c| c != 0) {
        let z = b.zero();
        return Ok(b.finish(z));
    }
    let k = system.k;
    let p1 = spec.prime(1);
    let one = b.constant(spec.unit(1));
    if k == 1 {
        if p1 != 2 {
            return Err(Error::InvalidArgument(format!(
                "a level-1 system over Z_{p1} is linear and has no two-valued combination; solve it directly"
            )));
        }
        let r = system.levels[0].build(&mut b, &args);
        let out = b.sub(one, r);
        return Ok(b.finish(out));
    }
    let first = &system.levels[0];
    let mut z: Vec<NodeId> = first
        .vterms
        .iter()
        .map(|t| t.inner.build(&mut b, &args))
        .collect();
    let a_vars = z.len();
    for j in 2..=k {
        let r = system.levels[j - 1].build(&mut b, &args);
        let node = if j == 2 { r } else { b.v_chain(2, j - 1, r) };
        z.push(node);
    }
    if z.len() > 64 {
        return Err(Error::ceiling("combined system variables", z.len() as u128, 64));
    }
    let mut a = Poly::new();
    if first.constant != 0 {
        a.insert(0, first.constant);
    }
    for (s, t) in first.vterms.iter().enumerate() {
        a.insert(1 << s, t.coeff);
    }
    let mut power = Poly::from([(0, 1)]);
    for _ in 0..p1 - 1 {
        power = poly_mul(&power, &a, p1);
    }
    let mut f: Poly = power.iter().map(|(&m, &c)| (m, (p1 - c) % p1)).collect();
    *f.entry(0).or_insert(0) += 1;
    f.retain(|_, c| {
        *c %= p1;
        *c != 0
    });
    for j in a_vars..z.len() {
        f = poly_mul(&f, &Poly::from([(0, 1), (1u64 << j, p1 - 1)]), p1);
    }
    let mut gadgets: BTreeMap<usize, Circuit> = BTreeMap::new();
    let mut parts = Vec::new();
    for (&mask, &coeff) in &f {
        let node = if mask == 0 {
            one
        } else {
            let inputs: Vec<NodeId> = (0..z.len()).filter(|i| mask >> i & 1 == 1).map(|i| z[i]).collect();
            let gadget = match gadgets.entry(inputs.len()) {
                std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(build_and_with(inputs.len(), 1, spec, limits)?)
                }
            };
            gadget.import_into(&mut b, &inputs)
        };
        parts.push(b.scale(node, coeff));
    }
    let out = b.sum(parts);
    Ok(b.finish(out))
}

/// `c + node`, or `node` alone when `c = 0`.
fn offset(b: &mut Builder, c: DElem, node: NodeId) -> NodeId {
    if c.is_zero() {
        node
    } else {
        let c = b.constant(c);
        b.add(c, node)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConjunctionMode {
    Substitute,
    Affine,
}

#[derive(Debug, Clone)]
pub struct Conjunction {
    pub circuit: Circuit,
    /// Original index of each surviving variable.
    pub vars: Vec<usize>,
    /// The isolating subspace of affine mode.
    pub hyperplanes: Option<AffineSystem>,
}

/// Turns a solution `a` of `t*(x) = e_1 1` into a term on `{0, e_k 1}^l`
/// that takes the value `e_1 1` at the all-ones point.
///
/// Substitute mode fixes every `x_i` with `e_k(a_i) = 0` to `a_i` and
/// replaces the others by `a_i - e_k(a_i) + lambda_i * y`, where
/// `e_k(a_i) = lambda_i * e_k 1`. Affine mode enumerates the solutions inside
/// `E^k(a)`, isolates one point `z` by affine hyperplanes, keeps the free
/// coordinates of the hyperplanes as variables shifted so that all-ones maps
/// to `z`, and expresses the pivot coordinates through them. On
/// `{0, e_k 1}^l` the affine result is then exactly a conjunction.
pub fn extract_conjunction(
    t_star: &Circuit,
    k: usize,
    a: &[DElem],
    mode: ConjunctionMode,
    ceiling: u128,
) -> Result<Conjunction> {
    let spec = t_star.spec();
    spec.check_level(k, 1, spec.h())?;
    let e11 = spec.unit(1);
    if t_star.evaluate(a)? != e11 {
        return Err(Error::NotASolution(format!("t*(a) != {e11}")));
    }
    let p = spec.prime(k);
    match mode {
        ConjunctionMode::Substitute => {
            let vars: Vec<usize> = (0..a.len()).filter(|&i| a[i].coord(k) != 0).collect();
            let mut b = Builder::new(spec, vars.len());
            let mut args = Vec::with_capacity(a.len());
            let mut next = 0;
            for ai in a {
                let lambda = ai.coord(k);
                if lambda == 0 {
                    args.push(b.constant(*ai));
                    continue;
                }
                let y = b.var(next);
                next += 1;
                let scaled = b.scale(y, lambda);
                args.push(offset(&mut b, with_level(spec, ai, k, 0), scaled));
            }
            let out = t_star.import_into(&mut b, &args);
            Ok(Conjunction {
                circuit: b.finish(out),
                vars,
                hyperplanes: None,
            })
        }
        ConjunctionMode::Affine => {
            let slice = SliceSet::new(spec, a.to_vec(), k)?;
            let mut scratch = Vec::new();
            let z: Vec<Vec<u32>> = slice
                .points(spec, ceiling)?
                .into_iter()
                .filter(|x| t_star.eval_with(x, &mut scratch) == e11)
                .map(|x| x.iter().map(|c| c.coord(k)).collect())
                .collect();
            let iso = isolate_point(p, &z)?;
            let reduced = iso
                .hyperplanes
                .row_reduce()
                .expect("the isolating subspace contains its point");
            let point = &iso.point;
            let shift = |i: usize| (point[i] + p - 1) % p;
            let mut b = Builder::new(spec, reduced.free.len());
            let mut args = vec![NodeId(0); a.len()];
            let mut free_nodes = BTreeMap::new();
            for (pos, &i) in reduced.free.iter().enumerate() {
                let y = b.var(pos);
                free_nodes.insert(i, y);
                args[i] = offset(&mut b, with_level(spec, &a[i], k, shift(i)), y);
            }
            for (j, terms, beta) in reduced.expressions() {
                let shift_j = terms
                    .iter()
                    .fold(beta, |acc, &(i, alpha)| (acc + alpha * shift(i)) % p);
                let parts: Vec<NodeId> = terms
                    .iter()
                    .map(|&(i, alpha)| b.scale(free_nodes[&i], alpha))
                    .collect();
                let lin = b.sum(parts);
                args[j] = offset(&mut b, with_level(spec, &a[j], k, shift_j), lin);
            }
            let out = t_star.import_into(&mut b, &args);
            Ok(Conjunction {
                circuit: b.finish(out),
                vars: reduced.free.clone(),
                hyperplanes: Some(iso.hyperplanes),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueCount {
    pub value: DElem,
    pub count: u64,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub value: DElem,
    pub hits: u64,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub total: u64,
    pub exact: Vec<ValueCount>,
    pub samples: u64,
    pub seed: u64,
    pub estimates: Vec<Estimate>,
}

impl DensityReport {
    pub fn density(&self, d: &DElem) -> f64 {
        self.exact
            .iter()
            .find(|v| v.value == *d)
            .map_or(0.0, |v| v.density)
    }
}

/// Exact `|t^{-1}(d)|` for every `d`, plus estimates from `samples` seeded
/// uniform samples with binomial standard errors.
pub fn density_report(circuit: &Circuit, ceiling: u128, samples: u64, seed: u64) -> Result<DensityReport> {
    let spec = circuit.spec();
    let counts = value_counts(circuit, ceiling)?;
    let total: u64 = counts.iter().sum();
    let exact = counts
        .iter()
        .enumerate()
        .map(|(i, &count)| ValueCount {
            value: spec.elem_at(i),
            count,
            density: count as f64 / total as f64,
        })
        .collect();
    let n = circuit.arity();
    let size = counts.len();
    let blocks = samples.div_ceil(SAMPLE_BLOCK);
    let hits = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut c = vec![0u64; size];
            let mut scratch = Vec::new();
            let len = SAMPLE_BLOCK.min(samples - b * SAMPLE_BLOCK);
            sample_block(spec, n, seed, b, len, |_, x| {
                c[spec.index_of(&circuit.eval_with(x, &mut scratch))] += 1;
                false
            });
            c
        })
        .reduce(
            || vec![0u64; size],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let estimates = hits
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let est = if samples == 0 { 0.0 } else { h as f64 / samples as f64 };
            let se = if samples == 0 {
                0.0
            } else {
                (est * (1.0 - est) / samples as f64).sqrt()
            };
            Estimate {
                value: spec.elem_at(i),
                hits: h,
                estimate: est,
                std_error: se,
            }
        })
        .collect();
    Ok(DensityReport {
        total,
        exact,
        samples,
        seed,
        estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::canonicalize;
    use crate::ccircuit::extract_cc;
    use crate::terms::parse;

    fn spec(p: &[u32]) -> AlgebraSpec {
        AlgebraSpec::new(p).unwrap()
    }

    fn inst(s: &AlgebraSpec, text: &str, d: &str) -> Instance {
        Instance::new(parse(s, text, None).unwrap(), s.parse_elem(d).unwrap()).unwrap()
    }

    const SUPPORT_ONE: &str = "(+ (v 1 (+ (e 2 (var 0)) (e 2 (var 1)))) (const 1:0))";

    #[test]
    fn brute_examples() {
        let s = spec(&[2, 3]);
        let i = inst(&s, "(e 1 (var 0))", "0:0");
        let r = solve_brute(&i, BRUTE_CEILING).unwrap();
        assert_eq!(r.status, Status::Sat);
        assert_eq!(r.witness, Some(vec![s.zero()]));
        assert_eq!(count_solutions(&i, BRUTE_CEILING).unwrap(), 3);

        let i = inst(&s, "(const 1:0)", "0:0");
        assert_eq!(solve_brute(&i, BRUTE_CEILING).unwrap().status, Status::Unsat);

        let i = inst(&s, "(var 0)", "1:2");
        let r = solve_brute(&i, BRUTE_CEILING).unwrap();
        assert_eq!(r.witness, Some(vec![s.elem(&[1, 2]).unwrap()]));
        assert_eq!(count_solutions(&i, BRUTE_CEILING).unwrap(), 1);
    }

    #[test]
    fn brute_ceiling() {
        let s = spec(&[2, 3]);
        let c = parse(&s, "(+ (var 0) (var 11))", None).unwrap();
        assert!(matches!(
            solve_brute(&Instance::zero(c), BRUTE_CEILING),
            Err(Error::Ceiling { .. })
        ));
    }

    #[test]
    fn sparse_examples() {
        let s = spec(&[2, 3]);
        let i = inst(&s, SUPPORT_ONE, "0:0");
        let r = solve_sparse(&i, SupportBound::exhaustive(), BRUTE_CEILING).unwrap();
        assert_eq!(r.status, Status::Sat);
        assert_eq!(r.support, Some(1));
        assert_eq!(r.witness, Some(vec![s.elem(&[0, 1]).unwrap(), s.zero()]));

        let i = inst(&s, "(const 0:0)", "0:0");
        let r = solve_sparse(&i, SupportBound::fixed(0), BRUTE_CEILING).unwrap();
        assert_eq!((r.status, r.support), (Status::Sat, Some(0)));

        let i = inst(&s, "(+ (e 1 (var 0)) (const 1:0))", "0:0");
        let r = solve_sparse(&i, SupportBound::fixed(0), BRUTE_CEILING).unwrap();
        assert_eq!(r.status, Status::UnsatAtBound);
        let r = solve_sparse(&i, SupportBound::fixed(0).escalating(true), BRUTE_CEILING).unwrap();
        assert_eq!(r.witness, Some(vec![s.elem(&[1, 0]).unwrap()]));

        let i = inst(&s, "(const 1:0)", "0:0");
        let r = solve_sparse(&i, SupportBound::exhaustive(), BRUTE_CEILING).unwrap();
        assert_eq!(r.status, Status::Unsat);
    }

    #[test]
    fn subsets_unrank_in_lex_order() {
        let mut all = Vec::new();
        let mut v = Vec::new();
        for rank in 0..binom(5, 3) {
            unrank_subset(5, 3, rank, &mut v);
            all.push(v.clone());
        }
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(all, sorted);
        assert_eq!(all.len(), 10);
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all[9], vec![2, 3, 4]);
    }

    #[test]
    fn sesh_values() {
        assert_eq!(sesh_bound(1.0, 1, 3), 0);
        assert_eq!(sesh_bound(1.0, 8, 3), 9);
        assert_eq!(sesh_bound(2.0, 4, 2), 4);
        assert_eq!(SupportBound::sesh(1.0).resolve(1 << 10, 3, 5), 5);
    }

    #[test]
    fn random_examples() {
        let s = spec(&[2, 3]);
        let i = inst(&s, SUPPORT_ONE, "0:0");
        assert_eq!(count_solutions(&i, BRUTE_CEILING).unwrap(), 24);
        let ok = (0..100)
            .filter(|&seed| solve_random(&i, 20, seed).unwrap().status == Status::Sat)
            .count();
        assert!(ok >= 99);
        let r = solve_random(&inst(&s, "(const 0:0)", "0:0"), 5, 1).unwrap();
        assert_eq!(r.evaluations, 1);
        let r = solve_random(&inst(&s, "(const 1:0)", "0:0"), 50, 1).unwrap();
        assert_eq!((r.status, r.evaluations), (Status::GiveUp, 50));
        assert!(solve_random(&i, 0, 1).is_err());
    }

    #[test]
    fn random_is_reproducible_across_pools() {
        let s = spec(&[2, 3, 2]);
        let i = inst(&s, "(+ (v 1 (v 2 (+ (var 0) (var 1)))) (e 1 (var 2)))", "1:0:0");
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| solve_random(&i, 5000, 42).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn ceqv_examples() {
        let s = spec(&[2, 3]);
        let m = Method::Brute { ceiling: BRUTE_CEILING };
        let t = parse(&s, "(+ (e 1 (var 0)) (- (e 1 (var 0))))", None).unwrap();
        assert_eq!(ceqv(&t, m).unwrap().status, CeqvStatus::Equiv);
        let t = parse(&s, "(v 1 (e 2 (var 0)))", None).unwrap();
        let r = ceqv(&t, m).unwrap();
        assert_eq!(r.status, CeqvStatus::NotEquiv);
        assert_eq!(r.counterexample, Some(vec![s.elem(&[0, 1]).unwrap()]));
        assert_eq!(r.value, Some(s.unit(1)));
        let t = parse(&s, "(const 0:0)", None).unwrap();
        assert_eq!(ceqv(&t, m).unwrap().status, CeqvStatus::Equiv);
    }

    #[test]
    fn slices() {
        let s = spec(&[2, 3]);
        let t = parse(&s, "(+ (v 1 (+ (var 0) (var 1))) (e 1 (var 1)))", None).unwrap();
        let form = canonicalize(&t);
        for k in 1..=2 {
            for ui in 0..36 {
                let u = vec![s.elem_at(ui / 6), s.elem_at(ui % 6)];
                let slice = SliceSet::new(&s, u, k).unwrap();
                let sys = restrict_to_slice(&form, &s, &slice).unwrap();
                assert_eq!(sys.levels.len(), k);
                for b in slice.points(&s, 1000).unwrap() {
                    assert!(slice.contains(&b));
                    assert_eq!(sys.holds(&s, &b), t.evaluate(&b).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn slice_of_level_one() {
        let s = spec(&[2, 3]);
        let t = parse(&s, "(+ (e 1 (var 0)) (v 1 (var 1)))", None).unwrap();
        let slice = SliceSet::new(&s, vec![s.zero(), s.elem(&[0, 2]).unwrap()], 1).unwrap();
        let sys = restrict_to_slice(&canonicalize(&t), &s, &slice).unwrap();
        assert_eq!(sys.levels[0].linear, vec![1, 0]);
        assert_eq!(sys.levels[0].constant, 1);
        assert!(sys.levels[0].vterms.is_empty());
    }

    fn check_combiner(s: &AlgebraSpec, text: &str, u: Vec<DElem>, k: usize) {
        let t = parse(s, text, None).unwrap();
        let slice = SliceSet::new(s, u, k).unwrap();
        let sys = restrict_to_slice(&canonicalize(&t), s, &slice).unwrap();
        let star = combine_system_v(&sys, s, CompileLimits::default()).unwrap();
        for b in slice.points(s, 1000).unwrap() {
            let v = star.evaluate(&b).unwrap();
            assert_eq!(v == s.unit(1), sys.holds(s, &b));
        }
        let n = t.arity();
        let size = s.carrier_size() as usize;
        for idx in 0..size.pow(n as u32) {
            let mut x = Vec::new();
            decode_tuple(s, n, idx as u64, &mut x);
            let v = star.evaluate(&x).unwrap();
            assert!(v.is_zero() || v == s.unit(1));
        }
    }

    #[test]
    fn combiner_cases() {
        let s = spec(&[2, 3]);
        check_combiner(&s, SUPPORT_ONE, vec![s.zero(), s.zero()], 2);
        check_combiner(&s, "(+ (e 1 (var 0)) (v 1 (var 1)))", vec![s.zero(), s.zero()], 1);
        let s3 = spec(&[2, 3, 2]);
        check_combiner(
            &s3,
            "(+ (v 1 (+ (v 2 (var 0)) (e 2 (var 1)))) (+ (e 2 (var 0)) (v 2 (var 1))))",
            vec![s3.elem(&[1, 0, 1]).unwrap(), s3.zero()],
            2,
        );
        check_combiner(
            &s3,
            "(+ (v 1 (+ (v 2 (var 0)) (e 2 (var 1)))) (+ (e 3 (var 0)) (v 2 (var 1))))",
            vec![s3.zero(), s3.elem(&[0, 0, 1]).unwrap()],
            3,
        );
    }

    #[test]
    fn combiner_constant_systems() {
        let s = spec(&[2, 3]);
        let t = parse(&s, "(const 0:0)", None).unwrap();
        let slice = SliceSet::new(&s, vec![], 2).unwrap();
        let sys = restrict_to_slice(&canonicalize(&t), &s, &slice).unwrap();
        let star = combine_system_v(&sys, &s, CompileLimits::default()).unwrap();
        assert_eq!(star.evaluate(&[]).unwrap(), s.unit(1));
        let t = parse(&s, "(const 0:1)", None).unwrap();
        let sys = restrict_to_slice(&canonicalize(&t), &s, &SliceSet::new(&s, vec![], 1).unwrap()).unwrap();
        let star = combine_system_v(&sys, &s, CompileLimits::default()).unwrap();
        assert!(star.evaluate(&[]).unwrap().is_zero());
    }

    #[test]
    fn conjunction_extraction() {
        let s = spec(&[2, 3]);
        let t = parse(&s, SUPPORT_ONE, None).unwrap();
        let u = vec![s.zero(), s.zero()];
        let sys = restrict_to_slice(&canonicalize(&t), &s, &SliceSet::new(&s, u, 2).unwrap()).unwrap();
        let star = combine_system_v(&sys, &s, CompileLimits::default()).unwrap();
        let a = vec![s.elem(&[0, 1]).unwrap(), s.zero()];
        let conj = extract_conjunction(&star, 2, &a, ConjunctionMode::Substitute, 1000).unwrap();
        assert_eq!(conj.vars, vec![0]);
        assert_eq!(conj.circuit.evaluate(&[s.unit(2)]).unwrap(), s.unit(1));
        let cc = extract_cc(&conj.circuit, 0, 2).unwrap();
        assert_eq!(cc.depth(), 2);
        assert!(cc.eval(&[true]).unwrap());

        let zero = vec![s.zero(), s.zero()];
        assert!(extract_conjunction(&star, 2, &zero, ConjunctionMode::Substitute, 1000).is_err());

        let affine = extract_conjunction(&star, 2, &a, ConjunctionMode::Affine, 1000).unwrap();
        let l = affine.vars.len();
        for bits in 0u32..1 << l {
            let y: Vec<DElem> = (0..l)
                .map(|i| if bits >> i & 1 == 1 { s.unit(2) } else { s.zero() })
                .collect();
            let all = bits == (1 << l) - 1;
            assert_eq!(affine.circuit.evaluate(&y).unwrap() == s.unit(1), all);
        }
    }

    #[test]
    fn trivial_conjunction() {
        let s = spec(&[2, 3]);
        let star = parse(&s, "(const 1:0)", Some(2)).unwrap();
        let conj = extract_conjunction(&star, 2, &[s.zero(), s.zero()], ConjunctionMode::Substitute, 1000).unwrap();
        assert!(conj.vars.is_empty());
        assert_eq!(conj.circuit.evaluate(&[]).unwrap(), s.unit(1));
    }

    #[test]
    fn affine_matches_substitute_without_cuts() {
        let s = spec(&[2, 3, 2]);
        let star = parse(&s, "(v 1 (v 2 (+ (e 3 (var 0)) (e 3 (var 1)))))", None).unwrap();
        let a = vec![s.unit(3), s.zero()];
        let sub = extract_conjunction(&star, 3, &a, ConjunctionMode::Substitute, 1000).unwrap();
        let star2 = parse(&s, "(v 1 (v 2 (e 3 (var 0))))", Some(1)).unwrap();
        let a2 = vec![s.unit(3)];
        let sub2 = extract_conjunction(&star2, 3, &a2, ConjunctionMode::Substitute, 1000).unwrap();
        let aff2 = extract_conjunction(&star2, 3, &a2, ConjunctionMode::Affine, 1000).unwrap();
        assert_eq!(sub2.circuit, aff2.circuit);
        assert_eq!(sub.vars, vec![0]);
    }

    #[test]
    fn density_examples() {
        let s = spec(&[2, 3]);
        let t = parse(&s, "(e 1 (var 0))", None).unwrap();
        let r = density_report(&t, BRUTE_CEILING, 600, 7).unwrap();
        let c: Vec<u64> = r.exact.iter().map(|v| v.count).collect();
        assert_eq!(c, vec![3, 0, 0, 3, 0, 0]);
        assert_eq!(r.estimates.iter().map(|e| e.hits).sum::<u64>(), 600);
        let t = parse(&s, "(const 0:0)", Some(2)).unwrap();
        assert_eq!(density_report(&t, BRUTE_CEILING, 0, 0).unwrap().exact[0].count, 36);
        let t = parse(&s, "(var 0)", None).unwrap();
        assert!(density_report(&t, BRUTE_CEILING, 0, 0).unwrap().exact.iter().all(|v| v.count == 1));
    }
}
