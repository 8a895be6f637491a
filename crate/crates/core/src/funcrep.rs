//! Compilation of arbitrary functions `(e_l D)^m -> e_k D` into polynomials
//! of `D`, and the conjunction and CNF gadgets built from them.
//!
//! Two-level core (`l = k + 1`, `q = p_l`, `p = p_k`): for an affine hyperplane
//! `H = {x : alpha . x = beta}` of `GF(q)^m` the polynomial
//! `[x in H] = e_k 1 - v_k(alpha . x - beta e_l 1)` is its indicator. A point
//! `a` lies on `N1 = (q^m - 1)/(q - 1)` hyperplanes and any other point shares
//! `N2 = (q^{m-1} - 1)/(q - 1)` of them with `a`, so
//!
//! ```text
//! chi_a(x) = (q^{m-1})^{-1} * (sum_{H ∋ a} [x in H] - N2)
//! ```
//!
//! is the point indicator of `a` whenever `q^{m-1}` is invertible mod `p`.
//! Summing `g(a) * chi_a` and collecting by hyperplane gives
//!
//! ```text
//! g(x) = G * e_k 1 - (q^{m-1})^{-1} * sum_H G(H) * v_k(alpha . x - beta e_l 1)
//! ```
//!
//! where `G(H) = sum_{a in H} g(a)` and `G` is the sum over the whole domain.
//! The size is `O(q^m * m * p)`.
//!
//! For `l > k + 1` the function is split by value: for each nonzero value `c`
//! the indicator of `g^{-1}(c)` is compiled at level `l - 1` and pushed down
//! with `v_k ... v_{l-2}`, then scaled by `c`.

use serde::Serialize;

use crate::algebra::AlgebraSpec;
use crate::cnf::CnfFormula;
use crate::error::{Error, Result};
use crate::terms::{Builder, Circuit, NodeId};

/// Constant `C` of the tree-size envelope `C * p_l^{2m} * m * p_k`.
pub const ENVELOPE_CONSTANT: u128 = 8;

/// Default ceiling on the arity of a compiled function.
pub const DEFAULT_MAX_ARITY: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileLimits {
    pub max_arity: usize,
}

impl Default for CompileLimits {
    fn default() -> Self {
        CompileLimits {
            max_arity: DEFAULT_MAX_ARITY,
        }
    }
}

/// A total function `(Z_{p_source})^arity -> Z_{p_target}`, read as a map
/// `(e_source D)^arity -> e_target D`. The table is indexed in lexicographic
/// order of argument tuples, first argument most significant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelFunction {
    pub source: usize,
    pub target: usize,
    pub arity: usize,
    pub table: Vec<u32>,
}

fn pow(base: u32, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base as u128))
}

fn inverse_mod(a: u32, p: u32) -> Option<u32> {
    let a = a % p;
    (1..p).find(|&x| a * x % p == 1)
}

/// Decodes a lexicographic table index into its argument tuple.
pub fn decode(mut idx: usize, q: u32, m: usize) -> Vec<u32> {
    let mut out = vec![0; m];
    for slot in out.iter_mut().rev() {
        *slot = (idx % q as usize) as u32;
        idx /= q as usize;
    }
    out
}

pub fn encode(args: &[u32], q: u32) -> usize {
    args.iter().fold(0usize, |acc, &a| acc * q as usize + a as usize)
}

impl LevelFunction {
    pub fn new(
        spec: &AlgebraSpec,
        source: usize,
        target: usize,
        arity: usize,
        table: Vec<u32>,
    ) -> Result<Self> {
        spec.check_level(source, 2, spec.h())?;
        spec.check_level(target, 1, source - 1)?;
        let q = spec.prime(source);
        let expected = pow(q, arity);
        if table.len() as u128 != expected {
            return Err(Error::InvalidArgument(format!(
                "table has {} entries, domain has {expected}",
                table.len()
            )));
        }
        let p = spec.prime(target);
        if let Some(&bad) = table.iter().find(|&&v| v >= p) {
            return Err(Error::ResidueOutOfRange {
                level: target,
                value: bad,
                modulus: p,
            });
        }
        Ok(LevelFunction {
            source,
            target,
            arity,
            table,
        })
    }

    /// Tabulates `f` over the domain; `f` values are reduced mod `p_target`.
    pub fn from_fn(
        spec: &AlgebraSpec,
        source: usize,
        target: usize,
        arity: usize,
        ceiling: usize,
        f: impl Fn(&[u32]) -> u32,
    ) -> Result<Self> {
        spec.check_level(source, 2, spec.h())?;
        spec.check_level(target, 1, source - 1)?;
        if arity > ceiling {
            return Err(Error::ceiling("function arity", arity as u128, ceiling as u128));
        }
        let q = spec.prime(source);
        let p = spec.prime(target);
        let size = pow(q, arity) as usize;
        let table = (0..size).map(|i| f(&decode(i, q, arity)) % p).collect();
        Self::new(spec, source, target, arity, table)
    }

    pub fn at(&self, spec: &AlgebraSpec, args: &[u32]) -> u32 {
        self.table[encode(args, spec.prime(self.source))]
    }

    /// `C * p_l^{2m} * m * p_k`.
    pub fn size_envelope(&self, spec: &AlgebraSpec) -> u128 {
        ENVELOPE_CONSTANT
            .saturating_mul(pow(spec.prime(self.source), 2 * self.arity))
            .saturating_mul(self.arity.max(1) as u128)
            .saturating_mul(spec.prime(self.target) as u128)
    }
}

/// Normalized directions of `GF(q)^m`: nonzero vectors whose first nonzero
/// entry is 1.
fn directions(q: u32, m: usize) -> impl Iterator<Item = Vec<u32>> {
    let total = pow(q, m) as usize;
    (1..total)
        .map(move |i| decode(i, q, m))
        .filter(|v| v.iter().find(|&&x| x != 0) == Some(&1))
}

/// Two-level core over already projected arguments `xs` (values in
/// `e_{target+1} D`).
fn two_level(
    b: &mut Builder,
    xs: &[NodeId],
    target: usize,
    table: &[u32],
) -> Result<NodeId> {
    let spec = b.spec().clone();
    let source = target + 1;
    let q = spec.prime(source);
    let p = spec.prime(target);
    let m = xs.len();
    let total: u32 = table.iter().fold(0, |acc, &v| (acc + v) % p);
    if m == 0 {
        let c = spec.at_level(target, table[0]);
        return Ok(b.constant(c));
    }
    let qm1 = (pow(q, m - 1) % p as u128) as u32;
    let inv = inverse_mod(qm1, p).ok_or_else(|| Error::NotAlternating(spec.primes().to_vec()))?;

    let mut parts = Vec::new();
    if total != 0 {
        let c = spec.at_level(target, total);
        parts.push(b.constant(c));
    }
    let domain: Vec<Vec<u32>> = (0..table.len()).map(|i| decode(i, q, m)).collect();
    for alpha in directions(q, m) {
        let mut bucket = vec![0u32; q as usize];
        for (a, &g) in domain.iter().zip(table) {
            if g != 0 {
                let dot = a.iter().zip(&alpha).map(|(x, y)| x * y).sum::<u32>() % q;
                bucket[dot as usize] = (bucket[dot as usize] + g) % p;
            }
        }
        if bucket.iter().all(|&g| g == 0) {
            continue;
        }
        let terms: Vec<NodeId> = alpha
            .iter()
            .zip(xs)
            .filter(|(&a, _)| a != 0)
            .map(|(&a, &x)| b.scale(x, a))
            .collect();
        let lin = b.sum(terms);
        for (beta, &g) in bucket.iter().enumerate() {
            let kappa = g * inv % p;
            if kappa == 0 {
                continue;
            }
            let shifted = if beta == 0 {
                lin
            } else {
                let c = b.constant(spec.at_level(source, q - beta as u32));
                b.add(lin, c)
            };
            let test = b.v(target, shifted);
            parts.push(b.scale(test, p - kappa));
        }
    }
    Ok(b.sum(parts))
}

/// Compiles `g` inside `b`, applied to the argument nodes `args` (any values;
/// they are projected to `e_source` first).
pub fn represent_into(b: &mut Builder, g: &LevelFunction, args: &[NodeId]) -> Result<NodeId> {
    let spec = b.spec().clone();
    if args.len() != g.arity {
        return Err(Error::ArityMismatch {
            expected: g.arity,
            got: args.len(),
        });
    }
    let xs: Vec<NodeId> = args.iter().map(|&a| b.e(g.source, a)).collect();
    if g.source == g.target + 1 {
        return two_level(b, &xs, g.target, &g.table);
    }
    let p = spec.prime(g.target);
    let mut parts = Vec::new();
    for c in 1..p {
        if !g.table.contains(&c) {
            continue;
        }
        let indicator: Vec<u32> = g.table.iter().map(|&v| (v == c) as u32).collect();
        let top = two_level(b, &xs, g.source - 1, &indicator)?;
        let pushed = b.v_chain(g.target, g.source - 2, top);
        parts.push(b.scale(pushed, c));
    }
    Ok(b.sum(parts))
}

/// Compiles `g` with the default limits.
pub fn represent(g: &LevelFunction, spec: &AlgebraSpec) -> Result<Circuit> {
    represent_with(g, spec, CompileLimits::default())
}

/// Compiles `g` and checks the result against the table on the whole domain.
pub fn represent_with(g: &LevelFunction, spec: &AlgebraSpec, limits: CompileLimits) -> Result<Circuit> {
    if g.arity > limits.max_arity {
        return Err(Error::ceiling(
            "function arity",
            g.arity as u128,
            limits.max_arity as u128,
        ));
    }
    let mut b = Builder::new(spec, g.arity);
    let args: Vec<NodeId> = (0..g.arity).map(|i| b.var(i)).collect();
    let out = represent_into(&mut b, g, &args)?;
    let c = b.finish(out);
    verify(&c, g, spec)?;
    Ok(c)
}

/// Exhaustive comparison of a compiled circuit with its table.
pub fn verify(c: &Circuit, g: &LevelFunction, spec: &AlgebraSpec) -> Result<()> {
    let q = spec.prime(g.source);
    let mut scratch = Vec::new();
    for (i, &want) in g.table.iter().enumerate() {
        let x: Vec<_> = decode(i, q, g.arity)
            .into_iter()
            .map(|a| spec.at_level(g.source, a))
            .collect();
        let got = c.eval_with(&x, &mut scratch);
        if got != spec.at_level(g.target, want) {
            return Err(Error::InvalidCircuit(format!(
                "compiled function disagrees with its table at {x:?}"
            )));
        }
    }
    Ok(())
}

/// `AND^s_k : (e_{k+1} D)^s -> e_k D`, equal to `e_k 1` iff no argument is 0.
pub fn build_and(s: usize, k: usize, spec: &AlgebraSpec) -> Result<Circuit> {
    build_and_with(s, k, spec, CompileLimits::default())
}

pub fn build_and_with(s: usize, k: usize, spec: &AlgebraSpec, limits: CompileLimits) -> Result<Circuit> {
    spec.require_alternating(2)?;
    spec.check_level(k, 1, spec.h() - 1)?;
    let g = LevelFunction::from_fn(spec, k + 1, k, s, limits.max_arity, |a| {
        a.iter().all(|&x| x != 0) as u32
    })?;
    represent_with(&g, spec, limits)
}

/// Composition `AND^s_1(AND^s_2(...), ...)` mapping `(e_{h-1} D)^{s^{h-2}}`
/// to `e_1 D`. For `h = 2` it is the single-input embedding `e_1(x_0)`.
pub fn build_and_tower(s: usize, spec: &AlgebraSpec) -> Result<Circuit> {
    build_and_tower_with(s, spec, CompileLimits::default())
}

pub fn build_and_tower_with(s: usize, spec: &AlgebraSpec, limits: CompileLimits) -> Result<Circuit> {
    spec.require_alternating(2)?;
    let h = spec.h();
    let arity = (s as u128).checked_pow((h - 2) as u32).unwrap_or(u128::MAX);
    if arity > 1 << 20 {
        return Err(Error::ceiling("tower arity", arity, 1 << 20));
    }
    let arity = arity as usize;
    let gates: Vec<Circuit> = (1..h - 1)
        .map(|k| build_and_with(s, k, spec, limits))
        .collect::<Result<_>>()?;
    let mut b = Builder::new(spec, arity);

    fn level(
        b: &mut Builder,
        gates: &[Circuit],
        s: usize,
        h: usize,
        k: usize,
        offset: usize,
    ) -> NodeId {
        if k == h - 1 {
            let x = b.var(offset);
            return b.e(h - 1, x);
        }
        let stride = s.pow((h - 2 - k) as u32);
        let args: Vec<NodeId> = (0..s)
            .map(|i| level(b, gates, s, h, k + 1, offset + i * stride))
            .collect();
        gates[k - 1].import_into(b, &args)
    }

    let out = level(&mut b, &gates, s, h, 1, 0);
    Ok(b.finish(out))
}

/// The `CNF_{Φ_l}` gadget over the variables occurring in a formula part.
#[derive(Debug, Clone)]
pub struct CnfGadget {
    pub circuit: Circuit,
    /// Global index of each gadget input.
    pub vars: Vec<usize>,
}

/// `CNF_Φ : (e_h D)^{n} -> e_{h-1} D`, equal to `e_{h-1} 1` iff `Φ` holds
/// under `b(a) = (a != 0)`.
pub fn build_cnf_gadget(part: &CnfFormula, spec: &AlgebraSpec) -> Result<CnfGadget> {
    build_cnf_gadget_with(part, spec, CompileLimits::default())
}

pub fn build_cnf_gadget_with(
    part: &CnfFormula,
    spec: &AlgebraSpec,
    limits: CompileLimits,
) -> Result<CnfGadget> {
    spec.require_alternating(2)?;
    let h = spec.h();
    let vars = part.occurring_vars();
    let mut local = vec![usize::MAX; part.vars()];
    for (i, &v) in vars.iter().enumerate() {
        local[v] = i;
    }
    let g = LevelFunction::from_fn(spec, h, h - 1, vars.len(), limits.max_arity, |a| {
        part.clauses()
            .iter()
            .all(|c| c.iter().any(|l| (a[local[l.var]] != 0) == l.positive)) as u32
    })?;
    let circuit = represent_with(&g, spec, limits)?;
    Ok(CnfGadget { circuit, vars })
}
