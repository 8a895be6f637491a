//! The per-level canonical representation of polynomials of `D`.
//!
//! For every level `k` a polynomial `t` satisfies
//!
//! ```text
//! e_k t(x) = c^k + sum_i lambda^k_i * e_k(x_i)
//!                + sum_{s in S^k} kappa_s * v_k s(e^{k+1}(x_1), ..., e^{k+1}(x_n))
//! ```
//!
//! with the last sum absent at level `h`. Since `v_k s = v_k e_{k+1} s`, each
//! inner `s` is stored as the level-`(k+1)` part of its own canonical form,
//! which again has this shape. Inner forms with identical structure are merged
//! by adding their coefficients mod `p_k`; zero coefficients are dropped, and a
//! `v`-image of a constant is folded into the constant.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{AlgebraSpec, DElem};
use crate::error::{Error, Result};
use crate::terms::{Builder, Circuit, Node, NodeId};

/// Constant `C` of the size ceiling `|Γ|^{h^2} * C`.
pub const SIZE_CONSTANT: u128 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VTerm {
    pub inner: Arc<LevelForm>,
    pub coeff: u32,
}

/// The level-`level` component `e_level t` of a polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LevelForm {
    pub level: usize,
    pub constant: u32,
    pub linear: Vec<u32>,
    /// Sorted by inner form; inner forms live at `level + 1`.
    pub vterms: Vec<VTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CanonicalForm {
    pub arity: usize,
    /// `levels[k - 1]` is the level-`k` component.
    pub levels: Vec<Arc<LevelForm>>,
}

impl LevelForm {
    pub fn zero(level: usize, arity: usize) -> Self {
        LevelForm {
            level,
            constant: 0,
            linear: vec![0; arity],
            vterms: Vec::new(),
        }
    }

    pub fn constant(level: usize, arity: usize, c: u32) -> Self {
        LevelForm {
            constant: c,
            ..Self::zero(level, arity)
        }
    }

    pub fn arity(&self) -> usize {
        self.linear.len()
    }

    pub fn is_constant(&self) -> bool {
        self.vterms.is_empty() && self.linear.iter().all(|&l| l == 0)
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0 && self.is_constant()
    }

    /// `lhs + rhs` at the same level, merging equal inner forms.
    pub fn add(spec: &AlgebraSpec, lhs: &LevelForm, rhs: &LevelForm) -> LevelForm {
        debug_assert_eq!(lhs.level, rhs.level);
        let p = spec.prime(lhs.level);
        let linear = lhs
            .linear
            .iter()
            .zip(&rhs.linear)
            .map(|(a, b)| (a + b) % p)
            .collect();
        let mut vterms = Vec::with_capacity(lhs.vterms.len() + rhs.vterms.len());
        let (mut i, mut j) = (0, 0);
        while i < lhs.vterms.len() || j < rhs.vterms.len() {
            let ord = match (lhs.vterms.get(i), rhs.vterms.get(j)) {
                (Some(a), Some(b)) => a.inner.cmp(&b.inner),
                (Some(_), None) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            };
            match ord {
                std::cmp::Ordering::Less => {
                    vterms.push(lhs.vterms[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    vterms.push(rhs.vterms[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let coeff = (lhs.vterms[i].coeff + rhs.vterms[j].coeff) % p;
                    if coeff != 0 {
                        vterms.push(VTerm {
                            inner: lhs.vterms[i].inner.clone(),
                            coeff,
                        });
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        LevelForm {
            level: lhs.level,
            constant: (lhs.constant + rhs.constant) % p,
            linear,
            vterms,
        }
    }

    pub fn neg(spec: &AlgebraSpec, f: &LevelForm) -> LevelForm {
        let p = spec.prime(f.level);
        let neg = |x: u32| (p - x) % p;
        LevelForm {
            level: f.level,
            constant: neg(f.constant),
            linear: f.linear.iter().map(|&l| neg(l)).collect(),
            vterms: f
                .vterms
                .iter()
                .map(|t| VTerm {
                    inner: t.inner.clone(),
                    coeff: neg(t.coeff),
                })
                .collect(),
        }
    }

    /// `v_level` applied to a polynomial whose level-`(level + 1)` part is
    /// `inner`.
    pub fn v_of(level: usize, inner: Arc<LevelForm>) -> LevelForm {
        debug_assert_eq!(inner.level, level + 1);
        let arity = inner.arity();
        if inner.is_constant() {
            return LevelForm::constant(level, arity, (inner.constant != 0) as u32);
        }
        LevelForm {
            vterms: vec![VTerm { inner, coeff: 1 }],
            ..LevelForm::zero(level, arity)
        }
    }

    /// Adds `coeff * v_level(inner)` to `self`.
    fn push_vterm(&mut self, spec: &AlgebraSpec, coeff: u32, inner: Arc<LevelForm>) {
        let p = spec.prime(self.level);
        if inner.is_constant() {
            let b = (inner.constant != 0) as u32;
            self.constant = (self.constant + coeff * b) % p;
            return;
        }
        match self.vterms.binary_search_by(|t| t.inner.cmp(&inner)) {
            Ok(pos) => {
                let c = (self.vterms[pos].coeff + coeff) % p;
                if c == 0 {
                    self.vterms.remove(pos);
                } else {
                    self.vterms[pos].coeff = c;
                }
            }
            Err(pos) => {
                if coeff % p != 0 {
                    self.vterms.insert(
                        pos,
                        VTerm {
                            inner,
                            coeff: coeff % p,
                        },
                    );
                }
            }
        }
    }

    /// Residue of `e_level t(x)`; reads only coordinates `>= level` of `x`.
    pub fn eval(&self, spec: &AlgebraSpec, x: &[DElem]) -> u32 {
        let p = spec.prime(self.level);
        let mut acc = self.constant;
        for (l, xi) in self.linear.iter().zip(x) {
            acc += l * xi.coord(self.level);
        }
        for t in &self.vterms {
            if t.inner.eval(spec, x) != 0 {
                acc += t.coeff;
            }
        }
        acc % p
    }

    /// Unwound size: one for the constant, one per nonzero linear
    /// coefficient, one per `v`-term plus the size of its inner form.
    pub fn size(&self) -> u128 {
        let lin = self.linear.iter().filter(|&&l| l != 0).count() as u128;
        self.vterms.iter().fold(1 + lin, |acc, t| {
            acc.saturating_add(1).saturating_add(t.inner.size())
        })
    }

    /// Specializes every coordinate except level `free_level` to the values
    /// of `u`. The result reads only level `free_level` of its arguments: it
    /// is affine at `free_level`, a constant above it, and consists of a
    /// constant plus `v`-terms below it.
    pub fn specialize(
        self: &Arc<Self>,
        spec: &AlgebraSpec,
        u: &[DElem],
        free_level: usize,
    ) -> Arc<LevelForm> {
        let mut memo = HashMap::new();
        self.specialize_memo(spec, u, free_level, &mut memo)
    }

    fn specialize_memo(
        self: &Arc<Self>,
        spec: &AlgebraSpec,
        u: &[DElem],
        free_level: usize,
        memo: &mut HashMap<*const LevelForm, Arc<LevelForm>>,
    ) -> Arc<LevelForm> {
        let key = Arc::as_ptr(self);
        if let Some(r) = memo.get(&key) {
            return r.clone();
        }
        let n = self.arity();
        let level = self.level;
        let p = spec.prime(level);
        let out = if level > free_level {
            LevelForm::constant(level, n, self.eval(spec, u))
        } else {
            let mut out = LevelForm::zero(level, n);
            out.constant = self.constant;
            if level == free_level {
                out.linear = self.linear.clone();
            } else {
                let fixed: u32 = self
                    .linear
                    .iter()
                    .zip(u)
                    .map(|(l, x)| l * x.coord(level))
                    .sum();
                out.constant = (out.constant + fixed) % p;
            }
            for t in &self.vterms {
                let inner = t.inner.specialize_memo(spec, u, free_level, memo);
                out.push_vterm(spec, t.coeff, inner);
            }
            out
        };
        let out = Arc::new(out);
        memo.insert(key, out.clone());
        out
    }

    /// Builds `c * e_L 1 + sum lambda_i * e_L(x_i) + sum kappa * v_L(inner)`
    /// over the given argument nodes.
    pub fn build(&self, b: &mut Builder, args: &[NodeId]) -> NodeId {
        let mut memo = HashMap::new();
        self.build_memo(b, args, &mut memo)
    }

    fn build_memo(
        &self,
        b: &mut Builder,
        args: &[NodeId],
        memo: &mut HashMap<*const LevelForm, NodeId>,
    ) -> NodeId {
        let level = self.level;
        let mut parts = Vec::new();
        if self.constant != 0 {
            let c = b.spec().at_level(level, self.constant);
            parts.push(b.constant(c));
        }
        for (i, &l) in self.linear.iter().enumerate() {
            if l != 0 {
                let x = b.e(level, args[i]);
                parts.push(b.scale(x, l));
            }
        }
        for t in &self.vterms {
            let key = Arc::as_ptr(&t.inner);
            let inner = match memo.get(&key) {
                Some(&id) => id,
                None => {
                    let id = t.inner.build_memo(b, args, memo);
                    memo.insert(key, id);
                    id
                }
            };
            let v = b.v(level, inner);
            parts.push(b.scale(v, t.coeff));
        }
        b.sum(parts)
    }
}

impl CanonicalForm {
    pub fn h(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, k: usize) -> &Arc<LevelForm> {
        &self.levels[k - 1]
    }

    pub fn size(&self) -> u128 {
        self.levels
            .iter()
            .fold(0u128, |acc, l| acc.saturating_add(l.size()))
    }

    pub fn evaluate(&self, spec: &AlgebraSpec, x: &[DElem]) -> Result<DElem> {
        if x.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: x.len(),
            });
        }
        if spec.h() != self.h() {
            return Err(Error::SpecMismatch);
        }
        for a in x {
            spec.check(a)?;
        }
        let coords: Vec<u32> = self.levels.iter().map(|l| l.eval(spec, x)).collect();
        spec.elem(&coords)
    }

    /// A circuit computing the same polynomial, assembled from the forms.
    pub fn to_circuit(&self, spec: &AlgebraSpec) -> Circuit {
        let mut b = Builder::new(spec, self.arity);
        let args: Vec<NodeId> = (0..self.arity).map(|i| b.var(i)).collect();
        let parts: Vec<NodeId> = self.levels.iter().map(|l| l.build(&mut b, &args)).collect();
        let out = b.sum(parts);
        b.finish(out)
    }
}

/// `|Γ|^{h^2} * C`, saturating.
pub fn size_ceiling(circuit_size: usize, h: usize) -> u128 {
    let base = circuit_size as u128;
    let mut acc: u128 = 1;
    for _ in 0..h * h {
        acc = acc.saturating_mul(base);
    }
    acc.saturating_mul(SIZE_CONSTANT)
}

/// Canonical form of the polynomial computed by `c`, memoized per node so
/// shared subcircuits are processed once.
pub fn canonicalize(c: &Circuit) -> CanonicalForm {
    let spec = c.spec();
    let h = spec.h();
    let n = c.arity();
    let zeros: Vec<Arc<LevelForm>> = (1..=h).map(|k| Arc::new(LevelForm::zero(k, n))).collect();
    let mut forms: Vec<Vec<Arc<LevelForm>>> = Vec::with_capacity(c.size());
    for node in c.nodes() {
        let f: Vec<Arc<LevelForm>> = match *node {
            Node::Var(i) => (1..=h)
                .map(|k| {
                    let mut l = LevelForm::zero(k, n);
                    l.linear[i] = 1;
                    Arc::new(l)
                })
                .collect(),
            Node::Const(v) => (1..=h)
                .map(|k| Arc::new(LevelForm::constant(k, n, v.coord(k))))
                .collect(),
            Node::Add(a, b) => forms[a.index()]
                .iter()
                .zip(&forms[b.index()])
                .map(|(x, y)| {
                    if x.is_zero() {
                        y.clone()
                    } else if y.is_zero() {
                        x.clone()
                    } else {
                        Arc::new(LevelForm::add(spec, x, y))
                    }
                })
                .collect(),
            Node::Neg(a) => forms[a.index()]
                .iter()
                .map(|x| {
                    if x.is_zero() {
                        x.clone()
                    } else {
                        Arc::new(LevelForm::neg(spec, x))
                    }
                })
                .collect(),
            Node::E(j, a) => {
                let mut f = zeros.clone();
                f[j - 1] = forms[a.index()][j - 1].clone();
                f
            }
            Node::V(j, a) => {
                let mut f = zeros.clone();
                f[j - 1] = Arc::new(LevelForm::v_of(j, forms[a.index()][j].clone()));
                f
            }
        };
        forms.push(f);
    }
    CanonicalForm {
        arity: n,
        levels: forms.swap_remove(c.output().index()),
    }
}
