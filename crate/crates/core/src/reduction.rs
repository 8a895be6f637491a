//! 3-CNF satisfiability as a single equation `t_Φ(x) = e_1 1` over `D`.
//!
//! Clauses are packed in input order into parts of `s = ceil(m^(1/(h-1)))`
//! clauses. Each part becomes a `CNF` gadget from level `h` to level `h-1`,
//! and the gadgets feed an `s`-ary AND tower of height `h-2` down to level 1.
//! Unused tower slots receive the constant `e_{h-1} 1`.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{AlgebraSpec, DElem};
use crate::cnf::CnfFormula;
use crate::error::{Error, Result};
use crate::funcrep::{build_and_tower_with, build_cnf_gadget_with, CompileLimits};
use crate::terms::{Builder, Circuit, NodeId};

#[derive(Debug, Clone, Serialize)]
pub struct PartInfo {
    pub first_clause: usize,
    pub clauses: usize,
    /// Variables the gadget reads, ascending.
    pub vars: Vec<usize>,
    pub gadget_size: usize,
}

#[derive(Debug, Clone)]
pub struct ReductionOutput {
    pub circuit: Circuit,
    pub s: usize,
    /// Tower slots, `s^(h-2)`.
    pub slots: usize,
    pub parts: Vec<PartInfo>,
    pub target: DElem,
    pub tower_size: usize,
    pub build_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionMeta {
    pub primes: Vec<u32>,
    pub vars: usize,
    pub clauses: usize,
    pub s: usize,
    pub slots: usize,
    pub parts: Vec<PartInfo>,
    pub target: DElem,
    pub circuit_nodes: usize,
    /// Node count of the expanded tree; a decimal string since it may exceed
    /// 64 bits.
    pub term_size: String,
    pub tower_size: usize,
    pub build_ms: f64,
}

impl ReductionOutput {
    pub fn meta(&self, phi: &CnfFormula) -> ReductionMeta {
        ReductionMeta {
            primes: self.circuit.spec().primes().to_vec(),
            vars: phi.vars(),
            clauses: phi.clause_count(),
            s: self.s,
            slots: self.slots,
            parts: self.parts.clone(),
            target: self.target,
            circuit_nodes: self.circuit.size(),
            term_size: self.circuit.term_size().to_string(),
            tower_size: self.tower_size,
            build_ms: self.build_ms,
        }
    }
}

/// Smallest `s >= 1` with `s^(h-1) >= m`.
pub fn choose_s(m: usize, h: usize) -> usize {
    let e = (h - 1) as u32;
    let mut s = 1usize;
    while (s as u128).pow(e) < m as u128 {
        s += 1;
    }
    s
}

pub fn reduce(phi: &CnfFormula, spec: &AlgebraSpec) -> Result<ReductionOutput> {
    reduce_with(phi, spec, CompileLimits::default())
}

pub fn reduce_with(phi: &CnfFormula, spec: &AlgebraSpec, limits: CompileLimits) -> Result<ReductionOutput> {
    let start = Instant::now();
    spec.require_alternating(2)?;
    if let Some(c) = phi.clauses().iter().find(|c| c.len() > 3) {
        return Err(Error::InvalidArgument(format!(
            "clause of width {} in a 3-CNF reduction",
            c.len()
        )));
    }
    let h = spec.h();
    let m = phi.clause_count();
    let s = choose_s(m, h);
    let parts: Vec<CnfFormula> = (0..m).step_by(s).map(|a| phi.part(a..(a + s).min(m))).collect();
    let widest = parts.iter().map(|p| p.occurring_vars().len()).max().unwrap_or(0);
    if widest > limits.max_arity {
        return Err(Error::GadgetTooWide {
            s,
            arity: widest,
            max: limits.max_arity,
        });
    }
    let tower = build_and_tower_with(s, spec, limits)?;
    let slots = tower.arity();
    debug_assert!(parts.len() <= slots);
    let gadgets = parts
        .par_iter()
        .map(|p| build_cnf_gadget_with(p, spec, limits))
        .collect::<Result<Vec<_>>>()?;

    let mut b = Builder::new(spec, phi.vars());
    let mut args: Vec<NodeId> = gadgets
        .iter()
        .map(|g| {
            let inputs: Vec<NodeId> = g.vars.iter().map(|&v| b.var(v)).collect();
            g.circuit.import_into(&mut b, &inputs)
        })
        .collect();
    let filler = b.constant(spec.unit(h - 1));
    args.resize(slots, filler);
    let out = tower.import_into(&mut b, &args);
    let circuit = b.finish(out);

    let info = gadgets
        .iter()
        .enumerate()
        .map(|(i, g)| PartInfo {
            first_clause: i * s,
            clauses: parts[i].clause_count(),
            vars: g.vars.clone(),
            gadget_size: g.circuit.size(),
        })
        .collect();
    Ok(ReductionOutput {
        circuit,
        s,
        slots,
        parts: info,
        target: spec.unit(1),
        tower_size: tower.size(),
        build_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// True variables become `e_h 1`, false ones 0.
pub fn lift_witness(spec: &AlgebraSpec, assignment: &[bool]) -> Vec<DElem> {
    let one = spec.unit(spec.h());
    assignment
        .iter()
        .map(|&b| if b { one } else { spec.zero() })
        .collect()
}

/// `b(e_h x_i)` for each coordinate.
pub fn read_witness(spec: &AlgebraSpec, x: &[DElem]) -> Vec<bool> {
    x.iter().map(|a| a.coord(spec.h()) != 0).collect()
}
