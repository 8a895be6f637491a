//! Seeded generators of random circuits, formulas and level functions.

use rand::seq::index::sample;
use rand::Rng;

use crate::algebra::{AlgebraSpec, DElem};
use crate::cnf::{CnfFormula, Literal};
use crate::funcrep::LevelFunction;
use crate::terms::{Circuit, Node, NodeId};

pub fn random_elem<R: Rng>(spec: &AlgebraSpec, rng: &mut R) -> DElem {
    let coords: Vec<u32> = spec.primes().iter().map(|&p| rng.gen_range(0..p)).collect();
    spec.elem(&coords).expect("residues in range")
}

pub fn random_point<R: Rng>(spec: &AlgebraSpec, n: usize, rng: &mut R) -> Vec<DElem> {
    (0..n).map(|_| random_elem(spec, rng)).collect()
}

/// A circuit with exactly `max(size, arity, 1)` nodes whose output is the
/// last node. Operands lean towards recent nodes to produce some depth.
pub fn random_circuit<R: Rng>(spec: &AlgebraSpec, arity: usize, size: usize, rng: &mut R) -> Circuit {
    let h = spec.h();
    let mut nodes: Vec<Node> = (0..arity).map(Node::Var).collect();
    if nodes.is_empty() {
        nodes.push(Node::Const(random_elem(spec, rng)));
    }
    let pick = |rng: &mut R, len: usize| -> NodeId {
        let i = if rng.gen_bool(0.5) {
            len - 1 - rng.gen_range(0..len.min(4))
        } else {
            rng.gen_range(0..len)
        };
        NodeId(i as u32)
    };
    while nodes.len() < size {
        let len = nodes.len();
        let roll = rng.gen_range(0..10);
        let node = match roll {
            0..=3 => Node::Add(pick(rng, len), pick(rng, len)),
            4 => Node::Neg(pick(rng, len)),
            5 | 6 => Node::E(rng.gen_range(1..=h), pick(rng, len)),
            7 | 8 if h >= 2 => Node::V(rng.gen_range(1..h), pick(rng, len)),
            _ => Node::Const(random_elem(spec, rng)),
        };
        nodes.push(node);
    }
    let out = NodeId(nodes.len() as u32 - 1);
    Circuit::new(spec, arity, nodes, out).expect("generated circuits are well formed")
}

/// `m` clauses of widths `1..=max_width` over distinct variables.
pub fn random_cnf<R: Rng>(n: usize, m: usize, max_width: usize, rng: &mut R) -> CnfFormula {
    let top = max_width.min(n).max(1);
    let clauses = (0..m)
        .map(|_| {
            let w = rng.gen_range(1..=top);
            sample(rng, n, w)
                .into_iter()
                .map(|v| Literal {
                    var: v,
                    positive: rng.gen_bool(0.5),
                })
                .collect()
        })
        .collect();
    CnfFormula::new(n, clauses).expect("variables in range")
}

pub fn random_level_function<R: Rng>(
    spec: &AlgebraSpec,
    source: usize,
    target: usize,
    arity: usize,
    rng: &mut R,
) -> LevelFunction {
    let q = spec.prime(source) as usize;
    let p = spec.prime(target);
    let table = (0..q.pow(arity as u32)).map(|_| rng.gen_range(0..p)).collect();
    LevelFunction::new(spec, source, target, arity, table).expect("valid table")
}
