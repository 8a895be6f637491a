//! Unbounded fan-in `MOD` gate circuits and their extraction from polynomials
//! of `D`.
//!
//! For `j < k` the map `x -> v_j e_{j+1} g(e_k x_1, ..., e_k x_n)` restricted
//! to `{0, e_k 1}^n` is simulated by a `CC[p_{j+1},...,p_k]` circuit of depth
//! `k - j`: the level-`k` part of `g` on such inputs is affine, giving a single
//! `MOD_{p_k}` gate per `v`-term, and every lower level is a constant plus a
//! weighted sum of `v`-images of the level above, giving one `MOD_{p_L}` gate
//! fed by the gates of its inner forms. A gate with constant `c` accepts
//! `Z_p \ {-c}`. `j = 0` is allowed and simulates `e_1 g != 0`.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::AlgebraSpec;
use crate::canonical::{canonicalize, CanonicalForm, LevelForm};
use crate::error::{Error, Result};
use crate::terms::Circuit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Wire {
    Input(usize),
    Gate(usize),
}

/// `MOD^R_m`: outputs 1 iff the number of ones among its inputs, counted with
/// multiplicity, is in `R` mod `m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModGate {
    pub modulus: u32,
    /// Sorted accepting residues.
    pub accept: Vec<u32>,
    /// Input wires with their multiplicities.
    pub inputs: Vec<(Wire, u32)>,
    /// 1 is the output layer.
    pub layer: usize,
}

impl ModGate {
    pub fn new(modulus: u32, accept: Vec<u32>, inputs: Vec<(Wire, u32)>, layer: usize) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidArgument(format!("gate modulus {modulus} < 2")));
        }
        let mut accept = accept;
        accept.sort_unstable();
        accept.dedup();
        if accept.iter().any(|&r| r >= modulus) {
            return Err(Error::InvalidArgument("accepting residue out of range".into()));
        }
        Ok(ModGate {
            modulus,
            accept,
            inputs,
            layer,
        })
    }

    pub fn fires(&self, count: u64) -> bool {
        self.accept
            .binary_search(&((count % self.modulus as u64) as u32))
            .is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CcCircuit {
    pub inputs: usize,
    /// Topologically ordered: every gate input precedes the gate.
    pub gates: Vec<ModGate>,
    pub output: usize,
    /// Modulus of layer `i` at index `i - 1`, from the output downwards.
    pub layer_moduli: Vec<u32>,
}

impl CcCircuit {
    pub fn new(inputs: usize, gates: Vec<ModGate>, output: usize, layer_moduli: Vec<u32>) -> Result<Self> {
        if output >= gates.len() {
            return Err(Error::InvalidCircuit("output gate out of range".into()));
        }
        for (i, g) in gates.iter().enumerate() {
            if g.layer == 0 || g.layer > layer_moduli.len() {
                return Err(Error::InvalidCircuit(format!("gate {i} has no layer")));
            }
            if g.modulus != layer_moduli[g.layer - 1] {
                return Err(Error::InvalidCircuit(format!(
                    "gate {i} uses modulus {} in a MOD_{} layer",
                    g.modulus,
                    layer_moduli[g.layer - 1]
                )));
            }
            for (w, _) in &g.inputs {
                match *w {
                    Wire::Input(x) if x >= inputs => {
                        return Err(Error::VariableOverflow { index: x, arity: inputs })
                    }
                    Wire::Gate(src) if src >= i || gates[src].layer <= g.layer => {
                        return Err(Error::InvalidCircuit(format!(
                            "gate {i} reads gate {src} which is not below it"
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(CcCircuit {
            inputs,
            gates,
            output,
            layer_moduli,
        })
    }

    pub fn depth(&self) -> usize {
        self.layer_moduli.len()
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Number of wires, counting multiplicities.
    pub fn wire_count(&self) -> u64 {
        self.gates
            .iter()
            .flat_map(|g| g.inputs.iter().map(|(_, m)| *m as u64))
            .sum()
    }

    pub fn eval(&self, bits: &[bool]) -> Result<bool> {
        if bits.len() != self.inputs {
            return Err(Error::ArityMismatch {
                expected: self.inputs,
                got: bits.len(),
            });
        }
        let mut out = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            let count: u64 = g
                .inputs
                .iter()
                .map(|&(w, m)| {
                    let on = match w {
                        Wire::Input(x) => bits[x],
                        Wire::Gate(src) => out[src],
                    };
                    if on {
                        m as u64
                    } else {
                        0
                    }
                })
                .sum();
            out.push(g.fires(count));
        }
        Ok(out[self.output])
    }
}

/// Evaluates a circuit given on its own.
pub fn eval_cc(c: &CcCircuit, bits: &[bool]) -> Result<bool> {
    c.eval(bits)
}

fn accepting(p: u32, c: u32) -> Vec<u32> {
    let forbidden = (p - c % p) % p;
    (0..p).filter(|&r| r != forbidden).collect()
}

struct Extractor<'a> {
    spec: &'a AlgebraSpec,
    j: usize,
    gates: Vec<ModGate>,
    memo: HashMap<Arc<LevelForm>, usize>,
}

impl Extractor<'_> {
    fn gate(&mut self, form: &Arc<LevelForm>, k: usize) -> usize {
        if let Some(&g) = self.memo.get(form) {
            return g;
        }
        let level = form.level;
        let p = self.spec.prime(level);
        let inputs: Vec<(Wire, u32)> = if level == k {
            form.linear
                .iter()
                .enumerate()
                .filter(|(_, &l)| l != 0)
                .map(|(i, &l)| (Wire::Input(i), l))
                .collect()
        } else {
            form.vterms
                .iter()
                .map(|t| (Wire::Gate(self.gate(&t.inner, k)), t.coeff))
                .collect()
        };
        let gate = ModGate {
            modulus: p,
            accept: accepting(p, form.constant),
            inputs,
            layer: level - self.j,
        };
        self.gates.push(gate);
        let id = self.gates.len() - 1;
        self.memo.insert(form.clone(), id);
        id
    }
}

/// Extraction from a canonical form.
pub fn extract_cc_form(form: &CanonicalForm, spec: &AlgebraSpec, j: usize, k: usize) -> Result<CcCircuit> {
    if j >= k {
        return Err(Error::InvalidArgument(format!("need j < k, got j = {j}, k = {k}")));
    }
    spec.check_level(k, 1, spec.h())?;
    if form.h() != spec.h() {
        return Err(Error::SpecMismatch);
    }
    let zeros = vec![spec.zero(); form.arity];
    let top = form.level(j + 1).specialize(spec, &zeros, k);
    let mut ex = Extractor {
        spec,
        j,
        gates: Vec::new(),
        memo: HashMap::new(),
    };
    let output = ex.gate(&top, k);
    let layer_moduli = (j + 1..=k).map(|l| spec.prime(l)).collect();
    CcCircuit::new(form.arity, ex.gates, output, layer_moduli)
}

/// `CC[p_{j+1},...,p_k]` circuit simulating `v_j e_{j+1} g(e_k x)` on
/// `{0, e_k 1}^n` (or `e_1 g(e_k x) != 0` when `j = 0`).
pub fn extract_cc(g: &Circuit, j: usize, k: usize) -> Result<CcCircuit> {
    extract_cc_form(&canonicalize(g), g.spec(), j, k)
}

/// The algebraic side of the simulation: lifts `bits` to `{0, e_k 1}^n`,
/// evaluates `g`, and reports whether level `j + 1` of the result is nonzero.
pub fn simulated_bit(g: &Circuit, j: usize, k: usize, bits: &[bool]) -> Result<bool> {
    let spec = g.spec();
    let x: Vec<_> = bits
        .iter()
        .map(|&b| if b { spec.unit(k) } else { spec.zero() })
        .collect();
    let value = g.evaluate(&x)?;
    if j == 0 {
        return Ok(value.coord(1) != 0);
    }
    let v = spec.v(j, &spec.e(j + 1, &value)?)?;
    Ok(v == spec.unit(j))
}
