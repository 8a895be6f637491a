//! The symmetric group `S4`, group words over it, and the reduction of 3-CNF
//! satisfiability to equations `t(y_1..y_4, x_1..x_n) = c` over `S4`.
//!
//! Permutations act on `{1,2,3,4}` and compose left to right:
//! `(ab)(i) = b(a(i))`. Commutators are `[a,b] = a^-1 b^-1 a b`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cnf::CnfFormula;
use crate::error::{Error, Result};
use crate::reduction::choose_s;

/// A permutation of `{1,2,3,4}` stored as a 0-based image table.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct S4Elem([u8; 4]);

/// `V` in lexicographic order of image tables.
const KLEIN: [S4Elem; 4] = [
    S4Elem([0, 1, 2, 3]),
    S4Elem([1, 0, 3, 2]),
    S4Elem([2, 3, 0, 1]),
    S4Elem([3, 2, 1, 0]),
];

impl S4Elem {
    pub const ID: S4Elem = S4Elem([0, 1, 2, 3]);

    /// From 1-based images.
    pub fn from_images(images: [u8; 4]) -> Result<Self> {
        let mut seen = [false; 4];
        let mut t = [0u8; 4];
        for (i, &m) in images.iter().enumerate() {
            if !(1..=4).contains(&m) || seen[m as usize - 1] {
                return Err(Error::InvalidArgument(format!("{images:?} is not a permutation")));
            }
            seen[m as usize - 1] = true;
            t[i] = m - 1;
        }
        Ok(S4Elem(t))
    }

    /// Parses cycle notation such as `(12)(34)`, `(1 2 3)` or `()`.
    pub fn parse_cycles(text: &str) -> Result<Self> {
        let bad = || Error::BadLiteral(text.to_string());
        let mut t = S4Elem::ID;
        let s = text.trim();
        if s == "id" {
            return Ok(t);
        }
        let mut rest = s;
        while !rest.is_empty() {
            let body_end = rest.find(')').ok_or_else(bad)?;
            if !rest.starts_with('(') {
                return Err(bad());
            }
            let digits: Vec<u8> = rest[1..body_end]
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| c.to_digit(10).filter(|d| (1..=4).contains(d)).map(|d| d as u8 - 1))
                .collect::<Option<_>>()
                .ok_or_else(bad)?;
            let mut cycle = S4Elem::ID;
            for (i, &d) in digits.iter().enumerate() {
                cycle.0[d as usize] = digits[(i + 1) % digits.len()];
            }
            if digits.iter().collect::<BTreeSet<_>>().len() != digits.len() {
                return Err(bad());
            }
            t = t.mul(cycle);
            rest = rest[body_end + 1..].trim_start();
        }
        Ok(t)
    }

    /// Image of the 1-based point `i`.
    pub fn apply(self, i: u8) -> u8 {
        self.0[i as usize - 1] + 1
    }

    /// `self` first, then `other`.
    pub fn mul(self, other: S4Elem) -> S4Elem {
        S4Elem(self.0.map(|i| other.0[i as usize]))
    }

    pub fn inv(self) -> S4Elem {
        let mut t = [0u8; 4];
        for (i, &m) in self.0.iter().enumerate() {
            t[m as usize] = i as u8;
        }
        S4Elem(t)
    }

    pub fn commutator(self, other: S4Elem) -> S4Elem {
        self.inv().mul(other.inv()).mul(self).mul(other)
    }

    /// 0 for even permutations, 1 for odd ones.
    pub fn parity(self) -> u8 {
        let mut inv = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                if self.0[i] > self.0[j] {
                    inv += 1;
                }
            }
        }
        inv % 2
    }

    pub fn in_a4(self) -> bool {
        self.parity() == 0
    }

    /// Membership in the Klein four-group `{id, (12)(34), (13)(24), (14)(23)}`.
    pub fn in_v(self) -> bool {
        self == S4Elem::ID || (0..4).all(|i| self.0[i] != i as u8 && self.0[self.0[i] as usize] == i as u8)
    }

    /// All 24 permutations in lexicographic order of image tables.
    pub fn all() -> Vec<S4Elem> {
        static ALL: OnceLock<Vec<S4Elem>> = OnceLock::new();
        ALL.get_or_init(|| {
            let mut out = Vec::with_capacity(24);
            for a in 0..4u8 {
                for b in 0..4u8 {
                    for c in 0..4u8 {
                        for d in 0..4u8 {
                            let t = [a, b, c, d];
                            let set: BTreeSet<u8> = t.iter().copied().collect();
                            if set.len() == 4 {
                                out.push(S4Elem(t));
                            }
                        }
                    }
                }
            }
            out
        })
        .clone()
    }

    pub fn klein() -> Vec<S4Elem> {
        KLEIN.to_vec()
    }

    pub fn alternating() -> Vec<S4Elem> {
        S4Elem::all().into_iter().filter(|g| g.in_a4()).collect()
    }

    /// Smallest member of the coset `self * V`.
    pub fn coset_rep(self) -> S4Elem {
        KLEIN
            .iter()
            .map(|&v| self.mul(v))
            .min()
            .expect("V is nonempty")
    }
}

impl fmt::Display for S4Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut seen = [false; 4];
        let mut any = false;
        for start in 0..4 {
            if seen[start] || self.0[start] as usize == start {
                continue;
            }
            any = true;
            write!(f, "(")?;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                write!(f, "{}", i + 1)?;
                i = self.0[i] as usize;
            }
            write!(f, ")")?;
        }
        if !any {
            write!(f, "()")?;
        }
        Ok(())
    }
}

impl fmt::Debug for S4Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for S4Elem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The closure of `gens` under multiplication.
pub fn generated(gens: &[S4Elem]) -> BTreeSet<S4Elem> {
    let mut set: BTreeSet<S4Elem> = BTreeSet::from([S4Elem::ID]);
    let mut frontier = vec![S4Elem::ID];
    while let Some(g) = frontier.pop() {
        for &h in gens {
            let p = g.mul(h);
            if set.insert(p) {
                frontier.push(p);
            }
        }
    }
    set
}

/// `[A, B]`: the subgroup generated by all `[a, b]`.
pub fn commutator_subgroup(a: &[S4Elem], b: &[S4Elem]) -> BTreeSet<S4Elem> {
    let gens: Vec<S4Elem> = a
        .iter()
        .flat_map(|&x| b.iter().map(move |&y| x.commutator(y)))
        .collect();
    generated(&gens)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupWord {
    Var(usize),
    Const(S4Elem),
    Mul(Box<GroupWord>, Box<GroupWord>),
    Inv(Box<GroupWord>),
    Comm(Box<GroupWord>, Box<GroupWord>),
}

impl GroupWord {
    pub fn var(i: usize) -> Self {
        GroupWord::Var(i)
    }

    pub fn mul(a: GroupWord, b: GroupWord) -> Self {
        GroupWord::Mul(Box::new(a), Box::new(b))
    }

    pub fn comm(a: GroupWord, b: GroupWord) -> Self {
        GroupWord::Comm(Box::new(a), Box::new(b))
    }

    pub fn eval(&self, x: &[S4Elem]) -> S4Elem {
        match self {
            GroupWord::Var(i) => x[*i],
            GroupWord::Const(c) => *c,
            GroupWord::Mul(a, b) => a.eval(x).mul(b.eval(x)),
            GroupWord::Inv(a) => a.eval(x).inv(),
            GroupWord::Comm(a, b) => a.eval(x).commutator(b.eval(x)),
        }
    }

    /// Node count with commutators as single nodes.
    pub fn size(&self) -> usize {
        match self {
            GroupWord::Var(_) | GroupWord::Const(_) => 1,
            GroupWord::Inv(a) => 1 + a.size(),
            GroupWord::Mul(a, b) | GroupWord::Comm(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Node count after expanding `[a,b]` into `a^-1 b^-1 a b`.
    pub fn expanded_size(&self) -> u128 {
        match self {
            GroupWord::Var(_) | GroupWord::Const(_) => 1,
            GroupWord::Inv(a) => 1 + a.expanded_size(),
            GroupWord::Mul(a, b) => 1 + a.expanded_size() + b.expanded_size(),
            GroupWord::Comm(a, b) => 7u128.saturating_add(2 * (a.expanded_size() + b.expanded_size())),
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            GroupWord::Var(i) => Some(*i),
            GroupWord::Const(_) => None,
            GroupWord::Inv(a) => a.max_var(),
            GroupWord::Mul(a, b) | GroupWord::Comm(a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// Text with variables rendered through `name`.
    pub fn render(&self, name: &dyn Fn(usize) -> String) -> String {
        match self {
            GroupWord::Var(i) => name(*i),
            GroupWord::Const(c) => c.to_string(),
            GroupWord::Mul(a, b) => format!("({} * {})", a.render(name), b.render(name)),
            GroupWord::Inv(a) => format!("inv({})", a.render(name)),
            GroupWord::Comm(a, b) => format!("[{}, {}]", a.render(name), b.render(name)),
        }
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&|i| format!("z{i}")))
    }
}

/// `α°(y, x_1..x_s) = [[...[y, x_1], ...], x_s]` with `y` variable 0 and
/// `x_i` variable `i`.
pub fn alpha_circ(s: usize) -> GroupWord {
    (1..=s).fold(GroupWord::var(0), |acc, i| GroupWord::comm(acc, GroupWord::var(i)))
}

/// `α_s(y_1..y_4, x_1..x_s) = α°([[y_1,y_2],[y_3,y_4]], x_1..x_s)` with the
/// `y`'s variables 0..4 and `x_i` variable `3 + i`.
pub fn alpha(s: usize) -> GroupWord {
    let u = GroupWord::comm(
        GroupWord::comm(GroupWord::var(0), GroupWord::var(1)),
        GroupWord::comm(GroupWord::var(2), GroupWord::var(3)),
    );
    (0..s).fold(u, |acc, i| GroupWord::comm(acc, GroupWord::var(4 + i)))
}

fn tau() -> S4Elem {
    S4Elem([1, 0, 2, 3])
}

fn sigma() -> S4Elem {
    S4Elem([1, 2, 0, 3])
}

/// The fixed target `(12)(34)`.
pub fn target() -> S4Elem {
    S4Elem([1, 0, 3, 2])
}

/// `b(x) = (x ∈ A4)`.
pub fn truth(x: S4Elem) -> bool {
    x.in_a4()
}

/// Representative group value of a truth value.
pub fn encode(b: bool) -> S4Elem {
    if b {
        sigma()
    } else {
        tau()
    }
}

/// `p_Φ`: a word with values in `A4` that lies in `V` exactly when the
/// `b`-image of its arguments falsifies the part. For every satisfying row
/// `T` of the truth table over the occurring variables,
/// `w_T = [g_1(x_1), [g_2(x_2), [..., [g_n(x_n), (123)]]]]` with
/// `g_i(x) = x (12)` when `T_i` is true and `x` otherwise; `p_Φ` is the
/// product of the `w_T`. Variable `v` of the formula is word variable
/// `offset + v`.
pub fn build_clause_part(part: &CnfFormula, offset: usize) -> GroupWord {
    let vars = part.occurring_vars();
    let n = vars.len();
    let mut assignment = vec![false; part.vars()];
    let mut factors = Vec::new();
    for row in 0u64..1 << n {
        for (i, &v) in vars.iter().enumerate() {
            assignment[v] = row >> i & 1 == 1;
        }
        if !part.eval(&assignment) {
            continue;
        }
        let w = vars
            .iter()
            .enumerate()
            .rev()
            .fold(GroupWord::Const(sigma()), |acc, (i, &v)| {
                let x = GroupWord::var(offset + v);
                let g = if row >> i & 1 == 1 {
                    GroupWord::mul(x, GroupWord::Const(tau()))
                } else {
                    x
                };
                GroupWord::comm(g, acc)
            });
        factors.push(w);
    }
    factors
        .into_iter()
        .reduce(GroupWord::mul)
        .unwrap_or(GroupWord::Const(S4Elem::ID))
}

#[derive(Debug, Clone)]
pub struct S4Reduction {
    pub word: GroupWord,
    /// Clauses per part.
    pub s: usize,
    pub parts: Vec<CnfFormula>,
    pub part_words: Vec<GroupWord>,
    pub target: S4Elem,
    /// Formula variables; word variables are `y_1..y_4` then `x_0..x_{n-1}`.
    pub vars: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct S4Meta {
    pub vars: usize,
    pub clauses: usize,
    pub s: usize,
    pub parts: usize,
    pub target: S4Elem,
    pub word_size: usize,
    pub expanded_size: String,
}

impl S4Reduction {
    pub fn arity(&self) -> usize {
        4 + self.vars
    }

    pub fn eval(&self, y: &[S4Elem; 4], x: &[S4Elem]) -> S4Elem {
        let mut all = y.to_vec();
        all.extend_from_slice(x);
        self.word.eval(&all)
    }

    pub fn variable_name(&self, i: usize) -> String {
        if i < 4 {
            format!("y{}", i + 1)
        } else {
            format!("x{}", i - 4)
        }
    }

    pub fn render(&self) -> String {
        self.word.render(&|i| self.variable_name(i))
    }

    pub fn meta(&self, clauses: usize) -> S4Meta {
        S4Meta {
            vars: self.vars,
            clauses,
            s: self.s,
            parts: self.parts.len(),
            target: self.target,
            word_size: self.word.size(),
            expanded_size: self.word.expanded_size().to_string(),
        }
    }

    /// `t_Φ` from `u = [[y_1,y_2],[y_3,y_4]]` and the `V`-cosets of the part
    /// values; valid because `[v, a]` for `v ∈ V` depends only on `aV`.
    pub fn factored_eval(&self, u: S4Elem, x: &[S4Elem]) -> S4Elem {
        let mut all = vec![S4Elem::ID; 4];
        all.extend_from_slice(x);
        self.part_words
            .iter()
            .fold(u, |acc, p| acc.commutator(p.eval(&all).coset_rep()))
    }
}

/// Splits the clauses into parts of `ceil(sqrt(m))` and builds
/// `t_Φ = α(y_1..y_4, p_{Φ_1}(x), ..., p_{Φ_l}(x))` with target `(12)(34)`.
pub fn reduce_s4(phi: &CnfFormula) -> S4Reduction {
    let m = phi.clause_count();
    let s = choose_s(m, 3);
    let parts: Vec<CnfFormula> = (0..m).step_by(s).map(|a| phi.part(a..(a + s).min(m))).collect();
    let part_words: Vec<GroupWord> = parts.iter().map(|p| build_clause_part(p, 4)).collect();
    let u = GroupWord::comm(
        GroupWord::comm(GroupWord::var(0), GroupWord::var(1)),
        GroupWord::comm(GroupWord::var(2), GroupWord::var(3)),
    );
    let word = part_words
        .iter()
        .cloned()
        .fold(u, GroupWord::comm);
    S4Reduction {
        word,
        s,
        parts,
        part_words,
        target: target(),
        vars: phi.vars(),
    }
}

/// For every `u ∈ V` the first `(y_1..y_4)` in lexicographic order of `S4^4`
/// with `[[y_1,y_2],[y_3,y_4]] = u`.
pub fn decomposition_table() -> &'static HashMap<S4Elem, [S4Elem; 4]> {
    static TABLE: OnceLock<HashMap<S4Elem, [S4Elem; 4]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let all = S4Elem::all();
        let mut table = HashMap::new();
        for &a in &all {
            for &b in &all {
                let ab = a.commutator(b);
                for &c in &all {
                    for &d in &all {
                        table.entry(ab.commutator(c.commutator(d))).or_insert([a, b, c, d]);
                    }
                }
            }
        }
        table
    })
}

/// A full assignment with `t_Φ = (12)(34)` built from a satisfying boolean
/// assignment: true variables get `(123)`, false ones `(12)`, and `u ∈ V`
/// is chosen and decomposed into the `y`'s.
pub fn solve_s4_witness(r: &S4Reduction, phi: &CnfFormula, assignment: &[bool]) -> Result<Vec<S4Elem>> {
    if assignment.len() != phi.vars() {
        return Err(Error::ArityMismatch {
            expected: phi.vars(),
            got: assignment.len(),
        });
    }
    if !phi.eval(assignment) {
        return Err(Error::NotASolution("the boolean assignment falsifies the formula".into()));
    }
    let x: Vec<S4Elem> = assignment.iter().map(|&b| encode(b)).collect();
    let table = decomposition_table();
    for u in S4Elem::klein() {
        if r.factored_eval(u, &x) == r.target {
            let y = table[&u];
            let mut full = y.to_vec();
            full.extend_from_slice(&x);
            if r.word.eval(&full) != r.target {
                return Err(Error::InvalidArgument("decomposed witness does not reach the target".into()));
            }
            return Ok(full);
        }
    }
    Err(Error::InvalidArgument(
        "no u in V reaches the target for a satisfying assignment".into(),
    ))
}

/// Decides `t_Φ = c` by exhausting `u ∈ V` and the truth patterns of `x`,
/// returning a full witness when one exists.
pub fn solve_s4_by_cosets(r: &S4Reduction) -> Result<Option<Vec<S4Elem>>> {
    let n = r.vars;
    if n > 20 {
        return Err(Error::ceiling("truth patterns", 1u128 << n, 1 << 20));
    }
    let table = decomposition_table();
    let hit = (0u64..1 << n).into_par_iter().find_map_first(|bits| {
        let x: Vec<S4Elem> = (0..n).map(|i| encode(bits >> i & 1 == 1)).collect();
        S4Elem::klein()
            .into_iter()
            .find(|&u| r.factored_eval(u, &x) == r.target)
            .map(|u| {
                let mut full = table[&u].to_vec();
                full.extend_from_slice(&x);
                full
            })
    });
    Ok(hit)
}

/// Checks the clause gadget on an assignment: value in `A4`, `V`-membership
/// equal to falsification, and coset equal to that of the truth-pattern
/// representatives.
pub fn gadget_agrees(part: &CnfFormula, word: &GroupWord, x: &[S4Elem]) -> bool {
    let v = word.eval(x);
    let bits: Vec<bool> = x.iter().map(|&g| truth(g)).collect();
    let reps: Vec<S4Elem> = bits.iter().map(|&b| encode(b)).collect();
    v.in_a4() && v.in_v() == !part.eval(&bits) && v.coset_rep() == word.eval(&reps).coset_rep()
}

/// Number of disagreements of the clause gadget: exhaustive over `S4^n`
/// when `n <= 2`, otherwise over `samples` seeded random points.
pub fn check_clause_part(part: &CnfFormula, samples: u64, seed: u64) -> u64 {
    let word = build_clause_part(part, 0);
    let n = part.vars();
    let all = S4Elem::all();
    if n <= 2 {
        (0..24usize.pow(n as u32))
            .filter(|&idx| {
                let x: Vec<S4Elem> = (0..n).map(|i| all[idx / 24usize.pow(i as u32) % 24]).collect();
                !gadget_agrees(part, &word, &x)
            })
            .count() as u64
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples)
            .filter(|_| {
                let x: Vec<S4Elem> = (0..n).map(|_| all[rng.gen_range(0..24)]).collect();
                !gadget_agrees(part, &word, &x)
            })
            .count() as u64
    }
}

/// Disagreements between direct evaluation of `t_Φ` and the factored
/// evaluation on `samples` random points.
pub fn check_factored(r: &S4Reduction, samples: u64, seed: u64) -> u64 {
    let all = S4Elem::all();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .filter(|_| {
            let y: [S4Elem; 4] = std::array::from_fn(|_| all[rng.gen_range(0..24)]);
            let x: Vec<S4Elem> = (0..r.vars).map(|_| all[rng.gen_range(0..24)]).collect();
            let u = y[0].commutator(y[1]).commutator(y[2].commutator(y[3]));
            r.eval(&y, &x) != r.factored_eval(u, &x)
        })
        .count() as u64
}
