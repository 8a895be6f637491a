//! Terms (trees) and circuits (shared-node DAGs) over the signature of `D`.
//!
//! Sizes are node counts: `|t|` for a term, `|Γ|` for a circuit. Parsing never
//! folds constants or merges subterms, so the size of a parsed circuit is the
//! size of the text's term.
//!
//! Text grammar (s-expressions):
//!
//! ```text
//! term := (var INT) | (const LITERAL) | (+ term term+) | (- term)
//!       | (e INT term) | (v INT term)
//! ```
//!
//! where `LITERAL` is a colon separated element literal such as `1:2`. An
//! n-ary `+` is a left fold of binary additions. `;` starts a comment that
//! runs to the end of the line.

use std::collections::HashMap;
use std::fmt;

use crate::algebra::{AlgebraSpec, DElem};
use crate::error::{Error, Result};

/// Default ceiling on the node count of an expanded term.
pub const EXPANSION_CEILING: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    Const(DElem),
    Add(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    E(usize, Box<Term>),
    V(usize, Box<Term>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Var(usize),
    Const(DElem),
    Add(NodeId, NodeId),
    Neg(NodeId),
    E(usize, NodeId),
    V(usize, NodeId),
}

impl Node {
    fn children(&self) -> impl Iterator<Item = NodeId> {
        let (a, b) = match *self {
            Node::Var(_) | Node::Const(_) => (None, None),
            Node::Add(x, y) => (Some(x), Some(y)),
            Node::Neg(x) | Node::E(_, x) | Node::V(_, x) => (Some(x), None),
        };
        a.into_iter().chain(b)
    }

    fn map_children(&self, f: impl Fn(NodeId) -> NodeId) -> Node {
        match *self {
            Node::Var(_) | Node::Const(_) => *self,
            Node::Add(x, y) => Node::Add(f(x), f(y)),
            Node::Neg(x) => Node::Neg(f(x)),
            Node::E(j, x) => Node::E(j, f(x)),
            Node::V(j, x) => Node::V(j, f(x)),
        }
    }
}

/// A circuit over `D`: nodes in topological order, children before parents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    spec: AlgebraSpec,
    arity: usize,
    nodes: Vec<Node>,
    output: NodeId,
}

fn validate_node(spec: &AlgebraSpec, arity: usize, node: &Node, position: usize) -> Result<()> {
    for c in node.children() {
        if c.index() >= position {
            return Err(Error::InvalidCircuit(format!(
                "node {position} refers to node {} which does not precede it",
                c.index()
            )));
        }
    }
    match *node {
        Node::Var(i) if i >= arity => Err(Error::VariableOverflow { index: i, arity }),
        Node::Const(c) => spec.check(&c),
        Node::E(j, _) => spec.check_level(j, 1, spec.h()),
        Node::V(j, _) => spec.check_level(j, 1, spec.h() - 1),
        _ => Ok(()),
    }
}

impl Circuit {
    pub fn new(spec: &AlgebraSpec, arity: usize, nodes: Vec<Node>, output: NodeId) -> Result<Self> {
        for (i, n) in nodes.iter().enumerate() {
            validate_node(spec, arity, n, i)?;
        }
        if output.index() >= nodes.len() {
            return Err(Error::InvalidCircuit("output node out of range".into()));
        }
        Ok(Circuit {
            spec: spec.clone(),
            arity,
            nodes,
            output,
        })
    }

    /// One node per term node; nothing is shared or folded.
    pub fn from_term(spec: &AlgebraSpec, arity: usize, term: &Term) -> Result<Self> {
        fn go(t: &Term, nodes: &mut Vec<Node>) -> NodeId {
            let node = match t {
                Term::Var(i) => Node::Var(*i),
                Term::Const(c) => Node::Const(*c),
                Term::Add(a, b) => {
                    let a = go(a, nodes);
                    let b = go(b, nodes);
                    Node::Add(a, b)
                }
                Term::Neg(a) => Node::Neg(go(a, nodes)),
                Term::E(j, a) => Node::E(*j, go(a, nodes)),
                Term::V(j, a) => Node::V(*j, go(a, nodes)),
            };
            nodes.push(node);
            NodeId(nodes.len() as u32 - 1)
        }
        let mut nodes = Vec::new();
        let out = go(term, &mut nodes);
        Circuit::new(spec, arity, nodes, out)
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn output(&self) -> NodeId {
        self.output
    }

    /// `|Γ|`, the node count.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// Node count of the expanded term, saturating at `u128::MAX`.
    pub fn term_size(&self) -> u128 {
        let mut sizes: Vec<u128> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let s = n
                .children()
                .fold(1u128, |acc, c| acc.saturating_add(sizes[c.index()]));
            sizes.push(s);
        }
        sizes[self.output.index()]
    }

    pub fn evaluate(&self, assignment: &[DElem]) -> Result<DElem> {
        if assignment.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: assignment.len(),
            });
        }
        for a in assignment {
            self.spec.check(a)?;
        }
        let mut scratch = Vec::new();
        Ok(self.eval_with(assignment, &mut scratch))
    }

    /// Unchecked evaluation reusing `scratch`; each node is visited once.
    #[inline]
    pub fn eval_with(&self, x: &[DElem], scratch: &mut Vec<DElem>) -> DElem {
        let spec = &self.spec;
        scratch.clear();
        for n in &self.nodes {
            let val = match *n {
                Node::Var(i) => x[i],
                Node::Const(c) => c,
                Node::Add(a, b) => spec.add_raw(&scratch[a.index()], &scratch[b.index()]),
                Node::Neg(a) => spec.neg_raw(&scratch[a.index()]),
                Node::E(j, a) => spec.e_raw(j, &scratch[a.index()]),
                Node::V(j, a) => spec.v_raw(j, &scratch[a.index()]),
            };
            scratch.push(val);
        }
        scratch[self.output.index()]
    }

    /// Expands the DAG into a tree, refusing expansions above `ceiling` nodes.
    pub fn to_term(&self, ceiling: u128) -> Result<Term> {
        let needed = self.term_size();
        if needed > ceiling {
            return Err(Error::ceiling("expanded term size", needed, ceiling));
        }
        let mut memo: Vec<Option<Term>> = vec![None; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            let get = |id: NodeId| Box::new(memo[id.index()].clone().expect("topological order"));
            let t = match *n {
                Node::Var(v) => Term::Var(v),
                Node::Const(c) => Term::Const(c),
                Node::Add(a, b) => Term::Add(get(a), get(b)),
                Node::Neg(a) => Term::Neg(get(a)),
                Node::E(j, a) => Term::E(j, get(a)),
                Node::V(j, a) => Term::V(j, get(a)),
            };
            memo[i] = Some(t);
        }
        Ok(memo[self.output.index()].take().expect("output"))
    }

    /// Text of the expanded term, subject to the same ceiling as
    /// [`Circuit::to_term`].
    pub fn print(&self, ceiling: u128) -> Result<String> {
        Ok(self.to_term(ceiling)?.to_string())
    }

    /// Substitutes `args[i]` for variable `i` inside `builder`.
    pub fn import_into(&self, builder: &mut Builder, args: &[NodeId]) -> NodeId {
        assert_eq!(args.len(), self.arity, "import arity");
        let mut map: Vec<NodeId> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let id = match *n {
                Node::Var(i) => args[i],
                other => builder.node(other.map_children(|c| map[c.index()])),
            };
            map.push(id);
        }
        map[self.output.index()]
    }
}

/// Hash-consing builder: structurally identical nodes are created once.
#[derive(Debug, Clone)]
pub struct Builder {
    spec: AlgebraSpec,
    arity: usize,
    nodes: Vec<Node>,
    memo: HashMap<Node, NodeId>,
}

impl Builder {
    pub fn new(spec: &AlgebraSpec, arity: usize) -> Self {
        Builder {
            spec: spec.clone(),
            arity,
            nodes: Vec::new(),
            memo: HashMap::new(),
        }
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Panics on invalid levels, variable indices or dangling children.
    pub fn node(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.memo.get(&node) {
            return id;
        }
        if let Err(e) = validate_node(&self.spec, self.arity, &node, self.nodes.len()) {
            panic!("invalid node {node:?}: {e}");
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node);
        self.memo.insert(node, id);
        id
    }

    pub fn var(&mut self, i: usize) -> NodeId {
        self.node(Node::Var(i))
    }

    pub fn constant(&mut self, c: DElem) -> NodeId {
        self.node(Node::Const(c))
    }

    pub fn zero(&mut self) -> NodeId {
        let z = self.spec.zero();
        self.constant(z)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.node(Node::Add(a, b))
    }

    pub fn neg(&mut self, a: NodeId) -> NodeId {
        self.node(Node::Neg(a))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let nb = self.neg(b);
        self.add(a, nb)
    }

    pub fn e(&mut self, j: usize, a: NodeId) -> NodeId {
        self.node(Node::E(j, a))
    }

    pub fn v(&mut self, j: usize, a: NodeId) -> NodeId {
        self.node(Node::V(j, a))
    }

    /// `v_lo(v_{lo+1}(... v_{hi}(a)))`.
    pub fn v_chain(&mut self, lo: usize, hi: usize, a: NodeId) -> NodeId {
        (lo..=hi).rev().fold(a, |acc, j| self.v(j, acc))
    }

    /// `lambda * a` as a left fold of additions; `0 * a` is the constant 0.
    pub fn scale(&mut self, a: NodeId, lambda: u32) -> NodeId {
        if lambda == 0 {
            return self.zero();
        }
        let mut acc = a;
        for _ in 1..lambda {
            acc = self.add(acc, a);
        }
        acc
    }

    /// Left fold of additions; the empty sum is the constant 0.
    pub fn sum(&mut self, terms: impl IntoIterator<Item = NodeId>) -> NodeId {
        let mut it = terms.into_iter();
        match it.next() {
            None => self.zero(),
            Some(first) => it.fold(first, |acc, t| self.add(acc, t)),
        }
    }

    /// Keeps only the nodes reachable from `output`.
    pub fn finish(self, output: NodeId) -> Circuit {
        let mut live = vec![false; self.nodes.len()];
        live[output.index()] = true;
        for i in (0..self.nodes.len()).rev() {
            if live[i] {
                for c in self.nodes[i].children() {
                    live[c.index()] = true;
                }
            }
        }
        let mut remap = vec![NodeId(u32::MAX); self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if live[i] {
                remap[i] = NodeId(nodes.len() as u32);
                nodes.push(n.map_children(|c| remap[c.index()]));
            }
        }
        Circuit {
            spec: self.spec,
            arity: self.arity,
            nodes,
            output: remap[output.index()],
        }
    }
}

/// Builds the single-output circuit `t - s`, so that `t = s` becomes
/// `t - s = 0`.
pub fn difference(t: &Circuit, s: &Circuit) -> Result<Circuit> {
    if t.spec != s.spec {
        return Err(Error::SpecMismatch);
    }
    if t.arity != s.arity {
        return Err(Error::ArityMismatch {
            expected: t.arity,
            got: s.arity,
        });
    }
    let mut b = Builder::new(&t.spec, t.arity);
    let args: Vec<NodeId> = (0..t.arity).map(|i| b.var(i)).collect();
    let x = t.import_into(&mut b, &args);
    let y = s.import_into(&mut b, &args);
    let out = b.sub(x, y);
    Ok(b.finish(out))
}

/// `c - d` for a constant `d`, turning the equation `c = d` into `c - d = 0`.
pub fn shift_target(c: &Circuit, d: &DElem) -> Result<Circuit> {
    c.spec.check(d)?;
    let mut b = Builder::new(&c.spec, c.arity);
    let args: Vec<NodeId> = (0..c.arity).map(|i| b.var(i)).collect();
    let x = c.import_into(&mut b, &args);
    let k = b.constant(c.spec.neg_raw(d));
    let out = b.add(x, k);
    Ok(b.finish(out))
}

impl Term {
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 1,
            Term::Add(a, b) => 1 + a.size() + b.size(),
            Term::Neg(a) | Term::E(_, a) | Term::V(_, a) => 1 + a.size(),
        }
    }

    pub fn evaluate(&self, spec: &AlgebraSpec, x: &[DElem]) -> Result<DElem> {
        Ok(match self {
            Term::Var(i) => *x.get(*i).ok_or(Error::VariableOverflow {
                index: *i,
                arity: x.len(),
            })?,
            Term::Const(c) => {
                spec.check(c)?;
                *c
            }
            Term::Add(a, b) => spec.add(&a.evaluate(spec, x)?, &b.evaluate(spec, x)?)?,
            Term::Neg(a) => spec.neg(&a.evaluate(spec, x)?)?,
            Term::E(j, a) => spec.e(*j, &a.evaluate(spec, x)?)?,
            Term::V(j, a) => spec.v(*j, &a.evaluate(spec, x)?)?,
        })
    }

    /// One more than the largest variable index, or 0 for closed terms.
    pub fn min_arity(&self) -> usize {
        match self {
            Term::Var(i) => i + 1,
            Term::Const(_) => 0,
            Term::Add(a, b) => a.min_arity().max(b.min_arity()),
            Term::Neg(a) | Term::E(_, a) | Term::V(_, a) => a.min_arity(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "(var {i})"),
            Term::Const(c) => write!(f, "(const {c})"),
            Term::Add(a, b) => write!(f, "(+ {a} {b})"),
            Term::Neg(a) => write!(f, "(- {a})"),
            Term::E(j, a) => write!(f, "(e {j} {a})"),
            Term::V(j, a) => write!(f, "(v {j} {a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    end: (usize, usize),
}

impl Lexer {
    fn new(text: &str) -> Self {
        let mut toks = Vec::new();
        let (mut line, mut col) = (1, 1);
        let mut cur: Option<(String, usize, usize)> = None;
        let flush = |cur: &mut Option<(String, usize, usize)>, toks: &mut Vec<_>| {
            if let Some((s, l, c)) = cur.take() {
                toks.push((Tok::Atom(s), l, c));
            }
        };
        let mut comment = false;
        for ch in text.chars() {
            match ch {
                '\n' => {
                    comment = false;
                    flush(&mut cur, &mut toks);
                }
                _ if comment => {}
                ';' => {
                    comment = true;
                    flush(&mut cur, &mut toks);
                }
                '(' | ')' => {
                    flush(&mut cur, &mut toks);
                    let t = if ch == '(' { Tok::Open } else { Tok::Close };
                    toks.push((t, line, col));
                }
                c if c.is_whitespace() => flush(&mut cur, &mut toks),
                c => match &mut cur {
                    Some((s, _, _)) => s.push(c),
                    None => cur = Some((c.to_string(), line, col)),
                },
            }
            if ch == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        flush(&mut cur, &mut toks);
        Lexer {
            toks,
            pos: 0,
            end: (line, col),
        }
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|(_, l, c)| (*l, *c))
            .unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, column) = self.here();
        Err(Error::Parse {
            line,
            column,
            message: message.into(),
        })
    }

    fn err_at<T>(&self, at: (usize, usize), message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: at.0,
            column: at.1,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn atom(&mut self, what: &str) -> Result<(String, (usize, usize))> {
        let at = self.here();
        match self.next() {
            Some(Tok::Atom(s)) => Ok((s, at)),
            _ => self.err_at(at, format!("expected {what}")),
        }
    }

    fn int(&mut self, what: &str) -> Result<(usize, (usize, usize))> {
        let (s, at) = self.atom(what)?;
        match s.parse::<usize>() {
            Ok(v) => Ok((v, at)),
            Err(_) => self.err_at(at, format!("expected {what}, found {s:?}")),
        }
    }
}

fn parse_term(lx: &mut Lexer, spec: &AlgebraSpec, arity: Option<usize>) -> Result<Term> {
    lx.expect(Tok::Open, "'('")?;
    let (head, head_at) = lx.atom("operator")?;
    let t = match head.as_str() {
        "var" => {
            let (i, at) = lx.int("variable index")?;
            if let Some(n) = arity {
                if i >= n {
                    return lx.err_at(at, format!("variable index {i} overflows arity {n}"));
                }
            }
            Term::Var(i)
        }
        "const" => {
            let (lit, at) = lx.atom("element literal")?;
            match spec.parse_elem(&lit) {
                Ok(c) => Term::Const(c),
                Err(e) => return lx.err_at(at, e.to_string()),
            }
        }
        "+" => {
            let mut acc = parse_term(lx, spec, arity)?;
            let mut count = 1;
            while lx.peek() == Some(&Tok::Open) {
                let rhs = parse_term(lx, spec, arity)?;
                acc = Term::Add(Box::new(acc), Box::new(rhs));
                count += 1;
            }
            if count < 2 {
                return lx.err("'+' needs at least two operands");
            }
            acc
        }
        "-" => Term::Neg(Box::new(parse_term(lx, spec, arity)?)),
        "e" | "v" => {
            let (j, at) = lx.int("level")?;
            let hi = if head == "e" { spec.h() } else { spec.h() - 1 };
            if j < 1 || j > hi {
                return lx.err_at(at, format!("level out of range: {j} not in 1..={hi}"));
            }
            let child = Box::new(parse_term(lx, spec, arity)?);
            if head == "e" {
                Term::E(j, child)
            } else {
                Term::V(j, child)
            }
        }
        other => return lx.err_at(head_at, format!("unknown operator {other:?}")),
    };
    lx.expect(Tok::Close, "')'")?;
    Ok(t)
}

/// Parses a single term. With `arity = None` the arity is one more than the
/// largest variable index.
pub fn parse_term_text(spec: &AlgebraSpec, text: &str, arity: Option<usize>) -> Result<Term> {
    let mut lx = Lexer::new(text);
    let t = parse_term(&mut lx, spec, arity)?;
    if lx.peek().is_some() {
        return lx.err("trailing input after term");
    }
    Ok(t)
}

/// Parses a term into an unshared circuit.
pub fn parse(spec: &AlgebraSpec, text: &str, arity: Option<usize>) -> Result<Circuit> {
    let t = parse_term_text(spec, text, arity)?;
    let n = arity.unwrap_or_else(|| t.min_arity());
    Circuit::from_term(spec, n, &t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d23() -> AlgebraSpec {
        AlgebraSpec::new(&[2, 3]).unwrap()
    }

    fn el(s: &AlgebraSpec, c: &[u32]) -> DElem {
        s.elem(c).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let s = d23();
        let t = parse(&s, "(v 1 (e 2 (var 0)))", None).unwrap();
        assert_eq!(t.evaluate(&[el(&s, &[0, 1])]).unwrap(), el(&s, &[1, 0]));
        let t = parse(&s, "(+ (var 0) (var 1))", None).unwrap();
        let a = el(&s, &[1, 2]);
        assert_eq!(t.evaluate(&[a, a]).unwrap(), el(&s, &[0, 1]));
        let t = parse(&s, "(+ (e 1 (var 0)) (const 1:0))", None).unwrap();
        assert_eq!(t.evaluate(&[a]).unwrap(), s.zero());
        assert!(matches!(
            t.evaluate(&[a, a]),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn parse_examples() {
        let s = d23();
        let t = parse_term_text(&s, "(v 1 (e 2 (var 0)))", None).unwrap();
        assert_eq!(
            t,
            Term::V(1, Box::new(Term::E(2, Box::new(Term::Var(0)))))
        );
        let t = parse_term_text(&s, "(+ (var 0) (const 1:1))", None).unwrap();
        assert_eq!(
            t,
            Term::Add(Box::new(Term::Var(0)), Box::new(Term::Const(el(&s, &[1, 1]))))
        );
        let e = parse_term_text(&s, "(v 9 (var 0))", None).unwrap_err();
        assert!(e.to_string().contains("level out of range"), "{e}");
        match parse_term_text(&s, "(+ (var 0)\n  (bogus 1))", None) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 4)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse(&s, "(var 3)", Some(2)),
            Err(Error::Parse { .. })
        ));
        assert!(parse(&s, "(const 2:0)", None).is_err());
        assert!(parse(&s, "(var 0) (var 1)", None).is_err());
        assert!(parse(&s, "(+ (var 0))", None).is_err());
    }

    #[test]
    fn nary_plus_is_left_fold() {
        let s = d23();
        let t = parse_term_text(&s, "(+ (var 0) (var 1) (var 2))", None).unwrap();
        assert_eq!(t.to_string(), "(+ (+ (var 0) (var 1)) (var 2))");
        assert_eq!(t.size(), 5);
    }

    #[test]
    fn doubling_chain_sizes() {
        let s = d23();
        for k in 0..6u32 {
            let mut b = Builder::new(&s, 1);
            let mut x = b.var(0);
            for _ in 0..k {
                x = b.add(x, x);
            }
            let c = b.finish(x);
            assert_eq!(c.size(), k as usize + 1);
            assert_eq!(c.term_size(), (1u128 << (k + 1)) - 1);
            let t = c.to_term(EXPANSION_CEILING).unwrap();
            assert_eq!(t.size() as u128, c.term_size());
            let leaves = t.to_string().matches("(var 0)").count();
            assert_eq!(leaves, 1 << k);
        }
        let mut b = Builder::new(&s, 1);
        let mut x = b.var(0);
        for _ in 0..40 {
            x = b.add(x, x);
        }
        let c = b.finish(x);
        assert!(matches!(c.to_term(1000), Err(Error::Ceiling { .. })));
    }

    #[test]
    fn shared_add_sizes() {
        let s = d23();
        let mut b = Builder::new(&s, 2);
        let x = b.var(0);
        let y = b.var(1);
        let sum = b.add(x, y);
        let out = b.add(sum, sum);
        let c = b.finish(out);
        assert_eq!(c.size(), 4);
        assert_eq!(c.term_size(), 7);
        assert_eq!(parse(&s, "(var 0)", None).unwrap().size(), 1);
    }

    #[test]
    fn builder_prunes_and_shares() {
        let s = d23();
        let mut b = Builder::new(&s, 1);
        let x = b.var(0);
        let _dead = b.neg(x);
        let e1 = b.e(2, x);
        let e2 = b.e(2, x);
        assert_eq!(e1, e2);
        let c = b.finish(e1);
        assert_eq!(c.size(), 2);
    }

    #[test]
    fn difference_vanishes_on_equal_circuits() {
        let s = d23();
        let t = parse(&s, "(+ (var 0) (v 1 (var 0)))", None).unwrap();
        let z = difference(&t, &t).unwrap();
        for a in s.elements() {
            assert!(z.evaluate(&[a]).unwrap().is_zero());
        }
    }

    #[test]
    fn invalid_circuits_rejected() {
        let s = d23();
        assert!(Circuit::new(&s, 1, vec![Node::Neg(NodeId(0))], NodeId(0)).is_err());
        assert!(Circuit::new(&s, 1, vec![Node::Var(1)], NodeId(0)).is_err());
        assert!(Circuit::new(&s, 1, vec![Node::Var(0), Node::V(2, NodeId(0))], NodeId(1)).is_err());
    }

    #[test]
    fn comments_are_skipped() {
        let s = d23();
        let t = parse(&s, "; header\n(+ (var 0) ; first\n   (var 1))\n", None).unwrap();
        assert_eq!(t.arity(), 2);
        match parse(&s, "; c\n(+ (var 0) (bogus 1))", None) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 13)),
            other => panic!("{other:?}"),
        }
    }
}
