//! CNF formulas, DIMACS ingestion and a brute-force boolean oracle.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// A signed literal over a 0-based variable index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal {
            var,
            positive: true,
        }
    }

    pub fn neg(var: usize) -> Self {
        Literal {
            var,
            positive: false,
        }
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        assignment[self.var] == self.positive
    }

    fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CnfFormula {
    vars: usize,
    clauses: Vec<Vec<Literal>>,
}

impl CnfFormula {
    pub fn new(vars: usize, clauses: Vec<Vec<Literal>>) -> Result<Self> {
        for c in &clauses {
            for l in c {
                if l.var >= vars {
                    return Err(Error::VariableOverflow {
                        index: l.var,
                        arity: vars,
                    });
                }
            }
        }
        Ok(CnfFormula { vars, clauses })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }

    pub fn max_width(&self) -> usize {
        self.clauses.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|l| l.eval(assignment)))
    }

    /// Variables occurring in the formula, ascending.
    pub fn occurring_vars(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.clauses.iter().flatten().map(|l| l.var).collect();
        set.into_iter().collect()
    }

    /// Subformula made of the given clauses, over the same variables.
    pub fn part(&self, clauses: std::ops::Range<usize>) -> CnfFormula {
        CnfFormula {
            vars: self.vars,
            clauses: self.clauses[clauses].to_vec(),
        }
    }

    /// Exhaustive boolean satisfiability; returns the first satisfying
    /// assignment in binary counting order (variable 0 least significant).
    pub fn brute_force(&self) -> Option<Vec<bool>> {
        assert!(self.vars <= 26, "boolean brute force limited to 26 variables");
        (0u64..1 << self.vars)
            .map(|bits| (0..self.vars).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>())
            .find(|a| self.eval(a))
    }

    /// Standard 3-CNF conversion: a clause `(l1 ... lk)` with `k > 3` becomes
    /// `(l1 l2 z1)(-z1 l3 z2)...(-z_{k-3} l_{k-1} lk)` with fresh `z`'s.
    pub fn to_3cnf(&self) -> CnfFormula {
        let mut vars = self.vars;
        let mut clauses = Vec::new();
        for c in &self.clauses {
            if c.len() <= 3 {
                clauses.push(c.clone());
                continue;
            }
            let mut z = vars;
            vars += 1;
            clauses.push(vec![c[0], c[1], Literal::pos(z)]);
            for &l in &c[2..c.len() - 2] {
                let next = vars;
                vars += 1;
                clauses.push(vec![Literal::neg(z), l, Literal::pos(next)]);
                z = next;
            }
            clauses.push(vec![Literal::neg(z), c[c.len() - 2], c[c.len() - 1]]);
        }
        CnfFormula { vars, clauses }
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                out.push_str(&l.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }

    /// Parses DIMACS CNF. Comment lines start with `c` or `%`; clauses may
    /// span lines and are terminated by `0`.
    pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
        let err = |line: usize, column: usize, message: String| Error::Parse {
            line,
            column,
            message,
        };
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let ln = ln + 1;
            let trimmed = line.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('c') || trimmed.starts_with('%') {
                continue;
            }
            if trimmed.starts_with('p') {
                let f: Vec<&str> = trimmed.split_whitespace().collect();
                if header.is_some() {
                    return Err(err(ln, 1, "duplicate problem line".into()));
                }
                if f.len() != 4 || f[1] != "cnf" {
                    return Err(err(ln, 1, "expected 'p cnf VARS CLAUSES'".into()));
                }
                let v = f[2]
                    .parse()
                    .map_err(|_| err(ln, 1, format!("bad variable count {:?}", f[2])))?;
                let c = f[3]
                    .parse()
                    .map_err(|_| err(ln, 1, format!("bad clause count {:?}", f[3])))?;
                header = Some((v, c));
                continue;
            }
            let Some((vars, _)) = header else {
                return Err(err(ln, 1, "clause before problem line".into()));
            };
            let mut col = 1;
            for tok in line.split_whitespace() {
                let at = line[col - 1..].find(tok).map(|o| col + o).unwrap_or(col);
                col = at + tok.len();
                let x: i64 = tok
                    .parse()
                    .map_err(|_| err(ln, at, format!("bad literal {tok:?}")))?;
                if x == 0 {
                    clauses.push(std::mem::take(&mut current));
                    continue;
                }
                let var = x.unsigned_abs() as usize - 1;
                if var >= vars {
                    return Err(err(ln, at, format!("variable {x} exceeds declared {vars}")));
                }
                current.push(Literal {
                    var,
                    positive: x > 0,
                });
            }
        }
        let Some((vars, count)) = header else {
            return Err(err(1, 1, "missing problem line".into()));
        };
        if !current.is_empty() {
            clauses.push(current);
        }
        if clauses.len() != count {
            return Err(err(
                text.lines().count().max(1),
                1,
                format!("header declares {count} clauses, found {}", clauses.len()),
            ));
        }
        CnfFormula::new(vars, clauses)
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .clauses
            .iter()
            .map(|c| {
                let lits: Vec<String> = c
                    .iter()
                    .map(|l| format!("{}x{}", if l.positive { "" } else { "~" }, l.var))
                    .collect();
                format!("({})", lits.join(" | "))
            })
            .collect();
        write!(f, "{}", parts.join(" & "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimacs_round_trip() {
        let text = "c example\np cnf 3 2\n1 -2 0\n2 3\n -1 0\n";
        let f = CnfFormula::parse_dimacs(text).unwrap();
        assert_eq!(f.vars(), 3);
        assert_eq!(f.clauses()[1], vec![Literal::pos(1), Literal::pos(2), Literal::neg(0)]);
        assert_eq!(CnfFormula::parse_dimacs(&f.to_dimacs()).unwrap(), f);
    }

    #[test]
    fn dimacs_errors() {
        assert!(CnfFormula::parse_dimacs("1 2 0\n").is_err());
        assert!(CnfFormula::parse_dimacs("p cnf 1 1\n2 0\n").is_err());
        assert!(CnfFormula::parse_dimacs("p cnf 2 2\n1 0\n").is_err());
        match CnfFormula::parse_dimacs("p cnf 2 1\n1 x 0\n") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn brute_force_oracle() {
        let f = CnfFormula::new(1, vec![vec![Literal::pos(0)], vec![Literal::neg(0)]]).unwrap();
        assert_eq!(f.brute_force(), None);
        let g = CnfFormula::new(2, vec![vec![Literal::pos(0), Literal::pos(1)]]).unwrap();
        assert_eq!(g.brute_force(), Some(vec![true, false]));
    }

    #[test]
    fn three_cnf_split_preserves_satisfiability() {
        let wide = vec![
            Literal::pos(0),
            Literal::neg(1),
            Literal::pos(2),
            Literal::pos(3),
            Literal::neg(4),
        ];
        let f = CnfFormula::new(5, vec![wide.clone()]).unwrap();
        let g = f.to_3cnf();
        assert_eq!(g.max_width(), 3);
        assert_eq!(g.clause_count(), 3);
        for bits in 0u32..32 {
            let a: Vec<bool> = (0..5).map(|i| bits >> i & 1 == 1).collect();
            let extended = (0u32..1 << (g.vars() - 5)).any(|z| {
                let mut b = a.clone();
                b.extend((0..g.vars() - 5).map(|i| z >> i & 1 == 1));
                g.eval(&b)
            });
            assert_eq!(extended, f.eval(&a));
        }
    }
}
