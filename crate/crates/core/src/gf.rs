//! Linear algebra over prime fields and hyperplane isolation of a point of a
//! finite set.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::algebra::is_prime;
use crate::error::{Error, Result};

pub fn pow_mod(mut a: u64, mut e: u64, q: u64) -> u64 {
    let mut r = 1 % q;
    a %= q;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % q;
        }
        a = a * a % q;
        e >>= 1;
    }
    r
}

/// Inverse of a nonzero residue modulo the prime `q`.
pub fn inv_mod(a: u32, q: u32) -> u32 {
    debug_assert!(a % q != 0);
    pow_mod(a as u64, q as u64 - 2, q as u64) as u32
}

/// `coeffs . x = constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct AffineEquation {
    pub coeffs: Vec<u32>,
    pub constant: u32,
}

impl AffineEquation {
    pub fn holds(&self, q: u32, x: &[u32]) -> bool {
        dot(q, &self.coeffs, x) == self.constant
    }
}

fn dot(q: u32, a: &[u32], b: &[u32]) -> u32 {
    (a.iter()
        .zip(b)
        .map(|(&x, &y)| x as u64 * y as u64)
        .sum::<u64>()
        % q as u64) as u32
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AffineSystem {
    pub q: u32,
    pub n: usize,
    pub equations: Vec<AffineEquation>,
}

/// Reduced echelon form: row `r` has a 1 in column `pivots[r]` and zeros in
/// every other pivot column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reduced {
    pub q: u32,
    pub n: usize,
    pub rows: Vec<AffineEquation>,
    /// The pivot set `J`.
    pub pivots: Vec<usize>,
    /// The free set `I`.
    pub free: Vec<usize>,
}

impl AffineSystem {
    pub fn new(q: u32, n: usize) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        Ok(AffineSystem {
            q,
            n,
            equations: Vec::new(),
        })
    }

    pub fn push(&mut self, coeffs: Vec<u32>, constant: u32) -> Result<()> {
        if coeffs.len() != self.n {
            return Err(Error::ArityMismatch {
                expected: self.n,
                got: coeffs.len(),
            });
        }
        if coeffs.iter().chain([&constant]).any(|&c| c >= self.q) {
            return Err(Error::InvalidArgument(format!("residue out of range for GF({})", self.q)));
        }
        self.equations.push(AffineEquation { coeffs, constant });
        Ok(())
    }

    pub fn contains(&self, x: &[u32]) -> bool {
        self.equations.iter().all(|e| e.holds(self.q, x))
    }

    /// Gauss-Jordan elimination; `None` when inconsistent.
    pub fn row_reduce(&self) -> Option<Reduced> {
        let q = self.q;
        let mut rows: Vec<AffineEquation> = self.equations.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..self.n {
            let Some(sel) = (r..rows.len()).find(|&i| rows[i].coeffs[col] != 0) else {
                continue;
            };
            rows.swap(r, sel);
            let inv = inv_mod(rows[r].coeffs[col], q);
            scale_row(&mut rows[r], inv, q);
            let pivot_row = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row.coeffs[col] != 0 {
                    let f = row.coeffs[col];
                    sub_row(row, &pivot_row, f, q);
                }
            }
            pivots.push(col);
            r += 1;
        }
        if rows[r..].iter().any(|e| e.constant != 0) {
            return None;
        }
        rows.truncate(r);
        let free = (0..self.n).filter(|c| !pivots.contains(c)).collect();
        Some(Reduced {
            q,
            n: self.n,
            rows,
            pivots,
            free,
        })
    }

    /// Number of independent equations, or `None` when inconsistent.
    pub fn codim(&self) -> Option<usize> {
        self.row_reduce().map(|r| r.pivots.len())
    }
}

fn scale_row(row: &mut AffineEquation, f: u32, q: u32) {
    for c in row.coeffs.iter_mut() {
        *c = (*c as u64 * f as u64 % q as u64) as u32;
    }
    row.constant = (row.constant as u64 * f as u64 % q as u64) as u32;
}

/// `row -= f * pivot`.
fn sub_row(row: &mut AffineEquation, pivot: &AffineEquation, f: u32, q: u32) {
    let q64 = q as u64;
    for (c, &p) in row.coeffs.iter_mut().zip(&pivot.coeffs) {
        *c = ((*c as u64 + (q64 - f as u64) * p as u64) % q64) as u32;
    }
    row.constant = ((row.constant as u64 + (q64 - f as u64) * pivot.constant as u64) % q64) as u32;
}

impl Reduced {
    /// `x_j = sum alpha_i x_i + beta` for each pivot `j`, over free `i`.
    pub fn expressions(&self) -> Vec<(usize, Vec<(usize, u32)>, u32)> {
        let q = self.q;
        self.rows
            .iter()
            .zip(&self.pivots)
            .map(|(row, &j)| {
                let terms = self
                    .free
                    .iter()
                    .filter(|&&i| row.coeffs[i] != 0)
                    .map(|&i| (i, (q - row.coeffs[i]) % q))
                    .collect();
                (j, terms, row.constant)
            })
            .collect()
    }

    /// The point with the given free coordinates.
    pub fn point(&self, free_values: &[u32]) -> Vec<u32> {
        let q = self.q as u64;
        let mut x = vec![0u32; self.n];
        for (&i, &v) in self.free.iter().zip(free_values) {
            x[i] = v;
        }
        for (j, terms, beta) in self.expressions() {
            let s: u64 = terms.iter().map(|&(i, a)| a as u64 * x[i] as u64).sum::<u64>() + beta as u64;
            x[j] = (s % q) as u32;
        }
        x
    }
}

/// One solution of `W x = a` with free coordinates set to 0.
pub fn gauss_solve(q: u32, w: &[Vec<u32>], a: &[u32]) -> Result<Option<Vec<u32>>> {
    if w.len() != a.len() {
        return Err(Error::ArityMismatch {
            expected: w.len(),
            got: a.len(),
        });
    }
    let n = w.first().map_or(0, Vec::len);
    let mut sys = AffineSystem::new(q, n)?;
    for (row, &c) in w.iter().zip(a) {
        sys.push(row.clone(), c)?;
    }
    Ok(sys.row_reduce().map(|r| r.point(&vec![0; r.free.len()])))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Big,
    Small,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cut {
    pub phase: Phase,
    pub before: usize,
    pub after: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Isolation {
    pub hyperplanes: AffineSystem,
    pub point: Vec<u32>,
    pub cuts: Vec<Cut>,
}

impl Isolation {
    pub fn codim(&self) -> usize {
        self.hyperplanes.equations.len()
    }
}

/// `ceil(log_q z) + ceil(q log_2 q)`.
pub fn codim_bound(q: u32, z: usize) -> usize {
    let mut log = 0;
    let mut p: u128 = 1;
    while p < z as u128 {
        p *= q as u128;
        log += 1;
    }
    log + (q as f64 * (q as f64).log2()).ceil() as usize
}

/// Greedily collects `q` linearly independent members of `z`.
fn independent(q: u32, z: &[Vec<u32>], want: usize) -> Vec<usize> {
    let mut chosen = Vec::new();
    // Echelon basis with pivot columns, kept reduced against each other.
    let mut basis: Vec<(usize, Vec<u32>)> = Vec::new();
    for (idx, v) in z.iter().enumerate() {
        let mut r = v.clone();
        for (col, b) in &basis {
            if r[*col] != 0 {
                let f = r[*col];
                for (x, &y) in r.iter_mut().zip(b) {
                    *x = ((*x as u64 + (q - f) as u64 * y as u64) % q as u64) as u32;
                }
            }
        }
        if let Some(col) = r.iter().position(|&x| x != 0) {
            let inv = inv_mod(r[col], q);
            for x in r.iter_mut() {
                *x = (*x as u64 * inv as u64 % q as u64) as u32;
            }
            basis.push((col, r));
            chosen.push(idx);
            if chosen.len() == want {
                break;
            }
        }
    }
    chosen
}

/// Finds an affine subspace `H` with `Z ∩ H = {z}`.
///
/// While `|Z| > q^(q-1)` a cut uses `q` independent vectors `w_0..w_{q-1}`
/// of `Z` and a solution `alpha` of `w_j . alpha = j`; the hyperplanes
/// `alpha . x = j` partition `Z`, each meets it, and the smallest part is
/// kept. Smaller sets are halved on their first distinguishing coordinate.
/// Ties go to the smallest constant.
pub fn isolate_point(q: u32, z: &[Vec<u32>]) -> Result<Isolation> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    let Some(first) = z.first() else {
        return Err(Error::EmptySet);
    };
    let n = first.len();
    for v in z {
        if v.len() != n {
            return Err(Error::ArityMismatch {
                expected: n,
                got: v.len(),
            });
        }
        if v.iter().any(|&x| x >= q) {
            return Err(Error::InvalidArgument(format!("residue out of range for GF({q})")));
        }
    }
    let unique: BTreeSet<&Vec<u32>> = z.iter().collect();
    let mut cur: Vec<Vec<u32>> = unique.into_iter().cloned().collect();
    let mut sys = AffineSystem::new(q, n)?;
    let mut cuts = Vec::new();
    let threshold = (q as u128).pow(q - 1);
    while cur.len() > 1 {
        let before = cur.len();
        let mut cut = None;
        if cur.len() as u128 > threshold {
            let idx = independent(q, &cur, q as usize);
            if idx.len() == q as usize {
                let w: Vec<Vec<u32>> = idx.iter().map(|&i| cur[i].clone()).collect();
                let rhs: Vec<u32> = (0..q).collect();
                let alpha = gauss_solve(q, &w, &rhs)?.expect("independent rows are solvable");
                let mut classes = vec![0usize; q as usize];
                for v in &cur {
                    classes[dot(q, &alpha, v) as usize] += 1;
                }
                let a = smallest_nonempty(&classes);
                cut = Some((Phase::Big, alpha, a));
            }
        }
        let (phase, coeffs, constant) = match cut {
            Some(c) => c,
            None => {
                let col = (0..n)
                    .find(|&c| cur.iter().any(|v| v[c] != cur[0][c]))
                    .expect("distinct vectors differ somewhere");
                let mut classes = vec![0usize; q as usize];
                for v in &cur {
                    classes[v[col] as usize] += 1;
                }
                let mut coeffs = vec![0; n];
                coeffs[col] = 1;
                (Phase::Small, coeffs, smallest_nonempty(&classes))
            }
        };
        let eq = AffineEquation { coeffs, constant };
        cur.retain(|v| eq.holds(q, v));
        sys.equations.push(eq);
        cuts.push(Cut {
            phase,
            before,
            after: cur.len(),
        });
    }
    Ok(Isolation {
        hyperplanes: sys,
        point: cur.pop().expect("nonempty"),
        cuts,
    })
}

fn smallest_nonempty(classes: &[usize]) -> u32 {
    let (a, _) = classes
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .min_by_key(|&(a, &c)| (c, a))
        .expect("some class is nonempty");
    a as u32
}

/// Parses a vector list: one vector per line, space-separated residues;
/// blank lines and `#` comments are skipped.
pub fn parse_vecs(text: &str, q: u32) -> Result<Vec<Vec<u32>>> {
    let mut out: Vec<Vec<u32>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let mut v = Vec::new();
        let mut col = 1;
        for tok in body.split_whitespace() {
            let at = body[col - 1..].find(tok).map(|o| col + o).unwrap_or(col);
            col = at + tok.len();
            let x: u32 = tok.parse().ok().filter(|&x| x < q).ok_or_else(|| Error::Parse {
                line: ln + 1,
                column: at,
                message: format!("expected a residue below {q}, found {tok:?}"),
            })?;
            v.push(x);
        }
        if let Some(prev) = out.first() {
            if prev.len() != v.len() {
                return Err(Error::Parse {
                    line: ln + 1,
                    column: 1,
                    message: format!("vector has {} entries, expected {}", v.len(), prev.len()),
                });
            }
        }
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_system() {
        let x = gauss_solve(3, &[vec![1, 0], vec![0, 1]], &[2, 1]).unwrap();
        assert_eq!(x, Some(vec![2, 1]));
    }

    #[test]
    fn pivots_and_free() {
        let mut s = AffineSystem::new(2, 2).unwrap();
        s.push(vec![1, 1], 1).unwrap();
        let r = s.row_reduce().unwrap();
        assert_eq!(r.pivots, vec![0]);
        assert_eq!(r.free, vec![1]);
        assert_eq!(r.expressions(), vec![(0, vec![(1, 1)], 1)]);
        for f in 0..2 {
            assert!(s.contains(&r.point(&[f])));
        }
    }

    #[test]
    fn inconsistent() {
        let mut s = AffineSystem::new(2, 1).unwrap();
        s.push(vec![1], 0).unwrap();
        s.push(vec![1], 1).unwrap();
        assert!(s.row_reduce().is_none());
        assert_eq!(gauss_solve(2, &[vec![1], vec![1]], &[0, 1]).unwrap(), None);
    }

    #[test]
    fn gf5_elimination() {
        let w = vec![vec![2, 3, 1], vec![4, 1, 0], vec![1, 1, 1]];
        let a = vec![1, 2, 3];
        let x = gauss_solve(5, &w, &a).unwrap().unwrap();
        for (row, &c) in w.iter().zip(&a) {
            assert_eq!(dot(5, row, &x), c);
        }
    }

    #[test]
    fn singleton_is_whole_space() {
        let iso = isolate_point(3, &[vec![1, 2]]).unwrap();
        assert_eq!(iso.codim(), 0);
        assert_eq!(iso.point, vec![1, 2]);
    }

    #[test]
    fn traced_big_phase() {
        let z = vec![vec![0, 0], vec![0, 1], vec![1, 0]];
        let iso = isolate_point(2, &z).unwrap();
        assert_eq!(iso.cuts[0].phase, Phase::Big);
        assert_eq!(iso.hyperplanes.equations[0].coeffs, vec![1, 0]);
        assert_eq!(iso.hyperplanes.equations[0].constant, 1);
        assert_eq!(iso.point, vec![1, 0]);
        assert_eq!(iso.codim(), 1);
        assert!(iso.codim() <= codim_bound(2, 3));
    }

    #[test]
    fn small_phase_coordinate() {
        let z = vec![vec![1, 1, 0], vec![1, 1, 2]];
        let iso = isolate_point(3, &z).unwrap();
        assert_eq!(iso.cuts.len(), 1);
        assert_eq!(iso.cuts[0].phase, Phase::Small);
        assert_eq!(iso.hyperplanes.equations[0].coeffs, vec![0, 0, 1]);
        assert_eq!(iso.point, vec![1, 1, 0]);
    }

    #[test]
    fn errors() {
        assert!(matches!(isolate_point(2, &[]), Err(Error::EmptySet)));
        assert!(isolate_point(4, &[vec![0]]).is_err());
        assert!(isolate_point(2, &[vec![0], vec![0, 1]]).is_err());
    }

    #[test]
    fn bound_values() {
        assert_eq!(codim_bound(2, 1), 2);
        assert_eq!(codim_bound(2, 3), 4);
        assert_eq!(codim_bound(3, 9), 2 + 5);
    }

    #[test]
    fn vecs_format() {
        let v = parse_vecs("# set\n0 1\n1 0 # tail\n\n", 2).unwrap();
        assert_eq!(v, vec![vec![0, 1], vec![1, 0]]);
        match parse_vecs("0 1\n1 2\n", 2) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(parse_vecs("0 1\n1\n", 2).is_err());
    }
}
