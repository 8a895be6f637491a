//! Exact arithmetic in `D[p1,...,ph]`.
//!
//! Levels are numbered `1..=h` as in the usual presentation of the algebra;
//! coordinate `j` of an element lives in `Z_{p_j}`. The fundamental operations
//! are `+`, `-`, the projections `e_j` (`1 <= j <= h`) and the tests `v_j`
//! (`1 <= j < h`), where `v_j(x)` carries `0` or `1` at level `j` depending on
//! whether `x_{j+1}` vanishes.
//!
//! The congruences of `D` form the chain `theta_1 < ... < theta_{h+1}` where
//! `a theta_k b` iff `a` and `b` agree on levels `k..=h`. The commutator of two
//! of them is `[theta_i, theta_j] = theta_{i-1}` for `i <= j`; it is not
//! computed here because the term condition quantifies over all polynomials.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Maximum number of levels an algebra may have.
pub const MAX_LEVELS: usize = 8;

/// Largest prime that fits the `u8` residue storage.
pub const MAX_PRIME: u32 = 251;

/// Default ceiling on the carrier size for [`enumerate_congruences`].
pub const CONGRUENCE_CEILING: usize = 64;

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlgebraSpec {
    primes: Vec<u32>,
    alternating: bool,
}

/// An element of `D[p1,...,ph]`, stored componentwise.
///
/// Elements do not carry a pointer to their algebra; the number of levels is
/// recorded so that mixing elements of algebras with different heights is
/// caught, and every checked operation on [`AlgebraSpec`] validates residues.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DElem {
    len: u8,
    coords: [u8; MAX_LEVELS],
}

impl AlgebraSpec {
    pub fn new(primes: &[u32]) -> Result<Self> {
        if primes.is_empty() || primes.len() > MAX_LEVELS {
            return Err(Error::LevelCount {
                got: primes.len(),
                max: MAX_LEVELS,
            });
        }
        for &p in primes {
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
            if p > MAX_PRIME {
                return Err(Error::PrimeTooLarge(p));
            }
        }
        let alternating = primes.windows(2).all(|w| w[0] != w[1]);
        Ok(AlgebraSpec {
            primes: primes.to_vec(),
            alternating,
        })
    }

    /// Parses a comma separated prime list such as `2,3,2`.
    pub fn parse(text: &str) -> Result<Self> {
        let primes = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidArgument(format!("bad prime list {text:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&primes)
    }

    pub fn h(&self) -> usize {
        self.primes.len()
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn is_alternating(&self) -> bool {
        self.alternating
    }

    /// Modulus of level `level` (1-based). Panics when out of range.
    pub fn prime(&self, level: usize) -> u32 {
        self.primes[level - 1]
    }

    pub fn carrier_size(&self) -> u128 {
        self.primes.iter().map(|&p| p as u128).product()
    }

    /// Checks the preconditions of the constructions that need consecutive
    /// primes to differ.
    pub fn require_alternating(&self, min_levels: usize) -> Result<()> {
        if self.h() < min_levels {
            return Err(Error::TooFewLevels {
                need: min_levels,
                have: self.h(),
            });
        }
        if !self.alternating {
            return Err(Error::NotAlternating(self.primes.clone()));
        }
        Ok(())
    }

    pub fn check_level(&self, level: usize, lo: usize, hi: usize) -> Result<()> {
        if level < lo || level > hi {
            return Err(Error::LevelOutOfRange { level, lo, hi });
        }
        Ok(())
    }

    pub fn elem(&self, coords: &[u32]) -> Result<DElem> {
        if coords.len() != self.h() {
            return Err(Error::SpecMismatch);
        }
        let mut out = DElem {
            len: self.h() as u8,
            coords: [0; MAX_LEVELS],
        };
        for (j, (&x, &p)) in coords.iter().zip(&self.primes).enumerate() {
            if x >= p {
                return Err(Error::ResidueOutOfRange {
                    level: j + 1,
                    value: x,
                    modulus: p,
                });
            }
            out.coords[j] = x as u8;
        }
        Ok(out)
    }

    pub fn zero(&self) -> DElem {
        DElem {
            len: self.h() as u8,
            coords: [0; MAX_LEVELS],
        }
    }

    pub fn one(&self) -> DElem {
        let mut e = self.zero();
        e.coords[..self.h()].fill(1);
        e
    }

    /// `e_level(1)`: the element with a single `1` at `level`.
    pub fn unit(&self, level: usize) -> DElem {
        let mut e = self.zero();
        e.coords[level - 1] = 1;
        e
    }

    /// The element with residue `value mod p_level` at `level` and zeros
    /// elsewhere.
    pub fn at_level(&self, level: usize, value: u32) -> DElem {
        let mut e = self.zero();
        e.coords[level - 1] = (value % self.prime(level)) as u8;
        e
    }

    /// Validates that `a` belongs to this algebra.
    pub fn check(&self, a: &DElem) -> Result<()> {
        if a.len as usize != self.h() {
            return Err(Error::SpecMismatch);
        }
        for (j, &p) in self.primes.iter().enumerate() {
            if a.coords[j] as u32 >= p {
                return Err(Error::ResidueOutOfRange {
                    level: j + 1,
                    value: a.coords[j] as u32,
                    modulus: p,
                });
            }
        }
        Ok(())
    }

    pub fn add(&self, a: &DElem, b: &DElem) -> Result<DElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_raw(a, b))
    }

    pub fn neg(&self, a: &DElem) -> Result<DElem> {
        self.check(a)?;
        Ok(self.neg_raw(a))
    }

    pub fn sub(&self, a: &DElem, b: &DElem) -> Result<DElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_raw(a, &self.neg_raw(b)))
    }

    /// `e_j(a)`, keeping only coordinate `j`.
    pub fn e(&self, j: usize, a: &DElem) -> Result<DElem> {
        self.check_level(j, 1, self.h())?;
        self.check(a)?;
        Ok(self.e_raw(j, a))
    }

    /// `e^k(a) = sum_{j >= k} e_j(a)`; `e^{h+1}` is constantly zero.
    pub fn e_upper(&self, k: usize, a: &DElem) -> Result<DElem> {
        self.check_level(k, 1, self.h() + 1)?;
        self.check(a)?;
        Ok(self.e_upper_raw(k, a))
    }

    /// `v_j(a)`: `1` at level `j` iff `a_{j+1} != 0`.
    pub fn v(&self, j: usize, a: &DElem) -> Result<DElem> {
        self.check_level(j, 1, self.h() - 1)?;
        self.check(a)?;
        Ok(self.v_raw(j, a))
    }

    /// `lambda * a`, i.e. `a` added to itself `lambda` times. Collapses to
    /// componentwise multiplication.
    pub fn scale(&self, lambda: u32, a: &DElem) -> Result<DElem> {
        self.check(a)?;
        Ok(self.scale_raw(lambda, a))
    }

    #[inline]
    pub(crate) fn add_raw(&self, a: &DElem, b: &DElem) -> DElem {
        let mut out = *a;
        for (j, &p) in self.primes.iter().enumerate() {
            let s = a.coords[j] as u32 + b.coords[j] as u32;
            out.coords[j] = if s >= p { (s - p) as u8 } else { s as u8 };
        }
        out
    }

    #[inline]
    pub(crate) fn neg_raw(&self, a: &DElem) -> DElem {
        let mut out = *a;
        for (j, &p) in self.primes.iter().enumerate() {
            let x = a.coords[j] as u32;
            out.coords[j] = if x == 0 { 0 } else { (p - x) as u8 };
        }
        out
    }

    #[inline]
    pub(crate) fn e_raw(&self, j: usize, a: &DElem) -> DElem {
        let mut out = self.zero();
        out.coords[j - 1] = a.coords[j - 1];
        out
    }

    #[inline]
    pub(crate) fn e_upper_raw(&self, k: usize, a: &DElem) -> DElem {
        let mut out = *a;
        for c in out.coords.iter_mut().take(k.saturating_sub(1)) {
            *c = 0;
        }
        out
    }

    #[inline]
    pub(crate) fn v_raw(&self, j: usize, a: &DElem) -> DElem {
        let mut out = self.zero();
        out.coords[j - 1] = (a.coords[j] != 0) as u8;
        out
    }

    pub(crate) fn scale_raw(&self, lambda: u32, a: &DElem) -> DElem {
        let mut out = *a;
        for (j, &p) in self.primes.iter().enumerate() {
            out.coords[j] = ((a.coords[j] as u32 * (lambda % p)) % p) as u8;
        }
        out
    }

    /// Position of `a` in the lexicographic enumeration of the carrier.
    pub fn index_of(&self, a: &DElem) -> usize {
        let mut idx = 0usize;
        for (j, &p) in self.primes.iter().enumerate() {
            idx = idx * p as usize + a.coords[j] as usize;
        }
        idx
    }

    /// Inverse of [`AlgebraSpec::index_of`].
    pub fn elem_at(&self, mut idx: usize) -> DElem {
        let mut out = self.zero();
        for j in (0..self.h()).rev() {
            let p = self.primes[j] as usize;
            out.coords[j] = (idx % p) as u8;
            idx /= p;
        }
        out
    }

    /// All carrier elements in lexicographic order of coordinate tuples.
    pub fn elements(&self) -> impl Iterator<Item = DElem> + '_ {
        (0..self.carrier_size() as usize).map(move |i| self.elem_at(i))
    }

    pub fn parse_elem(&self, text: &str) -> Result<DElem> {
        let coords = text
            .trim()
            .split(':')
            .map(|s| {
                s.parse::<u32>()
                    .map_err(|_| Error::BadLiteral(text.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        if coords.len() != self.h() {
            return Err(Error::BadLiteral(text.to_string()));
        }
        self.elem(&coords)
    }

    pub fn chain(&self) -> CongruenceChain {
        CongruenceChain { spec: self.clone() }
    }
}

impl fmt::Display for AlgebraSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D[")?;
        for (i, p) in self.primes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

impl DElem {
    pub fn h(&self) -> usize {
        self.len as usize
    }

    /// Residue at `level` (1-based).
    #[inline]
    pub fn coord(&self, level: usize) -> u32 {
        self.coords[level - 1] as u32
    }

    pub fn coords(&self) -> Vec<u32> {
        self.coords[..self.h()].iter().map(|&c| c as u32).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coords[..self.h()].iter().all(|&c| c == 0)
    }
}

impl fmt::Display for DElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.h() {
            if j > 0 {
                write!(f, ":")?;
            }
            write!(f, "{}", self.coords[j])?;
        }
        Ok(())
    }
}

impl fmt::Debug for DElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl Serialize for DElem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Literal parsing without an algebra at hand; residues are only range
/// checked once the element is used with a spec.
impl FromStr for DElem {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.trim().split(':').collect();
        if parts.is_empty() || parts.len() > MAX_LEVELS {
            return Err(Error::BadLiteral(text.to_string()));
        }
        let mut out = DElem {
            len: parts.len() as u8,
            coords: [0; MAX_LEVELS],
        };
        for (j, s) in parts.iter().enumerate() {
            out.coords[j] = s
                .parse::<u8>()
                .map_err(|_| Error::BadLiteral(text.to_string()))?;
        }
        Ok(out)
    }
}

/// A partition of the carrier, stored as the smallest element index of each
/// element's class.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut first = std::collections::HashMap::new();
        Partition(
            labels
                .iter()
                .enumerate()
                .map(|(i, l)| *first.entry(*l).or_insert(i))
                .collect(),
        )
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.0[a] == self.0[b]
    }

    pub fn class_count(&self) -> usize {
        self.0.iter().enumerate().filter(|(i, r)| *i == **r).count()
    }

    pub fn labels(&self) -> &[usize] {
        &self.0
    }

    /// `self` is contained in `other` as a relation.
    pub fn refines(&self, other: &Partition) -> bool {
        (0..self.0.len()).all(|i| other.related(i, self.0[i]))
    }
}

/// The chain `theta_1 < ... < theta_{h+1}`.
#[derive(Debug, Clone)]
pub struct CongruenceChain {
    spec: AlgebraSpec,
}

impl CongruenceChain {
    pub fn len(&self) -> usize {
        self.spec.h() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `a theta_k b` iff `e^k(a) = e^k(b)`.
    pub fn related(&self, k: usize, a: &DElem, b: &DElem) -> bool {
        (k..=self.spec.h()).all(|j| a.coord(j) == b.coord(j))
    }

    pub fn theta(&self, k: usize) -> Partition {
        let labels: Vec<usize> = self
            .spec
            .elements()
            .map(|a| self.spec.index_of(&self.spec.e_upper_raw(k, &a)))
            .collect();
        Partition::from_labels(&labels)
    }

    pub fn partitions(&self) -> Vec<Partition> {
        (1..=self.len()).map(|k| self.theta(k)).collect()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.0[hi] = lo;
        true
    }

    fn partition(mut self) -> Partition {
        let labels: Vec<usize> = (0..self.0.len()).map(|i| self.find(i)).collect();
        Partition::from_labels(&labels)
    }
}

/// The elementary unary translations of `D`: `x + c` for every constant `c`,
/// `-x`, every `e_j` and every `v_j`. A partition is a congruence iff it is
/// closed under all of them.
fn translations(spec: &AlgebraSpec) -> Vec<Vec<usize>> {
    let elems: Vec<DElem> = spec.elements().collect();
    let table = |f: &dyn Fn(&DElem) -> DElem| -> Vec<usize> {
        elems.iter().map(|a| spec.index_of(&f(a))).collect()
    };
    let mut out = Vec::new();
    for c in &elems {
        out.push(table(&|a| spec.add_raw(a, c)));
    }
    out.push(table(&|a| spec.neg_raw(a)));
    for j in 1..=spec.h() {
        out.push(table(&|a| spec.e_raw(j, a)));
    }
    for j in 1..spec.h() {
        out.push(table(&|a| spec.v_raw(j, a)));
    }
    out
}

fn principal(n: usize, maps: &[Vec<usize>], a: usize, b: usize) -> Partition {
    let mut uf = UnionFind::new(n);
    let mut work = vec![(a, b)];
    uf.union(a, b);
    while let Some((x, y)) = work.pop() {
        for f in maps {
            let (fx, fy) = (f[x], f[y]);
            if uf.union(fx, fy) {
                work.push((fx, fy));
            }
        }
    }
    uf.partition()
}

fn join(a: &Partition, b: &Partition) -> Partition {
    let n = a.0.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        uf.union(i, a.0[i]);
        uf.union(i, b.0[i]);
    }
    uf.partition()
}

/// Every congruence of `D`, generated from principal congruences closed under
/// joins. Refuses carriers above `ceiling` elements.
pub fn enumerate_congruences(spec: &AlgebraSpec, ceiling: usize) -> Result<BTreeSet<Partition>> {
    let n = spec.carrier_size();
    if n > ceiling as u128 {
        return Err(Error::ceiling("carrier size", n, ceiling as u128));
    }
    let n = n as usize;
    let maps = translations(spec);
    let mut principals = HashSet::new();
    for a in 0..n {
        for b in a + 1..n {
            principals.insert(principal(n, &maps, a, b));
        }
    }
    let principals: Vec<Partition> = principals.into_iter().collect();
    let identity = Partition((0..n).collect());
    let mut all: BTreeSet<Partition> = BTreeSet::new();
    all.insert(identity.clone());
    let mut frontier = vec![identity];
    while let Some(c) = frontier.pop() {
        for p in &principals {
            let j = join(&c, p);
            if all.insert(j.clone()) {
                frontier.push(j);
            }
        }
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(primes: &[u32]) -> AlgebraSpec {
        AlgebraSpec::new(primes).unwrap()
    }

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(AlgebraSpec::new(&[2, 4]), Err(Error::NotPrime(4)));
        assert!(AlgebraSpec::new(&[]).is_err());
        assert!(!d(&[2, 2]).is_alternating());
        assert!(d(&[2, 3, 2]).is_alternating());
        assert_eq!(d(&[2, 3, 2]).carrier_size(), 12);
    }

    #[test]
    fn group_operations() {
        let s = d(&[2, 3]);
        let a = s.elem(&[1, 2]).unwrap();
        assert_eq!(s.add(&a, &a).unwrap(), s.elem(&[0, 1]).unwrap());
        assert_eq!(s.add(&s.zero(), &a).unwrap(), a);
        assert_eq!(s.neg(&a).unwrap(), s.elem(&[1, 1]).unwrap());
        assert_eq!(s.scale(2, &a).unwrap(), s.add(&a, &a).unwrap());
    }

    #[test]
    fn mismatched_specs_are_rejected() {
        let s = d(&[2, 3]);
        let t = d(&[2, 3, 2]);
        let a = s.elem(&[1, 2]).unwrap();
        let b = t.elem(&[1, 2, 1]).unwrap();
        assert_eq!(s.add(&a, &b), Err(Error::SpecMismatch));
        let wrong: DElem = "1:2".parse().unwrap();
        assert!(d(&[3, 2]).check(&wrong).is_err());
    }

    #[test]
    fn projections_and_tests() {
        let s = d(&[2, 3]);
        let a = s.elem(&[1, 2]).unwrap();
        assert_eq!(s.e(1, &a).unwrap(), s.elem(&[1, 0]).unwrap());
        assert_eq!(s.e_upper(2, &a).unwrap(), s.elem(&[0, 2]).unwrap());
        assert_eq!(s.e_upper(3, &a).unwrap(), s.zero());
        assert_eq!(s.v(1, &s.zero()).unwrap(), s.zero());
        assert_eq!(s.v(1, &a).unwrap(), s.elem(&[1, 0]).unwrap());
        assert!(s.v(2, &a).is_err());
        assert!(s.e(0, &a).is_err());

        let t = d(&[2, 3, 2]);
        let b = t.elem(&[1, 2, 1]).unwrap();
        assert_eq!(t.e_upper(2, &b).unwrap(), t.elem(&[0, 2, 1]).unwrap());
        let c = t.elem(&[0, 0, 1]).unwrap();
        assert_eq!(t.v(2, &c).unwrap(), t.elem(&[0, 1, 0]).unwrap());
    }

    #[test]
    fn literal_round_trip() {
        let s = d(&[2, 3]);
        let a = s.parse_elem("1:2").unwrap();
        assert_eq!(a.to_string(), "1:2");
        assert!(s.parse_elem("2:0").is_err());
        assert!(s.parse_elem("1").is_err());
        assert!(s.parse_elem("x:1").is_err());
    }

    #[test]
    fn index_round_trip() {
        let s = d(&[3, 2, 3]);
        for (i, a) in s.elements().enumerate() {
            assert_eq!(s.index_of(&a), i);
        }
        let order: Vec<String> = d(&[2, 3]).elements().map(|a| a.to_string()).collect();
        assert_eq!(order, ["0:0", "0:1", "0:2", "1:0", "1:1", "1:2"]);
    }

    #[test]
    fn operation_identities_hold_exhaustively() {
        for primes in [&[2, 3][..], &[2, 3, 2], &[3, 2, 3]] {
            let s = d(primes);
            let h = s.h();
            for a in s.elements() {
                let mut sum = s.zero();
                for j in 1..=h {
                    sum = s.add_raw(&sum, &s.e_raw(j, &a));
                    assert_eq!(s.e_raw(j, &s.e_raw(j, &a)), s.e_raw(j, &a));
                }
                assert_eq!(sum, a);
                for k in 1..h {
                    let vk = s.v_raw(k, &a);
                    assert_eq!(s.e_raw(k, &vk), vk);
                    assert_eq!(s.v_raw(k, &s.e_raw(k + 1, &a)), vk);
                }
                for k in 1..=h {
                    for l in 1..=h {
                        if k != l {
                            assert!(s.e_raw(k, &s.e_raw(l, &a)).is_zero());
                            if l < h {
                                assert!(s.e_raw(k, &s.v_raw(l, &a)).is_zero());
                            }
                        }
                    }
                }
                for b in s.elements() {
                    for k in 1..=h {
                        assert_eq!(
                            s.e_raw(k, &s.add_raw(&a, &b)),
                            s.add_raw(&s.e_raw(k, &a), &s.e_raw(k, &b))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn chain_members_are_congruences() {
        for primes in [&[2, 3][..], &[2, 3, 2]] {
            let s = d(primes);
            let maps = translations(&s);
            let chain = s.chain();
            let parts = chain.partitions();
            assert_eq!(parts[0].class_count(), s.carrier_size() as usize);
            assert_eq!(parts[s.h()].class_count(), 1);
            for w in parts.windows(2) {
                assert!(w[0].refines(&w[1]) && w[0] != w[1]);
            }
            for p in &parts {
                for f in &maps {
                    for a in 0..f.len() {
                        assert!(p.related(f[a], f[p.labels()[a]]));
                    }
                }
            }
        }
    }

    #[test]
    fn congruence_enumeration() {
        for (primes, count) in [(&[2][..], 2), (&[2, 3], 3), (&[2, 3, 2], 4), (&[3, 2, 3], 4)] {
            let s = d(primes);
            let found = enumerate_congruences(&s, CONGRUENCE_CEILING).unwrap();
            assert_eq!(found.len(), count, "{s}");
            let chain: BTreeSet<Partition> = s.chain().partitions().into_iter().collect();
            assert_eq!(found, chain);
        }
        let big = d(&[5, 7, 5]);
        assert!(matches!(
            enumerate_congruences(&big, CONGRUENCE_CEILING),
            Err(Error::Ceiling { .. })
        ));
    }
}
