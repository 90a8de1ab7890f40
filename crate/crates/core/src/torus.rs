//! Characters, representations and closed subgroups of a torus `G = (S^1)^r`.
//!
//! A closed subgroup `A` is encoded by its annihilator: the lattice of
//! characters of `G` that are trivial on `A`. This is a bijection between
//! closed subgroups and sublattices of `Z^r` that reverses inclusion, turns
//! intersection into sum and products into intersection, so every poset
//! question reduces to exact lattice arithmetic.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{self, IntVec};

type Q64 = Ratio<i64>;

/// A character `z_1^{a_1} ... z_r^{a_r}` of the torus.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Character(pub IntVec);

impl Character {
    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn is_trivial_on(&self, a: &ClosedSubgroup) -> bool {
        lattice::contains(&a.ann, &self.0)
    }

    /// Kernel of the character as a closed subgroup (the whole group for the trivial character).
    pub fn kernel(&self) -> ClosedSubgroup {
        ClosedSubgroup::from_ann(self.rank(), vec![self.0.clone()])
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z^{:?}", self.0)
    }
}

/// A virtual representation `V_0 - V_1`, stored as two sorted multisets of characters.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VirtualRepresentation {
    pub positive: Vec<Character>,
    pub negative: Vec<Character>,
}

impl VirtualRepresentation {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(mut positive: Vec<Character>, mut negative: Vec<Character>) -> Self {
        positive.sort();
        negative.sort();
        // cancel common characters
        let mut p = Vec::new();
        let mut n = negative;
        for c in positive {
            if let Some(i) = n.iter().position(|d| *d == c) {
                n.remove(i);
            } else {
                p.push(c);
            }
        }
        Self { positive: p, negative: n }
    }

    pub fn from_chars(chars: &[&[i64]]) -> Self {
        Self::new(chars.iter().map(|c| Character(c.to_vec())).collect(), vec![])
    }

    pub fn is_zero(&self) -> bool {
        self.positive.is_empty() && self.negative.is_empty()
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut p = self.positive.clone();
        p.extend(other.positive.iter().cloned());
        let mut n = self.negative.clone();
        n.extend(other.negative.iter().cloned());
        Self::new(p, n)
    }

    pub fn neg(&self) -> Self {
        Self::new(self.negative.clone(), self.positive.clone())
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.sum(&other.neg())
    }

    pub fn scale(&self, k: usize) -> Self {
        let mut out = Self::zero();
        for _ in 0..k {
            out = out.sum(self);
        }
        out
    }

    /// `V^A`: the characters trivial on `A`.
    pub fn fixed(&self, a: &ClosedSubgroup) -> Self {
        Self::new(
            self.positive.iter().filter(|c| c.is_trivial_on(a)).cloned().collect(),
            self.negative.iter().filter(|c| c.is_trivial_on(a)).cloned().collect(),
        )
    }

    /// Complex dimension of `V^A` (may be negative for virtual representations).
    pub fn fixed_dim(&self, a: &ClosedSubgroup) -> i64 {
        let p = self.positive.iter().filter(|c| c.is_trivial_on(a)).count() as i64;
        let n = self.negative.iter().filter(|c| c.is_trivial_on(a)).count() as i64;
        p - n
    }

    pub fn dim(&self) -> i64 {
        self.positive.len() as i64 - self.negative.len() as i64
    }

    pub fn characters(&self) -> impl Iterator<Item = &Character> {
        self.positive.iter().chain(self.negative.iter())
    }
}

pub fn fixed_subrepresentation(v: &VirtualRepresentation, a: &ClosedSubgroup) -> VirtualRepresentation {
    v.fixed(a)
}

/// Closed subgroup of `G`, stored as the HNF of its annihilator lattice.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClosedSubgroup {
    rank: usize,
    ann: Vec<IntVec>,
}

impl fmt::Debug for ClosedSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sub{}{:?}", self.rank, self.ann)
    }
}

impl fmt::Display for ClosedSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ann.is_empty() {
            return write!(f, "G");
        }
        if self.ann == lattice::identity(self.rank) {
            return write!(f, "1");
        }
        write!(f, "ann{:?}", self.ann)
    }
}

impl ClosedSubgroup {
    pub fn from_ann(rank: usize, rows: Vec<IntVec>) -> Self {
        Self { rank, ann: lattice::hnf(&rows, rank) }
    }

    pub fn trivial(rank: usize) -> Self {
        Self { rank, ann: lattice::identity(rank) }
    }

    pub fn whole(rank: usize) -> Self {
        Self { rank, ann: Vec::new() }
    }

    /// Connected subgroup whose Lie algebra is spanned by the given cocharacters.
    pub fn from_cocharacters(rank: usize, cochars: &[IntVec]) -> Self {
        Self { rank, ann: lattice::orthogonal(cochars, rank) }
    }

    /// Subgroup `(identity component spanned by cochars) . <finite generators>`,
    /// finite generators given as rational vectors modulo `Z^r`.
    pub fn from_descriptor(rank: usize, cochars: &[IntVec], finite: &[Vec<Q64>]) -> Self {
        let n = lattice::orthogonal(cochars, rank);
        if finite.is_empty() || n.is_empty() {
            return Self { rank, ann: n };
        }
        let d: i64 = finite
            .iter()
            .flat_map(|f| f.iter().map(|x| *x.denom()))
            .fold(1i64, |acc, x| num_integer::lcm(acc, x));
        // rows: for each basis vector n_i, the integers D * (n_i . f) for every f
        let k = finite.len();
        let mut rows: Vec<IntVec> = n
            .iter()
            .map(|ni| {
                finite
                    .iter()
                    .map(|f| {
                        let s: Q64 = ni.iter().zip(f).map(|(a, b)| Q64::from_integer(*a) * b).sum();
                        (s * Q64::from_integer(d)).to_integer()
                    })
                    .collect()
            })
            .collect();
        for j in 0..k {
            rows.push((0..k).map(|i| if i == j { d } else { 0 }).collect());
        }
        let ker = lattice::left_kernel(&rows, k);
        let vecs: Vec<IntVec> = ker
            .iter()
            .map(|c| {
                let mut v = vec![0i64; rank];
                for (i, ni) in n.iter().enumerate() {
                    for j in 0..rank {
                        v[j] += c[i] * ni[j];
                    }
                }
                v
            })
            .collect();
        Self::from_ann(rank, vecs)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ann(&self) -> &[IntVec] {
        &self.ann
    }

    pub fn dim(&self) -> usize {
        self.rank - self.ann.len()
    }

    pub fn identity_component(&self) -> ConnectedSubgroup {
        ConnectedSubgroup(Self { rank: self.rank, ann: lattice::saturate(&self.ann, self.rank) })
    }

    pub fn is_connected(&self) -> bool {
        lattice::saturate(&self.ann, self.rank) == self.ann
    }

    /// Order of the component group.
    pub fn component_count(&self) -> i64 {
        let sat = lattice::saturate(&self.ann, self.rank);
        let coords: Vec<IntVec> = self.ann.iter().map(|r| lattice::coords(&sat, r).expect("sublattice")).collect();
        lattice::det_hnf(&lattice::hnf(&coords, sat.len())).abs()
    }

    /// `other subseteq self`.
    pub fn contains(&self, other: &ClosedSubgroup) -> bool {
        lattice::is_sublattice(&self.ann, &other.ann)
    }

    pub fn intersect(&self, other: &ClosedSubgroup) -> ClosedSubgroup {
        Self { rank: self.rank, ann: lattice::sum(&self.ann, &other.ann, self.rank) }
    }

    pub fn product(&self, other: &ClosedSubgroup) -> ClosedSubgroup {
        Self { rank: self.rank, ann: lattice::intersect(&self.ann, &other.ann, self.rank) }
    }

    /// Cocharacter basis (HNF) of the identity component.
    pub fn cocharacters(&self) -> Vec<IntVec> {
        lattice::orthogonal(&self.ann, self.rank)
    }

    /// Canonical rational generators (entries in `[0,1)`) of the component group,
    /// derived deterministically from the annihilator.
    pub fn finite_generators(&self) -> Vec<Vec<Q64>> {
        let sat = lattice::saturate(&self.ann, self.rank);
        if sat.is_empty() {
            return Vec::new();
        }
        let k = sat.len();
        let b: Vec<IntVec> = self.ann.iter().map(|r| lattice::coords(&sat, r).expect("sublattice")).collect();
        let binv = invert(&b.iter().map(|r| r.iter().map(|&x| Q64::from_integer(x)).collect()).collect::<Vec<_>>());
        // S S^T
        let s: Vec<Vec<Q64>> = sat.iter().map(|r| r.iter().map(|&x| Q64::from_integer(x)).collect()).collect();
        let sst: Vec<Vec<Q64>> = (0..k)
            .map(|i| (0..k).map(|j| s[i].iter().zip(&s[j]).map(|(a, b)| a * b).sum()).collect())
            .collect();
        let sst_inv = invert(&sst);
        let mut gens = Vec::new();
        for j in 0..k {
            let y: Vec<Q64> = (0..k).map(|i| binv[i][j]).collect();
            if y.iter().all(|x| x.is_integer()) {
                continue;
            }
            let w: Vec<Q64> = (0..k).map(|i| (0..k).map(|l| sst_inv[i][l] * y[l]).sum()).collect();
            let theta: Vec<Q64> = (0..self.rank)
                .map(|c| {
                    let t: Q64 = (0..k).map(|i| s[i][c] * w[i]).sum();
                    t - Q64::from_integer(t.floor().to_integer())
                })
                .collect();
            gens.push(theta);
        }
        gens
    }
}

fn invert(m: &[Vec<Q64>]) -> Vec<Vec<Q64>> {
    let n = m.len();
    let mut a: Vec<Vec<Q64>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = r.clone();
            v.extend((0..n).map(|j| if i == j { Q64::one() } else { Q64::zero() }));
            v
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero()).expect("invertible matrix");
        a.swap(c, p);
        let inv = Q64::one() / a[c][c];
        for x in a[c].iter_mut() {
            *x *= inv;
        }
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c];
                for j in 0..2 * n {
                    let t = a[c][j] * f;
                    a[i][j] -= t;
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Closed connected subgroup (subtorus).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConnectedSubgroup(ClosedSubgroup);

impl fmt::Display for ConnectedSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl ConnectedSubgroup {
    pub fn new(sub: ClosedSubgroup) -> Result<Self> {
        if sub.is_connected() {
            Ok(Self(sub))
        } else {
            Err(Error::Schema(format!("subgroup {sub} is not connected")))
        }
    }

    pub fn trivial(rank: usize) -> Self {
        Self(ClosedSubgroup::trivial(rank))
    }

    pub fn whole(rank: usize) -> Self {
        Self(ClosedSubgroup::whole(rank))
    }

    pub fn from_cocharacters(rank: usize, cochars: &[IntVec]) -> Self {
        Self(ClosedSubgroup::from_cocharacters(rank, cochars))
    }

    /// The circle with the given cocharacter.
    pub fn circle(cochar: &[i64]) -> Self {
        Self::from_cocharacters(cochar.len(), &[cochar.to_vec()])
    }

    pub fn as_closed(&self) -> &ClosedSubgroup {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.rank
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn codim(&self) -> usize {
        self.0.ann.len()
    }

    pub fn contains(&self, other: &ConnectedSubgroup) -> bool {
        self.0.contains(&other.0)
    }

    /// Join in the poset of connected subgroups.
    pub fn product(&self, other: &ConnectedSubgroup) -> ConnectedSubgroup {
        ConnectedSubgroup(self.0.product(&other.0))
    }

    /// Meet in the poset of connected subgroups.
    pub fn meet(&self, other: &ConnectedSubgroup) -> ConnectedSubgroup {
        self.0.intersect(&other.0).identity_component()
    }

    /// Characters of `G/self`, i.e. the annihilator lattice (HNF basis).
    pub fn ann(&self) -> &[IntVec] {
        &self.0.ann
    }

    pub fn is_whole(&self) -> bool {
        self.0.ann.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.dim() == 0
    }
}

/// Image of `a` in `G/K`, encoded by its preimage `a.K`.
pub fn quotient_image(a: &ClosedSubgroup, k: &ConnectedSubgroup) -> ClosedSubgroup {
    a.product(k.as_closed())
}

/// An object `(G/K)_{G/L}` of the poset of quotient pairs, `L subseteq K`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuotientPair {
    pub upper: ConnectedSubgroup,
    pub lower: ConnectedSubgroup,
}

impl QuotientPair {
    pub fn new(upper: ConnectedSubgroup, lower: ConnectedSubgroup) -> Result<Self> {
        if !upper.contains(&lower) {
            return Err(Error::Closure(format!("pair ({upper}, {lower}) has lower not contained in upper")));
        }
        Ok(Self { upper, lower })
    }

    pub fn diagonal(k: &ConnectedSubgroup) -> Self {
        Self { upper: k.clone(), lower: k.clone() }
    }

    pub fn is_diagonal(&self) -> bool {
        self.upper == self.lower
    }
}

impl fmt::Display for QuotientPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(G/{})_(G/{})", self.upper, self.lower)
    }
}

/// The finite fragment of the subgroup posets that a computation works over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrackedPoset {
    rank: usize,
    connected: BTreeSet<ConnectedSubgroup>,
    closed: BTreeSet<ClosedSubgroup>,
    /// Restrict every family over `F/L` to the single cell `{L}`.
    semifree: bool,
}

/// Morphisms of the tracked poset of quotient pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Q2Diagram {
    pub objects: Vec<QuotientPair>,
    /// `(G/K)_{G/L} -> (G/H)_{G/L}` covering relations.
    pub horizontal: Vec<(QuotientPair, QuotientPair)>,
    /// `(G/H)_{G/K} -> (G/H)_{G/L}` covering relations.
    pub vertical: Vec<(QuotientPair, QuotientPair)>,
}

impl TrackedPoset {
    /// Validate a tracked fragment, checking every closure rule eagerly.
    pub fn new(rank: usize, connected: Vec<ConnectedSubgroup>, closed: Vec<ClosedSubgroup>) -> Result<Self> {
        let connected: BTreeSet<_> = connected.into_iter().collect();
        let mut closed: BTreeSet<_> = closed.into_iter().collect();
        closed.extend(connected.iter().map(|k| k.as_closed().clone()));
        let p = Self { rank, connected, closed, semifree: false };
        p.check()?;
        Ok(p)
    }

    /// Smallest tracked fragment containing the given connected subgroups and
    /// the kernels of the given characters.
    pub fn generate(rank: usize, connected: &[ConnectedSubgroup], characters: &[Character]) -> Result<Self> {
        let mut conn: BTreeSet<ConnectedSubgroup> = connected.iter().cloned().collect();
        conn.insert(ConnectedSubgroup::trivial(rank));
        conn.insert(ConnectedSubgroup::whole(rank));
        let mut closed: BTreeSet<ClosedSubgroup> = BTreeSet::new();
        for c in characters {
            if c.rank() != rank {
                return Err(Error::Schema(format!("character {c} has wrong rank")));
            }
            if !c.is_trivial() {
                closed.insert(c.kernel());
            }
        }
        loop {
            let before = (conn.len(), closed.len());
            closed.extend(conn.iter().map(|k| k.as_closed().clone()));
            let cl: Vec<_> = closed.iter().cloned().collect();
            for a in &cl {
                conn.insert(a.identity_component());
            }
            for a in &cl {
                for b in &cl {
                    closed.insert(a.intersect(b));
                }
            }
            let cn: Vec<_> = conn.iter().cloned().collect();
            for a in &cn {
                for b in &cn {
                    conn.insert(a.product(b));
                }
            }
            for a in closed.clone() {
                for l in intermediate_subgroups(&a) {
                    closed.insert(l);
                }
            }
            if (conn.len(), closed.len()) == before {
                break;
            }
            if closed.len() > 4096 {
                return Err(Error::Closure("tracked closure does not terminate within 4096 subgroups".into()));
            }
        }
        let p = Self { rank, connected: conn, closed, semifree: false };
        p.check()?;
        Ok(p)
    }

    /// Rank 1, tracked `{1, G}`, every family restricted to the cell `{L}`.
    pub fn semifree_circle() -> Self {
        let mut p = Self::generate(1, &[], &[]).expect("rank one closure");
        p.semifree = true;
        p
    }

    pub fn with_semifree(mut self, semifree: bool) -> Self {
        self.semifree = semifree;
        self
    }

    pub fn is_semifree(&self) -> bool {
        self.semifree
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn connected(&self) -> impl Iterator<Item = &ConnectedSubgroup> {
        self.connected.iter()
    }

    pub fn closed(&self) -> impl Iterator<Item = &ClosedSubgroup> {
        self.closed.iter()
    }

    pub fn is_tracked(&self, k: &ConnectedSubgroup) -> bool {
        self.connected.contains(k)
    }

    pub fn is_tracked_closed(&self, a: &ClosedSubgroup) -> bool {
        self.closed.contains(a)
    }

    pub fn require_tracked(&self, k: &ConnectedSubgroup) -> Result<()> {
        if self.is_tracked(k) {
            Ok(())
        } else {
            Err(Error::Closure(format!("connected subgroup {k} is not tracked")))
        }
    }

    fn check(&self) -> Result<()> {
        let one = ConnectedSubgroup::trivial(self.rank);
        let g = ConnectedSubgroup::whole(self.rank);
        if !self.connected.contains(&one) || !self.connected.contains(&g) {
            return Err(Error::Closure("tracked poset must contain 1 and G".into()));
        }
        for a in &self.closed {
            if a.rank != self.rank {
                return Err(Error::Closure(format!("subgroup {a} has wrong rank")));
            }
            if !self.connected.contains(&a.identity_component()) {
                return Err(Error::Closure(format!("identity component of {a} is not tracked")));
            }
            for b in &self.closed {
                let i = a.intersect(b);
                if !self.closed.contains(&i) {
                    return Err(Error::Closure(format!("intersection of {a} and {b} is not tracked")));
                }
            }
            for l in intermediate_subgroups(a) {
                if !self.closed.contains(&l) {
                    return Err(Error::Closure(format!("subgroup {l} between the identity component of {a} and {a} is not tracked")));
                }
            }
        }
        for a in &self.connected {
            for b in &self.connected {
                if !self.connected.contains(&a.product(b)) {
                    return Err(Error::Closure(format!("product of {a} and {b} is not tracked")));
                }
            }
        }
        Ok(())
    }

    /// Tracked primitive characters whose kernels are tracked codimension-one
    /// subtori. Their linear forms generate the multiplicative sets.
    pub fn forms(&self) -> Vec<IntVec> {
        self.connected
            .iter()
            .filter(|k| k.codim() == 1)
            .map(|k| lattice::primitive(&k.ann()[0]))
            .collect()
    }

    /// Cells of the partition of finite subgroups of `G/L`: one per tracked
    /// closed subgroup containing `L` (the cell of subgroups whose smallest
    /// tracked container it is).
    pub fn cells(&self, l: &ConnectedSubgroup) -> Vec<ClosedSubgroup> {
        if self.semifree {
            return vec![l.as_closed().clone()];
        }
        self.closed.iter().filter(|a| a.contains(l.as_closed())).cloned().collect()
    }

    /// The cell over `F/K` receiving the cell `a` over `F/L` under `F -> FK`.
    pub fn cell_image(&self, a: &ClosedSubgroup, k: &ConnectedSubgroup) -> ClosedSubgroup {
        let prod = a.product(k.as_closed());
        if self.semifree {
            return k.as_closed().clone();
        }
        self.smallest_container(&prod)
    }

    /// Smallest tracked closed subgroup containing `a`.
    pub fn smallest_container(&self, a: &ClosedSubgroup) -> ClosedSubgroup {
        self.closed
            .iter()
            .filter(|b| b.contains(a))
            .fold(ClosedSubgroup::whole(self.rank), |acc, b| acc.intersect(b))
    }

    /// Objects and covering morphisms of the tracked poset of quotient pairs,
    /// in lexicographic order.
    pub fn enumerate_q2(&self) -> Q2Diagram {
        let conn: Vec<_> = self.connected.iter().cloned().collect();
        let mut objects = Vec::new();
        for k in &conn {
            for l in &conn {
                if k.contains(l) {
                    objects.push(QuotientPair { upper: k.clone(), lower: l.clone() });
                }
            }
        }
        objects.sort();
        let covers = |a: &ConnectedSubgroup, b: &ConnectedSubgroup| {
            a != b && b.contains(a) && !conn.iter().any(|m| m != a && m != b && m.contains(a) && b.contains(m))
        };
        let mut horizontal = Vec::new();
        let mut vertical = Vec::new();
        for x in &objects {
            for y in &objects {
                if x.lower == y.lower && covers(&x.upper, &y.upper) {
                    horizontal.push((x.clone(), y.clone()));
                }
                if x.upper == y.upper && covers(&y.lower, &x.lower) {
                    vertical.push((x.clone(), y.clone()));
                }
            }
        }
        Q2Diagram { objects, horizontal, vertical }
    }

    /// Tracked connected subgroups containing `l`, sorted.
    pub fn above(&self, l: &ConnectedSubgroup) -> Vec<ConnectedSubgroup> {
        self.connected.iter().filter(|k| k.contains(l)).cloned().collect()
    }
}

/// Closed subgroups `L` with `A_0 subseteq L subsetneq A`, where `A_0` is the
/// identity component.
pub fn intermediate_subgroups(a: &ClosedSubgroup) -> Vec<ClosedSubgroup> {
    let rank = a.rank;
    let sat = lattice::saturate(&a.ann, rank);
    if sat == a.ann {
        return Vec::new();
    }
    let k = sat.len();
    let b = lattice::hnf(&a.ann.iter().map(|r| lattice::coords(&sat, r).expect("sublattice")).collect::<Vec<_>>(), k);
    // coset representatives of Z^k / B from the diagonal of the triangular HNF
    let diag: Vec<i64> = (0..k).map(|i| b[i][i]).collect();
    let mut reps: Vec<IntVec> = vec![vec![]];
    for &d in &diag {
        let mut next = Vec::new();
        for r in &reps {
            for x in 0..d {
                let mut v = r.clone();
                v.push(x);
                next.push(v);
            }
        }
        reps = next;
    }
    let mut out = BTreeSet::new();
    // intermediate lattices B subseteq Lambda subsetneq Z^k are spanned by B
    // and at most k coset representatives
    let mut frontier: Vec<Vec<IntVec>> = vec![b.clone()];
    let mut seen: BTreeSet<Vec<IntVec>> = BTreeSet::new();
    seen.insert(b.clone());
    while let Some(lat) = frontier.pop() {
        for r in &reps {
            let mut rows = lat.clone();
            rows.push(r.clone());
            let h = lattice::hnf(&rows, k);
            if seen.insert(h.clone()) {
                frontier.push(h);
            }
        }
    }
    for lat in seen {
        let rows: Vec<IntVec> = lat
            .iter()
            .map(|c| {
                let mut v = vec![0i64; rank];
                for (i, s) in sat.iter().enumerate() {
                    for j in 0..rank {
                        v[j] += c[i] * s[j];
                    }
                }
                v
            })
            .collect();
        let sub = ClosedSubgroup::from_ann(rank, rows);
        if sub != *a {
            out.insert(sub);
        }
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q64 {
        Q64::new(n, d)
    }

    fn cyclic(m: i64) -> ClosedSubgroup {
        ClosedSubgroup::from_descriptor(1, &[], &[vec![q(1, m)]])
    }

    #[test]
    fn fixed_subrepresentation_examples() {
        let v = VirtualRepresentation::from_chars(&[&[1]]);
        assert_eq!(v.fixed(&ClosedSubgroup::trivial(1)), v);
        let z2 = VirtualRepresentation::from_chars(&[&[2]]);
        assert_eq!(z2.fixed(&cyclic(2)), z2);
        assert!(v.fixed(&cyclic(2)).is_zero());
        let w = VirtualRepresentation::from_chars(&[&[1, 0], &[1, 1]]);
        let circle = ConnectedSubgroup::circle(&[0, 1]);
        assert_eq!(w.fixed(circle.as_closed()), VirtualRepresentation::from_chars(&[&[1, 0]]));
    }

    #[test]
    fn fixed_oracle_by_evaluation() {
        // alpha trivial on Z/m iff exp(2 pi i alpha k/m) = 1 for all k
        for m in 1..=12i64 {
            for a in -12..=12i64 {
                let direct = (0..m).all(|k| (a * k).rem_euclid(m) == 0);
                assert_eq!(Character(vec![a]).is_trivial_on(&cyclic(m)), direct, "a={a} m={m}");
            }
        }
    }

    #[test]
    fn lattice_ops() {
        let g = ClosedSubgroup::whole(2);
        let a = cyclic(4);
        assert_eq!(ClosedSubgroup::whole(1).intersect(&a), a);
        let c1 = ConnectedSubgroup::circle(&[1, 0]);
        let c2 = ConnectedSubgroup::circle(&[0, 1]);
        assert_eq!(c1.product(&c2).as_closed(), &g);
        let img = quotient_image(&a, &ConnectedSubgroup::whole(1));
        assert_eq!(img, ClosedSubgroup::whole(1));
        // circle(1,0) meets circle(1,2) in Z/2
        let c3 = ConnectedSubgroup::circle(&[1, 2]);
        let i = c1.as_closed().intersect(c3.as_closed());
        assert_eq!(i.dim(), 0);
        assert_eq!(i.component_count(), 2);
    }

    #[test]
    fn descriptor_roundtrip() {
        for a in [cyclic(6), ClosedSubgroup::from_descriptor(2, &[vec![1, 1]], &[vec![q(1, 2), q(0, 1)]]), ClosedSubgroup::trivial(2)] {
            let back = ClosedSubgroup::from_descriptor(a.rank(), &a.cocharacters(), &a.finite_generators());
            assert_eq!(back, a);
        }
    }

    #[test]
    fn q2_rank_one() {
        let p = TrackedPoset::generate(1, &[], &[]).unwrap();
        let d = p.enumerate_q2();
        assert_eq!(d.objects.len(), 3);
        assert_eq!(d.horizontal.len(), 1);
        assert_eq!(d.vertical.len(), 1);
    }

    #[test]
    fn q2_rank_two_one_circle() {
        let p = TrackedPoset::generate(2, &[ConnectedSubgroup::circle(&[1, 0])], &[]).unwrap();
        let d = p.enumerate_q2();
        assert_eq!(d.objects.len(), 6);
    }

    #[test]
    fn closure_violation_reported() {
        let c1 = ConnectedSubgroup::circle(&[1, 0]);
        let err = TrackedPoset::new(2, vec![ConnectedSubgroup::trivial(2), c1], vec![]).unwrap_err();
        assert!(matches!(err, Error::Closure(_)));
    }

    #[test]
    fn intermediate_subgroups_of_cyclic() {
        let subs = intermediate_subgroups(&cyclic(4));
        assert_eq!(subs, vec![ClosedSubgroup::trivial(1), cyclic(2)].into_iter().collect::<BTreeSet<_>>().into_iter().collect::<Vec<_>>());
    }
}
