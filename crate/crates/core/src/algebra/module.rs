//! Finitely presented graded modules over component rings and their maps.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_traits::{One, Zero};

use crate::error::{Error, Result};

use super::gb::{Groebner, Order, Vector};
use super::poly::{mono_degree, Mono, Poly, Q};
use super::ring::{Ring, RingMap};

/// Element of a free module, one polynomial per generator.
pub type Elem = Vec<Poly>;

/// Closed integer interval of degrees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct DegreeWindow {
    pub lo: i64,
    pub hi: i64,
}

impl DegreeWindow {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::Schema(format!("degree window [{lo}, {hi}] is empty")));
        }
        Ok(Self { lo, hi })
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }

    pub fn contains(&self, d: i64) -> bool {
        self.lo <= d && d <= self.hi
    }

    pub fn intersect(&self, other: &DegreeWindow) -> Option<DegreeWindow> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(DegreeWindow { lo, hi })
    }
}

impl fmt::Display for DegreeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Standard-monomial basis of one degree of a module.
#[derive(Clone, Debug)]
pub struct Slice {
    pub degree: i64,
    pub basis: Vec<(Mono, usize)>,
    index: BTreeMap<(Mono, usize), usize>,
}

impl Slice {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, exp: &Mono, pos: usize) -> Option<usize> {
        self.index.get(&(exp.clone(), pos)).copied()
    }
}

#[derive(Clone)]
pub struct Module {
    ring: Ring,
    degrees: Vec<i64>,
    relations: Vec<Elem>,
    gb: Arc<OnceLock<Arc<Groebner>>>,
}

impl PartialEq for Module {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.degrees == other.degrees && self.relations == other.relations
    }
}

impl Eq for Module {}

impl fmt::Debug for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.ring.var_names();
        write!(f, "Module({:?}, gens={:?}, rels=[", self.ring, self.degrees)?;
        for r in &self.relations {
            write!(f, "(")?;
            for (i, p) in r.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", p.display(&names))?;
            }
            write!(f, ")")?;
        }
        write!(f, "])")
    }
}

/// Weighted degree of a homogeneous element, `None` when zero.
pub fn elem_degree(v: &[Poly], degrees: &[i64], weights: &[i64]) -> Result<Option<i64>> {
    let mut d: Option<i64> = None;
    for (p, &g) in v.iter().zip(degrees) {
        for (e, _) in p.terms() {
            let x = mono_degree(e, weights) + g;
            match d {
                None => d = Some(x),
                Some(y) if y != x => return Err(Error::Schema("element is not homogeneous".into())),
                _ => {}
            }
        }
    }
    Ok(d)
}

impl Module {
    pub fn new(ring: Ring, degrees: Vec<i64>, relations: Vec<Elem>) -> Result<Self> {
        let n = degrees.len();
        let w = ring.weights();
        let mut rels = Vec::new();
        for (k, r) in relations.into_iter().enumerate() {
            if r.len() != n {
                return Err(Error::Schema(format!("relation {k} has {} entries, expected {n}", r.len())));
            }
            if r.iter().any(|p| p.nvars() != ring.nvars() || !ring.admits(p)) {
                return Err(Error::IncompatibleRings(format!("relation {k} is not over the module ring")));
            }
            elem_degree(&r, &degrees, &w).map_err(|_| Error::Schema(format!("relation {k} is not homogeneous")))?;
            if r.iter().any(|p| !p.is_zero()) {
                rels.push(r);
            }
        }
        Ok(Self { ring, degrees, relations: rels, gb: Arc::new(OnceLock::new()) })
    }

    pub fn free(ring: Ring, degrees: Vec<i64>) -> Self {
        Self { ring, degrees, relations: Vec::new(), gb: Arc::new(OnceLock::new()) }
    }

    pub fn zero(ring: Ring) -> Self {
        Self::free(ring, Vec::new())
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn degrees(&self) -> &[i64] {
        &self.degrees
    }

    pub fn relations(&self) -> &[Elem] {
        &self.relations
    }

    pub fn ngens(&self) -> usize {
        self.degrees.len()
    }

    pub fn nvars(&self) -> usize {
        self.ring.nvars()
    }

    pub fn zero_elem(&self) -> Elem {
        vec![self.ring.zero(); self.ngens()]
    }

    pub fn basis_elem(&self, i: usize) -> Elem {
        let mut v = self.zero_elem();
        v[i] = self.ring.one();
        v
    }

    pub fn monomial_elem(&self, exp: &Mono, pos: usize) -> Elem {
        let mut v = self.zero_elem();
        v[pos] = Poly::monomial(exp.clone(), Q::one());
        v
    }

    /// User relations together with the ring relations on every generator.
    pub fn all_relations(&self) -> Vec<Elem> {
        let mut out = self.relations.clone();
        for g in self.ring.relations() {
            for i in 0..self.ngens() {
                let mut v = self.zero_elem();
                v[i] = g.clone();
                out.push(v);
            }
        }
        out
    }

    pub fn groebner(&self) -> Arc<Groebner> {
        self.gb
            .get_or_init(|| {
                let o = Order::plain(self.ngens(), self.nvars());
                let gens = self.all_relations().iter().map(|r| Vector::from_polys(r, &o)).collect();
                Arc::new(Groebner::new(gens, o))
            })
            .clone()
    }

    pub fn normal_form(&self, v: &[Poly]) -> Elem {
        let gb = self.groebner();
        gb.reduce(Vector::from_polys(v, gb.order())).to_polys(self.ngens(), self.nvars())
    }

    pub fn is_zero_elem(&self, v: &[Poly]) -> bool {
        let gb = self.groebner();
        gb.contains(Vector::from_polys(v, gb.order()))
    }

    pub fn elem_eq(&self, a: &[Poly], b: &[Poly]) -> bool {
        self.is_zero_elem(&sub_elem(a, b))
    }

    pub fn degree_of(&self, v: &[Poly]) -> Result<Option<i64>> {
        elem_degree(v, &self.degrees, &self.ring.weights())
    }

    pub fn is_zero(&self) -> bool {
        (0..self.ngens()).all(|i| self.is_zero_elem(&self.basis_elem(i)))
    }

    /// Standard-monomial basis of degree `d`, or `None` when that degree is
    /// infinite-dimensional.
    pub fn slice(&self, d: i64) -> Option<Slice> {
        let gb = self.groebner();
        let nu = self.ring.nu();
        let inv: Vec<usize> = self.ring.inverted().iter().map(|&i| nu + i).collect();
        let nt = inv.len();
        let big_e = gb.max_lead_exponents().into_iter().max().unwrap_or(0).max(1) as i64;
        let mut basis = Vec::new();
        for pos in 0..self.ngens() {
            let diff = d - self.degrees[pos];
            if diff % 2 != 0 {
                continue;
            }
            let h = diff / 2;
            if nt == 0 {
                if h < 0 {
                    continue;
                }
                for a in compositions(h as u32, nu) {
                    let mut e = a;
                    e.extend(std::iter::repeat(0).take(self.nvars() - nu));
                    if gb.is_standard(&e, pos) {
                        basis.push((e, pos));
                    }
                }
                continue;
            }
            if nu == 0 {
                // only inverse variables with l t = 1 impossible; field with forms is degenerate
                continue;
            }
            let s_max = (nu as i64 * big_e).max(h + nt as i64 * big_e).max(h.max(0));
            // an infinite slice has a standard monomial on the level just above s_max
            let probe = s_max + 1;
            if level_monomials(probe, h, nu, &inv, self.nvars()).any(|e| gb.is_standard(&e, pos)) {
                return None;
            }
            for s in h.max(0)..=s_max {
                for e in level_monomials(s, h, nu, &inv, self.nvars()) {
                    if gb.is_standard(&e, pos) {
                        basis.push((e, pos));
                    }
                }
            }
        }
        let index = basis.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        Some(Slice { degree: d, basis, index })
    }

    pub fn slice_or_overflow(&self, d: i64) -> Result<Slice> {
        self.slice(d).ok_or_else(|| Error::WindowOverflow(format!("degree {d} of {self:?} is infinite-dimensional")))
    }

    pub fn dim(&self, d: i64) -> Option<usize> {
        self.slice(d).map(|s| s.dim())
    }

    pub fn dims(&self, w: &DegreeWindow) -> Vec<Option<usize>> {
        w.degrees().map(|d| self.dim(d)).collect()
    }

    /// Coordinates of a homogeneous element of degree `slice.degree`.
    pub fn coords(&self, v: &[Poly], slice: &Slice) -> Result<Vec<Q>> {
        let nf = self.normal_form(v);
        let mut out = vec![Q::zero(); slice.dim()];
        for (pos, p) in nf.iter().enumerate() {
            for (e, c) in p.terms() {
                let i = slice
                    .index_of(e, pos)
                    .ok_or_else(|| Error::Verification(format!("element is not in degree {}", slice.degree)))?;
                out[i] = c.clone();
            }
        }
        Ok(out)
    }

    pub fn from_coords(&self, c: &[Q], slice: &Slice) -> Elem {
        let mut v = self.zero_elem();
        for (x, (e, pos)) in c.iter().zip(&slice.basis) {
            if !x.is_zero() {
                v[*pos].add_term(e.clone(), x.clone());
            }
        }
        v
    }

    pub fn shift(&self, n: i64) -> Module {
        Module {
            ring: self.ring.clone(),
            degrees: self.degrees.iter().map(|d| d + n).collect(),
            relations: self.relations.clone(),
            gb: self.gb.clone(),
        }
    }

    pub fn direct_sum(parts: &[Module]) -> Result<Module> {
        let Some(first) = parts.first() else {
            return Err(Error::Schema("direct sum of no modules needs a ring".into()));
        };
        let ring = first.ring.clone();
        let mut degrees = Vec::new();
        let total: usize = parts.iter().map(|m| m.ngens()).sum();
        let mut rels = Vec::new();
        let mut offset = 0;
        for m in parts {
            if m.ring != ring {
                return Err(Error::IncompatibleRings("direct sum of modules over different rings".into()));
            }
            degrees.extend_from_slice(&m.degrees);
            for r in &m.relations {
                let mut v = vec![ring.zero(); total];
                for (i, p) in r.iter().enumerate() {
                    v[offset + i] = p.clone();
                }
                rels.push(v);
            }
            offset += m.ngens();
        }
        Module::new(ring, degrees, rels)
    }

    /// Extension of scalars along a ring map.
    pub fn base_change(&self, f: &RingMap) -> Result<Module> {
        if f.source != self.ring {
            return Err(Error::IncompatibleRings(format!("base change from {:?} applied to a module over {:?}", f.source, self.ring)));
        }
        let rels = self.relations.iter().map(|r| r.iter().map(|p| f.apply(p)).collect()).collect();
        Module::new(f.target.clone(), self.degrees.clone(), rels)
    }

    pub fn localize(&self, target: &Ring) -> Result<Module> {
        self.base_change(&RingMap::localization(&self.ring, target)?)
    }

    pub fn tensor(&self, other: &Module) -> Result<Module> {
        if self.ring != other.ring {
            return Err(Error::IncompatibleRings("tensor product over different rings".into()));
        }
        let (m, n) = (self.ngens(), other.ngens());
        let idx = |i: usize, j: usize| i * n + j;
        let mut degrees = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                degrees.push(self.degrees[i] + other.degrees[j]);
            }
        }
        let mut rels = Vec::new();
        let z = self.ring.zero();
        for r in &self.relations {
            for j in 0..n {
                let mut v = vec![z.clone(); m * n];
                for i in 0..m {
                    v[idx(i, j)] = r[i].clone();
                }
                rels.push(v);
            }
        }
        for r in &other.relations {
            for i in 0..m {
                let mut v = vec![z.clone(); m * n];
                for j in 0..n {
                    v[idx(i, j)] = r[j].clone();
                }
                rels.push(v);
            }
        }
        Module::new(self.ring.clone(), degrees, rels)
    }

    /// Remove generators made redundant by relations with a nonzero scalar
    /// entry. Returns the smaller module, the expression of every old
    /// generator in the new generators, and the indices of the kept generators.
    pub fn minimize(&self) -> (Module, Vec<Elem>, Vec<usize>) {
        let nv = self.nvars();
        let n = self.ngens();
        let mut alive: Vec<usize> = (0..n).collect();
        let mut degrees = self.degrees.clone();
        let mut rels: Vec<Elem> = self.relations.clone();
        let mut expr: Vec<Elem> = (0..n).map(|i| self.basis_elem(i)).collect();
        let mut checked_gb = false;
        loop {
            let found = rels.iter().enumerate().find_map(|(k, r)| {
                r.iter().position(|p| !p.is_zero() && p.constant_value().is_some()).map(|i| (k, i))
            });
            let Some((k, i)) = found else {
                if checked_gb {
                    break;
                }
                checked_gb = true;
                let cur = Module { ring: self.ring.clone(), degrees: degrees.clone(), relations: rels.clone(), gb: Arc::new(OnceLock::new()) };
                let gb = cur.groebner();
                let mut extra = Vec::new();
                for v in gb.elements() {
                    let l = v.lead().expect("nonzero");
                    if l.exp.iter().all(|&k| k == 0) {
                        extra.push(v.to_polys(degrees.len(), nv));
                    }
                }
                if extra.is_empty() {
                    break;
                }
                rels.extend(extra);
                continue;
            };
            checked_gb = false;
            let r = rels.remove(k);
            let c = r[i].constant_value().expect("scalar entry");
            let mut sub = neg_elem(&r);
            sub[i] = Poly::zero(nv);
            let sub: Elem = sub.iter().map(|p| p.scale(&(Q::one() / &c))).collect();
            let eliminate = |v: &Elem| -> Elem {
                let mut out: Elem = v.clone();
                let coef = out[i].clone();
                out[i] = Poly::zero(nv);
                if !coef.is_zero() {
                    for (o, s) in out.iter_mut().zip(&sub) {
                        if !s.is_zero() {
                            *o = &*o + &(&coef * s);
                        }
                    }
                }
                out.remove(i);
                out
            };
            rels = rels.iter().map(&eliminate).filter(|r| r.iter().any(|p| !p.is_zero())).collect();
            expr = expr.iter().map(&eliminate).collect();
            alive.remove(i);
            degrees.remove(i);
        }
        let m = Module::new(self.ring.clone(), degrees, rels).expect("eliminated relations stay homogeneous");
        (m, expr, alive)
    }
}

fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(total - first, parts - 1) {
            let mut v = vec![first];
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

/// Monomials with `|a| = s` in the first `nu` variables and `|b| = s - h` in
/// the listed inverse variables.
fn level_monomials(s: i64, h: i64, nu: usize, inv: &[usize], nvars: usize) -> impl Iterator<Item = Mono> {
    let sb = s - h;
    let mut out = Vec::new();
    if s >= 0 && sb >= 0 {
        for a in compositions(s as u32, nu) {
            for b in compositions(sb as u32, inv.len()) {
                let mut e = vec![0u32; nvars];
                e[..nu].copy_from_slice(&a);
                for (k, &v) in inv.iter().enumerate() {
                    e[v] = b[k];
                }
                out.push(e);
            }
        }
    }
    out.into_iter()
}

pub fn add_elem(a: &[Poly], b: &[Poly]) -> Elem {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_elem(a: &[Poly], b: &[Poly]) -> Elem {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn neg_elem(a: &[Poly]) -> Elem {
    a.iter().map(|x| -x).collect()
}

pub fn scale_elem(a: &[Poly], c: &Poly) -> Elem {
    a.iter().map(|x| x * c).collect()
}

pub fn is_zero_vec(a: &[Poly]) -> bool {
    a.iter().all(|p| p.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ring::Universe;
    use crate::lattice;

    pub(crate) fn qc() -> Ring {
        Ring::polynomial(Universe::new(1, vec![vec![1]], vec![vec![1]]).unwrap())
    }

    pub(crate) fn laurent() -> Ring {
        Ring::inverting(Universe::new(1, vec![vec![1]], vec![vec![1]]).unwrap(), &[vec![1]]).unwrap()
    }

    #[test]
    fn truncated_polynomial_dims() {
        let r = qc();
        let c = r.var(0);
        let m = Module::new(r.clone(), vec![0], vec![vec![c.pow(2)]]).unwrap();
        let w = DegreeWindow::new(0, 6).unwrap();
        assert_eq!(m.dims(&w), vec![Some(1), Some(0), Some(1), Some(0), Some(0), Some(0), Some(0)]);
    }

    #[test]
    fn laurent_dims_all_degrees() {
        let m = Module::free(laurent(), vec![0]);
        for d in -10..=10 {
            assert_eq!(m.dim(d), Some(if d % 2 == 0 { 1 } else { 0 }), "degree {d}");
        }
    }

    #[test]
    fn rank_two_localized_slice_is_infinite() {
        let u = Universe::new(2, lattice::identity(2), vec![vec![1, 0]]).unwrap();
        let r = Ring::inverting(u, &[vec![1, 0]]).unwrap();
        let m = Module::free(r, vec![0]);
        assert!(m.slice(0).is_none());
    }

    #[test]
    fn minimize_drops_unit_generators() {
        let r = qc();
        let c = r.var(0);
        let m = Module::new(r.clone(), vec![0, 2], vec![vec![c.clone(), -&r.one()]]).unwrap();
        let (small, to_new, _) = m.minimize();
        assert_eq!(small.ngens(), 1);
        assert_eq!(to_new[1], vec![c]);
    }

    #[test]
    fn tensor_of_cyclic_modules() {
        let r = qc();
        let c = r.var(0);
        let a = Module::new(r.clone(), vec![0], vec![vec![c.clone()]]).unwrap();
        let b = Module::new(r.clone(), vec![0], vec![vec![c.pow(2)]]).unwrap();
        let t = a.tensor(&b).unwrap();
        let w = DegreeWindow::new(0, 4).unwrap();
        assert_eq!(t.dims(&w), a.dims(&w));
    }
}
