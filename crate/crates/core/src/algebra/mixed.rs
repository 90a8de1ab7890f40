//! Computations mixing a module with modules over localizations of its ring:
//! joint kernels and lifts through several maps at once, preimages of
//! images, and lower truncations of rank-one modules.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};

use super::gb::{Groebner, Order, Vector};
use super::map::ModMap;
use super::module::{is_zero_vec, neg_elem, Elem, Module};
use super::linalg;
use super::poly::{Mono, Poly, Q};
use super::ring::Ring;

/// Groebner basis of the submodule generated by the graph of
/// `m -> (f_1(m), ..., f_k(m))` and the relations of every module involved.
/// Target positions come first and sit in the eliminated block; inverse
/// variables that the source ring lacks are eliminated.
pub struct JointGraph {
    gb: Arc<Groebner>,
    ntarget: usize,
    nsource: usize,
    nvars: usize,
    source: Module,
}

impl JointGraph {
    pub fn new(source: &Module, maps: &[&ModMap]) -> Result<Self> {
        let nv = source.nvars();
        for f in maps {
            if f.source().ngens() != source.ngens() || f.source().ring() != source.ring() {
                return Err(Error::IncompatibleRings("joint maps must share their source".into()));
            }
            if f.target().nvars() != nv {
                return Err(Error::IncompatibleRings("joint maps must live in one coordinate system".into()));
            }
        }
        let ntarget: usize = maps.iter().map(|f| f.target().ngens()).sum();
        let ns = source.ngens();
        let mut block = vec![1u32; ntarget];
        block.extend(std::iter::repeat(0).take(ns));
        let nu = source.ring().nu();
        let elim: Vec<u32> = (0..nv).map(|v| u32::from(v >= nu && !source.ring().inverted().contains(&(v - nu)))).collect();
        let order = Order::new(block, elim);
        let zeros = |n: usize| vec![Poly::zero(nv); n];
        let mut gens = Vec::new();
        for j in 0..ns {
            let mut row = Vec::with_capacity(ntarget + ns);
            for f in maps {
                row.extend(f.images()[j].iter().cloned());
            }
            let mut e = zeros(ns);
            e[j] = Poly::one(nv);
            row.extend(e);
            gens.push(Vector::from_polys(&row, &order));
        }
        let mut offset = 0;
        for f in maps {
            let t = f.target();
            for r in t.all_relations() {
                let mut row = zeros(ntarget + ns);
                for (i, p) in r.into_iter().enumerate() {
                    row[offset + i] = p;
                }
                gens.push(Vector::from_polys(&row, &order));
            }
            offset += t.ngens();
        }
        for r in source.all_relations() {
            let mut row = zeros(ntarget);
            row.extend(r);
            gens.push(Vector::from_polys(&row, &order));
        }
        Ok(Self { gb: Arc::new(Groebner::new(gens, order)), ntarget, nsource: ns, nvars: nv, source: source.clone() })
    }

    /// Generators of the common kernel, as elements of the source.
    pub fn kernel_elements(&self) -> Vec<Elem> {
        self.gb
            .elements()
            .iter()
            .filter(|v| {
                let l = v.lead().expect("nonzero");
                l.pos >= self.ntarget && l.elim_degree() == 0
            })
            .map(|v| v.to_polys(self.ntarget + self.nsource, self.nvars)[self.ntarget..].to_vec())
            .filter(|e| !self.source.is_zero_elem(e))
            .collect()
    }

    /// A source element with prescribed images under every map.
    pub fn lift(&self, values: &[Elem]) -> Option<Elem> {
        let mut row: Vec<Poly> = values.iter().flat_map(|v| v.iter().cloned()).collect();
        if row.len() != self.ntarget {
            return None;
        }
        row.extend(std::iter::repeat(Poly::zero(self.nvars)).take(self.nsource));
        let nf = self.gb.reduce(Vector::from_polys(&row, self.gb.order())).to_polys(self.ntarget + self.nsource, self.nvars);
        if !is_zero_vec(&nf[..self.ntarget]) {
            return None;
        }
        let m = neg_elem(&nf[self.ntarget..]);
        m.iter().all(|p| self.source.ring().admits(p)).then_some(m)
    }
}

/// Presentation, over `ring`, of the span of `gens` inside `m` (whose ring
/// must localize `ring`), with the inclusion.
pub fn span_over(ring: &Ring, m: &Module, gens: Vec<Elem>) -> Result<(Module, ModMap)> {
    if !m.ring().localizes(ring) {
        return Err(Error::IncompatibleRings("span over a ring that the module is not a localization of".into()));
    }
    let mut degrees = Vec::with_capacity(gens.len());
    for g in &gens {
        degrees.push(m.degree_of(g)?.ok_or_else(|| Error::Verification("zero generator in span".into()))?);
    }
    let free = Module::free(ring.clone(), degrees.clone());
    let to_m = ModMap::new(free, m.clone(), gens.clone(), 0)?;
    let syz = to_m.kernel_elements();
    let k = Module::new(ring.clone(), degrees, syz)?;
    let (small, _, kept) = k.minimize();
    let images = kept.iter().map(|&i| gens[i].clone()).collect();
    let inc = ModMap::new(small.clone(), m.clone(), images, 0)?;
    Ok((small, inc))
}

/// `{x in source : f_i(x) in image(g_i) for all i}` where each `g_i` is a
/// map over the ring of the target of `f_i`.
pub fn preimage_of_images(source: &Module, pairs: &[(&ModMap, &ModMap)]) -> Result<(Module, ModMap)> {
    let mut to_coker = Vec::with_capacity(pairs.len());
    for (f, g) in pairs {
        if f.target() != g.target() || g.source().ring() != g.target().ring() {
            return Err(Error::IncompatibleRings("preimage of image needs maps into one module over its own ring".into()));
        }
        let (q, _) = g.cokernel()?;
        to_coker.push(ModMap::new(source.clone(), q, f.images().to_vec(), f.degree())?);
    }
    if to_coker.is_empty() {
        return Ok((source.clone(), ModMap::identity(source)));
    }
    let refs: Vec<&ModMap> = to_coker.iter().collect();
    let jg = JointGraph::new(source, &refs)?;
    let ker = jg.kernel_elements();
    super::map::submodule(source, ker)
}

/// Lower truncation `m_{>= lo}` of a module over a rank-one universe,
/// presented over the polynomial ring, with its map into `m`.
///
/// Over the Laurent ring the truncation is free on bases of the two lowest
/// degrees; over the polynomial ring it is generated by those bases and the
/// generators of higher degree.
pub fn truncate_below(m: &Module, lo: i64) -> Result<(Module, ModMap)> {
    let uni = m.ring().universe().clone();
    if uni.nu() > 1 {
        return Err(Error::Unsupported("lower truncation is only available over rank-one coordinate rings".into()));
    }
    let poly = Ring::polynomial(uni.clone());
    let mut gens = Vec::new();
    for d in [lo, lo + 1] {
        let s = m.slice_or_overflow(d)?;
        for (e, pos) in &s.basis {
            gens.push(m.monomial_elem(e, *pos));
        }
    }
    if !m.ring().inverted().is_empty() && uni.nu() == 1 {
        let degrees = gens.iter().map(|g| m.degree_of(g).map(|d| d.expect("nonzero"))).collect::<Result<Vec<_>>>()?;
        let free = Module::free(poly, degrees);
        let inc = ModMap::new(free.clone(), m.clone(), gens, 0)?;
        return Ok((free, inc));
    }
    for (i, &d) in m.degrees().iter().enumerate() {
        if d > lo + 1 && !m.is_zero_elem(&m.basis_elem(i)) {
            gens.push(m.basis_elem(i));
        }
    }
    if gens.is_empty() {
        let z = Module::zero(poly);
        let inc = ModMap::zero(&z, m, 0)?;
        return Ok((z, inc));
    }
    span_over(&poly, m, gens)
}

/// A pullback `a x_b c` computed in degrees `>= lo` over the polynomial ring
/// of a rank-one universe; returns the module and both projections.
pub fn truncated_pullback(f: &ModMap, g: &ModMap, lo: i64) -> Result<(Module, ModMap, ModMap)> {
    if f.target() != g.target() {
        return Err(Error::IncompatibleRings("pullback needs a common target".into()));
    }
    let (a, ta) = truncate_below(f.source(), lo)?;
    let (c, tc) = truncate_below(g.source(), lo)?;
    let fa = ta.compose(f)?;
    let gc = tc.compose(g)?;
    let sum = Module::direct_sum(&[a.clone(), c.clone()])?;
    let mut images: Vec<Elem> = fa.images().to_vec();
    images.extend(gc.images().iter().map(|v| neg_elem(v)));
    let diff = ModMap::new(sum.clone(), f.target().clone(), images, 0)?;
    let ker = diff.kernel_elements();
    let (k, inc) = if ker.is_empty() {
        let z = Module::zero(sum.ring().clone());
        let inc = ModMap::zero(&z, &sum, 0)?;
        (z, inc)
    } else {
        super::map::submodule(&sum, ker)?
    };
    let na = a.ngens();
    let pa: Vec<Elem> = inc.images().iter().map(|v| v[..na].to_vec()).collect();
    let pc: Vec<Elem> = inc.images().iter().map(|v| v[na..].to_vec()).collect();
    let to_a = ModMap::new(k.clone(), a, pa, 0)?.compose(&ta)?;
    let to_c = ModMap::new(k.clone(), c, pc, 0)?.compose(&tc)?;
    Ok((k, to_a, to_c))
}

/// Linear conditions on finitely many unknowns, each condition an equation
/// between elements of some module, compared through normal forms (which are
/// linear, so infinite slices are never enumerated).
#[derive(Clone, Debug, Default)]
pub struct LinearConditions {
    nunk: usize,
    rows: Vec<Vec<Q>>,
    rhs: Vec<Q>,
}

impl LinearConditions {
    pub fn new(nunk: usize) -> Self {
        Self { nunk, rows: Vec::new(), rhs: Vec::new() }
    }

    pub fn nunk(&self) -> usize {
        self.nunk
    }

    /// Require `sum_u c_u * contribution_u = rhs` in `m`, where
    /// `contributions` lists `(u, element)` pairs (repeats add up).
    pub fn require(&mut self, m: &Module, contributions: &[(usize, Elem)], rhs: Option<&Elem>) {
        let mut table: BTreeMap<(usize, Mono), Vec<(usize, Q)>> = BTreeMap::new();
        for (u, e) in contributions {
            for (pos, p) in m.normal_form(e).iter().enumerate() {
                for (mono, c) in p.terms() {
                    table.entry((pos, mono.clone())).or_default().push((*u, c.clone()));
                }
            }
        }
        let mut target: BTreeMap<(usize, Mono), Q> = BTreeMap::new();
        if let Some(r) = rhs {
            for (pos, p) in m.normal_form(r).iter().enumerate() {
                for (mono, c) in p.terms() {
                    target.insert((pos, mono.clone()), c.clone());
                    table.entry((pos, mono.clone())).or_default();
                }
            }
        }
        for (key, entries) in table {
            let mut row = vec![Q::zero(); self.nunk];
            for (u, c) in entries {
                row[u] += c;
            }
            self.rows.push(row);
            self.rhs.push(target.remove(&key).unwrap_or_else(Q::zero));
        }
    }

    /// Basis of the solutions of the homogeneous system.
    pub fn kernel(&self) -> Vec<Vec<Q>> {
        linalg::nullspace(&self.rows, self.nunk)
    }

    /// One solution of the inhomogeneous system.
    pub fn particular(&self) -> Option<Vec<Q>> {
        linalg::solve(&self.rows, self.nunk, &self.rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::module::DegreeWindow;
    use crate::algebra::ring::Universe;

    fn rings() -> (Ring, Ring) {
        let u = Universe::new(1, vec![vec![1]], vec![vec![1]]).unwrap();
        (Ring::polynomial(u.clone()), Ring::inverting(u, &[vec![1]]).unwrap())
    }

    #[test]
    fn laurent_truncation_is_free() {
        let (_, l) = rings();
        let m = Module::free(l, vec![0]);
        let (t, inc) = truncate_below(&m, -5).unwrap();
        assert_eq!(t.degrees(), &[-4]);
        assert!(inc.bijective_in(&DegreeWindow::new(-5, 10).unwrap()).unwrap());
    }

    #[test]
    fn pullback_of_inclusion_and_identity() {
        let (p, l) = rings();
        let a = Module::free(p.clone(), vec![0]);
        let b = Module::free(l.clone(), vec![0]);
        let f = ModMap::new(a.clone(), b.clone(), vec![vec![l.one()]], 0).unwrap();
        let g = ModMap::identity(&b);
        let (k, to_a, _) = truncated_pullback(&f, &g, -10).unwrap();
        let w = DegreeWindow::new(-10, 10).unwrap();
        assert!(to_a.bijective_in(&w).unwrap());
        assert_eq!(k.dims(&w), a.dims(&w));
    }

    #[test]
    fn joint_lift_through_two_localizations() {
        let u = Universe::new(2, crate::lattice::identity(2), vec![vec![0, 1], vec![1, 0]]).unwrap();
        let base = Ring::polynomial(u.clone());
        let rx = Ring::inverting(u.clone(), &[vec![1, 0]]).unwrap();
        let ry = Ring::inverting(u, &[vec![0, 1]]).unwrap();
        let src = Module::free(base.clone(), vec![0]);
        let fx = ModMap::new(src.clone(), Module::free(rx.clone(), vec![0]), vec![vec![rx.one()]], 0).unwrap();
        let fy = ModMap::new(src.clone(), Module::free(ry.clone(), vec![0]), vec![vec![ry.one()]], 0).unwrap();
        let jg = JointGraph::new(&src, &[&fx, &fy]).unwrap();
        assert!(jg.kernel_elements().is_empty());
        let x = base.var(0);
        assert_eq!(jg.lift(&[vec![x.clone()], vec![x.clone()]]), Some(vec![x]));
        let tx = rx.inverse_form(&[1, 0]).unwrap();
        assert_eq!(jg.lift(&[vec![tx], vec![ry.zero()]]), None);
    }
}
