//! Homological checks on complexes of diagram modules and the rank-one
//! Cousin resolution of spheres.
//!
//! The injective models of rank one are not finitely generated at the
//! trivial subgroup: `E_G^{-1} O` is `Q[c, 1/c]` and the torsion model is
//! `Q[c, 1/c] / Q[c]`. Both are replaced by the exact finite models
//! `c^{-N} Q[c]` and `c^{-N} Q[c] / Q[c]`, with `N` chosen so that they agree
//! with the true modules throughout the requested window; the resolution
//! stays exact in every degree.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::complex::{set_element, Complex};
use crate::algebra::{DegreeWindow, ModMap, Module, Poly};
use crate::diagram::{sphere, Cells, DiagramMap, DiagramModule, ExtendedModule};
use crate::error::{Error, Result};
use crate::family::{euler_value, Structure};
use crate::torus::{ClosedSubgroup, ConnectedSubgroup, QuotientPair, VirtualRepresentation};

/// A cochain complex of diagram modules with differentials of degree zero.
#[derive(Clone, Debug)]
pub struct DiagramComplex {
    pub terms: Vec<DiagramModule>,
    pub maps: Vec<DiagramMap>,
}

impl DiagramComplex {
    /// Requires composable maps with `d^2 = 0` at every vertex and cell.
    pub fn new(terms: Vec<DiagramModule>, maps: Vec<DiagramMap>) -> Result<Self> {
        if maps.len() + 1 != terms.len().max(1) {
            return Err(Error::Schema(format!("{} terms need {} maps", terms.len(), terms.len().saturating_sub(1))));
        }
        let c = Self { terms, maps };
        let s = c.structure();
        for v in s.vertices() {
            for a in s.cells(&v.lower) {
                c.at(&v, &a)?;
            }
        }
        for (i, pair) in c.maps.windows(2).enumerate() {
            for (v, cells) in &pair[0].maps {
                for (a, f) in cells {
                    if !f.compose(pair[1].at(v, a)?)?.is_zero() {
                        return Err(Error::Verification(format!("d^2 != 0 at position {i}, vertex {v}, cell {a}")));
                    }
                }
            }
        }
        Ok(c)
    }

    pub fn structure(&self) -> &Arc<Structure> {
        self.terms[0].structure()
    }

    /// The complex of modules at one vertex and cell.
    pub fn at(&self, v: &QuotientPair, a: &ClosedSubgroup) -> Result<Complex> {
        let terms = self.terms.iter().map(|t| t.value(v, a).cloned()).collect::<Result<Vec<_>>>()?;
        let maps = self.maps.iter().map(|f| f.at(v, a).cloned()).collect::<Result<Vec<_>>>()?;
        Complex::new(0, terms, maps)
    }

    /// `Sigma^V` applied termwise.
    pub fn suspend(&self, v: &VirtualRepresentation) -> Result<DiagramComplex> {
        let terms = self.terms.iter().map(|t| t.suspend(v)).collect::<Result<Vec<_>>>()?;
        let mut maps = Vec::with_capacity(self.maps.len());
        for (i, f) in self.maps.iter().enumerate() {
            let mut out = BTreeMap::new();
            for (p, cells) in &f.maps {
                let mut c = Cells::new();
                for (a, g) in cells {
                    c.insert(a.clone(), ModMap::new(terms[i].value(p, a)?.clone(), terms[i + 1].value(p, a)?.clone(), g.images().to_vec(), g.degree())?);
                }
                out.insert(p.clone(), c);
            }
            maps.push(DiagramMap::new(terms[i].clone(), terms[i + 1].clone(), f.degree, out)?);
        }
        DiagramComplex::new(terms, maps)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyRow {
    pub position: usize,
    pub vertex: QuotientPair,
    pub cell: ClosedSubgroup,
    pub degree: i64,
    pub dim: usize,
}

#[derive(Clone, Debug)]
pub struct ExactnessReport {
    pub rows: Vec<HomologyRow>,
}

impl ExactnessReport {
    pub fn exact(&self) -> bool {
        self.rows.iter().all(|r| r.dim == 0)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = &HomologyRow> {
        self.rows.iter().filter(|r| r.dim > 0)
    }
}

/// Degreewise homology at every position, vertex and cell. Localized
/// vertices with infinite slices overflow.
pub fn check_exactness(c: &DiagramComplex, w: &DegreeWindow) -> Result<ExactnessReport> {
    let s = c.structure();
    let mut rows = Vec::new();
    for v in s.vertices() {
        for a in s.cells(&v.lower) {
            let cx = c.at(&v, &a)?;
            for (p, d, dim) in cx.cohomology_table(w)? {
                rows.push(HomologyRow { position: p as usize, vertex: v.clone(), cell: a.clone(), degree: d, dim });
            }
        }
    }
    Ok(ExactnessReport { rows })
}

/// Depth of the finite models needed for `Sigma^V` to be exact in `w`.
pub fn model_depth(s: &Structure, v: &VirtualRepresentation, w: &DegreeWindow) -> u32 {
    let one = s.base();
    let top = s.cells(one).iter().map(|a| -2 * v.fixed_dim(a)).max().unwrap_or(0);
    ((top - w.lo).max(0) / 2 + 1) as u32
}

fn rank_one(s: &Structure) -> Result<(ConnectedSubgroup, ConnectedSubgroup)> {
    if s.rank() != 1 || s.base().dim() != 0 {
        return Err(Error::Unsupported(format!("rank-one Cousin resolutions need a circle, got rank {}", s.rank())));
    }
    Ok((s.base().clone(), s.top()))
}

fn euler_element(s: &Structure, n: u32) -> Result<Poly> {
    let (one, g) = rank_one(s)?;
    let ring = s.ring(&one, &one)?;
    Ok(set_element(&ring, &s.forms_nontrivial_on(&g, &one)?)?.pow(n))
}

/// `Sigma^V` of the vertex model: `phi^G = Q`, with `c^{-N} Q[c]` standing in
/// for `E_G^{-1} O` at the trivial subgroup.
pub fn vertex_model(s: &Arc<Structure>, v: &VirtualRepresentation, depth: u32) -> Result<DiagramModule> {
    let (one, g) = rank_one(s)?;
    let top = s.ring(&g, &g)?;
    let bottom = s.ring(&one, &one)?;
    let ring = s.ring(&g, &one)?;
    let forms = s.forms_nontrivial_on(&g, &one)?;
    let mut inv = ring.one();
    for f in &forms {
        inv = &inv * &ring.inverse_form(f)?.pow(depth);
    }
    let gcell = g.as_closed().clone();
    let phi_top: Cells<Module> = Cells::from([(gcell.clone(), Module::free(top, vec![-2 * v.fixed_dim(&gcell)]))]);
    let rm = s.vertical(&g, &g, &one)?;
    let mut phi_one = Cells::new();
    let mut basing = Cells::new();
    for a in s.cells(&one) {
        let m = Module::free(bottom.clone(), vec![-2 * v.fixed_dim(&a) - 2 * depth as i64]);
        let img = s.cell_image(&a, &g);
        let e = euler_value(v, &a).mul(&euler_value(v, &img).inverse()).inverse().in_ring(&ring)?;
        basing.insert(a.clone(), ModMap::new(m.clone(), phi_top[&img].base_change(&rm)?, vec![vec![&inv * &e]], 0)?);
        phi_one.insert(a, m);
    }
    let phi = BTreeMap::from([(g.clone(), phi_top), (one.clone(), phi_one)]);
    ExtendedModule::from_covers(s.clone(), phi, BTreeMap::from([((g, one), basing)]))?.to_diagram()
}

/// `Sigma^V` of the sum of torsion models over the given cells of the
/// trivial subgroup: `c^{-N} Q[c] / Q[c]` at each, zero elsewhere.
pub fn torsion_model(s: &Arc<Structure>, v: &VirtualRepresentation, cells: &[ClosedSubgroup], depth: u32) -> Result<DiagramModule> {
    let (one, g) = rank_one(s)?;
    let bottom = s.ring(&one, &one)?;
    let x = euler_element(s, depth)?;
    let rm = s.vertical(&g, &g, &one)?;
    let zero_top = Module::zero(s.ring(&g, &g)?);
    let mut phi_one = Cells::new();
    let mut basing = Cells::new();
    for a in s.cells(&one) {
        let m = if cells.contains(&a) {
            Module::new(bottom.clone(), vec![-2 * v.fixed_dim(&a) - 2 * depth as i64], vec![vec![x.clone()]])?
        } else {
            Module::zero(bottom.clone())
        };
        basing.insert(a.clone(), ModMap::zero(&m, &zero_top.base_change(&rm)?, 0)?);
        phi_one.insert(a, m);
    }
    let phi = BTreeMap::from([(g.clone(), Cells::from([(g.as_closed().clone(), zero_top.clone())])), (one.clone(), phi_one)]);
    ExtendedModule::from_covers(s.clone(), phi, BTreeMap::from([((g, one), basing)]))?.to_diagram()
}

/// Generator to generator scaled by `scale(vertex, cell)`, at every vertex
/// and cell.
fn generator_map(source: &DiagramModule, target: &DiagramModule, scale: impl Fn(&QuotientPair, &ClosedSubgroup) -> Result<Poly>) -> Result<DiagramMap> {
    let s = source.structure();
    let mut maps = BTreeMap::new();
    for p in s.vertices() {
        let mut cells = Cells::new();
        for a in s.cells(&p.lower) {
            let (m, n) = (source.value(&p, &a)?, target.value(&p, &a)?);
            let f = if m.is_zero() || n.is_zero() {
                ModMap::zero(m, n, 0)?
            } else {
                ModMap::new(m.clone(), n.clone(), vec![vec![scale(&p, &a)?]], 0)?
            };
            cells.insert(a, f);
        }
        maps.insert(p, cells);
    }
    DiagramMap::new(source.clone(), target.clone(), 0, maps)
}

/// `0 -> S^V -> Sigma^V (vertex model) -> Sigma^V (torsion models over every
/// cell of the trivial subgroup) -> 0`, the second map the quotient by `O`.
pub fn cousin_resolution_rank1(s: &Arc<Structure>, v: &VirtualRepresentation, w: &DegreeWindow) -> Result<DiagramComplex> {
    cousin_resolution_at_depth(s, v, model_depth(s, v, w))
}

/// The resolution with finite models of the given depth.
pub fn cousin_resolution_at_depth(s: &Arc<Structure>, v: &VirtualRepresentation, depth: u32) -> Result<DiagramComplex> {
    let (one, _) = rank_one(s)?;
    let sv = sphere(s, v)?;
    let vertex = vertex_model(s, v, depth)?;
    let torsion = torsion_model(s, v, &s.cells(&one), depth)?;
    let x = euler_element(s, depth)?;
    let d0 = generator_map(&sv, &vertex, |p, _| Ok(if p.lower == one && p.upper == one { x.clone() } else { s.ring_at(p)?.one() }))?;
    let d1 = generator_map(&vertex, &torsion, |p, _| s.ring_at(p).map(|r| r.one()))?;
    DiagramComplex::new(vec![sv, vertex, torsion], vec![d0, d1])
}

/// The resolution of `S^V` agrees termwise, maps included, with the
/// suspension by `V` of the resolution of `S^0` built at the same depth.
pub fn suspension_compatible(s: &Arc<Structure>, v: &VirtualRepresentation, w: &DegreeWindow) -> Result<bool> {
    let depth = model_depth(s, v, w);
    let direct = cousin_resolution_at_depth(s, v, depth)?;
    let susp = cousin_resolution_at_depth(s, &VirtualRepresentation::zero(), depth)?.suspend(v)?;
    if !direct.terms.iter().zip(&susp.terms).all(|(x, y)| same_diagram(x, y)) {
        return Ok(false);
    }
    for (f, g) in direct.maps.iter().zip(&susp.maps) {
        for (p, cells) in &f.maps {
            for (a, h) in cells {
                if !h.equals(g.at(p, a)?) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The model is `E_G`-torsion: it vanishes after inverting the tracked
/// Euler classes at the trivial subgroup.
pub fn is_torsion_model(m: &DiagramModule) -> Result<bool> {
    let s = m.structure();
    let (one, g) = rank_one(s)?;
    let ring = s.ring(&g, &one)?;
    for a in s.cells(&one) {
        if !m.value(&QuotientPair::diagonal(&one), &a)?.localize(&ring)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Same values and the same maps along every edge.
pub fn same_diagram(x: &DiagramModule, y: &DiagramModule) -> bool {
    x.values() == y.values()
        && [(x.beta_maps(), y.beta_maps()), (x.alpha_maps(), y.alpha_maps())].iter().all(|(p, q)| {
            p.len() == q.len()
                && p.iter().all(|(e, cells)| q.get(e).is_some_and(|other| cells.iter().all(|(a, f)| other.get(a).is_some_and(|g| f.equals(g)))))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{Character, TrackedPoset};

    fn circle() -> Arc<Structure> {
        Structure::new(TrackedPoset::generate(1, &[], &[Character(vec![1])]).unwrap()).unwrap()
    }

    fn semifree() -> Arc<Structure> {
        Structure::new(TrackedPoset::semifree_circle()).unwrap()
    }

    fn z() -> VirtualRepresentation {
        VirtualRepresentation::from_chars(&[&[1]])
    }

    #[test]
    fn identity_complex_is_exact() {
        let s = circle();
        let m = sphere(&s, &z()).unwrap();
        let id = generator_map(&m, &m, |p, _| s.ring_at(p).map(|r| r.one())).unwrap();
        let c = DiagramComplex::new(vec![m.clone(), m], vec![id]).unwrap();
        assert!(check_exactness(&c, &DegreeWindow::new(-6, 6).unwrap()).unwrap().exact());
    }

    #[test]
    fn cousin_resolution_of_the_unit_sphere() {
        let w = DegreeWindow::new(-12, 12).unwrap();
        for s in [circle(), semifree()] {
            let c = cousin_resolution_rank1(&s, &VirtualRepresentation::zero(), &w).unwrap();
            let (one, g) = (s.base().clone(), s.top());
            let vertex = &c.terms[1];
            let top = vertex.value(&QuotientPair::diagonal(&g), g.as_closed()).unwrap();
            assert_eq!(top.dims(&w), w.degrees().map(|d| Some(usize::from(d == 0))).collect::<Vec<_>>());
            // oracle: Q[c, 1/c] has one monomial in every even degree, and
            // its quotient by Q[c] lives in negative even degrees only
            for a in s.cells(&one) {
                let bottom = vertex.value(&QuotientPair::diagonal(&one), &a).unwrap();
                let torsion = c.terms[2].value(&QuotientPair::diagonal(&one), &a).unwrap();
                for d in w.degrees() {
                    assert_eq!(bottom.dim(d), Some(usize::from(d % 2 == 0)));
                    assert_eq!(torsion.dim(d), Some(usize::from(d % 2 == 0 && d < 0)));
                }
            }
            assert!(c.terms[2].values().iter().filter(|(p, _)| p.lower != one || p.upper != one).all(|(_, cs)| cs.values().all(Module::is_zero)));
            assert!(is_torsion_model(&c.terms[2]).unwrap());
            assert!(!is_torsion_model(&c.terms[1]).unwrap());
            assert!(c.terms[1].is_extended(&w).unwrap());
            assert!(check_exactness(&c, &w).unwrap().exact());
        }
    }

    #[test]
    fn resolutions_of_spheres_are_suspensions() {
        let s = circle();
        let w = DegreeWindow::new(-8, 8).unwrap();
        let base = cousin_resolution_rank1(&s, &VirtualRepresentation::zero(), &w).unwrap();
        for v in [z(), z().neg(), VirtualRepresentation::new(vec![Character(vec![1]), Character(vec![1])], vec![Character(vec![1])])] {
            assert!(suspension_compatible(&s, &v, &w).unwrap(), "{v:?}");
            assert!(check_exactness(&cousin_resolution_rank1(&s, &v, &w).unwrap(), &w).unwrap().exact());
            assert!(check_exactness(&base.suspend(&v).unwrap(), &w).unwrap().exact());
        }
        // a different depth changes the models, so the comparison is not vacuous
        let shallow = cousin_resolution_at_depth(&s, &VirtualRepresentation::zero(), 1).unwrap().suspend(&z()).unwrap();
        let direct = cousin_resolution_rank1(&s, &z(), &w).unwrap();
        assert!(!same_diagram(&shallow.terms[1], &direct.terms[1]));
    }

    #[test]
    fn broken_resolution_has_homology() {
        let s = semifree();
        let w = DegreeWindow::new(-8, 8).unwrap();
        let good = cousin_resolution_rank1(&s, &VirtualRepresentation::zero(), &w).unwrap();
        let one = s.base().clone();
        let depth = model_depth(&s, &VirtualRepresentation::zero(), &w);
        // the torsion model with its top class killed as well
        let a = one.as_closed().clone();
        let t = &good.terms[2];
        let m = t.value(&QuotientPair::diagonal(&one), &a).unwrap();
        let x = euler_element(&s, depth - 1).unwrap();
        let smaller = Module::new(m.ring().clone(), m.degrees().to_vec(), vec![vec![x]]).unwrap();
        let g = s.top();
        let zero_top = Module::zero(s.ring(&g, &g).unwrap());
        let rm = s.vertical(&g, &g, &one).unwrap();
        let phi = BTreeMap::from([
            (g.clone(), Cells::from([(g.as_closed().clone(), zero_top.clone())])),
            (one.clone(), Cells::from([(a.clone(), smaller.clone())])),
        ]);
        let basing = Cells::from([(a.clone(), ModMap::zero(&smaller, &zero_top.base_change(&rm).unwrap(), 0).unwrap())]);
        let broken_t = ExtendedModule::from_covers(s.clone(), phi, BTreeMap::from([((g, one.clone()), basing)])).unwrap().to_diagram().unwrap();
        let d1 = generator_map(&good.terms[1], &broken_t, |p, _| s.ring_at(p).map(|r| r.one())).unwrap();
        let broken = DiagramComplex::new(good.terms[..2].iter().cloned().chain([broken_t]).collect(), vec![good.maps[0].clone(), d1]).unwrap();
        let r = check_exactness(&broken, &w).unwrap();
        let bad: Vec<_> = r.nonzero().collect();
        assert_eq!(bad.len(), 1);
        assert_eq!((bad[0].position, bad[0].degree, bad[0].dim), (1, -2, 1));
    }

    #[test]
    fn higher_rank_is_rejected() {
        let circles: Vec<ConnectedSubgroup> = [[1, 0], [0, 1]].iter().map(|c| ConnectedSubgroup::circle(c)).collect();
        let s = Structure::new(TrackedPoset::generate(2, &circles, &[]).unwrap()).unwrap();
        assert!(matches!(cousin_resolution_rank1(&s, &VirtualRepresentation::zero(), &DegreeWindow::new(0, 2).unwrap()), Err(Error::Unsupported(_))));
    }
}
