//! Maps out of spheres into diagram modules: element systems, the direct
//! diagram Hom, evaluation at level one, footprints, detection and support,
//! and the element chase that covers a module by spheres.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::algebra::mixed::LinearConditions;
use crate::algebra::module::{neg_elem, scale_elem, Elem};
use crate::algebra::{hom_degree, linalg, submodule, DegreeWindow, ModMap, Module, Q};
use crate::diagram::{alpha_edges, beta_edges, Cells, DiagramMap, DiagramModule, Edge};
use crate::error::{Error, Result};
use crate::family::{euler_value, require_tracked_kernels};
use crate::torus::{Character, ClosedSubgroup, ConnectedSubgroup, QuotientPair, VirtualRepresentation};

fn diag(k: &ConnectedSubgroup) -> QuotientPair {
    QuotientPair::diagonal(k)
}

fn pair(k: &ConnectedSubgroup, l: &ConnectedSubgroup) -> QuotientPair {
    QuotientPair { upper: k.clone(), lower: l.clone() }
}

/// Elements `x_K` at every tracked `K` and cell, the images of the
/// fundamental classes under a map `S^V -> Y` of the given degree.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementSystem {
    pub representation: VirtualRepresentation,
    pub degree: i64,
    pub values: BTreeMap<ConnectedSubgroup, Cells<Elem>>,
}

impl ElementSystem {
    pub fn at(&self, k: &ConnectedSubgroup, b: &ClosedSubgroup) -> Option<&Elem> {
        self.values.get(k).and_then(|c| c.get(b))
    }
}

struct Unknowns {
    /// `(K, cell, basis element)` per unknown.
    entries: Vec<(ConnectedSubgroup, ClosedSubgroup, Elem)>,
}

impl Unknowns {
    fn at<'a>(&'a self, k: &'a ConnectedSubgroup, b: &'a ClosedSubgroup) -> impl Iterator<Item = (usize, &'a Elem)> + 'a {
        self.entries.iter().enumerate().filter(move |(_, (kk, bb, _))| kk == k && bb == b).map(|(i, (_, _, e))| (i, e))
    }
}

fn sphere_unknowns(y: &DiagramModule, v: &VirtualRepresentation, d: i64) -> Result<Unknowns> {
    let s = y.structure();
    let mut entries = Vec::new();
    for k in s.subgroups() {
        for b in s.cells(&k) {
            let m = y.value(&diag(&k), &b)?;
            let slice = m.slice_or_overflow(d - 2 * v.fixed_dim(&b))?;
            for (e, pos) in &slice.basis {
                entries.push((k.clone(), b.clone(), m.monomial_elem(e, *pos)));
            }
        }
    }
    Ok(Unknowns { entries })
}

/// `beta(x_L) = e(V^A - V^{image})^{-1} alpha(x_K)` in `Y(K, L)(A)`.
fn sphere_conditions(y: &DiagramModule, v: &VirtualRepresentation, unk: &Unknowns) -> Result<LinearConditions> {
    let s = y.structure();
    let mut lc = LinearConditions::new(unk.entries.len());
    for l in s.subgroups() {
        for k in s.above(&l) {
            if k == l {
                continue;
            }
            let (x, target) = (diag(&l), pair(&k, &l));
            let ring = s.ring(&k, &l)?;
            for a in s.cells(&l) {
                let b = s.cell_image(&a, &k);
                let f = euler_value(v, &a).mul(&euler_value(v, &b).inverse()).inverse().in_ring(&ring)?;
                let beta = y.beta(&x, &target, &a)?;
                let mut contributions = Vec::new();
                for (u, e) in unk.at(&l, &a) {
                    contributions.push((u, beta.apply_free(e)));
                }
                for (u, e) in unk.at(&k, &b) {
                    let img = y.alpha_apply(&diag(&k), &target, &a, e)?;
                    contributions.push((u, neg_elem(&scale_elem(&img, &f))));
                }
                lc.require(y.value(&target, &a)?, &contributions, None);
            }
        }
    }
    Ok(lc)
}

fn assemble(y: &DiagramModule, v: &VirtualRepresentation, d: i64, unk: &Unknowns, coeffs: &[Q]) -> Result<ElementSystem> {
    let s = y.structure();
    let mut values = BTreeMap::new();
    for k in s.subgroups() {
        let mut cells = Cells::new();
        for b in s.cells(&k) {
            let m = y.value(&diag(&k), &b)?;
            let mut x = m.zero_elem();
            for (u, e) in unk.at(&k, &b) {
                if !coeffs[u].is_zero() {
                    x = crate::algebra::module::add_elem(&x, &e.iter().map(|p| p.scale(&coeffs[u])).collect::<Vec<_>>());
                }
            }
            cells.insert(b, x);
        }
        values.insert(k, cells);
    }
    Ok(ElementSystem { representation: v.clone(), degree: d, values })
}

/// A basis of the degree-`d` maps `S^V -> Y`, as element systems.
pub fn element_systems(y: &DiagramModule, v: &VirtualRepresentation, d: i64) -> Result<Vec<ElementSystem>> {
    require_tracked_kernels(y.structure().tracked(), v)?;
    let unk = sphere_unknowns(y, v, d)?;
    let lc = sphere_conditions(y, v, &unk)?;
    lc.kernel().iter().map(|c| assemble(y, v, d, &unk, c)).collect()
}

/// Conditions an element system violates.
pub fn system_failures(y: &DiagramModule, sys: &ElementSystem) -> Result<Vec<String>> {
    let s = y.structure();
    let v = &sys.representation;
    let mut out = Vec::new();
    for l in s.subgroups() {
        for k in s.above(&l) {
            if k == l {
                continue;
            }
            let target = pair(&k, &l);
            let ring = s.ring(&k, &l)?;
            for a in s.cells(&l) {
                let b = s.cell_image(&a, &k);
                let (Some(xl), Some(xk)) = (sys.at(&l, &a), sys.at(&k, &b)) else {
                    out.push(format!("missing element at {l} or {k}"));
                    continue;
                };
                let f = euler_value(v, &a).mul(&euler_value(v, &b).inverse()).inverse().in_ring(&ring)?;
                let left = y.beta(&diag(&l), &target, &a)?.apply(xl);
                let right = scale_elem(&y.alpha_apply(&diag(&k), &target, &a, xk)?, &f);
                if !y.value(&target, &a)?.elem_eq(&left, &right) {
                    out.push(format!("condition at ({k}, {l}), cell {a}"));
                }
            }
        }
    }
    Ok(out)
}

/// Degree-`d` maps of diagram modules `X -> Y`: vertexwise Hom spaces cut
/// down by naturality for every horizontal and vertical map. Needs finite
/// slices at every vertex.
pub fn hom_diagram(x: &DiagramModule, y: &DiagramModule, d: i64) -> Result<Vec<DiagramMap>> {
    let s = x.structure().clone();
    let mut unknowns: Vec<(QuotientPair, ClosedSubgroup, ModMap)> = Vec::new();
    for v in s.vertices() {
        for a in s.cells(&v.lower) {
            for f in hom_degree(x.value(&v, &a)?, y.value(&v, &a)?, d)? {
                unknowns.push((v.clone(), a.clone(), f));
            }
        }
    }
    let at = |v: &QuotientPair, a: &ClosedSubgroup| -> Vec<(usize, &ModMap)> {
        unknowns.iter().enumerate().filter(|(_, (vv, aa, _))| vv == v && aa == a).map(|(i, (_, _, f))| (i, f)).collect()
    };
    let mut lc = LinearConditions::new(unknowns.len());
    for (p, q) in beta_edges(&s) {
        for a in s.cells(&p.lower) {
            let bx = x.beta(&p, &q, &a)?;
            let by = y.beta(&p, &q, &a)?;
            for i in 0..bx.source().ngens() {
                let e = bx.source().basis_elem(i);
                let mut contributions = Vec::new();
                for (u, f) in at(&p, &a) {
                    contributions.push((u, by.apply_free(&f.apply_free(&e))));
                }
                let be = bx.apply_free(&e);
                for (u, f) in at(&q, &a) {
                    contributions.push((u, neg_elem(&f.apply_free(&be))));
                }
                lc.require(y.value(&q, &a)?, &contributions, None);
            }
        }
    }
    for (p, q) in alpha_edges(&s) {
        for a in s.cells(&q.lower) {
            let ak = s.cell_image(&a, &p.lower);
            let src = x.value(&p, &ak)?;
            for i in 0..src.ngens() {
                let e = src.basis_elem(i);
                let mut contributions = Vec::new();
                for (u, f) in at(&p, &ak) {
                    contributions.push((u, y.alpha_apply(&p, &q, &a, &f.apply_free(&e))?));
                }
                let ae = x.alpha_apply(&p, &q, &a, &e)?;
                for (u, f) in at(&q, &a) {
                    contributions.push((u, neg_elem(&f.apply_free(&ae))));
                }
                lc.require(y.value(&q, &a)?, &contributions, None);
            }
        }
    }
    let mut out = Vec::new();
    for c in lc.kernel() {
        let mut maps: BTreeMap<QuotientPair, Cells<ModMap>> = BTreeMap::new();
        for v in s.vertices() {
            for a in s.cells(&v.lower) {
                let mut f = ModMap::zero(x.value(&v, &a)?, y.value(&v, &a)?, d)?;
                for (u, g) in at(&v, &a) {
                    if !c[u].is_zero() {
                        f = f.add(&g.scale(&c[u]))?;
                    }
                }
                maps.entry(v.clone()).or_default().insert(a, f);
            }
        }
        out.push(DiagramMap::new(x.clone(), y.clone(), d, maps)?);
    }
    Ok(out)
}

/// The two computations of `[S^V, Y]_d` side by side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SphereHomComparison {
    pub degree: i64,
    pub direct_dim: usize,
    pub systems_dim: usize,
    /// Restricting direct maps to fundamental classes is a bijection onto
    /// the element systems.
    pub bijection: bool,
}

pub fn compare_sphere_hom(v: &VirtualRepresentation, y: &DiagramModule, d: i64) -> Result<SphereHomComparison> {
    let sv = crate::diagram::sphere(y.structure(), v)?;
    let direct = hom_diagram(&sv, y, d)?;
    let unk = sphere_unknowns(y, v, d)?;
    let lc = sphere_conditions(y, v, &unk)?;
    let systems_dim = lc.kernel().len();
    let s = y.structure();
    let mut rows = Vec::new();
    let mut all_valid = true;
    for f in &direct {
        let mut coeffs = vec![Q::zero(); unk.entries.len()];
        for k in s.subgroups() {
            for b in s.cells(&k) {
                let m = y.value(&diag(&k), &b)?;
                let slice = m.slice_or_overflow(d - 2 * v.fixed_dim(&b))?;
                let img = f.at(&diag(&k), &b)?.images()[0].clone();
                let c = m.coords(&img, &slice)?;
                for ((u, _), x) in unk.at(&k, &b).zip(c) {
                    coeffs[u] = x;
                }
            }
        }
        let sys = assemble(y, v, d, &unk, &coeffs)?;
        all_valid &= system_failures(y, &sys)?.is_empty();
        rows.push(coeffs);
    }
    let rank = linalg::rank(&rows, unk.entries.len());
    Ok(SphereHomComparison {
        degree: d,
        direct_dim: direct.len(),
        systems_dim,
        bijection: all_valid && rank == direct.len() && rank == systems_dim,
    })
}

/// One degree of an evaluation: the image of `[S^{-W}, Y]_d` in a cell of
/// `Y(1)`, which sits in element degree `d + 2 dim W^A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationSlice {
    pub hom_degree: i64,
    pub cell: ClosedSubgroup,
    pub element_degree: i64,
    pub image_dim: usize,
    pub ambient_dim: usize,
}

/// `Y(W)`: the image of evaluation at the fundamental class, per cell of
/// the bottom vertex, with its presentation as a submodule.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub representation: VirtualRepresentation,
    pub slices: Vec<EvaluationSlice>,
    pub generators: Cells<Vec<Elem>>,
    pub image: Cells<(Module, ModMap)>,
}

pub fn evaluate(y: &DiagramModule, w: &VirtualRepresentation, window: &DegreeWindow) -> Result<Evaluation> {
    let s = y.structure();
    let base = s.base().clone();
    let v = w.neg();
    let mut slices = Vec::new();
    let mut generators: Cells<Vec<Elem>> = s.cells(&base).into_iter().map(|a| (a, Vec::new())).collect();
    for d in window.degrees() {
        let systems = element_systems(y, &v, d)?;
        for a in s.cells(&base) {
            let m = y.value(&diag(&base), &a)?;
            let ed = d + 2 * w.fixed_dim(&a);
            let slice = m.slice_or_overflow(ed)?;
            let mut rows = Vec::new();
            for sys in &systems {
                let x = sys.at(&base, &a).expect("bottom value").clone();
                rows.push(m.coords(&x, &slice)?);
            }
            let basis = linalg::row_basis(&rows, slice.dim());
            for r in &basis {
                generators.get_mut(&a).expect("cell").push(m.from_coords(r, &slice));
            }
            slices.push(EvaluationSlice { hom_degree: d, cell: a.clone(), element_degree: ed, image_dim: basis.len(), ambient_dim: slice.dim() });
        }
    }
    let mut image = Cells::new();
    for (a, gens) in &generators {
        let m = y.value(&diag(&base), a)?;
        let sub = if gens.is_empty() {
            let z = Module::zero(m.ring().clone());
            let inc = ModMap::zero(&z, m, 0)?;
            (z, inc)
        } else {
            submodule(m, gens.clone())?
        };
        image.insert(a.clone(), sub);
    }
    Ok(Evaluation { representation: w.clone(), slices, generators, image })
}

/// Coefficients of the horizontal images of an element of `Y(1)` on the
/// generators at each `K`, in normal form.
#[derive(Clone, Debug, PartialEq)]
pub struct Footprint {
    pub cell: ClosedSubgroup,
    pub per_subgroup: BTreeMap<ConnectedSubgroup, Elem>,
}

impl Footprint {
    /// Agreement up to a nonzero rational scalar at every subgroup.
    pub fn equivalent(&self, other: &Footprint) -> bool {
        if self.cell != other.cell || self.per_subgroup.len() != other.per_subgroup.len() {
            return false;
        }
        self.per_subgroup.iter().all(|(k, a)| {
            let Some(b) = other.per_subgroup.get(k) else { return false };
            proportional(a, b)
        })
    }
}

fn proportional(a: &[crate::algebra::Poly], b: &[crate::algebra::Poly]) -> bool {
    let lead = |v: &[crate::algebra::Poly]| v.iter().flat_map(|p| p.terms().next().map(|(m, c)| (m.clone(), c.clone()))).next();
    match (lead(a), lead(b)) {
        (None, None) => true,
        (Some((_, ca)), Some(_)) => {
            let idx = a.iter().position(|p| !p.is_zero()).expect("nonzero");
            let (m, _) = a[idx].terms().next().expect("term");
            let cb = b[idx].coeff(m);
            if cb.is_zero() {
                return false;
            }
            let r = ca / cb;
            a.iter().zip(b).all(|(p, q)| *p == q.scale(&r))
        }
        _ => false,
    }
}

pub fn footprint(y: &DiagramModule, a: &ClosedSubgroup, x: &Elem) -> Result<Footprint> {
    let s = y.structure();
    let base = s.base().clone();
    let mut per_subgroup = BTreeMap::new();
    for k in s.above(&base) {
        if k == base {
            continue;
        }
        let target = pair(&k, &base);
        let img = y.beta(&diag(&base), &target, a)?.apply(x);
        per_subgroup.insert(k, img);
    }
    Ok(Footprint { cell: a.clone(), per_subgroup })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetectionReport {
    pub dimension: usize,
    /// `(vertex, cell, vanishes)` for the vertices above the dimension.
    pub vanishing: Vec<(QuotientPair, ClosedSubgroup, bool)>,
    /// `(edge, cell, injective)` for maps into the tracked subgroups of the
    /// dimension.
    pub monomorphisms: Vec<(Edge, ClosedSubgroup, bool)>,
    pub detected: bool,
}

/// `M(H) = 0` for tracked `H` of dimension `> d`, and `M(L) -> M(K)` injective
/// for tracked `L < K` with `dim K = d`.
pub fn detection(y: &DiagramModule, d: usize) -> Result<DetectionReport> {
    let s = y.structure();
    let base = s.base().clone();
    let mut vanishing = Vec::new();
    let mut monomorphisms = Vec::new();
    for h in s.above(&base) {
        if h.dim() > d {
            for a in s.cells(&base) {
                let p = pair(&h, &base);
                vanishing.push((p.clone(), a.clone(), y.value(&p, &a)?.is_zero()));
            }
        }
    }
    for k in s.above(&base) {
        if k.dim() != d {
            continue;
        }
        for l in s.above(&base) {
            if l == k || !k.contains(&l) {
                continue;
            }
            let e = (pair(&l, &base), pair(&k, &base));
            for a in s.cells(&base) {
                let inj = y.beta(&e.0, &e.1, &a)?.is_injective();
                monomorphisms.push((e.clone(), a, inj));
            }
        }
    }
    let detected = vanishing.iter().all(|x| x.2) && monomorphisms.iter().all(|x| x.2);
    Ok(DetectionReport { dimension: d, vanishing, monomorphisms, detected })
}

/// Tracked `K` with `M(K) != 0` at some cell.
pub fn support(y: &DiagramModule) -> Result<BTreeSet<ConnectedSubgroup>> {
    let s = y.structure();
    let base = s.base().clone();
    let mut out = BTreeSet::new();
    for k in s.above(&base) {
        for a in s.cells(&base) {
            if !y.value(&pair(&k, &base), &a)?.is_zero() {
                out.insert(k.clone());
                break;
            }
        }
    }
    Ok(out)
}

/// A sphere map hitting `e(U) (x) x`: the representation `U` with `U^H = 0`,
/// the sphere `S^{-U}`, and the element system with `x_H = x`.
#[derive(Clone, Debug)]
pub struct Cover {
    pub u: VirtualRepresentation,
    pub sphere: VirtualRepresentation,
    pub system: ElementSystem,
    pub attempts: usize,
}

fn multisets(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, size, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, size, 0, &mut Vec::new(), &mut out);
    out
}

/// Search representations `U` built from at most `bound` tracked characters
/// nontrivial on `h`, smallest first, for a map `S^{-U} -> Y` whose value at
/// `(h, b)` is `x`.
pub fn cover_by_spheres(y: &DiagramModule, h: &ConnectedSubgroup, b: &ClosedSubgroup, x: &Elem, bound: usize) -> Result<Cover> {
    let s = y.structure();
    let report = detection(y, h.dim())?;
    if !report.detected {
        return Err(Error::Verification(format!("module is not detected in dimension {}", h.dim())));
    }
    let m = y.value(&diag(h), b)?;
    let Some(deg) = m.degree_of(x)? else {
        return Err(Error::Schema("cannot cover the zero element".into()));
    };
    let chars: Vec<Character> = s.tracked().forms().into_iter().map(Character).filter(|c| !c.is_trivial_on(h.as_closed())).collect();
    let mut attempts = 0;
    for size in 0..=bound {
        for ms in multisets(chars.len(), size) {
            attempts += 1;
            let u = VirtualRepresentation::new(ms.iter().map(|&i| chars[i].clone()).collect(), vec![]);
            let v = u.neg();
            let unk = sphere_unknowns(y, &v, deg)?;
            let mut lc = sphere_conditions(y, &v, &unk)?;
            let contributions: Vec<(usize, Elem)> = unk.at(h, b).map(|(u, e)| (u, e.clone())).collect();
            lc.require(m, &contributions, Some(x));
            if let Some(c) = lc.particular() {
                let system = assemble(y, &v, deg, &unk, &c)?;
                return Ok(Cover { u, sphere: v, system, attempts });
            }
        }
    }
    Err(Error::BoundExhausted(format!("no sphere map within {bound} characters hits the element")))
}
