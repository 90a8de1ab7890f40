//! Homogeneous maps between finitely presented modules: kernels, images,
//! cokernels, lifting and windowed Hom spaces.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_traits::Zero;

use crate::error::{Error, Result};

use super::gb::{Groebner, Order, Vector};
use super::linalg;
use super::module::{add_elem, is_zero_vec, neg_elem, DegreeWindow, Elem, Module};
use super::poly::{Poly, Q};
use super::ring::RingMap;

/// A map `source -> target` of the given degree. The target ring must be a
/// localization of the source ring; `images[j]` is the image of generator `j`.
#[derive(Clone)]
pub struct ModMap {
    source: Module,
    target: Module,
    images: Vec<Elem>,
    degree: i64,
    graph: Arc<OnceLock<Arc<Groebner>>>,
}

impl PartialEq for ModMap {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.target == other.target && self.images == other.images && self.degree == other.degree
    }
}

impl fmt::Debug for ModMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModMap(deg {}, images={:?})", self.degree, self.images)
    }
}

impl ModMap {
    pub fn new(source: Module, target: Module, images: Vec<Elem>, degree: i64) -> Result<Self> {
        if !target.ring().localizes(source.ring()) {
            return Err(Error::IncompatibleRings(format!(
                "map target ring {:?} is not a localization of source ring {:?}",
                target.ring(),
                source.ring()
            )));
        }
        if images.len() != source.ngens() || images.iter().any(|v| v.len() != target.ngens()) {
            return Err(Error::Schema("map matrix has the wrong shape".into()));
        }
        for (j, v) in images.iter().enumerate() {
            if let Some(d) = target.degree_of(v)? {
                if d != source.degrees()[j] + degree {
                    return Err(Error::Schema(format!(
                        "image of generator {j} has degree {d}, expected {}",
                        source.degrees()[j] + degree
                    )));
                }
            }
        }
        let m = Self { source, target, images, degree, graph: Arc::new(OnceLock::new()) };
        m.check_relations()?;
        Ok(m)
    }

    fn new_unchecked(source: Module, target: Module, images: Vec<Elem>, degree: i64) -> Self {
        Self { source, target, images, degree, graph: Arc::new(OnceLock::new()) }
    }

    fn check_relations(&self) -> Result<()> {
        for (k, r) in self.source.relations().iter().enumerate() {
            let img = self.apply_free(r);
            if !self.target.is_zero_elem(&img) {
                return Err(Error::Verification(format!("relation {k} of the source does not map to zero")));
            }
        }
        Ok(())
    }

    pub fn zero(source: &Module, target: &Module, degree: i64) -> Result<Self> {
        let images = vec![target.zero_elem(); source.ngens()];
        ModMap::new(source.clone(), target.clone(), images, degree)
    }

    pub fn identity(m: &Module) -> Self {
        let images = (0..m.ngens()).map(|i| m.basis_elem(i)).collect();
        Self::new_unchecked(m.clone(), m.clone(), images, 0)
    }

    /// The canonical map `M -> S^{-1} M` into a localization (same generators).
    pub fn localization(m: &Module, target: &Module) -> Result<Self> {
        if m.ngens() != target.ngens() {
            return Err(Error::Schema("localization map needs matching generators".into()));
        }
        let images = (0..m.ngens()).map(|i| target.basis_elem(i)).collect();
        ModMap::new(m.clone(), target.clone(), images, 0)
    }

    pub fn source(&self) -> &Module {
        &self.source
    }

    pub fn target(&self) -> &Module {
        &self.target
    }

    pub fn images(&self) -> &[Elem] {
        &self.images
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    /// Image of a free-module element (no reduction).
    pub fn apply_free(&self, v: &[Poly]) -> Elem {
        let mut out = self.target.zero_elem();
        for (c, img) in v.iter().zip(&self.images) {
            if c.is_zero() {
                continue;
            }
            for (o, p) in out.iter_mut().zip(img) {
                if !p.is_zero() {
                    *o = &*o + &(c * p);
                }
            }
        }
        out
    }

    /// Image reduced to normal form.
    pub fn apply(&self, v: &[Poly]) -> Elem {
        self.target.normal_form(&self.apply_free(v))
    }

    pub fn compose(&self, next: &ModMap) -> Result<ModMap> {
        if self.target.ngens() != next.source.ngens() || self.target.ring() != next.source.ring() {
            return Err(Error::IncompatibleRings("maps are not composable".into()));
        }
        let images = self.images.iter().map(|v| next.apply_free(v)).collect();
        Ok(Self::new_unchecked(self.source.clone(), next.target.clone(), images, self.degree + next.degree))
    }

    pub fn add(&self, other: &ModMap) -> Result<ModMap> {
        if self.degree != other.degree || self.images.len() != other.images.len() {
            return Err(Error::Schema("maps cannot be added".into()));
        }
        let images = self.images.iter().zip(&other.images).map(|(a, b)| add_elem(a, b)).collect();
        Ok(Self::new_unchecked(self.source.clone(), self.target.clone(), images, self.degree))
    }

    pub fn scale(&self, c: &Q) -> ModMap {
        let images = self.images.iter().map(|v| v.iter().map(|p| p.scale(c)).collect()).collect();
        Self::new_unchecked(self.source.clone(), self.target.clone(), images, self.degree)
    }

    pub fn neg(&self) -> ModMap {
        let images = self.images.iter().map(|v| neg_elem(v)).collect();
        Self::new_unchecked(self.source.clone(), self.target.clone(), images, self.degree)
    }

    /// Replace the source by a module with identical generators (for example
    /// a re-presented copy).
    pub fn with_source(&self, source: Module) -> Result<ModMap> {
        ModMap::new(source, self.target.clone(), self.images.clone(), self.degree)
    }

    pub fn with_target(&self, target: Module) -> Result<ModMap> {
        ModMap::new(self.source.clone(), target, self.images.clone(), self.degree)
    }

    /// Equality of maps: generator images agree in the target.
    pub fn equals(&self, other: &ModMap) -> bool {
        self.images.len() == other.images.len()
            && self.images.iter().zip(&other.images).all(|(a, b)| self.target.elem_eq(a, b))
    }

    pub fn is_zero(&self) -> bool {
        self.images.iter().all(|v| self.target.is_zero_elem(v))
    }

    fn graph_basis(&self) -> Arc<Groebner> {
        self.graph
            .get_or_init(|| {
                let nt = self.target.ngens();
                let ns = self.source.ngens();
                let nv = self.target.nvars();
                let mut block = vec![1u32; nt];
                block.extend(std::iter::repeat(0).take(ns));
                let nu = self.source.ring().nu();
                let elim: Vec<u32> = (0..nv)
                    .map(|v| if v < nu || self.source.ring().inverted().contains(&(v - nu)) { 0 } else { 1 })
                    .collect();
                let o = Order::new(block, elim);
                let mut gens = Vec::new();
                for (j, img) in self.images.iter().enumerate() {
                    let mut row = img.clone();
                    let mut e = vec![Poly::zero(nv); ns];
                    e[j] = Poly::one(nv);
                    row.extend(e);
                    gens.push(Vector::from_polys(&row, &o));
                }
                for r in self.target.all_relations() {
                    let mut row = r;
                    row.extend(std::iter::repeat(Poly::zero(nv)).take(ns));
                    gens.push(Vector::from_polys(&row, &o));
                }
                for r in self.source.all_relations() {
                    let mut row = vec![Poly::zero(nv); nt];
                    row.extend(r);
                    gens.push(Vector::from_polys(&row, &o));
                }
                Arc::new(Groebner::new(gens, o))
            })
            .clone()
    }

    /// Generators (over the source ring) of `{m : f(m) = 0}` in the source free module.
    pub fn kernel_elements(&self) -> Vec<Elem> {
        let gb = self.graph_basis();
        let nt = self.target.ngens();
        let ns = self.source.ngens();
        let nv = self.target.nvars();
        gb.elements()
            .iter()
            .filter(|v| {
                let l = v.lead().expect("nonzero");
                l.pos >= nt && l.elim_degree() == 0
            })
            .map(|v| v.to_polys(nt + ns, nv)[nt..].to_vec())
            .filter(|e| !self.source.is_zero_elem(e))
            .collect()
    }

    /// The kernel as a module with its inclusion into the source.
    pub fn kernel(&self) -> Result<(Module, ModMap)> {
        let gens = self.kernel_elements();
        submodule(&self.source, gens)
    }

    pub fn is_injective(&self) -> bool {
        self.kernel_elements().is_empty()
    }

    /// A preimage of `n`, when the map has the same ring on both sides.
    pub fn lift(&self, n: &[Poly]) -> Option<Elem> {
        let gb = self.graph_basis();
        let nt = self.target.ngens();
        let ns = self.source.ngens();
        let nv = self.target.nvars();
        let mut row = n.to_vec();
        row.extend(std::iter::repeat(Poly::zero(nv)).take(ns));
        let nf = gb.reduce(Vector::from_polys(&row, gb.order())).to_polys(nt + ns, nv);
        if !is_zero_vec(&nf[..nt]) {
            return None;
        }
        let m = neg_elem(&nf[nt..]);
        if !self.source.ring().localizes(self.target.ring()) && m.iter().any(|p| !self.source.ring().admits(p)) {
            return None;
        }
        Some(m)
    }

    pub fn is_surjective(&self) -> bool {
        (0..self.target.ngens()).all(|i| self.lift(&self.target.basis_elem(i)).is_some())
    }

    pub fn is_iso(&self) -> bool {
        self.source.ring() == self.target.ring() && self.is_injective() && self.is_surjective()
    }

    pub fn cokernel(&self) -> Result<(Module, ModMap)> {
        let mut rels = self.target.relations().to_vec();
        rels.extend(self.images.iter().cloned());
        let q = Module::new(self.target.ring().clone(), self.target.degrees().to_vec(), rels)?;
        let proj = ModMap::new(self.target.clone(), q.clone(), (0..q.ngens()).map(|i| q.basis_elem(i)).collect(), 0)?;
        Ok((q, proj))
    }

    /// The image as a submodule of the target, with its inclusion.
    pub fn image(&self) -> Result<(Module, ModMap)> {
        let gens: Vec<Elem> = self.images.iter().filter(|v| !self.target.is_zero_elem(v)).cloned().collect();
        submodule(&self.target, gens)
    }

    /// Windowed comparison data: ranks of the map on each degree of the window.
    pub fn rank_in_degree(&self, d: i64) -> Result<usize> {
        let (cols, t) = self.columns_in_degree(d)?;
        Ok(linalg::rank(&cols, t))
    }

    /// Images of the source basis in degree `d`, as coordinate columns in the
    /// target slice, together with the target dimension.
    pub fn columns_in_degree(&self, d: i64) -> Result<(Vec<Vec<Q>>, usize)> {
        let s = self.source.slice_or_overflow(d)?;
        let t = self.target.slice_or_overflow(d + self.degree)?;
        let cols: Vec<Vec<Q>> = s
            .basis
            .iter()
            .map(|(e, pos)| self.target.coords(&self.apply_free(&self.source.monomial_elem(e, *pos)), &t))
            .collect::<Result<_>>()?;
        Ok((cols, t.dim()))
    }

    /// Whether the map is bijective on every degree of the window.
    pub fn bijective_in(&self, w: &DegreeWindow) -> Result<bool> {
        for d in w.degrees() {
            let a = self.source.slice_or_overflow(d)?.dim();
            let b = self.target.slice_or_overflow(d + self.degree)?.dim();
            if a != b || self.rank_in_degree(d)? != a {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Outcome of checking that a map is an isomorphism in a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsoReport {
    pub bijective: bool,
    /// `(degree, source dim, target dim, rank)` where the slices are finite.
    pub table: Vec<(i64, usize, usize, usize)>,
    /// Set when some slice is infinite and the check was made on the whole
    /// module (kernel and cokernel vanish).
    pub module_level: bool,
}

impl ModMap {
    /// Extension of scalars of the map along a ring map.
    pub fn base_change(&self, f: &RingMap) -> Result<ModMap> {
        let s = self.source.base_change(f)?;
        let t = self.target.base_change(f)?;
        let images = self.images.iter().map(|v| v.iter().map(|p| f.apply(p)).collect()).collect();
        Ok(Self::new_unchecked(s, t, images, self.degree))
    }

    /// The composite `M -> R' (x) M -> N` of `1 (x) -` with `self`, where
    /// `self` is defined on the base change of `m` along `f`.
    pub fn apply_through(&self, f: &RingMap, v: &[Poly]) -> Elem {
        let w: Elem = v.iter().map(|p| f.apply(p)).collect();
        self.apply(&w)
    }

    /// Degreewise bijectivity in the window, or a module-level isomorphism
    /// check when some slice is infinite.
    pub fn certify_iso(&self, w: &DegreeWindow) -> Result<IsoReport> {
        let mut table = Vec::new();
        let mut finite = true;
        for d in w.degrees() {
            match (self.source.slice(d), self.target.slice(d + self.degree)) {
                (Some(a), Some(b)) => {
                    let r = self.rank_in_degree(d)?;
                    table.push((d, a.dim(), b.dim(), r));
                }
                _ => {
                    finite = false;
                    break;
                }
            }
        }
        if finite {
            let bijective = table.iter().all(|&(_, a, b, r)| a == b && r == a);
            return Ok(IsoReport { bijective, table, module_level: false });
        }
        if self.source.ring() != self.target.ring() {
            return Err(Error::WindowOverflow("isomorphism check across rings with infinite slices".into()));
        }
        Ok(IsoReport { bijective: self.is_iso(), table: Vec::new(), module_level: true })
    }
}

/// Presentation of the submodule of `m` generated by `gens`, with inclusion.
pub fn submodule(m: &Module, gens: Vec<Elem>) -> Result<(Module, ModMap)> {
    let ring = m.ring().clone();
    let nv = m.nvars();
    let mut degrees = Vec::with_capacity(gens.len());
    for g in &gens {
        degrees.push(m.degree_of(g)?.ok_or_else(|| Error::Verification("zero generator in submodule".into()))?);
    }
    let free = Module::free(ring.clone(), degrees.clone());
    let to_m = ModMap::new_unchecked(free, m.clone(), gens.clone(), 0);
    let syz = to_m.kernel_elements();
    let k = Module::new(ring, degrees, syz)?;
    let (small, _, kept) = k.minimize();
    let images = kept.iter().map(|&i| gens[i].clone()).collect();
    let inc = ModMap::new_unchecked(small.clone(), m.clone(), images, 0);
    let _ = nv;
    Ok((small, inc))
}

/// Basis of degree-`d` module maps `m -> n`.
pub fn hom_degree(m: &Module, n: &Module, d: i64) -> Result<Vec<ModMap>> {
    if !n.ring().localizes(m.ring()) {
        return Err(Error::IncompatibleRings("Hom target ring must localize the source ring".into()));
    }
    let slices: Vec<_> = m.degrees().iter().map(|&g| n.slice_or_overflow(g + d)).collect::<Result<_>>()?;
    let offsets: Vec<usize> = slices
        .iter()
        .scan(0, |acc, s| {
            let o = *acc;
            *acc += s.dim();
            Some(o)
        })
        .collect();
    let nunk: usize = slices.iter().map(|s| s.dim()).sum();
    let mut rows: Vec<Vec<Q>> = Vec::new();
    for r in m.relations() {
        let Some(rd) = m.degree_of(r)? else { continue };
        let target_slice = n.slice_or_overflow(rd + d)?;
        let mut cols: Vec<Vec<Q>> = vec![vec![Q::zero(); target_slice.dim()]; nunk];
        for (i, p) in r.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for (k, (e, pos)) in slices[i].basis.iter().enumerate() {
                let mut v = n.monomial_elem(e, *pos);
                for x in v.iter_mut() {
                    *x = &*x * p;
                }
                let c = n.coords(&v, &target_slice)?;
                for (a, b) in cols[offsets[i] + k].iter_mut().zip(c) {
                    *a += b;
                }
            }
        }
        for t in 0..target_slice.dim() {
            rows.push((0..nunk).map(|u| cols[u][t].clone()).collect());
        }
    }
    let sols = linalg::nullspace(&rows, nunk);
    let mut out = Vec::new();
    for s in sols {
        let images: Vec<Elem> = (0..m.ngens()).map(|i| n.from_coords(&s[offsets[i]..offsets[i] + slices[i].dim()], &slices[i])).collect();
        out.push(ModMap::new_unchecked(m.clone(), n.clone(), images, d));
    }
    Ok(out)
}

/// Hom spaces in every degree of the window.
pub fn hom_window(m: &Module, n: &Module, w: &DegreeWindow) -> Result<Vec<(i64, Vec<ModMap>)>> {
    w.degrees().map(|d| Ok((d, hom_degree(m, n, d)?))).collect()
}

/// Pullback of `f: a -> p` and `g: b -> p` as the kernel of `a + b -> p`
/// (all over one ring), with both projections.
pub fn pullback(f: &ModMap, g: &ModMap) -> Result<(Module, ModMap, ModMap)> {
    if f.target() != g.target() || f.degree() != 0 || g.degree() != 0 {
        return Err(Error::IncompatibleRings("pullback needs degree-zero maps with a common target".into()));
    }
    let a = f.source();
    let b = g.source();
    let sum = Module::direct_sum(&[a.clone(), b.clone()])?;
    let mut images: Vec<Elem> = f.images().to_vec();
    images.extend(g.images().iter().map(|v| neg_elem(v)));
    let diff = ModMap::new(sum.clone(), f.target().clone(), images, 0)?;
    let (k, inc) = diff.kernel()?;
    let na = a.ngens();
    let pa = inc.images().iter().map(|v| v[..na].to_vec()).collect();
    let pb = inc.images().iter().map(|v| v[na..].to_vec()).collect();
    Ok((k.clone(), ModMap::new(k.clone(), a.clone(), pa, 0)?, ModMap::new(k, b.clone(), pb, 0)?))
}
