//! Modules over the structure diagram: a module for every quotient pair and
//! cell, horizontal maps `beta` (localizations) and vertical maps `alpha`
//! (inflations, stored adjointly as maps out of the base change).

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::module::Elem;
use crate::algebra::{DegreeWindow, IsoReport, ModMap, Module, Poly, RingMap};
use crate::error::{Error, Result};
use crate::family::{euler_value, require_tracked_kernels, Structure};
use crate::torus::{ClosedSubgroup, ConnectedSubgroup, QuotientPair, VirtualRepresentation};

pub type Cells<T> = BTreeMap<ClosedSubgroup, T>;
pub type Edge = (QuotientPair, QuotientPair);

fn pair(k: &ConnectedSubgroup, l: &ConnectedSubgroup) -> QuotientPair {
    QuotientPair { upper: k.clone(), lower: l.clone() }
}

fn cell<'a, T>(c: &'a Cells<T>, a: &ClosedSubgroup, what: &str) -> Result<&'a T> {
    c.get(a).ok_or_else(|| Error::Schema(format!("{what}: no value at cell {a}")))
}

/// Images of `f` pushed along a ring map.
pub(crate) fn transport(f: &ModMap, rm: &RingMap) -> Vec<Elem> {
    f.images().iter().map(|v| v.iter().map(|p| rm.apply(p)).collect()).collect()
}

/// `sum_j y_j * images[j]`.
pub(crate) fn combine(y: &[Poly], images: &[Elem], nvars: usize, len: usize) -> Elem {
    let mut out = vec![Poly::zero(nvars); len];
    for (c, img) in y.iter().zip(images) {
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

/// Horizontal edges `(K, L) -> (H, L)` with `K < H`.
pub fn beta_edges(s: &Structure) -> Vec<Edge> {
    let mut out = Vec::new();
    for l in s.subgroups() {
        let ks = s.above(&l);
        for k in &ks {
            for h in &ks {
                if h != k && h.contains(k) {
                    out.push((pair(k, &l), pair(h, &l)));
                }
            }
        }
    }
    out
}

/// Vertical edges `(H, K) -> (H, L)` with `L < K`.
pub fn alpha_edges(s: &Structure) -> Vec<Edge> {
    let mut out = Vec::new();
    let subs = s.subgroups();
    for h in &subs {
        for k in &subs {
            for l in &subs {
                if k != l && h.contains(k) && k.contains(l) {
                    out.push((pair(h, k), pair(h, l)));
                }
            }
        }
    }
    out
}

/// Covering relation among the tracked subgroups of the structure.
fn covers(s: &Structure, a: &ConnectedSubgroup, b: &ConnectedSubgroup) -> bool {
    a != b && b.contains(a) && !s.subgroups().iter().any(|m| m != a && m != b && m.contains(a) && b.contains(m))
}

#[derive(Clone, Debug)]
pub struct DiagramModule {
    structure: Arc<Structure>,
    values: BTreeMap<QuotientPair, Cells<Module>>,
    beta: BTreeMap<Edge, Cells<ModMap>>,
    alpha: BTreeMap<Edge, Cells<ModMap>>,
}

impl DiagramModule {
    /// Assemble a diagram module from its values and the maps on (at least)
    /// the covering edges; the remaining edges are filled in by composition.
    /// Shapes are validated.
    pub fn new(
        structure: Arc<Structure>,
        values: BTreeMap<QuotientPair, Cells<Module>>,
        beta: BTreeMap<Edge, Cells<ModMap>>,
        alpha: BTreeMap<Edge, Cells<ModMap>>,
    ) -> Result<Self> {
        let s = &*structure;
        for v in s.vertices() {
            let vals = values.get(&v).ok_or_else(|| Error::Schema(format!("no module at vertex {v}")))?;
            let ring = s.ring_at(&v)?;
            for a in s.cells(&v.lower) {
                let m = cell(vals, &a, &format!("vertex {v}"))?;
                if *m.ring() != ring {
                    return Err(Error::IncompatibleRings(format!("module at {v}, cell {a} is not over its ring")));
                }
            }
        }
        let mut dm = Self { structure, values, beta: BTreeMap::new(), alpha: BTreeMap::new() };
        let mut beta = beta;
        let mut alpha = alpha;
        for (x, y) in beta_edges(&dm.structure) {
            if beta.contains_key(&(x.clone(), y.clone())) {
                continue;
            }
            if covers(&dm.structure, &x.upper, &y.upper) {
                return Err(Error::Schema(format!("missing horizontal map {x} -> {y}")));
            }
        }
        for (x, y) in alpha_edges(&dm.structure) {
            if !alpha.contains_key(&(x.clone(), y.clone())) && covers(&dm.structure, &y.lower, &x.lower) {
                return Err(Error::Schema(format!("missing vertical map {x} -> {y}")));
            }
        }
        // fill by composition along chains of covers, shortest first
        let mut bes = beta_edges(&dm.structure);
        bes.sort_by_key(|(x, y)| y.upper.dim() as i64 - x.upper.dim() as i64);
        for (x, y) in bes {
            if beta.contains_key(&(x.clone(), y.clone())) {
                continue;
            }
            let mid = dm.structure.subgroups().into_iter().find(|m| covers(&dm.structure, &x.upper, m) && y.upper.contains(m)).expect("chain");
            let xm = pair(&mid, &x.lower);
            let first = beta[&(x.clone(), xm.clone())].clone();
            let second = beta[&(xm, y.clone())].clone();
            let mut out = Cells::new();
            for (a, f) in &first {
                out.insert(a.clone(), f.compose(cell(&second, a, "horizontal map")?)?);
            }
            beta.insert((x, y), out);
        }
        let mut aes = alpha_edges(&dm.structure);
        aes.sort_by_key(|(x, y)| x.lower.dim() as i64 - y.lower.dim() as i64);
        for (x, y) in aes {
            if alpha.contains_key(&(x.clone(), y.clone())) {
                continue;
            }
            let (h, k, l) = (&x.upper, &x.lower, &y.lower);
            let mid = dm.structure.subgroups().into_iter().find(|m| covers(&dm.structure, l, m) && k.contains(m)).expect("chain");
            let upper = &alpha[&(x.clone(), pair(h, &mid))];
            let lower = &alpha[&(pair(h, &mid), y.clone())];
            let rm = dm.structure.vertical(h, &mid, l)?;
            let direct = dm.structure.vertical(h, k, l)?;
            let mut out = Cells::new();
            for a in dm.structure.cells(l) {
                let am = dm.structure.cell_image(&a, &mid);
                let up = cell(upper, &am, "vertical map")?.base_change(&rm)?;
                let f = up.compose(cell(lower, &a, "vertical map")?)?;
                let src = dm.value(&x, &dm.structure.cell_image(&a, k))?.base_change(&direct)?;
                out.insert(a, f.with_source(src)?);
            }
            alpha.insert((x, y), out);
        }
        dm.beta = beta;
        dm.alpha = alpha;
        dm.check_shapes()?;
        Ok(dm)
    }

    fn check_shapes(&self) -> Result<()> {
        let s = &*self.structure;
        for (x, y) in beta_edges(s) {
            let maps = &self.beta[&(x.clone(), y.clone())];
            for a in s.cells(&x.lower) {
                let f = cell(maps, &a, &format!("horizontal map {x} -> {y}"))?;
                if f.source() != self.value(&x, &a)? || f.target() != self.value(&y, &a)? || f.degree() != 0 {
                    return Err(Error::Schema(format!("horizontal map {x} -> {y} at cell {a} has the wrong shape")));
                }
            }
        }
        for (x, y) in alpha_edges(s) {
            let maps = &self.alpha[&(x.clone(), y.clone())];
            let rm = s.vertical(&x.upper, &x.lower, &y.lower)?;
            for a in s.cells(&y.lower) {
                let f = cell(maps, &a, &format!("vertical map {x} -> {y}"))?;
                let src = self.value(&x, &s.cell_image(&a, &x.lower))?.base_change(&rm)?;
                if *f.source() != src || f.target() != self.value(&y, &a)? || f.degree() != 0 {
                    return Err(Error::Schema(format!("vertical map {x} -> {y} at cell {a} has the wrong shape")));
                }
            }
        }
        Ok(())
    }

    pub fn structure(&self) -> &Arc<Structure> {
        &self.structure
    }

    pub fn values(&self) -> &BTreeMap<QuotientPair, Cells<Module>> {
        &self.values
    }

    pub fn value(&self, v: &QuotientPair, a: &ClosedSubgroup) -> Result<&Module> {
        let vals = self.values.get(v).ok_or_else(|| Error::Schema(format!("no module at vertex {v}")))?;
        cell(vals, a, &format!("vertex {v}"))
    }

    /// Horizontal map `M(K, L) -> M(H, L)` at a cell over `G/L`.
    pub fn beta(&self, x: &QuotientPair, y: &QuotientPair, a: &ClosedSubgroup) -> Result<&ModMap> {
        let maps = self.beta.get(&(x.clone(), y.clone())).ok_or_else(|| Error::Schema(format!("no horizontal map {x} -> {y}")))?;
        cell(maps, a, "horizontal map")
    }

    /// Vertical map, as `R(H, L) (x) M(H, K)(image of a) -> M(H, L)(a)`.
    pub fn alpha(&self, x: &QuotientPair, y: &QuotientPair, a: &ClosedSubgroup) -> Result<&ModMap> {
        let maps = self.alpha.get(&(x.clone(), y.clone())).ok_or_else(|| Error::Schema(format!("no vertical map {x} -> {y}")))?;
        cell(maps, a, "vertical map")
    }

    /// The vertical map applied to an element of `M(H, K)(image of a)`.
    pub fn alpha_apply(&self, x: &QuotientPair, y: &QuotientPair, a: &ClosedSubgroup, v: &[Poly]) -> Result<Elem> {
        let rm = self.structure.vertical(&x.upper, &x.lower, &y.lower)?;
        Ok(self.alpha(x, y, a)?.apply_through(&rm, v))
    }

    pub fn beta_maps(&self) -> &BTreeMap<Edge, Cells<ModMap>> {
        &self.beta
    }

    pub fn alpha_maps(&self) -> &BTreeMap<Edge, Cells<ModMap>> {
        &self.alpha
    }

    /// Failures of the functoriality identities: composites of horizontal
    /// maps, composites of vertical maps, and the commuting squares.
    pub fn functoriality_failures(&self) -> Result<Vec<String>> {
        let s = &*self.structure;
        let subs = s.subgroups();
        let mut out = Vec::new();
        for l in &subs {
            for k in s.above(l) {
                for m in s.above(&k) {
                    for h in s.above(&m) {
                        if k == m || m == h {
                            continue;
                        }
                        let (x, y, z) = (pair(&k, l), pair(&m, l), pair(&h, l));
                        for a in s.cells(l) {
                            let f = self.beta(&x, &y, &a)?.compose(self.beta(&y, &z, &a)?)?;
                            if !f.equals(self.beta(&x, &z, &a)?) {
                                out.push(format!("horizontal composite {x} -> {y} -> {z} at {a}"));
                            }
                        }
                    }
                }
            }
        }
        for h in &subs {
            for k in &subs {
                for m in &subs {
                    for l in &subs {
                        if !(h.contains(k) && k.contains(m) && m.contains(l)) || k == m || m == l {
                            continue;
                        }
                        let (x, y, z) = (pair(h, k), pair(h, m), pair(h, l));
                        for a in s.cells(l) {
                            let am = s.cell_image(&a, m);
                            let src = self.value(&x, &s.cell_image(&a, k))?;
                            for i in 0..src.ngens() {
                                let e = src.basis_elem(i);
                                let two = self.alpha_apply(&y, &z, &a, &self.alpha_apply(&x, &y, &am, &e)?)?;
                                let one = self.alpha_apply(&x, &z, &a, &e)?;
                                if !self.value(&z, &a)?.elem_eq(&one, &two) {
                                    out.push(format!("vertical composite {x} -> {y} -> {z} at {a}"));
                                    break;
                                }
                            }
                        }
                    }
                }
            }
        }
        // squares: (H,K) -> (H',K) horizontally, then down to L
        for (x, y) in beta_edges(s) {
            let (h, hp, k) = (&x.upper, &y.upper, &x.lower);
            for l in &subs {
                if l == k || !k.contains(l) {
                    continue;
                }
                let (xl, yl) = (pair(h, l), pair(hp, l));
                let rm = s.vertical(hp, k, l)?;
                for a in s.cells(l) {
                    let ak = s.cell_image(&a, k);
                    let src = self.value(&x, &ak)?;
                    for i in 0..src.ngens() {
                        let e = src.basis_elem(i);
                        let left = self.beta(&xl, &yl, &a)?.apply(&self.alpha_apply(&x, &xl, &a, &e)?);
                        let b = self.beta(&x, &y, &ak)?.apply(&e);
                        let right = self.alpha(&y, &yl, &a)?.apply_through(&rm, &b);
                        if !self.value(&yl, &a)?.elem_eq(&left, &right) {
                            out.push(format!("square {x} -> {y} over {l} at {a}"));
                            break;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Certificates that every horizontal map becomes an isomorphism after
    /// localization, i.e. `M(H, L) = E_{H/K}^{-1} M(K, L)`.
    pub fn quasicoherence(&self, w: &DegreeWindow) -> Result<Vec<(Edge, ClosedSubgroup, IsoReport)>> {
        let s = &*self.structure;
        let mut out = Vec::new();
        for (x, y) in beta_edges(s) {
            let ring = s.ring_at(&y)?;
            for a in s.cells(&x.lower) {
                let f = self.beta(&x, &y, &a)?;
                let loc = f.source().localize(&ring)?;
                let g = ModMap::new(loc, f.target().clone(), f.images().to_vec(), 0)?;
                out.push(((x.clone(), y.clone()), a, g.certify_iso(w)?));
            }
        }
        Ok(out)
    }

    pub fn is_quasicoherent(&self, w: &DegreeWindow) -> Result<bool> {
        Ok(self.quasicoherence(w)?.iter().all(|(_, _, r)| r.bijective))
    }

    /// Certificates that every vertical map is an isomorphism after base
    /// change.
    pub fn extendedness(&self, w: &DegreeWindow) -> Result<Vec<(Edge, ClosedSubgroup, IsoReport)>> {
        let s = &*self.structure;
        let mut out = Vec::new();
        for (x, y) in alpha_edges(s) {
            for a in s.cells(&y.lower) {
                out.push(((x.clone(), y.clone()), a.clone(), self.alpha(&x, &y, &a)?.certify_iso(w)?));
            }
        }
        Ok(out)
    }

    pub fn is_extended(&self, w: &DegreeWindow) -> Result<bool> {
        Ok(self.extendedness(w)?.iter().all(|(_, _, r)| r.bijective))
    }

    /// `Sigma^V M = S^V (x) M`.
    pub fn suspend(&self, v: &VirtualRepresentation) -> Result<DiagramModule> {
        let s = self.structure.clone();
        require_tracked_kernels(s.tracked(), v)?;
        let shift = |k: &ConnectedSubgroup, a: &ClosedSubgroup| -2 * v.fixed_dim(&s.cell_image(a, k));
        let mut values = BTreeMap::new();
        for (p, cells) in &self.values {
            let c: Cells<Module> = cells.iter().map(|(a, m)| (a.clone(), m.shift(shift(&p.upper, a)))).collect();
            values.insert(p.clone(), c);
        }
        let mut beta = BTreeMap::new();
        for ((x, y), cells) in &self.beta {
            let ring = s.ring_at(y)?;
            let mut out = Cells::new();
            for (a, f) in cells {
                let e = euler_value(v, &s.cell_image(a, &y.upper)).mul(&euler_value(v, &s.cell_image(a, &x.upper)).inverse());
                let c = e.in_ring(&ring)?;
                let images = f.images().iter().map(|img| img.iter().map(|p| p * &c).collect()).collect();
                let src = values[x][a].clone();
                let tgt: Module = values[y][a].clone();
                out.insert(a.clone(), ModMap::new(src, tgt, images, 0)?);
            }
            beta.insert((x.clone(), y.clone()), out);
        }
        let mut alpha = BTreeMap::new();
        for ((x, y), cells) in &self.alpha {
            let rm = s.vertical(&x.upper, &x.lower, &y.lower)?;
            let mut out = Cells::new();
            for (a, f) in cells {
                let src = values[x][&s.cell_image(a, &x.lower)].base_change(&rm)?;
                out.insert(a.clone(), ModMap::new(src, values[y][a].clone(), f.images().to_vec(), 0)?);
            }
            alpha.insert((x.clone(), y.clone()), out);
        }
        Ok(Self { structure: s, values, beta, alpha })
    }

    /// The Euler class map `M -> Sigma^U M` of an actual representation `U`:
    /// multiplication by `e(U^B)` on the part over the cell `B` of `phi^K`.
    pub fn euler_map(&self, u: &VirtualRepresentation) -> Result<DiagramMap> {
        if !u.negative.is_empty() {
            return Err(Error::Schema("Euler class maps need an actual representation".into()));
        }
        let target = self.suspend(u)?;
        let s = &self.structure;
        let mut maps = BTreeMap::new();
        for v in s.vertices() {
            let ring = s.ring_at(&v)?;
            let mut cells = Cells::new();
            for a in s.cells(&v.lower) {
                let e = euler_value(u, &s.cell_image(&a, &v.upper)).in_ring(&ring)?;
                let src = self.value(&v, &a)?;
                let tgt = target.value(&v, &a)?;
                let images = (0..src.ngens()).map(|i| tgt.basis_elem(i).iter().map(|p| p * &e).collect()).collect();
                cells.insert(a, ModMap::new(src.clone(), tgt.clone(), images, 0)?);
            }
            maps.insert(v, cells);
        }
        DiagramMap::new(self.clone(), target, 0, maps)
    }

    /// The zero module over the structure.
    pub fn zero(structure: Arc<Structure>) -> Result<Self> {
        let mut phi = BTreeMap::new();
        for k in structure.subgroups() {
            let r = structure.ring(&k, &k)?;
            phi.insert(k.clone(), structure.cells(&k).into_iter().map(|a| (a, Module::zero(r.clone()))).collect());
        }
        ExtendedModule::from_covers(structure, phi, BTreeMap::new())?.to_diagram()
    }
}

/// Data of an extended module: the fixed-point modules `phi^K` over
/// `R(K, K)` and basing maps `phi^L -> R(K, L) (x) phi^K` for `L < K`.
#[derive(Clone, Debug)]
pub struct ExtendedModule {
    structure: Arc<Structure>,
    phi: BTreeMap<ConnectedSubgroup, Cells<Module>>,
    basing: BTreeMap<(ConnectedSubgroup, ConnectedSubgroup), Cells<ModMap>>,
}

impl ExtendedModule {
    /// Build from basing maps on (at least) the covering pairs; the others are
    /// composites. With a single tracked subgroup no maps are needed.
    pub fn from_covers(
        structure: Arc<Structure>,
        phi: BTreeMap<ConnectedSubgroup, Cells<Module>>,
        basing: BTreeMap<(ConnectedSubgroup, ConnectedSubgroup), Cells<ModMap>>,
    ) -> Result<Self> {
        let s = structure.clone();
        for k in s.subgroups() {
            let cells = phi.get(&k).ok_or_else(|| Error::Schema(format!("no fixed-point module for {k}")))?;
            let r = s.ring(&k, &k)?;
            for a in s.cells(&k) {
                if *cell(cells, &a, &format!("fixed points at {k}"))?.ring() != r {
                    return Err(Error::IncompatibleRings(format!("fixed-point module at {k} is not over its ring")));
                }
            }
        }
        let mut em = Self { structure, phi, basing: BTreeMap::new() };
        let mut basing = basing;
        let mut pairs = Vec::new();
        for l in s.subgroups() {
            for k in s.above(&l) {
                if k != l {
                    pairs.push((k, l.clone()));
                }
            }
        }
        pairs.sort_by_key(|(k, l)| k.dim() as i64 - l.dim() as i64);
        for (k, l) in pairs {
            if basing.contains_key(&(k.clone(), l.clone())) {
                continue;
            }
            if covers(&s, &l, &k) {
                if em.phi_all_zero(&l) || em.phi_all_zero(&k) {
                    basing.insert((k.clone(), l.clone()), em.zero_basing(&k, &l)?);
                    continue;
                }
                return Err(Error::Schema(format!("missing basing map for ({k}, {l})")));
            }
            let mid = s.subgroups().into_iter().find(|m| covers(&s, &l, m) && k.contains(m)).expect("chain");
            let composite = em.compose_basing(&basing[&(mid.clone(), l.clone())], &basing[&(k.clone(), mid.clone())], &k, &mid, &l)?;
            basing.insert((k, l), composite);
        }
        em.basing = basing;
        em.check_basing_shapes()?;
        Ok(em)
    }

    /// Recover `phi^K` and the basing maps of an extended diagram: each basing
    /// is `beta` followed by the inverse of the vertical isomorphism.
    pub fn from_diagram(y: &DiagramModule) -> Result<Self> {
        let s = y.structure().clone();
        let mut phi = BTreeMap::new();
        for k in s.subgroups() {
            let cells: Cells<Module> = s.cells(&k).into_iter().map(|a| Ok((a.clone(), y.value(&pair(&k, &k), &a)?.clone()))).collect::<Result<_>>()?;
            phi.insert(k, cells);
        }
        let mut basing = BTreeMap::new();
        for l in s.subgroups() {
            for k in s.above(&l) {
                if k == l || !covers(&s, &l, &k) {
                    continue;
                }
                let (x, t) = (pair(&l, &l), pair(&k, &l));
                let mut cells = Cells::new();
                for a in s.cells(&l) {
                    let b = y.beta(&x, &t, &a)?;
                    let v = y.alpha(&pair(&k, &k), &t, &a)?;
                    let mut images = Vec::with_capacity(b.source().ngens());
                    for img in b.images() {
                        images.push(v.lift(img).ok_or_else(|| Error::Verification(format!("vertical map into {t} at {a} is not onto the horizontal image")))?);
                    }
                    cells.insert(a, ModMap::new(b.source().clone(), v.source().clone(), images, 0)?);
                }
                basing.insert((k.clone(), l.clone()), cells);
            }
        }
        Self::from_covers(s, phi, basing)
    }

    fn phi_all_zero(&self, k: &ConnectedSubgroup) -> bool {
        self.phi[k].values().all(|m| m.ngens() == 0)
    }

    fn zero_basing(&self, k: &ConnectedSubgroup, l: &ConnectedSubgroup) -> Result<Cells<ModMap>> {
        let mut out = Cells::new();
        for a in self.structure.cells(l) {
            let (src, tgt) = self.basing_ends(k, l, &a)?;
            out.insert(a, ModMap::zero(&src, &tgt, 0)?);
        }
        Ok(out)
    }

    /// Source `phi^L(a)` and target `R(K, L) (x) phi^K(image of a)`.
    fn basing_ends(&self, k: &ConnectedSubgroup, l: &ConnectedSubgroup, a: &ClosedSubgroup) -> Result<(Module, Module)> {
        let s = &self.structure;
        let src = self.phi(l, a)?.clone();
        let tgt = self.phi(k, &s.cell_image(a, k))?.base_change(&s.vertical(k, k, l)?)?;
        Ok((src, tgt))
    }

    /// `b_{H,L} = infl(b_{H,K}) o b_{K,L}`.
    fn compose_basing(
        &self,
        lower: &Cells<ModMap>,
        upper: &Cells<ModMap>,
        h: &ConnectedSubgroup,
        k: &ConnectedSubgroup,
        l: &ConnectedSubgroup,
    ) -> Result<Cells<ModMap>> {
        let s = &self.structure;
        let rm = s.vertical(h, k, l)?;
        let mut out = Cells::new();
        for a in s.cells(l) {
            let first = cell(lower, &a, "basing map")?;
            let second = cell(upper, &s.cell_image(&a, k), "basing map")?;
            let imgs = transport(second, &rm);
            let (src, tgt) = self.basing_ends(h, l, &a)?;
            let images = first.images().iter().map(|y| combine(y, &imgs, tgt.nvars(), tgt.ngens())).collect();
            out.insert(a, ModMap::new(src, tgt, images, first.degree() + second.degree())?);
        }
        Ok(out)
    }

    fn check_basing_shapes(&self) -> Result<()> {
        for ((k, l), cells) in &self.basing {
            for a in self.structure.cells(l) {
                let f = cell(cells, &a, "basing map")?;
                let (src, tgt) = self.basing_ends(k, l, &a)?;
                if *f.source() != src || *f.target() != tgt || f.degree() != 0 {
                    return Err(Error::Schema(format!("basing map ({k}, {l}) at cell {a} has the wrong shape")));
                }
            }
        }
        Ok(())
    }

    pub fn structure(&self) -> &Arc<Structure> {
        &self.structure
    }

    pub fn phi(&self, k: &ConnectedSubgroup, a: &ClosedSubgroup) -> Result<&Module> {
        let cells = self.phi.get(k).ok_or_else(|| Error::Schema(format!("no fixed-point module for {k}")))?;
        cell(cells, a, &format!("fixed points at {k}"))
    }

    pub fn basing(&self, k: &ConnectedSubgroup, l: &ConnectedSubgroup, a: &ClosedSubgroup) -> Result<&ModMap> {
        let cells = self.basing.get(&(k.clone(), l.clone())).ok_or_else(|| Error::Schema(format!("no basing map ({k}, {l})")))?;
        cell(cells, a, "basing map")
    }

    /// Failures of `b_{H,L} = infl(b_{H,K}) o b_{K,L}`.
    pub fn cocycle_failures(&self) -> Result<Vec<String>> {
        let s = &self.structure;
        let mut out = Vec::new();
        for l in s.subgroups() {
            for k in s.above(&l) {
                for h in s.above(&k) {
                    if k == l || h == k {
                        continue;
                    }
                    let comp = self.compose_basing(&self.basing[&(k.clone(), l.clone())], &self.basing[&(h.clone(), k.clone())], &h, &k, &l)?;
                    for (a, f) in comp {
                        if !f.equals(self.basing(&h, &l, &a)?) {
                            out.push(format!("basing composite ({h}, {k}, {l}) at {a}"));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// The diagram `M(K, L)(A) = R(K, L) (x) phi^K(image of A)`.
    pub fn to_diagram(&self) -> Result<DiagramModule> {
        let s = self.structure.clone();
        let mut values = BTreeMap::new();
        for v in s.vertices() {
            let rm = s.vertical(&v.upper, &v.upper, &v.lower)?;
            let mut cells = Cells::new();
            for a in s.cells(&v.lower) {
                cells.insert(a.clone(), self.phi(&v.upper, &s.cell_image(&a, &v.upper))?.base_change(&rm)?);
            }
            values.insert(v, cells);
        }
        let mut beta = BTreeMap::new();
        for (x, y) in beta_edges(&s) {
            let (k, h, l) = (&x.upper, &y.upper, &x.lower);
            let rm = s.vertical(h, k, l)?;
            let mut cells = Cells::new();
            for a in s.cells(l) {
                let b = self.basing(h, k, &s.cell_image(&a, k))?;
                let f = ModMap::new(values[&x][&a].clone(), values[&y][&a].clone(), transport(b, &rm), 0)?;
                cells.insert(a, f);
            }
            beta.insert((x, y), cells);
        }
        let mut alpha = BTreeMap::new();
        for (x, y) in alpha_edges(&s) {
            let rm = s.vertical(&x.upper, &x.lower, &y.lower)?;
            let mut cells = Cells::new();
            for a in s.cells(&y.lower) {
                let src = values[&x][&s.cell_image(&a, &x.lower)].base_change(&rm)?;
                let tgt: Module = values[&y][&a].clone();
                let images = (0..tgt.ngens()).map(|i| tgt.basis_elem(i)).collect();
                cells.insert(a, ModMap::new(src, tgt, images, 0)?);
            }
            alpha.insert((x, y), cells);
        }
        DiagramModule::new(s, values, beta, alpha)
    }
}

/// The sphere `S^V` in extended form: `phi^K` free on a generator in degree
/// `-2 dim V^B` at each cell `B`, with `iota -> e(V^A - V^{image})^{-1} iota`.
pub fn sphere_extended(s: &Arc<Structure>, v: &VirtualRepresentation) -> Result<ExtendedModule> {
    require_tracked_kernels(s.tracked(), v)?;
    let mut phi: BTreeMap<ConnectedSubgroup, Cells<Module>> = BTreeMap::new();
    for k in s.subgroups() {
        let r = s.ring(&k, &k)?;
        let cells = s.cells(&k).into_iter().map(|b| {
            let d = -2 * v.fixed_dim(&b);
            (b, Module::free(r.clone(), vec![d]))
        });
        phi.insert(k, cells.collect());
    }
    let mut basing = BTreeMap::new();
    for l in s.subgroups() {
        for k in s.above(&l) {
            if k == l {
                continue;
            }
            let ring = s.ring(&k, &l)?;
            let rm = s.vertical(&k, &k, &l)?;
            let mut cells = Cells::new();
            for a in s.cells(&l) {
                let img = s.cell_image(&a, &k);
                let e = euler_value(v, &a).mul(&euler_value(v, &img).inverse());
                let c = e.inverse().in_ring(&ring)?;
                let src = phi[&l][&a].clone();
                let tgt = phi[&k][&img].base_change(&rm)?;
                cells.insert(a, ModMap::new(src, tgt, vec![vec![c]], 0)?);
            }
            basing.insert((k, l.clone()), cells);
        }
    }
    ExtendedModule::from_covers(s.clone(), phi, basing)
}

pub fn sphere(s: &Arc<Structure>, v: &VirtualRepresentation) -> Result<DiagramModule> {
    sphere_extended(s, v)?.to_diagram()
}

/// A map of diagram modules, vertex by vertex and cell by cell.
#[derive(Clone, Debug)]
pub struct DiagramMap {
    pub source: DiagramModule,
    pub target: DiagramModule,
    pub degree: i64,
    pub maps: BTreeMap<QuotientPair, Cells<ModMap>>,
}

impl DiagramMap {
    pub fn new(source: DiagramModule, target: DiagramModule, degree: i64, maps: BTreeMap<QuotientPair, Cells<ModMap>>) -> Result<Self> {
        if source.structure != target.structure && *source.structure != *target.structure {
            return Err(Error::IncompatibleRings("maps between diagrams over different structures".into()));
        }
        let s = source.structure.clone();
        for v in s.vertices() {
            let cells = maps.get(&v).ok_or_else(|| Error::Schema(format!("map missing at vertex {v}")))?;
            for a in s.cells(&v.lower) {
                let f = cell(cells, &a, &format!("map at {v}"))?;
                if f.source() != source.value(&v, &a)? || f.target() != target.value(&v, &a)? || f.degree() != degree {
                    return Err(Error::Schema(format!("map at {v}, cell {a} has the wrong shape")));
                }
            }
        }
        Ok(Self { source, target, degree, maps })
    }

    pub fn at(&self, v: &QuotientPair, a: &ClosedSubgroup) -> Result<&ModMap> {
        let cells = self.maps.get(v).ok_or_else(|| Error::Schema(format!("map missing at vertex {v}")))?;
        cell(cells, a, "map")
    }

    /// Failures of commutation with the horizontal and vertical maps.
    pub fn naturality_failures(&self) -> Result<Vec<String>> {
        let s = self.source.structure.clone();
        let mut out = Vec::new();
        for (x, y) in beta_edges(&s) {
            for a in s.cells(&x.lower) {
                let one = self.source.beta(&x, &y, &a)?.compose(self.at(&y, &a)?)?;
                let two = self.at(&x, &a)?.compose(self.target.beta(&x, &y, &a)?)?;
                if !one.equals(&two) {
                    out.push(format!("horizontal {x} -> {y} at {a}"));
                }
            }
        }
        for (x, y) in alpha_edges(&s) {
            let rm = s.vertical(&x.upper, &x.lower, &y.lower)?;
            for a in s.cells(&y.lower) {
                let ak = s.cell_image(&a, &x.lower);
                let src = self.source.value(&x, &ak)?;
                for i in 0..src.ngens() {
                    let e = src.basis_elem(i);
                    let left = self.at(&y, &a)?.apply(&self.source.alpha_apply(&x, &y, &a, &e)?);
                    let fe = self.at(&x, &ak)?.apply(&e);
                    let right = self.target.alpha(&x, &y, &a)?.apply_through(&rm, &fe);
                    if !self.target.value(&y, &a)?.elem_eq(&left, &right) {
                        out.push(format!("vertical {x} -> {y} at {a}"));
                        break;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn compose(&self, next: &DiagramMap) -> Result<DiagramMap> {
        let mut maps = BTreeMap::new();
        for (v, cells) in &self.maps {
            let mut c = Cells::new();
            for (a, f) in cells {
                c.insert(a.clone(), f.compose(next.at(v, a)?)?);
            }
            maps.insert(v.clone(), c);
        }
        DiagramMap::new(self.source.clone(), next.target.clone(), self.degree + next.degree, maps)
    }

    /// Isomorphism certificates at every vertex and cell.
    pub fn iso_reports(&self, w: &DegreeWindow) -> Result<Vec<(QuotientPair, ClosedSubgroup, IsoReport)>> {
        let mut out = Vec::new();
        for (v, cells) in &self.maps {
            for (a, f) in cells {
                out.push((v.clone(), a.clone(), f.certify_iso(w)?));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{Character, TrackedPoset};

    fn circle() -> Arc<Structure> {
        Structure::new(TrackedPoset::generate(1, &[], &[Character(vec![1])]).unwrap()).unwrap()
    }

    fn rank2() -> Arc<Structure> {
        let circles: Vec<ConnectedSubgroup> = [[1, 0], [0, 1], [1, -1]].iter().map(|c| ConnectedSubgroup::circle(c)).collect();
        Structure::new(TrackedPoset::generate(2, &circles, &[]).unwrap()).unwrap()
    }

    fn window() -> DegreeWindow {
        DegreeWindow::new(-6, 6).unwrap()
    }

    #[test]
    fn sphere_of_the_circle() {
        let s = circle();
        let z = VirtualRepresentation::from_chars(&[&[1]]);
        let m = sphere(&s, &z).unwrap();
        let (one, g) = (ConnectedSubgroup::trivial(1), ConnectedSubgroup::whole(1));
        let (x, y) = (pair(&one, &one), pair(&g, &one));
        let trivial = ClosedSubgroup::trivial(1);
        assert_eq!(m.value(&x, &trivial).unwrap().degrees(), &[-2]);
        assert_eq!(m.value(&pair(&g, &g), g.as_closed()).unwrap().degrees(), &[0]);
        let b = m.beta(&x, &y, &trivial).unwrap();
        let t = s.ring(&g, &one).unwrap().inverse_form(&[1]).unwrap();
        assert!(b.equals(&ModMap::new(b.source().clone(), b.target().clone(), vec![vec![t]], 0).unwrap()));
        let generic = m.beta(&x, &y, g.as_closed()).unwrap();
        assert_eq!(m.value(&x, g.as_closed()).unwrap().degrees(), &[0]);
        assert!(generic.equals(&ModMap::localization(generic.source(), generic.target()).unwrap()));
        assert!(m.functoriality_failures().unwrap().is_empty());
        assert!(m.is_quasicoherent(&window()).unwrap());
        assert!(m.is_extended(&window()).unwrap());
    }

    #[test]
    fn rank_two_virtual_sphere_is_coherent() {
        let s = rank2();
        let v = VirtualRepresentation::new(vec![Character(vec![1, 0]), Character(vec![1, 1])], vec![Character(vec![0, 1])]);
        let e = sphere_extended(&s, &v).unwrap();
        assert!(e.cocycle_failures().unwrap().is_empty());
        let m = e.to_diagram().unwrap();
        assert!(m.functoriality_failures().unwrap().is_empty());
        assert!(m.is_extended(&window()).unwrap());
        assert!(m.is_quasicoherent(&window()).unwrap());
    }

    #[test]
    fn untracked_sphere_is_rejected() {
        let s = circle();
        let v = VirtualRepresentation::from_chars(&[&[2]]);
        assert!(matches!(sphere(&s, &v), Err(Error::UntrackedKernel(_))));
    }

    #[test]
    fn semifree_torsion_module_is_extended_but_not_quasicoherent() {
        let s = Structure::new(TrackedPoset::semifree_circle()).unwrap();
        let (one, g) = (ConnectedSubgroup::trivial(1), ConnectedSubgroup::whole(1));
        let mut phi = BTreeMap::new();
        phi.insert(one.clone(), Cells::from([(one.as_closed().clone(), Module::free(s.ring(&one, &one).unwrap(), vec![0]))]));
        phi.insert(g.clone(), Cells::from([(g.as_closed().clone(), Module::zero(s.ring(&g, &g).unwrap()))]));
        let m = ExtendedModule::from_covers(s, phi, BTreeMap::new()).unwrap().to_diagram().unwrap();
        assert!(m.is_extended(&window()).unwrap());
        assert!(!m.is_quasicoherent(&window()).unwrap());
    }

    #[test]
    fn suspension_of_the_unit_is_the_sphere() {
        for s in [circle(), rank2()] {
            let v = if s.rank() == 1 {
                VirtualRepresentation::from_chars(&[&[1]])
            } else {
                VirtualRepresentation::new(vec![Character(vec![0, 1])], vec![Character(vec![1, 1])])
            };
            let unit = sphere(&s, &VirtualRepresentation::zero()).unwrap();
            let sus = unit.suspend(&v).unwrap();
            let direct = sphere(&s, &v).unwrap();
            assert_eq!(sus.values(), direct.values());
            for (e, cells) in direct.beta_maps() {
                for (a, f) in cells {
                    assert!(f.equals(sus.beta(&e.0, &e.1, a).unwrap()));
                }
            }
            assert!(sus.functoriality_failures().unwrap().is_empty());
        }
    }

    #[test]
    fn identity_map_is_natural() {
        let s = rank2();
        let m = sphere(&s, &VirtualRepresentation::from_chars(&[&[1, 1]])).unwrap();
        let maps = m.values().iter().map(|(v, c)| (v.clone(), c.iter().map(|(a, x)| (a.clone(), ModMap::identity(x))).collect())).collect();
        let id = DiagramMap::new(m.clone(), m.clone(), 0, maps).unwrap();
        assert!(id.naturality_failures().unwrap().is_empty());
        assert!(id.iso_reports(&window()).unwrap().iter().all(|r| r.2.bijective));
    }
}
