//! Cochain complexes of graded modules with finite slices; finite Koszul
//! complexes, the stable Koszul and Cech complexes as their colimits, and the
//! fibre sequence relating them.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lattice::IntVec;

use super::linalg;
use super::map::ModMap;
use super::module::{DegreeWindow, Elem, Module};
use super::poly::{Poly, Q};
use super::ring::Ring;

/// Terms `C^start, ..., C^{start + n - 1}` with differentials of degree zero.
#[derive(Clone, Debug)]
pub struct Complex {
    start: i64,
    terms: Vec<Module>,
    maps: Vec<ModMap>,
}

impl Complex {
    pub fn new(start: i64, terms: Vec<Module>, maps: Vec<ModMap>) -> Result<Self> {
        if maps.len() + 1 != terms.len().max(1) {
            return Err(Error::Schema(format!("{} terms need {} differentials", terms.len(), terms.len().saturating_sub(1))));
        }
        for (i, f) in maps.iter().enumerate() {
            if *f.source() != terms[i] || *f.target() != terms[i + 1] || f.degree() != 0 {
                return Err(Error::Schema(format!("differential {} does not match its terms", start + i as i64)));
            }
        }
        Ok(Self { start, terms, maps })
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn end(&self) -> i64 {
        self.start + self.terms.len() as i64 - 1
    }

    pub fn terms(&self) -> &[Module] {
        &self.terms
    }

    pub fn maps(&self) -> &[ModMap] {
        &self.maps
    }

    pub fn term(&self, p: i64) -> Option<&Module> {
        usize::try_from(p - self.start).ok().and_then(|i| self.terms.get(i))
    }

    /// Differential leaving position `p`.
    pub fn differential(&self, p: i64) -> Option<&ModMap> {
        usize::try_from(p - self.start).ok().and_then(|i| self.maps.get(i))
    }

    /// Positions `p` with `d^{p+1} d^p != 0`.
    pub fn d_squared_failures(&self) -> Result<Vec<i64>> {
        let mut out = Vec::new();
        for (i, w) in self.maps.windows(2).enumerate() {
            if !w[0].compose(&w[1])?.is_zero() {
                out.push(self.start + i as i64);
            }
        }
        Ok(out)
    }

    /// Basis of the degree-`d` cocycles at `p`, in slice coordinates.
    pub fn cocycles(&self, p: i64, d: i64) -> Result<Vec<Vec<Q>>> {
        let Some(t) = self.term(p) else { return Ok(Vec::new()) };
        let dim = t.slice_or_overflow(d)?.dim();
        match self.differential(p) {
            None => Ok(identity(dim)),
            Some(f) => {
                let (cols, tdim) = f.columns_in_degree(d)?;
                let rows = linalg::transpose(&cols, tdim);
                Ok(linalg::nullspace(&rows, dim))
            }
        }
    }

    /// Degree-`d` coboundaries at `p`, as coordinate vectors.
    pub fn coboundaries(&self, p: i64, d: i64) -> Result<Vec<Vec<Q>>> {
        match self.differential(p - 1) {
            None => Ok(Vec::new()),
            Some(f) => Ok(f.columns_in_degree(d)?.0),
        }
    }

    pub fn cohomology_dim(&self, p: i64, d: i64) -> Result<usize> {
        let Some(t) = self.term(p) else { return Ok(0) };
        let dim = t.slice_or_overflow(d)?.dim();
        let z = self.cocycles(p, d)?.len();
        let b = linalg::rank(&self.coboundaries(p, d)?, dim);
        Ok(z - b)
    }

    /// `(position, degree, dim H)` over the window.
    pub fn cohomology_table(&self, w: &DegreeWindow) -> Result<Vec<(i64, i64, usize)>> {
        let mut out = Vec::new();
        for p in self.start..=self.end() {
            for d in w.degrees() {
                out.push((p, d, self.cohomology_dim(p, d)?));
            }
        }
        Ok(out)
    }

    pub fn is_exact_in(&self, w: &DegreeWindow) -> Result<bool> {
        Ok(self.cohomology_table(w)?.iter().all(|x| x.2 == 0))
    }

    /// The complex with the terms below `p` deleted.
    pub fn truncate_from(&self, p: i64) -> Result<Complex> {
        let i = usize::try_from(p - self.start).map_err(|_| Error::Schema("truncation below the start".into()))?;
        Complex::new(p, self.terms[i..].to_vec(), self.maps[i.min(self.maps.len())..].to_vec())
    }
}

fn identity(n: usize) -> Vec<Vec<Q>> {
    (0..n)
        .map(|i| {
            let mut v = vec![Q::zero(); n];
            v[i] = num_traits::One::one();
            v
        })
        .collect()
}

/// Rank in degree `d` of the map induced on cohomology by `f: C^p -> D^q`
/// (which must send cocycles to cocycles and coboundaries to coboundaries).
pub fn induced_rank(c: &Complex, p: i64, dcx: &Complex, q: i64, f: &ModMap, d: i64) -> Result<usize> {
    let Some(t) = dcx.term(q) else { return Ok(0) };
    let tdim = t.slice_or_overflow(d)?.dim();
    let z = c.cocycles(p, d)?;
    if z.is_empty() {
        return Ok(0);
    }
    let (cols, _) = f.columns_in_degree(d)?;
    let b = dcx.coboundaries(q, d)?;
    let rb = linalg::rank(&b, tdim);
    let mut all = b;
    for zz in &z {
        let mut v = vec![Q::zero(); tdim];
        for (c, col) in zz.iter().zip(&cols) {
            if c.is_zero() {
                continue;
            }
            for (x, y) in v.iter_mut().zip(col) {
                *x += c * y;
            }
        }
        all.push(v);
    }
    Ok(linalg::rank(&all, tdim) - rb)
}

fn subsets(c: usize) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = (0u32..(1u32 << c)).map(|m| (0..c).filter(|i| m & (1 << i) != 0).collect()).collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    all
}

fn product(xs: &[Poly], s: &[usize], nvars: usize) -> Poly {
    s.iter().fold(Poly::one(nvars), |acc, &i| &acc * &xs[i])
}

fn element_degree(x: &Poly, ring: &Ring) -> Result<i64> {
    x.degree(&ring.weights()).filter(|&d| d > 0).ok_or_else(|| Error::Schema("Koszul elements must be homogeneous of positive degree".into()))
}

/// Finite Koszul complex `K(x_1^n, ..., x_c^n; M)`: position `p` is the sum
/// over `|S| = p` of `M` with `m` standing for `m / x_S^n`.
pub fn koszul(xs: &[Poly], m: &Module, n: u32) -> Result<Complex> {
    let ring = m.ring();
    let degs: Vec<i64> = xs.iter().map(|x| element_degree(x, ring)).collect::<Result<_>>()?;
    let c = xs.len();
    let subs = subsets(c);
    let by_size: Vec<Vec<&Vec<usize>>> = (0..=c).map(|p| subs.iter().filter(|s| s.len() == p).collect()).collect();
    let shift = |s: &[usize]| -(n as i64) * s.iter().map(|&i| degs[i]).sum::<i64>();
    let mut terms = Vec::new();
    for layer in &by_size {
        let parts: Vec<Module> = layer.iter().map(|s| m.shift(shift(s))).collect();
        terms.push(Module::direct_sum(&parts)?);
    }
    let g = m.ngens();
    let nv = m.nvars();
    let mut maps = Vec::new();
    for p in 0..c {
        let (src, tgt) = (&by_size[p], &by_size[p + 1]);
        let mut images: Vec<Elem> = vec![vec![Poly::zero(nv); tgt.len() * g]; src.len() * g];
        for (si, s) in src.iter().enumerate() {
            for j in (0..c).filter(|j| !s.contains(j)) {
                let mut t: Vec<usize> = (*s).clone();
                t.push(j);
                t.sort();
                let ti = tgt.iter().position(|u| **u == t).expect("subset");
                let sign = if s.iter().filter(|&&i| i < j).count() % 2 == 0 { 1 } else { -1 };
                let coef = xs[j].pow(n).scale(&Q::from_integer(sign.into()));
                for k in 0..g {
                    images[si * g + k][ti * g + k] = coef.clone();
                }
            }
        }
        maps.push(ModMap::new(terms[p].clone(), terms[p + 1].clone(), images, 0)?);
    }
    Complex::new(0, terms, maps)
}

/// Transition `K(x^n; M) -> K(x^{n+1}; M)`, multiplication by `x_S` on the
/// summand of `S`; one map per position.
pub fn koszul_transition(xs: &[Poly], m: &Module, n: u32) -> Result<(Complex, Complex, Vec<ModMap>)> {
    let a = koszul(xs, m, n)?;
    let b = koszul(xs, m, n + 1)?;
    let c = xs.len();
    let subs = subsets(c);
    let g = m.ngens();
    let nv = m.nvars();
    let mut maps = Vec::new();
    for p in 0..=c {
        let layer: Vec<&Vec<usize>> = subs.iter().filter(|s| s.len() == p).collect();
        let size = layer.len() * g;
        let mut images: Vec<Elem> = vec![vec![Poly::zero(nv); size]; size];
        for (si, s) in layer.iter().enumerate() {
            let xs_s = product(xs, s, nv);
            for k in 0..g {
                images[si * g + k][si * g + k] = xs_s.clone();
            }
        }
        maps.push(ModMap::new(a.terms[p].clone(), b.terms[p].clone(), images, 0)?);
    }
    Ok((a, b, maps))
}

/// Degreewise cohomology of a colimit of complexes, with the stage at which
/// each degree stabilized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableCohomology {
    /// `(position, degree) -> dim`.
    pub dims: BTreeMap<(i64, i64), usize>,
    /// `degree -> stage`.
    pub stages: BTreeMap<i64, u32>,
}

impl StableCohomology {
    pub fn dim(&self, p: i64, d: i64) -> usize {
        self.dims.get(&(p, d)).copied().unwrap_or(0)
    }
}

/// First stage at which a degree can see every generator of `m`:
/// `ceil((g_max - d) / e_min)`, at least 1.
fn warm_up(xs: &[Poly], m: &Module, d: i64) -> Result<u32> {
    let emin = xs.iter().map(|x| element_degree(x, m.ring())).collect::<Result<Vec<_>>>()?.into_iter().min().unwrap_or(2);
    let gmax = m.degrees().iter().copied().max().unwrap_or(0);
    let need = (gmax - d).max(0);
    Ok(((need + emin - 1) / emin).max(1) as u32)
}

/// Cohomology of the stable Koszul complex (`cech = false`) or of the Cech
/// complex (the same with position 0 deleted and positions lowered by one),
/// computed along the tower of finite Koszul complexes. A degree counts as
/// stable once two consecutive transitions are bijective on cohomology in
/// every position; `bound` caps the stages tried beyond the warm-up.
pub fn stable_cohomology(xs: &[Poly], m: &Module, w: &DegreeWindow, bound: u32, cech: bool) -> Result<StableCohomology> {
    let mut dims = BTreeMap::new();
    let mut stages = BTreeMap::new();
    let c = xs.len() as i64;
    let (lo, shift) = if cech { (1, -1) } else { (0, 0) };
    for d in w.degrees() {
        let n0 = warm_up(xs, m, d)?;
        let mut streak = 0;
        let mut found = None;
        for n in n0..n0 + bound {
            let (a, b, t) = koszul_transition(xs, m, n)?;
            let (a, b) = if cech && c > 0 { (a.truncate_from(1)?, b.truncate_from(1)?) } else { (a, b) };
            let mut ok = true;
            let mut here = Vec::new();
            for p in lo..=c {
                let da = a.cohomology_dim(p, d)?;
                let db = b.cohomology_dim(p, d)?;
                let r = induced_rank(&a, p, &b, p, &t[p as usize], d)?;
                ok &= da == db && r == da;
                here.push((p + shift, da));
            }
            streak = if ok { streak + 1 } else { 0 };
            if streak == 2 {
                found = Some((n - 1, here));
                break;
            }
        }
        let Some((n, here)) = found else {
            return Err(Error::Stabilization(format!("Koszul tower did not stabilize in degree {d} within {bound} stages")));
        };
        for (p, dim) in here {
            dims.insert((p, d), dim);
        }
        stages.insert(d, n);
    }
    Ok(StableCohomology { dims, stages })
}

/// One degree of the long exact sequence of `K(x; M) -> M -> C(x; M)`:
/// the spaces `H^0 K, H^0 M, H^0 C, H^1 K, ...` and the ranks of the maps
/// between consecutive spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FibreSequenceRow {
    pub degree: i64,
    pub stage: u32,
    pub dims: Vec<usize>,
    pub ranks: Vec<usize>,
    pub exact: bool,
}

/// Degreewise check of the fibre sequence at a stage past stabilization.
pub fn fibre_sequence(xs: &[Poly], m: &Module, w: &DegreeWindow, bound: u32) -> Result<Vec<FibreSequenceRow>> {
    let st = stable_cohomology(xs, m, w, bound, false)?;
    let sc = stable_cohomology(xs, m, w, bound, true)?;
    let c = xs.len() as i64;
    let mut out = Vec::new();
    for d in w.degrees() {
        let n = st.stages[&d].max(sc.stages[&d]) + 1;
        let k = koszul(xs, m, n)?;
        let mc = Complex::new(0, vec![m.clone()], vec![])?;
        let ch = if c > 0 { k.truncate_from(1)? } else { Complex::new(1, vec![], vec![])? };
        let id = ModMap::identity(m);
        let mut dims = Vec::new();
        let mut ranks = Vec::new();
        for p in 0..=c {
            dims.push(k.cohomology_dim(p, d)?);
            ranks.push(if p == 0 { induced_rank(&k, 0, &mc, 0, &id, d)? } else { 0 });
            dims.push(mc.cohomology_dim(p, d)?);
            ranks.push(match (p, k.differential(0)) {
                (0, Some(d0)) => induced_rank(&mc, 0, &ch, 1, d0, d)?,
                _ => 0,
            });
            dims.push(ch.cohomology_dim(p + 1, d)?);
            if p < c {
                let idc = ModMap::identity(k.term(p + 1).expect("term"));
                ranks.push(induced_rank(&ch, p + 1, &k, p + 1, &idc, d)?);
            }
        }
        let mut exact = true;
        for (i, &dim) in dims.iter().enumerate() {
            let before = if i == 0 { 0 } else { ranks[i - 1] };
            let after = ranks.get(i).copied().unwrap_or(0);
            exact &= before + after == dim;
        }
        out.push(FibreSequenceRow { degree: d, stage: n, dims, ranks, exact });
    }
    Ok(out)
}

/// `N = I N` for the ideal generated by `xs`: the Nakayama-type vanishing
/// that makes the stable Koszul complex of a module on which some power of
/// each generator of `I` acts invertibly acyclic.
pub fn absorbs_ideal(n: &Module, xs: &[Poly]) -> Result<bool> {
    let mut rels = n.relations().to_vec();
    for x in xs {
        if !n.ring().admits(x) {
            return Err(Error::IncompatibleRings("ideal generator is not in the module ring".into()));
        }
        for k in 0..n.ngens() {
            let mut v = n.zero_elem();
            v[k] = x.clone();
            rels.push(v);
        }
    }
    Ok(Module::new(n.ring().clone(), n.degrees().to_vec(), rels)?.is_zero())
}

/// Summands of the stable Koszul complex for multiplicative sets generated
/// by linear forms: position `p` carries `M[1/S]` for every `|S| = p`.
pub fn stable_koszul_summands(m: &Module, sets: &[Vec<IntVec>]) -> Result<Vec<Vec<(Vec<usize>, Module)>>> {
    let c = sets.len();
    let mut out = vec![Vec::new(); c + 1];
    for s in subsets(c) {
        let forms: Vec<IntVec> = s.iter().flat_map(|&i| sets[i].iter().cloned()).collect();
        let uni = m.ring().universe().clone();
        let mut inv = m.ring().inverted().clone();
        inv.extend(Ring::inverting(uni, &forms)?.inverted().iter().copied());
        let ring = m.ring().with_inverted(&inv);
        out[s.len()].push((s.clone(), m.localize(&ring)?));
    }
    Ok(out)
}

/// The element inverted by a multiplicative set generated by linear forms.
pub fn set_element(ring: &Ring, forms: &[IntVec]) -> Result<Poly> {
    forms.iter().try_fold(ring.one(), |acc, a| Ok(&acc * &ring.linear_form(a)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ring::Universe;

    fn poly_ring(r: usize) -> Ring {
        let basis = crate::lattice::identity(r);
        let forms = basis.clone();
        Ring::polynomial(Universe::new(r, basis, forms).unwrap())
    }

    #[test]
    fn koszul_squares_to_zero() {
        let r = poly_ring(2);
        let m = Module::free(r.clone(), vec![0]);
        let k = koszul(&[r.var(0), r.var(1)], &m, 3).unwrap();
        assert!(k.d_squared_failures().unwrap().is_empty());
        assert_eq!(k.terms().len(), 3);
    }

    #[test]
    fn local_cohomology_of_the_line() {
        let r = poly_ring(1);
        let m = Module::free(r.clone(), vec![0]);
        let w = DegreeWindow::new(-10, 10).unwrap();
        let h = stable_cohomology(&[r.var(0)], &m, &w, 6, false).unwrap();
        for d in w.degrees() {
            assert_eq!(h.dim(0, d), 0);
            // oracle: the cokernel of Q[c] -> Q[c, 1/c] is spanned by c^k, k < 0
            let expect = usize::from(d <= -2 && d % 2 == 0);
            assert_eq!(h.dim(1, d), expect, "degree {d}");
        }
        let cech = stable_cohomology(&[r.var(0)], &m, &w, 6, true).unwrap();
        for d in w.degrees() {
            assert_eq!(cech.dim(0, d), usize::from(d % 2 == 0));
        }
    }

    #[test]
    fn local_cohomology_of_the_plane() {
        let r = poly_ring(2);
        let m = Module::free(r.clone(), vec![0]);
        let w = DegreeWindow::new(-10, 10).unwrap();
        let h = stable_cohomology(&[r.var(0), r.var(1)], &m, &w, 6, false).unwrap();
        for d in w.degrees() {
            assert_eq!(h.dim(0, d), 0);
            assert_eq!(h.dim(1, d), 0);
            // oracle: monomials x^a y^b with a, b < 0 of degree d
            let expect = if d % 2 == 0 && d <= -4 { (-d / 2 - 1) as usize } else { 0 };
            assert_eq!(h.dim(2, d), expect, "degree {d}");
        }
    }

    #[test]
    fn fibre_sequences_are_exact() {
        let w = DegreeWindow::new(-10, 10).unwrap();
        for rank in [1, 2] {
            let r = poly_ring(rank);
            let m = Module::free(r.clone(), vec![0]);
            let xs: Vec<Poly> = (0..rank).map(|i| r.var(i)).collect();
            let rows = fibre_sequence(&xs, &m, &w, 6).unwrap();
            assert!(rows.iter().all(|row| row.exact), "{rows:?}");
        }
    }

    #[test]
    fn torsion_module_has_only_zeroth_local_cohomology() {
        let r = poly_ring(1);
        let c2 = r.var(0).pow(2);
        let m = Module::new(r.clone(), vec![0], vec![vec![c2]]).unwrap();
        let w = DegreeWindow::new(-6, 6).unwrap();
        let h = stable_cohomology(&[r.var(0)], &m, &w, 6, false).unwrap();
        for d in w.degrees() {
            assert_eq!(h.dim(0, d), usize::from(d == 0 || d == 2));
            assert_eq!(h.dim(1, d), 0);
        }
    }

    #[test]
    fn localized_module_absorbs_the_ideal() {
        let u = Universe::new(2, crate::lattice::identity(2), vec![vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap();
        let r = Ring::inverting(u, &[vec![1, 1]]).unwrap();
        let n = Module::free(r.clone(), vec![0]);
        let xy = r.linear_form(&[1, 1]).unwrap();
        assert!(absorbs_ideal(&n, &[r.var(0), r.var(1)]).unwrap());
        assert!(absorbs_ideal(&n, &[xy]).unwrap());
        let p = Module::free(poly_ring(2), vec![0]);
        assert!(!absorbs_ideal(&p, &[p.ring().var(0), p.ring().var(1)]).unwrap());
    }
}
