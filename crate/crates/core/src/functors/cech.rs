//! Cech complexes of the localization functor `K/L -> E_{K/L}^{-1} phi^L Y`
//! over a product decomposition `G/L = S_1 x ... x S_c`, and the comparison
//! of `CH^0` across decompositions.

use std::collections::BTreeMap;

use crate::algebra::complex::{absorbs_ideal, koszul, set_element, stable_cohomology, stable_koszul_summands};
use crate::algebra::module::Elem;
use crate::algebra::{DegreeWindow, ModMap, Module, Poly, Ring};
use crate::diagram::DiagramModule;
use crate::error::{Error, Result};
use crate::family::Structure;
use crate::lattice::{self, IntVec};
use crate::torus::{ClosedSubgroup, ConnectedSubgroup, QuotientPair};

/// Check that the circles `K_i / L` give a direct product decomposition of
/// `G/L`: each `K_i` is tracked and contains `L` with one extra dimension,
/// there are `codim L` of them, and their cocharacters span the lattice.
pub fn validate_decomposition(s: &Structure, l: &ConnectedSubgroup, decomposition: &[ConnectedSubgroup]) -> Result<()> {
    let r = s.rank();
    if decomposition.len() != l.codim() {
        return Err(Error::InvalidDecomposition(format!("{} circles for a quotient of rank {}", decomposition.len(), l.codim())));
    }
    let mut rows: Vec<IntVec> = l.as_closed().cocharacters();
    for k in decomposition {
        s.tracked().require_tracked(k)?;
        if !k.contains(l) || k.dim() != l.dim() + 1 {
            return Err(Error::InvalidDecomposition(format!("{k} is not a circle over {l}")));
        }
        rows.extend(k.as_closed().cocharacters());
    }
    let h = lattice::hnf(&rows, r);
    if h.len() != r || lattice::det_hnf(&h).abs() != 1 {
        return Err(Error::InvalidDecomposition(format!("the circles do not multiply to G/{l}")));
    }
    Ok(())
}

/// The first valid decomposition among the tracked circles over `L`, in
/// their sorted order.
pub fn default_decomposition(s: &Structure, l: &ConnectedSubgroup) -> Result<Vec<ConnectedSubgroup>> {
    let circles: Vec<ConnectedSubgroup> = s.above(l).into_iter().filter(|k| k.dim() == l.dim() + 1).collect();
    let c = l.codim();
    let mut pick: Vec<usize> = (0..c).collect();
    if c == 0 {
        return Ok(Vec::new());
    }
    loop {
        if pick.iter().all(|&i| i < circles.len()) {
            let cand: Vec<ConnectedSubgroup> = pick.iter().map(|&i| circles[i].clone()).collect();
            if validate_decomposition(s, l, &cand).is_ok() {
                return Ok(cand);
            }
        }
        // next combination
        let mut i = c;
        loop {
            if i == 0 {
                return Err(Error::InvalidDecomposition(format!("no tracked product decomposition of G/{l}")));
            }
            i -= 1;
            if pick[i] + (c - i) < circles.len() {
                pick[i] += 1;
                for j in i + 1..c {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Forms inverted by the circle `K/L`, and their product.
fn circle_set(s: &Structure, k: &ConnectedSubgroup, l: &ConnectedSubgroup, ring: &Ring) -> Result<(Vec<IntVec>, Poly)> {
    let forms = s.forms_nontrivial_on(k, l)?;
    let x = set_element(ring, &forms)?;
    Ok((forms, x))
}

#[derive(Clone, Debug)]
pub struct CechData {
    pub lower: ConnectedSubgroup,
    pub cell: ClosedSubgroup,
    pub decomposition: Vec<ConnectedSubgroup>,
    pub sets: Vec<Vec<IntVec>>,
    pub elements: Vec<Poly>,
    /// Position `p` holds `E_{S}^{-1} phi^L Y` for every `|S| = p + 1`.
    pub terms: Vec<Vec<(Vec<usize>, Module)>>,
    /// Degreewise `dim CH^0`, `None` where the Koszul tower does not
    /// stabilize within the bound (an infinite slice).
    pub ch0: BTreeMap<i64, Option<usize>>,
}

pub fn cech(y: &DiagramModule, l: &ConnectedSubgroup, a: &ClosedSubgroup, decomposition: &[ConnectedSubgroup], window: &DegreeWindow, bound: u32) -> Result<CechData> {
    let s = y.structure();
    validate_decomposition(s, l, decomposition)?;
    let m = y.value(&QuotientPair::diagonal(l), a)?;
    let mut sets = Vec::new();
    let mut elements = Vec::new();
    for k in decomposition {
        let (f, x) = circle_set(s, k, l, m.ring())?;
        sets.push(f);
        elements.push(x);
    }
    let mut terms = stable_koszul_summands(m, &sets)?;
    terms.remove(0);
    let mut ch0 = BTreeMap::new();
    for d in window.degrees() {
        let one = DegreeWindow::new(d, d)?;
        let dim = match stable_cohomology(&elements, m, &one, bound, true) {
            Ok(h) => Some(h.dim(0, d)),
            Err(Error::Stabilization(_)) => None,
            Err(e) => return Err(e),
        };
        ch0.insert(d, dim);
    }
    Ok(CechData { lower: l.clone(), cell: a.clone(), decomposition: decomposition.to_vec(), sets, elements, terms, ch0 })
}

/// One degree of the comparison of `CH^0` for two decompositions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceRow {
    pub degree: i64,
    pub dim_a: Option<usize>,
    pub dim_b: Option<usize>,
    /// Generators of the stage-`n` `CH^0` of each side.
    pub generators_a: usize,
    pub generators_b: usize,
    pub a_in_b: bool,
    pub b_in_a: bool,
}

#[derive(Clone, Debug)]
pub struct CechIndependence {
    pub rows: Vec<IndependenceRow>,
    /// Elements of one `CH^0` missing from the other, as `(degree, text)`.
    pub witnesses: Vec<(i64, String)>,
    /// For each circle of one decomposition missing from the other: whether
    /// the fibre `K_inf(x_1, ..., x_c; M[1/x_bridge])` is acyclic.
    pub bridges: Vec<(ConnectedSubgroup, bool)>,
    pub isomorphic: bool,
}

/// Stage-`n` elements of `CH^0` in degree `d`, as elements `m_i / x_i^n` of
/// the localization at every set.
fn stage_elements(m: &Module, xs: &[Poly], sets: &[Vec<IntVec>], total: &Module, n: u32, d: i64) -> Result<Vec<Elem>> {
    let k = koszul(xs, m, n)?;
    let term = k.term(1).ok_or_else(|| Error::Schema("Cech complex without terms".into()))?;
    let slice = term.slice_or_overflow(d)?;
    let g = m.ngens();
    let mut inverse = Vec::with_capacity(sets.len());
    for set in sets {
        let mut p = total.ring().one();
        for a in set {
            p = &p * &total.ring().inverse_form(a)?.pow(n);
        }
        inverse.push(p);
    }
    let mut out = Vec::new();
    for z in k.cocycles(1, d)? {
        let v = term.from_coords(&z, &slice);
        let mut f: Option<Elem> = None;
        for (i, inv) in inverse.iter().enumerate() {
            let e: Elem = v[i * g..(i + 1) * g].iter().map(|p| p * inv).collect();
            match &f {
                None => f = Some(e),
                Some(f0) if !total.elem_eq(f0, &e) => {
                    return Err(Error::Verification(format!("Cech cocycle in degree {d} does not glue")));
                }
                _ => {}
            }
        }
        if let Some(f) = f {
            out.push(f);
        }
    }
    Ok(out)
}

fn localize_at(m: &Module, forms: &[IntVec]) -> Result<Module> {
    let inv = Ring::inverting(m.ring().universe().clone(), forms)?.inverted().clone();
    m.localize(&m.ring().with_inverted(&inv))
}

/// Compare `CH^0` for two decompositions of `G/L` at the cell `A`, inside
/// the localization of `phi^L Y` at every set involved: stage-`n` generators
/// of each side are tested for membership in every localization of the
/// other, and each circle added from the other side is tested for an
/// acyclic fibre.
pub fn cech_independence(
    y: &DiagramModule,
    l: &ConnectedSubgroup,
    a: &ClosedSubgroup,
    dec_a: &[ConnectedSubgroup],
    dec_b: &[ConnectedSubgroup],
    window: &DegreeWindow,
    stage: u32,
) -> Result<CechIndependence> {
    let ca = cech(y, l, a, dec_a, window, stage)?;
    let cb = cech(y, l, a, dec_b, window, stage)?;
    let m = y.value(&QuotientPair::diagonal(l), a)?;
    let all: Vec<IntVec> = ca.sets.iter().chain(&cb.sets).flatten().cloned().collect();
    let total = localize_at(m, &all)?;
    let into_total = |forms: &[IntVec]| -> Result<ModMap> { ModMap::localization(&localize_at(m, forms)?, &total) };
    let maps_a: Vec<ModMap> = ca.sets.iter().map(|f| into_total(f)).collect::<Result<_>>()?;
    let maps_b: Vec<ModMap> = cb.sets.iter().map(|f| into_total(f)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut witnesses = Vec::new();
    for d in window.degrees() {
        let ea = stage_elements(m, &ca.elements, &ca.sets, &total, stage, d)?;
        let eb = stage_elements(m, &cb.elements, &cb.sets, &total, stage, d)?;
        let mut check = |elems: &[Elem], maps: &[ModMap], side: &str| -> bool {
            let mut ok = true;
            for f in elems {
                if maps.iter().any(|g| g.lift(f).is_none()) {
                    ok = false;
                    witnesses.push((d, format!("{side}: {f:?}")));
                }
            }
            ok
        };
        let a_in_b = check(&ea, &maps_b, "first decomposition element outside the second");
        let b_in_a = check(&eb, &maps_a, "second decomposition element outside the first");
        rows.push(IndependenceRow {
            degree: d,
            dim_a: ca.ch0[&d],
            dim_b: cb.ch0[&d],
            generators_a: ea.len(),
            generators_b: eb.len(),
            a_in_b,
            b_in_a,
        });
    }
    let mut bridges = Vec::new();
    for (k, set) in cb.decomposition.iter().zip(&cb.sets) {
        if !dec_a.contains(k) {
            bridges.push((k.clone(), absorbs_ideal(&localize_at(m, set)?, &ca.elements)?));
        }
    }
    for (k, set) in ca.decomposition.iter().zip(&ca.sets) {
        if !dec_b.contains(k) {
            bridges.push((k.clone(), absorbs_ideal(&localize_at(m, set)?, &cb.elements)?));
        }
    }
    let isomorphic = rows.iter().all(|r| r.a_in_b && r.b_in_a && r.dim_a == r.dim_b) && bridges.iter().all(|b| b.1);
    Ok(CechIndependence { rows, witnesses, bridges, isomorphic })
}
