//! The right adjoint `k^!` to the inclusion of extended modules: fixed-point
//! modules built by increasing codimension as limits of a diagonal entry and
//! the inflated fixed points above it, with the counit `lambda: k^! M -> M`.

use std::collections::BTreeMap;

use crate::algebra::{linalg, DegreeWindow, ModMap, Module};
use crate::diagram::{Cells, DiagramMap, DiagramModule, ExtendedModule};
use crate::error::{Error, Result};
use crate::spheres::{element_systems, system_failures, ElementSystem};
use crate::torus::{ClosedSubgroup, ConnectedSubgroup, QuotientPair, VirtualRepresentation};

use super::{limit, system_coords, Leg, LimitStrategy};

fn pair(k: &ConnectedSubgroup, l: &ConnectedSubgroup) -> QuotientPair {
    QuotientPair { upper: k.clone(), lower: l.clone() }
}

#[derive(Clone, Debug)]
pub struct Extendedization {
    pub module: DiagramModule,
    pub lambda: DiagramMap,
    /// How each fixed-point module was computed (absent where no limit was
    /// needed, at the top).
    pub strategies: BTreeMap<(ConnectedSubgroup, ClosedSubgroup), LimitStrategy>,
    /// Lower degree bound below which truncated limits are not computed.
    pub truncated_below: Option<i64>,
}

/// `k^! M` and `lambda`. Each `phi^L` is the limit of `M(L, L)` and the
/// `R(K, L) (x) phi^K` over tracked `K > L`, mapped into `M(K, L)` by
/// `beta` and by `alpha` after `lambda_K`; truncated limits start at
/// `window.lo`.
pub fn extendedize(m: &DiagramModule, window: &DegreeWindow) -> Result<Extendedization> {
    let s = m.structure().clone();
    let mut order = s.subgroups();
    order.sort_by_key(|k| std::cmp::Reverse(k.dim()));
    let mut phi: BTreeMap<ConnectedSubgroup, Cells<Module>> = BTreeMap::new();
    let mut lam: BTreeMap<ConnectedSubgroup, Cells<ModMap>> = BTreeMap::new();
    let mut basing: BTreeMap<(ConnectedSubgroup, ConnectedSubgroup), Cells<ModMap>> = BTreeMap::new();
    let mut strategies = BTreeMap::new();
    let mut truncated = false;
    for l in &order {
        let dl = QuotientPair::diagonal(l);
        let uppers: Vec<ConnectedSubgroup> = s.above(l).into_iter().filter(|k| k != l).collect();
        for a in s.cells(l) {
            let mut legs = Vec::with_capacity(uppers.len());
            for k in &uppers {
                let t = pair(k, l);
                let ak = s.cell_image(&a, k);
                let g = lam[k][&ak].base_change(&s.vertical(k, k, l)?)?.compose(m.alpha(&QuotientPair::diagonal(k), &t, &a)?)?;
                legs.push(Leg { f: m.beta(&dl, &t, &a)?.clone(), g });
            }
            let lim = limit(m.value(&dl, &a)?, &legs, window.lo)?;
            if !legs.is_empty() {
                truncated |= lim.strategy == LimitStrategy::TruncatedPullback;
                strategies.insert((l.clone(), a.clone()), lim.strategy);
            }
            for (k, to) in uppers.iter().zip(lim.to_legs) {
                basing.entry((k.clone(), l.clone())).or_default().insert(a.clone(), to);
            }
            phi.entry(l.clone()).or_default().insert(a.clone(), lim.module);
            lam.entry(l.clone()).or_default().insert(a, lim.to_source);
        }
    }
    let module = ExtendedModule::from_covers(s.clone(), phi, basing)?.to_diagram()?;
    let mut maps: BTreeMap<QuotientPair, Cells<ModMap>> = BTreeMap::new();
    for v in s.vertices() {
        let mut cells = Cells::new();
        for a in s.cells(&v.lower) {
            let (k, l) = (&v.upper, &v.lower);
            let f = if k == l {
                lam[k][&a].clone()
            } else {
                let ak = s.cell_image(&a, k);
                lam[k][&ak].base_change(&s.vertical(k, k, l)?)?.compose(m.alpha(&QuotientPair::diagonal(k), &v, &a)?)?
            };
            cells.insert(a.clone(), f.with_source(module.value(&v, &a)?.clone())?);
        }
        maps.insert(v, cells);
    }
    let lambda = DiagramMap::new(module.clone(), m.clone(), 0, maps)?;
    Ok(Extendedization { module, lambda, strategies, truncated_below: truncated.then_some(window.lo) })
}

/// One degree of `lambda_*: [L, k^! M]_d -> [L, M]_d` for a sphere `L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjunctionRow {
    pub degree: i64,
    pub left_dim: usize,
    pub right_dim: usize,
    pub rank: usize,
    pub bijective: bool,
}

/// Push an element system of `k^! M` forward along `lambda` on the diagonal.
fn push_forward(ext: &Extendedization, sys: &ElementSystem) -> Result<ElementSystem> {
    let mut values = BTreeMap::new();
    for (k, cells) in &sys.values {
        let mut out = Cells::new();
        for (b, x) in cells {
            out.insert(b.clone(), ext.lambda.at(&QuotientPair::diagonal(k), b)?.apply(x));
        }
        values.insert(k.clone(), out);
    }
    Ok(ElementSystem { representation: sys.representation.clone(), degree: sys.degree, values })
}

/// Composition with `lambda` on maps out of the sphere `S^V`, degree by
/// degree: both Hom spaces and the rank of the composite map.
pub fn adjunction_check_kbang(v: &VirtualRepresentation, m: &DiagramModule, ext: &Extendedization, window: &DegreeWindow) -> Result<Vec<AdjunctionRow>> {
    if ext.lambda.target.values() != m.values() {
        return Err(Error::Schema("the extended replacement does not belong to this module".into()));
    }
    let mut rows = Vec::new();
    for d in window.degrees() {
        let left = element_systems(&ext.module, v, d)?;
        let right = element_systems(m, v, d)?;
        let mut images = Vec::with_capacity(left.len());
        for sys in &left {
            let pushed = push_forward(ext, sys)?;
            if let Some(f) = system_failures(m, &pushed)?.first() {
                return Err(Error::Verification(format!("lambda does not carry element systems to element systems: {f}")));
            }
            images.push(system_coords(m, &pushed)?);
        }
        let ncols = images.first().map_or(0, Vec::len);
        let rank = linalg::rank(&images, ncols);
        rows.push(AdjunctionRow {
            degree: d,
            left_dim: left.len(),
            right_dim: right.len(),
            rank,
            bijective: left.len() == right.len() && rank == right.len(),
        });
    }
    Ok(rows)
}
