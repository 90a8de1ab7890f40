//! The torsion functor `Gamma_h`, right adjoint to the inclusion of
//! quasi-coherent extended modules into extended modules.

use std::collections::BTreeMap;

use crate::algebra::{DegreeWindow, ModMap, Module};
use crate::diagram::{Cells, DiagramMap, DiagramModule, ExtendedModule};
use crate::error::{Error, Result};
use crate::family::euler_value;
use crate::torus::{ClosedSubgroup, ConnectedSubgroup, QuotientPair, VirtualRepresentation};

use super::{limit, stabilized_systems, tower_step, Leg, LimitStrategy, StabilizedColimit};

fn pair(k: &ConnectedSubgroup, l: &ConnectedSubgroup) -> QuotientPair {
    QuotientPair { upper: k.clone(), lower: l.clone() }
}

#[derive(Clone, Debug)]
pub struct TorsionResult {
    pub module: DiagramModule,
    pub counit: DiagramMap,
    /// `phi^G Gamma_h Y = Y(infinity V(G))`, presented in the window only.
    pub vertex: StabilizedColimit,
    pub strategies: BTreeMap<(ConnectedSubgroup, ClosedSubgroup), LimitStrategy>,
    /// The window to which the top fixed points were cut down.
    pub vertex_window: DegreeWindow,
    /// Lower degree bound of truncated limits, if any were used.
    pub truncated_below: Option<i64>,
}

/// `lambda_{G -> L}` at the cell `A`: a colimit class represented at stage
/// `n` by the system `x` goes to `e(V_n^A)^{-1} x_{L, A}`.
fn top_leg(y: &DiagramModule, vertex: &StabilizedColimit, l: &ConnectedSubgroup, a: &ClosedSubgroup, target: &Module) -> Result<ModMap> {
    let s = y.structure();
    let g = s.top();
    let ring = s.ring(&g, l)?;
    let source = vertex.value.base_change(&s.vertical(&g, &g, l)?)?;
    let mut images = Vec::with_capacity(source.ngens());
    for (d, systems) in &vertex.systems {
        let vn = vertex.tower.scale(vertex.stages[d] as usize);
        let e = euler_value(&vn, a).inverse().in_ring(&ring)?;
        for sys in systems {
            let x = sys.at(l, a).ok_or_else(|| Error::Schema(format!("system without a value at {l}, {a}")))?;
            images.push(x.iter().map(|p| p * &e).collect());
        }
    }
    ModMap::new(source, target.clone(), images, 0)
}

/// `lambda_{K -> L}` for `L < K < G`: `alpha^Y (1 (x) eps_K)` lifted along
/// the localized horizontal map `E_K^{-1} phi^L Y -> Y(K, L)`, which must be
/// injective with the image reached.
fn middle_leg(y: &DiagramModule, eps_k: &ModMap, k: &ConnectedSubgroup, l: &ConnectedSubgroup, a: &ClosedSubgroup, target: &Module) -> Result<ModMap> {
    let s = y.structure();
    let t = pair(k, l);
    let up = eps_k.base_change(&s.vertical(k, k, l)?)?.compose(y.alpha(&QuotientPair::diagonal(k), &t, a)?)?;
    let beta = y.beta(&QuotientPair::diagonal(l), &t, a)?;
    let local = ModMap::new(target.clone(), beta.target().clone(), beta.images().to_vec(), 0)?;
    if !local.is_injective() {
        return Err(Error::Unsupported(format!("localized horizontal map into {t} at {a} is not injective")));
    }
    let mut images = Vec::with_capacity(up.source().ngens());
    for img in up.images() {
        images.push(local.lift(img).ok_or_else(|| {
            Error::Unsupported(format!("fixed points at {k} do not map into the localization at {t}, cell {a} (not quasi-coherent there)"))
        })?);
    }
    ModMap::new(up.source().clone(), target.clone(), images, 0)
}

/// `Gamma_h Y` for an extended module `Y` and the counit. The top fixed
/// points are the stabilized colimit in the window; every other `phi^L` is
/// the limit of `phi^L Y` and the inflated fixed points of all tracked
/// `K > L`, compared inside `E_K^{-1} phi^L Y`.
pub fn torsion_functor(y: &DiagramModule, window: &DegreeWindow, bound: u32) -> Result<TorsionResult> {
    let s = y.structure().clone();
    let g = s.top();
    let u = tower_step(y, &g)?;
    let vertex = stabilized_systems(y, &VirtualRepresentation::zero(), &u, window, bound)?;
    let mut order = s.subgroups();
    order.sort_by_key(|k| std::cmp::Reverse(k.dim()));
    let mut phi: BTreeMap<ConnectedSubgroup, Cells<Module>> = BTreeMap::new();
    let mut eps: BTreeMap<ConnectedSubgroup, Cells<ModMap>> = BTreeMap::new();
    let mut basing: BTreeMap<(ConnectedSubgroup, ConnectedSubgroup), Cells<ModMap>> = BTreeMap::new();
    let mut strategies = BTreeMap::new();
    let mut truncated = false;
    for l in &order {
        let dl = QuotientPair::diagonal(l);
        for a in s.cells(l) {
            let ya = y.value(&dl, &a)?;
            if *l == g {
                let mut images = Vec::with_capacity(vertex.value.ngens());
                for sys in vertex.systems.values().flatten() {
                    images.push(sys.at(&g, &a).ok_or_else(|| Error::Schema(format!("system without a value at the top cell {a}")))?.clone());
                }
                let to_y = ModMap::new(vertex.value.clone(), ya.clone(), images, 0)?;
                phi.entry(g.clone()).or_default().insert(a.clone(), vertex.value.clone());
                eps.entry(g.clone()).or_default().insert(a, to_y);
                continue;
            }
            let uppers: Vec<ConnectedSubgroup> = s.above(l).into_iter().filter(|k| k != l).collect();
            let mut legs = Vec::with_capacity(uppers.len());
            for k in &uppers {
                let local = ya.localize(&s.ring(k, l)?)?;
                let f = ModMap::localization(ya, &local)?;
                let gmap = if *k == g {
                    top_leg(y, &vertex, l, &a, &local)?
                } else {
                    middle_leg(y, &eps[k][&s.cell_image(&a, k)], k, l, &a, &local)?
                };
                legs.push(Leg { f, g: gmap });
            }
            let lim = limit(ya, &legs, window.lo)?;
            truncated |= lim.strategy == LimitStrategy::TruncatedPullback;
            strategies.insert((l.clone(), a.clone()), lim.strategy);
            for (k, to) in uppers.iter().zip(lim.to_legs) {
                basing.entry((k.clone(), l.clone())).or_default().insert(a.clone(), to);
            }
            phi.entry(l.clone()).or_default().insert(a.clone(), lim.module);
            eps.entry(l.clone()).or_default().insert(a, lim.to_source);
        }
    }
    let module = ExtendedModule::from_covers(s.clone(), phi, basing)?.to_diagram()?;
    let mut maps: BTreeMap<QuotientPair, Cells<ModMap>> = BTreeMap::new();
    for v in s.vertices() {
        let mut cells = Cells::new();
        for a in s.cells(&v.lower) {
            let (k, l) = (&v.upper, &v.lower);
            let f = if k == l {
                eps[k][&a].clone()
            } else {
                eps[k][&s.cell_image(&a, k)].base_change(&s.vertical(k, k, l)?)?.compose(y.alpha(&QuotientPair::diagonal(k), &v, &a)?)?
            };
            cells.insert(a.clone(), f.with_source(module.value(&v, &a)?.clone())?);
        }
        maps.insert(v, cells);
    }
    let counit = DiagramMap::new(module.clone(), y.clone(), 0, maps)?;
    Ok(TorsionResult { module, counit, vertex, strategies, vertex_window: *window, truncated_below: truncated.then_some(window.lo) })
}
