//! Geometric fixed points, inflation, and the comparison of maps into
//! `Phi^M X` with maps out of inflated spheres into `X` smashed with
//! `S^{infinity V(M)}`.

use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::{linalg, DegreeWindow, ModMap, RingMap};
use crate::diagram::{transport, Cells, DiagramModule, ExtendedModule};
use crate::error::{Error, Result};
use crate::spheres::element_systems;
use crate::torus::{ConnectedSubgroup, QuotientPair, VirtualRepresentation};

use super::{stabilized_systems, system_coords_where, tower_step, StabilizedColimit};

/// `Phi^M X`: the restriction of `X` to the pairs `M <= L <= K`.
pub fn geometric_fixed_points(x: &DiagramModule, m: &ConnectedSubgroup) -> Result<DiagramModule> {
    let s = x.structure();
    s.tracked().require_tracked(m)?;
    let sub = s.over_quotient(m)?;
    let keep: BTreeSet<QuotientPair> = sub.vertices().into_iter().collect();
    let values = x.values().iter().filter(|(v, _)| keep.contains(v)).map(|(v, c)| (v.clone(), c.clone())).collect();
    let inside = |e: &(QuotientPair, QuotientPair)| keep.contains(&e.0) && keep.contains(&e.1);
    let beta = x.beta_maps().iter().filter(|(e, _)| inside(e)).map(|(e, c)| (e.clone(), c.clone())).collect();
    let alpha = x.alpha_maps().iter().filter(|(e, _)| inside(e)).map(|(e, c)| (e.clone(), c.clone())).collect();
    DiagramModule::new(sub, values, beta, alpha)
}

/// Inflation of an extended module over `G/M` to `G`, by extension of
/// scalars: `phi^H(infl Y) = O_{F/H} (x) phi^{HM} Y` at the cell over `HM`,
/// and the basing maps of `Y` for `KM > LM` (identities when `KM = LM`).
pub fn inflate(y: &DiagramModule) -> Result<DiagramModule> {
    let sm = y.structure();
    let m = sm.base().clone();
    let s = sm.full()?;
    let ey = ExtendedModule::from_diagram(y)?;
    let over = |h: &ConnectedSubgroup| -> Result<ConnectedSubgroup> {
        let hm = h.product(&m);
        s.tracked().require_tracked(&hm)?;
        Ok(hm)
    };
    let mut phi = BTreeMap::new();
    for h in s.subgroups() {
        let hm = over(&h)?;
        let rm = RingMap::inflation(&sm.ring(&hm, &hm)?, &s.ring(&h, &h)?)?;
        let mut cells = Cells::new();
        for b in s.cells(&h) {
            cells.insert(b.clone(), ey.phi(&hm, &s.cell_image(&b, &hm))?.base_change(&rm)?);
        }
        phi.insert(h, cells);
    }
    let mut basing = BTreeMap::new();
    for l in s.subgroups() {
        let lm = over(&l)?;
        for k in s.above(&l) {
            if k == l {
                continue;
            }
            let km = over(&k)?;
            let vert = s.vertical(&k, &k, &l)?;
            let mut cells = Cells::new();
            for a in s.cells(&l) {
                let ak = s.cell_image(&a, &k);
                let src = phi[&l][&a].clone();
                let tgt = phi[&k][&ak].base_change(&vert)?;
                let (al, akm) = (s.cell_image(&a, &lm), s.cell_image(&ak, &km));
                let images = if lm == km {
                    if al != akm {
                        return Err(Error::Closure(format!("cells {al} and {akm} over {lm} disagree")));
                    }
                    (0..tgt.ngens()).map(|i| tgt.basis_elem(i)).collect()
                } else {
                    if s.cell_image(&al, &km) != akm {
                        return Err(Error::Closure(format!("cell images over {km} disagree")));
                    }
                    let rm = RingMap::inflation(&sm.ring(&km, &lm)?, &s.ring(&k, &l)?)?;
                    transport(ey.basing(&km, &lm, &al)?, &rm)
                };
                cells.insert(a, ModMap::new(src, tgt, images, 0)?);
            }
            basing.insert((k.clone(), l.clone()), cells);
        }
    }
    ExtendedModule::from_covers(s, phi, basing)?.to_diagram()
}

/// One degree of the comparison
/// `[S^W, Phi^M X]_d -> colim_n [S^{W - nU}, X]_d` (`U` the tracked
/// characters nontrivial on `M`), through the restriction `theta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeftPhiRow {
    pub degree: i64,
    pub left_dim: usize,
    pub right_dim: usize,
    pub stage: u32,
    pub theta_rank: usize,
    pub bijective: bool,
}

/// The comparison for the sphere `A = S^W` over `G/M` (whose inflation is
/// the sphere of the same characters over `G`).
pub fn left_phi_comparison(
    w: &VirtualRepresentation,
    x: &DiagramModule,
    m: &ConnectedSubgroup,
    window: &DegreeWindow,
    bound: u32,
) -> Result<(Vec<LeftPhiRow>, StabilizedColimit)> {
    if w.characters().any(|c| !c.is_trivial_on(m.as_closed())) {
        return Err(Error::Schema(format!("representation {w:?} is not a representation of the quotient by {m}")));
    }
    let phix = geometric_fixed_points(x, m)?;
    let u = tower_step(x, m)?;
    let col = stabilized_systems(x, w, &u, window, bound)?;
    let mut rows = Vec::new();
    for d in window.degrees() {
        let left_dim = element_systems(&phix, w, d)?.len();
        let stable = &col.systems[&d];
        let restricted: Vec<_> = stable.iter().map(|sys| system_coords_where(x, sys, |k| k.contains(m))).collect::<Result<_>>()?;
        let ncols = restricted.first().map_or(0, Vec::len);
        let theta_rank = linalg::rank(&restricted, ncols);
        let right_dim = stable.len();
        rows.push(LeftPhiRow {
            degree: d,
            left_dim,
            right_dim,
            stage: col.stages[&d],
            theta_rank,
            bijective: left_dim == right_dim && theta_rank == right_dim,
        });
    }
    Ok((rows, col))
}
