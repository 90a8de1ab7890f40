//! Change-of-groups and adjoint functors on diagram modules: geometric fixed
//! points, inflation, the comparison substituting for a left adjoint of
//! fixed points, the extended replacement `k^!` and the torsion functor
//! `Gamma_h`, with their Cech complexes.

pub mod cech;
pub mod fixed;
pub mod kbang;
pub mod torsion;

use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::mixed::{preimage_of_images, truncated_pullback};
use crate::algebra::{linalg, DegreeWindow, ModMap, Module, Q};
use crate::diagram::DiagramModule;
use crate::error::{Error, Result};
use crate::family::euler_value;
use crate::spheres::{element_systems, ElementSystem};
use crate::torus::{Character, ConnectedSubgroup, QuotientPair, VirtualRepresentation};

pub use cech::{cech, cech_independence, default_decomposition, CechData, CechIndependence};
pub use fixed::{geometric_fixed_points, inflate, left_phi_comparison, LeftPhiRow};
pub use kbang::{adjunction_check_kbang, extendedize, AdjunctionRow, Extendedization};
pub use torsion::{torsion_functor, TorsionResult};

/// Default cap on the number of tower stages tried beyond the warm-up.
pub const DEFAULT_TOWER_BOUND: u32 = 8;

/// How a limit was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum LimitStrategy {
    /// Every leg is injective: the limit is a submodule of the source.
    Preimage,
    /// A single leg over a rank-one universe, computed in degrees `>= lo`.
    TruncatedPullback,
}

/// One leg of a limit over a source: `f: source -> T` and `g: N -> T`.
#[derive(Clone, Debug)]
pub struct Leg {
    pub f: ModMap,
    pub g: ModMap,
}

/// The limit of a source and legs: a module with maps to the source and to
/// every `N_i`, compatible through the `f_i` and `g_i`.
#[derive(Clone, Debug)]
pub struct Limit {
    pub module: Module,
    pub to_source: ModMap,
    pub to_legs: Vec<ModMap>,
    pub strategy: LimitStrategy,
}

pub fn limit(source: &Module, legs: &[Leg], lo: i64) -> Result<Limit> {
    if legs.iter().all(|l| l.g.is_injective()) {
        let pairs: Vec<(&ModMap, &ModMap)> = legs.iter().map(|l| (&l.f, &l.g)).collect();
        let (module, to_source) = preimage_of_images(source, &pairs)?;
        let mut to_legs = Vec::with_capacity(legs.len());
        for l in legs {
            let mut images = Vec::with_capacity(module.ngens());
            for x in to_source.images() {
                let y = l.f.apply(x);
                images.push(l.g.lift(&y).ok_or_else(|| Error::Verification("limit element does not lift through an injective leg".into()))?);
            }
            to_legs.push(ModMap::new(module.clone(), l.g.source().clone(), images, 0)?);
        }
        return Ok(Limit { module, to_source, to_legs, strategy: LimitStrategy::Preimage });
    }
    if legs.len() == 1 && source.ring().nu() <= 1 {
        let (module, to_source, to_leg) = truncated_pullback(&legs[0].f, &legs[0].g, lo)?;
        return Ok(Limit { module, to_source, to_legs: vec![to_leg], strategy: LimitStrategy::TruncatedPullback });
    }
    Err(Error::Unsupported(format!("limit over {} legs with non-injective maps in rank {}", legs.len(), source.ring().nu())))
}

fn diag(k: &ConnectedSubgroup) -> QuotientPair {
    QuotientPair::diagonal(k)
}

/// Slice coordinates of `x_{K,B}` for the `K` accepted by `keep`, in the
/// order of subgroups and cells.
pub fn system_coords_where(y: &DiagramModule, sys: &ElementSystem, keep: impl Fn(&ConnectedSubgroup) -> bool) -> Result<Vec<Q>> {
    let s = y.structure();
    let mut out = Vec::new();
    for k in s.subgroups().into_iter().filter(|k| keep(k)) {
        for b in s.cells(&k) {
            let m = y.value(&diag(&k), &b)?;
            let slice = m.slice_or_overflow(sys.degree - 2 * sys.representation.fixed_dim(&b))?;
            let x = sys.at(&k, &b).ok_or_else(|| Error::Schema(format!("element system has no value at {k}, {b}")))?;
            out.extend(m.coords(x, &slice)?);
        }
    }
    Ok(out)
}

pub fn system_coords(y: &DiagramModule, sys: &ElementSystem) -> Result<Vec<Q>> {
    system_coords_where(y, sys, |_| true)
}

/// `x_{K,B} -> e(U^B) x_{K,B}`: the system of the composite with the Euler
/// map `S^{V - U} -> S^V`.
pub fn euler_transition(y: &DiagramModule, sys: &ElementSystem, u: &VirtualRepresentation) -> Result<ElementSystem> {
    let s = y.structure();
    let mut values = BTreeMap::new();
    for (k, cells) in &sys.values {
        let ring = s.ring(k, k)?;
        let mut out = BTreeMap::new();
        for (b, x) in cells {
            let e = euler_value(u, b).in_ring(&ring)?;
            out.insert(b.clone(), x.iter().map(|p| p * &e).collect());
        }
        values.insert(k.clone(), out);
    }
    Ok(ElementSystem { representation: sys.representation.difference(u), degree: sys.degree, values })
}

/// `colim_n [S^{W - nU}, Y]_d` in every degree of a window, along the Euler
/// maps of `U`.
#[derive(Clone, Debug)]
pub struct StabilizedColimit {
    pub representation: VirtualRepresentation,
    pub tower: VirtualRepresentation,
    /// Degree to the stage at which the tower became constant.
    pub stages: BTreeMap<i64, u32>,
    /// Degree to the dimensions seen at each stage tried.
    pub history: BTreeMap<i64, Vec<usize>>,
    /// Degree to a basis of the colimit, as systems at the stable stage.
    pub systems: BTreeMap<i64, Vec<ElementSystem>>,
    /// The colimit as a graded vector space over the coefficient field.
    pub value: Module,
}

impl StabilizedColimit {
    pub fn dim(&self, d: i64) -> usize {
        self.systems.get(&d).map_or(0, Vec::len)
    }
}

/// The tower representation: one copy of every tracked form nontrivial on
/// `m`, and of every basis character of `Ann(B)` nontrivial on `m` for the
/// cells `B` of the base, so that `e(U^B)` is a non-unit at every cell with
/// a character trivial on it.
pub fn tower_step(y: &DiagramModule, m: &ConnectedSubgroup) -> Result<VirtualRepresentation> {
    let s = y.structure();
    let mut chars: BTreeSet<Vec<i64>> = s.forms_nontrivial_on(m, s.base())?.into_iter().collect();
    for b in s.cells(s.base()) {
        chars.extend(b.ann().iter().filter(|c| !Character((*c).clone()).is_trivial_on(m.as_closed())).cloned());
    }
    Ok(VirtualRepresentation::new(chars.into_iter().map(Character).collect(), vec![]))
}

/// First stage at which every element degree on the diagonal lies above all
/// generator and relation degrees, where the Euler transitions of rank one
/// are isomorphisms.
fn warm_up(y: &DiagramModule, w: &VirtualRepresentation, d: i64) -> Result<u32> {
    let s = y.structure();
    let mut need = 0i64;
    for k in s.subgroups() {
        for b in s.cells(&k) {
            let m = y.value(&diag(&k), &b)?;
            let mut top = m.degrees().iter().max().copied();
            for r in m.relations() {
                top = top.max(m.degree_of(r)?);
            }
            if let Some(g) = top {
                need = need.max(g - (d - 2 * w.fixed_dim(&b)));
            }
        }
    }
    Ok(((need.max(0) + 1) / 2) as u32)
}

/// Stabilize `[S^{W - nU}, Y]_d` per degree: a degree is stable once two
/// consecutive transitions are bijective; `bound` caps the stages tried
/// beyond the warm-up.
pub fn stabilized_systems(
    y: &DiagramModule,
    w: &VirtualRepresentation,
    u: &VirtualRepresentation,
    window: &DegreeWindow,
    bound: u32,
) -> Result<StabilizedColimit> {
    let mut stages = BTreeMap::new();
    let mut history = BTreeMap::new();
    let mut systems = BTreeMap::new();
    for d in window.degrees() {
        let n0 = warm_up(y, w, d)?;
        let at = |n: u32| element_systems(y, &w.difference(&u.scale(n as usize)), d);
        let mut tower = vec![at(n0)?];
        let mut streak = 0;
        let mut found = None;
        for n in n0..n0 + bound {
            let next = at(n + 1)?;
            let current = tower.last().expect("stage");
            let mut rows = Vec::with_capacity(current.len());
            for sys in current {
                rows.push(system_coords(y, &euler_transition(y, sys, u)?)?);
            }
            let ncols = match next.first() {
                Some(sys) => system_coords(y, sys)?.len(),
                None => rows.first().map_or(0, Vec::len),
            };
            let bijective = current.len() == next.len() && linalg::rank(&rows, ncols) == current.len();
            tower.push(next);
            streak = if bijective { streak + 1 } else { 0 };
            if streak == 2 {
                found = Some((n - 1, tower[(n - 1 - n0) as usize].clone()));
                break;
            }
        }
        let dims: Vec<usize> = tower.iter().map(Vec::len).collect();
        let Some((n, basis)) = found else {
            return Err(Error::Stabilization(format!("tower [S^(W - nU), Y] did not stabilize in degree {d} within {bound} stages")));
        };
        stages.insert(d, n);
        history.insert(d, dims);
        systems.insert(d, basis);
    }
    let s = y.structure();
    let ring = s.ring(&s.top(), &s.top())?;
    let degrees: Vec<i64> = systems.iter().flat_map(|(d, v)| std::iter::repeat(*d).take(v.len())).collect();
    let value = Module::free(ring, degrees);
    Ok(StabilizedColimit { representation: w.clone(), tower: u.clone(), stages, history, systems, value })
}
