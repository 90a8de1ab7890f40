//! Property tests for the invariants of each layer.

use std::sync::Arc;

use num_rational::Ratio;
use proptest::prelude::*;

use tormod::algebra::complex::stable_cohomology;
use tormod::algebra::{DegreeWindow, Elem, ModMap, Module, Poly, Ring, Universe, Q};
use tormod::diagram::sphere;
use tormod::experiments::{check_exactness, cousin_resolution_rank1};
use tormod::family::{euler_value, Structure};
use tormod::functors::{extendedize, torsion_functor};
use tormod::io::{subgroup_from_doc, subgroup_to_doc};
use tormod::torus::{quotient_image, Character, ClosedSubgroup, ConnectedSubgroup, TrackedPoset, VirtualRepresentation};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn circle12() -> Arc<Structure> {
    Structure::new(TrackedPoset::generate(1, &[], &[Character(vec![1]), Character(vec![2])]).unwrap()).unwrap()
}

fn rank2() -> Arc<Structure> {
    let circles: Vec<ConnectedSubgroup> = [[1, 0], [0, 1], [1, 1]].iter().map(|c| ConnectedSubgroup::circle(c)).collect();
    Structure::new(TrackedPoset::generate(2, &circles, &[]).unwrap()).unwrap()
}

const RANK1_CHARS: [[i64; 1]; 3] = [[0], [1], [2]];
const RANK2_CHARS: [[i64; 2]; 4] = [[0, 0], [1, 0], [0, 1], [1, -1]];

/// A virtual representation with characters drawn from a tracked list.
fn virtual_rep<const R: usize>(chars: &'static [[i64; R]], max: usize) -> impl Strategy<Value = VirtualRepresentation> {
    let pick = move |ix: Vec<usize>| ix.into_iter().map(|i| Character(chars[i].to_vec())).collect::<Vec<_>>();
    (prop::collection::vec(0..chars.len(), 0..=max), prop::collection::vec(0..chars.len(), 0..=max))
        .prop_map(move |(p, n)| VirtualRepresentation::new(pick(p), pick(n)))
}

fn cochar() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-3i64..=3, 2).prop_filter("nonzero", |v| v.iter().any(|x| *x != 0))
}

fn finite_gen() -> impl Strategy<Value = Vec<Ratio<i64>>> {
    prop::collection::vec((0i64..6, 1i64..=4).prop_map(|(n, d)| Ratio::new(n, d)), 2)
}

fn closed_subgroup() -> impl Strategy<Value = ClosedSubgroup> {
    (prop::collection::vec(cochar(), 0..=2), prop::collection::vec(finite_gen(), 0..=2)).prop_map(|(c, f)| ClosedSubgroup::from_descriptor(2, &c, &f))
}

fn window(lo: i64, hi: i64) -> DegreeWindow {
    DegreeWindow::new(lo, hi).unwrap()
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn descriptors_are_canonical(a in closed_subgroup()) {
        prop_assert_eq!(subgroup_from_doc(&subgroup_to_doc(&a), 2, "").unwrap(), a.clone());
        prop_assert_eq!(ClosedSubgroup::from_descriptor(2, &a.cocharacters(), &a.finite_generators()), a);
    }

    #[test]
    fn containment_is_a_lattice(a in closed_subgroup(), b in closed_subgroup()) {
        let meet = a.intersect(&b);
        let join = a.product(&b);
        prop_assert!(a.contains(&a));
        prop_assert!(a.contains(&meet) && b.contains(&meet));
        prop_assert!(join.contains(&a) && join.contains(&b));
        if a.contains(&b) && b.contains(&a) {
            prop_assert_eq!(&a, &b);
        }
        if a.contains(&b) {
            prop_assert_eq!(meet, b.clone());
            prop_assert_eq!(join, a.clone());
        }
    }

    #[test]
    fn quotient_images_have_the_right_identity_component(f in prop::collection::vec(finite_gen(), 0..=2), k in cochar()) {
        let fin = ClosedSubgroup::from_descriptor(2, &[], &f);
        let k = ConnectedSubgroup::circle(&k);
        prop_assert_eq!(quotient_image(&fin, &k).identity_component(), k);
    }

    #[test]
    fn fixed_points_are_additive(v in virtual_rep(&RANK2_CHARS, 3), w in virtual_rep(&RANK2_CHARS, 3), a in closed_subgroup()) {
        prop_assert_eq!(v.sum(&w).fixed(&a), v.fixed(&a).sum(&w.fixed(&a)));
    }

    #[test]
    fn euler_classes_are_multiplicative(v in virtual_rep(&RANK2_CHARS, 3), w in virtual_rep(&RANK2_CHARS, 3)) {
        let s = rank2();
        for a in s.cells(s.base()) {
            prop_assert_eq!(euler_value(&v.sum(&w), &a), euler_value(&v, &a).mul(&euler_value(&w, &a)));
        }
    }
}

fn poly_ring(rank: usize) -> Ring {
    let basis = tormod::lattice::identity(rank);
    Ring::polynomial(Universe::new(rank, basis.clone(), basis).unwrap())
}

/// A homogeneous polynomial of the given degree in the first `rank` variables.
fn homogeneous(ring: &Ring, rank: usize, degree: i64, coeffs: &[i64]) -> Poly {
    if degree < 0 || degree % 2 != 0 {
        return ring.zero();
    }
    let n = (degree / 2) as u32;
    let mut terms = Vec::new();
    let monos: Vec<Vec<u32>> = if rank == 1 { vec![vec![n]] } else { (0..=n).map(|a| vec![a, n - a]).collect() };
    for (i, m) in monos.into_iter().enumerate() {
        let c = coeffs[i % coeffs.len()];
        if c != 0 {
            let mut e = m;
            e.resize(ring.nvars(), 0);
            terms.push((e, Q::from_integer(c.into())));
        }
    }
    Poly::from_terms(ring.nvars(), terms)
}

/// A map from a free module to a presented module, from integer choices.
#[derive(Clone, Debug)]
struct MapSpec {
    rank: usize,
    target: Vec<i64>,
    relations: Vec<i64>,
    source: Vec<i64>,
    coeffs: Vec<i64>,
}

fn map_spec() -> impl Strategy<Value = MapSpec> {
    (
        1usize..=2,
        prop::collection::vec(0i64..=1, 1..=2),
        prop::collection::vec(1i64..=3, 0..=2),
        prop::collection::vec(1i64..=3, 1..=3),
        prop::collection::vec(-2i64..=2, 1..=7),
    )
        .prop_map(|(rank, t, r, s, coeffs)| MapSpec {
            rank,
            target: t.into_iter().map(|d| 2 * d).collect(),
            relations: r.into_iter().map(|d| 2 * d).collect(),
            source: s.into_iter().map(|d| 2 * d).collect(),
            coeffs,
        })
}

fn build(spec: &MapSpec) -> ModMap {
    let ring = poly_ring(spec.rank);
    let mut k = 0;
    let mut elem = |degree: i64| -> Elem {
        spec.target
            .iter()
            .map(|t| {
                k += 1;
                let rot: Vec<i64> = spec.coeffs.iter().cycle().skip(k).take(spec.coeffs.len()).copied().collect();
                homogeneous(&ring, spec.rank, degree - t, &rot)
            })
            .collect()
    };
    let relations: Vec<Elem> = spec.relations.iter().map(|d| elem(*d)).collect();
    let images: Vec<Elem> = spec.source.iter().map(|d| elem(*d)).collect();
    let target = Module::new(ring.clone(), spec.target.clone(), relations).unwrap();
    ModMap::new(Module::free(ring, spec.source.clone()), target, images, 0).unwrap()
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn kernel_and_cokernel_are_exact(spec in map_spec()) {
        let f = build(&spec);
        let (k, inc) = f.kernel().unwrap();
        let (c, proj) = f.cokernel().unwrap();
        prop_assert!(inc.compose(&f).unwrap().is_zero());
        prop_assert!(f.compose(&proj).unwrap().is_zero());
        for d in window(-2, 10).degrees() {
            let r = f.rank_in_degree(d).unwrap();
            prop_assert_eq!(k.dim(d).unwrap() + r, f.source().dim(d).unwrap(), "kernel in degree {}", d);
            prop_assert_eq!(r + c.dim(d).unwrap(), f.target().dim(d).unwrap(), "cokernel in degree {}", d);
            prop_assert_eq!(inc.rank_in_degree(d).unwrap(), k.dim(d).unwrap());
        }
    }

    #[test]
    fn localization_is_idempotent(spec in map_spec()) {
        let spec = MapSpec { rank: 1, ..spec };
        let m = build(&spec).target().clone();
        let uni = m.ring().universe().clone();
        let laurent = Ring::inverting(uni, &[vec![1]]).unwrap();
        let once = m.localize(&laurent).unwrap();
        let twice = once.localize(&laurent).unwrap();
        let canonical = ModMap::localization(&once, &twice).unwrap();
        prop_assert!(canonical.bijective_in(&window(-8, 8)).unwrap());
    }

    #[test]
    fn koszul_cohomology_ignores_order(spec in map_spec()) {
        let spec = MapSpec { rank: 2, ..spec };
        let m = build(&spec).target().clone();
        let r = m.ring().clone();
        let w = window(-8, 4);
        let xy = stable_cohomology(&[r.var(0), r.var(1)], &m, &w, 8, false).unwrap();
        let yx = stable_cohomology(&[r.var(1), r.var(0)], &m, &w, 8, false).unwrap();
        prop_assert_eq!(xy.dims, yx.dims);
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn spheres_are_quasi_coherent_and_extended(v1 in virtual_rep(&RANK1_CHARS, 3), v2 in virtual_rep(&RANK2_CHARS, 2)) {
        let w = window(-4, 4);
        for (s, v) in [(circle12(), v1), (rank2(), v2)] {
            let y = sphere(&s, &v).unwrap();
            prop_assert!(y.is_quasicoherent(&w).unwrap());
            prop_assert!(y.is_extended(&w).unwrap());
        }
    }

    #[test]
    fn extended_replacement_is_idempotent(v1 in virtual_rep(&RANK1_CHARS, 2), v2 in virtual_rep(&RANK2_CHARS, 2)) {
        let w = window(-4, 4);
        for (s, v) in [(circle12(), v1), (rank2(), v2)] {
            let e = extendedize(&sphere(&s, &v).unwrap(), &w).unwrap();
            prop_assert!(e.lambda.iso_reports(&w).unwrap().iter().all(|r| r.2.bijective));
            let again = extendedize(&e.module, &w).unwrap();
            prop_assert!(again.lambda.iso_reports(&w).unwrap().iter().all(|r| r.2.bijective));
        }
    }

    #[test]
    fn torsion_functor_fixes_spheres_and_is_idempotent(v in virtual_rep(&RANK1_CHARS, 2)) {
        let w = window(-6, 6);
        let y = sphere(&circle12(), &v).unwrap();
        let r = torsion_functor(&y, &w, 8).unwrap();
        prop_assert!(r.counit.iso_reports(&w).unwrap().iter().all(|x| x.2.bijective));
        let again = torsion_functor(&r.module, &w, 8).unwrap();
        prop_assert!(again.counit.iso_reports(&w).unwrap().iter().all(|x| x.2.bijective));
    }

    #[test]
    fn cousin_resolutions_are_exact_and_stay_exact(v in virtual_rep(&RANK1_CHARS, 2), u in virtual_rep(&RANK1_CHARS, 2)) {
        let s = circle12();
        let w = window(-8, 8);
        let c = cousin_resolution_rank1(&s, &v, &w).unwrap();
        prop_assert!(check_exactness(&c, &w).unwrap().exact());
        prop_assert!(check_exactness(&c.suspend(&u).unwrap(), &w).unwrap().exact());
    }
}
