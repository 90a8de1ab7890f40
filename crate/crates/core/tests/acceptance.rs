//! Acceptance suite: one line per criterion. Criteria known to be
//! unattainable as stated are still run in full; their failure is reported
//! with the analysis, and only an unexpected outcome fails the process.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tormod::algebra::complex::{fibre_sequence, stable_cohomology};
use tormod::algebra::{linalg, DegreeWindow, Elem, ModMap, Module, Poly, Ring, Universe, Q};
use tormod::diagram::{sphere, Cells, DiagramModule, ExtendedModule};
use tormod::family::{verify_split_mono, SplitKind, Structure};
use tormod::functors::{
    adjunction_check_kbang, cech_independence, extendedize, geometric_fixed_points, inflate, left_phi_comparison, torsion_functor,
};
use tormod::spheres::{compare_sphere_hom, evaluate};
use tormod::torus::{Character, ConnectedSubgroup, QuotientPair, TrackedPoset, VirtualRepresentation};
use tormod::experiments::{check_exactness, cousin_resolution_rank1, same_diagram, suspension_compatible, torsion_model};
use tormod::Result;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

/// Criteria whose statement cannot hold, with the reason.
const UNATTAINABLE: &[(usize, &str)] = &[
    (
        1,
        "the defining pullback of phi^1 is Q[c] x_{Q[c,1/c]} (Q[c,1/c] (x) phi^G) along multiplication, which is mu^-1(Q[c]); \
         it contains ker(mu) with quotient Q[c], so the dimensions differ by one in every even degree >= 0",
    ),
    (
        6,
        "with the circles (1,0), (0,1), (1,1) the forms x, y and x - y are all inverted at the trivial subgroup; \
         K_inf(x, y; M[1/(x-y)]) is not acyclic and CH^0 of the two decompositions differ by elements such as 1/(x-y)",
    ),
];

fn window(lo: i64, hi: i64) -> DegreeWindow {
    DegreeWindow::new(lo, hi).unwrap()
}

fn semifree() -> Arc<Structure> {
    Structure::new(TrackedPoset::semifree_circle()).unwrap()
}

fn circle(chars: &[i64]) -> Arc<Structure> {
    let chars: Vec<Character> = chars.iter().map(|c| Character(vec![*c])).collect();
    Structure::new(TrackedPoset::generate(1, &[], &chars).unwrap()).unwrap()
}

fn rank2() -> Arc<Structure> {
    let circles: Vec<ConnectedSubgroup> = [[1, 0], [0, 1], [1, 1]].iter().map(|c| ConnectedSubgroup::circle(c)).collect();
    Structure::new(TrackedPoset::generate(2, &circles, &[]).unwrap()).unwrap()
}

fn rep(pos: &[&[i64]], neg: &[&[i64]]) -> VirtualRepresentation {
    let chars = |v: &[&[i64]]| v.iter().map(|c| Character(c.to_vec())).collect();
    VirtualRepresentation::new(chars(pos), chars(neg))
}

fn pair(k: &ConnectedSubgroup, l: &ConnectedSubgroup) -> QuotientPair {
    QuotientPair { upper: k.clone(), lower: l.clone() }
}

/// `c^k` in a ring where the form of the circle may be inverted.
fn c_pow(ring: &Ring, k: i64) -> Poly {
    if k >= 0 {
        ring.linear_form(&[1]).unwrap().pow(k as u32)
    } else {
        ring.inverse_form(&[1]).unwrap().pow((-k) as u32)
    }
}

/// The semifree module `Q[c] -> 0`.
fn semifree_bottom() -> DiagramModule {
    let s = semifree();
    let one = ConnectedSubgroup::trivial(1);
    let g = s.top();
    let phi = BTreeMap::from([
        (one.clone(), Cells::from([(one.as_closed().clone(), Module::free(s.ring(&one, &one).unwrap(), vec![0]))])),
        (g.clone(), Cells::from([(g.as_closed().clone(), Module::zero(s.ring(&g, &g).unwrap()))])),
    ]);
    ExtendedModule::from_covers(s, phi, BTreeMap::new()).unwrap().to_diagram().unwrap()
}

fn criterion_1() -> Result<Outcome> {
    let start = Instant::now();
    let w = window(-20, 20);
    let y = semifree_bottom();
    let r = torsion_functor(&y, &w, 8)?;
    let vertex_ok = w.degrees().all(|d| r.vertex.dim(d) == usize::from(d % 2 == 0));
    let one = ConnectedSubgroup::trivial(1);
    let g = r.module.structure().top();
    let a = one.as_closed().clone();
    // beta: N -> Q[c,1/c] (x) phi^G, and mu sends the generator of degree e to c^(e/2)
    let beta = r.module.beta(&QuotientPair::diagonal(&one), &pair(&g, &one), &a)?;
    let t = beta.target();
    let ring = t.ring().clone();
    let laurent = Module::free(ring.clone(), vec![0]);
    let mu = ModMap::new(t.clone(), laurent, t.degrees().iter().map(|e| vec![c_pow(&ring, e / 2)]).collect(), 0)?;
    let (kernel, _) = mu.kernel()?;
    let into_kernel = beta.compose(&mu)?.is_zero();
    let n = beta.source();
    let mut bad = Vec::new();
    let mut preimage_matches = true;
    for d in w.degrees() {
        let (nd, kd) = (n.dim(d).unwrap_or(0), kernel.dim(d).unwrap_or(0));
        if nd != kd || beta.rank_in_degree(d)? != nd {
            bad.push(d);
        }
        preimage_matches &= nd == kd + usize::from(d >= 0 && d % 2 == 0);
    }
    let elapsed = start.elapsed();
    let passed = vertex_ok && into_kernel && bad.is_empty() && elapsed < Duration::from_secs(30);
    Ok(Outcome::new(
        passed,
        format!(
            "vertex Q[c,1/c]: {vertex_ok}; N in ker(mu): {into_kernel}; degrees where N != ker(mu): {bad:?}; N = mu^-1(Q[c]) degreewise: {preimage_matches}; {:.1}s",
            elapsed.as_secs_f64()
        ),
    ))
}

fn criterion_2() -> Result<Outcome> {
    let y = semifree_bottom();
    let z = VirtualRepresentation::from_chars(&[&[1]]);
    let mut failures = Vec::new();
    for k in 0..=5usize {
        // element degrees [0, 20] are hom degrees shifted by 2 dim(kz)
        let shift = 2 * k as i64;
        let ev = evaluate(&y, &z.scale(k), &window(-shift, 20 - shift))?;
        for sl in &ev.slices {
            let expect = usize::from(sl.element_degree >= 0 && sl.element_degree % 2 == 0);
            if sl.image_dim != expect || sl.ambient_dim != expect {
                failures.push((k, sl.element_degree));
            }
        }
    }
    Ok(Outcome::new(failures.is_empty(), format!("Y(c^k) = Q[c] for k = 0..5 in [0, 20]; failures {failures:?}")))
}

fn criterion_7() -> Result<Outcome> {
    let w = window(-10, 10);
    let mut detail = Vec::new();
    let mut passed = true;
    for rank in [1usize, 2] {
        let basis = tormod::lattice::identity(rank);
        let r = Ring::polynomial(Universe::new(rank, basis.clone(), basis)?);
        let m = Module::free(r.clone(), vec![0]);
        let xs: Vec<Poly> = (0..rank).map(|i| r.var(i)).collect();
        let rows = fibre_sequence(&xs, &m, &w, 8)?;
        let exact = rows.iter().all(|row| row.exact);
        passed &= exact;
        detail.push(format!("rank {rank} long exact sequence: {exact}"));
        if rank == 2 {
            let h = stable_cohomology(&xs, &m, &w, 8, false)?;
            // oracle: x^-a y^-b with a, b >= 1 span H^2 in degree -2(a + b)
            let ok = w.degrees().all(|d| h.dim(2, d) == if d % 2 == 0 && d <= -4 { (-d / 2 - 1) as usize } else { 0 });
            let shown: Vec<usize> = (0..4).map(|i| h.dim(2, -4 - 2 * i)).collect();
            passed &= ok;
            detail.push(format!("H^2 dims from degree -4 down {shown:?}: {ok}"));
        }
    }
    Ok(Outcome::new(passed, detail.join("; ")))
}

fn criterion_8() -> Result<Outcome> {
    let w = window(0, 16);
    let s1 = circle(&[1]);
    let s2 = rank2();
    let cases = [
        (s1.clone(), ConnectedSubgroup::whole(1), ConnectedSubgroup::trivial(1)),
        (s2.clone(), ConnectedSubgroup::circle(&[1, 0]), ConnectedSubgroup::trivial(2)),
    ];
    let mut detail = Vec::new();
    let mut passed = true;
    for (s, k, l) in &cases {
        for kind in [SplitKind::Inflation, SplitKind::Localization] {
            let ok = verify_split_mono(s, kind, k, l, &w)?.passed();
            passed &= ok;
            detail.push(format!("{kind:?} at {k}: {ok}"));
        }
    }
    Ok(Outcome::new(passed, detail.join("; ")))
}

/// Exponent vectors of the monomials of total degree `n` in `x, y`, padded
/// with zeros for the unused inverse variables.
fn monomials(n: u32) -> Vec<Vec<u32>> {
    (0..=n).map(|a| vec![a, n - a, 0, 0]).collect()
}

const NVARS: usize = 4;

fn random_homogeneous(rng: &mut ChaCha8Rng, n: i64) -> Poly {
    if n < 0 || rng.gen_bool(0.3) {
        return Poly::zero(NVARS);
    }
    let terms = monomials((n / 2) as u32).into_iter().filter_map(|e| {
        let c: i64 = rng.gen_range(-3..=3);
        (c != 0).then(|| (e, Q::from_integer(c.into())))
    });
    Poly::from_terms(NVARS, terms.collect::<Vec<_>>())
}

fn random_elem(rng: &mut ChaCha8Rng, degree: i64, target: &[i64]) -> Elem {
    target.iter().map(|t| random_homogeneous(rng, degree - t)).collect()
}

/// Coordinates of a free element of degree `d` on the monomial basis.
fn free_coords(v: &[Poly], degrees: &[i64], d: i64) -> Vec<Q> {
    let mut out = Vec::new();
    for (p, t) in v.iter().zip(degrees) {
        let n = d - t;
        if n < 0 || n % 2 != 0 {
            continue;
        }
        for e in monomials((n / 2) as u32) {
            out.push(p.coeff(&e));
        }
    }
    out
}

/// `dim ker(F_d -> (T / R)_d)` by enumerating monomial multiples.
fn brute_kernel_dim(images: &[Elem], source: &[i64], relations: &[Elem], rel_degrees: &[i64], target: &[i64], d: i64) -> usize {
    let multiples = |gens: &[Elem], degs: &[i64]| -> Vec<Vec<Q>> {
        let mut cols = Vec::new();
        for (g, e) in gens.iter().zip(degs) {
            let n = d - e;
            if n < 0 || n % 2 != 0 {
                continue;
            }
            for m in monomials((n / 2) as u32) {
                let shifted: Elem = g.iter().map(|p| p.mul_term(&m, &Q::one())).collect();
                cols.push(free_coords(&shifted, target, d));
            }
        }
        cols
    };
    let ncols: usize = target.iter().map(|t| if d >= *t && (d - t) % 2 == 0 { ((d - t) / 2 + 1) as usize } else { 0 }).sum();
    let rel = multiples(relations, rel_degrees);
    let img = multiples(images, source);
    let mut both = rel.clone();
    both.extend(img.iter().cloned());
    img.len() - (linalg::rank(&both, ncols) - linalg::rank(&rel, ncols))
}

fn criterion_12() -> Result<Outcome> {
    let start = Instant::now();
    let w = window(-10, 10);
    let basis = tormod::lattice::identity(2);
    let ring = Ring::polynomial(Universe::new(2, basis.clone(), basis)?);
    assert_eq!(ring.nvars(), NVARS);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut mismatches = Vec::new();
    for case in 0..50 {
        let target: Vec<i64> = (0..rng.gen_range(1..=3)).map(|_| 2 * rng.gen_range(0..=1)).collect();
        let rel_degrees: Vec<i64> = (0..rng.gen_range(0..=2)).map(|_| 2 * rng.gen_range(1..=4)).collect();
        let relations: Vec<Elem> = rel_degrees.iter().map(|e| random_elem(&mut rng, *e, &target)).collect();
        let source: Vec<i64> = (0..rng.gen_range(1..=3)).map(|_| 2 * rng.gen_range(1..=4)).collect();
        let images: Vec<Elem> = source.iter().map(|e| random_elem(&mut rng, *e, &target)).collect();
        let m = Module::new(ring.clone(), target.clone(), relations.clone())?;
        let f = ModMap::new(Module::free(ring.clone(), source.clone()), m, images.clone(), 0)?;
        let (kernel, inc) = f.kernel()?;
        let maps_to_zero = inc.compose(&f)?.is_zero();
        for d in w.degrees() {
            let expect = brute_kernel_dim(&images, &source, &relations, &rel_degrees, &target, d);
            if kernel.dim(d) != Some(expect) || !maps_to_zero {
                mismatches.push((case, d));
            }
        }
    }
    let elapsed = start.elapsed();
    let passed = mismatches.is_empty() && elapsed < Duration::from_secs(120);
    Ok(Outcome::new(passed, format!("50 random rank-2 maps; mismatches {mismatches:?}; {:.1}s", elapsed.as_secs_f64())))
}

fn criterion_3() -> Result<Outcome> {
    let w = window(-12, 12);
    let (r1, r2, sf) = (circle(&[1, 2]), rank2(), semifree());
    let one = ConnectedSubgroup::trivial(1);
    let mut cases: Vec<(String, DiagramModule)> = Vec::new();
    for v in [rep(&[], &[]), rep(&[&[1]], &[]), rep(&[], &[&[1]]), rep(&[&[2]], &[&[1]])] {
        cases.push((format!("rank 1 S^{v:?}"), sphere(&r1, &v)?));
    }
    for v in [rep(&[], &[]), rep(&[&[1, 0]], &[]), rep(&[&[0, 1]], &[&[1, -1]]), rep(&[&[1, 0], &[0, 1]], &[])] {
        cases.push((format!("rank 2 S^{v:?}"), sphere(&r2, &v)?));
    }
    let finite: Vec<_> = r1.cells(&one).into_iter().filter(|a| a != r1.top().as_closed()).collect();
    cases.push(("torsion Q[c]/c".into(), torsion_model(&sf, &VirtualRepresentation::zero(), &[one.as_closed().clone()], 1)?));
    cases.push(("torsion Q[c]/c^3 at the finite cells".into(), torsion_model(&r1, &VirtualRepresentation::zero(), &finite, 3)?));
    let mut failures = Vec::new();
    let mut slowest = Duration::ZERO;
    for (name, y) in &cases {
        let start = Instant::now();
        let qce = y.is_quasicoherent(&w)? && y.is_extended(&w)?;
        let r = torsion_functor(y, &w, 8)?;
        let bijective = r.counit.iso_reports(&w)?.iter().all(|x| x.2.bijective);
        let took = start.elapsed();
        slowest = slowest.max(took);
        if !qce || !bijective || took > Duration::from_secs(60) {
            failures.push(name.clone());
        }
    }
    Ok(Outcome::new(
        failures.is_empty(),
        format!("{} qce modules, counit bijective in [-12, 12]; failures {failures:?}; slowest {:.1}s", cases.len(), slowest.as_secs_f64()),
    ))
}

/// A random extended rank-one module: `phi^1` free with an optional torsion
/// summand at the cell of the trivial subgroup, `phi^G` a graded vector
/// space, and random basing maps.
fn random_extended(s: &Arc<Structure>, rng: &mut ChaCha8Rng) -> Result<DiagramModule> {
    let one = ConnectedSubgroup::trivial(1);
    let g = s.top();
    let bottom = s.ring(&one, &one)?;
    let mid = s.ring(&g, &one)?;
    let top_degrees: Vec<i64> = (0..rng.gen_range(0..=2)).map(|_| 2 * rng.gen_range(-1..=1)).collect();
    let top = Module::free(s.ring(&g, &g)?, top_degrees.clone());
    let rm = s.vertical(&g, &g, &one)?;
    let mut phi_one = Cells::new();
    let mut basing = Cells::new();
    for a in s.cells(&one) {
        let img = s.cell_image(&a, &g);
        let target = top.base_change(&rm)?;
        let m = if a == *one.as_closed() {
            let free: Vec<i64> = (0..rng.gen_range(1..=2)).map(|_| 2 * rng.gen_range(-1..=1)).collect();
            let torsion = rng.gen_bool(0.5);
            let mut degrees = free.clone();
            let mut relations = Vec::new();
            if torsion {
                degrees.push(2 * rng.gen_range(-1..=1));
                let mut r = vec![bottom.zero(); degrees.len()];
                r[degrees.len() - 1] = c_pow(&bottom, rng.gen_range(1..=2));
                relations.push(r);
            }
            Module::new(bottom.clone(), degrees, relations)?
        } else {
            Module::zero(bottom.clone())
        };
        let mut images = Vec::new();
        for (i, d) in m.degrees().iter().enumerate() {
            let is_torsion = !m.relations().is_empty() && i == m.ngens() - 1;
            images.push(
                top_degrees
                    .iter()
                    .map(|b| if is_torsion { mid.zero() } else { c_pow(&mid, (d - b) / 2).scale(&Q::from_integer(rng.gen_range(-2i64..=2).into())) })
                    .collect(),
            );
        }
        let _ = img;
        basing.insert(a.clone(), ModMap::new(m.clone(), target, images, 0)?);
        phi_one.insert(a, m);
    }
    let phi = BTreeMap::from([(g.clone(), Cells::from([(g.as_closed().clone(), top)])), (one.clone(), phi_one)]);
    ExtendedModule::from_covers(s.clone(), phi, BTreeMap::from([((g, one), basing)]))?.to_diagram()
}

fn criterion_4() -> Result<Outcome> {
    let w = window(-12, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut tried = 0;
    let mut failures = Vec::new();
    let mut generated = 0;
    while generated < 12 && tried < 200 {
        tried += 1;
        let s = if tried % 2 == 0 { semifree() } else { circle(&[1]) };
        let y = random_extended(&s, &mut rng)?;
        if !y.is_extended(&w)? || y.is_quasicoherent(&w)? {
            continue;
        }
        generated += 1;
        match torsion_functor(&y, &w, 8).and_then(|r| r.module.is_quasicoherent(&w)) {
            Ok(true) => {}
            Ok(false) => failures.push(format!("case {tried}: not quasi-coherent")),
            Err(e) => failures.push(format!("case {tried}: {e}")),
        }
    }
    Ok(Outcome::new(
        generated >= 10 && failures.is_empty(),
        format!("{generated} extended non-qc modules ({tried} drawn); failures {failures:?}"),
    ))
}

/// The diagram with the top fixed points replaced by zero.
fn drop_top(y: &DiagramModule) -> Result<DiagramModule> {
    let s = y.structure();
    let top = QuotientPair::diagonal(&s.top());
    let mut values = y.values().clone();
    for m in values.get_mut(&top).expect("top vertex").values_mut() {
        *m = Module::zero(m.ring().clone());
    }
    let strip = |maps: &BTreeMap<(QuotientPair, QuotientPair), Cells<ModMap>>| -> Result<BTreeMap<(QuotientPair, QuotientPair), Cells<ModMap>>> {
        let mut out = maps.clone();
        for ((from, _), cells) in out.iter_mut() {
            if *from == top {
                for f in cells.values_mut() {
                    *f = ModMap::zero(&Module::zero(f.source().ring().clone()), f.target(), 0)?;
                }
            }
        }
        Ok(out)
    };
    DiagramModule::new(s.clone(), values, strip(y.beta_maps())?, strip(y.alpha_maps())?)
}

/// `P -beta-> Q <-alpha- R (x) V` over the semifree circle.
fn semifree_input(p: Module, q: Module, v: Module, beta: Vec<Elem>, alpha: Vec<Elem>) -> Result<DiagramModule> {
    let s = semifree();
    let one = ConnectedSubgroup::trivial(1);
    let g = s.top();
    let (c1, cg) = (one.as_closed().clone(), g.as_closed().clone());
    let (x, t, y) = (QuotientPair::diagonal(&one), pair(&g, &one), QuotientPair::diagonal(&g));
    let vb = v.base_change(&s.vertical(&g, &g, &one)?)?;
    let values = BTreeMap::from([
        (x.clone(), Cells::from([(c1.clone(), p.clone())])),
        (t.clone(), Cells::from([(c1.clone(), q.clone())])),
        (y.clone(), Cells::from([(cg, v)])),
    ]);
    let b = ModMap::new(p, q.clone(), beta, 0)?;
    let a = ModMap::new(vb, q, alpha, 0)?;
    let beta = BTreeMap::from([((x, t.clone()), Cells::from([(c1.clone(), b)]))]);
    let alpha = BTreeMap::from([((y, t), Cells::from([(c1, a)]))]);
    DiagramModule::new(s, values, beta, alpha)
}

fn criterion_5() -> Result<Outcome> {
    let w = window(-10, 10);
    let sf = semifree();
    let one = ConnectedSubgroup::trivial(1);
    let g = sf.top();
    let (rb, rm, rt) = (sf.ring(&one, &one)?, sf.ring(&g, &one)?, sf.ring(&g, &g)?);
    let fixture = semifree_input(Module::free(rb.clone(), vec![0]), Module::free(rm.clone(), vec![0]), Module::free(rt.clone(), vec![0]), vec![vec![rm.one()]], vec![vec![rm.one()]])?;
    let fe = extendedize(&fixture, &w)?;
    let p = fe.module.value(&QuotientPair::diagonal(&one), one.as_closed())?;
    let lambda = fe.lambda.at(&QuotientPair::diagonal(&one), one.as_closed())?.certify_iso(&w)?.bijective;
    // oracle: dim ker(P_d + (R (x) V)_d -> Q_d) from the columns of beta and alpha
    let b = fixture.beta(&QuotientPair::diagonal(&one), &pair(&g, &one), one.as_closed())?;
    let a = fixture.alpha(&QuotientPair::diagonal(&g), &pair(&g, &one), one.as_closed())?;
    let mut pullback_is_polynomial = lambda;
    for d in w.degrees() {
        let (mut cols, tdim) = b.columns_in_degree(d)?;
        let (more, _) = a.columns_in_degree(d)?;
        cols.extend(more.into_iter().map(|c| c.into_iter().map(|x| -x).collect::<Vec<Q>>()));
        let oracle = cols.len() - linalg::rank(&cols, tdim);
        pullback_is_polynomial &= p.dim(d) == Some(oracle) && oracle == usize::from(d >= 0 && d % 2 == 0);
    }
    let mut cases: Vec<(String, DiagramModule)> = vec![
        (
            "two localized classes".into(),
            semifree_input(
                Module::free(rb.clone(), vec![0]),
                Module::free(rm.clone(), vec![0, 0]),
                Module::free(rt.clone(), vec![0]),
                vec![vec![rm.one(), rm.zero()]],
                vec![vec![rm.one(), rm.zero()]],
            )?,
        ),
        (
            "torsion bottom".into(),
            semifree_input(Module::new(rb.clone(), vec![0], vec![vec![c_pow(&rb, 2)]])?, Module::zero(rm.clone()), Module::free(rt.clone(), vec![0]), vec![vec![]], vec![vec![]])?,
        ),
        (
            "two top classes".into(),
            semifree_input(
                Module::free(rb.clone(), vec![0]),
                Module::free(rm.clone(), vec![0]),
                Module::free(rt.clone(), vec![0, 2]),
                vec![vec![rm.one()]],
                vec![vec![rm.one()], vec![c_pow(&rm, 1)]],
            )?,
        ),
        ("rank 1 S^z without top".into(), drop_top(&sphere(&circle(&[1]), &rep(&[&[1]], &[]))?)?),
        ("rank 2 S^0 without top".into(), drop_top(&sphere(&rank2(), &rep(&[], &[]))?)?),
        ("rank 2 S^z1 without top".into(), drop_top(&sphere(&rank2(), &rep(&[&[1, 0]], &[]))?)?),
    ];
    let mut failures = Vec::new();
    let count = cases.len();
    for (name, m) in cases.drain(..) {
        if m.is_extended(&w)? {
            failures.push(format!("{name}: already extended"));
            continue;
        }
        let r = m.structure().rank();
        let z: &[i64] = if r == 1 { &[1] } else { &[1, 0] };
        let e = match extendedize(&m, &w) {
            Ok(e) => e,
            Err(err) => {
                failures.push(format!("{name}: {err}"));
                continue;
            }
        };
        for l in [rep(&[], &[]), rep(&[], &[z]), rep(&[z], &[])] {
            if !adjunction_check_kbang(&l, &m, &e, &w)?.iter().all(|row| row.bijective) {
                failures.push(format!("{name}: L = S^{l:?}"));
            }
        }
    }
    Ok(Outcome::new(
        failures.is_empty() && pullback_is_polynomial,
        format!("{count} non-extended modules, L in S^0, S^-z, S^z; failures {failures:?}; fixture P' = Q[c]: {pullback_is_polynomial}"),
    ))
}

fn criterion_6() -> Result<Outcome> {
    let w = window(-10, 10);
    let s = rank2();
    let one = ConnectedSubgroup::trivial(2);
    let first = [ConnectedSubgroup::circle(&[1, 0]), ConnectedSubgroup::circle(&[0, 1])];
    let second = [ConnectedSubgroup::circle(&[1, 0]), ConnectedSubgroup::circle(&[1, 1])];
    let mut passed = true;
    let mut detail = Vec::new();
    for v in [rep(&[], &[]), rep(&[&[1, 0]], &[])] {
        let y = sphere(&s, &v)?;
        let c = cech_independence(&y, &one, one.as_closed(), &first, &second, &w, 8)?;
        let acyclic = c.bridges.iter().all(|b| b.1);
        passed &= c.isomorphic && acyclic;
        let witness = c.witnesses.first().map(|(d, t)| format!("{t} in degree {d}")).unwrap_or_default();
        detail.push(format!("Y = S^{v:?}: isomorphic {}, bridge fibres acyclic {acyclic}, witness {witness}", c.isomorphic));
    }
    Ok(Outcome::new(passed, detail.join("; ")))
}

fn criterion_9() -> Result<Outcome> {
    let (r1, r2) = (circle(&[1, 2]), circle(&[1]));
    let w = window(-6, 6);
    let pairs: Vec<(VirtualRepresentation, DiagramModule)> = vec![
        (rep(&[], &[]), sphere(&r1, &rep(&[], &[]))?),
        (rep(&[&[1]], &[]), sphere(&r1, &rep(&[], &[]))?),
        (rep(&[], &[&[1]]), sphere(&r1, &rep(&[], &[]))?),
        (rep(&[], &[&[1]]), sphere(&r1, &rep(&[&[1]], &[]))?),
        (rep(&[], &[&[2]]), sphere(&r1, &rep(&[&[1]], &[]))?),
        (rep(&[&[2]], &[&[1]]), sphere(&r1, &rep(&[&[1], &[2]], &[]))?),
        (rep(&[], &[&[1], &[2]]), sphere(&r1, &rep(&[], &[&[2]]))?),
        (rep(&[], &[]), semifree_bottom()),
        (rep(&[&[1]], &[]), semifree_bottom()),
        (rep(&[], &[]), sphere(&r2, &rep(&[&[1]], &[]))?),
        (rep(&[], &[&[1], &[1]]), sphere(&r2, &rep(&[], &[]))?),
        (rep(&[&[1]], &[]), torsion_model(&r2, &VirtualRepresentation::zero(), &[ConnectedSubgroup::trivial(1).as_closed().clone()], 2)?),
    ];
    let mut failures = Vec::new();
    let mut total = 0;
    for (i, (v, y)) in pairs.iter().enumerate() {
        for d in w.degrees() {
            let c = compare_sphere_hom(v, y, d)?;
            total += c.direct_dim;
            if c.direct_dim != c.systems_dim || !c.bijection {
                failures.push((i, d));
            }
        }
    }
    // Hom(S^-z, S^0) in degree 0 is spanned by the Euler class of z
    let euler = compare_sphere_hom(&rep(&[], &[&[1]]), &sphere(&r1, &rep(&[], &[]))?, 0)?.direct_dim == 1;
    Ok(Outcome::new(
        failures.is_empty() && euler && total > 0,
        format!("{} pairs, methods agree except at {failures:?}; total dimension {total}; Euler class spans Hom(S^-z, S^0)_0: {euler}", pairs.len()),
    ))
}

fn criterion_10() -> Result<Outcome> {
    let w = window(-12, 12);
    let s = circle(&[1, 2]);
    let mut detail = Vec::new();
    let mut passed = true;
    for v in [rep(&[], &[]), rep(&[&[1]], &[]), rep(&[], &[&[1]]), rep(&[&[2]], &[&[1]])] {
        let exact = check_exactness(&cousin_resolution_rank1(&s, &v, &w)?, &w)?.exact();
        let compatible = suspension_compatible(&s, &v, &w)?;
        passed &= exact && compatible;
        detail.push(format!("{v:?}: exact {exact}, suspension {compatible}"));
    }
    Ok(Outcome::new(passed, detail.join("; ")))
}

fn criterion_11() -> Result<Outcome> {
    let mut failures = Vec::new();
    let reps1 = [rep(&[], &[]), rep(&[&[1]], &[]), rep(&[&[0]], &[&[1]]), rep(&[&[1], &[2]], &[&[0]])];
    let reps2 = [rep(&[], &[]), rep(&[&[1, 0]], &[]), rep(&[&[0, 1], &[0, 0]], &[&[1, -1]]), rep(&[&[1, -1], &[1, 0]], &[])];
    let mut count = 0;
    for (s, reps) in [(circle(&[1, 2]), &reps1[..]), (rank2(), &reps2[..])] {
        for k in s.subgroups() {
            for v in reps {
                let phi = geometric_fixed_points(&sphere(&s, v)?, &k)?;
                let expect = sphere(phi.structure(), &v.fixed(k.as_closed()))?;
                count += 1;
                if !same_diagram(&phi, &expect) {
                    failures.push(format!("Phi^{k} S^{v:?}"));
                }
            }
        }
    }
    // fixed points undo inflation on the diagonal
    let s = rank2();
    for m in [ConnectedSubgroup::circle(&[1, 0]), ConnectedSubgroup::circle(&[1, 1]), s.top()] {
        let sm = s.over_quotient(&m)?;
        for w in [rep(&[], &[]), rep(&[&[0, 1]], &[])] {
            let w = w.fixed(m.as_closed());
            let y = sphere(&sm, &w)?;
            let back = geometric_fixed_points(&inflate(&y)?, &m)?;
            for h in sm.subgroups() {
                for b in sm.cells(&h) {
                    let d = QuotientPair::diagonal(&h);
                    if back.value(&d, &b)? != y.value(&d, &b)? {
                        failures.push(format!("Phi^{m} infl at {d}, {b}"));
                    }
                }
            }
        }
    }
    let c1 = circle(&[1]);
    let g1 = c1.top();
    let triples: Vec<(VirtualRepresentation, DiagramModule, ConnectedSubgroup, DegreeWindow)> = vec![
        (rep(&[], &[]), sphere(&c1, &rep(&[], &[]))?, g1.clone(), window(-6, 6)),
        (rep(&[], &[]), sphere(&c1, &rep(&[&[1]], &[]))?, g1.clone(), window(-6, 6)),
        (rep(&[], &[]), sphere(&c1, &rep(&[], &[&[1]]))?, g1, window(-6, 6)),
        (rep(&[&[0, 1]], &[]), sphere(&rank2(), &rep(&[&[0, 1]], &[]))?, ConnectedSubgroup::circle(&[1, 0]), window(-4, 4)),
    ];
    for (i, (a, x, m, w)) in triples.iter().enumerate() {
        let (rows, _) = left_phi_comparison(a, x, m, w, 8)?;
        if !rows.iter().all(|r| r.bijective) {
            failures.push(format!("left phi triple {i}"));
        }
    }
    Ok(Outcome::new(failures.is_empty(), format!("{count} fixed-point cases, 6 inflations, 4 left-phi triples; failures {failures:?}")))
}

fn main() {
    let criteria: Vec<(usize, fn() -> Result<Outcome>)> = vec![
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
        (12, criterion_12),
    ];
    let mut unexpected = Vec::new();
    for (n, run) in criteria {
        let start = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let known = UNATTAINABLE.iter().find(|(k, _)| *k == n);
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!("criterion {n:>2}: {status} ({:.1}s) {}", start.elapsed().as_secs_f64(), outcome.detail);
        match (outcome.passed, known) {
            (false, Some((_, why))) => println!("              expected failure: {why}"),
            (false, None) => unexpected.push(n),
            (true, Some(_)) => {
                println!("              passed although recorded as unattainable");
                unexpected.push(n);
            }
            (true, None) => {}
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
