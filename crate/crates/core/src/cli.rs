//! The command-line driver: every subcommand reads a workspace, runs one
//! operation and produces a report plus output documents.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::algebra::complex::{fibre_sequence, set_element, stable_cohomology};
use crate::algebra::{DegreeWindow, Module, Poly};
use crate::diagram::{sphere, DiagramModule};
use crate::error::{Error, Result};
use crate::experiments::{check_exactness, cousin_resolution_rank1, is_torsion_model, same_diagram, suspension_compatible};
use crate::functors::{
    adjunction_check_kbang, cech_independence, default_decomposition, extendedize, geometric_fixed_points, inflate, left_phi_comparison,
    torsion_functor, DEFAULT_TOWER_BOUND,
};
use crate::io::{
    diagram_to_doc, elem_from_doc, elem_to_doc, emit, inputs_digest, parse_doc, rep_from_doc, subgroup_from_doc, DiagramDoc,
    ElemDoc, Overrides, RepDoc, Report, SubgroupDoc, Workspace,
};
use crate::lattice::IntVec;
use crate::spheres::{compare_sphere_hom, footprint};
use crate::torus::{ClosedSubgroup, ConnectedSubgroup, QuotientPair, VirtualRepresentation};

pub fn parse_window(text: &str) -> std::result::Result<DegreeWindow, String> {
    let (lo, hi) = text.split_once(':').ok_or_else(|| format!("window {text:?} is not LO:HI"))?;
    let lo: i64 = lo.trim().parse().map_err(|_| format!("bad lower bound in {text:?}"))?;
    let hi: i64 = hi.trim().parse().map_err(|_| format!("bad upper bound in {text:?}"))?;
    DegreeWindow::new(lo, hi).map_err(|e| e.to_string())
}

#[derive(Parser, Debug, Clone)]
#[command(name = "tormod", version, about = "Diagram modules for rational torus-equivariant cohomology")]
pub struct Cli {
    /// Workspace document (JSON).
    #[arg(long, global = true)]
    pub workspace: Option<PathBuf>,
    /// Degree window LO:HI.
    #[arg(long, global = true, value_parser = parse_window, allow_hyphen_values = true)]
    pub window: Option<DegreeWindow>,
    /// Stages tried beyond the warm-up when stabilizing colimits.
    #[arg(long, global = true, default_value_t = DEFAULT_TOWER_BOUND)]
    pub tower_bound: u32,
    /// Preset replacing the tracked poset ("semifree-circle").
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Directory for the report and output documents.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Quasi-coherence and extendedness certificates.
    CheckQce {
        #[arg(long)]
        module: String,
    },
    /// The torsion functor and its counit.
    GammaH {
        #[arg(long)]
        module: String,
    },
    /// The extended replacement and the adjunction check against spheres.
    KBang {
        #[arg(long)]
        module: String,
        /// Sphere sources as representation documents; default the unit sphere.
        #[arg(long = "rep")]
        reps: Vec<String>,
    },
    /// Maps out of a sphere, computed two ways.
    SphereHom {
        #[arg(long)]
        module: String,
        #[arg(long)]
        rep: String,
    },
    /// The Euler class map of an actual representation.
    Euler {
        #[arg(long)]
        module: String,
        #[arg(long)]
        rep: String,
    },
    /// Stable Koszul and Cech cohomology of one value and the fibre sequence.
    Koszul {
        #[arg(long)]
        module: String,
        #[arg(long)]
        lower: Option<String>,
        #[arg(long)]
        cell: Option<String>,
        /// Linear forms, one element each; default the product decomposition.
        #[arg(long)]
        forms: Option<String>,
    },
    /// Compare CH^0 for two product decompositions.
    CechCompare {
        #[arg(long)]
        module: String,
        #[arg(long)]
        lower: Option<String>,
        #[arg(long)]
        cell: Option<String>,
        /// Circles as a list of cocharacters.
        #[arg(long)]
        first: String,
        #[arg(long)]
        second: String,
    },
    /// The rank-one Cousin resolution of a sphere.
    ResolveRank1 {
        #[arg(long)]
        rep: Option<String>,
    },
    /// Geometric fixed points for a closed subgroup, with the quotient structure
    FixedPoints {
        #[arg(long)]
        module: String,
        #[arg(long)]
        subgroup: String,
    },
    /// Inflate a module given over a quotient.
    Inflate {
        #[arg(long)]
        module: String,
    },
    /// Sphere maps into fixed points against the colimit over the tower.
    LeftPhi {
        #[arg(long)]
        module: String,
        #[arg(long)]
        subgroup: String,
        #[arg(long)]
        rep: Option<String>,
    },
    /// Horizontal images of an element of the bottom value.
    Footprint {
        #[arg(long)]
        module: String,
        #[arg(long)]
        cell: Option<String>,
        #[arg(long)]
        element: String,
    },
    /// Run the operations listed in the workspace, in order.
    Run,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckQce { .. } => "check-qce",
            Command::GammaH { .. } => "gamma-h",
            Command::KBang { .. } => "k-bang",
            Command::SphereHom { .. } => "sphere-hom",
            Command::Euler { .. } => "euler",
            Command::Koszul { .. } => "koszul",
            Command::CechCompare { .. } => "cech-compare",
            Command::ResolveRank1 { .. } => "resolve-rank1",
            Command::FixedPoints { .. } => "fixed-points",
            Command::Inflate { .. } => "inflate",
            Command::LeftPhi { .. } => "left-phi",
            Command::Footprint { .. } => "footprint",
            Command::Run => "run",
        }
    }
}

/// Parse arguments given without the program name.
pub fn parse_args<I: IntoIterator<Item = String>>(args: I) -> Result<Cli> {
    Cli::try_parse_from(std::iter::once("tormod".to_string()).chain(args)).map_err(|e| Error::Schema(e.to_string().trim().to_string()))
}

/// A finished operation: its report and named output documents.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub outputs: Vec<(String, DiagramDoc)>,
}

fn rep_arg(text: Option<&str>, rank: usize) -> Result<VirtualRepresentation> {
    match text {
        None => Ok(VirtualRepresentation::zero()),
        Some(t) => rep_from_doc(&parse_doc::<RepDoc>(t)?, rank, "/rep"),
    }
}

fn subgroup_arg(text: &str, rank: usize) -> Result<ClosedSubgroup> {
    let doc = match text.trim() {
        "1" | "G" => SubgroupDoc::Name(text.trim().into()),
        t => match parse_doc::<SubgroupDoc>(t) {
            Ok(d) => d,
            Err(_) => SubgroupDoc::Descriptor { cocharacters: parse_doc::<Vec<IntVec>>(t)?, finite: vec![] },
        },
    };
    subgroup_from_doc(&doc, rank, "/subgroup")
}

fn connected_arg(text: &str, rank: usize) -> Result<ConnectedSubgroup> {
    ConnectedSubgroup::new(subgroup_arg(text, rank)?)
}

fn circles_arg(text: &str, rank: usize) -> Result<Vec<ConnectedSubgroup>> {
    let cochars: Vec<IntVec> = parse_doc(text)?;
    cochars
        .iter()
        .map(|c| if c.len() == rank { Ok(ConnectedSubgroup::circle(c)) } else { Err(Error::Schema(format!("circle {c:?} has the wrong rank"))) })
        .collect()
}

fn dim_value(d: Option<usize>) -> Value {
    d.map_or(Value::Null, |x| json!(x))
}

/// Degreewise dimensions of every value, `null` for infinite slices.
fn dims_rows(y: &DiagramModule, w: &DegreeWindow) -> Vec<Vec<Value>> {
    let mut rows = Vec::new();
    for (v, cells) in y.values() {
        for (a, m) in cells {
            let dims: Vec<Value> = m.dims(w).into_iter().map(dim_value).collect();
            rows.push(vec![json!(v.to_string()), json!(a.to_string()), Value::Array(dims)]);
        }
    }
    rows
}

fn dims_table(report: &mut Report, name: &str, y: &DiagramModule, w: &DegreeWindow) {
    report.table(name, &["vertex", "cell", "dims"], dims_rows(y, w));
}

fn iso_rows(reports: &[(QuotientPair, ClosedSubgroup, crate::algebra::IsoReport)]) -> Vec<Vec<Value>> {
    reports.iter().map(|(v, a, r)| vec![json!(v.to_string()), json!(a.to_string()), json!(r.bijective), json!(r.module_level)]).collect()
}

struct Ctx<'a> {
    ws: &'a Workspace,
    window: DegreeWindow,
    bound: u32,
}

impl Ctx<'_> {
    fn rank(&self) -> usize {
        self.ws.doc.rank
    }
}

fn check_qce(ctx: &Ctx, name: &str, r: &mut Report) -> Result<Vec<(String, DiagramDoc)>> {
    let y = ctx.ws.module(name)?;
    let w = &ctx.window;
    let edge_rows = |v: Vec<((QuotientPair, QuotientPair), ClosedSubgroup, crate::algebra::IsoReport)>| -> Vec<Vec<Value>> {
        v.iter().map(|((x, t), a, rep)| vec![json!(format!("{x} -> {t}")), json!(a.to_string()), json!(rep.bijective)]).collect()
    };
    let qc = y.quasicoherence(w)?;
    let ext = y.extendedness(w)?;
    r.check("quasi-coherent", qc.iter().all(|x| x.2.bijective), "");
    r.check("extended", ext.iter().all(|x| x.2.bijective), "");
    r.table("quasi-coherence", &["edge", "cell", "bijective"], edge_rows(qc));
    r.table("extendedness", &["edge", "cell", "bijective"], edge_rows(ext));
    Ok(vec![])
}

fn gamma_h(ctx: &Ctx, name: &str, r: &mut Report) -> Result<Vec<(String, DiagramDoc)>> {
    let y = ctx.ws.module(name)?;
    let w = &ctx.window;
    let t = torsion_functor(&y, w, ctx.bound)?;
    let qce_input = y.is_quasicoherent(w)? && y.is_extended(w)?;
    r.check("result quasi-coherent", t.module.is_quasicoherent(w)?, "");
    r.check("result extended", t.module.is_extended(w)?, "");
    let counit = t.counit.iso_reports(w)?;
    if qce_input {
        r.check("counit bijective", counit.iter().all(|x| x.2.bijective), "the input is quasi-coherent and extended");
    }
    r.check("counit natural", t.counit.naturality_failures()?.is_empty(), "");
    r.table("counit", &["vertex", "cell", "bijective", "module_level"], iso_rows(&counit));
    r.table(
        "top vertex",
        &["degree", "dim", "stage"],
        w.degrees().map(|d| vec![json!(d), json!(t.vertex.dim(d)), json!(t.vertex.stages.get(&d))]).collect(),
    );
    r.table(
        "limits",
        &["subgroup", "cell", "strategy"],
        t.strategies.iter().map(|((l, a), s)| vec![json!(l.to_string()), json!(a.to_string()), json!(format!("{s:?}"))]).collect(),
    );
    r.table("truncation", &["truncated_below"], vec![vec![json!(t.truncated_below)]]);
    dims_table(r, "dimensions", &t.module, w);
    Ok(vec![(format!("{name}.gamma-h"), diagram_to_doc(&t.module, None))])
}

fn k_bang(ctx: &Ctx, name: &str, reps: &[String], r: &mut Report) -> Result<Vec<(String, DiagramDoc)>> {
    let m = ctx.ws.module(name)?;
    let w = &ctx.window;
    let e = extendedize(&m, w)?;
    r.check("result extended", e.module.is_extended(w)?, "");
    if m.is_extended(w)? {
        r.check("lambda bijective", e.lambda.iso_reports(w)?.iter().all(|x| x.2.bijective), "the input is extended");
    }
    let mut vs: Vec<VirtualRepresentation> = reps.iter().map(|t| rep_arg(Some(t), ctx.rank())).collect::<Result<_>>()?;
    if vs.is_empty() {
        vs.push(VirtualRepresentation::zero());
    }
    let mut rows = Vec::new();
    for v in &vs {
        let adj = adjunction_check_kbang(v, &m, &e, w)?;
        r.check(&format!("adjunction for S^{v:?}"), adj.iter().all(|a| a.bijective), "");
        rows.extend(adj.iter().map(|a| vec![json!(format!("{v:?}")), json!(a.degree), json!(a.left_dim), json!(a.right_dim), json!(a.rank), json!(a.bijective)]));
    }
    r.table("adjunction", &["sphere", "degree", "hom_into_replacement", "hom_into_input", "rank", "bijective"], rows);
    r.table("truncation", &["truncated_below"], vec![vec![json!(e.truncated_below)]]);
    dims_table(r, "dimensions", &e.module, w);
    Ok(vec![(format!("{name}.k-bang"), diagram_to_doc(&e.module, None))])
}

fn sphere_hom(ctx: &Ctx, name: &str, rep: &str, r: &mut Report) -> Result<Vec<(String, DiagramDoc)>> {
    let y = ctx.ws.module(name)?;
    let v = rep_arg(Some(rep), ctx.rank())?;
    let mut rows = Vec::new();
    let mut ok = true;
    for d in ctx.window.degrees() {
        let c = compare_sphere_hom(&v, &y, d)?;
        ok &= c.bijection && c.direct_dim == c.systems_dim;
        rows.push(vec![json!(d), json!(c.direct_dim), json!(c.systems_dim), json!(c.bijection)]);
    }
    r.check("methods agree", ok, "");
    r.table("maps from the sphere", &["degree", "direct", "element_systems", "bijection"], rows);
    Ok(vec![])
}

fn euler(ctx: &Ctx, name: &str, rep: &str, r: &mut Report) -> Result<Vec<(String, DiagramDoc)>> {
    let y = ctx.ws.module(name)?;
    let v = rep_arg(Some(rep), ctx.rank())?;
    let f = y.euler_map(&v)?;
    let s = y.structure();
    let mut rows = Vec::new();
    for p in s.vertices() {
        for a in s.cells(&p.lower) {
            let e = crate::family::euler_value(&v, &s.cell_image(&a, &p.upper));
            rows.push(vec![json!(p.to_string()), json!(a.to_string()), json!(e.to_string()), json!(e.degree())]);
        }
    }
    r.check("natural", f.naturality_failures()?.is_empty(), "");
    r.table("euler classes", &["vertex", "cell", "value", "degree"], rows);
    Ok(vec![(format!("{name}.suspended"), diagram_to_doc(&f.target, None))])
}

fn lower_and_cell(ctx: &Ctx, y: &DiagramModule, lower: Option<&str>, cell: Option<&str>) -> Result<(ConnectedSubgroup, ClosedSubgroup)> {
    let l = match lower {
        Some(t) => connected_arg(t, ctx.rank())?,
        None => y.structure().base().clone(),
    };
    let a = match cell {
        Some(t) => subgroup_arg(t, ctx.rank())?,
        None => l.as_closed().clone(),
    };
    Ok((l, a))
}

fn koszul(ctx: &Ctx, name: &str, lower: Option<&str>, cell: Option<&str>, forms: Option<&str>, r: &mut Report) -> Result<Vec<(String, DiagramDoc)>> {
    let y = ctx.ws.module(name)?;
    let (l, a) = lower_and_cell(ctx, &y, lower, cell)?;
    let m: &Module = y.value(&QuotientPair::diagonal(&l), &a)?;
    let xs: Vec<Poly> = match forms {
        Some(t) => parse_doc::<Vec<IntVec>>(t)?.iter().map(|f| m.ring().linear_form(f)).collect::<Result<_>>()?,
        None => {
            let s = y.structure();
            default_decomposition(s, &l)?.iter().map(|k| set_element(m.ring(), &s.forms_nontrivial_on(k, &l)?)).collect::<Result<_>>()?
        }
    };
    let w = &ctx.window;
    let rows = fibre_sequence(&xs, m, w, ctx.bound)?;
    r.check("fibre sequence exact", rows.iter().all(|x| x.exact), "");
    r.table(
        "fibre sequence",
        &["degree", "stage", "dims", "ranks", "exact"],
        rows.iter().map(|x| vec![json!(x.degree), json!(x.stage), json!(x.dims), json!(x.ranks), json!(x.exact)]).collect(),
    );
    let st = stable_cohomology(&xs, m, w, ctx.bound, false)?;
    r.table("stable koszul cohomology", &["position", "degree", "dim"], st.dims.iter().map(|((p, d), n)| vec![json!(p), json!(d), json!(n)]).collect());
    Ok(vec![])
}

fn cech_compare(ctx: &Ctx, name: &str, lower: Option<&str>, cell: Option<&str>, first: &str, second: &str, r: &mut Report) -> Result<Vec<(String, DiagramDoc)>> {
    let y = ctx.ws.module(name)?;
    let (l, a) = lower_and_cell(ctx, &y, lower, cell)?;
    let (da, db) = (circles_arg(first, ctx.rank())?, circles_arg(second, ctx.rank())?);
    let c = cech_independence(&y, &l, &a, &da, &db, &ctx.window, ctx.bound)?;
    r.check("CH^0 independent of the decomposition", c.isomorphic, "");
    for (k, acyclic) in &c.bridges {
        r.check(&format!("bridge fibre acyclic for {k}"), *acyclic, "");
    }
    r.table(
        "comparison",
        &["degree", "dim_first", "dim_second", "generators_first", "generators_second", "first_in_second", "second_in_first"],
        c.rows
            .iter()
            .map(|x| vec![json!(x.degree), dim_value(x.dim_a), dim_value(x.dim_b), json!(x.generators_a), json!(x.generators_b), json!(x.a_in_b), json!(x.b_in_a)])
            .collect(),
    );
    r.table("witnesses", &["degree", "element"], c.witnesses.iter().take(16).map(|(d, t)| vec![json!(d), json!(t)]).collect());
    Ok(vec![])
}

fn resolve_rank1(ctx: &Ctx, rep: Option<&str>, r: &mut Report) -> Result<Vec<(String, DiagramDoc)>> {
    let s = &ctx.ws.structure;
    let v = rep_arg(rep, ctx.rank())?;
    let w = &ctx.window;
    let c = cousin_resolution_rank1(s, &v, w)?;
    let ex = check_exactness(&c, w)?;
    r.check("exact", ex.exact(), "");
    r.check("torsion term is torsion", is_torsion_model(&c.terms[2])?, "");
    r.check("suspension compatible", suspension_compatible(s, &v, w)?, "");
    r.table(
        "nonzero homology",
        &["position", "vertex", "cell", "degree", "dim"],
        ex.nonzero().map(|h| vec![json!(h.position), json!(h.vertex.to_string()), json!(h.cell.to_string()), json!(h.degree), json!(h.dim)]).collect(),
    );
    for (i, t) in c.terms.iter().enumerate() {
        dims_table(r, &format!("term {i}"), t, w);
    }
    Ok(c.terms.iter().enumerate().map(|(i, t)| (format!("resolution.term{i}"), diagram_to_doc(t, None))).collect())
}

fn fixed_points(ctx: &Ctx, name: &str, subgroup: &str, r: &mut Report) -> Result<Vec<(String, DiagramDoc)>> {
    let y = ctx.ws.module(name)?;
    let k = connected_arg(subgroup, ctx.rank())?;
    let phi = geometric_fixed_points(&y, &k)?;
    r.check("functorial", phi.functoriality_failures()?.is_empty(), "");
    if let DiagramDoc::Sphere { representation, quotient: None } = ctx.ws.module_doc(name)? {
        let v = rep_from_doc(representation, ctx.rank(), &format!("/modules/{name}/representation"))?;
        let expected = sphere(phi.structure(), &v.fixed(k.as_closed()))?;
        r.check("fixed points of the sphere are the sphere of the fixed representation", same_diagram(&phi, &expected), "");
    }
    dims_table(r, "dimensions", &phi, &ctx.window);
    Ok(vec![(format!("{name}.fixed-points"), diagram_to_doc(&phi, Some(&k)))])
}

fn inflate_cmd(ctx: &Ctx, name: &str, r: &mut Report) -> Result<Vec<(String, DiagramDoc)>> {
    let y = ctx.ws.module(name)?;
    let (_, m) = ctx.ws.structure_of(name)?;
    let m = m.ok_or_else(|| Error::Schema(format!("at /modules/{name}: inflation needs a module given over a quotient")))?;
    let z = inflate(&y)?;
    let back = geometric_fixed_points(&z, &m)?;
    let s = y.structure();
    let mut same = true;
    for k in s.subgroups() {
        for a in s.cells(&k) {
            let d = QuotientPair::diagonal(&k);
            same &= back.value(&d, &a)? == y.value(&d, &a)?;
        }
    }
    r.check("fixed points of the inflation agree on the diagonal", same, "");
    dims_table(r, "dimensions", &z, &ctx.window);
    Ok(vec![(format!("{name}.inflated"), diagram_to_doc(&z, None))])
}

fn left_phi(ctx: &Ctx, name: &str, subgroup: &str, rep: Option<&str>, r: &mut Report) -> Result<Vec<(String, DiagramDoc)>> {
    let x = ctx.ws.module(name)?;
    let m = connected_arg(subgroup, ctx.rank())?;
    let w = rep_arg(rep, ctx.rank())?;
    let (rows, _) = left_phi_comparison(&w, &x, &m, &ctx.window, ctx.bound)?;
    r.check("comparison bijective", rows.iter().all(|x| x.bijective), "");
    r.table(
        "comparison",
        &["degree", "maps_into_fixed_points", "colimit", "stage", "rank", "bijective"],
        rows.iter().map(|x| vec![json!(x.degree), json!(x.left_dim), json!(x.right_dim), json!(x.stage), json!(x.theta_rank), json!(x.bijective)]).collect(),
    );
    Ok(vec![])
}

fn footprint_cmd(ctx: &Ctx, name: &str, cell: Option<&str>, element: &str, r: &mut Report) -> Result<Vec<(String, DiagramDoc)>> {
    let y = ctx.ws.module(name)?;
    let base = y.structure().base().clone();
    let a = match cell {
        Some(t) => subgroup_arg(t, ctx.rank())?,
        None => base.as_closed().clone(),
    };
    let m = y.value(&QuotientPair::diagonal(&base), &a)?;
    let x = elem_from_doc(&parse_doc::<ElemDoc>(element)?, m.ring().nvars(), "/element")?;
    if x.len() != m.ngens() {
        return Err(Error::Schema(format!("at /element: {} entries for {} generators", x.len(), m.ngens())));
    }
    let homogeneous = m.degree_of(&x).is_ok();
    r.check("element homogeneous", homogeneous, "");
    let f = footprint(&y, &a, &x)?;
    r.table(
        "footprint",
        &["subgroup", "image"],
        f.per_subgroup.iter().map(|(k, e)| vec![json!(k.to_string()), serde_json::to_value(elem_to_doc(e)).unwrap_or(Value::Null)]).collect(),
    );
    Ok(vec![])
}

fn dispatch(ctx: &Ctx, cmd: &Command, r: &mut Report) -> Result<Vec<(String, DiagramDoc)>> {
    match cmd {
        Command::CheckQce { module } => check_qce(ctx, module, r),
        Command::GammaH { module } => gamma_h(ctx, module, r),
        Command::KBang { module, reps } => k_bang(ctx, module, reps, r),
        Command::SphereHom { module, rep } => sphere_hom(ctx, module, rep, r),
        Command::Euler { module, rep } => euler(ctx, module, rep, r),
        Command::Koszul { module, lower, cell, forms } => koszul(ctx, module, lower.as_deref(), cell.as_deref(), forms.as_deref(), r),
        Command::CechCompare { module, lower, cell, first, second } => cech_compare(ctx, module, lower.as_deref(), cell.as_deref(), first, second, r),
        Command::ResolveRank1 { rep } => resolve_rank1(ctx, rep.as_deref(), r),
        Command::FixedPoints { module, subgroup } => fixed_points(ctx, module, subgroup, r),
        Command::Inflate { module } => inflate_cmd(ctx, module, r),
        Command::LeftPhi { module, subgroup, rep } => left_phi(ctx, module, subgroup, rep.as_deref(), r),
        Command::Footprint { module, cell, element } => footprint_cmd(ctx, module, cell.as_deref(), element, r),
        Command::Run => Err(Error::Schema("operations cannot run other operations".into())),
    }
}

/// Run one command against a parsed workspace.
pub fn run_command(ws: &Workspace, cmd: &Command, args: &[String], window: Option<DegreeWindow>, bound: u32) -> Result<Outcome> {
    let start = Instant::now();
    let ctx = Ctx { ws, window: window.unwrap_or(ws.window), bound };
    let mut report = Report::new(cmd.name(), inputs_digest(&ws.doc, args)?);
    let outputs = dispatch(&ctx, cmd, &mut report)?;
    report.timing_ms = Some(start.elapsed().as_millis() as u64);
    Ok(Outcome { report, outputs })
}

/// Every operation listed in the workspace, in request order.
pub fn run_operations(ws: &Workspace, window: Option<DegreeWindow>, bound: u32) -> Result<Vec<Outcome>> {
    let mut out = Vec::with_capacity(ws.doc.operations.len());
    for (i, op) in ws.doc.operations.iter().enumerate() {
        let argv = std::iter::once("tormod".to_string()).chain(std::iter::once(op.command.clone())).chain(op.args.iter().cloned());
        let cli = Cli::try_parse_from(argv).map_err(|e| Error::Schema(format!("at /operations/{i}: {}", e.to_string().trim())))?;
        if matches!(cli.command, Command::Run) {
            return Err(Error::Schema(format!("at /operations/{i}: operations cannot run other operations")));
        }
        let mut args = vec![op.command.clone()];
        args.extend(op.args.iter().cloned());
        out.push(run_command(ws, &cli.command, &args, cli.window.or(window), bound)?);
    }
    Ok(out)
}

/// Load the workspace named on the command line (an empty rank-1 workspace
/// when none is given) and run the command.
pub fn execute(cli: &Cli, argv: &[String]) -> Result<Vec<Outcome>> {
    let text = match &cli.workspace {
        Some(p) => std::fs::read_to_string(p)?,
        None => "{\"rank\": 1}".to_string(),
    };
    let ws = Workspace::parse(&text, &Overrides { window: cli.window, preset: cli.preset.clone() })?;
    match cli.command {
        Command::Run => run_operations(&ws, cli.window, cli.tower_bound),
        ref cmd => Ok(vec![run_command(&ws, cmd, argv, cli.window, cli.tower_bound)?]),
    }
}

/// Write reports and outputs to a directory.
pub fn write_outputs(dir: &std::path::Path, outcomes: &[Outcome]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (i, o) in outcomes.iter().enumerate() {
        let name = if outcomes.len() == 1 { "report.json".to_string() } else { format!("report-{i}-{}.json", o.report.operation) };
        std::fs::write(dir.join(name), emit(&o.report)?)?;
        for (n, doc) in &o.outputs {
            std::fs::write(dir.join(format!("{n}.json")), emit(doc)?)?;
        }
    }
    Ok(())
}

/// Entry point shared by the binary: returns the process exit code.
pub fn main_with(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = execute(&cli, &argv[1..]).and_then(|outs| {
        if let Some(dir) = &cli.out {
            write_outputs(dir, &outs)?;
        }
        Ok(outs)
    });
    match outcome {
        Ok(outs) => {
            let reports: Vec<&Report> = outs.iter().map(|o| &o.report).collect();
            let text = if reports.len() == 1 { emit(reports[0]) } else { emit(&reports) };
            match text {
                Ok(t) => print!("{t}"),
                Err(e) => {
                    eprintln!("error: {e}");
                    return e.exit_code();
                }
            }
            if reports.iter().all(|r| r.passed) {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn subcommand_names() {
        let names: Vec<String> = Cli::command().get_subcommands().map(|c| c.get_name().to_string()).collect();
        for n in ["check-qce", "gamma-h", "k-bang", "sphere-hom", "euler", "koszul", "cech-compare", "resolve-rank1", "fixed-points", "inflate", "left-phi", "footprint"] {
            assert!(names.contains(&n.to_string()), "{n} missing from {names:?}");
        }
    }

    #[test]
    fn windows_parse() {
        let w = parse_window("-10:10").unwrap();
        assert_eq!((w.lo, w.hi), (-10, 10));
        assert!(parse_window("3:1").is_err());
        assert!(parse_window("3").is_err());
        let cli = Cli::try_parse_from(["tormod", "resolve-rank1", "--window", "-4:4"]).unwrap();
        assert_eq!(cli.window.unwrap().lo, -4);
        assert_eq!(cli.tower_bound, DEFAULT_TOWER_BOUND);
    }

    #[test]
    fn unknown_module_is_a_schema_error() {
        let ws = Workspace::parse(r#"{"rank": 1}"#, &Overrides::default()).unwrap();
        let e = run_command(&ws, &Command::GammaH { module: "nope".into() }, &[], None, 8).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn resolution_report_passes() {
        let ws = Workspace::parse(r#"{"rank": 1, "tracked": {"characters": [[1]]}, "window": [-6, 6]}"#, &Overrides::default()).unwrap();
        let o = run_command(&ws, &Command::ResolveRank1 { rep: Some(r#"{"positive": [[1]]}"#.into()) }, &[], None, 8).unwrap();
        assert!(o.report.passed, "{:?}", o.report.checks);
        assert_eq!(o.outputs.len(), 3);
    }
}
