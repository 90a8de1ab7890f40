//! JSON documents for workspaces, modules and reports.
//!
//! Rationals are written as `"p/q"` strings. A polynomial is a list of
//! `[coefficient, exponents]` terms over the variables of the ring at its
//! position (polynomial generators first, then the inverted forms; missing
//! trailing exponents are zero). The ring of every module is implied by
//! where it sits in the diagram.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::module::Elem;
use crate::algebra::{DegreeWindow, ModMap, Module, Poly, Q};
use crate::diagram::{alpha_edges, beta_edges, Cells, DiagramModule, ExtendedModule};
use crate::error::{Error, Result};
use crate::family::Structure;
use crate::lattice::IntVec;
use crate::torus::{Character, ClosedSubgroup, ConnectedSubgroup, QuotientPair, TrackedPoset, VirtualRepresentation};

pub const SEMIFREE_PRESET: &str = "semifree-circle";
pub const DEFAULT_WINDOW: (i64, i64) = (-10, 10);

pub type PolyDoc = Vec<(String, Vec<u32>)>;
pub type ElemDoc = Vec<PolyDoc>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubgroupDoc {
    /// `"1"` or `"G"`.
    Name(String),
    Descriptor {
        cocharacters: Vec<IntVec>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        finite: Vec<Vec<String>>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackedDoc {
    #[serde(default)]
    pub connected: Vec<SubgroupDoc>,
    #[serde(default)]
    pub characters: Vec<IntVec>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepDoc {
    #[serde(default)]
    pub positive: Vec<IntVec>,
    #[serde(default)]
    pub negative: Vec<IntVec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleDoc {
    pub degrees: Vec<i64>,
    #[serde(default)]
    pub relations: Vec<ElemDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDoc {
    pub upper: SubgroupDoc,
    pub lower: SubgroupDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueDoc {
    pub vertex: PairDoc,
    pub cell: SubgroupDoc,
    pub module: ModuleDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub from: PairDoc,
    pub to: PairDoc,
    pub cell: SubgroupDoc,
    pub images: Vec<ElemDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiDoc {
    pub subgroup: SubgroupDoc,
    pub cell: SubgroupDoc,
    pub module: ModuleDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasingDoc {
    pub upper: SubgroupDoc,
    pub lower: SubgroupDoc,
    pub cell: SubgroupDoc,
    pub images: Vec<ElemDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DiagramDoc {
    Zero {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quotient: Option<SubgroupDoc>,
    },
    Sphere {
        representation: RepDoc,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quotient: Option<SubgroupDoc>,
    },
    Extended {
        phi: Vec<PhiDoc>,
        #[serde(default)]
        basings: Vec<BasingDoc>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quotient: Option<SubgroupDoc>,
    },
    Diagram {
        values: Vec<ValueDoc>,
        #[serde(default)]
        beta: Vec<EdgeDoc>,
        #[serde(default)]
        alpha: Vec<EdgeDoc>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quotient: Option<SubgroupDoc>,
    },
}

impl DiagramDoc {
    pub fn quotient(&self) -> Option<&SubgroupDoc> {
        match self {
            DiagramDoc::Zero { quotient } | DiagramDoc::Sphere { quotient, .. } | DiagramDoc::Extended { quotient, .. } | DiagramDoc::Diagram { quotient, .. } => {
                quotient.as_ref()
            }
        }
    }
}

/// A requested operation: a command name and its command-line arguments.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationDoc {
    pub command: String,
    #[serde(default)]
    pub args: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceDoc {
    pub rank: usize,
    #[serde(default)]
    pub tracked: TrackedDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(i64, i64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default)]
    pub modules: BTreeMap<String, DiagramDoc>,
    #[serde(default)]
    pub operations: Vec<OperationDoc>,
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        let s = match seg {
            serde_path_to_error::Segment::Seq { index } => index.to_string(),
            serde_path_to_error::Segment::Map { key } => key.clone(),
            serde_path_to_error::Segment::Enum { variant } => variant.clone(),
            serde_path_to_error::Segment::Unknown => continue,
        };
        out.push('/');
        out.push_str(&s.replace('~', "~0").replace('/', "~1"));
    }
    out
}

/// Parse any document, reporting the JSON pointer of a malformed entry.
pub fn parse_doc<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let ptr = pointer_of(e.path());
        Error::Schema(format!("at {}: {}", if ptr.is_empty() { "/" } else { &ptr }, e.into_inner()))
    })
}

pub fn parse_workspace(text: &str) -> Result<WorkspaceDoc> {
    parse_doc(text)
}

/// Pretty JSON, LF-terminated.
pub fn emit<T: Serialize>(doc: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}

fn at(ptr: &str, e: Error) -> Error {
    match e {
        Error::Schema(m) => Error::Schema(format!("at {ptr}: {m}")),
        Error::Closure(m) => Error::Closure(format!("at {ptr}: {m}")),
        Error::UntrackedKernel(m) => Error::UntrackedKernel(format!("at {ptr}: {m}")),
        Error::IncompatibleRings(m) => Error::Schema(format!("at {ptr}: {m}")),
        Error::Verification(m) => Error::Schema(format!("at {ptr}: {m}")),
        other => other,
    }
}

fn q_of(s: &str, ptr: &str) -> Result<Q> {
    Q::from_str(s.trim()).map_err(|_| Error::Schema(format!("at {ptr}: {s:?} is not a rational \"p/q\"")))
}

pub fn q_text(c: &Q) -> String {
    c.to_string()
}

pub fn poly_to_doc(p: &Poly) -> PolyDoc {
    p.terms().map(|(m, c)| (q_text(c), m.clone())).collect()
}

pub fn elem_to_doc(e: &[Poly]) -> ElemDoc {
    e.iter().map(poly_to_doc).collect()
}

pub fn poly_from_doc(doc: &PolyDoc, nvars: usize, ptr: &str) -> Result<Poly> {
    let mut terms = Vec::with_capacity(doc.len());
    for (i, (c, e)) in doc.iter().enumerate() {
        let p = format!("{ptr}/{i}");
        if e.len() > nvars {
            return Err(Error::Schema(format!("at {p}: exponent vector of length {}, the ring has {nvars} variables", e.len())));
        }
        let mut e = e.clone();
        e.resize(nvars, 0);
        terms.push((e, q_of(c, &p)?));
    }
    Ok(Poly::from_terms(nvars, terms))
}

pub fn elem_from_doc(doc: &ElemDoc, nvars: usize, ptr: &str) -> Result<Elem> {
    doc.iter().enumerate().map(|(i, p)| poly_from_doc(p, nvars, &format!("{ptr}/{i}"))).collect()
}

pub fn module_to_doc(m: &Module) -> ModuleDoc {
    ModuleDoc { degrees: m.degrees().to_vec(), relations: m.relations().iter().map(|r| elem_to_doc(r)).collect() }
}

pub fn module_from_doc(doc: &ModuleDoc, ring: &crate::algebra::Ring, ptr: &str) -> Result<Module> {
    let mut rels = Vec::with_capacity(doc.relations.len());
    for (k, r) in doc.relations.iter().enumerate() {
        let p = format!("{ptr}/relations/{k}");
        let e = elem_from_doc(r, ring.nvars(), &p)?;
        if e.len() != doc.degrees.len() {
            return Err(Error::Schema(format!("at {p}: {} entries for {} generators", e.len(), doc.degrees.len())));
        }
        let degrees = crate::algebra::module::elem_degree(&e, &doc.degrees, &ring.weights());
        if degrees.is_err() {
            // name the offending entry
            let w = ring.weights();
            let mut seen: Option<i64> = None;
            for (j, q) in e.iter().enumerate() {
                for (mono, _) in q.terms() {
                    let d = crate::algebra::poly::mono_degree(mono, &w) + doc.degrees[j];
                    match seen {
                        None => seen = Some(d),
                        Some(s) if s != d => {
                            return Err(Error::Schema(format!("at {p}/{j}: entry has degree {d}, the relation has degree {s}")));
                        }
                        _ => {}
                    }
                }
            }
        }
        rels.push(e);
    }
    Module::new(ring.clone(), doc.degrees.clone(), rels).map_err(|e| at(ptr, e))
}

pub fn subgroup_to_doc(a: &ClosedSubgroup) -> SubgroupDoc {
    if *a == ClosedSubgroup::trivial(a.rank()) {
        return SubgroupDoc::Name("1".into());
    }
    if *a == ClosedSubgroup::whole(a.rank()) {
        return SubgroupDoc::Name("G".into());
    }
    SubgroupDoc::Descriptor {
        cocharacters: a.cocharacters(),
        finite: a.finite_generators().iter().map(|f| f.iter().map(|x| x.to_string()).collect()).collect(),
    }
}

pub fn subgroup_from_doc(doc: &SubgroupDoc, rank: usize, ptr: &str) -> Result<ClosedSubgroup> {
    match doc {
        SubgroupDoc::Name(n) if n == "1" => Ok(ClosedSubgroup::trivial(rank)),
        SubgroupDoc::Name(n) if n == "G" => Ok(ClosedSubgroup::whole(rank)),
        SubgroupDoc::Name(n) => Err(Error::Schema(format!("at {ptr}: unknown subgroup name {n:?} (use \"1\", \"G\" or a descriptor)"))),
        SubgroupDoc::Descriptor { cocharacters, finite } => {
            for (i, c) in cocharacters.iter().enumerate() {
                if c.len() != rank {
                    return Err(Error::Schema(format!("at {ptr}/cocharacters/{i}: length {}, rank {rank}", c.len())));
                }
            }
            let mut gens = Vec::with_capacity(finite.len());
            for (i, f) in finite.iter().enumerate() {
                if f.len() != rank {
                    return Err(Error::Schema(format!("at {ptr}/finite/{i}: length {}, rank {rank}", f.len())));
                }
                let mut v = Vec::with_capacity(rank);
                for (j, x) in f.iter().enumerate() {
                    v.push(Ratio::<i64>::from_str(x.trim()).map_err(|_| Error::Schema(format!("at {ptr}/finite/{i}/{j}: {x:?} is not a rational")))?);
                }
                gens.push(v);
            }
            Ok(ClosedSubgroup::from_descriptor(rank, cocharacters, &gens))
        }
    }
}

pub fn connected_from_doc(doc: &SubgroupDoc, rank: usize, ptr: &str) -> Result<ConnectedSubgroup> {
    ConnectedSubgroup::new(subgroup_from_doc(doc, rank, ptr)?).map_err(|e| at(ptr, e))
}

pub fn rep_from_doc(doc: &RepDoc, rank: usize, ptr: &str) -> Result<VirtualRepresentation> {
    let chars = |v: &[IntVec], name: &str| -> Result<Vec<Character>> {
        v.iter()
            .enumerate()
            .map(|(i, c)| {
                if c.len() != rank {
                    Err(Error::Schema(format!("at {ptr}/{name}/{i}: character of length {}, rank {rank}", c.len())))
                } else {
                    Ok(Character(c.clone()))
                }
            })
            .collect()
    };
    Ok(VirtualRepresentation::new(chars(&doc.positive, "positive")?, chars(&doc.negative, "negative")?))
}

pub fn rep_to_doc(v: &VirtualRepresentation) -> RepDoc {
    RepDoc { positive: v.positive.iter().map(|c| c.0.clone()).collect(), negative: v.negative.iter().map(|c| c.0.clone()).collect() }
}

fn pair_doc(p: &QuotientPair) -> PairDoc {
    PairDoc { upper: subgroup_to_doc(p.upper.as_closed()), lower: subgroup_to_doc(p.lower.as_closed()) }
}

fn pair_from_doc(doc: &PairDoc, rank: usize, ptr: &str) -> Result<QuotientPair> {
    let upper = connected_from_doc(&doc.upper, rank, &format!("{ptr}/upper"))?;
    let lower = connected_from_doc(&doc.lower, rank, &format!("{ptr}/lower"))?;
    QuotientPair::new(upper, lower).map_err(|e| at(ptr, e))
}

/// The full diagram: every value and every horizontal and vertical map.
pub fn diagram_to_doc(y: &DiagramModule, quotient: Option<&ConnectedSubgroup>) -> DiagramDoc {
    let s = y.structure();
    let mut values = Vec::new();
    for (v, cells) in y.values() {
        for (a, m) in cells {
            values.push(ValueDoc { vertex: pair_doc(v), cell: subgroup_to_doc(a), module: module_to_doc(m) });
        }
    }
    let edges = |maps: &BTreeMap<(QuotientPair, QuotientPair), Cells<ModMap>>, keep: &[(QuotientPair, QuotientPair)]| {
        let mut out = Vec::new();
        for e in keep {
            if let Some(cells) = maps.get(e) {
                for (a, f) in cells {
                    out.push(EdgeDoc { from: pair_doc(&e.0), to: pair_doc(&e.1), cell: subgroup_to_doc(a), images: f.images().iter().map(|i| elem_to_doc(i)).collect() });
                }
            }
        }
        out
    };
    DiagramDoc::Diagram {
        beta: edges(y.beta_maps(), &beta_edges(s)),
        alpha: edges(y.alpha_maps(), &alpha_edges(s)),
        values,
        quotient: quotient.map(|m| subgroup_to_doc(m.as_closed())),
    }
}

fn lookup<'a, T>(cells: &'a BTreeMap<(QuotientPair, ClosedSubgroup), T>, v: &QuotientPair, a: &ClosedSubgroup, ptr: &str) -> Result<&'a T> {
    cells.get(&(v.clone(), a.clone())).ok_or_else(|| Error::Schema(format!("at {ptr}: no value given at vertex {v}, cell {a}")))
}

/// Build a diagram module over `s` from its document.
pub fn diagram_from_doc(s: &Arc<Structure>, doc: &DiagramDoc, ptr: &str) -> Result<DiagramModule> {
    let r = s.rank();
    match doc {
        DiagramDoc::Zero { .. } => DiagramModule::zero(s.clone()),
        DiagramDoc::Sphere { representation, .. } => crate::diagram::sphere(s, &rep_from_doc(representation, r, &format!("{ptr}/representation"))?).map_err(|e| at(ptr, e)),
        DiagramDoc::Extended { phi, basings, .. } => {
            let mut mods: BTreeMap<ConnectedSubgroup, Cells<Module>> = BTreeMap::new();
            for (i, e) in phi.iter().enumerate() {
                let p = format!("{ptr}/phi/{i}");
                let k = connected_from_doc(&e.subgroup, r, &format!("{p}/subgroup"))?;
                let a = subgroup_from_doc(&e.cell, r, &format!("{p}/cell"))?;
                let ring = s.ring(&k, &k).map_err(|e| at(&p, e))?;
                mods.entry(k).or_default().insert(a, module_from_doc(&e.module, &ring, &format!("{p}/module"))?);
            }
            let mut bs: BTreeMap<(ConnectedSubgroup, ConnectedSubgroup), Cells<ModMap>> = BTreeMap::new();
            for (i, b) in basings.iter().enumerate() {
                let p = format!("{ptr}/basings/{i}");
                let k = connected_from_doc(&b.upper, r, &format!("{p}/upper"))?;
                let l = connected_from_doc(&b.lower, r, &format!("{p}/lower"))?;
                let a = subgroup_from_doc(&b.cell, r, &format!("{p}/cell"))?;
                let ring = s.ring(&k, &l).map_err(|e| at(&p, e))?;
                let src = mods.get(&l).and_then(|c| c.get(&a)).ok_or_else(|| Error::Schema(format!("at {p}: no fixed points at {l}, cell {a}")))?;
                let img = s.cell_image(&a, &k);
                let tgt = mods.get(&k).and_then(|c| c.get(&img)).ok_or_else(|| Error::Schema(format!("at {p}: no fixed points at {k}, cell {img}")))?;
                let tgt = tgt.base_change(&s.vertical(&k, &k, &l).map_err(|e| at(&p, e))?).map_err(|e| at(&p, e))?;
                let images = b.images.iter().enumerate().map(|(j, x)| elem_from_doc(x, ring.nvars(), &format!("{p}/images/{j}"))).collect::<Result<Vec<_>>>()?;
                bs.entry((k, l)).or_default().insert(a, ModMap::new(src.clone(), tgt, images, 0).map_err(|e| at(&p, e))?);
            }
            ExtendedModule::from_covers(s.clone(), mods, bs).and_then(|m| m.to_diagram()).map_err(|e| at(ptr, e))
        }
        DiagramDoc::Diagram { values, beta, alpha, .. } => {
            let mut flat: BTreeMap<(QuotientPair, ClosedSubgroup), Module> = BTreeMap::new();
            for (i, e) in values.iter().enumerate() {
                let p = format!("{ptr}/values/{i}");
                let v = pair_from_doc(&e.vertex, r, &format!("{p}/vertex"))?;
                let a = subgroup_from_doc(&e.cell, r, &format!("{p}/cell"))?;
                let ring = s.ring_at(&v).map_err(|e| at(&p, e))?;
                flat.insert((v, a), module_from_doc(&e.module, &ring, &format!("{p}/module"))?);
            }
            let mut vals: BTreeMap<QuotientPair, Cells<Module>> = BTreeMap::new();
            for ((v, a), m) in &flat {
                vals.entry(v.clone()).or_default().insert(a.clone(), m.clone());
            }
            let mut bmaps: BTreeMap<(QuotientPair, QuotientPair), Cells<ModMap>> = BTreeMap::new();
            for (i, e) in beta.iter().enumerate() {
                let p = format!("{ptr}/beta/{i}");
                let (x, y) = (pair_from_doc(&e.from, r, &format!("{p}/from"))?, pair_from_doc(&e.to, r, &format!("{p}/to"))?);
                let a = subgroup_from_doc(&e.cell, r, &format!("{p}/cell"))?;
                let (src, tgt) = (lookup(&flat, &x, &a, &p)?, lookup(&flat, &y, &a, &p)?);
                let images = e.images.iter().enumerate().map(|(j, v)| elem_from_doc(v, tgt.ring().nvars(), &format!("{p}/images/{j}"))).collect::<Result<Vec<_>>>()?;
                bmaps.entry((x, y)).or_default().insert(a, ModMap::new(src.clone(), tgt.clone(), images, 0).map_err(|e| at(&p, e))?);
            }
            let mut amaps: BTreeMap<(QuotientPair, QuotientPair), Cells<ModMap>> = BTreeMap::new();
            for (i, e) in alpha.iter().enumerate() {
                let p = format!("{ptr}/alpha/{i}");
                let (x, y) = (pair_from_doc(&e.from, r, &format!("{p}/from"))?, pair_from_doc(&e.to, r, &format!("{p}/to"))?);
                let a = subgroup_from_doc(&e.cell, r, &format!("{p}/cell"))?;
                let rm = s.vertical(&x.upper, &x.lower, &y.lower).map_err(|e| at(&p, e))?;
                let src = lookup(&flat, &x, &s.cell_image(&a, &x.lower), &p)?.base_change(&rm).map_err(|e| at(&p, e))?;
                let tgt = lookup(&flat, &y, &a, &p)?;
                let images = e.images.iter().enumerate().map(|(j, v)| elem_from_doc(v, tgt.ring().nvars(), &format!("{p}/images/{j}"))).collect::<Result<Vec<_>>>()?;
                amaps.entry((x, y)).or_default().insert(a, ModMap::new(src, tgt.clone(), images, 0).map_err(|e| at(&p, e))?);
            }
            DiagramModule::new(s.clone(), vals, bmaps, amaps).map_err(|e| at(ptr, e))
        }
    }
}

/// Overrides from the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub window: Option<DegreeWindow>,
    pub preset: Option<String>,
}

/// A parsed and validated workspace.
#[derive(Clone, Debug)]
pub struct Workspace {
    pub doc: WorkspaceDoc,
    pub structure: Arc<Structure>,
    pub window: DegreeWindow,
}

pub fn tracked_from_doc(rank: usize, doc: &TrackedDoc, preset: Option<&str>) -> Result<TrackedPoset> {
    match preset {
        Some(SEMIFREE_PRESET) => {
            if rank != 1 {
                return Err(Error::Schema(format!("at /preset: {SEMIFREE_PRESET} needs rank 1, got {rank}")));
            }
            Ok(TrackedPoset::semifree_circle())
        }
        Some(other) => Err(Error::Schema(format!("at /preset: unknown preset {other:?}"))),
        None => {
            let conn = doc.connected.iter().enumerate().map(|(i, c)| connected_from_doc(c, rank, &format!("/tracked/connected/{i}"))).collect::<Result<Vec<_>>>()?;
            for (i, c) in doc.characters.iter().enumerate() {
                if c.len() != rank {
                    return Err(Error::Schema(format!("at /tracked/characters/{i}: length {}, rank {rank}", c.len())));
                }
            }
            let chars: Vec<Character> = doc.characters.iter().cloned().map(Character).collect();
            TrackedPoset::generate(rank, &conn, &chars).map_err(|e| at("/tracked", e))
        }
    }
}

impl Workspace {
    pub fn new(doc: WorkspaceDoc, ov: &Overrides) -> Result<Self> {
        if doc.rank == 0 {
            return Err(Error::Schema("at /rank: the rank must be positive".into()));
        }
        let preset = ov.preset.as_deref().or(doc.preset.as_deref());
        let tracked = tracked_from_doc(doc.rank, &doc.tracked, preset)?;
        let structure = Structure::new(tracked).map_err(|e| at("/tracked", e))?;
        let window = match (ov.window, doc.window) {
            (Some(w), _) => w,
            (None, Some((lo, hi))) => DegreeWindow::new(lo, hi).map_err(|e| at("/window", e))?,
            (None, None) => DegreeWindow::new(DEFAULT_WINDOW.0, DEFAULT_WINDOW.1)?,
        };
        Ok(Self { doc, structure, window })
    }

    pub fn parse(text: &str, ov: &Overrides) -> Result<Self> {
        Self::new(parse_workspace(text)?, ov)
    }

    /// The structure a named module lives over, and the quotient subgroup.
    pub fn structure_of(&self, name: &str) -> Result<(Arc<Structure>, Option<ConnectedSubgroup>)> {
        let doc = self.module_doc(name)?;
        match doc.quotient() {
            None => Ok((self.structure.clone(), None)),
            Some(q) => {
                let ptr = format!("/modules/{name}/quotient");
                let m = connected_from_doc(q, self.doc.rank, &ptr)?;
                Ok((self.structure.over_quotient(&m).map_err(|e| at(&ptr, e))?, Some(m)))
            }
        }
    }

    pub fn module_doc(&self, name: &str) -> Result<&DiagramDoc> {
        self.doc.modules.get(name).ok_or_else(|| Error::Schema(format!("at /modules/{name}: no module named {name:?}")))
    }

    pub fn module(&self, name: &str) -> Result<DiagramModule> {
        let (s, _) = self.structure_of(name)?;
        diagram_from_doc(&s, self.module_doc(name)?, &format!("/modules/{name}"))
    }
}

/// One pass/fail line of a report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

/// A named table of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<serde_json::Value>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub operation: String,
    pub inputs_digest: String,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub passed: bool,
    /// Wall time; not part of the deterministic content.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl Report {
    pub fn new(operation: &str, inputs_digest: String) -> Self {
        Self { operation: operation.into(), inputs_digest, tables: Vec::new(), checks: Vec::new(), passed: true, timing_ms: None }
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.passed &= passed;
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn table(&mut self, name: &str, columns: &[&str], rows: Vec<Vec<serde_json::Value>>) {
        self.tables.push(Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows });
    }
}

/// SHA-256 of the canonical workspace document and the command arguments.
pub fn inputs_digest(doc: &WorkspaceDoc, args: &[String]) -> Result<String> {
    let canon = serde_json::to_string(&(doc, args))?;
    Ok(hex::encode(Sha256::digest(canon.as_bytes())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_workspace_parses() {
        let ws = Workspace::parse(r#"{"rank": 1}"#, &Overrides::default()).unwrap();
        assert_eq!(ws.structure.subgroups().len(), 2);
        assert!(ws.doc.modules.is_empty());
        assert_eq!((ws.window.lo, ws.window.hi), DEFAULT_WINDOW);
    }

    #[test]
    fn unknown_fields_and_bad_rationals_name_their_place() {
        let e = parse_workspace(r#"{"rank": 1, "modules": {"Y": {"kind": "sphere", "representation": {"positive": [[1]], "bogus": 1}}}}"#).unwrap_err();
        assert!(e.to_string().contains("/modules/Y"), "{e}");
        let text = r#"{"rank": 1, "modules": {"Y": {"kind": "extended", "phi": [
            {"subgroup": "1", "cell": "1", "module": {"degrees": [0], "relations": [[[["x/2", [1]]]]]}},
            {"subgroup": "G", "cell": "G", "module": {"degrees": [0]}}]}}}"#;
        let ws = Workspace::parse(text, &Overrides { preset: Some(SEMIFREE_PRESET.into()), window: None }).unwrap();
        let e = ws.module("Y").unwrap_err();
        assert!(e.to_string().contains("/modules/Y/phi/0/module/relations/0/0/0"), "{e}");
        assert_eq!(ws.module("Z").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn inhomogeneous_entry_is_named() {
        // relation (c, 1) on generators of degrees 0, 0 mixes degrees 2 and 0
        let text = r#"{"rank": 1, "preset": "semifree-circle", "modules": {"Y": {"kind": "extended", "phi": [
            {"subgroup": "1", "cell": "1", "module": {"degrees": [0, 0], "relations": [[[["1", [1]]], [["1", [0]]]]]}},
            {"subgroup": "G", "cell": "G", "module": {"degrees": []}}]}}}"#;
        let ws = Workspace::parse(text, &Overrides::default()).unwrap();
        let e = ws.module("Y").unwrap_err();
        assert!(matches!(e, Error::Schema(_)));
        assert!(e.to_string().contains("/modules/Y/phi/0/module/relations/0/1"), "{e}");
    }

    #[test]
    fn modules_survive_a_round_trip() {
        let s = Structure::new(TrackedPoset::generate(2, &[ConnectedSubgroup::circle(&[1, 0]), ConnectedSubgroup::circle(&[1, 1])], &[Character(vec![2, 0])]).unwrap()).unwrap();
        let y = crate::diagram::sphere(&s, &VirtualRepresentation::from_chars(&[&[1, 0], &[2, 0]])).unwrap();
        let doc = diagram_to_doc(&y, None);
        let text = emit(&doc).unwrap();
        let back: DiagramDoc = parse_doc(&text).unwrap();
        assert_eq!(back, doc);
        let z = diagram_from_doc(&s, &back, "").unwrap();
        assert!(crate::experiments::same_diagram(&y, &z));
        assert_eq!(diagram_to_doc(&z, None), doc);
    }

    #[test]
    fn subgroups_round_trip() {
        let a = ClosedSubgroup::from_descriptor(2, &[vec![1, 1]], &[vec![Ratio::new(1, 2), Ratio::new(0, 1)]]);
        let doc = subgroup_to_doc(&a);
        assert_eq!(subgroup_from_doc(&doc, 2, "").unwrap(), a);
        assert_eq!(subgroup_to_doc(&ClosedSubgroup::trivial(3)), SubgroupDoc::Name("1".into()));
    }

    #[test]
    fn digest_is_deterministic() {
        let doc = parse_workspace(r#"{"rank": 2}"#).unwrap();
        let a = inputs_digest(&doc, &["x".into()]).unwrap();
        assert_eq!(a, inputs_digest(&doc, &["x".into()]).unwrap());
        assert_ne!(a, inputs_digest(&doc, &["y".into()]).unwrap());
        assert_eq!(a.len(), 64);
    }
}
