//! Algebra files, command execution, run reports and the artifact cache.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::algebra::{validate, LieAlgebra, StructureTensor, SubalgebraSetup};
use crate::corpus;
use crate::enveloping::{
    center_of, invariants_up_to_degree, is_commutative, poisson_center_of, s_invariants_up_to_degree, EpsMode,
    Enveloping, QuotientOptions,
};
use crate::error::{Error, Result};
use crate::graphs::{enumerate_admissible, estimate_weight_mc, kontsevich_star_truncated, order_two_table, KGraph, WeightTable};
use crate::poly::{parse_polynomial, EpsPolynomial};
use crate::quantization::{duflo_center_check, duflo_report, gutt_star};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::reduction::{solve_reduction, theorem5_roundtrip, theorem6_check, ReductionDifferential};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketEntry {
    pub left: String,
    pub right: String,
    pub result: BTreeMap<String, String>,
}

/// On-disk algebra description; rationals are strings `"p/q"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub name: String,
    pub basis: Vec<String>,
    #[serde(default)]
    pub brackets: Vec<BracketEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subalgebra: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<BTreeMap<String, String>>,
}

/// A validated algebra with its optional subalgebra and character.
#[derive(Clone, Debug)]
pub struct Ingested {
    pub algebra: LieAlgebra,
    pub setup: Option<SubalgebraSetup>,
}

impl AlgebraFile {
    pub fn from_algebra(algebra: &LieAlgebra, setup: Option<&SubalgebraSetup>) -> Self {
        let names = algebra.basis_names();
        let mut brackets = Vec::new();
        for i in 0..algebra.dim() {
            for j in i + 1..algebra.dim() {
                let b = algebra.bracket_basis(i, j);
                if b.is_empty() {
                    continue;
                }
                brackets.push(BracketEntry {
                    left: names[i].clone(),
                    right: names[j].clone(),
                    result: b.iter().map(|(k, c)| (names[*k].clone(), format_rational(c))).collect(),
                });
            }
        }
        let (subalgebra, lambda) = match setup {
            Some(s) => {
                let h: Vec<String> = s.h_indices().map(|i| s.names()[i].clone()).collect();
                let lam: BTreeMap<String, String> = s
                    .h_indices()
                    .filter(|i| !s.lambda(*i).is_zero())
                    .map(|i| (s.names()[i].clone(), format_rational(&s.lambda(i))))
                    .collect();
                (Some(h), Some(lam))
            }
            None => (None, None),
        };
        AlgebraFile {
            name: algebra.name().to_string(),
            basis: names.to_vec(),
            brackets,
            subalgebra,
            lambda,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    /// Builds and validates, collecting every violation before failing.
    pub fn build(&self) -> Result<Ingested> {
        let mut errors = Vec::new();
        let mut index = BTreeMap::new();
        for (i, n) in self.basis.iter().enumerate() {
            if n == "eps" || n == "t" || !n.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_') {
                errors.push(format!("invalid basis name {n:?}"));
            }
            if index.insert(n.clone(), i).is_some() {
                errors.push(format!("basis name {n} repeated"));
            }
        }
        if self.basis.is_empty() {
            errors.push("basis is empty".into());
        }
        let lookup = |n: &str, errors: &mut Vec<String>| {
            let r = index.get(n).copied();
            if r.is_none() {
                errors.push(format!("unknown basis element {n:?}"));
            }
            r
        };
        let mut entries: BTreeMap<(usize, usize, usize), Rational> = BTreeMap::new();
        for b in &self.brackets {
            let (l, r) = (lookup(&b.left, &mut errors), lookup(&b.right, &mut errors));
            let mut res = Vec::new();
            for (k, v) in &b.result {
                let kk = lookup(k, &mut errors);
                match parse_rational(v) {
                    Ok(c) => res.extend(kk.map(|kk| (kk, c))),
                    Err(_) => errors.push(format!("[{}, {}]: invalid rational {v:?}", b.left, b.right)),
                }
            }
            let (Some(l), Some(r)) = (l, r) else { continue };
            if l == r {
                if res.iter().any(|(_, c)| !c.is_zero()) {
                    errors.push(format!("antisymmetry violated: [{0}, {0}] != 0", b.left));
                }
                continue;
            }
            for (k, c) in res {
                for (key, val) in [((l, r, k), c.clone()), ((r, l, k), -c)] {
                    if let Some(old) = entries.insert(key, val.clone()) {
                        if old != val {
                            errors.push(format!(
                                "antisymmetry violated: conflicting values for [{}, {}] along {}",
                                b.left, b.right, self.basis[k]
                            ));
                        }
                    }
                }
            }
        }
        if !errors.is_empty() {
            return Err(Error::Validation(dedup(errors)));
        }
        let tensor = StructureTensor::from_entries(
            self.basis.len(),
            entries.into_iter().map(|((i, j, k), c)| (i, j, k, c)),
        )?;
        let report = validate(&tensor);
        let mut errors = report.describe(&self.basis);
        let mut setup_errors = Vec::new();
        let mut lam = BTreeMap::new();
        for (n, v) in self.lambda.iter().flatten() {
            let i = lookup(n, &mut setup_errors);
            match parse_rational(v) {
                Ok(c) => {
                    if let Some(i) = i {
                        lam.insert(i, c);
                    }
                }
                Err(_) => setup_errors.push(format!("lambda({n}): invalid rational {v:?}")),
            }
        }
        let h: Vec<usize> = self
            .subalgebra
            .iter()
            .flatten()
            .filter_map(|n| lookup(n, &mut setup_errors))
            .collect();
        if self.subalgebra.is_none() && !lam.is_empty() {
            setup_errors.push("lambda given without a subalgebra".into());
        }
        errors.extend(setup_errors);
        if !errors.is_empty() {
            return Err(Error::Validation(errors));
        }
        let algebra = LieAlgebra::new(self.name.clone(), self.basis.clone(), tensor)?;
        let setup = match &self.subalgebra {
            Some(_) => Some(SubalgebraSetup::new(&algebra, &h, &lam)?),
            None => None,
        };
        Ok(Ingested { algebra, setup })
    }
}

fn dedup(v: Vec<String>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    v.into_iter().filter(|s| seen.insert(s.clone())).collect()
}

pub fn ingest_str(text: &str) -> Result<Ingested> {
    let file: AlgebraFile = serde_json::from_str(text)?;
    file.build()
}

pub fn ingest(path: &Path) -> Result<Ingested> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    ingest_str(&text)
}

/// A built-in name (with its default setup) or a path to an algebra file.
pub fn resolve(target: &str) -> Result<Ingested> {
    if let Some(algebra) = corpus::by_name(target) {
        return Ok(Ingested {
            setup: corpus::default_setup(target),
            algebra,
        });
    }
    let p = Path::new(target);
    if p.exists() {
        ingest(p)
    } else {
        Err(Error::InvalidArgument(format!(
            "{target:?} is neither a built-in algebra ({}) nor a file",
            corpus::NAMES.join(", ")
        )))
    }
}

/// `--subalgebra` / `--lambda` overrides on top of a resolved target.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Target {
    pub target: String,
    pub subalgebra: Option<Vec<String>>,
    pub lambda: Vec<(String, String)>,
}

impl Target {
    pub fn builtin(name: &str) -> Self {
        Target {
            target: name.into(),
            ..Default::default()
        }
    }

    pub fn with_subalgebra(mut self, h: &[&str], lambda: &[(&str, &str)]) -> Self {
        self.subalgebra = Some(h.iter().map(|s| s.to_string()).collect());
        self.lambda = lambda.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        self
    }

    pub fn algebra(&self) -> Result<LieAlgebra> {
        Ok(resolve(&self.target)?.algebra)
    }

    pub fn setup(&self) -> Result<SubalgebraSetup> {
        let ing = resolve(&self.target)?;
        if self.subalgebra.is_none() && self.lambda.is_empty() {
            return ing.setup.ok_or_else(|| {
                Error::InvalidArgument(format!("{} has no subalgebra; pass --subalgebra", self.target))
            });
        }
        let h: Vec<&str> = match &self.subalgebra {
            Some(h) => h.iter().map(String::as_str).collect(),
            None => {
                let s = ing.setup.as_ref().ok_or_else(|| Error::InvalidArgument("--lambda needs --subalgebra".into()))?;
                s.h_indices().map(|i| s.names()[i].as_str()).collect()
            }
        };
        let lam = self
            .lambda
            .iter()
            .map(|(n, v)| Ok((n.as_str(), parse_rational(v)?)))
            .collect::<Result<Vec<_>>>()?;
        SubalgebraSetup::by_names(&ing.algebra, &h, &lam)
    }

    fn echo(&self) -> Value {
        json!({
            "target": self.target,
            "subalgebra": self.subalgebra,
            "lambda": self.lambda.iter().map(|(a, b)| (a.clone(), Value::from(b.clone()))).collect::<serde_json::Map<_, _>>(),
        })
    }
}

/// Parses `X=p/q,Y=r` lists.
pub fn parse_lambda_list(s: &str) -> Result<Vec<(String, String)>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (a, b) = p
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected NAME=value, got {p:?}")))?;
            parse_rational(b.trim()).map_err(|e| Error::InvalidArgument(format!("{p:?}: {e}")))?;
            Ok((a.trim().to_string(), b.trim().to_string()))
        })
        .collect()
}

/// Structural summary of an algebra and its setup.
pub fn validation_report(algebra: &LieAlgebra, setup: Option<&SubalgebraSetup>) -> Value {
    json!({
        "name": algebra.name(),
        "dim": algebra.dim(),
        "basis": algebra.basis_names(),
        "valid": true,
        "errors": Vec::<String>::new(),
        "abelian": algebra.is_abelian(),
        "nilpotent": algebra.is_nilpotent(),
        "lower_central_series": algebra.lower_central_series(),
        "subalgebra": setup.map(|s| json!({
            "h": s.h_indices().map(|i| s.names()[i].clone()).collect::<Vec<_>>(),
            "q": s.q_names(),
            "lambda": s.h_indices().map(|i| (s.names()[i].clone(), Value::from(format_rational(&s.lambda(i))))).collect::<serde_json::Map<_, _>>(),
        })),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    U,
    S,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StarMethod {
    Gutt,
    Kontsevich,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    Validate {
        path: PathBuf,
    },
    Invariants {
        target: Target,
        n: u32,
        side: Side,
        eps: EpsMode,
        lambda_eps_scaling: bool,
    },
    Commutativity {
        target: Target,
        n: u32,
        eps: EpsMode,
    },
    CentersCompare {
        target: Target,
        n: u32,
    },
    Reduce {
        target: Target,
        n: u32,
        eps_order: usize,
        weights: Option<PathBuf>,
    },
    Star {
        target: String,
        method: StarMethod,
        order: usize,
        f: String,
        g: String,
        weights: Option<PathBuf>,
    },
    Duflo {
        target: String,
        truncation: u32,
    },
    GraphsEnum {
        n: usize,
        m: usize,
        up_to_iso: bool,
    },
    WeightsMc {
        graph: String,
        samples: u64,
        seed: u64,
    },
    Theorem5Roundtrip {
        target: Target,
        n: u32,
        eps_order: usize,
    },
    Theorem6Check {
        target: Target,
        n: u32,
        eps_order: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Invariants { .. } => "invariants",
            Command::Commutativity { .. } => "commutativity",
            Command::CentersCompare { .. } => "centers-compare",
            Command::Reduce { .. } => "reduce",
            Command::Star { .. } => "star",
            Command::Duflo { .. } => "duflo",
            Command::GraphsEnum { .. } => "graphs enum",
            Command::WeightsMc { .. } => "weights mc",
            Command::Theorem5Roundtrip { .. } => "theorem5 roundtrip",
            Command::Theorem6Check { .. } => "theorem6 check",
        }
    }

    fn config(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("serializable");
        if let Some(o) = v.as_object_mut() {
            o.remove("command");
            if let Some(t) = o.get("target").cloned() {
                if t.is_object() {
                    if let Command::Invariants { target, .. }
                    | Command::Commutativity { target, .. }
                    | Command::CentersCompare { target, .. }
                    | Command::Reduce { target, .. }
                    | Command::Theorem5Roundtrip { target, .. }
                    | Command::Theorem6Check { target, .. } = self
                    {
                        o.insert("target".into(), target.echo());
                    }
                }
            }
        }
        v
    }
}

/// Outcome of one command: a deterministic JSON document plus a short text
/// summary and the exit status.
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub config: Value,
    pub results: Value,
    pub seeds: Vec<u64>,
    pub timings: Option<Value>,
    pub text: String,
    pub exit_code: i32,
}

impl RunReport {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "schema_version": SCHEMA_VERSION,
            "tool_version": TOOL_VERSION,
            "command": self.command,
            "config": self.config,
            "seeds": self.seeds,
            "results": self.results,
        });
        if let Some(t) = &self.timings {
            v["timings"] = t.clone();
        }
        v
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("serializable") + "\n"
    }
}

/// Exit status for a failed command: 1 usage, 2 validation, 3 overflow.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DegreeOverflow { .. } | Error::SizeCap { .. } => 3,
        Error::InvalidArgument(_) | Error::Arity { .. } => 1,
        _ => 2,
    }
}

fn load_weights(path: &Option<PathBuf>) -> Result<Option<WeightTable>> {
    path.as_ref()
        .map(|p| {
            let s = fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            WeightTable::from_str(&s)
        })
        .transpose()
}

fn differential(weights: &Option<WeightTable>, eps_order: usize) -> Result<ReductionDifferential> {
    match weights {
        Some(t) => ReductionDifferential::from_weights(t, eps_order),
        None => Ok(ReductionDifferential::with_zero_higher(eps_order)),
    }
}

pub fn run(cmd: &Command, timings: bool) -> Result<RunReport> {
    let start = Instant::now();
    let mut seeds = Vec::new();
    let mut exit = 0;
    let (results, text) = match cmd {
        Command::Validate { path } => match ingest(path) {
            Ok(ing) => {
                let r = validation_report(&ing.algebra, ing.setup.as_ref());
                let t = format!("{}: valid, dim {}", ing.algebra.name(), ing.algebra.dim());
                (r, t)
            }
            Err(e @ (Error::Validation(_) | Error::Parse { .. } | Error::Structure(_))) => {
                exit = 2;
                let errors = match &e {
                    Error::Validation(v) => v.clone(),
                    other => vec![other.to_string()],
                };
                let t = format!("invalid: {}", errors.join("; "));
                (json!({"valid": false, "errors": errors}), t)
            }
            Err(e) => return Err(e),
        },
        Command::Invariants {
            target,
            n,
            side,
            eps,
            lambda_eps_scaling,
        } => {
            let setup = target.setup()?;
            match side {
                Side::U => {
                    let opts = QuotientOptions {
                        lambda_eps_scaling: *lambda_eps_scaling,
                    };
                    let pres = invariants_up_to_degree(&setup, *n, *eps, opts)?;
                    let c = is_commutative(&pres);
                    let mut r = pres.to_json();
                    r["commutative"] = json!(c.commutative);
                    r["commutator_witness"] = json!(c.witness.as_ref().map(|(i, j, w)| json!({
                        "pair": [i, j],
                        "commutator": w.format(setup.names()),
                    })));
                    let t = format!("dim {} through degree {}, commutative: {:?}", pres.dim(), n, c.commutative);
                    (r, t)
                }
                Side::S => {
                    let pres = s_invariants_up_to_degree(&setup, *n)?;
                    let commutative = pres
                        .basis
                        .iter()
                        .all(|a| pres.basis.iter().all(|b| pres.bracket(a, b).is_zero()));
                    let mut r = pres.to_json();
                    r["poisson_commutative"] = json!(commutative);
                    let t = format!("dim {} through degree {}", pres.basis.len(), n);
                    (r, t)
                }
            }
        }
        Command::Commutativity { target, n, eps } => {
            let setup = target.setup()?;
            let pres = invariants_up_to_degree(&setup, *n, *eps, QuotientOptions::default())?;
            let c = is_commutative(&pres);
            let r = json!({
                "commutative": c.commutative,
                "tested_pairs": c.tested,
                "overflowed_pairs": c.overflowed,
                "witness": c.witness.as_ref().map(|(i, j, w)| json!({
                    "left": pres.basis[*i].format(setup.names()),
                    "right": pres.basis[*j].format(setup.names()),
                    "commutator": w.format(setup.names()),
                })),
            });
            (r, format!("commutative: {:?}", c.commutative))
        }
        Command::CentersCompare { target, n } => {
            let setup = target.setup()?;
            let names = setup.names();
            let pres = invariants_up_to_degree(&setup, *n, EpsMode::Symbolic, QuotientOptions::default())?;
            let uc = center_of(&pres);
            let spres = s_invariants_up_to_degree(&setup, *n)?;
            let sc = poisson_center_of(&spres);
            let duflo = duflo_center_check(setup.algebra(), *n)?;
            let r = json!({
                "u_center": {
                    "degree_dims": uc.degree_dims,
                    "basis": uc.basis.iter().map(|b| b.format(names)).collect::<Vec<_>>(),
                    "overflow": uc.overflow,
                    "complete": uc.complete,
                },
                "s_center": {
                    "degree_dims": sc.degree_dims,
                    "basis": sc.basis.iter().map(|b| b.format(names)).collect::<Vec<_>>(),
                },
                "dims_match": uc.degree_dims == sc.degree_dims,
                "duflo_on_full_invariants": duflo.to_json(names),
            });
            let t = format!("center dims U {:?} vs S {:?}", uc.degree_dims, sc.degree_dims);
            (r, t)
        }
        Command::Reduce {
            target,
            n,
            eps_order,
            weights,
        } => {
            let setup = target.setup()?;
            let diff = differential(&load_weights(weights)?, *eps_order)?;
            let sp = solve_reduction(&setup, &diff, *eps_order, *n)?;
            let t = format!("H0 dims {:?} (orders {:?})", sp.degree_dims, sp.imposed_orders);
            (sp.to_json(), t)
        }
        Command::Star {
            target,
            method,
            order,
            f,
            g,
            weights,
        } => {
            let alg = resolve(target)?.algebra;
            let names = alg.basis_names();
            let fp = EpsPolynomial::constant(parse_polynomial(f, names)?);
            let gp = EpsPolynomial::constant(parse_polynomial(g, names)?);
            let prod = match method {
                StarMethod::Gutt => gutt_star(&Enveloping::new(&alg), &fp, &gp)?.truncate(*order),
                StarMethod::Kontsevich => {
                    let table = load_weights(weights)?.unwrap_or_else(order_two_table);
                    kontsevich_star_truncated(&alg, &fp, &gp, &table, *order)?
                }
            };
            let per_order: Vec<String> = (0..=*order).map(|k| prod.coeff(k).format(names)).collect();
            let t = prod.format(names);
            (json!({"product": prod.format(names), "per_order": per_order}), t)
        }
        Command::Duflo { target, truncation } => {
            let alg = resolve(target)?.algebra;
            let r = duflo_report(&alg, *truncation);
            let t = format!("q = {}", r["q"].as_str().unwrap_or(""));
            (r, t)
        }
        Command::GraphsEnum { n, m, up_to_iso } => {
            let gs = enumerate_admissible(*n, *m, *up_to_iso)?;
            let ids: Vec<String> = gs.iter().map(|g| g.canonical_id().to_string()).collect();
            let t = ids.join("\n");
            (json!({"count": gs.len(), "graphs": ids}), t)
        }
        Command::WeightsMc { graph, samples, seed } => {
            seeds.push(*seed);
            let g = KGraph::parse(graph)?;
            let e = estimate_weight_mc(&g, *samples, *seed)?;
            let r = json!({
                "graph": g.canonical_id(),
                "estimate": e.estimate,
                "stderr": e.stderr,
                "samples": e.samples,
                "provenance": "mc-estimate",
            });
            (r, format!("{} = {} +- {}", g.canonical_id(), e.estimate, e.stderr))
        }
        Command::Theorem5Roundtrip { target, n, eps_order } => {
            let setup = target.setup()?;
            let diff = ReductionDifferential::with_zero_higher(*eps_order);
            let r = theorem5_roundtrip(&setup, &diff, *eps_order, *n)?;
            if !r.all_ok() {
                exit = 2;
            }
            let t = format!("{} elements, all ok: {}", r.entries.len(), r.all_ok());
            (r.to_json(setup.names()), t)
        }
        Command::Theorem6Check { target, n, eps_order } => {
            let setup = target.setup()?;
            let diff = ReductionDifferential::with_zero_higher(*eps_order);
            let r = theorem6_check(&setup, *n, *eps_order, &diff)?;
            match r.verdict() {
                "inconsistent" => exit = 2,
                "inconclusive" => exit = 3,
                _ => {}
            }
            let t = format!("verdict: {}", r.verdict());
            (r.to_json(), t)
        }
    };
    Ok(RunReport {
        command: cmd.name().to_string(),
        config: cmd.config(),
        results,
        seeds,
        timings: timings.then(|| json!({"elapsed_ms": start.elapsed().as_millis() as u64})),
        text,
        exit_code: exit,
    })
}

/// Content-addressed store of JSON artifacts keyed by `(kind, key, version)`.
#[derive(Clone, Debug)]
pub struct ArtifactCache {
    root: PathBuf,
    version: String,
}

fn sha256_hex(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

impl ArtifactCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self::with_version(root, TOOL_VERSION)
    }

    pub fn with_version(root: impl Into<PathBuf>, version: &str) -> Self {
        ArtifactCache {
            root: root.into(),
            version: version.to_string(),
        }
    }

    pub fn key_hash(&self, kind: &str, key: &Value) -> String {
        let material = json!({"kind": kind, "key": key, "tool_version": self.version});
        sha256_hex(&material.to_string())
    }

    pub fn path_for(&self, kind: &str, key: &Value) -> PathBuf {
        self.root.join(format!("{kind}-{}.json", self.key_hash(kind, key)))
    }

    /// Writes through a temporary file and an atomic rename.
    pub fn store(&self, kind: &str, key: &Value, payload: &Value) -> Result<PathBuf> {
        fs::create_dir_all(&self.root)?;
        let path = self.path_for(kind, key);
        let doc = json!({
            "kind": kind,
            "key": key,
            "tool_version": self.version,
            "payload_sha256": sha256_hex(&payload.to_string()),
            "payload": payload,
        });
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root)?;
        tmp.write_all(doc.to_string().as_bytes())?;
        tmp.persist(&path).map_err(|e| Error::Cache(e.to_string()))?;
        Ok(path)
    }

    /// `Ok(None)` on a miss; a corrupted or mismatched entry is refused.
    pub fn load(&self, kind: &str, key: &Value) -> Result<Option<Value>> {
        let path = self.path_for(kind, key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let doc: Value = serde_json::from_str(&text).map_err(|e| Error::Cache(format!("{}: {e}", path.display())))?;
        let payload = doc.get("payload").cloned().unwrap_or(Value::Null);
        let stated = doc.get("payload_sha256").and_then(Value::as_str).unwrap_or("");
        if stated != sha256_hex(&payload.to_string()) {
            return Err(Error::Cache(format!("{}: payload hash mismatch", path.display())));
        }
        if doc.get("key") != Some(key) || doc.get("kind").and_then(Value::as_str) != Some(kind) {
            return Err(Error::Cache(format!("{}: key mismatch", path.display())));
        }
        if doc.get("tool_version").and_then(Value::as_str) != Some(self.version.as_str()) {
            return Err(Error::Cache(format!("{}: version mismatch", path.display())));
        }
        Ok(Some(payload))
    }

    pub fn store_weights(&self, key: &Value, table: &WeightTable) -> Result<PathBuf> {
        self.store("weights", key, &table.to_json())
    }

    pub fn load_weights(&self, key: &Value) -> Result<Option<WeightTable>> {
        self.load("weights", key)?.map(|v| WeightTable::from_json(&v)).transpose()
    }
}

/// Directory holding the example algebra files and golden reports.
pub fn library_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("library")
}
