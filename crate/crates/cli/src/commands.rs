//! Subcommands. Each one builds a JSON report (always carrying the resolved
//! configuration and seed) plus optional CSV/SVG artifacts, and maps
//! failures onto the exit-code contract.

use std::fs;
use std::path::PathBuf;

use serde_json::{json, Value};
use subarcs_core::addresses::{pcf_status, AddressError};
use subarcs_core::arcs::{
    estimate_dimension, estimate_from_covers, verify_arc_inclusions, vertex_arc, ArcError, ChainBuilder,
    CoverOutcome, CoverReport, DimensionEstimate,
};
use subarcs_core::construction::{
    build_system, cyclic_family, lemma1_family, validate_params, ConstructionError,
};
use subarcs_core::dendrite::{build_complex, build_nerve, verify_dendrite, DendriteError, DendriteReport};
use subarcs_core::measures::{
    build_gd_system, determine_n, estimate_ell, iterate_measure_sets, lambda_endpoints, mauldin_williams_check,
    moran_dimension, Branch, MeasureError,
};
use subarcs_core::zipper::{solve_p2, CantorPair, ZipperError};
use subarcs_core::{Address, PcfStatus, Point2, Similarity, SystemParams, SystemS, ADDRESS_DEPTH};

use crate::config::{Family, RunConfig};
use crate::{output, sampling, svg};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFICATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SolveParams,
    Build,
    Verify,
    Pcf,
    ArcDim,
    Measures,
    Render,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::SolveParams,
        Command::Build,
        Command::Verify,
        Command::Pcf,
        Command::ArcDim,
        Command::Measures,
        Command::Render,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::SolveParams => "solve-params",
            Command::Build => "build",
            Command::Verify => "verify",
            Command::Pcf => "pcf",
            Command::ArcDim => "arc-dim",
            Command::Measures => "measures",
            Command::Render => "render",
        }
    }
}

/// A failed check: which one, why, and the exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub check: String,
    pub message: String,
    /// Whatever part of the result was computed before the failure.
    pub partial: Value,
}

impl Failure {
    fn new(code: i32, check: &str, message: impl Into<String>) -> Self {
        Failure {
            code,
            check: check.to_string(),
            message: message.into(),
            partial: Value::Null,
        }
    }

    fn with_partial(mut self, partial: Value) -> Self {
        self.partial = partial;
        self
    }
}

impl From<ConstructionError> for Failure {
    fn from(e: ConstructionError) -> Self {
        let msg = e.to_string();
        match e {
            ConstructionError::InvalidParams(report) => {
                let details: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
                Failure::new(EXIT_VERIFICATION, "parameter conditions", msg).with_partial(json!({ "violations": details }))
            }
            ConstructionError::NotEquilateral { .. } => {
                Failure::new(EXIT_VERIFICATION, "contact triangle is equilateral", msg)
            }
            ConstructionError::ThirdPointMismatch { .. } => {
                Failure::new(EXIT_VERIFICATION, "S0 carries A3 to B3", msg)
            }
            ConstructionError::DegenerateContact { .. } => {
                Failure::new(EXIT_VERIFICATION, "contact points differ from the vertices", msg)
            }
            ConstructionError::InadmissibleP(_) | ConstructionError::BadPrefix(_) => {
                Failure::new(EXIT_VERIFICATION, "parameter conditions", msg)
            }
            ConstructionError::Zipper(z) => z.into(),
            ConstructionError::Address(a) => a.into(),
            ConstructionError::Geometry(_) => Failure::new(EXIT_NUMERIC, "geometry", msg),
        }
    }
}

impl From<ZipperError> for Failure {
    fn from(e: ZipperError) -> Self {
        let msg = e.to_string();
        match e {
            ZipperError::ToleranceUnreachable(_)
            | ZipperError::NoSignChange
            | ZipperError::ResidualTooLarge(_)
            | ZipperError::InvalidTolerance => Failure::new(EXIT_NUMERIC, "zipper solver", msg),
            ZipperError::Address(a) => a.into(),
            _ => Failure::new(EXIT_VERIFICATION, "parameter conditions", msg),
        }
    }
}

impl From<AddressError> for Failure {
    fn from(e: AddressError) -> Self {
        let msg = e.to_string();
        match e {
            AddressError::HorizonExceeded { .. } => Failure::new(EXIT_NUMERIC, "address horizon", msg),
            _ => Failure::new(EXIT_VERIFICATION, "address notation", msg),
        }
    }
}

impl From<DendriteError> for Failure {
    fn from(e: DendriteError) -> Self {
        let msg = e.to_string();
        match e {
            DendriteError::DepthBeyondTolerance { .. } => Failure::new(EXIT_NUMERIC, "depth admissible for eps", msg),
            DendriteError::NotATree { .. } => Failure::new(EXIT_VERIFICATION, "nerve is a tree", msg),
            DendriteError::NotCertified(report) => certification_failure(&report),
            DendriteError::Geometry(_) => Failure::new(EXIT_NUMERIC, "geometry", msg),
        }
    }
}

impl From<ArcError> for Failure {
    fn from(e: ArcError) -> Self {
        let msg = e.to_string();
        match e {
            ArcError::UncertifiedComplex { source, .. } => source.into(),
            ArcError::Address(a) => a.into(),
            _ => Failure::new(EXIT_NUMERIC, "arc chains", msg),
        }
    }
}

impl From<MeasureError> for Failure {
    fn from(e: MeasureError) -> Self {
        let msg = e.to_string();
        match e {
            MeasureError::Arc(a) => a.into(),
            MeasureError::Address(a) => a.into(),
            _ => Failure::new(EXIT_NUMERIC, "measure system", msg),
        }
    }
}

/// Names of the dendrite properties a report fails.
pub fn violated_properties(r: &DendriteReport) -> Vec<&'static str> {
    let mut out = Vec::new();
    if r.overlap_count() > 0 {
        out.push("cells meet in at most one vertex");
    }
    if !r.connected {
        out.push("union of cells is connected");
    }
    if !r.acyclic {
        out.push("nerve has no cycles");
    }
    if !r.nesting {
        out.push("cells lie inside their parents");
    }
    if r.max_boundary_count > 3 {
        out.push("at most three boundary contacts per cell");
    }
    out
}

fn certification_failure(r: &DendriteReport) -> Failure {
    let props = violated_properties(r);
    let msg = format!(
        "depth {}: {} violated ({} overlapping pairs)",
        r.depth,
        props.join("; "),
        r.overlap_count()
    );
    Failure::new(EXIT_VERIFICATION, "dendrite certification", msg).with_partial(json!({ "dendrite": dendrite_json(r) }))
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub message: String,
    /// The full report, also written as `<command>.json`.
    pub report: Value,
    pub files: Vec<PathBuf>,
}

struct Artifacts {
    result: Value,
    /// `(file name, contents)` for CSV and SVG outputs.
    files: Vec<(String, String)>,
    summary: String,
}

/// Runs one command and writes its artifacts under `cfg.out`.
pub fn run(cfg: &RunConfig, cmd: Command) -> Outcome {
    let (code, message, result, failure, extra) = match execute(cfg, cmd) {
        Ok(a) => (EXIT_OK, a.summary, a.result, Value::Null, a.files),
        Err(f) => {
            let message = format!("{} failed: {}", f.check, f.message);
            let failure = json!({ "check": f.check, "message": f.message });
            (f.code, message, f.partial, failure, Vec::new())
        }
    };
    let status = match code {
        EXIT_OK => "ok",
        EXIT_VERIFICATION => "verification_failure",
        EXIT_NUMERIC => "numeric_failure",
        _ => "error",
    };
    let report = json!({
        "command": cmd.name(),
        "config": cfg.echo(),
        "seed": cfg.seed,
        "status": status,
        "exit_code": code,
        "result": result,
        "failure": failure,
    });

    let mut files = Vec::new();
    let mut pending: Vec<(String, String)> = Vec::new();
    if cfg.emit.json {
        pending.push((format!("{}.json", cmd.name()), output::to_json(&report)));
    }
    for (name, text) in extra {
        let wanted = (name.ends_with(".csv") && cfg.emit.csv) || (name.ends_with(".svg") && cfg.emit.svg);
        if wanted {
            pending.push((name, text));
        }
    }
    if !pending.is_empty() {
        if let Err(e) = fs::create_dir_all(&cfg.out) {
            return io_failure(report, &cfg.out, e);
        }
    }
    for (name, text) in pending {
        let path = cfg.out.join(name);
        if let Err(e) = fs::write(&path, text) {
            return io_failure(report, &path, e);
        }
        files.push(path);
    }
    Outcome {
        code,
        message,
        report,
        files,
    }
}

fn io_failure(report: Value, path: &std::path::Path, e: std::io::Error) -> Outcome {
    Outcome {
        code: EXIT_USAGE,
        message: format!("cannot write {}: {e}", path.display()),
        report,
        files: Vec::new(),
    }
}

fn execute(cfg: &RunConfig, cmd: Command) -> Result<Artifacts, Failure> {
    match cmd {
        Command::SolveParams => solve_params(cfg),
        Command::Build => build(cfg),
        Command::Verify => verify(cfg),
        Command::Pcf => pcf(cfg),
        Command::ArcDim => arc_dim(cfg),
        Command::Measures => measures(cfg),
        Command::Render => render(cfg),
    }
}

/// The parameters described by the configuration.
pub fn resolve_params(cfg: &RunConfig) -> Result<SystemParams, Failure> {
    Ok(match &cfg.family {
        Family::Lemma1 { p1, tail } => lemma1_family(*p1, tail, cfg.tol)?,
        Family::Cyclic { p, addr_b1 } => cyclic_family(*p, addr_b1)?,
        Family::Explicit { p, addrs } => SystemParams::new(*p, addrs.clone()),
    })
}

/// The assembled system, with the `corrupt_s0` fixture applied if set.
pub fn resolve_system(cfg: &RunConfig) -> Result<SystemS, Failure> {
    let params = resolve_params(cfg)?;
    let system = build_system(&params, ADDRESS_DEPTH)?;
    Ok(match cfg.corrupt_s0 {
        Some(f) => {
            let h = Similarity::homothety(f, system.contacts()[1])
                .map_err(|e| Failure::new(EXIT_USAGE, "corrupt_s0 fixture", e.to_string()))?;
            let s0 = h.compose(system.s0());
            system.with_s0(s0)
        }
        None => system,
    })
}

fn pt(p: Point2) -> Value {
    json!([p.x, p.y])
}

fn params_json(p: &SystemParams) -> Value {
    let addrs: Vec<String> = p.addresses().iter().map(ToString::to_string).collect();
    json!({ "ratios": p.ratios(), "addresses": addrs })
}

fn system_json(s: &SystemS) -> Value {
    let [b1, b2, b3] = s.contacts();
    let s0 = s.s0();
    json!({
        "params": params_json(s.params()),
        "s0": { "ratio": s0.ratio(), "angle": s0.angle(), "translation": pt(s0.translation()) },
        "contacts": [pt(b1), pt(b2), pt(b3)],
        "sides": [b1.dist(b2), b2.dist(b3), b3.dist(b1)],
        "center": pt(s.center()),
        "address_bound": s.address_bound(),
    })
}

fn dendrite_json(r: &DendriteReport) -> Value {
    let mut histogram = vec![0usize; r.max_boundary_count + 1];
    for &c in &r.boundary_counts {
        histogram[c] += 1;
    }
    let overlaps: Vec<Value> = r
        .overlap_pairs
        .iter()
        .map(|(a, b)| json!([a.to_string(), b.to_string()]))
        .collect();
    json!({
        "depth": r.depth,
        "eps": r.eps,
        "cell_count": r.cell_count,
        "connected": r.connected,
        "acyclic": r.acyclic,
        "edge_count": r.edge_count,
        "expected_edge_count": r.cell_count.saturating_sub(1),
        "max_diameter": r.max_diameter,
        "diameter_bound": r.diameter_bound,
        "s0_attains_max_ratio": r.s0_attains_max_ratio,
        "empty_pairs": r.empty_pairs,
        "single_vertex_pairs": r.single_vertex_pairs,
        "overlap_count": r.overlap_count(),
        "overlap_pairs": overlaps,
        "nesting": r.nesting,
        "nesting_failures": r.nesting_failures,
        "boundary_count_histogram": histogram,
        "max_boundary_count": r.max_boundary_count,
        "contacts_at_vertices": r.contacts_at_vertices,
        "certified": r.certified,
        "violated": violated_properties(r),
    })
}

fn solve_params(cfg: &RunConfig) -> Result<Artifacts, Failure> {
    let solver = match &cfg.family {
        Family::Lemma1 { p1, tail } => {
            let s = solve_p2(*p1, tail, cfg.tol)?;
            json!({ "p2": s.p2, "residual": s.residual, "target": s.target })
        }
        _ => Value::Null,
    };
    let params = resolve_params(cfg)?;
    let validation = validate_params(&params);
    let violations: Vec<String> = validation.violations.iter().map(ToString::to_string).collect();
    let partial = json!({ "params": params_json(&params), "solver": solver, "violations": violations });
    if !validation.is_valid() {
        return Err(Failure::new(EXIT_VERIFICATION, "parameter conditions", validation.to_string()).with_partial(partial));
    }
    let system = resolve_system(cfg).map_err(|f| f.with_partial(partial.clone()))?;
    let ratios = params.ratios();
    Ok(Artifacts {
        summary: format!("solved: ratios {:?}", ratios),
        result: json!({
            "params": params_json(&params),
            "solver": solver,
            "violations": violations,
            "system": system_json(&system),
        }),
        files: Vec::new(),
    })
}

fn build(cfg: &RunConfig) -> Result<Artifacts, Failure> {
    let system = resolve_system(cfg)?;
    let complex = build_complex(&system, cfg.depth, cfg.eps)?;
    let levels: Vec<usize> = (0..=cfg.depth).map(|m| complex.level(m).len()).collect();
    Ok(Artifacts {
        summary: format!("built {} cells through depth {}", complex.len(), cfg.depth),
        result: json!({
            "system": system_json(&system),
            "complex": {
                "depth": complex.depth(),
                "cell_count": complex.len(),
                "level_sizes": levels,
                "max_diameter": complex.max_diameter(),
                "max_ratio": complex.max_ratio(),
            },
        }),
        files: Vec::new(),
    })
}

fn cover_json(r: &CoverReport) -> Value {
    let entries: Vec<Value> = r
        .entries
        .iter()
        .map(|e| {
            let outcome = match &e.outcome {
                CoverOutcome::ZeroCell {
                    cell,
                    boundary,
                    at_vertices,
                } => json!({
                    "branch": "zero_cell",
                    "cell": cell.to_string(),
                    "boundary": boundary.iter().map(|p| pt(*p)).collect::<Vec<_>>(),
                    "at_vertices": at_vertices,
                }),
                CoverOutcome::KPrime => json!({ "branch": "k_prime" }),
                CoverOutcome::Undetermined => json!({ "branch": "undetermined" }),
            };
            json!({ "address": e.address.to_string(), "outcome": outcome, "ok": e.ok() })
        })
        .collect();
    json!({ "depth": r.depth, "entries": entries })
}

fn verify(cfg: &RunConfig) -> Result<Artifacts, Failure> {
    let system = resolve_system(cfg)?;
    let complex = build_complex(&system, cfg.depth, cfg.eps)?;
    let report = verify_dendrite(&complex, cfg.eps)?;
    let partial = json!({ "system": system_json(&system), "dendrite": dendrite_json(&report) });
    if !report.certified {
        return Err(certification_failure(&report).with_partial(partial));
    }

    let mut samples: Vec<Address> = ["(0)", "(123)", "30(12)"]
        .iter()
        .map(|s| s.parse().expect("fixed sample"))
        .collect();
    let mut rng = sampling::rng(cfg.seed);
    samples.extend((0..cfg.samples).map(|_| sampling::random_address(&mut rng)));
    let mut builder = ChainBuilder::new(system.clone(), cfg.eps);
    let cover = subarcs_core::arcs::cut_point_cover_check(&mut builder, &samples, cfg.depth)?;
    // An undetermined sample is a horizon issue, not a counterexample.
    let broken: Vec<String> = cover
        .entries
        .iter()
        .filter(|e| matches!(e.outcome, CoverOutcome::ZeroCell { .. }) && !e.ok())
        .map(|e| e.address.to_string())
        .collect();
    let result = json!({
        "system": system_json(&system),
        "dendrite": dendrite_json(&report),
        "cut_point_cover": cover_json(&cover),
    });
    if !broken.is_empty() {
        return Err(Failure::new(
            EXIT_VERIFICATION,
            "cut points lie in thin cells",
            format!("cells around {} have more than three or off-vertex contacts", broken.join(", ")),
        )
        .with_partial(result));
    }
    Ok(Artifacts {
        summary: format!("certified at depth {} ({} edges)", report.depth, report.edge_count),
        result,
        files: Vec::new(),
    })
}

fn pcf(cfg: &RunConfig) -> Result<Artifacts, Failure> {
    let params = resolve_params(cfg)?;
    let r = pcf_status(&params, ADDRESS_DEPTH);
    let status = match r.status {
        PcfStatus::Pcf => "PCF",
        PcfStatus::NotPcf => "NotPCF",
        PcfStatus::UnknownBeyondHorizon => "UnknownBeyondHorizon",
    };
    let strings = |v: &[Address]| v.iter().map(ToString::to_string).collect::<Vec<_>>();
    let postcritical = match r.status {
        PcfStatus::Pcf => json!(strings(&r.postcritical)),
        _ => Value::Null,
    };
    Ok(Artifacts {
        summary: format!("status {status}"),
        result: json!({
            "status": status,
            "critical": strings(&r.critical),
            "postcritical": postcritical,
            "postcritical_count": if r.status == PcfStatus::Pcf { json!(r.postcritical.len()) } else { Value::Null },
            "witness": r.witness.as_ref().map(ToString::to_string),
            "unresolved": strings(&r.unresolved),
        }),
        files: Vec::new(),
    })
}

fn estimate_json(e: &DimensionEstimate) -> Value {
    json!({
        "value": e.value,
        "stderr": e.stderr,
        "depths_used": e.depths_used,
        "crossings": e.crossings,
    })
}

fn arc_dim(cfg: &RunConfig) -> Result<Artifacts, Failure> {
    let system = resolve_system(cfg)?;
    let [p1, p2, _] = system.params().ratios();
    let mut builder = ChainBuilder::new(system.clone(), cfg.eps);
    let mut files = Vec::new();

    let mut gammas = Vec::new();
    let mut values = Vec::new();
    for i in 1..=3u8 {
        let (o, v) = vertex_arc(i);
        let e = estimate_dimension(&mut builder, &o, &v, &cfg.dim_depths)?;
        files.push((format!("premeasure_gamma{i}.csv"), output::premeasure_csv(&e.premeasure_table)));
        let mut j = estimate_json(&e);
        j["arc"] = json!(format!("gamma{i}"));
        j["endpoints"] = json!([o.to_string(), v.to_string()]);
        gammas.push(j);
        values.push(e.value);
    }
    let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - values.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut rng = sampling::rng(cfg.seed);
    let mut subarcs = Vec::new();
    let mut deviation = 0.0f64;
    let mut skipped = 0usize;
    while subarcs.len() < cfg.samples {
        let (a, b) = sampling::random_subarc(&mut rng);
        match estimate_dimension(&mut builder, &a, &b, &cfg.dim_depths) {
            Ok(e) => {
                deviation = deviation.max((e.value - values[0]).abs());
                let mut j = estimate_json(&e);
                j["endpoints"] = json!([a.to_string(), b.to_string()]);
                subarcs.push(j);
            }
            // Two addresses of one contact point: draw again.
            Err(ArcError::EqualEndpoints) if skipped < 100 => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }

    let pair = CantorPair::new(p1, p2)?;
    let covers: Vec<(usize, Vec<f64>)> = cfg.dim_depths.iter().map(|&k| (k, pair.cell_widths(k))).collect();
    let baseline = estimate_from_covers(&covers)?;

    let mut inclusions = Vec::new();
    let mut failed = Vec::new();
    for k in 2..=4 {
        let r = verify_arc_inclusions(&mut builder, k)?;
        let checks: Vec<Value> = r
            .checks
            .iter()
            .map(|c| {
                if !c.unmatched.is_empty() {
                    failed.push(format!("gamma{} ⊃ S{}S0(gamma{}) at depth {k}", c.outer, c.outer, c.inner));
                }
                json!({
                    "outer": c.outer,
                    "inner": c.inner,
                    "inner_cells": c.inner_cells,
                    "unmatched": c.unmatched.iter().map(ToString::to_string).collect::<Vec<_>>(),
                })
            })
            .collect();
        inclusions.push(json!({ "depth": k, "holds": r.holds(), "checks": checks }));
    }

    let result = json!({
        "gammas": gammas,
        "gamma_spread": spread,
        "subarcs": subarcs,
        "subarc_max_deviation": deviation,
        "zipper_baseline": estimate_json(&baseline),
        "inclusions": inclusions,
    });
    if !failed.is_empty() {
        return Err(Failure::new(EXIT_VERIFICATION, "arc inclusions", failed.join("; ")).with_partial(result));
    }
    Ok(Artifacts {
        summary: format!(
            "s(gamma1..3) = {:.4}, {:.4}, {:.4}; subarcs within {:.4}",
            values[0], values[1], values[2], deviation
        ),
        result,
        files,
    })
}

fn measures(cfg: &RunConfig) -> Result<Artifacts, Failure> {
    let system = resolve_system(cfg)?;
    let params = system.params().clone();
    let [p1, p2, p3] = params.ratios();
    let branch = determine_n(&params.addresses()[0])?;
    let (variant, n) = match branch {
        Branch::Generic(n) => ("Generic", n),
        Branch::B1EqualsP1 => ("B1EqualsP1", 0),
    };
    let moran = moran_dimension(&[p1, p2])?;
    let mw = mauldin_williams_check(p1, p2, n, moran.d)?;
    let k_prime = moran_dimension(&[p1, p2, p3])?;

    let mut builder = ChainBuilder::new(system.clone(), cfg.eps);
    let (o, a1) = vertex_arc(1);
    let s_hat = estimate_dimension(&mut builder, &o, &a1, &cfg.dim_depths)?;
    let endpoints = lambda_endpoints(branch);
    let ell = estimate_ell(&mut builder, &endpoints, s_hat.value, &cfg.dim_depths)?;
    let ell_values: Vec<f64> = ell.iter().map(|e| e.value).collect();
    let gds = build_gd_system(&params, branch, &ell_values)?;
    let sets = iterate_measure_sets(&gds, cfg.measure_depth);

    let edges: Vec<Value> = gds
        .edges
        .iter()
        .map(|e| {
            json!({
                "label": e.label,
                "ratio": e.ratio,
                "offset": e.offset,
                "source": e.source.to_string(),
                "target": e.target.to_string(),
            })
        })
        .collect();
    let nodes: Vec<String> = gds.nodes.iter().map(ToString::to_string).collect();
    let hulls: Vec<Value> = sets.hulls.iter().map(|(lo, hi)| json!([lo, hi])).collect();
    let classification = format!("{:?}", sets.classification);
    let result = json!({
        "variant": variant,
        "n": n,
        "d": moran.d,
        "residual": moran.residual,
        "mu": mw.mu,
        "nu": mw.nu,
        "residual_mu": mw.residual_mu,
        "residual_nu": mw.residual_nu,
        "dim_k_prime": k_prime.d,
        "s_hat": estimate_json(&s_hat),
        "ell": ell_values,
        "ell_spread": ell.iter().map(|e| e.spread).collect::<Vec<_>>(),
        "ell_arcs": endpoints.iter().map(|(a, b)| json!([a.to_string(), b.to_string()])).collect::<Vec<_>>(),
        "nodes": nodes,
        "edges": edges,
        "classification": classification,
        "hulls": hulls,
        "min_gap": sets.min_gap,
        "level_gaps": sets.level_gaps,
        "nesting": sets.nesting,
        "cover_dimension": sets.cover_dimension,
        "measure_depth": cfg.measure_depth,
    });
    Ok(Artifacts {
        summary: format!("d = {:.12}, dim K' = {:.12}, {classification}", moran.d, k_prime.d),
        result,
        files: vec![
            ("measure_sets.csv".to_string(), output::intervals_csv(&sets.sets)),
            ("measures.svg".to_string(), svg::strip_svg(&sets.sets)),
        ],
    })
}

fn render(cfg: &RunConfig) -> Result<Artifacts, Failure> {
    let system = resolve_system(cfg)?;
    let complex = build_complex(&system, cfg.depth, cfg.eps)?;
    let (contacts, nerve) = match build_nerve(&complex, cfg.eps) {
        Ok(n) => (n.edges().to_vec(), Value::String("tree".into())),
        Err(e) => (Vec::new(), Value::String(format!("not drawn: {e}"))),
    };
    Ok(Artifacts {
        summary: format!("rendered {} cells at depth {}", complex.level(cfg.depth).len(), cfg.depth),
        result: json!({
            "depth": cfg.depth,
            "cells": complex.level(cfg.depth).len(),
            "contacts": contacts.len(),
            "nerve": nerve,
        }),
        files: vec![("dendrite.svg".to_string(), svg::complex_svg(&complex, &contacts))],
    })
}
