use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use maxsheet_core::curvature::{
    blowup_integral, curvature_samples, default_deltas, mixed_norm_table, CurvatureReport,
};
use maxsheet_core::embedding::{detect_self_intersections, separating_direction, verify_graph_on_diamond};
use maxsheet_core::gallery::{self, GalleryEntry, GalleryParams, SingularReference};
use maxsheet_core::geometry::linspace_max_step;
use maxsheet_core::initial_data::read_samples_file;
use maxsheet_core::singularity::{
    beta, classify_tangent_discontinuity, find_singular_set_with, find_tangent_sign_change_time,
    no_singularity_criterion, semicircle_criterion, short_time_horizon_with, CharacteristicDiamond, ScanOptions,
    SignChangeOptions,
};
use maxsheet_core::{evaluate_grid, evolve, mesh_export, normalize_initial_data, InitialData, NormalizeOptions, SheetError, Window};
use serde_json::{json, Map, Value};

use crate::args::{
    ClassifyArgs, Command, CurvatureArgs, EmbedArgs, EvolveArgs, GalleryArgs, HorizonArgs, SingularArgs, Source,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(SheetError),
    Io(std::io::Error),
}

impl From<SheetError> for CliError {
    fn from(e: SheetError) -> Self {
        CliError::Domain(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

/// The JSON document every command prints.
pub struct Report {
    pub command: &'static str,
    pub verdicts: Map<String, Value>,
    pub artifacts: Vec<String>,
    pub max_deviation: Option<f64>,
    /// Whether the run counts as a failure (exit code 1) despite completing.
    pub failed: bool,
}

impl Report {
    fn new(command: &'static str) -> Self {
        Self { command, verdicts: Map::new(), artifacts: Vec::new(), max_deviation: None, failed: false }
    }

    fn set(&mut self, key: &str, value: Value) {
        self.verdicts.insert(key.to_string(), value);
    }

    pub fn to_json(&self, config: Value) -> Value {
        json!({
            "command": self.command,
            "config_echo": config,
            "verdicts": Value::Object(self.verdicts.clone()),
            "artifacts": self.artifacts,
            "max_deviation": self.max_deviation.map(num),
        })
    }
}

/// Non-finite numbers become strings so they survive JSON.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn to_value(v: impl serde::Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

struct Loaded {
    data: Arc<InitialData>,
    entry: Option<GalleryEntry>,
}

fn load(src: &Source) -> Result<Loaded, CliError> {
    if let Some(name) = &src.input.gallery {
        let params = GalleryParams { l: src.l, speed: src.speed, window: src.window.map(|w| (w.min, w.max)) };
        let entry = gallery::build(name, &params)?;
        return Ok(Loaded { data: entry.data.clone(), entry: Some(entry) });
    }
    let path = src.input.curve.as_ref().ok_or_else(|| CliError::Usage("one of --gallery or --curve is required".into()))?;
    if src.l.is_some() || src.speed.is_some() {
        return Err(CliError::Usage("--L and --speed only apply with --gallery".into()));
    }
    let samples = read_samples_file(path)?;
    let (curve, velocity) = samples.providers()?;
    let opts = NormalizeOptions { window: src.window.map(|w| Window::new(w.min, w.max)), ..Default::default() };
    let data = normalize_initial_data(Arc::new(curve), Arc::new(velocity), &opts)?;
    Ok(Loaded { data: Arc::new(data), entry: None })
}

fn output_path(out: &Path, given: &Option<PathBuf>, default: &str) -> PathBuf {
    given.clone().unwrap_or_else(|| out.join(default))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> maxsheet_core::Result<()>) -> Result<String, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(path.display().to_string())
}

fn pair(v: &[f64], flag: &str) -> Result<(f64, f64), CliError> {
    match v {
        [a, b] if a < b => Ok((*a, *b)),
        _ => Err(CliError::Usage(format!("{flag} needs two increasing values"))),
    }
}

pub fn run(command: &Command, out: &Path) -> Result<Report, CliError> {
    match command {
        Command::Evolve(a) => run_evolve(a, out),
        Command::Singular(a) => run_singular(a, out),
        Command::Curvature(a) => run_curvature(a, out),
        Command::Embed(a) => run_embed(a),
        Command::Classify(a) => run_classify(a),
        Command::Gallery(a) => run_gallery(a),
        Command::Horizon(a) => run_horizon(a),
    }
}

fn run_evolve(a: &EvolveArgs, out: &Path) -> Result<Report, CliError> {
    let loaded = load(&a.source)?;
    let sheet = evolve(loaded.data.clone());
    let s_grid = linspace_max_step(a.s.min, a.s.max, a.step);
    let t_grid = linspace_max_step(a.t.min, a.t.max, a.step);
    let grid = evaluate_grid(&sheet, &s_grid, &t_grid)?;
    let gauge = grid
        .jets
        .iter()
        .map(|j| j.gs.dot(j.gt).abs().max((j.gs.norm_sq() + j.gt.norm_sq() - 1.0).abs()))
        .fold(0.0, f64::max);
    let mesh = mesh_export(&sheet, &s_grid, &t_grid)?;
    let mut r = Report::new("evolve");
    r.artifacts.push(write_file(&output_path(out, &a.obj, "sheet.obj"), |w| mesh.write_obj(w))?);
    if let Some(p) = &a.csv {
        r.artifacts.push(write_file(p, |w| grid.write_csv(w))?);
    }
    r.set("s_nodes", json!(s_grid.len()));
    r.set("t_nodes", json!(t_grid.len()));
    r.set("vertices", json!(mesh.vertices.len()));
    r.set("triangles", json!(mesh.triangles.len()));
    r.set("gauge_residual", num(gauge));
    r.max_deviation = Some(gauge);
    Ok(r)
}

fn run_singular(a: &SingularArgs, out: &Path) -> Result<Report, CliError> {
    let loaded = load(&a.source)?;
    let diamond = match &a.diamond {
        Some(v) => {
            let (s1, s2) = pair(v, "--diamond")?;
            CharacteristicDiamond::new(s1, s2)?
        }
        None => match loaded.entry.as_ref().and_then(|e| e.reference.diamond) {
            Some(d) => d,
            None => CharacteristicDiamond::centered(0.0, 3.0)?,
        },
    };
    let data = &loaded.data;
    let set = find_singular_set_with(data, diamond, &ScanOptions { grid_step: a.step, t_max: a.t_max, tolerance: None })?;
    let semi = semicircle_criterion(data, diamond.s1, diamond.s2)?;
    let regular = no_singularity_criterion(data, diamond.s1, diamond.s2)?;
    let mut r = Report::new("singular");
    r.artifacts.push(write_file(&output_path(out, &a.csv, "singular.csv"), |w| set.write_csv(w))?);
    r.set("diamond", json!([diamond.s1, diamond.s2]));
    r.set("semicircle", json!({ "verdict": to_value(semi.verdict), "oscillation": num(semi.oscillation) }));
    r.set("no_singularity", json!({ "verdict": to_value(regular.verdict), "value": num(regular.value) }));
    r.set("empty", json!(set.is_empty()));
    r.set("singular_points", json!(set.points.len()));
    let comps: Vec<Value> =
        set.components.iter().map(|c| json!({ "id": c.id, "class": c.class.as_str(), "cells": c.cells })).collect();
    r.set("components", Value::Array(comps));
    if let Some(reference) = loaded.entry.as_ref().and_then(|e| e.reference.singular) {
        // Region references are recovered up to the grid cell.
        let slack = match reference {
            SingularReference::CigarRegion { .. } => a.step,
            _ => 0.0,
        };
        let dev = set
            .points
            .iter()
            .map(|p| (reference.distance(p.s, p.t) - slack).max(0.0))
            .fold(0.0, f64::max);
        let dev = if matches!(reference, SingularReference::Empty) {
            if set.is_empty() { 0.0 } else { f64::INFINITY }
        } else {
            dev
        };
        r.set("reference_max_distance", num(dev));
        r.max_deviation = Some(dev);
    }
    Ok(r)
}

fn run_curvature(a: &CurvatureArgs, out: &Path) -> Result<Report, CliError> {
    let loaded = load(&a.source)?;
    let sheet = evolve(loaded.data.clone());
    let s_grid = linspace_max_step(a.s.min, a.s.max, a.step);
    let t_grid = linspace_max_step(a.t.min, a.t.max, a.step);
    let samples = curvature_samples(&sheet, &s_grid, &t_grid);
    let mut blowups = Vec::new();
    if let Some(v) = &a.anchor {
        let [s0, t0] = v[..] else { return Err(CliError::Usage("--anchor needs two values".into())) };
        blowups.push(blowup_integral(&sheet, s0, t0, a.epsilon, &default_deltas(a.epsilon))?);
    }
    let norm_table = if a.p.is_empty() && a.q.is_empty() {
        None
    } else {
        if a.p.is_empty() || a.q.is_empty() {
            return Err(CliError::Usage("--p and --q must be given together".into()));
        }
        let window = match (a.norm_window, loaded.entry.as_ref().and_then(|e| e.reference.singular)) {
            (Some(w), _) => (w.min, w.max),
            (None, Some(SingularReference::Times { first, .. })) => (first - 0.5, first),
            _ => return Err(CliError::Usage("--norm-window is required for this input".into())),
        };
        Some(mixed_norm_table(&sheet, &a.p, &a.q, window)?)
    };
    let report = CurvatureReport { samples, blowup_integrals: blowups, norm_table };
    let mut r = Report::new("curvature");
    r.artifacts.push(write_file(&output_path(out, &a.csv, "curvature.csv"), |w| report.write_samples_csv(w))?);
    if let Some(table) = &report.norm_table {
        r.artifacts.push(write_file(&output_path(out, &a.norms_csv, "norms.csv"), |w| table.write_csv(w))?);
        let rows: Vec<Value> =
            table.rows.iter().map(|row| json!({ "p": row.p, "q": row.q, "verdict": row.verdict.as_str() })).collect();
        r.set("mixed_norms", Value::Array(rows));
    }
    let defined: Vec<f64> = report.samples.iter().filter_map(|c| c.kappa_std).collect();
    r.set("samples", json!(report.samples.len()));
    r.set("undefined", json!(report.samples.len() - defined.len()));
    r.set("max_abs_kappa", num(defined.iter().map(|k| k.abs()).fold(0.0, f64::max)));
    let blow: Vec<Value> = report
        .blowup_integrals
        .iter()
        .map(|b| json!({ "s0": b.s0, "t0": b.t0, "verdict": to_value(b.verdict), "r_squared": num(b.r_squared) }))
        .collect();
    r.set("blowup", Value::Array(blow));
    if let Some(reference) = loaded.entry.as_ref().and_then(|e| e.reference.curvature.clone()) {
        let dev = report
            .samples
            .iter()
            .filter(|c| c.t.abs() <= 1.4)
            .filter_map(|c| c.kappa_std.map(|k| (k.abs() - reference(c.s, c.t)).abs()))
            .fold(0.0, f64::max);
        r.set("reference_max_deviation", num(dev));
        r.max_deviation = Some(dev);
    }
    Ok(r)
}

fn run_embed(a: &EmbedArgs) -> Result<Report, CliError> {
    let loaded = load(&a.source)?;
    let (s1, s2) = pair(&a.interval, "--interval")?;
    let data = &loaded.data;
    let sep = separating_direction(data, s1, s2)?;
    let mut r = Report::new("embed");
    r.set("separation", json!(sep.verdict.as_str()));
    r.set("arc", json!([num(sep.arc.0), num(sep.arc.1)]));
    r.set("arc_width", num(sep.arc_width()));
    r.set("margin", num(sep.margin));
    if let Some(w) = sep.omega {
        r.set("omega", json!([w.x, w.y]));
        let diamond = CharacteristicDiamond::new(s1, s2)?;
        let g = verify_graph_on_diamond(&evolve(data.clone()), &diamond, w, a.step)?;
        r.set("graph", json!({ "verdict": "graph", "margin": num(g.margin), "at": [g.at.0, g.at.1] }));
    }
    if let Some(w) = sep.witness {
        r.set("witness", json!({ "xi": w.xi, "eta": w.eta, "distance": num(w.distance) }));
    }
    let crossings: Vec<Value> = detect_self_intersections(data.curve().as_ref(), (s1, s2))
        .into_iter()
        .map(|(r1, r2)| {
            let arc = semicircle_criterion(data, r1, r2).map(|c| c.oscillation).unwrap_or(f64::NAN);
            json!({ "r1": r1, "r2": r2, "tangent_arc": num(arc) })
        })
        .collect();
    r.set("self_intersections", Value::Array(crossings));
    Ok(r)
}

fn run_classify(a: &ClassifyArgs) -> Result<Report, CliError> {
    let loaded = load(&a.source)?;
    let reference = loaded.entry.as_ref().and_then(|e| e.reference.classification);
    let t0 = a.t0.or(reference.map(|c| c.t0)).ok_or_else(|| CliError::Usage("--t0 is required for this input".into()))?;
    let interval = match &a.interval {
        Some(v) => pair(v, "--interval")?,
        None => reference.map(|c| c.interval).ok_or_else(|| CliError::Usage("--interval is required for this input".into()))?,
    };
    let field = beta(loaded.data.clone());
    let c = classify_tangent_discontinuity(&field, t0, interval)?;
    let mut r = Report::new("classify");
    r.set("t0", json!(t0));
    r.set("interval", json!([interval.0, interval.1]));
    r.set("kind", json!(c.kind.as_str()));
    r.set("m", json!(c.m));
    r.set("zero_interval", json!([c.r1, c.r2]));
    r.set("zero_sets", json!(c.zero_sets.len()));
    if let Some(reference) = reference.filter(|_| a.t0.is_none() && a.interval.is_none()) {
        let ok = reference.kind == c.kind;
        r.set("matches_reference", json!(ok));
        r.max_deviation = Some(if ok { 0.0 } else { 1.0 });
        r.failed = !ok;
    }
    if let Some(range) = a.t_range {
        let sc = find_tangent_sign_change_time(&field, (range.min, range.max), interval, &SignChangeOptions::default())?;
        r.set("sign_change", json!({ "t_star": sc.t_star, "s_negative": sc.s_negative, "s_positive": sc.s_positive }));
    }
    Ok(r)
}

fn run_gallery(a: &GalleryArgs) -> Result<Report, CliError> {
    let params = GalleryParams { l: a.l, speed: a.speed, window: None };
    let names: Vec<&str> = if a.name == "all" { gallery::NAMES.to_vec() } else { vec![a.name.as_str()] };
    let entries = names.iter().map(|n| gallery::build(n, &params)).collect::<Result<Vec<_>, _>>()?;
    let mut r = Report::new("gallery");
    let mut list = Vec::new();
    let mut worst = 0.0f64;
    for e in &entries {
        let w = e.data.window();
        let mut item = json!({
            "name": e.name,
            "window": [num(w.min), num(w.max)],
            "periodic": e.data.domain().is_periodic(),
            "reference": {
                "gamma": e.reference.gamma.is_some(),
                "singular": e.reference.singular.map(to_value),
                "curvature": e.reference.curvature.is_some(),
                "classification": e.reference.classification.map(to_value),
            },
        });
        if a.check {
            let report = gallery::run_regression(e);
            worst = worst.max(report.max_deviation);
            r.failed |= !report.passed;
            let checks: Vec<Value> = report
                .checks
                .iter()
                .map(|c| json!({ "name": c.name, "max_deviation": num(c.max_deviation), "tolerance": c.tolerance, "passed": c.passed }))
                .collect();
            item["regression"] = json!({ "passed": report.passed, "max_deviation": num(report.max_deviation), "checks": checks });
        }
        list.push(item);
    }
    r.set("entries", Value::Array(list));
    if a.check {
        r.set("passed", json!(!r.failed));
        r.max_deviation = Some(worst);
    }
    Ok(r)
}

fn run_horizon(a: &HorizonArgs) -> Result<Report, CliError> {
    let loaded = load(&a.source)?;
    let h = short_time_horizon_with(&loaded.data, a.step)?;
    let mut r = Report::new("horizon");
    r.set("t", num(h.t));
    r.set("unbounded", json!(h.t.is_infinite()));
    r.set("delta", num(h.delta));
    r.set("epsilon", num(h.epsilon));
    r.set("sup_speed", num(h.sup_speed));
    Ok(r)
}
