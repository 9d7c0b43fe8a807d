use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use pkstiff::config::Config;
use pkstiff::orthoglide::{
    evaluate_stiffness, workspace_map, EvalPoint, GridSpec, MapStatus, OrthoglideModel,
    StiffnessReport, Summary, Variant,
};
use pkstiff::parallelogram::Regularization;
use pkstiff::procrustes::{build_compliance, DisplacementDataset};
use pkstiff::validation::{self, SuiteStatus};
use serde_json::json;

use crate::output::{
    emit, json_text, num, opt_num, CliError, COMPARE_SCHEMA, COMPLIANCE_SCHEMA, EXIT_COMPUTATION,
    EXIT_DATA, EXIT_USAGE, MAP_MATRICES_SCHEMA, MAP_SCHEMA,
};
use crate::ModelArgs;

fn load_config(args: &ModelArgs) -> Result<Config, CliError> {
    let mut cfg = match &args.config {
        Some(p) => Config::load(p).map_err(|e| {
            let mut err = CliError::from(e);
            err.code = EXIT_DATA;
            err.message = format!("{}: {}", p.display(), err.message);
            err
        })?,
        None => Config::prototype(),
    };
    if let Some(v) = args.variant {
        cfg.variant = v;
    }
    if let Some(kappa) = args.kf {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(CliError::new(
                EXIT_USAGE,
                format!("--kf must be positive, got {kappa}"),
            ));
        }
        cfg.regularization = Regularization::Fictitious { kappa };
    }
    if args.extended {
        cfg.flags.axis_flexibility = true;
    }
    Ok(cfg)
}

fn load_model(args: &ModelArgs) -> Result<OrthoglideModel, CliError> {
    Ok(load_config(args)?.model()?)
}

pub fn eval(args: &ModelArgs, point: Vector3<f64>, out: Option<&Path>) -> Result<(), CliError> {
    let model = load_model(args)?;
    let report = evaluate_stiffness(&model, &point)?;
    emit(out, &json_text(&report.to_json()))
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut p = out.to_path_buf();
    p.set_extension("json");
    if p == out {
        p.set_extension("matrices.json");
    }
    p
}

pub fn map(
    args: &ModelArgs,
    grid: Option<&str>,
    out: Option<&Path>,
    workers: Option<usize>,
) -> Result<(), CliError> {
    let model = load_model(args)?;
    let grid = match grid {
        Some(g) => GridSpec::parse(g)?,
        None => GridSpec::workspace(5)?,
    };
    let points = grid.points();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(CliError::new(EXIT_USAGE, "--workers must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::new(EXIT_COMPUTATION, format!("cannot start workers: {e}")))?;
    let rows = pool.install(|| workspace_map(&model, &points))?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "index",
        "x",
        "y",
        "z",
        "k_tran",
        "k_rot",
        "k_tran_mean",
        "k_rot_mean",
        "rank_Km",
        "status",
    ])
    .map_err(csv_err)?;
    let mut sidecar = Vec::with_capacity(rows.len());
    for row in &rows {
        let rep = row.report.as_ref();
        let mean = rep.and_then(|r| r.summary(Summary::MeanDiagonal));
        w.write_record([
            row.index.to_string(),
            num(row.point.x),
            num(row.point.y),
            num(row.point.z),
            opt_num(rep.and_then(|r| r.k_tran)),
            opt_num(rep.and_then(|r| r.k_rot)),
            opt_num(mean.map(|m| m.0)),
            opt_num(mean.map(|m| m.1)),
            rep.map(|r| r.rank_km.to_string()).unwrap_or_default(),
            row.status.label().to_string(),
        ])
        .map_err(csv_err)?;
        let message = match &row.status {
            MapStatus::Ok => None,
            MapStatus::Unreachable(m) | MapStatus::Failed(m) => Some(m.clone()),
        };
        sidecar.push(json!({
            "index": row.index,
            "point": [row.point.x, row.point.y, row.point.z],
            "status": row.status.label(),
            "message": message,
            "report": rep.map(StiffnessReport::to_json),
        }));
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| csv_err(e.into_error()))?)
        .expect("csv output is utf-8");
    let text = format!("# schema: {MAP_SCHEMA}\n{body}");
    emit(out, &text)?;
    if let Some(out) = out {
        let side = json!({
            "schema": MAP_MATRICES_SCHEMA,
            "variant": model.geometry.variant,
            "rows": sidecar,
        });
        emit(Some(&sidecar_path(out)), &json_text(&side))?;
    }
    Ok(())
}

fn csv_err(e: impl std::fmt::Display) -> CliError {
    CliError::new(EXIT_COMPUTATION, format!("csv error: {e}"))
}

pub fn fit_compliance(
    paths: &[PathBuf],
    p0: Option<Vector3<f64>>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let datasets = paths
        .iter()
        .map(|p| DisplacementDataset::read_csv(p, p0))
        .collect::<pkstiff::Result<Vec<_>>>()?;
    let est = build_compliance(&datasets)?;
    let rows = est.compliance.rows();
    let v = json!({
        "schema": COMPLIANCE_SCHEMA,
        "matrix": rows,
        "asymmetry": est.asymmetry,
        "max_residual_rms": est.max_residual_rms,
    });
    emit(out, &json_text(&v))
}

fn summary_json(rep: &StiffnessReport) -> serde_json::Value {
    let mean = rep.summary(Summary::MeanDiagonal);
    json!({
        "k_tran": rep.k_tran,
        "k_rot": rep.k_rot,
        "k_tran_mean": mean.map(|m| m.0),
        "k_rot_mean": mean.map(|m| m.1),
        "rank_Km": rep.rank_km,
    })
}

pub fn compare(
    args: &ModelArgs,
    points: &[Vector3<f64>],
    out: Option<&Path>,
) -> Result<(), CliError> {
    let base = load_model(args)?;
    let points: Vec<EvalPoint> = if points.is_empty() {
        EvalPoint::presets().to_vec()
    } else {
        points
            .iter()
            .enumerate()
            .map(|(i, p)| EvalPoint::new(format!("P{i}"), *p))
            .collect()
    };
    let mut rows = Vec::with_capacity(points.len());
    for pt in &points {
        let puu = evaluate_stiffness(&base.with_variant(Variant::Puu), &pt.p)?;
        let prpar = evaluate_stiffness(&base.with_variant(Variant::Prpar), &pt.p)?;
        let ratio = match (puu.k_rot, prpar.k_rot) {
            (Some(a), Some(b)) => Some(a / b),
            _ => None,
        };
        rows.push(json!({
            "name": pt.name,
            "point": [pt.p.x, pt.p.y, pt.p.z],
            "puu": summary_json(&puu),
            "prpar": summary_json(&prpar),
            "k_rot_ratio": ratio,
        }));
    }
    let v = json!({ "schema": COMPARE_SCHEMA, "rows": rows });
    emit(out, &json_text(&v))
}

pub fn validate(args: &ModelArgs, seed: u64) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    let report = validation::run_all(&cfg, seed);
    let mut text = format!(
        "seed {seed}\n{:<18} {:<7} {:>6} {:>12} {:>10}\n",
        "suite", "status", "cases", "worst", "tol"
    );
    for s in &report.suites {
        let status = match s.status {
            SuiteStatus::Pass => "pass",
            SuiteStatus::Fail => "FAIL",
            SuiteStatus::Skipped => "skipped",
        };
        text.push_str(&format!(
            "{:<18} {:<7} {:>6} {:>12.3e} {:>10.1e}\n",
            s.name, status, s.cases, s.worst, s.tolerance
        ));
        for f in &s.failures {
            text.push_str(&format!("    {f}\n"));
        }
    }
    emit(None, &text)?;
    if report.passed() {
        return Ok(());
    }
    let failing: Vec<&str> = report.failing().iter().map(|s| s.name).collect();
    let code = if failing.first() == Some(&"config") {
        EXIT_DATA
    } else {
        EXIT_COMPUTATION
    };
    Err(CliError::new(
        code,
        format!("validation failed: {}", failing.join(", ")),
    ))
}
