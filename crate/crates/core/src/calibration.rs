//! Least-squares fit of the unknown leg geometry (L, r, d) to reference
//! compliance summaries.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use nalgebra::Vector3;
use serde::Serialize;

use crate::data;
use crate::error::{Error, Result};
use crate::orthoglide::{
    evaluate_stiffness, Flags, LinkCompliances, OrthoglideGeometry, OrthoglideModel, Summary,
    Variant,
};

/// Geometry obtained by [`calibrate`] from [`reference_targets`] with the
/// prototype springs and [`CALIBRATED_SUMMARY`]. Millimetres.
pub const CALIBRATED_L: f64 = 310.88;
pub const CALIBRATED_R: f64 = 30.23;
pub const CALIBRATED_D: f64 = 82.0;
pub const CALIBRATED_SUMMARY: Summary = Summary::MeanDiagonal;

/// Penalty returned for geometries where a target point cannot be evaluated.
const INFEASIBLE_COST: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    KTran,
    KRot,
}

/// Reference compliance summaries at a diagonal point `(s, s, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationTarget {
    pub variant: Variant,
    pub flags: Flags,
    pub s: f64,
    pub k_tran: f64,
    pub k_rot: f64,
}

/// The six reference points for both variants.
pub fn reference_targets() -> Vec<CalibrationTarget> {
    data::REFERENCE_SUMMARIES
        .iter()
        .map(|&(v, s, k_tran, k_rot)| CalibrationTarget {
            variant: v.parse().expect("built-in variant names parse"),
            flags: Flags::default(),
            s,
            k_tran,
            k_rot,
        })
        .collect()
}

/// Reference points of the axis-flexible parallelogram model.
pub fn extended_targets() -> Vec<CalibrationTarget> {
    data::REFERENCE_SUMMARIES_EXTENDED
        .iter()
        .map(|&(s, k_tran, k_rot)| CalibrationTarget {
            variant: Variant::Prpar,
            flags: Flags {
                axis_flexibility: true,
            },
            s,
            k_tran,
            k_rot,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub variant: Variant,
    pub axis_flexibility: bool,
    pub s: f64,
    pub quantity: Quantity,
    pub model: f64,
    pub reference: f64,
    /// `model / reference - 1`.
    pub rel_error: f64,
}

/// Model summaries against every target for one geometry.
pub fn predict(
    links: &LinkCompliances,
    l: f64,
    r: f64,
    d: f64,
    summary: Summary,
    targets: &[CalibrationTarget],
) -> Result<Vec<Residual>> {
    let mut out = Vec::with_capacity(2 * targets.len());
    for t in targets {
        let geom = OrthoglideGeometry::new(l, r, d, t.variant, t.flags)?;
        let model = OrthoglideModel::new(geom, *links);
        let rep = evaluate_stiffness(&model, &Vector3::new(t.s, t.s, t.s))?;
        let (k_tran, k_rot) = rep.summary(summary).ok_or_else(|| {
            Error::numerical(
                format!("compliance summary undefined at ({0}, {0}, {0})", t.s),
                Some(rep.rank_km as f64),
            )
        })?;
        for (quantity, value, reference) in [
            (Quantity::KTran, k_tran, t.k_tran),
            (Quantity::KRot, k_rot, t.k_rot),
        ] {
            out.push(Residual {
                variant: t.variant,
                axis_flexibility: t.flags.axis_flexibility,
                s: t.s,
                quantity,
                model: value,
                reference,
                rel_error: value / reference - 1.0,
            });
        }
    }
    Ok(out)
}

/// Sum of squared log ratios.
pub fn log_cost(residuals: &[Residual]) -> f64 {
    residuals
        .iter()
        .map(|r| (r.model / r.reference).ln().powi(2))
        .sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationResult {
    pub summary: Summary,
    pub l: f64,
    pub r: f64,
    pub d: f64,
    pub cost: f64,
    pub iterations: u64,
    pub residuals: Vec<Residual>,
}

impl CalibrationResult {
    pub fn max_abs_rel_error(&self) -> f64 {
        self.residuals
            .iter()
            .map(|r| r.rel_error.abs())
            .fold(0.0, f64::max)
    }
}

struct LogObjective<'a> {
    links: &'a LinkCompliances,
    summary: Summary,
    targets: &'a [CalibrationTarget],
}

impl CostFunction for LogObjective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let (l, r, d) = (x[0].exp(), x[1].exp(), x[2].exp());
        Ok(
            match predict(self.links, l, r, d, self.summary, self.targets) {
                Ok(res) => log_cost(&res),
                Err(_) => INFEASIBLE_COST,
            },
        )
    }
}

/// Nelder–Mead over `(ln L, ln r, ln d)` starting from `start`.
pub fn calibrate(
    links: &LinkCompliances,
    summary: Summary,
    targets: &[CalibrationTarget],
    start: [f64; 3],
    max_iters: u64,
) -> Result<CalibrationResult> {
    if targets.is_empty() {
        return Err(Error::Input("no calibration targets".into()));
    }
    if start.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Input(format!(
            "starting geometry must be positive, got {start:?}"
        )));
    }
    let x0: Vec<f64> = start.iter().map(|v| v.ln()).collect();
    let mut simplex = vec![x0.clone()];
    for i in 0..3 {
        let mut v = x0.clone();
        v[i] += 0.1;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-10)
        .map_err(|e| Error::Input(e.to_string()))?;
    let problem = LogObjective {
        links,
        summary,
        targets,
    };
    let res = Executor::new(problem, solver)
        .configure(|s| s.max_iters(max_iters))
        .run()
        .map_err(|e| Error::numerical(format!("calibration failed: {e}"), None))?;
    let state = res.state();
    let best = state
        .get_best_param()
        .cloned()
        .ok_or_else(|| Error::numerical("calibration produced no parameters", None))?;
    let (l, r, d) = (best[0].exp(), best[1].exp(), best[2].exp());
    let residuals = predict(links, l, r, d, summary, targets)?;
    Ok(CalibrationResult {
        summary,
        l,
        r,
        d,
        cost: log_cost(&residuals),
        iterations: state.get_iter(),
        residuals,
    })
}
