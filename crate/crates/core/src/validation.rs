//! Built-in invariant suites: cross-checks between independent computations.

use nalgebra::{DMatrix, Matrix3, Matrix6, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{forward_kinematics, jacobians, ChainConfig, ChainSpec};
use crate::compliance::ComplianceMatrix6;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::kinetostatics::{
    chain_stiffness_blocksolve, chain_stiffness_svd, CartesianSpringCompliance,
};
use crate::linalg;
use crate::orthoglide::{
    build_chain, chain_config, inverse_kinematics, ChainPosture, OrthoglideModel, WORKSPACE_CUBE,
};
use crate::parallelogram::{
    parallelogram_stiffness_analytic, parallelogram_stiffness_numeric, ParallelogramSpec,
    ParallelogramState,
};

pub const SVD_BLOCKSOLVE_TOL: f64 = 1e-9;
pub const PARALLELOGRAM_TOL: f64 = 1e-8;
pub const FK_IK_TOL: f64 = 1e-9;
pub const FD_JACOBIAN_TOL: f64 = 1e-5;
/// Step of the central differences, in mm or rad.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub status: SuiteStatus,
    pub cases: usize,
    /// Worst observed error in the suite's own metric.
    pub worst: f64,
    pub tolerance: f64,
    /// First few failing cases.
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            status: SuiteStatus::Pass,
            cases: 0,
            worst: 0.0,
            tolerance,
            failures: Vec::new(),
        }
    }

    fn skipped(name: &'static str, why: &str) -> Self {
        Self {
            status: SuiteStatus::Skipped,
            failures: vec![why.to_string()],
            ..Self::new(name, f64::NAN)
        }
    }

    fn record(&mut self, err: f64, what: impl FnOnce() -> String) {
        self.cases += 1;
        if err.is_nan() || err > self.worst {
            self.worst = err;
        }
        if !(err <= self.tolerance) {
            self.fail(what());
        }
    }

    fn fail(&mut self, msg: String) {
        self.status = SuiteStatus::Fail;
        if self.failures.len() < 5 {
            self.failures.push(msg);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.status == SuiteStatus::Pass)
    }

    pub fn failing(&self) -> Vec<&SuiteResult> {
        self.suites
            .iter()
            .filter(|s| s.status != SuiteStatus::Pass)
            .collect()
    }
}

/// Runs every suite. Model-dependent suites are skipped when the config is invalid.
pub fn run_all(cfg: &Config, seed: u64) -> ValidationReport {
    let mut suites = vec![config_suite(cfg)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    suites.push(svd_blocksolve_suite(&mut rng, 200, 100));
    match cfg.model() {
        Ok(model) => {
            suites.push(parallelogram_suite(&model, &mut rng, 20));
            let points = sample_workspace(&model, &mut rng, 10);
            suites.push(fk_ik_suite(&model, &points));
            suites.push(fd_jacobian_suite(&model, &points));
        }
        Err(e) => {
            let why = format!("invalid config: {e}");
            for name in ["parallelogram", "fk_ik", "fd_jacobians"] {
                suites.push(SuiteResult::skipped(name, &why));
            }
        }
    }
    ValidationReport { seed, suites }
}

pub fn config_suite(cfg: &Config) -> SuiteResult {
    let mut s = SuiteResult::new("config", 0.0);
    for c in cfg.checks() {
        s.cases += 1;
        if let Some(e) = c.error {
            s.worst = 1.0;
            s.fail(format!("{}: {e}", c.name));
        }
    }
    s
}

fn random_spd(rng: &mut ChaCha8Rng) -> Matrix6<f64> {
    let a = Matrix6::from_fn(|_, _| rng.random_range(-1.0..1.0));
    a * a.transpose() + Matrix6::identity() * 0.5
}

/// Full-rank instances must agree; rank-deficient ones must obey `rank K = 6 − rank J_q`
/// and be refused by the block solve.
pub fn svd_blocksolve_suite(rng: &mut ChaCha8Rng, full: usize, deficient: usize) -> SuiteResult {
    let mut s = SuiteResult::new("svd_vs_blocksolve", SVD_BLOCKSOLVE_TOL);
    for i in 0..full {
        let m = rng.random_range(1..=5);
        let spd = random_spd(rng);
        let jq = DMatrix::from_fn(6, m, |_, _| rng.random_range(-1.0..1.0));
        let sc = CartesianSpringCompliance::new(spd).expect("random SPD is symmetric");
        match (
            chain_stiffness_svd(&sc, &jq, linalg::DEFAULT_SIGMA_TOL),
            chain_stiffness_blocksolve(&sc, &jq),
        ) {
            (Ok(a), Ok(b)) => {
                let err = linalg::rel_frobenius6(&a.k, &b.k);
                s.record(err, || {
                    format!("full-rank case {i}: relative error {err:.3e}")
                });
            }
            (a, b) => {
                s.cases += 1;
                s.fail(format!(
                    "full-rank case {i}: svd {:?}, blocksolve {:?}",
                    a.err(),
                    b.err()
                ));
            }
        }
    }
    for i in 0..deficient {
        let m = rng.random_range(2..=5);
        let r = rng.random_range(1..m);
        let b = DMatrix::from_fn(6, r, |_, _| rng.random_range(-1.0..1.0));
        let c = DMatrix::from_fn(r, m, |_, _| rng.random_range(-1.0..1.0));
        let jq = b * c;
        let sc = CartesianSpringCompliance::new(random_spd(rng)).expect("random SPD is symmetric");
        s.cases += 1;
        match chain_stiffness_svd(&sc, &jq, linalg::DEFAULT_SIGMA_TOL) {
            Ok(k) if k.rank == 6 - r => {}
            Ok(k) => s.fail(format!(
                "rank-deficient case {i}: rank(K) = {}, expected {}",
                k.rank,
                6 - r
            )),
            Err(e) => s.fail(format!("rank-deficient case {i}: {e}")),
        }
        if !matches!(
            chain_stiffness_blocksolve(&sc, &jq),
            Err(Error::Singular(_))
        ) {
            s.fail(format!(
                "rank-deficient case {i}: block solve did not report singularity"
            ));
        }
    }
    s
}

/// Random bar compliance: the configured one with a random SPD perturbation of
/// comparable size in each diagonal block.
fn random_bar(base: &ComplianceMatrix6, rng: &mut ChaCha8Rng) -> ComplianceMatrix6 {
    let a = Matrix6::from_fn(|_, _| rng.random_range(-1.0..1.0));
    let scale = Matrix6::from_diagonal(&Vector6::from_fn(|i, _| base.matrix()[(i, i)].sqrt()));
    let p = scale * (a * a.transpose()) * scale * 0.5;
    ComplianceMatrix6::new(base.matrix() + p).expect("sum of PSD matrices is PSD")
}

pub fn parallelogram_suite(
    model: &OrthoglideModel,
    rng: &mut ChaCha8Rng,
    bars: usize,
) -> SuiteResult {
    let mut s = SuiteResult::new("parallelogram", PARALLELOGRAM_TOL);
    let g = &model.geometry;
    let d = if g.d > 0.0 { g.d } else { 80.0 };
    for b in 0..bars {
        let bar = random_bar(&model.links.bar, rng);
        let spec = match ParallelogramSpec::new(g.l, d, bar) {
            Ok(sp) => sp,
            Err(e) => {
                s.fail(e.to_string());
                return s;
            }
        };
        for i in 0..=12 {
            let q = -1.2 + 0.2 * i as f64;
            let st = ParallelogramState::new(q).expect("grid stays inside (-pi/2, pi/2)");
            match (
                parallelogram_stiffness_analytic(&st, &spec),
                parallelogram_stiffness_numeric(&st, &spec, None),
            ) {
                (Ok(a), Ok(n)) => {
                    let err = linalg::rel_frobenius6(&a.k, &n.k);
                    s.record(err, || {
                        format!("bar {b}, q = {q:.2}: relative error {err:.3e}")
                    });
                }
                (a, n) => {
                    s.cases += 1;
                    s.fail(format!(
                        "bar {b}, q = {q:.2}: analytic {:?}, numeric {:?}",
                        a.err(),
                        n.err()
                    ));
                }
            }
        }
    }
    s
}

/// Reachable points drawn uniformly from the working cube.
pub fn sample_workspace(
    model: &OrthoglideModel,
    rng: &mut ChaCha8Rng,
    n: usize,
) -> Vec<[ChainPosture; 3]> {
    let (lo, hi) = WORKSPACE_CUBE;
    let mut out = Vec::with_capacity(n);
    for _ in 0..50 * n {
        if out.len() == n {
            break;
        }
        let p = Vector3::from_fn(|_, _| rng.random_range(lo..hi));
        if let Ok(post) = inverse_kinematics(&model.geometry, &p) {
            out.push(post);
        }
    }
    out
}

/// Forward kinematics of each chain at its inverse-kinematics posture returns the
/// requested point with the platform unrotated.
pub fn fk_ik_suite(model: &OrthoglideModel, points: &[[ChainPosture; 3]]) -> SuiteResult {
    let mut s = SuiteResult::new("fk_ik", FK_IK_TOL);
    if points.is_empty() {
        s.fail("no reachable sample points".into());
        return s;
    }
    for post in points {
        let mut target: Option<Vector3<f64>> = None;
        for cp in post {
            let res = build_chain(model, cp.chain)
                .and_then(|spec| forward_kinematics(&spec, &chain_config(&spec, cp)));
            match res {
                Ok(t) => {
                    let p = t.translation();
                    let p0 = *target.get_or_insert(p);
                    let err = (t.rotation() - Matrix3::identity())
                        .amax()
                        .max((p - p0).amax() / model.geometry.l);
                    s.record(err, || {
                        format!("chain {} at q0 = {:.3}: error {err:.3e}", cp.chain, cp.q0)
                    });
                }
                Err(e) => {
                    s.cases += 1;
                    s.fail(format!("chain {}: {e}", cp.chain));
                }
            }
        }
    }
    s
}

/// Central-difference `J_θ` and `J_q` of a chain; `J_q` follows the passive map.
pub fn finite_difference_jacobians(
    spec: &ChainSpec,
    cfg: &ChainConfig,
    h: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let r0 = forward_kinematics(spec, cfg)?.rotation();
    let column = |p: &ChainConfig, m: &ChainConfig| -> Result<Vector6<f64>> {
        let tp = forward_kinematics(spec, p)?;
        let tm = forward_kinematics(spec, m)?;
        let dp = (tp.translation() - tm.translation()) / (2.0 * h);
        let w = (tp.rotation() - tm.rotation()) / (2.0 * h) * r0.transpose();
        Ok(Vector6::new(
            dp.x,
            dp.y,
            dp.z,
            w[(2, 1)],
            w[(0, 2)],
            w[(1, 0)],
        ))
    };
    let mut j_theta = DMatrix::zeros(6, spec.n_theta());
    for i in 0..spec.n_theta() {
        let (mut p, mut m) = (cfg.clone(), cfg.clone());
        p.theta[i] += h;
        m.theta[i] -= h;
        j_theta.set_column(i, &column(&p, &m)?);
    }
    let c = spec.passive_map();
    let mut j_q = DMatrix::zeros(6, c.ncols());
    for j in 0..c.ncols() {
        let (mut p, mut m) = (cfg.clone(), cfg.clone());
        for k in 0..c.nrows() {
            p.q[k] += h * c[(k, j)];
            m.q[k] -= h * c[(k, j)];
        }
        j_q.set_column(j, &column(&p, &m)?);
    }
    Ok((j_theta, j_q))
}

/// Largest absolute difference between analytic and central-difference Jacobians.
pub fn jacobian_fd_error(spec: &ChainSpec, cfg: &ChainConfig) -> Result<f64> {
    let jac = jacobians(spec, cfg)?;
    let (jt, jq) = finite_difference_jacobians(spec, cfg, FD_STEP)?;
    Ok((&jac.j_theta - jt).amax().max((&jac.j_q - jq).amax()))
}

pub fn fd_jacobian_suite(model: &OrthoglideModel, points: &[[ChainPosture; 3]]) -> SuiteResult {
    let mut s = SuiteResult::new("fd_jacobians", FD_JACOBIAN_TOL);
    if points.is_empty() {
        s.fail("no reachable sample points".into());
        return s;
    }
    for post in points {
        for cp in post {
            let res = build_chain(model, cp.chain)
                .and_then(|spec| jacobian_fd_error(&spec, &chain_config(&spec, cp)));
            match res {
                Ok(err) => s.record(err, || {
                    format!(
                        "chain {} at q0 = {:.3}: max error {err:.3e}",
                        cp.chain, cp.q0
                    )
                }),
                Err(e) => {
                    s.cases += 1;
                    s.fail(format!("chain {}: {e}", cp.chain));
                }
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthoglide::Variant;

    #[test]
    fn default_config_passes_every_suite() {
        let r = run_all(&Config::prototype(), 7);
        assert!(r.passed(), "{:#?}", r.failing());
        assert_eq!(r.suites.len(), 5);
        assert!(r.suites.iter().all(|s| s.cases > 0));
    }

    #[test]
    fn puu_config_passes() {
        let mut cfg = Config::prototype();
        cfg.variant = Variant::Puu;
        let r = run_all(&cfg, 1);
        assert!(r.passed(), "{:#?}", r.failing());
    }

    #[test]
    fn seed_does_not_change_outcome() {
        for seed in [0, 1, 99, u64::MAX] {
            assert!(run_all(&Config::prototype(), seed).passed());
        }
    }

    #[test]
    fn asymmetric_matrix_fails_config_suite() {
        let mut cfg = Config::prototype();
        cfg.foot[0][4] = 1.0;
        let r = run_all(&cfg, 3);
        assert!(!r.passed());
        let bad = r.failing();
        assert_eq!(bad[0].name, "config");
        assert!(bad[0].failures[0].contains("foot symmetric"));
        assert!(bad.iter().skip(1).all(|s| s.status == SuiteStatus::Skipped));
    }

    #[test]
    fn fd_jacobian_detects_wrong_column() {
        let model = Config::prototype().model().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts = sample_workspace(&model, &mut rng, 1);
        let cp = &pts[0][0];
        let spec = build_chain(&model, cp.chain).unwrap();
        let cfg = chain_config(&spec, cp);
        let (jt, _) = finite_difference_jacobians(&spec, &cfg, FD_STEP).unwrap();
        let jac = jacobians(&spec, &cfg).unwrap();
        assert!((&jac.j_theta - &jt).amax() < FD_JACOBIAN_TOL);
        let mut wrong = jac.j_theta.clone();
        wrong[(1, 3)] += 1e-3;
        assert!((wrong - jt).amax() > FD_JACOBIAN_TOL);
    }
}
