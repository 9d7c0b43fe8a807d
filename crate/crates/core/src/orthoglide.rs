//! Orthoglide-type translational manipulator: three orthogonal prismatic actuators,
//! each driving a leg made either of a U-joint limb (PUU) or a parallelogram (PRPaR).
//!
//! World frame: origin at the end-effector reference point of the isotropic posture,
//! where each leg is parallel to its actuator axis.

use std::fmt;

use nalgebra::{DMatrix, Matrix3, Matrix4, Matrix6, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{
    constrain_passive, jacobians, ChainConfig, ChainElement, ChainSpec, LinearRelation,
};
use crate::compliance::ComplianceMatrix6;
use crate::data;
use crate::error::{Error, Result};
use crate::kinetostatics::{
    aggregate_manipulator, cartesian_spring_compliance, chain_stiffness_svd, ChainStiffness,
};
use crate::linalg;
use crate::parallelogram::{
    parallelogram_stiffness_analytic, parallelogram_stiffness_numeric, regularize_for_chain_use,
    ParallelogramSpec, ParallelogramState, Regularization,
};
use crate::se3::{Axis, ElemMotion, HomTransform, SPRING6_ORDER};

/// Legs closer than this (relative to `L`) to perpendicular with their actuator are flagged.
const SERIAL_SINGULARITY_WARN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Puu,
    Prpar,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Puu => "puu",
            Variant::Prpar => "prpar",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "puu" | "3-puu" => Ok(Variant::Puu),
            "prpar" | "3-prpar" => Ok(Variant::Prpar),
            other => Err(Error::Input(format!(
                "unknown variant '{other}' (expected puu or prpar)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    /// Include the compliance of the parallelogram hinge-axis links.
    #[serde(default)]
    pub axis_flexibility: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthoglideGeometry {
    pub l: f64,
    pub r: f64,
    pub d: f64,
    pub variant: Variant,
    pub flags: Flags,
}

impl OrthoglideGeometry {
    pub fn new(l: f64, r: f64, d: f64, variant: Variant, flags: Flags) -> Result<Self> {
        let g = Self {
            l,
            r,
            d,
            variant,
            flags,
        };
        g.check()?;
        Ok(g)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.l.is_finite() && self.r.is_finite() && self.d.is_finite()) {
            return Err(Error::Input("geometry has non-finite parameters".into()));
        }
        if !(self.r > 0.0 && self.l > self.r) {
            return Err(Error::Input(format!(
                "geometry requires L > r > 0, got L = {}, r = {}",
                self.l, self.r
            )));
        }
        if self.variant == Variant::Prpar && self.d <= 0.0 {
            return Err(Error::Input(format!(
                "parallelogram spacing d must be positive, got {}",
                self.d
            )));
        }
        Ok(())
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }
}

/// Link and actuator compliances of one leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkCompliances {
    pub k_ctr: f64,
    pub act: ComplianceMatrix6,
    pub foot: ComplianceMatrix6,
    pub bar: ComplianceMatrix6,
    pub axis: ComplianceMatrix6,
}

impl LinkCompliances {
    /// Values identified for the prototype links.
    pub fn prototype() -> Self {
        let m = |rows: &[[f64; 6]; 6]| {
            ComplianceMatrix6::from_rows(rows).expect("built-in compliance matrices are valid")
        };
        Self {
            k_ctr: data::K_CTR,
            act: m(&data::ACT),
            foot: m(&data::FOOT),
            bar: m(&data::BAR),
            axis: m(&data::AXIS),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthoglideModel {
    pub geometry: OrthoglideGeometry,
    pub links: LinkCompliances,
    pub regularization: Regularization,
}

impl OrthoglideModel {
    pub fn new(geometry: OrthoglideGeometry, links: LinkCompliances) -> Self {
        Self {
            geometry,
            links,
            regularization: Regularization::default(),
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.geometry.variant = variant;
        self
    }

    pub fn with_regularization(mut self, reg: Regularization) -> Self {
        self.regularization = reg;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainId {
    X,
    Y,
    Z,
}

impl ChainId {
    pub const ALL: [ChainId; 3] = [ChainId::X, ChainId::Y, ChainId::Z];

    /// Local-to-world rotation: the chain's local x-axis is its actuator axis.
    pub fn base_rotation(self) -> Matrix3<f64> {
        match self {
            ChainId::X => Matrix3::identity(),
            ChainId::Y => Matrix3::new(0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0),
            ChainId::Z => Matrix3::new(0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0),
        }
    }
}

impl fmt::Display for ChainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChainId::X => "x",
            ChainId::Y => "y",
            ChainId::Z => "z",
        })
    }
}

pub fn base_transform(geom: &OrthoglideGeometry, chain: ChainId) -> HomTransform {
    let r = chain.base_rotation();
    let t = r * Vector3::new(-geom.l - geom.r, 0.0, 0.0);
    HomTransform::from_parts(r, t).expect("permutation matrices are rotations")
}

pub fn tool_transform(geom: &OrthoglideGeometry, chain: ChainId) -> HomTransform {
    let r = chain.base_rotation().transpose();
    HomTransform::from_parts(r, Vector3::new(geom.r, 0.0, 0.0))
        .expect("permutation matrices are rotations")
}

/// Bounds of the working cube along each axis, mm.
pub const WORKSPACE_CUBE: (f64, f64) = (-73.65, 126.35);

/// A named workspace point.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPoint {
    pub name: String,
    pub p: Vector3<f64>,
}

impl EvalPoint {
    pub fn new(name: impl Into<String>, p: Vector3<f64>) -> Self {
        Self {
            name: name.into(),
            p,
        }
    }

    pub fn diagonal(name: impl Into<String>, s: f64) -> Self {
        Self::new(name, Vector3::new(s, s, s))
    }

    pub fn q0() -> Self {
        Self::diagonal("Q0", 0.0)
    }

    pub fn q1() -> Self {
        Self::diagonal("Q1", -73.65)
    }

    pub fn q2() -> Self {
        Self::diagonal("Q2", 126.35)
    }

    pub fn presets() -> [Self; 3] {
        [Self::q0(), Self::q1(), Self::q2()]
    }
}

/// Rigid posture of one chain: actuator position and the four U-joint angles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainPosture {
    pub chain: ChainId,
    pub q0: f64,
    pub q: [f64; 4],
    pub warnings: Vec<String>,
}

/// Closed-form inverse kinematics of the three chains.
pub fn inverse_kinematics(
    geom: &OrthoglideGeometry,
    p: &Vector3<f64>,
) -> Result<[ChainPosture; 3]> {
    geom.check()?;
    if !p.iter().all(|x| x.is_finite()) {
        return Err(Error::Input("point has non-finite coordinates".into()));
    }
    let l = geom.l;
    let solve = |chain: ChainId| -> Result<ChainPosture> {
        let c = chain.base_rotation().transpose() * p;
        let disc = l * l - c.y * c.y - c.z * c.z;
        if disc < 0.0 {
            return Err(Error::Workspace {
                chain: chain.to_string(),
                message: format!(
                    "point is {:.3} mm beyond the leg reach",
                    (c.y * c.y + c.z * c.z).sqrt() - l
                ),
            });
        }
        let ux_l = disc.sqrt();
        let q0 = c.x + l - ux_l;
        let u = Vector3::new(ux_l, c.y, c.z) / l;
        let q2 = -u.z.clamp(-1.0, 1.0).asin();
        let q1 = u.y.atan2(u.x);
        let mut warnings = Vec::new();
        if ux_l < SERIAL_SINGULARITY_WARN * l {
            warnings.push(format!(
                "chain {chain}: leg nearly perpendicular to its actuator"
            ));
        }
        if u.z.abs() > 1.0 - 1e-9 {
            warnings.push(format!("chain {chain}: U-joint at gimbal lock"));
        }
        Ok(ChainPosture {
            chain,
            q0,
            q: [q1, q2, -q2, -q1],
            warnings,
        })
    };
    Ok([solve(ChainId::X)?, solve(ChainId::Y)?, solve(ChainId::Z)?])
}

/// Spring coordinates of the leg spring for a given variant and regularization.
fn leg_dofs(variant: Variant, reg: Regularization) -> Vec<ElemMotion> {
    match (variant, reg) {
        (Variant::Prpar, Regularization::Reduce5Dof) => vec![
            ElemMotion::tran(Axis::X),
            ElemMotion::tran(Axis::Y),
            ElemMotion::rot(Axis::X),
            ElemMotion::rot(Axis::Y),
            ElemMotion::rot(Axis::Z),
        ],
        _ => SPRING6_ORDER.to_vec(),
    }
}

/// Serial model of one leg; for the parallelogram variant `q₂ + q₃ = 0` is enforced.
pub fn build_chain(model: &OrthoglideModel, chain: ChainId) -> Result<ChainSpec> {
    let geom = &model.geometry;
    geom.check()?;
    let spec = ChainSpec::new(vec![
        ChainElement::Rigid(base_transform(geom, chain)),
        ChainElement::Actuated(ElemMotion::tran(Axis::X)),
        ChainElement::spring6("act"),
        ChainElement::spring6("foot"),
        ChainElement::PassivePair(Axis::Z, Axis::Y),
        ChainElement::rigid_translation(Axis::X, geom.l),
        ChainElement::spring("leg", leg_dofs(geom.variant, model.regularization)),
        ChainElement::PassivePair(Axis::Y, Axis::Z),
        ChainElement::Rigid(tool_transform(geom, chain)),
    ])?;
    match geom.variant {
        Variant::Puu => Ok(spec),
        Variant::Prpar => constrain_passive(&spec, &[LinearRelation::opposite(1, 2)]),
    }
}

/// Leg compliance at the given parallelogram angle.
pub fn leg_compliance(model: &OrthoglideModel, q2: f64) -> Result<DMatrix<f64>> {
    match model.geometry.variant {
        Variant::Puu => Ok(model.links.bar.to_dmatrix() * 0.5),
        Variant::Prpar => {
            let spec = ParallelogramSpec::new(model.geometry.l, model.geometry.d, model.links.bar)?;
            let state = ParallelogramState::new(q2)?;
            let k = if model.geometry.flags.axis_flexibility {
                parallelogram_stiffness_numeric(&state, &spec, Some(&model.links.axis))?
            } else {
                parallelogram_stiffness_analytic(&state, &spec)?
            };
            Ok(regularize_for_chain_use(&k, model.regularization)?.compliance)
        }
    }
}

/// Compliance blocks in chain order: control loop, actuator, foot, leg.
pub fn chain_blocks(model: &OrthoglideModel, posture: &ChainPosture) -> Result<Vec<DMatrix<f64>>> {
    Ok(vec![
        DMatrix::from_element(1, 1, model.links.k_ctr),
        model.links.act.to_dmatrix(),
        model.links.foot.to_dmatrix(),
        leg_compliance(model, posture.q[1])?,
    ])
}

pub fn chain_config(spec: &ChainSpec, posture: &ChainPosture) -> ChainConfig {
    ChainConfig::rigid(spec, posture.q0, posture.q.to_vec())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    pub posture: ChainPosture,
    pub stiffness: ChainStiffness,
}

/// Scalar reduction of a 3×3 compliance block.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summary {
    /// Largest eigenvalue (worst direction).
    #[default]
    MaxEigen,
    /// Mean of the diagonal, i.e. average compliance along the base axes.
    MeanDiagonal,
}

impl std::str::FromStr for Summary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max_eigen" => Ok(Self::MaxEigen),
            "mean_diagonal" => Ok(Self::MeanDiagonal),
            _ => Err(Error::Input(format!(
                "unknown summary '{s}', expected max_eigen or mean_diagonal"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessReport {
    pub point: Vector3<f64>,
    pub variant: Variant,
    pub k_m: Matrix6<f64>,
    /// Translational 3×3 block of `K_m`.
    pub k_tran_matrix: Matrix3<f64>,
    pub rank_km: usize,
    /// `K_m⁻¹` when `K_m` is nonsingular.
    pub compliance: Option<Matrix6<f64>>,
    /// Largest eigenvalue of the translational block of `K_m⁻¹`, mm/N.
    pub k_tran: Option<f64>,
    /// Largest eigenvalue of the rotational block of `K_m⁻¹`, rad/(N·mm).
    pub k_rot: Option<f64>,
    pub chains: Vec<ChainReport>,
    pub warnings: Vec<String>,
}

impl StiffnessReport {
    pub fn chain_ranks(&self) -> Vec<usize> {
        self.chains.iter().map(|c| c.stiffness.rank).collect()
    }

    /// `(k_tran, k_rot)` under the given reduction, `None` when `K_m` is singular.
    pub fn summary(&self, kind: Summary) -> Option<(f64, f64)> {
        match kind {
            Summary::MaxEigen => Some((self.k_tran?, self.k_rot?)),
            Summary::MeanDiagonal => {
                let c = self.compliance.as_ref()?;
                let mean = |o: usize| (c[(o, o)] + c[(o + 1, o + 1)] + c[(o + 2, o + 2)]) / 3.0;
                Some((mean(0), mean(3)))
            }
        }
    }

    pub fn rank_k_tran(&self) -> usize {
        let m = DMatrix::from_fn(3, 3, |i, j| self.k_tran_matrix[(i, j)]);
        linalg::rank(&m, 1e-6)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows6 = |m: &Matrix6<f64>| -> Vec<Vec<f64>> {
            (0..6)
                .map(|i| (0..6).map(|j| m[(i, j)]).collect())
                .collect()
        };
        let rows3 = |m: &Matrix3<f64>| -> Vec<Vec<f64>> {
            (0..3)
                .map(|i| (0..3).map(|j| m[(i, j)]).collect())
                .collect()
        };
        serde_json::json!({
            "schema": "pkstiff.report/1",
            "point": [self.point.x, self.point.y, self.point.z],
            "variant": self.variant,
            "k_tran": self.k_tran,
            "k_rot": self.k_rot,
            "k_tran_mean": self.summary(Summary::MeanDiagonal).map(|v| v.0),
            "k_rot_mean": self.summary(Summary::MeanDiagonal).map(|v| v.1),
            "rank_Km": self.rank_km,
            "K_m": rows6(&self.k_m),
            "K_tran": rows3(&self.k_tran_matrix),
            "compliance": self.compliance.as_ref().map(rows6),
            "chains": self.chains.iter().map(|c| serde_json::json!({
                "chain": c.posture.chain,
                "q0": c.posture.q0,
                "q": c.posture.q,
                "rank": c.stiffness.rank,
                "jac_rank": c.stiffness.jac_rank,
            })).collect::<Vec<_>>(),
            "warnings": self.warnings,
        })
    }
}

/// Stiffness of one chain at a posture, expressed at the end-effector in world axes.
pub fn chain_stiffness(model: &OrthoglideModel, posture: &ChainPosture) -> Result<ChainStiffness> {
    let spec = build_chain(model, posture.chain)?;
    let cfg = chain_config(&spec, posture);
    let jac = jacobians(&spec, &cfg)?;
    let s = cartesian_spring_compliance(&jac, &chain_blocks(model, posture)?)?;
    chain_stiffness_svd(&s, &jac.j_q, linalg::DEFAULT_SIGMA_TOL)
}

pub fn evaluate_stiffness(model: &OrthoglideModel, p: &Vector3<f64>) -> Result<StiffnessReport> {
    let postures = inverse_kinematics(&model.geometry, p)?;
    let mut chains = Vec::with_capacity(3);
    for posture in postures {
        let stiffness = chain_stiffness(model, &posture)?;
        chains.push(ChainReport { posture, stiffness });
    }
    let manip = aggregate_manipulator(chains.iter().map(|c| c.stiffness.clone()).collect())?;
    let k_m = manip.k_m;
    let k_tran_matrix = k_m.fixed_view::<3, 3>(0, 0).into_owned();
    let mut warnings: Vec<String> = chains
        .iter()
        .flat_map(|c| c.posture.warnings.iter().cloned())
        .collect();
    let (compliance, k_tran, k_rot) = if manip.rank == 6 {
        match k_m.try_inverse() {
            Some(c) => {
                let c = (c + c.transpose()) * 0.5;
                let block_max = |o: usize| {
                    let b = DMatrix::from_fn(3, 3, |i, j| c[(o + i, o + j)]);
                    *linalg::sym_eigenvalues(&b).last().expect("3 eigenvalues")
                };
                (Some(c), Some(block_max(0)), Some(block_max(3)))
            }
            None => (None, None, None),
        }
    } else {
        warnings.push(format!(
            "stiffness matrix has rank {}; compliance summaries unavailable",
            manip.rank
        ));
        (None, None, None)
    };
    Ok(StiffnessReport {
        point: *p,
        variant: model.geometry.variant,
        k_m,
        k_tran_matrix,
        rank_km: manip.rank,
        compliance,
        k_tran,
        k_rot,
        chains,
        warnings,
    })
}

/// Diagonal postures where the legs become coplanar (`flat`) or parallel (`bar`).
pub fn singular_configs(geom: &OrthoglideGeometry) -> Vec<EvalPoint> {
    vec![
        EvalPoint::diagonal("flat", -geom.l / 6f64.sqrt()),
        EvalPoint::diagonal("bar", geom.l / 3f64.sqrt()),
    ]
}

/// Regular grid, one `(min, max, n)` triple per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub axes: [(f64, f64, usize); 3],
}

impl GridSpec {
    pub fn new(axes: [(f64, f64, usize); 3]) -> Result<Self> {
        for (lo, hi, n) in axes {
            if n == 0 {
                return Err(Error::Input("grid axis needs at least one point".into()));
            }
            if !(lo.is_finite() && hi.is_finite()) || hi < lo {
                return Err(Error::Input(format!(
                    "grid bounds {lo}:{hi} are not ordered"
                )));
            }
        }
        Ok(Self { axes })
    }

    /// Cube `[lo, hi]³` with `n` points per axis.
    pub fn cube(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new([(lo, hi, n); 3])
    }

    /// The prescribed 200 mm working cube, with Q1 and Q2 at opposite corners.
    pub fn workspace(n: usize) -> Result<Self> {
        Self::cube(WORKSPACE_CUBE.0, WORKSPACE_CUBE.1, n)
    }

    /// Parses `xmin:xmax:n,ymin:ymax:n,zmin:zmax:n`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Input(format!(
                "grid needs three comma-separated axes, got '{s}'"
            )));
        }
        let mut axes = [(0.0, 0.0, 0); 3];
        for (k, part) in parts.iter().enumerate() {
            let f: Vec<&str> = part.split(':').collect();
            if f.len() != 3 {
                return Err(Error::Input(format!("grid axis '{part}' is not min:max:n")));
            }
            let num = |t: &str| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Input(format!("bad grid bound '{t}'")))
            };
            let n = f[2]
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::Input(format!("bad grid count '{}'", f[2])))?;
            axes[k] = (num(f[0])?, num(f[1])?, n);
        }
        Self::new(axes)
    }

    fn coords(axis: (f64, f64, usize)) -> Vec<f64> {
        let (lo, hi, n) = axis;
        if n == 1 {
            return vec![lo];
        }
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    /// Points in index order, z varying fastest.
    pub fn points(&self) -> Vec<Vector3<f64>> {
        let (xs, ys, zs) = (
            Self::coords(self.axes[0]),
            Self::coords(self.axes[1]),
            Self::coords(self.axes[2]),
        );
        let mut out = Vec::with_capacity(xs.len() * ys.len() * zs.len());
        for &x in &xs {
            for &y in &ys {
                for &z in &zs {
                    out.push(Vector3::new(x, y, z));
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.2).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapStatus {
    Ok,
    Unreachable(String),
    Failed(String),
}

impl MapStatus {
    pub fn label(&self) -> &'static str {
        match self {
            MapStatus::Ok => "ok",
            MapStatus::Unreachable(_) => "unreachable",
            MapStatus::Failed(_) => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapRow {
    pub index: usize,
    pub point: Vector3<f64>,
    pub status: MapStatus,
    pub report: Option<StiffnessReport>,
}

/// Evaluates every point; unreachable points are flagged rather than fatal.
/// Rows come back sorted by grid index whatever the scheduling.
pub fn workspace_map(model: &OrthoglideModel, points: &[Vector3<f64>]) -> Result<Vec<MapRow>> {
    if points.is_empty() {
        return Err(Error::Input("empty grid".into()));
    }
    model.geometry.check()?;
    let mut rows: Vec<MapRow> = points
        .par_iter()
        .enumerate()
        .map(|(index, p)| match evaluate_stiffness(model, p) {
            Ok(rep) => MapRow {
                index,
                point: *p,
                status: MapStatus::Ok,
                report: Some(rep),
            },
            Err(Error::Workspace { chain, message }) => MapRow {
                index,
                point: *p,
                status: MapStatus::Unreachable(format!("chain {chain}: {message}")),
                report: None,
            },
            Err(e) => MapRow {
                index,
                point: *p,
                status: MapStatus::Failed(e.to_string()),
                report: None,
            },
        })
        .collect();
    rows.sort_by_key(|r| r.index);
    Ok(rows)
}

/// Cyclic axis permutation `x → y → z → x` applied to a 6×6 stiffness.
pub fn permute_cyclic(k: &Matrix6<f64>) -> Matrix6<f64> {
    let p = ChainId::Y.base_rotation();
    let mut g = Matrix6::zeros();
    g.fixed_view_mut::<3, 3>(0, 0).copy_from(&p);
    g.fixed_view_mut::<3, 3>(3, 3).copy_from(&p);
    g * k * g.transpose()
}

/// Full pose of a chain at its rigid posture, for kinematic checks.
pub fn chain_pose(model: &OrthoglideModel, posture: &ChainPosture) -> Result<Matrix4<f64>> {
    let spec = build_chain(model, posture.chain)?;
    let cfg = chain_config(&spec, posture);
    Ok(*crate::chain::forward_kinematics(&spec, &cfg)?.matrix())
}
