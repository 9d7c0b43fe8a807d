//! Link compliance from finite-element displacement fields.
//!
//! Each load case (a unit-direction force or torque at the reference point `p₀`)
//! yields node displacements. A rigid motion is fitted to them, its translation and
//! small rotation give one column of the compliance matrix.

use std::fmt;
use std::io::Read;
use std::path::Path;

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::compliance::{validate_compliance, ComplianceMatrix6};
use crate::error::{Error, Result};
use crate::linalg;
use crate::se3::Axis;

/// Largest `‖R − I‖_F` accepted by [`small_angle_extract`].
pub const SMALL_ROTATION_LIMIT: f64 = 1e-2;
/// Largest relative asymmetry of the raw matrix accepted by [`build_compliance`].
pub const MAX_ASYMMETRY: f64 = 0.10;
/// Node clouds with `σ₂/σ₁` of the centred cross matrix below this are collinear.
const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadKind {
    Force,
    Torque,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadCase {
    pub kind: LoadKind,
    pub axis: Axis,
    /// N for forces, N·mm for torques.
    pub magnitude: f64,
}

impl LoadCase {
    pub fn new(kind: LoadKind, axis: Axis, magnitude: f64) -> Result<Self> {
        if !(magnitude.is_finite() && magnitude != 0.0) {
            return Err(Error::Input(format!(
                "load magnitude must be finite and nonzero, got {magnitude}"
            )));
        }
        Ok(Self {
            kind,
            axis,
            magnitude,
        })
    }

    /// Column of the compliance matrix this load produces: `Fx Fy Fz Mx My Mz`.
    pub fn index(&self) -> usize {
        match self.kind {
            LoadKind::Force => self.axis.index(),
            LoadKind::Torque => 3 + self.axis.index(),
        }
    }

    /// Canonical unit-axis load for column `j`.
    pub fn canonical(j: usize, magnitude: f64) -> Result<Self> {
        let axis = match j % 3 {
            0 => Axis::X,
            1 => Axis::Y,
            _ => Axis::Z,
        };
        if j >= 6 {
            return Err(Error::Input(format!("load index {j} out of range")));
        }
        let kind = if j < 3 {
            LoadKind::Force
        } else {
            LoadKind::Torque
        };
        Self::new(kind, axis, magnitude)
    }
}

impl fmt::Display for LoadCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            LoadKind::Force => "force",
            LoadKind::Torque => "torque",
        };
        write!(f, "{k} {} {}", self.axis, self.magnitude)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: i64,
    pub p: Vector3<f64>,
    pub d: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementDataset {
    pub p0: Vector3<f64>,
    pub nodes: Vec<Node>,
    pub load: LoadCase,
}

impl DisplacementDataset {
    pub fn new(p0: Vector3<f64>, nodes: Vec<Node>, load: LoadCase) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::Data(format!(
                "at least 3 nodes are needed, got {}",
                nodes.len()
            )));
        }
        let finite = p0.iter().all(|x| x.is_finite())
            && nodes
                .iter()
                .all(|n| n.p.iter().chain(n.d.iter()).all(|x| x.is_finite()));
        if !finite {
            return Err(Error::Data("dataset contains non-finite values".into()));
        }
        if !(load.magnitude.is_finite() && load.magnitude != 0.0) {
            return Err(Error::Data("load magnitude must be nonzero".into()));
        }
        Ok(Self { p0, nodes, load })
    }

    /// Reads the CSV layout written by [`DisplacementDataset::write_csv`].
    ///
    /// Header lines start with `#` and carry `load: <force|torque> <x|y|z> <magnitude>`
    /// and `p0: <x> <y> <z>`; `p0_override` replaces the latter.
    pub fn read_csv(path: &Path, p0_override: Option<Vector3<f64>>) -> Result<Self> {
        let mut text = String::new();
        std::fs::File::open(path)?.read_to_string(&mut text)?;
        Self::parse_csv(&text, p0_override).map_err(|e| match e {
            Error::Data(m) => Error::Data(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse_csv(text: &str, p0_override: Option<Vector3<f64>>) -> Result<Self> {
        let mut load = None;
        let mut p0 = None;
        for line in text.lines() {
            let Some(rest) = line.trim().strip_prefix('#') else {
                continue;
            };
            let Some((key, value)) = rest.split_once(':') else {
                continue;
            };
            match key.trim() {
                "load" => load = Some(parse_load(value)?),
                "p0" => p0 = Some(parse_vec3(value, "p0")?),
                _ => {}
            }
        }
        let load = load.ok_or_else(|| Error::Data("missing '# load:' header".into()))?;
        let p0 = p0_override
            .or(p0)
            .ok_or_else(|| Error::Data("missing '# p0:' header and no override".into()))?;

        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr
            .headers()
            .map_err(|e| Error::Data(format!("csv header: {e}")))?
            .clone();
        let expected = ["node_id", "px", "py", "pz", "dx", "dy", "dz"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Data(format!(
                "expected columns {}, got {}",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut nodes = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Data(format!("csv row {}: {e}", row + 1)))?;
            let num = |i: usize| -> Result<f64> {
                rec[i].parse::<f64>().map_err(|_| {
                    Error::Data(format!(
                        "row {}: cannot parse '{}' as a number",
                        row + 1,
                        &rec[i]
                    ))
                })
            };
            let id = rec[0]
                .parse::<i64>()
                .map_err(|_| Error::Data(format!("row {}: bad node id '{}'", row + 1, &rec[0])))?;
            nodes.push(Node {
                id,
                p: Vector3::new(num(1)?, num(2)?, num(3)?),
                d: Vector3::new(num(4)?, num(5)?, num(6)?),
            });
        }
        Self::new(p0, nodes, load)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut out = format!(
            "# load: {}\n# p0: {:.17e} {:.17e} {:.17e}\n",
            self.load, self.p0.x, self.p0.y, self.p0.z
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Data(format!("csv write: {e}"));
        w.write_record(["node_id", "px", "py", "pz", "dx", "dy", "dz"])
            .map_err(csv_err)?;
        for n in &self.nodes {
            let mut rec = vec![n.id.to_string()];
            rec.extend(n.p.iter().chain(n.d.iter()).map(|v| format!("{v:.17e}")));
            w.write_record(&rec).map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Data(format!("csv write: {e}")))?;
        out.push_str(&String::from_utf8_lossy(&bytes));
        Ok(out)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()?)?;
        Ok(())
    }
}

fn parse_load(s: &str) -> Result<LoadCase> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(Error::Data(format!(
            "load header needs 'type axis magnitude', got '{}'",
            s.trim()
        )));
    }
    let kind = match parts[0].to_ascii_lowercase().as_str() {
        "force" | "f" => LoadKind::Force,
        "torque" | "moment" | "m" => LoadKind::Torque,
        other => return Err(Error::Data(format!("unknown load type '{other}'"))),
    };
    let axis = match parts[1].to_ascii_lowercase().as_str() {
        "x" => Axis::X,
        "y" => Axis::Y,
        "z" => Axis::Z,
        other => return Err(Error::Data(format!("unknown load axis '{other}'"))),
    };
    let magnitude: f64 = parts[2]
        .parse()
        .map_err(|_| Error::Data(format!("bad load magnitude '{}'", parts[2])))?;
    LoadCase::new(kind, axis, magnitude).map_err(|e| Error::Data(e.to_string()))
}

pub fn parse_vec3(s: &str, what: &str) -> Result<Vector3<f64>> {
    let v: Vec<f64> = s
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Data(format!("cannot parse {what} '{}'", s.trim())))?;
    if v.len() != 3 {
        return Err(Error::Data(format!(
            "{what} needs 3 components, got {}",
            v.len()
        )));
    }
    Ok(Vector3::new(v[0], v[1], v[2]))
}

/// Least-squares rigid motion `g′ = R·g + t`, with `g = p − p₀` and `g′ = g + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidFit {
    pub t: Vector3<f64>,
    pub r: Matrix3<f64>,
    pub residual_rms: f64,
}

pub fn fit_rigid_motion(ds: &DisplacementDataset) -> Result<RigidFit> {
    let n = ds.nodes.len() as f64;
    let g: Vec<Vector3<f64>> = ds.nodes.iter().map(|k| k.p - ds.p0).collect();
    let gm = g.iter().sum::<Vector3<f64>>() / n;
    let dm = ds.nodes.iter().map(|k| k.d).sum::<Vector3<f64>>() / n;

    // centred g′ is (g − ḡ) + (d − d̄); keeping d separate avoids cancellation
    let rigid_shift = ds.nodes.iter().all(|k| k.d == ds.nodes[0].d);
    let mut h = Matrix3::zeros();
    for (a, k) in g.iter().zip(&ds.nodes) {
        let c = a - gm;
        h += c * (c + (k.d - dm)).transpose();
    }
    let svd = h.svd(true, true);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let s = svd.singular_values;
    if s[order[0]] == 0.0 || s[order[1]] < DEGENERACY_TOL * s[order[0]] {
        return Err(Error::Data(
            "node cloud is collinear or degenerate; the rotation is not determined".into(),
        ));
    }
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested V").transpose();
    let mut r = if rigid_shift {
        Matrix3::identity()
    } else {
        v * u.transpose()
    };
    if r.determinant() < 0.0 {
        let mut v2 = v;
        let smallest = order[2];
        v2.set_column(smallest, &(-v.column(smallest)));
        r = v2 * u.transpose();
    }
    let r_minus_i = r - Matrix3::identity();
    let t = if rigid_shift {
        ds.nodes[0].d
    } else {
        dm - r_minus_i * gm
    };
    let ss: f64 = g
        .iter()
        .zip(&ds.nodes)
        .map(|(a, k)| (k.d - r_minus_i * a - t).norm_squared())
        .sum();
    Ok(RigidFit {
        t,
        r,
        residual_rms: (ss / n).sqrt(),
    })
}

/// Rotation vector of a small rotation, `R = exp([φ]×)`.
///
/// To first order `φx = r₃₂ = −r₂₃`, `φy = r₁₃`, `φz = r₂₁ = −r₁₂`.
pub fn small_angle_extract(fit: &RigidFit) -> Result<Vector3<f64>> {
    let dev = (fit.r - Matrix3::identity()).norm();
    if !(dev < SMALL_ROTATION_LIMIT) {
        return Err(Error::Regime(format!(
            "rotation is not small: ‖R − I‖_F = {dev:.3e} ≥ {SMALL_ROTATION_LIMIT:e}"
        )));
    }
    let r = &fit.r;
    let w = Vector3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    ) * 0.5;
    let sin = w.norm();
    if sin == 0.0 {
        return Ok(Vector3::zeros());
    }
    let angle = sin.atan2((r.trace() - 1.0) / 2.0);
    Ok(w * (angle / sin))
}

/// Fitted compliance and the raw (unsymmetrized) matrix it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplianceEstimate {
    pub raw: Matrix6<f64>,
    pub compliance: ComplianceMatrix6,
    pub asymmetry: f64,
    pub max_residual_rms: f64,
}

/// Compliance columns from six load cases, then symmetrized.
pub fn build_compliance(datasets: &[DisplacementDataset]) -> Result<ComplianceEstimate> {
    if datasets.len() != 6 {
        return Err(Error::Input(format!(
            "six load cases are required, got {}",
            datasets.len()
        )));
    }
    let mut seen = [false; 6];
    let mut raw = Matrix6::zeros();
    let mut max_rms: f64 = 0.0;
    for ds in datasets {
        let j = ds.load.index();
        if seen[j] {
            return Err(Error::Data(format!("duplicate load case {}", ds.load)));
        }
        seen[j] = true;
        let fit = fit_rigid_motion(ds)?;
        let phi = small_angle_extract(&fit)?;
        let col = Vector6::new(fit.t.x, fit.t.y, fit.t.z, phi.x, phi.y, phi.z) / ds.load.magnitude;
        raw.set_column(j, &col);
        max_rms = max_rms.max(fit.residual_rms);
    }
    let asym = linalg::relative_asymmetry(&linalg::to_dmatrix6(&raw));
    if asym > MAX_ASYMMETRY {
        return Err(Error::Data(format!(
            "fitted compliance is asymmetric by {:.1}% (limit {:.0}%)",
            asym * 100.0,
            MAX_ASYMMETRY * 100.0
        )));
    }
    let sym = (raw + raw.transpose()) * 0.5;
    let compliance = validate_compliance(&sym)?;
    Ok(ComplianceEstimate {
        raw,
        compliance,
        asymmetry: asym,
        max_residual_rms: max_rms,
    })
}

/// `exp([φ]×) − I` without forming the rotation, so tiny angles keep their digits.
fn rotation_minus_identity(phi: &Vector3<f64>) -> Matrix3<f64> {
    let theta = phi.norm();
    if theta == 0.0 {
        return Matrix3::zeros();
    }
    let k = phi.cross_matrix() / theta;
    let half = (theta / 2.0).sin();
    k * theta.sin() + k * k * (2.0 * half * half)
}

/// Node displacements of a rigid body at `p₀` held by a spring of compliance `k`.
pub fn synthetic_dataset(
    k: &Matrix6<f64>,
    load: LoadCase,
    p0: Vector3<f64>,
    points: &[Vector3<f64>],
) -> Result<DisplacementDataset> {
    let mut w = Vector6::zeros();
    w[load.index()] = load.magnitude;
    let u = k * w;
    let t = Vector3::new(u[0], u[1], u[2]);
    let r_minus_i = rotation_minus_identity(&Vector3::new(u[3], u[4], u[5]));
    let nodes = points
        .iter()
        .enumerate()
        .map(|(i, p)| Node {
            id: i as i64 + 1,
            p: *p,
            d: r_minus_i * (p - p0) + t,
        })
        .collect();
    DisplacementDataset::new(p0, nodes, load)
}
