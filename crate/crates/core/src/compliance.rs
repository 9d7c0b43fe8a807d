//! Link and spring compliance: Euler–Bernoulli beam matrices, serial multi-beam
//! aggregation, validation of externally supplied matrices and SPD inversion.

use nalgebra::{DMatrix, Matrix6};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg;
use crate::se3::{chain_partial, HomTransform, SPRING6_ORDER};

/// Asymmetry (relative to the largest entry) below which a matrix is silently symmetrized.
pub const SYMMETRY_TOL: f64 = 1e-6;
/// Most negative eigenvalue accepted, relative to `‖k‖_F`.
pub const PSD_TOL: f64 = 1e-9;
/// Smallest eigenvalue accepted by [`invert_spd`], relative to `‖m‖_F`.
pub const SPD_TOL: f64 = 1e-14;

/// Prismatic beam cross-section and material (mm, N/mm²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSection {
    pub length: f64,
    pub area: f64,
    pub iy: f64,
    pub iz: f64,
    pub j: f64,
    pub young: f64,
    pub shear: f64,
}

impl BeamSection {
    /// Solid rectangle, width `b` along local y and height `h` along local z.
    pub fn rectangular(length: f64, b: f64, h: f64, young: f64, shear: f64) -> Self {
        let (long, short) = if b >= h { (b, h) } else { (h, b) };
        // Saint-Venant torsion constant, series approximation
        let beta =
            1.0 / 3.0 - 0.21 * (short / long) * (1.0 - short.powi(4) / (12.0 * long.powi(4)));
        Self {
            length,
            area: b * h,
            iy: b * h.powi(3) / 12.0,
            iz: h * b.powi(3) / 12.0,
            j: beta * long * short.powi(3),
            young,
            shear,
        }
    }

    pub fn with_length(self, length: f64) -> Self {
        Self { length, ..self }
    }

    fn check(&self) -> Result<()> {
        let fields = [
            ("L", self.length),
            ("A", self.area),
            ("Iy", self.iy),
            ("Iz", self.iz),
            ("J", self.j),
            ("E", self.young),
            ("G", self.shear),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Input(format!(
                    "beam section parameter {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Symmetric positive semi-definite 6×6 compliance of a link or virtual spring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplianceMatrix6(Matrix6<f64>);

impl ComplianceMatrix6 {
    /// Wraps a matrix after [`validate_compliance`].
    pub fn new(m: Matrix6<f64>) -> Result<Self> {
        validate_compliance(&m)
    }

    pub fn from_rows(rows: &[[f64; 6]; 6]) -> Result<Self> {
        let m = Matrix6::from_fn(|i, j| rows[i][j]);
        validate_compliance(&m)
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.0
    }

    pub fn rows(&self) -> [[f64; 6]; 6] {
        let mut out = [[0.0; 6]; 6];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.0[(i, j)];
            }
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0 * factor)
    }

    /// Stiffness matrix `k⁻¹`.
    pub fn stiffness(&self) -> Result<Matrix6<f64>> {
        invert_spd(&self.0)
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        linalg::to_dmatrix6(&self.0)
    }
}

impl Serialize for ComplianceMatrix6 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplianceMatrix6 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = <[[f64; 6]; 6]>::deserialize(d)?;
        ComplianceMatrix6::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Compliances of the four springs of one chain: control loop, actuator, foot, leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringSet {
    pub k_ctr: f64,
    pub k_act: ComplianceMatrix6,
    pub k_foot: ComplianceMatrix6,
    pub k_leg: ComplianceMatrix6,
}

impl SpringSet {
    pub fn new(
        k_ctr: f64,
        k_act: ComplianceMatrix6,
        k_foot: ComplianceMatrix6,
        k_leg: ComplianceMatrix6,
    ) -> Result<Self> {
        if !(k_ctr.is_finite() && k_ctr > 0.0) {
            return Err(Error::Input(format!(
                "control-loop compliance must be positive, got {k_ctr}"
            )));
        }
        Ok(Self {
            k_ctr,
            k_act,
            k_foot,
            k_leg,
        })
    }

    /// Block-diagonal compliance blocks in chain order `(1, 6, 6, 6)`.
    pub fn blocks(&self) -> Vec<DMatrix<f64>> {
        vec![
            DMatrix::from_element(1, 1, self.k_ctr),
            self.k_act.to_dmatrix(),
            self.k_foot.to_dmatrix(),
            self.k_leg.to_dmatrix(),
        ]
    }
}

/// Tip compliance of a cantilever beam, frame at the tip with x along the beam.
pub fn beam_compliance(section: &BeamSection) -> Result<ComplianceMatrix6> {
    section.check()?;
    let BeamSection {
        length: l,
        area: a,
        iy,
        iz,
        j,
        young: e,
        shear: g,
    } = *section;
    let mut k = Matrix6::zeros();
    k[(0, 0)] = l / (e * a);
    k[(1, 1)] = l.powi(3) / (3.0 * e * iz);
    k[(2, 2)] = l.powi(3) / (3.0 * e * iy);
    k[(3, 3)] = l / (g * j);
    k[(4, 4)] = l / (e * iy);
    k[(5, 5)] = l / (e * iz);
    k[(2, 4)] = -l * l / (2.0 * e * iy);
    k[(4, 2)] = k[(2, 4)];
    k[(1, 5)] = l * l / (2.0 * e * iz);
    k[(5, 1)] = k[(1, 5)];
    Ok(ComplianceMatrix6(k))
}

/// Compliance at the end of a serial chain of 6-dof springs without passive joints.
///
/// Segment `i` is reached through its placement relative to the previous spring
/// frame (the base for the first one); the result is expressed in the frame of
/// the last spring.
pub fn serial_aggregate(
    segments: &[(HomTransform, ComplianceMatrix6)],
) -> Result<ComplianceMatrix6> {
    if segments.is_empty() {
        return Err(Error::Input(
            "serial aggregation needs at least one segment".into(),
        ));
    }
    // frames[i] = pose of spring i; all springs at zero deflection
    let mut frames = Vec::with_capacity(segments.len());
    let mut pose = HomTransform::identity();
    for (placement, _) in segments {
        pose = pose * *placement;
        frames.push(pose);
    }
    let end = *frames.last().unwrap();
    let end_inv = end.inverse();

    let mut total = Matrix6::zeros();
    for (frame, (_, k)) in frames.iter().zip(segments) {
        // express everything in the end frame so the result is local to the last spring
        let left = end_inv * *frame;
        let right = left.inverse();
        let mut jac = Matrix6::zeros();
        for (col, motion) in SPRING6_ORDER.iter().enumerate() {
            let tw = chain_partial(&left, &motion.generator(), &right)?;
            jac.set_column(col, tw.as_vector());
        }
        total += jac * k.matrix() * jac.transpose();
    }
    validate_compliance(&total)
}

/// Symmetrizes mildly asymmetric input and checks positive semi-definiteness.
pub fn validate_compliance(k: &Matrix6<f64>) -> Result<ComplianceMatrix6> {
    if k.iter().any(|x| !x.is_finite()) {
        return Err(Error::Data(
            "compliance matrix has non-finite entries".into(),
        ));
    }
    let dk = linalg::to_dmatrix6(k);
    let asym = linalg::relative_asymmetry(&dk);
    if asym >= SYMMETRY_TOL {
        return Err(Error::Data(format!(
            "compliance matrix is not symmetric (relative asymmetry {asym:.3e})"
        )));
    }
    let sym = linalg::symmetrize(&dk);
    let norm = sym.norm();
    let min_eig = linalg::sym_eigenvalues(&sym)[0];
    if min_eig < -PSD_TOL * norm {
        return Err(Error::Data(format!(
            "compliance matrix is not positive semi-definite (eigenvalue {min_eig:.3e})"
        )));
    }
    Ok(ComplianceMatrix6(linalg::to_matrix6(&sym)))
}

/// Inverse of a symmetric positive-definite 6×6 matrix.
pub fn invert_spd(m: &Matrix6<f64>) -> Result<Matrix6<f64>> {
    let dm = linalg::to_dmatrix6(m);
    if linalg::relative_asymmetry(&dm) >= SYMMETRY_TOL {
        return Err(Error::numerical("matrix to invert is not symmetric", None));
    }
    let sym = linalg::symmetrize(&dm);
    let min_eig = linalg::sym_eigenvalues(&sym)[0];
    if !(min_eig > SPD_TOL * sym.norm()) {
        return Err(Error::numerical(
            format!("matrix is not positive definite (smallest eigenvalue {min_eig:.3e})"),
            Some(min_eig),
        ));
    }
    let chol = linalg::to_matrix6(&sym)
        .cholesky()
        .ok_or_else(|| Error::numerical("Cholesky factorization failed", Some(min_eig)))?;
    let inv = chol.inverse();
    Ok((inv + inv.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;
    use crate::se3::{elem_transform, Axis, MotionKind};
    use approx::assert_relative_eq;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn section() -> BeamSection {
        BeamSection {
            length: 100.0,
            area: 100.0,
            iy: 833.3,
            iz: 833.3,
            j: 1406.0,
            young: 7e4,
            shear: 2.6e4,
        }
    }

    fn tx(l: f64) -> HomTransform {
        elem_transform(Axis::X, MotionKind::Translation, l).unwrap()
    }

    #[test]
    fn beam_entries_direct_evaluation() {
        let k = beam_compliance(&section()).unwrap();
        let m = k.matrix();
        assert_relative_eq!(m[(0, 0)], 100.0 / (7e4 * 100.0), max_relative = 1e-14);
        assert_relative_eq!(m[(0, 0)], 1.4286e-5, max_relative = 1e-4);
        assert_relative_eq!(m[(1, 5)], 8.571e-5, max_relative = 1e-3);
        assert_relative_eq!(m[(5, 1)], m[(1, 5)]);
        assert!(m[(2, 4)] < 0.0);
        let nonzero = m.iter().filter(|x| **x != 0.0).count();
        assert_eq!(nonzero, 10);
    }

    #[test]
    fn beam_k22_is_cantilever_tip_deflection() {
        // δ = F L³ / (3 E I) for a tip load F
        let s = section();
        let f = 12.5;
        let delta = f * s.length.powi(3) / (3.0 * s.young * s.iz);
        let k = beam_compliance(&s).unwrap();
        assert_relative_eq!(k.matrix()[(1, 1)] * f, delta, max_relative = 1e-14);
    }

    #[test]
    fn beam_vanishes_as_length_shrinks() {
        let k = beam_compliance(&section().with_length(1e-9)).unwrap();
        assert!(k.matrix().amax() < 1e-12);
    }

    #[test]
    fn doubling_area_halves_axial_only() {
        let a = beam_compliance(&section()).unwrap();
        let mut s2 = section();
        s2.area *= 2.0;
        let b = beam_compliance(&s2).unwrap();
        assert_relative_eq!(
            b.matrix()[(0, 0)],
            a.matrix()[(0, 0)] / 2.0,
            max_relative = 1e-15
        );
        assert_eq!(b.matrix()[(1, 1)], a.matrix()[(1, 1)]);
    }

    #[test]
    fn nonpositive_section_rejected() {
        let mut s = section();
        s.iy = 0.0;
        assert!(matches!(beam_compliance(&s), Err(Error::Input(_))));
        s = section();
        s.length = -1.0;
        assert!(beam_compliance(&s).is_err());
    }

    #[test]
    fn beam_matrix_is_spd() {
        let k = beam_compliance(&section()).unwrap();
        let ev = linalg::sym_eigenvalues(&k.to_dmatrix());
        assert!(ev[0] > 0.0);
        assert!(k.stiffness().is_ok());
    }

    #[test]
    fn single_segment_identity_placement() {
        let k = beam_compliance(&section()).unwrap();
        let agg = serial_aggregate(&[(HomTransform::identity(), k)]).unwrap();
        assert_relative_eq!(*agg.matrix(), *k.matrix(), max_relative = 1e-14);
    }

    #[test]
    fn subdivided_beam_is_exact() {
        let whole = beam_compliance(&section()).unwrap();
        for n in [2usize, 3, 4, 5, 10] {
            let l = section().length / n as f64;
            let piece = beam_compliance(&section().with_length(l)).unwrap();
            let segs: Vec<_> = (0..n).map(|_| (tx(l), piece)).collect();
            let agg = serial_aggregate(&segs).unwrap();
            let err = linalg::rel_frobenius6(agg.matrix(), whole.matrix());
            assert!(err < 1e-10, "N = {n}: relative error {err:e}");
        }
    }

    #[test]
    fn empty_aggregate_rejected() {
        assert!(matches!(serial_aggregate(&[]), Err(Error::Input(_))));
    }

    #[test]
    fn stepped_four_beam_foot_shifts_axial_down_and_bending_up() {
        // 120 mm foot: a single uniform beam vs. four stepped sections with the
        // same length, stockier near the tip and slimmer in z near the root
        let (e, g) = (7.0e4, 2.6e4);
        let single = beam_compliance(&BeamSection::rectangular(120.0, 20.0, 16.0, e, g)).unwrap();
        let steps = [(24.0, 11.0), (22.0, 14.0), (22.0, 20.0), (20.0, 26.0)];
        let segs: Vec<_> = steps
            .iter()
            .map(|&(b, h)| {
                let s = BeamSection::rectangular(30.0, b, h, e, g);
                (tx(30.0), beam_compliance(&s).unwrap())
            })
            .collect();
        let four = serial_aggregate(&segs).unwrap();
        assert!(four.matrix()[(0, 0)] < single.matrix()[(0, 0)]);
        assert!(four.matrix()[(2, 2)] > single.matrix()[(2, 2)]);
    }

    #[test]
    fn prototype_matrices_validate() {
        for rows in [&data::FOOT, &data::BAR, &data::AXIS, &data::ACT] {
            ComplianceMatrix6::from_rows(rows).unwrap();
        }
        let foot = ComplianceMatrix6::from_rows(&data::FOOT).unwrap();
        assert_eq!(foot.matrix()[(0, 0)], 2.45e-4);
        assert_eq!(foot.matrix()[(3, 3)], 2.07e-7);
    }

    #[test]
    fn scaled_identity_unchanged() {
        let m = Matrix6::identity() / 1000.0;
        assert_eq!(*validate_compliance(&m).unwrap().matrix(), m);
    }

    #[test]
    fn negative_eigenvalue_rejected() {
        let mut d = DVector::from_element(6, 1.0);
        d[2] = -1e-3;
        let m = Matrix6::from_diagonal(&nalgebra::Vector6::from_iterator(d.iter().copied()));
        assert!(matches!(validate_compliance(&m), Err(Error::Data(_))));
    }

    #[test]
    fn asymmetric_matrix_rejected_but_tiny_asymmetry_accepted() {
        let mut m = Matrix6::identity();
        m[(0, 1)] = 1e-3;
        assert!(matches!(validate_compliance(&m), Err(Error::Data(_))));
        m[(0, 1)] = 1e-9;
        let v = validate_compliance(&m).unwrap();
        assert_eq!(v.matrix()[(0, 1)], v.matrix()[(1, 0)]);
    }

    #[test]
    fn invert_identity_and_diagonal() {
        assert_relative_eq!(
            invert_spd(&Matrix6::identity()).unwrap(),
            Matrix6::identity()
        );
        let two = Matrix6::identity() * 2.0;
        assert_relative_eq!(
            invert_spd(&two).unwrap(),
            Matrix6::identity() * 0.5,
            max_relative = 1e-15
        );
    }

    #[test]
    fn invert_random_spd_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = Matrix6::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let m = a * a.transpose() + Matrix6::identity();
            let inv = invert_spd(&m).unwrap();
            assert!((m * inv - Matrix6::identity()).norm() < 1e-10);
        }
    }

    #[test]
    fn invert_singular_reports_eigenvalue() {
        let mut m = Matrix6::identity();
        m[(4, 4)] = 0.0;
        match invert_spd(&m) {
            Err(Error::Numerical { value: Some(v), .. }) => assert!(v.abs() < 1e-12),
            other => panic!("expected numerical error, got {other:?}"),
        }
    }
}
