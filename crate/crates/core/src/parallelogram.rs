//! Planar parallelogram leg: two bars of length `L` spaced by `d`, hinged at both ends.
//!
//! The stiffness is expressed at the distal end of the parallelogram, in the frame
//! of the bars (x along the bars, y normal to the parallelogram plane, z along the
//! hinge axes when `q = 0`). It has a structural zero row and column for z.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, Matrix3, Matrix4, Matrix5, Matrix6, SMatrix, Vector6};
use serde::{Deserialize, Serialize};

use crate::chain::{jacobians, ChainConfig, ChainElement, ChainSpec};
use crate::compliance::ComplianceMatrix6;
use crate::error::{Error, Result};
use crate::kinetostatics::{
    aggregate_manipulator, cartesian_spring_compliance, chain_stiffness_svd,
};
use crate::linalg;
use crate::se3::{axis_rotation, Axis};

/// Bar coordinates kept after condensation: `Tx, Ty, Rx, Rz`.
const KEPT: [usize; 4] = [0, 1, 3, 5];
/// Structural zero of the parallelogram stiffness (translation along z).
pub const SLACK_INDEX: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParallelogramSpec {
    pub l: f64,
    pub d: f64,
    pub k_bar: ComplianceMatrix6,
}

impl ParallelogramSpec {
    pub fn new(l: f64, d: f64, k_bar: ComplianceMatrix6) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) || !(d.is_finite() && d > 0.0) {
            return Err(Error::Input(format!(
                "parallelogram needs L > 0 and d > 0, got L = {l}, d = {d}"
            )));
        }
        Ok(Self { l, d, k_bar })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParallelogramState {
    pub q: f64,
}

impl ParallelogramState {
    pub fn new(q: f64) -> Result<Self> {
        if !(q.is_finite() && q.abs() < FRAC_PI_2) {
            return Err(Error::Input(format!(
                "parallelogram angle must satisfy |q| < π/2, got {q}"
            )));
        }
        Ok(Self { q })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParallelogramStiffness {
    pub k: Matrix6<f64>,
}

impl ParallelogramStiffness {
    pub fn rank(&self) -> usize {
        linalg::rank6(&self.k, linalg::DEFAULT_SIGMA_TOL)
    }

    /// Largest entry of the z row/column relative to the largest entry.
    pub fn slack_residual(&self) -> f64 {
        let scale = self.k.amax();
        if scale == 0.0 {
            return 0.0;
        }
        let row = self.k.row(SLACK_INDEX).amax();
        let col = self.k.column(SLACK_INDEX).amax();
        row.max(col) / scale
    }
}

/// Jacobians of one parallelogram half, expressed at the end point in base axes.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfJacobians {
    pub j_q: SMatrix<f64, 6, 2>,
    pub j_theta: Matrix6<f64>,
}

/// Closed-form Jacobians of the upper and lower chains.
pub fn parallelogram_jacobians(q: f64, l: f64, d: f64) -> (HalfJacobians, HalfJacobians) {
    let half = |d: f64| {
        let (s, c) = q.sin_cos();
        let h = d / 2.0;
        #[rustfmt::skip]
        let j_q = SMatrix::<f64, 6, 2>::from_row_slice(&[
            -l * s + h, h,
            0.0, 0.0,
            -l * c, 0.0,
            0.0, 0.0,
            1.0, 1.0,
            0.0, 0.0,
        ]);
        #[rustfmt::skip]
        let j_theta = Matrix6::from_row_slice(&[
            c, 0.0, s, 0.0, h, 0.0,
            0.0, 1.0, 0.0, -h * c, 0.0, -h * s,
            -s, 0.0, c, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, c, 0.0, s,
            0.0, 0.0, 0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, -s, 0.0, c,
        ]);
        HalfJacobians { j_q, j_theta }
    };
    (half(d), half(-d))
}

/// Bar stiffness restricted to the directions not released by the hinges, as a 6×6
/// with zero rows/columns for `Tz` and `Ry`.
pub fn condensed_bar_stiffness(k_bar: &ComplianceMatrix6) -> Result<Matrix6<f64>> {
    let c = k_bar.matrix();
    let sub = Matrix4::from_fn(|i, j| c[(KEPT[i], KEPT[j])]);
    let inv = sub.cholesky().map(|ch| ch.inverse()).ok_or_else(|| {
        Error::numerical(
            "bar compliance is singular on its in-plane support",
            Some(linalg::sym_eigenvalues(&DMatrix::from_fn(4, 4, |i, j| sub[(i, j)]))[0]),
        )
    })?;
    let mut k = Matrix6::zeros();
    for i in 0..4 {
        for j in 0..4 {
            k[(KEPT[i], KEPT[j])] = inv[(i, j)];
        }
    }
    Ok(k)
}

/// Closed-form stiffness: both bars contribute the condensed bar stiffness, and a
/// rotation about the bar-frame y-axis stretches one bar and compresses the other.
pub fn parallelogram_stiffness_analytic(
    state: &ParallelogramState,
    spec: &ParallelogramSpec,
) -> Result<ParallelogramStiffness> {
    let k_eff = condensed_bar_stiffness(&spec.k_bar)?;
    let (s, c) = state.q.sin_cos();
    let mut a = Matrix6::zeros();
    for &i in &KEPT {
        a[(i, i)] = 1.0;
    }
    // bar deformation per unit bar-frame rotation, for the upper bar (offset +d/2)
    let mut b = Matrix6::zeros();
    b[(0, 4)] = -c;
    b[(1, 3)] = c;
    b[(1, 5)] = s;
    let half_d2 = spec.d * spec.d / 4.0;
    let k = (a.transpose() * k_eff * a + b.transpose() * k_eff * b * half_d2) * 2.0;
    Ok(ParallelogramStiffness {
        k: (k + k.transpose()) * 0.5,
    })
}

/// Serial model of one parallelogram half (`sign = +1` upper, `−1` lower).
pub fn half_chain(spec: &ParallelogramSpec, sign: f64, axis: bool) -> Result<ChainSpec> {
    let h = sign * spec.d / 2.0;
    // axis stubs run from the parallelogram centre line out to each hinge,
    // local x along the stub, spring frame at the hinge
    let axis_spring = |name: &str| {
        vec![
            ChainElement::rigid_rotation(Axis::Y, sign * FRAC_PI_2),
            ChainElement::spring6(name),
            ChainElement::rigid_rotation(Axis::Y, -sign * FRAC_PI_2),
        ]
    };
    let mut el = vec![ChainElement::rigid_translation(Axis::Z, -h)];
    if axis {
        el.extend(axis_spring("axis_base"));
    }
    el.extend([
        ChainElement::PassiveRotation(Axis::Y),
        ChainElement::rigid_translation(Axis::X, spec.l),
        ChainElement::spring6("bar"),
        ChainElement::PassiveRotation(Axis::Y),
    ]);
    if axis {
        el.extend(axis_spring("axis_end"));
    }
    el.push(ChainElement::rigid_translation(Axis::Z, h));
    ChainSpec::new(el)
}

/// Two-chain assembly of the parallelogram, rotated into the bar frame.
///
/// With `k_axis` the hinge-axis links contribute their own compliance.
pub fn parallelogram_stiffness_numeric(
    state: &ParallelogramState,
    spec: &ParallelogramSpec,
    k_axis: Option<&ComplianceMatrix6>,
) -> Result<ParallelogramStiffness> {
    let q = state.q;
    let mut chains = Vec::with_capacity(2);
    for sign in [1.0, -1.0] {
        let chain = half_chain(spec, sign, k_axis.is_some())?;
        let cfg = ChainConfig::rigid(&chain, 0.0, vec![q, -q]);
        let jac = jacobians(&chain, &cfg)?;
        let mut blocks = Vec::new();
        if let Some(ax) = k_axis {
            blocks.push(ax.to_dmatrix());
        }
        blocks.push(spec.k_bar.to_dmatrix());
        if let Some(ax) = k_axis {
            blocks.push(ax.to_dmatrix());
        }
        let s = cartesian_spring_compliance(&jac, &blocks)?;
        chains.push(chain_stiffness_svd(
            &s,
            &jac.j_q,
            linalg::DEFAULT_SIGMA_TOL,
        )?);
    }
    let sum = aggregate_manipulator(chains)?.k_m;
    let r = axis_rotation(Axis::Y, q);
    let g = block_rotation(&r);
    let k = g.transpose() * sum * g;
    Ok(ParallelogramStiffness {
        k: (k + k.transpose()) * 0.5,
    })
}

fn block_rotation(r: &Matrix3<f64>) -> Matrix6<f64> {
    let mut g = Matrix6::zeros();
    g.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
    g.fixed_view_mut::<3, 3>(3, 3).copy_from(r);
    g
}

/// How the rank-5 parallelogram stiffness is turned into an invertible spring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Regularization {
    /// Drop the z translation and keep a 5-dof spring.
    Reduce5Dof,
    /// Put the stiffness `kappa` (N/mm) at the zero diagonal entry.
    Fictitious { kappa: f64 },
}

impl Default for Regularization {
    fn default() -> Self {
        Regularization::Fictitious { kappa: 1e3 }
    }
}

/// Spring usable inside a chain: compliance over `indices` of the 6 spring coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedSpring {
    pub indices: Vec<usize>,
    pub stiffness: DMatrix<f64>,
    pub compliance: DMatrix<f64>,
}

impl RegularizedSpring {
    /// Stiffness written back into the 6×6 layout, zero outside `indices`.
    pub fn embed(&self) -> Matrix6<f64> {
        let mut k = Matrix6::zeros();
        for (a, &i) in self.indices.iter().enumerate() {
            for (b, &j) in self.indices.iter().enumerate() {
                k[(i, j)] = self.stiffness[(a, b)];
            }
        }
        k
    }
}

pub fn regularize_for_chain_use(
    k: &ParallelogramStiffness,
    mode: Regularization,
) -> Result<RegularizedSpring> {
    if k.slack_residual() > 1e-9 {
        return Err(Error::Input(format!(
            "parallelogram stiffness has no structural zero at z (residual {:.3e})",
            k.slack_residual()
        )));
    }
    match mode {
        Regularization::Reduce5Dof => {
            let indices = vec![0, 1, 3, 4, 5];
            let sub = Matrix5::from_fn(|i, j| k.k[(indices[i], indices[j])]);
            let sub = DMatrix::from_fn(5, 5, |i, j| sub[(i, j)]);
            let compliance = invert_checked(&sub)?;
            Ok(RegularizedSpring {
                indices,
                stiffness: sub,
                compliance,
            })
        }
        Regularization::Fictitious { kappa } => {
            if !(kappa.is_finite() && kappa > 0.0) {
                return Err(Error::Input(format!(
                    "fictitious stiffness must be positive, got {kappa}"
                )));
            }
            let mut full = k.k;
            for i in 0..6 {
                full[(SLACK_INDEX, i)] = 0.0;
                full[(i, SLACK_INDEX)] = 0.0;
            }
            full[(SLACK_INDEX, SLACK_INDEX)] = kappa;
            let stiffness = linalg::to_dmatrix6(&full);
            let compliance = invert_checked(&stiffness)?;
            Ok(RegularizedSpring {
                indices: (0..6).collect(),
                stiffness,
                compliance,
            })
        }
    }
}

fn invert_checked(k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let ev = linalg::sym_eigenvalues(k);
    let lmax = *ev.last().unwrap_or(&0.0);
    if lmax <= 0.0 || ev[0] <= 1e-14 * lmax {
        return Err(Error::numerical(
            "regularized parallelogram stiffness is not positive definite",
            ev.first().copied(),
        ));
    }
    let inv = k
        .clone()
        .cholesky()
        .ok_or_else(|| Error::numerical("Cholesky factorization failed", ev.first().copied()))?
        .inverse();
    Ok(linalg::symmetrize(&inv))
}

/// Twist mapping from bar axes to base axes at parallelogram angle `q`.
pub fn bar_frame_map(q: f64) -> Matrix6<f64> {
    block_rotation(&axis_rotation(Axis::Y, q))
}

/// Unit twist for the structural zero direction in bar axes.
pub fn slack_direction() -> Vector6<f64> {
    let mut v = Vector6::zeros();
    v[SLACK_INDEX] = 1.0;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compliance::{beam_compliance, BeamSection};
    use crate::data;
    use crate::se3::Twist6;
    use approx::assert_abs_diff_eq;

    fn bar() -> ComplianceMatrix6 {
        ComplianceMatrix6::from_rows(&data::BAR).unwrap()
    }

    fn spec(l: f64, d: f64) -> ParallelogramSpec {
        ParallelogramSpec::new(l, d, bar()).unwrap()
    }

    #[test]
    fn jacobian_columns_at_zero() {
        let (up, dn) = parallelogram_jacobians(0.0, 310.0, 80.0);
        let col = up.j_q.column(0).into_owned();
        assert_eq!(col, Vector6::new(40.0, 0.0, -310.0, 0.0, 1.0, 0.0));
        assert_eq!(
            dn.j_q.column(0).into_owned(),
            Vector6::new(-40.0, 0.0, -310.0, 0.0, 1.0, 0.0)
        );
        assert_eq!(up.j_theta[(0, 4)], 40.0);
        assert_eq!(up.j_theta[(1, 3)], -40.0);
        assert_eq!(up.j_theta[(1, 5)], 0.0);
    }

    #[test]
    fn closed_form_jacobians_match_serial_model() {
        let sp = spec(310.0, 80.0);
        for q in [-0.9, -0.3, 0.0, 0.4, 1.1] {
            let (up, dn) = parallelogram_jacobians(q, sp.l, sp.d);
            for (sign, half) in [(1.0, &up), (-1.0, &dn)] {
                let chain = half_chain(&sp, sign, false).unwrap();
                let cfg = ChainConfig::rigid(&chain, 0.0, vec![q, -q]);
                let jac = jacobians(&chain, &cfg).unwrap();
                let jq = DMatrix::from_fn(6, 2, |i, j| half.j_q[(i, j)]);
                let jt = linalg::to_dmatrix6(&half.j_theta);
                assert!((jac.j_q - jq).amax() < 1e-10);
                assert!((jac.j_theta - jt).amax() < 1e-10);
            }
        }
    }

    #[test]
    fn closed_form_jacobians_match_finite_differences() {
        use crate::chain::forward_kinematics;
        let sp = spec(250.0, 60.0);
        let q = 0.35;
        let chain = half_chain(&sp, 1.0, false).unwrap();
        let cfg = ChainConfig::rigid(&chain, 0.0, vec![q, -q]);
        let (up, _) = parallelogram_jacobians(q, sp.l, sp.d);
        let h = 1e-6;
        let fd = |bump: &dyn Fn(&mut ChainConfig, f64)| {
            let mut p = cfg.clone();
            bump(&mut p, h);
            let mut m = cfg.clone();
            bump(&mut m, -h);
            let tp = forward_kinematics(&chain, &p).unwrap();
            let tm = forward_kinematics(&chain, &m).unwrap();
            let dp = (tp.translation() - tm.translation()) / (2.0 * h);
            let w = (tp.rotation() - tm.rotation()) / (2.0 * h);
            Vector6::new(dp.x, dp.y, dp.z, w[(2, 1)], w[(0, 2)], w[(1, 0)])
        };
        for j in 0..2 {
            let col = fd(&|c, e| c.q[j] += e);
            assert_abs_diff_eq!(col, up.j_q.column(j).into_owned(), epsilon = 1e-5);
        }
        for j in 0..6 {
            let col = fd(&|c, e| c.theta[j] += e);
            assert_abs_diff_eq!(col, up.j_theta.column(j).into_owned(), epsilon = 1e-5);
        }
    }

    #[test]
    fn analytic_has_printed_pattern_for_beam_bar() {
        let sp = spec(310.0, 80.0);
        let kb = condensed_bar_stiffness(&sp.k_bar).unwrap();
        for q in [0.0, 0.3, -0.7] {
            let k = parallelogram_stiffness_analytic(&ParallelogramState::new(q).unwrap(), &sp)
                .unwrap()
                .k;
            let (s, c) = f64::sin_cos(q);
            let d2 = sp.d * sp.d;
            let expected = [
                ((0, 0), kb[(0, 0)]),
                ((1, 1), kb[(1, 1)]),
                ((1, 5), kb[(1, 5)]),
                ((3, 3), kb[(3, 3)] + d2 * c * c * kb[(1, 1)] / 4.0),
                ((4, 4), d2 * c * c * kb[(0, 0)] / 4.0),
                ((3, 5), d2 * (2.0 * q).sin() * kb[(1, 1)] / 8.0),
                ((5, 5), kb[(5, 5)] + d2 * s * s * kb[(1, 1)] / 4.0),
            ];
            for ((i, j), v) in expected {
                assert!((k[(i, j)] - 2.0 * v).abs() <= 1e-12 * k.amax(), "({i},{j})");
            }
            assert_eq!(k.row(2).amax(), 0.0);
            assert_eq!(k.column(2).amax(), 0.0);
            assert_eq!(k[(0, 1)], 0.0);
        }
    }

    #[test]
    fn analytic_matches_numeric_assembly() {
        let sp = spec(310.0, 80.0);
        for deg in (-60..=60).step_by(15) {
            let st = ParallelogramState::new((deg as f64).to_radians()).unwrap();
            let a = parallelogram_stiffness_analytic(&st, &sp).unwrap();
            let n = parallelogram_stiffness_numeric(&st, &sp, None).unwrap();
            assert!(linalg::rel_frobenius6(&n.k, &a.k) < 1e-8, "q = {deg}°");
        }
    }

    #[test]
    fn numeric_halves_have_rank_four_and_sum_rank_five() {
        let sp = spec(310.0, 80.0);
        let st = ParallelogramState::new(0.2).unwrap();
        let n = parallelogram_stiffness_numeric(&st, &sp, None).unwrap();
        assert_eq!(n.rank(), 5);
        assert!(n.slack_residual() < 1e-9);
        let chain = half_chain(&sp, 1.0, false).unwrap();
        let cfg = ChainConfig::rigid(&chain, 0.0, vec![0.2, -0.2]);
        let jac = jacobians(&chain, &cfg).unwrap();
        let s = cartesian_spring_compliance(&jac, &[sp.k_bar.to_dmatrix()]).unwrap();
        let k = chain_stiffness_svd(&s, &jac.j_q, 1e-9).unwrap();
        assert_eq!(k.rank, 4);
    }

    #[test]
    fn z_slack_direction_carries_no_force() {
        let sp = spec(310.0, 80.0);
        let st = ParallelogramState::new(0.5).unwrap();
        let k = parallelogram_stiffness_analytic(&st, &sp).unwrap();
        let t = Twist6(slack_direction());
        assert_eq!((k.k * t.as_vector()).norm(), 0.0);
    }

    #[test]
    fn hinge_released_entries_do_not_matter() {
        let sp = spec(310.0, 80.0);
        let st = ParallelogramState::new(0.25).unwrap();
        let base = parallelogram_stiffness_analytic(&st, &sp).unwrap();
        let mut m = *sp.k_bar.matrix();
        m[(2, 2)] *= 10.0;
        m[(4, 4)] *= 10.0;
        let sp2 = ParallelogramSpec::new(sp.l, sp.d, ComplianceMatrix6::new(m).unwrap()).unwrap();
        let other = parallelogram_stiffness_analytic(&st, &sp2).unwrap();
        assert!(linalg::rel_frobenius6(&other.k, &base.k) < 1e-10);
        let numeric = parallelogram_stiffness_numeric(&st, &sp2, None).unwrap();
        assert!(linalg::rel_frobenius6(&numeric.k, &base.k) < 1e-8);
    }

    #[test]
    fn z_rotation_driven_by_axial_stiffness() {
        let sec = BeamSection::rectangular(310.0, 20.0, 8.0, 7.0e4, 2.7e4);
        let stiff = |s: &BeamSection| {
            let sp = ParallelogramSpec::new(310.0, 80.0, beam_compliance(s).unwrap()).unwrap();
            parallelogram_stiffness_analytic(&ParallelogramState::new(0.0).unwrap(), &sp)
                .unwrap()
                .k
        };
        let k1 = stiff(&sec);
        let k2 = stiff(&BeamSection {
            area: sec.area * 2.0,
            ..sec
        });
        assert!((k2[(4, 4)] / k1[(4, 4)] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rotational_gain_over_single_bar() {
        let (b, h, d) = (20.0, 8.0, 80.0);
        let sec = BeamSection::rectangular(310.0, b, h, 7.0e4, 2.7e4);
        let kbar = beam_compliance(&sec).unwrap();
        let sp = ParallelogramSpec::new(310.0, d, kbar).unwrap();
        let k = parallelogram_stiffness_analytic(&ParallelogramState::new(0.0).unwrap(), &sp)
            .unwrap()
            .k;
        let single = kbar.stiffness().unwrap();
        let ratio = k[(4, 4)] / single[(4, 4)];
        let expected = sec.area * d * d / (8.0 * sec.iy);
        assert!((ratio / expected - 1.0).abs() < 1e-10);
        assert!((expected - 1.5 * (d / h).powi(2)).abs() < 1e-10);
    }

    #[test]
    fn vanishing_spacing_leaves_doubled_bar() {
        let sp = spec(310.0, 1e-9);
        let k = parallelogram_stiffness_analytic(&ParallelogramState::new(0.3).unwrap(), &sp)
            .unwrap()
            .k;
        let kb = condensed_bar_stiffness(&sp.k_bar).unwrap() * 2.0;
        assert!(linalg::rel_frobenius6(&k, &kb) < 1e-12);
    }

    #[test]
    fn axis_flexibility_softens() {
        let sp = spec(310.0, 80.0);
        let st = ParallelogramState::new(0.1).unwrap();
        let ax = ComplianceMatrix6::from_rows(&data::AXIS).unwrap();
        let plain = parallelogram_stiffness_numeric(&st, &sp, None).unwrap();
        let ext = parallelogram_stiffness_numeric(&st, &sp, Some(&ax)).unwrap();
        assert_eq!(ext.rank(), 5);
        let kp = linalg::to_dmatrix6(&plain.k);
        let ke = linalg::to_dmatrix6(&ext.k);
        let ev = linalg::sym_eigenvalues(&(kp - ke));
        assert!(ev[0] > -1e-9 * plain.k.amax());
    }

    #[test]
    fn stiff_axes_recover_base_model() {
        let sp = spec(310.0, 80.0);
        let st = ParallelogramState::new(-0.3).unwrap();
        let ax = ComplianceMatrix6::from_rows(&data::AXIS)
            .unwrap()
            .scaled(1e-9);
        let a = parallelogram_stiffness_analytic(&st, &sp).unwrap();
        let n = parallelogram_stiffness_numeric(&st, &sp, Some(&ax)).unwrap();
        assert!(linalg::rel_frobenius6(&n.k, &a.k) < 1e-6);
    }

    #[test]
    fn axial_compliance_adds_stub_terms() {
        // each half: bar plus two stubs loaded along their local z, halves in parallel
        let sp = spec(310.0, 80.0);
        let ax = ComplianceMatrix6::from_rows(&data::AXIS).unwrap();
        let ext =
            parallelogram_stiffness_numeric(&ParallelogramState::new(0.0).unwrap(), &sp, Some(&ax))
                .unwrap();
        let c = regularize_for_chain_use(&ext, Regularization::default())
            .unwrap()
            .compliance;
        let expect = (data::BAR[0][0] + 2.0 * data::AXIS[2][2]) / 2.0;
        assert!(
            (c[(0, 0)] / expect - 1.0).abs() < 1e-9,
            "{} vs {expect}",
            c[(0, 0)]
        );
    }

    #[test]
    fn regularization_modes() {
        let sp = spec(310.0, 80.0);
        let k =
            parallelogram_stiffness_analytic(&ParallelogramState::new(0.2).unwrap(), &sp).unwrap();
        let r5 = regularize_for_chain_use(&k, Regularization::Reduce5Dof).unwrap();
        assert_eq!(r5.compliance.shape(), (5, 5));
        assert_eq!(r5.embed(), k.k);
        let rf = regularize_for_chain_use(&k, Regularization::Fictitious { kappa: 1e3 }).unwrap();
        assert_eq!(rf.stiffness[(2, 2)], 1e3);
        let prod = &rf.compliance * &rf.stiffness;
        assert!((prod - DMatrix::identity(6, 6)).amax() < 1e-9);
        assert!(regularize_for_chain_use(&k, Regularization::Fictitious { kappa: -1.0 }).is_err());
        let full = ParallelogramStiffness {
            k: Matrix6::identity(),
        };
        assert!(regularize_for_chain_use(&full, Regularization::Reduce5Dof).is_err());
    }

    #[test]
    fn invalid_inputs() {
        assert!(ParallelogramSpec::new(0.0, 80.0, bar()).is_err());
        assert!(ParallelogramSpec::new(300.0, -1.0, bar()).is_err());
        assert!(ParallelogramState::new(FRAC_PI_2).is_err());
        assert!(ParallelogramState::new(f64::NAN).is_err());
    }
}
