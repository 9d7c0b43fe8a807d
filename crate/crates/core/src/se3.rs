//! Homogeneous transforms, elementary motions and their derivative generators.
//!
//! Every chain in this crate is a product of 4×4 homogeneous matrices. A joint or
//! virtual-spring coordinate always enters through an elementary translation or
//! rotation, so the partial derivative of the full product with respect to that
//! coordinate (at its current value) is `left · G · right`, where `G` is one of six
//! constant generators. [`chain_partial`] turns that derivative into a twist column.
//!
//! Conventions: lengths in mm, angles in rad. Twists are ordered
//! `(δpx, δpy, δpz, δφx, δφy, δφz)`, with the rotation part read from the
//! conventional skew matrix `[φ]×` (so `φz = T'₂₁ = −T'₁₂`).

use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix3, Matrix4, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used for structural checks (skewness, orthonormality).
pub const STRUCTURAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn unit(self) -> Vector3<f64> {
        let mut v = Vector3::zeros();
        v[self.index()] = 1.0;
        v
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotionKind {
    Translation,
    Rotation,
}

/// One elementary motion: a translation along, or rotation about, a coordinate axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ElemMotion {
    pub axis: Axis,
    pub kind: MotionKind,
}

impl ElemMotion {
    pub const fn new(axis: Axis, kind: MotionKind) -> Self {
        Self { axis, kind }
    }
    pub const fn tran(axis: Axis) -> Self {
        Self::new(axis, MotionKind::Translation)
    }
    pub const fn rot(axis: Axis) -> Self {
        Self::new(axis, MotionKind::Rotation)
    }

    /// Position of this motion inside a twist `(p, φ)`.
    pub fn twist_index(self) -> usize {
        match self.kind {
            MotionKind::Translation => self.axis.index(),
            MotionKind::Rotation => 3 + self.axis.index(),
        }
    }

    pub fn transform(self, value: f64) -> Result<HomTransform> {
        elem_transform(self.axis, self.kind, value)
    }

    pub fn generator(self) -> DerivativeGenerator {
        elem_generator(self.axis, self.kind)
    }
}

/// The six spring coordinates in the order `Tx·Ty·Tz·Rx·Ry·Rz`.
pub const SPRING6_ORDER: [ElemMotion; 6] = [
    ElemMotion::tran(Axis::X),
    ElemMotion::tran(Axis::Y),
    ElemMotion::tran(Axis::Z),
    ElemMotion::rot(Axis::X),
    ElemMotion::rot(Axis::Y),
    ElemMotion::rot(Axis::Z),
];

/// Rigid-body pose as a 4×4 homogeneous matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomTransform {
    m: Matrix4<f64>,
}

impl Default for HomTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl HomTransform {
    pub fn identity() -> Self {
        Self {
            m: Matrix4::identity(),
        }
    }

    /// Validates bottom row and rotation block before wrapping `m`.
    pub fn from_matrix(m: Matrix4<f64>) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input(
                "homogeneous matrix has non-finite entries".into(),
            ));
        }
        let bottom = [m[(3, 0)], m[(3, 1)], m[(3, 2)], m[(3, 3)]];
        if bottom != [0.0, 0.0, 0.0, 1.0] {
            return Err(Error::Structural(format!(
                "bottom row must be (0,0,0,1), got {bottom:?}"
            )));
        }
        let r: Matrix3<f64> = m.fixed_view::<3, 3>(0, 0).into_owned();
        let ortho = (r.transpose() * r - Matrix3::identity()).norm();
        if ortho >= 1e-10 {
            return Err(Error::Structural(format!(
                "rotation block is not orthonormal (‖RᵀR − I‖ = {ortho:.3e})"
            )));
        }
        if r.determinant() <= 0.0 {
            return Err(Error::Structural("rotation block has det ≤ 0".into()));
        }
        Ok(Self { m })
    }

    /// Builds a transform from a rotation block and translation; the rotation must be proper.
    pub fn from_parts(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&translation);
        Self::from_matrix(m)
    }

    pub fn translation_xyz(x: f64, y: f64, z: f64) -> Self {
        let mut m = Matrix4::identity();
        m[(0, 3)] = x;
        m[(1, 3)] = y;
        m[(2, 3)] = z;
        Self { m }
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.m
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        self.m.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.m.fixed_view::<3, 1>(0, 3).into_owned()
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation().transpose();
        let t = -(rt * self.translation());
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&rt);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&t);
        Self { m }
    }

    /// Projects the rotation block back onto SO(3) (polar factor via SVD).
    pub fn reorthonormalize(&self) -> Self {
        let r = self.rotation();
        let svd = r.svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut fix = Matrix3::identity();
        if (u * vt).determinant() < 0.0 {
            fix[(2, 2)] = -1.0;
        }
        let mut m = self.m;
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&(u * fix * vt));
        Self { m }
    }

    /// Deviation of the rotation block from orthonormality, `‖RᵀR − I‖_F`.
    pub fn orthonormality_error(&self) -> f64 {
        let r = self.rotation();
        (r.transpose() * r - Matrix3::identity()).norm()
    }
}

impl Mul for HomTransform {
    type Output = HomTransform;
    fn mul(self, rhs: HomTransform) -> HomTransform {
        HomTransform { m: self.m * rhs.m }
    }
}

impl Mul<&HomTransform> for &HomTransform {
    type Output = HomTransform;
    fn mul(self, rhs: &HomTransform) -> HomTransform {
        HomTransform { m: self.m * rhs.m }
    }
}

/// Standard elementary homogeneous transform `T_axis(value)` or `R_axis(value)`.
pub fn elem_transform(axis: Axis, kind: MotionKind, value: f64) -> Result<HomTransform> {
    if !value.is_finite() {
        return Err(Error::Input(format!(
            "elementary {kind:?} along {axis} with non-finite value {value}"
        )));
    }
    Ok(elem_transform_unchecked(axis, kind, value))
}

pub(crate) fn elem_transform_unchecked(axis: Axis, kind: MotionKind, value: f64) -> HomTransform {
    let mut m = Matrix4::identity();
    match kind {
        MotionKind::Translation => m[(axis.index(), 3)] = value,
        MotionKind::Rotation => {
            let (s, c) = value.sin_cos();
            let (i, j) = match axis {
                Axis::X => (1, 2),
                Axis::Y => (2, 0),
                Axis::Z => (0, 1),
            };
            m[(i, i)] = c;
            m[(j, j)] = c;
            m[(i, j)] = -s;
            m[(j, i)] = s;
        }
    }
    HomTransform { m }
}

/// Constant 4×4 derivative of an elementary motion at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeGenerator {
    m: Matrix4<f64>,
    motion: ElemMotion,
}

impl DerivativeGenerator {
    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.m
    }

    pub fn motion(&self) -> ElemMotion {
        self.motion
    }
}

pub fn elem_generator(axis: Axis, kind: MotionKind) -> DerivativeGenerator {
    let mut m = Matrix4::zeros();
    match kind {
        MotionKind::Translation => m[(axis.index(), 3)] = 1.0,
        MotionKind::Rotation => {
            let (i, j) = match axis {
                Axis::X => (1, 2),
                Axis::Y => (2, 0),
                Axis::Z => (0, 1),
            };
            m[(i, j)] = -1.0;
            m[(j, i)] = 1.0;
        }
    }
    DerivativeGenerator {
        m,
        motion: ElemMotion::new(axis, kind),
    }
}

/// End-effector variation `(δp, δφ)`; translation in mm, rotation in rad.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Twist6(pub Vector6<f64>);

impl Twist6 {
    pub fn zero() -> Self {
        Self(Vector6::zeros())
    }

    pub fn new(p: Vector3<f64>, phi: Vector3<f64>) -> Self {
        Self(Vector6::new(p.x, p.y, p.z, phi.x, phi.y, phi.z))
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(0).into_owned()
    }

    pub fn rotation(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(3).into_owned()
    }

    pub fn as_vector(&self) -> &Vector6<f64> {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl From<Vector6<f64>> for Twist6 {
    fn from(v: Vector6<f64>) -> Self {
        Self(v)
    }
}

/// Reads `(p′, φ′)` from a derivative matrix whose 3×3 block is a skew matrix `[φ′]×`.
pub fn twist_from_derivative(t_prime: &Matrix4<f64>) -> Result<Twist6> {
    for c in 0..4 {
        if t_prime[(3, c)].abs() > STRUCTURAL_TOL {
            return Err(Error::Structural(format!(
                "derivative matrix has nonzero bottom row entry {:.3e} at column {}",
                t_prime[(3, c)],
                c + 1
            )));
        }
    }
    let w: Matrix3<f64> = t_prime.fixed_view::<3, 3>(0, 0).into_owned();
    let asym = (w + w.transpose()).abs().max();
    if asym > STRUCTURAL_TOL {
        return Err(Error::Structural(format!(
            "rotation block of derivative is not skew-symmetric (max |W + Wᵀ| = {asym:.3e})"
        )));
    }
    let p = Vector3::new(t_prime[(0, 3)], t_prime[(1, 3)], t_prime[(2, 3)]);
    // average the two skew entries for each component
    let phi = Vector3::new(
        0.5 * (w[(2, 1)] - w[(1, 2)]),
        0.5 * (w[(0, 2)] - w[(2, 0)]),
        0.5 * (w[(1, 0)] - w[(0, 1)]),
    );
    Ok(Twist6::new(p, phi))
}

/// Jacobian column of a coordinate whose generator sits between `left` and `right`.
///
/// The derivative `T′ = left · G · right` has rotation block `Ṙ`; the angular part is
/// taken from `Ṙ·Rᵀ` so it is expressed along the world axes even when the
/// end-effector orientation `R` is not the identity.
pub fn chain_partial(
    left: &HomTransform,
    generator: &DerivativeGenerator,
    right: &HomTransform,
) -> Result<Twist6> {
    let t_prime = left.m * generator.m * right.m;
    let r = (left.m * right.m).fixed_view::<3, 3>(0, 0).into_owned();
    let mut spatial = t_prime;
    let rdot_rt = t_prime.fixed_view::<3, 3>(0, 0) * r.transpose();
    spatial.fixed_view_mut::<3, 3>(0, 0).copy_from(&rdot_rt);
    twist_from_derivative(&spatial)
}

/// Cross-product matrix `[v]×`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Rotation matrix about a coordinate axis.
pub fn axis_rotation(axis: Axis, angle: f64) -> Matrix3<f64> {
    elem_transform_unchecked(axis, MotionKind::Rotation, angle).rotation()
}
