//! Geometry of one RRP-3(SS) instance and the pose model of its RRP chain.
//!
//! Frame `O_b x_b y_b z_b` is fixed to the base with `x_b` on the first
//! revolute axis. At the home configuration the platform frame is parallel to
//! it with origin at `Q`. A pose is reached by a rotation `ϑ₁` about `n₁`, a
//! rotation `ϑ₂` about `n₂` through `Q`, and a slide `σ` along `m`.

use std::f64::consts::PI;
use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Unit vector along `z_b`.
pub const K: Vec3 = Vector3::new(0.0, 0.0, 1.0);

/// Proper rotation matrix (orthonormal, det = +1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Wraps a matrix without checking orthonormality.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// Largest entry of `RᵀR − I` together with `|det R − 1|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.0.transpose() * self.0 - Matrix3::identity();
        gram.amax().max((self.0.determinant() - 1.0).abs())
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;
    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * rhs.0)
    }
}

impl Mul<Vec3> for RotationMatrix {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        self.0 * rhs
    }
}

/// Fixed parameters of one RRP-3(SS) structure. Lengths share one arbitrary
/// unit, angles are in radians. Leg arrays are indexed 0..3 for legs 1..3.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismGeometry {
    pub alpha: f64,
    pub beta: f64,
    pub zeta: f64,
    pub base_anchors: [Vec3; 3],
    pub platform_anchors: [Vec3; 3],
    pub leg_lengths: [f64; 3],
}

impl MechanismGeometry {
    pub fn new(
        alpha: f64,
        beta: f64,
        zeta: f64,
        base_anchors: [Vec3; 3],
        platform_anchors: [Vec3; 3],
        leg_lengths: [f64; 3],
    ) -> Result<Self> {
        let geom = Self {
            alpha,
            beta,
            zeta,
            base_anchors,
            platform_anchors,
            leg_lengths,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.zeta.is_finite()) {
            return Err(Error::InvalidGeometry("alpha and zeta must be finite".into()));
        }
        if !(self.beta > -PI && self.beta <= PI) {
            return Err(Error::InvalidGeometry(format!(
                "beta = {} outside (-pi, pi]",
                self.beta
            )));
        }
        for (j, l) in self.leg_lengths.iter().enumerate() {
            if !(l.is_finite() && *l > 0.0) {
                return Err(Error::InvalidGeometry(format!(
                    "leg length L{} = {} must be positive",
                    j + 1,
                    l
                )));
            }
        }
        let anchors = self.base_anchors.iter().chain(&self.platform_anchors);
        if anchors.flat_map(|v| v.iter()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidGeometry("anchor coordinates must be finite".into()));
        }
        Ok(())
    }

    /// The general-geometry instance of the first worked example
    /// (α = 80°, β = 115°, ζ = 1, L = 3, 4, 5).
    pub fn example_general() -> Self {
        Self {
            alpha: 80f64.to_radians(),
            beta: 115f64.to_radians(),
            zeta: 1.0,
            base_anchors: [
                Vec3::new(-1.0, 2.0, -1.0),
                Vec3::new(-1.0, -1.0, 1.0),
                Vec3::new(2.0, 0.0, 2.0),
            ],
            platform_anchors: [
                Vec3::new(-1.0, 1.0, 0.0),
                Vec3::new(0.0, -1.0, 1.0),
                Vec3::new(1.0, -1.0, 1.0),
            ],
            leg_lengths: [3.0, 4.0, 5.0],
        }
    }

    pub fn max_leg_length(&self) -> f64 {
        self.leg_lengths.iter().cloned().fold(0.0, f64::max)
    }

    /// Radius that bounds the physically plausible |σ|:
    /// `1 + max L + |ζ| + max ‖a‖ + max ‖b‖`.
    pub fn length_scale(&self) -> f64 {
        let max_norm = |v: &[Vec3; 3]| v.iter().map(|a| a.norm()).fold(0.0, f64::max);
        1.0 + self.max_leg_length()
            + self.zeta.abs()
            + max_norm(&self.base_anchors)
            + max_norm(&self.platform_anchors)
    }

    /// Copy with every length divided by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            alpha: self.alpha,
            beta: self.beta,
            zeta: self.zeta / factor,
            base_anchors: self.base_anchors.map(|a| a / factor),
            platform_anchors: self.platform_anchors.map(|b| b / factor),
            leg_lengths: self.leg_lengths.map(|l| l / factor),
        }
    }

    /// Unit vectors `n₁`, `n₂`, `m`.
    pub fn axis_vectors(&self) -> (Vec3, Vec3, Vec3) {
        axis_vectors(self)
    }
}

/// The three motion unknowns of the RRP chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseParams {
    pub theta1: f64,
    pub theta2: f64,
    pub sigma: f64,
}

impl PoseParams {
    pub fn new(theta1: f64, theta2: f64, sigma: f64) -> Self {
        Self {
            theta1,
            theta2,
            sigma,
        }
    }

    pub fn home() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn from_degrees(theta1_deg: f64, theta2_deg: f64, sigma: f64) -> Self {
        Self::new(theta1_deg.to_radians(), theta2_deg.to_radians(), sigma)
    }

    pub fn is_finite(&self) -> bool {
        self.theta1.is_finite() && self.theta2.is_finite() && self.sigma.is_finite()
    }

    /// Same pose with both angles wrapped into (−π, π].
    pub fn normalized(&self) -> Self {
        Self::new(wrap_angle(self.theta1), wrap_angle(self.theta2), self.sigma)
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

pub fn axis_vectors(geom: &MechanismGeometry) -> (Vec3, Vec3, Vec3) {
    let (sa, ca) = geom.alpha.sin_cos();
    let (sb, cb) = geom.beta.sin_cos();
    let n1 = Vec3::new(1.0, 0.0, 0.0);
    let n2 = Vec3::new(ca, sa, 0.0);
    let m = Vec3::new(ca * cb, sa * cb, sb);
    (n1, n2, m)
}

/// Skew-symmetric cross-product matrix `[n]×`.
pub fn cross_matrix(n: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -n.z, n.y, n.z, 0.0, -n.x, -n.y, n.x, 0.0)
}

/// Rotation by `theta` about unit axis `n`:
/// `R = c I + (1 − c) n nᵀ + s [n]×`.
pub fn rodrigues(n: &Vec3, theta: f64) -> Result<RotationMatrix> {
    if (n.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "rotation axis must be unit length, got norm {}",
            n.norm()
        )));
    }
    Ok(rodrigues_unchecked(n, theta))
}

pub(crate) fn rodrigues_unchecked(n: &Vec3, theta: f64) -> RotationMatrix {
    let (s, c) = theta.sin_cos();
    RotationMatrix(Matrix3::identity() * c + n * n.transpose() * (1.0 - c) + cross_matrix(n) * s)
}

/// `R₁` and `R₂` for a pose.
pub fn partial_rotations(pose: &PoseParams, geom: &MechanismGeometry) -> (RotationMatrix, RotationMatrix) {
    let (n1, n2, _) = axis_vectors(geom);
    (
        rodrigues_unchecked(&n1, pose.theta1),
        rodrigues_unchecked(&n2, pose.theta2),
    )
}

/// Platform orientation `R = R₁ R₂`.
pub fn pose_rotation(pose: &PoseParams, geom: &MechanismGeometry) -> RotationMatrix {
    let (r1, r2) = partial_rotations(pose, geom);
    r1 * r2
}

/// Position of `Q`: `ζ R₁ k + σ R₁ R₂ m`.
pub fn point_q(pose: &PoseParams, geom: &MechanismGeometry) -> Vec3 {
    let (_, _, m) = axis_vectors(geom);
    let (r1, r2) = partial_rotations(pose, geom);
    r1 * K * geom.zeta + (r1 * r2) * m * pose.sigma
}

/// World coordinates of `B₁..B₃`: `ζ R₁ k + R₁ R₂ (σ m + b_j)`.
pub fn platform_points(pose: &PoseParams, geom: &MechanismGeometry) -> [Vec3; 3] {
    let (_, _, m) = axis_vectors(geom);
    let (r1, r2) = partial_rotations(pose, geom);
    let r = r1 * r2;
    let offset = r1 * K * geom.zeta;
    geom.platform_anchors
        .map(|b| offset + r * (m * pose.sigma + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_vec_close(a: &Vec3, b: &Vec3, tol: f64) {
        assert!((a - b).amax() <= tol, "{a:?} vs {b:?}");
    }

    #[test]
    fn axis_vectors_special_angles() {
        let mut g = MechanismGeometry::example_general();
        g.alpha = PI / 2.0;
        g.beta = PI / 2.0;
        let (_, _, m) = g.axis_vectors();
        assert_vec_close(&m, &Vec3::new(0.0, 0.0, 1.0), 1e-15);

        g.alpha = 0.0;
        g.beta = 0.0;
        let (n1, n2, m) = g.axis_vectors();
        assert_eq!(n1, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(n2, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(m, Vec3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn axis_vectors_example_one() {
        let g = MechanismGeometry::example_general();
        let (n1, n2, m) = g.axis_vectors();
        let (a, b) = (80f64.to_radians(), 115f64.to_radians());
        assert_vec_close(
            &m,
            &Vec3::new(a.cos() * b.cos(), a.sin() * b.cos(), b.sin()),
            0.0,
        );
        for v in [n1, n2, m] {
            assert!((v.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rodrigues_zero_angle_is_identity() {
        let n = Vec3::new(1.0, 2.0, 2.0) / 3.0;
        let r = rodrigues(&n, 0.0).unwrap();
        assert_eq!(*r.matrix(), Matrix3::identity());
    }

    #[test]
    fn rodrigues_quarter_turn_about_x() {
        let r = rodrigues(&Vec3::new(1.0, 0.0, 0.0), PI / 2.0).unwrap();
        assert_vec_close(&(r * Vec3::new(0.0, 1.0, 0.0)), &Vec3::new(0.0, 0.0, 1.0), 1e-15);
    }

    #[test]
    fn rodrigues_rejects_non_unit_axis() {
        let err = rodrigues(&Vec3::new(1.0, 1.0, 0.0), 0.3).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn home_pose() {
        let g = MechanismGeometry::example_general();
        let pose = PoseParams::home();
        assert_eq!(*pose_rotation(&pose, &g).matrix(), Matrix3::identity());
        assert_vec_close(&point_q(&pose, &g), &Vec3::new(0.0, 0.0, 1.0), 0.0);

        let slid = PoseParams::new(0.0, 0.0, 2.5);
        let (_, _, m) = g.axis_vectors();
        assert_vec_close(&point_q(&slid, &g), &(Vec3::new(0.0, 0.0, 1.0) + m * 2.5), 1e-15);
    }

    #[test]
    fn theta2_zero_gives_r1() {
        let g = MechanismGeometry::example_general();
        let pose = PoseParams::new(0.7, 0.0, 1.0);
        let r = pose_rotation(&pose, &g);
        let r1 = rodrigues(&Vec3::new(1.0, 0.0, 0.0), 0.7).unwrap();
        assert_eq!(r, r1);
    }

    #[test]
    fn coincident_frames_give_platform_anchors() {
        let mut g = MechanismGeometry::example_general();
        g.zeta = 0.0;
        let pts = platform_points(&PoseParams::home(), &g);
        for (p, b) in pts.iter().zip(&g.platform_anchors) {
            assert_eq!(p, b);
        }
    }

    #[test]
    fn table_two_platform_points() {
        let g = MechanismGeometry::example_general();
        let pose = PoseParams::from_degrees(170.8277016071986500, -12.7989139878393903, 0.4336937265758375);
        let pts = platform_points(&pose, &g);
        assert_vec_close(
            &pts[0],
            &Vec3::new(-1.0892329362024957, -0.9986059923310343, -0.9800103563539957),
            1e-12,
        );

        let pose = PoseParams::from_degrees(35.9079893748161347, 28.9649324307956022, -5.0742351861635417);
        let pts = platform_points(&pose, &g);
        assert_vec_close(
            &pts[0],
            &Vec3::new(-2.6781700217812648, 4.2576192315137761, 0.0425453388192841),
            1e-12,
        );
    }

    #[test]
    fn validation() {
        let mut g = MechanismGeometry::example_general();
        assert!(g.validate().is_ok());
        g.leg_lengths[1] = 0.0;
        assert!(g.validate().is_err());
        let mut g = MechanismGeometry::example_general();
        g.beta = -PI;
        assert!(g.validate().is_err());
        g.beta = PI;
        assert!(g.validate().is_ok());
        g.base_anchors[2].x = f64::NAN;
        assert!(g.validate().is_err());
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(0.25), 0.25);
    }
}
