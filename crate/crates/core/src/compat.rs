//! Leg-length compatibility equations and their polynomial coefficients.
//!
//! With `v_j = σ m + b_j`, closure of leg `j` reads
//!
//! ```text
//! E_j = a_jᵀR₁R₂v_j + ζ a_jᵀR₁k − ζ kᵀR₂v_j − σ mᵀb_j − ½(σ² + a_j² + b_j² + ζ² − L_j²) = 0
//! ```
//!
//! Each `R_i` is `n_i n_iᵀ + s_i [n_i]× + c_i (I − n_i n_iᵀ)`, so `E_j` is
//! bilinear in the bases `{1, s₁, c₁}` and `{1, s₂, c₂}` with σ-polynomial
//! coefficients. The coefficients are extracted here in closed form.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{
    axis_vectors, cross_matrix, partial_rotations, platform_points, MechanismGeometry, PoseParams,
    Vec3, K,
};

/// Index of the `{1, s, c}` basis used for each revolute angle.
pub const ONE: usize = 0;
pub const SIN: usize = 1;
pub const COS: usize = 2;

/// σ-polynomial, lowest power first.
pub type SigmaPoly = [f64; 3];

fn check_leg(j: usize) -> Result<usize> {
    if (1..=3).contains(&j) {
        Ok(j - 1)
    } else {
        Err(Error::LegIndex(j))
    }
}

/// `(B_j − A_j)² − L_j²` for leg `j` in 1..=3.
pub fn residual_squared(pose: &PoseParams, geom: &MechanismGeometry, j: usize) -> Result<f64> {
    let i = check_leg(j)?;
    let b = platform_points(pose, geom)[i];
    Ok((b - geom.base_anchors[i]).norm_squared() - geom.leg_lengths[i].powi(2))
}

/// Left-hand side `E_j` of the expanded closure condition for leg `j` in 1..=3.
/// Equals `−½ residual_squared`.
pub fn residual_canonical(pose: &PoseParams, geom: &MechanismGeometry, j: usize) -> Result<f64> {
    let i = check_leg(j)?;
    Ok(canonical_system(pose, geom).0[i])
}

/// All three `E_j` together with their Jacobian with respect to
/// `(ϑ₁, ϑ₂, σ)`; row `j` holds the gradient of `E_j`.
pub fn canonical_system(pose: &PoseParams, geom: &MechanismGeometry) -> ([f64; 3], Matrix3<f64>) {
    let (n1, n2, m) = axis_vectors(geom);
    let (r1, r2) = partial_rotations(pose, geom);
    let (r1, r2) = (*r1.matrix(), *r2.matrix());
    let d_r1 = rotation_derivative(&n1, pose.theta1);
    let d_r2 = rotation_derivative(&n2, pose.theta2);
    let r = r1 * r2;
    let zeta = geom.zeta;
    let sigma = pose.sigma;

    let mut values = [0.0; 3];
    let mut jac = Matrix3::zeros();
    for i in 0..3 {
        let a = geom.base_anchors[i];
        let b = geom.platform_anchors[i];
        let v = m * sigma + b;
        let constant = a.norm_squared() + b.norm_squared() + zeta * zeta - geom.leg_lengths[i].powi(2);
        values[i] = a.dot(&(r * v)) + zeta * a.dot(&(r1 * K)) - zeta * K.dot(&(r2 * v))
            - sigma * m.dot(&b)
            - 0.5 * (sigma * sigma + constant);
        jac[(i, 0)] = a.dot(&(d_r1 * r2 * v)) + zeta * a.dot(&(d_r1 * K));
        jac[(i, 1)] = a.dot(&(r1 * d_r2 * v)) - zeta * K.dot(&(d_r2 * v));
        jac[(i, 2)] = a.dot(&(r * m)) - zeta * K.dot(&(r2 * m)) - m.dot(&b) - sigma;
    }
    (values, jac)
}

/// `dR/dϑ = −s (I − n nᵀ) + c [n]×`.
fn rotation_derivative(n: &Vec3, theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    (Matrix3::identity() - n * n.transpose()) * (-s) + cross_matrix(n) * c
}

/// Matrices `[n nᵀ, [n]×, I − n nᵀ]` multiplying `1`, `s`, `c` in Rodrigues' formula.
fn rotation_basis(n: &Vec3) -> [Matrix3<f64>; 3] {
    let outer = n * n.transpose();
    [outer, cross_matrix(n), Matrix3::identity() - outer]
}

/// Coefficients of the reduced trigonometric system `{E₁, E₂ − E₁, E₃ − E₁}`.
///
/// `e[j][b1][b2]` is the σ-polynomial multiplying `basis(ϑ₁)[b1] · basis(ϑ₂)[b2]`
/// with basis `{1, sin, cos}` (see [`ONE`], [`SIN`], [`COS`]).
#[derive(Debug, Clone, PartialEq)]
pub struct TrigCoefficients {
    pub e: [[[SigmaPoly; 3]; 3]; 3],
}

impl TrigCoefficients {
    /// Coefficient `e_{jpquv}(σ)` with 1-based `j` and exponents of `s₁, c₁, s₂, c₂`.
    pub fn get(&self, j: usize, p: usize, q: usize, u: usize, v: usize) -> Result<SigmaPoly> {
        let i = check_leg(j)?;
        let basis = |s: usize, c: usize| match (s, c) {
            (0, 0) => Ok(ONE),
            (1, 0) => Ok(SIN),
            (0, 1) => Ok(COS),
            _ => Err(Error::Precondition(format!("no monomial s^{s} c^{c} in the trig basis"))),
        };
        Ok(self.e[i][basis(p, q)?][basis(u, v)?])
    }

    /// Evaluates the reduced residuals at a pose.
    pub fn evaluate(&self, pose: &PoseParams) -> [f64; 3] {
        let (s1, c1) = pose.theta1.sin_cos();
        let (s2, c2) = pose.theta2.sin_cos();
        let basis1 = [1.0, s1, c1];
        let basis2 = [1.0, s2, c2];
        let mut out = [0.0; 3];
        for (j, eq) in self.e.iter().enumerate() {
            for (b1, row) in eq.iter().enumerate() {
                for (b2, poly) in row.iter().enumerate() {
                    out[j] += basis1[b1] * basis2[b2] * eval_sigma(poly, pose.sigma);
                }
            }
        }
        out
    }
}

fn eval_sigma(poly: &SigmaPoly, sigma: f64) -> f64 {
    poly[0] + sigma * (poly[1] + sigma * poly[2])
}

/// Closed-form coefficients of the reduced trigonometric system.
pub fn extract_trig_coefficients(geom: &MechanismGeometry) -> TrigCoefficients {
    let (n1, n2, m) = axis_vectors(geom);
    let basis1 = rotation_basis(&n1);
    let basis2 = rotation_basis(&n2);
    let zeta = geom.zeta;

    let mut raw = [[[[0.0; 3]; 3]; 3]; 3];
    for (i, eq) in raw.iter_mut().enumerate() {
        let a: Vector3<f64> = geom.base_anchors[i];
        let b: Vector3<f64> = geom.platform_anchors[i];
        for b1 in 0..3 {
            for b2 in 0..3 {
                let x = basis1[b1] * basis2[b2];
                eq[b1][b2][0] += a.dot(&(x * b));
                eq[b1][b2][1] += a.dot(&(x * m));
            }
            eq[b1][ONE][0] += zeta * a.dot(&(basis1[b1] * K));
        }
        for b2 in 0..3 {
            eq[ONE][b2][0] -= zeta * K.dot(&(basis2[b2] * b));
            eq[ONE][b2][1] -= zeta * K.dot(&(basis2[b2] * m));
        }
        let constant = a.norm_squared() + b.norm_squared() + zeta * zeta - geom.leg_lengths[i].powi(2);
        eq[ONE][ONE][0] -= 0.5 * constant;
        eq[ONE][ONE][1] -= m.dot(&b);
        eq[ONE][ONE][2] -= 0.5;
    }

    let mut e = raw;
    for j in 1..3 {
        for b1 in 0..3 {
            for b2 in 0..3 {
                for w in 0..3 {
                    e[j][b1][b2][w] = raw[j][b1][b2][w] - raw[0][b1][b2][w];
                }
            }
        }
    }
    TrigCoefficients { e }
}

/// Coefficients `f_{jpq}(σ)` of the rationalized system
/// `Σ f_{jpq}(σ) t₁ᵖ t₂^q = 0`, `p, q ∈ {0, 1, 2}`, `t_i = tan(ϑ_i/2)`.
///
/// `f[j][p][q]` has σ-degree 2 for `j = 0` and 1 otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalizedCoefficients {
    pub f: [[[SigmaPoly; 3]; 3]; 3],
    /// Magnitude bound for plausible |σ|, used to place interpolation nodes.
    pub length_scale: f64,
}

/// Half-angle images of `{1, s, c}` after multiplication by `1 + t²`,
/// as polynomials in `t` (lowest power first).
const HALF_ANGLE: [[f64; 3]; 3] = [[1.0, 0.0, 1.0], [0.0, 2.0, 0.0], [1.0, 0.0, -1.0]];

/// Substitutes `s = 2t/(1+t²)`, `c = (1−t²)/(1+t²)` and clears denominators.
pub fn rationalize(tc: &TrigCoefficients, length_scale: f64) -> RationalizedCoefficients {
    let mut f = [[[[0.0; 3]; 3]; 3]; 3];
    for (j, eq) in tc.e.iter().enumerate() {
        for (b1, row) in eq.iter().enumerate() {
            for (b2, poly) in row.iter().enumerate() {
                for p in 0..3 {
                    for q in 0..3 {
                        let g = HALF_ANGLE[b1][p] * HALF_ANGLE[b2][q];
                        if g != 0.0 {
                            for w in 0..3 {
                                f[j][p][q][w] += g * poly[w];
                            }
                        }
                    }
                }
            }
        }
    }
    RationalizedCoefficients { f, length_scale }
}

impl RationalizedCoefficients {
    pub fn from_geometry(geom: &MechanismGeometry) -> Self {
        rationalize(&extract_trig_coefficients(geom), geom.length_scale())
    }

    /// Left-hand side of rationalized equation `j` (0-based).
    pub fn evaluate(&self, j: usize, t1: f64, t2: f64, sigma: f64) -> f64 {
        let mut acc = 0.0;
        for p in 0..3 {
            for q in 0..3 {
                acc += eval_sigma(&self.f[j][p][q], sigma) * t1.powi(p as i32) * t2.powi(q as i32);
            }
        }
        acc
    }

    /// Every coefficient multiplied by `c`.
    pub fn scaled_by(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.f.iter_mut().flatten().flatten().flatten().for_each(|x| *x *= c);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.f.iter().flatten().flatten().flatten().all(|x| x.is_finite())
    }
}
