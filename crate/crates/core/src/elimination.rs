//! Dialytic elimination of the half-angle tangents.
//!
//! Multiplying rationalized equation `j` by `t₁ᵘ t₂ᵛ` (`u = 0..3`, `v = 0..1`)
//! gives 24 equations that are linear in the 24 power products `t₁ᵖ t₂^q`
//! (`p = 0..5`, `q = 0..3`). Their 24×24 matrix `M(σ)` must be singular at
//! every assembly configuration, and `det M(σ)` is a polynomial of degree 28.
//!
//! The determinant is recovered by evaluation on a circle of complex nodes
//! followed by discrete Fourier inversion.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::compat::RationalizedCoefficients;
use crate::error::{Error, Result};

pub const DIM: usize = 24;

/// Degree of the collapsed resultant.
pub const RESULTANT_DEGREE: usize = 28;

/// Degree bound before collapse (8 quadratic rows, 16 linear rows).
pub const NOMINAL_DEGREE: usize = 32;

pub const NODE_COUNT: usize = 40;

pub const TOL_COLLAPSE: f64 = 1e-8;

/// Allowance for rounding growth in a 24×24 LU determinant.
const ROUNDING_FACTOR: f64 = 100.0;

/// Row of auxiliary equation `t₁ᵘ t₂ᵛ · (equation j)`, all 0-based.
pub fn row_index(j: usize, u: usize, v: usize) -> usize {
    8 * j + 4 * v + u
}

/// Column of power product `t₁ᵖ t₂^q` (0-based; the 1-based index is `6q + p + 1`).
pub fn column_index(p: usize, q: usize) -> usize {
    6 * q + p
}

/// The vector of power products `t₁ᵖ t₂^q` ordered by [`column_index`].
pub fn power_products<T>(t1: T, t2: T) -> Vec<T>
where
    T: Copy + One,
{
    let mut tau = Vec::with_capacity(DIM);
    let mut t2q = T::one();
    for _ in 0..4 {
        let mut term = t2q;
        for _ in 0..6 {
            tau.push(term);
            term = term * t1;
        }
        t2q = t2q * t2;
    }
    tau
}

/// Dense polynomial with real coefficients, lowest power first.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariatePolynomial {
    coeffs: Vec<f64>,
}

impl UnivariatePolynomial {
    /// Trailing zero coefficients are dropped.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    /// Monic polynomial with the given roots (conjugates must be included
    /// for the product to be real; imaginary parts of the expansion are dropped).
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            c = next;
        }
        Self::new(c.into_iter().map(|z| z.re).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// `Σ |h_w| |z|^w`, the natural scale for residuals at `z`.
    pub fn abs_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.abs())
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::new(vec![0.0]);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(w, c)| w as f64 * c)
                .collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Scaled so the largest coefficient has magnitude 1 and the leading one is positive.
    pub fn normalized(&self) -> Self {
        let m = self.max_abs();
        if m == 0.0 {
            return self.clone();
        }
        let s = if self.leading() < 0.0 { -m } else { m };
        Self::new(self.coeffs.iter().map(|c| c / s).collect())
    }

    /// Polynomial in `s = σ²` built from the even coefficients.
    pub fn even_part_in_square(&self) -> Self {
        Self::new(self.coeffs.iter().step_by(2).copied().collect())
    }
}

/// The rationalized system rewritten in `σ̃ = σ / scale`, each equation
/// normalized to unit largest coefficient.
#[derive(Debug, Clone)]
pub struct ScaledSystem {
    f: [[[[f64; 3]; 3]; 3]; 3],
    pub scale: f64,
}

impl ScaledSystem {
    pub fn new(rc: &RationalizedCoefficients, scale: f64) -> Self {
        let mut f = rc.f;
        for eq in f.iter_mut() {
            let mut max = 0.0f64;
            for poly in eq.iter_mut().flatten() {
                for (w, c) in poly.iter_mut().enumerate() {
                    *c *= scale.powi(w as i32);
                    max = max.max(c.abs());
                }
            }
            if max > 0.0 {
                eq.iter_mut().flatten().flatten().for_each(|c| *c /= max);
            }
        }
        Self { f, scale }
    }

    /// Node scaling used by [`det_polynomial`]: half the geometric length scale.
    pub fn for_coefficients(rc: &RationalizedCoefficients) -> Self {
        Self::new(rc, 0.5 * rc.length_scale.max(f64::MIN_POSITIVE))
    }

    /// `M` at scaled argument `σ̃`.
    pub fn matrix_complex(&self, sigma_scaled: Complex64) -> DMatrix<Complex64> {
        fill_matrix(&self.f, |poly| {
            Complex64::new(poly[0], 0.0) + sigma_scaled * (poly[1] + sigma_scaled * poly[2])
        })
    }

    pub fn matrix_real(&self, sigma_scaled: f64) -> DMatrix<f64> {
        fill_matrix(&self.f, |poly| poly[0] + sigma_scaled * (poly[1] + sigma_scaled * poly[2]))
    }

    /// `dM/dσ̃`.
    pub fn matrix_derivative(&self, sigma_scaled: Complex64) -> DMatrix<Complex64> {
        fill_matrix(&self.f, |poly| Complex64::new(poly[1], 0.0) + sigma_scaled * (2.0 * poly[2]))
    }

    pub fn det(&self, sigma_scaled: Complex64) -> Complex64 {
        self.matrix_complex(sigma_scaled).lu().determinant()
    }
}

fn fill_matrix<T, F>(f: &[[[[f64; 3]; 3]; 3]; 3], eval: F) -> DMatrix<T>
where
    T: nalgebra::Scalar + Zero + Copy,
    F: Fn(&[f64; 3]) -> T,
{
    let mut m = DMatrix::from_element(DIM, DIM, T::zero());
    for (j, eq) in f.iter().enumerate() {
        for p in 0..3 {
            for q in 0..3 {
                let value = eval(&eq[p][q]);
                for u in 0..4 {
                    for v in 0..2 {
                        m[(row_index(j, u, v), column_index(p + u, q + v))] = value;
                    }
                }
            }
        }
    }
    m
}

/// Elimination matrix `M(σ)` built directly from the coefficients
/// (no rescaling).
pub fn build_m(rc: &RationalizedCoefficients, sigma: Complex64) -> DMatrix<Complex64> {
    fill_matrix(&rc.f, |poly| {
        Complex64::new(poly[0], 0.0) + sigma * (poly[1] + sigma * poly[2])
    })
}

pub fn build_m_real(rc: &RationalizedCoefficients, sigma: f64) -> DMatrix<f64> {
    fill_matrix(&rc.f, |poly| poly[0] + sigma * (poly[1] + sigma * poly[2]))
}

/// Resultant polynomial together with interpolation diagnostics.
#[derive(Debug, Clone)]
pub struct DetPolynomial {
    /// `Σ h_w σ^w`, degree 28, max |h_w| = 1, `h₂₈ > 0`.
    pub poly: UnivariatePolynomial,
    /// Same polynomial in `σ̃ = σ / scale`, normalized the same way.
    pub scaled: UnivariatePolynomial,
    pub scale: f64,
    /// `|h̃_w| / max |h̃|` for `w = 29..=32`, in the scaled variable.
    pub collapse_ratios: [f64; 4],
    /// Largest relative coefficient beyond the nominal degree (aliasing check).
    pub alias_ratio: f64,
    /// Largest relative imaginary part among the interpolated coefficients.
    pub imag_ratio: f64,
    /// Relative mismatch between the polynomial and `det M` at off-grid nodes.
    pub holdout_error: f64,
    /// Estimated absolute rounding error of each coefficient of `scaled`.
    pub coefficient_errors: Vec<f64>,
}

impl DetPolynomial {
    pub fn max_collapse_ratio(&self) -> f64 {
        self.collapse_ratios.iter().cloned().fold(0.0, f64::max)
    }
}

/// Evaluates `det M` on a circle of `NODE_COUNT` nodes in `σ̃`.
/// Conjugate nodes are filled by symmetry since `M` has real coefficients.
fn node_values(sys: &ScaledSystem, radius: f64) -> Vec<Complex64> {
    let half = NODE_COUNT / 2;
    let eval = |k: usize| {
        let z = Complex64::from_polar(radius, 2.0 * PI * k as f64 / NODE_COUNT as f64);
        let mut d = sys.det(z);
        if k == 0 || k == half {
            d.im = 0.0;
        }
        d
    };
    #[cfg(feature = "parallel")]
    let upper: Vec<Complex64> = {
        use rayon::prelude::*;
        (0..=half).into_par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let upper: Vec<Complex64> = (0..=half).map(eval).collect();

    (0..NODE_COUNT)
        .map(|k| if k <= half { upper[k] } else { upper[NODE_COUNT - k].conj() })
        .collect()
}

/// Radii (in `σ̃`) of the concentric interpolation circles.
pub const NODE_RADII: [f64; 8] = [2.0, 1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625];

/// Discrete Fourier inversion of the node values on one circle: returns the
/// coefficient estimates and, for each, the rounding bound `max|det| / rʷ`.
fn interpolate_circle(sys: &ScaledSystem, radius: f64) -> (Vec<Complex64>, Vec<f64>) {
    let values = node_values(sys, radius);
    let n = NODE_COUNT as f64;
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let mut coeffs = vec![Complex64::new(0.0, 0.0); NODE_COUNT];
    let mut bounds = vec![0.0; NODE_COUNT];
    for w in 0..NODE_COUNT {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, v) in values.iter().enumerate() {
            let angle = -2.0 * PI * ((k * w) % NODE_COUNT) as f64 / n;
            acc += v * Complex64::from_polar(1.0, angle);
        }
        let rw = radius.powi(w as i32);
        coeffs[w] = acc / n / rw;
        bounds[w] = peak / rw;
    }
    (coeffs, bounds)
}

/// Coefficients of `det M(σ)` by evaluation and interpolation, truncated to
/// degree 28 after checking that degrees 29..32 vanish.
///
/// A single circle cannot resolve both ends of the coefficient range, so
/// nodes are placed on several concentric circles and each coefficient is
/// taken from the circle with the smallest rounding bound.
pub fn det_polynomial(rc: &RationalizedCoefficients) -> Result<DetPolynomial> {
    if !rc.is_finite() {
        return Err(Error::Precondition("non-finite rationalized coefficients".into()));
    }
    let sys = ScaledSystem::for_coefficients(rc);

    if is_identically_singular(&sys) {
        return Err(Error::SingularGeometry);
    }

    let circles: Vec<(Vec<Complex64>, Vec<f64>)> =
        NODE_RADII.iter().map(|r| interpolate_circle(&sys, *r)).collect();
    let (raw, bounds): (Vec<Complex64>, Vec<f64>) = (0..NODE_COUNT)
        .map(|w| {
            circles
                .iter()
                .min_by(|a, b| a.1[w].partial_cmp(&b.1[w]).unwrap())
                .map(|c| (c.0[w], c.1[w]))
                .unwrap()
        })
        .unzip();

    let max_re = raw.iter().fold(0.0f64, |m, c| m.max(c.re.abs()));
    if max_re == 0.0 {
        return Err(Error::SingularGeometry);
    }
    let imag_ratio = raw.iter().fold(0.0f64, |m, c| m.max(c.im.abs())) / max_re;
    let mut collapse_ratios = [0.0; 4];
    for (i, w) in (RESULTANT_DEGREE + 1..=NOMINAL_DEGREE).enumerate() {
        collapse_ratios[i] = raw[w].re.abs() / max_re;
    }
    let alias_ratio = raw[NOMINAL_DEGREE + 1..]
        .iter()
        .fold(0.0f64, |m, c| m.max(c.re.abs()))
        / max_re;

    let truncated = UnivariatePolynomial::new(raw[..=RESULTANT_DEGREE].iter().map(|c| c.re).collect());

    let holdout_error = [(1.7, 0.37), (0.6, 1.91), (0.09, 2.83), (0.03, 0.5)]
        .iter()
        .map(|(r, angle): &(f64, f64)| {
            let z = Complex64::from_polar(*r, *angle);
            let direct = sys.det(z);
            (truncated.eval_complex(z) - direct).norm() / truncated.abs_scale(z)
        })
        .fold(0.0, f64::max);

    for (i, ratio) in collapse_ratios.iter().enumerate() {
        if *ratio > TOL_COLLAPSE {
            return Err(Error::CollapseFailure {
                degree: RESULTANT_DEGREE + 1 + i,
                ratio: *ratio,
            });
        }
    }

    let scaled = truncated.normalized();
    let norm = truncated.max_abs();
    let coefficient_errors = bounds[..=RESULTANT_DEGREE]
        .iter()
        .map(|b| ROUNDING_FACTOR * f64::EPSILON * b / norm)
        .collect();
    let scale = sys.scale;
    let poly = UnivariatePolynomial::new(
        scaled
            .coeffs()
            .iter()
            .enumerate()
            .map(|(w, c)| c / scale.powi(w as i32))
            .collect(),
    )
    .normalized();

    Ok(DetPolynomial {
        poly,
        scaled,
        scale,
        collapse_ratios,
        alias_ratio,
        imag_ratio,
        holdout_error,
        coefficient_errors,
    })
}

/// `M` is rank deficient at two generic complex nodes.
fn is_identically_singular(sys: &ScaledSystem) -> bool {
    [Complex64::new(0.613, 0.291), Complex64::new(-1.137, 0.847)]
        .iter()
        .all(|z| {
            let sv = sys.matrix_complex(*z).singular_values();
            let max = sv.max();
            let min = sv.min();
            max == 0.0 || min <= 1e-13 * max
        })
}

/// Newton iteration on `det M(σ)` itself, using
/// `d/dσ log det M = tr(M⁻¹ M')`. Returns the polished root or `None` when
/// the iteration stalls or wanders off by more than `max_move`.
pub fn polish_on_determinant(sys: &ScaledSystem, sigma: Complex64, max_move: f64) -> Option<Complex64> {
    let start = sigma / sys.scale;
    let limit = max_move / sys.scale;
    let mut z = start;
    for _ in 0..20 {
        let m = sys.matrix_complex(z);
        let dm = sys.matrix_derivative(z);
        let lu = m.lu();
        let x = lu.solve(&dm)?;
        let trace: Complex64 = (0..DIM).map(|i| x[(i, i)]).sum();
        if !(trace.re.is_finite() && trace.im.is_finite()) || trace.norm() == 0.0 {
            break;
        }
        let step = Complex64::new(1.0, 0.0) / trace;
        z -= step;
        if (z - start).norm() > limit {
            return None;
        }
        if step.norm() <= 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    Some(z * sys.scale)
}

/// Right singular vector of the smallest singular value of a real matrix,
/// with the two smallest singular values and the largest.
pub fn null_vector_real(m: &DMatrix<f64>) -> (DVector<f64>, f64, f64, f64) {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|a, b| sv[*a].partial_cmp(&sv[*b]).unwrap());
    let min = order[0];
    let row = v_t.row(min).transpose();
    (row, sv[order[0]], sv[order[1]], sv[order[sv.len() - 1]])
}

/// Complex counterpart of [`null_vector_real`].
pub fn null_vector_complex(m: &DMatrix<Complex64>) -> (DVector<Complex64>, f64, f64, f64) {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|a, b| sv[*a].partial_cmp(&sv[*b]).unwrap());
    let min = order[0];
    // Rows of Vᴴ are conjugated right singular vectors.
    let row = v_t.row(min).transpose().map(|c| c.conj());
    (row, sv[order[0]], sv[order[1]], sv[order[sv.len() - 1]])
}
