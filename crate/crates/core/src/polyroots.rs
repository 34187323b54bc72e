//! All complex roots of a real polynomial.
//!
//! Aberth–Ehrlich simultaneous iteration, Newton polishing of each root, and
//! companion-matrix eigenvalues as a fallback when the sweep stalls.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::elimination::UnivariatePolynomial;
use crate::error::{Error, Result};

pub const DEFAULT_TOL_REAL: f64 = 1e-7;

/// Residual bound `|p(r)| ≤ RESIDUAL_TOL · Σ|h_w||r|^w` every root must meet.
pub const RESIDUAL_TOL: f64 = 1e-9;

const MAX_SWEEPS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: Complex64,
    /// `|p(r)| / Σ|h_w||r|^w`.
    pub residual: f64,
    pub real: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub roots: Vec<Root>,
    /// Index pairs of roots closer than `1e-6` of their magnitude scale.
    pub near_multiple: Vec<(usize, usize)>,
    /// Set when the companion-matrix fallback produced the roots.
    pub used_fallback: bool,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.roots.iter().map(|r| r.value).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.roots.iter().fold(0.0, |m, r| m.max(r.residual))
    }

    /// Builds a set from already computed values, recomputing residuals
    /// against `poly` and real flags with `tol_real`.
    pub fn from_values(poly: &UnivariatePolynomial, values: Vec<Complex64>, tol_real: f64) -> Self {
        let roots: Vec<Root> = values
            .into_iter()
            .map(|z| Root {
                value: z,
                residual: relative_residual(poly, z),
                real: is_real(z, tol_real),
            })
            .collect();
        let near_multiple = near_multiple_pairs(&roots);
        Self {
            roots,
            near_multiple,
            used_fallback: false,
        }
    }
}

/// Real roots and conjugate pairs (stored by their upper-half member).
#[derive(Debug, Clone, PartialEq)]
pub struct Classified {
    pub real: Vec<f64>,
    pub pairs: Vec<Complex64>,
}

pub fn is_real(z: Complex64, tol_real: f64) -> bool {
    z.im.abs() <= tol_real * (1.0 + z.re.abs())
}

fn relative_residual(poly: &UnivariatePolynomial, z: Complex64) -> f64 {
    let scale = poly.abs_scale(z);
    if scale == 0.0 {
        0.0
    } else {
        poly.eval_complex(z).norm() / scale
    }
}

/// Upper bound on root moduli: `2 max_k |h_{n−k}/h_n|^{1/k}`.
fn root_bound(c: &[f64]) -> f64 {
    let n = c.len() - 1;
    let lead = c[n];
    (1..=n)
        .map(|k| (c[n - k] / lead).abs().powf(1.0 / k as f64))
        .fold(0.0, f64::max)
        * 2.0
}

/// Lower bound on nonzero root moduli from the reversed polynomial.
fn root_lower_bound(c: &[f64]) -> f64 {
    let reversed: Vec<f64> = c.iter().rev().copied().collect();
    1.0 / root_bound(&reversed)
}

fn aberth(poly: &UnivariatePolynomial) -> Option<Vec<Complex64>> {
    let c = poly.coeffs();
    let n = poly.degree();
    let deriv = poly.derivative();
    let outer = root_bound(c);
    let inner = if c[0] != 0.0 { root_lower_bound(c) } else { 0.0 };
    let radius = if inner > 0.0 && inner < outer {
        (inner * outer).sqrt()
    } else {
        outer.max(1.0)
    };
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, angle)
        })
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut converged = true;
        for k in 0..n {
            let pz = poly.eval_complex(z[k]);
            if pz.norm() == 0.0 {
                continue;
            }
            let ratio = pz / deriv.eval_complex(z[k]);
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| Complex64::new(1.0, 0.0) / (z[k] - z[j]))
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !(step.re.is_finite() && step.im.is_finite()) {
                return None;
            }
            z[k] -= step;
            if step.norm() > 1e-15 * (1.0 + z[k].norm()) {
                converged = false;
            }
        }
        if converged {
            return Some(z);
        }
    }
    // Stalled sweeps can still be accurate enough; the residual check decides.
    Some(z)
}

fn companion_roots(poly: &UnivariatePolynomial) -> Vec<Complex64> {
    let c = poly.coeffs();
    let n = poly.degree();
    let lead = poly.leading();
    let mut m = DMatrix::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    m.complex_eigenvalues().iter().copied().collect()
}

/// Newton on the polynomial, accepted only while the residual drops.
fn newton_polish(poly: &UnivariatePolynomial, deriv: &UnivariatePolynomial, mut z: Complex64) -> Complex64 {
    let mut res = poly.eval_complex(z).norm();
    for _ in 0..8 {
        let d = deriv.eval_complex(z);
        if d.norm() == 0.0 || res == 0.0 {
            break;
        }
        let next = z - poly.eval_complex(z) / d;
        let next_res = poly.eval_complex(next).norm();
        if !(next_res < res) {
            break;
        }
        z = next;
        res = next_res;
    }
    z
}

fn near_multiple_pairs(roots: &[Root]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let (a, b) = (roots[i].value, roots[j].value);
            if (a - b).norm() < 1e-6 * (1.0 + a.norm().max(b.norm())) {
                out.push((i, j));
            }
        }
    }
    out
}

/// All `degree` complex roots of `poly`.
pub fn all_roots(poly: &UnivariatePolynomial) -> Result<RootSet> {
    let n = poly.degree();
    if n == 0 || poly.leading() == 0.0 {
        return Err(Error::Precondition("polynomial must have degree at least 1".into()));
    }
    let deriv = poly.derivative();

    let finish = |values: Vec<Complex64>| {
        let polished: Vec<Complex64> = values.into_iter().map(|z| newton_polish(poly, &deriv, z)).collect();
        RootSet::from_values(poly, polished, DEFAULT_TOL_REAL)
    };

    let mut set = match aberth(poly) {
        Some(z) => finish(z),
        None => finish(companion_roots(poly)),
    };
    if set.max_residual() > RESIDUAL_TOL && !set.used_fallback {
        let mut fallback = finish(companion_roots(poly));
        fallback.used_fallback = true;
        if fallback.max_residual() < set.max_residual() {
            set = fallback;
        }
    }
    if set.max_residual() > RESIDUAL_TOL {
        return Err(Error::NonConvergence {
            residual: set.max_residual(),
        });
    }
    Ok(set)
}

/// Splits roots into real values and conjugate pairs.
pub fn classify_real(roots: &RootSet, tol_real: f64) -> Result<Classified> {
    let mut real = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for r in &roots.roots {
        let z = r.value;
        if is_real(z, tol_real) {
            real.push(z.re);
        } else if z.im > 0.0 {
            upper.push(z);
        } else {
            lower.push(z);
        }
    }
    let mut taken = vec![false; lower.len()];
    let mut pairs = Vec::with_capacity(upper.len());
    for z in &upper {
        let best = lower
            .iter()
            .enumerate()
            .filter(|(i, _)| !taken[*i])
            .map(|(i, w)| (i, (z - w.conj()).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        match best {
            Some((i, d)) if d <= 1e-6 * (1.0 + z.norm()) => {
                taken[i] = true;
                pairs.push((z + lower[i].conj()) * 0.5);
            }
            _ => return Err(Error::UnpairedComplexRoot { re: z.re, im: z.im }),
        }
    }
    if let Some(i) = taken.iter().position(|t| !t) {
        return Err(Error::UnpairedComplexRoot {
            re: lower[i].re,
            im: lower[i].im,
        });
    }
    real.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pairs.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    Ok(Classified { real, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn difference_of_squares() {
        let p = UnivariatePolynomial::new(vec![-1.0, 0.0, 1.0]);
        let set = all_roots(&p).unwrap();
        let cls = classify_real(&set, DEFAULT_TOL_REAL).unwrap();
        assert_eq!(cls.real.len(), 2);
        assert!((cls.real[0] + 1.0).abs() < 1e-15);
        assert!((cls.real[1] - 1.0).abs() < 1e-15);
        assert!(cls.pairs.is_empty());
    }

    #[test]
    fn rejects_constant() {
        assert!(all_roots(&UnivariatePolynomial::new(vec![3.0])).is_err());
    }

    /// Match each expected root to its nearest unused computed root.
    fn max_matching_error(expected: &[Complex64], found: &[Complex64]) -> f64 {
        let mut used = vec![false; found.len()];
        let mut worst = 0.0f64;
        for e in expected {
            let (i, d) = found
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .map(|(i, f)| (i, (e - f).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            used[i] = true;
            worst = worst.max(d);
        }
        worst
    }

    #[test]
    fn recovers_planted_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let mut planted = Vec::new();
            for _ in 0..6 {
                planted.push(c(rng.gen_range(-3.0..3.0), 0.0));
            }
            for _ in 0..11 {
                let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(0.1..2.0));
                planted.push(z);
                planted.push(z.conj());
            }
            let p = UnivariatePolynomial::from_roots(&planted);
            assert_eq!(p.degree(), 28);
            let set = all_roots(&p).unwrap();
            assert_eq!(set.len(), 28);
            let err = max_matching_error(&planted, &set.values());
            // Random real roots can sit close together, which amplifies the
            // rounding error of the expanded coefficients.
            assert!(err < 1e-6, "max matching error {err}");
        }
    }

    #[test]
    fn well_separated_planted_roots_to_1e8() {
        let mut planted: Vec<Complex64> = (0..8).map(|k| c(-3.5 + k as f64, 0.0)).collect();
        for k in 0..10 {
            let z = Complex64::from_polar(2.0 + 0.1 * k as f64, 0.3 + 0.25 * k as f64);
            planted.push(z);
            planted.push(z.conj());
        }
        let p = UnivariatePolynomial::from_roots(&planted);
        let set = all_roots(&p).unwrap();
        assert!(max_matching_error(&planted, &set.values()) < 1e-8);
        let cls = classify_real(&set, DEFAULT_TOL_REAL).unwrap();
        assert_eq!(cls.real.len(), 8);
        assert_eq!(cls.pairs.len(), 10);
    }

    #[test]
    fn all_real_roots_have_no_pairs() {
        let planted: Vec<Complex64> = (1..=6).map(|k| c(k as f64, 0.0)).collect();
        let set = all_roots(&UnivariatePolynomial::from_roots(&planted)).unwrap();
        let cls = classify_real(&set, DEFAULT_TOL_REAL).unwrap();
        assert_eq!(cls.real.len(), 6);
        assert!(cls.pairs.is_empty());
    }

    #[test]
    fn unpaired_complex_root_is_an_error() {
        let p = UnivariatePolynomial::new(vec![1.0, 0.0, 1.0]);
        let mut set = all_roots(&p).unwrap();
        set.roots[0].value = c(0.0, 1.0);
        set.roots[1].value = c(0.5, 1.0);
        assert!(matches!(
            classify_real(&set, DEFAULT_TOL_REAL),
            Err(Error::UnpairedComplexRoot { .. })
        ));
    }

    #[test]
    fn double_root_flagged() {
        let planted = [c(1.0, 0.0), c(1.0, 0.0), c(-2.0, 0.0)];
        let set = all_roots(&UnivariatePolynomial::from_roots(&planted)).unwrap();
        assert_eq!(set.len(), 3);
        assert!(!set.near_multiple.is_empty() || set.max_residual() < RESIDUAL_TOL);
    }

    #[test]
    fn companion_fallback_agrees() {
        let planted: Vec<Complex64> = vec![c(0.5, 0.0), c(-1.5, 0.0), c(1.0, 2.0), c(1.0, -2.0)];
        let p = UnivariatePolynomial::from_roots(&planted);
        let roots = companion_roots(&p);
        assert!(max_matching_error(&planted, &roots) < 1e-12);
    }
}
