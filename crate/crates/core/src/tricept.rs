//! Forward kinematics of Tricept manipulators whose in-parallel stage is a
//! type-II UP-3(SS) structure.
//!
//! With `ζ = 0`, `α = β = π/2` and both anchor triangles in the `z = 0`
//! plane, every assembly has a mirror image about that plane obtained by
//! negating `(σ, ϑ₁, ϑ₂)`. The resultant is then even in σ and is solved as a
//! degree-14 polynomial in `s = σ²`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::compat::RationalizedCoefficients;
use crate::elimination::{det_polynomial, ScaledSystem, UnivariatePolynomial};
use crate::error::{Error, Result};
use crate::geometry::{MechanismGeometry, PoseParams, Vec3};
use crate::polyroots::{all_roots, classify_real};
use crate::solver::{
    configurations_from_roots, polish_roots, AssemblyConfiguration, Diagnostics, SolutionSet, SolveOptions,
};

pub const TOL_ODD: f64 = 1e-8;

/// Unit vector `u_i = (cos(i·120° − 150°), sin(i·120° − 150°), 0)` for `i` in 1..=3.
pub fn type2_direction(i: usize) -> Vec3 {
    let angle = (i as f64 * 120.0 - 150.0).to_radians();
    Vec3::new(angle.cos(), angle.sin(), 0.0)
}

/// Equilateral base and platform triangles, the fixed revolute axis parallel
/// to one side of the base triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriceptType2Geometry {
    pub base_circumradius: f64,
    pub platform_circumradius: f64,
    pub leg_lengths: [f64; 3],
}

impl TriceptType2Geometry {
    pub fn new(base_circumradius: f64, platform_circumradius: f64, leg_lengths: [f64; 3]) -> Result<Self> {
        let tg = Self {
            base_circumradius,
            platform_circumradius,
            leg_lengths,
        };
        tg.validate()?;
        Ok(tg)
    }

    /// Second worked example: `r_A = 4`, `r_B = 3`, `L = (6, 7, 7)`.
    pub fn example() -> Self {
        Self {
            base_circumradius: 4.0,
            platform_circumradius: 3.0,
            leg_lengths: [6.0, 7.0, 7.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.base_circumradius) || !positive(self.platform_circumradius) {
            return Err(Error::InvalidGeometry("circumradii must be positive".into()));
        }
        if !self.leg_lengths.iter().all(|l| positive(*l)) {
            return Err(Error::InvalidGeometry("leg lengths must be positive".into()));
        }
        Ok(())
    }

    pub fn to_general(&self) -> MechanismGeometry {
        to_general(self)
    }
}

pub fn to_general(tg: &TriceptType2Geometry) -> MechanismGeometry {
    let u = [type2_direction(1), type2_direction(2), type2_direction(3)];
    MechanismGeometry {
        alpha: FRAC_PI_2,
        beta: FRAC_PI_2,
        zeta: 0.0,
        base_anchors: u.map(|d| d * tg.base_circumradius),
        platform_anchors: u.map(|d| d * tg.platform_circumradius),
        leg_lengths: tg.leg_lengths,
    }
}

/// Type-I arrangement: the fixed revolute axis passes through a vertex of
/// the base triangle. Provided so callers can describe such machines; the
/// elimination here does not solve them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriceptType1Geometry {
    pub base_circumradius: f64,
    pub platform_circumradius: f64,
    pub leg_lengths: [f64; 3],
}

impl TriceptType1Geometry {
    pub fn to_general(&self) -> MechanismGeometry {
        let u: [Vec3; 3] = std::array::from_fn(|i| {
            let angle = (i as f64 * 120.0).to_radians();
            Vec3::new(angle.cos(), angle.sin(), 0.0)
        });
        MechanismGeometry {
            alpha: FRAC_PI_2,
            beta: FRAC_PI_2,
            zeta: 0.0,
            base_anchors: u.map(|d| d * self.base_circumradius),
            platform_anchors: u.map(|d| d * self.platform_circumradius),
            leg_lengths: self.leg_lengths,
        }
    }
}

/// Always fails: type-I structures need a different elimination that
/// exploits their simplified closure equations (24 complex solutions from a
/// degree-12 polynomial in a squared unknown).
pub fn solve_type1(_tg: &TriceptType1Geometry, _options: &SolveOptions) -> Result<SolutionSet> {
    Err(Error::NotSupported(
        "type-I Tricept structures are outside this elimination scheme; use a dedicated type-I solver".into(),
    ))
}

fn is_type2(geom: &MechanismGeometry) -> bool {
    let tol = 1e-12;
    (geom.alpha - FRAC_PI_2).abs() < tol
        && (geom.beta - FRAC_PI_2).abs() < tol
        && geom.zeta.abs() < tol
        && geom
            .base_anchors
            .iter()
            .chain(&geom.platform_anchors)
            .all(|v| v.z.abs() < tol)
}

/// Partner configuration reflected through the base plane: `(σ, ϑ₁, ϑ₂)`
/// all change sign, platform points keep x, y and negate z.
pub fn mirror(config: &AssemblyConfiguration, geom: &MechanismGeometry) -> Result<AssemblyConfiguration> {
    if !is_type2(geom) {
        return Err(Error::Precondition("mirror symmetry needs a type-II geometry".into()));
    }
    let p = config.pose;
    let pose = PoseParams::new(-p.theta1, -p.theta2, -p.sigma);
    let mut partner = crate::solver::assemble(geom, pose.sigma, (pose.theta1 / 2.0).tan(), (pose.theta2 / 2.0).tan());
    partner.pose = pose.normalized();
    partner.refined = config.refined;
    partner.refine_iterations = config.refine_iterations;
    partner.provenance = config.provenance;
    Ok(partner)
}

/// All assembly configurations of a type-II instance through the degree-14
/// polynomial in `σ²`.
pub fn solve_type2(tg: &TriceptType2Geometry, options: &SolveOptions) -> Result<SolutionSet> {
    tg.validate()?;
    let geom = to_general(tg);
    let rc = RationalizedCoefficients::from_geometry(&geom);
    let det = det_polynomial(&rc)?;
    let sys = ScaledSystem::for_coefficients(&rc);

    let max = det.scaled.max_abs();
    for (w, c) in det.scaled.coeffs().iter().enumerate().skip(1).step_by(2) {
        let ratio = c.abs() / max;
        if ratio > TOL_ODD {
            return Err(Error::OddCoefficientLeak { degree: w, ratio });
        }
    }

    // Roots in s̃ = σ̃², mapped back with s = scale² s̃.
    let folded = det.scaled.even_part_in_square();
    let scale2 = sys.scale * sys.scale;
    let s_roots = all_roots(&folded)?;
    let s_values: Vec<Complex64> = s_roots.values().iter().map(|s| s * scale2).collect();

    // Polish through σ = √s on the determinant itself.
    let sigmas: Vec<Complex64> = s_values.iter().map(|s| s.sqrt()).collect();
    let polished: Vec<Complex64> = polish_roots(&sys, &sigmas).iter().map(|z| z * z).collect();
    let s_set = crate::polyroots::RootSet::from_values(
        &UnivariatePolynomial::new(
            folded
                .coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| c / scale2.powi(k as i32))
                .collect(),
        ),
        polished,
        options.tol_real,
    );
    let classified = classify_real(&s_set, options.tol_real)?;

    let zero_tol = 1e-14 * scale2;
    let mut real_sigmas = Vec::new();
    for &s in &classified.real {
        if s.abs() <= zero_tol {
            real_sigmas.push(0.0);
        } else if s > 0.0 {
            let r = s.sqrt();
            real_sigmas.push(-r);
            real_sigmas.push(r);
        }
    }
    real_sigmas.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut diagnostics = Diagnostics {
        collapse_ratios: det.collapse_ratios,
        alias_ratio: det.alias_ratio,
        imag_ratio: det.imag_ratio,
        holdout_error: det.holdout_error,
        near_multiple_roots: s_roots.near_multiple.clone(),
        used_companion_fallback: s_roots.used_fallback,
        ..Default::default()
    };
    let configurations = configurations_from_roots(&geom, &sys, &real_sigmas, options, &mut diagnostics);

    let mut sigma_squared: Vec<Complex64> = classified.real.iter().map(|s| Complex64::new(*s, 0.0)).collect();
    // Refined configurations pin the positive values of σ².
    for s in sigma_squared.iter_mut() {
        if let Some(c) = configurations
            .iter()
            .filter(|c| c.refined && c.pose.sigma > 0.0)
            .find(|c| (c.pose.sigma * c.pose.sigma - s.re).abs() <= 1e-6 * (1.0 + s.re.abs()))
        {
            *s = Complex64::new(c.pose.sigma * c.pose.sigma, 0.0);
        }
    }
    for z in &classified.pairs {
        sigma_squared.push(*z);
        sigma_squared.push(z.conj());
    }

    let mut roots = Vec::with_capacity(28);
    for s in &sigma_squared {
        let r = s.sqrt();
        roots.push(r);
        roots.push(-r);
    }
    let mut real_roots: Vec<f64> = roots
        .iter()
        .filter(|z| crate::polyroots::is_real(**z, options.tol_real))
        .map(|z| z.re)
        .collect();
    real_roots.sort_by(|a, b| a.partial_cmp(b).unwrap());

    Ok(SolutionSet {
        geometry: geom,
        roots,
        real_roots,
        configurations,
        polynomial: det,
        diagnostics,
        complex_tangents: Vec::new(),
        sigma_squared: Some(sigma_squared),
    })
}
