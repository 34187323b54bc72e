//! Full pipeline: coefficients, resultant, roots, back-substitution, and
//! Newton refinement of every real assembly configuration.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::compat::{canonical_system, RationalizedCoefficients};
use crate::elimination::{
    column_index, det_polynomial, null_vector_complex, null_vector_real, polish_on_determinant,
    power_products, DetPolynomial, ScaledSystem,
};
use crate::error::{Error, Result};
use crate::geometry::{
    point_q, pose_rotation, platform_points, wrap_angle, MechanismGeometry, PoseParams, RotationMatrix, Vec3,
};
use crate::polyroots::{all_roots, classify_real, RootSet, DEFAULT_TOL_REAL};

const REFINE_MAX_ITER: usize = 50;

/// Configurations closer than this in σ and both wrapped angles are merged.
pub const DEDUP_RADIUS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// A root is real when `|Im r| ≤ tol_real (1 + |Re r|)`.
    pub tol_real: f64,
    /// Newton-polish every back-substituted configuration.
    pub refine: bool,
    /// Also recover complex `(t₁, t₂)` for the non-real roots.
    pub want_complex: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_real: DEFAULT_TOL_REAL,
            refine: true,
            want_complex: false,
        }
    }
}

/// How a configuration was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Null vector of the elimination matrix at a real root.
    BackSubstitution,
    /// Local Newton search near the root: seeded at a half-angle of π when
    /// the tangent substitution is blind there, or over an angle grid when
    /// several configurations share one σ.
    LocalSearch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssemblyConfiguration {
    /// Angles wrapped into (−π, π].
    pub pose: PoseParams,
    pub t1: f64,
    pub t2: f64,
    pub rotation: RotationMatrix,
    pub q_point: Vec3,
    pub platform_world: [Vec3; 3],
    /// `max_j |‖B_j − A_j‖ − L_j|`.
    pub residual_max: f64,
    pub refined: bool,
    pub refine_iterations: usize,
    pub provenance: Provenance,
}

/// Null direction of `M(σ)` read as half-angle tangents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackSubstitution {
    pub t1: f64,
    pub t2: f64,
    /// Worst relative deviation of the null vector from the power-product
    /// structure `τ_{pq} = t₁ᵖ t₂^q`.
    pub consistency: f64,
    /// `(s₂ − s₁) / s_max` for the two smallest singular values.
    pub null_space_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexTangents {
    pub sigma: Complex64,
    pub t1: Complex64,
    pub t2: Complex64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub collapse_ratios: [f64; 4],
    pub alias_ratio: f64,
    pub imag_ratio: f64,
    pub holdout_error: f64,
    /// One entry per real root: `(σ, null-space gap, consistency)`.
    pub back_substitution: Vec<(f64, f64, f64)>,
    pub refine_iterations: Vec<usize>,
    /// Real roots whose back-substitution or refinement failed, with the reason.
    pub rejected_roots: Vec<(f64, Error)>,
    pub near_multiple_roots: Vec<(usize, usize)>,
    pub used_companion_fallback: bool,
}

#[derive(Debug, Clone)]
pub struct SolutionSet {
    pub geometry: MechanismGeometry,
    /// Every root of the resultant: real ones ascending, then conjugate pairs.
    pub roots: Vec<Complex64>,
    pub real_roots: Vec<f64>,
    pub configurations: Vec<AssemblyConfiguration>,
    pub polynomial: DetPolynomial,
    pub diagnostics: Diagnostics,
    pub complex_tangents: Vec<ComplexTangents>,
    /// Roots in `s = σ²` when the even structure of a type-II instance was used.
    pub sigma_squared: Option<Vec<Complex64>>,
}

/// `(t₁, t₂)` from the null vector of `M(σ)` normalized so that its first
/// component is 1; components 2 and 7 are `t₁` and `t₂`.
pub fn back_substitute(rc: &RationalizedCoefficients, sigma: f64) -> Result<BackSubstitution> {
    let sys = ScaledSystem::for_coefficients(rc);
    back_substitute_scaled(&sys, sigma)
}

pub(crate) fn back_substitute_scaled(sys: &ScaledSystem, sigma: f64) -> Result<BackSubstitution> {
    let m = sys.matrix_real(sigma / sys.scale);
    let (v, s1, s2, s_max) = null_vector_real(&m);
    let gap = if s_max > 0.0 { (s2 - s1) / s_max } else { 0.0 };
    if gap < 1e-6 {
        return Err(Error::AmbiguousNullSpace { sigma });
    }
    if v[0].abs() <= 1e-8 * v.norm() {
        return Err(Error::RootAtInfinity { sigma });
    }
    let lead = v[0];
    let tau = v / lead;
    let t1 = tau[column_index(1, 0)];
    let t2 = tau[column_index(0, 1)];
    let expected = power_products(t1, t2);
    let consistency = tau
        .iter()
        .zip(&expected)
        .map(|(got, want)| (got - want).abs() / (1.0 + want.abs()))
        .fold(0.0, f64::max);
    Ok(BackSubstitution {
        t1,
        t2,
        consistency,
        null_space_gap: gap,
    })
}

fn complex_tangents(sys: &ScaledSystem, sigma: Complex64) -> Option<ComplexTangents> {
    let m = sys.matrix_complex(sigma / sys.scale);
    let (v, _, _, _) = null_vector_complex(&m);
    if v[0].norm() <= 1e-8 * v.norm() {
        return None;
    }
    Some(ComplexTangents {
        sigma,
        t1: v[column_index(1, 0)] / v[0],
        t2: v[column_index(0, 1)] / v[0],
    })
}

fn leg_residual_max(geom: &MechanismGeometry, points: &[Vec3; 3]) -> f64 {
    (0..3)
        .map(|j| ((points[j] - geom.base_anchors[j]).norm() - geom.leg_lengths[j]).abs())
        .fold(0.0, f64::max)
}

fn configuration_at(geom: &MechanismGeometry, pose: PoseParams, provenance: Provenance) -> AssemblyConfiguration {
    let pose = pose.normalized();
    let points = platform_points(&pose, geom);
    AssemblyConfiguration {
        pose,
        t1: (pose.theta1 / 2.0).tan(),
        t2: (pose.theta2 / 2.0).tan(),
        rotation: pose_rotation(&pose, geom),
        q_point: point_q(&pose, geom),
        platform_world: points,
        residual_max: leg_residual_max(geom, &points),
        refined: false,
        refine_iterations: 0,
        provenance,
    }
}

/// Configuration for `σ` and half-angle tangents `t₁`, `t₂`.
pub fn assemble(geom: &MechanismGeometry, sigma: f64, t1: f64, t2: f64) -> AssemblyConfiguration {
    let pose = PoseParams::new(2.0 * t1.atan(), 2.0 * t2.atan(), sigma);
    let mut config = configuration_at(geom, pose, Provenance::BackSubstitution);
    config.t1 = t1;
    config.t2 = t2;
    config
}

/// Plain Newton on the three closure equations. Returns the final pose and
/// the iteration count; fails when the residual grows three times in a row.
fn newton(geom: &MechanismGeometry, start: PoseParams, tol: f64) -> Result<(PoseParams, usize)> {
    let mut pose = start;
    let mut res = leg_residual_max(geom, &platform_points(&pose, geom));
    let mut growth = 0;
    let mut converged_once = false;
    for it in 0..REFINE_MAX_ITER {
        if res <= tol {
            if converged_once {
                return Ok((pose, it));
            }
            converged_once = true;
        }
        let (values, jac) = canonical_system(&pose, geom);
        let rhs = Vector3::from(values);
        let step = match jac.lu().solve(&rhs) {
            Some(s) if s.iter().all(|x| x.is_finite()) => s,
            _ => {
                return if res <= tol {
                    Ok((pose, it))
                } else {
                    Err(Error::RefinementDiverged)
                };
            }
        };
        let next = PoseParams::new(pose.theta1 - step[0], pose.theta2 - step[1], pose.sigma - step[2]);
        let next_res = leg_residual_max(geom, &platform_points(&next, geom));
        if converged_once && next_res > res {
            // Already at the noise floor.
            return Ok((pose, it));
        }
        if next_res > res {
            growth += 1;
            if growth >= 3 {
                return Err(Error::RefinementDiverged);
            }
        } else {
            growth = 0;
        }
        pose = next;
        res = next_res;
        if step.amax() <= 1e-15 * (1.0 + pose.sigma.abs()) && res <= tol {
            return Ok((pose, it + 1));
        }
    }
    if res <= tol {
        Ok((pose, REFINE_MAX_ITER))
    } else {
        Err(Error::RefinementDiverged)
    }
}

fn refine_tolerance(geom: &MechanismGeometry) -> f64 {
    1e-12 * (1.0 + geom.max_leg_length()).powi(2)
}

/// Newton polish of a configuration on the closure equations.
pub fn refine(config: &AssemblyConfiguration, geom: &MechanismGeometry) -> Result<AssemblyConfiguration> {
    let basin = 0.1 * (1.0 + geom.max_leg_length());
    if !(config.residual_max < basin) {
        return Err(Error::Precondition(format!(
            "residual {} outside the refinement basin {}",
            config.residual_max, basin
        )));
    }
    let (pose, iterations) = newton(geom, config.pose, refine_tolerance(geom))?;
    let mut out = configuration_at(geom, pose, config.provenance);
    out.refined = true;
    out.refine_iterations = iterations;
    Ok(out)
}

/// Closure solutions reached by Newton from a list of seeds, kept only when
/// σ stays near the root that triggered the search.
fn local_search(geom: &MechanismGeometry, sigma: f64, seeds: &[PoseParams]) -> Vec<AssemblyConfiguration> {
    let tol = refine_tolerance(geom);
    let mut found = Vec::new();
    for seed in seeds {
        if let Ok((pose, iterations)) = newton(geom, *seed, tol) {
            let mut c = configuration_at(geom, pose, Provenance::LocalSearch);
            c.refined = true;
            c.refine_iterations = iterations;
            if (c.pose.sigma - sigma).abs() <= 1e-4 * (1.0 + sigma.abs()) {
                found.push(c);
            }
        }
    }
    found
}

/// Seeds with `ϑ₁ = π` or `ϑ₂ = π`, where the half-angle tangent is unbounded.
fn half_turn_seeds(sigma: f64) -> Vec<PoseParams> {
    let grid = 12;
    (0..grid)
        .flat_map(|k| {
            let other = -PI + 2.0 * PI * k as f64 / grid as f64;
            [PoseParams::new(PI, other, sigma), PoseParams::new(other, PI, sigma)]
        })
        .collect()
}

/// Full angle grid at fixed σ, for roots shared by several configurations.
fn angle_grid_seeds(sigma: f64) -> Vec<PoseParams> {
    let grid = 12;
    let angle = |k: usize| -PI + 2.0 * PI * (k as f64 + 0.5) / grid as f64;
    (0..grid)
        .flat_map(|i| (0..grid).map(move |k| PoseParams::new(angle(i), angle(k), sigma)))
        .collect()
}

pub(crate) fn same_configuration(a: &AssemblyConfiguration, b: &AssemblyConfiguration, tol: f64) -> bool {
    (a.pose.sigma - b.pose.sigma).abs() <= tol
        && wrap_angle(a.pose.theta1 - b.pose.theta1).abs() <= tol
        && wrap_angle(a.pose.theta2 - b.pose.theta2).abs() <= tol
}

pub(crate) fn sort_configurations(configs: &mut [AssemblyConfiguration]) {
    configs.sort_by(|a, b| {
        a.pose
            .sigma
            .partial_cmp(&b.pose.sigma)
            .unwrap()
            .then(a.pose.theta1.partial_cmp(&b.pose.theta1).unwrap())
            .then(a.pose.theta2.partial_cmp(&b.pose.theta2).unwrap())
    });
}

/// Back-substitutes, assembles and refines every real root.
pub(crate) fn configurations_from_roots(
    geom: &MechanismGeometry,
    sys: &ScaledSystem,
    real_roots: &[f64],
    options: &SolveOptions,
    diagnostics: &mut Diagnostics,
) -> Vec<AssemblyConfiguration> {
    let mut configs: Vec<AssemblyConfiguration> = Vec::new();
    for &sigma in real_roots {
        let attempt = back_substitute_scaled(sys, sigma).and_then(|bs| {
            diagnostics
                .back_substitution
                .push((sigma, bs.null_space_gap, bs.consistency));
            let config = assemble(geom, sigma, bs.t1, bs.t2);
            if options.refine {
                refine(&config, geom)
            } else {
                Ok(config)
            }
        });
        match attempt {
            Ok(c) => {
                diagnostics.refine_iterations.push(c.refine_iterations);
                configs.push(c);
            }
            Err(err) => {
                let seeds = match err {
                    Error::AmbiguousNullSpace { .. } => angle_grid_seeds(sigma),
                    _ => half_turn_seeds(sigma),
                };
                diagnostics.rejected_roots.push((sigma, err));
                configs.extend(local_search(geom, sigma, &seeds));
            }
        }
    }
    let mut unique: Vec<AssemblyConfiguration> = Vec::with_capacity(configs.len());
    for c in configs {
        if !unique.iter().any(|u| same_configuration(u, &c, DEDUP_RADIUS)) {
            unique.push(c);
        }
    }
    sort_configurations(&mut unique);
    unique
}

/// Polishes roots against `det M` directly; each root may move at most a
/// third of the distance to its nearest neighbour.
pub(crate) fn polish_roots(sys: &ScaledSystem, roots: &[Complex64]) -> Vec<Complex64> {
    roots
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let nearest = roots
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, w)| (z - w).norm())
                .fold(f64::INFINITY, f64::min);
            let limit = (nearest / 3.0).min(1e-3 * (1.0 + z.norm()));
            polish_on_determinant(sys, z, limit).unwrap_or(z)
        })
        .collect()
}

/// All assembly configurations of a general-geometry instance.
pub fn solve(geom: &MechanismGeometry, options: &SolveOptions) -> Result<SolutionSet> {
    geom.validate()?;
    let rc = RationalizedCoefficients::from_geometry(geom);
    let det = det_polynomial(&rc)?;
    let sys = ScaledSystem::for_coefficients(&rc);

    // Clustered roots can be poorly determined by the coefficients alone, so
    // every root is polished on det M before real/conjugate classification.
    let found = all_roots(&det.poly)?;
    let raw = RootSet {
        used_fallback: found.used_fallback,
        ..RootSet::from_values(&det.poly, polish_roots(&sys, &found.values()), options.tol_real)
    };
    let first = classify_real(&raw, options.tol_real)?;
    let polished_pairs = first.pairs;

    let mut real_roots: Vec<f64> = first.real;
    real_roots.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut diagnostics = Diagnostics {
        collapse_ratios: det.collapse_ratios,
        alias_ratio: det.alias_ratio,
        imag_ratio: det.imag_ratio,
        holdout_error: det.holdout_error,
        near_multiple_roots: raw.near_multiple.clone(),
        used_companion_fallback: raw.used_fallback,
        ..Default::default()
    };
    let configurations = configurations_from_roots(geom, &sys, &real_roots, options, &mut diagnostics);

    // A refined configuration pins its root more accurately than any
    // polynomial iteration.
    for root in real_roots.iter_mut() {
        if let Some(c) = configurations
            .iter()
            .find(|c| (c.pose.sigma - *root).abs() <= 1e-6 * (1.0 + root.abs()))
        {
            if c.refined {
                *root = c.pose.sigma;
            }
        }
    }

    let mut pairs = polished_pairs;
    pairs.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    let complex_tangents = if options.want_complex {
        pairs.iter().filter_map(|z| complex_tangents(&sys, *z)).collect()
    } else {
        Vec::new()
    };
    let mut roots: Vec<Complex64> = real_roots.iter().map(|r| Complex64::new(*r, 0.0)).collect();
    for z in &pairs {
        roots.push(*z);
        roots.push(z.conj());
    }

    Ok(SolutionSet {
        geometry: geom.clone(),
        roots,
        real_roots,
        configurations,
        polynomial: det,
        diagnostics,
        complex_tangents,
        sigma_squared: None,
    })
}

impl SolutionSet {
    pub fn root_set(&self) -> RootSet {
        RootSet::from_values(&self.polynomial.poly, self.roots.clone(), DEFAULT_TOL_REAL)
    }
}

/// Jacobian of the closure equations, exposed for diagnostics.
pub fn closure_jacobian(geom: &MechanismGeometry, pose: &PoseParams) -> Matrix3<f64> {
    canonical_system(pose, geom).1
}
