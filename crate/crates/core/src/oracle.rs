//! Brute-force real solutions by multistart damped Newton on the closure
//! equations. Shares nothing with the elimination path beyond the closure
//! equations themselves, so it serves as an independent cross-check.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::compat::canonical_system;
use crate::geometry::{wrap_angle, MechanismGeometry, PoseParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleGrid {
    pub theta1_samples: usize,
    pub theta2_samples: usize,
    pub sigma_samples: usize,
    /// σ seeds are spread uniformly over `[−sigma_range, sigma_range]`.
    pub sigma_range: f64,
    pub max_iterations: usize,
    pub dedup_radius: f64,
}

impl OracleGrid {
    /// 24 × 24 angle seeds and 21 σ seeds over the geometric length scale.
    pub fn for_geometry(geom: &MechanismGeometry) -> Self {
        Self {
            theta1_samples: 24,
            theta2_samples: 24,
            sigma_samples: 21,
            sigma_range: geom.length_scale(),
            max_iterations: 60,
            dedup_radius: 1e-6,
        }
    }

    pub fn with_samples(mut self, theta1: usize, theta2: usize, sigma: usize) -> Self {
        self.theta1_samples = theta1;
        self.theta2_samples = theta2;
        self.sigma_samples = sigma;
        self
    }

    fn valid(&self) -> bool {
        self.theta1_samples >= 2 && self.theta2_samples >= 2 && self.sigma_samples >= 2 && self.sigma_range > 0.0
    }

    fn seeds(&self) -> Vec<PoseParams> {
        let mut out = Vec::with_capacity(self.theta1_samples * self.theta2_samples * self.sigma_samples);
        for i in 0..self.theta1_samples {
            let t1 = -PI + 2.0 * PI * i as f64 / self.theta1_samples as f64;
            for k in 0..self.theta2_samples {
                let t2 = -PI + 2.0 * PI * k as f64 / self.theta2_samples as f64;
                for l in 0..self.sigma_samples {
                    let s = -self.sigma_range + 2.0 * self.sigma_range * l as f64 / (self.sigma_samples - 1) as f64;
                    out.push(PoseParams::new(t1, t2, s));
                }
            }
        }
        out
    }
}

fn residual_norm(values: &[f64; 3]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Damped Newton from one seed; `None` when the seed does not converge.
fn damped_newton(geom: &MechanismGeometry, seed: PoseParams, max_iterations: usize, tol: f64) -> Option<PoseParams> {
    let mut pose = seed;
    let (mut values, mut jac) = canonical_system(&pose, geom);
    let mut norm = residual_norm(&values);
    for _ in 0..max_iterations {
        if values.iter().all(|v| v.abs() <= tol) {
            // Two more full steps settle the last digits.
            for _ in 0..2 {
                let step = jac.lu().solve(&Vector3::from(values))?;
                let next = PoseParams::new(pose.theta1 - step[0], pose.theta2 - step[1], pose.sigma - step[2]);
                let (v, j) = canonical_system(&next, geom);
                if residual_norm(&v) > norm {
                    break;
                }
                pose = next;
                values = v;
                jac = j;
                norm = residual_norm(&values);
            }
            return Some(pose);
        }
        let step = jac.lu().solve(&Vector3::from(values))?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=20 {
            let next = PoseParams::new(
                pose.theta1 - lambda * step[0],
                pose.theta2 - lambda * step[1],
                pose.sigma - lambda * step[2],
            );
            let (v, j) = canonical_system(&next, geom);
            let n = residual_norm(&v);
            if n < norm {
                pose = next;
                values = v;
                jac = j;
                norm = n;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted || !pose.is_finite() || pose.sigma.abs() > 1e3 * (1.0 + geom.length_scale()) {
            return None;
        }
    }
    None
}

fn distance(a: &PoseParams, b: &PoseParams) -> f64 {
    wrap_angle(a.theta1 - b.theta1)
        .abs()
        .max(wrap_angle(a.theta2 - b.theta2).abs())
        .max((a.sigma - b.sigma).abs())
}

/// Distinct real solutions found from every grid seed, sorted by σ, angles
/// wrapped into (−π, π].
pub fn multistart(geom: &MechanismGeometry, grid: &OracleGrid) -> Vec<PoseParams> {
    if !grid.valid() {
        return Vec::new();
    }
    let tol = 1e-11 * (1.0 + geom.max_leg_length()).powi(2);
    let seeds = grid.seeds();
    let run = |seed: &PoseParams| damped_newton(geom, *seed, grid.max_iterations, tol);

    #[cfg(feature = "parallel")]
    let converged: Vec<PoseParams> = {
        use rayon::prelude::*;
        seeds.par_iter().filter_map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let converged: Vec<PoseParams> = seeds.iter().filter_map(run).collect();

    let mut unique: Vec<PoseParams> = Vec::new();
    for p in converged {
        let p = p.normalized();
        if !unique.iter().any(|u| distance(u, &p) <= grid.dedup_radius) {
            unique.push(p);
        }
    }
    unique.sort_by(|a, b| {
        a.sigma
            .partial_cmp(&b.sigma)
            .unwrap()
            .then(a.theta1.partial_cmp(&b.theta1).unwrap())
    });
    unique
}
