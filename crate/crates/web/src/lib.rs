//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes and returns JSON text so the page stays free of any
//! generated type bindings beyond plain strings and numbers. The same
//! functions are callable natively, which is how they are tested.

use rrp3ss::geometry::{platform_points, point_q};
use rrp3ss::{
    solve, solve_type2, AssemblyConfiguration, MechanismGeometry, PoseParams, SolveOptions, TriceptType2Geometry,
    Vec3,
};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// General geometry as entered on the page; angles in degrees.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct GeometryInput {
    pub alpha_deg: f64,
    pub beta_deg: f64,
    pub zeta: f64,
    #[serde(rename = "A")]
    pub base_anchors: [[f64; 3]; 3],
    #[serde(rename = "B")]
    pub platform_anchors: [[f64; 3]; 3],
    #[serde(rename = "L")]
    pub leg_lengths: [f64; 3],
}

impl GeometryInput {
    fn to_geometry(&self) -> Result<MechanismGeometry, String> {
        MechanismGeometry::new(
            self.alpha_deg.to_radians(),
            self.beta_deg.to_radians(),
            self.zeta,
            self.base_anchors.map(Vec3::from),
            self.platform_anchors.map(Vec3::from),
            self.leg_lengths,
        )
        .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Point {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Pose {
    pub sigma: f64,
    pub theta1_deg: f64,
    pub theta2_deg: f64,
    /// Base anchors, platform points and `Q`, all in the base frame.
    #[serde(rename = "A")]
    pub base_anchors: [[f64; 3]; 3],
    #[serde(rename = "B")]
    pub platform_points: [[f64; 3]; 3],
    #[serde(rename = "Q")]
    pub q_point: [f64; 3],
    pub residual_max: f64,
}

impl Pose {
    fn new(pose: &PoseParams, geom: &MechanismGeometry) -> Self {
        let pts = platform_points(pose, geom);
        let residual_max = (0..3)
            .map(|j| ((pts[j] - geom.base_anchors[j]).norm() - geom.leg_lengths[j]).abs())
            .fold(0.0, f64::max);
        let q = point_q(pose, geom);
        Self {
            sigma: pose.sigma,
            theta1_deg: pose.theta1.to_degrees(),
            theta2_deg: pose.theta2.to_degrees(),
            base_anchors: geom.base_anchors.map(|a| [a.x, a.y, a.z]),
            platform_points: pts.map(|p| [p.x, p.y, p.z]),
            q_point: [q.x, q.y, q.z],
            residual_max,
        }
    }

    fn from_configuration(c: &AssemblyConfiguration, geom: &MechanismGeometry) -> Self {
        Self {
            residual_max: c.residual_max,
            ..Self::new(&c.pose, geom)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOutput {
    /// Roots of the resultant in σ.
    pub roots: Vec<Point>,
    /// Roots of the folded polynomial in σ², type-II only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_squared: Option<Vec<Point>>,
    pub configurations: Vec<Pose>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LegReport {
    pub distance: f64,
    pub length: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutput {
    pub legs: Vec<LegReport>,
    pub pose: Pose,
}

fn points(values: &[rrp3ss::Complex64]) -> Vec<Point> {
    values.iter().map(|z| Point { re: z.re, im: z.im }).collect()
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

fn parse_geometry(json: &str) -> Result<MechanismGeometry, String> {
    serde_json::from_str::<GeometryInput>(json)
        .map_err(|e| format!("cannot read geometry: {e}"))?
        .to_geometry()
}

pub fn solve_general_json(geometry_json: &str) -> Result<String, String> {
    let geom = parse_geometry(geometry_json)?;
    let set = solve(&geom, &SolveOptions::default()).map_err(|e| e.to_string())?;
    to_json(&SolveOutput {
        roots: points(&set.roots),
        sigma_squared: None,
        configurations: set
            .configurations
            .iter()
            .map(|c| Pose::from_configuration(c, &geom))
            .collect(),
    })
}

pub fn solve_tricept_json(r_base: f64, r_platform: f64, l1: f64, l2: f64, l3: f64) -> Result<String, String> {
    let tg = TriceptType2Geometry::new(r_base, r_platform, [l1, l2, l3]).map_err(|e| e.to_string())?;
    let geom = tg.to_general();
    let set = solve_type2(&tg, &SolveOptions::default()).map_err(|e| e.to_string())?;
    to_json(&SolveOutput {
        roots: points(&set.roots),
        sigma_squared: set.sigma_squared.as_deref().map(points),
        configurations: set
            .configurations
            .iter()
            .map(|c| Pose::from_configuration(c, &geom))
            .collect(),
    })
}

pub fn check_pose_json(geometry_json: &str, theta1_deg: f64, theta2_deg: f64, sigma: f64) -> Result<String, String> {
    let geom = parse_geometry(geometry_json)?;
    let pose = PoseParams::from_degrees(theta1_deg, theta2_deg, sigma);
    if !pose.is_finite() {
        return Err("pose must be finite".into());
    }
    let report = Pose::new(&pose, &geom);
    let legs = (0..3)
        .map(|j| {
            let distance = (Vec3::from(report.platform_points[j]) - geom.base_anchors[j]).norm();
            LegReport {
                distance,
                length: geom.leg_lengths[j],
                residual: distance - geom.leg_lengths[j],
            }
        })
        .collect();
    to_json(&CheckOutput { legs, pose: report })
}

/// All roots and real configurations of a general geometry given as JSON
/// with keys `alpha_deg`, `beta_deg`, `zeta`, `A`, `B`, `L`.
#[wasm_bindgen]
pub fn solve_general(geometry_json: &str) -> Result<String, JsValue> {
    solve_general_json(geometry_json).map_err(|e| JsValue::from_str(&e))
}

/// Type-II Tricept from its two circumradii and leg lengths.
#[wasm_bindgen]
pub fn solve_tricept(r_base: f64, r_platform: f64, l1: f64, l2: f64, l3: f64) -> Result<String, JsValue> {
    solve_tricept_json(r_base, r_platform, l1, l2, l3).map_err(|e| JsValue::from_str(&e))
}

/// Leg lengths and platform position of a general geometry at a given pose.
#[wasm_bindgen]
pub fn check_pose(geometry_json: &str, theta1_deg: f64, theta2_deg: f64, sigma: f64) -> Result<String, JsValue> {
    check_pose_json(geometry_json, theta1_deg, theta2_deg, sigma).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    const EXAMPLE: &str = r#"{"alpha_deg": 80, "beta_deg": 115, "zeta": 1,
        "A": [[-1, 2, -1], [-1, -1, 1], [2, 0, 2]],
        "B": [[-1, 1, 0], [0, -1, 1], [1, -1, 1]],
        "L": [3, 4, 5]}"#;

    #[test]
    fn general_example_round_trip() {
        let out: Value = serde_json::from_str(&solve_general_json(EXAMPLE).unwrap()).unwrap();
        assert_eq!(out["roots"].as_array().unwrap().len(), 28);
        let configs = out["configurations"].as_array().unwrap();
        assert_eq!(configs.len(), 8);
        let sigma = configs[0]["sigma"].as_f64().unwrap();
        assert!((sigma + 5.0742351861635417).abs() < 1e-9);
        assert!(out.get("sigma_squared").is_none());
    }

    #[test]
    fn tricept_example() {
        let out: Value = serde_json::from_str(&solve_tricept_json(4.0, 3.0, 6.0, 7.0, 7.0).unwrap()).unwrap();
        assert_eq!(out["sigma_squared"].as_array().unwrap().len(), 14);
        assert_eq!(out["configurations"].as_array().unwrap().len(), 12);
    }

    #[test]
    fn check_reports_leg_residuals() {
        let out: Value = serde_json::from_str(
            &check_pose_json(EXAMPLE, -42.5300309414956836, -45.9066707230024256, 2.8533551381339947).unwrap(),
        )
        .unwrap();
        for leg in out["legs"].as_array().unwrap() {
            assert!(leg["residual"].as_f64().unwrap().abs() < 1e-9);
        }
        let b1 = &out["pose"]["B"][0];
        assert!((b1[0].as_f64().unwrap() + 2.6914641610939969).abs() < 1e-9);
    }

    #[test]
    fn bad_input_is_an_error() {
        assert!(solve_general_json("{}").is_err());
        assert!(solve_tricept_json(-1.0, 3.0, 6.0, 7.0, 7.0).is_err());
        assert!(check_pose_json(EXAMPLE, f64::NAN, 0.0, 0.0).is_err());
    }
}
