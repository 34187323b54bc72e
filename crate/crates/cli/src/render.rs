//! Report types and their table, JSON and CSV renderings.

use rrp3ss::geometry::platform_points;
use rrp3ss::solver::Provenance;
use rrp3ss::tricept::mirror;
use rrp3ss::{AssemblyConfiguration, Complex64, MechanismGeometry, PoseParams, SolutionSet};
use serde::{Deserialize, Serialize};

/// Fixed-point text with 16 significant digits; zero prints as `0.` and
/// magnitudes below 1e-5 switch to exponent form.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0.".into();
    }
    // The exponent of the rounded scientific form already accounts for a
    // carry into a new leading digit.
    let sci = format!("{x:.15e}");
    let mag: i32 = sci.split('e').nth(1).and_then(|e| e.parse().ok()).unwrap_or(0);
    if mag < -5 {
        return sci;
    }
    let decimals = (15 - mag).max(0) as usize;
    if decimals == 0 {
        return format!("{x:.0}.");
    }
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationRecord {
    pub sigma: f64,
    pub theta1_deg: f64,
    pub theta2_deg: f64,
    /// Platform points in the base frame, one `[x, y, z]` per leg.
    #[serde(rename = "B")]
    pub platform_points: [[f64; 3]; 3],
    pub residual_max: f64,
    pub provenance: String,
}

impl ConfigurationRecord {
    pub fn from_configuration(c: &AssemblyConfiguration) -> Self {
        let provenance = match c.provenance {
            Provenance::BackSubstitution => "back-substitution",
            Provenance::LocalSearch => "local-search",
        };
        Self {
            sigma: c.pose.sigma,
            theta1_deg: c.pose.theta1.to_degrees(),
            theta2_deg: c.pose.theta2.to_degrees(),
            platform_points: c.platform_world.map(|p| [p.x, p.y, p.z]),
            residual_max: c.residual_max,
            provenance: provenance.into(),
        }
    }

    pub fn from_pose(pose: &PoseParams, geom: &MechanismGeometry) -> Self {
        let pts = platform_points(pose, geom);
        let residual_max = (0..3)
            .map(|j| ((pts[j] - geom.base_anchors[j]).norm() - geom.leg_lengths[j]).abs())
            .fold(0.0, f64::max);
        Self {
            sigma: pose.sigma,
            theta1_deg: pose.theta1.to_degrees(),
            theta2_deg: pose.theta2.to_degrees(),
            platform_points: pts.map(|p| [p.x, p.y, p.z]),
            residual_max,
            provenance: "oracle".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub roots: Vec<ComplexValue>,
    pub configurations: Vec<ConfigurationRecord>,
}

impl SolveReport {
    pub fn new(set: &SolutionSet, real_only: bool) -> Self {
        Self {
            roots: set
                .roots
                .iter()
                .filter(|z| !real_only || z.im == 0.0)
                .map(|&z| z.into())
                .collect(),
            configurations: set.configurations.iter().map(ConfigurationRecord::from_configuration).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriceptReport {
    pub sigma_squared: Vec<ComplexValue>,
    pub configurations: Vec<ConfigurationRecord>,
    /// Index pairs `(upper, lower)` of mirror-image configurations.
    pub mirror_pairs: Vec<(usize, usize)>,
}

impl TriceptReport {
    pub fn new(set: &SolutionSet, real_only: bool) -> Self {
        let values = set.sigma_squared.clone().unwrap_or_default();
        Self {
            sigma_squared: values
                .into_iter()
                .filter(|z| !real_only || z.im == 0.0)
                .map(Into::into)
                .collect(),
            configurations: set.configurations.iter().map(ConfigurationRecord::from_configuration).collect(),
            mirror_pairs: mirror_pairs(&set.configurations, &set.geometry),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub configurations: Vec<ConfigurationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegCheck {
    pub leg: usize,
    pub distance: f64,
    pub length: f64,
    /// `‖B − A‖ − L`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub legs: Vec<LegCheck>,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(pose: &PoseParams, geom: &MechanismGeometry, tolerance: f64) -> Self {
        let pts = platform_points(pose, geom);
        let legs: Vec<LegCheck> = (0..3)
            .map(|j| {
                let distance = (pts[j] - geom.base_anchors[j]).norm();
                LegCheck {
                    leg: j + 1,
                    distance,
                    length: geom.leg_lengths[j],
                    residual: distance - geom.leg_lengths[j],
                }
            })
            .collect();
        let pass = legs.iter().all(|l| l.residual.abs() <= tolerance);
        Self { legs, tolerance, pass }
    }
}

/// Pairs each configuration with its mirror image. The member with positive
/// σ (or, at σ = 0, the first positive angle) comes first.
fn mirror_pairs(configs: &[AssemblyConfiguration], geom: &MechanismGeometry) -> Vec<(usize, usize)> {
    let close = |a: &PoseParams, b: &PoseParams| {
        let d = |x: f64, y: f64| rrp3ss::geometry::wrap_angle(x - y).abs();
        (a.sigma - b.sigma).abs() <= 1e-6 && d(a.theta1, b.theta1) <= 1e-6 && d(a.theta2, b.theta2) <= 1e-6
    };
    let upper_first = |p: &PoseParams| {
        for v in [p.sigma, p.theta1, p.theta2] {
            if v != 0.0 {
                return v > 0.0;
            }
        }
        true
    };
    let mut used = vec![false; configs.len()];
    let mut pairs = Vec::new();
    for i in 0..configs.len() {
        if used[i] {
            continue;
        }
        let Ok(m) = mirror(&configs[i], geom) else {
            continue;
        };
        let partner = (0..configs.len()).find(|&k| k != i && !used[k] && close(&configs[k].pose, &m.pose));
        if let Some(k) = partner {
            used[i] = true;
            used[k] = true;
            pairs.push(if upper_first(&configs[i].pose) { (i, k) } else { (k, i) });
        }
    }
    pairs.sort_by(|a, b| configs[a.0].pose.sigma.total_cmp(&configs[b.0].pose.sigma));
    pairs
}

fn complex_lines(out: &mut String, values: &[ComplexValue]) {
    let mut k = 0;
    while k < values.len() {
        let z = values[k];
        let paired = z.im != 0.0
            && values
                .get(k + 1)
                .is_some_and(|w| w.re == z.re && w.im == -z.im);
        if paired {
            out.push_str(&format!("{}-{}\t({}, ± {})\n", k + 1, k + 2, num(z.re), num(z.im.abs())));
            k += 2;
        } else {
            out.push_str(&format!("{}\t({}, {})\n", k + 1, num(z.re), num(z.im)));
            k += 1;
        }
    }
}

fn configuration_lines(out: &mut String, label: &str, c: &ConfigurationRecord) {
    out.push_str(&format!(
        "{label}\t(σ, ϑ1, ϑ2)\t({}, {}°, {}°)\n",
        num(c.sigma),
        num(c.theta1_deg),
        num(c.theta2_deg)
    ));
    for (i, p) in c.platform_points.iter().enumerate() {
        out.push_str(&format!("\tB{}\t({}, {}, {})\n", i + 1, num(p[0]), num(p[1]), num(p[2])));
    }
}

/// `± |v|` when the upper member carries `v ≥ 0`, `∓ |v|` otherwise.
fn signed(v: f64) -> String {
    let sign = if v >= 0.0 { "±" } else { "∓" };
    format!("{sign} {}", num(v.abs()))
}

fn mirror_pair_lines(out: &mut String, label: &str, c: &ConfigurationRecord) {
    out.push_str(&format!(
        "{label}\t(σ, ϑ1, ϑ2)\t({}, {}°, {}°)\n",
        signed(c.sigma),
        signed(c.theta1_deg),
        signed(c.theta2_deg)
    ));
    for (i, p) in c.platform_points.iter().enumerate() {
        out.push_str(&format!("\tB{}\t({}, {}, {})\n", i + 1, num(p[0]), num(p[1]), signed(p[2])));
    }
}

pub fn solve_table(report: &SolveReport) -> String {
    let mut out = format!("Roots of the resultant polynomial ({})\n", report.roots.len());
    complex_lines(&mut out, &report.roots);
    out.push_str(&format!("\nReal assembly configurations ({})\n", report.configurations.len()));
    for (i, c) in report.configurations.iter().enumerate() {
        configuration_lines(&mut out, &(i + 1).to_string(), c);
    }
    out
}

pub fn tricept_table(report: &TriceptReport) -> String {
    let mut out = format!("Values of σ² ({})\n", report.sigma_squared.len());
    complex_lines(&mut out, &report.sigma_squared);
    out.push_str(&format!("\nReal assembly configurations ({})\n", report.configurations.len()));
    let mut in_pair = vec![false; report.configurations.len()];
    for &(a, b) in &report.mirror_pairs {
        in_pair[a] = true;
        in_pair[b] = true;
    }
    let mut row = 1;
    for &(upper, _) in &report.mirror_pairs {
        mirror_pair_lines(&mut out, &format!("{}-{}", row, row + 1), &report.configurations[upper]);
        row += 2;
    }
    for (i, c) in report.configurations.iter().enumerate() {
        if !in_pair[i] {
            configuration_lines(&mut out, &row.to_string(), c);
            row += 1;
        }
    }
    out
}

pub fn oracle_table(report: &OracleReport) -> String {
    let mut out = format!("Oracle solutions ({})\n", report.configurations.len());
    for (i, c) in report.configurations.iter().enumerate() {
        configuration_lines(&mut out, &(i + 1).to_string(), c);
    }
    out
}

pub fn check_table(report: &CheckReport) -> String {
    let mut out = String::from("leg\t|B-A|\tL\tresidual\n");
    for l in &report.legs {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            l.leg,
            num(l.distance),
            num(l.length),
            num(l.residual)
        ));
    }
    let verdict = if report.pass { "pass" } else { "fail" };
    out.push_str(&format!("{verdict} (tolerance {})\n", num(report.tolerance)));
    out
}

/// One flat CSV row; roots fill `re`/`im`, configurations the pose and
/// platform columns.
#[derive(Debug, Default, Serialize)]
struct CsvRow<'a> {
    record: &'a str,
    index: usize,
    re: Option<f64>,
    im: Option<f64>,
    sigma: Option<f64>,
    theta1_deg: Option<f64>,
    theta2_deg: Option<f64>,
    b1_x: Option<f64>,
    b1_y: Option<f64>,
    b1_z: Option<f64>,
    b2_x: Option<f64>,
    b2_y: Option<f64>,
    b2_z: Option<f64>,
    b3_x: Option<f64>,
    b3_y: Option<f64>,
    b3_z: Option<f64>,
}

fn csv_configuration<'a>(record: &'a str, index: usize, c: &ConfigurationRecord) -> CsvRow<'a> {
    let b = c.platform_points;
    CsvRow {
        record,
        index,
        sigma: Some(c.sigma),
        theta1_deg: Some(c.theta1_deg),
        theta2_deg: Some(c.theta2_deg),
        b1_x: Some(b[0][0]),
        b1_y: Some(b[0][1]),
        b1_z: Some(b[0][2]),
        b2_x: Some(b[1][0]),
        b2_y: Some(b[1][1]),
        b2_z: Some(b[1][2]),
        b3_x: Some(b[2][0]),
        b3_y: Some(b[2][1]),
        b3_z: Some(b[2][2]),
        ..Default::default()
    }
}

fn write_csv(value_record: &str, values: &[ComplexValue], configs: &[ConfigurationRecord]) -> csv::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (i, z) in values.iter().enumerate() {
        w.serialize(CsvRow {
            record: value_record,
            index: i + 1,
            re: Some(z.re),
            im: Some(z.im),
            ..Default::default()
        })?;
    }
    for (i, c) in configs.iter().enumerate() {
        w.serialize(csv_configuration("configuration", i + 1, c))?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn solve_csv(report: &SolveReport) -> csv::Result<String> {
    write_csv("root", &report.roots, &report.configurations)
}

pub fn tricept_csv(report: &TriceptReport) -> csv::Result<String> {
    write_csv("sigma_squared", &report.sigma_squared, &report.configurations)
}

pub fn oracle_csv(report: &OracleReport) -> csv::Result<String> {
    write_csv("root", &[], &report.configurations)
}

pub fn check_csv(report: &CheckReport) -> csv::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for l in &report.legs {
        w.serialize(l)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_significant_digits() {
        assert_eq!(num(0.4336937265758375), "0.4336937265758375");
        assert_eq!(num(-5.0742351861635413), "-5.074235186163541");
        assert_eq!(num(-4.9208457694073359), "-4.920845769407336");
        assert_eq!(num(15.5595408347198758), "15.55954083471988");
        assert_eq!(num(0.0), "0.");
        assert_eq!(num(3.0), "3.000000000000000");
        assert_eq!(num(1e17), "100000000000000000.");
    }

    #[test]
    fn carry_keeps_digit_count() {
        assert_eq!(num(9.9999999999999996), "10.00000000000000");
        assert_eq!(num(-99.999999999999996), "-100.0000000000000");
    }

    #[test]
    fn tiny_values_use_exponent() {
        assert_eq!(num(1.25e-12), "1.250000000000000e-12");
    }

    #[test]
    fn number_text_round_trips() {
        for x in [0.4336937265758375, -2.6539388259158195, 43.4967317928178336, 1e-3, 123456.789] {
            let back: f64 = num(x).parse().unwrap();
            assert!((back - x).abs() <= 1e-15 * x.abs());
        }
    }

    #[test]
    fn conjugate_pairs_share_a_line() {
        let mut out = String::new();
        let v = [
            ComplexValue { re: 1.0, im: 0.0 },
            ComplexValue { re: 2.0, im: 0.5 },
            ComplexValue { re: 2.0, im: -0.5 },
        ];
        complex_lines(&mut out, &v);
        assert_eq!(out, "1\t(1.000000000000000, 0.)\n2-3\t(2.000000000000000, ± 0.5000000000000000)\n");
    }

    #[test]
    fn signs_follow_upper_member() {
        assert_eq!(signed(1.5), "± 1.500000000000000");
        assert_eq!(signed(-1.5), "∓ 1.500000000000000");
    }
}
