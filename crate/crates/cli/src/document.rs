//! Geometry input files.
//!
//! A document is TOML and describes exactly one instance, either a general
//! structure through top-level keys
//!
//! ```toml
//! alpha_deg = 80
//! beta_deg = 115
//! zeta = 1
//! A = [[-1, 2, -1], [-1, -1, 1], [2, 0, 2]]
//! B = [[-1, 1, 0], [0, -1, 1], [1, -1, 1]]
//! L = [3, 4, 5]
//! ```
//!
//! or a Tricept through a `[tricept2]` (or `[tricept1]`) table with
//! `r_base`, `r_platform` and `L`.

use std::fmt;
use std::path::Path;

use rrp3ss::tricept::{TriceptType1Geometry, TriceptType2Geometry};
use rrp3ss::{MechanismGeometry, Vec3};
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriceptBlock {
    pub r_base: f64,
    pub r_platform: f64,
    #[serde(rename = "L")]
    pub leg_lengths: [f64; 3],
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryDocument {
    pub alpha_deg: Option<f64>,
    pub beta_deg: Option<f64>,
    pub zeta: Option<f64>,
    #[serde(rename = "A")]
    pub base_anchors: Option<[[f64; 3]; 3]>,
    #[serde(rename = "B")]
    pub platform_anchors: Option<[[f64; 3]; 3]>,
    #[serde(rename = "L")]
    pub leg_lengths: Option<[f64; 3]>,
    pub tricept2: Option<TriceptBlock>,
    pub tricept1: Option<TriceptBlock>,
}

/// The instance a document describes.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    General(MechanismGeometry),
    Tricept2(TriceptType2Geometry),
    Tricept1(TriceptType1Geometry),
}

impl Instance {
    /// General-geometry view of any instance.
    pub fn geometry(&self) -> MechanismGeometry {
        match self {
            Instance::General(g) => g.clone(),
            Instance::Tricept2(t) => t.to_general(),
            Instance::Tricept1(t) => t.to_general(),
        }
    }
}

#[derive(Debug)]
pub enum DocumentError {
    Io(std::io::Error),
    Parse(String),
    Invalid(String),
}

impl fmt::Display for DocumentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DocumentError::Io(e) => write!(f, "cannot read geometry file: {e}"),
            DocumentError::Parse(e) => write!(f, "cannot parse geometry file: {e}"),
            DocumentError::Invalid(e) => write!(f, "invalid geometry: {e}"),
        }
    }
}

impl std::error::Error for DocumentError {}

impl GeometryDocument {
    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        toml::from_str(text).map_err(|e| DocumentError::Parse(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self, DocumentError> {
        let text = std::fs::read_to_string(path).map_err(DocumentError::Io)?;
        Self::parse(&text)
    }

    fn has_general_keys(&self) -> bool {
        self.alpha_deg.is_some()
            || self.beta_deg.is_some()
            || self.zeta.is_some()
            || self.base_anchors.is_some()
            || self.platform_anchors.is_some()
            || self.leg_lengths.is_some()
    }

    pub fn instance(&self) -> Result<Instance, DocumentError> {
        let blocks = [self.has_general_keys(), self.tricept2.is_some(), self.tricept1.is_some()];
        match blocks.iter().filter(|b| **b).count() {
            0 => return Err(DocumentError::Invalid("document describes no structure".into())),
            1 => {}
            _ => {
                return Err(DocumentError::Invalid(
                    "exactly one of the general keys, [tricept2] or [tricept1] may be given".into(),
                ))
            }
        }
        if let Some(t) = &self.tricept2 {
            return TriceptType2Geometry::new(t.r_base, t.r_platform, t.leg_lengths)
                .map(Instance::Tricept2)
                .map_err(|e| DocumentError::Invalid(e.to_string()));
        }
        if let Some(t) = &self.tricept1 {
            return Ok(Instance::Tricept1(TriceptType1Geometry {
                base_circumradius: t.r_base,
                platform_circumradius: t.r_platform,
                leg_lengths: t.leg_lengths,
            }));
        }
        let missing = |name: &str| DocumentError::Invalid(format!("missing key `{name}`"));
        let rows = |m: [[f64; 3]; 3]| m.map(Vec3::from);
        MechanismGeometry::new(
            self.alpha_deg.ok_or_else(|| missing("alpha_deg"))?.to_radians(),
            self.beta_deg.ok_or_else(|| missing("beta_deg"))?.to_radians(),
            self.zeta.ok_or_else(|| missing("zeta"))?,
            rows(self.base_anchors.ok_or_else(|| missing("A"))?),
            rows(self.platform_anchors.ok_or_else(|| missing("B"))?),
            self.leg_lengths.ok_or_else(|| missing("L"))?,
        )
        .map(Instance::General)
        .map_err(|e| DocumentError::Invalid(e.to_string()))
    }
}

/// Reads and interprets a geometry file in one step.
pub fn load(path: &Path) -> Result<Instance, DocumentError> {
    GeometryDocument::read(path)?.instance()
}
