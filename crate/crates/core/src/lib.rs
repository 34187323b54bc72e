//! Position analysis of the RRP-3(SS) multi-loop spatial structure.
//!
//! Two platforms are joined by one RRP serial chain and three SS links. The
//! leg-length closure conditions are rationalized with tangent half-angles,
//! the two angular unknowns are eliminated dialytically through a 24×24
//! matrix, and the determinant collapses to a degree-28 polynomial in the
//! prismatic displacement σ. Each real root is then back-substituted into the
//! null space of the matrix to recover the full assembly configuration.
//!
//! ```
//! use rrp3ss::{solve, MechanismGeometry, SolveOptions};
//!
//! let geom = MechanismGeometry::example_general();
//! let set = solve(&geom, &SolveOptions::default()).unwrap();
//! assert_eq!(set.roots.len(), 28);
//! assert_eq!(set.configurations.len(), 8);
//! ```

pub mod compat;
pub mod elimination;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod polyroots;
pub mod solver;
pub mod tricept;

pub use compat::{RationalizedCoefficients, TrigCoefficients};
pub use elimination::{det_polynomial, DetPolynomial, UnivariatePolynomial};
pub use error::{Error, Result};
pub use geometry::{MechanismGeometry, PoseParams, RotationMatrix, Vec3};
pub use oracle::OracleGrid;
pub use polyroots::{all_roots, classify_real, RootSet};
pub use solver::{solve, AssemblyConfiguration, SolutionSet, SolveOptions};
pub use tricept::{solve_type2, TriceptType2Geometry};

pub use num_complex::Complex64;
