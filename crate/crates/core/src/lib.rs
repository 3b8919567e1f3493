//! Discrete embeddings of classical and fractional Lagrangian systems.
//!
//! A discrete embedding replaces curves by node sequences on a uniform grid,
//! the time derivative by one-sided difference operators (classical or
//! Grünwald-Letnikov), and integrals by the one-sided Gauss quadrature. From
//! it this crate builds two schemes for the same Lagrangian system:
//!
//! * the *direct* scheme, obtained by substituting discrete operators into a
//!   written form of the Euler-Lagrange equation, and
//! * the *variational* scheme, obtained by discretizing the action and
//!   taking its critical points along interior variations.
//!
//! [`schemes::coherence_report`] compares the two and [`solver`] solves the
//! resulting boundary-value systems.
//!
//! ```
//! use discrete_embedding::{grid::{Grid, Sigma}, lagrangian::Harmonic, schemes::*};
//!
//! let grid = Grid::new(0.0, 1.0, 16).unwrap();
//! let scheme = EmbeddingScheme::fractional(Sigma::Minus, 0.5).unwrap();
//! let report = coherence_report(&scheme, &grid, &Harmonic::new(1), 10, 7).unwrap();
//! assert!(report.max_abs_discrepancy <= 1e-10);
//! ```

pub mod error;
pub mod grid;
pub mod lagrangian;
pub mod operators;
pub mod schemes;
pub mod series;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{Grid, Sigma};
pub use lagrangian::Lagrangian;
pub use operators::GlCoefficients;
pub use schemes::{EmbeddingScheme, SchemeKind};
pub use series::{Series, Trajectory};
