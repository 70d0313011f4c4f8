//! Hurdle models for heavy-tailed data with an excess of zeros, built on the
//! Generalized Lambda Distribution (RS and FKML parametrizations), with a
//! Generalized Pareto baseline and density/residual diagnostics.

pub mod diagnostics;
pub mod error;
pub mod fitting;
pub mod gld;
pub mod gpd;
pub mod hurdle;
pub mod numerics;
pub mod regression;
pub mod simulation;

pub use error::{Error, Result};
pub use gld::{Gld, GldParams, Parametrization, Support};
