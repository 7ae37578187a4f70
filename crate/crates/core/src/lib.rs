//! Monte Carlo and exact-formula laboratory for the zero statistics of
//! Gaussian entire functions (GEF): seeded sampling of Gaussian Taylor
//! series, certified truncation, zero counting by winding numbers and by
//! simultaneous root finding, translation operators on the Fock-Bargmann
//! space, tail-bound evaluators with empirical validators, and importance
//! sampling of deficit probabilities under tilted coefficient measures.
//!
//! All sampling is addressed by a [`SeedLineage`](rng::SeedLineage), so
//! every statistic is reproducible bit for bit regardless of thread count.

pub mod almost_independence;
pub mod error;
pub mod formulas;
pub mod lattice;
pub mod numeric;
pub mod par;
pub mod profile;
pub mod rare_events;
pub mod rng;
pub mod separation;
pub mod series;
pub mod stats;
pub mod translation;
pub mod zeros;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use profile::VarianceProfile;
pub use rng::SeedLineage;
pub use series::SeriesSample;
