//! Site percolation on the matching pair (Z², Z²*).
//!
//! The crate is organised bottom-up:
//!
//! - [`lattice`]: the two adjacency structures, rectangles, boxes and their boundaries.
//! - [`sampler`]: counter-based Bernoulli configurations and exhaustive enumeration.
//! - [`geometry`]: deterministic combinatorics on a fixed configuration (crossings,
//!   duality, lowest/highest crossings, Kesten's extension events, annulus circuits).
//! - [`oracle`]: exact event probabilities and exhaustive verification on tiny rectangles.
//! - [`suites`]: the exhaustive checks of duality and of the covering steps.
//! - [`mc`]: Monte Carlo estimators with Wilson intervals and the inequality checks built on them.
//! - [`cli`]: the `percmatch` command-line front end.

pub mod cli;
mod error;
pub mod geometry;
mod grid;
pub mod lattice;
pub mod mc;
pub mod oracle;
pub mod report;
pub mod sampler;
pub mod suites;

pub use error::{Error, Result};
pub use geometry::{CrossingSpec, Direction, DualityOutcome, Occupancy, SitePath};
pub use lattice::{Annulus, GraphKind, Rect, Site};
pub use mc::Estimate;
pub use oracle::{PPolynomial, Verdict};
pub use sampler::Config;
