//! Large-neighborhood local search for Euclidean optimization problems.
//!
//! The crate bundles four solvers (TSP, Steiner tree, uniform facility
//! location, bicriteria k-median) that share a single first-improvement
//! driver in [`engine`], plus the machinery used to check their quality
//! empirically:
//!
//! - [`dissection`]: median (Karp) dissection, randomized adaptive
//!   dissection with regions and portals, portal-respecting client
//!   assignments and balanced clustering of regions.
//! - [`oracles`]: exact brute-force solvers at desk scale.
//! - [`bench`]: seeded instance generators, experiment orchestration and
//!   CSV/JSON persistence, driven by the `geols` binary.

pub mod bench;
pub mod clustering;
pub mod dissection;
pub mod engine;
pub mod error;
pub mod geom;
pub mod oracles;
pub mod steiner;
pub mod tsp;

pub use error::{Error, Result};
pub use geom::{Point, Rect, Segment};
