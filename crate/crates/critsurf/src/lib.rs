//! Exact computations on graphs embedded in surfaces with rings.
//!
//! The crate models normal embeddings of simple graphs in surfaces as
//! rotation systems with edge signs, together with an explicit partition of
//! the facial walks into faces carrying genus labels (so non-cellular
//! embeddings are first-class).  On top of that sit:
//!
//! * `coloring` — 3-coloring extension with ring semantics and criticality
//!   certificates,
//! * `weights` — the exact rational weight calculus (`s`, `w`, `gen`,
//!   `surf`, elasticity) and inequality checkers,
//! * `topology` — homotopy classification of cycles by surgery, cutting,
//!   and graph expansions,
//! * `reduce` — 4-face collapse, covers with elasticity accounting, and
//!   flip surgery,
//! * `census` — canonical enumeration of small critical graphs and the
//!   verification harness,
//! * `decompose` — the constructive vertex-deletion algorithm.
//!
//! Everything is exact (big rationals, integer Euler counts); no floating
//! point is used anywhere.

pub mod census;
pub mod cli;
pub mod coloring;
pub mod decompose;
pub mod graph;
pub mod reduce;
pub mod surface_map;
pub mod topology;
pub mod weights;

pub use surface_map::{Dart, EmbeddedGraph, FaceClass, FaceRecord, MapError, Ring};
