//! Orbit structure of the reparametrization action on sampled immersed loops.
//!
//! A loop is a closed polyline in `Rⁿ` whose samples sit at parameters `k/m` on the
//! circle. The crate computes multiplicity functions, decides whether two loops
//! differ only by a reparametrization, finds the symmetry group of a loop and its
//! covering factorization, and builds normal-bundle slice charts with their walls.

pub mod cover;
pub mod curve;
pub mod generate;
pub mod io;
mod linalg;
pub mod matching;
pub mod multiplicity;
pub mod reparam;
pub mod slice;
pub mod spatial;
pub mod symmetry;
pub mod tolerance;
pub mod unionfind;

pub use cover::{build_arc_cover, cover_tolerance, Arc, ArcCover};
pub use curve::{AmbientSpace, CurveError, CurveFile, LoopImmersion, TangentFrame, ValidationReport, Violation};
pub use generate::{CurveGeneratorSpec, CurveKind, SmoothReparam};
pub use linalg::gram_rank;
pub use matching::{decide_orbit_equivalence, verify_reparam, EquivalenceVerdict, SeparationCertificate};
pub use multiplicity::{check_semicontinuity, delta, image_graph, level_partition, ImageGraph, LevelPartition, MultiplicityMap};
pub use reparam::ReparamMap;
pub use symmetry::{is_free, isotropy_group, primitive_factorization, IsotropyGroup, PrimitiveFactorization};
pub use tolerance::ToleranceProfile;
