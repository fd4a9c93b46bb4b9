//! Normal-bundle slice charts around a base loop, the pullback action of its
//! symmetry group on normal sections, and the walls of that action.
//!
//! Normal sections are stored as coefficients in a per-sample orthonormal frame of
//! the normal space. Pushing a section forward adds it to the base loop; the chart
//! inverts this by intersecting a nearby loop with the normal hyperplanes of the
//! base, which also yields the reparametrization part of the splitting.

mod action;
mod chart;
mod frame;
mod walls;

pub use action::{inner_product, pullback_halfdensity, pullback_plain};
pub use chart::{chart_phi, tau_push, ChartResult};
pub use frame::{normal_frame, tube_profile, NormalBundleFrame, NormalSection, TubeProfile};
pub use walls::{
    diagram_summary, wall_membership, wall_orthogonal_witness, witness_family, ChamberProbe, DiagramOptions,
    DiagramReport, Wall, WallSummary,
};

use crate::curve::CurveError;
use crate::symmetry::SymmetryError;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SliceError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error("degenerate tube profile: rho = {rho:.3e} at sample {sample} is below {floor:.3e}; use a finer eps_image for the cover")]
    DegenerateTube { sample: usize, rho: f64, floor: f64 },
    #[error("tube overflow: section norm {norm:.6e} is not below the minimal tube radius {min_rho:.6e}")]
    TubeOverflow { norm: f64, min_rho: f64 },
    #[error("loop leaves the tube near base sample {sample}")]
    OutsideTube { sample: usize },
    #[error("base map is not monotone at base sample {sample}; the loop is too far from the base in the C1 sense")]
    NonMonotone { sample: usize },
    #[error("the loop does not close up once around the tube (advance {advance:.6} turns)")]
    NotClosed { advance: f64 },
    #[error("map is not a symmetry of the base loop (residual {residual:.3e} > {eps:.3e})")]
    NotIsotropy { residual: f64, eps: f64 },
    #[error("arc starting at sample {start} meets its own image under the wall element; the element is not fixed-point free")]
    ArcOverlap { start: usize },
    #[error("section has {found} samples of rank {found_rank}, frame expects {expected} of rank {expected_rank}")]
    Shape { found: usize, found_rank: usize, expected: usize, expected_rank: usize },
}
