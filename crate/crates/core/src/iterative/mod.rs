//! Iterative retargeting: per-segment optimization against target
//! importances, in black-box and feedback-guided form, and per-pixel color
//! pushes toward a region of interest.

mod hagiwara;
mod model;
mod optimize;

pub use hagiwara::{hagiwara_retarget, HagiwaraReport};
pub use model::{
    apply_modification, area_weighted_error, normalize_importance, saliency_error, Bounds, Feature,
    ModificationState, SegmentModel, DEFAULT_BOUNDS,
};
pub use optimize::{
    case_action, optimize_blackbox, optimize_feedback, Action, LoopConfig, OptimizeReport,
    Proposal, StopReason,
};
