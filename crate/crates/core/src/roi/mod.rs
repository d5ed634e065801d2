//! Region-of-interest retargeting: center-surround inversion, rotation and
//! hue curves from circular distributions, and patch-graph color transfer.

mod curve;
mod graph;
mod kim;

pub use curve::{
    edge_distribution, hue_distribution, hue_retarget, rotate_retarget, rotation_saliency_curve,
    symmetric_kl, AngleDistribution, Curve, CurveConfig, CurveOutcome, FLAT_CURVE, KL_FLOOR,
};
pub use graph::{
    build_patch_graph, hue_distance, minimize_graph_energy, nguyen_retarget, transfer_colors,
    Candidate, IcmResult, NguyenConfig, NguyenOutcome, Palettes, PatchColor, PatchGraph,
    PatchLayout, Similarity,
};
pub use kim::{
    invert_center_surround, kim_retarget, kim_target, normalize_factors, CenterSurroundOperator,
    Inversion, InversionConfig, KimConfig, KimFeature,
};
