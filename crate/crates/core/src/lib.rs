//! Exact and sampled computations for Ledrappier's 3-dot field, the 1-D
//! block process built from the same rule, its stationarization over the
//! 3-adic odometer, and finite checks of the pairwise-independence lemma.
//!
//! Every coordinate of the binary processes is an affine GF(2) functional of
//! independent fair coins ([`gf2::BitExpr`]), so cylinder probabilities and
//! independence statements are computed exactly by elimination.

pub mod block;
pub mod census;
pub mod error;
pub mod field;
pub mod gf2;
pub mod joinings;
pub mod law;
pub mod lemma;
pub mod odometer;
pub mod sampling;
pub mod source;

pub use block::{
    block_independence_check, mixing_profile_1d, overlap_independence_check, BlockProcess, BlockSampler, MixingRow,
};
pub use census::{classify_dichotomy, word_census, Dichotomy, WordCensus};
pub use error::{Error, Result};
pub use field::{
    region_independence_check, region_of, sample_field, triple_dependence_witness, BitMatrix, LedrappierField,
    Region, Window2D,
};
pub use gf2::{
    are_independent, joint_distribution, joint_distribution_bounded, rank, rank_independent, system_probability,
    xor, AffineSystem, BitExpr, Dyadic, SeedId, SeedTag, DEFAULT_LENGTH_BOUND,
};
pub use joinings::{
    delta_p, delta_pq, joining_distance, product_distance_profile, CylinderIndexing, JoiningDistance, ProfileRow,
};
pub use law::{CylinderEvent, EmpiricalDist, JointDist, Law, Word};
pub use lemma::{check_lemma_instance, search_lemma_counterexample, FiniteTriple, LemmaStatus, LemmaVerdict, SearchMode};
pub use odometer::{
    conditional_triple_check, mixture_window_law, position_of_origin, shift_skeleton, skeleton_sample,
    stationarity_check, SkeletonState, StationaryProcess,
};
pub use source::{ExactProcess, IidProcess, LinearField, Rot3Process, Site, WindowSampler};
