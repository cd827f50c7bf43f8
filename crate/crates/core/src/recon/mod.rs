//! Reverse reconciliation: MET-LDPC codes, multidimensional mapping,
//! puncturing and density evolution.

pub mod benchmark;
pub mod bp;
pub mod density;
pub mod ensemble;
pub mod matrix;
pub mod md;
pub mod puncture;

pub use benchmark::{fer_benchmark, frame_llrs, FerChannel, FerConfig, FerResult};
pub use bp::{bp_decode, BpDecoder, DecodeResult, LLR_CLAMP};
pub use density::{
    density_evolution, gaussian_approximation, threshold_search, DeConfig, DeEngine, DeResult, ThresholdResult,
};
pub use ensemble::{CheckType, MetEnsemble, VariableType};
pub use matrix::{construct_matrix, node_counts, NodeCounts, ParityMatrix, Staircase};
pub use md::{md_apply, md_encode, md_llr, MdSideInfo, MD_DIMS};
pub use puncture::{awgn_capacity, efficiency, plan_puncturing, PuncturePlan};
