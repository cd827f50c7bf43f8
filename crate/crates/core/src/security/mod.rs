//! Shot-noise calibration, channel parameter estimation and composable
//! finite-size key length (collective attacks, trusted heterodyne detector).

mod estimation;
mod holevo;
mod keylength;

pub use estimation::{calibrate_shot_noise, estimate_channel, Calibration, ChannelEstimate, NoiseBudget};
pub use holevo::{holevo_bound, mutual_information, MutualInformation};
pub use keylength::{
    composable_key_length, null_key_threshold, positive_key_onset, worst_case_bounds, BlockSize, FiniteSizeParams, KeyAccounting,
    KeyInputs,
};
