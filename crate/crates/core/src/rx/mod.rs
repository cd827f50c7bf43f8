//! Bob's receiver DSP.

mod acf;
mod chain;
mod frequency;
mod sync;
mod ukf;
mod whitening;

pub use acf::autocorrelation;
pub use chain::{receive_noise, receive_signal, FrameTiming, ReceiverConfig, RecoveredFrame};
pub use frequency::{downconvert, estimate_freq_offset, estimate_pilot_frequency, to_complex, unwrap, MIN_LINE_DB};
pub use sync::{acquire_timing, acquire_timing_at, synchronize, SyncResult};
pub use ukf::{phase_correct, ukf_phase_track, upsample_track, PhaseTrack, UkfConfig};
pub use whitening::{build_whitening, WhiteningFilter};
pub use crate::tx::{downsample, matched_filter};
