//! Experiment runners behind the command-line tool and the acceptance suite.

pub mod config;
pub mod io;
pub mod link;
pub mod runs;

pub use config::{
    scaled, AcfConfig, EndToEndConfig, ExperimentConfig, ExperimentKind, FramesConfig, KeyrateConfig, PaConfig,
    ReconConfig, SecurityConfig, SweepConfig,
};
pub use io::{read_complex_waveform, read_real_waveform, write_complex_waveform, write_real_waveform, ArtifactWriter, Manifest};
pub use link::{
    channel, design_whitening, noise_trace, pooled_estimate, prepare, run_frame, run_signal, trace_len, FrameOutcome,
    LinkConfig, LinkSession, PreparedFrame, SignalFrame,
};
pub use runs::*;
