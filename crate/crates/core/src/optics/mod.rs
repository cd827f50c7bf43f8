//! Optical layer: IQ modulator, fiber channel and RF heterodyne detector.

mod channel;
mod modulator;

pub use channel::{
    attenuate_to_va, heterodyne_detect, propagate, AttenuationResult, ChannelParams, DetectorParams, MeasurementKind,
    QuantumBandMask,
};
pub use modulator::{
    abc_dither, baseband_approx, iq_transfer_exact, ossb_approx, sideband_leakage, AbcDither, IqModulatorParams,
};
