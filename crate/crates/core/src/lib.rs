//! Simulation of a baseband-modulated, RF-heterodyne CV-QKD link: Alice's
//! DSP, the IQ modulator and fiber, Bob's receiver DSP, parameter estimation
//! with composable finite-size key accounting, multidimensional reconciliation
//! with MET-LDPC codes, and Toeplitz privacy amplification.

pub mod buffer;
pub mod error;
pub mod experiment;
pub mod random;
pub mod recon;
pub mod rx;
pub mod security;
pub mod spectrum;
pub mod optics;
pub mod pa;
pub mod tx;
pub mod units;

pub use buffer::{ComplexBuffer, RealBuffer, SampleBuffer, SymbolFrame};
pub use error::{Error, Result, ResultExt};
pub use random::{draw_uniform_bits, RandomSource};
pub use units::{db_to_linear, Decibel, Pnu};
