//! Provable lower bounds on the symmetric information rate (SIR) of
//! finite intersymbol-interference (ISI) channels with additive Gaussian
//! noise and BPSK or QPSK inputs.
//!
//! The pipeline mirrors an unbiased MMSE decision-feedback equalizer:
//!
//! 1. [`channel`] — channel taps, autocorrelation, power spectral density.
//! 2. [`spectral`] — spectral factorization of the equalizer input
//!    spectrum and the error-variance decomposition that yields the
//!    effective SNR `R` and noise fraction `phi`.
//! 3. [`dfe`] — residual precursor ISI taps at the equalizer output,
//!    their certified statistics, and dominant-tap cluster selection.
//! 4. [`bounds`] — Gauss–Hermite evaluation of the mismatched
//!    mutual-information gap `F`, its upper/lower bounds, and the
//!    resulting capacity-domain bounds.
//! 5. [`sir_mc`] — Monte-Carlo SIR reference via the forward recursion
//!    of the sum-product trellis algorithm.
//! 6. [`cli`] — SNR sweeps, CSV emission, and gnuplot scripts.
//!
//! All internal rates are in nats; conversions to bits happen at the
//! output boundary.

pub mod bounds;
pub mod channel;
pub mod cli;
pub mod dfe;
pub mod poly;
pub mod quad;
pub mod sir_mc;
pub mod spectral;

pub use bounds::{bound_point, bound_point_with, BoundPoint, PipelineOptions, QuadratureRule};
pub use channel::{Alphabet, Autocorrelation, ChannelResponse};
pub use dfe::{ClusterSet, PrecursorProfile};
pub use sir_mc::{estimate_sir, SirEstimate, TrellisSpec};
pub use spectral::{NoiseDecomposition, SpectralFactors};

/// Convert a rate from nats to bits.
pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

/// Convert an SNR in dB to the linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Convert a linear power ratio to dB.
pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}
