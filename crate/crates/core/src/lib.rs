//! Sparse conditional independence graphs for stationary multivariate time
//! series, estimated with a graphical lasso on the wavelet spectrum.
//!
//! The pipeline lives in [`cig`]: pad the series, take non-decimated wavelet
//! coefficients ([`wavelet`]), bias-correct the wavelet periodogram
//! ([`spectral`]), bootstrap a surrogate locally stationary process
//! ([`surrogate`]), run a penalized precision estimate per scale ([`glasso`])
//! and merge the supports of the two most similar scales. [`fourier`] holds a
//! frequency-domain baseline, [`discovery`] recovers an underlying network
//! from one scale, [`simulate`] draws GNAR, VAR and VARMA test processes and
//! [`harness`] runs studies and forecasts.
//!
//! Everything numeric is generic over [`Real`]; the aliases below fix it to
//! `f64`.

pub mod cig;
pub mod discovery;
pub mod error;
pub mod fourier;
pub mod glasso;
pub mod graph;
pub mod harness;
pub mod linalg;
pub mod scalar;
pub mod simulate;
pub mod spectral;
pub mod surrogate;
pub mod wavelet;

pub use cig::{wav_ts_glasso, CigEstimate, WavTsGlassoConfig};
pub use discovery::{discover_network, ScaleHint};
pub use error::{Error, Result};
pub use fourier::{fourier_ts_glasso, FourierConfig};
pub use glasso::{graphical_lasso, select_lambda, Criterion, GlassoConfig};
pub use graph::{Graph, GraphDocument};
pub use scalar::Real;
pub use wavelet::WaveletFamily;

pub type PrecisionEstimate = glasso::PrecisionEstimate<f64>;
pub type WaveletSpectrum = spectral::WaveletSpectrum<f64>;
pub type ScaleEstimates = cig::ScaleEstimates<f64>;
pub type WaveletCoefficients = wavelet::WaveletCoefficients<f64>;
