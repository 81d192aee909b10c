//! Link-level simulation of OFDM, AFDM, ODDM, OTSM and Zak-OTFS over doubly-selective
//! channels.
//!
//! Numerical types are generic over [`Scalar`] (`f32` or `f64`); the aliases below fix the
//! precision for the common cases.

pub mod bases;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod frame;
pub mod linalg;
pub mod properties;
pub mod scalar;
pub mod transceiver;

pub use bases::{change_of_basis, AfdmParams, Basis, SchemeId};
pub use channel::{DdWindow, PhysicalChannel, Pulse, SpreadingFunction, TimeWaveform};
pub use error::{Error, Result};
pub use frame::{FrameConfig, Qam, SeededRng, SymbolVector};
pub use linalg::{CMatrix, Cholesky};
pub use properties::{Outcome, PropertyVerdict};
pub use scalar::{Scalar, C};
pub use transceiver::{AmbiguitySurface, EffectiveChannel, MmseFilter};

pub type Complex64 = C<f64>;
pub type Complex32 = C<f32>;

pub type FrameConfig64 = FrameConfig<f64>;
pub type FrameConfig32 = FrameConfig<f32>;
pub type Basis64 = Basis<f64>;
pub type Basis32 = Basis<f32>;
pub type SpreadingFunction64 = SpreadingFunction<f64>;
pub type SpreadingFunction32 = SpreadingFunction<f32>;
pub type TimeWaveform64 = TimeWaveform<f64>;
pub type TimeWaveform32 = TimeWaveform<f32>;
pub type SymbolVector64 = SymbolVector<f64>;
pub type SymbolVector32 = SymbolVector<f32>;
pub type EffectiveChannel64 = EffectiveChannel<f64>;
pub type EffectiveChannel32 = EffectiveChannel<f32>;
pub type AmbiguitySurface64 = AmbiguitySurface<f64>;
pub type AmbiguitySurface32 = AmbiguitySurface<f32>;
pub type CMatrix64 = CMatrix<f64>;
pub type CMatrix32 = CMatrix<f32>;
