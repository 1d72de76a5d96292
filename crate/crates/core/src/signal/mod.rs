//! Complex sample streams: regressor construction, the synthetic SI channel
//! and raw IQ file I/O.

mod channel;
mod iq;
mod regressor;

pub use channel::{complex_gaussian, PolyCoeffs, SiChannelModel, SiComponents};
pub use iq::{decode_iq, encode_iq, load_iq, save_iq};
pub use regressor::{build_regressor, fill_regressor, TapConfig};
