//! Code-aided channel estimation for LDPC-coded MIMO links.
//!
//! The crate covers the full link: LDPC encoding and belief-propagation
//! decoding ([`ldpc`]), Gray-labeled modulation and interleaving
//! ([`modem`]), Rayleigh block fading ([`channel`]), exhaustive max-log
//! detection with an incremental rank-one LLR update ([`detector`]), pilot
//! and parity-check driven channel estimation ([`estimator`]) and a seeded
//! Monte Carlo FER harness ([`harness`]).

pub mod channel;
pub mod detector;
pub mod estimator;
pub mod harness;
pub mod ldpc;
pub mod llr;
pub mod modem;
pub mod par;

pub use channel::ChannelMatrix;
pub use detector::{max_log_detect, DetectionCache};
pub use estimator::{check_metric, coordinate_ascent, lmmse, AscentParams, AscentVariant, MetricVariant};
pub use ldpc::{load_parity_alist, ParityCheckMatrix};
pub use modem::{Modulation, VectorAlphabet};
