//! Blind multi-bit watermark embedding and extraction.

mod baselines;
mod key;
mod lfqim;
mod message;
mod scaling;

pub use key::{MethodId, WatermarkKey};
pub use lfqim::Extraction;
pub use message::BitMessage;
pub use scaling::{embed, extract, scaled_embed, scaled_extract};
