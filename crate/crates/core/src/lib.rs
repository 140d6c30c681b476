//! Word breaking for unspaced tokens such as domain names and hashtags
//! (`openresearch` → `open research`), cast as per-character B/I tagging.
//!
//! The tagger is generic over its scalar type; [`Model`] and [`Model64`] are
//! the `f32` training and `f64` verification instantiations.

pub mod data;
pub mod error;
pub mod nn;
pub mod scalar;
pub mod segmentation;
pub mod tagger;
pub mod train;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use segmentation::{Segmentation, Tag, TagSequence};
pub use tagger::{TaggerConfig, TaggerModel};

pub type Model = TaggerModel<f32>;
pub type Model64 = TaggerModel<f64>;
pub type Tensor32 = nn::Tensor<f32>;
pub type Tensor64 = nn::Tensor<f64>;
