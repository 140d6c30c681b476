//! Tensors, GRU cells, softmax layers, reverse-mode gradients and Adam.

mod adam;
mod gru;
mod init;
mod layers;
mod params;
mod tape;
mod tensor;

pub use adam::{adam_step, AdamState};
pub use gru::{gru_cell_forward, gru_cell_tape, GruCellParams, GruIds, GruWeights};
pub use init::Initializer;
pub use layers::{embedding_lookup, linear_softmax, log_softmax, softmax};
pub use params::{Gradients, ParamId, ParamStore};
pub use tape::{Tape, Var};
pub use tensor::Tensor;

pub(crate) use gru::gru_step_unchecked;
