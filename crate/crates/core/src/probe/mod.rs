//! Span probes over frozen token representations.
//!
//! A probe projects every in-span token vector, pools each span with a
//! learned attention scorer whose softmax runs over that span only, and
//! classifies the pooled representation (two concatenated spans for edge
//! targets, one for vertex targets) with a linear or one-hidden-layer tanh
//! MLP head.
//!
//! Parameters are kept in `f64`. Embeddings arrive as `f32` and are only
//! read: nothing in this module holds a mutable reference to them, which is
//! what "frozen encoder" amounts to here.
//!
//! Gradients are written out by hand in [`backward`]; the test suite checks
//! every parameter against central finite differences.

use thiserror::Error;

use crate::data::{DataError, Span, TaskName};
use crate::embeddings::EmbeddingError;

mod adam;
mod checkpoint;
mod config;
mod eval;
mod loss;
mod model;
mod network;
mod train;

pub use adam::adam_update;
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use config::{AdamConfig, HeadKind, LossKind, ProbeConfig};
pub use eval::{evaluate, evaluate_encoded, predict, LabelStats, Metrics};
pub use loss::{argmax, loss, loss_and_grad};
pub use model::{Affine, AdamState, Head, Params, ProbeModel};
pub use network::{backward, forward, span_pool, Instance};
pub use train::{encode_examples, train, train_encoded, TrainedProbe};

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("invalid probe config: {0}")]
    Config(String),
    #[error("target arity mismatch: {0}")]
    Arity(String),
    #[error("span {span} out of bounds for {n_tokens} tokens")]
    SpanOutOfBounds { span: Span, n_tokens: usize },
    #[error("label index {index} out of range for {n_outputs} outputs")]
    LabelOutOfRange { index: usize, n_outputs: usize },
    #[error("label {0:?} is not in the task schema")]
    UnknownLabel(String),
    #[error("embedding dimension {found} does not match probe input dimension {expected}")]
    DimMismatch { expected: usize, found: usize },
    #[error("probe trained on {trained} cannot evaluate {given}")]
    SchemaMismatch { trained: TaskName, given: TaskName },
    #[error("label sets differ between probe and dataset")]
    LabelMismatch,
    #[error("empty dataset")]
    Empty,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
