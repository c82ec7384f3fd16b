//! Dataset construction.
//!
//! Dependency parses (CoNLL-U) feed the semantic-graph, monotonicity and
//! anaphora tasks; premise/hypothesis pairs feed the alignment and
//! contradiction-signature tasks through a token diff. Every generator is
//! deterministic given its input and seed.

mod conllu;
mod diff;
mod emit;
mod pairs;
mod polarity;
mod roles;

use std::path::PathBuf;

pub use conllu::{emit_conllu, parse_conllu, ConlluToken, DepTree, TreeViolation};
pub use diff::{apply_pairs, diff_spans, ChangedPair, DiffMode};
pub use emit::{emit_task_dataset, replicate_trees, split_dataset, GenOptions, TaskInput};
pub use pairs::{read_pairs, NliPair, SpanPair};
pub use polarity::{polarize, Operator, Polarity, PolarityLexicon, PolarityOptions, PropnPolicy};
pub use roles::{assign_roles, build_semgraph, semgraph_label, Role};

#[derive(Debug, thiserror::Error)]
pub enum TaskgenError {
    #[error("CoNLL-U line {line}: {message}")]
    Conllu { line: usize, message: String },
    #[error("pairs line {line}: {message}")]
    Pairs { line: usize, message: String },
    #[error("{0}")]
    Input(String),
    #[error("annotation error: {0}")]
    Annotation(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl TaskgenError {
    pub(crate) fn conllu(line: usize, message: impl Into<String>) -> TaskgenError {
        TaskgenError::Conllu { line, message: message.into() }
    }
}
