//! Edge and vertex probing datasets.
//!
//! A [`ProbingExample`] is one sentence (or a premise/hypothesis pair joined
//! by the reserved [`SEPARATOR`] token) with a list of [`SpanTarget`]s. Spans
//! are half-open token ranges. Edge targets carry two spans, vertex targets
//! a single one-token span.
//!
//! On disk a dataset is UTF-8 line-delimited JSON, one example per line, in
//! a canonical form: keys sorted, spans as two-element arrays, compact
//! separators. Parsing a canonical line and serializing it again is the
//! identity.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod io;
mod schema;
mod validate;

pub use io::{
    decode_record, parse_example, read_dataset, read_records, to_canonical_line, write_dataset,
    write_examples,
};
pub use schema::{ProbeType, TaskName, TaskSchema};
pub use validate::{validate_dataset, validate_example, ValidationReport, Violation, ViolationKind};

/// Reserved token separating premise and hypothesis in paired tasks.
pub const SEPARATOR: &str = "<sep>";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error("{0}")]
    Invalid(Violation),
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<DataError>,
    },
    #[error("schema: {0}")]
    Schema(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Half-open token range `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    /// True when `0 <= start < end <= n_tokens`.
    pub fn is_valid_for(&self, n_tokens: usize) -> bool {
        self.start < self.end && self.end <= n_tokens
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }

    pub fn shifted(&self, offset: usize) -> Span {
        Span::new(self.start + offset, self.end + offset)
    }
}

impl From<(usize, usize)> for Span {
    fn from((start, end): (usize, usize)) -> Span {
        Span { start, end }
    }
}

impl From<Span> for (usize, usize) {
    fn from(s: Span) -> (usize, usize) {
        (s.start, s.end)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// One labelled target: a span pair for edge tasks, a single span for
/// vertex tasks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpanTarget {
    pub label: String,
    pub span1: Span,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span2: Option<Span>,
}

impl SpanTarget {
    pub fn edge(span1: Span, span2: Span, label: impl Into<String>) -> SpanTarget {
        SpanTarget {
            label: label.into(),
            span1,
            span2: Some(span2),
        }
    }

    pub fn vertex(span: Span, label: impl Into<String>) -> SpanTarget {
        SpanTarget {
            label: label.into(),
            span1: span,
            span2: None,
        }
    }

    pub fn spans(&self) -> impl Iterator<Item = Span> + '_ {
        std::iter::once(self.span1).chain(self.span2)
    }
}

// Field order is the canonical (sorted) key order of the file format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbingExample {
    pub id: String,
    pub targets: Vec<SpanTarget>,
    pub tokens: Vec<String>,
}

impl ProbingExample {
    /// Surface string of a span, tokens joined by single spaces.
    pub fn surface(&self, span: Span) -> String {
        self.tokens[span.range()].join(" ")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub schema: TaskSchema,
    pub split: Split,
    pub examples: Vec<ProbingExample>,
}

impl Dataset {
    pub fn new(schema: TaskSchema, split: Split, examples: Vec<ProbingExample>) -> Dataset {
        Dataset {
            schema,
            split,
            examples,
        }
    }

    pub fn num_targets(&self) -> usize {
        self.examples.iter().map(|e| e.targets.len()).sum()
    }

    pub fn targets(&self) -> impl Iterator<Item = (&ProbingExample, &SpanTarget)> {
        self.examples
            .iter()
            .flat_map(|e| e.targets.iter().map(move |t| (e, t)))
    }
}

/// Counts targets per label.
pub fn label_histogram(dataset: &Dataset) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for (_, target) in dataset.targets() {
        *counts.entry(target.label.clone()).or_insert(0) += 1;
    }
    counts
}
