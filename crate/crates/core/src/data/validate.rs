use std::collections::HashSet;
use std::fmt;

use super::{Dataset, ProbeType, ProbingExample, Span, TaskSchema, SEPARATOR};

/// One broken invariant in a dataset. Violations are data, not failures:
/// [`validate_dataset`] collects all of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub example_id: String,
    pub kind: ViolationKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    DuplicateId,
    EmptyTokens,
    EmptyTargets,
    SpanOutOfBounds { span: Span, n_tokens: usize },
    UnknownLabel { label: String },
    /// Vertex targets must cover exactly one token.
    SpanArity { span: Span },
    MissingSpan2,
    UnexpectedSpan2,
    /// Paired tasks need exactly one separator token.
    Separator { found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "example {:?}: ", self.example_id)?;
        match &self.kind {
            ViolationKind::DuplicateId => write!(f, "duplicate id"),
            ViolationKind::EmptyTokens => write!(f, "no tokens"),
            ViolationKind::EmptyTargets => write!(f, "no targets"),
            ViolationKind::SpanOutOfBounds { span, n_tokens } => {
                write!(f, "span {span} out of bounds for {n_tokens} tokens")
            }
            ViolationKind::UnknownLabel { label } => write!(f, "unknown label {label:?}"),
            ViolationKind::SpanArity { span } => {
                write!(f, "vertex span {span} must cover exactly one token")
            }
            ViolationKind::MissingSpan2 => write!(f, "edge target without span2"),
            ViolationKind::UnexpectedSpan2 => write!(f, "vertex target with span2"),
            ViolationKind::Separator { found } => {
                write!(f, "paired task needs exactly one {SEPARATOR} token, found {found}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks one example against a schema, ignoring cross-example rules.
pub fn validate_example(example: &ProbingExample, schema: &TaskSchema) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind| {
        out.push(Violation {
            example_id: example.id.clone(),
            kind,
        })
    };
    let n = example.tokens.len();
    if n == 0 {
        push(ViolationKind::EmptyTokens);
    }
    if example.targets.is_empty() {
        push(ViolationKind::EmptyTargets);
    }
    if schema.paired {
        let found = example.tokens.iter().filter(|t| *t == SEPARATOR).count();
        if found != 1 {
            push(ViolationKind::Separator { found });
        }
    }
    for target in &example.targets {
        for span in target.spans() {
            if !span.is_valid_for(n) {
                push(ViolationKind::SpanOutOfBounds { span, n_tokens: n });
            }
        }
        match (schema.probe_type, target.span2) {
            (ProbeType::Edge, None) => push(ViolationKind::MissingSpan2),
            (ProbeType::Vertex, Some(_)) => push(ViolationKind::UnexpectedSpan2),
            _ => {}
        }
        if schema.probe_type == ProbeType::Vertex && target.span1.len() != 1 {
            push(ViolationKind::SpanArity { span: target.span1 });
        }
        if schema.label_index(&target.label).is_none() {
            push(ViolationKind::UnknownLabel {
                label: target.label.clone(),
            });
        }
    }
    out
}

/// Lists every violation in the dataset: per-example rules plus id
/// uniqueness. The dataset is not modified.
pub fn validate_dataset(dataset: &Dataset) -> ValidationReport {
    let mut seen = HashSet::new();
    let mut violations = Vec::new();
    for example in &dataset.examples {
        if !seen.insert(example.id.as_str()) {
            violations.push(Violation {
                example_id: example.id.clone(),
                kind: ViolationKind::DuplicateId,
            });
        }
        violations.extend(validate_example(example, &dataset.schema));
    }
    ValidationReport { violations }
}
