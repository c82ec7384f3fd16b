use std::ops::Range;

use serde::Deserialize;

use super::TaskgenError;
use crate::data::Span;

/// Aligned premise and hypothesis token ranges.
pub(crate) type Alignment = (Range<usize>, Range<usize>);

/// A premise/hypothesis pair from an NLI corpus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NliPair {
    pub id: Option<String>,
    pub premise: Vec<String>,
    pub hypothesis: Vec<String>,
    pub label: Option<String>,
    /// Hand-marked aligned spans; when present they replace the automatic
    /// diff.
    pub spans: Option<Vec<SpanPair>>,
}

/// An aligned pair of spans, each relative to its own sentence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpanPair {
    #[serde(default)]
    pub premise: Option<Span>,
    #[serde(default)]
    pub hypothesis: Option<Span>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Text {
    Tokens(Vec<String>),
    Raw(String),
}

impl Text {
    fn tokens(self) -> Vec<String> {
        match self {
            Text::Tokens(t) => t,
            Text::Raw(s) => s.split_whitespace().map(str::to_string).collect(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    #[serde(default)]
    id: Option<String>,
    premise: Text,
    hypothesis: Text,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    spans: Option<Vec<SpanPair>>,
}

impl NliPair {
    pub fn new(premise: &[&str], hypothesis: &[&str]) -> NliPair {
        NliPair {
            id: None,
            premise: premise.iter().map(|s| s.to_string()).collect(),
            hypothesis: hypothesis.iter().map(|s| s.to_string()).collect(),
            label: None,
            spans: None,
        }
    }

    /// Premise and hypothesis ranges of the explicit spans, after bounds
    /// checks.
    pub(crate) fn explicit_ranges(&self) -> Option<Result<Vec<Alignment>, String>> {
        let spans = self.spans.as_ref()?;
        let check = |s: Option<Span>, len: usize, side: &str| match s {
            None => Ok(0..0),
            Some(s) if s.is_valid_for(len) => Ok(s.range()),
            Some(s) => Err(format!("{side} span {s} out of bounds for {len} tokens")),
        };
        Some(
            spans
                .iter()
                .map(|p| {
                    Ok((
                        check(p.premise, self.premise.len(), "premise")?,
                        check(p.hypothesis, self.hypothesis.len(), "hypothesis")?,
                    ))
                })
                .collect(),
        )
    }
}

/// Reads line-delimited JSON pairs: `{"premise": tokens or text,
/// "hypothesis": …, "label": str, "id": str, "spans": [{"premise": [s, e],
/// "hypothesis": [s, e]}]}`. Only `premise` and `hypothesis` are required;
/// text is split on whitespace.
pub fn read_pairs(text: &str) -> Result<Vec<NliPair>, TaskgenError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawPair = serde_json::from_str(line)
            .map_err(|e| TaskgenError::Pairs { line: i + 1, message: e.to_string() })?;
        out.push(NliPair {
            id: raw.id,
            premise: raw.premise.tokens(),
            hypothesis: raw.hypothesis.tokens(),
            label: raw.label,
            spans: raw.spans,
        });
    }
    Ok(out)
}
