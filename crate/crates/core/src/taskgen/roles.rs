use std::fmt;

use super::DepTree;
use crate::data::{Span, SpanTarget};

/// Semantic-graph role of a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Concept,
    Relation,
    Modifier,
    None,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Concept => "concept",
            Role::Relation => "relation",
            Role::Modifier => "modifier",
            Role::None => "none",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub(crate) const ARGUMENT_RELS: [&str; 5] = ["nsubj", "obj", "iobj", "obl", "nmod"];
const MODIFIER_RELS: [&str; 4] = ["amod", "advmod", "nummod", "compound"];

/// Rule-based roles from part of speech and dependency relation:
///
/// * relation: verbs, copulas and auxiliaries that head a clause,
///   adpositions, and the infinitive marker (`PART` attached as `mark`);
/// * concept: nominal arguments (`NOUN`/`PROPN`/`PRON` attached as
///   `nsubj`, `obj`, `iobj`, `obl` or `nmod`);
/// * modifier: `amod`, `advmod`, `nummod` and `compound` dependents;
/// * everything else: none.
pub fn assign_roles(tree: &DepTree) -> Vec<Role> {
    (0..tree.len())
        .map(|i| {
            let t = &tree.tokens[i];
            let rel = t.base_deprel();
            let upos = t.upos.as_str();
            let heads_clause = || !tree.children(i).is_empty() && rel != "aux";
            if upos == "VERB"
                || (upos == "AUX" && (rel == "cop" || heads_clause()))
                || upos == "ADP"
                || (upos == "PART" && rel == "mark")
            {
                Role::Relation
            } else if matches!(upos, "NOUN" | "PROPN" | "PRON") && ARGUMENT_RELS.contains(&rel) {
                Role::Concept
            } else if MODIFIER_RELS.contains(&rel) {
                Role::Modifier
            } else {
                Role::None
            }
        })
        .collect()
}

/// Edge label for a (dependent, head) role pair, or `None` for pairs outside
/// the label set.
pub fn semgraph_label(dependent: Role, head: Role) -> Option<String> {
    match (dependent, head) {
        (Role::None, _) | (_, Role::None) => None,
        (Role::Concept, Role::Concept) | (Role::Modifier, Role::Modifier) => None,
        (d, h) => Some(format!("{d}-to-{h}")),
    }
}

/// One edge target per dependency arc whose ends both carry a role: span1 is
/// the dependent, span2 the head.
pub fn build_semgraph(tree: &DepTree) -> Vec<SpanTarget> {
    let roles = assign_roles(tree);
    (0..tree.len())
        .filter_map(|d| {
            let h = tree.head_of(d)?;
            let label = semgraph_label(roles[d], roles[h])?;
            Some(SpanTarget::edge(Span::new(d, d + 1), Span::new(h, h + 1), label))
        })
        .collect()
}
