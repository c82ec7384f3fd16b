use std::collections::{BTreeMap, HashSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pairs::Alignment;
use super::roles::ARGUMENT_RELS;
use super::{
    build_semgraph, diff_spans, polarize, DepTree, DiffMode, NliPair, PolarityLexicon, PolarityOptions,
    TaskgenError,
};
use crate::data::{Dataset, ProbingExample, Span, SpanTarget, Split, TaskName, TaskSchema, SEPARATOR};
use crate::hash::seeded_hash;

/// Generation settings shared by all tasks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenOptions {
    pub seed: u64,
    pub lexicon: PolarityLexicon,
    pub polarity: PolarityOptions,
    pub diff: DiffMode,
    /// Keep only pairs with this NLI label.
    pub label_filter: Option<String>,
    /// SA-ST: splice the aligned premise phrase of another, seeded-random
    /// pair into each premise as an unaligned distractor.
    pub distractors: bool,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            seed: 0,
            lexicon: PolarityLexicon::default(),
            polarity: PolarityOptions::default(),
            diff: DiffMode::default(),
            label_filter: None,
            distractors: true,
        }
    }
}

/// Source material for a generator.
#[derive(Clone, Copy, Debug)]
pub enum TaskInput<'a> {
    Trees(&'a [DepTree]),
    Pairs(&'a [NliPair]),
}

/// Builds a dataset of `kind` (split `Train`; use [`split_dataset`] to cut
/// train and test sets). Inputs that yield no targets are skipped.
///
/// * SemGraph, Monotonicity, SA-AP read dependency trees;
/// * SA-Lex, ContraSig, SA-ST, SA-RK read sentence pairs.
pub fn emit_task_dataset(
    kind: TaskName,
    input: TaskInput<'_>,
    options: &GenOptions,
) -> Result<Dataset, TaskgenError> {
    let schema = TaskSchema::builtin(kind);
    let examples = match (kind, input) {
        (TaskName::SemGraph, TaskInput::Trees(trees)) => semgraph(trees),
        (TaskName::Monotonicity, TaskInput::Trees(trees)) => monotonicity(trees, options),
        (TaskName::SaAp, TaskInput::Trees(trees)) => anaphora(trees)?,
        (TaskName::SaLex, TaskInput::Pairs(pairs)) => lexical(pairs, options)?,
        (TaskName::ContraSig | TaskName::SaSt | TaskName::SaRk, TaskInput::Pairs(pairs)) => {
            vertex_recast(kind, pairs, options)?
        }
        (kind, TaskInput::Trees(_)) => {
            return Err(TaskgenError::Input(format!("{kind} is built from sentence pairs, not trees")))
        }
        (kind, TaskInput::Pairs(_)) => {
            return Err(TaskgenError::Input(format!("{kind} is built from dependency trees, not pairs")))
        }
    };
    Ok(Dataset::new(schema, Split::Train, examples))
}

/// Assigns ids: the source id when present and unused, else `prefix-index`.
struct Ids {
    prefix: &'static str,
    used: HashSet<String>,
}

impl Ids {
    fn new(prefix: &'static str) -> Ids {
        Ids { prefix, used: HashSet::new() }
    }

    fn next(&mut self, source: Option<&str>, index: usize) -> String {
        let mut id = match source {
            Some(s) if !s.is_empty() => s.to_string(),
            _ => format!("{}-{index}", self.prefix),
        };
        let mut k = 1;
        while self.used.contains(&id) {
            id = format!("{}-{index}-{k}", self.prefix);
            k += 1;
        }
        self.used.insert(id.clone());
        id
    }
}

fn semgraph(trees: &[DepTree]) -> Vec<ProbingExample> {
    let mut ids = Ids::new("semgraph");
    let mut out = Vec::new();
    for (i, tree) in trees.iter().enumerate() {
        let targets = build_semgraph(tree);
        if targets.is_empty() {
            continue;
        }
        out.push(ProbingExample { id: ids.next(tree.sent_id(), i), targets, tokens: tree.forms() });
    }
    out
}

fn monotonicity(trees: &[DepTree], options: &GenOptions) -> Vec<ProbingExample> {
    let mut ids = Ids::new("mono");
    trees
        .iter()
        .enumerate()
        .map(|(i, tree)| {
            let marks = polarize(tree, &options.lexicon, &options.polarity);
            let targets = marks
                .iter()
                .enumerate()
                .map(|(j, p)| SpanTarget::vertex(Span::new(j, j + 1), p.label()))
                .collect();
            ProbingExample { id: ids.next(tree.sent_id(), i), targets, tokens: tree.forms() }
        })
        .collect()
}

/// Pronouns carry `Antecedent=<word id>` in MISC. Each earlier nominal
/// argument is paired with the pronoun: `Aligned` for the annotated
/// antecedent, `Unaligned` otherwise.
fn anaphora(trees: &[DepTree]) -> Result<Vec<ProbingExample>, TaskgenError> {
    let mut ids = Ids::new("anaphora");
    let mut out = Vec::new();
    for (i, tree) in trees.iter().enumerate() {
        let mut targets = Vec::new();
        for (p, tok) in tree.tokens.iter().enumerate() {
            let Some(value) = tok.misc_value("Antecedent") else { continue };
            let where_ = || format!("{} word {}", tree.sent_id().unwrap_or("sentence"), p + 1);
            let ante: usize = value
                .parse()
                .map_err(|_| TaskgenError::Annotation(format!("{}: bad Antecedent {value:?}", where_())))?;
            if ante == 0 || ante > tree.len() || ante - 1 == p {
                return Err(TaskgenError::Annotation(format!("{}: Antecedent {ante} is not another word", where_())));
            }
            let ante = ante - 1;
            for c in 0..p {
                let t = &tree.tokens[c];
                let candidate = matches!(t.upos.as_str(), "NOUN" | "PROPN")
                    && ARGUMENT_RELS.contains(&t.base_deprel());
                if candidate || c == ante {
                    let label = if c == ante { "Aligned" } else { "Unaligned" };
                    targets.push(SpanTarget::edge(Span::new(c, c + 1), Span::new(p, p + 1), label));
                }
            }
        }
        if !targets.is_empty() {
            out.push(ProbingExample { id: ids.next(tree.sent_id(), i), targets, tokens: tree.forms() });
        }
    }
    Ok(out)
}

/// Aligned (premise, hypothesis) ranges of a pair: explicit spans, else the
/// token diff.
fn alignments(pair: &NliPair, mode: DiffMode) -> Result<Vec<Alignment>, TaskgenError> {
    if let Some(explicit) = pair.explicit_ranges() {
        return explicit.map_err(|m| TaskgenError::Annotation(format!("{}: {m}", pair.id.as_deref().unwrap_or("pair"))));
    }
    Ok(diff_spans(&pair.premise, &pair.hypothesis, mode)
        .into_iter()
        .map(|p| (p.a, p.b))
        .collect())
}

fn joined(premise: &[String], hypothesis: &[String], id: &str) -> Result<Vec<String>, TaskgenError> {
    if premise.iter().chain(hypothesis).any(|t| t == SEPARATOR) {
        return Err(TaskgenError::Input(format!("{id}: input already contains {SEPARATOR}")));
    }
    let mut tokens = premise.to_vec();
    tokens.push(SEPARATOR.to_string());
    tokens.extend_from_slice(hypothesis);
    Ok(tokens)
}

fn keep(pair: &NliPair, options: &GenOptions) -> bool {
    match &options.label_filter {
        Some(f) => pair.label.as_deref() == Some(f.as_str()),
        None => true,
    }
}

fn lexical(pairs: &[NliPair], options: &GenOptions) -> Result<Vec<ProbingExample>, TaskgenError> {
    let mut ids = Ids::new("lex");
    let mut out = Vec::new();
    for (i, pair) in pairs.iter().enumerate() {
        if !keep(pair, options) {
            continue;
        }
        let aligned: Vec<Alignment> = alignments(pair, options.diff)?
            .into_iter()
            .filter(|(a, b)| !a.is_empty() && !b.is_empty())
            .collect();
        if aligned.is_empty() {
            continue;
        }
        let id = ids.next(pair.id.as_deref(), i);
        let offset = pair.premise.len() + 1;
        let tokens = joined(&pair.premise, &pair.hypothesis, &id)?;
        let mut targets: Vec<SpanTarget> = aligned
            .iter()
            .map(|(a, b)| {
                SpanTarget::edge(Span::new(a.start, a.end), Span::new(b.start, b.end).shifted(offset), "Aligned")
            })
            .collect();

        // negative: an unchanged premise word against the first hypothesis span
        let (first_a, first_b) = &aligned[0];
        let hyp_words: HashSet<String> = pair.hypothesis[first_b.clone()].iter().map(|t| t.to_lowercase()).collect();
        let src_words: HashSet<String> = pair.premise[first_a.clone()].iter().map(|t| t.to_lowercase()).collect();
        let candidates: Vec<usize> = (0..pair.premise.len())
            .filter(|&k| aligned.iter().all(|(a, _)| !a.contains(&k)))
            .filter(|&k| {
                let w = pair.premise[k].to_lowercase();
                w.chars().any(char::is_alphanumeric) && !hyp_words.contains(&w) && !src_words.contains(&w)
            })
            .collect();
        if !candidates.is_empty() {
            let k = candidates[(seeded_hash(options.seed, "sa-lex-negative", &[&id]) % candidates.len() as u64) as usize];
            targets.push(SpanTarget::edge(
                Span::new(k, k + 1),
                Span::new(first_b.start, first_b.end).shifted(offset),
                "Unaligned",
            ));
        }
        targets.sort_by_key(|t| (t.span1, t.span2));
        out.push(ProbingExample { id, targets, tokens });
    }
    Ok(out)
}

fn vertex_labels(kind: TaskName) -> [&'static str; 3] {
    match kind {
        TaskName::ContraSig => ["Contra-sig1", "Contra-sig2", "None"],
        _ => ["Aligned1", "Aligned2", "Unaligned"],
    }
}

/// Every token except the separator becomes a vertex target: premise-side
/// span tokens get the first label, hypothesis-side span tokens the second,
/// the rest the third.
fn vertex_recast(kind: TaskName, pairs: &[NliPair], options: &GenOptions) -> Result<Vec<ProbingExample>, TaskgenError> {
    let [first, second, other] = vertex_labels(kind);
    let kept: Vec<&NliPair> = pairs.iter().filter(|p| keep(p, options)).collect();
    let all_alignments: Vec<Vec<Alignment>> =
        kept.iter().map(|p| alignments(p, options.diff)).collect::<Result<_, _>>()?;
    let fragment = |j: usize| -> Option<&[String]> {
        let r = all_alignments[j].iter().find(|(a, _)| !a.is_empty())?.0.clone();
        Some(&kept[j].premise[r])
    };

    let mut ids = Ids::new(match kind {
        TaskName::ContraSig => "contrasig",
        TaskName::SaSt => "sentiment",
        _ => "relational",
    });
    let mut out = Vec::new();
    for (i, pair) in kept.iter().enumerate() {
        let aligned = &all_alignments[i];
        if aligned.iter().all(|(a, b)| a.is_empty() && b.is_empty()) {
            continue;
        }
        let id = ids.next(pair.id.as_deref(), i);
        let mut premise_labels = vec![other; pair.premise.len()];
        let mut hyp_labels = vec![other; pair.hypothesis.len()];
        for (a, b) in aligned {
            a.clone().for_each(|k| premise_labels[k] = first);
            b.clone().for_each(|k| hyp_labels[k] = second);
        }
        let mut premise = pair.premise.clone();
        if kind == TaskName::SaSt && options.distractors && kept.len() > 1 {
            let n = kept.len() as u64;
            let mut j = (seeded_hash(options.seed, "sa-st-distractor", &[&id]) % (n - 1)) as usize;
            if j >= i {
                j += 1;
            }
            if let Some(frag) = fragment(j) {
                let at = aligned.iter().filter(|(a, _)| !a.is_empty()).map(|(a, _)| a.end).max().unwrap_or(premise.len());
                premise.splice(at..at, frag.iter().cloned());
                premise_labels.splice(at..at, std::iter::repeat_n(other, frag.len()));
            }
        }
        let tokens = joined(&premise, &pair.hypothesis, &id)?;
        let offset = premise.len() + 1;
        let targets = premise_labels
            .iter()
            .enumerate()
            .chain(hyp_labels.iter().enumerate().map(|(k, l)| (k + offset, l)))
            .map(|(k, l)| SpanTarget::vertex(Span::new(k, k + 1), *l))
            .collect();
        out.push(ProbingExample { id, targets, tokens });
    }
    Ok(out)
}

/// Shuffles examples with `seed` and cuts a train set of `n_train` and a
/// test set of the next `n_test`. Short corpora fill train first.
pub fn split_dataset(d: &Dataset, n_train: usize, n_test: usize, seed: u64) -> (Dataset, Dataset) {
    let mut examples = d.examples.clone();
    examples.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    if examples.len() < n_train + n_test {
        log::warn!(
            "{} examples available, {} train + {} test requested",
            examples.len(),
            n_train,
            n_test
        );
    }
    let test: Vec<ProbingExample> = examples.iter().skip(n_train).take(n_test).cloned().collect();
    examples.truncate(n_train);
    (
        Dataset::new(d.schema.clone(), Split::Train, examples),
        Dataset::new(d.schema.clone(), Split::Test, test),
    )
}

const REPLACEABLE: [&str; 4] = ["NOUN", "VERB", "ADJ", "ADV"];

/// `copies` variants of every tree with the same structure: each noun,
/// verb, adjective and adverb outside the lexicon is swapped for a seeded
/// random word of the same part of speech drawn from the corpus. Heads,
/// relations and operator words are unchanged, so polarity marks carry over.
pub fn replicate_trees(trees: &[DepTree], copies: usize, lex: &PolarityLexicon, seed: u64) -> Vec<DepTree> {
    let replaceable = |t: &super::ConlluToken| {
        REPLACEABLE.contains(&t.upos.as_str()) && lex.lookup(&t.lemma, &t.form).is_none()
    };
    let mut vocab: BTreeMap<&str, Vec<(&str, &str)>> = BTreeMap::new();
    for t in trees.iter().flat_map(|t| &t.tokens) {
        if replaceable(t) {
            let words = vocab.entry(t.upos.as_str()).or_default();
            if !words.contains(&(t.form.as_str(), t.lemma.as_str())) {
                words.push((t.form.as_str(), t.lemma.as_str()));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trees.len() * copies);
    for (i, tree) in trees.iter().enumerate() {
        for k in 0..copies {
            let mut copy = tree.clone();
            for t in copy.tokens.iter_mut().filter(|t| replaceable(t)) {
                if let Some(&(form, lemma)) = vocab[t.upos.as_str()].choose(&mut rng) {
                    t.form = form.to_string();
                    t.lemma = lemma.to_string();
                }
            }
            let base = tree.sent_id().map_or_else(|| format!("s{i}"), str::to_string);
            copy.comments = vec![format!("sent_id = {base}-r{k}")];
            out.push(copy);
        }
    }
    out
}
