use std::collections::BTreeMap;
use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use super::DepTree;

/// Monotonicity mark of a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    /// ↑
    Up,
    /// ↓
    Down,
    /// =
    None,
}

impl Polarity {
    pub fn label(self) -> &'static str {
        match self {
            Polarity::Up => "Monotone",
            Polarity::Down => "Antitone",
            Polarity::None => "None",
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Polarity::Up => '↑',
            Polarity::Down => '↓',
            Polarity::None => '=',
        }
    }

    pub fn from_symbol(c: char) -> Option<Polarity> {
        match c {
            '↑' => Some(Polarity::Up),
            '↓' => Some(Polarity::Down),
            '=' => Some(Polarity::None),
            _ => None,
        }
    }
}

/// Composition: ↓ flips, = absorbs.
impl Mul for Polarity {
    type Output = Polarity;

    fn mul(self, rhs: Polarity) -> Polarity {
        match (self, rhs) {
            (Polarity::None, _) | (_, Polarity::None) => Polarity::None,
            (a, b) if a == b => Polarity::Up,
            _ => Polarity::Down,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// What a lexicon entry does to its surroundings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operator {
    /// A determiner: polarity of its noun (the restrictor) and of the
    /// noun's predicate (the scope).
    Quantifier { restrictor: Polarity, scope: Polarity },
    /// Negation: flips its head and the material to its right.
    Flip,
    /// Negative quantifier pronoun (`nobody`, `nothing`): flips its predicate.
    NegativePronoun,
    /// `if` as a clause marker: flips the antecedent clause.
    Conditional,
    /// `without` as a case marker: flips its complement.
    Privative,
}

/// Lowercased lemma → operator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarityLexicon {
    pub entries: BTreeMap<String, Operator>,
}

impl Default for PolarityLexicon {
    fn default() -> Self {
        use Polarity::{Down, Up};
        let mut entries = BTreeMap::new();
        let q = |restrictor, scope| Operator::Quantifier { restrictor, scope };
        for w in ["every", "all", "each"] {
            entries.insert(w.to_string(), q(Down, Up));
        }
        for w in ["some", "a", "an", "several"] {
            entries.insert(w.to_string(), q(Up, Up));
        }
        for w in ["no", "few"] {
            entries.insert(w.to_string(), q(Down, Down));
        }
        for w in ["not", "n't", "never"] {
            entries.insert(w.to_string(), Operator::Flip);
        }
        for w in ["nobody", "nothing"] {
            entries.insert(w.to_string(), Operator::NegativePronoun);
        }
        entries.insert("if".into(), Operator::Conditional);
        entries.insert("without".into(), Operator::Privative);
        PolarityLexicon { entries }
    }
}

impl PolarityLexicon {
    /// Looks a word up by lemma, then by form, both lowercased.
    pub fn lookup(&self, lemma: &str, form: &str) -> Option<Operator> {
        let key = |s: &str| s.to_lowercase();
        self.entries
            .get(&key(lemma))
            .or_else(|| self.entries.get(&key(form)))
            .copied()
    }
}

/// Treatment of proper nouns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropnPolicy {
    /// Multi-word proper-name runs (PROPN words joined by `compound`, `flat`
    /// or `fixed`) are marked `=`; single proper nouns keep their context.
    #[default]
    NameRuns,
    /// Every PROPN word is marked `=`.
    All,
    /// Proper nouns are treated like any other word.
    Inherit,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarityOptions {
    #[serde(default)]
    pub propn: PropnPolicy,
}

fn is_subject(rel: &str) -> bool {
    matches!(rel, "nsubj" | "csubj" | "expl")
}

/// Marks every word of `tree` ↑, ↓ or =.
///
/// The context starts upward at the root. Each operator multiplies the
/// polarity of a set of words:
///
/// * quantifier determiner on noun `n` with head `h`: `n` and its other
///   dependents by the restrictor polarity; `h` and its other dependents
///   (subjects excluded unless `n` is one) by the scope polarity;
/// * negation attached to `h`: `h` and the dependents of `h` to the right of
///   the negation;
/// * negative pronoun attached to `h`: `h` and its other dependents, with the
///   same subject exclusion as quantifiers;
/// * `if` marking an adverbial clause, `without` marking a nominal: that
///   clause or nominal.
///
/// The operator words themselves keep their context. Constructions outside
/// this list inherit the current polarity, so every word gets a mark.
///
/// ```
/// use probekit::taskgen::*;
/// let text = "1\tEvery\tevery\tDET\t_\t_\t2\tdet\t_\t_\n\
///             2\tdog\tdog\tNOUN\t_\t_\t3\tnsubj\t_\t_\n\
///             3\truns\trun\tVERB\t_\t_\t0\troot\t_\t_\n\n";
/// let tree = &parse_conllu(text).unwrap()[0];
/// let marks = polarize(tree, &PolarityLexicon::default(), &PolarityOptions::default());
/// assert_eq!(marks, [Polarity::Up, Polarity::Down, Polarity::Up]);
/// ```
pub fn polarize(tree: &DepTree, lex: &PolarityLexicon, options: &PolarityOptions) -> Vec<Polarity> {
    let n = tree.len();
    let mut marks = vec![Polarity::Up; n];
    let mut apply = |words: &[usize], p: Polarity| {
        for &w in words {
            marks[w] = marks[w] * p;
        }
    };
    let subtree_except = |root: usize, skip: usize| -> Vec<usize> {
        tree.subtree(root).into_iter().filter(|&w| !tree.dominates(skip, w)).collect()
    };
    // `h` plus its dependents' subtrees, leaving out `operand` and, unless
    // `operand` is itself a subject, the subjects of `h`
    let predicate_scope = |h: usize, operand: usize| -> Vec<usize> {
        let operand_is_subject = is_subject(tree.tokens[operand].base_deprel());
        let mut words = vec![h];
        for c in tree.children(h) {
            if c == operand || (!operand_is_subject && is_subject(tree.tokens[c].base_deprel())) {
                continue;
            }
            words.extend(tree.subtree(c));
        }
        words
    };

    for i in 0..n {
        let t = &tree.tokens[i];
        let Some(op) = lex.lookup(&t.lemma, &t.form) else {
            continue;
        };
        let head = tree.head_of(i);
        match (op, head) {
            (Operator::Quantifier { restrictor, scope }, Some(noun)) if t.base_deprel() == "det" => {
                apply(&subtree_except(noun, i), restrictor);
                if let Some(h) = tree.head_of(noun) {
                    apply(&predicate_scope(h, noun), scope);
                }
            }
            (Operator::Flip, Some(h)) => {
                let mut words = vec![h];
                for c in tree.children(h) {
                    if c > i {
                        words.extend(tree.subtree(c));
                    }
                }
                apply(&words, Polarity::Down);
            }
            (Operator::NegativePronoun, Some(h)) => apply(&predicate_scope(h, i), Polarity::Down),
            (Operator::Conditional, Some(clause))
                if t.base_deprel() == "mark" && tree.tokens[clause].base_deprel() == "advcl" =>
            {
                apply(&subtree_except(clause, i), Polarity::Down);
            }
            (Operator::Privative, Some(noun)) if t.base_deprel() == "case" => {
                apply(&subtree_except(noun, i), Polarity::Down);
            }
            _ => {}
        }
    }

    match options.propn {
        PropnPolicy::Inherit => {}
        PropnPolicy::All => {
            for (i, t) in tree.tokens.iter().enumerate() {
                if t.upos == "PROPN" {
                    marks[i] = Polarity::None;
                }
            }
        }
        PropnPolicy::NameRuns => {
            for (i, t) in tree.tokens.iter().enumerate() {
                let Some(h) = tree.head_of(i) else { continue };
                let joined = matches!(t.base_deprel(), "compound" | "flat" | "fixed");
                if joined && t.upos == "PROPN" && tree.tokens[h].upos == "PROPN" {
                    marks[i] = Polarity::None;
                    marks[h] = Polarity::None;
                }
            }
        }
    }
    marks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_table() {
        use Polarity::*;
        assert_eq!(Up * Up, Up);
        assert_eq!(Up * Down, Down);
        assert_eq!(Down * Down, Up);
        assert_eq!(Down * None, None);
        assert_eq!(None * Up, None);
    }

    #[test]
    fn symbols_round_trip() {
        for p in [Polarity::Up, Polarity::Down, Polarity::None] {
            assert_eq!(Polarity::from_symbol(p.symbol()), Some(p));
        }
    }

    #[test]
    fn lexicon_covers_shipped_words() {
        let lex = PolarityLexicon::default();
        for w in [
            "every", "all", "each", "some", "a", "an", "several", "no", "few", "not", "n't", "never",
            "nobody", "nothing", "if", "without",
        ] {
            assert!(lex.lookup(w, w).is_some(), "{w}");
        }
        assert!(lex.lookup("Every", "Every").is_some());
        assert_eq!(lex.lookup("dog", "dog"), None);
    }
}
