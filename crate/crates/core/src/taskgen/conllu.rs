use std::fmt;

use super::TaskgenError;

/// One syntactic word of a CoNLL-U sentence. `head` is 1-based with 0 for
/// the root, exactly as in the file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConlluToken {
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub feats: String,
    pub head: usize,
    pub deprel: String,
    pub deps: String,
    pub misc: String,
}

impl ConlluToken {
    /// Token with `_` in the columns a dependency tree does not need.
    pub fn new(form: &str, upos: &str, head: usize, deprel: &str) -> ConlluToken {
        ConlluToken {
            form: form.into(),
            lemma: form.to_lowercase(),
            upos: upos.into(),
            xpos: "_".into(),
            feats: "_".into(),
            head,
            deprel: deprel.into(),
            deps: "_".into(),
            misc: "_".into(),
        }
    }

    /// Relation without its subtype: `nsubj:pass` → `nsubj`.
    pub fn base_deprel(&self) -> &str {
        self.deprel.split(':').next().unwrap_or("")
    }

    /// Value of a `Key=Value` entry in the MISC column.
    pub fn misc_value(&self, key: &str) -> Option<&str> {
        self.misc
            .split('|')
            .filter_map(|kv| kv.split_once('='))
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v)
    }
}

/// A dependency-parsed sentence. Word lines only: multiword-token ranges and
/// empty nodes are dropped when parsing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepTree {
    /// Comment lines without the leading `#`, in file order.
    pub comments: Vec<String>,
    pub tokens: Vec<ConlluToken>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeViolation {
    Empty,
    MultipleRoots { tokens: Vec<usize> },
    HeadOutOfRange { token: usize, head: usize },
    Cycle { token: usize },
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeViolation::Empty => f.write_str("sentence has no words"),
            TreeViolation::MultipleRoots { tokens } => write!(f, "multiple roots at ids {tokens:?}"),
            TreeViolation::HeadOutOfRange { token, head } => {
                write!(f, "token {token} has head {head} outside the sentence")
            }
            TreeViolation::Cycle { token } => write!(f, "cycle through token {token}"),
        }
    }
}

impl DepTree {
    /// Builds and validates a tree.
    pub fn new(comments: Vec<String>, tokens: Vec<ConlluToken>) -> Result<DepTree, TreeViolation> {
        let t = DepTree { comments, tokens };
        t.check()?;
        Ok(t)
    }

    /// Single root, heads in range, no cycles. Ids in violations are 1-based.
    pub fn check(&self) -> Result<(), TreeViolation> {
        let n = self.tokens.len();
        if n == 0 {
            return Err(TreeViolation::Empty);
        }
        for (i, t) in self.tokens.iter().enumerate() {
            if t.head > n {
                return Err(TreeViolation::HeadOutOfRange { token: i + 1, head: t.head });
            }
        }
        let roots: Vec<usize> =
            self.tokens.iter().enumerate().filter(|(_, t)| t.head == 0).map(|(i, _)| i + 1).collect();
        match roots.len() {
            // every head is in range, so a rootless sentence contains a cycle
            0 => return Err(TreeViolation::Cycle { token: self.cycle_member().unwrap_or(1) }),
            1 => {}
            _ => return Err(TreeViolation::MultipleRoots { tokens: roots }),
        }
        match self.cycle_member() {
            Some(token) => Err(TreeViolation::Cycle { token }),
            None => Ok(()),
        }
    }

    /// A word on a cycle, if any (1-based).
    fn cycle_member(&self) -> Option<usize> {
        let n = self.tokens.len();
        for start in 0..n {
            let mut cur = start;
            let mut steps = 0;
            while self.tokens[cur].head != 0 {
                cur = self.tokens[cur].head - 1;
                steps += 1;
                if steps > n {
                    return Some(cur + 1);
                }
            }
        }
        None
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn forms(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.form.clone()).collect()
    }

    /// 0-based index of the root word.
    pub fn root(&self) -> usize {
        self.tokens.iter().position(|t| t.head == 0).expect("validated tree has a root")
    }

    /// 0-based head of word `i`, or `None` for the root.
    pub fn head_of(&self, i: usize) -> Option<usize> {
        self.tokens[i].head.checked_sub(1)
    }

    /// 0-based dependents of word `i` in sentence order.
    pub fn children(&self, i: usize) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.head_of(j) == Some(i)).collect()
    }

    /// Word `i` and all its descendants, in sentence order.
    pub fn subtree(&self, i: usize) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.dominates(i, j)).collect()
    }

    /// True when `a` is `b` or an ancestor of `b`.
    pub fn dominates(&self, a: usize, b: usize) -> bool {
        let mut cur = Some(b);
        while let Some(c) = cur {
            if c == a {
                return true;
            }
            cur = self.head_of(c);
        }
        false
    }

    /// Value of a `# key = value` comment.
    pub fn comment_value(&self, key: &str) -> Option<&str> {
        self.comments.iter().find_map(|c| {
            let (k, v) = c.split_once('=')?;
            (k.trim() == key).then(|| v.trim())
        })
    }

    pub fn sent_id(&self) -> Option<&str> {
        self.comment_value("sent_id")
    }
}

fn parse_head(field: &str, line: usize) -> Result<usize, TaskgenError> {
    field
        .parse()
        .map_err(|_| TaskgenError::conllu(line, format!("HEAD {field:?} is not an integer")))
}

/// Parses CoNLL-U text into validated trees.
///
/// ```
/// let text = "# sent_id = s1\n1\tDogs\tdog\tNOUN\t_\t_\t2\tnsubj\t_\t_\n2\tbark\tbark\tVERB\t_\t_\t0\troot\t_\t_\n\n";
/// let trees = probekit::taskgen::parse_conllu(text).unwrap();
/// assert_eq!(trees[0].sent_id(), Some("s1"));
/// assert_eq!(trees[0].root(), 1);
/// ```
pub fn parse_conllu(text: &str) -> Result<Vec<DepTree>, TaskgenError> {
    let mut trees = Vec::new();
    let mut comments = Vec::new();
    let mut tokens: Vec<ConlluToken> = Vec::new();
    let mut lines_of: Vec<usize> = Vec::new();
    let mut start_line = 1;

    let mut finish = |comments: &mut Vec<String>,
                      tokens: &mut Vec<ConlluToken>,
                      lines_of: &mut Vec<usize>,
                      start_line: usize|
     -> Result<(), TaskgenError> {
        if tokens.is_empty() {
            if !comments.is_empty() {
                return Err(TaskgenError::conllu(start_line, "sentence has comments but no words"));
            }
            return Ok(());
        }
        let tree = DepTree {
            comments: std::mem::take(comments),
            tokens: std::mem::take(tokens),
        };
        let lines = std::mem::take(lines_of);
        tree.check().map_err(|v| {
            let line = match &v {
                TreeViolation::HeadOutOfRange { token, .. } | TreeViolation::Cycle { token } => lines[token - 1],
                TreeViolation::MultipleRoots { tokens } => lines[tokens[1] - 1],
                TreeViolation::Empty => start_line,
            };
            TaskgenError::conllu(line, v.to_string())
        })?;
        trees.push(tree);
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            finish(&mut comments, &mut tokens, &mut lines_of, start_line)?;
            start_line = line_no + 1;
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if !tokens.is_empty() {
                return Err(TaskgenError::conllu(line_no, "comment inside a sentence"));
            }
            comments.push(c.strip_prefix(' ').unwrap_or(c).to_string());
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(TaskgenError::conllu(line_no, format!("expected 10 columns, found {}", cols.len())));
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        let id: usize = id
            .parse()
            .map_err(|_| TaskgenError::conllu(line_no, format!("bad ID {id:?}")))?;
        if id != tokens.len() + 1 {
            return Err(TaskgenError::conllu(
                line_no,
                format!("expected word id {}, found {id}", tokens.len() + 1),
            ));
        }
        tokens.push(ConlluToken {
            form: cols[1].into(),
            lemma: cols[2].into(),
            upos: cols[3].into(),
            xpos: cols[4].into(),
            feats: cols[5].into(),
            head: parse_head(cols[6], line_no)?,
            deprel: cols[7].into(),
            deps: cols[8].into(),
            misc: cols[9].into(),
        });
        lines_of.push(line_no);
    }
    finish(&mut comments, &mut tokens, &mut lines_of, start_line)?;
    Ok(trees)
}

/// Writes trees back as CoNLL-U, one blank line after each sentence.
pub fn emit_conllu(trees: &[DepTree]) -> String {
    let mut out = String::new();
    for tree in trees {
        for c in &tree.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        for (i, t) in tree.tokens.iter().enumerate() {
            let head = t.head.to_string();
            let id = (i + 1).to_string();
            let cols = [
                id.as_str(),
                &t.form,
                &t.lemma,
                &t.upos,
                &t.xpos,
                &t.feats,
                &head,
                &t.deprel,
                &t.deps,
                &t.misc,
            ];
            out.push_str(&cols.join("\t"));
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, form: &str, head: &str, rel: &str) -> String {
        format!("{id}\t{form}\t{}\tX\t_\t_\t{head}\t{rel}\t_\t_\n", form.to_lowercase())
    }

    #[test]
    fn two_sentences() {
        let text = format!(
            "# sent_id = a\n{}{}\n# sent_id = b\n# text = x y z\n{}{}{}\n",
            row("1", "Dogs", "2", "nsubj"),
            row("2", "bark", "0", "root"),
            row("1", "x", "0", "root"),
            row("2", "y", "1", "obj"),
            row("3", "z", "1", "punct"),
        );
        let trees = parse_conllu(&text).unwrap();
        assert_eq!(trees.len(), 2);
        assert_eq!(trees[0].len(), 2);
        assert_eq!(trees[1].len(), 3);
        assert_eq!(trees[1].comment_value("text"), Some("x y z"));
        assert_eq!(emit_conllu(&trees), text);
    }

    #[test]
    fn multiword_and_empty_nodes_are_skipped() {
        let text = format!(
            "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n{}{}2.1\tghost\t_\t_\t_\t_\t_\t_\t_\t_\n{}\n",
            row("1", "do", "3", "aux"),
            row("2", "n't", "3", "advmod"),
            row("3", "go", "0", "root"),
        );
        let trees = parse_conllu(&text).unwrap();
        assert_eq!(trees[0].forms(), vec!["do", "n't", "go"]);
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let text = format!("{}{}\n", row("1", "a", "1", "dep"), row("2", "b", "0", "root"));
        let err = parse_conllu(&text).unwrap_err().to_string();
        assert!(err.contains("line 1") && err.contains("cycle"), "{err}");
    }

    #[test]
    fn structural_errors_carry_lines() {
        let two_roots = format!("\n{}{}\n", row("1", "a", "0", "root"), row("2", "b", "0", "root"));
        let err = parse_conllu(&two_roots).unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("multiple roots"), "{err}");

        let short = "1\ta\t_\t_\t_\t0\troot\n";
        assert!(parse_conllu(short).unwrap_err().to_string().contains("10 columns"));

        let loop2 = format!("{}{}{}\n", row("1", "a", "2", "dep"), row("2", "b", "1", "dep"), row("3", "c", "0", "root"));
        assert!(parse_conllu(&loop2).unwrap_err().to_string().contains("cycle"));

        let far = format!("{}{}\n", row("1", "a", "0", "root"), row("2", "b", "9", "dep"));
        assert!(parse_conllu(&far).unwrap_err().to_string().contains("line 2"));
    }

    #[test]
    fn tree_navigation() {
        let text = format!(
            "{}{}{}{}\n",
            row("1", "the", "2", "det"),
            row("2", "dog", "3", "nsubj"),
            row("3", "ran", "0", "root"),
            row("4", "home", "3", "obl"),
        );
        let t = &parse_conllu(&text).unwrap()[0];
        assert_eq!(t.root(), 2);
        assert_eq!(t.children(2), vec![1, 3]);
        assert_eq!(t.subtree(1), vec![0, 1]);
        assert!(t.dominates(2, 0));
        assert!(!t.dominates(1, 3));
        assert_eq!(t.tokens[1].base_deprel(), "nsubj");
    }
}
