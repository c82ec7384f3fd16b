use std::ops::Range;

use serde::{Deserialize, Serialize};

/// How tokens are compared when aligning two sentences.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffMode {
    /// Byte equality.
    Exact,
    /// Byte equality, except that the articles "a" and "an" match each
    /// other (in either case), so a changed noun does not drag its article
    /// into the changed span.
    #[default]
    Articles,
}

impl DiffMode {
    fn same(self, a: &str, b: &str) -> bool {
        if a == b {
            return true;
        }
        self == DiffMode::Articles && is_indefinite(a) && is_indefinite(b)
    }
}

fn is_indefinite(t: &str) -> bool {
    t.eq_ignore_ascii_case("a") || t.eq_ignore_ascii_case("an")
}

/// A maximal changed region: `a[a]` was replaced by `b[b]`. Either side may
/// be empty (pure insertion or deletion), never both.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangedPair {
    pub a: Range<usize>,
    pub b: Range<usize>,
}

/// Aligns `a` and `b` by longest common subsequence and returns the changed
/// regions between matched tokens, in order.
///
/// Common prefixes and suffixes are matched first; inside the remaining
/// window, ties between equally long alignments prefer matching earlier
/// tokens.
///
/// ```
/// use probekit::taskgen::{diff_spans, DiffMode};
/// let a = ["The", "man", "is", "holding", "a", "saxophone"];
/// let b = ["The", "man", "is", "holding", "an", "instrument"];
/// let pairs = diff_spans(&a, &b, DiffMode::Articles);
/// assert_eq!((pairs[0].a.clone(), pairs[0].b.clone()), (5..6, 5..6));
/// ```
pub fn diff_spans<S: AsRef<str>>(a: &[S], b: &[S], mode: DiffMode) -> Vec<ChangedPair> {
    let eq = |i: usize, j: usize| mode.same(a[i].as_ref(), b[j].as_ref());
    let mut pre = 0;
    while pre < a.len() && pre < b.len() && eq(pre, pre) {
        pre += 1;
    }
    let mut suf = 0;
    while suf < a.len() - pre && suf < b.len() - pre && eq(a.len() - 1 - suf, b.len() - 1 - suf) {
        suf += 1;
    }
    let (a_end, b_end) = (a.len() - suf, b.len() - suf);
    let (n, m) = (a_end - pre, b_end - pre);

    // lcs[i][j] = LCS length of a[pre+i..a_end] and b[pre+j..b_end]
    let mut lcs = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i][j] = if eq(pre + i, pre + j) {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }

    let mut pairs = Vec::new();
    let (mut i, mut j) = (0, 0);
    let (mut gap_i, mut gap_j) = (0, 0);
    let flush = |gi: usize, gj: usize, i: usize, j: usize, pairs: &mut Vec<ChangedPair>| {
        if gi < i || gj < j {
            pairs.push(ChangedPair { a: pre + gi..pre + i, b: pre + gj..pre + j });
        }
    };
    while i < n && j < m {
        if eq(pre + i, pre + j) && lcs[i][j] == lcs[i + 1][j + 1] + 1 {
            flush(gap_i, gap_j, i, j, &mut pairs);
            i += 1;
            j += 1;
            gap_i = i;
            gap_j = j;
        } else if lcs[i + 1][j] >= lcs[i][j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    flush(gap_i, gap_j, n, m, &mut pairs);
    pairs
}

/// Rebuilds `b` from `a` and the pairs. Tokens outside the pairs come from
/// `a`, so in [`DiffMode::Articles`] a swapped article keeps its `a` form.
pub fn apply_pairs<S: AsRef<str>>(a: &[S], b: &[S], pairs: &[ChangedPair]) -> Vec<String> {
    let mut out = Vec::new();
    let mut pos = 0;
    for p in pairs {
        out.extend(a[pos..p.a.start].iter().map(|s| s.as_ref().to_string()));
        out.extend(b[p.b.clone()].iter().map(|s| s.as_ref().to_string()));
        pos = p.a.end;
    }
    out.extend(a[pos..].iter().map(|s| s.as_ref().to_string()));
    out
}
