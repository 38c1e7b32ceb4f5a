//! Enumeration of idempotent-composable tensor words.
//!
//! Words are stored right-to-left: `w[0]` is the rightmost (first-applied)
//! letter, so `w` represents `a_d ⊗ … ⊗ a_1` with `w[k] = a_{k+1}`.
//! Composability means `source(w[k+1]) = target(w[k])` for every `k`.

use crate::graded::GradedSpace;

/// All composable words of exactly `len` letters drawn from `allowed`
/// (indices into `space`), in lexicographic order of index sequences.
///
/// `len = 0` yields one empty word.
pub fn composable_words(space: &GradedSpace, allowed: &[usize], len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    extend(space, allowed, len, &mut cur, &mut out, None);
    out
}

/// Composable words whose rightmost letter has source idempotent `source`.
pub fn composable_words_from(
    space: &GradedSpace,
    allowed: &[usize],
    len: usize,
    source: usize,
) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    extend(space, allowed, len, &mut cur, &mut out, Some(source));
    out
}

/// Composable words whose leftmost (last-applied) letter has target
/// idempotent `target`.
pub fn composable_words_to(
    space: &GradedSpace,
    allowed: &[usize],
    len: usize,
    target: usize,
) -> Vec<Vec<usize>> {
    // Grow from the last-applied end, then flip back to storage order.
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    extend_back(space, allowed, len, &mut cur, &mut out, target);
    for w in &mut out {
        w.reverse();
    }
    out.sort();
    out
}

fn extend_back(
    space: &GradedSpace,
    allowed: &[usize],
    len: usize,
    cur: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    target: usize,
) {
    if cur.len() == len {
        out.push(cur.clone());
        return;
    }
    let need_target = if cur.is_empty() {
        target
    } else {
        space.element(*cur.last().unwrap()).source
    };
    for &i in allowed {
        if space.element(i).target != need_target {
            continue;
        }
        cur.push(i);
        extend_back(space, allowed, len, cur, out, target);
        cur.pop();
    }
}

fn extend(
    space: &GradedSpace,
    allowed: &[usize],
    len: usize,
    cur: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    source: Option<usize>,
) {
    if cur.len() == len {
        out.push(cur.clone());
        return;
    }
    let need_source = if cur.is_empty() {
        source
    } else {
        Some(space.element(*cur.last().unwrap()).target)
    };
    for &i in allowed {
        let el = space.element(i);
        if let Some(s) = need_source {
            if el.source != s {
                continue;
            }
        }
        cur.push(i);
        extend(space, allowed, len, cur, out, source);
        cur.pop();
    }
}

/// Total degree of a word (sum of element degrees).
pub fn word_degree(space: &GradedSpace, word: &[usize]) -> i64 {
    word.iter().map(|&i| space.degree(i)).sum()
}

/// Sum of reduced degrees `‖a‖ = |a| − 1` over the word — the exponent that
/// governs bar-side Koszul signs.
pub fn word_reduced_degree(space: &GradedSpace, word: &[usize]) -> i64 {
    word.iter().map(|&i| space.reduced_degree(i)).sum()
}

/// Total weight of a word, `None` if any letter is unweighted.
pub fn word_weight(space: &GradedSpace, word: &[usize]) -> Option<i64> {
    word.iter().map(|&i| space.element(i).weight).sum()
}
