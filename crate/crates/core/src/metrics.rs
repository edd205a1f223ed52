//! Word recall, word precision and sequence error.

use std::collections::HashMap;

use crate::text::fold_spaces;

/// One scored transcript.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalPair {
    pub truth: String,
    pub output: String,
}

impl EvalPair {
    pub fn new(truth: impl Into<String>, output: impl Into<String>) -> Self {
        EvalPair {
            truth: truth.into(),
            output: output.into(),
        }
    }

    pub fn swapped(&self) -> Self {
        EvalPair::new(self.output.clone(), self.truth.clone())
    }
}

/// Corpus-level scores, as fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub recall: f64,
    pub precision: f64,
    pub sequence_error: f64,
    pub examples: usize,
}

impl Scores {
    pub fn of(pairs: &[EvalPair]) -> Self {
        Scores {
            recall: word_recall(pairs),
            precision: word_precision(pairs),
            sequence_error: sequence_error(pairs),
            examples: pairs.len(),
        }
    }
}

fn words(s: &str) -> impl Iterator<Item = &str> {
    s.split(' ').filter(|w| !w.is_empty())
}

/// Size of the multiset intersection of the two word lists.
fn matched_words(a: &str, b: &str) -> usize {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for w in words(a) {
        *counts.entry(w).or_default() += 1;
    }
    let mut matched = 0;
    for w in words(b) {
        if let Some(c) = counts.get_mut(w) {
            if *c > 0 {
                *c -= 1;
                matched += 1;
            }
        }
    }
    matched
}

/// Matched truth words over all truth words. A corpus without truth words
/// scores 1.0 when it also has no output words, else 0.0.
pub fn word_recall(pairs: &[EvalPair]) -> f64 {
    let matched: usize = pairs
        .iter()
        .map(|p| matched_words(&p.truth, &p.output))
        .sum();
    let total: usize = pairs.iter().map(|p| words(&p.truth).count()).sum();
    if total == 0 {
        let other: usize = pairs.iter().map(|p| words(&p.output).count()).sum();
        return if other == 0 { 1.0 } else { 0.0 };
    }
    matched as f64 / total as f64
}

/// Matched output words over all output words.
pub fn word_precision(pairs: &[EvalPair]) -> f64 {
    let swapped: Vec<EvalPair> = pairs.iter().map(EvalPair::swapped).collect();
    word_recall(&swapped)
}

/// Fraction of pairs whose space-folded strings differ.
pub fn sequence_error(pairs: &[EvalPair]) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let wrong = pairs
        .iter()
        .filter(|p| fold_spaces(&p.truth) != fold_spaces(&p.output))
        .count();
    wrong as f64 / pairs.len() as f64
}
