//! Charsets, label encoding and truth-text normalisation.

mod case;
mod charset;
mod synthetic;

pub use case::{
    fold_lower, fold_upper, is_stop_word, lower, title_case_fold, PREFIXES, STOP_WORDS,
};
pub use charset::{Charset, LabelSeq, MAX_LABEL_LEN};
pub use synthetic::{full_charset, mini_charset, MINI_LETTERS};

/// Folds runs of spaces to one and trims the ends.
pub fn fold_spaces(s: &str) -> String {
    s.split(' ')
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}
