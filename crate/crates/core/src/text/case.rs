//! Map-style Title Case folding of street names.

/// Words that always stay lower-case.
pub const STOP_WORDS: [&str; 11] = [
    "au", "aux", "de", "des", "du", "et", "la", "le", "les", "sous", "sur",
];

/// Elided articles that attach to the following word.
pub const PREFIXES: [&str; 2] = ["d'", "l'"];

// Upper/lower pairs outside ASCII. ä, ï, œ, ü and ÿ have no upper-case
// form in the inventory and fold to themselves.
const ACCENT_PAIRS: [(char, char); 11] = [
    ('à', 'À'),
    ('â', 'Â'),
    ('ç', 'Ç'),
    ('é', 'É'),
    ('è', 'È'),
    ('ê', 'Ê'),
    ('ë', 'Ë'),
    ('î', 'Î'),
    ('ô', 'Ô'),
    ('ù', 'Ù'),
    ('û', 'Û'),
];

pub fn fold_lower(c: char) -> char {
    if c.is_ascii() {
        return c.to_ascii_lowercase();
    }
    ACCENT_PAIRS.iter().find(|p| p.1 == c).map_or(c, |p| p.0)
}

pub fn fold_upper(c: char) -> char {
    if c.is_ascii() {
        return c.to_ascii_uppercase();
    }
    ACCENT_PAIRS.iter().find(|p| p.0 == c).map_or(c, |p| p.1)
}

pub fn lower(s: &str) -> String {
    s.chars().map(fold_lower).collect()
}

pub fn is_stop_word(word: &str) -> bool {
    STOP_WORDS.contains(&lower(word).as_str())
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => std::iter::once(fold_upper(first))
            .chain(chars.map(fold_lower))
            .collect(),
        None => String::new(),
    }
}

fn fold_word(word: &str) -> String {
    let low = lower(word);
    if STOP_WORDS.contains(&low.as_str()) {
        return low;
    }
    for prefix in PREFIXES {
        if low.starts_with(prefix) {
            // both prefixes are two ASCII bytes
            return format!("{prefix}{}", capitalize(&word[2..]));
        }
    }
    capitalize(word)
}

/// Title Case fold: stop words and `d'`/`l'` prefixes lower-case, every
/// other space-separated word capitalised with the remainder lower-case.
/// Spacing is preserved as given.
pub fn title_case_fold(text: &str) -> String {
    text.split(' ').map(fold_word).collect::<Vec<_>>().join(" ")
}
