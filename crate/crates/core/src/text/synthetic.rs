//! Built-in charsets for synthetic data.

use super::Charset;

const ACCENTED: [&str; 27] = [
    "à", "À", "â", "Â", "ä", "ç", "Ç", "é", "É", "è", "È", "ê", "Ê", "ë", "Ë", "î", "Î", "ï", "ô",
    "Ô", "œ", "ù", "Ù", "û", "Û", "ü", "ÿ",
];

const PUNCTUATION: [&str; 18] = [
    "<", "=", "_", "-", ",", ";", "!", "?", "/", ".", "'", "\"", "(", ")", "]", "\\", "&", "+",
];

// Filler up to 133 non-null classes. Never produced by the name generator.
const EXTRA: [&str; 25] = [
    ":", "[", "*", "%", "#", "@", "$", "°", ">", "{", "}", "|", "~", "^", "`", "æ", "Æ", "Œ", "Ÿ",
    "Ä", "Ï", "Ü", "ñ", "Ñ", "€",
];

const QUOTE_ALIASES: [(&str, &str); 5] = [
    ("\u{201c}", "\""),
    ("\u{201d}", "\""),
    ("\u{ab}", "\""),
    ("\u{bb}", "\""),
    ("\u{2019}", "'"),
];

/// Letters of the small charset; enough for a handful of street names.
pub const MINI_LETTERS: &str = "RuedlaGrPisont";

/// 134 classes: space, digits, A-Z, a-z, the accented letters, punctuation,
/// filler symbols, and the null at 133.
pub fn full_charset() -> Charset {
    let digits: Vec<String> = ('0'..='9').map(String::from).collect();
    let upper: Vec<String> = ('A'..='Z').map(String::from).collect();
    let lower: Vec<String> = ('a'..='z').map(String::from).collect();
    let mut symbols: Vec<&str> = vec![" "];
    symbols.extend(digits.iter().map(String::as_str));
    symbols.extend(upper.iter().map(String::as_str));
    symbols.extend(lower.iter().map(String::as_str));
    symbols.extend(ACCENTED);
    symbols.extend(PUNCTUATION);
    symbols.extend(EXTRA);
    Charset::with_null(&symbols, &QUOTE_ALIASES).expect("built-in charset is well formed")
}

/// 16 classes: space, 14 letters, null.
pub fn mini_charset() -> Charset {
    let letters: Vec<String> = MINI_LETTERS.chars().map(String::from).collect();
    let mut symbols: Vec<&str> = vec![" "];
    symbols.extend(letters.iter().map(String::as_str));
    Charset::with_null(&symbols, &[]).expect("built-in charset is well formed")
}
