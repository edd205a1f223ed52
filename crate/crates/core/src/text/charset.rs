use std::collections::HashMap;
use std::io::BufRead;

use crate::error::{Error, Result};

/// Maximum number of class ids a truth string may encode to.
pub const MAX_LABEL_LEN: usize = 37;

/// Bidirectional class-id ↔ UTF-8 mapping.
///
/// Id 0 is a single space and the last id is the CTC null, which has no
/// text form. Several strings may fold onto one id; the first listed
/// string is canonical and is what [`Charset::decode`] produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Charset {
    canonical: Vec<String>,
    lookup: HashMap<String, usize>,
    /// Longest key in chars, for greedy matching.
    longest: usize,
}

/// Encoded truth: unpadded ids and the null-padded fixed-width form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSeq {
    pub unpadded: Vec<usize>,
    pub padded: Vec<usize>,
}

impl Charset {
    /// Parses `<id>\t<string>` lines. A repeated id declares an alias.
    /// Blank lines are skipped.
    pub fn load(reader: impl BufRead) -> Result<Self> {
        let mut entries: Vec<(usize, String)> = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = n + 1;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.is_empty() {
                continue;
            }
            let (id, text) = line.split_once('\t').ok_or_else(|| Error::Charset {
                line: lineno,
                detail: "missing tab separator".into(),
            })?;
            let id: usize = id.trim().parse().map_err(|_| Error::Charset {
                line: lineno,
                detail: format!("bad class id {id:?}"),
            })?;
            entries.push((id, text.to_string()));
        }
        if entries.is_empty() {
            return Err(Error::Charset {
                line: 0,
                detail: "empty charset".into(),
            });
        }
        Self::from_entries(entries)
    }

    /// Builds a charset from `(id, string)` pairs. The null class is
    /// implicit when the highest id is listed with an empty string or is
    /// absent; see [`Charset::with_null`].
    pub fn from_entries(entries: Vec<(usize, String)>) -> Result<Self> {
        let size = entries.iter().map(|e| e.0).max().map_or(0, |m| m + 1);
        let mut canonical: Vec<Option<String>> = vec![None; size];
        let mut lookup = HashMap::new();
        for (line, (id, text)) in entries.into_iter().enumerate() {
            if let Some(&prev) = lookup.get(&text) {
                if prev != id {
                    return Err(Error::Charset {
                        line: line + 1,
                        detail: format!("{text:?} already maps to {prev}"),
                    });
                }
                continue;
            }
            if canonical[id].is_none() {
                canonical[id] = Some(text.clone());
            }
            if !text.is_empty() {
                lookup.insert(text, id);
            }
        }
        let canonical: Vec<String> = canonical
            .into_iter()
            .enumerate()
            .map(|(id, c)| {
                c.ok_or_else(|| Error::Charset {
                    line: 0,
                    detail: format!("class ids are not dense: {id} missing"),
                })
            })
            .collect::<Result<_>>()?;
        if canonical.len() < 2 {
            return Err(Error::Charset {
                line: 0,
                detail: "need at least a space and a null class".into(),
            });
        }
        if canonical[0] != " " {
            return Err(Error::Charset {
                line: 0,
                detail: format!("class 0 must be a space, found {:?}", canonical[0]),
            });
        }
        let null = canonical.len() - 1;
        lookup.retain(|_, id| *id != null);
        let longest = lookup.keys().map(|k| k.chars().count()).max().unwrap_or(1);
        Ok(Charset {
            canonical,
            lookup,
            longest,
        })
    }

    /// Charset from canonical symbols (space first), aliases, and an
    /// appended null class.
    pub fn with_null(symbols: &[&str], aliases: &[(&str, &str)]) -> Result<Self> {
        let mut entries: Vec<(usize, String)> = symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.to_string()))
            .collect();
        for (alias, target) in aliases {
            let id = symbols
                .iter()
                .position(|s| s == target)
                .ok_or_else(|| Error::Charset {
                    line: 0,
                    detail: format!("alias target {target:?} missing"),
                })?;
            entries.push((id, alias.to_string()));
        }
        entries.push((symbols.len(), String::new()));
        Self::from_entries(entries)
    }

    /// Serialises in the `<id>\t<string>` line format, canonical entries
    /// first then aliases. The null line carries an empty string.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, s) in self.canonical.iter().enumerate() {
            out.push_str(&format!("{id}\t{s}\n"));
        }
        let mut aliases: Vec<(&String, &usize)> = self
            .lookup
            .iter()
            .filter(|(k, &id)| self.canonical[id] != **k)
            .collect();
        aliases.sort_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(b.0)));
        for (s, id) in aliases {
            out.push_str(&format!("{id}\t{s}\n"));
        }
        out
    }

    pub fn size(&self) -> usize {
        self.canonical.len()
    }

    pub fn null(&self) -> usize {
        self.canonical.len() - 1
    }

    pub fn space(&self) -> usize {
        0
    }

    pub fn symbol(&self, id: usize) -> Option<&str> {
        (id < self.null()).then(|| self.canonical[id].as_str())
    }

    pub fn id_of(&self, s: &str) -> Option<usize> {
        self.lookup.get(s).copied()
    }

    /// Greedy longest-match tokenisation.
    pub fn encode_ids(&self, text: &str) -> Result<Vec<usize>> {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let mut ids = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let start = chars[i].0;
            let mut matched = None;
            for len in (1..=self.longest.min(chars.len() - i)).rev() {
                let end = chars.get(i + len).map_or(text.len(), |c| c.0);
                if let Some(&id) = self.lookup.get(&text[start..end]) {
                    matched = Some((id, len));
                    break;
                }
            }
            let (id, len) =
                matched.ok_or_else(|| Error::UnencodableChar(chars[i].1.to_string()))?;
            ids.push(id);
            i += len;
        }
        Ok(ids)
    }

    /// Encodes and pads to [`MAX_LABEL_LEN`] with nulls.
    pub fn encode(&self, text: &str) -> Result<LabelSeq> {
        let unpadded = self.encode_ids(text)?;
        if unpadded.len() > MAX_LABEL_LEN {
            return Err(Error::TooLong(unpadded.len()));
        }
        let mut padded = unpadded.clone();
        padded.resize(MAX_LABEL_LEN, self.null());
        Ok(LabelSeq { unpadded, padded })
    }

    /// Concatenates canonical strings; null ids are skipped.
    pub fn decode(&self, ids: &[usize]) -> String {
        ids.iter().filter_map(|&id| self.symbol(id)).collect()
    }
}
