//! Geographic train/test splitting, encodability filtering and
//! vocabulary statistics.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::text::{lower, Charset, PREFIXES, STOP_WORDS};

use super::example::{GeoPoint, SignExample, EARTH_RADIUS_M};

pub const SUBSET_NAMES: [&str; 4] = ["train", "validation", "test", "private-test"];

/// Anything with a position and a truth string.
pub trait Placed {
    fn position(&self) -> Option<GeoPoint>;
    fn truth(&self) -> &str;
}

impl Placed for SignExample {
    fn position(&self) -> Option<GeoPoint> {
        self.geo
    }

    fn truth(&self) -> &str {
        &self.text
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSet<E> {
    /// In [`SUBSET_NAMES`] order.
    pub subsets: Vec<(String, Vec<E>)>,
    pub dropped_in_walls: usize,
    pub dropped_duplicates: usize,
    /// Examples beyond the last subset when fractions sum below one.
    pub unassigned: usize,
}

impl<E> SplitSet<E> {
    pub fn get(&self, name: &str) -> Option<&[E]> {
        self.subsets
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }
}

/// Longitude width of a wall that keeps points on either side at least
/// `wall_m` apart, for latitudes up to `max_abs_lat`.
pub fn wall_degrees(wall_m: f64, max_abs_lat: f64) -> f64 {
    let cos = max_abs_lat.to_radians().cos().max(1e-9);
    (wall_m / (EARTH_RADIUS_M * cos)).to_degrees()
}

/// Partitions `examples` into longitude strips holding the given
/// fractions of the input, leaves a `wall_m` gap between strips, and
/// then, subset by subset, drops examples whose truth string already
/// appeared in an earlier subset.
pub fn make_splits<E: Placed>(
    examples: Vec<E>,
    fractions: [f64; 4],
    wall_m: f64,
) -> Result<SplitSet<E>> {
    let sum: f64 = fractions.iter().sum();
    if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) || sum > 1.0 + 1e-12 {
        return Err(Error::invalid(
            "make_splits",
            format!("fractions {fractions:?} must be in [0, 1] and sum to at most 1"),
        ));
    }
    if !(wall_m >= 0.0 && wall_m.is_finite()) {
        return Err(Error::invalid(
            "make_splits",
            format!("wall width {wall_m}"),
        ));
    }
    let mut placed = Vec::with_capacity(examples.len());
    for (i, e) in examples.into_iter().enumerate() {
        let p = e
            .position()
            .ok_or_else(|| Error::invalid("make_splits", format!("example {i} has no position")))?;
        if !(p.lat.is_finite() && p.lon.is_finite() && p.lat.abs() < 90.0) {
            return Err(Error::invalid(
                "make_splits",
                format!("example {i} has bad position {p:?}"),
            ));
        }
        placed.push((p, e));
    }
    let n = placed.len();
    let max_lat = placed.iter().map(|(p, _)| p.lat.abs()).fold(0.0, f64::max);
    let half_wall = wall_degrees(wall_m, max_lat) / 2.0;
    placed.sort_by(|a, b| a.0.lon.total_cmp(&b.0.lon));

    // index boundaries of the strips; the last one closes the unassigned rest
    let mut bounds = vec![0usize];
    let mut acc = 0.0;
    for f in fractions {
        acc += f;
        bounds.push(((acc * n as f64).round() as usize).min(n));
    }
    let lons: Vec<f64> = placed.iter().map(|(p, _)| p.lon).collect();
    let cuts: Vec<f64> = bounds[1..]
        .iter()
        .filter(|&&b| b > 0 && b < n)
        .map(|&b| (lons[b - 1] + lons[b]) / 2.0)
        .collect();

    let mut subsets: Vec<(String, Vec<E>)> = SUBSET_NAMES
        .iter()
        .map(|s| (s.to_string(), Vec::new()))
        .collect();
    let mut dropped_in_walls = 0;
    let mut unassigned = 0;
    for (i, (p, e)) in placed.into_iter().enumerate() {
        if cuts.iter().any(|c| (p.lon - c).abs() <= half_wall) {
            dropped_in_walls += 1;
            continue;
        }
        match (0..4).find(|&k| i >= bounds[k] && i < bounds[k + 1]) {
            Some(k) => subsets[k].1.push(e),
            None => unassigned += 1,
        }
    }

    let mut seen: HashSet<String> = HashSet::new();
    let mut dropped_duplicates = 0;
    for (_, members) in &mut subsets {
        let before = members.len();
        members.retain(|e| !seen.contains(e.truth()));
        dropped_duplicates += before - members.len();
        seen.extend(members.iter().map(|e| e.truth().to_string()));
    }
    Ok(SplitSet {
        subsets,
        dropped_in_walls,
        dropped_duplicates,
        unassigned,
    })
}

/// Keeps examples whose truth encodes within the label limit, returning
/// them with the number dropped.
pub fn filter_encodable<E: Placed>(examples: Vec<E>, charset: &Charset) -> (Vec<E>, usize) {
    let before = examples.len();
    let kept: Vec<E> = examples
        .into_iter()
        .filter(|e| charset.encode(e.truth()).is_ok())
        .collect();
    let dropped = before - kept.len();
    (kept, dropped)
}

/// Default stop list: the lower-case words and the elided prefixes.
pub fn default_stop_words() -> Vec<String> {
    STOP_WORDS
        .iter()
        .chain(PREFIXES.iter())
        .map(|s| s.to_string())
        .collect()
}

/// Words of a truth string, with `d'`/`l'` split off as their own tokens.
pub fn tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for w in text.split(' ').filter(|w| !w.is_empty()) {
        let low = lower(w);
        match PREFIXES.iter().find(|p| low.starts_with(**p)) {
            Some(p) => {
                out.push(p.to_string());
                if w.len() > 2 {
                    out.push(w[2..].to_string());
                }
            }
            None => out.push(w.to_string()),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetStats {
    pub name: String,
    pub non_stop_words: usize,
    pub unique_words: usize,
    pub unique_oov: usize,
    pub total_oov: usize,
}

impl SubsetStats {
    pub fn oov_percent(&self) -> f64 {
        if self.non_stop_words == 0 {
            0.0
        } else {
            100.0 * self.total_oov as f64 / self.non_stop_words as f64
        }
    }
}

/// Word counts per subset, and out-of-vocabulary counts with respect to
/// the train subset. Stop words are compared exactly.
pub fn corpus_stats<E: Placed>(
    split: &SplitSet<E>,
    stop_words: &[String],
) -> Result<Vec<SubsetStats>> {
    let words_of = |members: &[E]| -> Vec<String> {
        members
            .iter()
            .flat_map(|e| tokens(e.truth()))
            .filter(|w| !stop_words.contains(w))
            .collect()
    };
    let train = split.get("train").ok_or(Error::MissingTrainSubset)?;
    let vocab: HashSet<String> = words_of(train).into_iter().collect();
    Ok(split
        .subsets
        .iter()
        .map(|(name, members)| {
            let words = words_of(members);
            let mut unique: HashMap<&str, usize> = HashMap::new();
            for w in &words {
                *unique.entry(w).or_default() += 1;
            }
            SubsetStats {
                name: name.clone(),
                non_stop_words: words.len(),
                unique_words: unique.len(),
                unique_oov: unique.keys().filter(|w| !vocab.contains(**w)).count(),
                total_oov: words.iter().filter(|w| !vocab.contains(*w)).count(),
            }
        })
        .collect())
}

/// Tab-separated table, one row per subset.
pub fn stats_report(stats: &[SubsetStats]) -> String {
    let mut out =
        String::from("subset\tnon_stop_words\tunique_words\tunique_oov\ttotal_oov\tpercent_oov\n");
    for s in stats {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{:.2}\n",
            s.name,
            s.non_stop_words,
            s.unique_words,
            s.unique_oov,
            s.total_oov,
            s.oov_percent()
        ));
    }
    out
}
