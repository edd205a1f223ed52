use std::fmt::Write as _;

use super::config::{LineFanIn, StreetConfig};
use super::network::closed_form_counts;

/// Published figures for the full network's line readers and total.
const PUBLISHED_READERS: &str = "263168x2 + 394240";
const PUBLISHED_TOTAL: &str = "2.2M";

/// Thousands-separated integer, e.g. `1,968,006`.
pub fn grouped(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn total(c: &StreetConfig) -> usize {
    closed_form_counts(c).iter().map(|r| r.weights).sum()
}

/// One `<layer> <weights>` line per layer, the total, and a note on how
/// the line-reader wiring changes the count.
pub fn params_report(c: &StreetConfig) -> String {
    let rows = closed_form_counts(c);
    let mut out = String::new();
    let _ = writeln!(out, "# preset={} fan_in={}", c.preset, c.fan_in.as_str());
    for r in &rows {
        let _ = writeln!(out, "{} {}", r.name, r.weights);
    }
    let sum = total(c);
    let _ = writeln!(out, "total {sum} ({})", grouped(sum));

    let readers: Vec<String> = rows
        .iter()
        .filter(|r| r.name.starts_with("BidiLSTM"))
        .map(|r| r.weights.to_string())
        .collect();
    let other = StreetConfig {
        fan_in: match c.fan_in {
            LineFanIn::Prose => LineFanIn::Table,
            LineFanIn::Table => LineFanIn::Prose,
        },
        ..c.clone()
    };
    let _ = writeln!(
        out,
        "note: line readers {} with fan_in={}; fan_in={} gives {} in total",
        readers.join(" + "),
        c.fan_in.as_str(),
        other.fan_in.as_str(),
        grouped(total(&other))
    );
    let full = StreetConfig {
        fan_in: c.fan_in,
        ..StreetConfig::full()
    };
    if c.fan_in == LineFanIn::Prose && *c == full {
        let _ = writeln!(
            out,
            "deviation: published line-reader counts are {PUBLISHED_READERS} and the published total is \
             {PUBLISHED_TOTAL}; they assume each outer reader sees two vertical summaries and the middle \
             reader all four. The described wiring (top: upward summary, middle: both middle summaries, \
             bottom: downward summary) gives {} and {} in total.",
            readers.join(" + "),
            grouped(sum)
        );
    }
    out
}
