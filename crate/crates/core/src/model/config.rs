use std::fmt::Write as _;

use crate::dataset::TileLayout;
use crate::error::{Error, Result};
use crate::text::MAX_LABEL_LEN;

/// How the four vertical summaries feed the three line readers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineFanIn {
    /// Top reader sees the upward summary, middle sees both middle
    /// summaries, bottom sees the downward summary.
    Prose,
    /// Outer readers see two summaries each, the middle reader all four;
    /// reproduces the published reader weight counts.
    Table,
}

impl LineFanIn {
    pub fn as_str(&self) -> &'static str {
        match self {
            LineFanIn::Prose => "prose",
            LineFanIn::Table => "table",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreetConfig {
    pub preset: String,
    pub tile: usize,
    pub views: usize,
    pub conv_kernel: usize,
    pub conv_filters: [usize; 2],
    pub pools: [(usize, usize); 2],
    /// Width of each vertical summarizer.
    pub summarizer: usize,
    /// Line-reader width per direction.
    pub reader: usize,
    /// Left-to-right then right-to-left position-normalisation widths.
    pub posnorm: [usize; 2],
    pub final_width: usize,
    pub classes: usize,
    pub dropout: f64,
    pub fan_in: LineFanIn,
    /// Longest label the frame count is sized for.
    pub max_label: usize,
}

impl StreetConfig {
    pub fn full() -> Self {
        StreetConfig {
            preset: "full".into(),
            tile: 150,
            views: 4,
            conv_kernel: 5,
            conv_filters: [16, 64],
            pools: [(2, 2), (3, 3)],
            summarizer: 64,
            reader: 128,
            posnorm: [128, 128],
            final_width: 256,
            classes: 134,
            dropout: 0.5,
            fan_in: LineFanIn::Prose,
            max_label: MAX_LABEL_LEN,
        }
    }

    /// Desk-scale variant: 36-pixel tiles, two views, sixteen classes.
    pub fn mini() -> Self {
        StreetConfig {
            preset: "mini".into(),
            tile: 36,
            views: 2,
            conv_kernel: 5,
            conv_filters: [8, 16],
            pools: [(2, 2), (3, 3)],
            summarizer: 16,
            reader: 16,
            posnorm: [32, 32],
            final_width: 48,
            classes: 16,
            dropout: 0.0,
            fan_in: LineFanIn::Prose,
            max_label: 8,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "full" => Ok(Self::full()),
            "mini" => Ok(Self::mini()),
            other => Err(Error::Config(format!(
                "unknown preset {other:?} (expected full or mini)"
            ))),
        }
    }

    pub fn layout(&self) -> TileLayout {
        TileLayout {
            tile: self.tile,
            views: self.views,
        }
    }

    /// Side of the feature map after both pools.
    pub fn post_conv(&self) -> usize {
        self.tile
            .div_ceil(self.pools[0].0)
            .div_ceil(self.pools[1].0)
    }

    /// Output frames: the three text lines strung out along x.
    pub fn frames(&self) -> usize {
        3 * self.post_conv()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let widths = [
            self.tile,
            self.views,
            self.conv_kernel,
            self.conv_filters[0],
            self.conv_filters[1],
            self.summarizer,
            self.reader,
            self.posnorm[0],
            self.posnorm[1],
            self.final_width,
        ];
        if widths.contains(&0) {
            return bad(format!("zero width in {self:?}"));
        }
        if self.classes < 2 {
            return bad(format!("need at least 2 classes, got {}", self.classes));
        }
        for (h, w) in self.pools {
            if h == 0 || w == 0 || h != w {
                return bad(format!(
                    "pool windows must be square and non-empty, got {h}x{w}"
                ));
            }
        }
        let shrink = self.pools[0].0 * self.pools[1].0;
        if self.tile % shrink != 0 {
            return bad(format!(
                "tile {} not divisible by total pooling {shrink}",
                self.tile
            ));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if self.max_label == 0 || self.frames() < 2 * self.max_label + 1 {
            return bad(format!(
                "{} frames cannot hold {} labels (need {})",
                self.frames(),
                self.max_label,
                2 * self.max_label + 1
            ));
        }
        Ok(())
    }

    /// `key=value` lines, the same syntax the command line overlay reads.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "preset={}", self.preset);
        let _ = writeln!(s, "tile={}", self.tile);
        let _ = writeln!(s, "views={}", self.views);
        let _ = writeln!(s, "conv_kernel={}", self.conv_kernel);
        let _ = writeln!(
            s,
            "conv_filters={},{}",
            self.conv_filters[0], self.conv_filters[1]
        );
        let _ = writeln!(s, "pools={},{}", self.pools[0].0, self.pools[1].0);
        let _ = writeln!(s, "summarizer={}", self.summarizer);
        let _ = writeln!(s, "reader={}", self.reader);
        let _ = writeln!(s, "posnorm={},{}", self.posnorm[0], self.posnorm[1]);
        let _ = writeln!(s, "final_width={}", self.final_width);
        let _ = writeln!(s, "classes={}", self.classes);
        let _ = writeln!(s, "dropout={}", self.dropout);
        let _ = writeln!(s, "fan_in={}", self.fan_in.as_str());
        let _ = writeln!(s, "max_label={}", self.max_label);
        s
    }

    /// Parses [`StreetConfig::to_text`] output. Keys not given keep the
    /// value of the named preset (or `full`).
    pub fn from_text(text: &str) -> Result<Self> {
        let pairs: Vec<(&str, &str)> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.split_once('=')
                    .map(|(k, v)| (k.trim(), v.trim()))
                    .ok_or_else(|| Error::Config(format!("expected key=value, got {l:?}")))
            })
            .collect::<Result<_>>()?;
        let preset = pairs
            .iter()
            .find(|(k, _)| *k == "preset")
            .map_or("full", |p| p.1);
        let mut c = Self::preset(preset)?;
        for (k, v) in pairs {
            c.set(k, v)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad value {v:?} for {key}")))
        }
        fn pair(key: &str, v: &str) -> Result<[usize; 2]> {
            let (a, b) = v
                .split_once(',')
                .ok_or_else(|| Error::Config(format!("{key} needs two comma-separated values")))?;
            Ok([num(key, a.trim())?, num(key, b.trim())?])
        }
        match key {
            "preset" => self.preset = value.to_string(),
            "tile" => self.tile = num(key, value)?,
            "views" => self.views = num(key, value)?,
            "conv_kernel" => self.conv_kernel = num(key, value)?,
            "conv_filters" => self.conv_filters = pair(key, value)?,
            "pools" => {
                let [a, b] = pair(key, value)?;
                self.pools = [(a, a), (b, b)];
            }
            "summarizer" => self.summarizer = num(key, value)?,
            "reader" => self.reader = num(key, value)?,
            "posnorm" => self.posnorm = pair(key, value)?,
            "final_width" => self.final_width = num(key, value)?,
            "classes" => self.classes = num(key, value)?,
            "dropout" => self.dropout = num(key, value)?,
            "fan_in" => {
                self.fan_in = match value {
                    "prose" => LineFanIn::Prose,
                    "table" => LineFanIn::Table,
                    v => {
                        return Err(Error::Config(format!(
                            "fan_in must be prose or table, got {v:?}"
                        )))
                    }
                }
            }
            "max_label" => self.max_label = num(key, value)?,
            k => return Err(Error::Config(format!("unknown model key {k:?}"))),
        }
        Ok(())
    }
}
