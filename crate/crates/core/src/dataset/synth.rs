//! Synthetic multi-view street-name signs.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::seed;
use crate::text::{fold_upper, title_case_fold, Charset};

use super::example::{GeoPoint, SignExample, TileLayout, KEY_VIEWS, RAW_FORMAT};
use super::font::{glyph_or_box, ADVANCE, GLYPH_H, GLYPH_W};
use super::records::Value;

/// Rendering variation. Offsets are fractions of the tile size.
#[derive(Debug, Clone, PartialEq)]
pub struct Style {
    pub max_offset: f64,
    /// Amplitude of additive uniform pixel noise, in [0, 1].
    pub noise: f64,
    /// Maximum number of 3×3 box-blur passes per view.
    pub max_blur: usize,
    /// Lowest foreground/background contrast, in (0, 1].
    pub min_contrast: f64,
    pub distractor_prob: f64,
    /// Probability that the sign is painted in capitals.
    pub upper_prob: f64,
    /// Smallest glyph scale in pixels per font unit.
    pub min_scale: f64,
}

impl Style {
    pub fn varied() -> Self {
        Style {
            max_offset: 0.06,
            noise: 0.08,
            max_blur: 2,
            min_contrast: 0.5,
            distractor_prob: 0.4,
            upper_prob: 0.7,
            min_scale: 1.0,
        }
    }

    /// Little variation; suited to tiny tiles.
    pub fn clean() -> Self {
        Style {
            max_offset: 0.03,
            noise: 0.03,
            max_blur: 0,
            min_contrast: 0.8,
            distractor_prob: 0.0,
            upper_prob: 0.0,
            min_scale: 1.0,
        }
    }

    fn check(&self) -> Result<()> {
        let ok = self.min_scale >= 1.0
            && self.min_scale.is_finite()
            && (0.0..=0.5).contains(&self.max_offset)
            && (0.0..=1.0).contains(&self.noise)
            && self.min_contrast > 0.0
            && self.min_contrast <= 1.0
            && (0.0..=1.0).contains(&self.distractor_prob)
            && (0.0..=1.0).contains(&self.upper_prob);
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(
                "synth_sign",
                format!("degenerate style {self:?}"),
            ))
        }
    }
}

type Rgb = [f64; 3];

const PALETTES: [(Rgb, Rgb); 5] = [
    ([0.10, 0.20, 0.60], [0.95, 0.95, 0.95]),
    ([0.95, 0.95, 0.92], [0.05, 0.05, 0.10]),
    ([0.10, 0.40, 0.20], [0.95, 0.95, 0.90]),
    ([0.85, 0.80, 0.60], [0.15, 0.10, 0.05]),
    ([0.20, 0.20, 0.22], [0.95, 0.90, 0.60]),
];

struct Canvas {
    w: usize,
    h: usize,
    px: Vec<Rgb>,
}

impl Canvas {
    fn new(w: usize, h: usize, fill: Rgb) -> Self {
        Canvas {
            w,
            h,
            px: vec![fill; w * h],
        }
    }

    fn fill_rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, c: Rgb) {
        let clamp = |v: f64, hi: usize| (v.round().max(0.0) as usize).min(hi);
        let (xa, xb) = (clamp(x0, self.w), clamp(x1, self.w));
        let (ya, yb) = (clamp(y0, self.h), clamp(y1, self.h));
        for y in ya..yb {
            for x in xa..xb {
                self.px[y * self.w + x] = c;
            }
        }
    }

    /// Draws `text` with its top-left corner at (`x`, `y`).
    fn text(&mut self, text: &str, x: f64, y: f64, scale: f64, c: Rgb) {
        for (i, ch) in text.chars().enumerate() {
            let g = glyph_or_box(ch);
            let gx = x + (i * ADVANCE) as f64 * scale;
            for (row, bits) in g.iter().enumerate() {
                for (col, &on) in bits.iter().enumerate() {
                    if on {
                        let px = gx + col as f64 * scale;
                        let py = y + row as f64 * scale;
                        // at least one pixel per font unit
                        let s = scale.max(1.0);
                        self.fill_rect(px, py, px + s, py + s, c);
                    }
                }
            }
        }
    }

    fn box_blur(&mut self) {
        let src = self.px.clone();
        for y in 0..self.h {
            for x in 0..self.w {
                let mut acc = [0.0; 3];
                let mut n = 0.0;
                for yy in y.saturating_sub(1)..(y + 2).min(self.h) {
                    for xx in x.saturating_sub(1)..(x + 2).min(self.w) {
                        let p = src[yy * self.w + xx];
                        for k in 0..3 {
                            acc[k] += p[k];
                        }
                        n += 1.0;
                    }
                }
                self.px[y * self.w + x] = acc.map(|a| a / n);
            }
        }
    }
}

fn text_extent(lines: &[String]) -> (f64, f64) {
    let longest = lines.iter().map(|l| l.chars().count()).max().unwrap_or(0);
    let w = (longest * ADVANCE).saturating_sub(1).max(GLYPH_W) as f64;
    let h = (lines.len() * (GLYPH_H + 1) - 1) as f64;
    (w, h)
}

/// Splits `words` into `n` consecutive groups minimising the longest line.
fn balanced_lines(words: &[&str], n: usize) -> Vec<String> {
    fn best(words: &[&str], n: usize) -> (usize, Vec<String>) {
        if n == 1 || words.len() <= 1 {
            let line = words.join(" ");
            return (line.chars().count(), vec![line]);
        }
        let mut result: Option<(usize, Vec<String>)> = None;
        for split in 1..words.len() {
            let head = words[..split].join(" ");
            let (tail_len, tail) = best(&words[split..], n - 1);
            let len = head.chars().count().max(tail_len);
            if result.as_ref().map_or(true, |r| len < r.0) {
                let mut lines = vec![head];
                lines.extend(tail);
                result = Some((len, lines));
            }
        }
        result.unwrap()
    }
    best(words, n).1
}

/// One to three lines, choosing the wrap that allows the largest glyphs.
pub fn wrap_name(name: &str, tile: usize) -> (Vec<String>, f64) {
    let words: Vec<&str> = name.split(' ').filter(|w| !w.is_empty()).collect();
    let avail = tile as f64 * 0.9;
    let mut best: Option<(Vec<String>, f64)> = None;
    for n in 1..=3.min(words.len().max(1)) {
        let lines = balanced_lines(&words, n);
        let (w, h) = text_extent(&lines);
        let scale = (avail / w)
            .min(avail / h)
            .min(tile as f64 * 0.3 / GLYPH_H as f64);
        if best.as_ref().map_or(true, |b| scale > b.1 + 1e-9) {
            best = Some((lines, scale));
        }
    }
    best.unwrap_or((vec![String::new()], 1.0))
}

fn mix(a: Rgb, b: Rgb, t: f64) -> Rgb {
    [0, 1, 2].map(|k| a[k] + (b[k] - a[k]) * t)
}

fn render_view(
    rng: &mut ChaCha8Rng,
    tile: usize,
    lines: &[String],
    base_scale: f64,
    palette: (Rgb, Rgb),
    distractor: Option<&str>,
    style: &Style,
) -> Canvas {
    let t = tile as f64;
    let scene: Rgb = [0, 1, 2].map(|_| rng.gen_range(0.2..0.6));
    let mut c = Canvas::new(tile, tile, scene);

    let contrast = rng.gen_range(style.min_contrast..=1.0);
    let (bg, fg) = (palette.0, mix(palette.0, palette.1, contrast));
    let scale = (base_scale * rng.gen_range(0.88..=1.0)).max(style.min_scale);
    let (w, h) = text_extent(lines);
    let (w, h) = (w * scale, h * scale);
    let small = (scale * 0.5).max(style.min_scale);
    let dh = distractor.map_or(0.0, |_| (GLYPH_H + 2) as f64 * small);

    let jitter = style.max_offset * t;
    let dx = if jitter > 0.0 {
        rng.gen_range(-jitter..=jitter)
    } else {
        0.0
    };
    let dy = if jitter > 0.0 {
        rng.gen_range(-jitter..=jitter)
    } else {
        0.0
    };
    let x0 = (t - w) / 2.0 + dx;
    let y0 = (t - h - dh) / 2.0 + dy;

    let margin = (scale * 2.0).min(t * 0.05);
    c.fill_rect(
        x0 - margin,
        y0 - margin,
        x0 + w + margin,
        y0 + h + dh + margin,
        bg,
    );
    for (i, line) in lines.iter().enumerate() {
        let lw = text_extent(std::slice::from_ref(line)).0 * scale;
        let ly = y0 + (i * (GLYPH_H + 1)) as f64 * scale;
        c.text(line, x0 + (w - lw) / 2.0, ly, scale, fg);
    }
    if let Some(d) = distractor {
        let dw = text_extent(&[d.to_string()]).0 * small;
        c.text(d, x0 + (w - dw) / 2.0, y0 + h + 2.0 * small, small, fg);
    }
    for _ in 0..rng.gen_range(0..=style.max_blur) {
        c.box_blur();
    }
    if style.noise > 0.0 {
        for p in &mut c.px {
            for v in p.iter_mut() {
                *v += rng.gen_range(-style.noise..=style.noise);
            }
        }
    }
    c
}

fn distractor_text(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..3) {
        0 => format!("750{:02}", rng.gen_range(1..21)),
        1 => format!("{}E ARR", rng.gen_range(1..21)),
        _ => format!("N {}", rng.gen_range(1..200)),
    }
}

/// Renders `name` onto `n_views` tiles of `layout`; the remaining tiles
/// hold noise. The stored truth is the Title Case fold of `name`.
pub fn synth_sign(
    seed: u64,
    name: &str,
    n_views: usize,
    style: &Style,
    layout: TileLayout,
    charset: &Charset,
) -> Result<SignExample> {
    style.check()?;
    if n_views == 0 || n_views > layout.views {
        return Err(Error::invalid(
            "synth_sign",
            format!("n_views {n_views} outside 1..={}", layout.views),
        ));
    }
    let truth = title_case_fold(name);
    let labels = charset.encode(&truth)?;

    let mut rng = seed::rng(seed, "synth-sign");
    let painted: String = if rng.gen_bool(style.upper_prob) {
        truth.chars().map(fold_upper).collect()
    } else {
        truth.clone()
    };
    let (lines, scale) = wrap_name(&painted, layout.tile);
    let palette = PALETTES[rng.gen_range(0..PALETTES.len())];
    let distractor = rng
        .gen_bool(style.distractor_prob)
        .then(|| distractor_text(&mut rng));

    let (tile, width) = (layout.tile, layout.width());
    let mut encoded = vec![0u8; layout.image_bytes()];
    for v in 0..layout.views {
        if v < n_views {
            let view = render_view(
                &mut rng,
                tile,
                &lines,
                scale,
                palette,
                distractor.as_deref(),
                style,
            );
            for y in 0..tile {
                for x in 0..tile {
                    let o = (y * width + v * tile + x) * 3;
                    for (k, &val) in view.px[y * tile + x].iter().enumerate() {
                        encoded[o + k] = (val.clamp(0.0, 1.0) * 255.0).round() as u8;
                    }
                }
            }
        } else {
            for y in 0..tile {
                let o = (y * width + v * tile) * 3;
                rng.fill(&mut encoded[o..o + tile * 3]);
            }
        }
    }
    Ok(SignExample {
        format: RAW_FORMAT.into(),
        encoded,
        class: labels.padded,
        unpadded_class: labels.unpadded,
        width,
        orig_width: n_views * tile,
        height: tile,
        text: truth,
        geo: None,
        extra: vec![(KEY_VIEWS.into(), Value::Ints(vec![n_views as i64]))],
    })
}

/// Word lists the name generator draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vocabulary {
    /// French-style names over the full charset.
    French,
    /// Short names over the 14-letter charset.
    Mini,
}

const FRENCH_TYPES: [&str; 16] = [
    "Rue",
    "Avenue",
    "Boulevard",
    "Impasse",
    "Place",
    "Allée",
    "Chemin",
    "Route",
    "Quai",
    "Square",
    "Passage",
    "Cours",
    "Sentier",
    "Chaussée",
    "Rond-Point",
    "Cité",
];

const FRENCH_NAMES: [(&str, &str); 40] = [
    ("de la", "Gare"),
    ("du", "Moulin"),
    ("des", "Lilas"),
    ("", "Victor Hugo"),
    ("", "Jean Jaurès"),
    ("", "Pasteur"),
    ("du", "Château"),
    ("de la", "Fontaine"),
    ("de la", "Forêt"),
    ("de la", "Paix"),
    ("de la", "République"),
    ("de la", "Liberté"),
    ("du", "Marché"),
    ("du", "Pont"),
    ("du", "Port"),
    ("du", "Val"),
    ("de la", "Côte"),
    ("de", "Verdun"),
    ("du", "Général de Gaulle"),
    ("du", "Maréchal Foch"),
    ("des", "Peupliers"),
    ("des", "Tilleuls"),
    ("des", "Champs"),
    ("des", "Prés"),
    ("des", "Vignes"),
    ("du", "Bois"),
    ("", "Saint-Michel"),
    ("de la", "Mairie"),
    ("de la", "Poste"),
    ("de la", "Croix"),
    ("des", "Cerisiers"),
    ("des", "Pêcheurs"),
    ("de l'", "Église"),
    ("d'", "Alsace"),
    ("de l'", "Orme"),
    ("de l'", "Abbaye"),
    ("de l'", "Étang"),
    ("de l'", "Hôtel de Ville"),
    ("de l'", "Europe"),
    ("d'", "Ouessant"),
];

// At most eight ids each, so that eighteen frames always suffice.
const MINI_NAMES: [&str; 33] = [
    "Rue Gare", "Rue Pain", "Rue Rose", "Rue Pins", "Rue Gris", "Rue Roi", "Rue Pin", "Rue Rat",
    "Pont Roi", "Pont Pin", "Pont Rat", "Port Roi", "Port Pin", "Port Rat", "la Gare", "la Rose",
    "la Porte", "le Pin", "le Port", "le Pont", "le Roi", "le Puits", "les Pins", "Paris", "Gare",
    "Puits", "Grand", "Porte", "Poste", "Rose", "Roses", "Petit", "Prise",
];

impl Vocabulary {
    /// A random name, before Title Case folding.
    pub fn name(&self, rng: &mut impl Rng) -> String {
        match self {
            Vocabulary::French => {
                let kind = FRENCH_TYPES.choose(rng).unwrap();
                let (link, name) = FRENCH_NAMES.choose(rng).unwrap();
                match *link {
                    "" => format!("{kind} {name}"),
                    l if l.ends_with('\'') => format!("{kind} {l}{name}"),
                    l => format!("{kind} {l} {name}"),
                }
            }
            Vocabulary::Mini => MINI_NAMES.choose(rng).unwrap().to_string(),
        }
    }

    /// Every name the vocabulary can produce, in a fixed order.
    pub fn all_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            Vocabulary::French => {
                for kind in FRENCH_TYPES {
                    for (link, name) in FRENCH_NAMES {
                        out.push(match link {
                            "" => format!("{kind} {name}"),
                            l if l.ends_with('\'') => format!("{kind} {l}{name}"),
                            l => format!("{kind} {l} {name}"),
                        });
                    }
                }
            }
            Vocabulary::Mini => out.extend(MINI_NAMES.iter().map(|s| s.to_string())),
        }
        out
    }
}

/// Settings for [`generate_corpus`].
#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub count: usize,
    pub layout: TileLayout,
    pub vocabulary: Vocabulary,
    pub style: Style,
    /// Centre of the area signs are scattered over.
    pub origin: GeoPoint,
    /// Half-width of the area in metres.
    pub radius_m: f64,
    /// Signs per street, on average.
    pub signs_per_street: usize,
}

impl CorpusSpec {
    pub fn new(count: usize, layout: TileLayout, vocabulary: Vocabulary) -> Self {
        CorpusSpec {
            count,
            layout,
            vocabulary,
            style: if layout.tile >= 100 {
                Style::varied()
            } else {
                Style::clean()
            },
            origin: GeoPoint::new(48.8566, 2.3522),
            radius_m: 5_000.0,
            signs_per_street: 3,
        }
    }
}

fn offset_m(p: GeoPoint, east: f64, north: f64) -> GeoPoint {
    use super::example::EARTH_RADIUS_M;
    let lat = p.lat + (north / EARTH_RADIUS_M).to_degrees();
    let lon = p.lon + (east / (EARTH_RADIUS_M * p.lat.to_radians().cos())).to_degrees();
    GeoPoint::new(lat, lon)
}

/// Geo-tagged signs: several per street, streets scattered over an area,
/// the same name sometimes reused by distant streets.
pub fn generate_corpus(
    seed: u64,
    spec: &CorpusSpec,
    charset: &Charset,
) -> Result<Vec<SignExample>> {
    let mut rng = seed::rng(seed, "corpus");
    let streets = spec.count.div_ceil(spec.signs_per_street.max(1)).max(1);
    let centres: Vec<(String, GeoPoint)> = (0..streets)
        .map(|_| {
            let name = spec.vocabulary.name(&mut rng);
            let r = spec.radius_m;
            let p = offset_m(spec.origin, rng.gen_range(-r..=r), rng.gen_range(-r..=r));
            (name, p)
        })
        .collect();
    (0..spec.count)
        .map(|i| {
            let (name, centre) = &centres[rng.gen_range(0..centres.len())];
            let pos = offset_m(
                *centre,
                rng.gen_range(-40.0..=40.0),
                rng.gen_range(-40.0..=40.0),
            );
            let views = if rng.gen_bool(0.7) {
                spec.layout.views
            } else {
                rng.gen_range(1..=spec.layout.views)
            };
            let mut ex = synth_sign(
                seed::derive_indexed(seed, "sign", i as u64),
                name,
                views,
                &spec.style,
                spec.layout,
                charset,
            )?;
            ex.geo = Some(pos);
            Ok(ex)
        })
        .collect()
}
