//! The `street` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;

use crate::dataset::{
    corpus_stats, default_stop_words, example_reader, filter_encodable, generate_corpus,
    image_tensor, make_splits, read_examples, stats_report, write_examples, CorpusSpec,
    RecordReader, SignExample, SplitSet, Style, Value, Vocabulary, SUBSET_NAMES,
};
use crate::error::Error;
use crate::metrics::{EvalPair, Scores};
use crate::model::{load_checkpoint, params_report, LineFanIn, StreetConfig, StreetModel};
use crate::seed;
use crate::text::{full_charset, mini_charset, Charset};
use crate::trainer::{evaluate, train, AdamConfig, EvalReport, TrainOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "street",
    version,
    about = "Street-name sign transcription: data, training, scoring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate synthetic signs into a record file.
    Gen(GenArgs),
    /// Split a geo-tagged record file into subsets with walls and dedup.
    Split(SplitArgs),
    /// Word and out-of-vocabulary counts for a split directory.
    Stats(StatsArgs),
    /// Train a model on a record file.
    Train(TrainArgs),
    /// Score a checkpoint on records, or score transcripts against truths.
    Eval(EvalArgs),
    /// Transcribe records or a single image.
    Predict(PredictArgs),
    /// Per-layer weight counts.
    Params(ParamsArgs),
    /// Human-readable dump of a record file.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VocabArg {
    French,
    Mini,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StyleArg {
    Clean,
    Varied,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FanInArg {
    Prose,
    Table,
}

#[derive(Debug, Args)]
struct ModelFlags {
    /// Model preset: full or mini.
    #[arg(long)]
    preset: Option<String>,
    /// key=value file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Charset file; defaults to the built-in charset for the class count.
    #[arg(long)]
    charset: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    vocab: Option<VocabArg>,
    #[arg(long, value_enum)]
    style: Option<StyleArg>,
    /// Also write the charset used for the class ids.
    #[arg(long)]
    charset_out: Option<PathBuf>,
    #[command(flatten)]
    model: ModelFlags,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Four comma-separated fractions: train, validation, test, private-test.
    #[arg(long)]
    fractions: Option<String>,
    /// Minimum distance in metres between examples of different subsets.
    #[arg(long)]
    wall_m: Option<f64>,
    #[command(flatten)]
    model: ModelFlags,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Directory written by `split`.
    #[arg(long)]
    dir: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Clip the global gradient norm to this value.
    #[arg(long)]
    clip: Option<f64>,
    #[arg(long)]
    eval_every: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long, value_enum)]
    fan_in: Option<FanInArg>,
    /// Stop at the first evaluation with zero training sequence error.
    #[arg(long)]
    stop_when_perfect: bool,
    #[arg(long)]
    no_timestamps: bool,
    #[command(flatten)]
    model: ModelFlags,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Record file with truths.
    #[arg(long)]
    input: Option<PathBuf>,
    /// One transcript per line, paired with `--input` records or `--truth` lines.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// One truth per line.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// List every truth/output pair after the summary.
    #[arg(long)]
    pairs: bool,
    #[arg(long)]
    charset: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Record file; one transcript per record.
    #[arg(long, conflicts_with = "image")]
    input: Option<PathBuf>,
    /// PPM or PNG image of one to `views` tiles side by side.
    #[arg(long)]
    image: Option<PathBuf>,
    /// Seed for the noise that pads missing views of `--image`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    charset: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ParamsArgs {
    #[arg(long, value_enum)]
    fan_in: Option<FanInArg>,
    #[command(flatten)]
    model: ModelFlags,
}

#[derive(Debug, Args)]
struct InspectArgs {
    #[arg(long)]
    input: PathBuf,
    /// Show at most this many records.
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        // a reader that closed our stdout early (`| head`) is not a failure
        if e.kind() == io::ErrorKind::BrokenPipe {
            return Failure {
                code: EXIT_OK,
                message: String::new(),
            };
        }
        Error::Io(e).into()
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Runs the command line, writing results to `out` and diagnostics to
/// `err`. Returns the process exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a, out),
        Command::Split(a) => split(a, out),
        Command::Stats(a) => stats(a, out),
        Command::Train(a) => train_cmd(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Predict(a) => predict(a, out),
        Command::Params(a) => params(a, out),
        Command::Inspect(a) => inspect(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            if !f.message.is_empty() {
                let _ = writeln!(err, "error: {}", f.message);
            }
            f.code
        }
    }
}

// ---------------------------------------------------------------------------
// configuration overlay

const RUN_KEYS: [&str; 14] = [
    "seed",
    "count",
    "vocab",
    "style",
    "fractions",
    "wall_m",
    "steps",
    "batch",
    "lr",
    "clip",
    "eval_every",
    "stop_when_perfect",
    "charset",
    "out_dir",
];

const MODEL_KEYS: [&str; 14] = [
    "preset",
    "tile",
    "views",
    "conv_kernel",
    "conv_filters",
    "pools",
    "summarizer",
    "reader",
    "posnorm",
    "final_width",
    "classes",
    "dropout",
    "fan_in",
    "max_label",
];

/// Parsed `key=value` file.
#[derive(Debug, Default)]
struct Overlay {
    values: BTreeMap<String, String>,
}

impl Overlay {
    fn load(path: Option<&Path>) -> std::result::Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Overlay::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Failure::usage(format!("config line {}: expected key=value", n + 1))
            })?;
            let k = k.trim();
            if !RUN_KEYS.contains(&k) && !MODEL_KEYS.contains(&k) {
                return Err(Failure::usage(format!(
                    "config line {}: unknown key {k:?}",
                    n + 1
                )));
            }
            values.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Overlay { values })
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> std::result::Result<Option<T>, Failure> {
        self.values
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Failure::usage(format!("config: bad value {v:?} for {key}")))
            })
            .transpose()
    }

    /// Flag if given, else the file's value, else `default`.
    fn pick<T: std::str::FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> std::result::Result<T, Failure> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    fn model(
        &self,
        preset_flag: Option<&str>,
        default_preset: &str,
    ) -> std::result::Result<StreetConfig, Failure> {
        let preset = preset_flag
            .map(str::to_string)
            .or_else(|| self.values.get("preset").cloned())
            .unwrap_or_else(|| default_preset.to_string());
        let mut c = StreetConfig::preset(&preset)?;
        for (k, v) in &self.values {
            if MODEL_KEYS.contains(&k.as_str()) && k != "preset" {
                c.set(k, v)?;
            }
        }
        Ok(c)
    }
}

fn fan_in(a: FanInArg) -> LineFanIn {
    match a {
        FanInArg::Prose => LineFanIn::Prose,
        FanInArg::Table => LineFanIn::Table,
    }
}

fn load_charset(path: Option<&Path>, classes: usize) -> std::result::Result<Charset, Failure> {
    if let Some(p) = path {
        let f = fs::File::open(p).map_err(|e| Failure {
            code: EXIT_DATA,
            message: format!("charset {}: {e}", p.display()),
        })?;
        let cs = Charset::load(BufReader::new(f))?;
        if cs.size() != classes {
            return Err(Failure::usage(format!(
                "charset {} has {} classes, the model has {classes}",
                p.display(),
                cs.size()
            )));
        }
        return Ok(cs);
    }
    match classes {
        134 => Ok(full_charset()),
        16 => Ok(mini_charset()),
        n => Err(Failure::usage(format!(
            "no built-in charset with {n} classes; pass --charset"
        ))),
    }
}

fn effective(out: &mut dyn Write, model: &StreetConfig, run: &[(&str, String)]) -> io::Result<()> {
    writeln!(out, "# effective configuration")?;
    for line in model.to_text().lines() {
        writeln!(out, "{line}")?;
    }
    for (k, v) in run {
        writeln!(out, "{k}={v}")?;
    }
    Ok(())
}

fn parse_fractions(s: &str) -> std::result::Result<[f64; 4], Failure> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Failure::usage(format!("fractions {s:?}: expected four numbers")))?;
    parts
        .try_into()
        .map_err(|_| Failure::usage(format!("fractions {s:?}: expected four numbers")))
}

// ---------------------------------------------------------------------------
// subcommands

fn gen(a: GenArgs, out: &mut dyn Write) -> Outcome {
    let o = Overlay::load(a.model.config.as_deref())?;
    let config = o.model(a.model.preset.as_deref(), "mini")?;
    config.validate()?;
    let charset = load_charset(a.model.charset.as_deref(), config.classes)?;
    let count = o.pick(a.count, "count", 100)?;
    let seed = o.pick(a.seed, "seed", 0)?;
    let small = config.tile < 100;
    let vocab = match a.vocab {
        Some(VocabArg::French) => "french".to_string(),
        Some(VocabArg::Mini) => "mini".to_string(),
        None => o
            .get("vocab")?
            .unwrap_or_else(|| if small { "mini" } else { "french" }.into()),
    };
    let style = match a.style {
        Some(StyleArg::Clean) => "clean".to_string(),
        Some(StyleArg::Varied) => "varied".to_string(),
        None => o
            .get("style")?
            .unwrap_or_else(|| if small { "clean" } else { "varied" }.into()),
    };
    let mut spec = CorpusSpec::new(
        count,
        config.layout(),
        match vocab.as_str() {
            "french" => Vocabulary::French,
            "mini" => Vocabulary::Mini,
            v => {
                return Err(Failure::usage(format!(
                    "vocab must be french or mini, got {v:?}"
                )))
            }
        },
    );
    spec.style = match style.as_str() {
        "clean" => Style::clean(),
        "varied" => Style::varied(),
        s => {
            return Err(Failure::usage(format!(
                "style must be clean or varied, got {s:?}"
            )))
        }
    };
    effective(
        out,
        &config,
        &[
            ("seed", seed.to_string()),
            ("count", count.to_string()),
            ("vocab", vocab),
            ("style", style),
        ],
    )?;
    let examples = generate_corpus(seed, &spec, &charset)?;
    let n = write_examples(&a.out, &examples)?;
    if let Some(p) = &a.charset_out {
        fs::write(p, charset.to_text())?;
    }
    writeln!(out, "wrote {n} examples to {}", a.out.display())?;
    Ok(())
}

fn split(a: SplitArgs, out: &mut dyn Write) -> Outcome {
    let o = Overlay::load(a.model.config.as_deref())?;
    let config = o.model(a.model.preset.as_deref(), "mini")?;
    let charset = load_charset(a.model.charset.as_deref(), config.classes)?;
    let fractions_text = match a.fractions {
        Some(f) => f,
        None => o
            .get("fractions")?
            .unwrap_or_else(|| "0.8,0.1,0.05,0.05".to_string()),
    };
    let fractions = parse_fractions(&fractions_text)?;
    let wall_m = o.pick(a.wall_m, "wall_m", 100.0)?;
    effective(
        out,
        &config,
        &[
            ("fractions", fractions_text.clone()),
            ("wall_m", wall_m.to_string()),
        ],
    )?;
    let examples = read_examples(&a.input)?;
    let total = examples.len();
    let (kept, unencodable) = filter_encodable(examples, &charset);
    let set = make_splits(kept, fractions, wall_m)?;
    fs::create_dir_all(&a.out_dir)?;
    writeln!(out, "read {total} examples, {unencodable} not encodable")?;
    writeln!(
        out,
        "dropped {} in walls, {} duplicate truths, {} unassigned",
        set.dropped_in_walls, set.dropped_duplicates, set.unassigned
    )?;
    for (name, members) in &set.subsets {
        let path = a.out_dir.join(format!("{name}.fsnl"));
        write_examples(&path, members)?;
        writeln!(out, "{name} {}", members.len())?;
    }
    Ok(())
}

fn stats(a: StatsArgs, out: &mut dyn Write) -> Outcome {
    let mut subsets = Vec::new();
    for name in SUBSET_NAMES {
        let path = a.dir.join(format!("{name}.fsnl"));
        if path.exists() {
            subsets.push((name.to_string(), read_examples(&path)?));
        }
    }
    let set = SplitSet {
        subsets,
        dropped_in_walls: 0,
        dropped_duplicates: 0,
        unassigned: 0,
    };
    let stats = corpus_stats(&set, &default_stop_words())?;
    write!(out, "{}", stats_report(&stats))?;
    Ok(())
}

fn train_cmd(a: TrainArgs, out: &mut dyn Write) -> Outcome {
    let o = Overlay::load(a.model.config.as_deref())?;
    let mut config = o.model(a.model.preset.as_deref(), "mini")?;
    if let Some(d) = a.dropout {
        config.dropout = d;
    }
    if let Some(f) = a.fan_in {
        config.fan_in = fan_in(f);
    }
    config.validate()?;
    let charset = load_charset(a.model.charset.as_deref(), config.classes)?;
    let seed = o.pick(a.seed, "seed", 0)?;
    let clip = match a.clip {
        Some(c) => Some(c),
        None => o.get("clip")?,
    };
    let opts = TrainOptions {
        steps: o.pick(a.steps, "steps", 1000)?,
        batch: o.pick(a.batch, "batch", 1)?,
        eval_every: o.pick(a.eval_every, "eval_every", 100)?,
        seed,
        adam: AdamConfig {
            lr: o.pick(a.lr, "lr", AdamConfig::default().lr)?,
            ..AdamConfig::default()
        },
        clip,
        checkpoint_dir: Some(a.out_dir.clone()),
        stop_when_perfect: a.stop_when_perfect || o.get("stop_when_perfect")?.unwrap_or(false),
        timestamps: !a.no_timestamps,
    };
    let run_keys = [
        ("seed", seed.to_string()),
        ("steps", opts.steps.to_string()),
        ("batch", opts.batch.to_string()),
        ("lr", opts.adam.lr.to_string()),
        ("clip", clip.map_or("none".into(), |c| c.to_string())),
        ("eval_every", opts.eval_every.to_string()),
        ("stop_when_perfect", opts.stop_when_perfect.to_string()),
    ];
    effective(out, &config, &run_keys)?;
    fs::create_dir_all(&a.out_dir)?;
    let mut conf_text = config.to_text();
    for (k, v) in &run_keys {
        let _ = writeln!(conf_text, "{k}={v}");
    }
    fs::write(a.out_dir.join("config.txt"), conf_text)?;

    let examples = read_examples(&a.train)?;
    let mut model = StreetModel::<f32>::build(config, seed::derive_seed(seed, "init"))?;
    let mut sink_err = None;
    let log = train(&mut model, &examples, &charset, &opts, |log| {
        let line = log.format_entry(log.entries.len() - 1);
        if let Err(e) = writeln!(out, "{line}") {
            sink_err.get_or_insert(e);
        }
    })?;
    if let Some(e) = sink_err {
        return Err(e.into());
    }
    fs::write(a.out_dir.join("train.log"), log.to_text())?;
    Ok(())
}

fn read_lines(path: &Path) -> std::result::Result<Vec<String>, Failure> {
    let f = fs::File::open(path).map_err(|e| Failure {
        code: EXIT_DATA,
        message: format!("{}: {e}", path.display()),
    })?;
    Ok(BufReader::new(f).lines().collect::<io::Result<_>>()?)
}

fn write_report(out: &mut dyn Write, report: &EvalReport, pairs: bool) -> io::Result<()> {
    write!(out, "{}", report.summary())?;
    if pairs {
        for p in &report.pairs {
            let mark = if crate::text::fold_spaces(&p.truth) == crate::text::fold_spaces(&p.output)
            {
                "="
            } else {
                "!"
            };
            writeln!(out, "{mark}\t{}\t{}", p.truth, p.output)?;
        }
    }
    Ok(())
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> Outcome {
    let pairs: Vec<EvalPair> = match (&a.checkpoint, &a.input, &a.transcript, &a.truth) {
        (Some(ckpt), Some(input), None, None) => {
            let model = load_checkpoint(ckpt)?;
            let charset = load_charset(a.charset.as_deref(), model.config.classes)?;
            let examples = read_examples(input)?;
            let report = evaluate(&model, &examples, &charset)?;
            write_report(out, &report, a.pairs)?;
            return Ok(());
        }
        (None, Some(input), Some(transcript), None) => {
            let truths: Vec<String> = read_examples(input)?.into_iter().map(|e| e.text).collect();
            zip_lines(truths, read_lines(transcript)?)?
        }
        (None, None, Some(transcript), Some(truth)) => zip_lines(read_lines(truth)?, read_lines(transcript)?)?,
        _ => {
            return Err(Failure::usage(
                "eval needs --checkpoint with --input, --input with --transcript, or --truth with --transcript",
            ))
        }
    };
    if pairs.is_empty() {
        return Err(Error::EmptyEvalSet.into());
    }
    let report = EvalReport {
        scores: Scores::of(&pairs),
        pairs,
    };
    write_report(out, &report, a.pairs)?;
    Ok(())
}

fn zip_lines(
    truths: Vec<String>,
    outputs: Vec<String>,
) -> std::result::Result<Vec<EvalPair>, Failure> {
    if truths.len() != outputs.len() {
        return Err(Failure {
            code: EXIT_DATA,
            message: format!("{} truths but {} transcripts", truths.len(), outputs.len()),
        });
    }
    Ok(truths
        .into_iter()
        .zip(outputs)
        .map(|(t, o)| EvalPair::new(t, o))
        .collect())
}

fn predict(a: PredictArgs, out: &mut dyn Write) -> Outcome {
    let model = load_checkpoint(&a.checkpoint)?;
    let charset = load_charset(a.charset.as_deref(), model.config.classes)?;
    let layout = model.config.layout();
    match (&a.input, &a.image) {
        (Some(input), None) => {
            for (i, ex) in example_reader(input)?.enumerate() {
                let ex = ex?;
                ex.validate(layout, None, i)?;
                writeln!(out, "{}", model.predict_text(&ex.image_tensor(), &charset)?)?;
            }
        }
        (None, Some(path)) => {
            let img = image::open(path)
                .map_err(|e| Failure {
                    code: EXIT_DATA,
                    message: format!("{}: {e}", path.display()),
                })?
                .to_rgb8();
            let (w, h) = (img.width() as usize, img.height() as usize);
            let t = layout.tile;
            if h != t || w == 0 || w % t != 0 || w > layout.width() {
                return Err(Failure {
                    code: EXIT_DATA,
                    message: format!(
                        "image is {w}x{h}; expected height {t} and a width of 1 to {} tiles of {t}",
                        layout.views
                    ),
                });
            }
            let rgb = pad_views(img.as_raw(), w, layout.width(), h, a.seed);
            let tensor = image_tensor(&rgb, h, layout.width());
            writeln!(out, "{}", model.predict_text(&tensor, &charset)?)?;
        }
        _ => {
            return Err(Failure::usage(
                "predict needs exactly one of --input or --image",
            ))
        }
    }
    Ok(())
}

/// Widens an RGB raster to `full` columns, filling new tiles with noise.
fn pad_views(rgb: &[u8], width: usize, full: usize, height: usize, seed: u64) -> Vec<u8> {
    let mut rng = seed::rng(seed, "pad-views");
    let mut outv = vec![0u8; full * height * 3];
    for y in 0..height {
        let dst = &mut outv[y * full * 3..(y + 1) * full * 3];
        dst[..width * 3].copy_from_slice(&rgb[y * width * 3..(y + 1) * width * 3]);
        rng.fill(&mut dst[width * 3..]);
    }
    outv
}

fn params(a: ParamsArgs, out: &mut dyn Write) -> Outcome {
    let o = Overlay::load(a.model.config.as_deref())?;
    let mut config = o.model(a.model.preset.as_deref(), "full")?;
    if let Some(f) = a.fan_in {
        config.fan_in = fan_in(f);
    }
    config.validate()?;
    write!(out, "{}", params_report(&config))?;
    Ok(())
}

fn describe(value: &Value) -> String {
    const SHOW: usize = 12;
    match value {
        Value::Text(s) => format!("text {s:?}"),
        Value::Ints(v) => {
            let shown: Vec<String> = v.iter().take(SHOW).map(i64::to_string).collect();
            let more = if v.len() > SHOW { ", ..." } else { "" };
            format!("ints[{}] [{}{more}]", v.len(), shown.join(", "))
        }
        Value::Bytes(b) => {
            let shown: String = b.iter().take(SHOW).map(|x| format!("{x:02x}")).collect();
            let more = if b.len() > SHOW { "..." } else { "" };
            format!("bytes[{}] {shown}{more}", b.len())
        }
    }
}

fn inspect(a: InspectArgs, out: &mut dyn Write) -> Outcome {
    let reader = RecordReader::open(&a.input)?;
    let limit = a.limit.unwrap_or(usize::MAX);
    let mut shown = 0;
    for (i, rec) in reader.enumerate() {
        let rec = rec?;
        if shown == limit {
            continue;
        }
        writeln!(out, "record {i}")?;
        for (k, v) in &rec.fields {
            writeln!(out, "  {k}: {}", describe(v))?;
        }
        if let Ok(ex) = SignExample::from_record(&rec, i) {
            writeln!(out, "  -> {:?}, {} real view(s)", ex.text, ex.real_views())?;
        }
        shown += 1;
    }
    writeln!(out, "{shown} record(s) shown")?;
    Ok(())
}
