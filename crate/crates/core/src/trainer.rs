//! CTC training with Adam, evaluation, and the training log.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;

use crate::dataset::SignExample;
use crate::error::{Error, Result};
use crate::metrics::{EvalPair, Scores};
use crate::model::{decode_logits, save_checkpoint, ParamStore, StreetModel};
use crate::seed;
use crate::tensor::{Graph, Mode, ParamId, Real, Tensor};
use crate::text::Charset;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 2e-5,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moments for every parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub config: AdamConfig,
    pub m: Vec<Tensor<T>>,
    pub v: Vec<Tensor<T>>,
    pub step: u64,
}

impl<T: Real> AdamState<T> {
    pub fn new(params: &ParamStore<T>, config: AdamConfig) -> Self {
        let zeros = || {
            params
                .iter()
                .map(|(_, t)| Tensor::zeros(t.shape().to_vec()))
                .collect()
        };
        AdamState {
            config,
            m: zeros(),
            v: zeros(),
            step: 0,
        }
    }
}

/// One bias-corrected Adam update. A non-finite gradient aborts the step
/// before anything is modified.
pub fn adam_step<T: Real>(
    params: &mut ParamStore<T>,
    grads: &[Tensor<T>],
    state: &mut AdamState<T>,
) -> Result<()> {
    if grads.len() != params.len() || state.m.len() != params.len() {
        return Err(Error::shape(
            "adam",
            format!("{} gradients for {} parameters", grads.len(), params.len()),
        ));
    }
    for (i, g) in grads.iter().enumerate() {
        if g.shape() != params.by_index(i).shape() {
            return Err(Error::shape(
                "adam",
                format!(
                    "gradient {:?} for parameter {:?}",
                    g.shape(),
                    params.by_index(i).shape()
                ),
            ));
        }
        if !g.is_finite() {
            return Err(Error::NonFinite { op: "adam" });
        }
    }
    state.step += 1;
    let c = state.config;
    let t = state.step as i32;
    let (b1, b2) = (T::from_f64(c.beta1), T::from_f64(c.beta2));
    let (one_b1, one_b2) = (T::from_f64(1.0 - c.beta1), T::from_f64(1.0 - c.beta2));
    let corr1 = T::from_f64(1.0 - c.beta1.powi(t));
    let corr2 = T::from_f64(1.0 - c.beta2.powi(t));
    let (lr, eps) = (T::from_f64(c.lr), T::from_f64(c.eps));
    for (i, g) in grads.iter().enumerate() {
        let p = params.by_index_mut(i).data_mut();
        let m = state.m[i].data_mut();
        let v = state.v[i].data_mut();
        for j in 0..p.len() {
            let gj = g.data()[j];
            m[j] = b1 * m[j] + one_b1 * gj;
            v[j] = b2 * v[j] + one_b2 * gj * gj;
            let m_hat = m[j] / corr1;
            let v_hat = v[j] / corr2;
            p[j] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

/// Scales `grads` in place so their global L2 norm is at most `max_norm`.
/// Returns the norm before scaling.
pub fn clip_global_norm<T: Real>(grads: &mut [Tensor<T>], max_norm: f64) -> f64 {
    let norm = grads
        .iter()
        .map(|g| g.sq_norm().to_f64())
        .sum::<f64>()
        .sqrt();
    if norm > max_norm && norm > 0.0 {
        let s = T::from_f64(max_norm / norm);
        for g in grads.iter_mut() {
            for v in g.data_mut() {
                *v *= s;
            }
        }
    }
    norm
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub steps: usize,
    /// Images whose gradients are averaged per update.
    pub batch: usize,
    /// Evaluate (and checkpoint) every this many steps; 0 disables.
    pub eval_every: usize,
    pub seed: u64,
    pub adam: AdamConfig,
    pub clip: Option<f64>,
    pub checkpoint_dir: Option<PathBuf>,
    /// Stop at an evaluation point once the training-set sequence error
    /// is zero.
    pub stop_when_perfect: bool,
    pub timestamps: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            steps: 1000,
            batch: 1,
            eval_every: 100,
            seed: 0,
            adam: AdamConfig::default(),
            clip: None,
            checkpoint_dir: None,
            stop_when_perfect: false,
            timestamps: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LogEntry {
    Step {
        step: usize,
        loss: f64,
        skipped: usize,
    },
    Eval {
        step: usize,
        scores: Scores,
    },
    Checkpoint {
        step: usize,
        path: PathBuf,
    },
    Aborted {
        step: usize,
        reason: String,
    },
}

impl LogEntry {
    pub fn step(&self) -> usize {
        match self {
            LogEntry::Step { step, .. }
            | LogEntry::Eval { step, .. }
            | LogEntry::Checkpoint { step, .. }
            | LogEntry::Aborted { step, .. } => *step,
        }
    }
}

/// Append-only record of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    pub seed: u64,
    pub entries: Vec<LogEntry>,
    /// Seconds since the start, parallel to `entries`.
    pub elapsed: Vec<f64>,
    pub timestamps: bool,
}

impl TrainLog {
    pub fn losses(&self) -> Vec<f64> {
        self.entries
            .iter()
            .filter_map(|e| match e {
                LogEntry::Step { loss, .. } => Some(*loss),
                _ => None,
            })
            .collect()
    }

    pub fn last_scores(&self) -> Option<Scores> {
        self.entries.iter().rev().find_map(|e| match e {
            LogEntry::Eval { scores, .. } => Some(*scores),
            _ => None,
        })
    }

    pub fn steps_run(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e, LogEntry::Step { .. }))
            .count()
    }

    /// One line per entry, with `seconds=` only when timestamps are on.
    pub fn format_entry(&self, i: usize) -> String {
        let mut line = match &self.entries[i] {
            LogEntry::Step {
                step,
                loss,
                skipped,
            } => format!("step={step} loss={loss:.6} skipped={skipped}"),
            LogEntry::Eval { step, scores } => format!(
                "eval step={step} recall={:.4} precision={:.4} sequence_error={:.4} examples={}",
                scores.recall, scores.precision, scores.sequence_error, scores.examples
            ),
            LogEntry::Checkpoint { step, path } => format!(
                "checkpoint step={step} file={}",
                path.file_name()
                    .unwrap_or(path.as_os_str())
                    .to_string_lossy()
            ),
            LogEntry::Aborted { step, reason } => format!("aborted step={step} reason={reason}"),
        };
        if self.timestamps {
            let _ = write!(line, " seconds={:.3}", self.elapsed[i]);
        }
        line
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("seed={}\n", self.seed);
        for i in 0..self.entries.len() {
            out.push_str(&self.format_entry(i));
            out.push('\n');
        }
        out
    }
}

/// An example ready for the network: scaled image and unpadded labels.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub image: Tensor<f32>,
    pub label: Vec<usize>,
    pub truth: String,
}

/// Checks examples against the model's layout and charset and converts
/// them for training or evaluation.
pub fn prepare(
    examples: &[SignExample],
    model_layout: crate::dataset::TileLayout,
    charset: &Charset,
) -> Result<Vec<Prepared>> {
    examples
        .iter()
        .enumerate()
        .map(|(i, e)| {
            e.validate(model_layout, Some(charset), i)?;
            Ok(Prepared {
                image: e.image_tensor(),
                label: e.unpadded_class.clone(),
                truth: e.text.clone(),
            })
        })
        .collect()
}

/// Loss and per-parameter gradients for one example.
fn example_gradients(
    model: &StreetModel<f32>,
    ex: &Prepared,
    seed: u64,
) -> Result<(f64, Vec<Option<Tensor<f32>>>)> {
    let mut g = Graph::new();
    let x = g.constant(ex.image.clone());
    let logits = model.forward_graph(&mut g, x, Mode::Train, seed, None)?;
    let loss = g.ctc_loss(logits, &ex.label)?;
    let value = g.value(loss).item().to_f64();
    let grads = g.backward(loss)?;
    let per_param = (0..model.params.len())
        .map(|i| grads.param(ParamId(i)).cloned())
        .collect();
    Ok((value, per_param))
}

/// Trains `model` in place. Examples whose labels cannot be aligned to
/// the frame count are skipped and counted in the log.
pub fn train(
    model: &mut StreetModel<f32>,
    examples: &[SignExample],
    charset: &Charset,
    opts: &TrainOptions,
    mut on_entry: impl FnMut(&TrainLog),
) -> Result<TrainLog> {
    if charset.size() != model.config.classes {
        return Err(Error::Config(format!(
            "charset has {} classes, model has {}",
            charset.size(),
            model.config.classes
        )));
    }
    if opts.batch == 0 {
        return Err(Error::Config("batch must be at least 1".into()));
    }
    let data = prepare(examples, model.config.layout(), charset)?;
    if data.is_empty() && opts.steps > 0 {
        return Err(Error::EmptyEvalSet);
    }
    let start = Instant::now();
    let mut log = TrainLog {
        seed: opts.seed,
        entries: Vec::new(),
        elapsed: Vec::new(),
        timestamps: opts.timestamps,
    };
    let mut push = |log: &mut TrainLog, e: LogEntry| {
        log.entries.push(e);
        log.elapsed.push(start.elapsed().as_secs_f64());
        on_entry(log);
    };

    let mut adam = AdamState::new(&model.params, opts.adam);
    let mut order_rng = seed::rng(opts.seed, "data-order");
    let mut order: Vec<usize> = Vec::new();
    let mut cursor = 0;

    for step in 1..=opts.steps {
        let mut sum: Vec<Option<Tensor<f32>>> = vec![None; model.params.len()];
        let mut total_loss = 0.0;
        let mut used = 0;
        let mut skipped = 0;
        for j in 0..opts.batch {
            if cursor == order.len() {
                order = (0..data.len()).collect();
                order.shuffle(&mut order_rng);
                cursor = 0;
            }
            let ex = &data[order[cursor]];
            cursor += 1;
            let s = seed::derive_indexed(opts.seed, "dropout-step", (step * opts.batch + j) as u64);
            match example_gradients(model, ex, s) {
                Ok((loss, grads)) => {
                    total_loss += loss;
                    used += 1;
                    for (acc, g) in sum.iter_mut().zip(grads) {
                        match (acc.as_mut(), g) {
                            (Some(a), Some(g)) => a.add_assign(&g),
                            (None, Some(g)) => *acc = Some(g),
                            _ => {}
                        }
                    }
                }
                Err(Error::InfeasibleLabel { .. }) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
        if used > 0 {
            let scale = 1.0 / used as f32;
            let mut grads: Vec<Tensor<f32>> = sum
                .into_iter()
                .enumerate()
                .map(|(i, g)| match g {
                    Some(mut g) => {
                        g.data_mut().iter_mut().for_each(|v| *v *= scale);
                        g
                    }
                    None => Tensor::zeros(model.params.by_index(i).shape().to_vec()),
                })
                .collect();
            if let Some(c) = opts.clip {
                clip_global_norm(&mut grads, c);
            }
            if let Err(e) = adam_step(&mut model.params, &grads, &mut adam) {
                push(
                    &mut log,
                    LogEntry::Aborted {
                        step,
                        reason: e.to_string(),
                    },
                );
                continue;
            }
        }
        let loss = if used > 0 {
            total_loss / used as f64
        } else {
            f64::NAN
        };
        push(
            &mut log,
            LogEntry::Step {
                step,
                loss,
                skipped,
            },
        );

        let at_eval = opts.eval_every > 0 && (step % opts.eval_every == 0 || step == opts.steps);
        if at_eval {
            let report = evaluate_prepared(model, &data, charset)?;
            push(
                &mut log,
                LogEntry::Eval {
                    step,
                    scores: report.scores,
                },
            );
            if let Some(dir) = &opts.checkpoint_dir {
                let path = dir.join(format!("step-{step:06}.ckpt"));
                save_checkpoint(model, &path)?;
                push(&mut log, LogEntry::Checkpoint { step, path });
            }
            if opts.stop_when_perfect && report.scores.sequence_error == 0.0 {
                break;
            }
        }
    }
    if let Some(dir) = &opts.checkpoint_dir {
        let path = dir.join("final.ckpt");
        save_checkpoint(model, &path)?;
        let step = log.steps_run();
        push(&mut log, LogEntry::Checkpoint { step, path });
    }
    Ok(log)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub scores: Scores,
    pub pairs: Vec<EvalPair>,
}

impl EvalReport {
    pub fn summary(&self) -> String {
        format!(
            "examples {}\nword_recall {:.4}\nword_precision {:.4}\nsequence_error {:.4}\n",
            self.scores.examples,
            self.scores.recall,
            self.scores.precision,
            self.scores.sequence_error
        )
    }
}

fn evaluate_prepared(
    model: &StreetModel<f32>,
    data: &[Prepared],
    charset: &Charset,
) -> Result<EvalReport> {
    if data.is_empty() {
        return Err(Error::EmptyEvalSet);
    }
    let pairs = data
        .iter()
        .map(|ex| {
            let logits = model.forward(&ex.image, Mode::Eval, 0)?;
            Ok(EvalPair::new(
                ex.truth.clone(),
                decode_logits(logits.data(), charset),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport {
        scores: Scores::of(&pairs),
        pairs,
    })
}

/// Transcribes every example and scores the result.
pub fn evaluate(
    model: &StreetModel<f32>,
    examples: &[SignExample],
    charset: &Charset,
) -> Result<EvalReport> {
    if charset.size() != model.config.classes {
        return Err(Error::Config(format!(
            "charset has {} classes, model has {}",
            charset.size(),
            model.config.classes
        )));
    }
    let data = prepare(examples, model.config.layout(), charset)?;
    evaluate_prepared(model, &data, charset)
}

/// Loads examples from a record file and evaluates them.
pub fn evaluate_path(
    model: &StreetModel<f32>,
    path: impl AsRef<Path>,
    charset: &Charset,
) -> Result<EvalReport> {
    let examples = crate::dataset::read_examples(path)?;
    evaluate(model, &examples, charset)
}
