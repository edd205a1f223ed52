//! Connectionist temporal classification.
//!
//! The null (blank) class is always the last class id. Losses are computed
//! in log space in `f64` regardless of the logits' precision.

use crate::error::{Error, Result};
use crate::tensor::{Backward, Graph, Real, Tensor, Var};

/// Logits for `frames` consecutive frames over `classes` classes, plus the
/// target label.
#[derive(Debug, Clone, Copy)]
pub struct CtcProblem<'a> {
    /// Row-major frames × classes.
    pub logits: &'a [f64],
    pub classes: usize,
    pub label: &'a [usize],
}

impl<'a> CtcProblem<'a> {
    pub fn new(logits: &'a [f64], classes: usize, label: &'a [usize]) -> Self {
        CtcProblem {
            logits,
            classes,
            label,
        }
    }

    pub fn frames(&self) -> usize {
        self.logits.len() / self.classes.max(1)
    }

    pub fn null(&self) -> usize {
        self.classes - 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 || self.logits.len() % self.classes != 0 {
            return Err(Error::invalid(
                "ctc",
                format!("{} logits for {} classes", self.logits.len(), self.classes),
            ));
        }
        if self.logits.is_empty() {
            return Err(Error::EmptyFrames);
        }
        if let Some(&id) = self.label.iter().find(|&&id| id >= self.null()) {
            return Err(Error::LabelOutOfRange {
                id,
                classes: self.classes,
            });
        }
        let repeats = adjacent_repeats(self.label);
        if self.frames() < self.label.len() + repeats {
            return Err(Error::InfeasibleLabel {
                label_len: self.label.len(),
                repeats,
                frames: self.frames(),
            });
        }
        Ok(())
    }
}

/// Minimum frames needed for `label`.
pub fn min_frames(label: &[usize]) -> usize {
    label.len() + adjacent_repeats(label)
}

fn adjacent_repeats(label: &[usize]) -> usize {
    label.windows(2).filter(|w| w[0] == w[1]).count()
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn log_softmax_rows(logits: &[f64], classes: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(logits.len());
    for row in logits.chunks(classes) {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lz = m + row.iter().map(|&v| (v - m).exp()).sum::<f64>().ln();
        out.extend(row.iter().map(|&v| v - lz));
    }
    out
}

/// Loss `-ln p(label | softmax(logits))` and its gradient with respect to
/// the logits, via the forward-backward recursions over the null-augmented
/// label.
pub fn ctc_loss(problem: &CtcProblem<'_>) -> Result<(f64, Vec<f64>)> {
    problem.validate()?;
    let (frames, classes, null) = (problem.frames(), problem.classes, problem.null());
    let ly = log_softmax_rows(problem.logits, classes);

    let mut ext = Vec::with_capacity(2 * problem.label.len() + 1);
    ext.push(null);
    for &l in problem.label {
        ext.push(l);
        ext.push(null);
    }
    let s_len = ext.len();
    let skip_ok = |s: usize| s >= 2 && ext[s] != null && ext[s] != ext[s - 2];

    let ninf = f64::NEG_INFINITY;
    let mut alpha = vec![ninf; frames * s_len];
    alpha[0] = ly[ext[0]];
    if s_len > 1 {
        alpha[1] = ly[ext[1]];
    }
    for t in 1..frames {
        for s in 0..s_len {
            let prev = &alpha[(t - 1) * s_len..t * s_len];
            let mut a = prev[s];
            if s >= 1 {
                a = log_sum_exp(a, prev[s - 1]);
            }
            if skip_ok(s) {
                a = log_sum_exp(a, prev[s - 2]);
            }
            alpha[t * s_len + s] = if a == ninf {
                ninf
            } else {
                a + ly[t * classes + ext[s]]
            };
        }
    }

    let mut beta = vec![ninf; frames * s_len];
    let last = (frames - 1) * s_len;
    beta[last + s_len - 1] = ly[(frames - 1) * classes + ext[s_len - 1]];
    if s_len > 1 {
        beta[last + s_len - 2] = ly[(frames - 1) * classes + ext[s_len - 2]];
    }
    for t in (0..frames - 1).rev() {
        for s in 0..s_len {
            let next = &beta[(t + 1) * s_len..(t + 2) * s_len];
            let mut b = next[s];
            if s + 1 < s_len {
                b = log_sum_exp(b, next[s + 1]);
            }
            if s + 2 < s_len && skip_ok(s + 2) {
                b = log_sum_exp(b, next[s + 2]);
            }
            beta[t * s_len + s] = if b == ninf {
                ninf
            } else {
                b + ly[t * classes + ext[s]]
            };
        }
    }

    let mut log_p = alpha[last + s_len - 1];
    if s_len > 1 {
        log_p = log_sum_exp(log_p, alpha[last + s_len - 2]);
    }
    if log_p == ninf {
        return Err(Error::InfeasibleLabel {
            label_len: problem.label.len(),
            repeats: adjacent_repeats(problem.label),
            frames,
        });
    }

    let mut grad = vec![0.0; frames * classes];
    let mut occupancy = vec![ninf; classes];
    for t in 0..frames {
        occupancy.iter_mut().for_each(|v| *v = ninf);
        for s in 0..s_len {
            let ab = alpha[t * s_len + s] + beta[t * s_len + s];
            occupancy[ext[s]] = log_sum_exp(occupancy[ext[s]], ab);
        }
        for k in 0..classes {
            let lyk = ly[t * classes + k];
            let post = if occupancy[k] == ninf {
                0.0
            } else {
                (occupancy[k] - lyk - log_p).exp()
            };
            grad[t * classes + k] = lyk.exp() - post;
        }
    }
    Ok((-log_p, grad))
}

/// Exhaustive oracle: sums the probability of every frame-level path whose
/// collapse equals the label. Exponential in the number of frames.
pub fn ctc_brute_force(problem: &CtcProblem<'_>) -> Result<f64> {
    problem.validate()?;
    let (frames, classes, null) = (problem.frames(), problem.classes, problem.null());
    let probs: Vec<f64> = problem
        .logits
        .chunks(classes)
        .flat_map(|row| {
            let z: f64 = row.iter().map(|v| v.exp()).sum();
            row.iter().map(move |v| v.exp() / z).collect::<Vec<_>>()
        })
        .collect();

    let mut path = vec![0usize; frames];
    let mut collapsed = Vec::with_capacity(frames);
    let mut total = 0.0;
    loop {
        collapsed.clear();
        let mut prev = None;
        for &k in &path {
            if Some(k) != prev && k != null {
                collapsed.push(k);
            }
            prev = Some(k);
        }
        if collapsed == problem.label {
            total += path
                .iter()
                .enumerate()
                .map(|(t, &k)| probs[t * classes + k])
                .product::<f64>();
        }
        // odometer increment
        let mut t = frames;
        loop {
            if t == 0 {
                return if total > 0.0 {
                    Ok(-total.ln())
                } else {
                    Err(Error::InfeasibleLabel {
                        label_len: problem.label.len(),
                        repeats: adjacent_repeats(problem.label),
                        frames,
                    })
                };
            }
            t -= 1;
            path[t] += 1;
            if path[t] < classes {
                break;
            }
            path[t] = 0;
        }
    }
}

/// Best-path decoding: per-frame argmax (lowest index on ties), collapse
/// adjacent repeats, drop nulls.
pub fn ctc_greedy_decode<T: Real>(logits: &[T], classes: usize) -> Vec<usize> {
    let null = classes - 1;
    let mut out = Vec::new();
    let mut prev = None;
    for row in logits.chunks(classes) {
        let mut best = 0;
        for (k, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = k;
            }
        }
        if Some(best) != prev && best != null {
            out.push(best);
        }
        prev = Some(best);
    }
    out
}

struct CtcLossOp<T> {
    grad: Vec<T>,
}

impl<T: Real> Backward<T> for CtcLossOp<T> {
    fn name(&self) -> &'static str {
        "ctc_loss"
    }

    fn backward(
        &self,
        parents: &[&Tensor<T>],
        _output: &Tensor<T>,
        grad: &Tensor<T>,
        _needs: &[bool],
    ) -> Result<Vec<Option<Tensor<T>>>> {
        let scale = grad.item();
        let d = self.grad.iter().map(|&g| g * scale).collect();
        Ok(vec![Some(Tensor::new(parents[0].shape().to_vec(), d)?)])
    }
}

impl<T: Real> Graph<T> {
    /// CTC loss of `logits` (any shape whose last dimension is the class
    /// count; leading dimensions flatten to frames) as a scalar node.
    pub fn ctc_loss(&mut self, logits: Var, label: &[usize]) -> Result<Var> {
        let x = self.value(logits);
        let classes = x.depth();
        let as_f64: Vec<f64> = x.data().iter().map(|&v| Real::to_f64(v)).collect();
        let (loss, grad) = ctc_loss(&CtcProblem::new(&as_f64, classes, label))?;
        let grad = grad.into_iter().map(T::from_f64).collect();
        self.record(
            Tensor::scalar(T::from_f64(loss)),
            &[logits],
            Box::new(CtcLossOp { grad }),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn softmax(row: &[f64]) -> Vec<f64> {
        let z: f64 = row.iter().map(|v| v.exp()).sum();
        row.iter().map(|v| v.exp() / z).collect()
    }

    #[test]
    fn single_frame_single_label() {
        let logits = [0.3, -1.2];
        let (loss, _) = ctc_loss(&CtcProblem::new(&logits, 2, &[0])).unwrap();
        assert!((loss + softmax(&logits)[0].ln()).abs() < 1e-12);
    }

    #[test]
    fn two_frames_three_alignments() {
        let logits = [0.5, -0.25, -1.0, 0.75];
        let p1 = softmax(&logits[..2]);
        let p2 = softmax(&logits[2..]);
        let (a, n) = (0, 1);
        let want = -(p1[a] * p2[a] + p1[a] * p2[n] + p1[n] * p2[a]).ln();
        let (loss, _) = ctc_loss(&CtcProblem::new(&logits, 2, &[0])).unwrap();
        assert!((loss - want).abs() < 1e-12);
    }

    #[test]
    fn repeated_label_needs_separating_null() {
        let logits = [0.0, 0.0];
        let err = ctc_loss(&CtcProblem::new(&logits, 2, &[0, 0])).unwrap_err();
        assert!(matches!(err, Error::InfeasibleLabel { .. }));
        assert!(matches!(
            ctc_brute_force(&CtcProblem::new(&logits, 2, &[0, 0])),
            Err(Error::InfeasibleLabel { .. })
        ));
        assert_eq!(min_frames(&[0, 0]), 3);
        let logits = [0.0; 6];
        assert!(ctc_loss(&CtcProblem::new(&logits, 2, &[0, 0])).is_ok());
    }

    #[test]
    fn empty_frames_and_bad_ids() {
        assert!(matches!(
            ctc_loss(&CtcProblem::new(&[], 3, &[])),
            Err(Error::EmptyFrames)
        ));
        assert!(matches!(
            ctc_loss(&CtcProblem::new(&[0.0; 3], 3, &[2])),
            Err(Error::LabelOutOfRange { id: 2, .. })
        ));
    }

    #[test]
    fn uniform_single_path() {
        let loss = ctc_brute_force(&CtcProblem::new(&[0.0, 0.0], 2, &[0])).unwrap();
        assert!((loss - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn empty_label_is_all_null_path() {
        let logits = [0.1, 0.2, 0.7, -0.3, 0.4, 1.0];
        let (loss, _) = ctc_loss(&CtcProblem::new(&logits, 3, &[])).unwrap();
        let want = -(softmax(&logits[..3])[2] * softmax(&logits[3..])[2]).ln();
        assert!((loss - want).abs() < 1e-12);
    }

    #[test]
    fn gradient_rows_sum_to_zero() {
        let logits: Vec<f64> = (0..20).map(|i| (i as f64 * 0.7).sin()).collect();
        let (_, grad) = ctc_loss(&CtcProblem::new(&logits, 4, &[1, 2, 1])).unwrap();
        for row in grad.chunks(4) {
            assert!(row.iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn greedy_decode_rules() {
        let (a, b, null) = (0usize, 1usize, 2usize);
        let onehot = |ids: &[usize]| -> Vec<f32> {
            ids.iter()
                .flat_map(|&k| (0..3).map(move |j| if j == k { 1.0 } else { 0.0 }))
                .collect()
        };
        assert!(ctc_greedy_decode(&onehot(&[null, null, null]), 3).is_empty());
        assert_eq!(ctc_greedy_decode(&onehot(&[a, a, null, a]), 3), vec![a, a]);
        assert_eq!(ctc_greedy_decode(&onehot(&[a, null, b]), 3), vec![a, b]);
        // ties go to the lowest index
        assert_eq!(ctc_greedy_decode(&[0.5f32, 0.5, 0.5], 3), vec![0]);
    }

    #[test]
    fn decoding_ignores_per_frame_shifts() {
        let logits: Vec<f64> = (0..24).map(|i| ((i * 7) % 5) as f64 * 0.3).collect();
        let shifted: Vec<f64> = logits
            .iter()
            .enumerate()
            .map(|(i, v)| v + (i / 4) as f64 * 10.0 - 13.0)
            .collect();
        assert_eq!(
            ctc_greedy_decode(&logits, 4),
            ctc_greedy_decode(&shifted, 4)
        );
    }
}
