#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use street_core::model::StreetModel;
use street_core::tensor::{Graph, Mode, ParamId, Tensor, Var};

pub mod grad;

pub const STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-4;
/// Denominator floor so that two near-zero derivatives compare absolutely.
pub const FLOOR: f64 = 1e-5;

pub fn random_tensor(shape: &[usize], seed: u64, scale: f64) -> Tensor<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Tensor::from_fn(shape.to_vec(), |_| rng.gen_range(-scale..scale))
}

#[derive(Debug)]
pub struct Mismatch {
    pub input: usize,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub relative: f64,
}

pub fn relative_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(FLOOR)
}

/// Central-difference check of `f` with respect to every input. At most
/// `max_per_input` coordinates per input are probed, chosen at random.
/// Returns the worst relative error and all mismatches above tolerance.
pub fn check<F>(
    inputs: &[Tensor<f64>],
    max_per_input: usize,
    seed: u64,
    f: F,
) -> (f64, Vec<Mismatch>)
where
    F: Fn(&mut Graph<f64>, &[Var]) -> Var,
{
    let eval = |values: &[Tensor<f64>]| -> f64 {
        let mut g = Graph::new();
        let vars: Vec<Var> = values.iter().map(|t| g.constant(t.clone())).collect();
        let out = f(&mut g, &vars);
        g.value(out).item()
    };
    let mut g = Graph::new();
    let vars: Vec<Var> = inputs.iter().map(|t| g.input(t.clone())).collect();
    let out = f(&mut g, &vars);
    assert!(g.value(out).is_scalar(), "checked function must be scalar");
    let grads = g.backward(out).expect("backward");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for (k, x) in inputs.iter().enumerate() {
        let analytic = grads
            .wrt(vars[k])
            .cloned()
            .unwrap_or_else(|| Tensor::zeros(x.shape().to_vec()));
        let idx: Vec<usize> = if x.len() <= max_per_input {
            (0..x.len()).collect()
        } else {
            (0..max_per_input)
                .map(|_| rng.gen_range(0..x.len()))
                .collect()
        };
        for i in idx {
            let mut plus = inputs.to_vec();
            plus[k].data_mut()[i] += STEP;
            let mut minus = inputs.to_vec();
            minus[k].data_mut()[i] -= STEP;
            let numeric = (eval(&plus) - eval(&minus)) / (2.0 * STEP);
            let a = analytic.data()[i];
            let rel = relative_error(a, numeric);
            worst = worst.max(rel);
            if rel > TOLERANCE {
                bad.push(Mismatch {
                    input: k,
                    index: i,
                    analytic: a,
                    numeric,
                    relative: rel,
                });
            }
        }
    }
    (worst, bad)
}

/// Weighted sum with fixed pseudo-random weights, so every output element
/// influences the scalar differently.
pub fn project(g: &mut Graph<f64>, v: Var, seed: u64) -> Var {
    let w = random_tensor(g.shape(v), seed, 1.0);
    let w = g.constant(w);
    let p = g.mul(v, w).unwrap();
    g.sum(p).unwrap()
}

/// Finite-difference check of the CTC loss of a whole model with respect
/// to the image and a random sample of every parameter tensor.
pub fn check_model(
    model: &StreetModel<f64>,
    image: &Tensor<f64>,
    label: &[usize],
    mode: Mode,
    per_tensor: usize,
    seed: u64,
) -> (f64, Vec<(String, Mismatch)>) {
    let loss = |m: &StreetModel<f64>, img: &Tensor<f64>| -> f64 {
        let mut g = Graph::new();
        let x = g.constant(img.clone());
        let logits = m.forward_graph(&mut g, x, mode, 17, None).unwrap();
        let l = g.ctc_loss(logits, label).unwrap();
        g.value(l).item()
    };
    let mut g = Graph::new();
    let x = g.input(image.clone());
    let logits = model.forward_graph(&mut g, x, mode, 17, None).unwrap();
    let l = g.ctc_loss(logits, label).unwrap();
    let grads = g.backward(l).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    let mut probe = |name: &str, analytic: f64, numeric: f64, index: usize, input: usize| {
        let rel = relative_error(analytic, numeric);
        worst = worst.max(rel);
        if rel > TOLERANCE {
            bad.push((
                name.to_string(),
                Mismatch {
                    input,
                    index,
                    analytic,
                    numeric,
                    relative: rel,
                },
            ));
        }
    };
    let gi = grads.wrt(x).unwrap().clone();
    for _ in 0..per_tensor {
        let i = rng.gen_range(0..image.len());
        let mut p = image.clone();
        p.data_mut()[i] += STEP;
        let mut q = image.clone();
        q.data_mut()[i] -= STEP;
        let numeric = (loss(model, &p) - loss(model, &q)) / (2.0 * STEP);
        probe("image", gi.data()[i], numeric, i, 0);
    }
    let names: Vec<String> = model.params.iter().map(|(n, _)| n.to_string()).collect();
    for (k, name) in names.iter().enumerate() {
        let t = model.params.by_index(k);
        let analytic = grads
            .param(ParamId(k))
            .cloned()
            .unwrap_or_else(|| Tensor::zeros(t.shape().to_vec()));
        for _ in 0..per_tensor {
            let i = rng.gen_range(0..t.len());
            let mut plus = model.clone();
            plus.params.by_index_mut(k).data_mut()[i] += STEP;
            let mut minus = model.clone();
            minus.params.by_index_mut(k).data_mut()[i] -= STEP;
            let numeric = (loss(&plus, image) - loss(&minus, image)) / (2.0 * STEP);
            probe(name, analytic.data()[i], numeric, i, k + 1);
        }
    }
    (worst, bad)
}
