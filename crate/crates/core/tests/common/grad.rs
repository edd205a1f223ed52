//! Finite-difference cases shared by the gradient tests and the
//! acceptance run.

use street_core::model::{StreetConfig, StreetModel};
use street_core::recurrent::{Axis, Direction, LstmParams, LstmVars, ScanSpec};
use street_core::tensor::{Mode, ReshapeSpec, Tensor, Var};

use super::{check, check_model, project, random_tensor, Mismatch, TOLERANCE};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct Case {
    pub name: String,
    pub run: Box<dyn Fn() -> (f64, Vec<Mismatch>)>,
}

fn case(name: impl Into<String>, run: impl Fn() -> (f64, Vec<Mismatch>) + 'static) -> Case {
    Case {
        name: name.into(),
        run: Box::new(run),
    }
}

/// Panics with the mismatches if the case fails.
pub fn assert_case(c: &Case) {
    let (worst, bad) = (c.run)();
    assert!(
        bad.is_empty(),
        "{}: worst relative error {worst:.3e}, {} mismatches: {:?}",
        c.name,
        bad.len(),
        &bad[..bad.len().min(5)]
    );
}

fn lstm_tensors(inputs: usize, cells: usize, seed: u64) -> Vec<Tensor<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = LstmParams::<f64>::init(inputs, cells, &mut rng);
    // perturb the biases so no gate sits exactly at its initial value
    let b = random_tensor(&[4 * cells], seed + 1, 0.5);
    let mut bias = p.bias;
    bias.add_assign(&b);
    vec![p.input_weights, p.recurrent_weights, bias]
}

fn vars(v: &[Var]) -> LstmVars {
    LstmVars {
        input_weights: v[0],
        recurrent_weights: v[1],
        bias: v[2],
    }
}

pub fn op_cases() -> Vec<Case> {
    let mut out = vec![
        case("conv2d", || {
            let x = random_tensor(&[2, 5, 6, 3], 1, 1.0);
            let k = random_tensor(&[3, 3, 3, 4], 2, 0.5);
            let b = random_tensor(&[4], 3, 0.5);
            check(&[x, k, b], 40, 11, |g, v| {
                let y = g.conv2d(v[0], v[1], v[2]).unwrap();
                project(g, y, 4)
            })
        }),
        case("conv2d even kernel", || {
            let x = random_tensor(&[1, 4, 5, 2], 5, 1.0);
            let k = random_tensor(&[2, 4, 2, 3], 6, 0.5);
            let b = random_tensor(&[3], 7, 0.5);
            check(&[x, k, b], 40, 12, |g, v| {
                let y = g.conv2d(v[0], v[1], v[2]).unwrap();
                project(g, y, 8)
            })
        }),
        case("maxpool", || {
            let x = random_tensor(&[2, 7, 5, 3], 9, 1.0);
            check(&[x], 200, 13, |g, v| {
                let y = g.maxpool(v[0], (3, 2)).unwrap();
                project(g, y, 10)
            })
        }),
        case("generic_reshape detile", || {
            let x = random_tensor(&[1, 3, 8, 2], 14, 1.0);
            check(&[x], 100, 15, |g, v| {
                let y = g
                    .generic_reshape(v[0], &ReshapeSpec::new(2, vec![(2, 0), (4, 2)]))
                    .unwrap();
                project(g, y, 16)
            })
        }),
        case("generic_reshape views to depth", || {
            let x = random_tensor(&[3, 1, 4, 2], 17, 1.0);
            check(&[x], 100, 18, |g, v| {
                let y = g
                    .generic_reshape(v[0], &ReshapeSpec::new(0, vec![(3, 3)]))
                    .unwrap();
                project(g, y, 19)
            })
        }),
        case("concat x", || {
            let a = random_tensor(&[2, 1, 3, 2], 20, 1.0);
            let b = random_tensor(&[2, 1, 4, 2], 21, 1.0);
            check(&[a, b], 100, 22, |g, v| {
                let y = g.concat(2, &[v[0], v[1]]).unwrap();
                project(g, y, 23)
            })
        }),
        case("concat depth", || {
            let a = random_tensor(&[2, 2, 3, 2], 24, 1.0);
            let b = random_tensor(&[2, 2, 3, 3], 25, 1.0);
            let c = random_tensor(&[2, 2, 3, 1], 26, 1.0);
            check(&[a, b, c], 100, 27, |g, v| {
                let y = g.concat(3, &[v[0], v[1], v[2]]).unwrap();
                project(g, y, 28)
            })
        }),
        case("tanh", || {
            let x = random_tensor(&[2, 3, 4, 2], 29, 2.0);
            check(&[x], 100, 30, |g, v| {
                let y = g.tanh(v[0]).unwrap();
                project(g, y, 31)
            })
        }),
        case("add", || {
            let a = random_tensor(&[3, 4], 32, 1.0);
            let b = random_tensor(&[3, 4], 33, 1.0);
            check(&[a, b], 100, 34, |g, v| {
                let y = g.add(v[0], v[1]).unwrap();
                let y = g.mul(y, y).unwrap();
                project(g, y, 35)
            })
        }),
        case("mul", || {
            let a = random_tensor(&[3, 4], 36, 1.0);
            let b = random_tensor(&[3, 4], 37, 1.0);
            check(&[a, b], 100, 38, |g, v| {
                let y = g.mul(v[0], v[1]).unwrap();
                project(g, y, 39)
            })
        }),
        case("sum", || {
            let a = random_tensor(&[2, 5], 40, 1.0);
            check(&[a], 100, 41, |g, v| {
                let t = g.tanh(v[0]).unwrap();
                g.sum(t).unwrap()
            })
        }),
        case("softmax_depth", || {
            let x = random_tensor(&[1, 2, 3, 5], 42, 2.0);
            check(&[x], 100, 43, |g, v| {
                let y = g.softmax_depth(v[0]).unwrap();
                project(g, y, 44)
            })
        }),
        case("dropout", || {
            let x = random_tensor(&[1, 1, 6, 8], 45, 1.0);
            check(&[x], 100, 46, |g, v| {
                let y = g.dropout(v[0], 0.5, Mode::Train, 99).unwrap();
                project(g, y, 47)
            })
        }),
        case("dense", || {
            let x = random_tensor(&[1, 1, 5, 4], 48, 1.0);
            let w = random_tensor(&[4, 3], 49, 1.0);
            let b = random_tensor(&[3], 50, 1.0);
            check(&[x, w, b], 100, 51, |g, v| {
                let y = g.dense(v[0], v[1], v[2]).unwrap();
                project(g, y, 52)
            })
        }),
        case("ctc_loss", || {
            let x = random_tensor(&[1, 1, 9, 5], 53, 2.0);
            check(&[x], 100, 54, |g, v| {
                g.ctc_loss(v[0], &[1, 1, 3, 0]).unwrap()
            })
        }),
        case("ctc_loss tight alignment", || {
            // as many frames as labels: exactly one alignment
            let x = random_tensor(&[1, 1, 4, 6], 55, 2.0);
            check(&[x], 100, 56, |g, v| {
                g.ctc_loss(v[0], &[2, 0, 4, 1]).unwrap()
            })
        }),
    ];
    out.extend(scan_cases());
    out
}

/// Every scan mode: both axes, both directions, full and summarizing.
pub fn scan_cases() -> Vec<Case> {
    let mut out = Vec::new();
    let mut seed = 100;
    for axis in [Axis::X, Axis::Y] {
        for direction in [Direction::Forward, Direction::Reverse] {
            for summarize in [false, true] {
                seed += 10;
                let s = seed;
                let spec = ScanSpec::new(axis, direction, summarize);
                out.push(case(
                    format!("lstm scan {axis:?} {direction:?} summarize={summarize}"),
                    move || {
                        let mut inputs = vec![random_tensor(&[2, 3, 4, 3], s, 1.0)];
                        inputs.extend(lstm_tensors(3, 4, s + 1));
                        check(&inputs, 40, s + 2, |g, v| {
                            let y = g.scan(v[0], spec, vars(&v[1..4])).unwrap();
                            project(g, y, s + 3)
                        })
                    },
                ));
            }
        }
    }
    for axis in [Axis::X, Axis::Y] {
        seed += 10;
        let s = seed;
        out.push(case(format!("bidirectional scan {axis:?}"), move || {
            let mut inputs = vec![random_tensor(&[1, 3, 4, 2], s, 1.0)];
            inputs.extend(lstm_tensors(2, 3, s + 1));
            inputs.extend(lstm_tensors(2, 3, s + 2));
            check(&inputs, 30, s + 3, |g, v| {
                let y = g
                    .bidi_scan(v[0], axis, vars(&v[1..4]), vars(&v[4..7]))
                    .unwrap();
                project(g, y, s + 4)
            })
        }));
    }
    out
}

/// The whole mini network through the CTC loss, with dropout active.
pub fn mini_graph_case() -> Case {
    case("mini STREET graph + ctc_loss", || {
        let mut cfg = StreetConfig::mini();
        cfg.dropout = 0.3;
        let model = StreetModel::<f64>::build(cfg, 3).unwrap();
        let image = random_tensor(&[1, 36, 72, 3], 5, 1.0).map(|v| v.abs());
        let (worst, bad) = check_model(&model, &image, &[1, 2, 3, 3, 0, 4], Mode::Train, 3, 1);
        let bad = bad
            .into_iter()
            .map(|(name, m)| {
                eprintln!("{name}: {m:?}");
                m
            })
            .collect();
        (worst, bad)
    })
}

pub fn all_cases() -> Vec<Case> {
    let mut out = op_cases();
    out.push(mini_graph_case());
    out
}

#[allow(dead_code)]
pub fn passes(c: &Case) -> (bool, f64) {
    let (worst, bad) = (c.run)();
    (bad.is_empty() && worst <= TOLERANCE, worst)
}
