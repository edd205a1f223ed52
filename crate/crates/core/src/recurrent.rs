//! LSTM cell and directional scans over 4-D feature maps.
//!
//! A scan runs one LSTM over every row (x axis) or every column (y axis)
//! of a B×H×W×D tensor, treating each as an independent sequence starting
//! from zero state. Summarizing scans emit only the final step.
//!
//! Gate order is input, forget, cell candidate, output. There are no
//! peephole connections, so a direction with input width `i` and `n`
//! cells has `4·n·(i+n+1)` parameters.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::linalg::{matmul_acc, matmul_at_acc, matmul_bt_acc, sigmoid};
use crate::tensor::{Backward, Graph, Real, Tensor, Var};

/// Closed-form parameter count of one LSTM direction.
pub const fn lstm_param_count(inputs: usize, cells: usize) -> usize {
    4 * cells * (inputs + cells + 1)
}

/// Weights of one LSTM direction.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams<T> {
    /// i × 4n
    pub input_weights: Tensor<T>,
    /// n × 4n
    pub recurrent_weights: Tensor<T>,
    /// 4n
    pub bias: Tensor<T>,
}

impl<T: Real> LstmParams<T> {
    pub fn zeros(inputs: usize, cells: usize) -> Self {
        LstmParams {
            input_weights: Tensor::zeros(vec![inputs, 4 * cells]),
            recurrent_weights: Tensor::zeros(vec![cells, 4 * cells]),
            bias: Tensor::zeros(vec![4 * cells]),
        }
    }

    /// Glorot-uniform weights, zero biases except forget-gate bias 1.
    /// Each gate's block counts as its own matrix, so the fan-out is `n`
    /// rather than `4n`.
    pub fn init(inputs: usize, cells: usize, rng: &mut impl Rng) -> Self {
        let mut glorot = |rows: usize, cols: usize| {
            let limit = (6.0 / (rows + cols / 4) as f64).sqrt();
            Tensor::from_fn(vec![rows, cols], |_| {
                T::from_f64(rng.gen_range(-limit..limit))
            })
        };
        let input_weights = glorot(inputs, 4 * cells);
        let recurrent_weights = glorot(cells, 4 * cells);
        let bias = Tensor::from_fn(vec![4 * cells], |j| {
            if (cells..2 * cells).contains(&j) {
                T::one()
            } else {
                T::zero()
            }
        });
        LstmParams {
            input_weights,
            recurrent_weights,
            bias,
        }
    }

    pub fn inputs(&self) -> usize {
        self.input_weights.shape()[0]
    }

    pub fn cells(&self) -> usize {
        self.recurrent_weights.shape()[0]
    }

    pub fn param_count(&self) -> usize {
        self.input_weights.len() + self.recurrent_weights.len() + self.bias.len()
    }

    fn check(&self) -> Result<()> {
        let (i, n) = (self.inputs(), self.cells());
        if self.input_weights.shape() != [i, 4 * n]
            || self.recurrent_weights.shape() != [n, 4 * n]
            || self.bias.shape() != [4 * n]
        {
            return Err(Error::shape("lstm", "inconsistent parameter block"));
        }
        Ok(())
    }
}

/// Graph handles for one LSTM direction's three parameter tensors.
#[derive(Debug, Clone, Copy)]
pub struct LstmVars {
    pub input_weights: Var,
    pub recurrent_weights: Var,
    pub bias: Var,
}

impl LstmVars {
    /// Registers `p` as constants, for use outside training.
    pub fn constants<T: Real>(g: &mut Graph<T>, p: &LstmParams<T>) -> Self {
        LstmVars {
            input_weights: g.constant(p.input_weights.clone()),
            recurrent_weights: g.constant(p.recurrent_weights.clone()),
            bias: g.constant(p.bias.clone()),
        }
    }

    /// Registers `p` as differentiable inputs.
    pub fn inputs<T: Real>(g: &mut Graph<T>, p: &LstmParams<T>) -> Self {
        LstmVars {
            input_weights: g.input(p.input_weights.clone()),
            recurrent_weights: g.input(p.recurrent_weights.clone()),
            bias: g.input(p.bias.clone()),
        }
    }
}

/// One LSTM step for a single sequence.
pub fn lstm_cell_step<T: Real>(
    x: &[T],
    h: &[T],
    c: &[T],
    p: &LstmParams<T>,
) -> Result<(Vec<T>, Vec<T>)> {
    p.check()?;
    let (i, n) = (p.inputs(), p.cells());
    if x.len() != i || h.len() != n || c.len() != n {
        return Err(Error::shape(
            "lstm_cell_step",
            format!(
                "x {}, h {}, c {} for i={i}, n={n}",
                x.len(),
                h.len(),
                c.len()
            ),
        ));
    }
    let mut z = p.bias.data().to_vec();
    matmul_acc(x, p.input_weights.data(), &mut z, 1, i, 4 * n);
    matmul_acc(h, p.recurrent_weights.data(), &mut z, 1, n, 4 * n);
    let mut h_new = vec![T::zero(); n];
    let mut c_new = vec![T::zero(); n];
    for j in 0..n {
        let ig = sigmoid(z[j]);
        let fg = sigmoid(z[n + j]);
        let gg = z[2 * n + j].tanh();
        let og = sigmoid(z[3 * n + j]);
        c_new[j] = fg * c[j] + ig * gg;
        h_new[j] = og * c_new[j].tanh();
    }
    Ok((h_new, c_new))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Increasing index: left-to-right along x, downward along y.
    Forward,
    /// Decreasing index: right-to-left along x, upward along y.
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanSpec {
    pub axis: Axis,
    pub direction: Direction,
    pub summarize: bool,
}

impl ScanSpec {
    pub const fn new(axis: Axis, direction: Direction, summarize: bool) -> Self {
        ScanSpec {
            axis,
            direction,
            summarize,
        }
    }

    pub fn output_shape(&self, input: &[usize], cells: usize) -> Vec<usize> {
        let mut s = input.to_vec();
        s[3] = cells;
        if self.summarize {
            match self.axis {
                Axis::X => s[2] = 1,
                Axis::Y => s[1] = 1,
            }
        }
        s
    }
}

/// Addressing of the independent sequences inside a B×H×W×D tensor.
#[derive(Debug, Clone, Copy)]
struct Layout {
    dims: [usize; 4],
    axis: Axis,
}

impl Layout {
    fn sequences(&self) -> usize {
        let [b, h, w, _] = self.dims;
        match self.axis {
            Axis::X => b * h,
            Axis::Y => b * w,
        }
    }

    fn length(&self) -> usize {
        match self.axis {
            Axis::X => self.dims[2],
            Axis::Y => self.dims[1],
        }
    }

    /// Offset of the depth vector for sequence `s` at position `t`, in a
    /// tensor of this layout whose depth is `depth` and whose scanned
    /// extent is `extent`.
    fn offset(&self, s: usize, t: usize, depth: usize, extent: usize) -> usize {
        let w = self.dims[2];
        match self.axis {
            Axis::X => (s * extent + t) * depth,
            Axis::Y => {
                let (bi, x) = (s / w, s % w);
                ((bi * extent + t) * w + x) * depth
            }
        }
    }
}

struct Scan<T> {
    layout: Layout,
    spec: ScanSpec,
    cells: usize,
    /// Inputs gathered in processing order, (L·S)×D.
    xs: Vec<T>,
    /// Activated gates per processing step, L×S×4n.
    gates: Vec<T>,
    cell: Vec<T>,
    tanh_cell: Vec<T>,
    hidden: Vec<T>,
}

impl<T: Real> Scan<T> {
    fn position(&self, k: usize) -> usize {
        match self.spec.direction {
            Direction::Forward => k,
            Direction::Reverse => self.layout.length() - 1 - k,
        }
    }

    fn run(
        input: &Tensor<T>,
        spec: ScanSpec,
        wx: &[T],
        wh: &[T],
        b: &[T],
        cells: usize,
    ) -> Result<(Self, Tensor<T>)> {
        let dims = match input.shape() {
            &[a, b, c, d] => [a, b, c, d],
            s => return Err(Error::shape("scan", format!("expected rank 4, got {s:?}"))),
        };
        let depth = dims[3];
        let n = cells;
        let layout = Layout {
            dims,
            axis: spec.axis,
        };
        let (seqs, len) = (layout.sequences(), layout.length());
        let mut scan = Scan {
            layout,
            spec,
            cells,
            xs: Vec::with_capacity(len * seqs * depth),
            gates: vec![T::zero(); len * seqs * 4 * n],
            cell: vec![T::zero(); len * seqs * n],
            tanh_cell: vec![T::zero(); len * seqs * n],
            hidden: vec![T::zero(); len * seqs * n],
        };
        let x = input.data();
        for k in 0..len {
            let t = scan.position(k);
            for s in 0..seqs {
                let o = layout.offset(s, t, depth, len);
                scan.xs.extend_from_slice(&x[o..o + depth]);
            }
        }

        // Input contributions for every step at once.
        let mut z_all = vec![T::zero(); len * seqs * 4 * n];
        for row in z_all.chunks_mut(4 * n) {
            row.copy_from_slice(b);
        }
        matmul_acc(&scan.xs, wx, &mut z_all, len * seqs, depth, 4 * n);

        let step = seqs * n;
        let gstep = seqs * 4 * n;
        for k in 0..len {
            let z = &mut z_all[k * gstep..(k + 1) * gstep];
            if k > 0 {
                matmul_acc(
                    &scan.hidden[(k - 1) * step..k * step],
                    wh,
                    z,
                    seqs,
                    n,
                    4 * n,
                );
            }
            for s in 0..seqs {
                let zr = &z[s * 4 * n..(s + 1) * 4 * n];
                let gr = &mut scan.gates[k * gstep + s * 4 * n..k * gstep + (s + 1) * 4 * n];
                for j in 0..n {
                    gr[j] = sigmoid(zr[j]);
                    gr[n + j] = sigmoid(zr[n + j]);
                    gr[2 * n + j] = zr[2 * n + j].tanh();
                    gr[3 * n + j] = sigmoid(zr[3 * n + j]);
                }
                for j in 0..n {
                    let c_prev = if k > 0 {
                        scan.cell[(k - 1) * step + s * n + j]
                    } else {
                        T::zero()
                    };
                    let c = gr[n + j] * c_prev + gr[j] * gr[2 * n + j];
                    let tc = c.tanh();
                    let at = k * step + s * n + j;
                    scan.cell[at] = c;
                    scan.tanh_cell[at] = tc;
                    scan.hidden[at] = gr[3 * n + j] * tc;
                }
            }
        }

        let out_shape = spec.output_shape(&dims, n);
        let mut out = vec![T::zero(); out_shape.iter().product()];
        if spec.summarize {
            let k = len - 1;
            for s in 0..seqs {
                let o = layout.offset(s, 0, n, 1);
                out[o..o + n]
                    .copy_from_slice(&scan.hidden[k * step + s * n..k * step + (s + 1) * n]);
            }
        } else {
            for k in 0..len {
                let t = scan.position(k);
                for s in 0..seqs {
                    let o = layout.offset(s, t, n, len);
                    out[o..o + n]
                        .copy_from_slice(&scan.hidden[k * step + s * n..k * step + (s + 1) * n]);
                }
            }
        }
        let out = Tensor::new(out_shape, out)?;
        Ok((scan, out))
    }
}

impl<T: Real> Backward<T> for Scan<T> {
    fn name(&self) -> &'static str {
        "lstm_scan"
    }

    fn backward(
        &self,
        parents: &[&Tensor<T>],
        _output: &Tensor<T>,
        grad: &Tensor<T>,
        needs: &[bool],
    ) -> Result<Vec<Option<Tensor<T>>>> {
        let (wx, wh) = (parents[1].data(), parents[2].data());
        let depth = self.layout.dims[3];
        let n = self.cells;
        let (seqs, len) = (self.layout.sequences(), self.layout.length());
        let step = seqs * n;
        let gstep = seqs * 4 * n;
        let g = grad.data();

        let mut dz = vec![T::zero(); len * gstep];
        let mut dh_next = vec![T::zero(); step];
        let mut dc_next = vec![T::zero(); step];
        let mut g_wh = vec![T::zero(); n * 4 * n];
        let mut g_b = vec![T::zero(); 4 * n];

        for k in (0..len).rev() {
            let emitted = !self.spec.summarize || k == len - 1;
            let (t_out, extent) = if self.spec.summarize {
                (0, 1)
            } else {
                (self.position(k), len)
            };
            for s in 0..seqs {
                let go = emitted.then(|| self.layout.offset(s, t_out, n, extent));
                let gr = &self.gates[k * gstep + s * 4 * n..k * gstep + (s + 1) * 4 * n];
                let dzr = &mut dz[k * gstep + s * 4 * n..k * gstep + (s + 1) * 4 * n];
                for j in 0..n {
                    let at = k * step + s * n + j;
                    let mut dh = dh_next[s * n + j];
                    if let Some(o) = go {
                        dh += g[o + j];
                    }
                    let (ig, fg, gg, og) = (gr[j], gr[n + j], gr[2 * n + j], gr[3 * n + j]);
                    let tc = self.tanh_cell[at];
                    let d_o = dh * tc;
                    let dc = dc_next[s * n + j] + dh * og * (T::one() - tc * tc);
                    let c_prev = if k > 0 {
                        self.cell[(k - 1) * step + s * n + j]
                    } else {
                        T::zero()
                    };
                    dzr[j] = dc * gg * ig * (T::one() - ig);
                    dzr[n + j] = dc * c_prev * fg * (T::one() - fg);
                    dzr[2 * n + j] = dc * ig * (T::one() - gg * gg);
                    dzr[3 * n + j] = d_o * og * (T::one() - og);
                    dc_next[s * n + j] = dc * fg;
                }
            }
            let dzk = &dz[k * gstep..(k + 1) * gstep];
            for row in dzk.chunks(4 * n) {
                for (a, &v) in g_b.iter_mut().zip(row) {
                    *a += v;
                }
            }
            dh_next.iter_mut().for_each(|v| *v = T::zero());
            if k > 0 {
                let h_prev = &self.hidden[(k - 1) * step..k * step];
                matmul_at_acc(h_prev, dzk, &mut g_wh, seqs, n, 4 * n);
                matmul_bt_acc(dzk, wh, &mut dh_next, seqs, 4 * n, n);
            }
        }

        let gx = if needs[0] {
            let mut gathered = vec![T::zero(); len * seqs * depth];
            matmul_bt_acc(&dz, wx, &mut gathered, len * seqs, 4 * n, depth);
            let mut gx = vec![T::zero(); parents[0].len()];
            for k in 0..len {
                let t = self.position(k);
                for s in 0..seqs {
                    let o = self.layout.offset(s, t, depth, len);
                    let src = &gathered[(k * seqs + s) * depth..(k * seqs + s + 1) * depth];
                    for (a, &v) in gx[o..o + depth].iter_mut().zip(src) {
                        *a += v;
                    }
                }
            }
            Some(Tensor::new(parents[0].shape().to_vec(), gx)?)
        } else {
            None
        };
        let g_wx = needs[1]
            .then(|| {
                let mut d = vec![T::zero(); depth * 4 * n];
                matmul_at_acc(&self.xs, &dz, &mut d, len * seqs, depth, 4 * n);
                Tensor::new(vec![depth, 4 * n], d)
            })
            .transpose()?;
        Ok(vec![
            gx,
            g_wx,
            needs[2]
                .then(|| Tensor::new(vec![n, 4 * n], g_wh))
                .transpose()?,
            needs[3]
                .then(|| Tensor::new(vec![4 * n], g_b))
                .transpose()?,
        ])
    }
}

impl<T: Real> Graph<T> {
    /// Runs one LSTM direction over every sequence along `spec.axis`.
    pub fn scan(&mut self, input: Var, spec: ScanSpec, p: LstmVars) -> Result<Var> {
        let wx_shape = self.shape(p.input_weights).to_vec();
        let wh_shape = self.shape(p.recurrent_weights).to_vec();
        let n = wh_shape.first().copied().unwrap_or(0);
        let in_shape = self.shape(input).to_vec();
        if in_shape.len() != 4
            || wx_shape != [in_shape[3], 4 * n]
            || wh_shape != [n, 4 * n]
            || self.shape(p.bias) != [4 * n]
        {
            return Err(Error::shape(
                "scan",
                format!(
                    "input {in_shape:?} with weights {wx_shape:?} / {wh_shape:?} / {:?}",
                    self.shape(p.bias)
                ),
            ));
        }
        let (rule, out) = Scan::run(
            self.value(input),
            spec,
            self.value(p.input_weights).data(),
            self.value(p.recurrent_weights).data(),
            self.value(p.bias).data(),
            n,
        )?;
        self.record(
            out,
            &[input, p.input_weights, p.recurrent_weights, p.bias],
            Box::new(rule),
        )
    }

    /// Forward and reverse scans along `axis`, depth-concatenated
    /// (forward first).
    pub fn bidi_scan(
        &mut self,
        input: Var,
        axis: Axis,
        fwd: LstmVars,
        bwd: LstmVars,
    ) -> Result<Var> {
        let nf = self.shape(fwd.recurrent_weights)[0];
        let nb = self.shape(bwd.recurrent_weights)[0];
        if nf != nb {
            return Err(Error::shape(
                "bidi_scan",
                format!("direction widths differ: {nf} vs {nb}"),
            ));
        }
        let f = self.scan(input, ScanSpec::new(axis, Direction::Forward, false), fwd)?;
        let b = self.scan(input, ScanSpec::new(axis, Direction::Reverse, false), bwd)?;
        self.concat(3, &[f, b])
    }
}

/// Convenience: evaluate a scan on plain tensors.
pub fn scan<T: Real>(input: &Tensor<T>, spec: ScanSpec, p: &LstmParams<T>) -> Result<Tensor<T>> {
    p.check()?;
    let mut g = Graph::new();
    let x = g.constant(input.clone());
    let vars = LstmVars::constants(&mut g, p);
    let y = g.scan(x, spec, vars)?;
    Ok(g.value(y).clone())
}

/// Convenience: evaluate a bidirectional scan on plain tensors.
pub fn bidi_scan<T: Real>(
    input: &Tensor<T>,
    axis: Axis,
    fwd: &LstmParams<T>,
    bwd: &LstmParams<T>,
) -> Result<Tensor<T>> {
    let mut g = Graph::new();
    let x = g.constant(input.clone());
    let f = LstmVars::constants(&mut g, fwd);
    let b = LstmVars::constants(&mut g, bwd);
    let y = g.bidi_scan(x, axis, f, b)?;
    Ok(g.value(y).clone())
}
