//! Layer primitives recorded on a [`Graph`].

use rand::Rng;

use super::graph::{Backward, Graph, Var};
use super::linalg::{matmul_acc, matmul_at_acc, matmul_bt_acc};
use super::{Real, Tensor};
use crate::error::{Error, Result};
use crate::seed;

fn as4(shape: &[usize], op: &'static str) -> Result<[usize; 4]> {
    match shape {
        &[b, h, w, c] => Ok([b, h, w, c]),
        _ => Err(Error::shape(op, format!("expected rank 4, got {shape:?}"))),
    }
}

/// Whether stochastic layers are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

// ---------------------------------------------------------------------------
// conv2d

struct Conv2d {
    dims: [usize; 4],
    kh: usize,
    kw: usize,
    filters: usize,
}

/// Stride-1 cross-correlation with SAME zero padding.
fn conv2d_forward<T: Real>(x: &[T], k: &[T], bias: &[T], c: &Conv2d) -> Vec<T> {
    let [b, h, w, ch] = c.dims;
    let f = c.filters;
    let (pt, pl) = ((c.kh - 1) / 2, (c.kw - 1) / 2);
    let mut out = vec![T::zero(); b * h * w * f];
    for bi in 0..b {
        for y in 0..h {
            for xo in 0..w {
                let o_off = ((bi * h + y) * w + xo) * f;
                let o = &mut out[o_off..o_off + f];
                o.copy_from_slice(bias);
                for ky in 0..c.kh {
                    let iy = y as isize + ky as isize - pt as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    for kx in 0..c.kw {
                        let ix = xo as isize + kx as isize - pl as isize;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        let i_off = ((bi * h + iy as usize) * w + ix as usize) * ch;
                        let k_off = (ky * c.kw + kx) * ch * f;
                        for ci in 0..ch {
                            let xv = x[i_off + ci];
                            if xv == T::zero() {
                                continue;
                            }
                            let kr = &k[k_off + ci * f..k_off + (ci + 1) * f];
                            for (ov, &kv) in o.iter_mut().zip(kr) {
                                *ov += xv * kv;
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

impl<T: Real> Backward<T> for Conv2d {
    fn name(&self) -> &'static str {
        "conv2d"
    }

    fn backward(
        &self,
        parents: &[&Tensor<T>],
        _output: &Tensor<T>,
        grad: &Tensor<T>,
        needs: &[bool],
    ) -> Result<Vec<Option<Tensor<T>>>> {
        let (x, k) = (parents[0].data(), parents[1].data());
        let g = grad.data();
        let [b, h, w, ch] = self.dims;
        let f = self.filters;
        let (pt, pl) = ((self.kh - 1) / 2, (self.kw - 1) / 2);
        let mut gx = needs[0].then(|| vec![T::zero(); x.len()]);
        let mut gk = needs[1].then(|| vec![T::zero(); k.len()]);
        let mut gb = needs[2].then(|| vec![T::zero(); f]);

        for bi in 0..b {
            for y in 0..h {
                for xo in 0..w {
                    let o_off = ((bi * h + y) * w + xo) * f;
                    let go = &g[o_off..o_off + f];
                    if let Some(gb) = gb.as_mut() {
                        for (a, &v) in gb.iter_mut().zip(go) {
                            *a += v;
                        }
                    }
                    for ky in 0..self.kh {
                        let iy = y as isize + ky as isize - pt as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        for kx in 0..self.kw {
                            let ix = xo as isize + kx as isize - pl as isize;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            let i_off = ((bi * h + iy as usize) * w + ix as usize) * ch;
                            let k_off = (ky * self.kw + kx) * ch * f;
                            for ci in 0..ch {
                                let kr = k_off + ci * f;
                                if let Some(gx) = gx.as_mut() {
                                    let mut acc = T::zero();
                                    for (&gv, &kv) in go.iter().zip(&k[kr..kr + f]) {
                                        acc += gv * kv;
                                    }
                                    gx[i_off + ci] += acc;
                                }
                                if let Some(gk) = gk.as_mut() {
                                    let xv = x[i_off + ci];
                                    if xv != T::zero() {
                                        for (a, &gv) in gk[kr..kr + f].iter_mut().zip(go) {
                                            *a += xv * gv;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(vec![
            gx.map(|d| Tensor::new(parents[0].shape().to_vec(), d))
                .transpose()?,
            gk.map(|d| Tensor::new(parents[1].shape().to_vec(), d))
                .transpose()?,
            gb.map(|d| Tensor::new(vec![f], d)).transpose()?,
        ])
    }
}

// ---------------------------------------------------------------------------
// max pooling

struct MaxPool {
    argmax: Vec<usize>,
}

impl<T: Real> Backward<T> for MaxPool {
    fn name(&self) -> &'static str {
        "maxpool"
    }

    fn backward(
        &self,
        parents: &[&Tensor<T>],
        _output: &Tensor<T>,
        grad: &Tensor<T>,
        _needs: &[bool],
    ) -> Result<Vec<Option<Tensor<T>>>> {
        let mut gx = Tensor::zeros(parents[0].shape().to_vec());
        let d = gx.data_mut();
        for (&src, &g) in self.argmax.iter().zip(grad.data()) {
            d[src] += g;
        }
        Ok(vec![Some(gx)])
    }
}

// ---------------------------------------------------------------------------
// generic reshape

/// Splits one dimension into factors (listed major to minor) and sends each
/// factor to a destination dimension. A factor sent to a different
/// dimension becomes the outer part of that dimension's index; a factor
/// sent back to the source dimension stays there. If every factor leaves,
/// the source dimension collapses to extent 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReshapeSpec {
    pub src: usize,
    pub factors: Vec<(usize, usize)>,
}

impl ReshapeSpec {
    pub fn new(src: usize, factors: Vec<(usize, usize)>) -> Self {
        ReshapeSpec { src, factors }
    }

    /// Spec that leaves a tensor untouched.
    pub fn identity(shape: &[usize], dim: usize) -> Self {
        ReshapeSpec::new(dim, vec![(shape[dim], dim)])
    }

    pub fn output_shape(&self, shape: &[usize]) -> Result<Vec<usize>> {
        self.validate(shape)?;
        let mut out = shape.to_vec();
        out[self.src] = 1;
        for &(extent, dest) in &self.factors {
            if dest == self.src {
                out[dest] = extent;
            } else {
                out[dest] *= extent;
            }
        }
        Ok(out)
    }

    fn validate(&self, shape: &[usize]) -> Result<()> {
        const OP: &str = "generic_reshape";
        if self.src >= shape.len() {
            return Err(Error::shape(
                OP,
                format!("source dim {} out of range", self.src),
            ));
        }
        if self.factors.is_empty() {
            return Err(Error::invalid(OP, "no factors"));
        }
        let product: usize = self.factors.iter().map(|f| f.0).product();
        if product != shape[self.src] {
            return Err(Error::invalid(
                OP,
                format!(
                    "factors {:?} do not divide extent {} of dim {}",
                    self.factors, shape[self.src], self.src
                ),
            ));
        }
        for (i, &(extent, dest)) in self.factors.iter().enumerate() {
            if extent == 0 {
                return Err(Error::invalid(OP, "zero factor"));
            }
            if dest >= shape.len() {
                return Err(Error::shape(
                    OP,
                    format!("destination dim {dest} out of range"),
                ));
            }
            if self.factors[..i].iter().any(|f| f.1 == dest) {
                return Err(Error::invalid(
                    OP,
                    format!("destination collision at dim {dest}"),
                ));
            }
        }
        Ok(())
    }

    /// Inverse of a spec that moves at most one factor, where the moved
    /// factor is the major one. Covers de-tiling and view-to-depth moves.
    pub fn inverse(&self, shape: &[usize]) -> Result<ReshapeSpec> {
        let out = self.output_shape(shape)?;
        let moved: Vec<_> = self.factors.iter().filter(|f| f.1 != self.src).collect();
        match moved.as_slice() {
            [] => Ok(ReshapeSpec::identity(&out, self.src)),
            [&(extent, dest)] if self.factors[0].1 == dest => {
                let mut factors = vec![(extent, self.src), (shape[dest], dest)];
                if shape[dest] == 1 {
                    factors.pop();
                }
                Ok(ReshapeSpec::new(dest, factors))
            }
            _ => Err(Error::invalid(
                "generic_reshape",
                "inverse only defined for a single moved major factor",
            )),
        }
    }

    /// `perm[input_flat] = output_flat`.
    fn permutation(&self, shape: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
        let out_shape = self.output_shape(shape)?;
        let rank = shape.len();
        let mut out_strides = vec![1usize; rank];
        for d in (0..rank.saturating_sub(1)).rev() {
            out_strides[d] = out_strides[d + 1] * out_shape[d + 1];
        }
        let n: usize = shape.iter().product();
        let mut perm = vec![0usize; n];
        let mut idx = vec![0usize; rank];
        let mut digits = vec![0usize; self.factors.len()];
        for slot in perm.iter_mut() {
            // Decompose the source index into factor digits, minor first.
            let mut rem = idx[self.src];
            for (j, &(extent, _)) in self.factors.iter().enumerate().rev() {
                digits[j] = rem % extent;
                rem /= extent;
            }
            let mut flat = 0;
            for d in 0..rank {
                let coord = if d == self.src {
                    self.factors
                        .iter()
                        .zip(&digits)
                        .find(|(f, _)| f.1 == d)
                        .map_or(0, |(_, &dg)| dg)
                } else if let Some((_, &dg)) =
                    self.factors.iter().zip(&digits).find(|(f, _)| f.1 == d)
                {
                    dg * shape[d] + idx[d]
                } else {
                    idx[d]
                };
                flat += coord * out_strides[d];
            }
            *slot = flat;
            // Advance the row-major input counter.
            for d in (0..rank).rev() {
                idx[d] += 1;
                if idx[d] < shape[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        Ok((perm, out_shape))
    }

    /// Applies the rearrangement to a plain tensor.
    pub fn apply<T: Real>(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let (perm, out_shape) = self.permutation(x.shape())?;
        let mut out = vec![T::zero(); x.len()];
        for (&p, &v) in perm.iter().zip(x.data()) {
            out[p] = v;
        }
        Tensor::new(out_shape, out)
    }
}

struct Rearrange {
    perm: Vec<usize>,
}

impl<T: Real> Backward<T> for Rearrange {
    fn name(&self) -> &'static str {
        "generic_reshape"
    }

    fn backward(
        &self,
        parents: &[&Tensor<T>],
        _output: &Tensor<T>,
        grad: &Tensor<T>,
        _needs: &[bool],
    ) -> Result<Vec<Option<Tensor<T>>>> {
        let g = grad.data();
        let data = self.perm.iter().map(|&p| g[p]).collect();
        Ok(vec![Some(Tensor::new(parents[0].shape().to_vec(), data)?)])
    }
}

// ---------------------------------------------------------------------------
// concat

struct Concat {
    axis: usize,
}

/// Number of contiguous blocks before `axis` and the element count inside
/// one index of `axis`.
fn outer_inner(shape: &[usize], axis: usize) -> (usize, usize) {
    let outer = shape[..axis].iter().product();
    let inner = shape[axis + 1..].iter().product();
    (outer, inner)
}

impl<T: Real> Backward<T> for Concat {
    fn name(&self) -> &'static str {
        "concat"
    }

    fn backward(
        &self,
        parents: &[&Tensor<T>],
        output: &Tensor<T>,
        grad: &Tensor<T>,
        needs: &[bool],
    ) -> Result<Vec<Option<Tensor<T>>>> {
        let (outer, inner) = outer_inner(output.shape(), self.axis);
        let total = output.shape()[self.axis] * inner;
        let g = grad.data();
        let mut offset = 0;
        let mut result = Vec::with_capacity(parents.len());
        for (p, &need) in parents.iter().zip(needs) {
            let width = p.shape()[self.axis] * inner;
            if need {
                let mut d = Vec::with_capacity(p.len());
                for o in 0..outer {
                    let s = o * total + offset;
                    d.extend_from_slice(&g[s..s + width]);
                }
                result.push(Some(Tensor::new(p.shape().to_vec(), d)?));
            } else {
                result.push(None);
            }
            offset += width;
        }
        Ok(result)
    }
}

// ---------------------------------------------------------------------------
// element-wise and reductions

struct Tanh;

impl<T: Real> Backward<T> for Tanh {
    fn name(&self) -> &'static str {
        "tanh"
    }

    fn backward(
        &self,
        _parents: &[&Tensor<T>],
        output: &Tensor<T>,
        grad: &Tensor<T>,
        _needs: &[bool],
    ) -> Result<Vec<Option<Tensor<T>>>> {
        let d = output
            .data()
            .iter()
            .zip(grad.data())
            .map(|(&y, &g)| g * (T::one() - y * y))
            .collect();
        Ok(vec![Some(Tensor::new(output.shape().to_vec(), d)?)])
    }
}

struct Add;

impl<T: Real> Backward<T> for Add {
    fn name(&self) -> &'static str {
        "add"
    }

    fn backward(
        &self,
        _parents: &[&Tensor<T>],
        _output: &Tensor<T>,
        grad: &Tensor<T>,
        needs: &[bool],
    ) -> Result<Vec<Option<Tensor<T>>>> {
        Ok(needs.iter().map(|&n| n.then(|| grad.clone())).collect())
    }
}

struct Mul;

impl<T: Real> Backward<T> for Mul {
    fn name(&self) -> &'static str {
        "mul"
    }

    fn backward(
        &self,
        parents: &[&Tensor<T>],
        _output: &Tensor<T>,
        grad: &Tensor<T>,
        needs: &[bool],
    ) -> Result<Vec<Option<Tensor<T>>>> {
        let prod = |other: &Tensor<T>| {
            let d = other
                .data()
                .iter()
                .zip(grad.data())
                .map(|(&o, &g)| o * g)
                .collect();
            Tensor::new(other.shape().to_vec(), d)
        };
        Ok(vec![
            needs[0].then(|| prod(parents[1])).transpose()?,
            needs[1].then(|| prod(parents[0])).transpose()?,
        ])
    }
}

struct Sum;

impl<T: Real> Backward<T> for Sum {
    fn name(&self) -> &'static str {
        "sum"
    }

    fn backward(
        &self,
        parents: &[&Tensor<T>],
        _output: &Tensor<T>,
        grad: &Tensor<T>,
        _needs: &[bool],
    ) -> Result<Vec<Option<Tensor<T>>>> {
        Ok(vec![Some(Tensor::full(
            parents[0].shape().to_vec(),
            grad.item(),
        ))])
    }
}

// ---------------------------------------------------------------------------
// softmax

struct SoftmaxDepth;

/// Per-position softmax over the last dimension of a flat buffer.
pub fn softmax_rows<T: Real>(x: &[T], depth: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(x.len());
    for row in x.chunks(depth) {
        let m = row.iter().copied().fold(T::neg_infinity(), T::max);
        let start = out.len();
        let mut z = T::zero();
        for &v in row {
            let e = (v - m).exp();
            z += e;
            out.push(e);
        }
        for v in &mut out[start..] {
            *v /= z;
        }
    }
    out
}

impl<T: Real> Backward<T> for SoftmaxDepth {
    fn name(&self) -> &'static str {
        "softmax_depth"
    }

    fn backward(
        &self,
        _parents: &[&Tensor<T>],
        output: &Tensor<T>,
        grad: &Tensor<T>,
        _needs: &[bool],
    ) -> Result<Vec<Option<Tensor<T>>>> {
        let depth = output.depth();
        let mut d = Vec::with_capacity(output.len());
        for (y, g) in output.data().chunks(depth).zip(grad.data().chunks(depth)) {
            let dot: T = y.iter().zip(g).map(|(&a, &b)| a * b).sum();
            d.extend(y.iter().zip(g).map(|(&a, &b)| a * (b - dot)));
        }
        Ok(vec![Some(Tensor::new(output.shape().to_vec(), d)?)])
    }
}

// ---------------------------------------------------------------------------
// dropout

struct Dropout<T> {
    mask: Vec<T>,
}

impl<T: Real> Backward<T> for Dropout<T> {
    fn name(&self) -> &'static str {
        "dropout"
    }

    fn backward(
        &self,
        _parents: &[&Tensor<T>],
        output: &Tensor<T>,
        grad: &Tensor<T>,
        _needs: &[bool],
    ) -> Result<Vec<Option<Tensor<T>>>> {
        let d = grad
            .data()
            .iter()
            .zip(&self.mask)
            .map(|(&g, &m)| g * m)
            .collect();
        Ok(vec![Some(Tensor::new(output.shape().to_vec(), d)?)])
    }
}

// ---------------------------------------------------------------------------
// dense projection over depth

struct Dense {
    rows: usize,
    inputs: usize,
    outputs: usize,
}

impl<T: Real> Backward<T> for Dense {
    fn name(&self) -> &'static str {
        "dense"
    }

    fn backward(
        &self,
        parents: &[&Tensor<T>],
        _output: &Tensor<T>,
        grad: &Tensor<T>,
        needs: &[bool],
    ) -> Result<Vec<Option<Tensor<T>>>> {
        let (m, k, n) = (self.rows, self.inputs, self.outputs);
        let (x, w, g) = (parents[0].data(), parents[1].data(), grad.data());
        let gx = needs[0]
            .then(|| {
                let mut d = vec![T::zero(); m * k];
                matmul_bt_acc(g, w, &mut d, m, n, k);
                Tensor::new(parents[0].shape().to_vec(), d)
            })
            .transpose()?;
        let gw = needs[1]
            .then(|| {
                let mut d = vec![T::zero(); k * n];
                matmul_at_acc(x, g, &mut d, m, k, n);
                Tensor::new(vec![k, n], d)
            })
            .transpose()?;
        let gb = needs[2]
            .then(|| {
                let mut d = vec![T::zero(); n];
                for row in g.chunks(n) {
                    for (a, &v) in d.iter_mut().zip(row) {
                        *a += v;
                    }
                }
                Tensor::new(vec![n], d)
            })
            .transpose()?;
        Ok(vec![gx, gw, gb])
    }
}

// ---------------------------------------------------------------------------

impl<T: Real> Graph<T> {
    /// `input` B×H×W×C, `kernel` Kh×Kw×C×F, `bias` F → B×H×W×F. Linear; the
    /// activation is a separate op.
    pub fn conv2d(&mut self, input: Var, kernel: Var, bias: Var) -> Result<Var> {
        const OP: &str = "conv2d";
        let dims = as4(self.shape(input), OP)?;
        let [kh, kw, kc, f] = as4(self.shape(kernel), OP)?;
        if kc != dims[3] {
            return Err(Error::shape(
                OP,
                format!("kernel depth {kc} does not match input depth {}", dims[3]),
            ));
        }
        if self.shape(bias) != [f] {
            return Err(Error::shape(
                OP,
                format!("bias {:?} for {f} filters", self.shape(bias)),
            ));
        }
        let rule = Conv2d {
            dims,
            kh,
            kw,
            filters: f,
        };
        let out = conv2d_forward(
            self.value(input).data(),
            self.value(kernel).data(),
            self.value(bias).data(),
            &rule,
        );
        let value = Tensor::new(vec![dims[0], dims[1], dims[2], f], out)?;
        self.record(value, &[input, kernel, bias], Box::new(rule))
    }

    /// Max pooling with stride equal to the window; partial windows at the
    /// right and bottom edges pool over what remains. Ties route the
    /// gradient to the first maximum in row-major window order.
    pub fn maxpool(&mut self, input: Var, window: (usize, usize)) -> Result<Var> {
        const OP: &str = "maxpool";
        let [b, h, w, c] = as4(self.shape(input), OP)?;
        let (ph, pw) = window;
        if ph == 0 || pw == 0 || ph > h || pw > w {
            return Err(Error::invalid(
                OP,
                format!("window {ph}x{pw} does not fit input {h}x{w}"),
            ));
        }
        let (oh, ow) = (h.div_ceil(ph), w.div_ceil(pw));
        let x = self.value(input).data();
        let mut out = Vec::with_capacity(b * oh * ow * c);
        let mut argmax = Vec::with_capacity(b * oh * ow * c);
        for bi in 0..b {
            for oy in 0..oh {
                for ox in 0..ow {
                    for ci in 0..c {
                        let mut best = T::neg_infinity();
                        let mut best_at = 0;
                        for y in oy * ph..((oy + 1) * ph).min(h) {
                            for xx in ox * pw..((ox + 1) * pw).min(w) {
                                let at = ((bi * h + y) * w + xx) * c + ci;
                                if x[at] > best {
                                    best = x[at];
                                    best_at = at;
                                }
                            }
                        }
                        out.push(best);
                        argmax.push(best_at);
                    }
                }
            }
        }
        let value = Tensor::new(vec![b, oh, ow, c], out)?;
        self.record(value, &[input], Box::new(MaxPool { argmax }))
    }

    pub fn generic_reshape(&mut self, input: Var, spec: &ReshapeSpec) -> Result<Var> {
        let (perm, out_shape) = spec.permutation(self.shape(input))?;
        let x = self.value(input).data();
        let mut out = vec![T::zero(); x.len()];
        for (&p, &v) in perm.iter().zip(x) {
            out[p] = v;
        }
        let value = Tensor::new(out_shape, out)?;
        self.record(value, &[input], Box::new(Rearrange { perm }))
    }

    pub fn concat(&mut self, axis: usize, parts: &[Var]) -> Result<Var> {
        const OP: &str = "concat";
        let first = parts
            .first()
            .ok_or_else(|| Error::invalid(OP, "no parts"))?;
        let base = self.shape(*first).to_vec();
        if axis >= base.len() {
            return Err(Error::shape(
                OP,
                format!("axis {axis} out of range for {base:?}"),
            ));
        }
        let mut axis_total = 0;
        for &p in parts {
            let s = self.shape(p);
            let agrees = s.len() == base.len()
                && s.iter()
                    .zip(&base)
                    .enumerate()
                    .all(|(d, (a, b))| d == axis || a == b);
            if !agrees {
                return Err(Error::shape(
                    OP,
                    format!("{s:?} does not match {base:?} off axis {axis}"),
                ));
            }
            axis_total += s[axis];
        }
        let mut out_shape = base.clone();
        out_shape[axis] = axis_total;
        let (outer, inner) = outer_inner(&out_shape, axis);
        let mut out = Vec::with_capacity(outer * axis_total * inner);
        for o in 0..outer {
            for &p in parts {
                let width = self.shape(p)[axis] * inner;
                out.extend_from_slice(&self.value(p).data()[o * width..(o + 1) * width]);
            }
        }
        let value = Tensor::new(out_shape, out)?;
        self.record(value, parts, Box::new(Concat { axis }))
    }

    pub fn tanh(&mut self, input: Var) -> Result<Var> {
        let value = self.value(input).map(|v| v.tanh());
        self.record(value, &[input], Box::new(Tanh))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::shape(
                "add",
                format!("{:?} vs {:?}", self.shape(a), self.shape(b)),
            ));
        }
        let mut value = self.value(a).clone();
        value.add_assign(self.value(b));
        self.record(value, &[a, b], Box::new(Add))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::shape(
                "mul",
                format!("{:?} vs {:?}", self.shape(a), self.shape(b)),
            ));
        }
        let d = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(&x, &y)| x * y)
            .collect();
        let value = Tensor::new(self.shape(a).to_vec(), d)?;
        self.record(value, &[a, b], Box::new(Mul))
    }

    /// Sum of all elements, as a scalar.
    pub fn sum(&mut self, input: Var) -> Result<Var> {
        let value = Tensor::scalar(self.value(input).sum());
        self.record(value, &[input], Box::new(Sum))
    }

    /// Numerically stabilised softmax over the last dimension.
    pub fn softmax_depth(&mut self, input: Var) -> Result<Var> {
        let x = self.value(input);
        let value = Tensor::new(x.shape().to_vec(), softmax_rows(x.data(), x.depth()))?;
        self.record(value, &[input], Box::new(SoftmaxDepth))
    }

    /// Inverted dropout. Eval mode, and train mode at rate 0, return the
    /// input unchanged.
    pub fn dropout(&mut self, input: Var, rate: f64, mode: Mode, seed: u64) -> Result<Var> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::invalid(
                "dropout",
                format!("rate {rate} outside [0, 1)"),
            ));
        }
        if mode == Mode::Eval || rate == 0.0 {
            return Ok(input);
        }
        let mut rng = seed::rng(seed, "dropout-mask");
        let scale = T::from_f64(1.0 / (1.0 - rate));
        let x = self.value(input);
        let mask: Vec<T> = (0..x.len())
            .map(|_| {
                if rng.gen::<f64>() < rate {
                    T::zero()
                } else {
                    scale
                }
            })
            .collect();
        let d = x.data().iter().zip(&mask).map(|(&v, &m)| v * m).collect();
        let value = Tensor::new(x.shape().to_vec(), d)?;
        self.record(value, &[input], Box::new(Dropout { mask }))
    }

    /// Affine map over the last dimension: `…×I · I×O + O → …×O`.
    pub fn dense(&mut self, input: Var, weights: Var, bias: Var) -> Result<Var> {
        const OP: &str = "dense";
        let xs = self.shape(input).to_vec();
        let k = *xs.last().unwrap_or(&0);
        let (wk, n) = match self.shape(weights) {
            &[a, b] => (a, b),
            s => {
                return Err(Error::shape(
                    OP,
                    format!("weights must be rank 2, got {s:?}"),
                ))
            }
        };
        if wk != k || self.shape(bias) != [n] {
            return Err(Error::shape(
                OP,
                format!(
                    "input depth {k}, weights {:?}, bias {:?}",
                    self.shape(weights),
                    self.shape(bias)
                ),
            ));
        }
        let m = self.value(input).len() / k;
        let mut out = Vec::with_capacity(m * n);
        for _ in 0..m {
            out.extend_from_slice(self.value(bias).data());
        }
        matmul_acc(
            self.value(input).data(),
            self.value(weights).data(),
            &mut out,
            m,
            k,
            n,
        );
        let mut shape = xs;
        *shape.last_mut().unwrap() = n;
        let value = Tensor::new(shape, out)?;
        self.record(
            value,
            &[input, weights, bias],
            Box::new(Dense {
                rows: m,
                inputs: k,
                outputs: n,
            }),
        )
    }
}

/// Copies `len` indices starting at `start` along `axis`.
pub fn slice_axis<T: Real>(
    x: &Tensor<T>,
    axis: usize,
    start: usize,
    len: usize,
) -> Result<Tensor<T>> {
    let shape = x.shape();
    if axis >= shape.len() || start + len > shape[axis] || len == 0 {
        return Err(Error::shape(
            "slice",
            format!("[{start}, {}) along {axis} of {shape:?}", start + len),
        ));
    }
    let (outer, inner) = outer_inner(shape, axis);
    let mut out = Vec::with_capacity(outer * len * inner);
    for o in 0..outer {
        let base = (o * shape[axis] + start) * inner;
        out.extend_from_slice(&x.data()[base..base + len * inner]);
    }
    let mut s = shape.to_vec();
    s[axis] = len;
    Tensor::new(s, out)
}

/// Reverses a tensor along one axis.
pub fn reverse_axis<T: Real>(x: &Tensor<T>, axis: usize) -> Tensor<T> {
    let shape = x.shape();
    let (outer, inner) = outer_inner(shape, axis);
    let n = shape[axis];
    let mut out = Vec::with_capacity(x.len());
    for o in 0..outer {
        for i in (0..n).rev() {
            let base = (o * n + i) * inner;
            out.extend_from_slice(&x.data()[base..base + inner]);
        }
    }
    Tensor::new(shape.to_vec(), out).expect("same shape")
}
