use rand::Rng;

use crate::ctc::ctc_greedy_decode;
use crate::error::{Error, Result};
use crate::recurrent::{lstm_param_count, Axis, Direction, LstmParams, LstmVars, ScanSpec};
use crate::seed;
use crate::tensor::{Graph, Mode, ParamId, Real, ReshapeSpec, Tensor, Var};
use crate::text::{fold_spaces, Charset};

use super::config::{LineFanIn, StreetConfig};

/// Named parameter tensors in a fixed order. Names are
/// `<layer>/<block>`; the layer part matches the report rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamStore<T> {
    entries: Vec<(String, Tensor<T>)>,
}

impl<T: Real> ParamStore<T> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor<T>)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Tensor<T>> {
        self.entries.iter_mut().map(|(_, t)| t)
    }

    pub fn get(&self, name: &str) -> Option<&Tensor<T>> {
        self.index_of(name).map(|i| &self.entries[i].1)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|(n, _)| n == name)
    }

    pub fn by_index(&self, i: usize) -> &Tensor<T> {
        &self.entries[i].1
    }

    pub fn by_index_mut(&mut self, i: usize) -> &mut Tensor<T> {
        &mut self.entries[i].1
    }

    pub fn total(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.len()).sum()
    }

    /// Replaces a tensor, keeping its shape.
    pub fn set(&mut self, name: &str, value: Tensor<T>) -> Result<()> {
        let i = self
            .index_of(name)
            .ok_or_else(|| Error::invalid("params", format!("no parameter {name}")))?;
        if self.entries[i].1.shape() != value.shape() {
            return Err(Error::shape(
                "params",
                format!(
                    "{name}: {:?} vs {:?}",
                    self.entries[i].1.shape(),
                    value.shape()
                ),
            ));
        }
        self.entries[i].1 = value;
        Ok(())
    }

    pub fn cast<U: Real>(&self) -> ParamStore<U> {
        ParamStore {
            entries: self
                .entries
                .iter()
                .map(|(n, t)| (n.clone(), t.cast()))
                .collect(),
        }
    }
}

/// Shape bookkeeping for one layer of the network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerShape {
    pub name: String,
    pub inputs: Vec<Vec<usize>>,
    pub output: Vec<usize>,
}

/// One row of the parameter report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerCount {
    pub name: String,
    pub weights: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreetModel<T> {
    pub config: StreetConfig,
    pub params: ParamStore<T>,
}

/// Input widths of the three line readers.
fn reader_inputs(c: &StreetConfig) -> [usize; 3] {
    let s = c.summarizer;
    match c.fan_in {
        LineFanIn::Prose => [s, 2 * s, s],
        LineFanIn::Table => [2 * s, 4 * s, 2 * s],
    }
}

enum Block {
    Glorot(Vec<usize>, usize, usize),
    Zero(Vec<usize>),
    Lstm(usize, usize),
}

/// Parameter layout implied by a configuration, in storage order.
fn blocks(c: &StreetConfig) -> Vec<(String, Block)> {
    let k = c.conv_kernel;
    let [f0, f1] = c.conv_filters;
    let mut out = Vec::new();
    let conv = |out: &mut Vec<(String, Block)>, name: &str, cin: usize, f: usize| {
        out.push((
            format!("{name}/kernel"),
            Block::Glorot(vec![k, k, cin, f], k * k * cin, k * k * f),
        ));
        out.push((format!("{name}/bias"), Block::Zero(vec![f])));
    };
    conv(&mut out, "Conv0", 3, f0);
    conv(&mut out, "Conv1", f0, f1);
    for i in 0..4 {
        out.push((format!("V-SumLSTM{i}"), Block::Lstm(f1, c.summarizer)));
    }
    for (i, width) in reader_inputs(c).into_iter().enumerate() {
        out.push((format!("BidiLSTM{i}/fwd"), Block::Lstm(width, c.reader)));
        out.push((format!("BidiLSTM{i}/bwd"), Block::Lstm(width, c.reader)));
    }
    out.push(("LTRLSTM0".into(), Block::Lstm(2 * c.reader, c.posnorm[0])));
    out.push(("RTLLSTM".into(), Block::Lstm(c.posnorm[0], c.posnorm[1])));
    out.push((
        "LTRLSTM1".into(),
        Block::Lstm(c.views * c.posnorm[1], c.final_width),
    ));
    out.push((
        "Softmax/weights".into(),
        Block::Glorot(vec![c.final_width, c.classes], c.final_width, c.classes),
    ));
    out.push(("Softmax/bias".into(), Block::Zero(vec![c.classes])));
    out
}

const LSTM_PARTS: [&str; 3] = ["wx", "wh", "b"];

fn lstm_entries<T: Real>(name: &str, p: LstmParams<T>) -> Vec<(String, Tensor<T>)> {
    vec![
        (format!("{name}/wx"), p.input_weights),
        (format!("{name}/wh"), p.recurrent_weights),
        (format!("{name}/b"), p.bias),
    ]
}

/// Closed-form weight counts per layer, without building anything.
pub fn closed_form_counts(c: &StreetConfig) -> Vec<LayerCount> {
    let k = c.conv_kernel;
    let [f0, f1] = c.conv_filters;
    let mut rows = vec![
        ("Conv0", k * k * 3 * f0 + f0),
        ("Conv1", k * k * f0 * f1 + f1),
    ];
    let sum = lstm_param_count(f1, c.summarizer);
    rows.extend([
        ("V-SumLSTM0", sum),
        ("V-SumLSTM1", sum),
        ("V-SumLSTM2", sum),
        ("V-SumLSTM3", sum),
    ]);
    let [a, b, d] = reader_inputs(c);
    rows.push(("BidiLSTM0", 2 * lstm_param_count(a, c.reader)));
    rows.push(("BidiLSTM1", 2 * lstm_param_count(b, c.reader)));
    rows.push(("BidiLSTM2", 2 * lstm_param_count(d, c.reader)));
    rows.push(("LTRLSTM0", lstm_param_count(2 * c.reader, c.posnorm[0])));
    rows.push(("RTLLSTM", lstm_param_count(c.posnorm[0], c.posnorm[1])));
    rows.push((
        "LTRLSTM1",
        lstm_param_count(c.views * c.posnorm[1], c.final_width),
    ));
    rows.push(("Softmax", c.final_width * c.classes + c.classes));
    rows.into_iter()
        .map(|(n, w)| LayerCount {
            name: n.to_string(),
            weights: w,
        })
        .collect()
}

impl<T: Real> StreetModel<T> {
    /// Seeded initialisation: Glorot-uniform weights, zero biases, LSTM
    /// forget-gate bias 1.
    pub fn build(config: StreetConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut entries = Vec::new();
        for (name, block) in blocks(&config) {
            let mut rng = seed::rng(seed, &format!("init/{name}"));
            match block {
                Block::Glorot(shape, fan_in, fan_out) => {
                    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                    let t = Tensor::from_fn(shape, |_| T::from_f64(rng.gen_range(-limit..limit)));
                    entries.push((name, t));
                }
                Block::Zero(shape) => entries.push((name, Tensor::zeros(shape))),
                Block::Lstm(i, n) => {
                    entries.extend(lstm_entries(&name, LstmParams::init(i, n, &mut rng)))
                }
            }
        }
        let model = StreetModel {
            config,
            params: ParamStore { entries },
        };
        model.check_counts()?;
        Ok(model)
    }

    /// Every parameter zero.
    pub fn zeros(config: StreetConfig) -> Result<Self> {
        let mut m = Self::build(config, 0)?;
        for t in m.params.tensors_mut() {
            *t = Tensor::zeros(t.shape().to_vec());
        }
        Ok(m)
    }

    /// Builds from a named tensor list, checking names and shapes against
    /// the configuration.
    pub fn from_params(config: StreetConfig, named: Vec<(String, Tensor<T>)>) -> Result<Self> {
        let mut m = Self::zeros(config)?;
        if named.len() != m.params.len() {
            return Err(Error::Config(format!(
                "expected {} parameter blocks, found {}",
                m.params.len(),
                named.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for (name, t) in named {
            if !seen.insert(name.clone()) {
                return Err(Error::Config(format!("parameter {name} given twice")));
            }
            m.params
                .set(&name, t)
                .map_err(|e| Error::Config(format!("parameter {name}: {e}")))?;
        }
        Ok(m)
    }

    pub fn cast<U: Real>(&self) -> StreetModel<U> {
        StreetModel {
            config: self.config.clone(),
            params: self.params.cast(),
        }
    }

    /// Per-layer counts of the built parameter tensors.
    pub fn count_params(&self) -> Vec<LayerCount> {
        let mut rows: Vec<LayerCount> = Vec::new();
        for (name, t) in self.params.iter() {
            let layer = name.split('/').next().unwrap_or(name);
            match rows.last_mut() {
                Some(r) if r.name == layer => r.weights += t.len(),
                _ => rows.push(LayerCount {
                    name: layer.to_string(),
                    weights: t.len(),
                }),
            }
        }
        rows
    }

    fn check_counts(&self) -> Result<()> {
        if self.count_params() != closed_form_counts(&self.config) {
            return Err(Error::Config(
                "parameter blocks disagree with the closed-form counts".into(),
            ));
        }
        Ok(())
    }

    fn lstm(&self, g: &mut Graph<T>, name: &str) -> LstmVars {
        let [wx, wh, b] = LSTM_PARTS.map(|p| {
            let full = format!("{name}/{p}");
            let i = self
                .params
                .index_of(&full)
                .expect("parameter layout is fixed by the config");
            g.param(ParamId(i), self.params.by_index(i))
        });
        LstmVars {
            input_weights: wx,
            recurrent_weights: wh,
            bias: b,
        }
    }

    fn param(&self, g: &mut Graph<T>, name: &str) -> Var {
        let i = self
            .params
            .index_of(name)
            .expect("parameter layout is fixed by the config");
        g.param(ParamId(i), self.params.by_index(i))
    }

    /// Shapes of every layer for this configuration, computed without
    /// running the network.
    pub fn shape_plan(&self) -> Vec<LayerShape> {
        shape_plan(&self.config)
    }

    /// Adds the network to `g`, returning the pre-softmax logits
    /// (`1 × 1 × frames × classes`). Parameters are registered with ids
    /// equal to their storage index. When `trace` is given, every layer's
    /// shape is appended to it.
    pub fn forward_graph(
        &self,
        g: &mut Graph<T>,
        image: Var,
        mode: Mode,
        seed: u64,
        mut trace: Option<&mut Vec<(LayerShape, Var)>>,
    ) -> Result<Var> {
        let c = &self.config;
        let (t, v) = (c.tile, c.views);
        let expected = [1, t, t * v, 3];
        if g.shape(image) != expected {
            return Err(Error::shape(
                "street",
                format!("image {:?}, expected {expected:?}", g.shape(image)),
            ));
        }
        let mut note = |g: &Graph<T>, name: &str, inputs: &[Var], out: Var| {
            if let Some(tr) = trace.as_deref_mut() {
                tr.push((
                    LayerShape {
                        name: name.to_string(),
                        inputs: inputs.iter().map(|&i| g.shape(i).to_vec()).collect(),
                        output: g.shape(out).to_vec(),
                    },
                    out,
                ));
            }
        };

        let x = g.generic_reshape(image, &ReshapeSpec::new(2, vec![(v, 0), (t, 2)]))?;
        note(g, "Reshape0", &[image], x);
        // centre pixels on zero; [0, 1] inputs leave a large common offset
        // that the first convolution otherwise spends many steps unlearning
        let offset = g.constant(Tensor::full(g.shape(x).to_vec(), T::from_f64(-0.5)));
        let x = g.add(x, offset)?;

        let (k0, b0) = (self.param(g, "Conv0/kernel"), self.param(g, "Conv0/bias"));
        let c0 = g.conv2d(x, k0, b0)?;
        let c0 = g.tanh(c0)?;
        note(g, "Conv0", &[x], c0);
        let p0 = g.maxpool(c0, c.pools[0])?;
        note(g, "Maxpool0", &[c0], p0);
        let (k1, b1) = (self.param(g, "Conv1/kernel"), self.param(g, "Conv1/bias"));
        let c1 = g.conv2d(p0, k1, b1)?;
        let c1 = g.tanh(c1)?;
        note(g, "Conv1", &[p0], c1);
        let p1 = g.maxpool(c1, c.pools[1])?;
        note(g, "Maxpool1", &[c1], p1);

        let up = ScanSpec::new(Axis::Y, Direction::Reverse, true);
        let down = ScanSpec::new(Axis::Y, Direction::Forward, true);
        let mut sums = Vec::with_capacity(4);
        for (i, spec) in [up, up, down, down].into_iter().enumerate() {
            let name = format!("V-SumLSTM{i}");
            let p = self.lstm(g, &name);
            let s = g.scan(p1, spec, p)?;
            note(g, &name, &[p1], s);
            sums.push(s);
        }
        let [top_up, mid_up, mid_down, bottom_down] = [sums[0], sums[1], sums[2], sums[3]];
        let mut depth_concat = |g: &mut Graph<T>, parts: &[Var]| -> Result<Var> {
            if parts.len() == 1 {
                return Ok(parts[0]);
            }
            let out = g.concat(3, parts)?;
            note(g, "DepthConcat", parts, out);
            Ok(out)
        };
        let line_inputs = match c.fan_in {
            LineFanIn::Prose => [top_up, depth_concat(g, &[mid_up, mid_down])?, bottom_down],
            LineFanIn::Table => [
                depth_concat(g, &[top_up, mid_up])?,
                depth_concat(g, &sums)?,
                depth_concat(g, &[mid_down, bottom_down])?,
            ],
        };

        let mut lines = Vec::with_capacity(3);
        for (i, input) in line_inputs.into_iter().enumerate() {
            let name = format!("BidiLSTM{i}");
            let fwd = self.lstm(g, &format!("{name}/fwd"));
            let bwd = self.lstm(g, &format!("{name}/bwd"));
            let out = g.bidi_scan(input, Axis::X, fwd, bwd)?;
            note(g, &name, &[input], out);
            lines.push(out);
        }
        let xcat = g.concat(2, &lines)?;
        note(g, "XConcat", &lines, xcat);

        let p = self.lstm(g, "LTRLSTM0");
        let ltr = g.scan(xcat, ScanSpec::new(Axis::X, Direction::Forward, false), p)?;
        note(g, "LTRLSTM0", &[xcat], ltr);
        let p = self.lstm(g, "RTLLSTM");
        let rtl = g.scan(ltr, ScanSpec::new(Axis::X, Direction::Reverse, false), p)?;
        note(g, "RTLLSTM", &[ltr], rtl);

        let combined = g.generic_reshape(rtl, &ReshapeSpec::new(0, vec![(v, 3)]))?;
        note(g, "Reshape1", &[rtl], combined);
        let dropped = g.dropout(
            combined,
            c.dropout,
            mode,
            seed::derive_seed(seed, "dropout"),
        )?;
        if dropped != combined {
            note(g, "Dropout", &[combined], dropped);
        }

        let p = self.lstm(g, "LTRLSTM1");
        let fin = g.scan(
            dropped,
            ScanSpec::new(Axis::X, Direction::Forward, false),
            p,
        )?;
        note(g, "LTRLSTM1", &[dropped], fin);
        let (w, b) = (
            self.param(g, "Softmax/weights"),
            self.param(g, "Softmax/bias"),
        );
        let logits = g.dense(fin, w, b)?;
        note(g, "Softmax", &[fin], logits);
        Ok(logits)
    }

    /// Logits `1 × 1 × frames × classes` for one image.
    pub fn forward(&self, image: &Tensor<T>, mode: Mode, seed: u64) -> Result<Tensor<T>> {
        let mut g = Graph::new();
        let x = g.constant(image.clone());
        let y = self.forward_graph(&mut g, x, mode, seed, None)?;
        Ok(g.value(y).clone())
    }

    /// Runs the network and returns the shape of every layer, checking it
    /// against the plan.
    pub fn trace_shapes(&self, image: &Tensor<T>) -> Result<Vec<LayerShape>> {
        let mut g = Graph::new();
        let x = g.constant(image.clone());
        let mut trace = Vec::new();
        self.forward_graph(&mut g, x, Mode::Eval, 0, Some(&mut trace))?;
        let shapes: Vec<LayerShape> = trace.into_iter().map(|(s, _)| s).collect();
        let plan: Vec<LayerShape> = self
            .shape_plan()
            .into_iter()
            .filter(|l| l.name != "Dropout")
            .collect();
        if shapes != plan {
            return Err(Error::shape(
                "street",
                "traced shapes disagree with the plan",
            ));
        }
        Ok(shapes)
    }

    /// Greedy transcript with runs of spaces folded.
    pub fn predict_text(&self, image: &Tensor<T>, charset: &Charset) -> Result<String> {
        if charset.size() != self.config.classes {
            return Err(Error::invalid(
                "predict",
                format!(
                    "charset has {} classes, model has {}",
                    charset.size(),
                    self.config.classes
                ),
            ));
        }
        let logits = self.forward(image, Mode::Eval, 0)?;
        Ok(decode_logits(logits.data(), charset))
    }
}

/// Best-path decoding of `frames × classes` logits to folded text.
pub fn decode_logits<T: Real>(logits: &[T], charset: &Charset) -> String {
    let ids = ctc_greedy_decode(logits, charset.size());
    fold_spaces(&charset.decode(&ids))
}

/// Layer shapes implied by the wiring rules.
pub fn shape_plan(c: &StreetConfig) -> Vec<LayerShape> {
    let (t, v) = (c.tile, c.views);
    let [f0, f1] = c.conv_filters;
    let s0 = t.div_ceil(c.pools[0].0);
    let s = c.post_conv();
    let mut plan = Vec::new();
    let mut add = |name: &str, inputs: Vec<Vec<usize>>, output: Vec<usize>| {
        plan.push(LayerShape {
            name: name.to_string(),
            inputs,
            output,
        })
    };
    add("Reshape0", vec![vec![1, t, v * t, 3]], vec![v, t, t, 3]);
    add("Conv0", vec![vec![v, t, t, 3]], vec![v, t, t, f0]);
    add("Maxpool0", vec![vec![v, t, t, f0]], vec![v, s0, s0, f0]);
    add("Conv1", vec![vec![v, s0, s0, f0]], vec![v, s0, s0, f1]);
    add("Maxpool1", vec![vec![v, s0, s0, f1]], vec![v, s, s, f1]);
    let sum = vec![v, 1, s, c.summarizer];
    for i in 0..4 {
        add(
            &format!("V-SumLSTM{i}"),
            vec![vec![v, s, s, f1]],
            sum.clone(),
        );
    }
    let widths = reader_inputs(c);
    let concat = |n: usize| (vec![sum.clone(); n], vec![v, 1, s, n * c.summarizer]);
    match c.fan_in {
        LineFanIn::Prose => {
            let (i, o) = concat(2);
            add("DepthConcat", i, o);
        }
        LineFanIn::Table => {
            for n in [2, 4, 2] {
                let (i, o) = concat(n);
                add("DepthConcat", i, o);
            }
        }
    }
    let line = vec![v, 1, s, 2 * c.reader];
    for (i, w) in widths.into_iter().enumerate() {
        add(
            &format!("BidiLSTM{i}"),
            vec![vec![v, 1, s, w]],
            line.clone(),
        );
    }
    add("XConcat", vec![line; 3], vec![v, 1, 3 * s, 2 * c.reader]);
    add(
        "LTRLSTM0",
        vec![vec![v, 1, 3 * s, 2 * c.reader]],
        vec![v, 1, 3 * s, c.posnorm[0]],
    );
    add(
        "RTLLSTM",
        vec![vec![v, 1, 3 * s, c.posnorm[0]]],
        vec![v, 1, 3 * s, c.posnorm[1]],
    );
    let combined = vec![1, 1, 3 * s, v * c.posnorm[1]];
    add(
        "Reshape1",
        vec![vec![v, 1, 3 * s, c.posnorm[1]]],
        combined.clone(),
    );
    add("LTRLSTM1", vec![combined], vec![1, 1, 3 * s, c.final_width]);
    add(
        "Softmax",
        vec![vec![1, 1, 3 * s, c.final_width]],
        vec![1, 1, 3 * s, c.classes],
    );
    plan
}
