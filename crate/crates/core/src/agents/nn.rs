//! Small convolutional Q-network, written out by hand: two 1-D
//! convolutions over the time axis of a state-action window, two fully
//! connected layers, ReLU activations, plain SGD. Forward, backward and a
//! versioned text weights format with bit-exact round-trips.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::rng::SeededRng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NetError {
    #[error("invalid network spec: {0}")]
    BadSpec(String),
    #[error("input has {found} values, expected {expected}")]
    BadInputShape { expected: usize, found: usize },
    #[error("weights file line {line}: {reason}")]
    BadWeightsFile { line: usize, reason: String },
    #[error("weights file is for `{found}`, expected `{expected}`")]
    SpecMismatch { expected: String, found: String },
    #[error("io error: {0}")]
    Io(String),
}

/// Layer shapes. The input is a `window x channels` matrix, time-major;
/// both convolutions slide along the time axis with stride 1 and no padding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NetSpec {
    pub window: usize,
    pub channels: usize,
    pub conv1_filters: usize,
    pub conv1_kernel: usize,
    pub conv2_filters: usize,
    pub conv2_kernel: usize,
    pub hidden: usize,
    pub outputs: usize,
}

impl NetSpec {
    pub fn validate(&self) -> Result<(), NetError> {
        for (name, v) in [
            ("window", self.window),
            ("channels", self.channels),
            ("conv1_filters", self.conv1_filters),
            ("conv1_kernel", self.conv1_kernel),
            ("conv2_filters", self.conv2_filters),
            ("conv2_kernel", self.conv2_kernel),
            ("hidden", self.hidden),
            ("outputs", self.outputs),
        ] {
            if v == 0 {
                return Err(NetError::BadSpec(format!("{name} must be positive")));
            }
        }
        if self.conv2_len() < 1 {
            return Err(NetError::BadSpec(format!(
                "window {} too short for kernels {} and {}",
                self.window, self.conv1_kernel, self.conv2_kernel
            )));
        }
        Ok(())
    }

    pub fn input_len(&self) -> usize {
        self.window * self.channels
    }

    fn conv1_len(&self) -> usize {
        self.window + 1 - self.conv1_kernel
    }

    fn conv2_len(&self) -> usize {
        (self.conv1_len() + 1).saturating_sub(self.conv2_kernel)
    }

    fn flat_len(&self) -> usize {
        self.conv2_len() * self.conv2_filters
    }

    /// Signature line stored in weights files.
    pub fn signature(&self) -> String {
        format!(
            "window={} channels={} conv1={}x{} conv2={}x{} hidden={} outputs={}",
            self.window,
            self.channels,
            self.conv1_filters,
            self.conv1_kernel,
            self.conv2_filters,
            self.conv2_kernel,
            self.hidden,
            self.outputs
        )
    }

    /// Named tensors in file order: (name, shape).
    fn tensors(&self) -> Vec<(&'static str, Vec<usize>)> {
        vec![
            ("conv1_w", vec![self.conv1_filters, self.conv1_kernel, self.channels]),
            ("conv1_b", vec![self.conv1_filters]),
            ("conv2_w", vec![self.conv2_filters, self.conv2_kernel, self.conv1_filters]),
            ("conv2_b", vec![self.conv2_filters]),
            ("fc1_w", vec![self.hidden, self.flat_len()]),
            ("fc1_b", vec![self.hidden]),
            ("fc2_w", vec![self.outputs, self.hidden]),
            ("fc2_b", vec![self.outputs]),
        ]
    }

}

impl Default for NetSpec {
    fn default() -> Self {
        NetSpec {
            window: 8,
            channels: 5,
            conv1_filters: 8,
            conv1_kernel: 3,
            conv2_filters: 8,
            conv2_kernel: 3,
            hidden: 32,
            outputs: 12,
        }
    }
}

/// Offsets of each tensor inside the flat parameter vector.
#[derive(Clone, Debug)]
struct Layout {
    conv1_w: usize,
    conv1_b: usize,
    conv2_w: usize,
    conv2_b: usize,
    fc1_w: usize,
    fc1_b: usize,
    fc2_w: usize,
    fc2_b: usize,
    total: usize,
}

impl Layout {
    fn of(spec: &NetSpec) -> Self {
        let mut off = 0usize;
        let mut take = |len: usize| {
            let at = off;
            off += len;
            at
        };
        let conv1_w = take(spec.conv1_filters * spec.conv1_kernel * spec.channels);
        let conv1_b = take(spec.conv1_filters);
        let conv2_w = take(spec.conv2_filters * spec.conv2_kernel * spec.conv1_filters);
        let conv2_b = take(spec.conv2_filters);
        let fc1_w = take(spec.hidden * spec.flat_len());
        let fc1_b = take(spec.hidden);
        let fc2_w = take(spec.outputs * spec.hidden);
        let fc2_b = take(spec.outputs);
        Layout { conv1_w, conv1_b, conv2_w, conv2_b, fc1_w, fc1_b, fc2_w, fc2_b, total: off }
    }
}

/// Post-activation values cached by the forward pass for backprop.
struct Cache {
    act1: Vec<f64>,
    act2: Vec<f64>,
    act_hidden: Vec<f64>,
    output: Vec<f64>,
}

/// One training example: input window, the action whose value is
/// regressed, and its target.
#[derive(Clone, Debug)]
pub struct RegressionSample {
    pub input: Vec<f64>,
    pub action: usize,
    pub target: f64,
}

#[derive(Clone, Debug)]
pub struct QNetwork {
    spec: NetSpec,
    layout: Layout,
    params: Vec<f64>,
}

impl QNetwork {
    /// Xavier-uniform initialization from the given generator.
    pub fn new(spec: NetSpec, rng: &mut SeededRng) -> Result<Self, NetError> {
        spec.validate()?;
        let layout = Layout::of(&spec);
        let mut params = vec![0.0; layout.total];
        let fans: [(usize, usize, usize, usize); 4] = [
            (
                layout.conv1_w,
                spec.conv1_filters * spec.conv1_kernel * spec.channels,
                spec.conv1_kernel * spec.channels,
                spec.conv1_filters,
            ),
            (
                layout.conv2_w,
                spec.conv2_filters * spec.conv2_kernel * spec.conv1_filters,
                spec.conv2_kernel * spec.conv1_filters,
                spec.conv2_filters,
            ),
            (layout.fc1_w, spec.hidden * spec.flat_len(), spec.flat_len(), spec.hidden),
            (layout.fc2_w, spec.outputs * spec.hidden, spec.hidden, spec.outputs),
        ];
        for (offset, len, fan_in, fan_out) in fans {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for p in params[offset..offset + len].iter_mut() {
                *p = rng.uniform(-limit, limit);
            }
        }
        // Small nonzero biases keep pre-activations off the exact ReLU
        // kink that zero-initialized dead units would sit on.
        for (offset, len) in [
            (layout.conv1_b, spec.conv1_filters),
            (layout.conv2_b, spec.conv2_filters),
            (layout.fc1_b, spec.hidden),
            (layout.fc2_b, spec.outputs),
        ] {
            for p in params[offset..offset + len].iter_mut() {
                *p = rng.uniform(-0.1, 0.1);
            }
        }
        Ok(QNetwork { spec, layout, params })
    }

    /// All weights and biases zero; forward output is identically zero.
    pub fn zeros(spec: NetSpec) -> Result<Self, NetError> {
        spec.validate()?;
        let layout = Layout::of(&spec);
        let params = vec![0.0; layout.total];
        Ok(QNetwork { spec, layout, params })
    }

    pub fn spec(&self) -> &NetSpec {
        &self.spec
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    fn forward_cached(&self, input: &[f64]) -> Result<Cache, NetError> {
        let s = &self.spec;
        if input.len() != s.input_len() {
            return Err(NetError::BadInputShape { expected: s.input_len(), found: input.len() });
        }
        let p = &self.params;
        let l = &self.layout;

        let len1 = s.conv1_len();
        let mut act1 = vec![0.0; len1 * s.conv1_filters];
        for t in 0..len1 {
            for f in 0..s.conv1_filters {
                let mut z = p[l.conv1_b + f];
                for dt in 0..s.conv1_kernel {
                    let w_base = l.conv1_w + (f * s.conv1_kernel + dt) * s.channels;
                    let x_base = (t + dt) * s.channels;
                    for c in 0..s.channels {
                        z += p[w_base + c] * input[x_base + c];
                    }
                }
                act1[t * s.conv1_filters + f] = z.max(0.0);
            }
        }

        let len2 = s.conv2_len();
        let mut act2 = vec![0.0; len2 * s.conv2_filters];
        for t in 0..len2 {
            for g in 0..s.conv2_filters {
                let mut z = p[l.conv2_b + g];
                for dt in 0..s.conv2_kernel {
                    let w_base = l.conv2_w + (g * s.conv2_kernel + dt) * s.conv1_filters;
                    let a_base = (t + dt) * s.conv1_filters;
                    for f in 0..s.conv1_filters {
                        z += p[w_base + f] * act1[a_base + f];
                    }
                }
                act2[t * s.conv2_filters + g] = z.max(0.0);
            }
        }

        let flat = s.flat_len();
        let mut act_hidden = vec![0.0; s.hidden];
        for j in 0..s.hidden {
            let mut z = p[l.fc1_b + j];
            let w_base = l.fc1_w + j * flat;
            for (i, &a) in act2.iter().enumerate() {
                z += p[w_base + i] * a;
            }
            act_hidden[j] = z.max(0.0);
        }

        let mut output = vec![0.0; s.outputs];
        for (o, out) in output.iter_mut().enumerate() {
            let mut z = p[l.fc2_b + o];
            let w_base = l.fc2_w + o * s.hidden;
            for (j, &a) in act_hidden.iter().enumerate() {
                z += p[w_base + j] * a;
            }
            *out = z;
        }

        Ok(Cache { act1, act2, act_hidden, output })
    }

    /// Action values for one input window.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, NetError> {
        Ok(self.forward_cached(input)?.output)
    }

    /// Mean squared error of the batch on the selected outputs, plus the
    /// gradient of that loss with respect to every parameter.
    pub fn loss_and_gradients(
        &self,
        batch: &[RegressionSample],
    ) -> Result<(f64, Vec<f64>), NetError> {
        assert!(!batch.is_empty(), "empty regression batch");
        let s = &self.spec;
        let p = &self.params;
        let l = &self.layout;
        let mut grads = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        let scale = 1.0 / batch.len() as f64;

        for sample in batch {
            let cache = self.forward_cached(&sample.input)?;
            let residual = cache.output[sample.action] - sample.target;
            loss += residual * residual * scale;

            // d loss / d output: nonzero only at the regressed action.
            let mut d_out = vec![0.0; s.outputs];
            d_out[sample.action] = 2.0 * residual * scale;

            // Output layer.
            let mut d_hidden = vec![0.0; s.hidden];
            for (o, &d) in d_out.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                grads[l.fc2_b + o] += d;
                let w_base = l.fc2_w + o * s.hidden;
                for j in 0..s.hidden {
                    grads[w_base + j] += d * cache.act_hidden[j];
                    d_hidden[j] += d * p[w_base + j];
                }
            }

            // Hidden layer (through its ReLU).
            let flat = s.flat_len();
            let mut d_flat = vec![0.0; flat];
            for j in 0..s.hidden {
                if cache.act_hidden[j] <= 0.0 || d_hidden[j] == 0.0 {
                    continue;
                }
                let d = d_hidden[j];
                grads[l.fc1_b + j] += d;
                let w_base = l.fc1_w + j * flat;
                for i in 0..flat {
                    grads[w_base + i] += d * cache.act2[i];
                    d_flat[i] += d * p[w_base + i];
                }
            }

            // Second convolution (through its ReLU).
            let len2 = s.conv2_len();
            let mut d_act1 = vec![0.0; cache.act1.len()];
            for t in 0..len2 {
                for g in 0..s.conv2_filters {
                    let idx = t * s.conv2_filters + g;
                    if cache.act2[idx] <= 0.0 || d_flat[idx] == 0.0 {
                        continue;
                    }
                    let d = d_flat[idx];
                    grads[l.conv2_b + g] += d;
                    for dt in 0..s.conv2_kernel {
                        let w_base = l.conv2_w + (g * s.conv2_kernel + dt) * s.conv1_filters;
                        let a_base = (t + dt) * s.conv1_filters;
                        for f in 0..s.conv1_filters {
                            grads[w_base + f] += d * cache.act1[a_base + f];
                            d_act1[a_base + f] += d * p[w_base + f];
                        }
                    }
                }
            }

            // First convolution (through its ReLU).
            let len1 = s.conv1_len();
            for t in 0..len1 {
                for f in 0..s.conv1_filters {
                    let idx = t * s.conv1_filters + f;
                    if cache.act1[idx] <= 0.0 || d_act1[idx] == 0.0 {
                        continue;
                    }
                    let d = d_act1[idx];
                    grads[l.conv1_b + f] += d;
                    for dt in 0..s.conv1_kernel {
                        let w_base = l.conv1_w + (f * s.conv1_kernel + dt) * s.channels;
                        let x_base = (t + dt) * s.channels;
                        for c in 0..s.channels {
                            grads[w_base + c] += d * sample.input[x_base + c];
                        }
                    }
                }
            }
        }

        Ok((loss, grads))
    }

    /// Plain gradient-descent step.
    pub fn sgd_step(&mut self, grads: &[f64], lr: f64) {
        assert_eq!(grads.len(), self.params.len());
        for (p, g) in self.params.iter_mut().zip(grads.iter()) {
            *p -= lr * g;
        }
    }

    /// Serialize as versioned text: header, spec signature, then one line
    /// per tensor with 17-significant-digit decimals. Round-trips are
    /// bit-exact.
    pub fn save(&self, out: &mut impl Write) -> Result<(), NetError> {
        let mut text = String::new();
        let _ = writeln!(text, "{FORMAT_TAG}");
        let _ = writeln!(text, "{}", self.spec.signature());
        let mut offset = 0usize;
        for (name, shape) in self.spec.tensors() {
            let len: usize = shape.iter().product();
            let dims: Vec<String> = shape.iter().map(|d| d.to_string()).collect();
            let _ = write!(text, "{} {} :", name, dims.join(" "));
            for v in &self.params[offset..offset + len] {
                let _ = write!(text, " {v:.16e}");
            }
            text.push('\n');
            offset += len;
        }
        out.write_all(text.as_bytes()).map_err(|e| NetError::Io(e.to_string()))
    }

    /// Load weights for exactly `expected` shapes; any mismatch is an
    /// error naming what was found.
    pub fn load(expected: NetSpec, input: &mut impl BufRead) -> Result<Self, NetError> {
        expected.validate()?;
        let mut lines = Vec::new();
        let mut buf = String::new();
        loop {
            buf.clear();
            let n = input.read_line(&mut buf).map_err(|e| NetError::Io(e.to_string()))?;
            if n == 0 {
                break;
            }
            lines.push(buf.trim_end_matches('\n').to_string());
        }
        if lines.first().map(String::as_str) != Some(FORMAT_TAG) {
            return Err(NetError::BadWeightsFile {
                line: 1,
                reason: format!(
                    "unrecognized header `{}`, expected `{FORMAT_TAG}`",
                    lines.first().cloned().unwrap_or_default()
                ),
            });
        }
        let signature = lines.get(1).cloned().unwrap_or_default();
        if signature != expected.signature() {
            return Err(NetError::SpecMismatch {
                expected: expected.signature(),
                found: signature,
            });
        }
        let layout = Layout::of(&expected);
        let mut params = vec![0.0; layout.total];
        let tensors = expected.tensors();
        if lines.len() != 2 + tensors.len() {
            return Err(NetError::BadWeightsFile {
                line: lines.len(),
                reason: format!("expected {} tensor lines, found {}", tensors.len(), lines.len() - 2),
            });
        }
        let mut offset = 0usize;
        for (i, (name, shape)) in tensors.iter().enumerate() {
            let line_no = i + 3;
            let line = &lines[i + 2];
            let (head, values) = line.split_once(" :").ok_or_else(|| NetError::BadWeightsFile {
                line: line_no,
                reason: "missing `name shape : values` separator".into(),
            })?;
            let mut head_parts = head.split_whitespace();
            let found_name = head_parts.next().unwrap_or_default();
            if found_name != *name {
                return Err(NetError::BadWeightsFile {
                    line: line_no,
                    reason: format!("expected tensor `{name}`, found `{found_name}`"),
                });
            }
            let found_shape: Vec<usize> = head_parts
                .map(|d| {
                    d.parse().map_err(|_| NetError::BadWeightsFile {
                        line: line_no,
                        reason: format!("bad dimension `{d}`"),
                    })
                })
                .collect::<Result<_, _>>()?;
            if found_shape != *shape {
                return Err(NetError::BadWeightsFile {
                    line: line_no,
                    reason: format!("tensor `{name}` has shape {found_shape:?}, expected {shape:?}"),
                });
            }
            let len: usize = shape.iter().product();
            let mut count = 0usize;
            for (k, tok) in values.split_whitespace().enumerate() {
                if k >= len {
                    return Err(NetError::BadWeightsFile {
                        line: line_no,
                        reason: format!("tensor `{name}` has more than {len} values"),
                    });
                }
                params[offset + k] = tok.parse().map_err(|_| NetError::BadWeightsFile {
                    line: line_no,
                    reason: format!("bad float `{tok}`"),
                })?;
                count += 1;
            }
            if count != len {
                return Err(NetError::BadWeightsFile {
                    line: line_no,
                    reason: format!("tensor `{name}` has {count} values, expected {len}"),
                });
            }
            offset += len;
        }
        Ok(QNetwork { spec: expected, layout, params })
    }
}

const FORMAT_TAG: &str = "qnet-weights v1";

/// Average several parameter vectors elementwise, in the given order.
pub fn average_params(sets: &[Vec<f64>]) -> Vec<f64> {
    assert!(!sets.is_empty());
    let len = sets[0].len();
    let mut out = vec![0.0; len];
    for set in sets {
        assert_eq!(set.len(), len, "parameter sets must match");
        for (o, v) in out.iter_mut().zip(set.iter()) {
            *o += v;
        }
    }
    let scale = 1.0 / sets.len() as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    out
}
