use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::GnnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu if z > 0.0 => 1.0,
            Activation::Relu => 0.0,
            Activation::Identity => 1.0,
        }
    }
}

/// One affine layer `act(W x + b)` with `W` stored row-major, `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub input: usize,
    pub output: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Dense {
    pub fn new(
        input: usize,
        output: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
        activation: Activation,
    ) -> Result<Self, GnnError> {
        if input == 0 || output == 0 {
            return Err(GnnError::ZeroWidth);
        }
        if weights.len() != input * output || bias.len() != output {
            return Err(GnnError::ParameterShape {
                expected: input * output + output,
                found: weights.len() + bias.len(),
            });
        }
        if weights.iter().chain(&bias).any(|w| !w.is_finite()) {
            return Err(GnnError::NonFiniteParameter);
        }
        Ok(Dense {
            input,
            output,
            weights,
            bias,
            activation,
        })
    }

    fn pre_activation(&self, x: &[f64]) -> Vec<f64> {
        (0..self.output)
            .map(|o| {
                let row = &self.weights[o * self.input..(o + 1) * self.input];
                self.bias[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }
}

/// A stack of dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Dense>,
}

/// Everything the backward pass needs from a forward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    /// `inputs[l]` is what layer `l` consumed; the last entry is the output.
    pub inputs: Vec<Vec<f64>>,
    /// Pre-activations per layer.
    pub pre: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.inputs.last().expect("a trace always holds the input")
    }
}

impl Mlp {
    pub fn new(layers: Vec<Dense>) -> Result<Self, GnnError> {
        if layers.is_empty() {
            return Err(GnnError::NoLayers);
        }
        for pair in layers.windows(2) {
            if pair[0].output != pair[1].input {
                return Err(GnnError::WidthMismatch {
                    what: "consecutive layers".into(),
                    expected: pair[0].output,
                    found: pair[1].input,
                });
            }
        }
        Ok(Mlp { layers })
    }

    /// Random parameters drawn uniformly from `±1/√fan_in`. Hidden layers
    /// use ReLU, the last layer is linear.
    pub fn random(widths: &[usize], rng: &mut ChaCha8Rng) -> Result<Self, GnnError> {
        if widths.len() < 2 {
            return Err(GnnError::NoLayers);
        }
        let last = widths.len() - 2;
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(l, w)| {
                let (input, output) = (w[0], w[1]);
                if input == 0 || output == 0 {
                    return Err(GnnError::ZeroWidth);
                }
                let bound = 1.0 / (input as f64).sqrt();
                let mut draw = |k: usize| -> Vec<f64> {
                    (0..k).map(|_| rng.random_range(-bound..=bound)).collect()
                };
                let weights = draw(input * output);
                let bias = draw(output);
                let act = if l == last {
                    Activation::Identity
                } else {
                    Activation::Relu
                };
                Dense::new(input, output, weights, bias, act)
            })
            .collect::<Result<_, _>>()?;
        Self::new(layers)
    }

    pub fn seeded(widths: &[usize], seed: u64) -> Result<Self, GnnError> {
        Self::random(widths, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// One linear layer with identity weights and zero bias.
    pub fn identity(width: usize) -> Result<Self, GnnError> {
        let weights = (0..width * width)
            .map(|k| f64::from(u8::from(k / width == k % width)))
            .collect();
        Self::new(vec![Dense::new(
            width,
            width,
            weights,
            vec![0.0; width],
            Activation::Identity,
        )?])
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].input
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].output
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.input_width(), "mlp input width");
        self.layers.iter().fold(x.to_vec(), |h, l| {
            l.pre_activation(&h)
                .into_iter()
                .map(|z| l.activation.apply(z))
                .collect()
        })
    }

    pub fn forward_trace(&self, x: &[f64]) -> Trace {
        assert_eq!(x.len(), self.input_width(), "mlp input width");
        let mut inputs = vec![x.to_vec()];
        let mut pre = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            let z = l.pre_activation(inputs.last().expect("non-empty"));
            inputs.push(z.iter().map(|&v| l.activation.apply(v)).collect());
            pre.push(z);
        }
        Trace { inputs, pre }
    }

    /// Parameter gradients given `d loss / d output`, in the flat order of
    /// [`Mlp::params`].
    pub fn backward(&self, trace: &Trace, grad_out: &[f64]) -> Vec<f64> {
        let mut grads = vec![Vec::new(); self.layers.len()];
        let mut delta = grad_out.to_vec();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let dz: Vec<f64> = delta
                .iter()
                .zip(&trace.pre[l])
                .map(|(d, &z)| d * layer.activation.derivative(z))
                .collect();
            let x = &trace.inputs[l];
            let mut g = Vec::with_capacity(layer.weights.len() + layer.bias.len());
            for d in &dz {
                g.extend(x.iter().map(|v| d * v));
            }
            g.extend_from_slice(&dz);
            grads[l] = g;
            delta = (0..layer.input)
                .map(|i| {
                    (0..layer.output)
                        .map(|o| layer.weights[o * layer.input + i] * dz[o])
                        .sum()
                })
                .collect();
        }
        grads.concat()
    }

    /// All weights then biases, layer by layer.
    pub fn params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    pub fn set_param(&mut self, mut k: usize, v: f64) {
        for l in &mut self.layers {
            if k < l.weights.len() {
                l.weights[k] = v;
                return;
            }
            k -= l.weights.len();
            if k < l.bias.len() {
                l.bias[k] = v;
                return;
            }
            k -= l.bias.len();
        }
        panic!("parameter index out of range");
    }

    /// ReLU on/off pattern of every hidden unit.
    fn mask(&self, x: &[f64]) -> Vec<bool> {
        let t = self.forward_trace(x);
        self.layers
            .iter()
            .zip(&t.pre)
            .filter(|(l, _)| l.activation == Activation::Relu)
            .flat_map(|(_, z)| z.iter().map(|&v| v > 0.0))
            .collect()
    }
}

/// A scalar loss on the network output.
pub trait Loss {
    fn value(&self, output: &[f64]) -> f64;
    fn gradient(&self, output: &[f64]) -> Vec<f64>;
}

/// `Σ (y − t)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredError {
    pub target: Vec<f64>,
}

impl Loss for SquaredError {
    fn value(&self, output: &[f64]) -> f64 {
        output
            .iter()
            .zip(&self.target)
            .map(|(y, t)| (y - t).powi(2))
            .sum()
    }

    fn gradient(&self, output: &[f64]) -> Vec<f64> {
        output
            .iter()
            .zip(&self.target)
            .map(|(y, t)| 2.0 * (y - t))
            .collect()
    }
}

pub const FINITE_DIFF_STEP: f64 = 1e-5;

/// Denominator floor for the relative error, so that two tiny gradients
/// differing only by rounding noise do not count as a mismatch.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub max_relative_error: f64,
    /// Parameters compared.
    pub checked: usize,
    /// Parameters skipped because a step of `±h` crossed a ReLU kink.
    pub excluded: usize,
    pub analytic: Vec<f64>,
}

/// Compares backprop parameter gradients against central differences.
pub fn finite_diff_check(mlp: &Mlp, input: &[f64], loss: &dyn Loss) -> GradCheck {
    let h = FINITE_DIFF_STEP;
    let trace = mlp.forward_trace(input);
    let analytic = mlp.backward(&trace, &loss.gradient(trace.output()));
    let base_mask = mlp.mask(input);
    let params = mlp.params();
    let mut probe = mlp.clone();
    let (mut worst, mut checked, mut excluded) = (0.0f64, 0, 0);
    for (k, &theta) in params.iter().enumerate() {
        probe.set_param(k, theta + h);
        let plus_mask = probe.mask(input);
        let plus = loss.value(&probe.forward(input));
        probe.set_param(k, theta - h);
        let minus_mask = probe.mask(input);
        let minus = loss.value(&probe.forward(input));
        probe.set_param(k, theta);
        if plus_mask != base_mask || minus_mask != base_mask {
            excluded += 1;
            continue;
        }
        let numeric = (plus - minus) / (2.0 * h);
        let denom = analytic[k]
            .abs()
            .max(numeric.abs())
            .max(RELATIVE_ERROR_FLOOR);
        worst = worst.max((analytic[k] - numeric).abs() / denom);
        checked += 1;
    }
    GradCheck {
        max_relative_error: worst,
        checked,
        excluded,
        analytic,
    }
}
