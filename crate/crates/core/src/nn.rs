//! Dense layers, activations and the Adam optimizer.
//!
//! Everything is `f64`. Layers store weights as `[out × in]` so a batch of
//! row-vector inputs `X [n × in]` maps to `X · Wᵀ + b`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;

use crate::error::{check_dim, Error, Result};

/// Default negative slope of LeakyReLU.
pub const DEFAULT_SLOPE: f64 = 0.01;

/// Largest `f64` strictly below one. Saturated `tanh` is clamped to it so the
/// score range stays open.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl DenseLayer {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            weights: Array2::zeros((out_dim, in_dim)),
            bias: Array1::zeros(out_dim),
        }
    }

    /// Weights uniform on `(-1/√in, 1/√in)`, biases zero.
    pub fn uniform<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        let weights =
            Array2::from_shape_simple_fn((out_dim, in_dim), || rng.random_range(-bound..bound));
        Self {
            weights,
            bias: Array1::zeros(out_dim),
        }
    }

    pub fn from_parts(weights: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        check_dim("dense layer bias", weights.nrows(), bias.len())?;
        Ok(Self {
            weights: weights.as_standard_layout().into_owned(),
            bias,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn forward(&self, input: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        check_dim("affine input", self.in_dim(), input.len())?;
        Ok(self.weights.dot(&input) + &self.bias)
    }

    pub fn forward_batch(&self, inputs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        check_dim("affine batch input", self.in_dim(), inputs.ncols())?;
        Ok(inputs.dot(&self.weights.t()) + self.bias.view().insert_axis(Axis(0)))
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub(crate) fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(self.bias.iter())
            .all(|v| v.is_finite())
    }
}

/// `output[i] = Σ_j weights[i][j]·input[j] + bias[i]`.
pub fn affine_forward(input: ArrayView1<'_, f64>, layer: &DenseLayer) -> Result<Array1<f64>> {
    layer.forward(input)
}

#[inline]
pub fn leaky_relu(x: f64, slope: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        slope * x
    }
}

#[inline]
pub fn leaky_relu_grad(x: f64, slope: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        slope
    }
}

/// Hyperbolic tangent, kept strictly inside `(-1, 1)` even when saturated.
#[inline]
pub fn tanh_out(x: f64) -> f64 {
    x.tanh().clamp(-BELOW_ONE, BELOW_ONE)
}

/// A fixed, ordered collection of named parameter tensors.
///
/// Both a model and its gradient buffers implement this with identical
/// ordering and shapes, which is what [`Adam::step`] relies on.
pub trait Parameters {
    fn tensors(&self) -> Vec<(&'static str, &[f64])>;
    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])>;
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.005,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 1e-5,
        }
    }
}

/// Adam with bias correction and decoupled weight decay.
#[derive(Debug, Clone)]
pub struct Adam {
    pub config: AdamConfig,
    step: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(config: AdamConfig) -> Result<Self> {
        let c = &config;
        if !(c.learning_rate > 0.0 && c.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be positive, got {}",
                c.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&c.beta1) || !(0.0..1.0).contains(&c.beta2) {
            return Err(Error::InvalidParameter(
                "Adam betas must lie in [0, 1)".into(),
            ));
        }
        if !(c.epsilon > 0.0) || !(c.weight_decay >= 0.0) {
            return Err(Error::InvalidParameter(
                "Adam epsilon must be positive and weight decay non-negative".into(),
            ));
        }
        Ok(Self {
            config,
            step: 0,
            first: Vec::new(),
            second: Vec::new(),
        })
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// One update. Gradients are checked for finiteness before any parameter
    /// is touched, so a failed step leaves the model as it was.
    pub fn step<P, G>(&mut self, params: &mut P, grads: &G) -> Result<()>
    where
        P: Parameters + ?Sized,
        G: Parameters + ?Sized,
    {
        let grads = grads.tensors();
        for (name, g) in &grads {
            if let Some(index) = g.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteGradient {
                    parameter: (*name).to_string(),
                    index,
                });
            }
        }
        let mut tensors = params.tensors_mut();
        check_dim("optimizer tensor count", tensors.len(), grads.len())?;
        for ((_, p), (_, g)) in tensors.iter().zip(&grads) {
            check_dim("optimizer tensor size", p.len(), g.len())?;
        }
        if self.first.is_empty() {
            self.first = grads.iter().map(|(_, g)| vec![0.0; g.len()]).collect();
            self.second = self.first.clone();
        } else {
            check_dim("optimizer state", self.first.len(), grads.len())?;
            for (m, (_, g)) in self.first.iter().zip(&grads) {
                check_dim("optimizer moment size", m.len(), g.len())?;
            }
        }

        self.step += 1;
        let AdamConfig {
            learning_rate: lr,
            beta1,
            beta2,
            epsilon,
            weight_decay,
        } = self.config;
        let t = self.step as i32;
        let correction1 = 1.0 - beta1.powi(t);
        let correction2 = 1.0 - beta2.powi(t);

        for (i, (_, p)) in tensors.iter_mut().enumerate() {
            let g = grads[i].1;
            let m = &mut self.first[i];
            let v = &mut self.second[i];
            for j in 0..p.len() {
                m[j] = beta1 * m[j] + (1.0 - beta1) * g[j];
                v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j];
                let m_hat = m[j] / correction1;
                let v_hat = v[j] / correction2;
                p[j] -= lr * weight_decay * p[j];
                p[j] -= lr * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}
