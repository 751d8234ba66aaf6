//! The anomaly scoring network.
//!
//! A representation module maps an input row to an `H`-dimensional feature
//! vector (one LeakyReLU hidden layer, linear output). A scoring module maps
//! that vector to a scalar (one LeakyReLU hidden layer, `tanh` output).
//! Higher scores mean more anomalous.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::nn::{leaky_relu, leaky_relu_grad, tanh_out, DenseLayer, Parameters, DEFAULT_SLOPE};
use crate::rng::{self, Stream};

/// Layer widths derived from the input and representation dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Architecture {
    pub input_dim: usize,
    pub rep_dim: usize,
    pub rep_hidden: usize,
    pub score_hidden: usize,
}

impl Architecture {
    /// `h1 = D + floor((H - D) / 2)`, `h2 = floor(H / 2)`.
    ///
    /// The floor is taken toward negative infinity, so `H < D` shrinks the
    /// representation hidden layer below `D`.
    pub fn new(input_dim: usize, rep_dim: usize) -> Result<Self> {
        if input_dim == 0 || rep_dim == 0 {
            return Err(Error::InvalidParameter(
                "input and representation dimensions must be positive".into(),
            ));
        }
        let d = input_dim as i64;
        let h = rep_dim as i64;
        let rep_hidden = d + (h - d).div_euclid(2);
        let score_hidden = h / 2;
        if rep_hidden <= 0 || score_hidden <= 0 {
            return Err(Error::InvalidArchitecture {
                input_dim,
                rep_dim,
                hidden: rep_hidden.min(score_hidden),
            });
        }
        Ok(Self {
            input_dim,
            rep_dim,
            rep_hidden: rep_hidden as usize,
            score_hidden: score_hidden as usize,
        })
    }

    /// Explicit hidden widths instead of the default sizing rule.
    pub fn with_hidden(
        input_dim: usize,
        rep_dim: usize,
        rep_hidden: usize,
        score_hidden: usize,
    ) -> Result<Self> {
        if input_dim == 0 || rep_dim == 0 {
            return Err(Error::InvalidParameter(
                "input and representation dimensions must be positive".into(),
            ));
        }
        if rep_hidden == 0 || score_hidden == 0 {
            return Err(Error::InvalidArchitecture {
                input_dim,
                rep_dim,
                hidden: 0,
            });
        }
        Ok(Self {
            input_dim,
            rep_dim,
            rep_hidden,
            score_hidden,
        })
    }
}

/// Weights of both modules. Also used, shape for shape, as the gradient buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct ScorerParams {
    pub rep_hidden: DenseLayer,
    pub rep_out: DenseLayer,
    pub score_hidden: DenseLayer,
    pub score_out: DenseLayer,
}

impl ScorerParams {
    pub fn zeros(arch: Architecture) -> Self {
        Self {
            rep_hidden: DenseLayer::zeros(arch.input_dim, arch.rep_hidden),
            rep_out: DenseLayer::zeros(arch.rep_hidden, arch.rep_dim),
            score_hidden: DenseLayer::zeros(arch.rep_dim, arch.score_hidden),
            score_out: DenseLayer::zeros(arch.score_hidden, 1),
        }
    }

    pub fn init<R: Rng + ?Sized>(arch: Architecture, rng: &mut R) -> Self {
        Self {
            rep_hidden: DenseLayer::uniform(arch.input_dim, arch.rep_hidden, rng),
            rep_out: DenseLayer::uniform(arch.rep_hidden, arch.rep_dim, rng),
            score_hidden: DenseLayer::uniform(arch.rep_dim, arch.score_hidden, rng),
            score_out: DenseLayer::uniform(arch.score_hidden, 1, rng),
        }
    }

    pub fn layers(&self) -> [(&'static str, &DenseLayer); 4] {
        [
            ("rep_hidden", &self.rep_hidden),
            ("rep_out", &self.rep_out),
            ("score_hidden", &self.score_hidden),
            ("score_out", &self.score_out),
        ]
    }

    /// Checks that layer shapes chain together and returns the implied architecture.
    pub fn architecture(&self) -> Result<Architecture> {
        check_dim(
            "rep_out input",
            self.rep_hidden.out_dim(),
            self.rep_out.in_dim(),
        )?;
        check_dim(
            "score_hidden input",
            self.rep_out.out_dim(),
            self.score_hidden.in_dim(),
        )?;
        check_dim(
            "score_out input",
            self.score_hidden.out_dim(),
            self.score_out.in_dim(),
        )?;
        check_dim("score_out width", 1, self.score_out.out_dim())?;
        Ok(Architecture {
            input_dim: self.rep_hidden.in_dim(),
            rep_dim: self.rep_out.out_dim(),
            rep_hidden: self.rep_hidden.out_dim(),
            score_hidden: self.score_hidden.out_dim(),
        })
    }

    pub fn param_count(&self) -> usize {
        self.layers().iter().map(|(_, l)| l.param_count()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers().iter().all(|(_, l)| l.is_finite())
    }
}

impl Parameters for ScorerParams {
    fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        vec![
            (
                "rep_hidden.weights",
                self.rep_hidden.weights.as_slice().unwrap(),
            ),
            ("rep_hidden.bias", self.rep_hidden.bias.as_slice().unwrap()),
            ("rep_out.weights", self.rep_out.weights.as_slice().unwrap()),
            ("rep_out.bias", self.rep_out.bias.as_slice().unwrap()),
            (
                "score_hidden.weights",
                self.score_hidden.weights.as_slice().unwrap(),
            ),
            (
                "score_hidden.bias",
                self.score_hidden.bias.as_slice().unwrap(),
            ),
            (
                "score_out.weights",
                self.score_out.weights.as_slice().unwrap(),
            ),
            ("score_out.bias", self.score_out.bias.as_slice().unwrap()),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        vec![
            (
                "rep_hidden.weights",
                self.rep_hidden.weights.as_slice_mut().unwrap(),
            ),
            (
                "rep_hidden.bias",
                self.rep_hidden.bias.as_slice_mut().unwrap(),
            ),
            (
                "rep_out.weights",
                self.rep_out.weights.as_slice_mut().unwrap(),
            ),
            ("rep_out.bias", self.rep_out.bias.as_slice_mut().unwrap()),
            (
                "score_hidden.weights",
                self.score_hidden.weights.as_slice_mut().unwrap(),
            ),
            (
                "score_hidden.bias",
                self.score_hidden.bias.as_slice_mut().unwrap(),
            ),
            (
                "score_out.weights",
                self.score_out.weights.as_slice_mut().unwrap(),
            ),
            (
                "score_out.bias",
                self.score_out.bias.as_slice_mut().unwrap(),
            ),
        ]
    }
}

/// Gradient buffers mirroring [`ScorerParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientTape(pub ScorerParams);

impl GradientTape {
    pub fn zeros(arch: Architecture) -> Self {
        Self(ScorerParams::zeros(arch))
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &GradientTape, scale: f64) {
        for ((_, dst), (_, src)) in self.0.tensors_mut().into_iter().zip(other.0.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }
}

impl Parameters for GradientTape {
    fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        self.0.tensors()
    }
    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        self.0.tensors_mut()
    }
}

/// Intermediate activations of one batch, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    inputs: Array2<f64>,
    rep_pre: Array2<f64>,
    rep_act: Array2<f64>,
    pub representations: Array2<f64>,
    score_pre: Array2<f64>,
    score_act: Array2<f64>,
    pub scores: Array1<f64>,
}

impl ForwardPass {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scorer {
    pub params: ScorerParams,
    pub slope: f64,
    arch: Architecture,
}

/// Builds a freshly initialised scorer from a seed with the default slope.
pub fn build_scorer(input_dim: usize, rep_dim: usize, seed: u64) -> Result<Scorer> {
    let arch = Architecture::new(input_dim, rep_dim)?;
    Scorer::init(arch, DEFAULT_SLOPE, &mut rng::stream(seed, Stream::Init))
}

impl Scorer {
    pub fn init<R: Rng + ?Sized>(arch: Architecture, slope: f64, rng: &mut R) -> Result<Self> {
        Self::from_params(ScorerParams::init(arch, rng), slope)
    }

    pub fn from_params(params: ScorerParams, slope: f64) -> Result<Self> {
        if !(slope > 0.0 && slope < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "LeakyReLU slope must lie in (0, 1), got {slope}"
            )));
        }
        let arch = params.architecture()?;
        Ok(Self {
            params,
            slope,
            arch,
        })
    }

    pub fn architecture(&self) -> Architecture {
        self.arch
    }

    pub fn input_dim(&self) -> usize {
        self.arch.input_dim
    }

    pub fn rep_dim(&self) -> usize {
        self.arch.rep_dim
    }

    fn activate(&self, z: &Array2<f64>) -> Array2<f64> {
        let slope = self.slope;
        z.mapv(|v| leaky_relu(v, slope))
    }

    pub fn forward(&self, inputs: ArrayView2<'_, f64>) -> Result<ForwardPass> {
        check_dim("scorer input", self.arch.input_dim, inputs.ncols())?;
        let p = &self.params;
        let rep_pre = p.rep_hidden.forward_batch(inputs)?;
        let rep_act = self.activate(&rep_pre);
        let representations = p.rep_out.forward_batch(rep_act.view())?;
        let score_pre = p.score_hidden.forward_batch(representations.view())?;
        let score_act = self.activate(&score_pre);
        let scores = p
            .score_out
            .forward_batch(score_act.view())?
            .column(0)
            .mapv(tanh_out);
        Ok(ForwardPass {
            inputs: inputs.to_owned(),
            rep_pre,
            rep_act,
            representations,
            score_pre,
            score_act,
            scores,
        })
    }

    /// φ(x).
    pub fn represent(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let batch = self.represent_batch(x.insert_axis(Axis(0)))?;
        Ok(batch.row(0).to_owned())
    }

    pub fn represent_batch(&self, inputs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        check_dim("scorer input", self.arch.input_dim, inputs.ncols())?;
        let hidden = self.activate(&self.params.rep_hidden.forward_batch(inputs)?);
        self.params.rep_out.forward_batch(hidden.view())
    }

    /// ψ(φ(x)), strictly inside `(-1, 1)`.
    pub fn score(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        Ok(self.score_batch(x.insert_axis(Axis(0)))?[0])
    }

    pub fn score_batch(&self, inputs: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        if inputs.nrows() == 0 {
            check_dim("scorer input", self.arch.input_dim, inputs.ncols())?;
            return Ok(Array1::zeros(0));
        }
        Ok(self.forward(inputs)?.scores)
    }

    /// Reverse pass for a recorded forward pass.
    ///
    /// `d_scores[i]` is ∂loss/∂score of row `i`; `d_reps` optionally adds
    /// ∂loss/∂φ for each row. Gradients are summed over rows, so any batch
    /// averaging must already be folded into the upstream values.
    pub fn backward(
        &self,
        pass: &ForwardPass,
        d_scores: ArrayView1<'_, f64>,
        d_reps: Option<ArrayView2<'_, f64>>,
    ) -> Result<GradientTape> {
        let n = pass.len();
        check_dim("backward score gradient", n, d_scores.len())?;
        check_dim(
            "backward input width",
            self.arch.input_dim,
            pass.inputs.ncols(),
        )?;
        if let Some(d) = &d_reps {
            check_dim("backward representation rows", n, d.nrows())?;
            check_dim(
                "backward representation width",
                self.arch.rep_dim,
                d.ncols(),
            )?;
        }
        let p = &self.params;
        let slope = self.slope;

        // tanh'
        let d_out_pre: Array1<f64> = d_scores
            .iter()
            .zip(pass.scores.iter())
            .map(|(g, s)| g * (1.0 - s * s))
            .collect();
        let d_out_col = d_out_pre.view().insert_axis(Axis(1));

        let score_out = DenseLayer {
            weights: d_out_col.t().dot(&pass.score_act),
            bias: Array1::from_elem(1, d_out_pre.sum()),
        };

        let mut d_score_pre = d_out_col.dot(&p.score_out.weights);
        d_score_pre.zip_mut_with(&pass.score_pre, |g, &z| *g *= leaky_relu_grad(z, slope));
        let score_hidden = DenseLayer {
            weights: d_score_pre.t().dot(&pass.representations),
            bias: d_score_pre.sum_axis(Axis(0)),
        };

        let mut d_rep = d_score_pre.dot(&p.score_hidden.weights);
        if let Some(extra) = d_reps {
            d_rep += &extra;
        }
        let rep_out = DenseLayer {
            weights: d_rep.t().dot(&pass.rep_act),
            bias: d_rep.sum_axis(Axis(0)),
        };

        let mut d_rep_pre = d_rep.dot(&p.rep_out.weights);
        d_rep_pre.zip_mut_with(&pass.rep_pre, |g, &z| *g *= leaky_relu_grad(z, slope));
        let rep_hidden = DenseLayer {
            weights: d_rep_pre.t().dot(&pass.inputs),
            bias: d_rep_pre.sum_axis(Axis(0)),
        };

        let as_standard = |l: DenseLayer| DenseLayer {
            weights: l.weights.as_standard_layout().into_owned(),
            bias: l.bias,
        };
        Ok(GradientTape(ScorerParams {
            rep_hidden: as_standard(rep_hidden),
            rep_out: as_standard(rep_out),
            score_hidden: as_standard(score_hidden),
            score_out: as_standard(score_out),
        }))
    }
}
