//! Dense feed-forward network with tanh hidden layers and a linear or
//! bounded head.
//!
//! Batches are row-major `(batch, features)` matrices. Backpropagation is
//! written out by hand: [`Mlp::forward_batch`] records every activation in a
//! [`Trace`], and [`Mlp::backward`] walks it in reverse, producing parameter
//! gradients and the gradient with respect to the input.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use crate::error::{Error, Result};

/// Weights are stored `(in, out)` so a batch multiplies from the left.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weights: Array2::zeros((inputs, outputs)),
            bias: Array1::zeros(outputs),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.ncols()
    }
}

/// Output activation of the last layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Head {
    Linear,
    /// `bound * tanh(z)`, keeping every output inside `(-bound, bound)`.
    Tanh(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Dense>,
    head: Head,
}

/// Activations of one batched forward pass; entry 0 is the input.
#[derive(Debug, Clone)]
pub struct Trace {
    acts: Vec<Array2<f64>>,
}

impl Trace {
    pub fn output(&self) -> &Array2<f64> {
        self.acts.last().expect("non-empty trace")
    }
}

/// Parameter gradients, shaped like the network they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    pub fn norm(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| l.weights.iter().chain(l.bias.iter()).map(|g| g * g).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for l in &mut self.layers {
            l.weights *= s;
            l.bias *= s;
        }
    }

    /// Rescales to `max_norm` when larger; returns the norm before clipping.
    pub fn clip_norm(&mut self, max_norm: f64) -> f64 {
        let n = self.norm();
        if n > max_norm {
            self.scale(max_norm / n);
        }
        n
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
            .collect()
    }
}

impl Mlp {
    /// Fan-in uniform initialization for hidden layers; the output layer
    /// starts in `[-3e-3, 3e-3]` so initial outputs are near zero.
    pub fn new(sizes: &[usize], rng: &mut impl Rng) -> Self {
        assert!(sizes.len() >= 2, "need at least an input and an output size");
        let last = sizes.len() - 2;
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let bound = if k == last { 3e-3 } else { 1.0 / (w[0] as f64).sqrt() };
                let mut layer = Dense::zeros(w[0], w[1]);
                layer.weights.mapv_inplace(|_| rng.random_range(-bound..=bound));
                layer.bias.mapv_inplace(|_| rng.random_range(-bound..=bound));
                layer
            })
            .collect();
        Self { layers, head: Head::Linear }
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2, "need at least an input and an output size");
        Self {
            layers: sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
            head: Head::Linear,
        }
    }

    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Checkpoint("network without layers".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::Shape {
                    expected: pair[0].out_dim(),
                    actual: pair[1].in_dim(),
                });
            }
        }
        for l in &layers {
            if l.bias.len() != l.out_dim() {
                return Err(Error::Shape {
                    expected: l.out_dim(),
                    actual: l.bias.len(),
                });
            }
        }
        Ok(Self { layers, head: Head::Linear })
    }

    pub fn with_head(mut self, head: Head) -> Self {
        self.head = head;
        self
    }

    pub fn head(&self) -> Head {
        self.head
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(Dense::out_dim))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("layers").out_dim()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape {
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        let input = ArrayView2::from_shape((1, x.len()), x).expect("row vector");
        Ok(self.forward_batch(input).output().row(0).to_vec())
    }

    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Trace {
        assert_eq!(x.ncols(), self.input_dim(), "input width");
        let last = self.layers.len() - 1;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_owned());
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = acts[k].dot(&layer.weights);
            z += &layer.bias;
            match (k < last, self.head) {
                (true, _) => z.mapv_inplace(f64::tanh),
                (false, Head::Tanh(bound)) => z.mapv_inplace(|v| bound * v.tanh()),
                (false, Head::Linear) => {}
            }
            acts.push(z);
        }
        Trace { acts }
    }

    /// Backpropagates `grad_out` (gradient of a scalar with respect to the
    /// batch outputs) through `trace`. Returns parameter gradients and the
    /// gradient with respect to the inputs.
    pub fn backward(&self, trace: &Trace, grad_out: Array2<f64>) -> (Gradients, Array2<f64>) {
        let last = self.layers.len() - 1;
        let mut grads: Vec<Dense> = Vec::with_capacity(self.layers.len());
        let mut delta = grad_out;
        for k in (0..self.layers.len()).rev() {
            if k < last {
                // tanh'(z) = 1 - tanh(z)^2, with tanh(z) stored in the trace.
                delta.zip_mut_with(&trace.acts[k + 1], |d, &a| *d *= 1.0 - a * a);
            } else if let Head::Tanh(bound) = self.head {
                delta.zip_mut_with(&trace.acts[k + 1], |d, &a| *d *= bound - a * a / bound);
            }
            let weights = trace.acts[k].t().dot(&delta);
            let bias = delta.sum_axis(Axis(0));
            let upstream = delta.dot(&self.layers[k].weights.t());
            grads.push(Dense { weights, bias });
            delta = upstream;
        }
        grads.reverse();
        (Gradients { layers: grads }, delta)
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
            .collect()
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::Shape {
                expected: self.num_params(),
                actual: flat.len(),
            });
        }
        let mut it = flat.iter().copied();
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.bias.iter_mut()).for_each(|p| *p = it.next().expect("length checked"));
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(l.bias.iter()).all(|p| p.is_finite()))
    }

    pub fn same_shape(&self, other: &Mlp) -> bool {
        self.sizes() == other.sizes() && self.head == other.head
    }
}
