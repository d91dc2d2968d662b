//! First-order optimizers over [`Mlp`] parameters. Both descend.

use crate::config::OptimizerKind;
use crate::ddpg::mlp::{Gradients, Mlp};

#[derive(Debug, Clone, PartialEq)]
pub enum Optimizer {
    Sgd {
        lr: f64,
    },
    Adam {
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
        steps: i32,
        m: Vec<f64>,
        v: Vec<f64>,
    },
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, net: &Mlp) -> Self {
        match kind {
            OptimizerKind::Sgd => Optimizer::Sgd { lr },
            OptimizerKind::Adam => Optimizer::Adam {
                lr,
                beta1: 0.9,
                beta2: 0.999,
                eps: 1e-8,
                steps: 0,
                m: vec![0.0; net.num_params()],
                v: vec![0.0; net.num_params()],
            },
        }
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &Gradients) {
        match self {
            Optimizer::Sgd { lr } => {
                for (layer, g) in net.layers_mut().iter_mut().zip(&grads.layers) {
                    layer.weights.scaled_add(-*lr, &g.weights);
                    layer.bias.scaled_add(-*lr, &g.bias);
                }
            }
            Optimizer::Adam {
                lr,
                beta1,
                beta2,
                eps,
                steps,
                m,
                v,
            } => {
                *steps = steps.saturating_add(1);
                let c1 = 1.0 - beta1.powi(*steps);
                let c2 = 1.0 - beta2.powi(*steps);
                let mut k = 0;
                for (layer, g) in net.layers_mut().iter_mut().zip(&grads.layers) {
                    let params = layer.weights.iter_mut().chain(layer.bias.iter_mut());
                    let gs = g.weights.iter().chain(g.bias.iter());
                    for (p, &gi) in params.zip(gs) {
                        m[k] = *beta1 * m[k] + (1.0 - *beta1) * gi;
                        v[k] = *beta2 * v[k] + (1.0 - *beta2) * gi * gi;
                        *p -= *lr * (m[k] / c1) / ((v[k] / c2).sqrt() + *eps);
                        k += 1;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddpg::mlp::Dense;
    use ndarray::array;

    fn one_param(w: f64) -> Mlp {
        Mlp::from_layers(vec![Dense {
            weights: array![[w]],
            bias: array![0.0],
        }])
        .unwrap()
    }

    fn grad(g: f64) -> Gradients {
        Gradients {
            layers: vec![Dense {
                weights: array![[g]],
                bias: array![0.0],
            }],
        }
    }

    #[test]
    fn sgd_steps_against_gradient() {
        let mut net = one_param(1.0);
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.1, &net);
        opt.step(&mut net, &grad(2.0));
        assert!((net.params()[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn adam_first_step_is_lr_sized() {
        let mut net = one_param(1.0);
        let mut opt = Optimizer::new(OptimizerKind::Adam, 0.01, &net);
        opt.step(&mut net, &grad(123.0));
        assert!((net.params()[0] - 0.99).abs() < 1e-9);
        assert_eq!(net.params()[1], 0.0);
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        for kind in [OptimizerKind::Sgd, OptimizerKind::Adam] {
            let mut net = one_param(0.5);
            let mut opt = Optimizer::new(kind, 0.1, &net);
            opt.step(&mut net, &grad(0.0));
            assert_eq!(net.params()[0], 0.5);
        }
    }
}
