//! DDPG actor-critic agent.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::ScenarioConfig;
use crate::ddpg::mlp::{Gradients, Head, Mlp};
use crate::ddpg::optim::Optimizer;
use crate::ddpg::replay::{ReplayBuffer, Transition};
use crate::error::{Error, Result};
use crate::rng::{substream, RngStream, Substream};

/// Deterministic policy output for one observation.
pub fn actor_forward(actor: &Mlp, state: &[f64]) -> Result<Vec<f64>> {
    actor.forward(state)
}

/// Softmax over `M + 1` logits; the first `M` shares of `total` are the
/// allocations and the last share is left idle.
pub fn project_action(logits: &[f64], total: f64) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = exp.iter().sum();
    let m = logits.len() - 1;
    let mut alloc: Vec<f64> = exp[..m].iter().map(|e| total * (e / z)).collect();
    // Rounding can push the sum a few ulps over the budget.
    while alloc.iter().sum::<f64>() > total {
        alloc.iter_mut().for_each(|b| *b *= 1.0 - f64::EPSILON);
    }
    alloc
}

/// Element-wise `target <- tau * live + (1 - tau) * target`.
pub fn soft_update(live: &Mlp, target: &mut Mlp, tau: f64) -> Result<()> {
    if !live.same_shape(target) {
        return Err(Error::Shape {
            expected: live.num_params(),
            actual: target.num_params(),
        });
    }
    for (t, l) in target.layers_mut().iter_mut().zip(live.layers()) {
        t.weights.zip_mut_with(&l.weights, |t, &l| *t = tau * l + (1.0 - tau) * *t);
        t.bias.zip_mut_with(&l.bias, |t, &l| *t = tau * l + (1.0 - tau) * *t);
    }
    Ok(())
}

/// A minibatch laid out as matrices.
#[derive(Debug, Clone)]
pub struct Batch {
    pub states: Array2<f64>,
    pub actions: Array2<f64>,
    pub rewards: Array1<f64>,
    pub next_states: Array2<f64>,
    pub not_done: Array1<f64>,
}

impl Batch {
    pub fn from_transitions(ts: &[&Transition]) -> Result<Self> {
        let first = ts.first().ok_or(Error::InsufficientBuffer {
            available: 0,
            needed: 1,
        })?;
        let (sd, ad) = (first.state.len(), first.action.len());
        let n = ts.len();
        let mut states = Array2::zeros((n, sd));
        let mut next_states = Array2::zeros((n, sd));
        let mut actions = Array2::zeros((n, ad));
        for (k, t) in ts.iter().enumerate() {
            if t.state.len() != sd || t.next_state.len() != sd {
                return Err(Error::Shape {
                    expected: sd,
                    actual: t.state.len().max(t.next_state.len()),
                });
            }
            if t.action.len() != ad {
                return Err(Error::Shape {
                    expected: ad,
                    actual: t.action.len(),
                });
            }
            states.row_mut(k).assign(&ArrayView2::from_shape((1, sd), &t.state).expect("row").row(0));
            next_states
                .row_mut(k)
                .assign(&ArrayView2::from_shape((1, sd), &t.next_state).expect("row").row(0));
            actions.row_mut(k).assign(&ArrayView2::from_shape((1, ad), &t.action).expect("row").row(0));
        }
        Ok(Self {
            states,
            actions,
            rewards: ts.iter().map(|t| t.reward).collect(),
            next_states,
            not_done: ts.iter().map(|t| if t.done { 0.0 } else { 1.0 }).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

fn concat(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    ndarray::concatenate(Axis(1), &[a.view(), b.view()]).expect("same batch size")
}

/// Bootstrapped targets `r + discount * Q'(s', mu'(s'))`, with the
/// bootstrap dropped on terminal transitions.
pub fn td_targets(target_actor: &Mlp, target_critic: &Mlp, batch: &Batch, discount: f64) -> Array1<f64> {
    let next_actions = target_actor.forward_batch(batch.next_states.view()).output().clone();
    let q_next = target_critic
        .forward_batch(concat(&batch.next_states, &next_actions).view())
        .output()
        .column(0)
        .to_owned();
    &batch.rewards + &(q_next * &batch.not_done * discount)
}

/// Mean squared TD error of `critic` against fixed `targets`, and its
/// gradient with respect to the critic parameters.
pub fn critic_loss_and_grad(critic: &Mlp, batch: &Batch, targets: &Array1<f64>) -> (f64, Gradients) {
    let n = batch.len() as f64;
    let trace = critic.forward_batch(concat(&batch.states, &batch.actions).view());
    let td = targets - &trace.output().column(0);
    let loss = td.mapv(|d| d * d).sum() / n;
    let grad_out = td.mapv(|d| -2.0 * d / n).insert_axis(Axis(1));
    let (grads, _) = critic.backward(&trace, grad_out);
    (loss, grads)
}

/// Mean `Q(s, mu(s))` over the batch and its gradient with respect to the
/// actor parameters, chained through the (frozen) critic.
pub fn actor_objective_and_grad(actor: &Mlp, critic: &Mlp, states: &Array2<f64>) -> (f64, Gradients) {
    let n = states.nrows() as f64;
    let a_trace = actor.forward_batch(states.view());
    let c_trace = critic.forward_batch(concat(states, a_trace.output()).view());
    let objective = c_trace.output().sum() / n;
    let (_, d_input) = critic.backward(&c_trace, Array2::from_elem((states.nrows(), 1), 1.0 / n));
    let d_action = d_input.slice(s![.., states.ncols()..]).to_owned();
    let (grads, _) = actor.backward(&a_trace, d_action);
    (objective, grads)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentParams {
    pub obs_dim: usize,
    pub action_dim: usize,
    pub total_bandwidth: f64,
    pub discount: f64,
    pub tau: f64,
    pub batch_size: usize,
    pub grad_clip: f64,
    pub noise_std0: f64,
    pub noise_decay: f64,
}

impl AgentParams {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            obs_dim: cfg.obs_dim(),
            action_dim: cfg.action_dim(),
            total_bandwidth: cfg.total_bandwidth,
            discount: cfg.discount,
            tau: cfg.soft_tau,
            batch_size: cfg.batch_size,
            grad_clip: cfg.grad_clip,
            noise_std0: cfg.noise_std0,
            noise_decay: cfg.noise_decay,
        }
    }
}

/// Losses reported by one learning step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_objective: f64,
}

#[derive(Debug, Clone)]
pub struct DdpgAgent {
    pub actor: Mlp,
    pub critic: Mlp,
    pub target_actor: Mlp,
    pub target_critic: Mlp,
    actor_opt: Optimizer,
    critic_opt: Optimizer,
    pub buffer: ReplayBuffer,
    pub params: AgentParams,
    noise_std: f64,
    exploration: RngStream,
    sampling: RngStream,
}

impl DdpgAgent {
    pub fn new(cfg: &ScenarioConfig, seed: u64) -> Self {
        let params = AgentParams::from_config(cfg);
        let hidden = vec![cfg.hidden_units; cfg.hidden_layers];
        let actor_sizes: Vec<usize> = std::iter::once(params.obs_dim)
            .chain(hidden.iter().copied())
            .chain(std::iter::once(params.action_dim))
            .collect();
        let critic_sizes: Vec<usize> = std::iter::once(params.obs_dim + params.action_dim)
            .chain(hidden.iter().copied())
            .chain(std::iter::once(1))
            .collect();
        let mut init = substream(seed, Substream::NetworkInit);
        let mut actor = Mlp::new(&actor_sizes, &mut init);
        if let Some(bound) = cfg.actor_logit_bound {
            actor = actor.with_head(Head::Tanh(bound));
        }
        let critic = Mlp::new(&critic_sizes, &mut init);
        Self::from_networks(cfg, seed, actor, critic)
    }

    /// Builds an agent around given live networks; targets start as copies.
    pub fn from_networks(cfg: &ScenarioConfig, seed: u64, actor: Mlp, critic: Mlp) -> Self {
        let params = AgentParams::from_config(cfg);
        Self {
            actor_opt: Optimizer::new(cfg.optimizer, cfg.lr_actor, &actor),
            critic_opt: Optimizer::new(cfg.optimizer, cfg.lr_critic, &critic),
            target_actor: actor.clone(),
            target_critic: critic.clone(),
            actor,
            critic,
            buffer: ReplayBuffer::new(cfg.buffer_cap),
            noise_std: params.noise_std0,
            params,
            exploration: substream(seed, Substream::Exploration),
            sampling: substream(seed, Substream::Sampling),
        }
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    pub fn set_noise_std(&mut self, std: f64) {
        self.noise_std = std;
    }

    /// Noisy (explore) or greedy logits, and their projection.
    pub fn select_action(&mut self, state: &[f64], explore: bool) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut logits = actor_forward(&self.actor, state)?;
        if explore && self.noise_std > 0.0 {
            for l in &mut logits {
                let z: f64 = self.exploration.sample(StandardNormal);
                *l += self.noise_std * z;
            }
        }
        let alloc = project_action(&logits, self.params.total_bandwidth);
        Ok((logits, alloc))
    }

    pub fn remember(&mut self, t: Transition) {
        self.buffer.push(t);
    }

    pub fn ready(&self) -> bool {
        self.buffer.len() >= self.params.batch_size
    }

    /// One clipped gradient step on the critic; returns the loss before it.
    pub fn critic_update(&mut self, batch: &Batch) -> f64 {
        let targets = td_targets(&self.target_actor, &self.target_critic, batch, self.params.discount);
        let (loss, mut grads) = critic_loss_and_grad(&self.critic, batch, &targets);
        grads.clip_norm(self.params.grad_clip);
        self.critic_opt.step(&mut self.critic, &grads);
        loss
    }

    /// One clipped ascent step on `mean Q(s, mu(s))`; returns the objective
    /// before it.
    pub fn actor_update(&mut self, batch: &Batch) -> f64 {
        let (objective, mut grads) = actor_objective_and_grad(&self.actor, &self.critic, &batch.states);
        grads.clip_norm(self.params.grad_clip);
        grads.scale(-1.0);
        self.actor_opt.step(&mut self.actor, &grads);
        objective
    }

    pub fn update_targets(&mut self) {
        let tau = self.params.tau;
        soft_update(&self.actor, &mut self.target_actor, tau).expect("target shares actor shape");
        soft_update(&self.critic, &mut self.target_critic, tau).expect("target shares critic shape");
    }

    /// Samples a minibatch, updates critic then actor, then both targets.
    pub fn learn(&mut self) -> Result<UpdateStats> {
        let needed = self.params.batch_size;
        if self.buffer.len() < needed {
            return Err(Error::InsufficientBuffer {
                available: self.buffer.len(),
                needed,
            });
        }
        let picked = self.buffer.sample(needed, &mut self.sampling);
        let batch = Batch::from_transitions(&picked)?;
        let critic_loss = self.critic_update(&batch);
        let actor_objective = self.actor_update(&batch);
        self.update_targets();
        Ok(UpdateStats {
            critic_loss,
            actor_objective,
        })
    }

    pub fn end_episode(&mut self) {
        self.noise_std *= self.params.noise_decay;
    }

    pub fn all_finite(&self) -> bool {
        [&self.actor, &self.critic, &self.target_actor, &self.target_critic]
            .iter()
            .all(|n| n.all_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tiny_cfg() -> ScenarioConfig {
        ScenarioConfig {
            num_ues: 2,
            hidden_units: 8,
            batch_size: 4,
            ..Default::default()
        }
    }

    #[test]
    fn uniform_logits_split_evenly() {
        let b = project_action(&[0.3; 4], 20e6);
        for bi in &b {
            assert!((bi - 5e6).abs() < 1e-6);
        }
        let slack = 20e6 - b.iter().sum::<f64>();
        assert!((slack - 5e6).abs() < 1e-6);
    }

    #[test]
    fn no_slack_uses_everything() {
        let b = project_action(&[0.1, -2.0, 1.3, f64::NEG_INFINITY], 20e6);
        let sum: f64 = b.iter().sum();
        assert!(sum <= 20e6 && (sum - 20e6).abs() < 1e-6, "{sum}");
    }

    #[test]
    fn targets_start_as_copies() {
        let agent = DdpgAgent::new(&tiny_cfg(), 1);
        assert_eq!(agent.actor, agent.target_actor);
        assert_eq!(agent.critic, agent.target_critic);
        assert_eq!(agent.actor.sizes(), vec![12, 8, 8, 3]);
        assert_eq!(agent.critic.sizes(), vec![15, 8, 8, 1]);
    }

    #[test]
    fn greedy_actions_repeat() {
        let mut agent = DdpgAgent::new(&tiny_cfg(), 1);
        let s = vec![0.5; 12];
        assert_eq!(agent.select_action(&s, false).unwrap(), agent.select_action(&s, false).unwrap());
        agent.set_noise_std(0.0);
        assert_eq!(agent.select_action(&s, true).unwrap(), agent.select_action(&s, false).unwrap());
    }

    #[test]
    fn soft_update_cases() {
        let live = Mlp::new(&[3, 4, 2], &mut substream(1, Substream::NetworkInit));
        let mut target = Mlp::zeros(&[3, 4, 2]);
        soft_update(&live, &mut target, 1.0).unwrap();
        assert_eq!(target, live);

        let mut wrong = Mlp::zeros(&[3, 5, 2]);
        assert!(soft_update(&live, &mut wrong, 0.5).is_err());
    }

    #[test]
    fn learn_needs_a_full_batch() {
        let mut agent = DdpgAgent::new(&tiny_cfg(), 1);
        assert!(matches!(agent.learn(), Err(Error::InsufficientBuffer { available: 0, needed: 4 })));
    }

    proptest! {
        #[test]
        fn projection_respects_budget(logits in proptest::collection::vec(-50.0..50.0f64, 2..60), total in 1.0..1e9f64) {
            let b = project_action(&logits, total);
            prop_assert_eq!(b.len(), logits.len() - 1);
            prop_assert!(b.iter().all(|&x| x >= 0.0));
            prop_assert!(b.iter().sum::<f64>() <= total);
        }
    }
}
