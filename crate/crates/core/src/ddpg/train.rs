//! The training loop: one fresh paired-seed episode at a time, with the
//! twin in the loop.

use crate::config::ScenarioConfig;
use crate::ddpg::agent::DdpgAgent;
use crate::ddpg::replay::Transition;
use crate::ddpg::reward::{reward, RewardParams};
use crate::error::Result;
use crate::physical::PhysicalNetwork;
use crate::rng::episode_seed;
use crate::twin::{simulate_action, DigitalTwin};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStats {
    pub episode: usize,
    pub mean_reward: f64,
    /// Mean physical latency over the episode, s.
    pub mean_latency: f64,
    /// Mean `|sandbox estimate - realized latency|`, s.
    pub sandbox_error: f64,
    /// Mean critic loss over the episode's updates, NaN without updates.
    pub critic_loss: f64,
    pub updates: usize,
    pub noise_std: f64,
    /// Whether every network parameter was finite when the episode ended.
    pub params_finite: bool,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub agent: DdpgAgent,
    pub curve: Vec<EpisodeStats>,
}

/// Trains a fresh agent for `cfg.episodes` episodes of `cfg.horizon_steps`
/// ticks each. `on_episode` sees every episode's statistics as they finish.
pub fn train(cfg: &ScenarioConfig, seed: u64, mut on_episode: impl FnMut(&EpisodeStats)) -> Result<TrainOutcome> {
    cfg.validate()?;
    let mut agent = DdpgAgent::new(cfg, seed);
    let mut curve = Vec::with_capacity(cfg.episodes);
    for episode in 0..cfg.episodes {
        let stats = run_episode(cfg, &mut agent, episode_seed(seed, episode as u64), episode)?;
        agent.end_episode();
        on_episode(&stats);
        curve.push(stats);
    }
    Ok(TrainOutcome { agent, curve })
}

/// One episode of interaction and learning.
pub fn run_episode(cfg: &ScenarioConfig, agent: &mut DdpgAgent, seed: u64, episode: usize) -> Result<EpisodeStats> {
    let params = RewardParams::from_config(cfg);
    let m = cfg.num_ues as f64;
    let mut net = PhysicalNetwork::new(cfg, seed);
    let mut twin = DigitalTwin::new(cfg);
    let noise_std = agent.noise_std();

    twin.maybe_sync(net.begin_tick());
    let mut state = twin.observe();
    let mut prev_alloc: Option<Vec<f64>> = None;
    let (mut reward_sum, mut latency_sum, mut sandbox_sum) = (0.0, 0.0, 0.0);
    let (mut loss_sum, mut updates) = (0.0, 0usize);

    for t in 0..cfg.horizon_steps {
        let (logits, alloc) = agent.select_action(&state, true)?;
        let prev = prev_alloc.as_deref().unwrap_or(&alloc);
        let estimate = simulate_action(&twin.state, cfg, &alloc, prev)?;
        let outcome = net.apply(&alloc);
        let r = reward(&outcome.latencies, &alloc, prev, &twin.state.sync_error, &params);

        twin.maybe_sync(net.begin_tick());
        let next_state = twin.observe();
        agent.remember(Transition {
            state: std::mem::replace(&mut state, next_state.clone()),
            action: logits,
            reward: r,
            next_state,
            done: t + 1 == cfg.horizon_steps,
        });
        if agent.ready() {
            loss_sum += agent.learn()?.critic_loss;
            updates += 1;
        }

        reward_sum += r;
        latency_sum += outcome.latencies.iter().sum::<f64>() / m;
        sandbox_sum += estimate
            .latencies
            .iter()
            .zip(&outcome.latencies)
            .map(|(e, l)| (e - l).abs())
            .sum::<f64>()
            / m;
        prev_alloc = Some(alloc);
    }

    let steps = cfg.horizon_steps as f64;
    Ok(EpisodeStats {
        episode,
        mean_reward: reward_sum / steps,
        mean_latency: latency_sum / steps,
        sandbox_error: sandbox_sum / steps,
        critic_loss: if updates > 0 { loss_sum / updates as f64 } else { f64::NAN },
        updates,
        noise_std,
        params_finite: agent.all_finite(),
    })
}
