//! Seeded evaluation runs, paired comparisons and sweeps.

use crate::allocators::{build_allocator, AllocContext, Allocator, AllocatorKind};
use crate::config::ScenarioConfig;
use crate::ddpg::checkpoint::Checkpoint;
use crate::ddpg::reward::{reward, RewardParams};
use crate::error::Result;
use crate::harness::metrics::{avg_latency, utilization, JitterTracker};
use crate::harness::record::MetricsRecord;
use crate::par::{self, Execution};
use crate::physical::{Observation, StepOutcome};
use crate::physical::PhysicalNetwork;
use crate::radio;
use crate::twin::{check_allocation, simulate_action, DigitalTwin};

/// Everything that happened in one evaluated tick.
#[derive(Debug)]
pub struct TickRecord<'a> {
    pub tick: usize,
    pub obs: &'a Observation,
    pub outcome: &'a StepOutcome,
    /// Latencies the twin predicted for the allocation before it was applied.
    pub estimated: &'a [f64],
    pub utilization: f64,
    pub jitter: f64,
    pub reward: f64,
    pub mean_sync_error: f64,
}

/// Means over the final window of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub allocator: AllocatorKind,
    pub seed: u64,
    pub avg_latency: f64,
    pub utilization: f64,
    pub jitter: f64,
    pub reward: f64,
    pub mean_sync_error: f64,
    /// Mean `|twin estimate - realized latency|`, s.
    pub sandbox_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<MetricsRecord>,
    pub summary: Summary,
}

#[derive(Default)]
struct Accum {
    n: usize,
    latency: f64,
    utilization: f64,
    jitter: f64,
    reward: f64,
    sync_error: f64,
    sandbox: f64,
}

impl Accum {
    fn mean(&self, v: f64) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            v / self.n as f64
        }
    }
}

/// Simulates `steps` ticks of `allocator` on the scenario seeded by `seed`,
/// calling `observer` after every tick.
pub fn simulate(
    cfg: &ScenarioConfig,
    allocator: &mut dyn Allocator,
    seed: u64,
    steps: usize,
    mut observer: impl FnMut(&TickRecord<'_>),
) -> Result<RunOutput> {
    let m = cfg.num_ues as f64;
    let params = RewardParams::from_config(cfg);
    let mut net = PhysicalNetwork::new(cfg, seed);
    let mut twin = DigitalTwin::new(cfg);
    let mut jitter = JitterTracker::new(cfg.num_ues, cfg.jitter_window);
    let mut prev_alloc: Option<Vec<f64>> = None;
    let mut records = Vec::with_capacity(steps / cfg.record_interval + 1);
    let mut interval = Accum::default();
    let mut tail = Accum::default();
    let tail_start = steps.saturating_sub(cfg.final_window);

    for tick in 0..steps {
        let obs = net.begin_tick().clone();
        twin.maybe_sync(&obs);
        let state = twin.observe();
        let spectral_eff: Vec<f64> = obs
            .gain_sq
            .iter()
            .zip(&obs.interference)
            .map(|(&g, &i)| radio::spectral_efficiency(radio::sinr(cfg.tx_power, g, cfg.noise_power, i)))
            .collect();
        let alloc = allocator.allocate(&AllocContext {
            obs: &obs,
            spectral_eff: &spectral_eff,
            state: &state,
        })?;
        check_allocation(&alloc, cfg.num_ues, cfg.total_bandwidth)?;
        let prev = prev_alloc.as_deref().unwrap_or(&alloc);
        let estimate = simulate_action(&twin.state, cfg, &alloc, prev)?;
        let outcome = net.apply(&alloc);
        allocator.observe(&outcome);

        jitter.push(&outcome.latencies);
        let rec = TickRecord {
            tick,
            obs: &obs,
            outcome: &outcome,
            estimated: &estimate.latencies,
            utilization: utilization(&outcome.alloc, &spectral_eff, &obs.demands, cfg.dt, cfg.total_bandwidth),
            jitter: jitter.value(),
            reward: reward(&outcome.latencies, &outcome.alloc, prev, &twin.state.sync_error, &params),
            mean_sync_error: twin.state.sync_error.iter().sum::<f64>() / m,
        };
        let sandbox = estimate
            .latencies
            .iter()
            .zip(&outcome.latencies)
            .map(|(e, l)| (e - l).abs())
            .sum::<f64>()
            / m;
        let lat = avg_latency(&outcome.latencies);
        let mut targets = vec![&mut interval];
        if tick >= tail_start {
            targets.push(&mut tail);
        }
        for a in targets {
            a.n += 1;
            a.latency += lat;
            a.utilization += rec.utilization;
            a.jitter += rec.jitter;
            a.reward += rec.reward;
            a.sync_error += rec.mean_sync_error;
            a.sandbox += sandbox;
        }
        if (tick + 1) % cfg.record_interval == 0 || tick + 1 == steps {
            records.push(MetricsRecord {
                time: (tick + 1) as f64 * cfg.dt,
                allocator: allocator.kind(),
                avg_latency: interval.mean(interval.latency),
                utilization: interval.mean(interval.utilization),
                jitter: rec.jitter,
                mean_sync_error: interval.mean(interval.sync_error),
                reward: interval.mean(interval.reward),
                seed,
            });
            interval = Accum::default();
        }
        observer(&rec);
        prev_alloc = Some(outcome.alloc);
    }

    Ok(RunOutput {
        records,
        summary: Summary {
            allocator: allocator.kind(),
            seed,
            avg_latency: tail.mean(tail.latency),
            utilization: tail.mean(tail.utilization),
            jitter: tail.mean(tail.jitter),
            reward: tail.mean(tail.reward),
            mean_sync_error: tail.mean(tail.sync_error),
            sandbox_error: tail.mean(tail.sandbox),
        },
    })
}

/// One evaluation run of `kind` over `cfg.eval_steps` ticks.
pub fn run_experiment(
    cfg: &ScenarioConfig,
    kind: AllocatorKind,
    checkpoint: Option<&Checkpoint>,
    seed: u64,
) -> Result<RunOutput> {
    cfg.validate()?;
    let mut allocator = build_allocator(kind, cfg, checkpoint)?;
    simulate(cfg, allocator.as_mut(), seed, cfg.eval_steps, |_| {})
}

/// Runs every allocator on the same seed; outputs follow
/// [`AllocatorKind::ALL`] order.
pub fn compare(cfg: &ScenarioConfig, checkpoint: Option<&Checkpoint>, seed: u64, exec: Execution) -> Result<Vec<RunOutput>> {
    cfg.validate()?;
    // Fail before spending time on the other allocators.
    if checkpoint.is_none() {
        return Err(crate::error::Error::MissingCheckpoint);
    }
    par::map(exec, AllocatorKind::ALL.to_vec(), |kind| run_experiment(cfg, kind, checkpoint, seed))
        .into_iter()
        .collect()
}

/// Final-window summaries of one allocator over many seeds.
pub fn seed_sweep(
    cfg: &ScenarioConfig,
    kind: AllocatorKind,
    checkpoint: Option<&Checkpoint>,
    seeds: &[u64],
    exec: Execution,
) -> Result<Vec<Summary>> {
    par::map(exec, seeds.to_vec(), |seed| run_experiment(cfg, kind, checkpoint, seed).map(|o| o.summary))
        .into_iter()
        .collect()
}

/// Mean twin estimate error for each sync period, averaged over `seeds`,
/// with the allocator `kind` driving the network.
pub fn staleness_sweep(
    cfg: &ScenarioConfig,
    kind: AllocatorKind,
    checkpoint: Option<&Checkpoint>,
    periods: &[usize],
    seeds: &[u64],
    exec: Execution,
) -> Result<Vec<(usize, f64)>> {
    let jobs: Vec<(usize, u64)> = periods.iter().flat_map(|&p| seeds.iter().map(move |&s| (p, s))).collect();
    let errors = par::map(exec, jobs, |(period, seed)| {
        let c = ScenarioConfig {
            sync_period: period,
            final_window: cfg.eval_steps,
            ..cfg.clone()
        };
        run_experiment(&c, kind, checkpoint, seed).map(|o| o.summary.sandbox_error)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok(periods
        .iter()
        .zip(errors.chunks(seeds.len()))
        .map(|(&p, errs)| (p, errs.iter().sum::<f64>() / errs.len() as f64))
        .collect())
}
