//! Bandwidth allocators behind one interface: the static equal split, the
//! proportional-fair heuristic and the trained DRL policy.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::{PfMetric, ScenarioConfig};
use crate::ddpg::agent::{actor_forward, project_action};
use crate::ddpg::checkpoint::Checkpoint;
use crate::ddpg::mlp::Mlp;
use crate::error::Result;
use crate::physical::{Observation, StepOutcome};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AllocatorKind {
    #[default]
    Static,
    Pf,
    Drl,
}

impl AllocatorKind {
    pub const ALL: [AllocatorKind; 3] = [AllocatorKind::Static, AllocatorKind::Pf, AllocatorKind::Drl];

    pub fn as_str(self) -> &'static str {
        match self {
            AllocatorKind::Static => "static",
            AllocatorKind::Pf => "pf",
            AllocatorKind::Drl => "drl",
        }
    }
}

impl fmt::Display for AllocatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything an allocator may look at when deciding a tick.
#[derive(Debug, Clone, Copy)]
pub struct AllocContext<'a> {
    /// The physical observation of this tick.
    pub obs: &'a Observation,
    /// `log2(1 + SINR_i)` for this tick.
    pub spectral_eff: &'a [f64],
    /// The twin's observation vector.
    pub state: &'a [f64],
}

pub trait Allocator: Send {
    fn kind(&self) -> AllocatorKind;

    fn allocate(&mut self, ctx: &AllocContext<'_>) -> Result<Vec<f64>>;

    /// Feedback after the allocation was served.
    fn observe(&mut self, _outcome: &StepOutcome) {}
}

pub fn static_alloc(num_ues: usize, total: f64) -> Vec<f64> {
    vec![total / num_ues as f64; num_ues]
}

/// Per-UE PF weights: the UE's instantaneous figure of merit over its
/// smoothed served rate.
pub fn pf_weights(metric: PfMetric, demands: &[f64], spectral_eff: &[f64], avg_rate: &[f64], dt: f64, floor: f64) -> Vec<f64> {
    demands
        .iter()
        .zip(spectral_eff)
        .zip(avg_rate)
        .map(|((&d, &se), &avg)| {
            let merit = match metric {
                PfMetric::SpectralEfficiency => se,
                PfMetric::RequestedRate => d / dt,
            };
            merit / avg.max(floor)
        })
        .collect()
}

/// Shares `total` in proportion to `weights`; an all-zero weight vector
/// falls back to the equal split.
pub fn pf_alloc(weights: &[f64], total: f64) -> Vec<f64> {
    let sum: f64 = weights.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        let mut b: Vec<f64> = weights.iter().map(|w| total * w / sum).collect();
        while b.iter().sum::<f64>() > total {
            b.iter_mut().for_each(|x| *x *= 1.0 - f64::EPSILON);
        }
        b
    } else {
        static_alloc(weights.len(), total)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticAllocator {
    alloc: Vec<f64>,
}

impl StaticAllocator {
    pub fn new(cfg: &ScenarioConfig) -> Self {
        Self {
            alloc: static_alloc(cfg.num_ues, cfg.total_bandwidth),
        }
    }
}

impl Allocator for StaticAllocator {
    fn kind(&self) -> AllocatorKind {
        AllocatorKind::Static
    }

    fn allocate(&mut self, _ctx: &AllocContext<'_>) -> Result<Vec<f64>> {
        Ok(self.alloc.clone())
    }
}

/// PF scheduler state: an exponential moving average of each UE's served
/// rate with a window of `window` ticks.
#[derive(Debug, Clone, PartialEq)]
pub struct PfAllocator {
    pub avg_rate: Vec<f64>,
    metric: PfMetric,
    window: f64,
    floor: f64,
    dt: f64,
    total: f64,
}

impl PfAllocator {
    /// Histories start at the rate that would serve the mean demand.
    pub fn new(cfg: &ScenarioConfig) -> Self {
        Self {
            avg_rate: vec![cfg.mean_demand() / cfg.dt; cfg.num_ues],
            metric: cfg.pf_metric,
            window: cfg.pf_window,
            floor: cfg.pf_rate_floor,
            dt: cfg.dt,
            total: cfg.total_bandwidth,
        }
    }
}

impl Allocator for PfAllocator {
    fn kind(&self) -> AllocatorKind {
        AllocatorKind::Pf
    }

    fn allocate(&mut self, ctx: &AllocContext<'_>) -> Result<Vec<f64>> {
        let w = pf_weights(self.metric, &ctx.obs.demands, ctx.spectral_eff, &self.avg_rate, self.dt, self.floor);
        Ok(pf_alloc(&w, self.total))
    }

    fn observe(&mut self, outcome: &StepOutcome) {
        for (avg, served) in self.avg_rate.iter_mut().zip(&outcome.served_bits) {
            *avg += (served / self.dt - *avg) / self.window;
        }
    }
}

/// Greedy policy of a trained actor.
#[derive(Debug, Clone, PartialEq)]
pub struct DrlAllocator {
    actor: Mlp,
    total: f64,
}

impl DrlAllocator {
    pub fn new(actor: Mlp, cfg: &ScenarioConfig) -> Self {
        Self {
            actor,
            total: cfg.total_bandwidth,
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint, cfg: &ScenarioConfig) -> Result<Self> {
        ck.check_dims(cfg)?;
        Ok(Self::new(ck.actor.clone(), cfg))
    }
}

impl Allocator for DrlAllocator {
    fn kind(&self) -> AllocatorKind {
        AllocatorKind::Drl
    }

    fn allocate(&mut self, ctx: &AllocContext<'_>) -> Result<Vec<f64>> {
        Ok(project_action(&actor_forward(&self.actor, ctx.state)?, self.total))
    }
}

/// Builds an allocator; `drl` requires the actor from a checkpoint.
pub fn build_allocator(kind: AllocatorKind, cfg: &ScenarioConfig, checkpoint: Option<&Checkpoint>) -> Result<Box<dyn Allocator>> {
    Ok(match kind {
        AllocatorKind::Static => Box::new(StaticAllocator::new(cfg)),
        AllocatorKind::Pf => Box::new(PfAllocator::new(cfg)),
        AllocatorKind::Drl => {
            let ck = checkpoint.ok_or(crate::error::Error::MissingCheckpoint)?;
            Box::new(DrlAllocator::from_checkpoint(ck, cfg)?)
        }
    })
}
