//! Per-step reward: negative normalized latency, allocation churn and sync
//! error, clipped to `[-clip, clip]`.
//!
//! Each sum is divided by its natural scale so the weights are unitless:
//! latency by `M * latency_cap`, churn by `B`, sync error by
//! `M * mean_demand`.

use crate::config::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParams {
    pub latency_cap: f64,
    pub total_bandwidth: f64,
    pub mean_demand: f64,
    pub lambda: f64,
    pub sync_weight: f64,
    pub clip: f64,
}

impl RewardParams {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            latency_cap: cfg.latency_cap,
            total_bandwidth: cfg.total_bandwidth,
            mean_demand: cfg.mean_demand(),
            lambda: cfg.reward_lambda,
            sync_weight: cfg.reward_sync_weight,
            clip: cfg.reward_clip,
        }
    }
}

pub fn reward(latencies: &[f64], alloc: &[f64], prev_alloc: &[f64], sync_err: &[f64], p: &RewardParams) -> f64 {
    let m = latencies.len() as f64;
    let latency: f64 = latencies.iter().sum::<f64>() / (m * p.latency_cap);
    let churn: f64 = alloc.iter().zip(prev_alloc).map(|(b, prev)| (b - prev).abs()).sum::<f64>() / p.total_bandwidth;
    let sync: f64 = sync_err.iter().sum::<f64>() / (m * p.mean_demand);
    let r = -latency - p.lambda * churn - p.sync_weight * sync;
    if r.is_nan() {
        -p.clip
    } else {
        r.clamp(-p.clip, p.clip)
    }
}
