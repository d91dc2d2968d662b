//! Latency, utilization and jitter.

use std::collections::VecDeque;

pub fn avg_latency(latencies: &[f64]) -> f64 {
    latencies.iter().sum::<f64>() / latencies.len() as f64
}

/// Bandwidth that would serve `demand` bits within one tick at the given
/// spectral efficiency.
pub fn needed_bandwidth(demand: f64, spectral_eff: f64, dt: f64) -> f64 {
    if demand <= 0.0 {
        0.0
    } else if spectral_eff > 0.0 {
        demand / (dt * spectral_eff)
    } else {
        f64::INFINITY
    }
}

/// Useful share of the band: `sum min(B_i, need_i) / B`, in `[0, 1]`.
pub fn utilization(alloc: &[f64], spectral_eff: &[f64], demands: &[f64], dt: f64, total: f64) -> f64 {
    let useful: f64 = alloc
        .iter()
        .zip(spectral_eff)
        .zip(demands)
        .map(|((&b, &se), &d)| b.min(needed_bandwidth(d, se, dt)))
        .sum();
    (useful / total).clamp(0.0, 1.0)
}

fn population_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Mean over UEs of the standard deviation of each UE's latency over its
/// trailing `window` samples. `history[i]` is UE `i`'s series.
pub fn jitter(history: &[Vec<f64>], window: usize) -> f64 {
    if history.is_empty() {
        return 0.0;
    }
    history
        .iter()
        .map(|series| population_std(&series[series.len().saturating_sub(window)..]))
        .sum::<f64>()
        / history.len() as f64
}

/// Streaming form of [`jitter`]: per-UE sliding-window mean and squared
/// deviation sums, updated in O(M) per tick.
#[derive(Debug, Clone, PartialEq)]
pub struct JitterTracker {
    window: usize,
    samples: Vec<VecDeque<f64>>,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl JitterTracker {
    pub fn new(num_ues: usize, window: usize) -> Self {
        assert!(window >= 1, "jitter window must be at least one tick");
        Self {
            window,
            samples: vec![VecDeque::with_capacity(window + 1); num_ues],
            mean: vec![0.0; num_ues],
            m2: vec![0.0; num_ues],
        }
    }

    pub fn push(&mut self, latencies: &[f64]) {
        for (i, &x) in latencies.iter().enumerate() {
            let q = &mut self.samples[i];
            q.push_back(x);
            let n = q.len() as f64;
            let delta = x - self.mean[i];
            self.mean[i] += delta / n;
            self.m2[i] += delta * (x - self.mean[i]);
            if q.len() > self.window {
                let y = q.pop_front().expect("non-empty window");
                let n = q.len() as f64;
                let delta = y - self.mean[i];
                self.mean[i] -= delta / n;
                self.m2[i] -= delta * (y - self.mean[i]);
            }
            self.m2[i] = self.m2[i].max(0.0);
        }
    }

    pub fn value(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let total: f64 = self
            .samples
            .iter()
            .zip(&self.m2)
            .map(|(q, &m2)| if q.len() < 2 { 0.0 } else { (m2 / q.len() as f64).sqrt() })
            .sum();
        total / self.samples.len() as f64
    }
}
