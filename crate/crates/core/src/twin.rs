//! The digital twin: a periodically synchronized mirror of the physical
//! network that predicts demand, tracks its own sync error, builds the
//! agent's observation and evaluates candidate allocations offline.

use crate::config::ScenarioConfig;
use crate::ddpg::reward::{reward, RewardParams};
use crate::error::{Error, Result};
use crate::geometry::Position;
use crate::physical::Observation;
use crate::radio;

/// Exponential moving average step of the demand predictor.
pub fn predict_demand(d_hat: f64, d_obs: f64, alpha: f64) -> f64 {
    alpha * d_obs + (1.0 - alpha) * d_hat
}

pub fn sync_error(d_obs: f64, d_hat: f64) -> f64 {
    (d_obs - d_hat).abs()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwinState {
    /// Mirrored `|h_i|^2`.
    pub gain_sq: Vec<f64>,
    /// Mirrored interference power, W.
    pub interference: Vec<f64>,
    /// Demand observed at the last sync, bits.
    pub demand: Vec<f64>,
    /// EMA demand prediction, bits.
    pub predicted: Vec<f64>,
    pub sync_error: Vec<f64>,
    pub ue_pos: Vec<Position>,
    pub fbs_pos: Position,
    pub last_sync: Option<usize>,
}

impl TwinState {
    pub fn new(num_ues: usize) -> Self {
        Self {
            gain_sq: vec![0.0; num_ues],
            interference: vec![0.0; num_ues],
            demand: vec![0.0; num_ues],
            predicted: vec![0.0; num_ues],
            sync_error: vec![0.0; num_ues],
            ue_pos: vec![Position::default(); num_ues],
            fbs_pos: Position::default(),
            last_sync: None,
        }
    }

    pub fn num_ues(&self) -> usize {
        self.demand.len()
    }

    pub fn is_due(&self, tick: usize, period: usize) -> bool {
        self.last_sync.is_none_or(|last| tick.saturating_sub(last) >= period)
    }

    /// Copies the physical observation in, advances the predictor and
    /// recomputes the sync error against the fresh prediction.
    pub fn synchronize(&mut self, obs: &Observation, alpha: f64) {
        self.gain_sq.clone_from(&obs.gain_sq);
        self.interference.clone_from(&obs.interference);
        self.demand.clone_from(&obs.demands);
        self.ue_pos.clone_from(&obs.ue_pos);
        self.fbs_pos = obs.fbs_pos;
        for i in 0..self.num_ues() {
            self.predicted[i] = predict_demand(self.predicted[i], obs.demands[i], alpha);
            self.sync_error[i] = sync_error(obs.demands[i], self.predicted[i]);
        }
        self.last_sync = Some(obs.tick);
    }
}

/// Affine maps that bring every observation feature to order one.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationScale {
    log_gain_lo: f64,
    log_gain_hi: f64,
    mean_demand: f64,
    center: Position,
    half_w: f64,
    half_h: f64,
}

impl ObservationScale {
    /// Gains are mapped so that the mean gain directly under the FBS sits at
    /// +1 and the mean gain at the far corner of the zone sits at -1.
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        let b = cfg.bounds();
        let h = cfg.fbs_altitude;
        let diag = (b.x_max - b.x_min).hypot(b.y_max - b.y_min);
        let far = (diag * diag + h * h).sqrt();
        let hi = radio::path_loss(h, cfg.pathloss_const, cfg.pathloss_exp).log10();
        let mut lo = radio::path_loss(far, cfg.pathloss_const, cfg.pathloss_exp).log10();
        if hi - lo < 1.0 {
            lo = hi - 1.0;
        }
        Self {
            log_gain_lo: lo,
            log_gain_hi: hi,
            mean_demand: cfg.mean_demand(),
            center: b.center(),
            half_w: b.half_width().max(1.0),
            half_h: b.half_height().max(1.0),
        }
    }

    pub fn gain(&self, gain_sq: f64) -> f64 {
        let l = gain_sq.max(f64::MIN_POSITIVE).log10();
        (2.0 * (l - self.log_gain_lo) / (self.log_gain_hi - self.log_gain_lo) - 1.0).clamp(-5.0, 5.0)
    }

    pub fn bits(&self, bits: f64) -> f64 {
        bits / self.mean_demand
    }

    pub fn x(&self, x: f64) -> f64 {
        (x - self.center.x) / self.half_w
    }

    pub fn y(&self, y: f64) -> f64 {
        (y - self.center.y) / self.half_h
    }
}

/// Flat observation: per UE `[gain, demand, x, y, sync error]`, then the
/// FBS `[x, y]`. Length `5M + 2`.
pub fn assemble_state(twin: &TwinState, scale: &ObservationScale) -> Vec<f64> {
    let m = twin.num_ues();
    let mut s = Vec::with_capacity(5 * m + 2);
    for i in 0..m {
        s.extend_from_slice(&[
            scale.gain(twin.gain_sq[i]),
            scale.bits(twin.demand[i]),
            scale.x(twin.ue_pos[i].x),
            scale.y(twin.ue_pos[i].y),
            scale.bits(twin.sync_error[i]),
        ]);
    }
    s.push(scale.x(twin.fbs_pos.x));
    s.push(scale.y(twin.fbs_pos.y));
    s
}

/// Rejects allocations that break `sum B_i <= B, B_i >= 0`.
pub fn check_allocation(alloc: &[f64], num_ues: usize, total: f64) -> Result<()> {
    if alloc.len() != num_ues {
        return Err(Error::Shape {
            expected: num_ues,
            actual: alloc.len(),
        });
    }
    if let Some(b) = alloc.iter().find(|b| !b.is_finite() || **b < 0.0) {
        return Err(Error::Constraint(format!("allocation {b} is not a non-negative number")));
    }
    let sum: f64 = alloc.iter().sum();
    if sum > total * (1.0 + 1e-12) {
        return Err(Error::Constraint(format!("allocations sum to {sum} Hz, above {total} Hz")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandboxEstimate {
    pub latencies: Vec<f64>,
    pub reward: f64,
}

/// Evaluates an allocation against the twin's mirrored channel and
/// predicted demand. Reads the twin only.
pub fn simulate_action(
    twin: &TwinState,
    cfg: &ScenarioConfig,
    alloc: &[f64],
    prev_alloc: &[f64],
) -> Result<SandboxEstimate> {
    check_allocation(alloc, twin.num_ues(), cfg.total_bandwidth)?;
    let latencies: Vec<f64> = (0..twin.num_ues())
        .map(|i| {
            let sinr = radio::sinr(cfg.tx_power, twin.gain_sq[i], cfg.noise_power, twin.interference[i]);
            let rate = radio::achievable_rate(alloc[i], sinr);
            let d = radio::distance(twin.ue_pos[i], twin.fbs_pos, cfg.fbs_altitude);
            radio::latency(twin.predicted[i], rate, cfg.proc_delay, d, cfg.latency_cap)
        })
        .collect();
    let r = reward(&latencies, alloc, prev_alloc, &twin.sync_error, &RewardParams::from_config(cfg));
    Ok(SandboxEstimate { latencies, reward: r })
}

/// A twin bound to its configuration and sync cadence.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalTwin {
    pub state: TwinState,
    pub scale: ObservationScale,
    alpha: f64,
    period: usize,
}

impl DigitalTwin {
    pub fn new(cfg: &ScenarioConfig) -> Self {
        Self {
            state: TwinState::new(cfg.num_ues),
            scale: ObservationScale::from_config(cfg),
            alpha: cfg.ema_alpha,
            period: cfg.sync_period,
        }
    }

    /// Synchronizes if the cadence says so; returns whether it did.
    pub fn maybe_sync(&mut self, obs: &Observation) -> bool {
        if self.state.is_due(obs.tick, self.period) {
            self.state.synchronize(obs, self.alpha);
            true
        } else {
            false
        }
    }

    pub fn observe(&self) -> Vec<f64> {
        assemble_state(&self.state, &self.scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physical::PhysicalNetwork;

    fn obs(tick: usize, demands: Vec<f64>) -> Observation {
        let m = demands.len();
        Observation {
            tick,
            demands,
            gain_sq: vec![1e-9; m],
            interference: vec![0.0; m],
            distances: vec![100.0; m],
            ue_pos: vec![Position::default(); m],
            fbs_pos: Position::new(tick as f64, 0.0),
        }
    }

    #[test]
    fn predictor_limits() {
        assert_eq!(predict_demand(3.0, 11.0, 1.0), 11.0);
        assert_eq!(predict_demand(3.0, 11.0, 0.0), 3.0);
        assert_eq!(predict_demand(0.0, 10.0, 0.5), 5.0);
        assert_eq!(sync_error(7.0, 7.0), 0.0);
        assert_eq!(sync_error(10.0, 4.0), 6.0);
    }

    #[test]
    fn constant_demand_error_halves() {
        let mut t = TwinState::new(1);
        let mut prev = None;
        for k in 0..30 {
            t.synchronize(&obs(k, vec![1e5]), 0.5);
            if let Some(p) = prev {
                assert_eq!(t.sync_error[0], 0.5 * p);
            }
            prev = Some(t.sync_error[0]);
        }
    }

    #[test]
    fn every_tick_sync_tracks_fbs() {
        let cfg = ScenarioConfig {
            num_ues: 3,
            ..Default::default()
        };
        let mut net = PhysicalNetwork::new(&cfg, 1);
        let mut twin = DigitalTwin::new(&cfg);
        for _ in 0..50 {
            let o = net.begin_tick().clone();
            assert!(twin.maybe_sync(&o));
            assert_eq!(twin.state.fbs_pos, net.fbs().pos);
            net.apply(&[1e6; 3]);
        }
    }

    #[test]
    fn stale_between_syncs() {
        let cfg = ScenarioConfig {
            num_ues: 2,
            sync_period: 5,
            ..Default::default()
        };
        let mut twin = DigitalTwin::new(&cfg);
        assert!(twin.maybe_sync(&obs(0, vec![1.0, 2.0])));
        let frozen = twin.state.clone();
        for tick in 1..5 {
            assert!(!twin.maybe_sync(&obs(tick, vec![9.0, 9.0])));
            assert_eq!(twin.state, frozen);
        }
        assert!(twin.maybe_sync(&obs(5, vec![9.0, 9.0])));
        assert_eq!(twin.state.last_sync, Some(5));
    }

    #[test]
    fn layout_and_zero_propagation() {
        let cfg = ScenarioConfig {
            num_ues: 2,
            ema_alpha: 1.0,
            ..Default::default()
        };
        let mut twin = DigitalTwin::new(&cfg);
        twin.maybe_sync(&obs(0, vec![0.0, 0.0]));
        let s = twin.observe();
        assert_eq!(s.len(), 12);
        for i in 0..2 {
            assert_eq!(s[5 * i + 1], 0.0);
            assert_eq!(s[5 * i + 4], 0.0);
        }
    }

    #[test]
    fn sandbox_starvation_and_constraints() {
        let cfg = ScenarioConfig {
            num_ues: 2,
            ..Default::default()
        };
        let mut twin = TwinState::new(2);
        twin.synchronize(&obs(0, vec![1e5, 1e5]), 1.0);
        let est = simulate_action(&twin, &cfg, &[0.0, 1e6], &[0.0, 1e6]).unwrap();
        assert_eq!(est.latencies[0], cfg.latency_cap);
        assert!(est.latencies[1] < cfg.latency_cap);

        assert!(matches!(simulate_action(&twin, &cfg, &[-1.0, 1e6], &[0.0; 2]), Err(Error::Constraint(_))));
        assert!(matches!(simulate_action(&twin, &cfg, &[2e7, 1e6], &[0.0; 2]), Err(Error::Constraint(_))));
        assert!(matches!(simulate_action(&twin, &cfg, &[1e6], &[0.0; 2]), Err(Error::Shape { .. })));
    }
}
