//! The physical network: ground truth that the twin mirrors and that
//! allocations are applied to.
//!
//! A tick has two halves. [`PhysicalNetwork::begin_tick`] draws the tick's
//! traffic and channels at the current FBS position; [`PhysicalNetwork::apply`]
//! serves the UEs with an allocation, then flies the FBS one tick.

use crate::config::ScenarioConfig;
use crate::geometry::Position;
use crate::mobility;
use crate::radio::{self, ChannelDraw};
use crate::scenario::{init_scenario, step_traffic, FbsState, SimStreams, TrafficModel, UeState};

/// What the physical layer exposes to the twin at a sync.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub tick: usize,
    pub demands: Vec<f64>,
    pub gain_sq: Vec<f64>,
    pub interference: Vec<f64>,
    pub distances: Vec<f64>,
    pub ue_pos: Vec<Position>,
    pub fbs_pos: Position,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// Bandwidth actually granted, Hz.
    pub alloc: Vec<f64>,
    pub sinr: Vec<f64>,
    pub rates: Vec<f64>,
    pub latencies: Vec<f64>,
    pub served_bits: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalNetwork {
    cfg: ScenarioConfig,
    traffic: TrafficModel,
    ues: Vec<UeState>,
    fbs: FbsState,
    streams: SimStreams,
    tick: usize,
    current: Option<(Observation, ChannelDraw)>,
}

impl PhysicalNetwork {
    pub fn new(cfg: &ScenarioConfig, seed: u64) -> Self {
        let (ues, fbs, streams) = init_scenario(cfg, seed);
        Self {
            cfg: cfg.clone(),
            traffic: TrafficModel::from_config(cfg),
            ues,
            fbs,
            streams,
            tick: 0,
            current: None,
        }
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn ues(&self) -> &[UeState] {
        &self.ues
    }

    pub fn fbs(&self) -> &FbsState {
        &self.fbs
    }

    pub fn tick(&self) -> usize {
        self.tick
    }

    pub fn ue_positions(&self) -> Vec<Position> {
        self.ues.iter().map(|u| u.pos).collect()
    }

    /// Draws this tick's demands and channels. Calling it twice without an
    /// `apply` in between returns the same observation.
    pub fn begin_tick(&mut self) -> &Observation {
        if self.current.is_none() {
            step_traffic(&mut self.ues, &self.traffic, &mut self.streams.traffic);
            let positions = self.ue_positions();
            let draw = radio::draw_channels(
                &self.cfg,
                &positions,
                self.fbs.pos,
                &mut self.streams.fading,
                &mut self.streams.interference,
            );
            let obs = Observation {
                tick: self.tick,
                demands: self.ues.iter().map(|u| u.demand).collect(),
                gain_sq: draw.gain_sq(),
                interference: draw.interference(),
                distances: draw.distances.clone(),
                ue_pos: positions,
                fbs_pos: self.fbs.pos,
            };
            self.current = Some((obs, draw));
        }
        &self.current.as_ref().expect("tick drawn").0
    }

    pub fn observation(&self) -> Option<&Observation> {
        self.current.as_ref().map(|(o, _)| o)
    }

    pub fn channels(&self) -> Option<&ChannelDraw> {
        self.current.as_ref().map(|(_, d)| d)
    }

    /// Serves the current tick with `alloc` (Hz per UE) and advances time.
    pub fn apply(&mut self, alloc: &[f64]) -> StepOutcome {
        self.begin_tick();
        let (obs, _) = self.current.take().expect("tick drawn");
        let cfg = &self.cfg;
        let alloc: Vec<f64> = if cfg.rb_quantize {
            quantize_to_rbs(alloc, cfg.total_bandwidth, cfg.num_rbs)
        } else {
            alloc.to_vec()
        };

        let m = self.ues.len();
        let mut out = StepOutcome {
            alloc,
            sinr: Vec::with_capacity(m),
            rates: Vec::with_capacity(m),
            latencies: Vec::with_capacity(m),
            served_bits: Vec::with_capacity(m),
        };
        for (i, ue) in self.ues.iter_mut().enumerate() {
            let sinr = radio::sinr(cfg.tx_power, obs.gain_sq[i], cfg.noise_power, obs.interference[i]);
            let rate = radio::achievable_rate(out.alloc[i], sinr);
            let lat = radio::latency(ue.demand, rate, cfg.proc_delay, obs.distances[i], cfg.latency_cap);
            let served = ue.backlog.min(rate * cfg.dt);
            ue.backlog = (ue.backlog - served).max(0.0);
            out.sinr.push(sinr);
            out.rates.push(rate);
            out.latencies.push(lat);
            out.served_bits.push(served);
        }

        let weights = cfg.fbs_demand_weighted.then(|| mobility::demand_weights(&obs.demands));
        let v = mobility::velocity_from_gradient(&obs.ue_pos, &self.fbs, cfg.fbs_step, cfg.fbs_vmax, weights.as_deref());
        self.fbs = mobility::step_position(&self.fbs, v, cfg.dt, &cfg.bounds());
        self.tick += 1;
        out
    }
}

/// Rounds each allocation down to a whole number of resource blocks.
pub fn quantize_to_rbs(alloc: &[f64], total: f64, num_rbs: usize) -> Vec<f64> {
    let rb = total / num_rbs as f64;
    alloc.iter().map(|b| (b / rb).floor() * rb).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig {
            num_ues: 6,
            ..Default::default()
        }
    }

    #[test]
    fn same_seed_same_trace() {
        let run = || {
            let mut net = PhysicalNetwork::new(&cfg(), 42);
            let mut trace = Vec::new();
            for _ in 0..20 {
                let obs = net.begin_tick().clone();
                let out = net.apply(&[cfg().total_bandwidth / 6.0; 6]);
                trace.push((obs, out, net.fbs().pos));
            }
            trace
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn allocation_does_not_perturb_draws() {
        let mut a = PhysicalNetwork::new(&cfg(), 5);
        let mut b = PhysicalNetwork::new(&cfg(), 5);
        for t in 0..30 {
            assert_eq!(a.begin_tick(), b.begin_tick());
            a.apply(&[1e6; 6]);
            b.apply(&[t as f64 * 1e5, 0.0, 3e6, 1.0, 2e6, 5e5]);
        }
    }

    #[test]
    fn backlog_and_fbs_stay_valid() {
        let c = cfg();
        let mut net = PhysicalNetwork::new(&c, 8);
        for _ in 0..200 {
            net.begin_tick();
            net.apply(&[0.0, 1e3, 1e5, 1e6, 3e6, 1e7]);
            assert!(net.ues().iter().all(|u| u.backlog >= 0.0 && u.demand >= 0.0));
            assert!(c.bounds().contains(net.fbs().pos));
            let (vx, vy) = net.fbs().velocity;
            assert!(vx.hypot(vy) <= c.fbs_vmax * (1.0 + 1e-12));
        }
    }

    #[test]
    fn starved_ue_hits_cap() {
        let c = cfg();
        let mut net = PhysicalNetwork::new(&c, 8);
        net.begin_tick();
        let out = net.apply(&[0.0, 1e6, 1e6, 1e6, 1e6, 1e6]);
        assert_eq!(out.latencies[0], c.latency_cap);
        assert_eq!(out.served_bits[0], 0.0);
    }

    #[test]
    fn rb_quantization_floors() {
        let q = quantize_to_rbs(&[0.0, 199_999.0, 200_000.0, 450_000.0], 20e6, 100);
        assert_eq!(q, vec![0.0, 0.0, 200_000.0, 400_000.0]);
    }
}
