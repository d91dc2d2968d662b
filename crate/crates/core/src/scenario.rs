//! World initialization and the traffic-demand process.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::ScenarioConfig;
use crate::geometry::{Bounds, Position};
use crate::rng::{substream, RngStream, Substream};

#[derive(Debug, Clone, PartialEq)]
pub struct UeState {
    pub pos: Position,
    /// Bits arriving this tick.
    pub demand: f64,
    /// Bits queued and not yet served.
    pub backlog: f64,
    pub bursting: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbsState {
    pub pos: Position,
    pub altitude: f64,
    /// Velocity commanded on the last move, m/s.
    pub velocity: (f64, f64),
}

/// Random streams owned by the physical network.
#[derive(Debug, Clone, PartialEq)]
pub struct SimStreams {
    pub traffic: RngStream,
    pub fading: RngStream,
    pub interference: RngStream,
}

impl SimStreams {
    pub fn new(seed: u64) -> Self {
        Self {
            traffic: substream(seed, Substream::Traffic),
            fading: substream(seed, Substream::Fading),
            interference: substream(seed, Substream::Interference),
        }
    }
}

/// Two-state Markov-modulated lognormal demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficModel {
    /// Mean calm-state demand, bits per tick.
    pub mean: f64,
    pub sigma_log: f64,
    pub p_burst: f64,
    pub p_calm: f64,
    pub burst_factor: f64,
}

impl TrafficModel {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            mean: cfg.traffic_mean,
            sigma_log: cfg.traffic_sigma_log,
            p_burst: cfg.traffic_p_burst,
            p_calm: cfg.traffic_p_calm,
            burst_factor: cfg.traffic_burst_factor,
        }
    }

    /// Stationary mean demand per tick.
    pub fn long_run_mean(&self) -> f64 {
        let p = self.p_burst + self.p_calm;
        let share = if p > 0.0 { self.p_burst / p } else { 0.0 };
        self.mean * (1.0 + share * (self.burst_factor - 1.0))
    }

    fn draw(&self, ue: &mut UeState, rng: &mut RngStream) -> f64 {
        let u: f64 = rng.random();
        ue.bursting = if ue.bursting { u >= self.p_calm } else { u < self.p_burst };
        let z: f64 = rng.sample(StandardNormal);
        // Mean-preserving lognormal; sigma = 0 gives exactly `mean`.
        let s = self.sigma_log;
        let base = self.mean * (s * z - 0.5 * s * s).exp();
        if ue.bursting {
            base * self.burst_factor
        } else {
            base
        }
    }
}

/// Places the UEs and the FBS for a fresh episode.
///
/// UEs are uniform over the FBS bounds; the FBS starts hovering at the
/// center. The same `(cfg, seed)` always yields the same world.
pub fn init_scenario(cfg: &ScenarioConfig, seed: u64) -> (Vec<UeState>, FbsState, SimStreams) {
    let bounds = cfg.bounds();
    let mut placement = substream(seed, Substream::Placement);
    let ues = (0..cfg.num_ues)
        .map(|_| UeState {
            pos: uniform_in(&bounds, &mut placement),
            demand: 0.0,
            backlog: 0.0,
            bursting: false,
        })
        .collect();
    let fbs = FbsState {
        pos: bounds.center(),
        altitude: cfg.fbs_altitude,
        velocity: (0.0, 0.0),
    };
    (ues, fbs, SimStreams::new(seed))
}

fn uniform_in(b: &Bounds, rng: &mut RngStream) -> Position {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    Position::new(b.x_min + u * (b.x_max - b.x_min), b.y_min + v * (b.y_max - b.y_min))
}

/// Draws this tick's demand for every UE and queues it.
pub fn step_traffic(ues: &mut [UeState], model: &TrafficModel, rng: &mut RngStream) {
    for ue in ues {
        let d = model.draw(ue, rng);
        ue.demand = d;
        ue.backlog += d;
    }
}
