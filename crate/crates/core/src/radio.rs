//! Link-level model: geometry, path loss with Rayleigh fading, interference,
//! SINR, Shannon rate and per-UE latency.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::{FadingModel, ScenarioConfig};
use crate::geometry::Position;
use crate::rng::RngStream;

pub const SPEED_OF_LIGHT: f64 = 3e8;

/// 3-D distance between a ground UE and the FBS hovering at `altitude`.
pub fn distance(ue: Position, fbs: Position, altitude: f64) -> f64 {
    let dx = ue.x - fbs.x;
    let dy = ue.y - fbs.y;
    (dx * dx + dy * dy + altitude * altitude).sqrt()
}

/// Mean power gain `kappa / d^beta`.
pub fn path_loss(d: f64, kappa: f64, beta: f64) -> f64 {
    kappa / d.powf(beta)
}

/// Draws a small-scale fading coefficient. Rayleigh gives CN(0, 1).
pub fn draw_fading(model: FadingModel, rng: &mut RngStream) -> Complex64 {
    match model {
        FadingModel::Frozen => Complex64::new(1.0, 0.0),
        FadingModel::Rayleigh => {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        }
    }
}

/// One UE's channel for the current tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSample {
    /// Complex amplitude gain `h`.
    pub gain: Complex64,
    /// `|h|^2`, the power gain consumed by the SINR.
    pub gain_sq: f64,
    /// Interference power seen by this UE, W.
    pub interference: f64,
}

/// Complex gain `sqrt(kappa / d^beta) * g` for a given fading coefficient.
pub fn channel_gain(d: f64, kappa: f64, beta: f64, fading: Complex64) -> Complex64 {
    fading * path_loss(d, kappa, beta).sqrt()
}

/// Power gain `|h|^2`, evaluated without the square root round trip so a
/// unit fading coefficient reproduces the path loss exactly.
pub fn channel_gain_sq(d: f64, kappa: f64, beta: f64, fading: Complex64) -> f64 {
    path_loss(d, kappa, beta) * fading.norm_sqr()
}

/// Square matrix of cross power gains; entry `(i, j)` is `|h_{j,i}|^2`,
/// the gain from UE `j` into the node serving UE `i`. The diagonal is unused.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossGains {
    m: usize,
    data: Vec<f64>,
}

impl CrossGains {
    pub fn zeros(m: usize) -> Self {
        Self {
            m,
            data: vec![0.0; m * m],
        }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.m + j] = v;
    }
}

/// Deterministic part of the interference: `sum_{j != i} P_j |h_{j,i}|^2`.
pub fn interference_sum(i: usize, cross: &CrossGains, powers: &[f64]) -> f64 {
    (0..cross.len())
        .filter(|&j| j != i)
        .map(|j| powers[j] * cross.get(i, j))
        .sum()
}

/// Total interference on UE `i`, including a Gaussian NTN term floored at
/// zero watts.
pub fn interference(
    i: usize,
    cross: &CrossGains,
    powers: &[f64],
    sigma_ntn: f64,
    rng: &mut RngStream,
) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    interference_sum(i, cross, powers) + (sigma_ntn * z).max(0.0)
}

pub fn sinr(power: f64, gain_sq: f64, noise: f64, interference: f64) -> f64 {
    power * gain_sq / (noise + interference)
}

/// Shannon rate in bits/s over `bandwidth` Hz.
pub fn achievable_rate(bandwidth: f64, sinr: f64) -> f64 {
    if bandwidth <= 0.0 {
        return 0.0;
    }
    bandwidth * (1.0 + sinr).log2()
}

pub fn spectral_efficiency(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}

/// Transmission + processing + propagation delay. A UE with data and no
/// rate gets `cap` instead of an infinite delay.
pub fn latency(data_bits: f64, rate: f64, t_proc: f64, d: f64, cap: f64) -> f64 {
    if data_bits <= 0.0 {
        return t_proc + d / SPEED_OF_LIGHT;
    }
    if rate <= 0.0 {
        return cap;
    }
    data_bits / rate + t_proc + d / SPEED_OF_LIGHT
}

/// Per-tick channel realization for every UE.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    pub distances: Vec<f64>,
    pub samples: Vec<ChannelSample>,
    pub cross: CrossGains,
}

impl ChannelDraw {
    pub fn gain_sq(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.gain_sq).collect()
    }

    pub fn interference(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.interference).collect()
    }
}

/// Draws direct gains, cross gains and interference for all UEs.
///
/// Cross links reuse the direct path-loss law toward the shared serving
/// FBS, scaled by `cross_coupling`, with independent fading per link.
pub fn draw_channels(
    cfg: &ScenarioConfig,
    ues: &[Position],
    fbs: Position,
    fading_rng: &mut RngStream,
    interference_rng: &mut RngStream,
) -> ChannelDraw {
    let m = ues.len();
    let (kappa, beta) = (cfg.pathloss_const, cfg.pathloss_exp);
    let distances: Vec<f64> = ues.iter().map(|&u| distance(u, fbs, cfg.fbs_altitude)).collect();
    let direct: Vec<Complex64> = (0..m).map(|_| draw_fading(cfg.fading, fading_rng)).collect();

    let mut cross = CrossGains::zeros(m);
    for i in 0..m {
        for j in (0..m).filter(|&j| j != i) {
            let g = draw_fading(cfg.fading, fading_rng);
            cross.set(i, j, cfg.cross_coupling * channel_gain_sq(distances[j], kappa, beta, g));
        }
    }

    let powers = vec![cfg.tx_power; m];
    let samples = (0..m)
        .map(|i| ChannelSample {
            gain: channel_gain(distances[i], kappa, beta, direct[i]),
            gain_sq: channel_gain_sq(distances[i], kappa, beta, direct[i]),
            interference: interference(i, &cross, &powers, cfg.ntn_interference_std, interference_rng),
        })
        .collect();

    ChannelDraw {
        distances,
        samples,
        cross,
    }
}
