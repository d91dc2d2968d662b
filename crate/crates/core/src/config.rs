//! Scenario configuration.
//!
//! A run is fully described by one [`ScenarioConfig`]. On disk it is a flat
//! JSON object; every key is optional and falls back to the default listed
//! on the field. Unknown keys are rejected so that typos surface as errors.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Bounds;

/// Small-scale fading applied to every link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingModel {
    /// i.i.d. CN(0,1) coefficient redrawn every tick.
    Rayleigh,
    /// Coefficient pinned to 1; only path loss remains.
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

/// Instantaneous term of the proportional-fair weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PfMetric {
    /// Rate the UE asks for this tick, `demand / dt`.
    RequestedRate,
    /// Classical `log2(1 + SINR)`.
    SpectralEfficiency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Number of UEs `M`.
    pub num_ues: usize,
    /// Slice bandwidth `B` in Hz.
    pub total_bandwidth: f64,
    /// Resource blocks `N`; only used when `rb_quantize` is set.
    pub num_rbs: usize,
    /// Round allocations down to whole resource blocks.
    pub rb_quantize: bool,
    /// Tick length and twin sync period `dt` in seconds.
    pub dt: f64,
    /// Steps per episode (training) or per run (evaluation).
    pub horizon_steps: usize,
    pub episodes: usize,

    /// Path-loss constant `kappa`.
    pub pathloss_const: f64,
    /// Path-loss exponent `beta`.
    pub pathloss_exp: f64,
    /// Per-UE transmit power in W.
    pub tx_power: f64,
    /// Noise power `N0` in W.
    pub noise_power: f64,
    /// Standard deviation of the NTN interference term in W.
    pub ntn_interference_std: f64,
    /// Fraction of a co-scheduled UE's received power leaking into another
    /// UE's band.
    pub cross_coupling: f64,
    pub fading: FadingModel,

    /// FBS altitude in m.
    pub fbs_altitude: f64,
    /// FBS speed cap in m/s.
    pub fbs_vmax: f64,
    /// Gradient step `eta` of the FBS controller, m^2 per update.
    pub fbs_step: f64,
    pub fbs_x_min: f64,
    pub fbs_x_max: f64,
    pub fbs_y_min: f64,
    pub fbs_y_max: f64,
    /// Weight the coverage objective by current demand instead of uniformly.
    pub fbs_demand_weighted: bool,

    /// Mean of the calm-state lognormal demand, bits per tick.
    pub traffic_mean: f64,
    /// Log-space standard deviation of the calm-state demand.
    pub traffic_sigma_log: f64,
    /// Per-tick probability of a calm UE entering a burst.
    pub traffic_p_burst: f64,
    /// Per-tick probability of a bursting UE calming down.
    pub traffic_p_calm: f64,
    /// Demand multiplier while bursting.
    pub traffic_burst_factor: f64,

    /// EMA smoothing factor `alpha` of the twin's demand predictor.
    pub ema_alpha: f64,
    /// Twin synchronization cadence in ticks.
    pub sync_period: usize,

    /// Processing delay `T_proc` in s.
    pub proc_delay: f64,
    /// Latency reported for a UE that has data but zero rate, in s.
    pub latency_cap: f64,

    /// Allocation-change penalty `lambda`.
    pub reward_lambda: f64,
    /// Sync-error penalty weight.
    pub reward_sync_weight: f64,
    /// Rewards are clipped to `[-reward_clip, reward_clip]`.
    pub reward_clip: f64,

    pub discount: f64,
    pub soft_tau: f64,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub optimizer: OptimizerKind,
    /// Global gradient-norm clip applied before every optimizer step.
    pub grad_clip: f64,
    pub hidden_units: usize,
    pub hidden_layers: usize,
    /// Actor logits pass through `bound * tanh`; `null` leaves them linear.
    pub actor_logit_bound: Option<f64>,
    pub buffer_cap: usize,
    pub batch_size: usize,
    pub noise_std0: f64,
    /// Per-episode multiplicative decay of the exploration std.
    pub noise_decay: f64,

    pub pf_metric: PfMetric,
    /// EMA window of the PF average-rate tracker, in ticks.
    pub pf_window: f64,
    /// Lower bound on the PF average rate, bits/s.
    pub pf_rate_floor: f64,

    /// Trailing window of the jitter metric, in ticks.
    pub jitter_window: usize,
    /// One metrics record every this many ticks.
    pub record_interval: usize,
    /// Ticks at the end of a run summarized as the final window.
    pub final_window: usize,
    /// Length of an evaluation run (`run`, `compare`), in ticks.
    pub eval_steps: usize,

    pub rng_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            num_ues: 50,
            total_bandwidth: 20e6,
            num_rbs: 100,
            rb_quantize: false,
            dt: 0.01,
            horizon_steps: 200,
            episodes: 300,

            pathloss_const: 3e-4,
            pathloss_exp: 2.5,
            tx_power: 0.1,
            noise_power: 1e-13,
            ntn_interference_std: 1e-13,
            cross_coupling: 1e-4,
            fading: FadingModel::Rayleigh,

            fbs_altitude: 100.0,
            fbs_vmax: 10.0,
            fbs_step: 50.0,
            fbs_x_min: -500.0,
            fbs_x_max: 500.0,
            fbs_y_min: -500.0,
            fbs_y_max: 500.0,
            fbs_demand_weighted: false,

            traffic_mean: 1e5,
            traffic_sigma_log: 0.25,
            traffic_p_burst: 0.05,
            traffic_p_calm: 0.5,
            traffic_burst_factor: 5.0,

            ema_alpha: 0.5,
            sync_period: 1,

            proc_delay: 1e-3,
            latency_cap: 1.0,

            reward_lambda: 0.1,
            reward_sync_weight: 0.05,
            reward_clip: 2.0,

            discount: 0.0,
            soft_tau: 0.001,
            lr_actor: 1e-4,
            lr_critic: 1e-3,
            optimizer: OptimizerKind::Adam,
            grad_clip: 1.0,
            hidden_units: 128,
            hidden_layers: 2,
            actor_logit_bound: Some(3.0),
            buffer_cap: 100_000,
            batch_size: 64,
            noise_std0: 0.3,
            noise_decay: 0.999,

            pf_metric: PfMetric::RequestedRate,
            pf_window: 100.0,
            pf_rate_floor: 1.0,

            jitter_window: 100,
            record_interval: 10,
            final_window: 1000,
            eval_steps: 5000,

            rng_seed: 1,
        }
    }
}

impl ScenarioConfig {
    /// Parses a config document. Blank input yields the defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = if text.trim().is_empty() {
            ScenarioConfig::default()
        } else {
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn bounds(&self) -> Bounds {
        Bounds {
            x_min: self.fbs_x_min,
            x_max: self.fbs_x_max,
            y_min: self.fbs_y_min,
            y_max: self.fbs_y_max,
        }
    }

    /// Long-run mean demand per UE per tick, including bursts.
    pub fn mean_demand(&self) -> f64 {
        let p = self.traffic_p_burst + self.traffic_p_calm;
        let burst_share = if p > 0.0 { self.traffic_p_burst / p } else { 0.0 };
        self.traffic_mean * (1.0 + burst_share * (self.traffic_burst_factor - 1.0))
    }

    pub fn obs_dim(&self) -> usize {
        5 * self.num_ues + 2
    }

    pub fn action_dim(&self) -> usize {
        self.num_ues + 1
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("must be positive, got {v}")))
            }
        }
        fn non_negative(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("must be non-negative, got {v}")))
            }
        }
        fn unit(field: &'static str, v: f64) -> Result<()> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("must lie in [0, 1], got {v}")))
            }
        }
        fn at_least_one(field: &'static str, v: usize) -> Result<()> {
            if v >= 1 {
                Ok(())
            } else {
                Err(Error::invalid(field, "must be at least 1"))
            }
        }

        at_least_one("num_ues", self.num_ues)?;
        positive("total_bandwidth", self.total_bandwidth)?;
        at_least_one("num_rbs", self.num_rbs)?;
        positive("dt", self.dt)?;
        at_least_one("horizon_steps", self.horizon_steps)?;
        positive("pathloss_const", self.pathloss_const)?;
        positive("pathloss_exp", self.pathloss_exp)?;
        positive("tx_power", self.tx_power)?;
        positive("noise_power", self.noise_power)?;
        non_negative("ntn_interference_std", self.ntn_interference_std)?;
        non_negative("cross_coupling", self.cross_coupling)?;
        positive("fbs_altitude", self.fbs_altitude)?;
        positive("fbs_vmax", self.fbs_vmax)?;
        non_negative("fbs_step", self.fbs_step)?;
        for (field, v) in [
            ("fbs_x_min", self.fbs_x_min),
            ("fbs_x_max", self.fbs_x_max),
            ("fbs_y_min", self.fbs_y_min),
            ("fbs_y_max", self.fbs_y_max),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(field, "must be finite"));
            }
        }
        if self.fbs_x_min > self.fbs_x_max {
            return Err(Error::invalid("fbs_x_max", "must not be below fbs_x_min"));
        }
        if self.fbs_y_min > self.fbs_y_max {
            return Err(Error::invalid("fbs_y_max", "must not be below fbs_y_min"));
        }
        positive("traffic_mean", self.traffic_mean)?;
        non_negative("traffic_sigma_log", self.traffic_sigma_log)?;
        unit("traffic_p_burst", self.traffic_p_burst)?;
        unit("traffic_p_calm", self.traffic_p_calm)?;
        if !(self.traffic_burst_factor.is_finite() && self.traffic_burst_factor >= 1.0) {
            return Err(Error::invalid("traffic_burst_factor", "must be at least 1"));
        }
        unit("ema_alpha", self.ema_alpha)?;
        at_least_one("sync_period", self.sync_period)?;
        non_negative("proc_delay", self.proc_delay)?;
        positive("latency_cap", self.latency_cap)?;
        non_negative("reward_lambda", self.reward_lambda)?;
        non_negative("reward_sync_weight", self.reward_sync_weight)?;
        positive("reward_clip", self.reward_clip)?;
        if !(0.0..1.0).contains(&self.discount) {
            return Err(Error::invalid("discount", format!("must lie in [0, 1), got {}", self.discount)));
        }
        if !(self.soft_tau > 0.0 && self.soft_tau <= 1.0) {
            return Err(Error::invalid("soft_tau", format!("must lie in (0, 1], got {}", self.soft_tau)));
        }
        positive("lr_actor", self.lr_actor)?;
        positive("lr_critic", self.lr_critic)?;
        positive("grad_clip", self.grad_clip)?;
        at_least_one("hidden_units", self.hidden_units)?;
        if let Some(bound) = self.actor_logit_bound {
            positive("actor_logit_bound", bound)?;
        }
        at_least_one("buffer_cap", self.buffer_cap)?;
        at_least_one("batch_size", self.batch_size)?;
        non_negative("noise_std0", self.noise_std0)?;
        unit("noise_decay", self.noise_decay)?;
        if !(self.pf_window.is_finite() && self.pf_window >= 1.0) {
            return Err(Error::invalid("pf_window", "must be at least 1 tick"));
        }
        positive("pf_rate_floor", self.pf_rate_floor)?;
        at_least_one("jitter_window", self.jitter_window)?;
        at_least_one("record_interval", self.record_interval)?;
        at_least_one("final_window", self.final_window)?;
        at_least_one("eval_steps", self.eval_steps)?;
        Ok(())
    }
}

/// Reads and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ScenarioConfig::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_scale_values_echo() {
        let cfg = ScenarioConfig::from_json(
            r#"{"num_ues": 50, "total_bandwidth": 2.0e7, "dt": 0.01, "fbs_vmax": 10}"#,
        )
        .unwrap();
        assert_eq!(cfg.num_ues, 50);
        assert_eq!(cfg.total_bandwidth, 2.0e7);
        assert_eq!(cfg.dt, 0.01);
        assert_eq!(cfg.fbs_vmax, 10.0);
    }

    #[test]
    fn logit_bound_is_optional_but_positive() {
        assert_eq!(ScenarioConfig::from_json(r#"{"actor_logit_bound": null}"#).unwrap().actor_logit_bound, None);
        assert!(ScenarioConfig::from_json(r#"{"actor_logit_bound": 0.0}"#).is_err());
    }

    #[test]
    fn alpha_out_of_range_names_field() {
        let err = ScenarioConfig::from_json(r#"{"ema_alpha": 1.5}"#).unwrap_err();
        match err {
            Error::Validation { field, .. } => assert_eq!(field, "ema_alpha"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_document_is_defaults() {
        assert_eq!(ScenarioConfig::from_json("").unwrap(), ScenarioConfig::default());
        assert_eq!(ScenarioConfig::from_json("{}").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn unknown_key_rejected() {
        let err = ScenarioConfig::from_json(r#"{"num_uess": 3}"#).unwrap_err();
        assert!(matches!(err, Error::Parse(_)), "{err:?}");
    }

    #[test]
    fn malformed_is_parse_error() {
        assert!(matches!(ScenarioConfig::from_json("{num_ues: }"), Err(Error::Parse(_))));
    }

    #[test]
    fn invariants_enforced() {
        for doc in [
            r#"{"num_ues": 0}"#,
            r#"{"total_bandwidth": 0}"#,
            r#"{"soft_tau": 0}"#,
            r#"{"discount": 1.0}"#,
            r#"{"fbs_altitude": 0}"#,
            r#"{"fbs_x_min": 10, "fbs_x_max": 0}"#,
        ] {
            assert!(matches!(ScenarioConfig::from_json(doc), Err(Error::Validation { .. })), "{doc}");
        }
    }

    #[test]
    fn json_round_trip() {
        let cfg = ScenarioConfig {
            num_ues: 7,
            fading: FadingModel::Frozen,
            ..Default::default()
        };
        assert_eq!(ScenarioConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn load_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"num_ues": 3}"#).unwrap();
        assert_eq!(load_config(&path).unwrap().num_ues, 3);
        assert!(matches!(load_config(dir.path().join("nope.json")), Err(Error::Io { .. })));
    }
}
