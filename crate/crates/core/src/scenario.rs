//! Configuration ingestion, unit conversion, and the canonical parameter
//! record shared by all other modules.
//!
//! The on-disk format is a flat `key = value` text file; `#` starts a
//! comment. Physical quantities are accepted in both dB and linear form with
//! suffix disambiguation (`_dbm`, `_dbi`, `_db`, `_w`); everything is
//! normalized to linear SI on load. The full key list:
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `sense_power_dbm` \| `sense_power_w` | radar sensing power | 10 dBm |
//! | `tx_gain_dbi` \| `tx_gain` | radar transmit antenna gain | 45 dBi |
//! | `rx_gain_dbi` \| `rx_gain` | radar receive antenna gain | 45 dBi |
//! | `wavelength_m` | sensing-signal wavelength | 0.0039 |
//! | `max_range_m` | maximum sensing range | 200 |
//! | `cone_angle_deg` \| `cone_half_angle_rad` | full cone angle / half angle | 60° |
//! | `target_range_m` | range to the sensed target | 10 |
//! | `rcs_dof` | RCS fluctuation degrees of freedom δ | 2 |
//! | `rcs_mean_m2` | mean radar cross section | 1 |
//! | `tx_power_max_dbm` \| `tx_power_max_w` | max confidential tx power | 50 dBm |
//! | `tx_power_dbm` \| `tx_power_w` | operating confidential tx power | 10 dBm |
//! | `path_loss_exp` | path-loss exponent α | 4 |
//! | `noise_bob_dbm` \| `noise_bob_w` | AWGN at Bob | −90 dBm |
//! | `noise_eve_dbm` \| `noise_eve_w` | AWGN at Eves | −90 dBm |
//! | `noise_alice_dbm` \| `noise_alice_w` | AWGN at Alice | −90 dBm |
//! | `thresh_bob_db` \| `thresh_bob` | Bob decoding SINR threshold β_b | 1.0 |
//! | `thresh_eve_db` \| `thresh_eve` | Eve decoding SINR threshold β_e | 1.0 |
//! | `thresh_sense_db` \| `thresh_sense` | sensing SINR threshold β_s | 1e-4 |
//! | `propagation_speed_mps` | signal propagation speed | 2.998e8 |
//! | `lane_width_m` | lane width | 3.6 |
//! | `min_follow_m` | minimum following distance | 5 |
//! | `v_max_mps` | maximum vehicle speed | 20 |
//! | `a_max_mps2` | maximum vehicle acceleration | 3 |
//! | `carol_density` | interferer density λ_i | 0.001 |
//! | `carol_density_mode` | `linear` (per m) or `areal` (per m²) | linear |
//! | `eve_density` | eavesdropper density λ_e (per m²) | 1e-4 |
//! | `horizon_s` | discretized horizon T | 20 |
//! | `num_slots` | number of time slots N | 200 |
//! | `rel_min` | minimum reliability 1−COP | 0.9 |
//! | `sec_max` | maximum tolerated SOP | 0.1 |
//! | `sen_min` | minimum SRP | 0.9 |
//! | `alice_x_m`, `bob_x_m`, `eve_x_m`, `carol_x_m` | initial x positions | 0, 10, 5, 505 |
//! | `bob_target_range_m`, `eve_target_range_m` | self-echo target ranges | `min_follow_m` |
//! | `initial_speed_mps` | common initial speed | 16 |

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{db_to_linear, dbm_to_watts};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        field,
        reason: reason.into(),
    }
}

/// Vehicle radar parameters, linear SI scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadarParams {
    /// Sensing power P_sen (W).
    pub sense_power: f64,
    /// Transmit antenna gain G_t (linear).
    pub tx_gain: f64,
    /// Receive antenna gain G_r (linear).
    pub rx_gain: f64,
    /// Wavelength λ_w (m).
    pub wavelength: f64,
    /// Maximum sensing range R_max (m).
    pub max_range: f64,
    /// Half of the horizontal beam angle, θ/2 (rad).
    pub cone_half_angle: f64,
    /// Range to the sensed target R_tar (m).
    pub target_range: f64,
    /// RCS fluctuation degrees of freedom δ.
    pub rcs_dof: f64,
    /// Mean RCS σ̄_av (m²).
    pub rcs_mean: f64,
}

impl RadarParams {
    /// Effective aperture of the radar receiver, `G_r·λ_w²/(4π)` (m²).
    pub fn effective_aperture(&self) -> f64 {
        self.rx_gain * self.wavelength * self.wavelength / (4.0 * PI)
    }

    /// Power density at unit distance from the source, `P_sen·G_t/(4π)` (W).
    pub fn unit_power_density(&self) -> f64 {
        self.sense_power * self.tx_gain / (4.0 * PI)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let pos: [(&'static str, f64); 9] = [
            ("sense_power", self.sense_power),
            ("tx_gain", self.tx_gain),
            ("rx_gain", self.rx_gain),
            ("wavelength", self.wavelength),
            ("max_range", self.max_range),
            ("cone_half_angle", self.cone_half_angle),
            ("target_range", self.target_range),
            ("rcs_dof", self.rcs_dof),
            ("rcs_mean", self.rcs_mean),
        ];
        for (field, v) in pos {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(field, format!("must be strictly positive, got {v}")));
            }
        }
        if self.cone_half_angle >= PI / 2.0 {
            return Err(invalid(
                "cone_half_angle",
                format!("must lie in (0, π/2), got {}", self.cone_half_angle),
            ));
        }
        if self.target_range > self.max_range {
            return Err(invalid(
                "target_range",
                format!(
                    "must not exceed max_range ({} > {})",
                    self.target_range, self.max_range
                ),
            ));
        }
        Ok(())
    }
}

/// Communication-side parameters, linear SI scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommParams {
    /// Maximum confidential transmit power P_com^max (W).
    pub tx_power_max: f64,
    /// Operating confidential transmit power P_com (W).
    pub tx_power: f64,
    /// Path-loss exponent α ∈ [2, 6].
    pub path_loss_exp: f64,
    /// AWGN power at Bob σ_b² (W).
    pub noise_bob: f64,
    /// AWGN power at the Eves σ_e² (W).
    pub noise_eve: f64,
    /// AWGN power at Alice σ_a² (W).
    pub noise_alice: f64,
    /// Bob decoding SINR threshold β_b (linear).
    pub thresh_bob: f64,
    /// Eve decoding SINR threshold β_e (linear).
    pub thresh_eve: f64,
    /// Sensing SINR threshold β_s (linear, zero allowed: always-detect).
    pub thresh_sense: f64,
    /// Propagation speed c (m/s).
    pub propagation_speed: f64,
}

impl CommParams {
    fn validate(&self) -> Result<(), ScenarioError> {
        let pos: [(&'static str, f64); 7] = [
            ("tx_power_max", self.tx_power_max),
            ("tx_power", self.tx_power),
            ("noise_bob", self.noise_bob),
            ("noise_eve", self.noise_eve),
            ("noise_alice", self.noise_alice),
            ("thresh_bob", self.thresh_bob),
            ("thresh_eve", self.thresh_eve),
        ];
        for (field, v) in pos {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(field, format!("must be strictly positive, got {v}")));
            }
        }
        if self.thresh_sense < 0.0 || !self.thresh_sense.is_finite() {
            return Err(invalid(
                "thresh_sense",
                format!("must be nonnegative, got {}", self.thresh_sense),
            ));
        }
        if !(2.0..=6.0).contains(&self.path_loss_exp) {
            return Err(invalid(
                "path_loss_exp",
                format!("must lie in [2, 6], got {}", self.path_loss_exp),
            ));
        }
        if self.tx_power > self.tx_power_max {
            return Err(invalid(
                "tx_power",
                format!(
                    "exceeds tx_power_max ({} > {})",
                    self.tx_power, self.tx_power_max
                ),
            ));
        }
        if !(self.propagation_speed > 0.0) {
            return Err(invalid("propagation_speed", "must be strictly positive"));
        }
        Ok(())
    }
}

/// Interferer density interpretation: the same number plugs into the plane
/// integrals (per m²) and the lane line integral (per m); the tag states
/// which geometric sampling the value was calibrated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMode {
    /// Per meter of lane (scenario / success-ranging geometry).
    Linear,
    /// Per square meter of plane (derivation-matched geometry).
    Areal,
}

/// Road and traffic parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoadParams {
    /// Lane width D_lane (m).
    pub lane_width: f64,
    /// Minimum following distance D_foll^min (m).
    pub min_follow: f64,
    /// Maximum vehicle speed v_max (m/s).
    pub v_max: f64,
    /// Maximum vehicle acceleration a_max (m/s²).
    pub a_max: f64,
    /// Interferer (Carol) density λ_i.
    pub carol_density: f64,
    /// Unit mode for `carol_density`.
    pub carol_density_mode: DensityMode,
    /// Eavesdropper density λ_e (per m²).
    pub eve_density: f64,
    /// Horizon T (s).
    pub horizon: f64,
    /// Number of time slots N.
    pub num_slots: usize,
}

impl RoadParams {
    /// Slot duration Δt = T/N (s).
    pub fn dt(&self) -> f64 {
        self.horizon / self.num_slots as f64
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.lane_width > 0.0) {
            return Err(invalid("lane_width", "must be strictly positive"));
        }
        if !(self.min_follow > 0.0) {
            return Err(invalid("min_follow", "must be strictly positive"));
        }
        if !(self.v_max > 0.0) {
            return Err(invalid("v_max", "must be strictly positive"));
        }
        if !(self.a_max > 0.0) {
            return Err(invalid("a_max", "must be strictly positive"));
        }
        if self.carol_density < 0.0 || self.eve_density < 0.0 {
            return Err(invalid("carol_density", "densities must be nonnegative"));
        }
        if self.num_slots < 1 {
            return Err(invalid("num_slots", "must be at least 1"));
        }
        if !(self.horizon > 0.0) {
            return Err(invalid("horizon", "slot duration T/N must be positive"));
        }
        Ok(())
    }
}

/// Constraint thresholds for the optimization problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Thresholds {
    /// Minimum reliability 1−COP (ζ_rel^min).
    pub rel_min: f64,
    /// Maximum tolerated SOP (ζ_sec^max).
    pub sec_max: f64,
    /// Minimum SRP (ζ_sen^min).
    pub sen_min: f64,
}

impl Thresholds {
    fn validate(&self) -> Result<(), ScenarioError> {
        for (field, v) in [
            ("rel_min", self.rel_min),
            ("sec_max", self.sec_max),
            ("sen_min", self.sen_min),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(field, format!("must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

/// Initial longitudinal positions. Lanes are fixed by the road layout:
/// Alice and Bob share lane 0 (y = 0), the Eve drives lane 1 (y = D_lane)
/// and the Carol lane 2 (y = 2·D_lane), heading the opposite way.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitialPositions {
    pub alice_x: f64,
    pub bob_x: f64,
    pub eve_x: f64,
    pub carol_x: f64,
}

/// Full scenario: the immutable parameter record every module consumes.
/// Safe to share read-only across parallel workers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub radar: RadarParams,
    pub comm: CommParams,
    pub road: RoadParams,
    pub thresholds: Thresholds,
    pub initial_positions: InitialPositions,
    /// Common initial speed v (m/s); Carol drives −x, everyone else +x.
    pub initial_speed: f64,
    /// Self-echo target range at Bob (m); defaults to the following distance.
    pub bob_target_range: f64,
    /// Self-echo target range at the Eves (m); defaults to the following distance.
    pub eve_target_range: f64,
}

impl Default for ScenarioConfig {
    /// Reference parameter set: 77 GHz forward radar, 45 dBi gains, 60° cone,
    /// 200 m range, 10 dBm sensing/communication power, 3.6 m lanes.
    fn default() -> Self {
        ScenarioConfig {
            radar: RadarParams {
                sense_power: dbm_to_watts(10.0),
                tx_gain: db_to_linear(45.0),
                rx_gain: db_to_linear(45.0),
                wavelength: 0.0039,
                max_range: 200.0,
                cone_half_angle: PI / 6.0,
                target_range: 10.0,
                rcs_dof: 2.0,
                rcs_mean: 1.0,
            },
            comm: CommParams {
                tx_power_max: dbm_to_watts(50.0),
                tx_power: dbm_to_watts(10.0),
                path_loss_exp: 4.0,
                noise_bob: dbm_to_watts(-90.0),
                noise_eve: dbm_to_watts(-90.0),
                noise_alice: dbm_to_watts(-90.0),
                thresh_bob: 1.0,
                thresh_eve: 1.0,
                thresh_sense: 1e-4,
                propagation_speed: 2.998e8,
            },
            road: RoadParams {
                lane_width: 3.6,
                min_follow: 5.0,
                v_max: 20.0,
                a_max: 3.0,
                carol_density: 0.001,
                carol_density_mode: DensityMode::Linear,
                eve_density: 1e-4,
                horizon: 20.0,
                num_slots: 200,
            },
            thresholds: Thresholds {
                rel_min: 0.9,
                sec_max: 0.1,
                sen_min: 0.9,
            },
            initial_positions: InitialPositions {
                alice_x: 0.0,
                bob_x: 10.0,
                eve_x: 5.0,
                carol_x: 505.0,
            },
            initial_speed: 16.0,
            bob_target_range: 5.0,
            eve_target_range: 5.0,
        }
    }
}

impl ScenarioConfig {
    /// Load and validate a scenario file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_str_validated(&text)
    }

    /// Parse the flat key/value format and validate all invariants.
    /// Unset keys keep their defaults.
    pub fn from_str_validated(text: &str) -> Result<Self, ScenarioError> {
        let mut cfg = ScenarioConfig::default();
        let mut follow_set = false;
        let mut bob_tar_set = false;
        let mut eve_tar_set = false;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ScenarioError::Parse {
                line: line_no,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let num = || -> Result<f64, ScenarioError> {
                value.parse::<f64>().map_err(|_| ScenarioError::Parse {
                    line: line_no,
                    msg: format!("`{key}` expects a number, got `{value}`"),
                })
            };
            match key {
                "sense_power_dbm" => cfg.radar.sense_power = dbm_to_watts(num()?),
                "sense_power_w" => cfg.radar.sense_power = num()?,
                "tx_gain_dbi" => cfg.radar.tx_gain = db_to_linear(num()?),
                "tx_gain" => cfg.radar.tx_gain = num()?,
                "rx_gain_dbi" => cfg.radar.rx_gain = db_to_linear(num()?),
                "rx_gain" => cfg.radar.rx_gain = num()?,
                "wavelength_m" => cfg.radar.wavelength = num()?,
                "max_range_m" => cfg.radar.max_range = num()?,
                "cone_angle_deg" => cfg.radar.cone_half_angle = num()?.to_radians() / 2.0,
                "cone_half_angle_rad" => cfg.radar.cone_half_angle = num()?,
                "target_range_m" => cfg.radar.target_range = num()?,
                "rcs_dof" => cfg.radar.rcs_dof = num()?,
                "rcs_mean_m2" => cfg.radar.rcs_mean = num()?,
                "tx_power_max_dbm" => cfg.comm.tx_power_max = dbm_to_watts(num()?),
                "tx_power_max_w" => cfg.comm.tx_power_max = num()?,
                "tx_power_dbm" => cfg.comm.tx_power = dbm_to_watts(num()?),
                "tx_power_w" => cfg.comm.tx_power = num()?,
                "path_loss_exp" => cfg.comm.path_loss_exp = num()?,
                "noise_bob_dbm" => cfg.comm.noise_bob = dbm_to_watts(num()?),
                "noise_bob_w" => cfg.comm.noise_bob = num()?,
                "noise_eve_dbm" => cfg.comm.noise_eve = dbm_to_watts(num()?),
                "noise_eve_w" => cfg.comm.noise_eve = num()?,
                "noise_alice_dbm" => cfg.comm.noise_alice = dbm_to_watts(num()?),
                "noise_alice_w" => cfg.comm.noise_alice = num()?,
                "thresh_bob_db" => cfg.comm.thresh_bob = db_to_linear(num()?),
                "thresh_bob" => cfg.comm.thresh_bob = num()?,
                "thresh_eve_db" => cfg.comm.thresh_eve = db_to_linear(num()?),
                "thresh_eve" => cfg.comm.thresh_eve = num()?,
                "thresh_sense_db" => cfg.comm.thresh_sense = db_to_linear(num()?),
                "thresh_sense" => cfg.comm.thresh_sense = num()?,
                "propagation_speed_mps" => cfg.comm.propagation_speed = num()?,
                "lane_width_m" => cfg.road.lane_width = num()?,
                "min_follow_m" => {
                    cfg.road.min_follow = num()?;
                    follow_set = true;
                }
                "v_max_mps" => cfg.road.v_max = num()?,
                "a_max_mps2" => cfg.road.a_max = num()?,
                "carol_density" => cfg.road.carol_density = num()?,
                "carol_density_mode" => {
                    cfg.road.carol_density_mode = match value {
                        "linear" => DensityMode::Linear,
                        "areal" => DensityMode::Areal,
                        other => {
                            return Err(ScenarioError::Parse {
                                line: line_no,
                                msg: format!(
                                    "`carol_density_mode` expects `linear` or `areal`, got `{other}`"
                                ),
                            })
                        }
                    }
                }
                "eve_density" => cfg.road.eve_density = num()?,
                "horizon_s" => cfg.road.horizon = num()?,
                "num_slots" => {
                    cfg.road.num_slots =
                        value.parse::<usize>().map_err(|_| ScenarioError::Parse {
                            line: line_no,
                            msg: format!("`num_slots` expects a positive integer, got `{value}`"),
                        })?
                }
                "rel_min" => cfg.thresholds.rel_min = num()?,
                "sec_max" => cfg.thresholds.sec_max = num()?,
                "sen_min" => cfg.thresholds.sen_min = num()?,
                "alice_x_m" => cfg.initial_positions.alice_x = num()?,
                "bob_x_m" => cfg.initial_positions.bob_x = num()?,
                "eve_x_m" => cfg.initial_positions.eve_x = num()?,
                "carol_x_m" => cfg.initial_positions.carol_x = num()?,
                "initial_speed_mps" => cfg.initial_speed = num()?,
                "bob_target_range_m" => {
                    cfg.bob_target_range = num()?;
                    bob_tar_set = true;
                }
                "eve_target_range_m" => {
                    cfg.eve_target_range = num()?;
                    eve_tar_set = true;
                }
                other => {
                    return Err(ScenarioError::Parse {
                        line: line_no,
                        msg: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        // Self-echo ranges follow the safety distance unless pinned explicitly.
        if follow_set && !bob_tar_set {
            cfg.bob_target_range = cfg.road.min_follow;
        }
        if follow_set && !eve_tar_set {
            cfg.eve_target_range = cfg.road.min_follow;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Emit the config in the same flat format, linear units only. Values are
    /// printed with shortest-exact f64 formatting, so a reload reproduces the
    /// parameter record bit for bit.
    pub fn to_config_string(&self) -> String {
        let mut kv: Vec<(&str, String)> = Vec::new();
        fn f(kv: &mut Vec<(&str, String)>, k: &'static str, v: f64) {
            kv.push((k, format!("{v}")));
        }
        let kv = &mut kv;
        f(kv, "sense_power_w", self.radar.sense_power);
        f(kv, "tx_gain", self.radar.tx_gain);
        f(kv, "rx_gain", self.radar.rx_gain);
        f(kv, "wavelength_m", self.radar.wavelength);
        f(kv, "max_range_m", self.radar.max_range);
        f(kv, "cone_half_angle_rad", self.radar.cone_half_angle);
        f(kv, "target_range_m", self.radar.target_range);
        f(kv, "rcs_dof", self.radar.rcs_dof);
        f(kv, "rcs_mean_m2", self.radar.rcs_mean);
        f(kv, "tx_power_max_w", self.comm.tx_power_max);
        f(kv, "tx_power_w", self.comm.tx_power);
        f(kv, "path_loss_exp", self.comm.path_loss_exp);
        f(kv, "noise_bob_w", self.comm.noise_bob);
        f(kv, "noise_eve_w", self.comm.noise_eve);
        f(kv, "noise_alice_w", self.comm.noise_alice);
        f(kv, "thresh_bob", self.comm.thresh_bob);
        f(kv, "thresh_eve", self.comm.thresh_eve);
        f(kv, "thresh_sense", self.comm.thresh_sense);
        f(kv, "propagation_speed_mps", self.comm.propagation_speed);
        f(kv, "lane_width_m", self.road.lane_width);
        f(kv, "min_follow_m", self.road.min_follow);
        f(kv, "v_max_mps", self.road.v_max);
        f(kv, "a_max_mps2", self.road.a_max);
        f(kv, "carol_density", self.road.carol_density);
        kv.push((
            "carol_density_mode",
            match self.road.carol_density_mode {
                DensityMode::Linear => "linear".to_string(),
                DensityMode::Areal => "areal".to_string(),
            },
        ));
        f(kv, "eve_density", self.road.eve_density);
        f(kv, "horizon_s", self.road.horizon);
        kv.push(("num_slots", self.road.num_slots.to_string()));
        f(kv, "rel_min", self.thresholds.rel_min);
        f(kv, "sec_max", self.thresholds.sec_max);
        f(kv, "sen_min", self.thresholds.sen_min);
        f(kv, "alice_x_m", self.initial_positions.alice_x);
        f(kv, "bob_x_m", self.initial_positions.bob_x);
        f(kv, "eve_x_m", self.initial_positions.eve_x);
        f(kv, "carol_x_m", self.initial_positions.carol_x);
        f(kv, "initial_speed_mps", self.initial_speed);
        f(kv, "bob_target_range_m", self.bob_target_range);
        f(kv, "eve_target_range_m", self.eve_target_range);

        let mut out = String::new();
        for (k, v) in kv {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    /// Check every invariant; errors name the offending field.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.radar.validate()?;
        self.comm.validate()?;
        self.road.validate()?;
        self.thresholds.validate()?;
        if self.comm.propagation_speed <= self.road.v_max {
            return Err(invalid(
                "propagation_speed",
                "must exceed every vehicle speed",
            ));
        }
        if self.initial_speed < 0.0 || self.initial_speed > self.road.v_max {
            return Err(invalid(
                "initial_speed",
                format!(
                    "must lie in [0, v_max] = [0, {}], got {}",
                    self.road.v_max, self.initial_speed
                ),
            ));
        }
        let gap = self.initial_positions.bob_x - self.initial_positions.alice_x;
        if gap < self.road.min_follow {
            return Err(invalid(
                "bob_x",
                format!(
                    "Bob must lead Alice by at least min_follow ({gap} < {})",
                    self.road.min_follow
                ),
            ));
        }
        for (field, v) in [
            ("bob_target_range", self.bob_target_range),
            ("eve_target_range", self.eve_target_range),
        ] {
            if !(v > 0.0) {
                return Err(invalid(field, "must be strictly positive"));
            }
        }
        Ok(())
    }

    /// Slot duration Δt (s).
    pub fn dt(&self) -> f64 {
        self.road.dt()
    }

    /// Initial (x, y) of a role; lanes are fixed by the road layout.
    pub fn initial_position(&self, role: crate::geometry::Role) -> (f64, f64) {
        use crate::geometry::Role;
        let d = self.road.lane_width;
        match role {
            Role::Alice => (self.initial_positions.alice_x, 0.0),
            Role::Bob => (self.initial_positions.bob_x, 0.0),
            Role::Eve => (self.initial_positions.eve_x, d),
            Role::Carol => (self.initial_positions.carol_x, 2.0 * d),
        }
    }
}

/// Set a config field by dotted path (`comm.noise_bob`, `road.carol_density`,
/// …), used by sweep drivers. Returns an error naming the path if unknown.
pub fn set_field(cfg: &mut ScenarioConfig, path: &str, value: f64) -> Result<(), ScenarioError> {
    match path {
        "radar.sense_power" => cfg.radar.sense_power = value,
        "radar.tx_gain" => cfg.radar.tx_gain = value,
        "radar.rx_gain" => cfg.radar.rx_gain = value,
        "radar.wavelength" => cfg.radar.wavelength = value,
        "radar.max_range" => cfg.radar.max_range = value,
        "radar.cone_half_angle" => cfg.radar.cone_half_angle = value,
        "radar.target_range" => cfg.radar.target_range = value,
        "radar.rcs_dof" => cfg.radar.rcs_dof = value,
        "radar.rcs_mean" => cfg.radar.rcs_mean = value,
        "comm.tx_power_max" => cfg.comm.tx_power_max = value,
        "comm.tx_power" => cfg.comm.tx_power = value,
        "comm.path_loss_exp" => cfg.comm.path_loss_exp = value,
        "comm.noise_bob" => cfg.comm.noise_bob = value,
        "comm.noise_eve" => cfg.comm.noise_eve = value,
        "comm.noise_alice" => cfg.comm.noise_alice = value,
        "comm.thresh_bob" => cfg.comm.thresh_bob = value,
        "comm.thresh_eve" => cfg.comm.thresh_eve = value,
        "comm.thresh_sense" => cfg.comm.thresh_sense = value,
        "comm.propagation_speed" => cfg.comm.propagation_speed = value,
        "road.lane_width" => cfg.road.lane_width = value,
        "road.min_follow" => cfg.road.min_follow = value,
        "road.v_max" => cfg.road.v_max = value,
        "road.a_max" => cfg.road.a_max = value,
        "road.carol_density" => cfg.road.carol_density = value,
        "road.eve_density" => cfg.road.eve_density = value,
        "road.horizon" => cfg.road.horizon = value,
        "thresholds.rel_min" => cfg.thresholds.rel_min = value,
        "thresholds.sec_max" => cfg.thresholds.sec_max = value,
        "thresholds.sen_min" => cfg.thresholds.sen_min = value,
        "initial.alice_x" => cfg.initial_positions.alice_x = value,
        "initial.bob_x" => cfg.initial_positions.bob_x = value,
        "initial.eve_x" => cfg.initial_positions.eve_x = value,
        "initial.carol_x" => cfg.initial_positions.carol_x = value,
        "initial.speed" => cfg.initial_speed = value,
        "bob_target_range" => cfg.bob_target_range = value,
        "eve_target_range" => cfg.eve_target_range = value,
        _ => {
            return Err(ScenarioError::Validation {
                field: "sweep axis",
                reason: format!("unknown config field path `{path}`"),
            })
        }
    }
    Ok(())
}

/// The sweepable field paths, in documentation order.
pub fn sweepable_fields() -> &'static [&'static str] {
    &[
        "radar.sense_power",
        "radar.tx_gain",
        "radar.rx_gain",
        "radar.wavelength",
        "radar.max_range",
        "radar.cone_half_angle",
        "radar.target_range",
        "radar.rcs_dof",
        "radar.rcs_mean",
        "comm.tx_power_max",
        "comm.tx_power",
        "comm.path_loss_exp",
        "comm.noise_bob",
        "comm.noise_eve",
        "comm.noise_alice",
        "comm.thresh_bob",
        "comm.thresh_eve",
        "comm.thresh_sense",
        "comm.propagation_speed",
        "road.lane_width",
        "road.min_follow",
        "road.v_max",
        "road.a_max",
        "road.carol_density",
        "road.eve_density",
        "road.horizon",
        "thresholds.rel_min",
        "thresholds.sec_max",
        "thresholds.sen_min",
        "initial.alice_x",
        "initial.bob_x",
        "initial.eve_x",
        "initial.carol_x",
        "initial.speed",
        "bob_target_range",
        "eve_target_range",
    ]
}

/// A swept parameter axis over a fixed base config.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    /// Dotted field path, e.g. `comm.noise_bob`.
    pub axis: String,
    /// Values to substitute, in output order.
    pub values: Vec<f64>,
}

impl SweepSpec {
    /// Materialize the sweep: one validated config per value.
    pub fn expand(&self, base: &ScenarioConfig) -> Result<Vec<(f64, ScenarioConfig)>, ScenarioError> {
        if self.values.is_empty() {
            return Err(ScenarioError::Validation {
                field: "sweep values",
                reason: "sweep needs at least one value".into(),
            });
        }
        let mut out = Vec::with_capacity(self.values.len());
        for &v in &self.values {
            let mut cfg = base.clone();
            set_field(&mut cfg, &self.axis, v)?;
            cfg.validate()?;
            out.push((v, cfg));
        }
        Ok(out)
    }
}

/// Deterministic 64-bit FNV-1a digest of a parameter point, for tagging
/// metric rows with the inputs that produced them.
pub fn param_digest(values: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for v in values {
        for b in v.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ScenarioConfig::default().validate().unwrap();
    }

    #[test]
    fn db_suffix_conversions() {
        let cfg = ScenarioConfig::from_str_validated(
            "tx_power_max_dbm = 50\nrx_gain_dbi = 45\ncone_angle_deg = 60\n",
        )
        .unwrap();
        assert!((cfg.comm.tx_power_max - 100.0).abs() < 1e-9);
        assert!((cfg.radar.rx_gain - 31622.776601683792).abs() < 1e-6);
        assert!((cfg.radar.cone_half_angle - PI / 6.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_gain() {
        let err = ScenarioConfig::from_str_validated("rx_gain = 0\n").unwrap_err();
        match err {
            ScenarioError::Validation { field, .. } => assert_eq!(field, "rx_gain"),
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn rejects_unknown_key_and_garbage() {
        assert!(ScenarioConfig::from_str_validated("nonsense_key = 1\n").is_err());
        assert!(ScenarioConfig::from_str_validated("just words\n").is_err());
        assert!(ScenarioConfig::from_str_validated("tx_power_w = abc\n").is_err());
    }

    #[test]
    fn target_range_cannot_exceed_max_range() {
        let err =
            ScenarioConfig::from_str_validated("target_range_m = 300\nmax_range_m = 200\n")
                .unwrap_err();
        match err {
            ScenarioError::Validation { field, .. } => assert_eq!(field, "target_range"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let mut cfg = ScenarioConfig::default();
        cfg.comm.noise_bob = 3.1622776601683794e-13;
        cfg.road.carol_density = 1e-3 / 3.0;
        let text = cfg.to_config_string();
        let back = ScenarioConfig::from_str_validated(&text).unwrap();
        // Shortest-exact formatting means bit-identical reload; the spec'd
        // 1e-12 relative bound is a strict superset of that.
        assert_eq!(cfg.comm.noise_bob.to_bits(), back.comm.noise_bob.to_bits());
        assert_eq!(
            cfg.road.carol_density.to_bits(),
            back.road.carol_density.to_bits()
        );
        assert_eq!(
            cfg.radar.cone_half_angle.to_bits(),
            back.radar.cone_half_angle.to_bits()
        );
        assert_eq!(cfg.road.num_slots, back.road.num_slots);
    }

    #[test]
    fn effective_aperture_and_power_density() {
        let r = ScenarioConfig::default().radar;
        // G_r = 1, λ = 2√π gives exactly 1 m².
        let unit = RadarParams {
            rx_gain: 1.0,
            wavelength: 2.0 * PI.sqrt(),
            ..r.clone()
        };
        assert!((unit.effective_aperture() - 1.0).abs() < 1e-14);
        // Reference values at the default parameter point.
        assert!((r.effective_aperture() - 0.03827536580546239).abs() < 1e-12);
        assert!((r.unit_power_density() - 25.164606052243517).abs() < 1e-9);
        let strong = RadarParams {
            sense_power: 100.0,
            ..r
        };
        assert!((strong.unit_power_density() - 2.5164606052243516e5).abs() < 1e-6);
        // P = 4π, G_t = 1 → S = 1.
        let s1 = RadarParams {
            sense_power: 4.0 * PI,
            tx_gain: 1.0,
            ..strong
        };
        assert!((s1.unit_power_density() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sweep_expansion_and_unknown_axis() {
        let base = ScenarioConfig::default();
        let sweep = SweepSpec {
            axis: "comm.noise_bob".into(),
            values: vec![1e-12, 1e-10],
        };
        let rows = sweep.expand(&base).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].1.comm.noise_bob, 1e-10);
        let bad = SweepSpec {
            axis: "comm.bogus".into(),
            values: vec![1.0],
        };
        assert!(bad.expand(&base).is_err());
    }

    #[test]
    fn min_follow_updates_default_echo_ranges() {
        let cfg = ScenarioConfig::from_str_validated("min_follow_m = 7\n").unwrap();
        assert_eq!(cfg.bob_target_range, 7.0);
        assert_eq!(cfg.eve_target_range, 7.0);
        let pinned =
            ScenarioConfig::from_str_validated("min_follow_m = 7\nbob_target_range_m = 9\n")
                .unwrap();
        assert_eq!(pinned.bob_target_range, 9.0);
        assert_eq!(pinned.eve_target_range, 7.0);
    }
}
