//! Worst-case secrecy rate maximization over the transmission window:
//! alternating per-slot power allocation and trajectory optimization.
//!
//! Rates inside the optimizer use the line-of-sight squared-distance model
//! (path-loss exponent 2, unit mean fading, perfect CSI), matching the
//! coefficient definitions
//!
//! ```text
//! s1[k] = h/((σ_b² + I_Bob[k])·d_ab²)    s3[k] = P[k]·h/(σ_b² + I_Bob[k])
//! s2[k] = h/((σ_e² + I_e[k])·d_ae²)      s4[k] = P[k]·h/(σ_e² + I_e[k])
//! ```
//!
//! while the probabilistic constraints (reliability, security, sensing) are
//! checked per iterate against the α = 4 closed forms, and the security cap
//! is enforced by bisecting a per-slot power ceiling. The loop is monotone:
//! each half-step provably never lowers the clamped objective, and a
//! numerical regression aborts the loop at the incumbent instead of
//! recording a decrease.

pub mod barrier;
pub mod power;
pub mod trajectory;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use power::{power_step, PowerMode, PowerStep};
pub use trajectory::{trajectory_step, SlotEnv, TrajectoryStep};

use crate::analytic;
use crate::geometry::{in_sensing_cone, Heading, RelativeOffset, Role, VehicleTrack};
use crate::scenario::ScenarioConfig;
use crate::window::TxWindow;

#[derive(Debug, Error)]
pub enum OptError {
    #[error("empty transmission window")]
    EmptyWindow,
    #[error("infeasible initial point: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Power(#[from] power::PowerError),
    #[error("trajectory subproblem failed: {0}")]
    Barrier(#[from] barrier::BarrierError),
    #[error(transparent)]
    Analytic(#[from] analytic::AnalyticError),
}

/// Per-slot link coefficients for the two subproblems.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SlotCoefficients {
    /// Bob link gain per watt over noise+interference.
    pub s1: f64,
    /// Eve analog of `s1`.
    pub s2: f64,
    /// Power-scaled Bob numerator.
    pub s3: f64,
    /// Power-scaled Eve numerator.
    pub s4: f64,
}

/// Which interference model the Eve sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMode {
    /// Proposed scheme: the Carol's sensing beam degrades the wiretap channel.
    SensingInterference,
    /// Traditional no-power-cost baseline: no protective interference at the
    /// Eve (its channel is clean), everything else identical.
    TraditionalNoPc,
}

#[derive(Debug, Clone)]
pub struct OptOptions {
    pub power_mode: PowerMode,
    pub baseline: BaselineMode,
    /// Convergence threshold τ_ε on the objective gain.
    pub tol: f64,
    /// Maximum alternating iterations I_max.
    pub max_iters: usize,
    pub sca_tol: f64,
    pub sca_max_iters: usize,
    /// Optional initial-speed jitter seed: different seeds start the
    /// alternation from slightly different (still feasible) trajectories.
    pub seed: Option<u64>,
}

impl Default for OptOptions {
    fn default() -> Self {
        OptOptions {
            power_mode: PowerMode::PerSlot,
            baseline: BaselineMode::SensingInterference,
            tol: 1e-4,
            max_iters: 30,
            sca_tol: 1e-7,
            sca_max_iters: 25,
            seed: None,
        }
    }
}

/// Constraint satisfaction at the returned iterate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub power_bounds: bool,
    pub speed: bool,
    pub accel: bool,
    pub spacing: bool,
    /// 1 − COP ≥ ζ_rel on every transmitting slot (α = 4 closed form).
    pub reliability: bool,
    /// sop_upper ≤ ζ_sec at the largest transmitting power.
    pub security: bool,
    /// srp ≥ ζ_sen (independent of the decision variables; reported).
    pub sensing: bool,
    /// Worst kinematic residual (m); negative means strictly feasible.
    pub kinematic_residual: f64,
}

/// Alternating-optimization trace and result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptRun {
    pub k_start: usize,
    pub k_end: usize,
    /// Transmit power per window slot (W).
    pub power: Vec<f64>,
    /// Alice x per window slot (m).
    pub trajectory: Vec<f64>,
    /// Clamped secrecy rate per window slot (bits/s/Hz).
    pub per_slot_secrecy: Vec<f64>,
    /// Objective value per iteration, index 0 = initial point.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub constraint_report: ConstraintReport,
    /// Reliability/sensing weight (1 − p_co)·p_sr applied to the mean rate.
    pub prefactor: f64,
    /// Worst budget-mode stationarity residual seen, if budget mode ran.
    pub budget_kkt_residual: Option<f64>,
    /// Worst trajectory-subproblem KKT residual seen.
    pub trajectory_kkt_residual: f64,
}

/// Fixed per-slot environment: everyone's positions and the interference
/// denominators, none of which depend on Alice's decision variables.
struct WindowEnv {
    n: usize,
    x_b: Vec<f64>,
    x_e: Vec<f64>,
    den_b: Vec<f64>,
    den_e: Vec<f64>,
    lane_width: f64,
}

const OPT_ALPHA: f64 = 2.0;

fn window_env(
    cfg: &ScenarioConfig,
    tracks: &[VehicleTrack],
    window: &TxWindow,
    baseline: BaselineMode,
) -> WindowEnv {
    let bob = tracks.iter().find(|t| t.role == Role::Bob).unwrap();
    let eve = tracks.iter().find(|t| t.role == Role::Eve).unwrap();
    let carol = tracks.iter().find(|t| t.role == Role::Carol).unwrap();
    let aea_s = cfg.radar.effective_aperture() * cfg.radar.unit_power_density();
    let n = window.k_end - window.k_start + 1;
    let mut x_b = Vec::with_capacity(n);
    let mut x_e = Vec::with_capacity(n);
    let mut den_b = Vec::with_capacity(n);
    let mut den_e = Vec::with_capacity(n);
    for kk in 0..n {
        let k = window.k_start + kk;
        x_b.push(bob.x[k]);
        x_e.push(eve.x[k]);
        let carol_pos = carol.position(k);
        // Unit-mean fading, quasi-static slot positions.
        let off_b = RelativeOffset::between(carol_pos, Heading::Backward, bob.position(k));
        let i_bob = if in_sensing_cone(off_b, &cfg.radar) {
            aea_s * off_b.distance().powf(-OPT_ALPHA)
        } else {
            0.0
        };
        let off_e = RelativeOffset::between(carol_pos, Heading::Backward, eve.position(k));
        let i_eve = if baseline == BaselineMode::SensingInterference
            && in_sensing_cone(off_e, &cfg.radar)
        {
            aea_s * off_e.distance().powf(-OPT_ALPHA)
        } else {
            0.0
        };
        den_b.push(cfg.comm.noise_bob + i_bob);
        den_e.push(cfg.comm.noise_eve + i_eve);
    }
    WindowEnv {
        n,
        x_b,
        x_e,
        den_b,
        den_e,
        lane_width: cfg.road.lane_width,
    }
}

fn coefficients(env: &WindowEnv, x: &[f64], power: &[f64]) -> Vec<SlotCoefficients> {
    let d2 = env.lane_width * env.lane_width;
    (0..env.n)
        .map(|k| {
            let dab2 = (x[k] - env.x_b[k]).powi(2);
            let dae2 = (x[k] - env.x_e[k]).powi(2) + d2;
            SlotCoefficients {
                s1: 1.0 / (env.den_b[k] * dab2),
                s2: 1.0 / (env.den_e[k] * dae2),
                s3: power[k] / env.den_b[k],
                s4: power[k] / env.den_e[k],
            }
        })
        .collect()
}

/// Clamped per-slot secrecy rates at (x, power).
fn slot_rates(env: &WindowEnv, x: &[f64], power: &[f64]) -> Vec<f64> {
    coefficients(env, x, power)
        .iter()
        .zip(power)
        .map(|(c, &p)| ((1.0 + c.s1 * p).log2() - (1.0 + c.s2 * p).log2()).max(0.0))
        .collect()
}

/// Largest per-slot power whose SOP upper bound clears the security
/// threshold; bisected because sop_upper is monotone increasing in power.
fn security_power_cap(cfg: &ScenarioConfig, p_max: f64) -> Result<f64, OptError> {
    let mut c4 = cfg.clone();
    c4.comm.path_loss_exp = 4.0;
    let sigma = cfg.radar.rcs_mean;
    let limit = cfg.thresholds.sec_max;
    if analytic::sop_upper(&c4, p_max, sigma)? <= limit {
        return Ok(p_max);
    }
    let mut lo = p_max * 1e-15;
    let mut hi = p_max;
    if analytic::sop_upper(&c4, lo, sigma)? > limit {
        return Ok(0.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if analytic::sop_upper(&c4, mid, sigma)? <= limit {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Zero out transmitting slots whose reliability constraint cannot hold at
/// the current spacing (the α = 4 COP form; a silent slot has no
/// reliability requirement).
fn enforce_reliability(
    cfg: &ScenarioConfig,
    env: &WindowEnv,
    x: &[f64],
    power: &mut [f64],
) -> Result<(), OptError> {
    let mut c4 = cfg.clone();
    c4.comm.path_loss_exp = 4.0;
    let sigma = cfg.radar.rcs_mean;
    for k in 0..env.n {
        if power[k] <= 0.0 {
            continue;
        }
        let d = (env.x_b[k] - x[k]).abs().max(1e-9);
        let cop = analytic::cop_closed_form(&c4, power[k], d, sigma)?;
        if 1.0 - cop < cfg.thresholds.rel_min {
            power[k] = 0.0;
        }
    }
    Ok(())
}

/// Deterministic tiny speed jitter in [−1%, +1%] from a seed.
fn jitter_fraction(seed: u64) -> f64 {
    // SplitMix64 finalizer.
    let mut z = seed.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    ((z as f64 / u64::MAX as f64) - 0.5) * 0.02
}

/// Maximize the reliability/sensing-weighted worst-case secrecy rate by
/// alternating the power and trajectory subproblems over the window.
pub fn alternating_optimize(
    cfg: &ScenarioConfig,
    tracks: &[VehicleTrack],
    window: &TxWindow,
    opts: &OptOptions,
) -> Result<OptRun, OptError> {
    if window.empty {
        return Err(OptError::EmptyWindow);
    }
    let env = window_env(cfg, tracks, window, opts.baseline);
    let n = env.n;
    let dt = cfg.dt();
    let n_total = cfg.road.num_slots as f64;

    // Initial trajectory: constant speed from the configured start, with an
    // optional per-seed jitter that stays inside the speed bound.
    let v0 = {
        let base = cfg.initial_speed;
        let v = match opts.seed {
            Some(s) => base * (1.0 + jitter_fraction(s)),
            None => base,
        };
        v.clamp(0.0, cfg.road.v_max)
    };
    let x_of = |k: usize| cfg.initial_positions.alice_x + v0 * dt * k as f64;
    let mut x: Vec<f64> = (0..n).map(|kk| x_of(window.k_start + kk)).collect();
    let anchor1 = x_of(window.k_start - 1);
    let anchor2 = cfg.initial_positions.alice_x + v0 * dt * (window.k_start as f64 - 2.0);

    // Initial feasibility: spacing must hold strictly along the window.
    for kk in 0..n {
        if env.x_b[kk] - x[kk] < cfg.road.min_follow - 1e-9 {
            return Err(OptError::Infeasible(format!(
                "initial spacing {} below min_follow at window slot {kk}",
                env.x_b[kk] - x[kk]
            )));
        }
    }

    // Prefactor and the security power ceiling come from the α = 4 forms.
    let prefactor = {
        let mut c4 = cfg.clone();
        c4.comm.path_loss_exp = 4.0;
        let d0 = cfg.initial_positions.bob_x - cfg.initial_positions.alice_x;
        let rep = analytic::evaluate(&c4, cfg.comm.tx_power, d0)?;
        (1.0 - rep.cop) * rep.srp
    };
    let p_cap = security_power_cap(cfg, cfg.comm.tx_power_max)?;

    let objective = |x: &[f64], power: &[f64]| -> f64 {
        let sum: f64 = slot_rates(&env, x, power).iter().sum();
        prefactor * sum / n_total
    };

    let mut power = vec![p_cap; n];
    enforce_reliability(cfg, &env, &x, &mut power)?;
    let mut trace = vec![objective(&x, &power)];
    let mut converged = false;
    let mut budget_kkt: Option<f64> = None;
    let mut traj_kkt = 0.0f64;
    let mut iterations = 0usize;

    for _ in 0..opts.max_iters {
        iterations += 1;
        let prev = *trace.last().unwrap();

        // P1: power at fixed trajectory.
        let coeffs = coefficients(&env, &x, &power);
        let mode = match opts.power_mode {
            PowerMode::PerSlot => PowerMode::PerSlot,
            PowerMode::Budget { total } => PowerMode::Budget {
                total: total.min(p_cap * n as f64),
            },
        };
        let step = power_step(&coeffs, p_cap, mode)?;
        let mut new_power = step.power;
        if let Some(l) = step.lambda {
            let _ = l;
            budget_kkt = Some(budget_kkt.unwrap_or(0.0).max(step.kkt_residual));
        }
        enforce_reliability(cfg, &env, &x, &mut new_power)?;

        // P2: trajectory at fixed power.
        let slot_env = SlotEnv {
            x_b: env.x_b.clone(),
            x_e: env.x_e.clone(),
            s3: (0..n).map(|k| new_power[k] / env.den_b[k]).collect(),
            s4: (0..n).map(|k| new_power[k] / env.den_e[k]).collect(),
            lane_width: env.lane_width,
            anchor1,
            anchor2,
            dt,
            v_max: cfg.road.v_max,
            a_max: cfg.road.a_max,
            d_foll: cfg.road.min_follow,
        };
        let traj = trajectory_step(&slot_env, &x, opts.sca_tol, opts.sca_max_iters)?;
        traj_kkt = traj_kkt.max(traj.kkt_residual);

        let candidate = objective(&traj.x, &new_power);
        if candidate < prev {
            // Numerical regression (constraint masks shifted): keep the
            // incumbent, declare convergence.
            converged = true;
            break;
        }
        x = traj.x;
        power = new_power;
        trace.push(candidate);
        if candidate - prev < opts.tol {
            converged = true;
            break;
        }
    }

    // Final constraint report.
    let sp = SlotEnv {
        x_b: env.x_b.clone(),
        x_e: env.x_e.clone(),
        s3: vec![0.0; n],
        s4: vec![0.0; n],
        lane_width: env.lane_width,
        anchor1,
        anchor2,
        dt,
        v_max: cfg.road.v_max,
        a_max: cfg.road.a_max,
        d_foll: cfg.road.min_follow,
    };
    let report = constraint_report(cfg, &env, &sp, &x, &power, anchor1, anchor2, dt)?;
    let per_slot = slot_rates(&env, &x, &power);

    Ok(OptRun {
        k_start: window.k_start,
        k_end: window.k_end,
        power,
        trajectory: x,
        per_slot_secrecy: per_slot,
        objective_trace: trace,
        iterations,
        converged,
        constraint_report: report,
        prefactor,
        budget_kkt_residual: budget_kkt,
        trajectory_kkt_residual: traj_kkt,
    })
}

#[allow(clippy::too_many_arguments)]
fn constraint_report(
    cfg: &ScenarioConfig,
    env: &WindowEnv,
    sp: &SlotEnv,
    x: &[f64],
    power: &[f64],
    anchor1: f64,
    anchor2: f64,
    dt: f64,
) -> Result<ConstraintReport, OptError> {
    let tol = 1e-9;
    let n = x.len();
    let vstep = cfg.road.v_max * dt;
    let astep = cfg.road.a_max * dt * dt;
    let mut speed_ok = true;
    let mut accel_ok = true;
    let mut spacing_ok = true;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..n {
        let prev = if k == 0 { anchor1 } else { x[k - 1] };
        let prev2 = if k == 0 {
            anchor2
        } else if k == 1 {
            anchor1
        } else {
            x[k - 2]
        };
        let sp_res = x[k] - (env.x_b[k] - cfg.road.min_follow);
        let v_res = (x[k] - prev).abs() - vstep;
        let a_res = (x[k] - 2.0 * prev + prev2).abs() - astep;
        spacing_ok &= sp_res <= tol;
        speed_ok &= v_res <= tol;
        accel_ok &= a_res <= tol;
        worst = worst.max(sp_res).max(v_res).max(a_res);
    }
    let _ = sp;
    let power_ok = power
        .iter()
        .all(|&p| (0.0..=cfg.comm.tx_power_max + 1e-12).contains(&p));

    let mut c4 = cfg.clone();
    c4.comm.path_loss_exp = 4.0;
    let sigma = cfg.radar.rcs_mean;
    let mut rel_ok = true;
    for k in 0..n {
        if power[k] > 0.0 {
            let d = (env.x_b[k] - x[k]).abs().max(1e-9);
            let cop = analytic::cop_closed_form(&c4, power[k], d, sigma)?;
            rel_ok &= 1.0 - cop >= cfg.thresholds.rel_min - 1e-12;
        }
    }
    let p_active = power.iter().cloned().fold(0.0f64, f64::max);
    let sec_ok = if p_active > 0.0 {
        analytic::sop_upper(&c4, p_active, sigma)? <= cfg.thresholds.sec_max + 1e-12
    } else {
        true
    };
    let sen_ok = analytic::srp_closed_form(&c4)? >= cfg.thresholds.sen_min;

    Ok(ConstraintReport {
        power_bounds: power_ok,
        speed: speed_ok,
        accel: accel_ok,
        spacing: spacing_ok,
        reliability: rel_ok,
        security: sec_ok,
        sensing: sen_ok,
        kinematic_residual: worst,
    })
}
