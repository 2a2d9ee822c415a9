//! Closed-form metric engine: connection outage probability, secrecy outage
//! probability bounds, success ranging probability, and the interference
//! constant C(α).
//!
//! The closed forms exist only at path-loss exponent α = 4 (the one case
//! where the plane integrals collapse to elementary functions), so every
//! entry point guards α and other exponents must go through the
//! [`crate::montecarlo`] engine instead.
//!
//! The SOP bounds multiply `exp(z²)` by `Erfc(z)`; evaluated separately the
//! pair overflows/underflows long before the parameter ranges of interest,
//! so both bounds are computed through the scaled complementary error
//! function [`crate::special::erfcx`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::echo_power;
use crate::scenario::{param_digest, ScenarioConfig, Thresholds};
use crate::special::{erfcx, gamma, gamma_q};

#[derive(Debug, Error)]
pub enum AnalyticError {
    #[error("closed forms require path-loss exponent α = 4, got {0}")]
    AlphaNotFour(f64),
    #[error("interference constant requires α > 2, got {0} (Γ(1−2/α) pole)")]
    AlphaAtPole(f64),
    #[error("transmit power must be strictly positive, got {0}")]
    NonPositivePower(f64),
    #[error(transparent)]
    Channel(#[from] crate::channel::ChannelError),
}

/// Analytic metric values for one parameter point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub cop: f64,
    pub sop_upper: f64,
    pub sop_lower: f64,
    pub srp: f64,
    pub trsa_sr: Option<f64>,
    /// FNV-1a digest of the inputs that produced this row.
    pub inputs_hash: String,
}

fn require_alpha4(alpha: f64) -> Result<(), AnalyticError> {
    if (alpha - 4.0).abs() > 1e-9 {
        return Err(AnalyticError::AlphaNotFour(alpha));
    }
    Ok(())
}

/// Interference constant `C(α) = Γ(1 + 2/α)·Γ(1 − 2/α)`, the Rayleigh-fading
/// moment factor of the plane-interference Laplace functional. Has a pole at
/// α = 2; `C(4) = π/2`.
pub fn interference_constant(alpha: f64) -> Result<f64, AnalyticError> {
    if alpha <= 2.0 {
        return Err(AnalyticError::AlphaAtPole(alpha));
    }
    Ok(gamma(1.0 + 2.0 / alpha) * gamma(1.0 - 2.0 / alpha))
}

/// Connection outage probability at Bob for α = 4:
///
/// ```text
/// 1 − exp[ −π·λ_i·√(β_b·A_ea·S/p)·d²·C(4) − (β_b/p)·(σ_b² + P_echo)·d⁴ ]
/// ```
///
/// with `P_echo` Bob's self-echo at his configured target range (exponent 8).
pub fn cop_closed_form(
    cfg: &ScenarioConfig,
    p_com: f64,
    dist_ab: f64,
    sigma_bob: f64,
) -> Result<f64, AnalyticError> {
    require_alpha4(cfg.comm.path_loss_exp)?;
    if !(p_com > 0.0) {
        return Err(AnalyticError::NonPositivePower(p_com));
    }
    let r = &cfg.radar;
    let beta = cfg.comm.thresh_bob;
    let aea_s = r.effective_aperture() * r.unit_power_density();
    let echo = echo_power(r, sigma_bob, cfg.bob_target_range, 4.0)?;
    let c4 = interference_constant(4.0)?;
    let interf_term = std::f64::consts::PI
        * cfg.road.carol_density
        * (beta * aea_s / p_com).sqrt()
        * dist_ab
        * dist_ab
        * c4;
    let noise_term = beta / p_com * (cfg.comm.noise_bob + echo) * dist_ab.powi(4);
    Ok(-(-(interf_term + noise_term)).exp_m1())
}

/// The two SOP-bound building blocks shared by both bounds:
/// `b = (β_e/p)(σ_e² + P_echo)` and the prefactor `λ_e·π^{3/2}/(2√b)`.
fn sop_parts(cfg: &ScenarioConfig, p_com: f64, sigma_eve: f64) -> Result<(f64, f64), AnalyticError> {
    let echo = echo_power(&cfg.radar, sigma_eve, cfg.eve_target_range, 4.0)?;
    let b = cfg.comm.thresh_eve / p_com * (cfg.comm.noise_eve + echo);
    let prefactor = cfg.road.eve_density * std::f64::consts::PI.powf(1.5) / (2.0 * b.sqrt());
    Ok((b, prefactor))
}

/// Upper bound of the secrecy outage probability (α = 4), from averaging the
/// interference functional over the Carol field before the Eve-field
/// expectation:
///
/// ```text
/// 1 − exp[ −(λ_e·π^{3/2}/(2√b)) · exp(z²)·Erfc(z) ],
///     z = π·λ_i·C(4)·√(A_ea·S/(4(σ_e² + P_echo)))
/// ```
pub fn sop_upper(cfg: &ScenarioConfig, p_com: f64, sigma_eve: f64) -> Result<f64, AnalyticError> {
    require_alpha4(cfg.comm.path_loss_exp)?;
    if !(p_com > 0.0) {
        return Err(AnalyticError::NonPositivePower(p_com));
    }
    if cfg.road.eve_density == 0.0 {
        return Ok(0.0);
    }
    let r = &cfg.radar;
    let aea_s = r.effective_aperture() * r.unit_power_density();
    let (b, prefactor) = sop_parts(cfg, p_com, sigma_eve)?;
    let c4 = interference_constant(4.0)?;
    // z = a/(2√b) with a = π·λ_i·C(4)·√(β_e·A_ea·S/p); the β_e/p factors cancel.
    let a = std::f64::consts::PI
        * cfg.road.carol_density
        * c4
        * (cfg.comm.thresh_eve * aea_s / p_com).sqrt();
    let z = a / (2.0 * b.sqrt());
    Ok(-(-prefactor * erfcx(z)).exp_m1())
}

/// Lower bound of the secrecy outage probability (α = 4): the success
/// probability of the nearest Eve under the nearest-receiver model, whose
/// distance density `2πλ_e·r·exp(−πλ_e·r²)` adds `π·λ_e` to the Gaussian
/// exponent:
///
/// ```text
/// (λ_e·π^{3/2}/(2√b)) · exp(z²)·Erfc(z),
///     z = π·(λ_i·C(4)·√(β_e·A_ea·S/p) + λ_e) / (2√b)
/// ```
pub fn sop_lower(cfg: &ScenarioConfig, p_com: f64, sigma_eve: f64) -> Result<f64, AnalyticError> {
    require_alpha4(cfg.comm.path_loss_exp)?;
    if !(p_com > 0.0) {
        return Err(AnalyticError::NonPositivePower(p_com));
    }
    if cfg.road.eve_density == 0.0 {
        return Ok(0.0);
    }
    let r = &cfg.radar;
    let aea_s = r.effective_aperture() * r.unit_power_density();
    let (b, prefactor) = sop_parts(cfg, p_com, sigma_eve)?;
    let c4 = interference_constant(4.0)?;
    let a = std::f64::consts::PI
        * (cfg.road.carol_density * c4 * (cfg.comm.thresh_eve * aea_s / p_com).sqrt()
            + cfg.road.eve_density);
    let z = a / (2.0 * b.sqrt());
    Ok(prefactor * erfcx(z))
}

/// Expected lane interference at Alice, `λ_i·A_ea·S/(α−1)·(2·D_lane)^(1−α)`:
/// the mean of the line-process interference beyond the two-lane offset.
pub fn mean_alice_interference(cfg: &ScenarioConfig, alpha: f64) -> f64 {
    let r = &cfg.radar;
    cfg.road.carol_density * r.effective_aperture() * r.unit_power_density() / (alpha - 1.0)
        * (2.0 * cfg.road.lane_width).powf(1.0 - alpha)
}

/// Success ranging probability at Alice (α = 4):
///
/// ```text
/// Γ(δ, (δ/σ̄_av)·η·R_tar⁸·(σ_a² + E[I_Alice])) / Γ(δ),
///     η = (4π)³·β_s/(P_sen·G_t·G_r·λ_w²)
/// ```
///
/// with the interference taken at its mean `E[I_Alice] =
/// (λ_i·A_ea·S/3)·(2·D_lane)⁻³`.
pub fn srp_closed_form(cfg: &ScenarioConfig) -> Result<f64, AnalyticError> {
    require_alpha4(cfg.comm.path_loss_exp)?;
    let r = &cfg.radar;
    let four_pi = 4.0 * std::f64::consts::PI;
    let eta = four_pi.powi(3) * cfg.comm.thresh_sense
        / (r.sense_power * r.tx_gain * r.rx_gain * r.wavelength * r.wavelength);
    let mean_interf = mean_alice_interference(cfg, 4.0);
    let x = r.rcs_dof / r.rcs_mean
        * eta
        * r.target_range.powi(8)
        * (cfg.comm.noise_alice + mean_interf);
    Ok(gamma_q(r.rcs_dof, x))
}

/// Reliability constraint: `1 − cop ≥ ζ_rel`.
pub fn cop_constraint_ok(report: &MetricReport, th: &Thresholds) -> bool {
    1.0 - report.cop >= th.rel_min
}

/// Security constraint, conservatively on the upper bound: `sop_upper ≤ ζ_sec`.
pub fn sop_constraint_ok(report: &MetricReport, th: &Thresholds) -> bool {
    report.sop_upper <= th.sec_max
}

/// Sensing constraint: `srp ≥ ζ_sen`.
pub fn srp_constraint_ok(report: &MetricReport, th: &Thresholds) -> bool {
    report.srp >= th.sen_min
}

/// Evaluate all closed-form metrics at one parameter point. Self-echo cross
/// sections sit at the configured mean RCS; the Alice–Bob distance defaults
/// to the initial spacing.
pub fn evaluate(cfg: &ScenarioConfig, p_com: f64, dist_ab: f64) -> Result<MetricReport, AnalyticError> {
    let sigma = cfg.radar.rcs_mean;
    let cop = cop_closed_form(cfg, p_com, dist_ab, sigma)?;
    let up = sop_upper(cfg, p_com, sigma)?;
    let lo = sop_lower(cfg, p_com, sigma)?;
    let srp = srp_closed_form(cfg)?;
    let digest = param_digest(&[
        p_com,
        dist_ab,
        sigma,
        cfg.comm.noise_bob,
        cfg.comm.noise_eve,
        cfg.comm.noise_alice,
        cfg.road.carol_density,
        cfg.road.eve_density,
        cfg.comm.thresh_bob,
        cfg.comm.thresh_eve,
        cfg.comm.thresh_sense,
    ]);
    Ok(MetricReport {
        cop,
        sop_upper: up,
        sop_lower: lo,
        srp,
        trsa_sr: None,
        inputs_hash: format!("{digest:016x}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig::default()
    }

    #[test]
    fn interference_constant_values() {
        assert!((interference_constant(4.0).unwrap() - PI / 2.0).abs() < 1e-12);
        // Γ(5/3)·Γ(1/3), numeric.
        assert!((interference_constant(3.0).unwrap() - 2.4183991523122903).abs() < 1e-12);
        assert!(interference_constant(2.0).is_err());
        assert!(interference_constant(1.5).is_err());
    }

    #[test]
    fn cop_degenerate_and_limits() {
        let mut c = cfg();
        c.road.carol_density = 0.0;
        c.comm.noise_bob = 1e-300;
        // Suppress the self-echo by a vanishing cross section.
        let cop = cop_closed_form(&c, 0.01, 5.0, 0.0).unwrap();
        assert!(cop < 1e-250, "cop {cop}");
        // p → ∞ drives COP to 0.
        let c = cfg();
        let lo = cop_closed_form(&c, 1e12, 5.0, 1.0).unwrap();
        assert!(lo < 1e-5);
        let hi = cop_closed_form(&c, 1e-9, 5.0, 1.0).unwrap();
        assert!(hi > 0.999);
        assert!(cop_closed_form(&c, 0.0, 5.0, 1.0).is_err());
        let mut c2 = cfg();
        c2.comm.path_loss_exp = 3.0;
        assert!(cop_closed_form(&c2, 0.01, 5.0, 1.0).is_err());
    }

    #[test]
    fn cop_reference_value() {
        // Frozen from an independent high-precision evaluation of the α = 4
        // closed form at the default point (p = 10 dBm, d = 5 m, echo range
        // 5 m, σ = 1).
        let c = cfg();
        let cop = cop_closed_form(&c, 0.01, 5.0, 1.0).unwrap();
        assert!(
            ((cop - 0.7056664566055531) / cop).abs() < 1e-12,
            "cop {cop}"
        );
    }

    #[test]
    fn sop_bounds_reference_and_ordering() {
        let c = cfg();
        // Frozen from quadrature of the underlying radial integrals
        // (2πλ_e ∫ exp(−a·r² − b·r⁴)·r dr) at the default point (Eve
        // self-echo at the 5 m following distance).
        let up = sop_upper(&c, 0.01, 1.0).unwrap();
        let lo = sop_lower(&c, 0.01, 1.0).unwrap();
        assert!(((up - 0.006362902547674948) / up).abs() < 1e-12, "up {up}");
        assert!(((lo - 0.006343354909486224) / lo).abs() < 1e-12, "lo {lo}");
        assert!(lo <= up);
    }

    #[test]
    fn sop_degenerate_and_limits() {
        let mut c = cfg();
        c.road.eve_density = 0.0;
        assert_eq!(sop_upper(&c, 0.01, 1.0).unwrap(), 0.0);
        assert_eq!(sop_lower(&c, 0.01, 1.0).unwrap(), 0.0);
        let mut c = cfg();
        c.comm.thresh_eve = 1e18;
        assert!(sop_upper(&c, 0.01, 1.0).unwrap() < 1e-6);
        // λ_e → ∞: a nearby Eve almost surely exists, the nearest-Eve
        // success probability tends to 1.
        let mut c = cfg();
        c.road.eve_density = 1e9;
        let lo = sop_lower(&c, 0.01, 1.0).unwrap();
        assert!(lo > 0.999 && lo <= 1.0 + 1e-9, "lo {lo}");
    }

    #[test]
    fn sop_bound_ordering_grid() {
        // sop_lower ≤ sop_upper across a 10×10×10 grid over (p, λ_e, λ_i).
        let mut worst = 0.0f64;
        for ip in 0..10 {
            for ie in 0..10 {
                for ii in 0..10 {
                    let p = 1e-3 * 10f64.powf(ip as f64 / 3.0);
                    let mut c = cfg();
                    c.road.eve_density = 1e-6 * 10f64.powf(ie as f64 / 3.0);
                    c.road.carol_density = 1e-5 * 10f64.powf(ii as f64 / 3.0);
                    let up = sop_upper(&c, p, 1.0).unwrap();
                    let lo = sop_lower(&c, p, 1.0).unwrap();
                    assert!(
                        lo <= up + 1e-15,
                        "ordering violated at p={p}, λ_e={}, λ_i={}: {lo} > {up}",
                        c.road.eve_density,
                        c.road.carol_density
                    );
                    for v in [up, lo] {
                        assert!((-1e-9..=1.0 + 1e-9).contains(&v), "out of [0,1]: {v}");
                    }
                    worst = worst.max(lo - up);
                }
            }
        }
        assert!(worst <= 1e-15);
    }

    #[test]
    fn srp_reference_and_limits() {
        let c = cfg();
        // Frozen from an independent evaluation at the default point
        // (β_s = 1e-4, R_tar = 10, δ = 2, σ̄ = 1, λ_i = 0.001).
        let srp = srp_closed_form(&c).unwrap();
        assert!(((srp - 0.9782809043619284) / srp).abs() < 1e-12, "srp {srp}");
        // β_s = 0: always detect.
        let mut c0 = cfg();
        c0.comm.thresh_sense = 0.0;
        assert_eq!(srp_closed_form(&c0).unwrap(), 1.0);
        // Enormous noise: never detect.
        let mut cn = cfg();
        cn.comm.noise_alice = 1e12;
        assert!(srp_closed_form(&cn).unwrap() < 1e-12);
    }

    #[test]
    fn cop_monotonicity() {
        let c = cfg();
        // Nondecreasing in noise.
        let mut last = -1.0;
        for i in 0..6 {
            let mut ci = c.clone();
            ci.comm.noise_bob = 1e-12 * 10f64.powi(i);
            let v = cop_closed_form(&ci, 0.01, 5.0, 1.0).unwrap();
            assert!(v >= last);
            last = v;
        }
        // Nondecreasing in λ_i, β_b and d; nonincreasing in p.
        let mut last = -1.0;
        for i in 0..6 {
            let mut ci = c.clone();
            ci.road.carol_density = 1e-5 * 10f64.powi(i);
            let v = cop_closed_form(&ci, 0.01, 5.0, 1.0).unwrap();
            assert!(v >= last);
            last = v;
        }
        let mut last = 2.0;
        for i in 0..6 {
            let v = cop_closed_form(&c, 1e-3 * 10f64.powi(i), 5.0, 1.0).unwrap();
            assert!(v <= last);
            last = v;
        }
        let mut last = -1.0;
        for d in [2.0, 4.0, 6.0, 8.0, 10.0] {
            let v = cop_closed_form(&c, 0.01, d, 1.0).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn constraint_checks() {
        let th = Thresholds {
            rel_min: 0.9,
            sec_max: 0.1,
            sen_min: 0.9,
        };
        let mut rep = MetricReport {
            cop: 0.0,
            sop_upper: 0.2,
            sop_lower: 0.1,
            srp: 0.9,
            trsa_sr: None,
            inputs_hash: String::new(),
        };
        assert!(cop_constraint_ok(&rep, &th));
        assert!(!sop_constraint_ok(&rep, &th));
        // Closed inequality: equality passes.
        assert!(srp_constraint_ok(&rep, &th));
        rep.cop = 0.2;
        assert!(!cop_constraint_ok(&rep, &th));
    }
}
