//! Fading/RCS sampling, echo power, interference aggregation, SINR and the
//! reliability/sensing-weighted secrecy-rate objective.
//!
//! Small-scale fading is Rayleigh, so the power gain `h` is unit-mean
//! exponential. The radar cross section fluctuates chi-square with 2δ degrees
//! of freedom around its mean σ̄_av, i.e. σ ~ Gamma(δ, σ̄_av/δ); δ = 1 is the
//! classic exponential (Swerling-I) special case. Rates are log base 2
//! (bits/s/Hz) throughout.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::RelativeOffset;
use crate::scenario::RadarParams;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("range must be strictly positive, got {0}")]
    NonPositiveRange(f64),
    #[error("interferer at zero distance")]
    ZeroDistanceInterferer,
    #[error("rate vectors differ in length ({bob} vs {eve})")]
    RateLengthMismatch { bob: usize, eve: usize },
}

/// One Rayleigh fading draw: linear power gain, unit-mean exponential.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FadingDraw {
    pub h: f64,
}

impl FadingDraw {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        FadingDraw { h: rng.sample(Exp1) }
    }
}

/// One radar-cross-section draw (m²).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RcsDraw {
    pub sigma: f64,
}

impl RcsDraw {
    /// σ ~ Gamma(shape δ, scale σ̄_av/δ); mean σ̄_av, variance σ̄_av²/δ.
    pub fn sample<R: Rng + ?Sized>(radar: &RadarParams, rng: &mut R) -> Self {
        let g = Gamma::new(radar.rcs_dof, radar.rcs_mean / radar.rcs_dof)
            .expect("validated radar params give a well-formed Gamma");
        RcsDraw {
            sigma: g.sample(rng),
        }
    }
}

/// Decomposed link budget; `sinr = signal / (noise + echo_self + interference)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LinkBudget {
    pub sinr: f64,
    pub signal: f64,
    pub noise: f64,
    pub echo_self: f64,
    pub interference: f64,
}

/// Radar echo power from a target of cross section `sigma` at `range`:
/// `P_sen·G_t·G_r·λ_w²·σ / ((4π)³·range^(2α))`.
pub fn echo_power(
    radar: &RadarParams,
    sigma: f64,
    range: f64,
    alpha: f64,
) -> Result<f64, ChannelError> {
    if !(range > 0.0) {
        return Err(ChannelError::NonPositiveRange(range));
    }
    let four_pi = 4.0 * std::f64::consts::PI;
    Ok(radar.sense_power
        * radar.tx_gain
        * radar.rx_gain
        * radar.wavelength
        * radar.wavelength
        * sigma
        / (four_pi.powi(3) * range.powf(2.0 * alpha)))
}

/// Cumulative sensing interference from the supplied (already cone-filtered)
/// set: `Σ A_ea·S·h_i·‖(dx_i, dy_i)‖^(−α)`.
pub fn aggregate_interference(
    carols: &[(RelativeOffset, f64)],
    radar: &RadarParams,
    alpha: f64,
) -> Result<f64, ChannelError> {
    let aea_s = radar.effective_aperture() * radar.unit_power_density();
    let mut total = 0.0;
    for (off, h) in carols {
        let d = off.distance();
        if d == 0.0 {
            return Err(ChannelError::ZeroDistanceInterferer);
        }
        total += aea_s * h * d.powf(-alpha);
    }
    Ok(total)
}

/// Received SINR of a confidential link (Bob, or an Eve with its own noise,
/// echo and interference): `p·h·dist^(−α) / (noise + echo + interference)`.
pub fn sinr_bob(
    p_com: f64,
    fading: FadingDraw,
    dist: f64,
    alpha: f64,
    noise: f64,
    echo: f64,
    interference: f64,
) -> Result<LinkBudget, ChannelError> {
    if !(dist > 0.0) {
        return Err(ChannelError::NonPositiveRange(dist));
    }
    let signal = p_com * fading.h * dist.powf(-alpha);
    Ok(LinkBudget {
        sinr: signal / (noise + echo + interference),
        signal,
        noise,
        echo_self: echo,
        interference,
    })
}

/// Sensing SINR at Alice: own echo from the target at R_tar over noise plus
/// cumulative interference.
pub fn sinr_sense_alice(
    radar: &RadarParams,
    sigma: f64,
    alpha: f64,
    noise: f64,
    interference: f64,
) -> Result<f64, ChannelError> {
    let echo = echo_power(radar, sigma, radar.target_range, alpha)?;
    Ok(echo / (noise + interference))
}

/// Per-slot channel capacity `log2(1 + sinr)`.
pub fn rate(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}

/// Reliability- and sensing-weighted worst-case secrecy rate:
/// `(1−p_co)·p_sr·(1/N)·Σ_k [R_Bob[k] − max_e R_e[k]]⁺`.
///
/// `rates_eve_max[k]` is the best eavesdropper rate in slot k; slots where it
/// matches or beats Bob contribute zero (no transmission there).
pub fn trsa_sr(
    p_co: f64,
    p_sr: f64,
    rates_bob: &[f64],
    rates_eve_max: &[f64],
) -> Result<f64, ChannelError> {
    if rates_bob.len() != rates_eve_max.len() {
        return Err(ChannelError::RateLengthMismatch {
            bob: rates_bob.len(),
            eve: rates_eve_max.len(),
        });
    }
    let n = rates_bob.len().max(1) as f64;
    let sum: f64 = rates_bob
        .iter()
        .zip(rates_eve_max)
        .map(|(rb, re)| (rb - re).max(0.0))
        .sum();
    Ok((1.0 - p_co) * p_sr * sum / n)
}
