//! Per-slot transmit power allocation (subproblem P1).
//!
//! Each slot maximizes `log2(1 + s1·P) − log2(1 + s2·P)` over `[0, p_max]`.
//! The derivative has the sign of `s1 − s2`, so without a coupling
//! constraint the optimum is bang-bang: `p_max` where the legitimate channel
//! dominates, zero otherwise. Under a total-energy budget the Lagrangian
//! stationarity condition
//!
//! ```text
//! s1/(1 + s1·P) − s2/(1 + s2·P) = λ
//! ```
//!
//! has the closed-form root
//!
//! ```text
//! P(λ) = ½·[√((1/s1 − 1/s2)² + (4/λ)(1/s2 − 1/s1)) − (1/s1 + 1/s2)]
//! ```
//!
//! and λ is found by bisection on the monotone clamped sum Σ min(P(λ), p_max).

use thiserror::Error;

use super::SlotCoefficients;

#[derive(Debug, Error)]
pub enum PowerError {
    #[error("budget {budget} exceeds the window capacity {capacity}")]
    InfeasibleBudget { budget: f64, capacity: f64 },
    #[error("empty transmission window")]
    EmptyWindow,
}

/// Allocation mode for the power step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerMode {
    /// Independent slots: bang-bang at 0 or p_max.
    PerSlot,
    /// Total energy budget Σ P[k] ≤ total (watt-slots).
    Budget { total: f64 },
}

#[derive(Debug, Clone)]
pub struct PowerStep {
    pub power: Vec<f64>,
    /// Budget-mode multiplier, if one was active.
    pub lambda: Option<f64>,
    /// Worst stationarity residual |s1/(1+s1P) − s2/(1+s2P) − λ| over
    /// unclamped positive slots (0 when none).
    pub kkt_residual: f64,
}

/// Stationary power for multiplier `lambda` on a slot with `s1 > s2`.
fn stationary_power(s1: f64, s2: f64, lambda: f64) -> f64 {
    let a = 1.0 / s1;
    let b = 1.0 / s2;
    let disc = (a - b) * (a - b) + 4.0 / lambda * (b - a);
    (0.5 * (disc.sqrt() - (a + b))).max(0.0)
}

/// Solve P1 for the window's slot coefficients.
pub fn power_step(
    coeffs: &[SlotCoefficients],
    p_max: f64,
    mode: PowerMode,
) -> Result<PowerStep, PowerError> {
    if coeffs.is_empty() {
        return Err(PowerError::EmptyWindow);
    }
    let eligible: Vec<bool> = coeffs.iter().map(|c| c.s1 > c.s2).collect();
    match mode {
        PowerMode::PerSlot => {
            let power = eligible
                .iter()
                .map(|&e| if e { p_max } else { 0.0 })
                .collect();
            Ok(PowerStep {
                power,
                lambda: None,
                kkt_residual: 0.0,
            })
        }
        PowerMode::Budget { total } => {
            let capacity = p_max * coeffs.len() as f64;
            if total > capacity {
                return Err(PowerError::InfeasibleBudget {
                    budget: total,
                    capacity,
                });
            }
            let n_eligible = eligible.iter().filter(|&&e| e).count();
            let unconstrained_spend = p_max * n_eligible as f64;
            if total >= unconstrained_spend {
                // Budget not binding: the per-slot optimum already fits.
                let power = eligible
                    .iter()
                    .map(|&e| if e { p_max } else { 0.0 })
                    .collect();
                return Ok(PowerStep {
                    power,
                    lambda: None,
                    kkt_residual: 0.0,
                });
            }
            let clamped_sum = |lambda: f64| -> f64 {
                coeffs
                    .iter()
                    .zip(&eligible)
                    .map(|(c, &e)| {
                        if e {
                            stationary_power(c.s1, c.s2, lambda).min(p_max)
                        } else {
                            0.0
                        }
                    })
                    .sum()
            };
            // P(λ) → 0 as λ → max(s1 − s2); → caps as λ → 0.
            let mut hi = coeffs
                .iter()
                .zip(&eligible)
                .filter(|(_, &e)| e)
                .map(|(c, _)| c.s1 - c.s2)
                .fold(0.0f64, f64::max);
            let mut lo = hi * 1e-18;
            for _ in 0..20 {
                if clamped_sum(lo) >= total {
                    break;
                }
                lo *= 1e-3;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if clamped_sum(mid) > total {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let lambda = 0.5 * (lo + hi);
            let power: Vec<f64> = coeffs
                .iter()
                .zip(&eligible)
                .map(|(c, &e)| {
                    if e {
                        stationary_power(c.s1, c.s2, lambda).min(p_max)
                    } else {
                        0.0
                    }
                })
                .collect();
            let mut residual = 0.0f64;
            for (c, &p) in coeffs.iter().zip(&power) {
                if p > 0.0 && p < p_max {
                    let r = (c.s1 / (1.0 + c.s1 * p) - c.s2 / (1.0 + c.s2 * p) - lambda).abs();
                    residual = residual.max(r);
                }
            }
            Ok(PowerStep {
                power,
                lambda: Some(lambda),
                kkt_residual: residual,
            })
        }
    }
}
