//! Analytic-vs-Monte-Carlo comparison reports.
//!
//! One line per metric: analytic value, MC mean ± stderr, z-score, PASS/FAIL
//! at |z| ≤ 3. The secrecy outage probability is a sandwich test against
//! both bounds rather than a z-test, since the any-eve event has no closed
//! form of its own.

use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::montecarlo::{self, McMode, SopVariant, SrpInterference};
use crate::ScenarioConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricComparison {
    pub metric: String,
    pub analytic: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub z_score: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub trials: u64,
    pub seed: u64,
    pub rows: Vec<MetricComparison>,
    /// Any-eve estimate against [sop_lower − 3σ, sop_upper + 3σ].
    pub sop_sandwich_pass: bool,
    pub all_pass: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ValidateError {
    #[error("validation needs at least 10⁴ trials, got {0}")]
    TrialUnderflow(u64),
    #[error(transparent)]
    Analytic(#[from] analytic::AnalyticError),
    #[error(transparent)]
    Mc(#[from] montecarlo::McError),
}

/// Corruption hook for sensitivity checks: scales one analytic constant so a
/// healthy pipeline must FAIL. Never set on real runs.
#[derive(Debug, Clone, Copy, Default)]
pub struct CorruptionHook {
    /// Multiply the analytic COP by this factor before comparing.
    pub cop_scale: Option<f64>,
}

/// Run the full comparison at the config's operating power and initial
/// Alice–Bob spacing.
pub fn run_validation(
    cfg: &ScenarioConfig,
    trials: u64,
    seed: u64,
    hook: CorruptionHook,
) -> Result<ValidationReport, ValidateError> {
    if trials < 10_000 {
        return Err(ValidateError::TrialUnderflow(trials));
    }
    let p = cfg.comm.tx_power;
    let d = cfg.initial_positions.bob_x - cfg.initial_positions.alice_x;
    let sigma = cfg.radar.rcs_mean;

    let mut rows = Vec::new();

    let cop_analytic = {
        let v = analytic::cop_closed_form(cfg, p, d, sigma)?;
        hook.cop_scale.map_or(v, |s| (v * s).min(1.0))
    };
    let cop_mc = montecarlo::estimate_cop(cfg, p, d, trials, seed, McMode::DerivationMatched)?;
    rows.push(compare("cop", cop_analytic, cop_mc.mean, cop_mc.stderr));

    let srp_analytic = analytic::srp_closed_form(cfg)?;
    let srp_mc = montecarlo::estimate_srp(cfg, trials, seed.wrapping_add(1), SrpInterference::AtMean)?;
    rows.push(compare("srp", srp_analytic, srp_mc.mean, srp_mc.stderr));

    let sop_lower = analytic::sop_lower(cfg, p, sigma)?;
    let sop_upper = analytic::sop_upper(cfg, p, sigma)?;
    let near_mc = montecarlo::estimate_sop(cfg, p, trials, seed.wrapping_add(2), SopVariant::NearestEve)?;
    rows.push(compare(
        "sop_lower(nearest_eve)",
        sop_lower,
        near_mc.mean,
        near_mc.stderr,
    ));

    let any_mc = montecarlo::estimate_sop(cfg, p, trials, seed.wrapping_add(3), SopVariant::AnyEve)?;
    let sandwich =
        any_mc.mean >= sop_lower - 3.0 * any_mc.stderr && any_mc.mean <= sop_upper + 3.0 * any_mc.stderr;
    rows.push(MetricComparison {
        metric: "sop_any_eve_sandwich".into(),
        analytic: sop_upper,
        mc_mean: any_mc.mean,
        mc_stderr: any_mc.stderr,
        z_score: if any_mc.stderr > 0.0 {
            // Signed distance outside the band, in stderr units (0 inside).
            let below = (sop_lower - any_mc.mean) / any_mc.stderr;
            let above = (any_mc.mean - sop_upper) / any_mc.stderr;
            below.max(above).max(0.0)
        } else {
            0.0
        },
        pass: sandwich,
    });

    let all_pass = rows.iter().all(|r| r.pass);
    Ok(ValidationReport {
        trials,
        seed,
        rows,
        sop_sandwich_pass: sandwich,
        all_pass,
    })
}

fn compare(metric: &str, analytic: f64, mc_mean: f64, mc_stderr: f64) -> MetricComparison {
    let z = if mc_stderr > 0.0 {
        (mc_mean - analytic) / mc_stderr
    } else if (mc_mean - analytic).abs() < 1e-12 {
        0.0
    } else {
        f64::INFINITY
    };
    MetricComparison {
        metric: metric.into(),
        analytic,
        mc_mean,
        mc_stderr,
        z_score: z,
        pass: z.abs() <= 3.0,
    }
}

/// Plain-text rendering, stable across runs for a fixed config and seed.
pub fn render_report(report: &ValidationReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "validation: trials={} seed={}\n",
        report.trials, report.seed
    ));
    out.push_str("metric                    analytic        mc_mean         mc_stderr       z        result\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{:<25} {:<15.9e} {:<15.9e} {:<15.9e} {:<8.3} {}\n",
            row.metric,
            row.analytic,
            row.mc_mean,
            row.mc_stderr,
            row.z_score,
            if row.pass { "PASS" } else { "FAIL" }
        ));
    }
    out.push_str(&format!(
        "overall: {}\n",
        if report.all_pass { "PASS" } else { "FAIL" }
    ));
    out
}
