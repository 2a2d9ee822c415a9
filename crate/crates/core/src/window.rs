//! Earliest and latest confidential-transmission slots.
//!
//! The Eve is protected only while the Carol's sensing beam covers it, so
//! Alice may transmit in slot k only if her signal reaches the Eve while a
//! sensing signal does. Coverage is bracketed by two closing-gap events on
//! the Carol–Eve longitudinal gap g(t) = g(0) − 2vt:
//!
//! - coverage begins when the Carol-at-emission → Eve-at-arrival offset
//!   equals the far bound √(R_max² − D_lane²) (sensing range R_max, delay
//!   R_max/c), and
//! - ends when it equals the near bound D_lane/tan(θ/2) (range
//!   D_lane/sin(θ/2)).
//!
//! Carol emission instants convert to Eve arrival instants through the
//! sensing propagation delay, and to Alice emission instants by subtracting
//! the Alice→Eve communication delay; slot quantization is conservative
//! (ceil at the start, floor at the end) so the Eve is covered throughout
//! the reported window.
//!
//! The per-instant delays come from solving the propagation quadratic
//! `‖rx(t_emit + τ) − tx(t_emit)‖ = c·τ` exactly, never from precomputed
//! slot formulas.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::VehicleTrack;
use crate::scenario::ScenarioConfig;

#[derive(Debug, Error)]
pub enum WindowError {
    #[error("propagation speed {c} must exceed receiver speed {v}")]
    SpeedOrder { c: f64, v: f64 },
    #[error("no positive propagation root (degenerate geometry)")]
    NoPositiveRoot,
    #[error("cone geometry cannot cover the Eve lane (R_max {rmax} vs lateral {lateral})")]
    ConeCannotReach { rmax: f64, lateral: f64 },
}

/// The feasible confidential-transmission window, in slots and in the
/// underlying continuous instants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TxWindow {
    /// First feasible transmission slot (slot k emits at k·Δt).
    pub k_start: usize,
    /// Last feasible transmission slot.
    pub k_end: usize,
    /// Carol emission instant opening coverage (s).
    pub t_carol_first: f64,
    /// Carol emission instant closing coverage (s).
    pub t_carol_last: f64,
    /// Eve arrival instant of the first covering sensing signal (s).
    pub t_eve_first: f64,
    /// Eve arrival instant of the last covering sensing signal (s).
    pub t_eve_last: f64,
    pub empty: bool,
}

/// Delay τ > 0 for a signal emitted at `t_emit` from `tx_pos` to catch the
/// (moving) receiver: solves `‖rx(t_emit + τ) − tx_pos‖ = c·τ`.
pub fn propagation_delay(
    tx_pos: (f64, f64),
    rx_track: &VehicleTrack,
    t_emit: f64,
    c: f64,
    dt: f64,
) -> Result<f64, WindowError> {
    let (rx_x, rx_y) = rx_track.position_at(t_emit, dt);
    let vx = rx_track.velocity_at(t_emit, dt);
    delay_from_state((rx_x - tx_pos.0, rx_y - tx_pos.1), vx, c)
}

/// Emission instant for a signal from the (moving) transmitter that arrives
/// at `rx_pos` at `t_arrive`: solves `‖rx_pos − tx(t_arrive − τ)‖ = c·τ` and
/// returns `t_arrive − τ`.
pub fn emission_instant(
    tx_track: &VehicleTrack,
    rx_pos: (f64, f64),
    t_arrive: f64,
    c: f64,
    dt: f64,
) -> Result<f64, WindowError> {
    let (tx_x, tx_y) = tx_track.position_at(t_arrive, dt);
    let vx = tx_track.velocity_at(t_arrive, dt);
    // Walking the transmitter backwards by τ flips its velocity sign in the
    // gap equation, which is the same quadratic with v ↦ −(−v) on the rx
    // side; reuse it with the relative geometry swapped.
    let tau = delay_from_state((rx_pos.0 - tx_x, rx_pos.1 - tx_y), vx, c)?;
    Ok(t_arrive - tau)
}

/// Positive root of `‖d + v·τ‖ = c·τ` for planar offset `d` and x-velocity v:
/// `τ = (v·dx + √((v·dx)² + (c² − v²)‖d‖²)) / (c² − v²)`.
fn delay_from_state(d: (f64, f64), vx: f64, c: f64) -> Result<f64, WindowError> {
    if c <= vx.abs() {
        return Err(WindowError::SpeedOrder { c, v: vx.abs() });
    }
    let dist2 = d.0 * d.0 + d.1 * d.1;
    let vd = vx * d.0;
    let disc = vd * vd + (c * c - vx * vx) * dist2;
    if disc < 0.0 {
        return Err(WindowError::NoPositiveRoot);
    }
    let tau = (vd + disc.sqrt()) / (c * c - vx * vx);
    if !tau.is_finite() || tau < 0.0 {
        return Err(WindowError::NoPositiveRoot);
    }
    Ok(tau)
}

/// Compute the transmission window for the single-Carol, single-Eve scenario
/// at constant initial speeds. An empty window (coverage never opens inside
/// the horizon, or the gap already shut) is a normal result, not an error.
pub fn compute_window(cfg: &ScenarioConfig, tracks: &[VehicleTrack]) -> Result<TxWindow, WindowError> {
    use crate::geometry::Role;
    let eve = tracks
        .iter()
        .find(|t| t.role == Role::Eve)
        .expect("tracks must include the Eve");
    let carol = tracks
        .iter()
        .find(|t| t.role == Role::Carol)
        .expect("tracks must include the Carol");
    let alice = tracks
        .iter()
        .find(|t| t.role == Role::Alice)
        .expect("tracks must include Alice");

    let c = cfg.comm.propagation_speed;
    let v = cfg.initial_speed;
    if c <= v {
        return Err(WindowError::SpeedOrder { c, v });
    }
    let lateral = (carol.y - eve.y).abs();
    let rmax = cfg.radar.max_range;
    if rmax <= lateral {
        return Err(WindowError::ConeCannotReach { rmax, lateral });
    }
    let far = (rmax * rmax - lateral * lateral).sqrt();
    let near = lateral / cfg.radar.cone_half_angle.tan();
    let dt = cfg.dt();
    let n = cfg.road.num_slots;

    let empty_window = |t_c_first: f64, t_c_last: f64, t_e_first: f64, t_e_last: f64| TxWindow {
        k_start: 0,
        k_end: 0,
        t_carol_first: t_c_first,
        t_carol_last: t_c_last,
        t_eve_first: t_e_first,
        t_eve_last: t_e_last,
        empty: true,
    };

    if near > far {
        // The beam is too narrow to ever reach the Eve lane inside range.
        return Ok(empty_window(f64::NAN, f64::NAN, f64::NAN, f64::NAN));
    }

    // Closing gap: g(t) = g(0) − 2vt (Carol drives −x, Eve +x).
    let gap0 = carol.x[0] - eve.x[0];
    let closing = 2.0 * v;
    // Sensing delays at the two bracketing offsets: range R_max at the far
    // bound, D_lane/sin(θ/2) at the near bound.
    let range_far = rmax;
    let range_near = (near * near + lateral * lateral).sqrt();
    let t_sen_far = range_far / c;
    let t_sen_near = range_near / c;

    // Coverage opens/closes when the emission gap equals bound + v·delay
    // (the Eve advances v·τ while the signal flies).
    let t_c_first = (gap0 - far - v * t_sen_far) / closing;
    let t_c_last = (gap0 - near - v * t_sen_near) / closing;
    let t_e_first = t_c_first + t_sen_far;
    let t_e_last = t_c_last + t_sen_near;

    if t_c_last < 0.0 {
        // Gap already inside the near bound at t = 0: coverage has passed.
        return Ok(empty_window(t_c_first, t_c_last, t_e_first, t_e_last));
    }

    // Alice→Eve communication delay; constant while both hold speed v.
    let t_com = {
        let gap_ae = eve.x[0] - alice.x[0];
        delay_from_state((gap_ae, (eve.y - alice.y).abs()), v, c)?
    };
    let t_a_first = t_e_first - t_com;
    let t_a_last = t_e_last - t_com;

    // Conservative slot quantization; slot k emits at k·Δt, slots run 1..=N.
    let k_start = (t_a_first / dt).ceil().max(1.0) as usize;
    let k_end_f = (t_a_last / dt).floor();
    if k_end_f < k_start as f64 || k_start > n {
        return Ok(empty_window(t_c_first, t_c_last, t_e_first, t_e_last));
    }
    let k_end = (k_end_f as usize).min(n);

    Ok(TxWindow {
        k_start,
        k_end,
        t_carol_first: t_c_first,
        t_carol_last: t_c_last,
        t_eve_first: t_e_first,
        t_eve_last: t_e_last,
        empty: false,
    })
}

/// Replay check for one Alice slot: emit at `k·Δt`, propagate to the Eve,
/// and test whether the Eve at that arrival instant sits inside the cone of
/// the Carol emission that reaches it at the same moment.
pub fn slot_covered_at_arrival(
    cfg: &ScenarioConfig,
    tracks: &[VehicleTrack],
    k: usize,
) -> Result<bool, WindowError> {
    use crate::geometry::{in_sensing_cone, Role};
    let eve = tracks.iter().find(|t| t.role == Role::Eve).unwrap();
    let carol = tracks.iter().find(|t| t.role == Role::Carol).unwrap();
    let alice = tracks.iter().find(|t| t.role == Role::Alice).unwrap();
    let c = cfg.comm.propagation_speed;
    let dt = cfg.dt();

    let t_emit = k as f64 * dt;
    let tau_com = propagation_delay(alice.position_at(t_emit, dt), eve, t_emit, c, dt)?;
    let t_arrive = t_emit + tau_com;
    let eve_pos = eve.position_at(t_arrive, dt);
    // Which Carol emission reaches the Eve exactly at t_arrive?
    let t_carol_emit = emission_instant(carol, eve_pos, t_arrive, c, dt)?;
    let carol_pos = carol.position_at(t_carol_emit, dt);
    let off = crate::geometry::RelativeOffset::between(carol_pos, carol.heading, eve_pos);
    Ok(in_sensing_cone(off, &cfg.radar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Heading, Role, VehicleTrack};
    use crate::scenario::ScenarioConfig;

    fn tracks_for(cfg: &ScenarioConfig) -> Vec<VehicleTrack> {
        let dt = cfg.dt();
        let n = cfg.road.num_slots;
        let v = cfg.initial_speed;
        [Role::Alice, Role::Bob, Role::Eve, Role::Carol]
            .into_iter()
            .map(|role| {
                let (x0, y) = cfg.initial_position(role);
                let heading = if role == Role::Carol {
                    Heading::Backward
                } else {
                    Heading::Forward
                };
                VehicleTrack::constant_speed(role, x0, y, v, heading, n, dt)
            })
            .collect()
    }

    #[test]
    fn stationary_receiver_delay() {
        let cfg = ScenarioConfig::default();
        let dt = cfg.dt();
        let rx = VehicleTrack::constant_speed(Role::Eve, 10.0, 0.0, 0.0, Heading::Forward, 10, dt);
        let tau = propagation_delay((0.0, 0.0), &rx, 0.0, 2.998e8, dt).unwrap();
        assert!(((tau - 10.0 / 2.998e8) / tau).abs() < 1e-12);
    }

    #[test]
    fn moving_receiver_delay_satisfies_equation() {
        let cfg = ScenarioConfig::default();
        let dt = cfg.dt();
        let c = 3e8;
        let rx = VehicleTrack::constant_speed(Role::Eve, 9.0, 3.6, 16.0, Heading::Forward, 10, dt);
        let tau = propagation_delay((0.0, 0.0), &rx, 0.0, c, dt).unwrap();
        // Defining equation holds to 1e-9 relative.
        let pos = rx.position_at(tau, dt);
        let dist = (pos.0.powi(2) + pos.1.powi(2)).sqrt();
        assert!(((dist - c * tau) / (c * tau)).abs() < 1e-9);
        // Motion correction versus d/c is far below 1e-12 relative at v = 16.
        let d0 = (9.0f64.powi(2) + 3.6f64.powi(2)).sqrt();
        assert!(((tau - d0 / c) / tau).abs() < 1e-6);
    }

    #[test]
    fn superluminal_receiver_rejected() {
        let cfg = ScenarioConfig::default();
        let dt = cfg.dt();
        let rx = VehicleTrack::constant_speed(Role::Eve, 10.0, 0.0, 20.0, Heading::Forward, 10, dt);
        assert!(propagation_delay((0.0, 0.0), &rx, 0.0, 19.0, dt).is_err());
    }

    #[test]
    fn window_reference_scenario() {
        // 500 m initial Carol–Eve gap closing at 32 m/s: coverage opens at
        // ≈ 9.376 s and shuts at ≈ 15.430 s (near bound 6.235 m).
        let mut cfg = ScenarioConfig::default();
        cfg.initial_positions.carol_x = 505.0;
        cfg.initial_positions.eve_x = 5.0;
        cfg.road.horizon = 20.0;
        cfg.road.num_slots = 200;
        let tracks = tracks_for(&cfg);
        let w = compute_window(&cfg, &tracks).unwrap();
        assert!(!w.empty);
        assert!((w.t_carol_first - 9.376012248470085).abs() < 1e-6, "{}", w.t_carol_first);
        assert!((w.t_carol_last - 15.430144272140496).abs() < 1e-6, "{}", w.t_carol_last);
        // Δt = 0.1 s: conservative quantization.
        assert_eq!(w.k_start, 94);
        assert_eq!(w.k_end, 154);
    }

    #[test]
    fn window_empty_when_gap_past_near_bound() {
        let mut cfg = ScenarioConfig::default();
        cfg.initial_positions.carol_x = cfg.initial_positions.eve_x + 4.0; // below near bound
        let tracks = tracks_for(&cfg);
        let w = compute_window(&cfg, &tracks).unwrap();
        assert!(w.empty);
    }

    #[test]
    fn window_empty_when_never_reached_in_horizon() {
        let mut cfg = ScenarioConfig::default();
        cfg.initial_positions.carol_x = 5000.0;
        let tracks = tracks_for(&cfg);
        let w = compute_window(&cfg, &tracks).unwrap();
        assert!(w.empty, "far-start window should not open within T = 20 s");
    }

    #[test]
    fn infinite_speed_reduces_to_pure_geometry() {
        let mut cfg = ScenarioConfig::default();
        cfg.comm.propagation_speed = 1e30;
        let tracks = tracks_for(&cfg);
        let w = compute_window(&cfg, &tracks).unwrap();
        let far = (cfg.radar.max_range.powi(2) - cfg.road.lane_width.powi(2)).sqrt();
        let near = cfg.road.lane_width / cfg.radar.cone_half_angle.tan();
        let gap0 = cfg.initial_positions.carol_x - cfg.initial_positions.eve_x;
        let t_open = (gap0 - far) / (2.0 * cfg.initial_speed);
        let t_close = (gap0 - near) / (2.0 * cfg.initial_speed);
        assert!((w.t_carol_first - t_open).abs() < 1e-9);
        assert!((w.t_carol_last - t_close).abs() < 1e-9);
        assert!((w.t_eve_first - t_open).abs() < 1e-9);
    }

    #[test]
    fn replay_confirms_coverage_inside_and_not_outside() {
        let cfg = ScenarioConfig::default();
        let tracks = tracks_for(&cfg);
        let w = compute_window(&cfg, &tracks).unwrap();
        assert!(!w.empty);
        for k in w.k_start..=w.k_end {
            assert!(
                slot_covered_at_arrival(&cfg, &tracks, k).unwrap(),
                "slot {k} inside window not covered"
            );
        }
        // One slot outside on each side (quantization grants one slot slack).
        if w.k_start >= 2 {
            assert!(!slot_covered_at_arrival(&cfg, &tracks, w.k_start - 2).unwrap());
        }
        if w.k_end + 2 <= cfg.road.num_slots {
            assert!(!slot_covered_at_arrival(&cfg, &tracks, w.k_end + 2).unwrap());
        }
    }

    #[test]
    fn window_shrinks_with_narrower_cone_and_shorter_range() {
        let cfg = ScenarioConfig::default();
        let tracks = tracks_for(&cfg);
        let base = compute_window(&cfg, &tracks).unwrap();
        let len = |w: &TxWindow| w.k_end as i64 - w.k_start as i64 + 1;

        let mut narrow = cfg.clone();
        narrow.radar.cone_half_angle *= 0.5;
        let wn = compute_window(&narrow, &tracks_for(&narrow)).unwrap();
        assert!(len(&wn) <= len(&base));

        let mut short = cfg.clone();
        short.radar.max_range = 100.0;
        let ws = compute_window(&short, &tracks_for(&short)).unwrap();
        assert!(len(&ws) <= len(&base));
    }
}
