//! Decibel / linear unit conversions.
//!
//! All physics in this crate runs on linear SI values (watts, linear gains).
//! Config files may state quantities in dB, dBm or dBi; these helpers are the
//! single conversion point.

/// dB ratio to linear ratio: `10^(db/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear ratio to dB: `10·log10(x)`.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// dBm to watts: `10^(dbm/10)` milliwatts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

/// Watts to dBm.
pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w * 1e3).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_points() {
        assert!((dbm_to_watts(50.0) - 100.0).abs() < 1e-9);
        assert!((dbm_to_watts(10.0) - 0.01).abs() < 1e-15);
        assert!((dbm_to_watts(-90.0) - 1e-12).abs() < 1e-24);
        assert!((db_to_linear(45.0) - 31622.776601683792).abs() < 1e-6);
        assert!((db_to_linear(0.0) - 1.0).abs() < 1e-15);
    }

    proptest! {
        // to_linear(to_db(x)) = x within 1e-12 relative over the full scale
        // the scenario format accepts.
        #[test]
        fn db_round_trip(exp in -12.0f64..12.0) {
            let x = 10f64.powf(exp);
            let rt = db_to_linear(linear_to_db(x));
            prop_assert!(((rt - x) / x).abs() < 1e-12);
        }

        #[test]
        fn dbm_round_trip(exp in -12.0f64..6.0) {
            let w = 10f64.powf(exp);
            let rt = dbm_to_watts(watts_to_dbm(w));
            prop_assert!(((rt - w) / w).abs() < 1e-12);
        }
    }
}
