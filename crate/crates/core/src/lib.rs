//! Physical layer security in vehicular ISAC networks, driven by radar
//! sensing interference.
//!
//! The crate models a multi-lane road on which a transmitter (Alice) sends
//! confidential data to a receiver (Bob) while eavesdroppers (Eves) listen
//! and oncoming vehicles (Carols) sweep forward-looking radars whose
//! interference degrades the wiretap channel. It provides:
//!
//! - [`scenario`]: configuration ingestion and the canonical SI-unit
//!   parameter record shared by every other module.
//! - [`geometry`]: road-frame kinematics and the radar-cone coverage
//!   predicates with their indicator sets.
//! - [`channel`]: fading/RCS sampling, echo power, interference aggregation,
//!   SINR and the reliability/sensing-weighted secrecy-rate objective.
//! - [`analytic`]: closed-form connection outage probability, secrecy outage
//!   probability bounds and success ranging probability.
//! - [`montecarlo`]: an independent stochastic-geometry oracle that estimates
//!   the same metrics by brute force.
//! - [`window`]: earliest/latest confidential-transmission slots accounting
//!   for finite propagation speed.
//! - [`optimizer`]: per-slot power allocation, successive convex
//!   approximation of the trajectory subproblem, and the alternating loop.
//! - [`validate`]: analytic-vs-Monte-Carlo comparison reports.

pub mod analytic;
pub mod channel;
pub mod geometry;
pub mod montecarlo;
pub mod optimizer;
pub mod rng;
pub mod scenario;
pub mod special;
pub mod units;
pub mod validate;
pub mod window;

pub use analytic::MetricReport;
pub use geometry::{Role, VehicleTrack};
pub use montecarlo::McEstimate;
pub use optimizer::OptRun;
pub use scenario::ScenarioConfig;
pub use window::TxWindow;
