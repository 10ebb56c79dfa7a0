//! Discrete-event simulator of intra-cell group delivery in a private 5G
//! cell. Uplink packets from a group source either traverse the core
//! user-plane (the anchored baseline) or pivot at the base station onto a
//! downlink point-to-multipoint bearer (local breakout); the simulator
//! produces per-packet decomposed latency and deadline-reliability
//! statistics for both paths.

pub mod breakout;
pub mod config;
pub mod corepath;
pub mod domain;
pub mod engine;
pub mod metrics;
pub mod output;
pub mod ran;
pub mod sim;
pub mod traffic;

pub use config::{Measurement, Mode, ScenarioConfig};
pub use engine::{Micros, Sampler, SimTime};
pub use metrics::{reliability, LatencyLedger, Path, ReliabilityReport};
pub use sim::{compare, run_configured, run_scenario, sweep, CompareOutput, RunOutput};
