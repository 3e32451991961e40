//! Deterministic discrete-event simulation of drive tests over the cell
//! chain: lane mobility, per-link RSRP and attachment, and seeded probe
//! traffic through the calibrated latency model.

mod latency;
mod mobility;
mod sim;

pub use latency::{from_lab_means, sample_rtt, JitterSpec, LatencyModel, PenaltySpec};
pub use mobility::{
    concat_traces, generate_lane_trajectories, step_mobility, MobilityTrace,
};
pub use sim::{
    calibrate_penalty_slope, mean_one_way_ms, run_scenario, AttachConfig, LinkState, ProbeSpec,
    SampleRecord, Scenario,
};

use crate::cellnet::CellError;
use crate::overlay::OverlayError;
use crate::rfmodel::RfError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid mobility trace: {0}")]
    InvalidTrace(String),
    #[error("time {time_s} s outside trace duration {duration_s} s")]
    TimeOutOfRange { time_s: f64, duration_s: f64 },
    #[error("invalid latency model: {0}")]
    InvalidLatencyModel(String),
    #[error("walk has {hops} LTE hops but {rsrps} RSRP values were supplied")]
    RsrpHopMismatch { hops: usize, rsrps: usize },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("frequency plan has conflicts: {0}")]
    FrequencyPlan(String),
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error(transparent)]
    Overlay(#[from] OverlayError),
    #[error(transparent)]
    Rf(#[from] RfError),
}
