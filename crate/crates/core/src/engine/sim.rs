//! Deterministic discrete-event simulation: mobility, RSRP sampling,
//! attachment dynamics, and probe traffic with the calibrated latency model.

use super::latency::{sample_rtt, LatencyModel};
use super::mobility::{step_mobility, MobilityTrace};
use super::EngineError;
use crate::cellnet::{
    attach_state, build_topology, validate_frequency_plan, AttachState, NodeSpec, PositionSource,
    Topology,
};
use crate::overlay::{assign_addresses, encapsulation_walk, route, EncapsulationWalk};
use crate::rfmodel::{self, GroundParameters};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Attachment behavior shared by every link of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttachConfig {
    pub threshold_dbm: f64,
    pub hysteresis_db: f64,
    /// An attached link whose RSRP sits within this many dB above the
    /// detach point is classified unreliable: probes still flow, the
    /// degraded-link penalty applies.
    pub unreliable_margin_db: f64,
}

impl Default for AttachConfig {
    fn default() -> Self {
        AttachConfig {
            threshold_dbm: -110.0,
            hysteresis_db: 3.0,
            unreliable_margin_db: 6.0,
        }
    }
}

/// Probe traffic definition: ICMP-style echos from source to target at a
/// fixed cadence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub source: String,
    pub target: String,
    pub interval_s: f64,
}

/// A fully resolved simulation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub nodes: Vec<NodeSpec>,
    /// Parent links as (child, parent).
    pub links: Vec<(String, String)>,
    pub ground: GroundParameters,
    pub latency: LatencyModel,
    pub attach: AttachConfig,
    pub probe: ProbeSpec,
    /// Mobility traces bound to node ids via `PositionSource::Trace`.
    pub traces: BTreeMap<String, MobilityTrace>,
    pub seed: u64,
    pub duration_s: f64,
}

/// Three-way link classification recorded with every sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkState {
    Attached,
    Unreliable,
    Detached,
}

/// One timestamped measurement of the probe path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub time_s: f64,
    pub x_m: f64,
    pub y_m: f64,
    pub serving_node: Option<String>,
    /// Serving-link RSRP at the probe source; measured even when detached.
    pub rsrp_dbm: Option<f64>,
    pub rtt_ms: Option<f64>,
    pub one_way_ms: Option<f64>,
    pub link_state: LinkState,
    pub hop_count: usize,
}

impl Scenario {
    /// Fail-closed validation of the whole configuration; runs before any
    /// simulation event.
    pub fn validate(&self) -> Result<Topology, EngineError> {
        for n in &self.nodes {
            n.validate()?;
        }
        self.ground.validate().map_err(crate::cellnet::CellError::from)?;
        self.latency.validate()?;
        if self.attach.hysteresis_db < 0.0 || self.attach.unreliable_margin_db < 0.0 {
            return Err(EngineError::InvalidScenario(
                "attach hysteresis and unreliable margin must be non-negative".into(),
            ));
        }
        if self.probe.interval_s <= 0.0 {
            return Err(EngineError::InvalidScenario(
                "probe interval must be positive".into(),
            ));
        }
        if self.duration_s < 0.0 {
            return Err(EngineError::InvalidScenario("duration must be >= 0".into()));
        }
        let conflicts = validate_frequency_plan(&self.nodes, &self.links)?;
        if !conflicts.is_empty() {
            return Err(EngineError::FrequencyPlan(format!("{conflicts:?}")));
        }
        let topo = build_topology(&self.nodes, &self.links)?;
        let ids: Vec<(String, u32)> = self.nodes.iter().map(|n| (n.id.clone(), n.mmsi)).collect();
        assign_addresses(&ids)?;
        for n in &self.nodes {
            if let PositionSource::Trace { trace } = &n.position {
                let t = self
                    .traces
                    .get(trace)
                    .ok_or_else(|| EngineError::InvalidScenario(format!(
                        "node '{}' references unknown trace '{}'",
                        n.id, trace
                    )))?;
                t.validate()?;
            }
        }
        route(&self.probe.source, &self.probe.target, &topo)
            .map_err(EngineError::from)?;
        Ok(topo)
    }
}

struct LinkRuntime {
    child: String,
    parent: String,
    state: AttachState,
    rsrp_dbm: f64,
}

fn node_position(
    node: &NodeSpec,
    traces: &BTreeMap<String, MobilityTrace>,
    time_s: f64,
) -> (f64, f64) {
    match &node.position {
        PositionSource::Fixed { x_m, y_m } => (*x_m, *y_m),
        PositionSource::Trace { trace } => {
            let t = &traces[trace];
            // Nodes hold their final position once the tour ends.
            step_mobility(t, time_s.min(t.duration_s())).expect("clamped time")
        }
    }
}

/// Runs the deterministic event loop: at every probe interval, update
/// positions, evaluate every link's RSRP, advance attach states, and (when
/// the whole chain is serviceable) issue a probe and log the sample.
///
/// Identical configuration and seed produce a byte-identical log.
pub fn run_scenario(scenario: &Scenario) -> Result<Vec<SampleRecord>, EngineError> {
    let topo = scenario.validate()?;
    let by_id: BTreeMap<&str, &NodeSpec> =
        scenario.nodes.iter().map(|n| (n.id.as_str(), n)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);

    // Per-link runtime state in deterministic (child id) order. Links start
    // attached: the deployment established them under good conditions.
    let mut links: Vec<LinkRuntime> = topo
        .links()
        .map(|(c, p)| LinkRuntime {
            child: c.to_string(),
            parent: p.to_string(),
            state: AttachState::Attached,
            rsrp_dbm: f64::NEG_INFINITY,
        })
        .collect();

    let path = route(&scenario.probe.source, &scenario.probe.target, &topo)?;
    let walk: EncapsulationWalk =
        encapsulation_walk(&scenario.probe.source, &scenario.probe.target, &topo)?;
    // Hop links along the path, as indices into `links`.
    let hop_links: Vec<usize> = path
        .windows(2)
        .map(|pair| {
            let (a, b) = (pair[0].as_str(), pair[1].as_str());
            let (child, parent) = if topo.parent_of(a) == Some(b) {
                (a, b)
            } else {
                (b, a)
            };
            links
                .iter()
                .position(|l| l.child == child && l.parent == parent)
                .expect("path edges are topology links")
        })
        .collect();
    let src_link: Option<usize> = links
        .iter()
        .position(|l| l.child == scenario.probe.source);

    let mut records = Vec::new();
    let mut step = 0u64;
    loop {
        let time_s = step as f64 * scenario.probe.interval_s;
        if time_s >= scenario.duration_s {
            break;
        }
        step += 1;

        // Positions, then link budgets and attach states.
        let positions: BTreeMap<&str, (f64, f64)> = scenario
            .nodes
            .iter()
            .map(|n| (n.id.as_str(), node_position(n, &scenario.traces, time_s)))
            .collect();
        for link in links.iter_mut() {
            let child = by_id[link.child.as_str()];
            let parent = by_id[link.parent.as_str()];
            let (cx, cy) = positions[link.child.as_str()];
            let (px, py) = positions[link.parent.as_str()];
            let d = ((cx - px).powi(2) + (cy - py).powi(2)).sqrt().max(rfmodel::MIN_DISTANCE_M);
            let rx_power = rfmodel::two_ray_rx_power(&parent.radio, &child.radio, d, &scenario.ground)?;
            let tx_bw = rfmodel::lte_transmission_bandwidth(parent.radio.bandwidth_hz)
                .map_err(crate::cellnet::CellError::from)?;
            link.rsrp_dbm = rfmodel::rsrp_from_rx_power(rx_power, tx_bw)
                .map_err(crate::cellnet::CellError::from)?;
            link.state = attach_state(
                link.rsrp_dbm,
                link.state,
                scenario.attach.threshold_dbm,
                scenario.attach.hysteresis_db,
            );
        }

        let classify = |l: &LinkRuntime| -> LinkState {
            match l.state {
                AttachState::Detached => LinkState::Detached,
                AttachState::Attached => {
                    let detach_floor =
                        scenario.attach.threshold_dbm - scenario.attach.hysteresis_db;
                    if l.rsrp_dbm < detach_floor + scenario.attach.unreliable_margin_db {
                        LinkState::Unreliable
                    } else {
                        LinkState::Attached
                    }
                }
            }
        };

        // Chain state is the worst state along the probe path.
        let chain_state = hop_links
            .iter()
            .map(|&i| classify(&links[i]))
            .max()
            .unwrap_or(LinkState::Attached);

        let (sx, sy) = positions[scenario.probe.source.as_str()];
        let (serving_node, rsrp_dbm) = match src_link {
            Some(i) => {
                let l = &links[i];
                let serving = (l.state == AttachState::Attached).then(|| l.parent.clone());
                (serving, Some(l.rsrp_dbm))
            }
            None => (None, None),
        };

        // No probe while any hop is detached; the sample still logs the
        // measured RSRP for the coverage maps.
        let (rtt_ms, one_way_ms) = if chain_state != LinkState::Detached {
            let rsrps: Vec<f64> = hop_links.iter().map(|&i| links[i].rsrp_dbm).collect();
            let rtt = sample_rtt(&walk, &rsrps, &scenario.latency, &mut rng)?;
            (Some(rtt), Some(rtt / 2.0))
        } else {
            (None, None)
        };

        records.push(SampleRecord {
            time_s,
            x_m: sx,
            y_m: sy,
            serving_node,
            rsrp_dbm,
            rtt_ms,
            one_way_ms,
            link_state: chain_state,
            hop_count: path.len() - 1,
        });
    }
    Ok(records)
}

/// Mean one-way latency over the probed samples of a finished run.
pub fn mean_one_way_ms(records: &[SampleRecord]) -> Option<f64> {
    let vals: Vec<f64> = records.iter().filter_map(|r| r.one_way_ms).collect();
    if vals.is_empty() {
        return None;
    }
    Some(vals.iter().sum::<f64>() / vals.len() as f64)
}

/// One-time penalty calibration: bisects the penalty slope until the
/// scenario's mean one-way latency matches the target. The resulting slope
/// is frozen into the scenario files; re-running the calibration against
/// the bundled seed reproduces it exactly.
pub fn calibrate_penalty_slope(
    scenario: &Scenario,
    target_one_way_mean_ms: f64,
) -> Result<f64, EngineError> {
    let mean_at = |slope: f64| -> Result<f64, EngineError> {
        let mut s = scenario.clone();
        s.latency.penalty.slope_ms_per_db = slope;
        let records = run_scenario(&s)?;
        mean_one_way_ms(&records)
            .ok_or_else(|| EngineError::InvalidScenario("no probed samples to calibrate on".into()))
    };
    let (mut lo, mut hi) = (0.0_f64, 50.0_f64);
    if mean_at(lo)? > target_one_way_mean_ms {
        return Err(EngineError::InvalidScenario(format!(
            "target mean {target_one_way_mean_ms} ms is below the zero-penalty mean"
        )));
    }
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if mean_at(mid)? < target_one_way_mean_ms {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
