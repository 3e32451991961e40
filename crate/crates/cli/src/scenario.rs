//! Scenario file schema and loading.
//!
//! Scenarios are TOML documents with sections for nodes, links, ground,
//! latency model, traces, probes, seed and duration. Unknown keys are
//! rejected so a typo can never silently change an experiment.

use anyhow::{bail, Context, Result};
use cellchain_core::cellnet::{FrequencyAllocation, NodeSpec, PositionSource, Roles};
use cellchain_core::engine::{
    concat_traces, generate_lane_trajectories, AttachConfig, JitterSpec, LatencyModel,
    MobilityTrace, PenaltySpec, ProbeSpec, Scenario,
};
use cellchain_core::rfmodel::{GroundParameters, Polarization, RadioConfig};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub seed: u64,
    /// Simulation length; defaults to the probe source's tour duration.
    pub duration_s: Option<f64>,
    pub ground: GroundSection,
    pub attach: AttachSection,
    pub latency: LatencySection,
    pub nodes: Vec<NodeSection>,
    #[serde(default)]
    pub links: Vec<LinkSection>,
    pub probes: ProbeSection,
    #[serde(default)]
    pub traces: BTreeMap<String, TraceSection>,
    #[serde(default)]
    pub analysis: Option<AnalysisSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundSection {
    pub conductivity_s_per_m: f64,
    pub relative_permittivity: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttachSection {
    pub threshold_dbm: f64,
    pub hysteresis_db: f64,
    pub unreliable_margin_db: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencySection {
    pub per_hop_mean_ms: f64,
    pub host_processing_ms: f64,
    pub jitter: JitterSection,
    pub penalty: PenaltySection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JitterSection {
    pub family: String,
    #[serde(default)]
    pub sigma: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltySection {
    pub margin_db: f64,
    pub slope_ms_per_db: f64,
    pub cap_ms: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSection {
    pub id: String,
    pub mmsi: u32,
    pub roles: Vec<String>,
    pub position: PositionSection,
    pub radio: RadioSection,
    #[serde(default)]
    pub allocation: Option<AllocationSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionSection {
    #[serde(default)]
    pub fixed: Option<[f64; 2]>,
    #[serde(default)]
    pub trace: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioSection {
    pub carrier_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub antenna_gain_tx_dbi: f64,
    pub antenna_gain_rx_dbi: f64,
    pub antenna_height_m: f64,
    pub polarization: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationSection {
    pub uplink_mhz: [f64; 2],
    pub downlink_mhz: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub child: String,
    pub parent: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub source: String,
    pub target: String,
    pub interval_s: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSection {
    /// Lane tour generated from road geometry.
    #[serde(default)]
    pub lanes: Option<LanesSection>,
    /// Explicit waypoint path.
    #[serde(default)]
    pub waypoints: Option<WaypointsSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanesSection {
    pub road_length_m: f64,
    pub lane_count: usize,
    pub lane_spacing_m: f64,
    pub speed_mps: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointsSection {
    pub points: Vec<[f64; 2]>,
    pub speed_mps: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    pub tile_width_m: f64,
    pub tile_height_m: f64,
}

fn parse_roles(id: &str, roles: &[String]) -> Result<Roles> {
    let mut r = Roles::default();
    for role in roles {
        match role.as_str() {
            "client" => r.client = true,
            "cell" => r.cell = true,
            other => bail!("node '{id}': unknown role '{other}'"),
        }
    }
    Ok(r)
}

fn parse_polarization(id: &str, s: &str) -> Result<Polarization> {
    match s {
        "vertical" => Ok(Polarization::Vertical),
        "horizontal" => Ok(Polarization::Horizontal),
        other => bail!("node '{id}': unknown polarization '{other}'"),
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).context("scenario file rejected")
    }

    /// Node specs as declared, without cross-validation; `plan` reports
    /// problems instead of refusing to look at them.
    pub fn build_nodes(&self) -> Result<Vec<NodeSpec>> {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let position = match (&n.position.fixed, &n.position.trace) {
                (Some([x, y]), None) => PositionSource::Fixed { x_m: *x, y_m: *y },
                (None, Some(t)) => PositionSource::Trace { trace: t.clone() },
                _ => bail!("node '{}': define exactly one of fixed or trace", n.id),
            };
            let served_allocation = n.allocation.as_ref().map(|a| {
                FrequencyAllocation::fdd(
                    (a.uplink_mhz[0] * 1e6, a.uplink_mhz[1] * 1e6),
                    (a.downlink_mhz[0] * 1e6, a.downlink_mhz[1] * 1e6),
                )
            });
            nodes.push(NodeSpec {
                id: n.id.clone(),
                mmsi: n.mmsi,
                roles: parse_roles(&n.id, &n.roles)?,
                radio: RadioConfig {
                    carrier_frequency_hz: n.radio.carrier_frequency_hz,
                    bandwidth_hz: n.radio.bandwidth_hz,
                    tx_power_dbm: n.radio.tx_power_dbm,
                    antenna_gain_tx_dbi: n.radio.antenna_gain_tx_dbi,
                    antenna_gain_rx_dbi: n.radio.antenna_gain_rx_dbi,
                    antenna_height_m: n.radio.antenna_height_m,
                    polarization: parse_polarization(&n.id, &n.radio.polarization)?,
                },
                served_allocation,
                position,
            });
        }
        Ok(nodes)
    }

    pub fn link_pairs(&self) -> Vec<(String, String)> {
        self.links
            .iter()
            .map(|l| (l.child.clone(), l.parent.clone()))
            .collect()
    }

    /// Resolves the file into a validated engine scenario.
    pub fn build(&self) -> Result<Scenario> {
        let mut traces: BTreeMap<String, MobilityTrace> = BTreeMap::new();
        for (name, t) in &self.traces {
            let trace = match (&t.lanes, &t.waypoints) {
                (Some(l), None) => {
                    let passes = generate_lane_trajectories(
                        l.road_length_m,
                        l.lane_count,
                        l.lane_spacing_m,
                        l.speed_mps,
                    );
                    concat_traces(&passes)
                        .with_context(|| format!("trace '{name}'"))?
                }
                (None, Some(w)) => MobilityTrace::new(
                    w.points.iter().map(|p| (p[0], p[1])).collect(),
                    w.speed_mps,
                )
                .with_context(|| format!("trace '{name}'"))?,
                _ => bail!("trace '{name}': define exactly one of lanes or waypoints"),
            };
            traces.insert(name.clone(), trace);
        }

        let nodes = self.build_nodes()?;

        let jitter = match self.latency.jitter.family.as_str() {
            "none" => JitterSpec::None,
            "lognormal" => JitterSpec::LogNormal {
                sigma: self.latency.jitter.sigma,
            },
            other => bail!("unknown jitter family '{other}'"),
        };
        let latency = LatencyModel {
            per_hop_mean_ms: self.latency.per_hop_mean_ms,
            jitter,
            penalty: PenaltySpec {
                margin_db: self.latency.penalty.margin_db,
                slope_ms_per_db: self.latency.penalty.slope_ms_per_db,
                cap_ms: self.latency.penalty.cap_ms,
            },
            host_processing_ms: self.latency.host_processing_ms,
            serving_threshold_dbm: self.attach.threshold_dbm,
        };

        let duration_s = match self.duration_s {
            Some(d) => d,
            None => {
                let src = self
                    .nodes
                    .iter()
                    .find(|n| n.id == self.probes.source)
                    .with_context(|| format!("probe source '{}' not defined", self.probes.source))?;
                match &src.position.trace {
                    Some(t) => traces
                        .get(t)
                        .with_context(|| format!("unknown trace '{t}'"))?
                        .duration_s(),
                    None => bail!("duration_s is required when the probe source is stationary"),
                }
            }
        };

        let scenario = Scenario {
            nodes,
            links: self.link_pairs(),
            ground: GroundParameters {
                conductivity_s_per_m: self.ground.conductivity_s_per_m,
                relative_permittivity: self.ground.relative_permittivity,
            },
            latency,
            attach: AttachConfig {
                threshold_dbm: self.attach.threshold_dbm,
                hysteresis_db: self.attach.hysteresis_db,
                unreliable_margin_db: self.attach.unreliable_margin_db,
            },
            probe: ProbeSpec {
                source: self.probes.source.clone(),
                target: self.probes.target.clone(),
                interval_s: self.probes.interval_s,
            },
            traces,
            seed: self.seed,
            duration_s,
        };
        scenario.validate().context("scenario validation failed")?;
        Ok(scenario)
    }
}

/// Parses and resolves a scenario file from disk.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read scenario '{}'", path.display()))?;
    let file = ScenarioFile::parse(&text)
        .with_context(|| format!("cannot parse scenario '{}'", path.display()))?;
    file.build()
        .with_context(|| format!("cannot build scenario '{}'", path.display()))
}

/// Parses the file only, for commands that need the raw sections.
pub fn load_scenario_file(path: &Path) -> Result<ScenarioFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read scenario '{}'", path.display()))?;
    ScenarioFile::parse(&text)
        .with_context(|| format!("cannot parse scenario '{}'", path.display()))
}
