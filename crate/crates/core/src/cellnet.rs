//! Node model, hierarchical cell topology, FDD outband frequency planning
//! and validation, and RSRP-driven attachment.

use crate::rfmodel::{
    self, GroundParameters, Polarization, RadioConfig, RfError,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CellError {
    #[error("cell node '{0}' has no frequency allocation")]
    MissingAllocation(String),
    #[error("allocation of '{0}' is malformed: {1}")]
    InvalidAllocation(String, String),
    #[error("unknown node id '{0}' referenced in links")]
    UnknownNode(String),
    #[error("link {child}->{parent}: parent lacks the cell role or child lacks the client role")]
    InvalidRole { child: String, parent: String },
    #[error("node '{0}' is attached to more than one parent")]
    MultiAttach(String),
    #[error("parent links contain a cycle through '{0}'")]
    TopologyCycle(String),
    #[error("node '{0}' violates role invariants: {1}")]
    InvalidNode(String, String),
    #[error("threshold {0} dBm is never reached at the minimum distance")]
    NoCoverage(f64),
    #[error(transparent)]
    Rf(#[from] RfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DuplexMode {
    Fdd,
}

/// FDD uplink/downlink band pair served by one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyAllocation {
    /// (low, high) in Hz.
    pub uplink_hz: (f64, f64),
    /// (low, high) in Hz.
    pub downlink_hz: (f64, f64),
    pub duplex_mode: DuplexMode,
}

impl FrequencyAllocation {
    pub fn fdd(uplink_hz: (f64, f64), downlink_hz: (f64, f64)) -> Self {
        FrequencyAllocation {
            uplink_hz,
            downlink_hz,
            duplex_mode: DuplexMode::Fdd,
        }
    }

    pub fn downlink_center_hz(&self) -> f64 {
        (self.downlink_hz.0 + self.downlink_hz.1) / 2.0
    }

    pub fn validate(&self) -> Result<(), String> {
        let (ul, dl) = (self.uplink_hz, self.downlink_hz);
        if ul.0 >= ul.1 || dl.0 >= dl.1 {
            return Err("band low must be below band high".into());
        }
        if overlap_width(ul, dl) > 0.0 {
            return Err("uplink and downlink ranges overlap".into());
        }
        let bw_ul = ul.1 - ul.0;
        let bw_dl = dl.1 - dl.0;
        if (bw_ul - bw_dl).abs() > 1e-3 {
            return Err(format!(
                "uplink width {} Hz != downlink width {} Hz",
                bw_ul, bw_dl
            ));
        }
        Ok(())
    }
}

/// Positive-measure intersection width of two closed ranges; shared
/// endpoints count as zero.
fn overlap_width(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1.min(b.1) - a.0.max(b.0)).max(0.0)
}

/// Roles a node plays. A node with both is a relay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Roles {
    pub client: bool,
    pub cell: bool,
}

impl Roles {
    pub fn client() -> Self {
        Roles { client: true, cell: false }
    }
    pub fn cell() -> Self {
        Roles { client: false, cell: true }
    }
    pub fn relay() -> Self {
        Roles { client: true, cell: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PositionSource {
    /// Stationary node at (x, y) metres.
    Fixed { x_m: f64, y_m: f64 },
    /// Position follows the named mobility trace.
    Trace { trace: String },
}

/// One autonomous node: identity, roles, radio, mobility binding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    /// 9-decimal-digit identity mapped onto the overlay address space.
    pub mmsi: u32,
    pub roles: Roles,
    pub radio: RadioConfig,
    /// Present iff the node has the cell role.
    pub served_allocation: Option<FrequencyAllocation>,
    pub position: PositionSource,
}

impl NodeSpec {
    pub fn validate(&self) -> Result<(), CellError> {
        if self.mmsi >= 1_000_000_000 {
            return Err(CellError::InvalidNode(
                self.id.clone(),
                format!("mmsi {} has more than 9 digits", self.mmsi),
            ));
        }
        if !self.roles.client && !self.roles.cell {
            return Err(CellError::InvalidNode(
                self.id.clone(),
                "node has neither client nor cell role".into(),
            ));
        }
        if self.roles.cell && self.served_allocation.is_none() {
            return Err(CellError::MissingAllocation(self.id.clone()));
        }
        if !self.roles.cell && self.served_allocation.is_some() {
            return Err(CellError::InvalidNode(
                self.id.clone(),
                "allocation present on a node without the cell role".into(),
            ));
        }
        if let Some(alloc) = &self.served_allocation {
            alloc
                .validate()
                .map_err(|e| CellError::InvalidAllocation(self.id.clone(), e))?;
        }
        self.radio.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Uplink,
    Downlink,
}

/// One frequency-plan violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FrequencyConflict {
    /// Two cells' bands intersect with positive measure. `a` < `b`.
    BandOverlap { a: String, b: String, band: Band },
    /// A relay serves on a band overlapping its parent link (inband, not
    /// outband, operation).
    OutbandViolation { child: String, parent: String },
}

/// Checks the outband frequency plan: every pair of cells must use disjoint
/// uplink and downlink ranges (touching endpoints are fine), and no relay
/// may serve on frequencies overlapping its parent's cell.
pub fn validate_frequency_plan(
    nodes: &[NodeSpec],
    parent_links: &[(String, String)],
) -> Result<Vec<FrequencyConflict>, CellError> {
    let mut cells: Vec<(&str, &FrequencyAllocation)> = Vec::new();
    for n in nodes {
        if n.roles.cell {
            let alloc = n
                .served_allocation
                .as_ref()
                .ok_or_else(|| CellError::MissingAllocation(n.id.clone()))?;
            alloc
                .validate()
                .map_err(|e| CellError::InvalidAllocation(n.id.clone(), e))?;
            cells.push((n.id.as_str(), alloc));
        }
    }
    let mut conflicts = Vec::new();
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            let ((id_i, a), (id_j, b)) = (cells[i], cells[j]);
            // Normalize pair order so reporting is symmetric.
            let (lo, hi) = if id_i <= id_j { (id_i, id_j) } else { (id_j, id_i) };
            if overlap_width(a.uplink_hz, b.uplink_hz) > 0.0 {
                conflicts.push(FrequencyConflict::BandOverlap {
                    a: lo.to_string(),
                    b: hi.to_string(),
                    band: Band::Uplink,
                });
            }
            if overlap_width(a.downlink_hz, b.downlink_hz) > 0.0 {
                conflicts.push(FrequencyConflict::BandOverlap {
                    a: lo.to_string(),
                    b: hi.to_string(),
                    band: Band::Downlink,
                });
            }
        }
    }
    let by_id: BTreeMap<&str, &NodeSpec> = nodes.iter().map(|n| (n.id.as_str(), n)).collect();
    for (child, parent) in parent_links {
        let (Some(c), Some(p)) = (by_id.get(child.as_str()), by_id.get(parent.as_str())) else {
            continue; // unknown ids are topology errors, not plan conflicts
        };
        if let (Some(ca), Some(pa)) = (&c.served_allocation, &p.served_allocation) {
            let cross = overlap_width(ca.uplink_hz, pa.uplink_hz)
                + overlap_width(ca.uplink_hz, pa.downlink_hz)
                + overlap_width(ca.downlink_hz, pa.uplink_hz)
                + overlap_width(ca.downlink_hz, pa.downlink_hz);
            if cross > 0.0 {
                conflicts.push(FrequencyConflict::OutbandViolation {
                    child: child.clone(),
                    parent: parent.clone(),
                });
            }
        }
    }
    Ok(conflicts)
}

/// Hierarchical topology: each node is a client in at most one parent cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Topology {
    parent: BTreeMap<String, String>,
    nodes: BTreeSet<String>,
}

impl Topology {
    pub fn parent_of(&self, id: &str) -> Option<&str> {
        self.parent.get(id).map(|s| s.as_str())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|s| s.as_str())
    }

    /// Parent links as (child, parent), sorted by child id.
    pub fn links(&self) -> impl Iterator<Item = (&str, &str)> {
        self.parent.iter().map(|(c, p)| (c.as_str(), p.as_str()))
    }

    /// Chain of ancestors starting at `id` (inclusive) up to its root.
    pub fn ancestry(&self, id: &str) -> Vec<String> {
        let mut chain = vec![id.to_string()];
        let mut cur = id;
        while let Some(p) = self.parent_of(cur) {
            chain.push(p.to_string());
            cur = p;
        }
        chain
    }
}

/// Builds the cell forest from parent links. Depth is unbounded: chains
/// beyond two hops are valid.
pub fn build_topology(
    nodes: &[NodeSpec],
    parent_links: &[(String, String)],
) -> Result<Topology, CellError> {
    let by_id: BTreeMap<&str, &NodeSpec> = nodes.iter().map(|n| (n.id.as_str(), n)).collect();
    let mut topo = Topology {
        parent: BTreeMap::new(),
        nodes: nodes.iter().map(|n| n.id.clone()).collect(),
    };
    for (child, parent) in parent_links {
        let c = by_id
            .get(child.as_str())
            .ok_or_else(|| CellError::UnknownNode(child.clone()))?;
        let p = by_id
            .get(parent.as_str())
            .ok_or_else(|| CellError::UnknownNode(parent.clone()))?;
        if !c.roles.client || !p.roles.cell {
            return Err(CellError::InvalidRole {
                child: child.clone(),
                parent: parent.clone(),
            });
        }
        if topo.parent.contains_key(child) {
            return Err(CellError::MultiAttach(child.clone()));
        }
        topo.parent.insert(child.clone(), parent.clone());
    }
    // Cycle check: walk up from every node; a forest never revisits.
    for start in topo.nodes.iter() {
        let mut seen = BTreeSet::new();
        let mut cur = start.as_str();
        seen.insert(cur);
        while let Some(p) = topo.parent_of(cur) {
            if !seen.insert(p) {
                return Err(CellError::TopologyCycle(p.to_string()));
            }
            cur = p;
        }
    }
    Ok(topo)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttachState {
    Attached,
    Detached,
}

/// Hysteresis attach rule: a detached link attaches once RSRP reaches
/// threshold + hysteresis, an attached link detaches once RSRP falls below
/// threshold − hysteresis, and inside the band the state holds.
pub fn attach_state(
    rsrp_dbm: f64,
    current: AttachState,
    threshold_dbm: f64,
    hysteresis_db: f64,
) -> AttachState {
    assert!(hysteresis_db >= 0.0, "hysteresis must be non-negative");
    match current {
        AttachState::Detached if rsrp_dbm >= threshold_dbm + hysteresis_db => AttachState::Attached,
        AttachState::Attached if rsrp_dbm < threshold_dbm - hysteresis_db => AttachState::Detached,
        same => same,
    }
}

/// Drive-test reference receiver: a car-rooftop client antenna.
pub fn reference_ue_radio(carrier_frequency_hz: f64) -> RadioConfig {
    RadioConfig {
        carrier_frequency_hz,
        bandwidth_hz: 5e6,
        tx_power_dbm: 0.0,
        antenna_gain_tx_dbi: 0.0,
        antenna_gain_rx_dbi: 0.0,
        antenna_height_m: 1.65,
        polarization: Polarization::Vertical,
    }
}

/// RSRP of the cell's downlink at the reference receiver over a distance
/// grid, as (distance, dBm) pairs.
fn rsrp_scan(
    cell_radio: &RadioConfig,
    rx: &RadioConfig,
    ground: &GroundParameters,
    lo: f64,
    hi: f64,
    step: f64,
) -> Result<Vec<(f64, f64)>, CellError> {
    let tx_bw = rfmodel::lte_transmission_bandwidth(cell_radio.bandwidth_hz)?;
    let curve = rfmodel::power_curve(cell_radio, rx, ground, lo, hi, step)?;
    Ok(curve
        .into_iter()
        .map(|(d, p)| (d, rfmodel::rsrp_from_rx_power(p, tx_bw).unwrap()))
        .collect())
}

/// Monotone (non-increasing) upper envelope of an oscillating coverage
/// curve: piecewise linear through the local maxima, following the raw
/// curve beyond the last one, clamped to be non-increasing.
///
/// The envelope ignores destructive fade dips, so interior dead spots do
/// not truncate the coverage radius.
pub fn monotone_envelope(curve: &[(f64, f64)]) -> Vec<(f64, f64)> {
    assert!(curve.len() >= 2, "envelope needs at least two points");
    let mut knots: Vec<(f64, f64)> = Vec::new();
    if curve[0].1 > curve[1].1 {
        knots.push(curve[0]);
    }
    let mut last_peak = 0usize;
    for i in 1..curve.len() - 1 {
        if curve[i].1 >= curve[i - 1].1 && curve[i].1 >= curve[i + 1].1 {
            knots.push(curve[i]);
            last_peak = i;
        }
    }
    // Beyond the last local maximum the raw curve is the envelope.
    knots.extend_from_slice(&curve[last_peak + 1..]);
    // Clamp any residual wiggle so the envelope is non-increasing.
    for i in (0..knots.len().saturating_sub(1)).rev() {
        if knots[i].1 < knots[i + 1].1 {
            knots[i].1 = knots[i + 1].1;
        }
    }
    knots
}

fn envelope_value(knots: &[(f64, f64)], d: f64) -> f64 {
    match knots.binary_search_by(|(x, _)| x.partial_cmp(&d).unwrap()) {
        Ok(i) => knots[i].1,
        Err(0) => knots[0].1,
        Err(i) if i == knots.len() => knots[knots.len() - 1].1,
        Err(i) => {
            let (x0, y0) = knots[i - 1];
            let (x1, y1) = knots[i];
            y0 + (y1 - y0) * (d - x0) / (x1 - x0)
        }
    }
}

/// Coverage radius against an explicit receiver: the outermost distance at
/// which the post-fade monotone envelope of the downlink RSRP still meets
/// the attach threshold, located by bisection on a 1 m scan.
pub fn coverage_radius_with_receiver(
    cell_radio: &RadioConfig,
    rx: &RadioConfig,
    ground: &GroundParameters,
    threshold_dbm: f64,
) -> Result<f64, CellError> {
    let mut hi = 4096.0;
    loop {
        let scan = rsrp_scan(cell_radio, rx, ground, rfmodel::MIN_DISTANCE_M, hi, 1.0)?;
        let env = monotone_envelope(&scan);
        if env[0].1 < threshold_dbm {
            return Err(CellError::NoCoverage(threshold_dbm));
        }
        if env[env.len() - 1].1 >= threshold_dbm {
            if hi >= 262_144.0 {
                return Ok(hi); // beyond any plausible deployment scale
            }
            hi *= 2.0;
            continue;
        }
        // Bracket the crossing on the envelope knots, then bisect.
        let i = env.partition_point(|&(_, v)| v >= threshold_dbm);
        let (mut lo_d, mut hi_d) = (env[i - 1].0, env[i].0);
        for _ in 0..60 {
            let mid = 0.5 * (lo_d + hi_d);
            if envelope_value(&env, mid) >= threshold_dbm {
                lo_d = mid;
            } else {
                hi_d = mid;
            }
        }
        return Ok(0.5 * (lo_d + hi_d));
    }
}

/// Coverage radius of a cell node against the drive-test reference
/// receiver.
pub fn coverage_radius(
    cell: &NodeSpec,
    ground: &GroundParameters,
    threshold_dbm: f64,
) -> Result<f64, CellError> {
    assert!(cell.roles.cell, "coverage radius requires the cell role");
    let rx = reference_ue_radio(cell.radio.carrier_frequency_hz);
    coverage_radius_with_receiver(&cell.radio, &rx, ground, threshold_dbm)
}

/// Solves for the transmit EIRP (dBm, with antenna gains folded in) that
/// puts the coverage radius at `target_radius_m`, by bisection. This is the
/// one-time calibration that pins the free power parameter to the observed
/// cell radius; the result is then frozen in the scenario files.
pub fn calibrate_eirp(
    cell_radio: &RadioConfig,
    rx: &RadioConfig,
    ground: &GroundParameters,
    threshold_dbm: f64,
    target_radius_m: f64,
) -> Result<f64, CellError> {
    let radius_at = |eirp: f64| -> Result<f64, CellError> {
        let mut r = cell_radio.clone();
        r.tx_power_dbm = eirp;
        r.antenna_gain_tx_dbi = 0.0;
        match coverage_radius_with_receiver(&r, rx, ground, threshold_dbm) {
            Ok(d) => Ok(d),
            Err(CellError::NoCoverage(_)) => Ok(0.0),
            Err(e) => Err(e),
        }
    };
    let (mut lo, mut hi) = (-100.0, 80.0);
    if radius_at(hi)? < target_radius_m {
        return Err(CellError::NoCoverage(threshold_dbm));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if radius_at(mid)? < target_radius_m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
