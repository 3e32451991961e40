//! IP overlay addressing (MMSI mapping), overlay routing over the cell
//! forest, and the per-packet encapsulation walk across the GRE, SGi, GTP,
//! S1, air and access segments.

use crate::cellnet::Topology;
use serde::{Deserialize, Serialize};
use std::net::Ipv4Addr;
use thiserror::Error;

/// Outer IPv4 (20) + base GRE header (4), no key/sequence options.
pub const GRE_OVERHEAD_BYTES: u32 = 24;

/// Outer IPv4 (20) + UDP (8) + GTP-U (8), no extension headers.
pub const GTP_OVERHEAD_BYTES: u32 = 36;

/// Inner IPv4 (20) + ICMP echo (8): the probe packets of the drive tests.
pub const DEFAULT_INNER_HEADER_BYTES: u32 = 28;

#[derive(Debug, Error, PartialEq)]
pub enum OverlayError {
    #[error("mmsi {0} has more than 9 decimal digits")]
    MmsiOutOfRange(u64),
    #[error("overlay address collision: '{a}' and '{b}' both map to {ip}")]
    AddressCollision { a: String, b: String, ip: Ipv4Addr },
    #[error("'{src}' and '{dst}' are in different trees of the forest")]
    Unreachable { src: String, dst: String },
    #[error("unknown node id '{0}'")]
    UnknownNode(String),
}

/// Fixed identity-to-address binding of one node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlayAddress {
    pub mmsi: u32,
    pub ip: Ipv4Addr,
}

/// Deterministic MMSI-to-IP mapping: the low 24 bits of the MMSI become the
/// host portion of 10.0.0.0/8.
pub fn mmsi_to_ip(mmsi: u32) -> Result<Ipv4Addr, OverlayError> {
    if mmsi >= 1_000_000_000 {
        return Err(OverlayError::MmsiOutOfRange(mmsi as u64));
    }
    let host = mmsi & 0x00FF_FFFF;
    Ok(Ipv4Addr::from(0x0A00_0000u32 | host))
}

/// Maps every (node id, mmsi) pair, failing closed on any collision of the
/// low 24 MMSI bits within the scenario's node set.
pub fn assign_addresses(
    nodes: &[(String, u32)],
) -> Result<Vec<(String, OverlayAddress)>, OverlayError> {
    let mut out: Vec<(String, OverlayAddress)> = Vec::with_capacity(nodes.len());
    for (id, mmsi) in nodes {
        let ip = mmsi_to_ip(*mmsi)?;
        if let Some((other, _)) = out.iter().find(|(_, a)| a.ip == ip) {
            return Err(OverlayError::AddressCollision {
                a: other.clone(),
                b: id.clone(),
                ip,
            });
        }
        out.push((id.clone(), OverlayAddress { mmsi: *mmsi, ip }));
    }
    Ok(out)
}

/// Unique simple path src → … → lowest common ancestor → … → dst on the
/// cell forest. `src == dst` yields the single-node path.
pub fn route(src: &str, dst: &str, topology: &Topology) -> Result<Vec<String>, OverlayError> {
    for id in [src, dst] {
        if !topology.contains(id) {
            return Err(OverlayError::UnknownNode(id.to_string()));
        }
    }
    let up_src = topology.ancestry(src);
    let up_dst = topology.ancestry(dst);
    // Lowest common ancestor: first node of src's chain present in dst's.
    let lca_idx = up_src
        .iter()
        .position(|n| up_dst.contains(n))
        .ok_or_else(|| OverlayError::Unreachable {
            src: src.to_string(),
            dst: dst.to_string(),
        })?;
    let lca = &up_src[lca_idx];
    let mut path: Vec<String> = up_src[..=lca_idx].to_vec();
    let down: Vec<String> = up_dst
        .iter()
        .take_while(|n| *n != lca)
        .cloned()
        .collect();
    path.extend(down.into_iter().rev());
    Ok(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    App,
    GreTunnel,
    SgiSegment,
    GtpTunnel,
    S1Segment,
    AirInterface,
    AccessInterface,
}

/// One traversed segment of the encapsulation walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    /// Node hosting the segment (for air interfaces: the sending side).
    pub location: String,
    pub header_overhead_bytes: u32,
}

/// Ordered segment list a packet traverses between two overlay hosts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncapsulationWalk {
    pub segments: Vec<Segment>,
    pub total_overhead_bytes: u32,
    pub lte_hop_count: usize,
}

/// Configurable tunnel header sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TunnelOverheads {
    pub gre_bytes: u32,
    pub gtp_bytes: u32,
}

impl Default for TunnelOverheads {
    fn default() -> Self {
        TunnelOverheads {
            gre_bytes: GRE_OVERHEAD_BYTES,
            gtp_bytes: GTP_OVERHEAD_BYTES,
        }
    }
}

fn seg(kind: SegmentKind, location: &str, overhead: u32) -> Segment {
    Segment {
        kind,
        location: location.to_string(),
        header_overhead_bytes: overhead,
    }
}

/// Builds the per-hop encapsulation walk along the route from `src` to
/// `dst`.
///
/// Up-hops (child → parent) traverse: the GRE tunnel opened at the child,
/// the child's access interface, the air interface, then S1/GTP at the
/// parent's eNB/EPC and finally its SGi interface where the hop's GRE
/// tunnel terminates. Down-hops mirror the order.
pub fn encapsulation_walk(
    src: &str,
    dst: &str,
    topology: &Topology,
) -> Result<EncapsulationWalk, OverlayError> {
    encapsulation_walk_with_overheads(src, dst, topology, TunnelOverheads::default())
}

pub fn encapsulation_walk_with_overheads(
    src: &str,
    dst: &str,
    topology: &Topology,
    overheads: TunnelOverheads,
) -> Result<EncapsulationWalk, OverlayError> {
    let path = route(src, dst, topology)?;
    let mut segments = vec![seg(SegmentKind::App, src, 0)];
    let mut hops = 0;
    for pair in path.windows(2) {
        let (a, b) = (pair[0].as_str(), pair[1].as_str());
        hops += 1;
        if topology.parent_of(a) == Some(b) {
            // Uplink: a is the child host, b the parent.
            segments.push(seg(SegmentKind::GreTunnel, a, overheads.gre_bytes));
            segments.push(seg(SegmentKind::AccessInterface, a, 0));
            segments.push(seg(SegmentKind::AirInterface, a, 0));
            segments.push(seg(SegmentKind::S1Segment, b, 0));
            segments.push(seg(SegmentKind::GtpTunnel, b, overheads.gtp_bytes));
            segments.push(seg(SegmentKind::SgiSegment, b, 0));
        } else {
            // Downlink: a is the parent host, b the child.
            debug_assert_eq!(topology.parent_of(b), Some(a));
            segments.push(seg(SegmentKind::SgiSegment, a, 0));
            segments.push(seg(SegmentKind::GtpTunnel, a, overheads.gtp_bytes));
            segments.push(seg(SegmentKind::S1Segment, a, 0));
            segments.push(seg(SegmentKind::AirInterface, a, 0));
            segments.push(seg(SegmentKind::AccessInterface, b, 0));
            segments.push(seg(SegmentKind::GreTunnel, b, overheads.gre_bytes));
        }
    }
    if src != dst {
        segments.push(seg(SegmentKind::App, dst, 0));
    }
    let total = segments.iter().map(|s| s.header_overhead_bytes).sum();
    Ok(EncapsulationWalk {
        segments,
        total_overhead_bytes: total,
        lte_hop_count: hops,
    })
}

/// On-wire size at each segment of the walk for a given application
/// payload, accounting for the tunnel headers stacked at that point.
///
/// `inner_header_bytes` is the constant transport header on the probe
/// itself (defaults elsewhere to IPv4 + ICMP echo).
pub fn payload_overhead(
    walk: &EncapsulationWalk,
    payload_bytes: u32,
    inner_header_bytes: u32,
) -> Vec<u32> {
    walk.segments
        .iter()
        .map(|s| {
            let base = payload_bytes + inner_header_bytes;
            match s.kind {
                SegmentKind::App => payload_bytes,
                // The hop's GRE wrap is present on every segment between
                // the tunnel entry and the SGi where it terminates.
                SegmentKind::GreTunnel
                | SegmentKind::AccessInterface
                | SegmentKind::SgiSegment => base + GRE_OVERHEAD_BYTES,
                // Over the air and on S1 the bearer adds the GTP stack.
                SegmentKind::AirInterface
                | SegmentKind::S1Segment
                | SegmentKind::GtpTunnel => base + GRE_OVERHEAD_BYTES + GTP_OVERHEAD_BYTES,
            }
        })
        .collect()
}
