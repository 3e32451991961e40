//! Deterministic simulator and analysis toolkit for chained, fully
//! autonomous small cells: each node combines client, base station and core
//! network, relays over disjoint FDD bands, and exposes an IP overlay.
//!
//! - [`rfmodel`]: two-ray ground-reflection propagation and RSRP budgets.
//! - [`cellnet`]: nodes, frequency planning, topology, attachment, coverage.
//! - [`overlay`]: MMSI addressing, tree routing, encapsulation walks.
//! - [`engine`]: seeded drive-test simulation with a calibrated latency model.
//! - [`analysis`]: tile maps, best-server fusion, CDFs, compliance, fitting.

pub mod analysis;
pub mod cellnet;
pub mod engine;
pub mod overlay;
pub mod rfmodel;
