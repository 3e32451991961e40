//! Evaluation pipeline over sample logs: tile aggregation, best-server
//! fusion, coverage extension, latency CDFs, reliability compliance, and
//! two-ray model fitting.

mod cdf;
mod fit;
mod io;
mod tiles;

pub use cdf::{
    cross_probability_exact, cross_probability_mc, v2x_compliance, Cdf, ComplianceReport,
};
pub use fit::{fit_two_ray, TwoRayFit, TwoRayGeometry};
pub use io::{
    read_latency_csv, read_samples, write_cdf_csv, write_cdf_table, write_samples_csv,
    write_samples_ndjson, write_tilemap_csv, write_tilemap_table,
};
pub use tiles::{
    best_server, coverage_extension, lower_median, tile_aggregate, RoadAxis, SampleField,
    ServerChoice, TileMap, DEFAULT_TILE_HEIGHT_M, DEFAULT_TILE_WIDTH_M,
};

use crate::engine::SampleRecord;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no samples to analyze")]
    EmptyInput,
    #[error("tile maps use different grids")]
    GridMismatch,
    #[error("single-hop map has no covered tile to use as a baseline")]
    NoBaseline,
    #[error("all samples share one distance, the offset fit is degenerate")]
    DegenerateFit,
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One-way latency samples of a run, in probe order.
pub fn one_way_samples(records: &[SampleRecord]) -> Vec<f64> {
    records.iter().filter_map(|r| r.one_way_ms).collect()
}
