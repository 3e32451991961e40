//! Spatial tile aggregation, best-server fusion, and coverage-extension
//! measurement.

use super::AnalysisError;
use crate::engine::SampleRecord;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const DEFAULT_TILE_WIDTH_M: f64 = 4.0;
pub const DEFAULT_TILE_HEIGHT_M: f64 = 2.0;

/// Which sample field a map aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleField {
    Rsrp,
    Latency,
}

impl SampleField {
    fn extract(&self, r: &SampleRecord) -> Option<f64> {
        match self {
            SampleField::Rsrp => r.rsrp_dbm,
            SampleField::Latency => r.one_way_ms,
        }
    }
}

/// Spatial grid of per-tile aggregate statistics. Tiles with no samples are
/// absent, never zero-filled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileMap {
    pub origin: (f64, f64),
    pub tile_width_m: f64,
    pub tile_height_m: f64,
    pub cells: BTreeMap<(i64, i64), f64>,
    pub sample_counts: BTreeMap<(i64, i64), usize>,
}

impl TileMap {
    pub fn tile_of(&self, x_m: f64, y_m: f64) -> (i64, i64) {
        (
            ((x_m - self.origin.0) / self.tile_width_m).floor() as i64,
            ((y_m - self.origin.1) / self.tile_height_m).floor() as i64,
        )
    }

    pub fn tile_center(&self, tile: (i64, i64)) -> (f64, f64) {
        (
            self.origin.0 + (tile.0 as f64 + 0.5) * self.tile_width_m,
            self.origin.1 + (tile.1 as f64 + 0.5) * self.tile_height_m,
        )
    }

    fn same_grid(&self, other: &TileMap) -> bool {
        self.origin == other.origin
            && self.tile_width_m == other.tile_width_m
            && self.tile_height_m == other.tile_height_m
    }
}

/// Lower median: for even counts the smaller of the two central order
/// statistics, so the aggregate is always a value some sample produced.
pub fn lower_median(values: &mut Vec<f64>) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[(values.len() - 1) / 2]
}

/// Aggregates samples into per-tile lower medians of the chosen field.
/// Samples without that field are skipped; an empty input yields an empty
/// map.
pub fn tile_aggregate(
    samples: &[SampleRecord],
    field: SampleField,
    tile_width_m: f64,
    tile_height_m: f64,
    origin: (f64, f64),
) -> TileMap {
    assert!(tile_width_m > 0.0 && tile_height_m > 0.0);
    let mut map = TileMap {
        origin,
        tile_width_m,
        tile_height_m,
        cells: BTreeMap::new(),
        sample_counts: BTreeMap::new(),
    };
    let mut buckets: BTreeMap<(i64, i64), Vec<f64>> = BTreeMap::new();
    for r in samples {
        if let Some(v) = field.extract(r) {
            buckets.entry(map.tile_of(r.x_m, r.y_m)).or_default().push(v);
        }
    }
    for (tile, mut vals) in buckets {
        map.sample_counts.insert(tile, vals.len());
        map.cells.insert(tile, lower_median(&mut vals));
    }
    map
}

/// Which source map won a best-server tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServerChoice {
    SingleHop,
    TwoHop,
}

/// Per-tile selection of the better serving configuration: higher wins for
/// RSRP, lower wins for latency; ties go to the single-hop map (fewer
/// hops); tiles present in only one map take that map's value.
pub fn best_server(
    map_single: &TileMap,
    map_two_hop: &TileMap,
    field: SampleField,
) -> Result<(TileMap, BTreeMap<(i64, i64), ServerChoice>), AnalysisError> {
    if !map_single.same_grid(map_two_hop) {
        return Err(AnalysisError::GridMismatch);
    }
    let mut fused = TileMap {
        origin: map_single.origin,
        tile_width_m: map_single.tile_width_m,
        tile_height_m: map_single.tile_height_m,
        cells: BTreeMap::new(),
        sample_counts: BTreeMap::new(),
    };
    let mut provenance = BTreeMap::new();
    let tiles: std::collections::BTreeSet<(i64, i64)> = map_single
        .cells
        .keys()
        .chain(map_two_hop.cells.keys())
        .copied()
        .collect();
    for tile in tiles {
        let (value, choice) = match (map_single.cells.get(&tile), map_two_hop.cells.get(&tile)) {
            (Some(&a), Some(&b)) => {
                let two_wins = match field {
                    SampleField::Rsrp => b > a,
                    SampleField::Latency => b < a,
                };
                if two_wins {
                    (b, ServerChoice::TwoHop)
                } else {
                    (a, ServerChoice::SingleHop)
                }
            }
            (Some(&a), None) => (a, ServerChoice::SingleHop),
            (None, Some(&b)) => (b, ServerChoice::TwoHop),
            (None, None) => unreachable!(),
        };
        let counts = match choice {
            ServerChoice::SingleHop => map_single.sample_counts.get(&tile),
            ServerChoice::TwoHop => map_two_hop.sample_counts.get(&tile),
        };
        fused.cells.insert(tile, value);
        fused.sample_counts.insert(tile, counts.copied().unwrap_or(0));
        provenance.insert(tile, choice);
    }
    Ok((fused, provenance))
}

/// Axis along which the road runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoadAxis {
    X,
    Y,
}

fn farthest_covered(map: &TileMap, threshold_dbm: f64, axis: RoadAxis) -> Option<f64> {
    map.cells
        .iter()
        .filter(|(_, &v)| v >= threshold_dbm)
        .map(|(&tile, _)| {
            let c = map.tile_center(tile);
            match axis {
                RoadAxis::X => c.0,
                RoadAxis::Y => c.1,
            }
        })
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
}

/// Along-road coverage gained by the best-server fusion: the difference
/// between the farthest tile centers whose median RSRP meets the attach
/// threshold in the best map versus the single-hop map.
pub fn coverage_extension(
    map_single: &TileMap,
    map_best: &TileMap,
    attach_threshold_dbm: f64,
    road_axis: RoadAxis,
) -> Result<f64, AnalysisError> {
    if !map_single.same_grid(map_best) {
        return Err(AnalysisError::GridMismatch);
    }
    let single = farthest_covered(map_single, attach_threshold_dbm, road_axis)
        .ok_or(AnalysisError::NoBaseline)?;
    let best = farthest_covered(map_best, attach_threshold_dbm, road_axis)
        .ok_or(AnalysisError::NoBaseline)?;
    Ok(best - single)
}
