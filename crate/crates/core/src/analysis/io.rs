//! Sample-log and table IO: newline-delimited JSON and CSV for logs, CSV
//! and gnuplot-style whitespace tables for maps and CDFs.

use super::tiles::{ServerChoice, TileMap};
use super::AnalysisError;
use super::Cdf;
use crate::engine::SampleRecord;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub fn write_samples_ndjson(path: &Path, records: &[SampleRecord]) -> Result<(), AnalysisError> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_samples_csv(path: &Path, records: &[SampleRecord]) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a sample log; the format is chosen by extension (`.csv` for CSV,
/// anything else is treated as newline-delimited JSON).
pub fn read_samples(path: &Path) -> Result<Vec<SampleRecord>, AnalysisError> {
    if path.extension().is_some_and(|e| e == "csv") {
        let mut rdr = csv::Reader::from_path(path)?;
        let mut out = Vec::new();
        for rec in rdr.deserialize() {
            out.push(rec?);
        }
        Ok(out)
    } else {
        let f = BufReader::new(File::open(path)?);
        let mut out = Vec::new();
        for line in f.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            out.push(serde_json::from_str(&line)?);
        }
        Ok(out)
    }
}

/// Reads a one-column latency CSV (header `latency_ms`), the format of the
/// bundled public-network baseline.
pub fn read_latency_csv(path: &Path) -> Result<Vec<f64>, AnalysisError> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        let row: BTreeMap<String, f64> = rec?;
        let v = row
            .get("latency_ms")
            .ok_or_else(|| AnalysisError::Format("missing latency_ms column".into()))?;
        out.push(*v);
    }
    Ok(out)
}

fn tile_rows(map: &TileMap, provenance: Option<&BTreeMap<(i64, i64), ServerChoice>>) -> Vec<String> {
    map.cells
        .iter()
        .map(|(&tile, &value)| {
            let (cx, cy) = map.tile_center(tile);
            let count = map.sample_counts.get(&tile).copied().unwrap_or(0);
            match provenance.and_then(|p| p.get(&tile)) {
                Some(ServerChoice::SingleHop) => {
                    format!("{},{},{},{},{},{},single_hop", tile.0, tile.1, cx, cy, value, count)
                }
                Some(ServerChoice::TwoHop) => {
                    format!("{},{},{},{},{},{},two_hop", tile.0, tile.1, cx, cy, value, count)
                }
                None => format!("{},{},{},{},{},{}", tile.0, tile.1, cx, cy, value, count),
            }
        })
        .collect()
}

pub fn write_tilemap_csv(
    path: &Path,
    map: &TileMap,
    provenance: Option<&BTreeMap<(i64, i64), ServerChoice>>,
) -> Result<(), AnalysisError> {
    let mut w = BufWriter::new(File::create(path)?);
    if provenance.is_some() {
        writeln!(w, "i,j,x_m,y_m,value,count,source")?;
    } else {
        writeln!(w, "i,j,x_m,y_m,value,count")?;
    }
    for row in tile_rows(map, provenance) {
        writeln!(w, "{row}")?;
    }
    w.flush()?;
    Ok(())
}

/// Gnuplot-compatible whitespace table of the same tile data.
pub fn write_tilemap_table(path: &Path, map: &TileMap) -> Result<(), AnalysisError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# i j x_m y_m value count")?;
    for row in tile_rows(map, None) {
        writeln!(w, "{}", row.replace(',', " "))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_cdf_csv(path: &Path, cdf: &Cdf) -> Result<(), AnalysisError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "latency_ms,cumulative_probability")?;
    let n = cdf.len() as f64;
    for (i, v) in cdf.values().iter().enumerate() {
        writeln!(w, "{},{}", v, (i + 1) as f64 / n)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_cdf_table(path: &Path, cdf: &Cdf) -> Result<(), AnalysisError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# latency_ms cumulative_probability")?;
    let n = cdf.len() as f64;
    for (i, v) in cdf.values().iter().enumerate() {
        writeln!(w, "{} {}", v, (i + 1) as f64 / n)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::LinkState;
    use tempfile::tempdir;

    fn record(i: usize) -> SampleRecord {
        SampleRecord {
            time_s: i as f64 * 0.1,
            x_m: i as f64,
            y_m: 2.0,
            serving_node: (i % 3 != 0).then(|| "stationary".to_string()),
            rsrp_dbm: Some(-90.0 - i as f64),
            rtt_ms: (i % 3 != 0).then(|| 14.0 + i as f64),
            one_way_ms: (i % 3 != 0).then(|| (14.0 + i as f64) / 2.0),
            link_state: LinkState::Attached,
            hop_count: 1,
        }
    }

    #[test]
    fn ndjson_and_csv_round_trip() {
        let dir = tempdir().unwrap();
        let records: Vec<SampleRecord> = (0..25).map(record).collect();
        let nd = dir.path().join("log.ndjson");
        write_samples_ndjson(&nd, &records).unwrap();
        assert_eq!(read_samples(&nd).unwrap(), records);
        let cs = dir.path().join("log.csv");
        write_samples_csv(&cs, &records).unwrap();
        assert_eq!(read_samples(&cs).unwrap(), records);
    }

    #[test]
    fn latency_csv_reads_the_named_column() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("baseline.csv");
        std::fs::write(&p, "latency_ms\n10.5\n20.25\n").unwrap();
        assert_eq!(read_latency_csv(&p).unwrap(), vec![10.5, 20.25]);
        std::fs::write(&p, "other\n10.5\n").unwrap();
        assert!(read_latency_csv(&p).is_err());
    }
}
