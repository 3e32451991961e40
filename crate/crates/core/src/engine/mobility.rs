//! Lane trajectories and constant-speed mobility interpolation.

use super::EngineError;
use serde::{Deserialize, Serialize};

/// A constant-speed piecewise-linear trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilityTrace {
    /// Ordered (x, y) waypoints in metres.
    pub waypoints: Vec<(f64, f64)>,
    pub speed_mps: f64,
    /// Nominal sampling cadence of the trace; the simulation samples at the
    /// probe interval regardless.
    pub sampling_interval_s: f64,
}

impl MobilityTrace {
    pub fn new(waypoints: Vec<(f64, f64)>, speed_mps: f64) -> Result<Self, EngineError> {
        let t = MobilityTrace {
            waypoints,
            speed_mps,
            sampling_interval_s: 0.1,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.speed_mps <= 0.0 {
            return Err(EngineError::InvalidTrace(format!(
                "speed must be positive, got {}",
                self.speed_mps
            )));
        }
        if self.waypoints.is_empty() {
            return Err(EngineError::InvalidTrace("trace has no waypoints".into()));
        }
        for w in self.waypoints.windows(2) {
            if w[0] == w[1] {
                return Err(EngineError::InvalidTrace(format!(
                    "consecutive waypoints identical at {:?}",
                    w[0]
                )));
            }
        }
        Ok(())
    }

    pub fn total_length_m(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| dist(w[0], w[1]))
            .sum()
    }

    pub fn duration_s(&self) -> f64 {
        self.total_length_m() / self.speed_mps
    }

    /// Longest single straight segment, in metres.
    pub fn longest_segment_m(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| dist(w[0], w[1]))
            .fold(0.0, f64::max)
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Arc-length parameterized position at `time_s` along the trace.
pub fn step_mobility(trace: &MobilityTrace, time_s: f64) -> Result<(f64, f64), EngineError> {
    let duration = trace.duration_s();
    if !(0.0..=duration + 1e-9).contains(&time_s) {
        return Err(EngineError::TimeOutOfRange {
            time_s,
            duration_s: duration,
        });
    }
    let mut remaining = trace.speed_mps * time_s;
    for w in trace.waypoints.windows(2) {
        let seg = dist(w[0], w[1]);
        if remaining <= seg {
            let f = remaining / seg;
            return Ok((
                w[0].0 + f * (w[1].0 - w[0].0),
                w[0].1 + f * (w[1].1 - w[0].1),
            ));
        }
        remaining -= seg;
    }
    Ok(*trace.waypoints.last().expect("validated non-empty"))
}

/// Half-circle connector between two lane ends at the same road end,
/// bulging beyond the road section.
fn turn_arc(from: (f64, f64), to: (f64, f64), beyond: f64) -> Vec<(f64, f64)> {
    let r = (to.1 - from.1).abs() / 2.0;
    let cy = (from.1 + to.1) / 2.0;
    let sweep_up = to.1 > from.1;
    let n = 8;
    (1..n)
        .map(|i| {
            let theta = std::f64::consts::PI * i as f64 / n as f64;
            let x = from.0 + beyond * theta.sin();
            let y = if sweep_up {
                cy - r * theta.cos()
            } else {
                cy + r * theta.cos()
            };
            (x, y)
        })
        .collect()
}

/// Tight turnaround at a road end within the same lane.
fn turnaround(at: (f64, f64), beyond: f64) -> Vec<(f64, f64)> {
    vec![
        (at.0 + 0.6 * beyond, at.1 + 1.0),
        (at.0 + beyond, at.1),
        (at.0 + 0.6 * beyond, at.1 - 1.0),
    ]
}

/// Drive-test tour: the road split into `lane_count` lanes followed in both
/// directions at constant speed. Returns 2 × lane_count traces, one per
/// pass; each pass is a full straight of `road_length_m` preceded (except
/// the first) by the turn connecting it to the previous pass, so that the
/// traces chain into one continuous tour.
///
/// Lanes sit at y = spacing·(k + ½); the first pass starts at (0, spacing/2).
pub fn generate_lane_trajectories(
    road_length_m: f64,
    lane_count: usize,
    lane_spacing_m: f64,
    speed_mps: f64,
) -> Vec<MobilityTrace> {
    assert!(lane_count >= 1, "need at least one lane");
    assert!(
        road_length_m > 0.0 && lane_spacing_m > 0.0 && speed_mps > 0.0,
        "dimensions must be positive"
    );
    let lane_y = |k: usize| lane_spacing_m * (k as f64 + 0.5);
    // Serpentine over lanes 0..n, then back over n..0 with directions
    // flipped, so every lane is driven once in each direction.
    let mut passes: Vec<(usize, bool)> = Vec::with_capacity(2 * lane_count);
    for k in 0..lane_count {
        passes.push((k, k % 2 == 0)); // true = +x direction
    }
    for k in (0..lane_count).rev() {
        passes.push((k, k % 2 != 0));
    }
    let mut traces = Vec::with_capacity(passes.len());
    let mut prev_end: Option<(f64, f64)> = None;
    for (k, forward) in passes {
        let y = lane_y(k);
        let (start, end) = if forward {
            ((0.0, y), (road_length_m, y))
        } else {
            ((road_length_m, y), (0.0, y))
        };
        let mut waypoints = Vec::new();
        if let Some(pe) = prev_end {
            debug_assert!((pe.0 - start.0).abs() < 1e-9, "passes must share a road end");
            waypoints.push(pe);
            let beyond = if start.0 < road_length_m / 2.0 {
                -lane_spacing_m / 2.0
            } else {
                lane_spacing_m / 2.0
            };
            if (pe.1 - start.1).abs() < 1e-9 {
                waypoints.extend(turnaround(pe, beyond));
            } else {
                waypoints.extend(turn_arc(pe, start, beyond));
            }
        }
        waypoints.push(start);
        waypoints.push(end);
        prev_end = Some(end);
        traces.push(MobilityTrace {
            waypoints,
            speed_mps,
            sampling_interval_s: 0.1,
        });
    }
    traces
}

/// Concatenates chained traces into one continuous trace, dropping
/// duplicated joint waypoints.
pub fn concat_traces(traces: &[MobilityTrace]) -> Result<MobilityTrace, EngineError> {
    let first = traces
        .first()
        .ok_or_else(|| EngineError::InvalidTrace("no traces to concatenate".into()))?;
    let mut waypoints: Vec<(f64, f64)> = Vec::new();
    for t in traces {
        if (t.speed_mps - first.speed_mps).abs() > 1e-12 {
            return Err(EngineError::InvalidTrace(
                "concatenated traces must share one speed".into(),
            ));
        }
        for &w in &t.waypoints {
            if waypoints.last() != Some(&w) {
                waypoints.push(w);
            }
        }
    }
    MobilityTrace::new(waypoints, first.speed_mps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn six_lanes_give_twelve_full_length_passes() {
        let traces = generate_lane_trajectories(200.0, 6, 4.0, 1.4);
        assert_eq!(traces.len(), 12);
        for t in &traces {
            t.validate().unwrap();
            assert!((t.longest_segment_m() - 200.0).abs() < 1e-9);
        }
        // Every lane is driven in both directions.
        let mut seen = std::collections::BTreeSet::new();
        for t in &traces {
            let n = t.waypoints.len();
            let (a, b) = (t.waypoints[n - 2], t.waypoints[n - 1]);
            seen.insert(((a.1 * 10.0) as i64, b.0 > a.0));
        }
        assert_eq!(seen.len(), 12);
    }

    #[test]
    fn single_lane_gives_out_and_back() {
        let traces = generate_lane_trajectories(100.0, 1, 4.0, 1.4);
        assert_eq!(traces.len(), 2);
        let straight = |t: &MobilityTrace| {
            let n = t.waypoints.len();
            (t.waypoints[n - 2], t.waypoints[n - 1])
        };
        assert_eq!(straight(&traces[0]), ((0.0, 2.0), (100.0, 2.0)));
        assert_eq!(straight(&traces[1]), ((100.0, 2.0), (0.0, 2.0)));
    }

    #[test]
    fn pass_time_is_road_over_speed_plus_turn() {
        let traces = generate_lane_trajectories(200.0, 6, 4.0, 1.4);
        let nominal = 200.0 / 1.4;
        // First pass has no turn at all.
        assert!((traces[0].duration_s() - nominal).abs() < 1e-9);
        for t in &traces[1..] {
            let turn_time = t.duration_s() - nominal;
            assert!(
                turn_time > 0.0 && turn_time < 10.0,
                "turn time {} s out of range",
                turn_time
            );
        }
    }

    #[test]
    fn tour_concatenation_is_continuous() {
        let traces = generate_lane_trajectories(160.0, 6, 4.0, 1.4);
        let tour = concat_traces(&traces).unwrap();
        tour.validate().unwrap();
        let total: f64 = traces.iter().map(|t| t.total_length_m()).sum();
        assert!((tour.total_length_m() - total).abs() < 1e-6);
    }

    #[test]
    fn step_mobility_endpoints_and_midpoint() {
        let t = MobilityTrace::new(vec![(0.0, 0.0), (100.0, 0.0)], 1.4).unwrap();
        assert_eq!(step_mobility(&t, 0.0).unwrap(), (0.0, 0.0));
        let mid = step_mobility(&t, 50.0).unwrap();
        assert!((mid.0 - 70.0).abs() < 1e-9 && mid.1 == 0.0);
        assert!(step_mobility(&t, -1.0).is_err());
        assert!(step_mobility(&t, t.duration_s() + 1.0).is_err());
    }

    #[test]
    fn position_is_lipschitz_in_time() {
        let traces = generate_lane_trajectories(120.0, 3, 4.0, 1.4);
        let tour = concat_traces(&traces).unwrap();
        let dur = tour.duration_s();
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..2000 {
            let t = rng.gen_range(0.0..dur - 0.5);
            let eps = rng.gen_range(0.0..0.5);
            let a = step_mobility(&tour, t).unwrap();
            let b = step_mobility(&tour, t + eps).unwrap();
            let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
            assert!(d <= tour.speed_mps * eps + 1e-9, "jump {} over {}", d, eps);
        }
    }

    #[test]
    fn distance_traveled_matches_speed_times_time() {
        let traces = generate_lane_trajectories(160.0, 6, 4.0, 1.4);
        let tour = concat_traces(&traces).unwrap();
        let dur = tour.duration_s();
        let steps = 20_000usize;
        let mut traveled = 0.0;
        let mut prev = step_mobility(&tour, 0.0).unwrap();
        for i in 1..=steps {
            let t = dur * i as f64 / steps as f64;
            let p = step_mobility(&tour, t).unwrap();
            traveled += ((p.0 - prev.0).powi(2) + (p.1 - prev.1).powi(2)).sqrt();
            prev = p;
        }
        // Chord sampling can only undershoot at corners; at this step size
        // the relative error stays way below the contract.
        let expected = tour.speed_mps * dur;
        assert!(
            (traveled - expected).abs() / expected < 1e-4,
            "traveled {} vs {}",
            traveled,
            expected
        );
    }
}
