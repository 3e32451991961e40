//! Calibrated per-hop latency model for probe round-trips.

use super::EngineError;
use crate::overlay::EncapsulationWalk;
use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

/// Per-hop jitter family. The draw is the whole per-hop service time, with
/// its mean pinned to `per_hop_mean_ms`, so the additive jitter around the
/// mean is zero-mean and the hop delay never goes negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum JitterSpec {
    /// Degenerate distribution: every hop takes exactly the mean.
    None,
    /// Log-normal service time; `sigma` is the shape parameter of the
    /// underlying normal.
    LogNormal { sigma: f64 },
}

/// Maps the RSRP deficit of a degraded link (dB below threshold + margin)
/// to added one-way delay: min(slope × deficit, cap). The cap models the
/// bounded number of link-layer retransmissions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub margin_db: f64,
    pub slope_ms_per_db: f64,
    pub cap_ms: f64,
}

impl PenaltySpec {
    /// No penalty regardless of deficit (wired lab conditions).
    pub fn none() -> Self {
        PenaltySpec {
            margin_db: 0.0,
            slope_ms_per_db: 0.0,
            cap_ms: 0.0,
        }
    }

    pub fn penalty_ms(&self, deficit_db: f64) -> f64 {
        (self.slope_ms_per_db * deficit_db.max(0.0)).min(self.cap_ms).max(0.0)
    }

    /// RSRP deficit relative to threshold + margin; zero for healthy links.
    pub fn deficit_db(&self, rsrp_dbm: f64, threshold_dbm: f64) -> f64 {
        (threshold_dbm + self.margin_db - rsrp_dbm).max(0.0)
    }
}

/// One-way latency composition: per traversed LTE hop a service-time draw
/// with mean `per_hop_mean_ms` plus a degraded-link penalty, plus
/// `host_processing_ms` per traversed host.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyModel {
    pub per_hop_mean_ms: f64,
    pub jitter: JitterSpec,
    pub penalty: PenaltySpec,
    pub host_processing_ms: f64,
    /// Serving threshold the penalty deficit is measured against.
    pub serving_threshold_dbm: f64,
}

impl LatencyModel {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.per_hop_mean_ms <= 0.0 || self.host_processing_ms < 0.0 {
            return Err(EngineError::InvalidLatencyModel(
                "delay contributions must be non-negative".into(),
            ));
        }
        if let JitterSpec::LogNormal { sigma } = self.jitter {
            if sigma < 0.0 {
                return Err(EngineError::InvalidLatencyModel("sigma must be >= 0".into()));
            }
        }
        if self.penalty.slope_ms_per_db < 0.0
            || self.penalty.cap_ms < 0.0
        {
            return Err(EngineError::InvalidLatencyModel(
                "penalty must map deficits to non-negative delays".into(),
            ));
        }
        Ok(())
    }

    fn hop_service_ms<R: Rng>(&self, rng: &mut R) -> f64 {
        match self.jitter {
            JitterSpec::None => self.per_hop_mean_ms,
            JitterSpec::LogNormal { sigma } if sigma == 0.0 => self.per_hop_mean_ms,
            JitterSpec::LogNormal { sigma } => {
                // Pin the distribution mean to per_hop_mean: mu = ln m - s^2/2.
                let mu = self.per_hop_mean_ms.ln() - sigma * sigma / 2.0;
                LogNormal::new(mu, sigma).expect("validated sigma").sample(rng)
            }
        }
    }
}

/// Solves per-hop mean and host processing time from the two wired
/// end-to-end means (single-hop and two-hop), using hosts = hops + 1:
/// h + 2p = single and 2h + 3p = two.
pub fn from_lab_means(
    single_hop_one_way_ms: f64,
    two_hop_one_way_ms: f64,
) -> Result<(f64, f64), EngineError> {
    let host_processing = 2.0 * single_hop_one_way_ms - two_hop_one_way_ms;
    let per_hop = single_hop_one_way_ms - 2.0 * host_processing;
    if host_processing < 0.0 || per_hop <= 0.0 {
        return Err(EngineError::InvalidLatencyModel(format!(
            "lab means ({single_hop_one_way_ms}, {two_hop_one_way_ms}) have no non-negative decomposition"
        )));
    }
    Ok((per_hop, host_processing))
}

/// Draws one probe round-trip time in milliseconds.
///
/// rtt = 2 × [ Σ_hops (service + penalty(deficit)) + hosts × host_processing ],
/// hosts = lte_hop_count + 1. An empty walk (src == dst) is the loopback
/// case: rtt = 2 × host_processing.
pub fn sample_rtt<R: Rng>(
    walk: &EncapsulationWalk,
    rsrp_per_hop_dbm: &[f64],
    model: &LatencyModel,
    rng: &mut R,
) -> Result<f64, EngineError> {
    if rsrp_per_hop_dbm.len() != walk.lte_hop_count {
        return Err(EngineError::RsrpHopMismatch {
            hops: walk.lte_hop_count,
            rsrps: rsrp_per_hop_dbm.len(),
        });
    }
    let hosts = walk.lte_hop_count + 1;
    let mut one_way = hosts as f64 * model.host_processing_ms;
    for &rsrp in rsrp_per_hop_dbm {
        let deficit = model.penalty.deficit_db(rsrp, model.serving_threshold_dbm);
        one_way += model.hop_service_ms(rng) + model.penalty.penalty_ms(deficit);
    }
    Ok(2.0 * one_way)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cellnet::{build_topology, FrequencyAllocation, NodeSpec, PositionSource, Roles};
    use crate::overlay::encapsulation_walk;
    use crate::rfmodel::{Polarization, RadioConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn chain() -> crate::cellnet::Topology {
        let radio = RadioConfig {
            carrier_frequency_hz: 5.9e9,
            bandwidth_hz: 5e6,
            tx_power_dbm: 0.0,
            antenna_gain_tx_dbi: 0.0,
            antenna_gain_rx_dbi: 0.0,
            antenna_height_m: 2.0,
            polarization: Polarization::Vertical,
        };
        let node = |id: &str, mmsi: u32, roles: Roles| NodeSpec {
            id: id.into(),
            mmsi,
            roles,
            served_allocation: roles.cell.then(|| {
                FrequencyAllocation::fdd(
                    (5.8e9 + mmsi as f64 * 2e7, 5.8e9 + mmsi as f64 * 2e7 + 5e6),
                    (6.0e9 + mmsi as f64 * 2e7, 6.0e9 + mmsi as f64 * 2e7 + 5e6),
                )
            }),
            radio: radio.clone(),
            position: PositionSource::Fixed { x_m: 0.0, y_m: 0.0 },
        };
        build_topology(
            &[
                node("stationary", 1, Roles::cell()),
                node("mobile", 2, Roles::relay()),
                node("ue", 3, Roles::client()),
            ],
            &[
                ("mobile".into(), "stationary".into()),
                ("ue".into(), "mobile".into()),
            ],
        )
        .unwrap()
    }

    fn lab_model() -> LatencyModel {
        let (per_hop, host) = from_lab_means(7.0, 13.55).unwrap();
        LatencyModel {
            per_hop_mean_ms: per_hop,
            jitter: JitterSpec::LogNormal { sigma: 0.30 },
            penalty: PenaltySpec::none(),
            host_processing_ms: host,
            serving_threshold_dbm: -110.0,
        }
    }

    #[test]
    fn lab_calibration_solves_the_linear_system() {
        // By hand: p = 2*7 - 13.55 = 0.45, h = 7 - 2*0.45 = 6.1.
        let (h, p) = from_lab_means(7.0, 13.55).unwrap();
        assert!((h - 6.1).abs() < 1e-12);
        assert!((p - 0.45).abs() < 1e-12);
        // Composition check: the calibrated terms reproduce both means.
        assert!((h + 2.0 * p - 7.0).abs() < 1e-12);
        assert!((2.0 * h + 3.0 * p - 13.55).abs() < 1e-12);
        // Degenerate inputs have no valid decomposition.
        assert!(from_lab_means(7.0, 15.0).is_err());
    }

    #[test]
    fn single_hop_mean_matches_lab_calibration() {
        let topo = chain();
        let walk = encapsulation_walk("mobile", "stationary", &topo).unwrap();
        let model = lab_model();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| sample_rtt(&walk, &[-70.0], &model, &mut rng).unwrap() / 2.0)
            .sum::<f64>()
            / n as f64;
        assert!((mean - 7.0).abs() / 7.0 < 0.01, "mean {}", mean);
    }

    #[test]
    fn two_hop_mean_composes_from_per_hop_terms() {
        let topo = chain();
        let walk = encapsulation_walk("ue", "stationary", &topo).unwrap();
        let model = lab_model();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| sample_rtt(&walk, &[-70.0, -70.0], &model, &mut rng).unwrap() / 2.0)
            .sum::<f64>()
            / n as f64;
        assert!((mean - 13.55).abs() / 13.55 < 0.01, "mean {}", mean);
    }

    #[test]
    fn degenerate_jitter_is_deterministic() {
        let topo = chain();
        let walk = encapsulation_walk("ue", "stationary", &topo).unwrap();
        let mut model = lab_model();
        model.jitter = JitterSpec::None;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let rtt = sample_rtt(&walk, &[-70.0, -70.0], &model, &mut rng).unwrap();
            assert!((rtt - 2.0 * (2.0 * 6.1 + 3.0 * 0.45)).abs() < 1e-12);
        }
    }

    #[test]
    fn loopback_costs_one_host_each_way() {
        let topo = chain();
        let walk = encapsulation_walk("ue", "ue", &topo).unwrap();
        let model = lab_model();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rtt = sample_rtt(&walk, &[], &model, &mut rng).unwrap();
        assert!((rtt - 2.0 * 0.45).abs() < 1e-12);
    }

    #[test]
    fn rsrp_list_must_match_hop_count() {
        let topo = chain();
        let walk = encapsulation_walk("ue", "stationary", &topo).unwrap();
        let model = lab_model();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(matches!(
            sample_rtt(&walk, &[-70.0], &model, &mut rng),
            Err(EngineError::RsrpHopMismatch { .. })
        ));
    }

    #[test]
    fn penalty_is_capped_linear_in_deficit() {
        let p = PenaltySpec {
            margin_db: 15.0,
            slope_ms_per_db: 1.0,
            cap_ms: 11.0,
        };
        assert_eq!(p.penalty_ms(p.deficit_db(-80.0, -110.0)), 0.0);
        let d = p.deficit_db(-100.0, -110.0); // 5 dB below -95
        assert!((d - 5.0).abs() < 1e-12);
        assert!((p.penalty_ms(d) - 5.0).abs() < 1e-12);
        assert_eq!(p.penalty_ms(p.deficit_db(-140.0, -110.0)), 11.0);
    }

    #[test]
    fn degraded_hop_adds_penalty_to_the_mean() {
        let topo = chain();
        let walk = encapsulation_walk("mobile", "stationary", &topo).unwrap();
        let mut model = lab_model();
        model.penalty = PenaltySpec {
            margin_db: 15.0,
            slope_ms_per_db: 1.0,
            cap_ms: 11.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 100_000;
        // RSRP -100 dBm: 5 dB below threshold+margin, so +5 ms one-way.
        let mean: f64 = (0..n)
            .map(|_| sample_rtt(&walk, &[-100.0], &model, &mut rng).unwrap() / 2.0)
            .sum::<f64>()
            / n as f64;
        assert!((mean - 12.0).abs() / 12.0 < 0.01, "mean {}", mean);
    }
}
