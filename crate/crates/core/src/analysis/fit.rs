//! Fitting the two-ray model to measured RSRP-versus-distance samples.

use super::AnalysisError;
use crate::rfmodel::{
    self, GroundParameters, Polarization, RadioConfig,
};
use serde::{Deserialize, Serialize};

/// Geometry of a fit: the propagation parameters the samples were taken
/// under.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoRayGeometry {
    pub tx_height_m: f64,
    pub rx_height_m: f64,
    pub frequency_hz: f64,
    #[serde(default)]
    pub polarization: Polarization,
}

impl TwoRayGeometry {
    fn radios(&self) -> (RadioConfig, RadioConfig) {
        let base = RadioConfig {
            carrier_frequency_hz: self.frequency_hz,
            bandwidth_hz: 5e6,
            tx_power_dbm: 0.0,
            antenna_gain_tx_dbi: 0.0,
            antenna_gain_rx_dbi: 0.0,
            antenna_height_m: self.tx_height_m,
            polarization: self.polarization,
        };
        let mut rx = base.clone();
        rx.antenna_height_m = self.rx_height_m;
        (base, rx)
    }

    /// Two-ray curve value at distance d, at an arbitrary zero-dB power
    /// reference; the fitted offset absorbs EIRP, gains, and the RSRP
    /// conversion.
    pub fn model_db(&self, ground: &GroundParameters, distance_m: f64) -> f64 {
        let (tx, rx) = self.radios();
        rfmodel::two_ray_rx_power(&tx, &rx, distance_m, ground).expect("valid geometry")
    }

    /// Deepest fade of the model curve on [lo, hi] at `step_m` resolution.
    pub fn deepest_fade_m(&self, ground: &GroundParameters, lo: f64, hi: f64, step_m: f64) -> f64 {
        let (tx, rx) = self.radios();
        rfmodel::deepest_fade_distance(&tx, &rx, ground, lo, hi, step_m).expect("valid geometry")
    }
}

/// Result of the one-parameter least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoRayFit {
    /// Additive dB offset between samples and the model curve.
    pub offset_db: f64,
    /// RMS of the residuals after removing the offset.
    pub residual_rms_db: f64,
}

/// Least-squares fit of a single additive dB offset between the two-ray
/// model curve and (distance, RSRP) samples. The problem is 1-D convex, so
/// the closed form is the mean residual.
pub fn fit_two_ray(
    samples: &[(f64, f64)],
    ground: &GroundParameters,
    geometry: &TwoRayGeometry,
) -> Result<TwoRayFit, AnalysisError> {
    let distinct = {
        let mut ds: Vec<f64> = samples.iter().map(|s| s.0).collect();
        ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ds.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        ds.len()
    };
    if samples.len() < 2 || distinct < 2 {
        return Err(AnalysisError::DegenerateFit);
    }
    let residuals: Vec<f64> = samples
        .iter()
        .map(|&(d, rsrp)| rsrp - geometry.model_db(ground, d))
        .collect();
    let offset = residuals.iter().sum::<f64>() / residuals.len() as f64;
    let rms = (residuals
        .iter()
        .map(|r| (r - offset).powi(2))
        .sum::<f64>()
        / residuals.len() as f64)
        .sqrt();
    Ok(TwoRayFit {
        offset_db: offset,
        residual_rms_db: rms,
    })
}
