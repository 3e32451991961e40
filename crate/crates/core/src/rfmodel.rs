//! Physical-layer abstraction: two-ray ground-reflection path loss with a
//! complex ground reflection coefficient, link budget, and RSRP derivation.
//!
//! All complex arithmetic follows the engineering time convention e^{+jωt}.
//! Under that convention a lossy ground has a *negative* imaginary
//! permittivity, εc = εr − jσ/(2πfε₀), and propagation phasors are e^{−jkd}.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum permittivity in F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854e-12;

/// Minimum supported link distance in metres; the two-path sum is singular
/// at d → 0 and the model is meaningless below antenna near fields anyway.
pub const MIN_DISTANCE_M: f64 = 1.0;

/// Width of one LTE resource block in Hz (12 subcarriers of 15 kHz).
pub const RESOURCE_BLOCK_HZ: f64 = 180e3;

#[derive(Debug, Error, PartialEq)]
pub enum RfError {
    #[error("frequency must be positive, got {0} Hz")]
    NonPositiveFrequency(f64),
    #[error("grazing angle must be in (0, pi/2], got {0} rad")]
    GrazingAngleOutOfRange(f64),
    #[error("distance must be >= {MIN_DISTANCE_M} m, got {0} m")]
    DistanceBelowMinimum(f64),
    #[error("antenna heights must be positive, got {0} m and {1} m")]
    NonPositiveHeight(f64, f64),
    #[error("bandwidth {0} Hz is not a whole number of 180 kHz resource blocks")]
    BandwidthNotResourceBlocks(f64),
    #[error("ground parameters out of range: conductivity {0} S/m, permittivity {1}")]
    InvalidGround(f64, f64),
}

/// Antenna polarization of the transmitted wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    /// Default: typical vehicular monopoles are vertically polarized.
    #[default]
    Vertical,
    Horizontal,
}

/// Electrical ground parameters of the reflecting surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundParameters {
    /// Conductivity σ in S/m.
    pub conductivity_s_per_m: f64,
    /// Real relative permittivity εr (dimensionless).
    pub relative_permittivity: f64,
}

impl GroundParameters {
    /// Wet ground, the surface class observed in the drive tests
    /// (σ = 2×10⁻² S/m, εr = 30).
    pub fn wet_ground() -> Self {
        GroundParameters {
            conductivity_s_per_m: 0.02,
            relative_permittivity: 30.0,
        }
    }

    pub fn validate(&self) -> Result<(), RfError> {
        if self.conductivity_s_per_m < 0.0 || self.relative_permittivity < 1.0 {
            return Err(RfError::InvalidGround(
                self.conductivity_s_per_m,
                self.relative_permittivity,
            ));
        }
        Ok(())
    }
}

/// Radio configuration of one node: carrier, channel, power, antenna.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    pub carrier_frequency_hz: f64,
    /// Nominal LTE channel bandwidth (e.g. 5 MHz) or an exact multiple of
    /// 180 kHz. See [`lte_transmission_bandwidth`].
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub antenna_gain_tx_dbi: f64,
    pub antenna_gain_rx_dbi: f64,
    pub antenna_height_m: f64,
    #[serde(default)]
    pub polarization: Polarization,
}

impl RadioConfig {
    /// Effective isotropic radiated power in dBm.
    pub fn eirp_dbm(&self) -> f64 {
        self.tx_power_dbm + self.antenna_gain_tx_dbi
    }

    pub fn validate(&self) -> Result<(), RfError> {
        if self.carrier_frequency_hz <= 0.0 {
            return Err(RfError::NonPositiveFrequency(self.carrier_frequency_hz));
        }
        if self.bandwidth_hz <= 0.0 {
            return Err(RfError::NonPositiveFrequency(self.bandwidth_hz));
        }
        if self.antenna_height_m <= 0.0 {
            return Err(RfError::NonPositiveHeight(self.antenna_height_m, self.antenna_height_m));
        }
        lte_transmission_bandwidth(self.bandwidth_hz)?;
        Ok(())
    }
}

/// Result of a point link-budget evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub distance_m: f64,
    pub rx_power_dbm: f64,
    pub rsrp_dbm: f64,
}

/// λ = c / f.
pub fn wavelength(frequency_hz: f64) -> Result<f64, RfError> {
    if frequency_hz <= 0.0 {
        return Err(RfError::NonPositiveFrequency(frequency_hz));
    }
    Ok(SPEED_OF_LIGHT / frequency_hz)
}

/// Complex relative permittivity εc = εr − jσ/(2πfε₀) under e^{+jωt}.
///
/// The imaginary part is ≤ 0 for any passive ground.
pub fn complex_permittivity(ground: &GroundParameters, frequency_hz: f64) -> Result<Complex64, RfError> {
    if frequency_hz <= 0.0 {
        return Err(RfError::NonPositiveFrequency(frequency_hz));
    }
    let loss = ground.conductivity_s_per_m / (2.0 * PI * frequency_hz * VACUUM_PERMITTIVITY);
    Ok(Complex64::new(ground.relative_permittivity, -loss))
}

/// Fresnel reflection coefficient at grazing angle ψ (measured from the
/// ground plane, not the normal).
///
/// Vertical:   Γ = (ε sinψ − √(ε − cos²ψ)) / (ε sinψ + √(ε − cos²ψ))
/// Horizontal: Γ = (sinψ − √(ε − cos²ψ)) / (sinψ + √(ε − cos²ψ))
///
/// |Γ| ≤ 1 for passive ground and Γ → −1 as ψ → 0 for both polarizations.
pub fn reflection_coefficient(
    grazing_angle_rad: f64,
    eps: Complex64,
    polarization: Polarization,
) -> Result<Complex64, RfError> {
    if !(grazing_angle_rad > 0.0 && grazing_angle_rad <= PI / 2.0) {
        return Err(RfError::GrazingAngleOutOfRange(grazing_angle_rad));
    }
    let sin_psi = grazing_angle_rad.sin();
    let cos_psi = grazing_angle_rad.cos();
    // Principal square root keeps Im(root) <= 0 when Im(eps) <= 0, which is
    // the decaying-wave branch under e^{+jωt}.
    let root = (eps - cos_psi * cos_psi).sqrt();
    let gamma = match polarization {
        Polarization::Vertical => (eps * sin_psi - root) / (eps * sin_psi + root),
        Polarization::Horizontal => (sin_psi - root) / (sin_psi + root),
    };
    Ok(gamma)
}

/// Complex sum of the direct and ground-reflected field phasors, in units of
/// 1/m (the free-space 1/d amplitude envelope with unit numerator).
///
/// `gamma_override` replaces the Fresnel coefficient; `Some(0)` degenerates
/// the model to a single free-space path of length d₁.
fn two_path_field(
    distance_m: f64,
    tx_height_m: f64,
    rx_height_m: f64,
    frequency_hz: f64,
    ground: &GroundParameters,
    polarization: Polarization,
    gamma_override: Option<Complex64>,
) -> Result<Complex64, RfError> {
    if distance_m < MIN_DISTANCE_M {
        return Err(RfError::DistanceBelowMinimum(distance_m));
    }
    if tx_height_m <= 0.0 || rx_height_m <= 0.0 {
        return Err(RfError::NonPositiveHeight(tx_height_m, rx_height_m));
    }
    let lambda = wavelength(frequency_hz)?;
    let k = 2.0 * PI / lambda;
    let dh = tx_height_m - rx_height_m;
    let sh = tx_height_m + rx_height_m;
    let d1 = (distance_m * distance_m + dh * dh).sqrt();
    let d2 = (distance_m * distance_m + sh * sh).sqrt();
    let psi = (sh / distance_m).atan();
    let gamma = match gamma_override {
        Some(g) => g,
        None => {
            let eps = complex_permittivity(ground, frequency_hz)?;
            reflection_coefficient(psi, eps, polarization)?
        }
    };
    let direct = Complex64::from_polar(1.0 / d1, -k * d1);
    let reflected = gamma * Complex64::from_polar(1.0 / d2, -k * d2);
    Ok(direct + reflected)
}

fn rx_power_from_field(tx: &RadioConfig, rx: &RadioConfig, field: Complex64) -> f64 {
    let lambda = SPEED_OF_LIGHT / tx.carrier_frequency_hz;
    tx.eirp_dbm()
        + rx.antenna_gain_rx_dbi
        + 20.0 * (lambda / (4.0 * PI)).log10()
        + 20.0 * field.norm().log10()
}

/// Received power of the two-ray ground-reflection model, in dBm.
///
/// Pr = Pt·Gt·Gr·(λ/4π)²·| e^{−jkd₁}/d₁ + Γ(ψ)·e^{−jkd₂}/d₂ |² with
/// d₁ = √(d² + (h₁−h₂)²), d₂ = √(d² + (h₁+h₂)²), ψ = atan((h₁+h₂)/d).
///
/// Carrier frequency and polarization are taken from the transmit side.
pub fn two_ray_rx_power(
    radio_tx: &RadioConfig,
    radio_rx: &RadioConfig,
    distance_m: f64,
    ground: &GroundParameters,
) -> Result<f64, RfError> {
    let field = two_path_field(
        distance_m,
        radio_tx.antenna_height_m,
        radio_rx.antenna_height_m,
        radio_tx.carrier_frequency_hz,
        ground,
        radio_tx.polarization,
        None,
    )?;
    Ok(rx_power_from_field(radio_tx, radio_rx, field))
}

/// Same as [`two_ray_rx_power`] but with the reflection coefficient forced
/// to a fixed value. Γ = 0 reproduces free-space Friis power at d₁.
pub fn two_ray_rx_power_with_gamma(
    radio_tx: &RadioConfig,
    radio_rx: &RadioConfig,
    distance_m: f64,
    ground: &GroundParameters,
    gamma: Complex64,
) -> Result<f64, RfError> {
    let field = two_path_field(
        distance_m,
        radio_tx.antenna_height_m,
        radio_rx.antenna_height_m,
        radio_tx.carrier_frequency_hz,
        ground,
        radio_tx.polarization,
        Some(gamma),
    )?;
    Ok(rx_power_from_field(radio_tx, radio_rx, field))
}

/// Free-space Friis received power at slant range d₁ between the antennas.
pub fn friis_rx_power(
    radio_tx: &RadioConfig,
    radio_rx: &RadioConfig,
    distance_m: f64,
) -> Result<f64, RfError> {
    if distance_m < MIN_DISTANCE_M {
        return Err(RfError::DistanceBelowMinimum(distance_m));
    }
    let lambda = wavelength(radio_tx.carrier_frequency_hz)?;
    let dh = radio_tx.antenna_height_m - radio_rx.antenna_height_m;
    let d1 = (distance_m * distance_m + dh * dh).sqrt();
    Ok(radio_tx.eirp_dbm()
        + radio_rx.antenna_gain_rx_dbi
        + 20.0 * (lambda / (4.0 * PI * d1)).log10())
}

/// Maps a nominal LTE channel bandwidth to the occupied transmission
/// bandwidth (N_RB × 180 kHz). Exact multiples of 180 kHz pass through.
pub fn lte_transmission_bandwidth(channel_hz: f64) -> Result<f64, RfError> {
    const NOMINAL: [(f64, f64); 6] = [
        (1.4e6, 6.0),
        (3.0e6, 15.0),
        (5.0e6, 25.0),
        (10.0e6, 50.0),
        (15.0e6, 75.0),
        (20.0e6, 100.0),
    ];
    for (nominal, n_rb) in NOMINAL {
        if (channel_hz - nominal).abs() < 1.0 {
            return Ok(n_rb * RESOURCE_BLOCK_HZ);
        }
    }
    let n = channel_hz / RESOURCE_BLOCK_HZ;
    if n >= 1.0 && (n - n.round()).abs() < 1e-6 {
        Ok(n.round() * RESOURCE_BLOCK_HZ)
    } else {
        Err(RfError::BandwidthNotResourceBlocks(channel_hz))
    }
}

/// RSRP (per-resource-element power) from total received power:
/// rsrp = rx_power − 10·log₁₀(12·N_RB), N_RB = bandwidth / 180 kHz.
///
/// `bandwidth_hz` must be a whole number of resource blocks; convert nominal
/// channels with [`lte_transmission_bandwidth`] first.
pub fn rsrp_from_rx_power(rx_power_dbm: f64, bandwidth_hz: f64) -> Result<f64, RfError> {
    let n = bandwidth_hz / RESOURCE_BLOCK_HZ;
    if !(n >= 1.0 && (n - n.round()).abs() < 1e-6) {
        return Err(RfError::BandwidthNotResourceBlocks(bandwidth_hz));
    }
    let n_rb = n.round();
    Ok(rx_power_dbm - 10.0 * (12.0 * n_rb).log10())
}

/// Full link-budget evaluation at one distance.
pub fn link_budget(
    radio_tx: &RadioConfig,
    radio_rx: &RadioConfig,
    distance_m: f64,
    ground: &GroundParameters,
) -> Result<LinkBudget, RfError> {
    let rx_power_dbm = two_ray_rx_power(radio_tx, radio_rx, distance_m, ground)?;
    let tx_bw = lte_transmission_bandwidth(radio_tx.bandwidth_hz)?;
    let rsrp_dbm = rsrp_from_rx_power(rx_power_dbm, tx_bw)?;
    Ok(LinkBudget {
        distance_m,
        rx_power_dbm,
        rsrp_dbm,
    })
}

/// Samples two-ray received power on [lo, hi] at the given step; returns
/// (distance, dBm) pairs.
pub fn power_curve(
    radio_tx: &RadioConfig,
    radio_rx: &RadioConfig,
    ground: &GroundParameters,
    lo_m: f64,
    hi_m: f64,
    step_m: f64,
) -> Result<Vec<(f64, f64)>, RfError> {
    assert!(step_m > 0.0 && hi_m > lo_m);
    let n = ((hi_m - lo_m) / step_m).round() as usize;
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let d = lo_m + i as f64 * step_m;
        out.push((d, two_ray_rx_power(radio_tx, radio_rx, d, ground)?));
    }
    Ok(out)
}

/// Distance of the deepest fade (global minimum of received power) on
/// [lo, hi] scanned at `step_m` resolution.
pub fn deepest_fade_distance(
    radio_tx: &RadioConfig,
    radio_rx: &RadioConfig,
    ground: &GroundParameters,
    lo_m: f64,
    hi_m: f64,
    step_m: f64,
) -> Result<f64, RfError> {
    let curve = power_curve(radio_tx, radio_rx, ground, lo_m, hi_m, step_m)?;
    let (d, _) = curve
        .into_iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .expect("non-empty scan");
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radio(freq: f64, height: f64) -> RadioConfig {
        RadioConfig {
            carrier_frequency_hz: freq,
            bandwidth_hz: 5e6,
            tx_power_dbm: 0.0,
            antenna_gain_tx_dbi: 0.0,
            antenna_gain_rx_dbi: 0.0,
            antenna_height_m: height,
            polarization: Polarization::Vertical,
        }
    }

    #[test]
    fn wavelength_basic_values() {
        assert!((wavelength(5.9e9).unwrap() - 0.050812).abs() < 1e-6);
        assert_eq!(wavelength(299_792_458.0).unwrap(), 1.0);
        assert!((wavelength(2.997_924_58e9).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(wavelength(0.0), Err(RfError::NonPositiveFrequency(0.0)));
        assert!(wavelength(-1.0).is_err());
    }

    #[test]
    fn permittivity_lossless_ground_is_real() {
        let g = GroundParameters {
            conductivity_s_per_m: 0.0,
            relative_permittivity: 30.0,
        };
        let eps = complex_permittivity(&g, 5.9e9).unwrap();
        assert_eq!(eps, Complex64::new(30.0, 0.0));
    }

    #[test]
    fn permittivity_wet_ground_loss_term() {
        // Independent arithmetic: sigma / (2 pi f eps0).
        let expected = 0.02 / (2.0 * PI * 5.9e9 * 8.854e-12);
        assert!((expected - 0.060937).abs() < 1e-4);
        let eps = complex_permittivity(&GroundParameters::wet_ground(), 5.9e9).unwrap();
        assert!((eps.re - 30.0).abs() < 1e-12);
        assert!((eps.im + expected).abs() < 1e-12);
        // Scaling frequency by 1e-3 scales the loss term by 1e3.
        let eps_low = complex_permittivity(&GroundParameters::wet_ground(), 5.9e6).unwrap();
        assert!((eps_low.im - eps.im * 1e3).abs() < 1e-9);
        assert!((eps_low.im + 60.937).abs() < 0.1);
    }

    #[test]
    fn reflection_grazing_limit_is_minus_one() {
        let eps = Complex64::new(30.0, -0.06);
        for pol in [Polarization::Vertical, Polarization::Horizontal] {
            let g = reflection_coefficient(1e-6, eps, pol).unwrap();
            assert!(
                (g + Complex64::new(1.0, 0.0)).norm() < 1e-3,
                "grazing limit violated for {:?}: {}",
                pol,
                g
            );
        }
    }

    #[test]
    fn reflection_normal_incidence_horizontal() {
        // At psi = pi/2 the horizontal coefficient reduces to the textbook
        // normal-incidence value (1 - sqrt(eps)) / (1 + sqrt(eps)).
        let eps = Complex64::new(30.0, 0.0);
        let expected = (1.0 - 30.0_f64.sqrt()) / (1.0 + 30.0_f64.sqrt());
        let g = reflection_coefficient(PI / 2.0, eps, Polarization::Horizontal).unwrap();
        assert!((g.re - expected).abs() < 1e-12, "got {}", g);
        assert!(g.im.abs() < 1e-12);
    }

    #[test]
    fn reflection_brewster_null_for_lossless_vertical() {
        // 1-D scan of |Gamma(psi)| finds a near-zero minimum at the Brewster
        // angle atan(1/sqrt(eps)) measured from grazing.
        let eps = Complex64::new(30.0, 0.0);
        let norm_at = |psi: f64| {
            reflection_coefficient(psi, eps, Polarization::Vertical)
                .unwrap()
                .norm()
        };
        let mut best = (0.0, f64::INFINITY);
        let mut psi = 1e-4;
        while psi < PI / 2.0 {
            let n = norm_at(psi);
            if n < best.1 {
                best = (psi, n);
            }
            psi += 1e-5;
        }
        // Ternary-search refinement inside the bracketing grid cell.
        let (mut lo, mut hi) = (best.0 - 1e-5, best.0 + 1e-5);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if norm_at(m1) < norm_at(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let refined = 0.5 * (lo + hi);
        let brewster = (1.0 / 30.0_f64.sqrt()).atan();
        assert!((refined - brewster).abs() < 1e-6, "minimum at {}", refined);
        assert!(norm_at(refined) < 1e-6, "|Gamma| at minimum = {}", norm_at(refined));
    }

    #[test]
    fn reflection_passivity_over_parameter_grid() {
        for &sigma in &[0.0, 0.005, 0.02, 0.1, 1.0] {
            for &eps_r in &[1.0, 2.0, 15.0, 30.0, 81.0] {
                let g = GroundParameters {
                    conductivity_s_per_m: sigma,
                    relative_permittivity: eps_r,
                };
                let eps = complex_permittivity(&g, 5.9e9).unwrap();
                for i in 1..=400 {
                    let psi = i as f64 * (PI / 2.0) / 400.0;
                    for pol in [Polarization::Vertical, Polarization::Horizontal] {
                        let gamma = reflection_coefficient(psi, eps, pol).unwrap();
                        assert!(
                            gamma.norm() <= 1.0 + 1e-12,
                            "|Gamma| = {} at psi={}, sigma={}, eps_r={}",
                            gamma.norm(),
                            psi,
                            sigma,
                            eps_r
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn reflection_angle_out_of_range() {
        let eps = Complex64::new(30.0, 0.0);
        assert!(reflection_coefficient(0.0, eps, Polarization::Vertical).is_err());
        assert!(reflection_coefficient(PI, eps, Polarization::Vertical).is_err());
    }

    #[test]
    fn two_ray_with_zero_gamma_equals_friis() {
        let tx = radio(5.9e9, 2.0);
        let rx = radio(5.9e9, 1.65);
        let ground = GroundParameters::wet_ground();
        let mut d = 1.0;
        while d < 2000.0 {
            let p = two_ray_rx_power_with_gamma(&tx, &rx, d, &ground, Complex64::new(0.0, 0.0))
                .unwrap();
            let f = friis_rx_power(&tx, &rx, d).unwrap();
            assert!((p - f).abs() < 1e-9, "mismatch at {} m: {} vs {}", d, p, f);
            d *= 1.7;
        }
    }

    #[test]
    fn two_ray_deepest_fade_in_dead_spot_window() {
        // Paper geometry: the deepest fade of the scan over [50, 175] m must
        // sit in the observed 110-160 m weak zone, near 2 h1 h2 / lambda.
        let tx = radio(5.9e9, 2.0);
        let rx = radio(5.9e9, 1.65);
        let ground = GroundParameters::wet_ground();
        let fade =
            deepest_fade_distance(&tx, &rx, &ground, 50.0, 175.0, 0.1).unwrap();
        let analytic = 2.0 * 2.0 * 1.65 / wavelength(5.9e9).unwrap();
        assert!((110.0..=160.0).contains(&fade), "fade at {} m", fade);
        assert!((fade - analytic).abs() <= 15.0, "fade {} vs analytic {}", fade, analytic);
    }

    #[test]
    fn two_ray_far_field_slope_is_minus_four() {
        // Log-log slope of Pr(d) tends to -4 beyond 10x the last fade.
        let tx = radio(5.9e9, 2.0);
        let rx = radio(5.9e9, 1.65);
        let ground = GroundParameters::wet_ground();
        let d_fade = 2.0 * 2.0 * 1.65 / wavelength(5.9e9).unwrap();
        let d0 = 10.0 * d_fade;
        let d1 = 10.0 * d0;
        let p0 = two_ray_rx_power(&tx, &rx, d0, &ground).unwrap();
        let p1 = two_ray_rx_power(&tx, &rx, d1, &ground).unwrap();
        // One decade of distance: slope in dB/decade divided by 10 gives the
        // path-loss exponent.
        let slope = (p1 - p0) / 10.0;
        assert!(
            (slope + 4.0).abs() < 0.08,
            "exponent {} not within 2% of -4",
            slope
        );
    }

    #[test]
    fn two_ray_last_fade_tracks_analytic_location() {
        let ground = GroundParameters::wet_ground();
        for &(h1, h2, f) in &[(2.0, 1.65, 5.9e9), (5.0, 1.65, 5.9e9), (2.0, 1.65, 2.4e9)] {
            let tx = radio(f, h1);
            let rx = radio(f, h2);
            let analytic = 2.0 * h1 * h2 / wavelength(f).unwrap();
            // Last destructive fade: deepest minimum in a window around the
            // analytic location, restricted to grazing geometry d > 10(h1+h2).
            let lo = (10.0 * (h1 + h2)).max(0.6 * analytic);
            let hi = 1.6 * analytic;
            let fade = deepest_fade_distance(&tx, &rx, &ground, lo, hi, 0.1).unwrap();
            assert!(
                (fade - analytic).abs() <= 15.0,
                "h1={} h2={} f={}: fade {} vs {}",
                h1,
                h2,
                f,
                fade,
                analytic
            );
        }
    }

    #[test]
    fn two_ray_rejects_short_distance() {
        let tx = radio(5.9e9, 2.0);
        let rx = radio(5.9e9, 1.65);
        let err = two_ray_rx_power(&tx, &rx, 0.5, &GroundParameters::wet_ground());
        assert_eq!(err, Err(RfError::DistanceBelowMinimum(0.5)));
    }

    #[test]
    fn rsrp_conversion_oracle_values() {
        // -60 dBm over 25 RB (nominal 5 MHz): -60 - 10 log10(300).
        let five_mhz = lte_transmission_bandwidth(5e6).unwrap();
        assert_eq!(five_mhz, 25.0 * 180e3);
        let rsrp = rsrp_from_rx_power(-60.0, five_mhz).unwrap();
        assert!((rsrp - (-60.0 - 10.0 * 300.0_f64.log10())).abs() < 1e-12);
        assert!((rsrp + 84.7712).abs() < 1e-4);
        // Single resource block: -60 - 10 log10(12).
        let rsrp1 = rsrp_from_rx_power(-60.0, 180e3).unwrap();
        assert!((rsrp1 + 60.0 + 10.0 * 12.0_f64.log10()).abs() < 1e-12);
        assert!((rsrp1 + 70.7918).abs() < 1e-4);
    }

    #[test]
    fn rsrp_conversion_is_pure_offset() {
        let bw = 25.0 * 180e3;
        let base = rsrp_from_rx_power(-60.0, bw).unwrap() + 60.0;
        for p in [-120.0, -90.5, -50.0, 0.0, 23.0] {
            let r = rsrp_from_rx_power(p, bw).unwrap();
            assert!((r - p - base).abs() < 1e-12);
        }
        // +10 dB input gives exactly +10 dB output.
        let a = rsrp_from_rx_power(-60.0, bw).unwrap();
        let b = rsrp_from_rx_power(-50.0, bw).unwrap();
        assert!((b - a - 10.0).abs() < 1e-12);
    }

    #[test]
    fn rsrp_rejects_partial_resource_blocks() {
        assert!(rsrp_from_rx_power(-60.0, 200e3).is_err());
        assert!(rsrp_from_rx_power(-60.0, 90e3).is_err());
        assert!(lte_transmission_bandwidth(4.7e6).is_err());
    }

    #[test]
    fn link_budget_rsrp_below_rx_power() {
        let tx = radio(5.9e9, 2.0);
        let rx = radio(5.9e9, 1.65);
        let lb = link_budget(&tx, &rx, 50.0, &GroundParameters::wet_ground()).unwrap();
        assert!(lb.rsrp_dbm < lb.rx_power_dbm);
    }
}
