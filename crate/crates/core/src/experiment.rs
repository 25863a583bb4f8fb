//! Forward model of the polarization-squeezing bench.
//!
//! Both polarization modes of the fiber are Kerr-sheared with
//! `γ = kerr_coefficient · E` and pick up classical excess phase noise
//! `c · E^p`; the pair is locked at a π/2 relative phase, attenuated by the
//! bench losses and read out by a half-wave plate and a polarizing beam
//! splitter, which measures `S_θ` with `θ = 4Φ`.

use rayon::prelude::*;

use crate::analysis::{dbm_add, electronic_noise_correct, linear_to_db};
use crate::error::{Error, Result};
use crate::gaussian::NoiseEllipse;
use crate::stokes::PolarizationState;

pub const ANALYSIS_FREQUENCY_MHZ: f64 = 17.5;
pub const RESOLUTION_BANDWIDTH_KHZ: f64 = 300.0;
pub const VIDEO_BANDWIDTH_HZ: f64 = 30.0;
pub const LASER_WAVELENGTH_NM: f64 = 1497.0;

/// Energy at which the default Kerr coefficient was calibrated.
pub const REFERENCE_ENERGY_PJ: f64 = 83.7;
/// Squeezing observed at [`REFERENCE_ENERGY_PJ`].
pub const REFERENCE_SQUEEZING_DB: f64 = -5.1;

/// Default excess phase-noise coefficient (shot-noise units per pJ³). Not a
/// measured value: chosen so that the best squeezing over pulse energy falls
/// at [`REFERENCE_ENERGY_PJ`].
pub const DEFAULT_THERMAL_NOISE_COEFF: f64 = 2.9585e-6;
pub const DEFAULT_THERMAL_EXPONENT: f64 = 3.0;
/// [`calibrate_kerr`] output for the default bench against
/// [`REFERENCE_SQUEEZING_DB`] at [`REFERENCE_ENERGY_PJ`].
pub const DEFAULT_KERR_COEFFICIENT: f64 = 0.024_645_306_304_695_63;

/// Photons in a pulse of `energy_pj` at `wavelength_nm`.
pub fn photons_per_pulse(energy_pj: f64, wavelength_nm: f64) -> f64 {
    const PLANCK: f64 = 6.626_070_15e-34;
    const LIGHT_SPEED: f64 = 299_792_458.0;
    let photon_j = PLANCK * LIGHT_SPEED / (wavelength_nm * 1e-9);
    energy_pj * 1e-12 / photon_j
}

/// Physical parameters of the virtual bench.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    /// pJ; commands that sweep energy ignore it.
    pub pulse_energy: Option<f64>,
    /// γ per pJ.
    pub kerr_coefficient: f64,
    pub thermal_noise_coeff: f64,
    pub thermal_exponent: f64,
    pub fiber_end_loss: f64,
    pub optics_loss: f64,
    pub detector_loss: f64,
    pub electronic_noise_dbm: f64,
    /// Spectrum-analyzer level assigned to shot noise when synthesizing raw
    /// traces. Arbitrary, not a physical calibration.
    pub shot_noise_dbm: f64,
    /// α², photons per analysis window.
    pub mean_photon_number: f64,
    /// Annotation only.
    pub soliton_energy_pj: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            pulse_energy: None,
            kerr_coefficient: DEFAULT_KERR_COEFFICIENT,
            thermal_noise_coeff: DEFAULT_THERMAL_NOISE_COEFF,
            thermal_exponent: DEFAULT_THERMAL_EXPONENT,
            fiber_end_loss: 0.04,
            optics_loss: 0.078,
            detector_loss: 0.10,
            electronic_noise_dbm: -86.1,
            shot_noise_dbm: -57.0,
            mean_photon_number: photons_per_pulse(REFERENCE_ENERGY_PJ, LASER_WAVELENGTH_NM),
            soliton_energy_pj: 56.0,
        }
    }
}

impl BenchConfig {
    pub fn with_energy(mut self, energy_pj: f64) -> Self {
        self.pulse_energy = Some(energy_pj);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        for (name, l) in [
            ("fiber_end_loss", self.fiber_end_loss),
            ("optics_loss", self.optics_loss),
            ("detector_loss", self.detector_loss),
        ] {
            if !(0.0..1.0).contains(&l) {
                return bad(format!("{name} = {l} outside [0, 1)"));
            }
        }
        if let Some(e) = self.pulse_energy {
            if !(e >= 0.0 && e.is_finite()) {
                return bad(format!("pulse_energy = {e} must be finite and ≥ 0"));
            }
        }
        if !(self.kerr_coefficient >= 0.0 && self.kerr_coefficient.is_finite()) {
            return bad(format!(
                "kerr_coefficient = {} must be finite and ≥ 0",
                self.kerr_coefficient
            ));
        }
        if !(self.thermal_noise_coeff >= 0.0 && self.thermal_noise_coeff.is_finite()) {
            return bad(format!(
                "thermal_noise_coeff = {} must be finite and ≥ 0",
                self.thermal_noise_coeff
            ));
        }
        if !self.thermal_exponent.is_finite() {
            return bad("thermal_exponent must be finite".into());
        }
        if !(self.mean_photon_number > 0.0 && self.mean_photon_number.is_finite()) {
            return bad(format!(
                "mean_photon_number = {} must be > 0",
                self.mean_photon_number
            ));
        }
        if !self.shot_noise_dbm.is_finite() {
            return bad("shot_noise_dbm must be finite".into());
        }
        if self.electronic_noise_dbm.is_nan() || self.electronic_noise_dbm == f64::INFINITY {
            return bad("electronic_noise_dbm must be a level or -inf".into());
        }
        Ok(())
    }

    /// Per-stage transmissivities: fiber end, optics, detectors.
    pub fn stage_efficiencies(&self) -> [f64; 3] {
        [
            1.0 - self.fiber_end_loss,
            1.0 - self.optics_loss,
            1.0 - self.detector_loss,
        ]
    }

    /// Total detection efficiency η.
    pub fn efficiency(&self) -> f64 {
        self.stage_efficiencies().iter().product()
    }

    pub fn gamma_at(&self, energy_pj: f64) -> f64 {
        self.kerr_coefficient * energy_pj
    }

    /// Excess phase-quadrature variance `c·E^p`.
    pub fn excess_noise_at(&self, energy_pj: f64) -> f64 {
        if self.thermal_noise_coeff == 0.0 {
            0.0
        } else {
            self.thermal_noise_coeff * energy_pj.powf(self.thermal_exponent)
        }
    }

    pub fn energy(&self) -> Result<f64> {
        self.pulse_energy
            .ok_or_else(|| Error::Config("pulse_energy is not set".into()))
    }
}

/// Source state leaving the fiber after the π/2 lock, before any loss.
pub fn build_source(cfg: &BenchConfig) -> Result<PolarizationState> {
    cfg.validate()?;
    let energy = cfg.energy()?;
    source_with_gamma(cfg, cfg.gamma_at(energy), energy)
}

fn source_with_gamma(cfg: &BenchConfig, gamma: f64, energy: f64) -> Result<PolarizationState> {
    PolarizationState::sheared_circular(cfg.mean_photon_number, gamma, cfg.excess_noise_at(energy))
}

/// Fiber-end, optics and detector losses, identical on both modes.
pub fn apply_bench_losses(p: &PolarizationState, cfg: &BenchConfig) -> Result<PolarizationState> {
    let mut g = p.gauss().clone();
    for eta in cfg.stage_efficiencies() {
        g = g.loss_channel(eta, 0)?.loss_channel(eta, 1)?;
    }
    PolarizationState::new(g)
}

/// One waveplate setting of a rotation sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    /// Waveplate angle Φ (degrees).
    pub phi_deg: f64,
    /// Phase-space angle θ = 4Φ (radians).
    pub theta: f64,
    /// `Var(S_θ)/|⟨S₃⟩|`.
    pub variance_linear: f64,
    pub variance_db: f64,
    /// Synthesized spectrum-analyzer reading including electronic noise.
    pub raw_dbm: f64,
    /// Raw reading with the electronic floor removed, relative to shot noise.
    pub corrected_db: f64,
}

impl TracePoint {
    pub fn theta_deg(&self) -> f64 {
        4.0 * self.phi_deg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMetadata {
    pub config: BenchConfig,
    pub analysis_frequency_mhz: f64,
    pub rbw_khz: f64,
    pub vbw_hz: f64,
}

impl TraceMetadata {
    fn new(config: &BenchConfig) -> Self {
        TraceMetadata {
            config: config.clone(),
            analysis_frequency_mhz: ANALYSIS_FREQUENCY_MHZ,
            rbw_khz: RESOLUTION_BANDWIDTH_KHZ,
            vbw_hz: VIDEO_BANDWIDTH_HZ,
        }
    }
}

/// Noise against waveplate angle.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrace {
    pub points: Vec<TracePoint>,
    pub metadata: TraceMetadata,
}

/// Stokes measurement with the waveplate at `phi_deg`.
pub fn measure_stokes(
    p: &PolarizationState,
    phi_deg: f64,
    cfg: &BenchConfig,
) -> Result<TracePoint> {
    if !phi_deg.is_finite() {
        return Err(Error::Parameter(format!(
            "waveplate angle {phi_deg} not finite"
        )));
    }
    let theta = (4.0 * phi_deg).to_radians();
    let variance_linear = p.normalized_variance(theta)?;
    let variance_db = linear_to_db(variance_linear)?;
    let raw_dbm = dbm_add(cfg.shot_noise_dbm + variance_db, cfg.electronic_noise_dbm);
    let corrected_db =
        electronic_noise_correct(raw_dbm, cfg.electronic_noise_dbm)? - cfg.shot_noise_dbm;
    Ok(TracePoint {
        phi_deg,
        theta,
        variance_linear,
        variance_db,
        raw_dbm,
        corrected_db,
    })
}

/// Inclusive grid `start, start+step, …, ≤ end`.
pub fn inclusive_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !end.is_finite() {
        return Err(Error::Parameter(format!(
            "bad grid {start}..{end} step {step}"
        )));
    }
    if end < start {
        return Err(Error::Parameter(format!(
            "grid end {end} before start {start}"
        )));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}

/// Rotation sweep at the configured pulse energy.
pub fn rotate_sweep(cfg: &BenchConfig, phi_grid: &[f64]) -> Result<NoiseTrace> {
    if phi_grid.is_empty() {
        return Err(Error::Parameter("empty waveplate grid".into()));
    }
    if phi_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter(
            "waveplate grid must be strictly increasing".into(),
        ));
    }
    let detected = apply_bench_losses(&build_source(cfg)?, cfg)?;
    let points = phi_grid
        .par_iter()
        .map(|&phi| measure_stokes(&detected, phi, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(NoiseTrace {
        points,
        metadata: TraceMetadata::new(cfg),
    })
}

/// Detected Stokes-plane noise ellipse in shot-noise units.
pub fn detected_ellipse(cfg: &BenchConfig, energy_pj: f64) -> Result<NoiseEllipse> {
    detected_ellipse_with_gamma(cfg, cfg.gamma_at(energy_pj), energy_pj)
}

fn detected_ellipse_with_gamma(
    cfg: &BenchConfig,
    gamma: f64,
    energy_pj: f64,
) -> Result<NoiseEllipse> {
    let detected = apply_bench_losses(&source_with_gamma(cfg, gamma, energy_pj)?, cfg)?;
    let s3 = detected.stokes_means().s3.abs();
    if s3 == 0.0 {
        return Err(Error::UndefinedBound("⟨S₃⟩ = 0 after losses".into()));
    }
    Ok(NoiseEllipse::from_block(
        &(detected.s1s2_covariance()? / s3),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyPoint {
    pub energy_pj: f64,
    pub squeezing_db: f64,
    pub antisqueezing_db: f64,
    /// Arg-min of the detected Stokes noise, in `[-90°, 90°)`.
    pub theta_sq_deg: f64,
}

/// Squeezing, anti-squeezing and squeezing angle against pulse energy.
pub fn energy_sweep(cfg: &BenchConfig, energies: &[f64]) -> Result<Vec<EnergyPoint>> {
    cfg.validate()?;
    if let Some(e) = energies.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::Parameter(format!(
            "pulse energy {e} must be positive"
        )));
    }
    energies
        .par_iter()
        .map(|&energy_pj| {
            let e = detected_ellipse(cfg, energy_pj)?;
            Ok(EnergyPoint {
                energy_pj,
                squeezing_db: linear_to_db(e.v_min)?,
                antisqueezing_db: linear_to_db(e.v_max)?,
                theta_sq_deg: e.theta_sq.to_degrees(),
            })
        })
        .collect()
}

/// Finds the Kerr coefficient (γ per pJ) at which the detected minimum
/// Stokes noise at `at_energy` equals `target_db`, holding losses and
/// excess noise fixed. Bisection on γ; deterministic.
pub fn calibrate_kerr(template: &BenchConfig, target_db: f64, at_energy: f64) -> Result<f64> {
    template.validate()?;
    if !(at_energy > 0.0 && at_energy.is_finite()) {
        return Err(Error::Parameter(format!(
            "calibration energy {at_energy} must be positive"
        )));
    }
    if !target_db.is_finite() || target_db > 0.0 {
        return Err(Error::Parameter(format!(
            "target {target_db} dB must be ≤ 0"
        )));
    }
    if target_db == 0.0 {
        return Ok(0.0);
    }
    let eta = template.efficiency();
    let floor_db = 10.0 * (1.0 - eta).log10();
    if target_db <= floor_db {
        return Err(Error::Infeasible(format!(
            "{target_db} dB is below the {floor_db:.3} dB loss floor (η = {eta:.6})"
        )));
    }
    let squeezing = |gamma: f64| -> Result<f64> {
        linear_to_db(detected_ellipse_with_gamma(template, gamma, at_energy)?.v_min)
    };

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while squeezing(hi)? > target_db {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::Infeasible(format!(
                "{target_db} dB not reached for any γ"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if squeezing(mid)? > target_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi) / at_energy)
}

/// Loss floor of the detected noise in dB, `10·log₁₀(1 − η)`.
pub fn loss_floor_db(cfg: &BenchConfig) -> f64 {
    10.0 * (1.0 - cfg.efficiency()).log10()
}
