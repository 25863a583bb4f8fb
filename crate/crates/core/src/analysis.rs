//! Post-processing of measured noise: dB arithmetic, electronic-noise
//! subtraction, loss back-inference and squeezing-angle extraction.

use std::fmt;

use crate::error::{Error, Result};
use crate::experiment::NoiseTrace;

/// Smallest excess of a reading over the electronic floor (dB) that still
/// allows a subtraction.
pub const MIN_CORRECTION_MARGIN_DB: f64 = 0.5;

/// Total loss stated for the bench (20.5 %).
pub const STATED_TOTAL_LOSS: f64 = 0.205;
/// Fiber end, optical elements and photodiode losses.
pub const COMPONENT_LOSSES: [f64; 3] = [0.04, 0.078, 0.10];

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(ratio: f64) -> Result<f64> {
    if !(ratio > 0.0) {
        return Err(Error::Domain(format!("cannot take dB of ratio {ratio}")));
    }
    Ok(10.0 * ratio.log10())
}

/// Incoherent (linear-power) sum of two dBm levels.
pub fn dbm_add(a_dbm: f64, b_dbm: f64) -> f64 {
    10.0 * (db_to_linear(a_dbm) + db_to_linear(b_dbm)).log10()
}

/// Removes the electronic noise floor from a spectrum-analyzer reading by
/// subtracting in linear power. `electronic_dbm = -inf` means no floor.
pub fn electronic_noise_correct(measured_dbm: f64, electronic_dbm: f64) -> Result<f64> {
    if !measured_dbm.is_finite() || electronic_dbm.is_nan() || electronic_dbm == f64::INFINITY {
        return Err(Error::Domain(format!(
            "non-finite levels ({measured_dbm} dBm, {electronic_dbm} dBm)"
        )));
    }
    if measured_dbm - electronic_dbm < MIN_CORRECTION_MARGIN_DB {
        return Err(Error::CorrectionImpossible(format!(
            "reading {measured_dbm} dBm is within {MIN_CORRECTION_MARGIN_DB} dB of the \
             {electronic_dbm} dBm electronic floor"
        )));
    }
    let signal = db_to_linear(measured_dbm) - db_to_linear(electronic_dbm);
    Ok(10.0 * signal.log10())
}

/// Forward loss: `η·v + (1 − η)` in shot-noise units.
pub fn loss_apply(variance_rel: f64, eta: f64) -> f64 {
    eta * variance_rel + (1.0 - eta)
}

/// Inverts [`loss_apply`]: `v_src = (v_meas − (1 − η))/η`.
pub fn loss_correct(measured_rel: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Parameter(format!("efficiency {eta} outside (0, 1]")));
    }
    let floor = 1.0 - eta;
    if !(measured_rel > floor) {
        return Err(Error::Unphysical(format!(
            "measured variance {measured_rel} is at or below the loss floor {floor} \
             ({:.3} dB)",
            10.0 * floor.log10()
        )));
    }
    Ok((measured_rel - floor) / eta)
}

/// Product of `(1 − lᵢ)` over a chain of fractional losses.
pub fn total_efficiency(losses: &[f64]) -> Result<f64> {
    losses.iter().try_fold(1.0, |eta, &l| {
        if (0.0..1.0).contains(&l) {
            Ok(eta * (1.0 - l))
        } else {
            Err(Error::Parameter(format!(
                "loss fraction {l} outside [0, 1)"
            )))
        }
    })
}

/// Loss- and electronic-noise-corrected squeezing figure.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionReport {
    pub measured_db: f64,
    pub eta: f64,
    pub inferred_source_db: f64,
    pub electronic_noise_dbm: Option<f64>,
    pub raw_dbm: Option<f64>,
    pub corrected_dbm: Option<f64>,
    pub notes: Vec<String>,
}

impl CorrectionReport {
    /// Infers source squeezing from a shot-noise-relative measurement.
    /// Also records the result for the alternate efficiency convention
    /// (stated 20.5 % total vs. the component product) in `notes`.
    pub fn infer(
        measured_db: f64,
        eta: f64,
        electronic_noise_dbm: Option<f64>,
        raw_dbm: Option<f64>,
    ) -> Result<Self> {
        let source = loss_correct(db_to_linear(measured_db), eta)?;
        let inferred_source_db = linear_to_db(source)?;
        let corrected_dbm = match (raw_dbm, electronic_noise_dbm) {
            (Some(raw), Some(el)) => Some(electronic_noise_correct(raw, el)?),
            (Some(raw), None) => Some(raw),
            _ => None,
        };

        let stated = 1.0 - STATED_TOTAL_LOSS;
        let product = total_efficiency(&COMPONENT_LOSSES)?;
        let mut notes = vec![format!(
            "loss model v_meas = eta*v_src + (1 - eta); loss floor {:.4} dB",
            10.0 * (1.0 - eta).log10()
        )];
        for (label, alt) in [
            ("stated total 1 - 0.205", stated),
            ("component product", product),
        ] {
            let alt_db = loss_correct(db_to_linear(measured_db), alt)
                .and_then(linear_to_db)
                .map(|db| format!("{db:.4} dB"))
                .unwrap_or_else(|e| format!("n/a ({e})"));
            notes.push(format!("eta {label} = {alt:.6} -> inferred {alt_db}"));
        }
        if electronic_noise_dbm.is_some() && raw_dbm.is_none() {
            notes.push("measured_db taken as already corrected for electronic noise".into());
        }
        Ok(CorrectionReport {
            measured_db,
            eta,
            inferred_source_db,
            electronic_noise_dbm,
            raw_dbm,
            corrected_dbm,
            notes,
        })
    }
}

impl fmt::Display for CorrectionReport {
    /// One `key: value` pair per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "measured_db: {:.4}", self.measured_db)?;
        writeln!(f, "eta: {:.6}", self.eta)?;
        writeln!(f, "total_loss_percent: {:.2}", 100.0 * (1.0 - self.eta))?;
        writeln!(f, "inferred_source_db: {:.4}", self.inferred_source_db)?;
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| format!("{x:.4}"));
        writeln!(
            f,
            "electronic_noise_dbm: {}",
            opt(self.electronic_noise_dbm)
        )?;
        writeln!(f, "raw_dbm: {}", opt(self.raw_dbm))?;
        writeln!(f, "corrected_dbm: {}", opt(self.corrected_dbm))?;
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

/// Location of the noise minimum in a rotation trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimumEstimate {
    /// Phase-space angle θ (radians) in the trace's own range.
    pub theta: f64,
    pub v_min_db: f64,
    /// Trace is flat; `theta` is reported as 0.
    pub degenerate: bool,
}

/// Grid arg-min of the corrected trace refined by a parabola through the
/// neighbouring points (in linear variance). Ties go to the smallest θ.
pub fn extract_minimum(trace: &NoiseTrace) -> Result<MinimumEstimate> {
    let pts = &trace.points;
    if pts.len() < 5 {
        return Err(Error::Trace(format!(
            "{} points; need at least 5",
            pts.len()
        )));
    }
    let theta: Vec<f64> = pts.iter().map(|p| p.theta).collect();
    let v: Vec<f64> = pts.iter().map(|p| db_to_linear(p.corrected_db)).collect();
    let span = theta[theta.len() - 1] - theta[0];
    if span < std::f64::consts::PI * (1.0 - 1e-9) {
        return Err(Error::Trace(format!(
            "trace spans {:.3}° of θ; need a full 180° period",
            span.to_degrees()
        )));
    }

    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if hi - lo < 1e-12 {
        return Ok(MinimumEstimate {
            theta: 0.0,
            v_min_db: linear_to_db(lo)?,
            degenerate: true,
        });
    }

    let i = v
        .iter()
        .enumerate()
        .fold(0, |best, (k, &x)| if x < v[best] { k } else { best });
    if i == 0 || i == v.len() - 1 {
        return Ok(MinimumEstimate {
            theta: theta[i],
            v_min_db: linear_to_db(v[i])?,
            degenerate: false,
        });
    }

    let (a, b, c) = (theta[i - 1], theta[i], theta[i + 1]);
    let (fa, fb, fc) = (v[i - 1], v[i], v[i + 1]);
    let num = (b - a).powi(2) * (fb - fc) - (b - c).powi(2) * (fb - fa);
    let den = (b - a) * (fb - fc) - (b - c) * (fb - fa);
    let (x, fx) = if den.abs() > 0.0 {
        let x = (b - 0.5 * num / den).clamp(a, c);
        // Lagrange form of the parabola through the three samples
        let fx = fa * (x - b) * (x - c) / ((a - b) * (a - c))
            + fb * (x - a) * (x - c) / ((b - a) * (b - c))
            + fc * (x - a) * (x - b) / ((c - a) * (c - b));
        (x, fx.min(fb))
    } else {
        (b, fb)
    };
    Ok(MinimumEstimate {
        theta: x,
        v_min_db: linear_to_db(fx)?,
        degenerate: false,
    })
}
