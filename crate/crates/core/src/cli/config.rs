//! Flat `key = value` bench configuration files.

use std::path::Path;

use crate::error::{Error, Result};
use crate::experiment::BenchConfig;

const KEYS: [&str; 11] = [
    "pulse_energy",
    "kerr_coefficient",
    "thermal_noise_coeff",
    "thermal_exponent",
    "fiber_end_loss",
    "optics_loss",
    "detector_loss",
    "electronic_noise_dbm",
    "shot_noise_dbm",
    "mean_photon_number",
    "soliton_energy_pj",
];

pub fn parse_config(path: &Path) -> Result<BenchConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text, path)
}

/// Parses config text; `origin` is only used in error messages.
pub fn parse_config_str(text: &str, origin: &Path) -> Result<BenchConfig> {
    let mut cfg = BenchConfig::default();
    let mut seen: Vec<&str> = Vec::new();
    let err = |line: usize, msg: String| Error::ConfigParse {
        path: origin.to_path_buf(),
        line,
        msg,
    };

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(lineno, format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        let known = KEYS
            .iter()
            .copied()
            .find(|k| *k == key)
            .ok_or_else(|| err(lineno, format!("unknown key `{key}`")))?;
        if seen.contains(&known) {
            return Err(err(lineno, format!("duplicate key `{key}`")));
        }
        seen.push(known);
        let x: f64 = value
            .parse()
            .map_err(|_| err(lineno, format!("`{value}` is not a number")))?;
        match known {
            "pulse_energy" => cfg.pulse_energy = Some(x),
            "kerr_coefficient" => cfg.kerr_coefficient = x,
            "thermal_noise_coeff" => cfg.thermal_noise_coeff = x,
            "thermal_exponent" => cfg.thermal_exponent = x,
            "fiber_end_loss" => cfg.fiber_end_loss = x,
            "optics_loss" => cfg.optics_loss = x,
            "detector_loss" => cfg.detector_loss = x,
            "electronic_noise_dbm" => cfg.electronic_noise_dbm = x,
            "shot_noise_dbm" => cfg.shot_noise_dbm = x,
            "mean_photon_number" => cfg.mean_photon_number = x,
            "soliton_energy_pj" => cfg.soliton_energy_pj = x,
            _ => unreachable!(),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Serializes every key; `pulse_energy` only when set. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn config_to_text(cfg: &BenchConfig) -> String {
    config_lines(cfg).into_iter().map(|l| l + "\n").collect()
}

pub fn config_lines(cfg: &BenchConfig) -> Vec<String> {
    let mut out = Vec::with_capacity(KEYS.len());
    if let Some(e) = cfg.pulse_energy {
        out.push(format!("pulse_energy = {e}"));
    }
    for (k, v) in [
        ("kerr_coefficient", cfg.kerr_coefficient),
        ("thermal_noise_coeff", cfg.thermal_noise_coeff),
        ("thermal_exponent", cfg.thermal_exponent),
        ("fiber_end_loss", cfg.fiber_end_loss),
        ("optics_loss", cfg.optics_loss),
        ("detector_loss", cfg.detector_loss),
        ("electronic_noise_dbm", cfg.electronic_noise_dbm),
        ("shot_noise_dbm", cfg.shot_noise_dbm),
        ("mean_photon_number", cfg.mean_photon_number),
        ("soliton_energy_pj", cfg.soliton_energy_pj),
    ] {
        out.push(format!("{k} = {v}"));
    }
    out
}
