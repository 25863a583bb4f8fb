//! CSV and report rendering with embedded run manifests.

use std::path::PathBuf;

use crate::experiment::{EnergyPoint, NoiseTrace, TraceMetadata};

use super::config::config_lines;

pub const ROTATE_HEADER: &str =
    "phi_deg,theta_deg,variance_linear,variance_db,raw_dbm,corrected_db";
pub const ENERGY_HEADER: &str = "energy_pj,squeezing_db,antisqueezing_db,theta_sq_deg";

/// Who produced an output file, and from what.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    /// Only meaningful for Monte-Carlo verbs.
    pub seed: Option<u64>,
    /// ISO-8601; `None` when timestamps are suppressed.
    pub timestamp: Option<String>,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config_path: Option<PathBuf>,
        output_path: Option<PathBuf>,
        stamp: bool,
    ) -> Self {
        RunManifest {
            command: command.to_string(),
            config_path,
            output_path,
            seed: None,
            timestamp: stamp
                .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
        }
    }

    /// `# key: value` comment lines. Commas in paths become `;` so CSV
    /// consumers never see one.
    pub fn header_lines(&self) -> Vec<String> {
        let path = |p: &Option<PathBuf>, none: &str| {
            p.as_ref()
                .map(|p| p.display().to_string().replace(',', ";"))
                .unwrap_or_else(|| none.to_string())
        };
        vec![
            format!("# command: {}", self.command),
            format!("# config_path: {}", path(&self.config_path, "defaults")),
            format!("# output_path: {}", path(&self.output_path, "stdout")),
            format!(
                "# seed: {}",
                self.seed
                    .map_or_else(|| "none".to_string(), |s| s.to_string())
            ),
            format!(
                "# timestamp: {}",
                self.timestamp.as_deref().unwrap_or("omitted")
            ),
        ]
    }
}

/// Formats `x` with 9 significant digits, `%g` style.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_fraction(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_fraction(mantissa.to_string()))
    }
}

fn trim_fraction(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn metadata_lines(meta: &TraceMetadata) -> Vec<String> {
    let mut out = vec![
        format!("# analysis_frequency_mhz: {}", meta.analysis_frequency_mhz),
        format!("# rbw_khz: {}", meta.rbw_khz),
        format!("# vbw_hz: {}", meta.vbw_hz),
        format!("# soliton_energy_pj: {}", meta.config.soliton_energy_pj),
    ];
    out.extend(
        config_lines(&meta.config)
            .into_iter()
            .map(|l| format!("# config: {l}")),
    );
    out
}

fn join(lines: Vec<String>) -> String {
    let mut s = String::new();
    for l in lines {
        s.push_str(&l);
        s.push('\n');
    }
    s
}

pub fn rotate_csv(trace: &NoiseTrace, manifest: &RunManifest) -> String {
    let mut lines = manifest.header_lines();
    lines.extend(metadata_lines(&trace.metadata));
    lines.push(ROTATE_HEADER.to_string());
    for p in &trace.points {
        lines.push(
            [
                p.phi_deg,
                p.theta_deg(),
                p.variance_linear,
                p.variance_db,
                p.raw_dbm,
                p.corrected_db,
            ]
            .iter()
            .map(|&v| fmt_sig(v))
            .collect::<Vec<_>>()
            .join(","),
        );
    }
    join(lines)
}

pub fn energy_csv(points: &[EnergyPoint], meta: &TraceMetadata, manifest: &RunManifest) -> String {
    let mut lines = manifest.header_lines();
    lines.extend(metadata_lines(meta));
    lines.push(ENERGY_HEADER.to_string());
    for p in points {
        lines.push(
            [
                p.energy_pj,
                p.squeezing_db,
                p.antisqueezing_db,
                p.theta_sq_deg,
            ]
            .iter()
            .map(|&v| fmt_sig(v))
            .collect::<Vec<_>>()
            .join(","),
        );
    }
    join(lines)
}

/// Prefixes a `key: value` report body with the manifest.
pub fn report(manifest: &RunManifest, body: &str) -> String {
    let mut s = join(manifest.header_lines());
    s.push_str(body);
    if !body.ends_with('\n') {
        s.push('\n');
    }
    s
}
