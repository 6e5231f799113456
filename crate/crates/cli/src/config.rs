//! Experiment configuration: TOML sections in laboratory reporting units
//! (frequencies in kHz as cycles, times in microseconds, rates per
//! second), converted to the library's angular rad/us convention on
//! resolution.

use std::path::PathBuf;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use vibronic::dynamics::{CollapseOp, LindbladSpec};
use vibronic::models::{AmplitudeRule, ModelParams, RampSchedule, RampShape, TrotterScheme};
use vibronic::tomography::{GridSpec, KGrid};
use vibronic::ModeSpace;

const TWO_PI: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output: OutputSection,
    pub model: ModelSection,
    pub schedule: ScheduleSection,
    pub truncation: TruncationSection,
    pub noise: NoiseSection,
    pub tomography: TomographySection,
    pub surface: SurfaceSection,
    pub berry: BerrySection,
    pub study: StudySection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output: OutputSection::default(),
            model: ModelSection::default(),
            schedule: ScheduleSection::default(),
            truncation: TruncationSection::default(),
            noise: NoiseSection::default(),
            tomography: TomographySection::default(),
            surface: SurfaceSection::default(),
            berry: BerrySection::default(),
            study: StudySection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: PathBuf::from("out") }
    }
}

/// Frequencies are cycles in kHz (the laboratory reporting convention);
/// angular factors are applied on resolution.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub nu_khz: f64,
    pub omega_khz: f64,
    pub delta_khz: f64,
    pub delta_z_khz: f64,
    pub delta_xy_khz: f64,
    pub eta_omega_scale: f64,
    pub cross_coupling: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            nu_khz: 3.0,
            omega_khz: 6.0,
            delta_khz: 0.0,
            delta_z_khz: 0.0,
            delta_xy_khz: 0.0,
            eta_omega_scale: 1.0,
            cross_coupling: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleSection {
    pub total_time_us: f64,
    pub rounds: usize,
    pub scheme: TrotterScheme,
    pub amplitude_rule: AmplitudeRule,
    pub exact_substeps: usize,
    pub trajectory_samples: usize,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        Self {
            total_time_us: 330.0,
            rounds: 16,
            scheme: TrotterScheme::FirstOrderSplit,
            amplitude_rule: AmplitudeRule::Midpoint,
            exact_substeps: 256,
            trajectory_samples: 64,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationSection {
    pub n_max_x: usize,
    pub n_max_y: usize,
}

impl Default for TruncationSection {
    fn default() -> Self {
        Self { n_max_x: 14, n_max_y: 14 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    /// Also run the Lindblad integration in `evolve`.
    pub enabled: bool,
    pub collapse: Vec<CollapseEntry>,
    pub lindblad_steps: usize,
    pub positivity_interval: usize,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self { enabled: false, collapse: Vec::new(), lindblad_steps: 2000, positivity_interval: 50 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CollapseEntry {
    pub op: CollapseOp,
    pub rate_per_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TomographySection {
    pub k_max: f64,
    pub points: usize,
    pub rotation_deg: f64,
    /// 0 disables the shot-noised scan.
    pub shots: u32,
    pub grid_extent: f64,
    pub grid_resolution: usize,
}

impl Default for TomographySection {
    fn default() -> Self {
        Self {
            k_max: 2.8,
            points: 25,
            rotation_deg: 0.0,
            shots: 100,
            grid_extent: 4.0,
            grid_resolution: 101,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceSection {
    pub extent: f64,
    pub resolution: usize,
}

impl Default for SurfaceSection {
    fn default() -> Self {
        Self { extent: 4.0, resolution: 201 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BerrySection {
    pub radius: f64,
    pub epsilon: f64,
    pub segments: usize,
    pub counterclockwise: bool,
    /// false runs the half loop (upper arc from pi to 0) instead.
    pub closed: bool,
}

impl Default for BerrySection {
    fn default() -> Self {
        Self { radius: 1.0, epsilon: 0.0, segments: 10_000, counterclockwise: true, closed: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct StudySection {
    /// Reference evolution time of the fidelity study.
    pub reference_time_us: f64,
    pub reference_substeps: usize,
    /// t-scan points of the adiabaticity study.
    pub scan_points: usize,
    pub n_excited: usize,
}

impl Default for StudySection {
    fn default() -> Self {
        Self {
            reference_time_us: 25_000.0,
            reference_substeps: 4096,
            scan_points: 64,
            n_excited: 8,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = toml::from_str(text).context("parsing config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.model.nu_khz <= 0.0 || self.model.omega_khz < 0.0 {
            bail!("model: nu must be > 0 and omega >= 0");
        }
        if self.schedule.total_time_us <= 0.0 || self.schedule.rounds == 0 {
            bail!("schedule: total_time_us must be > 0 and rounds >= 1");
        }
        if self.truncation.n_max_x < 2 || self.truncation.n_max_y < 2 {
            bail!("truncation: need at least 2 Fock levels per mode");
        }
        if self.tomography.points < 2 || self.tomography.grid_resolution < 2 {
            bail!("tomography: grid needs at least 2 points per axis");
        }
        if self.noise.collapse.iter().any(|c| c.rate_per_s < 0.0) {
            bail!("noise: collapse rates must be >= 0");
        }
        if self.berry.segments < 8 {
            bail!("berry: need at least 8 path segments");
        }
        Ok(())
    }

    pub fn model_params(&self) -> ModelParams {
        let khz = |f: f64| TWO_PI * f * 1e-3; // cycles in kHz -> rad/us
        ModelParams {
            nu: khz(self.model.nu_khz),
            omega: khz(self.model.omega_khz),
            delta: khz(self.model.delta_khz),
            delta_z: khz(self.model.delta_z_khz),
            delta_xy: khz(self.model.delta_xy_khz),
            eta_omega_scale: self.model.eta_omega_scale,
            cross_coupling: self.model.cross_coupling,
        }
    }

    pub fn ramp_schedule(&self) -> RampSchedule {
        RampSchedule {
            total_time: self.schedule.total_time_us,
            rounds: self.schedule.rounds,
            ramp_shape: RampShape::Linear,
            amplitude_rule: self.schedule.amplitude_rule,
            scheme: self.schedule.scheme,
            exact_substeps: self.schedule.exact_substeps,
            trajectory_samples: self.schedule.trajectory_samples,
        }
    }

    pub fn mode_space(&self) -> ModeSpace {
        ModeSpace::new(self.truncation.n_max_x, self.truncation.n_max_y)
    }

    pub fn lindblad_spec(&self) -> LindbladSpec {
        LindbladSpec {
            terms: self
                .noise
                .collapse
                .iter()
                .map(|c| (c.op, c.rate_per_s * 1e-6))
                .collect(),
            steps: self.noise.lindblad_steps,
            positivity_interval: self.noise.positivity_interval,
        }
    }

    pub fn k_grid(&self) -> KGrid {
        KGrid {
            k_max: self.tomography.k_max,
            points: self.tomography.points,
            rotation: self.tomography.rotation_deg.to_radians(),
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            extent: self.tomography.grid_extent,
            resolution: self.tomography.grid_resolution,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_experiment_operating_point() {
        let cfg = ExperimentConfig::default();
        let p = cfg.model_params();
        assert!((p.nu - TWO_PI * 3e-3).abs() < 1e-15);
        assert!((p.omega - TWO_PI * 6e-3).abs() < 1e-15);
        assert_eq!(cfg.schedule.rounds, 16);
        assert_eq!(cfg.truncation.n_max_x, 14);
        assert!((cfg.schedule.total_time_us - 330.0).abs() < 1e-12);
        cfg.validate().unwrap();
    }

    #[test]
    fn emit_parse_roundtrip_is_identity() {
        let mut cfg = ExperimentConfig::default();
        cfg.seed = 9137;
        cfg.model.delta_khz = 0.7;
        cfg.schedule.scheme = TrotterScheme::ExactSimultaneous;
        cfg.noise.collapse.push(CollapseEntry { op: CollapseOp::RaiseX, rate_per_s: 1.5 });
        cfg.tomography.rotation_deg = 49.0;
        let text = cfg.to_toml();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_fields_are_config_errors() {
        let bad = "nonsense_key = 3\n";
        assert!(ExperimentConfig::from_toml(bad).is_err());
        let bad_section = "[model]\nnu_khz = -1.0\n";
        assert!(ExperimentConfig::from_toml(bad_section).is_err());
    }

    #[test]
    fn rates_convert_per_second_to_per_microsecond() {
        let mut cfg = ExperimentConfig::default();
        cfg.noise.collapse.push(CollapseEntry { op: CollapseOp::RaiseY, rate_per_s: 2.0 });
        let spec = cfg.lindblad_spec();
        assert!((spec.terms[0].1 - 2e-6).abs() < 1e-18);
    }
}
