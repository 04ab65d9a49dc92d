use heattrace::billiards::OrbitSearch;
use heattrace::montecarlo::McConfig;
use heattrace::recovery::RecoveryOptions;
use heattrace::trace::{linear_grid, log_grid};
use heattrace::{Backend, BoundaryCondition, Shape};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
}

fn default_spacing() -> Spacing {
    Spacing::Log
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>, String> {
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.t_max.is_finite()) {
            return Err(format!(
                "t_grid needs 0 < t_min < t_max, got t_min = {}, t_max = {}",
                self.t_min, self.t_max
            ));
        }
        if self.n < 2 {
            return Err(format!("t_grid.n must be at least 2, got {}", self.n));
        }
        Ok(match self.spacing {
            Spacing::Log => log_grid(self.t_min, self.t_max, self.n),
            Spacing::Linear => linear_grid(self.t_min, self.t_max, self.n),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitsSpec {
    #[serde(default = "default_delta_max")]
    pub delta_max: f64,
    #[serde(default = "default_reflections")]
    pub n_max_reflections: usize,
    #[serde(default)]
    pub search: OrbitSearch,
}

fn default_delta_max() -> f64 {
    5.0
}

fn default_reflections() -> usize {
    4
}

impl Default for OrbitsSpec {
    fn default() -> Self {
        Self {
            delta_max: default_delta_max(),
            n_max_reflections: default_reflections(),
            search: OrbitSearch::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: Shape,
    #[serde(default = "default_bc")]
    pub bc: BoundaryCondition,
    #[serde(default = "default_backend")]
    pub backend: Backend,
    pub t_grid: GridSpec,
    #[serde(default)]
    pub recovery: RecoveryOptions,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub orbits: OrbitsSpec,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_bc() -> BoundaryCondition {
    BoundaryCondition::Dirichlet
}

fn default_backend() -> Backend {
    Backend::Series
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("invalid config: {e}"))
    }

    /// SHA-256 of the normalized config.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::parse(
            r#"{"domain": {"kind": "disk", "radius": 1.0}, "t_grid": {"t_min": 0.001, "t_max": 1.0, "n": 10}}"#,
        )
        .unwrap();
        assert_eq!(c.bc, BoundaryCondition::Dirichlet);
        assert_eq!(c.backend, Backend::Series);
        assert_eq!(c.t_grid.spacing, Spacing::Log);
        assert_eq!(c.t_grid.points().unwrap().len(), 10);
    }

    #[test]
    fn unknown_fields_rejected() {
        let r = ExperimentConfig::parse(
            r#"{"domain": {"kind": "disk", "radius": 1.0}, "t_grid": {"t_min": 0.001, "t_max": 1.0, "n": 10}, "extra": 1}"#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn digest_tracks_content() {
        let a = r#"{"domain": {"kind": "disk", "radius": 1.0}, "t_grid": {"t_min": 0.001, "t_max": 1.0, "n": 10}}"#;
        let b = r#"{"domain": {"kind": "disk", "radius": 2.0}, "t_grid": {"t_min": 0.001, "t_max": 1.0, "n": 10}}"#;
        let da = ExperimentConfig::parse(a).unwrap().digest();
        assert_eq!(da, ExperimentConfig::parse(a).unwrap().digest());
        assert_ne!(da, ExperimentConfig::parse(b).unwrap().digest());
        assert_eq!(da.len(), 64);
    }
}
