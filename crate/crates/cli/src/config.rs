//! Run configuration (TOML). Angles are given in degrees and converted on load.
//!
//! ```toml
//! output_dir = "results"
//!
//! [mechanism]
//! space = "reduced4"          # or "full13"
//! r_a = 0.06
//! r_b = 0.03
//! gamma_deg = 30.0
//! h = 0.10
//!
//! [workspace]
//! theta_max_deg = 20.0
//! resolution = 11
//! dexterity_threshold = 0.1
//!
//! [actuator]
//! min_closed_length = 0.02
//! stroke = 0.15
//! search_step = 0.001
//! ```

use std::path::{Path, PathBuf};

use mechopt_core::optimizer::{ObjectiveConfig, OptimizerConfig, ParameterSpace, SpaceKind};
use mechopt_core::workspace::{ActuatorModel, WorkspaceSpec};
use mechopt_core::{DesignParameters, ReducedDesignParameters, Vec3};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mechanism: MechanismConfig,
    #[serde(default)]
    pub workspace: WorkspaceConfig,
    pub actuator: ActuatorModel,
    #[serde(default)]
    pub objective: ObjectiveConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "space", rename_all = "lowercase")]
pub enum MechanismConfig {
    Full13(FullMechanism),
    Reduced4(ReducedMechanism),
}

/// Box bounds in the layout of the design vector.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FullMechanism {
    pub a1: [f64; 3],
    pub a2: [f64; 3],
    pub b1: [f64; 3],
    pub b2: [f64; 3],
    pub h: f64,
    pub bounds: Option<BoundsConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedMechanism {
    pub r_a: f64,
    pub r_b: f64,
    pub gamma_deg: f64,
    pub h: f64,
    /// `[r_a, r_b, gamma_deg, h]`
    pub bounds: Option<BoundsConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkspaceConfig {
    pub theta_max_deg: f64,
    pub resolution: usize,
    pub dexterity_threshold: f64,
}

impl Default for WorkspaceConfig {
    fn default() -> Self {
        let d = WorkspaceSpec::default();
        Self {
            theta_max_deg: d.theta_max.to_degrees(),
            resolution: d.resolution,
            dexterity_threshold: d.dexterity_threshold,
        }
    }
}

/// A configuration whose every part has passed its invariant checks.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub space: ParameterSpace,
    pub seed: Vec<f64>,
    pub design: DesignParameters,
    pub workspace: WorkspaceSpec,
    pub actuator: ActuatorModel,
    pub objective: ObjectiveConfig,
    pub optimizer: OptimizerConfig,
    pub output_dir: PathBuf,
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn point(p: [f64; 3]) -> Vec3 {
    Vec3::new(p[0], p[1], p[2])
}

impl RunConfig {
    /// Converts units and checks every invariant.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let w = &self.workspace;
        let workspace = WorkspaceSpec::new(w.theta_max_deg.to_radians(), w.resolution, w.dexterity_threshold)?;
        self.actuator.validate()?;
        self.objective.validate()?;
        self.optimizer.validate()?;

        let (space, seed, design) = match &self.mechanism {
            MechanismConfig::Full13(m) => {
                let design = DesignParameters::new(point(m.a1), point(m.a2), point(m.b1), point(m.b2), m.h)?;
                let space = match &m.bounds {
                    Some(b) => ParameterSpace::new(SpaceKind::Full13, b.lower.clone(), b.upper.clone())?,
                    None => ParameterSpace::full13(),
                };
                (space, design.to_vector(), design)
            }
            MechanismConfig::Reduced4(m) => {
                let reduced = ReducedDesignParameters::new(m.r_a, m.r_b, m.gamma_deg.to_radians(), m.h)?;
                let space = match &m.bounds {
                    Some(b) => {
                        let to_rad = |v: &[f64]| {
                            let mut v = v.to_vec();
                            if let Some(g) = v.get_mut(2) {
                                *g = g.to_radians();
                            }
                            v
                        };
                        ParameterSpace::new(SpaceKind::Reduced4, to_rad(&b.lower), to_rad(&b.upper))?
                    }
                    None => ParameterSpace::reduced4(),
                };
                (space, reduced.to_vector(), reduced.expand()?)
            }
        };

        Ok(Resolved {
            space,
            seed,
            design,
            workspace,
            actuator: self.actuator,
            objective: self.objective,
            optimizer: self.optimizer,
            output_dir: self.output_dir.clone(),
        })
    }
}
