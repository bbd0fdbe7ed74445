//! Design spaces and the penalized synthesis objective.
//!
//! The cost of a design is
//!
//! ```text
//! f = -min_dexterity
//!     + w_coverage * (1 - coverage)
//!     + w_stroke   * max(0, length_span - stroke)
//!     + w_size     * max_attachment_radius
//! ```
//!
//! Vectors outside the box bounds, or that decode to an invalid design, cost `+inf`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::nelder_mead::{nelder_mead_with_steps, OptimizationResult, OptimizerConfig};
use crate::design::{DesignParameters, ReducedDesignParameters, FULL_DIM, REDUCED_DIM};
use crate::error::{MechError, Result};
use crate::workspace::{evaluate_design, ActuatorModel, WorkspaceEvaluation, WorkspaceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    /// `(a1, a2, b1, b2, h)` with every point as `x, y, z`.
    Full13,
    /// `(r_a, r_b, gamma, h)`, expanded through the mirror-symmetric family.
    Reduced4,
}

impl SpaceKind {
    pub fn dim(self) -> usize {
        match self {
            SpaceKind::Full13 => FULL_DIM,
            SpaceKind::Reduced4 => REDUCED_DIM,
        }
    }
}

/// A design space with box bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpace {
    pub kind: SpaceKind,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ParameterSpace {
    pub fn new(kind: SpaceKind, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let s = Self { kind, lower, upper };
        s.validate()?;
        Ok(s)
    }

    /// Default box: attachment coordinates within 0.2 m of the origin (base points
    /// within 5 cm of the base plane), `h` in `[0.02, 0.3]` m.
    pub fn full13() -> Self {
        let mut lower = vec![-0.2; FULL_DIM];
        let mut upper = vec![0.2; FULL_DIM];
        for z in [2, 5] {
            lower[z] = -0.05;
            upper[z] = 0.05;
        }
        lower[12] = 0.02;
        upper[12] = 0.3;
        Self {
            kind: SpaceKind::Full13,
            lower,
            upper,
        }
    }

    /// Default box: `r_a` in `[0.01, 0.2]`, `r_b` in `[0.005, 0.15]`, `gamma` in
    /// `[1, 89]` degrees, `h` in `[0.02, 0.3]`.
    pub fn reduced4() -> Self {
        Self {
            kind: SpaceKind::Reduced4,
            lower: vec![0.01, 0.005, 1f64.to_radians(), 0.02],
            upper: vec![0.2, 0.15, 89f64.to_radians(), 0.3],
        }
    }

    pub fn default_for(kind: SpaceKind) -> Self {
        match kind {
            SpaceKind::Full13 => Self::full13(),
            SpaceKind::Reduced4 => Self::reduced4(),
        }
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        for v in [&self.lower, &self.upper] {
            if v.len() != n {
                return Err(MechError::DimensionMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
        }
        if !self
            .lower
            .iter()
            .zip(&self.upper)
            .all(|(l, u)| l.is_finite() && u.is_finite() && l < u)
        {
            return Err(MechError::Domain("box bounds need lower < upper on every axis".into()));
        }
        if self.kind == SpaceKind::Reduced4 && (self.lower[2] < 0.0 || self.upper[2] > FRAC_PI_2) {
            return Err(MechError::Domain("gamma bounds must stay within [0, pi/2]".into()));
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    pub fn spans(&self) -> Vec<f64> {
        self.upper.iter().zip(&self.lower).map(|(u, l)| u - l).collect()
    }
}

/// Decodes a design vector. Full13 vectors are not validated here; Reduced4 vectors
/// go through [`ReducedDesignParameters::expand`], which is.
pub fn decode_vector(x: &[f64], space: &ParameterSpace) -> Result<DesignParameters> {
    match space.kind {
        SpaceKind::Full13 => DesignParameters::from_vector(x),
        SpaceKind::Reduced4 => ReducedDesignParameters::from_vector(x)?.expand(),
    }
}

/// Full13 layout of a design (the inverse of [`decode_vector`] on Full13).
pub fn encode_design(d: &DesignParameters) -> Vec<f64> {
    d.to_vector()
}

/// Penalty weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectiveConfig {
    /// Per meter of length span exceeding the stroke.
    pub w_stroke: f64,
    /// Per unit of uncovered grid fraction.
    pub w_coverage: f64,
    /// Per meter of largest attachment radius.
    pub w_size: f64,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            w_stroke: 100.0,
            w_coverage: 10.0,
            w_size: 0.1,
        }
    }
}

impl ObjectiveConfig {
    pub fn validate(&self) -> Result<()> {
        if [self.w_stroke, self.w_coverage, self.w_size]
            .iter()
            .all(|w| w.is_finite() && *w >= 0.0)
        {
            Ok(())
        } else {
            Err(MechError::Domain("objective weights must be finite and non-negative".into()))
        }
    }
}

/// Cost of an already evaluated design.
pub fn objective_from_evaluation(
    d: &DesignParameters,
    ev: &WorkspaceEvaluation,
    act: &ActuatorModel,
    obj: &ObjectiveConfig,
) -> f64 {
    -ev.min_dexterity
        + obj.w_coverage * (1.0 - ev.coverage)
        + obj.w_stroke * (ev.length_span() - act.stroke).max(0.0)
        + obj.w_size * d.max_radius()
}

fn evaluate_vector(
    x: &[f64],
    space: &ParameterSpace,
    spec: &WorkspaceSpec,
    act: &ActuatorModel,
) -> Result<(DesignParameters, WorkspaceEvaluation)> {
    if !space.contains(x) {
        return Err(MechError::Domain("design vector outside the box bounds".into()));
    }
    let d = decode_vector(x, space)?;
    let ev = evaluate_design(&d, spec, act)?;
    Ok((d, ev))
}

/// The scalar cost over `space`. Any evaluation error maps to `+inf`.
pub fn build_objective<'a>(
    spec: &'a WorkspaceSpec,
    act: &'a ActuatorModel,
    obj: &'a ObjectiveConfig,
    space: &'a ParameterSpace,
) -> impl Fn(&[f64]) -> f64 + 'a {
    move |x: &[f64]| match evaluate_vector(x, space, spec, act) {
        Ok((d, ev)) => objective_from_evaluation(&d, &ev, act, obj),
        Err(_) => f64::INFINITY,
    }
}

/// Optimized design together with the optimizer record and its workspace evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignOutcome {
    pub space: SpaceKind,
    pub result: OptimizationResult,
    pub design: DesignParameters,
    pub evaluation: WorkspaceEvaluation,
}

/// Runs Nelder-Mead (with restarts) on the design objective from `x0`. The initial
/// simplex edge on each axis is `cfg.initial_simplex_scale` times the box span.
pub fn optimize_design(
    x0: &[f64],
    space: &ParameterSpace,
    spec: &WorkspaceSpec,
    act: &ActuatorModel,
    obj: &ObjectiveConfig,
    cfg: &OptimizerConfig,
) -> Result<DesignOutcome> {
    space.validate()?;
    spec.validate()?;
    act.validate()?;
    obj.validate()?;
    cfg.validate()?;
    if x0.len() != space.dim() {
        return Err(MechError::DimensionMismatch {
            expected: space.dim(),
            found: x0.len(),
        });
    }
    let f = build_objective(spec, act, obj, space);
    if !f(x0).is_finite() {
        return Err(MechError::Domain(
            "starting design is infeasible (outside bounds or invalid)".into(),
        ));
    }
    let steps: Vec<f64> = space
        .spans()
        .iter()
        .map(|s| s * cfg.initial_simplex_scale)
        .collect();
    let result = nelder_mead_with_steps(&f, x0, &steps, cfg)?;
    let (design, evaluation) = evaluate_vector(&result.best_x, space, spec, act)?;
    Ok(DesignOutcome {
        space: space.kind,
        result,
        design,
        evaluation,
    })
}
