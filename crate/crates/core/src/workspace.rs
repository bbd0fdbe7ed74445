//! Required tilt workspace, dexterous coverage, actuator brackets and singularity maps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::DesignParameters;
use crate::error::{MechError, Result};
use crate::kinematics::{inverse_kinematics, inverse_condition_number, jacobian, LegLengths, TiltOrientation};

/// Slack (meters) used when comparing leg lengths against bracket ends, so that windows
/// touching a length exactly are not lost to rounding of `min_closed + k * step`.
pub const BRACKET_TOLERANCE: f64 = 1e-12;

/// Required orientations: a cone of tilts sampled on a square grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceSpec {
    /// Cone half-angle, radians.
    pub theta_max: f64,
    /// Samples per tilt axis.
    pub resolution: usize,
    pub dexterity_threshold: f64,
}

impl Default for WorkspaceSpec {
    fn default() -> Self {
        Self {
            theta_max: 30f64.to_radians(),
            resolution: 21,
            dexterity_threshold: 0.1,
        }
    }
}

impl WorkspaceSpec {
    pub fn new(theta_max: f64, resolution: usize, dexterity_threshold: f64) -> Result<Self> {
        let s = Self {
            theta_max,
            resolution,
            dexterity_threshold,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta_max > 0.0 && self.theta_max < std::f64::consts::FRAC_PI_2) {
            return Err(MechError::Domain(format!(
                "theta_max must lie in (0, pi/2), got {}",
                self.theta_max
            )));
        }
        if self.resolution < 2 {
            return Err(MechError::Domain(format!(
                "resolution must be at least 2, got {}",
                self.resolution
            )));
        }
        if !(self.dexterity_threshold > 0.0 && self.dexterity_threshold < 1.0) {
            return Err(MechError::Domain(format!(
                "dexterity threshold must lie in (0, 1), got {}",
                self.dexterity_threshold
            )));
        }
        Ok(())
    }
}

/// A prismatic actuator family: windows `[L, L + stroke]` with
/// `L = min_closed_length + k * search_step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorModel {
    pub min_closed_length: f64,
    pub stroke: f64,
    pub search_step: f64,
}

impl ActuatorModel {
    pub fn new(min_closed_length: f64, stroke: f64, search_step: f64) -> Result<Self> {
        let a = Self {
            min_closed_length,
            stroke,
            search_step,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if positive(self.min_closed_length) && positive(self.stroke) && positive(self.search_step) {
            Ok(())
        } else {
            Err(MechError::Domain(format!(
                "actuator lengths must be positive (min_closed {}, stroke {}, step {})",
                self.min_closed_length, self.stroke, self.search_step
            )))
        }
    }

    /// Start of the `k`-th candidate window.
    pub fn window_start(&self, k: usize) -> f64 {
        self.min_closed_length + k as f64 * self.search_step
    }

    /// Whether `[start, start + stroke]` contains `[lo, hi]`.
    pub fn window_contains(&self, start: f64, lo: f64, hi: f64) -> bool {
        start <= lo + BRACKET_TOLERANCE && hi <= start + self.stroke + BRACKET_TOLERANCE
    }
}

/// Observed extremes of one leg's length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthRange {
    pub lo: f64,
    pub hi: f64,
}

impl LengthRange {
    fn include(self, v: f64) -> Self {
        Self {
            lo: self.lo.min(v),
            hi: self.hi.max(v),
        }
    }

    pub fn span(&self) -> f64 {
        self.hi - self.lo
    }
}

/// An actuator operating window `[start, end]`, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub start: f64,
    pub end: f64,
}

/// Per-point result of a workspace sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEvaluation {
    pub tilt: TiltOrientation,
    /// `None` when a leg is degenerate at this tilt.
    pub lengths: Option<LegLengths>,
    pub dexterity: f64,
    pub det_j: f64,
    pub covered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceEvaluation {
    /// Fraction of grid points that are reachable, nonsingular and dexterous enough.
    pub coverage: f64,
    pub grid_points: usize,
    pub covered_points: usize,
    /// Worst dexterity over covered points; 0 when nothing is covered.
    pub min_dexterity: f64,
    /// Per-leg length extremes over covered points; `None` when nothing is covered.
    pub rho_range: Option<[LengthRange; 2]>,
    pub feasible_brackets: Vec<Bracket>,
    pub feasible: bool,
}

impl WorkspaceEvaluation {
    /// `hi - lo` over both legs together, or 0 when nothing is covered.
    pub fn length_span(&self) -> f64 {
        match self.rho_range {
            Some([r1, r2]) => r1.hi.max(r2.hi) - r1.lo.min(r2.lo),
            None => 0.0,
        }
    }
}

/// Determinant of the Jacobian at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularityPoint {
    pub tilt: TiltOrientation,
    pub det_j: f64,
    /// A leg collapsed at this tilt; `det_j` is reported as 0.
    pub degenerate: bool,
}

/// Equispaced square grid over `[-theta_max, theta_max]^2`, masked to the cone, in
/// row-major order (alpha outer, beta inner).
pub fn generate_grid(spec: &WorkspaceSpec) -> Vec<TiltOrientation> {
    let n = spec.resolution;
    if n < 2 {
        return Vec::new();
    }
    let axis: Vec<f64> = (0..n)
        .map(|k| spec.theta_max * (2.0 * (k as f64 / (n - 1) as f64) - 1.0))
        .collect();
    // relative slack so lattice points on the circle survive rounding
    let limit = spec.theta_max * (1.0 + 1e-12);
    let mut grid = Vec::new();
    for &alpha in &axis {
        for &beta in &axis {
            if alpha.hypot(beta) <= limit {
                grid.push(TiltOrientation { alpha, beta });
            }
        }
    }
    grid
}

fn evaluate_point(d: &DesignParameters, q: TiltOrientation, threshold: f64) -> PointEvaluation {
    let lengths = inverse_kinematics(d, &q).ok();
    let j = lengths.and_then(|_| jacobian(d, &q).ok());
    let (dexterity, det_j) = match j {
        Some(j) => (inverse_condition_number(&j), j.determinant()),
        None => (0.0, 0.0),
    };
    PointEvaluation {
        tilt: q,
        lengths,
        dexterity,
        det_j,
        covered: lengths.is_some() && dexterity >= threshold,
    }
}

/// Evaluates every grid point in parallel; results come back in grid order.
pub fn evaluate_points(d: &DesignParameters, spec: &WorkspaceSpec) -> Vec<PointEvaluation> {
    generate_grid(spec)
        .into_par_iter()
        .map(|q| evaluate_point(d, q, spec.dexterity_threshold))
        .collect()
}

/// Folds per-point results into a [`WorkspaceEvaluation`].
pub fn summarize(points: &[PointEvaluation], act: &ActuatorModel) -> WorkspaceEvaluation {
    let covered: Vec<(&PointEvaluation, LegLengths)> = points
        .iter()
        .filter(|p| p.covered)
        .filter_map(|p| p.lengths.map(|l| (p, l)))
        .collect();
    let coverage = if points.is_empty() {
        0.0
    } else {
        covered.len() as f64 / points.len() as f64
    };
    let min_dexterity = covered
        .iter()
        .map(|(p, _)| p.dexterity)
        .reduce(f64::min)
        .unwrap_or(0.0);
    let rho_range = covered.iter().fold(None, |acc: Option<[LengthRange; 2]>, (_, l)| {
        Some(match acc {
            None => [
                LengthRange { lo: l.rho1, hi: l.rho1 },
                LengthRange { lo: l.rho2, hi: l.rho2 },
            ],
            Some([r1, r2]) => [r1.include(l.rho1), r2.include(l.rho2)],
        })
    });
    let lengths: Vec<LegLengths> = covered.iter().map(|(_, l)| *l).collect();
    let feasible_brackets = if lengths.is_empty() {
        Vec::new()
    } else {
        actuator_bracket_search(&lengths, act).unwrap_or_default()
    };
    let feasible = covered.len() == points.len() && !points.is_empty() && !feasible_brackets.is_empty();
    WorkspaceEvaluation {
        coverage,
        grid_points: points.len(),
        covered_points: covered.len(),
        min_dexterity,
        rho_range,
        feasible_brackets,
        feasible,
    }
}

/// Coverage, dexterity, length demands and actuator brackets of `d` over the required
/// workspace. Points where the kinematics fail count as uncovered.
pub fn evaluate_design(
    d: &DesignParameters,
    spec: &WorkspaceSpec,
    act: &ActuatorModel,
) -> Result<WorkspaceEvaluation> {
    d.validate()?;
    spec.validate()?;
    act.validate()?;
    Ok(summarize(&evaluate_points(d, spec), act))
}

/// All candidate windows of `act` that contain every length of both legs.
pub fn actuator_bracket_search(lengths: &[LegLengths], act: &ActuatorModel) -> Result<Vec<Bracket>> {
    act.validate()?;
    if lengths.is_empty() {
        return Err(MechError::Domain("bracket search needs at least one length pair".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in lengths.iter().flat_map(|l| l.as_array()) {
        if !(v.is_finite() && v > 0.0) {
            return Err(MechError::Domain(format!("leg length must be positive, got {v}")));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    // Candidate k range from the two inequalities, widened by one on each side; the
    // exact predicate below decides membership.
    let first = ((hi - act.stroke - act.min_closed_length) / act.search_step).ceil() - 1.0;
    let last = ((lo - act.min_closed_length) / act.search_step).floor() + 1.0;
    let first = first.max(0.0) as usize;
    let last = last.max(0.0) as usize;
    Ok((first..=last)
        .map(|k| act.window_start(k))
        .filter(|&start| act.window_contains(start, lo, hi))
        .map(|start| Bracket {
            start,
            end: start + act.stroke,
        })
        .collect())
}

/// Jacobian determinant over the workspace grid. Sign changes between neighbours mark
/// crossings of the singularity curve.
pub fn singularity_map(d: &DesignParameters, spec: &WorkspaceSpec) -> Vec<SingularityPoint> {
    generate_grid(spec)
        .into_par_iter()
        .map(|q| match jacobian(d, &q) {
            Ok(j) => SingularityPoint {
                tilt: q,
                det_j: j.determinant(),
                degenerate: false,
            },
            Err(_) => SingularityPoint {
                tilt: q,
                det_j: 0.0,
                degenerate: true,
            },
        })
        .collect()
}
