//! Nelder-Mead simplex minimization with deterministic restarts.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{MechError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Initial simplex edge, as a fraction of the box span per axis (absolute when
    /// there is no box).
    pub initial_simplex_scale: f64,
    /// Stop when `f_worst - f_best` drops below this.
    pub f_tol: f64,
    /// Stop when every vertex is within this (max-norm) of the best vertex.
    pub x_tol: f64,
    pub max_evals: usize,
    /// Additional runs started from the best point with a fresh simplex.
    pub restarts: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            initial_simplex_scale: 0.05,
            f_tol: 1e-9,
            x_tol: 1e-9,
            max_evals: 20_000,
            restarts: 3,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(MechError::Domain(msg));
        if !(self.reflection > 0.0 && self.expansion > self.reflection) {
            return err(format!(
                "need 0 < reflection < expansion (got {}, {})",
                self.reflection, self.expansion
            ));
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return err(format!("contraction must lie in (0, 1), got {}", self.contraction));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return err(format!("shrink must lie in (0, 1), got {}", self.shrink));
        }
        if !(self.initial_simplex_scale > 0.0 && self.initial_simplex_scale.is_finite()) {
            return err(format!(
                "initial simplex scale must be positive, got {}",
                self.initial_simplex_scale
            ));
        }
        if !(self.f_tol >= 0.0 && self.x_tol >= 0.0) {
            return err("tolerances must be non-negative".into());
        }
        if self.max_evals == 0 {
            return err("max_evals must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    FTol,
    XTol,
    MaxEvals,
}

/// Best objective value seen after evaluation number `eval` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub eval: usize,
    pub best_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub evals: usize,
    /// One entry per strict improvement of the best value, starting with `x0`.
    pub trace: Vec<TracePoint>,
    pub termination: Termination,
}

/// Counts evaluations, sanitizes values and tracks the incumbent.
struct Evaluator<F> {
    f: F,
    evals: usize,
    best_x: Vec<f64>,
    best_f: f64,
    trace: Vec<TracePoint>,
}

impl<F: FnMut(&[f64]) -> f64> Evaluator<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        let v = (self.f)(x);
        let v = if v.is_finite() { v } else { f64::INFINITY };
        self.evals += 1;
        if v < self.best_f {
            self.best_f = v;
            self.best_x.clear();
            self.best_x.extend_from_slice(x);
            self.trace.push(TracePoint {
                eval: self.evals,
                best_f: v,
            });
        }
        v
    }
}

/// Minimizes `f` from `x0` with an axis-aligned initial simplex of edge
/// `cfg.initial_simplex_scale` on every axis.
pub fn nelder_mead<F>(f: F, x0: &[f64], cfg: &OptimizerConfig) -> Result<OptimizationResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let steps = vec![cfg.initial_simplex_scale; x0.len()];
    nelder_mead_with_steps(f, x0, &steps, cfg)
}

/// As [`nelder_mead`], with an explicit initial simplex edge per axis.
pub fn nelder_mead_with_steps<F>(f: F, x0: &[f64], steps: &[f64], cfg: &OptimizerConfig) -> Result<OptimizationResult>
where
    F: FnMut(&[f64]) -> f64,
{
    cfg.validate()?;
    let n = x0.len();
    if n == 0 {
        return Err(MechError::Domain("cannot optimize over an empty vector".into()));
    }
    if steps.len() != n {
        return Err(MechError::DimensionMismatch {
            expected: n,
            found: steps.len(),
        });
    }
    if steps.iter().any(|s| !(s.is_finite() && *s != 0.0)) {
        return Err(MechError::Domain("initial simplex steps must be finite and nonzero".into()));
    }

    let mut ev = Evaluator {
        f,
        evals: 0,
        best_x: x0.to_vec(),
        best_f: f64::INFINITY,
        trace: Vec::new(),
    };
    let f0 = ev.eval(x0);
    if !f0.is_finite() {
        return Err(MechError::Domain("objective is not finite at the starting point".into()));
    }

    let mut termination = run_simplex(&mut ev, x0.to_vec(), f0, steps, cfg);
    for _ in 0..cfg.restarts {
        if termination == Termination::MaxEvals {
            break;
        }
        let before = ev.best_f;
        let start = ev.best_x.clone();
        termination = run_simplex(&mut ev, start, before, steps, cfg);
        if !(ev.best_f < before) {
            break;
        }
    }

    Ok(OptimizationResult {
        best_x: ev.best_x,
        best_f: ev.best_f,
        evals: ev.evals,
        trace: ev.trace,
        termination,
    })
}

struct Vertex {
    x: Vec<f64>,
    f: f64,
}

/// `base + t * (toward - base)`
fn lerp(base: &[f64], toward: &[f64], t: f64) -> Vec<f64> {
    base.iter().zip(toward).map(|(b, w)| b + t * (w - b)).collect()
}

fn run_simplex<F: FnMut(&[f64]) -> f64>(
    ev: &mut Evaluator<F>,
    x0: Vec<f64>,
    f0: f64,
    steps: &[f64],
    cfg: &OptimizerConfig,
) -> Termination {
    let n = x0.len();
    let mut simplex = Vec::with_capacity(n + 1);
    for (i, step) in steps.iter().enumerate() {
        let mut x = x0.clone();
        x[i] += step;
        let f = ev.eval(&x);
        simplex.push(Vertex { x, f });
    }
    simplex.insert(0, Vertex { x: x0, f: f0 });

    loop {
        simplex.sort_by(|a, b| a.f.partial_cmp(&b.f).unwrap_or(Ordering::Equal));

        let spread = simplex[n].f - simplex[0].f;
        if spread < cfg.f_tol {
            return Termination::FTol;
        }
        let best = &simplex[0].x;
        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.x.iter().zip(best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter < cfg.x_tol {
            return Termination::XTol;
        }
        if ev.evals >= cfg.max_evals {
            return Termination::MaxEvals;
        }

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(&v.x) {
                *c += x / n as f64;
            }
        }
        let worst = &simplex[n];
        let (f_best, f_second_worst, f_worst) = (simplex[0].f, simplex[n - 1].f, worst.f);

        let xr = lerp(&centroid, &worst.x, -cfg.reflection);
        let fr = ev.eval(&xr);

        if fr < f_best {
            let xe = lerp(&centroid, &xr, cfg.expansion);
            let fe = ev.eval(&xe);
            simplex[n] = if fe < fr {
                Vertex { x: xe, f: fe }
            } else {
                Vertex { x: xr, f: fr }
            };
            continue;
        }
        if fr < f_second_worst {
            simplex[n] = Vertex { x: xr, f: fr };
            continue;
        }
        if fr < f_worst {
            let xc = lerp(&centroid, &xr, cfg.contraction);
            let fc = ev.eval(&xc);
            if fc <= fr {
                simplex[n] = Vertex { x: xc, f: fc };
                continue;
            }
        } else {
            let xc = lerp(&centroid, &worst.x, cfg.contraction);
            let fc = ev.eval(&xc);
            if fc < f_worst {
                simplex[n] = Vertex { x: xc, f: fc };
                continue;
            }
        }

        // shrink toward the best vertex
        let anchor = simplex[0].x.clone();
        for v in simplex.iter_mut().skip(1) {
            v.x = lerp(&anchor, &v.x, cfg.shrink);
            v.f = ev.eval(&v.x);
        }
    }
}
