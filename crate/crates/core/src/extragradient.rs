//! Variance-reduced stochastic extragradient baseline, plus the deterministic
//! extragradient solver behind reference solutions and resolvent metrics.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::maps::MonotoneMap;
use crate::metrics::{self, default_residual};
use crate::oracle::{BudgetCounter, SamplingContext, StochasticOracle};
use crate::problems::ProblemInstance;
use crate::sets::FeasibleSet;
use crate::trace::{RunTrace, TraceOptions, TraceRow};
use crate::vs_ave::iterations_within;

/// Sampling lane of extragradient runs.
pub const LANE: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtragradientConfig {
    pub stepsize: f64,
    pub theta: f64,
    /// Offset inside the schedule N_k = ⌈θ(k+s) ln(k+s)^{1+b}⌉; unrelated to
    /// strong monotonicity.
    pub mu_shift: f64,
    pub b: f64,
    pub max_iterations: usize,
    /// Report the running average of half-step points instead of the last
    /// iterate.
    pub ergodic: bool,
}

impl ExtragradientConfig {
    /// Largest admissible step is 1/(√6 L); this takes 0.99 of it with
    /// θ = 1, s = 2.001, b = 0.001.
    pub fn for_lipschitz(lipschitz: f64) -> Self {
        ExtragradientConfig {
            stepsize: 0.99 * step_bound(lipschitz),
            theta: 1.0,
            mu_shift: 2.001,
            b: 1e-3,
            max_iterations: 1_000_000_000,
            ergodic: false,
        }
    }

    pub fn validate(&self, lipschitz: f64) -> Result<()> {
        let bound = step_bound(lipschitz);
        if !(self.stepsize > 0.0 && self.stepsize < bound) {
            return Err(Error::invalid(format!(
                "stepsize must be in (0, 1/(√6·L)) = (0, {bound}); got {}",
                self.stepsize
            )));
        }
        if !(self.theta > 0.0) {
            return Err(Error::invalid(format!("theta must be > 0; got {}", self.theta)));
        }
        if !(self.b > 0.0) {
            return Err(Error::invalid(format!("b must be > 0; got {}", self.b)));
        }
        if !(self.mu_shift > 1.0) {
            return Err(Error::invalid(format!("mu_shift must be > 1; got {}", self.mu_shift)));
        }
        Ok(())
    }
}

/// 1/(√6 L).
pub fn step_bound(lipschitz: f64) -> f64 {
    1.0 / (6f64.sqrt() * lipschitz)
}

/// N_k = ⌈θ (k+s) (ln(k+s))^{1+b}⌉.
pub fn eg_sample_size(k: usize, theta: f64, mu_shift: f64, b: f64) -> u64 {
    let t = k as f64 + mu_shift;
    (theta * t * t.ln().powf(1.0 + b)).ceil() as u64
}

/// One stochastic extragradient step with two independent batches of size n:
/// z̄ = Π(z − s·ĝ(z)), z⁺ = Π(z − s·ĝ(z̄)). Returns (z⁺, z̄).
pub fn eg_step(
    z: &Vector,
    set: &FeasibleSet,
    oracle: &StochasticOracle,
    stepsize: f64,
    n: u64,
    ctx: &mut SamplingContext,
) -> Result<(Vector, Vector)> {
    let g = oracle.batch_mean(z, n, &mut ctx.primary, &mut ctx.budget)?;
    let half = set.project(&(z - g.estimate * stepsize))?;
    let g_half = oracle.batch_mean(&half, n, &mut ctx.secondary, &mut ctx.budget)?;
    let next = set.project(&(z - g_half.estimate * stepsize))?;
    Ok((next, half))
}

#[derive(Debug, Clone)]
pub struct ExtragradientOutcome {
    pub last: Vector,
    /// Uniform average of the half-step points.
    pub averaged: Vector,
    pub iterations: usize,
    pub calls: u64,
    pub trace: RunTrace,
}

impl ExtragradientOutcome {
    pub fn reported(&self, ergodic: bool) -> &Vector {
        if ergodic {
            &self.averaged
        } else {
            &self.last
        }
    }
}

pub fn run_extragradient(
    problem: &ProblemInstance,
    z0: &Vector,
    config: &ExtragradientConfig,
    budget: BudgetCounter,
    options: &TraceOptions,
) -> Result<ExtragradientOutcome> {
    config.validate(problem.mean_map().lipschitz())?;
    let set = &problem.feasible_set;
    let mut ctx = problem.oracle.context(LANE, budget);
    let schedule = |k| eg_sample_size(k, config.theta, config.mu_shift, config.b);
    let planned = iterations_within(ctx.budget.remaining(), config.max_iterations, |k| Ok(schedule(k)));
    let cadence = options.cadence(planned);

    let mut trace = RunTrace::default();
    let record = |trace: &mut RunTrace, k: usize, calls: u64, point: &Vector| -> Result<()> {
        let metrics = if options.disabled {
            Default::default()
        } else {
            metrics::report(point, problem, options)?
        };
        trace.push(TraceRow {
            outer_k: k,
            inner_k: 0,
            calls,
            metrics,
        });
        Ok(())
    };

    let mut z = set.project(z0)?;
    let mut sum = Vector::zeros(z.len());
    let mut iterations = 0;
    record(&mut trace, 0, 0, &z)?;
    let average = |sum: &Vector, count: usize, fallback: &Vector| {
        if count == 0 {
            fallback.clone()
        } else {
            sum / count as f64
        }
    };

    for k in 0..config.max_iterations {
        match eg_step(&z, set, &problem.oracle, config.stepsize, schedule(k), &mut ctx) {
            Ok((next, half)) => {
                z = next;
                sum += half;
                iterations = k + 1;
            }
            Err(e) if e.is_budget_exhausted() => {
                trace.truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
        if iterations % cadence == 0 {
            let point = if config.ergodic {
                average(&sum, iterations, &z)
            } else {
                z.clone()
            };
            record(&mut trace, iterations, ctx.budget.consumed(), &point)?;
        }
    }

    let averaged = average(&sum, iterations, &z);
    let reported = if config.ergodic { &averaged } else { &z };
    record(&mut trace, iterations, ctx.budget.consumed(), reported)?;
    Ok(ExtragradientOutcome {
        last: z,
        averaged,
        iterations,
        calls: ctx.budget.consumed(),
        trace,
    })
}

/// Deterministic extragradient on `map` with step 1/(2L), run until the
/// natural residual (γ = 1/L) drops to `tol`.
pub fn solve_deterministic(
    map: &MonotoneMap,
    set: &FeasibleSet,
    start: &Vector,
    tol: f64,
    max_steps: usize,
) -> Result<Vector> {
    const CHECK_EVERY: usize = 8;
    let step = 0.5 / map.lipschitz();
    let mut z = set.project(start)?;
    let mut residual = default_residual(&z, map, set)?;
    for i in 0..max_steps {
        if i % CHECK_EVERY == 0 {
            residual = default_residual(&z, map, set)?;
            if residual <= tol {
                return Ok(z);
            }
        }
        let half = set.project(&(&z - map.evaluate(&z) * step))?;
        z = set.project(&(&z - map.evaluate(&half) * step))?;
    }
    residual = default_residual(&z, map, set).unwrap_or(residual);
    if residual <= tol {
        return Ok(z);
    }
    Err(Error::NoConvergence {
        iterations: max_steps,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    #[test]
    fn schedule_examples() {
        assert_eq!(eg_sample_size(0, 1.0, 2.001, 1e-3), 2);
        assert_eq!(eg_sample_size(100, 1.0, 2.001, 1e-3), 473);
        let seq: Vec<_> = (0..500).map(|k| eg_sample_size(k, 1.0, 2.001, 1e-3)).collect();
        assert!(seq.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn stepsize_bound_enforced() {
        let mut cfg = ExtragradientConfig::for_lipschitz(2.0);
        assert!(cfg.validate(2.0).is_ok());
        cfg.stepsize = step_bound(2.0);
        assert!(cfg.validate(2.0).is_err());
    }

    #[test]
    fn interior_root_is_fixed_point() {
        let c = Vector::from_row_slice(&[0.1, 0.2]);
        let oracle = StochasticOracle::deterministic(MonotoneMap::identity_shift(c.clone()));
        let set = FeasibleSet::cube(2, -1.0, 1.0).unwrap();
        let mut ctx = oracle.context(LANE, BudgetCounter::new(100));
        let (next, half) = eg_step(&c, &set, &oracle, 0.3, 3, &mut ctx).unwrap();
        assert_eq!(next, c);
        assert_eq!(half, c);
        assert_eq!(ctx.budget.consumed(), 6);
    }

    #[test]
    fn extragradient_contracts_where_gradient_step_diverges() {
        // F(x, y) = (y, −x) on R².
        let skew = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let map = MonotoneMap::affine(skew, Vector::zeros(2), 0.0, 1.0).unwrap();
        let oracle = StochasticOracle::deterministic(map.clone());
        let set = FeasibleSet::unconstrained(2);
        let mut ctx = oracle.context(LANE, BudgetCounter::unlimited());
        let start = Vector::from_row_slice(&[1.0, 0.0]);
        let (mut eg, mut plain) = (start.clone(), start.clone());
        for _ in 0..100 {
            eg = eg_step(&eg, &set, &oracle, 0.3, 1, &mut ctx).unwrap().0;
            plain = &plain - map.evaluate(&plain) * 0.3;
        }
        assert!(eg.norm() < 0.5);
        assert!(plain.norm() > 2.0);
    }
}
