//! Proximal-point algorithm with variable sample sizes (PPAWSS) for merely
//! monotone SVIs.
//!
//! Outer step k solves the 1/λ-strongly monotone subproblem
//! VI(X, F + (1/λ)(· − u_k)) inexactly with ℓ_k iterations of VS-Ave,
//! where ℓ_k = ⌊2 log_{1/q}((1+k)^α)⌋, then relaxes:
//! u_{k+1} = η z_k + (1 − η) u_k.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::metrics;
use crate::oracle::BudgetCounter;
use crate::problems::ProblemInstance;
use crate::trace::{RunTrace, TraceOptions, TraceRow};
use crate::vs_ave::{self, QRule, VsAveConfig};

/// Sampling lane of PPAWSS runs (shared by all inner solves of one run).
pub const LANE: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpawssConfig {
    pub lambda: f64,
    /// Relaxation weight, strictly inside (0, 2).
    pub eta: f64,
    /// Inner-iteration growth exponent, > 1.
    pub alpha: f64,
    /// Inner batch growth ρ = q^β, β > 1.
    pub beta: f64,
    pub outer_iterations: usize,
    pub min_inner: usize,
    /// Start each inner solve at u_k instead of u₀.
    pub warm_start: bool,
    pub q_rule: QRule,
    pub min_batch: u64,
}

impl Default for PpawssConfig {
    fn default() -> Self {
        PpawssConfig {
            lambda: 1.0,
            eta: 1.0,
            alpha: 1.001,
            beta: 1.001,
            outer_iterations: 100,
            min_inner: 1,
            warm_start: true,
            q_rule: QRule::KappaPlusTwo,
            min_batch: 1,
        }
    }
}

impl PpawssConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be > 0; got {}", self.lambda)));
        }
        if !(self.eta > 0.0 && self.eta < 2.0) {
            return Err(Error::invalid(format!("eta must lie in (0, 2); got {}", self.eta)));
        }
        if !(self.alpha > 1.0 && self.alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must be > 1; got {}", self.alpha)));
        }
        if !(self.beta > 1.0 && self.beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be > 1; got {}", self.beta)));
        }
        if self.min_inner == 0 {
            return Err(Error::invalid("min_inner must be >= 1"));
        }
        if self.min_batch == 0 {
            return Err(Error::invalid("min_batch must be >= 1"));
        }
        Ok(())
    }

    /// κ_in = (L + 1/λ)/(1/λ) = λL + 1.
    pub fn inner_kappa(&self, lipschitz: f64) -> f64 {
        self.lambda * lipschitz + 1.0
    }

    pub fn inner_q(&self, lipschitz: f64) -> f64 {
        self.q_rule.q(self.inner_kappa(lipschitz))
    }

    /// VS-Ave configuration of outer step k.
    pub fn inner_config(&self, k: usize, lipschitz: f64) -> VsAveConfig {
        let q = self.inner_q(lipschitz);
        let inv = 1.0 / self.lambda;
        VsAveConfig {
            mu: inv,
            lipschitz: lipschitz + inv,
            rho: q.powf(self.beta),
            max_iterations: inner_iterations(k, q, self.alpha, self.min_inner),
            min_batch: self.min_batch,
        }
    }
}

/// ℓ_k = max(min_inner, ⌊2α ln(1+k) / ln(1/q)⌋).
pub fn inner_iterations(k: usize, q: f64, alpha: f64, min_inner: usize) -> usize {
    let raw = (2.0 * alpha * (1.0 + k as f64).ln() / (1.0 / q).ln()).floor();
    (raw as usize).max(min_inner)
}

/// The strongly monotone subproblem VI(X, F + (1/λ)(· − u_k)). It samples
/// through the same noise model; callers charge it to the outer budget.
pub fn prox_subproblem(problem: &ProblemInstance, u_k: &Vector, lambda: f64) -> Result<ProblemInstance> {
    ProblemInstance::new(problem.oracle.shift(lambda, u_k)?, problem.feasible_set.clone())
}

/// η z + (1 − η) u. May leave X when η > 1.
pub fn relaxation_step(u: &Vector, z: &Vector, eta: f64) -> Vector {
    z * eta + u * (1.0 - eta)
}

#[derive(Debug, Clone)]
pub struct PpawssOutcome {
    pub point: Vector,
    pub outer_iterations: usize,
    /// ℓ_k actually completed at each outer step.
    pub inner_iterations: Vec<usize>,
    pub calls: u64,
    pub trace: RunTrace,
}

pub fn run_ppawss(
    problem: &ProblemInstance,
    u0: &Vector,
    config: &PpawssConfig,
    budget: BudgetCounter,
    options: &TraceOptions,
) -> Result<PpawssOutcome> {
    config.validate()?;
    let set = &problem.feasible_set;
    let lipschitz = problem.mean_map().lipschitz();
    let mut ctx = problem.oracle.context(LANE, budget);
    let cadence = options.every.unwrap_or(1).max(1);
    let start = set.project(u0)?;
    let mut u = start.clone();
    let mut trace = RunTrace::default();
    let mut inner_done = Vec::new();

    let record = |trace: &mut RunTrace, k: usize, inner: usize, calls: u64, point: &Vector| -> Result<()> {
        let metrics = if options.disabled {
            Default::default()
        } else {
            metrics::report(point, problem, options)?
        };
        trace.push(TraceRow {
            outer_k: k,
            inner_k: inner,
            calls,
            metrics,
        });
        Ok(())
    };
    record(&mut trace, 0, 0, 0, &u)?;

    for k in 0..config.outer_iterations {
        let inner_cfg = config.inner_config(k, lipschitz);
        let sub = prox_subproblem(problem, &u, config.lambda)?;
        let y0 = if config.warm_start { &u } else { &start };
        let inner = vs_ave::run_core(&sub.oracle, set, y0, &inner_cfg, &mut ctx, |_, _| Ok(()))?;
        if inner.iterations == 0 {
            trace.truncated = true;
            let last_inner = inner_done.last().copied().unwrap_or(0);
            record(&mut trace, k, last_inner, ctx.budget.consumed(), &u)?;
            break;
        }
        // A budget-truncated inner solve still yields the average of its
        // completed iterations; it becomes z_k for the final relaxation.
        u = relaxation_step(&u, &inner.averaged, config.eta);
        inner_done.push(inner.iterations);
        let done = k + 1;
        if inner.truncated {
            trace.truncated = true;
            record(&mut trace, done, inner.iterations, ctx.budget.consumed(), &u)?;
            break;
        }
        if done % cadence == 0 || done == config.outer_iterations {
            record(&mut trace, done, inner.iterations, ctx.budget.consumed(), &u)?;
        }
    }

    Ok(PpawssOutcome {
        point: u,
        outer_iterations: inner_done.len(),
        inner_iterations: inner_done,
        calls: ctx.budget.consumed(),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_iteration_examples() {
        assert_eq!(inner_iterations(0, 0.8, 2.0, 1), 1);
        assert_eq!(inner_iterations(3, 0.8, 2.0, 1), 24);
        let q = 0.95;
        let seq: Vec<_> = (0..100).map(|k| inner_iterations(k, q, 1.5, 1)).collect();
        assert!(seq.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn relaxation_examples() {
        let u = Vector::from_row_slice(&[0.0, 0.0]);
        let z = Vector::from_row_slice(&[2.0, 2.0]);
        assert_eq!(relaxation_step(&u, &z, 1.0), z);
        assert_eq!(relaxation_step(&u, &z, 0.5), Vector::from_row_slice(&[1.0, 1.0]));
        let r = relaxation_step(&Vector::zeros(1), &Vector::from_element(1, 1.0), 1.5);
        assert_eq!(r[0], 1.5);
    }

    #[test]
    fn inner_metadata() {
        let cfg = PpawssConfig {
            lambda: 3500.0,
            ..Default::default()
        };
        let inner = cfg.inner_config(0, 7.05);
        assert_eq!(inner.mu, 1.0 / 3500.0);
        assert_eq!(inner.lipschitz, 7.05 + 1.0 / 3500.0);
        assert!((inner.kappa() - 24676.0).abs() < 1e-6);
        assert!((cfg.inner_kappa(7.05) - 24676.0).abs() < 1e-9);
        assert!(inner.validate().is_ok());
    }

    #[test]
    fn config_validation() {
        let bad = |f: fn(&mut PpawssConfig)| {
            let mut c = PpawssConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.eta = 2.0));
        assert!(bad(|c| c.eta = 0.0));
        assert!(bad(|c| c.alpha = 1.0));
        assert!(bad(|c| c.beta = 1.0));
        assert!(bad(|c| c.lambda = 0.0));
        assert!(bad(|c| c.min_inner = 0));
        assert!(PpawssConfig::default().validate().is_ok());
    }
}
