//! Variable sample-size averaging scheme (VS-Ave) for strongly monotone SVIs.
//!
//! Each iteration k draws two independent batches of size N_k = ⌊ρ^{−k}⌋:
//!
//! ```text
//! x_k     = Π_X[ (1/Γ_k) Σ_{i≤k} γ_i (y_i − (1/μ) ĝ(y_i)) ]
//! y_{k+1} = Π_X[ x_k − (1/L) ĝ(x_k) ]
//! γ_{k+1} = μ/(μ+L) · Γ_k,   Γ_{k+1} = Γ_k + γ_{k+1}
//! ```
//!
//! and the output is ȳ_K = (1/Γ_K) Σ_{i≤K} γ_i y_i. Both weighted sums are
//! carried incrementally, so an iteration costs O(n) beyond sampling.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::metrics;
use crate::oracle::{BudgetCounter, SamplingContext, StochasticOracle};
use crate::problems::ProblemInstance;
use crate::sets::FeasibleSet;
use crate::trace::{RunTrace, TraceOptions, TraceRow};

/// Sampling lane of standalone VS-Ave runs.
pub const LANE: u64 = 1;

/// Which contraction factor q(κ) to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QRule {
    /// q = 1 − 1/(κ+2), the factor of the linear-rate bound.
    #[default]
    KappaPlusTwo,
    /// q = 1 − 1/(κ+1).
    KappaPlusOne,
}

impl QRule {
    pub fn q(self, kappa: f64) -> f64 {
        match self {
            QRule::KappaPlusTwo => 1.0 - 1.0 / (kappa + 2.0),
            QRule::KappaPlusOne => 1.0 - 1.0 / (kappa + 1.0),
        }
    }
}

impl std::str::FromStr for QRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "kappa_plus_two" => Ok(QRule::KappaPlusTwo),
            "kappa_plus_one" => Ok(QRule::KappaPlusOne),
            other => Err(format!("unknown q rule `{other}` (expected kappa_plus_two or kappa_plus_one)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VsAveConfig {
    pub mu: f64,
    pub lipschitz: f64,
    pub rho: f64,
    /// K: the run performs exactly K iterations and returns ȳ_K.
    pub max_iterations: usize,
    pub min_batch: u64,
}

impl VsAveConfig {
    pub fn new(mu: f64, lipschitz: f64, rho: f64, max_iterations: usize) -> Self {
        VsAveConfig {
            mu,
            lipschitz,
            rho,
            max_iterations,
            min_batch: 1,
        }
    }

    /// ρ = q^β with q from `rule`.
    pub fn with_beta(mu: f64, lipschitz: f64, beta: f64, max_iterations: usize, rule: QRule) -> Self {
        let rho = rule.q(lipschitz / mu).powf(beta);
        Self::new(mu, lipschitz, rho, max_iterations)
    }

    pub fn kappa(&self) -> f64 {
        self.lipschitz / self.mu
    }

    /// 1 − 1/(κ+2): ρ must stay strictly below this.
    pub fn rho_bound(&self) -> f64 {
        QRule::KappaPlusTwo.q(self.kappa())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::invalid(format!("mu must be > 0; got {}", self.mu)));
        }
        if !(self.lipschitz >= self.mu && self.lipschitz.is_finite()) {
            return Err(Error::invalid(format!(
                "lipschitz must be >= mu = {}; got {}",
                self.mu, self.lipschitz
            )));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::invalid(format!("rho must lie in (0, 1); got {}", self.rho)));
        }
        let bound = self.rho_bound();
        if self.rho >= bound {
            return Err(Error::invalid(format!(
                "rho must be < 1 − 1/(κ+2) = {bound}; got {}",
                self.rho
            )));
        }
        if self.min_batch == 0 {
            return Err(Error::invalid("min_batch must be >= 1"));
        }
        Ok(())
    }
}

/// γ_{k+1} = μ/(μ+L)·Γ_k and Γ_{k+1} = Γ_k + γ_{k+1}.
pub fn gamma_update(_gamma: f64, big_gamma: f64, mu: f64, lipschitz: f64) -> (f64, f64) {
    let next = mu / (mu + lipschitz) * big_gamma;
    (next, big_gamma + next)
}

/// N_k = max(min_batch, ⌊ρ^{−k}⌋).
pub fn sample_size(k: usize, rho: f64, min_batch: u64) -> Result<u64> {
    let raw = rho.powf(-(k as f64)).floor();
    // Keep N_k well inside u64 so budget sums cannot overflow either.
    if !raw.is_finite() || raw >= (1u64 << 62) as f64 {
        return Err(Error::ScheduleOverflow(k));
    }
    Ok((raw as u64).max(min_batch))
}

#[derive(Debug, Clone, PartialEq)]
struct HistoryEntry {
    gamma: f64,
    y: Vector,
    estimate: Vector,
}

/// Iterates and running sums of VS-Ave.
#[derive(Debug, Clone, PartialEq)]
pub struct VsAveState {
    pub k: usize,
    pub gamma: f64,
    pub big_gamma: f64,
    /// Σ_{i≤k} γ_i (y_i − (1/μ) ĝ(y_i)) over completed x-steps.
    pub weighted_presum: Vector,
    /// Σ_{i≤k} γ_i y_i, including the current y_k.
    pub weighted_ysum: Vector,
    pub x: Vector,
    pub y: Vector,
    history: Option<Vec<HistoryEntry>>,
}

impl VsAveState {
    /// State at k = 0 with γ₀ = Γ₀ = 1.
    pub fn new(y0: Vector) -> Self {
        VsAveState {
            k: 0,
            gamma: 1.0,
            big_gamma: 1.0,
            weighted_presum: Vector::zeros(y0.len()),
            weighted_ysum: y0.clone(),
            x: y0.clone(),
            y: y0,
            history: None,
        }
    }

    /// Like [`new`](Self::new), but keeps every (γ_i, y_i, ĝ(y_i)) so the
    /// running sums can be recomputed from scratch.
    pub fn with_history(y0: Vector) -> Self {
        VsAveState {
            history: Some(Vec::new()),
            ..Self::new(y0)
        }
    }

    /// x_k = Π_X(weighted_presum / Γ_k) after folding in γ_k (y_k − ĝ(y_k)/μ).
    pub fn x_step(&mut self, set: &FeasibleSet, estimate_y: &Vector, mu: f64) -> Result<Vector> {
        self.weighted_presum += (&self.y - estimate_y / mu) * self.gamma;
        if let Some(history) = &mut self.history {
            history.push(HistoryEntry {
                gamma: self.gamma,
                y: self.y.clone(),
                estimate: estimate_y.clone(),
            });
        }
        self.x = set.project(&(&self.weighted_presum / self.big_gamma))?;
        Ok(self.x.clone())
    }

    /// Moves to k + 1 with the new y and the updated weights.
    pub fn advance(&mut self, y_next: Vector, mu: f64, lipschitz: f64) {
        let (gamma, big_gamma) = gamma_update(self.gamma, self.big_gamma, mu, lipschitz);
        self.gamma = gamma;
        self.big_gamma = big_gamma;
        self.weighted_ysum += &y_next * gamma;
        self.y = y_next;
        self.k += 1;
    }

    /// ȳ_k = (1/Γ_k) Σ_{i≤k} γ_i y_i.
    pub fn averaged(&self) -> Vector {
        &self.weighted_ysum / self.big_gamma
    }

    /// The presum rebuilt from retained history, if history is kept.
    pub fn recompute_presum(&self, mu: f64) -> Option<Vector> {
        let history = self.history.as_ref()?;
        let mut sum = Vector::zeros(self.y.len());
        for h in history {
            sum += (&h.y - &h.estimate / mu) * h.gamma;
        }
        Some(sum)
    }
}

/// y_{k+1} = Π_X(x_k − (1/L) ĝ(x_k)).
pub fn y_step(x: &Vector, set: &FeasibleSet, estimate_x: &Vector, lipschitz: f64) -> Result<Vector> {
    set.project(&(x - estimate_x / lipschitz))
}

/// Result of a VS-Ave run.
#[derive(Debug, Clone)]
pub struct VsAveOutcome {
    pub averaged: Vector,
    pub iterations: usize,
    pub calls: u64,
    pub trace: RunTrace,
}

pub(crate) struct CoreOutcome {
    pub averaged: Vector,
    pub iterations: usize,
    pub truncated: bool,
}

/// The iteration loop shared by standalone runs and PPAWSS inner solves.
/// `observe` sees the state after each completed iteration.
pub(crate) fn run_core<F>(
    oracle: &StochasticOracle,
    set: &FeasibleSet,
    y0: &Vector,
    config: &VsAveConfig,
    ctx: &mut SamplingContext,
    mut observe: F,
) -> Result<CoreOutcome>
where
    F: FnMut(&VsAveState, &SamplingContext) -> Result<()>,
{
    let mut state = VsAveState::new(set.project(y0)?);
    for k in 0..config.max_iterations {
        let step = (|| -> Result<Vector> {
            let n = sample_size(k, config.rho, config.min_batch)?;
            let at_y = oracle.batch_mean(&state.y, n, &mut ctx.primary, &mut ctx.budget)?;
            let x = state.x_step(set, &at_y.estimate, config.mu)?;
            let at_x = oracle.batch_mean(&x, n, &mut ctx.secondary, &mut ctx.budget)?;
            y_step(&x, set, &at_x.estimate, config.lipschitz)
        })();
        match step {
            Ok(y_next) => state.advance(y_next, config.mu, config.lipschitz),
            // An overflowing schedule caps the run like an exhausted budget.
            Err(e) if e.is_budget_exhausted() || matches!(e, Error::ScheduleOverflow(_)) => {
                return Ok(CoreOutcome {
                    averaged: state.averaged(),
                    iterations: k,
                    truncated: true,
                })
            }
            Err(e) => return Err(e),
        }
        observe(&state, ctx)?;
    }
    Ok(CoreOutcome {
        averaged: state.averaged(),
        iterations: config.max_iterations,
        truncated: false,
    })
}

/// Iterations of a schedule that fit into `remaining` calls (two batches of
/// N_k each), capped at `max`.
pub(crate) fn iterations_within(remaining: u64, max: usize, mut batch: impl FnMut(usize) -> Result<u64>) -> usize {
    let mut left = remaining;
    for k in 0..max {
        match batch(k) {
            Ok(n) if 2 * n <= left => left -= 2 * n,
            _ => return k,
        }
    }
    max
}

/// Runs K iterations of VS-Ave on `problem` (or until the budget runs out),
/// recording metrics of ȳ_k along the way.
pub fn run_vs_ave(
    problem: &ProblemInstance,
    y0: &Vector,
    config: &VsAveConfig,
    budget: BudgetCounter,
    options: &TraceOptions,
) -> Result<VsAveOutcome> {
    config.validate()?;
    let mut ctx = problem.oracle.context(LANE, budget);
    let planned = iterations_within(ctx.budget.remaining(), config.max_iterations, |k| {
        sample_size(k, config.rho, config.min_batch)
    });
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
    let start = problem.feasible_set.project(y0)?;
    record(&mut trace, 0, ctx.budget.consumed(), &start)?;
    let outcome = run_core(&problem.oracle, &problem.feasible_set, &start, config, &mut ctx, |state, ctx| {
        if state.k % cadence == 0 || state.k == config.max_iterations {
            record(&mut trace, state.k, ctx.budget.consumed(), &state.averaged())?;
        }
        Ok(())
    })?;
    if outcome.truncated {
        trace.truncated = true;
        record(&mut trace, outcome.iterations, ctx.budget.consumed(), &outcome.averaged)?;
    }
    Ok(VsAveOutcome {
        averaged: outcome.averaged,
        iterations: outcome.iterations,
        calls: ctx.budget.consumed(),
        trace,
    })
}
