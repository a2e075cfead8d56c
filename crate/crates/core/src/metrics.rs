//! Progress measures. All of them read the mean map directly and never touch
//! the stochastic budget.

use crate::error::{Error, Result};
use crate::extragradient::solve_deterministic;
use crate::linalg::Vector;
use crate::maps::MonotoneMap;
use crate::problems::ProblemInstance;
use crate::sets::FeasibleSet;
use crate::trace::TraceOptions;

/// Step cap for the inner maximization of the gap function.
const GAP_MAX_STEPS: usize = 1_000_000;
const GAP_TOL: f64 = 1e-9;
/// Step cap for resolvent solves.
const RESOLVENT_MAX_STEPS: usize = 10_000_000;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricReport {
    pub natural_residual: f64,
    pub gap: Option<f64>,
    /// ‖T_λ(x)‖².
    pub yosida_sq: Option<f64>,
    pub saddle_gap: Option<f64>,
    pub dist_to_ref_sq: Option<f64>,
}

/// Values in [−1e−12, 0) are rounding noise and reported as zero.
fn clamp_nonnegative(v: f64) -> f64 {
    if (-1e-12..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

/// ‖x − Π_X(x − γF(x))‖, zero exactly at solutions of VI(X, F).
pub fn natural_residual(x: &Vector, map: &MonotoneMap, set: &FeasibleSet, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::invalid(format!("residual step must be > 0; got {gamma}")));
    }
    let step = x - map.evaluate(x) * gamma;
    Ok((x - set.project(&step)?).norm())
}

/// Natural residual at the default step γ = 1/L.
pub fn default_residual(x: &Vector, map: &MonotoneMap, set: &FeasibleSet) -> Result<f64> {
    natural_residual(x, map, set, 1.0 / map.lipschitz())
}

/// g(x) = sup_{y∈X} ⟨F(y), x − y⟩ + (μ/2)‖y − x‖² for affine F with μ > 0.
///
/// The inner objective has Hessian μI − (A + Aᵀ) ⪯ −μI, so projected gradient
/// ascent with step 1/(2L) converges linearly; it stops once the gradient
/// mapping falls below 1e−9.
pub fn strongly_monotone_gap(x: &Vector, map: &MonotoneMap, set: &FeasibleSet) -> Result<f64> {
    let (a, b) = map
        .as_affine()
        .ok_or_else(|| Error::MetricUnavailable("gap needs an affine map".into()))?;
    let mu = map.mu();
    if !(mu > 0.0) {
        return Err(Error::MetricUnavailable("gap needs mu > 0".into()));
    }
    let step = 1.0 / (2.0 * map.lipschitz());
    let objective = |y: &Vector| {
        let d = x - y;
        (a * y + b).dot(&d) + 0.5 * mu * d.norm_squared()
    };
    let mut y = set.project(x)?;
    for _ in 0..GAP_MAX_STEPS {
        let d = x - &y;
        let grad = a.tr_mul(&d) - (a * &y + b) - d * mu;
        let next = set.project(&(&y + grad * step))?;
        let moved = (&next - &y).norm() / step;
        y = next;
        if moved <= GAP_TOL {
            return Ok(clamp_nonnegative(objective(&y)));
        }
    }
    Err(Error::MetricUnavailable(format!(
        "gap maximization did not converge in {GAP_MAX_STEPS} steps"
    )))
}

/// J_λ(u): the solution of VI(X, F + (1/λ)(· − u)), solved deterministically
/// to natural residual `tol`.
pub fn resolvent(u: &Vector, lambda: f64, map: &MonotoneMap, set: &FeasibleSet, tol: f64) -> Result<Vector> {
    let shifted = map.shifted(lambda, u)?;
    let start = set.project(u)?;
    solve_deterministic(&shifted, set, &start, tol, RESOLVENT_MAX_STEPS).map_err(|e| match e {
        Error::NoConvergence { .. } => Error::MetricUnavailable(format!("resolvent solve: {e}")),
        other => other,
    })
}

/// ‖T_λ(u)‖ = ‖u − J_λ(u)‖/λ for T = F + N_X.
pub fn yosida_residual_for(
    u: &Vector,
    lambda: f64,
    map: &MonotoneMap,
    set: &FeasibleSet,
    tol: f64,
) -> Result<f64> {
    let j = resolvent(u, lambda, map, set, tol)?;
    Ok((u - j).norm() / lambda)
}

pub fn yosida_residual(u: &Vector, lambda: f64, problem: &ProblemInstance, tol: f64) -> Result<f64> {
    yosida_residual_for(u, lambda, problem.mean_map(), &problem.feasible_set, tol)
}

/// |⟨Āx, y⟩ − L(x*, y*)| for bimatrix problems.
pub fn saddle_gap(x: &Vector, y: &Vector, problem: &ProblemInstance) -> Result<f64> {
    let payoff = problem
        .payoff
        .as_ref()
        .ok_or_else(|| Error::MetricUnavailable("not a bimatrix problem".into()))?;
    let value = problem
        .reference_saddle_value
        .ok_or_else(|| Error::MetricUnavailable("no reference saddle value".into()))?;
    if x.len() != payoff.ncols() || y.len() != payoff.nrows() {
        return Err(Error::DimensionMismatch {
            expected: payoff.ncols() + payoff.nrows(),
            got: x.len() + y.len(),
        });
    }
    Ok(((payoff * x).dot(y) - value).abs())
}

/// Saddle gap of a stacked point z = (x, y).
pub fn saddle_gap_stacked(z: &Vector, problem: &ProblemInstance) -> Result<f64> {
    let payoff = problem
        .payoff
        .as_ref()
        .ok_or_else(|| Error::MetricUnavailable("not a bimatrix problem".into()))?;
    let n = payoff.ncols();
    if z.len() != n + payoff.nrows() {
        return Err(Error::DimensionMismatch {
            expected: n + payoff.nrows(),
            got: z.len(),
        });
    }
    let x = z.rows(0, n).into_owned();
    let y = z.rows(n, payoff.nrows()).into_owned();
    saddle_gap(&x, &y, problem)
}

/// Every metric the problem supports at `point`. Optional metrics that fail
/// to converge are left empty.
pub fn report(point: &Vector, problem: &ProblemInstance, options: &TraceOptions) -> Result<MetricReport> {
    let map = problem.mean_map();
    let set = &problem.feasible_set;
    let natural_residual = default_residual(point, map, set)?;
    let gap = if options.gap && map.mu() > 0.0 && map.as_affine().is_some() {
        strongly_monotone_gap(point, map, set).ok()
    } else {
        None
    };
    let yosida_sq = match options.yosida_lambda {
        Some(lambda) => yosida_residual_for(point, lambda, map, set, options.resolvent_tol)
            .ok()
            .map(|r| r * r),
        None => None,
    };
    let saddle_gap = if problem.payoff.is_some() && problem.reference_saddle_value.is_some() {
        Some(saddle_gap_stacked(point, problem)?)
    } else {
        None
    };
    let dist_to_ref_sq = problem
        .reference_solution
        .as_ref()
        .map(|r| clamp_nonnegative((point - r).norm_squared()));
    Ok(MetricReport {
        natural_residual,
        gap,
        yosida_sq,
        saddle_gap,
        dist_to_ref_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn scalar(x: f64) -> Vector {
        Vector::from_element(1, x)
    }

    #[test]
    fn natural_residual_examples() {
        // F(x) = x − 2 on [−1, 1].
        let map = MonotoneMap::identity_shift(scalar(2.0));
        let set = FeasibleSet::cube(1, -1.0, 1.0).unwrap();
        assert_eq!(natural_residual(&scalar(1.0), &map, &set, 1.0).unwrap(), 0.0);
        assert_eq!(natural_residual(&scalar(0.0), &map, &set, 1.0).unwrap(), 1.0);
        assert!(natural_residual(&scalar(0.0), &map, &set, 0.0).is_err());
    }

    #[test]
    fn gap_closed_form() {
        // F(x) = x on [−1, 1], μ = 1: inner objective ½x² − ½y², so g(x) = ½x².
        let map = MonotoneMap::identity_shift(scalar(0.0));
        let set = FeasibleSet::cube(1, -1.0, 1.0).unwrap();
        let g = strongly_monotone_gap(&scalar(0.5), &map, &set).unwrap();
        assert!((g - 0.125).abs() <= 1e-8, "{g}");
        assert!(strongly_monotone_gap(&scalar(0.0), &map, &set).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn gap_unavailable_for_merely_monotone_maps() {
        let map = MonotoneMap::zero(1);
        let set = FeasibleSet::cube(1, -1.0, 1.0).unwrap();
        assert!(matches!(
            strongly_monotone_gap(&scalar(0.5), &map, &set),
            Err(Error::MetricUnavailable(_))
        ));
        let f = MonotoneMap::from_fn(1, 1.0, 1.0, |x| x.clone()).unwrap();
        assert!(strongly_monotone_gap(&scalar(0.5), &f, &set).is_err());
    }

    #[test]
    fn yosida_of_identity_map() {
        // F(x) = x on [−10, 10], λ = 1: J(u) = u/2, so ‖T_λ(1)‖ = 0.5.
        let map = MonotoneMap::identity_shift(scalar(0.0));
        let set = FeasibleSet::cube(1, -10.0, 10.0).unwrap();
        let r = yosida_residual_for(&scalar(1.0), 1.0, &map, &set, 1e-12).unwrap();
        assert!((r - 0.5).abs() < 1e-10, "{r}");
    }

    #[test]
    fn yosida_of_zero_map_is_distance_to_set() {
        let map = MonotoneMap::zero(2);
        let set = FeasibleSet::simplex(2).unwrap();
        let u = Vector::from_row_slice(&[1.5, 0.7]);
        let lambda = 2.0;
        let expected = set.distance(&u).unwrap() / lambda;
        let r = yosida_residual_for(&u, lambda, &map, &set, 1e-12).unwrap();
        assert!((r - expected).abs() <= 1e-10);
    }

    #[test]
    fn affine_gap_is_concave_problem() {
        // Nonsymmetric A: the inner ascent must still certify g(x*) = 0.
        let a = Matrix::from_row_slice(2, 2, &[2.0, 1.0, -1.0, 2.0]);
        let x_star = Vector::from_row_slice(&[0.2, -0.3]);
        let b = -(&a * &x_star);
        let map = MonotoneMap::affine_tight(a, b).unwrap();
        let set = FeasibleSet::cube(2, -1.0, 1.0).unwrap();
        assert!(strongly_monotone_gap(&x_star, &map, &set).unwrap() <= 1e-12);
    }
}
