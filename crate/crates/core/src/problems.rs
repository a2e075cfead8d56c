//! Test problems: the stochastic bimatrix game and synthetic strongly
//! monotone affine problems with known solutions.

use nalgebra::QR;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::extragradient::solve_deterministic;
use crate::fixture::Fixture;
use crate::linalg::{spectral_norm, Matrix, Vector};
use crate::maps::MonotoneMap;
use crate::metrics::default_residual;
use crate::oracle::{NoiseModel, StochasticOracle};
use crate::sets::FeasibleSet;

/// Residual tolerance used when a constructor certifies its own reference.
pub const REFERENCE_TOL: f64 = 1e-10;
/// Deterministic step cap for reference solves.
pub const REFERENCE_MAX_STEPS: usize = 10_000_000;

/// Stream of the instance generator; sampling streams are keyed separately
/// through the oracle seed.
const INSTANCE_STREAM: u64 = 0x5eed;

/// An SVI(X, F) together with its sampler and optional reference data.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub oracle: StochasticOracle,
    pub feasible_set: FeasibleSet,
    pub reference_solution: Option<Vector>,
    /// L(x*, y*) for bimatrix games.
    pub reference_saddle_value: Option<f64>,
    /// Mean payoff Ā (m × n) for bimatrix games; points are z = (x, y) with
    /// x ∈ Δ_n first.
    pub payoff: Option<Matrix>,
}

impl ProblemInstance {
    pub fn new(oracle: StochasticOracle, feasible_set: FeasibleSet) -> Result<Self> {
        if oracle.dimension() != feasible_set.dimension() {
            return Err(Error::DimensionMismatch {
                expected: feasible_set.dimension(),
                got: oracle.dimension(),
            });
        }
        Ok(ProblemInstance {
            oracle,
            feasible_set,
            reference_solution: None,
            reference_saddle_value: None,
            payoff: None,
        })
    }

    /// Attaches a reference solution after checking its natural residual.
    pub fn with_reference(mut self, solution: Vector, tol: f64) -> Result<Self> {
        let r = default_residual(&solution, self.mean_map(), &self.feasible_set)?;
        if r > tol {
            return Err(Error::invalid(format!(
                "reference solution has natural residual {r:e} > {tol:e}"
            )));
        }
        if let Some(payoff) = &self.payoff {
            let n = payoff.ncols();
            let x = solution.rows(0, n);
            let y = solution.rows(n, payoff.nrows());
            self.reference_saddle_value = Some((payoff * x).dot(&y));
        }
        self.reference_solution = Some(solution);
        Ok(self)
    }

    /// Solves for and attaches the reference solution.
    pub fn with_computed_reference(self, tol: f64) -> Result<Self> {
        let (solution, _) = reference_solution(&self, tol)?;
        self.with_reference(solution, tol)
    }

    pub fn mean_map(&self) -> &MonotoneMap {
        self.oracle.mean_map()
    }

    pub fn dimension(&self) -> usize {
        self.feasible_set.dimension()
    }

    pub fn is_bimatrix(&self) -> bool {
        self.payoff.is_some()
    }

    /// Same problem, sampled with `seed`.
    pub fn with_seed(&self, seed: u64) -> Self {
        ProblemInstance {
            oracle: self.oracle.with_seed(seed),
            ..self.clone()
        }
    }

    /// Same problem with the noise switched off.
    pub fn deterministic(&self) -> Self {
        ProblemInstance {
            oracle: StochasticOracle::deterministic(self.mean_map().clone()),
            ..self.clone()
        }
    }

    /// Fixture record for affine or bimatrix problems.
    pub fn fixture(&self) -> Option<Fixture> {
        if let Some(payoff) = &self.payoff {
            return Some(Fixture {
                kind: "bimatrix".into(),
                matrix: payoff.clone(),
                offset: None,
                solution: self.reference_solution.clone(),
                value: self.reference_saddle_value,
            });
        }
        let (a, b) = self.mean_map().as_affine()?;
        Some(Fixture {
            kind: "affine".into(),
            matrix: a.clone(),
            offset: Some(b.clone()),
            solution: self.reference_solution.clone(),
            value: None,
        })
    }
}

/// Parameters of the stochastic bimatrix game min_{x∈Δn} max_{y∈Δm} E⟨A(ξ)x, y⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BimatrixSpec {
    pub n: usize,
    pub m: usize,
    pub target_lipschitz: f64,
    pub noise_scale: f64,
    pub seed: u64,
}

impl BimatrixSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::invalid(format!(
                "bimatrix dimensions must be >= 1; got n = {}, m = {}",
                self.n, self.m
            )));
        }
        if !(self.target_lipschitz > 0.0 && self.target_lipschitz.is_finite()) {
            return Err(Error::invalid(format!(
                "target lipschitz must be > 0; got {}",
                self.target_lipschitz
            )));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::invalid(format!(
                "noise scale must be >= 0; got {}",
                self.noise_scale
            )));
        }
        Ok(())
    }
}

/// Ā with i.i.d. U[0, 1] entries, rescaled so ‖Ā‖₂ hits the target; the
/// reference solution is certified to [`REFERENCE_TOL`].
pub fn make_bimatrix(spec: &BimatrixSpec) -> Result<ProblemInstance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(INSTANCE_STREAM);
    let raw = Matrix::from_fn(spec.m, spec.n, |_, _| rng.random::<f64>());
    let norm = spectral_norm(&raw);
    let payoff = if norm > 0.0 {
        raw * (spec.target_lipschitz / norm)
    } else {
        raw
    };
    bimatrix_from_payoff(payoff, spec.noise_scale, spec.seed)?.with_computed_reference(REFERENCE_TOL)
}

/// The bimatrix SVI of a given mean payoff, without a reference solution.
/// F(x, y) = (Āᵀy, −Āx) on Δn × Δm.
pub fn bimatrix_from_payoff(payoff: Matrix, noise_scale: f64, seed: u64) -> Result<ProblemInstance> {
    let (m, n) = payoff.shape();
    if n == 0 || m == 0 {
        return Err(Error::invalid("empty payoff matrix"));
    }
    let mut operator = Matrix::zeros(n + m, n + m);
    operator.view_mut((0, n), (n, m)).copy_from(&payoff.transpose());
    operator.view_mut((n, 0), (m, n)).copy_from(&(-&payoff));
    let lipschitz = spectral_norm(&payoff).max(f64::MIN_POSITIVE);
    let map = MonotoneMap::affine(operator, Vector::zeros(n + m), 0.0, lipschitz)?;
    let noise = if noise_scale > 0.0 {
        NoiseModel::MatrixPerturbation {
            scale: noise_scale,
            rows: m,
            cols: n,
        }
    } else {
        NoiseModel::Zero
    };
    let oracle = StochasticOracle::new(map, noise, seed)?;
    let set = FeasibleSet::product(vec![FeasibleSet::simplex(n)?, FeasibleSet::simplex(m)?])?;
    let mut problem = ProblemInstance::new(oracle, set)?;
    problem.payoff = Some(payoff);
    Ok(problem)
}

/// F(x) = Ax + b on [−1, 1]ⁿ with A = Q·diag(d)·Qᵀ, Q a random orthogonal
/// matrix and d spanning [μ, L] (endpoints included when n ≥ 2). The root
/// x* is drawn from [−½, ½]ⁿ and b = −Ax*, so x* is the analytic solution.
pub fn make_affine_strongly_monotone(
    n: usize,
    mu: f64,
    lipschitz: f64,
    sigma: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    if n == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    if !(mu > 0.0) || !(lipschitz >= mu) || !lipschitz.is_finite() {
        return Err(Error::invalid(format!(
            "need 0 < mu <= lipschitz; got mu = {mu}, lipschitz = {lipschitz}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(INSTANCE_STREAM);
    let gaussian = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = QR::new(gaussian).q();
    let spectrum = Vector::from_fn(n, |i, _| match i {
        0 => mu,
        i if i == n - 1 => lipschitz,
        _ => rng.random_range(mu..=lipschitz),
    });
    let a = &q * Matrix::from_diagonal(&spectrum) * q.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let x_star = Vector::from_fn(n, |_, _| rng.random_range(-0.5..=0.5));
    let b = -(&a * &x_star);
    let map = MonotoneMap::affine(a, b, mu, lipschitz)?;
    let noise = if sigma > 0.0 {
        NoiseModel::AdditiveGaussian { sigma }
    } else {
        NoiseModel::Zero
    };
    let oracle = StochasticOracle::new(map, noise, seed)?;
    ProblemInstance::new(oracle, FeasibleSet::cube(n, -1.0, 1.0)?)?.with_reference(x_star, 1e-9)
}

/// Solves the mean-map VI deterministically (no stochastic budget) to natural
/// residual `tol`. Returns the point and, for bimatrix games, L(x*, y*).
pub fn reference_solution(problem: &ProblemInstance, tol: f64) -> Result<(Vector, Option<f64>)> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be > 0; got {tol}")));
    }
    let start = problem.feasible_set.default_point();
    let solution = solve_deterministic(
        problem.mean_map(),
        &problem.feasible_set,
        &start,
        tol,
        REFERENCE_MAX_STEPS,
    )?;
    let value = problem.payoff.as_ref().map(|payoff| {
        let n = payoff.ncols();
        (payoff * solution.rows(0, n)).dot(&solution.rows(n, payoff.nrows()))
    });
    Ok((solution, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_symmetric_eigenvalue, min_symmetric_eigenvalue};

    #[test]
    fn identity_map_reference() {
        let map = MonotoneMap::identity_shift(Vector::from_element(3, 0.5));
        let problem = ProblemInstance::new(
            StochasticOracle::deterministic(map),
            FeasibleSet::cube(3, -1.0, 1.0).unwrap(),
        )
        .unwrap();
        let (x, value) = reference_solution(&problem, 1e-12).unwrap();
        assert!((x - Vector::from_element(3, 0.5)).amax() < 1e-12);
        assert!(value.is_none());
    }

    #[test]
    fn matching_pennies_reference() {
        let payoff = Matrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let problem = bimatrix_from_payoff(payoff, 0.0, 1)
            .unwrap()
            .with_computed_reference(1e-11)
            .unwrap();
        let z = problem.reference_solution.as_ref().unwrap();
        assert!((z - Vector::from_element(4, 0.5)).amax() < 1e-9);
        assert!(problem.reference_saddle_value.unwrap().abs() < 1e-9);
    }

    #[test]
    fn affine_spectrum_hits_targets() {
        let p = make_affine_strongly_monotone(2, 1.0, 3.0, 0.0, 11).unwrap();
        let (a, _) = p.mean_map().as_affine().unwrap();
        assert!((min_symmetric_eigenvalue(a) - 1.0).abs() < 1e-9);
        assert!((max_symmetric_eigenvalue(a) - 3.0).abs() < 1e-9);
        let x = p.reference_solution.as_ref().unwrap();
        assert!(x.iter().all(|v| v.abs() <= 0.5));
    }

    #[test]
    fn singleton_bimatrix() {
        let spec = BimatrixSpec {
            n: 1,
            m: 1,
            target_lipschitz: 2.0,
            noise_scale: 0.5,
            seed: 3,
        };
        let p = make_bimatrix(&spec).unwrap();
        assert_eq!(p.reference_solution.as_ref().unwrap(), &Vector::from_element(2, 1.0));
        assert!((p.reference_saddle_value.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn spec_validation() {
        let bad = BimatrixSpec {
            n: 0,
            m: 2,
            target_lipschitz: 1.0,
            noise_scale: 0.0,
            seed: 0,
        };
        assert!(make_bimatrix(&bad).is_err());
        assert!(make_affine_strongly_monotone(3, 2.0, 1.0, 0.0, 0).is_err());
    }
}
