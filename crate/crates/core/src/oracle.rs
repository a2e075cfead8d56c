//! Stochastic first-order oracle: mini-batch averages of G(x, ξ), seeded
//! counter-based sample streams, and evaluation-budget accounting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::maps::MonotoneMap;

/// Distribution of G(x, ξ) − F(x).
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    Zero,
    /// G(x, ξ) = F(x) + σ·ξ with ξ ~ N(0, I).
    AdditiveGaussian { sigma: f64 },
    /// For z = (x, y) with x ∈ R^cols, y ∈ R^rows: the bilinear map of a
    /// payoff matrix perturbed by `scale`·E, E with i.i.d. U[−1, 1] entries,
    /// so G(z, ξ) = F(z) + scale·(Eᵀy, −Ex).
    MatrixPerturbation { scale: f64, rows: usize, cols: usize },
}

/// Total single-sample evaluations consumed by one solver run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetCounter {
    consumed: u64,
    limit: u64,
}

impl BudgetCounter {
    pub fn new(limit: u64) -> Self {
        assert!(limit > 0, "budget limit must be positive");
        BudgetCounter { consumed: 0, limit }
    }

    pub fn unlimited() -> Self {
        Self::new(u64::MAX)
    }

    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn remaining(&self) -> u64 {
        self.limit - self.consumed
    }

    /// Reserves `n` calls, or refuses the whole batch.
    pub fn try_consume(&mut self, n: u64) -> Result<()> {
        if n > self.remaining() {
            return Err(Error::BudgetExhausted {
                consumed: self.consumed,
                limit: self.limit,
                requested: n,
            });
        }
        self.consumed += n;
        Ok(())
    }
}

/// A counter-based random stream keyed by (seed, stream id); the position
/// advances with every draw.
#[derive(Debug, Clone)]
pub struct SampleStream {
    rng: ChaCha8Rng,
}

impl SampleStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        SampleStream { rng }
    }

    pub fn stream_id(&self) -> u64 {
        self.rng.get_stream()
    }

    fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    fn symmetric_unit(&mut self) -> f64 {
        self.rng.random::<f64>() * 2.0 - 1.0
    }
}

/// Everything a run mutates while sampling: its budget and the two
/// independent substreams used for the two batches of an iteration.
#[derive(Debug, Clone)]
pub struct SamplingContext {
    pub budget: BudgetCounter,
    pub primary: SampleStream,
    pub secondary: SampleStream,
}

impl SamplingContext {
    /// Streams `2·lane` and `2·lane + 1` of `seed`. Distinct lanes never
    /// share randomness.
    pub fn new(seed: u64, lane: u64, budget: BudgetCounter) -> Self {
        SamplingContext {
            budget,
            primary: SampleStream::new(seed, 2 * lane),
            secondary: SampleStream::new(seed, 2 * lane + 1),
        }
    }
}

/// Mean of a mini-batch together with the number of calls it cost.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchMean {
    pub estimate: Vector,
    pub calls: u64,
}

/// Sampler for G(x, ξ) whose mean is `mean_map`.
#[derive(Debug, Clone)]
pub struct StochasticOracle {
    mean_map: MonotoneMap,
    noise: NoiseModel,
    seed: u64,
}

impl StochasticOracle {
    pub fn new(mean_map: MonotoneMap, noise: NoiseModel, seed: u64) -> Result<Self> {
        match noise {
            NoiseModel::Zero => {}
            NoiseModel::AdditiveGaussian { sigma } => {
                if !(sigma >= 0.0 && sigma.is_finite()) {
                    return Err(Error::invalid(format!("sigma must be >= 0; got {sigma}")));
                }
            }
            NoiseModel::MatrixPerturbation { scale, rows, cols } => {
                if !(scale >= 0.0 && scale.is_finite()) {
                    return Err(Error::invalid(format!("noise scale must be >= 0; got {scale}")));
                }
                if rows + cols != mean_map.dimension() {
                    return Err(Error::DimensionMismatch {
                        expected: mean_map.dimension(),
                        got: rows + cols,
                    });
                }
            }
        }
        Ok(StochasticOracle {
            mean_map,
            noise,
            seed,
        })
    }

    pub fn deterministic(mean_map: MonotoneMap) -> Self {
        StochasticOracle {
            mean_map,
            noise: NoiseModel::Zero,
            seed: 0,
        }
    }

    pub fn mean_map(&self) -> &MonotoneMap {
        &self.mean_map
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dimension(&self) -> usize {
        self.mean_map.dimension()
    }

    /// Same distribution, different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        StochasticOracle {
            seed,
            ..self.clone()
        }
    }

    /// Fresh sampling state for one run on `lane`.
    pub fn context(&self, lane: u64, budget: BudgetCounter) -> SamplingContext {
        SamplingContext::new(self.seed, lane, budget)
    }

    /// Declared bound ν² on E‖G(x, ξ) − F(x)‖² for a single sample. For the
    /// matrix model the bound holds on products of simplices.
    pub fn variance_bound(&self) -> f64 {
        match self.noise {
            NoiseModel::Zero => 0.0,
            NoiseModel::AdditiveGaussian { sigma } => self.dimension() as f64 * sigma * sigma,
            NoiseModel::MatrixPerturbation { scale, rows, cols } => {
                scale * scale * (rows + cols) as f64 / 3.0
            }
        }
    }

    /// The oracle of F + (1/λ)(· − center). Its noise is that of `self`; the
    /// budget is whatever the caller passes to [`batch_mean`](Self::batch_mean).
    pub fn shift(&self, lambda: f64, center: &Vector) -> Result<Self> {
        Ok(StochasticOracle {
            mean_map: self.mean_map.shifted(lambda, center)?,
            noise: self.noise.clone(),
            seed: self.seed,
        })
    }

    /// (1/n) Σⱼ G(x, ξⱼ) with ξⱼ drawn from `stream`. The batch is charged to
    /// `budget` before any sampling; a batch that does not fit is refused.
    pub fn batch_mean(
        &self,
        x: &Vector,
        n: u64,
        stream: &mut SampleStream,
        budget: &mut BudgetCounter,
    ) -> Result<BatchMean> {
        if n == 0 {
            return Err(Error::invalid("batch size must be >= 1"));
        }
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: x.len(),
            });
        }
        budget.try_consume(n)?;
        let mut estimate = self.mean_map.evaluate(x);
        match self.noise {
            NoiseModel::Zero => {}
            NoiseModel::AdditiveGaussian { sigma } => {
                // The mean of n i.i.d. N(0, σ²I) draws is exactly N(0, σ²/n·I).
                let scale = sigma / (n as f64).sqrt();
                for e in estimate.iter_mut() {
                    *e += scale * stream.normal();
                }
            }
            NoiseModel::MatrixPerturbation { scale, rows, cols } => {
                if scale > 0.0 {
                    let mut e_sum = Matrix::zeros(rows, cols);
                    for _ in 0..n {
                        for e in e_sum.iter_mut() {
                            *e += stream.symmetric_unit();
                        }
                    }
                    let factor = scale / n as f64;
                    let xs = x.rows(0, cols);
                    let ys = x.rows(cols, rows);
                    let top = e_sum.tr_mul(&ys) * factor;
                    let bottom = &e_sum * xs * factor;
                    for (i, t) in top.iter().enumerate() {
                        estimate[i] += t;
                    }
                    for (j, b) in bottom.iter().enumerate() {
                        estimate[cols + j] -= b;
                    }
                }
            }
        }
        Ok(BatchMean { estimate, calls: n })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_oracle(n: usize, noise: NoiseModel) -> StochasticOracle {
        StochasticOracle::new(MonotoneMap::identity_shift(Vector::zeros(n)), noise, 7).unwrap()
    }

    #[test]
    fn zero_noise_returns_mean_map() {
        let oracle = identity_oracle(3, NoiseModel::Zero);
        let mut ctx = oracle.context(0, BudgetCounter::new(100));
        let x = Vector::from_row_slice(&[1.0, -2.0, 0.5]);
        for n in [1, 5, 17] {
            let batch = oracle.batch_mean(&x, n, &mut ctx.primary, &mut ctx.budget).unwrap();
            assert_eq!(batch.estimate, x);
            assert_eq!(batch.calls, n);
        }
        assert_eq!(ctx.budget.consumed(), 23);
    }

    #[test]
    fn budget_refuses_whole_batch() {
        let oracle = identity_oracle(1, NoiseModel::Zero);
        let mut ctx = oracle.context(0, BudgetCounter::new(10));
        let x = Vector::zeros(1);
        oracle.batch_mean(&x, 8, &mut ctx.primary, &mut ctx.budget).unwrap();
        let err = oracle.batch_mean(&x, 3, &mut ctx.primary, &mut ctx.budget).unwrap_err();
        assert_eq!(
            err,
            Error::BudgetExhausted {
                consumed: 8,
                limit: 10,
                requested: 3
            }
        );
        assert_eq!(ctx.budget.consumed(), 8);
        oracle.batch_mean(&x, 2, &mut ctx.primary, &mut ctx.budget).unwrap();
        assert_eq!(ctx.budget.remaining(), 0);
    }

    #[test]
    fn zero_batch_rejected() {
        let oracle = identity_oracle(1, NoiseModel::Zero);
        let mut ctx = oracle.context(0, BudgetCounter::new(10));
        assert!(oracle
            .batch_mean(&Vector::zeros(1), 0, &mut ctx.primary, &mut ctx.budget)
            .is_err());
    }

    #[test]
    fn shift_examples() {
        // F ≡ 0, λ = 1, center 0 at x = 2 gives 2.
        let zero = StochasticOracle::deterministic(MonotoneMap::zero(1));
        let shifted = zero.shift(1.0, &Vector::zeros(1)).unwrap();
        let mut ctx = shifted.context(0, BudgetCounter::new(10));
        let out = shifted
            .batch_mean(&Vector::from_element(1, 2.0), 1, &mut ctx.primary, &mut ctx.budget)
            .unwrap();
        assert_eq!(out.estimate[0], 2.0);
        assert_eq!(shifted.mean_map().mu(), 1.0);
        assert_eq!(shifted.mean_map().lipschitz(), 2.0);
    }

    #[test]
    fn shifted_sample_at_center_equals_base_sample() {
        let base = identity_oracle(2, NoiseModel::AdditiveGaussian { sigma: 1.0 });
        let center = Vector::from_row_slice(&[0.3, -0.1]);
        let shifted = base.shift(0.25, &center).unwrap();
        let mut a = base.context(0, BudgetCounter::unlimited());
        let mut b = shifted.context(0, BudgetCounter::unlimited());
        let ga = base.batch_mean(&center, 1, &mut a.primary, &mut a.budget).unwrap();
        let gb = shifted.batch_mean(&center, 1, &mut b.primary, &mut b.budget).unwrap();
        assert!((ga.estimate - gb.estimate).amax() < 1e-15);
    }

    #[test]
    fn identical_streams_are_bit_identical() {
        let oracle = identity_oracle(4, NoiseModel::AdditiveGaussian { sigma: 2.0 });
        let x = Vector::from_element(4, 0.1);
        let draw = || {
            let mut ctx = oracle.context(3, BudgetCounter::unlimited());
            (0..5)
                .map(|i| {
                    oracle
                        .batch_mean(&x, 1 + i, &mut ctx.secondary, &mut ctx.budget)
                        .unwrap()
                        .estimate
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn lanes_do_not_share_randomness() {
        let oracle = identity_oracle(2, NoiseModel::AdditiveGaussian { sigma: 1.0 });
        let x = Vector::zeros(2);
        let mut a = oracle.context(0, BudgetCounter::unlimited());
        let mut b = oracle.context(1, BudgetCounter::unlimited());
        let ga = oracle.batch_mean(&x, 1, &mut a.primary, &mut a.budget).unwrap();
        let gb = oracle.batch_mean(&x, 1, &mut b.primary, &mut b.budget).unwrap();
        let gc = oracle.batch_mean(&x, 1, &mut a.secondary, &mut a.budget).unwrap();
        assert_ne!(ga.estimate, gb.estimate);
        assert_ne!(ga.estimate, gc.estimate);
    }
}
