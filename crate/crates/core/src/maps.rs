//! Monotone maps F: Rⁿ → Rⁿ with declared strong-monotonicity modulus μ and
//! Lipschitz constant L.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{min_symmetric_eigenvalue, spectral_norm, Matrix, Vector};

/// Slack allowed when certifying affine metadata, relative to max(1, L).
const METADATA_TOL: f64 = 1e-9;

type MapFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

#[derive(Clone)]
enum MapKind {
    Affine { matrix: Matrix, offset: Vector },
    Function(MapFn),
}

/// A deterministic map with its (μ, L) metadata. Affine maps are certified at
/// construction; function-backed maps trust the declared constants.
#[derive(Clone)]
pub struct MonotoneMap {
    kind: MapKind,
    mu: f64,
    lipschitz: f64,
    dimension: usize,
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            MapKind::Affine { .. } => "affine",
            MapKind::Function(_) => "function",
        };
        f.debug_struct("MonotoneMap")
            .field("kind", &kind)
            .field("mu", &self.mu)
            .field("lipschitz", &self.lipschitz)
            .field("dimension", &self.dimension)
            .finish()
    }
}

fn check_constants(mu: f64, lipschitz: f64) -> Result<()> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::invalid(format!("mu must be >= 0; got {mu}")));
    }
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::invalid(format!("lipschitz must be > 0; got {lipschitz}")));
    }
    if mu > lipschitz {
        return Err(Error::invalid(format!(
            "mu must be <= lipschitz; got mu = {mu}, lipschitz = {lipschitz}"
        )));
    }
    Ok(())
}

impl MonotoneMap {
    /// F(x) = Ax + b. Fails unless λ_min((A + Aᵀ)/2) ≥ μ and ‖A‖₂ ≤ L.
    pub fn affine(matrix: Matrix, offset: Vector, mu: f64, lipschitz: f64) -> Result<Self> {
        check_constants(mu, lipschitz)?;
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: matrix.ncols(),
            });
        }
        if offset.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: offset.len(),
            });
        }
        if matrix.iter().chain(offset.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("MonotoneMap::affine"));
        }
        let tol = METADATA_TOL * lipschitz.max(1.0);
        let lambda_min = min_symmetric_eigenvalue(&matrix);
        if lambda_min < mu - tol {
            return Err(Error::invalid(format!(
                "declared mu = {mu} exceeds the smallest eigenvalue {lambda_min} of the symmetric part"
            )));
        }
        let norm = spectral_norm(&matrix);
        if norm > lipschitz + tol {
            return Err(Error::invalid(format!(
                "declared lipschitz = {lipschitz} is below the spectral norm {norm}"
            )));
        }
        Ok(MonotoneMap {
            kind: MapKind::Affine { matrix, offset },
            mu,
            lipschitz,
            dimension: n,
        })
    }

    /// Affine map with μ and L read off the matrix itself.
    pub fn affine_tight(matrix: Matrix, offset: Vector) -> Result<Self> {
        let mu = min_symmetric_eigenvalue(&matrix).max(0.0);
        let lipschitz = spectral_norm(&matrix);
        Self::affine(matrix, offset, mu.min(lipschitz), lipschitz)
    }

    /// F(x) = x − c.
    pub fn identity_shift(center: Vector) -> Self {
        let n = center.len();
        MonotoneMap {
            kind: MapKind::Affine {
                matrix: Matrix::identity(n, n),
                offset: -center,
            },
            mu: 1.0,
            lipschitz: 1.0,
            dimension: n,
        }
    }

    /// F ≡ 0, with nominal constants μ = 0, L = 1.
    pub fn zero(dimension: usize) -> Self {
        MonotoneMap {
            kind: MapKind::Affine {
                matrix: Matrix::zeros(dimension, dimension),
                offset: Vector::zeros(dimension),
            },
            mu: 0.0,
            lipschitz: 1.0,
            dimension,
        }
    }

    /// A map given by a closure. The declared constants are not verified.
    pub fn from_fn<F>(dimension: usize, mu: f64, lipschitz: f64, f: F) -> Result<Self>
    where
        F: Fn(&Vector) -> Vector + Send + Sync + 'static,
    {
        check_constants(mu, lipschitz)?;
        Ok(MonotoneMap {
            kind: MapKind::Function(Arc::new(f)),
            mu,
            lipschitz,
            dimension,
        })
    }

    pub fn evaluate(&self, x: &Vector) -> Vector {
        assert_eq!(x.len(), self.dimension, "map evaluated at wrong dimension");
        match &self.kind {
            MapKind::Affine { matrix, offset } => matrix * x + offset,
            MapKind::Function(f) => {
                let out = f(x);
                assert_eq!(out.len(), self.dimension, "map returned wrong dimension");
                out
            }
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// κ = L/μ; infinite for merely monotone maps.
    pub fn condition_number(&self) -> f64 {
        self.lipschitz / self.mu
    }

    pub fn as_affine(&self) -> Option<(&Matrix, &Vector)> {
        match &self.kind {
            MapKind::Affine { matrix, offset } => Some((matrix, offset)),
            MapKind::Function(_) => None,
        }
    }

    /// F + (1/λ)(· − center): the proximal subproblem map, with
    /// μ' = μ + 1/λ and L' = L + 1/λ.
    pub fn shifted(&self, lambda: f64, center: &Vector) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be > 0; got {lambda}")));
        }
        if center.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: center.len(),
            });
        }
        let inv = 1.0 / lambda;
        let kind = match &self.kind {
            MapKind::Affine { matrix, offset } => MapKind::Affine {
                matrix: matrix + Matrix::identity(self.dimension, self.dimension) * inv,
                offset: offset - center * inv,
            },
            MapKind::Function(f) => {
                let f = Arc::clone(f);
                let center = center.clone();
                MapKind::Function(Arc::new(move |x: &Vector| f(x) + (x - &center) * inv))
            }
        };
        Ok(MonotoneMap {
            kind,
            mu: self.mu + inv,
            lipschitz: self.lipschitz + inv,
            dimension: self.dimension,
        })
    }
}
