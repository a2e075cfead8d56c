//! Closed convex feasible sets with exact Euclidean projections.

use crate::error::{Error, Result};
use crate::linalg::{all_finite, Vector};

/// A nonempty closed convex set with a closed-form or finite-step projection.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    /// Componentwise bounds; infinite bounds are allowed.
    Box { lower: Vector, upper: Vector },
    Ball { center: Vector, radius: f64 },
    /// The probability simplex {x ≥ 0, Σ xᵢ = 1}.
    Simplex { dimension: usize },
    /// Cartesian product, projected blockwise. `offsets[i]` is where block
    /// `i` starts; `offsets` has one trailing entry equal to the total
    /// dimension.
    Product {
        parts: Vec<FeasibleSet>,
        offsets: Vec<usize>,
    },
}

impl FeasibleSet {
    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.iter().chain(upper.iter()).any(|x| x.is_nan()) {
            return Err(Error::NonFinite("FeasibleSet::boxed"));
        }
        if let Some(i) = (0..lower.len()).find(|&i| lower[i] > upper[i]) {
            return Err(Error::invalid(format!(
                "box bound {i}: lower {} > upper {}",
                lower[i], upper[i]
            )));
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    /// The cube [lo, hi]^n.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::boxed(Vector::from_element(n, lo), Vector::from_element(n, hi))
    }

    /// All of Rⁿ, expressed as an unbounded box.
    pub fn unconstrained(n: usize) -> Self {
        FeasibleSet::Box {
            lower: Vector::from_element(n, f64::NEG_INFINITY),
            upper: Vector::from_element(n, f64::INFINITY),
        }
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("ball radius must be > 0; got {radius}")));
        }
        if !all_finite(&center) {
            return Err(Error::NonFinite("FeasibleSet::ball"));
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    pub fn simplex(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("simplex dimension must be >= 1"));
        }
        Ok(FeasibleSet::Simplex { dimension })
    }

    pub fn product(parts: Vec<FeasibleSet>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::invalid("product of zero sets"));
        }
        let mut offsets = Vec::with_capacity(parts.len() + 1);
        let mut total = 0;
        for p in &parts {
            offsets.push(total);
            total += p.dimension();
        }
        offsets.push(total);
        Ok(FeasibleSet::Product { parts, offsets })
    }

    pub fn dimension(&self) -> usize {
        match self {
            FeasibleSet::Box { lower, .. } => lower.len(),
            FeasibleSet::Ball { center, .. } => center.len(),
            FeasibleSet::Simplex { dimension } => *dimension,
            FeasibleSet::Product { offsets, .. } => *offsets.last().unwrap(),
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, v: &Vector) -> Result<Vector> {
        if v.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: v.len(),
            });
        }
        if !all_finite(v) {
            return Err(Error::NonFinite("FeasibleSet::project"));
        }
        Ok(self.project_unchecked(v))
    }

    fn project_unchecked(&self, v: &Vector) -> Vector {
        match self {
            FeasibleSet::Box { lower, upper } => {
                Vector::from_iterator(v.len(), (0..v.len()).map(|i| v[i].clamp(lower[i], upper[i])))
            }
            FeasibleSet::Ball { center, radius } => {
                let d = v - center;
                let norm = d.norm();
                if norm <= *radius {
                    v.clone()
                } else {
                    center + d * (*radius / norm)
                }
            }
            FeasibleSet::Simplex { .. } => simplex_projection(v.as_slice()),
            FeasibleSet::Product { parts, offsets } => {
                let mut out = Vector::zeros(v.len());
                for (i, part) in parts.iter().enumerate() {
                    let (start, end) = (offsets[i], offsets[i + 1]);
                    let block = v.rows(start, end - start).into_owned();
                    out.rows_mut(start, end - start)
                        .copy_from(&part.project_unchecked(&block));
                }
                out
            }
        }
    }

    /// ‖v − Π(v)‖; zero iff v lies in the set.
    pub fn distance(&self, v: &Vector) -> Result<f64> {
        Ok((v - self.project(v)?).norm())
    }

    pub fn contains(&self, v: &Vector, tol: f64) -> bool {
        self.distance(v).map(|d| d <= tol).unwrap_or(false)
    }

    /// A deterministic feasible point: the projection of the origin, or the
    /// barycenter for simplices.
    pub fn default_point(&self) -> Vector {
        match self {
            FeasibleSet::Simplex { dimension } => {
                Vector::from_element(*dimension, 1.0 / *dimension as f64)
            }
            FeasibleSet::Product { parts, offsets } => {
                let mut out = Vector::zeros(self.dimension());
                for (i, part) in parts.iter().enumerate() {
                    out.rows_mut(offsets[i], offsets[i + 1] - offsets[i])
                        .copy_from(&part.default_point());
                }
                out
            }
            _ => self.project_unchecked(&Vector::zeros(self.dimension())),
        }
    }
}

/// Projection onto the probability simplex of `v.len()` dimensions.
pub fn project_simplex(dimension: usize, v: &Vector) -> Result<Vector> {
    FeasibleSet::simplex(dimension)?.project(v)
}

/// Sort-based threshold method: find τ such that Σ max(vᵢ − τ, 0) = 1.
fn simplex_projection(v: &[f64]) -> Vector {
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            tau = candidate;
        } else {
            break;
        }
    }
    Vector::from_iterator(v.len(), v.iter().map(|&x| (x - tau).max(0.0)))
}
