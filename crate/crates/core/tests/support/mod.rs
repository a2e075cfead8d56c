//! Independent reference implementations used by the integration and
//! acceptance suites. Nothing here calls into the projection or solver code
//! under test.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use svilab_core::Vector;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut impl Rng, n: usize, scale: f64) -> Vector {
    Vector::from_fn(n, |_, _| rng.random_range(-scale..=scale))
}

/// Euclidean projection onto the unit simplex by enumerating every support
/// set S: on S the KKT system gives x_S = v_S − τ with τ = (Σv_S − 1)/|S|.
/// Among candidates with x_S ≥ 0, the closest one to v is the projection.
pub fn brute_simplex(v: &Vector) -> Vector {
    let n = v.len();
    let mut best: Option<(f64, Vector)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let tau = (support.iter().map(|&i| v[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let mut x = Vector::zeros(n);
        let mut feasible = true;
        for &i in &support {
            x[i] = v[i] - tau;
            if x[i] < -1e-15 {
                feasible = false;
            }
        }
        if !feasible {
            continue;
        }
        let d = (&x - v).norm_squared();
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, x));
        }
    }
    best.expect("some support is always feasible").1
}

/// Projection onto a box by enumerating every pattern of (lower, free,
/// upper) per coordinate and keeping the closest feasible candidate.
pub fn brute_box(v: &Vector, lower: &Vector, upper: &Vector) -> Vector {
    let n = v.len();
    let mut best: Option<(f64, Vector)> = None;
    for code in 0..3usize.pow(n as u32) {
        let mut c = code;
        let mut x = Vector::zeros(n);
        for i in 0..n {
            x[i] = match c % 3 {
                0 => lower[i],
                1 => v[i],
                _ => upper[i],
            };
            c /= 3;
        }
        if (0..n).any(|i| x[i] < lower[i] || x[i] > upper[i]) {
            continue;
        }
        let d = (&x - v).norm_squared();
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, x));
        }
    }
    best.unwrap().1
}

/// Projection onto a ball via the KKT multiplier t ≥ 0: x = (v + t c)/(1 + t),
/// with t found by bisection on ‖x − c‖ = r.
pub fn bisect_ball(v: &Vector, center: &Vector, radius: f64) -> Vector {
    let at = |t: f64| (v + center * t) / (1.0 + t);
    if (v - center).norm() <= radius {
        return v.clone();
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while (at(hi) - center).norm() > radius {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (at(mid) - center).norm() > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(hi)
}

/// Uniform-ish point of the unit simplex (normalized exponentials).
pub fn simplex_point(rng: &mut impl Rng, n: usize) -> Vector {
    let e = Vector::from_fn(n, |_, _| -(1.0 - rng.random::<f64>()).ln());
    let s = e.sum();
    e / s
}

/// Least-squares slope of ys against xs.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
