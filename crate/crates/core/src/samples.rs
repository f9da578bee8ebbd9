//! Fixed rational sample grids inside the ball.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::scalar::{exact, ratio, Exact};

/// Scalars of the default grid, all of modulus at most `1/2`:
/// `0, ±3/10, ±2/5, ±(1/4 + i/4), i/2, 1/5 - i/10`.
pub fn default_scalars() -> Vec<Exact> {
    let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    vec![
        ratio(0, 1),
        ratio(3, 10),
        ratio(-3, 10),
        ratio(2, 5),
        ratio(-2, 5),
        exact(q(1, 4), q(1, 4)),
        exact(q(-1, 4), q(-1, 4)),
        exact(BigRational::zero(), q(1, 2)),
        exact(q(1, 5), q(-1, 10)),
    ]
}

/// Each default scalar `c` as `c e_1`; in dimension `d ≥ 2` also the
/// diagonal point `(c/d, …, c/d)` for `c ≠ 0`.
pub fn default_samples(dimension: usize) -> Vec<Vec<Exact>> {
    let mut out = Vec::new();
    for c in default_scalars() {
        let mut axis = vec![ratio(0, 1); dimension];
        axis[0] = c.clone();
        out.push(axis);
    }
    if dimension >= 2 {
        let scale = ratio(1, dimension as i64);
        for c in default_scalars().into_iter().skip(1) {
            out.push(vec![c * scale.clone(); dimension]);
        }
    }
    out
}

/// `count` points on the circle of radius `1/4`, via the rational
/// parametrisation `((1 - t²)/(1 + t²), 2t/(1 + t²))` with `t` close to
/// `tan(θ/2)` at denominator 1000. Point `j` lies on coordinate axis `j mod d`.
pub fn dense_samples(dimension: usize, count: usize) -> Vec<Vec<Exact>> {
    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        let theta = core::f64::consts::TAU * j as f64 / count as f64;
        let half = theta / 2.0;
        // tan(θ/2) is unbounded near θ = π; the point there is -1 exactly
        let z = if (half - core::f64::consts::FRAC_PI_2).abs() < 1e-9 {
            ratio(-1, 4)
        } else {
            let t = num_traits::Float::round(num_traits::Float::tan(half) * 1000.0);
            let t = BigRational::new(BigInt::from(t as i64), BigInt::from(1000));
            let one = BigRational::from_integer(BigInt::from(1));
            let den = &one + &t * &t;
            let quarter = BigRational::new(BigInt::from(1), BigInt::from(4));
            exact(
                &quarter * (&one - &t * &t) / &den,
                &quarter * (BigRational::from_integer(BigInt::from(2)) * &t) / &den,
            )
        };
        let mut point = vec![ratio(0, 1); dimension];
        point[j % dimension] = z;
        out.push(point);
    }
    out
}

/// All pairs `(y, t)` drawn from the given grids.
pub fn sample_pairs(left: &[Vec<Exact>], right: &[Vec<Exact>]) -> Vec<(Vec<Exact>, Vec<Exact>)> {
    left.iter()
        .flat_map(|y| right.iter().map(move |t| (y.clone(), t.clone())))
        .collect()
}
