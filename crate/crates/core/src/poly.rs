//! Truncated multivariate polynomials over a [`Scalar`].
//!
//! Used for expansions in `z` (powers of `1/k_w`) and in `w̄` (the residual
//! series of a criterion).

use alloc::collections::BTreeMap;

use crate::scalar::{Mode, Scalar};
use crate::series::MultiIndex;

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedPoly<S> {
    nvars: usize,
    degree: usize,
    coeffs: BTreeMap<MultiIndex, S>,
}

impl<S: Scalar> TruncatedPoly<S> {
    pub fn zero(nvars: usize, degree: usize) -> Self {
        TruncatedPoly {
            nvars,
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, degree: usize, c: S) -> Self {
        let mut p = Self::zero(nvars, degree);
        p.set(MultiIndex::zero(nvars), c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Sets a coefficient; terms above the truncation degree are dropped.
    pub fn set(&mut self, alpha: MultiIndex, c: S) {
        debug_assert_eq!(alpha.dim(), self.nvars);
        if alpha.degree() > self.degree {
            return;
        }
        if c.is_zero() {
            self.coeffs.remove(&alpha);
        } else {
            self.coeffs.insert(alpha, c);
        }
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> S {
        self.coeffs.get(alpha).cloned().unwrap_or_else(S::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &S)> {
        self.coeffs.iter()
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.degree = self.degree.min(other.degree);
        for (a, c) in &other.coeffs {
            let v = out.coeff(a) - c.clone();
            out.set(a.clone(), v);
        }
        out.coeffs.retain(|a, _| a.degree() <= out.degree);
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let degree = self.degree.min(other.degree);
        let mut out = Self::zero(self.nvars, degree);
        for (a, ca) in &self.coeffs {
            if a.degree() > degree {
                continue;
            }
            for (b, cb) in &other.coeffs {
                if a.degree() + b.degree() > degree {
                    continue;
                }
                let key = a.add(b);
                let v = out.coeff(&key) + ca.clone() * cb.clone();
                out.set(key, v);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.nvars, self.degree, S::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Lowest total degree carrying a significant coefficient: any nonzero
    /// one in exact mode, `|c| > threshold` in float mode.
    pub fn lowest_significant_degree(&self, threshold: f64) -> Option<usize> {
        self.coeffs
            .iter()
            .filter(|(_, c)| match S::MODE {
                Mode::Exact => !c.is_zero(),
                Mode::Float => c.abs_f64() > threshold,
            })
            .map(|(a, _)| a.degree())
            .min()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Exact};
    use alloc::vec;

    #[test]
    fn binomial_square() {
        let mut p: TruncatedPoly<Exact> = TruncatedPoly::constant(1, 4, Scalar::one());
        p.set(MultiIndex::new(vec![1]), ratio(-1, 2));
        let sq = p.pow(2);
        assert_eq!(sq.coeff(&MultiIndex::new(vec![1])), ratio(-1, 1));
        assert_eq!(sq.coeff(&MultiIndex::new(vec![2])), ratio(1, 4));
        assert_eq!(sq.lowest_significant_degree(0.0), Some(0));
    }
}
