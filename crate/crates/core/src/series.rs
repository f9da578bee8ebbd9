//! Exact one-variable power series and multi-index combinatorics.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Exponent tuple `α = (α_1, …, α_d)` of the monomial `z^α`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// The unit index `e_i`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|α| = α_1 + ⋯ + α_d`.
    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Componentwise sum. Panics on a dimension mismatch.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), other.dim(), "multi-index dimension mismatch");
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise difference, `None` if any entry would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if self.dim() != other.dim() {
            return None;
        }
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    /// `(α, β)` as one index on `d₁ + d₂` variables.
    pub fn concat(&self, other: &MultiIndex) -> MultiIndex {
        let mut e = self.0.clone();
        e.extend_from_slice(&other.0);
        MultiIndex(e)
    }

    pub fn split_at(&self, mid: usize) -> (MultiIndex, MultiIndex) {
        let (a, b) = self.0.split_at(mid);
        (MultiIndex(a.to_vec()), MultiIndex(b.to_vec()))
    }

    pub fn permuted(&self, perm: &[usize]) -> MultiIndex {
        MultiIndex(perm.iter().map(|&i| self.0[i]).collect())
    }

    /// All indices of dimension `dim` and degree exactly `n`, in lexicographic order.
    pub fn all_of_degree(dim: usize, n: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        if dim == 0 {
            if n == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            return out;
        }
        let mut cur = vec![0u32; dim];
        fill_degree(&mut cur, 0, n, &mut out);
        out
    }

    /// All indices with `|α| ≤ n`, graded by degree, lexicographic within a degree.
    pub fn all_up_to(dim: usize, n: usize) -> Vec<MultiIndex> {
        (0..=n).flat_map(|k| Self::all_of_degree(dim, k)).collect()
    }

    /// Nonzero `γ ≤ α` componentwise, in lexicographic order.
    pub fn nonzero_sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; self.dim()];
        loop {
            if cur.iter().any(|&e| e != 0) {
                out.push(MultiIndex(cur.clone()));
            }
            // odometer, last coordinate fastest
            let mut i = self.dim();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if cur[i] < self.0[i] {
                    cur[i] += 1;
                    for c in cur.iter_mut().skip(i + 1) {
                        *c = 0;
                    }
                    break;
                }
            }
        }
    }
}

fn fill_degree(cur: &mut [u32], pos: usize, remaining: usize, out: &mut Vec<MultiIndex>) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining as u32;
        out.push(MultiIndex(cur.to_vec()));
        return;
    }
    for e in 0..=remaining {
        cur[pos] = e as u32;
        fill_degree(cur, pos + 1, remaining - e, out);
    }
    cur[pos] = 0;
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", e)?;
        }
        f.write_str(")")
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `|α|! / (α_1! ⋯ α_d!)`, as a product of binomials.
pub fn multinomial(alpha: &MultiIndex) -> BigUint {
    let mut acc = BigUint::one();
    let mut running = 0u64;
    for &e in alpha.exponents() {
        running += u64::from(e);
        acc *= binomial(running, u64::from(e));
    }
    acc
}

pub(crate) fn uint_to_rational(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n.clone()))
}

/// Exact rational coefficients `c_0, …, c_N`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RationalSeries {
    coeffs: Vec<BigRational>,
}

impl RationalSeries {
    pub fn new(coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptySeries);
        }
        Ok(RationalSeries { coeffs })
    }

    pub fn from_fn(degree: usize, mut f: impl FnMut(usize) -> BigRational) -> Self {
        RationalSeries {
            coeffs: (0..=degree).map(&mut f).collect(),
        }
    }

    /// `(1, 0, …, 0)`.
    pub fn unit(degree: usize) -> Self {
        Self::from_fn(degree, |n| {
            if n == 0 {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Option<&BigRational> {
        self.coeffs.get(n)
    }

    pub fn truncate(&self, degree: usize) -> Result<Self> {
        if degree > self.degree() {
            return Err(Error::DegreeOutOfRange {
                degree,
                max: self.degree(),
            });
        }
        Ok(RationalSeries {
            coeffs: self.coeffs[..=degree].to_vec(),
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.degree().min(other.degree());
        Self::from_fn(n, |i| &self.coeffs[i] + &other.coeffs[i])
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.degree().min(other.degree());
        Self::from_fn(n, |i| &self.coeffs[i] - &other.coeffs[i])
    }

    /// Cauchy product truncated at the smaller degree.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.degree().min(other.degree());
        Self::from_fn(n, |k| {
            (0..=k).fold(BigRational::zero(), |acc, i| {
                acc + &self.coeffs[i] * &other.coeffs[k - i]
            })
        })
    }

    /// Multiplicative inverse via `c_n = -(1/a_0) Σ_{j=1}^{n} a_j c_{n-j}`.
    pub fn reciprocal(&self) -> Result<Self> {
        let a0 = &self.coeffs[0];
        if a0.is_zero() {
            return Err(Error::ZeroConstantTerm);
        }
        let inv0 = a0.recip();
        let mut c: Vec<BigRational> = Vec::with_capacity(self.coeffs.len());
        c.push(inv0.clone());
        for n in 1..self.coeffs.len() {
            let s = (1..=n).fold(BigRational::zero(), |acc, j| acc + &self.coeffs[j] * &c[n - j]);
            c.push(-(s * &inv0));
        }
        Ok(RationalSeries { coeffs: c })
    }

    pub fn pow(&self, p: u32) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidExponent);
        }
        let mut e = p;
        let mut base = self.clone();
        let mut acc: Option<Self> = None;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc.expect("p >= 1"))
    }

    /// Index of the first strictly negative coefficient.
    pub fn first_negative(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| c.is_negative())
    }
}

/// Ordered tuple of nonzero multi-indices summing to `target`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Composition {
    parts: Vec<MultiIndex>,
    target: MultiIndex,
}

impl Composition {
    pub fn parts(&self) -> &[MultiIndex] {
        &self.parts
    }

    pub fn target(&self) -> &MultiIndex {
        &self.target
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

/// All compositions of `alpha` into exactly `r` nonzero parts, ordered
/// lexicographically by their part sequences.
pub fn compositions(alpha: &MultiIndex, r: usize) -> Result<Vec<Composition>> {
    let degree = alpha.degree();
    if r == 0 || r > degree {
        return Err(Error::InvalidPartCount { parts: r, degree });
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(r);
    compose(alpha, r, &mut prefix, &mut |parts| {
        out.push(Composition {
            parts: parts.to_vec(),
            target: alpha.clone(),
        })
    });
    Ok(out)
}

/// Compositions with any number of parts, grouped by `r = 1..=|α|`. The zero
/// index has exactly one composition, the empty one.
pub fn all_compositions(alpha: &MultiIndex) -> Vec<Composition> {
    if alpha.is_zero() {
        return vec![Composition {
            parts: Vec::new(),
            target: alpha.clone(),
        }];
    }
    (1..=alpha.degree())
        .flat_map(|r| compositions(alpha, r).expect("r in range"))
        .collect()
}

fn compose(remaining: &MultiIndex, r: usize, prefix: &mut Vec<MultiIndex>, emit: &mut dyn FnMut(&[MultiIndex])) {
    if r == 1 {
        if !remaining.is_zero() {
            prefix.push(remaining.clone());
            emit(prefix);
            prefix.pop();
        }
        return;
    }
    for first in remaining.nonzero_sub_indices() {
        let rest = remaining.checked_sub(&first).expect("sub-index");
        if rest.degree() < r - 1 {
            continue;
        }
        prefix.push(first);
        compose(&rest, r - 1, prefix, emit);
        prefix.pop();
    }
}
