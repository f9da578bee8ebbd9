//! Linear functionals given by their values `Λ(z^α)` on monomials.
//!
//! Everything is evaluated at a finite truncation degree. Norms computed here
//! are lower bounds of the true Riesz norm and grow monotonically with the
//! degree.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::kernel::{check_point, conj_point, monomial, Kernel, TensorKernel};
use crate::scalar::Scalar;
use crate::series::{binomial, uint_to_rational, MultiIndex};

#[derive(Clone, Debug, PartialEq)]
pub struct Functional<S> {
    dimension: usize,
    degree: usize,
    values: BTreeMap<MultiIndex, S>,
    label: String,
}

impl<S: Scalar> Functional<S> {
    /// Requires a value for every `α` with `|α| ≤ degree`; entries above the
    /// degree are dropped.
    pub fn new(
        dimension: usize,
        degree: usize,
        mut values: BTreeMap<MultiIndex, S>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidFunctional("dimension must be at least 1".to_string()));
        }
        if let Some(bad) = values.keys().find(|a| a.dim() != dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                found: bad.dim(),
            });
        }
        values.retain(|a, _| a.degree() <= degree);
        for alpha in MultiIndex::all_up_to(dimension, degree) {
            if !values.contains_key(&alpha) {
                return Err(Error::InvalidFunctional(format!("missing value for z^{}", alpha)));
            }
        }
        Ok(Functional {
            dimension,
            degree,
            values,
            label: label.into(),
        })
    }

    pub fn from_fn(
        dimension: usize,
        degree: usize,
        label: impl Into<String>,
        mut f: impl FnMut(&MultiIndex) -> S,
    ) -> Self {
        let values = MultiIndex::all_up_to(dimension, degree)
            .into_iter()
            .map(|a| {
                let v = f(&a);
                (a, v)
            })
            .collect();
        Functional {
            dimension,
            degree,
            values,
            label: label.into(),
        }
    }

    /// `Λ(f) = f(v)`, so `Λ(z^α) = v^α`.
    pub fn point_evaluation(v: &[S], degree: usize) -> Result<Self> {
        check_point(v.len(), v)?;
        if v.is_empty() {
            return Err(Error::InvalidFunctional("empty point".to_string()));
        }
        Ok(Self::from_fn(v.len(), degree, "point", |a| monomial(v, a)))
    }

    /// `Λ(f) = f(0) + f'(0)` on the disc: bounded, nonvanishing on kernel
    /// functions, not multiplicative.
    pub fn counterexample(degree: usize) -> Self {
        Self::from_fn(1, degree, "counterexample", |a| {
            if a.degree() <= 1 {
                S::one()
            } else {
                S::zero()
            }
        })
    }

    /// `Λ(z^α) = 1` for all `α`: the limit of evaluations at a boundary point
    /// along which the coordinates tend to one.
    pub fn boundary_limit_ones(dimension: usize, degree: usize) -> Self {
        Self::from_fn(dimension, degree, "boundary_limit_ones", |_| S::one())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn values(&self) -> &BTreeMap<MultiIndex, S> {
        &self.values
    }

    pub fn value(&self, alpha: &MultiIndex) -> Result<&S> {
        self.values.get(alpha).ok_or(Error::DegreeOutOfRange {
            degree: alpha.degree(),
            max: self.degree,
        })
    }

    /// `Λ(1)`.
    pub fn unit_value(&self) -> &S {
        &self.values[&MultiIndex::zero(self.dimension)]
    }

    /// `(Λ(z_1), …, Λ(z_d))`, or `None` at degree zero.
    pub fn coordinate_values(&self) -> Option<Vec<S>> {
        if self.degree == 0 {
            return None;
        }
        Some(
            (0..self.dimension)
                .map(|i| self.values[&MultiIndex::unit(self.dimension, i)].clone())
                .collect(),
        )
    }

    /// `Λ(z)^α = Π_j Λ(z_j)^{α_j}`.
    pub fn shorthand(&self, alpha: &MultiIndex) -> S {
        match self.coordinate_values() {
            Some(c) => monomial(&c, alpha),
            None if alpha.is_zero() => S::one(),
            None => S::zero(),
        }
    }

    /// Converts every value, e.g. from exact to floating point.
    pub fn map<T: Scalar>(&self, mut f: impl FnMut(&S) -> T) -> Functional<T> {
        Functional {
            dimension: self.dimension,
            degree: self.degree,
            values: self.values.iter().map(|(a, v)| (a.clone(), f(v))).collect(),
            label: self.label.clone(),
        }
    }

    /// Replaces a single value, keeping everything else.
    pub fn with_value(mut self, alpha: &MultiIndex, v: S) -> Result<Self> {
        let slot = self.values.get_mut(alpha).ok_or(Error::DegreeOutOfRange {
            degree: alpha.degree(),
            max: self.degree,
        })?;
        *slot = v;
        Ok(self)
    }

    pub fn truncate(&self, degree: usize) -> Result<Self> {
        if degree > self.degree {
            return Err(Error::DegreeOutOfRange {
                degree,
                max: self.degree,
            });
        }
        let values = self
            .values
            .iter()
            .filter(|(a, _)| a.degree() <= degree)
            .map(|(a, v)| (a.clone(), v.clone()))
            .collect();
        Ok(Functional {
            dimension: self.dimension,
            degree,
            values,
            label: self.label.clone(),
        })
    }
}

fn check_dimension(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Common truncation degree of a functional and a kernel.
pub fn effective_degree<S>(f: &Functional<S>, k: &Kernel) -> usize {
    f.degree.min(k.degree())
}

/// `Σ_{|α|≤n} a_α |Λ(z^α)|²`, the squared norm of the truncated Riesz
/// representer `g_α = a_α conj(Λ(z^α))`.
pub fn functional_norm_sq_at<S: Scalar>(f: &Functional<S>, k: &Kernel, n: usize) -> Result<S> {
    check_dimension(k.dimension(), f.dimension)?;
    let max = effective_degree(f, k);
    if n > max {
        return Err(Error::DegreeOutOfRange { degree: n, max });
    }
    let mut acc = S::zero();
    for (alpha, v) in f.values.iter().filter(|(a, _)| a.degree() <= n) {
        acc = acc + S::from_rational(&k.a_alpha(alpha)?) * v.norm_sqr();
    }
    Ok(acc)
}

pub fn functional_norm_sq_truncated<S: Scalar>(f: &Functional<S>, k: &Kernel) -> Result<S> {
    functional_norm_sq_at(f, k, effective_degree(f, k))
}

/// Per-degree pieces `T_n = Σ_{|α|=n} c_α Λ(z^α) w̄^α` for `n ≤ degree`.
pub fn graded_pairing<S: Scalar>(
    f: &Functional<S>,
    degree: usize,
    w: &[S],
    mut coeff: impl FnMut(&MultiIndex) -> Result<BigRational>,
) -> Result<Vec<S>> {
    check_point(f.dimension, w)?;
    let wc = conj_point(w);
    let mut terms = Vec::with_capacity(degree + 1);
    for n in 0..=degree {
        let mut t = S::zero();
        for alpha in MultiIndex::all_of_degree(f.dimension, n) {
            let v = f.value(&alpha)?;
            if v.is_zero() {
                continue;
            }
            t = t + S::from_rational(&coeff(&alpha)?) * v.clone() * monomial(&wc, &alpha);
        }
        terms.push(t);
    }
    Ok(terms)
}

fn sum<S: Scalar>(terms: &[S]) -> S {
    terms.iter().fold(S::zero(), |acc, t| acc + t.clone())
}

/// Graded terms of `Λ(k_w)`.
pub fn kernel_function_terms<S: Scalar>(f: &Functional<S>, k: &Kernel, w: &[S]) -> Result<Vec<S>> {
    check_dimension(k.dimension(), f.dimension)?;
    graded_pairing(f, effective_degree(f, k), w, |a| k.a_alpha(a))
}

/// Graded terms of `Λ(1/k_w) = Λ(1) - Σ b_α Λ(z^α) w̄^α`.
pub fn inverse_kernel_terms<S: Scalar>(f: &Functional<S>, k: &Kernel, w: &[S]) -> Result<Vec<S>> {
    check_dimension(k.dimension(), f.dimension)?;
    k.require_cnp()?;
    let mut terms = graded_pairing(f, effective_degree(f, k), w, |a| {
        if a.is_zero() {
            Ok(BigRational::from_integer((-1).into()))
        } else {
            k.b_alpha(a)
        }
    })?;
    for t in terms.iter_mut() {
        *t = -t.clone();
    }
    Ok(terms)
}

/// `Λ(k_w) = Σ_{|α|≤N} a_α Λ(z^α) w̄^α`.
pub fn apply_to_kernel_function<S: Scalar>(f: &Functional<S>, k: &Kernel, w: &[S]) -> Result<S> {
    Ok(sum(&kernel_function_terms(f, k, w)?))
}

/// `Λ(1/k_w) = Λ(1) - Σ_{1≤|α|≤N} b_α Λ(z^α) w̄^α`. Requires `b_n ≥ 0`.
pub fn apply_to_inverse_kernel<S: Scalar>(f: &Functional<S>, k: &Kernel, w: &[S]) -> Result<S> {
    Ok(sum(&inverse_kernel_terms(f, k, w)?))
}

/// `Λ(k_w^p)` expanded with the coefficients of `k^p`.
pub fn apply_to_kernel_power<S: Scalar>(f: &Functional<S>, k: &Kernel, p: u32, w: &[S]) -> Result<S> {
    apply_to_kernel_function(f, &k.power(p)?, w)
}

/// `Σ_{n≤N} binom(n+p-1, p-1) X^n` with `X = Σ_{α≠0} b_α Λ(z^α) w̄^α`,
/// the value `Λ(k_w^p)` would take if `Λ` respected the CNP factorization.
/// Requires `|X| < 1`.
pub fn apply_series_route<S: Scalar>(f: &Functional<S>, k: &Kernel, p: u32, w: &[S]) -> Result<S> {
    if p == 0 {
        return Err(Error::InvalidExponent);
    }
    let x = -(sum(&inverse_kernel_terms(f, k, w)?[1..]));
    if !x.norm_sqr().real_lt_one() {
        return Err(Error::SeriesBoundViolated(x.abs_f64()));
    }
    let n_max = effective_degree(f, k);
    let mut acc = S::zero();
    let mut x_pow = S::one();
    for n in 0..=n_max {
        let c = uint_to_rational(&binomial((n as u64) + u64::from(p) - 1, u64::from(p) - 1));
        acc = acc + S::from_rational(&c) * x_pow.clone();
        x_pow = x_pow * x.clone();
    }
    Ok(acc)
}

/// Functional on the monomials `x^α s^β` of `B_d × B_d`, stored as a
/// functional on `2d` variables with index `(α, β)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorFunctional<S> {
    half_dimension: usize,
    inner: Functional<S>,
}

impl<S: Scalar> TensorFunctional<S> {
    pub fn new(half_dimension: usize, inner: Functional<S>) -> Result<Self> {
        check_dimension(2 * half_dimension, inner.dimension)?;
        Ok(TensorFunctional { half_dimension, inner })
    }

    /// Evaluation at `(y, t)`.
    pub fn tensor_point(y: &[S], t: &[S], degree: usize) -> Result<Self> {
        check_dimension(y.len(), t.len())?;
        check_point(y.len(), y)?;
        check_point(t.len(), t)?;
        let joint: Vec<S> = y.iter().chain(t).cloned().collect();
        let inner = Functional::from_fn(joint.len(), degree, "tensor_point", |a| monomial(&joint, a));
        Self::new(y.len(), inner)
    }

    /// `Λ(x^α s^β) = Λ₁(x^α) Λ₂(s^β)`.
    pub fn product(left: &Functional<S>, right: &Functional<S>, degree: usize) -> Result<Self> {
        check_dimension(left.dimension, right.dimension)?;
        let d = left.dimension;
        let mut err = None;
        let inner = Functional::from_fn(2 * d, degree, "tensor_product", |ab| {
            let (a, b) = ab.split_at(d);
            match (left.value(&a), right.value(&b)) {
                (Ok(x), Ok(y)) => x.clone() * y.clone(),
                (Err(e), _) | (_, Err(e)) => {
                    err = Some(e);
                    S::zero()
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Self::new(d, inner),
        }
    }

    pub fn map<T: Scalar>(&self, f: impl FnMut(&S) -> T) -> TensorFunctional<T> {
        TensorFunctional {
            half_dimension: self.half_dimension,
            inner: self.inner.map(f),
        }
    }

    pub fn half_dimension(&self) -> usize {
        self.half_dimension
    }

    pub fn degree(&self) -> usize {
        self.inner.degree
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.inner.label = label.into();
        self
    }

    pub fn joint(&self) -> &Functional<S> {
        &self.inner
    }

    pub fn value(&self, alpha: &MultiIndex, beta: &MultiIndex) -> Result<&S> {
        self.inner.value(&alpha.concat(beta))
    }

    /// `α ↦ Λ(x^α)`.
    pub fn left_marginal(&self) -> Functional<S> {
        let d = self.half_dimension;
        let zero = MultiIndex::zero(d);
        Functional::from_fn(d, self.inner.degree, "left", |a| {
            self.inner.values[&a.concat(&zero)].clone()
        })
    }

    /// `β ↦ Λ(s^β)`.
    pub fn right_marginal(&self) -> Functional<S> {
        let d = self.half_dimension;
        let zero = MultiIndex::zero(d);
        Functional::from_fn(d, self.inner.degree, "right", |b| {
            self.inner.values[&zero.concat(b)].clone()
        })
    }
}

fn tensor_degree<S>(f: &TensorFunctional<S>, k: &TensorKernel) -> usize {
    f.inner.degree.min(k.degree())
}

/// Graded terms of `Λ(k¹_y ⊗ k²_t) = Σ a¹_α a²_β Λ(x^α s^β) ȳ^α t̄^β`,
/// graded by `|α| + |β|`.
pub fn tensor_kernel_terms<S: Scalar>(f: &TensorFunctional<S>, k: &TensorKernel, y: &[S], t: &[S]) -> Result<Vec<S>> {
    check_dimension(k.dimension(), f.half_dimension)?;
    check_point(k.dimension(), y)?;
    check_point(k.dimension(), t)?;
    let joint: Vec<S> = y.iter().chain(t).cloned().collect();
    let d = f.half_dimension;
    graded_pairing(&f.inner, tensor_degree(f, k), &joint, |ab| {
        let (a, b) = ab.split_at(d);
        k.a_coefficient(&a, &b)
    })
}

pub fn apply_to_tensor_kernel<S: Scalar>(f: &TensorFunctional<S>, k: &TensorKernel, y: &[S], t: &[S]) -> Result<S> {
    Ok(sum(&tensor_kernel_terms(f, k, y, t)?))
}

/// `Σ a¹_α a²_β |Λ(x^α s^β)|²` over `|α| + |β| ≤ N`.
pub fn tensor_norm_sq_truncated<S: Scalar>(f: &TensorFunctional<S>, k: &TensorKernel) -> Result<S> {
    check_dimension(k.dimension(), f.half_dimension)?;
    let n = tensor_degree(f, k);
    let d = f.half_dimension;
    let mut acc = S::zero();
    for (ab, v) in f.inner.values.iter().filter(|(a, _)| a.degree() <= n) {
        let (a, b) = ab.split_at(d);
        acc = acc + S::from_rational(&k.a_coefficient(&a, &b)?) * v.norm_sqr();
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{exact, ratio, Exact};
    use alloc::vec;
    use num_complex::Complex64;

    fn szego() -> Kernel {
        Kernel::szego(12)
    }

    #[test]
    fn point_evaluation_values() {
        let f = Functional::point_evaluation(&[ratio(0, 1)], 5).unwrap();
        assert_eq!(f.value(&MultiIndex::new(vec![0])).unwrap(), &Exact::one());
        assert!(f.value(&MultiIndex::new(vec![3])).unwrap().is_zero());

        let f = Functional::point_evaluation(&[ratio(1, 2)], 5).unwrap();
        assert_eq!(f.value(&MultiIndex::new(vec![4])).unwrap(), &ratio(1, 16));

        let f = Functional::point_evaluation(&[Complex64::new(0.3, 0.0), Complex64::new(0.4, 0.0)], 4).unwrap();
        let v = f.value(&MultiIndex::new(vec![1, 1])).unwrap();
        assert!((v.re - 0.12).abs() < 1e-15);

        assert_eq!(Functional::point_evaluation(&[ratio(1, 1)], 3), Err(Error::OutsideBall));
    }

    #[test]
    fn counterexample_on_szego() {
        let f: Functional<Exact> = Functional::counterexample(12);
        let w = exact(
            BigRational::new(1.into(), 3.into()),
            BigRational::new(1.into(), 5.into()),
        );
        let kw = apply_to_kernel_function(&f, &szego(), core::slice::from_ref(&w)).unwrap();
        assert_eq!(kw, Exact::one() + w.clone().conj());
        let inv = apply_to_inverse_kernel(&f, &szego(), core::slice::from_ref(&w)).unwrap();
        assert_eq!(inv, Exact::one() - w.conj());
        assert_eq!(functional_norm_sq_truncated(&f, &szego()).unwrap(), ratio(2, 1));
        let z0 = [ratio(0, 1)];
        assert_eq!(apply_to_kernel_function(&f, &szego(), &z0).unwrap(), Exact::one());
    }

    #[test]
    fn inverse_kernel_of_point_evaluation() {
        let v = ratio(2, 5);
        let w = ratio(-1, 3);
        let f = Functional::point_evaluation(core::slice::from_ref(&v), 12).unwrap();
        let inv = apply_to_inverse_kernel(&f, &szego(), core::slice::from_ref(&w)).unwrap();
        assert_eq!(inv, Exact::one() - v * w.conj());
    }

    #[test]
    fn inverse_kernel_requires_cnp() {
        let f: Functional<Exact> = Functional::counterexample(6);
        let bergman = Kernel::szego(6).power(2).unwrap();
        assert_eq!(
            apply_to_inverse_kernel(&f, &bergman, &[ratio(1, 2)]),
            Err(Error::NotCnp { index: 2 })
        );
    }

    #[test]
    fn series_route_closed_form() {
        let v = Complex64::new(0.3, 0.1);
        let w = Complex64::new(-0.2, 0.35);
        let k = Kernel::szego(30);
        let f = Functional::point_evaluation(&[v], 30).unwrap();
        let got = apply_series_route(&f, &k, 1, &[w]).unwrap();
        let want = Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - v * w.conj());
        assert!((got - want).norm() < 1e-14);
        let origin = Functional::point_evaluation(&[Complex64::new(0.0, 0.0)], 10).unwrap();
        assert_eq!(
            apply_series_route(&origin, &k, 3, &[w]).unwrap(),
            Complex64::new(1.0, 0.0)
        );
    }

    #[test]
    fn series_route_bound_is_enforced() {
        let f: Functional<Complex64> = Functional::from_fn(1, 6, "big", |a| {
            if a.degree() == 1 {
                Complex64::new(5.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        });
        let r = apply_series_route(&f, &Kernel::szego(6), 1, &[Complex64::new(0.5, 0.0)]);
        assert!(matches!(r, Err(Error::SeriesBoundViolated(_))));
    }

    #[test]
    fn norm_is_monotone_and_matches_kernel_diagonal() {
        let k = Kernel::dirichlet(1, 16).unwrap();
        let f = Functional::point_evaluation(&[ratio(1, 2)], 16).unwrap();
        let mut prev = ratio(0, 1);
        for n in 0..=16 {
            let cur = functional_norm_sq_at(&f, &k, n).unwrap();
            assert!(cur.re >= prev.re);
            prev = cur;
        }
        let diag = apply_to_kernel_function(&f, &k, &[ratio(1, 2)]).unwrap();
        assert_eq!(prev, diag);
    }

    #[test]
    fn tensor_marginals_and_product() {
        let y = [ratio(1, 3)];
        let t = [ratio(-1, 4)];
        let tp = TensorFunctional::tensor_point(&y, &t, 6).unwrap();
        let l = Functional::point_evaluation(&y, 6).unwrap();
        let r = Functional::point_evaluation(&t, 6).unwrap();
        assert_eq!(tp.left_marginal().values(), l.values());
        assert_eq!(tp.right_marginal().values(), r.values());
        let prod = TensorFunctional::product(&l, &r, 6).unwrap();
        assert_eq!(prod.joint().values(), tp.joint().values());
        let k = TensorKernel::new(Kernel::szego(6), Kernel::szego(6)).unwrap();
        let origin = TensorFunctional::tensor_point(&[ratio(0, 1)], &[ratio(0, 1)], 6).unwrap();
        assert_eq!(tensor_norm_sq_truncated(&origin, &k).unwrap(), Exact::one());
    }

    #[test]
    fn missing_values_are_rejected() {
        let mut values = BTreeMap::new();
        values.insert(MultiIndex::new(vec![0]), ratio(1, 1));
        let r = Functional::new(1, 1, values, "partial");
        assert!(matches!(r, Err(Error::InvalidFunctional(_))));
    }
}
