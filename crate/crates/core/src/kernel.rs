//! Unitarily invariant kernels `k(z, w) = Σ a_n ⟨z, w⟩^n` on the ball `B_d`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::TruncatedPoly;
use crate::scalar::{in_open_ball, Scalar};
use crate::series::{multinomial, uint_to_rational, MultiIndex, RationalSeries};

/// Complete Nevanlinna-Pick data: `1 - 1/k(t) = Σ_{n≥1} b_n t^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CnpData {
    b: RationalSeries,
    first_negative_index: Option<usize>,
}

impl CnpData {
    pub fn b_series(&self) -> &RationalSeries {
        &self.b
    }

    /// `b_n ≥ 0` for every `1 ≤ n ≤ N`. A `false` is a certificate that the
    /// kernel is not CNP; a `true` only covers the truncation.
    pub fn is_cnp_up_to_n(&self) -> bool {
        self.first_negative_index.is_none()
    }

    pub fn first_negative_index(&self) -> Option<usize> {
        self.first_negative_index
    }

    /// `b_1 = 1`, the coordinate normalization of the CNP characterization.
    pub fn is_normalized(&self) -> bool {
        self.b.coeff(1).is_some_and(|b| b.is_one())
    }
}

/// `b = 1 - 1/a` with `b_0` forced to zero.
pub fn cnp_transform(a: &RationalSeries) -> Result<CnpData> {
    let inv = a.reciprocal()?;
    let unit = RationalSeries::unit(a.degree());
    let mut coeffs = unit.sub(&inv).coeffs().to_vec();
    coeffs[0] = BigRational::zero();
    let b = RationalSeries::new(coeffs)?;
    let first_negative_index = b.first_negative();
    Ok(CnpData {
        b,
        first_negative_index,
    })
}

#[derive(Clone, Debug)]
pub struct Kernel {
    dimension: usize,
    a: RationalSeries,
    cnp: CnpData,
    label: String,
}

impl PartialEq for Kernel {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension && self.a == other.a
    }
}

impl Kernel {
    /// Validates `d ≥ 1`, `a_0 = 1` and `a_n > 0` for all `n ≤ N`.
    pub fn new(dimension: usize, a: RationalSeries, label: impl Into<String>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidKernel("dimension must be at least 1".to_string()));
        }
        if !a.coeffs()[0].is_one() {
            return Err(Error::InvalidKernel(format!(
                "a_0 = 1 required, found a_0 = {}",
                a.coeffs()[0]
            )));
        }
        if let Some(n) = a.coeffs().iter().position(|c| !c.is_positive()) {
            return Err(Error::InvalidKernel(format!(
                "a_n > 0 required, found a_{} = {}",
                n,
                a.coeffs()[n]
            )));
        }
        let cnp = cnp_transform(&a)?;
        Ok(Kernel {
            dimension,
            a,
            cnp,
            label: label.into(),
        })
    }

    /// Drury-Arveson kernel `1/(1 - ⟨z, w⟩)` on `B_d`.
    pub fn drury_arveson(dimension: usize, degree: usize) -> Result<Self> {
        let a = RationalSeries::from_fn(degree, |_| BigRational::one());
        let label = if dimension == 1 {
            "szego".to_string()
        } else {
            format!("drury_arveson({})", dimension)
        };
        Self::new(dimension, a, label)
    }

    /// Szegő kernel of the disc, the `d = 1` Drury-Arveson kernel.
    pub fn szego(degree: usize) -> Self {
        Self::drury_arveson(1, degree).expect("valid coefficients")
    }

    /// Dirichlet-type kernel with `a_n = 1/(n+1)`.
    pub fn dirichlet(dimension: usize, degree: usize) -> Result<Self> {
        let a = RationalSeries::from_fn(degree, |n| BigRational::new(1.into(), (n as i64 + 1).into()));
        let label = if dimension == 1 {
            "dirichlet".to_string()
        } else {
            format!("dirichlet({})", dimension)
        };
        Self::new(dimension, a, label)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn degree(&self) -> usize {
        self.a.degree()
    }

    pub fn a_series(&self) -> &RationalSeries {
        &self.a
    }

    pub fn cnp(&self) -> &CnpData {
        &self.cnp
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn truncate(&self, degree: usize) -> Result<Self> {
        Ok(Kernel {
            dimension: self.dimension,
            a: self.a.truncate(degree)?,
            cnp: cnp_transform(&self.a.truncate(degree)?)?,
            label: self.label.clone(),
        })
    }

    pub fn require_cnp(&self) -> Result<()> {
        match self.cnp.first_negative_index {
            Some(index) => Err(Error::NotCnp { index }),
            None => Ok(()),
        }
    }

    fn check_index(&self, alpha: &MultiIndex) -> Result<()> {
        if alpha.dim() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: alpha.dim(),
            });
        }
        if alpha.degree() > self.degree() {
            return Err(Error::DegreeOutOfRange {
                degree: alpha.degree(),
                max: self.degree(),
            });
        }
        Ok(())
    }

    /// `a_α = a_{|α|} · binom(|α|, α)`.
    pub fn a_alpha(&self, alpha: &MultiIndex) -> Result<BigRational> {
        self.check_index(alpha)?;
        Ok(&self.a.coeffs()[alpha.degree()] * uint_to_rational(&multinomial(alpha)))
    }

    /// `b_α = b_{|α|} · binom(|α|, α)` for `α ≠ 0`.
    pub fn b_alpha(&self, alpha: &MultiIndex) -> Result<BigRational> {
        self.check_index(alpha)?;
        if alpha.is_zero() {
            return Err(Error::ZeroIndex);
        }
        Ok(&self.cnp.b.coeffs()[alpha.degree()] * uint_to_rational(&multinomial(alpha)))
    }

    /// The Schur power `k^p`.
    pub fn power(&self, p: u32) -> Result<Self> {
        if p == 1 {
            return Ok(self.clone());
        }
        let a = self.a.pow(p)?;
        Self::new(self.dimension, a, format!("power({}, {})", self.label, p))
    }

    /// Pointwise product `k¹ k²`, a Cauchy product of the coefficient series.
    pub fn schur(&self, other: &Kernel) -> Result<Self> {
        if self.dimension != other.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: other.dimension,
            });
        }
        Self::new(
            self.dimension,
            self.a.mul(&other.a),
            format!("schur({}, {})", self.label, other.label),
        )
    }

    /// Empirical `max a_{n+1}/a_n` over the truncation; zero when `N = 0`.
    pub fn max_coefficient_ratio(&self) -> f64 {
        let c = self.a.coeffs();
        c.windows(2)
            .map(|w| (&w[1] / &w[0]).to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

/// Value of a truncated kernel sum with its heuristic tail estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelValue {
    pub value: Complex64,
    /// `a_N ρ^{N+1} R / (1 - ρR)` with `ρ = |z||w|` and `R` the empirical
    /// maximal coefficient ratio. An estimate, not a bound.
    pub tail_estimate: f64,
    pub rho: f64,
    pub ratio: f64,
}

pub fn kernel_eval(k: &Kernel, z: &[Complex64], w: &[Complex64], rho_max: f64) -> Result<KernelValue> {
    for p in [z, w] {
        if p.len() != k.dimension {
            return Err(Error::DimensionMismatch {
                expected: k.dimension,
                found: p.len(),
            });
        }
        if !in_open_ball(p) {
            return Err(Error::OutsideBall);
        }
    }
    let norm = |p: &[Complex64]| Float::sqrt(p.iter().map(|x| x.norm_sqr()).sum::<f64>());
    let rho = norm(z) * norm(w);
    if rho > rho_max {
        return Err(Error::RadiusAboveLimit { rho, limit: rho_max });
    }
    let ratio = k.max_coefficient_ratio();
    if rho * ratio >= 1.0 {
        return Err(Error::UnreliableTail(rho * ratio));
    }
    let t: Complex64 = z.iter().zip(w).map(|(a, b)| a * b.conj()).sum();
    let value = k.a.coeffs().iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| {
        acc * t + a.to_f64().unwrap_or(f64::NAN)
    });
    let n = k.degree() as i32;
    let a_n = k.a.coeffs()[k.degree()].to_f64().unwrap_or(f64::NAN);
    let tail_estimate = if rho == 0.0 || ratio == 0.0 {
        0.0
    } else {
        a_n * Float::powi(rho, n + 1) * ratio / (1.0 - rho * ratio)
    };
    Ok(KernelValue {
        value,
        tail_estimate,
        rho,
        ratio,
    })
}

pub(crate) fn check_point<S: Scalar>(dimension: usize, w: &[S]) -> Result<()> {
    if w.len() != dimension {
        return Err(Error::DimensionMismatch {
            expected: dimension,
            found: w.len(),
        });
    }
    if !in_open_ball(w) {
        return Err(Error::OutsideBall);
    }
    Ok(())
}

/// `v^α = v_1^{α_1} ⋯ v_d^{α_d}`.
pub fn monomial<S: Scalar>(v: &[S], alpha: &MultiIndex) -> S {
    v.iter()
        .zip(alpha.exponents())
        .fold(S::one(), |acc, (x, &e)| acc * x.pow(e))
}

pub(crate) fn conj_point<S: Scalar>(w: &[S]) -> Vec<S> {
    w.iter().map(Scalar::conj).collect()
}

/// Coefficients of `1/k_w(z) = 1 - Σ_{α≠0} b_α z^α w̄^α` for `|α| ≤ N`.
pub fn inverse_kernel_coeffs<S: Scalar>(k: &Kernel, w: &[S]) -> Result<BTreeMap<MultiIndex, S>> {
    check_point(k.dimension, w)?;
    let wc = conj_point(w);
    let mut out = BTreeMap::new();
    for alpha in MultiIndex::all_up_to(k.dimension, k.degree()) {
        let c = if alpha.is_zero() {
            S::one()
        } else {
            -(S::from_rational(&k.b_alpha(&alpha)?) * monomial(&wc, &alpha))
        };
        out.insert(alpha, c);
    }
    Ok(out)
}

/// `Σ_{|α|≤N} |f_α|² / a_α`, a lower bound for `‖f‖²` in `H(k)`.
/// Coefficients above the truncation degree are ignored.
pub fn rkhs_norm_sq<'a, S: Scalar + 'a>(k: &Kernel, f: impl IntoIterator<Item = (&'a MultiIndex, &'a S)>) -> Result<S> {
    let mut acc = S::zero();
    for (alpha, c) in f {
        if alpha.degree() > k.degree() {
            continue;
        }
        let a = k.a_alpha(alpha)?;
        acc = acc + c.norm_sqr() * S::from_rational(&a.recip());
    }
    Ok(acc)
}

/// Truncated `‖k_w^{-m}‖²` in `H(k^p)`, summing over `|α| ≤ degree`.
pub fn inverse_power_norm_sq<S: Scalar>(k: &Kernel, p: u32, w: &[S], m: u32, degree: usize) -> Result<S> {
    if m == 0 || p == 0 {
        return Err(Error::InvalidExponent);
    }
    let k = k.truncate(degree)?;
    let mut inv = TruncatedPoly::zero(k.dimension, degree);
    for (alpha, c) in inverse_kernel_coeffs(&k, w)? {
        inv.set(alpha, c);
    }
    let f = inv.pow(m);
    rkhs_norm_sq(&k.power(p)?, f.terms())
}

/// Numerical evidence that `k_w^{-m}` lies in `H(k^p)`: the truncated norm
/// at `N/2` and `N`, and whether it is still growing.
#[derive(Clone, Debug, PartialEq)]
pub struct MembershipReport<S> {
    pub p: u32,
    pub m: u32,
    pub half_degree: usize,
    pub full_degree: usize,
    pub norm_sq_half: S,
    pub norm_sq_full: S,
    /// `(full - half) / half`.
    pub growth: f64,
    pub threshold: f64,
    pub diverging: bool,
}

pub fn inverse_power_membership_check<S: Scalar>(
    k: &Kernel,
    p: u32,
    w: &[S],
    m: u32,
    threshold: f64,
) -> Result<MembershipReport<S>> {
    check_point(k.dimension, w)?;
    let full_degree = k.degree();
    let half_degree = full_degree / 2;
    let norm_sq_half = inverse_power_norm_sq(k, p, w, m, half_degree)?;
    let norm_sq_full = inverse_power_norm_sq(k, p, w, m, full_degree)?;
    let half = norm_sq_half.to_c64().re;
    let growth = (norm_sq_full.to_c64().re - half) / half;
    Ok(MembershipReport {
        p,
        m,
        half_degree,
        full_degree,
        norm_sq_half,
        norm_sq_full,
        growth,
        threshold,
        diverging: growth.is_nan() || growth > threshold,
    })
}

/// `k((x, s), (y, t)) = k¹(x, y) k²(s, t)` on `B_d × B_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorKernel {
    left: Kernel,
    right: Kernel,
}

impl TensorKernel {
    pub fn new(left: Kernel, right: Kernel) -> Result<Self> {
        if left.dimension != right.dimension {
            return Err(Error::DimensionMismatch {
                expected: left.dimension,
                found: right.dimension,
            });
        }
        Ok(TensorKernel { left, right })
    }

    pub fn left(&self) -> &Kernel {
        &self.left
    }

    pub fn right(&self) -> &Kernel {
        &self.right
    }

    /// Dimension `d` of each factor ball.
    pub fn dimension(&self) -> usize {
        self.left.dimension
    }

    pub fn degree(&self) -> usize {
        self.left.degree().min(self.right.degree())
    }

    pub fn label(&self) -> String {
        format!("tensor({}, {})", self.left.label, self.right.label)
    }

    /// Coefficient `a¹_α a²_β` of `x^α s^β ȳ^α t̄^β`.
    pub fn a_coefficient(&self, alpha: &MultiIndex, beta: &MultiIndex) -> Result<BigRational> {
        Ok(self.left.a_alpha(alpha)? * self.right.a_alpha(beta)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Exact};
    use alloc::vec;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn szego_is_cnp_with_unit_b1() {
        let k = Kernel::szego(10);
        let b = k.cnp().b_series();
        assert_eq!(b.coeff(1), Some(&q(1, 1)));
        assert!(b.coeffs()[2..].iter().all(Zero::is_zero));
        assert!(k.cnp().is_cnp_up_to_n());
        assert!(k.cnp().is_normalized());
    }

    #[test]
    fn bergman_fails_at_two() {
        let k = Kernel::szego(10).power(2).unwrap();
        let b = k.cnp().b_series();
        assert_eq!(b.coeff(1), Some(&q(2, 1)));
        assert_eq!(b.coeff(2), Some(&q(-1, 1)));
        assert_eq!(k.cnp().first_negative_index(), Some(2));
        assert!(matches!(k.require_cnp(), Err(Error::NotCnp { index: 2 })));
    }

    #[test]
    fn dirichlet_is_not_normalized() {
        let k = Kernel::dirichlet(1, 6).unwrap();
        assert_eq!(k.cnp().b_series().coeff(1), Some(&q(1, 2)));
        assert!(!k.cnp().is_normalized());
        assert_eq!(k.b_alpha(&MultiIndex::new(vec![2])).unwrap(), q(1, 12));
    }

    #[test]
    fn validation_names_the_invariant() {
        let a = RationalSeries::new(vec![q(1, 1), q(1, 1), q(0, 1)]).unwrap();
        match Kernel::new(1, a, "bad") {
            Err(Error::InvalidKernel(msg)) => assert!(msg.contains("a_2")),
            other => panic!("unexpected {:?}", other),
        }
        let a = RationalSeries::new(vec![q(2, 1), q(1, 1)]).unwrap();
        assert!(matches!(Kernel::new(1, a, "bad"), Err(Error::InvalidKernel(_))));
    }

    #[test]
    fn alpha_coefficients() {
        let k = Kernel::drury_arveson(2, 6).unwrap();
        assert_eq!(k.a_alpha(&MultiIndex::new(vec![1, 1])).unwrap(), q(2, 1));
        assert_eq!(k.b_alpha(&MultiIndex::new(vec![1, 0])).unwrap(), q(1, 1));
        assert_eq!(k.b_alpha(&MultiIndex::new(vec![1, 1])).unwrap(), q(0, 1));
        assert_eq!(k.b_alpha(&MultiIndex::zero(2)), Err(Error::ZeroIndex));
        assert!(matches!(
            k.a_alpha(&MultiIndex::new(vec![7, 0])),
            Err(Error::DegreeOutOfRange { degree: 7, max: 6 })
        ));
        let da3 = Kernel::drury_arveson(3, 4).unwrap();
        assert_eq!(da3.a_alpha(&MultiIndex::zero(3)).unwrap(), q(1, 1));
        let bergman = Kernel::szego(6).power(2).unwrap();
        assert_eq!(bergman.a_alpha(&MultiIndex::new(vec![3])).unwrap(), q(4, 1));
    }

    #[test]
    fn schur_of_dirichlet_and_szego() {
        let s = Kernel::szego(5);
        let d = Kernel::dirichlet(1, 5).unwrap();
        let k = d.schur(&s).unwrap();
        assert_eq!(k.a_series().coeff(2), Some(&q(11, 6)));
        assert_eq!(s.schur(&s).unwrap(), s.power(2).unwrap());
        let da2 = Kernel::drury_arveson(2, 5).unwrap();
        assert!(matches!(s.schur(&da2), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn kernel_eval_examples() {
        let s = Kernel::szego(24);
        let zero = [Complex64::new(0.0, 0.0)];
        let v = kernel_eval(&s, &zero, &zero, 0.9).unwrap();
        assert_eq!(v.value, Complex64::new(1.0, 0.0));
        assert_eq!(v.tail_estimate, 0.0);

        let h = [Complex64::new(0.5, 0.0)];
        let v = kernel_eval(&s, &h, &h, 0.9).unwrap();
        assert!((v.value.re - 4.0 / 3.0).abs() <= v.tail_estimate * 1.0001);
        assert!(v.tail_estimate > 0.0);

        let d = Kernel::dirichlet(1, 24).unwrap();
        let p = [Complex64::new(0.3, 0.0)];
        let v = kernel_eval(&d, &p, &p, 0.9).unwrap();
        let closed = -(1.0f64 - 0.09).ln() / 0.09;
        assert!((v.value.re - closed).abs() < 1e-14);

        let out = [Complex64::new(1.0, 0.0)];
        assert_eq!(kernel_eval(&s, &out, &zero, 0.9), Err(Error::OutsideBall));
    }

    #[test]
    fn inverse_kernel_coefficients() {
        let s = Kernel::szego(4);
        let w = [ratio(1, 3)];
        let c = inverse_kernel_coeffs(&s, &w).unwrap();
        assert_eq!(c[&MultiIndex::new(vec![0])], ratio(1, 1));
        assert_eq!(c[&MultiIndex::new(vec![1])], ratio(-1, 3));
        assert!(Scalar::is_zero(&c[&MultiIndex::new(vec![2])]));

        let zero = [ratio(0, 1)];
        let d = Kernel::dirichlet(1, 4).unwrap();
        let c = inverse_kernel_coeffs(&d, &zero).unwrap();
        assert!(c.iter().all(|(a, v)| a.is_zero() || Scalar::is_zero(v)));

        let c = inverse_kernel_coeffs(&d, &[ratio(1, 2)]).unwrap();
        assert_eq!(c[&MultiIndex::new(vec![2])], ratio(-1, 48));
    }

    #[test]
    fn norm_examples() {
        let da2 = Kernel::drury_arveson(2, 4).unwrap();
        let one: BTreeMap<MultiIndex, Exact> = [(MultiIndex::zero(2), ratio(1, 1))].into_iter().collect();
        assert_eq!(rkhs_norm_sq(&da2, &one).unwrap(), ratio(1, 1));
        let z1: BTreeMap<MultiIndex, Exact> = [(MultiIndex::new(vec![1, 0]), ratio(1, 1))].into_iter().collect();
        assert_eq!(rkhs_norm_sq(&da2, &z1).unwrap(), ratio(1, 1));

        let s = Kernel::szego(6);
        let inv = inverse_kernel_coeffs(&s, &[ratio(3, 5)]).unwrap();
        assert_eq!(rkhs_norm_sq(&s, &inv).unwrap(), ratio(34, 25));
    }

    #[test]
    fn membership_examples() {
        let s = Kernel::szego(12);
        let r = inverse_power_membership_check(&s, 1, &[ratio(1, 2)], 1, 1e-8).unwrap();
        assert_eq!(r.norm_sq_full, ratio(5, 4));
        assert_eq!(r.norm_sq_half, ratio(5, 4));
        assert!(!r.diverging);

        let r = inverse_power_membership_check(&s, 1, &[ratio(1, 2)], 2, 1e-8).unwrap();
        assert_eq!(r.norm_sq_full, ratio(33, 16));

        let d = Kernel::dirichlet(1, 12).unwrap();
        for p in 1..=3 {
            for m in 1..=3 {
                let r = inverse_power_membership_check(&d, p, &[ratio(0, 1)], m, 1e-8).unwrap();
                assert_eq!(r.norm_sq_full, ratio(1, 1));
            }
        }
    }

    #[test]
    fn tensor_requires_matching_dimensions() {
        let s = Kernel::szego(4);
        let da = Kernel::drury_arveson(2, 4).unwrap();
        assert!(TensorKernel::new(s.clone(), da).is_err());
        let t = TensorKernel::new(s.clone(), s).unwrap();
        assert_eq!(
            t.a_coefficient(&MultiIndex::new(vec![2]), &MultiIndex::new(vec![3]))
                .unwrap(),
            q(1, 1)
        );
    }
}
