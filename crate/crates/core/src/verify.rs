//! Multiplicativity criteria, the brute-force oracle and the coefficient
//! identities behind them.
//!
//! A criterion compares `Λ(1/k_w)`-type products against `1/Λ(k_w)` at
//! sample points. Sample residuals only see finitely many `w`; the exact
//! coefficient identities are the finite analogue of comparing the two sides
//! as power series in `w̄`, and the brute-force oracle checks
//! `Λ(z^{α+β}) = Λ(z^α) Λ(z^β)` directly.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::{Float, One, Zero};

use crate::error::{Error, Result};
use crate::functional::{
    effective_degree, functional_norm_sq_truncated, inverse_kernel_terms, kernel_function_terms, tensor_kernel_terms,
    tensor_norm_sq_truncated, Functional, TensorFunctional,
};
use crate::kernel::{Kernel, TensorKernel};
use crate::poly::TruncatedPoly;
use crate::scalar::{Mode, Scalar};
use crate::series::{all_compositions, binomial, uint_to_rational, MultiIndex};

/// Depth of the residual power series searched for a witness degree.
pub const WITNESS_DEPTH: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CriterionKind {
    Power { p: u32 },
    Schur,
    Tensor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Residual within tolerance and the norm-one hypotheses not refuted.
    Pass,
    /// Residual exceeds tolerance plus the tail estimate.
    Fail,
    /// Residual above tolerance but inside the truncation tail band.
    Inconclusive,
    /// The criterion holds numerically but the functional violates the
    /// norm-one or unit hypotheses, so the converse direction does not apply.
    HypothesisViolated,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
            Verdict::HypothesisViolated => "not_applicable_hypothesis_violated",
        }
    }

    /// The criterion held at every sample.
    pub fn holds(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::HypothesisViolated)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisFlags {
    /// Truncated `‖Λ‖²`, a lower bound.
    pub norm_sq: f64,
    /// `norm_sq > 1 + tol`: a definitive violation of `‖Λ‖ = 1`.
    pub norm_exceeds_one: bool,
    pub unit_value_ok: bool,
}

impl HypothesisFlags {
    fn new<S: Scalar>(norm_sq: &S, unit_value: &S, tol: f64) -> Self {
        let norm_sq = norm_sq.to_c64().re;
        let unit_value_ok = match S::MODE {
            Mode::Exact => *unit_value == S::one(),
            Mode::Float => (unit_value.clone() - S::one()).abs_f64() <= tol,
        };
        HypothesisFlags {
            norm_sq,
            norm_exceeds_one: norm_sq > 1.0 + tol,
            unit_value_ok,
        }
    }

    pub fn clean(&self) -> bool {
        !self.norm_exceeds_one && self.unit_value_ok
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleResidual<S> {
    /// Sample point; for tensor criteria the concatenation `(y, t)`.
    pub point: Vec<S>,
    /// Left-hand product, e.g. `Λ(1/k_w)^p · Λ(k_w^p)`.
    pub product: S,
    /// `product - 1`.
    pub deviation: S,
    pub residual: f64,
    pub tail_estimate: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionReport<S> {
    pub kind: CriterionKind,
    pub mode: Mode,
    pub degree: usize,
    pub tolerance: f64,
    pub samples: Vec<SampleResidual<S>>,
    pub max_residual: f64,
    pub max_tail_estimate: f64,
    pub hypothesis: HypothesisFlags,
    pub verdict: Verdict,
    /// Lowest degree at which the residual, as a power series in the
    /// conjugated sample variables, has a nonzero coefficient.
    pub witness_degree: Option<usize>,
    pub witness_depth: usize,
}

impl<S> CriterionReport<S> {
    pub fn residuals(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.residual).collect()
    }
}

/// Geometric tail estimate from graded term magnitudes `|T_0|, …, |T_N|`.
///
/// The ratio is the largest per-step growth between consecutive nonzero
/// terms in the upper half of the range. Infinite when that ratio is at least
/// one; zero when the upper half vanishes identically.
pub fn graded_tail_estimate(mags: &[f64]) -> f64 {
    let n = mags.len().saturating_sub(1);
    let nonzero: Vec<usize> = (0..mags.len()).filter(|&i| mags[i] > 0.0).collect();
    let last = match nonzero.last() {
        Some(&m) => m,
        None => return 0.0,
    };
    if n == 0 {
        return f64::INFINITY;
    }
    let start = n / 2;
    let upper: Vec<usize> = nonzero.iter().copied().filter(|&i| i >= start).collect();
    if upper.is_empty() {
        return 0.0;
    }
    if upper.len() == 1 {
        // a single surviving term says nothing about decay
        return if upper[0] == 0 { 0.0 } else { f64::INFINITY };
    }
    let q = upper
        .windows(2)
        .map(|w| Float::powf(mags[w[1]] / mags[w[0]], 1.0 / (w[1] - w[0]) as f64))
        .fold(0.0, f64::max);
    if q >= 1.0 {
        return f64::INFINITY;
    }
    mags[last] * Float::powi(q, (n - last + 1) as i32) / (1.0 - q)
}

fn magnitudes<S: Scalar>(terms: &[S]) -> Vec<f64> {
    terms.iter().map(Scalar::abs_f64).collect()
}

fn total<S: Scalar>(terms: &[S]) -> S {
    terms.iter().fold(S::zero(), |acc, t| acc + t.clone())
}

fn sample_verdict(residual: f64, tail: f64, tol: f64) -> Verdict {
    if residual <= tol {
        Verdict::Pass
    } else if residual <= tol + tail {
        Verdict::Inconclusive
    } else {
        Verdict::Fail
    }
}

fn aggregate_verdict<S>(samples: &[SampleResidual<S>], flags: &HypothesisFlags) -> Verdict {
    if samples.iter().any(|s| s.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if samples.iter().any(|s| s.verdict == Verdict::Inconclusive) {
        Verdict::Inconclusive
    } else if flags.clean() {
        Verdict::Pass
    } else {
        Verdict::HypothesisViolated
    }
}

fn residual_sample<S: Scalar>(point: Vec<S>, product: S, tail: f64, tol: f64) -> SampleResidual<S> {
    let deviation = product.clone() - S::one();
    let residual = deviation.abs_f64();
    SampleResidual {
        point,
        product,
        deviation,
        residual,
        tail_estimate: tail,
        verdict: sample_verdict(residual, tail, tol),
    }
}

fn build_report<S: Scalar>(
    kind: CriterionKind,
    degree: usize,
    tol: f64,
    samples: Vec<SampleResidual<S>>,
    hypothesis: HypothesisFlags,
    witness: &TruncatedPoly<S>,
) -> CriterionReport<S> {
    let max_residual = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
    let max_tail_estimate = samples.iter().map(|s| s.tail_estimate).fold(0.0, f64::max);
    let verdict = aggregate_verdict(&samples, &hypothesis);
    CriterionReport {
        kind,
        mode: S::MODE,
        degree,
        tolerance: tol,
        samples,
        max_residual,
        max_tail_estimate,
        hypothesis,
        verdict,
        witness_degree: witness.lowest_significant_degree(tol),
        witness_depth: witness.degree(),
    }
}

/// `w̄`-polynomial `Σ c_α Λ(z^α) w̄^α` embedded at variable offset `offset`
/// of `nvars` variables.
fn pairing_poly<S: Scalar>(
    f: &Functional<S>,
    nvars: usize,
    offset: usize,
    depth: usize,
    mut coeff: impl FnMut(&MultiIndex) -> Result<S>,
) -> Result<TruncatedPoly<S>> {
    let mut poly = TruncatedPoly::zero(nvars, depth);
    for alpha in MultiIndex::all_up_to(f.dimension(), depth) {
        let mut e = alloc::vec![0u32; nvars];
        e[offset..offset + f.dimension()].copy_from_slice(alpha.exponents());
        let c = coeff(&alpha)? * f.value(&alpha)?.clone();
        poly.set(MultiIndex::new(e), c);
    }
    Ok(poly)
}

fn inverse_poly<S: Scalar>(
    f: &Functional<S>,
    k: &Kernel,
    nvars: usize,
    offset: usize,
    depth: usize,
) -> Result<TruncatedPoly<S>> {
    pairing_poly(f, nvars, offset, depth, |a| {
        if a.is_zero() {
            Ok(S::one())
        } else {
            Ok(-S::from_rational(&k.b_alpha(a)?))
        }
    })
}

fn kernel_poly<S: Scalar>(f: &Functional<S>, k: &Kernel, depth: usize) -> Result<TruncatedPoly<S>> {
    pairing_poly(f, f.dimension(), 0, depth, |a| Ok(S::from_rational(&k.a_alpha(a)?)))
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::InvalidFunctional(alloc::format!(
            "tolerance must be >= 0, got {}",
            tol
        )));
    }
    Ok(())
}

/// Residuals of `[Λ(1/k_w)]^p · Λ(k_w^p) = 1` over the sample points, with
/// the norm-one and `Λ(1) = 1` hypotheses checked against `H(k^p)`.
pub fn check_power_criterion<S: Scalar>(
    f: &Functional<S>,
    k: &Kernel,
    p: u32,
    samples: &[Vec<S>],
    tol: f64,
) -> Result<CriterionReport<S>> {
    check_tol(tol)?;
    if p == 0 {
        return Err(Error::InvalidExponent);
    }
    k.require_cnp()?;
    if f.dimension() != k.dimension() {
        return Err(Error::DimensionMismatch {
            expected: k.dimension(),
            found: f.dimension(),
        });
    }
    let kp = k.power(p)?;
    let hypothesis = HypothesisFlags::new(&functional_norm_sq_truncated(f, &kp)?, f.unit_value(), tol);
    let mut out = Vec::with_capacity(samples.len());
    for w in samples {
        let inv_terms = inverse_kernel_terms(f, k, w)?;
        let ker_terms = kernel_function_terms(f, &kp, w)?;
        let inv = total(&inv_terms);
        let ker = total(&ker_terms);
        let product = inv.pow(p) * ker.clone();
        let (ia, ka) = (inv.abs_f64(), ker.abs_f64());
        let tail = Float::powi(ia, p as i32) * graded_tail_estimate(&magnitudes(&ker_terms))
            + f64::from(p) * Float::powi(ia, p as i32 - 1) * ka * graded_tail_estimate(&magnitudes(&inv_terms));
        out.push(residual_sample(w.clone(), product, nan_to_inf(tail), tol));
    }
    let depth = WITNESS_DEPTH.min(effective_degree(f, &kp));
    let a = inverse_poly(f, k, f.dimension(), 0, depth)?;
    let kpoly = kernel_poly(f, &kp, depth)?;
    let one = TruncatedPoly::constant(f.dimension(), depth, S::one());
    let witness = a.pow(p).mul(&kpoly).sub(&one);
    Ok(build_report(
        CriterionKind::Power { p },
        effective_degree(f, &kp),
        tol,
        out,
        hypothesis,
        &witness,
    ))
}

fn nan_to_inf(x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else {
        x
    }
}

/// Residuals of `Λ(1/k¹_w) Λ(1/k²_w) Λ(k_w) = 1` with `k = k¹k²`.
pub fn check_schur_criterion<S: Scalar>(
    f: &Functional<S>,
    k1: &Kernel,
    k2: &Kernel,
    samples: &[Vec<S>],
    tol: f64,
) -> Result<CriterionReport<S>> {
    check_tol(tol)?;
    k1.require_cnp()?;
    k2.require_cnp()?;
    let k = k1.schur(k2)?;
    if f.dimension() != k.dimension() {
        return Err(Error::DimensionMismatch {
            expected: k.dimension(),
            found: f.dimension(),
        });
    }
    let hypothesis = HypothesisFlags::new(&functional_norm_sq_truncated(f, &k)?, f.unit_value(), tol);
    let mut out = Vec::with_capacity(samples.len());
    for w in samples {
        let t1 = inverse_kernel_terms(f, k1, w)?;
        let t2 = inverse_kernel_terms(f, k2, w)?;
        let tk = kernel_function_terms(f, &k, w)?;
        let (i1, i2, kv) = (total(&t1), total(&t2), total(&tk));
        let product = i1.clone() * i2.clone() * kv.clone();
        let (a1, a2, ak) = (i1.abs_f64(), i2.abs_f64(), kv.abs_f64());
        let tail = a2 * ak * graded_tail_estimate(&magnitudes(&t1))
            + a1 * ak * graded_tail_estimate(&magnitudes(&t2))
            + a1 * a2 * graded_tail_estimate(&magnitudes(&tk));
        out.push(residual_sample(w.clone(), product, nan_to_inf(tail), tol));
    }
    let depth = WITNESS_DEPTH.min(effective_degree(f, &k));
    let d = f.dimension();
    let witness = inverse_poly(f, k1, d, 0, depth)?
        .mul(&inverse_poly(f, k2, d, 0, depth)?)
        .mul(&kernel_poly(f, &k, depth)?)
        .sub(&TruncatedPoly::constant(d, depth, S::one()));
    Ok(build_report(
        CriterionKind::Schur,
        effective_degree(f, &k),
        tol,
        out,
        hypothesis,
        &witness,
    ))
}

/// Residuals of `Λ(1/k¹_y) Λ(1/k²_t) Λ(k¹_y ⊗ k²_t) = 1` over pairs `(y, t)`.
pub fn check_tensor_criterion<S: Scalar>(
    f: &TensorFunctional<S>,
    k1: &Kernel,
    k2: &Kernel,
    samples: &[(Vec<S>, Vec<S>)],
    tol: f64,
) -> Result<CriterionReport<S>> {
    check_tol(tol)?;
    k1.require_cnp()?;
    k2.require_cnp()?;
    let tk = TensorKernel::new(k1.clone(), k2.clone())?;
    let d = tk.dimension();
    if f.half_dimension() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: f.half_dimension(),
        });
    }
    let left = f.left_marginal();
    let right = f.right_marginal();
    let hypothesis = HypothesisFlags::new(&tensor_norm_sq_truncated(f, &tk)?, f.joint().unit_value(), tol);
    let mut out = Vec::with_capacity(samples.len());
    for (y, t) in samples {
        let t1 = inverse_kernel_terms(&left, k1, y)?;
        let t2 = inverse_kernel_terms(&right, k2, t)?;
        let tt = tensor_kernel_terms(f, &tk, y, t)?;
        let (i1, i2, kv) = (total(&t1), total(&t2), total(&tt));
        let product = i1.clone() * i2.clone() * kv.clone();
        let (a1, a2, ak) = (i1.abs_f64(), i2.abs_f64(), kv.abs_f64());
        let tail = a2 * ak * graded_tail_estimate(&magnitudes(&t1))
            + a1 * ak * graded_tail_estimate(&magnitudes(&t2))
            + a1 * a2 * graded_tail_estimate(&magnitudes(&tt));
        let point = y.iter().chain(t).cloned().collect();
        out.push(residual_sample(point, product, nan_to_inf(tail), tol));
    }
    let degree = f.degree().min(tk.degree());
    let depth = WITNESS_DEPTH.min(degree);
    let joint = f.joint();
    let kpoly = pairing_poly(joint, 2 * d, 0, depth, |ab| {
        let (a, b) = ab.split_at(d);
        Ok(S::from_rational(&tk.a_coefficient(&a, &b)?))
    })?;
    let witness = inverse_poly(&left, k1, 2 * d, 0, depth)?
        .mul(&inverse_poly(&right, k2, 2 * d, d, depth)?)
        .mul(&kpoly)
        .sub(&TruncatedPoly::constant(2 * d, depth, S::one()));
    Ok(build_report(
        CriterionKind::Tensor,
        degree,
        tol,
        out,
        hypothesis,
        &witness,
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiplicativityFailure<S> {
    pub alpha: MultiIndex,
    pub beta: MultiIndex,
    /// `Λ(z^{α+β})`.
    pub joint_value: S,
    /// `Λ(z^α) Λ(z^β)`.
    pub factor_product: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiplicativityReport<S> {
    pub max_degree: usize,
    pub mode: Mode,
    pub pass: bool,
    /// `Λ(z^α) = Λ(z)^α` for all `|α| ≤ max_degree`.
    pub shorthand_pass: bool,
    pub pairs_checked: usize,
    pub failures: usize,
    pub first_failure: Option<MultiplicativityFailure<S>>,
    /// Smallest `|α + β|` at which the product rule fails.
    pub witness_degree: Option<usize>,
}

fn approx_eq<S: Scalar>(a: &S, b: &S, tol: f64) -> bool {
    match S::MODE {
        Mode::Exact => a == b,
        Mode::Float => {
            let scale = 1.0f64.max(a.abs_f64()).max(b.abs_f64());
            (a.clone() - b.clone()).abs_f64() <= tol * scale
        }
    }
}

/// Default comparison tolerance of the brute-force oracle in float mode.
pub const FLOAT_PRODUCT_TOL: f64 = 1e-12;

/// Checks `Λ(z^{α+β}) = Λ(z^α) Λ(z^β)` for all `|α + β| ≤ max_degree`,
/// exactly in exact mode. Requires `2 · max_degree ≤ N`.
pub fn brute_force_multiplicative<S: Scalar>(
    f: &Functional<S>,
    max_degree: usize,
) -> Result<MultiplicativityReport<S>> {
    brute_force_multiplicative_with_tol(f, max_degree, FLOAT_PRODUCT_TOL)
}

pub fn brute_force_multiplicative_with_tol<S: Scalar>(
    f: &Functional<S>,
    max_degree: usize,
    tol: f64,
) -> Result<MultiplicativityReport<S>> {
    if 2 * max_degree > f.degree() {
        return Err(Error::DegreeOutOfRange {
            degree: 2 * max_degree,
            max: f.degree(),
        });
    }
    let d = f.dimension();
    let mut pairs_checked = 0;
    let mut failures = 0;
    let mut first_failure = None;
    let mut witness_degree = None;
    for s in 0..=max_degree {
        for alpha in MultiIndex::all_up_to(d, s) {
            for beta in MultiIndex::all_of_degree(d, s - alpha.degree()) {
                if beta < alpha {
                    continue;
                }
                pairs_checked += 1;
                let joint = f.value(&alpha.add(&beta))?;
                let prod = f.value(&alpha)?.clone() * f.value(&beta)?.clone();
                if !approx_eq(joint, &prod, tol) {
                    failures += 1;
                    if first_failure.is_none() {
                        witness_degree = Some(s);
                        first_failure = Some(MultiplicativityFailure {
                            alpha: alpha.clone(),
                            beta: beta.clone(),
                            joint_value: joint.clone(),
                            factor_product: prod,
                        });
                    }
                }
            }
        }
    }
    let shorthand_pass = MultiIndex::all_up_to(d, max_degree)
        .iter()
        .all(|a| f.value(a).is_ok_and(|v| approx_eq(v, &f.shorthand(a), tol)));
    Ok(MultiplicativityReport {
        max_degree,
        mode: S::MODE,
        pass: failures == 0,
        shorthand_pass,
        pairs_checked,
        failures,
        first_failure,
        witness_degree,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdentityVariant {
    Power { p: u32 },
    Schur,
    Tensor,
}

/// Both sides of one coefficient identity; for tensor identities `alpha`
/// indexes `x` and `beta` indexes `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport<S> {
    pub variant: IdentityVariant,
    pub alpha: MultiIndex,
    pub beta: Option<MultiIndex>,
    pub lhs: S,
    pub rhs: S,
    pub equal: bool,
}

fn require_exact<S: Scalar>() -> Result<()> {
    match S::MODE {
        Mode::Exact => Ok(()),
        Mode::Float => Err(Error::NonRationalValues),
    }
}

fn require_degree(alpha_degree: usize, max: usize) -> Result<()> {
    if alpha_degree > max {
        return Err(Error::DegreeOutOfRange {
            degree: alpha_degree,
            max,
        });
    }
    Ok(())
}

/// `(Σ w_r Π b_{γ_i} Π Λ(z^{γ_i}), Σ w_r Π b_{γ_i})` over all compositions
/// `γ_1 + ⋯ + γ_r = α`, with `w_r` a weight depending on the part count.
/// The zero index contributes its empty composition with weight `w_0`.
fn composition_sums<S: Scalar>(
    alpha: &MultiIndex,
    b: &mut dyn FnMut(&MultiIndex) -> Result<BigRational>,
    value: &mut dyn FnMut(&MultiIndex) -> Result<S>,
    weight: &dyn Fn(usize) -> BigRational,
) -> Result<(S, BigRational)> {
    let mut with_values = S::zero();
    let mut plain = BigRational::zero();
    let mut b_cache: BTreeMap<MultiIndex, BigRational> = BTreeMap::new();
    for comp in all_compositions(alpha) {
        let mut bprod = weight(comp.len());
        let mut vprod = S::one();
        for part in comp.parts() {
            if !b_cache.contains_key(part) {
                b_cache.insert(part.clone(), b(part)?);
            }
            bprod *= &b_cache[part];
            vprod = vprod * value(part)?;
        }
        if bprod.is_zero() {
            continue;
        }
        with_values = with_values + S::from_rational(&bprod) * vprod;
        plain += bprod;
    }
    Ok((with_values, plain))
}

fn power_weight(p: u32) -> impl Fn(usize) -> BigRational {
    move |r| uint_to_rational(&binomial(r as u64 + u64::from(p) - 1, u64::from(p) - 1))
}

fn unit_weight(_: usize) -> BigRational {
    BigRational::one()
}

/// Compares the `w̄^α` coefficients of
/// `Σ_n binom(n+p-1, p-1) (Σ b_γ Λ(z^γ) w̄^γ)^n` and
/// `Σ_n binom(n+p-1, p-1) Λ((Σ b_γ z^γ w̄^γ)^n)` exactly:
///
/// `Σ_r c_r Σ_{γ_1+⋯+γ_r=α} Π b_{γ_i} Λ(z^{γ_i})` against
/// `Σ_r c_r Σ_{γ_1+⋯+γ_r=α} Π b_{γ_i} · Λ(z^α)`.
pub fn coefficient_identity_check<S: Scalar>(
    f: &Functional<S>,
    k: &Kernel,
    p: u32,
    alpha: &MultiIndex,
) -> Result<IdentityReport<S>> {
    require_exact::<S>()?;
    if p == 0 {
        return Err(Error::InvalidExponent);
    }
    k.require_cnp()?;
    if alpha.is_zero() {
        return Err(Error::ZeroIndex);
    }
    require_degree(alpha.degree(), effective_degree(f, k))?;
    let (lhs, coeff) = composition_sums(
        alpha,
        &mut |g| k.b_alpha(g),
        &mut |g| f.value(g).cloned(),
        &power_weight(p),
    )?;
    let rhs = S::from_rational(&coeff) * f.value(alpha)?.clone();
    Ok(IdentityReport {
        variant: IdentityVariant::Power { p },
        alpha: alpha.clone(),
        beta: None,
        equal: lhs == rhs,
        lhs,
        rhs,
    })
}

/// Schur-product identity: sums over splittings `δ₁ + δ₂ = α` (either part
/// may be zero, contributing the empty composition) and composition pairs of
/// `δ₁` under `b¹` and `δ₂` under `b²`.
pub fn coefficient_identity_check_schur<S: Scalar>(
    f: &Functional<S>,
    k1: &Kernel,
    k2: &Kernel,
    alpha: &MultiIndex,
) -> Result<IdentityReport<S>> {
    require_exact::<S>()?;
    k1.require_cnp()?;
    k2.require_cnp()?;
    if k1.dimension() != k2.dimension() {
        return Err(Error::DimensionMismatch {
            expected: k1.dimension(),
            found: k2.dimension(),
        });
    }
    if alpha.is_zero() {
        return Err(Error::ZeroIndex);
    }
    require_degree(alpha.degree(), effective_degree(f, k1).min(effective_degree(f, k2)))?;
    let mut splits = alpha.nonzero_sub_indices();
    splits.insert(0, MultiIndex::zero(alpha.dim()));
    let mut lhs = S::zero();
    let mut coeff = BigRational::zero();
    for delta1 in splits {
        let delta2 = alpha.checked_sub(&delta1).expect("sub-index");
        let (l1, c1) = composition_sums(
            &delta1,
            &mut |g| k1.b_alpha(g),
            &mut |g| f.value(g).cloned(),
            &unit_weight,
        )?;
        let (l2, c2) = composition_sums(
            &delta2,
            &mut |g| k2.b_alpha(g),
            &mut |g| f.value(g).cloned(),
            &unit_weight,
        )?;
        lhs = lhs + l1 * l2;
        coeff += c1 * c2;
    }
    let rhs = S::from_rational(&coeff) * f.value(alpha)?.clone();
    Ok(IdentityReport {
        variant: IdentityVariant::Schur,
        alpha: alpha.clone(),
        beta: None,
        equal: lhs == rhs,
        lhs,
        rhs,
    })
}

/// Tensor identity at `ȳ^α t̄^β`: the product of the composition sums of
/// `α` (pure `x` values) and `β` (pure `s` values) against the same
/// `b`-weights times the joint value `Λ(x^α s^β)`.
pub fn coefficient_identity_check_tensor<S: Scalar>(
    f: &TensorFunctional<S>,
    k1: &Kernel,
    k2: &Kernel,
    alpha: &MultiIndex,
    beta: &MultiIndex,
) -> Result<IdentityReport<S>> {
    require_exact::<S>()?;
    k1.require_cnp()?;
    k2.require_cnp()?;
    let tk = TensorKernel::new(k1.clone(), k2.clone())?;
    let d = tk.dimension();
    if f.half_dimension() != d || alpha.dim() != d || beta.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: alpha.dim(),
        });
    }
    if alpha.is_zero() && beta.is_zero() {
        return Err(Error::ZeroIndex);
    }
    require_degree(alpha.degree() + beta.degree(), f.degree().min(tk.degree()))?;
    let zero = MultiIndex::zero(d);
    let (l1, c1) = composition_sums(
        alpha,
        &mut |g| k1.b_alpha(g),
        &mut |g| f.value(g, &zero).cloned(),
        &unit_weight,
    )?;
    let (l2, c2) = composition_sums(
        beta,
        &mut |g| k2.b_alpha(g),
        &mut |g| f.value(&zero, g).cloned(),
        &unit_weight,
    )?;
    let lhs = l1 * l2;
    let rhs = S::from_rational(&(c1 * c2)) * f.value(alpha, beta)?.clone();
    Ok(IdentityReport {
        variant: IdentityVariant::Tensor,
        alpha: alpha.clone(),
        beta: Some(beta.clone()),
        equal: lhs == rhs,
        lhs,
        rhs,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentitySweep<S> {
    pub max_degree: usize,
    pub reports: Vec<IdentityReport<S>>,
    pub all_equal: bool,
    /// Lowest total degree with an unequal identity.
    pub first_failure_degree: Option<usize>,
}

impl<S> IdentitySweep<S> {
    fn from_reports(max_degree: usize, reports: Vec<IdentityReport<S>>) -> Self {
        let first_failure_degree = reports
            .iter()
            .filter(|r| !r.equal)
            .map(|r| r.alpha.degree() + r.beta.as_ref().map_or(0, MultiIndex::degree))
            .min();
        IdentitySweep {
            max_degree,
            all_equal: first_failure_degree.is_none(),
            first_failure_degree,
            reports,
        }
    }
}

/// Power identities for every `1 ≤ |α| ≤ max_degree`.
pub fn identity_sweep<S: Scalar>(f: &Functional<S>, k: &Kernel, p: u32, max_degree: usize) -> Result<IdentitySweep<S>> {
    let mut reports = Vec::new();
    for alpha in MultiIndex::all_up_to(f.dimension(), max_degree).into_iter().skip(1) {
        reports.push(coefficient_identity_check(f, k, p, &alpha)?);
    }
    Ok(IdentitySweep::from_reports(max_degree, reports))
}

pub fn identity_sweep_schur<S: Scalar>(
    f: &Functional<S>,
    k1: &Kernel,
    k2: &Kernel,
    max_degree: usize,
) -> Result<IdentitySweep<S>> {
    let mut reports = Vec::new();
    for alpha in MultiIndex::all_up_to(f.dimension(), max_degree).into_iter().skip(1) {
        reports.push(coefficient_identity_check_schur(f, k1, k2, &alpha)?);
    }
    Ok(IdentitySweep::from_reports(max_degree, reports))
}

/// Tensor identities for every `(α, β) ≠ 0` with `|α| + |β| ≤ max_degree`.
pub fn identity_sweep_tensor<S: Scalar>(
    f: &TensorFunctional<S>,
    k1: &Kernel,
    k2: &Kernel,
    max_degree: usize,
) -> Result<IdentitySweep<S>> {
    let d = f.half_dimension();
    let mut reports = Vec::new();
    for ab in MultiIndex::all_up_to(2 * d, max_degree).into_iter().skip(1) {
        let (a, b) = ab.split_at(d);
        reports.push(coefficient_identity_check_tensor(f, k1, k2, &a, &b)?);
    }
    Ok(IdentitySweep::from_reports(max_degree, reports))
}

/// Cross-check of the three legs. The criterion leg may run in a different
/// arithmetic `C` from the exact legs.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport<S, C = S> {
    pub brute_force: MultiplicativityReport<S>,
    pub identities: IdentitySweep<S>,
    pub criterion: CriterionReport<C>,
    /// `None` when the criterion leg is inconclusive.
    pub criterion_holds: Option<bool>,
    /// The legs agree, or a disagreement is excused by violated hypotheses.
    pub consistent: bool,
    pub hypothesis_caveat: bool,
    pub verdict: Verdict,
}

/// Runs the brute-force oracle, the identity sweep and the power criterion
/// and cross-checks their verdicts.
pub fn equivalence_suite<S: Scalar>(
    f: &Functional<S>,
    k: &Kernel,
    p: u32,
    max_degree: usize,
    samples: &[Vec<S>],
    tol: f64,
) -> Result<EquivalenceReport<S>> {
    let brute_force = brute_force_multiplicative(f, max_degree)?;
    let identities = identity_sweep(f, k, p, max_degree)?;
    let criterion = check_power_criterion(f, k, p, samples, tol)?;
    Ok(combine_equivalence(brute_force, identities, criterion))
}

/// Verdict of already computed legs: fail if any leg fails, inconclusive if
/// the criterion is, pass otherwise.
pub fn combine_equivalence<S, C>(
    brute_force: MultiplicativityReport<S>,
    identities: IdentitySweep<S>,
    criterion: CriterionReport<C>,
) -> EquivalenceReport<S, C> {
    let criterion_holds = match criterion.verdict {
        Verdict::Inconclusive => None,
        v => Some(v.holds()),
    };
    let hypothesis_caveat = !criterion.hypothesis.clean();
    let consistent = brute_force.pass == identities.all_equal
        && match criterion_holds {
            Some(h) => h == brute_force.pass || hypothesis_caveat,
            None => true,
        };
    let verdict = if !brute_force.pass || !identities.all_equal || criterion_holds == Some(false) {
        Verdict::Fail
    } else if criterion_holds.is_none() {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    EquivalenceReport {
        brute_force,
        identities,
        criterion,
        criterion_holds,
        consistent,
        hypothesis_caveat,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Exact};
    use alloc::vec;
    use num_complex::Complex64;

    #[test]
    fn tail_estimate_shapes() {
        assert_eq!(graded_tail_estimate(&[1.0, 1.0, 0.0, 0.0, 0.0]), 0.0);
        assert_eq!(graded_tail_estimate(&[1.0, 1.0, 1.0, 1.0]), f64::INFINITY);
        let geo: Vec<f64> = (0..=10).map(|n| Float::powi(0.5f64, n)).collect();
        let t = graded_tail_estimate(&geo);
        assert!((t - Float::powi(0.5f64, 10)).abs() < 1e-15);
        // even-only terms decay at the per-step rate
        let even: Vec<f64> = (0..=10)
            .map(|n| if n % 2 == 0 { Float::powi(0.25f64, n / 2) } else { 0.0 })
            .collect();
        assert!(graded_tail_estimate(&even) > 0.0);
    }

    #[test]
    fn origin_evaluation_has_zero_residuals() {
        let f = Functional::point_evaluation(&[ratio(0, 1)], 12).unwrap();
        let samples = vec![vec![ratio(1, 2)], vec![ratio(-2, 5)]];
        for p in 1..=3 {
            let r = check_power_criterion(&f, &Kernel::szego(12), p, &samples, 1e-9).unwrap();
            assert!(r.samples.iter().all(|s| Scalar::is_zero(&s.deviation)));
            assert_eq!(r.verdict, Verdict::Pass);
            assert_eq!(r.witness_degree, None);
        }
    }

    #[test]
    fn counterexample_power_residual_is_a_quarter() {
        let f: Functional<Exact> = Functional::counterexample(12);
        let r = check_power_criterion(&f, &Kernel::szego(12), 1, &[vec![ratio(1, 2)]], 1e-9).unwrap();
        assert_eq!(r.samples[0].deviation, ratio(-1, 4));
        assert_eq!(r.max_residual, 0.25);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.hypothesis.norm_exceeds_one);
        assert_eq!(r.witness_degree, Some(2));
    }

    #[test]
    fn interior_point_holds_but_norm_exceeds_one() {
        let f = Functional::point_evaluation(&[Complex64::new(0.3, 0.0)], 24).unwrap();
        let r = check_power_criterion(&f, &Kernel::szego(24), 2, &[vec![Complex64::new(0.4, 0.0)]], 1e-9).unwrap();
        assert!(r.max_residual <= 1e-12);
        assert_eq!(r.verdict, Verdict::HypothesisViolated);
    }

    #[test]
    fn not_cnp_is_rejected() {
        let f: Functional<Exact> = Functional::counterexample(8);
        let bergman = Kernel::szego(8).power(2).unwrap();
        assert!(matches!(
            check_power_criterion(&f, &bergman, 1, &[], 1e-9),
            Err(Error::NotCnp { index: 2 })
        ));
    }

    #[test]
    fn brute_force_cases() {
        let f = Functional::point_evaluation(&[ratio(1, 3), ratio(-1, 2)], 8).unwrap();
        let r = brute_force_multiplicative(&f, 4).unwrap();
        assert!(r.pass && r.shorthand_pass);

        let c: Functional<Exact> = Functional::counterexample(8);
        let r = brute_force_multiplicative(&c, 4).unwrap();
        assert!(!r.pass && !r.shorthand_pass);
        let fail = r.first_failure.unwrap();
        assert_eq!(fail.alpha, MultiIndex::new(vec![1]));
        assert_eq!(fail.beta, MultiIndex::new(vec![1]));
        assert!(Scalar::is_zero(&fail.joint_value));
        assert_eq!(fail.factor_product, ratio(1, 1));
        assert_eq!(r.witness_degree, Some(2));

        let ones: Functional<Exact> = Functional::boundary_limit_ones(1, 8);
        assert!(brute_force_multiplicative(&ones, 4).unwrap().pass);

        assert!(matches!(
            brute_force_multiplicative(&ones, 5),
            Err(Error::DegreeOutOfRange { .. })
        ));
    }

    #[test]
    fn identity_hand_expansions() {
        let s = Kernel::szego(8);
        let lam = ratio(2, 7);
        let f = Functional::point_evaluation(core::slice::from_ref(&lam), 8).unwrap();
        let a2 = MultiIndex::new(vec![2]);
        // p = 1: b_2 Λ(z²) + b_1² Λ(z)², with b_2 = 0 and b_1 = 1
        let r = coefficient_identity_check(&f, &s, 1, &a2).unwrap();
        assert!(r.equal);
        assert_eq!(r.lhs, lam.clone() * lam.clone());

        // p = 2: 2 b_2 Λ(z²) + 3 b_1² Λ(z)²
        let d = Kernel::dirichlet(1, 8).unwrap();
        let f = Functional::point_evaluation(core::slice::from_ref(&lam), 8).unwrap();
        let r = coefficient_identity_check(&f, &d, 2, &a2).unwrap();
        let b1 = ratio(1, 2);
        let b2 = ratio(1, 12);
        let want = ratio(2, 1) * b2 * lam.clone() * lam.clone() + ratio(3, 1) * b1.clone() * b1 * lam.clone() * lam;
        assert_eq!(r.lhs, want);
        assert!(r.equal);

        let c: Functional<Exact> = Functional::counterexample(8);
        let r = coefficient_identity_check(&c, &s, 1, &a2).unwrap();
        assert_eq!(r.lhs, ratio(1, 1));
        assert!(Scalar::is_zero(&r.rhs));
        assert!(!r.equal);
    }

    #[test]
    fn identity_requires_exact_values() {
        let f = Functional::point_evaluation(&[Complex64::new(0.2, 0.0)], 6).unwrap();
        assert_eq!(
            coefficient_identity_check(&f, &Kernel::szego(6), 1, &MultiIndex::new(vec![2])),
            Err(Error::NonRationalValues)
        );
    }

    #[test]
    fn equivalence_on_fixtures() {
        let s = Kernel::szego(12);
        let samples = vec![vec![ratio(1, 2)], vec![ratio(3, 10)]];
        let o = Functional::point_evaluation(&[ratio(0, 1)], 12).unwrap();
        let r = equivalence_suite(&o, &s, 1, 5, &samples, 1e-9).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.consistent);

        let c: Functional<Exact> = Functional::counterexample(12);
        let r = equivalence_suite(&c, &s, 1, 5, &samples, 1e-9).unwrap();
        assert!(!r.brute_force.pass && !r.identities.all_equal);
        assert_eq!(r.criterion.verdict, Verdict::Fail);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.consistent);
    }
}
