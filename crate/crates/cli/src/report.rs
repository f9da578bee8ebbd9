//! Report documents and their conversion from library results.
//!
//! Non-finite floats serialize as `null`. Complex values are `[re, im]`
//! string pairs.

use serde::Serialize;

use rkhsmult_core::kernel::MembershipReport;
use rkhsmult_core::verify::{
    CriterionKind, CriterionReport, EquivalenceReport, IdentityReport, IdentitySweep, MultiplicativityReport, Verdict,
};
use rkhsmult_core::{MultiIndex, Scalar};

use crate::config::{JobConfig, Outcome};
use crate::numfmt::Encode;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const TAIL_METHOD: &str = "geometric bound from the largest per-degree growth ratio of the upper half \
of the graded terms; products combine factor tails to first order; unbounded when the ratio is at least one";

pub type C = [String; 2];

pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn point<S: Encode>(p: &[S]) -> Vec<C> {
    p.iter().map(Encode::encode).collect()
}

fn index(a: &MultiIndex) -> Vec<u32> {
    a.exponents().to_vec()
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Audit {
    pub degree: usize,
    pub mode: &'static str,
    pub tolerance: f64,
    pub tail_estimate_method: &'static str,
    pub samples: &'static str,
    pub identity_arithmetic: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    NotApplicableHypothesisViolated,
    Error,
}

impl Status {
    /// Compares an outcome with an optional expectation. Inconclusive
    /// outcomes stay inconclusive.
    pub fn resolve(outcome: Outcome, expect: Option<Outcome>) -> Status {
        match (outcome, expect) {
            (Outcome::Inconclusive, _) => Status::Inconclusive,
            (o, Some(e)) if o == e => Status::Pass,
            (_, Some(_)) => Status::Fail,
            (Outcome::Pass, None) => Status::Pass,
            (Outcome::Fail, None) => Status::Fail,
            (Outcome::NotApplicableHypothesisViolated, None) => Status::NotApplicableHypothesisViolated,
        }
    }
}

pub fn outcome_of(v: Verdict) -> Outcome {
    match v {
        Verdict::Pass => Outcome::Pass,
        Verdict::Fail => Outcome::Fail,
        Verdict::Inconclusive => Outcome::Inconclusive,
        Verdict::HypothesisViolated => Outcome::NotApplicableHypothesisViolated,
    }
}

pub fn pass_fail(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    pub id: String,
    pub kind: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect: Option<Outcome>,
    pub mode: &'static str,
    pub subjects: Subjects,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Subjects {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub kernels: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functional: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum CheckResult {
    Cnp(CnpResult),
    Criterion(CriterionResult),
    DualRoute(DualRouteResult),
    Norm(NormResult),
    Membership(MembershipResult),
    Identity(IdentityResult),
    BruteForce(BruteForceResult),
    Equivalence(Box<EquivalenceResult>),
}

#[derive(Debug, Clone, Serialize)]
pub struct CnpResult {
    pub degree: usize,
    pub dimension: usize,
    pub is_cnp: bool,
    pub first_negative_index: Option<usize>,
    pub normalized: bool,
    /// A negative `b_n` is conclusive; non-negative coefficients up to the
    /// truncation degree are only evidence.
    pub certainty: &'static str,
    pub a: Vec<String>,
    pub b: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Hypothesis {
    pub norm_sq: Option<f64>,
    pub norm_exceeds_one: bool,
    pub unit_value_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleRow {
    pub point: Vec<C>,
    pub product: C,
    pub deviation: C,
    pub residual: Option<f64>,
    pub tail_estimate: Option<f64>,
    pub verdict: Outcome,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub criterion: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    pub degree: usize,
    pub tolerance: f64,
    pub max_residual: Option<f64>,
    pub max_tail_estimate: Option<f64>,
    pub hypothesis: Hypothesis,
    pub witness_degree: Option<usize>,
    pub witness_depth: usize,
    pub samples: Vec<SampleRow>,
}

impl CriterionResult {
    pub fn from_report<S: Scalar + Encode>(r: &CriterionReport<S>) -> Self {
        let (criterion, p) = match r.kind {
            CriterionKind::Power { p } => ("power", Some(p)),
            CriterionKind::Schur => ("schur", None),
            CriterionKind::Tensor => ("tensor", None),
        };
        CriterionResult {
            criterion,
            p,
            degree: r.degree,
            tolerance: r.tolerance,
            max_residual: finite(r.max_residual),
            max_tail_estimate: finite(r.max_tail_estimate),
            hypothesis: Hypothesis {
                norm_sq: finite(r.hypothesis.norm_sq),
                norm_exceeds_one: r.hypothesis.norm_exceeds_one,
                unit_value_ok: r.hypothesis.unit_value_ok,
            },
            witness_degree: r.witness_degree,
            witness_depth: r.witness_depth,
            samples: r
                .samples
                .iter()
                .map(|s| SampleRow {
                    point: point(&s.point),
                    product: s.product.encode(),
                    deviation: s.deviation.encode(),
                    residual: finite(s.residual),
                    tail_estimate: finite(s.tail_estimate),
                    verdict: outcome_of(s.verdict),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DualRouteRow {
    pub point: Vec<C>,
    pub series_route: C,
    pub kernel_power: C,
    pub difference: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualRouteResult {
    pub p: u32,
    pub degree: usize,
    pub tolerance: f64,
    pub max_difference: Option<f64>,
    pub samples: Vec<DualRouteRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointComparison {
    pub point: Vec<C>,
    pub kernel_diagonal: Option<f64>,
    pub tail_estimate: Option<f64>,
    pub difference: Option<f64>,
    pub within_tail: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormResult {
    pub degree: usize,
    pub tolerance: f64,
    pub norm_sq: C,
    pub norm_sq_by_degree: Vec<Option<f64>>,
    pub monotone: bool,
    pub norm_exceeds_one: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point_evaluation: Option<PointComparison>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MembershipResult {
    pub p: u32,
    pub m: u32,
    pub point: Vec<C>,
    pub half_degree: usize,
    pub full_degree: usize,
    pub norm_sq_half: C,
    pub norm_sq_full: C,
    pub growth: Option<f64>,
    pub threshold: f64,
    pub diverging: bool,
}

impl MembershipResult {
    pub fn from_report<S: Scalar + Encode>(r: &MembershipReport<S>, w: &[S]) -> Self {
        MembershipResult {
            p: r.p,
            m: r.m,
            point: point(w),
            half_degree: r.half_degree,
            full_degree: r.full_degree,
            norm_sq_half: r.norm_sq_half.encode(),
            norm_sq_full: r.norm_sq_full.encode(),
            growth: finite(r.growth),
            threshold: r.threshold,
            diverging: r.diverging,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityRow {
    pub alpha: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<u32>>,
    pub lhs: C,
    pub rhs: C,
    pub equal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityResult {
    pub variant: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    pub max_degree: usize,
    pub all_equal: bool,
    pub first_failure_degree: Option<usize>,
    pub identities: Vec<IdentityRow>,
}

impl IdentityResult {
    pub fn from_sweep<S: Encode>(variant: &'static str, p: Option<u32>, s: &IdentitySweep<S>) -> Self {
        IdentityResult {
            variant,
            p,
            max_degree: s.max_degree,
            all_equal: s.all_equal,
            first_failure_degree: s.first_failure_degree,
            identities: s.reports.iter().map(identity_row).collect(),
        }
    }
}

fn identity_row<S: Encode>(r: &IdentityReport<S>) -> IdentityRow {
    IdentityRow {
        alpha: index(&r.alpha),
        beta: r.beta.as_ref().map(index),
        lhs: r.lhs.encode(),
        rhs: r.rhs.encode(),
        equal: r.equal,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductFailure {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub joint_value: C,
    pub factor_product: C,
}

#[derive(Debug, Clone, Serialize)]
pub struct BruteForceResult {
    pub max_degree: usize,
    pub pass: bool,
    pub shorthand_pass: bool,
    pub pairs_checked: usize,
    pub failures: usize,
    pub first_failure: Option<ProductFailure>,
    pub witness_degree: Option<usize>,
}

impl BruteForceResult {
    pub fn from_report<S: Encode>(r: &MultiplicativityReport<S>) -> Self {
        BruteForceResult {
            max_degree: r.max_degree,
            pass: r.pass,
            shorthand_pass: r.shorthand_pass,
            pairs_checked: r.pairs_checked,
            failures: r.failures,
            first_failure: r.first_failure.as_ref().map(|f| ProductFailure {
                alpha: index(&f.alpha),
                beta: index(&f.beta),
                joint_value: f.joint_value.encode(),
                factor_product: f.factor_product.encode(),
            }),
            witness_degree: r.witness_degree,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceResult {
    pub verdict: Outcome,
    pub consistent: bool,
    pub hypothesis_caveat: bool,
    pub criterion_holds: Option<bool>,
    pub brute_force: BruteForceResult,
    pub identities: IdentityResult,
    pub criterion: CriterionResult,
}

impl EquivalenceResult {
    pub fn from_report<S: Encode, T: Scalar + Encode>(r: &EquivalenceReport<S, T>, p: u32) -> Self {
        EquivalenceResult {
            verdict: outcome_of(r.verdict),
            consistent: r.consistent,
            hypothesis_caveat: r.hypothesis_caveat,
            criterion_holds: r.criterion_holds,
            brute_force: BruteForceResult::from_report(&r.brute_force),
            identities: IdentityResult::from_sweep("power", Some(p), &r.identities),
            criterion: CriterionResult::from_report(&r.criterion),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Counts {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    pub not_applicable: usize,
    pub error: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub verdict: &'static str,
    pub checks: usize,
    pub counts: Counts,
}

impl Summary {
    /// Pass when no check failed or errored; inconclusive and
    /// hypothesis-violated checks do not count against the verdict.
    pub fn from_entries(entries: &[CheckEntry]) -> Self {
        let mut counts = Counts::default();
        for e in entries {
            match e.status {
                Status::Pass => counts.pass += 1,
                Status::Fail => counts.fail += 1,
                Status::Inconclusive => counts.inconclusive += 1,
                Status::NotApplicableHypothesisViolated => counts.not_applicable += 1,
                Status::Error => counts.error += 1,
            }
        }
        let verdict = if counts.error > 0 {
            "error"
        } else if counts.fail > 0 {
            "fail"
        } else {
            "pass"
        };
        Summary {
            verdict,
            checks: entries.len(),
            counts,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub total_ms: f64,
    pub checks_ms: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub report_schema_version: u32,
    pub tool: ToolInfo,
    pub command: &'static str,
    pub config: JobConfig,
    pub audit: Audit,
    pub checks: Vec<CheckEntry>,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl ReportDocument {
    pub fn exit_code(&self) -> i32 {
        match self.summary.verdict {
            "pass" => 0,
            "fail" => 1,
            _ => 2,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per sample of every criterion and dual-route check.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "check",
            "kind",
            "sample",
            "point",
            "value",
            "residual",
            "tail_estimate",
            "verdict",
        ])?;
        let num = |x: Option<f64>| x.map_or_else(String::new, |v| v.to_string());
        let pt = |p: &[C]| {
            p.iter()
                .map(|[re, im]| format!("{} {}", re, im))
                .collect::<Vec<_>>()
                .join("; ")
        };
        for e in &self.checks {
            let criterion = match &e.result {
                Some(CheckResult::Criterion(c)) => Some(c),
                Some(CheckResult::Equivalence(q)) => Some(&q.criterion),
                _ => None,
            };
            if let Some(c) = criterion {
                for (i, s) in c.samples.iter().enumerate() {
                    w.write_record([
                        e.id.as_str(),
                        e.kind,
                        &i.to_string(),
                        &pt(&s.point),
                        &format!("{} {}", s.product[0], s.product[1]),
                        &num(s.residual),
                        &num(s.tail_estimate),
                        outcome_str(s.verdict),
                    ])?;
                }
            }
            if let Some(CheckResult::DualRoute(d)) = &e.result {
                for (i, s) in d.samples.iter().enumerate() {
                    w.write_record([
                        e.id.as_str(),
                        e.kind,
                        &i.to_string(),
                        &pt(&s.point),
                        &format!("{} {}", s.series_route[0], s.series_route[1]),
                        &num(s.difference),
                        "",
                        "",
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn outcome_str(o: Outcome) -> &'static str {
    match o {
        Outcome::Pass => "pass",
        Outcome::Fail => "fail",
        Outcome::Inconclusive => "inconclusive",
        Outcome::NotApplicableHypothesisViolated => "not_applicable_hypothesis_violated",
    }
}
