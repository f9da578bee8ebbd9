//! Check orchestration: config validation, expression building and
//! execution of the selected checks in declared order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;

use rkhsmult_core::functional::{apply_series_route, apply_to_kernel_power, effective_degree, functional_norm_sq_at};
use rkhsmult_core::kernel::{inverse_power_membership_check, kernel_eval};
use rkhsmult_core::samples::{default_samples, dense_samples};
use rkhsmult_core::verify::{
    brute_force_multiplicative, check_power_criterion, check_schur_criterion, check_tensor_criterion,
    combine_equivalence, identity_sweep, identity_sweep_schur, identity_sweep_tensor,
};
use rkhsmult_core::{Exact, Functional, Kernel, Scalar, TensorFunctional, TensorKernel};

use crate::config::{CheckSpec, JobConfig, ModeName, Outcome, CONFIG_SCHEMA_VERSION, DENSE_COUNT};
use crate::expr::{parse_functional_expr, parse_kernel_expr, BuildError, BuiltFunctional, BuiltKernel, ParseError};
use crate::numfmt::Encode;
use crate::report::{
    finite, outcome_of, pass_fail, point, Audit, BruteForceResult, CheckEntry, CheckResult, CnpResult, CriterionResult,
    DualRouteResult, DualRouteRow, EquivalenceResult, IdentityResult, MembershipResult, NormResult, PointComparison,
    ReportDocument, Status, Subjects, Summary, Timing, ToolInfo, REPORT_SCHEMA_VERSION, TAIL_METHOD,
};

/// Scalars a check can run in, converted from the exact inputs.
pub trait Lift: Scalar + Encode {
    fn lift(x: &Exact) -> Self;
}

impl Lift for Exact {
    fn lift(x: &Exact) -> Self {
        x.clone()
    }
}

impl Lift for Complex64 {
    fn lift(x: &Exact) -> Self {
        x.to_c64()
    }
}

fn lift_point<S: Lift>(p: &[Exact]) -> Vec<S> {
    p.iter().map(S::lift).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Cnp,
    Verify,
    Norm,
    Identity,
    Report,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Cnp => "cnp",
            Command::Verify => "verify",
            Command::Norm => "norm",
            Command::Identity => "identity",
            Command::Report => "report",
        }
    }

    pub fn selects(self, kind: &str) -> bool {
        match self {
            Command::Cnp => kind == "cnp",
            Command::Verify => matches!(kind, "power" | "schur" | "tensor" | "dual_route"),
            Command::Norm => matches!(kind, "norm" | "membership"),
            Command::Identity => matches!(kind, "identity" | "identity_schur" | "identity_tensor" | "brute_force"),
            Command::Report => true,
        }
    }
}

/// Command-line settings that take precedence over the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub degree: Option<usize>,
    pub tolerance: Option<f64>,
    pub mode: Option<ModeName>,
    pub dense: bool,
}

/// Invalid input. Every variant maps to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("{name}: {source}")]
    Parse { name: String, source: ParseError },
    #[error("{name}: {source}")]
    Build { name: String, source: BuildError },
    #[error("the config selects no checks for `{0}`")]
    NoChecks(&'static str),
}

type Pair = (Vec<Exact>, Vec<Exact>);

/// A validated config with every expression built at the job degree.
pub struct Job {
    config: JobConfig,
    kernels: BTreeMap<String, BuiltKernel>,
    functionals: BTreeMap<String, BuiltFunctional>,
    samples: Option<Vec<Vec<Exact>>>,
    tensor_samples: Option<Vec<Pair>>,
}

pub fn load_config(path: &Path) -> Result<JobConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(JobConfig::from_json(&text)?)
}

/// Loads, validates and runs a config file. Table paths resolve against the
/// config's directory.
pub fn run_path(
    path: &Path,
    command: Command,
    overrides: &Overrides,
    timing: bool,
) -> Result<ReportDocument, RunError> {
    let config = load_config(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    Job::prepare(config, base, overrides)?.run(command, timing)
}

fn invalid(message: impl Into<String>) -> RunError {
    RunError::Invalid(message.into())
}

impl Job {
    pub fn prepare(mut config: JobConfig, base: &Path, overrides: &Overrides) -> Result<Self, RunError> {
        if let Some(n) = overrides.degree {
            config.degree = n;
        }
        if let Some(t) = overrides.tolerance {
            config.tolerance = t;
        }
        if let Some(m) = overrides.mode {
            config.mode = m;
        }
        config.dense |= overrides.dense;

        if config.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(invalid(format!(
                "schema_version {} is not supported (expected {})",
                config.schema_version, CONFIG_SCHEMA_VERSION
            )));
        }
        if config.degree == 0 {
            return Err(invalid("degree must be at least 1"));
        }
        if !config.tolerance.is_finite() || config.tolerance < 0.0 {
            return Err(invalid("tolerance must be finite and non-negative"));
        }

        let mut kernels = BTreeMap::new();
        for (name, text) in &config.kernels {
            let e = parse_kernel_expr(text).map_err(|source| RunError::Parse {
                name: format!("kernel {}", name),
                source,
            })?;
            let k = e.build(config.degree).map_err(|source| RunError::Build {
                name: format!("kernel {}", name),
                source,
            })?;
            kernels.insert(name.clone(), k);
        }
        let mut functionals = BTreeMap::new();
        for (name, text) in &config.functionals {
            let e = parse_functional_expr(text).map_err(|source| RunError::Parse {
                name: format!("functional {}", name),
                source,
            })?;
            let f = e.build(config.degree, base).map_err(|source| RunError::Build {
                name: format!("functional {}", name),
                source,
            })?;
            functionals.insert(name.clone(), f);
        }

        let parse_point = |what: String, p: &[crate::config::NumberText]| -> Result<Vec<Exact>, RunError> {
            p.iter()
                .map(|x| x.parse().map_err(|e| invalid(format!("{}: {}", what, e))))
                .collect()
        };
        let samples = match &config.samples {
            Some(list) => Some(
                list.iter()
                    .enumerate()
                    .map(|(i, p)| parse_point(format!("sample {}", i), p))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            None => None,
        };
        let tensor_samples = match &config.tensor_samples {
            Some(list) => Some(
                list.iter()
                    .enumerate()
                    .map(|(i, [y, t])| {
                        Ok((
                            parse_point(format!("tensor sample {}", i), y)?,
                            parse_point(format!("tensor sample {}", i), t)?,
                        ))
                    })
                    .collect::<Result<Vec<_>, RunError>>()?,
            ),
            None => None,
        };

        let job = Job {
            config,
            kernels,
            functionals,
            samples,
            tensor_samples,
        };
        for (i, spec) in job.config.checks.iter().enumerate() {
            job.validate(spec)
                .map_err(|m| invalid(format!("check {} ({}): {}", i + 1, spec.kind(), m)))?;
        }
        Ok(job)
    }

    pub fn config(&self) -> &JobConfig {
        &self.config
    }

    fn plain_kernel(&self, name: &str) -> Result<&Kernel, String> {
        match self.kernels.get(name) {
            Some(BuiltKernel::Plain(k)) => Ok(k),
            Some(BuiltKernel::Tensor(_)) => Err(format!("kernel `{}` is a tensor kernel", name)),
            None => Err(format!("unknown kernel `{}`", name)),
        }
    }

    fn tensor_kernel(&self, name: &str) -> Result<&TensorKernel, String> {
        match self.kernels.get(name) {
            Some(BuiltKernel::Tensor(k)) => Ok(k),
            Some(BuiltKernel::Plain(_)) => Err(format!("kernel `{}` is not a tensor kernel", name)),
            None => Err(format!("unknown kernel `{}`", name)),
        }
    }

    fn plain_functional(&self, name: &str) -> Result<&Functional<Exact>, String> {
        match self.functionals.get(name) {
            Some(BuiltFunctional::Plain(f)) => Ok(f),
            Some(BuiltFunctional::Tensor(_)) => Err(format!("functional `{}` is a tensor functional", name)),
            None => Err(format!("unknown functional `{}`", name)),
        }
    }

    fn tensor_functional(&self, name: &str) -> Result<&TensorFunctional<Exact>, String> {
        match self.functionals.get(name) {
            Some(BuiltFunctional::Tensor(f)) => Ok(f),
            Some(BuiltFunctional::Plain(_)) => Err(format!("functional `{}` is not a tensor functional", name)),
            None => Err(format!("unknown functional `{}`", name)),
        }
    }

    fn pair(&self, kernel: &str, functional: &str) -> Result<(&Kernel, &Functional<Exact>), String> {
        let k = self.plain_kernel(kernel)?;
        let f = self.plain_functional(functional)?;
        same_dimension(k.dimension(), f.dimension())?;
        Ok((k, f))
    }

    fn schur_pair(
        &self,
        names: &[String; 2],
        functional: &str,
    ) -> Result<(&Kernel, &Kernel, &Functional<Exact>), String> {
        let k1 = self.plain_kernel(&names[0])?;
        let k2 = self.plain_kernel(&names[1])?;
        let f = self.plain_functional(functional)?;
        same_dimension(k1.dimension(), k2.dimension())?;
        same_dimension(k1.dimension(), f.dimension())?;
        Ok((k1, k2, f))
    }

    fn tensor_pair(&self, kernel: &str, functional: &str) -> Result<(&TensorKernel, &TensorFunctional<Exact>), String> {
        let k = self.tensor_kernel(kernel)?;
        let f = self.tensor_functional(functional)?;
        same_dimension(k.dimension(), f.half_dimension())?;
        Ok((k, f))
    }

    fn check_samples(&self, d: usize) -> Result<(), String> {
        if let Some(s) = &self.samples {
            if let Some(p) = s.iter().find(|p| p.len() != d) {
                return Err(format!("sample with {} coordinates, the check needs {}", p.len(), d));
            }
        }
        Ok(())
    }

    fn check_tensor_samples(&self, d: usize) -> Result<(), String> {
        if let Some(s) = &self.tensor_samples {
            if s.iter().any(|(y, t)| y.len() != d || t.len() != d) {
                return Err(format!("tensor samples need {} coordinates on each side", d));
            }
        }
        Ok(())
    }

    fn validate(&self, spec: &CheckSpec) -> Result<(), String> {
        let positive = |name: &str, v: u32| {
            if v == 0 {
                Err(format!("{} must be at least 1", name))
            } else {
                Ok(())
            }
        };
        let sweep = |max: usize, limit: usize| {
            if max == 0 {
                Err("max_degree must be at least 1".to_string())
            } else if max > limit {
                Err(format!("max_degree {} exceeds the truncation degree {}", max, limit))
            } else {
                Ok(())
            }
        };
        match spec {
            CheckSpec::Cnp { kernel, .. } => self.plain_kernel(kernel).map(drop),
            CheckSpec::Power {
                kernel, functional, p, ..
            }
            | CheckSpec::DualRoute {
                kernel, functional, p, ..
            } => {
                let (k, _) = self.pair(kernel, functional)?;
                positive("p", *p)?;
                self.check_samples(k.dimension())
            }
            CheckSpec::Schur {
                kernels, functional, ..
            } => {
                let (k, _, _) = self.schur_pair(kernels, functional)?;
                self.check_samples(k.dimension())
            }
            CheckSpec::Tensor { kernel, functional, .. } => {
                let (k, _) = self.tensor_pair(kernel, functional)?;
                self.check_tensor_samples(k.dimension())
            }
            CheckSpec::Norm { kernel, functional, .. } => self.pair(kernel, functional).map(drop),
            CheckSpec::Membership {
                kernel,
                p,
                m,
                point,
                threshold,
                ..
            } => {
                let k = self.plain_kernel(kernel)?;
                positive("p", *p)?;
                positive("m", *m)?;
                same_dimension(k.dimension(), point.len())?;
                if !threshold.is_finite() || *threshold < 0.0 {
                    return Err("threshold must be finite and non-negative".into());
                }
                Ok(())
            }
            CheckSpec::Identity {
                kernel,
                functional,
                p,
                max_degree,
                ..
            } => {
                let (k, f) = self.pair(kernel, functional)?;
                positive("p", *p)?;
                sweep(*max_degree, effective_degree(f, k))
            }
            CheckSpec::IdentitySchur {
                kernels,
                functional,
                max_degree,
                ..
            } => {
                let (k1, k2, f) = self.schur_pair(kernels, functional)?;
                sweep(*max_degree, f.degree().min(k1.degree()).min(k2.degree()))
            }
            CheckSpec::IdentityTensor {
                kernel,
                functional,
                max_degree,
                ..
            } => {
                let (k, f) = self.tensor_pair(kernel, functional)?;
                sweep(*max_degree, f.degree().min(k.degree()))
            }
            CheckSpec::BruteForce {
                functional, max_degree, ..
            } => {
                let f = self.plain_functional(functional)?;
                sweep(2 * *max_degree, f.degree())
            }
            CheckSpec::Equivalence {
                kernel,
                functional,
                p,
                max_degree,
                ..
            } => {
                let (k, f) = self.pair(kernel, functional)?;
                positive("p", *p)?;
                sweep(2 * *max_degree, effective_degree(f, k))?;
                self.check_samples(k.dimension())
            }
        }
    }

    fn selection(&self, command: Command) -> Vec<(String, CheckSpec)> {
        let mut out: Vec<(String, CheckSpec)> = self
            .config
            .checks
            .iter()
            .enumerate()
            .filter(|(_, c)| command.selects(c.kind()))
            .map(|(i, c)| {
                let id = c
                    .id()
                    .map_or_else(|| format!("{:02}-{}", i + 1, c.kind()), str::to_string);
                (id, c.clone())
            })
            .collect();
        if !out.is_empty() {
            return out;
        }
        let mut generated = Vec::new();
        match command {
            Command::Cnp => {
                for (name, k) in &self.kernels {
                    if let BuiltKernel::Plain(_) = k {
                        generated.push(CheckSpec::Cnp {
                            id: None,
                            expect: None,
                            kernel: name.clone(),
                        });
                    }
                }
            }
            Command::Norm => {
                for (kn, k) in &self.kernels {
                    for (fname, f) in &self.functionals {
                        if let (BuiltKernel::Plain(k), BuiltFunctional::Plain(f)) = (k, f) {
                            if k.dimension() == f.dimension() {
                                generated.push(CheckSpec::Norm {
                                    id: None,
                                    expect: None,
                                    kernel: kn.clone(),
                                    functional: fname.clone(),
                                });
                            }
                        }
                    }
                }
            }
            _ => {}
        }
        for (i, c) in generated.into_iter().enumerate() {
            out.push((format!("auto-{:02}-{}", i + 1, c.kind()), c));
        }
        out
    }

    fn samples_source(&self) -> &'static str {
        if self.config.dense {
            "dense"
        } else if self.samples.is_some() || self.tensor_samples.is_some() {
            "config"
        } else {
            "default"
        }
    }

    fn plain_samples(&self, d: usize) -> Vec<Vec<Exact>> {
        if self.config.dense {
            dense_samples(d, DENSE_COUNT)
        } else if let Some(s) = &self.samples {
            s.clone()
        } else {
            default_samples(d)
        }
    }

    /// Grid points paired with the same grid reversed, so both factors range
    /// over the whole grid without the cost of all pairs.
    fn tensor_sample_pairs(&self, d: usize) -> Vec<Pair> {
        if let Some(s) = &self.tensor_samples {
            if !self.config.dense {
                return s.clone();
            }
        }
        let grid = if self.config.dense {
            dense_samples(d, DENSE_COUNT)
        } else {
            default_samples(d)
        };
        grid.iter().cloned().zip(grid.iter().rev().cloned()).collect()
    }

    pub fn run(&self, command: Command, timing: bool) -> Result<ReportDocument, RunError> {
        let start = Instant::now();
        let selection = self.selection(command);
        if selection.is_empty() {
            return Err(RunError::NoChecks(command.as_str()));
        }
        let mut checks = Vec::with_capacity(selection.len());
        let mut checks_ms = Vec::with_capacity(selection.len());
        for (id, spec) in selection {
            let t = Instant::now();
            checks.push(self.execute(id, &spec));
            checks_ms.push(t.elapsed().as_secs_f64() * 1e3);
        }
        let summary = Summary::from_entries(&checks);
        Ok(ReportDocument {
            report_schema_version: REPORT_SCHEMA_VERSION,
            tool: ToolInfo {
                name: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
            },
            command: command.as_str(),
            config: self.config.clone(),
            audit: Audit {
                degree: self.config.degree,
                mode: self.config.mode.as_str(),
                tolerance: self.config.tolerance,
                tail_estimate_method: TAIL_METHOD,
                samples: self.samples_source(),
                identity_arithmetic: "exact",
            },
            checks,
            summary,
            timing: timing.then(|| Timing {
                total_ms: start.elapsed().as_secs_f64() * 1e3,
                checks_ms,
            }),
        })
    }

    fn execute(&self, id: String, spec: &CheckSpec) -> CheckEntry {
        let always_exact = matches!(
            spec,
            CheckSpec::Cnp { .. }
                | CheckSpec::Identity { .. }
                | CheckSpec::IdentitySchur { .. }
                | CheckSpec::IdentityTensor { .. }
                | CheckSpec::BruteForce { .. }
        );
        let mode = if always_exact {
            ModeName::Exact
        } else {
            self.config.mode
        };
        let result = match mode {
            ModeName::Exact => self.execute_in::<Exact>(spec),
            ModeName::Float => self.execute_in::<Complex64>(spec),
        };
        let expect = spec.expect();
        let (status, outcome, result, error) = match result {
            Ok((o, r)) => (Status::resolve(o, expect), Some(o), Some(r), None),
            Err(e) => (Status::Error, None, None, Some(e)),
        };
        CheckEntry {
            id,
            kind: spec.kind(),
            status,
            outcome,
            expect,
            mode: mode.as_str(),
            subjects: subjects(spec),
            result,
            error,
        }
    }

    fn execute_in<S: Lift>(&self, spec: &CheckSpec) -> Result<(Outcome, CheckResult), String> {
        let tol = self.config.tolerance;
        let core = |e: rkhsmult_core::Error| e.to_string();
        let lifted = |d: usize| -> Vec<Vec<S>> { self.plain_samples(d).iter().map(|p| lift_point(p)).collect() };
        Ok(match spec {
            CheckSpec::Cnp { kernel, .. } => {
                let k = self.plain_kernel(kernel)?;
                let cnp = k.cnp();
                let r = CnpResult {
                    degree: k.degree(),
                    dimension: k.dimension(),
                    is_cnp: cnp.is_cnp_up_to_n(),
                    first_negative_index: cnp.first_negative_index(),
                    normalized: cnp.is_normalized(),
                    certainty: if cnp.is_cnp_up_to_n() {
                        "evidence: b_n >= 0 holds up to the truncation degree only"
                    } else {
                        "certificate: a negative b_n rules out the CNP property"
                    },
                    a: k.a_series()
                        .coeffs()
                        .iter()
                        .map(crate::numfmt::format_rational)
                        .collect(),
                    b: cnp
                        .b_series()
                        .coeffs()
                        .iter()
                        .map(crate::numfmt::format_rational)
                        .collect(),
                };
                (pass_fail(r.is_cnp), CheckResult::Cnp(r))
            }
            CheckSpec::Power {
                kernel, functional, p, ..
            } => {
                let (k, f) = self.pair(kernel, functional)?;
                let r = check_power_criterion(&f.map(S::lift), k, *p, &lifted(k.dimension()), tol).map_err(core)?;
                (
                    outcome_of(r.verdict),
                    CheckResult::Criterion(CriterionResult::from_report(&r)),
                )
            }
            CheckSpec::Schur {
                kernels, functional, ..
            } => {
                let (k1, k2, f) = self.schur_pair(kernels, functional)?;
                let r = check_schur_criterion(&f.map(S::lift), k1, k2, &lifted(k1.dimension()), tol).map_err(core)?;
                (
                    outcome_of(r.verdict),
                    CheckResult::Criterion(CriterionResult::from_report(&r)),
                )
            }
            CheckSpec::Tensor { kernel, functional, .. } => {
                let (k, f) = self.tensor_pair(kernel, functional)?;
                let pairs: Vec<(Vec<S>, Vec<S>)> = self
                    .tensor_sample_pairs(k.dimension())
                    .iter()
                    .map(|(y, t)| (lift_point(y), lift_point(t)))
                    .collect();
                let r = check_tensor_criterion(&f.map(S::lift), k.left(), k.right(), &pairs, tol).map_err(core)?;
                (
                    outcome_of(r.verdict),
                    CheckResult::Criterion(CriterionResult::from_report(&r)),
                )
            }
            CheckSpec::DualRoute {
                kernel, functional, p, ..
            } => {
                let (k, f) = self.pair(kernel, functional)?;
                let f = f.map(S::lift);
                let mut rows = Vec::new();
                let mut max = 0.0_f64;
                for w in lifted(k.dimension()) {
                    let series = apply_series_route(&f, k, *p, &w).map_err(core)?;
                    let direct = apply_to_kernel_power(&f, k, *p, &w).map_err(core)?;
                    let diff = (series.clone() - direct.clone()).abs_f64();
                    max = if diff.is_nan() { f64::NAN } else { max.max(diff) };
                    rows.push(DualRouteRow {
                        point: point(&w),
                        series_route: series.encode(),
                        kernel_power: direct.encode(),
                        difference: finite(diff),
                    });
                }
                let r = DualRouteResult {
                    p: *p,
                    degree: effective_degree(&f, k),
                    tolerance: tol,
                    max_difference: finite(max),
                    samples: rows,
                };
                (pass_fail(max <= tol), CheckResult::DualRoute(r))
            }
            CheckSpec::Norm { kernel, functional, .. } => {
                let (k, f) = self.pair(kernel, functional)?;
                let n = effective_degree(f, k);
                let fs = f.map(S::lift);
                let by_degree = (0..=n)
                    .map(|j| functional_norm_sq_at(&fs, k, j).map(|v| v.to_c64().re))
                    .collect::<Result<Vec<f64>, _>>()
                    .map_err(core)?;
                let norm = functional_norm_sq_at(&fs, k, n).map_err(core)?;
                let norm_f = norm.to_c64().re;
                let monotone = by_degree.windows(2).all(|w| w[0] <= w[1]);
                let exceeds = norm_f.is_nan() || norm_f > 1.0 + tol;
                let comparison = point_comparison(f, k, norm_f, tol);
                let outcome = if !monotone || comparison.as_ref().is_some_and(|c| !c.within_tail) {
                    Outcome::Fail
                } else if exceeds {
                    Outcome::NotApplicableHypothesisViolated
                } else {
                    Outcome::Pass
                };
                let r = NormResult {
                    degree: n,
                    tolerance: tol,
                    norm_sq: norm.encode(),
                    norm_sq_by_degree: by_degree.into_iter().map(finite).collect(),
                    monotone,
                    norm_exceeds_one: exceeds,
                    point_evaluation: comparison,
                };
                (outcome, CheckResult::Norm(r))
            }
            CheckSpec::Membership {
                kernel,
                p,
                m,
                point: w,
                threshold,
                ..
            } => {
                let k = self.plain_kernel(kernel)?;
                let w: Vec<Exact> = w
                    .iter()
                    .map(|x| x.parse().map_err(|e| e.to_string()))
                    .collect::<Result<_, _>>()?;
                let w: Vec<S> = lift_point(&w);
                let r = inverse_power_membership_check(k, *p, &w, *m, *threshold).map_err(core)?;
                (
                    pass_fail(!r.diverging),
                    CheckResult::Membership(MembershipResult::from_report(&r, &w)),
                )
            }
            CheckSpec::Identity {
                kernel,
                functional,
                p,
                max_degree,
                ..
            } => {
                let (k, f) = self.pair(kernel, functional)?;
                let s = identity_sweep(f, k, *p, *max_degree).map_err(core)?;
                (
                    pass_fail(s.all_equal),
                    CheckResult::Identity(IdentityResult::from_sweep("power", Some(*p), &s)),
                )
            }
            CheckSpec::IdentitySchur {
                kernels,
                functional,
                max_degree,
                ..
            } => {
                let (k1, k2, f) = self.schur_pair(kernels, functional)?;
                let s = identity_sweep_schur(f, k1, k2, *max_degree).map_err(core)?;
                (
                    pass_fail(s.all_equal),
                    CheckResult::Identity(IdentityResult::from_sweep("schur", None, &s)),
                )
            }
            CheckSpec::IdentityTensor {
                kernel,
                functional,
                max_degree,
                ..
            } => {
                let (k, f) = self.tensor_pair(kernel, functional)?;
                let s = identity_sweep_tensor(f, k.left(), k.right(), *max_degree).map_err(core)?;
                (
                    pass_fail(s.all_equal),
                    CheckResult::Identity(IdentityResult::from_sweep("tensor", None, &s)),
                )
            }
            CheckSpec::BruteForce {
                functional, max_degree, ..
            } => {
                let f = self.plain_functional(functional)?;
                let r = brute_force_multiplicative(f, *max_degree).map_err(core)?;
                (
                    pass_fail(r.pass),
                    CheckResult::BruteForce(BruteForceResult::from_report(&r)),
                )
            }
            CheckSpec::Equivalence {
                kernel,
                functional,
                p,
                max_degree,
                ..
            } => {
                let (k, f) = self.pair(kernel, functional)?;
                let bf = brute_force_multiplicative(f, *max_degree).map_err(core)?;
                let ids = identity_sweep(f, k, *p, *max_degree).map_err(core)?;
                let crit = check_power_criterion(&f.map(S::lift), k, *p, &lifted(k.dimension()), tol).map_err(core)?;
                let r = combine_equivalence(bf, ids, crit);
                (
                    outcome_of(r.verdict),
                    CheckResult::Equivalence(Box::new(EquivalenceResult::from_report(&r, *p))),
                )
            }
        })
    }
}

fn same_dimension(expected: usize, found: usize) -> Result<(), String> {
    if expected != found {
        return Err(format!("dimension mismatch: expected {}, found {}", expected, found));
    }
    Ok(())
}

/// For a point evaluation at `w`, the truncated norm equals the truncated
/// diagonal `k(w, w)`; compares it with the direct kernel sum.
fn point_comparison(f: &Functional<Exact>, k: &Kernel, norm_sq: f64, tol: f64) -> Option<PointComparison> {
    let w = f.coordinate_values()?;
    let evaluation = Functional::point_evaluation(&w, f.degree()).ok()?;
    if evaluation.values() != f.values() {
        return None;
    }
    let truncated = k.truncate(effective_degree(f, k)).ok()?;
    let wc: Vec<Complex64> = w.iter().map(Scalar::to_c64).collect();
    let v = kernel_eval(&truncated, &wc, &wc, 1.0).ok()?;
    let diff = (v.value.re - norm_sq).abs();
    Some(PointComparison {
        point: point(&w),
        kernel_diagonal: finite(v.value.re),
        tail_estimate: finite(v.tail_estimate),
        difference: finite(diff),
        within_tail: diff <= tol + 1e-12 * v.value.norm().max(1.0),
    })
}

fn subjects(spec: &CheckSpec) -> Subjects {
    let (kernels, functional): (Vec<String>, Option<&String>) = match spec {
        CheckSpec::Cnp { kernel, .. } | CheckSpec::Membership { kernel, .. } => (vec![kernel.clone()], None),
        CheckSpec::Power { kernel, functional, .. }
        | CheckSpec::Tensor { kernel, functional, .. }
        | CheckSpec::DualRoute { kernel, functional, .. }
        | CheckSpec::Norm { kernel, functional, .. }
        | CheckSpec::Identity { kernel, functional, .. }
        | CheckSpec::IdentityTensor { kernel, functional, .. }
        | CheckSpec::Equivalence { kernel, functional, .. } => (vec![kernel.clone()], Some(functional)),
        CheckSpec::Schur {
            kernels, functional, ..
        }
        | CheckSpec::IdentitySchur {
            kernels, functional, ..
        } => (kernels.to_vec(), Some(functional)),
        CheckSpec::BruteForce { functional, .. } => (Vec::new(), Some(functional)),
    };
    Subjects {
        kernels,
        functional: functional.cloned(),
    }
}
