//! Job configuration documents.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use rkhsmult_core::Exact;

use crate::numfmt::{parse_complex, NumberError};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_DEGREE: usize = 24;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MEMBERSHIP_THRESHOLD: f64 = 1e-8;
pub const DENSE_COUNT: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[default]
    Exact,
    Float,
}

impl ModeName {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeName::Exact => "exact",
            ModeName::Float => "float",
        }
    }
}

/// A number written either as a JSON number or as a string such as
/// `"3/10"` or `"1/4-1/4i"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberText {
    Text(String),
    Number(serde_json::Number),
}

impl NumberText {
    pub fn parse(&self) -> Result<Exact, NumberError> {
        match self {
            NumberText::Text(s) => parse_complex(s),
            NumberText::Number(n) => parse_complex(&n.to_string()),
        }
    }
}

impl fmt::Display for NumberText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumberText::Text(s) => f.write_str(s),
            NumberText::Number(n) => write!(f, "{}", n),
        }
    }
}

/// Raw outcome of a check before comparison with an expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
    NotApplicableHypothesisViolated,
}

fn default_one() -> u32 {
    1
}

fn default_threshold() -> f64 {
    DEFAULT_MEMBERSHIP_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    /// CNP transform and `b_n` table.
    Cnp {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Outcome>,
        kernel: String,
    },
    Power {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Outcome>,
        kernel: String,
        functional: String,
        p: u32,
    },
    Schur {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Outcome>,
        kernels: [String; 2],
        functional: String,
    },
    /// `kernel` must name a `tensor(…)` expression.
    Tensor {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Outcome>,
        kernel: String,
        functional: String,
    },
    /// Series route `Σ_n binom(n+p-1, p-1) X^n` against the direct
    /// expansion of `Λ(k_w^p)`.
    DualRoute {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Outcome>,
        kernel: String,
        functional: String,
        p: u32,
    },
    Norm {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Outcome>,
        kernel: String,
        functional: String,
    },
    /// Truncated norm of `k_w^{-m}` in `H(k^p)` at `N/2` and `N`.
    Membership {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Outcome>,
        kernel: String,
        p: u32,
        #[serde(default = "default_one")]
        m: u32,
        point: Vec<NumberText>,
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
    Identity {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Outcome>,
        kernel: String,
        functional: String,
        p: u32,
        max_degree: usize,
    },
    IdentitySchur {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Outcome>,
        kernels: [String; 2],
        functional: String,
        max_degree: usize,
    },
    IdentityTensor {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Outcome>,
        kernel: String,
        functional: String,
        max_degree: usize,
    },
    BruteForce {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Outcome>,
        functional: String,
        max_degree: usize,
    },
    Equivalence {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<Outcome>,
        kernel: String,
        functional: String,
        p: u32,
        max_degree: usize,
    },
}

impl CheckSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            CheckSpec::Cnp { .. } => "cnp",
            CheckSpec::Power { .. } => "power",
            CheckSpec::Schur { .. } => "schur",
            CheckSpec::Tensor { .. } => "tensor",
            CheckSpec::DualRoute { .. } => "dual_route",
            CheckSpec::Norm { .. } => "norm",
            CheckSpec::Membership { .. } => "membership",
            CheckSpec::Identity { .. } => "identity",
            CheckSpec::IdentitySchur { .. } => "identity_schur",
            CheckSpec::IdentityTensor { .. } => "identity_tensor",
            CheckSpec::BruteForce { .. } => "brute_force",
            CheckSpec::Equivalence { .. } => "equivalence",
        }
    }

    pub fn id(&self) -> Option<&str> {
        self.common().0.as_deref()
    }

    pub fn expect(&self) -> Option<Outcome> {
        *self.common().1
    }

    fn common(&self) -> (&Option<String>, &Option<Outcome>) {
        match self {
            CheckSpec::Cnp { id, expect, .. }
            | CheckSpec::Power { id, expect, .. }
            | CheckSpec::Schur { id, expect, .. }
            | CheckSpec::Tensor { id, expect, .. }
            | CheckSpec::DualRoute { id, expect, .. }
            | CheckSpec::Norm { id, expect, .. }
            | CheckSpec::Membership { id, expect, .. }
            | CheckSpec::Identity { id, expect, .. }
            | CheckSpec::IdentitySchur { id, expect, .. }
            | CheckSpec::IdentityTensor { id, expect, .. }
            | CheckSpec::BruteForce { id, expect, .. }
            | CheckSpec::Equivalence { id, expect, .. } => (id, expect),
        }
    }

    /// Degree of the product rule or identity sweep requested, if any.
    pub fn max_degree(&self) -> Option<usize> {
        match self {
            CheckSpec::Identity { max_degree, .. }
            | CheckSpec::IdentitySchur { max_degree, .. }
            | CheckSpec::IdentityTensor { max_degree, .. }
            | CheckSpec::BruteForce { max_degree, .. }
            | CheckSpec::Equivalence { max_degree, .. } => Some(*max_degree),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub schema_version: u32,
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub mode: ModeName,
    pub kernels: BTreeMap<String, String>,
    #[serde(default)]
    pub functionals: BTreeMap<String, String>,
    /// Points for single-ball criteria; the built-in grid when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<Vec<NumberText>>>,
    /// `(y, t)` pairs for tensor criteria.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tensor_samples: Option<Vec<[Vec<NumberText>; 2]>>,
    #[serde(default)]
    pub dense: bool,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
}

fn default_degree() -> usize {
    DEFAULT_DEGREE
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
