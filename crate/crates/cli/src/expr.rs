//! Kernel and functional expressions.
//!
//! ```text
//! kernel     := "szego" | "drury_arveson" "(" int ")" | "dirichlet" [ "(" int ")" ]
//!             | "coeffs" "(" "[" rational {"," rational} "]" [ "," int ] ")"
//!             | "power" "(" kernel "," int ")" | "schur" "(" kernel "," kernel ")"
//!             | "tensor" "(" kernel "," kernel ")"
//! functional := "point" "(" vector ")" | "counterexample" | "table" "(" path ")"
//!             | "tensor_point" "(" vector "," vector ")"
//!             | "boundary_limit_ones" [ "(" int ")" ]
//!             | "tensor_product" "(" functional "," functional ")"
//!             | "with_value" "(" functional "," "[" int {"," int} "]" "," complex ")"
//! vector     := "[" complex {"," complex} "]"
//! complex    := ["-"] term [("+" | "-") term]      term := rational ["i"] | "i"
//! rational   := digits ["/" digits] | decimal
//! ```
//!
//! Positions in [`ParseError`] are zero-based byte offsets into the input.

use std::fmt;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use num_traits::Zero;
use rkhsmult_core::scalar::exact;
use rkhsmult_core::{Exact, Functional, Kernel, MultiIndex, RationalSeries, TensorFunctional, TensorKernel};

use crate::numfmt::{complex_literal, format_rational, parse_rational};
use crate::table;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at offset {}: {}", self.position, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelExpr {
    Szego,
    DruryArveson(usize),
    Dirichlet(usize),
    Coeffs(Vec<BigRational>, usize),
    Power(Box<KernelExpr>, u32),
    Schur(Box<KernelExpr>, Box<KernelExpr>),
    Tensor(Box<KernelExpr>, Box<KernelExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionalExpr {
    Point(Vec<Exact>),
    Counterexample,
    Table(String),
    TensorPoint(Vec<Exact>, Vec<Exact>),
    BoundaryLimitOnes(usize),
    TensorProduct(Box<FunctionalExpr>, Box<FunctionalExpr>),
    WithValue(Box<FunctionalExpr>, Vec<u32>, Exact),
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for KernelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelExpr::Szego => write!(f, "szego"),
            KernelExpr::DruryArveson(d) => write!(f, "drury_arveson({})", d),
            KernelExpr::Dirichlet(1) => write!(f, "dirichlet"),
            KernelExpr::Dirichlet(d) => write!(f, "dirichlet({})", d),
            KernelExpr::Coeffs(c, 1) => write!(f, "coeffs([{}])", join(c, format_rational)),
            KernelExpr::Coeffs(c, d) => write!(f, "coeffs([{}], {})", join(c, format_rational), d),
            KernelExpr::Power(k, p) => write!(f, "power({}, {})", k, p),
            KernelExpr::Schur(a, b) => write!(f, "schur({}, {})", a, b),
            KernelExpr::Tensor(a, b) => write!(f, "tensor({}, {})", a, b),
        }
    }
}

impl fmt::Display for FunctionalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionalExpr::Point(v) => write!(f, "point([{}])", join(v, complex_literal)),
            FunctionalExpr::Counterexample => write!(f, "counterexample"),
            FunctionalExpr::Table(p) => write!(f, "table({})", p),
            FunctionalExpr::TensorPoint(y, t) => {
                write!(
                    f,
                    "tensor_point([{}], [{}])",
                    join(y, complex_literal),
                    join(t, complex_literal)
                )
            }
            FunctionalExpr::BoundaryLimitOnes(1) => write!(f, "boundary_limit_ones"),
            FunctionalExpr::BoundaryLimitOnes(d) => write!(f, "boundary_limit_ones({})", d),
            FunctionalExpr::TensorProduct(a, b) => write!(f, "tensor_product({}, {})", a, b),
            FunctionalExpr::WithValue(g, e, v) => write!(
                f,
                "with_value({}, [{}], {})",
                g,
                join(e, |x| x.to_string()),
                complex_literal(v)
            ),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn err<T>(&self, position: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            position,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            let found = self.peek().map_or("end of input".to_string(), |x| format!("{:?}", x));
            self.err(self.pos, format!("expected {:?}, found {}", c, found))
        }
    }

    fn ident(&mut self) -> Result<(usize, &'a str), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let len = self.src[start..]
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(self.src.len() - start);
        if len == 0 || !self.src[start..].starts_with(|c: char| c.is_ascii_alphabetic()) {
            return self.err(start, "expected a name");
        }
        self.pos += len;
        Ok((start, &self.src[start..start + len]))
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(c) => self.err(self.pos, format!("unexpected trailing {:?}", c)),
        }
    }

    fn integer(&mut self) -> Result<u64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let len = self.src[start..]
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(self.src.len() - start);
        if len == 0 {
            return self.err(start, "expected a non-negative integer");
        }
        self.pos += len;
        self.src[start..start + len]
            .parse()
            .or_else(|_| self.err(start, "integer too large"))
    }

    /// Unsigned rational or decimal text, without sign.
    fn unsigned_number(&mut self) -> Result<(usize, &'a str), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() {
            let b = bytes[end];
            let exp_sign = matches!(b, b'+' | b'-') && end > start && matches!(bytes[end - 1], b'e' | b'E');
            if b.is_ascii_digit() || b == b'.' || b == b'/' || b == b'e' || b == b'E' || exp_sign {
                end += 1;
            } else {
                break;
            }
        }
        if end == start {
            return self.err(start, "expected a number");
        }
        self.pos = end;
        Ok((start, &self.src[start..end]))
    }

    fn rational(&mut self) -> Result<BigRational, ParseError> {
        let neg = self.eat('-');
        let (start, text) = self.unsigned_number()?;
        let r = parse_rational(text).or_else(|e| self.err(start, e.reason))?;
        Ok(if neg { -r } else { r })
    }

    /// One signed real or imaginary term; returns `(value, is_imaginary)`.
    fn term(&mut self, neg: bool) -> Result<(BigRational, bool), ParseError> {
        let value = if self.peek() == Some('i') {
            self.pos += 1;
            return Ok((
                if neg {
                    -BigRational::from_integer(1.into())
                } else {
                    BigRational::from_integer(1.into())
                },
                true,
            ));
        } else {
            let (start, text) = self.unsigned_number()?;
            parse_rational(text).or_else(|e| self.err(start, e.reason))?
        };
        let value = if neg { -value } else { value };
        let imaginary = self.src[self.pos..].starts_with('i');
        if imaginary {
            self.pos += 1;
        }
        Ok((value, imaginary))
    }

    fn complex(&mut self) -> Result<Exact, ParseError> {
        let start = self.pos;
        let neg = self.eat('-');
        let (a, a_im) = self.term(neg)?;
        let (mut re, mut im) = (BigRational::zero(), BigRational::zero());
        if a_im {
            im = a
        } else {
            re = a
        }
        let sign = match self.peek() {
            Some('+') => Some(false),
            Some('-') => Some(true),
            _ => None,
        };
        if let Some(neg) = sign {
            self.pos += 1;
            let (b, b_im) = self.term(neg)?;
            if b_im == a_im {
                return self.err(start, "a complex literal needs one real and one imaginary part");
            }
            if b_im {
                im = b
            } else {
                re = b
            }
        }
        Ok(exact(re, im))
    }

    fn vector(&mut self) -> Result<Vec<Exact>, ParseError> {
        self.list(Self::complex)
    }

    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T, ParseError>) -> Result<Vec<T>, ParseError> {
        self.expect('[')?;
        let mut out = Vec::new();
        if self.eat(']') {
            return self.err(self.pos - 1, "empty list");
        }
        loop {
            out.push(item(self)?);
            if self.eat(']') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn small_int(&mut self, what: &str) -> Result<usize, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let n = self.integer()?;
        if n == 0 || n > 64 {
            return self.err(start, format!("{} must be between 1 and 64", what));
        }
        Ok(n as usize)
    }

    fn optional_dimension(&mut self) -> Result<usize, ParseError> {
        if self.eat('(') {
            let d = self.small_int("dimension")?;
            self.expect(')')?;
            Ok(d)
        } else {
            Ok(1)
        }
    }

    fn kernel(&mut self) -> Result<KernelExpr, ParseError> {
        let (start, name) = self.ident()?;
        Ok(match name {
            "szego" => KernelExpr::Szego,
            "drury_arveson" => {
                self.expect('(')?;
                let d = self.small_int("dimension")?;
                self.expect(')')?;
                KernelExpr::DruryArveson(d)
            }
            "dirichlet" => KernelExpr::Dirichlet(self.optional_dimension()?),
            "coeffs" => {
                self.expect('(')?;
                let c = self.list(Self::rational)?;
                let d = if self.eat(',') { self.small_int("dimension")? } else { 1 };
                self.expect(')')?;
                KernelExpr::Coeffs(c, d)
            }
            "power" => {
                self.expect('(')?;
                let k = self.kernel()?;
                self.expect(',')?;
                self.skip_ws();
                let at = self.pos;
                let p = self.integer()?;
                if p == 0 || p > 64 {
                    return self.err(at, "exponent must be between 1 and 64");
                }
                self.expect(')')?;
                KernelExpr::Power(Box::new(k), p as u32)
            }
            "schur" | "tensor" => {
                self.expect('(')?;
                let a = self.kernel()?;
                self.expect(',')?;
                let b = self.kernel()?;
                self.expect(')')?;
                if name == "schur" {
                    KernelExpr::Schur(Box::new(a), Box::new(b))
                } else {
                    KernelExpr::Tensor(Box::new(a), Box::new(b))
                }
            }
            other => return self.err(start, format!("unknown kernel {:?}", other)),
        })
    }

    fn path(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.eat('"') {
            let body = &self.src[self.pos..];
            let Some(end) = body.find('"') else {
                return self.err(start, "unterminated string");
            };
            self.pos += end + 1;
            return Ok(body[..end].to_string());
        }
        let body = &self.src[start..];
        let end = body.find(')').unwrap_or(body.len());
        let path = body[..end].trim_end();
        if path.is_empty() {
            return self.err(start, "expected a path");
        }
        self.pos = start + path.len();
        Ok(path.to_string())
    }

    fn functional(&mut self) -> Result<FunctionalExpr, ParseError> {
        let (start, name) = self.ident()?;
        Ok(match name {
            "point" => {
                self.expect('(')?;
                let v = self.vector()?;
                self.expect(')')?;
                FunctionalExpr::Point(v)
            }
            "counterexample" => FunctionalExpr::Counterexample,
            "table" => {
                self.expect('(')?;
                let p = self.path()?;
                self.expect(')')?;
                FunctionalExpr::Table(p)
            }
            "tensor_point" => {
                self.expect('(')?;
                let y = self.vector()?;
                self.expect(',')?;
                let t = self.vector()?;
                self.expect(')')?;
                FunctionalExpr::TensorPoint(y, t)
            }
            "boundary_limit_ones" => FunctionalExpr::BoundaryLimitOnes(self.optional_dimension()?),
            "tensor_product" => {
                self.expect('(')?;
                let a = self.functional()?;
                self.expect(',')?;
                let b = self.functional()?;
                self.expect(')')?;
                FunctionalExpr::TensorProduct(Box::new(a), Box::new(b))
            }
            "with_value" => {
                self.expect('(')?;
                let g = self.functional()?;
                self.expect(',')?;
                let e = self.list(|p| {
                    p.skip_ws();
                    let at = p.pos;
                    let n = p.integer()?;
                    u32::try_from(n).or_else(|_| p.err(at, "exponent too large"))
                })?;
                self.expect(',')?;
                let v = self.complex()?;
                self.expect(')')?;
                FunctionalExpr::WithValue(Box::new(g), e, v)
            }
            other => return self.err(start, format!("unknown functional {:?}", other)),
        })
    }
}

pub fn parse_kernel_expr(text: &str) -> Result<KernelExpr, ParseError> {
    let mut p = Parser::new(text);
    let k = p.kernel()?;
    p.finish()?;
    Ok(k)
}

pub fn parse_functional_expr(text: &str) -> Result<FunctionalExpr, ParseError> {
    let mut p = Parser::new(text);
    let f = p.functional()?;
    p.finish()?;
    Ok(f)
}

#[derive(Debug, Clone, PartialEq)]
pub enum BuiltKernel {
    Plain(Kernel),
    Tensor(TensorKernel),
}

impl BuiltKernel {
    pub fn dimension(&self) -> usize {
        match self {
            BuiltKernel::Plain(k) => k.dimension(),
            BuiltKernel::Tensor(k) => k.dimension(),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            BuiltKernel::Plain(k) => k.degree(),
            BuiltKernel::Tensor(k) => k.degree(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BuiltFunctional {
    Plain(Functional<Exact>),
    Tensor(TensorFunctional<Exact>),
}

impl BuiltFunctional {
    /// Number of variables of a plain functional, half of them for a tensor one.
    pub fn dimension(&self) -> usize {
        match self {
            BuiltFunctional::Plain(f) => f.dimension(),
            BuiltFunctional::Tensor(f) => f.half_dimension(),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            BuiltFunctional::Plain(f) => f.degree(),
            BuiltFunctional::Tensor(f) => f.degree(),
        }
    }
}

/// Expression evaluation failure after a successful parse.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("{expr}: {source}")]
    Kernel { expr: String, source: rkhsmult_core::Error },
    #[error("{expr}: {source}")]
    Functional { expr: String, source: rkhsmult_core::Error },
    #[error("{expr}: {message}")]
    Shape { expr: String, message: String },
    #[error("{0}")]
    Table(#[from] table::TableError),
}

impl KernelExpr {
    /// Builds the kernel truncated at `degree`, or at `len - 1` for a shorter
    /// explicit coefficient list.
    pub fn build(&self, degree: usize) -> Result<BuiltKernel, BuildError> {
        let expr = self.to_string();
        let wrap = |source| BuildError::Kernel {
            expr: expr.clone(),
            source,
        };
        let plain = |k: BuiltKernel| match k {
            BuiltKernel::Plain(k) => Ok(k),
            BuiltKernel::Tensor(_) => Err(BuildError::Shape {
                expr: expr.clone(),
                message: "tensor kernels cannot be nested".to_string(),
            }),
        };
        let k = match self {
            KernelExpr::Szego => Kernel::szego(degree),
            KernelExpr::DruryArveson(d) => Kernel::drury_arveson(*d, degree).map_err(wrap)?,
            KernelExpr::Dirichlet(d) => Kernel::dirichlet(*d, degree).map_err(wrap)?,
            KernelExpr::Coeffs(c, d) => {
                let len = c.len().min(degree + 1);
                let series = RationalSeries::new(c[..len].to_vec()).map_err(wrap)?;
                Kernel::new(*d, series, "coeffs").map_err(wrap)?
            }
            KernelExpr::Power(k, p) => plain(k.build(degree)?)?.power(*p).map_err(wrap)?,
            KernelExpr::Schur(a, b) => {
                let a = plain(a.build(degree)?)?;
                let b = plain(b.build(degree)?)?;
                a.schur(&b).map_err(wrap)?
            }
            KernelExpr::Tensor(a, b) => {
                let a = plain(a.build(degree)?)?;
                let b = plain(b.build(degree)?)?;
                return Ok(BuiltKernel::Tensor(TensorKernel::new(a, b).map_err(wrap)?));
            }
        };
        Ok(BuiltKernel::Plain(k.with_label(expr)))
    }
}

impl FunctionalExpr {
    /// Builds exact values up to `degree`; table paths resolve against `base`.
    pub fn build(&self, degree: usize, base: &Path) -> Result<BuiltFunctional, BuildError> {
        let expr = self.to_string();
        let wrap = |source| BuildError::Functional {
            expr: expr.clone(),
            source,
        };
        let shape = |message: &str| BuildError::Shape {
            expr: expr.clone(),
            message: message.to_string(),
        };
        let built = match self {
            FunctionalExpr::Point(v) => BuiltFunctional::Plain(Functional::point_evaluation(v, degree).map_err(wrap)?),
            FunctionalExpr::Counterexample => BuiltFunctional::Plain(Functional::counterexample(degree)),
            FunctionalExpr::Table(path) => {
                let full: PathBuf = base.join(path);
                table::load(&full, degree)?
            }
            FunctionalExpr::TensorPoint(y, t) => {
                BuiltFunctional::Tensor(TensorFunctional::tensor_point(y, t, degree).map_err(wrap)?)
            }
            FunctionalExpr::BoundaryLimitOnes(d) => BuiltFunctional::Plain(Functional::boundary_limit_ones(*d, degree)),
            FunctionalExpr::TensorProduct(a, b) => match (a.build(degree, base)?, b.build(degree, base)?) {
                (BuiltFunctional::Plain(a), BuiltFunctional::Plain(b)) => {
                    BuiltFunctional::Tensor(TensorFunctional::product(&a, &b, degree).map_err(wrap)?)
                }
                _ => return Err(shape("tensor_product needs two plain functionals")),
            },
            FunctionalExpr::WithValue(g, e, v) => {
                let alpha = MultiIndex::new(e.clone());
                match g.build(degree, base)? {
                    BuiltFunctional::Plain(f) => {
                        check_index(&f, &alpha).map_err(|m| shape(&m))?;
                        BuiltFunctional::Plain(f.with_value(&alpha, v.clone()).map_err(wrap)?)
                    }
                    BuiltFunctional::Tensor(t) => {
                        check_index(t.joint(), &alpha).map_err(|m| shape(&m))?;
                        let joint = t.joint().clone().with_value(&alpha, v.clone()).map_err(wrap)?;
                        BuiltFunctional::Tensor(TensorFunctional::new(t.half_dimension(), joint).map_err(wrap)?)
                    }
                }
            }
        };
        Ok(match built {
            BuiltFunctional::Plain(f) => BuiltFunctional::Plain(f.with_label(expr)),
            BuiltFunctional::Tensor(f) => BuiltFunctional::Tensor(f.with_label(expr)),
        })
    }
}

fn check_index(f: &Functional<Exact>, alpha: &MultiIndex) -> Result<(), String> {
    if alpha.dim() != f.dimension() {
        return Err(format!(
            "index {} has {} entries, the functional has {} variables",
            alpha,
            alpha.dim(),
            f.dimension()
        ));
    }
    if alpha.degree() > f.degree() {
        return Err(format!("index {} is above the truncation degree {}", alpha, f.degree()));
    }
    Ok(())
}
