//! Scalars used for functional values and sample points.
//!
//! Two arithmetic modes exist: exact Gaussian rationals and `f64` complex
//! numbers. Every generic routine runs in either; reports carry the mode.

use core::fmt::Debug;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exact complex number with rational real and imaginary parts.
pub type Exact = Complex<BigRational>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

pub trait Scalar:
    Clone + Debug + PartialEq + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    const MODE: Mode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn conj(&self) -> Self;
    /// `|x|^2`, as a scalar with zero imaginary part.
    fn norm_sqr(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn to_c64(&self) -> Complex64;
    /// Compares the real part against one. Exact in exact mode.
    fn real_lt_one(&self) -> bool;
    /// Multiplicative inverse; `None` for zero.
    fn recip(&self) -> Option<Self>;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }

    fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }

    fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Scalar for Exact {
    const MODE: Mode = Mode::Exact;

    fn zero() -> Self {
        Complex::new(BigRational::zero(), BigRational::zero())
    }

    fn one() -> Self {
        Complex::new(BigRational::one(), BigRational::zero())
    }

    fn from_rational(r: &BigRational) -> Self {
        Complex::new(r.clone(), BigRational::zero())
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn norm_sqr(&self) -> Self {
        Complex::new(Complex::norm_sqr(self), BigRational::zero())
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn real_lt_one(&self) -> bool {
        self.re < BigRational::one()
    }

    fn recip(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            None
        } else {
            Some(self.inv())
        }
    }
}

impl Scalar for Complex64 {
    const MODE: Mode = Mode::Float;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn norm_sqr(&self) -> Self {
        Complex64::new(Complex::norm_sqr(self), 0.0)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn real_lt_one(&self) -> bool {
        self.re < 1.0
    }

    fn recip(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            None
        } else {
            Some(self.inv())
        }
    }
}

/// Squared Euclidean norm of a point.
pub fn point_norm_sqr<S: Scalar>(point: &[S]) -> S {
    point.iter().fold(S::zero(), |acc, x| acc + x.norm_sqr())
}

/// Membership in the open unit ball, decided exactly in exact mode.
pub fn in_open_ball<S: Scalar>(point: &[S]) -> bool {
    point_norm_sqr(point).real_lt_one()
}

pub fn exact(re: BigRational, im: BigRational) -> Exact {
    Complex::new(re, im)
}

/// `num/den` as an exact real scalar. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Exact {
    Complex::new(
        BigRational::new(BigInt::from(num), BigInt::from(den)),
        BigRational::zero(),
    )
}
