//! Lossless text forms for rationals and complex numbers.
//!
//! Decimals parse exactly (`0.3` is `3/10`). Complex values serialize as a
//! pair of strings: `"p/q"` or `"p"` in exact mode, shortest round-trip
//! decimals in float mode.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rkhsmult_core::scalar::exact;
use rkhsmult_core::Exact;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid number {text:?}: {reason}")]
pub struct NumberError {
    pub text: String,
    pub reason: &'static str,
}

fn fail(text: &str, reason: &'static str) -> NumberError {
    NumberError {
        text: text.to_string(),
        reason,
    }
}

/// Parses `p`, `p/q`, or a decimal with optional exponent (`-1.25e-3`).
pub fn parse_rational(text: &str) -> Result<BigRational, NumberError> {
    let s = text.trim();
    let (neg, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    if body.is_empty() {
        return Err(fail(text, "empty"));
    }
    let value = if let Some((num, den)) = body.split_once('/') {
        let num = parse_digits(num).ok_or_else(|| fail(text, "bad numerator"))?;
        let den = parse_digits(den).ok_or_else(|| fail(text, "bad denominator"))?;
        if den.is_zero() {
            return Err(fail(text, "zero denominator"));
        }
        BigRational::new(num, den)
    } else {
        parse_decimal(body).ok_or_else(|| fail(text, "not a rational or decimal"))?
    };
    Ok(if neg { -value } else { value })
}

fn parse_digits(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{}{}", int, frac).parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    Some(if scale >= 0 {
        BigRational::from_integer(digits * pow)
    } else {
        BigRational::new(digits, pow)
    })
}

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i` with rational or decimal parts.
pub fn parse_complex(text: &str) -> Result<Exact, NumberError> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = s.strip_suffix('i') else {
        return Ok(exact(parse_rational(&s)?, BigRational::zero()));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (parse_rational(&body[..k])?, &body[k..]),
        None => (BigRational::zero(), body),
    };
    let im = match im {
        "" | "+" => BigRational::one(),
        "-" => -BigRational::one(),
        t => parse_rational(t)?,
    };
    Ok(exact(re, im))
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Shortest decimal that round-trips; `-0` prints as `0`.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{}", x)
    }
}

/// Human-readable complex literal accepted by [`parse_complex`].
pub fn complex_literal(z: &Exact) -> String {
    match (z.re.is_zero(), z.im.is_zero()) {
        (_, true) => format_rational(&z.re),
        (true, false) => format!("{}i", format_rational(&z.im)),
        (false, false) => {
            let sign = if z.im.is_negative() { "-" } else { "+" };
            format!("{}{}{}i", format_rational(&z.re), sign, format_rational(&z.im.abs()))
        }
    }
}

/// Scalars that can be written to a report.
pub trait Encode {
    fn encode(&self) -> [String; 2];
}

impl Encode for Exact {
    fn encode(&self) -> [String; 2] {
        [format_rational(&self.re), format_rational(&self.im)]
    }
}

impl Encode for Complex64 {
    fn encode(&self) -> [String; 2] {
        [format_f64(self.re), format_f64(self.im)]
    }
}
