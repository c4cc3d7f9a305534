//! Pluggable scalar arithmetic over a coefficient field.
//!
//! Three coefficient fields are supported: prime fields `Z_p` with a
//! machine-word prime modulus, exact rationals backed by arbitrary-precision
//! integers, and double-precision reals with a tolerance policy. A
//! [`FieldSpec`] names the field and carries the tolerance; every matrix and
//! persistence module holds one and all arithmetic is dispatched through it.
//!
//! Rank decisions downstream depend on a single, consistent notion of
//! "zero". Over the reals this is the hybrid test `|x| <= tol * max(1,
//! scale)` with a caller-supplied scale (default 1); exact fields compare
//! exactly.

use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;
use crate::Result;

/// Default tolerance for the real field. Double precision leaves roughly
/// six digits of headroom over this on matrices up to a few thousand rows.
pub const DEFAULT_REAL_TOL: f64 = 1e-9;

/// Which field the scalars live in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldKind {
    /// Integers modulo a prime `p`.
    Prime(u64),
    /// Exact rationals (arbitrary precision).
    Rational,
    /// `f64` with a tolerance-based zero test.
    Real,
}

/// A coefficient field together with its tolerance policy.
///
/// `tol` is only consulted for [`FieldKind::Real`]; it is stored but ignored
/// for the exact fields. Two specs are interchangeable only if they compare
/// equal, including the tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSpec {
    kind: FieldKind,
    tol: f64,
}

impl FieldSpec {
    /// The prime field `Z_p`. Fails with [`Error::NotPrime`] if `p` is not prime.
    pub fn prime(p: u64) -> Result<Self> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(FieldSpec {
            kind: FieldKind::Prime(p),
            tol: 0.0,
        })
    }

    /// The field of exact rationals.
    pub fn rational() -> Self {
        FieldSpec {
            kind: FieldKind::Rational,
            tol: 0.0,
        }
    }

    /// The real field with an explicit tolerance (must be positive).
    pub fn real(tol: f64) -> Result<Self> {
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(Error::InvalidTolerance(tol));
        }
        Ok(FieldSpec {
            kind: FieldKind::Real,
            tol,
        })
    }

    /// The real field with the default tolerance of `1e-9`.
    pub fn real_default() -> Self {
        FieldSpec {
            kind: FieldKind::Real,
            tol: DEFAULT_REAL_TOL,
        }
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn is_real(&self) -> bool {
        matches!(self.kind, FieldKind::Real)
    }

    pub fn is_exact(&self) -> bool {
        !self.is_real()
    }

    /// Tolerance used by the real zero test. Zero for exact fields.
    pub fn tol(&self) -> f64 {
        match self.kind {
            FieldKind::Real => self.tol,
            _ => 0.0,
        }
    }

    /// Parse the textual form used by JSON files and the `--field` flag:
    /// `"zp:<p>"`, `"rational"` or `"real"`. The tolerance for `"real"` is
    /// supplied separately.
    pub fn parse(s: &str, tol: f64) -> Result<Self> {
        if let Some(p) = s.strip_prefix("zp:") {
            let p: u64 = p
                .parse()
                .map_err(|_| Error::Parse(format!("invalid prime modulus {p:?}")))?;
            FieldSpec::prime(p)
        } else {
            match s {
                "rational" => Ok(FieldSpec::rational()),
                "real" => FieldSpec::real(tol),
                other => Err(Error::Parse(format!("unknown field {other:?}"))),
            }
        }
    }

    pub fn zero(&self) -> FieldScalar {
        match self.kind {
            FieldKind::Prime(p) => FieldScalar::Prime { value: 0, modulus: p },
            FieldKind::Rational => FieldScalar::Rational(BigRational::zero()),
            FieldKind::Real => FieldScalar::Real(0.0),
        }
    }

    pub fn one(&self) -> FieldScalar {
        match self.kind {
            FieldKind::Prime(p) => FieldScalar::Prime { value: 1 % p, modulus: p },
            FieldKind::Rational => FieldScalar::Rational(BigRational::one()),
            FieldKind::Real => FieldScalar::Real(1.0),
        }
    }

    /// Canonical image of an integer in this field.
    pub fn from_i64(&self, n: i64) -> FieldScalar {
        match self.kind {
            FieldKind::Prime(p) => {
                let r = n.rem_euclid(p as i64) as u64;
                FieldScalar::Prime { value: r, modulus: p }
            }
            FieldKind::Rational => FieldScalar::Rational(BigRational::from_integer(BigInt::from(n))),
            FieldKind::Real => FieldScalar::Real(n as f64),
        }
    }

    /// True if `a` is a value of this field (matching kind and, for `Z_p`,
    /// matching modulus).
    pub fn contains(&self, a: &FieldScalar) -> bool {
        match (self.kind, a) {
            (FieldKind::Prime(p), FieldScalar::Prime { value, modulus }) => *modulus == p && *value < p,
            (FieldKind::Rational, FieldScalar::Rational(_)) => true,
            (FieldKind::Real, FieldScalar::Real(x)) => x.is_finite(),
            _ => false,
        }
    }

    fn check(&self, a: &FieldScalar) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(Error::MixedFields)
        }
    }

    pub fn add(&self, a: &FieldScalar, b: &FieldScalar) -> Result<FieldScalar> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (a, b) {
            (FieldScalar::Prime { value: x, modulus: p }, FieldScalar::Prime { value: y, .. }) => {
                FieldScalar::Prime {
                    value: addmod(*x, *y, *p),
                    modulus: *p,
                }
            }
            (FieldScalar::Rational(x), FieldScalar::Rational(y)) => FieldScalar::Rational(x + y),
            (FieldScalar::Real(x), FieldScalar::Real(y)) => FieldScalar::Real(x + y),
            _ => unreachable!("checked above"),
        })
    }

    pub fn sub(&self, a: &FieldScalar, b: &FieldScalar) -> Result<FieldScalar> {
        let nb = self.neg(b)?;
        self.add(a, &nb)
    }

    pub fn mul(&self, a: &FieldScalar, b: &FieldScalar) -> Result<FieldScalar> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (a, b) {
            (FieldScalar::Prime { value: x, modulus: p }, FieldScalar::Prime { value: y, .. }) => {
                FieldScalar::Prime {
                    value: mulmod(*x, *y, *p),
                    modulus: *p,
                }
            }
            (FieldScalar::Rational(x), FieldScalar::Rational(y)) => FieldScalar::Rational(x * y),
            (FieldScalar::Real(x), FieldScalar::Real(y)) => FieldScalar::Real(x * y),
            _ => unreachable!("checked above"),
        })
    }

    pub fn neg(&self, a: &FieldScalar) -> Result<FieldScalar> {
        self.check(a)?;
        Ok(match a {
            FieldScalar::Prime { value, modulus } => FieldScalar::Prime {
                value: if *value == 0 { 0 } else { modulus - value },
                modulus: *modulus,
            },
            FieldScalar::Rational(x) => FieldScalar::Rational(-x),
            FieldScalar::Real(x) => FieldScalar::Real(-x),
        })
    }

    /// Multiplicative inverse. Fails with [`Error::DivisionByZero`] when
    /// `is_zero(a)` holds (over the reals: below tolerance).
    pub fn inv(&self, a: &FieldScalar) -> Result<FieldScalar> {
        self.check(a)?;
        if self.is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        Ok(match a {
            FieldScalar::Prime { value, modulus } => FieldScalar::Prime {
                value: invmod(*value, *modulus),
                modulus: *modulus,
            },
            FieldScalar::Rational(x) => FieldScalar::Rational(x.recip()),
            FieldScalar::Real(x) => FieldScalar::Real(1.0 / x),
        })
    }

    pub fn div(&self, a: &FieldScalar, b: &FieldScalar) -> Result<FieldScalar> {
        let ib = self.inv(b)?;
        self.mul(a, &ib)
    }

    /// Zero test with scale 1; see [`FieldSpec::is_zero_scaled`].
    pub fn is_zero(&self, a: &FieldScalar) -> bool {
        self.is_zero_scaled(a, 1.0)
    }

    /// Hybrid zero test. Exact fields compare exactly; over the reals the
    /// test is `|x| <= tol * max(1, scale)` so that callers working with
    /// large matrices can pass the ambient magnitude as `scale`.
    pub fn is_zero_scaled(&self, a: &FieldScalar, scale: f64) -> bool {
        match a {
            FieldScalar::Prime { value, .. } => *value == 0,
            FieldScalar::Rational(x) => x.is_zero(),
            FieldScalar::Real(x) => x.abs() <= self.tol * scale.max(1.0),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FieldKind::Prime(p) => write!(f, "zp:{p}"),
            FieldKind::Rational => write!(f, "rational"),
            FieldKind::Real => write!(f, "real"),
        }
    }
}

/// An element of one of the supported fields.
///
/// Prime-field values are canonical representatives in `[0, p)` and carry
/// their modulus; rationals are kept in lowest terms with positive
/// denominator (an invariant of [`BigRational`] itself).
#[derive(Debug, Clone, PartialEq)]
pub enum FieldScalar {
    Prime { value: u64, modulus: u64 },
    Rational(BigRational),
    Real(f64),
}

impl FieldScalar {
    /// Best-effort conversion to `f64` (exact for reals and small integers).
    pub fn to_f64(&self) -> f64 {
        match self {
            FieldScalar::Prime { value, .. } => *value as f64,
            FieldScalar::Rational(x) => x.to_f64().unwrap_or(f64::NAN),
            FieldScalar::Real(x) => *x,
        }
    }

    /// Magnitude used for scale estimates; prime-field values report 1 for
    /// nonzero entries so that scales stay meaningful across fields.
    pub fn magnitude(&self) -> f64 {
        match self {
            FieldScalar::Prime { value, .. } => {
                if *value == 0 {
                    0.0
                } else {
                    1.0
                }
            }
            FieldScalar::Rational(x) => x.to_f64().map(f64::abs).unwrap_or(f64::INFINITY),
            FieldScalar::Real(x) => x.abs(),
        }
    }
}

impl fmt::Display for FieldScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldScalar::Prime { value, .. } => write!(f, "{value}"),
            FieldScalar::Rational(x) => write!(f, "{x}"),
            FieldScalar::Real(x) => write!(f, "{x}"),
        }
    }
}

fn addmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + b as u128) % p as u128) as u64
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, p);
        }
        base = mulmod(base, base, p);
        exp >>= 1;
    }
    acc
}

// Fermat inversion; p is prime and a nonzero mod p.
fn invmod(a: u64, p: u64) -> u64 {
    powmod(a, p - 2, p)
}

/// Deterministic Miller-Rabin over the full `u64` range.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    // These witnesses decide primality for every n < 2^64.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
