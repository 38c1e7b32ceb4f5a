//! Exact scalar arithmetic over the rationals or a prime field.
//!
//! Every quantity in the engine is a [`Scalar`]: a reduced fraction over `Q`
//! or a residue in `[0, p)` over `F_p`. There is no floating point anywhere.
//! The field is a runtime tag ([`Field`]); mixing scalars from different
//! fields is a programming error and panics.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// The coefficient field of a computation.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Field {
    /// The rational numbers.
    Q,
    /// The prime field with `p` elements, `p < 2^31`.
    Fp(u64),
}

impl Field {
    /// Construct `F_p`, validating that `p` is prime and small enough that
    /// products of residues fit in a `u64` without overflow.
    pub fn fp(p: u64) -> Result<Field, ArithmeticError> {
        if p >= 1 << 31 {
            return Err(ArithmeticError::PrimeTooLarge(p));
        }
        if !is_prime(p) {
            return Err(ArithmeticError::NotPrime(p));
        }
        Ok(Field::Fp(p))
    }

    /// The characteristic: 0 for `Q`, `p` for `F_p`.
    pub fn characteristic(&self) -> u64 {
        match self {
            Field::Q => 0,
            Field::Fp(p) => *p,
        }
    }

    /// Zero in this field.
    pub fn zero(&self) -> Scalar {
        match self {
            Field::Q => Scalar::Q(BigRational::zero()),
            Field::Fp(p) => Scalar::Fp { p: *p, v: 0 },
        }
    }

    /// One in this field.
    pub fn one(&self) -> Scalar {
        match self {
            Field::Q => Scalar::Q(BigRational::one()),
            Field::Fp(p) => Scalar::Fp { p: *p, v: 1 % p },
        }
    }

    /// The image of the integer `n` in this field.
    pub fn from_int(&self, n: i64) -> Scalar {
        match self {
            Field::Q => Scalar::Q(BigRational::from_integer(BigInt::from(n))),
            Field::Fp(p) => {
                let r = n.rem_euclid(*p as i64) as u64;
                Scalar::Fp { p: *p, v: r }
            }
        }
    }

    /// `(-1)^parity` in this field — the workhorse for Koszul signs.
    pub fn sign(&self, parity: i64) -> Scalar {
        if parity.rem_euclid(2) == 0 {
            self.one()
        } else {
            self.from_int(-1)
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Q => write!(f, "Q"),
            Field::Fp(p) => write!(f, "F{p}"),
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// An exact field element, tagged with its field.
///
/// `Q` values are reduced fractions with positive denominator (maintained by
/// `BigRational`); `F_p` values are residues in `[0, p)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Scalar {
    Q(BigRational),
    Fp { p: u64, v: u64 },
}

/// Errors from scalar construction and parsing.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ArithmeticError {
    NotPrime(u64),
    PrimeTooLarge(u64),
    DivisionByZero,
    /// A scalar literal that could not be parsed in the given field.
    BadLiteral(String),
}

impl fmt::Display for ArithmeticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithmeticError::NotPrime(p) => write!(f, "{p} is not prime"),
            ArithmeticError::PrimeTooLarge(p) => {
                write!(
                    f,
                    "prime {p} exceeds the 2^31 bound for overflow-free residues"
                )
            }
            ArithmeticError::DivisionByZero => write!(f, "division by zero"),
            ArithmeticError::BadLiteral(s) => write!(f, "cannot parse scalar literal {s:?}"),
        }
    }
}

impl std::error::Error for ArithmeticError {}

impl Scalar {
    /// The field this scalar belongs to.
    pub fn field(&self) -> Field {
        match self {
            Scalar::Q(_) => Field::Q,
            Scalar::Fp { p, .. } => Field::Fp(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Q(q) => q.is_zero(),
            Scalar::Fp { v, .. } => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Q(q) => q.is_one(),
            Scalar::Fp { p, v } => *v == 1 % p,
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Scalar> {
        match self {
            Scalar::Q(q) => {
                if q.is_zero() {
                    None
                } else {
                    Some(Scalar::Q(q.recip()))
                }
            }
            Scalar::Fp { p, v } => {
                if *v == 0 {
                    None
                } else {
                    Some(Scalar::Fp {
                        p: *p,
                        v: mod_inverse(*v, *p),
                    })
                }
            }
        }
    }

    /// Parse a literal: `"n"` or `"n/d"` over `Q`; an integer (reduced mod p)
    /// over `F_p`.
    pub fn parse(s: &str, field: Field) -> Result<Scalar, ArithmeticError> {
        let bad = || ArithmeticError::BadLiteral(s.to_string());
        match field {
            Field::Q => {
                if let Some((n, d)) = s.split_once('/') {
                    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                    if d.is_zero() {
                        return Err(ArithmeticError::DivisionByZero);
                    }
                    Ok(Scalar::Q(BigRational::new(n, d)))
                } else {
                    let n: BigInt = s.trim().parse().map_err(|_| bad())?;
                    Ok(Scalar::Q(BigRational::from_integer(n)))
                }
            }
            Field::Fp(_) => {
                let n: i64 = s.trim().parse().map_err(|_| bad())?;
                Ok(field.from_int(n))
            }
        }
    }

    fn assert_same_field(&self, other: &Scalar) {
        assert_eq!(
            self.field(),
            other.field(),
            "mixed-field scalar arithmetic: {} vs {}",
            self.field(),
            other.field()
        );
    }

    /// Numerator/denominator magnitude, used to prefer small pivots over `Q`.
    pub fn complexity(&self) -> u64 {
        match self {
            Scalar::Q(q) => {
                let bits = q.numer().bits() + q.denom().bits();
                bits.min(u64::MAX)
            }
            Scalar::Fp { .. } => 1,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Q(q) => {
                if q.denom().is_one() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
            Scalar::Fp { v, .. } => write!(f, "{v}"),
        }
    }
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // Extended Euclid; p prime and a != 0 mod p.
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, a as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert_eq!(r, 1, "{a} is not invertible mod {p}");
    t.rem_euclid(p as i128) as u64
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $q_op:tt, $fp:expr) => {
        impl std::ops::$trait for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.assert_same_field(rhs);
                match (self, rhs) {
                    (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a $q_op b),
                    (Scalar::Fp { p, v: a }, Scalar::Fp { v: b, .. }) => {
                        let f: fn(u64, u64, u64) -> u64 = $fp;
                        Scalar::Fp { p: *p, v: f(*a, *b, *p) }
                    }
                    _ => unreachable!(),
                }
            }
        }
        impl std::ops::$trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
    };
}

scalar_binop!(Add, add, +, |a, b, p| (a + b) % p);
scalar_binop!(Sub, sub, -, |a, b, p| (a + p - b) % p);
scalar_binop!(Mul, mul, *, |a, b, p| (a * b) % p);

impl std::ops::Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Q(q) => Scalar::Q(-q),
            Scalar::Fp { p, v } => Scalar::Fp {
                p: *p,
                v: (*p - *v) % *p,
            },
        }
    }
}

impl std::ops::Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl Scalar {
    /// Exact division; errors on division by zero.
    pub fn div(&self, rhs: &Scalar) -> Result<Scalar, ArithmeticError> {
        let inv = rhs.inv().ok_or(ArithmeticError::DivisionByZero)?;
        Ok(self * &inv)
    }
}

/// Serialized form: canonical string plus the ambient field carried by context.
impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
