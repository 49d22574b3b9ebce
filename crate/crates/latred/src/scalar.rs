//! Exact field scalars: arbitrary-precision rationals and prime-field residues.
//!
//! Every scalar is kept in canonical form (lowest terms over the rationals,
//! least non-negative residue mod p), so equality is plain `==`.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Field of scalars: characteristic 0 (the rationals) or a prime p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    /// 0 for the rationals, a prime otherwise.
    pub char: u64,
}

impl FieldSpec {
    pub const RATIONALS: FieldSpec = FieldSpec { char: 0 };

    pub fn rationals() -> Self {
        Self::RATIONALS
    }

    pub fn prime(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(FieldSpec { char: p })
        } else {
            Err(Error::Field(format!("{p} is not prime")))
        }
    }

    pub fn is_rational(&self) -> bool {
        self.char == 0
    }

    /// Number of field elements, `None` for the rationals.
    pub fn size(&self) -> Option<u64> {
        if self.char == 0 {
            None
        } else {
            Some(self.char)
        }
    }

    pub fn zero(&self) -> Scalar {
        match self.char {
            0 => Scalar::Rat(BigRational::zero()),
            _ => Scalar::Fp(0),
        }
    }

    pub fn one(&self) -> Scalar {
        match self.char {
            0 => Scalar::Rat(BigRational::one()),
            _ => Scalar::Fp(1 % self.char),
        }
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match self.char {
            0 => Scalar::Rat(BigRational::from_integer(BigInt::from(n))),
            p => Scalar::Fp(n.rem_euclid(p as i64) as u64),
        }
    }

    /// Element with the given index in the canonical enumeration 0, 1, .., p-1.
    /// Only meaningful for prime fields.
    pub fn element(&self, idx: u64) -> Result<Scalar> {
        match self.char {
            0 => Err(Error::Field("rationals are not enumerable".into())),
            p => {
                if idx < p {
                    Ok(Scalar::Fp(idx))
                } else {
                    Err(Error::Field(format!("index {idx} out of range for GF({p})")))
                }
            }
        }
    }

    fn check(&self, s: &Scalar) -> Result<()> {
        match (self.char, s) {
            (0, Scalar::Rat(_)) => Ok(()),
            (p, Scalar::Fp(v)) if p != 0 && *v < p => Ok(()),
            _ => Err(Error::Field(format!("scalar {s} does not belong to {self}"))),
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (a, b) {
            (Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x + y),
            (Scalar::Fp(x), Scalar::Fp(y)) => Scalar::Fp(addmod(*x, *y, self.char)),
            _ => panic!("mixed-field scalar arithmetic"),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        match a {
            Scalar::Rat(x) => Scalar::Rat(-x),
            Scalar::Fp(x) => Scalar::Fp(if *x == 0 { 0 } else { self.char - *x }),
        }
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (a, b) {
            (Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x * y),
            (Scalar::Fp(x), Scalar::Fp(y)) => {
                Scalar::Fp(((*x as u128 * *y as u128) % self.char as u128) as u64)
            }
            _ => panic!("mixed-field scalar arithmetic"),
        }
    }

    pub fn inv(&self, a: &Scalar) -> Result<Scalar> {
        match a {
            Scalar::Rat(x) => {
                if x.is_zero() {
                    Err(Error::Field("division by zero".into()))
                } else {
                    Ok(Scalar::Rat(x.recip()))
                }
            }
            Scalar::Fp(x) => {
                if *x == 0 {
                    Err(Error::Field("division by zero".into()))
                } else {
                    Ok(Scalar::Fp(powmod(*x, self.char - 2, self.char)))
                }
            }
        }
    }

    pub fn div(&self, a: &Scalar, b: &Scalar) -> Result<Scalar> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// Parse "n", "-n" or "n/d" in this field.
    pub fn parse_scalar(&self, text: &str) -> Result<Scalar> {
        let make = |num: &str| -> Result<BigInt> {
            num.parse::<BigInt>()
                .map_err(|_| Error::Field(format!("bad scalar literal {text:?}")))
        };
        let rat = match text.split_once('/') {
            Some((n, d)) => {
                let d = make(d)?;
                if d.is_zero() {
                    return Err(Error::Field("zero denominator".into()));
                }
                BigRational::new(make(n)?, d)
            }
            None => BigRational::from_integer(make(text)?),
        };
        match self.char {
            0 => Ok(Scalar::Rat(rat)),
            p => {
                let p_big = BigInt::from(p);
                let num = rat.numer().mod_floor_big(&p_big);
                let den = rat.denom().mod_floor_big(&p_big);
                let den = Scalar::Fp(den);
                let num = Scalar::Fp(num);
                self.div(&num, &den)
            }
        }
    }

    pub fn ensure_matrix_compat(&self, other: &FieldSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Field(format!("field mismatch: {self} vs {other}")))
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.char {
            0 => write!(f, "Q"),
            p => write!(f, "GF({p})"),
        }
    }
}

trait ModFloorBig {
    fn mod_floor_big(&self, p: &BigInt) -> u64;
}

impl ModFloorBig for BigInt {
    fn mod_floor_big(&self, p: &BigInt) -> u64 {
        use num::ToPrimitive;
        let mut r = self % p;
        if r.is_negative() {
            r += p;
        }
        r.to_u64().expect("residue fits u64")
    }
}

/// A field element. `Fp` residues are always reduced mod the field
/// characteristic, which is tracked by the surrounding [`FieldSpec`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rat(BigRational),
    Fp(u64),
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(x) => x.is_zero(),
            Scalar::Fp(x) => *x == 0,
        }
    }

    /// Canonical text form: "n" or "n/d".
    pub fn to_text(&self) -> String {
        match self {
            Scalar::Rat(x) => {
                if x.denom().is_one() {
                    x.numer().to_string()
                } else {
                    format!("{}/{}", x.numer(), x.denom())
                }
            }
            Scalar::Fp(v) => v.to_string(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

fn addmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + b as u128) % p as u128) as u64
}

fn powmod(base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut b = base as u128 % p as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % p as u128;
        }
        b = b * b % p as u128;
        exp >>= 1;
    }
    acc as u64
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Runtime check used by matrix code: the scalar belongs to the field.
pub fn check_scalar(field: &FieldSpec, s: &Scalar) -> Result<()> {
    field.check(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_validation() {
        assert!(FieldSpec::prime(2).is_ok());
        assert!(FieldSpec::prime(97).is_ok());
        assert!(FieldSpec::prime(1).is_err());
        assert!(FieldSpec::prime(6).is_err());
    }

    #[test]
    fn gf5_arithmetic() {
        let f = FieldSpec::prime(5).unwrap();
        let three = f.from_i64(3);
        let four = f.from_i64(4);
        assert_eq!(f.add(&three, &four), f.from_i64(2));
        assert_eq!(f.mul(&three, &four), f.from_i64(2));
        assert_eq!(f.inv(&three).unwrap(), f.from_i64(2));
        assert_eq!(f.from_i64(-1), f.from_i64(4));
    }

    #[test]
    fn rational_parse_roundtrip() {
        let f = FieldSpec::rationals();
        for s in ["0", "7", "-3/4", "22/7"] {
            let v = f.parse_scalar(s).unwrap();
            assert_eq!(v.to_text(), s);
        }
    }

    #[test]
    fn scalar_parse_mod_p() {
        let f = FieldSpec::prime(7).unwrap();
        // 1/2 = 4 mod 7
        assert_eq!(f.parse_scalar("1/2").unwrap(), Scalar::Fp(4));
        assert_eq!(f.parse_scalar("-1").unwrap(), Scalar::Fp(6));
    }
}
