use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Exact complex number `re + i*im` with rational parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self::new(BigRational::from_integer(re.into()), BigRational::from_integer(im.into()))
    }

    pub fn from_fraction(re: (i64, i64), im: (i64, i64)) -> Self {
        Self::new(ratio(re.0, re.1), ratio(im.0, im.1))
    }

    pub fn real(re: BigRational) -> Self {
        Self::new(re, BigRational::zero())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_ints(1, 0)
    }

    pub fn i() -> Self {
        Self::from_ints(0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        Self::new(&self.re * factor, &self.im * factor)
    }

    pub fn scale_int(&self, factor: u64) -> Self {
        let f = BigRational::from_integer(BigInt::from(factor));
        self.scale(&f)
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }

    pub fn to_parts(&self) -> RationalParts {
        RationalParts {
            re_num: self.re.numer().to_string(),
            re_den: self.re.denom().to_string(),
            im_num: self.im.numer().to_string(),
            im_den: self.im.denom().to_string(),
        }
    }

    pub fn from_parts(parts: &RationalParts) -> Option<Self> {
        let p = |num: &str, den: &str| -> Option<BigRational> {
            let num: BigInt = num.parse().ok()?;
            let den: BigInt = den.parse().ok()?;
            if den.is_zero() {
                return None;
            }
            Some(BigRational::new(num, den))
        };
        Some(Self::new(p(&parts.re_num, &parts.re_den)?, p(&parts.im_num, &parts.im_den)?))
    }
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Nearest double; exact for small numerators and denominators.
pub fn to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Very large parts: shift both down before dividing.
    let bits = q.numer().bits().max(q.denom().bits());
    let shift = bits.saturating_sub(1000);
    let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (true, true) => f.write_str("0"),
            (false, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                write!(f, "({} {} {}i)", self.re, sign, self.im.abs())
            }
        }
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: Self) -> GaussianRational {
        GaussianRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: Self) -> GaussianRational {
        GaussianRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl AddAssign<&GaussianRational> for GaussianRational {
    fn add_assign(&mut self, rhs: &GaussianRational) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: Self) -> GaussianRational {
        // Skip the cross terms when one side is purely real or imaginary.
        if self.im.is_zero() {
            return rhs.scale(&self.re);
        }
        if rhs.im.is_zero() {
            return self.scale(&rhs.re);
        }
        GaussianRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        GaussianRational::one()
    }
}

impl Mul for GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: Self) -> GaussianRational {
        &self * &rhs
    }
}

/// Serialized form: numerators and denominators as decimal strings so that
/// arbitrarily large values survive JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalParts {
    pub re_num: String,
    pub re_den: String,
    pub im_num: String,
    pub im_den: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let a = GaussianRational::from_fraction((1, 2), (1, 3));
        let b = GaussianRational::from_fraction((-2, 1), (3, 4));
        // (1/2 + i/3)(-2 + 3i/4) = -1 - 1/4 + i(3/8 - 2/3)
        assert_eq!(&a * &b, GaussianRational::from_fraction((-5, 4), (-7, 24)));
        assert_eq!(&a + &b, GaussianRational::from_fraction((-3, 2), (13, 12)));
        assert_eq!(&(&a - &a), &GaussianRational::zero());
        assert_eq!(&GaussianRational::i() * &GaussianRational::i(), GaussianRational::from_ints(-1, 0));
        assert_eq!(a.conj().conj(), a);
    }

    #[test]
    fn parts_round_trip() {
        let a = GaussianRational::from_fraction((13, 6), (-11, 8));
        assert_eq!(GaussianRational::from_parts(&a.to_parts()).unwrap(), a);
        assert_eq!(a.to_parts().re_num, "13");
        assert_eq!(a.to_parts().im_den, "8");
    }

    #[test]
    fn display() {
        assert_eq!(GaussianRational::from_fraction((13, 6), (0, 1)).to_string(), "13/6");
        assert_eq!(GaussianRational::from_ints(0, -1).to_string(), "-1i");
        assert_eq!(GaussianRational::from_fraction((1, 2), (-1, 3)).to_string(), "(1/2 - 1/3i)");
    }

    #[test]
    fn conversion() {
        assert_eq!(to_f64(&ratio(1, 4)), 0.25);
        let huge = BigRational::new(BigInt::from(3) << 2000u32, BigInt::from(1) << 2001u32);
        assert!((to_f64(&huge) - 1.5).abs() < 1e-12);
    }
}
