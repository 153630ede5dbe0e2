use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real field underlying the complex scalars of a computation.
///
/// Implemented for `f64`, `f32` and `BigRational`; the rational case gives exact
/// arithmetic, used as the extended-precision mode.
pub trait Real: Num + Clone + Neg<Output = Self> + Debug + Send + Sync + 'static {
    /// True when arithmetic is exact.
    const EXACT: bool;

    fn from_f64(x: f64) -> Self;

    fn to_f64(&self) -> f64;
}

impl Real for f64 {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Real for f32 {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Self {
        x as f32
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Real for BigRational {
    const EXACT: bool = true;

    /// Exact conversion of a finite double; non-finite input maps to zero.
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(|| BigRational::from_integer(BigInt::zero()))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Complex number over `R`, built from real and imaginary doubles.
pub fn cx<R: Real>(re: f64, im: f64) -> Complex<R> {
    Complex::new(R::from_f64(re), R::from_f64(im))
}

/// Conversions and integer powers for complex scalars over any [`Real`].
pub trait CxExt: Sized {
    fn from_c64(z: Complex64) -> Self;
    fn from_int(k: i64) -> Self;
    fn to_c64(&self) -> Complex64;
    /// Modulus, evaluated in double precision.
    fn abs64(&self) -> f64;
    /// Multiplicative inverse.
    fn recip(&self) -> Self;
    /// Integer power by repeated squaring; negative exponents invert.
    fn ipow(&self, k: i64) -> Self;
}

impl<R: Real> CxExt for Complex<R> {
    fn from_c64(z: Complex64) -> Self {
        cx(z.re, z.im)
    }

    fn from_int(k: i64) -> Self {
        cx(k as f64, 0.0)
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    fn abs64(&self) -> f64 {
        self.to_c64().norm()
    }

    fn recip(&self) -> Self {
        Complex::<R>::one() / self.clone()
    }

    fn ipow(&self, k: i64) -> Self {
        let mut base = if k < 0 { self.recip() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Complex::<R>::one();
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

/// Working precision of a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// IEEE double precision.
    Double,
    /// Exact rational arithmetic; available for small n only.
    Extended,
}

impl std::str::FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double" => Ok(Precision::Double),
            "extended" => Ok(Precision::Extended),
            other => Err(Error::Invalid(format!("unknown precision '{other}'"))),
        }
    }
}

/// Precision mode plus the tolerance used for residual pass/fail decisions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarPolicy {
    pub mode: Precision,
    pub tolerance: f64,
}

impl ScalarPolicy {
    pub const DEFAULT_TOLERANCE: f64 = 1e-9;

    pub fn new(mode: Precision, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::Invalid(format!("tolerance must be positive, got {tolerance}")));
        }
        Ok(ScalarPolicy { mode, tolerance })
    }

    pub fn passes(&self, residual: f64) -> bool {
        residual < self.tolerance
    }
}

impl Default for ScalarPolicy {
    fn default() -> Self {
        ScalarPolicy { mode: Precision::Double, tolerance: Self::DEFAULT_TOLERANCE }
    }
}

/// Normalized distance between two complex numbers.
pub fn scalar_residual<R: Real>(a: &Complex<R>, b: &Complex<R>) -> f64 {
    let diff = (a.clone() - b.clone()).abs64();
    let scale = a.abs64().max(b.abs64());
    if diff == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip_is_exact() {
        let x = 0.1_f64;
        let r = <BigRational as Real>::from_f64(x);
        assert_eq!(Real::to_f64(&r), x);
        let z: Complex<BigRational> = cx(0.25, -3.5);
        assert_eq!(z.to_c64(), Complex64::new(0.25, -3.5));
    }

    #[test]
    fn integer_powers() {
        let z: Complex<f64> = cx(0.3, 1.1);
        let direct = z * z * z;
        assert!((z.ipow(3) - direct).norm() < 1e-15);
        assert!((z.ipow(-2) * z * z - Complex64::one()).norm() < 1e-15);
        assert_eq!(z.ipow(0), Complex64::one());
        let e: Complex<BigRational> = cx(0.5, 0.25);
        assert_eq!(e.ipow(-3) * e.ipow(3), Complex::one());
    }

    #[test]
    fn policy_rejects_nonpositive_tolerance() {
        assert!(ScalarPolicy::new(Precision::Double, 0.0).is_err());
        assert!(ScalarPolicy::new(Precision::Double, -1.0).is_err());
        let p = ScalarPolicy::default();
        assert!(p.passes(1e-10) && !p.passes(1e-9));
    }

    #[test]
    fn precision_parses() {
        assert_eq!("double".parse::<Precision>().unwrap(), Precision::Double);
        assert_eq!("extended".parse::<Precision>().unwrap(), Precision::Extended);
        assert!("quad".parse::<Precision>().is_err());
    }
}
