use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{CxExt, ParamSet, Real};

/// Laurent polynomial in `n_vars` variables with complex coefficients.
///
/// Exponent vectors are kept in lexicographic order and zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPoly<R: Real = f64> {
    n_vars: usize,
    terms: BTreeMap<Vec<i32>, Complex<R>>,
}

impl<R: Real> LaurentPoly<R> {
    pub fn zero(n_vars: usize) -> Self {
        LaurentPoly { n_vars, terms: BTreeMap::new() }
    }

    pub fn one(n_vars: usize) -> Self {
        Self::constant(n_vars, Complex::one())
    }

    pub fn constant(n_vars: usize, c: Complex<R>) -> Self {
        Self::monomial(vec![0; n_vars], c)
    }

    pub fn monomial(exp: Vec<i32>, c: Complex<R>) -> Self {
        let mut p = Self::zero(exp.len());
        p.add_term(exp, c);
        p
    }

    /// The variable `t_{i+1}` (0-based index `i`).
    pub fn variable(n_vars: usize, i: usize) -> Self {
        let mut e = vec![0; n_vars];
        e[i] = 1;
        Self::monomial(e, Complex::one())
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<i32>, Complex<R>> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: &[i32]) -> Complex<R> {
        self.terms.get(exp).cloned().unwrap_or_else(Complex::zero)
    }

    /// Adds `c·t^exp`, dropping the term if it cancels exactly.
    pub fn add_term(&mut self, exp: Vec<i32>, c: Complex<R>) {
        assert_eq!(exp.len(), self.n_vars, "exponent length");
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exp) {
            Some(v) => {
                *v = v.clone() + c;
                if v.is_zero() {
                    self.terms.remove(&exp);
                }
            }
            None => {
                self.terms.insert(exp, c);
            }
        }
    }

    pub fn scale(&self, c: &Complex<R>) -> Self {
        let mut out = Self::zero(self.n_vars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v.clone() * c.clone());
        }
        out
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, other: &Self, c: &Complex<R>) -> Self {
        assert_eq!(self.n_vars, other.n_vars, "n_vars mismatch");
        let mut out = self.clone();
        for (e, v) in &other.terms {
            out.add_term(e.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(other, &Complex::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(other, &-Complex::<R>::one())
    }

    /// Product; panics on mismatched `n_vars` (use [`laurent_mul`] for a checked version).
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n_vars, other.n_vars, "n_vars mismatch");
        let mut out = Self::zero(self.n_vars);
        for (e1, v1) in &self.terms {
            for (e2, v2) in &other.terms {
                let e: Vec<i32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, v1.clone() * v2.clone());
            }
        }
        out
    }

    pub fn eval(&self, t: &[Complex<R>]) -> Result<Complex<R>> {
        if t.len() != self.n_vars {
            return Err(Error::Invalid(format!("point has {} coordinates, expected {}", t.len(), self.n_vars)));
        }
        if t.iter().any(Zero::is_zero) {
            return Err(Error::ZeroCoordinate);
        }
        let inv: Vec<Complex<R>> = t.iter().map(CxExt::recip).collect();
        let mut acc = Complex::zero();
        for (e, v) in &self.terms {
            let mut term = v.clone();
            for (i, &k) in e.iter().enumerate() {
                let base = if k < 0 { &inv[i] } else { &t[i] };
                for _ in 0..k.unsigned_abs() {
                    term = term * base.clone();
                }
            }
            acc = acc + term;
        }
        Ok(acc)
    }

    /// `f ∘ s_j` for the q-dependent action of the simple reflection `s_j`, `0 ≤ j ≤ n`.
    pub fn reflect(&self, j: usize, q: &Complex<R>) -> Self {
        let n = self.n_vars;
        assert!(j <= n, "reflection index");
        let mut out = Self::zero(n);
        for (e, v) in &self.terms {
            let mut e2 = e.clone();
            let mut c = v.clone();
            if j == 0 {
                c = c * q.ipow(i64::from(e[0]));
                e2[0] = -e[0];
            } else if j == n {
                e2[n - 1] = -e[n - 1];
            } else {
                e2.swap(j - 1, j);
            }
            out.add_term(e2, c);
        }
        out
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(CxExt::abs64).fold(0.0, f64::max)
    }

    /// Drops coefficients of modulus at most `rel` times the largest one.
    pub fn chop(&self, rel: f64) -> Self {
        let cut = rel * self.max_abs();
        LaurentPoly { n_vars: self.n_vars, terms: self.terms.iter().filter(|(_, v)| v.abs64() > cut).map(|(e, v)| (e.clone(), v.clone())).collect() }
    }

    /// Conversion to another real field through double precision.
    pub fn cast<R2: Real>(&self) -> LaurentPoly<R2> {
        let mut out = LaurentPoly::zero(self.n_vars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), Complex::<R2>::from_c64(v.to_c64()));
        }
        out
    }

    pub fn to_json(&self) -> LaurentJson {
        LaurentJson {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .map(|(e, v)| {
                    let z = v.to_c64();
                    TermJson { exp: e.clone(), re: z.re, im: z.im }
                })
                .collect(),
        }
    }

    pub fn from_json(j: &LaurentJson) -> Result<Self> {
        let mut p = Self::zero(j.n_vars);
        for t in &j.terms {
            if t.exp.len() != j.n_vars {
                return Err(Error::Invalid("exponent length does not match n_vars".into()));
            }
            p.add_term(t.exp.clone(), Complex::<R>::from_c64(num_complex::Complex64::new(t.re, t.im)));
        }
        Ok(p)
    }
}

/// Serialized form of a [`LaurentPoly`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaurentJson {
    pub n_vars: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<i32>,
    pub re: f64,
    pub im: f64,
}

/// Product in the Laurent ring.
pub fn laurent_mul<R: Real>(a: &LaurentPoly<R>, b: &LaurentPoly<R>) -> Result<LaurentPoly<R>> {
    if a.n_vars != b.n_vars {
        return Err(Error::Invalid(format!("n_vars mismatch: {} vs {}", a.n_vars, b.n_vars)));
    }
    Ok(a.mul(b))
}

/// Max-abs coefficient difference normalized by the max-abs coefficient of either input.
pub fn poly_residual<R: Real>(a: &LaurentPoly<R>, b: &LaurentPoly<R>) -> f64 {
    let diff = a.sub(b).max_abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / a.max_abs().max(b.max_abs())
    }
}

/// The binomial `1 − c·t^δ` in the denominator of `c_j`, returned as `(c, δ)`.
pub fn reflection_denominator<R: Real>(j: usize, n: usize, q: &Complex<R>) -> (Complex<R>, Vec<i32>) {
    let mut delta = vec![0; n];
    let c = if j == 0 {
        delta[0] = -2;
        q.clone()
    } else if j == n {
        delta[n - 1] = 2;
        Complex::one()
    } else {
        delta[j - 1] = 1;
        delta[j] = -1;
        Complex::one()
    };
    (c, delta)
}

/// Exact division of `f` by `1 − c·t^δ`, by recursion along the lines `μ + ℤδ`.
///
/// Returns the quotient and the largest remainder coefficient relative to `max|f|`.
pub fn divide_binomial<R: Real>(f: &LaurentPoly<R>, c: &Complex<R>, delta: &[i32]) -> (LaurentPoly<R>, f64) {
    let n = f.n_vars;
    let piv = delta.iter().position(|&d| d != 0).expect("nonzero direction");
    let mut lines: BTreeMap<Vec<i32>, BTreeMap<i32, Complex<R>>> = BTreeMap::new();
    for (e, v) in &f.terms {
        let s = e[piv].div_euclid(delta[piv]);
        let base: Vec<i32> = e.iter().zip(delta).map(|(a, d)| a - s * d).collect();
        lines.entry(base).or_default().insert(s, v.clone());
    }
    let mut quotient = LaurentPoly::zero(n);
    let mut remainder: f64 = 0.0;
    for (base, line) in lines {
        let smin = *line.keys().next().expect("nonempty line");
        let smax = *line.keys().next_back().expect("nonempty line");
        let mut prev = Complex::<R>::zero();
        for s in smin..smax {
            let val = line.get(&s).cloned().unwrap_or_else(Complex::zero) + c.clone() * prev;
            let e: Vec<i32> = base.iter().zip(delta).map(|(b, d)| b + s * d).collect();
            quotient.add_term(e, val.clone());
            prev = val;
        }
        let last = line.get(&smax).cloned().unwrap_or_else(Complex::zero) + c.clone() * prev;
        remainder = remainder.max(last.abs64());
    }
    let scale = f.max_abs();
    (quotient, if remainder == 0.0 { 0.0 } else { remainder / scale })
}

/// Relative remainder above which exact division is declared defective.
pub const DIVISIBILITY_SENTINEL: f64 = 1e-8;

/// `(f∘s_j − f)` divided exactly by the denominator of `c_j`.
pub fn divided_difference<R: Real>(f: &LaurentPoly<R>, j: usize, params: &ParamSet<R>) -> Result<LaurentPoly<R>> {
    let n = f.n_vars;
    if n != params.n() || j > n {
        return Err(Error::Invalid(format!("reflection s_{j} on {n} variables with n = {}", params.n())));
    }
    let diff = f.reflect(j, params.q()).sub(f);
    let (c, delta) = reflection_denominator(j, n, params.q());
    let (g, rem) = divide_binomial(&diff, &c, &delta);
    if rem > DIVISIBILITY_SENTINEL || (R::EXACT && rem != 0.0) {
        return Err(Error::Divisibility { remainder: rem });
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{cx, sample_generic};
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn unit_and_inverse_monomials() {
        let p = LaurentPoly::monomial(vec![2, -1], c(3.0)).add(&LaurentPoly::one(2));
        assert_eq!(laurent_mul(&LaurentPoly::one(2), &p).unwrap(), p);
        let t1 = LaurentPoly::<f64>::variable(1, 0);
        let t1inv = LaurentPoly::monomial(vec![-1], c(1.0));
        assert_eq!(t1.mul(&t1inv), LaurentPoly::one(1));
    }

    #[test]
    fn difference_of_squares() {
        let t1 = LaurentPoly::<f64>::variable(2, 0);
        let t2 = LaurentPoly::<f64>::variable(2, 1);
        let lhs = laurent_mul(&t1.add(&t2), &t1.sub(&t2)).unwrap();
        let rhs = t1.mul(&t1).sub(&t2.mul(&t2));
        assert_eq!(lhs, rhs);
        assert_eq!(lhs.len(), 2);
    }

    #[test]
    fn mismatched_vars_rejected() {
        assert!(laurent_mul(&LaurentPoly::<f64>::one(1), &LaurentPoly::one(2)).is_err());
    }

    #[test]
    fn serialized_terms_are_lexicographic() {
        let mut p = LaurentPoly::<f64>::zero(2);
        p.add_term(vec![1, 0], c(1.0));
        p.add_term(vec![-1, 3], c(2.0));
        p.add_term(vec![0, 0], c(0.0));
        p.add_term(vec![-1, -2], c(4.0));
        let j = p.to_json();
        let exps: Vec<_> = j.terms.iter().map(|t| t.exp.clone()).collect();
        assert_eq!(exps, vec![vec![-1, -2], vec![-1, 3], vec![1, 0]]);
        assert_eq!(LaurentPoly::<f64>::from_json(&j).unwrap(), p);
    }

    #[test]
    fn divided_difference_examples() {
        let params = sample_generic(1, 2, None).unwrap();
        for j in 0..=2 {
            let constant = LaurentPoly::constant(2, cx(2.5, -1.0));
            assert!(divided_difference(&constant, j, &params).unwrap().is_zero());
        }
        let sym = LaurentPoly::monomial(vec![0, 1], c(1.0)).add(&LaurentPoly::monomial(vec![0, -1], c(1.0)));
        assert!(divided_difference(&sym, 2, &params).unwrap().is_zero());
        let tn = LaurentPoly::<f64>::variable(2, 1);
        let g = divided_difference(&tn, 2, &params).unwrap();
        assert_eq!(g, LaurentPoly::monomial(vec![0, -1], c(1.0)));
    }

    #[test]
    fn non_divisible_input_has_remainder() {
        let f = LaurentPoly::<f64>::variable(1, 0);
        let (_, rem) = divide_binomial(&f, &c(1.0), &[2]);
        assert!(rem > 0.5);
    }

    #[test]
    fn reflect_s0_uses_q() {
        let params = sample_generic(3, 1, None).unwrap();
        let f = LaurentPoly::<f64>::variable(1, 0);
        let g = f.reflect(0, params.q());
        assert_eq!(g, LaurentPoly::monomial(vec![-1], *params.q()));
    }
}
