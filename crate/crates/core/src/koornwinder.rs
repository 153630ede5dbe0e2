//! Noumi's basic representation on Laurent polynomials and nonsymmetric Koornwinder polynomials.
//!
//! The representation is always taken with inverted parameters `κ⁻¹, υ₀⁻¹, υ_n⁻¹`; callers
//! pass the plain [`ParamSet`] and the inversion happens here.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::numerics::laurent::{poly_residual, LaurentJson};
use crate::numerics::params::eta;
use crate::numerics::{divided_difference, CxExt, LaurentPoly, ParamSet, Real};

/// Default cap on `Σ|λ_i|`.
pub const DEGREE_CAP: i32 = 4;
/// Default cap on the number of variables.
pub const RANK_CAP: usize = 3;
/// Relative pivot threshold for the joint kernel.
pub const KERNEL_THRESHOLD: f64 = 1e-6;
/// Relative coefficient size counted as leaking out of a span.
pub const LEAK_THRESHOLD: f64 = 1e-9;

/// `γ_λ` together with its label.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPoint<R: Real = f64> {
    pub gamma: Vec<Complex<R>>,
    pub lambda: Vec<i32>,
}

/// The spectral point `γ_λ` attached to `λ ∈ ℤⁿ`.
pub fn gamma_lambda<R: Real>(lambda: &[i32], p: &ParamSet<R>) -> SpectralPoint<R> {
    let n = lambda.len();
    let k = p.kappa();
    let k0kn = p.kappa0().clone() * p.kappan().clone();
    let gamma = (0..n)
        .map(|i| {
            let li = i64::from(lambda[i]);
            let mut e = 0i64;
            for (j, &lj) in lambda.iter().enumerate() {
                let lj = i64::from(lj);
                if j < i {
                    e += eta(lj - li);
                }
                if j > i {
                    e -= eta(li - lj);
                }
                if j != i {
                    e -= eta(li + lj);
                }
            }
            p.q().ipow(li) * k0kn.ipow(-eta(li)) * k.ipow(e)
        })
        .collect();
    SpectralPoint { gamma, lambda: lambda.to_vec() }
}

fn kappa_j_of<R: Real>(p: &ParamSet<R>, j: usize) -> Complex<R> {
    p.kappa_j(j).clone()
}

/// Numerator of `c_j` as a Laurent polynomial, for the parameters `p` as given.
fn c_numerator<R: Real>(j: usize, p: &ParamSet<R>) -> LaurentPoly<R> {
    let n = p.n();
    let one = Complex::<R>::one();
    let mono = |idx: usize, e: i32, c: Complex<R>| {
        let mut exp = vec![0; n];
        exp[idx] = e;
        LaurentPoly::monomial(exp, c)
    };
    let unit = LaurentPoly::one(n);
    if j == 0 {
        let (k0, u0, qs) = (p.kappa0().clone(), p.upsilon0().clone(), p.q_sqrt().clone());
        let a = unit.add(&mono(0, -1, -(qs.clone() * k0.clone() * u0.clone())));
        let b = unit.add(&mono(0, -1, qs * k0.clone() / u0));
        a.mul(&b).scale(&k0.recip())
    } else if j == n {
        let (kn, un) = (p.kappan().clone(), p.upsilonn().clone());
        let a = unit.add(&mono(n - 1, 1, -(kn.clone() * un.clone())));
        let b = unit.add(&mono(n - 1, 1, kn.clone() / un));
        a.mul(&b).scale(&kn.recip())
    } else {
        let k = p.kappa().clone();
        let mut exp = vec![0; n];
        exp[j - 1] = 1;
        exp[j] = -1;
        unit.add(&LaurentPoly::monomial(exp, -(k.clone() * k.clone()))).scale(&(one / k))
    }
}

/// Value of `c_j(t)`; with `inverted` the parameters `κ, υ` are replaced by their inverses.
pub fn c_eval<R: Real>(j: usize, t: &[Complex<R>], p: &ParamSet<R>, inverted: bool) -> Result<Complex<R>> {
    let n = p.n();
    if j > n || t.len() != n {
        return Err(Error::Invalid(format!("c_{j} at a point of length {} with n = {n}", t.len())));
    }
    let p = if inverted { p.inverted() } else { p.clone() };
    let num = c_numerator(j, &p).eval(t)?;
    let one = Complex::<R>::one();
    let den = if j == 0 {
        one - p.q().clone() / (t[0].clone() * t[0].clone())
    } else if j == n {
        one - t[n - 1].clone() * t[n - 1].clone()
    } else {
        one - t[j - 1].clone() / t[j].clone()
    };
    if den.abs64() <= 1e-12 * num.abs64().max(1.0) {
        return Err(Error::Pole { what: format!("c_{j}"), modulus: den.abs64() });
    }
    Ok(num / den)
}

/// `T_j` of the basic representation for the parameters `p` exactly as given.
fn basic_t<R: Real>(j: usize, f: &LaurentPoly<R>, p: &ParamSet<R>) -> Result<LaurentPoly<R>> {
    let g = divided_difference(f, j, p)?;
    Ok(f.scale(&kappa_j_of(p, j)).add(&c_numerator(j, p).mul(&g)))
}

fn basic_t_inv<R: Real>(j: usize, f: &LaurentPoly<R>, p: &ParamSet<R>) -> Result<LaurentPoly<R>> {
    let kj = kappa_j_of(p, j);
    Ok(basic_t(j, f, p)?.add_scaled(f, &(kj.recip() - kj)))
}

fn check_index<R: Real>(j: usize, f: &LaurentPoly<R>, p: &ParamSet<R>) -> Result<()> {
    if j > p.n() || f.n_vars() != p.n() {
        return Err(Error::Invalid(format!("T_{j} on {} variables with n = {}", f.n_vars(), p.n())));
    }
    Ok(())
}

/// `ϖ(T_j)f = κ_j f + c_j (f∘s_j − f)` in inverted parameters.
pub fn noumi_t_apply<R: Real>(j: usize, f: &LaurentPoly<R>, p: &ParamSet<R>) -> Result<LaurentPoly<R>> {
    check_index(j, f, p)?;
    basic_t(j, f, &p.inverted())
}

/// `ϖ(T_j⁻¹)f`.
pub fn noumi_t_inv_apply<R: Real>(j: usize, f: &LaurentPoly<R>, p: &ParamSet<R>) -> Result<LaurentPoly<R>> {
    check_index(j, f, p)?;
    basic_t_inv(j, f, &p.inverted())
}

/// `ϖ(T_{s_{w₁}} ⋯ T_{s_{w_k}})f`, the rightmost factor acting first.
pub fn noumi_word_apply<R: Real>(word: &[usize], f: &LaurentPoly<R>, p: &ParamSet<R>) -> Result<LaurentPoly<R>> {
    let pi = p.inverted();
    let mut g = f.clone();
    for &j in word.iter().rev() {
        check_index(j, &g, p)?;
        g = basic_t(j, &g, &pi)?;
    }
    Ok(g)
}

fn basic_y<R: Real>(i: usize, f: &LaurentPoly<R>, pi: &ParamSet<R>) -> Result<LaurentPoly<R>> {
    let n = pi.n();
    let mut g = f.clone();
    for j in i..n {
        g = basic_t(j, &g, pi)?;
    }
    g = basic_t(n, &g, pi)?;
    for j in (1..n).rev() {
        g = basic_t(j, &g, pi)?;
    }
    g = basic_t(0, &g, pi)?;
    for j in 1..i {
        g = basic_t_inv(j, &g, pi)?;
    }
    Ok(g)
}

/// `ϖ(Y_i)f` with `Y_i = T_{i−1}⁻¹⋯T₁⁻¹T₀T₁⋯T_{n−1}T_nT_{n−1}⋯T_i`.
pub fn noumi_y_apply<R: Real>(i: usize, f: &LaurentPoly<R>, p: &ParamSet<R>) -> Result<LaurentPoly<R>> {
    if i == 0 || i > p.n() || f.n_vars() != p.n() {
        return Err(Error::Invalid(format!("Y_{i} on {} variables with n = {}", f.n_vars(), p.n())));
    }
    basic_y(i, f, &p.inverted())
}

/// Decreasing rearrangement of `|μ_i|` in partial sums.
fn dominance_sums(mu: &[i32]) -> Vec<i32> {
    let mut a: Vec<i32> = mu.iter().map(|x| x.abs()).collect();
    a.sort_unstable_by(|x, y| y.cmp(x));
    a.iter()
        .scan(0, |s, &x| {
            *s += x;
            Some(*s)
        })
        .collect()
}

/// Exponents `μ` with `μ⁺ ⪯ λ⁺`, together with cached `Y`-matrices on their span.
#[derive(Clone, Debug)]
pub struct MonomialSpan {
    lambda: Vec<i32>,
    basis: Vec<Vec<i32>>,
    index: BTreeMap<Vec<i32>, usize>,
    enlarged: bool,
}

impl MonomialSpan {
    /// `{μ : μ⁺ ⪯ λ⁺}` in lexicographic order.
    pub fn new(lambda: &[i32]) -> Self {
        let target = dominance_sums(lambda);
        Self::filtered(lambda, false, |mu| dominance_sums(mu).iter().zip(&target).all(|(a, b)| a <= b))
    }

    /// The wider span `{μ : Σ|μ_i| ≤ Σ|λ_i|}`, used when the dominance span leaks.
    pub fn enlarged(lambda: &[i32]) -> Self {
        let total: i32 = lambda.iter().map(|x| x.abs()).sum();
        Self::filtered(lambda, true, |mu| mu.iter().map(|x| x.abs()).sum::<i32>() <= total)
    }

    fn filtered(lambda: &[i32], enlarged: bool, keep: impl Fn(&[i32]) -> bool) -> Self {
        let n = lambda.len();
        let total: i32 = lambda.iter().map(|x| x.abs()).sum();
        let basis: Vec<Vec<i32>> = crate::numerics::params::lattice_ball(n, total).into_iter().filter(|mu| keep(mu)).collect();
        let index = basis.iter().enumerate().map(|(k, mu)| (mu.clone(), k)).collect();
        MonomialSpan { lambda: lambda.to_vec(), basis, index, enlarged }
    }

    pub fn lambda(&self) -> &[i32] {
        &self.lambda
    }

    pub fn basis(&self) -> &[Vec<i32>] {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_enlarged(&self) -> bool {
        self.enlarged
    }

    pub fn position(&self, mu: &[i32]) -> Option<usize> {
        self.index.get(mu).copied()
    }

    pub fn contains(&self, mu: &[i32]) -> bool {
        self.index.contains_key(mu)
    }

    /// Coordinates of `f` in the span, plus the largest coefficient outside it relative to `max|f|`.
    pub fn coordinates<R: Real>(&self, f: &LaurentPoly<R>) -> (Vec<Complex<R>>, f64) {
        let mut v = vec![Complex::<R>::zero(); self.len()];
        let mut leak: f64 = 0.0;
        for (e, c) in f.terms() {
            match self.position(e) {
                Some(k) => v[k] = c.clone(),
                None => leak = leak.max(c.abs64()),
            }
        }
        let scale = f.max_abs();
        (v, if leak == 0.0 { 0.0 } else { leak / scale })
    }

    pub fn to_poly<R: Real>(&self, v: &[Complex<R>]) -> LaurentPoly<R> {
        let mut f = LaurentPoly::zero(self.lambda.len());
        for (mu, c) in self.basis.iter().zip(v) {
            f.add_term(mu.clone(), c.clone());
        }
        f
    }

    /// Matrix of an operator on the span, column by column; also returns the worst leak.
    pub fn operator_matrix<R: Real>(&self, op: impl Fn(&LaurentPoly<R>) -> Result<LaurentPoly<R>> + Sync) -> Result<(Mat<R>, f64)> {
        let n = self.lambda.len();
        let cols: Vec<(Vec<Complex<R>>, f64)> = self
            .basis
            .par_iter()
            .map(|mu| {
                let img = op(&LaurentPoly::monomial(mu.clone(), Complex::one()))?;
                Ok(self.coordinates(&img))
            })
            .collect::<Result<_>>()?;
        debug_assert!(cols.iter().all(|(c, _)| c.len() == self.len()) && n == self.lambda.len());
        let leak = cols.iter().map(|(_, l)| *l).fold(0.0, f64::max);
        let columns: Vec<Vec<Complex<R>>> = cols.into_iter().map(|(c, _)| c).collect();
        Ok((Mat::from_columns(&columns), leak))
    }

    /// `ϖ(Y_i)` on the span, `i = 1…n`, with the worst leak over all of them.
    pub fn y_matrices<R: Real>(&self, p: &ParamSet<R>) -> Result<(Vec<Mat<R>>, f64)> {
        let pi = p.inverted();
        let mut mats = Vec::with_capacity(p.n());
        let mut leak: f64 = 0.0;
        for i in 1..=p.n() {
            let (m, l) = self.operator_matrix(|f| basic_y(i, f, &pi))?;
            mats.push(m);
            leak = leak.max(l);
        }
        Ok((mats, leak))
    }
}

/// A computed monic nonsymmetric Koornwinder polynomial with diagnostics.
#[derive(Clone, Debug)]
pub struct KoornwinderPoly<R: Real = f64> {
    pub lambda: Vec<i32>,
    pub poly: LaurentPoly<R>,
    pub gamma: Vec<Complex<R>>,
    /// Largest residual of `ϖ(Y_i)P − γ_{λ,i}⁻¹P` over `i`.
    pub eigen_residual: f64,
    pub span_size: usize,
    /// Largest residual of `[Y_i, Y_j]` on the span.
    pub commutator_residual: f64,
    pub span_enlarged: bool,
}

/// Metadata written next to a polynomial.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KoornwinderJson {
    pub lambda: Vec<i32>,
    pub gamma_lambda: Vec<[f64; 2]>,
    pub eigen_residual: f64,
    pub poly: LaurentJson,
}

impl<R: Real> KoornwinderPoly<R> {
    pub fn to_json(&self) -> KoornwinderJson {
        KoornwinderJson {
            lambda: self.lambda.clone(),
            gamma_lambda: self
                .gamma
                .iter()
                .map(|g| {
                    let z = g.to_c64();
                    [z.re, z.im]
                })
                .collect(),
            eigen_residual: self.eigen_residual,
            poly: self.poly.to_json(),
        }
    }
}

fn check_caps(lambda: &[i32], p_n: usize) -> Result<()> {
    if lambda.len() != p_n {
        return Err(Error::Invalid(format!("lambda has length {} but n = {p_n}", lambda.len())));
    }
    let deg: i32 = lambda.iter().map(|x| x.abs()).sum();
    if p_n > RANK_CAP || deg > DEGREE_CAP {
        return Err(Error::SizeCap(format!("Koornwinder caps are n <= {RANK_CAP} and |lambda| <= {DEGREE_CAP}")));
    }
    Ok(())
}

/// Monic `P_λ`: the joint eigenfunction of `ϖ(Y_i)` with eigenvalues `γ_{λ,i}⁻¹`.
pub fn compute_p<R: Real>(lambda: &[i32], p: &ParamSet<R>) -> Result<LaurentPoly<R>> {
    Ok(compute_p_detailed(lambda, p)?.poly)
}

/// [`compute_p`] with eigen-residual and span diagnostics.
pub fn compute_p_detailed<R: Real>(lambda: &[i32], p: &ParamSet<R>) -> Result<KoornwinderPoly<R>> {
    check_caps(lambda, p.n())?;
    let mut span = MonomialSpan::new(lambda);
    let (mut ys, mut leak) = span.y_matrices(p)?;
    if leak > LEAK_THRESHOLD {
        span = MonomialSpan::enlarged(lambda);
        let (ys2, leak2) = span.y_matrices(p)?;
        if leak2 > LEAK_THRESHOLD {
            return Err(Error::SpanLeak { lambda: lambda.to_vec(), leak: leak2 });
        }
        ys = ys2;
        leak = leak2;
    }
    debug_assert!(leak <= LEAK_THRESHOLD);
    let gamma = gamma_lambda(lambda, p).gamma;
    let big_n = span.len();
    let stacked = Mat::from_fn(p.n() * big_n, big_n, |r, c| {
        let (i, row) = (r / big_n, r % big_n);
        let mut v = ys[i][(row, c)].clone();
        if row == c {
            v = v - gamma[i].recip();
        }
        v
    });
    let scale = ys.iter().map(Mat::max_abs).chain(gamma.iter().map(|g| g.recip().abs64())).fold(0.0, f64::max);
    let kernel = stacked.nullspace_scaled(KERNEL_THRESHOLD, scale);
    if kernel.basis.len() != 1 {
        return Err(Error::NonGenericSpectrum { lambda: lambda.to_vec(), dim: kernel.basis.len() });
    }
    let top = span.position(lambda).ok_or_else(|| Error::Defect("lambda missing from its own span".into()))?;
    let v = &kernel.basis[0];
    if v[top].abs64() == 0.0 {
        return Err(Error::NonGenericSpectrum { lambda: lambda.to_vec(), dim: 0 });
    }
    let norm = v[top].recip();
    let mut coeffs: Vec<Complex<R>> = v.iter().map(|c| c.clone() * norm.clone()).collect();
    coeffs[top] = Complex::one();
    let poly = span.to_poly(&coeffs);
    let poly = if R::EXACT { poly } else { poly.chop(1e-14) };
    let mut eigen_residual: f64 = 0.0;
    for (i, y) in ys.iter().enumerate() {
        let yv = y.matvec(&coeffs);
        let lhs = span.to_poly(&yv);
        let rhs = poly.scale(&gamma[i].recip());
        eigen_residual = eigen_residual.max(poly_residual(&lhs, &rhs));
    }
    let mut comm: f64 = 0.0;
    for a in 0..ys.len() {
        for b in a + 1..ys.len() {
            comm = comm.max(crate::linalg::commutator_residual(&ys[a], &ys[b]));
        }
    }
    Ok(KoornwinderPoly { lambda: lambda.to_vec(), poly, gamma, eigen_residual, span_size: big_n, commutator_residual: comm, span_enlarged: span.is_enlarged() })
}

/// Whether the finite simple reflection `s_i`, `1 ≤ i ≤ n`, fixes `λ`.
pub fn reflection_fixes(i: usize, lambda: &[i32]) -> bool {
    let n = lambda.len();
    if i == n {
        lambda[n - 1] == 0
    } else {
        lambda[i - 1] == lambda[i]
    }
}

/// Residual of `ϖ(T_i)P = κ_i⁻¹P`.
pub fn hecke_eigen_residual<R: Real>(i: usize, poly: &LaurentPoly<R>, p: &ParamSet<R>) -> Result<f64> {
    let lhs = noumi_t_apply(i, poly, p)?;
    Ok(poly_residual(&lhs, &poly.scale(&p.kappa_j(i).recip())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::laurent::poly_residual;
    use crate::numerics::sample_generic;
    use num_complex::Complex64;

    fn params(n: usize) -> ParamSet<f64> {
        sample_generic(11, n, None).unwrap()
    }

    #[test]
    fn gamma_at_zero_and_constant_weights() {
        let p = params(3);
        let (k0, k, kn, q) = (*p.kappa0(), *p.kappa(), *p.kappan(), *p.q());
        let g0 = gamma_lambda(&[0, 0, 0], &p).gamma;
        for (i, g) in g0.iter().enumerate() {
            let want = k0 * kn * k.powi(2 * (2 - i as i32));
            assert!((g - want).norm() < 1e-12 * want.norm());
        }
        let g2 = gamma_lambda(&[2, 2, 2], &p).gamma;
        for (i, g) in g2.iter().enumerate() {
            let want = q * q / (k0 * kn) * k.powi(-2 * i as i32);
            assert!((g - want).norm() < 1e-12 * want.norm());
        }
        let gm = gamma_lambda(&[-2, -1, 0], &p).gamma;
        let lam = [-2, -1, 0];
        for (i, g) in gm.iter().enumerate() {
            let want = k0 * kn * k.powi(2 * (2 - i as i32)) * q.powi(lam[i]);
            assert!((g - want).norm() < 1e-12 * want.norm());
        }
    }

    #[test]
    fn constants_are_eigenvectors() {
        let p = params(2);
        let one = LaurentPoly::one(2);
        for j in 0..=2 {
            let out = noumi_t_apply(j, &one, &p).unwrap();
            assert!(poly_residual(&out, &one.scale(&p.kappa_j(j).recip())) < 1e-14);
        }
    }

    #[test]
    fn c_numerator_zeros() {
        let p = params(2);
        let k = *p.kappa();
        let t1 = Complex64::new(0.7, 0.2);
        assert!(c_eval(1, &[t1, t1 * k * k], &p, false).unwrap().norm() < 1e-14);
        assert!(c_eval(1, &[t1, t1 / (k * k)], &p, true).unwrap().norm() < 1e-14);
        assert!(c_eval(1, &[t1, t1 / (k * k)], &p, false).unwrap().norm() > 1e-3);
    }

    #[test]
    fn p_zero_is_one() {
        let p = params(2);
        let k = compute_p_detailed(&[0, 0], &p).unwrap();
        assert_eq!(k.poly, LaurentPoly::one(2));
    }

    #[test]
    fn rank_one_degree_one() {
        let p = params(1);
        let k = compute_p_detailed(&[1], &p).unwrap();
        assert!(k.poly.terms().keys().all(|e| (-1..=1).contains(&e[0])));
        assert_eq!(k.poly.coeff(&[1]), Complex64::new(1.0, 0.0));
        assert!(k.eigen_residual < 1e-10, "{}", k.eigen_residual);
    }

    #[test]
    fn span_is_sign_and_permutation_stable() {
        let s = MonomialSpan::new(&[2, -1, 0]);
        for mu in s.basis() {
            let mut m = mu.clone();
            m.reverse();
            assert!(s.contains(&m));
            let neg: Vec<i32> = mu.iter().map(|x| -x).collect();
            assert!(s.contains(&neg));
        }
        assert!(s.contains(&[1, 1, 1]) && !s.contains(&[2, 1, 1]));
    }

    #[test]
    fn caps_enforced() {
        let p = params(2);
        assert!(matches!(compute_p(&[3, 2], &p), Err(Error::SizeCap(_))));
        assert!(matches!(compute_p(&[1], &p), Err(Error::Invalid(_))));
    }
}
