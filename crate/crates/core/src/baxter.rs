//! Baxterization of matrix representations of the affine Hecke algebra, the explicit
//! `r`, `k̄`, `k` matrices, and the cocycle `C_w(t)`.

use std::collections::BTreeMap;
use std::sync::Mutex;

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{commutator_residual, product, residual, Mat};
use crate::numerics::params::{random_point, seeded_rng};
use crate::numerics::{CxExt, ParamSet, Real};
use crate::report::{max_residual, Residual};
use crate::spinrep::{build_spin_rep, check_hecke_relations, flip, k_bar_matrix, k_matrix, upsilon_matrix, HeckeRep};
use crate::weyl::{WeylElem, Word};

/// Relative size of a denominator below which evaluation is refused.
pub const POLE_GUARD: f64 = 1e-6;

/// Number of fresh draws tried when a sampled point lands near a pole.
pub const RESAMPLE_ATTEMPTS: usize = 16;

/// Matrix-valued rational function `(Σ_k N_k x^k) / (Σ_k d_k x^k)`.
#[derive(Clone, Debug)]
pub struct RatMat<R: Real = f64> {
    num: Vec<Mat<R>>,
    den: Vec<Complex<R>>,
    what: String,
}

fn horner<T: Clone, R: Real>(coeffs: &[T], x: &Complex<R>, zero: T, mul_add: impl Fn(T, &Complex<R>, &T) -> T) -> T {
    coeffs.iter().rev().fold(zero, |acc, c| mul_add(acc, x, c))
}

impl<R: Real> RatMat<R> {
    pub fn new(num: Vec<Mat<R>>, den: Vec<Complex<R>>, what: impl Into<String>) -> Self {
        assert!(!num.is_empty() && !den.is_empty());
        RatMat { num, den, what: what.into() }
    }

    pub fn dim(&self) -> usize {
        self.num[0].rows()
    }

    pub fn what(&self) -> &str {
        &self.what
    }

    fn den_at(&self, x: &Complex<R>) -> Complex<R> {
        horner(&self.den, x, Complex::zero(), |acc, x, c| acc * x.clone() + c.clone())
    }

    fn den_prime_at(&self, x: &Complex<R>) -> Complex<R> {
        let d: Vec<Complex<R>> = self.den.iter().enumerate().skip(1).map(|(k, c)| c.clone() * Complex::from_int(k as i64)).collect();
        horner(&d, x, Complex::zero(), |acc, x, c| acc * x.clone() + c.clone())
    }

    fn num_at(&self, x: &Complex<R>) -> Mat<R> {
        let dim = self.dim();
        horner(&self.num, x, Mat::zeros(dim, dim), |acc, x, c| &acc.scale(x) + c)
    }

    fn num_prime_at(&self, x: &Complex<R>) -> Mat<R> {
        let dim = self.dim();
        let d: Vec<Mat<R>> = self.num.iter().enumerate().skip(1).map(|(k, c)| c.scale(&Complex::from_int(k as i64))).collect();
        horner(&d, x, Mat::zeros(dim, dim), |acc, x, c| &acc.scale(x) + c)
    }

    /// Denominator at `x`, refused when it is small relative to `Σ|d_k||x|^k`.
    pub fn guarded_den(&self, x: &Complex<R>) -> Result<Complex<R>> {
        let d = self.den_at(x);
        let ax = x.abs64();
        let scale: f64 = self.den.iter().enumerate().map(|(k, c)| c.abs64() * ax.powi(k as i32)).sum();
        let modulus = d.abs64();
        if d.is_zero() || modulus < POLE_GUARD * scale {
            return Err(Error::Pole { what: self.what.clone(), modulus });
        }
        Ok(d)
    }

    pub fn eval(&self, x: &Complex<R>) -> Result<Mat<R>> {
        let d = self.guarded_den(x)?;
        Ok(self.num_at(x).scale(&d.recip()))
    }

    /// Entrywise quotient rule `(N′D − ND′)/D²`.
    pub fn derivative(&self, x: &Complex<R>) -> Result<Mat<R>> {
        let d = self.guarded_den(x)?;
        let lhs = self.num_prime_at(x).scale(&d);
        let rhs = self.num_at(x).scale(&self.den_prime_at(x));
        Ok((&lhs - &rhs).scale(&(d.clone() * d).recip()))
    }

    /// The function `x ↦ f(cx)`.
    pub fn rescale(&self, c: &Complex<R>) -> Self {
        let pow = |k: usize| c.ipow(k as i64);
        RatMat {
            num: self.num.iter().enumerate().map(|(k, m)| m.scale(&pow(k))).collect(),
            den: self.den.iter().enumerate().map(|(k, d)| d.clone() * pow(k)).collect(),
            what: self.what.clone(),
        }
    }

    /// The function `x ↦ f(x)·m`.
    pub fn mul_right(&self, m: &Mat<R>) -> Self {
        RatMat { num: self.num.iter().map(|c| c * m).collect(), den: self.den.clone(), what: self.what.clone() }
    }

    /// The function `x ↦ m·f(x)·m'`.
    pub fn sandwich(&self, m: &Mat<R>, m2: &Mat<R>) -> Self {
        RatMat { num: self.num.iter().map(|c| &(m * c) * m2).collect(), den: self.den.clone(), what: self.what.clone() }
    }

    /// Places every coefficient on `legs` of `nlegs` copies of ℂ².
    pub fn embed(&self, legs: &[usize], nlegs: usize) -> Self {
        RatMat { num: self.num.iter().map(|c| c.embed(legs, nlegs)).collect(), den: self.den.clone(), what: self.what.clone() }
    }
}

/// `(1 − ax)(1 + bx)` with `a = κ_jυ_j`, `b = κ_j/υ_j`, as coefficients.
fn boundary_den<R: Real>(kj: &Complex<R>, uj: &Complex<R>) -> Vec<Complex<R>> {
    let a = kj.clone() * uj.clone();
    let b = kj.clone() / uj.clone();
    vec![Complex::one(), b.clone() - a.clone(), -(a * b)]
}

/// A Hecke representation together with its parameters.
#[derive(Clone, Debug)]
pub struct RepHandle<R: Real = f64> {
    pub hecke: HeckeRep<R>,
    pub params: ParamSet<R>,
}

impl<R: Real> RepHandle<R> {
    /// Validates the Hecke relations to `tol` and the agreement of `κ_j` with the parameters.
    pub fn new(hecke: HeckeRep<R>, params: ParamSet<R>, tol: f64) -> Result<Self> {
        if hecke.n != params.n() {
            return Err(Error::Invalid("representation rank does not match the parameters".into()));
        }
        let worst = max_residual(&check_hecke_relations(&hecke));
        if worst.is_nan() || worst >= tol {
            return Err(Error::Invalid(format!("generators violate the Hecke relations (residual {worst:e})")));
        }
        Ok(RepHandle { hecke, params })
    }

    /// The spin representation for `params`.
    pub fn spin(params: &ParamSet<R>) -> Result<Self> {
        let rep = build_spin_rep(params)?;
        Ok(RepHandle { hecke: rep.hecke, params: params.clone() })
    }

    pub fn dim(&self) -> usize {
        self.hecke.dim()
    }

    pub fn n(&self) -> usize {
        self.hecke.n
    }
}

fn boundary_baxter<R: Real>(rep: &RepHandle<R>, j: usize, uj: &Complex<R>, what: &str) -> RatMat<R> {
    let dim = rep.dim();
    let kj = &rep.hecke.kappa[j];
    let num = vec![rep.hecke.t_inv[j].clone(), Mat::scalar(dim, uj.recip() - uj.clone()), rep.hecke.t[j].scale(&-Complex::<R>::one())];
    let den = boundary_den(kj, uj).into_iter().map(|c| c / kj.clone()).collect();
    RatMat::new(num, den, what)
}

/// `K₀^V(x)` as a rational function of `x`.
pub fn k0_fn<R: Real>(rep: &RepHandle<R>) -> RatMat<R> {
    boundary_baxter(rep, 0, rep.params.upsilon0(), "K0")
}

/// `K_n^V(x)` as a rational function of `x`.
pub fn kn_fn<R: Real>(rep: &RepHandle<R>) -> RatMat<R> {
    boundary_baxter(rep, rep.n(), rep.params.upsilonn(), "Kn")
}

/// `R_i^V(x)` as a rational function of `x`, `1 ≤ i < n`.
pub fn ri_fn<R: Real>(rep: &RepHandle<R>, i: usize) -> RatMat<R> {
    assert!((1..rep.n()).contains(&i), "bulk generator index");
    let k = &rep.hecke.kappa[i];
    let num = vec![rep.hecke.t_inv[i].clone(), rep.hecke.t[i].scale(&-Complex::<R>::one())];
    let den = vec![k.recip(), -k.clone()];
    RatMat::new(num, den, format!("R{i}"))
}

/// `K₀^V`, `R_j^V` or `K_n^V` according to `j`.
pub fn baxter_fn<R: Real>(rep: &RepHandle<R>, j: usize) -> RatMat<R> {
    match j {
        0 => k0_fn(rep),
        j if j == rep.n() => kn_fn(rep),
        j => ri_fn(rep, j),
    }
}

pub fn baxter_k0<R: Real>(rep: &RepHandle<R>, x: &Complex<R>) -> Result<Mat<R>> {
    k0_fn(rep).eval(x)
}

pub fn baxter_ri<R: Real>(rep: &RepHandle<R>, i: usize, x: &Complex<R>) -> Result<Mat<R>> {
    ri_fn(rep, i).eval(x)
}

pub fn baxter_kn<R: Real>(rep: &RepHandle<R>, x: &Complex<R>) -> Result<Mat<R>> {
    kn_fn(rep).eval(x)
}

/// The closed-form two-site and one-site solutions.
#[derive(Clone, Debug)]
pub struct ExplicitRkk<R: Real = f64> {
    pub r: RatMat<R>,
    pub kbar: RatMat<R>,
    pub k: RatMat<R>,
}

impl<R: Real> ExplicitRkk<R> {
    /// `ř(x) = r(x)P`.
    pub fn r_check(&self) -> RatMat<R> {
        self.r.mul_right(&flip())
    }
}

/// `r(x)`, `k̄(x)` and `k(x)` as rational functions.
pub fn explicit_rkk<R: Real>(p: &ParamSet<R>) -> ExplicitRkk<R> {
    let (z, o) = (Complex::<R>::zero(), Complex::<R>::one());
    let k = p.kappa().clone();
    let k2 = k.clone() * k.clone();
    let c = o.clone() - k2.clone();
    let r0 = Mat::from_rows(vec![
        vec![o.clone(), z.clone(), z.clone(), z.clone()],
        vec![z.clone(), k.clone(), c.clone(), z.clone()],
        vec![z.clone(), z.clone(), k.clone(), z.clone()],
        vec![z.clone(), z.clone(), z.clone(), o.clone()],
    ]);
    let r1 = Mat::from_rows(vec![
        vec![-k2.clone(), z.clone(), z.clone(), z.clone()],
        vec![z.clone(), -k.clone(), z.clone(), z.clone()],
        vec![z.clone(), c, -k.clone(), z.clone()],
        vec![z.clone(), z.clone(), z.clone(), -k2.clone()],
    ]);
    let r = RatMat::new(vec![r0, r1], vec![o.clone(), -k2], "r");

    let (k0, u0, psi0) = (p.kappa0().clone(), p.upsilon0().clone(), p.psi0().clone());
    let d0 = k0.recip() - k0.clone();
    let kbar = RatMat::new(
        vec![
            Mat::from_rows(vec![vec![z.clone(), psi0.clone()], vec![psi0.recip(), d0.clone()]]).scale(&k0),
            Mat::scalar(2, u0.recip() - u0.clone()).scale(&k0),
            Mat::from_rows(vec![vec![d0, -psi0.clone()], vec![-psi0.recip(), z.clone()]]).scale(&k0),
        ],
        boundary_den(&k0, &u0),
        "kbar",
    );

    let (kn, un, psin) = (p.kappan().clone(), p.upsilonn().clone(), p.psin().clone());
    let dn = kn.recip() - kn.clone();
    let kk = RatMat::new(
        vec![
            Mat::from_rows(vec![vec![dn.clone(), psin.recip()], vec![psin.clone(), z.clone()]]).scale(&kn),
            Mat::scalar(2, un.recip() - un.clone()).scale(&kn),
            Mat::from_rows(vec![vec![z, -psin.recip()], vec![-psin, dn]]).scale(&kn),
        ],
        boundary_den(&kn, &un),
        "k",
    );
    ExplicitRkk { r, kbar, k: kk }
}

fn c64<R: Real>(z: Complex64) -> Complex<R> {
    Complex::from_c64(z)
}

/// Draws from `rng` until `f` succeeds or the attempts run out; only pole errors trigger a redraw.
pub fn with_resampling<T>(rng: &mut ChaCha8Rng, k: usize, mut f: impl FnMut(&[Complex64]) -> Result<T>) -> Result<T> {
    let mut last = None;
    for _ in 0..RESAMPLE_ATTEMPTS {
        let pt = random_point(rng, k);
        match f(&pt) {
            Err(e @ Error::Pole { .. }) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Residuals of the Yang–Baxter equation for `r` and of both reflection equations.
pub fn ybe_re_residuals<R: Real>(p: &ParamSet<R>, x: &Complex<R>, y: &Complex<R>) -> Result<Vec<Residual>> {
    let mut out = vec![ybe_residual(p, x, y)?];
    out.extend(reflection_residuals(p, p, x, y)?);
    Ok(out)
}

fn ybe_residual<R: Real>(p: &ParamSet<R>, x: &Complex<R>, y: &Complex<R>) -> Result<Residual> {
    let r = explicit_rkk(p).r;
    let xy = x.clone() * y.clone();
    let r12 = r.eval(x)?.embed(&[0, 1], 3);
    let r13 = r.eval(&xy)?.embed(&[0, 2], 3);
    let r23 = r.eval(y)?.embed(&[1, 2], 3);
    let lhs = &(&r12 * &r13) * &r23;
    let rhs = &(&r23 * &r13) * &r12;
    Ok(Residual::new("ybe", "r12(x) r13(xy) r23(y) = r23(y) r13(xy) r12(x)", residual(&lhs, &rhs)))
}

/// Reflection-equation residuals with the left-hand side built from `lhs` and the right-hand
/// side from `rhs`; equal parameter sets give the identities themselves.
pub fn reflection_residuals<R: Real>(lhs: &ParamSet<R>, rhs: &ParamSet<R>, x: &Complex<R>, y: &Complex<R>) -> Result<Vec<Residual>> {
    let p = flip::<R>();
    let x_over_y = x.clone() / y.clone();
    let xy = x.clone() * y.clone();
    // Returns [left-eq lhs, left-eq rhs, right-eq lhs, right-eq rhs].
    let sides = |q: &ParamSet<R>| -> Result<[Mat<R>; 4]> {
        let e = explicit_rkk(q);
        let r12a = e.r.eval(&x_over_y)?;
        let r12b = e.r.eval(&xy)?;
        let r21a = &(&p * &r12a) * &p;
        let r21b = &(&p * &r12b) * &p;
        let kb1y = e.kbar.eval(y)?.embed(&[0], 2);
        let kb2x = e.kbar.eval(x)?.embed(&[1], 2);
        let k1x = e.k.eval(x)?.embed(&[0], 2);
        let k2y = e.k.eval(y)?.embed(&[1], 2);
        Ok([
            product(4, [&r12a, &kb2x, &r21b, &kb1y]),
            product(4, [&kb1y, &r12b, &kb2x, &r21a]),
            product(4, [&r12a, &k1x, &r21b, &k2y]),
            product(4, [&k2y, &r12b, &k1x, &r21a]),
        ])
    };
    let a = sides(lhs)?;
    let b = sides(rhs)?;
    Ok(vec![
        Residual::new("reflection.left", "r12(x/y) kb2(x) r21(xy) kb1(y) = kb1(y) r12(xy) kb2(x) r21(x/y)", residual(&a[0], &b[1])),
        Residual::new("reflection.right", "r12(x/y) k1(x) r21(xy) k2(y) = k2(y) r12(xy) k1(x) r21(x/y)", residual(&a[2], &b[3])),
    ])
}

/// Worst YBE and reflection-equation residuals over `samples` random `(x, y)`.
pub fn check_ybe_re(p: &ParamSet<f64>, samples: usize, seed: u64) -> Result<Vec<Residual>> {
    let mut rng = seeded_rng(seed);
    let points: Vec<Vec<Complex64>> = (0..samples).map(|_| random_point(&mut rng, 2)).collect();
    let per: Vec<Vec<Residual>> = points
        .par_iter()
        .enumerate()
        .map(|(s, pt)| {
            let mut local = seeded_rng(seed ^ (s as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let first = ybe_re_residuals(p, &pt[0], &pt[1]);
            match first {
                Err(Error::Pole { .. }) => with_resampling(&mut local, 2, |q| ybe_re_residuals(p, &q[0], &q[1])),
                other => other,
            }
        })
        .collect::<Result<_>>()?;
    Ok(fold_worst(per))
}

/// Keeps the worst residual per name, in first-seen order.
pub fn fold_worst(per: Vec<Vec<Residual>>) -> Vec<Residual> {
    let mut out: Vec<Residual> = Vec::new();
    for r in per.into_iter().flatten() {
        match out.iter_mut().find(|o| o.name == r.name) {
            Some(o) => {
                if r.residual > o.residual || r.residual.is_nan() {
                    o.residual = r.residual;
                }
            }
            None => out.push(r),
        }
    }
    out
}

/// Identities of the Baxterized operators at spectral parameters `x`, `y`.
pub fn baxter_identity_residuals<R: Real>(rep: &RepHandle<R>, x: &Complex<R>, y: &Complex<R>) -> Result<Vec<Residual>> {
    let n = rep.n();
    let dim = rep.dim();
    let id = Mat::<R>::identity(dim);
    let f: Vec<RatMat<R>> = (0..=n).map(|j| baxter_fn(rep, j)).collect();
    let xy = x.clone() * y.clone();
    let (xi, yi) = (x.recip(), y.recip());
    let mut out = Vec::new();

    let (k0, r1) = (&f[0], &f[1]);
    let lhs = product(dim, [&k0.eval(x)?, &r1.eval(&xy)?, &k0.eval(y)?, &r1.eval(&(y.clone() * xi.clone()))?]);
    let rhs = product(dim, [&r1.eval(&(y.clone() * xi.clone()))?, &k0.eval(y)?, &r1.eval(&xy)?, &k0.eval(x)?]);
    out.push(Residual::new("baxter.braid.K0R1", "K0(x) R1(xy) K0(y) R1(y/x) = R1(y/x) K0(y) R1(xy) K0(x)", residual(&lhs, &rhs)));
    for i in 1..n.saturating_sub(1) {
        let (a, b) = (&f[i], &f[i + 1]);
        let lhs = product(dim, [&a.eval(x)?, &b.eval(&xy)?, &a.eval(y)?]);
        let rhs = product(dim, [&b.eval(y)?, &a.eval(&xy)?, &b.eval(x)?]);
        out.push(Residual::new(
            format!("baxter.braid.R{i}R{}", i + 1),
            format!("R{i}(x) R{}(xy) R{i}(y) = R{}(y) R{i}(xy) R{}(x)", i + 1, i + 1, i + 1),
            residual(&lhs, &rhs),
        ));
    }
    let (kn, rl) = (&f[n], &f[n - 1]);
    let lhs = product(dim, [&kn.eval(y)?, &rl.eval(&xy)?, &kn.eval(x)?, &rl.eval(&(x.clone() * yi.clone()))?]);
    let rhs = product(dim, [&rl.eval(&(x.clone() * yi))?, &kn.eval(x)?, &rl.eval(&xy)?, &kn.eval(y)?]);
    out.push(Residual::new("baxter.braid.KnR", "Kn(y) R(xy) Kn(x) R(x/y) = R(x/y) Kn(x) R(xy) Kn(y)", residual(&lhs, &rhs)));

    for (j, fj) in f.iter().enumerate() {
        let u = &fj.eval(x)? * &fj.eval(&xi)?;
        out.push(Residual::new(format!("baxter.unitarity.{j}"), format!("{0}(x) {0}(1/x) = Id", fj.what()), residual(&u, &id)));
        let one = fj.eval(&Complex::one())?;
        out.push(Residual::new(format!("baxter.at_one.{j}"), format!("{}(1) = Id", fj.what()), residual(&one, &id)));
        let zero = fj.eval(&Complex::zero())?;
        let expected = rep.hecke.t_inv[j].scale(&rep.hecke.kappa[j]);
        out.push(Residual::new(format!("baxter.at_zero.{j}"), format!("{}(0) = kappa_j T_j^-1", fj.what()), residual(&zero, &expected)));
    }
    for a in 0..=n {
        for b in a + 2..=n {
            if a == 0 && b == n && n == 1 {
                continue;
            }
            let c = commutator_residual(&f[a].eval(x)?, &f[b].eval(y)?);
            out.push(Residual::new(format!("baxter.commute.{a}.{b}"), format!("[{}(x), {}(y)] = 0", f[a].what(), f[b].what()), c));
        }
    }
    Ok(out)
}

/// Closed-form matrices against the Baxterized spin representation and their specializations.
pub fn explicit_consistency_residuals<R: Real>(p: &ParamSet<R>, x: &Complex<R>) -> Result<Vec<Residual>> {
    let n = p.n();
    let rep = RepHandle::spin(p)?;
    let e = explicit_rkk(p);
    let rc = e.r_check();
    let mut out = vec![
        Residual::new("explicit.kbar_vs_K0", "K0(x) = kbar_1(x)", residual(&baxter_k0(&rep, x)?, &e.kbar.eval(x)?.embed(&[0], n))),
        Residual::new("explicit.k_vs_Kn", "Kn(x) = k_n(x)", residual(&baxter_kn(&rep, x)?, &e.k.eval(x)?.embed(&[n - 1], n))),
    ];
    for i in 1..n {
        out.push(Residual::new(
            format!("explicit.rcheck_vs_R{i}"),
            format!("R{i}(x) = (r(x)P)_(i,i+1)"),
            residual(&baxter_ri(&rep, i, x)?, &rc.eval(x)?.embed(&[i - 1, i], n)),
        ));
    }
    let (zero, one) = (Complex::<R>::zero(), Complex::<R>::one());
    let k = p.kappa();
    let pf = flip::<R>();
    let ups_inv = upsilon_matrix(k).inverse()?.scale(k);
    out.push(Residual::new("explicit.r_at_zero", "r(0) = kappa P Upsilon^-1 P", residual(&e.r.eval(&zero)?, &(&(&pf * &ups_inv) * &pf))));
    out.push(Residual::new("explicit.rcheck_at_zero", "r(0)P = kappa (Upsilon P)^-1", residual(&rc.eval(&zero)?, &(&pf * &ups_inv))));
    out.push(Residual::new("explicit.kbar_at_zero", "kbar(0) = kappa0 Kbar^-1", residual(&e.kbar.eval(&zero)?, &k_bar_matrix(p).inverse()?.scale(p.kappa0()))));
    out.push(Residual::new("explicit.k_at_zero", "k(0) = kappan K^-1", residual(&e.k.eval(&zero)?, &k_matrix(p).inverse()?.scale(p.kappan()))));
    out.push(Residual::new("explicit.r_at_one", "r(1) = P", residual(&e.r.eval(&one)?, &flip())));
    let i2 = Mat::<R>::identity(2);
    for (name, f) in [("kbar", &e.kbar), ("k", &e.k)] {
        out.push(Residual::new(format!("explicit.{name}_at_one"), format!("{name}(1) = Id"), residual(&f.eval(&one)?, &i2)));
        out.push(Residual::new(format!("explicit.{name}_at_minus_one"), format!("{name}(-1) = Id"), residual(&f.eval(&-one.clone())?, &i2)));
        out.push(Residual::new(
            format!("explicit.{name}_unitarity"),
            format!("{name}(x) {name}(1/x) = Id"),
            residual(&(&f.eval(x)? * &f.eval(&x.recip())?), &i2),
        ));
    }
    let r21_inv = &(&pf * &e.r.eval(&x.recip())?) * &pf;
    out.push(Residual::new("explicit.r_unitarity", "r(x) r21(1/x) = Id", residual(&(&e.r.eval(x)? * &r21_inv), &Mat::identity(4))));
    Ok(out)
}

/// `C_{s_j}(t)`.
pub fn simple_cocycle<R: Real>(rep: &RepHandle<R>, j: usize, t: &[Complex<R>]) -> Result<Mat<R>> {
    let n = rep.n();
    let arg = match j {
        0 => rep.params.q_sqrt().clone() / t[0].clone(),
        j if j == n => t[n - 1].clone(),
        j => t[j - 1].clone() / t[j].clone(),
    };
    baxter_fn(rep, j).eval(&arg)
}

/// `C_w(t)` evaluated along a word with the cocycle law.
pub fn cocycle_word<R: Real>(rep: &RepHandle<R>, word: &[usize], t: &[Complex<R>]) -> Result<Mat<R>> {
    let n = rep.n();
    let mut point = t.to_vec();
    let mut acc = Mat::identity(rep.dim());
    for &j in word {
        acc = &acc * &simple_cocycle(rep, j, &point)?;
        point = WeylElem::simple(j, n).act_point(&point, &rep.params)?;
    }
    Ok(acc)
}

/// `C_w(t)` along the greedy reduced word of `w`.
pub fn cocycle_c<R: Real>(rep: &RepHandle<R>, w: &WeylElem, t: &[Complex<R>]) -> Result<Mat<R>> {
    cocycle_word(rep, &w.reduced_word(), t)
}

/// The cocycle of a representation with reduced words cached per element.
#[derive(Debug)]
pub struct Cocycle<R: Real = f64> {
    pub rep: RepHandle<R>,
    cache: Mutex<BTreeMap<WeylElem, Word>>,
}

impl<R: Real> Cocycle<R> {
    pub fn new(rep: RepHandle<R>) -> Self {
        Cocycle { rep, cache: Mutex::new(BTreeMap::new()) }
    }

    pub fn word(&self, w: &WeylElem) -> Word {
        let mut cache = self.cache.lock().expect("cocycle cache");
        cache.entry(w.clone()).or_insert_with(|| w.reduced_word()).clone()
    }

    pub fn eval(&self, w: &WeylElem, t: &[Complex<R>]) -> Result<Mat<R>> {
        cocycle_word(&self.rep, &self.word(w), t)
    }
}

/// The word `s_{i−1}⋯s₁s₀s₁⋯s_{n−1}s_ns_{n−1}⋯s_i` of `τ_i`.
pub fn tau_word(i: usize, n: usize) -> Word {
    (1..i).rev().chain([0]).chain(1..n).chain([n]).chain((i..n).rev()).collect()
}

/// `C_{τ_i}(t)` as the explicit product, with `q^{1/2}` supplied by the caller.
pub fn transport_c_tau_at<R: Real>(rep: &RepHandle<R>, i: usize, t: &[Complex<R>], q_sqrt: &Complex<R>) -> Result<Mat<R>> {
    let n = rep.n();
    assert!((1..=n).contains(&i), "tau index");
    let q = q_sqrt.clone() * q_sqrt.clone();
    let tt = |j: usize| t[j - 1].clone();
    let ti = tt(i);
    let mut factors = Vec::with_capacity(2 * n);
    for j in (1..i).rev() {
        factors.push(baxter_ri(rep, j, &(tt(j) / ti.clone()))?);
    }
    factors.push(baxter_k0(rep, &(q_sqrt.clone() / ti.clone()))?);
    for j in 1..i {
        factors.push(baxter_ri(rep, j, &(q.clone() / (tt(j) * ti.clone())))?);
    }
    for j in i..n {
        factors.push(baxter_ri(rep, j, &(q.clone() / (ti.clone() * tt(j + 1))))?);
    }
    factors.push(baxter_kn(rep, &(q.clone() / ti.clone()))?);
    for j in (i..n).rev() {
        factors.push(baxter_ri(rep, j, &(q.clone() * tt(j + 1) / ti.clone()))?);
    }
    Ok(product(rep.dim(), &factors))
}

/// `C_{τ_i}(t)` as the explicit product.
pub fn transport_c_tau<R: Real>(rep: &RepHandle<R>, i: usize, t: &[Complex<R>]) -> Result<Mat<R>> {
    transport_c_tau_at(rep, i, t, &rep.params.q_sqrt().clone())
}

/// Explicit transport operator against the cocycle along the word of `τ_i`, and the
/// compatibility `C_{τ_i}(t)C_{τ_j}(q^{−ε_i}t) = C_{τ_j}(t)C_{τ_i}(q^{−ε_j}t)`.
pub fn transport_residuals<R: Real>(rep: &RepHandle<R>, t: &[Complex<R>]) -> Result<Vec<Residual>> {
    let n = rep.n();
    let mut out = Vec::new();
    let shifted = |i: usize| WeylElem::tau(i, n).inverse().act_point(t, &rep.params);
    for i in 1..=n {
        let explicit = transport_c_tau(rep, i, t)?;
        let via_reduced = cocycle_c(rep, &WeylElem::tau(i, n), t)?;
        out.push(Residual::new(
            format!("transport.explicit_vs_cocycle.{i}"),
            format!("explicit C_tau{i}(t) = C_w(t) along a reduced word"),
            residual(&explicit, &via_reduced),
        ));
        for j in i + 1..=n {
            let lhs = &explicit * &transport_c_tau(rep, j, &shifted(i)?)?;
            let rhs = &transport_c_tau(rep, j, t)? * &transport_c_tau(rep, i, &shifted(j)?)?;
            out.push(Residual::new(
                format!("transport.compatibility.{i}.{j}"),
                format!("C_tau{i}(t) C_tau{j}(q^-e{i} t) = C_tau{j}(t) C_tau{i}(q^-e{j} t)"),
                residual(&lhs, &rhs),
            ));
        }
    }
    Ok(out)
}

/// Converts a double-precision point to the scalar type of `R`.
pub fn point_as<R: Real>(pt: &[Complex64]) -> Vec<Complex<R>> {
    pt.iter().map(|z| c64(*z)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::sample_generic;
    use crate::spinrep::HeckeRep;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let p = sample_generic(4, 2, None).unwrap();
        let e = explicit_rkk(&p);
        let x = c(0.8, 0.3);
        let h = 1e-6;
        for f in [&e.r, &e.kbar, &e.k] {
            let fd = (&f.eval(&(x + h)).unwrap() - &f.eval(&(x - h)).unwrap()).scale(&c(0.5 / h, 0.0));
            assert!(residual(&fd, &f.derivative(&x).unwrap()) < 1e-8);
        }
    }

    #[test]
    fn pole_is_refused() {
        let p = sample_generic(5, 2, None).unwrap();
        let e = explicit_rkk(&p);
        let pole = (p.kappa() * p.kappa()).recip();
        assert!(matches!(e.r.eval(&pole), Err(Error::Pole { .. })));
        let rep = RepHandle::spin(&p).unwrap();
        let pole0 = (p.kappa0() * p.upsilon0()).recip();
        assert!(matches!(baxter_k0(&rep, &pole0), Err(Error::Pole { .. })));
    }

    #[test]
    fn flip_swaps_legs() {
        let a = Mat::from_rows(vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(3.0, 0.0), c(4.0, 0.0)]]);
        let b = Mat::from_rows(vec![vec![c(0.0, 1.0), c(5.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]]);
        let p = flip::<f64>();
        assert!(residual(&(&(&p * &a.kron(&b)) * &p), &b.kron(&a)) < 1e-15);
    }

    #[test]
    fn baxter_identities_spin() {
        for n in 2..=4 {
            let p = sample_generic(10 + n as u64, n, None).unwrap();
            let rep = RepHandle::spin(&p).unwrap();
            let mut rng = seeded_rng(n as u64);
            for _ in 0..3 {
                let res = with_resampling(&mut rng, 2, |pt| baxter_identity_residuals(&rep, &pt[0], &pt[1])).unwrap();
                for r in res {
                    assert!(r.residual < 1e-10, "{} {}", r.name, r.residual);
                }
            }
        }
    }

    #[test]
    fn explicit_consistency() {
        for n in 2..=3 {
            let p = sample_generic(20 + n as u64, n, None).unwrap();
            for r in explicit_consistency_residuals(&p, &c(0.7, -0.4)).unwrap() {
                assert!(r.residual < 1e-12, "{} {}", r.name, r.residual);
            }
        }
    }

    #[test]
    fn ybe_and_reflection() {
        let p = sample_generic(7, 2, None).unwrap();
        for r in check_ybe_re(&p, 20, 3).unwrap() {
            assert!(r.residual < 1e-10, "{} {}", r.name, r.residual);
        }
        let one = Complex64::new(1.0, 0.0);
        for r in ybe_re_residuals(&p, &one, &one).unwrap() {
            assert!(r.residual < 1e-15, "{}", r.name);
        }
    }

    #[test]
    fn perturbed_reflection_fails() {
        let p = sample_generic(7, 2, None).unwrap();
        let q = p.with_upsilon0(p.upsilon0() * 1.1).unwrap();
        let res = reflection_residuals(&p, &q, &c(0.9, 0.5), &c(-0.6, 0.8)).unwrap();
        assert!(res[0].residual > 1e-3);
    }

    #[test]
    fn cocycle_identity_and_simple() {
        let p = sample_generic(8, 2, None).unwrap();
        let rep = RepHandle::spin(&p).unwrap();
        let t = [c(0.9, 0.2), c(-0.7, 1.1)];
        assert_eq!(cocycle_c(&rep, &WeylElem::identity(2), &t).unwrap(), Mat::identity(4));
        let s1 = cocycle_c(&rep, &WeylElem::simple(1, 2), &t).unwrap();
        assert!(residual(&s1, &baxter_ri(&rep, 1, &(t[0] / t[1])).unwrap()) < 1e-15);
    }

    #[test]
    fn tau_word_is_tau() {
        for n in 1..=4 {
            for i in 1..=n {
                let w = tau_word(i, n);
                assert_eq!(WeylElem::from_word(&w, n), WeylElem::tau(i, n));
                assert_eq!(w.len(), WeylElem::tau(i, n).length());
            }
        }
    }

    #[test]
    fn transport_two_paths() {
        for n in 2..=3 {
            let p = sample_generic(30 + n as u64, n, None).unwrap();
            let rep = RepHandle::spin(&p).unwrap();
            let t = point_as(&random_point(&mut seeded_rng(n as u64), n));
            for r in transport_residuals(&rep, &t).unwrap() {
                assert!(r.residual < 1e-9, "{} {}", r.name, r.residual);
            }
            let alt = cocycle_word(&rep, &tau_word(1, n), &t).unwrap();
            assert!(residual(&alt, &transport_c_tau(&rep, 1, &t).unwrap()) < 1e-9);
        }
    }

    #[test]
    fn classical_limit_is_permutation_cocycle() {
        let one = Complex64::new(1.0, 0.0);
        let p = ParamSet::new(2, c(1.3, 0.4), one, one, one, one, one, c(0.8, 0.6), c(1.2, -0.5)).unwrap();
        let rep = RepHandle::spin(&p).unwrap();
        let t = [c(0.9, 0.2), c(-0.7, 1.1)];
        for i in 1..=2 {
            let word = tau_word(i, 2);
            let expected = rep.hecke.word(&word);
            assert!(residual(&transport_c_tau(&rep, i, &t).unwrap(), &expected) < 1e-12);
        }
    }

    #[test]
    fn rep_handle_rejects_non_hecke() {
        let p = sample_generic(2, 2, None).unwrap();
        let spin = build_spin_rep(&p).unwrap();
        let mut t = spin.hecke.t.clone();
        t[1] = t[1].scale(&c(1.1, 0.0));
        let bad = HeckeRep::from_generators(t, spin.hecke.kappa.clone()).unwrap();
        assert!(RepHandle::new(bad, p.clone(), 1e-10).is_err());
        assert!(RepHandle::new(spin.hecke, p, 1e-10).is_ok());
    }
}
