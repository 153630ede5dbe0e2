//! Monodromy and transfer matrices, crossing symmetries, the spin-chain Hamiltonian in three
//! forms, and the relation between transfer and transport operators.

use std::str::FromStr;

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baxter::{explicit_rkk, fold_worst, with_resampling, RatMat, RepHandle};
use crate::error::{Error, Result};
use crate::linalg::{commutator_residual, product, product_residual, residual, Mat};
use crate::numerics::params::{random_point, seeded_rng};
use crate::numerics::{CxExt, ParamSet, Real};
use crate::report::Residual;
use crate::spinrep::{build_spin_rep, e0_local, ei_local, en_local, flip, BasisTag, LinOp};
use crate::weyl::WeylElem;

/// Largest chain length for which transfer matrices are formed.
pub const TRANSFER_CAP: usize = 8;

/// Step of the finite-difference cross-check of the transfer-form Hamiltonian.
pub const FD_STEP: f64 = 1e-6;

/// `θ = diag(κ^{−1/2}, κ^{1/2})`.
pub fn theta<R: Real>(p: &ParamSet<R>) -> Mat<R> {
    let s = p.kappa_sqrt().clone();
    Mat::from_rows(vec![vec![s.recip(), Complex::zero()], vec![Complex::zero(), s]])
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > TRANSFER_CAP {
        return Err(Error::SizeCap(format!("transfer matrices are formed for 1 <= n <= {TRANSFER_CAP}")));
    }
    Ok(())
}

/// Factors of `r₀₁(x/t₁)⋯r₀ₙ(x/t_n) k₀(x) r_{n0}(xt_n)⋯r₁₀(xt₁)` on legs `0..=n`.
fn monodromy_factors<R: Real>(p: &ParamSet<R>, t: &[Complex<R>]) -> Vec<RatMat<R>> {
    let n = t.len();
    let e = explicit_rkk(p);
    let mut f = Vec::with_capacity(2 * n + 1);
    for (i, ti) in t.iter().enumerate() {
        f.push(e.r.rescale(&ti.recip()).embed(&[0, i + 1], n + 1));
    }
    f.push(e.k.embed(&[0], n + 1));
    for (i, ti) in t.iter().enumerate().rev() {
        f.push(e.r.rescale(ti).embed(&[i + 1, 0], n + 1));
    }
    f
}

/// `ř₀₁(x/t₁)⋯ř_{n−1,n}(x/t_n) k_n(x) ř_{n−1,n}(xt_n)⋯ř₀₁(xt₁)`.
fn monodromy_check_factors<R: Real>(p: &ParamSet<R>, t: &[Complex<R>]) -> Vec<RatMat<R>> {
    let n = t.len();
    let e = explicit_rkk(p);
    let rc = e.r_check();
    let mut f = Vec::with_capacity(2 * n + 1);
    for (i, ti) in t.iter().enumerate() {
        f.push(rc.rescale(&ti.recip()).embed(&[i, i + 1], n + 1));
    }
    f.push(e.k.embed(&[n], n + 1));
    for (i, ti) in t.iter().enumerate().rev() {
        f.push(rc.rescale(ti).embed(&[i, i + 1], n + 1));
    }
    f
}

fn eval_product<R: Real>(factors: &[RatMat<R>], x: &Complex<R>) -> Result<Mat<R>> {
    let vals = factors.iter().map(|f| f.eval(x)).collect::<Result<Vec<_>>>()?;
    Ok(product(factors[0].dim(), &vals))
}

/// Value and derivative of a product of rational factors by the product rule.
fn eval_product_derivative<R: Real>(factors: &[RatMat<R>], x: &Complex<R>) -> Result<(Mat<R>, Mat<R>)> {
    let dim = factors[0].dim();
    let vals = factors.iter().map(|f| f.eval(x)).collect::<Result<Vec<_>>>()?;
    let ders = factors.iter().map(|f| f.derivative(x)).collect::<Result<Vec<_>>>()?;
    let m = vals.len();
    let mut prefix = Vec::with_capacity(m + 1);
    prefix.push(Mat::identity(dim));
    for v in &vals {
        let next = prefix.last().expect("nonempty") * v;
        prefix.push(next);
    }
    let mut suffix = vec![Mat::identity(dim); m + 1];
    for k in (0..m).rev() {
        suffix[k] = &vals[k] * &suffix[k + 1];
    }
    let mut d = Mat::zeros(dim, dim);
    for k in 0..m {
        d = &d + &(&(&prefix[k] * &ders[k]) * &suffix[k + 1]);
    }
    Ok((prefix.pop().expect("nonempty"), d))
}

/// `U₀(x;t)` on `ℂ² ⊗ (ℂ²)^⊗n` with the auxiliary space as leg 0.
pub fn monodromy_u<R: Real>(p: &ParamSet<R>, x: &Complex<R>, t: &[Complex<R>]) -> Result<Mat<R>> {
    check_size(t.len())?;
    eval_product(&monodromy_factors(p, t), x)
}

/// `U₀(x;t)` assembled from `ř` and `k`.
pub fn monodromy_u_check<R: Real>(p: &ParamSet<R>, x: &Complex<R>, t: &[Complex<R>]) -> Result<Mat<R>> {
    check_size(t.len())?;
    eval_product(&monodromy_check_factors(p, t), x)
}

/// `θ₀ k̄₀(κ²x) θ₀` on leg 0 of `n + 1` legs.
fn dressed_kbar<R: Real>(p: &ParamSet<R>, nlegs: usize) -> RatMat<R> {
    let th = theta(p);
    let k2 = p.kappa().clone() * p.kappa().clone();
    explicit_rkk(p).kbar.rescale(&k2).sandwich(&th, &th).embed(&[0], nlegs)
}

fn transfer_factors<R: Real>(p: &ParamSet<R>, t: &[Complex<R>]) -> Vec<RatMat<R>> {
    let mut f = vec![dressed_kbar(p, t.len() + 1)];
    f.extend(monodromy_factors(p, t));
    f
}

/// `T(x;t) = Tr₀(θ₀k̄₀(κ²x)θ₀U₀(x;t))`.
pub fn transfer_t<R: Real>(p: &ParamSet<R>, x: &Complex<R>, t: &[Complex<R>]) -> Result<Mat<R>> {
    check_size(t.len())?;
    Ok(eval_product(&transfer_factors(p, t), x)?.partial_trace_first())
}

/// `T(x;t)` and `T′(x;t)`.
pub fn transfer_t_derivative<R: Real>(p: &ParamSet<R>, x: &Complex<R>, t: &[Complex<R>]) -> Result<(Mat<R>, Mat<R>)> {
    check_size(t.len())?;
    let (v, d) = eval_product_derivative(&transfer_factors(p, t), x)?;
    Ok((v.partial_trace_first(), d.partial_trace_first()))
}

/// `τ(x) = Tr(θk̄(κ²x)θ)` and `τ′(x)`.
pub fn tau_normalizer<R: Real>(p: &ParamSet<R>, x: &Complex<R>) -> Result<(Complex<R>, Complex<R>)> {
    let f = dressed_kbar(p, 1);
    Ok((f.eval(x)?.trace(), f.derivative(x)?.trace()))
}

/// `Φ(x) = (1−x)(1−κ⁴x)/(1−κ²x)²`.
pub fn phi<R: Real>(p: &ParamSet<R>, x: &Complex<R>) -> Complex<R> {
    let one = Complex::<R>::one();
    let k2 = p.kappa().clone() * p.kappa().clone();
    let d = one.clone() - k2.clone() * x.clone();
    (one.clone() - x.clone()) * (one - k2.clone() * k2 * x.clone()) / (d.clone() * d)
}

/// `Φ_bdy(x)`.
pub fn phi_bdy<R: Real>(p: &ParamSet<R>, x: &Complex<R>) -> Result<Complex<R>> {
    let one = Complex::<R>::one();
    let k = p.kappa().clone();
    let k2 = k.clone() * k.clone();
    let a = p.kappa0().clone() * p.upsilon0().clone();
    let b = p.kappa0().clone() / p.upsilon0().clone();
    let x2 = x.clone() * x.clone();
    let num = k * (one.clone() - a.clone() * x.clone()) * (one.clone() + b.clone() * x.clone()) * (one.clone() - k2.clone() * k2.clone() * x2.clone());
    let den = (one.clone() - k2.clone() * a * x.clone()) * (one.clone() + k2.clone() * b * x.clone()) * (one - k2 * x2);
    if den.is_zero() || den.abs64() < 1e-6 * num.abs64().max(1.0) {
        return Err(Error::Pole { what: "Phi_bdy".into(), modulus: den.abs64() });
    }
    Ok(num / den)
}

/// Crossing unitarity and PT symmetry of `r` at `x`.
pub fn crossing_residuals<R: Real>(p: &ParamSet<R>, x: &Complex<R>) -> Result<Vec<Residual>> {
    let e = explicit_rkk(p);
    let th = theta(p);
    let th12 = th.kron(&th);
    let th12_inv = th12.inverse()?;
    let k4 = p.kappa().ipow(4);
    let r_cross = e.r.eval(&(k4 * x.clone()).recip())?.partial_transpose(0, 2);
    let r_x = e.r.eval(x)?;
    let lhs = product(4, [&th12_inv, &r_cross, &th12, &r_x.partial_transpose(1, 2)]);
    let rhs = Mat::scalar(4, phi(p, x));
    let pf = flip::<R>();
    let r21 = &(&pf * &r_x) * &pf;
    Ok(vec![
        Residual::new("crossing.unitarity", "th1^-1 th2^-1 r12^T1(1/(k^4 x)) th1 th2 r12^T2(x) = Phi(x) Id", residual(&lhs, &rhs)),
        Residual::new("crossing.pt_symmetry", "r21(x) = r12(x)^T", residual(&r21, &r_x.transpose())),
    ])
}

/// `Tr₀(θ₀k̄₀(κ²x)θ₀ř₀₁(x²)) = Φ_bdy(x)k̄₁(x)`.
pub fn boundary_crossing_residual<R: Real>(p: &ParamSet<R>, x: &Complex<R>) -> Result<Residual> {
    let e = explicit_rkk(p);
    let a = dressed_kbar(p, 2).eval(x)?;
    let lhs = (&a * &e.r_check().eval(&(x.clone() * x.clone()))?).partial_trace_first();
    let rhs = e.kbar.eval(x)?.scale(&phi_bdy(p, x)?);
    Ok(Residual::new("crossing.boundary", "Tr0(th0 kbar0(k^2 x) th0 rcheck01(x^2)) = Phi_bdy(x) kbar1(x)", residual(&lhs, &rhs)))
}

/// Worst crossing residuals over `samples` random `x`.
pub fn check_boundary_crossing(p: &ParamSet<f64>, samples: usize, seed: u64) -> Result<Vec<Residual>> {
    let mut rng = seeded_rng(seed);
    let per = (0..samples)
        .map(|_| {
            with_resampling(&mut rng, 1, |pt| {
                let mut v = vec![boundary_crossing_residual(p, &pt[0])?];
                v.extend(crossing_residuals(p, &pt[0])?);
                Ok(v)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fold_worst(per))
}

/// Representation of the Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HamiltonianForm {
    /// Logarithmic derivative of the normalized transfer matrix at `x = 1`.
    Transfer,
    /// Pauli-matrix expression.
    Pauli,
    /// Weighted sum of Temperley–Lieb generators.
    Tl,
}

impl FromStr for HamiltonianForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transfer" => Ok(HamiltonianForm::Transfer),
            "pauli" => Ok(HamiltonianForm::Pauli),
            "tl" => Ok(HamiltonianForm::Tl),
            other => Err(Error::Invalid(format!("unknown Hamiltonian form '{other}'"))),
        }
    }
}

fn boundary_den_at_one<R: Real>(kj: &Complex<R>, uj: &Complex<R>, tag: &str) -> Result<Complex<R>> {
    let one = Complex::<R>::one();
    let d = (one.clone() - kj.clone() * uj.clone()) * (one + kj.clone() / uj.clone());
    if d.is_zero() || d.abs64() < 1e-12 {
        return Err(Error::NonGeneric(format!("derivative singularity: (1 - kappa_{tag} upsilon_{tag})(1 + kappa_{tag}/upsilon_{tag}) vanishes")));
    }
    Ok(d)
}

/// `C₀`.
pub fn c0<R: Real>(p: &ParamSet<R>) -> Result<Complex<R>> {
    let one = Complex::<R>::one();
    let k = p.kappa().clone();
    let k2 = k.clone() * k.clone();
    let a = p.kappa0().clone() * p.upsilon0().clone();
    let b = p.kappa0().clone() / p.upsilon0().clone();
    let den = boundary_den_at_one(p.kappa0(), p.upsilon0(), "0")?;
    Ok(-(k * (one + k2.clone())).recip() * (k2.clone() - a) * (k2 + b) / den)
}

/// `C̃`.
pub fn c_tilde<R: Real>(p: &ParamSet<R>) -> Result<Complex<R>> {
    let one = Complex::<R>::one();
    let k = p.kappa().clone();
    let mut sum = Complex::<R>::zero();
    for (kj, uj, tag) in [(p.kappa0(), p.upsilon0(), "0"), (p.kappan(), p.upsilonn(), "n")] {
        sum = sum + (one.clone() + kj.clone() * kj.clone()) / boundary_den_at_one(kj, uj, tag)?;
    }
    let half = Complex::<R>::from_int(2).recip();
    let quarter = Complex::<R>::from_int(4).recip();
    Ok((k.clone() - k.recip()) * half * sum - Complex::<R>::from_int(p.n() as i64 - 1) * quarter * (k.clone() + k.recip()))
}

/// `d_j` for `j ∈ {0, n}`.
pub fn d_boundary<R: Real>(p: &ParamSet<R>, j: usize) -> Result<Complex<R>> {
    let n = p.n();
    let (kj, uj, tag) = if j == 0 { (p.kappa0(), p.upsilon0(), "0") } else { (p.kappan(), p.upsilonn(), "n") };
    assert!(j == 0 || j == n, "boundary index");
    let k = p.kappa().clone();
    let w = k.clone() / kj.clone() + kj.clone() / k;
    Ok(-(kj.clone() * w) / boundary_den_at_one(kj, uj, tag)?)
}

/// `Σ_{1≤i<n} ρ̂(e_i) + (κ−κ⁻¹)(d₀ρ̂(e₀) + d_nρ̂(e_n))`.
pub fn hamiltonian_tl<R: Real>(p: &ParamSet<R>) -> Result<Mat<R>> {
    let n = p.n();
    check_size(n)?;
    let rep = build_spin_rep(p)?;
    let k = p.kappa().clone();
    let kk = k.clone() - k.recip();
    let mut h = Mat::zeros(rep.dim(), rep.dim());
    for e in &rep.e[1..n] {
        h = &h + e;
    }
    h = &h + &rep.e[0].scale(&(kk.clone() * d_boundary(p, 0)?));
    h = &h + &rep.e[n].scale(&(kk * d_boundary(p, n)?));
    Ok(h)
}

fn pauli() -> [Mat<f64>; 5] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let (z, o) = (c(0.0, 0.0), c(1.0, 0.0));
    [
        Mat::from_rows(vec![vec![z, o], vec![o, z]]),
        Mat::from_rows(vec![vec![z, c(0.0, -1.0)], vec![c(0.0, 1.0), z]]),
        Mat::from_rows(vec![vec![o, z], vec![z, -o]]),
        Mat::from_rows(vec![vec![z, o], vec![z, z]]),
        Mat::from_rows(vec![vec![z, z], vec![o, z]]),
    ]
}

/// Sign convention for the off-diagonal boundary terms of the Pauli form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliSigns {
    /// Signs for which the Pauli form equals the transfer and Temperley–Lieb forms.
    Consistent,
    /// The opposite signs, which give the conjugate of the Hamiltonian by `σᶻ ⊗ ⋯ ⊗ σᶻ`.
    Conjugated,
}

/// Pauli-matrix form of the Hamiltonian.
pub fn hamiltonian_pauli<R: Real>(p: &ParamSet<R>, signs: PauliSigns) -> Result<Mat<R>> {
    let n = p.n();
    check_size(n)?;
    let [sx, sy, sz, sp, sm] = pauli().map(|m| m.cast::<R>());
    let k = p.kappa().clone();
    let one = Complex::<R>::one();
    let half = Complex::<R>::from_int(2).recip();
    let four = Complex::<R>::from_int(4);
    let s = match signs {
        PauliSigns::Consistent => -one.clone(),
        PauliSigns::Conjugated => one.clone(),
    };
    let dim = 1usize << n;
    let mut h = Mat::zeros(dim, dim);
    let zz = (k.clone() + k.recip()) * half.clone();
    for i in 0..n - 1 {
        let bulk = &(&sx.kron(&sx) + &sy.kron(&sy)) + &sz.kron(&sz).scale(&zz);
        h = &h + &bulk.embed(&[i, i + 1], n);
    }
    let (k0, u0, psi0) = (p.kappa0().clone(), p.upsilon0().clone(), p.psi0().clone());
    let (kn, un, psin) = (p.kappan().clone(), p.upsilonn().clone(), p.psin().clone());
    let left_off = &sp.scale(&psi0) + &sm.scale(&psi0.recip());
    let left = (&sz.scale(&((one.clone() + k0.clone() * u0.clone()) * (one.clone() - k0.clone() / u0.clone())))
        + &left_off.scale(&(four.clone() * k0.clone() * s.clone())))
        .scale(&((one.clone() + k0.clone() / u0.clone()) * (one.clone() - k0 * u0)).recip());
    let right_off = &sp.scale(&psin.recip()) + &sm.scale(&psin);
    let right = (&sz.scale(&((one.clone() + kn.clone() * un.clone()) * (one.clone() - kn.clone() / un.clone()))) - &right_off.scale(&(four * kn.clone() * s)))
        .scale(&((one.clone() + kn.clone() / un.clone()) * (one - kn * un)).recip());
    let bdy = &left.embed(&[0], n) - &right.embed(&[n - 1], n);
    h = &h + &bdy.scale(&((k.clone() - k.recip()) * half.clone()));
    Ok(h.scale(&half).add_identity(&c_tilde(p)?))
}

/// `H = (κ−κ⁻¹)/2 · d/dx log(T(x;1)/τ(x))|_{x=1} − C₀`, with analytic derivatives.
pub fn hamiltonian_transfer<R: Real>(p: &ParamSet<R>) -> Result<Mat<R>> {
    let n = p.n();
    let ones = vec![Complex::<R>::one(); n];
    let x = Complex::<R>::one();
    let (t1, dt) = transfer_t_derivative(p, &x, &ones)?;
    let (tau, dtau) = tau_normalizer(p, &x)?;
    if tau.is_zero() || tau.abs64() < 1e-12 {
        return Err(Error::NonGeneric("derivative singularity: Tr(theta kbar(kappa^2) theta) vanishes".into()));
    }
    let log_d = t1.solve(&dt).map_err(|_| Error::NonGeneric("derivative singularity: T(1;1) is singular".into()))?;
    let k = p.kappa().clone();
    let half = Complex::<R>::from_int(2).recip();
    let h = log_d.add_identity(&-(dtau / tau)).scale(&((k.clone() - k.recip()) * half));
    Ok(h.add_identity(&-c0(p)?))
}

/// [`hamiltonian_transfer`] with the derivative replaced by a central difference in a complex
/// direction.
pub fn hamiltonian_transfer_fd(p: &ParamSet<f64>, step: f64) -> Result<Mat<f64>> {
    let n = p.n();
    let ones = vec![Complex64::new(1.0, 0.0); n];
    let h = Complex64::from_polar(step, std::f64::consts::FRAC_PI_4);
    let one = Complex64::new(1.0, 0.0);
    let f = |x: Complex64| -> Result<Mat<f64>> {
        let (tau, _) = tau_normalizer(p, &x)?;
        Ok(transfer_t(p, &x, &ones)?.scale(&tau.recip()))
    };
    let d = (&f(one + h)? - &f(one - h)?).scale(&(2.0 * h).recip());
    let log_d = f(one)?.solve(&d)?;
    let k = *p.kappa();
    Ok(log_d.scale(&((k - k.recip()) * 0.5)).add_identity(&-c0(p)?))
}

/// The Hamiltonian in the requested form.
pub fn hamiltonian<R: Real>(p: &ParamSet<R>, form: HamiltonianForm) -> Result<LinOp<R>> {
    let mat = match form {
        HamiltonianForm::Transfer => hamiltonian_transfer(p)?,
        HamiltonianForm::Pauli => hamiltonian_pauli(p, PauliSigns::Consistent)?,
        HamiltonianForm::Tl => hamiltonian_tl(p)?,
    };
    LinOp::new(BasisTag::Spin { n: p.n() }, mat)
}

/// Derivative identities at `x = 1` linking the Hamiltonian forms.
pub fn hamiltonian_identity_residuals<R: Real>(p: &ParamSet<R>) -> Result<Vec<Residual>> {
    let n = p.n();
    let e = explicit_rkk(p);
    let one = Complex::<R>::one();
    let k = p.kappa().clone();
    let kk = k.clone() - k.recip();
    let rc1 = e.r_check().derivative(&one)?;
    let mut out = vec![Residual::new("hamiltonian.rcheck_prime", "rcheck'(1) = e/(k - 1/k)", residual(&rc1, &ei_local(&k).scale(&kk.recip())))];
    let half = Complex::<R>::from_int(2).recip();
    let kp = e.k.derivative(&one)?.scale(&half);
    let en = en_local(p).scale(&d_boundary(p, n)?);
    out.push(Residual::new("hamiltonian.k_prime", "k'(1)/2 = d_n e_n", residual(&kp, &en)));
    let (tau, _) = tau_normalizer(p, &one)?;
    let a = dressed_kbar(p, 2).eval(&one)?;
    let lhs = (&a * &rc1.embed(&[0, 1], 2)).partial_trace_first().scale(&tau.recip());
    let rhs = e0_local(p).scale(&d_boundary(p, 0)?).add_identity(&(c0(p)? / kk));
    out.push(Residual::new("hamiltonian.boundary_trace", "Tr0(th0 kbar0(k^2) th0 rcheck01'(1))/tau = d_0 e_0 + C_0/(k - 1/k)", residual(&lhs, &rhs)));
    Ok(out)
}

/// Pairwise residuals of the three Hamiltonian forms.
pub fn hamiltonian_form_residuals<R: Real>(p: &ParamSet<R>) -> Result<Vec<Residual>> {
    let tl = hamiltonian_tl(p)?;
    let pa = hamiltonian_pauli(p, PauliSigns::Consistent)?;
    let tr = hamiltonian_transfer(p)?;
    Ok(vec![
        Residual::new("hamiltonian.tl_vs_pauli", "TL form = Pauli form", residual(&tl, &pa)),
        Residual::new("hamiltonian.transfer_vs_pauli", "transfer form = Pauli form", residual(&tr, &pa)),
        Residual::new("hamiltonian.transfer_vs_tl", "transfer form = TL form", residual(&tr, &tl)),
    ])
}

/// `[T(x;t), T(y;t)]`.
pub fn transfer_commutator<R: Real>(p: &ParamSet<R>, x: &Complex<R>, y: &Complex<R>, t: &[Complex<R>]) -> Result<Residual> {
    let a = transfer_t(p, x, t)?;
    let b = transfer_t(p, y, t)?;
    Ok(Residual::new("transfer.commute", "[T(x;t), T(y;t)] = 0", commutator_residual(&a, &b)))
}

/// `T(x;t)ř_{i,i+1}(t_i/t_{i+1}) = ř_{i,i+1}(t_i/t_{i+1})T(x;s_it)` and the `k_n(t_n)` analogue.
pub fn transfer_exchange_residuals<R: Real>(p: &ParamSet<R>, x: &Complex<R>, t: &[Complex<R>]) -> Result<Vec<Residual>> {
    let n = p.n();
    let e = explicit_rkk(p);
    let rc = e.r_check();
    let tx = transfer_t(p, x, t)?;
    let mut out = Vec::new();
    for i in 1..n {
        let r = rc.eval(&(t[i - 1].clone() / t[i].clone()))?.embed(&[i - 1, i], n);
        let st = WeylElem::simple(i, n).act_point(t, p)?;
        let rhs = &r * &transfer_t(p, x, &st)?;
        out.push(Residual::new(
            format!("transfer.exchange.s{i}"),
            format!("T(x;t) rcheck_{i}(t_{i}/t_{}) = rcheck_{i}(t_{i}/t_{}) T(x;s{i} t)", i + 1, i + 1),
            residual(&(&tx * &r), &rhs),
        ));
    }
    let kn = e.k.eval(&t[n - 1])?.embed(&[n - 1], n);
    let st = WeylElem::simple(n, n).act_point(t, p)?;
    let rhs = &kn * &transfer_t(p, x, &st)?;
    out.push(Residual::new(format!("transfer.exchange.s{n}"), "T(x;t) k_n(t_n) = k_n(t_n) T(x;s_n t)", residual(&(&tx * &kn), &rhs)));
    Ok(out)
}

/// `C_{τ_i}(t)` as the product of `ř`, `k̄` and `k`, with `q^{1/2}` supplied by the caller.
pub fn transport_c_tau_rkk<R: Real>(p: &ParamSet<R>, i: usize, t: &[Complex<R>], q_sqrt: &Complex<R>) -> Result<Mat<R>> {
    let n = p.n();
    assert!((1..=n).contains(&i), "tau index");
    let e = explicit_rkk(p);
    let rc = e.r_check();
    let q = q_sqrt.clone() * q_sqrt.clone();
    let tt = |j: usize| t[j - 1].clone();
    let ti = tt(i);
    let r = |j: usize, x: Complex<R>| -> Result<Mat<R>> { Ok(rc.eval(&x)?.embed(&[j - 1, j], n)) };
    let mut f = Vec::with_capacity(2 * n);
    for j in (1..i).rev() {
        f.push(r(j, tt(j) / ti.clone())?);
    }
    f.push(e.kbar.eval(&(q_sqrt.clone() / ti.clone()))?.embed(&[0], n));
    for j in 1..i {
        f.push(r(j, q.clone() / (tt(j) * ti.clone()))?);
    }
    for j in i..n {
        f.push(r(j, q.clone() / (ti.clone() * tt(j + 1)))?);
    }
    f.push(e.k.eval(&(q.clone() / ti.clone()))?.embed(&[n - 1], n));
    for j in (i..n).rev() {
        f.push(r(j, q.clone() * tt(j + 1) / ti.clone())?);
    }
    Ok(product(1 << n, &f))
}

/// Both interpolation identities `T(t_i^{∓1};t) = Φ_bdy(t_i^{∓1}) C_{τ_i}(t)^{±1}|_{q=1}`,
/// their product, and agreement of the two transport evaluators at the actual `q`.
pub fn check_transfer_vs_transport<R: Real>(p: &ParamSet<R>, i: usize, t: &[Complex<R>]) -> Result<Vec<Residual>> {
    let one = Complex::<R>::one();
    let ti = t[i - 1].clone();
    let c = transport_c_tau_rkk(p, i, t, &one)?;
    let c_inv = c.inverse()?;
    let tm = transfer_t(p, &ti.recip(), t)?;
    let tp = transfer_t(p, &ti, t)?;
    let (fm, fp) = (phi_bdy(p, &ti.recip())?, phi_bdy(p, &ti)?);
    let rep = RepHandle::spin(p)?;
    let generic = crate::baxter::transport_c_tau(&rep, i, t)?;
    let explicit = transport_c_tau_rkk(p, i, t, p.q_sqrt())?;
    Ok(vec![
        Residual::new(format!("interpolation.first.{i}"), format!("T(1/t_{i};t) = Phi_bdy(1/t_{i}) C_tau{i}(t)|q=1"), residual(&tm, &c.scale(&fm))),
        Residual::new(format!("interpolation.second.{i}"), format!("T(t_{i};t) = Phi_bdy(t_{i}) C_tau{i}(t)^-1|q=1"), residual(&tp, &c_inv.scale(&fp))),
        Residual::new(
            format!("interpolation.product.{i}"),
            format!("T(t_{i};t) T(1/t_{i};t) = Phi_bdy(t_{i}) Phi_bdy(1/t_{i}) Id"),
            product_residual(&tp, &tm, &Mat::scalar(tm.rows(), fp * fm)),
        ),
        Residual::new(format!("transport.rkk_vs_baxter.{i}"), format!("rcheck/k product = Baxterized product for C_tau{i}"), residual(&explicit, &generic)),
    ])
}

/// The main transfer checks at `samples` random points for chain length `p.n()`.
pub fn check_transfer_suite(p: &ParamSet<f64>, samples: usize, seed: u64) -> Result<Vec<Residual>> {
    let n = p.n();
    let per = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeded_rng(seed.wrapping_add(s as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ seed);
            with_resampling(&mut rng, n + 2, |pt| {
                let (x, y, t) = (&pt[0], &pt[1], &pt[2..]);
                let mut v = vec![transfer_commutator(p, x, y, t)?];
                let u = monodromy_u(p, x, t)?;
                let uc = monodromy_u_check(p, x, t)?;
                v.push(Residual::new("monodromy.forms", "r-form = rcheck-form of U0(x;t)", residual(&u, &uc)));
                v.extend(transfer_exchange_residuals(p, x, t)?);
                for i in 1..=n {
                    v.extend(check_transfer_vs_transport(p, i, t)?);
                }
                Ok(v)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fold_worst(per))
}

/// Convenience for drawing a random point.
pub fn sample_point(seed: u64, k: usize) -> Vec<Complex64> {
    random_point(&mut seeded_rng(seed), k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::sample_generic;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn theta_squares_to_kappa_diag() {
        let p = sample_generic(1, 2, None).unwrap();
        let th = theta(&p);
        let sq = &th * &th;
        assert!((sq[(0, 0)] - p.kappa().recip()).norm() < 1e-14);
        assert!((sq[(1, 1)] - p.kappa()).norm() < 1e-14);
    }

    #[test]
    fn monodromy_at_one_is_regular() {
        let p = sample_generic(2, 2, None).unwrap();
        let ones = vec![c(1.0, 0.0); 2];
        let u = monodromy_u(&p, &c(1.0, 0.0), &ones).unwrap();
        assert!(residual(&u, &Mat::identity(8)) < 1e-14);
    }

    #[test]
    fn phi_bdy_at_one() {
        let p = sample_generic(3, 2, None).unwrap();
        let one = c(1.0, 0.0);
        let (k, a, b) = (*p.kappa(), p.kappa0() * p.upsilon0(), p.kappa0() / p.upsilon0());
        let k2 = k * k;
        let direct = k * (1.0 - a) * (1.0 + b) * (1.0 - k2 * k2) / ((1.0 - k2 * a) * (1.0 + k2 * b) * (1.0 - k2));
        assert!((phi_bdy(&p, &one).unwrap() - direct).norm() < 1e-13);
        let r = boundary_crossing_residual(&p, &one).unwrap();
        assert!(r.residual < 1e-13);
    }

    #[test]
    fn crossing_and_boundary() {
        let p = sample_generic(4, 2, None).unwrap();
        for r in check_boundary_crossing(&p, 10, 5).unwrap() {
            assert!(r.residual < 1e-10, "{} {}", r.name, r.residual);
        }
    }

    #[test]
    fn transfer_suite_small() {
        for n in 2..=3 {
            let p = sample_generic(40 + n as u64, n, None).unwrap();
            for r in check_transfer_suite(&p, 3, 9).unwrap() {
                assert!(r.residual < 1e-8, "n={n} {} {}", r.name, r.residual);
            }
        }
    }

    #[test]
    fn hamiltonian_forms_agree() {
        for n in 2..=3 {
            let p = sample_generic(50 + n as u64, n, None).unwrap();
            for r in hamiltonian_identity_residuals(&p).unwrap() {
                assert!(r.residual < 1e-12, "{} {}", r.name, r.residual);
            }
            for r in hamiltonian_form_residuals(&p).unwrap() {
                assert!(r.residual < 1e-10, "{} {}", r.name, r.residual);
            }
            let fd = hamiltonian_transfer_fd(&p, FD_STEP).unwrap();
            assert!(residual(&fd, &hamiltonian_transfer(&p).unwrap()) < 1e-7);
        }
    }

    #[test]
    fn conjugated_pauli_is_sigma_z_conjugate() {
        let p = sample_generic(60, 3, None).unwrap();
        let a = hamiltonian_pauli(&p, PauliSigns::Consistent).unwrap();
        let b = hamiltonian_pauli(&p, PauliSigns::Conjugated).unwrap();
        let sz = pauli()[2].clone();
        let z = sz.kron(&sz).kron(&sz);
        assert!(residual(&(&(&z * &a) * &z), &b) < 1e-13);
        assert!(residual(&a, &b) > 1e-3);
    }

    #[test]
    fn form_parsing() {
        assert_eq!("tl".parse::<HamiltonianForm>().unwrap(), HamiltonianForm::Tl);
        assert!("xyz".parse::<HamiltonianForm>().is_err());
    }
}
