//! Reflection quantum KZ equations: the Cherednik–Matsuo map, polynomial solutions in the
//! spin representation, and pointwise verification.

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baxter::{fold_worst, simple_cocycle, transport_c_tau, with_resampling, RepHandle};
use crate::error::{Error, Result};
use crate::koornwinder::{compute_p, gamma_lambda, noumi_t_apply, noumi_word_apply, MonomialSpan};
use crate::linalg::{vec_residual, Mat};
use crate::numerics::laurent::LaurentJson;
use crate::numerics::params::{eta, seeded_rng, ParamSetJson};
use crate::numerics::{CxExt, LaurentPoly, ParamSet, Real};
use crate::report::Residual;
use crate::spinrep::highest_vector;
use crate::weyl::{min_coset_reps, star_involution, WeylElem};

/// Relative tolerance of the m-condition test.
pub const MCONDITION_TOL: f64 = 1e-9;

/// Coefficient size below which a solution counts as trivial.
pub const NONTRIVIAL_TOL: f64 = 1e-9;

/// Both sides of `ψ₀ψ_nq^m = (κ₀κ_nκ^{n−1})^{η(m)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub m: i32,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub satisfied: bool,
}

/// Evaluates the condition under which `(m, …, m)` yields a polynomial solution.
pub fn check_mcondition<R: Real>(p: &ParamSet<R>, m: i32) -> ConditionReport {
    check_mcondition_tol(p, m, MCONDITION_TOL)
}

pub fn check_mcondition_tol<R: Real>(p: &ParamSet<R>, m: i32, tol: f64) -> ConditionReport {
    let lhs = p.psi0().clone() * p.psin().clone() * p.q().ipow(i64::from(m));
    let base = p.kappa0().clone() * p.kappan().clone() * p.kappa().ipow(p.n() as i64 - 1);
    let rhs = base.ipow(eta(i64::from(m)));
    let (l, r) = (lhs.to_c64(), rhs.to_c64());
    let exact = (lhs.clone() - rhs.clone()).is_zero();
    let satisfied = exact || (l - r).norm() < tol * l.norm().max(r.norm());
    ConditionReport { m, lhs: l, rhs: r, satisfied }
}

/// How a solution was produced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionMeta {
    pub m: Option<i32>,
    pub lambda: Vec<i32>,
    pub construction: String,
}

/// A vector of Laurent polynomials, one per basis vector of the representation space.
#[derive(Clone, Debug)]
pub struct KZSolution<R: Real = f64> {
    pub rep: RepHandle<R>,
    pub components: Vec<LaurentPoly<R>>,
    pub metadata: SolutionMeta,
}

/// Serialized [`KZSolution`] for the spin representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KZSolutionJson {
    pub params: ParamSetJson,
    pub metadata: SolutionMeta,
    pub components: Vec<LaurentJson>,
}

impl<R: Real> KZSolution<R> {
    /// `f(t)`.
    pub fn eval(&self, t: &[Complex<R>]) -> Result<Vec<Complex<R>>> {
        self.components.iter().map(|c| c.eval(t)).collect()
    }

    /// Largest coefficient modulus over all components.
    pub fn max_coefficient(&self) -> f64 {
        self.components.iter().map(LaurentPoly::max_abs).fold(0.0, f64::max)
    }

    pub fn is_nontrivial(&self) -> bool {
        self.max_coefficient() > NONTRIVIAL_TOL
    }

    pub fn scale(&self, c: &Complex<R>) -> Self {
        KZSolution { rep: self.rep.clone(), components: self.components.iter().map(|f| f.scale(c)).collect(), metadata: self.metadata.clone() }
    }

    pub fn to_json(&self) -> KZSolutionJson {
        KZSolutionJson {
            params: self.rep.params.to_json(),
            metadata: self.metadata.clone(),
            components: self.components.iter().map(LaurentPoly::to_json).collect(),
        }
    }

    /// Reads a spin-representation solution; `tol` is passed to the parameter reader.
    pub fn from_json(j: &KZSolutionJson, tol: f64) -> Result<Self> {
        let params = ParamSet::from_json(&j.params, tol)?;
        let rep = RepHandle::spin(&params)?;
        if j.components.len() != rep.dim() {
            return Err(Error::Invalid(format!("expected {} components, found {}", rep.dim(), j.components.len())));
        }
        let components = j.components.iter().map(LaurentPoly::from_json).collect::<Result<Vec<_>>>()?;
        if components.iter().any(|c| c.n_vars() != params.n()) {
            return Err(Error::Invalid("component variable count does not match n".into()));
        }
        Ok(KZSolution { rep, components, metadata: j.metadata.clone() })
    }
}

/// `φ ↦ Σ_{w∈W₀^I} ϖ(T_{w(w₀^I)⁻¹})φ ⊗ π(T_w)v` for a representation and a vector `v`.
///
/// The spin case uses `I = {1,…,n−1}` and `v = v₊^⊗n`; other choices of `I` need the
/// matching cyclic vector of the corresponding principal series module.
pub fn cm_alpha_with<R: Real>(phi: &LaurentPoly<R>, rep: &RepHandle<R>, subset: &[usize], v: &[Complex<R>]) -> Result<Vec<LaurentPoly<R>>> {
    let n = rep.n();
    let p = &rep.params;
    let reps = min_coset_reps(subset, n)?;
    let (w0i, _) = star_involution(subset, n)?;
    let w0i_inv = w0i.inverse();
    let terms: Vec<(LaurentPoly<R>, Vec<Complex<R>>)> = reps
        .par_iter()
        .map(|w| {
            let u = w.mul(&w0i_inv);
            let phi_w = noumi_word_apply(&u.reduced_word(), phi, p)?;
            Ok((phi_w, rep.hecke.word_apply(&w.reduced_word(), v)))
        })
        .collect::<Result<_>>()?;
    Ok(assemble(&terms, rep.dim(), n))
}

fn assemble<R: Real>(terms: &[(LaurentPoly<R>, Vec<Complex<R>>)], dim: usize, n: usize) -> Vec<LaurentPoly<R>> {
    (0..dim).map(|b| terms.iter().fold(LaurentPoly::zero(n), |acc, (f, v)| if v[b].is_zero() { acc } else { acc.add_scaled(f, &v[b]) })).collect()
}

fn spin_subset(n: usize) -> Vec<usize> {
    (1..n).collect()
}

/// The Cherednik–Matsuo map into the spin representation.
pub fn cm_alpha<R: Real>(phi: &LaurentPoly<R>, params: &ParamSet<R>) -> Result<KZSolution<R>> {
    let rep = RepHandle::spin(params)?;
    let n = params.n();
    let components = cm_alpha_with(phi, &rep, &spin_subset(n), &highest_vector(n))?;
    Ok(KZSolution { rep, components, metadata: SolutionMeta { m: None, lambda: Vec::new(), construction: "cherednik-matsuo".into() } })
}

/// [`cm_alpha`] with `ϖ(T_j)` replaced by its matrix on a monomial span containing `φ`.
pub fn cm_alpha_on_span<R: Real>(phi: &LaurentPoly<R>, params: &ParamSet<R>, span: &MonomialSpan) -> Result<Vec<LaurentPoly<R>>> {
    let n = params.n();
    let rep = RepHandle::spin(params)?;
    let (coords, leak) = span.coordinates(phi);
    if leak > 0.0 {
        return Err(Error::Invalid("phi is not contained in the span".into()));
    }
    let mats = (0..=n)
        .map(|j| {
            let (m, leak) = span.operator_matrix(|f| noumi_t_apply(j, f, params))?;
            if leak > crate::koornwinder::LEAK_THRESHOLD {
                return Err(Error::SpanLeak { lambda: span.lambda().to_vec(), leak });
            }
            Ok(m)
        })
        .collect::<Result<Vec<Mat<R>>>>()?;
    let subset = spin_subset(n);
    let (w0j, _) = star_involution(&subset, n)?;
    let w0j_inv = w0j.inverse();
    let v = highest_vector::<R>(n);
    let terms = min_coset_reps(&subset, n)?
        .iter()
        .map(|w| {
            let word = w.mul(&w0j_inv).reduced_word();
            let c = word.iter().rev().fold(coords.clone(), |acc, &j| mats[j].matvec(&acc));
            (span.to_poly(&c), rep.hecke.word_apply(&w.reduced_word(), &v))
        })
        .collect::<Vec<_>>();
    Ok(assemble(&terms, rep.dim(), n))
}

/// Residual of `w₀^Jζ = γ_{(m,…,m)}`.
pub fn spectral_wiring_residual<R: Real>(p: &ParamSet<R>, m: i32) -> Result<f64> {
    let n = p.n();
    let (w0j, _) = star_involution(&spin_subset(n), n)?;
    let moved = w0j.act_point(&crate::spinrep::zeta(p), p)?;
    let gamma = gamma_lambda(&vec![m; n], p).gamma;
    Ok(vec_residual(&moved, &gamma))
}

/// `α(P_{(m,…,m)})`, refused unless the m-condition holds.
pub fn build_polynomial_solution<R: Real>(p: &ParamSet<R>, m: i32) -> Result<KZSolution<R>> {
    let report = check_mcondition(p, m);
    if !report.satisfied {
        return Err(Error::ConditionUnsatisfied(Box::new(report)));
    }
    let n = p.n();
    let wiring = spectral_wiring_residual(p, m)?;
    if wiring.is_nan() || wiring >= 1e-9 {
        return Err(Error::Defect(format!("w0^J zeta differs from gamma_(m,...,m) (residual {wiring:e})")));
    }
    let lambda = vec![m; n];
    let poly = compute_p(&lambda, p)?;
    let mut sol = cm_alpha(&poly, p)?;
    if !sol.is_nontrivial() {
        return Err(Error::Defect("the constructed solution vanishes".into()));
    }
    sol.metadata = SolutionMeta { m: Some(m), lambda, construction: "cherednik-matsuo".into() };
    Ok(sol)
}

/// Residuals of the transport equations `C_{τ_i}(t)f(q^{−ε_i}t) = f(t)` and of the invariance
/// equations `C_{s_j}(t)f(s_jt) = f(t)` at one point.
pub fn solution_residuals_at<R: Real>(sol: &KZSolution<R>, t: &[Complex<R>]) -> Result<Vec<Residual>> {
    let rep = &sol.rep;
    let n = rep.n();
    let p = &rep.params;
    let ft = sol.eval(t)?;
    let mut out = Vec::with_capacity(2 * n + 1);
    for i in 1..=n {
        let shifted = WeylElem::tau(i, n).inverse().act_point(t, p)?;
        let lhs = transport_c_tau(rep, i, t)?.matvec(&sol.eval(&shifted)?);
        out.push(Residual::new(format!("qkz.transport.{i}"), format!("C_tau{i}(t) f(q^-e{i} t) = f(t)"), vec_residual(&lhs, &ft)));
    }
    for j in 0..=n {
        let moved = WeylElem::simple(j, n).act_point(t, p)?;
        let lhs = simple_cocycle(rep, j, t)?.matvec(&sol.eval(&moved)?);
        out.push(Residual::new(format!("qkz.invariance.s{j}"), format!("C_s{j}(t) f(s{j} t) = f(t)"), vec_residual(&lhs, &ft)));
    }
    Ok(out)
}

/// Worst residual per equation over `samples` random points, resampling near poles.
pub fn verify_solution(sol: &KZSolution<f64>, samples: usize, seed: u64) -> Result<Vec<Residual>> {
    let n = sol.rep.n();
    let per = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeded_rng(seed ^ (s as u64 + 1).wrapping_mul(0xD134_2543_DE82_EF95));
            with_resampling(&mut rng, n, |t| solution_residuals_at(sol, t))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fold_worst(per))
}

/// `sol` with `c·t₁` added to its first component, a generic non-solution.
pub fn perturbed<R: Real>(sol: &KZSolution<R>, c: &Complex<R>) -> KZSolution<R> {
    let mut out = sol.clone();
    let n = sol.rep.n();
    let mut e = vec![0; n];
    e[0] = 1;
    out.components[0] = out.components[0].add(&LaurentPoly::monomial(e, c.clone()));
    out.metadata.construction = "perturbed".into();
    out
}

/// The constant vector of polynomials `v`, as a candidate solution.
pub fn constant_candidate<R: Real>(params: &ParamSet<R>, v: &[Complex<R>]) -> Result<KZSolution<R>> {
    let rep = RepHandle::spin(params)?;
    let n = params.n();
    if v.len() != rep.dim() {
        return Err(Error::Invalid("vector length does not match the representation".into()));
    }
    let components = v.iter().map(|c| LaurentPoly::constant(n, c.clone())).collect();
    Ok(KZSolution { rep, components, metadata: SolutionMeta { m: None, lambda: Vec::new(), construction: "constant".into() } })
}

/// Unit scalar, re-exported for callers building candidates.
pub fn unit<R: Real>() -> Complex<R> {
    Complex::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::params::{sample_generic, Constraint};
    use crate::Exact;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mcondition_constructed_and_generic() {
        let p = sample_generic(1, 2, Some(Constraint::MCondition { m: 1 })).unwrap();
        assert!(check_mcondition(&p, 1).satisfied);
        let q = sample_generic(1, 2, None).unwrap();
        assert!(!check_mcondition(&q, 1).satisfied);
        let z = sample_generic(3, 3, Some(Constraint::MCondition { m: 0 })).unwrap();
        let base = z.kappa0() * z.kappan() * z.kappa() * z.kappa();
        assert!((z.psi0() * z.psin() - base.recip()).norm() < 1e-12);
    }

    #[test]
    fn refusal_carries_report() {
        let p = sample_generic(2, 2, None).unwrap();
        match build_polynomial_solution(&p, 1) {
            Err(Error::ConditionUnsatisfied(r)) => assert!(!r.satisfied && r.m == 1),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn constant_solution_from_m0() {
        let p = sample_generic(4, 2, Some(Constraint::MCondition { m: 0 })).unwrap();
        let sol = build_polynomial_solution(&p, 0).unwrap();
        assert_eq!(sol.components.len(), 4);
        assert!(sol.components.iter().all(|f| f.terms().keys().all(|e| e.iter().all(|&x| x == 0))));
        for r in verify_solution(&sol, 5, 1).unwrap() {
            assert!(r.residual < 1e-9, "{} {}", r.name, r.residual);
        }
    }

    #[test]
    fn built_solutions_verify() {
        for (n, m) in [(2, -1), (2, 1), (3, 1)] {
            let p = sample_generic(10 + n as u64, n, Some(Constraint::MCondition { m })).unwrap();
            let sol = build_polynomial_solution(&p, m).unwrap();
            for r in verify_solution(&sol, 4, 2).unwrap() {
                assert!(r.residual < 1e-8, "n={n} m={m} {} {}", r.name, r.residual);
            }
            let bad = perturbed(&sol, &c(0.3, 0.1));
            let worst = verify_solution(&bad, 4, 2).unwrap().iter().map(|r| r.residual).fold(0.0, f64::max);
            assert!(worst > 1e-3);
        }
    }

    #[test]
    fn cm_alpha_linear_and_two_paths() {
        let p = sample_generic(5, 2, None).unwrap();
        let phi = LaurentPoly::monomial(vec![1, 0], c(1.0, 0.0));
        let a = cm_alpha(&phi, &p).unwrap();
        let span = MonomialSpan::new(&[1, 0]);
        let b = cm_alpha_on_span(&phi, &p, &span).unwrap();
        for (x, y) in a.components.iter().zip(&b) {
            assert!(crate::numerics::laurent::poly_residual(x, y) < 1e-12);
        }
        let s = c(0.4, -1.3);
        let scaled = cm_alpha(&phi.scale(&s), &p).unwrap();
        for (x, y) in scaled.components.iter().zip(&a.scale(&s).components) {
            assert!(crate::numerics::laurent::poly_residual(x, y) < 1e-13);
        }
    }

    #[test]
    fn json_round_trip() {
        let p = sample_generic(6, 2, Some(Constraint::MCondition { m: 1 })).unwrap();
        let sol = build_polynomial_solution(&p, 1).unwrap();
        let text = serde_json::to_string(&sol.to_json()).unwrap();
        let back = KZSolution::<f64>::from_json(&serde_json::from_str(&text).unwrap(), 1e-12).unwrap();
        assert_eq!(back.metadata, sol.metadata);
        let t = [c(0.9, 0.1), c(-0.4, 1.2)];
        assert!(vec_residual(&back.eval(&t).unwrap(), &sol.eval(&t).unwrap()) < 1e-15);
    }

    #[test]
    fn exact_constant_solution() {
        let p = sample_generic(7, 2, Some(Constraint::MCondition { m: 0 })).unwrap();
        let pe: ParamSet<Exact> = p.rounded_dyadic(20).unwrap().cast();
        let pe = pe.with_psin(crate::numerics::params::psin_for_mcondition(&pe, 0)).unwrap();
        let sol = build_polynomial_solution(&pe, 0).unwrap();
        let t: Vec<Complex<Exact>> = [c(0.75, 0.25), c(-0.5, 1.125)].iter().map(|z| Complex::from_c64(*z)).collect();
        for r in solution_residuals_at(&sol, &t).unwrap() {
            assert_eq!(r.residual, 0.0, "{}", r.name);
        }
    }
}
