//! Verification suites: each runs the invariant checks of one module and returns a
//! [`CheckReport`].

use std::collections::BTreeSet;
use std::str::FromStr;

use num_complex::{Complex, Complex64};
use num_traits::One;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baxter::{
    baxter_identity_residuals, cocycle_c, cocycle_word, explicit_consistency_residuals, fold_worst, point_as, reflection_residuals, transport_residuals,
    with_resampling, ybe_re_residuals, RepHandle,
};
use crate::error::{Error, Result};
use crate::koornwinder::{compute_p_detailed, hecke_eigen_residual, reflection_fixes};
use crate::linalg::{condition_number, residual, Mat};
use crate::matchings::{enumerate_matchings, intertwiner_limit, intertwiner_psi, intertwining_residuals, lsum, matchmaker_matrices, nu_basis_map};
use crate::numerics::params::{hex_digest, lattice_ball, psin_for_mcondition, seeded_rng, Constraint, ParamSetJson};
use crate::numerics::{sample_generic, CxExt, LaurentPoly, ParamSet, Precision, Real, ScalarPolicy};
use crate::qkz::{build_polynomial_solution, perturbed, solution_residuals_at, verify_solution, KZSolution};
use crate::report::{Check, CheckReport, Residual};
use crate::spinrep::{build_spin_rep, check_hecke_relations, check_tl_relations, murphy_commutators, murphy_eigen_residuals, principal_series_basis};
use crate::transfer::{
    boundary_crossing_residual, check_transfer_vs_transport, crossing_residuals, hamiltonian_form_residuals, hamiltonian_identity_residuals, monodromy_u,
    monodromy_u_check, transfer_commutator, transfer_exchange_residuals,
};
use crate::weyl::WeylElem;
use crate::Exact;

/// Lower bound for residuals that negative controls must exceed.
pub const NEGATIVE_FLOOR: f64 = 1e-3;
/// Lower bound for `|det Ψ|`.
pub const DET_FLOOR: f64 = 1e-8;
/// Upper bound for the condition number of the principal-series Gram matrix.
pub const GRAM_CONDITION_BOUND: f64 = 1e10;
/// Number of random words in the reduced-word independence check.
pub const RANDOM_WORDS: usize = 50;
/// Maximal length of those words.
pub const RANDOM_WORD_LEN: usize = 8;
/// Parameter sets used for the Hamiltonian and principal-series checks.
pub const PARAM_SETS: usize = 5;
/// Bits kept when parameters and points are converted to exact rationals.
pub const DYADIC_BITS: i32 = 12;
/// Sample count used in extended precision when none is requested.
pub const EXTENDED_SAMPLES: usize = 2;

/// Names of the suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteName {
    Algebra,
    Matchmaker,
    Baxter,
    Transfer,
    Koornwinder,
    Qkz,
    All,
}

impl SuiteName {
    pub const MODULES: [SuiteName; 6] =
        [SuiteName::Algebra, SuiteName::Matchmaker, SuiteName::Baxter, SuiteName::Transfer, SuiteName::Koornwinder, SuiteName::Qkz];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Algebra => "algebra",
            SuiteName::Matchmaker => "matchmaker",
            SuiteName::Baxter => "baxter",
            SuiteName::Transfer => "transfer",
            SuiteName::Koornwinder => "koornwinder",
            SuiteName::Qkz => "qkz",
            SuiteName::All => "all",
        }
    }

    /// Chain lengths covered when none is requested.
    fn default_ns(self, precision: Precision) -> Vec<usize> {
        match (self, precision) {
            (SuiteName::Algebra, Precision::Double) => vec![2, 3, 4, 5],
            (SuiteName::Matchmaker | SuiteName::Baxter | SuiteName::Transfer, Precision::Double) => vec![2, 3, 4],
            (SuiteName::Koornwinder, Precision::Double) => vec![1, 2, 3],
            (SuiteName::Qkz, Precision::Double) => vec![2, 3],
            (_, Precision::Extended) => vec![2],
            (SuiteName::All, _) => Vec::new(),
        }
    }
}

impl FromStr for SuiteName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "algebra" => Ok(SuiteName::Algebra),
            "matchmaker" => Ok(SuiteName::Matchmaker),
            "baxter" => Ok(SuiteName::Baxter),
            "transfer" => Ok(SuiteName::Transfer),
            "koornwinder" => Ok(SuiteName::Koornwinder),
            "qkz" => Ok(SuiteName::Qkz),
            "all" => Ok(SuiteName::All),
            other => Err(Error::Invalid(format!("unknown suite '{other}'"))),
        }
    }
}

/// Inputs of a suite run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    /// Restricts the run to one chain length.
    pub n: Option<usize>,
    pub seed: u64,
    pub precision: Precision,
    /// Base tolerance; identities with numerical derivatives or long products get 10× and 100×.
    pub tolerance: f64,
    pub samples: Option<usize>,
    /// Fixed parameters instead of sampled ones; `n` is replaced per run.
    pub params: Option<ParamSetJson>,
    /// Restricts the qKZ suite to one `m`.
    pub m: Option<i32>,
    /// Whether `ψ_n` is solved from the m-condition when `m` is given.
    pub constrain: bool,
    /// Bound on `Σ|λ_i|` in the Koornwinder suite; 3 in double and 2 in extended precision.
    pub degree: Option<i32>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            n: None,
            seed: 1,
            precision: Precision::Double,
            tolerance: ScalarPolicy::DEFAULT_TOLERANCE,
            samples: None,
            params: None,
            m: None,
            constrain: false,
            degree: None,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        ScalarPolicy::new(self.precision, self.tolerance)?;
        if self.n == Some(0) {
            return Err(Error::Invalid("n must be at least 1".into()));
        }
        if self.degree.is_some_and(|d| d < 0) {
            return Err(Error::Invalid("degree must be non-negative".into()));
        }
        if self.samples == Some(0) {
            return Err(Error::Invalid("samples must be positive".into()));
        }
        Ok(())
    }

    fn samples(&self, default: usize) -> usize {
        match (self.samples, self.precision) {
            (Some(s), _) => s,
            (None, Precision::Double) => default,
            (None, Precision::Extended) => EXTENDED_SAMPLES.min(default),
        }
    }

    fn degree(&self) -> i32 {
        match (self.degree, self.precision) {
            (Some(d), _) => d,
            (None, Precision::Double) => 3,
            (None, Precision::Extended) => 2,
        }
    }

    fn tight(&self) -> f64 {
        self.tolerance
    }

    fn loose(&self) -> f64 {
        self.tolerance * 10.0
    }

    fn derivative(&self) -> f64 {
        self.tolerance * 100.0
    }
}

/// Runs one suite, or all of them.
pub fn run_suite(name: SuiteName, config: &SuiteConfig) -> Result<CheckReport> {
    config.validate()?;
    let suites: Vec<SuiteName> = if name == SuiteName::All { SuiteName::MODULES.to_vec() } else { vec![name] };
    let mut checks = Vec::new();
    let mut prints = BTreeSet::new();
    for s in suites {
        let out = match config.precision {
            Precision::Double => run_module::<f64>(s, config)?,
            Precision::Extended => run_module::<Exact>(s, config)?,
        };
        checks.extend(out.checks);
        prints.extend(out.fingerprints);
    }
    let fingerprint = match prints.len() {
        1 => prints.into_iter().next().expect("one element"),
        _ => hex_digest(prints.into_iter().collect::<Vec<_>>().join(",").as_bytes()),
    };
    Ok(CheckReport::new(name.as_str(), checks, fingerprint, config.seed))
}

#[derive(Default)]
struct Collected {
    checks: Vec<Check>,
    fingerprints: BTreeSet<String>,
}

impl Collected {
    fn merge(&mut self, other: Collected) {
        self.checks.extend(other.checks);
        self.fingerprints.extend(other.fingerprints);
    }

    fn residuals(&mut self, prefix: &str, rs: &[Residual], tol: f64, ctx: &str) {
        for r in rs {
            self.checks.push(Check::new(format!("{prefix}.{}", r.name), r.residual, tol, ctx, r.relation.clone()));
        }
    }

    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }
}

fn run_module<R: Real>(name: SuiteName, cfg: &SuiteConfig) -> Result<Collected> {
    let ns = match cfg.n {
        Some(n) => vec![n],
        None => name.default_ns(cfg.precision),
    };
    let per_n = |f: fn(usize, &SuiteConfig) -> Result<Collected>| -> Result<Collected> {
        let parts = ns.par_iter().map(|&n| f(n, cfg)).collect::<Result<Vec<_>>>()?;
        let mut out = Collected::default();
        parts.into_iter().for_each(|p| out.merge(p));
        Ok(out)
    };
    match name {
        SuiteName::Algebra => per_n(algebra::<R>),
        SuiteName::Matchmaker => {
            let mut out = per_n(matchmaker::<R>)?;
            out.merge(matching_combinatorics()?);
            Ok(out)
        }
        SuiteName::Baxter => per_n(baxter::<R>),
        SuiteName::Transfer => per_n(transfer::<R>),
        SuiteName::Koornwinder => per_n(koornwinder::<R>),
        SuiteName::Qkz => per_n(qkz::<R>),
        SuiteName::All => Err(Error::Invalid("'all' is not a module suite".into())),
    }
}

fn ctx(n: usize) -> String {
    format!("n={n}")
}

/// Double-precision parameters for chain length `n`, from the config or sampled with `salt`.
fn base_params(cfg: &SuiteConfig, n: usize, salt: u64, constraint: Option<Constraint>) -> Result<ParamSet<f64>> {
    match &cfg.params {
        Some(j) => {
            let p = ParamSet::from_json(j, 1e-12)?.with_n(n)?;
            match constraint {
                Some(Constraint::MCondition { m }) => p.with_psin(psin_for_mcondition(&p, m)),
                None => Ok(p),
            }
        }
        None => sample_generic(cfg.seed.wrapping_add(salt.wrapping_mul(7919)), n, constraint),
    }
}

/// Converts parameters to `R`, rounding to dyadics first in exact mode.
fn lift<R: Real>(p: &ParamSet<f64>, constraint: Option<Constraint>) -> Result<ParamSet<R>> {
    if !R::EXACT {
        return Ok(p.cast());
    }
    let q: ParamSet<R> = p.rounded_dyadic(DYADIC_BITS)?.cast();
    match constraint {
        Some(Constraint::MCondition { m }) => q.with_psin(psin_for_mcondition(&q, m)),
        None => Ok(q),
    }
}

fn params<R: Real>(cfg: &SuiteConfig, n: usize, salt: u64, constraint: Option<Constraint>, out: &mut Collected) -> Result<ParamSet<R>> {
    let p = base_params(cfg, n, salt, constraint)?;
    let lifted = lift::<R>(&p, constraint)?;
    out.fingerprints.insert(lifted.fingerprint());
    Ok(lifted)
}

fn round_point<R: Real>(pt: &[Complex64]) -> Vec<Complex<R>> {
    if R::EXACT {
        let s = 2f64.powi(DYADIC_BITS);
        let r: Vec<Complex64> = pt.iter().map(|z| Complex64::new((z.re * s).round() / s, (z.im * s).round() / s)).collect();
        point_as(&r)
    } else {
        point_as(pt)
    }
}

/// Worst residuals of `f` over `samples` random points of dimension `k`, resampling near poles.
fn sampled<R: Real>(seed: u64, salt: u64, samples: usize, k: usize, f: impl Fn(&[Complex<R>]) -> Result<Vec<Residual>> + Sync) -> Result<Vec<Residual>> {
    let per = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeded_rng(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (s as u64 + 1).wrapping_mul(0xBF58_476D_1CE4_E5B9));
            with_resampling(&mut rng, k, |pt| f(&round_point::<R>(pt)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fold_worst(per))
}

fn algebra<R: Real>(n: usize, cfg: &SuiteConfig) -> Result<Collected> {
    let mut out = Collected::default();
    let c = ctx(n);
    let p = params::<R>(cfg, n, 0, None, &mut out)?;
    let spin = build_spin_rep(&p)?;
    out.residuals("algebra.rho", &check_hecke_relations(&spin.hecke), cfg.tight(), &c);
    out.residuals("algebra.rho_hat", &check_tl_relations(&spin.e, &spin.tl), cfg.tight(), &c);
    let tw = intertwiner_psi(&p)?;
    let omega = matchmaker_matrices(n, &tw.tl, &tw.beta0, &tw.beta1)?;
    out.residuals("algebra.omega", &check_tl_relations(&omega, &tw.tl), cfg.tight(), &c);
    for k in 0..PARAM_SETS as u64 {
        let pk = if k == 0 { p.clone() } else { params::<R>(cfg, n, 100 + k, None, &mut out)? };
        let ck = format!("n={n} set={k}");
        let rep = build_spin_rep(&pk)?;
        out.residuals("algebra.principal_series", &murphy_eigen_residuals(&rep.hecke, &pk), cfg.tight(), &ck);
        out.residuals("algebra.principal_series", &murphy_commutators(&rep.hecke), cfg.tight(), &ck);
        let cond = match principal_series_basis(&pk) {
            Ok(basis) => {
                let v = basis.matrix();
                let gram = &v.conj_transpose() * &v;
                condition_number(&gram.to_c64())
            }
            Err(Error::PrincipalSeries) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        out.push(Check::new("algebra.principal_series.gram_condition", cond / GRAM_CONDITION_BOUND, 1.0, ck, "cond(Gram(rho(T_w) v+)) / bound < 1"));
    }
    Ok(out)
}

fn matchmaker<R: Real>(n: usize, cfg: &SuiteConfig) -> Result<Collected> {
    let mut out = Collected::default();
    let c = ctx(n);
    let p = params::<R>(cfg, n, 0, None, &mut out)?;
    let tw = intertwiner_psi(&p)?;
    let spin = build_spin_rep(&p)?;
    out.residuals("matchmaker", &intertwining_residuals(&tw, &spin)?, cfg.tight(), &c);
    let omega = matchmaker_matrices(n, &tw.tl, &tw.beta0, &tw.beta1)?;
    out.residuals("matchmaker.omega", &check_tl_relations(&omega, &tw.tl), cfg.tight(), &c);
    out.push(Check::above("matchmaker.intertwiner.det", tw.psi.det().abs64(), DET_FLOOR, c, "|det Psi| > floor"));
    Ok(out)
}

fn matching_combinatorics() -> Result<Collected> {
    let mut out = Collected::default();
    for n in 1..=6 {
        let ms = enumerate_matchings(n)?;
        let want = -((n % 2) as i64);
        let ok = ms.iter().all(|m| lsum(m) == want);
        out.push(Check::holds("matchmaker.lsum", ok, ctx(n), "sum_(j,h) (-1)^h L_(j,h) = -(n mod 2)"));
        let lim = intertwiner_limit::<Exact>(n)?;
        out.push(Check::holds("matchmaker.limit_is_nu_map", lim == nu_basis_map(n)?, ctx(n), "Psi at psi0 = psin = 1/kappa = 0 equals the nu-basis map"));
    }
    Ok(out)
}

fn baxter<R: Real>(n: usize, cfg: &SuiteConfig) -> Result<Collected> {
    let mut out = Collected::default();
    let c = ctx(n);
    let p = params::<R>(cfg, n, 0, None, &mut out)?;
    let rep = RepHandle::spin(&p)?;
    let seed = cfg.seed ^ ((n as u64) << 32);
    let s20 = cfg.samples(20);
    let s10 = cfg.samples(10);
    let ids = sampled::<R>(seed, 1, s20, 2, |pt| baxter_identity_residuals(&rep, &pt[0], &pt[1]))?;
    out.residuals("baxter", &ids, cfg.tight(), &c);
    let ybe = sampled::<R>(seed, 2, s20, 2, |pt| ybe_re_residuals(&p, &pt[0], &pt[1]))?;
    out.residuals("baxter", &ybe, cfg.tight(), &c);
    let explicit = sampled::<R>(seed, 3, s20, 1, |pt| explicit_consistency_residuals(&p, &pt[0]))?;
    out.residuals("baxter", &explicit, cfg.tight(), &c);
    let transport = sampled::<R>(seed, 4, s10, n, |t| transport_residuals(&rep, t))?;
    out.residuals("baxter", &transport, cfg.loose(), &c);

    let bumped = p.with_upsilon0(p.upsilon0().clone() * Complex::<R>::from_c64(Complex64::new(1.1, 0.05)))?;
    let control = sampled::<R>(seed, 5, 1, 2, |pt| reflection_residuals(&p, &bumped, &pt[0], &pt[1]))?;
    let left = control.iter().find(|r| r.name == "reflection.left").map_or(0.0, |r| r.residual);
    out.push(Check::above(
        "baxter.control.perturbed_upsilon0",
        left,
        NEGATIVE_FLOOR,
        c.clone(),
        "reflection equation fails when upsilon0 differs between sides",
    ));

    let words = random_words(seed, n, cfg.samples(RANDOM_WORDS).max(1));
    let worst = words
        .par_iter()
        .enumerate()
        .map(|(k, word)| {
            let w = WeylElem::from_word(word, n);
            let r = sampled::<R>(seed, 1000 + k as u64, 1, n, |t| {
                let along = cocycle_word(&rep, word, t)?;
                let reduced = cocycle_c(&rep, &w, t)?;
                Ok(vec![Residual::new("cocycle.word_independence", "C_w(t) along any word = C_w(t) along a reduced word", residual(&along, &reduced))])
            })?;
            Ok(r[0].residual)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.push(Check::new("baxter.cocycle.word_independence", worst, cfg.loose(), c, "C_w(t) along any word = C_w(t) along a reduced word"));
    Ok(out)
}

/// Random words of length `1..=RANDOM_WORD_LEN` in the letters `0..=n`.
fn random_words(seed: u64, n: usize, count: usize) -> Vec<Vec<usize>> {
    let mut rng = seeded_rng(seed ^ 0x5EED_0F00_0D05);
    (0..count)
        .map(|_| {
            let len = rng.random_range(1..=RANDOM_WORD_LEN);
            (0..len).map(|_| rng.random_range(0..=n)).collect()
        })
        .collect()
}

fn transfer<R: Real>(n: usize, cfg: &SuiteConfig) -> Result<Collected> {
    let mut out = Collected::default();
    let c = ctx(n);
    let p = params::<R>(cfg, n, 0, None, &mut out)?;
    let seed = cfg.seed ^ ((n as u64) << 32);
    let s10 = cfg.samples(10);
    let main = sampled::<R>(seed, 11, s10, n + 2, |pt| {
        let (x, y, t) = (&pt[0], &pt[1], &pt[2..]);
        let mut v = vec![transfer_commutator(&p, x, y, t)?];
        let u = monodromy_u(&p, x, t)?;
        let uc = monodromy_u_check(&p, x, t)?;
        v.push(Residual::new("monodromy.forms", "r-form = rcheck-form of U0(x;t)", residual(&u, &uc)));
        v.extend(transfer_exchange_residuals(&p, x, t)?);
        for i in 1..=n {
            v.extend(check_transfer_vs_transport(&p, i, t)?);
        }
        Ok(v)
    })?;
    out.residuals("transfer", &main, cfg.loose(), &c);
    let crossing = sampled::<R>(seed, 12, s10, 1, |pt| {
        let mut v = vec![boundary_crossing_residual(&p, &pt[0])?];
        v.extend(crossing_residuals(&p, &pt[0])?);
        Ok(v)
    })?;
    out.residuals("transfer", &crossing, cfg.tight(), &c);
    if n <= 3 {
        for k in 0..PARAM_SETS as u64 {
            let pk = if k == 0 { p.clone() } else { params::<R>(cfg, n, 200 + k, None, &mut out)? };
            let ck = format!("n={n} set={k}");
            for r in hamiltonian_form_residuals(&pk)? {
                let tol = if r.name.contains("transfer") { cfg.derivative() } else { cfg.tight() };
                out.push(Check::from_residual(&Residual::new(format!("transfer.{}", r.name), r.relation, r.residual), tol, ck.clone()));
            }
            out.residuals("transfer", &hamiltonian_identity_residuals(&pk)?, cfg.loose(), &ck);
            if cfg.params.is_some() {
                break;
            }
        }
    }
    Ok(out)
}

fn koornwinder<R: Real>(n: usize, cfg: &SuiteConfig) -> Result<Collected> {
    let mut out = Collected::default();
    let p = params::<R>(cfg, n, 0, None, &mut out)?;
    let lambdas = lattice_ball(n, cfg.degree());
    let parts = lambdas
        .par_iter()
        .map(|lambda| {
            let mut part = Collected::default();
            let c = format!("n={n} lambda={lambda:?}");
            let kp = compute_p_detailed(lambda, &p)?;
            part.push(Check::new("koornwinder.eigen", kp.eigen_residual, cfg.loose(), c.clone(), "Y_i P = gamma_i^-1 P"));
            part.push(Check::new("koornwinder.commute", kp.commutator_residual, cfg.loose(), c.clone(), "[Y_i, Y_j] = 0 on the span"));
            let monic = kp.poly.coeff(lambda) == Complex::one();
            part.push(Check::holds("koornwinder.monic", monic, c.clone(), "coefficient of x^lambda is 1"));
            if lambda.iter().all(|&x| x == 0) {
                let unit = kp.poly == LaurentPoly::constant(n, Complex::one());
                part.push(Check::holds("koornwinder.p0_is_one", unit, c.clone(), "P_0 = 1"));
            }
            for i in 1..=n {
                let r = hecke_eigen_residual(i, &kp.poly, &p)?;
                let rel = format!("T{i} P = P / kappa_{i} iff s{i} lambda = lambda");
                if reflection_fixes(i, lambda) {
                    part.push(Check::new(format!("koornwinder.hecke_eigen.fixed.T{i}"), r, cfg.loose(), c.clone(), rel));
                } else {
                    part.push(Check::above(format!("koornwinder.hecke_eigen.moved.T{i}"), r, NEGATIVE_FLOOR, c.clone(), rel));
                }
            }
            Ok(part)
        })
        .collect::<Result<Vec<_>>>()?;
    parts.into_iter().for_each(|x| out.merge(x));
    Ok(out)
}

fn qkz<R: Real>(n: usize, cfg: &SuiteConfig) -> Result<Collected> {
    let mut out = Collected::default();
    let ms: Vec<i32> = match cfg.m {
        Some(m) => vec![m],
        None => vec![-1, 0, 1],
    };
    let samples = cfg.samples(20);
    for m in ms {
        let c = format!("n={n} m={m}");
        let constrained = cfg.m.is_none() || cfg.constrain;
        let constraint = constrained.then_some(Constraint::MCondition { m });
        let p = params::<R>(cfg, n, 300, constraint, &mut out)?;
        let sol = build_polynomial_solution(&p, m)?;
        out.push(Check::above("qkz.nontrivial", sol.max_coefficient(), 1e-6, c.clone(), "solution has a nonzero coefficient"));
        let seed = cfg.seed ^ ((n as u64) << 32) ^ ((m + 8) as u64);
        let rs = sampled::<R>(seed, 21, samples, n, |t| solution_residuals_at(&sol, t))?;
        out.residuals("qkz", &rs, cfg.loose(), &c);
        let bad = perturbed(&sol, &Complex::<R>::from_c64(Complex64::new(0.3, 0.1)));
        let rs = sampled::<R>(seed, 22, 1, n, |t| solution_residuals_at(&bad, t))?;
        let worst = rs.iter().map(|r| r.residual).fold(0.0, f64::max);
        out.push(Check::above("qkz.control.perturbed", worst, NEGATIVE_FLOOR, c.clone(), "a perturbed solution violates the equations"));
        let generic = params::<R>(cfg, n, 400, None, &mut out)?;
        if cfg.params.is_none() {
            let refused = matches!(build_polynomial_solution(&generic, m), Err(Error::ConditionUnsatisfied(_)));
            out.push(Check::holds("qkz.refusal", refused, c, "builder refuses parameters violating the m-condition"));
        }
    }
    Ok(out)
}

/// Report for a stored solution: worst transport and invariance residuals over the sampled points.
pub fn qkz_verify_report(sol: &KZSolution<f64>, cfg: &SuiteConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let c = format!("n={} construction={}", sol.rep.n(), sol.metadata.construction);
    let rs = verify_solution(sol, cfg.samples(20), cfg.seed)?;
    let checks =
        rs.iter().map(|r| Check::new(format!("qkz.{}", r.name.trim_start_matches("qkz.")), r.residual, cfg.loose(), c.clone(), r.relation.clone())).collect();
    Ok(CheckReport::new("qkz.verify", checks, sol.rep.params.fingerprint(), cfg.seed))
}

/// Rounds parameters to dyadics and converts to exact rationals.
pub fn exact_params(p: &ParamSet<f64>) -> Result<ParamSet<Exact>> {
    Ok(p.rounded_dyadic(DYADIC_BITS)?.cast())
}

/// Convenience for tests and the command line: `Mat<f64>` of any scalar type.
pub fn as_f64<R: Real>(m: &Mat<R>) -> Mat<f64> {
    m.to_c64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize) -> SuiteConfig {
        SuiteConfig { n: Some(n), samples: Some(3), ..SuiteConfig::default() }
    }

    #[test]
    fn algebra_n2_passes() {
        let r = run_suite(SuiteName::Algebra, &cfg(2)).unwrap();
        assert!(r.pass(), "{:?}", r.failures().collect::<Vec<_>>());
        assert!(r.checks.iter().any(|c| c.name.starts_with("algebra.rho.")));
    }

    #[test]
    fn suites_pass_small() {
        for s in [SuiteName::Matchmaker, SuiteName::Baxter, SuiteName::Transfer, SuiteName::Qkz] {
            let r = run_suite(s, &cfg(2)).unwrap();
            assert!(r.pass(), "{s:?}: {:?}", r.failures().collect::<Vec<_>>());
        }
        let r = run_suite(SuiteName::Koornwinder, &cfg(1)).unwrap();
        assert!(r.pass(), "{:?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn deterministic_reports() {
        let a = run_suite(SuiteName::Baxter, &cfg(2)).unwrap().to_json_string();
        let b = run_suite(SuiteName::Baxter, &cfg(2)).unwrap().to_json_string();
        assert_eq!(a, b);
    }

    #[test]
    fn qkz_without_constraint_refuses() {
        let c = SuiteConfig { m: Some(1), ..cfg(2) };
        match run_suite(SuiteName::Qkz, &c) {
            Err(e @ Error::ConditionUnsatisfied(_)) => assert_eq!(e.exit_code(), 2),
            other => panic!("expected refusal, got {other:?}"),
        }
        let c = SuiteConfig { m: Some(1), constrain: true, ..cfg(2) };
        assert!(run_suite(SuiteName::Qkz, &c).unwrap().pass());
    }

    #[test]
    fn extended_algebra_exact() {
        let c = SuiteConfig { precision: Precision::Extended, ..cfg(2) };
        let r = run_suite(SuiteName::Algebra, &c).unwrap();
        assert!(r.pass());
        assert!(r.checks.iter().filter(|c| c.name.starts_with("algebra.rho")).all(|c| c.residual == 0.0));
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(SuiteConfig { tolerance: -1.0, ..SuiteConfig::default() }.validate().is_err());
        assert!("bogus".parse::<SuiteName>().is_err());
        let j: SuiteConfig = serde_json::from_str(r#"{"n": 3, "seed": 7}"#).unwrap();
        assert_eq!((j.n, j.seed, j.precision), (Some(3), 7, Precision::Double));
    }
}
