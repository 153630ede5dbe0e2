use std::f64::consts::PI;

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::koornwinder::gamma_lambda;
use crate::numerics::{CxExt, Real};

/// The seven model parameters with the chosen square roots of `q` and `κ`.
///
/// `q_sqrt` and `kappa_sqrt` are stored; `q` and `κ` are their squares.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSet<R: Real = f64> {
    n: usize,
    q_sqrt: Complex<R>,
    q: Complex<R>,
    kappa0: Complex<R>,
    kappa_sqrt: Complex<R>,
    kappa: Complex<R>,
    kappan: Complex<R>,
    upsilon0: Complex<R>,
    upsilonn: Complex<R>,
    psi0: Complex<R>,
    psin: Complex<R>,
}

/// Relations imposed on sampled parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    /// `ψ₀ψ_n q^m = (κ₀κ_nκ^{n−1})^{η(m)}`, solved for `ψ_n`.
    MCondition { m: i32 },
}

/// `η(x) = 1` for `x > 0`, `−1` otherwise.
pub fn eta(x: i64) -> i64 {
    if x > 0 {
        1
    } else {
        -1
    }
}

impl<R: Real> ParamSet<R> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        q_sqrt: Complex<R>,
        kappa0: Complex<R>,
        kappa_sqrt: Complex<R>,
        kappan: Complex<R>,
        upsilon0: Complex<R>,
        upsilonn: Complex<R>,
        psi0: Complex<R>,
        psin: Complex<R>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("n must be at least 1".into()));
        }
        let named = [
            ("q_sqrt", &q_sqrt),
            ("kappa0", &kappa0),
            ("kappa_sqrt", &kappa_sqrt),
            ("kappan", &kappan),
            ("upsilon0", &upsilon0),
            ("upsilonn", &upsilonn),
            ("psi0", &psi0),
            ("psin", &psin),
        ];
        if let Some((name, _)) = named.iter().find(|(_, v)| v.is_zero()) {
            return Err(Error::Invalid(format!("{name} must be nonzero")));
        }
        Ok(ParamSet {
            n,
            q: q_sqrt.clone() * q_sqrt.clone(),
            q_sqrt,
            kappa0,
            kappa: kappa_sqrt.clone() * kappa_sqrt.clone(),
            kappa_sqrt,
            kappan,
            upsilon0,
            upsilonn,
            psi0,
            psin,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn q_sqrt(&self) -> &Complex<R> {
        &self.q_sqrt
    }
    pub fn q(&self) -> &Complex<R> {
        &self.q
    }
    pub fn kappa0(&self) -> &Complex<R> {
        &self.kappa0
    }
    pub fn kappa(&self) -> &Complex<R> {
        &self.kappa
    }
    pub fn kappa_sqrt(&self) -> &Complex<R> {
        &self.kappa_sqrt
    }
    pub fn kappan(&self) -> &Complex<R> {
        &self.kappan
    }
    pub fn upsilon0(&self) -> &Complex<R> {
        &self.upsilon0
    }
    pub fn upsilonn(&self) -> &Complex<R> {
        &self.upsilonn
    }
    pub fn psi0(&self) -> &Complex<R> {
        &self.psi0
    }
    pub fn psin(&self) -> &Complex<R> {
        &self.psin
    }

    /// `κ_j`: `κ₀` for `j = 0`, `κ_n` for `j = n`, `κ` otherwise.
    pub fn kappa_j(&self, j: usize) -> &Complex<R> {
        if j == 0 {
            &self.kappa0
        } else if j == self.n {
            &self.kappan
        } else {
            &self.kappa
        }
    }

    /// Same parameters with a different number of sites.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("n must be at least 1".into()));
        }
        Ok(ParamSet { n, ..self.clone() })
    }

    pub fn with_psin(&self, psin: Complex<R>) -> Result<Self> {
        if psin.is_zero() {
            return Err(Error::Invalid("psin must be nonzero".into()));
        }
        Ok(ParamSet { psin, ..self.clone() })
    }

    pub fn with_upsilon0(&self, upsilon0: Complex<R>) -> Result<Self> {
        if upsilon0.is_zero() {
            return Err(Error::Invalid("upsilon0 must be nonzero".into()));
        }
        Ok(ParamSet { upsilon0, ..self.clone() })
    }

    /// Same parameters with `q^{1/2}` replaced, e.g. by 1 for the `q = 1` specialization.
    pub fn with_q_sqrt(&self, q_sqrt: Complex<R>) -> Result<Self> {
        ParamSet::new(
            self.n,
            q_sqrt,
            self.kappa0.clone(),
            self.kappa_sqrt.clone(),
            self.kappan.clone(),
            self.upsilon0.clone(),
            self.upsilonn.clone(),
            self.psi0.clone(),
            self.psin.clone(),
        )
    }

    /// `κ`'s and `υ`'s replaced by their inverses; `q`, `ψ` unchanged.
    pub fn inverted(&self) -> Self {
        ParamSet {
            n: self.n,
            q_sqrt: self.q_sqrt.clone(),
            q: self.q.clone(),
            kappa0: self.kappa0.recip(),
            kappa_sqrt: self.kappa_sqrt.recip(),
            kappa: self.kappa.recip(),
            kappan: self.kappan.recip(),
            upsilon0: self.upsilon0.recip(),
            upsilonn: self.upsilonn.recip(),
            psi0: self.psi0.clone(),
            psin: self.psin.clone(),
        }
    }

    /// Conversion to another real field through double precision.
    pub fn cast<R2: Real>(&self) -> ParamSet<R2> {
        let c = |z: &Complex<R>| Complex::<R2>::from_c64(z.to_c64());
        ParamSet {
            n: self.n,
            q_sqrt: c(&self.q_sqrt),
            q: c(&self.q_sqrt) * c(&self.q_sqrt),
            kappa0: c(&self.kappa0),
            kappa_sqrt: c(&self.kappa_sqrt),
            kappa: c(&self.kappa_sqrt) * c(&self.kappa_sqrt),
            kappan: c(&self.kappan),
            upsilon0: c(&self.upsilon0),
            upsilonn: c(&self.upsilonn),
            psi0: c(&self.psi0),
            psin: c(&self.psin),
        }
    }

    pub fn to_json(&self) -> ParamSetJson {
        let p = |z: &Complex<R>| {
            let z = z.to_c64();
            [z.re, z.im]
        };
        ParamSetJson {
            n: self.n,
            q_sqrt: p(&self.q_sqrt),
            kappa0: p(&self.kappa0),
            kappa: p(&self.kappa),
            kappan: p(&self.kappan),
            upsilon0: p(&self.upsilon0),
            upsilonn: p(&self.upsilonn),
            psi0: p(&self.psi0),
            psin: p(&self.psin),
            kappa_sqrt: p(&self.kappa_sqrt),
        }
    }

    /// Reads a serialized parameter set; `kappa` must agree with `kappa_sqrt²` to `tol`.
    pub fn from_json(j: &ParamSetJson, tol: f64) -> Result<Self> {
        let c = |a: [f64; 2]| Complex::<R>::from_c64(Complex64::new(a[0], a[1]));
        let p = ParamSet::new(j.n, c(j.q_sqrt), c(j.kappa0), c(j.kappa_sqrt), c(j.kappan), c(j.upsilon0), c(j.upsilonn), c(j.psi0), c(j.psin))?;
        let given = Complex64::new(j.kappa[0], j.kappa[1]);
        let derived = p.kappa.to_c64();
        if (given - derived).norm() > tol * given.norm().max(1.0) {
            return Err(Error::Invalid(format!("kappa_sqrt^2 = {derived} does not match kappa = {given}")));
        }
        Ok(p)
    }

    /// SHA-256 of the canonical JSON serialization, hex encoded.
    pub fn fingerprint(&self) -> String {
        let text = serde_json::to_string(&self.to_json()).expect("parameter JSON");
        hex_digest(text.as_bytes())
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl ParamSet<f64> {
    /// Components rounded to multiples of `2^-bits`, keeping rational conversions small.
    pub fn rounded_dyadic(&self, bits: i32) -> Result<Self> {
        let s = 2f64.powi(bits);
        let r = |z: &Complex64| Complex64::new((z.re * s).round() / s, (z.im * s).round() / s);
        ParamSet::new(
            self.n,
            r(&self.q_sqrt),
            r(&self.kappa0),
            r(&self.kappa_sqrt),
            r(&self.kappan),
            r(&self.upsilon0),
            r(&self.upsilonn),
            r(&self.psi0),
            r(&self.psin),
        )
    }
}

/// Serialized [`ParamSet`]: each scalar as `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSetJson {
    pub n: usize,
    pub q_sqrt: [f64; 2],
    pub kappa0: [f64; 2],
    pub kappa: [f64; 2],
    pub kappan: [f64; 2],
    pub upsilon0: [f64; 2],
    pub upsilonn: [f64; 2],
    pub psi0: [f64; 2],
    pub psin: [f64; 2],
    pub kappa_sqrt: [f64; 2],
}

/// `ψ_n` solving the m-condition for the other parameters.
pub fn psin_for_mcondition<R: Real>(p: &ParamSet<R>, m: i32) -> Complex<R> {
    let base = p.kappa0().clone() * p.kappan().clone() * p.kappa().ipow(p.n() as i64 - 1);
    base.ipow(eta(i64::from(m))) / (p.psi0().clone() * p.q().ipow(i64::from(m)))
}

/// Denominators whose vanishing breaks some construction, evaluated at a spectral
/// parameter `x` and a point `t`.
pub fn structural_denominators<R: Real>(p: &ParamSet<R>, x: &Complex<R>, t: &[Complex<R>]) -> Vec<(String, Complex<R>)> {
    let one = Complex::<R>::one();
    let k = p.kappa().clone();
    let k2 = k.clone() * k.clone();
    let kinv = k.recip();
    let q = p.q().clone();
    let n = p.n();
    let mut out: Vec<(String, Complex<R>)> = Vec::new();
    let mut push = |name: &str, v: Complex<R>| out.push((name.to_string(), v));

    push("kappa + 1/kappa", k.clone() + kinv.clone());
    push("kappa - 1/kappa", k.clone() - kinv.clone());
    push("1 + kappa^2", one.clone() + k2.clone());
    for (tag, kj, uj) in [("0", p.kappa0(), p.upsilon0()), ("n", p.kappan(), p.upsilonn())] {
        let a = kj.clone() * uj.clone();
        let b = kj.clone() / uj.clone();
        push(&format!("kappa/kappa_{tag} + kappa_{tag}/kappa"), k.clone() / kj.clone() + kj.clone() / k.clone());
        push(&format!("(1 - kappa_{tag} upsilon_{tag})(1 + kappa_{tag}/upsilon_{tag})"), (one.clone() - a.clone()) * (one.clone() + b.clone()));
        push(&format!("k-matrix denominator ({tag}) at x"), (one.clone() - a.clone() * x.clone()) * (one.clone() + b.clone() * x.clone()));
        push(
            &format!("k-matrix denominator ({tag}) at kappa^2 x"),
            (one.clone() - a.clone() * k2.clone() * x.clone()) * (one.clone() + b.clone() * k2.clone() * x.clone()),
        );
        push(&format!("(1 - kappa_{tag} upsilon_{tag} q^(1/2)/t)(1 + ...) at t"), {
            let s = p.q_sqrt().clone() / t[0].clone();
            (one.clone() - a.clone() * s.clone()) * (one.clone() + b.clone() * s)
        });
    }
    let psi = p.psi0().clone() * p.psin().clone();
    let (k0, kn) = (p.kappa0().clone(), p.kappan().clone());
    if n % 2 == 1 {
        push("1 + kappa0/kappan psi0 psin", one.clone() + k0.clone() / kn.clone() * psi.clone());
        push("1 + kappan/kappa0 psi0 psin", one.clone() + kn.clone() / k0.clone() * psi.clone());
    } else {
        push("1 - kappa0 kappan/kappa psi0 psin", one.clone() - k0.clone() * kn.clone() / k.clone() * psi.clone());
        push("1 - kappa/(kappa0 kappan) psi0 psin", one.clone() - k.clone() / (k0.clone() * kn.clone()) * psi.clone());
    }
    let th = p.kappa_sqrt().recip();
    let kb = k_bar_trace(p, &(k2.clone()), &th);
    push("Tr(theta kbar(kappa^2) theta)", kb);
    push("1 - kappa^2 x", one.clone() - k2.clone() * x.clone());
    push("1 - kappa^2 x^2", one.clone() - k2.clone() * x.clone() * x.clone());
    push("1 - q/t_1^2", one.clone() - q.clone() / (t[0].clone() * t[0].clone()));
    push("1 - t_n^2", one.clone() - t[n - 1].clone() * t[n - 1].clone());
    for i in 0..n.saturating_sub(1) {
        push("1 - t_i/t_(i+1)", one.clone() - t[i].clone() / t[i + 1].clone());
        push("1 - kappa^2 t_i/t_(i+1)", one.clone() - k2.clone() * t[i].clone() / t[i + 1].clone());
    }
    out
}

fn k_bar_trace<R: Real>(p: &ParamSet<R>, x: &Complex<R>, theta_inv: &Complex<R>) -> Complex<R> {
    let one = Complex::<R>::one();
    let (k0, u0) = (p.kappa0().clone(), p.upsilon0().clone());
    let x2 = x.clone() * x.clone();
    let d = (one.clone() - k0.clone() * u0.clone() * x.clone()) * (one.clone() + k0.clone() / u0.clone() * x.clone());
    let a = (k0.recip() - k0.clone()) * x2 + (u0.recip() - u0.clone()) * x.clone();
    let b = k0.recip() - k0.clone() + (u0.recip() - u0.clone()) * x.clone();
    let theta = p.kappa_sqrt().clone();
    k0 / d * (a * theta_inv.clone() * theta_inv.clone() + b * theta.clone() * theta)
}

fn random_scalar(rng: &mut ChaCha8Rng) -> Complex64 {
    let r: f64 = rng.random_range(0.6..1.6);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    Complex64::from_polar(r, phi)
}

/// Random point of the annulus `0.6 ≤ |z| ≤ 1.6`.
pub fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| random_scalar(rng)).collect()
}

/// Seeded generator used throughout for reproducible sampling.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const RETRY_BUDGET: usize = 200;
const DENOMINATOR_FLOOR: f64 = 1e-3;
const PROBE_POINTS: usize = 32;
const GAMMA_DEGREE: i32 = 4;
const GAMMA_SEPARATION: f64 = 1e-3;

/// Deterministic generic parameter set for `(seed, n, constraint)`.
pub fn sample_generic(seed: u64, n: usize, constraint: Option<Constraint>) -> Result<ParamSet<f64>> {
    if n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    let mut rng = seeded_rng(seed);
    let mut last = String::new();
    for _ in 0..RETRY_BUDGET {
        let v: Vec<Complex64> = (0..8).map(|_| random_scalar(&mut rng)).collect();
        let kappa_sqrt = v[2].sqrt();
        let mut p = ParamSet::new(n, v[0], v[1], kappa_sqrt, v[3], v[4], v[5], v[6], v[7])?;
        if let Some(Constraint::MCondition { m }) = constraint {
            p = p.with_psin(psin_for_mcondition(&p, m))?;
        }
        match genericity_violation(&p, &mut rng) {
            None => return Ok(p),
            Some(cond) => last = cond,
        }
    }
    Err(Error::NonGenericSampling { condition: last })
}

/// First genericity condition violated by `p`, if any.
pub fn genericity_violation(p: &ParamSet<f64>, rng: &mut ChaCha8Rng) -> Option<String> {
    if (p.q().norm() - 1.0).abs() <= 0.05 {
        return Some("|q| within 0.05 of 1".into());
    }
    for _ in 0..PROBE_POINTS {
        let x = random_scalar(rng);
        let t = random_point(rng, p.n());
        for (name, v) in structural_denominators(p, &x, &t) {
            if v.norm() <= DENOMINATOR_FLOOR {
                return Some(format!("denominator '{name}' below {DENOMINATOR_FLOOR}"));
            }
        }
    }
    gamma_collision(p)
}

fn gamma_collision(p: &ParamSet<f64>) -> Option<String> {
    let lambdas = lattice_ball(p.n(), GAMMA_DEGREE);
    let gammas: Vec<Vec<Complex64>> = lambdas.iter().map(|l| gamma_lambda(l, p).gamma).collect();
    for a in 0..gammas.len() {
        for b in a + 1..gammas.len() {
            let d = gammas[a].iter().zip(&gammas[b]).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            let s = gammas[a].iter().chain(&gammas[b]).map(|z| z.norm()).fold(0.0, f64::max);
            if d <= GAMMA_SEPARATION * s {
                return Some(format!("gamma_{:?} and gamma_{:?} not separated", lambdas[a], lambdas[b]));
            }
        }
    }
    None
}

/// All `λ ∈ ℤⁿ` with `Σ|λ_i| ≤ d`, in lexicographic order.
pub fn lattice_ball(n: usize, d: i32) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    let mut cur = vec![0; n];
    fn rec(i: usize, left: i32, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in -left..=left {
            cur[i] = v;
            rec(i + 1, left - v.abs(), cur, out);
        }
        cur[i] = 0;
    }
    rec(0, d, &mut cur, &mut out);
    out
}
