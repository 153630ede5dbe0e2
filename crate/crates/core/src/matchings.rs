//! Two-boundary non-crossing perfect matchings, the matchmaker representation, and the
//! explicit intertwiner with the spin representation.
//!
//! Sites are `0, 1, …, n, n+1`; sites `0` and `n+1` are the boundaries and may carry any
//! number of arcs. Matchings are indexed by their sign string `ν(𝔭)` read as a binary
//! number with `+ ↦ 0`, which makes the index agree with the spin basis.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_complex::Complex;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{residual, Mat};
use crate::numerics::{CxExt, ParamSet, Real};
use crate::report::Residual;
use crate::spinrep::{boundary_weight, delta_from_kappa, SpinRep, TLParams};

/// Largest `n` for which all matchings are enumerated.
pub const MATCHING_CAP: usize = 10;

fn pty(i: usize) -> usize {
    i % 2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn bit(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Parses `"(+,+,-)"`, `"++-"` or `"+,+,-"`.
pub fn parse_nu(s: &str) -> Result<Vec<Sign>> {
    let body = s.trim().trim_start_matches('(').trim_end_matches(')');
    let signs: Vec<Sign> = body
        .chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(|c| match c {
            '+' => Ok(Sign::Plus),
            '-' => Ok(Sign::Minus),
            other => Err(Error::Invalid(format!("unexpected character '{other}' in sign string"))),
        })
        .collect::<Result<_>>()?;
    if signs.is_empty() {
        return Err(Error::Invalid("empty sign string".into()));
    }
    Ok(signs)
}

/// Formats signs as `"(+,+,-)"`.
pub fn format_nu(signs: &[Sign]) -> String {
    format!("({})", signs.iter().map(|s| s.symbol()).join(","))
}

/// Binary index of a sign string, first sign most significant.
pub fn nu_index(signs: &[Sign]) -> usize {
    signs.iter().fold(0, |acc, s| (acc << 1) | s.bit())
}

/// Unordered arcs of a two-boundary non-crossing perfect matching, each stored as `(a, b)`
/// with `a < b`, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Matching {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl Matching {
    /// Validates perfectness on the inner sites, non-crossing, and absence of `{0, n+1}`.
    pub fn new(n: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut pairs: Vec<(usize, usize)> = pairs.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        pairs.sort_unstable();
        let mut seen = vec![0usize; n + 2];
        for &(a, b) in &pairs {
            if b > n + 1 || a == b {
                return Err(Error::Invalid(format!("arc ({a},{b}) is not a pair of sites in 0..={}", n + 1)));
            }
            if a == 0 && b == n + 1 {
                return Err(Error::Invalid("the boundaries may not be matched to each other".into()));
            }
            seen[a] += 1;
            seen[b] += 1;
        }
        if let Some(i) = (1..=n).find(|&i| seen[i] != 1) {
            return Err(Error::Invalid(format!("site {i} is matched {} times", seen[i])));
        }
        for (&(i, j), &(k, l)) in pairs.iter().tuple_combinations() {
            let crosses = |i: usize, j: usize, k: usize, l: usize| i < k && k < j && j < l;
            if crosses(i, j, k, l) || crosses(k, l, i, j) {
                return Err(Error::Invalid(format!("arcs ({i},{j}) and ({k},{l}) cross")));
            }
        }
        Ok(Matching { n, pairs })
    }

    fn from_sorted(n: usize, mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        Matching { n, pairs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// `m_i(𝔭)`, the partner of the inner site `i`.
    pub fn mate(&self, i: usize) -> usize {
        self.pairs
            .iter()
            .find_map(|&(a, b)| {
                if a == i {
                    Some(b)
                } else if b == i {
                    Some(a)
                } else {
                    None
                }
            })
            .expect("inner site is matched")
    }

    /// Index array `m_1..m_n` (entry 0 unused).
    fn mates(&self) -> Vec<usize> {
        let mut m = vec![0; self.n + 2];
        for &(a, b) in &self.pairs {
            if (1..=self.n).contains(&a) {
                m[a] = b;
            }
            if (1..=self.n).contains(&b) {
                m[b] = a;
            }
        }
        m
    }

    /// `ν(𝔭)`: `α_i = +` iff `m_i(𝔭) > i`.
    pub fn nu(&self) -> Vec<Sign> {
        let m = self.mates();
        (1..=self.n).map(|i| if m[i] > i { Sign::Plus } else { Sign::Minus }).collect()
    }

    /// `ν⁻¹`: a `−` closes the nearest open `+`, or else attaches to the left boundary;
    /// open `+`'s attach to the right boundary.
    pub fn from_nu(signs: &[Sign]) -> Self {
        let n = signs.len();
        let mut stack = Vec::new();
        let mut pairs = Vec::with_capacity(n);
        for (k, s) in signs.iter().enumerate() {
            let i = k + 1;
            match s {
                Sign::Plus => stack.push(i),
                Sign::Minus => pairs.push((stack.pop().unwrap_or(0), i)),
            }
        }
        pairs.extend(stack.into_iter().map(|i| (i, n + 1)));
        Self::from_sorted(n, pairs)
    }

    /// `L_{j,h}(𝔭)` as `[L_{0,0}, L_{0,1}, L_{n,0}, L_{n,1}]`.
    pub fn boundary_counts(&self) -> [usize; 4] {
        let mut l = [0; 4];
        for &(a, b) in &self.pairs {
            if a == 0 {
                l[pty(b)] += 1;
            }
            if b == self.n + 1 {
                l[2 + pty(a)] += 1;
            }
        }
        l
    }

    /// All `2^{#arcs}` orientations.
    pub fn orientations(&self) -> Vec<OrientedMatching> {
        let k = self.pairs.len();
        (0..1usize << k)
            .map(|mask| OrientedMatching {
                n: self.n,
                arcs: self.pairs.iter().enumerate().map(|(idx, &(a, b))| if (mask >> (k - 1 - idx)) & 1 == 0 { (a, b) } else { (b, a) }).collect(),
            })
            .collect()
    }

    fn replace(&self, sites: &[usize], new: &[(usize, usize)]) -> Self {
        let mut pairs: Vec<(usize, usize)> = self.pairs.iter().copied().filter(|(a, b)| !sites.contains(a) && !sites.contains(b)).collect();
        pairs.extend(new.iter().map(|&(a, b)| (a.min(b), a.max(b))));
        Self::from_sorted(self.n, pairs)
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.pairs.iter().map(|(a, b)| format!("{{{a},{b}}}")).join(","))
    }
}

/// Σ_{j,h} (−1)^h L_{j,h}(𝔭).
pub fn lsum(m: &Matching) -> i64 {
    let l = m.boundary_counts();
    l[0] as i64 - l[1] as i64 + l[2] as i64 - l[3] as i64
}

/// All matchings for `n` sites, in `ν`-lexicographic order with `+` first.
pub fn enumerate_matchings(n: usize) -> Result<Vec<Matching>> {
    if n == 0 || n > MATCHING_CAP {
        return Err(Error::SizeCap(format!("matchings are enumerated for 1 <= n <= {MATCHING_CAP}")));
    }
    let out: Vec<Matching> = (0..1usize << n)
        .map(|idx| {
            let signs: Vec<Sign> = (0..n).map(|k| if (idx >> (n - 1 - k)) & 1 == 0 { Sign::Plus } else { Sign::Minus }).collect();
            Matching::from_nu(&signs)
        })
        .collect();
    for (idx, m) in out.iter().enumerate() {
        if nu_index(&m.nu()) != idx {
            return Err(Error::Defect(format!("nu(nu^-1) differs from the identity at index {idx}")));
        }
    }
    Ok(out)
}

/// A matching with each arc given a direction `(from, to)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrientedMatching {
    n: usize,
    arcs: Vec<(usize, usize)>,
}

/// Counters attached to an oriented matching.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientationStats {
    /// `or(𝔭⃗)`.
    pub or: usize,
    pub n00: usize,
    pub n01: usize,
    pub nn0: usize,
    pub nn1: usize,
}

impl OrientedMatching {
    pub fn new(n: usize, arcs: Vec<(usize, usize)>) -> Result<Self> {
        Matching::new(n, arcs.clone())?;
        Ok(OrientedMatching { n, arcs })
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    /// The underlying unoriented matching.
    pub fn forget(&self) -> Matching {
        Matching::from_sorted(self.n, self.arcs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect())
    }

    /// Counters computed in a single pass over the arcs.
    pub fn stats(&self) -> OrientationStats {
        let n = self.n;
        let mut s = OrientationStats { or: 0, n00: 0, n01: 0, nn0: 0, nn1: 0 };
        let mut backwards = 0;
        for &(x, y) in &self.arcs {
            if y == 0 && (1..=n).contains(&x) {
                if pty(x) == 0 {
                    s.n00 += 1;
                } else {
                    s.n01 += 1;
                }
            }
            if x == n + 1 && (1..=n).contains(&y) {
                if pty(n + 1 - y) == 0 {
                    s.nn0 += 1;
                } else {
                    s.nn1 += 1;
                }
            }
            if (1..=n).contains(&x) && (1..=n).contains(&y) && y < x {
                backwards += 1;
            }
        }
        s.or = backwards + s.n00 + s.nn0;
        s
    }

    /// `r_i(𝔭⃗)`: `+` if the arc at `i` points away from `i`.
    pub fn directions(&self) -> Vec<Sign> {
        let mut r = vec![Sign::Plus; self.n];
        for &(x, y) in &self.arcs {
            if (1..=self.n).contains(&x) {
                r[x - 1] = Sign::Plus;
            }
            if (1..=self.n).contains(&y) {
                r[y - 1] = Sign::Minus;
            }
        }
        r
    }

    /// Spin basis index of `v(𝔭⃗)`.
    pub fn spin_index(&self) -> usize {
        nu_index(&self.directions())
    }
}

/// [`OrientedMatching::stats`] recomputed by scanning sites instead of arcs.
pub fn orientation_stats_by_sites(om: &OrientedMatching) -> OrientationStats {
    let n = om.n;
    let target = |i: usize| om.arcs.iter().find(|&&(x, _)| x == i).map(|&(_, y)| y);
    let source_count = |to: usize, h: usize, par: &dyn Fn(usize) -> usize| (1..=n).filter(|&i| par(i) == h && om.arcs.contains(&(i, to))).count();
    let n00 = source_count(0, 0, &pty);
    let n01 = source_count(0, 1, &pty);
    let from_right = |h: usize| (1..=n).filter(|&i| pty(n + 1 - i) == h && om.arcs.contains(&(n + 1, i))).count();
    let (nn0, nn1) = (from_right(0), from_right(1));
    let backwards = (1..=n).filter(|&j| matches!(target(j), Some(i) if (1..j).contains(&i))).count();
    OrientationStats { or: backwards + n00 + nn0, n00, n01, nn0, nn1 }
}

/// Finitely supported vector on matchings.
pub type MatchVec<R = f64> = BTreeMap<Matching, Complex<R>>;

/// Image of a single matching under `e_j`: a scalar and a matching.
fn act_basis<R: Real>(j: usize, m: &Matching, tl: &TLParams<R>, beta: &[Complex<R>; 2]) -> (Complex<R>, Matching) {
    let n = m.n;
    let mates = m.mates();
    let one = Complex::<R>::one();
    let pow = |d: &Complex<R>, e: usize| if e == 0 { one.clone() } else { d.clone() };
    if (1..n).contains(&j) {
        let i = j;
        let (mi, mi1) = (mates[i], mates[i + 1]);
        if mi == i + 1 {
            return (tl.delta().clone(), m.clone());
        }
        let base = m.replace(&[i, i + 1], &[(i, i + 1)]);
        if mi == 0 && mi1 == 0 {
            return (pow(tl.delta0(), pty(i - 1)), base);
        }
        if mi == n + 1 && mi1 == n + 1 {
            return (pow(tl.deltan(), pty(n + 1 - i)), base);
        }
        if mi == 0 && mi1 == n + 1 {
            return (beta[pty(i)].clone(), base);
        }
        return (one, m.replace(&[i, i + 1], &[(i, i + 1), (mi, mi1)]));
    }
    if j == 0 {
        let m1 = mates[1];
        if m1 == 0 {
            return (tl.delta0().clone(), m.clone());
        }
        if m1 == n + 1 {
            return (beta[0].clone(), m.replace(&[1], &[(0, 1)]));
        }
        return (one, m.replace(&[1], &[(0, 1), (0, m1)]));
    }
    let mn = mates[n];
    if mn == n + 1 {
        return (tl.deltan().clone(), m.clone());
    }
    if mn == 0 {
        return (beta[pty(n)].clone(), m.replace(&[n], &[(n, n + 1)]));
    }
    (one, m.replace(&[n], &[(n, n + 1), (mn, n + 1)]))
}

/// `ω(e_j)v` for the matchmaker representation with boundary weights `β₀, β₁`.
pub fn matchmaker_apply<R: Real>(j: usize, v: &MatchVec<R>, tl: &TLParams<R>, beta0: &Complex<R>, beta1: &Complex<R>) -> MatchVec<R> {
    let beta = [beta0.clone(), beta1.clone()];
    let mut out: MatchVec<R> = BTreeMap::new();
    for (m, c) in v {
        assert!(j <= m.n, "generator index");
        let (s, m2) = act_basis(j, m, tl, &beta);
        let slot = out.entry(m2).or_insert_with(Complex::zero);
        *slot = slot.clone() + s * c.clone();
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Matrices of `ω(e_0), …, ω(e_n)` in the enumerated basis.
pub fn matchmaker_matrices<R: Real>(n: usize, tl: &TLParams<R>, beta0: &Complex<R>, beta1: &Complex<R>) -> Result<Vec<Mat<R>>> {
    let ms = enumerate_matchings(n)?;
    let beta = [beta0.clone(), beta1.clone()];
    let dim = ms.len();
    Ok((0..=n)
        .map(|j| {
            let mut mat = Mat::zeros(dim, dim);
            for (c, m) in ms.iter().enumerate() {
                let (s, m2) = act_basis(j, m, tl, &beta);
                let r = nu_index(&m2.nu());
                mat[(r, c)] = mat[(r, c)].clone() + s;
            }
            mat
        })
        .collect())
}

fn beta_factors<R: Real>(p: &ParamSet<R>) -> (Complex<R>, Complex<R>) {
    let one = Complex::<R>::one();
    let (k, k0, kn) = (p.kappa().clone(), p.kappa0().clone(), p.kappan().clone());
    let pp = p.psi0().clone() * p.psin().clone();
    if p.n() % 2 == 1 {
        (one.clone() + k0.clone() / kn.clone() * pp.clone(), one + kn / k0 * pp)
    } else {
        (one.clone() - k0.clone() * kn.clone() / k.clone() * pp.clone(), one - k / (k0 * kn) * pp)
    }
}

/// The product `β₀β₁` compatible with `(κ, ψ₀, ψ_n)`.
pub fn beta_product<R: Real>(p: &ParamSet<R>) -> Result<Complex<R>> {
    let k = p.kappa();
    let den = boundary_weight(k, p.kappa0()) * boundary_weight(k, p.kappan());
    if den.abs64() <= 1e-14 || den.is_zero() {
        return Err(Error::ParameterSingularity("(kappa/kappa0 + kappa0/kappa)(kappa/kappan + kappan/kappa) vanishes".into()));
    }
    let (f1, f2) = beta_factors(p);
    let num = f1 * f2;
    if num.is_zero() || num.abs64() <= 1e-14 {
        return Err(Error::NonGeneric("beta0 beta1 vanishes".into()));
    }
    Ok(num / den / (p.psi0().clone() * p.psin().clone()))
}

/// The weights `M_{j,h}`, with `M_{0,0} = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MGauge<R: Real = f64> {
    pub m00: Complex<R>,
    pub m01: Complex<R>,
    pub mn0: Complex<R>,
    pub mn1: Complex<R>,
}

impl<R: Real> MGauge<R> {
    /// `M(𝔭) = Π M_{j,h}^{L_{j,h}(𝔭)}`.
    pub fn weight(&self, m: &Matching) -> Complex<R> {
        let l = m.boundary_counts();
        [&self.m00, &self.m01, &self.mn0, &self.mn1].iter().zip(l).fold(Complex::one(), |acc, (w, e)| acc * w.ipow(e as i64))
    }
}

/// Solves the `M`-relations for `M_{0,0} = 1` and a given `β₀`.
pub fn m_gauge<R: Real>(p: &ParamSet<R>, beta0: &Complex<R>) -> Result<MGauge<R>> {
    let k = p.kappa();
    let (f1, _) = beta_factors(p);
    if f1.abs64() <= 1e-14 || f1.is_zero() {
        return Err(Error::NonGeneric("M-relation factor vanishes".into()));
    }
    let m00 = Complex::<R>::one();
    let m01 = (p.psi0().clone() * boundary_weight(k, p.kappa0())).recip() / m00.clone();
    let mn1 = beta0.clone() / f1 / m00.clone();
    let mn0 = (p.psin().clone() * boundary_weight(k, p.kappan())).recip() / mn1.clone();
    Ok(MGauge { m00, m01, mn0, mn1 })
}

/// `Ψ` and the data fixing it.
#[derive(Clone, Debug)]
pub struct Intertwiner<R: Real = f64> {
    /// Columns indexed by matchings, rows by the spin basis.
    pub psi: Mat<R>,
    pub beta0: Complex<R>,
    pub beta1: Complex<R>,
    pub gauge: MGauge<R>,
    pub tl: TLParams<R>,
}

fn oriented_weight<R: Real>(om: &OrientedMatching, p: &ParamSet<R>) -> Complex<R> {
    let s = om.stats();
    let minus = |z: &Complex<R>| -z.clone();
    minus(p.kappa()).ipow(-(s.or as i64))
        * minus(p.kappa0()).ipow(s.n00 as i64 - s.n01 as i64)
        * p.psi0().ipow((s.n00 + s.n01) as i64)
        * minus(p.kappan()).ipow(s.nn0 as i64 - s.nn1 as i64)
        * p.psin().ipow((s.nn0 + s.nn1) as i64)
}

/// Matrix of `Ψ` with the gauge `M_{0,0} = 1`, `β₀ = 1`.
pub fn intertwiner_psi<R: Real>(p: &ParamSet<R>) -> Result<Intertwiner<R>> {
    let n = p.n();
    let tl = delta_from_kappa(p)?;
    let product = beta_product(p)?;
    let beta0 = Complex::<R>::one();
    let beta1 = product / beta0.clone();
    let gauge = m_gauge(p, &beta0)?;
    let ms = enumerate_matchings(n)?;
    let dim = ms.len();
    let columns: Vec<Vec<Complex<R>>> = ms
        .par_iter()
        .map(|m| {
            let mw = gauge.weight(m);
            let mut col = vec![Complex::<R>::zero(); dim];
            for om in m.orientations() {
                let r = om.spin_index();
                col[r] = col[r].clone() + mw.clone() * oriented_weight(&om, p);
            }
            col
        })
        .collect();
    let psi = Mat::from_columns(&columns);
    if !psi.nullspace(1e-12).basis.is_empty() {
        return Err(Error::IntertwinerDegenerate(format!("Psi is singular for n = {n}")));
    }
    Ok(Intertwiner { psi, beta0, beta1, gauge, tl })
}

/// `Ψ̄` at `ψ₀ = ψ_n = κ⁻¹ = 0`: only orientations with `or = 0` and no boundary counters survive,
/// each with weight 1.
pub fn intertwiner_limit<R: Real>(n: usize) -> Result<Mat<R>> {
    let ms = enumerate_matchings(n)?;
    let dim = ms.len();
    let mut out = Mat::zeros(dim, dim);
    for (c, m) in ms.iter().enumerate() {
        for om in m.orientations() {
            let s = om.stats();
            if s.or == 0 && s.n00 + s.n01 + s.nn0 + s.nn1 == 0 {
                let r = om.spin_index();
                out[(r, c)] = out[(r, c)].clone() + Complex::one();
            }
        }
    }
    Ok(out)
}

/// The map `𝔭 ↦ v_{α₁(𝔭)} ⊗ ⋯ ⊗ v_{α_n(𝔭)}` as a matrix.
pub fn nu_basis_map<R: Real>(n: usize) -> Result<Mat<R>> {
    let ms = enumerate_matchings(n)?;
    let dim = ms.len();
    let mut out = Mat::zeros(dim, dim);
    for (c, m) in ms.iter().enumerate() {
        out[(nu_index(&m.nu()), c)] = Complex::one();
    }
    Ok(out)
}

/// Residuals of `Ψω(e_j) = ρ̂(e_j)Ψ`.
pub fn intertwining_residuals<R: Real>(tw: &Intertwiner<R>, spin: &SpinRep<R>) -> Result<Vec<Residual>> {
    let n = spin.n();
    let omega = matchmaker_matrices(n, &tw.tl, &tw.beta0, &tw.beta1)?;
    Ok((0..=n)
        .map(|j| {
            let lhs = &tw.psi * &omega[j];
            let rhs = &spin.e[j] * &tw.psi;
            Residual::new(format!("intertwiner.e{j}"), format!("Psi omega(e{j}) = rho(e{j}) Psi"), residual(&lhs, &rhs))
        })
        .collect())
}
