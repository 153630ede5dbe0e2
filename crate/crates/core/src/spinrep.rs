//! Spin representations of the two-boundary Temperley-Lieb algebra and of the affine Hecke
//! algebra on `(ℂ²)^⊗n`, Murphy elements, and the principal series basis.
//!
//! Basis vectors are binary strings, leg 0 most significant, `v₊ ↦ 0` and `v₋ ↦ 1`.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{commutator_residual, product, residual, vec_residual, Mat};
use crate::numerics::{CxExt, ParamSet, Real};
use crate::report::Residual;
use crate::weyl::{min_coset_reps, WeylElem};

/// Largest number of sites for which dense operators are built.
pub const SITE_CAP: usize = 10;

/// Index convention of a [`LinOp`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BasisTag {
    Spin { n: usize },
    Matchings { n: usize },
    Monomials { exponents: Vec<Vec<i32>> },
}

/// A square operator together with the basis it is written in.
#[derive(Clone, Debug, PartialEq)]
pub struct LinOp<R: Real = f64> {
    pub basis_tag: BasisTag,
    pub mat: Mat<R>,
}

/// Serialized form: row-major `[re, im]` entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinOpJson {
    pub dim: usize,
    pub basis_tag: BasisTag,
    pub entries: Vec<[f64; 2]>,
}

impl<R: Real> LinOp<R> {
    pub fn new(basis_tag: BasisTag, mat: Mat<R>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Invalid("operators must be square".into()));
        }
        Ok(LinOp { basis_tag, mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn to_json(&self) -> LinOpJson {
        LinOpJson {
            dim: self.dim(),
            basis_tag: self.basis_tag.clone(),
            entries: self
                .mat
                .data()
                .iter()
                .map(|z| {
                    let w = z.to_c64();
                    [w.re, w.im]
                })
                .collect(),
        }
    }

    pub fn from_json(j: &LinOpJson) -> Result<Self> {
        if j.entries.len() != j.dim * j.dim {
            return Err(Error::Invalid(format!("expected {} entries, got {}", j.dim * j.dim, j.entries.len())));
        }
        let mat = Mat::from_fn(j.dim, j.dim, |r, c| {
            let [re, im] = j.entries[r * j.dim + c];
            crate::numerics::cx(re, im)
        });
        Self::new(j.basis_tag.clone(), mat)
    }
}

/// Temperley-Lieb loop weights `(δ₀, δ, δ_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TLParams<R: Real = f64> {
    delta0: Complex<R>,
    delta: Complex<R>,
    deltan: Complex<R>,
}

impl<R: Real> TLParams<R> {
    pub fn delta0(&self) -> &Complex<R> {
        &self.delta0
    }

    pub fn delta(&self) -> &Complex<R> {
        &self.delta
    }

    pub fn deltan(&self) -> &Complex<R> {
        &self.deltan
    }

    /// `δ_j` for generator `j` of a chain with `n` sites.
    pub fn delta_j(&self, j: usize, n: usize) -> &Complex<R> {
        if j == 0 {
            &self.delta0
        } else if j == n {
            &self.deltan
        } else {
            &self.delta
        }
    }
}

/// `κ/κ_j + κ_j/κ`.
pub(crate) fn boundary_weight<R: Real>(k: &Complex<R>, kj: &Complex<R>) -> Complex<R> {
    k.clone() / kj.clone() + kj.clone() / k.clone()
}

/// Loop weights matched to the Hecke parameters: `δ = −(κ+κ⁻¹)`,
/// `δ_j = −(κ_j+κ_j⁻¹)/(κκ_j⁻¹+κ⁻¹κ_j)`.
pub fn delta_from_kappa<R: Real>(p: &ParamSet<R>) -> Result<TLParams<R>> {
    let k = p.kappa();
    let bdy = |kj: &Complex<R>, tag: &str| -> Result<Complex<R>> {
        let den = boundary_weight(k, kj);
        let num = kj.clone() + kj.recip();
        if den.abs64() <= 1e-14 * num.abs64().max(1.0) || den.is_zero() {
            return Err(Error::ParameterSingularity(format!("kappa/kappa_{tag} + kappa_{tag}/kappa vanishes")));
        }
        Ok(-(num / den))
    };
    let delta = -(k.clone() + k.recip());
    if delta.abs64() <= 1e-14 {
        return Err(Error::NonGeneric("delta = -(kappa + 1/kappa) vanishes".into()));
    }
    Ok(TLParams { delta0: bdy(p.kappa0(), "0")?, delta, deltan: bdy(p.kappan(), "n")? })
}

/// `ρ̂(e₀)` on one leg.
pub fn e0_local<R: Real>(p: &ParamSet<R>) -> Mat<R> {
    let (k0, psi0) = (p.kappa0().clone(), p.psi0().clone());
    let w = boundary_weight(p.kappa(), &k0).recip();
    Mat::from_rows(vec![vec![-k0.recip(), psi0.clone()], vec![psi0.recip(), -k0]]).scale(&w)
}

/// `ρ̂(e_n)` on one leg.
pub fn en_local<R: Real>(p: &ParamSet<R>) -> Mat<R> {
    let (kn, psin) = (p.kappan().clone(), p.psin().clone());
    let w = boundary_weight(p.kappa(), &kn).recip();
    Mat::from_rows(vec![vec![-kn.clone(), psin.recip()], vec![psin, -kn.recip()]]).scale(&w)
}

/// `ρ̂(e_i)` on two adjacent legs.
pub fn ei_local<R: Real>(k: &Complex<R>) -> Mat<R> {
    let (z, o) = (Complex::<R>::zero(), Complex::<R>::one());
    Mat::from_rows(vec![
        vec![z.clone(), z.clone(), z.clone(), z.clone()],
        vec![z.clone(), -k.clone(), o.clone(), z.clone()],
        vec![z.clone(), o, -k.recip(), z.clone()],
        vec![z.clone(), z.clone(), z.clone(), z],
    ])
}

/// `K̄ = ρ(T₀)` on one leg.
pub fn k_bar_matrix<R: Real>(p: &ParamSet<R>) -> Mat<R> {
    let (k0, psi0) = (p.kappa0().clone(), p.psi0().clone());
    Mat::from_rows(vec![vec![k0.clone() - k0.recip(), psi0.clone()], vec![psi0.recip(), Complex::zero()]])
}

/// `K = ρ(T_n)` on one leg.
pub fn k_matrix<R: Real>(p: &ParamSet<R>) -> Mat<R> {
    let (kn, psin) = (p.kappan().clone(), p.psin().clone());
    Mat::from_rows(vec![vec![Complex::zero(), psin.recip()], vec![psin, kn.clone() - kn.recip()]])
}

/// The flip `P` on ℂ² ⊗ ℂ².
pub fn flip<R: Real>() -> Mat<R> {
    Mat::from_fn(4, 4, |i, j| if j == ((i & 1) << 1 | i >> 1) { Complex::one() } else { Complex::zero() })
}

/// `Υ`; the spin representation has `ρ(T_i) = (Υ∘P)_{i,i+1}`.
pub fn upsilon_matrix<R: Real>(k: &Complex<R>) -> Mat<R> {
    let (z, o) = (Complex::<R>::zero(), Complex::<R>::one());
    Mat::from_rows(vec![
        vec![k.clone(), z.clone(), z.clone(), z.clone()],
        vec![z.clone(), o.clone(), z.clone(), z.clone()],
        vec![z.clone(), k.clone() - k.recip(), o, z.clone()],
        vec![z.clone(), z.clone(), z, k.clone()],
    ])
}

/// Matrices `T_j`, `T_j⁻¹` of a representation of the affine Hecke algebra.
#[derive(Clone, Debug)]
pub struct HeckeRep<R: Real = f64> {
    pub n: usize,
    pub t: Vec<Mat<R>>,
    pub t_inv: Vec<Mat<R>>,
    pub kappa: Vec<Complex<R>>,
}

impl<R: Real> HeckeRep<R> {
    /// Representation with `T_j⁻¹ = T_j − κ_j + κ_j⁻¹`.
    pub fn from_generators(t: Vec<Mat<R>>, kappa: Vec<Complex<R>>) -> Result<Self> {
        if t.len() < 2 || kappa.len() != t.len() {
            return Err(Error::Invalid("need T_0..T_n and kappa_0..kappa_n".into()));
        }
        let dim = t[0].rows();
        if t.iter().any(|m| !m.is_square() || m.rows() != dim) {
            return Err(Error::Invalid("generators must be square of a common size".into()));
        }
        let t_inv = t.iter().zip(&kappa).map(|(m, k)| m.add_identity(&(k.recip() - k.clone()))).collect();
        Ok(HeckeRep { n: t.len() - 1, t, t_inv, kappa })
    }

    pub fn dim(&self) -> usize {
        self.t[0].rows()
    }

    /// `T_{s_{w₁}}⋯T_{s_{w_k}}`.
    pub fn word(&self, word: &[usize]) -> Mat<R> {
        product(self.dim(), word.iter().map(|&j| &self.t[j]))
    }

    /// `T_w` along the greedy reduced word of `w`.
    pub fn element(&self, w: &WeylElem) -> Mat<R> {
        self.word(&w.reduced_word())
    }

    /// `T_{s_{w₁}}⋯T_{s_{w_k}} v`, the rightmost factor acting first.
    pub fn word_apply(&self, word: &[usize], v: &[Complex<R>]) -> Vec<Complex<R>> {
        word.iter().rev().fold(v.to_vec(), |acc, &j| self.t[j].matvec(&acc))
    }
}

/// `ρ̂(e_j)` and the induced `ρ(T_j)` on `(ℂ²)^⊗n`.
#[derive(Clone, Debug)]
pub struct SpinRep<R: Real = f64> {
    pub e: Vec<Mat<R>>,
    pub hecke: HeckeRep<R>,
    pub tl: TLParams<R>,
}

impl<R: Real> SpinRep<R> {
    pub fn n(&self) -> usize {
        self.hecke.n
    }

    pub fn dim(&self) -> usize {
        self.hecke.dim()
    }

    pub fn op(&self, mat: &Mat<R>) -> LinOp<R> {
        LinOp { basis_tag: BasisTag::Spin { n: self.n() }, mat: mat.clone() }
    }
}

/// Builds the spin representation for `n = params.n()` sites.
pub fn build_spin_rep<R: Real>(p: &ParamSet<R>) -> Result<SpinRep<R>> {
    build_spin_rep_capped(p, SITE_CAP)
}

/// [`build_spin_rep`] with an explicit size cap.
pub fn build_spin_rep_capped<R: Real>(p: &ParamSet<R>, cap: usize) -> Result<SpinRep<R>> {
    let n = p.n();
    if n < 2 {
        return Err(Error::Invalid("the spin representation needs n >= 2".into()));
    }
    if n > cap {
        return Err(Error::SizeCap(format!("n = {n} exceeds the cap {cap}")));
    }
    let tl = delta_from_kappa(p)?;
    let k = p.kappa().clone();
    let mut e = Vec::with_capacity(n + 1);
    e.push(e0_local(p).embed(&[0], n));
    for i in 1..n {
        e.push(ei_local(&k).embed(&[i - 1, i], n));
    }
    e.push(en_local(p).embed(&[n - 1], n));
    let kappa: Vec<Complex<R>> = (0..=n).map(|j| p.kappa_j(j).clone()).collect();
    let t =
        (0..=n).map(|j| if j == 0 || j == n { e[j].scale(&boundary_weight(&k, &kappa[j])).add_identity(&kappa[j]) } else { e[j].add_identity(&k) }).collect();
    let hecke = HeckeRep::from_generators(t, kappa)?;
    Ok(SpinRep { e, hecke, tl })
}

/// Residuals of the defining relations of the affine Hecke algebra.
pub fn check_hecke_relations<R: Real>(rep: &HeckeRep<R>) -> Vec<Residual> {
    let n = rep.n;
    let dim = rep.dim();
    let t = &rep.t;
    let id = Mat::<R>::identity(dim);
    let mut out = Vec::new();
    for (j, ((tj, tj_inv), k)) in t.iter().zip(&rep.t_inv).zip(&rep.kappa).enumerate().take(n + 1) {
        let lhs = tj * tj;
        let rhs = tj.scale(&(k.clone() - k.recip())).add_identity(&Complex::one());
        out.push(Residual::new(format!("hecke.quadratic.T{j}"), format!("(T{j} - k{j})(T{j} + 1/k{j}) = 0"), residual(&lhs, &rhs)));
        out.push(Residual::new(format!("hecke.inverse.T{j}"), format!("T{j} T{j}^-1 = 1"), residual(&(tj * tj_inv), &id)));
    }
    let word = |w: &[usize]| product(dim, w.iter().map(|&j| &t[j]));
    if n >= 2 {
        out.push(Residual::new("hecke.braid.T0T1", "T0 T1 T0 T1 = T1 T0 T1 T0", residual(&word(&[0, 1, 0, 1]), &word(&[1, 0, 1, 0]))));
        let (a, b) = (n - 1, n);
        out.push(Residual::new(
            format!("hecke.braid.T{a}T{b}"),
            format!("T{a} T{b} T{a} T{b} = T{b} T{a} T{b} T{a}"),
            residual(&word(&[a, b, a, b]), &word(&[b, a, b, a])),
        ));
    }
    for i in 1..n.saturating_sub(1) {
        let j = i + 1;
        out.push(Residual::new(format!("hecke.braid.T{i}T{j}"), format!("T{i} T{j} T{i} = T{j} T{i} T{j}"), residual(&word(&[i, j, i]), &word(&[j, i, j]))));
    }
    for i in 0..=n {
        for j in i + 2..=n {
            out.push(Residual::new(format!("hecke.commute.T{i}T{j}"), format!("T{i} T{j} = T{j} T{i}"), commutator_residual(&t[i], &t[j])));
        }
    }
    out
}

/// Residuals of the two-boundary Temperley-Lieb relations for operators `e_0..e_n`.
pub fn check_tl_relations<R: Real>(e: &[Mat<R>], tl: &TLParams<R>) -> Vec<Residual> {
    let n = e.len() - 1;
    let mut out = Vec::new();
    for (j, ej) in e.iter().enumerate() {
        let d = tl.delta_j(j, n);
        out.push(Residual::new(format!("tl.quadratic.e{j}"), format!("e{j}^2 = delta_{j} e{j}"), residual(&(ej * ej), &ej.scale(d))));
    }
    for i in 1..n {
        for j in [i - 1, i + 1] {
            let lhs = &(&e[i] * &e[j]) * &e[i];
            out.push(Residual::new(format!("tl.neighbour.e{i}e{j}"), format!("e{i} e{j} e{i} = e{i}"), residual(&lhs, &e[i])));
        }
    }
    for i in 0..=n {
        for j in i + 2..=n {
            out.push(Residual::new(format!("tl.commute.e{i}e{j}"), format!("e{i} e{j} = e{j} e{i}"), commutator_residual(&e[i], &e[j])));
        }
    }
    out
}

/// `Y_i = T_{i−1}⁻¹⋯T₁⁻¹T₀T₁⋯T_{n−1}T_nT_{n−1}⋯T_i`, `1 ≤ i ≤ n`.
pub fn murphy_y<R: Real>(rep: &HeckeRep<R>, i: usize) -> Mat<R> {
    let n = rep.n;
    assert!((1..=n).contains(&i), "Murphy element index");
    let mut factors: Vec<&Mat<R>> = Vec::new();
    for j in (1..i).rev() {
        factors.push(&rep.t_inv[j]);
    }
    for j in 0..n {
        factors.push(&rep.t[j]);
    }
    factors.push(&rep.t[n]);
    for j in (i..n).rev() {
        factors.push(&rep.t[j]);
    }
    product(rep.dim(), factors)
}

/// The vector `v₊^⊗n`.
pub fn highest_vector<R: Real>(n: usize) -> Vec<Complex<R>> {
    let mut v = vec![Complex::<R>::zero(); 1 << n];
    v[0] = Complex::one();
    v
}

/// `ζ = (ψ₀ψ_nκ^{n−1}, ψ₀ψ_nκ^{n−3}, …, ψ₀ψ_nκ^{1−n})`.
pub fn zeta<R: Real>(p: &ParamSet<R>) -> Vec<Complex<R>> {
    let n = p.n() as i64;
    let pp = p.psi0().clone() * p.psin().clone();
    (1..=n).map(|i| pp.clone() * p.kappa().ipow(n - 2 * i + 1)).collect()
}

/// The vectors `v_w = ρ(T_w)v₊^⊗n`, `w ∈ W₀^J`, with `J = {1,…,n−1}`.
#[derive(Clone, Debug)]
pub struct PrincipalSeries<R: Real = f64> {
    pub reps: Vec<WeylElem>,
    pub vectors: Vec<Vec<Complex<R>>>,
    pub zeta: Vec<Complex<R>>,
}

impl<R: Real> PrincipalSeries<R> {
    /// Matrix with the basis vectors as columns.
    pub fn matrix(&self) -> Mat<R> {
        Mat::from_columns(&self.vectors)
    }
}

/// Principal series basis of the spin representation.
pub fn principal_series_basis<R: Real>(p: &ParamSet<R>) -> Result<PrincipalSeries<R>> {
    let spin = build_spin_rep(p)?;
    principal_series_from(&spin.hecke, p)
}

/// [`principal_series_basis`] for an already built representation.
pub fn principal_series_from<R: Real>(rep: &HeckeRep<R>, p: &ParamSet<R>) -> Result<PrincipalSeries<R>> {
    let n = rep.n;
    let j: Vec<usize> = (1..n).collect();
    let reps = min_coset_reps(&j, n)?;
    let v0 = highest_vector::<R>(n);
    let vectors: Vec<Vec<Complex<R>>> = reps.iter().map(|w| rep.word_apply(&w.reduced_word(), &v0)).collect();
    let basis = PrincipalSeries { reps, vectors, zeta: zeta(p) };
    let kernel = basis.matrix().nullspace(1e-10);
    if !kernel.basis.is_empty() {
        return Err(Error::PrincipalSeries);
    }
    Ok(basis)
}

/// Residuals of `ρ(Y_i)v₊^⊗n = ψ₀ψ_nκ^{n−2i+1}v₊^⊗n`.
pub fn murphy_eigen_residuals<R: Real>(rep: &HeckeRep<R>, p: &ParamSet<R>) -> Vec<Residual> {
    let n = rep.n;
    let v0 = highest_vector::<R>(n);
    let z = zeta(p);
    (1..=n)
        .map(|i| {
            let y = murphy_y(rep, i);
            let lhs = y.matvec(&v0);
            let rhs: Vec<Complex<R>> = v0.iter().map(|c| c.clone() * z[i - 1].clone()).collect();
            Residual::new(format!("murphy.eigen.Y{i}"), format!("Y{i} v+ = psi0 psin kappa^(n-2*{i}+1) v+"), vec_residual(&lhs, &rhs))
        })
        .collect()
}

/// Residuals of `[Y_i, Y_j] = 0`.
pub fn murphy_commutators<R: Real>(rep: &HeckeRep<R>) -> Vec<Residual> {
    let ys: Vec<Mat<R>> = (1..=rep.n).map(|i| murphy_y(rep, i)).collect();
    let mut out = Vec::new();
    for a in 0..ys.len() {
        for b in a + 1..ys.len() {
            out.push(Residual::new(
                format!("murphy.commute.Y{}Y{}", a + 1, b + 1),
                format!("Y{} Y{} = Y{} Y{}", a + 1, b + 1, b + 1, a + 1),
                commutator_residual(&ys[a], &ys[b]),
            ));
        }
    }
    out
}
