//! The affine Weyl group `W = W₀ ⋉ ℤⁿ` of type C̃_n.
//!
//! Elements are pairs `(w, λ)` standing for `w ∘ τ(λ)`, i.e. the affine map `x ↦ w(x + λ)`.
//! Lengths count the hyperplanes `x_i ± x_j ∈ ℤ`, `2x_i ∈ ℤ` separating the fundamental
//! alcove `1/2 > x₁ > … > x_n > 0` from its image.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{CxExt, ParamSet, Real};

/// Largest rank for which `W₀` is enumerated.
pub const W0_CAP: usize = 6;

/// Signed permutation acting on `ℤⁿ` by `(w·x)_i = signs[i]·x[perm[i]]` (0-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedPerm {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

impl SignedPerm {
    pub fn identity(n: usize) -> Self {
        SignedPerm { perm: (0..n).collect(), signs: vec![1; n] }
    }

    pub fn new(perm: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        let n = perm.len();
        let distinct: BTreeSet<_> = perm.iter().copied().collect();
        if signs.len() != n || distinct.len() != n || perm.iter().any(|&p| p >= n) {
            return Err(Error::Invalid("not a signed permutation".into()));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Invalid("signs must be +1 or -1".into()));
        }
        Ok(SignedPerm { perm, signs })
    }

    /// The longest element `−1` of `W₀`.
    pub fn longest(n: usize) -> Self {
        SignedPerm { perm: (0..n).collect(), signs: vec![-1; n] }
    }

    /// Simple reflection `s_j`, `1 ≤ j ≤ n`.
    pub fn simple(j: usize, n: usize) -> Self {
        assert!((1..=n).contains(&j), "finite simple reflection index");
        let mut w = Self::identity(n);
        if j == n {
            w.signs[n - 1] = -1;
        } else {
            w.perm.swap(j - 1, j);
        }
        w
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let perm = self.perm.iter().map(|&p| other.perm[p]).collect();
        let signs = self.perm.iter().zip(&self.signs).map(|(&p, &s)| s * other.signs[p]).collect();
        SignedPerm { perm, signs }
    }

    pub fn inverse(&self) -> Self {
        let n = self.n();
        let mut perm = vec![0; n];
        let mut signs = vec![1; n];
        for i in 0..n {
            perm[self.perm[i]] = i;
            signs[self.perm[i]] = self.signs[i];
        }
        SignedPerm { perm, signs }
    }

    pub fn apply(&self, x: &[i64]) -> Vec<i64> {
        self.perm.iter().zip(&self.signs).map(|(&p, &s)| i64::from(s) * x[p]).collect()
    }

    /// Multiplicative action on `(ℂ*)ⁿ`: `(w·t)_i = t[perm[i]]^{signs[i]}`.
    pub fn apply_point<R: Real>(&self, t: &[Complex<R>]) -> Vec<Complex<R>> {
        self.perm.iter().zip(&self.signs).map(|(&p, &s)| if s > 0 { t[p].clone() } else { t[p].recip() }).collect()
    }
}

/// Element `w ∘ τ(λ)` of the affine Weyl group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeylElem {
    w: SignedPerm,
    trans: Vec<i64>,
}

/// Sequence of generator indices in `{0,…,n}`; evaluates to `s_{w[0]} s_{w[1]} ⋯`.
pub type Word = Vec<usize>;

impl WeylElem {
    pub fn identity(n: usize) -> Self {
        WeylElem { w: SignedPerm::identity(n), trans: vec![0; n] }
    }

    pub fn new(w: SignedPerm, trans: Vec<i64>) -> Result<Self> {
        if trans.len() != w.n() {
            return Err(Error::Invalid("translation length does not match rank".into()));
        }
        Ok(WeylElem { w, trans })
    }

    pub fn finite(w: SignedPerm) -> Self {
        let n = w.n();
        WeylElem { w, trans: vec![0; n] }
    }

    pub fn translation(lambda: Vec<i64>) -> Self {
        WeylElem { w: SignedPerm::identity(lambda.len()), trans: lambda }
    }

    /// `τ_i := τ(e_i)`, 1-based `i`.
    pub fn tau(i: usize, n: usize) -> Self {
        let mut l = vec![0; n];
        l[i - 1] = 1;
        Self::translation(l)
    }

    /// Simple reflection `s_j`, `0 ≤ j ≤ n`; `s₀ = (sign flip of x₁, −e₁)`.
    pub fn simple(j: usize, n: usize) -> Self {
        assert!(j <= n, "simple reflection index");
        if j == 0 {
            let mut w = SignedPerm::identity(n);
            w.signs[0] = -1;
            let mut trans = vec![0; n];
            trans[0] = -1;
            WeylElem { w, trans }
        } else {
            Self::finite(SignedPerm::simple(j, n))
        }
    }

    pub fn from_word(word: &[usize], n: usize) -> Self {
        word.iter().fold(Self::identity(n), |acc, &j| acc.mul(&Self::simple(j, n)))
    }

    pub fn n(&self) -> usize {
        self.w.n()
    }

    pub fn finite_part(&self) -> &SignedPerm {
        &self.w
    }

    pub fn trans(&self) -> &[i64] {
        &self.trans
    }

    pub fn is_finite(&self) -> bool {
        self.trans.iter().all(|&x| x == 0)
    }

    /// `(w, λ)(w', λ') = (ww', λ' + w'⁻¹λ)`.
    pub fn mul(&self, other: &Self) -> Self {
        let shifted = other.w.inverse().apply(&self.trans);
        WeylElem { w: self.w.compose(&other.w), trans: other.trans.iter().zip(shifted).map(|(a, b)| a + b).collect() }
    }

    pub fn inverse(&self) -> Self {
        WeylElem { w: self.w.inverse(), trans: self.w.apply(&self.trans).iter().map(|x| -x).collect() }
    }

    /// Affine action on a point given by integer numerators over a common denominator `den`.
    pub fn act_affine(&self, x: &[i64], den: i64) -> Vec<i64> {
        let shifted: Vec<i64> = x.iter().zip(&self.trans).map(|(a, l)| a + den * l).collect();
        self.w.apply(&shifted)
    }

    /// Number of separating hyperplanes between the fundamental alcove and its image.
    pub fn length(&self) -> usize {
        let n = self.n();
        let den = 4 * n as i64;
        // Generic interior point 1/2 > p_1 > ... > p_n > 0 with p_i = (2(n-i)+1)/(4n).
        let p: Vec<i64> = (0..n).map(|i| 2 * (n - 1 - i) as i64 + 1).collect();
        let gp = self.act_affine(&p, den);
        let crossings = |a: i64, b: i64| (b.div_euclid(den) - a.div_euclid(den)).unsigned_abs() as usize;
        let mut len = 0;
        for i in 0..n {
            for j in i + 1..n {
                len += crossings(p[i] - p[j], gp[i] - gp[j]);
                len += crossings(p[i] + p[j], gp[i] + gp[j]);
            }
            len += crossings(2 * p[i], 2 * gp[i]);
        }
        len
    }

    /// Reduced word by greedy descent, taking the smallest left descent at each step.
    pub fn reduced_word(&self) -> Word {
        let n = self.n();
        let mut g = self.clone();
        let mut len = g.length();
        let mut word = Vec::with_capacity(len);
        while len > 0 {
            let (j, h, l) = (0..=n)
                .map(|j| {
                    let h = WeylElem::simple(j, n).mul(&g);
                    let l = h.length();
                    (j, h, l)
                })
                .find(|(_, _, l)| *l < len)
                .expect("an element of positive length has a left descent");
            word.push(j);
            g = h;
            len = l;
        }
        word
    }

    /// Action `t ↦ w(q^λ t)` on `(ℂ*)ⁿ`.
    pub fn act_point<R: Real>(&self, t: &[Complex<R>], params: &ParamSet<R>) -> Result<Vec<Complex<R>>> {
        if t.len() != self.n() {
            return Err(Error::Invalid("point dimension does not match rank".into()));
        }
        if t.iter().any(num_traits::Zero::is_zero) {
            return Err(Error::ZeroCoordinate);
        }
        let shifted: Vec<Complex<R>> = t.iter().zip(&self.trans).map(|(ti, &l)| ti.clone() * params.q().ipow(l)).collect();
        Ok(self.w.apply_point(&shifted))
    }

    pub fn to_json(&self) -> WeylJson {
        WeylJson { perm: self.w.perm.iter().map(|p| p + 1).collect(), signs: self.w.signs.clone(), trans: self.trans.clone() }
    }

    pub fn from_json(j: &WeylJson) -> Result<Self> {
        if j.perm.contains(&0) {
            return Err(Error::Invalid("perm entries are 1-based".into()));
        }
        let w = SignedPerm::new(j.perm.iter().map(|p| p - 1).collect(), j.signs.clone())?;
        WeylElem::new(w, j.trans.clone())
    }
}

/// Serialized [`WeylElem`]; `perm` is 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeylJson {
    pub perm: Vec<usize>,
    pub signs: Vec<i8>,
    pub trans: Vec<i64>,
}

/// All `2ⁿn!` elements of `W₀`.
pub fn w0_elements(n: usize) -> Result<Vec<SignedPerm>> {
    if n == 0 || n > W0_CAP {
        return Err(Error::SizeCap(format!("W0 enumeration supports 1 <= n <= {W0_CAP}, got {n}")));
    }
    let mut out = Vec::new();
    for perm in (0..n).permutations(n) {
        for mask in 0..(1u32 << n) {
            let signs = (0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
            out.push(SignedPerm { perm: perm.clone(), signs });
        }
    }
    Ok(out)
}

/// The parabolic subgroup `W₀,I` generated by `{s_i : i ∈ I}`.
pub fn parabolic_subgroup(subset: &[usize], n: usize) -> Vec<WeylElem> {
    let mut seen: BTreeSet<WeylElem> = BTreeSet::new();
    let mut frontier = vec![WeylElem::identity(n)];
    seen.insert(WeylElem::identity(n));
    while let Some(g) = frontier.pop() {
        for &i in subset {
            let h = g.mul(&WeylElem::simple(i, n));
            if seen.insert(h.clone()) {
                frontier.push(h);
            }
        }
    }
    seen.into_iter().collect()
}

/// Longest element `w₀,I` of `W₀,I`.
pub fn parabolic_longest(subset: &[usize], n: usize) -> WeylElem {
    parabolic_subgroup(subset, n).into_iter().max_by_key(WeylElem::length).expect("nonempty subgroup")
}

fn check_subset(subset: &[usize], n: usize) -> Result<()> {
    if subset.iter().any(|&i| i == 0 || i > n) {
        return Err(Error::Invalid(format!("subset must lie in {{1,...,{n}}}")));
    }
    Ok(())
}

/// Minimal coset representatives `W₀^I`, sorted by length then reduced word.
pub fn min_coset_reps(subset: &[usize], n: usize) -> Result<Vec<WeylElem>> {
    check_subset(subset, n)?;
    let mut reps: Vec<(usize, Word, WeylElem)> = w0_elements(n)?
        .into_iter()
        .map(WeylElem::finite)
        .filter(|w| {
            let l = w.length();
            subset.iter().all(|&i| w.mul(&WeylElem::simple(i, n)).length() > l)
        })
        .map(|w| (w.length(), w.reduced_word(), w))
        .collect();
    reps.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    Ok(reps.into_iter().map(|r| r.2).collect())
}

/// `w₀^I = w₀ w₀,I⁻¹` and `I* = {i* : i ∈ I}` with `w₀^I s_i = s_{i*} w₀^I`.
pub fn star_involution(subset: &[usize], n: usize) -> Result<(WeylElem, Vec<usize>)> {
    check_subset(subset, n)?;
    let w0 = WeylElem::finite(SignedPerm::longest(n));
    let w0i = w0.mul(&parabolic_longest(subset, n).inverse());
    let mut star = Vec::with_capacity(subset.len());
    for &i in subset {
        let lhs = w0i.mul(&WeylElem::simple(i, n));
        let j = (1..=n).find(|&j| WeylElem::simple(j, n).mul(&w0i) == lhs).ok_or_else(|| Error::Defect(format!("no index i* for i = {i}")))?;
        star.push(j);
    }
    Ok((w0i, star))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_empty_word() {
        assert!(WeylElem::identity(3).reduced_word().is_empty());
    }

    #[test]
    fn simple_reflections_are_involutions_of_length_one() {
        for n in 1..=4 {
            for j in 0..=n {
                let s = WeylElem::simple(j, n);
                assert_eq!(s.length(), 1, "s_{j} n={n}");
                assert_eq!(s.mul(&s), WeylElem::identity(n));
            }
        }
    }

    #[test]
    fn tau1_for_n2_has_the_displayed_word() {
        let tau = WeylElem::tau(1, 2);
        assert_eq!(tau.length(), 4);
        assert_eq!(WeylElem::from_word(&[0, 1, 2, 1], 2), tau);
        let w = tau.reduced_word();
        assert_eq!(w.len(), 4);
        assert_eq!(WeylElem::from_word(&w, 2), tau);
    }

    #[test]
    fn tau_i_matches_the_simple_reflection_expression() {
        for n in 2..=4 {
            for i in 1..=n {
                let mut word: Word = (1..i).rev().collect();
                word.push(0);
                word.extend(1..n);
                word.push(n);
                word.extend((i..n).rev());
                assert_eq!(WeylElem::from_word(&word, n), WeylElem::tau(i, n), "n={n} i={i}");
                assert_eq!(WeylElem::tau(i, n).length(), 2 * n);
            }
        }
    }

    #[test]
    fn longest_element_length() {
        for n in 1..=4 {
            assert_eq!(WeylElem::finite(SignedPerm::longest(n)).length(), n * n);
        }
        let lengths: Vec<usize> = w0_elements(2).unwrap().into_iter().map(|w| WeylElem::finite(w).length()).collect();
        assert_eq!(lengths.iter().max(), Some(&4));
    }

    #[test]
    fn coset_rep_counts() {
        let j = min_coset_reps(&[1, 2], 3).unwrap();
        assert_eq!(j.len(), 8);
        assert_eq!(j[0], WeylElem::identity(3));
        assert_eq!(min_coset_reps(&[1, 2, 3], 3).unwrap(), vec![WeylElem::identity(3)]);
        assert_eq!(min_coset_reps(&[], 3).unwrap().len(), 48);
        assert!(min_coset_reps(&[4], 3).is_err());
    }

    #[test]
    fn spin_coset_reps_have_size_two_to_the_n() {
        for n in 2..=4 {
            let j: Vec<usize> = (1..n).collect();
            assert_eq!(min_coset_reps(&j, n).unwrap().len(), 1 << n);
        }
    }

    #[test]
    fn coset_reps_satisfy_length_additivity() {
        let n = 3;
        let subset = [1, 2];
        let sub = parabolic_subgroup(&subset, n);
        for w in min_coset_reps(&subset, n).unwrap() {
            for v in &sub {
                assert_eq!(w.mul(v).length(), w.length() + v.length());
            }
        }
    }

    #[test]
    fn star_involution_for_j() {
        for n in 2..=4 {
            let j: Vec<usize> = (1..n).collect();
            let (w0j, star) = star_involution(&j, n).unwrap();
            assert_eq!(star, j.iter().map(|i| n - i).collect::<Vec<_>>());
            assert_eq!(w0j.length(), n * n - n * (n - 1) / 2);
        }
        let (w, s) = star_involution(&[], 3).unwrap();
        assert_eq!(w, WeylElem::finite(SignedPerm::longest(3)));
        assert!(s.is_empty());
        let (w, s) = star_involution(&[2], 2).unwrap();
        assert_eq!(w.mul(&WeylElem::simple(2, 2)), WeylElem::simple(s[0], 2).mul(&w));
    }

    #[test]
    fn json_round_trip() {
        let g = WeylElem::from_word(&[0, 2, 1, 0, 2], 2);
        assert_eq!(WeylElem::from_json(&g.to_json()).unwrap(), g);
        let text = serde_json::to_string(&g.to_json()).unwrap();
        assert!(text.starts_with("{\"perm\":["));
    }

    #[test]
    fn w0_cap() {
        assert!(w0_elements(7).is_err());
        assert_eq!(w0_elements(3).unwrap().len(), 48);
    }
}
