//! Polynomial differential forms with d, contraction and Lie derivative.
//!
//! Contraction follows ι_{ξ₁∧…∧ξ_k} = ι_{ξ_k}∘…∘ι_{ξ₁}, so ⟨∂_I, dx_I⟩ = +1
//! on matching sorted tuples; the Lie derivative along a k-vector is the
//! Cartan extension L_γ = d∘ι_γ − (−1)^k ι_γ∘d.

use std::collections::BTreeMap;
use std::fmt;

use super::exterior::{left_derivative, merge_sign, sort_sign};
use super::poly::{Poly, Scalar};
use super::vector::PolyVectorField;

/// An l-form on ℝ^d with polynomial components on sorted index tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffForm<S: Scalar> {
    dim: usize,
    degree: usize,
    comps: BTreeMap<Vec<usize>, Poly<S>>,
}

impl<S: Scalar> DiffForm<S> {
    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(degree <= dim, "form degree exceeds dimension");
        DiffForm { dim, degree, comps: BTreeMap::new() }
    }

    /// A 0-form, i.e. a function.
    pub fn function(p: Poly<S>) -> Self {
        let dim = p.dim();
        let mut w = DiffForm::zero(dim, 0);
        w.set_component(&[], p);
        w
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (&Vec<usize>, &Poly<S>)> {
        self.comps.iter()
    }

    pub fn set_component(&mut self, tuple: &[usize], p: Poly<S>) {
        assert_eq!(tuple.len(), self.degree);
        assert!(tuple.windows(2).all(|w| w[0] < w[1]), "tuple must be strictly increasing");
        assert!(tuple.iter().all(|&i| i < self.dim));
        assert_eq!(p.dim(), self.dim);
        if p.is_zero() {
            self.comps.remove(tuple);
        } else {
            self.comps.insert(tuple.to_vec(), p);
        }
    }

    fn add_component(&mut self, tuple: Vec<usize>, p: Poly<S>) {
        if p.is_zero() {
            return;
        }
        match self.comps.get_mut(&tuple) {
            Some(q) => {
                let s = q.add(&p);
                if s.is_zero() {
                    self.comps.remove(&tuple);
                } else {
                    *q = s;
                }
            }
            None => {
                self.comps.insert(tuple, p);
            }
        }
    }

    /// Skew component on an arbitrary distinct tuple.
    pub fn component(&self, tuple: &[usize]) -> Poly<S> {
        assert_eq!(tuple.len(), self.degree);
        match sort_sign(tuple) {
            None => Poly::zero(self.dim),
            Some((sorted, sign)) => {
                let p = self.comps.get(&sorted).cloned().unwrap_or_else(|| Poly::zero(self.dim));
                if sign < 0 {
                    p.neg()
                } else {
                    p
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.dim, self.degree), (other.dim, other.degree));
        let mut out = self.clone();
        for (t, p) in &other.comps {
            out.add_component(t.clone(), p.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = DiffForm::zero(self.dim, self.degree);
        for (t, p) in &self.comps {
            out.comps.insert(t.clone(), p.neg());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = DiffForm::zero(self.dim, self.degree);
        for (t, p) in &self.comps {
            let q = p.scale(s);
            if !q.is_zero() {
                out.comps.insert(t.clone(), q);
            }
        }
        out
    }

    pub fn scale_poly(&self, f: &Poly<S>) -> Self {
        let mut out = DiffForm::zero(self.dim, self.degree);
        for (t, p) in &self.comps {
            let q = p.mul(f);
            if !q.is_zero() {
                out.comps.insert(t.clone(), q);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.values().map(Poly::max_abs).fold(0.0, f64::max)
    }

    pub fn max_err(&self) -> f64 {
        self.comps.values().map(Poly::max_err).fold(0.0, f64::max)
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> DiffForm<T> {
        let mut out = DiffForm::zero(self.dim, self.degree);
        for (t, p) in &self.comps {
            let q = p.map_scalars(f);
            if !q.is_zero() {
                out.comps.insert(t.clone(), q);
            }
        }
        out
    }

    /// Exterior product of forms.
    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let degree = self.degree + other.degree;
        assert!(degree <= self.dim, "form degree exceeds dimension");
        let mut out = DiffForm::zero(self.dim, degree);
        for (ta, pa) in &self.comps {
            for (tb, pb) in &other.comps {
                if let Some((tuple, sign)) = merge_sign(ta, tb) {
                    let mut q = pa.mul(pb);
                    if sign < 0 {
                        q = q.neg();
                    }
                    out.add_component(tuple, q);
                }
            }
        }
        out
    }

    /// Exterior derivative.
    pub fn d(&self) -> Self {
        assert!(self.degree < self.dim || self.is_zero(), "top-degree d is 0");
        let degree = (self.degree + 1).min(self.dim);
        let mut out = DiffForm::zero(self.dim, degree);
        for (t, p) in &self.comps {
            for i in 0..self.dim {
                let dp = p.deriv(i);
                if dp.is_zero() {
                    continue;
                }
                if let Some((tuple, sign)) = merge_sign(&[i], t) {
                    let q = if sign < 0 { dp.neg() } else { dp };
                    out.add_component(tuple, q);
                }
            }
        }
        out
    }
}

/// Contraction ι_α ω for a k-vector α against an l-form ω (k ≤ l).
pub fn contract<S: Scalar>(alpha: &PolyVectorField<S>, omega: &DiffForm<S>) -> DiffForm<S> {
    assert_eq!(alpha.dim(), omega.dim(), "dimension mismatch");
    assert!(alpha.degree() <= omega.degree(), "contraction needs k ≤ l");
    let dim = omega.dim();
    let mut out = DiffForm::zero(dim, omega.degree() - alpha.degree());
    for (ta, pa) in alpha.components() {
        for (tw, pw) in omega.components() {
            // Apply ι_{∂_{i₁}}, …, ι_{∂_{i_k}} in ascending order of the
            // sorted tuple; each is a left odd derivative on dx's.
            let mut tuple = tw.clone();
            let mut sign = 1;
            let mut dead = false;
            for &i in ta {
                match left_derivative(&tuple, i) {
                    Some((rest, s)) => {
                        tuple = rest;
                        sign *= s;
                    }
                    None => {
                        dead = true;
                        break;
                    }
                }
            }
            if dead {
                continue;
            }
            let mut q = pa.mul(pw);
            if sign < 0 {
                q = q.neg();
            }
            out.add_component(tuple, q);
        }
    }
    out
}

/// Lie derivative along a k-vector: L_γ = d∘ι_γ − (−1)^k ι_γ∘d.
pub fn lie_derivative<S: Scalar>(gamma: &PolyVectorField<S>, omega: &DiffForm<S>) -> DiffForm<S> {
    let (k, l, dim) = (gamma.degree(), omega.degree(), omega.dim());
    assert!(l + 1 >= k, "Lie derivative would lower form degree below 0");
    let out_degree = l + 1 - k;
    assert!(out_degree <= dim, "Lie derivative would exceed top degree");
    let mut first = DiffForm::zero(dim, out_degree);
    if l >= k {
        // l − k < out_degree ≤ dim, so d is defined on the contraction.
        first = contract(gamma, omega).d();
    }
    let second = if l < dim {
        contract(gamma, &omega.d())
    } else {
        DiffForm::zero(dim, out_degree)
    };
    if k % 2 == 0 {
        first.sub(&second)
    } else {
        first.add(&second)
    }
}

impl<S: Scalar> fmt::Display for DiffForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comps.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (t, p) in &self.comps {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let basis: Vec<String> = t.iter().map(|i| format!("dx{}", i + 1)).collect();
            if t.is_empty() {
                write!(f, "{p}")?;
            } else {
                write!(f, "({p})*{}", basis.join("^"))?;
            }
        }
        Ok(())
    }
}
