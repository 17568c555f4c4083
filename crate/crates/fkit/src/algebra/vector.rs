//! Polynomial polyvector fields with the Schouten–Nijenhuis bracket.
//!
//! A k-vector is stored by its components on strictly increasing index
//! k-tuples (skew extension by sign). The bracket is the odd Poisson
//! (anti)bracket of the θ-model a = Σ a_I θ_I:
//! [a,b] = Σ_i (a ∂⃖/∂θ_i)(∂b/∂x_i) − (∂a/∂x_i)(∂⃗/∂θ_i b),
//! which restricts to the Lie bracket on vector fields and satisfies the
//! graded antisymmetry/Leibniz/Jacobi identities of the shifted degree k−1.
//! The modified convention used downstream is [a,b]′ = −[b,a].

use std::collections::BTreeMap;
use std::fmt;

use super::exterior::{left_derivative, merge_sign, right_derivative, sort_sign};
use super::poly::{Poly, Scalar};

/// A k-vector field on ℝ^d with polynomial components.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyVectorField<S: Scalar> {
    dim: usize,
    degree: usize,
    comps: BTreeMap<Vec<usize>, Poly<S>>,
}

impl<S: Scalar> PolyVectorField<S> {
    pub fn zero(dim: usize, degree: usize) -> Self {
        // degree > dim is the zero space: representable, but no components fit
        PolyVectorField { dim, degree, comps: BTreeMap::new() }
    }

    /// A 0-vector, i.e. a function.
    pub fn function(p: Poly<S>) -> Self {
        let dim = p.dim();
        let mut v = PolyVectorField::zero(dim, 0);
        v.set_component(&[], p);
        v
    }

    /// The coordinate vector field ∂_{i+1}.
    pub fn basis_vector(dim: usize, i: usize) -> Self {
        let mut v = PolyVectorField::zero(dim, 1);
        v.set_component(&[i], Poly::one(dim));
        v
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

    /// Sets the component on a sorted tuple (replacing any previous value).
    pub fn set_component(&mut self, tuple: &[usize], p: Poly<S>) {
        assert_eq!(tuple.len(), self.degree, "tuple length must equal degree");
        assert!(tuple.windows(2).all(|w| w[0] < w[1]), "tuple must be strictly increasing");
        assert!(tuple.iter().all(|&i| i < self.dim), "index out of range");
        assert_eq!(p.dim(), self.dim, "component dimension mismatch");
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

    /// Skew component on an arbitrary distinct tuple (0 on repeats).
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
        let mut out = PolyVectorField::zero(self.dim, self.degree);
        for (t, p) in &self.comps {
            out.comps.insert(t.clone(), p.neg());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = PolyVectorField::zero(self.dim, self.degree);
        for (t, p) in &self.comps {
            let q = p.scale(s);
            if !q.is_zero() {
                out.comps.insert(t.clone(), q);
            }
        }
        out
    }

    /// Multiplies every component by a polynomial (the C∞-module action).
    pub fn scale_poly(&self, f: &Poly<S>) -> Self {
        let mut out = PolyVectorField::zero(self.dim, self.degree);
        for (t, p) in &self.comps {
            let q = p.mul(f);
            if !q.is_zero() {
                out.comps.insert(t.clone(), q);
            }
        }
        out
    }

    /// Largest |component coefficient|.
    pub fn max_abs(&self) -> f64 {
        self.comps.values().map(Poly::max_abs).fold(0.0, f64::max)
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> PolyVectorField<T> {
        let mut out = PolyVectorField::zero(self.dim, self.degree);
        for (t, p) in &self.comps {
            let q = p.map_scalars(f);
            if !q.is_zero() {
                out.comps.insert(t.clone(), q);
            }
        }
        out
    }

    /// Graded-commutative wedge product.
    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let degree = self.degree + other.degree;
        assert!(degree <= self.dim, "degree exceeds dimension");
        let mut out = PolyVectorField::zero(self.dim, degree);
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

}

/// Schouten–Nijenhuis bracket in the odd-coordinate (antibracket) model:
/// [a,b] = Σ_i (a ∂⃖/∂θ_i)(∂b/∂x_i) − (∂a/∂x_i)(∂⃗/∂θ_i b).
pub fn schouten_standard<S: Scalar>(a: &PolyVectorField<S>, b: &PolyVectorField<S>) -> PolyVectorField<S> {
    assert_eq!(a.dim, b.dim, "dimension mismatch");
    let (k, l) = (a.degree, b.degree);
    let degree = (k + l).saturating_sub(1);
    let mut out = PolyVectorField::zero(a.dim, degree);
    if k + l == 0 {
        return out;
    }
    for i in 0..a.dim {
        for (ta, pa) in &a.comps {
            // (a ∂⃖/∂θ_i)(∂b/∂x_i)
            if let Some((ta_red, sign_a)) = right_derivative(ta, i) {
                for (tb, pb) in &b.comps {
                    let db = pb.deriv(i);
                    if db.is_zero() {
                        continue;
                    }
                    if let Some((tuple, sign_m)) = merge_sign(&ta_red, tb) {
                        let mut q = pa.mul(&db);
                        if sign_a * sign_m < 0 {
                            q = q.neg();
                        }
                        out.add_component(tuple, q);
                    }
                }
            }
            // −(∂a/∂x_i)(∂⃗/∂θ_i b)
            let da = pa.deriv(i);
            if da.is_zero() {
                continue;
            }
            for (tb, pb) in &b.comps {
                let Some((tb_red, sign_b)) = left_derivative(tb, i) else { continue };
                if let Some((tuple, sign_m)) = merge_sign(ta, &tb_red) {
                    let mut q = da.mul(pb);
                    if sign_b * sign_m > 0 {
                        q = q.neg();
                    }
                    out.add_component(tuple, q);
                }
            }
        }
    }
    out
}

/// The modified bracket [a,b]′ = −[b,a].
pub fn schouten<S: Scalar>(a: &PolyVectorField<S>, b: &PolyVectorField<S>) -> PolyVectorField<S> {
    schouten_standard(b, a).neg()
}

/// Convenience: bivector from skew components {(i,j) ↦ p_ij, i<j}.
pub fn bivector<S: Scalar>(dim: usize, comps: &[(usize, usize, Poly<S>)]) -> PolyVectorField<S> {
    let mut out = PolyVectorField::zero(dim, 2);
    for (i, j, p) in comps {
        assert!(i < j);
        out.add_component(vec![*i, *j], p.clone());
    }
    out
}

impl<S: Scalar> fmt::Display for PolyVectorField<S> {
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
            let basis: Vec<String> = t.iter().map(|i| format!("∂{}", i + 1)).collect();
            if t.is_empty() {
                write!(f, "{p}")?;
            } else {
                write!(f, "({p})*{}", basis.join("^"))?;
            }
        }
        Ok(())
    }
}
