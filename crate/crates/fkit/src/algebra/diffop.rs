//! Polydifferential operators: arity-m operators Σ c(x)·∂^{K₁}⊗…⊗∂^{K_m}
//! with polynomial coefficients, Gerstenhaber composition and bracket.

use std::collections::BTreeMap;
use std::fmt;

use super::poly::{multinomial, Poly, Rat, Scalar};
use super::vector::PolyVectorField;

/// A polydifferential operator of fixed arity; arity 0 is a plain polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyDiffOp<S: Scalar> {
    dim: usize,
    arity: usize,
    /// derivative signature (m multi-indices) ↦ coefficient polynomial
    terms: BTreeMap<Vec<Vec<u32>>, Poly<S>>,
}

impl<S: Scalar> PolyDiffOp<S> {
    pub fn zero(dim: usize, arity: usize) -> Self {
        PolyDiffOp { dim, arity, terms: BTreeMap::new() }
    }

    /// The pointwise product μ(f,g) = fg (arity-2, identity derivatives).
    pub fn mu(dim: usize) -> Self {
        let mut op = PolyDiffOp::zero(dim, 2);
        op.add_term(vec![vec![0; dim], vec![0; dim]], Poly::one(dim));
        op
    }

    /// The identity 1-ary operator.
    pub fn identity(dim: usize) -> Self {
        let mut op = PolyDiffOp::zero(dim, 1);
        op.add_term(vec![vec![0; dim]], Poly::one(dim));
        op
    }

    /// An arity-0 operator is a polynomial.
    pub fn constant(p: Poly<S>) -> Self {
        let dim = p.dim();
        let mut op = PolyDiffOp::zero(dim, 0);
        op.add_term(vec![], p);
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Vec<u32>>, &Poly<S>)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, signature: Vec<Vec<u32>>, coeff: Poly<S>) {
        assert_eq!(signature.len(), self.arity, "signature arity mismatch");
        assert!(signature.iter().all(|k| k.len() == self.dim), "multi-index length mismatch");
        assert_eq!(coeff.dim(), self.dim);
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&signature) {
            Some(c) => {
                let s = c.add(&coeff);
                if s.is_zero() {
                    self.terms.remove(&signature);
                } else {
                    *c = s;
                }
            }
            None => {
                self.terms.insert(signature, coeff);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.dim, self.arity), (other.dim, other.arity));
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = PolyDiffOp::zero(self.dim, self.arity);
        for (k, c) in &self.terms {
            out.terms.insert(k.clone(), c.neg());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = PolyDiffOp::zero(self.dim, self.arity);
        for (k, c) in &self.terms {
            let q = c.scale(s);
            if !q.is_zero() {
                out.terms.insert(k.clone(), q);
            }
        }
        out
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> PolyDiffOp<T> {
        let mut out = PolyDiffOp::zero(self.dim, self.arity);
        for (k, c) in &self.terms {
            let q = c.map_scalars(f);
            if !q.is_zero() {
                out.terms.insert(k.clone(), q);
            }
        }
        out
    }

    /// Largest |coefficient| across all terms.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(Poly::max_abs).fold(0.0, f64::max)
    }

    pub fn max_err(&self) -> f64 {
        self.terms.values().map(Poly::max_err).fold(0.0, f64::max)
    }

    /// Applies the operator to `arity` polynomial arguments.
    pub fn apply(&self, args: &[Poly<S>]) -> Poly<S> {
        assert_eq!(args.len(), self.arity, "argument count mismatch");
        let mut out = Poly::zero(self.dim);
        for (sig, coeff) in &self.terms {
            let mut prod = coeff.clone();
            for (k, f) in sig.iter().zip(args) {
                prod = prod.mul(&f.deriv_multi(k));
                if prod.is_zero() {
                    break;
                }
            }
            out = out.add(&prod);
        }
        out
    }

    /// Raw insertion φ∘_slot ψ (0-based slot), no Gerstenhaber sign:
    /// (φ∘_iψ)(f₁,…) = φ(f₁,…,ψ(f_{i+1},…,f_{i+q}),…).
    pub fn compose_at(&self, slot: usize, psi: &Self) -> Self {
        assert!(slot < self.arity, "slot out of range");
        assert_eq!(self.dim, psi.dim);
        let q = psi.arity;
        let mut out = PolyDiffOp::zero(self.dim, self.arity + q - 1);
        for (sig_f, coeff_f) in &self.terms {
            let k_slot = &sig_f[slot];
            for (sig_g, coeff_g) in &psi.terms {
                // Leibniz: ∂^{K}(c_g · ∏_j ∂^{L_j}g_j) summed over splits of K
                // into q+1 parts (one for the coefficient, one per argument).
                for (parts, weight) in split_multi_index(k_slot, q + 1) {
                    let dcoeff = coeff_g.deriv_multi(&parts[0]);
                    if dcoeff.is_zero() {
                        continue;
                    }
                    let mut sig = Vec::with_capacity(self.arity + q - 1);
                    sig.extend_from_slice(&sig_f[..slot]);
                    for (j, lg) in sig_g.iter().enumerate() {
                        let merged: Vec<u32> =
                            lg.iter().zip(&parts[j + 1]).map(|(a, b)| a + b).collect();
                        sig.push(merged);
                    }
                    sig.extend_from_slice(&sig_f[slot + 1..]);
                    let coeff = coeff_f.mul(&dcoeff).scale(&scalar_from_rat::<S>(&weight));
                    out.add_term(sig, coeff);
                }
            }
        }
        out
    }
}

fn scalar_from_rat<S: Scalar>(r: &Rat) -> S {
    use num_traits::ToPrimitive;
    let num = r.numer().to_i64().expect("combinatorial factor fits i64");
    let den = r.denom().to_i64().expect("combinatorial factor fits i64");
    S::from_ratio(num, den)
}

/// All splits of a multi-index K into `parts` summands, with the product of
/// per-coordinate multinomial coefficients.
fn split_multi_index(k: &[u32], parts: usize) -> Vec<(Vec<Vec<u32>>, Rat)> {
    // Per coordinate: compositions of k_c into `parts` non-negative integers.
    let mut acc: Vec<(Vec<Vec<u32>>, Rat)> =
        vec![(vec![Vec::with_capacity(k.len()); parts], Rat::from_integer(1.into()))];
    for &kc in k {
        let comps = compositions(kc, parts);
        let mut next = Vec::with_capacity(acc.len() * comps.len());
        for (split, w) in &acc {
            for comp in &comps {
                let mut split2 = split.clone();
                for (p, &c) in comp.iter().enumerate() {
                    split2[p].push(c);
                }
                next.push((split2, w * multinomial(comp)));
            }
        }
        acc = next;
    }
    acc
}

/// Compositions of n into `parts` ordered non-negative summands.
fn compositions(n: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Gerstenhaber circle φ∘ψ = Σ_i (−1)^{(i−1)(q−1)} φ∘_iψ (1-based i).
pub fn gerstenhaber_circle<S: Scalar>(phi: &PolyDiffOp<S>, psi: &PolyDiffOp<S>) -> PolyDiffOp<S> {
    let q = psi.arity();
    let mut out = PolyDiffOp::zero(phi.dim(), phi.arity() + q - 1);
    for i in 0..phi.arity() {
        let term = phi.compose_at(i, psi);
        if (i * (q + 1)) % 2 == 1 {
            out = out.sub(&term);
        } else {
            out = out.add(&term);
        }
    }
    out
}

/// Gerstenhaber bracket [φ,ψ] = φ∘ψ − (−1)^{(p−1)(q−1)} ψ∘φ.
pub fn gerstenhaber_bracket<S: Scalar>(phi: &PolyDiffOp<S>, psi: &PolyDiffOp<S>) -> PolyDiffOp<S> {
    let (p, q) = (phi.arity(), psi.arity());
    let lhs = gerstenhaber_circle(phi, psi);
    let rhs = gerstenhaber_circle(psi, phi);
    if ((p + 1) * (q + 1)) % 2 == 1 {
        lhs.add(&rhs)
    } else {
        lhs.sub(&rhs)
    }
}

/// HKR cochain map: a k-vector α becomes the k-ary operator
/// (f₁,…,f_k) ↦ Σ_{i₁…i_k} α^{i₁…i_k} ∂_{i₁}f₁ ⋯ ∂_{i_k}f_k.
pub fn hkr_cochain<S: Scalar>(alpha: &PolyVectorField<S>) -> PolyDiffOp<S> {
    let dim = alpha.dim();
    let k = alpha.degree();
    let mut out = PolyDiffOp::zero(dim, k);
    let mut tuple = vec![0usize; k];
    loop {
        let comp = alpha.component(&tuple);
        if !comp.is_zero() {
            let sig: Vec<Vec<u32>> = tuple
                .iter()
                .map(|&i| {
                    let mut m = vec![0u32; dim];
                    m[i] = 1;
                    m
                })
                .collect();
            out.add_term(sig, comp);
        }
        // advance odometer over [d]^k
        let mut pos = k;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < dim {
                break;
            }
            tuple[pos] = 0;
        }
    }
}

impl<S: Scalar> fmt::Display for PolyDiffOp<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (sig, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let slots: Vec<String> = sig
                .iter()
                .map(|k| {
                    let parts: Vec<String> = k
                        .iter()
                        .enumerate()
                        .filter(|(_, &e)| e > 0)
                        .map(|(i, &e)| if e == 1 { format!("d{}", i + 1) } else { format!("d{}^{}", i + 1, e) })
                        .collect();
                    if parts.is_empty() { "id".into() } else { parts.join("") }
                })
                .collect();
            write!(f, "({c})·[{}]", slots.join("⊗"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::vector::bivector;

    fn p(s: &str, d: usize) -> Poly<Rat> {
        Poly::parse(s, d).unwrap()
    }

    #[test]
    fn mu_multiplies() {
        let mu = PolyDiffOp::<Rat>::mu(2);
        assert_eq!(mu.apply(&[p("x1", 2), p("x2", 2)]), p("x1*x2", 2));
    }

    #[test]
    fn hkr_of_bivector() {
        // hkr(∂₁∧∂₂)(f,g) = ∂₁f∂₂g − ∂₂f∂₁g.
        let op = hkr_cochain(&bivector(2, &[(0, 1, Poly::<Rat>::one(2))]));
        let f = p("x1^2", 2);
        let g = p("x1*x2", 2);
        let got = op.apply(&[f.clone(), g.clone()]);
        let want = f.deriv(0).mul(&g.deriv(1)).sub(&f.deriv(1).mul(&g.deriv(0)));
        assert_eq!(got, want);
    }

    #[test]
    fn compose_at_leibniz() {
        // D = ∂₁⊗id composed into slot 0 of itself: second derivative spread.
        let mut d1 = PolyDiffOp::<Rat>::zero(1, 1);
        d1.add_term(vec![vec![2]], Poly::one(1));
        let mut mult_x = PolyDiffOp::<Rat>::zero(1, 1);
        mult_x.add_term(vec![vec![0]], p("x1", 1));
        // ∂²(x·f) = 2∂f + x∂²f
        let comp = d1.compose_at(0, &mult_x);
        let f = p("x1^3", 1);
        assert_eq!(comp.apply(&[f.clone()]), p("x1", 1).mul(&f.deriv(0).deriv(0)).add(&f.deriv(0).scale(&rat2(2))));
    }

    fn rat2(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    #[test]
    fn classical_hochschild_differential_via_bracket() {
        // [μ,φ](a,b) = aφ(b) − φ(ab) + φ(a)b for 1-ary φ.
        let mu = PolyDiffOp::<Rat>::mu(1);
        let mut phi = PolyDiffOp::<Rat>::zero(1, 1);
        phi.add_term(vec![vec![1]], p("x1", 1)); // φ = x·∂
        let d_phi = gerstenhaber_bracket(&mu, &phi);
        let (a, b) = (p("x1^2", 1), p("x1^3", 1));
        let want = a
            .mul(&phi.apply(&[b.clone()]))
            .sub(&phi.apply(&[a.mul(&b)]))
            .add(&phi.apply(&[a.clone()]).mul(&b));
        assert_eq!(d_phi.apply(&[a, b]), want);
    }

    #[test]
    fn associator_is_half_self_bracket() {
        // For arity-2 m: [m,m](a,b,c) = 2(m(m(a,b),c) − m(a,m(b,c))).
        let mut m = PolyDiffOp::<Rat>::mu(1);
        m.add_term(vec![vec![1], vec![1]], p("x1", 1)); // non-associative deformation
        let bracket = gerstenhaber_bracket(&m, &m);
        let (a, b, c) = (p("x1", 1), p("x1^2", 1), p("x1^3", 1));
        let assoc = m
            .apply(&[m.apply(&[a.clone(), b.clone()]), c.clone()])
            .sub(&m.apply(&[a.clone(), m.apply(&[b.clone(), c.clone()])]));
        assert_eq!(bracket.apply(&[a, b, c]), assoc.scale(&rat2(2)));
    }

    #[test]
    fn arity_zero_composition() {
        // d_H of an arity-0 operator c: (a) ↦ a·c − c·a = 0 classically,
        // via the bracket: [μ, c] has arity 1.
        let mu = PolyDiffOp::<Rat>::mu(1);
        let c = PolyDiffOp::constant(p("x1^2", 1));
        let d_c = gerstenhaber_bracket(&mu, &c);
        assert_eq!(d_c.arity(), 1);
        assert!(d_c.apply(&[p("x1^4", 1)]).is_zero());
    }
}
