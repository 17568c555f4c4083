//! Star algebras ⋆ = μ + B and the ⋆-twisted Hochschild operations.
//!
//! A `StarAlgebra` carries the bidifferential corrections B = Σ_{k≥1} ħ^k B_k;
//! the product term at order 0 is always the pointwise product μ. Cup, cap,
//! and both Hochschild differentials are computed order by order in ħ, so
//! every identity that holds exactly per order (e.g. for the Moyal product
//! with rational coefficients) can be tested exactly.

use super::chain::{boundary_with_product, cap_with_product, HochschildChain};
use super::diffop::{gerstenhaber_bracket, PolyDiffOp};
use super::poly::{Poly, Scalar};
use super::series::HbarSeries;

/// Polynomial algebra with star product ⋆ = μ + Σ_{k≥1} ħ^k B_k.
#[derive(Clone, Debug)]
pub struct StarAlgebra<S: Scalar> {
    dim: usize,
    corrections: HbarSeries<PolyDiffOp<S>>,
}

impl<S: Scalar> StarAlgebra<S> {
    /// Builds from the correction series B; B₀ must vanish and all B_k are bidifferential.
    pub fn new(corrections: HbarSeries<PolyDiffOp<S>>) -> Self {
        let dim = corrections.coeff(0).dim();
        assert!(corrections.coeff(0).is_zero(), "star product must reduce to μ at ħ⁰");
        for k in 0..=corrections.order() {
            assert_eq!(corrections.coeff(k).arity(), 2, "corrections must be bidifferential");
            assert_eq!(corrections.coeff(k).dim(), dim);
        }
        StarAlgebra { dim, corrections }
    }

    /// The undeformed algebra (B = 0) truncated at the given order.
    pub fn classical(dim: usize, order: usize) -> Self {
        let coeffs = vec![PolyDiffOp::zero(dim, 2); order + 1];
        StarAlgebra { dim, corrections: HbarSeries::new(coeffs) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Truncation order N: all operations are exact mod ħ^{N+1}.
    pub fn order(&self) -> usize {
        self.corrections.order()
    }

    pub fn corrections(&self) -> &HbarSeries<PolyDiffOp<S>> {
        &self.corrections
    }

    /// The ħ^k coefficient of m_⋆ = μ + B.
    pub fn product_term(&self, k: usize) -> PolyDiffOp<S> {
        assert!(k <= self.order(), "order {k} beyond truncation {}", self.order());
        if k == 0 {
            PolyDiffOp::mu(self.dim)
        } else {
            self.corrections.coeff(k).clone()
        }
    }

    /// f ⋆ g as an ħ-series of polynomials.
    pub fn apply(&self, f: &Poly<S>, g: &Poly<S>) -> HbarSeries<Poly<S>> {
        let args = [f.clone(), g.clone()];
        let coeffs = (0..=self.order()).map(|k| self.product_term(k).apply(&args)).collect();
        HbarSeries::new(coeffs)
    }
}

/// Cup product (φ∪ψ)(a₁..a_{p+q}) = φ(a₁..a_p) ⋆ ψ(a_{p+1}..a_{p+q}), per ħ-order.
pub fn cochain_cup<S: Scalar>(
    phi: &PolyDiffOp<S>,
    psi: &PolyDiffOp<S>,
    s: &StarAlgebra<S>,
) -> HbarSeries<PolyDiffOp<S>> {
    let p = phi.arity();
    let coeffs = (0..=s.order())
        .map(|k| s.product_term(k).compose_at(0, phi).compose_at(p, psi))
        .collect();
    HbarSeries::new(coeffs)
}

/// ⋆-twisted Hochschild coboundary d_{H,⋆}φ = [m_⋆, φ]_G, per ħ-order.
pub fn hochschild_d<S: Scalar>(phi: &PolyDiffOp<S>, s: &StarAlgebra<S>) -> HbarSeries<PolyDiffOp<S>> {
    let coeffs = (0..=s.order()).map(|k| gerstenhaber_bracket(&s.product_term(k), phi)).collect();
    HbarSeries::new(coeffs)
}

/// d_{H,⋆} extended to ħ-series of cochains by convolution with m_⋆.
pub fn hochschild_d_series<S: Scalar>(
    phi: &HbarSeries<PolyDiffOp<S>>,
    s: &StarAlgebra<S>,
) -> HbarSeries<PolyDiffOp<S>> {
    let order = s.order().min(phi.order());
    let coeffs = (0..=order)
        .map(|k| {
            let mut acc = PolyDiffOp::zero(s.dim(), phi.coeff(0).arity() + 1);
            for i in 0..=k {
                acc = acc.add(&gerstenhaber_bracket(&s.product_term(i), phi.coeff(k - i)));
            }
            acc
        })
        .collect();
    HbarSeries::new(coeffs)
}

/// Cap action φ∩c with all products by ⋆, per ħ-order; zero when arity(φ) > n.
pub fn cochain_cap_chain<S: Scalar>(
    phi: &PolyDiffOp<S>,
    c: &HochschildChain<S>,
    s: &StarAlgebra<S>,
) -> HbarSeries<HochschildChain<S>> {
    let coeffs = (0..=s.order()).map(|k| cap_with_product(phi, c, &s.product_term(k))).collect();
    HbarSeries::new(coeffs)
}

/// ⋆-twisted Hochschild boundary b_⋆, per ħ-order (order 0 is the classical b).
pub fn hochschild_b<S: Scalar>(c: &HochschildChain<S>, s: &StarAlgebra<S>) -> HbarSeries<HochschildChain<S>> {
    let coeffs = (0..=s.order()).map(|k| boundary_with_product(c, &s.product_term(k))).collect();
    HbarSeries::new(coeffs)
}

/// b_⋆ extended to ħ-series of chains by convolution with m_⋆.
pub fn hochschild_b_series<S: Scalar>(
    cs: &HbarSeries<HochschildChain<S>>,
    s: &StarAlgebra<S>,
) -> HbarSeries<HochschildChain<S>> {
    let order = s.order().min(cs.order());
    let len = cs.coeff(0).len();
    let out_len = len.saturating_sub(1).max(1);
    let coeffs = (0..=order)
        .map(|k| {
            let mut acc = HochschildChain::zero(s.dim(), out_len);
            for i in 0..=k {
                acc = acc.add(&boundary_with_product(cs.coeff(k - i), &s.product_term(i)));
            }
            acc
        })
        .collect();
    HbarSeries::new(coeffs)
}

/// Maurer–Cartan residual d_H B + ½[B,B]: per-order max coefficient norms.
/// Identically zero iff ⋆ is associative per order in ħ.
pub fn mc_residual<S: Scalar>(s: &StarAlgebra<S>) -> HbarSeries<f64> {
    let mu = PolyDiffOp::mu(s.dim());
    let b = s.corrections();
    let mut norms = Vec::with_capacity(s.order() + 1);
    for k in 0..=s.order() {
        // [μ, B_k] + ½ Σ_{i+j=k, i,j≥1} [B_i, B_j]
        let mut res = gerstenhaber_bracket(&mu, b.coeff(k));
        for i in 1..k {
            let half = S::from_ratio(1, 2);
            res = res.add(&gerstenhaber_bracket(b.coeff(i), b.coeff(k - i)).scale(&half));
        }
        norms.push(res.max_abs());
    }
    HbarSeries::new(norms)
}
