//! Truncated formal power series in ħ over an arbitrary carrier.

use std::fmt;

use super::poly::{Poly, Scalar};

/// Coefficients c₀..c_N of a series Σ cₖ ħᵏ truncated at order N = len−1.
#[derive(Clone, Debug, PartialEq)]
pub struct HbarSeries<T> {
    coeffs: Vec<T>,
}

impl<T> HbarSeries<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least the ħ⁰ coefficient");
        HbarSeries { coeffs }
    }

    /// Truncation order N.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &T {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.coeffs.iter()
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> HbarSeries<U> {
        HbarSeries { coeffs: self.coeffs.iter().map(f).collect() }
    }

    /// Pads (with `zero`) or cuts to truncation order `n`.
    pub fn resized(&self, n: usize, zero: impl Fn() -> T) -> Self
    where
        T: Clone,
    {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize_with(n + 1, zero);
        HbarSeries { coeffs }
    }

    pub fn zip_with<U, V>(&self, other: &HbarSeries<U>, mut f: impl FnMut(&T, &U) -> V) -> HbarSeries<V> {
        assert_eq!(self.order(), other.order(), "series order mismatch");
        HbarSeries {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect(),
        }
    }
}

/// Truncated Cauchy product with caller-supplied ring operations.
pub fn convolve<T, U, V>(
    a: &HbarSeries<T>,
    b: &HbarSeries<U>,
    mut mul: impl FnMut(&T, &U) -> V,
    mut add: impl FnMut(&V, &V) -> V,
    zero: impl Fn() -> V,
) -> HbarSeries<V> {
    let n = a.order().min(b.order());
    let mut coeffs = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut acc = zero();
        for i in 0..=k {
            let term = mul(&a.coeffs[i], &b.coeffs[k - i]);
            acc = add(&acc, &term);
        }
        coeffs.push(acc);
    }
    HbarSeries { coeffs }
}

impl<S: Scalar> HbarSeries<Poly<S>> {
    pub fn zero_poly(order: usize, dim: usize) -> Self {
        HbarSeries { coeffs: vec![Poly::zero(dim); order + 1] }
    }

    /// Embeds a plain polynomial at ħ⁰.
    pub fn from_poly(p: Poly<S>, order: usize) -> Self {
        let dim = p.dim();
        let mut coeffs = vec![Poly::zero(dim); order + 1];
        coeffs[0] = p;
        HbarSeries { coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.sub(b))
    }

    pub fn neg(&self) -> Self {
        self.map(|p| p.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let dim = self.coeffs[0].dim();
        convolve(self, other, |a, b| a.mul(b), |a, b| a.add(b), || Poly::zero(dim))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Poly::is_zero)
    }

    /// Per-order max |coefficient|.
    pub fn norms(&self) -> Vec<f64> {
        self.coeffs.iter().map(Poly::max_abs).collect()
    }

    /// Per-order max propagated error bound.
    pub fn err_norms(&self) -> Vec<f64> {
        self.coeffs.iter().map(Poly::max_err).collect()
    }
}

impl<S: Scalar> fmt::Display for HbarSeries<Poly<S>> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "ħ*({c})")?,
                _ => write!(f, "ħ^{k}*({c})")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::Rat;

    #[test]
    fn poly_series_arithmetic() {
        let x = Poly::<Rat>::parse("x1", 1).unwrap();
        let a = HbarSeries::new(vec![Poly::one(1), x.clone()]); // 1 + ħx
        let b = a.mul(&a); // 1 + 2ħx mod ħ²
        assert_eq!(b.coeff(0), &Poly::one(1));
        assert_eq!(b.coeff(1), &Poly::parse("2*x1", 1).unwrap());
        assert_eq!(b.order(), 1);
        assert_eq!(a.sub(&a).norms(), vec![0.0, 0.0]);
    }

    #[test]
    fn display_skips_zero_orders() {
        let x = Poly::<Rat>::parse("x1", 1).unwrap();
        let s = HbarSeries::new(vec![Poly::zero(1), Poly::zero(1), x]);
        assert_eq!(s.to_string(), "ħ^2*(x1)");
    }
}
