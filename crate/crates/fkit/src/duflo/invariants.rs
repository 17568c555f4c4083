//! Invariants and coinvariants by exact linear algebra on graded pieces.
//!
//! The adjoint action extends to S(𝔤) as a derivation per generator; its
//! kernel on each homogeneous piece gives S(𝔤)^𝔤, and the span of its image
//! gives the coinvariant quotient S(𝔤)_𝔤. On the enveloping-algebra side the
//! span of word commutators certifies membership in [U,U].

use std::collections::BTreeMap;

use super::lie::LieAlgebra;
use super::linalg::{kernel_basis, RowSpan};
use super::uea::{uea_commutator, UEAElement};
use crate::algebra::{Poly, Rat, Scalar};

/// The derivation action of e_i on S(𝔤): x_j ↦ [e_i, e_j], extended by
/// Leibniz — ad_i(p) = Σ_j [e_i, e_j]·∂_j p.
pub fn ad_action(l: &LieAlgebra, i: usize, p: &Poly<Rat>) -> Poly<Rat> {
    let mut out = Poly::zero(l.dim());
    for j in 0..l.dim() {
        let dj = p.deriv(j);
        if dj.is_zero() {
            continue;
        }
        out = out.add(&l.bracket_poly(i, j).mul(&dj));
    }
    out
}

/// All exponent vectors of total degree exactly `d`.
pub(crate) fn monomials_of_degree(dim: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(expo: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<Vec<u32>>) {
        if pos + 1 == expo.len() {
            expo[pos] = left;
            out.push(expo.clone());
            return;
        }
        for take in 0..=left {
            expo[pos] = take;
            rec(expo, pos + 1, left - take, out);
        }
    }
    let mut out = Vec::new();
    rec(&mut vec![0; dim], 0, d, &mut out);
    out
}

/// Basis of the homogeneous invariants S^d(𝔤)^𝔤 as the exact kernel of the
/// stacked adjoint actions.
pub fn invariants_of_degree(l: &LieAlgebra, d: u32) -> Vec<Poly<Rat>> {
    let r = l.dim();
    let basis = monomials_of_degree(r, d);
    let index: BTreeMap<&Vec<u32>, usize> =
        basis.iter().enumerate().map(|(n, e)| (e, n)).collect();
    // rows of the map v ↦ (ad_1 v, …, ad_r v) in the monomial basis
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for i in 0..r {
        let images: Vec<Poly<Rat>> = basis
            .iter()
            .map(|e| ad_action(l, i, &Poly::monomial(r, e.clone(), <Rat as Scalar>::one())))
            .collect();
        for target in &basis {
            let row: Vec<Rat> = images.iter().map(|p| p.coeff(target)).collect();
            if row.iter().any(|c| !c.is_zero()) {
                rows.push(row);
            }
        }
    }
    kernel_basis(&rows, basis.len())
        .into_iter()
        .map(|v| {
            let mut p = Poly::zero(r);
            for (e, &n) in &index {
                if !v[n].is_zero() {
                    p = p.add(&Poly::monomial(r, (*e).clone(), v[n].clone()));
                }
            }
            p
        })
        .collect()
}

/// Invariant basis for every degree 0..=degree, constants included.
pub fn invariants(l: &LieAlgebra, degree: u32) -> Vec<Poly<Rat>> {
    (0..=degree).flat_map(|d| invariants_of_degree(l, d)).collect()
}

/// Quotient-map data: a chosen basis of the ambient graded space together
/// with the RREF span of the killed subspace. Classes are canonical
/// representatives (pivot coordinates eliminated); the quotient dimension is
/// the corank.
#[derive(Clone, Debug)]
pub struct QuotientMap<K: Ord + Clone> {
    basis: Vec<K>,
    index: BTreeMap<K, usize>,
    span: RowSpan,
}

impl<K: Ord + Clone> QuotientMap<K> {
    fn new(basis: Vec<K>) -> Self {
        let index = basis.iter().cloned().enumerate().map(|(n, k)| (k, n)).collect();
        let span = RowSpan::new(basis.len());
        QuotientMap { basis, index, span }
    }

    pub fn basis(&self) -> &[K] {
        &self.basis
    }

    pub fn subspace_rank(&self) -> usize {
        self.span.rank()
    }

    pub fn quotient_dim(&self) -> usize {
        self.basis.len() - self.span.rank()
    }

    /// Coordinates of a (key, coefficient) expansion; None when a key falls
    /// outside the chosen basis (degree beyond the bound).
    fn coords<'a>(&self, entries: impl Iterator<Item = (&'a K, &'a Rat)>) -> Option<Vec<Rat>>
    where
        K: 'a,
    {
        let mut v = vec![<Rat as Scalar>::zero(); self.basis.len()];
        for (k, c) in entries {
            let &n = self.index.get(k)?;
            v[n] = v[n].clone() + c.clone();
        }
        Some(v)
    }

    fn class_coords(&self, v: &[Rat]) -> Vec<Rat> {
        self.span.reduce(v)
    }
}

impl QuotientMap<Vec<u32>> {
    /// Canonical representative of a polynomial modulo 𝔤·S(𝔤); None when its
    /// degree exceeds the bound this map was built for.
    pub fn class(&self, p: &Poly<Rat>) -> Option<Poly<Rat>> {
        let v = self.coords(p.terms())?;
        let red = self.class_coords(&v);
        let mut out = Poly::zero(self.basis[0].len());
        for (k, c) in self.basis.iter().zip(red) {
            if !c.is_zero() {
                out = out.add(&Poly::monomial(k.len(), k.clone(), c));
            }
        }
        Some(out)
    }

    pub fn contains(&self, p: &Poly<Rat>) -> Option<bool> {
        self.class(p).map(|c| c.is_zero())
    }
}

impl QuotientMap<Vec<usize>> {
    /// Canonical representative modulo the commutator span; None when a word
    /// exceeds the degree bound.
    pub fn class(&self, u: &UEAElement) -> Option<UEAElement> {
        let v = self.coords(u.terms())?;
        let red = self.class_coords(&v);
        let mut out = UEAElement::zero(u.dim());
        for (w, c) in self.basis.iter().zip(red) {
            if !c.is_zero() {
                out = out.add(&UEAElement::from_word(u.dim(), w, c));
            }
        }
        Some(out)
    }

    pub fn contains(&self, u: &UEAElement) -> Option<bool> {
        let v = self.coords(u.terms())?;
        Some(self.class_coords(&v).iter().all(Rat::is_zero))
    }
}

/// PBW words (non-decreasing) of length exactly `d`.
fn words_of_degree(dim: usize, d: u32) -> Vec<Vec<usize>> {
    fn rec(word: &mut Vec<usize>, min: usize, left: u32, dim: usize, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(word.clone());
            return;
        }
        for i in min..dim {
            word.push(i);
            rec(word, i, left - 1, dim, out);
            word.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), 0, d, dim, &mut out);
    out
}

/// Quotient map for S(𝔤)_𝔤 = S/𝔤·S, on monomials of degree ≤ `degree`.
pub fn coinvariants_s(l: &LieAlgebra, degree: u32) -> QuotientMap<Vec<u32>> {
    let r = l.dim();
    let basis: Vec<Vec<u32>> =
        (0..=degree).flat_map(|d| monomials_of_degree(r, d)).collect();
    let mut map = QuotientMap::new(basis);
    for d in 1..=degree {
        for e in monomials_of_degree(r, d) {
            let m = Poly::monomial(r, e, <Rat as Scalar>::one());
            for i in 0..r {
                let image = ad_action(l, i, &m);
                if image.is_zero() {
                    continue;
                }
                let v = map.coords(image.terms()).expect("action preserves degree");
                map.span.insert(&v);
            }
        }
    }
    map
}

/// Quotient map for U(𝔤)_𝔤 = U/[U,U] on PBW words of degree ≤ `degree`.
///
/// The killed subspace is spanned by commutators of basis words with total
/// degree ≤ degree + 1 (each commutator drops one degree, so the rows stay
/// inside the bound). Membership in this span is a sound certificate for
/// membership in [U,U].
pub fn commutator_subspace(l: &LieAlgebra, degree: u32) -> QuotientMap<Vec<usize>> {
    let r = l.dim();
    let basis: Vec<Vec<usize>> = (0..=degree).flat_map(|d| words_of_degree(r, d)).collect();
    let mut map = QuotientMap::new(basis);
    let words: Vec<Vec<usize>> = (1..=degree).flat_map(|d| words_of_degree(r, d)).collect();
    for a in &words {
        for b in &words {
            if a.len() + b.len() > degree as usize + 1 {
                continue;
            }
            let ua = UEAElement::from_word(r, a, <Rat as Scalar>::one());
            let ub = UEAElement::from_word(r, b, <Rat as Scalar>::one());
            let c = uea_commutator(l, &ua, &ub);
            if c.is_zero() {
                continue;
            }
            let v = map.coords(c.terms()).expect("commutators drop one degree");
            map.span.insert(&v);
        }
    }
    map
}

/// True when `u` lies in the certified commutator span of `degree`-bounded
/// word pairs; panics if `u` itself exceeds the bound.
pub fn in_commutator_span(l: &LieAlgebra, u: &UEAElement, degree: u32) -> bool {
    commutator_subspace(l, degree)
        .contains(u)
        .expect("element degree exceeds the commutator-span bound")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abelian_invariants_are_everything() {
        let l = LieAlgebra::abelian(2);
        assert_eq!(invariants_of_degree(&l, 2).len(), 3);
        assert_eq!(invariants(&l, 2).len(), 1 + 2 + 3);
        // and the commutator span is zero: the quotient keeps everything
        let map = commutator_subspace(&l, 2);
        assert_eq!(map.subspace_rank(), 0);
        assert_eq!(map.quotient_dim(), map.basis().len());
    }

    #[test]
    fn heisenberg_center_shows_up() {
        // x₃ is central: it and its powers are invariant
        let l = LieAlgebra::heisenberg();
        let deg1 = invariants_of_degree(&l, 1);
        assert_eq!(deg1.len(), 1);
        assert_eq!(deg1[0].scale(&deg1[0].coeff(&[0, 0, 1]).recip()), Poly::var(3, 2));
        let deg2 = invariants_of_degree(&l, 2);
        assert!(deg2.iter().any(|p| !p.coeff(&[0, 0, 2]).is_zero()));
    }

    #[test]
    fn sl2_coinvariants_in_low_degree() {
        // S/𝔤S for sl₂ through degree 2: the constants and the Casimir class
        let map = coinvariants_s(&LieAlgebra::sl2(), 2);
        assert_eq!(map.basis().len(), 10);
        assert_eq!(map.quotient_dim(), 2);
        // the Casimir is not killed, x1 is
        let c = Poly::parse("x1*x3 + 1/4*x2^2", 3).unwrap();
        assert_eq!(map.contains(&c), Some(false));
        assert_eq!(map.contains(&Poly::var(3, 0)), Some(true));
        // degree beyond the bound is signalled, not silently wrong
        assert_eq!(map.contains(&Poly::parse("x1^3", 3).unwrap()), None);
    }

    #[test]
    fn derivation_action_leibniz() {
        let l = LieAlgebra::sl2();
        let p = Poly::parse("x1*x2", 3).unwrap();
        let q = Poly::parse("x3^2", 3).unwrap();
        let lhs = ad_action(&l, 0, &p.mul(&q));
        let rhs = ad_action(&l, 0, &p).mul(&q).add(&p.mul(&ad_action(&l, 0, &q)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn word_enumeration_counts() {
        assert_eq!(words_of_degree(3, 2).len(), 6);
        assert_eq!(words_of_degree(3, 4).len(), 15);
        assert_eq!(monomials_of_degree(3, 4).len(), 15);
    }

    #[test]
    fn quotient_class_is_idempotent() {
        let l = LieAlgebra::sl2();
        let map = coinvariants_s(&l, 2);
        let p = Poly::parse("x1*x3 + x2", 3).unwrap();
        let c1 = map.class(&p).unwrap();
        let c2 = map.class(&c1).unwrap();
        assert_eq!(c1, c2);
    }
}
