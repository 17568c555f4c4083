//! The universal enveloping algebra by PBW normal ordering.
//!
//! Elements are stored on the basis of non-decreasing generator words; the
//! product concatenates words and rewrites descents x_a x_b → x_b x_a + [a,b]
//! until every word is ordered. All coefficients are exact rationals.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;

use super::lie::LieAlgebra;
use crate::algebra::{factorial, Poly, Rat, Scalar};

/// An element of U(𝔤) on the PBW basis: non-decreasing index words to scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct UEAElement {
    dim: usize,
    terms: BTreeMap<Vec<usize>, Rat>,
}

impl UEAElement {
    pub fn zero(dim: usize) -> Self {
        UEAElement { dim, terms: BTreeMap::new() }
    }

    pub fn one(dim: usize) -> Self {
        let mut u = UEAElement::zero(dim);
        u.insert_add(Vec::new(), <Rat as Scalar>::one());
        u
    }

    /// The generator x_{i+1} as an element of U.
    pub fn generator(dim: usize, i: usize) -> Self {
        assert!(i < dim, "generator index out of range");
        let mut u = UEAElement::zero(dim);
        u.insert_add(vec![i], <Rat as Scalar>::one());
        u
    }

    /// c·word for an already normal-ordered (non-decreasing) word.
    pub fn from_word(dim: usize, word: &[usize], c: Rat) -> Self {
        assert!(word.windows(2).all(|w| w[0] <= w[1]), "word must be non-decreasing");
        assert!(word.iter().all(|&i| i < dim), "generator index out of range");
        let mut u = UEAElement::zero(dim);
        u.insert_add(word.to_vec(), c);
        u
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// PBW words with their coefficients.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, word: &[usize]) -> Rat {
        self.terms.get(word).cloned().unwrap_or_else(<Rat as Scalar>::zero)
    }

    /// Length of the longest stored word; 0 for the zero element.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|w| w.len() as u32).max().unwrap_or(0)
    }

    fn insert_add(&mut self, word: Vec<usize>, c: Rat) {
        if c.is_zero() {
            return;
        }
        debug_assert!(word.windows(2).all(|w| w[0] <= w[1]), "word must be normal-ordered");
        match self.terms.get_mut(&word) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&word);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(word, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.insert_add(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = UEAElement::zero(self.dim);
        for (w, c) in &self.terms {
            out.terms.insert(w.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Rat) -> Self {
        let mut out = UEAElement::zero(self.dim);
        if s.is_zero() {
            return out;
        }
        for (w, c) in &self.terms {
            out.terms.insert(w.clone(), c.clone() * s.clone());
        }
        out
    }
}

/// Normal-orders an arbitrary word into the PBW basis by iterated rewriting
/// of descents: x_a x_b = x_b x_a + [x_a, x_b] for a > b.
pub fn normal_order(l: &LieAlgebra, word: &[usize], coeff: &Rat) -> UEAElement {
    let mut out = UEAElement::zero(l.dim());
    let mut work: Vec<(Vec<usize>, Rat)> = vec![(word.to_vec(), coeff.clone())];
    while let Some((w, c)) = work.pop() {
        match w.windows(2).position(|pair| pair[0] > pair[1]) {
            None => out.insert_add(w, c),
            Some(p) => {
                let (a, b) = (w[p], w[p + 1]);
                let mut swapped = w.clone();
                swapped.swap(p, p + 1);
                work.push((swapped, c.clone()));
                for (k, ck) in l.bracket_basis(a, b) {
                    let mut shorter = Vec::with_capacity(w.len() - 1);
                    shorter.extend_from_slice(&w[..p]);
                    shorter.push(k);
                    shorter.extend_from_slice(&w[p + 2..]);
                    work.push((shorter, c.clone() * ck));
                }
            }
        }
    }
    out
}

/// Product in U(𝔤): concatenate words, then normal-order.
pub fn uea_product(l: &LieAlgebra, u: &UEAElement, v: &UEAElement) -> UEAElement {
    assert_eq!(u.dim, v.dim, "dimension mismatch");
    let mut out = UEAElement::zero(u.dim);
    for (wu, cu) in &u.terms {
        for (wv, cv) in &v.terms {
            let mut word = Vec::with_capacity(wu.len() + wv.len());
            word.extend_from_slice(wu);
            word.extend_from_slice(wv);
            out = out.add(&normal_order(l, &word, &(cu.clone() * cv.clone())));
        }
    }
    out
}

/// [u, v] = uv − vu in U(𝔤).
pub fn uea_commutator(l: &LieAlgebra, u: &UEAElement, v: &UEAElement) -> UEAElement {
    uea_product(l, u, v).sub(&uea_product(l, v, u))
}

/// The symmetrization map S(𝔤) → U(𝔤):
/// x_{i₁}⋯x_{i_k} ↦ (1/k!) Σ_σ x_{i_{σ(1)}}⋯x_{i_{σ(k)}}.
pub fn sym(l: &LieAlgebra, p: &Poly<Rat>) -> UEAElement {
    assert_eq!(p.dim(), l.dim(), "dimension mismatch");
    let mut out = UEAElement::zero(l.dim());
    for (expo, c) in p.terms() {
        let word: Vec<usize> =
            expo.iter().enumerate().flat_map(|(i, &e)| std::iter::repeat(i).take(e as usize)).collect();
        let k = word.len();
        let weight = c.clone() / factorial(k as u32);
        // permutations(0) yields the single empty word, handling constants
        for perm in word.iter().copied().permutations(k) {
            out = out.add(&normal_order(l, &perm, &weight));
        }
    }
    out
}

// Words print like monomials with runs collapsed to powers: [0,0,2] → x1^2*x3.
impl fmt::Display for UEAElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (w, c) in &self.terms {
            let cs = c.to_string();
            let (neg, mag) = match cs.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, cs),
            };
            if first {
                if neg {
                    f.write_str("-")?;
                }
                first = false;
            } else if neg {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            let mut run = 0usize;
            for (pos, &i) in w.iter().enumerate() {
                run += 1;
                if pos + 1 == w.len() || w[pos + 1] != i {
                    factors.push(if run == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, run)
                    });
                    run = 0;
                }
            }
            if factors.is_empty() {
                f.write_str(&mag)?;
            } else if mag == "1" {
                f.write_str(&factors.join("*"))?;
            } else {
                write!(f, "{}*{}", mag, factors.join("*"))?;
            }
        }
        Ok(())
    }
}
