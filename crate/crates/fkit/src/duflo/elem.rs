//! The Duflo element J = det(sinh(ad/2)/(ad/2)) and the map
//! 𝒟 = sym∘(J^{1/2}·), all in exact degree-truncated arithmetic.
//!
//! The determinant is evaluated as exp(tr log): the scalar series
//! log(sinh(t/2)/(t/2)) = t²/24 − t⁴/2880 + … is composed with powers of the
//! linear-entry matrix ad_x, traced, and exponentiated. This avoids symbolic
//! determinants of matrices over power series and keeps every coefficient
//! rational.

use super::lie::LieAlgebra;
use super::uea::{sym, UEAElement};
use super::DufloError;
use crate::algebra::{factorial, rat, Poly, Rat, Scalar};

/// J and J^{1/2} truncated at a fixed total degree in Ŝ(𝔤*).
#[derive(Clone, Debug, PartialEq)]
pub struct DufloTruncation {
    pub max_degree: u32,
    pub j: Poly<Rat>,
    pub j_half: Poly<Rat>,
}

/// Coefficients of log(sinh(t/2)/(t/2)) through t^d_max (odd entries zero).
fn log_sinh_half_series(d_max: usize) -> Vec<Rat> {
    let zero = <Rat as Scalar>::zero;
    // s = sinh(t/2)/(t/2) = Σ_k t^{2k} / (4^k (2k+1)!)
    let mut s = vec![zero(); d_max + 1];
    let mut four_k = rat(1, 1);
    for k in 0..=(d_max / 2) {
        s[2 * k] = (four_k.clone() * factorial(2 * k as u32 + 1)).recip();
        four_k = four_k * rat(4, 1);
    }
    // log(1 + u) = Σ_m (−1)^{m+1} u^m / m with u = s − 1 of valuation 2
    let mut u = s;
    u[0] = zero();
    let mut out = vec![zero(); d_max + 1];
    let mut power = u.clone();
    let mut m = 1i64;
    while 2 * (m as usize) <= d_max + 1 && power.iter().any(|c| !c.is_zero()) {
        let sign = if m % 2 == 1 { rat(1, m) } else { rat(-1, m) };
        for (i, c) in power.iter().enumerate() {
            out[i] = out[i].clone() + c.clone() * sign.clone();
        }
        // power ← power · u, truncated
        let mut next = vec![zero(); d_max + 1];
        for (i, a) in power.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in u.iter().enumerate() {
                if i + j > d_max || b.is_zero() {
                    continue;
                }
                next[i + j] = next[i + j].clone() + a.clone() * b.clone();
            }
        }
        power = next;
        m += 1;
    }
    out
}

/// exp of a polynomial with zero constant term, truncated at total degree d.
fn poly_exp(p: &Poly<Rat>, d: u32) -> Poly<Rat> {
    let dim = p.dim();
    assert!(p.coeff(&vec![0; dim]).is_zero(), "exp needs zero constant term");
    let mut acc = Poly::one(dim);
    let mut power = Poly::one(dim);
    for m in 1..=d {
        power = power.mul(p).truncate_degree(d);
        if power.is_zero() {
            break;
        }
        acc = acc.add(&power.scale(&factorial(m).recip()));
    }
    acc
}

/// The truncated Duflo element: J = exp(Σ_k β_{2k} tr(ad_x^{2k})) with β the
/// series above, and J^{1/2} from half the logarithm.
pub fn duflo_j(l: &LieAlgebra, d_max: u32) -> DufloTruncation {
    let r = l.dim();
    let beta = log_sinh_half_series(d_max as usize);
    let ad = l.ad_linear_matrix();
    let mut log_j = Poly::zero(r);
    let mut power: Vec<Vec<Poly<Rat>>> = (0..r)
        .map(|i| (0..r).map(|j| if i == j { Poly::one(r) } else { Poly::zero(r) }).collect())
        .collect();
    for deg in 1..=d_max as usize {
        // power ← power · ad (entries homogeneous of degree `deg`)
        let mut next = vec![vec![Poly::zero(r); r]; r];
        for (i, row) in power.iter().enumerate() {
            for j in 0..r {
                for (k, entry) in row.iter().enumerate() {
                    next[i][j] = next[i][j].add(&entry.mul(&ad[k][j]));
                }
            }
        }
        power = next;
        if deg % 2 == 0 && !beta[deg].is_zero() {
            let mut trace = Poly::zero(r);
            for (i, row) in power.iter().enumerate() {
                trace = trace.add(&row[i]);
            }
            log_j = log_j.add(&trace.scale(&beta[deg]));
        }
    }
    let j = poly_exp(&log_j, d_max);
    let j_half = poly_exp(&log_j.scale(&rat(1, 2)), d_max);
    debug_assert_eq!(j_half.mul(&j_half).truncate_degree(d_max), j);
    DufloTruncation { max_degree: d_max, j, j_half }
}

/// 𝒟(p) = sym(J^{1/2}·p) with a precomputed truncation.
///
/// Ŝ(𝔤*) acts on S(𝔤) by constant-coefficient derivatives: the monomial
/// ξ^a ↦ ∂^a. Dropped terms of degree > max_degree act nontrivially exactly
/// when deg p exceeds the truncation, which is rejected.
pub fn duflo_map_with(
    l: &LieAlgebra,
    trunc: &DufloTruncation,
    p: &Poly<Rat>,
) -> Result<UEAElement, DufloError> {
    if p.degree() > trunc.max_degree {
        return Err(DufloError::TruncationTooSmall {
            max_degree: trunc.max_degree,
            needed: p.degree(),
        });
    }
    let mut acted = Poly::zero(p.dim());
    for (a, c) in trunc.j_half.terms() {
        let d = p.deriv_multi(a);
        if !d.is_zero() {
            acted = acted.add(&d.scale(c));
        }
    }
    Ok(sym(l, &acted))
}

/// 𝒟 = sym∘(J^{1/2}·) : S(𝔤) → U(𝔤), truncating J at degree d_max.
pub fn duflo_map(l: &LieAlgebra, p: &Poly<Rat>, d_max: u32) -> Result<UEAElement, DufloError> {
    duflo_map_with(l, &duflo_j(l, d_max), p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_series_constants() {
        // log(sinh(t/2)/(t/2)) = t²/24 − t⁴/2880 + t⁶/181440 − …
        let s = log_sinh_half_series(6);
        assert_eq!(s[0], rat(0, 1));
        assert_eq!(s[2], rat(1, 24));
        assert_eq!(s[4], rat(-1, 2880));
        assert_eq!(s[6], rat(1, 181440));
        assert_eq!(s[3], rat(0, 1));
    }

    #[test]
    fn poly_exp_matches_binomial_square() {
        // exp(x1 + x2) truncated at 2 = 1 + (x1+x2) + (x1+x2)²/2
        let p = Poly::parse("x1 + x2", 2).unwrap();
        let e = poly_exp(&p, 2);
        let want = Poly::parse("1 + x1 + x2 + 1/2*x1^2 + x1*x2 + 1/2*x2^2", 2).unwrap();
        assert_eq!(e, want);
    }

    #[test]
    fn degree_one_inputs_pass_through() {
        // J^{1/2} has no degree-1 terms, so 𝒟(x) = sym(x) = x
        let sl2 = LieAlgebra::sl2();
        let x = Poly::parse("x2", 3).unwrap();
        let d = duflo_map(&sl2, &x, 4).unwrap();
        assert_eq!(d, UEAElement::generator(3, 1));
    }

    #[test]
    fn j_starts_at_one() {
        let t = duflo_j(&LieAlgebra::so3(), 2);
        assert_eq!(t.j.coeff(&[0, 0, 0]), rat(1, 1));
        // so₃: tr(ad_x²) = −2(x1²+x2²+x3²), so the quadratic term is −(…)/12
        assert_eq!(t.j.coeff(&[2, 0, 0]), rat(-1, 12));
        assert_eq!(t.j.coeff(&[0, 2, 0]), rat(-1, 12));
    }
}
