//! Exact oracles for the Duflo layer.
//!
//! The element J is pinned by an independent symbolic determinant (Leibniz
//! expansion of the 3×3 matrix series), sym by hand normal-ordering, the
//! quadratic part of J by explicit matrix traces, and the theorem checks by
//! exact PBW arithmetic end to end. Everything here is rational arithmetic;
//! the single star-product check at the bottom is the only place floats enter,
//! and they stay on the star side of the comparison.

use fkit::algebra::{rat, schouten, Poly, Rat, Scalar};
use fkit::duflo::{
    commutator_subspace, duflo_j, duflo_map, duflo_theorem_check, in_commutator_span,
    invariants_of_degree, kks_bivector, sym, uea_commutator, uea_product, DufloError, LieAlgebra,
    UEAElement,
};
use fkit::formality::{star, TruncationPolicy, WeightBook, CALIBRATION};

fn p(src: &str, dim: usize) -> Poly<Rat> {
    Poly::parse(src, dim).unwrap()
}

/// (ad_x)^k_j = Σ_i x_i c^k_{ij}, rebuilt from raw structure constants so the
/// oracle does not share the implementation's matrix plumbing.
fn ad_poly_matrix(l: &LieAlgebra) -> Vec<Vec<Poly<Rat>>> {
    let r = l.dim();
    let mut m = vec![vec![Poly::zero(r); r]; r];
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                let c = l.structure_constant(i, j, k);
                if !c.is_zero() {
                    m[k][j] = m[k][j].add(&Poly::var(r, i).scale(&c));
                }
            }
        }
    }
    m
}

fn mat_mul(a: &[Vec<Poly<Rat>>], b: &[Vec<Poly<Rat>>]) -> Vec<Vec<Poly<Rat>>> {
    let r = a.len();
    let dim = a[0][0].dim();
    let mut out = vec![vec![Poly::zero(dim); r]; r];
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                out[i][j] = out[i][j].add(&a[i][k].mul(&b[k][j]));
            }
        }
    }
    out
}

/// 3×3 determinant by the Leibniz rule — independent of the exp∘tr∘log route.
fn det3(m: &[Vec<Poly<Rat>>]) -> Poly<Rat> {
    let mut acc = Poly::zero(m[0][0].dim());
    let perms: [([usize; 3], i64); 6] = [
        ([0, 1, 2], 1),
        ([1, 2, 0], 1),
        ([2, 0, 1], 1),
        ([0, 2, 1], -1),
        ([2, 1, 0], -1),
        ([1, 0, 2], -1),
    ];
    for (sigma, sign) in perms {
        let term = m[0][sigma[0]].mul(&m[1][sigma[1]]).mul(&m[2][sigma[2]]);
        acc = acc.add(&term.scale(&Rat::from_i64(sign)));
    }
    acc
}

/// Rank of an exact rational matrix by Gauss elimination, local to the tests.
fn rank(mut rows: Vec<Vec<Rat>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = <Rat as Scalar>::one() / rows[rank][col].clone();
        for v in rows[rank].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                for c in 0..ncols {
                    let d = rows[rank][c].clone() * f.clone();
                    rows[r][c] = rows[r][c].clone() - d;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn monomials_of_degree(dim: usize, d: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut expo = vec![0u32; dim];
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
    rec(&mut expo, 0, d, &mut out);
    out
}

/// sl₂ Casimir in the basis x1=e, x2=h, x3=f with [e,f]=h, [h,e]=2e, [h,f]=−2f.
fn casimir() -> Poly<Rat> {
    p("x1*x3 + 1/4*x2^2", 3)
}

#[test]
fn determinant_oracle_fixes_j() {
    // J = det(sinh(ad/2)/(ad/2)); the matrix series is
    // I + ad²/24 + ad⁴/1920 (mod degree 6), so a direct symbolic determinant
    // of the truncated matrix pins J through degree 4 with no shared code.
    for l in [LieAlgebra::sl2(), LieAlgebra::so3()] {
        let r = l.dim();
        let ad = ad_poly_matrix(&l);
        let ad2 = mat_mul(&ad, &ad);
        let ad4 = mat_mul(&ad2, &ad2);
        let mut m = vec![vec![Poly::zero(r); r]; r];
        for i in 0..r {
            for j in 0..r {
                m[i][j] = ad2[i][j].scale(&rat(1, 24)).add(&ad4[i][j].scale(&rat(1, 1920)));
            }
            m[i][i] = m[i][i].add(&Poly::one(r));
        }
        let det = det3(&m).truncate_degree(4);
        let trunc = duflo_j(&l, 4);
        assert_eq!(trunc.j, det, "exp∘tr∘log J disagrees with the determinant");
    }
}

#[test]
fn j_quadratic_part_is_killing_form_over_24() {
    // tr(ad_x²) for sl₂ is the Killing form 8·x2² + 8·x1·x3 (explicit traces:
    // tr(ad_h²)=8, tr(ad_e·ad_f)=4). The series log(sinh(t/2)/(t/2)) starts
    // t²/24, so J = 1 + tr(ad²)/24 + O(deg 4) while the halved element J^{1/2}
    // carries tr(ad²)/48 — the place the 1/48 belongs.
    let trunc = duflo_j(&LieAlgebra::sl2(), 4);
    assert_eq!(trunc.j.coeff(&[0, 2, 0]), rat(8, 24));
    assert_eq!(trunc.j.coeff(&[1, 0, 1]), rat(8, 24));
    assert_eq!(trunc.j_half.coeff(&[0, 2, 0]), rat(8, 48));
    assert_eq!(trunc.j_half.coeff(&[1, 0, 1]), rat(8, 48));
    assert_eq!(trunc.j.coeff(&[0, 0, 0]), rat(1, 1));
    // no odd-degree terms anywhere
    for (e, _) in trunc.j.terms() {
        assert_eq!(e.iter().sum::<u32>() % 2, 0, "odd-degree term in J");
    }
}

#[test]
fn j_half_squares_to_j() {
    for l in [LieAlgebra::sl2(), LieAlgebra::so3()] {
        for d_max in [2, 4, 6] {
            let t = duflo_j(&l, d_max);
            assert_eq!(t.j_half.mul(&t.j_half).truncate_degree(d_max), t.j);
            assert_eq!(t.max_degree, d_max);
        }
    }
}

#[test]
fn nilpotent_and_abelian_have_trivial_j() {
    for l in [LieAlgebra::heisenberg(), LieAlgebra::abelian(2)] {
        let r = l.dim();
        let t = duflo_j(&l, 4);
        assert_eq!(t.j, Poly::one(r), "J must be identically 1");
        assert_eq!(t.j_half, Poly::one(r));
        // with J = 1 the map is plain symmetrization
        let q = Poly::var(r, 0).mul(&Poly::var(r, 1));
        assert_eq!(duflo_map(&l, &q, 4).unwrap(), sym(&l, &q));
    }
}

#[test]
fn sym_matches_hand_normal_ordering() {
    // sl₂: sym(e·f) = ½(ef + fe) = ef − ½h since fe = ef − [e,f] = ef − h.
    let sl2 = LieAlgebra::sl2();
    let s = sym(&sl2, &p("x1*x3", 3));
    assert_eq!(s.coeff(&[0, 2]), rat(1, 1));
    assert_eq!(s.coeff(&[1]), rat(-1, 2));
    assert_eq!(s.terms().count(), 2);
    // Heisenberg: sym(x1·x2) = x1x2 − ½x3.
    let h3 = LieAlgebra::heisenberg();
    let s = sym(&h3, &p("x1*x2", 3));
    assert_eq!(s.coeff(&[0, 1]), rat(1, 1));
    assert_eq!(s.coeff(&[2]), rat(-1, 2));
    // already-ordered squares and degree ≤ 1 inputs pass through unchanged
    let s = sym(&sl2, &p("x2^2", 3));
    assert_eq!(s.coeff(&[1, 1]), rat(1, 1));
    assert_eq!(s.terms().count(), 1);
    let s = sym(&sl2, &p("3*x1 + 1/2", 3));
    assert_eq!(s.coeff(&[0]), rat(3, 1));
    assert_eq!(s.coeff(&[]), rat(1, 2));
}

#[test]
fn pbw_dimension_match_through_degree_four() {
    // sym must be a linear isomorphism S^{≤4} → U^{≤4}: the 35×35 coefficient
    // matrix over the PBW word basis has full rank.
    let sl2 = LieAlgebra::sl2();
    let mut monos: Vec<Vec<u32>> = Vec::new();
    for d in 0..=4 {
        monos.extend(monomials_of_degree(3, d));
    }
    assert_eq!(monos.len(), 35);
    let mut words: Vec<Vec<usize>> = Vec::new();
    let mut rows = Vec::new();
    for e in &monos {
        let u = sym(&sl2, &Poly::monomial(3, e.clone(), <Rat as Scalar>::one()));
        for (w, _) in u.terms() {
            if !words.contains(w) {
                words.push(w.clone());
            }
        }
        rows.push(u);
    }
    assert_eq!(words.len(), 35, "PBW words of degree ≤ 4 in three generators");
    let matrix: Vec<Vec<Rat>> =
        rows.iter().map(|u| words.iter().map(|w| u.coeff(w)).collect()).collect();
    assert_eq!(rank(matrix), 35);
}

#[test]
fn casimir_is_the_degree_two_invariant() {
    let sl2 = LieAlgebra::sl2();
    let basis = invariants_of_degree(&sl2, 2);
    assert_eq!(basis.len(), 1);
    // the computed invariant is a scalar multiple of x1x3 + x2²/4
    let got = &basis[0];
    let scale = got.coeff(&[1, 0, 1]);
    assert!(!scale.is_zero());
    assert_eq!(got.scale(&(<Rat as Scalar>::one() / scale)), casimir());
    // no linear invariants, one quartic invariant class (C²)
    assert_eq!(invariants_of_degree(&sl2, 1).len(), 0);
    assert_eq!(invariants_of_degree(&sl2, 4).len(), 1);
}

#[test]
fn duflo_of_casimir_squared_is_the_square() {
    let sl2 = LieAlgebra::sl2();
    let c = casimir();
    let dc = duflo_map(&sl2, &c, 4).unwrap();
    let dc2 = duflo_map(&sl2, &c.mul(&c), 4).unwrap();
    assert_eq!(dc2, uea_product(&sl2, &dc, &dc), "𝒟(C²) ≠ 𝒟(C)²");
    // plain symmetrization fails this identity — the J^{1/2} correction is real
    let sc = sym(&sl2, &c);
    let sc2 = sym(&sl2, &c.mul(&c));
    assert_ne!(sc2, uea_product(&sl2, &sc, &sc), "sym alone should not be multiplicative");
}

#[test]
fn duflo_of_casimir_is_central() {
    let sl2 = LieAlgebra::sl2();
    let dc = duflo_map(&sl2, &casimir(), 2).unwrap();
    for i in 0..3 {
        let gen = UEAElement::generator(3, i);
        assert!(uea_commutator(&sl2, &dc, &gen).is_zero(), "𝒟(C) fails to commute with x{}", i + 1);
    }
}

#[test]
fn coinvariant_defect_lands_in_commutators() {
    // 𝒟(C·q) − 𝒟(C)·𝒟(q) need not vanish for non-invariant q, but it must be
    // a sum of commutators. Membership in the span of word commutators of
    // total degree ≤ 5 is an exact positive certificate.
    let sl2 = LieAlgebra::sl2();
    let c = casimir();
    let dc = duflo_map(&sl2, &c, 4).unwrap();
    let mut checked = 0;
    for d in 1..=2u32 {
        for e in monomials_of_degree(3, d) {
            let q = Poly::monomial(3, e, <Rat as Scalar>::one());
            let dq = duflo_map(&sl2, &q, 4).unwrap();
            let dcq = duflo_map(&sl2, &c.mul(&q), 4).unwrap();
            let delta = dcq.sub(&uea_product(&sl2, &dc, &dq));
            assert!(in_commutator_span(&sl2, &delta, 4), "defect escapes [U,U] for q = {q}");
            checked += 1;
        }
    }
    assert_eq!(checked, 9);
    // controls: ef − fe = [e,f] is in the span; the unit is not
    let ef = uea_product(&sl2, &UEAElement::generator(3, 0), &UEAElement::generator(3, 2));
    let fe = uea_product(&sl2, &UEAElement::generator(3, 2), &UEAElement::generator(3, 0));
    assert!(in_commutator_span(&sl2, &ef.sub(&fe), 4));
    assert!(!in_commutator_span(&sl2, &UEAElement::one(3), 4));
    let map = commutator_subspace(&sl2, 4);
    assert!(map.quotient_dim() > 0);
}

#[test]
fn theorem_suite_passes_on_all_shipped_algebras() {
    for l in [LieAlgebra::sl2(), LieAlgebra::so3(), LieAlgebra::heisenberg(), LieAlgebra::abelian(2)] {
        let report = duflo_theorem_check(&l, 4).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures);
        assert!(report.algebra_checked > 0);
        assert!(report.central_checked > 0);
    }
    // sl₂ has exactly the Casimir in degree 2 and its square in degree 4
    let report = duflo_theorem_check(&LieAlgebra::sl2(), 4).unwrap();
    assert!(report.invariant_dims.contains(&(2, 1)));
    assert!(report.invariant_dims.contains(&(4, 1)));
}

#[test]
fn kks_bracket_reproduces_structure_constants() {
    for l in [LieAlgebra::sl2(), LieAlgebra::so3(), LieAlgebra::heisenberg()] {
        let r = l.dim();
        let pi = kks_bivector(&l);
        for i in 0..r {
            for j in (i + 1)..r {
                assert_eq!(pi.component(&[i, j]), l.bracket_poly(i, j));
            }
        }
        assert!(schouten(&pi, &pi).is_zero(), "KKS bivector must satisfy Jacobi");
    }
    assert!(kks_bivector(&LieAlgebra::abelian(2)).is_zero());
}

#[test]
fn lie_json_round_trip_and_validation() {
    let src = r#"{"dim":3,"c":[[1,2,1,-2,1],[1,3,2,1,1],[2,3,3,-2,1]]}"#;
    let l = LieAlgebra::from_json(src).unwrap();
    assert_eq!(l, LieAlgebra::sl2());
    // violating Jacobi: {x1,x2}=x3, {x2,x3}=x2
    let bad = r#"{"dim":3,"c":[[1,2,3,1,1],[2,3,2,1,1]]}"#;
    assert!(matches!(LieAlgebra::from_json(bad), Err(DufloError::Jacobi { .. })));
    // malformed entries
    assert!(LieAlgebra::from_json(r#"{"dim":3,"c":[[2,1,3,1,1]]}"#).is_err());
    assert!(LieAlgebra::from_json(r#"{"dim":3,"c":[[1,2,3,1,0]]}"#).is_err());
    assert!(LieAlgebra::from_json(r#"{"dim":3,"c":[[1,4,3,1,1]]}"#).is_err());
}

#[test]
fn truncation_too_small_is_detected() {
    let sl2 = LieAlgebra::sl2();
    let c2 = casimir().mul(&casimir());
    assert!(matches!(
        duflo_map(&sl2, &c2, 3),
        Err(DufloError::TruncationTooSmall { max_degree: 3, needed: 4 })
    ));
    assert!(duflo_map(&sl2, &c2, 4).is_ok());
}

#[test]
fn star_commutator_realizes_the_bracket() {
    // The star product of the KKS bivector represents the bracket on linear
    // functions: x_i ⋆ x_j − x_j ⋆ x_i = 2·CALIBRATION·[x_i,x_j]·ħ + O(ħ²),
    // so ℐ: U(𝔤) → (S(𝔤),⋆) is an algebra morphism once ħ is fixed to
    // 1/(2·CALIBRATION). Verified here numerically at first order.
    let l = LieAlgebra::heisenberg();
    let pi = kks_bivector(&l).map_scalars(|c| fkit::algebra::Ef64::exact(c.value_f64()));
    let mut book = WeightBook::in_memory();
    let policy = TruncationPolicy { order: 1, samples: 1 << 17, ..TruncationPolicy::default() };
    let s = star(&pi, &policy, &mut book).unwrap();
    let report = fkit::duflo::morphism_i_check(&l, &s, 1);
    assert_eq!(report.defect[0], 0.0, "ħ⁰ commutator must vanish exactly");
    assert!(
        report.defect[1] <= (4.0 * report.err[1]).max(2e-2),
        "ħ¹ defect {} vs err {}",
        report.defect[1],
        report.err[1]
    );
    assert!((report.hbar_unit - 1.0 / (2.0 * CALIBRATION)).abs() < 1e-15);
}
