//! Exact-arithmetic Lie theory: the Kirillov–Kostant–Souriau bivector, PBW
//! symmetrization, the Duflo element J = det(sinh(ad/2)/(ad/2)), the map
//! 𝒟 = sym∘(J^{1/2}·), and invariant/coinvariant verification.
//!
//! Everything in this module computes over ℚ; a floating value appearing
//! anywhere here is a defect. The single numerically flavored entry point,
//! [`morphism_i_check`], only *consumes* a star product built elsewhere and
//! compares it against the exact bracket.

mod elem;
mod invariants;
mod lie;
mod linalg;
mod uea;

pub use elem::{duflo_j, duflo_map, duflo_map_with, DufloTruncation};
pub use invariants::{
    ad_action, coinvariants_s, commutator_subspace, in_commutator_span, invariants,
    invariants_of_degree, QuotientMap,
};
pub use lie::LieAlgebra;
pub use linalg::{kernel_basis, RowSpan};
pub use uea::{normal_order, sym, uea_commutator, uea_product, UEAElement};

use serde_json::{json, Value};

use crate::algebra::{Ef64, PolyVectorField, Rat, Scalar, StarAlgebra};
use crate::formality::CALIBRATION;

/// Errors from Lie-algebra construction and Duflo-map truncation.
#[derive(Debug, thiserror::Error)]
pub enum DufloError {
    #[error("structure constants violate the Jacobi identity on (e{}, e{}, e{})", i + 1, j + 1, l + 1)]
    Jacobi { i: usize, j: usize, l: usize },
    #[error("invalid Lie algebra data: {0}")]
    BadInput(String),
    #[error("truncation degree {max_degree} too small for input of degree {needed}")]
    TruncationTooSmall { max_degree: u32, needed: u32 },
}

/// The KKS Poisson bivector on 𝔤*: π^{ij} = [e_i, e_j] as a linear function,
/// so {x_i, x_j} = Σ_k c^k_{ij} x_k. Jacobi for the structure constants makes
/// [π,π] = 0 exactly.
pub fn kks_bivector(l: &LieAlgebra) -> PolyVectorField<Rat> {
    let r = l.dim();
    let mut pi = PolyVectorField::zero(r, 2);
    for i in 0..r {
        for j in (i + 1)..r {
            pi.set_component(&[i, j], l.bracket_poly(i, j));
        }
    }
    debug_assert!(crate::algebra::schouten(&pi, &pi).is_zero());
    pi
}

/// Defect of x_i ⋆ x_j − x_j ⋆ x_i against the bracket, per ħ-order.
#[derive(Clone, Debug)]
pub struct MorphismReport {
    /// Largest |coefficient| of the defect at each ħ-order across generator pairs.
    pub defect: Vec<f64>,
    /// Largest propagated error bound at each order.
    pub err: Vec<f64>,
    /// The ħ value at which x ⋆ y − y ⋆ x = [x, y] holds on the nose.
    pub hbar_unit: f64,
}

impl MorphismReport {
    pub fn to_json(&self) -> Value {
        json!({
            "defect_per_order": self.defect,
            "err_per_order": self.err,
            "hbar_unit": self.hbar_unit,
        })
    }
}

/// Checks that ℐ: U(𝔤) → (S(𝔤), ⋆), x ↦ x is an algebra morphism on
/// generators: the ħ¹ coefficient of x_i ⋆ x_j − x_j ⋆ x_i must be
/// 2·CALIBRATION·[x_i, x_j] and every other order must vanish. Orders above
/// `order_bound` are skipped.
pub fn morphism_i_check(l: &LieAlgebra, s: &StarAlgebra<Ef64>, order_bound: usize) -> MorphismReport {
    let r = l.dim();
    let kmax = order_bound.min(s.order());
    let mut defect = vec![0.0f64; kmax + 1];
    let mut err = vec![0.0f64; kmax + 1];
    for i in 0..r {
        for j in (i + 1)..r {
            let x = crate::algebra::Poly::var(r, i).to_numeric();
            let y = crate::algebra::Poly::var(r, j).to_numeric();
            let fwd = s.apply(&x, &y);
            let bwd = s.apply(&y, &x);
            let expected =
                l.bracket_poly(i, j).to_numeric().scale(&Ef64::exact(2.0 * CALIBRATION));
            for k in 0..=kmax {
                let mut d = fwd.coeff(k).sub(bwd.coeff(k));
                if k == 1 {
                    d = d.sub(&expected);
                }
                defect[k] = defect[k].max(d.max_abs());
                err[k] = err[k].max(d.max_err());
            }
        }
    }
    MorphismReport { defect, err, hbar_unit: 1.0 / (2.0 * CALIBRATION) }
}

/// Exact verification of the Duflo theorem in bounded degree.
#[derive(Clone, Debug)]
pub struct DufloTheoremReport {
    pub degree: u32,
    /// (homogeneous degree, dim of the invariant space) for 1..=degree.
    pub invariant_dims: Vec<(u32, usize)>,
    /// Invariant pairs with 𝒟(p·q) = 𝒟(p)·𝒟(q) verified exactly.
    pub algebra_checked: usize,
    /// Invariants whose image commutes with every generator.
    pub central_checked: usize,
    /// (invariant, monomial) pairs whose defect landed in [U,U].
    pub coinvariant_checked: usize,
    /// Human-readable descriptions of any failed identities.
    pub failures: Vec<String>,
}

impl DufloTheoremReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "degree": self.degree,
            "invariant_dims": self.invariant_dims,
            "algebra_checked": self.algebra_checked,
            "central_checked": self.central_checked,
            "coinvariant_checked": self.coinvariant_checked,
            "failures": self.failures,
            "passed": self.passed(),
        })
    }
}

/// Runs the exact theorem suite through the given degree:
/// (a) 𝒟(p·q) = 𝒟(p)·𝒟(q) for invariant p, q with deg(pq) ≤ degree;
/// (b) 𝒟(p) is central for every invariant p;
/// (c) 𝒟(p·q) − 𝒟(p)·𝒟(q) ∈ [U,U] for invariant p and arbitrary monomial q.
pub fn duflo_theorem_check(l: &LieAlgebra, degree: u32) -> Result<DufloTheoremReport, DufloError> {
    let r = l.dim();
    let trunc = duflo_j(l, degree);
    let mut report = DufloTheoremReport {
        degree,
        invariant_dims: Vec::new(),
        algebra_checked: 0,
        central_checked: 0,
        coinvariant_checked: 0,
        failures: Vec::new(),
    };
    let mut invs: Vec<crate::algebra::Poly<Rat>> = Vec::new();
    for d in 1..=degree {
        let basis = invariants_of_degree(l, d);
        report.invariant_dims.push((d, basis.len()));
        invs.extend(basis);
    }
    // (b) centrality first: it is the cheapest failure to localize
    for p in &invs {
        let dp = duflo_map_with(l, &trunc, p)?;
        let central = (0..r)
            .all(|i| uea_commutator(l, &dp, &UEAElement::generator(r, i)).is_zero());
        if central {
            report.central_checked += 1;
        } else {
            report.failures.push(format!("𝒟({p}) is not central"));
        }
    }
    // (a) multiplicativity on invariant pairs
    for (a, p) in invs.iter().enumerate() {
        for q in invs.iter().skip(a) {
            if p.degree() + q.degree() > degree {
                continue;
            }
            let dp = duflo_map_with(l, &trunc, p)?;
            let dq = duflo_map_with(l, &trunc, q)?;
            let dpq = duflo_map_with(l, &trunc, &p.mul(q))?;
            if dpq == uea_product(l, &dp, &dq) {
                report.algebra_checked += 1;
            } else {
                report.failures.push(format!("𝒟(({p})·({q})) ≠ 𝒟({p})·𝒟({q})"));
            }
        }
    }
    // (c) coinvariants: defects against arbitrary monomials land in [U,U]
    let comm = commutator_subspace(l, degree);
    for p in &invs {
        let dp = duflo_map_with(l, &trunc, p)?;
        for d in 1..=degree.saturating_sub(p.degree()) {
            for e in invariants::monomials_of_degree(r, d) {
                let q = crate::algebra::Poly::monomial(r, e, <Rat as Scalar>::one());
                let dq = duflo_map_with(l, &trunc, &q)?;
                let dpq = duflo_map_with(l, &trunc, &p.mul(&q))?;
                let delta = dpq.sub(&uea_product(l, &dp, &dq));
                match comm.contains(&delta) {
                    Some(true) => report.coinvariant_checked += 1,
                    _ => report
                        .failures
                        .push(format!("𝒟(({p})·({q})) − 𝒟({p})·𝒟({q}) escapes [U,U]")),
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{schouten, Poly};

    #[test]
    fn kks_for_heisenberg_is_the_central_plane() {
        let pi = kks_bivector(&LieAlgebra::heisenberg());
        assert_eq!(pi.component(&[0, 1]), Poly::var(3, 2));
        assert!(pi.component(&[0, 2]).is_zero());
        assert!(pi.component(&[1, 2]).is_zero());
        assert!(schouten(&pi, &pi).is_zero());
    }

    #[test]
    fn theorem_report_serializes() {
        let report = duflo_theorem_check(&LieAlgebra::heisenberg(), 2).unwrap();
        assert!(report.passed());
        let v = report.to_json();
        assert_eq!(v["passed"], serde_json::Value::Bool(true));
        assert!(v["invariant_dims"].is_array());
    }

    #[test]
    fn abelian_theorem_is_all_trivial() {
        let report = duflo_theorem_check(&LieAlgebra::abelian(2), 3).unwrap();
        assert!(report.passed());
        // every monomial is invariant: dims are the full graded dimensions
        assert_eq!(report.invariant_dims, vec![(1, 2), (2, 3), (3, 4)]);
    }
}
