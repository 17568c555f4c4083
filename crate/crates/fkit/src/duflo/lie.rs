//! Finite-dimensional Lie algebras over ℚ by structure constants, with the
//! Jacobi identity enforced at construction and a JSON interchange format.

use serde::Deserialize;

use super::DufloError;
use crate::algebra::{rat, Poly, Rat, Scalar};

/// A Lie algebra with basis e₁..e_r and [e_i, e_j] = Σ_k c^k_{ij} e_k.
///
/// The constant table is stored fully skew-filled; constructors accept only
/// the i < j half and reject data violating skew-symmetry or Jacobi.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    // c[i][j][k] = c^k_{ij}
    c: Vec<Vec<Vec<Rat>>>,
}

impl LieAlgebra {
    /// Builds from the strict upper triangle: entries (i, j, k, c^k_{ij})
    /// with i < j, all indices 0-based.
    pub fn new(dim: usize, entries: &[(usize, usize, usize, Rat)]) -> Result<Self, DufloError> {
        let mut c = vec![vec![vec![<Rat as Scalar>::zero(); dim]; dim]; dim];
        for (i, j, k, val) in entries {
            if *i >= *j {
                return Err(DufloError::BadInput(format!(
                    "structure constant indices must satisfy i < j, got ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
            if *j >= dim || *k >= dim {
                return Err(DufloError::BadInput(format!(
                    "index out of range for dimension {dim}: ({}, {}, {})",
                    i + 1,
                    j + 1,
                    k + 1
                )));
            }
            c[*i][*j][*k] = c[*i][*j][*k].clone() + val.clone();
            c[*j][*i][*k] = c[*j][*i][*k].clone() - val.clone();
        }
        let l = LieAlgebra { dim, c };
        l.check_jacobi()?;
        Ok(l)
    }

    /// Parses `{"dim":r,"c":[[i,j,k,num,den],...]}` with 1-based indices i < j.
    pub fn from_json(src: &str) -> Result<Self, DufloError> {
        #[derive(Deserialize)]
        struct Data {
            dim: usize,
            c: Vec<(usize, usize, usize, i64, i64)>,
        }
        let data: Data =
            serde_json::from_str(src).map_err(|e| DufloError::BadInput(e.to_string()))?;
        let mut entries = Vec::with_capacity(data.c.len());
        for (i, j, k, num, den) in data.c {
            if den == 0 {
                return Err(DufloError::BadInput("zero denominator".into()));
            }
            if i == 0 || j == 0 || k == 0 {
                return Err(DufloError::BadInput("indices are 1-based".into()));
            }
            entries.push((i - 1, j - 1, k - 1, rat(num, den)));
        }
        LieAlgebra::new(data.dim, &entries)
    }

    fn check_jacobi(&self) -> Result<(), DufloError> {
        let r = self.dim;
        for i in 0..r {
            for j in (i + 1)..r {
                for l in (j + 1)..r {
                    for k in 0..r {
                        let mut acc = <Rat as Scalar>::zero();
                        // [[e_i,e_j],e_l] + [[e_j,e_l],e_i] + [[e_l,e_i],e_j]
                        for m in 0..r {
                            acc = acc
                                + self.c[i][j][m].clone() * self.c[m][l][k].clone()
                                + self.c[j][l][m].clone() * self.c[m][i][k].clone()
                                + self.c[l][i][m].clone() * self.c[m][j][k].clone();
                        }
                        if !acc.is_zero() {
                            return Err(DufloError::Jacobi { i, j, l });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The abelian algebra of the given dimension (all brackets zero).
    pub fn abelian(dim: usize) -> Self {
        LieAlgebra::new(dim, &[]).unwrap()
    }

    /// Heisenberg: [e₁,e₂] = e₃, e₃ central.
    pub fn heisenberg() -> Self {
        LieAlgebra::new(3, &[(0, 1, 2, rat(1, 1))]).unwrap()
    }

    /// sl₂ in the basis x1 = e, x2 = h, x3 = f:
    /// [e,h] = −2e, [e,f] = h, [h,f] = −2f.
    pub fn sl2() -> Self {
        LieAlgebra::new(3, &[(0, 1, 0, rat(-2, 1)), (0, 2, 1, rat(1, 1)), (1, 2, 2, rat(-2, 1))])
            .unwrap()
    }

    /// so₃: [e₁,e₂] = e₃, [e₂,e₃] = e₁, [e₃,e₁] = e₂.
    pub fn so3() -> Self {
        LieAlgebra::new(3, &[(0, 1, 2, rat(1, 1)), (1, 2, 0, rat(1, 1)), (0, 2, 1, rat(-1, 1))])
            .unwrap()
    }

    /// A shipped algebra by name, for CLI and test plumbing.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "abelian" => Some(LieAlgebra::abelian(2)),
            "heisenberg" => Some(LieAlgebra::heisenberg()),
            "sl2" => Some(LieAlgebra::sl2()),
            "so3" => Some(LieAlgebra::so3()),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// c^k_{ij}, any index order (skew-filled).
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> Rat {
        self.c[i][j][k].clone()
    }

    /// Nonzero components of [e_i, e_j] as (k, c^k_{ij}) pairs.
    pub fn bracket_basis(&self, i: usize, j: usize) -> Vec<(usize, Rat)> {
        (0..self.dim).filter(|&k| !self.c[i][j][k].is_zero()).map(|k| (k, self.c[i][j][k].clone())).collect()
    }

    /// [e_i, e_j] as the linear polynomial Σ_k c^k_{ij} x_k.
    pub fn bracket_poly(&self, i: usize, j: usize) -> Poly<Rat> {
        let mut out = Poly::zero(self.dim);
        for (k, c) in self.bracket_basis(i, j) {
            out = out.add(&Poly::var(self.dim, k).scale(&c));
        }
        out
    }

    /// Numeric matrix of ad_{e_i}: (ad_{e_i})_{kj} = c^k_{ij}.
    pub fn ad_matrix(&self, i: usize) -> Vec<Vec<Rat>> {
        let r = self.dim;
        let mut m = vec![vec![<Rat as Scalar>::zero(); r]; r];
        for j in 0..r {
            for k in 0..r {
                m[k][j] = self.c[i][j][k].clone();
            }
        }
        m
    }

    /// Matrix of ad_x with linear-polynomial entries Σ_i x_i c^k_{ij}.
    pub fn ad_linear_matrix(&self) -> Vec<Vec<Poly<Rat>>> {
        let r = self.dim;
        let mut m = vec![vec![Poly::zero(r); r]; r];
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    if !self.c[i][j][k].is_zero() {
                        m[k][j] = m[k][j].add(&Poly::var(r, i).scale(&self.c[i][j][k]));
                    }
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skew_filling_and_accessors() {
        let sl2 = LieAlgebra::sl2();
        assert_eq!(sl2.structure_constant(0, 2, 1), rat(1, 1));
        assert_eq!(sl2.structure_constant(2, 0, 1), rat(-1, 1));
        assert_eq!(sl2.bracket_basis(1, 2), vec![(2, rat(-2, 1))]);
        assert_eq!(sl2.bracket_poly(0, 1).to_string(), "-2*x1");
    }

    #[test]
    fn jacobi_violation_is_rejected() {
        // {e1,e2}=e3, {e2,e3}=e2 fails Jacobi
        let got = LieAlgebra::new(3, &[(0, 1, 2, rat(1, 1)), (1, 2, 1, rat(1, 1))]);
        assert!(matches!(got, Err(DufloError::Jacobi { i: 0, j: 1, l: 2 })));
    }

    #[test]
    fn ad_matrix_of_sl2_h_is_diagonal() {
        // ad_h has eigenvalues (2, 0, −2) on (e, h, f)
        let m = LieAlgebra::sl2().ad_matrix(1);
        assert_eq!(m[0][0], rat(2, 1));
        assert_eq!(m[1][1], rat(0, 1));
        assert_eq!(m[2][2], rat(-2, 1));
        assert_eq!(m[0][1], rat(0, 1));
    }

    #[test]
    fn builtins_resolve_by_name() {
        assert_eq!(LieAlgebra::builtin("sl2"), Some(LieAlgebra::sl2()));
        assert_eq!(LieAlgebra::builtin("nope"), None);
    }

    #[test]
    fn new_rejects_out_of_range_and_wrong_triangle() {
        assert!(LieAlgebra::new(2, &[(1, 0, 0, rat(1, 1))]).is_err());
        assert!(LieAlgebra::new(2, &[(0, 2, 0, rat(1, 1))]).is_err());
    }
}
