//! Hochschild chains (a₀|a₁|…|a_n) and their boundary/cap operations.
//!
//! A degree −n chain (and any formal sum of such) is stored as one polynomial
//! in (n+1)·d variables — block j holds the variables of entry a_j. Products
//! of entries, the boundary b, and the cap action of polydifferential
//! operators all become variable remapping plus differentiation, so sums of
//! pure tensors stay canonical for free.

use std::fmt;

use super::diffop::PolyDiffOp;
use super::form::DiffForm;
use super::poly::{factorial, Poly, Rat, Scalar};

/// A formal sum of Hochschild chains of fixed length n+1 on ℝ^d.
#[derive(Clone, Debug, PartialEq)]
pub struct HochschildChain<S: Scalar> {
    dim: usize,
    len: usize,
    tensor: Poly<S>,
}

impl<S: Scalar> HochschildChain<S> {
    pub fn zero(dim: usize, len: usize) -> Self {
        assert!(len >= 1);
        HochschildChain { dim, len, tensor: Poly::zero(dim * len) }
    }

    /// The pure tensor a₀ ⊗ a₁ ⊗ … ⊗ a_n.
    pub fn from_entries(entries: &[Poly<S>]) -> Self {
        assert!(!entries.is_empty());
        let dim = entries[0].dim();
        let len = entries.len();
        let mut tensor = Poly::one(dim * len);
        for (j, e) in entries.iter().enumerate() {
            assert_eq!(e.dim(), dim);
            tensor = tensor.mul(&embed_block(e, j, len));
        }
        HochschildChain { dim, len, tensor }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of entries n+1; the chain degree is −(len−1).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_zero(&self) -> bool {
        self.tensor.is_zero()
    }

    pub fn tensor(&self) -> &Poly<S> {
        &self.tensor
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.dim, self.len), (other.dim, other.len), "chain shape mismatch");
        HochschildChain { dim: self.dim, len: self.len, tensor: self.tensor.add(&other.tensor) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        HochschildChain { dim: self.dim, len: self.len, tensor: self.tensor.neg() }
    }

    pub fn scale(&self, s: &S) -> Self {
        HochschildChain { dim: self.dim, len: self.len, tensor: self.tensor.scale(s) }
    }

    pub fn max_abs(&self) -> f64 {
        self.tensor.max_abs()
    }

    pub fn max_err(&self) -> f64 {
        self.tensor.max_err()
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> HochschildChain<T> {
        HochschildChain { dim: self.dim, len: self.len, tensor: self.tensor.map_scalars(f) }
    }

    /// Applies an arity-r operator to the listed blocks, merging them (and the
    /// operator's coefficient) into the block `block_map[arg_blocks[0]]`.
    /// `block_map` sends every old block to its slot in the shorter chain.
    pub(crate) fn apply_op(
        &self,
        op: &PolyDiffOp<S>,
        arg_blocks: &[usize],
        block_map: &[usize],
        new_len: usize,
    ) -> Self {
        assert_eq!(op.dim(), self.dim);
        assert_eq!(op.arity(), arg_blocks.len());
        assert_eq!(block_map.len(), self.len);
        let dest = block_map[arg_blocks[0]];
        let mut out = HochschildChain::zero(self.dim, new_len);
        for (sig, coeff) in op.terms() {
            // differentiate the tensor per slot
            let mut t = self.tensor.clone();
            for (s, multi) in sig.iter().enumerate() {
                let mut block_multi = vec![0u32; self.dim * self.len];
                let base = arg_blocks[s] * self.dim;
                block_multi[base..base + self.dim].copy_from_slice(multi);
                t = t.deriv_multi(&block_multi);
                if t.is_zero() {
                    break;
                }
            }
            if t.is_zero() {
                continue;
            }
            // remap blocks and multiply by the coefficient at `dest`
            let t = remap_blocks(&t, self.dim, block_map, new_len);
            let c = embed_block(coeff, dest, new_len);
            out.tensor = out.tensor.add(&t.mul(&c));
        }
        out
    }

    /// Collapses all blocks onto block 0 (sets every entry's variables equal).
    fn collapse_all(&self) -> Poly<S> {
        let map: Vec<usize> = vec![0; self.len];
        remap_blocks(&self.tensor, self.dim, &map, 1)
    }
}

/// Embeds a d-variable polynomial into block `j` of a `len`-block space.
fn embed_block<S: Scalar>(p: &Poly<S>, j: usize, len: usize) -> Poly<S> {
    let dim = p.dim();
    let mut out = Poly::zero(dim * len);
    for (e, c) in p.terms() {
        let mut expo = vec![0u32; dim * len];
        expo[j * dim..(j + 1) * dim].copy_from_slice(e);
        out = out.add(&Poly::monomial(dim * len, expo, c.clone()));
    }
    out
}

/// Moves exponents between blocks according to `block_map` (merging adds).
fn remap_blocks<S: Scalar>(t: &Poly<S>, dim: usize, block_map: &[usize], new_len: usize) -> Poly<S> {
    let mut out = Poly::zero(dim * new_len);
    for (e, c) in t.terms() {
        let mut expo = vec![0u32; dim * new_len];
        for (old, &new) in block_map.iter().enumerate() {
            for i in 0..dim {
                expo[new * dim + i] += e[old * dim + i];
            }
        }
        out = out.add(&Poly::monomial(dim * new_len, expo, c.clone()));
    }
    out
}

/// Hochschild boundary with one fixed arity-2 product term
/// (the classical b uses `PolyDiffOp::mu`):
/// b_m(a₀|…|a_n) = Σ_j (−1)^j (a₀|…|m(a_j,a_{j+1})|…) + (−1)^n (m(a_n,a₀)|a₁|…).
pub fn boundary_with_product<S: Scalar>(c: &HochschildChain<S>, m: &PolyDiffOp<S>) -> HochschildChain<S> {
    assert_eq!(m.arity(), 2, "boundary needs an arity-2 product");
    let n = c.len() - 1;
    let mut out = HochschildChain::zero(c.dim(), c.len().saturating_sub(1).max(1));
    if n == 0 {
        return out;
    }
    for j in 0..n {
        // blocks ≤ j keep their index, j+1 merges into j, later blocks shift down
        let mut bm = vec![0usize; c.len()];
        for (b, slot) in bm.iter_mut().enumerate() {
            *slot = match b.cmp(&(j + 1)) {
                std::cmp::Ordering::Less => b,
                std::cmp::Ordering::Equal => j,
                std::cmp::Ordering::Greater => b - 1,
            };
        }
        let term = c.apply_op(m, &[j, j + 1], &bm, n);
        out = if j % 2 == 0 { out.add(&term) } else { out.sub(&term) };
    }
    // cyclic term (m(a_n, a₀) | a₁ | … | a_{n−1})
    let mut bm = vec![0usize; c.len()];
    for (b, slot) in bm.iter_mut().enumerate() {
        *slot = if b == 0 || b == n { 0 } else { b };
    }
    let term = c.apply_op(m, &[n, 0], &bm, n);
    out = if n % 2 == 0 { out.add(&term) } else { out.sub(&term) };
    out
}

/// Classical Hochschild boundary (pointwise product).
pub fn boundary<S: Scalar>(c: &HochschildChain<S>) -> HochschildChain<S> {
    boundary_with_product(c, &PolyDiffOp::mu(c.dim()))
}

/// Cap action with a fixed product: φ∩(a₀|…|a_n) = (m(a₀, φ(a₁..a_m))|a_{m+1}|…);
/// trivial (zero) when arity m exceeds n.
pub fn cap_with_product<S: Scalar>(
    phi: &PolyDiffOp<S>,
    c: &HochschildChain<S>,
    m: &PolyDiffOp<S>,
) -> HochschildChain<S> {
    assert_eq!(m.arity(), 2);
    let n = c.len() - 1;
    let arity = phi.arity();
    if arity > n {
        return HochschildChain::zero(c.dim(), (n + 1).saturating_sub(arity).max(1));
    }
    // OP = m(slot0, φ(slot1..slot_arity)): raw composition at slot 1.
    let op = m.compose_at(1, phi);
    let arg_blocks: Vec<usize> = (0..=arity).collect();
    let mut bm = vec![0usize; c.len()];
    for (b, slot) in bm.iter_mut().enumerate() {
        *slot = if b <= arity { 0 } else { b - arity };
    }
    c.apply_op(&op, &arg_blocks, &bm, n + 1 - arity)
}

/// HKR chain map: (a₀|a₁|…|a_n) ↦ (1/n!)·a₀ da₁∧…∧da_n.
pub fn hkr_chain<S: Scalar>(c: &HochschildChain<S>) -> DiffForm<S> {
    let n = c.len() - 1;
    let d = c.dim();
    let mut out = DiffForm::zero(d, n.min(d));
    if n > d {
        return out; // every wedge of > d differentials vanishes
    }
    let inv_fact = {
        let f = factorial(n as u32);
        use num_traits::ToPrimitive;
        S::from_ratio(1, f.to_integer().to_i64().expect("n! fits i64"))
    };
    // iterate over strictly increasing tuples and antisymmetrize explicitly
    let mut tuple: Vec<usize> = (0..n).collect();
    if n == 0 {
        out.set_component(&[], c.collapse_all());
        return out;
    }
    loop {
        // G over all permutations of this sorted tuple, signed
        let mut comp = Poly::zero(d);
        for (perm, sign) in permutations_signed(n) {
            let mut block_multi = vec![0u32; d * c.len()];
            for (slot, &p) in perm.iter().enumerate() {
                block_multi[(slot + 1) * d + tuple[p]] += 1;
            }
            let g = c.tensor().deriv_multi(&block_multi);
            if g.is_zero() {
                continue;
            }
            let g = remap_blocks(&g, d, &vec![0; c.len()], 1);
            comp = if sign > 0 { comp.add(&g) } else { comp.sub(&g) };
        }
        out.set_component(&tuple.clone(), comp.scale(&inv_fact));
        // next strictly increasing tuple in [d]^n
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            tuple[i] += 1;
            if tuple[i] < d - (n - 1 - i) {
                for j in i + 1..n {
                    tuple[j] = tuple[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// All permutations of 0..n with signs.
fn permutations_signed(n: usize) -> Vec<(Vec<usize>, i32)> {
    if n == 0 {
        return vec![(vec![], 1)];
    }
    let mut out = Vec::new();
    for (p, s) in permutations_signed(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            let moved = p.len() - i; // transpositions to bubble n−1 into place
            let sign = if moved % 2 == 0 { s } else { -s };
            out.push((q, sign));
        }
    }
    out
}

/// Parses `a0 | a1 | a2` with each entry in the polynomial grammar.
pub fn parse_chain(src: &str, dim: usize) -> Result<HochschildChain<Rat>, super::poly::ParseError> {
    let mut entries = Vec::new();
    for part in src.split('|') {
        entries.push(Poly::parse(part.trim(), dim)?);
    }
    Ok(HochschildChain::from_entries(&entries))
}

impl<S: Scalar> fmt::Display for HochschildChain<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tensor.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in self.tensor.terms() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let blocks: Vec<String> = (0..self.len)
                .map(|j| {
                    let slice = &e[j * self.dim..(j + 1) * self.dim];
                    let mono = Poly::monomial(self.dim, slice.to_vec(), S::one());
                    mono.to_string()
                })
                .collect();
            write!(f, "({c})·{}", blocks.join(" | "))?;
        }
        Ok(())
    }
}
