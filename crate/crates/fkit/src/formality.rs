//! Taylor components of the formality maps: the operator assignment of a
//! graph, the star product built from numerically weighted graph sums, the
//! chain-side tangent map into differential forms, and the cap-compatibility
//! report.

use std::collections::BTreeMap;

use itertools::Itertools;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{
    cap_with_product, contract, lie_derivative, DiffForm, Ef64, HbarSeries, HochschildChain, Poly,
    PolyDiffOp, PolyVectorField, Scalar, StarAlgebra,
};
use crate::graphs::{
    enumerate_kontsevich, enumerate_shoikhet, AdmissibleGraph, EnumConfig, GraphError, VertexRef,
};
use crate::integrate::{kontsevich_weight, shoikhet_weight, IntegrateError, WeightCache, WeightEstimate};

/// The single component-convention constant fixed once by the first-order
/// commutator identity (x⋆y − y⋆x)|_ħ = 2⟨π, dx∧dy⟩ for a constant bivector.
/// With ordered-star graph sums and the full-contraction HKR convention the
/// measured constant is exactly 1; it is kept explicit so every consumer of
/// the star product shares the one calibration point.
pub const CALIBRATION: f64 = 1.0;

#[derive(Debug, Error)]
pub enum FormalityError {
    #[error("vertex {vertex} has valence {valence} but its field has degree {degree}")]
    DegreeMismatch { vertex: usize, valence: usize, degree: usize },
    #[error("graph expects {expected} boundary arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("graph size n+m = {size} exceeds the policy bound {bound}")]
    BudgetExceeded { size: u32, bound: u32 },
    #[error("{0}")]
    BadInput(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Weight(#[from] IntegrateError),
}

/// Truncation and budget knobs shared by every formality-level operation.
#[derive(Debug, Clone)]
pub struct TruncationPolicy {
    /// Highest ħ power kept in series results.
    pub order: usize,
    /// Bound on n+m per enumerated graph family.
    pub max_size: u32,
    /// QMC sample budget per graph weight.
    pub samples: u64,
    /// Base seed for every weight integral.
    pub seed: u64,
    /// Tolerance per ħ-order used by the verification suites.
    pub tol: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { order: 2, max_size: 10, samples: 1 << 16, seed: 7, tol: 5e-2 }
    }
}

impl TruncationPolicy {
    pub fn with_order(order: usize) -> Self {
        TruncationPolicy { order, ..Self::default() }
    }

    fn check(&self) {
        assert!(self.samples > 0, "sample budget must be positive");
        assert!(self.max_size > 0, "size budget must be positive");
        assert!(self.tol > 0.0, "tolerance must be positive");
    }
}

/// Weight source shared across a run: consults an optional persistent cache,
/// evaluates misses in parallel, and records provenance for reports.
pub struct WeightBook {
    cache: Option<WeightCache>,
    records: BTreeMap<String, WeightEstimate>,
}

impl WeightBook {
    pub fn in_memory() -> Self {
        WeightBook { cache: None, records: BTreeMap::new() }
    }

    pub fn with_cache(cache: WeightCache) -> Self {
        WeightBook { cache: Some(cache), records: BTreeMap::new() }
    }

    /// Every weight used so far, keyed by canonical graph key.
    pub fn records(&self) -> &BTreeMap<String, WeightEstimate> {
        &self.records
    }

    pub fn into_cache(self) -> Option<WeightCache> {
        self.cache
    }

    /// Weights for a batch of graphs in input order; misses run in parallel.
    pub fn batch(
        &mut self,
        graphs: &[AdmissibleGraph],
        samples: u64,
        seed: u64,
    ) -> Result<Vec<WeightEstimate>, IntegrateError> {
        let mut out: Vec<Option<WeightEstimate>> = vec![None; graphs.len()];
        let mut misses = Vec::new();
        for (i, g) in graphs.iter().enumerate() {
            let key = g.key().0;
            if let Some(cache) = &self.cache {
                if let Some(rec) = cache.get(&key) {
                    if rec.exact || rec.samples >= samples {
                        out[i] = Some(rec.clone());
                    }
                }
            }
            if out[i].is_none() {
                misses.push(i);
            }
        }
        let computed: Result<Vec<(usize, WeightEstimate)>, IntegrateError> = misses
            .par_iter()
            .map(|&i| {
                let g = &graphs[i];
                let est = if g.has_special {
                    shoikhet_weight(g, samples, seed, None)?
                } else {
                    kontsevich_weight(g, samples, seed, None)?
                };
                Ok((i, est))
            })
            .collect();
        for (i, est) in computed? {
            if let Some(cache) = &mut self.cache {
                cache.put(&graphs[i].key().0, est.clone());
            }
            out[i] = Some(est);
        }
        for (g, est) in graphs.iter().zip(&out) {
            self.records.insert(g.key().0, est.clone().expect("filled above"));
        }
        Ok(out.into_iter().map(|e| e.expect("filled above")).collect())
    }
}

fn fact_f64(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Ordered-star multiplicity of a sorted-star representative: each aerial
/// star of size k stands for its k! orderings, all with equal weight×operator
/// product. The special star is a form slot and stays unordered.
fn aerial_multiplicity(g: &AdmissibleGraph) -> f64 {
    g.stars.iter().take(g.n as usize).map(|s| fact_f64(s.len())).product()
}

fn stars_sorted(g: &AdmissibleGraph) -> bool {
    g.stars.iter().all(|s| s.windows(2).all(|w| w[0] < w[1]))
}

/// Core expansion: the multidifferential operator of a graph whose aerial
/// vertices carry `fields` (and whose special vertex, if present, carries
/// `special`), summed over all edge colorings.
fn expand_op<S: Scalar>(
    g: &AdmissibleGraph,
    dim: usize,
    fields: &[PolyVectorField<S>],
    special: Option<&PolyVectorField<S>>,
) -> Result<PolyDiffOp<S>, FormalityError> {
    let n = g.n as usize;
    let m = g.m as usize;
    if fields.len() != n {
        return Err(FormalityError::BadInput(format!(
            "graph has {n} aerial vertices but {} fields were given",
            fields.len()
        )));
    }
    for (k, f) in fields.iter().enumerate() {
        if g.stars[k].len() != f.degree() {
            return Err(FormalityError::DegreeMismatch {
                vertex: k + 1,
                valence: g.stars[k].len(),
                degree: f.degree(),
            });
        }
        if f.dim() != dim {
            return Err(FormalityError::BadInput("field dimension mismatch".into()));
        }
    }
    match (g.has_special, special) {
        (true, Some(a)) => {
            if g.special_star().len() != a.degree() {
                return Err(FormalityError::DegreeMismatch {
                    vertex: 0,
                    valence: g.special_star().len(),
                    degree: a.degree(),
                });
            }
        }
        (false, None) => {}
        (true, None) => {
            return Err(FormalityError::BadInput("graph has a special vertex but no field for it".into()))
        }
        (false, Some(_)) => {
            return Err(FormalityError::BadInput("special field given for a graph without one".into()))
        }
    }

    let edges = g.edges();
    let ne = edges.len();
    // star offsets into the flattened edge list, aerials first, special last
    let mut offsets = Vec::with_capacity(g.stars.len());
    let mut acc = 0usize;
    for s in &g.stars {
        offsets.push(acc);
        acc += s.len();
    }

    let mut out = PolyDiffOp::zero(dim, m);
    let mut color = vec![0usize; ne];
    loop {
        'coloring: {
            // source components per emitter, selected by its own star colors
            let mut coeff = Poly::constant(dim, S::one());
            for (vi, star) in g.stars.iter().enumerate() {
                let tuple = &color[offsets[vi]..offsets[vi] + star.len()];
                let field = if vi < n { &fields[vi] } else { special.expect("checked above") };
                let comp = field.component(tuple);
                if comp.is_zero() {
                    break 'coloring;
                }
                // incoming derivatives on this vertex's component
                let me = if vi < n { VertexRef::First(vi as u32 + 1) } else { VertexRef::Special };
                let mut multi = vec![0u32; dim];
                for (e, (_, t)) in edges.iter().enumerate() {
                    if *t == me {
                        multi[color[e]] += 1;
                    }
                }
                let phi = comp.deriv_multi(&multi);
                if phi.is_zero() {
                    break 'coloring;
                }
                coeff = coeff.mul(&phi);
            }
            // boundary derivative signature
            let mut sig = vec![vec![0u32; dim]; m];
            for (e, (_, t)) in edges.iter().enumerate() {
                if let VertexRef::Second(j) = t {
                    sig[(*j - 1) as usize][color[e]] += 1;
                }
            }
            out.add_term(sig, coeff);
        }
        // advance the coloring odometer
        let mut pos = ne;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            color[pos] += 1;
            if color[pos] < dim {
                break;
            }
            color[pos] = 0;
        }
    }
}

/// The multidifferential operator U_Γ(γ₁,…,γ_n) of a graph without special
/// vertex; arity is the number of boundary vertices.
pub fn u_gamma_op<S: Scalar>(
    g: &AdmissibleGraph,
    fields: &[PolyVectorField<S>],
) -> Result<PolyDiffOp<S>, FormalityError> {
    if g.has_special {
        return Err(FormalityError::BadInput("u_gamma_op expects a graph without special vertex".into()));
    }
    let dim = fields
        .first()
        .map(|f| f.dim())
        .ok_or_else(|| FormalityError::BadInput("u_gamma_op needs at least one field".into()))?;
    expand_op(g, dim, fields, None)
}

/// U_Γ(γ₁,…,γ_n)(f₁,…,f_m): the operator applied to boundary arguments.
pub fn u_gamma_graph<S: Scalar>(
    g: &AdmissibleGraph,
    fields: &[PolyVectorField<S>],
    args: &[Poly<S>],
) -> Result<Poly<S>, FormalityError> {
    if args.len() != g.m as usize {
        return Err(FormalityError::ArityMismatch { expected: g.m as usize, got: args.len() });
    }
    let dim = fields
        .first()
        .map(|f| f.dim())
        .or_else(|| args.first().map(|p| p.dim()))
        .ok_or_else(|| FormalityError::BadInput("cannot infer dimension".into()))?;
    let op = expand_op(g, dim, fields, None)?;
    Ok(op.apply(args))
}

/// The same assignment with a test polyvector placed at the special vertex:
/// ⟨α, S_Γ(γ₁,…,γ_n, ·)⟩ = u_gamma_special_op(g, α, γ)(a₀,…,a_{m−1}).
pub fn u_gamma_special_op<S: Scalar>(
    g: &AdmissibleGraph,
    alpha: &PolyVectorField<S>,
    fields: &[PolyVectorField<S>],
) -> Result<PolyDiffOp<S>, FormalityError> {
    if !g.has_special {
        return Err(FormalityError::BadInput("u_gamma_special_op needs a special vertex".into()));
    }
    expand_op(g, alpha.dim(), fields, Some(alpha))
}

/// The l-form S_Γ(γ₁,…,γ_n, c) on V, l = |star(0)|: its component on a
/// sorted tuple I is the pairing with ∂_{i₁}∧…∧∂_{i_l} at the special vertex.
pub fn s_gamma_graph<S: Scalar>(
    g: &AdmissibleGraph,
    fields: &[PolyVectorField<S>],
    chain: &HochschildChain<S>,
) -> Result<DiffForm<S>, FormalityError> {
    if !g.has_special {
        return Err(FormalityError::BadInput("s_gamma_graph needs a special vertex".into()));
    }
    let m = g.m as usize;
    if chain.len() != m {
        return Err(FormalityError::ArityMismatch { expected: m, got: chain.len() });
    }
    let dim = chain.dim();
    let l = g.special_star().len();
    if l > dim {
        return Err(FormalityError::BadInput(format!("special valence {l} exceeds dimension {dim}")));
    }
    let arg_blocks: Vec<usize> = (0..m).collect();
    let block_map = vec![0usize; m];
    let mut out = DiffForm::zero(dim, l);
    for tuple in (0..dim).combinations(l) {
        let mut basis = PolyVectorField::zero(dim, l);
        basis.set_component(&tuple, Poly::one(dim));
        let op = expand_op(g, dim, fields, Some(&basis))?;
        let collapsed = chain.apply_op(&op, &arg_blocks, &block_map, 1);
        let comp = collapsed.tensor().clone();
        if !comp.is_zero() {
            out.set_component(&tuple, comp);
        }
    }
    Ok(out)
}

/// ⟨α, ω⟩ = Σ_{sorted I} α^I ω_I for equal degrees.
pub fn pair_with_form<S: Scalar>(alpha: &PolyVectorField<S>, omega: &DiffForm<S>) -> Poly<S> {
    assert_eq!(alpha.degree(), omega.degree(), "pairing needs equal degrees");
    assert_eq!(alpha.dim(), omega.dim(), "dimension mismatch");
    let mut acc = Poly::zero(alpha.dim());
    for (t, p) in omega.components() {
        let a = alpha.component(t);
        if !a.is_zero() {
            acc = acc.add(&a.mul(p));
        }
    }
    acc
}

/// The n-th Taylor component 𝒰_n(γ₁,…,γ_n): the weighted sum over admissible
/// graphs; the degree filter fixes the arity m = Σ|γ_k| − 2n + 2.
pub fn taylor_u(
    dim: usize,
    fields: &[PolyVectorField<Ef64>],
    policy: &TruncationPolicy,
    book: &mut WeightBook,
) -> Result<PolyDiffOp<Ef64>, FormalityError> {
    policy.check();
    let n = fields.len() as u32;
    if n == 0 {
        return Ok(PolyDiffOp::mu(dim));
    }
    let total: usize = fields.iter().map(|f| f.degree()).sum();
    let m_signed = total as i64 - 2 * n as i64 + 2;
    if m_signed < 0 {
        return Ok(PolyDiffOp::zero(dim, 0));
    }
    let m = m_signed as u32;
    if n + m > policy.max_size {
        return Err(FormalityError::BudgetExceeded { size: n + m, bound: policy.max_size });
    }
    let valences: Vec<u32> = fields.iter().map(|f| f.degree() as u32).collect();
    let graphs: Vec<AdmissibleGraph> = enumerate_kontsevich(n, m, &valences, &EnumConfig::ordered())?
        .into_iter()
        .filter(stars_sorted)
        .collect();
    let weights = book.batch(&graphs, policy.samples, policy.seed)?;
    let mut acc = PolyDiffOp::zero(dim, m as usize);
    for (g, est) in graphs.iter().zip(weights) {
        if est.exact && est.value == 0.0 {
            continue;
        }
        let mult = aerial_multiplicity(g);
        let w = Ef64::new(mult * est.value, mult * est.std_error);
        acc = acc.add(&expand_op(g, dim, fields, None)?.scale(&w));
    }
    Ok(acc)
}

/// The n-th chain Taylor component 𝒮_n(γ₁,…,γ_n, c): an l-form with
/// l = (2n + m − 1) − Σ|γ_k| forced by the degree filter.
pub fn taylor_s(
    fields: &[PolyVectorField<Ef64>],
    chain: &HochschildChain<Ef64>,
    policy: &TruncationPolicy,
    book: &mut WeightBook,
) -> Result<DiffForm<Ef64>, FormalityError> {
    policy.check();
    let n = fields.len() as u32;
    let m = chain.len() as u32;
    let dim = chain.dim();
    let total: usize = fields.iter().map(|f| f.degree()).sum();
    let l_signed = (2 * n as i64 + m as i64 - 1) - total as i64;
    if l_signed < 0 {
        return Ok(DiffForm::zero(dim, 0));
    }
    let l = l_signed as usize;
    if l > dim {
        return Ok(DiffForm::zero(dim, l.min(dim)));
    }
    if n + m > policy.max_size {
        return Err(FormalityError::BudgetExceeded { size: n + m, bound: policy.max_size });
    }
    let valences: Vec<u32> = fields.iter().map(|f| f.degree() as u32).collect();
    let graphs: Vec<AdmissibleGraph> =
        enumerate_shoikhet(n, m, l as u32, &valences, &EnumConfig::ordered())?
            .into_iter()
            .filter(stars_sorted)
            .collect();
    let weights = book.batch(&graphs, policy.samples, policy.seed)?;
    let mut acc = DiffForm::zero(dim, l);
    for (g, est) in graphs.iter().zip(weights) {
        if est.exact && est.value == 0.0 {
            continue;
        }
        let mult = aerial_multiplicity(g);
        let w = Ef64::new(mult * est.value, mult * est.std_error);
        acc = acc.add(&s_gamma_graph(g, fields, chain)?.scale(&w));
    }
    Ok(acc)
}

/// The star product of γ = ħπ: corrections B_k = (κᵏ/k!)·𝒰_k(π,…,π).
/// The Jacobi identity of π is checked; failure is reported on stderr and the
/// (then merely pre-associative) product is still returned.
pub fn star(
    pi: &PolyVectorField<Ef64>,
    policy: &TruncationPolicy,
    book: &mut WeightBook,
) -> Result<StarAlgebra<Ef64>, FormalityError> {
    if pi.degree() != 2 {
        return Err(FormalityError::BadInput("star product needs a bivector".into()));
    }
    let dim = pi.dim();
    let jacobi = crate::algebra::schouten(pi, pi).max_abs();
    if jacobi > 1e-9 {
        eprintln!("{{\"warning\":\"jacobi identity violated\",\"norm\":{jacobi}}}");
    }
    let mut coeffs = vec![PolyDiffOp::zero(dim, 2)];
    for k in 1..=policy.order {
        let fields = vec![pi.clone(); k];
        let u = taylor_u(dim, &fields, policy, book)?;
        let scale = Ef64::exact(CALIBRATION.powi(k as i32) / fact_f64(k));
        coeffs.push(u.scale(&scale));
    }
    Ok(StarAlgebra::new(HbarSeries::new(coeffs)))
}

/// f ⋆ g as an ħ-series of polynomials.
pub fn star_apply(s: &StarAlgebra<Ef64>, f: &Poly<Ef64>, g: &Poly<Ef64>) -> HbarSeries<Poly<Ef64>> {
    s.apply(f, g)
}

/// Cochain tangent map 𝒰_γ(α) = Σ_n (ħⁿ/n!)·𝒰_{n+1}(α, π,…,π); every order
/// is an operator of arity |α|, and the ħ⁰ term is the HKR cochain map.
pub fn tangent_u(
    pi: &PolyVectorField<Ef64>,
    alpha: &PolyVectorField<Ef64>,
    policy: &TruncationPolicy,
    book: &mut WeightBook,
) -> Result<HbarSeries<PolyDiffOp<Ef64>>, FormalityError> {
    let dim = pi.dim();
    let mut coeffs = Vec::with_capacity(policy.order + 1);
    for k in 0..=policy.order {
        let mut fields = vec![alpha.clone()];
        fields.extend(std::iter::repeat_n(pi.clone(), k));
        let u = taylor_u(dim, &fields, policy, book)?;
        let scale = Ef64::exact(CALIBRATION.powi(k as i32) / fact_f64(k));
        coeffs.push(u.scale(&scale));
    }
    Ok(HbarSeries::new(coeffs))
}

/// Chain tangent map 𝒮_γ(c) = Σ_n (ħⁿ/n!)·𝒮_n(π,…,π, c); every order is an
/// (m−1)-form, and the ħ⁰ term is the HKR chain map.
pub fn tangent_s(
    pi: &PolyVectorField<Ef64>,
    chain: &HochschildChain<Ef64>,
    policy: &TruncationPolicy,
    book: &mut WeightBook,
) -> Result<HbarSeries<DiffForm<Ef64>>, FormalityError> {
    let mut coeffs = Vec::with_capacity(policy.order + 1);
    for k in 0..=policy.order {
        let fields = vec![pi.clone(); k];
        let s = taylor_s(&fields, chain, policy, book)?;
        let scale = Ef64::exact(CALIBRATION.powi(k as i32) / fact_f64(k));
        coeffs.push(s.scale(&scale));
    }
    Ok(HbarSeries::new(coeffs))
}

/// 𝒮_γ extended to an ħ-series of chains by Cauchy convolution.
fn tangent_s_series(
    pi: &PolyVectorField<Ef64>,
    chains: &HbarSeries<HochschildChain<Ef64>>,
    policy: &TruncationPolicy,
    book: &mut WeightBook,
) -> Result<HbarSeries<DiffForm<Ef64>>, FormalityError> {
    let order = policy.order.min(chains.order());
    let mut coeffs = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut acc: Option<DiffForm<Ef64>> = None;
        for i in 0..=k {
            let fields = vec![pi.clone(); i];
            let s = taylor_s(&fields, chains.coeff(k - i), policy, book)?;
            let scale = Ef64::exact(CALIBRATION.powi(i as i32) / fact_f64(i));
            let term = s.scale(&scale);
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term),
            });
        }
        coeffs.push(acc.expect("k ≥ 0 has at least one term"));
    }
    Ok(HbarSeries::new(coeffs))
}

/// Least-squares residual of δ ≈ Σ x_b·col_b via modified Gram–Schmidt
/// projection onto the column span; returns the max-abs of the residual.
fn projection_residual(columns: &[Vec<f64>], target: &[f64]) -> f64 {
    // columns with norm below this floor are treated as linearly dependent
    const RANK_EPS: f64 = 1e-10;
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for col in columns {
        let mut v = col.clone();
        for q in &basis {
            let dot: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= dot * qi;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > RANK_EPS {
            for vi in &mut v {
                *vi /= norm;
            }
            basis.push(v);
        }
    }
    let mut r = target.to_vec();
    for q in &basis {
        let dot: f64 = q.iter().zip(&r).map(|(a, b)| a * b).sum();
        for (ri, qi) in r.iter_mut().zip(q) {
            *ri -= dot * qi;
        }
    }
    r.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Residual of solving δ = L_π(η) over polynomial forms η of coefficient
/// degree ≤ `max_deg` and form degree deg(δ)+1.
fn homotopy_residual(delta: &DiffForm<Ef64>, pi: &PolyVectorField<Ef64>, max_deg: u32) -> f64 {
    let dim = delta.dim();
    let eta_deg = delta.degree() + 1;
    if delta.is_zero() {
        return 0.0;
    }
    if eta_deg > dim {
        return delta.max_abs();
    }
    // candidate images L_π(x^e · dx_I)
    let mut images = Vec::new();
    for tuple in (0..dim).combinations(eta_deg) {
        for expo in monomials_up_to(dim, max_deg) {
            let mut eta = DiffForm::zero(dim, eta_deg);
            eta.set_component(&tuple, Poly::monomial(dim, expo.clone(), Ef64::exact(1.0)));
            let img = lie_derivative(pi, &eta);
            if !img.is_zero() {
                images.push(img);
            }
        }
    }
    // common coordinate system over the union of supports
    let mut rows: BTreeMap<(Vec<usize>, Vec<u32>), usize> = BTreeMap::new();
    let index = |form: &DiffForm<Ef64>, rows: &mut BTreeMap<(Vec<usize>, Vec<u32>), usize>| {
        for (t, p) in form.components() {
            for (e, _) in p.terms() {
                let key = (t.clone(), e.clone());
                let next = rows.len();
                rows.entry(key).or_insert(next);
            }
        }
    };
    index(delta, &mut rows);
    for img in &images {
        index(img, &mut rows);
    }
    let nrows = rows.len();
    let flatten = |form: &DiffForm<Ef64>| -> Vec<f64> {
        let mut v = vec![0.0; nrows];
        for (t, p) in form.components() {
            for (e, c) in p.terms() {
                v[rows[&(t.clone(), e.clone())]] = c.value_f64();
            }
        }
        v
    };
    let columns: Vec<Vec<f64>> = images.iter().map(&flatten).collect();
    projection_residual(&columns, &flatten(delta))
}

fn monomials_up_to(dim: usize, max_deg: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; dim]];
    for _ in 0..max_deg {
        let mut next = Vec::new();
        for e in &out {
            for i in 0..dim {
                let mut f = e.clone();
                f[i] += 1;
                next.push(f);
            }
        }
        out.extend(next);
    }
    out.sort();
    out.dedup();
    out
}

/// Cap-compatibility report for the tangent maps: compares
/// ι_α 𝒮_γ(c) with 𝒮_γ(𝒰_γ(α) ∩ c) per ħ-order and measures how far the
/// difference is from being L_γ-exact over a bounded polynomial ansatz.
pub struct CapReport {
    pub lhs: HbarSeries<DiffForm<Ef64>>,
    pub rhs: HbarSeries<DiffForm<Ef64>>,
    pub delta: HbarSeries<DiffForm<Ef64>>,
    /// Per-order least-squares residual of δ_k = L_π(η), max-abs normed.
    pub homotopy_residual: Vec<f64>,
    /// Per-order norm of b_⋆(c): how far the input chain is from closed.
    pub b_star_residual: Vec<f64>,
    /// Polynomial-degree bound of the homotopy ansatz.
    pub ansatz_degree: u32,
}

impl CapReport {
    pub fn to_json(&self) -> serde_json::Value {
        let strings = |s: &HbarSeries<DiffForm<Ef64>>| -> Vec<String> {
            s.iter().map(|f| f.to_string()).collect()
        };
        serde_json::json!({
            "lhs": strings(&self.lhs),
            "rhs": strings(&self.rhs),
            "delta": strings(&self.delta),
            "delta_norm": self.delta.iter().map(|f| f.max_abs()).collect::<Vec<_>>(),
            "delta_err": self.delta.iter().map(|f| f.max_err()).collect::<Vec<_>>(),
            "homotopy_residual": self.homotopy_residual,
            "b_star_residual": self.b_star_residual,
            "ansatz_degree": self.ansatz_degree,
        })
    }
}

/// Builds the full cap-compatibility report for (α, c) against γ = ħπ.
pub fn cap_report(
    alpha: &PolyVectorField<Ef64>,
    chain: &HochschildChain<Ef64>,
    pi: &PolyVectorField<Ef64>,
    policy: &TruncationPolicy,
    book: &mut WeightBook,
) -> Result<CapReport, FormalityError> {
    let dim = pi.dim();
    if alpha.dim() != dim || chain.dim() != dim {
        return Err(FormalityError::BadInput("dimension mismatch".into()));
    }
    let s = star(pi, policy, book)?;

    // left side: contract α into the chain tangent map
    let ts = tangent_s(pi, chain, policy, book)?;
    let form_deg = ts.coeff(0).degree();
    let lhs = if alpha.degree() <= form_deg {
        ts.map(|f| contract(alpha, f))
    } else {
        HbarSeries::new(vec![DiffForm::zero(dim, 0); policy.order + 1])
    };

    // right side: cap the cochain tangent map into the chain, then map down
    let tu = tangent_u(pi, alpha, policy, book)?;
    let arity = alpha.degree();
    let cap_len = (chain.len() + 1).saturating_sub(arity + 1).max(1);
    let capped = HbarSeries::new(
        (0..=policy.order)
            .map(|k| {
                let mut acc = HochschildChain::zero(dim, cap_len);
                for i in 0..=k {
                    acc = acc.add(&cap_with_product(tu.coeff(i), chain, &s.product_term(k - i)));
                }
                acc
            })
            .collect::<Vec<_>>(),
    );
    let rhs = tangent_s_series(pi, &capped, policy, book)?;

    let delta = lhs.zip_with(&rhs, |a, b| a.sub(b));
    let input_deg = delta.iter().map(|f| form_poly_degree(f)).max().unwrap_or(0);
    // bounded ansatz: coefficients up to the input degree plus two
    let ansatz_degree = input_deg + 2;
    let homotopy: Vec<f64> = delta
        .iter()
        .enumerate()
        .map(|(k, d)| {
            if k == 0 {
                // no ħ to pay for L_γ at order zero: the defect itself
                d.max_abs()
            } else {
                homotopy_residual(d, pi, ansatz_degree)
            }
        })
        .collect();
    let b_res: Vec<f64> =
        crate::algebra::hochschild_b(chain, &s).iter().map(|c| c.max_abs()).collect();

    Ok(CapReport {
        lhs,
        rhs,
        delta,
        homotopy_residual: homotopy,
        b_star_residual: b_res,
        ansatz_degree,
    })
}

fn form_poly_degree(f: &DiffForm<Ef64>) -> u32 {
    f.components().map(|(_, p)| p.degree()).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{bivector, hkr_chain, hkr_cochain, parse_chain, Rat};

    fn pnum(src: &str, dim: usize) -> Poly<Ef64> {
        Poly::<Rat>::parse(src, dim).unwrap().to_numeric()
    }

    fn const_pi(dim: usize) -> PolyVectorField<Ef64> {
        bivector(dim, &[(0, 1, Poly::one(dim))])
    }

    fn b(j: u32) -> VertexRef {
        VertexRef::Second(j)
    }

    fn v(k: u32) -> VertexRef {
        VertexRef::First(k)
    }

    // unit-test policy: 2^17 samples gives eight statistics batches, the
    // minimum for the reported standard error to support 3–4σ assertions
    fn quick() -> TruncationPolicy {
        TruncationPolicy { samples: 1 << 17, ..TruncationPolicy::default() }
    }

    #[test]
    fn wedge_assignment_is_poisson_term() {
        let g = AdmissibleGraph::kontsevich(1, 2, vec![vec![b(1), b(2)]]);
        let val = u_gamma_graph(&g, &[const_pi(2)], &[pnum("x1", 2), pnum("x2", 2)]).unwrap();
        assert_eq!(val, pnum("1", 2));
        // and the full operator is the skew contraction
        let op = u_gamma_op(&g, &[const_pi(2)]).unwrap();
        let f = pnum("x1^2", 2);
        let h = pnum("x1*x2", 2);
        let want = f.deriv(0).mul(&h.deriv(1)).sub(&f.deriv(1).mul(&h.deriv(0)));
        assert_eq!(op.apply(&[f, h]), want);
    }

    #[test]
    fn empty_graph_is_multiplication() {
        let g = AdmissibleGraph::kontsevich(0, 2, vec![]);
        let val = u_gamma_graph::<Ef64>(&g, &[], &[pnum("x1+1", 2), pnum("x2^2", 2)]).unwrap();
        assert_eq!(val, pnum("x1*x2^2+x2^2", 2));
    }

    #[test]
    fn aerial_edge_differentiates_the_target_field() {
        // v1 = constant ∂₁∧∂₂ hits v2 = x₁∂₂ through the edge v1→v2
        let g = AdmissibleGraph::kontsevich(2, 1, vec![vec![v(2), b(1)], vec![b(1)]]);
        let mut linear = PolyVectorField::zero(2, 1);
        linear.set_component(&[1], pnum("x1", 2));
        let op = u_gamma_op(&g, &[const_pi(2), linear]).unwrap();
        // hand expansion: Σ π^{ab} ∂_a(X^c) ∂_b∂_c f = ∂₂∂₂ f
        let f = pnum("x2^3", 2);
        assert_eq!(op.apply(&[f.clone()]), f.deriv(1).deriv(1));
        let zero = op.apply(&[pnum("x1^5", 2)]);
        assert!(zero.is_zero());
    }

    #[test]
    fn degree_mismatch_is_rejected() {
        let g = AdmissibleGraph::kontsevich(1, 2, vec![vec![b(1), b(2)]]);
        let mut vec1 = PolyVectorField::<Ef64>::zero(2, 1);
        vec1.set_component(&[0], Poly::one(2));
        let err = u_gamma_op(&g, &[vec1]).unwrap_err();
        assert!(matches!(err, FormalityError::DegreeMismatch { vertex: 1, .. }));
    }

    #[test]
    fn special_fan_gives_a0_da1() {
        // special→(2̄) on the chain (x₁ | x₂²): the form a₀·da₁ = 2x₁x₂ dx₂
        let g = AdmissibleGraph::shoikhet(0, 2, vec![], vec![b(2)]);
        let chain = HochschildChain::from_entries(&[pnum("x1", 2), pnum("x2^2", 2)]);
        let form = s_gamma_graph::<Ef64>(&g, &[], &chain).unwrap();
        let mut want = DiffForm::zero(2, 1);
        want.set_component(&[1], pnum("2*x1*x2", 2));
        assert_eq!(form.component(&[1]), want.component(&[1]));
        assert!(form.component(&[0]).is_zero());
    }

    #[test]
    fn zero_valence_special_gives_functions() {
        let g = AdmissibleGraph::shoikhet(0, 1, vec![], vec![]);
        let chain = HochschildChain::from_entries(&[pnum("x1^2", 2)]);
        let form = s_gamma_graph::<Ef64>(&g, &[], &chain).unwrap();
        assert_eq!(form.degree(), 0);
        assert_eq!(form.component(&[]), pnum("x1^2", 2));
    }

    #[test]
    fn pairing_identity_two_ways() {
        // ⟨α, S_Γ(c)⟩ must equal the special-vertex operator applied to c
        let g = AdmissibleGraph::shoikhet(1, 2, vec![vec![b(1), b(2)]], vec![v(1), b(2)]);
        let fields = [const_pi(2)];
        let chain = HochschildChain::from_entries(&[pnum("x1*x2", 2), pnum("x1^2+x2", 2)]);
        let alpha = bivector(2, &[(0, 1, pnum("x2", 2))]);
        let form = s_gamma_graph(&g, &fields, &chain).unwrap();
        let direct = pair_with_form(&alpha, &form);
        let op = u_gamma_special_op(&g, &alpha, &fields).unwrap();
        let via_op = chain.apply_op(&op, &[0, 1], &[0, 0], 1).tensor().clone();
        assert_eq!(direct, via_op);
    }

    #[test]
    fn taylor_u_order_zero_is_mu() {
        let mut book = WeightBook::in_memory();
        let op = taylor_u(2, &[], &quick(), &mut book).unwrap();
        assert_eq!(op, PolyDiffOp::mu(2));
    }

    #[test]
    fn taylor_u_of_function_is_exact_identity() {
        // 𝒰₁(f): the single-vertex graph lives on a zero-dimensional chart,
        // so the weight is exact and the operator is multiplication by f.
        let mut book = WeightBook::in_memory();
        let f = PolyVectorField::function(pnum("x1^2+3*x2", 2));
        let op = taylor_u(2, &[f], &quick(), &mut book).unwrap();
        assert_eq!(op.arity(), 0);
        assert_eq!(op.apply(&[]), pnum("x1^2+3*x2", 2));
    }

    #[test]
    fn tangent_u_leading_term_is_hkr() {
        let mut book = WeightBook::in_memory();
        let alpha = bivector(2, &[(0, 1, pnum("x1", 2))]);
        let series = tangent_u(&const_pi(2), &alpha, &quick(), &mut book).unwrap();
        let lead = series.coeff(0);
        let diff = lead.sub(&hkr_cochain(&alpha));
        assert!(
            diff.max_abs() <= 4.0 * diff.max_err().max(1e-12),
            "ħ⁰ ≠ hkr: defect {} vs err {}",
            diff.max_abs(),
            diff.max_err()
        );
    }

    #[test]
    fn tangent_s_leading_term_is_hkr_chain() {
        let mut book = WeightBook::in_memory();
        let chain = HochschildChain::from_entries(&[pnum("x1", 2), pnum("x2", 2)]);
        let series = tangent_s(&const_pi(2), &chain, &quick(), &mut book).unwrap();
        let diff = series.coeff(0).sub(&hkr_chain(&chain));
        assert!(
            diff.max_abs() <= 4.0 * diff.max_err().max(1e-12),
            "𝒮₀ ≠ hkr_chain: defect {}",
            diff.max_abs()
        );
        // length-1 chains sit on a zero-dimensional chart: exact identity
        let c0 = HochschildChain::from_entries(&[pnum("x1^2", 2)]);
        let s0 = tangent_s(&const_pi(2), &c0, &quick(), &mut book).unwrap();
        assert_eq!(s0.coeff(0).component(&[]), pnum("x1^2", 2));
    }

    #[test]
    fn star_commutator_calibration() {
        let mut book = WeightBook::in_memory();
        let pi = const_pi(2);
        let policy = TruncationPolicy { order: 1, samples: 1 << 17, ..TruncationPolicy::default() };
        let s = star(&pi, &policy, &mut book).unwrap();
        let x = pnum("x1", 2);
        let y = pnum("x2", 2);
        let fwd = s.apply(&x, &y);
        let bwd = s.apply(&y, &x);
        let comm1 = fwd.coeff(1).sub(bwd.coeff(1));
        // 2⟨π, dx∧dy⟩ for the constant bivector is the constant 2
        let defect = comm1.sub(&pnum("2", 2));
        assert!(defect.max_abs() <= 2e-2, "calibration defect {}", defect.max_abs());
    }

    #[test]
    fn star_preserves_the_unit_exactly() {
        let mut book = WeightBook::in_memory();
        let s = star(&const_pi(2), &quick(), &mut book).unwrap();
        let f = pnum("x1^2*x2", 2);
        let one = Poly::one(2);
        let left = s.apply(&f, &one);
        let right = s.apply(&one, &f);
        for k in 1..=s.order() {
            assert_eq!(left.coeff(k).max_abs(), 0.0, "f⋆1 fails at order {k}");
            assert_eq!(right.coeff(k).max_abs(), 0.0, "1⋆f fails at order {k}");
        }
        assert_eq!(left.coeff(0), &f);
    }

    #[test]
    fn constant_star_matches_moyal_at_second_order() {
        let mut book = WeightBook::in_memory();
        let policy = TruncationPolicy { samples: 1 << 17, ..TruncationPolicy::default() };
        let s = star(&const_pi(2), &policy, &mut book).unwrap();
        // Moyal: B₂ = ½(∂₁²⊗∂₂² − 2∂₁∂₂⊗∂₁∂₂ + ∂₂²⊗∂₁²)
        let mut moyal = PolyDiffOp::zero(2, 2);
        moyal.add_term(vec![vec![2, 0], vec![0, 2]], Poly::constant(2, Ef64::exact(0.5)));
        moyal.add_term(vec![vec![1, 1], vec![1, 1]], Poly::constant(2, Ef64::exact(-1.0)));
        moyal.add_term(vec![vec![0, 2], vec![2, 0]], Poly::constant(2, Ef64::exact(0.5)));
        let diff = s.product_term(2).sub(&moyal);
        assert!(
            diff.max_abs() <= 3.0 * diff.max_err().max(1e-12),
            "B₂ defect {} vs 3σ {}",
            diff.max_abs(),
            3.0 * diff.max_err()
        );
    }

    #[test]
    fn budget_bound_is_enforced() {
        let mut book = WeightBook::in_memory();
        let policy = TruncationPolicy { max_size: 2, ..quick() };
        let err = taylor_u(2, &[const_pi(2)], &policy, &mut book).unwrap_err();
        assert!(matches!(err, FormalityError::BudgetExceeded { .. }));
    }

    #[test]
    fn cap_report_runs_on_a_vector_field() {
        let mut book = WeightBook::in_memory();
        let policy = TruncationPolicy { order: 1, samples: 1 << 17, ..TruncationPolicy::default() };
        let mut alpha = PolyVectorField::zero(2, 1);
        alpha.set_component(&[0], Poly::one(2));
        let chain = HochschildChain::from_entries(&[pnum("x2", 2), pnum("x1", 2)]);
        let report = cap_report(&alpha, &chain, &const_pi(2), &policy, &mut book).unwrap();
        // ħ⁰: ι_∂₁(x₂ dx₁) = x₂ against 𝒮₀(x₂·∂₁x₁) = x₂ — matches exactly
        assert!(report.delta.coeff(0).max_abs() <= 4.0 * report.delta.coeff(0).max_err().max(1e-12));
        for (k, r) in report.homotopy_residual.iter().enumerate() {
            assert!(*r <= policy.tol, "homotopy residual {r} at order {k}");
        }
        let json = report.to_json();
        assert!(json.get("homotopy_residual").is_some());
    }

    #[test]
    fn parse_chain_round_trip_feeds_taylor_s() {
        let chain = parse_chain("x1 | x2", 2).unwrap().map_scalars(|r| Ef64::exact(r.value_f64()));
        let mut book = WeightBook::in_memory();
        let form = taylor_s(&[], &chain, &quick(), &mut book).unwrap();
        assert_eq!(form.degree(), 1);
        assert_eq!(form.component(&[1]), pnum("x1", 2));
    }
}
