//! Quasi-Monte-Carlo evaluation of Kontsevich and Shoikhet graph weights
//! over the gauge charts, with exact-zero short circuits, a persistent
//! line-delimited JSON cache, and the origin-stratum probes.
//!
//! Sampling uses randomized Halton sequences: each batch of 2¹⁴ points gets
//! an independent Cranley–Patterson rotation derived from (seed, batch), so
//! batch means are i.i.d. and the reported standard error is the plain
//! batch-variance estimate. Everything is deterministic for a fixed seed.

use std::collections::BTreeMap;
use std::io::{BufRead, Write as _};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{edge_form_is_zero, edge_form_value, GaugeChart, GeomError, HConfig};
use crate::graphs::{collapse, AdmissibleGraph, VertexRef};

/// Samples per batch; error bars come from variation across batches.
pub const BATCH_SIZE: u64 = 1 << 14;
/// Two configuration points closer than this are treated as coincident.
pub const COINCIDENCE_EPS: f64 = 1e-12;
/// Radius used by the origin-stratum probe.
pub const STRATUM_EPS: f64 = 1e-4;
/// Estimates whose mean and error both fall below this are floating-point
/// residue of identically-zero integrands, ten orders under any tolerance
/// used here, and are reported as plain zero.
pub const DUST_EPS: f64 = 1e-12;

/// Result of a weight evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightEstimate {
    pub value: f64,
    #[serde(rename = "stderr")]
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
    pub exact: bool,
}

impl WeightEstimate {
    /// A value known without integration.
    pub fn exact(value: f64) -> Self {
        WeightEstimate { value, std_error: 0.0, samples: 0, seed: 0, exact: true }
    }
}

/// Integration-level failures.
#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error("graph not integrable: {0}")]
    BadGraph(String),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error(transparent)]
    Cache(#[from] CacheError),
}

/// Cache I/O failures.
#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt cache record at line {line}: {source}")]
    Corrupt { line: usize, source: serde_json::Error },
}

#[derive(Serialize, Deserialize)]
struct CacheRecord {
    key: String,
    value: f64,
    stderr: f64,
    samples: u64,
    seed: u64,
    exact: bool,
}

/// Persistent map from graph keys to weight estimates (line-delimited JSON).
#[derive(Clone, Debug, Default)]
pub struct WeightCache {
    map: BTreeMap<String, WeightEstimate>,
}

impl WeightCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads a cache file; duplicate keys resolve to the record with the most
    /// samples (later lines win ties). A missing file is an empty cache.
    pub fn load(path: &Path) -> Result<Self, CacheError> {
        let mut cache = WeightCache::new();
        let file = match std::fs::File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(cache),
            Err(e) => return Err(e.into()),
        };
        for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: CacheRecord = serde_json::from_str(&line)
                .map_err(|source| CacheError::Corrupt { line: lineno + 1, source })?;
            let est = WeightEstimate {
                value: rec.value,
                std_error: rec.stderr,
                samples: rec.samples,
                seed: rec.seed,
                exact: rec.exact,
            };
            match cache.map.get(&rec.key) {
                Some(old) if old.samples > est.samples => {}
                _ => {
                    cache.map.insert(rec.key, est);
                }
            }
        }
        Ok(cache)
    }

    pub fn get(&self, key: &str) -> Option<&WeightEstimate> {
        self.map.get(key)
    }

    /// Inserts; an existing entry is replaced only by one with more samples.
    pub fn put(&mut self, key: &str, est: WeightEstimate) -> bool {
        match self.map.get(key) {
            Some(old) if old.samples >= est.samples => false,
            _ => {
                self.map.insert(key.to_string(), est);
                true
            }
        }
    }

    /// Writes every record, sorted by key, one JSON object per line.
    pub fn flush(&self, path: &Path) -> Result<(), CacheError> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for (key, est) in &self.map {
            let rec = CacheRecord {
                key: key.clone(),
                value: est.value,
                stderr: est.std_error,
                samples: est.samples,
                seed: est.seed,
                exact: est.exact,
            };
            writeln!(out, "{}", serde_json::to_string(&rec).expect("serializable record"))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Cache location: $FKIT_CACHE if set, else ./fkit-weights.ldjson.
pub fn default_cache_path() -> PathBuf {
    match std::env::var_os("FKIT_CACHE") {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from("fkit-weights.ldjson"),
    }
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn halton(mut idx: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while idx > 0 {
        f /= base as f64;
        r += f * (idx % base) as f64;
        idx /= base;
    }
    r
}

/// SplitMix64 step, used to derive independent per-batch stream seeds.
fn mix(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Determinant by partial-pivot LU; the matrices here are ≤ 12×12.
fn det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut sign = 1.0;
    for col in 0..n {
        let (pivot, pmax) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pmax == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            sign = -sign;
        }
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    sign * a.iter().enumerate().map(|(i, row)| row[i]).product::<f64>()
}

/// Evaluates the top form ⋀ω_e (rows in the star order) at an embedded
/// configuration, normalized by (2π)^{|E|}.
fn integrand_at(g: &AdmissibleGraph, cfg: &HConfig) -> f64 {
    let edges = g.edges();
    let dim = cfg.frames.len();
    debug_assert_eq!(edges.len(), dim);
    let rows: Vec<Vec<f64>> = edges
        .iter()
        .map(|&(s, t)| (0..dim).map(|k| edge_form_value(cfg, s, t, k)).collect())
        .collect();
    det(rows) / (2.0 * std::f64::consts::PI).powi(dim as i32)
}

/// Top-form density of graph `g` at chart coordinates, in the chart frame.
pub fn integrand(g: &AdmissibleGraph, chart: &GaugeChart, coords: &[f64]) -> Result<f64, GeomError> {
    let cfg = chart.embed(coords)?;
    Ok(integrand_at(g, &cfg) * chart.jacobian(coords))
}

/// Minimal pairwise separation of the embedded points (including the pinned
/// special point i for disk configurations).
fn min_separation(cfg: &HConfig) -> f64 {
    let mut pts: Vec<Complex64> = cfg.aerial.clone();
    pts.extend(cfg.boundary.iter().map(|x| Complex64::new(*x, 0.0)));
    if cfg.is_disk {
        pts.push(Complex64::new(0.0, 1.0));
    }
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            best = best.min((pts[i] - pts[j]).norm());
        }
    }
    best
}

/// One batch mean with deterministic rejection-resampling.
fn batch_mean<F>(dim: usize, seed: u64, batch: u64, eval: &F) -> (f64, u64)
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    let mut rng = ChaCha20Rng::seed_from_u64(mix(seed, batch));
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    let point = |idx: u64| -> Vec<f64> {
        (0..dim)
            .map(|k| {
                let x = halton(idx, PRIMES[k]) + shift[k];
                let x = x - x.floor();
                // keep strictly inside the open box
                x.clamp(1e-15, 1.0 - 1e-15)
            })
            .collect()
    };
    let mut sum = 0.0;
    let mut rejected = 0u64;
    let mut spare = BATCH_SIZE + 1;
    for i in 1..=BATCH_SIZE {
        let mut idx = i;
        loop {
            if let Some(v) = eval(&point(idx)) {
                sum += v;
                break;
            }
            rejected += 1;
            idx = spare;
            spare += 1;
            if rejected > 4 * BATCH_SIZE {
                // pathological graph: give up on this sample
                break;
            }
        }
    }
    (sum / BATCH_SIZE as f64, rejected)
}

/// QMC estimate of ∫ integrand over the chart box.
fn qmc_estimate<F>(dim: usize, samples: u64, seed: u64, eval: F) -> WeightEstimate
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    if dim == 0 {
        let v = eval(&[]).unwrap_or(0.0);
        return WeightEstimate { value: v, std_error: 0.0, samples: 0, seed, exact: true };
    }
    let nbatches = (samples.div_ceil(BATCH_SIZE)).max(2);
    let means: Vec<(f64, u64)> =
        (0..nbatches).into_par_iter().map(|b| batch_mean(dim, seed, b, &eval)).collect();
    let r = nbatches as f64;
    let mut mean = means.iter().map(|(m, _)| m).sum::<f64>() / r;
    let mut se = (means.iter().map(|(m, _)| (m - mean) * (m - mean)).sum::<f64>() / (r * (r - 1.0))).sqrt();
    // Graphs whose form span is degenerate (e.g. pullbacks along forgetful
    // maps) have pointwise-singular determinants; LU leaves O(ε_machine)
    // dust far below any statistical resolution. Snap it to an honest zero.
    if mean.abs() < DUST_EPS && se < DUST_EPS {
        mean = 0.0;
        se = 0.0;
    }
    WeightEstimate { value: mean, std_error: se, samples: nbatches * BATCH_SIZE, seed, exact: false }
}

fn has_duplicate_edges(g: &AdmissibleGraph) -> bool {
    let mut edges = g.edges();
    edges.sort();
    edges.windows(2).any(|w| w[0] == w[1])
}

fn eval_with_rejection(g: &AdmissibleGraph, chart: &GaugeChart, coords: &[f64]) -> Option<f64> {
    let cfg = chart.embed(coords).ok()?;
    if min_separation(&cfg) < COINCIDENCE_EPS {
        return None;
    }
    let v = integrand_at(g, &cfg);
    v.is_finite().then_some(v)
}

fn cached<FE>(
    key: &str,
    samples: u64,
    cache: Option<&mut WeightCache>,
    compute: FE,
) -> WeightEstimate
where
    FE: FnOnce() -> WeightEstimate,
{
    if let Some(cache) = cache {
        if let Some(hit) = cache.get(key) {
            if hit.exact || hit.samples >= samples {
                return hit.clone();
            }
        }
        let est = compute();
        cache.put(key, est.clone());
        est
    } else {
        compute()
    }
}

/// Kontsevich weight W_Γ of a graph without special vertex: exact 0 unless
/// |E| = 2n+m−2 and all edge rows are distinct, else a QMC estimate.
pub fn kontsevich_weight(
    g: &AdmissibleGraph,
    samples: u64,
    seed: u64,
    cache: Option<&mut WeightCache>,
) -> Result<WeightEstimate, IntegrateError> {
    if g.has_special {
        return Err(IntegrateError::BadGraph("kontsevich_weight needs a graph without special vertex".into()));
    }
    let chart = GaugeChart::new_c(g.n as usize, g.m as usize)
        .map_err(|e| IntegrateError::BadGraph(e.to_string()))?;
    if g.edge_count() != chart.dim() {
        return Ok(WeightEstimate::exact(0.0));
    }
    if has_duplicate_edges(g) {
        return Ok(WeightEstimate::exact(0.0));
    }
    Ok(cached(&g.key().0, samples, cache, || {
        qmc_estimate(chart.dim(), samples, seed, |coords| eval_with_rejection(g, &chart, coords))
    }))
}

/// Shoikhet weight W_{D,Γ}: exact 0 if any edge form vanishes on the disk,
/// if |E| ≠ 2n+m−1, or on duplicate edges; else a QMC estimate.
pub fn shoikhet_weight(
    g: &AdmissibleGraph,
    samples: u64,
    seed: u64,
    cache: Option<&mut WeightCache>,
) -> Result<WeightEstimate, IntegrateError> {
    if !g.has_special || g.m == 0 {
        return Err(IntegrateError::BadGraph("shoikhet_weight needs a special vertex and m ≥ 1".into()));
    }
    let chart = GaugeChart::new_d(g.n as usize, g.m as usize)
        .map_err(|e| IntegrateError::BadGraph(e.to_string()))?;
    if g.edges().iter().any(|&(s, t)| edge_form_is_zero(s, t)) {
        return Ok(WeightEstimate::exact(0.0));
    }
    if g.edge_count() != chart.dim() || has_duplicate_edges(g) {
        return Ok(WeightEstimate::exact(0.0));
    }
    Ok(cached(&g.key().0, samples, cache, || {
        qmc_estimate(chart.dim(), samples, seed, |coords| eval_with_rejection(g, &chart, coords))
    }))
}

/// Embeds a D_{n,1} configuration with First(1) pinned at the transported
/// image of εe^{iθ₀} (zero velocity); the remaining points come from the
/// D_{n−1,1} chart.
fn embed_pinned_origin(
    chart: &GaugeChart,
    coords: &[f64],
    eps: f64,
    theta0: f64,
) -> Result<HConfig, GeomError> {
    let mut cfg = chart.embed(coords)?;
    let z1 = Complex64::new(eps * theta0.cos(), eps * theta0.sin());
    let w1 = crate::geometry::mobius_psi_inv(z1);
    cfg.aerial.insert(0, w1);
    for f in &mut cfg.frames {
        f.aerial.insert(0, Complex64::new(0.0, 0.0));
    }
    Ok(cfg)
}

fn check_stratum_graph(g: &AdmissibleGraph) -> Result<(), IntegrateError> {
    if !g.has_special || g.m != 1 || g.n < 1 {
        return Err(IntegrateError::BadGraph("stratum probe needs a special graph with m = 1, n ≥ 1".into()));
    }
    if !g.stars[0].is_empty() {
        return Err(IntegrateError::BadGraph("stratum probe needs First(1) of valence 0".into()));
    }
    Ok(())
}

/// Weight of the origin stratum: ω_{D,Γ} integrated with First(1) pinned at
/// radius ε near the disk origin (ε = STRATUM_EPS, fixed direction).
pub fn stratum_weight_origin(
    g: &AdmissibleGraph,
    samples: u64,
    seed: u64,
) -> Result<WeightEstimate, IntegrateError> {
    check_stratum_graph(g)?;
    let reduced = GaugeChart::new_d(g.n as usize - 1, 1)
        .map_err(|e| IntegrateError::BadGraph(e.to_string()))?;
    if g.edges().iter().any(|&(s, t)| edge_form_is_zero(s, t)) {
        return Ok(WeightEstimate::exact(0.0));
    }
    if g.edge_count() != reduced.dim() || has_duplicate_edges(g) {
        return Ok(WeightEstimate::exact(0.0));
    }
    let theta0 = 1.0;
    Ok(qmc_estimate(reduced.dim(), samples, seed, |coords| {
        let cfg = embed_pinned_origin(&reduced, coords, STRATUM_EPS, theta0).ok()?;
        if min_separation(&cfg) < COINCIDENCE_EPS {
            return None;
        }
        let v = integrand_at(g, &cfg);
        v.is_finite().then_some(v)
    }))
}

/// |ω_{D,Γ}(z₁ = εe^{iθ}) − ω_{D,Γ₀}| at one reduced-chart configuration,
/// where Γ₀ collapses {Special, First(1)}.
pub fn pointwise_collapse_check(
    g: &AdmissibleGraph,
    coords: &[f64],
    eps: f64,
) -> Result<f64, IntegrateError> {
    check_stratum_graph(g)?;
    let mut cluster = std::collections::BTreeSet::new();
    cluster.insert(VertexRef::Special);
    cluster.insert(VertexRef::First(1));
    let g0 = collapse(g, &cluster, VertexRef::Special)
        .map_err(|e| IntegrateError::BadGraph(e.to_string()))?;
    let reduced = GaugeChart::new_d(g.n as usize - 1, 1)
        .map_err(|e| IntegrateError::BadGraph(e.to_string()))?;
    let pinned = embed_pinned_origin(&reduced, coords, eps, 1.0)?;
    let v_pinned = integrand_at(g, &pinned);
    let base = reduced.embed(coords)?;
    let v_collapsed = integrand_at(&g0, &base);
    Ok((v_pinned - v_collapsed).abs())
}
