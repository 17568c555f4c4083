//! Admissible directed graphs for the star-product and chain-map expansions.
//!
//! Two families are supported: graphs of type `(n, m)` whose edges start at one
//! of `n` first-type ("aerial") vertices and may end at aerial or at one of `m`
//! second-type ("boundary") vertices, and graphs of type `(n, m, 0)` which add
//! a special vertex `0` that also emits edges. Stars are ordered target lists;
//! reordering a star is a different labeled graph.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A vertex label: `v3` (first type), `b2` (second type / boundary), `0` (special).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexRef {
    /// First-type vertex, 1-based label in `1..=n`.
    First(u32),
    /// Second-type (boundary) vertex, 1-based label in `1..=m`.
    Second(u32),
    /// The special vertex `0` of a Shoikhet graph.
    Special,
}

impl fmt::Display for VertexRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexRef::First(k) => write!(f, "v{k}"),
            VertexRef::Second(k) => write!(f, "b{k}"),
            VertexRef::Special => write!(f, "0"),
        }
    }
}

impl FromStr for VertexRef {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, GraphError> {
        let bad = || GraphError::BadInput(format!("invalid vertex token `{s}`"));
        if s == "0" {
            return Ok(VertexRef::Special);
        }
        let (head, tail) = s.split_at(1.min(s.len()));
        let k: u32 = tail.parse().map_err(|_| bad())?;
        if k == 0 {
            return Err(bad());
        }
        match head {
            "v" => Ok(VertexRef::First(k)),
            "b" => Ok(VertexRef::Second(k)),
            _ => Err(bad()),
        }
    }
}

/// Errors from graph construction and enumeration.
#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("enumeration would exceed the configured bound of {bound} graphs")]
    Capacity { bound: usize },
    #[error("collapse creates duplicate edge {0} -> {1}")]
    CollapseDuplicate(VertexRef, VertexRef),
    #[error("{0}")]
    BadInput(String),
}

/// A violated admissibility rule. Violations are data, not failures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    StarCountMismatch { expected: usize, got: usize },
    TargetOutOfRange { star: usize, target: VertexRef },
    SelfEdge { vertex: VertexRef },
    DuplicateEdge { source: VertexRef, target: VertexRef },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::StarCountMismatch { expected, got } => {
                write!(f, "star count mismatch: expected {expected}, got {got}")
            }
            Violation::TargetOutOfRange { star, target } => {
                write!(f, "star {star}: target {target} out of range")
            }
            Violation::SelfEdge { vertex } => write!(f, "self-edge at {vertex}"),
            Violation::DuplicateEdge { source, target } => {
                write!(f, "duplicate edge between {source} and {target}")
            }
        }
    }
}

/// How the "one edge per vertex pair" rule is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EdgeRule {
    /// At most one edge between any two distinct vertices, regardless of direction.
    #[default]
    UnorderedPair,
    /// At most one edge per ordered pair; `a -> b` and `b -> a` may coexist.
    OrderedPair,
}

impl EdgeRule {
    fn key(self, s: VertexRef, t: VertexRef) -> (VertexRef, VertexRef) {
        match self {
            EdgeRule::UnorderedPair => (s.min(t), s.max(t)),
            EdgeRule::OrderedPair => (s, t),
        }
    }
}

/// Options for [`enumerate_kontsevich`] / [`enumerate_shoikhet`].
#[derive(Clone, Copy, Debug)]
pub struct EnumConfig {
    /// Relaxes the pair rule to one edge per ordered pair.
    pub ordered_pair_edges: bool,
    /// Hard cap on the number of produced graphs.
    pub max_graphs: usize,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig { ordered_pair_edges: false, max_graphs: 2_000_000 }
    }
}

impl EnumConfig {
    /// Ordered-pair variant used by the formality sums (two-cycles allowed).
    pub fn ordered() -> Self {
        EnumConfig { ordered_pair_edges: true, ..Self::default() }
    }

    fn rule(&self) -> EdgeRule {
        if self.ordered_pair_edges { EdgeRule::OrderedPair } else { EdgeRule::UnorderedPair }
    }
}

/// A labeled directed graph with ordered stars.
///
/// `stars` holds the target list of each first-type vertex in label order,
/// followed by the star of the special vertex when `has_special` is set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AdmissibleGraph {
    pub n: u32,
    pub m: u32,
    pub has_special: bool,
    pub stars: Vec<Vec<VertexRef>>,
}

/// Canonical string key of a graph, stable across runs; used to address the weight cache.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphKey(pub String);

impl fmt::Display for GraphKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AdmissibleGraph {
    /// Builds a Kontsevich-type graph (no special vertex) from its stars.
    pub fn kontsevich(n: u32, m: u32, stars: Vec<Vec<VertexRef>>) -> Self {
        AdmissibleGraph { n, m, has_special: false, stars }
    }

    /// Builds a Shoikhet-type graph; `special_star` is listed last.
    pub fn shoikhet(n: u32, m: u32, mut stars: Vec<Vec<VertexRef>>, special_star: Vec<VertexRef>) -> Self {
        stars.push(special_star);
        AdmissibleGraph { n, m, has_special: true, stars }
    }

    /// The emitting vertices in star order: `v1..vn`, then `0` when present.
    pub fn emitters(&self) -> Vec<VertexRef> {
        let mut out: Vec<VertexRef> = (1..=self.n).map(VertexRef::First).collect();
        if self.has_special {
            out.push(VertexRef::Special);
        }
        out
    }

    /// Ordered edge list: stars of `v1..vn` concatenated, then the special star.
    pub fn edges(&self) -> Vec<(VertexRef, VertexRef)> {
        let mut out = Vec::new();
        for (src, star) in self.emitters().iter().zip(&self.stars) {
            for &t in star {
                out.push((*src, t));
            }
        }
        out
    }

    /// Total number of edges.
    pub fn edge_count(&self) -> usize {
        self.stars.iter().map(Vec::len).sum()
    }

    /// Star of the special vertex; empty when the graph has none.
    pub fn special_star(&self) -> &[VertexRef] {
        if self.has_special { self.stars.last().map(Vec::as_slice).unwrap_or(&[]) } else { &[] }
    }

    fn in_range(&self, t: VertexRef) -> bool {
        match t {
            VertexRef::First(k) => k >= 1 && k <= self.n,
            VertexRef::Second(k) => k >= 1 && k <= self.m,
            VertexRef::Special => self.has_special,
        }
    }

    /// Canonical cache key, e.g. `K:1,2:b1,b2` or `S:1,1:b1|v1`.
    pub fn key(&self) -> GraphKey {
        let kind = if self.has_special { "S" } else { "K" };
        let stars = self
            .stars
            .iter()
            .map(|s| s.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join("|");
        GraphKey(format!("{kind}:{},{}:{stars}", self.n, self.m))
    }
}

/// Checks the admissibility rules under the default unordered-pair reading.
pub fn validate(g: &AdmissibleGraph) -> Vec<Violation> {
    validate_with(g, EdgeRule::UnorderedPair)
}

/// Checks admissibility under an explicit pair rule.
pub fn validate_with(g: &AdmissibleGraph, rule: EdgeRule) -> Vec<Violation> {
    let mut out = Vec::new();
    let expected = g.n as usize + usize::from(g.has_special);
    if g.stars.len() != expected {
        out.push(Violation::StarCountMismatch { expected, got: g.stars.len() });
        return out;
    }
    let mut seen = BTreeSet::new();
    for (src, star) in g.emitters().iter().zip(&g.stars) {
        for (i, &t) in star.iter().enumerate() {
            if !g.in_range(t) {
                out.push(Violation::TargetOutOfRange { star: i, target: t });
                continue;
            }
            if t == *src {
                out.push(Violation::SelfEdge { vertex: t });
                continue;
            }
            if !seen.insert(rule.key(*src, t)) {
                out.push(Violation::DuplicateEdge { source: *src, target: t });
            }
        }
    }
    out
}

/// All labeled graphs in 𝒢_{n,m} with the given first-type valences,
/// in lexicographic order of the flattened star lists.
pub fn enumerate_kontsevich(
    n: u32,
    m: u32,
    valences: &[u32],
    cfg: &EnumConfig,
) -> Result<Vec<AdmissibleGraph>, GraphError> {
    if valences.len() != n as usize {
        return Err(GraphError::BadInput(format!(
            "expected {n} valences, got {}",
            valences.len()
        )));
    }
    enumerate(n, m, false, valences, 0, cfg)
}

/// All labeled graphs in 𝒢_{n,m,0} with `|star(0)| = special_valence`.
pub fn enumerate_shoikhet(
    n: u32,
    m: u32,
    special_valence: u32,
    valences: &[u32],
    cfg: &EnumConfig,
) -> Result<Vec<AdmissibleGraph>, GraphError> {
    if m < 1 {
        return Err(GraphError::BadInput("Shoikhet graphs need m >= 1".into()));
    }
    if valences.len() != n as usize {
        return Err(GraphError::BadInput(format!(
            "expected {n} valences, got {}",
            valences.len()
        )));
    }
    enumerate(n, m, true, valences, special_valence, cfg)
}

fn enumerate(
    n: u32,
    m: u32,
    special: bool,
    valences: &[u32],
    special_valence: u32,
    cfg: &EnumConfig,
) -> Result<Vec<AdmissibleGraph>, GraphError> {
    // Candidate targets per emitter, in VertexRef order so the DFS yields
    // lexicographic output on the flattened star lists.
    let mut all_targets: Vec<VertexRef> = (1..=n).map(VertexRef::First).collect();
    all_targets.extend((1..=m).map(VertexRef::Second));
    if special {
        all_targets.push(VertexRef::Special);
    }
    all_targets.sort();

    let mut emitters: Vec<(VertexRef, u32)> =
        (1..=n).map(|k| (VertexRef::First(k), valences[(k - 1) as usize])).collect();
    if special {
        emitters.push((VertexRef::Special, special_valence));
    }

    let rule = cfg.rule();
    let mut out = Vec::new();
    let mut stars: Vec<Vec<VertexRef>> = vec![Vec::new(); emitters.len()];
    let mut used: BTreeSet<(VertexRef, VertexRef)> = BTreeSet::new();

    fn dfs(
        emitters: &[(VertexRef, u32)],
        all_targets: &[VertexRef],
        rule: EdgeRule,
        cfg: &EnumConfig,
        vi: usize,
        stars: &mut Vec<Vec<VertexRef>>,
        used: &mut BTreeSet<(VertexRef, VertexRef)>,
        n: u32,
        m: u32,
        special: bool,
        out: &mut Vec<AdmissibleGraph>,
    ) -> Result<(), GraphError> {
        if vi == emitters.len() {
            if out.len() >= cfg.max_graphs {
                return Err(GraphError::Capacity { bound: cfg.max_graphs });
            }
            out.push(AdmissibleGraph { n, m, has_special: special, stars: stars.clone() });
            return Ok(());
        }
        let (src, valence) = emitters[vi];
        if stars[vi].len() == valence as usize {
            return dfs(emitters, all_targets, rule, cfg, vi + 1, stars, used, n, m, special, out);
        }
        for &t in all_targets {
            if t == src {
                continue;
            }
            let key = rule.key(src, t);
            if used.contains(&key) {
                continue;
            }
            used.insert(key);
            stars[vi].push(t);
            dfs(emitters, all_targets, rule, cfg, vi, stars, used, n, m, special, out)?;
            stars[vi].pop();
            used.remove(&key);
        }
        Ok(())
    }

    dfs(&emitters, &all_targets, rule, cfg, 0, &mut stars, &mut used, n, m, special, &mut out)?;
    Ok(out)
}

/// Contracts `cluster` to `new_vertex`: internal edges are removed, incident
/// edges are redirected, star orders are inherited (cluster members' stars are
/// concatenated in emitter order onto the new vertex).
///
/// Supported shapes: a cluster containing the special vertex collapses onto
/// `Special`; a cluster of first-type vertices collapses onto its smallest
/// member. Second-type vertices cannot be collapsed.
pub fn collapse(
    g: &AdmissibleGraph,
    cluster: &BTreeSet<VertexRef>,
    new_vertex: VertexRef,
) -> Result<AdmissibleGraph, GraphError> {
    if cluster.is_empty() {
        return Err(GraphError::BadInput("empty cluster".into()));
    }
    if cluster.iter().any(|v| matches!(v, VertexRef::Second(_))) {
        return Err(GraphError::BadInput("cannot collapse a second-type vertex".into()));
    }
    let has_special_member = cluster.contains(&VertexRef::Special);
    if has_special_member && new_vertex != VertexRef::Special {
        return Err(GraphError::BadInput(
            "a cluster containing the special vertex must collapse onto it".into(),
        ));
    }
    if !has_special_member {
        let min = cluster.iter().next().copied().unwrap();
        if new_vertex != min {
            return Err(GraphError::BadInput(
                "a first-type cluster must collapse onto its smallest member".into(),
            ));
        }
    }

    // Relabel surviving first-type vertices consecutively.
    let survivors: Vec<u32> = (1..=g.n)
        .filter(|&k| {
            !cluster.contains(&VertexRef::First(k)) || (!has_special_member && VertexRef::First(k) == new_vertex)
        })
        .collect();
    let relabel = |v: VertexRef| -> VertexRef {
        let v = if cluster.contains(&v) { new_vertex } else { v };
        match v {
            VertexRef::First(k) => {
                let idx = survivors.iter().position(|&s| s == k).expect("survivor");
                VertexRef::First(idx as u32 + 1)
            }
            other => other,
        }
    };

    let new_n = survivors.len() as u32;
    let has_special = g.has_special; // Special survives (it is never removed).
    let mut star_of_new: Vec<VertexRef> = Vec::new();
    let mut stars: Vec<Vec<VertexRef>> = Vec::new();
    for (src, star) in g.emitters().iter().zip(&g.stars) {
        let src_in = cluster.contains(src);
        let mapped: Vec<VertexRef> = star
            .iter()
            .filter(|t| !(src_in && cluster.contains(t))) // internal edge removed
            .map(|&t| relabel(t))
            .collect();
        if src_in {
            star_of_new.extend(mapped);
        } else {
            stars.push(mapped);
        }
    }
    // Splice the merged star into the position of the new vertex.
    let mut final_stars: Vec<Vec<VertexRef>> = Vec::new();
    let mut star_it = stars.into_iter();
    for k in 1..=new_n {
        if !has_special_member && relabel(new_vertex) == VertexRef::First(k) {
            final_stars.push(star_of_new.clone());
        } else {
            final_stars.push(star_it.next().expect("star"));
        }
    }
    if has_special {
        if has_special_member {
            final_stars.push(star_of_new.clone());
        } else {
            final_stars.push(star_it.next().expect("special star"));
        }
    }

    let result = AdmissibleGraph { n: new_n, m: g.m, has_special, stars: final_stars };
    for v in validate(&result) {
        if let Violation::DuplicateEdge { source, target } = v {
            return Err(GraphError::CollapseDuplicate(source, target));
        }
    }
    Ok(result)
}

/// Sign of a permutation of the concatenated edge list.
pub fn edge_order_sign(g: &AdmissibleGraph, permutation: &[usize]) -> Result<i32, GraphError> {
    let e = g.edge_count();
    if permutation.len() != e {
        return Err(GraphError::BadInput(format!(
            "permutation length {} does not match edge count {e}",
            permutation.len()
        )));
    }
    let mut seen = vec![false; e];
    if permutation.iter().any(|&p| p >= e) {
        return Err(GraphError::BadInput("permutation index out of range".into()));
    }
    let mut sign = 1;
    for start in 0..e {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut p = start;
        while !seen[p] {
            seen[p] = true;
            p = permutation[p];
            len += 1;
        }
        if len == 0 || p != start {
            return Err(GraphError::BadInput("not a permutation".into()));
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    Ok(sign)
}

impl Serialize for AdmissibleGraph {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            n: u32,
            m: u32,
            special: bool,
            stars: Vec<Vec<String>>,
            #[serde(skip)]
            _p: std::marker::PhantomData<&'a ()>,
        }
        let stars = self
            .stars
            .iter()
            .map(|s| s.iter().map(|t| t.to_string()).collect())
            .collect();
        Wire { n: self.n, m: self.m, special: self.has_special, stars, _p: Default::default() }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AdmissibleGraph {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            n: u32,
            m: u32,
            special: bool,
            stars: Vec<Vec<String>>,
        }
        let w = Wire::deserialize(deserializer)?;
        let mut stars = Vec::with_capacity(w.stars.len());
        for s in &w.stars {
            let mut star = Vec::with_capacity(s.len());
            for t in s {
                star.push(VertexRef::from_str(t).map_err(D::Error::custom)?);
            }
            stars.push(star);
        }
        Ok(AdmissibleGraph { n: w.n, m: w.m, has_special: w.special, stars })
    }
}
