//! Configuration-space geometry: angle forms on the upper half-plane, the
//! three-point form ω_D, the Möbius transport between half-plane and disk
//! pictures, per-edge 1-forms, and bounded gauge charts for the open
//! configuration spaces C_{n,m} and D_{n,m}.
//!
//! Conventions pinned here (validated by the lemma probes in tests):
//! the angle function is φ(p,q) = arg((q−p)/(q−p̄)), identically zero when the
//! source p is real; all weights later divide by (2π)^{|E|}; every chart maps
//! the open box (0,1)^dim diffeomorphically onto the gauge-fixed space with
//! the coordinate-order orientation, returning analytic frame velocities so
//! the top-form density is a plain determinant (jacobian ≡ 1).

use num_complex::Complex64;
use thiserror::Error;

use crate::graphs::{AdmissibleGraph, VertexRef};

/// Geometry-level failures.
#[derive(Debug, Error)]
pub enum GeomError {
    #[error("coincident points in configuration")]
    CoincidentPoints,
    #[error("point outside its domain: {0}")]
    OutOfDomain(String),
    #[error("chart coordinate out of range: {0}")]
    OutOfRange(String),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
}

/// A point of the open upper half-plane ℋ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPoint {
    pub re: f64,
    pub im: f64,
}

impl HPoint {
    /// Requires im > 0.
    pub fn new(re: f64, im: f64) -> Self {
        assert!(im > 0.0 && re.is_finite() && im.is_finite(), "HPoint needs im > 0");
        HPoint { re, im }
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// A point of the real axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RPoint {
    pub x: f64,
}

impl RPoint {
    pub fn new(x: f64) -> Self {
        assert!(x.is_finite());
        RPoint { x }
    }
}

/// A point of ℋ ⊔ ℝ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Pt {
    H(HPoint),
    R(RPoint),
}

impl Pt {
    pub fn h(re: f64, im: f64) -> Self {
        Pt::H(HPoint::new(re, im))
    }

    pub fn r(x: f64) -> Self {
        Pt::R(RPoint::new(x))
    }

    pub fn z(&self) -> Complex64 {
        match self {
            Pt::H(p) => p.z(),
            Pt::R(p) => Complex64::new(p.x, 0.0),
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Pt::R(_))
    }
}

impl From<HPoint> for Pt {
    fn from(p: HPoint) -> Self {
        Pt::H(p)
    }
}

impl From<RPoint> for Pt {
    fn from(p: RPoint) -> Self {
        Pt::R(p)
    }
}

/// Which endpoint of the pair (p,q) a derivative acts on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Endpoint {
    P,
    Q,
}

/// Hyperbolic angle φ(p,q) = arg((q−p)/(q−p̄)), measured from the vertical;
/// identically zero when p lies on the real axis.
pub fn angle(p: Pt, q: Pt) -> f64 {
    assert!(p.z() != q.z(), "angle needs distinct points");
    if p.is_real() {
        return 0.0;
    }
    let (zp, zq) = (p.z(), q.z());
    ((zq - zp) / (zq - zp.conj())).arg()
}

/// dφ evaluated on simultaneous variations (δp, δq); exact closed form.
pub(crate) fn dphi(p: Complex64, p_real: bool, dp: Complex64, q: Complex64, dq: Complex64) -> f64 {
    if p_real {
        return 0.0; // φ(p,·) ≡ 0 for real p
    }
    let a = (dq - dp) / (q - p);
    let b = (dq - dp.conj()) / (q - p.conj());
    a.im - b.im
}

/// Directional derivative of `angle` in one endpoint (the 1-form dφ).
pub fn dangle(p: Pt, q: Pt, which: Endpoint, dir: [f64; 2]) -> f64 {
    assert!(p.z() != q.z(), "dangle needs distinct points");
    let delta = Complex64::new(dir[0], dir[1]);
    let (dp, dq) = match which {
        Endpoint::P => {
            if p.is_real() {
                assert_eq!(dir[1], 0.0, "real points move along ℝ");
            }
            (delta, Complex64::new(0.0, 0.0))
        }
        Endpoint::Q => {
            if q.is_real() {
                assert_eq!(dir[1], 0.0, "real points move along ℝ");
            }
            (Complex64::new(0.0, 0.0), delta)
        }
    };
    dphi(p.z(), p.is_real(), dp, q.z(), dq)
}

/// Three-point angle φ_D(p,q,r) = φ(q,r) − φ(q,p).
pub fn phi_d(p: Pt, q: Pt, r: Pt) -> f64 {
    assert!(p.z() != q.z() && q.z() != r.z() && p.z() != r.z(), "phi_d needs distinct points");
    angle(q, r) - angle(q, p)
}

/// ω_D = dφ_D evaluated on simultaneous variations of all three points.
pub fn omega_d(p: Pt, q: Pt, r: Pt, dp: [f64; 2], dq: [f64; 2], dr: [f64; 2]) -> f64 {
    assert!(p.z() != q.z() && q.z() != r.z() && p.z() != r.z(), "omega_d needs distinct points");
    let c = |v: [f64; 2]| Complex64::new(v[0], v[1]);
    dphi(q.z(), q.is_real(), c(dq), r.z(), c(dr)) - dphi(q.z(), q.is_real(), c(dq), p.z(), c(dp))
}

/// Möbius map ψ(z) = (z−i)/(z+i): ℋ⊔ℝ → D⊔S¹∖{1}.
pub fn mobius_psi(z: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    (z - i) / (z + i)
}

/// Inverse Möbius map ψ⁻¹(w) = i(1+w)/(1−w).
pub fn mobius_psi_inv(w: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    i * (Complex64::new(1.0, 0.0) + w) / (Complex64::new(1.0, 0.0) - w)
}

/// Disk-picture configuration: n interior points of the punctured disk and m
/// cyclically ordered boundary points with boundary[0] = 1.
#[derive(Clone, Debug)]
pub struct DiskConfig {
    pub interior: Vec<Complex64>,
    pub boundary: Vec<Complex64>,
}

impl DiskConfig {
    pub fn new(interior: Vec<Complex64>, boundary: Vec<Complex64>) -> Result<Self, GeomError> {
        if boundary.is_empty() {
            return Err(GeomError::BadConfig("need at least one boundary point".into()));
        }
        if (boundary[0] - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(GeomError::BadConfig("boundary[0] must be gauge-fixed to 1".into()));
        }
        for w in &boundary {
            if (w.norm() - 1.0).abs() > 1e-9 {
                return Err(GeomError::OutOfDomain(format!("boundary point {w} off the circle")));
            }
        }
        let mut args: Vec<f64> = boundary.iter().skip(1).map(circle_arg).collect();
        args.insert(0, 0.0);
        for k in 1..args.len() {
            if args[k] <= args[k - 1] {
                return Err(GeomError::BadConfig("boundary points not cyclically ordered".into()));
            }
        }
        for z in &interior {
            let r = z.norm();
            if r <= 0.0 || r >= 1.0 {
                return Err(GeomError::OutOfDomain(format!("interior point {z} outside punctured disk")));
            }
        }
        for a in 0..interior.len() {
            for b in a + 1..interior.len() {
                if (interior[a] - interior[b]).norm() < 1e-12 {
                    return Err(GeomError::CoincidentPoints);
                }
            }
        }
        Ok(DiskConfig { interior, boundary })
    }

    pub fn n(&self) -> usize {
        self.interior.len()
    }

    pub fn m(&self) -> usize {
        self.boundary.len()
    }
}

/// Argument in (0, 2π) for a point of S¹∖{1}.
fn circle_arg(w: &Complex64) -> f64 {
    let a = w.arg();
    if a <= 0.0 {
        a + 2.0 * std::f64::consts::PI
    } else {
        a
    }
}

/// Tangent vector to a DiskConfig: one velocity per interior point and one
/// angular velocity per boundary point (the first must stay pinned).
#[derive(Clone, Debug)]
pub struct DiskTangent {
    pub interior: Vec<Complex64>,
    pub boundary: Vec<f64>,
}

/// Half-plane realization of a configuration with per-coordinate frames.
/// For a D-space the special point sits at i (constant), the first boundary
/// point at ∞ (no coordinate), and `boundary[j]` holds the transported image
/// of the (j+2)-nd circle point. For a C-space `boundary` holds all m real
/// points (pinned ones carry zero velocities).
#[derive(Clone, Debug)]
pub struct HConfig {
    pub aerial: Vec<Complex64>,
    pub boundary: Vec<f64>,
    pub frames: Vec<HFrame>,
    pub is_disk: bool,
}

/// Velocities of every moving point along one chart coordinate.
#[derive(Clone, Debug)]
pub struct HFrame {
    pub aerial: Vec<Complex64>,
    pub boundary: Vec<f64>,
}

impl HConfig {
    fn position(&self, v: VertexRef) -> Complex64 {
        match v {
            VertexRef::First(a) => self.aerial[(a - 1) as usize],
            VertexRef::Second(j) => {
                let idx = if self.is_disk { (j - 2) as usize } else { (j - 1) as usize };
                Complex64::new(self.boundary[idx], 0.0)
            }
            VertexRef::Special => Complex64::new(0.0, 1.0),
        }
    }

    fn velocity(&self, v: VertexRef, k: usize) -> Complex64 {
        match v {
            VertexRef::First(a) => self.frames[k].aerial[(a - 1) as usize],
            VertexRef::Second(j) => {
                let idx = if self.is_disk { (j - 2) as usize } else { (j - 1) as usize };
                Complex64::new(self.frames[k].boundary[idx], 0.0)
            }
            VertexRef::Special => Complex64::new(0.0, 0.0),
        }
    }

    fn is_real_vertex(&self, v: VertexRef) -> bool {
        matches!(v, VertexRef::Second(_))
    }
}

/// Is the disk form of this edge identically zero? (Edges into the special
/// vertex, and the special→first-boundary edge.)
pub fn edge_form_is_zero(source: VertexRef, target: VertexRef) -> bool {
    target == VertexRef::Special || (source == VertexRef::Special && target == VertexRef::Second(1))
}

/// Evaluates the 1-form of edge (s,t) against chart frame k of `cfg`.
/// C-spaces use the plain Kontsevich form dφ(z_s, z_t); D-spaces apply the
/// transported two-point rules with the special point pinned at i and the
/// first boundary point at ∞.
pub(crate) fn edge_form_value(cfg: &HConfig, s: VertexRef, t: VertexRef, k: usize) -> f64 {
    if !cfg.is_disk {
        let (zs, zt) = (cfg.position(s), cfg.position(t));
        return dphi(zs, cfg.is_real_vertex(s), cfg.velocity(s, k), zt, cfg.velocity(t, k));
    }
    if edge_form_is_zero(s, t) {
        return 0.0;
    }
    let i = Complex64::new(0.0, 1.0);
    let zero = Complex64::new(0.0, 0.0);
    match (s, t) {
        // special → X: plain form from i to the transported target
        (VertexRef::Special, t) => {
            dphi(i, false, zero, cfg.position(t), cfg.velocity(t, k))
        }
        // first-type → first boundary point: plain form from source to i
        (s, VertexRef::Second(1)) => {
            dphi(cfg.position(s), false, cfg.velocity(s, k), i, zero)
        }
        // first-type → anything else: relative form dφ(s,t) − dφ(s,i)
        (s, t) => {
            dphi(cfg.position(s), false, cfg.velocity(s, k), cfg.position(t), cfg.velocity(t, k))
                - dphi(cfg.position(s), false, cfg.velocity(s, k), i, zero)
        }
    }
}

/// Evaluates ω_{D,e} at a disk configuration against a tangent direction,
/// transporting points and velocities to the half-plane picture.
pub fn shoikhet_edge_form(
    g: &AdmissibleGraph,
    e: (VertexRef, VertexRef),
    cfg: &DiskConfig,
    dir: &DiskTangent,
) -> Result<f64, GeomError> {
    if cfg.n() != g.n as usize || cfg.m() != g.m as usize {
        return Err(GeomError::BadConfig("configuration shape does not match graph".into()));
    }
    if !g.edges().contains(&e) {
        return Err(GeomError::BadConfig("edge does not belong to graph".into()));
    }
    if dir.interior.len() != cfg.n() || dir.boundary.len() != cfg.m() {
        return Err(GeomError::BadConfig("tangent shape does not match configuration".into()));
    }
    if dir.boundary[0] != 0.0 {
        return Err(GeomError::BadConfig("first boundary point is pinned by gauge".into()));
    }
    // transport: interior z ↦ ψ⁻¹(z) with dw = 2i/(1−z)²·dz;
    // boundary e^{iθ} ↦ −cot(θ/2) with dx = dθ/(2 sin²(θ/2)).
    let mut aerial = Vec::with_capacity(cfg.n());
    let mut aerial_vel = Vec::with_capacity(cfg.n());
    for (z, dz) in cfg.interior.iter().zip(&dir.interior) {
        let w = mobius_psi_inv(*z);
        if w.im <= 0.0 {
            return Err(GeomError::OutOfDomain("interior point transported off ℋ".into()));
        }
        let one = Complex64::new(1.0, 0.0);
        let dw = Complex64::new(0.0, 2.0) / ((one - z) * (one - z)) * dz;
        aerial.push(w);
        aerial_vel.push(dw);
    }
    let mut boundary = Vec::new();
    let mut boundary_vel = Vec::new();
    for (wb, dth) in cfg.boundary.iter().zip(&dir.boundary).skip(1) {
        let th = circle_arg(wb);
        let s = (0.5 * th).sin();
        boundary.push(-(0.5 * th).cos() / s);
        boundary_vel.push(dth / (2.0 * s * s));
    }
    let hcfg = HConfig {
        aerial,
        boundary,
        frames: vec![HFrame { aerial: aerial_vel, boundary: boundary_vel }],
        is_disk: true,
    };
    Ok(edge_form_value(&hcfg, e.0, e.1, 0))
}

/// Which configuration space a chart parametrizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpaceTag {
    C,
    D,
}

/// Bounded parametrization of a gauge-fixed open configuration space by the
/// box (0,1)^dim; `embed` returns analytic frame velocities so integrands are
/// plain determinants (jacobian ≡ 1).
#[derive(Clone, Debug)]
pub struct GaugeChart {
    pub space: SpaceTag,
    pub n: usize,
    pub m: usize,
    dim: usize,
}

impl GaugeChart {
    /// Chart for C_{n,m}: gauge pins q₁=0 and q₂=1 (m ≥ 2), q₁=0 and |p₁|=1
    /// (m = 1), or p₁=i (m = 0).
    pub fn new_c(n: usize, m: usize) -> Result<Self, GeomError> {
        if 2 * n + m < 2 || (m <= 1 && n == 0) {
            return Err(GeomError::BadConfig(format!("C({n},{m}) has no gauge slice")));
        }
        Ok(GaugeChart { space: SpaceTag::C, n, m, dim: 2 * n + m - 2 })
    }

    /// Chart for D_{n,m}: gauge pins the first boundary point to 1; m ≥ 1.
    pub fn new_d(n: usize, m: usize) -> Result<Self, GeomError> {
        if m < 1 {
            return Err(GeomError::BadConfig("D charts need at least one boundary point".into()));
        }
        Ok(GaugeChart { space: SpaceTag::D, n, m, dim: 2 * n + m - 1 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Change-of-variables factor; identically 1 because frames are analytic
    /// pushforwards of the box coordinates.
    pub fn jacobian(&self, _coords: &[f64]) -> f64 {
        1.0
    }

    /// Maps box coordinates to a half-plane configuration with frames.
    pub fn embed(&self, coords: &[f64]) -> Result<HConfig, GeomError> {
        if coords.len() != self.dim {
            return Err(GeomError::OutOfRange(format!(
                "expected {} coordinates, got {}",
                self.dim,
                coords.len()
            )));
        }
        for c in coords {
            if !(*c > 0.0 && *c < 1.0) {
                return Err(GeomError::OutOfRange(format!("coordinate {c} outside (0,1)")));
            }
        }
        match self.space {
            SpaceTag::C => self.embed_c(coords),
            SpaceTag::D => self.embed_d(coords),
        }
    }

    fn embed_c(&self, coords: &[f64]) -> Result<HConfig, GeomError> {
        let (n, m) = (self.n, self.m);
        let dim = self.dim;
        let mut boundary = vec![0.0; m];
        let mut frames: Vec<HFrame> =
            (0..dim).map(|_| HFrame { aerial: vec![Complex64::new(0.0, 0.0); n], boundary: vec![0.0; m] }).collect();
        let mut aerial = vec![Complex64::new(0.0, 0.0); n];
        let mut used = 0usize;
        let mut free_aerial_start = 0usize;
        if m >= 2 {
            boundary[0] = 0.0;
            boundary[1] = 1.0;
            // q_k = q_{k−1} + s/(1−s): ascending, unbounded
            for k in 2..m {
                let s = coords[used];
                boundary[k] = boundary[k - 1] + s / (1.0 - s);
                for f in frames.iter_mut().take(used) {
                    f.boundary[k] = f.boundary[k - 1];
                }
                frames[used].boundary[k] = 1.0 / ((1.0 - s) * (1.0 - s));
                used += 1;
            }
        } else if m == 1 {
            boundary[0] = 0.0;
            // p₁ = e^{iπα} on the unit semicircle
            let alpha = coords[used];
            let th = std::f64::consts::PI * alpha;
            aerial[0] = Complex64::new(th.cos(), th.sin());
            frames[used].aerial[0] =
                Complex64::new(-th.sin(), th.cos()) * std::f64::consts::PI;
            used += 1;
            free_aerial_start = 1;
        } else {
            // m = 0: p₁ pinned at i
            aerial[0] = Complex64::new(0.0, 1.0);
            free_aerial_start = 1;
        }
        for a in free_aerial_start..n {
            let (z, dzu, dzv) = elliptic_square_to_disk(coords[used], coords[used + 1]);
            let (w, scale) = cayley_to_h(z)?;
            aerial[a] = w;
            frames[used].aerial[a] = scale * dzu;
            frames[used + 1].aerial[a] = scale * dzv;
            used += 2;
        }
        debug_assert_eq!(used, dim);
        Ok(HConfig { aerial, boundary, frames, is_disk: false })
    }

    fn embed_d(&self, coords: &[f64]) -> Result<HConfig, GeomError> {
        let (n, m) = (self.n, self.m);
        let dim = self.dim;
        let nb = m - 1; // moving boundary points (the first is pinned at ∞)
        let mut frames: Vec<HFrame> =
            (0..dim).map(|_| HFrame { aerial: vec![Complex64::new(0.0, 0.0); n], boundary: vec![0.0; nb] }).collect();
        let mut boundary = vec![0.0; nb];
        let mut aerial = vec![Complex64::new(0.0, 0.0); n];
        let tau = 2.0 * std::f64::consts::PI;
        // angles θ_j ascend through (0,2π) by a triangular map; transported
        // positions are x = −cot(θ/2) with dx = dθ/(2 sin²(θ/2)).
        let mut theta = 0.0;
        let mut dtheta = vec![0.0; nb]; // ∂θ_current/∂t_k
        for j in 0..nb {
            let t = coords[j];
            let prev = theta;
            theta = prev + t * (tau - prev);
            for k in 0..j {
                dtheta[k] *= 1.0 - t;
            }
            dtheta[j] = tau - prev;
            let s = (0.5 * theta).sin();
            boundary[j] = -(0.5 * theta).cos() / s;
            for k in 0..=j {
                frames[k].boundary[j] = dtheta[k] / (2.0 * s * s);
            }
        }
        for a in 0..n {
            let base = nb + 2 * a;
            let (z, dzu, dzv) = elliptic_square_to_disk(coords[base], coords[base + 1]);
            // interior disk point → ℋ: w = ψ⁻¹(z), dw = 2i/(1−z)²·dz
            let one = Complex64::new(1.0, 0.0);
            let w = mobius_psi_inv(z);
            if w.im <= 0.0 {
                return Err(GeomError::OutOfDomain("disk interior escaped ℋ".into()));
            }
            let scale = Complex64::new(0.0, 2.0) / ((one - z) * (one - z));
            aerial[a] = w;
            frames[base].aerial[a] = scale * dzu;
            frames[base + 1].aerial[a] = scale * dzv;
        }
        Ok(HConfig { aerial, boundary, frames, is_disk: true })
    }
}

/// Elliptic-grid map (0,1)² → open unit disk with partial velocities.
fn elliptic_square_to_disk(u: f64, v: f64) -> (Complex64, Complex64, Complex64) {
    let x = 2.0 * u - 1.0;
    let y = 2.0 * v - 1.0;
    let sx = (1.0 - 0.5 * x * x).sqrt();
    let sy = (1.0 - 0.5 * y * y).sqrt();
    let z = Complex64::new(x * sy, y * sx);
    let dz_dx = Complex64::new(sy, -0.5 * x * y / sx);
    let dz_dy = Complex64::new(-0.5 * x * y / sy, sx);
    (z, 2.0 * dz_dx, 2.0 * dz_dy)
}

/// Cayley transport of a disk point into ℋ with the complex scale factor.
fn cayley_to_h(z: Complex64) -> Result<(Complex64, Complex64), GeomError> {
    let w = mobius_psi_inv(z);
    if !(w.im > 0.0) {
        return Err(GeomError::OutOfDomain("Cayley image left ℋ".into()));
    }
    let one = Complex64::new(1.0, 0.0);
    Ok((w, Complex64::new(0.0, 2.0) / ((one - z) * (one - z))))
}
