//! Spatial domains, ε-collars, boundary classification and boundary data.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{d_boundary, d_hat, dot, norm, GroupPoint};

/// Relative tolerance used to decide whether a point sits on a boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Bounded spatial domain in ℝ^m: an open ball or an open box.
#[derive(Debug, Clone, PartialEq)]
pub enum SpatialDomain {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl SpatialDomain {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || center.is_empty() {
            return Err(Error::Invalid(format!("bad ball radius {radius}")));
        }
        Ok(Self::Ball { center, radius })
    }

    pub fn cube(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::DimensionMismatch {
                left: lo.len(),
                right: hi.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::Invalid("box needs lo < hi componentwise".into()));
        }
        Ok(Self::Box { lo, hi })
    }

    /// The interval `(lo, hi)` in one dimension.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::cube(vec![lo], vec![hi])
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Ball { center, .. } => center.len(),
            Self::Box { lo, .. } => lo.len(),
        }
    }

    /// Negative inside, positive outside, zero on the boundary.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match self {
            Self::Ball { center, radius } => {
                let d: f64 = x
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum::<f64>()
                    .sqrt();
                d - radius
            }
            Self::Box { lo, hi } => {
                let mut outside = 0.0;
                let mut inside = f64::INFINITY;
                for ((&v, &l), &h) in x.iter().zip(lo).zip(hi) {
                    let excess = (l - v).max(v - h).max(0.0);
                    outside += excess * excess;
                    inside = inside.min((v - l).min(h - v));
                }
                if outside > 0.0 {
                    outside.sqrt()
                } else {
                    -inside
                }
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.signed_distance(x) < 0.0
    }

    /// Outward unit normal. For boxes, the face of maximal penetration,
    /// ties broken by dimension index and then lower face first.
    pub fn outward_normal(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Self::Ball { center, .. } => {
                let v: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
                let n = norm(&v);
                if n == 0.0 {
                    let mut e = vec![0.0; v.len()];
                    e[0] = 1.0;
                    e
                } else {
                    v.iter().map(|c| c / n).collect()
                }
            }
            Self::Box { lo, hi } => {
                let mut best = (f64::NEG_INFINITY, 0usize, -1.0);
                for i in 0..lo.len() {
                    for (s, sign) in [(lo[i] - x[i], -1.0), (x[i] - hi[i], 1.0)] {
                        if s > best.0 {
                            best = (s, i, sign);
                        }
                    }
                }
                let mut e = vec![0.0; lo.len()];
                e[best.1] = best.2;
                e
            }
        }
    }

    /// `max over the closed domain of |X|`.
    pub fn max_abs(&self) -> f64 {
        match self {
            Self::Ball { center, radius } => norm(center) + radius,
            Self::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| l.abs().max(h.abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// `R = max{1, max |X|}` over the closed domain.
    pub fn r_constant(&self) -> f64 {
        self.max_abs().max(1.0)
    }

    /// Axis-aligned bounding box of the domain grown by `pad`.
    pub fn bounding_box(&self, pad: f64) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::Ball { center, radius } => (
                center.iter().map(|c| c - radius - pad).collect(),
                center.iter().map(|c| c + radius + pad).collect(),
            ),
            Self::Box { lo, hi } => (
                lo.iter().map(|v| v - pad).collect(),
                hi.iter().map(|v| v + pad).collect(),
            ),
        }
    }

    fn scale(&self) -> f64 {
        1.0 + self.max_abs()
    }

    pub fn on_boundary(&self, x: &[f64]) -> bool {
        self.signed_distance(x).abs() <= BOUNDARY_TOL * self.scale()
    }
}

impl fmt::Display for SpatialDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| {
            v.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            Self::Ball { center, radius } => write!(f, "ball {} {}", join(center), radius),
            Self::Box { lo, hi } => write!(f, "box {} {}", join(lo), join(hi)),
        }
    }
}

/// The domain together with the collar width `ε` and the horizon `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicCollar {
    pub domain: SpatialDomain,
    pub epsilon: f64,
    pub horizon: f64,
}

/// Label assigned by [`classify_parabolic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParabolicRegion {
    Interior,
    LateralCollar,
    InitialCollar,
    Outside,
}

impl ParabolicCollar {
    pub fn new(domain: SpatialDomain, epsilon: f64, horizon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !(horizon > 0.0) {
            return Err(Error::Invalid(format!(
                "need epsilon > 0 and T > 0, got {epsilon}, {horizon}"
            )));
        }
        Ok(Self {
            domain,
            epsilon,
            horizon,
        })
    }

    /// `X ∈ Γ_X^ε`: outside the open domain and within `ε` of its boundary.
    pub fn in_x_collar(&self, x: &[f64]) -> bool {
        let s = self.domain.signed_distance(x);
        s >= 0.0 && s <= self.epsilon + BOUNDARY_TOL * self.domain.scale()
    }

    pub fn t_floor(&self) -> f64 {
        -0.5 * self.epsilon * self.epsilon
    }
}

/// Classifies a point against `U_X × ℝ^m × (0,T]` and the two collars.
pub fn classify_parabolic(point: &GroupPoint, collar: &ParabolicCollar) -> ParabolicRegion {
    let s = collar.domain.signed_distance(&point.x);
    let t = point.t;
    // the floor is open; absorb the rounding in ε²/2
    let floor = collar.t_floor();
    let in_time = t > floor + 1e-12 * floor.abs() && t <= collar.horizon;
    if collar.in_x_collar(&point.x) && in_time {
        ParabolicRegion::LateralCollar
    } else if s < 0.0 && t > 0.0 && t <= collar.horizon {
        ParabolicRegion::Interior
    } else if s < 0.0 && in_time {
        ParabolicRegion::InitialCollar
    } else {
        ParabolicRegion::Outside
    }
}

/// Pieces of the boundary of the cylinder `U_X × U_Y × (0,T)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KolmogorovPart {
    /// `∂U_X × cl(U_Y) × [0,T)`.
    LateralX,
    /// `cl(U_X) × {Y ∈ ∂U_Y, X·N_Y > 0} × [0,T)`.
    OutflowY,
    /// `U_X × U_Y × {0}`.
    Initial,
    /// `U_X × {Y ∈ ∂U_Y, X·N_Y ≤ 0} × [0,T)`; no data is prescribed here.
    CharacteristicY,
    Interior,
    Other,
}

/// Kolmogorov boundary label of a point in the closed cylinder.
pub fn classify_kolmogorov(
    point: &GroupPoint,
    u_x: &SpatialDomain,
    u_y: &SpatialDomain,
    horizon: f64,
) -> Result<KolmogorovPart> {
    let tol_t = BOUNDARY_TOL * (1.0 + horizon);
    let sx = u_x.signed_distance(&point.x);
    let sy = u_y.signed_distance(&point.y);
    let x_bd = u_x.on_boundary(&point.x);
    let y_bd = u_y.on_boundary(&point.y);
    let t = point.t;
    if (sx > 0.0 && !x_bd) || (sy > 0.0 && !y_bd) || t < -tol_t || t > horizon + tol_t {
        return Err(Error::OutsideClosure(point.to_string()));
    }
    let before_t = t < horizon - tol_t;
    if x_bd && before_t {
        return Ok(KolmogorovPart::LateralX);
    }
    if y_bd && before_t {
        let n = u_y.outward_normal(&point.y);
        return Ok(if dot(&point.x, &n) > 0.0 {
            KolmogorovPart::OutflowY
        } else {
            KolmogorovPart::CharacteristicY
        });
    }
    if x_bd || y_bd {
        return Ok(KolmogorovPart::Other);
    }
    if t.abs() <= tol_t {
        return Ok(KolmogorovPart::Initial);
    }
    Ok(if before_t {
        KolmogorovPart::Interior
    } else {
        KolmogorovPart::Other
    })
}

type Evaluator = dyn Fn(&[f64], &[f64], f64) -> f64 + Send + Sync;

/// Boundary datum `F` on the parabolic collar, evaluated in closed form.
#[derive(Clone)]
pub struct BoundaryDatum {
    pub name: String,
    eval: Arc<Evaluator>,
    /// Declared bound `|F| ≤ B`, when `F` is bounded on all of its domain.
    pub bound: Option<f64>,
    /// Declared Lipschitz constant with respect to `d_boundary`, if known.
    pub lipschitz: Option<f64>,
}

impl fmt::Debug for BoundaryDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryDatum")
            .field("name", &self.name)
            .field("bound", &self.bound)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl BoundaryDatum {
    pub fn from_fn<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64], &[f64], f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            eval: Arc::new(f),
            bound: None,
            lipschitz: None,
        }
    }

    pub fn with_bound(mut self, b: f64) -> Self {
        self.bound = Some(b);
        self
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64], t: f64) -> f64 {
        (self.eval)(x, y, t)
    }

    pub fn value(&self, g: &GroupPoint) -> f64 {
        self.eval(&g.x, &g.y, g.t)
    }

    pub fn constant(c: f64) -> Self {
        Self::from_fn(format!("const {c}"), move |_, _, _| c)
            .with_bound(c.abs())
            .with_lipschitz(0.0)
    }

    /// `a·X + b`.
    pub fn linear(a: Vec<f64>, b: f64) -> Self {
        let name = format!(
            "linear {} {}",
            a.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
            b
        );
        let l = norm(&a);
        Self::from_fn(name, move |x, _, _| dot(&a, x) + b).with_lipschitz(l)
    }

    /// `Y·e + t X·e`.
    pub fn y_plus_tx(e: Vec<f64>) -> Self {
        let name = if e.len() == 1 && e[0] == 1.0 {
            "y_plus_tx".to_string()
        } else {
            format!(
                "y_plus_tx {}",
                e.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
            )
        };
        Self::from_fn(name, move |x, y, t| dot(&e, y) + t * dot(&e, x))
    }

    /// `|X|² + 2(m+p−2)/(m+p)·t`; `p = None` stands for `p = ∞`.
    pub fn quadratic_p(m: usize, p: crate::Exponent) -> Self {
        let c = p.quadratic_time_coefficient(m);
        Self::from_fn("quadratic_p", move |x, _, t| dot(x, x) + c * t)
    }

    /// `F + c`, with the same name suffixed.
    pub fn shifted(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            name: format!("{}+{}", self.name, c),
            eval: Arc::new(move |x, y, t| inner(x, y, t) + c),
            bound: self.bound.map(|b| b + c.abs()),
            lipschitz: self.lipschitz,
        }
    }
}

/// McShane extension of a `d̂`-Lipschitz sample table, truncated to `[−B, B]`.
#[derive(Debug, Clone)]
pub struct McShane {
    samples: Vec<(GroupPoint, f64)>,
    lipschitz: f64,
    bound: f64,
}

impl McShane {
    pub fn eval(&self, q: &GroupPoint) -> f64 {
        let mut best = f64::INFINITY;
        for (s, v) in &self.samples {
            let d = d_hat(q, s).expect("dimension checked at construction");
            if d == 0.0 {
                return *v;
            }
            best = best.min(v + self.lipschitz * d);
        }
        best.clamp(-self.bound, self.bound)
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn samples(&self) -> &[(GroupPoint, f64)] {
        &self.samples
    }

    pub fn into_datum(self, name: impl Into<String>) -> BoundaryDatum {
        let b = self.bound;
        let ext = Arc::new(self);
        BoundaryDatum::from_fn(name, move |x, y, t| {
            ext.eval(&GroupPoint {
                x: x.to_vec(),
                y: y.to_vec(),
                t,
            })
        })
        .with_bound(b)
    }
}

/// Builds the McShane extension `q ↦ clamp(min_s F(s) + L·d̂(q,s), −B, B)`.
///
/// Every sample pair is checked against the declared constant first.
pub fn mcshane_extend(samples: Vec<(GroupPoint, f64)>, lipschitz: f64) -> Result<McShane> {
    if !(lipschitz > 0.0) {
        return Err(Error::Invalid(format!("Lipschitz constant {lipschitz} must be positive")));
    }
    if samples.is_empty() {
        return Err(Error::Invalid("no samples".into()));
    }
    let m = samples[0].0.dim();
    for (i, (gi, vi)) in samples.iter().enumerate() {
        if gi.dim() != m {
            return Err(Error::DimensionMismatch {
                left: m,
                right: gi.dim(),
            });
        }
        for (j, (gj, vj)) in samples.iter().enumerate().skip(i + 1) {
            let d = d_hat(gi, gj)?;
            let diff = (vi - vj).abs();
            if diff > lipschitz * d * (1.0 + 1e-12) {
                return Err(Error::LipschitzViolation {
                    i,
                    j,
                    ratio: if d > 0.0 { diff / d } else { f64::INFINITY },
                    declared: lipschitz,
                });
            }
        }
    }
    let bound = samples.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
    Ok(McShane {
        samples,
        lipschitz,
        bound,
    })
}

/// Draws a point of the collar `Γ_ε`, with `Y` uniform in `[−y_range, y_range]^m`.
pub fn sample_collar_point<R: Rng>(rng: &mut R, collar: &ParabolicCollar, y_range: f64) -> GroupPoint {
    let m = collar.domain.dim();
    let eps = collar.epsilon;
    let (lo, hi) = collar.domain.bounding_box(eps);
    let lateral = rng.random::<bool>();
    let x = loop {
        let x: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| l + (h - l) * rng.random::<f64>())
            .collect();
        let s = collar.domain.signed_distance(&x);
        if (lateral && s >= 0.0 && s <= eps) || (!lateral && s < 0.0) {
            break x;
        }
    };
    let y = (0..m).map(|_| y_range * (2.0 * rng.random::<f64>() - 1.0)).collect();
    let t_lo = collar.t_floor();
    let t_hi = if lateral { collar.horizon } else { 0.0 };
    // (t_lo, t_hi]: flip a [0,1) draw so the lower end is excluded.
    let t = t_hi - (t_hi - t_lo) * rng.random::<f64>();
    GroupPoint { x, y, t }
}

/// Largest sampled ratio `|F(a)−F(b)| / d_boundary(a,b)` over `n` collar pairs.
pub fn verify_g_eps_lipschitz(
    datum: &BoundaryDatum,
    collar: &ParabolicCollar,
    n: usize,
    seed: u64,
) -> Result<f64> {
    if n < 2 {
        return Err(Error::Invalid("need at least 2 samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y_range = collar.domain.r_constant();
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let a = sample_collar_point(&mut rng, collar, y_range);
        let b = sample_collar_point(&mut rng, collar, y_range);
        let d = d_boundary(&a, &b)?;
        if d > 0.0 {
            worst = worst.max((datum.value(&a) - datum.value(&b)).abs() / d);
        }
    }
    Ok(worst)
}
