//! Smooth test profiles `φ(X, Y, t)` together with their derivatives.
//!
//! Profiles are either closed-form ([`Constant`], [`Affine`], ...) or
//! wrappers that transform another profile. [`FiniteDifference`] rebuilds
//! the derivatives of any profile from its values.

use std::sync::Arc;

use crate::geometry::{dot, norm, GroupPoint};

/// Value and the derivatives the operators need at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad_x: Vec<f64>,
    /// Row-major `m × m` Hessian in `X`.
    pub hess_x: Vec<f64>,
    pub grad_y: Vec<f64>,
    pub dt: f64,
}

impl Jet {
    pub fn zero(m: usize) -> Self {
        Self {
            value: 0.0,
            grad_x: vec![0.0; m],
            hess_x: vec![0.0; m * m],
            grad_y: vec![0.0; m],
            dt: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.grad_x.len()
    }

    pub fn laplacian_x(&self) -> f64 {
        let m = self.dim();
        (0..m).map(|i| self.hess_x[i * m + i]).sum()
    }

    /// Frobenius norm of the X-Hessian.
    pub fn hess_norm(&self) -> f64 {
        norm(&self.hess_x)
    }
}

pub trait SmoothProfile: Send + Sync {
    fn dim(&self) -> usize;
    fn name(&self) -> String;
    fn value(&self, x: &[f64], y: &[f64], t: f64) -> f64;
    fn jet(&self, g: &GroupPoint) -> Jet;

    fn value_at(&self, g: &GroupPoint) -> f64 {
        self.value(&g.x, &g.y, g.t)
    }
}

impl<P: SmoothProfile + ?Sized> SmoothProfile for Arc<P> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn name(&self) -> String {
        (**self).name()
    }
    fn value(&self, x: &[f64], y: &[f64], t: f64) -> f64 {
        (**self).value(x, y, t)
    }
    fn jet(&self, g: &GroupPoint) -> Jet {
        (**self).jet(g)
    }
}

/// `φ ≡ c`.
#[derive(Debug, Clone)]
pub struct Constant {
    pub m: usize,
    pub c: f64,
}

impl SmoothProfile for Constant {
    fn dim(&self) -> usize {
        self.m
    }
    fn name(&self) -> String {
        format!("const {}", self.c)
    }
    fn value(&self, _: &[f64], _: &[f64], _: f64) -> f64 {
        self.c
    }
    fn jet(&self, _: &GroupPoint) -> Jet {
        Jet {
            value: self.c,
            ..Jet::zero(self.m)
        }
    }
}

/// `φ = a·X + b`.
#[derive(Debug, Clone)]
pub struct Affine {
    pub a: Vec<f64>,
    pub b: f64,
}

impl SmoothProfile for Affine {
    fn dim(&self) -> usize {
        self.a.len()
    }
    fn name(&self) -> String {
        "affine".into()
    }
    fn value(&self, x: &[f64], _: &[f64], _: f64) -> f64 {
        dot(&self.a, x) + self.b
    }
    fn jet(&self, g: &GroupPoint) -> Jet {
        Jet {
            value: self.value_at(g),
            grad_x: self.a.clone(),
            ..Jet::zero(self.a.len())
        }
    }
}

/// `φ = Y·e + t X·e`.
#[derive(Debug, Clone)]
pub struct YPlusTx {
    pub e: Vec<f64>,
}

impl SmoothProfile for YPlusTx {
    fn dim(&self) -> usize {
        self.e.len()
    }
    fn name(&self) -> String {
        "y_plus_tx".into()
    }
    fn value(&self, x: &[f64], y: &[f64], t: f64) -> f64 {
        dot(&self.e, y) + t * dot(&self.e, x)
    }
    fn jet(&self, g: &GroupPoint) -> Jet {
        let m = self.e.len();
        Jet {
            value: self.value_at(g),
            grad_x: self.e.iter().map(|v| g.t * v).collect(),
            hess_x: vec![0.0; m * m],
            grad_y: self.e.clone(),
            dt: dot(&self.e, &g.x),
        }
    }
}

/// `φ = |X|² + c·t`.
#[derive(Debug, Clone)]
pub struct Paraboloid {
    pub m: usize,
    pub c: f64,
}

impl SmoothProfile for Paraboloid {
    fn dim(&self) -> usize {
        self.m
    }
    fn name(&self) -> String {
        if self.c == 0.0 {
            "x_squared".into()
        } else {
            format!("paraboloid {}", self.c)
        }
    }
    fn value(&self, x: &[f64], _: &[f64], t: f64) -> f64 {
        dot(x, x) + self.c * t
    }
    fn jet(&self, g: &GroupPoint) -> Jet {
        let m = self.m;
        let mut hess_x = vec![0.0; m * m];
        for i in 0..m {
            hess_x[i * m + i] = 2.0;
        }
        Jet {
            value: self.value_at(g),
            grad_x: g.x.iter().map(|v| 2.0 * v).collect(),
            hess_x,
            grad_y: vec![0.0; m],
            dt: self.c,
        }
    }
}

/// `φ = x₁³`; degenerate gradient and Hessian at `x₁ = 0`.
#[derive(Debug, Clone)]
pub struct CubicX1 {
    pub m: usize,
}

impl SmoothProfile for CubicX1 {
    fn dim(&self) -> usize {
        self.m
    }
    fn name(&self) -> String {
        "cubic_x1".into()
    }
    fn value(&self, x: &[f64], _: &[f64], _: f64) -> f64 {
        x[0] * x[0] * x[0]
    }
    fn jet(&self, g: &GroupPoint) -> Jet {
        let mut j = Jet::zero(self.m);
        let x = g.x[0];
        j.value = x * x * x;
        j.grad_x[0] = 3.0 * x * x;
        j.hess_x[0] = 6.0 * x;
        j
    }
}

/// `φ = sin(a·X)·cos(b·Y) + t|X|²`, a generic non-polynomial profile.
#[derive(Debug, Clone)]
pub struct Wave {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Wave {
    pub fn standard(m: usize) -> Self {
        let a = (0..m).map(|i| 1.3 - 0.4 * i as f64).collect();
        let b = (0..m).map(|i| 0.7 + 0.5 * i as f64).collect();
        Self { a, b }
    }
}

impl SmoothProfile for Wave {
    fn dim(&self) -> usize {
        self.a.len()
    }
    fn name(&self) -> String {
        "wave".into()
    }
    fn value(&self, x: &[f64], y: &[f64], t: f64) -> f64 {
        dot(&self.a, x).sin() * dot(&self.b, y).cos() + t * dot(x, x)
    }
    fn jet(&self, g: &GroupPoint) -> Jet {
        let m = self.dim();
        let (ss, cs) = dot(&self.a, &g.x).sin_cos();
        let (sc, cc) = dot(&self.b, &g.y).sin_cos();
        let mut hess_x = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                hess_x[i * m + j] = -self.a[i] * self.a[j] * ss * cc;
            }
            hess_x[i * m + i] += 2.0 * g.t;
        }
        Jet {
            value: ss * cc + g.t * dot(&g.x, &g.x),
            grad_x: (0..m).map(|i| self.a[i] * cs * cc + 2.0 * g.t * g.x[i]).collect(),
            hess_x,
            grad_y: self.b.iter().map(|b| -b * ss * sc).collect(),
            dt: dot(&g.x, &g.x),
        }
    }
}

/// `φ = exp(x₁/2) + x₁y₁ + t²`.
#[derive(Debug, Clone)]
pub struct ExpMix {
    pub m: usize,
}

impl SmoothProfile for ExpMix {
    fn dim(&self) -> usize {
        self.m
    }
    fn name(&self) -> String {
        "exp_mix".into()
    }
    fn value(&self, x: &[f64], y: &[f64], t: f64) -> f64 {
        (0.5 * x[0]).exp() + x[0] * y[0] + t * t
    }
    fn jet(&self, g: &GroupPoint) -> Jet {
        let e = (0.5 * g.x[0]).exp();
        let mut j = Jet::zero(self.m);
        j.value = e + g.x[0] * g.y[0] + g.t * g.t;
        j.grad_x[0] = 0.5 * e + g.y[0];
        j.hess_x[0] = 0.25 * e;
        j.grad_y[0] = g.x[0];
        j.dt = 2.0 * g.t;
        j
    }
}

/// `ψ(g) = φ(g₀ ∘ g)`.
pub struct LeftTranslated<P> {
    pub inner: P,
    pub g0: GroupPoint,
}

impl<P: SmoothProfile> LeftTranslated<P> {
    fn image(&self, x: &[f64], y: &[f64], t: f64) -> (Vec<f64>, Vec<f64>, f64) {
        let g0 = &self.g0;
        let xi = g0.x.iter().zip(x).map(|(a, b)| a + b).collect();
        let yi = g0
            .y
            .iter()
            .zip(y)
            .zip(&g0.x)
            .map(|((a, b), x0)| a + b - t * x0)
            .collect();
        (xi, yi, g0.t + t)
    }
}

impl<P: SmoothProfile> SmoothProfile for LeftTranslated<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn name(&self) -> String {
        format!("{}∘L", self.inner.name())
    }
    fn value(&self, x: &[f64], y: &[f64], t: f64) -> f64 {
        let (xi, yi, ti) = self.image(x, y, t);
        self.inner.value(&xi, &yi, ti)
    }
    fn jet(&self, g: &GroupPoint) -> Jet {
        let (x, y, t) = self.image(&g.x, &g.y, g.t);
        let mut j = self.inner.jet(&GroupPoint { x, y, t });
        // the image's Y component moves with −t·X₀
        j.dt -= dot(&self.g0.x, &j.grad_y);
        j
    }
}

/// `ψ(g) = φ(δ_r g)`.
pub struct Dilated<P> {
    pub inner: P,
    pub r: f64,
}

impl<P: SmoothProfile> SmoothProfile for Dilated<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn name(&self) -> String {
        format!("{}∘δ", self.inner.name())
    }
    fn value(&self, x: &[f64], y: &[f64], t: f64) -> f64 {
        let r = self.r;
        let xs: Vec<f64> = x.iter().map(|v| r * v).collect();
        let ys: Vec<f64> = y.iter().map(|v| r * r * r * v).collect();
        self.inner.value(&xs, &ys, r * r * t)
    }
    fn jet(&self, g: &GroupPoint) -> Jet {
        let r = self.r;
        let r2 = r * r;
        let r3 = r2 * r;
        let img = GroupPoint {
            x: g.x.iter().map(|v| r * v).collect(),
            y: g.y.iter().map(|v| r3 * v).collect(),
            t: r2 * g.t,
        };
        let j = self.inner.jet(&img);
        Jet {
            value: j.value,
            grad_x: j.grad_x.iter().map(|v| r * v).collect(),
            hess_x: j.hess_x.iter().map(|v| r2 * v).collect(),
            grad_y: j.grad_y.iter().map(|v| r3 * v).collect(),
            dt: r2 * j.dt,
        }
    }
}

/// Derivatives by central differences of the wrapped profile's values.
///
/// The step defaults to `1e−4·(1+|g|)`.
pub struct FiniteDifference<P> {
    pub inner: P,
    pub h: Option<f64>,
}

impl<P: SmoothProfile> FiniteDifference<P> {
    pub fn new(inner: P) -> Self {
        Self { inner, h: None }
    }

    pub fn with_step(inner: P, h: f64) -> Self {
        Self { inner, h: Some(h) }
    }

    fn step(&self, g: &GroupPoint) -> f64 {
        self.h.unwrap_or_else(|| {
            let r2 = dot(&g.x, &g.x) + dot(&g.y, &g.y) + g.t * g.t;
            1e-4 * (1.0 + r2.sqrt())
        })
    }
}

impl<P: SmoothProfile> SmoothProfile for FiniteDifference<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn name(&self) -> String {
        format!("fd({})", self.inner.name())
    }
    fn value(&self, x: &[f64], y: &[f64], t: f64) -> f64 {
        self.inner.value(x, y, t)
    }
    fn jet(&self, g: &GroupPoint) -> Jet {
        let m = g.dim();
        let h = self.step(g);
        let f = |x: &[f64], y: &[f64], t: f64| self.inner.value(x, y, t);
        let f0 = f(&g.x, &g.y, g.t);
        let mut jet = Jet::zero(m);
        jet.value = f0;
        let mut x = g.x.clone();
        for i in 0..m {
            x[i] = g.x[i] + h;
            let fp = f(&x, &g.y, g.t);
            x[i] = g.x[i] - h;
            let fm = f(&x, &g.y, g.t);
            x[i] = g.x[i];
            jet.grad_x[i] = (fp - fm) / (2.0 * h);
            jet.hess_x[i * m + i] = (fp - 2.0 * f0 + fm) / (h * h);
            for j in 0..i {
                let mut corner = |si: f64, sj: f64| {
                    x[i] = g.x[i] + si * h;
                    x[j] = g.x[j] + sj * h;
                    let v = f(&x, &g.y, g.t);
                    x[i] = g.x[i];
                    x[j] = g.x[j];
                    v
                };
                let mixed = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0)
                    + corner(-1.0, -1.0))
                    / (4.0 * h * h);
                jet.hess_x[i * m + j] = mixed;
                jet.hess_x[j * m + i] = mixed;
            }
        }
        let mut y = g.y.clone();
        for i in 0..m {
            y[i] = g.y[i] + h;
            let fp = f(&g.x, &y, g.t);
            y[i] = g.y[i] - h;
            let fm = f(&g.x, &y, g.t);
            y[i] = g.y[i];
            jet.grad_y[i] = (fp - fm) / (2.0 * h);
        }
        jet.dt = (f(&g.x, &g.y, g.t + h) - f(&g.x, &g.y, g.t - h)) / (2.0 * h);
        jet
    }
}

/// Looks up a profile by the name used in config files.
pub fn profile_by_name(name: &str, m: usize) -> Option<Arc<dyn SmoothProfile>> {
    let e1 = || {
        let mut e = vec![0.0; m];
        e[0] = 1.0;
        e
    };
    let p: Arc<dyn SmoothProfile> = match name {
        "const" => Arc::new(Constant { m, c: 1.0 }),
        "affine" => Arc::new(Affine {
            a: (0..m).map(|i| 1.0 - 0.5 * i as f64).collect(),
            b: 0.3,
        }),
        "y_plus_tx" => Arc::new(YPlusTx { e: e1() }),
        "x_squared" => Arc::new(Paraboloid { m, c: 0.0 }),
        "cubic_x1" => Arc::new(CubicX1 { m }),
        "wave" => Arc::new(Wave::standard(m)),
        "exp_mix" => Arc::new(ExpMix { m }),
        _ => return None,
    };
    Some(p)
}
