//! Group structure on ℝ^m × ℝ^m × ℝ attached to the Kolmogorov operator.
//!
//! Points are `(X, Y, t)` with velocity `X`, position `Y` and time `t`.
//! The group law is `(X̃,Ỹ,t̃)∘(X,Y,t) = (X̃+X, Ỹ+Y−tX̃, t̃+t)` and the
//! dilations are `δ_r(X,Y,t) = (rX, r³Y, r²t)`.

use crate::error::{Error, Result};

/// A point `(X, Y, t)` of the Kolmogorov group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
}

impl GroupPoint {
    /// Builds a point, checking that `X` and `Y` have the same length
    /// and that every component is finite.
    pub fn new(x: Vec<f64>, y: Vec<f64>, t: f64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::Invalid("dimension m must be at least 1".into()));
        }
        if !(t.is_finite() && x.iter().chain(&y).all(|v| v.is_finite())) {
            return Err(Error::Invalid("non-finite coordinate".into()));
        }
        Ok(Self { x, y, t })
    }

    /// Scalar convenience constructor for m = 1.
    pub fn scalar(x: f64, y: f64, t: f64) -> Self {
        Self {
            x: vec![x],
            y: vec![y],
            t,
        }
    }

    pub fn identity(m: usize) -> Self {
        Self {
            x: vec![0.0; m],
            y: vec![0.0; m],
            t: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

impl std::fmt::Display for GroupPoint {
    /// `x1,..,xm;y1,..,ym;t`, the same syntax the config reader accepts.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |v: &[f64]| {
            v.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "{};{};{}", join(&self.x), join(&self.y), self.t)
    }
}

fn check_dims(a: &GroupPoint, b: &GroupPoint) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Group product `a ∘ b = (a.X+b.X, a.Y+b.Y − b.t·a.X, a.t+b.t)`.
pub fn compose(a: &GroupPoint, b: &GroupPoint) -> Result<GroupPoint> {
    check_dims(a, b)?;
    let x = a.x.iter().zip(&b.x).map(|(p, q)| p + q).collect();
    let y = a
        .y
        .iter()
        .zip(&b.y)
        .zip(&a.x)
        .map(|((ya, yb), xa)| ya + yb - b.t * xa)
        .collect();
    Ok(GroupPoint { x, y, t: a.t + b.t })
}

/// `(X,Y,t)⁻¹ = (−X, −Y−tX, −t)`.
pub fn inverse(g: &GroupPoint) -> GroupPoint {
    GroupPoint {
        x: g.x.iter().map(|v| -v).collect(),
        y: g.y.iter().zip(&g.x).map(|(y, x)| -y - g.t * x).collect(),
        t: -g.t,
    }
}

/// `δ_r(X,Y,t) = (rX, r³Y, r²t)`.
pub fn dilate(r: f64, g: &GroupPoint) -> Result<GroupPoint> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::NonPositiveScale(r));
    }
    let r3 = r * r * r;
    Ok(GroupPoint {
        x: g.x.iter().map(|v| r * v).collect(),
        y: g.y.iter().map(|v| r3 * v).collect(),
        t: r * r * g.t,
    })
}

/// `‖(X,Y,t)‖ = |X| + |Y|^{1/3} + |t|^{1/2}` with Euclidean `|·|`.
pub fn quasi_norm(g: &GroupPoint) -> f64 {
    norm(&g.x) + norm(&g.y).cbrt() + g.t.abs().sqrt()
}

/// `b⁻¹∘a` written in differences so that it vanishes exactly at `a = b`.
fn left_difference(b: &GroupPoint, a: &GroupPoint) -> GroupPoint {
    let dt = a.t - b.t;
    GroupPoint {
        x: a.x.iter().zip(&b.x).map(|(p, q)| p - q).collect(),
        y: a.y.iter().zip(&b.y).zip(&b.x).map(|((p, q), bx)| (p - q) + dt * bx).collect(),
        t: dt,
    }
}

/// Symmetrized quasi-distance `½(‖b⁻¹∘a‖ + ‖a⁻¹∘b‖)`.
pub fn d_k(a: &GroupPoint, b: &GroupPoint) -> Result<f64> {
    check_dims(a, b)?;
    Ok(0.5 * (quasi_norm(&left_difference(b, a)) + quasi_norm(&left_difference(a, b))))
}

/// `d(a, b) = |X−X̂| + |Y−Ŷ−(t̂−t)X̂|^{1/3} + |t̂−t|^{1/2}` for `b = (X̂,Ŷ,t̂)`.
///
/// Not symmetric in its arguments.
pub fn d_boundary(a: &GroupPoint, b: &GroupPoint) -> Result<f64> {
    check_dims(a, b)?;
    let dt = b.t - a.t;
    let dx: Vec<f64> = a.x.iter().zip(&b.x).map(|(p, q)| p - q).collect();
    let dy: Vec<f64> = a
        .y
        .iter()
        .zip(&b.y)
        .zip(&b.x)
        .map(|((y, yh), xh)| y - yh - dt * xh)
        .collect();
    Ok(norm(&dx) + norm(&dy).cbrt() + dt.abs().sqrt())
}

/// `d̂(a, b) = |X−X̃| + |Y−Ỹ|^{1/2} + |t−t̃|^{1/2}`, a genuine metric.
pub fn d_hat(a: &GroupPoint, b: &GroupPoint) -> Result<f64> {
    check_dims(a, b)?;
    let dx: Vec<f64> = a.x.iter().zip(&b.x).map(|(p, q)| p - q).collect();
    let dy: Vec<f64> = a.y.iter().zip(&b.y).map(|(p, q)| p - q).collect();
    Ok(norm(&dx) + norm(&dy).sqrt() + (a.t - b.t).abs().sqrt())
}
