//! Backward solver for the dynamic programming principle
//!
//! ```text
//! u(X,Y,t) = (α/2)(max + min over B_ε(X)) + β·mean, of u(X̃, Y+ε²X̃/2, t−ε²/2)
//! ```
//!
//! on `U_X × ℝ^m × (0,T]`, with `u = F` on the collar. Time slices are
//! `ε²/2` apart and anchored at `T`; values live on a uniform `(X, Y)` grid
//! and are read back by multilinear interpolation.

use std::io::{Read, Write};
use std::sync::Arc;

use rayon::prelude::*;

use crate::domain::{BoundaryDatum, ParabolicCollar, SpatialDomain};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::quadrature::BallStencil;

/// Parameters of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub domain: SpatialDomain,
    pub horizon: f64,
    pub p: Exponent,
    pub epsilon: f64,
    pub h_x: f64,
    pub h_y: f64,
    pub ball_samples: usize,
    /// Box of `Y` values where the solution is wanted at time `T`.
    pub y_seed_lo: Vec<f64>,
    pub y_seed_hi: Vec<f64>,
}

impl SolveConfig {
    /// `h_X = h_Y = ε/8`, default stencil, `Y` seed `[−½, ½]^m`.
    pub fn new(domain: SpatialDomain, horizon: f64, p: Exponent, epsilon: f64) -> Self {
        let m = domain.dim();
        Self {
            domain,
            horizon,
            p,
            epsilon,
            h_x: epsilon / 8.0,
            h_y: epsilon / 8.0,
            ball_samples: BallStencil::default_size(m),
            y_seed_lo: vec![-0.5; m],
            y_seed_hi: vec![0.5; m],
        }
    }

    pub fn m(&self) -> usize {
        self.domain.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.m();
        if m > 4 {
            return Err(Error::config("m", "the grid solver supports m <= 4"));
        }
        if !self.p.is_at_least_two() {
            return Err(Error::config("p", "the solver needs p >= 2"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("epsilon", "must be positive"));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::config("horizon", "must be positive"));
        }
        if !(self.h_x > 0.0 && self.h_x <= self.epsilon / 8.0 * (1.0 + 1e-12)) {
            return Err(Error::config("h_x", format!("need 0 < h_x <= epsilon/8 = {}", self.epsilon / 8.0)));
        }
        if !(self.h_y > 0.0) {
            return Err(Error::config("h_y", "must be positive"));
        }
        if self.y_seed_lo.len() != m || self.y_seed_hi.len() != m {
            return Err(Error::config("y_seed", format!("need {m} components")));
        }
        if self.y_seed_lo.iter().zip(&self.y_seed_hi).any(|(a, b)| a > b) {
            return Err(Error::config("y_seed", "lo must not exceed hi"));
        }
        Ok(())
    }

    /// Drift of `Y` per round: `(ε²/2)(R+ε)`.
    pub fn y_drift_per_round(&self) -> f64 {
        0.5 * self.epsilon * self.epsilon * (self.domain.r_constant() + self.epsilon)
    }

    /// Margin `(T+ε²)(R+ε)` added around the `Y` seed box.
    pub fn y_margin(&self) -> f64 {
        (self.horizon + self.epsilon * self.epsilon) * (self.domain.r_constant() + self.epsilon)
    }
}

/// `N = ⌈t/(ε²/2)⌉` and the times `t_k = t − k·ε²/2`, `k = 0..=N`.
///
/// A quotient within `1e−9` of an integer is treated as that integer so
/// that exact divisions are not pushed up by rounding, and a final time
/// within `1e−12` of zero is returned as zero.
pub fn time_ladder(t: f64, eps: f64) -> Result<(usize, Vec<f64>)> {
    let step = 0.5 * eps * eps;
    if !(eps > 0.0) || !(t > -step) || !t.is_finite() {
        return Err(Error::TimeOutOfRange {
            t,
            lo: -step,
            hi: f64::INFINITY,
        });
    }
    let q = t / step;
    let n = if (q - q.round()).abs() < 1e-9 {
        q.round().max(0.0)
    } else {
        q.ceil().max(0.0)
    } as usize;
    let mut ts: Vec<f64> = (0..=n).map(|k| t - k as f64 * step).collect();
    if ts[n].abs() < 1e-12 * (1.0 + t.abs()) {
        ts[n] = 0.0;
    }
    Ok((n, ts))
}

/// Uniform node layout in `(X, Y)`, row-major with the last `Y` axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxes {
    pub m: usize,
    pub x_lo: Vec<f64>,
    pub x_n: Vec<usize>,
    pub h_x: f64,
    pub y_lo: Vec<f64>,
    pub y_n: Vec<usize>,
    pub h_y: f64,
}

impl GridAxes {
    fn covering(lo: &[f64], hi: &[f64], h: f64) -> Vec<usize> {
        lo.iter()
            .zip(hi)
            .map(|(l, u)| (((u - l) / h) * (1.0 - 1e-12)).ceil() as usize + 1)
            .map(|n| n.max(2))
            .collect()
    }

    pub fn len_y(&self) -> usize {
        self.y_n.iter().product()
    }

    pub fn len_x(&self) -> usize {
        self.x_n.iter().product()
    }

    pub fn len(&self) -> usize {
        self.len_x() * self.len_y()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of node `idx`.
    pub fn node(&self, idx: usize, x: &mut [f64], y: &mut [f64]) {
        let mut iy = idx % self.len_y();
        let mut ix = idx / self.len_y();
        for d in (0..self.m).rev() {
            y[d] = self.y_lo[d] + (iy % self.y_n[d]) as f64 * self.h_y;
            iy /= self.y_n[d];
            x[d] = self.x_lo[d] + (ix % self.x_n[d]) as f64 * self.h_x;
            ix /= self.x_n[d];
        }
    }

    pub fn x_index(&self, idx: usize) -> usize {
        idx / self.len_y()
    }

    fn locate(lo: f64, n: usize, h: f64, v: f64, strict: bool) -> Option<(usize, f64)> {
        let s = (v - lo) / h;
        let top = (n - 1) as f64;
        if strict && !(s >= -1e-9 && s <= top + 1e-9) {
            return None;
        }
        let s = s.clamp(0.0, top);
        let i = (s.floor() as usize).min(n - 2);
        Some((i, s - i as f64))
    }

    /// Multilinear interpolation of `values` at `(x, y)`. Out-of-range
    /// coordinates are an error when `strict`, otherwise clamped.
    pub fn interpolate(&self, values: &[f64], x: &[f64], y: &[f64], strict: bool) -> Option<f64> {
        let m = self.m;
        let d = 2 * m;
        let mut cell = [0usize; 8];
        let mut frac = [0f64; 8];
        let mut stride = [0usize; 8];
        for k in 0..m {
            let (i, f) = Self::locate(self.x_lo[k], self.x_n[k], self.h_x, x[k], strict)?;
            cell[k] = i;
            frac[k] = f;
            let (i, f) = Self::locate(self.y_lo[k], self.y_n[k], self.h_y, y[k], strict)?;
            cell[m + k] = i;
            frac[m + k] = f;
        }
        let mut s = 1;
        for k in (0..d).rev() {
            stride[k] = s;
            s *= if k < m { self.x_n[k] } else { self.y_n[k - m] };
        }
        let base: usize = (0..d).map(|k| cell[k] * stride[k]).sum();
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut idx = base;
            for k in 0..d {
                if corner >> (d - 1 - k) & 1 == 1 {
                    w *= frac[k];
                    idx += stride[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            acc += w * values[idx];
        }
        Some(acc)
    }
}

/// Result of [`compare`].
#[derive(Debug, Clone, PartialEq)]
pub enum Comparison {
    Dominates,
    Incomparable(Witness),
}

/// A node where the first grid falls below the second.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub slice: usize,
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

/// Solution values on all time slices, ascending in time.
#[derive(Debug, Clone)]
pub struct ValueGrid {
    pub config: SolveConfig,
    pub axes: GridAxes,
    pub datum: BoundaryDatum,
    pub stencil: Arc<BallStencil>,
    pub times: Vec<f64>,
    pub slices: Vec<Vec<f64>>,
    /// Per slice, the `Y` box whose values do not depend on clamping.
    pub certified: Vec<(Vec<f64>, Vec<f64>)>,
    inside: Vec<bool>,
}

impl ValueGrid {
    /// Grid with every slice set to `F` on collar nodes and `init` elsewhere;
    /// the bottom slice (`t ≤ 0`) is entirely `F`.
    pub fn initialized(config: &SolveConfig, datum: &BoundaryDatum, init: f64) -> Result<Self> {
        config.validate()?;
        let m = config.m();
        let eps = config.epsilon;
        let (x_lo, x_hi) = config.domain.bounding_box(eps);
        let margin = config.y_margin();
        let y_lo: Vec<f64> = config.y_seed_lo.iter().map(|v| v - margin).collect();
        let y_hi: Vec<f64> = config.y_seed_hi.iter().map(|v| v + margin).collect();
        let axes = GridAxes {
            m,
            x_n: GridAxes::covering(&x_lo, &x_hi, config.h_x),
            x_lo,
            h_x: config.h_x,
            y_n: GridAxes::covering(&y_lo, &y_hi, config.h_y),
            y_lo,
            h_y: config.h_y,
        };
        let (n, ladder) = time_ladder(config.horizon, eps)?;
        let times: Vec<f64> = ladder.into_iter().rev().collect();
        let drift = config.y_drift_per_round();
        let certified = (0..=n)
            .map(|s| {
                let k = (n - s) as f64;
                (
                    config.y_seed_lo.iter().map(|v| v - k * drift).collect(),
                    config.y_seed_hi.iter().map(|v| v + k * drift).collect(),
                )
            })
            .collect();
        let mut x = vec![0.0; m];
        let mut y = vec![0.0; m];
        let inside = (0..axes.len_x())
            .map(|ix| {
                axes.node(ix * axes.len_y(), &mut x, &mut y);
                config.domain.contains(&x)
            })
            .collect();
        let mut grid = Self {
            config: config.clone(),
            stencil: Arc::new(BallStencil::new(m, config.ball_samples)?),
            datum: datum.clone(),
            slices: Vec::with_capacity(times.len()),
            axes,
            times,
            certified,
            inside,
        };
        for s in 0..grid.times.len() {
            let t = grid.times[s];
            let slice = grid.node_map(|g, idx, x, y| {
                if t <= 0.0 || !g.inside[g.axes.x_index(idx)] {
                    Ok(g.datum.eval(x, y, t))
                } else {
                    Ok(init)
                }
            })?;
            grid.slices.push(slice);
        }
        Ok(grid)
    }

    pub fn m(&self) -> usize {
        self.axes.m
    }

    pub fn epsilon(&self) -> f64 {
        self.config.epsilon
    }

    pub fn p(&self) -> Exponent {
        self.config.p
    }

    /// Number of rounds `N` between the top slice and the bottom one.
    pub fn rounds(&self) -> usize {
        self.times.len() - 1
    }

    pub fn collar(&self) -> ParabolicCollar {
        ParabolicCollar {
            domain: self.config.domain.clone(),
            epsilon: self.config.epsilon,
            horizon: self.config.horizon,
        }
    }

    /// Evaluates `f` at every node in parallel; output order is node order.
    fn node_map<F>(&self, f: F) -> Result<Vec<f64>>
    where
        F: Fn(&Self, usize, &[f64], &[f64]) -> Result<f64> + Sync,
    {
        let m = self.m();
        (0..self.axes.len())
            .into_par_iter()
            .map_init(
                || (vec![0.0; m], vec![0.0; m]),
                |(x, y), idx| {
                    self.axes.node(idx, x, y);
                    f(self, idx, x, y)
                },
            )
            .collect()
    }

    pub fn node_is_interior(&self, s: usize, idx: usize) -> bool {
        self.times[s] > 0.0 && self.inside[self.axes.x_index(idx)]
    }

    fn in_certified(&self, s: usize, y: &[f64]) -> bool {
        let (lo, hi) = &self.certified[s];
        let tol = 1e-9 * self.axes.h_y;
        y.iter().zip(lo).zip(hi).all(|((v, l), h)| *v >= l - tol && *v <= h + tol)
    }

    /// One application of the DPP operator at an interior point `(x, y)` of
    /// slice `s`, reading `source` as slice `s − 1`.
    fn apply_at(&self, s: usize, source: &[f64], x: &[f64], y: &[f64], strict: bool) -> Result<f64> {
        let m = self.m();
        let eps = self.config.epsilon;
        let half_e2 = 0.5 * eps * eps;
        let t_src = self.times[s - 1];
        let alpha = self.config.p.alpha(m);
        let beta = self.config.p.beta(m);
        let mut xt = [0.0f64; 4];
        let mut yt = [0.0f64; 4];
        let (xt, yt) = (&mut xt[..m], &mut yt[..m]);
        let (mut mean, mut mx, mut mn) = (0.0, f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..self.stencil.len() {
            let v = self.stencil.point(i);
            for k in 0..m {
                xt[k] = x[k] + eps * v[k];
                yt[k] = y[k] + half_e2 * xt[k];
            }
            let val = if t_src <= 0.0 || !self.config.domain.contains(xt) {
                self.datum.eval(xt, yt, t_src)
            } else {
                self.axes
                    .interpolate(source, xt, yt, strict)
                    .ok_or_else(|| Error::OutOfGrid(format!("X={xt:?} Y={yt:?} t={t_src}")))?
            };
            mean += self.stencil.weight(i) * val;
            mx = mx.max(val);
            mn = mn.min(val);
        }
        if alpha == 0.0 {
            Ok(beta * mean)
        } else {
            Ok(0.5 * alpha * (mx + mn) + beta * mean)
        }
    }

    /// Slice `s` recomputed from `source` (collar nodes copy `F`).
    pub fn compute_slice(&self, s: usize, source: &[f64]) -> Result<Vec<f64>> {
        if s == 0 {
            return Ok(self.slices[0].clone());
        }
        let t = self.times[s];
        self.node_map(|g, idx, x, y| {
            if g.node_is_interior(s, idx) {
                g.apply_at(s, source, x, y, g.in_certified(s, y))
            } else {
                Ok(g.datum.eval(x, y, t))
            }
        })
    }

    /// DPP operator at arbitrary targets of slice `s`, reading `source` as
    /// the slice below. Queries leaving the grid are errors.
    pub fn apply_t(&self, s: usize, source: &[f64], targets: &[(Vec<f64>, Vec<f64>)]) -> Result<Vec<f64>> {
        if s == 0 || s >= self.times.len() {
            return Err(Error::Invalid(format!("slice {s} has no slice below it")));
        }
        let t = self.times[s];
        targets
            .iter()
            .map(|(x, y)| {
                if t > 0.0 && self.config.domain.contains(x) {
                    self.apply_at(s, source, x, y, true)
                } else {
                    Ok(self.datum.eval(x, y, t))
                }
            })
            .collect()
    }

    /// Replaces slice `s` with `f(X, Y, t)` at every node.
    pub fn fill_slice(&mut self, s: usize, f: impl Fn(&[f64], &[f64], f64) -> f64 + Sync) -> Result<()> {
        let t = self.times[s];
        self.slices[s] = self.node_map(|_, _, x, y| Ok(f(x, y, t)))?;
        Ok(())
    }

    /// Index of the slice at time `t`.
    pub fn slice_index(&self, t: f64) -> Result<usize> {
        let step = 0.5 * self.config.epsilon * self.config.epsilon;
        let s = ((t - self.times[0]) / step).round();
        if s >= 0.0 && (s as usize) < self.times.len() {
            let s = s as usize;
            if (self.times[s] - t).abs() <= 1e-9 * (1.0 + t.abs()) {
                return Ok(s);
            }
        }
        Err(Error::Invalid(format!("time {t} is not a slice of this grid")))
    }

    /// `u_ε(x, y, times[s])`: `F` on the collar and at `t ≤ 0`, otherwise
    /// interpolated.
    pub fn value_in_slice(&self, s: usize, x: &[f64], y: &[f64]) -> Result<f64> {
        let t = self.times[s];
        if t <= 0.0 || !self.config.domain.contains(x) {
            return Ok(self.datum.eval(x, y, t));
        }
        self.axes
            .interpolate(&self.slices[s], x, y, true)
            .ok_or_else(|| Error::OutOfGrid(format!("X={x:?} Y={y:?} t={t}")))
    }

    pub fn value_at(&self, x: &[f64], y: &[f64], t: f64) -> Result<f64> {
        self.value_in_slice(self.slice_index(t)?, x, y)
    }

    /// Largest `|u − exact|` over nodes, optionally only certified ones.
    pub fn max_error(&self, exact: impl Fn(&[f64], &[f64], f64) -> f64 + Sync, certified_only: bool) -> f64 {
        self.max_error_where(exact, |g, s, _, y| !certified_only || g.in_certified(s, y))
    }

    /// Largest `|u − exact|` over nodes with `X`, `Y` in the given boxes
    /// and slice time in `[t_lo, t_hi]`.
    pub fn max_error_on(
        &self,
        exact: impl Fn(&[f64], &[f64], f64) -> f64 + Sync,
        x_box: (&[f64], &[f64]),
        y_box: (&[f64], &[f64]),
        t_range: (f64, f64),
    ) -> f64 {
        let within = |v: &[f64], (lo, hi): (&[f64], &[f64])| {
            v.iter().zip(lo).zip(hi).all(|((c, l), h)| c >= l && c <= h)
        };
        self.max_error_where(exact, |g, s, x, y| {
            let t = g.times[s];
            t >= t_range.0 - 1e-12 && t <= t_range.1 + 1e-12 && within(x, x_box) && within(y, y_box)
        })
    }

    fn max_error_where(
        &self,
        exact: impl Fn(&[f64], &[f64], f64) -> f64 + Sync,
        keep: impl Fn(&Self, usize, &[f64], &[f64]) -> bool + Sync,
    ) -> f64 {
        let mut worst: f64 = 0.0;
        for s in 0..self.times.len() {
            let t = self.times[s];
            let errs = self
                .node_map(|g, idx, x, y| {
                    Ok(if keep(g, s, x, y) {
                        (g.slices[s][idx] - exact(x, y, t)).abs()
                    } else {
                        0.0
                    })
                })
                .expect("infallible");
            worst = errs.into_iter().fold(worst, f64::max);
        }
        worst
    }

    /// Writes the compact binary layout (all numbers little-endian):
    /// `m: u64`, `p: f64` (−1 for ∞), `ε, h_X, h_Y: f64`, then per
    /// dimension `x_lo: f64, x_n: u64`, then per dimension `y_lo, y_n`,
    /// then `n_slices: u64`, then for each slice in time order its `t: f64`
    /// followed by the row-major node values.
    pub fn write_binary(&self, mut w: impl Write) -> std::io::Result<()> {
        let a = &self.axes;
        w.write_all(&(a.m as u64).to_le_bytes())?;
        for v in [self.config.p.encoded(), self.config.epsilon, a.h_x, a.h_y] {
            w.write_all(&v.to_le_bytes())?;
        }
        for (lo, n) in a.x_lo.iter().zip(&a.x_n).chain(a.y_lo.iter().zip(&a.y_n)) {
            w.write_all(&lo.to_le_bytes())?;
            w.write_all(&(*n as u64).to_le_bytes())?;
        }
        w.write_all(&(self.times.len() as u64).to_le_bytes())?;
        for (t, slice) in self.times.iter().zip(&self.slices) {
            w.write_all(&t.to_le_bytes())?;
            for v in slice {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// CSV rows `t, x1..xm, y1..ym, value` for the requested slices.
    pub fn write_csv(&self, w: impl Write, slices: &[usize]) -> Result<()> {
        let m = self.m();
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        header.extend((1..=m).map(|i| format!("x{i}")));
        header.extend((1..=m).map(|i| format!("y{i}")));
        header.push("value".into());
        out.write_record(&header)?;
        let mut x = vec![0.0; m];
        let mut y = vec![0.0; m];
        for &s in slices {
            let t = self.times[s];
            for idx in 0..self.axes.len() {
                self.axes.node(idx, &mut x, &mut y);
                let mut row = vec![t.to_string()];
                row.extend(x.iter().map(|v| v.to_string()));
                row.extend(y.iter().map(|v| v.to_string()));
                row.push(self.slices[s][idx].to_string());
                out.write_record(&row)?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Contents of a binary grid file.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDump {
    pub p: f64,
    pub epsilon: f64,
    pub axes: GridAxes,
    pub times: Vec<f64>,
    pub slices: Vec<Vec<f64>>,
}

/// Reads the layout written by [`ValueGrid::write_binary`].
pub fn read_binary(mut r: impl Read) -> std::io::Result<GridDump> {
    let mut buf = [0u8; 8];
    let mut u = |r: &mut dyn Read| -> std::io::Result<u64> {
        r.read_exact(&mut buf)?;
        Ok(u64::from_le_bytes(buf))
    };
    let m = u(&mut r)? as usize;
    let p = f64::from_bits(u(&mut r)?);
    let epsilon = f64::from_bits(u(&mut r)?);
    let h_x = f64::from_bits(u(&mut r)?);
    let h_y = f64::from_bits(u(&mut r)?);
    let mut lo = Vec::new();
    let mut n = Vec::new();
    for _ in 0..2 * m {
        lo.push(f64::from_bits(u(&mut r)?));
        n.push(u(&mut r)? as usize);
    }
    let axes = GridAxes {
        m,
        x_lo: lo[..m].to_vec(),
        x_n: n[..m].to_vec(),
        h_x,
        y_lo: lo[m..].to_vec(),
        y_n: n[m..].to_vec(),
        h_y,
    };
    let n_slices = u(&mut r)? as usize;
    let mut times = Vec::with_capacity(n_slices);
    let mut slices = Vec::with_capacity(n_slices);
    for _ in 0..n_slices {
        times.push(f64::from_bits(u(&mut r)?));
        let mut s = Vec::with_capacity(axes.len());
        for _ in 0..axes.len() {
            s.push(f64::from_bits(u(&mut r)?));
        }
        slices.push(s);
    }
    Ok(GridDump {
        p,
        epsilon,
        axes,
        times,
        slices,
    })
}

/// Solves the DPP by one sweep from the bottom slice upward.
pub fn solve(config: &SolveConfig, datum: &BoundaryDatum) -> Result<ValueGrid> {
    let mut grid = ValueGrid::initialized(config, datum, 0.0)?;
    for s in 1..grid.times.len() {
        let next = grid.compute_slice(s, &grid.slices[s - 1])?;
        grid.slices[s] = next;
    }
    Ok(grid)
}

/// Jacobi iteration `v ↦ T v` applied `sweeps` times to a grid whose
/// interior starts at `init`: every slice is recomputed from the previous
/// iterate's slice below.
pub fn solve_by_sweeps(config: &SolveConfig, datum: &BoundaryDatum, init: f64, sweeps: usize) -> Result<ValueGrid> {
    let mut grid = ValueGrid::initialized(config, datum, init)?;
    for _ in 0..sweeps {
        let mut next = Vec::with_capacity(grid.slices.len());
        next.push(grid.slices[0].clone());
        for s in 1..grid.times.len() {
            next.push(grid.compute_slice(s, &grid.slices[s - 1])?);
        }
        grid.slices = next;
    }
    Ok(grid)
}

/// Largest change at an interior node when the operator is re-applied.
pub fn fixed_point_residual(grid: &ValueGrid) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in 1..grid.times.len() {
        let again = grid.compute_slice(s, &grid.slices[s - 1])?;
        for (idx, (a, b)) in again.iter().zip(&grid.slices[s]).enumerate() {
            if grid.node_is_interior(s, idx) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok(worst)
}

/// Whether `a ≥ b − 1e−12` at every node; otherwise the first witness.
pub fn compare(a: &ValueGrid, b: &ValueGrid) -> Result<Comparison> {
    if a.axes != b.axes || a.times != b.times {
        return Err(Error::GeometryMismatch);
    }
    for s in 0..a.times.len() {
        for (idx, (va, vb)) in a.slices[s].iter().zip(&b.slices[s]).enumerate() {
            if *va < vb - 1e-12 {
                let m = a.m();
                let (mut x, mut y) = (vec![0.0; m], vec![0.0; m]);
                a.axes.node(idx, &mut x, &mut y);
                return Ok(Comparison::Incomparable(Witness {
                    slice: s,
                    t: a.times[s],
                    x,
                    y,
                    a: *va,
                    b: *vb,
                }));
            }
        }
    }
    Ok(Comparison::Dominates)
}
