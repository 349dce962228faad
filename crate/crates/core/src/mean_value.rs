//! Asymptotic mean-value formulas and the `ε → 0` limit of their residuals.
//!
//! For a smooth `φ` with nonvanishing X-gradient every tug-of-war variant
//! satisfies `mv_value − φ = ε²·K_pφ/(2(m+p)) + o(ε²)` (`ε²K_∞φ/2` at
//! `p = ∞`); the space-time averages give `ε²Kφ/(2(m+2))` and
//! `ε²K₂φ/(2(m+2))`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::geometry::{dot, GroupPoint};
use crate::operators::{inf_laplacian_from_jet, kp_from_jet};
use crate::profile::SmoothProfile;
use crate::quadrature::{unit_interval_rule, y_ball_rule, BallQuadrature, BallRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeanValueVariant {
    /// Average over `B_{ε³}(Y) × (t−ε², t)` of `φ(X̃, Ỹ−(t̃−t)X, t̃)`.
    V1ShiftX,
    /// `φ(X̃, Y+ε²X/2, t−ε²/2)`.
    V2PointwiseX,
    /// Average over `B_{ε³}(Y) × (t−ε², t)` of `φ(X̃, Ỹ−(t̃−t)X̃, t̃)`.
    V3ShiftXTilde,
    /// `φ(X̃, Y+ε²X̃/2, t−ε²/2)`; the dynamic programming form.
    V4PointwiseXTilde,
    /// Plain average over `B_ε(X) × B_{ε³}(Y) × (t−ε²/(m+2), t)`.
    KSpaceTime,
    /// Plain average over `B_ε(X) × B_{ε³}(Y) × (t−ε², t)`.
    K2SpaceTime,
}

impl MeanValueVariant {
    pub const ALL: [Self; 6] = [
        Self::V1ShiftX,
        Self::V2PointwiseX,
        Self::V3ShiftXTilde,
        Self::V4PointwiseXTilde,
        Self::KSpaceTime,
        Self::K2SpaceTime,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Self::V1ShiftX => "V1",
            Self::V2PointwiseX => "V2",
            Self::V3ShiftXTilde => "V3",
            Self::V4PointwiseXTilde => "V4",
            Self::KSpaceTime => "K",
            Self::K2SpaceTime => "K2",
        }
    }

    pub fn is_tug(self) -> bool {
        !matches!(self, Self::KSpaceTime | Self::K2SpaceTime)
    }
}

impl fmt::Display for MeanValueVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for MeanValueVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.tag().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Invalid(format!("unknown mean-value variant {s:?}")))
    }
}

/// Quadrature settings for [`mv_value`].
#[derive(Debug, Clone, PartialEq)]
pub struct MvQuadrature {
    pub ball: BallQuadrature,
    /// Golden-section refinement of the sampled extremum.
    pub refine: bool,
}

impl Default for MvQuadrature {
    fn default() -> Self {
        Self {
            ball: BallQuadrature::default(),
            refine: true,
        }
    }
}

fn golden_max(f: &mut dyn FnMut(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..40 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

/// Max/min over the closed unit ball from samples plus a local refinement.
struct Extremizer {
    cands: BallRule,
    /// `(r, θ, angular half-width)` per candidate, two dimensions only.
    polar: Vec<(f64, f64, f64)>,
    radial_gap: f64,
}

impl Extremizer {
    fn new(quad: &BallQuadrature, m: usize) -> Result<Self> {
        let mut cands = quad.extremum_candidates(m)?;
        let mut polar = Vec::new();
        let mut radial_gap = 1.0;
        if m == 1 {
            let mut order: Vec<usize> = (0..cands.len()).collect();
            order.sort_by(|&a, &b| cands.points[a].total_cmp(&cands.points[b]));
            order.dedup_by(|a, b| cands.points[*a] == cands.points[*b]);
            cands = BallRule {
                m: 1,
                points: order.iter().map(|&i| cands.points[i]).collect(),
                weights: order.iter().map(|&i| cands.weights[i]).collect(),
            };
        } else if m == 2 {
            let mut radii: Vec<f64> = Vec::new();
            for i in 0..cands.len() {
                let v = cands.point(i);
                let r = v[0].hypot(v[1]);
                polar.push((r, v[1].atan2(v[0]), 0.0));
                radii.push(r);
            }
            radii.push(0.0);
            radii.sort_by(f64::total_cmp);
            radii.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            radial_gap = radii.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
            // angular spacing of each candidate's ring
            for i in 0..polar.len() {
                let r = polar[i].0;
                let count = polar.iter().filter(|q| (q.0 - r).abs() < 1e-12).count();
                polar[i].2 = 2.0 * std::f64::consts::PI / count.max(1) as f64;
            }
        }
        Ok(Self {
            cands,
            polar,
            radial_gap,
        })
    }

    /// Maximum of `sign·f` over the closed unit ball.
    fn max_of(&self, f: &mut dyn FnMut(&[f64]) -> f64, values: &[f64], sign: f64, refine: bool) -> f64 {
        let (best_i, best) = values
            .iter()
            .map(|v| sign * v)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        if !refine {
            return best;
        }
        let m = self.cands.m;
        match m {
            1 => {
                let n = self.cands.len();
                let lo = self.cands.points[best_i.saturating_sub(1)];
                let hi = self.cands.points[(best_i + 1).min(n - 1)];
                let mut g = |s: f64| sign * f(&[s]);
                best.max(golden_max(&mut g, lo, hi))
            }
            2 => {
                let (r, th, dth) = self.polar[best_i];
                let mut best_val = best;
                let mut best_th = th;
                if r > 0.0 {
                    let mut g = |a: f64| sign * f(&[r * a.cos(), r * a.sin()]);
                    // re-evaluate the argmax separately: golden_max only returns values
                    let v = golden_max(&mut g, th - dth, th + dth);
                    if v > best_val {
                        best_val = v;
                        best_th = locate_max(&mut g, th - dth, th + dth);
                    }
                }
                let (c, s) = (best_th.cos(), best_th.sin());
                let mut h = |rho: f64| sign * f(&[rho * c, rho * s]);
                let lo = (r - self.radial_gap).max(0.0);
                let hi = (r + self.radial_gap).min(1.0);
                best_val.max(golden_max(&mut h, lo, hi))
            }
            _ => best,
        }
    }

    fn extremes(&self, f: &mut dyn FnMut(&[f64]) -> f64, refine: bool) -> (f64, f64) {
        let values: Vec<f64> = (0..self.cands.len()).map(|i| f(self.cands.point(i))).collect();
        let mx = self.max_of(f, &values, 1.0, refine);
        let mn = -self.max_of(f, &values, -1.0, refine);
        (mx, mn)
    }
}

fn locate_max(f: &mut dyn FnMut(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    for _ in 0..40 {
        let c = b - INV_PHI * (b - a);
        let d = a + INV_PHI * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

struct MvRules {
    x: BallRule,
    ext: Extremizer,
    y: BallRule,
    t_nodes: Vec<f64>,
    t_weights: Vec<f64>,
}

impl MvRules {
    fn new(m: usize, quad: &MvQuadrature) -> Result<Self> {
        let (t_nodes, t_weights) = unit_interval_rule();
        Ok(Self {
            x: quad.ball.rule(m)?,
            ext: Extremizer::new(&quad.ball, m)?,
            y: y_ball_rule(m),
            t_nodes,
            t_weights,
        })
    }

    fn mean(&self, f: &mut dyn FnMut(&[f64]) -> f64) -> f64 {
        (0..self.x.len()).map(|i| self.x.weights[i] * f(self.x.point(i))).sum()
    }

    fn tug(&self, f: &mut dyn FnMut(&[f64]) -> f64, alpha: f64, beta: f64, refine: bool) -> f64 {
        let mean = self.mean(f);
        if alpha == 0.0 {
            return beta * mean;
        }
        let (mx, mn) = self.ext.extremes(f, refine);
        0.5 * alpha * (mx + mn) + beta * mean
    }
}

/// Evaluates the chosen mean-value formula for `φ` at `g`.
pub fn mv_value(
    phi: &dyn SmoothProfile,
    g: &GroupPoint,
    p: Exponent,
    eps: f64,
    variant: MeanValueVariant,
    quad: &MvQuadrature,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Invalid(format!("epsilon must be positive, got {eps}")));
    }
    let m = g.dim();
    let rules = MvRules::new(m, quad)?;
    let (alpha, beta) = (p.alpha(m), p.beta(m));
    let (x0, y0, t0) = (&g.x, &g.y, g.t);
    let e2 = eps * eps;
    let mut xt = vec![0.0; m];
    let mut yt = vec![0.0; m];
    use MeanValueVariant::*;
    let value = match variant {
        V2PointwiseX | V4PointwiseXTilde => {
            let tilde = variant == V4PointwiseXTilde;
            let mut inner = |v: &[f64]| {
                for i in 0..m {
                    xt[i] = x0[i] + eps * v[i];
                    let drift = if tilde { xt[i] } else { x0[i] };
                    yt[i] = y0[i] + 0.5 * e2 * drift;
                }
                phi.value(&xt, &yt, t0 - 0.5 * e2)
            };
            rules.tug(&mut inner, alpha, beta, quad.refine)
        }
        V1ShiftX | V3ShiftXTilde => {
            let tilde = variant == V3ShiftXTilde;
            let mut total = 0.0;
            for jy in 0..rules.y.len() {
                let u = rules.y.point(jy);
                for (s, wt) in rules.t_nodes.iter().zip(&rules.t_weights) {
                    let lag = e2 * s; // t − t̃
                    let mut inner = |v: &[f64]| {
                        for i in 0..m {
                            xt[i] = x0[i] + eps * v[i];
                            let drift = if tilde { xt[i] } else { x0[i] };
                            yt[i] = y0[i] + e2 * eps * u[i] + lag * drift;
                        }
                        phi.value(&xt, &yt, t0 - lag)
                    };
                    total += rules.y.weights[jy] * wt * rules.tug(&mut inner, alpha, beta, quad.refine);
                }
            }
            total
        }
        KSpaceTime | K2SpaceTime => {
            let window = if variant == KSpaceTime {
                e2 / (m as f64 + 2.0)
            } else {
                e2
            };
            let mut total = 0.0;
            for jy in 0..rules.y.len() {
                let u = rules.y.point(jy);
                for (s, wt) in rules.t_nodes.iter().zip(&rules.t_weights) {
                    let lag = window * s;
                    let mut inner = |v: &[f64]| {
                        for i in 0..m {
                            xt[i] = x0[i] + eps * v[i];
                            yt[i] = y0[i] + e2 * eps * u[i] + lag * x0[i];
                        }
                        phi.value(&xt, &yt, t0 - lag)
                    };
                    total += rules.y.weights[jy] * wt * rules.mean(&mut inner);
                }
            }
            total
        }
    };
    Ok(value)
}

/// `mv_value − φ(g)`.
pub fn mv_residual(
    phi: &dyn SmoothProfile,
    g: &GroupPoint,
    p: Exponent,
    eps: f64,
    variant: MeanValueVariant,
    quad: &MvQuadrature,
) -> Result<f64> {
    Ok(mv_value(phi, g, p, eps, variant, quad)? - phi.value_at(g))
}

/// Per-ladder data behind a limit estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitEstimate {
    pub limit: f64,
    pub epsilons: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `residual / ε²` at each ladder entry.
    pub ratios: Vec<f64>,
    /// Observed order of convergence of the ratios, when measurable.
    pub observed_order: Option<f64>,
}

/// Polynomial extrapolation to `ε = 0` (a Richardson table whose first
/// column removes the `O(ε)` term).
pub fn richardson_to_zero(eps: &[f64], vals: &[f64]) -> f64 {
    let mut p = vals.to_vec();
    let n = p.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (eps[i] * p[i + 1] - eps[i + k] * p[i]) / (eps[i] - eps[i + k]);
        }
    }
    p[0]
}

/// Estimates `lim residual/ε²` from a halving ladder.
pub fn mv_limit_estimate(
    phi: &dyn SmoothProfile,
    g: &GroupPoint,
    p: Exponent,
    variant: MeanValueVariant,
    ladder: &[f64],
    quad: &MvQuadrature,
) -> Result<LimitEstimate> {
    if ladder.len() < 3 {
        return Err(Error::InvalidLadder(format!("need >= 3 entries, got {}", ladder.len())));
    }
    for w in ladder.windows(2) {
        if !(w[1] > 0.0 && w[1] <= 0.5 * w[0] * (1.0 + 1e-12)) {
            return Err(Error::InvalidLadder(format!("{} does not halve {}", w[1], w[0])));
        }
    }
    let residuals = ladder
        .iter()
        .map(|&e| mv_residual(phi, g, p, e, variant, quad))
        .collect::<Result<Vec<_>>>()?;
    let tol = 1e-10 * (1.0 + phi.value_at(g).abs());
    for (i, w) in residuals.windows(2).enumerate() {
        if w[1].abs() > w[0].abs() + tol {
            return Err(Error::NonMonotoneResiduals(format!(
                "|r({})| = {:e} exceeds |r({})| = {:e}",
                ladder[i + 1],
                w[1].abs(),
                ladder[i],
                w[0].abs()
            )));
        }
    }
    let ratios: Vec<f64> = residuals.iter().zip(ladder).map(|(r, e)| r / (e * e)).collect();
    let n = ratios.len();
    let (d1, d2) = (ratios[n - 3] - ratios[n - 2], ratios[n - 2] - ratios[n - 1]);
    let scale = ratios.iter().fold(0.0f64, |a, r| a.max(r.abs())).max(1e-300);
    let observed_order = if d1.abs() > 1e-9 * scale && d2.abs() > 1e-9 * scale && d1 * d2 > 0.0 {
        Some((d1 / d2).ln() / (ladder[n - 3] / ladder[n - 2]).ln())
    } else {
        None
    };
    Ok(LimitEstimate {
        limit: richardson_to_zero(ladder, &ratios),
        epsilons: ladder.to_vec(),
        residuals,
        ratios,
        observed_order,
    })
}

/// The predicted limit of `residual/ε²` from derivatives of `φ`.
pub fn expected_limit(phi: &dyn SmoothProfile, g: &GroupPoint, p: Exponent, variant: MeanValueVariant) -> Result<f64> {
    let jet = phi.jet(g);
    let m = g.dim() as f64;
    let two = Exponent::Finite(2.0);
    match variant {
        MeanValueVariant::KSpaceTime => {
            Ok((jet.laplacian_x() + dot(&g.x, &jet.grad_y) - jet.dt) / (2.0 * (m + 2.0)))
        }
        MeanValueVariant::K2SpaceTime => Ok(kp_from_jet(&jet, &g.x, two)? / (2.0 * (m + 2.0))),
        _ => match p {
            Exponent::Finite(q) => Ok(kp_from_jet(&jet, &g.x, p)? / (2.0 * (m + q))),
            Exponent::Infinity => Ok(kp_from_jet(&jet, &g.x, p)? / 2.0),
        },
    }
}

/// Size of the individual terms in [`expected_limit`], used to judge how
/// close to zero an estimate for an exact solution has to be.
pub fn reference_scale(phi: &dyn SmoothProfile, g: &GroupPoint, p: Exponent, variant: MeanValueVariant) -> f64 {
    let jet = phi.jet(g);
    let m = g.dim() as f64;
    let lap = jet.laplacian_x().abs();
    let transport = dot(&g.x, &jet.grad_y).abs() + jet.dt.abs();
    let dinf = || inf_laplacian_from_jet(&jet).map(f64::abs).unwrap_or(jet.hess_norm());
    match variant {
        MeanValueVariant::KSpaceTime => (lap + transport) / (2.0 * (m + 2.0)),
        MeanValueVariant::K2SpaceTime => (lap + (m + 2.0) * transport) / (2.0 * (m + 2.0)),
        _ => match p {
            Exponent::Finite(q) => ((q - 2.0).abs() * dinf() + lap + (m + q) * transport) / (2.0 * (m + q)),
            Exponent::Infinity => (dinf() + transport) / 2.0,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{Affine, Constant, Paraboloid, YPlusTx};

    #[test]
    fn constant_is_fixed() {
        let q = MvQuadrature::default();
        let g = GroupPoint::scalar(0.2, 0.1, 0.3);
        for v in MeanValueVariant::ALL {
            let r = mv_value(&Constant { m: 1, c: 2.5 }, &g, Exponent::Finite(3.0), 0.1, v, &q).unwrap();
            assert!((r - 2.5).abs() < 1e-14, "{v}: {r}");
        }
    }

    #[test]
    fn affine_and_y_plus_tx_v4() {
        let q = MvQuadrature::default();
        let g = GroupPoint::scalar(0.3, -0.2, 0.4);
        let a = Affine { a: vec![2.0], b: 0.5 };
        let v = mv_value(&a, &g, Exponent::Finite(5.0), 0.2, MeanValueVariant::V4PointwiseXTilde, &q).unwrap();
        assert!((v - 1.1).abs() < 1e-14);
        let y = YPlusTx { e: vec![1.0] };
        let v = mv_value(&y, &g, Exponent::Finite(5.0), 0.2, MeanValueVariant::V4PointwiseXTilde, &q).unwrap();
        assert!((v - (-0.2 + 0.4 * 0.3)).abs() < 1e-14);
    }

    #[test]
    fn x_squared_p2_at_eps_01() {
        // one-dimensional ball average of x̃² is x² + ε²/3
        let q = MvQuadrature::default();
        let g = GroupPoint::scalar(0.5, 0.0, 0.2);
        let x2 = Paraboloid { m: 1, c: 0.0 };
        let r = mv_residual(&x2, &g, Exponent::Finite(2.0), 0.1, MeanValueVariant::V4PointwiseXTilde, &q).unwrap();
        assert!((r - 0.01 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn neville_is_exact_on_quadratics() {
        let e = [0.4, 0.2, 0.1];
        let v: Vec<f64> = e.iter().map(|x| 1.0 + 3.0 * x - 2.0 * x * x).collect();
        assert!((richardson_to_zero(&e, &v) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn ladder_validation() {
        let q = MvQuadrature::default();
        let g = GroupPoint::scalar(0.5, 0.0, 0.2);
        let x2 = Paraboloid { m: 1, c: 0.0 };
        let p = Exponent::Finite(2.0);
        let v = MeanValueVariant::V4PointwiseXTilde;
        assert!(mv_limit_estimate(&x2, &g, p, v, &[0.2, 0.1], &q).is_err());
        assert!(mv_limit_estimate(&x2, &g, p, v, &[0.2, 0.15, 0.05], &q).is_err());
    }
}
