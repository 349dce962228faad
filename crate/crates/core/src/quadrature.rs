//! Point sets on the unit ball: Gauss rules, polar tensor grids, and the
//! shared stencil used by both the solver and the greedy strategies.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            dp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Weighted points in the unit ball of ℝ^m; weights sum to one.
#[derive(Debug, Clone)]
pub struct BallRule {
    pub m: usize,
    /// Flat `n × m` coordinates.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl BallRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.m..(i + 1) * self.m]
    }

    fn normalized(mut self) -> Self {
        let s: f64 = self.weights.iter().sum();
        for w in &mut self.weights {
            *w /= s;
        }
        self
    }
}

/// Polar grid: Gauss in radius (weight `r`), midpoint angles.
fn polar_rule(n_radial: usize, n_angular: usize) -> BallRule {
    let (xi, wi) = gauss_legendre(n_radial);
    let mut points = Vec::with_capacity(2 * n_radial * n_angular);
    let mut weights = Vec::with_capacity(n_radial * n_angular);
    for (x, w) in xi.iter().zip(&wi) {
        let r = 0.5 * (1.0 + x);
        for j in 0..n_angular {
            let th = 2.0 * PI * (j as f64 + 0.5) / n_angular as f64;
            points.push(r * th.cos());
            points.push(r * th.sin());
            weights.push(0.5 * w * r);
        }
    }
    BallRule {
        m: 2,
        points,
        weights,
    }
    .normalized()
}

fn interval_rule(n: usize) -> BallRule {
    let (points, weights) = gauss_legendre(n);
    BallRule {
        m: 1,
        points,
        weights,
    }
    .normalized()
}

/// Low-discrepancy points in the unit ball, closed under `v ↦ −v`.
fn quasi_random_rule(m: usize, n_points: usize, seed: u64) -> BallRule {
    // generalized golden-ratio sequence; phi_m solves x^(m+1) = x + 1
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (m as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=m).map(|j| phi.powi(-(j as i32))).collect();
    let offset = (seed as f64 * 0.618_033_988_749_894_9).fract();
    let half = n_points.div_ceil(2);
    let mut points = Vec::with_capacity(2 * half * m);
    let mut k = 0u64;
    let mut kept = 0;
    while kept < half {
        k += 1;
        let v: Vec<f64> = alpha
            .iter()
            .map(|a| 2.0 * (offset + a * k as f64).fract() - 1.0)
            .collect();
        if v.iter().map(|c| c * c).sum::<f64>() < 1.0 {
            points.extend_from_slice(&v);
            points.extend(v.iter().map(|c| -c));
            kept += 1;
        }
    }
    let n = points.len() / m;
    BallRule {
        m,
        points,
        weights: vec![1.0 / n as f64; n],
    }
}

/// How the X-ball is integrated in the mean-value formulas.
#[derive(Debug, Clone, PartialEq)]
pub enum BallQuadrature {
    Tensor { n_radial: usize, n_angular: usize },
    QuasiRandom { n_points: usize, seed: u64 },
}

impl Default for BallQuadrature {
    fn default() -> Self {
        Self::Tensor {
            n_radial: 16,
            n_angular: 32,
        }
    }
}

impl BallQuadrature {
    /// The averaging rule. In one dimension the tensor rule is a
    /// `2·n_radial`-point Gauss rule on `[−1, 1]`.
    pub fn rule(&self, m: usize) -> Result<BallRule> {
        let rule = match *self {
            Self::Tensor { n_radial, n_angular } => match m {
                1 => interval_rule(2 * n_radial),
                2 => polar_rule(n_radial, n_angular),
                _ => {
                    return Err(Error::Invalid(format!(
                        "tensor ball quadrature supports m <= 2, got {m}"
                    )))
                }
            },
            Self::QuasiRandom { n_points, seed } => quasi_random_rule(m, n_points, seed),
        };
        if rule.len() < 8 {
            return Err(Error::QuadratureTooCoarse { points: rule.len() });
        }
        Ok(rule)
    }

    /// Candidate points for max/min over the closed ball: the averaging
    /// nodes plus boundary points and the center.
    pub fn extremum_candidates(&self, m: usize) -> Result<BallRule> {
        let mut rule = self.rule(m)?;
        let ring = match *self {
            Self::Tensor { n_angular, .. } => n_angular,
            Self::QuasiRandom { n_points, .. } => n_points.max(8),
        };
        append_sphere(&mut rule, ring);
        rule.points.extend(std::iter::repeat_n(0.0, m));
        rule.weights.push(0.0);
        Ok(rule)
    }
}

/// Adds `n` points on the unit sphere with zero weight.
fn append_sphere(rule: &mut BallRule, n: usize) {
    let m = rule.m;
    match m {
        1 => {
            rule.points.extend([-1.0, 1.0]);
            rule.weights.extend([0.0, 0.0]);
        }
        2 => {
            for j in 0..n {
                let th = 2.0 * PI * (j as f64 + 0.5) / n as f64;
                rule.points.extend([th.cos(), th.sin()]);
                rule.weights.push(0.0);
            }
        }
        _ => {
            let dirs = quasi_random_rule(m, n, 7);
            for i in 0..dirs.len() {
                let v = dirs.point(i);
                let r = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                rule.points.extend(v.iter().map(|c| c / r));
                rule.weights.push(0.0);
            }
        }
    }
}

/// Rule for the `Y`-ball: 8 Gauss points per axis (polar in two dimensions).
pub fn y_ball_rule(m: usize) -> BallRule {
    match m {
        1 => interval_rule(8),
        2 => polar_rule(8, 8),
        _ => quasi_random_rule(m, 64, 3),
    }
}

/// 8-point Gauss rule on `[0, 1]`.
pub fn unit_interval_rule() -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(8);
    (
        x.iter().map(|v| 0.5 * (1.0 + v)).collect(),
        w.iter().map(|v| 0.5 * v).collect(),
    )
}

/// Fixed ball stencil shared by the solver and the greedy strategies.
///
/// Points with zero weight lie on the unit sphere and only take part in
/// the max/min. Every point has its antipode in the set.
#[derive(Debug, Clone)]
pub struct BallStencil {
    pub rule: BallRule,
}

impl BallStencil {
    /// Default sizes: 64 points for `m = 1`, 256 for `m = 2`.
    pub fn default_size(m: usize) -> usize {
        match m {
            1 => 64,
            2 => 256,
            _ => 512,
        }
    }

    /// `m = 1`: `n−2` Gauss nodes plus both endpoints. `m = 2`: `n/8`
    /// boundary points and an 8-ring polar grid for the rest.
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::QuadratureTooCoarse { points: n });
        }
        let rule = match m {
            1 => {
                let mut r = interval_rule(n - 2 - n % 2);
                append_sphere(&mut r, 2);
                r
            }
            2 => {
                let ring = (n / 8).max(4) & !1;
                let n_ang = ((n - ring) / 8).max(2) & !1;
                let mut r = polar_rule(8, n_ang);
                append_sphere(&mut r, ring);
                r
            }
            _ => {
                let mut r = quasi_random_rule(m, n - n / 4, 11);
                append_sphere(&mut r, n / 4);
                r
            }
        };
        Ok(Self { rule })
    }

    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.is_empty()
    }

    pub fn m(&self) -> usize {
        self.rule.m
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.rule.point(i)
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.rule.weights[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        // ∫ x^14 over [-1,1] = 2/15
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        let (x5, w5) = gauss_legendre(5);
        assert_eq!(x5[2], 0.0);
        assert!((w5.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn polar_second_moment() {
        // mean of |v|^2 over the unit disc is 1/2
        let r = polar_rule(16, 32);
        let s: f64 = (0..r.len())
            .map(|i| r.weights[i] * r.point(i).iter().map(|c| c * c).sum::<f64>())
            .sum();
        assert!((s - 0.5).abs() < 1e-13);
    }

    #[test]
    fn stencil_sizes() {
        assert_eq!(BallStencil::new(1, 64).unwrap().len(), 64);
        assert_eq!(BallStencil::new(2, 256).unwrap().len(), 256);
        assert!(BallStencil::new(1, 4).is_err());
    }

    #[test]
    fn quasi_random_symmetric() {
        let r = quasi_random_rule(3, 100, 1);
        let s: Vec<f64> = (0..3)
            .map(|d| (0..r.len()).map(|i| r.weights[i] * r.point(i)[d]).sum())
            .collect();
        assert!(s.iter().all(|v| v.abs() < 1e-15));
    }
}
