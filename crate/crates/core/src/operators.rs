//! Pointwise evaluation of `Δ∞ᴺ`, `K`, `K_p`, `K_∞`, viscosity inequalities
//! at a test point, and the catalog of exact solutions.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::geometry::{dot, norm, GroupPoint};
use crate::profile::{Affine, Constant, Jet, Paraboloid, SmoothProfile, YPlusTx};

/// Below this X-gradient norm the normalized infinity Laplacian is undefined.
pub fn gradient_floor(jet: &Jet) -> f64 {
    1e-10 * (1.0 + jet.hess_norm())
}

fn is_degenerate(jet: &Jet) -> bool {
    norm(&jet.grad_x) <= gradient_floor(jet)
}

/// `⟨H v̂, v̂⟩` with `v̂ = ∇_Xφ/|∇_Xφ|`.
pub fn inf_laplacian_from_jet(jet: &Jet) -> Result<f64> {
    let g = norm(&jet.grad_x);
    let floor = gradient_floor(jet);
    if g <= floor {
        return Err(Error::DegenerateGradient { norm: g, floor });
    }
    let m = jet.dim();
    let v: Vec<f64> = jet.grad_x.iter().map(|c| c / g).collect();
    let mut s = 0.0;
    for i in 0..m {
        for j in 0..m {
            s += jet.hess_x[i * m + j] * v[i] * v[j];
        }
    }
    Ok(s)
}

pub fn inf_laplacian_normalized(phi: &dyn SmoothProfile, g: &GroupPoint) -> Result<f64> {
    inf_laplacian_from_jet(&phi.jet(g))
}

/// Transport part `X·∇_Yφ − ∂_tφ`.
fn drift(jet: &Jet, x: &[f64]) -> f64 {
    dot(x, &jet.grad_y) - jet.dt
}

/// `Kφ = Δ_Xφ + X·∇_Yφ − ∂_tφ`.
pub fn apply_k(phi: &dyn SmoothProfile, g: &GroupPoint) -> f64 {
    let j = phi.jet(g);
    j.laplacian_x() + drift(&j, &g.x)
}

/// `Δ∞ᴺ` inside `K_p`: with a vanishing X-Hessian every direction gives 0,
/// so a zero gradient is harmless there.
fn inf_term(jet: &Jet) -> Result<f64> {
    if jet.hess_x.iter().all(|h| *h == 0.0) {
        return Ok(0.0);
    }
    inf_laplacian_from_jet(jet)
}

/// `K_pφ` from precomputed derivatives at the point with velocity `x`.
pub fn kp_from_jet(jet: &Jet, x: &[f64], p: Exponent) -> Result<f64> {
    let m = jet.dim() as f64;
    match p {
        Exponent::Finite(p) if p == 2.0 => Ok(jet.laplacian_x() + (m + 2.0) * drift(jet, x)),
        Exponent::Finite(p) => {
            let dinf = inf_term(jet)?;
            Ok((p - 2.0) * dinf + jet.laplacian_x() + (m + p) * drift(jet, x))
        }
        Exponent::Infinity => Ok(inf_term(jet)? + drift(jet, x)),
    }
}

/// `K_pφ = ((p−2)Δ∞ᴺ + Δ_X)φ + (m+p)(X·∇_Yφ − ∂_tφ)`, and
/// `K_∞φ = Δ∞ᴺφ + X·∇_Yφ − ∂_tφ`.
pub fn apply_kp(phi: &dyn SmoothProfile, g: &GroupPoint, p: Exponent) -> Result<f64> {
    kp_from_jet(&phi.jet(g), &g.x, p)
}

/// Which viscosity inequality to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Super,
    Sub,
}

/// Outcome of [`viscosity_check`]; the margin is nonnegative when satisfied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Satisfied(f64),
    Violated(f64),
}

impl Verdict {
    pub fn margin(self) -> f64 {
        match self {
            Self::Satisfied(m) | Self::Violated(m) => m,
        }
    }

    pub fn is_satisfied(self) -> bool {
        matches!(self, Self::Satisfied(_))
    }
}

/// Smallest and largest eigenvalue of a symmetric row-major matrix.
pub fn eigen_extremes(m: usize, a: &[f64]) -> (f64, f64) {
    if m == 1 {
        return (a[0], a[0]);
    }
    let mat = DMatrix::from_row_slice(m, m, a);
    let ev = mat.symmetric_eigenvalues();
    let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Absolute slack under which a negative margin still counts as satisfied.
pub const VISCOSITY_TOL: f64 = 1e-9;

/// Evaluates the pointwise viscosity inequality for `φ` at `g`.
///
/// With a nonzero X-gradient the supersolution test is
/// `(m+p)(∂_tφ − X·∇_Yφ) ≥ ((p−2)Δ∞ᴺ + Δ_X)φ`; at a vanishing gradient the
/// elliptic side becomes `λ((p−2)∇²φ) + Δφ` (super) or `Λ(...) + Δφ` (sub).
/// For `p = ∞` the factor `m+p` is dropped and `(p−2)∇²φ` becomes `∇²φ`
/// without the extra Laplacian.
pub fn viscosity_check(phi: &dyn SmoothProfile, g: &GroupPoint, p: Exponent, side: Side) -> Verdict {
    let jet = phi.jet(g);
    let m = jet.dim();
    let transport = jet.dt - dot(&g.x, &jet.grad_y);
    let (lhs, rhs) = match p {
        Exponent::Finite(p) => {
            let lhs = (m as f64 + p) * transport;
            let rhs = if !is_degenerate(&jet) {
                (p - 2.0) * inf_laplacian_from_jet(&jet).expect("nondegenerate") + jet.laplacian_x()
            } else {
                let scaled: Vec<f64> = jet.hess_x.iter().map(|v| (p - 2.0) * v).collect();
                let (lo, hi) = eigen_extremes(m, &scaled);
                jet.laplacian_x() + if side == Side::Super { lo } else { hi }
            };
            (lhs, rhs)
        }
        Exponent::Infinity => {
            let rhs = if !is_degenerate(&jet) {
                inf_laplacian_from_jet(&jet).expect("nondegenerate")
            } else {
                let (lo, hi) = eigen_extremes(m, &jet.hess_x);
                if side == Side::Super {
                    lo
                } else {
                    hi
                }
            };
            (transport, rhs)
        }
    };
    let margin = match side {
        Side::Super => lhs - rhs,
        Side::Sub => rhs - lhs,
    };
    if margin >= -VISCOSITY_TOL {
        Verdict::Satisfied(margin)
    } else {
        Verdict::Violated(margin)
    }
}

/// Exponents for which a catalog entry solves the equation.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidP {
    All,
    Only(Exponent),
}

impl ValidP {
    pub fn contains(&self, p: Exponent) -> bool {
        match self {
            Self::All => true,
            Self::Only(q) => *q == p,
        }
    }
}

/// A closed-form solution used as an oracle.
#[derive(Clone)]
pub struct ExactSolution {
    pub name: String,
    pub profile: Arc<dyn SmoothProfile>,
    pub valid_p: ValidP,
    /// Points where the classical equation is not evaluated (e.g. `X = 0`).
    pub excluded: Option<fn(&GroupPoint) -> bool>,
    pub description: String,
}

impl std::fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExactSolution")
            .field("name", &self.name)
            .field("valid_p", &self.valid_p)
            .finish()
    }
}

impl ExactSolution {
    pub fn is_excluded(&self, g: &GroupPoint) -> bool {
        self.excluded.is_some_and(|f| f(g))
    }
}

fn near_x_origin(g: &GroupPoint) -> bool {
    norm(&g.x) < 1e-3
}

/// `|X|² + 2(m+p−2)/(m+p)·t`, a classical solution away from `X = 0`.
pub fn quadratic_p(m: usize, p: Exponent) -> ExactSolution {
    let c = p.quadratic_time_coefficient(m);
    ExactSolution {
        name: format!("quadratic_p(p={p},m={m})"),
        profile: Arc::new(Paraboloid { m, c }),
        valid_p: ValidP::Only(p),
        excluded: Some(near_x_origin),
        description: format!("|X|^2 + {c}*t"),
    }
}

/// Exact solutions in dimension `m`.
pub fn catalog(m: usize) -> Vec<ExactSolution> {
    let mut e1 = vec![0.0; m];
    e1[0] = 1.0;
    let mut out = vec![
        ExactSolution {
            name: "const".into(),
            profile: Arc::new(Constant { m, c: 1.5 }),
            valid_p: ValidP::All,
            excluded: None,
            description: "1.5".into(),
        },
        ExactSolution {
            name: "affine".into(),
            profile: Arc::new(Affine {
                a: (0..m).map(|i| 1.0 - 0.5 * i as f64).collect(),
                b: 0.3,
            }),
            valid_p: ValidP::All,
            excluded: None,
            description: "a.X + 0.3".into(),
        },
        ExactSolution {
            name: "y_plus_tx".into(),
            profile: Arc::new(YPlusTx { e: e1 }),
            valid_p: ValidP::All,
            excluded: Some(|g: &GroupPoint| g.t.abs() < 1e-6),
            description: "Y.e1 + t X.e1".into(),
        },
    ];
    if m >= 2 {
        let mut e = vec![0.0; m];
        e[0] = 0.6;
        e[1] = 0.8;
        out.push(ExactSolution {
            name: "y_plus_tx(oblique)".into(),
            profile: Arc::new(YPlusTx { e }),
            valid_p: ValidP::All,
            excluded: Some(|g: &GroupPoint| g.t.abs() < 1e-6),
            description: "Y.e + t X.e with e = (0.6, 0.8, 0, ...)".into(),
        });
    }
    for p in [2.0, 3.0, 4.0, 10.0] {
        out.push(quadratic_p(m, Exponent::Finite(p)));
    }
    out.push(quadratic_p(m, Exponent::Infinity));
    out
}
