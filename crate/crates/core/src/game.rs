//! Tug-of-war with noise on the Kolmogorov clock.
//!
//! Each round a biased coin chooses: with probability `α/2` player I
//! moves `X`, with probability `α/2` player II does, and with probability
//! `β` the new `X` is uniform in `B_ε(X)`. Then `Y ← Y + ε²X_new/2` and the
//! clock steps back by `ε²/2`. The game stops when `X` enters the collar
//! `Γ_X^ε` or after `N(t₀)` rounds, paying `F(X_τ, Y_τ, t_τ)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{BoundaryDatum, ParabolicCollar, SpatialDomain};
use crate::dpp::{time_ladder, ValueGrid};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::geometry::{norm, GroupPoint};
use crate::stats::mean_se;

#[derive(Debug, Clone)]
pub struct GameConfig {
    pub domain: SpatialDomain,
    pub horizon: f64,
    pub p: Exponent,
    pub epsilon: f64,
    pub payoff: BoundaryDatum,
    pub seed: u64,
    pub episodes: usize,
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.p.is_at_least_two() {
            return Err(Error::config("p", "the game needs p >= 2"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("epsilon", "must be positive"));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::config("horizon", "must be positive"));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.p.alpha(self.domain.dim())
    }

    pub fn beta(&self) -> f64 {
        self.p.beta(self.domain.dim())
    }

    pub fn collar(&self) -> ParabolicCollar {
        ParabolicCollar {
            domain: self.domain.clone(),
            epsilon: self.epsilon,
            horizon: self.horizon,
        }
    }
}

/// What a strategy sees before choosing.
#[derive(Debug, Clone, Copy)]
pub struct Turn<'a> {
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub k: usize,
    /// Clock time `t_k` of the current position.
    pub t: f64,
    pub eps: f64,
}

pub trait Strategy: Send + Sync {
    /// Target for the next `X`; the engine projects it onto `B̄_ε(X)`.
    fn choose(&self, turn: &Turn) -> Result<Vec<f64>>;
    fn descriptor(&self) -> String;
}

/// Outcome of the coin toss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Coin {
    PlayerI,
    PlayerII,
    Noise,
}

impl Coin {
    pub fn label(self) -> &'static str {
        match self {
            Self::PlayerI => "I",
            Self::PlayerII => "II",
            Self::Noise => "noise",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameState {
    pub k: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t0: f64,
    pub n_rounds: usize,
    pub done: bool,
}

impl GameState {
    pub fn t(&self, eps: f64) -> f64 {
        clock(self.t0, self.k, self.n_rounds, eps)
    }
}

/// `t_k = t₀ − k·ε²/2`, with the last rung taken from the ladder.
fn clock(t0: f64, k: usize, n: usize, eps: f64) -> f64 {
    let t = t0 - k as f64 * 0.5 * eps * eps;
    if k == n && t.abs() < 1e-12 * (1.0 + t0.abs()) {
        0.0
    } else {
        t
    }
}

/// Final position and payoff of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub tau: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
    pub payoff: f64,
}

/// One row of a trajectory log.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub k: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
    pub coin: Option<Coin>,
}

/// Independent random stream for episode `i` of a run seeded with `seed`.
pub fn episode_rng(seed: u64, episode: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(episode);
    rng
}

/// Uniform point in the open ball `B_r(0)` ⊂ ℝ^m by the polar method.
pub fn uniform_ball<R: Rng>(rng: &mut R, m: usize, r: f64) -> Vec<f64> {
    if m == 1 {
        return vec![r * (2.0 * rng.random::<f64>() - 1.0)];
    }
    loop {
        let dir: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = norm(&dir);
        if n > 0.0 {
            let rho = r * rng.random::<f64>().powf(1.0 / m as f64);
            return dir.iter().map(|c| rho * c / n).collect();
        }
    }
}

/// Uniform point in `B_r(0)` by rejection from the cube.
pub fn uniform_ball_rejection<R: Rng>(rng: &mut R, m: usize, r: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        if norm(&v) < 1.0 {
            return v.iter().map(|c| r * c).collect();
        }
    }
}

/// Monte Carlo estimate with the distribution of stopping rounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
    /// `tau_histogram[k]` episodes stopped after `k` rounds.
    pub tau_histogram: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct Game {
    pub config: GameConfig,
    collar: ParabolicCollar,
    alpha: f64,
    beta: f64,
}

impl Game {
    pub fn new(config: GameConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            collar: config.collar(),
            alpha: config.alpha(),
            beta: config.beta(),
            config,
        })
    }

    pub fn m(&self) -> usize {
        self.config.domain.dim()
    }

    pub fn eps(&self) -> f64 {
        self.config.epsilon
    }

    pub fn start(&self, start: &GroupPoint) -> Result<GameState> {
        if start.dim() != self.m() {
            return Err(Error::DimensionMismatch {
                left: self.m(),
                right: start.dim(),
            });
        }
        let (n, _) = time_ladder(start.t, self.eps())?;
        if start.t > self.config.horizon {
            return Err(Error::TimeOutOfRange {
                t: start.t,
                lo: 0.0,
                hi: self.config.horizon,
            });
        }
        let s = self.config.domain.signed_distance(&start.x);
        if s > self.eps() {
            return Err(Error::Invalid(format!("start X={:?} is outside U_X^eps", start.x)));
        }
        Ok(GameState {
            k: 0,
            x: start.x.clone(),
            y: start.y.clone(),
            t0: start.t,
            n_rounds: n,
            done: n == 0 || self.collar.in_x_collar(&start.x),
        })
    }

    pub fn draw_coin<R: Rng>(&self, rng: &mut R) -> Coin {
        let u: f64 = rng.random();
        if u < 0.5 * self.alpha {
            Coin::PlayerI
        } else if u < self.alpha {
            Coin::PlayerII
        } else {
            Coin::Noise
        }
    }

    fn project(&self, x: &[f64], target: Vec<f64>) -> Vec<f64> {
        let d: Vec<f64> = target.iter().zip(x).map(|(a, b)| a - b).collect();
        let n = norm(&d);
        let eps = self.eps();
        if n <= eps {
            target
        } else {
            x.iter().zip(&d).map(|(b, v)| b + eps * v / n).collect()
        }
    }

    /// Advances one round with a given coin outcome.
    pub fn step_with_coin<R: Rng>(
        &self,
        state: &GameState,
        coin: Coin,
        s1: &dyn Strategy,
        s2: &dyn Strategy,
        rng: &mut R,
    ) -> Result<GameState> {
        if state.done {
            return Err(Error::TerminalStep);
        }
        let eps = self.eps();
        let turn = Turn {
            x: &state.x,
            y: &state.y,
            k: state.k,
            t: state.t(eps),
            eps,
        };
        let x_new = match coin {
            Coin::PlayerI => self.project(&state.x, s1.choose(&turn)?),
            Coin::PlayerII => self.project(&state.x, s2.choose(&turn)?),
            Coin::Noise => {
                let v = uniform_ball(rng, self.m(), eps);
                state.x.iter().zip(&v).map(|(a, b)| a + b).collect()
            }
        };
        let half_e2 = 0.5 * eps * eps;
        let y_new = state.y.iter().zip(&x_new).map(|(y, x)| y + half_e2 * x).collect();
        let k = state.k + 1;
        let done = k == state.n_rounds || self.collar.in_x_collar(&x_new);
        Ok(GameState {
            k,
            x: x_new,
            y: y_new,
            t0: state.t0,
            n_rounds: state.n_rounds,
            done,
        })
    }

    /// Tosses the coin and advances one round.
    pub fn step<R: Rng>(
        &self,
        state: &GameState,
        s1: &dyn Strategy,
        s2: &dyn Strategy,
        rng: &mut R,
    ) -> Result<(GameState, Coin)> {
        if state.done {
            return Err(Error::TerminalStep);
        }
        let coin = self.draw_coin(rng);
        Ok((self.step_with_coin(state, coin, s1, s2, rng)?, coin))
    }

    /// Plays until termination, optionally recording every position.
    pub fn run_episode<R: Rng>(
        &self,
        start: &GroupPoint,
        s1: &dyn Strategy,
        s2: &dyn Strategy,
        rng: &mut R,
        mut log: Option<&mut Vec<LogRow>>,
    ) -> Result<Outcome> {
        let eps = self.eps();
        let mut state = self.start(start)?;
        if let Some(l) = log.as_deref_mut() {
            l.push(LogRow {
                k: 0,
                x: state.x.clone(),
                y: state.y.clone(),
                t: state.t(eps),
                coin: None,
            });
        }
        while !state.done {
            let (next, coin) = self.step(&state, s1, s2, rng)?;
            state = next;
            if let Some(l) = log.as_deref_mut() {
                l.push(LogRow {
                    k: state.k,
                    x: state.x.clone(),
                    y: state.y.clone(),
                    t: state.t(eps),
                    coin: Some(coin),
                });
            }
        }
        let t = state.t(eps);
        Ok(Outcome {
            tau: state.k,
            payoff: self.config.payoff.eval(&state.x, &state.y, t),
            x: state.x,
            y: state.y,
            t,
        })
    }

    /// Runs all episodes in parallel; results are in episode order.
    pub fn run_many(&self, start: &GroupPoint, s1: &dyn Strategy, s2: &dyn Strategy) -> Result<Vec<Outcome>> {
        let seed = self.config.seed;
        (0..self.config.episodes as u64)
            .into_par_iter()
            .map(|i| self.run_episode(start, s1, s2, &mut episode_rng(seed, i), None))
            .collect()
    }

    /// Mean payoff and its standard error.
    pub fn estimate_value(&self, start: &GroupPoint, s1: &dyn Strategy, s2: &dyn Strategy) -> Result<Estimate> {
        if self.config.episodes < 2 {
            return Err(Error::config("episodes", "need at least 2"));
        }
        let outcomes = self.run_many(start, s1, s2)?;
        let payoffs: Vec<f64> = outcomes.iter().map(|o| o.payoff).collect();
        let (mean, se) = mean_se(&payoffs);
        let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
        for o in &outcomes {
            *counts.entry(o.tau).or_default() += 1;
        }
        let len = counts.keys().next_back().map_or(0, |k| k + 1);
        let mut tau_histogram = vec![0; len];
        for (k, c) in counts {
            tau_histogram[k] = c;
        }
        Ok(Estimate {
            mean,
            se,
            n: payoffs.len(),
            tau_histogram,
        })
    }
}

/// `X − ε(X−Z)/|X−Z|`, staying put within `ε` of `Z`.
#[derive(Debug, Clone)]
pub struct PullToward {
    pub z: Vec<f64>,
}

pub fn pull_toward(z: Vec<f64>) -> PullToward {
    PullToward { z }
}

impl Strategy for PullToward {
    fn choose(&self, turn: &Turn) -> Result<Vec<f64>> {
        let d: Vec<f64> = turn.x.iter().zip(&self.z).map(|(a, b)| a - b).collect();
        let n = norm(&d);
        if n <= turn.eps {
            return Ok(turn.x.to_vec());
        }
        Ok(turn.x.iter().zip(&d).map(|(a, v)| a - turn.eps * v / n).collect())
    }
    fn descriptor(&self) -> String {
        format!("pull_toward {:?}", self.z)
    }
}

/// `X + ε(X−Z)/|X−Z|`; stays put at `Z`.
#[derive(Debug, Clone)]
pub struct PushAway {
    pub z: Vec<f64>,
}

impl Strategy for PushAway {
    fn choose(&self, turn: &Turn) -> Result<Vec<f64>> {
        let d: Vec<f64> = turn.x.iter().zip(&self.z).map(|(a, b)| a - b).collect();
        let n = norm(&d);
        if n == 0.0 {
            return Ok(turn.x.to_vec());
        }
        Ok(turn.x.iter().zip(&d).map(|(a, v)| a + turn.eps * v / n).collect())
    }
    fn descriptor(&self) -> String {
        format!("push_away {:?}", self.z)
    }
}

/// Never moves.
#[derive(Debug, Clone, Copy)]
pub struct Stay;

impl Strategy for Stay {
    fn choose(&self, turn: &Turn) -> Result<Vec<f64>> {
        Ok(turn.x.to_vec())
    }
    fn descriptor(&self) -> String {
        "stay".into()
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A pseudo-random point of the ball, fixed by a hash of `(X, Y, k)`.
#[derive(Debug, Clone, Copy)]
pub struct Scrambled {
    pub seed: u64,
}

impl Strategy for Scrambled {
    fn choose(&self, turn: &Turn) -> Result<Vec<f64>> {
        let mut h = splitmix(self.seed ^ turn.k as u64);
        for v in turn.x.iter().chain(turn.y) {
            h = splitmix(h ^ v.to_bits());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(h);
        let v = uniform_ball(&mut rng, turn.x.len(), turn.eps);
        Ok(turn.x.iter().zip(&v).map(|(a, b)| a + b).collect())
    }
    fn descriptor(&self) -> String {
        format!("scrambled {}", self.seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreedyMode {
    Maximize,
    Minimize,
}

/// Picks the stencil point with the best value of the solved grid one
/// round ahead, after snapping `Y` down to `δℤ^m`.
#[derive(Debug, Clone)]
pub struct Greedy {
    pub grid: Arc<ValueGrid>,
    pub mode: GreedyMode,
    pub delta: f64,
}

pub fn greedy_from_grid(grid: Arc<ValueGrid>, mode: GreedyMode, delta: f64) -> Result<Greedy> {
    if !(delta > 0.0) {
        return Err(Error::Invalid(format!("snap width must be positive, got {delta}")));
    }
    Ok(Greedy { grid, mode, delta })
}

impl Strategy for Greedy {
    fn choose(&self, turn: &Turn) -> Result<Vec<f64>> {
        let g = &self.grid;
        let eps = g.epsilon();
        let half_e2 = 0.5 * eps * eps;
        let s = g.slice_index(turn.t)?;
        if s == 0 {
            return Err(Error::Invalid("no round left at the bottom slice".into()));
        }
        let y_snap: Vec<f64> = turn.y.iter().map(|v| self.delta * (v / self.delta).floor()).collect();
        let m = turn.x.len();
        let mut xt = vec![0.0; m];
        let mut yt = vec![0.0; m];
        let mut best = (0usize, f64::NAN);
        for i in 0..g.stencil.len() {
            let v = g.stencil.point(i);
            for k in 0..m {
                xt[k] = turn.x[k] + eps * v[k];
                yt[k] = y_snap[k] + half_e2 * xt[k];
            }
            let val = g.value_in_slice(s - 1, &xt, &yt)?;
            let better = match self.mode {
                GreedyMode::Maximize => val > best.1,
                GreedyMode::Minimize => val < best.1,
            };
            if i == 0 || better {
                best = (i, val);
            }
        }
        let v = g.stencil.point(best.0);
        Ok(turn.x.iter().zip(v).map(|(a, b)| a + eps * b).collect())
    }
    fn descriptor(&self) -> String {
        format!("greedy {:?} delta={}", self.mode, self.delta)
    }
}

/// Per-round statistics of the compensated processes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundStat {
    pub k: usize,
    pub mean_x: f64,
    pub se_x: f64,
    pub mean_y: f64,
    pub se_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupermartingaleReport {
    /// Compensator slope in `M^X_k = |X_k−Z| − c k ε`.
    pub c: f64,
    /// Compensator slope in `M^Y_k = |Y_k−Y₀−(t₀−t_k)Z| − c_y k ε² R`.
    pub c_y: f64,
    pub rounds: Vec<RoundStat>,
    /// Rounds whose mean increment of `M^X` exceeds three standard errors.
    pub flags_x: Vec<usize>,
    pub flags_y: Vec<usize>,
}

/// `c = β·m/(m+1)`: the noise moves `|X−Z|` by at most `E|v| = ε m/(m+1)`
/// in mean, and the two pulls cancel while `|X−Z| > ε`.
pub fn default_compensator(game: &Game) -> f64 {
    let m = game.m() as f64;
    game.beta * m / (m + 1.0)
}

/// Monte Carlo check that the stopped processes `M^X`, `M^Y` do not
/// increase in mean when player I pulls toward `Z`.
pub fn supermartingale_diagnostic(
    game: &Game,
    start: &GroupPoint,
    z: &[f64],
    opponent: &dyn Strategy,
    episodes: usize,
    c: Option<f64>,
) -> Result<SupermartingaleReport> {
    let eps = game.eps();
    let c = c.unwrap_or_else(|| default_compensator(game));
    let r = game.config.domain.r_constant();
    let reach = game.config.domain.max_abs() + eps + norm(z);
    let c_y = reach / (2.0 * r);
    let n = time_ladder(start.t, eps)?.0;
    let pull = pull_toward(z.to_vec());
    let seed = game.config.seed;
    let paths: Vec<(Vec<f64>, Vec<f64>)> = (0..episodes as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = episode_rng(seed, i);
            let mut log = Vec::new();
            game.run_episode(start, &pull, opponent, &mut rng, Some(&mut log))?;
            let mut mx = Vec::with_capacity(n + 1);
            let mut my = Vec::with_capacity(n + 1);
            for k in 0..=n {
                let row = &log[k.min(log.len() - 1)];
                let kk = row.k as f64;
                let dx: Vec<f64> = row.x.iter().zip(z).map(|(a, b)| a - b).collect();
                mx.push(norm(&dx) - c * kk * eps);
                let dy: Vec<f64> = row
                    .y
                    .iter()
                    .zip(&start.y)
                    .zip(z)
                    .map(|((y, y0), zz)| y - y0 - kk * 0.5 * eps * eps * zz)
                    .collect();
                my.push(norm(&dy) - c_y * kk * eps * eps * r);
            }
            Ok((mx, my))
        })
        .collect::<Result<_>>()?;
    let mut rounds = Vec::with_capacity(n + 1);
    let (mut flags_x, mut flags_y) = (Vec::new(), Vec::new());
    for k in 0..=n {
        let xs: Vec<f64> = paths.iter().map(|p| p.0[k]).collect();
        let ys: Vec<f64> = paths.iter().map(|p| p.1[k]).collect();
        let (mean_x, se_x) = mean_se(&xs);
        let (mean_y, se_y) = mean_se(&ys);
        rounds.push(RoundStat {
            k,
            mean_x,
            se_x,
            mean_y,
            se_y,
        });
        if k > 0 {
            let dx: Vec<f64> = paths.iter().map(|p| p.0[k] - p.0[k - 1]).collect();
            let dy: Vec<f64> = paths.iter().map(|p| p.1[k] - p.1[k - 1]).collect();
            let (ix, sx) = mean_se(&dx);
            let (iy, sy) = mean_se(&dy);
            if ix > 3.0 * sx + 1e-12 {
                flags_x.push(k);
            }
            if iy > 3.0 * sy + 1e-12 {
                flags_y.push(k);
            }
        }
    }
    Ok(SupermartingaleReport {
        c,
        c_y,
        rounds,
        flags_x,
        flags_y,
    })
}
