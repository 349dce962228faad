//! Experiment configuration: flat `key = value` text with `[command]`
//! sections.
//!
//! ```text
//! # keys before the first section apply to every command
//! m = 1
//! [solve]
//! p = 3
//! epsilon = 0.1
//! boundary = y_plus_tx
//! ```
//!
//! Points are written `x1,..,xm;y1,..,ym;t`, lists of points are joined
//! with `|`, and `auto` selects a derived default.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crate::domain::{mcshane_extend, BoundaryDatum, SpatialDomain};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::geometry::GroupPoint;
use crate::mean_value::{MeanValueVariant, MvQuadrature};
use crate::quadrature::BallQuadrature;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    MvCheck,
    Solve,
    Play,
    Sweep,
    CrossValidate,
}

impl Command {
    pub const ALL: [Self; 5] = [Self::MvCheck, Self::Solve, Self::Play, Self::Sweep, Self::CrossValidate];

    pub fn name(self) -> &'static str {
        match self {
            Self::MvCheck => "mv-check",
            Self::Solve => "solve",
            Self::Play => "play",
            Self::Sweep => "sweep",
            Self::CrossValidate => "cross-validate",
        }
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::config("section", format!("unknown command {s:?}")))
    }
}

/// Boundary datum by name.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySpec {
    Const(f64),
    /// `a·X + b`.
    Linear(Vec<f64>, f64),
    /// `Y·e + t X·e`; `None` means the first unit vector.
    YPlusTx(Option<Vec<f64>>),
    QuadraticP,
    /// CSV with columns `x1..xm, y1..ym, t, value`, extended with the
    /// given Lipschitz constant.
    CustomTable(PathBuf, f64),
}

impl BoundarySpec {
    pub fn build(&self, m: usize, p: Exponent) -> Result<BoundaryDatum> {
        Ok(match self {
            Self::Const(c) => BoundaryDatum::constant(*c),
            Self::Linear(a, b) => {
                check_len("boundary", a, m)?;
                BoundaryDatum::linear(a.clone(), *b)
            }
            Self::YPlusTx(e) => {
                let e = e.clone().unwrap_or_else(|| unit(m));
                check_len("boundary", &e, m)?;
                BoundaryDatum::y_plus_tx(e)
            }
            Self::QuadraticP => BoundaryDatum::quadratic_p(m, p),
            Self::CustomTable(path, l) => {
                let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
                let mut samples = Vec::new();
                for rec in rdr.records() {
                    let rec = rec?;
                    let v: Vec<f64> = rec
                        .iter()
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| Error::config("boundary", format!("bad table entry: {e}")))?;
                    if v.len() != 2 * m + 2 {
                        return Err(Error::config("boundary", format!("table rows need {} columns", 2 * m + 2)));
                    }
                    let g = GroupPoint::new(v[..m].to_vec(), v[m..2 * m].to_vec(), v[2 * m])?;
                    samples.push((g, v[2 * m + 1]));
                }
                mcshane_extend(samples, *l)?.into_datum(format!("custom-table {}", path.display()))
            }
        })
    }

    /// Closed-form solution matching the datum, when the datum is one.
    pub fn exact_solution(&self, m: usize, p: Exponent) -> Option<BoundaryDatum> {
        match self {
            Self::CustomTable(..) => None,
            other => other.build(m, p).ok(),
        }
    }
}

impl fmt::Display for BoundarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Const(c) => write!(f, "const {c}"),
            Self::Linear(a, b) => write!(f, "linear {} {b}", join(a)),
            Self::YPlusTx(None) => write!(f, "y_plus_tx"),
            Self::YPlusTx(Some(e)) => write!(f, "y_plus_tx {}", join(e)),
            Self::QuadraticP => write!(f, "quadratic_p"),
            Self::CustomTable(p, l) => write!(f, "custom-table {} {l}", p.display()),
        }
    }
}

impl FromStr for BoundarySpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let bad = || Error::config("boundary", format!("cannot parse {s:?}"));
        match parts.as_slice() {
            ["const", c] => Ok(Self::Const(num("boundary", c)?)),
            ["linear", a, b] => Ok(Self::Linear(vector("boundary", a)?, num("boundary", b)?)),
            ["y_plus_tx"] => Ok(Self::YPlusTx(None)),
            ["y_plus_tx", e] => Ok(Self::YPlusTx(Some(vector("boundary", e)?))),
            ["quadratic_p"] => Ok(Self::QuadraticP),
            ["custom-table", path, l] => Ok(Self::CustomTable(PathBuf::from(path), num("boundary", l)?)),
            _ => Err(bad()),
        }
    }
}

/// Strategy by name.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategySpec {
    /// Greedy on the solved grid; player I maximizes, player II minimizes.
    Greedy,
    Pull(Vec<f64>),
    Push(Vec<f64>),
    Stay,
    Scrambled(u64),
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Greedy => write!(f, "greedy"),
            Self::Pull(z) => write!(f, "pull {}", join(z)),
            Self::Push(z) => write!(f, "push {}", join(z)),
            Self::Stay => write!(f, "stay"),
            Self::Scrambled(s) => write!(f, "scrambled {s}"),
        }
    }
}

impl FromStr for StrategySpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        match parts.as_slice() {
            ["greedy"] => Ok(Self::Greedy),
            ["pull", z] => Ok(Self::Pull(vector("strategy", z)?)),
            ["push", z] => Ok(Self::Push(vector("strategy", z)?)),
            ["stay"] => Ok(Self::Stay),
            ["scrambled", n] => Ok(Self::Scrambled(
                n.parse().map_err(|_| Error::config("strategy", format!("bad seed {n:?}")))?,
            )),
            _ => Err(Error::config("strategy", format!("cannot parse {s:?}"))),
        }
    }
}

/// Everything one experiment needs. Every field has a default.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub m: usize,
    pub p: Exponent,
    pub epsilon: f64,
    pub epsilons: Vec<f64>,
    pub horizon: f64,
    pub domain: SpatialDomain,
    pub boundary: BoundarySpec,
    pub h_x: Option<f64>,
    pub h_y: Option<f64>,
    pub ball_samples: Option<usize>,
    pub y_seed: (f64, f64),
    pub profile: String,
    pub variants: Vec<MeanValueVariant>,
    pub point: GroupPoint,
    pub quadrature: BallQuadrature,
    pub refine: bool,
    pub seed: Option<u64>,
    pub episodes: usize,
    pub starts: Vec<GroupPoint>,
    pub strategy_1: StrategySpec,
    pub strategy_2: StrategySpec,
    pub snap: Option<f64>,
    pub log_episodes: usize,
    pub adversarial: bool,
    pub compact_x: (f64, f64),
    pub compact_y: (f64, f64),
    pub compact_t: (f64, f64),
    pub grid_csv: bool,
    pub max_error: Option<f64>,
    pub max_rel_error: Option<f64>,
    pub require_decreasing: bool,
    pub require_agreement: bool,
    pub out: PathBuf,
}

fn unit(m: usize) -> Vec<f64> {
    let mut e = vec![0.0; m];
    e[0] = 1.0;
    e
}

fn join(v: &[f64]) -> String {
    v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

fn num(field: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::config(field, format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::config(field, "must be finite"));
    }
    Ok(v)
}

fn vector(field: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|c| num(field, c)).collect()
}

fn check_len(field: &str, v: &[f64], m: usize) -> Result<()> {
    if v.len() != m {
        return Err(Error::config(field, format!("expected {m} components, got {}", v.len())));
    }
    Ok(())
}

fn pair(field: &str, s: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    match parts.as_slice() {
        [a, b] => Ok((num(field, a)?, num(field, b)?)),
        _ => Err(Error::config(field, format!("expected two numbers, got {s:?}"))),
    }
}

fn point(field: &str, s: &str) -> Result<GroupPoint> {
    let parts: Vec<&str> = s.split(';').collect();
    if parts.len() != 3 {
        return Err(Error::config(field, format!("expected x;y;t, got {s:?}")));
    }
    GroupPoint::new(vector(field, parts[0])?, vector(field, parts[1])?, num(field, parts[2])?)
        .map_err(|e| Error::config(field, e.to_string()))
}

fn boolean(field: &str, s: &str) -> Result<bool> {
    match s.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::config(field, format!("expected true or false, got {s:?}"))),
    }
}

fn opt<T>(s: &str, f: impl FnOnce(&str) -> Result<T>) -> Result<Option<T>> {
    if s.trim() == "auto" || s.trim() == "none" {
        Ok(None)
    } else {
        f(s).map(Some)
    }
}

fn show_opt<T: fmt::Display>(v: &Option<T>, none: &str) -> String {
    v.as_ref().map_or_else(|| none.to_string(), |x| x.to_string())
}

fn domain(s: &str) -> Result<SpatialDomain> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    let r = match parts.as_slice() {
        ["ball", c, r] => SpatialDomain::ball(vector("domain", c)?, num("domain", r)?),
        ["box", lo, hi] => SpatialDomain::cube(vector("domain", lo)?, vector("domain", hi)?),
        _ => return Err(Error::config("domain", format!("expected `ball c r` or `box lo hi`, got {s:?}"))),
    };
    r.map_err(|e| Error::config("domain", e.to_string()))
}

fn quadrature(s: &str) -> Result<BallQuadrature> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    let int = |v: &str| {
        v.parse::<u64>()
            .map_err(|_| Error::config("quadrature", format!("not an integer: {v:?}")))
    };
    match parts.as_slice() {
        ["tensor", r, a] => Ok(BallQuadrature::Tensor {
            n_radial: int(r)? as usize,
            n_angular: int(a)? as usize,
        }),
        ["quasi", n, seed] => Ok(BallQuadrature::QuasiRandom {
            n_points: int(n)? as usize,
            seed: int(seed)?,
        }),
        _ => Err(Error::config("quadrature", format!("expected `tensor R A` or `quasi N SEED`, got {s:?}"))),
    }
}

fn show_quadrature(q: &BallQuadrature) -> String {
    match q {
        BallQuadrature::Tensor { n_radial, n_angular } => format!("tensor {n_radial} {n_angular}"),
        BallQuadrature::QuasiRandom { n_points, seed } => format!("quasi {n_points} {seed}"),
    }
}

type Pairs = Vec<(String, String)>;

/// Raw key/value pairs before and inside each section.
#[derive(Debug, Clone, Default)]
pub struct ConfigText {
    pub global: Pairs,
    pub sections: Vec<(String, Pairs)>,
}

impl ConfigText {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                out.sections.push((name.trim().to_string(), Vec::new()));
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}", lineno + 1), "expected key = value"))?;
            let kv = (k.trim().to_string(), v.trim().to_string());
            match out.sections.last_mut() {
                Some((_, pairs)) => pairs.push(kv),
                None => out.global.push(kv),
            }
        }
        Ok(out)
    }
}

const KEYS: &[&str] = &[
    "m",
    "p",
    "epsilon",
    "epsilons",
    "horizon",
    "domain",
    "boundary",
    "h_x",
    "h_y",
    "ball_samples",
    "y_seed",
    "profile",
    "variants",
    "point",
    "quadrature",
    "refine",
    "seed",
    "episodes",
    "starts",
    "strategy_1",
    "strategy_2",
    "snap",
    "log_episodes",
    "adversarial",
    "compact_x",
    "compact_y",
    "compact_t",
    "grid_csv",
    "max_error",
    "max_rel_error",
    "require_decreasing",
    "require_agreement",
    "out",
];

impl ExperimentConfig {
    /// Defaults for `command` in dimension `m`.
    pub fn defaults(command: Command, m: usize) -> Self {
        let mut x = vec![0.0; m];
        x[0] = 0.5;
        Self {
            command,
            m,
            p: Exponent::Finite(3.0),
            epsilon: 0.1,
            epsilons: vec![0.4, 0.2, 0.1],
            horizon: 0.5,
            domain: SpatialDomain::cube(vec![-1.0; m], vec![1.0; m]).expect("valid box"),
            boundary: BoundarySpec::YPlusTx(None),
            h_x: None,
            h_y: None,
            ball_samples: None,
            y_seed: (-0.5, 0.5),
            profile: "x_squared".into(),
            variants: vec![
                MeanValueVariant::V1ShiftX,
                MeanValueVariant::V2PointwiseX,
                MeanValueVariant::V3ShiftXTilde,
                MeanValueVariant::V4PointwiseXTilde,
            ],
            point: GroupPoint::new(x, vec![0.0; m], 0.2).expect("valid point"),
            quadrature: BallQuadrature::default(),
            refine: true,
            seed: None,
            episodes: 10_000,
            starts: vec![GroupPoint::new(vec![0.0; m], vec![0.0; m], 0.5).expect("valid point")],
            strategy_1: StrategySpec::Greedy,
            strategy_2: StrategySpec::Greedy,
            snap: None,
            log_episodes: 0,
            adversarial: false,
            compact_x: (-0.5, 0.5),
            compact_y: (-0.5, 0.5),
            compact_t: (0.1, 0.4),
            grid_csv: true,
            max_error: None,
            max_rel_error: None,
            require_decreasing: false,
            require_agreement: false,
            out: PathBuf::from("out"),
        }
    }

    /// Builds the config for `command` from global keys plus its section.
    /// Every section in the text is checked for unknown keys.
    pub fn from_text(text: &str, command: Command) -> Result<Self> {
        let parsed = ConfigText::parse(text)?;
        // repeated sections for one command accumulate, later keys win
        let mut merged: Vec<(Command, Pairs)> = Vec::new();
        for (name, pairs) in &parsed.sections {
            let cmd: Command = name.parse()?;
            match merged.iter_mut().find(|(c, _)| *c == cmd) {
                Some((_, acc)) => acc.extend(pairs.iter().cloned()),
                None => merged.push((cmd, pairs.clone())),
            }
        }
        let mut chosen = None;
        for (cmd, pairs) in merged {
            let mut all = parsed.global.clone();
            all.extend(pairs);
            let cfg = Self::from_pairs(cmd, &all)?;
            if cmd == command {
                chosen = Some(cfg);
            }
        }
        match chosen {
            Some(c) => Ok(c),
            None => Self::from_pairs(command, &parsed.global),
        }
    }

    pub fn from_pairs(command: Command, pairs: &[(String, String)]) -> Result<Self> {
        for (k, _) in pairs {
            if !KEYS.contains(&k.as_str()) {
                return Err(Error::config(k.clone(), "unknown key"));
            }
        }
        let get = |key: &str| pairs.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let m = match get("m") {
            Some(v) => v.parse::<usize>().ok().filter(|m| *m >= 1).ok_or_else(|| Error::config("m", "must be a positive integer"))?,
            None => 1,
        };
        let mut c = Self::defaults(command, m);
        for (key, v) in pairs {
            let v = v.as_str();
            match key.as_str() {
                "m" => {}
                "p" => c.p = v.parse().map_err(|e: Error| Error::config("p", e.to_string()))?,
                "epsilon" => c.epsilon = num(key, v)?,
                "epsilons" => c.epsilons = vector(key, v)?,
                "horizon" => c.horizon = num(key, v)?,
                "domain" => c.domain = domain(v)?,
                "boundary" => c.boundary = v.parse()?,
                "h_x" => c.h_x = opt(v, |s| num(key, s))?,
                "h_y" => c.h_y = opt(v, |s| num(key, s))?,
                "ball_samples" => {
                    c.ball_samples = opt(v, |s| {
                        s.parse::<usize>().map_err(|_| Error::config("ball_samples", "not an integer"))
                    })?
                }
                "y_seed" => c.y_seed = pair(key, v)?,
                "profile" => c.profile = v.to_string(),
                "variants" => {
                    c.variants = v
                        .split(',')
                        .map(|s| s.parse().map_err(|e: Error| Error::config("variants", e.to_string())))
                        .collect::<Result<_>>()?
                }
                "point" => c.point = point(key, v)?,
                "quadrature" => c.quadrature = quadrature(v)?,
                "refine" => c.refine = boolean(key, v)?,
                "seed" => {
                    c.seed = opt(v, |s| s.parse::<u64>().map_err(|_| Error::config("seed", "not a u64")))?
                }
                "episodes" => {
                    c.episodes = v.parse().map_err(|_| Error::config("episodes", "not an integer"))?
                }
                "starts" => c.starts = v.split('|').map(|s| point(key, s)).collect::<Result<_>>()?,
                "strategy_1" => c.strategy_1 = v.parse()?,
                "strategy_2" => c.strategy_2 = v.parse()?,
                "snap" => c.snap = opt(v, |s| num(key, s))?,
                "log_episodes" => {
                    c.log_episodes = v.parse().map_err(|_| Error::config("log_episodes", "not an integer"))?
                }
                "adversarial" => c.adversarial = boolean(key, v)?,
                "compact_x" => c.compact_x = pair(key, v)?,
                "compact_y" => c.compact_y = pair(key, v)?,
                "compact_t" => c.compact_t = pair(key, v)?,
                "grid_csv" => c.grid_csv = boolean(key, v)?,
                "max_error" => c.max_error = opt(v, |s| num(key, s))?,
                "max_rel_error" => c.max_rel_error = opt(v, |s| num(key, s))?,
                "require_decreasing" => c.require_decreasing = boolean(key, v)?,
                "require_agreement" => c.require_agreement = boolean(key, v)?,
                "out" => c.out = PathBuf::from(v),
                _ => unreachable!("checked against KEYS"),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.m;
        if self.domain.dim() != m {
            return Err(Error::config("domain", format!("dimension {} differs from m = {m}", self.domain.dim())));
        }
        if self.point.dim() != m {
            return Err(Error::config("point", format!("needs {m} components")));
        }
        if self.starts.iter().any(|s| s.dim() != m) {
            return Err(Error::config("starts", format!("needs {m} components")));
        }
        if !(self.epsilon > 0.0) || self.epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::config("epsilon", "must be positive"));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::config("horizon", "must be positive"));
        }
        if matches!(self.command, Command::Play | Command::CrossValidate) {
            if self.seed.is_none() {
                return Err(Error::config("seed", "mandatory for play and cross-validate"));
            }
            if self.episodes < 2 {
                return Err(Error::config("episodes", "need at least 2"));
            }
        }
        if matches!(self.command, Command::Solve | Command::Play | Command::Sweep | Command::CrossValidate)
            && !self.p.is_at_least_two()
        {
            return Err(Error::config("p", "solver and game need p >= 2"));
        }
        if self.command == Command::MvCheck && crate::profile::profile_by_name(&self.profile, m).is_none() {
            return Err(Error::config("profile", format!("unknown profile {:?}", self.profile)));
        }
        Ok(())
    }

    /// Canonical text with every key, under a section for the command.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let pair = |p: (f64, f64)| format!("{} {}", p.0, p.1);
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("m", self.m.to_string());
        put("p", self.p.to_string());
        put("epsilon", self.epsilon.to_string());
        put("epsilons", join(&self.epsilons));
        put("horizon", self.horizon.to_string());
        put("domain", self.domain.to_string());
        put("boundary", self.boundary.to_string());
        put("h_x", show_opt(&self.h_x, "auto"));
        put("h_y", show_opt(&self.h_y, "auto"));
        put("ball_samples", show_opt(&self.ball_samples, "auto"));
        put("y_seed", pair(self.y_seed));
        put("profile", self.profile.clone());
        put(
            "variants",
            self.variants.iter().map(|v| v.tag()).collect::<Vec<_>>().join(","),
        );
        put("point", self.point.to_string());
        put("quadrature", show_quadrature(&self.quadrature));
        put("refine", self.refine.to_string());
        put("seed", show_opt(&self.seed, "none"));
        put("episodes", self.episodes.to_string());
        put(
            "starts",
            self.starts.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" | "),
        );
        put("strategy_1", self.strategy_1.to_string());
        put("strategy_2", self.strategy_2.to_string());
        put("snap", show_opt(&self.snap, "auto"));
        put("log_episodes", self.log_episodes.to_string());
        put("adversarial", self.adversarial.to_string());
        put("compact_x", pair(self.compact_x));
        put("compact_y", pair(self.compact_y));
        put("compact_t", pair(self.compact_t));
        put("grid_csv", self.grid_csv.to_string());
        put("max_error", show_opt(&self.max_error, "none"));
        put("max_rel_error", show_opt(&self.max_rel_error, "none"));
        put("require_decreasing", self.require_decreasing.to_string());
        put("require_agreement", self.require_agreement.to_string());
        put("out", self.out.display().to_string());
        format!("[{}]\n{s}", self.command.name())
    }

    pub fn mv_quadrature(&self) -> MvQuadrature {
        MvQuadrature {
            ball: self.quadrature.clone(),
            refine: self.refine,
        }
    }

    /// Solver settings at step `eps`.
    pub fn solve_config(&self, eps: f64) -> crate::dpp::SolveConfig {
        let mut c = crate::dpp::SolveConfig::new(self.domain.clone(), self.horizon, self.p, eps);
        if let Some(h) = self.h_x {
            c.h_x = h;
        }
        if let Some(h) = self.h_y {
            c.h_y = h;
        }
        if let Some(n) = self.ball_samples {
            c.ball_samples = n;
        }
        c.y_seed_lo = vec![self.y_seed.0; self.m];
        c.y_seed_hi = vec![self.y_seed.1; self.m];
        c
    }
}
