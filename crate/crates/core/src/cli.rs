//! Experiment runner behind the `kolmo` binary.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::config::{Command, ExperimentConfig, StrategySpec};
use crate::domain::BoundaryDatum;
use crate::dpp::{self, ValueGrid};
use crate::error::{Error, Result};
use crate::game::{self, Estimate, Game, GameConfig, GreedyMode, LogRow, Strategy};
use crate::mean_value::{expected_limit, mv_limit_estimate, reference_scale};
use crate::profile::profile_by_name;

/// Exit status and the one-line summaries printed by the binary.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub pass: bool,
    pub summaries: Vec<String>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

/// Exit code for a failed run: 2 for bad configuration, 3 for anything
/// else (mostly I/O).
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::InvalidLadder(_) => 2,
        _ => 3,
    }
}

/// Runs the experiment, writing outputs under `out_dir`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunReport> {
    cfg.validate()?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("config.txt"), cfg.to_text())?;
    match cfg.command {
        Command::MvCheck => mv_check(cfg, out_dir),
        Command::Solve => solve(cfg, out_dir),
        Command::Play => play(cfg, out_dir),
        Command::Sweep => sweep(cfg, out_dir),
        Command::CrossValidate => cross_validate(cfg, out_dir),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn mv_check(cfg: &ExperimentConfig, out: &Path) -> Result<RunReport> {
    let phi = profile_by_name(&cfg.profile, cfg.m)
        .ok_or_else(|| Error::config("profile", format!("unknown profile {:?}", cfg.profile)))?;
    let quad = cfg.mv_quadrature();
    let g = &cfg.point;
    let mut w = csv::Writer::from_path(out.join("mv_check.csv"))?;
    w.write_record([
        "variant",
        "p",
        "point",
        "epsilon",
        "residual",
        "residual_over_eps2",
        "extrapolated_limit",
        "oracle_value",
        "rel_error",
    ])?;
    let mut pass = true;
    let mut summaries = Vec::new();
    for &variant in &cfg.variants {
        let est = mv_limit_estimate(phi.as_ref(), g, cfg.p, variant, &cfg.epsilons, &quad)?;
        let oracle = expected_limit(phi.as_ref(), g, cfg.p, variant)?;
        let scale = reference_scale(phi.as_ref(), g, cfg.p, variant);
        let rel = if oracle.abs() > 1e-12 * (1.0 + scale) {
            (est.limit - oracle).abs() / oracle.abs()
        } else if scale > 0.0 {
            est.limit.abs() / scale
        } else {
            est.limit.abs()
        };
        for i in 0..est.epsilons.len() {
            w.write_record([
                variant.tag().to_string(),
                cfg.p.to_string(),
                g.to_string(),
                est.epsilons[i].to_string(),
                est.residuals[i].to_string(),
                est.ratios[i].to_string(),
                est.limit.to_string(),
                oracle.to_string(),
                rel.to_string(),
            ])?;
        }
        let ok = cfg.max_rel_error.is_none_or(|tol| rel <= tol);
        pass &= ok;
        summaries.push(format!(
            "mv-check {} p={} {}: limit={} oracle={} rel_error={:.3e} {}",
            variant.tag(),
            cfg.p,
            cfg.profile,
            est.limit,
            oracle,
            rel,
            if ok { "ok" } else { "FAIL" }
        ));
    }
    w.flush()?;
    Ok(RunReport { pass, summaries })
}

fn datum(cfg: &ExperimentConfig) -> Result<BoundaryDatum> {
    cfg.boundary.build(cfg.m, cfg.p)
}

fn solved(cfg: &ExperimentConfig) -> Result<ValueGrid> {
    dpp::solve(&cfg.solve_config(cfg.epsilon), &datum(cfg)?)
}

#[derive(Serialize)]
struct SolveReport {
    epsilon: f64,
    h_x: f64,
    h_y: f64,
    rounds: usize,
    slices: usize,
    nodes_per_slice: usize,
    max_error: Option<f64>,
    threshold: Option<f64>,
    pass: bool,
}

fn solve(cfg: &ExperimentConfig, out: &Path) -> Result<RunReport> {
    let grid = solved(cfg)?;
    let mut bin = BufWriter::new(File::create(out.join("grid.bin"))?);
    grid.write_binary(&mut bin)?;
    bin.flush()?;
    if cfg.grid_csv {
        let top = grid.slices.len() - 1;
        grid.write_csv(BufWriter::new(File::create(out.join("grid.csv"))?), &[top])?;
    }
    let max_error = cfg
        .boundary
        .exact_solution(cfg.m, cfg.p)
        .map(|u| grid.max_error(|x, y, t| u.eval(x, y, t), true));
    let pass = match (cfg.max_error, max_error) {
        (Some(tol), Some(e)) => e <= tol,
        _ => true,
    };
    let report = SolveReport {
        epsilon: grid.epsilon(),
        h_x: grid.config.h_x,
        h_y: grid.config.h_y,
        rounds: grid.rounds(),
        slices: grid.slices.len(),
        nodes_per_slice: grid.axes.len(),
        max_error,
        threshold: cfg.max_error,
        pass,
    };
    write_json(&out.join("solve.json"), &report)?;
    let err = max_error.map_or_else(|| "n/a".to_string(), |e| format!("{e:.3e}"));
    Ok(RunReport {
        pass,
        summaries: vec![format!(
            "solve {} p={} eps={}: {} rounds, max_error={} {}",
            cfg.boundary,
            cfg.p,
            cfg.epsilon,
            report.rounds,
            err,
            if pass { "ok" } else { "FAIL" }
        )],
    })
}

fn game_for(cfg: &ExperimentConfig) -> Result<Game> {
    Game::new(GameConfig {
        domain: cfg.domain.clone(),
        horizon: cfg.horizon,
        p: cfg.p,
        epsilon: cfg.epsilon,
        payoff: datum(cfg)?,
        seed: cfg.seed.ok_or_else(|| Error::config("seed", "mandatory"))?,
        episodes: cfg.episodes,
    })
}

fn strategy(
    spec: &StrategySpec,
    mode: GreedyMode,
    grid: Option<&Arc<ValueGrid>>,
    delta: f64,
) -> Result<Box<dyn Strategy>> {
    Ok(match spec {
        StrategySpec::Greedy => {
            let grid = grid.ok_or_else(|| Error::Invalid("greedy play needs a solved grid".into()))?;
            Box::new(game::greedy_from_grid(grid.clone(), mode, delta)?)
        }
        StrategySpec::Pull(z) => Box::new(game::pull_toward(z.clone())),
        StrategySpec::Push(z) => Box::new(game::PushAway { z: z.clone() }),
        StrategySpec::Stay => Box::new(game::Stay),
        StrategySpec::Scrambled(seed) => Box::new(game::Scrambled { seed: *seed }),
    })
}

fn needs_grid(cfg: &ExperimentConfig) -> bool {
    cfg.strategy_1 == StrategySpec::Greedy || cfg.strategy_2 == StrategySpec::Greedy
}

fn snap_width(cfg: &ExperimentConfig, grid: &ValueGrid) -> f64 {
    cfg.snap.unwrap_or(grid.config.h_y)
}

#[derive(Serialize)]
struct PlayResult<'a> {
    start: String,
    #[serde(flatten)]
    estimate: &'a Estimate,
}

fn write_episode_log(cfg: &ExperimentConfig, g: &Game, s1: &dyn Strategy, s2: &dyn Strategy, out: &Path) -> Result<()> {
    let m = cfg.m;
    let mut w = csv::Writer::from_path(out.join("episodes.csv"))?;
    let mut header = vec!["episode".to_string(), "k".to_string()];
    header.extend((1..=m).map(|i| format!("x{i}")));
    header.extend((1..=m).map(|i| format!("y{i}")));
    header.extend(["t", "coin", "actor"].map(String::from));
    w.write_record(&header)?;
    let seed = g.config.seed;
    for e in 0..cfg.log_episodes as u64 {
        let mut log: Vec<LogRow> = Vec::new();
        g.run_episode(&cfg.starts[0], s1, s2, &mut game::episode_rng(seed, e), Some(&mut log))?;
        for row in &log {
            let (coin, actor) = match row.coin {
                None => ("", "start"),
                Some(game::Coin::Noise) => ("noise", "noise"),
                Some(c) => ("tug", c.label()),
            };
            let mut rec = vec![e.to_string(), row.k.to_string()];
            rec.extend(row.x.iter().chain(&row.y).map(|v| v.to_string()));
            rec.extend([row.t.to_string(), coin.to_string(), actor.to_string()]);
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn play(cfg: &ExperimentConfig, out: &Path) -> Result<RunReport> {
    let g = game_for(cfg)?;
    let grid = if needs_grid(cfg) { Some(Arc::new(solved(cfg)?)) } else { None };
    let delta = grid.as_ref().map_or(cfg.epsilon / 8.0, |gr| snap_width(cfg, gr));
    let s1 = strategy(&cfg.strategy_1, GreedyMode::Maximize, grid.as_ref(), delta)?;
    let s2 = strategy(&cfg.strategy_2, GreedyMode::Minimize, grid.as_ref(), delta)?;
    let mut estimates = Vec::with_capacity(cfg.starts.len());
    let mut summaries = Vec::new();
    for start in &cfg.starts {
        let est = g.estimate_value(start, s1.as_ref(), s2.as_ref())?;
        summaries.push(format!(
            "play start={} p={}: mean={} se={:.3e} n={}",
            start, cfg.p, est.mean, est.se, est.n
        ));
        estimates.push(est);
    }
    let results: Vec<PlayResult> = cfg
        .starts
        .iter()
        .zip(&estimates)
        .map(|(s, e)| PlayResult {
            start: s.to_string(),
            estimate: e,
        })
        .collect();
    write_json(&out.join("play.json"), &results)?;
    if cfg.log_episodes > 0 {
        write_episode_log(cfg, &g, s1.as_ref(), s2.as_ref(), out)?;
    }
    Ok(RunReport { pass: true, summaries })
}

fn sweep(cfg: &ExperimentConfig, out: &Path) -> Result<RunReport> {
    let d = datum(cfg)?;
    let exact = cfg
        .boundary
        .exact_solution(cfg.m, cfg.p)
        .ok_or_else(|| Error::config("boundary", "sweep needs a datum with a closed-form solution"))?;
    let xl = vec![cfg.compact_x.0; cfg.m];
    let xh = vec![cfg.compact_x.1; cfg.m];
    let yl = vec![cfg.compact_y.0; cfg.m];
    let yh = vec![cfg.compact_y.1; cfg.m];
    let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
    w.write_record(["epsilon", "h_x", "h_y", "rounds", "max_error"])?;
    let mut errors = Vec::new();
    for &eps in &cfg.epsilons {
        let sc = cfg.solve_config(eps);
        let grid = dpp::solve(&sc, &d)?;
        let err = grid.max_error_on(|x, y, t| exact.eval(x, y, t), (&xl, &xh), (&yl, &yh), cfg.compact_t);
        w.write_record([
            eps.to_string(),
            sc.h_x.to_string(),
            sc.h_y.to_string(),
            grid.rounds().to_string(),
            err.to_string(),
        ])?;
        errors.push(err);
    }
    w.flush()?;
    let decreasing = errors.windows(2).all(|e| e[1] < e[0]);
    let pass = !cfg.require_decreasing || decreasing;
    Ok(RunReport {
        pass,
        summaries: vec![format!(
            "sweep {} p={}: errors [{}] {}",
            cfg.boundary,
            cfg.p,
            errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", "),
            if decreasing { "decreasing" } else { "not decreasing" }
        )],
    })
}

#[derive(Serialize)]
struct CrossRow {
    start: String,
    grid_value: f64,
    mc_mean: f64,
    se: f64,
    tolerance: f64,
    abs_diff: f64,
    pass: bool,
    adversarial_mean: Option<f64>,
    adversarial_se: Option<f64>,
    adversarial_pass: Option<bool>,
}

fn cross_validate(cfg: &ExperimentConfig, out: &Path) -> Result<RunReport> {
    let g = game_for(cfg)?;
    let grid = Arc::new(solved(cfg)?);
    let delta = snap_width(cfg, &grid);
    let h = grid.config.h_x.max(grid.config.h_y);
    let s1 = strategy(&cfg.strategy_1, GreedyMode::Maximize, Some(&grid), delta)?;
    let s2 = strategy(&cfg.strategy_2, GreedyMode::Minimize, Some(&grid), delta)?;
    let random = game::Scrambled {
        seed: cfg.seed.unwrap_or(0),
    };
    let mut rows = Vec::with_capacity(cfg.starts.len());
    for start in &cfg.starts {
        let gv = grid.value_at(&start.x, &start.y, start.t)?;
        let est = g.estimate_value(start, s1.as_ref(), s2.as_ref())?;
        let tolerance = 3.0 * est.se + 10.0 * h * h;
        let abs_diff = (est.mean - gv).abs();
        let mut row = CrossRow {
            start: start.to_string(),
            grid_value: gv,
            mc_mean: est.mean,
            se: est.se,
            tolerance,
            abs_diff,
            pass: abs_diff <= tolerance,
            adversarial_mean: None,
            adversarial_se: None,
            adversarial_pass: None,
        };
        if cfg.adversarial {
            let adv = g.estimate_value(start, s1.as_ref(), &random)?;
            let tol = 3.0 * adv.se + 10.0 * h * h;
            row.adversarial_mean = Some(adv.mean);
            row.adversarial_se = Some(adv.se);
            row.adversarial_pass = Some(adv.mean >= gv - tol);
        }
        rows.push(row);
    }
    let mut w = csv::Writer::from_path(out.join("cross_validate.csv"))?;
    w.write_record([
        "start",
        "grid_value",
        "mc_mean",
        "se",
        "tolerance",
        "abs_diff",
        "pass",
        "adversarial_mean",
        "adversarial_se",
        "adversarial_pass",
    ])?;
    let show = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    for r in &rows {
        w.write_record([
            r.start.clone(),
            r.grid_value.to_string(),
            r.mc_mean.to_string(),
            r.se.to_string(),
            r.tolerance.to_string(),
            r.abs_diff.to_string(),
            r.pass.to_string(),
            show(r.adversarial_mean),
            show(r.adversarial_se),
            r.adversarial_pass.map_or_else(String::new, |b| b.to_string()),
        ])?;
    }
    w.flush()?;
    write_json(&out.join("cross_validate.json"), &rows)?;
    let agree = rows.iter().all(|r| r.pass && r.adversarial_pass != Some(false));
    let pass = !cfg.require_agreement || agree;
    let summaries = rows
        .iter()
        .map(|r| {
            format!(
                "cross-validate start={}: grid={} mc={} |diff|={:.3e} tol={:.3e} {}",
                r.start,
                r.grid_value,
                r.mc_mean,
                r.abs_diff,
                r.tolerance,
                if r.pass && r.adversarial_pass != Some(false) { "ok" } else { "FAIL" }
            )
        })
        .collect();
    Ok(RunReport { pass, summaries })
}
