use std::path::{Path, PathBuf};
use std::process::Command as Proc;

use kolmo::config::{BoundarySpec, Command, ExperimentConfig, StrategySpec};
use kolmo::{Exponent, GroupPoint};
use proptest::prelude::*;

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("config_cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Runs the binary with `config` as the config file; returns the exit code.
fn kolmo(dir: &Path, command: &str, config: &str, extra: &[&str]) -> (i32, String, String) {
    let cfg = dir.join("in.cfg");
    std::fs::write(&cfg, config).unwrap();
    let out = Proc::new(env!("CARGO_BIN_EXE_kolmo"))
        .arg(command)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn config_errors_exit_with_two() {
    let d = scratch("errors");
    let (code, _, err) = kolmo(&d, "solve", "[solve]\nepsilom = 0.1\n", &[]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("epsilom"));
    // a typo in another command's section is still caught
    assert_eq!(kolmo(&d, "solve", "[play]\nsed = 1\n", &[]).0, 2);
    assert_eq!(kolmo(&d, "play", "[play]\nepisodes = 10\n", &[]).0, 2);
    assert_eq!(kolmo(&d, "solve", "p = 1.5\n", &[]).0, 2);
    assert_eq!(kolmo(&d, "solve", "[bogus]\n", &[]).0, 2);
    assert_eq!(kolmo(&d, "solve", "m = 2\npoint = 0.5;0;0.2\n", &[]).0, 2);
    assert_eq!(kolmo(&d, "mv-check", "profile = nope\n", &[]).0, 2);
    assert_eq!(kolmo(&d, "mv-check", "epsilons = 0.4,0.3,0.2\np = 2\n", &[]).0, 2);
}

#[test]
fn io_errors_exit_with_three() {
    let d = scratch("io");
    std::fs::write(d.join("blocker"), "").unwrap();
    let blocked = d.join("blocker").join("sub");
    let status = Proc::new(env!("CARGO_BIN_EXE_kolmo"))
        .args(["mv-check", "--out"])
        .arg(&blocked)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(3));
    let missing = Proc::new(env!("CARGO_BIN_EXE_kolmo"))
        .args(["solve", "--config"])
        .arg(d.join("absent.cfg"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(3));
}

const SMALL_SOLVE: &str = "[solve]\nepsilon = 0.4\nhorizon = 0.16\nboundary = quadratic_p\np = 3\n";

#[test]
fn solve_thresholds() {
    let d = scratch("solve");
    let (code, out, err) = kolmo(&d, "solve", &format!("{SMALL_SOLVE}max_error = 1\n"), &[]);
    assert_eq!(code, 0, "{out}{err}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("out/solve.json")).unwrap()).unwrap();
    assert_eq!(json["pass"], true);
    assert_eq!(json["rounds"], 2);
    assert!(json["max_error"].as_f64().unwrap() > 0.0);
    assert!(d.join("out/grid.bin").exists());
    let text = std::fs::read_to_string(d.join("out/config.txt")).unwrap();
    let back = ExperimentConfig::from_text(&text, Command::Solve).unwrap();
    assert_eq!(back.epsilon, 0.4);
    assert_eq!(back.max_error, Some(1.0));

    let (code, _, _) = kolmo(&d, "solve", &format!("{SMALL_SOLVE}max_error = 1e-9\n"), &[]);
    assert_eq!(code, 1);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("out/solve.json")).unwrap()).unwrap();
    assert_eq!(json["pass"], false);
}

#[test]
fn mv_check_reports_the_limit() {
    let d = scratch("mv");
    let (code, _, err) = kolmo(&d, "mv-check", "[mv-check]\np = 2\nmax_rel_error = 0.05\n", &[]);
    assert_eq!(code, 0, "{err}");
    let mut r = csv::Reader::from_path(d.join("out/mv_check.csv")).unwrap();
    let h = r.headers().unwrap().clone();
    let col = |name: &str| h.iter().position(|c| c == name).unwrap();
    let (lim, var) = (col("extrapolated_limit"), col("variant"));
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    let mut variants: Vec<String> = rows.iter().map(|r| r[var].to_string()).collect();
    variants.dedup();
    assert_eq!(variants.len(), 4);
    for row in &rows {
        let v: f64 = row[lim].parse().unwrap();
        assert!((v - 1.0 / 3.0).abs() < 0.01, "{row:?}");
    }
}

const SMALL_PLAY: &str = "[play]\nepsilon = 0.2\nhorizon = 0.2\np = 4\nboundary = y_plus_tx\n\
    episodes = 400\nstarts = 0.1;0;0.2 | -0.3;0.2;0.1\nstrategy_1 = pull 1\nstrategy_2 = push 0\nlog_episodes = 3\n";

#[test]
fn play_is_reproducible_across_thread_counts() {
    let a = scratch("play_a");
    let b = scratch("play_b");
    let (ca, _, ea) = kolmo(&a, "play", SMALL_PLAY, &["--seed", "11", "--threads", "1"]);
    let (cb, _, eb) = kolmo(&b, "play", SMALL_PLAY, &["--seed", "11", "--threads", "3"]);
    assert_eq!((ca, cb), (0, 0), "{ea}{eb}");
    for f in ["play.json", "episodes.csv"] {
        let x = std::fs::read(a.join("out").join(f)).unwrap();
        let y = std::fs::read(b.join("out").join(f)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{f} differs");
    }
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("out/play.json")).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 2);
    assert_eq!(json[0]["n"], 400);

    let c = scratch("play_c");
    kolmo(&c, "play", SMALL_PLAY, &["--seed", "12"]);
    assert_ne!(std::fs::read(a.join("out/play.json")).unwrap(), std::fs::read(c.join("out/play.json")).unwrap());
}

#[test]
fn sections_merge_and_override() {
    let text = "m = 1\nepsilon = 0.3\n[solve]\nhorizon = 0.2\n[play]\nseed = 4\n[solve]\nepsilon = 0.25\n";
    let s = ExperimentConfig::from_text(text, Command::Solve).unwrap();
    assert_eq!((s.epsilon, s.horizon), (0.25, 0.2));
    let p = ExperimentConfig::from_text(text, Command::Play).unwrap();
    assert_eq!((p.epsilon, p.seed), (0.3, Some(4)));
    let sw = ExperimentConfig::from_text(text, Command::Sweep).unwrap();
    assert_eq!(sw.horizon, 0.5);
}

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![(2.0..30.0f64).prop_map(Exponent::Finite), Just(Exponent::Infinity)]
}

fn strategy() -> impl Strategy<Value = StrategySpec> {
    prop_oneof![
        Just(StrategySpec::Greedy),
        Just(StrategySpec::Stay),
        (-1.0..1.0f64).prop_map(|z| StrategySpec::Pull(vec![z])),
        (-1.0..1.0f64).prop_map(|z| StrategySpec::Push(vec![z])),
        any::<u64>().prop_map(StrategySpec::Scrambled),
    ]
}

fn boundary() -> impl Strategy<Value = BoundarySpec> {
    prop_oneof![
        (-3.0..3.0f64).prop_map(BoundarySpec::Const),
        ((-2.0..2.0f64), (-1.0..1.0f64)).prop_map(|(a, b)| BoundarySpec::Linear(vec![a], b)),
        Just(BoundarySpec::YPlusTx(None)),
        Just(BoundarySpec::QuadraticP),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_round_trip(
        cmd in prop::sample::select(vec![Command::MvCheck, Command::Solve, Command::Play, Command::Sweep, Command::CrossValidate]),
        p in exponent(),
        eps in 0.01..1.0f64,
        horizon in 0.01..2.0f64,
        seed in any::<u64>(),
        episodes in 2usize..100_000,
        s1 in strategy(),
        s2 in strategy(),
        b in boundary(),
        snap in prop::option::of(0.001..0.1f64),
        start in (-1.0..1.0f64, -1.0..1.0f64, 0.0..1.0f64),
        h in prop::option::of(0.001..0.01f64),
        max_error in prop::option::of(0.0..1.0f64),
        flags in any::<(bool, bool, bool)>(),
    ) {
        let mut c = ExperimentConfig::defaults(cmd, 1);
        c.p = p;
        c.epsilon = eps;
        c.horizon = horizon;
        c.seed = Some(seed);
        c.episodes = episodes;
        c.strategy_1 = s1;
        c.strategy_2 = s2;
        c.boundary = b;
        c.snap = snap;
        c.starts = vec![GroupPoint::scalar(start.0, start.1, start.2), GroupPoint::scalar(0.0, 0.0, 0.1)];
        c.h_x = h;
        c.max_error = max_error;
        c.adversarial = flags.0;
        c.grid_csv = flags.1;
        c.require_agreement = flags.2;
        c.out = PathBuf::from("results/run 1");
        let back = ExperimentConfig::from_text(&c.to_text(), cmd).unwrap();
        prop_assert_eq!(back, c);
    }
}
