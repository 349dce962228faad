use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use kolmo::domain::{BoundaryDatum, SpatialDomain};
use kolmo::dpp::{solve, SolveConfig};
use kolmo::game::{
    episode_rng, greedy_from_grid, pull_toward, supermartingale_diagnostic, uniform_ball, Coin, Game, GameConfig,
    GreedyMode, LogRow, PushAway, Scrambled, Stay, Strategy, Turn,
};
use kolmo::{Error, Exponent, GroupPoint};
use proptest::prelude::*;

fn game(p: Exponent, eps: f64, payoff: BoundaryDatum, episodes: usize) -> Game {
    Game::new(GameConfig {
        domain: SpatialDomain::interval(-1.0, 1.0).unwrap(),
        horizon: 0.5,
        p,
        epsilon: eps,
        payoff,
        seed: 17,
        episodes,
    })
    .unwrap()
}

/// Counts calls and returns a point far away, which the game must clip.
struct Counting(AtomicUsize);

impl Strategy for Counting {
    fn choose(&self, turn: &Turn) -> kolmo::Result<Vec<f64>> {
        self.0.fetch_add(1, Ordering::Relaxed);
        Ok(turn.x.iter().map(|v| v + 10.0).collect())
    }
    fn descriptor(&self) -> String {
        "counting".into()
    }
}

#[test]
fn strategies_are_never_consulted_at_p_two() {
    let g = game(Exponent::Finite(2.0), 0.1, BoundaryDatum::linear(vec![1.0], 0.0), 500);
    let (a, b) = (Counting(AtomicUsize::new(0)), Counting(AtomicUsize::new(0)));
    g.estimate_value(&GroupPoint::scalar(0.2, 0.0, 0.3), &a, &b).unwrap();
    assert_eq!(a.0.load(Ordering::Relaxed), 0);
    assert_eq!(b.0.load(Ordering::Relaxed), 0);
}

#[test]
fn coin_has_no_noise_at_infinity() {
    let g = game(Exponent::Infinity, 0.1, BoundaryDatum::constant(0.0), 2);
    let mut rng = episode_rng(1, 0);
    let mut counts = [0usize; 3];
    for _ in 0..10_000 {
        match g.draw_coin(&mut rng) {
            Coin::PlayerI => counts[0] += 1,
            Coin::PlayerII => counts[1] += 1,
            Coin::Noise => counts[2] += 1,
        }
    }
    assert_eq!(counts[2], 0);
    assert!((counts[0] as f64 - 5000.0).abs() < 4.0 * 50.0);
}

#[test]
fn moves_are_clipped_to_the_ball() {
    let g = game(Exponent::Finite(3.0), 0.1, BoundaryDatum::constant(0.0), 2);
    let s = g.start(&GroupPoint::scalar(0.2, 0.0, 0.3)).unwrap();
    let far = Counting(AtomicUsize::new(0));
    let next = g.step_with_coin(&s, Coin::PlayerI, &far, &Stay, &mut episode_rng(0, 0)).unwrap();
    assert!((next.x[0] - 0.3).abs() < 1e-15);
    assert_eq!(far.0.load(Ordering::Relaxed), 1);
}

#[test]
fn stay_follows_the_y_recursion() {
    let eps = 0.1;
    let g = game(Exponent::Infinity, eps, BoundaryDatum::y_plus_tx(vec![1.0]), 2);
    let (x0, y0, t0) = (0.3, 0.1, 0.05);
    let mut log: Vec<LogRow> = Vec::new();
    let o = g.run_episode(&GroupPoint::scalar(x0, y0, t0), &Stay, &Stay, &mut episode_rng(2, 0), Some(&mut log)).unwrap();
    assert_eq!(o.tau, 10);
    assert_eq!(o.t, 0.0);
    for (k, row) in log.iter().enumerate() {
        assert_eq!(row.k, k);
        assert_eq!(row.x, vec![x0]);
        assert!((row.y[0] - (y0 + k as f64 * 0.005 * x0)).abs() < 1e-14);
    }
    assert!((o.payoff - (y0 + 10.0 * 0.005 * x0)).abs() < 1e-14);
}

#[test]
fn constant_payoff_has_no_spread() {
    let g = game(Exponent::Finite(3.0), 0.1, BoundaryDatum::constant(2.5), 200);
    let e = g.estimate_value(&GroupPoint::scalar(0.0, 0.0, 0.2), &pull_toward(vec![0.9]), &Stay).unwrap();
    assert_eq!(e.mean, 2.5);
    assert_eq!(e.se, 0.0);
    assert_eq!(e.n, 200);
    assert_eq!(e.tau_histogram.iter().sum::<u64>(), 200);
}

#[test]
fn start_in_collar_or_at_zero_time() {
    let g = game(Exponent::Finite(3.0), 0.1, BoundaryDatum::y_plus_tx(vec![1.0]), 2);
    let s = g.start(&GroupPoint::scalar(-1.04, 0.0, 0.3)).unwrap();
    assert!(s.done);
    assert!(g.start(&GroupPoint::scalar(0.0, 0.0, 0.0)).unwrap().done);
    assert!(matches!(
        g.step(&s, &Stay, &Stay, &mut episode_rng(0, 0)),
        Err(Error::TerminalStep)
    ));
    assert!(g.start(&GroupPoint::scalar(1.2, 0.0, 0.3)).is_err());
    assert!(g.start(&GroupPoint::scalar(0.0, 0.0, 0.7)).is_err());
    let two = GroupPoint::new(vec![0.0, 0.0], vec![0.0, 0.0], 0.1).unwrap();
    assert!(matches!(g.start(&two), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn one_round_linear_payoff_at_p_two() {
    let eps = 0.2;
    let g = game(Exponent::Finite(2.0), eps, BoundaryDatum::linear(vec![1.5], 0.25), 20_000);
    let start = GroupPoint::scalar(0.4, 0.0, 0.5 * eps * eps);
    let e = g.estimate_value(&start, &Stay, &Stay).unwrap();
    assert_eq!(e.tau_histogram, vec![0, 20_000]);
    let want = 1.5 * 0.4 + 0.25;
    assert!((e.mean - want).abs() <= 4.0 * e.se, "{} ± {}", e.mean, e.se);
    // Var(1.5 v), v uniform on (−ε, ε)
    let sd = 1.5 * eps / 3f64.sqrt();
    assert!((e.se * (20_000f64).sqrt() / sd - 1.0).abs() < 0.05);
}

#[test]
fn stopping_rule() {
    let eps = 0.2;
    let g = game(Exponent::Finite(3.0), eps, BoundaryDatum::constant(0.0), 2);
    let start = GroupPoint::scalar(0.7, 0.0, 0.4);
    let n = 20;
    for ep in 0..300 {
        let mut log = Vec::new();
        let o = g
            .run_episode(&start, &pull_toward(vec![1.5]), &Scrambled { seed: 4 }, &mut episode_rng(5, ep), Some(&mut log))
            .unwrap();
        assert!(o.tau <= n);
        assert_eq!(log.len(), o.tau + 1);
        if o.tau < n {
            assert!(g.config.collar().in_x_collar(&o.x), "stopped at {:?}", o.x);
        }
        for row in &log[..o.tau] {
            assert!(!g.config.collar().in_x_collar(&row.x));
        }
        for w in log.windows(2) {
            assert!((w[1].y[0] - w[0].y[0] - 0.5 * eps * eps * w[1].x[0]).abs() < 1e-15);
            assert!((w[0].t - w[1].t - 0.5 * eps * eps).abs() < 1e-12);
            assert!((w[1].x[0] - w[0].x[0]).abs() < eps + 1e-15);
        }
    }
}

#[test]
fn runs_are_reproducible() {
    let g = game(Exponent::Finite(4.0), 0.1, BoundaryDatum::y_plus_tx(vec![1.0]), 300);
    let start = GroupPoint::scalar(0.1, 0.2, 0.3);
    let a = g.run_many(&start, &pull_toward(vec![1.0]), &PushAway { z: vec![0.0] }).unwrap();
    let b = g.run_many(&start, &pull_toward(vec![1.0]), &PushAway { z: vec![0.0] }).unwrap();
    assert_eq!(a, b);
    let mut cfg = g.config.clone();
    cfg.seed += 1;
    let c = Game::new(cfg).unwrap().run_many(&start, &pull_toward(vec![1.0]), &PushAway { z: vec![0.0] }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn greedy_examples() {
    let eps = 0.2;
    let cfg = SolveConfig::new(SpatialDomain::interval(-1.0, 1.0).unwrap(), 0.1, Exponent::Finite(3.0), eps);
    let lin = Arc::new(solve(&cfg, &BoundaryDatum::linear(vec![1.0], 0.0)).unwrap());
    let top = *lin.times.last().unwrap();
    let turn = Turn { x: &[0.1], y: &[0.0], k: 0, t: top, eps };
    let vmax = (0..lin.stencil.len()).map(|i| lin.stencil.point(i)[0]).fold(f64::MIN, f64::max);
    let vmin = (0..lin.stencil.len()).map(|i| lin.stencil.point(i)[0]).fold(f64::MAX, f64::min);
    let hi = greedy_from_grid(lin.clone(), GreedyMode::Maximize, 0.025).unwrap().choose(&turn).unwrap();
    let lo = greedy_from_grid(lin.clone(), GreedyMode::Minimize, 0.025).unwrap().choose(&turn).unwrap();
    assert!((hi[0] - (0.1 + eps * vmax)).abs() < 1e-15);
    assert!((lo[0] - (0.1 + eps * vmin)).abs() < 1e-15);
    assert!(vmax > 0.9 && vmin < -0.9);

    let flat = Arc::new(solve(&cfg, &BoundaryDatum::constant(1.0)).unwrap());
    let pick = greedy_from_grid(flat.clone(), GreedyMode::Maximize, 0.025).unwrap().choose(&turn).unwrap();
    assert_eq!(pick[0], 0.1 + eps * flat.stencil.point(0)[0]);

    assert!(greedy_from_grid(lin.clone(), GreedyMode::Maximize, 0.0).is_err());
    let off = Turn { t: top - 0.001, ..turn };
    assert!(greedy_from_grid(lin, GreedyMode::Maximize, 0.1).unwrap().choose(&off).is_err());
}

#[test]
fn supermartingale_without_noise() {
    let g = game(Exponent::Infinity, 0.1, BoundaryDatum::constant(0.0), 2000);
    let start = GroupPoint::scalar(0.6, 0.0, 0.3);
    let z = [-0.2];
    // against Stay every increment of |X−Z| is ≤ 0 pathwise
    let r = supermartingale_diagnostic(&g, &start, &z, &Stay, 2000, Some(0.0)).unwrap();
    assert_eq!(r.c, 0.0);
    assert!(r.flags_x.is_empty(), "{:?}", r.flags_x);
    assert!(r.flags_y.is_empty(), "{:?}", r.flags_y);
    assert_eq!(r.rounds.len(), 61);
    assert!((r.rounds[0].mean_x - 0.8).abs() < 1e-12);
    for w in r.rounds.windows(2) {
        assert!(w[1].mean_x <= w[0].mean_x + 1e-12);
    }
}

proptest! {
    #[test]
    fn ball_samples_stay_inside(seed in any::<u64>(), m in 1usize..6, r in 0.01..3.0f64) {
        let mut rng = episode_rng(seed, 0);
        for _ in 0..50 {
            let v = uniform_ball(&mut rng, m, r);
            prop_assert_eq!(v.len(), m);
            prop_assert!(v.iter().map(|c| c * c).sum::<f64>().sqrt() < r);
        }
    }
}
