use kolmo::domain::{BoundaryDatum, SpatialDomain};
use kolmo::dpp::{compare, fixed_point_residual, read_binary, solve, solve_by_sweeps, time_ladder, Comparison, SolveConfig, ValueGrid};
use kolmo::{Error, Exponent};
use proptest::prelude::*;

fn small(p: Exponent) -> SolveConfig {
    SolveConfig::new(SpatialDomain::interval(-1.0, 1.0).unwrap(), 0.1, p, 0.2)
}

fn bumpy() -> BoundaryDatum {
    BoundaryDatum::from_fn("bumpy", |x, y, t| (3.0 * x[0] + y[0]).sin() * (1.0 - t) + 0.5 * (2.0 * x[0]).cos())
        .with_bound(1.5)
}

fn exponents() -> [Exponent; 3] {
    [Exponent::Finite(2.0), Exponent::Finite(3.0), Exponent::Infinity]
}

#[test]
fn constant_data_gives_constant_solution() {
    for p in exponents() {
        let g = solve(&small(p), &BoundaryDatum::constant(0.75)).unwrap();
        for slice in &g.slices {
            assert!(slice.iter().all(|v| (v - 0.75).abs() < 1e-12));
        }
    }
}

#[test]
fn linear_and_y_plus_tx_are_reproduced() {
    for p in exponents() {
        let lin = solve(&small(p), &BoundaryDatum::linear(vec![0.8], -0.1)).unwrap();
        assert!(lin.max_error(|x, _, _| 0.8 * x[0] - 0.1, false) < 1e-12, "p={p}");
        let ytx = solve(&small(p), &BoundaryDatum::y_plus_tx(vec![1.0])).unwrap();
        assert!(ytx.max_error(|x, y, t| y[0] + t * x[0], true) < 1e-12, "p={p}");
    }
}

#[test]
fn apply_t_examples() {
    let cfg = small(Exponent::Finite(3.0));
    let lin = ValueGrid::initialized(&cfg, &BoundaryDatum::linear(vec![2.0], 0.0), 0.0).unwrap();
    let mut lin = lin;
    let s = lin.times.len() - 1;
    lin.fill_slice(s - 1, |x, _, _| 2.0 * x[0]).unwrap();
    let targets = vec![(vec![0.1], vec![0.0]), (vec![-0.4], vec![0.3]), (vec![0.9], vec![-0.2])];
    let out = lin.apply_t(s, &lin.slices[s - 1], &targets).unwrap();
    for ((x, _), v) in targets.iter().zip(&out) {
        assert!((v - 2.0 * x[0]).abs() < 1e-12);
    }

    let mut ytx = ValueGrid::initialized(&cfg, &BoundaryDatum::y_plus_tx(vec![1.0]), 0.0).unwrap();
    ytx.fill_slice(s - 1, |x, y, t| y[0] + t * x[0]).unwrap();
    let t = ytx.times[s];
    let out = ytx.apply_t(s, &ytx.slices[s - 1], &targets).unwrap();
    for ((x, y), v) in targets.iter().zip(&out) {
        assert!((v - (y[0] + t * x[0])).abs() < 1e-12);
    }
    // outside the domain the datum comes back untouched
    let out = ytx.apply_t(s, &ytx.slices[s - 1], &[(vec![1.1], vec![0.2])]).unwrap();
    assert_eq!(out[0], 0.2 + t * 1.1);
    assert!(ytx.apply_t(0, &ytx.slices[0], &targets).is_err());
    let far = ytx.apply_t(s, &ytx.slices[s - 1], &[(vec![0.0], vec![50.0])]);
    assert!(matches!(far, Err(Error::OutOfGrid(_))));
}

#[test]
fn collar_nodes_copy_the_datum() {
    let datum = bumpy();
    let g = solve(&small(Exponent::Finite(4.0)), &datum).unwrap();
    let m = g.m();
    let (mut x, mut y) = (vec![0.0; m], vec![0.0; m]);
    let mut seen = 0;
    for (s, slice) in g.slices.iter().enumerate() {
        for (idx, v) in slice.iter().enumerate() {
            if !g.node_is_interior(s, idx) {
                g.axes.node(idx, &mut x, &mut y);
                assert_eq!(v.to_bits(), datum.eval(&x, &y, g.times[s]).to_bits());
                seen += 1;
            }
        }
    }
    assert!(seen > 0);
}

#[test]
fn bounded_data_bound_the_solution() {
    for p in exponents() {
        let g = solve(&small(p), &bumpy()).unwrap();
        let worst = g.slices.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(worst <= 1.5 + 1e-12, "p={p}: {worst}");
    }
}

#[test]
fn sweeps_forget_the_initial_guess() {
    let cfg = small(Exponent::Finite(3.0));
    let datum = bumpy();
    let direct = solve(&cfg, &datum).unwrap();
    let n = direct.rounds();
    let a = solve_by_sweeps(&cfg, &datum, 0.0, n).unwrap();
    let b = solve_by_sweeps(&cfg, &datum, 1e6, n).unwrap();
    for s in 0..a.times.len() {
        for ((u, v), w) in a.slices[s].iter().zip(&b.slices[s]).zip(&direct.slices[s]) {
            assert_eq!(u.to_bits(), v.to_bits());
            assert_eq!(u.to_bits(), w.to_bits());
        }
    }
    // one sweep short, the top slice still remembers the guess
    let c = solve_by_sweeps(&cfg, &datum, 1e6, n - 1).unwrap();
    assert!(matches!(compare(&a, &c).unwrap(), Comparison::Incomparable(_)));
    assert!(fixed_point_residual(&direct).unwrap() < 1e-14);
    assert!(fixed_point_residual(&c).unwrap() > 1.0);
}

#[test]
fn comparison_and_monotonicity() {
    let cfg = small(Exponent::Infinity);
    let lo = solve(&cfg, &bumpy()).unwrap();
    let hi = solve(&cfg, &bumpy().shifted(0.25)).unwrap();
    assert_eq!(compare(&hi, &lo).unwrap(), Comparison::Dominates);
    assert_eq!(compare(&lo, &lo).unwrap(), Comparison::Dominates);
    match compare(&lo, &hi).unwrap() {
        Comparison::Incomparable(w) => {
            assert!(w.a < w.b);
            assert_eq!(w.slice, 0);
        }
        Comparison::Dominates => panic!("lower data cannot dominate"),
    }
    // the shift passes through exactly up to round-off
    let d = lo.slices.iter().flatten().zip(hi.slices.iter().flatten()).fold(0.0f64, |a, (u, v)| a.max((v - u - 0.25).abs()));
    assert!(d < 1e-12);

    let other = solve(&SolveConfig::new(SpatialDomain::interval(-1.0, 1.0).unwrap(), 0.2, Exponent::Infinity, 0.2), &bumpy()).unwrap();
    assert!(matches!(compare(&lo, &other), Err(Error::GeometryMismatch)));
}

#[test]
fn binary_and_csv_round_trip() {
    let g = solve(&small(Exponent::Infinity), &bumpy()).unwrap();
    let mut buf = Vec::new();
    g.write_binary(&mut buf).unwrap();
    let d = read_binary(&buf[..]).unwrap();
    assert_eq!(d.p, -1.0);
    assert_eq!(d.epsilon, 0.2);
    assert_eq!(d.axes, g.axes);
    assert_eq!(d.times, g.times);
    assert_eq!(d.slices, g.slices);
    assert!(read_binary(&buf[..buf.len() - 1]).is_err());

    let top = g.times.len() - 1;
    let mut csv_buf = Vec::new();
    g.write_csv(&mut csv_buf, &[top]).unwrap();
    let mut r = csv::Reader::from_reader(&csv_buf[..]);
    assert_eq!(r.headers().unwrap(), vec!["t", "x1", "y1", "value"]);
    let rows: Vec<csv::StringRecord> = r.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), g.axes.len());
    for (row, v) in rows.iter().zip(&g.slices[top]) {
        assert_eq!(row[3].parse::<f64>().unwrap(), *v);
        assert_eq!(row[0].parse::<f64>().unwrap(), g.times[top]);
    }
}

#[test]
fn bad_configs_are_rejected() {
    let mut cfg = small(Exponent::Finite(1.5));
    assert!(matches!(solve(&cfg, &bumpy()), Err(Error::Config { .. })));
    cfg.p = Exponent::Finite(2.0);
    cfg.h_x = 0.1;
    assert!(matches!(solve(&cfg, &bumpy()), Err(Error::Config { .. })));
}

#[test]
fn value_lookup() {
    let g = solve(&small(Exponent::Finite(2.0)), &BoundaryDatum::y_plus_tx(vec![1.0])).unwrap();
    let top = *g.times.last().unwrap();
    assert_eq!(g.slice_index(top).unwrap(), g.times.len() - 1);
    assert!(g.slice_index(top - 0.001).is_err());
    let v = g.value_at(&[0.3], &[0.1], top).unwrap();
    assert!((v - (0.1 + top * 0.3)).abs() < 1e-12);
    // outside U_X the datum is returned directly
    assert_eq!(g.value_at(&[1.15], &[0.1], top).unwrap(), 0.1 + top * 1.15);
}

proptest! {
    #[test]
    fn ladder_shape(t in 0.0..3.0f64, eps in 0.05..1.0f64) {
        let (n, ts) = time_ladder(t, eps).unwrap();
        let step = 0.5 * eps * eps;
        prop_assert_eq!(ts.len(), n + 1);
        prop_assert_eq!(ts[0], t);
        prop_assert!(ts[n] <= 1e-9 && ts[n] > -step);
        for w in ts.windows(2) {
            prop_assert!((w[0] - w[1] - step).abs() < 1e-9);
        }
    }
}
