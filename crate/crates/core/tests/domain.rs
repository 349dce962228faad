use kolmo::domain::{
    classify_kolmogorov, classify_parabolic, mcshane_extend, sample_collar_point, verify_g_eps_lipschitz, BoundaryDatum,
    KolmogorovPart, ParabolicCollar, ParabolicRegion, SpatialDomain,
};
use kolmo::geometry::d_hat;
use kolmo::{Error, Exponent, GroupPoint};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn disk() -> SpatialDomain {
    SpatialDomain::ball(vec![0.0, 0.0], 1.0).unwrap()
}

#[test]
fn ball_geometry() {
    let d = disk();
    assert_eq!(d.signed_distance(&[0.0, 0.5]), -0.5);
    assert_eq!(d.signed_distance(&[0.0, 2.0]), 1.0);
    assert_eq!(d.outward_normal(&[0.0, 2.0]), vec![0.0, 1.0]);
    assert!(d.on_boundary(&[0.6, 0.8]));
    assert!(!d.contains(&[0.6, 0.8]));
    assert_eq!(d.r_constant(), 1.0);
    assert!(SpatialDomain::ball(vec![0.0], 0.0).is_err());
    assert!(SpatialDomain::cube(vec![0.0, 0.0], vec![1.0]).is_err());
    assert!(SpatialDomain::interval(1.0, 0.0).is_err());
}

#[test]
fn parabolic_labels_on_a_disk() {
    let c = ParabolicCollar::new(disk(), 0.2, 1.0).unwrap();
    let lab = |x: [f64; 2], t| classify_parabolic(&GroupPoint::new(x.to_vec(), vec![5.0, -3.0], t).unwrap(), &c);
    assert_eq!(lab([0.0, 0.0], 0.5), ParabolicRegion::Interior);
    assert_eq!(lab([0.0, 0.0], 1.0), ParabolicRegion::Interior);
    assert_eq!(lab([0.0, 0.0], 1.01), ParabolicRegion::Outside);
    assert_eq!(lab([0.0, 0.0], 0.0), ParabolicRegion::InitialCollar);
    assert_eq!(lab([0.0, 0.0], -0.019), ParabolicRegion::InitialCollar);
    assert_eq!(lab([0.0, 0.0], -0.02), ParabolicRegion::Outside);
    assert_eq!(lab([1.1, 0.0], 0.5), ParabolicRegion::LateralCollar);
    assert_eq!(lab([1.1, 0.0], -0.01), ParabolicRegion::LateralCollar);
    assert_eq!(lab([0.8, 0.8], 0.5), ParabolicRegion::LateralCollar);
    assert_eq!(lab([1.0, 1.0], 0.5), ParabolicRegion::Outside);
    assert!(ParabolicCollar::new(disk(), 0.0, 1.0).is_err());
}

#[test]
fn kolmogorov_labels_on_a_disk() {
    let (ux, uy) = (disk(), disk());
    let lab = |x: [f64; 2], y: [f64; 2], t| {
        classify_kolmogorov(&GroupPoint::new(x.to_vec(), y.to_vec(), t).unwrap(), &ux, &uy, 1.0)
    };
    assert_eq!(lab([0.0, 0.0], [0.0, 0.0], 0.5).unwrap(), KolmogorovPart::Interior);
    assert_eq!(lab([0.6, 0.8], [0.0, 0.0], 0.5).unwrap(), KolmogorovPart::LateralX);
    assert_eq!(lab([0.6, 0.8], [0.0, 0.0], 0.0).unwrap(), KolmogorovPart::LateralX);
    assert_eq!(lab([0.0, 0.5], [0.0, 1.0], 0.5).unwrap(), KolmogorovPart::OutflowY);
    assert_eq!(lab([0.0, -0.5], [0.0, 1.0], 0.5).unwrap(), KolmogorovPart::CharacteristicY);
    // tangential transport is characteristic
    assert_eq!(lab([0.5, 0.0], [0.0, 1.0], 0.5).unwrap(), KolmogorovPart::CharacteristicY);
    assert_eq!(lab([0.1, 0.1], [0.2, 0.2], 0.0).unwrap(), KolmogorovPart::Initial);
    assert_eq!(lab([0.6, 0.8], [0.0, 0.0], 1.0).unwrap(), KolmogorovPart::Other);
    assert!(matches!(lab([0.0, 0.0], [0.0, 2.0], 0.5), Err(Error::OutsideClosure(_))));
    assert!(lab([0.0, 0.0], [0.0, 0.0], -0.1).is_err());
    assert!(lab([0.0, 0.0], [0.0, 0.0], 1.1).is_err());
}

#[test]
fn closed_form_data() {
    let g = GroupPoint::new(vec![0.5, -1.0], vec![2.0, 3.0], 0.25).unwrap();
    assert_eq!(BoundaryDatum::constant(-2.0).value(&g), -2.0);
    assert_eq!(BoundaryDatum::linear(vec![2.0, 1.0], 0.5).value(&g), 0.5);
    assert_eq!(BoundaryDatum::y_plus_tx(vec![0.0, 1.0]).value(&g), 3.0 - 0.25);
    // m = 1, p = 3 gives coefficient 1; at p = ∞ it is 2
    let h = GroupPoint::scalar(0.5, 0.0, 0.2);
    assert!((BoundaryDatum::quadratic_p(1, Exponent::Finite(3.0)).value(&h) - 0.45).abs() < 1e-15);
    assert!((BoundaryDatum::quadratic_p(1, Exponent::Infinity).value(&h) - 0.65).abs() < 1e-15);
    assert!((BoundaryDatum::quadratic_p(1, Exponent::Finite(2.0)).value(&h) - (0.25 + 0.2 * 2.0 / 3.0)).abs() < 1e-15);
}

#[test]
fn lipschitz_checks() {
    let c = ParabolicCollar::new(disk(), 0.1, 0.5).unwrap();
    let lin = BoundaryDatum::linear(vec![0.6, 0.8], 0.0);
    let r = verify_g_eps_lipschitz(&lin, &c, 3000, 7).unwrap();
    assert!(r > 0.5 && r <= 1.0 + 1e-12, "{r}");
    assert_eq!(verify_g_eps_lipschitz(&BoundaryDatum::constant(1.0), &c, 100, 7).unwrap(), 0.0);
    assert!(verify_g_eps_lipschitz(&lin, &c, 1, 7).is_err());
}

fn point() -> impl Strategy<Value = GroupPoint> {
    (-2.0..2.0f64, -2.0..2.0f64, -0.1..0.7f64).prop_map(|(x, y, t)| GroupPoint::scalar(x, y, t))
}

proptest! {
    #[test]
    fn parabolic_labels_are_consistent(g in point(), y2 in -9.0..9.0f64) {
        let c = ParabolicCollar::new(SpatialDomain::interval(-1.0, 1.0).unwrap(), 0.2, 0.5).unwrap();
        let label = classify_parabolic(&g, &c);
        let s = c.domain.signed_distance(&g.x);
        match label {
            ParabolicRegion::Interior => prop_assert!(s < 0.0 && g.t > 0.0 && g.t <= 0.5),
            ParabolicRegion::LateralCollar => prop_assert!(s >= 0.0 && s <= 0.2 + 1e-9 && g.t > -0.02 && g.t <= 0.5),
            ParabolicRegion::InitialCollar => prop_assert!(s < 0.0 && g.t > -0.02 && g.t <= 0.0),
            ParabolicRegion::Outside => prop_assert!(s > 0.2 || g.t > 0.5 || g.t <= -0.02 || (s >= 0.0 && g.t <= -0.02)),
        }
        // Y plays no part
        let moved = GroupPoint::scalar(g.x[0], y2, g.t);
        prop_assert_eq!(classify_parabolic(&moved, &c), label);
    }

    #[test]
    fn collar_samples_are_in_the_collar(seed in any::<u64>()) {
        let c = ParabolicCollar::new(disk(), 0.15, 0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let g = sample_collar_point(&mut rng, &c, 1.0);
            let l = classify_parabolic(&g, &c);
            prop_assert!(matches!(l, ParabolicRegion::LateralCollar | ParabolicRegion::InitialCollar), "{:?} {}", l, g);
        }
    }

    #[test]
    fn mcshane_is_an_extension(seed in any::<u64>(), probes in prop::collection::vec((point(), point()), 10)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = ParabolicCollar::new(SpatialDomain::interval(-1.0, 1.0).unwrap(), 0.2, 0.5).unwrap();
        let samples: Vec<(GroupPoint, f64)> = (0..30)
            .map(|_| {
                let g = sample_collar_point(&mut rng, &c, 1.0);
                let v = (0.5 * g.x[0] + 0.3 * g.y[0]).clamp(-0.4, 0.4);
                (g, v)
            })
            .collect();
        let l = 1.0;
        let ext = mcshane_extend(samples.clone(), l).unwrap();
        for (g, v) in &samples {
            prop_assert!((ext.eval(g) - v).abs() < 1e-12);
        }
        for (a, b) in &probes {
            let ea = ext.eval(a);
            prop_assert!(ea.abs() <= ext.bound());
            prop_assert!((ea - ext.eval(b)).abs() <= l * d_hat(a, b).unwrap() + 1e-12);
        }
    }
}
