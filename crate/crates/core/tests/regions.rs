use proptest::prelude::*;
use secrecy_core::regions::{
    gaussian_max_rl, gaussian_uncoded_max_rl, max_rl, region_contains, sweep_curve, Axis,
    BoundKind, DmEngine, GaussianSpec, RegionQuery, RegionSearch, SourceSpec, SystemSpec, Target,
};
use secrecy_core::{Channel, DistortionMatrix, Pmf, WiretapChannel};

fn gaussian(ne: f64, rk: f64) -> GaussianSpec {
    GaussianSpec {
        ns: 1.0,
        p: 1.0,
        nb: 0.2,
        ne,
        gamma: 1.0,
        rk,
    }
}

fn bsc_system(pb: f64, pe: f64, rk: f64) -> SystemSpec {
    SystemSpec {
        source: SourceSpec {
            pmf: Pmf::uniform(2),
            d_b: DistortionMatrix::hamming(2),
            d_e: DistortionMatrix::hamming(2),
        },
        channel: WiretapChannel::new(Channel::bsc(pb).unwrap(), Channel::bsc(pe).unwrap()).unwrap(),
        gamma: 1.0,
        rk,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gaussian_value_is_monotone(ne in 0.05f64..5.0, rk in 0.0f64..2.0, db in 0.17f64..1.0, de in 0.01f64..1.0, step in 0.001f64..0.2) {
        let g = gaussian(ne, rk);
        let v = gaussian_max_rl(&g, db, de).unwrap();
        prop_assert!(gaussian_max_rl(&g, db, de + step).unwrap() <= v + 1e-12);
        prop_assert!(gaussian_max_rl(&g, db + step, de).unwrap() >= v - 1e-12);
        prop_assert!(gaussian_max_rl(&gaussian(ne, rk + step), db, de).unwrap() >= v - 1e-12);
        prop_assert!(gaussian_max_rl(&gaussian(ne + step, rk), db, de).unwrap() >= v - 1e-12);
        prop_assert!(gaussian_uncoded_max_rl(&g, db, de).unwrap() <= v + 1e-9);
    }

    #[test]
    fn containment_matches_the_bound(ne in 0.05f64..5.0, rl in 0.0f64..2.0, de in 0.01f64..1.0) {
        let g = gaussian(ne, 0.5);
        let q = RegionQuery { rl, db: 0.3, de };
        let v = max_rl(BoundKind::GaussianExact, Target::Gaussian(&g), &q, &RegionSearch::default()).unwrap();
        let inside = region_contains(BoundKind::GaussianExact, Target::Gaussian(&g), &q, &RegionSearch::default());
        prop_assert_eq!(inside, rl <= v + 1e-12);
    }
}

#[test]
fn discrete_bounds_are_sandwiched_on_bsc_pairs() {
    let search = RegionSearch::default();
    for (pb, pe, rk) in [(0.05, 0.2, 0.0), (0.1, 0.1, 0.1), (0.2, 0.05, 0.0)] {
        let sys = bsc_system(pb, pe, rk);
        let e = DmEngine::new(&sys, &search).unwrap();
        for (db, de) in [(0.2, 0.1), (0.3, 0.25)] {
            let b = e.lossy_bounds(db, de, true).unwrap();
            let unc = e.unc(db, de).unwrap_or(0.0);
            assert!(
                b.sep.max(unc) <= b.outer + 3e-3,
                "{pb} {pe} {db} {de}: {b:?} {unc}"
            );
            // degraded BSC pair: the bounds meet
            if pe >= pb {
                assert!((b.sep - b.outer).abs() <= 3e-3);
            }
        }
    }
}

#[test]
fn key_rate_sweep_is_nondecreasing() {
    let sys = bsc_system(0.05, 0.2, 0.0);
    let base = RegionQuery {
        rl: 0.0,
        db: 0.2,
        de: 0.1,
    };
    let grid = [0.0, 0.1, 0.2, 0.4];
    let curve = sweep_curve(
        BoundKind::InnerSep,
        Target::Dm(&sys),
        Axis::RK,
        &grid,
        &base,
        &RegionSearch::default(),
    )
    .unwrap();
    assert_eq!(curve.samples.len(), grid.len());
    assert!(curve.samples.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12));
}
