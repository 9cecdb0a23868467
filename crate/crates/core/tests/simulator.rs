use secrecy_core::regions::{GaussianSpec, SourceSpec, SystemSpec};
use secrecy_core::sim::{
    gaussian_uncoded_run, AttackSpec, AttackStrategy, Auxiliary, RunConfig, SeparateScheme,
    DEFAULT_MEMORY_CAP,
};
use secrecy_core::{Channel, DistortionMatrix, Pmf, WiretapChannel};

fn example(rk: f64) -> SystemSpec {
    SystemSpec {
        source: SourceSpec {
            pmf: Pmf::uniform(2),
            d_b: DistortionMatrix::erasure(2),
            d_e: DistortionMatrix::erasure(2),
        },
        channel: WiretapChannel::new(Channel::bec(0.3).unwrap(), Channel::bsc(0.1).unwrap())
            .unwrap(),
        gamma: 1.0,
        rk,
    }
}

fn erasure(delta: f64) -> Channel {
    Channel::new(&[vec![1.0 - delta, 0.0, delta], vec![0.0, 1.0 - delta, delta]]).unwrap()
}

#[test]
fn report_has_one_sample_per_trial_everywhere() {
    let sc = SeparateScheme::new(
        &example(0.5),
        &erasure(0.4),
        &Auxiliary::single_layer(Pmf::uniform(2)),
        0.05,
        8,
        3,
        DEFAULT_MEMORY_CAP,
    )
    .unwrap();
    let attacks = vec![
        AttackSpec {
            strategy: AttackStrategy::GreedyList,
            rate: 0.25,
        },
        AttackSpec {
            strategy: AttackStrategy::RdCodebookIgnoreZ,
            rate: 0.25,
        },
        AttackSpec {
            strategy: AttackStrategy::KeyExhaust,
            rate: 0.25,
        },
    ];
    let rep = sc
        .run(&RunConfig {
            trials: 64,
            seed: 2,
            attacks,
            de: 0.3,
            posterior_samples: 32,
        })
        .unwrap();
    assert_eq!(rep.legit_distortion_samples.len(), 64);
    assert_eq!(rep.wiretap_distortion_samples.len(), 3);
    assert!(rep
        .wiretap_distortion_samples
        .values()
        .all(|v| v.len() == 64));
    assert_eq!(rep.pad_counts.as_ref().unwrap().iter().sum::<u64>(), 64);
    assert_eq!(rep.summary().len(), 3);
}

#[test]
fn seeds_fix_the_whole_run() {
    let build = |seed| {
        SeparateScheme::new(
            &example(0.0),
            &erasure(0.4),
            &Auxiliary::single_layer(Pmf::uniform(2)),
            0.05,
            10,
            seed,
            DEFAULT_MEMORY_CAP,
        )
        .unwrap()
    };
    let cfg = RunConfig {
        trials: 50,
        seed: 4,
        ..RunConfig::default()
    };
    assert_eq!(
        build(1).run(&cfg).unwrap().legit_distortion_samples,
        build(1).run(&cfg).unwrap().legit_distortion_samples
    );
    assert_ne!(build(1).codebook, build(2).codebook);
}

#[test]
fn gaussian_full_power_meets_the_mmse_limit() {
    let g = GaussianSpec {
        ns: 1.0,
        p: 1.0,
        nb: 0.2,
        ne: 0.8,
        gamma: 1.0,
        rk: 0.5,
    };
    let run = gaussian_uncoded_run(&g, 1.0, 4000, 10, 5, None).unwrap();
    assert!(
        (run.mean_legit() - 1.0 / 6.0).abs() < 0.01,
        "{}",
        run.mean_legit()
    );
    assert!(
        (run.mean_wiretap() - 0.8 / 1.8).abs() < 0.02,
        "{}",
        run.mean_wiretap()
    );
    let coarse = gaussian_uncoded_run(&g, 1.0, 4000, 10, 5, Some(0.5)).unwrap();
    assert!(coarse.mean_legit() > run.mean_legit());
}
