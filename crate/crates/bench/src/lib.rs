//! Benchmark fixtures shared by the criterion targets.

use secrecy_core::regions::{SourceSpec, SystemSpec};
use secrecy_core::{Channel, DistortionMatrix, Pmf, WiretapChannel};

/// Uniform bit with erasure distortions, BEC(0.3) to Bob and BSC(0.1) to Eve.
pub fn example_system() -> SystemSpec {
    SystemSpec {
        source: SourceSpec {
            pmf: Pmf::uniform(2),
            d_b: DistortionMatrix::erasure(2),
            d_e: DistortionMatrix::erasure(2),
        },
        channel: WiretapChannel::new(Channel::bec(0.3).unwrap(), Channel::bsc(0.1).unwrap())
            .unwrap(),
        gamma: 1.0,
        rk: 0.0,
    }
}

/// `n`-ary symmetric channel with crossover mass `p` spread over the other letters.
pub fn symmetric_channel(n: usize, p: f64) -> Channel {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 1.0 - p } else { p / (n - 1) as f64 })
                .collect()
        })
        .collect();
    Channel::new(&rows).unwrap()
}

/// Geometric-looking source on `n` letters.
pub fn skewed_source(n: usize) -> Pmf {
    let w: Vec<f64> = (0..n).map(|i| 0.7f64.powi(i as i32)).collect();
    let t: f64 = w.iter().sum();
    Pmf::new(w.iter().map(|v| v / t).collect()).unwrap()
}
