use super::{CapacityResult, SolverOptions};
use crate::error::Result;
use crate::prob::{kl_divergence, Channel, Pmf};

/// Blahut-Arimoto capacity iteration.
///
/// Stops once `max_x D(W_x || q) - I(p, W)` falls below the tolerance; that
/// difference bounds the distance to capacity from above.
pub fn channel_capacity(ch: &Channel, opts: &SolverOptions) -> Result<CapacityResult> {
    opts.validate()?;
    let n = ch.inputs();
    let mut p = vec![1.0 / n as f64; n];
    let mut divs = vec![0.0; n];
    let mut iterations = 0;
    let mut gap = f64::INFINITY;
    let mut info = 0.0;
    while iterations < opts.max_iterations {
        let q = ch.output_masses(&p);
        for (x, dx) in divs.iter_mut().enumerate() {
            *dx = kl_divergence(ch.row(x), &q);
        }
        info = p
            .iter()
            .zip(&divs)
            .map(|(a, b)| if *a > 0.0 { a * b } else { 0.0 })
            .sum();
        let upper = divs.iter().copied().fold(0.0, f64::max);
        gap = (upper - info).max(0.0);
        iterations += 1;
        if gap < opts.tolerance {
            break;
        }
        let mx = upper;
        let mut total = 0.0;
        for (px, dx) in p.iter_mut().zip(&divs) {
            *px *= (dx - mx).exp2();
            total += *px;
        }
        for px in p.iter_mut() {
            *px /= total;
        }
    }
    let tail: f64 = p[1..].iter().sum();
    p[0] = (1.0 - tail).max(0.0);
    Ok(CapacityResult {
        capacity: info.max(0.0),
        achieving_input: Pmf::new(p)?,
        iterations,
        gap_bound: gap,
        converged: gap < opts.tolerance,
    })
}
