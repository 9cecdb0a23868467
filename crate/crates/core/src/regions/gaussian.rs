use super::{log2_plus, GaussianSpec};
use crate::error::{Error, Result};

fn check_distortions(db: f64, de: f64) -> Result<()> {
    if !(db >= 0.0) || !(de > 0.0) || !db.is_finite() || !de.is_finite() {
        return Err(Error::OutOfRange(format!(
            "need D_B ≥ 0 and D_E > 0, got D_B={db}, D_E={de}"
        )));
    }
    Ok(())
}

/// Exact maximal list rate for the Gaussian system.
pub fn gaussian_max_rl(g: &GaussianSpec, db: f64, de: f64) -> Result<f64> {
    g.validate()?;
    check_distortions(db, de)?;
    let floor = g.ns / (1.0 + g.p / g.nb).powf(g.gamma);
    if db < floor - 1e-12 {
        return Err(Error::Infeasible(format!(
            "D_B = {db} is below the attainable {floor}"
        )));
    }
    let wiretap = 0.5 * g.gamma * log2_plus((1.0 + g.p / g.nb) / (1.0 + g.p / g.ne));
    let secrecy = g.rk + wiretap + 0.5 * log2_plus(db / de);
    Ok(secrecy.min(0.5 * log2_plus(g.ns / de)))
}

/// Uncoded scheme `X = a S`: the list rate at transmit power `p_used`.
fn uncoded_value(g: &GaussianSpec, p_used: f64, de: f64) -> f64 {
    let residual = g.ns * g.ne / (p_used + g.ne);
    (g.rk + 0.5 * log2_plus(residual / de)).min(0.5 * log2_plus(g.ns / de))
}

/// Uncoded (scaled source) inner bound; defined for one channel use per source letter.
pub fn gaussian_uncoded_max_rl(g: &GaussianSpec, db: f64, de: f64) -> Result<f64> {
    g.validate()?;
    check_distortions(db, de)?;
    if (g.gamma - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "the uncoded Gaussian scheme needs gamma = 1, got {}",
            g.gamma
        )));
    }
    let best_db = g.ns * g.nb / (g.p + g.nb);
    if best_db > db + 1e-12 {
        return Err(Error::Infeasible(format!(
            "D_B = {db} is below the uncoded MMSE {best_db}"
        )));
    }
    // Eve's residual variance only grows as power drops, so the least power meeting D_B wins.
    let p_min = if db > 0.0 {
        (g.ns * g.nb / db - g.nb).clamp(0.0, g.p)
    } else {
        g.p
    };
    let analytic = uncoded_value(g, p_min, de);
    let scan = (0..=1000)
        .map(|i| p_min + (g.p - p_min) * i as f64 / 1000.0)
        .map(|pp| uncoded_value(g, pp, de))
        .fold(f64::NEG_INFINITY, f64::max);
    if scan > analytic + 1e-9 {
        return Err(Error::SolverFault(format!(
            "power scan {scan} beats the analytic optimum {analytic}"
        )));
    }
    Ok(analytic)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig(ne: f64) -> GaussianSpec {
        GaussianSpec {
            ns: 1.0,
            p: 1.0,
            nb: 0.2,
            ne,
            gamma: 1.0,
            rk: 0.5,
        }
    }

    #[test]
    fn closed_form_reference_point() {
        let v = gaussian_max_rl(&fig(0.8), 1.0 / 6.0, 0.1).unwrap();
        let hand = 0.5 + 0.5 * (6.0f64 / 2.25).log2() + 0.5 * (10.0f64 / 6.0).log2();
        assert!((v - hand).abs() < 1e-12);
        assert!((v - 1.57601).abs() < 1e-5, "{v}");
    }

    #[test]
    fn uncoded_reference_point() {
        // D_B at the channel limit with N_E ≥ N_B: the uncoded scheme is optimal there.
        let v = gaussian_uncoded_max_rl(&fig(0.8), 1.0 / 6.0, 0.1).unwrap();
        let hand = 0.5 + 0.5 * (0.8f64 / (0.1 * 1.8)).log2();
        assert!((v - hand).abs() < 1e-12);
        assert!((v - 1.57600).abs() < 1e-5, "{v}");
        assert!((v - gaussian_max_rl(&fig(0.8), 1.0 / 6.0, 0.1).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn weak_eavesdropper_gets_source_rate() {
        let g = fig(1.0 / (2f64.powf(1.0) - 1.0) + 0.5);
        let v = gaussian_max_rl(&g, 1.0 / 6.0, 0.1).unwrap();
        assert!((v - 0.5 * 10f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn stronger_eavesdropper_removes_wiretap_term() {
        for ne in [0.05, 0.1, 0.2] {
            let v = gaussian_max_rl(&fig(ne), 0.3, 0.1).unwrap();
            let expect = (0.5 + 0.5 * 3f64.log2()).min(0.5 * 10f64.log2());
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn infeasible_below_channel_limit() {
        assert!(gaussian_max_rl(&fig(0.8), 0.16, 0.1)
            .unwrap_err()
            .is_infeasible());
        assert!(gaussian_uncoded_max_rl(&fig(0.8), 0.16, 0.1)
            .unwrap_err()
            .is_infeasible());
        assert!(gaussian_max_rl(&fig(0.8), 1.0, 1.0).unwrap() == 0.0);
    }

    #[test]
    fn boundary_forces_full_power() {
        let g = fig(0.8);
        let v = gaussian_uncoded_max_rl(&g, 1.0 / 6.0, 0.05).unwrap();
        assert!((v - uncoded_value(&g, 1.0, 0.05)).abs() < 1e-12);
    }

    #[test]
    fn uncoded_needs_unit_bandwidth() {
        let g = GaussianSpec {
            gamma: 2.0,
            ..fig(0.8)
        };
        assert!(matches!(
            gaussian_uncoded_max_rl(&g, 0.3, 0.1),
            Err(Error::Config(_))
        ));
    }
}
