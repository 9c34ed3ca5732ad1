//! Composite thermal threat index from external sensing and the in-suit
//! heat-soak rate.

use crate::config::ThreatParams;

/// Normalized threat index Θ ∈ [0, 3]: radiant flux, ambient temperature,
/// and torso heat-soak rate, each clamped to [0, 1].
pub fn thermal_threat(
    q_rad_kw_m2: f64,
    t_ext_c: f64,
    dtorso_dt_c_s: f64,
    p: &ThreatParams,
) -> f64 {
    let a = (q_rad_kw_m2 / p.q_rad_max_kw_m2).clamp(0.0, 1.0);
    let b = (t_ext_c / p.t_ext_max_c).clamp(0.0, 1.0);
    let c = (p.gamma_soak * dtorso_dt_c_s / p.dtorso_rate_max_c_s).clamp(0.0, 1.0);
    a + b + c
}

/// Scarcity multiplier relief under thermal threat: above the threshold the
/// conservation pressure is scaled back to prioritize survival.
pub fn lambda_with_relief(lambda: f64, theta: f64, p: &ThreatParams) -> f64 {
    if theta <= p.relief_threshold {
        return lambda;
    }
    let span = (3.0 - p.relief_threshold).max(1e-9);
    let frac = ((theta - p.relief_threshold) / span).clamp(0.0, 1.0);
    lambda * (1.0 - p.relief_max_frac * frac)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        let p = ThreatParams::default();
        assert_eq!(thermal_threat(0.0, 0.0, 0.0, &p), 0.0);
        let top = thermal_threat(1e4, 1e4, 1.0, &p);
        assert!((top - 3.0).abs() < 1e-12);
    }

    #[test]
    fn mid_scale_sum() {
        let p = ThreatParams::default();
        // 100 of 200 kW/m² plus 250 of 500 °C and zero slope → 1.0.
        let theta = thermal_threat(100.0, 250.0, 0.0, &p);
        assert!((theta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relief_reduces_lambda_monotonically() {
        let p = ThreatParams::default();
        let l0 = 50.0;
        assert_eq!(lambda_with_relief(l0, 0.5, &p), l0);
        let l1 = lambda_with_relief(l0, 1.5, &p);
        let l2 = lambda_with_relief(l0, 2.5, &p);
        assert!(l1 < l0 && l2 < l1);
        let l3 = lambda_with_relief(l0, 3.0, &p);
        assert!((l3 - l0 * (1.0 - p.relief_max_frac)).abs() < 1e-12);
    }
}
