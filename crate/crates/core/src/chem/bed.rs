//! Packed-bed flow resistance (Ergun) and the reaction-driven swelling that
//! closes the void fraction over the sorbent's life.

use super::ChemError;

/// Ergun pressure drop per unit length [Pa/m] for superficial velocity
/// `v_s` [m/s] through a bed of particles `d_p` [m] at void fraction `eps`.
pub fn ergun_dp_per_length(
    mu: f64,
    eps: f64,
    d_p: f64,
    v_s: f64,
    rho: f64,
) -> Result<f64, ChemError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(ChemError::domain("eps", eps, "in (0, 1)"));
    }
    if d_p <= 0.0 {
        return Err(ChemError::domain("d_p", d_p, "> 0"));
    }
    let viscous = 150.0 * mu * (1.0 - eps).powi(2) / (eps.powi(3) * d_p * d_p) * v_s;
    let inertial = 1.75 * rho * (1.0 - eps) / (eps.powi(3) * d_p) * v_s * v_s;
    Ok(viscous + inertial)
}

/// Ratio of the Ergun viscous term (1−ε)²/ε³ at `eps` to its value at
/// `eps_ref`; how much the flow resistance has grown as voids close.
pub fn viscous_resistance_ratio(eps: f64, eps_ref: f64) -> f64 {
    let term = |e: f64| (1.0 - e).powi(2) / e.powi(3);
    term(eps.max(1e-6)) / term(eps_ref)
}

/// Effective swelling ratio σ(χ_w) = (36.9 + 18.0 χ_w)/33.0 of the
/// solid-plus-retained-liquid volume per mole reacted.
pub fn swelling_ratio(chi_w: f64) -> f64 {
    (36.9 + 18.0 * chi_w) / 33.0
}

/// Void fraction at conversion `xi`: ε = 1 − (1−ε₀)[1 + ξ(σ−1)], clamped
/// below at zero.
pub fn void_fraction(xi: f64, eps0: f64, sigma: f64) -> f64 {
    (1.0 - (1.0 - eps0) * (1.0 + xi * (sigma - 1.0))).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ergun_zero_velocity_and_domain() {
        assert_eq!(ergun_dp_per_length(1.85e-5, 0.4, 3e-3, 0.0, 1.1).unwrap(), 0.0);
        assert!(ergun_dp_per_length(1.85e-5, 0.0, 3e-3, 0.1, 1.1).is_err());
        assert!(ergun_dp_per_length(1.85e-5, 1.0, 3e-3, 0.1, 1.1).is_err());
        assert!(ergun_dp_per_length(1.85e-5, 0.4, 0.0, 0.1, 1.1).is_err());
    }

    #[test]
    fn viscous_ratios_match_footnote() {
        let r33 = viscous_resistance_ratio(0.33, 0.40);
        assert!((r33 - 2.2).abs() < 0.1, "got {r33}");
        let r166 = viscous_resistance_ratio(0.166, 0.40);
        assert!((r166 - 27.0).abs() < 1.0, "got {r166}");
    }

    #[test]
    fn ergun_monotonicity() {
        // Strictly increasing in superficial velocity.
        let mut last = 0.0;
        for i in 1..=100 {
            let v = i as f64 * 0.01;
            let dp = ergun_dp_per_length(1.85e-5, 0.4, 3e-3, v, 1.1).unwrap();
            assert!(dp > last);
            last = dp;
        }
        // Strictly decreasing in void fraction.
        let mut last = f64::INFINITY;
        for i in 1..=98 {
            let eps = i as f64 * 0.01;
            let dp = ergun_dp_per_length(1.85e-5, eps, 3e-3, 0.5, 1.1).unwrap();
            assert!(dp < last);
            last = dp;
        }
    }

    #[test]
    fn swelling_table_values() {
        assert!((swelling_ratio(0.0) - 1.12).abs() < 0.005);
        assert!((swelling_ratio(0.5) - 1.39).abs() < 0.005);
        assert!((swelling_ratio(1.0) - 1.66).abs() < 0.005);
    }

    #[test]
    fn void_fraction_table_values() {
        let e0 = void_fraction(1.0, 0.40, 1.12);
        assert!((e0 - 0.328).abs() < 5e-4, "got {e0}");
        let e5 = void_fraction(1.0, 0.40, 1.39);
        assert!((e5 - 0.166).abs() < 5e-4, "got {e5}");
        let e1 = void_fraction(1.0, 0.40, swelling_ratio(1.0));
        assert!(e1 <= 0.005, "got {e1}");
        assert_eq!(void_fraction(0.0, 0.40, 1.39), 0.40);
    }

    #[test]
    fn void_fraction_non_increasing_in_conversion() {
        for sigma in [1.0, 1.12, 1.39, 1.66] {
            let mut last = f64::INFINITY;
            for i in 0..=100 {
                let xi = i as f64 / 100.0;
                let e = void_fraction(xi, 0.40, sigma);
                assert!(e <= last + 1e-15);
                if sigma == 1.0 {
                    assert!((e - 0.40).abs() < 1e-15);
                }
                last = e;
            }
        }
    }
}
