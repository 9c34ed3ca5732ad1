//! Hypoxia and hypercapnia risk indices in [0, 1].

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskIndices {
    pub hypoxia: f64,
    pub hypercapnia: f64,
}

/// Monotone risk maps: hypoxia risk rises as wet-basis P_iO2 falls below
/// 0.19 atm and saturates at the 0.16 atm hard floor; hypercapnia risk
/// rises from the 0.5% soft ceiling to the 3% cascade floor, nudged by the
/// production/removal imbalance.
pub fn risk_indices(
    p_io2_atm: f64,
    x_co2: f64,
    co2_production_mol_s: f64,
    co2_removal_mol_s: f64,
) -> RiskIndices {
    let hypoxia = ((0.19 - p_io2_atm) / (0.19 - 0.16)).clamp(0.0, 1.0);
    let base = ((x_co2 - 0.005) / (0.03 - 0.005)).clamp(0.0, 1.0);
    let imbalance = if co2_production_mol_s > 1e-12 {
        ((co2_production_mol_s - co2_removal_mol_s) / co2_production_mol_s).clamp(0.0, 1.0)
    } else {
        0.0
    };
    RiskIndices {
        hypoxia,
        hypercapnia: (base + 0.2 * imbalance * base).clamp(0.0, 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nominal_atmosphere_is_clean() {
        let r = risk_indices(0.21, 400e-6, 1e-3, 1e-3);
        assert_eq!(r.hypoxia, 0.0);
        assert!(r.hypercapnia < 1e-6);
    }

    #[test]
    fn hard_floors_saturate() {
        let r = risk_indices(0.16, 0.03, 1e-3, 0.0);
        assert_eq!(r.hypoxia, 1.0);
        assert_eq!(r.hypercapnia, 1.0);
        let r = risk_indices(0.10, 0.08, 1e-3, 0.0);
        assert_eq!(r.hypoxia, 1.0);
        assert_eq!(r.hypercapnia, 1.0);
    }

    #[test]
    fn monotone_in_their_drivers() {
        let mut last = 0.0;
        for i in 0..=30 {
            let p = 0.19 - i as f64 * 0.001;
            let r = risk_indices(p, 400e-6, 1e-3, 1e-3).hypoxia;
            assert!(r >= last);
            last = r;
        }
        let mut last = 0.0;
        for i in 0..=30 {
            let x = 0.005 + i as f64 * 0.001;
            let r = risk_indices(0.21, x, 1e-3, 1e-3).hypercapnia;
            assert!(r >= last);
            last = r;
        }
    }
}
