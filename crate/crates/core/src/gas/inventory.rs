//! Molar inventory of the four loop species; the source of every mole
//! fraction in the model.

use crate::constants::{M_CO2, M_H2O, M_N2, M_O2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasInventory {
    pub n_o2: f64,
    pub n_co2: f64,
    pub n_h2o: f64,
    pub n_n2: f64,
}

impl GasInventory {
    /// Fill `n_total` moles of air-like mix: the given O2 and CO2 fractions,
    /// the given water fraction, remainder N2.
    pub fn air_fill(n_total: f64, x_o2: f64, x_co2: f64, x_h2o: f64) -> Self {
        let x_n2 = 1.0 - x_o2 - x_co2 - x_h2o;
        GasInventory {
            n_o2: n_total * x_o2,
            n_co2: n_total * x_co2,
            n_h2o: n_total * x_h2o,
            n_n2: n_total * x_n2,
        }
    }

    pub fn total(&self) -> f64 {
        self.n_o2 + self.n_co2 + self.n_h2o + self.n_n2
    }

    pub fn x_o2(&self) -> f64 {
        self.n_o2 / self.total()
    }

    pub fn x_co2(&self) -> f64 {
        self.n_co2 / self.total()
    }

    pub fn x_h2o(&self) -> f64 {
        self.n_h2o / self.total()
    }

    pub fn x_n2(&self) -> f64 {
        self.n_n2 / self.total()
    }

    /// Mean molar mass of the mixture [kg/mol].
    pub fn mean_molar_mass(&self) -> f64 {
        (self.x_o2() * M_O2 + self.x_co2() * M_CO2 + self.x_h2o() * M_H2O + self.x_n2() * M_N2)
            / 1000.0
    }

    pub fn all_non_negative(&self) -> bool {
        self.n_o2 >= 0.0 && self.n_co2 >= 0.0 && self.n_h2o >= 0.0 && self.n_n2 >= 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_sum_to_one() {
        let inv = GasInventory::air_fill(4.0, 0.21, 400e-6, 0.02);
        let s = inv.x_o2() + inv.x_co2() + inv.x_h2o() + inv.x_n2();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(inv.all_non_negative());
    }

    #[test]
    fn metabolic_scrub_inject_cycle_is_molar_neutral() {
        // Consume 1 mol O2, exhale R mol CO2, scrub the same R mol, inject
        // 1 mol O2: the gas-phase total returns exactly to where it began.
        let r = 0.85;
        let mut inv = GasInventory::air_fill(4.0, 0.21, 400e-6, 0.0);
        let before = inv.total();
        inv.n_o2 -= 1.0;
        inv.n_co2 += r;
        inv.n_co2 -= r;
        inv.n_o2 += 1.0;
        assert!((inv.total() - before).abs() <= 1e-9);
    }

    #[test]
    fn mean_molar_mass_of_air_like_mix() {
        let inv = GasInventory::air_fill(4.0, 0.21, 0.0, 0.0);
        let m = inv.mean_molar_mass();
        assert!((m - 0.0288).abs() < 2e-4, "got {m}");
    }
}
