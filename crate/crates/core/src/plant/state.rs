//! The 18-entry plant state, control and disturbance vectors, and the
//! index map shared by the estimator and controller.

use crate::gas::GasInventory;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub const STATE_DIM: usize = 18;
pub const CONTROL_DIM: usize = 3;

/// State vector indices.
pub mod idx {
    pub const N_O2: usize = 0;
    pub const N_CO2: usize = 1;
    pub const N_H2O: usize = 2;
    pub const N_N2: usize = 3;
    pub const X_O2: usize = 4;
    pub const V_CL: usize = 5;
    pub const M_TANK: usize = 6;
    pub const M_CAOH2: usize = 7;
    pub const XI: usize = 8;
    pub const M_WATER: usize = 9;
    pub const T_BED: usize = 10;
    pub const T_BZ: usize = 11;
    pub const T_TORSO: usize = 12;
    pub const HR: usize = 13;
    pub const T_CORE: usize = 14;
    pub const VO2_HAT: usize = 15;
    pub const W_HAT: usize = 16;
    pub const UPTD: usize = 17;
}

pub const STATE_NAMES: [&str; STATE_DIM] = [
    "n_o2_mol",
    "n_co2_mol",
    "n_h2o_mol",
    "n_n2_mol",
    "x_o2",
    "v_cl_l",
    "m_tank_kg",
    "m_caoh2_kg",
    "xi",
    "m_water_kg",
    "t_bed_c",
    "t_bz_c",
    "t_torso_c",
    "hr_bpm",
    "t_core_c",
    "vo2_hat_l_min",
    "w_hat_w",
    "uptd",
];

/// Plant state. Gas inventories in mol, counter-lung volume in L, masses
/// in kg, temperatures in °C, VO2 in L/min STP, work in W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    pub n_o2: f64,
    pub n_co2: f64,
    pub n_h2o: f64,
    pub n_n2: f64,
    pub x_o2: f64,
    pub v_cl: f64,
    pub m_tank: f64,
    pub m_caoh2: f64,
    pub xi: f64,
    pub m_water: f64,
    pub t_bed: f64,
    pub t_bz: f64,
    pub t_torso: f64,
    pub hr: f64,
    pub t_core: f64,
    pub vo2_hat: f64,
    pub w_hat: f64,
    pub uptd: f64,
}

impl PlantState {
    pub fn inventory(&self) -> GasInventory {
        GasInventory {
            n_o2: self.n_o2,
            n_co2: self.n_co2,
            n_h2o: self.n_h2o,
            n_n2: self.n_n2,
        }
    }

    pub fn n_total(&self) -> f64 {
        self.n_o2 + self.n_co2 + self.n_h2o + self.n_n2
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_row_slice(&[
            self.n_o2,
            self.n_co2,
            self.n_h2o,
            self.n_n2,
            self.x_o2,
            self.v_cl,
            self.m_tank,
            self.m_caoh2,
            self.xi,
            self.m_water,
            self.t_bed,
            self.t_bz,
            self.t_torso,
            self.hr,
            self.t_core,
            self.vo2_hat,
            self.w_hat,
            self.uptd,
        ])
    }

    pub fn to_array(&self) -> [f64; STATE_DIM] {
        let mut a = [0.0; STATE_DIM];
        for (i, v) in self.to_vector().iter().enumerate() {
            a[i] = *v;
        }
        a
    }

    pub fn from_slice(v: &[f64]) -> PlantState {
        assert_eq!(v.len(), STATE_DIM);
        PlantState::from_vector(&DVector::from_row_slice(v))
    }

    pub fn from_vector(v: &DVector<f64>) -> PlantState {
        PlantState {
            n_o2: v[0],
            n_co2: v[1],
            n_h2o: v[2],
            n_n2: v[3],
            x_o2: v[4],
            v_cl: v[5],
            m_tank: v[6],
            m_caoh2: v[7],
            xi: v[8],
            m_water: v[9],
            t_bed: v[10],
            t_bz: v[11],
            t_torso: v[12],
            hr: v[13],
            t_core: v[14],
            vo2_hat: v[15],
            w_hat: v[16],
            uptd: v[17],
        }
    }

    /// Restore the algebraic tie between the carried O2 fraction and the
    /// species inventories.
    pub fn renormalize_x_o2(&mut self) {
        let n = self.n_total();
        if n > 0.0 {
            self.x_o2 = self.n_o2 / n;
        }
    }
}

/// Commanded (and, after the actuator model, applied) control input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    /// O2 injection rate [g/s].
    pub m_dot_o2: f64,
    /// Fan speed, normalized 0–1.
    pub fan: f64,
    /// Scrubber bypass fraction 0–1.
    pub bypass: f64,
}

impl ControlInput {
    pub const ZERO: ControlInput = ControlInput {
        m_dot_o2: 0.0,
        fan: 0.0,
        bypass: 0.0,
    };

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_row_slice(&[self.m_dot_o2, self.fan, self.bypass])
    }

    pub fn from_vector(v: &DVector<f64>) -> ControlInput {
        ControlInput {
            m_dot_o2: v[0],
            fan: v[1],
            bypass: v[2],
        }
    }

    pub fn clamp_to(&self, lo: &[f64; 3], hi: &[f64; 3]) -> ControlInput {
        ControlInput {
            m_dot_o2: self.m_dot_o2.clamp(lo[0], hi[0]),
            fan: self.fan.clamp(lo[1], hi[1]),
            bypass: self.bypass.clamp(lo[2], hi[2]),
        }
    }
}

/// Exogenous disturbances. The movement oscillation amplitude and leak
/// area extend the base vector for the scripted disturbance models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disturbance {
    /// Metabolic work rate [W].
    pub w: f64,
    /// External temperature [°C].
    pub t_ext: f64,
    /// Radiant heat flux [kW/m²].
    pub q_rad: f64,
    /// Aggregate external toxic gas level [ppm].
    pub c_toxic: f64,
    /// Ambient pressure [Pa].
    pub p_a: f64,
    /// Movement-induced counter-lung oscillation amplitude [L].
    #[serde(default)]
    pub movement_osc_l: f64,
    /// Seal-fault leak area [m²].
    #[serde(default)]
    pub leak_area_m2: f64,
}

impl Disturbance {
    pub fn nominal() -> Disturbance {
        Disturbance {
            w: 0.0,
            t_ext: 25.0,
            q_rad: 0.0,
            c_toxic: 0.0,
            p_a: 101_325.0,
            movement_osc_l: 0.0,
            leak_area_m2: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_round_trip() {
        let mut s = PlantState::from_vector(&DVector::from_fn(18, |i, _| i as f64 + 0.5));
        let v = s.to_vector();
        for i in 0..18 {
            assert_eq!(v[i], i as f64 + 0.5);
        }
        s.renormalize_x_o2();
        assert!((s.x_o2 - s.n_o2 / s.n_total()).abs() < 1e-15);
    }
}
