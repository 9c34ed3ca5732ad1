//! Physical constants and unit helpers shared across the crate.

/// Universal gas constant [J mol⁻¹ K⁻¹].
pub const R_GAS: f64 = 8.314_462_618;

/// Gas constant in litre-atmosphere units [L atm mol⁻¹ K⁻¹].
pub const R_L_ATM: f64 = 0.082_06;

/// Molar volume of an ideal gas at STP [L/mol].
pub const MOLAR_VOLUME_STP: f64 = 22.414;

/// Standard atmosphere [Pa].
pub const ATM_PA: f64 = 101_325.0;

/// One mmHg [Pa].
pub const MMHG_PA: f64 = 133.322;

/// Molar masses [g/mol].
pub const M_O2: f64 = 31.998;
pub const M_CO2: f64 = 44.01;
pub const M_H2O: f64 = 18.015;
pub const M_N2: f64 = 28.014;
pub const M_CAOH2: f64 = 74.09;
pub const M_CACO3: f64 = 100.09;

/// Specific heat of air at constant pressure [J kg⁻¹ K⁻¹].
pub const CP_AIR: f64 = 1005.0;

pub const CELSIUS_OFFSET: f64 = 273.15;

#[inline]
pub fn kelvin(t_celsius: f64) -> f64 {
    t_celsius + CELSIUS_OFFSET
}

#[inline]
pub fn celsius(t_kelvin: f64) -> f64 {
    t_kelvin - CELSIUS_OFFSET
}
