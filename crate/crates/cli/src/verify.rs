//! Desk-constant verification suite: every hand-checkable constant the
//! model is built on, evaluated against its quoted value and tolerance.

use suitloop_core::chem::{
    gab_loading, min_circulation, reaction_enthalpy, scrub_capacity, swelling_ratio,
    viscous_resistance_ratio, void_fraction, ThermoTable,
};
use suitloop_core::constants::M_O2;
use suitloop_core::gas::{
    bolus_fraction_mixed, bolus_fraction_unmixed, enrichment_crossing_time, enrichment_rate,
    tank_fill_moles,
};
use suitloop_core::physio::pio2_wet;

pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn pass(&self) -> bool {
        (self.value - self.expected).abs() <= self.tolerance
    }
}

/// The golden desk constants, in the order of the acceptance list.
pub fn golden_checks() -> Vec<Check> {
    let mut checks = Vec::new();
    let mut push = |name: &'static str, value: f64, expected: f64, tolerance: f64| {
        checks.push(Check {
            name,
            value,
            expected,
            tolerance,
        });
    };

    // 1. Reaction enthalpy.
    push(
        "reaction_enthalpy [kJ/mol]",
        reaction_enthalpy(&ThermoTable::default()),
        -113.1,
        0.05,
    );
    // 2. Scrub capacity of 1 kg soda lime.
    push(
        "scrub_capacity(1 kg, 0.82, 0.77) [g]",
        scrub_capacity(1.0, 0.82, 0.77).unwrap(),
        375.0,
        0.5,
    );
    // 3. Real-gas tank fill.
    push(
        "tank_fill(200 bar, 11.7 L, Z=0.95, 300 K) [kg]",
        tank_fill_moles(200.0e5, 11.7e-3, 0.95, 300.0) * M_O2 / 1000.0,
        3.16,
        0.02,
    );
    // 4. Minimum circulation.
    push(
        "min_circulation(0.068 mol/min, 308 K, 0.005 atm) [L/min]",
        min_circulation(0.068, 308.0, 0.005, 0.0).unwrap(),
        344.0,
        1.0,
    );
    // 5. Enrichment rate and crossing time.
    push(
        "enrichment_rate(0.21, 0.05 mol/min, 4 mol) [1/min]",
        enrichment_rate(0.21, 0.05, 4.0),
        0.0099,
        0.0002,
    );
    push(
        "enrichment crossing 0.21 -> 0.235 [min]",
        enrichment_crossing_time(0.21, 0.235, 0.05, 4.0),
        2.5,
        0.1,
    );
    // 6. Swelling ratios, end-of-life void fractions, Ergun ratios.
    push("swelling_ratio(chi=0)", swelling_ratio(0.0), 1.12, 0.005);
    push("swelling_ratio(chi=0.5)", swelling_ratio(0.5), 1.39, 0.005);
    push("swelling_ratio(chi=1)", swelling_ratio(1.0), 1.66, 0.005);
    push(
        "void_fraction(xi=1, eps0=0.40, sigma=1.12)",
        void_fraction(1.0, 0.40, 1.12),
        0.328,
        0.0005,
    );
    push(
        "void_fraction(xi=1, eps0=0.40, sigma=1.39)",
        void_fraction(1.0, 0.40, 1.39),
        0.166,
        0.0005,
    );
    push(
        "void_fraction(xi=1, eps0=0.40, sigma(chi=1)) <= 0.005",
        void_fraction(1.0, 0.40, swelling_ratio(1.0)),
        0.0,
        0.005,
    );
    push(
        "ergun viscous ratio eps 0.33 vs 0.40",
        viscous_resistance_ratio(0.33, 0.40),
        2.2,
        0.1,
    );
    push(
        "ergun viscous ratio eps 0.166 vs 0.40",
        viscous_resistance_ratio(0.166, 0.40),
        27.0,
        1.0,
    );
    // 7. GAB at 80% RH.
    {
        let q = gab_loading(0.80, 0.10, 40.0, 0.85).unwrap();
        push("gab_loading(0.80) in [0.30, 0.35]", q, 0.325, 0.025);
    }
    // 8. PWM bolus fluctuations.
    push(
        "pwm worst-case bolus dx_O2",
        bolus_fraction_unmixed(1.0 * 1.0 * 5.0 / M_O2, 4.0, 0.21),
        0.030,
        0.001,
    );
    push(
        "pwm duty 0.3, 3 s bolus dx_O2",
        bolus_fraction_mixed(1.0 * 0.3 * 3.0 / M_O2, 4.0, 0.21),
        0.006,
        0.0005,
    );
    // 9. Heat rates at heavy exertion.
    push(
        "scrubber heat at 0.068 mol/min [W]",
        reaction_enthalpy(&ThermoTable::default()).abs() * 1000.0 * 0.068 / 60.0,
        128.0,
        2.0,
    );
    push(
        "adsorption heat at 4.2 g/min [W]",
        2550.0e3 * 4.2e-3 / 60.0,
        179.0,
        3.0,
    );
    // 10. Wet-basis inspired O2 corrections.
    {
        let dry = 0.21;
        let wet60 = pio2_wet(101_325.0, 35.0, 60.0, 0.21);
        push(
            "pio2 wet reduction at RH 60%, 35 C [%]",
            (dry - wet60) / dry * 100.0,
            3.0,
            0.4,
        );
        let wet100 = pio2_wet(101_325.0, 35.0, 100.0, 0.21);
        push(
            "pio2 wet reduction at RH 100%, 35 C [%]",
            (dry - wet100) / dry * 100.0,
            5.5,
            0.3,
        );
    }
    checks
}

/// Run the suite, printing one line per constant; returns true when all
/// pass.
pub fn run_verify<W: std::io::Write>(mut w: W) -> std::io::Result<bool> {
    let checks = golden_checks();
    let mut all_ok = true;
    for c in &checks {
        let ok = c.pass();
        all_ok &= ok;
        writeln!(
            w,
            "[{}] {:<55} value {:>12.6} expected {:>10.4} +/- {}",
            if ok { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.expected,
            c.tolerance
        )?;
    }
    writeln!(
        w,
        "{}: {}/{} desk constants verified",
        if all_ok { "OK" } else { "FAILED" },
        checks.iter().filter(|c| c.pass()).count(),
        checks.len()
    )?;
    Ok(all_ok)
}
