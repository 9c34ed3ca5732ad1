//! Classical RK4 over the plant model, with flow-audit accumulation using
//! the same quadrature weights as the state update, post-step consistency
//! renormalization, and step-halving retry when a species would cross zero.

use super::model::{Flows, PlantError, PlantModel};
use super::state::{ControlInput, Disturbance, PlantState};

/// Integrated flow totals over a step (or a whole mission), in mol.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FlowAudit {
    pub injected_o2: f64,
    pub consumed_o2: f64,
    pub vented_o2: f64,
    pub vented_n2: f64,
    pub vented_total: f64,
    pub co2_produced: f64,
    pub co2_scrubbed: f64,
    pub water_adsorbed: f64,
    pub water_exhaled: f64,
    /// Mass [mol] discarded by clamping species at physical zero.
    pub clamped: f64,
}

impl FlowAudit {
    fn accumulate(&mut self, f: &Flows, weight_s: f64) {
        self.injected_o2 += f.n_dot_inject * weight_s;
        self.consumed_o2 += f.n_dot_consumed * weight_s;
        self.vented_o2 += f.vent_o2 * weight_s;
        self.vented_n2 += f.vent_n2 * weight_s;
        self.vented_total += f.n_dot_vent * weight_s;
        self.co2_produced += f.co2_produced * weight_s;
        self.co2_scrubbed += f.r_scrub * weight_s;
        self.water_adsorbed += f.n_dot_ads * weight_s;
        self.water_exhaled += f.n_dot_exhaled * weight_s;
    }

    pub fn add(&mut self, other: &FlowAudit) {
        self.injected_o2 += other.injected_o2;
        self.consumed_o2 += other.consumed_o2;
        self.vented_o2 += other.vented_o2;
        self.vented_n2 += other.vented_n2;
        self.vented_total += other.vented_total;
        self.co2_produced += other.co2_produced;
        self.co2_scrubbed += other.co2_scrubbed;
        self.water_adsorbed += other.water_adsorbed;
        self.water_exhaled += other.water_exhaled;
        self.clamped += other.clamped;
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StepDiag {
    pub audit: FlowAudit,
    pub halvings: u32,
    /// Flows at the step start (for logging).
    pub flows: Flows,
}

const NEG_TOL: f64 = 1e-7;
const MAX_HALVINGS: u32 = 4;

/// One RK4 step of size `dt`, with retry-on-negative-species and post-step
/// renormalization of the carried O2 fraction.
pub fn rk4_step(
    model: &PlantModel,
    x: &PlantState,
    u: &ControlInput,
    d: &Disturbance,
    dt: f64,
) -> Result<(PlantState, StepDiag), PlantError> {
    step_recursive(model, x, u, d, dt, 0)
}

fn step_recursive(
    model: &PlantModel,
    x: &PlantState,
    u: &ControlInput,
    d: &Disturbance,
    dt: f64,
    depth: u32,
) -> Result<(PlantState, StepDiag), PlantError> {
    let (candidate, mut diag) = rk4_once(model, x, u, d, dt)?;
    diag.halvings = depth;

    if let Some((component, value)) = worst_negative(&candidate) {
        if depth >= MAX_HALVINGS {
            return Err(PlantError::NegativeSpecies {
                component,
                value,
                halvings: depth,
            });
        }
        let (mid, d1) = step_recursive(model, x, u, d, dt / 2.0, depth + 1)?;
        let (end, d2) = step_recursive(model, &mid, u, d, dt / 2.0, depth + 1)?;
        let mut audit = d1.audit;
        audit.add(&d2.audit);
        return Ok((
            end,
            StepDiag {
                audit,
                halvings: d1.halvings.max(d2.halvings),
                flows: d1.flows,
            },
        ));
    }

    let mut next = candidate;
    // Clamp round-off-scale negatives at physical zeros, logging the mass.
    for (v, min) in [
        (&mut next.n_o2, 0.0),
        (&mut next.n_co2, 0.0),
        (&mut next.n_h2o, 0.0),
        (&mut next.n_n2, 0.0),
        (&mut next.m_tank, 0.0),
        (&mut next.m_caoh2, 0.0),
        (&mut next.m_water, 0.0),
    ] {
        if *v < min {
            diag.audit.clamped += min - *v;
            *v = min;
        }
    }
    next.xi = next.xi.clamp(0.0, 1.0);
    next.m_water = next.m_water.min(model.cfg.desiccant.m_water_max_kg);
    next.hr = next.hr.clamp(30.0, 240.0);
    next.v_cl = next.v_cl.clamp(0.0, model.cfg.vent.v_cl_max);
    next.renormalize_x_o2();
    Ok((next, diag))
}

fn rk4_once(
    model: &PlantModel,
    x: &PlantState,
    u: &ControlInput,
    d: &Disturbance,
    dt: f64,
) -> Result<(PlantState, StepDiag), PlantError> {
    let xv = x.to_vector();

    let (k1, f1) = model.rhs(x, u, d)?;
    let k1v = k1.to_vector();
    let x2 = PlantState::from_vector(&(&xv + &k1v * (dt / 2.0)));
    let (k2, f2) = model.rhs(&x2, u, d)?;
    let k2v = k2.to_vector();
    let x3 = PlantState::from_vector(&(&xv + &k2v * (dt / 2.0)));
    let (k3, f3) = model.rhs(&x3, u, d)?;
    let k3v = k3.to_vector();
    let x4 = PlantState::from_vector(&(&xv + &k3v * dt));
    let (k4, f4) = model.rhs(&x4, u, d)?;
    let k4v = k4.to_vector();

    let next = PlantState::from_vector(&(&xv + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (dt / 6.0)));

    let mut audit = FlowAudit::default();
    audit.accumulate(&f1, dt / 6.0);
    audit.accumulate(&f2, dt / 3.0);
    audit.accumulate(&f3, dt / 3.0);
    audit.accumulate(&f4, dt / 6.0);

    Ok((
        next,
        StepDiag {
            audit,
            halvings: 0,
            flows: f1,
        },
    ))
}

fn worst_negative(x: &PlantState) -> Option<(&'static str, f64)> {
    let checks = [
        ("n_o2_mol", x.n_o2),
        ("n_co2_mol", x.n_co2),
        ("n_h2o_mol", x.n_h2o),
        ("n_n2_mol", x.n_n2),
        ("m_tank_kg", x.m_tank),
        ("m_caoh2_kg", x.m_caoh2),
        ("m_water_kg", x.m_water),
    ];
    checks
        .into_iter()
        .filter(|(_, v)| *v < -NEG_TOL)
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
}
