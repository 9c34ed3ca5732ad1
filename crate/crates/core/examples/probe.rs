// Dev probe: open-loop plant behavior at the heavy-exertion anchor.
use suitloop_core::config::Config;
use suitloop_core::plant::*;

fn main() {
    let cfg = Config::default();
    let model = PlantModel::truth(&cfg);
    let mut x = initial_state(&cfg);
    let u = ControlInput { m_dot_o2: 0.0426, fan: 0.75, bypass: 0.0 };
    let mut d = Disturbance::nominal();
    d.w = 230.0;
    d.t_ext = 30.0;
    let mut audit = FlowAudit::default();
    for k in 0..=3600 {
        if k % 300 == 0 {
            let obs = model.observables(&x, &u, &d);
            println!("t={:5} co2={:6.0}ppm rh={:5.1}% tbz={:5.2} ttor={:5.2} tbed={:5.2} tc={:5.2} hr={:5.1} vcl={:5.2}L ps-pa={:6.1} pio2={:6.4} what={:6.1} vent_cum={:7.5} xo2={:6.4} tank={:6.4}",
                k, obs.x_co2*1e6, obs.rh_pct, x.t_bz, x.t_torso, x.t_bed, x.t_core, x.hr, x.v_cl, obs.p_s-d.p_a, obs.p_io2_atm, x.w_hat, audit.vented_total, x.x_o2, x.m_tank);
        }
        let (nx, diag) = rk4_step(&model, &x, &u, &d, 1.0).unwrap();
        audit.add(&diag.audit);
        x = nx;
    }
    println!("audit: {:?}", audit);
}
