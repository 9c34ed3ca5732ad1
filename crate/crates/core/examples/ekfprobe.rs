use suitloop_core::config::Config;
use suitloop_core::estim::{Ekf, Estimate};
use suitloop_core::plant::*;

fn main() {
    let cfg = Config::default();
    let model = PlantModel::truth(&cfg);
    let ekf = Ekf::new(cfg.ekf.clone(), &cfg.sensors);
    let mut truth = initial_state(&cfg);
    let mut est = Estimate::new(truth, &cfg.ekf);
    let mut rng = RngStreams::from_seed(1);
    let u = ControlInput { m_dot_o2: 0.0, fan: 0.15, bypass: 0.0 };
    let mut d_true = Disturbance::nominal();
    d_true.w = 250.0;
    d_true.t_ext = 30.0;
    // EKF disturbance: work unknown, taken from the estimate.
    for k in 0..120 {
        let t = k as f64;
        let frame = sense(&model, &truth, &u, &d_true, &SensorFaults::default(), t, &cfg.sensors, &mut rng.sensor);
        if k > 0 {
            let mut d_hat = d_true;
            d_hat.w = est.x_hat.w_hat;
            est = ekf.predict(&model, &est, &u, &d_hat, 1.0);
        }
        let mut d_hat = d_true;
        d_hat.w = est.x_hat.w_hat;
        let pre_hr = est.x_hat.hr;
        est = ekf.update(&model, &est, &frame, &u, &d_hat);
        if k % 10 == 0 {
            println!("k={k:3} z_hr={:6.1} pre_hr={pre_hr:6.1} post_hr={:6.1} gated={:?} innov_hr={:7.3} P_hr={:9.4} P_w={:9.2} what={:6.1} degraded={}",
                frame.hr_bpm, est.x_hat.hr, est.gated, est.innovations[9], est.p[(13,13)], est.p[(16,16)], est.x_hat.w_hat, est.degraded);
        }
        let (t2, _) = rk4_step(&model, &truth, &u, &d_true, 1.0).unwrap();
        truth = t2;
    }
}
