//! Sensor synthesis: noisy, quantized frames from the true plant state,
//! including the triple-redundant galvanic O2 cells and median voting.

use super::model::PlantModel;
use super::state::{ControlInput, Disturbance, PlantState};
use crate::config::SensorParams;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// One tick of sensor readings. O2 is reported per cell in percent; all
/// other channels use the units of the underlying quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorFrame {
    pub t_s: f64,
    /// NDIR CO2 fraction (0–1).
    pub x_co2: f64,
    /// Galvanic O2 cells [%].
    pub x_o2_cells: [f64; 3],
    pub rh_pct: f64,
    pub t_bz_c: f64,
    pub t_torso_c: f64,
    pub t_bed_c: f64,
    /// Suit gauge pressure [Pa].
    pub dp_suit_pa: f64,
    pub q_circ_l_min: f64,
    pub v_cl_l: f64,
    pub hr_bpm: f64,
    pub hrv_ms: f64,
    pub accel_torso_g: f64,
    pub accel_wrist_g: f64,
    // External tier.
    pub q_rad_kw_m2: f64,
    pub t_ext_c: f64,
    pub toxic_ppm: f64,
    pub p_a_pa: f64,
}

/// Scripted O2-cell fault: one cell drifts at a fixed rate after onset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct O2CellFault {
    pub cell: usize,
    pub onset_s: f64,
    /// Drift rate [percentage points per minute].
    pub drift_pp_per_min: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SensorFaults {
    pub o2_cell: Option<O2CellFault>,
}

fn quantize(value: f64, step: f64) -> f64 {
    if step > 0.0 {
        (value / step).round() * step
    } else {
        value
    }
}

/// Synthesize one sensor frame. Draw order is fixed so that paired runs
/// sharing an RNG seed consume identical noise streams regardless of the
/// controller under test.
#[allow(clippy::too_many_arguments)]
pub fn sense(
    model: &PlantModel,
    x: &PlantState,
    u: &ControlInput,
    d: &Disturbance,
    faults: &SensorFaults,
    t_s: f64,
    params: &SensorParams,
    rng: &mut ChaCha12Rng,
) -> SensorFrame {
    let obs = model.observables(x, u, d);
    let mut noise = |sigma: f64| -> f64 {
        let n: f64 = StandardNormal.sample(rng);
        if params.noise_enabled {
            sigma * n
        } else {
            0.0
        }
    };

    let x_co2 = quantize(obs.x_co2 + noise(params.sigma_x_co2), params.sigma_x_co2);
    let mut cells = [0.0; 3];
    for c in cells.iter_mut() {
        *c = quantize(
            obs.x_o2 * 100.0 + noise(params.sigma_x_o2 * 100.0),
            params.sigma_x_o2 * 100.0,
        );
    }
    if let Some(fault) = faults.o2_cell {
        if t_s >= fault.onset_s && fault.cell < 3 {
            cells[fault.cell] += fault.drift_pp_per_min * (t_s - fault.onset_s) / 60.0;
        }
    }
    let rh = quantize(obs.rh_pct + noise(params.sigma_rh_pct), params.sigma_rh_pct);
    let t_bz = quantize(x.t_bz + noise(params.sigma_t_bz_c), params.sigma_t_bz_c);
    let t_torso = quantize(x.t_torso + noise(params.sigma_t_torso_c), params.sigma_t_torso_c);
    let t_bed = quantize(x.t_bed + noise(params.sigma_t_bed_c), params.sigma_t_bed_c);
    let dp = quantize(obs.p_s - d.p_a + noise(params.sigma_dp_pa), params.sigma_dp_pa);
    let q_circ = quantize(
        obs.q_circ_l_min + noise(params.sigma_q_circ_l_min),
        params.sigma_q_circ_l_min,
    );
    let v_cl = quantize(x.v_cl + noise(params.sigma_v_cl_l), params.sigma_v_cl_l);
    let hr = quantize(x.hr + noise(params.sigma_hr_bpm), params.sigma_hr_bpm);
    // HRV synthesized as HR-dependent noise only; consumed by no estimator.
    let hrv = quantize(
        (60_000.0 / x.hr.max(30.0)) * 0.05 + noise(params.sigma_hrv_ms),
        params.sigma_hrv_ms,
    );
    let act = (d.w / 500.0).clamp(0.0, 1.5);
    let accel_torso = (act + noise(params.sigma_accel_g)).max(0.0);
    let accel_wrist = (act * 1.2 + noise(params.sigma_accel_g)).max(0.0);
    let q_rad = quantize(
        (d.q_rad + noise(params.sigma_q_rad_kw_m2)).max(0.0),
        params.sigma_q_rad_kw_m2,
    );
    let t_ext = quantize(d.t_ext + noise(params.sigma_t_ext_c), params.sigma_t_ext_c);
    let toxic = quantize(
        (d.c_toxic + noise(params.sigma_toxic_ppm)).max(0.0),
        params.sigma_toxic_ppm,
    );
    let p_a = quantize(d.p_a + noise(params.sigma_p_a_pa), params.sigma_p_a_pa);

    SensorFrame {
        t_s,
        x_co2: x_co2.max(0.0),
        x_o2_cells: cells,
        rh_pct: rh.clamp(0.0, 100.0),
        t_bz_c: t_bz,
        t_torso_c: t_torso,
        t_bed_c: t_bed,
        dp_suit_pa: dp,
        q_circ_l_min: q_circ.max(0.0),
        v_cl_l: v_cl.max(0.0),
        hr_bpm: hr.clamp(30.0, 240.0),
        hrv_ms: hrv.max(0.0),
        accel_torso_g: accel_torso,
        accel_wrist_g: accel_wrist,
        q_rad_kw_m2: q_rad,
        t_ext_c: t_ext,
        toxic_ppm: toxic,
        p_a_pa: p_a,
    }
}

/// Median-vote result for the redundant O2 cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoteResult {
    /// Voted O2 reading [%].
    pub value: f64,
    pub rejected: [bool; 3],
    /// Raised when two or more cells disagree with the median: the channel
    /// can no longer out-vote a faulty cell.
    pub sensor_fault: bool,
}

/// Median voting with plausibility rejection: readings more than two
/// percentage points from the median are flagged.
pub fn median_vote(r: [f64; 3]) -> VoteResult {
    let mut sorted = r;
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[1];
    let mut rejected = [false; 3];
    let mut n_rejected = 0;
    for (i, v) in r.iter().enumerate() {
        if (v - median).abs() > 2.0 {
            rejected[i] = true;
            n_rejected += 1;
        }
    }
    VoteResult {
        value: median,
        rejected,
        sensor_fault: n_rejected >= 2,
    }
}

/// Deterministic per-mission RNG streams. Disturbance and sensor noise use
/// separate streams with a fixed draw order, so paired controller runs see
/// identical realizations.
pub struct RngStreams {
    pub sensor: ChaCha12Rng,
    pub disturbance: ChaCha12Rng,
}

impl RngStreams {
    pub fn from_seed(seed: u64) -> RngStreams {
        use rand::SeedableRng;
        RngStreams {
            sensor: ChaCha12Rng::seed_from_u64(seed ^ 0x5EED_0001),
            disturbance: ChaCha12Rng::seed_from_u64(seed ^ 0x5EED_0002),
        }
    }

    /// Absolute value of a standard normal draw, used for movement spikes.
    pub fn movement_factor(&mut self) -> f64 {
        let n: f64 = StandardNormal.sample(&mut self.disturbance);
        n.abs()
    }

    pub fn uniform(&mut self) -> f64 {
        self.disturbance.random::<f64>()
    }
}
