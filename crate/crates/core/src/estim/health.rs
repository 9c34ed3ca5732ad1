//! Scrubber-health tracking: a persistent positive residual between
//! measured and predicted CO2 maps to a multiplicative effectiveness
//! correction for the controller's prediction model.

/// Exponentially weighted residual tracker. The correction only ever
/// derates the model (∈ [0.5, 1.0]); negative residuals cannot push it
/// above one.
#[derive(Debug, Clone)]
pub struct ScrubberHealth {
    ewma: f64,
    count: usize,
    alpha: f64,
    /// Residual (CO2 fraction) mapped to the full derate.
    full_scale_residual: f64,
    min_window: usize,
}

impl Default for ScrubberHealth {
    fn default() -> Self {
        ScrubberHealth {
            ewma: 0.0,
            count: 0,
            alpha: 0.02,
            full_scale_residual: 5.0e-3,
            min_window: 60,
        }
    }
}

impl ScrubberHealth {
    /// Feed one residual sample (measured − predicted CO2 fraction).
    /// Adaptation suspends while the estimator is uncertain
    /// (`suspended = trace(P) above threshold`).
    pub fn push(&mut self, residual: f64, suspended: bool) {
        if suspended {
            return;
        }
        self.ewma += self.alpha * (residual - self.ewma);
        self.count += 1;
    }

    /// Multiplicative η correction for the controller-side model.
    pub fn correction(&self) -> f64 {
        if self.count < self.min_window {
            return 1.0;
        }
        let derate = (self.ewma.max(0.0) / self.full_scale_residual).min(1.0);
        (1.0 - 0.5 * derate).clamp(0.5, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn zero_mean_residuals_leave_correction_at_one() {
        let mut h = ScrubberHealth::default();
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..600 {
            h.push(rng.random_range(-1e-4..1e-4), false);
        }
        assert!((h.correction() - 1.0).abs() < 0.02, "{}", h.correction());
    }

    #[test]
    fn sustained_positive_bias_derates_within_five_minutes() {
        let mut h = ScrubberHealth::default();
        for _ in 0..300 {
            h.push(500e-6, false);
        }
        assert!(h.correction() < 1.0, "{}", h.correction());
        assert!(h.correction() >= 0.5);
    }

    #[test]
    fn negative_residuals_never_raise_above_one() {
        let mut h = ScrubberHealth::default();
        for _ in 0..300 {
            h.push(-5e-3, false);
        }
        assert_eq!(h.correction(), 1.0);
    }

    #[test]
    fn window_gate_and_suspension() {
        let mut h = ScrubberHealth::default();
        for _ in 0..59 {
            h.push(5e-3, false);
        }
        // Below the minimum window nothing is applied yet.
        assert_eq!(h.correction(), 1.0);
        // Suspended samples are ignored entirely.
        let before = h.ewma;
        h.push(1.0, true);
        assert_eq!(h.ewma, before);
    }
}
