//! Controller strategies behind a common trait, registered by name and
//! selected at runtime from the CLI or config.

use super::fallback::fallback_policy;
use super::mode::Mode;
use super::mpc::{MpcController, MpcStatus};
use super::pid::PidBaseline;
use crate::config::Config;
use crate::plant::{ControlInput, Disturbance, PlantModel, PlantState, SensorFrame};
use std::collections::BTreeMap;
use std::time::Instant;

/// Everything a strategy may consult when proposing a candidate command.
pub struct ControlContext<'a> {
    pub cfg: &'a Config,
    /// Controller-side prediction model (carries the scrubber-health
    /// correction; never the truth plant).
    pub model: &'a PlantModel<'a>,
    pub x_hat: &'a PlantState,
    pub frame: &'a SensorFrame,
    pub d_hat: &'a Disturbance,
    pub mode: Mode,
    pub x_o2_max: f64,
    /// Scarcity multiplier after thermal-threat relief.
    pub lambda: f64,
    pub u_prev: &'a ControlInput,
    pub now: Instant,
}

#[derive(Debug, Clone, Copy)]
pub struct Decision {
    pub u_cand: ControlInput,
    pub used_fallback: bool,
    pub solver: SolverStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Optimal,
    DeadlineExceeded,
    Infeasible,
    Direct,
}

impl SolverStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverStatus::Optimal => "optimal",
            SolverStatus::DeadlineExceeded => "deadline_exceeded",
            SolverStatus::Infeasible => "infeasible",
            SolverStatus::Direct => "direct",
        }
    }
}

/// A control strategy: given the estimate/sensor context, produce a
/// candidate command. Every candidate still passes the safety filter.
pub trait Controller: Send {
    fn name(&self) -> &'static str;
    fn decide(&mut self, ctx: &ControlContext) -> Decision;
    fn reset(&mut self);
}

/// LTV-MPC with move blocking and the scripted fallback on solver failure.
pub struct MpcStrategy {
    inner: MpcController,
}

impl MpcStrategy {
    pub fn new(cfg: &Config) -> Self {
        MpcStrategy {
            inner: MpcController::new(cfg.mpc.clone()),
        }
    }
}

impl Controller for MpcStrategy {
    fn name(&self) -> &'static str {
        "mpc"
    }

    fn decide(&mut self, ctx: &ControlContext) -> Decision {
        let cold = fallback_policy(ctx.x_hat, ctx.mode, ctx.u_prev, ctx.d_hat.p_a, ctx.cfg);
        let solve = self.inner.solve(
            ctx.model,
            ctx.x_hat,
            ctx.d_hat,
            ctx.u_prev,
            ctx.x_o2_max,
            ctx.lambda,
            &cold,
            ctx.now,
        );
        match solve.status {
            MpcStatus::Optimal => Decision {
                u_cand: solve.u,
                used_fallback: false,
                solver: SolverStatus::Optimal,
            },
            MpcStatus::DeadlineExceeded => Decision {
                u_cand: cold,
                used_fallback: true,
                solver: SolverStatus::DeadlineExceeded,
            },
            MpcStatus::Infeasible => Decision {
                u_cand: cold,
                used_fallback: true,
                solver: SolverStatus::Infeasible,
            },
        }
    }

    fn reset(&mut self) {
        self.inner.reset();
    }
}

/// Fixed-setpoint PID baseline; consumes raw sensor frames only.
pub struct PidStrategy {
    inner: PidBaseline,
}

impl PidStrategy {
    pub fn new(cfg: &Config) -> Self {
        PidStrategy {
            inner: PidBaseline::new(&cfg.pid, &cfg.mpc.u_min, &cfg.mpc.u_max),
        }
    }
}

impl Controller for PidStrategy {
    fn name(&self) -> &'static str {
        "pid"
    }

    fn decide(&mut self, ctx: &ControlContext) -> Decision {
        Decision {
            u_cand: self.inner.step(ctx.frame, ctx.cfg.mpc.dt),
            used_fallback: false,
            solver: SolverStatus::Direct,
        }
    }

    fn reset(&mut self) {
        self.inner.reset();
    }
}

type Factory = Box<dyn Fn(&Config) -> Box<dyn Controller> + Send + Sync>;

/// Name-keyed strategy registry.
pub struct ControllerRegistry {
    factories: BTreeMap<&'static str, Factory>,
}

impl Default for ControllerRegistry {
    fn default() -> Self {
        Self::with_builtin()
    }
}

impl ControllerRegistry {
    pub fn empty() -> Self {
        ControllerRegistry {
            factories: BTreeMap::new(),
        }
    }

    /// Registry with the built-in strategies.
    pub fn with_builtin() -> Self {
        let mut r = Self::empty();
        r.register("mpc", |cfg| Box::new(MpcStrategy::new(cfg)));
        r.register("pid", |cfg| Box::new(PidStrategy::new(cfg)));
        r
    }

    pub fn register<F>(&mut self, name: &'static str, factory: F)
    where
        F: Fn(&Config) -> Box<dyn Controller> + Send + Sync + 'static,
    {
        self.factories.insert(name, Box::new(factory));
    }

    pub fn create(&self, name: &str, cfg: &Config) -> Option<Box<dyn Controller>> {
        self.factories.get(name).map(|f| f(cfg))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_registry_lists_and_creates() {
        let reg = ControllerRegistry::with_builtin();
        assert_eq!(reg.names(), vec!["mpc", "pid"]);
        let cfg = Config::default();
        let c = reg.create("pid", &cfg).unwrap();
        assert_eq!(c.name(), "pid");
        let c = reg.create("mpc", &cfg).unwrap();
        assert_eq!(c.name(), "mpc");
        assert!(reg.create("lqr", &cfg).is_none());
    }

    #[test]
    fn custom_strategies_can_be_registered() {
        struct Hold;
        impl Controller for Hold {
            fn name(&self) -> &'static str {
                "hold"
            }
            fn decide(&mut self, ctx: &ControlContext) -> Decision {
                Decision {
                    u_cand: *ctx.u_prev,
                    used_fallback: false,
                    solver: SolverStatus::Direct,
                }
            }
            fn reset(&mut self) {}
        }
        let mut reg = ControllerRegistry::with_builtin();
        reg.register("hold", |_| Box::new(Hold));
        assert!(reg.names().contains(&"hold"));
        assert!(reg.create("hold", &Config::default()).is_some());
    }
}
