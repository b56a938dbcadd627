use serde::Deserialize;

use crate::error::ConfigError;

/// How the planning-mode target speed is clipped against the leader speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PlanningClip {
    /// `max(max(v_down, a0*v_lead), min(a1*v_lead, v_ref))`, the form used on the road.
    #[default]
    Literal,
    /// `min(max(v_down, a0*v_lead), min(a1*v_lead, v_ref))`: v_down clipped into the band.
    Band,
}

/// Tunable parameters of the three-module controller.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerParams {
    /// Ego braking capacity, m/s² (negative).
    pub a_min: f64,
    /// Assumed worst-case leader braking, m/s² (negative).
    pub a_l_min: f64,
    /// Minimum standstill gap, m.
    pub s0: f64,
    /// Proportional gain shared by the safety and target modules, 1/s.
    pub k: f64,
    /// Catching-up weight.
    pub c1: f64,
    /// Gap-surplus scaling in the local target speed.
    pub c2: f64,
    /// Target time gap, s.
    pub delta1: f64,
    /// Wave-period estimate; width of the leader-speed running mean, s.
    pub tau: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    /// Reference (speed-limit) speed, m/s.
    pub v_ref: f64,
    /// Maximum commanded acceleration, m/s².
    pub a_max: f64,
    /// Speed-up branch gain, s/m.
    pub k2: f64,
    /// Gap ramp rate while the front sensor is blind, m/s.
    pub h_correction: f64,
    pub eps_v: f64,
    pub eps_a: f64,
    pub eps_h: f64,
    /// Time constant of the leader-acceleration low-pass filter, s.
    pub lead_accel_time_constant: f64,
    /// A plan older than this is ignored, s.
    pub plan_max_age: f64,
    /// When set, the controller only commands above `engage_speed`.
    pub engagement_gate: bool,
    pub engage_speed: f64,
    pub planning_clip: PlanningClip,
}

impl Default for ControllerParams {
    fn default() -> Self {
        ControllerParams {
            a_min: -6.0,
            a_l_min: -8.0,
            s0: 4.0,
            k: 1.0,
            c1: 1.0,
            c2: 1.0,
            delta1: 1.8,
            tau: 60.0,
            alpha0: 0.8,
            alpha1: 1.2,
            v_ref: 31.3,
            a_max: 1.5,
            k2: 0.1,
            h_correction: 2.0,
            eps_v: 0.1,
            eps_a: 0.05,
            eps_h: 0.01,
            lead_accel_time_constant: 0.5,
            plan_max_age: 60.0,
            engagement_gate: false,
            engage_speed: 8.94,
            planning_clip: PlanningClip::Literal,
        }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let checks: [(bool, &str); 12] = [
            (self.a_min < 0.0, "a_min must be negative"),
            (self.a_l_min < 0.0, "a_l_min must be negative"),
            (self.s0 > 0.0, "s0 must be positive"),
            (self.k > 0.0, "k must be positive"),
            (self.c1 >= 0.0 && self.c2 >= 0.0, "c1 and c2 must be non-negative"),
            (self.delta1 > 0.0, "delta1 must be positive"),
            (self.tau > 0.0, "tau must be positive"),
            (
                0.0 < self.alpha0 && self.alpha0 < 1.0 && self.alpha1 > 1.0,
                "need 0 < alpha0 < 1 < alpha1",
            ),
            (self.a_max > 0.0, "a_max must be positive"),
            (self.h_correction > 0.0, "h_correction must be positive"),
            (
                self.eps_v > 0.0 && self.eps_a > 0.0 && self.eps_h >= 0.0,
                "epsilon guards must be positive",
            ),
            (
                self.lead_accel_time_constant > 0.0,
                "lead_accel_time_constant must be positive",
            ),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(ConfigError::Invalid(format!("controller: {msg}")));
            }
        }
        Ok(())
    }
}
