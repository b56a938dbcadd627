//! Human-driver car following: a follow-the-leader term plus relaxation
//! toward an optimal velocity,
//!
//! ```text
//! dv/dt = a (v_lead - v) / s^2 + b (V(s) - v)
//! ```
//!
//! where `s` is the spacing to the vehicle ahead.

use serde::Deserialize;

use crate::error::ConfigError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HumanDriverParams {
    /// Follow-the-leader gain, m²/s.
    pub a_ftl: f64,
    /// Optimal-velocity relaxation gain, 1/s.
    pub b_ov: f64,
    pub v_max: f64,
    /// Transition scale of the optimal-velocity curve, m.
    pub d0: f64,
    /// Spacing at which the optimal velocity reaches zero, m.
    pub l_veh: f64,
}

impl Default for HumanDriverParams {
    fn default() -> Self {
        Self::unstable_ring()
    }
}

impl HumanDriverParams {
    /// Calibration whose uniform flow is linearly unstable on a 22-car, 260 m ring.
    pub fn unstable_ring() -> Self {
        HumanDriverParams { a_ftl: 20.0, b_ov: 0.5, v_max: 9.75, d0: 2.5, l_veh: 4.5 }
    }

    /// Highway calibration: stable in free flow near 28 m/s, unstable at
    /// intermediate congested speeds.
    pub fn highway() -> Self {
        HumanDriverParams { a_ftl: 20.0, b_ov: 0.6, v_max: 32.0, d0: 12.0, l_veh: 5.0 }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if [self.a_ftl, self.b_ov, self.v_max, self.d0, self.l_veh].iter().all(|&x| x > 0.0) {
            Ok(())
        } else {
            Err(ConfigError::Invalid("human: all parameters must be positive".into()))
        }
    }

    /// Spacing at which the optimal velocity equals `v` (`v < v_max`).
    pub fn equilibrium_spacing(&self, v: f64) -> f64 {
        let t2 = 2f64.tanh();
        let x = (v / self.v_max * (1.0 + t2) - t2).atanh();
        self.l_veh + self.d0 * (x + 2.0)
    }
}

/// Preferred speed at spacing `s`.
pub fn optimal_velocity(s: f64, p: &HumanDriverParams) -> f64 {
    let t2 = 2f64.tanh();
    let v = p.v_max * (((s - p.l_veh) / p.d0 - 2.0).tanh() + t2) / (1.0 + t2);
    v.max(0.0)
}

/// Acceleration of a human driver at spacing `gap` behind a leader at `v_lead`.
///
/// `gap` must be positive; the simulator reports a collision before calling
/// this with a non-positive spacing.
pub fn human_accel(gap: f64, v: f64, v_lead: f64, p: &HumanDriverParams) -> f64 {
    debug_assert!(gap > 0.0, "human_accel called with gap {gap}");
    p.a_ftl * (v_lead - v) / (gap * gap) + p.b_ov * (optimal_velocity(gap, p) - v)
}
