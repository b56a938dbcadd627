//! Longitudinal AV controller.
//!
//! The commanded acceleration is the minimum of three limit accelerations:
//! a safety barrier, a target-speed tracker and an anticipation (MPC) law,
//! clamped to the actuator range. All functions are deterministic in their
//! inputs; the only memory lives in [`ControllerState`].

mod lead;
mod mpc;
mod params;
mod plan;
mod safety;
mod target;

pub use lead::{estimate_lead_accel, LeadAccel, LeadAccelFilter};
pub use mpc::{mpc_accel, mpc_accel_branch, mpc_min_brake, MpcBranch};
pub use params::{ControllerParams, PlanningClip};
pub use plan::{PlanAxis, PlanBin, PlanProfile};
pub use safety::{safe_accel, safe_speed, safe_speed_rate};
pub use target::{
    lead_speed_running_mean, target_accel, target_speed_local, target_speed_planning, LeadSample,
    LeadSpeedBuffer,
};

use std::fmt;

use crate::error::ControllerError;

/// One time-step of front-sensor and ego measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorReading {
    pub t: f64,
    /// Ego position along the road; used only to look up a plan.
    pub y: f64,
    pub v: f64,
    pub v_lead: f64,
    /// Bumper-to-bumper gap to the leader, m.
    pub h: f64,
    pub v_rel: f64,
    /// Measured ego acceleration; carried with the reading, not used by the control law.
    pub a: f64,
    pub valid: bool,
}

impl SensorReading {
    pub fn valid(t: f64, y: f64, v: f64, v_lead: f64, h: f64) -> Self {
        SensorReading { t, y, v, v_lead, h, v_rel: v_lead - v, a: 0.0, valid: true }
    }

    pub fn lost(t: f64, y: f64, v: f64) -> Self {
        SensorReading { t, y, v, v_lead: f64::NAN, h: f64::NAN, v_rel: f64::NAN, a: 0.0, valid: false }
    }

    fn check_finite(&self) -> Result<(), ControllerError> {
        let mut fields = vec![("t", self.t), ("y", self.y), ("v", self.v), ("a", self.a)];
        if self.valid {
            fields.extend([("v_lead", self.v_lead), ("h", self.h), ("v_rel", self.v_rel)]);
        }
        match fields.into_iter().find(|(_, x)| !x.is_finite()) {
            Some((name, _)) => Err(ControllerError::NonFinite(name)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Local,
    Planning,
    /// No leader has been seen yet; cruise toward `v_ref`.
    FreeRoad,
    /// Gap at or inside `s0`: full braking.
    Degenerate,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Local => "local",
            Mode::Planning => "planning",
            Mode::FreeRoad => "free",
            Mode::Degenerate => "degenerate",
        })
    }
}

/// Persistent controller memory.
#[derive(Debug, Clone)]
pub struct ControllerState {
    pub lead_speed_buffer: LeadSpeedBuffer,
    pub lead_filter: LeadAccelFilter,
    pub held_v_lead: f64,
    /// Gap estimate; ramps up while the sensor is blind.
    pub held_h: f64,
    pub t_last_valid: Option<f64>,
    pub a_lead_est: f64,
    pub engaged: bool,
    pub signal_lost: bool,
}

impl Default for ControllerState {
    fn default() -> Self {
        ControllerState {
            lead_speed_buffer: LeadSpeedBuffer::new(),
            lead_filter: LeadAccelFilter::new(),
            held_v_lead: 0.0,
            held_h: 0.0,
            t_last_valid: None,
            a_lead_est: 0.0,
            engaged: true,
            signal_lost: false,
        }
    }
}

impl ControllerState {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Hold the last leader speed and grow the gap estimate by `dt * h_correction`.
pub fn apply_signal_loss(state: &mut ControllerState, dt: f64, p: &ControllerParams) {
    state.held_h += dt * p.h_correction;
    state.signal_lost = true;
}

/// Everything computed in one control step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Command {
    pub t: f64,
    pub h: f64,
    pub v: f64,
    pub v_lead: f64,
    pub a_safe: f64,
    pub a_target: f64,
    pub a_mpc: f64,
    pub a_cmd: f64,
    pub v_target: f64,
    pub a_lead_est: f64,
    pub mode: Mode,
    pub signal_valid: bool,
}

/// One control step: updates `state` and returns the clamped command
/// `min(a_safe, a_target, a_mpc)`.
pub fn command_accel(
    reading: &SensorReading,
    state: &mut ControllerState,
    plan: Option<&PlanProfile>,
    dt: f64,
    p: &ControllerParams,
) -> Result<Command, ControllerError> {
    reading.check_finite()?;
    state.engaged = !p.engagement_gate || reading.v > p.engage_speed;
    if !state.engaged {
        return Err(ControllerError::NotEngaged);
    }
    let (t, v) = (reading.t, reading.v);

    if reading.valid {
        state.held_h = reading.h;
        state.held_v_lead = reading.v_lead;
        state.t_last_valid = Some(t);
        state.signal_lost = false;
    } else if state.t_last_valid.is_some() {
        apply_signal_loss(state, dt, p);
    } else {
        let a_target = target_accel(v, p.v_ref, p);
        return Ok(Command {
            t,
            h: f64::NAN,
            v,
            v_lead: f64::NAN,
            a_safe: p.a_max,
            a_target,
            a_mpc: p.a_max,
            a_cmd: a_target.clamp(p.a_min, p.a_max),
            v_target: p.v_ref,
            a_lead_est: 0.0,
            mode: Mode::FreeRoad,
            signal_valid: false,
        });
    }

    let (h, v_lead) = (state.held_h, state.held_v_lead);
    state.lead_speed_buffer.push(t, v_lead, p.tau);
    let est = state.lead_filter.update(t, v_lead, p.lead_accel_time_constant);
    let a_lead = est.value;
    state.a_lead_est = a_lead;

    // the barrier takes the more pessimistic leader acceleration, and the
    // worst case until two samples exist
    let a_lead_barrier = if est.cold { p.a_l_min } else { est.raw.min(a_lead) };
    let v_safe = safe_speed(h, v_lead, p);
    let a_safe = safe_accel(v, v_safe, safe_speed_rate(h, v, v_lead, a_lead_barrier, p), p);

    let planned = plan
        .filter(|plan| t - plan.issued_at < p.plan_max_age)
        .and_then(|plan| plan.v_down_at(t, reading.y));
    let (mut mode, v_target) = match planned {
        Some(v_down) => (Mode::Planning, target_speed_planning(v_down, v_lead, !state.signal_lost, p)),
        None => {
            let v_bar = state.lead_speed_buffer.mean()?;
            (Mode::Local, target_speed_local(v_bar, h, v, p))
        }
    };
    let a_target = target_accel(v, v_target, p);
    // anticipation needs an observed leader; while blind only the barrier
    // and the target bound the command
    let a_mpc = if state.signal_lost { p.a_max } else { mpc_accel(h, v, v_lead, a_lead, p) };

    let a_cmd = if h <= p.s0 + p.eps_h {
        mode = Mode::Degenerate;
        p.a_min
    } else {
        a_safe.min(a_target).min(a_mpc).clamp(p.a_min, p.a_max)
    };

    Ok(Command {
        t,
        h,
        v,
        v_lead,
        a_safe,
        a_target,
        a_mpc,
        a_cmd,
        v_target,
        a_lead_est: a_lead,
        mode,
        signal_valid: reading.valid,
    })
}

/// Parameters and state of one controlled vehicle.
#[derive(Debug, Clone)]
pub struct Controller {
    pub params: ControllerParams,
    pub state: ControllerState,
}

impl Controller {
    pub fn new(params: ControllerParams) -> Self {
        Controller { params, state: ControllerState::new() }
    }

    pub fn step(&mut self, reading: &SensorReading, plan: Option<&PlanProfile>, dt: f64) -> Result<Command, ControllerError> {
        command_accel(reading, &mut self.state, plan, dt, &self.params)
    }
}
