//! Anticipation module. When the leader brakes, command the gentlest
//! deceleration that still stops short of `s0` if the leader keeps braking
//! until standstill; when it speeds up, follow it continuously.

use super::ControllerParams;
use crate::error::ControllerError;

/// Deceleration needed to stop at `s0` behind a leader braking at `a_lead`
/// until standstill. Only defined on the deceleration branch.
pub fn mpc_min_brake(h: f64, v: f64, v_lead: f64, a_lead: f64, p: &ControllerParams) -> Result<f64, ControllerError> {
    if a_lead >= -p.eps_a {
        return Err(ControllerError::BranchSelection { a_lead, eps_a: p.eps_a });
    }
    Ok(min_brake_unchecked(h, v, v_lead, a_lead, p))
}

fn min_brake_unchecked(h: f64, v: f64, v_lead: f64, a_lead: f64, p: &ControllerParams) -> f64 {
    let lead_stop = if v_lead < p.eps_v {
        0.0
    } else {
        v_lead * v_lead / (2.0 * -a_lead)
    };
    -(v * v / 2.0) / (h - p.s0 + lead_stop)
}

/// Which branch of the anticipation law produced the command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpcBranch {
    MinBrake,
    Proportional,
    CloseIn,
    SpeedUpCloseIn,
    SpeedUp,
    /// Gap at or inside `s0`: full braking.
    Degenerate,
}

/// Commanded acceleration of the anticipation module and the branch taken.
pub fn mpc_accel_branch(h: f64, v: f64, v_lead: f64, a_lead: f64, p: &ControllerParams) -> (f64, MpcBranch) {
    if h <= p.s0 + p.eps_h {
        return (p.a_min, MpcBranch::Degenerate);
    }
    let p2 = v_lead - v;
    let close_in = || a_lead - (v - v_lead).powi(2) / (2.0 * (h - p.s0));
    if a_lead < -p.eps_a {
        let min_brake = min_brake_unchecked(h, v, v_lead, a_lead, p);
        // stationary leader: a_lead * v / v_lead degenerates, use the stop law
        let proportional = if v_lead < p.eps_v {
            min_brake
        } else {
            a_lead * v / v_lead
        };
        let p1 = min_brake - proportional;
        if p1 > 0.0 {
            (min_brake, MpcBranch::MinBrake)
        } else if p2 >= 0.0 {
            (proportional, MpcBranch::Proportional)
        } else {
            (close_in(), MpcBranch::CloseIn)
        }
    } else if p2 < 0.0 {
        (close_in(), MpcBranch::SpeedUpCloseIn)
    } else {
        (p.a_max.min(a_lead * (1.0 + p.k2 * p2)), MpcBranch::SpeedUp)
    }
}

pub fn mpc_accel(h: f64, v: f64, v_lead: f64, a_lead: f64, p: &ControllerParams) -> f64 {
    mpc_accel_branch(h, v, v_lead, a_lead, p).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p() -> ControllerParams {
        ControllerParams::default()
    }

    #[test]
    fn min_brake_examples() {
        let p = p();
        assert_eq!(mpc_min_brake(50.0, 0.0, 20.0, -2.0, &p).unwrap(), 0.0);
        assert_relative_eq!(mpc_min_brake(50.0, 20.0, 20.0, -2.0, &p).unwrap(), -200.0 / 146.0, max_relative = 1e-14);
        assert_relative_eq!(mpc_min_brake(10.0, 10.0, 0.0, -2.0, &p).unwrap(), -50.0 / 6.0, max_relative = 1e-14);
    }

    #[test]
    fn min_brake_rejects_speed_up_branch() {
        let p = p();
        assert!(matches!(
            mpc_min_brake(50.0, 20.0, 20.0, 0.0, &p),
            Err(ControllerError::BranchSelection { .. })
        ));
    }

    #[test]
    fn equal_speeds_speeding_leader() {
        let p = p();
        assert_eq!(mpc_accel(30.0, 15.0, 15.0, 0.7, &p), 0.7);
        assert_eq!(mpc_accel(30.0, 15.0, 15.0, 3.0, &p), p.a_max);
    }

    #[test]
    fn braking_leader_reference() {
        let p = p();
        let (a, branch) = mpc_accel_branch(50.0, 20.0, 20.0, -2.0, &p);
        assert_eq!(branch, MpcBranch::MinBrake);
        assert_relative_eq!(a, -1.36986, epsilon = 1e-5);
        // P1 = -200/146 + 2
        assert_relative_eq!(-200.0 / 146.0 + 2.0, 0.63014, epsilon = 1e-5);
    }

    #[test]
    fn branches_agree_on_p1_boundary() {
        // P1 = 0 with P2 < 0 requires v_lead (v - v_lead) = 2 |a_lead| (h - s0)
        let p = p();
        let (v, v_lead, a_lead) = (20.0, 15.0, -2.0);
        let h = p.s0 + v_lead * (v - v_lead) / (2.0 * 2.0);
        let min_brake = mpc_min_brake(h, v, v_lead, a_lead, &p).unwrap();
        let prop = a_lead * v / v_lead;
        let close = a_lead - (v - v_lead) * (v - v_lead) / (2.0 * (h - p.s0));
        assert_relative_eq!(min_brake, prop, max_relative = 1e-12);
        assert_relative_eq!(close, prop, max_relative = 1e-12);
    }
}
