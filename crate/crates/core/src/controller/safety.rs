//! Safety module: the highest speed from which the ego can still stop behind a
//! leader that brakes as hard as it possibly can, and the barrier acceleration
//! that keeps the ego below it.

use super::ControllerParams;

/// Maximal safe ego speed for gap `h` behind a leader driving at `v_lead`.
///
/// Returns 0 once the ego is already inside the unsafe zone.
pub fn safe_speed(h: f64, v_lead: f64, p: &ControllerParams) -> f64 {
    let radicand = 2.0 * p.a_min.abs() * (h - p.s0 + v_lead * v_lead / (2.0 * p.a_l_min.abs()));
    if radicand > 0.0 {
        radicand.sqrt()
    } else {
        0.0
    }
}

/// Time derivative of [`safe_speed`] along the current motion.
///
/// `dh/dt = v_lead - v`, `d(v_lead)/dt = a_lead_est`. Below `eps_v` the
/// derivative is zeroed and the degenerate-gap override takes over.
pub fn safe_speed_rate(h: f64, v: f64, v_lead: f64, a_lead_est: f64, p: &ControllerParams) -> f64 {
    let v_safe = safe_speed(h, v_lead, p);
    if v_safe <= p.eps_v {
        return 0.0;
    }
    let v_rel = v_lead - v;
    let rate = p.a_min.abs() * (v_rel + v_lead * a_lead_est / p.a_l_min.abs()) / v_safe;
    if rate.is_finite() {
        rate
    } else {
        0.0
    }
}

/// Barrier acceleration `-k (v - v_safe) + dv_safe/dt`.
pub fn safe_accel(v: f64, v_safe: f64, dv_safe_dt: f64, p: &ControllerParams) -> f64 {
    -p.k * (v - v_safe) + dv_safe_dt
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p() -> ControllerParams {
        ControllerParams::default()
    }

    #[test]
    fn safe_speed_zero_at_standstill_distance() {
        assert_eq!(safe_speed(4.0, 0.0, &p()), 0.0);
        assert_eq!(safe_speed(3.0, 0.0, &p()), 0.0);
    }

    #[test]
    fn safe_speed_reference_value() {
        // 2*6*(50 - 4 + 400/16) = 12 * 71
        let v = safe_speed(50.0, 20.0, &p());
        assert_relative_eq!(v, (12.0f64 * 71.0).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(v, 29.189039, epsilon = 1e-6);
    }

    #[test]
    fn rate_vanishes_in_steady_following() {
        assert_eq!(safe_speed_rate(40.0, 20.0, 20.0, 0.0, &p()), 0.0);
    }

    #[test]
    fn rate_matches_finite_difference() {
        let pr = p();
        let (h, v, vl, al) = (50.0, 25.0, 20.0, 0.0);
        let r = safe_speed_rate(h, v, vl, al, &pr);
        assert_relative_eq!(r, 6.0 * -5.0 / (12.0f64 * 71.0).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(r, -1.02778, epsilon = 1e-4);

        // central difference of v_safe(h(t), v_lead(t)) along the motion
        let dt = 1e-6;
        let fwd = safe_speed(h + (vl - v) * dt, vl + al * dt, &pr);
        let bwd = safe_speed(h - (vl - v) * dt, vl - al * dt, &pr);
        assert_relative_eq!(r, (fwd - bwd) / (2.0 * dt), max_relative = 1e-6);
    }

    #[test]
    fn rate_zeroed_below_floor() {
        assert_eq!(safe_speed_rate(4.0, 5.0, 0.0, 0.0, &p()), 0.0);
    }

    #[test]
    fn safe_accel_examples() {
        let pr = p();
        assert_eq!(safe_accel(10.0, 10.0, 0.0, &pr), 0.0);
        assert_relative_eq!(safe_accel(30.0, 29.19, 0.0, &pr), -0.81, epsilon = 1e-12);
        let pr2 = ControllerParams { k: 2.0, ..pr };
        assert_relative_eq!(safe_accel(20.0, 25.0, -1.0, &pr2), 9.0, epsilon = 1e-12);
    }
}
