//! Straight-line reference implementation of the controller, written from the
//! formulas alone. Shares only the parameter struct with the library.

use platoon::controller::{ControllerParams, PlanningClip};

pub fn v_safe(h: f64, vl: f64, p: &ControllerParams) -> f64 {
    let am = -p.a_min;
    let alm = -p.a_l_min;
    let r = 2.0 * am * (h - p.s0 + vl * vl / (2.0 * alm));
    if r <= 0.0 {
        0.0
    } else {
        r.sqrt()
    }
}

/// d/dt of v_safe with dh/dt = vl - v and dvl/dt = al.
pub fn v_safe_rate(h: f64, v: f64, vl: f64, al: f64, p: &ControllerParams) -> f64 {
    let vs = v_safe(h, vl, p);
    if vs <= p.eps_v {
        return 0.0;
    }
    // d(vs^2)/dt = 2 |a_min| (dh/dt + vl al / |a_l_min|)
    let d_sq = 2.0 * (-p.a_min) * ((vl - v) + vl * al / (-p.a_l_min));
    let r = d_sq / (2.0 * vs);
    if r.is_finite() {
        r
    } else {
        0.0
    }
}

pub fn a_safe(v: f64, vs: f64, rate: f64, p: &ControllerParams) -> f64 {
    rate - p.k * (v - vs)
}

/// Trapezoid mean of `(t, vl)` samples with `t` in `[now - tau, now]`.
pub fn running_mean(hist: &[(f64, f64)], now: f64, p: &ControllerParams) -> Option<f64> {
    let lo = now - p.tau - 1e-9 * p.tau.max(1.0);
    let w: Vec<(f64, f64)> = hist.iter().copied().filter(|&(t, _)| t >= lo && t <= now).collect();
    let (first, last) = (*w.first()?, *w.last()?);
    if last.0 - first.0 <= 0.0 {
        return Some(last.1);
    }
    let mut area = 0.0;
    for i in 1..w.len() {
        area += (w[i].0 - w[i - 1].0) * (w[i].1 + w[i - 1].1) / 2.0;
    }
    Some(area / (last.0 - first.0))
}

pub fn v_target_local(vbar: f64, h: f64, v: f64, p: &ControllerParams) -> f64 {
    let d = if v > 1.0 { v } else { 1.0 };
    let s = p.c2 * (h - p.delta1 * v);
    vbar + p.c1 * if s > 0.0 { s } else { 0.0 } / (d * d)
}

pub fn v_target_planning(v_down: f64, vl: f64, upper: bool, p: &ControllerParams) -> f64 {
    let lo = if v_down > p.alpha0 * vl { v_down } else { p.alpha0 * vl };
    // blind: the leader-relative cap is dropped
    let hi = if !upper {
        if p.planning_clip == PlanningClip::Literal {
            return lo;
        }
        p.v_ref
    } else if p.alpha1 * vl < p.v_ref {
        p.alpha1 * vl
    } else {
        p.v_ref
    };
    match p.planning_clip {
        PlanningClip::Literal => lo.max(hi),
        PlanningClip::Band => lo.min(hi),
    }
}

pub fn a_target(v: f64, vt: f64, p: &ControllerParams) -> f64 {
    p.k * (vt - v)
}

pub fn min_brake(h: f64, v: f64, vl: f64, al: f64, p: &ControllerParams) -> f64 {
    let lead_stop = if vl < p.eps_v { 0.0 } else { vl * vl / (-2.0 * al) };
    -(v * v) / (2.0 * (h - p.s0 + lead_stop))
}

pub fn a_mpc(h: f64, v: f64, vl: f64, al: f64, p: &ControllerParams) -> f64 {
    if h <= p.s0 + p.eps_h {
        return p.a_min;
    }
    let close = al - (v - vl) * (v - vl) / (2.0 * (h - p.s0));
    if al < -p.eps_a {
        let mb = min_brake(h, v, vl, al, p);
        let prop = if vl < p.eps_v { mb } else { al * v / vl };
        if mb - prop > 0.0 {
            mb
        } else if vl - v >= 0.0 {
            prop
        } else {
            close
        }
    } else if vl - v < 0.0 {
        close
    } else {
        let x = al * (1.0 + p.k2 * (vl - v));
        if x < p.a_max {
            x
        } else {
            p.a_max
        }
    }
}

/// First-order low-pass of finite differences: (estimate, last raw, warm).
pub fn lead_accel(hist: &[(f64, f64)], tc: f64) -> (f64, f64, bool) {
    let (mut est, mut raw, mut warm) = (0.0, 0.0, false);
    for i in 1..hist.len() {
        let dt = hist[i].0 - hist[i - 1].0;
        if dt > 0.0 {
            raw = (hist[i].1 - hist[i - 1].1) / dt;
            est += (1.0 - (-dt / tc).exp()) * (raw - est);
            warm = true;
        }
    }
    (est, raw, warm)
}

/// Oracle controller memory: the whole history, nothing incremental.
#[derive(Default, Clone)]
pub struct Memory {
    pub hist: Vec<(f64, f64)>,
    pub h: f64,
    pub vl: f64,
    pub seen: bool,
    pub lost: bool,
}

pub struct Input {
    pub t: f64,
    pub y: f64,
    pub v: f64,
    /// `(v_lead, h)` when the sensor sees the leader.
    pub lead: Option<(f64, f64)>,
}

/// `v_down` lookup on `(start, end, v_down)` bins.
pub fn plan_lookup(bins: &[(f64, f64, f64)], key: f64) -> Option<f64> {
    bins.iter().find(|b| b.0 <= key && key < b.1).map(|b| b.2)
}

/// `(bins, keyed by time, issued_at)`.
pub type Plan<'a> = (&'a [(f64, f64, f64)], bool, f64);

/// Clamped command, or `None` when the engagement gate refuses control.
pub fn command(
    m: &mut Memory,
    x: &Input,
    plan: Option<Plan>,
    dt: f64,
    p: &ControllerParams,
) -> Option<f64> {
    let clamp = |a: f64| a.max(p.a_min).min(p.a_max);
    if p.engagement_gate && x.v <= p.engage_speed {
        return None;
    }
    match x.lead {
        Some((vl, h)) => {
            m.vl = vl;
            m.h = h;
            m.seen = true;
            m.lost = false;
        }
        None if m.seen => {
            m.h += p.h_correction * dt;
            m.lost = true;
        }
        None => return Some(clamp(a_target(x.v, p.v_ref, p))),
    }
    m.hist.push((x.t, m.vl));
    let (est, raw, warm) = lead_accel(&m.hist, p.lead_accel_time_constant);
    let al_barrier = if warm { raw.min(est) } else { p.a_l_min };
    let vs = v_safe(m.h, m.vl, p);
    let s = a_safe(x.v, vs, v_safe_rate(m.h, x.v, m.vl, al_barrier, p), p);

    let v_down = plan.and_then(|(bins, by_time, issued)| {
        if x.t - issued >= p.plan_max_age {
            return None;
        }
        plan_lookup(bins, if by_time { x.t } else { x.y })
    });
    let vt = match v_down {
        Some(vd) => v_target_planning(vd, m.vl, !m.lost, p),
        None => v_target_local(running_mean(&m.hist, x.t, p).unwrap(), m.h, x.v, p),
    };
    let tgt = a_target(x.v, vt, p);
    let mpc = if m.lost { p.a_max } else { a_mpc(m.h, x.v, m.vl, est, p) };
    if m.h <= p.s0 + p.eps_h {
        return Some(p.a_min);
    }
    Some(clamp(s.min(tgt).min(mpc)))
}
