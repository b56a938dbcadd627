use std::collections::VecDeque;

use super::{ControllerParams, PlanningClip};
use crate::error::ControllerError;

/// One buffered leader-speed sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadSample {
    pub t: f64,
    pub v_lead: f64,
}

/// Leader speeds over the last `tau` seconds with a running trapezoidal integral.
#[derive(Debug, Clone, Default)]
pub struct LeadSpeedBuffer {
    samples: VecDeque<LeadSample>,
    integral: f64,
}

fn segment_area(a: &LeadSample, b: &LeadSample) -> f64 {
    0.5 * (a.v_lead + b.v_lead) * (b.t - a.t)
}

impl LeadSpeedBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a sample and evicts those older than `t - tau`.
    pub fn push(&mut self, t: f64, v_lead: f64, tau: f64) {
        let s = LeadSample { t, v_lead };
        if let Some(last) = self.samples.back() {
            self.integral += segment_area(last, &s);
        }
        self.samples.push_back(s);
        // small slack so a sample sitting exactly on the window edge survives rounding
        let cutoff = t - tau - 1e-9 * tau.max(1.0);
        while self.samples.len() > 1 && self.samples[0].t < cutoff {
            let first = self.samples.pop_front().unwrap();
            self.integral -= segment_area(&first, &self.samples[0]);
        }
        if self.samples.len() == 1 {
            self.integral = 0.0;
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> impl Iterator<Item = &LeadSample> {
        self.samples.iter()
    }

    pub fn last(&self) -> Option<&LeadSample> {
        self.samples.back()
    }

    /// Mean leader speed over the buffered span (the full history before `tau`
    /// has elapsed, the trailing `tau` seconds afterwards).
    pub fn mean(&self) -> Result<f64, ControllerError> {
        let first = self.samples.front().ok_or(ControllerError::Uninitialized)?;
        let last = self.samples.back().unwrap();
        let span = last.t - first.t;
        if span <= 0.0 {
            return Ok(last.v_lead);
        }
        Ok(self.integral / span)
    }
}

/// Running mean of the leader speed, recomputed from scratch over the buffer.
///
/// `t` is the current time; samples newer than `t` are ignored and the window
/// is `[max(t0, t - tau), t]`.
pub fn lead_speed_running_mean(
    buffer: &LeadSpeedBuffer,
    t: f64,
    p: &ControllerParams,
) -> Result<f64, ControllerError> {
    let start = t - p.tau - 1e-9 * p.tau.max(1.0);
    let window: Vec<&LeadSample> = buffer
        .samples()
        .filter(|s| s.t <= t && s.t >= start)
        .collect();
    let (first, last) = match (window.first(), window.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => return Err(ControllerError::Uninitialized),
    };
    let span = last.t - first.t;
    if span <= 0.0 {
        return Ok(last.v_lead);
    }
    let area: f64 = window.windows(2).map(|w| segment_area(w[0], w[1])).sum();
    Ok(area / span)
}

/// Local-mode target: running-mean leader speed plus a catch-up term when the
/// gap exceeds the target time gap.
pub fn target_speed_local(v_bar_lead: f64, h: f64, v: f64, p: &ControllerParams) -> f64 {
    let surplus = (p.c2 * (h - p.delta1 * v)).max(0.0);
    let denom = v.max(1.0);
    v_bar_lead + p.c1 * surplus / (denom * denom)
}

/// Planning-mode target from the downstream speed `v_down`.
///
/// `upper_clip` is false while the front sensor is blind; the `alpha1 * v_lead`
/// term is then dropped.
pub fn target_speed_planning(v_down: f64, v_lead: f64, upper_clip: bool, p: &ControllerParams) -> f64 {
    let floor = v_down.max(p.alpha0 * v_lead);
    match (p.planning_clip, upper_clip) {
        (PlanningClip::Literal, true) => floor.max((p.alpha1 * v_lead).min(p.v_ref)),
        (PlanningClip::Literal, false) => floor,
        (PlanningClip::Band, true) => floor.min((p.alpha1 * v_lead).min(p.v_ref)),
        (PlanningClip::Band, false) => floor.min(p.v_ref),
    }
}

pub fn target_accel(v: f64, v_target: f64, p: &ControllerParams) -> f64 {
    -p.k * (v - v_target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn step_signal(dt: f64, until: f64) -> LeadSpeedBuffer {
        let mut b = LeadSpeedBuffer::new();
        let n = (until / dt).round() as usize;
        for i in 0..=n {
            let t = i as f64 * dt;
            b.push(t, if t < 5.0 { 10.0 } else { 20.0 }, 10.0);
        }
        b
    }

    #[test]
    fn empty_buffer_is_an_error() {
        let b = LeadSpeedBuffer::new();
        assert_eq!(b.mean(), Err(ControllerError::Uninitialized));
        let p = ControllerParams::default();
        assert_eq!(lead_speed_running_mean(&b, 0.0, &p), Err(ControllerError::Uninitialized));
    }

    #[test]
    fn constant_signal_mean_is_constant() {
        let p = ControllerParams { tau: 3.0, ..Default::default() };
        let mut b = LeadSpeedBuffer::new();
        for i in 0..200 {
            let t = i as f64 * 0.05;
            b.push(t, 13.7, p.tau);
            assert_relative_eq!(b.mean().unwrap(), 13.7, max_relative = 1e-12);
            assert_relative_eq!(lead_speed_running_mean(&b, t, &p).unwrap(), 13.7, max_relative = 1e-12);
        }
    }

    #[test]
    fn step_signal_means() {
        // closed form: 10 m/s for 5 s then 20 m/s for 5 s -> 15 over [0, 10];
        // trapezoid smears the jump over one sample interval.
        let p = ControllerParams { tau: 10.0, ..Default::default() };
        let b = step_signal(0.05, 10.0);
        assert!((b.mean().unwrap() - 15.0).abs() <= 0.05 * 10.0 / (2.0 * 10.0) + 1e-9);
        assert!((lead_speed_running_mean(&b, 10.0, &p).unwrap() - 15.0).abs() <= 0.026);

        let b = step_signal(0.05, 20.0);
        assert_relative_eq!(b.mean().unwrap(), 20.0, max_relative = 1e-9);
        assert_relative_eq!(lead_speed_running_mean(&b, 20.0, &p).unwrap(), 20.0, max_relative = 1e-12);
    }

    #[test]
    fn buffer_span_bounded_by_tau() {
        let mut b = LeadSpeedBuffer::new();
        for i in 0..1000 {
            b.push(i as f64 * 0.05, (i % 17) as f64, 2.0);
            let first = b.samples().next().unwrap().t;
            assert!(b.last().unwrap().t - first <= 2.0 + 1e-9);
        }
        assert_eq!(b.len(), 41);
    }

    #[test]
    fn local_target_examples() {
        let p = ControllerParams { c1: 1.0, c2: 1.0, delta1: 2.0, ..Default::default() };
        assert_eq!(target_speed_local(10.0, 20.0, 10.0, &p), 10.0);
        assert_relative_eq!(target_speed_local(10.0, 30.0, 10.0, &p), 10.1, epsilon = 1e-12);
        assert_relative_eq!(target_speed_local(5.0, 10.0, 0.5, &p), 14.0, epsilon = 1e-12);
    }

    #[test]
    fn planning_target_examples() {
        let p = ControllerParams { alpha0: 0.8, alpha1: 1.2, v_ref: 31.0, ..Default::default() };
        assert_eq!(target_speed_planning(31.0, 31.0, true, &ControllerParams { v_ref: 31.0, ..p.clone() }), 31.0);
        assert_eq!(target_speed_planning(15.0, 10.0, true, &p), 15.0);
        assert_eq!(target_speed_planning(5.0, 10.0, true, &p), 12.0);
        // blind: the alpha1 term no longer props the target up
        assert_eq!(target_speed_planning(5.0, 10.0, false, &p), 8.0);

        let band = ControllerParams { planning_clip: PlanningClip::Band, ..p };
        assert_eq!(target_speed_planning(15.0, 10.0, true, &band), 12.0);
        assert_eq!(target_speed_planning(5.0, 10.0, true, &band), 8.0);
        assert_eq!(target_speed_planning(15.0, 10.0, false, &band), 15.0);
    }

    #[test]
    fn target_accel_examples() {
        let p = ControllerParams::default();
        assert_eq!(target_accel(10.0, 10.0, &p), 0.0);
        assert_eq!(target_accel(12.0, 10.0, &p), -2.0);
        let p = ControllerParams { k: 0.5, ..p };
        assert_eq!(target_accel(8.0, 10.0, &p), 1.0);
    }
}
