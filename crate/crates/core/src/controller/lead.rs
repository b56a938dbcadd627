use super::target::{LeadSample, LeadSpeedBuffer};
use super::ControllerParams;

/// Filtered leader acceleration. `cold` is set until two samples have been seen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadAccel {
    pub value: f64,
    /// Unfiltered last finite difference.
    pub raw: f64,
    pub cold: bool,
}

/// First-order low-pass filter on the finite difference of the leader speed.
#[derive(Debug, Clone, Default)]
pub struct LeadAccelFilter {
    prev: Option<LeadSample>,
    estimate: f64,
    raw: f64,
    warm: bool,
}

impl LeadAccelFilter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, t: f64, v_lead: f64, time_constant: f64) -> LeadAccel {
        if let Some(prev) = self.prev {
            let dt = t - prev.t;
            if dt > 0.0 {
                let raw = (v_lead - prev.v_lead) / dt;
                let gain = 1.0 - (-dt / time_constant).exp();
                self.estimate += gain * (raw - self.estimate);
                self.raw = raw;
                self.warm = true;
            }
        }
        self.prev = Some(LeadSample { t, v_lead });
        self.current()
    }

    pub fn current(&self) -> LeadAccel {
        LeadAccel {
            value: if self.warm { self.estimate } else { 0.0 },
            raw: if self.warm { self.raw } else { 0.0 },
            cold: !self.warm,
        }
    }
}

/// Runs the leader-acceleration filter over every buffered sample.
pub fn estimate_lead_accel(buffer: &LeadSpeedBuffer, p: &ControllerParams) -> LeadAccel {
    let mut filter = LeadAccelFilter::new();
    let mut out = filter.current();
    for s in buffer.samples() {
        out = filter.update(s.t, s.v_lead, p.lead_accel_time_constant);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_is_cold() {
        let mut b = LeadSpeedBuffer::new();
        b.push(0.0, 12.0, 60.0);
        let est = estimate_lead_accel(&b, &ControllerParams::default());
        assert_eq!(est, LeadAccel { value: 0.0, raw: 0.0, cold: true });
    }

    #[test]
    fn constant_speed_gives_zero() {
        let mut b = LeadSpeedBuffer::new();
        for i in 0..50 {
            b.push(i as f64 * 0.05, 17.0, 60.0);
        }
        let est = estimate_lead_accel(&b, &ControllerParams::default());
        assert_eq!(est, LeadAccel { value: 0.0, raw: 0.0, cold: false });
    }

    #[test]
    fn ramp_settles_after_five_time_constants() {
        // discrete response to a ramp of slope r: r * (1 - exp(-n dt / T))
        let p = ControllerParams::default();
        let mut f = LeadAccelFilter::new();
        let dt = 0.05;
        let n = (5.0 * p.lead_accel_time_constant / dt).round() as usize;
        let mut est = f.update(0.0, 30.0, p.lead_accel_time_constant);
        for i in 1..=n {
            let t = i as f64 * dt;
            est = f.update(t, 30.0 - 2.0 * t, p.lead_accel_time_constant);
        }
        let expected = -2.0 * (1.0 - (-5.0f64).exp());
        assert!((est.value - expected).abs() < 1e-9);
        assert!((est.value + 2.0).abs() <= 0.05 * 2.0);
    }

    #[test]
    fn incremental_and_batch_agree() {
        let p = ControllerParams::default();
        let mut f = LeadAccelFilter::new();
        let mut b = LeadSpeedBuffer::new();
        let mut last = f.current();
        for i in 0..400 {
            let t = i as f64 * 0.05;
            let v = 20.0 + 3.0 * (0.3 * t).sin();
            b.push(t, v, 60.0);
            last = f.update(t, v, p.lead_accel_time_constant);
        }
        assert_eq!(estimate_lead_accel(&b, &p), last);
    }
}
