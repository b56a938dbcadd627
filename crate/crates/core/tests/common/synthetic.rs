//! Traffic crossed by a congested band with known edges.

use platoon::trajectory::{Sample, Trajectory, TrajectorySet, VehicleKind};

pub struct Band {
    /// Downstream edge at t = 0, m.
    pub head0: f64,
    pub width: f64,
    /// Edge velocity, m/s (negative: moving upstream).
    pub edge_speed: f64,
    pub v_in: f64,
    pub v_out: f64,
}

impl Band {
    pub fn head(&self, t: f64) -> f64 {
        self.head0 + self.edge_speed * t
    }
    pub fn tail(&self, t: f64) -> f64 {
        self.head(t) - self.width
    }
    fn inside(&self, t: f64, y: f64) -> bool {
        y >= self.tail(t) && y <= self.head(t)
    }
}

pub fn default_band() -> Band {
    Band { head0: 3000.0, width: 1000.0, edge_speed: -5.0, v_in: 2.0, v_out: 30.0 }
}

/// Vehicles every `spacing` metres on `[y_min, y_max]` at t = 0, sampled at
/// `dt`; the vehicle starting at 0 is `av`.
pub fn band_traffic(band: &Band, y_min: f64, y_max: f64, spacing: f64, duration: f64, dt: f64) -> TrajectorySet {
    let n = ((y_max - y_min) / spacing).round() as i64;
    let steps = (duration / dt).round() as usize;
    let mut trajectories = Vec::new();
    for k in 0..=n {
        let y0 = y_min + k as f64 * spacing;
        let id = if y0 == 0.0 { "av".to_string() } else { format!("v{k:03}") };
        let kind = if y0 == 0.0 { VehicleKind::ControlledAv } else { VehicleKind::Human };
        let mut tr = Trajectory::new(id, 1, kind);
        let mut y = y0;
        for s in 0..=steps {
            let t = s as f64 * dt;
            let v = if band.inside(t, y) { band.v_in } else { band.v_out };
            tr.samples.push(Sample { t, y, v });
            y += v * dt;
        }
        trajectories.push(tr);
    }
    TrajectorySet { trajectories, dt, av_id: Some("av".into()), ring_length: None }
}

/// Distance of `(t, y)` to the edge line `y = edge(s)`, measured in sub-box
/// units: the smallest `max(|t - s| / t_bin, |y - edge(s)| / box_width)`.
pub fn subbox_distance(t: f64, y: f64, edge: impl Fn(f64) -> f64, t_bin: f64, box_width: f64) -> f64 {
    let mut best = f64::INFINITY;
    let mut s = t - 5.0 * t_bin;
    while s <= t + 5.0 * t_bin {
        best = best.min(((t - s).abs() / t_bin).max((y - edge(s)).abs() / box_width));
        s += t_bin / 200.0;
    }
    best
}
