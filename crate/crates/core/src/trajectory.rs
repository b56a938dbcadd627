use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VehicleKind {
    Human,
    ControlledAv,
    ScriptedLeader,
}

impl fmt::Display for VehicleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VehicleKind::Human => "human",
            VehicleKind::ControlledAv => "av",
            VehicleKind::ScriptedLeader => "leader",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub y: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: String,
    pub lane: i64,
    pub kind: VehicleKind,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn new(id: impl Into<String>, lane: i64, kind: VehicleKind) -> Self {
        Trajectory { id: id.into(), lane, kind, samples: Vec::new() }
    }

    pub fn t_start(&self) -> Option<f64> {
        self.samples.first().map(|s| s.t)
    }

    pub fn t_end(&self) -> Option<f64> {
        self.samples.last().map(|s| s.t)
    }

    /// Positions with ring wraps removed, so that `y` increases with travel.
    pub fn unwrapped_y(&self, ring_length: Option<f64>) -> Vec<f64> {
        let Some(l) = ring_length else {
            return self.samples.iter().map(|s| s.y).collect();
        };
        let mut offset = 0.0;
        let mut prev: Option<f64> = None;
        self.samples
            .iter()
            .map(|s| {
                if let Some(p) = prev {
                    if s.y - p < -l / 2.0 {
                        offset += l;
                    } else if s.y - p > l / 2.0 {
                        offset -= l;
                    }
                }
                prev = Some(s.y);
                s.y + offset
            })
            .collect()
    }

    /// Sample whose time is within `tol` of `t`.
    pub fn sample_at(&self, t: f64, tol: f64) -> Option<&Sample> {
        let i = self.samples.partition_point(|s| s.t < t - tol);
        self.samples.get(i).filter(|s| (s.t - t).abs() <= tol)
    }
}

/// Sampled trajectories of a platoon on a shared time grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectorySet {
    pub trajectories: Vec<Trajectory>,
    /// Sampling interval, s.
    pub dt: f64,
    pub av_id: Option<String>,
    /// Ring length when positions wrap, m.
    pub ring_length: Option<f64>,
}

impl TrajectorySet {
    pub fn get(&self, id: &str) -> Option<&Trajectory> {
        self.trajectories.iter().find(|tr| tr.id == id)
    }

    pub fn av(&self) -> Option<&Trajectory> {
        self.av_id.as_deref().and_then(|id| self.get(id))
    }

    pub fn sample_count(&self) -> usize {
        self.trajectories.iter().map(|tr| tr.samples.len()).sum()
    }

    pub fn time_span(&self) -> Option<(f64, f64)> {
        let t0 = self.trajectories.iter().filter_map(Trajectory::t_start).reduce(f64::min)?;
        let t1 = self.trajectories.iter().filter_map(Trajectory::t_end).reduce(f64::max)?;
        Some((t0, t1))
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.trajectories.iter().position(|tr| tr.id == id)
    }

    /// Tolerance used when matching timestamps across trajectories.
    pub fn time_tolerance(&self) -> f64 {
        if self.dt > 0.0 {
            0.25 * self.dt
        } else {
            1e-6
        }
    }

    /// All speed samples with `t` in `[t0, t1]`.
    pub fn speeds_between(&self, t0: f64, t1: f64) -> Vec<f64> {
        self.trajectories
            .iter()
            .flat_map(|tr| tr.samples.iter())
            .filter(|s| s.t >= t0 && s.t <= t1)
            .map(|s| s.v)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(ys: &[f64]) -> Trajectory {
        let mut t = Trajectory::new("a", 1, VehicleKind::Human);
        t.samples = ys.iter().enumerate().map(|(i, &y)| Sample { t: i as f64, y, v: 1.0 }).collect();
        t
    }

    #[test]
    fn unwrap_ring() {
        let t = tr(&[250.0, 258.0, 3.0, 12.0, 259.0]);
        assert_eq!(t.unwrapped_y(Some(260.0)), vec![250.0, 258.0, 263.0, 272.0, 259.0]);
        assert_eq!(t.unwrapped_y(None), vec![250.0, 258.0, 3.0, 12.0, 259.0]);
    }

    #[test]
    fn sample_lookup() {
        let t = tr(&[0.0, 1.0, 2.0]);
        assert_eq!(t.sample_at(1.01, 0.05).map(|s| s.y), Some(1.0));
        assert!(t.sample_at(1.5, 0.05).is_none());
        assert!(t.sample_at(9.0, 0.05).is_none());
    }
}
