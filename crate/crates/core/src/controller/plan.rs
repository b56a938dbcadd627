use serde::Deserialize;

use crate::error::ConfigError;

/// Whether plan bins are keyed by ego position or by time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanAxis {
    Position,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanBin {
    pub start: f64,
    pub end: f64,
    pub v_down: f64,
}

/// A downstream target-speed profile published by a speed planner.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanProfile {
    axis: PlanAxis,
    bins: Vec<PlanBin>,
    pub issued_at: f64,
}

impl PlanProfile {
    pub fn new(axis: PlanAxis, mut bins: Vec<PlanBin>, issued_at: f64) -> Result<Self, ConfigError> {
        bins.sort_by(|a, b| a.start.total_cmp(&b.start));
        for b in &bins {
            if !(b.start < b.end) || !(b.v_down >= 0.0) {
                return Err(ConfigError::Invalid(format!(
                    "plan bin [{}, {}) with v_down {} is invalid",
                    b.start, b.end, b.v_down
                )));
            }
        }
        if let Some(w) = bins.windows(2).find(|w| w[1].start < w[0].end) {
            return Err(ConfigError::Invalid(format!(
                "plan bins [{}, {}) and [{}, {}) overlap",
                w[0].start, w[0].end, w[1].start, w[1].end
            )));
        }
        Ok(PlanProfile { axis, bins, issued_at })
    }

    pub fn axis(&self) -> PlanAxis {
        self.axis
    }

    pub fn bins(&self) -> &[PlanBin] {
        &self.bins
    }

    /// Downstream speed for the ego at time `t` and position `y`, if covered.
    pub fn v_down_at(&self, t: f64, y: f64) -> Option<f64> {
        let key = match self.axis {
            PlanAxis::Position => y,
            PlanAxis::Time => t,
        };
        let i = self.bins.partition_point(|b| b.end <= key);
        self.bins.get(i).filter(|b| b.start <= key).map(|b| b.v_down)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(start: f64, end: f64, v_down: f64) -> PlanBin {
        PlanBin { start, end, v_down }
    }

    #[test]
    fn lookup() {
        let p = PlanProfile::new(PlanAxis::Time, vec![bin(10.0, 20.0, 7.0), bin(0.0, 10.0, 5.0)], 0.0).unwrap();
        assert_eq!(p.v_down_at(0.0, 1e6), Some(5.0));
        assert_eq!(p.v_down_at(10.0, 0.0), Some(7.0));
        assert_eq!(p.v_down_at(20.0, 0.0), None);
        assert_eq!(p.v_down_at(-1.0, 0.0), None);
    }

    #[test]
    fn gaps_between_bins() {
        let p = PlanProfile::new(PlanAxis::Position, vec![bin(0.0, 10.0, 5.0), bin(20.0, 30.0, 6.0)], 0.0).unwrap();
        assert_eq!(p.v_down_at(0.0, 15.0), None);
        assert_eq!(p.v_down_at(0.0, 25.0), Some(6.0));
    }

    #[test]
    fn rejects_overlap_and_negative_speed() {
        assert!(PlanProfile::new(PlanAxis::Time, vec![bin(0.0, 10.0, 5.0), bin(5.0, 15.0, 6.0)], 0.0).is_err());
        assert!(PlanProfile::new(PlanAxis::Time, vec![bin(0.0, 10.0, -1.0)], 0.0).is_err());
    }
}
