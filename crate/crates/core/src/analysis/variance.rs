use std::fmt;
use std::str::FromStr;

use super::boxes::{assign_boxes, BoxGrid, GridParams, Side};
use super::waves::{wave_boundaries, WaveBoundary};
use crate::error::AnalysisError;
use crate::trajectory::TrajectorySet;

/// Population variance (divides by N). Needs at least two values.
pub fn population_variance(xs: impl IntoIterator<Item = f64>) -> Result<f64, AnalysisError> {
    let xs: Vec<f64> = xs.into_iter().collect();
    let n = xs.len();
    if n < 2 {
        return Err(AnalysisError::TooFewSamples(n));
    }
    if xs.iter().all(|&x| x == xs[0]) {
        return Ok(0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    Ok(xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64)
}

/// Part of the time-space plane a variance is pooled over.
#[derive(Debug, Clone, Copy)]
pub enum Region<'a> {
    All,
    Window { t0: f64, t1: f64, y0: f64, y1: f64 },
    /// Inside the congested intervals of each trajectory's box.
    Wave { grid: &'a BoxGrid, waves: &'a WaveBoundary },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegionKind {
    #[default]
    All,
    Wave,
}

impl fmt::Display for RegionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionKind::All => "all",
            RegionKind::Wave => "wave",
        })
    }
}

impl FromStr for RegionKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(RegionKind::All),
            "wave" => Ok(RegionKind::Wave),
            _ => Err(format!("unknown region `{s}` (expected `all` or `wave`)")),
        }
    }
}

/// Variance of every speed sample of `members` falling in `region`.
pub fn pooled_speed_variance(set: &TrajectorySet, members: &[usize], region: &Region) -> Result<f64, AnalysisError> {
    let mut speeds = Vec::new();
    for &i in members {
        let tr = &set.trajectories[i];
        match region {
            Region::All => speeds.extend(tr.samples.iter().map(|s| s.v)),
            Region::Window { t0, t1, y0, y1 } => speeds.extend(
                tr.samples
                    .iter()
                    .filter(|s| s.t >= *t0 && s.t <= *t1 && s.y >= *y0 && s.y <= *y1)
                    .map(|s| s.v),
            ),
            Region::Wave { grid, waves } => {
                let Some(bx) = grid.box_of(i) else { continue };
                let Some(crossings) = waves.per_box.iter().find(|c| c.signed_box == bx.signed_index()) else {
                    continue;
                };
                let intervals = crossings.intervals();
                speeds.extend(
                    tr.samples
                        .iter()
                        .filter(|s| intervals.iter().any(|&(a, b)| s.t >= a && s.t <= b))
                        .map(|s| s.v),
                );
            }
        }
    }
    population_variance(speeds)
}

/// `100 (behind - front) / front`; `None` when the front variance is not positive.
pub fn percent_change(var_front: f64, var_behind: f64) -> Option<f64> {
    (var_front > 0.0 && var_behind.is_finite()).then(|| 100.0 * (var_behind - var_front) / var_front)
}

/// Rounded percentage as printed in reports: `-52%`, `0%`, `+5%`, or `n/a`.
pub fn format_percent(p: Option<f64>) -> String {
    match p.map(|x| x.round() as i64) {
        None => "n/a".to_string(),
        Some(r) if r > 0 => format!("+{r}%"),
        Some(r) => format!("{r}%"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport {
    pub extent_front: f64,
    pub extent_behind: f64,
    pub region: RegionKind,
    pub variance_front: f64,
    pub variance_behind: f64,
    pub pct_change: Option<f64>,
    /// Variance per box (signed index), `None` where a box has too few samples.
    pub per_box: Vec<(i64, Option<f64>)>,
}

impl fmt::Display for VarianceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "region: {}", self.region)?;
        writeln!(f, "front  (0-{} m): {:.4} m2/s2", self.extent_front, self.variance_front)?;
        writeln!(f, "behind (0-{} m): {:.4} m2/s2", self.extent_behind, self.variance_behind)?;
        writeln!(f, "change: {}", format_percent(self.pct_change))?;
        for (b, v) in &self.per_box {
            match v {
                Some(v) => writeln!(f, "  box {b:+}: {v:.4}")?,
                None => writeln!(f, "  box {b:+}: n/a")?,
            }
        }
        Ok(())
    }
}

pub fn variance_report(
    set: &TrajectorySet,
    av_id: &str,
    extent_front: f64,
    extent_behind: f64,
    region: RegionKind,
    params: &GridParams,
) -> Result<VarianceReport, AnalysisError> {
    let params = GridParams { extent_front, extent_behind, ..*params };
    let grid = assign_boxes(set, av_id, &params)?;
    let waves;
    let reg = match region {
        RegionKind::All => Region::All,
        RegionKind::Wave => {
            waves = wave_boundaries(set, &grid, params.speed_threshold)?;
            Region::Wave { grid: &grid, waves: &waves }
        }
    };
    let variance_front = pooled_speed_variance(set, &grid.within(Side::Front, extent_front), &reg)?;
    let variance_behind = pooled_speed_variance(set, &grid.within(Side::Behind, extent_behind), &reg)?;
    let per_box = grid
        .boxes
        .iter()
        .map(|b| {
            let members: Vec<usize> = b.members.iter().map(|m| m.0).collect();
            (b.signed_index(), pooled_speed_variance(set, &members, &reg).ok())
        })
        .collect();
    Ok(VarianceReport {
        extent_front,
        extent_behind,
        region,
        variance_front,
        variance_behind,
        pct_change: percent_change(variance_front, variance_behind),
        per_box,
    })
}
