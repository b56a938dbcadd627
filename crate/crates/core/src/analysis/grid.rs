use std::fmt::Write as _;

use super::boxes::{assign_boxes, GridParams, Side};
use super::variance::{format_percent, percent_change, pooled_speed_variance, Region};
use crate::error::AnalysisError;
use crate::trajectory::TrajectorySet;

/// Percentage change of behind-AV speed variance against front-AV variance,
/// for every pair of extents.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceGrid {
    /// Row extents, m.
    pub behind: Vec<f64>,
    /// Column extents, m, in display order.
    pub front: Vec<f64>,
    /// `cells[row][col]`, unrounded percent; `None` where not applicable.
    pub cells: Vec<Vec<Option<f64>>>,
}

/// 200 m to 1400 m in 200 m steps.
pub fn standard_distances() -> Vec<f64> {
    (1..=7).map(|k| 200.0 * k as f64).collect()
}

fn format_distance(d: f64) -> String {
    if d.fract() == 0.0 {
        format!("{}m", d as i64)
    } else {
        format!("{d}m")
    }
}

impl VarianceGrid {
    pub fn rounded(&self) -> Vec<Vec<Option<i64>>> {
        self.cells.iter().map(|r| r.iter().map(|c| c.map(|x| x.round() as i64)).collect()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("behind\\front");
        for &f in &self.front {
            write!(out, ",{}", format_distance(f)).unwrap();
        }
        out.push('\n');
        for (b, row) in self.behind.iter().zip(&self.cells) {
            out.push_str(&format_distance(*b));
            for c in row {
                write!(out, ",{}", format_percent(*c)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let head = "behind \\ front";
        let mut out = format!("{head:<14}");
        for &f in &self.front {
            write!(out, " {:>7}", format_distance(f)).unwrap();
        }
        out.push('\n');
        for (b, row) in self.behind.iter().zip(&self.cells) {
            write!(out, "{:<14}", format_distance(*b)).unwrap();
            for c in row {
                write!(out, " {:>7}", format_percent(*c)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// True when, in every column, the rounded reduction never grows as the
    /// behind extent grows. Not-applicable cells are ignored.
    pub fn reduction_non_increasing_behind(&self) -> bool {
        let r = self.rounded();
        (0..self.front.len()).all(|c| {
            let col: Vec<i64> = r.iter().filter_map(|row| row[c]).collect();
            col.windows(2).all(|w| -w[1] <= -w[0])
        })
    }
}

pub fn variance_grid(
    set: &TrajectorySet,
    av_id: &str,
    front_distances: &[f64],
    behind_distances: &[f64],
    params: &GridParams,
) -> Result<VarianceGrid, AnalysisError> {
    let max = |xs: &[f64]| xs.iter().copied().fold(0.0, f64::max);
    let params = GridParams { extent_front: max(front_distances), extent_behind: max(behind_distances), ..*params };
    let grid = assign_boxes(set, av_id, &params)?;
    let pooled = |side, d| pooled_speed_variance(set, &grid.within(side, d), &Region::All).ok();
    let front: Vec<Option<f64>> = front_distances.iter().map(|&d| pooled(Side::Front, d)).collect();
    let cells = behind_distances
        .iter()
        .map(|&b| {
            let vb = pooled(Side::Behind, b);
            front.iter().map(|vf| percent_change((*vf)?, vb?)).collect()
        })
        .collect();
    Ok(VarianceGrid { behind: behind_distances.to_vec(), front: front_distances.to_vec(), cells })
}
