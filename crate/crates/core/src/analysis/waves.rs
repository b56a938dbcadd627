use super::boxes::{subbox_averages, BoxGrid, SubBox};
use super::moving_average;
use crate::error::AnalysisError;
use crate::trajectory::TrajectorySet;

/// Threshold crossings found in one box, as sub-box mean `(t, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxCrossings {
    pub signed_box: i64,
    pub starts: Vec<[f64; 2]>,
    pub ends: Vec<[f64; 2]>,
    /// Empty sub-boxes passed over while scanning.
    pub skipped_bins: Vec<i64>,
}

impl BoxCrossings {
    /// Congested time intervals; a wave still open at the end of the data
    /// extends to infinity, one already underway at the start begins at minus infinity.
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        let mut events: Vec<(f64, bool)> = self.starts.iter().map(|p| (p[0], true)).collect();
        events.extend(self.ends.iter().map(|p| (p[0], false)));
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out = Vec::new();
        let mut open: Option<f64> = None;
        for (t, is_start) in events {
            match (is_start, open) {
                (true, _) => open = Some(t),
                (false, Some(t0)) => {
                    out.push((t0, t));
                    open = None;
                }
                (false, None) if out.is_empty() => out.push((f64::NEG_INFINITY, t)),
                (false, None) => {}
            }
        }
        if let Some(t0) = open {
            out.push((t0, f64::INFINITY));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WaveBoundary {
    /// `start_frontiers[k]` joins the k-th down-crossing of every box, in box order.
    pub start_frontiers: Vec<Vec<[f64; 2]>>,
    /// `end_frontiers[k]` joins the k-th up-crossing of every box.
    pub end_frontiers: Vec<Vec<[f64; 2]>>,
    pub per_box: Vec<BoxCrossings>,
    /// Boxes in which the speed never crossed the threshold.
    pub flagged: Vec<i64>,
}

fn crossings(points: &[SubBox], threshold: f64) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let mut starts = Vec::new();
    let mut ends = Vec::new();
    for w in points.windows(2) {
        let (prev, cur) = (w[0], w[1]);
        if prev.v > threshold && cur.v <= threshold {
            starts.push([cur.t, cur.y]);
        } else if prev.v <= threshold && cur.v > threshold {
            ends.push([cur.t, cur.y]);
        }
    }
    (starts, ends)
}

fn assemble(per_box: &[BoxCrossings], pick: fn(&BoxCrossings) -> &Vec<[f64; 2]>, smoothing: bool) -> Vec<Vec<[f64; 2]>> {
    let waves = per_box.iter().map(|b| pick(b).len()).max().unwrap_or(0);
    (0..waves)
        .map(|k| {
            let pts: Vec<[f64; 2]> = per_box.iter().filter_map(|b| pick(b).get(k).copied()).collect();
            if !smoothing {
                return pts;
            }
            let ts = moving_average(&pts.iter().map(|p| p[0]).collect::<Vec<_>>(), 1);
            let ys = moving_average(&pts.iter().map(|p| p[1]).collect::<Vec<_>>(), 1);
            ts.into_iter().zip(ys).map(|(t, y)| [t, y]).collect()
        })
        .collect()
}

/// Scans the sub-boxes of every box for speed-threshold crossings and joins
/// them into wave frontiers.
pub fn wave_boundaries(set: &TrajectorySet, grid: &BoxGrid, threshold: f64) -> Result<WaveBoundary, AnalysisError> {
    let p = &grid.params;
    let mut per_box = Vec::with_capacity(grid.boxes.len());
    let mut flagged = Vec::new();
    for bx in &grid.boxes {
        let series = subbox_averages(set, bx, p.t_bin, p.smoothing)?;
        let (starts, ends) = crossings(&series.points, threshold);
        if starts.is_empty() && ends.is_empty() {
            flagged.push(bx.signed_index());
        }
        per_box.push(BoxCrossings { signed_box: bx.signed_index(), starts, ends, skipped_bins: series.skipped });
    }
    Ok(WaveBoundary {
        start_frontiers: assemble(&per_box, |b| &b.starts, p.smoothing),
        end_frontiers: assemble(&per_box, |b| &b.ends, p.smoothing),
        per_box,
        flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sb(t: f64, v: f64) -> SubBox {
        SubBox { bin: 0, t, y: 10.0 * t, v, count: 1 }
    }

    #[test]
    fn crossing_rule() {
        let pts = [sb(5.0, 20.0), sb(15.0, 4.0), sb(25.0, 1.0), sb(35.0, 4.5), sb(45.0, 3.0)];
        let (s, e) = crossings(&pts, 4.0);
        assert_eq!(s, vec![[15.0, 150.0], [45.0, 450.0]]);
        assert_eq!(e, vec![[35.0, 350.0]]);
    }

    #[test]
    fn fast_traffic_has_no_crossings() {
        let pts: Vec<SubBox> = (0..10).map(|k| sb(k as f64, 30.0)).collect();
        assert_eq!(crossings(&pts, 4.0), (vec![], vec![]));
    }

    #[test]
    fn intervals_pairing() {
        let b = BoxCrossings {
            signed_box: 1,
            starts: vec![[10.0, 0.0], [50.0, 0.0]],
            ends: vec![[5.0, 0.0], [30.0, 0.0]],
            skipped_bins: vec![],
        };
        assert_eq!(b.intervals(), vec![(f64::NEG_INFINITY, 5.0), (10.0, 30.0), (50.0, f64::INFINITY)]);
    }
}
