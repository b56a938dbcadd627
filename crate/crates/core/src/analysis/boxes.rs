use serde::Deserialize;

use super::moving_average;
use crate::error::AnalysisError;
use crate::trajectory::{Trajectory, TrajectorySet};

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridParams {
    /// Width of a distance band, m.
    pub box_width: f64,
    /// Duration of a sub-box, s.
    pub t_bin: f64,
    pub extent_front: f64,
    pub extent_behind: f64,
    /// Window-3 moving average on sub-box averages and on frontiers.
    pub smoothing: bool,
    /// Speed below which a sub-box counts as congested, m/s.
    pub speed_threshold: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            box_width: 200.0,
            t_bin: 10.0,
            extent_front: 1400.0,
            extent_behind: 1400.0,
            smoothing: true,
            speed_threshold: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Behind,
    Front,
}

/// Trajectories whose initial distance to the AV falls in one band.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceBox {
    pub side: Side,
    /// 1 for the band adjacent to the AV.
    pub index: usize,
    /// `(trajectory index, signed distance)` pairs.
    pub members: Vec<(usize, f64)>,
}

impl DistanceBox {
    /// Negative behind the AV, positive in front.
    pub fn signed_index(&self) -> i64 {
        match self.side {
            Side::Behind => -(self.index as i64),
            Side::Front => self.index as i64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxGrid {
    pub params: GridParams,
    pub av: usize,
    /// Sorted by signed index, furthest behind first.
    pub boxes: Vec<DistanceBox>,
}

impl BoxGrid {
    pub fn box_of(&self, trajectory: usize) -> Option<&DistanceBox> {
        self.boxes.iter().find(|b| b.members.iter().any(|&(i, _)| i == trajectory))
    }

    /// Members on `side` whose distance to the AV is at most `extent`.
    pub fn within(&self, side: Side, extent: f64) -> Vec<usize> {
        self.boxes
            .iter()
            .filter(|b| b.side == side)
            .flat_map(|b| b.members.iter())
            .filter(|&&(_, d)| d.abs() <= extent)
            .map(|&(i, _)| i)
            .collect()
    }
}

/// Distance from the AV to `tr` at their first common timestamp.
pub fn signed_distance(set: &TrajectorySet, av: &Trajectory, tr: &Trajectory) -> Option<f64> {
    let tol = set.time_tolerance();
    let t0 = av.t_start()?;
    let first = tr.samples.partition_point(|s| s.t < t0 - tol);
    let (s, a) = tr.samples[first..].iter().find_map(|s| av.sample_at(s.t, tol).map(|a| (s, a)))?;
    let d = s.y - a.y;
    Some(match set.ring_length {
        Some(l) => {
            let r = d.rem_euclid(l);
            if r > l / 2.0 {
                r - l
            } else {
                r
            }
        }
        None => d,
    })
}

/// Band number of a distance: ties at band edges go to the band nearer the AV.
pub fn band_index(distance: f64, width: f64) -> usize {
    ((distance.abs() / width).ceil() as usize).max(1)
}

pub fn assign_boxes(set: &TrajectorySet, av_id: &str, params: &GridParams) -> Result<BoxGrid, AnalysisError> {
    let av_idx = set.index_of(av_id).ok_or_else(|| AnalysisError::MissingAv(av_id.to_string()))?;
    let av = &set.trajectories[av_idx];
    let mut boxes: Vec<DistanceBox> = Vec::new();
    let mut overlapping = false;
    for (i, tr) in set.trajectories.iter().enumerate() {
        if i == av_idx {
            continue;
        }
        let Some(d) = signed_distance(set, av, tr) else { continue };
        overlapping = true;
        let (side, extent) = if d >= 0.0 {
            (Side::Front, params.extent_front)
        } else {
            (Side::Behind, params.extent_behind)
        };
        if d.abs() > extent {
            continue;
        }
        let index = band_index(d, params.box_width);
        match boxes.iter_mut().find(|b| b.side == side && b.index == index) {
            Some(b) => b.members.push((i, d)),
            None => boxes.push(DistanceBox { side, index, members: vec![(i, d)] }),
        }
    }
    if !overlapping {
        return Err(AnalysisError::NoOverlap);
    }
    boxes.sort_by_key(DistanceBox::signed_index);
    Ok(BoxGrid { params: *params, av: av_idx, boxes })
}

/// Mean time, position and speed of one sub-box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubBox {
    pub bin: i64,
    pub t: f64,
    pub y: f64,
    pub v: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SubBoxSeries {
    pub points: Vec<SubBox>,
    /// Bins inside the box's time range that held no samples.
    pub skipped: Vec<i64>,
}

pub fn subbox_averages(
    set: &TrajectorySet,
    bx: &DistanceBox,
    t_bin: f64,
    smoothing: bool,
) -> Result<SubBoxSeries, AnalysisError> {
    // bin -> (sum t, sum y, sum v, count)
    let mut acc: std::collections::BTreeMap<i64, (f64, f64, f64, usize)> = Default::default();
    for &(i, _) in &bx.members {
        let tr = &set.trajectories[i];
        let ys = tr.unwrapped_y(set.ring_length);
        for (s, y) in tr.samples.iter().zip(ys) {
            let e = acc.entry((s.t / t_bin).floor() as i64).or_default();
            e.0 += s.t;
            e.1 += y;
            e.2 += s.v;
            e.3 += 1;
        }
    }
    let (Some(&first), Some(&last)) = (acc.keys().next(), acc.keys().next_back()) else {
        return Err(AnalysisError::EmptyBox);
    };
    let skipped = (first..=last).filter(|b| !acc.contains_key(b)).collect();
    let mut points: Vec<SubBox> = acc
        .into_iter()
        .map(|(bin, (t, y, v, n))| {
            let n_f = n as f64;
            SubBox { bin, t: t / n_f, y: y / n_f, v: v / n_f, count: n }
        })
        .collect();
    if smoothing {
        let smooth = |f: fn(&SubBox) -> f64| moving_average(&points.iter().map(f).collect::<Vec<_>>(), 1);
        let (ts, ys, vs) = (smooth(|p| p.t), smooth(|p| p.y), smooth(|p| p.v));
        for (k, p) in points.iter_mut().enumerate() {
            p.t = ts[k];
            p.y = ys[k];
            p.v = vs[k];
        }
    }
    Ok(SubBoxSeries { points, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::{Sample, VehicleKind};

    fn straight(id: &str, y0: f64, v: f64, n: usize, dt: f64) -> Trajectory {
        let mut tr = Trajectory::new(id, 1, VehicleKind::Human);
        tr.samples = (0..n).map(|k| Sample { t: k as f64 * dt, y: y0 + v * k as f64 * dt, v }).collect();
        tr
    }

    fn set(trs: Vec<Trajectory>) -> TrajectorySet {
        TrajectorySet { trajectories: trs, dt: 1.0, av_id: Some("av".into()), ring_length: None }
    }

    #[test]
    fn band_examples() {
        assert_eq!(band_index(150.0, 200.0), 1);
        assert_eq!(band_index(-250.0, 200.0), 2);
        assert_eq!(band_index(200.0, 200.0), 1);
        assert_eq!(band_index(0.0, 200.0), 1);
    }

    #[test]
    fn assignment() {
        let s = set(vec![
            straight("av", 1000.0, 20.0, 50, 1.0),
            straight("a", 1150.0, 20.0, 50, 1.0),
            straight("b", 750.0, 20.0, 50, 1.0),
            straight("far", 5000.0, 20.0, 50, 1.0),
        ]);
        let g = assign_boxes(&s, "av", &GridParams::default()).unwrap();
        let idx: Vec<i64> = g.boxes.iter().map(DistanceBox::signed_index).collect();
        assert_eq!(idx, vec![-2, 1]);
        assert_eq!(g.box_of(1).unwrap().signed_index(), 1);
        assert_eq!(g.box_of(2).unwrap().signed_index(), -2);
        assert!(g.box_of(0).is_none());
        assert!(g.box_of(3).is_none());
    }

    #[test]
    fn distance_at_first_common_time() {
        let av = straight("av", 0.0, 10.0, 100, 1.0);
        let mut late = straight("late", 0.0, 10.0, 50, 1.0);
        for s in &mut late.samples {
            s.t += 20.0;
            s.y += 300.0;
        }
        let s = set(vec![av, late]);
        // av at 200 when late appears at 300
        assert_eq!(signed_distance(&s, &s.trajectories[0], &s.trajectories[1]), Some(100.0));
    }

    #[test]
    fn ring_distance_is_wrapped() {
        let mut s = set(vec![straight("av", 250.0, 0.0, 3, 1.0), straight("a", 10.0, 0.0, 3, 1.0)]);
        s.ring_length = Some(260.0);
        assert_eq!(signed_distance(&s, &s.trajectories[0], &s.trajectories[1]), Some(20.0));
    }

    #[test]
    fn missing_and_disjoint() {
        let s = set(vec![straight("x", 0.0, 1.0, 3, 1.0)]);
        assert_eq!(assign_boxes(&s, "av", &GridParams::default()), Err(AnalysisError::MissingAv("av".into())));
        let mut late = straight("b", 0.0, 1.0, 3, 1.0);
        late.samples.iter_mut().for_each(|s| s.t += 100.0);
        let s = set(vec![straight("av", 0.0, 1.0, 3, 1.0), late]);
        assert_eq!(assign_boxes(&s, "av", &GridParams::default()), Err(AnalysisError::NoOverlap));
    }

    #[test]
    fn subbox_means() {
        let mut a = straight("a", 0.0, 10.0, 10, 1.0);
        let b = straight("b", 0.0, 20.0, 10, 1.0);
        a.samples.truncate(5);
        let s = set(vec![a, b]);
        let bx = DistanceBox { side: Side::Front, index: 1, members: vec![(0, 0.0), (1, 0.0)] };
        let out = subbox_averages(&s, &bx, 5.0, false).unwrap();
        assert_eq!(out.points.len(), 2);
        assert_eq!(out.points[0].v, 15.0);
        assert_eq!(out.points[0].count, 10);
        assert_eq!(out.points[1].v, 20.0);
        assert!(out.skipped.is_empty());
    }

    #[test]
    fn empty_bins_are_skipped() {
        let mut a = straight("a", 0.0, 30.0, 40, 1.0);
        a.samples.retain(|s| s.t < 10.0 || s.t >= 20.0);
        let s = set(vec![a]);
        let bx = DistanceBox { side: Side::Front, index: 1, members: vec![(0, 0.0)] };
        let out = subbox_averages(&s, &bx, 10.0, true).unwrap();
        assert_eq!(out.skipped, vec![1]);
        assert!(out.points.iter().all(|p| p.v == 30.0));
        let empty = DistanceBox { side: Side::Front, index: 1, members: vec![] };
        assert_eq!(subbox_averages(&s, &empty, 10.0, true), Err(AnalysisError::EmptyBox));
    }
}
