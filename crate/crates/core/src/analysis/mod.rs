//! Moving-wave borders and speed-variance metrics on trajectory sets.

pub mod boxes;
pub mod grid;
pub mod variance;
pub mod waves;

pub use boxes::{assign_boxes, subbox_averages, BoxGrid, DistanceBox, GridParams, Side, SubBox, SubBoxSeries};
pub use grid::{variance_grid, VarianceGrid};
pub use variance::{
    percent_change, pooled_speed_variance, population_variance, variance_report, Region, RegionKind, VarianceReport,
};
pub use waves::{wave_boundaries, BoxCrossings, WaveBoundary};

/// Centered moving average with a window of `2 * half + 1`, shrunk
/// symmetrically near the ends so that linear sequences are unchanged.
pub fn moving_average(xs: &[f64], half: usize) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|i| {
            let r = half.min(i).min(n - 1 - i);
            let w = &xs[i - r..=i + r];
            w.iter().sum::<f64>() / w.len() as f64
        })
        .collect()
}
