#![allow(dead_code)]

pub mod bench;
pub mod oracle;
pub mod synthetic;

/// `|a - b| <= rtol * max(|a|, |b|, 1)`.
pub fn close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs()).max(1.0)
}
