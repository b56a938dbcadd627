//! Time-space diagram: time on x, position on y, one line per vehicle colored
//! by speed on a fixed 0-35 m/s scale from red (stopped) to green.

use std::fmt::Write as _;

use crate::trajectory::{Sample, TrajectorySet};

pub const SPEED_SCALE_MAX: f64 = 35.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    pub width: f64,
    pub height: f64,
    /// Restrict the plot to `[t0, t1]`; defaults to the data span.
    pub t_range: Option<(f64, f64)>,
    pub y_range: Option<(f64, f64)>,
    pub color_by_speed: bool,
    /// Maximum points kept per vehicle; longer series are decimated.
    pub max_points: usize,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions { width: 1000.0, height: 600.0, t_range: None, y_range: None, color_by_speed: true, max_points: 1500 }
    }
}

/// Red at 0, yellow at half scale, green at full scale.
pub fn speed_color(v: f64) -> (u8, u8, u8) {
    let x = (v / SPEED_SCALE_MAX).clamp(0.0, 1.0);
    if x < 0.5 {
        (220, (220.0 * x / 0.5).round() as u8, 0)
    } else {
        let f = (x - 0.5) / 0.5;
        ((220.0 * (1.0 - f)).round() as u8, (220.0 - 60.0 * f).round() as u8, 0)
    }
}

fn hex((r, g, b): (u8, u8, u8)) -> String {
    format!("#{r:02x}{g:02x}{b:02x}")
}

const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 90.0;
const MARGIN_T: f64 = 20.0;
const MARGIN_B: f64 = 50.0;

struct Frame {
    t: (f64, f64),
    y: (f64, f64),
    w: f64,
    h: f64,
}

impl Frame {
    fn x(&self, t: f64) -> f64 {
        MARGIN_L + (t - self.t.0) / (self.t.1 - self.t.0) * self.w
    }
    fn y(&self, y: f64) -> f64 {
        MARGIN_T + (1.0 - (y - self.y.0) / (self.y.1 - self.y.0)) * self.h
    }
}

fn span(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, x| match acc {
        None => Some((x, x)),
        Some((a, b)) => Some((a.min(x), b.max(x))),
    })
}

fn widen((a, b): (f64, f64)) -> (f64, f64) {
    if b > a {
        (a, b)
    } else {
        (a - 0.5, a + 0.5)
    }
}

/// Runs of consecutive samples that stay inside the frame and do not cross a ring wrap.
fn pieces(samples: &[Sample], f: &Frame, ring: Option<f64>, stride: usize) -> Vec<Vec<Sample>> {
    let mut out: Vec<Vec<Sample>> = Vec::new();
    let mut cur: Vec<Sample> = Vec::new();
    let inside = |s: &Sample| s.t >= f.t.0 && s.t <= f.t.1 && s.y >= f.y.0 && s.y <= f.y.1;
    let n = samples.len();
    for (k, s) in samples.iter().enumerate() {
        if k % stride != 0 && k + 1 != n {
            continue;
        }
        let wrapped = match (ring, cur.last()) {
            (Some(l), Some(p)) => (s.y - p.y).abs() > l / 2.0,
            _ => false,
        };
        if !inside(s) || wrapped {
            if cur.len() >= 2 {
                out.push(std::mem::take(&mut cur));
            }
            cur.clear();
            if !inside(s) {
                continue;
            }
        }
        cur.push(*s);
    }
    if cur.len() >= 2 {
        out.push(cur);
    }
    out
}

fn polyline(out: &mut String, pts: &[Sample], f: &Frame, stroke: &str, width: f64) {
    out.push_str("<polyline fill=\"none\" stroke=\"");
    out.push_str(stroke);
    write!(out, "\" stroke-width=\"{width}\" points=\"").unwrap();
    for (k, s) in pts.iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        write!(out, "{:.2},{:.2}", f.x(s.t), f.y(s.y)).unwrap();
    }
    out.push_str("\"/>\n");
}

/// Draws one vehicle, splitting the line whenever the speed color bucket changes.
fn draw_vehicle(out: &mut String, piece: &[Sample], f: &Frame, color_by_speed: bool) {
    if !color_by_speed {
        polyline(out, piece, f, "#4a6fa5", 0.8);
        return;
    }
    let bucket = |v: f64| (v.clamp(0.0, SPEED_SCALE_MAX)).floor() as i64;
    let mut start = 0;
    for k in 1..=piece.len() {
        if k == piece.len() || bucket(piece[k].v) != bucket(piece[start].v) {
            let end = k.min(piece.len() - 1);
            let color = hex(speed_color(bucket(piece[start].v) as f64 + 0.5));
            polyline(out, &piece[start..=end], f, &color, 0.8);
            start = end;
        }
    }
}

fn ticks((a, b): (f64, f64)) -> Vec<f64> {
    let raw = (b - a) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (a / step).ceil() as i64;
    let last = (b / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

pub fn export_time_space_svg(set: &TrajectorySet, av_id: Option<&str>, opts: &SvgOptions) -> String {
    let all = || set.trajectories.iter().flat_map(|tr| tr.samples.iter());
    let t = widen(opts.t_range.or_else(|| span(all().map(|s| s.t))).unwrap_or((0.0, 1.0)));
    let y = widen(opts.y_range.or_else(|| span(all().map(|s| s.y))).unwrap_or((0.0, 1.0)));
    let f = Frame { t, y, w: opts.width - MARGIN_L - MARGIN_R, h: opts.height - MARGIN_T - MARGIN_B };

    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"11\">",
        opts.width, opts.height, opts.width, opts.height
    )
    .unwrap();
    writeln!(out, "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>", opts.width, opts.height).unwrap();

    out.push_str("<g id=\"vehicles\">\n");
    for tr in set.trajectories.iter().filter(|tr| Some(tr.id.as_str()) != av_id) {
        let stride = tr.samples.len().div_ceil(opts.max_points.max(2)).max(1);
        for piece in pieces(&tr.samples, &f, set.ring_length, stride) {
            draw_vehicle(&mut out, &piece, &f, opts.color_by_speed);
        }
    }
    out.push_str("</g>\n");
    if let Some(av) = av_id.and_then(|id| set.get(id)) {
        out.push_str("<g id=\"av\">\n");
        let stride = av.samples.len().div_ceil(opts.max_points.max(2)).max(1);
        for piece in pieces(&av.samples, &f, set.ring_length, stride) {
            polyline(&mut out, &piece, &f, "#000000", 2.5);
        }
        out.push_str("</g>\n");
    }

    // axes
    let (x0, x1, y0, y1) = (MARGIN_L, MARGIN_L + f.w, MARGIN_T, MARGIN_T + f.h);
    writeln!(out, "<rect x=\"{x0}\" y=\"{y0}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>", f.w, f.h).unwrap();
    for tk in ticks(t) {
        let x = f.x(tk);
        writeln!(out, "<line x1=\"{x:.2}\" y1=\"{y1}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/>", y1 + 5.0).unwrap();
        writeln!(out, "<text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\">{tk}</text>", y1 + 18.0).unwrap();
    }
    for tk in ticks(y) {
        let yy = f.y(tk);
        writeln!(out, "<line x1=\"{}\" y1=\"{yy:.2}\" x2=\"{x0}\" y2=\"{yy:.2}\" stroke=\"black\"/>", x0 - 5.0).unwrap();
        writeln!(out, "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{tk}</text>", x0 - 8.0, yy + 4.0).unwrap();
    }
    writeln!(out, "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">time (s)</text>", (x0 + x1) / 2.0, opts.height - 10.0).unwrap();
    writeln!(
        out,
        "<text x=\"15\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 15 {:.2})\">position (m)</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    )
    .unwrap();

    if opts.color_by_speed {
        let (bx, bw) = (x1 + 25.0, 14.0);
        let steps = 35;
        let bh = f.h / steps as f64;
        for k in 0..steps {
            let v = (k as f64 + 0.5) * SPEED_SCALE_MAX / steps as f64;
            writeln!(
                out,
                "<rect x=\"{bx}\" y=\"{:.2}\" width=\"{bw}\" height=\"{:.2}\" fill=\"{}\"/>",
                y1 - (k + 1) as f64 * bh,
                bh + 0.5,
                hex(speed_color(v))
            )
            .unwrap();
        }
        for v in [0, 10, 20, 30] {
            let yy = y1 - v as f64 / SPEED_SCALE_MAX * f.h;
            writeln!(out, "<text x=\"{}\" y=\"{:.2}\">{v}</text>", bx + bw + 4.0, yy + 4.0).unwrap();
        }
        writeln!(out, "<text x=\"{bx}\" y=\"{}\">m/s</text>", y0 + 10.0).unwrap();
    }
    out.push_str("</svg>\n");
    out
}
