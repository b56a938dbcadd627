//! Trajectory CSV: `vehicle_id,lane,t,y,v`, one row per sample, sorted by
//! vehicle and time. Times, positions and speeds are written with three decimals.

use std::io::{Read, Write};

use crate::controller::Command;
use crate::error::CsvError;
use crate::trajectory::{Sample, Trajectory, TrajectorySet, VehicleKind};

pub const HEADER: [&str; 5] = ["vehicle_id", "lane", "t", "y", "v"];

pub fn write_trajectory_csv<W: Write>(set: &TrajectorySet, out: W) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    let mut order: Vec<&Trajectory> = set.trajectories.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let io = |e: csv::Error| CsvError::Io(e.into());
    w.write_record(HEADER).map_err(io)?;
    for tr in order {
        let lane = tr.lane.to_string();
        for s in &tr.samples {
            w.write_record([
                tr.id.as_str(),
                &lane,
                &format!("{:.3}", s.t),
                &format!("{:.3}", s.y),
                &format!("{:.3}", s.v),
            ])
            .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn trajectory_csv_string(set: &TrajectorySet) -> String {
    let mut buf = Vec::new();
    write_trajectory_csv(set, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

/// Parses a trajectory CSV. Columns may appear in any order; the sampling
/// interval is inferred from the first trajectory with two samples.
pub fn parse_trajectory_csv<R: Read>(input: R) -> Result<TrajectorySet, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers().map_err(|e| CsvError::Row { line: 1, msg: e.to_string() })?.clone();
    let col = |name: &'static str| headers.iter().position(|h| h == name).ok_or(CsvError::MissingColumn(name));
    let [c_id, c_lane, c_t, c_y, c_v] = [col(HEADER[0])?, col(HEADER[1])?, col(HEADER[2])?, col(HEADER[3])?, col(HEADER[4])?];

    let mut trajectories: Vec<Trajectory> = Vec::new();
    let mut index: std::collections::HashMap<String, usize> = Default::default();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CsvError::Row {
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |c: usize, name: &str| {
            rec.get(c).ok_or_else(|| CsvError::Row { line, msg: format!("missing field `{name}`") })
        };
        let num = |c: usize, name: &str| -> Result<f64, CsvError> {
            let raw = field(c, name)?;
            let x: f64 = raw.parse().map_err(|_| CsvError::Row { line, msg: format!("`{name}`: not a number: `{raw}`") })?;
            if !x.is_finite() {
                return Err(CsvError::Row { line, msg: format!("`{name}` is not finite") });
            }
            Ok(x)
        };
        let id = field(c_id, "vehicle_id")?;
        if id.is_empty() {
            return Err(CsvError::Row { line, msg: "empty vehicle_id".into() });
        }
        let lane_raw = field(c_lane, "lane")?;
        let lane: i64 = lane_raw
            .parse()
            .map_err(|_| CsvError::Row { line, msg: format!("`lane`: not an integer: `{lane_raw}`") })?;
        let sample = Sample { t: num(c_t, "t")?, y: num(c_y, "y")?, v: num(c_v, "v")? };
        let i = *index.entry(id.to_string()).or_insert_with(|| {
            trajectories.push(Trajectory::new(id, lane, VehicleKind::Human));
            trajectories.len() - 1
        });
        let tr = &mut trajectories[i];
        if tr.samples.last().is_some_and(|p| sample.t <= p.t) {
            return Err(CsvError::NonMonotone { vehicle: tr.id.clone(), line });
        }
        tr.samples.push(sample);
    }
    if trajectories.is_empty() {
        return Err(CsvError::Empty);
    }
    let dt = trajectories
        .iter()
        .find(|tr| tr.samples.len() >= 2)
        .map_or(0.0, |tr| ((tr.samples[1].t - tr.samples[0].t) * 1e6).round() / 1e6);
    Ok(TrajectorySet { trajectories, dt, av_id: None, ring_length: None })
}

pub const LOG_HEADER: [&str; 12] =
    ["t", "h", "v", "v_lead", "a_safe", "a_target", "a_mpc", "a_cmd", "v_target", "a_lead_est", "mode", "signal_valid"];

/// Controller log, one row per step. Leader fields are empty while the signal is lost.
pub fn write_command_log<W: Write>(log: &[Command], out: W) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CsvError::Io(e.into());
    let num = |x: f64| if x.is_finite() { format!("{x:.6}") } else { String::new() };
    w.write_record(LOG_HEADER).map_err(io)?;
    for c in log {
        w.write_record([
            format!("{:.3}", c.t),
            num(c.h),
            num(c.v),
            num(c.v_lead),
            num(c.a_safe),
            num(c.a_target),
            num(c.a_mpc),
            num(c.a_cmd),
            num(c.v_target),
            num(c.a_lead_est),
            c.mode.to_string(),
            c.signal_valid.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Marks `av_id` as the controlled vehicle; false if there is no such trajectory.
pub fn mark_av(set: &mut TrajectorySet, av_id: &str) -> bool {
    let Some(i) = set.index_of(av_id) else { return false };
    set.trajectories[i].kind = VehicleKind::ControlledAv;
    set.av_id = Some(av_id.to_string());
    true
}
