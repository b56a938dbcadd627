//! Command-line entry point. Exit codes: 0 success, 1 usage error, 2 data error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::analysis::grid::standard_distances;
use crate::analysis::{assign_boxes, variance_grid, variance_report, wave_boundaries, GridParams, RegionKind};
use crate::controller::{Command, Controller, SensorReading};
use crate::error::ControllerError;
use crate::io::config::RunConfig;
use crate::io::csv::write_command_log;
use crate::io::{export_time_space_svg, mark_av, parse_trajectory_csv, write_trajectory_csv, SvgOptions};
use crate::sim::{run, SensorSpec};
use crate::trajectory::TrajectorySet;

#[derive(Debug, Parser)]
#[command(name = "platoon", version, about = "Stop-and-go wave smoothing: simulation and trajectory analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RegionArg {
    All,
    Wave,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GridFormat {
    Csv,
    Text,
}

#[derive(Debug, clap::Args)]
pub struct TrajArgs {
    /// Trajectory CSV (vehicle_id,lane,t,y,v).
    pub traj: PathBuf,
    /// Ring circumference if positions wrap, m.
    #[arg(long)]
    pub ring_length: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Run a configured scenario and write trajectories and the controller log.
    Simulate {
        config: PathBuf,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
    },
    /// Identify moving wave borders around the AV.
    WaveBounds {
        #[command(flatten)]
        input: TrajArgs,
        #[arg(long)]
        av: String,
        #[arg(long, default_value_t = 4.0)]
        threshold: f64,
        #[arg(long)]
        no_smoothing: bool,
    },
    /// Speed variance in front of and behind the AV.
    Variance {
        #[command(flatten)]
        input: TrajArgs,
        #[arg(long)]
        av: String,
        #[arg(long, default_value_t = 400.0)]
        front: f64,
        #[arg(long, default_value_t = 400.0)]
        behind: f64,
        #[arg(long, value_enum, default_value = "all")]
        region: RegionArg,
    },
    /// Percentage change of speed variance for 200-1400 m extents on both sides.
    VarianceGrid {
        #[command(flatten)]
        input: TrajArgs,
        #[arg(long)]
        av: String,
        #[arg(long, value_enum, default_value = "text")]
        format: GridFormat,
    },
    /// Time-space diagram as SVG.
    Diagram {
        #[command(flatten)]
        input: TrajArgs,
        #[arg(long)]
        av: Option<String>,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Draw every vehicle in one color.
        #[arg(long)]
        plain: bool,
    },
    /// Re-run the controller on a recorded AV trajectory and emit its log.
    Replay {
        traj: PathBuf,
        #[arg(long)]
        av: String,
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        ring_length: Option<f64>,
    },
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn load_set(input: &TrajArgs, av: Option<&str>) -> Result<TrajectorySet, CliError> {
    let f = File::open(&input.traj).map_err(|e| data(format!("{}: {e}", input.traj.display())))?;
    let mut set = parse_trajectory_csv(BufReader::new(f)).map_err(|e| data(format!("{}: {e}", input.traj.display())))?;
    set.ring_length = input.ring_length;
    if let Some(id) = av {
        if !mark_av(&mut set, id) {
            return Err(data(format!("AV `{id}` not found in {}", input.traj.display())));
        }
    }
    Ok(set)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| data(format!("{}: {e}", path.display())))
}

/// Leader at `t` as seen from the AV: nearest vehicle ahead.
fn lead_of(set: &TrajectorySet, av: usize, t: f64, y: f64) -> Option<(f64, f64)> {
    let tol = set.time_tolerance();
    set.trajectories
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != av)
        .filter_map(|(_, tr)| tr.sample_at(t, tol))
        .filter_map(|s| {
            let d = match set.ring_length {
                Some(l) => (s.y - y).rem_euclid(l),
                None => s.y - y,
            };
            (d > 0.0).then_some((d, s.v))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
}

/// Controller commands along a recorded AV trajectory, with the sensor
/// reconstructed from the vehicle ahead at each sample.
pub fn replay_commands(
    set: &TrajectorySet,
    av_id: &str,
    cfg: &RunConfig,
    sensor: &SensorSpec,
) -> Result<Vec<Command>, CliError> {
    let av = set.index_of(av_id).ok_or_else(|| data(format!("AV `{av_id}` not found")))?;
    let plan = cfg.build_plan().map_err(data)?;
    let mut controller = Controller::new(cfg.controller.clone());
    let samples = &set.trajectories[av].samples;
    let mut log = Vec::with_capacity(samples.len());
    for (k, s) in samples.iter().enumerate() {
        let dt = if k == 0 { set.dt } else { s.t - samples[k - 1].t };
        let blind = sensor.dropouts.iter().any(|d| s.t >= d[0] && s.t < d[1]);
        let reading = match lead_of(set, av, s.t, s.y) {
            Some((d, v_lead)) if !blind && d - cfg.scenario.vehicle_length <= sensor.range_max => {
                SensorReading::valid(s.t, s.y, s.v, v_lead, d - cfg.scenario.vehicle_length)
            }
            _ => SensorReading::lost(s.t, s.y, s.v),
        };
        match controller.step(&reading, plan.as_ref(), dt) {
            Ok(cmd) => log.push(cmd),
            Err(ControllerError::NotEngaged) => {}
            Err(e) => return Err(data(format!("t = {:.3}: {e}", s.t))),
        }
    }
    Ok(log)
}

pub fn execute(cmd: Cmd, out: &mut dyn Write) -> Result<(), CliError> {
    let w = |out: &mut dyn Write, s: String| out.write_all(s.as_bytes()).map_err(data);
    match cmd {
        Cmd::Simulate { config, out: dir } => {
            let cfg = RunConfig::load(&config).map_err(|e| data(format!("{}: {e}", config.display())))?;
            let scenario = cfg.build_scenario().map_err(data)?;
            let plan = cfg.build_plan().map_err(data)?;
            let res = run(&scenario, &cfg.sim, &cfg.controller, plan.as_ref()).map_err(data)?;
            std::fs::create_dir_all(&dir).map_err(|e| data(format!("{}: {e}", dir.display())))?;
            let traj_path = dir.join("trajectories.csv");
            write_trajectory_csv(&res.trajectories, create(&traj_path)?).map_err(data)?;
            let set = &res.trajectories;
            let mut msg = format!(
                "wrote {} ({} vehicles, {} samples, {:.1} s)\n",
                traj_path.display(),
                set.trajectories.len(),
                set.sample_count(),
                scenario.duration
            );
            if let Some(av) = &set.av_id {
                let log_path = dir.join("controller_log.csv");
                write_command_log(&res.log, create(&log_path)?).map_err(data)?;
                msg += &format!("wrote {} (AV {av})\n", log_path.display());
            }
            w(out, msg)
        }
        Cmd::WaveBounds { input, av, threshold, no_smoothing } => {
            let set = load_set(&input, Some(&av))?;
            let params = GridParams { smoothing: !no_smoothing, speed_threshold: threshold, ..GridParams::default() };
            let grid = assign_boxes(&set, &av, &params).map_err(data)?;
            let wb = wave_boundaries(&set, &grid, threshold).map_err(data)?;
            let mut s = String::from("frontier,wave,t,y\n");
            for (name, fronts) in [("start", &wb.start_frontiers), ("end", &wb.end_frontiers)] {
                for (k, f) in fronts.iter().enumerate() {
                    for p in f {
                        s += &format!("{name},{k},{:.3},{:.3}\n", p[0], p[1]);
                    }
                }
            }
            w(out, s)?;
            if !wb.flagged.is_empty() {
                let ids: Vec<String> = wb.flagged.iter().map(|b| format!("{b:+}")).collect();
                eprintln!("no threshold crossing in boxes {}", ids.join(" "));
            }
            Ok(())
        }
        Cmd::Variance { input, av, front, behind, region } => {
            let set = load_set(&input, Some(&av))?;
            let region = match region {
                RegionArg::All => RegionKind::All,
                RegionArg::Wave => RegionKind::Wave,
            };
            let r = variance_report(&set, &av, front, behind, region, &GridParams::default()).map_err(data)?;
            w(out, r.to_string())
        }
        Cmd::VarianceGrid { input, av, format } => {
            let set = load_set(&input, Some(&av))?;
            let d = standard_distances();
            let mut front = d.clone();
            front.reverse();
            let g = variance_grid(&set, &av, &front, &d, &GridParams::default()).map_err(data)?;
            w(out, match format {
                GridFormat::Csv => g.to_csv(),
                GridFormat::Text => g.to_text(),
            })
        }
        Cmd::Diagram { input, av, out: path, plain } => {
            let set = load_set(&input, av.as_deref())?;
            let opts = SvgOptions { color_by_speed: !plain, ..SvgOptions::default() };
            let svg = export_time_space_svg(&set, av.as_deref(), &opts);
            match path {
                Some(p) => create(&p)?.write_all(svg.as_bytes()).map_err(data),
                None => w(out, svg),
            }
        }
        Cmd::Replay { traj, av, config, out: path, ring_length } => {
            let set = load_set(&TrajArgs { traj, ring_length }, Some(&av))?;
            let cfg = RunConfig::load(&config).map_err(|e| data(format!("{}: {e}", config.display())))?;
            let log = replay_commands(&set, &av, &cfg, &cfg.sensor)?;
            match path {
                Some(p) => write_command_log(&log, create(&p)?).map_err(data),
                None => write_command_log(&log, &mut *out).map_err(data),
            }
        }
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { CliError::Usage(String::new()).code() } else { 0 };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let (CliError::Usage(m) | CliError::Data(m)) = &e;
            let _ = writeln!(err, "error: {m}");
            e.code()
        }
    }
}
