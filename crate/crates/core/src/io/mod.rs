//! File formats: trajectory CSV, TOML run configuration, SVG time-space diagrams.

pub mod config;
pub mod csv;
pub mod svg;

pub use self::config::RunConfig;
pub use self::csv::{mark_av, parse_trajectory_csv, trajectory_csv_string, write_trajectory_csv};
pub use self::svg::{export_time_space_svg, SvgOptions};
