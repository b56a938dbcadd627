//! TOML run configuration.
//!
//! ```toml
//! [scenario]
//! topology = "ring"      # or "open"
//! vehicles = 22          # ring: all vehicles; open: followers of the leader
//! length = 260.0
//! av = 0                 # omit for an all-human platoon
//! duration = 600.0
//!
//! [human]
//! preset = "unstable-ring"
//!
//! [controller]
//! tau = 60.0
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::analysis::GridParams;
use crate::controller::{ControllerParams, PlanAxis, PlanBin, PlanProfile};
use crate::error::ConfigError;
use crate::human::HumanDriverParams;
use crate::sim::{CutInEvent, LeaderProfile, Scenario, SensorSpec, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum HumanPreset {
    #[default]
    UnstableRing,
    Highway,
}

/// A preset plus optional per-field overrides.
#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct HumanSection {
    pub preset: HumanPreset,
    pub a_ftl: Option<f64>,
    pub b_ov: Option<f64>,
    pub v_max: Option<f64>,
    pub d0: Option<f64>,
    pub l_veh: Option<f64>,
}

impl HumanSection {
    pub fn params(&self) -> HumanDriverParams {
        let base = match self.preset {
            HumanPreset::UnstableRing => HumanDriverParams::unstable_ring(),
            HumanPreset::Highway => HumanDriverParams::highway(),
        };
        HumanDriverParams {
            a_ftl: self.a_ftl.unwrap_or(base.a_ftl),
            b_ov: self.b_ov.unwrap_or(base.b_ov),
            v_max: self.v_max.unwrap_or(base.v_max),
            d0: self.d0.unwrap_or(base.d0),
            l_veh: self.l_veh.unwrap_or(base.l_veh),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyKind {
    Ring,
    Open,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub topology: TopologyKind,
    pub vehicles: usize,
    /// Ring circumference, m. Required on a ring.
    pub length: Option<f64>,
    /// Ring: vehicle index. Open road: follower index, 0 directly behind the leader.
    pub av: Option<usize>,
    #[serde(default)]
    pub perturbed: usize,
    /// Relative initial speed excess of the perturbed ring vehicle.
    #[serde(default = "default_perturbation")]
    pub perturbation: f64,
    pub duration: f64,
    #[serde(default)]
    pub vehicle_length: f64,
}

fn default_perturbation() -> f64 {
    0.01
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LeaderKind {
    #[default]
    Pulses,
    Constant,
    Knots,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeaderSection {
    pub profile: LeaderKind,
    pub cruise: f64,
    pub low: f64,
    pub first: f64,
    pub period: f64,
    pub ramp: f64,
    pub hold: f64,
    pub pulses: usize,
    /// `[t, v]` pairs for `profile = "knots"`.
    pub knots: Vec<[f64; 2]>,
}

impl Default for LeaderSection {
    fn default() -> Self {
        LeaderSection {
            profile: LeaderKind::Pulses,
            cruise: 28.0,
            low: 3.0,
            first: 60.0,
            period: 120.0,
            ramp: 15.0,
            hold: 20.0,
            pulses: 3,
            knots: Vec::new(),
        }
    }
}

impl LeaderSection {
    pub fn profile(&self) -> Result<LeaderProfile, ConfigError> {
        Ok(match self.profile {
            LeaderKind::Pulses => {
                LeaderProfile::stop_go_pulses(self.cruise, self.low, self.first, self.period, self.ramp, self.hold, self.pulses)
            }
            LeaderKind::Constant => LeaderProfile::constant(self.cruise),
            LeaderKind::Knots => LeaderProfile::new(self.knots.iter().map(|k| (k[0], k[1])).collect())
                .map_err(|e| ConfigError::Invalid(e.to_string()))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    pub axis: PlanAxis,
    #[serde(default)]
    pub issued_at: f64,
    pub bins: Vec<PlanBin>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub human: HumanSection,
    #[serde(default)]
    pub controller: ControllerParams,
    pub leader: Option<LeaderSection>,
    #[serde(default)]
    pub sensor: SensorSpec,
    #[serde(default, rename = "cut_in")]
    pub cut_ins: Vec<CutInEvent>,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub analysis: GridParams,
    pub plan: Option<PlanSection>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.controller.validate()?;
        cfg.human.params().validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn build_scenario(&self) -> Result<Scenario, ConfigError> {
        let s = &self.scenario;
        let human = self.human.params();
        let mut scenario = match s.topology {
            TopologyKind::Ring => {
                let length = s.length.ok_or_else(|| ConfigError::Invalid("scenario: ring needs `length`".into()))?;
                if s.perturbed >= s.vehicles {
                    return Err(ConfigError::Invalid("scenario: `perturbed` out of range".into()));
                }
                if self.leader.is_some() {
                    return Err(ConfigError::Invalid("a ring has no scripted leader; remove [leader]".into()));
                }
                Scenario::ring(s.vehicles, length, human, s.av, s.perturbed, s.perturbation, s.duration)
            }
            TopologyKind::Open => {
                let profile = self.leader.clone().unwrap_or_default().profile()?;
                let mut sc = Scenario::open_road(s.vehicles, human, s.av, profile, s.duration);
                if let Some(length) = s.length {
                    sc.topology = crate::sim::Topology::Open { length };
                }
                sc
            }
        };
        if let Some(av) = s.av {
            if av >= s.vehicles {
                return Err(ConfigError::Invalid(format!("scenario: av index {av} out of range")));
            }
        }
        scenario.sensor = self.sensor.clone();
        scenario.cut_ins = self.cut_ins.clone();
        scenario.vehicle_length = s.vehicle_length;
        scenario.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(scenario)
    }

    pub fn build_plan(&self) -> Result<Option<PlanProfile>, ConfigError> {
        self.plan
            .as_ref()
            .map(|p| PlanProfile::new(p.axis, p.bins.clone(), p.issued_at))
            .transpose()
    }
}
