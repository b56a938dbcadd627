use serde::Deserialize;

use crate::error::SimError;
use crate::human::{optimal_velocity, HumanDriverParams};
use crate::trajectory::VehicleKind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Topology {
    Ring { length: f64 },
    Open { length: f64 },
}

impl Topology {
    pub fn ring_length(&self) -> Option<f64> {
        match *self {
            Topology::Ring { length } => Some(length),
            Topology::Open { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleSpec {
    pub id: String,
    pub kind: VehicleKind,
    pub y: f64,
    pub v: f64,
    pub human: HumanDriverParams,
}

/// Piecewise-linear speed script `(t, v)`, held constant outside its knots.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderProfile {
    knots: Vec<(f64, f64)>,
}

impl LeaderProfile {
    pub fn new(mut knots: Vec<(f64, f64)>) -> Result<Self, SimError> {
        if knots.is_empty() {
            return Err(SimError::Scenario("leader profile needs at least one knot".into()));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(SimError::Scenario("leader profile knot times must be distinct".into()));
        }
        if knots.iter().any(|k| !(k.1 >= 0.0) || !k.0.is_finite()) {
            return Err(SimError::Scenario("leader profile speeds must be non-negative".into()));
        }
        Ok(LeaderProfile { knots })
    }

    pub fn constant(v: f64) -> Self {
        LeaderProfile { knots: vec![(0.0, v)] }
    }

    /// Cruise at `cruise`, then `pulses` times: drop to `low` over `ramp`
    /// seconds, hold for `hold`, recover over `ramp`; pulses start `period` apart.
    pub fn stop_go_pulses(cruise: f64, low: f64, first: f64, period: f64, ramp: f64, hold: f64, pulses: usize) -> Self {
        let mut knots = vec![(0.0, cruise)];
        for k in 0..pulses {
            let t0 = first + k as f64 * period;
            knots.push((t0, cruise));
            knots.push((t0 + ramp, low));
            knots.push((t0 + ramp + hold, low));
            knots.push((t0 + 2.0 * ramp + hold, cruise));
        }
        LeaderProfile { knots }
    }

    /// Three stop-and-go pulses: 28 m/s cruise, 15 s down to 3 m/s, 20 s hold, 15 s recovery.
    pub fn three_pulse() -> Self {
        Self::stop_go_pulses(28.0, 3.0, 60.0, 120.0, 15.0, 20.0, 3)
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn speed_at(&self, t: f64) -> f64 {
        let k = &self.knots;
        let i = k.partition_point(|p| p.0 <= t);
        if i == 0 {
            return k[0].1;
        }
        if i == k.len() {
            return k[k.len() - 1].1;
        }
        let (t0, v0) = k[i - 1];
        let (t1, v1) = k[i];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Distance covered over `[0, t]`.
    pub fn distance_at(&self, t: f64) -> f64 {
        let k = &self.knots;
        let mut dist = 0.0;
        let mut prev_t = 0.0;
        let mut prev_v = self.speed_at(0.0);
        for &(kt, kv) in k.iter().filter(|p| p.0 > 0.0) {
            if kt >= t {
                break;
            }
            dist += 0.5 * (prev_v + kv) * (kt - prev_t);
            prev_t = kt;
            prev_v = kv;
        }
        dist + 0.5 * (prev_v + self.speed_at(t)) * (t - prev_t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutInEvent {
    pub t: f64,
    /// Bumper gap between the ego and the inserted vehicle, m.
    pub gap: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorSpec {
    pub range_max: f64,
    /// Scripted blind intervals `[start, end)`, s.
    pub dropouts: Vec<[f64; 2]>,
    /// Independent per-step loss probability.
    pub loss_probability: f64,
}

impl Default for SensorSpec {
    fn default() -> Self {
        SensorSpec { range_max: 120.0, dropouts: Vec::new(), loss_probability: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub topology: Topology,
    /// Ordered from the most upstream vehicle to the most downstream one.
    pub vehicles: Vec<VehicleSpec>,
    pub leader_profile: Option<LeaderProfile>,
    pub cut_ins: Vec<CutInEvent>,
    pub sensor: SensorSpec,
    pub duration: f64,
    /// Subtracted from position differences to get bumper gaps, m.
    pub vehicle_length: f64,
    /// Driver parameters for vehicles inserted by cut-ins.
    pub cut_in_driver: HumanDriverParams,
    pub lane: i64,
}

impl Scenario {
    /// `n` vehicles evenly spaced on a ring at the uniform-flow speed, with
    /// vehicle `perturbed` driving `perturbation` (relative) faster.
    pub fn ring(n: usize, length: f64, human: HumanDriverParams, av: Option<usize>, perturbed: usize, perturbation: f64, duration: f64) -> Self {
        let spacing = length / n as f64;
        let v_eq = optimal_velocity(spacing, &human);
        let vehicles = (0..n)
            .map(|i| VehicleSpec {
                id: format!("veh{i:02}"),
                kind: if Some(i) == av { VehicleKind::ControlledAv } else { VehicleKind::Human },
                y: i as f64 * spacing,
                v: if i == perturbed { v_eq * (1.0 + perturbation) } else { v_eq },
                human: human.clone(),
            })
            .collect();
        Scenario {
            topology: Topology::Ring { length },
            vehicles,
            leader_profile: None,
            cut_ins: Vec::new(),
            sensor: SensorSpec::default(),
            duration,
            vehicle_length: 0.0,
            cut_in_driver: human,
            lane: 1,
        }
    }

    /// Scripted leader followed by `n_followers` vehicles at the equilibrium
    /// spacing of the leader's initial speed. `av` counts followers from the
    /// leader (0 is directly behind it).
    pub fn open_road(n_followers: usize, human: HumanDriverParams, av: Option<usize>, profile: LeaderProfile, duration: f64) -> Self {
        let v0 = profile.speed_at(0.0);
        let spacing = human.equilibrium_spacing(v0);
        let mut vehicles: Vec<VehicleSpec> = (0..n_followers)
            .rev()
            .map(|k| VehicleSpec {
                id: format!("veh{:02}", k + 1),
                kind: if Some(k) == av { VehicleKind::ControlledAv } else { VehicleKind::Human },
                y: -((k + 1) as f64) * spacing,
                v: v0,
                human: human.clone(),
            })
            .collect();
        vehicles.push(VehicleSpec {
            id: "leader".into(),
            kind: VehicleKind::ScriptedLeader,
            y: 0.0,
            v: v0,
            human: human.clone(),
        });
        let length = spacing * (n_followers + 1) as f64 + v0 * duration;
        Scenario {
            topology: Topology::Open { length },
            vehicles,
            leader_profile: Some(profile),
            cut_ins: Vec::new(),
            sensor: SensorSpec::default(),
            duration,
            vehicle_length: 0.0,
            cut_in_driver: human,
            lane: 1,
        }
    }

    pub fn av_index(&self) -> Option<usize> {
        self.vehicles.iter().position(|v| v.kind == VehicleKind::ControlledAv)
    }

    /// Same scenario with the AV driven by its human parameters.
    pub fn without_av(&self) -> Self {
        let mut s = self.clone();
        for v in &mut s.vehicles {
            if v.kind == VehicleKind::ControlledAv {
                v.kind = VehicleKind::Human;
            }
        }
        s
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Scenario(m.to_string()));
        if self.vehicles.is_empty() {
            return bad("no vehicles");
        }
        if !(self.duration > 0.0) {
            return bad("duration must be positive");
        }
        if self.vehicles.iter().filter(|v| v.kind == VehicleKind::ControlledAv).count() > 1 {
            return bad("at most one controlled AV is supported");
        }
        let leaders: Vec<usize> = self
            .vehicles
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VehicleKind::ScriptedLeader)
            .map(|(i, _)| i)
            .collect();
        match self.topology {
            Topology::Ring { length } => {
                if !(length > 0.0) {
                    return bad("ring length must be positive");
                }
                if !leaders.is_empty() {
                    return bad("a ring has no scripted leader");
                }
                let span = self.vehicles.last().unwrap().y - self.vehicles[0].y;
                if !(span < length) {
                    return bad("ring vehicles must fit within one lap");
                }
            }
            Topology::Open { .. } => {
                if leaders.len() > 1 || leaders.first().is_some_and(|&i| i + 1 != self.vehicles.len()) {
                    return bad("the scripted leader must be the single most downstream vehicle");
                }
                if !leaders.is_empty() && self.leader_profile.is_none() {
                    return bad("scripted leader without a leader profile");
                }
            }
        }
        if self.vehicles.windows(2).any(|w| w[1].y - w[0].y <= self.vehicle_length) {
            return bad("vehicles must be ordered upstream to downstream with positive gaps");
        }
        if self.vehicles.iter().any(|v| !(v.v >= 0.0) || !v.y.is_finite()) {
            return bad("initial speeds must be non-negative and positions finite");
        }
        if self.vehicles.iter().any(|v| v.human.validate().is_err()) {
            return bad("human driver parameters must be positive");
        }
        let mut ids: Vec<&str> = self.vehicles.iter().map(|v| v.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return bad("vehicle ids must be unique");
        }
        if !(self.sensor.range_max > 0.0) || !(0.0..=1.0).contains(&self.sensor.loss_probability) {
            return bad("sensor range must be positive and loss probability in [0, 1]");
        }
        Ok(())
    }
}
