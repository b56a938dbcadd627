//! Single-lane platoon simulator (ring or open road) with at most one
//! controlled AV, a scripted leader and an imperfect front sensor.

mod scenario;

pub use scenario::{CutInEvent, LeaderProfile, Scenario, SensorSpec, Topology, VehicleSpec};

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::controller::{Command, Controller, ControllerParams, PlanProfile, SensorReading};
use crate::error::{Collision, ControllerError, SimError};
use crate::human::{human_accel, optimal_velocity, HumanDriverParams};
use crate::trajectory::{Sample, Trajectory, TrajectorySet, VehicleKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[default]
    Euler,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub integrator: Integrator,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { dt: 0.05, integrator: Integrator::Euler, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct Vehicle {
    pub id: String,
    pub kind: VehicleKind,
    /// Unwrapped arc length; reported modulo the ring length.
    pub y: f64,
    pub v: f64,
    pub human: HumanDriverParams,
}

/// Instantaneous state of the platoon.
#[derive(Debug, Clone)]
pub struct World {
    /// Upstream to downstream; the leader of vehicle `i` is `i + 1`
    /// (wrapping on a ring).
    pub vehicles: Vec<Vehicle>,
    pub t: f64,
    pub ring_length: Option<f64>,
    pub vehicle_length: f64,
    leader_script: Option<(LeaderProfile, f64)>,
}

impl World {
    pub fn new(scenario: &Scenario) -> Self {
        let vehicles: Vec<Vehicle> = scenario
            .vehicles
            .iter()
            .map(|s| Vehicle { id: s.id.clone(), kind: s.kind, y: s.y, v: s.v, human: s.human.clone() })
            .collect();
        let leader_script = vehicles
            .iter()
            .find(|v| v.kind == VehicleKind::ScriptedLeader)
            .zip(scenario.leader_profile.clone())
            .map(|(v, p)| (p, v.y));
        World {
            vehicles,
            t: 0.0,
            ring_length: scenario.topology.ring_length(),
            vehicle_length: scenario.vehicle_length,
            leader_script,
        }
    }

    pub fn leader_of(&self, i: usize) -> Option<usize> {
        match self.ring_length {
            Some(_) if self.vehicles.len() > 1 => Some((i + 1) % self.vehicles.len()),
            Some(_) => None,
            None => (i + 1 < self.vehicles.len()).then_some(i + 1),
        }
    }

    fn spacing_in(&self, ys: &[f64], i: usize) -> Option<f64> {
        let j = self.leader_of(i)?;
        let wrap = if j <= i { self.ring_length.unwrap_or(0.0) } else { 0.0 };
        Some(ys[j] + wrap - ys[i])
    }

    /// Position difference to the leader (front bumper to front bumper).
    pub fn spacing(&self, i: usize) -> Option<f64> {
        let ys: Vec<f64> = self.vehicles.iter().map(|v| v.y).collect();
        self.spacing_in(&ys, i)
    }

    /// Bumper-to-bumper gap to the leader.
    pub fn gap(&self, i: usize) -> Option<f64> {
        self.spacing(i).map(|s| s - self.vehicle_length)
    }

    pub fn av_index(&self) -> Option<usize> {
        self.vehicles.iter().position(|v| v.kind == VehicleKind::ControlledAv)
    }

    /// Reported position: modulo the ring length on a ring.
    pub fn reported_y(&self, i: usize) -> f64 {
        let y = self.vehicles[i].y;
        match self.ring_length {
            Some(l) => y.rem_euclid(l),
            None => y,
        }
    }

    fn script_state(&self, t: f64) -> Option<(f64, f64)> {
        self.leader_script.as_ref().map(|(p, y0)| (y0 + p.distance_at(t), p.speed_at(t)))
    }

    fn check_gaps(&self, ys: &[f64], t: f64) -> Result<(), Collision> {
        for i in 0..self.vehicles.len() {
            if let Some(s) = self.spacing_in(ys, i) {
                let gap = s - self.vehicle_length;
                if gap <= 0.0 {
                    let j = self.leader_of(i).unwrap();
                    return Err(Collision {
                        follower: self.vehicles[i].id.clone(),
                        leader: self.vehicles[j].id.clone(),
                        t,
                        gap,
                    });
                }
            }
        }
        Ok(())
    }

    /// Accelerations of every vehicle at stage time `t`. Humans react to the
    /// stage state; the AV holds `av_accel`; the scripted leader follows its script.
    fn accelerations(&self, t: f64, ys: &[f64], vs: &[f64], av_accel: Option<f64>) -> Result<Vec<f64>, Collision> {
        self.check_gaps(ys, t)?;
        let acc = (0..self.vehicles.len())
            .map(|i| {
                let veh = &self.vehicles[i];
                match (veh.kind, av_accel) {
                    (VehicleKind::ScriptedLeader, _) => 0.0,
                    (VehicleKind::ControlledAv, Some(a)) => a,
                    _ => match self.spacing_in(ys, i) {
                        Some(s) => human_accel(s, vs[i], vs[self.leader_of(i).unwrap()], &veh.human),
                        None => veh.human.b_ov * (veh.human.v_max - vs[i]),
                    },
                }
            })
            .collect();
        Ok(acc)
    }

    fn pin_leader(&self, t: f64, ys: &mut [f64], vs: &mut [f64]) {
        if let Some((y, v)) = self.script_state(t) {
            if let Some(i) = self.vehicles.iter().position(|v| v.kind == VehicleKind::ScriptedLeader) {
                ys[i] = y;
                vs[i] = v;
            }
        }
    }

    /// Advance by `dt`. The AV acceleration is held over the step.
    pub fn integrate_step(&mut self, dt: f64, integrator: Integrator, av_accel: Option<f64>) -> Result<(), Collision> {
        let t = self.t;
        let y0: Vec<f64> = self.vehicles.iter().map(|v| v.y).collect();
        let v0: Vec<f64> = self.vehicles.iter().map(|v| v.v).collect();
        let (mut y1, mut v1) = match integrator {
            Integrator::Euler => {
                let a = self.accelerations(t, &y0, &v0, av_accel)?;
                let y1 = y0.iter().zip(&v0).map(|(y, v)| y + v * dt).collect::<Vec<_>>();
                let v1 = v0.iter().zip(&a).map(|(v, a)| v + a * dt).collect::<Vec<_>>();
                (y1, v1)
            }
            Integrator::Rk4 => self.rk4(t, dt, &y0, &v0, av_accel)?,
        };
        self.t = t + dt;
        self.pin_leader(self.t, &mut y1, &mut v1);
        for (veh, (y, v)) in self.vehicles.iter_mut().zip(y1.into_iter().zip(v1)) {
            veh.y = y;
            veh.v = v.max(0.0);
        }
        let ys: Vec<f64> = self.vehicles.iter().map(|v| v.y).collect();
        self.check_gaps(&ys, self.t)
    }

    fn rk4(&self, t: f64, dt: f64, y0: &[f64], v0: &[f64], av: Option<f64>) -> Result<(Vec<f64>, Vec<f64>), Collision> {
        let stage = |tt: f64, scale: f64, ky: &[f64], kv: &[f64]| -> Result<(Vec<f64>, Vec<f64>), Collision> {
            let mut ys: Vec<f64> = y0.iter().zip(ky).map(|(y, k)| y + scale * k).collect();
            let mut vs: Vec<f64> = v0.iter().zip(kv).map(|(v, k)| v + scale * k).collect();
            self.pin_leader(tt, &mut ys, &mut vs);
            let a = self.accelerations(tt, &ys, &vs, av)?;
            Ok((vs, a))
        };
        let zeros = vec![0.0; y0.len()];
        let (k1y, k1v) = stage(t, 0.0, &zeros, &zeros)?;
        let (k2y, k2v) = stage(t + 0.5 * dt, 0.5 * dt, &k1y, &k1v)?;
        let (k3y, k3v) = stage(t + 0.5 * dt, 0.5 * dt, &k2y, &k2v)?;
        let (k4y, k4v) = stage(t + dt, dt, &k3y, &k3v)?;
        let comb = |x0: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
            (0..x0.len()).map(|i| x0[i] + dt / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i])).collect()
        };
        Ok((comb(y0, &k1y, &k2y, &k3y, &k4y), comb(v0, &k1v, &k2v, &k3v, &k4v)))
    }

    /// Insert a human vehicle `event.gap` ahead of the AV.
    pub fn apply_cut_in(&mut self, event: &CutInEvent, id: String, human: HumanDriverParams) -> Result<usize, SimError> {
        let reject = |reason: &str| SimError::CutIn { t: event.t, reason: reason.to_string() };
        let av = self.av_index().ok_or_else(|| reject("no AV to cut in front of"))?;
        if !(event.gap > 0.0) {
            return Err(reject("inserted gap must be positive"));
        }
        if !(event.speed >= 0.0) {
            return Err(reject("inserted speed must be non-negative"));
        }
        let spacing = event.gap + self.vehicle_length;
        if let Some(old) = self.spacing(av) {
            if old - spacing <= self.vehicle_length {
                return Err(reject("inserted vehicle would not fit before the current leader"));
            }
        }
        let y = self.vehicles[av].y + spacing;
        let at = av + 1;
        self.vehicles.insert(at, Vehicle { id, kind: VehicleKind::Human, y, v: event.speed, human });
        Ok(at)
    }
}

/// Front-sensor model: range limit, scripted dropouts and Bernoulli loss.
pub fn sense(world: &World, av: usize, sensor: &SensorSpec, rng: &mut impl Rng) -> SensorReading {
    let t = world.t;
    let ego = &world.vehicles[av];
    // one draw per step keeps the random stream independent of the geometry
    let random_loss = sensor.loss_probability > 0.0 && rng.gen::<f64>() < sensor.loss_probability;
    let scripted_loss = sensor.dropouts.iter().any(|d| t >= d[0] && t < d[1]);
    let y = world.reported_y(av);
    match (world.gap(av), world.leader_of(av)) {
        (Some(h), Some(j)) if h <= sensor.range_max && !random_loss && !scripted_loss => {
            SensorReading::valid(t, y, ego.v, world.vehicles[j].v, h)
        }
        _ => SensorReading::lost(t, y, ego.v),
    }
}

/// Output of a full rollout.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trajectories: TrajectorySet,
    /// Per-step controller log; empty without an AV.
    pub log: Vec<Command>,
}

struct Recorder {
    trajectories: Vec<Trajectory>,
}

impl Recorder {
    fn record(&mut self, world: &World) {
        for (i, veh) in world.vehicles.iter().enumerate() {
            let idx = match self.trajectories.iter().position(|tr| tr.id == veh.id) {
                Some(idx) => idx,
                None => {
                    self.trajectories.push(Trajectory::new(veh.id.clone(), 1, veh.kind));
                    self.trajectories.len() - 1
                }
            };
            self.trajectories[idx].samples.push(Sample { t: world.t, y: world.reported_y(i), v: veh.v });
        }
    }

    fn dump_tail(&self, ids: &[&str], t: f64) -> String {
        let mut out = String::from("vehicle_id,t,y,v\n");
        for tr in self.trajectories.iter().filter(|tr| ids.contains(&tr.id.as_str())) {
            for s in tr.samples.iter().filter(|s| s.t >= t - 5.0) {
                let _ = writeln!(out, "{},{:.3},{:.3},{:.3}", tr.id, s.t, s.y, s.v);
            }
        }
        out
    }
}

/// Deterministic rollout of `scenario`.
pub fn run(scenario: &Scenario, cfg: &SimConfig, params: &ControllerParams, plan: Option<&PlanProfile>) -> Result<RunOutput, SimError> {
    scenario.validate()?;
    params.validate().map_err(|e| SimError::Scenario(e.to_string()))?;
    if !(cfg.dt > 0.0) {
        return Err(SimError::Scenario("dt must be positive".into()));
    }
    let mut world = World::new(scenario);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut controller = Controller::new(params.clone());
    let mut rec = Recorder { trajectories: Vec::new() };
    let mut log = Vec::new();
    let mut cut_ins: Vec<CutInEvent> = scenario.cut_ins.clone();
    cut_ins.sort_by(|a, b| a.t.total_cmp(&b.t));
    let mut next_cut_in = 0;

    let collision = |c: Collision, rec: &Recorder| {
        let dump = rec.dump_tail(&[&c.follower, &c.leader], c.t);
        SimError::Collision { collision: c, dump }
    };

    let ys: Vec<f64> = world.vehicles.iter().map(|v| v.y).collect();
    world.check_gaps(&ys, 0.0).map_err(|c| collision(c, &rec))?;

    let steps = (scenario.duration / cfg.dt).round() as usize;
    for step in 0..=steps {
        world.t = step as f64 * cfg.dt;
        while next_cut_in < cut_ins.len() && cut_ins[next_cut_in].t <= world.t + 1e-9 {
            let ev = cut_ins[next_cut_in];
            world.apply_cut_in(&ev, format!("cutin{next_cut_in}"), scenario.cut_in_driver.clone())?;
            next_cut_in += 1;
        }
        rec.record(&world);
        if step == steps {
            break;
        }

        let av_accel = match world.av_index() {
            Some(av) => {
                let reading = sense(&world, av, &scenario.sensor, &mut rng);
                match controller.step(&reading, plan, cfg.dt) {
                    Ok(cmd) => {
                        log.push(cmd);
                        Some(cmd.a_cmd)
                    }
                    // below the engagement speed the driver is in charge
                    Err(ControllerError::NotEngaged) => None,
                    Err(e) => return Err(e.into()),
                }
            }
            None => None,
        };
        world.integrate_step(cfg.dt, cfg.integrator, av_accel).map_err(|c| collision(c, &rec))?;
    }

    let av_id = scenario
        .vehicles
        .iter()
        .find(|v| v.kind == VehicleKind::ControlledAv)
        .map(|v| v.id.clone());
    let mut trajectories = rec.trajectories;
    for tr in &mut trajectories {
        tr.lane = scenario.lane;
    }
    Ok(RunOutput {
        trajectories: TrajectorySet {
            trajectories,
            dt: cfg.dt,
            av_id,
            ring_length: scenario.topology.ring_length(),
        },
        log,
    })
}

/// Runs independent jobs on worker threads; results keep the input order.
pub fn run_batch<J, R, F>(jobs: &[J], f: F) -> Vec<R>
where
    J: Sync,
    R: Send,
    F: Fn(&J) -> R + Sync,
{
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(jobs.len().max(1));
    let chunk = jobs.len().div_ceil(workers).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .chunks(chunk)
            .map(|part| {
                let f = &f;
                scope.spawn(move || part.iter().map(f).collect::<Vec<R>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("batch worker panicked")).collect()
    })
}

/// Uniform-flow speed of `n` identical drivers on a ring of `length`.
pub fn ring_equilibrium_speed(n: usize, length: f64, human: &HumanDriverParams) -> f64 {
    optimal_velocity(length / n as f64, human)
}
