//! Closed-loop episode runner: sense, evaluate cells and the associative
//! circuit, then avoid or explore.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::arena::{
    color_sample, most_visible_wall, random_walk_step, vibration_magnitude, vibration_sample,
    Arena, CameraParams, Pose, SensorSample, WalkParams, GRAVITY,
};
use crate::error::{ensure, Result};
use crate::geometry::{wrap_angle, Vec2};
use crate::learning::{AssociativeCircuit, CircuitParams, SynapseState};
use crate::spatialcells::{FiringParams, GridCellParams, PlaceCellParams};

/// Turns the agent to face directly away from a stimulus at
/// `trigger_bearing`, with optional Gaussian jitter. Position is unchanged.
pub fn avoidance_maneuver<R: Rng + ?Sized>(
    pose: &Pose,
    trigger_bearing: f64,
    jitter_sigma: f64,
    rng: &mut R,
) -> Pose {
    let jitter = jitter_sigma * rng.sample::<f64, _>(StandardNormal);
    Pose::new(
        pose.position,
        wrap_angle(trigger_bearing + std::f64::consts::PI + jitter),
    )
}

/// A grid cell logged and analyzed under a stable name.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedCell {
    pub name: String,
    pub params: GridCellParams,
}

#[derive(Debug, Clone)]
pub struct EpisodeConfig {
    pub arena: Arena,
    pub walk: WalkParams,
    pub camera: CameraParams,
    pub firing: FiringParams,
    pub circuit: CircuitParams,
    pub eta: f64,
    pub grid_cells: Vec<NamedCell>,
    pub place: PlaceCellParams,
    /// Accelerometer noise, m/s².
    pub noise_sigma: f64,
    /// Heading jitter of the turn-away maneuver, radians.
    pub avoid_jitter: f64,
    pub tick_count: usize,
    pub vibration_enabled: bool,
    pub learning_enabled: bool,
    pub initial_w_color: f64,
    pub seed: u64,
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.tick_count > 0, "run.ticks", "must be > 0")?;
        self.walk.validate(&self.arena)?;
        self.camera.validate()?;
        self.circuit.validate()?;
        SynapseState::new(self.initial_w_color, self.eta)?;
        ensure(
            self.noise_sigma.is_finite() && self.noise_sigma >= 0.0,
            "arena.noise_sigma",
            "must be >= 0",
        )?;
        ensure(
            self.avoid_jitter.is_finite() && self.avoid_jitter >= 0.0,
            "circuit.avoid_jitter",
            "must be >= 0",
        )
    }
}

/// Everything observed and decided on one tick. `pose` is where the agent
/// sensed; the motion chosen on this tick takes effect on the next record.
#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub tick: usize,
    pub pose: Pose,
    pub sensor: SensorSample,
    pub grid_rates: Vec<f64>,
    pub place_active: bool,
    pub in_zone: bool,
    pub y: bool,
    /// Weight after this tick's update.
    pub w_color: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub records: Vec<TickRecord>,
    pub cell_names: Vec<String>,
    /// Ticks spent inside any bumper zone.
    pub bumper_contacts: usize,
    /// Rising edges of the motion output.
    pub avoidance_events: usize,
    pub initial_w_color: f64,
}

impl EpisodeLog {
    pub fn final_w_color(&self) -> f64 {
        self.records
            .last()
            .map_or(self.initial_w_color, |r| r.w_color)
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.records.iter().map(|r| r.pose.position).collect()
    }

    /// Rate trace of logged cell `index`.
    pub fn cell_rates(&self, index: usize) -> Vec<f64> {
        self.records.iter().map(|r| r.grid_rates[index]).collect()
    }

    pub fn place_trace(&self) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| if r.place_active { 1.0 } else { 0.0 })
            .collect()
    }

    pub fn weight_trace(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.w_color).collect()
    }
}

/// RNG streams of one episode: walk, sensors, avoidance jitter.
fn episode_rngs(seed: u64) -> [ChaCha8Rng; 3] {
    [0u64, 1, 2].map(|stream| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng
    })
}

/// Bearing of the stimulus that triggered avoidance: the nearest bumper
/// center for the vibration reflex, otherwise the middle of the most visible
/// colored wall.
fn trigger_bearing(
    pose: &Pose,
    vibration_reflex: bool,
    arena: &Arena,
    camera: &CameraParams,
) -> f64 {
    let p = pose.position;
    let target = if vibration_reflex {
        arena.nearest_zone(p).map(|z| z.center)
    } else {
        most_visible_wall(pose, arena, camera).map(|w| arena.boundary_point(w.midpoint_angle()))
    };
    match target {
        Some(t) if t != p => (t - p).angle(),
        _ => pose.heading,
    }
}

/// Runs one closed-loop episode.
///
/// Each tick senses at the current pose, evaluates the grid ensemble, the
/// place cell and the associative circuit (learning if enabled), records the
/// tick and then moves. When the motion neuron fires the agent turns away
/// from the triggering stimulus in place, and the following tick always takes
/// one straight exit step along the new heading before normal walking
/// resumes.
pub fn run_episode(cfg: &EpisodeConfig) -> Result<EpisodeLog> {
    cfg.validate()?;
    let [mut walk_rng, mut sensor_rng, mut avoid_rng] = episode_rngs(cfg.seed);
    let exit_walk = WalkParams {
        turn_sigma: 0.0,
        ..cfg.walk
    };
    let mut circuit = AssociativeCircuit {
        params: cfg.circuit,
        synapse: SynapseState::new(cfg.initial_w_color, cfg.eta)?,
        learning_enabled: cfg.learning_enabled,
    };

    let start_heading = walk_rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    let mut pose = Pose::new(Vec2::ZERO, start_heading);
    let mut records = Vec::with_capacity(cfg.tick_count);
    let mut bumper_contacts = 0;
    let mut avoidance_events = 0;
    let mut prev_y = false;
    let mut exit_pending = false;

    for tick in 0..cfg.tick_count {
        let p = pose.position;
        let mut accel = vibration_sample(p, &cfg.arena, cfg.noise_sigma, &mut sensor_rng);
        if !cfg.vibration_enabled {
            accel = [0.0, 0.0, GRAVITY];
        }
        let vibration = vibration_magnitude(accel[0], accel[1], accel[2]);
        let color_fraction = color_sample(&pose, &cfg.arena, &cfg.camera);

        let grid_rates: Vec<f64> = cfg
            .grid_cells
            .iter()
            .map(|c| c.params.rate(p, &cfg.firing))
            .collect();
        let place_rates = cfg.place.input_rates(p, &cfg.firing);
        let place_active = cfg.place.activity(&place_rates)?;

        let io = circuit.step(vibration, color_fraction);
        let in_zone = cfg.arena.in_any_zone(p);
        if in_zone {
            bumper_contacts += 1;
        }
        if io.y && !prev_y {
            avoidance_events += 1;
        }
        prev_y = io.y;

        records.push(TickRecord {
            tick,
            pose,
            sensor: SensorSample {
                accel,
                vibration,
                color_fraction,
            },
            grid_rates,
            place_active,
            in_zone,
            y: io.y,
            w_color: circuit.synapse.w_color,
        });

        pose = if exit_pending {
            exit_pending = false;
            random_walk_step(&pose, &exit_walk, &cfg.arena, &mut walk_rng)
        } else if io.y {
            exit_pending = true;
            let reflex = vibration >= cfg.circuit.vibration_threshold;
            let bearing = trigger_bearing(&pose, reflex, &cfg.arena, &cfg.camera);
            avoidance_maneuver(&pose, bearing, cfg.avoid_jitter, &mut avoid_rng)
        } else {
            random_walk_step(&pose, &cfg.walk, &cfg.arena, &mut walk_rng)
        };
    }

    Ok(EpisodeLog {
        records,
        cell_names: cfg.grid_cells.iter().map(|c| c.name.clone()).collect(),
        bumper_contacts,
        avoidance_events,
        initial_w_color: cfg.initial_w_color,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn maneuver_turns_away() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pose = Pose::new(Vec2::new(0.2, 0.1), 0.4);
        let out = avoidance_maneuver(&pose, pose.heading, 0.0, &mut rng);
        assert_eq!(out.position, pose.position);
        assert!((out.heading - wrap_angle(0.4 + PI)).abs() < 1e-15);
        for k in 0..200 {
            let b = -4.0 + 0.04 * k as f64;
            let h = avoidance_maneuver(&pose, b, 1.5, &mut rng).heading;
            assert!((-PI..PI).contains(&h));
        }
        let a = avoidance_maneuver(&pose, 1.0, 0.0, &mut rng);
        let b = avoidance_maneuver(&pose, 1.0, 0.0, &mut rng);
        assert_eq!(a, b);
    }
}
