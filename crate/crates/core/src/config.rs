//! Run configuration file: sectioned `key = value` text (TOML syntax),
//! unknown keys rejected, every field defaulted except the seed.
//!
//! ```toml
//! [run]
//! seed = 7
//! ticks = 100000
//!
//! [firing]
//! kappa = 5.0
//! zeta = 0.3
//!
//! [cell.primary]
//! spacing = 1.0
//! orientation = 0.7853981633974483
//! phase1 = 0.5
//! phase2 = 0.0
//! ```

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arena::{
    Arena, CameraParams, WalkParams, WallArc, ZoneDisc, DEFAULT_ARENA_RADIUS,
    DEFAULT_BUMPER_AMPLITUDE, DEFAULT_NOISE_SIGMA,
};
use crate::controller::{EpisodeConfig, NamedCell};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::learning::CircuitParams;
use crate::spatialcells::{FiringParams, GridCellParams, PlaceCellParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub run: RunSection,
    pub walk: WalkSection,
    pub arena: ArenaSection,
    pub zone: BTreeMap<String, ZoneSection>,
    pub wall: BTreeMap<String, WallSection>,
    pub camera: CameraSection,
    pub firing: FiringSection,
    pub circuit: CircuitSection,
    pub cell: BTreeMap<String, CellSection>,
    pub place: PlaceSection,
    pub analysis: AnalysisSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub ticks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkSection {
    pub speed: f64,
    pub dt: f64,
    pub turn_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArenaSection {
    pub radius: f64,
    pub noise_sigma: f64,
    /// `paired_cue` (built-in red wall with bumpers) or `custom` (the
    /// `[zone.*]` and `[wall.*]` sections, possibly none).
    pub layout: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneSection {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

fn default_amplitude() -> f64 {
    DEFAULT_BUMPER_AMPLITUDE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallSection {
    pub start: f64,
    pub end: f64,
    #[serde(default = "default_color")]
    pub color: String,
}

fn default_color() -> String {
    "red".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraSection {
    pub fov: f64,
    pub max_range: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiringSection {
    pub kappa: f64,
    pub zeta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitSection {
    pub vibration_threshold: f64,
    pub color_threshold: f64,
    pub eta: f64,
    /// Required for test episodes unless a trained summary is supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_w_color: Option<f64>,
    pub avoid_jitter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSection {
    pub spacing: f64,
    pub orientation: f64,
    pub phase1: f64,
    pub phase2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlaceSection {
    pub cells: usize,
    pub min_spacing: f64,
    pub max_spacing: f64,
    pub center_x: f64,
    pub center_y: f64,
    pub threshold_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub bin_size: f64,
    /// Gridness annulus, as multiples of the analyzed cell's spacing.
    pub gridness_inner: f64,
    pub gridness_outer: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: None,
            ticks: 100_000,
        }
    }
}

impl Default for WalkSection {
    fn default() -> Self {
        let w = WalkParams::default();
        Self {
            speed: w.speed,
            dt: w.dt,
            turn_sigma: w.turn_sigma,
        }
    }
}

impl Default for ArenaSection {
    fn default() -> Self {
        Self {
            radius: DEFAULT_ARENA_RADIUS,
            noise_sigma: DEFAULT_NOISE_SIGMA,
            layout: "paired_cue".to_string(),
        }
    }
}

impl Default for CameraSection {
    fn default() -> Self {
        Self {
            fov: FRAC_PI_2,
            max_range: 1.5,
        }
    }
}

impl Default for FiringSection {
    fn default() -> Self {
        Self {
            kappa: 5.0,
            zeta: 0.3,
        }
    }
}

impl Default for CircuitSection {
    fn default() -> Self {
        Self {
            vibration_threshold: 5.0,
            color_threshold: 0.3,
            eta: 0.05,
            initial_w_color: None,
            avoid_jitter: 0.0,
        }
    }
}

impl Default for PlaceSection {
    fn default() -> Self {
        Self {
            cells: 8,
            min_spacing: 0.3,
            max_spacing: 1.2,
            center_x: -0.35,
            center_y: 0.25,
            threshold_fraction: 0.8,
        }
    }
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            bin_size: 0.05,
            gridness_inner: 0.5,
            gridness_outer: 1.5,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut cell = BTreeMap::new();
        cell.insert(
            "primary".to_string(),
            CellSection {
                spacing: 1.0,
                orientation: FRAC_PI_4,
                phase1: 0.5,
                phase2: 0.0,
            },
        );
        cell.insert(
            "wide".to_string(),
            CellSection {
                spacing: 8.8,
                orientation: FRAC_PI_4,
                phase1: 0.5,
                phase2: 1.2,
            },
        );
        Self {
            run: RunSection::default(),
            walk: WalkSection::default(),
            arena: ArenaSection::default(),
            zone: BTreeMap::new(),
            wall: BTreeMap::new(),
            camera: CameraSection::default(),
            firing: FiringSection::default(),
            circuit: CircuitSection::default(),
            cell,
            place: PlaceSection::default(),
            analysis: AnalysisSection::default(),
        }
    }
}

/// How an episode drives the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Pure random walk: no vibration input, no learning, zero color weight.
    Explore,
    /// Vibration on, learning on.
    Train,
    /// Vibration off, learning off; needs a color weight.
    Test,
}

/// Parameters a sweep may vary.
pub const SWEEP_PARAMS: &[&str] = &[
    "kappa",
    "zeta",
    "spacing",
    "orientation",
    "phase1",
    "phase2",
    "ticks",
    "speed",
    "turn_sigma",
    "noise_sigma",
    "bin_size",
    "eta",
];

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config always serializes")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml_string().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn seed(&self) -> Result<u64> {
        self.run
            .seed
            .ok_or_else(|| Error::invalid("run.seed", "a seed is required"))
    }

    pub fn arena(&self) -> Result<Arena> {
        let a = &self.arena;
        match a.layout.as_str() {
            "paired_cue" => {
                if !self.zone.is_empty() || !self.wall.is_empty() {
                    return Err(Error::invalid(
                        "arena.layout",
                        "zone/wall sections need layout = \"custom\"",
                    ));
                }
                Arena::paired_cue(a.radius)
            }
            "custom" => Arena::new(
                a.radius,
                self.zone
                    .values()
                    .map(|z| ZoneDisc {
                        center: Vec2::new(z.x, z.y),
                        radius: z.radius,
                        amplitude: z.amplitude,
                    })
                    .collect(),
                self.wall
                    .values()
                    .map(|w| WallArc {
                        start: w.start,
                        end: w.end,
                        color: w.color.clone(),
                    })
                    .collect(),
            ),
            other => Err(Error::invalid(
                "arena.layout",
                format!("unknown layout `{other}` (expected paired_cue or custom)"),
            )),
        }
    }

    pub fn grid_cells(&self) -> Result<Vec<NamedCell>> {
        self.cell
            .iter()
            .map(|(name, c)| {
                let valid = !name.is_empty()
                    && name != "place"
                    && name
                        .chars()
                        .all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-');
                if !valid {
                    return Err(Error::invalid(
                        format!("cell.{name}"),
                        "names use letters, digits, `_` or `-` and `place` is reserved",
                    ));
                }
                GridCellParams::new(c.spacing, c.orientation, c.phase1, c.phase2)
                    .map(|params| NamedCell {
                        name: name.clone(),
                        params,
                    })
                    .map_err(|e| match e {
                        Error::Invalid { key, reason } => Error::Invalid {
                            key: format!("cell.{name}.{key}"),
                            reason,
                        },
                        other => other,
                    })
            })
            .collect()
    }

    pub fn firing(&self) -> Result<FiringParams> {
        FiringParams::new(self.firing.kappa, self.firing.zeta).map_err(|e| prefix("firing", e))
    }

    pub fn place(&self) -> Result<PlaceCellParams> {
        let p = &self.place;
        PlaceCellParams::aligned_ensemble(
            Vec2::new(p.center_x, p.center_y),
            p.cells,
            p.min_spacing,
            p.max_spacing,
            p.threshold_fraction,
        )
    }

    /// Resolves the file into a runnable episode. `weight_override` wins over
    /// `circuit.initial_w_color`.
    pub fn episode(&self, mode: Mode, weight_override: Option<f64>) -> Result<EpisodeConfig> {
        let seed = self.seed()?;
        let initial_w_color = match mode {
            Mode::Explore => 0.0,
            Mode::Train => weight_override
                .or(self.circuit.initial_w_color)
                .unwrap_or(0.0),
            Mode::Test => weight_override
                .or(self.circuit.initial_w_color)
                .ok_or_else(|| {
                    Error::invalid(
                        "circuit.initial_w_color",
                        "test mode needs a color weight (set it or pass a trained summary)",
                    )
                })?,
        };
        let cfg = EpisodeConfig {
            arena: self.arena()?,
            walk: WalkParams {
                speed: self.walk.speed,
                dt: self.walk.dt,
                turn_sigma: self.walk.turn_sigma,
            },
            camera: CameraParams {
                fov: self.camera.fov,
                max_range: self.camera.max_range,
            },
            firing: self.firing()?,
            circuit: CircuitParams {
                vibration_threshold: self.circuit.vibration_threshold,
                color_threshold: self.circuit.color_threshold,
            },
            eta: self.circuit.eta,
            grid_cells: self.grid_cells()?,
            place: self.place()?,
            noise_sigma: self.arena.noise_sigma,
            avoid_jitter: self.circuit.avoid_jitter,
            tick_count: self.run.ticks,
            vibration_enabled: mode == Mode::Train,
            learning_enabled: mode == Mode::Train,
            initial_w_color,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Validates the analysis settings.
    pub fn check_analysis(&self) -> Result<()> {
        let a = &self.analysis;
        if !(a.bin_size.is_finite() && a.bin_size > 0.0) {
            return Err(Error::invalid("analysis.bin_size", "must be > 0"));
        }
        if !(a.gridness_inner >= 0.0 && a.gridness_outer > a.gridness_inner) {
            return Err(Error::invalid(
                "analysis.gridness_outer",
                "need 0 <= gridness_inner < gridness_outer",
            ));
        }
        Ok(())
    }

    /// Overrides one sweepable parameter. Cell geometry parameters apply to
    /// every configured grid cell.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "kappa" => self.firing.kappa = value,
            "zeta" => self.firing.zeta = value,
            "spacing" => self.cell.values_mut().for_each(|c| c.spacing = value),
            "orientation" => self.cell.values_mut().for_each(|c| c.orientation = value),
            "phase1" => self.cell.values_mut().for_each(|c| c.phase1 = value),
            "phase2" => self.cell.values_mut().for_each(|c| c.phase2 = value),
            "ticks" => {
                if value < 0.0 || value.fract() != 0.0 {
                    return Err(Error::invalid("ticks", "must be a non-negative integer"));
                }
                self.run.ticks = value as usize;
            }
            "speed" => self.walk.speed = value,
            "turn_sigma" => self.walk.turn_sigma = value,
            "noise_sigma" => self.arena.noise_sigma = value,
            "bin_size" => self.analysis.bin_size = value,
            "eta" => self.circuit.eta = value,
            other => {
                return Err(Error::invalid(
                    other,
                    format!(
                        "unknown sweep parameter (known: {})",
                        SWEEP_PARAMS.join(", ")
                    ),
                ))
            }
        }
        Ok(())
    }
}

fn prefix(section: &str, e: Error) -> Error {
    match e {
        Error::Invalid { key, reason } => Error::Invalid {
            key: format!("{section}.{key}"),
            reason,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_uses_defaults_but_needs_seed() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert!(matches!(
            cfg.episode(Mode::Explore, None),
            Err(Error::Invalid { key, .. }) if key == "run.seed"
        ));
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = RunConfig::from_toml_str("[firing]\nkapa = 2.0\n").unwrap_err();
        assert!(err.to_string().contains("kapa"), "{err}");
        let err = RunConfig::from_toml_str("[bogus]\nx = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn custom_layout_and_cells() {
        let text = r#"
            [run]
            seed = 3
            ticks = 10
            [arena]
            layout = "custom"
            [zone.a]
            x = 0.5
            y = 0.0
            radius = 0.1
            [wall.north]
            start = 1.0
            end = 2.0
            [cell.only]
            spacing = 0.5
            orientation = 0.1
            phase1 = 0.0
            phase2 = 0.0
        "#;
        let cfg = RunConfig::from_toml_str(text).unwrap();
        let ep = cfg.episode(Mode::Train, None).unwrap();
        assert_eq!(ep.arena.zones().len(), 1);
        assert_eq!(ep.arena.zones()[0].amplitude, 8.0);
        assert_eq!(ep.arena.walls()[0].color, "red");
        assert_eq!(ep.grid_cells.len(), 1);
        assert_eq!(ep.initial_w_color, 0.0);
        assert!(ep.vibration_enabled && ep.learning_enabled);
    }

    #[test]
    fn zero_ticks_rejected() {
        let cfg = RunConfig::from_toml_str("[run]\nseed = 1\nticks = 0\n").unwrap();
        assert!(matches!(
            cfg.episode(Mode::Explore, None),
            Err(Error::Invalid { key, .. }) if key == "run.ticks"
        ));
    }

    #[test]
    fn test_mode_needs_weight() {
        let cfg = RunConfig::from_toml_str("[run]\nseed = 1\n").unwrap();
        assert!(cfg.episode(Mode::Test, None).is_err());
        let ep = cfg.episode(Mode::Test, Some(0.4)).unwrap();
        assert_eq!(ep.initial_w_color, 0.4);
        assert!(!ep.vibration_enabled && !ep.learning_enabled);
    }

    #[test]
    fn bad_cell_key_is_prefixed() {
        let text = "[run]\nseed = 1\n[cell.x]\nspacing = -1.0\norientation = 0.0\nphase1 = 0.0\nphase2 = 0.0\n";
        let cfg = RunConfig::from_toml_str(text).unwrap();
        let err = cfg.episode(Mode::Explore, None).unwrap_err();
        assert!(err.to_string().contains("cell.x.spacing"), "{err}");
    }

    #[test]
    fn reserved_cell_name_rejected() {
        let text = "[run]\nseed = 1\n[cell.place]\nspacing = 1.0\norientation = 0.0\nphase1 = 0.0\nphase2 = 0.0\n";
        let cfg = RunConfig::from_toml_str(text).unwrap();
        assert!(cfg.grid_cells().is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        b.set_param("kappa", 20.0).unwrap();
        assert_ne!(a.hash(), b.hash());
        assert!(b.set_param("nonsense", 1.0).is_err());
    }

    #[test]
    fn round_trips_through_text() {
        let mut cfg = RunConfig::default();
        cfg.run.seed = Some(9);
        cfg.circuit.initial_w_color = Some(0.25);
        let back = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }
}
