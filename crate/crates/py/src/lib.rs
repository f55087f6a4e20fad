//! Python module `openfield`: grid cells, the sensor and learning formulas,
//! configured episodes and rate-map analysis.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use openfield_core::analysis::{gridness as core_gridness, spatial_autocorrelogram, RateMap};
use openfield_core::arena;
use openfield_core::config::{Mode, RunConfig};
use openfield_core::controller::{run_episode as core_run_episode, EpisodeLog};
use openfield_core::learning::{oja_update as core_oja_update, SynapseState};
use openfield_core::spatialcells::{
    change_frame as core_change_frame, normalized_rate, raw_firing, FiringParams, FrameTransform,
    GridCellParams,
};
use openfield_core::Vec2;

fn value_err(e: openfield_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Grid cell `[spacing, orientation, phase1, phase2]`.
#[pyclass(name = "GridCell", frozen)]
struct PyGridCell {
    inner: GridCellParams,
}

#[pymethods]
impl PyGridCell {
    #[new]
    fn new(spacing: f64, orientation: f64, phase1: f64, phase2: f64) -> PyResult<Self> {
        GridCellParams::new(spacing, orientation, phase1, phase2)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.inner.spacing()
    }

    #[getter]
    fn orientation(&self) -> f64 {
        self.inner.orientation()
    }

    #[getter]
    fn phases(&self) -> (f64, f64) {
        self.inner.phases()
    }

    /// `((m, n), (cx, cy), distance)` of the nearest lattice node.
    fn nearest_center(&self, x: f64, y: f64) -> ((i64, i64), (f64, f64), f64) {
        let n = self.inner.nearest_center(Vec2::new(x, y));
        (n.index, (n.center.x, n.center.y), n.distance)
    }

    fn grid_frame_coords(&self, x: f64, y: f64) -> (f64, f64) {
        let c = self.inner.grid_frame_coords(Vec2::new(x, y));
        (c.x, c.y)
    }

    #[pyo3(signature = (distance, kappa = 5.0, zeta = 0.3))]
    fn raw_firing(&self, distance: f64, kappa: f64, zeta: f64) -> PyResult<f64> {
        let f = FiringParams::new(kappa, zeta).map_err(value_err)?;
        Ok(raw_firing(distance, &self.inner, &f))
    }

    /// Normalized firing rate in (0, 1) at a position.
    #[pyo3(signature = (x, y, kappa = 5.0, zeta = 0.3))]
    fn rate(&self, x: f64, y: f64, kappa: f64, zeta: f64) -> PyResult<f64> {
        let f = FiringParams::new(kappa, zeta).map_err(value_err)?;
        Ok(self.inner.rate(Vec2::new(x, y), &f))
    }

    fn __repr__(&self) -> String {
        let (p1, p2) = self.inner.phases();
        format!(
            "GridCell(spacing={}, orientation={}, phase1={p1}, phase2={p2})",
            self.inner.spacing(),
            self.inner.orientation()
        )
    }
}

#[pyfunction(name = "normalized_rate")]
fn py_normalized_rate(raw: f64) -> f64 {
    normalized_rate(raw)
}

#[pyfunction]
fn vibration_magnitude(ax: f64, ay: f64, az: f64) -> f64 {
    arena::vibration_magnitude(ax, ay, az)
}

/// One Oja step with a binary motion output; returns the new weight.
#[pyfunction]
fn oja_update(w: f64, x: f64, y: bool, eta: f64) -> PyResult<f64> {
    let s = SynapseState::new(w, eta).map_err(value_err)?;
    Ok(core_oja_update(&s, x, y).w_color)
}

/// Place-cell frame position from a grid-cell frame position.
#[pyfunction]
fn change_frame(x: f64, y: f64, rotation: f64, tx: f64, ty: f64) -> PyResult<(f64, f64)> {
    let t = FrameTransform::new(rotation, Vec2::new(tx, ty)).map_err(value_err)?;
    let p = core_change_frame(Vec2::new(x, y), &t);
    Ok((p.x, p.y))
}

/// Run configuration; same keys as the TOML config files.
#[pyclass(name = "Config")]
struct PyConfig {
    inner: RunConfig,
}

#[pymethods]
impl PyConfig {
    /// Defaults, optionally with a seed.
    #[new]
    #[pyo3(signature = (seed = None))]
    fn new(seed: Option<u64>) -> Self {
        let mut inner = RunConfig::default();
        inner.run.seed = seed;
        Self { inner }
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        RunConfig::from_toml_str(text)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml_string()
    }

    fn hash(&self) -> String {
        self.inner.hash()
    }

    #[getter]
    fn get_seed(&self) -> Option<u64> {
        self.inner.run.seed
    }

    #[setter]
    fn set_seed(&mut self, seed: Option<u64>) {
        self.inner.run.seed = seed;
    }

    #[getter]
    fn get_ticks(&self) -> usize {
        self.inner.run.ticks
    }

    #[setter]
    fn set_ticks(&mut self, ticks: usize) {
        self.inner.run.ticks = ticks;
    }

    /// Sets a sweepable parameter such as `kappa`, `zeta` or `spacing`.
    fn set(&mut self, name: &str, value: f64) -> PyResult<()> {
        self.inner.set_param(name, value).map_err(value_err)
    }

    fn cell_names(&self) -> Vec<String> {
        self.inner.cell.keys().cloned().collect()
    }
}

/// Per-tick traces and counters of a finished episode.
#[pyclass(name = "Episode", frozen)]
struct PyEpisode {
    log: EpisodeLog,
    radius: f64,
}

#[pymethods]
impl PyEpisode {
    #[getter]
    fn x(&self) -> Vec<f64> {
        self.log.records.iter().map(|r| r.pose.position.x).collect()
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.log.records.iter().map(|r| r.pose.position.y).collect()
    }

    #[getter]
    fn heading(&self) -> Vec<f64> {
        self.log.records.iter().map(|r| r.pose.heading).collect()
    }

    #[getter]
    fn vibration(&self) -> Vec<f64> {
        self.log
            .records
            .iter()
            .map(|r| r.sensor.vibration)
            .collect()
    }

    #[getter]
    fn x_color(&self) -> Vec<f64> {
        self.log
            .records
            .iter()
            .map(|r| r.sensor.color_fraction)
            .collect()
    }

    #[getter]
    fn motion(&self) -> Vec<bool> {
        self.log.records.iter().map(|r| r.y).collect()
    }

    #[getter]
    fn w_color(&self) -> Vec<f64> {
        self.log.weight_trace()
    }

    #[getter]
    fn place_active(&self) -> Vec<bool> {
        self.log.records.iter().map(|r| r.place_active).collect()
    }

    #[getter]
    fn bumper_contacts(&self) -> usize {
        self.log.bumper_contacts
    }

    #[getter]
    fn avoidance_events(&self) -> usize {
        self.log.avoidance_events
    }

    #[getter]
    fn final_w_color(&self) -> f64 {
        self.log.final_w_color()
    }

    #[getter]
    fn arena_radius(&self) -> f64 {
        self.radius
    }

    fn cell_rates(&self, name: &str) -> PyResult<Vec<f64>> {
        let i = self
            .log
            .cell_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| PyValueError::new_err(format!("no grid cell named `{name}`")))?;
        Ok(self.log.cell_rates(i))
    }

    fn __len__(&self) -> usize {
        self.log.records.len()
    }
}

/// Runs one seeded episode. `mode` is `explore`, `train` or `test`.
#[pyfunction]
#[pyo3(signature = (config, mode = "train", weight = None))]
fn run_episode(
    py: Python<'_>,
    config: PyRef<'_, PyConfig>,
    mode: &str,
    weight: Option<f64>,
) -> PyResult<PyEpisode> {
    let mode = match mode {
        "explore" => Mode::Explore,
        "train" => Mode::Train,
        "test" => Mode::Test,
        other => {
            return Err(PyValueError::new_err(format!(
                "mode `{other}` is not one of explore, train, test"
            )))
        }
    };
    let cfg = config.inner.episode(mode, weight).map_err(value_err)?;
    let radius = cfg.arena.radius();
    let log = py.detach(|| core_run_episode(&cfg)).map_err(value_err)?;
    Ok(PyEpisode { log, radius })
}

/// Gridness of the rate map built from `(x, y, rate)` samples, or `None`
/// when the autocorrelogram lacks support.
#[pyfunction]
#[pyo3(signature = (x, y, rates, radius = 1.3, bin_size = 0.05, inner = 0.5, outer = 1.5))]
fn gridness(
    x: Vec<f64>,
    y: Vec<f64>,
    rates: Vec<f64>,
    radius: f64,
    bin_size: f64,
    inner: f64,
    outer: f64,
) -> PyResult<Option<f64>> {
    if x.len() != y.len() {
        return Err(PyValueError::new_err("x and y differ in length"));
    }
    let positions: Vec<Vec2> = x.iter().zip(&y).map(|(a, b)| Vec2::new(*a, *b)).collect();
    let map = RateMap::for_arena(&positions, &rates, radius, bin_size).map_err(value_err)?;
    Ok(spatial_autocorrelogram(&map)
        .ok()
        .and_then(|ac| core_gridness(&ac, inner, outer).ok()))
}

#[pymodule]
fn openfield(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGridCell>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyEpisode>()?;
    m.add_function(wrap_pyfunction!(py_normalized_rate, m)?)?;
    m.add_function(wrap_pyfunction!(vibration_magnitude, m)?)?;
    m.add_function(wrap_pyfunction!(oja_update, m)?)?;
    m.add_function(wrap_pyfunction!(change_frame, m)?)?;
    m.add_function(wrap_pyfunction!(run_episode, m)?)?;
    m.add_function(wrap_pyfunction!(gridness, m)?)?;
    Ok(())
}
