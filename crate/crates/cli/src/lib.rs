//! Batch front end: `ratemap`, `episode` and `sweep` commands writing
//! versioned CSV, PGM and `key = value` summaries.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use openfield_core::analysis::{
    coverage, field_stats, gridness, spatial_autocorrelogram, Autocorrelogram, RateMap,
};
use openfield_core::config::{Mode, RunConfig};
use openfield_core::controller::{run_episode, EpisodeConfig, EpisodeLog};
use openfield_core::export::{
    autocorr_csv, ratemap_csv, ratemap_pgm, summary_weight, trajectory_csv, Summary,
};

/// Environment variable holding the sweep worker count (0 or unset: all CPUs).
pub const THREADS_ENV: &str = "OPENFIELD_THREADS";

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments; exit code 2.
    Config(String),
    /// Filesystem failure; exit code 3.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<openfield_core::Error> for CliError {
    fn from(e: openfield_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "openfield", version, about = "Open-field maze simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EpisodeMode {
    Train,
    Test,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Random walk without stimuli; rate maps and autocorrelograms per cell.
    Ratemap {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `run.seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Closed-loop training or test episode.
    Episode {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        mode: EpisodeMode,
        #[arg(long)]
        seed: Option<u64>,
        /// Summary of a training run whose final weight seeds this episode.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Ratemap runs over the Cartesian product of parameter values.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// `name=v1,v2,...`, repeatable.
        #[arg(long = "grid")]
        grid: Vec<String>,
    },
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Ratemap { config, out, seed } => {
            let cfg = load_config(&config, seed)?;
            cmd_ratemap(&cfg, &out).map(|_| ())
        }
        Command::Episode {
            config,
            out,
            mode,
            seed,
            weights,
        } => {
            let cfg = load_config(&config, seed)?;
            let weight = match weights {
                Some(path) => {
                    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
                    Some(
                        summary_weight(&text)
                            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
                    )
                }
                None => None,
            };
            cmd_episode(&cfg, mode, weight, &out).map(|_| ())
        }
        Command::Sweep {
            config,
            out,
            seed,
            grid,
        } => {
            let cfg = load_config(&config, seed)?;
            let grid = parse_grid(&grid)?;
            let threads = threads_from_env()?;
            cmd_sweep(&cfg, &grid, threads, &out).map(|_| ())
        }
    }
}

pub fn load_config(path: &Path, seed: Option<u64>) -> CliResult<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut cfg = RunConfig::from_toml_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if seed.is_some() {
        cfg.run.seed = seed;
    }
    Ok(cfg)
}

fn threads_from_env() -> CliResult<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{THREADS_ENV}=`{v}` is not a count"))),
        Err(_) => Ok(0),
    }
}

/// Writes via a temporary file in the same directory, then renames.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(dir, e))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| io_err(tmp.path(), e))?;
    let target = dir.join(name);
    tmp.persist(&target).map_err(|e| io_err(&target, e.error))?;
    Ok(())
}

fn prepare_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |x| x.to_string())
}

/// Per-cell analysis results.
#[derive(Debug, Clone)]
pub struct CellReport {
    pub name: String,
    pub map: RateMap,
    pub autocorr: Option<Autocorrelogram>,
    pub gridness: Option<f64>,
}

/// Rate maps and summary statistics of one episode.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub coverage: f64,
    pub cells: Vec<CellReport>,
    pub place: CellReport,
    pub place_active_bins: usize,
    pub place_active_fraction: f64,
    pub place_compactness: f64,
}

pub fn analyze(cfg: &RunConfig, episode: &EpisodeConfig, log: &EpisodeLog) -> CliResult<Analysis> {
    cfg.check_analysis()?;
    let radius = episode.arena.radius();
    let bin = cfg.analysis.bin_size;
    let positions = log.positions();
    let cover = coverage(&positions, radius, bin)?;

    let mut cells = Vec::new();
    for (i, cell) in episode.grid_cells.iter().enumerate() {
        let map = RateMap::for_arena(&positions, &log.cell_rates(i), radius, bin)?;
        let autocorr = spatial_autocorrelogram(&map).ok();
        let s = cell.params.spacing();
        let g = autocorr.as_ref().and_then(|ac| {
            gridness(
                ac,
                cfg.analysis.gridness_inner * s,
                cfg.analysis.gridness_outer * s,
            )
            .ok()
        });
        cells.push(CellReport {
            name: cell.name.clone(),
            map,
            autocorr,
            gridness: g,
        });
    }

    let place_map = RateMap::for_arena(&positions, &log.place_trace(), radius, bin)?;
    let stats = field_stats(&place_map, 0.0);
    let place = CellReport {
        name: "place".to_string(),
        autocorr: spatial_autocorrelogram(&place_map).ok(),
        map: place_map,
        gridness: None,
    };
    Ok(Analysis {
        coverage: cover,
        cells,
        place,
        place_active_bins: stats.active_bins,
        place_active_fraction: stats.active_fraction(),
        place_compactness: stats.compactness(),
    })
}

fn push_analysis(s: &mut Summary, a: &Analysis) {
    s.push("coverage", a.coverage);
    for c in &a.cells {
        s.push(&format!("gridness_{}", c.name), fmt_opt(c.gridness));
        s.push(
            &format!("peak_to_mean_{}", c.name),
            fmt_opt(c.map.peak_to_mean()),
        );
        s.push(&format!("half_max_bins_{}", c.name), c.map.half_max_bins());
    }
    s.push("place_active_bins", a.place_active_bins);
    s.push("place_active_fraction", a.place_active_fraction);
    s.push("place_compactness", a.place_compactness);
}

fn write_cell(dir: &Path, c: &CellReport) -> CliResult<()> {
    write_atomic(
        dir,
        &format!("ratemap_{}.csv", c.name),
        &ratemap_csv(&c.map),
    )?;
    write_atomic(
        dir,
        &format!("ratemap_{}.pgm", c.name),
        &ratemap_pgm(&c.map),
    )?;
    if let Some(ac) = &c.autocorr {
        write_atomic(dir, &format!("autocorr_{}.csv", c.name), &autocorr_csv(ac))?;
    }
    Ok(())
}

/// Outcome of a `ratemap` run.
#[derive(Debug, Clone)]
pub struct RatemapReport {
    pub seed: u64,
    pub analysis: Analysis,
    pub summary: Summary,
}

pub fn cmd_ratemap(cfg: &RunConfig, out: &Path) -> CliResult<RatemapReport> {
    let started = Instant::now();
    let episode = cfg.episode(Mode::Explore, None)?;
    cfg.check_analysis()?;
    prepare_dir(out)?;
    let log = run_episode(&episode)?;
    let analysis = analyze(cfg, &episode, &log)?;
    for c in analysis
        .cells
        .iter()
        .chain(std::iter::once(&analysis.place))
    {
        write_cell(out, c)?;
    }
    let mut s = Summary::default();
    s.push("command", "ratemap")
        .push("config_hash", cfg.hash())
        .push("seed", episode.seed)
        .push("ticks", episode.tick_count);
    push_analysis(&mut s, &analysis);
    s.push(
        "wall_clock_seconds",
        format!("{:.3}", started.elapsed().as_secs_f64()),
    );
    write_atomic(out, "summary.txt", &s.render())?;
    Ok(RatemapReport {
        seed: episode.seed,
        analysis,
        summary: s,
    })
}

/// Outcome of an `episode` run.
#[derive(Debug, Clone)]
pub struct EpisodeReport {
    pub log: EpisodeLog,
    pub summary: Summary,
}

pub fn cmd_episode(
    cfg: &RunConfig,
    mode: EpisodeMode,
    weight: Option<f64>,
    out: &Path,
) -> CliResult<EpisodeReport> {
    let started = Instant::now();
    let core_mode = match mode {
        EpisodeMode::Train => Mode::Train,
        EpisodeMode::Test => Mode::Test,
    };
    let episode = cfg.episode(core_mode, weight)?;
    cfg.check_analysis()?;
    prepare_dir(out)?;
    let log = run_episode(&episode)?;
    let analysis = analyze(cfg, &episode, &log)?;
    write_atomic(out, "trajectory.csv", &trajectory_csv(&log))?;

    let mut s = Summary::default();
    s.push("command", "episode")
        .push(
            "mode",
            match mode {
                EpisodeMode::Train => "train",
                EpisodeMode::Test => "test",
            },
        )
        .push("config_hash", cfg.hash())
        .push("seed", episode.seed)
        .push("ticks", episode.tick_count)
        .push("initial_w_color", log.initial_w_color)
        .push("final_w_color", log.final_w_color())
        .push("bumper_contacts", log.bumper_contacts)
        .push("avoidance_events", log.avoidance_events);
    push_analysis(&mut s, &analysis);
    s.push(
        "wall_clock_seconds",
        format!("{:.3}", started.elapsed().as_secs_f64()),
    );
    write_atomic(out, "summary.txt", &s.render())?;
    Ok(EpisodeReport { log, summary: s })
}

/// Parameter axes of a sweep, in command-line order.
pub type SweepGrid = Vec<(String, Vec<f64>)>;

pub fn parse_grid(specs: &[String]) -> CliResult<SweepGrid> {
    if specs.is_empty() {
        return Err(CliError::Config(
            "sweep needs at least one --grid name=v1,v2,...".into(),
        ));
    }
    let mut grid = SweepGrid::new();
    for spec in specs {
        let (name, values) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("grid `{spec}`: expected name=v1,v2,...")))?;
        let name = name.trim();
        if grid.iter().any(|(n, _)| n == name) {
            return Err(CliError::Config(format!(
                "grid parameter `{name}` given twice"
            )));
        }
        let values = values
            .split(',')
            .map(|v| {
                v.trim().parse::<f64>().map_err(|_| {
                    CliError::Config(format!("grid `{name}`: `{}` is not a number", v.trim()))
                })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        grid.push((name.to_string(), values));
    }
    Ok(grid)
}

/// Row-major Cartesian product; the last axis varies fastest.
pub fn grid_points(grid: &SweepGrid) -> Vec<Vec<f64>> {
    grid.iter().fold(vec![Vec::new()], |acc, (_, values)| {
        acc.iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect()
    })
}

/// One `sweep.csv` row.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub index: usize,
    pub seed: u64,
    pub values: Vec<f64>,
    pub analysis: Analysis,
}

pub fn cmd_sweep(
    cfg: &RunConfig,
    grid: &SweepGrid,
    threads: usize,
    out: &Path,
) -> CliResult<Vec<SweepRow>> {
    let base_seed = cfg.seed()?;
    let points = grid_points(grid);
    // Resolve every point before running anything so bad values fail fast.
    let configs = points
        .iter()
        .enumerate()
        .map(|(i, values)| {
            let mut c = cfg.clone();
            for ((name, _), v) in grid.iter().zip(values) {
                c.set_param(name, *v)?;
            }
            c.run.seed = Some(base_seed.wrapping_add(i as u64));
            c.episode(Mode::Explore, None)?;
            c.check_analysis()?;
            Ok(c)
        })
        .collect::<CliResult<Vec<RunConfig>>>()?;
    prepare_dir(out)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let rows = pool.install(|| {
        configs
            .par_iter()
            .zip(points.par_iter())
            .enumerate()
            .map(|(i, (c, values))| {
                let report = cmd_ratemap(c, &out.join(format!("point_{i:04}")))?;
                Ok(SweepRow {
                    index: i,
                    seed: report.seed,
                    values: values.clone(),
                    analysis: report.analysis,
                })
            })
            .collect::<CliResult<Vec<SweepRow>>>()
    })?;

    write_atomic(out, "sweep.csv", &sweep_csv(grid, &rows))?;
    Ok(rows)
}

pub fn sweep_csv(grid: &SweepGrid, rows: &[SweepRow]) -> String {
    let mut cols = vec!["index".to_string(), "seed".to_string()];
    cols.extend(grid.iter().map(|(n, _)| n.clone()));
    if let Some(first) = rows.first() {
        for c in &first.analysis.cells {
            cols.push(format!("gridness_{}", c.name));
            cols.push(format!("peak_to_mean_{}", c.name));
            cols.push(format!("half_max_bins_{}", c.name));
        }
    }
    cols.push("place_active_bins".to_string());
    let cols = cols.join(",");
    let mut out = format!("# openfield sweep v1: {cols}\n{cols}\n");
    for r in rows {
        let mut fields = vec![r.index.to_string(), r.seed.to_string()];
        fields.extend(r.values.iter().map(|v| v.to_string()));
        for c in &r.analysis.cells {
            fields.push(fmt_opt(c.gridness));
            fields.push(fmt_opt(c.map.peak_to_mean()));
            fields.push(c.map.half_max_bins().to_string());
        }
        fields.push(r.analysis.place_active_bins.to_string());
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid(&["kappa=1,5".into(), "zeta = 0.1".into()]).unwrap();
        assert_eq!(g[0], ("kappa".to_string(), vec![1.0, 5.0]));
        assert_eq!(grid_points(&g), vec![vec![1.0, 0.1], vec![5.0, 0.1]]);
        assert!(parse_grid(&[]).is_err());
        assert!(parse_grid(&["kappa".into()]).is_err());
        assert!(parse_grid(&["kappa=x".into()]).is_err());
        assert!(parse_grid(&["kappa=1".into(), "kappa=2".into()]).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config(String::new()).exit_code(), 2);
        assert_eq!(CliError::Io(String::new()).exit_code(), 3);
    }
}
