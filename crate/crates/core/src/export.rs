//! Text output formats. Every CSV starts with a `# openfield <kind> v1`
//! comment line naming the columns so readers can check the layout.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::analysis::{Autocorrelogram, RateMap};
use crate::controller::EpisodeLog;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

fn header(kind: &str, columns: &str) -> String {
    format!("# openfield {kind} v{FORMAT_VERSION}: {columns}\n")
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v == 0.0 {
        // Drops the sign of negative zero.
        "0".to_string()
    } else {
        format!("{v}")
    }
}

/// One row per tick. The motion output is the `motion` column (0/1) so it
/// does not clash with the `y` coordinate.
pub fn trajectory_csv(log: &EpisodeLog) -> String {
    let cols = "tick,x,y,heading,vibration,x_color,motion,w_color";
    let mut out = header("trajectory", cols);
    out.push_str(cols);
    out.push('\n');
    for r in &log.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.tick,
            num(r.pose.position.x),
            num(r.pose.position.y),
            num(r.pose.heading),
            num(r.sensor.vibration),
            num(r.sensor.color_fraction),
            u8::from(r.y),
            num(r.w_color),
        )
        .unwrap();
    }
    out
}

fn matrix_csv(
    kind: &str,
    meta: &str,
    rows: usize,
    cols: usize,
    at: impl Fn(usize, usize) -> f64,
) -> String {
    let mut out = header(kind, meta);
    for r in 0..rows {
        let line: Vec<String> = (0..cols).map(|c| num(at(r, c))).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Bin matrix, first row = lowest y. Unvisited bins are `nan`.
pub fn ratemap_csv(map: &RateMap) -> String {
    let g = &map.grid;
    let meta = format!(
        "nx={} ny={} bin_size={} origin_x={} origin_y={} rows ascending in y",
        g.nx, g.ny, g.bin_size, g.origin.x, g.origin.y
    );
    matrix_csv("ratemap", &meta, g.ny, g.nx, |r, c| map.get(c, r))
}

/// Lag matrix, first row = most negative y lag.
pub fn autocorr_csv(ac: &Autocorrelogram) -> String {
    let meta = format!(
        "max_lag_x={} max_lag_y={} bin_size={} rows ascending in lag_y",
        ac.max_lag_x, ac.max_lag_y, ac.bin_size
    );
    matrix_csv("autocorr", &meta, ac.height(), ac.width(), |r, c| {
        ac.values[r * ac.width() + c]
    })
}

/// Plain (P2) greyscale image scaled to the peak, top row = highest y.
/// Unvisited bins are black.
pub fn ratemap_pgm(map: &RateMap) -> String {
    let g = &map.grid;
    let peak = map.max().filter(|m| *m > 0.0).unwrap_or(1.0);
    let mut out = format!("P2\n{} {}\n255\n", g.nx, g.ny);
    for iy in (0..g.ny).rev() {
        let line: Vec<String> = (0..g.nx)
            .map(|ix| {
                let v = map.get(ix, iy);
                let level = if v.is_nan() {
                    0.0
                } else {
                    (v / peak).clamp(0.0, 1.0) * 255.0
                };
                format!("{}", level.round() as u8)
            })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Ordered `key = value` report.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn render(&self) -> String {
        let mut out = format!("# openfield summary v{FORMAT_VERSION}\n");
        for (k, v) in &self.entries {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }
}

/// Parses a rendered summary back into its key/value pairs.
pub fn parse_summary(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("summary line {}: expected `key = value`", n + 1))
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Reads `w_color` from a rendered summary.
pub fn summary_weight(text: &str) -> Result<f64> {
    let map = parse_summary(text)?;
    let raw = map
        .get("final_w_color")
        .ok_or_else(|| Error::Config("summary has no final_w_color".into()))?;
    raw.parse()
        .map_err(|_| Error::Config(format!("final_w_color `{raw}` is not a number")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::BinGrid;
    use crate::geometry::Vec2;

    #[test]
    fn summary_round_trip() {
        let mut s = Summary::default();
        s.push("seed", 4).push("final_w_color", 0.5125);
        let text = s.render();
        assert!(text.starts_with("# openfield summary v1\n"));
        assert_eq!(summary_weight(&text).unwrap(), 0.5125);
        assert!(summary_weight("seed = 1\n").is_err());
        assert!(parse_summary("garbage\n").is_err());
    }

    #[test]
    fn ratemap_outputs() {
        let grid = BinGrid::new(1.0, Vec2::ZERO, 2, 2).unwrap();
        let map = RateMap::from_samples(
            &[
                Vec2::new(0.5, 0.5),
                Vec2::new(1.5, 0.5),
                Vec2::new(0.5, 1.5),
            ],
            &[1.0, 0.5, 0.0],
            grid,
        )
        .unwrap();
        let csv = ratemap_csv(&map);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# openfield ratemap v1"));
        assert_eq!(lines[1], "1,0.5");
        assert_eq!(lines[2], "0,nan");
        let pgm = ratemap_pgm(&map);
        assert_eq!(pgm, "P2\n2 2\n255\n0 0\n255 128\n");
    }
}
