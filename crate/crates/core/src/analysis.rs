//! Offline analysis of episode traces: occupancy-normalized rate maps,
//! spatial autocorrelograms, gridness, coverage and field-shape metrics.

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Lags (and gridness annuli) need at least this many paired bins to yield a
/// correlation.
pub const MIN_OVERLAP: usize = 20;

/// Square bins over a rectangular window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinGrid {
    pub bin_size: f64,
    pub origin: Vec2,
    pub nx: usize,
    pub ny: usize,
}

impl BinGrid {
    pub fn new(bin_size: f64, origin: Vec2, nx: usize, ny: usize) -> Result<Self> {
        if !(bin_size.is_finite() && bin_size > 0.0) {
            return Err(Error::invalid("analysis.bin_size", "must be > 0"));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::invalid("analysis.bin_size", "grid has no bins"));
        }
        Ok(Self {
            bin_size,
            origin,
            nx,
            ny,
        })
    }

    /// Grid covering the disc of `radius` centered on the origin.
    pub fn for_arena(radius: f64, bin_size: f64) -> Result<Self> {
        if !(bin_size.is_finite() && bin_size > 0.0) {
            return Err(Error::invalid("analysis.bin_size", "must be > 0"));
        }
        let n = ((2.0 * radius / bin_size) - 1e-9).ceil().max(1.0) as usize;
        Self::new(bin_size, Vec2::new(-radius, -radius), n, n)
    }

    pub fn bin_of(&self, p: Vec2) -> Option<(usize, usize)> {
        let fx = (p.x - self.origin.x) / self.bin_size;
        let fy = (p.y - self.origin.y) / self.bin_size;
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let (ix, iy) = (fx.floor() as usize, fy.floor() as usize);
        (ix < self.nx && iy < self.ny).then_some((ix, iy))
    }

    pub fn bin_center(&self, ix: usize, iy: usize) -> Vec2 {
        self.origin
            + Vec2::new(
                (ix as f64 + 0.5) * self.bin_size,
                (iy as f64 + 0.5) * self.bin_size,
            )
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Mean rate per spatial bin. Unvisited bins hold `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMap {
    pub grid: BinGrid,
    /// Row-major, `iy * nx + ix`, rows ascending in y.
    pub values: Vec<f64>,
    pub occupancy: Vec<u32>,
}

impl RateMap {
    pub fn from_samples(positions: &[Vec2], rates: &[f64], grid: BinGrid) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::Empty("rate map samples"));
        }
        if positions.len() != rates.len() {
            return Err(Error::LengthMismatch {
                expected: positions.len(),
                got: rates.len(),
            });
        }
        let mut sums = vec![0.0; grid.len()];
        let mut occupancy = vec![0u32; grid.len()];
        for (p, r) in positions.iter().zip(rates) {
            if let Some((ix, iy)) = grid.bin_of(*p) {
                let k = iy * grid.nx + ix;
                sums[k] += r;
                occupancy[k] += 1;
            }
        }
        let values = sums
            .iter()
            .zip(&occupancy)
            .map(|(s, &n)| if n > 0 { s / n as f64 } else { f64::NAN })
            .collect();
        Ok(Self {
            grid,
            values,
            occupancy,
        })
    }

    /// Rate map on the standard arena grid.
    pub fn for_arena(
        positions: &[Vec2],
        rates: &[f64],
        radius: f64,
        bin_size: f64,
    ) -> Result<Self> {
        Self::from_samples(positions, rates, BinGrid::for_arena(radius, bin_size)?)
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.nx + ix]
    }

    pub fn visited(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied().filter(|v| !v.is_nan())
    }

    pub fn visited_bins(&self) -> usize {
        self.occupancy.iter().filter(|&&n| n > 0).count()
    }

    pub fn max(&self) -> Option<f64> {
        self.visited().reduce(f64::max)
    }

    pub fn mean(&self) -> Option<f64> {
        let n = self.visited_bins();
        (n > 0).then(|| self.visited().sum::<f64>() / n as f64)
    }

    /// Peak bin rate over the mean visited-bin rate.
    pub fn peak_to_mean(&self) -> Option<f64> {
        let mean = self.mean()?;
        (mean > 0.0).then(|| self.max().unwrap_or(0.0) / mean)
    }

    /// Number of visited bins at or above half the peak rate.
    pub fn half_max_bins(&self) -> usize {
        let Some(peak) = self.max() else {
            return 0;
        };
        self.visited().filter(|v| *v >= 0.5 * peak).count()
    }
}

/// Map values are Pearson correlations indexed by integer bin lags.
#[derive(Debug, Clone, PartialEq)]
pub struct Autocorrelogram {
    pub bin_size: f64,
    pub max_lag_x: i64,
    pub max_lag_y: i64,
    /// Row-major over `ly ∈ [-max_lag_y, max_lag_y]`, `lx ∈ [-max_lag_x, max_lag_x]`.
    pub values: Vec<f64>,
}

impl Autocorrelogram {
    pub fn width(&self) -> usize {
        (2 * self.max_lag_x + 1) as usize
    }

    pub fn height(&self) -> usize {
        (2 * self.max_lag_y + 1) as usize
    }

    /// Correlation at lag `(lx, ly)`; `NaN` when undefined or out of range.
    pub fn get(&self, lx: i64, ly: i64) -> f64 {
        if lx.abs() > self.max_lag_x || ly.abs() > self.max_lag_y {
            return f64::NAN;
        }
        let col = (lx + self.max_lag_x) as usize;
        let row = (ly + self.max_lag_y) as usize;
        self.values[row * self.width() + col]
    }

    fn set(&mut self, lx: i64, ly: i64, v: f64) {
        let w = self.width();
        let col = (lx + self.max_lag_x) as usize;
        let row = (ly + self.max_lag_y) as usize;
        self.values[row * w + col] = v;
    }

    /// Bilinear interpolation at a fractional lag; `None` if any corner is
    /// undefined.
    pub fn sample(&self, fx: f64, fy: f64) -> Option<f64> {
        let (x0, y0) = (fx.floor(), fy.floor());
        let (tx, ty) = (fx - x0, fy - y0);
        let (x0, y0) = (x0 as i64, y0 as i64);
        let c00 = self.get(x0, y0);
        let c10 = self.get(x0 + 1, y0);
        let c01 = self.get(x0, y0 + 1);
        let c11 = self.get(x0 + 1, y0 + 1);
        let v = (1.0 - tx) * (1.0 - ty) * c00
            + tx * (1.0 - ty) * c10
            + (1.0 - tx) * ty * c01
            + tx * ty * c11;
        (!v.is_nan()).then_some(v)
    }
}

/// Pearson correlation of paired samples; `None` for fewer than two pairs or
/// zero variance on either side.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len().min(b.len());
    if n < 2 {
        return None;
    }
    let (a, b) = (&a[..n], &b[..n]);
    if a.iter().all(|v| *v == a[0]) || b.iter().all(|v| *v == b[0]) {
        return None;
    }
    let ma = a.iter().sum::<f64>() / n as f64;
    let mb = b.iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}

/// Correlation of the map with itself shifted by every integer-bin lag, over
/// bins visited at both ends of the lag. Lags with fewer than
/// [`MIN_OVERLAP`] pairs are `NaN`. Zero lag is defined as 1.
pub fn spatial_autocorrelogram(map: &RateMap) -> Result<Autocorrelogram> {
    if map.visited_bins() < 2 {
        return Err(Error::Insufficient(
            "autocorrelogram needs at least two visited bins".into(),
        ));
    }
    let (nx, ny) = (map.grid.nx as i64, map.grid.ny as i64);
    let mut ac = Autocorrelogram {
        bin_size: map.grid.bin_size,
        max_lag_x: nx - 1,
        max_lag_y: ny - 1,
        values: vec![f64::NAN; ((2 * nx - 1) * (2 * ny - 1)) as usize],
    };
    let mut a = Vec::with_capacity(map.values.len());
    let mut b = Vec::with_capacity(map.values.len());
    // Half-plane of lags; the other half is filled by symmetry so that
    // negated lags agree exactly.
    for ly in 0..ny {
        let lx_start = if ly == 0 { 1 } else { -(nx - 1) };
        for lx in lx_start..nx {
            a.clear();
            b.clear();
            for iy in 0.max(-ly)..ny.min(ny - ly) {
                for ix in 0.max(-lx)..nx.min(nx - lx) {
                    let u = map.get(ix as usize, iy as usize);
                    let v = map.get((ix + lx) as usize, (iy + ly) as usize);
                    if !u.is_nan() && !v.is_nan() {
                        a.push(u);
                        b.push(v);
                    }
                }
            }
            if a.len() >= MIN_OVERLAP {
                if let Some(r) = pearson(&a, &b) {
                    ac.set(lx, ly, r);
                    ac.set(-lx, -ly, r);
                }
            }
        }
    }
    ac.set(0, 0, 1.0);
    Ok(ac)
}

/// Sixfold-symmetry score of an autocorrelogram.
///
/// The annulus `inner_r ≤ |lag| ≤ outer_r` (meters) is correlated with
/// copies of itself rotated by 30°…150° (bilinear resampling); the score is
/// `min(r60, r120) − max(r30, r90, r150)`.
pub fn gridness(ac: &Autocorrelogram, inner_r: f64, outer_r: f64) -> Result<f64> {
    if !(inner_r >= 0.0 && outer_r > inner_r) {
        return Err(Error::invalid(
            "analysis.gridness_inner",
            "need 0 <= inner < outer",
        ));
    }
    let mut ring = Vec::new();
    for ly in -ac.max_lag_y..=ac.max_lag_y {
        for lx in -ac.max_lag_x..=ac.max_lag_x {
            let r = (lx as f64).hypot(ly as f64) * ac.bin_size;
            let v = ac.get(lx, ly);
            if r >= inner_r && r <= outer_r && !v.is_nan() {
                ring.push((lx as f64, ly as f64, v));
            }
        }
    }
    if ring.len() < MIN_OVERLAP {
        return Err(Error::Insufficient(format!(
            "annulus holds {} defined bins, need {MIN_OVERLAP}",
            ring.len()
        )));
    }
    let mut corr = [0.0; 5];
    for (k, deg) in [30.0f64, 60.0, 90.0, 120.0, 150.0].iter().enumerate() {
        let (s, c) = deg.to_radians().sin_cos();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for &(x, y, v) in &ring {
            if let Some(w) = ac.sample(c * x - s * y, s * x + c * y) {
                a.push(v);
                b.push(w);
            }
        }
        if a.len() < MIN_OVERLAP {
            return Err(Error::Insufficient(format!(
                "rotation by {deg}° leaves {} paired bins",
                a.len()
            )));
        }
        corr[k] =
            pearson(&a, &b).ok_or_else(|| Error::Insufficient("annulus has no variance".into()))?;
    }
    Ok(corr[1].min(corr[3]) - corr[0].max(corr[2]).max(corr[4]))
}

/// Local maximum of an autocorrelogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Lag in meters.
    pub lag: Vec2,
    pub value: f64,
}

impl Peak {
    pub fn radius(&self) -> f64 {
        self.lag.norm()
    }

    pub fn angle_deg(&self) -> f64 {
        self.lag.angle().to_degrees()
    }
}

/// Positive local maxima (8-neighbourhood) farther than `min_radius` meters
/// from zero lag, nearest first.
pub fn autocorrelogram_peaks(ac: &Autocorrelogram, min_radius: f64) -> Vec<Peak> {
    let mut peaks = Vec::new();
    for ly in -ac.max_lag_y..=ac.max_lag_y {
        for lx in -ac.max_lag_x..=ac.max_lag_x {
            let v = ac.get(lx, ly);
            if v.is_nan() || v <= 0.0 {
                continue;
            }
            let lag = Vec2::new(lx as f64, ly as f64) * ac.bin_size;
            if lag.norm() <= min_radius {
                continue;
            }
            let is_max = (-1..=1).all(|dy| {
                (-1..=1).all(|dx| {
                    if dx == 0 && dy == 0 {
                        return true;
                    }
                    let n = ac.get(lx + dx, ly + dy);
                    // Strict against earlier neighbours, non-strict against later
                    // ones, so a flat pair yields exactly one peak.
                    n.is_nan() || if (dy, dx) < (0, 0) { v > n } else { v >= n }
                })
            });
            if is_max {
                peaks.push(Peak { lag, value: v });
            }
        }
    }
    peaks.sort_by(|a, b| a.radius().total_cmp(&b.radius()));
    peaks
}

/// Largest deviation (degrees) from 60° between angularly adjacent peaks
/// among the six nearest. `None` if fewer than six peaks exist.
pub fn hexagonal_angle_error(peaks: &[Peak]) -> Option<f64> {
    if peaks.len() < 6 {
        return None;
    }
    let mut angles: Vec<f64> = peaks[..6].iter().map(Peak::angle_deg).collect();
    angles.sort_by(f64::total_cmp);
    let worst = (0..6)
        .map(|i| {
            let gap = if i == 5 {
                angles[0] + 360.0 - angles[5]
            } else {
                angles[i + 1] - angles[i]
            };
            (gap - 60.0).abs()
        })
        .fold(0.0, f64::max);
    Some(worst)
}

/// Fraction of in-arena bins (bin center inside the disc) visited at least
/// once.
pub fn coverage(positions: &[Vec2], radius: f64, bin_size: f64) -> Result<f64> {
    let grid = BinGrid::for_arena(radius, bin_size)?;
    let inside = |ix, iy| grid.bin_center(ix, iy).norm() < radius;
    let total = (0..grid.ny)
        .flat_map(|iy| (0..grid.nx).map(move |ix| (ix, iy)))
        .filter(|&(ix, iy)| inside(ix, iy))
        .count();
    if total == 0 {
        return Err(Error::invalid(
            "analysis.bin_size",
            "no bin center inside the arena",
        ));
    }
    let mut seen = vec![false; grid.len()];
    for p in positions {
        if let Some((ix, iy)) = grid.bin_of(*p) {
            if inside(ix, iy) {
                seen[iy * grid.nx + ix] = true;
            }
        }
    }
    Ok(seen.iter().filter(|s| **s).count() as f64 / total as f64)
}

/// Shape summary of the region where a rate map exceeds a level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldStats {
    pub visited_bins: usize,
    pub active_bins: usize,
    /// Size of the largest 8-connected group of active bins.
    pub largest_component: usize,
}

impl FieldStats {
    pub fn active_fraction(&self) -> f64 {
        if self.visited_bins == 0 {
            0.0
        } else {
            self.active_bins as f64 / self.visited_bins as f64
        }
    }

    pub fn compactness(&self) -> f64 {
        if self.active_bins == 0 {
            0.0
        } else {
            self.largest_component as f64 / self.active_bins as f64
        }
    }
}

/// Bins with mean rate strictly above `level` and their connectivity.
/// Diagonal neighbours count as connected, so a field smaller than a bin that
/// straddles a bin corner stays one component.
pub fn field_stats(map: &RateMap, level: f64) -> FieldStats {
    let (nx, ny) = (map.grid.nx, map.grid.ny);
    let active: Vec<bool> = map.values.iter().map(|v| *v > level).collect();
    let mut label = vec![false; active.len()];
    let mut largest = 0;
    let mut stack = Vec::new();
    for start in 0..active.len() {
        if !active[start] || label[start] {
            continue;
        }
        label[start] = true;
        stack.push(start);
        let mut size = 0;
        while let Some(k) = stack.pop() {
            size += 1;
            let (ix, iy) = ((k % nx) as i64, (k / nx) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (jx, jy) = (ix + dx, iy + dy);
                    if jx < 0 || jy < 0 || jx >= nx as i64 || jy >= ny as i64 {
                        continue;
                    }
                    let j = jy as usize * nx + jx as usize;
                    if active[j] && !label[j] {
                        label[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        largest = largest.max(size);
    }
    FieldStats {
        visited_bins: map.visited_bins(),
        active_bins: active.iter().filter(|a| **a).count(),
        largest_component: largest,
    }
}
