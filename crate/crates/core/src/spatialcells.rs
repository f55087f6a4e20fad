//! Grid-cell lattice geometry and firing, place-cell thresholding, landmark
//! response and place-cell frame changes.
//!
//! A grid cell `[s, θ, ϑ¹, ϑ²]` owns the hexagonal lattice spanned by
//! `b1 = s·(cos θ, sin θ)` and `b2 = s·(cos(θ+π/3), sin(θ+π/3))`, translated by
//! `(ϑ¹/2π)·b1 + (ϑ²/2π)·b2`. Its firing at a position depends only on the
//! distance to the nearest lattice node.

use std::f64::consts::{FRAC_PI_3, PI, TAU};

use crate::error::{ensure, Error, Result};
use crate::geometry::{wrap_angle, Position2, Vec2};

/// Spacing, orientation and two phases of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCellParams {
    spacing: f64,
    orientation: f64,
    phase1: f64,
    phase2: f64,
}

/// Nearest lattice node to a query position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestNode {
    /// Integer lattice coordinates `(m, n)` of the node.
    pub index: (i64, i64),
    pub center: Position2,
    pub distance: f64,
}

impl GridCellParams {
    pub fn new(spacing: f64, orientation: f64, phase1: f64, phase2: f64) -> Result<Self> {
        ensure(
            spacing.is_finite() && spacing > 0.0,
            "spacing",
            "must be finite and > 0",
        )?;
        ensure(
            (0.0..=FRAC_PI_3).contains(&orientation),
            "orientation",
            "must lie in [0, π/3]",
        )?;
        ensure(
            (0.0..=TAU).contains(&phase1),
            "phase1",
            "must lie in [0, 2π]",
        )?;
        ensure(
            (0.0..=TAU).contains(&phase2),
            "phase2",
            "must lie in [0, 2π]",
        )?;
        Ok(Self {
            spacing,
            orientation,
            phase1,
            phase2,
        })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn phases(&self) -> (f64, f64) {
        (self.phase1, self.phase2)
    }

    /// The two lattice generators, each of length `s`, 60° apart.
    pub fn lattice_basis(&self) -> (Vec2, Vec2) {
        let s = self.spacing;
        let t = self.orientation;
        (
            Vec2::new(s * t.cos(), s * t.sin()),
            Vec2::new(s * (t + FRAC_PI_3).cos(), s * (t + FRAC_PI_3).sin()),
        )
    }

    /// Spatial translation of the lattice encoded by the two phases.
    pub fn phase_offset(&self) -> Vec2 {
        let (b1, b2) = self.lattice_basis();
        b1 * (self.phase1 / TAU) + b2 * (self.phase2 / TAU)
    }

    /// Lattice node `phase_offset + m·b1 + n·b2`.
    pub fn node(&self, m: i64, n: i64) -> Position2 {
        let (b1, b2) = self.lattice_basis();
        self.phase_offset() + b1 * m as f64 + b2 * n as f64
    }

    /// Closest lattice node to `pos`. Exact ties go to the lexicographically
    /// smallest `(m, n)`.
    pub fn nearest_center(&self, pos: Position2) -> NearestNode {
        let (b1, b2) = self.lattice_basis();
        let offset = self.phase_offset();
        let rel = pos - offset;
        let det = b1.x * b2.y - b2.x * b1.y;
        let u = (rel.x * b2.y - rel.y * b2.x) / det;
        let v = (b1.x * rel.y - b1.y * rel.x) / det;
        let (m0, n0) = (u.floor() as i64, v.floor() as i64);

        // The nearest node of a 60° lattice is a corner of the cell holding
        // the point; one extra ring absorbs rounding in (u, v).
        let mut best = NearestNode {
            index: (i64::MAX, i64::MAX),
            center: Vec2::ZERO,
            distance: f64::INFINITY,
        };
        for m in m0 - 1..=m0 + 2 {
            for n in n0 - 1..=n0 + 2 {
                let center = offset + b1 * m as f64 + b2 * n as f64;
                let distance = (pos - center).norm();
                if distance < best.distance || (distance == best.distance && (m, n) < best.index) {
                    best = NearestNode {
                        index: (m, n),
                        center,
                        distance,
                    };
                }
            }
        }
        best
    }

    /// Place-cell frame to grid-cell frame: `Mᵀ·p − (ϑ¹, ϑ²)` with `M = [b1 b2]`.
    pub fn grid_frame_coords(&self, pos: Position2) -> Vec2 {
        let (b1, b2) = self.lattice_basis();
        Vec2::new(b1.dot(pos) - self.phase1, b2.dot(pos) - self.phase2)
    }

    /// Normalized firing rate at `pos`.
    pub fn rate(&self, pos: Position2, firing: &FiringParams) -> f64 {
        normalized_rate(raw_firing(self.nearest_center(pos).distance, self, firing))
    }
}

/// Gain `κ` and baseline offset `ζ` of the arctan firing curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiringParams {
    kappa: f64,
    zeta: f64,
}

impl FiringParams {
    pub fn new(kappa: f64, zeta: f64) -> Result<Self> {
        ensure(
            kappa.is_finite() && kappa > 0.0,
            "kappa",
            "must be finite and > 0",
        )?;
        ensure(
            zeta.is_finite() && zeta >= 0.0,
            "zeta",
            "must be finite and >= 0",
        )?;
        Ok(Self { kappa, zeta })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }
}

impl Default for FiringParams {
    fn default() -> Self {
        Self {
            kappa: 5.0,
            zeta: 0.3,
        }
    }
}

/// `arctan(κ(d/s − ζ))`: zero at `d = ζ·s`, increasing in `d`.
pub fn raw_firing(distance: f64, grid: &GridCellParams, firing: &FiringParams) -> f64 {
    (firing.kappa * (distance / grid.spacing - firing.zeta)).atan()
}

/// Maps a raw arctan response onto `(0, 1)` so that activity peaks at the
/// lattice nodes.
pub fn normalized_rate(raw: f64) -> f64 {
    0.5 - raw / PI
}

/// Rigid change between two place-cell frames: `p₁ = rot(φ)ᵀ·p₂ + ϖ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTransform {
    rotation: f64,
    translation: Vec2,
}

impl FrameTransform {
    pub fn new(rotation: f64, translation: Vec2) -> Result<Self> {
        ensure(
            (-PI..PI).contains(&rotation),
            "rotation",
            "must lie in [-π, π)",
        )?;
        ensure(translation.is_finite(), "translation", "must be finite")?;
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    pub fn translation(&self) -> Vec2 {
        self.translation
    }

    /// Maps a position from the current frame into the initial frame.
    pub fn apply(&self, pos: Position2) -> Position2 {
        let (s, c) = self.rotation.sin_cos();
        Vec2::new(c * pos.x + s * pos.y, -s * pos.x + c * pos.y) + self.translation
    }

    /// Solves `apply` for the current-frame position.
    pub fn invert(&self, pos: Position2) -> Position2 {
        (pos - self.translation).rotated(self.rotation)
    }
}

/// Free-function form of [`FrameTransform::apply`].
pub fn change_frame(pos: Position2, transform: &FrameTransform) -> Position2 {
    transform.apply(pos)
}

/// A place cell reading a fixed ensemble of grid cells through a step
/// threshold on their summed rates.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaceCellParams {
    inputs: Vec<GridCellParams>,
    threshold: f64,
}

impl PlaceCellParams {
    pub fn new(inputs: Vec<GridCellParams>, threshold: f64) -> Result<Self> {
        ensure(
            !inputs.is_empty(),
            "place.cells",
            "needs at least one grid cell",
        )?;
        ensure(
            threshold > 0.0 && threshold <= inputs.len() as f64,
            "place.threshold",
            "must lie in (0, N]",
        )?;
        Ok(Self { inputs, threshold })
    }

    /// Ensemble of `count` cells whose spacings run geometrically from
    /// `min_spacing` to `max_spacing`, orientations fan out over `[0, π/3)`,
    /// and phases put a lattice node of every cell at `center`. The threshold
    /// is `threshold_fraction · count`.
    pub fn aligned_ensemble(
        center: Position2,
        count: usize,
        min_spacing: f64,
        max_spacing: f64,
        threshold_fraction: f64,
    ) -> Result<Self> {
        ensure(count >= 1, "place.cells", "must be >= 1")?;
        ensure(
            min_spacing > 0.0 && max_spacing >= min_spacing,
            "place.min_spacing",
            "need 0 < min_spacing <= max_spacing",
        )?;
        ensure(center.is_finite(), "place.center", "must be finite")?;
        let ratio = if count > 1 {
            (max_spacing / min_spacing).powf(1.0 / (count - 1) as f64)
        } else {
            1.0
        };
        let mut inputs = Vec::with_capacity(count);
        for k in 0..count {
            let spacing = min_spacing * ratio.powi(k as i32);
            let orientation = FRAC_PI_3 * k as f64 / count as f64;
            // Lattice coordinates of the center with zero phase.
            let base = GridCellParams::new(spacing, orientation, 0.0, 0.0)?;
            let (b1, b2) = base.lattice_basis();
            let det = b1.x * b2.y - b2.x * b1.y;
            let u = (center.x * b2.y - center.y * b2.x) / det;
            let v = (b1.x * center.y - b1.y * center.x) / det;
            inputs.push(GridCellParams::new(
                spacing,
                orientation,
                TAU * u.rem_euclid(1.0),
                TAU * v.rem_euclid(1.0),
            )?);
        }
        Self::new(inputs, threshold_fraction * count as f64)
    }

    pub fn inputs(&self) -> &[GridCellParams] {
        &self.inputs
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Rates of every input cell at `pos`.
    pub fn input_rates(&self, pos: Position2, firing: &FiringParams) -> Vec<f64> {
        self.inputs.iter().map(|g| g.rate(pos, firing)).collect()
    }

    /// Step function of the summed rates; the threshold itself counts as
    /// active.
    pub fn activity(&self, rates: &[f64]) -> Result<bool> {
        if rates.len() != self.inputs.len() {
            return Err(Error::LengthMismatch {
                expected: self.inputs.len(),
                got: rates.len(),
            });
        }
        Ok(rates.iter().sum::<f64>() >= self.threshold)
    }
}

/// Free-function form of [`PlaceCellParams::activity`].
pub fn place_activity(rates: &[f64], place: &PlaceCellParams) -> Result<bool> {
    place.activity(rates)
}

/// Distance and bearing of a landmark relative to the subject.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandmarkObservation {
    distance: f64,
    bearing: f64,
}

impl LandmarkObservation {
    pub fn new(distance: f64, bearing: f64) -> Result<Self> {
        ensure(
            distance.is_finite() && distance >= 0.0,
            "landmark.distance",
            "must be finite and >= 0",
        )?;
        ensure(bearing.is_finite(), "landmark.bearing", "must be finite")?;
        Ok(Self {
            distance,
            bearing: wrap_angle(bearing),
        })
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn bearing(&self) -> f64 {
        self.bearing
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandmarkParams {
    sigma_d: f64,
    sigma_theta: f64,
}

impl LandmarkParams {
    pub fn new(sigma_d: f64, sigma_theta: f64) -> Result<Self> {
        ensure(sigma_d > 0.0, "landmark.sigma_d", "must be > 0")?;
        ensure(sigma_theta > 0.0, "landmark.sigma_theta", "must be > 0")?;
        Ok(Self {
            sigma_d,
            sigma_theta,
        })
    }
}

/// Gaussian agreement between observed and remembered landmark geometry,
/// summed over the remembered entries.
///
/// `observed` holds either one observation, compared against every remembered
/// entry, or one observation per remembered entry, compared pairwise. Bearing
/// differences are wrapped to `[-π, π)` before squaring.
pub fn landmark_response(
    observed: &[LandmarkObservation],
    remembered: &[LandmarkObservation],
    params: &LandmarkParams,
) -> Result<f64> {
    if remembered.is_empty() {
        return Err(Error::Empty("remembered landmark list"));
    }
    if observed.is_empty() {
        return Err(Error::Empty("observed landmark list"));
    }
    if observed.len() != 1 && observed.len() != remembered.len() {
        return Err(Error::LengthMismatch {
            expected: remembered.len(),
            got: observed.len(),
        });
    }
    let sd2 = params.sigma_d * params.sigma_d;
    let st2 = params.sigma_theta * params.sigma_theta;
    Ok(remembered
        .iter()
        .enumerate()
        .map(|(k, mem)| {
            let obs = if observed.len() == 1 {
                &observed[0]
            } else {
                &observed[k]
            };
            let dd = obs.distance - mem.distance;
            let dt = wrap_angle(obs.bearing - mem.bearing);
            (-(dd * dd) / sd2 - (dt * dt) / st2).exp()
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    const SQRT3_2: f64 = 0.866_025_403_784_438_6;

    fn g(s: f64, t: f64, p1: f64, p2: f64) -> GridCellParams {
        GridCellParams::new(s, t, p1, p2).unwrap()
    }

    #[test]
    fn rejects_out_of_range_params() {
        assert!(GridCellParams::new(0.0, 0.0, 0.0, 0.0).is_err());
        assert!(GridCellParams::new(1.0, 1.1, 0.0, 0.0).is_err());
        assert!(GridCellParams::new(1.0, 0.0, -0.1, 0.0).is_err());
        assert!(GridCellParams::new(1.0, 0.0, 0.0, 7.0).is_err());
        assert!(FiringParams::new(0.0, 0.3).is_err());
        assert!(FiringParams::new(5.0, -0.1).is_err());
        assert!(FrameTransform::new(PI, Vec2::ZERO).is_err());
        assert!(LandmarkParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn basis_examples() {
        let (b1, b2) = g(1.0, 0.0, 0.0, 0.0).lattice_basis();
        assert_eq!(b1, Vec2::new(1.0, 0.0));
        assert!((b2.x - 0.5).abs() < 1e-15 && (b2.y - SQRT3_2).abs() < 1e-15);

        let (b1, b2) = g(2.0, 0.0, 0.0, 0.0).lattice_basis();
        assert_eq!(b1, Vec2::new(2.0, 0.0));
        assert!((b2.x - 1.0).abs() < 1e-15 && (b2.y - 3f64.sqrt()).abs() < 1e-15);

        // cos/sin of π/4 and 7π/12 from their closed forms.
        let (b1, b2) = g(1.0, FRAC_PI_4, 0.0, 0.0).lattice_basis();
        let r = 0.5f64.sqrt();
        let c712 = (2f64.sqrt() - 6f64.sqrt()) / 4.0;
        let s712 = (2f64.sqrt() + 6f64.sqrt()) / 4.0;
        assert!((b1.x - r).abs() < 1e-15 && (b1.y - r).abs() < 1e-15);
        assert!((b2.x - c712).abs() < 1e-15 && (b2.y - s712).abs() < 1e-15);
        assert!((b1.norm() - 1.0).abs() < 1e-15 && (b2.norm() - 1.0).abs() < 1e-15);
        assert!((b1.dot(b2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn phase_offset_examples() {
        assert_eq!(g(1.0, 0.3, 0.0, 0.0).phase_offset(), Vec2::ZERO);
        let half = g(1.0, 0.0, PI, 0.0).phase_offset();
        assert!((half.x - 0.5).abs() < 1e-15 && half.y.abs() < 1e-15);
        let full = g(1.0, 0.0, TAU, 0.0);
        assert!((full.phase_offset().x - 1.0).abs() < 1e-15);
        let zero = g(1.0, 0.0, 0.0, 0.0);
        for p in [Vec2::new(0.2, 0.7), Vec2::new(-1.1, 0.4)] {
            assert!(
                (full.nearest_center(p).distance - zero.nearest_center(p).distance).abs() < 1e-12
            );
        }
    }

    #[test]
    fn nearest_center_on_node_and_tie() {
        let cell = g(1.3, 0.4, 1.0, 2.0);
        let hit = cell.nearest_center(cell.phase_offset());
        assert_eq!(hit.distance, 0.0);
        assert_eq!(hit.index, (0, 0));

        let unit = g(1.0, 0.0, 0.0, 0.0);
        let tie = unit.nearest_center(Vec2::new(0.5, 0.0));
        assert_eq!(tie.distance, 0.5);
        assert_eq!(tie.index, (0, 0));
        assert_eq!(tie.center, Vec2::ZERO);
    }

    #[test]
    fn raw_firing_examples() {
        let unit = g(1.0, 0.0, 0.0, 0.0);
        let fp = FiringParams::default();
        assert_eq!(raw_firing(0.3, &unit, &fp), 0.0);
        assert_eq!(raw_firing(0.0, &unit, &fp), (-1.5f64).atan());
        assert_eq!(raw_firing(10.0, &unit, &fp), 48.5f64.atan());
        let wide = g(2.5, 0.0, 0.0, 0.0);
        assert_eq!(raw_firing(0.75, &wide, &fp), 0.0);
    }

    #[test]
    fn normalized_rate_examples() {
        assert_eq!(normalized_rate(0.0), 0.5);
        assert!(normalized_rate(PI / 2.0 - 1e-12) < 1e-12);
        assert!(1.0 - normalized_rate(-PI / 2.0 + 1e-12) < 1e-12);
        let r = normalized_rate((-1.5f64).atan());
        assert!((r - (0.5 + 1.5f64.atan() / PI)).abs() < 1e-15);
    }

    #[test]
    fn grid_frame_examples() {
        let unit = g(1.0, 0.0, 0.0, 0.0);
        assert_eq!(unit.grid_frame_coords(Vec2::ZERO), Vec2::ZERO);
        let p = unit.grid_frame_coords(Vec2::new(1.0, 0.0));
        assert!((p.x - 1.0).abs() < 1e-15 && (p.y - 0.5).abs() < 1e-15);
        let shifted = g(1.0, 0.0, 0.5, 0.0).grid_frame_coords(Vec2::new(1.0, 0.0));
        assert!((shifted.x - 0.5).abs() < 1e-15 && (shifted.y - 0.5).abs() < 1e-15);
    }

    #[test]
    fn change_frame_examples() {
        let id = FrameTransform::new(0.0, Vec2::ZERO).unwrap();
        assert_eq!(
            change_frame(Vec2::new(0.3, -2.0), &id),
            Vec2::new(0.3, -2.0)
        );
        let shift = FrameTransform::new(0.0, Vec2::new(1.0, 2.0)).unwrap();
        assert_eq!(change_frame(Vec2::ZERO, &shift), Vec2::new(1.0, 2.0));
        let quarter = FrameTransform::new(PI / 2.0, Vec2::ZERO).unwrap();
        let p = change_frame(Vec2::new(1.0, 0.0), &quarter);
        assert!(p.x.abs() < 1e-15 && (p.y + 1.0).abs() < 1e-15);
    }

    #[test]
    fn place_activity_examples() {
        let cells: Vec<_> = (0..10).map(|_| g(1.0, 0.0, 0.0, 0.0)).collect();
        let place = PlaceCellParams::new(cells, 8.0).unwrap();
        assert!(!place_activity(&[0.0; 10], &place).unwrap());
        assert!(place_activity(&[0.9; 10], &place).unwrap());
        let boundary = PlaceCellParams::new(place.inputs().to_vec(), 5.0).unwrap();
        assert!(place_activity(&[0.5; 10], &boundary).unwrap());
        assert!(matches!(
            place_activity(&[0.9; 3], &place),
            Err(Error::LengthMismatch {
                expected: 10,
                got: 3
            })
        ));

        let pair = PlaceCellParams::new(vec![g(1.0, 0.0, 0.0, 0.0); 2], 1.0).unwrap();
        assert!(place_activity(&[0.25, 0.75], &pair).unwrap());
        assert!(!place_activity(&[0.25, 0.5], &pair).unwrap());
        assert!(PlaceCellParams::new(vec![], 1.0).is_err());
        assert!(PlaceCellParams::new(vec![g(1.0, 0.0, 0.0, 0.0)], 1.5).is_err());
    }

    #[test]
    fn aligned_ensemble_shares_a_node() {
        let center = Vec2::new(0.35, -0.25);
        let place = PlaceCellParams::aligned_ensemble(center, 8, 0.3, 1.2, 0.8).unwrap();
        assert_eq!(place.inputs().len(), 8);
        assert!((place.threshold() - 6.4).abs() < 1e-12);
        assert!((place.inputs()[0].spacing() - 0.3).abs() < 1e-12);
        assert!((place.inputs()[7].spacing() - 1.2).abs() < 1e-12);
        for cell in place.inputs() {
            assert!(cell.nearest_center(center).distance < 1e-9);
        }
    }

    #[test]
    fn landmark_examples() {
        let lp = LandmarkParams::new(0.2, 0.5).unwrap();
        let a = LandmarkObservation::new(1.0, 0.3).unwrap();
        assert_eq!(landmark_response(&[a], &[a], &lp).unwrap(), 1.0);
        assert_eq!(landmark_response(&[a; 5], &[a; 5], &lp).unwrap(), 5.0);
        assert_eq!(landmark_response(&[a], &[a; 5], &lp).unwrap(), 5.0);
        let off = LandmarkObservation::new(1.2, 0.3).unwrap();
        let r = landmark_response(&[off], &[a], &lp).unwrap();
        assert!((r - (-1.0f64).exp()).abs() < 1e-12);
        assert!(matches!(
            landmark_response(&[a], &[], &lp),
            Err(Error::Empty(_))
        ));
        assert!(landmark_response(&[a; 2], &[a; 3], &lp).is_err());
    }

    #[test]
    fn landmark_bearing_wraps() {
        let lp = LandmarkParams::new(1.0, 0.1).unwrap();
        let a = LandmarkObservation::new(1.0, PI - 0.01).unwrap();
        let b = LandmarkObservation::new(1.0, -PI + 0.01).unwrap();
        let r = landmark_response(&[a], &[b], &lp).unwrap();
        assert!((r - (-(0.02f64 * 0.02) / 0.01).exp()).abs() < 1e-9);
    }
}
