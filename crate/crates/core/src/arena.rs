//! Circular arena, correlated random walk and synthetic sensors.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure, Error, Result};
use crate::geometry::{wrap_angle, AngularInterval, Position2, Vec2};

/// Gravitational acceleration subtracted from the vertical axis.
pub const GRAVITY: f64 = 9.81;

/// Disc-shaped bumper patch that shakes the agent while it is inside.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneDisc {
    pub center: Position2,
    pub radius: f64,
    /// Horizontal impulse magnitude in m/s².
    pub amplitude: f64,
}

impl ZoneDisc {
    pub fn contains(&self, p: Position2) -> bool {
        p.distance(self.center) <= self.radius
    }
}

/// Colored stretch of the arena wall running CCW from `start` to `end`
/// (arena-centered angles, radians).
#[derive(Debug, Clone, PartialEq)]
pub struct WallArc {
    pub start: f64,
    pub end: f64,
    pub color: String,
}

impl WallArc {
    pub fn interval(&self) -> AngularInterval {
        AngularInterval::between(self.start, self.end)
    }

    /// Arena-centered angle of the arc's middle.
    pub fn midpoint_angle(&self) -> f64 {
        self.interval().midpoint()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arena {
    radius: f64,
    zones: Vec<ZoneDisc>,
    walls: Vec<WallArc>,
}

impl Arena {
    pub fn new(radius: f64, zones: Vec<ZoneDisc>, walls: Vec<WallArc>) -> Result<Self> {
        ensure(
            radius.is_finite() && radius > 0.0,
            "arena.radius",
            "must be finite and > 0",
        )?;
        for (i, z) in zones.iter().enumerate() {
            ensure(
                z.center.is_finite() && z.center.norm() < radius,
                &format!("zone[{i}].center"),
                "must lie inside the arena",
            )?;
            ensure(z.radius > 0.0, &format!("zone[{i}].radius"), "must be > 0")?;
            ensure(
                z.amplitude >= 0.0,
                &format!("zone[{i}].amplitude"),
                "must be >= 0",
            )?;
        }
        for (i, w) in walls.iter().enumerate() {
            for (key, a) in [("start", w.start), ("end", w.end)] {
                ensure(
                    (-PI..PI).contains(&a),
                    &format!("wall[{i}].{key}"),
                    "must lie in [-π, π)",
                )?;
            }
            ensure(
                w.start != w.end,
                &format!("wall[{i}].end"),
                "arc must have nonzero extent",
            )?;
        }
        Ok(Self {
            radius,
            zones,
            walls,
        })
    }

    /// Bare arena with no zones and no colored walls.
    pub fn open(radius: f64) -> Result<Self> {
        Self::new(radius, Vec::new(), Vec::new())
    }

    /// Red wall over ±60° of the +x direction with three bumper discs in
    /// front of it, so the wall is in view whenever a bumper is reached.
    pub fn paired_cue(radius: f64) -> Result<Self> {
        let ring = radius * PAIRED_ZONE_RING;
        let zones = PAIRED_ZONE_ANGLES_DEG
            .iter()
            .map(|deg| ZoneDisc {
                center: Vec2::from_angle(deg.to_radians()) * ring,
                radius: radius * PAIRED_ZONE_RADIUS,
                amplitude: DEFAULT_BUMPER_AMPLITUDE,
            })
            .collect();
        let half = PAIRED_WALL_HALF_WIDTH_DEG.to_radians();
        let walls = vec![WallArc {
            start: -half,
            end: half,
            color: "red".to_string(),
        }];
        Self::new(radius, zones, walls)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn zones(&self) -> &[ZoneDisc] {
        &self.zones
    }

    pub fn walls(&self) -> &[WallArc] {
        &self.walls
    }

    /// Strictly inside the arena disc.
    pub fn contains(&self, p: Position2) -> bool {
        p.norm() < self.radius
    }

    pub fn in_any_zone(&self, p: Position2) -> bool {
        self.zones.iter().any(|z| z.contains(p))
    }

    /// Largest vibration amplitude among the zones containing `p`.
    pub fn zone_amplitude(&self, p: Position2) -> Option<f64> {
        self.zones
            .iter()
            .filter(|z| z.contains(p))
            .map(|z| z.amplitude)
            .reduce(f64::max)
    }

    /// Zone whose center is closest to `p`.
    pub fn nearest_zone(&self, p: Position2) -> Option<&ZoneDisc> {
        self.zones
            .iter()
            .min_by(|a, b| p.distance(a.center).total_cmp(&p.distance(b.center)))
    }

    /// Point on the boundary at arena angle `angle`.
    pub fn boundary_point(&self, angle: f64) -> Position2 {
        Vec2::from_angle(angle) * self.radius
    }
}

pub const DEFAULT_ARENA_RADIUS: f64 = 1.3;
pub const DEFAULT_BUMPER_AMPLITUDE: f64 = 8.0;
pub const DEFAULT_NOISE_SIGMA: f64 = 0.3;
const PAIRED_WALL_HALF_WIDTH_DEG: f64 = 60.0;
const PAIRED_ZONE_ANGLES_DEG: [f64; 3] = [-24.0, 0.0, 24.0];
/// Zone centers and radii as fractions of the arena radius.
const PAIRED_ZONE_RING: f64 = 0.77;
const PAIRED_ZONE_RADIUS: f64 = 0.13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Position2,
    /// Radians in `[-π, π)`.
    pub heading: f64,
}

impl Pose {
    pub fn new(position: Position2, heading: f64) -> Self {
        Self {
            position,
            heading: wrap_angle(heading),
        }
    }

    pub fn direction(&self) -> Vec2 {
        Vec2::from_angle(self.heading)
    }
}

/// Kinematics of the correlated random walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkParams {
    pub speed: f64,
    pub dt: f64,
    /// Standard deviation of the per-step heading perturbation, radians.
    pub turn_sigma: f64,
}

impl Default for WalkParams {
    fn default() -> Self {
        Self {
            speed: 0.2,
            dt: 0.1,
            turn_sigma: 0.2,
        }
    }
}

impl WalkParams {
    pub fn validate(&self, arena: &Arena) -> Result<()> {
        ensure(
            self.speed.is_finite() && self.speed > 0.0,
            "walk.speed",
            "must be > 0",
        )?;
        ensure(
            self.dt.is_finite() && self.dt > 0.0,
            "walk.dt",
            "must be > 0",
        )?;
        ensure(
            self.turn_sigma.is_finite() && self.turn_sigma >= 0.0,
            "walk.turn_sigma",
            "must be >= 0",
        )?;
        ensure(
            self.step_length() < arena.radius(),
            "walk.speed",
            "speed * dt must be smaller than the arena radius",
        )
    }

    pub fn step_length(&self) -> f64 {
        self.speed * self.dt
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    sigma * rng.sample::<f64, _>(StandardNormal)
}

/// One step of the correlated random walk.
///
/// The heading is perturbed by `N(0, turn_sigma²)` and the agent advances one
/// step length. A step that would leave the arena is mirrored off the wall
/// (outward radial component flipped), perturbed once more and retried; if
/// that also fails the agent stays put and faces the center.
pub fn random_walk_step<R: Rng + ?Sized>(
    pose: &Pose,
    walk: &WalkParams,
    arena: &Arena,
    rng: &mut R,
) -> Pose {
    let step = walk.step_length();
    let heading = wrap_angle(pose.heading + gaussian(rng, walk.turn_sigma));
    let candidate = pose.position + Vec2::from_angle(heading) * step;
    if arena.contains(candidate) {
        return Pose::new(candidate, heading);
    }

    let p = pose.position;
    let normal = if p.norm() > 0.0 {
        p * (1.0 / p.norm())
    } else {
        Vec2::from_angle(heading)
    };
    let mut dir = Vec2::from_angle(heading);
    let outward = dir.dot(normal);
    if outward > 0.0 {
        dir = dir - normal * (2.0 * outward);
    }
    let heading = wrap_angle(dir.angle() + gaussian(rng, walk.turn_sigma));
    let candidate = p + Vec2::from_angle(heading) * step;
    if arena.contains(candidate) {
        Pose::new(candidate, heading)
    } else {
        Pose::new(p, (-p).angle())
    }
}

/// Vibration magnitude from tri-axial acceleration: `√(x² + y² + (z − g)²)`.
pub fn vibration_magnitude(ax: f64, ay: f64, az: f64) -> f64 {
    let z = az - GRAVITY;
    (ax * ax + ay * ay + z * z).sqrt()
}

/// Synthetic accelerometer reading at `pos`.
///
/// Every axis carries `N(0, noise_sigma²)` noise around rest `(0, 0, g)`.
/// Inside a bumper zone a horizontal impulse of the zone's amplitude is added
/// in a uniformly random direction. Draw order is fixed: x, y, z noise, then
/// the impulse direction (only inside a zone).
pub fn vibration_sample<R: Rng + ?Sized>(
    pos: Position2,
    arena: &Arena,
    noise_sigma: f64,
    rng: &mut R,
) -> [f64; 3] {
    let mut ax = gaussian(rng, noise_sigma);
    let mut ay = gaussian(rng, noise_sigma);
    let az = GRAVITY + gaussian(rng, noise_sigma);
    if let Some(amplitude) = arena.zone_amplitude(pos) {
        let dir: f64 = rng.random_range(-PI..PI);
        ax += amplitude * dir.cos();
        ay += amplitude * dir.sin();
    }
    [ax, ay, az]
}

/// Forward-facing camera reduced to a field of view and a sight range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraParams {
    pub fov: f64,
    pub max_range: f64,
}

impl Default for CameraParams {
    fn default() -> Self {
        Self {
            fov: FRAC_PI_2,
            max_range: 1.5,
        }
    }
}

impl CameraParams {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.fov > 0.0 && self.fov < 2.0 * PI,
            "camera.fov",
            "must lie in (0, 2π)",
        )?;
        ensure(
            self.max_range.is_finite() && self.max_range > 0.0,
            "camera.max_range",
            "must be > 0",
        )
    }
}

/// Boundary angles whose wall points lie within `range` of `p`.
fn boundary_within_range(arena: &Arena, p: Position2, range: f64) -> Option<AngularInterval> {
    let r = arena.radius();
    let dist = p.norm();
    if dist == 0.0 {
        return (r <= range).then(|| AngularInterval::new(0.0, 2.0 * PI));
    }
    let cos_half = (r * r + dist * dist - range * range) / (2.0 * r * dist);
    if cos_half <= -1.0 {
        Some(AngularInterval::new(0.0, 2.0 * PI))
    } else if cos_half > 1.0 {
        None
    } else {
        let half = cos_half.acos();
        Some(AngularInterval::new(p.angle() - half, 2.0 * half))
    }
}

/// Angular width of the camera view (radians) covered by `wall`.
///
/// For a viewpoint inside the disc the viewing direction of a boundary point
/// rotates monotonically with its arena angle, so each in-range arc maps to a
/// single interval of viewing directions.
pub fn wall_view_width(pose: &Pose, wall: &WallArc, arena: &Arena, camera: &CameraParams) -> f64 {
    let p = pose.position;
    let Some(in_range) = boundary_within_range(arena, p, camera.max_range) else {
        return 0.0;
    };
    let fov = AngularInterval::new(pose.heading - 0.5 * camera.fov, camera.fov);
    wall.interval()
        .intersect(&in_range)
        .iter()
        .map(|arc| {
            let directions = if arc.width >= 2.0 * PI {
                AngularInterval::new(0.0, 2.0 * PI)
            } else {
                let from = (arena.boundary_point(arc.start) - p).angle();
                let to = (arena.boundary_point(arc.end()) - p).angle();
                AngularInterval::between(from, to)
            };
            fov.overlap(&directions)
        })
        .sum()
}

/// Fraction of the camera's field of view filled by colored wall, in `[0, 1]`.
pub fn color_sample(pose: &Pose, arena: &Arena, camera: &CameraParams) -> f64 {
    let covered: f64 = arena
        .walls()
        .iter()
        .map(|w| wall_view_width(pose, w, arena, camera))
        .sum();
    (covered / camera.fov).clamp(0.0, 1.0)
}

/// The colored wall filling most of the view, if any is visible.
pub fn most_visible_wall<'a>(
    pose: &Pose,
    arena: &'a Arena,
    camera: &CameraParams,
) -> Option<&'a WallArc> {
    let mut best: Option<(&WallArc, f64)> = None;
    for w in arena.walls() {
        let width = wall_view_width(pose, w, arena, camera);
        if width > 0.0 && best.is_none_or(|(_, b)| width > b) {
            best = Some((w, width));
        }
    }
    best.map(|(w, _)| w)
}

/// Per-tick sensor readout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSample {
    pub accel: [f64; 3],
    pub vibration: f64,
    pub color_fraction: f64,
}

impl SensorSample {
    pub fn validate(&self) -> Result<()> {
        if self.vibration < 0.0 || !(0.0..=1.0).contains(&self.color_fraction) {
            return Err(Error::invalid("sensor", "sample out of range"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn vibration_magnitude_examples() {
        assert_eq!(vibration_magnitude(0.0, 0.0, 9.81), 0.0);
        assert_eq!(vibration_magnitude(3.0, 4.0, 9.81), 5.0);
        assert_eq!(vibration_magnitude(1.0, 2.0, 11.81), 3.0);
    }

    #[test]
    fn noise_free_vibration() {
        let arena = Arena::new(
            1.3,
            vec![ZoneDisc {
                center: Vec2::new(0.5, 0.0),
                radius: 0.2,
                amplitude: 8.0,
            }],
            vec![],
        )
        .unwrap();
        let mut r = rng(3);
        let [x, y, z] = vibration_sample(Vec2::new(-0.5, 0.0), &arena, 0.0, &mut r);
        assert_eq!((x.abs(), y.abs(), z), (0.0, 0.0, GRAVITY));
        for _ in 0..100 {
            let [x, y, z] = vibration_sample(Vec2::new(0.55, 0.05), &arena, 0.0, &mut r);
            assert!((vibration_magnitude(x, y, z) - 8.0).abs() < 1e-12);
        }
    }

    #[test]
    fn vibration_sampling_is_seeded() {
        let arena = Arena::paired_cue(1.3).unwrap();
        let p = arena.zones()[0].center;
        let a: Vec<_> = {
            let mut r = rng(11);
            (0..50)
                .map(|_| vibration_sample(p, &arena, 0.3, &mut r))
                .collect()
        };
        let b: Vec<_> = {
            let mut r = rng(11);
            (0..50)
                .map(|_| vibration_sample(p, &arena, 0.3, &mut r))
                .collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn straight_walk_without_turn_noise() {
        let arena = Arena::open(1.3).unwrap();
        let walk = WalkParams {
            turn_sigma: 0.0,
            ..WalkParams::default()
        };
        let mut r = rng(0);
        let mut pose = Pose::new(Vec2::ZERO, 0.7);
        for k in 1..=64 {
            pose = random_walk_step(&pose, &walk, &arena, &mut r);
            assert_eq!(pose.heading, 0.7);
            let expected = 0.02 * k as f64;
            assert!((pose.position.norm() - expected).abs() < 1e-12);
        }
        // The next step reaches the wall at r = 1.30 and is bounced inward.
        let mut turned_at = None;
        for k in 65..=70 {
            let next = random_walk_step(&pose, &walk, &arena, &mut r);
            assert!(arena.contains(next.position));
            if next.position.norm() < pose.position.norm() {
                turned_at.get_or_insert(k);
            }
            pose = next;
        }
        assert!(matches!(turned_at, Some(65 | 66)));
    }

    #[test]
    fn walk_is_contained_and_deterministic() {
        let arena = Arena::paired_cue(1.3).unwrap();
        let walk = WalkParams::default();
        let run = |seed| {
            let mut r = rng(seed);
            let mut pose = Pose::new(Vec2::ZERO, 0.0);
            let mut out = Vec::with_capacity(100_000);
            for _ in 0..100_000 {
                pose = random_walk_step(&pose, &walk, &arena, &mut r);
                out.push(pose);
            }
            out
        };
        let a = run(5);
        assert!(a.iter().all(|p| arena.contains(p.position)));
        assert!(a.iter().all(|p| (-PI..PI).contains(&p.heading)));
        assert_eq!(a[..1000], run(5)[..1000]);
    }

    #[test]
    fn walk_rejects_oversized_steps() {
        let arena = Arena::open(1.3).unwrap();
        let walk = WalkParams {
            speed: 20.0,
            ..WalkParams::default()
        };
        assert!(walk.validate(&arena).is_err());
        assert!(WalkParams::default().validate(&arena).is_ok());
    }

    #[test]
    fn color_examples() {
        let arena = Arena::new(
            1.3,
            vec![],
            vec![WallArc {
                start: 0.0,
                end: FRAC_PI_2,
                color: "red".into(),
            }],
        )
        .unwrap();
        let cam = CameraParams::default();
        // Facing away: the arc spans directions [0, π/2]; view is [3π/4, 5π/4].
        assert_eq!(color_sample(&Pose::new(Vec2::ZERO, PI), &arena, &cam), 0.0);
        // Half of the view [-π/4, π/4] overlaps [0, π/2].
        let half = color_sample(&Pose::new(Vec2::ZERO, 0.0), &arena, &cam);
        assert!((half - 0.5).abs() < 1e-12);
        // Fully inside.
        let full = color_sample(&Pose::new(Vec2::ZERO, PI / 4.0), &arena, &cam);
        assert!((full - 1.0).abs() < 1e-12);

        let short = CameraParams {
            max_range: 1.0,
            ..cam
        };
        assert_eq!(
            color_sample(&Pose::new(Vec2::ZERO, PI / 4.0), &arena, &short),
            0.0
        );
    }

    #[test]
    fn color_off_center_matches_ray_casting() {
        // Brute force: cast 20001 rays across the view and count wall hits.
        let arena = Arena::paired_cue(1.3).unwrap();
        let cam = CameraParams::default();
        let wall = arena.walls()[0].interval();
        for (pos, heading) in [
            (Vec2::new(0.4, 0.3), 0.2),
            (Vec2::new(-0.6, -0.2), 0.1),
            (Vec2::new(0.9, -0.4), 1.4),
            (Vec2::new(0.2, 0.9), -0.9),
        ] {
            let n = 20_001;
            let hits = (0..n)
                .filter(|i| {
                    let a = heading - cam.fov / 2.0 + cam.fov * (*i as f64 + 0.5) / n as f64;
                    let d = Vec2::from_angle(a);
                    // Ray-circle intersection for a point inside the circle.
                    let b = pos.dot(d);
                    let t = -b + (b * b - pos.norm_squared() + 1.69).sqrt();
                    let hit = pos + d * t;
                    t <= cam.max_range && wall.contains(hit.angle())
                })
                .count();
            let expect = hits as f64 / n as f64;
            let got = color_sample(&Pose::new(pos, heading), &arena, &cam);
            assert!((got - expect).abs() < 1e-3, "{pos:?}: {got} vs {expect}");
        }
    }

    #[test]
    fn color_grows_when_approaching_head_on() {
        let arena = Arena::paired_cue(1.3).unwrap();
        let cam = CameraParams::default();
        let mut last = 0.0;
        for k in 0..60 {
            let x = -1.2 + 0.04 * k as f64;
            let c = color_sample(&Pose::new(Vec2::new(x, 0.0), 0.0), &arena, &cam);
            assert!(c >= last - 1e-12, "x = {x}: {c} < {last}");
            last = c;
        }
        assert!(last > 0.99);
    }
}
