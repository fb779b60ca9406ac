//! Synthetic RGB-D scenes with exact ground truth.
//!
//! World axes: `X` right, `Y` down, `Z` forward along the ground; the
//! camera sits at the origin, pitched down by `theta`. Every pixel casts one
//! ray through its centre and keeps the first surface it meets: the ground
//! plane, an optional background wall, or an axis-aligned box resting on
//! the ground. Labels are assigned per surface before any noise is added.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset_io::{DepthImage, LabelClass, LabelImage, RgbImage, DEFAULT_MAX_RANGE};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::vdisparity::CameraModel;

/// Boxes at least this tall are anomalies; shorter ones count as ground.
pub const ANOMALY_HEIGHT: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticPlane {
    /// `Y = m`; the camera is `m` meters above it.
    Horizontal { m: f64 },
    /// `Z = n`, facing the camera.
    Vertical { n: f64 },
    /// `normal . P = offset`.
    General { normal: [f64; 3], offset: f64 },
}

impl SyntheticPlane {
    fn normal_offset(&self) -> ([f64; 3], f64) {
        match *self {
            SyntheticPlane::Horizontal { m } => ([0.0, 1.0, 0.0], m),
            SyntheticPlane::Vertical { n } => ([0.0, 0.0, 1.0], n),
            SyntheticPlane::General { normal, offset } => (normal, offset),
        }
    }

    /// Ray parameter of the hit, if in front of the camera.
    fn intersect(&self, dir: [f64; 3]) -> Option<f64> {
        let (normal, offset) = self.normal_offset();
        let denom = dot(normal, dir);
        if denom.abs() < 1e-12 {
            return None;
        }
        let t = offset / denom;
        (t > 0.0).then_some(t)
    }
}

/// Axis-aligned box standing on a horizontal ground plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticBox {
    /// Lateral extent `[left, right]` in meters.
    pub x: [f64; 2],
    /// Forward extent `[near, far]` in meters.
    pub z: [f64; 2],
    pub height: f64,
    pub color: [u8; 3],
}

impl SyntheticBox {
    pub fn is_anomaly(&self) -> bool {
        self.height >= ANOMALY_HEIGHT
    }

    fn corners(&self, ground: f64) -> impl Iterator<Item = [f64; 3]> + '_ {
        (0..8).map(move |i| {
            [
                self.x[i & 1],
                if i & 2 == 0 { ground } else { ground - self.height },
                self.z[(i >> 2) & 1],
            ]
        })
    }

    /// Slab test against the box spanning `Y` in `[ground - height, ground]`.
    fn intersect(&self, dir: [f64; 3], ground: f64) -> Option<f64> {
        let lo = [self.x[0], ground - self.height, self.z[0]];
        let hi = [self.x[1], ground, self.z[1]];
        let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
        for k in 0..3 {
            if dir[k].abs() < 1e-15 {
                if !(lo[k]..=hi[k]).contains(&0.0) {
                    return None;
                }
                continue;
            }
            let (a, b) = (lo[k] / dir[k], hi[k] / dir[k]);
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
        (t0 <= t1 && t0 > 0.0).then_some(t0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneColors {
    pub ground: [u8; 3],
    pub wall: [u8; 3],
    /// Pixels that hit nothing.
    pub sky: [u8; 3],
    /// Uniform per-channel jitter amplitude added to every pixel.
    pub jitter: u8,
}

impl Default for SceneColors {
    fn default() -> Self {
        Self {
            ground: [112, 110, 106],
            wall: [122, 120, 116],
            sky: [128, 130, 134],
            jitter: 3,
        }
    }
}

fn default_max_range() -> f32 {
    DEFAULT_MAX_RANGE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub camera: CameraModel,
    pub ground: SyntheticPlane,
    /// Distance of a background wall `Z = n`, labeled unknown.
    #[serde(default)]
    pub wall: Option<f64>,
    #[serde(default)]
    pub boxes: Vec<SyntheticBox>,
    #[serde(default)]
    pub colors: SceneColors,
    /// Standard deviation of additive depth noise, meters.
    #[serde(default)]
    pub noise: f64,
    /// Probability that a pixel's depth is dropped.
    #[serde(default)]
    pub dropout: f64,
    #[serde(default = "default_max_range")]
    pub max_range: f32,
}

/// Which surface a pixel's ray hit first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Surface {
    Nothing,
    Ground,
    Wall,
    Box(usize),
}

#[derive(Clone, Debug)]
pub struct RenderedScene {
    pub rgb: RgbImage,
    pub depth: DepthImage,
    pub label: LabelImage,
    pub surfaces: Grid<Surface>,
}

#[inline]
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl SceneSpec {
    /// A ground-only scene with the principal point at the image centre.
    pub fn ground_only(width: usize, height: usize, f: f64, baseline: f64, pitch: f64, camera_height: f64) -> Self {
        Self {
            width,
            height,
            camera: CameraModel {
                f,
                baseline,
                pitch,
                u0: (width as f64 - 1.0) / 2.0,
                v0: (height as f64 - 1.0) / 2.0,
            },
            ground: SyntheticPlane::Horizontal { m: camera_height },
            wall: None,
            boxes: Vec::new(),
            colors: SceneColors::default(),
            noise: 0.0,
            dropout: 0.0,
            max_range: DEFAULT_MAX_RANGE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.camera.validate()?;
        if self.width == 0 || self.height == 0 {
            return Err(Error::DegenerateScene("image has no pixels".into()));
        }
        match self.ground {
            SyntheticPlane::Horizontal { m } if !(m > 0.0) => {
                return Err(Error::DegenerateScene(format!("camera is not above the ground (m = {m})")));
            }
            SyntheticPlane::Horizontal { .. } => {}
            _ if !self.boxes.is_empty() => {
                return Err(Error::DegenerateScene("boxes need a horizontal ground plane".into()));
            }
            SyntheticPlane::General { normal, .. } if dot(normal, normal) == 0.0 => {
                return Err(Error::DegenerateScene("plane normal is zero".into()));
            }
            _ => {}
        }
        if let Some(n) = self.wall {
            if !(n > 0.0) {
                return Err(Error::DegenerateScene(format!("wall must be in front of the camera (n = {n})")));
            }
        }
        for b in &self.boxes {
            if !(b.height > 0.0 && b.x[0] < b.x[1] && b.z[0] < b.z[1]) {
                return Err(Error::DegenerateScene(format!("malformed box {b:?}")));
            }
            if b.z[0] <= 0.0 {
                return Err(Error::DegenerateScene("box behind the camera".into()));
            }
        }
        if !(self.noise >= 0.0) {
            return Err(Error::DegenerateScene(format!("noise must be non-negative, got {}", self.noise)));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::DegenerateScene(format!("dropout must lie in [0, 1), got {}", self.dropout)));
        }
        if !(self.max_range > 0.0) {
            return Err(Error::DegenerateScene("max_range must be positive".into()));
        }
        Ok(())
    }

    fn ground_level(&self) -> f64 {
        match self.ground {
            SyntheticPlane::Horizontal { m } => m,
            _ => f64::NAN,
        }
    }

    /// World direction of the ray through pixel `(x, y)`, scaled so that its
    /// component along the optical axis is 1; the ray parameter of a hit is
    /// then the camera depth.
    pub fn ray(&self, x: usize, y: usize) -> [f64; 3] {
        let cam = &self.camera;
        let xc = (x as f64 - cam.u0) / cam.f;
        let yc = (y as f64 - cam.v0) / cam.f;
        let (s, c) = cam.pitch.sin_cos();
        [xc, yc * c + s, -yc * s + c]
    }

    fn first_hit(&self, dir: [f64; 3]) -> (Surface, f64) {
        let mut best = (Surface::Nothing, f64::INFINITY);
        let mut consider = |surface, t: Option<f64>| {
            if let Some(t) = t {
                if t < best.1 {
                    best = (surface, t);
                }
            }
        };
        consider(Surface::Ground, self.ground.intersect(dir));
        if let Some(n) = self.wall {
            consider(Surface::Wall, SyntheticPlane::Vertical { n }.intersect(dir));
        }
        let ground = self.ground_level();
        for (i, b) in self.boxes.iter().enumerate() {
            consider(Surface::Box(i), b.intersect(dir, ground));
        }
        best
    }

    /// Projected pixel bounds `(x_min, y_min, x_max, y_max)` of a box,
    /// or `None` when a corner is behind the camera.
    pub fn box_bounds(&self, b: &SyntheticBox) -> Option<(f64, f64, f64, f64)> {
        let mut bounds = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in b.corners(self.ground_level()) {
            let (u, v, _) = self.camera.project(p[0], p[1], p[2])?;
            let (x, y) = (u + self.camera.u0, v + self.camera.v0);
            bounds = (bounds.0.min(x), bounds.1.min(y), bounds.2.max(x), bounds.3.max(y));
        }
        Some(bounds)
    }

    /// Renders the scene; `seed` drives color jitter, depth noise and
    /// dropout.
    pub fn render(&self, seed: u64) -> Result<RenderedScene> {
        self.validate()?;
        let (w, h) = (self.width, self.height);
        let max_range = self.max_range as f64;
        let mut surfaces = Grid::new(w, h, Surface::Nothing);
        let mut clean = Grid::new(w, h, 0.0f64);
        let mut classes = Grid::new(w, h, LabelClass::Unknown);
        for y in 0..h {
            for x in 0..w {
                let (surface, t) = self.first_hit(self.ray(x, y));
                if surface == Surface::Nothing || t > max_range {
                    continue;
                }
                surfaces.set(x, y, surface);
                clean.set(x, y, t);
                let class = match surface {
                    Surface::Ground => LabelClass::Drivable,
                    Surface::Box(i) if self.boxes[i].is_anomaly() => LabelClass::Anomaly,
                    Surface::Box(_) => LabelClass::Drivable,
                    Surface::Wall | Surface::Nothing => LabelClass::Unknown,
                };
                classes.set(x, y, class);
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jitter = self.colors.jitter as i16;
        let rgb = Grid::from_fn(w, h, |x, y| {
            let base = match *surfaces.get(x, y) {
                Surface::Nothing => self.colors.sky,
                Surface::Ground => self.colors.ground,
                Surface::Wall => self.colors.wall,
                Surface::Box(i) => self.boxes[i].color,
            };
            base.map(|c| {
                let j = if jitter > 0 { rng.random_range(-jitter..=jitter) } else { 0 };
                (c as i16 + j).clamp(0, 255) as u8
            })
        });
        let noise = Normal::new(0.0, self.noise).map_err(|e| Error::DegenerateScene(e.to_string()))?;
        let depths = Grid::from_fn(w, h, |x, y| {
            let t = *clean.get(x, y);
            if t <= 0.0 {
                return 0.0;
            }
            let noisy = if self.noise > 0.0 { t + noise.sample(&mut rng) } else { t };
            if self.dropout > 0.0 && rng.random::<f64>() < self.dropout {
                0.0
            } else {
                noisy as f32
            }
        });
        Ok(RenderedScene {
            rgb,
            depth: DepthImage::from_meters(depths, self.max_range)?,
            label: LabelImage::from_classes(classes),
            surfaces,
        })
    }
}

/// Closed-form v-disparity line of a plane, `disparity = slope * V + intercept`
/// with `V` measured from the principal row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpectedLine {
    pub slope: f64,
    pub intercept: f64,
}

impl ExpectedLine {
    pub fn disparity_at(&self, big_v: f64) -> f64 {
        self.slope * big_v + self.intercept
    }
}

pub fn expected_vdisparity_line(plane: &SyntheticPlane, cam: &CameraModel) -> Result<ExpectedLine> {
    let (s, c) = cam.pitch.sin_cos();
    let b = cam.baseline;
    match *plane {
        SyntheticPlane::Horizontal { m } => Ok(ExpectedLine {
            slope: b * c / m,
            intercept: b * cam.f * s / m,
        }),
        SyntheticPlane::Vertical { n } => Ok(ExpectedLine {
            slope: -b * s / n,
            intercept: b * cam.f * c / n,
        }),
        SyntheticPlane::General { .. } => Err(Error::DegenerateScene(
            "closed-form line only exists for horizontal and vertical planes".into(),
        )),
    }
}

/// Ranges for randomly placed boxes; each pair is `[min, max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomBoxes {
    pub count: [usize; 2],
    pub height: [f64; 2],
    /// Footprint side length.
    pub size: [f64; 2],
    /// Forward distance of the near face.
    pub distance: [f64; 2],
    /// Minimum clearance in pixels between a box and the image border.
    pub margin_px: f64,
    /// Minimum ground gap between boxes, meters.
    pub spacing: f64,
    pub palette: Vec<[u8; 3]>,
}

impl Default for RandomBoxes {
    fn default() -> Self {
        Self {
            count: [1, 3],
            height: [0.06, 0.4],
            size: [0.2, 0.5],
            distance: [1.8, 4.5],
            margin_px: 6.0,
            spacing: 0.3,
            palette: vec![[200, 40, 30], [30, 60, 200], [230, 180, 20], [150, 40, 160], [20, 150, 60]],
        }
    }
}

impl RandomBoxes {
    /// Draws boxes into `spec`, replacing any it had. Placements that
    /// would leave the frame or crowd another box are redrawn; a box that
    /// cannot be placed after many tries is skipped.
    pub fn populate<R: Rng>(&self, spec: &mut SceneSpec, rng: &mut R) {
        spec.boxes.clear();
        let target = rng.random_range(self.count[0]..=self.count[1].max(self.count[0]));
        let mut tries = 0;
        while spec.boxes.len() < target && tries < 500 {
            tries += 1;
            let width = rng.random_range(self.size[0]..=self.size[1]);
            let depth = rng.random_range(self.size[0]..=self.size[1]);
            let height = rng.random_range(self.height[0]..=self.height[1]);
            let near = rng.random_range(self.distance[0]..=self.distance[1]);
            // lateral position bounded by the view cone at that distance
            let half_fov = (spec.width as f64 / 2.0) / spec.camera.f * near;
            let center = rng.random_range(-half_fov..=half_fov);
            let color = *self.palette.choose(rng).unwrap_or(&[200, 40, 30]);
            let candidate = SyntheticBox {
                x: [center - width / 2.0, center + width / 2.0],
                z: [near, near + depth],
                height,
                color,
            };
            let crowded = spec.boxes.iter().any(|b| {
                candidate.x[0] < b.x[1] + self.spacing
                    && b.x[0] < candidate.x[1] + self.spacing
                    && candidate.z[0] < b.z[1] + self.spacing
                    && b.z[0] < candidate.z[1] + self.spacing
            });
            let m = self.margin_px;
            let inside = spec.box_bounds(&candidate).is_some_and(|(x0, y0, x1, y1)| {
                x0 >= m && y0 >= m && x1 <= spec.width as f64 - 1.0 - m && y1 <= spec.height as f64 - 1.0 - m
            });
            if !crowded && inside {
                spec.boxes.push(candidate);
            }
        }
    }
}

/// Scene file contents: a base scene and optional random box placement.
///
/// ```toml
/// [scene]
/// width = 320
/// height = 180
/// wall = 8.0
/// noise = 0.005
/// dropout = 0.02
/// [scene.camera]
/// f = 230.0
/// baseline = 0.055
/// pitch = 0.3
/// u0 = 159.5
/// v0 = 89.5
/// [scene.ground]
/// kind = "horizontal"
/// m = 1.0
/// [random]          # omit to keep the boxes listed under [[scene.boxes]]
/// count = [1, 3]
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneTemplate {
    pub scene: SceneSpec,
    #[serde(default)]
    pub random: Option<RandomBoxes>,
}

impl SceneTemplate {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let t: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        t.scene.validate()?;
        Ok(t)
    }

    /// Scene `index` of a run seeded with `seed`, with the seed for its
    /// rendering noise.
    pub fn instantiate(&self, seed: u64, index: u64) -> (SceneSpec, u64) {
        let mut rng = scene_rng(seed, index);
        let mut spec = self.scene.clone();
        if let Some(random) = &self.random {
            random.populate(&mut spec, &mut rng);
        }
        (spec, rng.random())
    }
}

/// Deterministic RNG for scene `index` of a run seeded with `seed`.
pub fn scene_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
