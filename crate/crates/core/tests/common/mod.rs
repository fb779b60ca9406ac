#![allow(dead_code)]

use autolabel_core::config::{CameraConfig, LabelConfig};
use autolabel_core::synth::{RenderedScene, SceneSpec, Surface, SyntheticBox};
use autolabel_core::Grid;

pub const RED: [u8; 3] = [200, 40, 30];
pub const BLUE: [u8; 3] = [30, 60, 200];
pub const YELLOW: [u8; 3] = [230, 180, 20];

/// 320x180 camera 1 m above the ground, pitched 0.3 rad, no wall.
pub fn ground_scene() -> SceneSpec {
    SceneSpec::ground_only(320, 180, 230.0, 0.055, 0.3, 1.0)
}

pub fn walled_scene() -> SceneSpec {
    let mut spec = ground_scene();
    spec.wall = Some(8.0);
    spec
}

pub fn boxed(x: [f64; 2], z: [f64; 2], height: f64, color: [u8; 3]) -> SyntheticBox {
    SyntheticBox { x, z, height, color }
}

pub fn config_for(spec: &SceneSpec) -> LabelConfig {
    let mut cfg = LabelConfig::new(CameraConfig::from(spec.camera));
    cfg.depth.max_range = spec.max_range;
    cfg
}

pub fn surface_mask(scene: &RenderedScene, surface: Surface) -> Grid<bool> {
    scene.surfaces.map(|&s| s == surface)
}

pub fn count(mask: &Grid<bool>) -> usize {
    mask.as_slice().iter().filter(|&&m| m).count()
}

pub fn iou(a: &Grid<bool>, b: &Grid<bool>) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.as_slice().iter().zip(b.as_slice()) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// 8-connected components of `mask`, each as its own boolean grid.
pub fn components(mask: &Grid<bool>) -> Vec<Grid<bool>> {
    let (w, h) = mask.dims();
    let mut seen = Grid::new(w, h, false);
    let mut out = Vec::new();
    for sy in 0..h {
        for sx in 0..w {
            if !*mask.get(sx, sy) || *seen.get(sx, sy) {
                continue;
            }
            let mut comp = Grid::new(w, h, false);
            let mut stack = vec![(sx, sy)];
            seen.set(sx, sy, true);
            while let Some((x, y)) = stack.pop() {
                comp.set(x, y, true);
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                        if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        let (nx, ny) = (nx as usize, ny as usize);
                        if *mask.get(nx, ny) && !*seen.get(nx, ny) {
                            seen.set(nx, ny, true);
                            stack.push((nx, ny));
                        }
                    }
                }
            }
            out.push(comp);
        }
    }
    out
}

/// True when every 4-neighbor of the region lies on the ground.
pub fn enclosed_by_ground(scene: &RenderedScene, region: &Grid<bool>) -> bool {
    let (w, h) = region.dims();
    for y in 0..h {
        for x in 0..w {
            if !*region.get(x, y) {
                continue;
            }
            if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
                return false;
            }
            for (nx, ny) in [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)] {
                if !*region.get(nx, ny) && *scene.surfaces.get(nx, ny) != Surface::Ground {
                    return false;
                }
            }
        }
    }
    true
}

/// Height above the ground plane `Y = m` of the point seen at `(x, y)`.
pub fn point_height(spec: &SceneSpec, m: f64, y: usize, depth: f64) -> f64 {
    let big_v = y as f64 - spec.camera.v0;
    let (wy, _) = spec.camera.world_from_row_depth(big_v, depth);
    m - wy
}
