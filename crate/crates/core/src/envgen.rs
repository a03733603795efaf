//! Procedural benchmark environments.
//!
//! Every generator is a pure function of its [`EnvSpec`]; the seed drives a
//! ChaCha8 stream so maps are identical across runs and platforms. The
//! returned grid is raw (not inflated); see [`build`].

use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::OccupancyGrid;
use crate::vec3::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    Forest,
    Cave,
    Corridor,
    DoubleWall,
    Empty,
}

/// Vertical cylinders scattered uniformly (2.5D).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    /// Obstacles per square meter of floor.
    pub density: f64,
    pub radius_min: f64,
    pub radius_max: f64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { density: 0.08, radius_min: 0.2, radius_max: 0.5 }
    }
}

/// Solid rock with spherical chambers joined by capsule tunnels (3D).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CaveParams {
    pub chambers: usize,
    pub chamber_radius_min: f64,
    pub chamber_radius_max: f64,
    pub tunnel_radius_min: f64,
    pub tunnel_radius_max: f64,
    /// Extra random tunnels beyond the chain through all chambers.
    pub extra_tunnels: usize,
}

impl Default for CaveParams {
    fn default() -> Self {
        CaveParams {
            chambers: 10,
            chamber_radius_min: 1.5,
            chamber_radius_max: 3.0,
            tunnel_radius_min: 0.9,
            tunnel_radius_max: 1.4,
            extra_tunnels: 4,
        }
    }
}

/// Thick full-height walls across the x axis pierced by straight passages (2.5D).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorridorParams {
    pub walls: usize,
    pub wall_thickness: f64,
    pub passages_per_wall: usize,
    pub passage_width: f64,
}

impl Default for CorridorParams {
    fn default() -> Self {
        CorridorParams { walls: 3, wall_thickness: 3.0, passages_per_wall: 2, passage_width: 0.9 }
    }
}

/// Thin full-height walls across the x axis, each split by many gaps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DoubleWallParams {
    pub walls: usize,
    pub gaps_per_wall: usize,
    pub gap_width: f64,
    pub wall_thickness: f64,
}

impl Default for DoubleWallParams {
    fn default() -> Self {
        DoubleWallParams { walls: 2, gaps_per_wall: 20, gap_width: 0.7, wall_thickness: 0.2 }
    }
}

/// Full description of a generated environment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub kind: EnvKind,
    /// Box size; the map spans `[0, extents]`.
    pub extents: Vec3,
    pub seed: u64,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default = "default_inflation")]
    pub inflation: f64,
    #[serde(default)]
    pub forest: ForestParams,
    #[serde(default)]
    pub cave: CaveParams,
    #[serde(default)]
    pub corridor: CorridorParams,
    #[serde(default)]
    pub double_wall: DoubleWallParams,
}

fn default_resolution() -> f64 {
    0.1
}

fn default_inflation() -> f64 {
    0.3
}

impl EnvSpec {
    pub fn new(kind: EnvKind, extents: Vec3, seed: u64) -> Self {
        EnvSpec {
            kind,
            extents,
            seed,
            resolution: default_resolution(),
            inflation: default_inflation(),
            forest: ForestParams::default(),
            cave: CaveParams::default(),
            corridor: CorridorParams::default(),
            double_wall: DoubleWallParams::default(),
        }
    }

    /// 30 × 30 × 3 m box split by two walls with 20 gaps of 0.7 m each.
    pub fn double_wall(seed: u64) -> Self {
        EnvSpec::new(EnvKind::DoubleWall, Vec3::new(30.0, 30.0, 3.0), seed)
    }

    pub fn forest(seed: u64) -> Self {
        EnvSpec::new(EnvKind::Forest, Vec3::new(30.0, 30.0, 3.0), seed)
    }

    /// 30 × 12 × 3 m box crossed by three 3 m thick walls, each pierced by
    /// two 0.9 m passages.
    pub fn corridor(seed: u64) -> Self {
        EnvSpec::new(EnvKind::Corridor, Vec3::new(30.0, 12.0, 3.0), seed)
    }

    pub fn cave(seed: u64) -> Self {
        EnvSpec::new(EnvKind::Cave, Vec3::new(30.0, 20.0, 6.0), seed)
    }

    /// x positions of the wall centers for wall-type maps.
    pub fn wall_centers(&self) -> Vec<f64> {
        let n = match self.kind {
            EnvKind::Corridor => self.corridor.walls,
            EnvKind::DoubleWall => self.double_wall.walls,
            _ => 0,
        };
        (1..=n).map(|k| self.extents.x * k as f64 / (n + 1) as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let e = self.extents;
        if !(e.x > 0.0 && e.y > 0.0 && e.z > 0.0) {
            return Err(Error::Config("extents must be positive"));
        }
        if !(self.resolution > 0.0) || !(self.inflation >= 0.0) {
            return Err(Error::Config("resolution must be positive and inflation nonnegative"));
        }
        match self.kind {
            EnvKind::Forest => {
                let f = &self.forest;
                if !(f.density >= 0.0 && f.radius_min > 0.0 && f.radius_max >= f.radius_min) {
                    return Err(Error::Config("forest: density ≥ 0 and 0 < radius_min ≤ radius_max"));
                }
            }
            EnvKind::Cave => {
                let c = &self.cave;
                if c.chambers < 2
                    || !(c.chamber_radius_min > 0.0 && c.chamber_radius_max >= c.chamber_radius_min)
                    || !(c.tunnel_radius_min > 0.0 && c.tunnel_radius_max >= c.tunnel_radius_min)
                {
                    return Err(Error::Config("cave: at least two chambers and ordered positive radii"));
                }
            }
            EnvKind::Corridor => {
                let c = &self.corridor;
                if c.walls == 0 || c.passages_per_wall == 0 || !(c.wall_thickness > 0.0) || !(c.passage_width > 0.0) {
                    return Err(Error::Config("corridor: walls, passages and sizes must be positive"));
                }
            }
            EnvKind::DoubleWall => {
                let d = &self.double_wall;
                if d.walls == 0 || d.gaps_per_wall == 0 || !(d.gap_width > 0.0) || !(d.wall_thickness > 0.0) {
                    return Err(Error::Config("double_wall: walls, gaps and sizes must be positive"));
                }
            }
            EnvKind::Empty => {}
        }
        Ok(())
    }
}

/// Raw occupancy for `spec`.
pub fn generate(spec: &EnvSpec) -> Result<OccupancyGrid> {
    spec.validate()?;
    let mut grid = OccupancyGrid::with_extents(Vec3::ZERO, spec.extents, spec.resolution)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.kind {
        EnvKind::Empty => {}
        EnvKind::Forest => forest(&mut grid, spec, &mut rng),
        EnvKind::Cave => cave(&mut grid, spec, &mut rng),
        EnvKind::Corridor => {
            let c = spec.corridor;
            walls_with_openings(&mut grid, spec, c.wall_thickness, c.passages_per_wall, c.passage_width, 3, &mut rng)?
        }
        EnvKind::DoubleWall => {
            let d = spec.double_wall;
            walls_with_openings(&mut grid, spec, d.wall_thickness, d.gaps_per_wall, d.gap_width, 2, &mut rng)?
        }
    }
    Ok(grid)
}

/// [`generate`] followed by inflation with `spec.inflation`.
pub fn build(spec: &EnvSpec) -> Result<OccupancyGrid> {
    Ok(generate(spec)?.inflate(spec.inflation))
}

fn forest(grid: &mut OccupancyGrid, spec: &EnvSpec, rng: &mut ChaCha8Rng) {
    let f = spec.forest;
    let e = spec.extents;
    let count = (f.density * e.x * e.y).round() as usize;
    for _ in 0..count {
        let cx = rng.random::<f64>() * e.x;
        let cy = rng.random::<f64>() * e.y;
        let r = f.radius_min + rng.random::<f64>() * (f.radius_max - f.radius_min);
        let lo = Vec3::new(cx - r, cy - r, 0.0);
        let hi = Vec3::new(cx + r, cy + r, e.z);
        grid.fill_where(lo, hi, true, |p| (p.x - cx).powi(2) + (p.y - cy).powi(2) <= r * r);
    }
}

fn cave(grid: &mut OccupancyGrid, spec: &EnvSpec, rng: &mut ChaCha8Rng) {
    let c = spec.cave;
    let e = spec.extents;
    let (lo, hi) = grid.bounds();
    grid.fill_box(lo, hi, true);
    let mut chambers: Vec<(Vec3, f64)> = (0..c.chambers)
        .map(|_| {
            let r = c.chamber_radius_min + rng.random::<f64>() * (c.chamber_radius_max - c.chamber_radius_min);
            let m = Vec3::new(r.min(e.x / 2.0), r.min(e.y / 2.0), (r * 0.5).min(e.z / 2.0));
            let p = Vec3::new(
                m.x + rng.random::<f64>() * (e.x - 2.0 * m.x),
                m.y + rng.random::<f64>() * (e.y - 2.0 * m.y),
                m.z + rng.random::<f64>() * (e.z - 2.0 * m.z),
            );
            (p, r)
        })
        .collect();
    chambers.sort_by(|a, b| a.0.x.total_cmp(&b.0.x));
    let mut links: Vec<(usize, usize)> = (0..chambers.len() - 1).map(|i| (i, i + 1)).collect();
    for _ in 0..c.extra_tunnels {
        let a = rng.random_range(0..chambers.len());
        let b = rng.random_range(0..chambers.len());
        if a != b {
            links.push((a, b));
        }
    }
    for &(p, r) in &chambers {
        let rz = (r * 0.6).max(spec.resolution);
        grid.fill_where(p - Vec3::new(r, r, rz), p + Vec3::new(r, r, rz), false, |q| {
            let d = q - p;
            (d.x / r).powi(2) + (d.y / r).powi(2) + (d.z / rz).powi(2) <= 1.0
        });
    }
    for (a, b) in links {
        let (pa, pb) = (chambers[a].0, chambers[b].0);
        let r = c.tunnel_radius_min + rng.random::<f64>() * (c.tunnel_radius_max - c.tunnel_radius_min);
        let pad = Vec3::splat(r);
        grid.fill_where(pa.component_min(pb) - pad, pa.component_max(pb) + pad, false, |q| {
            segment_distance(q, pa, pb) <= r
        });
    }
}

fn segment_distance(q: Vec3, a: Vec3, b: Vec3) -> f64 {
    let ab = b - a;
    let t = ((q - a).dot(ab) / ab.norm_squared().max(1e-12)).clamp(0.0, 1.0);
    q.distance(a + ab * t)
}

/// Full-height walls normal to x with `openings` straight gaps of `width`
/// each, at least `min_sep_cells` of wall between neighbouring gaps.
fn walls_with_openings(
    grid: &mut OccupancyGrid,
    spec: &EnvSpec,
    thickness: f64,
    openings: usize,
    width: f64,
    min_sep_cells: usize,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let res = spec.resolution;
    let ny = grid.dims()[1];
    let nz = grid.dims()[2];
    let w_cells = ((width / res).round() as usize).max(1);
    let t_cells = ((thickness / res).round() as usize).max(1);
    let margin = min_sep_cells;
    if openings * (w_cells + min_sep_cells) + 2 * margin > ny {
        return Err(Error::Config("openings do not fit in the wall"));
    }
    for xc in spec.wall_centers() {
        let x0 = ((xc / res).round() as i64 - (t_cells / 2) as i64).max(0);
        let mut starts: Vec<usize> = Vec::with_capacity(openings);
        let mut attempts = 0;
        while starts.len() < openings {
            attempts += 1;
            if attempts > 100_000 {
                return Err(Error::Config("could not place openings"));
            }
            let s = margin + rng.random_range(0..=(ny - 2 * margin - w_cells));
            let clash = starts.iter().any(|&o| s < o + w_cells + min_sep_cells && o < s + w_cells + min_sep_cells);
            if !clash {
                starts.push(s);
            }
        }
        for x in x0..x0 + t_cells as i64 {
            for z in 0..nz as i64 {
                for y in 0..ny {
                    let open = starts.iter().any(|&s| y >= s && y < s + w_cells);
                    grid.set_cell([x, y as i64, z], !open);
                }
            }
        }
    }
    Ok(())
}
