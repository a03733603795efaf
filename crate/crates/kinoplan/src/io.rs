//! File formats: trajectories (JSON, sampled CSV), run-length encoded grids,
//! TOML scenarios and point-cloud CSV.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use kinoplan_core::{OccupancyGrid, PiecewiseTrajectory, Vec3};
use serde::{Deserialize, Serialize};

use crate::bench::Scenario;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Core(#[from] kinoplan_core::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type IoResult<T> = Result<T, IoError>;

fn read_text(path: &Path) -> IoResult<String> {
    fs::read_to_string(path).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

fn write_text(path: &Path, text: &str) -> IoResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| IoError::File { path: dir.display().to_string(), source })?;
    }
    fs::write(path, text).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

fn parse_error(path: &Path, e: impl std::fmt::Display) -> IoError {
    IoError::Parse { path: path.display().to_string(), message: e.to_string() }
}

pub fn save_trajectory_json(path: &Path, traj: &PiecewiseTrajectory) -> IoResult<()> {
    let text = serde_json::to_string_pretty(traj).map_err(|e| parse_error(path, e))?;
    write_text(path, &text)
}

pub fn load_trajectory_json(path: &Path) -> IoResult<PiecewiseTrajectory> {
    let traj: PiecewiseTrajectory = serde_json::from_str(&read_text(path)?).map_err(|e| parse_error(path, e))?;
    if traj.is_empty() {
        return Err(parse_error(path, "trajectory has no segments"));
    }
    Ok(traj)
}

/// Writes `t, p, v, a, j` rows sampled every `dt` (plus the final time).
pub fn write_trajectory_csv<W: Write>(out: W, traj: &PiecewiseTrajectory, dt: f64) -> IoResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "px", "py", "pz", "vx", "vy", "vz", "ax", "ay", "az", "jx", "jy", "jz"])?;
    let total = traj.duration();
    let n = (total / dt).ceil().max(1.0) as usize;
    for k in 0..=n {
        let t = (k as f64 * dt).min(total);
        let mut row = vec![format!("{t:.6}")];
        for order in 0..4 {
            let d = traj.evaluate(t, order)?;
            row.extend(d.to_array().iter().map(|x| format!("{x:.9}")));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| IoError::File { path: "csv".into(), source })?;
    Ok(())
}

pub fn save_trajectory_csv(path: &Path, traj: &PiecewiseTrajectory, dt: f64) -> IoResult<()> {
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, traj, dt)?;
    write_text(path, &String::from_utf8_lossy(&buf))
}

/// Grid file contents: geometry plus alternating free/occupied run lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFile {
    pub origin: Vec3,
    pub resolution: f64,
    pub dims: [usize; 3],
    /// Radius the occupancy was already inflated by.
    pub inflation: f64,
    pub runs: Vec<usize>,
}

impl GridFile {
    pub fn from_grid(grid: &OccupancyGrid) -> Self {
        GridFile {
            origin: grid.origin(),
            resolution: grid.resolution(),
            dims: grid.dims(),
            inflation: grid.inflation_radius(),
            runs: grid.runs(),
        }
    }

    pub fn to_grid(&self) -> kinoplan_core::Result<OccupancyGrid> {
        let mut g = OccupancyGrid::from_runs(self.origin, self.resolution, self.dims, &self.runs)?;
        g.set_inflation_radius(self.inflation);
        Ok(g)
    }
}

pub fn save_grid(path: &Path, grid: &OccupancyGrid) -> IoResult<()> {
    let text = serde_json::to_string(&GridFile::from_grid(grid)).map_err(|e| parse_error(path, e))?;
    write_text(path, &text)
}

pub fn load_grid(path: &Path) -> IoResult<OccupancyGrid> {
    let file: GridFile = serde_json::from_str(&read_text(path)?).map_err(|e| parse_error(path, e))?;
    Ok(file.to_grid()?)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, String> {
    let s: Scenario = toml::from_str(text).map_err(|e| e.to_string())?;
    s.validate().map_err(|e| e.to_string())?;
    Ok(s)
}

pub fn load_scenario(path: &Path) -> IoResult<Scenario> {
    parse_scenario(&read_text(path)?).map_err(|e| parse_error(path, e))
}

pub fn save_scenario(path: &Path, scenario: &Scenario) -> IoResult<()> {
    let text = toml::to_string_pretty(scenario).map_err(|e| parse_error(path, e))?;
    write_text(path, &text)
}

/// Occupancy from `x,y,z` rows (header optional) over the box
/// `[origin, origin + extents]`, inflated by `inflation`. Points outside the
/// box are ignored.
pub fn grid_from_point_cloud<R: Read>(
    input: R,
    origin: Vec3,
    extents: Vec3,
    resolution: f64,
    inflation: f64,
) -> IoResult<OccupancyGrid> {
    let mut grid = OccupancyGrid::with_extents(origin, extents, resolution)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        let vals: Vec<f64> = rec.iter().take(3).filter_map(|f| f.parse().ok()).collect();
        if vals.len() < 3 {
            if line == 0 {
                continue;
            }
            return Err(IoError::Parse { path: "point cloud".into(), message: format!("row {}: expected x,y,z", line + 1) });
        }
        let c = grid.cell_of(Vec3::new(vals[0], vals[1], vals[2]));
        if grid.in_bounds(c) {
            grid.set_cell(c, true);
        }
    }
    Ok(grid.inflate(inflation))
}

pub fn load_point_cloud(path: &Path, origin: Vec3, extents: Vec3, resolution: f64, inflation: f64) -> IoResult<OccupancyGrid> {
    let file = fs::File::open(path).map_err(|source| IoError::File { path: path.display().to_string(), source })?;
    grid_from_point_cloud(file, origin, extents, resolution, inflation)
}

pub(crate) fn write_file(path: &Path, text: &str) -> IoResult<()> {
    write_text(path, text)
}
