//! Voxel occupancy grid: inflation, trajectory collision reports and a
//! box-restricted 26-connected A*.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::trajectory::PiecewiseTrajectory;
use crate::vec3::Vec3;

/// Signed cell coordinates; anything outside `dims` counts as occupied.
pub type Cell = [i64; 3];

/// Dense 3-D occupancy bitmap.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyGrid {
    origin: Vec3,
    resolution: f64,
    dims: [usize; 3],
    bits: Vec<u64>,
    inflation_radius: f64,
}

impl OccupancyGrid {
    /// All-free grid whose minimum corner is `origin`.
    pub fn new(origin: Vec3, resolution: f64, dims: [usize; 3]) -> Result<Self> {
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(Error::Config("resolution must be positive"));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::Config("grid dimensions must be nonzero"));
        }
        let n = dims[0] * dims[1] * dims[2];
        Ok(OccupancyGrid { origin, resolution, dims, bits: vec![0; n.div_ceil(64)], inflation_radius: 0.0 })
    }

    /// Grid covering `[origin, origin + extents]`.
    pub fn with_extents(origin: Vec3, extents: Vec3, resolution: f64) -> Result<Self> {
        if !(extents.x > 0.0 && extents.y > 0.0 && extents.z > 0.0) {
            return Err(Error::Config("extents must be positive"));
        }
        let dim = |e: f64| ((e / resolution) - 1e-9).ceil().max(1.0) as usize;
        OccupancyGrid::new(origin, resolution, [dim(extents.x), dim(extents.y), dim(extents.z)])
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    /// Radius the occupancy has been dilated by (0 for a raw map).
    pub fn inflation_radius(&self) -> f64 {
        self.inflation_radius
    }

    pub fn set_inflation_radius(&mut self, r: f64) {
        self.inflation_radius = r;
    }

    pub fn cell_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    /// Minimum and maximum world corners.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let d = Vec3::new(self.dims[0] as f64, self.dims[1] as f64, self.dims[2] as f64);
        (self.origin, self.origin + d * self.resolution)
    }

    pub fn linear_index(&self, c: Cell) -> Option<usize> {
        if self.in_bounds(c) {
            Some(c[0] as usize + self.dims[0] * (c[1] as usize + self.dims[1] * c[2] as usize))
        } else {
            None
        }
    }

    pub fn cell_from_index(&self, idx: usize) -> Cell {
        let x = idx % self.dims[0];
        let y = (idx / self.dims[0]) % self.dims[1];
        let z = idx / (self.dims[0] * self.dims[1]);
        [x as i64, y as i64, z as i64]
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        (0..3).all(|k| c[k] >= 0 && (c[k] as usize) < self.dims[k])
    }

    pub fn cell_of(&self, p: Vec3) -> Cell {
        let r = (p - self.origin) / self.resolution;
        [r.x.floor() as i64, r.y.floor() as i64, r.z.floor() as i64]
    }

    pub fn cell_center(&self, c: Cell) -> Vec3 {
        self.origin
            + Vec3::new(c[0] as f64 + 0.5, c[1] as f64 + 0.5, c[2] as f64 + 0.5) * self.resolution
    }

    pub fn is_occupied_index(&self, idx: usize) -> bool {
        self.bits[idx >> 6] >> (idx & 63) & 1 == 1
    }

    pub fn is_occupied_cell(&self, c: Cell) -> bool {
        self.linear_index(c).is_none_or(|i| self.is_occupied_index(i))
    }

    /// Occupancy at a world point; out-of-bounds reports occupied.
    pub fn is_occupied(&self, p: Vec3) -> bool {
        self.is_occupied_cell(self.cell_of(p))
    }

    pub fn set_index(&mut self, idx: usize, occupied: bool) {
        if occupied {
            self.bits[idx >> 6] |= 1 << (idx & 63);
        } else {
            self.bits[idx >> 6] &= !(1 << (idx & 63));
        }
    }

    pub fn set_cell(&mut self, c: Cell, occupied: bool) {
        if let Some(i) = self.linear_index(c) {
            self.set_index(i, occupied);
        }
    }

    pub fn occupied_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Sets every cell whose center satisfies `inside` within the world box.
    pub fn fill_where(&mut self, lo: Vec3, hi: Vec3, occupied: bool, inside: impl Fn(Vec3) -> bool) {
        let a = self.cell_of(lo);
        let b = self.cell_of(hi);
        for z in a[2].max(0)..=b[2].min(self.dims[2] as i64 - 1) {
            for y in a[1].max(0)..=b[1].min(self.dims[1] as i64 - 1) {
                for x in a[0].max(0)..=b[0].min(self.dims[0] as i64 - 1) {
                    let c = [x, y, z];
                    if inside(self.cell_center(c)) {
                        self.set_cell(c, occupied);
                    }
                }
            }
        }
    }

    /// Sets every cell whose center lies in the axis-aligned box `[lo, hi]`.
    pub fn fill_box(&mut self, lo: Vec3, hi: Vec3, occupied: bool) {
        self.fill_where(lo, hi, occupied, |p| {
            p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z
        });
    }

    /// Dilates occupancy: a cell becomes occupied iff some occupied cell
    /// center lies within Euclidean distance `radius` of its center.
    pub fn inflate(&self, radius: f64) -> OccupancyGrid {
        let mut out = self.clone();
        out.inflation_radius = self.inflation_radius + radius.max(0.0);
        if radius <= 0.0 {
            return out;
        }
        let rc = radius / self.resolution + 1e-9;
        let reach = rc.floor() as i64;
        let mut kernel = Vec::new();
        for dz in -reach..=reach {
            for dy in -reach..=reach {
                for dx in -reach..=reach {
                    if ((dx * dx + dy * dy + dz * dz) as f64) <= rc * rc {
                        kernel.push([dx, dy, dz]);
                    }
                }
            }
        }
        let faces: [Cell; 6] = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
        for idx in 0..self.cell_count() {
            if !self.is_occupied_index(idx) {
                continue;
            }
            let c = self.cell_from_index(idx);
            // The nearest occupied cell to any free cell is a surface cell.
            let surface = faces.iter().any(|f| {
                let n = [c[0] + f[0], c[1] + f[1], c[2] + f[2]];
                self.linear_index(n).is_some_and(|i| !self.is_occupied_index(i))
            });
            if !surface {
                continue;
            }
            for k in &kernel {
                out.set_cell([c[0] + k[0], c[1] + k[1], c[2] + k[2]], true);
            }
        }
        out
    }

    /// Run lengths of alternating free/occupied cells in linear index
    /// order, starting with a (possibly empty) free run.
    pub fn runs(&self) -> Vec<usize> {
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0;
        for idx in 0..self.cell_count() {
            let occ = self.is_occupied_index(idx);
            if occ != current {
                runs.push(len);
                current = occ;
                len = 0;
            }
            len += 1;
        }
        runs.push(len);
        runs
    }

    /// Rebuilds occupancy from [`OccupancyGrid::runs`] output.
    pub fn from_runs(origin: Vec3, resolution: f64, dims: [usize; 3], runs: &[usize]) -> Result<Self> {
        let mut g = OccupancyGrid::new(origin, resolution, dims)?;
        if runs.iter().sum::<usize>() != g.cell_count() {
            return Err(Error::Config("run lengths do not cover the grid"));
        }
        let mut idx = 0;
        for (k, &len) in runs.iter().enumerate() {
            if k % 2 == 1 {
                for i in idx..idx + len {
                    g.set_index(i, true);
                }
            }
            idx += len;
        }
        Ok(g)
    }

    /// Default collision-check step: one cell at `v_max`.
    pub fn default_check_dt(&self, v_max: f64) -> f64 {
        self.resolution / v_max
    }
}

/// A maximal run of colliding samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionInterval {
    pub t_start: f64,
    pub t_end: f64,
    pub t_mid: f64,
    /// Position at `t_mid`.
    pub midpoint: Vec3,
    /// Last free sample before the interval.
    pub free_before: Option<(f64, Vec3)>,
    /// First free sample after the interval.
    pub free_after: Option<(f64, Vec3)>,
}

impl CollisionInterval {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CollisionReport {
    pub intervals: Vec<CollisionInterval>,
    /// Number of samples tested.
    pub samples: usize,
}

impl CollisionReport {
    pub fn is_free(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn total_duration(&self) -> f64 {
        self.intervals.iter().map(CollisionInterval::duration).sum()
    }
}

/// Samples `traj` uniformly with step ≤ `dt` and groups colliding samples.
///
/// A free sample also counts as colliding when the chord from the previous
/// free sample crosses an occupied cell, so thin corners between samples are
/// not skipped.
pub fn check_trajectory(traj: &PiecewiseTrajectory, grid: &OccupancyGrid, dt: f64) -> CollisionReport {
    let total = traj.duration();
    if traj.is_empty() {
        return CollisionReport::default();
    }
    let n = ((total / dt).ceil() as usize).max(1);
    let step = total / n as f64;

    let mut intervals = Vec::new();
    let mut seg = 0;
    let mut seg_start = 0.0;
    let mut last_free: Option<(f64, Vec3)> = None;
    let mut open: Option<(f64, f64, Option<(f64, Vec3)>)> = None;
    for k in 0..=n {
        let t = if k == n { total } else { k as f64 * step };
        while seg + 1 < traj.segments.len() && t >= seg_start + traj.segments[seg].duration {
            seg_start += traj.segments[seg].duration;
            seg += 1;
        }
        let local = (t - seg_start).clamp(0.0, traj.segments[seg].duration);
        let p = traj.segments[seg].eval(local, 0);
        let hit = grid.is_occupied(p) || (open.is_none() && last_free.is_some_and(|(_, q)| chord_blocked(grid, q, p)));
        if hit {
            open = Some(match open {
                Some((ts, _, before)) => (ts, t, before),
                None => (t, t, last_free),
            });
        } else {
            if let Some((ts, te, before)) = open.take() {
                intervals.push(make_interval(traj, ts, te, before, Some((t, p))));
            }
            last_free = Some((t, p));
        }
    }
    if let Some((ts, te, before)) = open {
        intervals.push(make_interval(traj, ts, te, before, None));
    }
    CollisionReport { intervals, samples: n + 1 }
}

/// Whether the straight chord `a → b` passes through an occupied cell
/// (voxel traversal, endpoints included).
pub fn chord_blocked(grid: &OccupancyGrid, a: Vec3, b: Vec3) -> bool {
    let mut cell = grid.cell_of(a);
    let end = grid.cell_of(b);
    if cell == end {
        return grid.is_occupied_cell(cell);
    }
    let res = grid.resolution();
    let o = grid.origin();
    let d = b - a;
    let mut step = [0i64; 3];
    let mut t_max = [f64::INFINITY; 3];
    let mut t_delta = [f64::INFINITY; 3];
    for k in 0..3 {
        if d[k] > 0.0 {
            step[k] = 1;
            t_max[k] = (o[k] + (cell[k] + 1) as f64 * res - a[k]) / d[k];
            t_delta[k] = res / d[k];
        } else if d[k] < 0.0 {
            step[k] = -1;
            t_max[k] = (o[k] + cell[k] as f64 * res - a[k]) / d[k];
            t_delta[k] = -res / d[k];
        }
    }
    let budget = (0..3).map(|k| (end[k] - cell[k]).abs()).sum::<i64>() + 1;
    for _ in 0..=budget {
        if grid.is_occupied_cell(cell) {
            return true;
        }
        if cell == end {
            return false;
        }
        let k = if t_max[0] <= t_max[1] && t_max[0] <= t_max[2] {
            0
        } else if t_max[1] <= t_max[2] {
            1
        } else {
            2
        };
        if t_max[k] > 1.0 {
            return grid.is_occupied_cell(end);
        }
        cell[k] += step[k];
        t_max[k] += t_delta[k];
    }
    grid.is_occupied_cell(end)
}

fn make_interval(
    traj: &PiecewiseTrajectory,
    t_start: f64,
    t_end: f64,
    free_before: Option<(f64, Vec3)>,
    free_after: Option<(f64, Vec3)>,
) -> CollisionInterval {
    let t_mid = 0.5 * (t_start + t_end);
    CollisionInterval { t_start, t_end, t_mid, midpoint: traj.position(t_mid), free_before, free_after }
}

/// Axis-aligned world-space search box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundBox {
    pub min: Vec3,
    pub max: Vec3,
}

impl BoundBox {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        BoundBox { min, max }
    }

    /// Smallest box holding all `points`, padded by `pad` on every side.
    pub fn around(points: &[Vec3], pad: f64) -> Self {
        let mut min = points[0];
        let mut max = points[0];
        for p in &points[1..] {
            min = min.component_min(*p);
            max = max.component_max(*p);
        }
        BoundBox { min: min - Vec3::splat(pad), max: max + Vec3::splat(pad) }
    }

    pub fn contains(&self, p: Vec3) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }
}

/// A* path plus the number of node expansions performed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AstarResult {
    pub path: Vec<Vec3>,
    pub expansions: usize,
}

#[derive(PartialEq)]
struct Open {
    f: f64,
    idx: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, o: &Self) -> Ordering {
        o.f.total_cmp(&self.f).then_with(|| o.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Collision-free cell-center path from `start` to `goal` inside `bounds`.
///
/// Returns an empty path when no path exists. An occupied start or goal is
/// snapped to the nearest free cell within three cells.
pub fn local_astar(grid: &OccupancyGrid, start: Vec3, goal: Vec3, bounds: BoundBox) -> Vec<Vec3> {
    local_astar_with_stats(grid, start, goal, bounds).path
}

pub fn local_astar_with_stats(grid: &OccupancyGrid, start: Vec3, goal: Vec3, bounds: BoundBox) -> AstarResult {
    let lo = clamp_cell(grid, grid.cell_of(bounds.min));
    let hi = clamp_cell(grid, grid.cell_of(bounds.max));
    let ext = [
        (hi[0] - lo[0] + 1) as usize,
        (hi[1] - lo[1] + 1) as usize,
        (hi[2] - lo[2] + 1) as usize,
    ];
    let inside = |c: Cell| (0..3).all(|k| c[k] >= lo[k] && c[k] <= hi[k]);
    let local = |c: Cell| {
        (c[0] - lo[0]) as usize + ext[0] * ((c[1] - lo[1]) as usize + ext[1] * (c[2] - lo[2]) as usize)
    };
    let from_local = |i: usize| -> Cell {
        [
            lo[0] + (i % ext[0]) as i64,
            lo[1] + ((i / ext[0]) % ext[1]) as i64,
            lo[2] + (i / (ext[0] * ext[1])) as i64,
        ]
    };
    let free = |c: Cell| inside(c) && !grid.is_occupied_cell(c);

    let (Some(s), Some(g)) = (snap_free(grid.cell_of(start), &free), snap_free(grid.cell_of(goal), &free))
    else {
        return AstarResult::default();
    };
    if s == g {
        return AstarResult { path: vec![grid.cell_center(s)], expansions: 0 };
    }

    let res = grid.resolution();
    let h = |c: Cell| {
        let d = [(c[0] - g[0]) as f64, (c[1] - g[1]) as f64, (c[2] - g[2]) as f64];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt() * res
    };
    let n = ext[0] * ext[1] * ext[2];
    let mut gcost = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let si = local(s);
    gcost[si] = 0.0;
    heap.push(Open { f: h(s), idx: si });
    let mut expansions = 0;
    let gi = local(g);

    while let Some(Open { idx, .. }) = heap.pop() {
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        if idx == gi {
            break;
        }
        expansions += 1;
        let c = from_local(idx);
        for dz in -1i64..=1 {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 && dz == 0 {
                        continue;
                    }
                    let nb = [c[0] + dx, c[1] + dy, c[2] + dz];
                    if !free(nb) {
                        continue;
                    }
                    let ni = local(nb);
                    if closed[ni] {
                        continue;
                    }
                    let step = ((dx * dx + dy * dy + dz * dz) as f64).sqrt() * res;
                    let ng = gcost[idx] + step;
                    if ng < gcost[ni] {
                        gcost[ni] = ng;
                        parent[ni] = idx;
                        heap.push(Open { f: ng + h(nb), idx: ni });
                    }
                }
            }
        }
    }
    if !closed[gi] {
        return AstarResult { path: Vec::new(), expansions };
    }
    let mut path = Vec::new();
    let mut cur = gi;
    while cur != usize::MAX {
        path.push(grid.cell_center(from_local(cur)));
        cur = parent[cur];
    }
    path.reverse();
    AstarResult { path, expansions }
}

fn clamp_cell(grid: &OccupancyGrid, c: Cell) -> Cell {
    let d = grid.dims();
    [
        c[0].clamp(0, d[0] as i64 - 1),
        c[1].clamp(0, d[1] as i64 - 1),
        c[2].clamp(0, d[2] as i64 - 1),
    ]
}

fn snap_free(c: Cell, free: &impl Fn(Cell) -> bool) -> Option<Cell> {
    if free(c) {
        return Some(c);
    }
    let mut best: Option<(i64, Cell)> = None;
    for dz in -3i64..=3 {
        for dy in -3i64..=3 {
            for dx in -3i64..=3 {
                let n = [c[0] + dx, c[1] + dy, c[2] + dz];
                let d2 = dx * dx + dy * dy + dz * dz;
                if d2 <= 9 && free(n) && best.is_none_or(|(bd, _)| d2 < bd) {
                    best = Some((d2, n));
                }
            }
        }
    }
    best.map(|(_, c)| c)
}

/// Total Euclidean length of a polyline.
pub fn path_length(path: &[Vec3]) -> f64 {
    path.windows(2).map(|w| w[0].distance(w[1])).sum()
}
