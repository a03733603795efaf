//! Piecewise polynomial trajectories and their analysis.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{self, Coeffs, NCOEF};
use crate::vec3::Vec3;

/// Absolute tolerance used for knot continuity checks.
pub const CONTINUITY_TOL: f64 = 1e-6;

/// Position, velocity and acceleration of the flat outputs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FlatState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
}

impl FlatState {
    pub const fn new(position: Vec3, velocity: Vec3, acceleration: Vec3) -> Self {
        FlatState { position, velocity, acceleration }
    }

    /// Zero velocity and acceleration at `position`.
    pub const fn rest(position: Vec3) -> Self {
        FlatState { position, velocity: Vec3::ZERO, acceleration: Vec3::ZERO }
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite() && self.velocity.is_finite() && self.acceleration.is_finite()
    }

    pub fn within_limits(&self, limits: &Limits) -> bool {
        self.velocity.norm_inf() <= limits.v_max + 1e-9
            && self.acceleration.norm_inf() <= limits.a_max + 1e-9
    }

    /// Largest per-component absolute difference.
    pub fn max_abs_diff(&self, o: &FlatState) -> f64 {
        (self.position - o.position)
            .norm_inf()
            .max((self.velocity - o.velocity).norm_inf())
            .max((self.acceleration - o.acceleration).norm_inf())
    }

    /// Derivative of the given order (0 = position).
    pub fn derivative(&self, order: usize) -> Vec3 {
        match order {
            0 => self.position,
            1 => self.velocity,
            _ => self.acceleration,
        }
    }
}

/// Per-axis derivative bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub v_max: f64,
    pub a_max: f64,
    pub j_max: f64,
}

impl Limits {
    pub fn new(v_max: f64, a_max: f64, j_max: f64) -> Result<Self> {
        let l = Limits { v_max, a_max, j_max };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        if self.v_max > 0.0 && self.a_max > 0.0 && self.j_max > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument("limits must be strictly positive"))
        }
    }

    /// Bound for derivative `order` (1 = velocity … 3 = jerk).
    pub fn bound(&self, order: usize) -> f64 {
        match order {
            1 => self.v_max,
            2 => self.a_max,
            3 => self.j_max,
            _ => f64::INFINITY,
        }
    }
}

impl Default for Limits {
    /// 7 m/s, 5 m/s², 15 m/s³.
    fn default() -> Self {
        Limits { v_max: 7.0, a_max: 5.0, j_max: 15.0 }
    }
}

/// Time weight and the three QP term weights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub rho: f64,
    pub lambda_s: f64,
    pub lambda_r: f64,
    pub lambda_c: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights { rho: 100.0, lambda_s: 0.02, lambda_r: 1.0, lambda_c: 3.0 }
    }
}

/// One polynomial piece: per-axis coefficients over local time `[0, duration]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "SegmentRecord", try_from = "SegmentRecord")]
pub struct PolySegment {
    pub coeffs: [Coeffs; 3],
    pub duration: f64,
}

#[derive(Serialize, Deserialize)]
struct SegmentRecord {
    duration: f64,
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
}

impl From<PolySegment> for SegmentRecord {
    fn from(s: PolySegment) -> Self {
        SegmentRecord {
            duration: s.duration,
            x: s.coeffs[0].to_vec(),
            y: s.coeffs[1].to_vec(),
            z: s.coeffs[2].to_vec(),
        }
    }
}

impl TryFrom<SegmentRecord> for PolySegment {
    type Error = &'static str;
    fn try_from(r: SegmentRecord) -> core::result::Result<Self, Self::Error> {
        let axis = |v: &[f64]| -> core::result::Result<Coeffs, &'static str> {
            if v.len() > NCOEF {
                return Err("polynomial degree above 5");
            }
            let mut c = [0.0; NCOEF];
            c[..v.len()].copy_from_slice(v);
            Ok(c)
        };
        let seg = PolySegment { coeffs: [axis(&r.x)?, axis(&r.y)?, axis(&r.z)?], duration: r.duration };
        if !(seg.duration > 0.0) || seg.coeffs.iter().flatten().any(|c| !c.is_finite()) {
            return Err("segment must have positive duration and finite coefficients");
        }
        Ok(seg)
    }
}

impl PolySegment {
    pub fn new(coeffs: [Coeffs; 3], duration: f64) -> Self {
        PolySegment { coeffs, duration }
    }

    /// Constant polynomial holding `p` for `duration`.
    pub fn hold(p: Vec3, duration: f64) -> Self {
        let mut coeffs = [[0.0; NCOEF]; 3];
        for (axis, c) in coeffs.iter_mut().enumerate() {
            c[0] = p[axis];
        }
        PolySegment { coeffs, duration }
    }

    /// Highest power with a nonzero coefficient on any axis.
    pub fn degree(&self) -> usize {
        (0..NCOEF)
            .rev()
            .find(|&i| self.coeffs.iter().any(|c| c[i] != 0.0))
            .unwrap_or(0)
    }

    pub fn eval(&self, t: f64, order: usize) -> Vec3 {
        Vec3::new(
            poly::eval_derivative(&self.coeffs[0], t, order),
            poly::eval_derivative(&self.coeffs[1], t, order),
            poly::eval_derivative(&self.coeffs[2], t, order),
        )
    }

    pub fn state_at(&self, t: f64) -> FlatState {
        FlatState::new(self.eval(t, 0), self.eval(t, 1), self.eval(t, 2))
    }

    pub fn start_state(&self) -> FlatState {
        self.state_at(0.0)
    }

    pub fn end_state(&self) -> FlatState {
        self.state_at(self.duration)
    }

    /// The piece over local `[s, s + duration]` re-expanded about `s`.
    pub fn sub_segment(&self, s: f64, duration: f64) -> PolySegment {
        PolySegment {
            coeffs: [
                poly::taylor_shift(&self.coeffs[0], s),
                poly::taylor_shift(&self.coeffs[1], s),
                poly::taylor_shift(&self.coeffs[2], s),
            ],
            duration,
        }
    }

    /// Same path traversed `scale` times slower.
    pub fn time_scaled(&self, scale: f64) -> PolySegment {
        PolySegment {
            coeffs: [
                poly::time_scale(&self.coeffs[0], scale),
                poly::time_scale(&self.coeffs[1], scale),
                poly::time_scale(&self.coeffs[2], scale),
            ],
            duration: self.duration * scale,
        }
    }

    /// `∫₀ᵀ ‖jerk‖² dt`, exact.
    pub fn jerk_energy(&self) -> f64 {
        let g = poly::monomial_gram(3, 0.0, self.duration);
        self.coeffs.iter().map(|c| poly::quad_form(&g, c)).sum()
    }

    /// Supremum of the per-axis absolute derivative of `order` over the segment.
    pub fn derivative_extremum(&self, order: usize) -> f64 {
        let mut best: f64 = 0.0;
        for c in &self.coeffs {
            let d = poly::derivative(c, order);
            let dd = poly::derivative(&d, 1);
            let mut consider = |t: f64| best = best.max(poly::eval(&d, t).abs());
            consider(0.0);
            consider(self.duration);
            for r in poly::real_roots(&dd, 0.0, self.duration) {
                consider(r);
            }
        }
        best
    }

    fn speed(&self, t: f64) -> f64 {
        self.eval(t, 1).norm()
    }
}

/// Ordered polynomial segments joined with C² continuity.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseTrajectory {
    pub segments: Vec<PolySegment>,
    #[serde(default)]
    pub start_time: f64,
}

impl PiecewiseTrajectory {
    pub fn new(segments: Vec<PolySegment>) -> Self {
        PiecewiseTrajectory { segments, start_time: 0.0 }
    }

    pub fn from_segment(seg: PolySegment) -> Self {
        PiecewiseTrajectory::new(alloc::vec![seg])
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn durations(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.duration).collect()
    }

    /// Global start time of every segment plus the final time.
    pub fn knot_times(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        let mut acc = 0.0;
        out.push(acc);
        for s in &self.segments {
            acc += s.duration;
            out.push(acc);
        }
        out
    }

    /// Segment index and local time for `t ∈ [0, T]` (clamped).
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let mut acc = 0.0;
        let last = self.segments.len() - 1;
        for (i, s) in self.segments.iter().enumerate() {
            if t < acc + s.duration || i == last {
                return (i, (t - acc).clamp(0.0, s.duration));
            }
            acc += s.duration;
        }
        (last, self.segments[last].duration)
    }

    /// Derivative of `order` (0..=3) at `t`.
    pub fn evaluate(&self, t: f64, order: usize) -> Result<Vec3> {
        if order > 3 {
            return Err(Error::InvalidOrder(order));
        }
        let duration = self.duration();
        if self.segments.is_empty() || !(t >= -1e-12 && t <= duration + 1e-9 * (1.0 + duration)) {
            return Err(Error::TimeOutOfRange { t, duration });
        }
        let (i, lt) = self.locate(t);
        Ok(self.segments[i].eval(lt, order))
    }

    /// Position at `t`, clamped into range.
    pub fn position(&self, t: f64) -> Vec3 {
        let (i, lt) = self.locate(t);
        self.segments[i].eval(lt, 0)
    }

    pub fn state_at(&self, t: f64) -> FlatState {
        let (i, lt) = self.locate(t);
        self.segments[i].state_at(lt)
    }

    pub fn start_state(&self) -> FlatState {
        self.segments[0].start_state()
    }

    pub fn end_state(&self) -> FlatState {
        self.segments[self.segments.len() - 1].end_state()
    }

    /// Appends `other`'s segments.
    pub fn append(&mut self, other: &PiecewiseTrajectory) {
        self.segments.extend_from_slice(&other.segments);
    }

    /// Largest position/velocity/acceleration jump across interior knots.
    pub fn max_knot_discontinuity(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|w| w[0].end_state().max_abs_diff(&w[1].start_state()))
            .fold(0.0, f64::max)
    }

    pub fn is_c2_continuous(&self) -> bool {
        self.max_knot_discontinuity() <= CONTINUITY_TOL
    }

    /// `ρ·T + ½ Σ ∫ ‖jerk‖² dt`, exact.
    pub fn cost_time_energy(&self, rho: f64) -> f64 {
        rho * self.duration() + 0.5 * self.jerk_integral()
    }

    /// `∫ ‖jerk‖² dt` over the whole trajectory.
    pub fn jerk_integral(&self) -> f64 {
        self.segments.iter().map(PolySegment::jerk_energy).sum()
    }

    /// Maximum per-axis absolute derivative of `order` (1..=3) over `[0, T]`.
    pub fn derivative_extrema(&self, order: usize) -> f64 {
        self.segments
            .iter()
            .map(|s| s.derivative_extremum(order))
            .fold(0.0, f64::max)
    }

    /// Whether velocity, acceleration and jerk stay within `limits` (+`slack`).
    pub fn within_limits(&self, limits: &Limits, slack: f64) -> bool {
        (1..=3).all(|k| self.derivative_extrema(k) <= limits.bound(k) + slack)
    }

    /// Path length by Gauss–Legendre quadrature of the speed.
    pub fn arc_length(&self) -> f64 {
        const MAX_PANEL: f64 = 0.25;
        let mut total = 0.0;
        for s in &self.segments {
            let panels = ((s.duration / MAX_PANEL).ceil() as usize).max(1);
            let h = s.duration / panels as f64;
            for k in 0..panels {
                let a = k as f64 * h;
                total += poly::gauss_legendre16(|t| s.speed(t), a, a + h);
            }
        }
        total
    }

    /// Same path with every segment slowed by `scale`.
    pub fn time_scaled(&self, scale: f64) -> PiecewiseTrajectory {
        PiecewiseTrajectory {
            segments: self.segments.iter().map(|s| s.time_scaled(scale)).collect(),
            start_time: self.start_time,
        }
    }

    /// Each segment split into pieces no longer than `max_piece`.
    pub fn subdivided(&self, max_piece: f64) -> PiecewiseTrajectory {
        let mut segments = Vec::new();
        for s in &self.segments {
            let j = ((s.duration / max_piece).ceil() as usize).max(1);
            segments.extend(split_uniform(s, j).segments);
        }
        PiecewiseTrajectory { segments, start_time: self.start_time }
    }
}

/// Divides a segment by time into `j ≥ 1` equal pieces of the same degree.
pub fn split_uniform(seg: &PolySegment, j: usize) -> PiecewiseTrajectory {
    let j = j.max(1);
    if j == 1 {
        return PiecewiseTrajectory::from_segment(*seg);
    }
    let h = seg.duration / j as f64;
    PiecewiseTrajectory::new((0..j).map(|k| seg.sub_segment(k as f64 * h, h)).collect())
}
