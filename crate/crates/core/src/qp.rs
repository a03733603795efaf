//! Weighted smoothness / resemblance / collision objective over a divided
//! polynomial trajectory and its closed-form equality-constrained minimizer.
//!
//! Per axis the objective is `cᵀQc − 2cᵀq + k` with
//! `Q = λs·Qs + λr·Qr + λc·Σ Qc,ap` and `q = λr·Qr·c* + λc·Σ Qc,ap·c_ap`.
//! Coefficients of each quintic piece are mapped one-to-one onto the
//! position/velocity/acceleration at its two knots. Endpoint states (and any
//! pinned waypoints) are fixed, the remaining knot derivatives are shared by
//! neighbouring pieces, so continuity holds by construction and the problem
//! reduces to one symmetric positive-definite solve in the free derivatives.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Matrix6, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{self, Coeffs, NCOEF};
use crate::trajectory::{CostWeights, FlatState, PiecewiseTrajectory, PolySegment};
use crate::vec3::Vec3;

/// Part of an attractor's window that falls inside one piece (local time).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentWindow {
    pub segment: usize,
    pub t_start: f64,
    pub t_end: f64,
}

/// Constant target position pulling the trajectory during a time window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttractingPoint {
    pub position: Vec3,
    /// Global window `(t_s, t_e)`.
    pub window: (f64, f64),
    pub segments: Vec<SegmentWindow>,
}

impl AttractingPoint {
    /// Attractor over `window` (clipped to the trajectory) for pieces of `durations`.
    pub fn new(position: Vec3, window: (f64, f64), durations: &[f64]) -> Result<Self> {
        let mut ap = AttractingPoint { position, window, segments: Vec::new() };
        ap.rewindow(durations)?;
        Ok(ap)
    }

    /// Recomputes the per-piece sub-windows after durations change.
    pub fn rewindow(&mut self, durations: &[f64]) -> Result<()> {
        let total: f64 = durations.iter().sum();
        let ts = self.window.0.max(0.0);
        let te = self.window.1.min(total);
        if !(ts < te) {
            return Err(Error::InvalidArgument("attractor window must be non-empty inside [0, T]"));
        }
        self.window = (ts, te);
        self.segments.clear();
        let mut start = 0.0;
        for (i, &d) in durations.iter().enumerate() {
            let end = start + d;
            let a = ts.max(start);
            let b = te.min(end);
            if b > a {
                self.segments.push(SegmentWindow {
                    segment: i,
                    t_start: (a - start).clamp(0.0, d),
                    t_end: (b - start).clamp(0.0, d),
                });
            }
            start = end;
        }
        Ok(())
    }

    /// Coefficient vector of the constant position on one axis.
    pub fn coeffs(&self, axis: usize) -> Coeffs {
        let mut c = [0.0; NCOEF];
        c[0] = self.position[axis];
        c
    }
}

/// One QP instance shared by all three axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QpProblem {
    pub durations: Vec<f64>,
    pub weights: CostWeights,
    /// Reference pieces `c*` (the divided original trajectory).
    pub reference: Vec<PolySegment>,
    pub attractors: Vec<AttractingPoint>,
    pub start: FlatState,
    pub end: FlatState,
    /// Optional pinned position per internal knot (`durations.len() - 1` entries).
    #[serde(default)]
    pub waypoints: Vec<Option<Vec3>>,
}

impl QpProblem {
    /// Problem whose reference is `reference` with its own time allocation
    /// and endpoint states.
    pub fn from_reference(reference: &PiecewiseTrajectory, weights: CostWeights) -> Self {
        QpProblem {
            durations: reference.durations(),
            weights,
            reference: reference.segments.clone(),
            attractors: Vec::new(),
            start: reference.start_state(),
            end: reference.end_state(),
            waypoints: vec![None; reference.segments.len().saturating_sub(1)],
        }
    }

    pub fn segment_count(&self) -> usize {
        self.durations.len()
    }

    pub fn validate(&self) -> Result<()> {
        let j = self.durations.len();
        if j == 0 || self.reference.len() != j {
            return Err(Error::InvalidArgument("reference must have one piece per duration"));
        }
        if !self.waypoints.is_empty() && self.waypoints.len() != j - 1 {
            return Err(Error::InvalidArgument("waypoints must have one entry per internal knot"));
        }
        for (i, &d) in self.durations.iter().enumerate() {
            if !(d > 1e-9) || !d.is_finite() {
                return Err(Error::SingularSegment { segment: i });
            }
        }
        let w = &self.weights;
        if w.lambda_s < 0.0 || w.lambda_r < 0.0 || w.lambda_c < 0.0 {
            return Err(Error::InvalidArgument("weights must be nonnegative"));
        }
        if w.lambda_s == 0.0 && w.lambda_r == 0.0 && (w.lambda_c == 0.0 || self.attractors.is_empty()) {
            return Err(Error::Degenerate("all objective weights are zero"));
        }
        Ok(())
    }

    fn waypoint(&self, knot: usize) -> Option<Vec3> {
        self.waypoints.get(knot.wrapping_sub(1)).copied().flatten()
    }
}

/// Closed-form optimum.
#[derive(Clone, Debug, PartialEq)]
pub struct QpSolution {
    pub trajectory: PiecewiseTrajectory,
    /// Objective summed over axes.
    pub objective_value: f64,
    pub axis_objective: [f64; 3],
}

/// Block-diagonal Gram matrix: block `i` is `∫ Dᵏt · (Dᵏt)ᵀ dt` over `windows[i]`.
pub fn gram_matrix(durations: &[f64], order: usize, windows: &[(f64, f64)]) -> DMatrix<f64> {
    let j = durations.len();
    let mut m = DMatrix::zeros(NCOEF * j, NCOEF * j);
    for (i, &(ts, te)) in windows.iter().enumerate().take(j) {
        let g = poly::monomial_gram(order, ts, te);
        for a in 0..NCOEF {
            for b in 0..NCOEF {
                m[(NCOEF * i + a, NCOEF * i + b)] = g[a][b];
            }
        }
    }
    m
}

/// Dense per-axis quadratic data: objective `cᵀQc − 2cᵀq + constant`.
#[derive(Clone, Debug, PartialEq)]
pub struct Assembled {
    pub q: DMatrix<f64>,
    pub lin: [DVector<f64>; 3],
    pub constant: [f64; 3],
}

fn full_windows(durations: &[f64]) -> Vec<(f64, f64)> {
    durations.iter().map(|&d| (0.0, d)).collect()
}

fn stack(pieces: &[PolySegment], axis: usize) -> DVector<f64> {
    DVector::from_iterator(NCOEF * pieces.len(), pieces.iter().flat_map(|s| s.coeffs[axis]))
}

/// Assembles `Q`, `q` and the constant term as dense matrices.
pub fn assemble(problem: &QpProblem) -> Result<Assembled> {
    problem.validate()?;
    let d = &problem.durations;
    let j = d.len();
    let w = problem.weights;
    let qs = gram_matrix(d, 3, &full_windows(d));
    let qr = gram_matrix(d, 0, &full_windows(d));
    let mut q = &qs * w.lambda_s + &qr * w.lambda_r;
    let ap_grams: Vec<DMatrix<f64>> = problem
        .attractors
        .iter()
        .map(|ap| {
            let mut win = vec![(0.0, 0.0); j];
            for sw in &ap.segments {
                win[sw.segment] = (sw.t_start, sw.t_end);
            }
            gram_matrix(d, 0, &win)
        })
        .collect();
    for g in &ap_grams {
        q += g * w.lambda_c;
    }
    let mut lin = [DVector::zeros(NCOEF * j), DVector::zeros(NCOEF * j), DVector::zeros(NCOEF * j)];
    let mut constant = [0.0; 3];
    for axis in 0..3 {
        let cref = stack(&problem.reference, axis);
        let qr_c = &qr * &cref;
        lin[axis] += &qr_c * w.lambda_r;
        constant[axis] += w.lambda_r * cref.dot(&qr_c);
        for (ap, g) in problem.attractors.iter().zip(&ap_grams) {
            let cap = DVector::from_iterator(NCOEF * j, (0..j).flat_map(|_| ap.coeffs(axis)));
            let g_c = g * &cap;
            lin[axis] += &g_c * w.lambda_c;
            constant[axis] += w.lambda_c * cap.dot(&g_c);
        }
    }
    Ok(Assembled { q, lin, constant })
}

/// Direct evaluation of the weighted objective for the given pieces.
pub fn objective(problem: &QpProblem, pieces: &[PolySegment]) -> [f64; 3] {
    let w = problem.weights;
    let mut out = [0.0; 3];
    for (axis, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (i, seg) in pieces.iter().enumerate() {
            let t = problem.durations[i];
            let c = &seg.coeffs[axis];
            acc += w.lambda_s * poly::quad_form(&poly::monomial_gram(3, 0.0, t), c);
            let diff = sub(c, &problem.reference[i].coeffs[axis]);
            acc += w.lambda_r * poly::quad_form(&poly::monomial_gram(0, 0.0, t), &diff);
        }
        for ap in &problem.attractors {
            for sw in &ap.segments {
                let diff = sub(&pieces[sw.segment].coeffs[axis], &ap.coeffs(axis));
                acc += w.lambda_c * poly::quad_form(&poly::monomial_gram(0, sw.t_start, sw.t_end), &diff);
            }
        }
        *o = acc;
    }
    out
}

fn sub(a: &Coeffs, b: &Coeffs) -> Coeffs {
    let mut o = [0.0; NCOEF];
    for k in 0..NCOEF {
        o[k] = a[k] - b[k];
    }
    o
}

/// Maps `[p0, v0, a0, p1, v1, a1]` to quintic coefficients over duration `t`.
pub fn boundary_inverse(t: f64) -> Matrix6<f64> {
    let (t2, t3) = (t * t, t * t * t);
    let (t4, t5) = (t3 * t, t3 * t2);
    #[rustfmt::skip]
    let m = Matrix6::new(
        1.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.5, 0.0, 0.0, 0.0,
        -10.0 / t3, -6.0 / t2, -1.5 / t, 10.0 / t3, -4.0 / t2, 0.5 / t,
        15.0 / t4, 8.0 / t3, 1.5 / t2, -15.0 / t4, 7.0 / t3, -1.0 / t2,
        -6.0 / t5, -3.0 / t4, -0.5 / t3, 6.0 / t5, -3.0 / t4, 0.5 / t3,
    );
    m
}

fn block6(g: &[[f64; NCOEF]; NCOEF]) -> Matrix6<f64> {
    Matrix6::from_fn(|a, b| g[a][b])
}

fn vec6(c: &Coeffs) -> Vector6<f64> {
    Vector6::from_column_slice(c)
}

/// The problem expressed in knot derivatives, split into fixed and free parts.
#[derive(Clone, Debug)]
pub struct ReducedProblem {
    /// Knot-space Hessian `R`.
    pub r: DMatrix<f64>,
    /// Knot-space linear terms `g` per axis.
    pub g: [DVector<f64>; 3],
    pub constant: [f64; 3],
    /// Fixed knot-derivative indices and values per axis.
    pub fixed: Vec<usize>,
    pub fixed_values: [DVector<f64>; 3],
    pub free: Vec<usize>,
    inverses: Vec<Matrix6<f64>>,
    durations: Vec<f64>,
}

impl ReducedProblem {
    pub fn new(problem: &QpProblem) -> Result<Self> {
        problem.validate()?;
        let j = problem.durations.len();
        let n = 3 * (j + 1);
        let w = problem.weights;
        let mut r = DMatrix::zeros(n, n);
        let mut g = [DVector::zeros(n), DVector::zeros(n), DVector::zeros(n)];
        let mut constant = [0.0; 3];
        let mut inverses = Vec::with_capacity(j);

        // attractor sub-windows grouped by piece
        let mut by_piece: Vec<Vec<(usize, SegmentWindow)>> = vec![Vec::new(); j];
        for (k, ap) in problem.attractors.iter().enumerate() {
            for sw in &ap.segments {
                by_piece[sw.segment].push((k, *sw));
            }
        }

        for (i, &t) in problem.durations.iter().enumerate() {
            let minv = boundary_inverse(t);
            let gs = block6(&poly::monomial_gram(3, 0.0, t));
            let gr = block6(&poly::monomial_gram(0, 0.0, t));
            let mut h = gs * w.lambda_s + gr * w.lambda_r;
            let gcs: Vec<(usize, Matrix6<f64>)> = by_piece[i]
                .iter()
                .map(|(k, sw)| (*k, block6(&poly::monomial_gram(0, sw.t_start, sw.t_end))))
                .collect();
            for (_, gc) in &gcs {
                h += gc * w.lambda_c;
            }
            let b = minv.transpose() * h * minv;
            let o = 3 * i;
            for a in 0..6 {
                for c in 0..6 {
                    r[(o + a, o + c)] += b[(a, c)];
                }
            }
            for axis in 0..3 {
                let cref = vec6(&problem.reference[i].coeffs[axis]);
                let gr_c = gr * cref;
                let mut l = gr_c * w.lambda_r;
                constant[axis] += w.lambda_r * cref.dot(&gr_c);
                for (k, gc) in &gcs {
                    let cap = vec6(&problem.attractors[*k].coeffs(axis));
                    let gc_c = gc * cap;
                    l += gc_c * w.lambda_c;
                    constant[axis] += w.lambda_c * cap.dot(&gc_c);
                }
                let gl = minv.transpose() * l;
                for a in 0..6 {
                    g[axis][o + a] += gl[a];
                }
            }
            inverses.push(minv);
        }

        let mut fixed = Vec::new();
        let mut free = Vec::new();
        let mut fixed_vals: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for knot in 0..=j {
            for order in 0..3 {
                let idx = 3 * knot + order;
                let value = if knot == 0 {
                    Some(problem.start.derivative(order))
                } else if knot == j {
                    Some(problem.end.derivative(order))
                } else if order == 0 {
                    problem.waypoint(knot)
                } else {
                    None
                };
                match value {
                    Some(v) => {
                        fixed.push(idx);
                        for axis in 0..3 {
                            fixed_vals[axis].push(v[axis]);
                        }
                    }
                    None => free.push(idx),
                }
            }
        }
        let [fx, fy, fz] = fixed_vals;
        Ok(ReducedProblem {
            r,
            g,
            constant,
            fixed,
            fixed_values: [DVector::from_vec(fx), DVector::from_vec(fy), DVector::from_vec(fz)],
            free,
            inverses,
            durations: problem.durations.clone(),
        })
    }

    pub fn free_dimension(&self) -> usize {
        self.free.len()
    }

    fn sub_matrix(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |a, b| self.r[(rows[a], cols[b])])
    }

    /// Reduced Hessian `R_PP`.
    pub fn hessian(&self) -> DMatrix<f64> {
        self.sub_matrix(&self.free, &self.free)
    }

    /// Right-hand side `g_P − R_PF d_F` of the stationarity system.
    pub fn rhs(&self, axis: usize) -> DVector<f64> {
        let gp = DVector::from_iterator(self.free.len(), self.free.iter().map(|&i| self.g[axis][i]));
        gp - self.sub_matrix(&self.free, &self.fixed) * &self.fixed_values[axis]
    }

    fn full_vector(&self, axis: usize, free_values: &DVector<f64>) -> DVector<f64> {
        let mut d = DVector::zeros(self.r.nrows());
        for (k, &i) in self.fixed.iter().enumerate() {
            d[i] = self.fixed_values[axis][k];
        }
        for (k, &i) in self.free.iter().enumerate() {
            d[i] = free_values[k];
        }
        d
    }

    /// Objective as a function of the free derivatives on one axis.
    pub fn objective(&self, axis: usize, free_values: &DVector<f64>) -> f64 {
        let d = self.full_vector(axis, free_values);
        d.dot(&(&self.r * &d)) - 2.0 * d.dot(&self.g[axis]) + self.constant[axis]
    }

    /// Gradient of [`ReducedProblem::objective`].
    pub fn gradient(&self, axis: usize, free_values: &DVector<f64>) -> DVector<f64> {
        (self.hessian() * free_values - self.rhs(axis)) * 2.0
    }

    /// Minimizers of all three axes.
    pub fn solve(&self) -> Result<[DVector<f64>; 3]> {
        if self.free.is_empty() {
            return Ok([DVector::zeros(0), DVector::zeros(0), DVector::zeros(0)]);
        }
        let chol = Cholesky::<f64, Dyn>::new(self.hessian()).ok_or(Error::NotPositiveDefinite)?;
        Ok([chol.solve(&self.rhs(0)), chol.solve(&self.rhs(1)), chol.solve(&self.rhs(2))])
    }

    /// Pieces for given free derivatives.
    pub fn pieces(&self, free_values: &[DVector<f64>; 3]) -> Vec<PolySegment> {
        let full = [
            self.full_vector(0, &free_values[0]),
            self.full_vector(1, &free_values[1]),
            self.full_vector(2, &free_values[2]),
        ];
        self.inverses
            .iter()
            .enumerate()
            .map(|(i, minv)| {
                let mut coeffs = [[0.0; NCOEF]; 3];
                for axis in 0..3 {
                    let d = Vector6::from_fn(|a, _| full[axis][3 * i + a]);
                    let c = minv * d;
                    coeffs[axis].copy_from_slice(c.as_slice());
                }
                PolySegment::new(coeffs, self.durations[i])
            })
            .collect()
    }
}

/// Minimizes the objective subject to fixed endpoint states, pinned
/// waypoints and C² continuity at every internal knot.
pub fn solve_closed_form(problem: &QpProblem) -> Result<QpSolution> {
    let reduced = ReducedProblem::new(problem)?;
    let free = reduced.solve()?;
    let mut axis_objective = [0.0; 3];
    for (axis, o) in axis_objective.iter_mut().enumerate() {
        *o = reduced.objective(axis, &free[axis]);
    }
    let trajectory = PiecewiseTrajectory::new(reduced.pieces(&free));
    Ok(QpSolution { trajectory, objective_value: axis_objective.iter().sum(), axis_objective })
}

/// Linear constraints `A c = d` on the stacked coefficients of one axis:
/// start state, end state, C² continuity at internal knots and pinned
/// waypoints. `d` is returned per axis.
pub fn constraint_system(problem: &QpProblem) -> (DMatrix<f64>, [DVector<f64>; 3]) {
    let d = &problem.durations;
    let j = d.len();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut rhs: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let term = |piece: usize, t: f64, order: usize, sign: f64| -> Vec<(usize, f64)> {
        (0..NCOEF)
            .map(|m| {
                let mut basis = [0.0; NCOEF];
                basis[m] = 1.0;
                (NCOEF * piece + m, sign * poly::eval_derivative(&basis, t, order))
            })
            .collect()
    };
    for order in 0..3 {
        rows.push(term(0, 0.0, order, 1.0));
        rows.push(term(j - 1, d[j - 1], order, 1.0));
        for axis in 0..3 {
            rhs[axis].push(problem.start.derivative(order)[axis]);
            rhs[axis].push(problem.end.derivative(order)[axis]);
        }
    }
    for i in 0..j - 1 {
        for order in 0..3 {
            let mut r = term(i, d[i], order, 1.0);
            r.extend(term(i + 1, 0.0, order, -1.0));
            rows.push(r);
            for v in rhs.iter_mut() {
                v.push(0.0);
            }
        }
        if let Some(w) = problem.waypoint(i + 1) {
            rows.push(term(i, d[i], 0, 1.0));
            for axis in 0..3 {
                rhs[axis].push(w[axis]);
            }
        }
    }
    let mut a = DMatrix::zeros(rows.len(), NCOEF * j);
    for (k, r) in rows.iter().enumerate() {
        for &(c, v) in r {
            a[(k, c)] += v;
        }
    }
    let [x, y, z] = rhs;
    (a, [DVector::from_vec(x), DVector::from_vec(y), DVector::from_vec(z)])
}

/// Reference solver: the dense KKT system over all coefficients with the
/// constraints of [`constraint_system`]. Slow; meant for validating
/// [`solve_closed_form`].
pub fn solve_dense_kkt(problem: &QpProblem) -> Result<QpSolution> {
    let asm = assemble(problem)?;
    let (a, d) = constraint_system(problem);
    let n = asm.q.nrows();
    let m = a.nrows();
    let mut kkt = DMatrix::zeros(n + m, n + m);
    kkt.view_mut((0, 0), (n, n)).copy_from(&(&asm.q * 2.0));
    kkt.view_mut((0, n), (n, m)).copy_from(&a.transpose());
    kkt.view_mut((n, 0), (m, n)).copy_from(&a);
    let lu = kkt.lu();
    let j = problem.durations.len();
    let mut coeffs = vec![[[0.0; NCOEF]; 3]; j];
    let mut axis_objective = [0.0; 3];
    for axis in 0..3 {
        let mut rhs = DVector::zeros(n + m);
        rhs.rows_mut(0, n).copy_from(&(&asm.lin[axis] * 2.0));
        rhs.rows_mut(n, m).copy_from(&d[axis]);
        let sol = lu.solve(&rhs).ok_or(Error::Degenerate("singular KKT system"))?;
        let c = sol.rows(0, n).into_owned();
        axis_objective[axis] = c.dot(&(&asm.q * &c)) - 2.0 * c.dot(&asm.lin[axis]) + asm.constant[axis];
        for (i, piece) in coeffs.iter_mut().enumerate() {
            piece[axis].copy_from_slice(c.rows(NCOEF * i, NCOEF).as_slice());
        }
    }
    let pieces = coeffs.into_iter().zip(&problem.durations).map(|(c, &t)| PolySegment::new(c, t)).collect();
    Ok(QpSolution {
        trajectory: PiecewiseTrajectory::new(pieces),
        objective_value: axis_objective.iter().sum(),
        axis_objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::split_uniform;

    fn sample_reference() -> PiecewiseTrajectory {
        let mut c = [[0.0; NCOEF]; 3];
        c[0] = [0.0, 1.0, 0.2, 0.3, -0.1, 0.02];
        c[1] = [1.0, -0.5, 0.0, 0.4, 0.0, -0.03];
        c[2] = [2.0, 0.0, 0.1, 0.0, 0.05, 0.0];
        split_uniform(&PolySegment::new(c, 2.0), 4)
    }

    #[test]
    fn boundary_inverse_inverts_evaluation() {
        let t = 0.7;
        let m = Matrix6::from_fn(|row, col| {
            let (order, at) = (row % 3, if row < 3 { 0.0 } else { t });
            let mut basis = [0.0; NCOEF];
            basis[col] = 1.0;
            poly::eval_derivative(&basis, at, order)
        });
        let id = m * boundary_inverse(t);
        assert!((id - Matrix6::identity()).abs().max() < 1e-12);
    }

    #[test]
    fn resemblance_only_reproduces_reference() {
        let reference = sample_reference();
        let w = CostWeights { rho: 100.0, lambda_s: 0.0, lambda_r: 1.0, lambda_c: 0.0 };
        let sol = solve_closed_form(&QpProblem::from_reference(&reference, w)).unwrap();
        for (a, b) in sol.trajectory.segments.iter().zip(&reference.segments) {
            for axis in 0..3 {
                for k in 0..NCOEF {
                    assert!((a.coeffs[axis][k] - b.coeffs[axis][k]).abs() < 1e-9);
                }
            }
        }
        assert!(sol.objective_value.abs() < 1e-12);
    }

    #[test]
    fn reference_objective_is_zero_without_other_terms() {
        let reference = sample_reference();
        let w = CostWeights { rho: 100.0, lambda_s: 0.0, lambda_r: 2.0, lambda_c: 0.0 };
        let p = QpProblem::from_reference(&reference, w);
        assert_eq!(objective(&p, &reference.segments), [0.0; 3]);
    }

    #[test]
    fn zero_weights_are_degenerate() {
        let w = CostWeights { rho: 100.0, lambda_s: 0.0, lambda_r: 0.0, lambda_c: 1.0 };
        let p = QpProblem::from_reference(&sample_reference(), w);
        assert!(matches!(solve_closed_form(&p), Err(Error::Degenerate(_))));
        assert!(matches!(assemble(&p), Err(Error::Degenerate(_))));
    }

    #[test]
    fn collapsed_duration_reports_segment() {
        let mut p = QpProblem::from_reference(&sample_reference(), CostWeights::default());
        p.durations[2] = 0.0;
        assert_eq!(solve_closed_form(&p), Err(Error::SingularSegment { segment: 2 }));
    }

    #[test]
    fn attractor_windows_split_across_pieces() {
        let ap = AttractingPoint::new(Vec3::ZERO, (0.3, 1.2), &[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert_eq!(
            ap.segments,
            [
                SegmentWindow { segment: 0, t_start: 0.3, t_end: 0.5 },
                SegmentWindow { segment: 1, t_start: 0.0, t_end: 0.5 },
                SegmentWindow { segment: 2, t_start: 0.0, t_end: 0.19999999999999996 },
            ]
        );
        assert!(AttractingPoint::new(Vec3::ZERO, (3.0, 4.0), &[0.5, 0.5]).is_err());
    }

    #[test]
    fn pinned_waypoint_is_interpolated() {
        let mut p = QpProblem::from_reference(&sample_reference(), CostWeights::default());
        let target = Vec3::new(3.0, -1.0, 0.5);
        p.waypoints[1] = Some(target);
        let sol = solve_closed_form(&p).unwrap();
        let knot = sol.trajectory.segments[2].start_state().position;
        assert!((knot - target).norm_inf() < 1e-9);
        assert!(sol.trajectory.is_c2_continuous());
    }
}
