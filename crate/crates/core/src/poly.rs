//! Scalar polynomial helpers in the ascending natural basis `(1, t, t², …)`.

use alloc::vec::Vec;

use num_traits::Float;

/// Number of coefficients stored per axis and segment (degree ≤ 5).
pub const NCOEF: usize = 6;

pub type Coeffs = [f64; NCOEF];

/// Horner evaluation.
pub fn eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * t + ci)
}

/// Coefficients of the `order`-th derivative (same length, trailing zeros).
pub fn derivative(c: &Coeffs, order: usize) -> Coeffs {
    let mut out = [0.0; NCOEF];
    for i in order..NCOEF {
        out[i - order] = c[i] * falling_factorial(i, order);
    }
    out
}

/// `order`-th derivative of a coefficient vector at `t`.
pub fn eval_derivative(c: &Coeffs, t: f64, order: usize) -> f64 {
    let mut acc = 0.0;
    for i in (order..NCOEF).rev() {
        acc = acc * t + c[i] * falling_factorial(i, order);
    }
    acc
}

/// `i · (i-1) ⋯ (i-k+1)`.
pub fn falling_factorial(i: usize, k: usize) -> f64 {
    if k > i {
        return 0.0;
    }
    ((i - k + 1)..=i).fold(1.0, |acc, v| acc * v as f64)
}

fn binomial(n: usize, k: usize) -> f64 {
    falling_factorial(n, k) / falling_factorial(k, k)
}

/// Re-expands `p(t)` about `s`, returning `q` with `q(u) = p(s + u)`.
pub fn taylor_shift(c: &Coeffs, s: f64) -> Coeffs {
    let mut out = [0.0; NCOEF];
    for (m, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        let mut pow = 1.0;
        for i in m..NCOEF {
            acc += c[i] * binomial(i, m) * pow;
            pow *= s;
        }
        *o = acc;
    }
    out
}

/// Coefficients of `p(t / scale)`.
pub fn time_scale(c: &Coeffs, scale: f64) -> Coeffs {
    let mut out = *c;
    let mut f = 1.0;
    for o in out.iter_mut() {
        *o *= f;
        f /= scale;
    }
    out
}

/// Exact `∫_{ts}^{te} Dᵏtᵃ · Dᵏtᵇ dt` for all `a, b < NCOEF`.
pub fn monomial_gram(order: usize, ts: f64, te: f64) -> [[f64; NCOEF]; NCOEF] {
    let mut g = [[0.0; NCOEF]; NCOEF];
    if te <= ts {
        return g;
    }
    for a in order..NCOEF {
        for b in order..NCOEF {
            let p = (a + b - 2 * order) as i32;
            let coef = falling_factorial(a, order) * falling_factorial(b, order);
            g[a][b] = coef * (te.powi(p + 1) - ts.powi(p + 1)) / f64::from(p + 1);
        }
    }
    g
}

/// `cᵀ G c` for one coefficient block.
pub fn quad_form(g: &[[f64; NCOEF]; NCOEF], c: &Coeffs) -> f64 {
    let mut acc = 0.0;
    for a in 0..NCOEF {
        for b in 0..NCOEF {
            acc += c[a] * g[a][b] * c[b];
        }
    }
    acc
}

fn trimmed(c: &[f64]) -> &[f64] {
    let mut n = c.len();
    while n > 0 && c[n - 1] == 0.0 {
        n -= 1;
    }
    &c[..n]
}

/// All real roots of `c` in `[lo, hi]`, ascending.
///
/// Critical points are isolated recursively from the derivative, so every
/// sub-interval is monotone and holds at most one root, found by bisection.
pub fn real_roots(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let c = trimmed(c);
    let mut roots = Vec::new();
    if c.len() < 2 || hi < lo {
        return roots;
    }
    if c.len() == 2 {
        let r = -c[0] / c[1];
        if r >= lo && r <= hi {
            roots.push(r);
        }
        return roots;
    }
    let d: Vec<f64> = (1..c.len()).map(|i| c[i] * i as f64).collect();
    let mut knots = Vec::with_capacity(c.len() + 1);
    knots.push(lo);
    knots.extend(real_roots(&d, lo, hi).into_iter().filter(|&x| x > lo && x < hi));
    knots.push(hi);

    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (eval(c, a), eval(c, b));
        if fa == 0.0 {
            push_unique(&mut roots, a);
            continue;
        }
        if fb == 0.0 {
            push_unique(&mut roots, b);
            continue;
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        push_unique(&mut roots, bisect(c, a, b, fa));
    }
    roots
}

fn push_unique(roots: &mut Vec<f64>, r: f64) {
    if roots.last().is_none_or(|&l| (r - l).abs() > 1e-14 * (1.0 + r.abs())) {
        roots.push(r);
    }
}

/// Number of sign changes in the coefficient sequence (zeros skipped); by
/// Descartes' rule an upper bound on the count of positive roots.
pub fn sign_changes(c: &[f64]) -> usize {
    let mut prev = 0.0f64;
    let mut n = 0;
    for &v in c {
        if v != 0.0 {
            if prev != 0.0 && v.signum() != prev.signum() {
                n += 1;
            }
            prev = v;
        }
    }
    n
}

/// Root of `c` in `[a, b]` when the endpoint values differ in sign.
pub fn bracketed_root(c: &[f64], a: f64, b: f64) -> Option<f64> {
    let (fa, fb) = (eval(c, a), eval(c, b));
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    (fa.signum() != fb.signum()).then(|| bisect(c, a, b, fa))
}

/// Root of `c` in a bracket with a sign change, by the Illinois variant of
/// regula falsi (falls back to bisection when a step stalls).
fn bisect(c: &[f64], mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    let mut fb = eval(c, b);
    let mut side = 0i8;
    for _ in 0..200 {
        let width = b - a;
        if width <= 4.0 * f64::EPSILON * (a.abs() + b.abs()) || width <= f64::MIN_POSITIVE {
            break;
        }
        let mut m = (a * fb - b * fa) / (fb - fa);
        if !(m > a && m < b) {
            m = 0.5 * (a + b);
        }
        let fm = eval(c, m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = m;
            fb = fm;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

const GL16_NODES: [f64; 8] = [
    0.09501250983763745,
    0.2816035507792589,
    0.45801677765722737,
    0.6178762444026438,
    0.755404408355003,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL16_WEIGHTS: [f64; 8] = [
    0.18945061045506859,
    0.1826034150449236,
    0.16915651939500262,
    0.14959598881657676,
    0.12462897125553403,
    0.09515851168249259,
    0.062253523938647706,
    0.027152459411754037,
];

/// 16-node Gauss–Legendre quadrature of `f` over `[a, b]`.
pub fn gauss_legendre16(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in GL16_NODES.iter().zip(GL16_WEIGHTS.iter()) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}
