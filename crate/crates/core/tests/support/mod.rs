//! Test-only reference solvers and instance generators.
//!
//! The reference solves
//!
//! ```text
//! min ½‖z − v‖² + (ρ/2)‖z‖₁²   s.t.  l ≤ z ≤ u,  ‖z − w‖₁ ≤ α (optional),  ρ ≥ 0
//! ```
//!
//! by splitting every coordinate into segments between its kinks {0, w_i}. On the
//! segment lengths both absolute values are linear, so the lifted problem is a smooth
//! convex quadratic over a box intersected with one halfspace. It is solved by
//! accelerated projected gradient with restarts; no code is shared with the library.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct Problem<'a> {
    pub v: &'a [f64],
    pub rho: f64,
    pub lower: &'a [f64],
    pub upper: &'a [f64],
    pub ball: Option<(&'a [f64], f64)>,
}

#[derive(Clone, Debug)]
pub struct Reference {
    pub z: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub mapping_norm: f64,
}

struct Lift {
    coord: Vec<usize>,
    len: Vec<f64>,
    /// Slope of |z_i| on the segment.
    a: Vec<f64>,
    /// Slope of |z_i − w_i| on the segment.
    b: Vec<f64>,
    a0: f64,
    cap: f64,
    has_ball: bool,
}

pub fn objective(z: &[f64], v: &[f64], rho: f64) -> f64 {
    let l1: f64 = z.iter().map(|x| x.abs()).sum();
    0.5 * z.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() + 0.5 * rho * l1 * l1
}

impl Lift {
    fn new(p: &Problem) -> Self {
        let d = p.v.len();
        let mut lift = Lift { coord: vec![], len: vec![], a: vec![], b: vec![], a0: 0.0, cap: 0.0, has_ball: false };
        let mut b0 = 0.0;
        for i in 0..d {
            let (l, u) = (p.lower[i], p.upper[i]);
            let mut cuts = vec![l, u, 0.0];
            if let Some((w, _)) = p.ball {
                cuts.push(w[i]);
            }
            let mut cuts: Vec<f64> = cuts.into_iter().filter(|c| *c >= l && *c <= u).collect();
            cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            cuts.dedup();
            for k in 0..cuts.len().saturating_sub(1) {
                let mid = 0.5 * (cuts[k] + cuts[k + 1]);
                lift.coord.push(i);
                lift.len.push(cuts[k + 1] - cuts[k]);
                lift.a.push(mid.signum());
                lift.b.push(p.ball.map_or(0.0, |(w, _)| (mid - w[i]).signum()));
            }
            lift.a0 += l.abs();
            if let Some((w, _)) = p.ball {
                b0 += (l - w[i]).abs();
            }
        }
        if let Some((_, alpha)) = p.ball {
            lift.has_ball = true;
            lift.cap = alpha - b0;
        }
        lift
    }

    fn z(&self, lower: &[f64], s: &[f64]) -> Vec<f64> {
        let mut z = lower.to_vec();
        for j in 0..s.len() {
            z[self.coord[j]] += s[j];
        }
        z
    }

    fn value_grad(&self, p: &Problem, s: &[f64], grad: &mut [f64]) -> f64 {
        let z = self.z(p.lower, s);
        let l1 = self.a0 + self.a.iter().zip(s).map(|(a, x)| a * x).sum::<f64>();
        for j in 0..s.len() {
            let i = self.coord[j];
            grad[j] = (z[i] - p.v[i]) + p.rho * l1 * self.a[j];
        }
        0.5 * z.iter().zip(p.v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() + 0.5 * p.rho * l1 * l1
    }

    fn project(&self, y: &[f64], out: &mut [f64]) {
        let clip = |t: f64, out: &mut [f64]| {
            for j in 0..y.len() {
                out[j] = (y[j] - t * self.b[j]).clamp(0.0, self.len[j]);
            }
        };
        clip(0.0, out);
        if !self.has_ball {
            return;
        }
        let slack = |out: &[f64]| self.b.iter().zip(out.iter()).map(|(b, x)| b * x).sum::<f64>() - self.cap;
        if slack(out) <= 0.0 {
            return;
        }
        let mut lo = 0.0;
        let mut hi = y.iter().fold(0.0_f64, |m, v| m.max(v.abs())) + self.len.iter().fold(0.0_f64, |m, v| m.max(*v)) + 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            clip(mid, out);
            if slack(out) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // the halfspace value is piecewise linear in the multiplier; finish on the last piece
        clip(lo, out);
        let s_lo = slack(out);
        clip(hi, out);
        let s_hi = slack(out);
        if s_lo > s_hi {
            let t = lo + (hi - lo) * s_lo / (s_lo - s_hi);
            clip(t, out);
            if slack(out) > 0.0 {
                clip(hi, out);
            }
        }
    }
}

/// Accelerated projected gradient until the gradient-mapping norm drops below `tol`.
pub fn solve(p: &Problem, tol: f64, max_iterations: usize) -> Reference {
    let lift = Lift::new(p);
    let n = lift.len.len();
    let d = p.v.len();
    if n == 0 {
        let z = p.lower.to_vec();
        return Reference { objective: objective(&z, p.v, p.rho), z, iterations: 0, mapping_norm: 0.0 };
    }
    let per_coord = (0..d).map(|i| lift.coord.iter().filter(|c| **c == i).count()).max().unwrap_or(1) as f64;
    let lip = per_coord + p.rho * n as f64;
    let step = 1.0 / lip;

    let mut s = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    lift.project(&vec![0.0; n], &mut s);
    let mut y = s.clone();
    let mut s_next = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut t = 1.0_f64;
    let mut mapping = f64::INFINITY;
    let mut it = 0;
    while it < max_iterations {
        it += 1;
        lift.value_grad(p, &y, &mut grad);
        for j in 0..n {
            tmp[j] = y[j] - step * grad[j];
        }
        lift.project(&tmp, &mut s_next);
        mapping = lip * y.iter().zip(&s_next).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if mapping <= tol {
            s.copy_from_slice(&s_next);
            break;
        }
        // gradient restart
        let restart = (0..n).map(|j| (y[j] - s_next[j]) * (s_next[j] - s[j])).sum::<f64>() > 0.0;
        let t_next = if restart { 1.0 } else { 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt()) };
        let beta = if restart { 0.0 } else { (t - 1.0) / t_next };
        for j in 0..n {
            y[j] = s_next[j] + beta * (s_next[j] - s[j]);
        }
        s.copy_from_slice(&s_next);
        t = t_next;
    }
    let z = lift.z(p.lower, &s);
    Reference { objective: objective(&z, p.v, p.rho), z, iterations: it, mapping_norm: mapping }
}

/// Deterministic generator of random subproblem data.
pub struct Gen {
    pub rng: ChaCha8Rng,
}

pub struct BoxCase {
    pub v: Vec<f64>,
    pub rho: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

pub struct BallBoxCase {
    pub v: Vec<f64>,
    pub rho: f64,
    pub w: Vec<f64>,
    pub alpha: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn dim(&mut self, max: usize) -> usize {
        self.rng.random_range(1..=max)
    }

    pub fn vector(&mut self, d: usize, scale: f64) -> Vec<f64> {
        (0..d).map(|_| self.rng.random_range(-scale..scale)).collect()
    }

    pub fn rho(&mut self) -> f64 {
        10f64.powf(self.rng.random_range(-1.5..1.0))
    }

    /// A box that may or may not contain the origin.
    pub fn bounds(&mut self, d: usize) -> (Vec<f64>, Vec<f64>) {
        let mut lower = Vec::with_capacity(d);
        let mut upper = Vec::with_capacity(d);
        for _ in 0..d {
            let a = self.rng.random_range(-5.0..5.0);
            let b = a + self.rng.random_range(0.05..6.0);
            lower.push(a);
            upper.push(b);
        }
        (lower, upper)
    }

    /// A box around the origin, as produced by the coordinate shift.
    pub fn bounds_around_origin(&mut self, d: usize) -> (Vec<f64>, Vec<f64>) {
        let lower = (0..d).map(|_| -self.rng.random_range(0.0..4.0)).collect();
        let upper = (0..d).map(|_| self.rng.random_range(0.01..4.0)).collect();
        (lower, upper)
    }

    pub fn box_case(&mut self, max_dim: usize) -> BoxCase {
        let d = self.dim(max_dim);
        let v = self.vector(d, 6.0);
        let rho = self.rho();
        let (lower, upper) = self.bounds(d);
        BoxCase { v, rho, lower, upper }
    }

    /// Ball-box data with a nonempty intersection, ball active or not.
    pub fn ball_box_case(&mut self, max_dim: usize) -> BallBoxCase {
        let d = self.dim(max_dim);
        let v = self.vector(d, 6.0);
        let rho = self.rho();
        let (lower, upper) = self.bounds(d);
        let w = self.vector(d, 6.0);
        let gap: f64 = (0..d).map(|i| (w[i].clamp(lower[i], upper[i]) - w[i]).abs()).sum();
        let alpha = gap + self.rng.random_range(0.01..3.0) * (1.0 + 0.3 * d as f64).sqrt();
        BallBoxCase { v, rho, w, alpha, lower, upper }
    }
}
