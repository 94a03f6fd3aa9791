//! Random-waypoint jump mobility: nodes wait exponential times and relocate
//! by an isotropic displacement. Traces cover two-sided time horizons by
//! running an independent reversed walk from the shared time-zero state.

use crate::geometry::{Point, Vector, Window, MAX_DIM};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

/// Law of a single relocation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaypointLaw {
    /// Jump of fixed length in a uniformly random direction.
    FixedJump(f64),
    /// Standard Gaussian step per axis, so `E|v|^2 = dim` and the walk is
    /// diffusive with unit per-axis rate at jump rate 1.
    IsotropicNormalized,
}

impl WaypointLaw {
    /// Mean squared step length in `dim` dimensions.
    pub fn mean_square_norm(&self, dim: usize) -> f64 {
        match *self {
            WaypointLaw::FixedJump(s) => s * s,
            WaypointLaw::IsotropicNormalized => dim as f64,
        }
    }

    pub fn sample<R: Rng>(&self, dim: usize, rng: &mut R) -> Vector {
        let mut v: Vector = [0.0; MAX_DIM];
        for vi in v[..dim].iter_mut() {
            *vi = StandardNormal.sample(rng);
        }
        if let WaypointLaw::FixedJump(s) = *self {
            let norm: f64 = v[..dim].iter().map(|x| x * x).sum::<f64>().sqrt();
            // resample-free guard: a zero Gaussian vector has probability 0
            let scale = if norm > 0.0 { s / norm } else { 0.0 };
            for vi in v[..dim].iter_mut() {
                *vi *= scale;
            }
        }
        v
    }
}

/// A streaming jump walker; advances monotonically in its own forward clock.
/// Positions are raw (unwrapped); callers wrap for torus geometry.
#[derive(Debug, Clone)]
pub struct JumpWalker {
    pos: Point,
    time: f64,
    next_jump: f64,
    rate: f64,
    law: WaypointLaw,
    rng: ChaCha12Rng,
}

impl JumpWalker {
    pub fn new(start: Point, rate: f64, law: WaypointLaw, seed: u64) -> Self {
        assert!(rate > 0.0);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let gap = Exp::new(rate).unwrap().sample(&mut rng);
        JumpWalker { pos: start, time: 0.0, next_jump: gap, rate, law, rng }
    }

    pub fn position(&self) -> Point {
        self.pos
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Time of the next relocation event (strictly after `time()`).
    pub fn next_jump_time(&self) -> f64 {
        self.next_jump
    }

    /// Advances to time `t >= time()`, applying every jump with jump time
    /// `<= t` (the path is right-continuous).
    pub fn advance_to(&mut self, t: f64) {
        assert!(t >= self.time, "walker time must be monotone");
        while self.next_jump <= t {
            let v = self.law.sample(self.pos.dim(), &mut self.rng);
            self.pos = self.pos.translate(&v);
            self.time = self.next_jump;
            self.next_jump += Exp::new(self.rate).unwrap().sample(&mut self.rng);
        }
        self.time = t;
    }
}

/// A fully materialized trajectory on `[t_lo, t_hi]`, right-continuous, with
/// the walker at `anchor` at time zero.
#[derive(Debug, Clone)]
pub struct NodeTrace {
    pub t_lo: f64,
    pub t_hi: f64,
    /// Jump instants, strictly increasing, all inside `(t_lo, t_hi]`.
    times: Vec<f64>,
    /// `after[i]` is the position on `[times[i], times[i+1])`.
    after: Vec<Point>,
    /// Position on `[t_lo, times[0])`.
    initial: Point,
}

impl NodeTrace {
    pub fn jump_times(&self) -> &[f64] {
        &self.times
    }

    /// Position at `t` (right-continuous in the jump instants).
    pub fn position_at(&self, t: f64) -> Point {
        assert!(t >= self.t_lo - 1e-9 && t <= self.t_hi + 1e-9);
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            self.initial
        } else {
            self.after[k - 1]
        }
    }

    /// Position just before `t` (left limit).
    pub fn position_before(&self, t: f64) -> Point {
        let k = self.times.partition_point(|&s| s < t);
        if k == 0 {
            self.initial
        } else {
            self.after[k - 1]
        }
    }
}

/// Simulates one trace through `anchor` at time zero over `[t_lo, t_hi]`.
///
/// The backward half is an independent jump walk from the same anchor: the
/// jump process is reversible because the displacement law is symmetric, so
/// past and future are conditionally independent given the present.
pub fn simulate_trace(
    anchor: Point,
    rate: f64,
    law: WaypointLaw,
    t_lo: f64,
    t_hi: f64,
    seed: u64,
) -> NodeTrace {
    assert!(t_lo <= 0.0 && t_hi >= 0.0 && t_lo < t_hi);
    let dim = anchor.dim();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let exp = Exp::new(rate).unwrap();

    // backward half: jumps at -s_1 > -s_2 > ... with iid displacements
    let mut back_times = Vec::new();
    let mut back_steps: Vec<Vector> = Vec::new();
    let mut s = exp.sample(&mut rng);
    while -s > t_lo {
        back_times.push(-s);
        back_steps.push(law.sample(dim, &mut rng));
        s += exp.sample(&mut rng);
    }

    // forward half
    let mut fwd_times = Vec::new();
    let mut fwd_steps: Vec<Vector> = Vec::new();
    let mut t = exp.sample(&mut rng);
    while t <= t_hi {
        fwd_times.push(t);
        fwd_steps.push(law.sample(dim, &mut rng));
        t += exp.sample(&mut rng);
    }

    // stitch: walking backward from the anchor undoes each backward step.
    // cum[j] = anchor - (v_0 + ... + v_{j-1}) is the position on
    // [back_times[j], back_times[j-1]); cum[m] holds on [t_lo, back_times[m-1]).
    let m = back_times.len();
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(anchor);
    let mut pos = anchor;
    for step in &back_steps {
        let mut w: Vector = *step;
        w[..dim].iter_mut().for_each(|x| *x = -*x);
        pos = pos.translate(&w);
        cum.push(pos);
    }
    let initial = cum[m];
    let mut times = Vec::with_capacity(m + fwd_times.len());
    let mut after = Vec::with_capacity(m + fwd_times.len());
    for j in (0..m).rev() {
        times.push(back_times[j]);
        after.push(cum[j]);
    }
    let mut pos = anchor;
    for (ft, step) in fwd_times.iter().zip(&fwd_steps) {
        pos = pos.translate(step);
        times.push(*ft);
        after.push(pos);
    }
    NodeTrace { t_lo, t_hi, times, after, initial }
}

/// A trace that never jumps: the walker sits at `anchor` for the whole
/// horizon. Useful as a frozen typical node in constructed scenarios.
pub fn stationary(anchor: Point, t_lo: f64, t_hi: f64) -> NodeTrace {
    assert!(t_lo < t_hi);
    NodeTrace { t_lo, t_hi, times: Vec::new(), after: Vec::new(), initial: anchor }
}

/// An independent family of walkers sharing a rate and law, with positions
/// wrapped into `window` on demand.
#[derive(Debug, Clone)]
pub struct MobileEnsemble {
    pub walkers: Vec<JumpWalker>,
    pub window: Window,
}

impl MobileEnsemble {
    /// One walker per start point; walker `i` is seeded from `(seed, i)`.
    pub fn new(
        starts: &[Point],
        window: Window,
        rate: f64,
        law: WaypointLaw,
        seed: u64,
    ) -> Self {
        let walkers = starts
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                JumpWalker::new(p, rate, law, crate::seed::derive(seed, crate::seed::Stream::Nodes, i as u64))
            })
            .collect();
        MobileEnsemble { walkers, window }
    }

    pub fn advance_to(&mut self, t: f64) {
        for w in &mut self.walkers {
            w.advance_to(t);
        }
    }

    /// Earliest upcoming jump among all walkers, with the walker index.
    pub fn next_event(&self) -> Option<(f64, usize)> {
        self.walkers
            .iter()
            .enumerate()
            .map(|(i, w)| (w.next_jump_time(), i))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// Current positions wrapped into the window.
    pub fn wrapped_positions(&self, out: &mut Vec<Point>) {
        out.clear();
        out.extend(self.walkers.iter().map(|w| self.window.wrap(&w.position())));
    }
}

/// Per-axis diffusivity estimate: empirical `Var(X_T^(1)) / T` over replicas,
/// to compare against the nominal `rate * E|v|^2 / dim`.
pub fn diffusive_rescale_check(
    rate: f64,
    law: WaypointLaw,
    dim: usize,
    horizon: f64,
    replicas: u64,
    seed: u64,
) -> (f64, f64) {
    let mut m = crate::stats::RunningMoments::new();
    for r in 0..replicas {
        let mut w = JumpWalker::new(
            Point::zero(dim),
            rate,
            law,
            crate::seed::derive(seed, crate::seed::Stream::Replica, r),
        );
        w.advance_to(horizon);
        m.push(w.position().coord(0));
    }
    let empirical = m.variance() / horizon;
    let nominal = rate * law.mean_square_norm(dim) / dim as f64;
    (empirical, nominal)
}

/// Empirical covariance matrix (row-major, dim x dim) of the rescaled
/// endpoint `X_T / sqrt(T)`; approaches `(rate * E|v|^2 / dim) * I` for an
/// isotropic law, i.e. the identity for the normalized law at rate 1.
pub fn rescaled_endpoint_covariance(
    rate: f64,
    law: WaypointLaw,
    dim: usize,
    horizon: f64,
    replicas: u64,
    seed: u64,
) -> Vec<f64> {
    let scale = horizon.sqrt();
    let mut sum = vec![0.0; dim];
    let mut prod = vec![0.0; dim * dim];
    for r in 0..replicas {
        let mut w = JumpWalker::new(
            Point::zero(dim),
            rate,
            law,
            crate::seed::derive(seed, crate::seed::Stream::Replica, r),
        );
        w.advance_to(horizon);
        let p = w.position();
        for a in 0..dim {
            sum[a] += p.coord(a) / scale;
            for b in 0..dim {
                prod[a * dim + b] += p.coord(a) * p.coord(b) / (scale * scale);
            }
        }
    }
    let n = replicas as f64;
    let mut cov = vec![0.0; dim * dim];
    for a in 0..dim {
        for b in 0..dim {
            cov[a * dim + b] = prod[a * dim + b] / n - (sum[a] / n) * (sum[b] / n);
        }
    }
    cov
}

/// Standard Brownian path sampled on the given increasing time grid.
pub fn sample_brownian_path(dim: usize, times: &[f64], seed: u64) -> Vec<Point> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(times.len());
    let mut pos = Point::zero(dim);
    let mut prev = 0.0;
    for &t in times {
        assert!(t >= prev);
        let sd = (t - prev).sqrt();
        let mut v: Vector = [0.0; MAX_DIM];
        for vi in v[..dim].iter_mut() {
            let g: f64 = StandardNormal.sample(&mut rng);
            *vi = sd * g;
        }
        pos = pos.translate(&v);
        out.push(pos);
        prev = t;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{chi_square_counts, chi_square_quantile, ks_one_sample, RunningMoments};

    #[test]
    fn fixed_jump_has_exact_norm() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..100 {
            let v = WaypointLaw::FixedJump(0.005).sample(2, &mut rng);
            let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
            assert!((n - 0.005).abs() < 1e-12);
            assert_eq!(v[2], 0.0);
        }
    }

    #[test]
    fn steps_are_isotropic() {
        // mean ~ 0 and axis variances equal for both laws
        for law in [WaypointLaw::FixedJump(1.0), WaypointLaw::IsotropicNormalized] {
            let mut rng = ChaCha12Rng::seed_from_u64(11);
            let (mut mx, mut my, mut mxy) =
                (RunningMoments::new(), RunningMoments::new(), RunningMoments::new());
            for _ in 0..20000 {
                let v = law.sample(2, &mut rng);
                mx.push(v[0]);
                my.push(v[1]);
                mxy.push(v[0] * v[1]);
            }
            assert!(mx.mean().abs() < 4.0 * mx.std_error() + 1e-3);
            assert!(my.mean().abs() < 4.0 * my.std_error() + 1e-3);
            assert!(mxy.mean().abs() < 4.0 * mxy.std_error() + 1e-3);
            let msq = mx.variance() + my.variance();
            assert!((msq - law.mean_square_norm(2)).abs() < 0.05 * law.mean_square_norm(2));
        }
    }

    #[test]
    fn jump_counts_are_poisson() {
        // chi-square against Poisson(rho * T) at 1%
        let (rho, t) = (1.5, 4.0);
        let mean = rho * t;
        let mut hist = vec![0u32; 30];
        let reps = 4000;
        for r in 0..reps {
            let tr = simulate_trace(Point::zero(2), rho, WaypointLaw::IsotropicNormalized, -0.0001, t, r);
            let k = tr.jump_times().iter().filter(|&&s| s > 0.0).count();
            if k < hist.len() {
                hist[k] += 1;
            }
        }
        let pmf = |k: usize| {
            let lk = -mean + k as f64 * mean.ln()
                - (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
            lk.exp()
        };
        let (chi2, dof) = chi_square_counts(&hist, reps as f64, pmf, 5.0);
        assert!(chi2 < chi_square_quantile(0.99, dof), "chi2 {chi2} dof {dof}");
    }

    #[test]
    fn gaps_are_exponential() {
        let rho = 2.0;
        let mut gaps = Vec::new();
        for r in 0..200u64 {
            let tr = simulate_trace(Point::zero(1), rho, WaypointLaw::FixedJump(1.0), -0.0001, 50.0, 7000 + r);
            let ts = tr.jump_times();
            for w in ts.windows(2) {
                if w[0] > 0.0 {
                    gaps.push(w[1] - w[0]);
                }
            }
        }
        let d = ks_one_sample(&gaps, |x| 1.0 - (-rho * x).exp());
        // KS 1% threshold ~ 1.63 / sqrt(n)
        assert!(d < 1.63 / (gaps.len() as f64).sqrt(), "d = {d}, n = {}", gaps.len());
    }

    #[test]
    fn trace_anchor_and_replay() {
        let tr = simulate_trace(
            Point::new(&[1.0, 2.0]),
            1.0,
            WaypointLaw::IsotropicNormalized,
            -8.0,
            8.0,
            99,
        );
        // anchored at time zero
        let p0 = tr.position_at(0.0);
        assert!((p0.coord(0) - 1.0).abs() < 1e-12 && (p0.coord(1) - 2.0).abs() < 1e-12);
        // jump times strictly increasing within the horizon
        let ts = tr.jump_times();
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
        assert!(ts.iter().all(|&t| t > -8.0 && t <= 8.0));
        // piecewise-constant replay: position constant strictly between jumps,
        // right-continuous at jumps
        for w in ts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            assert_eq!(tr.position_at(w[0]), tr.position_at(mid));
            assert_ne!(tr.position_at(mid), tr.position_before(w[0]));
        }
        assert_eq!(tr.position_at(-8.0), tr.position_before(ts[0]));
    }

    #[test]
    fn walker_matches_trace_forward_law() {
        // same diffusivity from streaming walker and materialized trace
        let (rho, t) = (1.0, 20.0);
        let mut mw = RunningMoments::new();
        let mut mt = RunningMoments::new();
        for r in 0..1500u64 {
            let mut w = JumpWalker::new(Point::zero(2), rho, WaypointLaw::IsotropicNormalized, r);
            w.advance_to(t);
            mw.push(w.position().coord(0));
            let tr = simulate_trace(Point::zero(2), rho, WaypointLaw::IsotropicNormalized, -0.001, t, 10_000 + r);
            mt.push(tr.position_at(t).coord(0));
        }
        assert!(mw.mean().abs() < 4.0 * mw.std_error());
        assert!(mt.mean().abs() < 4.0 * mt.std_error());
        let (vw, vt) = (mw.variance(), mt.variance());
        assert!((vw - rho * t).abs() < 0.1 * rho * t, "vw = {vw}");
        assert!((vt - rho * t).abs() < 0.1 * rho * t, "vt = {vt}");
    }

    #[test]
    fn walker_advance_is_idempotent_between_jumps() {
        let mut w = JumpWalker::new(Point::zero(2), 1.0, WaypointLaw::FixedJump(1.0), 5);
        w.advance_to(0.5 * w.next_jump_time());
        let p = w.position();
        let nj = w.next_jump_time();
        w.advance_to(0.9 * nj);
        assert_eq!(w.position(), p);
        assert_eq!(w.next_jump_time(), nj);
    }

    #[test]
    fn backward_half_is_also_diffusive() {
        let (rho, t) = (1.0, 20.0);
        let mut m = RunningMoments::new();
        for r in 0..1500u64 {
            let tr = simulate_trace(Point::zero(2), rho, WaypointLaw::IsotropicNormalized, -t, 0.001, 40_000 + r);
            m.push(tr.position_at(-t).coord(0));
        }
        assert!(m.mean().abs() < 4.0 * m.std_error());
        assert!((m.variance() - rho * t).abs() < 0.1 * rho * t);
    }

    #[test]
    fn diffusivity_matches_nominal() {
        let (emp, nom) =
            diffusive_rescale_check(2.0, WaypointLaw::FixedJump(0.5), 2, 50.0, 1200, 17);
        assert!((emp - nom).abs() < 0.12 * nom, "emp {emp} nom {nom}");
    }

    #[test]
    fn brownian_moments() {
        let times: Vec<f64> = (1..=8).map(|i| i as f64 * 0.5).collect();
        let mut at_end = RunningMoments::new();
        let mut incr = RunningMoments::new();
        for r in 0..3000u64 {
            let path = sample_brownian_path(2, &times, r);
            at_end.push(path.last().unwrap().coord(0));
            incr.push(path[3].coord(1) - path[1].coord(1));
        }
        assert!(at_end.mean().abs() < 4.0 * at_end.std_error());
        assert!((at_end.variance() - 4.0).abs() < 0.35);
        assert!((incr.variance() - 1.0).abs() < 0.1);
    }

    #[test]
    fn trace_is_deterministic_in_seed() {
        let a = simulate_trace(Point::zero(2), 1.0, WaypointLaw::IsotropicNormalized, -3.0, 3.0, 42);
        let b = simulate_trace(Point::zero(2), 1.0, WaypointLaw::IsotropicNormalized, -3.0, 3.0, 42);
        assert_eq!(a.jump_times(), b.jump_times());
        assert_eq!(a.position_at(2.7), b.position_at(2.7));
    }
}
