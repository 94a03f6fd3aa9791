//! Direct Monte Carlo samplers for the limiting connection-interval objects:
//! the finite-range, grid-discretized interval length of a typical node
//! jointly connected with a Poisson number of independent static copies, in
//! the dense (unconditional mean), sparse (conditional on the sink count),
//! and critical (Brownian-modulated sink count) regimes.

use crate::estimators::critical_ball_radius;
use crate::geometry::{sample_ppp, GeometryError, Point, PointSet, Window};
use crate::graph::{BfsScratch, GraphError, PercolationMode, SpatialGraph};
use crate::mobility::{sample_brownian_path, simulate_trace, NodeTrace, WaypointLaw};
use crate::seed::{derive, Stream};
use crate::stats::{EstimateWithError, RunningMoments};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LimitError {
    #[error("grid step {step} must be positive and at most the half-extent {max_extent}")]
    BadGrid { step: f64, max_extent: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Dense,
    Sparse,
    Critical,
}

/// Parameters of the limit samplers. `step`/`max_extent` are the grid
/// discretization (delta, M); `mode` selects the infinite-cluster surrogate.
#[derive(Debug, Clone, Copy)]
pub struct LimitConfig {
    pub regime: Regime,
    pub n_s: f64,
    pub mode: PercolationMode,
    pub step: f64,
    pub max_extent: f64,
    pub intensity: f64,
    pub radius: f64,
    pub law: WaypointLaw,
    pub rate: f64,
    pub window: Window,
    pub replicas: u64,
    pub seed: u64,
}

impl LimitConfig {
    fn check(&self) -> Result<(), LimitError> {
        if !(self.step > 0.0) || self.step > self.max_extent {
            return Err(LimitError::BadGrid { step: self.step, max_extent: self.max_extent });
        }
        Ok(())
    }

    /// Grid half-count n = ceil(M / delta); offsets run in [-n, n].
    pub fn half_count(&self) -> i64 {
        (self.max_extent / self.step).ceil() as i64
    }

    /// Upper bound for every sampled interval length.
    pub fn max_ell(&self) -> f64 {
        2.0 * self.half_count() as f64 * self.step
    }
}

/// One draw of the limiting interval length with its conditioning record.
#[derive(Debug, Clone, Copy)]
pub struct LimitSample {
    pub ell: f64,
    pub sink_count: u64,
}

/// Mobile relay nodes with materialized traces; supports position snapshots
/// at arbitrary times in the simulated span.
struct DynamicWorld {
    nodes: Vec<NodeTrace>,
    window: Window,
}

impl DynamicWorld {
    fn sample(cfg: &LimitConfig, t_lo: f64, t_hi: f64, seed: u64) -> Result<Self, LimitError> {
        let starts = sample_ppp(cfg.intensity, cfg.window, derive(seed, Stream::Nodes, 0))?;
        let nodes = starts
            .points()
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                simulate_trace(p, cfg.rate, cfg.law, t_lo, t_hi, derive(seed, Stream::Nodes, i as u64 + 1))
            })
            .collect();
        Ok(DynamicWorld { nodes, window: cfg.window })
    }

    fn snapshot(&self, t: f64) -> PointSet {
        let pts = self.nodes.iter().map(|tr| self.window.wrap(&tr.position_at(t))).collect();
        PointSet::new(pts, 0.0, self.window)
    }
}

enum Focal {
    /// The typical node: a trace anchored at the focal origin at time 0.
    Moving(NodeTrace),
    /// A static origin in an independent dynamic environment.
    Static(Point),
}

/// Lazily evaluated grid membership of one focal point in one dynamic
/// world: "does the focal point belong to the (surrogate) infinite cluster
/// at grid time k * step?" Evaluations build a frozen-geometry graph at the
/// queried instant and are cached per grid offset.
pub struct MembershipSampler {
    world: DynamicWorld,
    focal: Focal,
    mode: PercolationMode,
    radius: f64,
    step: f64,
    half_count: i64,
    cache: Vec<i8>,
    scratch: BfsScratch,
}

impl MembershipSampler {
    fn new(cfg: &LimitConfig, focal_seed: u64, moving: bool) -> Result<Self, LimitError> {
        cfg.check()?;
        let n = cfg.half_count();
        let span = n as f64 * cfg.step;
        let world = DynamicWorld::sample(cfg, -span, span, focal_seed)?;
        // Under the open-window giant-component surrogate the anchor is
        // uniform in the window (matching the theta estimator's placement
        // convention); the periodic box surrogate is translation invariant,
        // so the center serves as the origin there.
        let anchor = match cfg.mode {
            PercolationMode::WindowGiant => {
                let mut rng = ChaCha12Rng::seed_from_u64(derive(focal_seed, Stream::Typical, 2));
                let mut c = [0.0; crate::geometry::MAX_DIM];
                for x in c.iter_mut().take(cfg.window.dim) {
                    *x = rng.gen_range(0.0..cfg.window.side);
                }
                Point::new(&c[..cfg.window.dim])
            }
            PercolationMode::LBox { .. } => cfg.window.center(),
        };
        let focal = if moving {
            Focal::Moving(simulate_trace(
                anchor,
                cfg.rate,
                cfg.law,
                -span,
                span,
                derive(focal_seed, Stream::Typical, 0),
            ))
        } else {
            Focal::Static(anchor)
        };
        Ok(MembershipSampler {
            world,
            focal,
            mode: cfg.mode,
            radius: cfg.radius,
            step: cfg.step,
            half_count: n,
            cache: vec![-1; (2 * n + 1) as usize],
            scratch: BfsScratch::new(),
        })
    }

    /// Sampler for the moving typical node.
    pub fn typical(cfg: &LimitConfig, seed: u64) -> Result<Self, LimitError> {
        Self::new(cfg, seed, true)
    }

    /// Sampler for a static origin in a fresh independent environment.
    pub fn static_copy(cfg: &LimitConfig, seed: u64) -> Result<Self, LimitError> {
        Self::new(cfg, seed, false)
    }

    pub fn half_count(&self) -> i64 {
        self.half_count
    }

    /// Membership at grid offset `k` in `[-n, n]`.
    pub fn member(&mut self, k: i64) -> Result<bool, LimitError> {
        assert!(k.abs() <= self.half_count);
        let idx = (k + self.half_count) as usize;
        if self.cache[idx] >= 0 {
            return Ok(self.cache[idx] == 1);
        }
        let t = k as f64 * self.step;
        let focal_pos = match &self.focal {
            Focal::Moving(tr) => self.world.window.wrap(&tr.position_at(t)),
            Focal::Static(p) => *p,
        };
        let mut snap = self.world.snapshot(t);
        // the box-percolation query never leaves the sup-norm l/2-ball of the
        // focal point, so nodes outside it cannot affect the answer; dropping
        // them keeps the graph build proportional to the box, not the window
        if let PercolationMode::LBox { l } = self.mode {
            let w = snap.window;
            let keep: Vec<Point> = snap
                .points()
                .iter()
                .filter(|p| w.sup_distance(p, &focal_pos) <= l / 2.0)
                .copied()
                .collect();
            snap = PointSet::new(keep, snap.intensity, w);
        }
        let g = SpatialGraph::build(snap, self.radius)?;
        let hit = g.percolation_membership(&focal_pos, self.mode, &mut self.scratch)?;
        self.cache[idx] = hit as i8;
        Ok(hit)
    }

    /// Full membership vector over the grid (eager evaluation).
    pub fn all(&mut self) -> Result<Vec<bool>, LimitError> {
        (-self.half_count..=self.half_count).map(|k| self.member(k)).collect()
    }
}

fn poisson_draw(mean: f64, seed: u64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    Poisson::new(mean).unwrap().sample(&mut rng) as u64
}

/// Poisson pmf, computed in log space.
pub fn poisson_pmf(n: u64, mean: f64) -> f64 {
    if mean <= 0.0 {
        return (n == 0) as u64 as f64;
    }
    let lk = -mean + n as f64 * mean.ln() - (1..=n).map(|i| (i as f64).ln()).sum::<f64>();
    lk.exp()
}

/// Smallest count whose upper Poisson tail falls below `tail`.
pub fn poisson_tail_cutoff(mean: f64, tail: f64) -> u64 {
    let mut cum = 0.0;
    let mut n = 0u64;
    while cum < 1.0 - tail && n < 10_000 {
        cum += poisson_pmf(n, mean);
        n += 1;
    }
    n
}

/// Interval length at grid center 0 of the intersection "typical node in
/// cluster AND static origin of some copy `j < n` in cluster", scanned
/// outward from the center so only the covered run (plus its two failing
/// fences) is ever evaluated. Static copies are created on first use and
/// OR-short-circuited; copy `j`'s seed depends only on `(replica_seed, j)`,
/// which makes the draw monotone in `n` under shared seeds.
pub fn conditional_ell(cfg: &LimitConfig, replica_seed: u64, n: u64) -> Result<f64, LimitError> {
    cfg.check()?;
    if n == 0 {
        return Ok(0.0);
    }
    let mut typ = MembershipSampler::typical(cfg, derive(replica_seed, Stream::Typical, 1))?;
    let mut copies: Vec<Option<MembershipSampler>> = (0..n as usize).map(|_| None).collect();
    let mut member = |k: i64, copies: &mut Vec<Option<MembershipSampler>>| -> Result<bool, LimitError> {
        if !typ.member(k)? {
            return Ok(false);
        }
        for j in 0..n as usize {
            if copies[j].is_none() {
                copies[j] = Some(MembershipSampler::static_copy(
                    cfg,
                    derive(replica_seed, Stream::StaticCopy, j as u64),
                )?);
            }
            if copies[j].as_mut().unwrap().member(k)? {
                return Ok(true);
            }
        }
        Ok(false)
    };
    if !member(0, &mut copies)? {
        return Ok(0.0);
    }
    let nmax = cfg.half_count();
    let mut hi = 0i64;
    while hi < nmax && member(hi + 1, &mut copies)? {
        hi += 1;
    }
    let mut lo = 0i64;
    while lo < nmax && member(-(lo + 1), &mut copies)? {
        lo += 1;
    }
    Ok((hi + lo) as f64 * cfg.step)
}

/// One unconditional draw: `N ~ Poisson(n_s)` independent static copies.
pub fn draw_i_o(cfg: &LimitConfig, replica_seed: u64) -> Result<LimitSample, LimitError> {
    let n = poisson_draw(cfg.n_s, derive(replica_seed, Stream::SinkCount, 0));
    let ell = conditional_ell(cfg, replica_seed, n)?;
    Ok(LimitSample { ell, sink_count: n })
}

/// Scalar summaries of one interval-length draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitStatistic {
    /// 1 when connected at time 0 with positive run length.
    Indicator,
    /// The interval length itself.
    Length,
    /// 1/length when positive (the reconnection-rate integrand), else 0.
    Reconnection,
}

impl LimitStatistic {
    pub fn apply(&self, ell: f64) -> f64 {
        match self {
            LimitStatistic::Indicator => (ell > 0.0) as u64 as f64,
            LimitStatistic::Length => ell,
            LimitStatistic::Reconnection => {
                if ell > 0.0 {
                    1.0 / ell
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LimitStatistic::Indicator => "f1_indicator",
            LimitStatistic::Length => "f2_length",
            LimitStatistic::Reconnection => "f3_reconnection",
        }
    }
}

/// All unconditional draws of one configuration, in replica order.
pub fn draw_samples(cfg: &LimitConfig) -> Result<Vec<LimitSample>, LimitError> {
    (0..cfg.replicas)
        .into_par_iter()
        .map(|rep| draw_i_o(cfg, derive(cfg.seed, Stream::Replica, rep)))
        .collect()
}

/// Dense regime: unconditional Monte Carlo mean of the statistic.
pub fn estimate_dense(cfg: &LimitConfig, stat: LimitStatistic) -> Result<EstimateWithError, LimitError> {
    let samples = draw_samples(cfg)?;
    let mut m = RunningMoments::new();
    for s in &samples {
        m.push(stat.apply(s.ell));
    }
    Ok(EstimateWithError::from_moments(&m))
}

/// One row of the sparse-regime conditional table.
#[derive(Debug, Clone, Copy)]
pub struct SparseRow {
    pub n: u64,
    pub mean: f64,
    pub std_error: f64,
    /// Poisson(n_s) weight of this sink count.
    pub weight: f64,
    pub replicas: u64,
}

/// Sparse regime: the limit is random through the sink count, so report the
/// conditional mean per count up to the Poisson tail cutoff, with weights.
pub fn estimate_sparse(cfg: &LimitConfig, stat: LimitStatistic) -> Result<Vec<SparseRow>, LimitError> {
    let n_max = poisson_tail_cutoff(cfg.n_s, 1e-4);
    (0..=n_max)
        .map(|n| {
            let vals: Vec<f64> = (0..cfg.replicas)
                .into_par_iter()
                .map(|rep| {
                    let rs = derive(cfg.seed, Stream::Replica, rep * (n_max + 1) + n);
                    conditional_ell(cfg, rs, n).map(|e| stat.apply(e))
                })
                .collect::<Result<_, _>>()?;
            let mut m = RunningMoments::new();
            vals.iter().for_each(|&v| m.push(v));
            Ok(SparseRow {
                n,
                mean: m.mean(),
                std_error: m.std_error(),
                weight: poisson_pmf(n, cfg.n_s),
                replicas: cfg.replicas,
            })
        })
        .collect()
}

/// Poisson mixture of a conditional table: should agree with the dense
/// unconditional mean (tower property).
pub fn poisson_mixture(rows: &[SparseRow]) -> f64 {
    rows.iter().map(|r| r.weight * r.mean).sum::<f64>()
}

/// Critical-regime estimate: the law of the Brownian-path functional
/// `∫ S''(count(t)) h(t) dt` where `count(t)` is the number of
/// unit-intensity sinks in the ball of radius `(n_s / |B_1|)^(1/d)` around a
/// standard Brownian motion at time t, and `S''(n)` is the dense-regime
/// conditional mean at sink count n.
#[derive(Debug, Clone)]
pub struct CriticalEstimate {
    pub samples: Vec<f64>,
    pub mean: f64,
    pub std_error: f64,
    /// The conditional-mean table S''(n), n = 0..=cutoff.
    pub s_table: Vec<SparseRow>,
}

/// Piecewise-linear weight function h on [0, 1] from a table; empty table
/// means h == 1.
pub fn weight_at(table: &[(f64, f64)], t: f64) -> f64 {
    if table.is_empty() {
        return 1.0;
    }
    match table.iter().position(|&(x, _)| x >= t) {
        Some(0) => table[0].1,
        None => table.last().unwrap().1,
        Some(i) => {
            let (x0, y0) = table[i - 1];
            let (x1, y1) = table[i];
            y0 + (y1 - y0) * (t - x0) / (x1 - x0)
        }
    }
}

/// One draw of the critical-regime path functional.
pub fn critical_draw(
    s_table: &[SparseRow],
    n_s: f64,
    dim: usize,
    path_steps: usize,
    h_table: &[(f64, f64)],
    seed: u64,
) -> f64 {
    let times: Vec<f64> = (0..path_steps).map(|i| (i as f64 + 0.5) / path_steps as f64).collect();
    let path = sample_brownian_path(dim, &times, derive(seed, Stream::Brownian, 0));
    let r_ball = critical_ball_radius(n_s, dim);
    // unit-intensity sinks on a box covering the path's r_ball-neighborhood
    let mut lo = [f64::INFINITY; crate::geometry::MAX_DIM];
    let mut hi = [f64::NEG_INFINITY; crate::geometry::MAX_DIM];
    for p in &path {
        for a in 0..dim {
            lo[a] = lo[a].min(p.coord(a));
            hi[a] = hi[a].max(p.coord(a));
        }
    }
    let mut volume = 1.0;
    for a in 0..dim {
        lo[a] -= r_ball;
        hi[a] += r_ball;
        volume *= hi[a] - lo[a];
    }
    let mut rng = ChaCha12Rng::seed_from_u64(derive(seed, Stream::Sinks, 0));
    let count = if volume > 0.0 {
        Poisson::new(volume).unwrap().sample(&mut rng) as usize
    } else {
        0
    };
    let sinks: Vec<Point> = (0..count)
        .map(|_| {
            let mut c = [0.0f64; crate::geometry::MAX_DIM];
            for a in 0..dim {
                c[a] = rng.gen_range(lo[a]..hi[a]);
            }
            Point::new(&c[..dim])
        })
        .collect();
    let lookup = |n: usize| -> f64 {
        let i = n.min(s_table.len() - 1);
        s_table[i].mean
    };
    let mut acc = 0.0;
    for (w, &t) in path.iter().zip(&times) {
        let n_in = sinks
            .iter()
            .filter(|s| {
                (0..dim).map(|a| (s.coord(a) - w.coord(a)).powi(2)).sum::<f64>().sqrt() <= r_ball
            })
            .count();
        acc += lookup(n_in) * weight_at(h_table, t);
    }
    acc / path_steps as f64
}

/// Critical regime end to end: build the conditional table, then sample the
/// Brownian-modulated path functional.
pub fn estimate_critical(
    cfg: &LimitConfig,
    stat: LimitStatistic,
    path_steps: usize,
    h_table: &[(f64, f64)],
) -> Result<CriticalEstimate, LimitError> {
    let s_table = estimate_sparse(cfg, stat)?;
    let samples: Vec<f64> = (0..cfg.replicas)
        .into_par_iter()
        .map(|rep| {
            critical_draw(
                &s_table,
                cfg.n_s,
                cfg.window.dim,
                path_steps,
                h_table,
                derive(cfg.seed, Stream::Brownian, rep),
            )
        })
        .collect();
    let mut m = RunningMoments::new();
    samples.iter().for_each(|&v| m.push(v));
    Ok(CriticalEstimate { samples, mean: m.mean(), std_error: m.std_error(), s_table })
}

/// One row of the dense-regime sweep over expected in-range sink counts.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub n_s: f64,
    pub statistic: &'static str,
    pub mean: f64,
    pub std_error: f64,
    pub replicas: u64,
}

/// Dense-regime statistic curves over an `n_s` grid; each grid point reuses
/// one set of draws for all statistics.
pub fn figure2_sweep(
    cfg: &LimitConfig,
    n_s_grid: &[f64],
    stats: &[LimitStatistic],
) -> Result<Vec<SweepRow>, LimitError> {
    let mut rows = Vec::new();
    for (i, &n_s) in n_s_grid.iter().enumerate() {
        let mut c = *cfg;
        c.n_s = n_s;
        c.seed = derive(cfg.seed, Stream::SinkCount, i as u64 + 1);
        let samples = draw_samples(&c)?;
        for stat in stats {
            let mut m = RunningMoments::new();
            for s in &samples {
                m.push(stat.apply(s.ell));
            }
            rows.push(SweepRow {
                n_s,
                statistic: stat.name(),
                mean: m.mean(),
                std_error: m.std_error(),
                replicas: c.replicas,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Boundary;
    use crate::stats::covariance_with_error;

    fn test_cfg() -> LimitConfig {
        LimitConfig {
            regime: Regime::Dense,
            n_s: 2.0,
            mode: PercolationMode::LBox { l: 4.0 },
            step: 0.25,
            max_extent: 1.5,
            intensity: 1.8,
            radius: 1.0,
            law: WaypointLaw::FixedJump(1.0),
            rate: 1.0,
            window: Window::new(2, 10.0, Boundary::Periodic).unwrap(),
            replicas: 50,
            seed: 12345,
        }
    }

    #[test]
    fn zero_intensity_all_false() {
        let mut cfg = test_cfg();
        cfg.intensity = 0.0;
        let mut s = MembershipSampler::typical(&cfg, 3).unwrap();
        assert!(s.all().unwrap().iter().all(|&b| !b));
        assert_eq!(draw_i_o(&cfg, 9).unwrap().ell, 0.0);
    }

    #[test]
    fn frozen_world_constant_membership() {
        let mut cfg = test_cfg();
        cfg.rate = 1e-9;
        for seed in 0..5 {
            let mut s = MembershipSampler::static_copy(&cfg, seed).unwrap();
            let v = s.all().unwrap();
            assert!(v.iter().all(|&b| b == v[0]), "seed {seed}");
        }
    }

    #[test]
    fn zero_copies_zero_length() {
        let cfg = test_cfg();
        assert_eq!(conditional_ell(&cfg, 7, 0).unwrap(), 0.0);
    }

    #[test]
    fn support_bound() {
        let cfg = test_cfg();
        for rep in 0..40 {
            let s = draw_i_o(&cfg, derive(cfg.seed, Stream::Replica, rep)).unwrap();
            assert!(s.ell >= 0.0 && s.ell <= cfg.max_ell() + 1e-12);
        }
    }

    #[test]
    fn coupling_monotone_in_copies() {
        let cfg = test_cfg();
        for rep in 0..60u64 {
            let rs = derive(cfg.seed, Stream::Replica, rep);
            let mut prev = 0.0;
            for n in [0, 1, 2, 4] {
                let e = conditional_ell(&cfg, rs, n).unwrap();
                assert!(e >= prev - 1e-12, "rep {rep} n {n}: {e} < {prev}");
                prev = e;
            }
        }
    }

    #[test]
    fn marginal_frequency_matches_theta() {
        let cfg = test_cfg();
        let mode = cfg.mode;
        // membership frequency at scattered grid points across replicas
        let mut hits = 0u64;
        let mut total = 0u64;
        for seed in 0..150u64 {
            let mut s = MembershipSampler::typical(&cfg, derive(cfg.seed, Stream::Replica, seed)).unwrap();
            hits += s.member(((seed % 13) as i64) - 6).unwrap() as u64;
            total += 1;
        }
        let freq = hits as f64 / total as f64;
        let theta = crate::estimators::estimate_theta(
            cfg.intensity,
            cfg.radius,
            cfg.window,
            mode,
            400,
            999,
        )
        .unwrap();
        let se = (freq * (1.0 - freq) / total as f64).sqrt().hypot(theta.std_error);
        assert!(
            (freq - theta.value).abs() <= 3.0 * se + 1e-9,
            "freq {freq} theta {}",
            theta.value
        );
    }

    #[test]
    fn copies_are_independent() {
        let cfg = test_cfg();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for rep in 0..120u64 {
            let rs = derive(cfg.seed, Stream::Replica, rep);
            let mut c0 = MembershipSampler::static_copy(&cfg, derive(rs, Stream::StaticCopy, 0)).unwrap();
            let mut c1 = MembershipSampler::static_copy(&cfg, derive(rs, Stream::StaticCopy, 1)).unwrap();
            a.push(c0.member(0).unwrap() as u64 as f64);
            b.push(c1.member(0).unwrap() as u64 as f64);
        }
        let c = covariance_with_error(&a, &b);
        assert!(c.value.abs() <= 3.0 * c.std_error + 1e-9, "cov {}", c.value);
    }

    #[test]
    fn tower_property_light() {
        let mut cfg = test_cfg();
        cfg.n_s = 1.0;
        cfg.replicas = 120;
        let dense = estimate_dense(&cfg, LimitStatistic::Indicator).unwrap();
        let rows = estimate_sparse(&cfg, LimitStatistic::Indicator).unwrap();
        let mixed = poisson_mixture(&rows);
        let se_mix: f64 = rows
            .iter()
            .map(|r| (r.weight * r.std_error).powi(2))
            .sum::<f64>()
            .sqrt();
        let se = dense.std_error.hypot(se_mix);
        assert!((dense.value - mixed).abs() <= 3.0 * se, "dense {} mixed {mixed}", dense.value);
    }

    #[test]
    fn poisson_helpers() {
        // pmf sums to ~1 up to the cutoff
        let mean = 2.5;
        let cut = poisson_tail_cutoff(mean, 1e-4);
        let total: f64 = (0..=cut).map(|n| poisson_pmf(n, mean)).sum();
        assert!(total > 1.0 - 2e-4 && total <= 1.0 + 1e-12);
        assert_eq!(poisson_pmf(0, 0.0), 1.0);
    }

    #[test]
    fn critical_degenerates_at_tiny_ball() {
        // n_s' -> 0: no sinks ever in range, so the functional is S''(0) * ∫h
        let rows = vec![
            SparseRow { n: 0, mean: 0.0, std_error: 0.0, weight: 1.0, replicas: 1 },
            SparseRow { n: 1, mean: 0.7, std_error: 0.0, weight: 0.0, replicas: 1 },
        ];
        let v = critical_draw(&rows, 1e-12, 2, 16, &[], 5);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn critical_sink_count_poisson_marginal_light() {
        // counts at a fixed path time follow Poisson(n_s)
        let n_s = 2.0;
        let rows = vec![SparseRow { n: 0, mean: 0.0, std_error: 0.0, weight: 1.0, replicas: 1 }];
        // use the draw machinery indirectly: test the count by re-deriving it
        let dim = 2;
        let r_ball = critical_ball_radius(n_s, dim);
        let mut m = RunningMoments::new();
        for seed in 0..800u64 {
            let times = [0.5];
            let path = sample_brownian_path(dim, &times, derive(seed, Stream::Brownian, 0));
            let w = path[0];
            let mut rng = ChaCha12Rng::seed_from_u64(derive(seed, Stream::Sinks, 0));
            let volume = (2.0 * r_ball).powi(2);
            let count = Poisson::new(volume).unwrap().sample(&mut rng) as usize;
            let n_in = (0..count)
                .map(|_| {
                    let x = rng.gen_range(-r_ball..r_ball) + w.coord(0);
                    let y = rng.gen_range(-r_ball..r_ball) + w.coord(1);
                    ((x - w.coord(0)).powi(2) + (y - w.coord(1)).powi(2)).sqrt()
                })
                .filter(|&d| d <= r_ball)
                .count();
            m.push(n_in as f64);
        }
        // mean and variance of Poisson(n_s)
        assert!((m.mean() - n_s).abs() < 4.0 * m.std_error());
        assert!((m.variance() - n_s).abs() < 0.35, "var {}", m.variance());
        let _ = rows;
    }

    #[test]
    fn weight_table_interpolates() {
        assert_eq!(weight_at(&[], 0.3), 1.0);
        let t = [(0.0, 0.0), (1.0, 2.0)];
        assert!((weight_at(&t, 0.5) - 1.0).abs() < 1e-12);
        assert_eq!(weight_at(&t, -0.5), 0.0);
        assert_eq!(weight_at(&t, 1.5), 2.0);
    }

    #[test]
    fn sweep_rows_shape_and_zero_case() {
        let mut cfg = test_cfg();
        cfg.replicas = 30;
        let rows = figure2_sweep(&cfg, &[0.0, 1.0], &[LimitStatistic::Indicator, LimitStatistic::Length]).unwrap();
        assert_eq!(rows.len(), 4);
        // n_s = 0: no sinks, everything zero
        assert!(rows.iter().filter(|r| r.n_s == 0.0).all(|r| r.mean == 0.0));
    }

    #[test]
    fn determinism() {
        let cfg = test_cfg();
        let a = draw_samples(&cfg).unwrap();
        let b = draw_samples(&cfg).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.ell, y.ell);
            assert_eq!(x.sink_count, y.sink_count);
        }
    }
}
