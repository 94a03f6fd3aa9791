//! Event-driven computation of the connectivity time sets of a typical node
//! over a finite horizon, the connection-interval measure built from them,
//! and weighted statistics of that measure.
//!
//! Between jump events the geometry is frozen, so connectivity changes only
//! at the finitely many jump times; the time sets are exact interval unions.

use crate::geometry::{sample_ppp, Boundary, GeometryError, GridIndex, Point, PointSet, Window, MAX_DIM};
use crate::graph::GraphError;
use crate::intervals::{discretized_length, IntervalSet, TimeGrid};
use crate::mobility::{simulate_trace, NodeTrace, WaypointLaw};
use crate::seed::{derive, Stream};
use crate::stats::{covariance_with_error, EstimateWithError};
use rayon::prelude::*;
use std::collections::VecDeque;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TimelineError {
    #[error("horizon is empty or inverted: [{0}, {1}]")]
    EmptyHorizon(f64, f64),
    #[error("box side {l} needs a periodic window wider than {l}, got {side}")]
    BoxTooLarge { l: f64, side: f64 },
    #[error("custom statistics need a finite truncation cap")]
    UnboundedStatistic,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parameters of one dynamic-connectivity scenario.
#[derive(Debug, Clone, Copy)]
pub struct ConnectivityConfig {
    /// Hop budget: typical node -> at most k radius-edges -> sink.
    pub k: u32,
    /// Finite-range box side for infinite-cluster surrogates, when used.
    pub l_box: Option<f64>,
    pub node_intensity: f64,
    pub radius: f64,
    pub sink_intensity: f64,
    /// Measure horizon T; connectivity sets live on [0, T] unless a wider
    /// simulation span is requested.
    pub horizon: f64,
    pub rate: f64,
    pub law: WaypointLaw,
    pub window: Window,
}

/// One realized scenario: a typical node anchored at the window center at
/// time zero, mobile relay nodes, and static sinks, all on a shared window.
#[derive(Debug, Clone)]
pub struct World {
    pub typical: NodeTrace,
    pub nodes: Vec<NodeTrace>,
    pub sinks: PointSet,
    pub window: Window,
    pub t_lo: f64,
    pub t_hi: f64,
}

/// Simulates a world over `[t_lo, t_hi]` (which must contain 0).
pub fn simulate_world(
    cfg: &ConnectivityConfig,
    t_lo: f64,
    t_hi: f64,
    seed: u64,
) -> Result<World, TimelineError> {
    if !(t_lo < t_hi) {
        return Err(TimelineError::EmptyHorizon(t_lo, t_hi));
    }
    let starts = sample_ppp(cfg.node_intensity, cfg.window, derive(seed, Stream::Nodes, 0))?;
    let nodes = starts
        .points()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            simulate_trace(p, cfg.rate, cfg.law, t_lo, t_hi, derive(seed, Stream::Nodes, i as u64 + 1))
        })
        .collect();
    let typical = simulate_trace(
        cfg.window.center(),
        cfg.rate,
        cfg.law,
        t_lo,
        t_hi,
        derive(seed, Stream::Typical, 0),
    );
    let sinks = sample_ppp(cfg.sink_intensity, cfg.window, derive(seed, Stream::Sinks, 0))?;
    Ok(World { typical, nodes, sinks, window: cfg.window, t_lo, t_hi })
}

/// Moving points bucketed on a fixed cell grid; supports point moves and
/// radius queries up to the build radius.
struct DynamicSpatial {
    window: Window,
    cells_per_side: usize,
    cell_edge: f64,
    buckets: Vec<Vec<u32>>,
    pos: Vec<Point>,
}

impl DynamicSpatial {
    fn new(points: Vec<Point>, window: Window, radius: f64) -> Self {
        let cells_per_side = ((window.side / radius).floor() as usize).max(1);
        let cell_edge = window.side / cells_per_side as f64;
        let buckets = vec![Vec::new(); cells_per_side.pow(window.dim as u32)];
        let mut s = DynamicSpatial { window, cells_per_side, cell_edge, buckets, pos: Vec::new() };
        for p in points {
            let b = s.bucket_of(&p);
            s.buckets[b].push(s.pos.len() as u32);
            s.pos.push(p);
        }
        s
    }

    fn bucket_of(&self, p: &Point) -> usize {
        let mut b = 0usize;
        for a in 0..self.window.dim {
            let c = ((p.coord(a) / self.cell_edge) as usize).min(self.cells_per_side - 1);
            b = b * self.cells_per_side + c;
        }
        b
    }

    fn move_point(&mut self, i: u32, new_pos: Point) {
        let old_b = self.bucket_of(&self.pos[i as usize]);
        let new_b = self.bucket_of(&new_pos);
        self.pos[i as usize] = new_pos;
        if old_b != new_b {
            let slot = self.buckets[old_b].iter().position(|&j| j == i).unwrap();
            self.buckets[old_b].swap_remove(slot);
            self.buckets[new_b].push(i);
        }
    }

    /// Indices within Euclidean distance `r <= build radius` of `center`.
    fn neighbors_within(&self, center: &Point, r: f64, out: &mut Vec<u32>) {
        out.clear();
        if self.cells_per_side < 3 {
            for (i, p) in self.pos.iter().enumerate() {
                if self.window.distance(center, p) <= r {
                    out.push(i as u32);
                }
            }
            return;
        }
        debug_assert!(r <= self.cell_edge + 1e-12);
        let dim = self.window.dim;
        let n = self.cells_per_side as isize;
        let mut base = [0isize; MAX_DIM];
        for a in 0..dim {
            base[a] = ((center.coord(a) / self.cell_edge) as isize).min(n - 1);
        }
        let total = 3usize.pow(dim as u32);
        'combos: for combo in 0..total {
            let mut b = 0usize;
            let mut rem = combo;
            for a in 0..dim {
                let off = (rem % 3) as isize - 1;
                rem /= 3;
                let mut c = base[a] + off;
                match self.window.boundary {
                    Boundary::Periodic => c = c.rem_euclid(n),
                    Boundary::Open => {
                        if c < 0 || c >= n {
                            continue 'combos;
                        }
                    }
                }
                b = b * self.cells_per_side + c as usize;
            }
            for &i in &self.buckets[b] {
                if self.window.distance(center, &self.pos[i as usize]) <= r {
                    out.push(i);
                }
            }
        }
    }
}

/// Stamp-based visited set reused across events.
#[derive(Default)]
struct Visits {
    stamp: u32,
    stamps: Vec<u32>,
}

impl Visits {
    fn reset(&mut self, n: usize) {
        if self.stamps.len() < n {
            self.stamps.resize(n, 0);
        }
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.stamps.iter_mut().for_each(|s| *s = 0);
            self.stamp = 1;
        }
    }

    fn first_visit(&mut self, i: u32) -> bool {
        if self.stamps[i as usize] == self.stamp {
            false
        } else {
            self.stamps[i as usize] = self.stamp;
            true
        }
    }
}

/// Truncated BFS: can the typical node reach any sink through at most `k`
/// radius-edges of mobile nodes (sinks never relay)?
fn k_hop_any(
    dynamics: &DynamicSpatial,
    typical: &Point,
    sinks: &[Point],
    sink_grid: &GridIndex,
    k: u32,
    radius: f64,
    visits: &mut Visits,
    queue: &mut VecDeque<(u32, u32)>,
    probe: &mut Vec<u32>,
) -> Result<bool, TimelineError> {
    let w = &dynamics.window;
    sink_grid.neighbors_within(sinks, w, typical, radius, probe).map_err(GeometryError::from)?;
    if !probe.is_empty() {
        return Ok(true);
    }
    visits.reset(dynamics.pos.len());
    queue.clear();
    dynamics.neighbors_within(typical, radius, probe);
    for &i in probe.iter() {
        if visits.first_visit(i) {
            queue.push_back((i, 1));
        }
    }
    while let Some((v, d)) = queue.pop_front() {
        let p = dynamics.pos[v as usize];
        if d + 1 <= k {
            sink_grid.neighbors_within(sinks, w, &p, radius, probe).map_err(GeometryError::from)?;
            if !probe.is_empty() {
                return Ok(true);
            }
        }
        if d + 1 < k {
            dynamics.neighbors_within(&p, radius, probe);
            for &u in probe.iter() {
                if visits.first_visit(u) {
                    queue.push_back((u, d + 1));
                }
            }
        }
    }
    Ok(false)
}

/// Restricted BFS: does `x` connect, through nodes in its sup-norm `l`-box,
/// to a node at sup distance at least `l/2 - radius`?
fn percolates_dyn(
    dynamics: &DynamicSpatial,
    x: &Point,
    l: f64,
    radius: f64,
    visits: &mut Visits,
    queue: &mut VecDeque<u32>,
    probe: &mut Vec<u32>,
) -> bool {
    let w = &dynamics.window;
    let half = l / 2.0;
    let goal = half - radius;
    visits.reset(dynamics.pos.len());
    queue.clear();
    dynamics.neighbors_within(x, radius, probe);
    for &i in probe.iter() {
        if w.sup_distance(&dynamics.pos[i as usize], x) <= half && visits.first_visit(i) {
            queue.push_back(i);
        }
    }
    while let Some(v) = queue.pop_front() {
        let p = dynamics.pos[v as usize];
        if w.sup_distance(&p, x) >= goal {
            return true;
        }
        dynamics.neighbors_within(&p, radius, probe);
        for &u in probe.iter() {
            if w.sup_distance(&dynamics.pos[u as usize], x) <= half && visits.first_visit(u) {
                queue.push_back(u);
            }
        }
    }
    false
}

/// A jump event: `actor == usize::MAX` is the typical node.
fn event_schedule(world: &World) -> Vec<(f64, usize)> {
    let mut ev: Vec<(f64, usize)> =
        world.typical.jump_times().iter().map(|&t| (t, usize::MAX)).collect();
    for (i, tr) in world.nodes.iter().enumerate() {
        ev.extend(tr.jump_times().iter().map(|&t| (t, i)));
    }
    ev.sort_by(|a, b| a.0.total_cmp(&b.0));
    ev
}

fn wrapped(world: &World, tr: &NodeTrace, t: f64) -> Point {
    world.window.wrap(&tr.position_at(t))
}

/// Shared event-loop driver: walks the schedule, keeps the dynamic grid in
/// sync, and records the intervals where `state` holds. `refresh` is called
/// with the event context and decides/recomputes the state.
fn drive_events<F>(world: &World, radius: f64, mut refresh: F) -> IntervalSet
where
    F: FnMut(&DynamicSpatial, &Point, Option<(usize, Point, Point)>, bool) -> bool,
{
    let positions: Vec<Point> =
        world.nodes.iter().map(|tr| wrapped(world, tr, world.t_lo)).collect();
    let mut dynamics = DynamicSpatial::new(positions, world.window, radius);
    let mut typical_pos = wrapped(world, &world.typical, world.t_lo);
    let mut state = refresh(&dynamics, &typical_pos, None, true);
    let mut xi = IntervalSet::new();
    let mut seg_start = world.t_lo;
    let close_segment = |state: bool, from: f64, to: f64, xi: &mut IntervalSet| {
        if state && to > from {
            xi.push(from, to);
        }
    };
    for (t, actor) in event_schedule(world) {
        let forced;
        let moved;
        if actor == usize::MAX {
            let new_pos = wrapped(world, &world.typical, t);
            typical_pos = new_pos;
            forced = true;
            moved = None;
        } else {
            let old = dynamics.pos[actor];
            let new_pos = wrapped(world, &world.nodes[actor], t);
            dynamics.move_point(actor as u32, new_pos);
            forced = false;
            moved = Some((actor, old, new_pos));
        }
        let new_state = refresh(&dynamics, &typical_pos, moved, forced);
        if new_state != state {
            close_segment(state, seg_start, t, &mut xi);
            seg_start = t;
            state = new_state;
        }
    }
    close_segment(state, seg_start, world.t_hi, &mut xi);
    xi
}

/// Times in `[t_lo, t_hi]` when the typical node has a k-hop connection to
/// some sink (hand-overs between sinks allowed). With `incremental`, node
/// jumps entirely outside the typical node's k-hop reach skip the
/// connectivity recomputation; this is exact because a path of at most `k`
/// edges never leaves the `k * radius` ball around the typical node.
pub fn compute_xi_k(
    world: &World,
    cfg: &ConnectivityConfig,
    incremental: bool,
) -> Result<IntervalSet, TimelineError> {
    let r = cfg.radius;
    let sink_grid = GridIndex::build(world.sinks.points(), &world.window, r);
    let mut visits = Visits::default();
    let mut queue = VecDeque::new();
    let mut probe = Vec::new();
    let reach = cfg.k as f64 * r + 1e-9;
    let mut err = None;
    let mut current = false;
    let xi = drive_events(world, r, |dynamics, typical_pos, moved, forced| {
        if err.is_some() {
            return current;
        }
        if incremental && !forced {
            if let Some((_, old, new)) = moved {
                let w = &dynamics.window;
                if w.distance(&old, typical_pos) > reach && w.distance(&new, typical_pos) > reach {
                    return current;
                }
            }
        }
        match k_hop_any(
            dynamics,
            typical_pos,
            world.sinks.points(),
            &sink_grid,
            cfg.k,
            r,
            &mut visits,
            &mut queue,
            &mut probe,
        ) {
            Ok(s) => {
                current = s;
                s
            }
            Err(e) => {
                err = Some(e);
                current
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(xi),
    }
}

/// Per-sink connection sets: entry `j` holds the times when sink `j` alone
/// is k-hop reachable. Their union equals [`compute_xi_k`] (hand-over
/// closure). Full recompute at every event; intended for small instances.
pub fn compute_xi_k_per_sink(
    world: &World,
    cfg: &ConnectivityConfig,
) -> Result<Vec<IntervalSet>, TimelineError> {
    (0..world.sinks.len())
        .map(|j| {
            let one = PointSet::new(
                vec![world.sinks.points()[j]],
                world.sinks.intensity,
                world.window,
            );
            let sub = World {
                typical: world.typical.clone(),
                nodes: world.nodes.clone(),
                sinks: one,
                window: world.window,
                t_lo: world.t_lo,
                t_hi: world.t_hi,
            };
            compute_xi_k(&sub, cfg, false)
        })
        .collect()
}

/// The sinks within range of the typical node at one instant: the relevant
/// family for finite-range percolation events.
#[derive(Debug, Clone)]
pub struct RelevantSinks {
    pub indices: Vec<usize>,
    pub positions: Vec<Point>,
    /// Selection radius (raw units, typically k/mu in radius units).
    pub range: f64,
    /// Instant the selection was made at.
    pub at_time: f64,
}

pub fn relevant_sinks(world: &World, at_time: f64, range: f64) -> RelevantSinks {
    let x0 = wrapped(world, &world.typical, at_time);
    let mut indices = Vec::new();
    let mut positions = Vec::new();
    for (j, p) in world.sinks.points().iter().enumerate() {
        if world.window.distance(&x0, p) <= range {
            indices.push(j);
            positions.push(*p);
        }
    }
    RelevantSinks { indices, positions, range, at_time }
}

/// Times when both the typical node and at least one relevant sink
/// percolate beyond their sup-norm `l`-boxes through the mobile nodes.
/// Per-endpoint percolation states are cached and refreshed only when a
/// jump lands within reach of the endpoint's box.
pub fn compute_xi_l(
    world: &World,
    relevant: &RelevantSinks,
    l: f64,
    cfg: &ConnectivityConfig,
) -> Result<IntervalSet, TimelineError> {
    if world.window.boundary == Boundary::Periodic && l >= world.window.side {
        return Err(TimelineError::BoxTooLarge { l, side: world.window.side });
    }
    let r = cfg.radius;
    let reach = l / 2.0 + r + 1e-9;
    let mut visits = Visits::default();
    let mut queue = VecDeque::new();
    let mut probe = Vec::new();
    let mut typical_ok = false;
    let mut sink_ok: Vec<bool> = vec![false; relevant.positions.len()];
    let sup = |w: &Window, a: &Point, b: &Point| w.sup_distance(a, b);
    let xi = drive_events(world, r, |dynamics, typical_pos, moved, forced| {
        let w = &dynamics.window;
        let affects = |center: &Point| -> bool {
            match moved {
                None => true,
                Some((_, old, new)) => {
                    sup(w, &old, center) <= reach || sup(w, &new, center) <= reach
                }
            }
        };
        if forced || affects(typical_pos) {
            typical_ok =
                percolates_dyn(dynamics, typical_pos, l, r, &mut visits, &mut queue, &mut probe);
        }
        for (j, p) in relevant.positions.iter().enumerate() {
            if moved.is_none() || affects(p) {
                sink_ok[j] =
                    percolates_dyn(dynamics, p, l, r, &mut visits, &mut queue, &mut probe);
            }
        }
        typical_ok && sink_ok.iter().any(|&s| s)
    });
    Ok(xi)
}

/// One atom of the connection-interval measure: a connection component of
/// length `ell` occupying normalized times `[t_lo, t_hi]` with mass `weight`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureSample {
    pub ell: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub weight: f64,
}

/// Exact piecewise representation of the connection-interval measure over
/// `[0, horizon]`: total mass equals the connected-time fraction.
#[derive(Debug, Clone)]
pub struct IntervalMeasure {
    pub samples: Vec<MeasureSample>,
    pub horizon: f64,
}

impl IntervalMeasure {
    pub fn total_weight(&self) -> f64 {
        self.samples.iter().map(|s| s.weight).sum()
    }
}

/// Builds the measure from a connection set: each component `[a, b]` of
/// `xi ∩ [0, T]` contributes one sample with `ell = b - a` (clipped length
/// for boundary components) and weight `(b - a) / T`.
pub fn build_measure(xi: &IntervalSet, horizon: f64) -> IntervalMeasure {
    assert!(horizon > 0.0);
    let clipped = xi.truncate(0.0, horizon);
    let samples = clipped
        .intervals()
        .iter()
        .filter(|&&(a, b)| b > a)
        .map(|&(a, b)| MeasureSample {
            ell: b - a,
            t_lo: a / horizon,
            t_hi: b / horizon,
            weight: (b - a) / horizon,
        })
        .collect();
    IntervalMeasure { samples, horizon }
}

/// Statistics integrated against the measure.
pub enum Statistic<'a> {
    /// Indicator of being connected: the connected-time fraction.
    ConnectedFraction,
    /// Interval length, truncated at `cap` (infinite cap allowed only on
    /// finite horizons where lengths are bounded anyway).
    IntervalLength { cap: f64 },
    /// Reciprocal length: horizon times this is the connection-interval
    /// count (boundary-clipped components contribute fractionally).
    ReconnectionRate,
    /// Bounded custom integrand of (length, normalized time); lengths are
    /// truncated at `cap` before evaluation, the time integral uses midpoint
    /// quadrature at `step` (normalized units).
    Custom { f: &'a dyn Fn(f64, f64) -> f64, cap: f64, step: f64 },
}

/// Integrates `f` against the measure: sum over components of
/// `∫ f(ell, s/T) ds / T`.
pub fn evaluate_statistic(m: &IntervalMeasure, stat: &Statistic) -> Result<f64, TimelineError> {
    match *stat {
        Statistic::ConnectedFraction => Ok(m.total_weight()),
        Statistic::IntervalLength { cap } => {
            Ok(m.samples.iter().map(|s| s.ell.min(cap) * s.weight).sum())
        }
        Statistic::ReconnectionRate => {
            Ok(m.samples.iter().filter(|s| s.ell > 0.0).map(|s| s.weight / s.ell).sum())
        }
        Statistic::Custom { f, cap, step } => {
            if !cap.is_finite() || !(step > 0.0) {
                return Err(TimelineError::UnboundedStatistic);
            }
            let mut acc = 0.0;
            for s in &m.samples {
                let ell = s.ell.min(cap);
                let span = s.t_hi - s.t_lo;
                let n = ((span / step).ceil() as usize).max(1);
                let h = span / n as f64;
                for i in 0..n {
                    let t = s.t_lo + (i as f64 + 0.5) * h;
                    acc += f(ell, t) * h;
                }
            }
            Ok(acc)
        }
    }
}

/// Writes per-replica measure rows: `replica, component_start,
/// component_end, ell, weight` (times raw, not normalized).
pub fn write_measure_csv<W: Write>(
    out: &mut W,
    replica: u64,
    m: &IntervalMeasure,
) -> Result<(), TimelineError> {
    for s in &m.samples {
        writeln!(
            out,
            "{replica},{:.9},{:.9},{:.9},{:.9}",
            s.t_lo * m.horizon,
            s.t_hi * m.horizon,
            s.ell,
            s.weight
        )?;
    }
    Ok(())
}

/// Finite-range discretized interval length read off the world at grid
/// center `t`: length of the covered grid run of `xi_k` (intersected with
/// the L-box set for the sinks relevant at `t`, when configured).
pub fn discretized_interval_at(
    world: &World,
    cfg: &ConnectivityConfig,
    xi_k: &IntervalSet,
    center: f64,
    step: f64,
    max_extent: f64,
    relevant_range: f64,
) -> Result<f64, TimelineError> {
    let grid = TimeGrid { center, step, max_extent };
    let set = match cfg.l_box {
        None => xi_k.clone(),
        Some(l) => {
            let rel = relevant_sinks(world, center, relevant_range);
            xi_k.intersect(&compute_xi_l(world, &rel, l, cfg)?)
        }
    };
    Ok(discretized_length(|t| set.contains(t), &grid))
}

/// Covariance across replicas of `g(ell at time 0)` and `g(ell at time
/// t_frac * T)` with `g = min(ell, M) / M`: a decorrelation diagnostic that
/// should shrink toward zero as the horizon grows.
#[allow(clippy::too_many_arguments)]
pub fn decorrelation_diagnostic(
    cfg: &ConnectivityConfig,
    step: f64,
    max_extent: f64,
    t_frac: f64,
    relevant_range: f64,
    replicas: u64,
    seed: u64,
) -> Result<EstimateWithError, TimelineError> {
    assert!(t_frac > 0.0 && t_frac <= 1.0);
    let t1 = t_frac * cfg.horizon;
    let pairs: Vec<(f64, f64)> = (0..replicas)
        .into_par_iter()
        .map(|rep| -> Result<(f64, f64), TimelineError> {
            let rep_seed = derive(seed, Stream::Replica, rep);
            let world = simulate_world(cfg, -max_extent, t1 + max_extent, rep_seed)?;
            let xi = compute_xi_k(&world, cfg, true)?;
            let g = |ell: f64| ell.min(max_extent) / max_extent;
            let e0 =
                discretized_interval_at(&world, cfg, &xi, 0.0, step, max_extent, relevant_range)?;
            let e1 =
                discretized_interval_at(&world, cfg, &xi, t1, step, max_extent, relevant_range)?;
            Ok((g(e0), g(e1)))
        })
        .collect::<Result<_, _>>()?;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    Ok(covariance_with_error(&xs, &ys))
}
