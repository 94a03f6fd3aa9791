//! Gilbert-graph construction, components, hop distances, and the
//! finite-range percolation events that stand in for infinite-cluster
//! membership.

use crate::geometry::{GeometryError, GridIndex, Point, PointSet, Window};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex index {0} out of range")]
    InvalidVertex(usize),
    #[error("hop budget must be at least 1")]
    ZeroHopBudget,
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("box side {l} does not fit the window (side {side})")]
    BoxTooLarge { l: f64, side: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Disjoint-set forest with path compression and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[x as usize] != root {
            let next = self.parent[x as usize];
            self.parent[x as usize] = root;
            x = next;
        }
        root
    }

    pub fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
    }

    pub fn size_of(&mut self, x: u32) -> u32 {
        let r = self.find(x);
        self.size[r as usize]
    }
}

/// Summary of the component structure of a [`SpatialGraph`].
#[derive(Debug, Clone, Copy)]
pub struct ClusterStats {
    pub largest_size: usize,
    /// Largest axis-aligned extent of the largest component (raw coordinates).
    pub largest_extent: f64,
    /// Fraction of vertices in the largest component.
    pub theta_hat: f64,
}

/// How "connected to the infinite cluster" is approximated on a finite window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PercolationMode {
    /// Percolates beyond the sup-norm box `Q_l` centered at the query point.
    LBox { l: f64 },
    /// Connects (within one radius) to the largest component of the window.
    WindowGiant,
}

/// Radius-r adjacency over a point set, with components precomputed.
#[derive(Debug, Clone)]
pub struct SpatialGraph {
    ps: PointSet,
    pub radius: f64,
    adj_offsets: Vec<u32>,
    adj_targets: Vec<u32>,
    labels: Vec<u32>,
    largest_root: Option<u32>,
    largest_size: usize,
    index: GridIndex,
}

/// Reusable BFS scratch space (visited stamps avoid per-call clearing).
#[derive(Debug, Default)]
pub struct BfsScratch {
    stamp: u32,
    stamps: Vec<u32>,
    depth: Vec<u32>,
    queue: VecDeque<u32>,
    start: Vec<u32>,
}

impl BfsScratch {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset(&mut self, n: usize) {
        if self.stamps.len() < n {
            self.stamps.resize(n, 0);
            self.depth.resize(n, 0);
        }
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.stamps.iter_mut().for_each(|s| *s = 0);
            self.stamp = 1;
        }
        self.queue.clear();
    }

    fn visit(&mut self, v: u32, d: u32) -> bool {
        if self.stamps[v as usize] == self.stamp {
            return false;
        }
        self.stamps[v as usize] = self.stamp;
        self.depth[v as usize] = d;
        self.queue.push_back(v);
        true
    }
}

impl SpatialGraph {
    /// Builds adjacency (distance <= radius, closed ball) and labels
    /// components with union-find.
    pub fn build(ps: PointSet, radius: f64) -> Result<SpatialGraph, GraphError> {
        assert!(radius > 0.0);
        let window = ps.window;
        let index = GridIndex::build(ps.points(), &window, radius);
        let n = ps.len();
        let mut neigh = Vec::new();
        let mut adj_offsets = Vec::with_capacity(n + 1);
        let mut adj_targets = Vec::new();
        let mut uf = UnionFind::new(n);
        adj_offsets.push(0u32);
        for i in 0..n {
            neigh.clear();
            index.neighbors_within(ps.points(), &window, &ps.points()[i], radius, &mut neigh)?;
            for &j in &neigh {
                if j as usize != i {
                    adj_targets.push(j);
                    uf.union(i as u32, j);
                }
            }
            adj_offsets.push(adj_targets.len() as u32);
        }
        let mut labels = vec![0u32; n];
        let mut largest_root = None;
        let mut largest_size = 0usize;
        for i in 0..n {
            labels[i] = uf.find(i as u32);
            let s = uf.size[labels[i] as usize] as usize;
            if s > largest_size {
                largest_size = s;
                largest_root = Some(labels[i]);
            }
        }
        Ok(SpatialGraph {
            ps,
            radius,
            adj_offsets,
            adj_targets,
            labels,
            largest_root,
            largest_size,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.ps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ps.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        self.ps.points()
    }

    pub fn window(&self) -> &Window {
        &self.ps.window
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adj_targets[self.adj_offsets[i] as usize..self.adj_offsets[i + 1] as usize]
    }

    /// Component label of vertex `i` (equal labels iff connected).
    pub fn component(&self, i: usize) -> u32 {
        self.labels[i]
    }

    pub fn in_largest_component(&self, i: usize) -> bool {
        Some(self.labels[i]) == self.largest_root
    }

    pub fn cluster_stats(&self) -> ClusterStats {
        let n = self.len();
        if n == 0 {
            return ClusterStats { largest_size: 0, largest_extent: 0.0, theta_hat: 0.0 };
        }
        let dim = self.window().dim;
        let mut lo = [f64::INFINITY; crate::geometry::MAX_DIM];
        let mut hi = [f64::NEG_INFINITY; crate::geometry::MAX_DIM];
        for i in 0..n {
            if self.in_largest_component(i) {
                for a in 0..dim {
                    lo[a] = lo[a].min(self.points()[i].coord(a));
                    hi[a] = hi[a].max(self.points()[i].coord(a));
                }
            }
        }
        let extent = (0..dim).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
        ClusterStats {
            largest_size: self.largest_size,
            largest_extent: extent,
            theta_hat: self.largest_size as f64 / n as f64,
        }
    }

    /// Smallest number of edges between vertices `i` and `j`; `None` when
    /// they are in different components.
    pub fn hop_distance(&self, i: usize, j: usize) -> Result<Option<u32>, GraphError> {
        let mut scratch = BfsScratch::new();
        self.hop_distance_with(i, j, &mut scratch)
    }

    pub fn hop_distance_with(
        &self,
        i: usize,
        j: usize,
        scratch: &mut BfsScratch,
    ) -> Result<Option<u32>, GraphError> {
        let n = self.len();
        if i >= n {
            return Err(GraphError::InvalidVertex(i));
        }
        if j >= n {
            return Err(GraphError::InvalidVertex(j));
        }
        if self.labels[i] != self.labels[j] {
            return Ok(None);
        }
        scratch.reset(n);
        scratch.visit(i as u32, 0);
        while let Some(v) = scratch.queue.pop_front() {
            let d = scratch.depth[v as usize];
            if v as usize == j {
                return Ok(Some(d));
            }
            for &w in self.neighbors(v as usize) {
                scratch.visit(w, d + 1);
            }
        }
        Ok(None)
    }

    /// Vertices within one radius of an external point (start set for the
    /// augmented-vertex queries below).
    fn attach_set(&self, x: &Point, out: &mut Vec<u32>) -> Result<(), GraphError> {
        out.clear();
        self.index.neighbors_within(self.points(), self.window(), x, self.radius, out)?;
        Ok(())
    }

    /// Whether a path `source -> nodes -> target` with at most `k` edges
    /// exists. Source and target attach by radius-r edges but do not relay
    /// for each other; a direct source-target edge counts as one hop.
    pub fn k_hop_connected(
        &self,
        source: &Point,
        target: &Point,
        k: u32,
        scratch: &mut BfsScratch,
    ) -> Result<bool, GraphError> {
        self.k_hop_connected_any(source, std::slice::from_ref(target), k, scratch)
    }

    /// Multi-target version: true when some target is reachable within `k`
    /// hops. Shares one truncated BFS across all targets.
    pub fn k_hop_connected_any(
        &self,
        source: &Point,
        targets: &[Point],
        k: u32,
        scratch: &mut BfsScratch,
    ) -> Result<bool, GraphError> {
        if k == 0 {
            return Err(GraphError::ZeroHopBudget);
        }
        let w = self.window();
        if targets.iter().any(|t| w.distance(source, t) <= self.radius) {
            return Ok(true);
        }
        if self.is_empty() {
            return Ok(false);
        }
        // target proximity test, grid-backed when targets are numerous
        let target_index = if targets.len() > 8 {
            Some(GridIndex::build(targets, w, self.radius))
        } else {
            None
        };
        let mut probe = Vec::new();
        let near_target = |p: &Point, probe: &mut Vec<u32>| -> Result<bool, GraphError> {
            match &target_index {
                Some(idx) => {
                    probe.clear();
                    idx.neighbors_within(targets, w, p, self.radius, probe)?;
                    Ok(!probe.is_empty())
                }
                None => Ok(targets.iter().any(|t| w.distance(p, t) <= self.radius)),
            }
        };
        let mut start = std::mem::take(&mut scratch.start);
        self.attach_set(source, &mut start)?;
        scratch.reset(self.len());
        for &v in &start {
            scratch.visit(v, 1);
        }
        scratch.start = start;
        let mut hit = false;
        while let Some(v) = scratch.queue.pop_front() {
            let d = scratch.depth[v as usize];
            // final hop from this relay to a target
            if d + 1 <= k && near_target(&self.points()[v as usize], &mut probe)? {
                hit = true;
                break;
            }
            if d + 1 < k {
                for &u in self.neighbors(v as usize) {
                    scratch.visit(u, d + 1);
                }
            }
        }
        Ok(hit)
    }

    /// Whether `x` connects, through nodes inside the sup-norm box `Q_l(x)`,
    /// to a node at sup distance at least `l/2 - radius` from `x`.
    pub fn percolates_beyond(
        &self,
        x: &Point,
        l: f64,
        scratch: &mut BfsScratch,
    ) -> Result<bool, GraphError> {
        let w = self.window();
        match w.boundary {
            crate::geometry::Boundary::Periodic => {
                if l >= w.side {
                    return Err(GraphError::BoxTooLarge { l, side: w.side });
                }
            }
            crate::geometry::Boundary::Open => {
                let fits = x
                    .coords()
                    .iter()
                    .all(|&c| c - l / 2.0 >= -1e-9 && c + l / 2.0 <= w.side + 1e-9);
                if !fits {
                    return Err(GraphError::BoxTooLarge { l, side: w.side });
                }
            }
        }
        if self.is_empty() {
            return Ok(false);
        }
        let half = l / 2.0;
        let goal = half - self.radius;
        let mut start = std::mem::take(&mut scratch.start);
        self.attach_set(x, &mut start)?;
        scratch.reset(self.len());
        for &v in &start {
            if w.sup_distance(&self.points()[v as usize], x) <= half {
                scratch.visit(v, 0);
            }
        }
        scratch.start = start;
        let mut hit = false;
        while let Some(v) = scratch.queue.pop_front() {
            let p = &self.points()[v as usize];
            if w.sup_distance(p, x) >= goal {
                hit = true;
                break;
            }
            for &u in self.neighbors(v as usize) {
                if w.sup_distance(&self.points()[u as usize], x) <= half {
                    scratch.visit(u, 0);
                }
            }
        }
        Ok(hit)
    }

    /// Whether `x` attaches (within one radius) to the largest component.
    pub fn connects_to_largest(&self, x: &Point, scratch: &mut BfsScratch) -> Result<bool, GraphError> {
        if self.is_empty() {
            return Ok(false);
        }
        let mut start = std::mem::take(&mut scratch.start);
        self.attach_set(x, &mut start)?;
        let hit = start.iter().any(|&v| self.in_largest_component(v as usize));
        scratch.start = start;
        Ok(hit)
    }

    /// Finite-window surrogate for "x is connected to the infinite cluster".
    pub fn percolation_membership(
        &self,
        x: &Point,
        mode: PercolationMode,
        scratch: &mut BfsScratch,
    ) -> Result<bool, GraphError> {
        match mode {
            PercolationMode::LBox { l } => self.percolates_beyond(x, l, scratch),
            PercolationMode::WindowGiant => self.connects_to_largest(x, scratch),
        }
    }

    /// Vertex of the largest component closest to `x` in Euclidean distance;
    /// ties break toward the lowest index.
    pub fn nearest_cluster_point(&self, x: &Point) -> Result<usize, GraphError> {
        if self.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let w = self.window();
        let mut best: Option<(f64, usize)> = None;
        for i in 0..self.len() {
            if !self.in_largest_component(i) {
                continue;
            }
            let d = w.distance(x, &self.points()[i]);
            let better = match best {
                None => true,
                Some((bd, _)) => d < bd,
            };
            if better {
                best = Some((d, i));
            }
        }
        best.map(|(_, i)| i).ok_or(GraphError::EmptyGraph)
    }
}
