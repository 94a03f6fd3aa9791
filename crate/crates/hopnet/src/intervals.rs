//! Interval bookkeeping for connection times: canonical unions of closed
//! intervals, plus the grid-discretized interval-length approximant.

/// A finite union of closed intervals in canonical form: sorted, and any two
/// intervals are separated by a gap of positive length (touching intervals
/// are merged on construction).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntervalSet {
    iv: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Normalizes an arbitrary collection of closed intervals.
    pub fn from_intervals(mut v: Vec<(f64, f64)>) -> Self {
        v.retain(|&(a, b)| b >= a);
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut s = IntervalSet::new();
        for (a, b) in v {
            s.push(a, b);
        }
        s
    }

    /// Appends `[a, b]`; must not start before the last stored interval.
    /// Touching or overlapping intervals merge.
    pub fn push(&mut self, a: f64, b: f64) {
        assert!(b >= a, "inverted interval [{a}, {b}]");
        if let Some(last) = self.iv.last_mut() {
            assert!(a >= last.0, "push out of order");
            if a <= last.1 {
                last.1 = last.1.max(b);
                return;
            }
        }
        self.iv.push((a, b));
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.iv
    }

    pub fn is_empty(&self) -> bool {
        self.iv.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.iv.iter().map(|&(a, b)| b - a).sum()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.component_containing(t).is_some()
    }

    /// The interval of the union that covers `t`, if any.
    pub fn component_containing(&self, t: f64) -> Option<(f64, f64)> {
        let k = self.iv.partition_point(|&(a, _)| a <= t);
        if k == 0 {
            return None;
        }
        let (a, b) = self.iv[k - 1];
        (t <= b).then_some((a, b))
    }

    /// Length of the covering interval, or zero when `t` is uncovered. This
    /// is the connection-interval length read off at time `t`.
    pub fn component_length(&self, t: f64) -> f64 {
        self.component_containing(t).map_or(0.0, |(a, b)| b - a)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut all: Vec<(f64, f64)> = self.iv.iter().chain(&other.iv).copied().collect();
        all.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut s = IntervalSet::new();
        for (a, b) in all {
            s.push(a, b);
        }
        s
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = IntervalSet::new();
        let (mut i, mut j) = (0usize, 0usize);
        while i < self.iv.len() && j < other.iv.len() {
            let (a1, b1) = self.iv[i];
            let (a2, b2) = other.iv[j];
            let lo = a1.max(a2);
            let hi = b1.min(b2);
            if hi >= lo {
                out.push(lo, hi);
            }
            if b1 <= b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        out
    }

    /// Restriction to the horizon `[lo, hi]`.
    pub fn truncate(&self, lo: f64, hi: f64) -> IntervalSet {
        assert!(hi >= lo);
        let mut out = IntervalSet::new();
        for &(a, b) in &self.iv {
            let (ta, tb) = (a.max(lo), b.min(hi));
            if tb >= ta {
                out.push(ta, tb);
            }
        }
        out
    }
}

/// The symmetric grid `t + {-n*step, ..., -step, 0, step, ..., n*step}` with
/// `n = ceil(max_extent / step)`, used to discretize interval lengths.
#[derive(Debug, Clone, Copy)]
pub struct TimeGrid {
    pub center: f64,
    pub step: f64,
    pub max_extent: f64,
}

impl TimeGrid {
    pub fn half_count(&self) -> usize {
        assert!(self.step > 0.0 && self.max_extent > 0.0);
        (self.max_extent / self.step).ceil() as usize
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.half_count() as i64;
        (-n..=n).map(move |k| self.center + k as f64 * self.step)
    }
}

/// Grid approximant of the interval length at the grid center: the largest
/// `b - a` over grid points `a <= center <= b` such that every grid point of
/// `[a, b]` satisfies `member`. Zero when the center's own grid point fails
/// (and also when only the center passes). Membership is consulted at grid
/// points only. Converges to `component_length(center)` as the step shrinks,
/// capped by the grid span.
pub fn discretized_length<F: Fn(f64) -> bool>(member: F, grid: &TimeGrid) -> f64 {
    if !member(grid.center) {
        return 0.0;
    }
    let n = grid.half_count() as i64;
    let mut hi = 0i64;
    while hi < n && member(grid.center + (hi + 1) as f64 * grid.step) {
        hi += 1;
    }
    let mut lo = 0i64;
    while lo < n && member(grid.center - (lo + 1) as f64 * grid.step) {
        lo += 1;
    }
    (hi + lo) as f64 * grid.step
}

/// [`discretized_length`] with membership read from an interval set.
pub fn discretized_length_of_set(set: &IntervalSet, grid: &TimeGrid) -> f64 {
    discretized_length(|t| set.contains(t), grid)
}
