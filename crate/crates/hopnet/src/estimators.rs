//! Estimators for the percolation constants the sink-density scalings depend
//! on: critical intensity, percolation probability, stretch factor, and the
//! parameter conversions between sink intensity, hop budget, and horizon.

use crate::geometry::{sample_ppp, unit_ball_volume, Point, Window};
use crate::graph::{BfsScratch, GraphError, PercolationMode, SpatialGraph};
use crate::seed::{derive, Stream};
use crate::stats::{regression_through_origin, EstimateWithError, RunningMoments};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("window side {side} too small for box side {l} (need side >= 2L)")]
    WindowTooSmall { side: f64, l: f64 },
    #[error("spanning-probability curves do not cross inside the sweep")]
    NoCrossing,
    #[error("intensity appears subcritical (giant fraction {0:.3}); stretch regression needs a supercritical graph")]
    Subcritical(f64),
    #[error("need at least {need} usable pairs, got {got}")]
    TooFewPairs { need: usize, got: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// The sink-density scaling: horizon T determines the sink intensity
/// `lambda_s = T^-alpha`, and the hop budget k is chosen so the expected
/// number of sinks within k-hop range is `n_s`.
#[derive(Debug, Clone, Copy)]
pub struct ScalingParams {
    pub n_s: f64,
    pub alpha: f64,
    pub dim: usize,
    pub horizon: f64,
    pub lambda_s: f64,
    pub k: u32,
}

/// Resolves `lambda_s = T^-alpha` and `k = round(mu_hat * (n_s / (lambda_s
/// * |B_1|))^(1/d))`, clamped to at least 1.
pub fn resolve_scaling(n_s: f64, alpha: f64, horizon: f64, mu_hat: f64, dim: usize) -> ScalingParams {
    assert!(n_s > 0.0 && alpha > 0.0 && horizon > 0.0 && mu_hat > 0.0);
    let lambda_s = horizon.powf(-alpha);
    let k_real = mu_hat * (n_s / (lambda_s * unit_ball_volume(dim))).powf(1.0 / dim as f64);
    let k = (k_real.round() as u32).max(1);
    ScalingParams { n_s, alpha, dim, horizon, lambda_s, k }
}

/// Inverts the hop-budget identity: expected in-range sinks for given `(lambda_s, k, mu)`.
pub fn expected_in_range_sinks(lambda_s: f64, k: f64, mu: f64, dim: usize) -> f64 {
    lambda_s * (k / mu).powi(dim as i32) * unit_ball_volume(dim)
}

/// Critical-regime relevant-ball radius: the ball of this radius holds
/// `n_s` sinks in expectation under a unit-intensity process.
pub fn critical_ball_radius(n_s: f64, dim: usize) -> f64 {
    (n_s / unit_ball_volume(dim)).powf(1.0 / dim as f64)
}

/// Monte Carlo percolation probability for a focal point in a fresh Gilbert
/// graph per replica.
///
/// `LBox` plants the focal point at the window center and asks whether it
/// percolates beyond its L-box (needs window side >= 2L). `WindowGiant`
/// places the focal point uniformly and asks whether it joins the window's
/// largest component; this is the open-window convention behind the
/// saturation level of the connected-fraction curves, deflated relative to
/// the L-box value by boundary effects.
pub fn estimate_theta(
    intensity: f64,
    radius: f64,
    window: Window,
    mode: PercolationMode,
    replicas: u64,
    seed: u64,
) -> Result<EstimateWithError, EstimatorError> {
    if let PercolationMode::LBox { l } = mode {
        if window.side < 2.0 * l {
            return Err(EstimatorError::WindowTooSmall { side: window.side, l });
        }
    }
    let hits = (0..replicas)
        .into_par_iter()
        .map(|rep| -> Result<u64, EstimatorError> {
            let rep_seed = derive(seed, Stream::Replica, rep);
            let ps = sample_ppp(intensity, window, derive(rep_seed, Stream::Nodes, 0))
                .map_err(GraphError::from)?;
            let g = SpatialGraph::build(ps, radius)?;
            let focal = match mode {
                PercolationMode::LBox { .. } => window.center(),
                PercolationMode::WindowGiant => {
                    let mut rng =
                        ChaCha12Rng::seed_from_u64(derive(rep_seed, Stream::Typical, 0));
                    let coords: Vec<f64> =
                        (0..window.dim).map(|_| rng.gen_range(0.0..window.side)).collect();
                    Point::new(&coords)
                }
            };
            let mut scratch = BfsScratch::new();
            Ok(g.percolation_membership(&focal, mode, &mut scratch)? as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(EstimateWithError::from_fraction(hits, replicas))
}

/// Whether the graph has a component touching both the low and high faces of
/// the window along axis 0 (points within one radius of each face).
fn spans_window(g: &SpatialGraph) -> bool {
    let side = g.window().side;
    let r = g.radius;
    let mut low: Vec<u32> = Vec::new();
    let mut high: Vec<u32> = Vec::new();
    for i in 0..g.len() {
        let x = g.points()[i].coord(0);
        if x <= r {
            low.push(g.component(i));
        }
        if x >= side - r {
            high.push(g.component(i));
        }
    }
    low.sort_unstable();
    low.dedup();
    high.iter().any(|c| low.binary_search(c).is_ok())
}

fn spanning_probability(
    intensity: f64,
    radius: f64,
    window: Window,
    replicas: u64,
    seed: u64,
) -> Result<EstimateWithError, EstimatorError> {
    let hits = (0..replicas)
        .into_par_iter()
        .map(|rep| -> Result<u64, EstimatorError> {
            let ps = sample_ppp(
                intensity,
                window,
                derive(derive(seed, Stream::Replica, rep), Stream::Nodes, 0),
            )
            .map_err(GraphError::from)?;
            let g = SpatialGraph::build(ps, radius)?;
            Ok(spans_window(&g) as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(EstimateWithError::from_fraction(hits, replicas))
}

/// One sweep point of the critical-intensity scan.
#[derive(Debug, Clone, Copy)]
pub struct LambdaCSweepPoint {
    pub intensity: f64,
    pub p_small: EstimateWithError,
    pub p_large: EstimateWithError,
}

/// Critical intensity by the finite-size crossing method: the spanning
/// probability increases with window size above criticality and decreases
/// below, so the two curves cross at the critical point. Returns the
/// linearly interpolated crossing with the sweep spacing as its error bar,
/// plus the raw sweep table.
pub fn estimate_lambda_c(
    radius: f64,
    small_side: f64,
    large_side: f64,
    sweep: &[f64],
    replicas: u64,
    seed: u64,
) -> Result<(EstimateWithError, Vec<LambdaCSweepPoint>), EstimatorError> {
    assert!(small_side < large_side);
    assert!(sweep.windows(2).all(|w| w[0] < w[1]) && sweep.len() >= 2);
    let w_small = Window::new(2, small_side, crate::geometry::Boundary::Open)
        .map_err(GraphError::from)?;
    let w_large = Window::new(2, large_side, crate::geometry::Boundary::Open)
        .map_err(GraphError::from)?;
    let mut table = Vec::with_capacity(sweep.len());
    for (i, &lam) in sweep.iter().enumerate() {
        let p_small =
            spanning_probability(lam, radius, w_small, replicas, derive(seed, Stream::Pairs, 2 * i as u64))?;
        let p_large = spanning_probability(
            lam,
            radius,
            w_large,
            replicas,
            derive(seed, Stream::Pairs, 2 * i as u64 + 1),
        )?;
        table.push(LambdaCSweepPoint { intensity: lam, p_small, p_large });
    }
    // find a sign change of (p_small - p_large) and interpolate linearly
    for w in table.windows(2) {
        let d0 = w[0].p_small.value - w[0].p_large.value;
        let d1 = w[1].p_small.value - w[1].p_large.value;
        if d0 >= 0.0 && d1 < 0.0 {
            let t = if d0 == d1 { 0.5 } else { d0 / (d0 - d1) };
            let lam = w[0].intensity + t * (w[1].intensity - w[0].intensity);
            let est = EstimateWithError {
                value: lam,
                std_error: w[1].intensity - w[0].intensity,
                replicas,
            };
            return Ok((est, table));
        }
    }
    Err(EstimatorError::NoCrossing)
}

/// Stretch-factor estimation: regression through the origin of the hop count
/// between giant-component proxies of pairs at radius-normalized distances
/// in `[20, 100]` (distances well below criticality bias the slope upward,
/// longer ones hit the window).
pub fn estimate_mu(
    intensity: f64,
    radius: f64,
    window: Window,
    pairs_per_replica: usize,
    replicas: u64,
    seed: u64,
) -> Result<EstimateWithError, EstimatorError> {
    let (min_d, max_d) = (20.0 * radius, 100.0 * radius);
    assert!(window.side > 2.0 * max_d, "window must dominate the largest pair distance");
    let per: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..replicas)
        .into_par_iter()
        .map(|rep| -> Result<(Vec<f64>, Vec<f64>, f64), EstimatorError> {
            let rep_seed = derive(seed, Stream::Replica, rep);
            let ps = sample_ppp(intensity, window, derive(rep_seed, Stream::Nodes, 0))
                .map_err(GraphError::from)?;
            let g = SpatialGraph::build(ps, radius)?;
            let theta = g.cluster_stats().theta_hat;
            let mut rng = ChaCha12Rng::seed_from_u64(derive(rep_seed, Stream::Pairs, 0));
            let mut xs = Vec::with_capacity(pairs_per_replica);
            let mut ys = Vec::with_capacity(pairs_per_replica);
            let mut scratch = BfsScratch::new();
            if g.is_empty() {
                return Ok((xs, ys, 0.0));
            }
            for _ in 0..pairs_per_replica {
                let x = Point::new(&[
                    rng.gen_range(0.0..window.side),
                    rng.gen_range(0.0..window.side),
                ]);
                let dist = rng.gen_range(min_d..max_d);
                let ang = rng.gen_range(0.0..std::f64::consts::TAU);
                let y = window.wrap(&x.translate(&[
                    dist * ang.cos(),
                    dist * ang.sin(),
                    0.0,
                    0.0,
                ]));
                let qx = g.nearest_cluster_point(&x)?;
                let qy = g.nearest_cluster_point(&y)?;
                // both proxies are in the giant component, so a path exists
                if let Some(h) = g.hop_distance_with(qx, qy, &mut scratch)? {
                    let sep = window.distance(&g.points()[qx], &g.points()[qy]);
                    if sep >= min_d {
                        xs.push(sep / radius);
                        ys.push(h as f64);
                    }
                }
            }
            Ok((xs, ys, theta))
        })
        .collect::<Result<_, _>>()?;
    let mut theta_m = RunningMoments::new();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (x, y, th) in per {
        xs.extend(x);
        ys.extend(y);
        theta_m.push(th);
    }
    if theta_m.mean() < 0.1 {
        return Err(EstimatorError::Subcritical(theta_m.mean()));
    }
    if xs.len() < 10 {
        return Err(EstimatorError::TooFewPairs { need: 10, got: xs.len() });
    }
    let (slope, se) = regression_through_origin(&xs, &ys);
    Ok(EstimateWithError { value: slope, std_error: se, replicas: xs.len() as u64 })
}
