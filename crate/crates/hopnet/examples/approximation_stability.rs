//! Stability of the finite-range, grid-discretized interval length under
//! refinement: halve the grid step, double the grid extent, and double the
//! percolation box, then compare the two sample distributions by their
//! Kolmogorov distance. A small distance certifies that the chosen
//! (step, extent, box) triple already sits in the converged regime.

use hopnet::geometry::{Boundary, Window};
use hopnet::graph::PercolationMode;
use hopnet::limits::{draw_samples, LimitConfig, Regime};
use hopnet::mobility::WaypointLaw;
use hopnet::stats::ks_two_sample;

fn main() {
    let replicas: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(300);
    let base = LimitConfig {
        regime: Regime::Dense,
        n_s: 0.5,
        mode: PercolationMode::LBox { l: 5.0 },
        step: 0.125,
        max_extent: 30.0,
        intensity: 1.0,
        radius: 1.0,
        law: WaypointLaw::IsotropicNormalized,
        rate: 1.0,
        window: Window::new(3, 11.0, Boundary::Periodic).unwrap(),
        replicas,
        seed: 11,
    };
    let mut refined = base;
    refined.step = base.step / 2.0;
    refined.max_extent = base.max_extent * 2.0;
    refined.mode = PercolationMode::LBox { l: 10.0 };
    refined.seed = 12;

    let t0 = std::time::Instant::now();
    let coarse: Vec<f64> = draw_samples(&base).unwrap().iter().map(|s| s.ell).collect();
    let t1 = std::time::Instant::now();
    let fine: Vec<f64> = draw_samples(&refined).unwrap().iter().map(|s| s.ell).collect();
    let t2 = std::time::Instant::now();

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let pos = |v: &[f64]| v.iter().filter(|&&x| x > 0.0).count() as f64 / v.len() as f64;
    println!("replicas          {replicas}");
    println!(
        "coarse  (step {}, extent {}, box 5): mean ell {:.4}, P(ell>0) {:.4}, {:.1?}",
        base.step,
        base.max_extent,
        mean(&coarse),
        pos(&coarse),
        t1 - t0
    );
    println!(
        "refined (step {}, extent {}, box 10): mean ell {:.4}, P(ell>0) {:.4}, {:.1?}",
        refined.step,
        refined.max_extent,
        mean(&fine),
        pos(&fine),
        t2 - t1
    );
    println!("kolmogorov distance {:.5}", ks_two_sample(&coarse, &fine));
}
