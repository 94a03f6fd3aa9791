//! Dense-regime statistic curves over the expected in-range sink count n_S:
//! connection fraction f1 and reconnection indicator f3 both plateau once
//! n_S is large enough that some in-range sink is almost surely connected,
//! and the f1 plateau level equals the percolation density theta.

use hopnet::geometry::{Boundary, Window};
use hopnet::graph::PercolationMode;
use hopnet::limits::{figure2_sweep, LimitConfig, LimitStatistic, Regime};
use hopnet::mobility::WaypointLaw;

fn main() {
    let replicas: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(400);
    let cfg = LimitConfig {
        regime: Regime::Dense,
        n_s: 1.0, // overwritten per grid point
        mode: PercolationMode::WindowGiant,
        step: 0.5,
        max_extent: 16.0,
        intensity: 1.5,
        radius: 1.0,
        law: WaypointLaw::IsotropicNormalized,
        rate: 0.035,
        window: Window::new(2, 25.0, Boundary::Open).unwrap(),
        replicas,
        seed: 1,
    };
    let grid = [0.5, 1.0, 2.0, 4.0, 8.0];
    let stats = [
        LimitStatistic::Indicator,
        LimitStatistic::Length,
        LimitStatistic::Reconnection,
    ];
    let rows = figure2_sweep(&cfg, &grid, &stats).unwrap();
    println!("{:>5}  {:>12}  {:>10}  {:>10}", "n_S", "statistic", "mean", "std err");
    for r in rows {
        println!(
            "{:>5}  {:>12}  {:>10.4}  {:>10.4}",
            r.n_s, r.statistic, r.mean, r.std_error
        );
    }
}
