//! Estimates the three percolation constants the rest of the crate consumes:
//! the critical intensity lambda_c (crossing point of small- vs large-window
//! percolation probabilities), the giant-component density theta, and the
//! hop-count stretch factor mu (graph distance per unit Euclidean distance
//! inside the giant component).

use hopnet::estimators::{estimate_lambda_c, estimate_mu, estimate_theta};
use hopnet::geometry::{Boundary, Window};
use hopnet::graph::PercolationMode;

fn main() {
    let replicas: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(100);

    // radius 0.1 so intensities land near the conventional ~143.7 figure
    let sweep: Vec<f64> = (0..9).map(|i| 136.0 + 2.0 * i as f64).collect();
    let (lc, points) = estimate_lambda_c(0.1, 3.0, 5.0, &sweep, replicas, 1).unwrap();
    println!("lambda_c = {:.2} +/- {:.2}  (r = 0.1)", lc.value, lc.std_error);
    println!("  normalized lambda_c * r^2 = {:.4}", lc.value * 0.01);
    for p in &points {
        println!(
            "  lambda {:>6.1}: P(small) {:.3}  P(large) {:.3}",
            p.intensity, p.p_small.value, p.p_large.value
        );
    }

    let w = Window::new(2, 25.0, Boundary::Open).unwrap();
    let theta = estimate_theta(1.5, 1.0, w, PercolationMode::WindowGiant, 4 * replicas, 2).unwrap();
    println!(
        "theta(1.5) = {:.3} +/- {:.3}  (fraction of nodes in the giant component)",
        theta.value, theta.std_error
    );

    let wp = Window::new(2, 21.0, Boundary::Periodic).unwrap();
    let mu = estimate_mu(150.0, 0.1, wp, 100, replicas.min(20), 3).unwrap();
    println!(
        "mu = {:.3} +/- {:.3}  (hops per unit distance, lambda r^2 = 1.5)",
        mu.value, mu.std_error
    );
}
