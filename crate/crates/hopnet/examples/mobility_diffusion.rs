//! Diffusive rescaling of the jump mobility model: at rate a and jump law
//! with identity-normalized covariance, X_T / sqrt(T) approaches a standard
//! normal as T grows. Prints the empirical variance of the rescaled first
//! coordinate against its nominal value, and the full rescaled endpoint
//! covariance matrix at the largest horizon.

use hopnet::mobility::{diffusive_rescale_check, rescaled_endpoint_covariance, WaypointLaw};

fn main() {
    let replicas: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(5000);
    let law = WaypointLaw::IsotropicNormalized;
    for horizon in [10.0, 100.0, 1000.0, 10_000.0] {
        let (empirical, nominal) = diffusive_rescale_check(1.0, law, 2, horizon, replicas, 9);
        println!(
            "T = {horizon:>7}: var(X_T/sqrt(T)) = {empirical:.4}  (nominal {nominal:.4})"
        );
    }
    let cov = rescaled_endpoint_covariance(1.0, law, 2, 10_000.0, replicas, 10);
    println!("rescaled endpoint covariance at T = 10^4:");
    println!("  [{:+.4} {:+.4}]", cov[0], cov[1]);
    println!("  [{:+.4} {:+.4}]", cov[2], cov[3]);
}
