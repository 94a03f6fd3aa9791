//! Builds one full connectivity timeline: simulate a world (typical node,
//! mobile relays, static sinks), compute the set of times at which the
//! typical node reaches some sink within k hops, and summarize the
//! resulting interval measure.

use hopnet::geometry::{Boundary, Window};
use hopnet::mobility::WaypointLaw;
use hopnet::timeline::{
    build_measure, compute_xi_k, evaluate_statistic, simulate_world, ConnectivityConfig, Statistic,
};

fn main() {
    let cfg = ConnectivityConfig {
        k: 6,
        l_box: None,
        node_intensity: 1.5,
        radius: 1.0,
        sink_intensity: 0.02,
        horizon: 200.0,
        rate: 0.5,
        law: WaypointLaw::FixedJump(0.8),
        window: Window::new(2, 20.0, Boundary::Periodic).unwrap(),
    };
    let world = simulate_world(&cfg, 0.0, cfg.horizon, 7).unwrap();
    println!(
        "world: {} relays, {} sinks on a side-{} torus, horizon {}",
        world.nodes.len(),
        world.sinks.len(),
        cfg.window.side,
        cfg.horizon
    );

    let xi = compute_xi_k(&world, &cfg, true).unwrap();
    println!("xi_k has {} connection intervals", xi.intervals().len());
    for &(a, b) in xi.intervals().iter().take(8) {
        println!("  [{a:8.3}, {b:8.3}]  length {:.3}", b - a);
    }
    if xi.intervals().len() > 8 {
        println!("  ...");
    }

    let m = build_measure(&xi, cfg.horizon);
    let frac = evaluate_statistic(&m, &Statistic::ConnectedFraction).unwrap();
    let rate = evaluate_statistic(&m, &Statistic::ReconnectionRate).unwrap();
    let mean_len = evaluate_statistic(&m, &Statistic::IntervalLength { cap: f64::INFINITY }).unwrap();
    println!("connected fraction  {frac:.4}");
    println!("reconnection rate   {rate:.4} per unit time");
    println!("mean interval       {mean_len:.4}");
}
