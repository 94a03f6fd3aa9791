//! Monte Carlo simulator and estimator suite for k-hop connection intervals
//! of a mobile node among Poisson-distributed sinks in a random geometric
//! (Gilbert) graph of relay nodes.

pub mod cli;
pub mod estimators;
pub mod geometry;
pub mod graph;
pub mod intervals;
pub mod limits;
pub mod mobility;
pub mod seed;
pub mod stats;
pub mod timeline;
