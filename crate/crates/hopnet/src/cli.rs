//! Batch front-end: subcommand dispatch, key=value configuration with flag
//! overrides, deterministic seeding, and self-describing CSV output.

use crate::estimators::{estimate_lambda_c, estimate_mu, estimate_theta, resolve_scaling};
use crate::geometry::{Boundary, Window};
use crate::graph::PercolationMode;
use crate::limits::{
    estimate_critical, estimate_sparse, figure2_sweep, LimitConfig, LimitStatistic, Regime,
};
use crate::mobility::WaypointLaw;
use crate::seed::{derive, Stream};
use crate::timeline::{
    build_measure, compute_xi_k, decorrelation_diagnostic, simulate_world, write_measure_csv,
    ConnectivityConfig,
};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown subcommand `{0}`")]
    UnknownSubcommand(String),
    #[error("no subcommand given; expected one of {0}")]
    MissingSubcommand(&'static str),
    #[error("cannot read config file `{path}`: {source}")]
    ConfigFile { path: String, source: std::io::Error },
    #[error("config line {line} is not `key = value`: `{text}`")]
    MalformedLine { line: usize, text: String },
    #[error("unknown config key `{0}` for this subcommand")]
    UnknownKey(String),
    #[error("config key `{key}`: cannot parse `{value}` as {want}")]
    BadValue { key: String, value: String, want: &'static str },
    #[error("unknown flag `{0}`")]
    UnknownFlag(String),
    #[error("flag `{0}` needs a value")]
    MissingFlagValue(String),
    #[error("intensity {lambda} at radius {radius} is at or below the percolation threshold (lambda * r^d <= {threshold}); this run needs a supercritical graph — raise graph.intensity")]
    SubcriticalRefusal { lambda: f64, radius: f64, threshold: f64 },
    #[error("cannot write output `{path}`: {source}")]
    Output { path: String, source: std::io::Error },
    #[error(transparent)]
    Estimator(#[from] crate::estimators::EstimatorError),
    #[error(transparent)]
    Timeline(#[from] crate::timeline::TimelineError),
    #[error(transparent)]
    Limit(#[from] crate::limits::LimitError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

const SUBCOMMANDS: &str = "estimate-lambda-c, estimate-mu, estimate-theta, interval-measure, limit-dense, limit-sparse, limit-critical, figure2, decorrelation";

/// Critical intensity in radius-normalized units; runs that assume a
/// supercritical graph refuse below this.
const LAMBDA_C_NORMALIZED: f64 = 1.436;

/// Resolved configuration: defaults, overlaid by the config file, overlaid
/// by flags. Every key must be known to the subcommand.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub subcommand: String,
    map: BTreeMap<&'static str, String>,
}

impl ExperimentConfig {
    fn get(&self, key: &str) -> &str {
        self.map.get(key).map(|s| s.as_str()).unwrap_or_else(|| panic!("key {key} not registered"))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        self.get(key).parse().map_err(|_| CliError::BadValue {
            key: key.into(),
            value: self.get(key).into(),
            want: "a real number",
        })
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        self.get(key).parse().map_err(|_| CliError::BadValue {
            key: key.into(),
            value: self.get(key).into(),
            want: "a nonnegative integer",
        })
    }

    pub fn usize_(&self, key: &str) -> Result<usize, CliError> {
        self.u64(key).map(|v| v as usize)
    }

    pub fn string(&self, key: &str) -> String {
        self.get(key).to_string()
    }

    /// Comma-separated reals.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let raw = self.get(key);
        if raw.trim().is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|s| {
                s.trim().parse().map_err(|_| CliError::BadValue {
                    key: key.into(),
                    value: raw.into(),
                    want: "a comma-separated list of reals",
                })
            })
            .collect()
    }

    /// `t:v` pairs, comma separated; empty means absent.
    pub fn pair_list(&self, key: &str) -> Result<Vec<(f64, f64)>, CliError> {
        let raw = self.get(key);
        if raw.trim().is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|s| {
                let bad = || CliError::BadValue {
                    key: key.into(),
                    value: raw.into(),
                    want: "comma-separated t:value pairs",
                };
                let (a, b) = s.trim().split_once(':').ok_or_else(bad)?;
                Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
            })
            .collect()
    }

    pub fn waypoint_law(&self, key: &str) -> Result<WaypointLaw, CliError> {
        let raw = self.get(key);
        if raw == "gauss" {
            return Ok(WaypointLaw::IsotropicNormalized);
        }
        raw.parse::<f64>().map(WaypointLaw::FixedJump).map_err(|_| CliError::BadValue {
            key: key.into(),
            value: raw.into(),
            want: "`gauss` or a fixed jump length",
        })
    }

    pub fn percolation_mode(&self, mode_key: &str, l_key: &str) -> Result<PercolationMode, CliError> {
        match self.get(mode_key) {
            "window-giant" => Ok(PercolationMode::WindowGiant),
            "lbox" => Ok(PercolationMode::LBox { l: self.f64(l_key)? }),
            other => Err(CliError::BadValue {
                key: mode_key.into(),
                value: other.into(),
                want: "`lbox` or `window-giant`",
            }),
        }
    }

    /// Header block echoing the resolved configuration.
    pub fn header(&self) -> String {
        let mut s = format!("# subcommand = {}\n", self.subcommand);
        for (k, v) in &self.map {
            // the destination path is not part of the experiment; omitting it
            // keeps outputs bit-identical across reruns to different files
            if *k == "run.output" {
                continue;
            }
            s.push_str(&format!("# {k} = {v}\n"));
        }
        s
    }
}

/// Registered keys and defaults per subcommand. Common keys first.
fn defaults(sub: &str) -> Option<Vec<(&'static str, &'static str)>> {
    let common = vec![
        ("run.seed", "1"),
        ("run.replicas", "100"),
        ("run.output", "-"),
        ("run.workers", "0"),
    ];
    let mut v = common;
    match sub {
        "estimate-lambda-c" => v.extend([
            ("graph.radius", "0.1"),
            ("lambda_c.small_side", "3"),
            ("lambda_c.large_side", "5"),
            ("lambda_c.sweep_min", "125"),
            ("lambda_c.sweep_max", "165"),
            ("lambda_c.sweep_points", "5"),
        ]),
        "estimate-theta" => v.extend([
            ("graph.radius", "0.1"),
            ("graph.intensity", "150"),
            ("theta.window_side", "5"),
            ("theta.mode", "window-giant"),
            ("theta.l_box", "2"),
        ]),
        "estimate-mu" => v.extend([
            ("graph.radius", "0.1"),
            ("graph.intensity", "150"),
            ("mu.window_side", "21"),
            ("mu.pairs_per_replica", "100"),
        ]),
        "interval-measure" => v.extend([
            ("graph.radius", "1"),
            ("graph.intensity", "1.5"),
            ("graph.window_side", "20"),
            ("timeline.k", "3"),
            ("timeline.l_box", ""),
            ("timeline.sink_intensity", "0.01"),
            ("timeline.horizon", "100"),
            ("timeline.rate", "1"),
            ("timeline.jump", "0.5"),
        ]),
        "limit-dense" | "limit-sparse" | "limit-critical" | "figure2" => {
            v.extend([
                ("graph.radius", "1"),
                ("graph.intensity", "1.5"),
                ("limit.window_side", "25"),
                ("limit.n_s", "2"),
                ("limit.mode", "window-giant"),
                ("limit.l_box", "6"),
                ("limit.step", "0.5"),
                ("limit.max_extent", "16"),
                ("limit.rate", "0.035"),
                ("limit.jump", "gauss"),
            ]);
            if sub == "limit-critical" {
                v.extend([("limit.path_steps", "64"), ("limit.h_table", "")]);
            }
            if sub == "figure2" {
                v.push(("figure2.n_s_grid", "0.5,1,2,4,8"));
            }
            if sub != "figure2" {
                v.push(("limit.statistic", "f1"));
            }
        }
        "decorrelation" => v.extend([
            ("graph.radius", "1"),
            ("graph.intensity", "1.5"),
            ("graph.window_side", "15"),
            ("decorrelation.horizons", "100,1000,10000"),
            ("decorrelation.alpha", "0.25"),
            ("decorrelation.n_s", "0.5"),
            ("decorrelation.mu", "2.8"),
            ("decorrelation.rate", "0.05"),
            ("decorrelation.jump", "0.5"),
            ("decorrelation.t_frac", "0.5"),
            ("decorrelation.step", "0.25"),
            ("decorrelation.max_extent", "5"),
        ]),
        _ => return None,
    }
    Some(v)
}

/// Flag aliases for frequently used keys.
fn flag_alias(flag: &str) -> Option<&'static str> {
    match flag {
        "--seed" => Some("run.seed"),
        "--replicas" => Some("run.replicas"),
        "--output" => Some("run.output"),
        "--workers" => Some("run.workers"),
        "--radius" => Some("graph.radius"),
        "--intensity" => Some("graph.intensity"),
        _ => None,
    }
}

fn parse_config_file(path: &str) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(Path::new(path))
        .map_err(|e| CliError::ConfigFile { path: path.into(), source: e })?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::MalformedLine { line: i + 1, text: line.into() })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Parses `args` (without the binary name) into a resolved configuration.
/// Precedence: defaults < config file < flags (`--set key=value` or an
/// alias), later flags winning.
pub fn parse_args(args: &[String]) -> Result<ExperimentConfig, CliError> {
    let sub = args.first().ok_or(CliError::MissingSubcommand(SUBCOMMANDS))?.clone();
    let registered = defaults(&sub).ok_or_else(|| CliError::UnknownSubcommand(sub.clone()))?;
    let mut map: BTreeMap<&'static str, String> =
        registered.iter().map(|&(k, v)| (k, v.to_string())).collect();
    let lookup = |key: &str| -> Result<&'static str, CliError> {
        registered
            .iter()
            .map(|&(k, _)| k)
            .find(|k| *k == key)
            .ok_or_else(|| CliError::UnknownKey(key.into()))
    };
    // gather file settings first, then flag settings, in order
    let mut file_settings: Vec<(String, String)> = Vec::new();
    let mut flag_settings: Vec<(String, String)> = Vec::new();
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        let mut take_value = |name: &str| -> Result<String, CliError> {
            i += 1;
            args.get(i).cloned().ok_or_else(|| CliError::MissingFlagValue(name.into()))
        };
        match a.as_str() {
            "--config" => {
                let path = take_value("--config")?;
                file_settings.extend(parse_config_file(&path)?);
            }
            "--set" => {
                let kv = take_value("--set")?;
                let (k, v) = kv.split_once('=').ok_or_else(|| CliError::MalformedLine {
                    line: 0,
                    text: kv.clone(),
                })?;
                flag_settings.push((k.trim().into(), v.trim().into()));
            }
            other => {
                if let Some(key) = flag_alias(other) {
                    let v = take_value(other)?;
                    flag_settings.push((key.into(), v));
                } else {
                    return Err(CliError::UnknownFlag(other.into()));
                }
            }
        }
        i += 1;
    }
    for (k, v) in file_settings.into_iter().chain(flag_settings) {
        let key = lookup(&k)?;
        map.insert(key, v);
    }
    Ok(ExperimentConfig { subcommand: sub, map })
}

fn configure_workers(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let mut n = cfg.u64("run.workers")? as usize;
    if n == 0 {
        if let Ok(env) = std::env::var("HOPNET_WORKERS") {
            n = env.parse().unwrap_or(0);
        }
    }
    if n > 0 {
        // ignore the error: the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn refuse_subcritical(lambda: f64, radius: f64, dim: usize) -> Result<(), CliError> {
    if lambda * radius.powi(dim as i32) <= LAMBDA_C_NORMALIZED {
        return Err(CliError::SubcriticalRefusal {
            lambda,
            radius,
            threshold: LAMBDA_C_NORMALIZED,
        });
    }
    Ok(())
}

fn open_output(cfg: &ExperimentConfig) -> Result<Box<dyn Write>, CliError> {
    let path = cfg.string("run.output");
    if path == "-" {
        Ok(Box::new(std::io::stdout()))
    } else {
        let f = std::fs::File::create(&path)
            .map_err(|e| CliError::Output { path: path.clone(), source: e })?;
        Ok(Box::new(std::io::BufWriter::new(f)))
    }
}

fn limit_config(cfg: &ExperimentConfig, regime: Regime) -> Result<LimitConfig, CliError> {
    let radius = cfg.f64("graph.radius")?;
    let intensity = cfg.f64("graph.intensity")?;
    refuse_subcritical(intensity, radius, 2)?;
    let mode = cfg.percolation_mode("limit.mode", "limit.l_box")?;
    let boundary = match mode {
        PercolationMode::WindowGiant => Boundary::Open,
        PercolationMode::LBox { .. } => Boundary::Periodic,
    };
    Ok(LimitConfig {
        regime,
        n_s: cfg.f64("limit.n_s")?,
        mode,
        step: cfg.f64("limit.step")?,
        max_extent: cfg.f64("limit.max_extent")?,
        intensity,
        radius,
        law: cfg.waypoint_law("limit.jump")?,
        rate: cfg.f64("limit.rate")?,
        window: Window::new(2, cfg.f64("limit.window_side")?, boundary)?,
        replicas: cfg.u64("run.replicas")?,
        seed: cfg.u64("run.seed")?,
    })
}

fn limit_statistic(cfg: &ExperimentConfig) -> Result<LimitStatistic, CliError> {
    match cfg.string("limit.statistic").as_str() {
        "f1" => Ok(LimitStatistic::Indicator),
        "f2" => Ok(LimitStatistic::Length),
        "f3" => Ok(LimitStatistic::Reconnection),
        other => Err(CliError::BadValue {
            key: "limit.statistic".into(),
            value: other.into(),
            want: "f1, f2, or f3",
        }),
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Output { path: "<stream>".into(), source: e }
}

/// Runs one subcommand; returns the process exit code.
pub fn run(args: &[String]) -> Result<(), CliError> {
    let cfg = parse_args(args)?;
    configure_workers(&cfg)?;
    let mut out = open_output(&cfg)?;
    out.write_all(cfg.header().as_bytes()).map_err(io_err)?;
    match cfg.subcommand.as_str() {
        "estimate-lambda-c" => {
            let lo = cfg.f64("lambda_c.sweep_min")?;
            let hi = cfg.f64("lambda_c.sweep_max")?;
            let n = cfg.usize_("lambda_c.sweep_points")?.max(2);
            let sweep: Vec<f64> =
                (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
            let (est, table) = estimate_lambda_c(
                cfg.f64("graph.radius")?,
                cfg.f64("lambda_c.small_side")?,
                cfg.f64("lambda_c.large_side")?,
                &sweep,
                cfg.u64("run.replicas")?,
                cfg.u64("run.seed")?,
            )?;
            writeln!(out, "parameter,estimate,std_error,replicas").map_err(io_err)?;
            for p in &table {
                writeln!(
                    out,
                    "p_span_small@{},{:.6},{:.6},{}",
                    p.intensity, p.p_small.value, p.p_small.std_error, p.p_small.replicas
                )
                .map_err(io_err)?;
                writeln!(
                    out,
                    "p_span_large@{},{:.6},{:.6},{}",
                    p.intensity, p.p_large.value, p.p_large.std_error, p.p_large.replicas
                )
                .map_err(io_err)?;
            }
            writeln!(out, "lambda_c,{:.6},{:.6},{}", est.value, est.std_error, est.replicas)
                .map_err(io_err)?;
        }
        "estimate-theta" => {
            let mode = cfg.percolation_mode("theta.mode", "theta.l_box")?;
            let boundary = match mode {
                PercolationMode::WindowGiant => Boundary::Open,
                PercolationMode::LBox { .. } => Boundary::Periodic,
            };
            let w = Window::new(2, cfg.f64("theta.window_side")?, boundary)?;
            let est = estimate_theta(
                cfg.f64("graph.intensity")?,
                cfg.f64("graph.radius")?,
                w,
                mode,
                cfg.u64("run.replicas")?,
                cfg.u64("run.seed")?,
            )?;
            writeln!(out, "parameter,estimate,std_error,replicas").map_err(io_err)?;
            writeln!(out, "theta,{:.6},{:.6},{}", est.value, est.std_error, est.replicas)
                .map_err(io_err)?;
        }
        "estimate-mu" => {
            let radius = cfg.f64("graph.radius")?;
            let intensity = cfg.f64("graph.intensity")?;
            refuse_subcritical(intensity, radius, 2)?;
            let w = Window::new(2, cfg.f64("mu.window_side")?, Boundary::Periodic)?;
            let est = estimate_mu(
                intensity,
                radius,
                w,
                cfg.usize_("mu.pairs_per_replica")?,
                cfg.u64("run.replicas")?,
                cfg.u64("run.seed")?,
            )?;
            writeln!(out, "parameter,estimate,std_error,replicas").map_err(io_err)?;
            writeln!(out, "mu,{:.6},{:.6},{}", est.value, est.std_error, est.replicas)
                .map_err(io_err)?;
        }
        "interval-measure" => {
            let radius = cfg.f64("graph.radius")?;
            let l_raw = cfg.string("timeline.l_box");
            let ccfg = ConnectivityConfig {
                k: cfg.u64("timeline.k")? as u32,
                l_box: if l_raw.trim().is_empty() {
                    None
                } else {
                    Some(cfg.f64("timeline.l_box")?)
                },
                node_intensity: cfg.f64("graph.intensity")?,
                radius,
                sink_intensity: cfg.f64("timeline.sink_intensity")?,
                horizon: cfg.f64("timeline.horizon")?,
                rate: cfg.f64("timeline.rate")?,
                law: cfg.waypoint_law("timeline.jump")?,
                window: Window::new(2, cfg.f64("graph.window_side")?, Boundary::Periodic)?,
            };
            writeln!(out, "replica,component_start,component_end,ell,weight").map_err(io_err)?;
            let seed = cfg.u64("run.seed")?;
            for rep in 0..cfg.u64("run.replicas")? {
                let world =
                    simulate_world(&ccfg, 0.0, ccfg.horizon, derive(seed, Stream::Replica, rep))?;
                let xi = compute_xi_k(&world, &ccfg, true)?;
                let m = build_measure(&xi, ccfg.horizon);
                write_measure_csv(&mut out, rep, &m)?;
            }
        }
        "limit-dense" => {
            let lc = limit_config(&cfg, Regime::Dense)?;
            let stat = limit_statistic(&cfg)?;
            let est = crate::limits::estimate_dense(&lc, stat)?;
            writeln!(out, "n_S,statistic,mean,std_error,replicas").map_err(io_err)?;
            writeln!(
                out,
                "{},{},{:.6},{:.6},{}",
                lc.n_s,
                stat.name(),
                est.value,
                est.std_error,
                est.replicas
            )
            .map_err(io_err)?;
        }
        "limit-sparse" => {
            let lc = limit_config(&cfg, Regime::Sparse)?;
            let stat = limit_statistic(&cfg)?;
            let rows = estimate_sparse(&lc, stat)?;
            writeln!(out, "n,conditional_mean,std_error,poisson_weight,replicas")
                .map_err(io_err)?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{:.6},{:.6},{:.8},{}",
                    r.n, r.mean, r.std_error, r.weight, r.replicas
                )
                .map_err(io_err)?;
            }
        }
        "limit-critical" => {
            let lc = limit_config(&cfg, Regime::Critical)?;
            let stat = limit_statistic(&cfg)?;
            let h = cfg.pair_list("limit.h_table")?;
            let est = estimate_critical(&lc, stat, cfg.usize_("limit.path_steps")?, &h)?;
            writeln!(out, "n,conditional_mean,std_error,poisson_weight,replicas")
                .map_err(io_err)?;
            for r in &est.s_table {
                writeln!(
                    out,
                    "{},{:.6},{:.6},{:.8},{}",
                    r.n, r.mean, r.std_error, r.weight, r.replicas
                )
                .map_err(io_err)?;
            }
            writeln!(out, "statistic,mean,std_error,replicas").map_err(io_err)?;
            writeln!(
                out,
                "path_integral_{},{:.6},{:.6},{}",
                stat.name(),
                est.mean,
                est.std_error,
                est.samples.len()
            )
            .map_err(io_err)?;
        }
        "figure2" => {
            let lc = limit_config(&cfg, Regime::Dense)?;
            let grid = cfg.f64_list("figure2.n_s_grid")?;
            let stats = [
                LimitStatistic::Indicator,
                LimitStatistic::Length,
                LimitStatistic::Reconnection,
            ];
            let rows = figure2_sweep(&lc, &grid, &stats)?;
            writeln!(out, "n_S,statistic,mean,std_error,replicas").map_err(io_err)?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{:.6},{:.6},{}",
                    r.n_s, r.statistic, r.mean, r.std_error, r.replicas
                )
                .map_err(io_err)?;
            }
        }
        "decorrelation" => {
            let radius = cfg.f64("graph.radius")?;
            let intensity = cfg.f64("graph.intensity")?;
            refuse_subcritical(intensity, radius, 2)?;
            let alpha = cfg.f64("decorrelation.alpha")?;
            let n_s = cfg.f64("decorrelation.n_s")?;
            let mu = cfg.f64("decorrelation.mu")?;
            let horizons = cfg.f64_list("decorrelation.horizons")?;
            writeln!(out, "horizon,k,lambda_S,covariance,std_error,replicas").map_err(io_err)?;
            for (i, &t) in horizons.iter().enumerate() {
                let sp = resolve_scaling(n_s, alpha, t, mu, 2);
                let ccfg = ConnectivityConfig {
                    k: sp.k,
                    l_box: None,
                    node_intensity: intensity,
                    radius,
                    sink_intensity: sp.lambda_s,
                    horizon: t,
                    rate: cfg.f64("decorrelation.rate")?,
                    law: cfg.waypoint_law("decorrelation.jump")?,
                    window: Window::new(2, cfg.f64("graph.window_side")?, Boundary::Periodic)?,
                };
                let est = decorrelation_diagnostic(
                    &ccfg,
                    cfg.f64("decorrelation.step")?,
                    cfg.f64("decorrelation.max_extent")?,
                    cfg.f64("decorrelation.t_frac")?,
                    sp.k as f64 / mu * radius,
                    cfg.u64("run.replicas")?,
                    derive(cfg.u64("run.seed")?, Stream::Replica, i as u64),
                )?;
                writeln!(
                    out,
                    "{t},{},{:.8},{:.6},{:.6},{}",
                    sp.k, sp.lambda_s, est.value, est.std_error, est.replicas
                )
                .map_err(io_err)?;
            }
        }
        _ => unreachable!("subcommand validated in parse_args"),
    }
    out.flush().map_err(io_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn unknown_subcommand_rejected() {
        assert!(matches!(
            parse_args(&argv(&["frobnicate"])),
            Err(CliError::UnknownSubcommand(_))
        ));
        assert!(matches!(parse_args(&[]), Err(CliError::MissingSubcommand(_))));
    }

    #[test]
    fn unknown_key_rejected() {
        let r = parse_args(&argv(&["estimate-theta", "--set", "bogus.key=3"]));
        assert!(matches!(r, Err(CliError::UnknownKey(_))));
    }

    #[test]
    fn flags_override_defaults_and_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.txt");
        std::fs::write(&path, "run.seed = 42\ngraph.radius = 0.2\n# comment\n").unwrap();
        let cfg = parse_args(&argv(&[
            "estimate-theta",
            "--config",
            path.to_str().unwrap(),
            "--radius",
            "0.3",
        ]))
        .unwrap();
        assert_eq!(cfg.u64("run.seed").unwrap(), 42);
        assert_eq!(cfg.f64("graph.radius").unwrap(), 0.3);
        // default untouched key still present
        assert_eq!(cfg.string("theta.mode"), "window-giant");
    }

    #[test]
    fn missing_config_file_names_path() {
        let r = parse_args(&argv(&["figure2", "--config", "/no/such/file.cfg"]));
        match r {
            Err(CliError::ConfigFile { path, .. }) => assert_eq!(path, "/no/such/file.cfg"),
            other => panic!("expected config-file error, got {other:?}"),
        }
    }

    #[test]
    fn header_echoes_resolved_config() {
        let cfg = parse_args(&argv(&["estimate-theta", "--seed", "7"])).unwrap();
        let h = cfg.header();
        assert!(h.contains("# subcommand = estimate-theta"));
        assert!(h.contains("# run.seed = 7"));
        assert!(h.contains("# graph.intensity = 150"));
        assert!(h.lines().all(|l| l.starts_with('#')));
    }

    #[test]
    fn subcritical_refusal() {
        let r = run(&argv(&[
            "limit-dense",
            "--intensity",
            "1.0",
            "--replicas",
            "1",
        ]));
        assert!(matches!(r, Err(CliError::SubcriticalRefusal { .. })));
    }

    #[test]
    fn pair_list_and_law_parsing() {
        let cfg = parse_args(&argv(&[
            "limit-critical",
            "--set",
            "limit.h_table=0:1,0.5:2",
            "--set",
            "limit.jump=0.25",
        ]))
        .unwrap();
        assert_eq!(cfg.pair_list("limit.h_table").unwrap(), vec![(0.0, 1.0), (0.5, 2.0)]);
        assert_eq!(cfg.waypoint_law("limit.jump").unwrap(), WaypointLaw::FixedJump(0.25));
    }

    #[test]
    fn interval_measure_smoke_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.csv");
        let p2 = dir.path().join("b.csv");
        for p in [&p1, &p2] {
            run(&argv(&[
                "interval-measure",
                "--replicas",
                "2",
                "--set",
                "timeline.horizon=5",
                "--set",
                "graph.window_side=10",
                "--output",
                p.to_str().unwrap(),
            ]))
            .unwrap();
        }
        let a = std::fs::read_to_string(&p1).unwrap();
        let b = std::fs::read_to_string(&p2).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("replica,component_start"));
    }
}
