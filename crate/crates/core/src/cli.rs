//! Command-line front end: config loading, subcommand dispatch, CSV and JSON output.

use crate::convexity;
use crate::density::RadialDensity;
use crate::energy;
use crate::error::{Error, Result};
use crate::evolve::{EvolveOptions, Simulator};
use crate::kernel::{Kernel, ModelParams};
use crate::potential;
use crate::specfun::{self, HypergeomParams};
use crate::steady::{self, SolverOptions};
use crate::transport;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const OUT_ENV: &str = "AGGDIFF_OUT";
const DEFAULT_OUT: &str = "aggdiff-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "aggdiff", version, about = "Radial aggregation-diffusion toolkit")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// TOML config file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// spatial dimension N
    #[arg(long, global = true)]
    n: Option<usize>,
    /// kernel exponent k
    #[arg(long, global = true, allow_hyphen_values = true)]
    k: Option<f64>,
    /// diffusion exponent m, or `mc` for the fair-competition value 1 - k/N
    #[arg(long, global = true)]
    m: Option<String>,
    /// confinement switch (0 or 1)
    #[arg(long, global = true)]
    chi: Option<f64>,
    /// total mass M
    #[arg(long, global = true)]
    mass: Option<f64>,
    /// number of grid cells
    #[arg(long, global = true)]
    cells: Option<usize>,
    /// outer grid radius where a fixed grid is used
    #[arg(long, global = true)]
    r_max: Option<f64>,
    /// RNG seed for random densities
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// output directory (default: $AGGDIFF_OUT, then ./aggdiff-out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// override a tolerance, e.g. --tol steady=1e-11
    #[arg(long = "tol", global = true, value_parser = parse_tol)]
    tols: Vec<(String, f64)>,
}

fn parse_tol(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = v.parse().map_err(|e| format!("{name}: {e}"))?;
    Ok((name.trim().to_string(), v))
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate 2F1(a,b;c;z) and its identity residuals
    Hyp {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
    },
    /// Tabulate the radial kernel profile and its derivative on (0,1)
    Theta {
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Attractive potential of a density at cell centers
    Potential {
        /// density CSV (`r,rho`); default is the uniform ball of radius r_max/2
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Free-energy breakdown of a density
    Energy {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Compute the radial steady state and its diagnostics
    Steady,
    /// Monotone transport from the steady state onto a density
    Transport {
        /// density CSV to transport onto; default is a seeded random density
        #[arg(long)]
        input: Option<PathBuf>,
        /// reference density CSV; default is the computed steady state
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Residual lattice for the comparison inequality plus a table of tangent lines
    ConvexityScan {
        #[arg(long, default_value_t = 200)]
        resolution: usize,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Compare F on random densities against the steady state
    InequalityFuzz {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// cells per random density
        #[arg(long, default_value_t = 64)]
        fuzz_cells: usize,
    },
    /// Evolve the gradient flow from an initial density
    Simulate {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        /// write a snapshot every this many steps
        #[arg(long, default_value_t = 1000)]
        snapshot_every: usize,
        /// convolution refresh interval in steps
        #[arg(long, default_value_t = 1)]
        refresh_every: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Hyp { .. } => "hyp",
            Command::Theta { .. } => "theta",
            Command::Potential { .. } => "potential",
            Command::Energy { .. } => "energy",
            Command::Steady => "steady",
            Command::Transport { .. } => "transport",
            Command::ConvexityScan { .. } => "convexity-scan",
            Command::InequalityFuzz { .. } => "inequality-fuzz",
            Command::Simulate { .. } => "simulate",
        }
    }
}

/// `m` as a number or the literal `mc`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Exponent {
    Value(f64),
    Named(String),
}

impl Exponent {
    fn parse(s: &str) -> Self {
        s.parse::<f64>().map(Exponent::Value).unwrap_or_else(|_| Exponent::Named(s.to_string()))
    }

    fn resolve(&self, n: usize, k: f64) -> Result<f64> {
        match self {
            Exponent::Value(v) => Ok(*v),
            Exponent::Named(s) if s == "mc" => Ok(1.0 - k / n as f64),
            Exponent::Named(s) => Err(Error::Config(format!("m: expected a number or `mc`, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ParamSection {
    pub n: usize,
    pub k: f64,
    pub m: Exponent,
    pub chi: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub cells: usize,
    pub r_max: f64,
}

/// Run configuration as read from TOML.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub params: ParamSection,
    pub grid: GridSection,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ParamSection {
                n: 3,
                k: -1.0,
                m: Exponent::Value(2.0),
                chi: 0.0,
                mass: 1.0,
            },
            grid: GridSection { cells: 200, r_max: 2.0 },
            tolerances: default_tolerances(),
            seed: 1,
            output_dir: None,
        }
    }
}

fn default_tolerances() -> BTreeMap<String, f64> {
    [
        ("steady", 1e-12),
        ("characterization", 1e-5),
        ("variance", 1e-10),
        ("identity", 1e-6),
        ("virial", 1e-5),
        ("fuzz", 1e-6),
        ("scan", 1e-9),
        ("stall", 1e-5),
        ("transport", 1e-5),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        // missing tolerance keys keep their defaults
        for (k, v) in default_tolerances() {
            cfg.tolerances.entry(k).or_insert(v);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::Config(format!("tolerance `{k}` must be positive, got {v}")));
        }
        if self.grid.cells < 16 {
            return Err(Error::Config(format!("grid.cells must be at least 16, got {}", self.grid.cells)));
        }
        if !(self.grid.r_max > 0.0) {
            return Err(Error::Config(format!("grid.r_max must be positive, got {}", self.grid.r_max)));
        }
        self.model().map(|_| ())
    }

    pub fn model(&self) -> Result<ModelParams> {
        let p = &self.params;
        let m = p.m.resolve(p.n, p.k)?;
        ModelParams::new(p.n, p.k, m, p.chi, p.mass)
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    fn apply(&mut self, a: &CommonArgs) {
        if let Some(v) = a.n {
            self.params.n = v;
        }
        if let Some(v) = a.k {
            self.params.k = v;
        }
        if let Some(v) = &a.m {
            self.params.m = Exponent::parse(v);
        }
        if let Some(v) = a.chi {
            self.params.chi = v;
        }
        if let Some(v) = a.mass {
            self.params.mass = v;
        }
        if let Some(v) = a.cells {
            self.grid.cells = v;
        }
        if let Some(v) = a.r_max {
            self.grid.r_max = v;
        }
        if let Some(v) = a.seed {
            self.seed = v;
        }
        if let Some(v) = &a.out {
            self.output_dir = Some(v.clone());
        }
        for (k, v) in &a.tols {
            self.tolerances.insert(k.clone(), *v);
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }
}

/// What a subcommand produced.
struct Outcome {
    files: Vec<(String, String)>,
    summary: serde_json::Value,
    verified: bool,
}

impl Outcome {
    fn ok(files: Vec<(String, String)>, summary: serde_json::Value) -> Self {
        Outcome {
            files,
            summary,
            verified: true,
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config: &'a RunConfig,
    files: Vec<&'a str>,
    verified: bool,
    elapsed_seconds: f64,
    summary: &'a serde_json::Value,
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match run(cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFY,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidParams(_) | Error::Io(_) | Error::InvalidDensity(_) => EXIT_USAGE,
                _ => EXIT_VERIFY,
            }
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = match &cli.common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            RunConfig::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    cfg.apply(&cli.common);
    cfg.validate()?;
    let threads = cli.common.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let outcome = pool.install(|| execute(&cli.cmd, &cfg))?;
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir)?;
    for (name, body) in &outcome.files {
        std::fs::write(dir.join(name), body)?;
    }
    let manifest = Manifest {
        command: cli.cmd.name(),
        version: env!("CARGO_PKG_VERSION"),
        config: &cfg,
        files: outcome.files.iter().map(|f| f.0.as_str()).collect(),
        verified: outcome.verified,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        summary: &outcome.summary,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(dir.join(format!("{}.manifest.json", cli.cmd.name())), text)?;
    println!("{}", serde_json::to_string_pretty(&outcome.summary).map_err(|e| Error::Io(e.to_string()))?);
    Ok(outcome.verified)
}

fn read_density(path: &Path) -> Result<RadialDensity> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    RadialDensity::from_csv(&text)
}

fn input_or_ball(input: &Option<PathBuf>, cfg: &RunConfig, p: &ModelParams) -> Result<RadialDensity> {
    match input {
        Some(path) => read_density(path),
        None => RadialDensity::uniform_ball(p.n, p.mass, 0.5 * cfg.grid.r_max, cfg.grid.cells),
    }
}

fn json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

fn solve_steady(cfg: &RunConfig, p: &ModelParams) -> Result<steady::SteadyState> {
    let opts = SolverOptions {
        tol: cfg.tol("steady"),
        ..Default::default()
    };
    steady::solve_auto(p, cfg.grid.cells, &opts)
}

fn execute(cmd: &Command, cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.model()?;
    match cmd {
        Command::Hyp { a, b, c, z } => {
            let hp = HypergeomParams::new(*a, *b, *c, *z);
            let value = specfun::hyp2f1(hp)?;
            let ids = specfun::identity_residuals(hp).ok();
            let summary = serde_json::json!({ "value": value, "identities": ids.map(|r| json(&r)) });
            Ok(Outcome::ok(vec![("hyp.json".into(), summary.to_string())], summary))
        }
        Command::Theta { points } => {
            let ker = Kernel::from_params(&p)?;
            let mut csv = String::from("s,theta,theta_prime\n");
            for i in 1..=*points {
                let s = i as f64 / (*points + 1) as f64;
                let _ = writeln!(csv, "{s:.16e},{:.16e},{:.16e}", ker.theta(s)?, ker.theta_prime(s)?);
            }
            let summary = serde_json::json!({ "points": points, "d_n": ker.d_n() });
            Ok(Outcome::ok(vec![("theta.csv".into(), csv)], summary))
        }
        Command::Potential { input } => {
            let rho = input_or_ball(input, cfg, &p)?;
            let radii: Vec<f64> = rho.grid().windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
            let prof = potential::profile(&rho, &p, &radii)?;
            let mut csv = String::from("r,potential\n");
            for (r, v) in prof.radii.iter().zip(&prof.values) {
                let _ = writeln!(csv, "{r:.16e},{v:.16e}");
            }
            let summary = serde_json::json!({ "cells": rho.cells(), "mass": rho.mass(p.n) });
            Ok(Outcome::ok(vec![("potential.csv".into(), csv)], summary))
        }
        Command::Energy { input } => {
            let rho = input_or_ball(input, cfg, &p)?;
            let e = energy::evaluate(&rho, &p)?;
            let summary = json(&e);
            Ok(Outcome::ok(vec![("energy.json".into(), summary.to_string())], summary))
        }
        Command::Steady => {
            let ss = solve_steady(cfg, &p)?;
            let d = steady::diagnostics(&ss, &p)?;
            let verified = d.characterization_residual <= cfg.tol("characterization")
                && d.el_level_variance <= cfg.tol("variance")
                && d.energy_identity_gap <= cfg.tol("identity")
                && d.virial_residual <= cfg.tol("virial");
            let summary = json(&d);
            Ok(Outcome {
                files: vec![("steady.csv".into(), ss.density.to_csv()), ("steady.json".into(), summary.to_string())],
                summary,
                verified,
            })
        }
        Command::Transport { input, reference } => {
            let target = match input {
                Some(path) => read_density(path)?,
                None => crate::density::random_decreasing(cfg.seed, &p, 64)?,
            };
            let source = match reference {
                Some(path) => read_density(path)?,
                None => solve_steady(cfg, &p)?.density,
            };
            let map = transport::build_map(&source, &target, p.n)?;
            let pushed = transport::pushforward_energy(&map, &p)?;
            let direct = energy::evaluate(&target, &p)?;
            let rel = (pushed.total - direct.total).abs() / direct.total.abs().max(1e-300);
            let gaps = transport::jensen_gap(&map, &p);
            let verified = rel <= cfg.tol("transport");
            let summary = serde_json::json!({
                "pushforward": json(&pushed),
                "direct": json(&direct),
                "relative_difference": rel,
                "jensen_gaps": json(&gaps),
                "lower_bound": transport::transport_lower_bound(&map, &p),
            });
            Ok(Outcome {
                files: vec![("transport.csv".into(), map.to_csv()), ("transport.json".into(), summary.to_string())],
                summary,
                verified,
            })
        }
        Command::ConvexityScan { resolution, points } => {
            let rep = convexity::scan(p.n, p.k, *resolution, cfg.tol("scan"))?;
            let tangents = convexity::tangent_table(p.n, p.k, &[0.2, 0.4, 0.6, 0.8], *points)?;
            // violations are only forbidden for k in (-N, 2-N]
            let forbidden = p.k > -(p.n as f64) && p.k <= 2.0 - p.n as f64 + 1e-12;
            let verified = !forbidden || rep.violations.is_empty();
            let summary = serde_json::json!({
                "n": p.n,
                "k": p.k,
                "resolution": resolution,
                "violations": rep.violations.len(),
                "min_residual": rep.min_residual,
                "tangency_error": rep.tangency_error,
                "excluded_above": rep.excluded_above,
                "tangent_violations": tangents.violations(cfg.tol("scan")).len(),
                "worst": rep.violations.iter().min_by(|a, b| a.residual.total_cmp(&b.residual)).map(json),
            });
            Ok(Outcome {
                files: vec![("tangents.csv".into(), tangents.to_csv()), ("scan.json".into(), json(&rep).to_string())],
                summary,
                verified,
            })
        }
        Command::InequalityFuzz { trials, fuzz_cells } => {
            let ss = solve_steady(cfg, &p)?;
            let rep = transport::inequality_fuzz(&p, &ss.density, *trials, cfg.seed, *fuzz_cells)?;
            let tol = cfg.tol("fuzz") * rep.reference_energy.abs() + 1e-8;
            let mut csv = String::from("seed,gap\n");
            for (s, g) in &rep.gaps {
                let _ = writeln!(csv, "{s},{g:.16e}");
            }
            let summary = serde_json::json!({
                "trials": trials,
                "reference_energy": rep.reference_energy,
                "min_gap": rep.min_gap,
                "worst_seed": rep.worst_seed,
                "tolerance": tol,
            });
            Ok(Outcome {
                files: vec![("fuzz.csv".into(), csv)],
                summary,
                verified: rep.holds(tol),
            })
        }
        Command::Simulate {
            input,
            t_max,
            snapshot_every,
            refresh_every,
        } => {
            steady::check_regime(&p)?;
            let init = input_or_ball(input, cfg, &p)?;
            let grid = RadialDensity::uniform_grid(cfg.grid.r_max, cfg.grid.cells);
            let opts = EvolveOptions {
                refresh_every: *refresh_every,
                ..Default::default()
            };
            let sim = Simulator::new(&p, &grid, opts)?;
            let mut st = sim.start(&init)?;
            let every = (*snapshot_every).max(1);
            let mut snaps = String::from("t,r,rho\n");
            let snap = |st: &crate::evolve::SimState, out: &mut String| {
                let g = st.density.grid();
                for (j, v) in st.density.values().iter().enumerate() {
                    let _ = writeln!(out, "{:.16e},{:.16e},{v:.16e}", st.time, 0.5 * (g[j] + g[j + 1]));
                }
            };
            snap(&st, &mut snaps);
            let stall = cfg.tol("stall");
            let mut stalled = false;
            while st.time < *t_max {
                sim.step(&mut st)?;
                if st.steps % every == 0 {
                    snap(&st, &mut snaps);
                }
                if st.rate < stall {
                    stalled = true;
                    break;
                }
            }
            if st.steps % every != 0 {
                snap(&st, &mut snaps);
            }
            let mut energy_csv = String::from("t,energy\n");
            for (t, f) in &st.energy_history {
                let _ = writeln!(energy_csv, "{t:.16e},{f:.16e}");
            }
            let monotone = st
                .energy_history
                .windows(2)
                .all(|w| w[1].1 <= w[0].1 + 1e-8 * w[0].1.abs());
            let summary = serde_json::json!({
                "time": st.time,
                "steps": st.steps,
                "stalled": stalled,
                "rate": st.rate,
                "mass": st.density.mass(p.n),
                "energy": st.energy(),
                "energy_monotone": monotone,
            });
            Ok(Outcome {
                files: vec![
                    ("snapshots.csv".into(), snaps),
                    ("energy.csv".into(), energy_csv),
                    ("final.csv".into(), st.density.to_csv()),
                ],
                summary,
                verified: monotone,
            })
        }
    }
}
