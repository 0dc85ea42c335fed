//! `reslab`: enumerate resonances, analyse clusters, simulate the effective
//! equations and check the averaging approximation.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use reslab_core::direct::DEVIATION_FLOOR;
use reslab_core::dynamics::WIENER_CONVENTION;
use reslab_core::export;
use reslab_core::resonance::enumerate_bruteforce_capped;
use reslab_core::{
    averaging_error, build_graph, component_stats, find_nstars, resonance_set, simulate_ensemble, BoxShape, Case,
    Damping, Error, Forcing, ModeSystem, Scheme, StateVector, WaveVector,
};
use serde::Serialize;

use config::{parse_damping, parse_forcing, parse_nu_list, validate_nu_list, Format, Listing, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::BoundExceeded { .. } | Error::Aborted(_) => CliError::Compute(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "reslab", version, about = "Resonant triads and stochastic effective dynamics on the lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List resonant triads, or the pairs of S1/S2 for one k3.
    Enumerate(EnumerateArgs),
    /// Triad graph, connection types, components and N-stars.
    Clusters(ClustersArgs),
    /// Ensemble simulation of the effective equations.
    Simulate(SimulateArgs),
    /// Compare direct and effective dynamics on a descending nu ladder.
    ValidateAveraging(AveragingArgs),
}

#[derive(Args)]
struct Common {
    /// TOML or JSON run configuration. Flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Lattice bound K.
    #[arg(long)]
    bound: Option<i32>,
    /// `square:L` or `rect:p,q`.
    #[arg(long = "box")]
    shape: Option<BoxShape>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    set: Option<Listing>,
    /// Target vector `X,Y` for `--set s1|s2`.
    #[arg(long, allow_hyphen_values = true)]
    k3: Option<WaveVector>,
    /// Refuse bounds above this value.
    #[arg(long)]
    max_bound: Option<i32>,
}

#[derive(Args)]
struct ClustersArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    max_bound: Option<i32>,
}

#[derive(Args)]
struct Model {
    #[arg(long)]
    case: Option<Case>,
    #[arg(long)]
    mu: Option<f64>,
    /// `zero`, `linear`, `quadratic` or `const:V`.
    #[arg(long, value_parser = parse_damping)]
    damping: Option<Damping>,
    /// `const:V` or `power:S`.
    #[arg(long, value_parser = parse_forcing)]
    forcing: Option<Forcing>,
    /// Shorthand for `--forcing const:B`.
    #[arg(long, conflicts_with = "forcing")]
    b: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    emit_plot_data: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: Model,
    /// Slow-time step.
    #[arg(long)]
    h: Option<f64>,
    /// Slow-time horizon.
    #[arg(long = "T", alias = "horizon")]
    horizon: Option<f64>,
    #[arg(long)]
    ensemble: Option<usize>,
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    checkpoints: Option<usize>,
}

#[derive(Args)]
struct AveragingArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: Model,
    /// Comma-separated, strictly descending.
    #[arg(long)]
    nu: Option<String>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    h_fast: Option<f64>,
    #[arg(long = "T", alias = "horizon")]
    horizon: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("reslab: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Enumerate(a) => enumerate(a),
        Command::Clusters(a) => clusters(a),
        Command::Simulate(a) => simulate(a),
        Command::ValidateAveraging(a) => validate_averaging(a),
    }
}

/// Config file, then `RESLAB_SEED`, then flags.
fn resolve(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply_env()?;
    if let Some(b) = common.bound {
        cfg.domain.bound = b;
    }
    if let Some(s) = common.shape {
        cfg.domain.shape = s;
    }
    if let Some(f) = common.format {
        cfg.output.format = f;
    }
    if let Some(o) = &common.out {
        cfg.output.dir = o.clone();
    }
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(cfg)
}

fn apply_model(cfg: &mut RunConfig, m: &Model) {
    if let Some(c) = m.case {
        cfg.model.case = c;
    }
    if let Some(mu) = m.mu {
        cfg.model.mu = mu;
    }
    if let Some(d) = m.damping {
        cfg.model.damping = d;
    }
    if let Some(f) = m.forcing {
        cfg.model.forcing = f;
    }
    if let Some(value) = m.b {
        cfg.model.forcing = Forcing::Constant { value };
    }
    if let Some(s) = m.seed {
        cfg.seed = s;
    }
    if m.emit_plot_data {
        cfg.output.emit_plot_data = true;
    }
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn create(cfg: &RunConfig) -> Result<Self, CliError> {
        let dir = cfg.output.dir.clone();
        std::fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
        let out = Self { dir };
        out.write("resolved-config.toml", &cfg.to_toml())?;
        Ok(out)
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| io_error(&path, e))
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Compute(format!("{}: {e}", path.display()))
}

fn enumerate(a: EnumerateArgs) -> Result<(), CliError> {
    let mut cfg = resolve(&a.common)?;
    if let Some(s) = a.set {
        cfg.enumerate.set = s;
    }
    if let Some(k) = a.k3 {
        cfg.enumerate.k3 = Some(k);
    }
    if let Some(m) = a.max_bound {
        cfg.domain.max_bound = m;
    }
    let domain = cfg.domain()?;
    let json = cfg.output.format == Format::Json;

    match cfg.set_kind() {
        None => {
            let triads = enumerate_bruteforce_capped(&domain, cfg.domain.max_bound)?;
            let out = Output::create(&cfg)?;
            if json {
                out.write("triads.json", &export::triads_json(&triads))?;
            } else {
                out.write("triads.csv", &export::triads_csv(&triads))?;
            }
            println!("triads: {}", triads.len());
        }
        Some(kind) => {
            let k3 = cfg.enumerate.k3.ok_or_else(|| CliError::Usage(format!("--set {kind} requires --k3 X,Y")))?;
            if domain.bound() > cfg.domain.max_bound {
                return Err(Error::BoundExceeded { bound: domain.bound(), max: cfg.domain.max_bound }.into());
            }
            let pairs = resonance_set(kind, k3, &domain);
            let out = Output::create(&cfg)?;
            let stem = format!("{kind}_pairs");
            if json {
                out.write(&format!("{stem}.json"), &pairs_json(kind.to_string(), k3, &pairs))?;
            } else {
                out.write(&format!("{stem}.csv"), &pairs_csv(&pairs))?;
            }
            println!("{kind}({k3}): {}", pairs.len());
        }
    }
    Ok(())
}

fn pairs_csv(pairs: &[(WaveVector, WaveVector)]) -> String {
    let mut s = String::from("k1x,k1y,k2x,k2y\n");
    for (k1, k2) in pairs {
        s.push_str(&format!("{},{},{},{}\n", k1.x, k1.y, k2.x, k2.y));
    }
    s
}

fn pairs_json(set: String, k3: WaveVector, pairs: &[(WaveVector, WaveVector)]) -> String {
    #[derive(Serialize)]
    struct Pair {
        k1: WaveVector,
        k2: WaveVector,
    }
    #[derive(Serialize)]
    struct Listing {
        set: String,
        k3: WaveVector,
        count: usize,
        pairs: Vec<Pair>,
    }
    let pairs: Vec<Pair> = pairs.iter().map(|&(k1, k2)| Pair { k1, k2 }).collect();
    export::to_json(&Listing { set, k3, count: pairs.len(), pairs })
}

fn clusters(a: ClustersArgs) -> Result<(), CliError> {
    let mut cfg = resolve(&a.common)?;
    if let Some(m) = a.max_bound {
        cfg.domain.max_bound = m;
    }
    let domain = cfg.domain()?;
    let triads = enumerate_bruteforce_capped(&domain, cfg.domain.max_bound)?;
    let graph = build_graph(&triads);
    let stars = find_nstars(&triads);
    let summary = component_stats(&graph);
    let out = Output::create(&cfg)?;
    out.write("edges.txt", &export::edge_list(&graph))?;
    if cfg.output.format == Format::Json {
        out.write("clusters.json", &export::clusters_json(&graph, &stars, &summary))?;
    } else {
        out.write("nodes.csv", &export::nodes_csv(&graph))?;
        out.write("components.csv", &export::components_csv(&summary))?;
        out.write("stars.csv", &export::stars_csv(&stars))?;
    }
    println!(
        "triads: {}  vectors: {}  edges: {}  components: {}  stars: {}",
        summary.total_triads,
        summary.total_vectors,
        summary.total_edges.total(),
        summary.components.len(),
        stars.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct SimulateMetadata<'a> {
    case: Case,
    seed: u64,
    scheme: Scheme,
    wiener_convention: &'a str,
    modes: usize,
    paths_requested: usize,
    paths_completed: usize,
    aborted: &'a [reslab_core::dynamics::PathAbort],
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let mut cfg = resolve(&a.common)?;
    apply_model(&mut cfg, &a.model);
    let s = &mut cfg.simulation;
    if let Some(h) = a.h {
        s.step = h;
    }
    if let Some(t) = a.horizon {
        s.horizon = t;
    }
    if let Some(n) = a.ensemble {
        s.ensemble = n;
    }
    if let Some(sc) = a.scheme {
        s.scheme = sc;
    }
    if let Some(c) = a.checkpoints {
        s.checkpoints = c;
    }
    let domain = cfg.domain()?;
    let sim = cfg.sim_config();
    sim.validate()?;
    let sys = ModeSystem::from_profiles(cfg.model.case, &domain, cfg.model.mu, cfg.model.damping, cfg.model.forcing)?;
    let init = Complex64::new(cfg.simulation.initial[0], cfg.simulation.initial[1]);
    let initial = StateVector::new(vec![init; sys.len()]);
    let stats = simulate_ensemble(&sys, &sim, &initial)?;

    let out = Output::create(&cfg)?;
    let meta = SimulateMetadata {
        case: cfg.model.case,
        seed: cfg.seed,
        scheme: sim.scheme,
        wiener_convention: WIENER_CONVENTION,
        modes: sys.len(),
        paths_requested: sim.ensemble,
        paths_completed: stats.paths,
        aborted: &stats.aborted,
    };
    out.write("metadata.json", &export::to_json(&meta))?;
    if cfg.output.format == Format::Json {
        out.write("ensemble.json", &export::to_json(&stats))?;
    } else {
        out.write("modes.csv", &export::modes_csv(&sys.modes))?;
        out.write("timeseries.csv", &export::timeseries_csv(&stats))?;
        out.write("spectrum.csv", &export::spectrum_csv(&stats))?;
    }
    if cfg.output.emit_plot_data {
        out.write("plot_timeseries.csv", &export::timeseries_plot_data(&stats))?;
    }
    println!("modes: {}  paths: {}/{}", sys.len(), stats.paths, sim.ensemble);
    if stats.is_partial() {
        return Err(CliError::Compute(format!(
            "{} of {} paths aborted; statistics cover the rest",
            stats.aborted.len(),
            sim.ensemble
        )));
    }
    Ok(())
}

fn validate_averaging(a: AveragingArgs) -> Result<(), CliError> {
    let mut cfg = resolve(&a.common)?;
    apply_model(&mut cfg, &a.model);
    if let Some(raw) = &a.nu {
        cfg.averaging.nu = parse_nu_list(raw)?;
    }
    validate_nu_list(&cfg.averaging.nu)?;
    if let Some(p) = a.paths {
        cfg.averaging.paths = p;
    }
    if let Some(h) = a.h_fast {
        cfg.averaging.h_fast = Some(h);
    }
    if let Some(t) = a.horizon {
        cfg.averaging.horizon = t;
    }
    let domain = cfg.domain()?;
    let table = averaging_error(cfg.model.case, &cfg.averaging.nu, &domain, &cfg.averaging_config())?;

    let out = Output::create(&cfg)?;
    if cfg.output.format == Format::Json {
        out.write("averaging.json", &export::to_json(&table))?;
    } else {
        out.write("averaging.csv", &export::averaging_csv(&table))?;
    }
    if cfg.output.emit_plot_data {
        out.write("plot_averaging.csv", &export::averaging_plot_data(&table))?;
    }
    for r in &table.rows {
        println!("nu={}  max_dev={:.6e}  l2_dev={:.6e}", r.nu, r.max_dev, r.l2_dev);
    }
    if !table.decreases_above(DEVIATION_FLOOR) {
        return Err(CliError::Compute("deviation is not strictly decreasing along the nu ladder".into()));
    }
    println!("deviation decreases monotonically");
    Ok(())
}
