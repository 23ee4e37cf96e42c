//! Command-line front end: configuration parsing, protocol evaluation,
//! depolarizing sweeps and figure-data reproduction.

pub mod config;
pub mod output;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use seqdisc_core::noisy_opt::{depolarizing_sweep, gamma_grid, DEFAULT_GRID};
use seqdisc_core::{
    helstrom_bound, optimal_projectors, optimal_two_state_protocol, random, success_direct, success_product,
    Ensemble, Error, Instrument, Protocol, Representations, RotatedBases, Variant,
};

use config::{matrix_from_spec, receiver_to_spec, receivers_from_spec, ProtocolSpec, RunConfig};
use output::{csv_string, fmt_matrix, fmt_num, write_csv};

pub const DEFAULT_STEPS: usize = 201;

pub const SWEEP_HEADER: [&str; 5] = ["gamma", "helstrom", "p_opt_N1", "p_opt_N2_closed", "p_opt_N2_numeric"];
pub const FIGURE_HEADER: [&str; 6] = ["q1", "gamma", "helstrom", "p_opt_N1", "p_opt_N2_closed", "p_opt_N2_numeric"];

/// Bloch-vector pairs of the two figure panels and their prior values of `q₁`.
pub const FIGURES: [(&str, [[f64; 3]; 2]); 2] = [
    ("fig1.csv", [[0.3, 0.3, 0.3], [0.3, 0.3, -0.3]]),
    ("fig2.csv", [[0.2, 0.3, -0.4], [-0.2, -0.3, 0.35]]),
];
pub const FIGURE_PRIORS: [f64; 2] = [0.5, 0.55];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

/// Errors raised while computing on a valid configuration.
fn compute_err(e: Error) -> CliError {
    match e {
        Error::ZeroProbabilityOutcome { .. } | Error::DegenerateSpectrum(_) | Error::ConditionNotSatisfied { .. } => {
            CliError::Numerical(e.to_string())
        }
        _ => CliError::Config(e.to_string()),
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "seqdisc", version, about = "Sequential conclusive discrimination of quantum states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (output directory for reproduce-figures).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Sphere-grid size of the numeric maximizer.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Number of γ samples in sweeps.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Seed for randomly drawn protocols.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Helstrom bound, optimal projectors, and the optimal protocol's success for N = 1..receivers.
    Helstrom,
    /// Success probability of a configured protocol by all three evaluations.
    Simulate,
    /// Emit the optimal protocol as a configuration with explicit receivers.
    OptimalProtocol,
    /// CSV of one- and two-receiver optima under depolarizing noise, γ₁ = γ₂ = γ.
    NoisySweep,
    /// Write fig1.csv and fig2.csv with the optimum curves of the two reference ensembles.
    ReproduceFigures,
}

pub fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let path = path.ok_or_else(|| CliError::Config("--config is required for this command".into()))?;
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    RunConfig::parse(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| io_err(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match cli.command {
        Command::ReproduceFigures => {
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let written = reproduce_figures(&dir, cli.steps.unwrap_or(DEFAULT_STEPS), cli.grid.unwrap_or(DEFAULT_GRID))?;
            for p in written {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        cmd => {
            let cfg = load_config(cli.config.as_deref())?;
            let text = match cmd {
                Command::Helstrom => helstrom_report(&cfg)?,
                Command::Simulate => simulate_report(&cfg, cli.seed)?,
                Command::OptimalProtocol => optimal_protocol_config(&cfg)?,
                Command::NoisySweep => noisy_sweep_csv(&cfg, cli.steps, cli.grid)?,
                Command::ReproduceFigures => unreachable!(),
            };
            emit(cli.out.as_deref(), &text)
        }
    }
}

pub fn helstrom_report(cfg: &RunConfig) -> Result<String, CliError> {
    let e = cfg.ensemble()?;
    let n = cfg.receiver_count()?;
    let bound = helstrom_bound(&e).map_err(compute_err)?;
    let p0 = optimal_projectors(&e).map_err(compute_err)?;
    let mut s = String::new();
    writeln!(s, "helstrom_bound = {}", fmt_num(bound)).unwrap();
    writeln!(s, "P0(1) = {}", fmt_matrix(&p0[0])).unwrap();
    writeln!(s, "P0(2) = {}", fmt_matrix(&p0[1])).unwrap();
    for k in 1..=n {
        let p = optimal_two_state_protocol(&e, k, &Variant::Projective).map_err(compute_err)?;
        let success = success_direct(&p, &e).map_err(compute_err)?;
        writeln!(s, "N = {k}: success = {}, deviation = {}", fmt_num(success), fmt_num((success - bound).abs())).unwrap();
    }
    Ok(s)
}

/// Receivers described by the configuration (optimal projective when no protocol is given).
pub fn build_receivers(cfg: &RunConfig, e: &Ensemble, seed: Option<u64>) -> Result<Vec<Instrument>, CliError> {
    let n = cfg.receiver_count()?;
    let spec = cfg.protocol.clone().unwrap_or(ProtocolSpec::Optimal);
    let receivers = match spec {
        ProtocolSpec::Optimal => {
            optimal_two_state_protocol(e, n, &Variant::Projective).map_err(compute_err)?.receivers().to_vec()
        }
        ProtocolSpec::Rotated { rotation } => {
            let w = matrix_from_spec("protocol.rotation", &rotation)?;
            let bases = RotatedBases::rotated(e, &w).map_err(compute_err)?;
            optimal_two_state_protocol(e, n, &Variant::Rotated(bases)).map_err(compute_err)?.receivers().to_vec()
        }
        ProtocolSpec::Luders { projectors } => {
            let ps = projectors
                .iter()
                .enumerate()
                .map(|(k, m)| matrix_from_spec(&format!("protocol.projectors[{k}]"), m))
                .collect::<Result<Vec<_>, _>>()?;
            let m = Instrument::luders(&ps).map_err(|err| CliError::Config(format!("protocol.projectors: {err}")))?;
            vec![m; n]
        }
        ProtocolSpec::Kraus { receivers } => receivers_from_spec(&receivers)?,
        ProtocolSpec::Random { kraus_per_outcome, seed: cfg_seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.or(cfg_seed).unwrap_or(0));
            let l = kraus_per_outcome.unwrap_or(2);
            if l == 0 {
                return Err(CliError::Config("protocol.kraus_per_outcome: must be at least 1".into()));
            }
            (0..n).map(|_| random::instrument(&mut rng, e.dim(), e.len(), l)).collect()
        }
    };
    Ok(receivers)
}

pub fn build_protocol(cfg: &RunConfig, e: &Ensemble, seed: Option<u64>) -> Result<Protocol, CliError> {
    let receivers = build_receivers(cfg, e, seed)?;
    let p = match cfg.channels()? {
        Some(ch) => Protocol::with_channels(receivers, ch),
        None => Protocol::new(receivers),
    };
    p.map_err(|err| CliError::Config(format!("protocol: {err}")))
}

/// Success probability through explicit normalized posteriors; fails on a
/// vanishing intermediate outcome probability.
pub fn posterior_walk(p: &Protocol, e: &Ensemble) -> Result<f64, Error> {
    let mut total = 0.0;
    for (j, (rho, q)) in e.states().iter().zip(e.priors()).enumerate() {
        let mut state = rho.clone();
        let mut prob = 1.0;
        for (n, m) in p.receivers().iter().enumerate() {
            if let Some(ch) = p.channels() {
                state = ch[n].apply_state(&state)?;
            }
            prob *= m.outcome_probability(j, &state)?;
            if n + 1 < p.len() {
                state = m.posterior(j, &state)?;
            }
        }
        total += q * prob;
    }
    Ok(total)
}

pub fn simulate_report(cfg: &RunConfig, seed: Option<u64>) -> Result<String, CliError> {
    let e = cfg.ensemble()?;
    let p = build_protocol(cfg, &e, seed)?;
    let reps = Representations::evaluate(&p, &e).map_err(compute_err)?;
    let product = success_product(&p, &e).map_err(compute_err)?;
    let mut s = String::new();
    writeln!(s, "receivers = {}", p.len()).unwrap();
    writeln!(s, "success_direct = {}", fmt_num(reps.direct)).unwrap();
    writeln!(s, "success_chain = {}", fmt_num(reps.chain)).unwrap();
    writeln!(s, "success_product = {}", fmt_num(reps.product)).unwrap();
    writeln!(s, "max_deviation = {}", fmt_num(reps.max_deviation())).unwrap();
    let factors: Vec<String> = product.per_receiver_factors.iter().map(|x| fmt_num(*x)).collect();
    writeln!(s, "per_receiver_factors = [{}]", factors.join(", ")).unwrap();
    if cfg.posterior_explicit() {
        let walk = posterior_walk(&p, &e).map_err(compute_err)?;
        writeln!(s, "success_posterior_walk = {}", fmt_num(walk)).unwrap();
    }
    Ok(s)
}

/// The optimal protocol as a configuration with explicit Kraus receivers,
/// preceded by comment lines with its success probability.
pub fn optimal_protocol_config(cfg: &RunConfig) -> Result<String, CliError> {
    let e = cfg.ensemble()?;
    let n = cfg.receiver_count()?;
    let variant = match &cfg.protocol {
        None | Some(ProtocolSpec::Optimal) => Variant::Projective,
        Some(ProtocolSpec::Rotated { rotation }) => {
            let w = matrix_from_spec("protocol.rotation", rotation)?;
            Variant::Rotated(RotatedBases::rotated(&e, &w).map_err(compute_err)?)
        }
        Some(_) => return Err(CliError::Config("protocol: optimal-protocol accepts type `optimal` or `rotated`".into())),
    };
    let p = optimal_two_state_protocol(&e, n, &variant).map_err(compute_err)?;
    let bound = helstrom_bound(&e).map_err(compute_err)?;
    let success = success_direct(&p, &e).map_err(compute_err)?;
    let explicit = RunConfig {
        receivers: Some(n),
        ensemble: cfg.ensemble.clone(),
        channels: None,
        protocol: Some(ProtocolSpec::Kraus { receivers: p.receivers().iter().map(receiver_to_spec).collect() }),
        sweep: None,
        simulate: None,
    };
    Ok(format!(
        "# helstrom_bound = {}\n# success = {}\n{}",
        fmt_num(bound),
        fmt_num(success),
        explicit.to_toml()
    ))
}

fn sweep_rows(e: &Ensemble, gammas: &[f64], grid: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let points = depolarizing_sweep(e, gammas, grid).map_err(compute_err)?;
    Ok(points.iter().map(|p| vec![p.gamma, p.helstrom, p.one_receiver, p.two_closed, p.two_numeric]).collect())
}

pub fn noisy_sweep_csv(cfg: &RunConfig, steps: Option<usize>, grid: Option<usize>) -> Result<String, CliError> {
    let e = cfg.ensemble()?;
    if e.len() != 2 || e.dim() != 2 {
        return Err(CliError::Config("ensemble: noisy-sweep needs two qubit states".into()));
    }
    let sw = cfg.sweep();
    let steps = steps.or(sw.steps).unwrap_or(DEFAULT_STEPS);
    let grid = grid.or(sw.grid).unwrap_or(DEFAULT_GRID);
    let gammas = gamma_grid(sw.gamma_start.unwrap_or(0.0), sw.gamma_end.unwrap_or(1.0), steps)
        .map_err(|err| CliError::Config(format!("sweep: {err}")))?;
    if grid < 2 {
        return Err(CliError::Config(format!("grid: {grid} points is too small")));
    }
    Ok(csv_string(&SWEEP_HEADER, &sweep_rows(&e, &gammas, grid)?))
}

/// Rows `q₁, γ, helstrom, N1, N2 closed, N2 numeric` of one figure panel pair.
pub fn figure_rows(bloch: [[f64; 3]; 2], steps: usize, grid: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let gammas = gamma_grid(0.0, 1.0, steps).map_err(|e| CliError::Config(format!("steps: {e}")))?;
    if grid < 2 {
        return Err(CliError::Config(format!("grid: {grid} points is too small")));
    }
    let mut rows = Vec::with_capacity(FIGURE_PRIORS.len() * steps);
    for q1 in FIGURE_PRIORS {
        let e = Ensemble::from_bloch(&bloch, vec![q1, 1.0 - q1]).map_err(compute_err)?;
        for row in sweep_rows(&e, &gammas, grid)? {
            let mut r = vec![q1];
            r.extend(row);
            rows.push(r);
        }
    }
    Ok(rows)
}

pub fn reproduce_figures(dir: &Path, steps: usize, grid: usize) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::new();
    for (name, bloch) in FIGURES {
        let rows = figure_rows(bloch, steps, grid)?;
        let path = dir.join(name);
        let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        write_csv(std::io::BufWriter::new(file), &FIGURE_HEADER, &rows).map_err(|e| io_err(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
