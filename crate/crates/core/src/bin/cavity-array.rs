use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cavity_array::sweep::{run_and_write, Backend, Dataset, RunConfig};
use cavity_array::Error;

#[derive(Parser, Debug)]
#[command(version, about = "Ground states and phase diagrams of coupled-cavity arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug)]
struct Global {
    /// TOML run configuration; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// ed, dmrg or auto.
    #[arg(long, global = true)]
    backend: Option<String>,
    /// Photon cutoff per cavity.
    #[arg(long, global = true)]
    max_photons: Option<u32>,
    /// DMRG block states kept (sweeps and warmup).
    #[arg(long, global = true)]
    kept_states: Option<usize>,
    /// Abort on the first unconverged or failed sub-task (exit code 3 for
    /// convergence failures).
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Args, Debug)]
struct Chain {
    #[arg(long)]
    length: Option<usize>,
    #[arg(long)]
    n_pol: Option<u32>,
    #[arg(long)]
    hopping: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single-cavity spectra, U_eff and hopping weights.
    Site,
    /// One chain by exact diagonalization.
    Ed(Chain),
    /// One chain by DMRG.
    Dmrg(Chain),
    /// Lobe boundaries, compressibility and 1/L extrapolation.
    PhaseDiagram,
    /// Momentum distribution and visibility.
    Visibility,
    /// Critical-hopping estimate against atom number.
    Tstar,
    /// Lobe widths or t* against detuning.
    Detuning,
    /// Atom-number disorder statistics and the glass window.
    Glass,
}

fn resolve(cli: &Cli) -> Result<(Dataset, RunConfig), Error> {
    let g = &cli.global;
    let mut config = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &g.out {
        config.out = out.clone();
    }
    if let Some(seed) = g.seed {
        config.seed = seed;
    }
    if let Some(w) = g.workers {
        config.workers = w;
    }
    if let Some(b) = &g.backend {
        config.backend = b.parse::<Backend>()?;
    }
    if let Some(n) = g.max_photons {
        config.model = config.model.with_cutoff(n);
    }
    if let Some(m) = g.kept_states {
        config.dmrg = config.dmrg.clone().with_kept_states(m);
    }
    config.strict |= g.strict;
    let dataset = match &cli.command {
        Command::Site => Dataset::Site,
        Command::Ed(c) | Command::Dmrg(c) => {
            let s = &mut config.single;
            s.length = c.length.unwrap_or(s.length);
            s.n_pol = c.n_pol.or(s.n_pol);
            s.hopping = c.hopping.unwrap_or(s.hopping);
            if matches!(cli.command, Command::Ed(_)) {
                Dataset::Ed
            } else {
                Dataset::Dmrg
            }
        }
        Command::PhaseDiagram => Dataset::PhaseDiagram,
        Command::Visibility => Dataset::Visibility,
        Command::Tstar => Dataset::TStar,
        Command::Detuning => Dataset::Detuning,
        Command::Glass => Dataset::Glass,
    };
    Ok((dataset, config))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = resolve(&cli).and_then(|(dataset, config)| {
        let (output, written) = run_and_write(dataset, &config)?;
        eprintln!(
            "{} rows ({} failed) -> {}",
            output.records.len(),
            output.failures.len(),
            written.csv.display()
        );
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::InvalidSpec(_) => 2,
                Error::NotConverged { .. } | Error::CrossCheck { .. } => 3,
                _ => 1,
            })
        }
    }
}
