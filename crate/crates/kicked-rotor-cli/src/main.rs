//! Command-line front end for kicked-rotor simulations.
//!
//! Exit codes: 0 on success, 1 on configuration/input errors, 2 on
//! numerical failures (eigensolver breakdown). Basis-overflow warnings are
//! logged to stderr and recorded in the manifest but do not abort a run.

mod config;
mod recipes;
mod runs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ClassicalAction, ExperimentConfig, Mode};
use recipes::Scale;

#[derive(Parser)]
#[command(
    name = "kicked-rotor",
    version,
    about = "Quantum and classical kicked-rotor experiments: propagation, spectra, classical maps, fits and sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every mode; each one overrides the corresponding config
/// file field.
#[derive(Args, Clone, Default)]
struct Overrides {
    /// Kick strength k
    #[arg(long, allow_negative_numbers = true)]
    k: Option<f64>,
    /// Effective Planck constant tau
    #[arg(long, allow_negative_numbers = true)]
    tau: Option<f64>,
    /// Sign-flip period in kicks
    #[arg(long = "M")]
    m_period: Option<u32>,
    /// Realization: plain_kr | mkr_sign_flip | mkr_d_operator | mkr_time_delay
    #[arg(long)]
    variant: Option<String>,
    /// Classical stochasticity parameter (classical runs only; sets k=kappa, tau=1)
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    /// Number of kicks
    #[arg(long)]
    kicks: Option<u64>,
    /// Momentum basis half-width (basis size is 2*mmax)
    #[arg(long)]
    mmax: Option<usize>,
    /// Record cadence in kicks (0 = auto)
    #[arg(long)]
    record_every: Option<u64>,
    /// RNG seed for classical ensembles
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output file prefix
    #[arg(long)]
    prefix: Option<String>,
}

impl Overrides {
    fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(k) = self.k {
            config.k = k;
        }
        if let Some(tau) = self.tau {
            config.tau = tau;
        }
        if let Some(m) = self.m_period {
            config.m_period = m;
        }
        if let Some(variant) = &self.variant {
            config.variant = variant.clone();
        }
        if let Some(kappa) = self.kappa {
            config.kappa = Some(kappa);
        }
        if let Some(kicks) = self.kicks {
            config.kicks = kicks;
        }
        if let Some(mmax) = self.mmax {
            config.mmax = mmax;
        }
        if let Some(record_every) = self.record_every {
            config.record_every = record_every;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.out = out.clone();
        }
        if let Some(prefix) = &self.prefix {
            config.prefix = prefix.clone();
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config file (a manifest from a
    /// previous run works too).
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Propagate |0> and write energy.csv + pm_final.csv.
    Evolve {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Diagonalize truncated M-kick propagators over a list of M values and
    /// write entropy.csv + bandwidth.csv.
    Spectrum {
        #[command(flatten)]
        overrides: Overrides,
        /// Ambient basis dimension for matrix construction
        #[arg(long, default_value_t = 4096)]
        ambient: usize,
        /// Truncation dimension handed to the eigensolver
        #[arg(long, default_value_t = 1024)]
        d: usize,
        /// Comma-separated list of M values
        #[arg(long = "M-list", value_delimiter = ',', default_value = "2,5,10,20,50,100,200")]
        m_list: Vec<u32>,
        /// Magnitude cutoff defining the band width
        #[arg(long, default_value_t = 1e-20)]
        cutoff: f64,
        /// Band aggregation: mean | max
        #[arg(long, default_value = "mean")]
        band_stat: String,
    },
    /// Classical map runs: phase-space sections, diffusion curves, island
    /// probes.
    Classical {
        #[command(flatten)]
        overrides: Overrides,
        /// What to compute: section | diffusion | island
        #[arg(long, default_value = "section")]
        action: String,
        /// Trajectories in the ensemble (or seeds for sections)
        #[arg(long, default_value_t = 400)]
        n_traj: usize,
        /// Initial momentum (diffusion) or island-center momentum
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        l0: f64,
        /// Island-center angle
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        theta0: f64,
    },
    /// Fit a momentum-distribution CSV: localization length and
    /// two-scale shape detection.
    Fit {
        /// pm CSV produced by an evolve run
        #[arg(long)]
        input: PathBuf,
        /// Noise floor for the fit
        #[arg(long, default_value_t = 1e-15)]
        floor: f64,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Cross-product parameter sweep of evolve runs with a fit summary.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (0 = all cores)
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Built-in presets reproducing the standard result set (fig1..fig7).
    #[command(name = "fig1")]
    Fig1(FigArgs),
    #[command(name = "fig2")]
    Fig2(FigArgs),
    #[command(name = "fig3")]
    Fig3(FigArgs),
    #[command(name = "fig4")]
    Fig4(FigArgs),
    #[command(name = "fig5")]
    Fig5(FigArgs),
    #[command(name = "fig6")]
    Fig6(FigArgs),
    #[command(name = "fig7")]
    Fig7(FigArgs),
}

#[derive(Args)]
struct FigArgs {
    /// Run scale: ci (desk-sized) or paper (full production scale)
    #[arg(long, default_value = "ci")]
    scale: String,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write a gnuplot script
    #[arg(long)]
    gnuplot: bool,
}

fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(kicked_rotor::Error::Eigensolver { .. }) =
            cause.downcast_ref::<kicked_rotor::Error>()
        {
            return 2;
        }
    }
    1
}

fn dispatch(command: Command) -> anyhow::Result<runs::RunReport> {
    match command {
        Command::Run { config, overrides } => {
            let mut experiment = ExperimentConfig::load(&config)?;
            overrides.apply(&mut experiment);
            runs::execute(&experiment)
        }
        Command::Evolve { overrides } => {
            let mut experiment = ExperimentConfig { mode: Mode::Evolve, ..Default::default() };
            overrides.apply(&mut experiment);
            runs::execute(&experiment)
        }
        Command::Spectrum { overrides, ambient, d, m_list, cutoff, band_stat } => {
            let mut experiment = ExperimentConfig {
                mode: Mode::Spectrum,
                ambient,
                d,
                m_list,
                cutoff,
                band_stat,
                variant: "mkr_sign_flip".into(),
                ..Default::default()
            };
            overrides.apply(&mut experiment);
            runs::execute(&experiment)
        }
        Command::Classical { overrides, action, n_traj, l0, theta0 } => {
            let action = match action.as_str() {
                "section" => ClassicalAction::Section,
                "diffusion" => ClassicalAction::Diffusion,
                "island" => ClassicalAction::Island,
                other => anyhow::bail!("unknown classical action '{other}'"),
            };
            let mut experiment = ExperimentConfig {
                mode: Mode::Classical,
                action,
                n_traj,
                l0,
                theta0,
                kicks: 300,
                ..Default::default()
            };
            overrides.apply(&mut experiment);
            runs::execute(&experiment)
        }
        Command::Fit { input, floor, overrides } => {
            let mut experiment = ExperimentConfig {
                mode: Mode::Fit,
                input: Some(input),
                floor,
                ..Default::default()
            };
            overrides.apply(&mut experiment);
            runs::execute(&experiment)
        }
        Command::Sweep { config, workers, overrides } => {
            let mut experiment = ExperimentConfig::load(&config)?;
            experiment.mode = Mode::Sweep;
            if let Some(workers) = workers {
                experiment.workers = workers;
            }
            overrides.apply(&mut experiment);
            runs::execute(&experiment)
        }
        Command::Fig1(args) => fig("fig1", args),
        Command::Fig2(args) => fig("fig2", args),
        Command::Fig3(args) => fig("fig3", args),
        Command::Fig4(args) => fig("fig4", args),
        Command::Fig5(args) => fig("fig5", args),
        Command::Fig6(args) => fig("fig6", args),
        Command::Fig7(args) => fig("fig7", args),
    }
}

fn fig(name: &str, args: FigArgs) -> anyhow::Result<runs::RunReport> {
    let scale: Scale = args.scale.parse()?;
    std::fs::create_dir_all(&args.out)?;
    recipes::run_recipe(name, scale, &args.out, args.gnuplot)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap help/version output is not an error
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(cli.command) {
        Ok(report) => {
            for warning in &report.warnings {
                eprintln!("warning: {warning}");
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}
