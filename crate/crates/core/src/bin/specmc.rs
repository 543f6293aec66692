//! Command-line front end: one subcommand per experiment, flags mirroring
//! the config fields, optional `--config` file overrides, CSV/JSON emission.

use clap::{Args, Parser, Subcommand};
use specmc::harness::{
    run, Emit, ExperimentConfig, ExperimentId, OUTPUT_DIR_ENV,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "specmc", version, about = "Spectral Monte Carlo laboratory")]
struct Cli {
    #[command(subcommand)]
    experiment: Command,
}

#[derive(Subcommand)]
enum Command {
    Constants(CommonArgs),
    WickMoments(CommonArgs),
    CharFunctionalSweep(CommonArgs),
    Normalizer(CommonArgs),
    Tail(CommonArgs),
    Hypercontractivity(CommonArgs),
    Chi2Tail(CommonArgs),
    DyadicAudit(CommonArgs),
    ExpMoment(CommonArgs),
    KdvConservation(CommonArgs),
    KdvInvariance(CommonArgs),
    WhiteNoiseCoupling(CommonArgs),
}

impl Command {
    fn id(&self) -> ExperimentId {
        match self {
            Self::Constants(_) => ExperimentId::Constants,
            Self::WickMoments(_) => ExperimentId::WickMoments,
            Self::CharFunctionalSweep(_) => ExperimentId::CharFunctionalSweep,
            Self::Normalizer(_) => ExperimentId::Normalizer,
            Self::Tail(_) => ExperimentId::Tail,
            Self::Hypercontractivity(_) => ExperimentId::Hypercontractivity,
            Self::Chi2Tail(_) => ExperimentId::Chi2Tail,
            Self::DyadicAudit(_) => ExperimentId::DyadicAudit,
            Self::ExpMoment(_) => ExperimentId::ExpMoment,
            Self::KdvConservation(_) => ExperimentId::KdvConservation,
            Self::KdvInvariance(_) => ExperimentId::KdvInvariance,
            Self::WhiteNoiseCoupling(_) => ExperimentId::WhiteNoiseCoupling,
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Self::Constants(a)
            | Self::WickMoments(a)
            | Self::CharFunctionalSweep(a)
            | Self::Normalizer(a)
            | Self::Tail(a)
            | Self::Hypercontractivity(a)
            | Self::Chi2Tail(a)
            | Self::DyadicAudit(a)
            | Self::ExpMoment(a)
            | Self::KdvConservation(a)
            | Self::KdvInvariance(a)
            | Self::WhiteNoiseCoupling(a) => a,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment seed (mandatory: runs must be reproducible).
    #[arg(long)]
    seed: u64,
    /// Single interpolation parameter; omits the default grid.
    #[arg(long)]
    beta: Option<f64>,
    /// Explicit beta grid (comma separated).
    #[arg(long, value_delimiter = ',')]
    beta_grid: Option<Vec<f64>>,
    /// Band-limit N.
    #[arg(long)]
    n_modes: Option<usize>,
    /// Cutoff constant K.
    #[arg(long)]
    cutoff_k: Option<f64>,
    /// Nonlinearity power p (3 or 4).
    #[arg(long)]
    power_p: Option<u32>,
    /// Use the defocusing sign (weight exponent negated).
    #[arg(long)]
    defocusing: bool,
    /// Ensemble size.
    #[arg(long)]
    n_samples: Option<usize>,
    /// Exponential-moment rate r.
    #[arg(long)]
    rate_r: Option<f64>,
    /// Tail thresholds (comma separated).
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    /// Flow time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Flow end time.
    #[arg(long)]
    t_final: Option<f64>,
    /// Invariance experiment: keep unit weights (base measure baseline).
    #[arg(long)]
    negative_control: bool,
    /// Key-value file overriding any flag (`key = value` per line).
    #[arg(long)]
    config: Option<PathBuf>,
    /// What to write: json, csv, or both.
    #[arg(long, default_value = "both")]
    emit: String,
    /// Output directory; falls back to $SPECMC_OUTPUT_DIR, then `.`.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl CommonArgs {
    fn into_config(&self, id: ExperimentId) -> Result<ExperimentConfig, specmc::error::LabError> {
        let mut cfg = ExperimentConfig::new(id, self.seed);
        if let Some(grid) = &self.beta_grid {
            cfg.beta_grid = grid.clone();
        }
        cfg.beta = self.beta;
        cfg.n_modes = self.n_modes;
        if let Some(k) = self.cutoff_k {
            cfg.cutoff_k = k;
        }
        if let Some(p) = self.power_p {
            cfg.power_p = p;
        }
        cfg.defocusing = self.defocusing;
        cfg.n_samples = self.n_samples;
        if let Some(r) = self.rate_r {
            cfg.rate_r = r;
        }
        if let Some(l) = &self.lambdas {
            cfg.lambdas = l.clone();
        }
        cfg.dt = self.dt;
        cfg.t_final = self.t_final;
        cfg.negative_control = self.negative_control;
        cfg.output_dir = self.output_dir.clone();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(specmc::error::LabError::Io)?;
            cfg = cfg.apply_overrides(&text)?;
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = cli.experiment.args();
    let emit: Emit = match args.emit.parse() {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let config = match args.into_config(cli.experiment.id()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out_dir = config
        .output_dir
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    let outcome = match run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match outcome.write(&out_dir, emit) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    for c in &outcome.checks {
        println!(
            "[{}] {}: {}",
            if c.passed { "pass" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
