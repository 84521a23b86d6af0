//! Command-line definition and dispatch.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{self, Config, Overrides, CONFIG_KEYS};
use crate::error::{CliError, CliResult};
use crate::report::Table;

#[derive(Debug, Parser)]
#[command(name = "adjwald", version, about = "Location-adjusted Wald inference for regression models", after_long_help = CONFIG_KEYS)]
pub struct Cli {
    /// Configuration file (TOML sections; see --help)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output format: csv or json
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Worker threads (capped by ADJWALD_THREADS)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the report to a file instead of stdout
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Add per-cell wall-clock columns (not reproducible)
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the model by maximum likelihood and by bias reduction
    Fit(ModelArgs),
    /// Wald-type statistics per parameter
    Wald {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        inference: InferenceArgs,
        #[command(flatten)]
        bootstrap: BootstrapArgs,
    },
    /// Confidence intervals by inverting the statistics
    Ci {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        inference: InferenceArgs,
        #[command(flatten)]
        bootstrap: BootstrapArgs,
        /// Interval levels
        #[arg(long, value_delimiter = ',')]
        level: Vec<f64>,
        /// normal, studentized or both
        #[arg(long)]
        method: Option<String>,
        /// Inversion grid points
        #[arg(long)]
        grid_points: Option<usize>,
        /// Inversion grid half-width in standard errors
        #[arg(long)]
        grid_half_width: Option<f64>,
    },
    /// Monte Carlo coverage, rejection and p-value studies
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        inference: InferenceArgs,
        #[command(flatten)]
        bootstrap: BootstrapArgs,
        #[command(flatten)]
        sim: SimulateArgs,
    },
    /// Interval for a binomial proportion
    Proportion(ProportionArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// CSV data file
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Model family (a GLM family or beta)
    #[arg(long)]
    pub family: Option<String>,
    /// Response column
    #[arg(long)]
    pub response: Option<String>,
    /// Mean-model terms
    #[arg(long, value_delimiter = ',')]
    pub mean: Vec<String>,
    /// Precision-model terms (beta regression)
    #[arg(long, value_delimiter = ',')]
    pub precision: Vec<String>,
    /// Drop the intercept from the mean model
    #[arg(long)]
    pub no_intercept: bool,
    /// Prior weights column (binomial trials)
    #[arg(long)]
    pub weights: Option<String>,
    /// Dispersion plug-in for ML fits: pearson or ml
    #[arg(long)]
    pub dispersion: Option<String>,
    /// Derivative path: analytic or numeric
    #[arg(long)]
    pub derivatives: Option<String>,
}

#[derive(Debug, Args)]
pub struct InferenceArgs {
    /// Parameter names or indices
    #[arg(long, value_delimiter = ',')]
    pub parameters: Vec<String>,
    /// Null values (one, or one per parameter)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub psi0: Vec<f64>,
    /// Statistics: t, t*, t~, t~*, r, t**, t~** with optional @ml/@pearson
    #[arg(long = "stat", value_delimiter = ',')]
    pub statistics: Vec<String>,
    /// two-sided, less or greater
    #[arg(long)]
    pub alternative: Option<String>,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    /// Bootstrap replicates
    #[arg(long)]
    pub bootstrap_replicates: Option<usize>,
    /// Bootstrap seed
    #[arg(long)]
    pub bootstrap_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// fit, bernoulli, exponential or synthetic-batch
    #[arg(long)]
    pub generator: Option<String>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// coverage, rejection, pvalue, mean
    #[arg(long, value_delimiter = ',')]
    pub targets: Vec<String>,
    /// Coverage levels
    #[arg(long = "level", value_delimiter = ',')]
    pub levels: Vec<f64>,
    /// Rejection levels
    #[arg(long = "alpha", value_delimiter = ',')]
    pub alphas: Vec<f64>,
    /// Sample size (bernoulli, exponential, synthetic-batch)
    #[arg(long)]
    pub n: Option<u64>,
    /// True parameter (bernoulli log-odds, exponential log-rate)
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Enumerate instead of simulating (bernoulli)
    #[arg(long)]
    pub exact: bool,
    /// Number of voxels (synthetic-batch)
    #[arg(long)]
    pub voxels: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ProportionArgs {
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub k: Option<u64>,
    #[arg(long)]
    pub level: Option<f64>,
    /// t~*, agresti-coull or both
    #[arg(long)]
    pub method: Option<String>,
    /// Exact coverage on this many probabilities in [0.01, 0.99]
    #[arg(long)]
    pub coverage_points: Option<usize>,
}

fn strings(v: &[String]) -> Vec<String> {
    v.to_vec()
}

fn int(v: u64) -> toml::Value {
    toml::Value::Integer(v as i64)
}

impl ModelArgs {
    fn apply(&self, o: &mut Overrides) {
        o.set_opt(
            "data",
            "path",
            self.data.as_ref().map(|p| p.to_string_lossy().into_owned()),
        );
        o.set_opt("model", "family", self.family.clone());
        o.set_opt("data", "response", self.response.clone());
        o.set_list("data", "mean", &strings(&self.mean));
        o.set_list("data", "precision", &strings(&self.precision));
        if self.no_intercept {
            o.set("data", "intercept", false);
        }
        o.set_opt("data", "weights", self.weights.clone());
        o.set_opt("model", "dispersion", self.dispersion.clone());
        o.set_opt("model", "derivatives", self.derivatives.clone());
    }
}

impl InferenceArgs {
    fn apply(&self, o: &mut Overrides) {
        o.set_list("inference", "parameters", &strings(&self.parameters));
        o.set_list("inference", "psi0", &self.psi0);
        o.set_list("inference", "statistics", &strings(&self.statistics));
        o.set_opt("inference", "alternative", self.alternative.clone());
    }
}

impl BootstrapArgs {
    fn apply(&self, o: &mut Overrides) {
        o.set_opt(
            "bootstrap",
            "replicates",
            self.bootstrap_replicates.map(|v| int(v as u64)),
        );
        o.set_opt("bootstrap", "seed", self.bootstrap_seed.map(int));
    }
}

impl Cli {
    fn overrides(&self) -> Overrides {
        let mut o = Overrides::default();
        o.set_opt("output", "format", self.format.clone());
        o.set_opt("output", "threads", self.threads.map(|v| int(v as u64)));
        o.set_opt(
            "output",
            "path",
            self.output.as_ref().map(|p| p.to_string_lossy().into_owned()),
        );
        if self.timing {
            o.set("output", "timing", true);
        }
        match &self.command {
            Command::Fit(m) => m.apply(&mut o),
            Command::Wald {
                model,
                inference,
                bootstrap,
            } => {
                model.apply(&mut o);
                inference.apply(&mut o);
                bootstrap.apply(&mut o);
            }
            Command::Ci {
                model,
                inference,
                bootstrap,
                level,
                method,
                grid_points,
                grid_half_width,
            } => {
                model.apply(&mut o);
                inference.apply(&mut o);
                bootstrap.apply(&mut o);
                o.set_list("inference", "levels", level);
                o.set_opt("inference", "method", method.clone());
                o.set_opt("inference", "grid_points", grid_points.map(|v| int(v as u64)));
                o.set_opt("inference", "grid_half_width", *grid_half_width);
            }
            Command::Simulate {
                model,
                inference,
                bootstrap,
                sim,
            } => {
                model.apply(&mut o);
                inference.apply(&mut o);
                bootstrap.apply(&mut o);
                o.set_opt("simulate", "generator", sim.generator.clone());
                o.set_opt("simulate", "replicates", sim.replicates.map(|v| int(v as u64)));
                o.set_opt("simulate", "seed", sim.seed.map(int));
                o.set_list("simulate", "targets", &strings(&sim.targets));
                o.set_list("simulate", "levels", &sim.levels);
                o.set_list("simulate", "alphas", &sim.alphas);
                o.set_opt("simulate", "n", sim.n.map(int));
                o.set_opt("simulate", "theta", sim.theta);
                if sim.exact {
                    o.set("simulate", "exact", true);
                }
                o.set_opt("simulate", "voxels", sim.voxels.map(|v| int(v as u64)));
            }
            Command::Proportion(p) => {
                o.set_opt("proportion", "n", p.n.map(int));
                o.set_opt("proportion", "k", p.k.map(int));
                o.set_opt("proportion", "level", p.level);
                o.set_opt("proportion", "method", p.method.clone());
                o.set_opt(
                    "proportion",
                    "coverage_points",
                    p.coverage_points.map(|v| int(v as u64)),
                );
            }
        }
        o
    }

    pub fn config(&self) -> CliResult<Config> {
        config::load(self.config.as_deref(), &self.overrides())
    }
}

/// Worker count: the requested (or available) parallelism, capped by
/// `ADJWALD_THREADS`.
pub fn thread_count(requested: Option<usize>) -> CliResult<usize> {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut threads = requested.unwrap_or(available);
    if let Ok(cap) = std::env::var("ADJWALD_THREADS") {
        let cap: usize = cap
            .trim()
            .parse()
            .ok()
            .filter(|&c| c > 0)
            .ok_or_else(|| CliError::Config(format!("ADJWALD_THREADS={cap:?} is not a positive integer")))?;
        threads = threads.min(cap);
    }
    Ok(threads)
}

/// Runs the parsed command and returns its report.
pub fn execute(cli: &Cli, config: &Config) -> CliResult<Table> {
    let threads = thread_count(config.output.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Fit(_) => crate::commands::fit(config),
        Command::Wald { .. } => crate::commands::wald(config),
        Command::Ci { .. } => crate::commands::ci(config),
        Command::Simulate { .. } => crate::simulate::simulate(config),
        Command::Proportion(_) => crate::proportion::proportion(config),
    })
}

/// Parses, runs and writes the report; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = cli.config().and_then(|config| {
        let table = execute(&cli, &config)?;
        match &config.output.path {
            Some(path) => {
                let file =
                    std::fs::File::create(path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
                table.write(&config.output.format, std::io::BufWriter::new(file))
            }
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                table.write(&config.output.format, &mut lock)?;
                lock.flush()?;
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("adjwald: {e}");
            e.exit_code()
        }
    }
}
