//! Command-line front-end for `hdmanova`.
//!
//! Three subcommands share one set of test options: `test` runs the MANOVA
//! test on a grouped CSV file, `fanova` projects sampled curves onto a
//! Fourier basis first, and `simulate` runs the Monte-Carlo harness on a
//! catalog scenario. Results are JSON documents carrying `schema_version`.
//! Exit codes are 0 on success, 2 for malformed input and 3 for data on
//! which the test is undefined.

pub mod error;
pub mod input;
pub mod json;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hdmanova::datagen::{scenario_build, scenario_catalog};
use hdmanova::fanova::{fanova_test, uniform_grid, BasisFamily, BasisSpec, CurveSet, DEFAULT_BASIS_SIZE};
use hdmanova::harness::{reproduce_table, run_replicates, Budget};
use hdmanova::inference::{DEFAULT_SIZE_RESAMPLES, DEFAULT_TAU_GRID};
use hdmanova::{run_test, Dataset, Side, TauPolicy, TestConfig};

pub use error::CliError;
use input::{parse_grid, parse_list, parse_pairs, read_grouped_csv_path};
use report::{BasisOut, SimulateReport, TableReport, TestContext, TestReport, SCHEMA_VERSION};

#[derive(Debug, Parser)]
#[command(name = "hdmanova", version, about = "High-dimensional MANOVA via bootstrapped max statistics")]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "HDM_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test equality of group mean vectors from a CSV file.
    Test(TestArgs),
    /// Test equality of group mean functions from sampled curves.
    Fanova(FanovaArgs),
    /// Run replicates of a catalog scenario and report rejection rates.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    TwoSided,
    Upper,
    Lower,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::TwoSided => Side::TwoSided,
            SideArg::Upper => Side::Upper,
            SideArg::Lower => Side::Lower,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Raw,
    Orthonormal,
}

#[derive(Debug, Clone, Args)]
pub struct TestOptions {
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    pub rho: f64,
    /// Standardization exponent in [0, 1), or `auto` for data-driven selection.
    #[arg(long, default_value = "auto")]
    pub tau: String,
    /// Candidate exponents for `--tau auto`, comma separated.
    #[arg(long)]
    pub tau_grid: Option<String>,
    /// Null resamples per candidate for `--tau auto`.
    #[arg(long, default_value_t = DEFAULT_SIZE_RESAMPLES)]
    pub size_resamples: usize,
    /// Bootstrap replicates.
    #[arg(long = "B", default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `all` or 1-based pairs such as `1-2,3-4`.
    #[arg(long, default_value = "all")]
    pub pairs: String,
    #[arg(long, value_enum, default_value_t = SideArg::TwoSided)]
    pub side: SideArg,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    /// CSV with a `group` column followed by one column per coordinate.
    pub input: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub opts: TestOptions,
}

#[derive(Debug, Clone, Args)]
pub struct FanovaArgs {
    /// CSV with a `group` column followed by curve values `t_1..t_m`.
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// File with the m grid points; equally spaced on [0, 1] when absent.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = BasisArg::Raw)]
    pub basis: BasisArg,
    /// Number of basis functions.
    #[arg(long, default_value_t = DEFAULT_BASIS_SIZE)]
    pub p: usize,
    #[command(flatten)]
    pub opts: TestOptions,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Catalog scenario name.
    #[arg(long, required_unless_present_any = ["table", "list"])]
    pub scenario: Option<String>,
    /// Reproduce a whole size table (`size-fda` or `size-pois`).
    #[arg(long, conflicts_with_all = ["scenario", "theta_grid"])]
    pub table: Option<String>,
    /// Print the scenario catalog and exit.
    #[arg(long)]
    pub list: bool,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Effect sizes in [0, 1], comma separated.
    #[arg(long, default_value = "0")]
    pub theta_grid: String,
    #[arg(long, default_value = "0.8")]
    pub tau: String,
    #[arg(long)]
    pub tau_grid: Option<String>,
    #[arg(long, default_value_t = DEFAULT_SIZE_RESAMPLES)]
    pub size_resamples: usize,
    #[arg(long = "B", default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.05)]
    pub rho: f64,
    /// JSON-lines replicate log.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Summary JSON; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn tau_policy(tau: &str, grid: Option<&str>, size_resamples: usize) -> Result<TauPolicy, CliError> {
    if tau.trim().eq_ignore_ascii_case("auto") {
        let grid = match grid {
            Some(g) => parse_list(g)?,
            None => DEFAULT_TAU_GRID.to_vec(),
        };
        Ok(TauPolicy::Auto { grid, size_resamples })
    } else {
        let tau = tau
            .trim()
            .parse::<f64>()
            .map_err(|_| CliError::Input(format!("--tau expects a number or `auto`, got `{tau}`")))?;
        Ok(TauPolicy::Fixed { tau })
    }
}

fn test_config(opts: &TestOptions, num_groups: usize) -> Result<TestConfig, CliError> {
    let config = TestConfig {
        rho: opts.rho,
        tau_policy: tau_policy(&opts.tau, opts.tau_grid.as_deref(), opts.size_resamples)?,
        replicates: opts.replicates,
        side: opts.side.into(),
        seed: opts.seed,
        pairs: Some(parse_pairs(&opts.pairs, num_groups)?),
        ..TestConfig::default()
    };
    config.validate()?;
    Ok(config)
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Runs `test` and returns the JSON document.
pub fn cmd_test(args: &TestArgs) -> Result<String, CliError> {
    let table = read_grouped_csv_path(&args.input)?;
    let data = Dataset::new(table.groups.clone())?;
    let config = test_config(&args.opts, data.num_groups())?;
    let res = run_test(&data, &config)?;
    let ctx = TestContext {
        command: "test",
        labels: &table.labels,
        sizes: &table.sizes(),
        dim: data.dim(),
        basis: None,
        tau_policy: config.tau_policy.clone(),
        replicates: config.replicates,
        seed: config.seed,
    };
    Ok(json::to_pretty(&TestReport::new(ctx, &res)))
}

/// Runs `fanova` and returns the JSON document.
pub fn cmd_fanova(args: &FanovaArgs) -> Result<String, CliError> {
    let table = read_grouped_csv_path(&args.input)?;
    let m = table.columns.len();
    let grid = match &args.grid {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            parse_grid(&text)?
        }
        None => uniform_grid(m),
    };
    if grid.len() != m {
        return Err(CliError::Input(format!(
            "grid has {} points but the CSV has {m} curve columns",
            grid.len()
        )));
    }
    let family = match args.basis {
        BasisArg::Raw => BasisFamily::FourierRaw,
        BasisArg::Orthonormal => BasisFamily::FourierOrthonormal,
    };
    let spec = BasisSpec::new(family, args.p)?;
    let curves = CurveSet::new(grid, table.groups.clone())?;
    let config = test_config(&args.opts, table.groups.len())?;
    let res = fanova_test(&curves, &spec, &config)?;
    let ctx = TestContext {
        command: "fanova",
        labels: &table.labels,
        sizes: &table.sizes(),
        dim: args.p,
        basis: Some(BasisOut::new(family, args.p, m)),
        tau_policy: config.tau_policy.clone(),
        replicates: config.replicates,
        seed: config.seed,
    };
    Ok(json::to_pretty(&TestReport::new(ctx, &res.test)))
}

/// Output of `simulate`: the summary document, the replicate log and the
/// human-readable summary rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOutput {
    pub summary: String,
    pub log: String,
    pub rows: Vec<String>,
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<SimulateOutput, CliError> {
    if args.list {
        return Ok(SimulateOutput {
            summary: String::new(),
            log: String::new(),
            rows: scenario_catalog(),
        });
    }
    if args.reps == 0 {
        return Err(CliError::Input("--reps must be at least 1".into()));
    }
    let policy = tau_policy(&args.tau, args.tau_grid.as_deref(), args.size_resamples)?;
    if let Some(table) = &args.table {
        let budget = Budget {
            reps: args.reps,
            replicates: args.replicates,
            tau_policy: policy.clone(),
            rho: args.rho,
            seed: args.seed,
        };
        let rows = reproduce_table(table, &budget)?;
        let text_rows = rows
            .iter()
            .map(|r| {
                format!(
                    "{:<28} size={:.3} se={:.3} tau_mean={:.3} reference={:.3}",
                    r.scenario, r.size, r.mc_se, r.tau_mean, r.reference
                )
            })
            .collect();
        let report = TableReport {
            schema_version: SCHEMA_VERSION,
            command: "simulate",
            table: table.clone(),
            reps: args.reps,
            seed: args.seed,
            rho: args.rho,
            tau_policy: policy,
            replicates: args.replicates,
            rows,
        };
        return Ok(SimulateOutput {
            summary: json::to_pretty(&report),
            log: String::new(),
            rows: text_rows,
        });
    }

    let name = args.scenario.as_deref().unwrap_or_default();
    let mut scenario = scenario_build(name)?;
    scenario.reps = args.reps;
    scenario.seed = args.seed;
    scenario.test = TestConfig {
        rho: args.rho,
        tau_policy: policy.clone(),
        replicates: args.replicates,
        ..TestConfig::default()
    };
    scenario.test.validate()?;
    let thetas = parse_list(&args.theta_grid)?;
    let results = thetas
        .iter()
        .map(|&t| run_replicates(&scenario, t))
        .collect::<Result<Vec<_>, _>>()?;

    let mut log = String::new();
    for rec in results.iter().flat_map(|r| &r.records) {
        log.push_str(&json::to_line(rec));
        log.push('\n');
    }
    let rows = results
        .iter()
        .map(|r| {
            format!(
                "{} theta={} reps={} rate={:.3} se={:.3} tau_mean={:.3}",
                r.scenario, r.theta, r.reps, r.rejection_rate, r.mc_se, r.tau_mean
            )
        })
        .collect();
    let report = SimulateReport {
        schema_version: SCHEMA_VERSION,
        command: "simulate",
        scenario: scenario.name.clone(),
        sizes: scenario.sizes.clone(),
        reps: args.reps,
        seed: args.seed,
        rho: args.rho,
        tau_policy: policy,
        replicates: args.replicates,
        results,
    };
    Ok(SimulateOutput {
        summary: json::to_pretty(&report),
        log,
        rows,
    })
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    if threads == Some(0) {
        return Err(CliError::Input("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Input(format!("cannot start worker pool: {e}")))
}

/// Executes a parsed command line, writing outputs to their destinations.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let pool = thread_pool(cli.threads)?;
    pool.install(|| match &cli.command {
        Command::Test(a) => emit(a.output.as_deref(), &cmd_test(a)?),
        Command::Fanova(a) => emit(a.output.as_deref(), &cmd_fanova(a)?),
        Command::Simulate(a) => {
            let out = cmd_simulate(a)?;
            if a.list {
                return emit(None, &(out.rows.join("\n") + "\n"));
            }
            if let Some(path) = &a.log {
                emit(Some(path), &out.log)?;
            }
            match &a.output {
                Some(path) => {
                    emit(Some(path), &out.summary)?;
                    emit(None, &(out.rows.join("\n") + "\n"))
                }
                None => {
                    for r in &out.rows {
                        eprintln!("{r}");
                    }
                    emit(None, &out.summary)
                }
            }
        }
    })
}

/// Parses `args` and runs them, returning the process exit code. Errors are
/// reported on standard error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("hdmanova: {e}");
            e.exit_code()
        }
    }
}
