//! Command-line front end: `txgm {stats,rank,spectrum,gini,generate}`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use txgm::cli::{cmd_generate, cmd_gini, cmd_rank, cmd_spectrum, cmd_stats, RunConfig};
use txgm::gmatrix::ExecMode;
use txgm::ingest::BaseUnitPolicy;
use txgm::period::PeriodLabel;

#[derive(Parser)]
#[command(
    name = "txgm",
    version,
    about = "Google-matrix spectral and wealth analytics for transaction networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Edge-list input: `src dst unix_time amount_in_base_units` per line.
    /// Without it, a synthetic network is generated from --seed.
    #[arg(long, env = "TXGM_INPUT")]
    input: Option<PathBuf>,

    /// Base-unit policy: fixed:1e-8, fixed:1e-3 or era:<unix-seconds|date>.
    #[arg(long, env = "TXGM_BASE_UNIT", default_value = "era:1267401600")]
    base_unit: String,

    /// Period label such as 2011Q4, 2009H1, FULL, or `all` for every
    /// period covering the input.
    #[arg(long, env = "TXGM_PERIOD", default_value = "FULL")]
    period: String,

    /// Drop self-loop records before aggregation.
    #[arg(long, env = "TXGM_DROP_SELF_LOOPS", default_value_t = false)]
    drop_self_loops: bool,

    /// Damping factor.
    #[arg(long, env = "TXGM_ALPHA", default_value_t = 0.85)]
    alpha: f64,

    /// Working precision in bits; 52 is machine double.
    #[arg(long, env = "TXGM_PRECISION_BITS", default_value_t = 52)]
    precision_bits: u32,

    /// Arnoldi dimension.
    #[arg(long, env = "TXGM_ARNOLDI_DIM", default_value_t = 200)]
    arnoldi_dim: usize,

    /// Power-iteration convergence tolerance (l1).
    #[arg(long, env = "TXGM_TOL", default_value_t = 1e-12)]
    tol: f64,

    /// Execution mode: `deterministic` or `parallel[:shards]`.
    #[arg(long, env = "TXGM_EXEC", default_value = "deterministic")]
    exec: String,

    /// Seed for generation and random start vectors.
    #[arg(long, env = "TXGM_SEED", default_value_t = 1)]
    seed: u64,

    /// Output directory.
    #[arg(long, env = "TXGM_OUT", default_value = "out")]
    out: PathBuf,

    /// Synthetic network size when no input file is given.
    #[arg(long, env = "TXGM_GEN_NODES", default_value_t = 1000)]
    gen_nodes: usize,

    /// Synthetic links-per-node target.
    #[arg(long, env = "TXGM_GEN_LINK_RATIO", default_value_t = 2.5)]
    gen_link_ratio: f64,

    /// Synthetic degree-distribution exponent target.
    #[arg(long, env = "TXGM_GEN_DEGREE_EXPONENT", default_value_t = 2.0)]
    gen_degree_exponent: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Snapshot summaries, degree/volume/balance histograms, power-law fits.
    Stats {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// PageRank and CheiRank, rank-decay fits, density grid, correlator.
    Rank {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Invariant subspaces, subspace and core spectra, decay widths.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,

        /// Maximum invariant-subspace size as a fraction of N.
        #[arg(long, env = "TXGM_MAX_FRACTION", default_value_t = 0.1)]
        max_fraction: f64,

        /// Dense-diagonalization size cap for subspace blocks.
        #[arg(long, env = "TXGM_DENSE_CAP", default_value_t = 2000)]
        dense_cap: usize,

        /// Emit the eigenvector profile for this eigenvalue, given as
        /// `re,im`; repeatable.
        #[arg(long = "eigenvector", value_parser = parse_complex)]
        eigenvectors: Vec<(f64, f64)>,
    },
    /// Lorenz curves and Gini coefficients for volumes and ranks.
    Gini {
        #[command(flatten)]
        common: CommonArgs,

        /// Strict volume threshold in BTC; repeatable.
        #[arg(long = "threshold", default_values_t = [0.0, 1.0])]
        thresholds: Vec<f64>,
    },
    /// Write a synthetic edge list in the ingest format.
    Generate {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn parse_complex(s: &str) -> Result<(f64, f64), String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected re,im got `{s}`"))?;
    Ok((
        re.trim().parse().map_err(|e| format!("bad re: {e}"))?,
        im.trim().parse().map_err(|e| format!("bad im: {e}"))?,
    ))
}

fn parse_exec(s: &str) -> Result<ExecMode, String> {
    if s.eq_ignore_ascii_case("deterministic") {
        return Ok(ExecMode::Deterministic);
    }
    if let Some(rest) = s.strip_prefix("parallel") {
        let shards = match rest.strip_prefix(':') {
            Some(v) => v.parse().map_err(|e| format!("bad shard count: {e}"))?,
            None => rayon::current_num_threads(),
        };
        return Ok(ExecMode::Parallel { shards });
    }
    Err(format!("unknown exec mode `{s}`"))
}

fn build_config(common: &CommonArgs) -> Result<RunConfig, String> {
    let (period, all_periods) = if common.period.eq_ignore_ascii_case("all") {
        (None, true)
    } else {
        let label: PeriodLabel = common
            .period
            .parse()
            .map_err(|e| format!("bad --period: {e}"))?;
        (Some(label), false)
    };
    Ok(RunConfig {
        input: common.input.clone(),
        gen_nodes: common.gen_nodes,
        gen_link_ratio: common.gen_link_ratio,
        gen_degree_exponent: common.gen_degree_exponent,
        base_unit: BaseUnitPolicy::parse(&common.base_unit).map_err(|e| e.to_string())?,
        period,
        all_periods,
        drop_self_loops: common.drop_self_loops,
        alpha: common.alpha,
        precision_bits: common.precision_bits,
        arnoldi_dim: common.arnoldi_dim,
        tol: common.tol,
        exec: parse_exec(&common.exec)?,
        seed: common.seed,
        out_dir: common.out.clone(),
        ..Default::default()
    })
}

fn run() -> anyhow::Result<Vec<String>> {
    let cli = Cli::parse();
    let outputs = match &cli.command {
        Command::Stats { common } => {
            let config = build_config(common).map_err(anyhow::Error::msg)?;
            cmd_stats(&config)?
        }
        Command::Rank { common } => {
            let config = build_config(common).map_err(anyhow::Error::msg)?;
            cmd_rank(&config)?
        }
        Command::Spectrum {
            common,
            max_fraction,
            dense_cap,
            eigenvectors,
        } => {
            let mut config = build_config(common).map_err(anyhow::Error::msg)?;
            config.max_fraction = *max_fraction;
            config.dense_cap = *dense_cap;
            config.eigenvectors = eigenvectors.clone();
            cmd_spectrum(&config)?
        }
        Command::Gini { common, thresholds } => {
            let mut config = build_config(common).map_err(anyhow::Error::msg)?;
            config.gini_thresholds = thresholds.clone();
            cmd_gini(&config)?
        }
        Command::Generate { common } => {
            let config = build_config(common).map_err(anyhow::Error::msg)?;
            cmd_generate(&config)?
        }
    };
    Ok(outputs)
}

fn main() -> ExitCode {
    match run() {
        Ok(outputs) => {
            for name in outputs {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
