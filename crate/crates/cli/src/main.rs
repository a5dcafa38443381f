//! `christoffel` command-line tool.

mod commands;
mod parse;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use christoffel::measures::MonomialOrdering;
use christoffel::orthopoly::GramSchmidtConfig;
use christoffel::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "christoffel", version, about = "Orthonormal polynomials, Christoffel-Darboux kernels and leverage scores of point clouds")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every command.
#[derive(Args, Clone, Debug)]
pub struct RunConfig {
    /// Monomial ordering: `graded-lex` or `tensor:<max degree>`.
    #[arg(long, global = true, default_value = "graded-lex")]
    pub ordering: String,
    /// Fit `p_0, ..., p_n` (for `oracle`, the kernel degree).
    #[arg(long, global = true, default_value_t = 10)]
    pub n: usize,
    /// Relative residual below which a monomial is treated as dependent.
    #[arg(long = "rank-tol", global = true, default_value_t = 1e-8)]
    pub rank_tol: f64,
    /// Seed for the sampling commands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return Err(Error::InvalidInput(format!("--rank-tol {} must lie in (0, 1)", self.rank_tol)));
        }
        Ok(())
    }

    pub fn ordering(&self, dim: usize) -> Result<MonomialOrdering> {
        MonomialOrdering::parse(&self.ordering, dim)
    }

    pub fn gram_schmidt(&self) -> GramSchmidtConfig {
        GramSchmidtConfig::default().with_rank_tol(self.rank_tol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    GramSchmidt,
    /// Univariate clouds with the graded ordering only.
    Arnoldi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SampleKind {
    /// `--count` uniform disk points plus `--outliers` points with modulus in [1.2, 1.8].
    DiskOutliers,
    /// `--side` x `--side` grid on the square plus `--outliers` exterior points.
    SquareOutliers,
    /// `(u^3, u^2)` on a polar grid with `--radial` circles of `--angular` points.
    Cusp,
    /// `--count` roots of unity.
    Roots,
    /// `--count` random atoms in `C^dim` with random weights.
    Random,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Orthonormalize the monomials against a cloud and report the basis.
    Fit {
        /// Cloud file (`.csv` or `.json`).
        cloud: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::GramSchmidt)]
        method: Method,
    },
    /// Leverage score table of a cloud.
    Leverage {
        cloud: PathBuf,
        /// `auto` or a fixed flagging threshold.
        #[arg(long, default_value = "auto")]
        threshold: String,
        /// Also write a scatter plot colored by score.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Kernel diagonal on a grid and its sub-level set.
    Levelset {
        cloud: PathBuf,
        /// `x0,x1,y0,y1,nx,ny`.
        #[arg(long, default_value = "-2,2,-2,2,81,81", allow_hyphen_values = true)]
        grid: String,
        /// `auto` (largest kernel value over unflagged atoms) or a number.
        #[arg(long, default_value = "auto")]
        threshold: String,
        /// Fixed coordinates for clouds in `C^d`, `d > 1`.
        #[arg(long, allow_hyphen_values = true)]
        base: Option<String>,
        /// Coordinate that runs over the grid.
        #[arg(long, default_value_t = 0)]
        free: usize,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Exact kernel ratio after adding point masses, with alternating bounds.
    Perturb {
        cloud: PathBuf,
        /// Point mass `re,im[,...]@weight`; repeatable.
        #[arg(long = "mass", required = true, allow_hyphen_values = true)]
        masses: Vec<String>,
        /// Evaluation point `re,im[,...]`; repeatable.
        #[arg(long = "at", required = true, allow_hyphen_values = true)]
        at: Vec<String>,
        #[arg(long, default_value_t = 3)]
        chain_depth: usize,
        /// Ratio function for the asymptotic predictor: `disk` or `ellipse:<a>,<b>`.
        #[arg(long)]
        ratio: Option<String>,
    },
    /// Distance of two measures through their modified moment matrix.
    Closeness {
        mu: PathBuf,
        nu: PathBuf,
        /// Points at which to report the kernel bounds; repeatable.
        #[arg(long = "at", allow_hyphen_values = true)]
        at: Vec<String>,
    },
    /// Evaluate a Green function with pole at infinity.
    Green {
        /// interval, complex-ball, polydisk, real-ball, cube, simplex,
        /// tensor-square, graded-square, disk or ellipse:<a>,<b>.
        kind: String,
        #[arg(long = "at", required = true, allow_hyphen_values = true)]
        at: Vec<String>,
    },
    /// Evaluate a closed-form kernel of degree `--n`.
    Oracle {
        /// bergman-disk, chebyshev-tensor, complex-ball or polydisk.
        kind: String,
        #[arg(long = "at", allow_hyphen_values = true)]
        at: String,
        /// Second argument; defaults to the first.
        #[arg(long = "with", allow_hyphen_values = true)]
        with: Option<String>,
    },
    /// Run the cross-checks between the pipeline and the closed forms.
    Verify,
    /// Write a seeded sample cloud.
    Sample {
        #[arg(value_enum)]
        kind: SampleKind,
        #[arg(long, default_value_t = 593)]
        count: usize,
        #[arg(long, default_value_t = 7)]
        outliers: usize,
        #[arg(long, default_value_t = 24)]
        side: usize,
        #[arg(long, default_value_t = 12)]
        radial: usize,
        #[arg(long, default_value_t = 24)]
        angular: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
    },
}

/// Exit status of a command that ran to completion.
pub enum Outcome {
    Success,
    /// A check-style command found failures.
    ChecksFailed,
}

fn run(cli: Cli) -> Result<Outcome> {
    let cfg = cli.config;
    cfg.validate()?;
    match cli.command {
        Command::Fit { cloud, method } => commands::fit(&cfg, &cloud, method),
        Command::Leverage { cloud, threshold, svg } => commands::leverage(&cfg, &cloud, &threshold, svg.as_deref()),
        Command::Levelset { cloud, grid, threshold, base, free, svg } => {
            commands::levelset(&cfg, &cloud, &grid, &threshold, base.as_deref(), free, svg.as_deref())
        }
        Command::Perturb { cloud, masses, at, chain_depth, ratio } => {
            commands::perturb(&cfg, &cloud, &masses, &at, chain_depth, ratio.as_deref())
        }
        Command::Closeness { mu, nu, at } => commands::closeness(&cfg, &mu, &nu, &at),
        Command::Green { kind, at } => commands::green(&cfg, &kind, &at),
        Command::Oracle { kind, at, with } => commands::oracle(&cfg, &kind, &at, with.as_deref()),
        Command::Verify => commands::verify(&cfg),
        Command::Sample { kind, count, outliers, side, radial, angular, dim } => {
            commands::sample(&cfg, kind, commands::SampleSize { count, outliers, side, radial, angular, dim })
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("error[usage]: {}", one_line(first.trim_start_matches("error: ")));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind(), one_line(&e.to_string()));
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
