//! `simplex-bundle`: evaluate zoo curves, scores, entropy, geodesics and
//! flows on the probability simplex; derive score relations of polynomial
//! models; run the acceptance checks.

mod commands;
mod grid;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use grid::Grid;
use table::Format;

const ROW_COLUMNS: &str = "\
Columns: t, w_<label> for every cell, vdot_<label> with --with-velocity,
s_<label> with --with-score, fisher_info, status, determined_mask.
status is `ok` or the snake_case name of the failure (for example
abs_continuity_violation); failed values are left empty. determined_mask
is the support of the point as a bit string in cell order.";

#[derive(Parser, Debug)]
#[command(name = "simplex-bundle", version, about)]
#[command(after_help = "Exit codes: 0 success, 1 failed verification, 2 bad configuration, \
3 unknown or malformed model, 4 unwritable output.\n\
SIMPLEX_BUNDLE_TOL overrides the support tolerance (default 1e-12).")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; stdout when absent
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Zoo name (line, entropy3, mixture, gibbs, indep2x2, marghomo) or a JSON
    /// file `{"model": <name>, "params": {...}}`
    #[arg(short, long)]
    model: String,
    /// JSON parameter block for gibbs (`{"U": [...], "V": [...]}`) or
    /// mixture (`{"p": [...], "q": [...]}`)
    #[arg(long)]
    params: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Parameter grid min:max:n, both ends included
    #[arg(long, conflicts_with = "ts")]
    grid: Option<Grid>,
    /// Explicit comma-separated parameter values
    #[arg(long)]
    ts: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a curve on a grid
    #[command(after_help = ROW_COLUMNS)]
    Eval {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        with_velocity: bool,
        #[arg(long)]
        with_score: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Same as `eval --with-velocity --with-score`
    #[command(after_help = ROW_COLUMNS)]
    Score {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Entropy data for the entropy3 curve: production curve and heat map
    #[command(after_help = "\
Production columns: t, H, dHdt, status.
Heat-map columns: i, j, p1, p2, p3, H; the unit square is mapped onto the
triangle by (u, v) -> ((1-v)u, (1-v)(1-u), v).
With both outputs selected, --output names a directory that receives
entropy_production.csv and entropy_heatmap.csv (or .json).")]
    Entropy {
        #[arg(long)]
        production: bool,
        #[arg(long)]
        heatmap: bool,
        /// Production grid
        #[arg(long, default_value = "0.11:0.79:200")]
        grid: Grid,
        /// Heat-map points per side
        #[arg(long, default_value_t = 100)]
        resolution: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exponential geodesic through a base point
    #[command(after_help = "Columns: t, q_<label> for every cell, psi.\n\
The direction is centered at the base before use; its values off the support are ignored.")]
    Geodesic {
        /// Base weights, comma-separated
        #[arg(long)]
        base: String,
        /// Direction values, comma-separated
        #[arg(long, allow_hyphen_values = true)]
        direction: String,
        #[arg(long, default_value = "-2:2:41", allow_hyphen_values = true)]
        grid: Grid,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Natural-gradient flow of entropy or of an expectation
    #[command(after_help = "Columns: iteration, t, w_<i> for every cell, value, grad_norm.")]
    Flow {
        #[arg(long, value_enum, default_value = "entropy")]
        functional: commands::FunctionalKind,
        /// Values of g for --functional expectation
        #[arg(long, allow_hyphen_values = true)]
        g: Option<String>,
        /// Starting weights, comma-separated
        #[arg(long)]
        start: String,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long)]
        descent: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Trajectory of the Gibbs family (U = (0,0,1), V = (0,1,1.8) by default)
    #[command(after_help = "Columns: beta, w_<label> for every cell, vdot_<label>, fisher_info, status, determined_mask.")]
    Gibbs {
        #[arg(long, default_value = "-3:3:601", allow_hyphen_values = true)]
        beta: Grid,
        /// JSON block `{"U": [...], "V": [...]}`
        #[arg(long)]
        params: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Tangent system and binomial score relations of a polynomial model
    #[command(after_help = "The model file holds one polynomial per line in the p indeterminates \
(for example `p11*p22 - p12*p21`); `#` starts a comment.")]
    Algebra {
        /// Model file
        #[arg(short, long)]
        model: PathBuf,
        /// Cell labels, comma-separated
        #[arg(long, conflicts_with = "dim")]
        labels: Option<String>,
        /// Number of cells, labelled 1..d
        #[arg(long)]
        dim: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run the acceptance checks
    Verify {
        /// Run a single check
        #[arg(long)]
        only: Option<String>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval {
            model,
            grid,
            with_velocity,
            with_score,
            out,
        } => commands::eval(&model, &grid, with_velocity, with_score, &out),
        Command::Score { model, grid, out } => commands::eval(&model, &grid, true, true, &out),
        Command::Entropy {
            production,
            heatmap,
            grid,
            resolution,
            out,
        } => commands::entropy(production, heatmap, &grid, resolution, &out),
        Command::Geodesic {
            base,
            direction,
            grid,
            out,
        } => commands::geodesic(&base, &direction, &grid, &out),
        Command::Flow {
            functional,
            g,
            start,
            step,
            steps,
            descent,
            out,
        } => commands::flow(functional, g.as_deref(), &start, step, steps, descent, &out),
        Command::Gibbs { beta, params, out } => commands::gibbs(&beta, params.as_deref(), &out),
        Command::Algebra {
            model,
            labels,
            dim,
            output,
            json,
        } => commands::algebra(&model, labels.as_deref(), dim, output.as_deref(), json),
        Command::Verify { only, seed } => commands::verify(only.as_deref(), seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !e.quiet {
                eprintln!("error: {:#}", e.source);
            }
            ExitCode::from(e.code)
        }
    }
}
