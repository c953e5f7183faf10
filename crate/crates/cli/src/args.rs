//! Command-line surface: subcommands, flags, and the value parsers for
//! complex numbers (`re,im`) and coupling signs (`+`/`-`).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use epkit::model::Sign;
use epkit::C64;

pub fn parse_complex(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [re] => re
            .trim()
            .parse::<f64>()
            .map(|r| C64::new(r, 0.0))
            .map_err(|e| format!("bad real part {re:?}: {e}")),
        [re, im] => {
            let r = re
                .trim()
                .parse::<f64>()
                .map_err(|e| format!("bad real part {re:?}: {e}"))?;
            let i = im
                .trim()
                .parse::<f64>()
                .map_err(|e| format!("bad imag part {im:?}: {e}"))?;
            Ok(C64::new(r, i))
        }
        _ => Err(format!("expected re or re,im — got {s:?}")),
    }
}

pub fn parse_sign(s: &str) -> Result<Sign, String> {
    match s.trim() {
        "+" | "plus" => Ok(Sign::Plus),
        "-" | "minus" => Ok(Sign::Minus),
        other => Err(format!("expected + or -, got {other:?}")),
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "epkit",
    version,
    about = "Construct, locate, and characterize exceptional points of complex-symmetric pencils"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags that pick the matrix family. A named builtin, explicit energies on
/// the command line, or a JSON config file (`--e`/`--signs` win over the
/// file's model section).
#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Built-in model name: e013 or ep2
    #[arg(long)]
    pub model: Option<String>,

    /// Diagonal energies e1 e2 e3, each as re,im
    #[arg(long, num_args = 3, value_parser = parse_complex, allow_hyphen_values = true)]
    pub e: Option<Vec<C64>>,

    /// Square-root sign selectors for the couplings s2 and s3
    #[arg(long, num_args = 2, value_parser = parse_sign, allow_hyphen_values = true)]
    pub signs: Option<Vec<Sign>>,

    /// JSON config with model / sweep / tolerances sections
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Radial sweep window (overrides the config file's sweep section).
#[derive(Args, Debug, Clone)]
pub struct SweepArgsCommon {
    /// Candidate EP position in the λ-plane, re,im
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub center: Option<C64>,

    /// Ray direction, re,im (normalized internally)
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub direction: Option<C64>,

    /// Smallest radius
    #[arg(long)]
    pub rmin: Option<f64>,

    /// Largest radius
    #[arg(long)]
    pub rmax: Option<f64>,

    /// Number of log-spaced radii
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the special EP3 family and report its closed-form quantities
    Construct {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample eigenvalues, norms, and overlaps along a ray into the EP (CSV)
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sweep: SweepArgsCommon,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the fractional power laws, from a sweep CSV or by re-running it
    Fit {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sweep: SweepArgsCommon,
        /// Existing sweep CSV to fit instead of re-running
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Loop around a candidate EP and report the sheet permutation
    Monodromy {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        center: Option<C64>,
        #[arg(long, default_value_t = 1e-3)]
        radius: f64,
        /// Number of loops; negative values circle clockwise
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        loops: i32,
        #[arg(long, default_value_t = 360)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Newton / Gauss-Newton search for an EP2 or EP3
    Locate {
        #[command(flatten)]
        model: ModelArgs,
        /// EP order to search for
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Initial guess for λ
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda0: Option<C64>,
        /// Initial tuning parameters (Re s2, Im s2, Re s3, Im s3) for order 3
        #[arg(long, num_args = 1.., value_delimiter = ',', allow_hyphen_values = true)]
        p0: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Order the levels at λ, classify the width pattern, and report the
    /// phase coefficients, handedness, and helix points
    Classify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: C64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        center: Option<C64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the three helix points plus an interpolated curve (CSV)
    Helix {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: C64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        center: Option<C64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite on a named built-in model
    Verify {
        /// Model name: e013 or ep2
        #[arg(long, default_value = "e013")]
        model: String,
    },
}
