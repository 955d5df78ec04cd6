use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "dziobek",
    version,
    about = "Find and certify Dziobek central configurations"
)]
pub struct Cli {
    /// Worker threads for the multistart solver (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate classes for one mass vector and certify each.
    Solve(SolveArgs),
    /// Certify a configuration read from a JSON file.
    Certify(CertifyArgs),
    /// Print the class-count bound for n bodies.
    Bound(BoundArgs),
    /// Repeat the enumeration over random mass vectors.
    Sweep(SweepArgs),
    /// Collinear three-body solutions from the 1-D solver.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundFormat {
    Text,
    Json,
}

/// Real exponent, or `newton` (-1.5) or `vortex` (-1).
pub fn parse_exponent(s: &str) -> Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "newton" => Ok(-1.5),
        "vortex" => Ok(-1.0),
        other => other
            .parse::<f64>()
            .map_err(|_| format!("expected a number, `newton` or `vortex`, got `{s}`")),
    }
}

/// Masses given as one comma-separated flag value.
#[derive(Debug, Clone, PartialEq)]
pub struct MassList(pub Vec<f64>);

pub fn parse_masses(s: &str) -> Result<MassList, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{}` is not a number", t.trim()))
        })
        .collect::<Result<_, _>>()
        .map(MassList)
}

#[derive(Debug, Clone, Args)]
pub struct MassArgs {
    /// Number of bodies.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated masses.
    #[arg(long, value_parser = parse_masses, allow_hyphen_values = true, conflicts_with = "equal")]
    pub masses: Option<MassList>,
    /// Use n unit masses.
    #[arg(long)]
    pub equal: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub bodies: MassArgs,
    /// Potential exponent a.
    #[arg(long, value_parser = parse_exponent, allow_hyphen_values = true, default_value = "newton")]
    pub a: f64,
    /// Number of Newton starts (default 500 n).
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Newton convergence tolerance on the residual max-norm.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    /// JSON file with `masses`, `a` and `positions`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = BoundFormat::Text)]
    pub format: BoundFormat,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = parse_exponent, allow_hyphen_values = true, default_value = "newton")]
    pub a: f64,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long, value_parser = parse_masses, allow_hyphen_values = true, default_value = "1,1,1")]
    pub masses: MassList,
    #[arg(long, value_parser = parse_exponent, allow_hyphen_values = true, default_value = "newton")]
    pub a: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exponent_aliases() {
        assert_eq!(parse_exponent("newton"), Ok(-1.5));
        assert_eq!(parse_exponent("Vortex"), Ok(-1.0));
        assert_eq!(parse_exponent("-0.5"), Ok(-0.5));
        assert!(parse_exponent("x").is_err());
    }

    #[test]
    fn negative_exponent_flag_parses() {
        let cli = Cli::try_parse_from(["dziobek", "solve", "--n", "3", "--equal", "--a", "-1.5"])
            .unwrap();
        let Command::Solve(s) = cli.command else {
            panic!()
        };
        assert_eq!(s.a, -1.5);
        assert!(s.bodies.equal);
    }

    #[test]
    fn masses_conflict_with_equal() {
        assert!(Cli::try_parse_from(["dziobek", "solve", "--masses", "1,2,3", "--equal"]).is_err());
    }
}
