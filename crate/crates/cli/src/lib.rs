//! Command-line front end: argument parsing, model loading and the four
//! verbs `analyze`, `sample`, `generate` and `check`.

pub mod error;
pub mod model;
pub mod report;
pub mod sample;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mpscmi::mpschain::{fixed_point, normalization_residual};
use serde::Serialize;

use error::{CliError, CliResult};
use model::{builtin_model, load_model, Builtin, BuiltinParams, Model, ModelFile};
use report::AnalyzeSettings;

#[derive(Debug, Parser)]
#[command(
    name = "mpscmi",
    version,
    about = "Classical restrictions of matrix product states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropies, CMI, decay rates, purity verdict and Gibbs block.
    Analyze(AnalyzeArgs),
    /// Sample measurement trajectories as CSV.
    Sample(SampleArgs),
    /// Write a generated family as a model file.
    Generate(GenerateArgs),
    /// Validate a model file.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Builtin family.
    #[arg(
        long,
        value_enum,
        conflicts_with = "model",
        required_unless_present = "model"
    )]
    pub builtin: Option<Builtin>,
    /// Model file (JSON).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Bond dimension for jordan, clock, haar and constructive.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Physical dimension for haar and constructive.
    #[arg(long)]
    pub phys: Option<usize>,
    /// Damping rate.
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    /// Markov transition matrix, rows separated by ';'.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl ModelArgs {
    pub fn resolve(&self) -> CliResult<Model> {
        match (&self.builtin, &self.model) {
            (Some(kind), _) => builtin_model(
                *kind,
                &BuiltinParams {
                    dim: self.dim,
                    phys: self.phys,
                    gamma: self.gamma,
                    p: self.p.clone(),
                    seed: self.seed,
                },
            ),
            (None, Some(path)) => load_model(path),
            (None, None) => Err(CliError::InvalidModel("pass --builtin or --model".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 6)]
    pub nmax: usize,
    /// Single Gibbs window width; all valid widths when omitted.
    #[arg(long)]
    pub ell: Option<usize>,
    /// Outer block lengths and Gibbs chain middle length, as a,b,c.
    #[arg(long, value_parser = parse_geometry)]
    pub geometry: Option<(usize, usize, usize)>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Largest number of strings any single enumeration may visit.
    #[arg(long, default_value_t = mpscmi::enumerate::DEFAULT_GUARD)]
    pub guard: u64,
    /// Tolerance of the correctable-subspace search.
    #[arg(long, default_value_t = mpscmi::puritycert::VERDICT_TOL)]
    pub tol: f64,
    /// Mix the Gibbs-block distribution with uniform at this weight.
    #[arg(long)]
    pub smooth: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Measurements per trajectory.
    #[arg(long, visible_alias = "nmax", default_value_t = 10)]
    pub steps: usize,
    #[arg(long, default_value_t = 100)]
    pub trajectories: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenerateKind {
    Haar,
    Constructive,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: GenerateKind,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub phys: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    /// Model file (JSON).
    pub model: PathBuf,
}

pub fn parse_geometry(text: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let parsed: Result<Vec<usize>, _> = parts.iter().map(|p| p.parse::<usize>()).collect();
    match parsed.as_deref() {
        Ok([a, b, c]) if *b >= 1 => Ok((*a, *b, *c)),
        _ => Err(format!("expected a,b,c with b >= 1, got '{text}'")),
    }
}

#[derive(Debug, Serialize)]
struct CheckSummary {
    label: String,
    d: usize,
    #[serde(rename = "D")]
    bond_dim: usize,
    normalization_residual: f64,
    transfer_gap: f64,
    primitive: bool,
}

/// Output text of a command and where it goes.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub path: Option<PathBuf>,
}

pub fn run(cli: &Cli) -> CliResult<Output> {
    match &cli.command {
        Command::Analyze(args) => {
            let model = args.model.resolve()?;
            let settings = AnalyzeSettings {
                n_max: args.nmax,
                ell: args.ell,
                geometry: args.geometry,
                seed: args.model.seed,
                guard: args.guard,
                tol: args.tol,
                smoothing: args.smooth,
            };
            let rep = report::analyze(&model, &settings)?;
            let text = match args.format {
                Format::Json => report::to_json(&rep)?,
                Format::Csv => report::table_csv(&rep)?,
            };
            Ok(Output {
                text,
                path: args.out.clone(),
            })
        }
        Command::Sample(args) => {
            let model = args.model.resolve()?;
            if args.steps == 0 {
                return Err(CliError::Guard(mpscmi::Error::EmptyString));
            }
            Ok(Output {
                text: sample::sample_csv(&model, args.steps, args.trajectories, args.model.seed)?,
                path: args.out.clone(),
            })
        }
        Command::Generate(args) => {
            let kind = match args.kind {
                GenerateKind::Haar => Builtin::Haar,
                GenerateKind::Constructive => Builtin::Constructive,
            };
            let model = builtin_model(
                kind,
                &BuiltinParams {
                    dim: Some(args.dim),
                    phys: Some(args.phys),
                    seed: args.seed,
                    ..BuiltinParams::default()
                },
            )?;
            let mut text = serde_json::to_string_pretty(&ModelFile::from_model(&model))?;
            text.push('\n');
            Ok(Output {
                text,
                path: args.out.clone(),
            })
        }
        Command::Check(args) => {
            let model = load_model(&args.model)?;
            let fp = fixed_point(&model.kraus, 1e-10)?;
            let summary = CheckSummary {
                label: model.label.clone(),
                d: model.kraus.d(),
                bond_dim: model.kraus.bond_dim(),
                normalization_residual: normalization_residual(model.kraus.ops()),
                transfer_gap: fp.gap,
                primitive: fp.primitive,
            };
            let mut text = serde_json::to_string_pretty(&summary)?;
            text.push('\n');
            Ok(Output { text, path: None })
        }
    }
}

/// Writes the output to its path, or to stdout.
pub fn emit(output: &Output) -> CliResult<()> {
    match &output.path {
        Some(path) => std::fs::write(path, &output.text)
            .map_err(|e| CliError::Write(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(output.text.as_bytes())
                .map_err(|e| CliError::Write(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_parsing() {
        assert_eq!(parse_geometry("2,3,1"), Ok((2, 3, 1)));
        assert_eq!(parse_geometry(" 0, 1 ,0"), Ok((0, 1, 0)));
        assert!(parse_geometry("2,0,1").is_err());
        assert!(parse_geometry("2,3").is_err());
        assert!(parse_geometry("a,b,c").is_err());
    }

    #[test]
    fn model_source_is_exclusive() {
        assert!(Cli::try_parse_from(["mpscmi", "analyze"]).is_err());
        assert!(Cli::try_parse_from([
            "mpscmi",
            "analyze",
            "--builtin",
            "aklt",
            "--model",
            "x.json"
        ])
        .is_err());
        assert!(Cli::try_parse_from(["mpscmi", "analyze", "--builtin", "aklt-pauli"]).is_ok());
    }
}
