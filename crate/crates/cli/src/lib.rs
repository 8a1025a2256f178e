//! Command-line front end: workspace files in, JSON reports out.

pub mod commands;
pub mod report;
pub mod workspace;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "germforge", version, about = "Exact jet-level equivalence of map-germs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Workspace file, or `-` for stdin.
    pub workspace: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Seek g with lhs ≡ g·rhs modulo m^degree.
    Solve(SolveArgs),
    /// Quivers of maps.
    #[command(subcommand)]
    Quiver(QuiverCommand),
    /// Emit the implicit-function system of an equivalence problem.
    EncodeIfs(EncodeArgs),
    /// Tangent image of an orbit and the determinacy test.
    Tangent(TangentArgs),
    /// Reduce an unfolding to a normal form along a basis.
    NormalForm(NormalFormArgs),
    /// Run the solver along a schedule of degrees.
    Probe(ProbeArgs),
    /// Print the workspace in canonical form.
    Print(Common),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub group: String,
    /// Target map(s) f̃; repeat together with --rhs for a batch.
    #[arg(long, required = true)]
    pub lhs: Vec<String>,
    /// Start map(s) f.
    #[arg(long, required = true)]
    pub rhs: Vec<String>,
    #[arg(long)]
    pub degree: u32,
    /// Group element to start from.
    #[arg(long)]
    pub seed: Option<String>,
    /// `source|target <variant> [args]`, e.g. `source ideal_offset [ x^2 ]`.
    #[arg(long)]
    pub constraint: Vec<String>,
    /// Concurrent solves for a batch.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Append the witnesses as workspace declarations to this file.
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum QuiverCommand {
    /// Solve for vertexwise morphisms.
    Solve(QuiverSolveArgs),
    /// Solve with an unknown base substitution of the parameters.
    BaseChange(QuiverSolveArgs),
    /// Turn a nested solution into vertexwise morphisms.
    Purify(PurifyArgs),
    /// Check that a quiver is a rooted tree of valid maps.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct QuiverSolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// The quiver (Γ, X̃, f̃).
    #[arg(long)]
    pub domain: String,
    /// The quiver (Γ, X, f).
    #[arg(long)]
    pub codomain: String,
    #[arg(long)]
    pub degree: u32,
    /// `vertex=map`: starting components of the morphism at a vertex.
    #[arg(long)]
    pub seed: Vec<String>,
    /// Keep the base substitution at the identity.
    #[arg(long)]
    pub freeze_base: bool,
    /// Name prefix of emitted declarations.
    #[arg(long, default_value = "sol")]
    pub name: String,
    /// Append the solution as workspace declarations to this file.
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PurifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Name of the nested solution.
    #[arg(long)]
    pub solution: String,
    /// Extra declarations read after the workspace.
    #[arg(long)]
    pub solution_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub quiver: String,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub group: String,
    #[arg(long)]
    pub lhs: String,
    #[arg(long)]
    pub rhs: String,
    /// Write the system text to this file.
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TangentArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub group: String,
    #[arg(long)]
    pub map: String,
    #[arg(long)]
    pub order: u32,
}

#[derive(Debug, Args)]
pub struct NormalFormArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub group: String,
    #[arg(long)]
    pub family: String,
    /// Basis maps, in order.
    #[arg(long)]
    pub basis: Vec<String>,
    #[arg(long)]
    pub degree: u32,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub group: String,
    #[arg(long)]
    pub lhs: String,
    #[arg(long)]
    pub rhs: String,
    /// Increasing degrees, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub schedule: Vec<u32>,
    #[arg(long)]
    pub seed: Option<String>,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Solve(a) => &a.common,
            Command::Quiver(QuiverCommand::Solve(a) | QuiverCommand::BaseChange(a)) => &a.common,
            Command::Quiver(QuiverCommand::Purify(a)) => &a.common,
            Command::Quiver(QuiverCommand::Validate(a)) => &a.common,
            Command::EncodeIfs(a) => &a.common,
            Command::Tangent(a) => &a.common,
            Command::NormalForm(a) => &a.common,
            Command::Probe(a) => &a.common,
            Command::Print(c) => c,
        }
    }
}
