//! The `intbasis` command line: decompose / homology / harmonic / oracle.
//!
//! All four commands read one JSON input (a file path, or `-` for stdin)
//! and write one JSON result (stdout, or `--output`). Pipelines compose:
//! the module JSON emitted by `homology` and `harmonic` is valid input for
//! `decompose` and `oracle`. Runtime failures exit with code 1 and a
//! machine-readable `{"error": {"kind", "detail"}}` envelope on stderr;
//! command-line misuse exits with code 2.

use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::error::Error;
use crate::field::{FieldSpec, DEFAULT_REAL_TOL};
use crate::io;
use crate::Result;

#[derive(Parser, Debug)]
#[command(name = "intbasis", version, about = "Interval-basis decomposition of persistence modules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decompose a persistence module into an interval basis and diagram.
    Decompose(DecomposeArgs),
    /// Build the k-persistent homology module of a filtration or tower.
    Homology(HomologyArgs),
    /// Build the harmonic (Hodge Laplacian kernel) module of a filtration
    /// or tower, over the reals.
    Harmonic(HarmonicArgs),
    /// Recover the diagram alone from the rank function (no generators).
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
pub struct CommonArgs {
    /// Input path, or "-" for stdin.
    pub input: String,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Tolerance for the real field.
    #[arg(long, default_value_t = DEFAULT_REAL_TOL)]
    pub tol: f64,
    /// Worker threads for the per-step computations.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: u16,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Override the module's field: "zp:<p>", "rational" or "real".
    #[arg(long)]
    pub field: Option<String>,
    /// Force the SVD-based path (real field only; on by default for real).
    #[arg(long)]
    pub real_path: bool,
    /// Render deaths at the virtual step n+1 as "inf".
    #[arg(long)]
    pub essential_as_infinite: bool,
}

#[derive(Args, Debug)]
pub struct HomologyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Homology degree k.
    #[arg(long)]
    pub degree: usize,
    /// Coefficient field: "zp:<p>", "rational" or "real".
    #[arg(long, default_value = "rational")]
    pub field: String,
}

#[derive(Args, Debug)]
pub struct HarmonicArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Degree k of the Laplacian.
    #[arg(long)]
    pub degree: usize,
    /// Also decompose and export harmonic generators per pair, embedded in
    /// chain coordinates.
    #[arg(long)]
    pub generators: bool,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Override the module's field: "zp:<p>", "rational" or "real".
    #[arg(long)]
    pub field: Option<String>,
    /// Render deaths at the virtual step n+1 as "inf".
    #[arg(long)]
    pub essential_as_infinite: bool,
}

fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

fn write_output(common: &CommonArgs, value: &serde_json::Value) -> Result<()> {
    let text = io::to_pretty_string(value);
    match &common.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_field(name: &Option<String>, tol: f64) -> Result<Option<FieldSpec>> {
    name.as_deref().map(|s| FieldSpec::parse(s, tol)).transpose()
}

/// Run one command to completion. Errors bubble up for the binary to wrap
/// in the error envelope.
pub fn run(command: &Command) -> Result<()> {
    match command {
        Command::Decompose(args) => {
            let raw = read_input(&args.common.input)?;
            let value = io::value_from_str(&raw)?;
            let field = parse_field(&args.field, args.common.tol)?;
            let module = io::module_from_json(&value, field, args.common.tol)?;
            if args.real_path && !module.field().is_real() {
                return Err(Error::RealFieldRequired);
            }
            let use_real_path = args.real_path || module.field().is_real();
            let (basis, pairs) = crate::decompose::pmd(&module, use_real_path, args.common.threads as usize)?;
            let out = io::decomposition_to_json(&module, &basis, &pairs, args.essential_as_infinite);
            write_output(&args.common, &out)
        }
        Command::Homology(args) => {
            let raw = read_input(&args.common.input)?;
            let value = io::value_from_str(&raw)?;
            let field = FieldSpec::parse(&args.field, args.common.tol)?;
            let tower = io::chain_input_from_json(&value, &field)?;
            let module = crate::homology::build_persistent_homology(
                &tower,
                args.degree,
                args.common.threads as usize,
            )?;
            write_output(&args.common, &io::module_to_json(&module))
        }
        Command::Harmonic(args) => {
            let raw = read_input(&args.common.input)?;
            let value = io::value_from_str(&raw)?;
            let field = FieldSpec::real(args.common.tol)?;
            let tower = io::chain_input_from_json(&value, &field)?;
            let threads = args.common.threads as usize;
            if !args.generators {
                let module = crate::harmonic::build_harmonic_module(&tower, args.degree, threads)?;
                return write_output(&args.common, &io::module_to_json(&module));
            }
            let (steps, module) = crate::harmonic::harmonic_pipeline(&tower, args.degree, threads)?;
            let (basis, pairs) = crate::decompose::pmd(&module, true, threads)?;
            let generators: Vec<serde_json::Value> = basis
                .elements
                .iter()
                .map(|e| {
                    let chain = steps[e.birth - 1]
                        .basis
                        .apply(&e.vector)
                        .expect("generator lives in the step's kernel coordinates");
                    Ok(json!({
                        "birth": e.birth,
                        "death": e.death,
                        "chain": chain
                            .iter()
                            .map(|s| io::scalar_to_json(module.field(), s))
                            .collect::<Vec<_>>(),
                    }))
                })
                .collect::<Result<_>>()?;
            let out = json!({
                "module": io::module_to_json(&module),
                "pairs": io::pairs_to_json(&pairs, module.len(), false),
                "generators": generators,
            });
            write_output(&args.common, &out)
        }
        Command::Oracle(args) => {
            let raw = read_input(&args.common.input)?;
            let value = io::value_from_str(&raw)?;
            let field = parse_field(&args.field, args.common.tol)?;
            let module = io::module_from_json(&value, field, args.common.tol)?;
            let truncated = module.truncate_essential();
            let mut pairs = crate::oracle::barcode_oracle(&truncated);
            pairs.sort();
            let out = json!({
                "pairs": io::pairs_to_json(&pairs, module.len(), args.essential_as_infinite),
            });
            write_output(&args.common, &out)
        }
    }
}
