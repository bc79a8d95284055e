use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use dbc::authority::IssuanceRequest;
use dbc::multikey::setup_dimensions;
use dbc::{Backend, EntityRegistry, Side};
use dbc_cli::{emit, finish, parse_backend, rng};

/// Trusted authority: keeps the label to identifier registry and raises
/// blinded bases to a label's identifier.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// Registry file.
    #[arg(long, global = true, default_value = "registry.tsv")]
    registry: PathBuf,

    /// Seed for reproducible identifiers.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Create an empty registry.
    Init {
        path: Option<PathBuf>,
        #[arg(long, default_value = "mock", value_parser = parse_backend)]
        backend: Backend,
    },
    /// Assign a fresh identifier to a label.
    Register { label: String },
    /// Raise two blinded bases to the label's identifier.
    Issue {
        label: String,
        base_a: String,
        base_b: String,
    },
    /// Register the 2d dimension entities used by multi-key indexes.
    MkSetup {
        dimensions: usize,
        #[arg(long, default_value = "dims.tsv")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    let mut rng = rng(cli.seed);
    match cli.command {
        Command::Init { path, backend } => {
            let path = path.unwrap_or(cli.registry);
            if path.exists() {
                bail!("{} already exists", path.display());
            }
            EntityRegistry::new(backend).save(&path)?;
            println!("initialized {} ({backend})", path.display());
        }
        Command::Register { label } => {
            let mut registry = load(&cli.registry)?;
            let reg = registry.register(&label, &mut rng)?;
            registry.save(&cli.registry)?;
            println!("registered {} at position {}", reg.label(), reg.position());
        }
        Command::Issue { label, base_a, base_b } => {
            let registry = load(&cli.registry)?;
            let b = registry.backend();
            let request = IssuanceRequest {
                label,
                base_a: b.decode_element_on(Side::SourceA, &base_a)?,
                base_b: b.decode_element_on(Side::SourceB, &base_b)?,
            };
            let response = registry.issue_raised(&request)?;
            println!("{}", b.encode_element(&response.element_a)?);
            println!("{}", b.encode_element(&response.element_b)?);
        }
        Command::MkSetup { dimensions, out } => {
            let mut registry = load(&cli.registry)?;
            let setup = setup_dimensions(&mut registry, dimensions, &mut rng)?;
            registry.save(&cli.registry)?;
            emit(Some(&out), &setup.to_text())?;
            println!(
                "registered {} dimension entities into {}",
                2 * dimensions,
                out.display()
            );
        }
    }
    Ok(())
}

fn load(path: &std::path::Path) -> Result<EntityRegistry> {
    EntityRegistry::load(path).with_context(|| format!("loading registry {}", path.display()))
}

fn main() -> ExitCode {
    finish(run(Cli::parse()))
}
