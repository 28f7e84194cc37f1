use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use hmfree_cli::commands::{self, parameters};
use hmfree_cli::instance::Instance;
use hmfree_cli::report::Report;

#[derive(Parser)]
#[command(name = "hmfree", version, about = "Verify free-algebra and step-function instance files")]
struct Cli {
    /// Report format
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Check that maps between algebras are homomorphisms (all maps by default)
    CheckHom {
        #[arg(long)]
        file: PathBuf,
        #[arg(long = "map")]
        maps: Vec<String>,
    },
    /// Evaluate terms through the extension of a generator map into an algebra
    FreeExtend {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        map: String,
        #[arg(long = "term")]
        terms: Vec<String>,
        /// Also compare each term with its normal form under this system
        #[arg(long)]
        system: Option<String>,
        #[arg(long, env = "HMFREE_DEPTH", default_value_t = 3)]
        depth: usize,
    },
    /// Naturality squares, constant embeddings, identities in HM(A) and h F(hm) = hm
    VerifyDiagrams {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, env = "HMFREE_DEPTH", default_value_t = 3)]
        depth: usize,
        /// Restrict to one rewrite system, or `free`
        #[arg(long)]
        system: Option<String>,
        #[arg(long, env = "HMFREE_FUEL")]
        fuel: Option<u64>,
    },
    /// Retractions, the termwise factorization of hm and closed embeddings of spaces
    VerifyEmbedding {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, env = "HMFREE_DEPTH", default_value_t = 3)]
        depth: usize,
        #[arg(long)]
        retraction: Option<String>,
        /// Restrict to one rewrite system, or `free`
        #[arg(long)]
        system: Option<String>,
        #[arg(long, env = "HMFREE_FUEL")]
        fuel: Option<u64>,
    },
    /// Evaluate step-function expressions, or the queries stored in the file
    HmEval {
        #[arg(long)]
        file: PathBuf,
        #[arg(long = "expr")]
        exprs: Vec<String>,
    },
}

fn run(command: Command) -> Result<Report> {
    let (name, file, params) = match &command {
        Command::CheckHom { file, maps } => ("check-hom", file, parameters(&[("maps", json!(maps))])),
        Command::FreeExtend { file, map, terms, system, depth } => (
            "free-extend",
            file,
            parameters(&[("map", json!(map)), ("terms", json!(terms)), ("system", json!(system)), ("depth", json!(depth))]),
        ),
        Command::VerifyDiagrams { file, depth, system, fuel } => (
            "verify-diagrams",
            file,
            parameters(&[("depth", json!(depth)), ("system", json!(system)), ("fuel", json!(fuel))]),
        ),
        Command::VerifyEmbedding { file, depth, retraction, system, fuel } => (
            "verify-embedding",
            file,
            parameters(&[
                ("depth", json!(depth)),
                ("retraction", json!(retraction)),
                ("system", json!(system)),
                ("fuel", json!(fuel)),
            ]),
        ),
        Command::HmEval { file, exprs } => ("hm-eval", file, parameters(&[("exprs", json!(exprs))])),
    };
    let (inst, bytes) = Instance::load(file)?;
    let checks = match &command {
        Command::CheckHom { maps, .. } => commands::check_hom(&inst, maps)?,
        Command::FreeExtend { map, terms, system, depth, .. } => {
            commands::free_extend(&inst, map, terms, system.as_deref(), *depth)?
        }
        Command::VerifyDiagrams { depth, system, fuel, .. } => {
            commands::verify_diagrams(&inst, *depth, system.as_deref(), *fuel)?
        }
        Command::VerifyEmbedding { depth, retraction, system, fuel, .. } => {
            commands::verify_embedding(&inst, *depth, retraction.as_deref(), system.as_deref(), *fuel)?
        }
        Command::HmEval { exprs, .. } => commands::hm_eval(&inst, exprs)?,
    };
    Ok(Report::new(name, &bytes, params, checks))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(report) => {
            match cli.format {
                Format::Json => println!("{}", report.to_json()),
                Format::Text => print!("{}", report.to_text()),
            }
            ExitCode::from(report.exit_status as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
