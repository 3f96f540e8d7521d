use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use weyl_forge::report::{list_identities, list_manifolds, run_suite, Format, RunConfig};

#[derive(Parser)]
#[command(name = "weyl-forge", version, about = "Verify four-dimensional Weyl curvature identities on closed-form charts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate identities at seeded sample points and emit a report.
    Verify(VerifyArgs),
    /// Print the manifold catalog or the identity registry.
    List {
        #[arg(value_enum)]
        what: ListWhat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ListWhat {
    Manifolds,
    Identities,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Text,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Catalog names or `all`.
    #[arg(long, num_args = 1.., value_delimiter = ',', default_value = "all")]
    manifolds: Vec<String>,
    /// Identity ids, id prefixes, or `all`.
    #[arg(long, num_args = 1.., value_delimiter = ',', default_value = "all")]
    identities: Vec<String>,
    /// Sample points per manifold.
    #[arg(long, default_value_t = 20)]
    points: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// `auto` or a fixed metric jet order in 2..=8.
    #[arg(long, default_value = "auto")]
    jet_order: String,
    /// Tolerance override `id=value`; repeatable.
    #[arg(long = "tol", value_name = "ID=VALUE")]
    tol: Vec<String>,
    /// Multiply every metric by this constant.
    #[arg(long, default_value_t = 1.0)]
    metric_scale: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<String>,
    /// Omit the timestamp so identical configs give identical bytes.
    #[arg(long)]
    deterministic: bool,
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn verify(args: VerifyArgs) -> ExitCode {
    let jet_order = match args.jet_order.as_str() {
        "auto" => None,
        s => match s.parse::<usize>() {
            Ok(k) => Some(k),
            Err(_) => return config_error(format!("--jet-order must be `auto` or an integer, got `{s}`")),
        },
    };
    let mut tolerance_overrides = BTreeMap::new();
    for t in &args.tol {
        let Some((id, v)) = t.split_once('=') else {
            return config_error(format!("--tol expects ID=VALUE, got `{t}`"));
        };
        match v.parse::<f64>() {
            Ok(x) => {
                tolerance_overrides.insert(id.to_string(), x);
            }
            Err(_) => return config_error(format!("--tol value for `{id}` is not a number: `{v}`")),
        }
    }
    let format = match args.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
        FormatArg::Text => Format::Text,
    };
    let cfg = RunConfig {
        manifolds: args.manifolds,
        identities: args.identities,
        points_per_manifold: args.points,
        seed: args.seed,
        tolerance_overrides,
        jet_order,
        metric_scale: args.metric_scale,
        output_format: format,
        output_path: args.out.clone(),
        deterministic: args.deterministic,
    };
    let report = match run_suite(&cfg) {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    let body = report.render(format);
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, body) {
                return config_error(format!("cannot write {path}: {e}"));
            }
        }
        None => print!("{body}"),
    }
    for e in &report.summary.errors {
        eprintln!("error: {e}");
    }
    ExitCode::from(report.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Verify(args) => verify(args),
        Command::List { what } => {
            print!(
                "{}",
                match what {
                    ListWhat::Manifolds => list_manifolds(),
                    ListWhat::Identities => list_identities(),
                }
            );
            ExitCode::SUCCESS
        }
    }
}
