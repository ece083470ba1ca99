//! `lab <experiment> --field p^r --seed s --out dir [flags]`

mod config;
mod error;
mod experiments;
mod registry;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::Value;

use config::{parse_rational, parse_set, ExperimentConfig, FieldSpec};
use error::RunError;
use registry::{Context, Registry};

#[derive(Parser, Debug)]
#[command(name = "lab", version, about = "Seeded experiments over finite fields")]
struct Cli {
    /// Experiment name, or `list` to print the registry.
    experiment: String,
    /// Field as p^r.
    #[arg(long, default_value = "3^3")]
    field: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for summary.json and detail.csv.
    #[arg(long, default_value = "lab-out")]
    out: PathBuf,
    #[arg(long)]
    size: Option<usize>,
    /// Rational parameter K, e.g. 5/4.
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    /// Subfield degree.
    #[arg(long)]
    subfield: Option<u32>,
    /// Set specs: list:1,2,3 | random:n | subfield:k | units:k | coset:k:c | vspace:d:k | progression:s:t:len
    #[arg(long = "W")]
    w: Option<String>,
    #[arg(long = "X")]
    x: Option<String>,
    #[arg(long = "A")]
    a: Option<String>,
    /// Repeatable.
    #[arg(long = "B")]
    b: Vec<String>,
    /// Convolution kernel: direct or fft.
    #[arg(long, default_value = "direct")]
    kernel: String,
    /// Popularity level in (0, 1).
    #[arg(long)]
    lambda: Option<String>,
}

impl Cli {
    fn into_config(self) -> Result<ExperimentConfig, RunError> {
        let set = |role: &str, s: Option<String>| s.map(|s| parse_set(role, &s)).transpose();
        let rational = |flag: &str, s: Option<String>| s.map(|s| parse_rational(flag, &s)).transpose();
        Ok(ExperimentConfig {
            field: self.field.parse::<FieldSpec>()?,
            seed: self.seed,
            out: self.out,
            size: self.size,
            k: rational("k", self.k)?,
            trials: self.trials,
            subfield: self.subfield,
            w: set("W", self.w)?,
            x: set("X", self.x)?,
            a: set("A", self.a)?,
            b: self.b.iter().map(|s| parse_set("B", s)).collect::<Result<_, _>>()?,
            kernel: self.kernel,
            lambda: rational("lambda", self.lambda)?,
            experiment: self.experiment,
        })
    }
}

fn run(registry: &Registry, config: ExperimentConfig) -> Result<ExitCode, RunError> {
    let exp = registry.get(&config.experiment).ok_or_else(|| {
        let known: Vec<_> = registry.names().collect();
        RunError::Config(format!("unknown experiment `{}` (known: {})", config.experiment, known.join(", ")))
    })?;
    let out = config.out.clone();
    let ctx = match Context::new(config.clone()) {
        Ok(ctx) => ctx,
        Err(e) => {
            report::write_error(&out, &config, Value::Null, &e)?;
            return Err(e);
        }
    };
    let field = serde_json::to_value(ctx.field.descriptor())?;
    match exp.run(&ctx) {
        Ok(outcome) => {
            report::write_outcome(&out, &config, field, &outcome)?;
            let verdict = match outcome.passed {
                Some(true) => "pass",
                Some(false) => "FAIL",
                None => "done",
            };
            println!("{} {}: {verdict} ({})", config.experiment, config.field, out.display());
            Ok(if outcome.passed == Some(false) { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
        Err(e) => {
            report::write_error(&out, &config, field, &e)?;
            Err(e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let registry = Registry::default();
    if cli.experiment == "list" {
        for e in registry.iter() {
            println!("{:<20} {}", e.name(), e.about());
        }
        return ExitCode::SUCCESS;
    }
    match cli.into_config().and_then(|c| run(&registry, c)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
