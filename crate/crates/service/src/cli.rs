//! `dragwarp --spec edit.json --out result.png`

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use dragwarp_core::io::{self, diagnostics_json, parse_drag_spec, save_image, SpecError};
use dragwarp_core::pipeline::{self, PipelineError};
use dragwarp_core::Backend;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Pixel,
    ToyLatent,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Pixel => Backend::Pixel,
            BackendArg::ToyLatent => Backend::ToyLatent,
        }
    }
}

/// Apply one drag edit described by a JSON spec.
#[derive(Debug, Parser)]
#[command(name = "dragwarp", version)]
struct Args {
    /// Drag spec document (JSON). Image and mask paths resolve relative to it.
    #[arg(long)]
    spec: PathBuf,
    /// Output image, .png or .ppm.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the spec's backend.
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Where to write the diagnostics record (JSON).
    #[arg(long)]
    diag: Option<PathBuf>,
    /// Overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Validation(String),
    Runtime(String),
}

fn run(args: &Args) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| Failure::Runtime(format!("cannot read {}: {e}", args.spec.display())))?;
    let doc = parse_drag_spec(&text).map_err(|e| match e {
        SpecError::Syntax { .. } | SpecError::Invalid(_) => Failure::Validation(
            e.errors()
                .iter()
                .map(|v| format!("{}: {}", v.field, v.message))
                .collect::<Vec<_>>()
                .join("\n"),
        ),
    })?;
    let base = args.spec.parent().unwrap_or(Path::new("."));
    let (image, mask) = doc.load(base).map_err(|e| match e {
        io::IoError::Mask(m) => Failure::Validation(format!("mask: {m}")),
        other => Failure::Runtime(other.to_string()),
    })?;

    let mut config = doc.config.clone();
    if let Some(b) = args.backend {
        config.backend = b.into();
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let outcome = pipeline::edit(&image, &mask, &doc.drag_set(), &config).map_err(|e| match e {
        PipelineError::Validation(errs) => Failure::Validation(
            errs.iter()
                .map(|v| format!("{}: {}", v.field, v.message))
                .collect::<Vec<_>>()
                .join("\n"),
        ),
        other => Failure::Runtime(other.to_string()),
    })?;

    save_image(&outcome.output, &args.out).map_err(|e| Failure::Runtime(e.to_string()))?;
    if let Some(diag) = &args.diag {
        std::fs::write(diag, diagnostics_json(&outcome))
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", diag.display())))?;
    }
    Ok(())
}

/// Runs the CLI with explicit streams and returns the exit code.
pub fn run_cli_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{text}");
            return EXIT_OK;
        }
    };
    match run(&args) {
        Ok(()) => EXIT_OK,
        Err(Failure::Validation(msg)) => {
            let _ = writeln!(stderr, "invalid edit request:\n{msg}");
            EXIT_VALIDATION
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_RUNTIME
        }
    }
}

pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_cli_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}
