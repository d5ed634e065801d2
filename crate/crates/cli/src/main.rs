//! `retarget`: compute saliency maps and run attention-retargeting methods.
//!
//! ```text
//! retarget <method> --input photo.png --mask roi.pgm --output out/ [--config run.toml] [--set key=value]...
//! ```
//!
//! Failures print one line `error[<category>]: <message>` to stderr and exit
//! with 2 (config), 3 (io), 4 (numerical) or 5 (degenerate input).

mod methods;
mod settings;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use toml::Value;

use methods::{Method, RunConfig};
use settings::Keys;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Numerical(String),
    Degenerate(String),
}

impl CliError {
    fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Numerical(_) => "numerical",
            CliError::Degenerate(_) => "degenerate",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Degenerate(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (CliError::Config(m)
        | CliError::Io(m)
        | CliError::Numerical(m)
        | CliError::Degenerate(m)) = self;
        write!(f, "error[{}]: {}", self.category(), m.replace('\n', " "))
    }
}

impl From<retarget_core::Error> for CliError {
    fn from(e: retarget_core::Error) -> Self {
        use retarget_core::Error as E;
        match e {
            E::InvalidArgument(m) => CliError::Config(m),
            E::Degenerate(m) => CliError::Degenerate(m),
            E::Numerical(m) => CliError::Numerical(m),
            E::Io(e) => CliError::Io(e.to_string()),
            E::Codec(e) => CliError::Io(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "retarget",
    version,
    about = "Saliency maps and attention retargeting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the saliency map of an image.
    Saliency(RunArgs),
    /// Black-box per-segment optimization toward target importances.
    Iterative(RunArgs),
    /// Feature-guided per-segment optimization toward target importances.
    Feedback(RunArgs),
    /// Per-pixel color pushes into and away from the ROI.
    Hagiwara(RunArgs),
    /// Texture de-emphasis inside the ROI.
    Texture(RunArgs),
    /// Center-surround inversion scaling intensity and saturation.
    Kim(RunArgs),
    /// Rotate the ROI to the most divergent edge orientation.
    Rotate(RunArgs),
    /// Shift the ROI hue to the most divergent hue.
    Hue(RunArgs),
    /// Patch-graph color transfer from candidate palettes.
    Nguyen(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML config with dotted keys such as `rotate.bins = 180`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input image (PNG, PPM, PGM) or `synth:<scene>`.
    #[arg(long)]
    input: Option<String>,
    /// Output directory for the image, saliency maps and reports.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Binary ROI mask; samples >= 128 are inside.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Segment or object label map (8 or 16 bit gray).
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Target saliency map; per-segment means become target importances.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Seed for synthetic inputs.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write every feature and conspicuity map.
    #[arg(long)]
    emit_debug: bool,
    /// Override a config key, e.g. `--set kim.reg=1e-6`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Command {
    fn split(self) -> (Method, RunArgs) {
        match self {
            Command::Saliency(a) => (Method::Saliency, a),
            Command::Iterative(a) => (Method::Iterative, a),
            Command::Feedback(a) => (Method::Feedback, a),
            Command::Hagiwara(a) => (Method::Hagiwara, a),
            Command::Texture(a) => (Method::Texture, a),
            Command::Kim(a) => (Method::Kim, a),
            Command::Rotate(a) => (Method::Rotate, a),
            Command::Hue(a) => (Method::Hue, a),
            Command::Nguyen(a) => (Method::Nguyen, a),
        }
    }
}

fn path_value(p: &std::path::Path) -> Value {
    Value::String(p.to_string_lossy().into_owned())
}

fn resolve(method: Method, args: RunArgs) -> Result<RunConfig, CliError> {
    let mut keys = match &args.config {
        Some(p) => Keys::load(p)?,
        None => Keys::default(),
    };
    for s in &args.overrides {
        keys.set(s)?;
    }
    if let Some(v) = args.input {
        keys.insert("input", Value::String(v));
    }
    for (key, v) in [
        ("output", &args.output),
        ("mask", &args.mask),
        ("labels", &args.labels),
        ("target", &args.target),
    ] {
        if let Some(p) = v {
            keys.insert(key, path_value(p));
        }
    }
    if let Some(s) = args.seed {
        let s = i64::try_from(s).map_err(|_| CliError::Config("seed too large".into()))?;
        keys.insert("seed", Value::Integer(s));
    }
    if args.emit_debug {
        keys.insert("emit_debug", Value::Boolean(true));
    }
    RunConfig::from_keys(method, keys)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (method, args) = cli.command.split();
    match resolve(method, args).and_then(|cfg| methods::run(&cfg)) {
        Ok(report) => {
            let mut line = format!("{} ok", report.method);
            if let (Some(a), Some(b)) = (report.ratio_before, report.ratio_after) {
                line.push_str(&format!(" ratio {a:.4} -> {b:.4}"));
            }
            if let (Some(a), Some(b)) = (report.initial_error, report.final_error) {
                line.push_str(&format!(" error {a:.4} -> {b:.4}"));
            }
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
