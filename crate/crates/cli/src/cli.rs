//! Command-line grammar and dispatch.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rdot::{load_catalog, CoverMode, PlanRequest, ReportFormat};
use serde_json::Value;

use crate::ops::{self, ApiError};
use crate::service;

#[derive(Debug, Parser)]
#[command(name = "rdot", version, about = "Risk-mitigation portfolio planner")]
pub struct Cli {
    /// Write the result here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and check documents without solving anything.
    Validate {
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        racm: Option<PathBuf>,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long)]
        request: Option<PathBuf>,
        #[arg(long)]
        system: Option<PathBuf>,
    },
    /// Shortlist catalog strategies for a project profile.
    Filter {
        /// Defaults to the bundled seed catalog.
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        profile: PathBuf,
    },
    /// Suggest strategies for each component of a system description.
    Suggest {
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        system: PathBuf,
        /// Suggestions per component.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Select controls for a risk and control matrix.
    Cover {
        #[arg(long)]
        racm: PathBuf,
        #[arg(long, default_value = "auto", value_parser = parse_mode)]
        mode: CoverMode,
        #[arg(long)]
        overrides: Option<PathBuf>,
    },
    /// Enumerate portfolios, keep the Pareto frontier and pick the knee.
    Moo {
        #[arg(long)]
        spec: PathBuf,
        /// Rank the frontier with AHP weights from this pairwise matrix.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Weights and consistency ratio for a pairwise-comparison matrix.
    Ahp {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Run the whole workflow for a plan request.
    Plan {
        #[arg(long)]
        request: PathBuf,
        #[arg(long, default_value = "structured", value_parser = parse_format)]
        format: ReportFormat,
    },
    /// Re-run a plan request with additional overrides.
    Replan {
        #[arg(long)]
        request: PathBuf,
        #[arg(long)]
        overrides: PathBuf,
        /// Structured report to extend; planned afresh when omitted.
        #[arg(long)]
        previous: Option<PathBuf>,
        #[arg(long, default_value = "structured", value_parser = parse_format)]
        format: ReportFormat,
    },
    /// Serve the JSON API and the web client.
    Serve {
        /// Defaults to $RDOT_PORT, then 8080.
        #[arg(long)]
        port: Option<u16>,
    },
}

fn parse_mode(s: &str) -> Result<CoverMode, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse()
}

fn read(path: &Path) -> Result<String, ApiError> {
    fs::read_to_string(path).map_err(|e| ApiError::validation("io", format!("{}: {e}", path.display())))
}

fn read_opt(path: &Option<PathBuf>) -> Result<Option<String>, ApiError> {
    path.as_deref().map(read).transpose()
}

fn json_file(path: &Path) -> Result<Value, ApiError> {
    let src = read(path)?;
    serde_json::from_str(&src).map_err(|e| ApiError::validation("parse", format!("{}: {e}", path.display())))
}

fn typed<T: serde::de::DeserializeOwned>(v: Value) -> Result<T, ApiError> {
    Ok(serde_json::from_value(v)?)
}

const REFERENCE_FIELDS: [&str; 5] = ["profile", "catalog", "racm", "moo_spec", "overrides"];

/// Loads a plan request. Document fields given as strings are file paths,
/// relative to the request file.
pub fn load_request(path: &Path) -> Result<PlanRequest, ApiError> {
    let mut doc = json_file(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    if let Some(map) = doc.as_object_mut() {
        for key in REFERENCE_FIELDS {
            if let Some(Value::String(rel)) = map.get(key) {
                let resolved = json_file(&base.join(rel))?;
                map.insert(key.to_string(), resolved);
            }
        }
    }
    serde_json::from_value(doc).map_err(|e| ApiError::validation("request", e.to_string()))
}

fn catalog_opt(path: &Option<PathBuf>) -> Result<Option<rdot::Catalog>, ApiError> {
    match read_opt(path)? {
        Some(src) => Ok(Some(load_catalog(&src)?)),
        None => Ok(None),
    }
}

/// Runs a parsed command. Returns the output document, or `None` for
/// `serve`, which returns only when the server stops.
pub fn execute(cli: &Cli) -> Result<Option<String>, ApiError> {
    let out = match &cli.command {
        Command::Validate {
            catalog,
            profile,
            racm,
            spec,
            matrix,
            request,
            system,
        } => {
            let request = match request {
                Some(p) => Some(serde_json::to_string(&load_request(p)?)?),
                None => None,
            };
            ops::validate(&ops::ValidateInput {
                catalog: read_opt(catalog)?,
                profile: read_opt(profile)?,
                racm: read_opt(racm)?,
                spec: read_opt(spec)?,
                matrix: read_opt(matrix)?,
                request,
                system: read_opt(system)?,
            })?
        }
        Command::Filter { catalog, profile } => ops::filter(&ops::FilterInput {
            profile: typed(json_file(profile)?)?,
            catalog: catalog_opt(catalog)?,
        })?,
        Command::Suggest { catalog, system, k } => ops::suggest(&ops::SuggestInput {
            system: typed(json_file(system)?)?,
            k: *k,
            catalog: catalog_opt(catalog)?,
        })?,
        Command::Cover { racm, mode, overrides } => ops::cover(&ops::CoverInput {
            racm: typed(json_file(racm)?)?,
            mode: *mode,
            overrides: match overrides {
                Some(p) => typed(json_file(p)?)?,
                None => Default::default(),
            },
        })?,
        Command::Moo { spec, matrix } => ops::moo(&ops::MooInput {
            spec: typed(json_file(spec)?)?,
            weights: None,
            matrix: match matrix {
                Some(p) => Some(typed(json_file(p)?)?),
                None => None,
            },
        })?,
        Command::Ahp { matrix } => ops::ahp(&ops::AhpInput {
            matrix: typed(json_file(matrix)?)?,
        })?,
        Command::Plan { request, format } => ops::plan_report(
            &ops::PlanInput {
                request: load_request(request)?,
            },
            *format,
        )?,
        Command::Replan {
            request,
            overrides,
            previous,
            format,
        } => ops::replan_report(
            &ops::ReplanInput {
                request: load_request(request)?,
                overrides: typed(json_file(overrides)?)?,
                previous: match previous {
                    Some(p) => Some(typed(json_file(p)?)?),
                    None => None,
                },
            },
            *format,
        )?,
        Command::Serve { port } => {
            let env = std::env::var(service::PORT_ENV).ok();
            let port = service::resolve_port(*port, env.as_deref())?;
            let ui = std::env::var_os(service::UI_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(service::DEFAULT_UI_DIR));
            let runtime = tokio::runtime::Runtime::new().map_err(|e| ApiError::internal(e.to_string()))?;
            runtime
                .block_on(service::serve(port, Some(ui)))
                .map_err(|e| ApiError::internal(format!("server: {e}")))?;
            return Ok(None);
        }
    };
    Ok(Some(out))
}

/// Exit status plus what went to each stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `argv`, runs it and writes the result to `--out` when given.
/// Usage errors exit 1, like any other invalid input.
pub fn run<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 1,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let failed = |e: ApiError| Outcome {
        code: e.exit_code(),
        stdout: String::new(),
        stderr: format!("rdot: {} error ({}): {}\n", kind_label(&e), e.code, e.detail),
    };
    match execute(&cli) {
        Ok(Some(doc)) => match &cli.out {
            Some(path) => match fs::write(path, &doc) {
                Ok(()) => Outcome {
                    code: 0,
                    stdout: String::new(),
                    stderr: String::new(),
                },
                Err(e) => failed(ApiError::internal(format!("{}: {e}", path.display()))),
            },
            None => Outcome {
                code: 0,
                stdout: doc,
                stderr: String::new(),
            },
        },
        Ok(None) => Outcome {
            code: 0,
            stdout: String::new(),
            stderr: String::new(),
        },
        Err(e) => failed(e),
    }
}

fn kind_label(e: &ApiError) -> &'static str {
    match e.kind {
        rdot::ErrorKind::Validation => "validation",
        rdot::ErrorKind::Infeasible => "infeasible",
        rdot::ErrorKind::Internal => "internal",
    }
}
