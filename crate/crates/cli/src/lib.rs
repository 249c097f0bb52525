//! Command-line front end: argument model, path mini-language and command
//! dispatch. `main.rs` only parses arguments and maps the outcome to an exit
//! status.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use latticeband_core::dispersion::{dispersion_surface, GAP_TOL};
use latticeband_core::eigen::NEGATIVE_TOL;
use latticeband_core::oracle::ORACLE_TOL;
use latticeband_core::output::{self, emit_band_csv};
use latticeband_core::{
    band_extrema, band_gaps, band_structure, count_wavevectors, oracle_check, DispersionError,
    LatticeModel, ModelError, OracleError, PathSpec, RawModel, Wavevector, BUILTIN_NAMES,
};

/// Environment variable capping worker threads (0 or unset: automatic).
pub const THREADS_ENV: &str = "LATTICEBAND_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "latticeband",
    version,
    about = "Band structures of periodic mass-spring lattices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model and report diagnostics
    Validate(Common),
    /// Frequencies along a wavevector path
    Bands {
        #[command(flatten)]
        common: Common,
        /// `0:pi`, `0,0:pi,0:pi,pi`, a preset (`paper-2d-path`), a JSON vertex list or `@file.json`
        #[arg(long)]
        path: String,
        /// Samples per path segment, endpoints included
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Frequencies over a uniform grid of the whole zone
    Surface {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
    },
    /// Band gaps over a zone grid
    Gaps {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
    },
    /// Count wavevectors on a path where some band reaches a frequency
    Count {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        omega: f64,
        #[arg(long, default_value = "0:pi")]
        path: String,
        #[arg(long, default_value_t = 2001)]
        samples: usize,
    },
    /// Maximum and minimum of one band over the zone
    Extrema {
        #[command(flatten)]
        common: Common,
        /// Band number, starting at 1
        #[arg(long)]
        band: usize,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
    },
    /// Compare against a cyclic supercell of the given size
    Verify {
        #[command(flatten)]
        common: Common,
        /// Cells per direction, e.g. `9` or `5,5`
        #[arg(long)]
        cells: String,
    },
    /// List the built-in models
    BuiltinList {
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Exactly one model source.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Built-in model name
    #[arg(long)]
    pub builtin: Option<String>,
    /// Model JSON file
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[command(flatten)]
    pub source: Source,
    /// Override a constant: spring label (`K2=0.5`), node id (`m1=2`) or `spring:<i>=k`
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Failure of a command, split by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation: exit status 2.
    Usage(String),
    /// Invalid model or failed computation: exit status 1.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => m,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::UnknownBuiltin(_)
            | ModelError::UnknownConstantName(_)
            | ModelError::NegativeValue { .. }
            | ModelError::Io(_) => CliError::Usage(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<DispersionError> for CliError {
    fn from(e: DispersionError) -> Self {
        match e {
            DispersionError::Eigen { .. } => CliError::Failure(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::BadCells { .. } => CliError::Usage(e.to_string()),
            OracleError::Dispersion(d) => d.into(),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Failure(format!("write failed: {e}"))
    }
}

/// Configures the global thread pool from `LATTICEBAND_THREADS`.
pub fn configure_threads() -> Result<(), CliError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v.trim().parse::<usize>().map_err(|_| {
            CliError::Usage(format!(
                "{THREADS_ENV} must be a nonnegative integer, got `{v}`"
            ))
        })?,
        _ => 0,
    };
    if threads > 0 {
        // Fails only if a pool already exists, which is fine.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    Ok(())
}

fn parse_assignment(text: &str) -> Result<(String, f64), CliError> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--set expects NAME=VALUE, got `{text}`")))?;
    let value = parse_scalar(value)
        .ok_or_else(|| CliError::Usage(format!("--set {name}: `{value}` is not a number")))?;
    Ok((name.trim().to_string(), value))
}

fn raw_source(common: &Common) -> Result<RawModel, CliError> {
    match (&common.source.builtin, &common.source.model) {
        (Some(name), None) => Ok(latticeband_core::builtin(name)?.to_raw()),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read model file {}: {e}", path.display()))
            })?;
            serde_json::from_str(&text).map_err(|e| {
                CliError::Failure(format!("malformed model JSON in {}: {e}", path.display()))
            })
        }
        _ => Err(CliError::Usage(
            "give exactly one of --builtin NAME or --model FILE".into(),
        )),
    }
}

fn load_model(common: &Common) -> Result<LatticeModel, CliError> {
    let model = raw_source(common)?.into_model()?;
    let assignments = common
        .set
        .iter()
        .map(|s| parse_assignment(s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(model.with_overrides(&assignments)?)
}

/// Parses `1.5`, `pi`, `-pi/2`, `2*pi`, `3pi/4`.
pub fn parse_scalar(text: &str) -> Option<f64> {
    let t = text.trim().to_ascii_lowercase();
    if t.is_empty() {
        return None;
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim()),
        None => (1.0, t.strip_prefix('+').unwrap_or(&t).trim()),
    };
    let factor = |f: &str| -> Option<f64> {
        let f = f.trim();
        if f == "pi" {
            Some(PI)
        } else if let Some(coef) = f.strip_suffix("pi") {
            coef.trim().parse::<f64>().ok().map(|c| c * PI)
        } else {
            f.parse::<f64>().ok()
        }
    };
    let mut value = None;
    let mut rest = body;
    let mut op = '*';
    loop {
        let cut = rest.find(['*', '/']).unwrap_or(rest.len());
        let f = factor(&rest[..cut])?;
        value = Some(match (value, op) {
            (None, _) => f,
            (Some(v), '*') => v * f,
            (Some(v), _) => v / f,
        });
        if cut == rest.len() {
            break;
        }
        op = rest.as_bytes()[cut] as char;
        rest = &rest[cut + 1..];
    }
    value.map(|v| sign * v).filter(|v| v.is_finite())
}

fn vertices_from_json(value: &Value) -> Option<Vec<Wavevector>> {
    value
        .as_array()?
        .iter()
        .map(|v| match v {
            Value::Number(n) => n.as_f64().map(|x| Wavevector(vec![x])),
            Value::Array(items) => items
                .iter()
                .map(|c| c.as_f64().or_else(|| c.as_str().and_then(parse_scalar)))
                .collect::<Option<Vec<f64>>>()
                .map(Wavevector),
            Value::String(s) => parse_scalar(s).map(|x| Wavevector(vec![x])),
            _ => None,
        })
        .collect()
}

/// Path mini-language: a preset name, `v:v:...` with comma-separated
/// components per vertex, a JSON array of vertices, or `@file.json`.
pub fn parse_path(text: &str, samples: usize) -> Result<PathSpec, CliError> {
    let text = text.trim();
    if let Some(spec) = PathSpec::preset(text, samples) {
        return Ok(spec);
    }
    let bad = |why: &str| CliError::Usage(format!("bad --path `{text}`: {why}"));
    let vertices = if let Some(file) = text.strip_prefix('@') {
        let body = std::fs::read_to_string(file).map_err(|e| bad(&e.to_string()))?;
        let json: Value = serde_json::from_str(&body).map_err(|e| bad(&e.to_string()))?;
        let list = json.get("vertices").unwrap_or(&json);
        vertices_from_json(list).ok_or_else(|| bad("expected an array of vertices"))?
    } else if text.starts_with('[') {
        let json: Value = serde_json::from_str(text).map_err(|e| bad(&e.to_string()))?;
        vertices_from_json(&json).ok_or_else(|| bad("expected an array of vertices"))?
    } else {
        text.split(':')
            .map(|v| {
                v.split(',')
                    .map(parse_scalar)
                    .collect::<Option<Vec<f64>>>()
                    .map(Wavevector)
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| bad("vertex components must be numbers or multiples of pi"))?
    };
    Ok(PathSpec::new(vertices, samples))
}

fn parse_cells(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|c| c.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| {
            CliError::Usage(format!(
                "--cells expects positive integers like `5,5`, got `{text}`"
            ))
        })
}

fn open_sink<'a>(
    path: &Option<PathBuf>,
    stdout: &'a mut dyn Write,
) -> Result<Box<dyn Write + 'a>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Usage(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(stdout),
    })
}

fn write_json(sink: &mut dyn Write, value: &Value) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *sink, value).map_err(io::Error::from)?;
    writeln!(sink)?;
    Ok(())
}

/// Key/value CSV used when a report is requested as CSV.
fn write_flat_csv(
    sink: &mut dyn Write,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    writeln!(sink, "{}", header.join(","))?;
    for row in rows {
        writeln!(sink, "{}", row.join(","))?;
    }
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Runs one command. Diagnostics go to `stderr`, artifacts to `stdout`
/// unless `--output` names a file.
pub fn run(
    command: Command,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    configure_threads()?;
    match command {
        Command::Validate(common) => {
            let raw = raw_source(&common)?;
            let diags = raw.validate();
            for d in &diags {
                writeln!(stderr, "{d}")?;
            }
            let errors = diags.iter().filter(|d| d.is_error()).count();
            let mut sink = open_sink(&common.output, stdout)?;
            if common.format == Some(Format::Json) {
                let result = json!({
                    "valid": errors == 0,
                    "diagnostics": diags.iter().map(|d| json!({
                        "kind": format!("{:?}", d.kind),
                        "error": d.is_error(),
                        "message": d.message,
                    })).collect::<Vec<_>>(),
                });
                write_json(
                    &mut sink,
                    &output::report("validate", &raw.name, result, json!({})),
                )?;
            } else if errors == 0 {
                writeln!(
                    sink,
                    "ok: {} ({} nodes, {} springs, {}-D)",
                    raw.name,
                    raw.nodes.len(),
                    raw.springs.len(),
                    raw.dimension
                )?;
            }
            sink.flush()?;
            if errors > 0 {
                return Err(CliError::Failure(format!(
                    "{} has {errors} error(s)",
                    raw.name
                )));
            }
            // Overrides are checked too, once the model itself is sound.
            load_model(&common)?;
            Ok(())
        }
        Command::Bands {
            common,
            path,
            samples,
        } => {
            let model = load_model(&common)?;
            let spec = parse_path(&path, samples)?;
            let table = band_structure(&model, &spec)?;
            let mut sink = open_sink(&common.output, stdout)?;
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => emit_band_csv(&table, &mut sink)?,
                Format::Json => write_json(
                    &mut sink,
                    &output::report(
                        "bands",
                        model.name(),
                        output::band_table_json(&table),
                        json!({ "negative_eigenvalue_relative": NEGATIVE_TOL }),
                    ),
                )?,
            }
            Ok(sink.flush()?)
        }
        Command::Surface { common, resolution } => {
            let model = load_model(&common)?;
            let table = dispersion_surface(&model, resolution)?;
            let mut sink = open_sink(&common.output, stdout)?;
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => emit_band_csv(&table, &mut sink)?,
                Format::Json => write_json(
                    &mut sink,
                    &output::report(
                        "surface",
                        model.name(),
                        output::band_table_json(&table),
                        json!({ "negative_eigenvalue_relative": NEGATIVE_TOL }),
                    ),
                )?,
            }
            Ok(sink.flush()?)
        }
        Command::Gaps { common, resolution } => {
            let model = load_model(&common)?;
            let report = band_gaps(&model, resolution)?;
            let mut sink = open_sink(&common.output, stdout)?;
            match common.format.unwrap_or(Format::Json) {
                Format::Json => write_json(
                    &mut sink,
                    &output::report(
                        "gaps",
                        model.name(),
                        output::gaps_json(&report),
                        json!({ "resolution": resolution, "touching_relative": GAP_TOL }),
                    ),
                )?,
                Format::Csv => write_flat_csv(
                    &mut sink,
                    &[
                        "lower_band",
                        "upper_band",
                        "omega_low",
                        "omega_high",
                        "width",
                    ],
                    &report
                        .gaps
                        .iter()
                        .map(|g| {
                            vec![
                                g.lower.to_string(),
                                (g.lower + 1).to_string(),
                                num(g.low),
                                num(g.high),
                                num(g.width),
                            ]
                        })
                        .collect::<Vec<_>>(),
                )?,
            }
            Ok(sink.flush()?)
        }
        Command::Count {
            common,
            omega,
            path,
            samples,
        } => {
            if !(omega > 0.0 && omega.is_finite()) {
                return Err(CliError::Usage(format!(
                    "--omega must be positive, got {omega}"
                )));
            }
            let model = load_model(&common)?;
            let spec = parse_path(&path, samples)?;
            let count = count_wavevectors(&model, omega, &spec)?;
            let mut sink = open_sink(&common.output, stdout)?;
            match common.format.unwrap_or(Format::Json) {
                Format::Json => write_json(
                    &mut sink,
                    &output::report(
                        "count",
                        model.name(),
                        json!({ "omega": omega, "count": count }),
                        json!({ "samples_per_segment": samples }),
                    ),
                )?,
                Format::Csv => write_flat_csv(
                    &mut sink,
                    &["omega", "count"],
                    &[vec![num(omega), count.to_string()]],
                )?,
            }
            Ok(sink.flush()?)
        }
        Command::Extrema {
            common,
            band,
            resolution,
        } => {
            let model = load_model(&common)?;
            if band == 0 {
                return Err(CliError::Usage("--band counts from 1".into()));
            }
            let e = band_extrema(&model, band - 1, resolution)?;
            let mut sink = open_sink(&common.output, stdout)?;
            match common.format.unwrap_or(Format::Json) {
                Format::Json => write_json(
                    &mut sink,
                    &output::report(
                        "extrema",
                        model.name(),
                        output::extrema_json(&e),
                        json!({ "resolution": resolution }),
                    ),
                )?,
                Format::Csv => {
                    let join = |mu: &Wavevector| {
                        mu.components()
                            .iter()
                            .map(|&c| num(c))
                            .collect::<Vec<_>>()
                            .join(";")
                    };
                    write_flat_csv(
                        &mut sink,
                        &["band", "argmax", "max", "argmin", "min", "max_on_boundary"],
                        &[vec![
                            band.to_string(),
                            join(&e.argmax),
                            num(e.max),
                            join(&e.argmin),
                            num(e.min),
                            e.max_on_boundary.to_string(),
                        ]],
                    )?
                }
            }
            Ok(sink.flush()?)
        }
        Command::Verify { common, cells } => {
            let model = load_model(&common)?;
            let cells = parse_cells(&cells)?;
            let report = oracle_check(&model, &cells)?;
            let mut sink = open_sink(&common.output, stdout)?;
            match common.format.unwrap_or(Format::Json) {
                Format::Json => write_json(
                    &mut sink,
                    &output::report(
                        "verify",
                        model.name(),
                        output::oracle_json(&report),
                        json!({ "relative": ORACLE_TOL, "absolute": report.tolerance }),
                    ),
                )?,
                Format::Csv => write_flat_csv(
                    &mut sink,
                    &["cells", "dof", "deviation", "tolerance", "passed"],
                    &[vec![
                        report
                            .cells
                            .iter()
                            .map(|c| c.to_string())
                            .collect::<Vec<_>>()
                            .join(";"),
                        report.supercell.len().to_string(),
                        num(report.deviation),
                        num(report.tolerance),
                        report.passed.to_string(),
                    ]],
                )?,
            }
            sink.flush()?;
            if !report.passed {
                return Err(CliError::Failure(format!(
                    "supercell and Bloch spectra differ by {:e} (tolerance {:e})",
                    report.deviation, report.tolerance
                )));
            }
            Ok(())
        }
        Command::BuiltinList { format, output } => {
            let mut sink = open_sink(&output, stdout)?;
            let models: Vec<LatticeModel> = BUILTIN_NAMES
                .iter()
                .map(|n| latticeband_core::builtin(n))
                .collect::<Result<_, _>>()?;
            match format.unwrap_or(Format::Csv) {
                Format::Csv => write_flat_csv(
                    &mut sink,
                    &["name", "dimension", "nodes", "springs"],
                    &models
                        .iter()
                        .map(|m| {
                            vec![
                                m.name().to_string(),
                                m.dimension().to_string(),
                                m.node_count().to_string(),
                                m.springs().len().to_string(),
                            ]
                        })
                        .collect::<Vec<_>>(),
                )?,
                Format::Json => write_json(
                    &mut sink,
                    &Value::Array(
                        models
                            .iter()
                            .map(|m| serde_json::from_str(&m.to_json()).expect("valid JSON"))
                            .collect(),
                    ),
                )?,
            }
            Ok(sink.flush()?)
        }
    }
}
