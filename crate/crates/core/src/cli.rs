//! Command-line front end.
//!
//! `run` parses arguments, evaluates one subcommand and returns the document
//! to print together with the process exit status:
//!
//! * `0` on success,
//! * `1` when the computation fails (domain, range, stability, indefinite
//!   metric, convergence) or a verification report fails,
//! * `2` when the input is malformed.
//!
//! Failures are reported as `{"error": {"code": …, "message": …}}` on
//! standard output plus a one-line diagnostic on standard error.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::eos::{ConstantCvEos, EosDocumentError, ThermoState};
use crate::error::Error;
use crate::format::{sig17, to_json};
use crate::geometry::{
    metric_coefficient_form, metric_hessian, path_length, response_coefficients, PathDocument,
    DEFAULT_REL_TOL,
};
use crate::isochoric::{
    heat_from_length, isochoric_heat, isochoric_length, length_from_heat, HeatFlow,
    IsochoricProcess, ProcessDocument, ProcessStart,
};
use crate::verify::{run_suite, GridSpec, Tolerances, VerificationReport};

#[derive(Debug, Parser)]
#[command(
    name = "thermo-length",
    version,
    about = "Weinhold metric and thermodynamic length for constant-c_v fluids"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weinhold metric and response coefficients at one state
    Metric(MetricArgs),
    /// Thermodynamic length of a path by adaptive quadrature
    Length(LengthArgs),
    /// Closed-form isochoric length and heat
    Isochoric(IsochoricArgs),
    /// Heat from length, or length from heat, for an isochore starting at s0
    Heat(HeatArgs),
    /// Check every identity on a grid of states
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
pub struct Common {
    /// EOS document (file, or inline JSON)
    #[arg(long, value_name = "FILE")]
    pub eos: String,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Write the document here instead of standard output
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    #[command(flatten)]
    pub common: Common,
    /// State as JSON, e.g. '{"s":0,"v":1}'
    #[arg(long, value_name = "JSON")]
    pub state: String,
}

#[derive(Debug, Args)]
pub struct LengthArgs {
    #[command(flatten)]
    pub common: Common,
    /// Path document (file, or inline JSON)
    #[arg(long, value_name = "FILE|JSON")]
    pub path: String,
    /// Overrides the path document's rel_tol
    #[arg(long, value_name = "FLOAT")]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IsochoricArgs {
    #[command(flatten)]
    pub common: Common,
    /// Process as JSON: {"v","s1","s2"} or {"v","T1","T2"}
    #[arg(long, value_name = "JSON")]
    pub process: String,
    /// Sweep the end temperature, MIN:MAX:COUNT; the process supplies v and
    /// the start (s1 or T1)
    #[arg(long, value_name = "SPEC")]
    pub sweep: Option<String>,
}

#[derive(Debug, Args)]
pub struct HeatArgs {
    #[command(flatten)]
    pub common: Common,
    /// {"v", "length"} for the heat, or {"v", "q"} for the length
    #[arg(long, value_name = "JSON")]
    pub process: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Grid document (file, or inline JSON)
    #[arg(long, value_name = "FILE")]
    pub grid: String,
}

/// What a finished invocation produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Compute(Error),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Compute(Error::InvalidParameter(_)) => 2,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }

    fn code(&self) -> &'static str {
        match self {
            CliError::Input(_) => "INVALID_INPUT",
            CliError::Compute(e) => e.code(),
            CliError::Io(_) => "IO_ERROR",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Input(m) | CliError::Io(m) => m.clone(),
            CliError::Compute(e) => e.to_string(),
        }
    }

    fn document(&self) -> String {
        let mut error = serde_json::Map::new();
        error.insert("code".into(), self.code().into());
        error.insert("message".into(), self.message().into());
        if let CliError::Compute(e) = self {
            if let Some((s, v)) = e.state() {
                error.insert("state".into(), serde_json::json!({ "s": s, "v": v }));
            }
            if let Error::Domain { v, .. } = e {
                error.insert("v".into(), serde_json::json!(v));
            }
        }
        to_json(&serde_json::json!({ "error": error }))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<EosDocumentError> for CliError {
    fn from(e: EosDocumentError) -> Self {
        match e {
            EosDocumentError::Invalid(inner) => CliError::Compute(inner),
            other => CliError::Input(other.to_string()),
        }
    }
}

/// One cell of a flat output record.
#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Null,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => sig17(*x),
            Cell::Num(_) | Cell::Null => String::new(),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Null, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

/// Ordered key/value record; JSON object or one CSV row.
#[derive(Debug, Clone, Default)]
struct Record(Vec<(&'static str, Cell)>);

impl Record {
    fn with(mut self, key: &'static str, cell: impl Into<Cell>) -> Self {
        self.0.push((key, cell.into()));
        self
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (key, cell) in &self.0 {
            match cell {
                Cell::Num(x) => map.serialize_entry(key, x)?,
                Cell::Int(n) => map.serialize_entry(key, n)?,
                Cell::Bool(b) => map.serialize_entry(key, b)?,
                Cell::Null => map.serialize_entry(key, &())?,
            }
        }
        map.end()
    }
}

fn records_to_csv(records: &[Record]) -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    if let Some(first) = records.first() {
        writer
            .write_record(first.0.iter().map(|(k, _)| *k))
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    for record in records {
        writer
            .write_record(record.0.iter().map(|(_, c)| c.csv()))
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn records_to_text(records: &[Record]) -> String {
    let width = records
        .iter()
        .flat_map(|r| r.0.iter().map(|(k, _)| k.len()))
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    for (i, record) in records.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for (key, cell) in &record.0 {
            let value = match cell {
                Cell::Null => "-".to_string(),
                other => other.csv(),
            };
            out.push_str(&format!("{key:<width$}  {value}\n"));
        }
    }
    out
}

enum Document {
    Single(Record),
    Rows(Vec<Record>),
    Report(VerificationReport),
}

fn render(doc: &Document, format: OutputFormat) -> Result<String, CliError> {
    match (doc, format) {
        (Document::Single(r), OutputFormat::Json) => Ok(to_json(r)),
        (Document::Rows(rows), OutputFormat::Json) => Ok(to_json(rows)),
        (Document::Report(report), OutputFormat::Json) => Ok(to_json(report)),
        (Document::Single(r), OutputFormat::Csv) => records_to_csv(std::slice::from_ref(r)),
        (Document::Rows(rows), OutputFormat::Csv) => records_to_csv(rows),
        (Document::Report(report), OutputFormat::Csv) => report_csv(report),
        (Document::Single(r), OutputFormat::Text) => Ok(records_to_text(std::slice::from_ref(r))),
        (Document::Rows(rows), OutputFormat::Text) => Ok(records_to_text(rows)),
        (Document::Report(report), OutputFormat::Text) => Ok(report.to_text()),
    }
}

fn report_rows(report: &VerificationReport) -> Vec<Record> {
    report
        .records
        .iter()
        .map(|r| {
            Record::default()
                .with("samples", r.samples)
                .with("skipped", r.skipped)
                .with("max_residual", r.max_residual)
                .with("tolerance", r.tolerance)
                .with("pass", r.pass)
                .with(
                    "indefinite_states",
                    r.indefinite_states.as_ref().map_or(0, Vec::len),
                )
        })
        .collect()
}

fn report_csv(report: &VerificationReport) -> Result<String, CliError> {
    let rows = report_rows(report);
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let mut header = vec!["check_id"];
    if let Some(first) = rows.first() {
        header.extend(first.0.iter().map(|(k, _)| *k));
    }
    writer.write_record(&header).map_err(io)?;
    for (record, row) in report.records.iter().zip(&rows) {
        let mut fields = vec![record.check_id.clone()];
        fields.extend(row.0.iter().map(|(_, c)| c.csv()));
        writer.write_record(&fields).map_err(io)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

/// Reads `arg` as inline JSON when it starts with `{`, else as a file path.
fn load_json_arg(arg: &str, what: &str) -> Result<String, CliError> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        fs::read_to_string(arg)
            .map_err(|e| CliError::Input(format!("cannot read {what} file `{arg}`: {e}")))
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed {what}: {e}")))
}

fn load_eos(arg: &str) -> Result<ConstantCvEos, CliError> {
    let text = load_json_arg(arg, "EOS")?;
    Ok(ConstantCvEos::from_json(&text)?)
}

fn metric_command(args: &MetricArgs) -> Result<Document, CliError> {
    let eos = load_eos(&args.common.eos)?;
    let st: ThermoState = parse_json(&args.state, "state")?;
    let hessian = metric_hessian(&eos, st)?;
    let (stable, response, form_gap) = match response_coefficients(&eos, st) {
        Ok(rc) => {
            let coefficient = metric_coefficient_form(&eos, st)?;
            (
                true,
                Some(rc),
                Some(hessian.max_relative_difference(&coefficient)),
            )
        }
        Err(Error::Stability { .. }) => (false, None, None),
        Err(e) => return Err(e.into()),
    };
    Ok(Document::Single(
        Record::default()
            .with("s", st.s)
            .with("v", st.v)
            .with("temperature", eos.temperature(st)?)
            .with("internal_energy", eos.internal_energy(st)?)
            .with("pressure", eos.pressure(st)?)
            .with("eta11", hessian.eta11)
            .with("eta12", hessian.eta12)
            .with("eta22", hessian.eta22)
            .with("determinant", hessian.determinant())
            .with("positive_semidefinite", hessian.is_positive_semidefinite())
            .with("stable", stable)
            .with("cp", response.map(|r| r.cp))
            .with("alpha", response.map(|r| r.alpha))
            .with("kappa_t", response.map(|r| r.kappa_t))
            .with("coefficient_form_rel_diff", form_gap),
    ))
}

fn length_command(args: &LengthArgs) -> Result<Document, CliError> {
    let eos = load_eos(&args.common.eos)?;
    let doc: PathDocument = parse_json(&load_json_arg(&args.path, "path")?, "path")?;
    let rel_tol = args.rel_tol.or(doc.rel_tol()).unwrap_or(DEFAULT_REL_TOL);
    if !(rel_tol > 0.0) {
        return Err(CliError::Input(format!(
            "rel_tol must be positive, got {rel_tol}"
        )));
    }
    let path = doc.to_path()?;
    let result = path_length(&eos, &path, rel_tol)?;
    Ok(Document::Single(
        Record::default()
            .with("length", result.length)
            .with("abs_error_estimate", result.abs_error_estimate)
            .with("rel_tol", rel_tol)
            .with("subdivisions", result.subdivisions)
            .with("evaluations", result.evaluations),
    ))
}

fn isochoric_record(eos: &ConstantCvEos, process: &IsochoricProcess) -> Result<Record, CliError> {
    let (t1, t2) = process.temperatures(eos)?;
    Ok(Record::default()
        .with("v", process.v())
        .with("s1", process.s1())
        .with("s2", process.s2())
        .with("T1", t1)
        .with("T2", t2)
        .with("length", isochoric_length(eos, process)?)
        .with("q", isochoric_heat(eos, process)?.q))
}

/// `MIN:MAX:COUNT`, inclusive.
fn parse_sweep(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Input(format!("sweep must look like MIN:MAX:COUNT, got `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if !lo.is_finite() || !hi.is_finite() || n == 0 {
        return Err(bad());
    }
    Ok((0..n)
        .map(|i| {
            if n == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect())
}

fn isochoric_command(args: &IsochoricArgs) -> Result<Document, CliError> {
    let eos = load_eos(&args.common.eos)?;
    let doc: ProcessDocument = parse_json(&load_json_arg(&args.process, "process")?, "process")?;
    let Some(sweep) = &args.sweep else {
        let process = doc.to_process(&eos)?;
        return Ok(Document::Single(isochoric_record(&eos, &process)?));
    };
    let end_temperatures = parse_sweep(sweep)?;
    let t1 = match doc.start()? {
        ProcessStart::Temperature(t1) => t1,
        ProcessStart::Entropy(s1) => eos.temperature(ThermoState::new(s1, doc.v))?,
    };
    let rows = end_temperatures
        .iter()
        .map(|&t2| {
            let process = IsochoricProcess::from_temperatures(&eos, doc.v, t1, t2)?;
            Ok(Record::default()
                .with("T2", t2)
                .with("s2", process.s2())
                .with("length", isochoric_length(&eos, &process)?)
                .with("q", isochoric_heat(&eos, &process)?.q))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Document::Rows(rows))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeatQuery {
    v: f64,
    #[serde(default)]
    length: Option<f64>,
    #[serde(default)]
    q: Option<f64>,
}

fn heat_command(args: &HeatArgs) -> Result<Document, CliError> {
    let eos = load_eos(&args.common.eos)?;
    let query: HeatQuery = parse_json(&load_json_arg(&args.process, "process")?, "process")?;
    let (length, q) = match (query.length, query.q) {
        (Some(length), None) => (length, heat_from_length(&eos, query.v, length)?.q),
        (None, Some(q)) => (length_from_heat(&eos, query.v, HeatFlow::new(q))?, q),
        _ => {
            return Err(CliError::Input(
                "heat needs exactly one of `length` or `q`".into(),
            ))
        }
    };
    Ok(Document::Single(
        Record::default()
            .with("v", query.v)
            .with("length", length)
            .with("q", q),
    ))
}

fn verify_command(args: &VerifyArgs) -> Result<Document, CliError> {
    let eos = load_eos(&args.common.eos)?;
    let grid: GridSpec = parse_json(&load_json_arg(&args.grid, "grid")?, "grid")?;
    Ok(Document::Report(run_suite(
        &eos,
        &grid,
        &Tolerances::default(),
    )?))
}

fn execute(command: &Command) -> Result<(String, Option<PathBuf>, bool), CliError> {
    let (doc, common, default_format) = match command {
        Command::Metric(a) => (metric_command(a)?, &a.common, OutputFormat::Json),
        Command::Length(a) => (length_command(a)?, &a.common, OutputFormat::Json),
        Command::Isochoric(a) => {
            let default = if a.sweep.is_some() {
                OutputFormat::Csv
            } else {
                OutputFormat::Json
            };
            (isochoric_command(a)?, &a.common, default)
        }
        Command::Heat(a) => (heat_command(a)?, &a.common, OutputFormat::Json),
        Command::Verify(a) => (verify_command(a)?, &a.common, OutputFormat::Json),
    };
    let format = common.format.unwrap_or(default_format);
    let passed = match &doc {
        Document::Report(report) => report.pass,
        _ => true,
    };
    let text = render(&doc, format)?;
    Ok((text, common.out.clone(), passed))
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    exit_code: 0,
                    stdout: rendered,
                    stderr: String::new(),
                },
                _ => {
                    let err = CliError::Input(rendered.trim().to_string());
                    Outcome {
                        exit_code: 2,
                        stdout: err.document(),
                        stderr: rendered,
                    }
                }
            };
        }
    };

    let failure = |err: CliError| Outcome {
        exit_code: err.exit_code(),
        stdout: err.document(),
        stderr: format!("error [{}]: {}\n", err.code(), err.message()),
    };

    match execute(&cli.command) {
        Ok((text, out, passed)) => {
            let stderr = if passed {
                String::new()
            } else {
                "verification failed: at least one check exceeded its tolerance\n".to_string()
            };
            let exit_code = if passed { 0 } else { 1 };
            match out {
                Some(path) => match fs::write(&path, &text) {
                    Ok(()) => Outcome {
                        exit_code,
                        stdout: String::new(),
                        stderr,
                    },
                    Err(e) => failure(CliError::Io(format!(
                        "cannot write `{}`: {e}",
                        path.display()
                    ))),
                },
                None => Outcome {
                    exit_code,
                    stdout: text,
                    stderr,
                },
            }
        }
        Err(err) => failure(err),
    }
}
