//! Run configuration and artifact writers for the `chain-radiance` binary.
//!
//! Parameters come from flags and, optionally, a flat JSON file whose keys
//! mirror the long flag names. Flags win over file values. Everything is
//! validated into a [`RunConfig`] before any computation starts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use itertools::Itertools;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::decay::{self, DEFAULT_CENSUS_N_MAX, DEFAULT_CENSUS_N_MIN};
use crate::error::Error;
use crate::model::{self, ChainConfig, EigenLabel, DEFAULT_OMEGA0, DEFAULT_OMEGA_COUPLING};
use crate::oracle::{self, Status};
use crate::radiation::{self, AngularGrid, PatternSource};

/// Default output directory when `--out` is absent.
pub const OUT_DIR_ENV: &str = "CHAIN_RADIANCE_OUT";

pub const DEFAULT_KA: f64 = 0.0;
pub const DEFAULT_U: f64 = 1.0;
pub const DEFAULT_POINTS: usize = 361;
pub const DEFAULT_SCAN_KA_MIN: f64 = 0.0;
pub const DEFAULT_SCAN_KA_MAX: f64 = 10.0;
pub const DEFAULT_SCAN_KA_STEPS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Spectrum of a sector, or the amplitudes of one eigenstate with --g.
    Eigen,
    /// Compare the analytic sector against dense diagonalization.
    Verify,
    /// Structure factor of eigenstate g over emission angle.
    Pattern,
    /// Radiation pattern of a single excited atom j.
    PatternAtom,
    /// Total decay rates of all one-photon eigenstates.
    Decay,
    /// Subradiant counts over a range of N and their averaged gradient.
    Census,
    /// Subradiant fraction over a grid of ka values.
    Scan,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eigen => "eigen",
            Command::Verify => "verify",
            Command::Pattern => "pattern",
            Command::PatternAtom => "pattern-atom",
            Command::Decay => "decay",
            Command::Census => "census",
            Command::Scan => "scan",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Raw parameters as given by flags or the JSON config file.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Params {
    /// Number of atoms N.
    #[arg(long)]
    pub n: Option<usize>,
    /// Excitation sector M.
    #[arg(long)]
    pub m: Option<usize>,
    /// Eigenstate label(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub g: Option<Vec<usize>>,
    /// Excited atom index.
    #[arg(long)]
    pub j: Option<usize>,
    /// Photon wavenumber times atom spacing.
    #[arg(long)]
    pub ka: Option<f64>,
    /// Dipole projection on the chain axis, in [0, 1].
    #[arg(long)]
    pub u: Option<f64>,
    /// Atomic transition frequency (units of γ).
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Nearest-neighbour coupling (units of γ).
    #[arg(long)]
    pub omega_coupling: Option<f64>,
    /// Number of emission angles in [0, π].
    #[arg(long)]
    pub points: Option<usize>,
    /// Multiply patterns by the single-dipole angular factor.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dipole_weight: Option<bool>,
    /// Smallest chain length in a census (default 10).
    #[arg(long)]
    pub n_min: Option<usize>,
    /// Largest chain length in a census (default 100).
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Explicit ka values for `scan`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ka_grid: Option<Vec<f64>>,
    /// Uniform `scan` grid, used when --ka-grid is absent (default 0..10, 101 steps).
    #[arg(long)]
    pub ka_min: Option<f64>,
    #[arg(long)]
    pub ka_max: Option<f64>,
    #[arg(long)]
    pub ka_steps: Option<usize>,
    /// Output file; defaults to `<command>.<format>` in $CHAIN_RADIANCE_OUT or
    /// the working directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Params {
    /// Parse a flat JSON config document. Unknown keys are rejected.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::parse(format!("config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::parse(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Values set in `over` replace those in `self`.
    pub fn overridden_by(self, over: Params) -> Params {
        Params {
            n: over.n.or(self.n),
            m: over.m.or(self.m),
            g: over.g.or(self.g),
            j: over.j.or(self.j),
            ka: over.ka.or(self.ka),
            u: over.u.or(self.u),
            omega0: over.omega0.or(self.omega0),
            omega_coupling: over.omega_coupling.or(self.omega_coupling),
            points: over.points.or(self.points),
            dipole_weight: over.dipole_weight.or(self.dipole_weight),
            n_min: over.n_min.or(self.n_min),
            n_max: over.n_max.or(self.n_max),
            ka_grid: over.ka_grid.or(self.ka_grid),
            ka_min: over.ka_min.or(self.ka_min),
            ka_max: over.ka_max.or(self.ka_max),
            ka_steps: over.ka_steps.or(self.ka_steps),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Parse,
    Validation,
    Computation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn parse(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Parse,
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Validation,
            message: message.into(),
        }
    }

    pub fn computation(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Computation,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Parse => 2,
            ErrorKind::Validation => 3,
            ErrorKind::Computation => 4,
        }
    }

    /// Single-line JSON for stderr.
    pub fn to_json(&self) -> String {
        json!({
            "status": "error",
            "kind": self.kind,
            "exit_code": self.exit_code(),
            "message": self.message,
        })
        .to_string()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. }
            | Error::SectorMismatch { .. }
            | Error::SectorTooLarge { .. } => CliError::validation(e.to_string()),
            Error::Eigensolver { .. } | Error::Quadrature { .. } => {
                CliError::computation(e.to_string())
            }
        }
    }
}

/// Command-specific validated parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Task {
    Spectrum {
        m: usize,
    },
    State {
        label: EigenLabel,
    },
    Verify {
        m: usize,
    },
    Pattern {
        source: PatternSource,
        points: usize,
        dipole_weight: bool,
    },
    Decay,
    Census {
        n_min: usize,
        n_max: usize,
    },
    Scan {
        ka_grid: Vec<f64>,
        n_min: usize,
        n_max: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub chain: ChainConfig,
    pub task: Task,
    pub output: PathBuf,
    pub format: Format,
}

fn require<T>(value: Option<T>, name: &str, command: Command) -> Result<T, CliError> {
    value.ok_or_else(|| {
        CliError::validation(format!(
            "missing parameter `{name}` for command `{}`",
            command.name()
        ))
    })
}

impl RunConfig {
    pub fn from_params(command: Command, p: Params) -> Result<Self, CliError> {
        let chain_n = match command {
            Command::Census | Command::Scan => 1,
            _ => require(p.n, "n", command)?,
        };
        let chain = ChainConfig::new(
            chain_n,
            p.ka.unwrap_or(DEFAULT_KA),
            p.u.unwrap_or(DEFAULT_U),
        )?
        .with_frequencies(
            p.omega0.unwrap_or(DEFAULT_OMEGA0),
            p.omega_coupling.unwrap_or(DEFAULT_OMEGA_COUPLING),
        )?;

        let single_g = |p: &Params| -> Result<usize, CliError> {
            match require(p.g.clone(), "g", command)?.as_slice() {
                [g] => Ok(*g),
                other => Err(CliError::validation(format!(
                    "invalid parameter `g`: command `{}` takes one value, got {other:?}",
                    command.name()
                ))),
            }
        };
        let census_range = |p: &Params| -> Result<(usize, usize), CliError> {
            let n_min = p.n_min.unwrap_or(DEFAULT_CENSUS_N_MIN);
            let n_max = p.n_max.unwrap_or(DEFAULT_CENSUS_N_MAX);
            if n_min == 0 {
                return Err(CliError::validation(
                    "invalid parameter `n-min`: must be at least 1",
                ));
            }
            if n_max < n_min {
                return Err(CliError::validation(format!(
                    "invalid parameter `n-max`: must be >= n-min ({n_min}), got {n_max}"
                )));
            }
            Ok((n_min, n_max))
        };
        let points = |p: &Params| -> Result<usize, CliError> {
            let points = p.points.unwrap_or(DEFAULT_POINTS);
            AngularGrid::uniform(points)?;
            Ok(points)
        };

        let task = match command {
            Command::Eigen => {
                let m = match (&p.m, &p.g) {
                    (Some(m), _) => *m,
                    (None, Some(g)) => g.len(),
                    (None, None) => 1,
                };
                match &p.g {
                    Some(g) => {
                        let label = EigenLabel::new(g.clone())?;
                        if label.m() != m {
                            return Err(CliError::validation(format!(
                                "invalid parameter `g`: {} values given for sector m = {m}",
                                label.m()
                            )));
                        }
                        label.validate(&chain)?;
                        model::sector_dimension(chain_n, m)?;
                        Task::State { label }
                    }
                    None => {
                        model::sector_dimension(chain_n, m)?;
                        Task::Spectrum { m }
                    }
                }
            }
            Command::Verify => {
                let m = require(p.m, "m", command)?;
                model::sector_dimension(chain_n, m)?;
                Task::Verify { m }
            }
            Command::Pattern => {
                let g = single_g(&p)?;
                chain.check_index("g", g)?;
                Task::Pattern {
                    source: PatternSource::Eigen(g),
                    points: points(&p)?,
                    dipole_weight: p.dipole_weight.unwrap_or(false),
                }
            }
            Command::PatternAtom => {
                let j = require(p.j, "j", command)?;
                chain.check_index("j", j)?;
                Task::Pattern {
                    source: PatternSource::Atom(j),
                    points: points(&p)?,
                    dipole_weight: p.dipole_weight.unwrap_or(false),
                }
            }
            Command::Decay => Task::Decay,
            Command::Census => {
                let (n_min, n_max) = census_range(&p)?;
                Task::Census { n_min, n_max }
            }
            Command::Scan => {
                let (n_min, n_max) = census_range(&p)?;
                let ka_grid = match &p.ka_grid {
                    Some(grid) => grid.clone(),
                    None => {
                        let lo = p.ka_min.unwrap_or(DEFAULT_SCAN_KA_MIN);
                        let hi = p.ka_max.unwrap_or(DEFAULT_SCAN_KA_MAX);
                        let steps = p.ka_steps.unwrap_or(DEFAULT_SCAN_KA_STEPS);
                        if steps == 0 {
                            return Err(CliError::validation(
                                "invalid parameter `ka-steps`: must be at least 1",
                            ));
                        }
                        if !(hi >= lo) {
                            return Err(CliError::validation(format!(
                                "invalid parameter `ka-max`: must be >= ka-min ({lo}), got {hi}"
                            )));
                        }
                        linspace(lo, hi, steps)
                    }
                };
                if ka_grid.is_empty() {
                    return Err(CliError::validation("invalid parameter `ka-grid`: empty"));
                }
                for &ka in &ka_grid {
                    chain.with_ka(ka).map_err(|_| {
                        CliError::validation(format!(
                            "invalid parameter `ka-grid`: values must be finite and >= 0, got {ka}"
                        ))
                    })?;
                }
                Task::Scan {
                    ka_grid,
                    n_min,
                    n_max,
                }
            }
        };

        let format = p.format.unwrap_or_default();
        let output = match p.out {
            Some(path) => path,
            None => {
                let dir = std::env::var_os(OUT_DIR_ENV)
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from("."));
                dir.join(format!("{}.{}", command.name(), format.extension()))
            }
        };
        Ok(RunConfig {
            command,
            chain,
            task,
            output,
            format,
        })
    }
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (steps - 1) as f64;
    let mut v: Vec<f64> = (0..steps).map(|i| lo + i as f64 * step).collect();
    v[steps - 1] = hi;
    v
}

/// Shortest decimal that round-trips to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Artifacts produced by one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    /// `false` when the command ran but its checks failed (oracle mismatch).
    pub passed: bool,
}

struct Artifact {
    params: serde_json::Value,
    results: serde_json::Value,
    status: &'static str,
    csv_header: Vec<String>,
    csv_rows: Vec<String>,
    /// CSV runs also write the JSON document next to the table.
    csv_summary: bool,
}

fn chain_params(cfg: &ChainConfig) -> serde_json::Value {
    json!({
        "n": cfg.n_atoms(),
        "ka": cfg.ka(),
        "u": cfg.mu_dot_a(),
        "omega0": cfg.omega0(),
        "omega_coupling": cfg.omega_coupling(),
    })
}

fn comment(items: &[(&str, String)]) -> String {
    format!(
        "# {}",
        items.iter().map(|(k, v)| format!("{k}={v}")).join(" ")
    )
}

fn build(config: &RunConfig) -> Result<Artifact, CliError> {
    let cfg = &config.chain;
    let n = cfg.n_atoms();
    let artifact = match &config.task {
        Task::Spectrum { m } => {
            let labels = model::sector_labels(n, *m)?;
            let mut rows = Vec::with_capacity(labels.len());
            let mut results = Vec::with_capacity(labels.len());
            for label in &labels {
                let e = model::eigenvalue(cfg, label)?;
                let parity = model::reflection_parity(label);
                rows.push(format!(
                    "{},{},{}",
                    label.g().iter().join(" "),
                    fmt_f64(e),
                    parity
                ));
                results.push(json!({ "g": label.g(), "energy": e, "parity": parity }));
            }
            Artifact {
                params: json!({ "chain": chain_params(cfg), "m": m }),
                results: json!(results),
                status: "ok",
                csv_header: vec![
                    comment(&[
                        ("n", n.to_string()),
                        ("m", m.to_string()),
                        ("omega0", fmt_f64(cfg.omega0())),
                        ("omega_coupling", fmt_f64(cfg.omega_coupling())),
                    ]),
                    "g,energy,parity".into(),
                ],
                csv_rows: rows,
                csv_summary: false,
            }
        }
        Task::State { label } => {
            let state = model::expand_state(cfg, label)?;
            let energy = model::eigenvalue(cfg, label)?;
            let parity = model::reflection_parity(label);
            let rows = state
                .iter()
                .map(|(k, a)| format!("{},{}", k.k().iter().join(" "), fmt_f64(*a)))
                .collect();
            let amplitudes: Vec<_> = state
                .iter()
                .map(|(k, a)| json!({ "k": k.k(), "amplitude": a }))
                .collect();
            Artifact {
                params: json!({ "chain": chain_params(cfg), "g": label.g() }),
                results: json!({ "energy": energy, "parity": parity, "amplitudes": amplitudes }),
                status: "ok",
                csv_header: vec![
                    comment(&[
                        ("n", n.to_string()),
                        ("g", label.g().iter().join(" ")),
                        ("energy", fmt_f64(energy)),
                        ("parity", parity.to_string()),
                    ]),
                    "k,amplitude".into(),
                ],
                csv_rows: rows,
                csv_summary: false,
            }
        }
        Task::Verify { m } => {
            let report = oracle::verify_analytic(cfg, *m)?;
            let status = match report.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
            };
            let row = format!(
                "{},{},{},{},{},{},{}",
                report.n,
                report.m,
                report.dimension,
                fmt_f64(report.max_eigenvalue_residual),
                fmt_f64(report.max_vector_residual),
                fmt_f64(report.max_projector_residual),
                status
            );
            Artifact {
                params: json!({ "chain": chain_params(cfg), "m": m }),
                results: serde_json::to_value(&report).expect("report serializes"),
                status,
                csv_header: vec![
                    comment(&[("n", n.to_string()), ("m", m.to_string())]),
                    "n,m,dimension,max_eigenvalue_residual,max_vector_residual,max_projector_residual,status"
                        .into(),
                ],
                csv_rows: vec![row],
                csv_summary: false,
            }
        }
        Task::Pattern {
            source,
            points,
            dipole_weight,
        } => {
            let grid = AngularGrid::uniform(*points)?;
            let samples = radiation::pattern_scan(cfg, *source, &grid, *dipole_weight)?;
            let (key, index) = match source {
                PatternSource::Eigen(g) => ("g", *g),
                PatternSource::Atom(j) => ("j", *j),
            };
            Artifact {
                params: json!({
                    "chain": chain_params(cfg),
                    key: index,
                    "points": points,
                    "dipole_weight": dipole_weight,
                }),
                results: json!(samples),
                status: "ok",
                csv_header: vec![
                    comment(&[
                        ("n", n.to_string()),
                        (key, index.to_string()),
                        ("ka", fmt_f64(cfg.ka())),
                        ("u", fmt_f64(cfg.mu_dot_a())),
                        ("dipole_weight", dipole_weight.to_string()),
                    ]),
                    "theta,value".into(),
                ],
                csv_rows: samples
                    .iter()
                    .map(|s| format!("{},{}", fmt_f64(s.theta), fmt_f64(s.value)))
                    .collect(),
                csv_summary: false,
            }
        }
        Task::Decay => {
            let table = decay::decay_table(cfg);
            let rows = table
                .rates
                .iter()
                .zip(&table.classes)
                .enumerate()
                .map(|(i, (r, c))| format!("{},{},{}", i + 1, fmt_f64(*r), c))
                .collect();
            let results: Vec<_> = table
                .rates
                .iter()
                .zip(&table.classes)
                .enumerate()
                .map(|(i, (r, c))| json!({ "g": i + 1, "rate": r, "class": c }))
                .collect();
            Artifact {
                params: json!({ "chain": chain_params(cfg) }),
                results: json!({ "rates": results, "subradiant_count": table.subradiant_count() }),
                status: "ok",
                csv_header: vec![
                    comment(&[
                        ("n", n.to_string()),
                        ("ka", fmt_f64(cfg.ka())),
                        ("u", fmt_f64(cfg.mu_dot_a())),
                    ]),
                    "g,rate,class".into(),
                ],
                csv_rows: rows,
                csv_summary: false,
            }
        }
        Task::Census { n_min, n_max } => {
            let series = decay::subradiant_census(cfg, *n_min, *n_max)?;
            Artifact {
                params: json!({
                    "ka": cfg.ka(),
                    "u": cfg.mu_dot_a(),
                    "n_min": n_min,
                    "n_max": n_max,
                }),
                results: json!({ "entries": series.entries, "gradient": series.gradient }),
                status: "ok",
                csv_header: vec![
                    comment(&[
                        ("ka", fmt_f64(cfg.ka())),
                        ("u", fmt_f64(cfg.mu_dot_a())),
                        ("n_min", n_min.to_string()),
                        ("n_max", n_max.to_string()),
                        ("gradient", fmt_f64(series.gradient)),
                    ]),
                    "n,count".into(),
                ],
                csv_rows: series
                    .entries
                    .iter()
                    .map(|e| format!("{},{}", e.n, e.count))
                    .collect(),
                csv_summary: true,
            }
        }
        Task::Scan {
            ka_grid,
            n_min,
            n_max,
        } => {
            let points = decay::fraction_scan(cfg, ka_grid, *n_min, *n_max)?;
            Artifact {
                params: json!({
                    "u": cfg.mu_dot_a(),
                    "n_min": n_min,
                    "n_max": n_max,
                    "ka_grid": ka_grid,
                }),
                results: json!(points),
                status: "ok",
                csv_header: vec![
                    comment(&[
                        ("u", fmt_f64(cfg.mu_dot_a())),
                        ("n_min", n_min.to_string()),
                        ("n_max", n_max.to_string()),
                    ]),
                    "ka,fraction".into(),
                ],
                csv_rows: points
                    .iter()
                    .map(|p| format!("{},{}", fmt_f64(p.ka), fmt_f64(p.fraction)))
                    .collect(),
                csv_summary: true,
            }
        }
    };
    Ok(artifact)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::computation(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents)
        .map_err(|e| CliError::computation(format!("cannot write {}: {e}", path.display())))
}

/// Execute a validated configuration and write its artifacts.
pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    let artifact = build(config)?;
    let document = json!({
        "command": config.command.name(),
        "params": artifact.params,
        "results": artifact.results,
        "status": artifact.status,
    });
    let json_text = serde_json::to_string_pretty(&document).expect("document serializes") + "\n";

    let mut files = Vec::new();
    match config.format {
        Format::Json => {
            write_file(&config.output, &json_text)?;
            files.push(config.output.clone());
        }
        Format::Csv => {
            let mut csv = String::new();
            for line in artifact.csv_header.iter().chain(&artifact.csv_rows) {
                writeln!(csv, "{line}").expect("string write");
            }
            write_file(&config.output, &csv)?;
            files.push(config.output.clone());
            if artifact.csv_summary {
                let summary = config.output.with_extension("json");
                write_file(&summary, &json_text)?;
                files.push(summary);
            }
        }
    }
    Ok(RunOutcome {
        files,
        passed: artifact.status != "fail",
    })
}
