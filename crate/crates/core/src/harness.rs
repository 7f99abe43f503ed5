//! Experiment driver behind the `spapt` binary: state files, channel
//! application, detection pipelines, the Bell-state eigenvalue table, the
//! state-family sweep and the self-test suites.
//!
//! Every command returns a [`Report`]: a rectangular table plus the
//! [`RunConfig`] that produced it. Reports render to JSON or CSV with all
//! floating-point values rounded to 12 significant digits, so both encodings
//! carry identical numbers.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::channels::{self, QuantumChannel, SPA_PT_SCALE, SPA_PT_THRESHOLD};
use crate::detection::{self, Evidence, Method, Verdict};
use crate::error::{Error, Result};
use crate::qmath::{self, ComplexMatrix};
use crate::states::{self, BellKind, DensityMatrix, PureState};
use crate::tomography::{self, PauliExpectations, ShotConfig, DEFAULT_SEED, DEFAULT_SHOTS};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SIGNIFICANT_DIGITS: usize = 12;
/// Points on the Werner and MEMS curves of the sweep, `p = 0, 0.05, …, 1`.
pub const CURVE_POINTS: usize = 21;
/// Tangle above this counts as entangled in the sweep.
pub const TANGLE_TOL: f64 = 1e-12;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    let s = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    s.parse().unwrap_or(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::InvalidInput(format!("unknown format '{other}'"))),
        }
    }
}

/// Parameters of one run, echoed into every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    /// Command-specific arguments in the order given.
    pub params: Vec<String>,
    pub shots_per_setting: u64,
    pub seed: u64,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub version: String,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            params: Vec::new(),
            shots_per_setting: DEFAULT_SHOTS,
            seed: DEFAULT_SEED,
            format: OutputFormat::Json,
            out: None,
            version: VERSION.to_string(),
        }
    }

    pub fn with_shots(mut self, shots: u64) -> Self {
        self.shots_per_setting = shots;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_params<S: AsRef<str>>(mut self, params: &[S]) -> Self {
        self.params = params.iter().map(|s| s.as_ref().to_string()).collect();
        self
    }

    pub fn shot_config(&self) -> Result<ShotConfig> {
        ShotConfig::new(self.shots_per_setting, self.seed)
    }

    /// Shot config for sub-task `index`, with a seed derived from the root.
    pub fn child(&self, index: u64) -> Result<ShotConfig> {
        ShotConfig::new(
            self.shots_per_setting,
            tomography::derive_seed(self.seed, index),
        )
    }
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(n) => Some(*n as f64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        use serde_json::Value;
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(round_sig(*x))
                .map(Value::Number)
                .unwrap_or(Value::Null),
            Cell::Int(n) => Value::from(*n),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{}", round_sig(*x)),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Tabular command output together with the config that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub config: RunConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(config: RunConfig, columns: &[&str]) -> Self {
        Self {
            config,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cell at `row` in column `name`.
    pub fn get(&self, row: usize, name: &str) -> Option<&Cell> {
        self.rows.get(row)?.get(self.column(name)?)
    }

    pub fn f64_at(&self, row: usize, name: &str) -> Option<f64> {
        self.get(row, name)?.as_f64()
    }

    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(r.iter().map(Cell::to_json))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        let doc = serde_json::json!({
            "config": self.config,
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Header row, LF line endings. Seed, shots and version are appended to
    /// every row unless the report already has such a column.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        let extras: Vec<(&str, String)> = [
            ("seed", self.config.seed.to_string()),
            (
                "shots_per_setting",
                self.config.shots_per_setting.to_string(),
            ),
            ("version", self.config.version.clone()),
        ]
        .into_iter()
        .filter(|(k, _)| self.column(k).is_none())
        .collect();
        let mut header = self.columns.clone();
        header.extend(extras.iter().map(|(k, _)| k.to_string()));
        w.write_record(&header).map_err(io)?;
        for row in &self.rows {
            let mut rec: Vec<String> = row.iter().map(Cell::to_csv).collect();
            rec.extend(extras.iter().map(|(_, v)| v.clone()));
            w.write_record(&rec).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }
}

/// Writes `text` to `path`, or to standard output when `path` is `None`.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// On-disk density matrix: real and imaginary parts as row-major arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix, metadata: BTreeMap<String, String>) -> Self {
        let d = rho.dim();
        let m = rho.matrix();
        let part = |f: fn(&qmath::C64) -> f64| -> Vec<Vec<f64>> {
            (0..d)
                .map(|i| (0..d).map(|j| round_sig(f(&m[(i, j)]))).collect())
                .collect()
        };
        Self {
            dim: d,
            re: part(|z| z.re),
            im: part(|z| z.im),
            metadata,
        }
    }

    /// Shape checks, then full density-matrix validation. Diagnostics name
    /// the violated invariant.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::Validation("state file: dim must be positive".into()));
        }
        for (name, part) in [("re", &self.re), ("im", &self.im)] {
            if part.len() != d || part.iter().any(|row| row.len() != d) {
                return Err(Error::Validation(format!(
                    "state file: '{name}' must be a {d}x{d} array"
                )));
            }
            if part.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!(
                    "state file: '{name}' has non-finite entries"
                )));
            }
        }
        let re_flat: Vec<f64> = self.re.iter().flatten().copied().collect();
        let im_flat: Vec<f64> = self.im.iter().flatten().copied().collect();
        let m = ComplexMatrix::from_parts(d, &re_flat, &im_flat)?;
        DensityMatrix::new(m).map_err(|e| Error::Validation(format!("state file: {e}")))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("state file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        emit(&self.to_json()?, Some(path))
    }
}

/// Loads a state file and validates it as a density matrix.
pub fn load_state(path: &Path) -> Result<DensityMatrix> {
    StateFile::load(path)?.to_density()
}

/// Splits `key=value` tokens; bare tokens land under the empty key.
fn parse_params(params: &[String]) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for p in params {
        let (k, v) = match p.split_once('=') {
            Some((k, v)) => (k.trim().to_ascii_lowercase(), v.trim().to_string()),
            None => (String::new(), p.trim().to_string()),
        };
        if map.insert(k.clone(), v).is_some() {
            let key = if k.is_empty() { "positional" } else { &k };
            return Err(Error::InvalidInput(format!(
                "parameter '{key}' given twice"
            )));
        }
    }
    Ok(map)
}

fn take_f64(map: &mut BTreeMap<String, String>, key: &str) -> Result<f64> {
    let raw = map
        .remove(key)
        .ok_or_else(|| Error::InvalidInput(format!("missing parameter {key}=<value>")))?;
    raw.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::InvalidInput(format!("parameter {key}: '{raw}' is not a number")))
}

fn reject_leftovers(map: &BTreeMap<String, String>) -> Result<()> {
    match map.iter().next() {
        None => Ok(()),
        Some((k, v)) if k.is_empty() => {
            Err(Error::InvalidInput(format!("unexpected argument '{v}'")))
        }
        Some((k, _)) => Err(Error::InvalidInput(format!("unknown parameter '{k}'"))),
    }
}

/// Range errors from the state constructors are usage errors here.
fn as_usage(e: Error) -> Error {
    match e {
        Error::Validation(msg) => Error::InvalidInput(msg),
        other => other,
    }
}

/// Builds a state from a family name and its parameters.
///
/// - `bell KIND` or `bell kind=KIND`, KIND one of phi+, phi-, psi+, psi-
/// - `werner p=P`, `mems p=P`, `rho_family p=P alpha=A` with P, A in `[0, 1]`
/// - `file PATH` or `file path=PATH`
pub fn prepare(family: &str, params: &[String]) -> Result<StateFile> {
    let mut map = parse_params(params)?;
    let mut meta = BTreeMap::new();
    meta.insert("family".to_string(), family.to_string());
    let rho = match family {
        "bell" => {
            let raw = map
                .remove("kind")
                .or_else(|| map.remove(""))
                .ok_or_else(|| {
                    Error::InvalidInput("bell needs a kind (phi+, phi-, psi+, psi-)".into())
                })?;
            let kind: BellKind = raw.parse()?;
            meta.insert("kind".into(), kind.name().into());
            states::bell(kind)
        }
        "werner" | "mems" => {
            let p = take_f64(&mut map, "p")?;
            meta.insert("p".into(), format!("{}", round_sig(p)));
            let rho = if family == "werner" {
                states::werner(p)
            } else {
                states::mems(p)
            };
            rho.map_err(as_usage)?
        }
        "rho_family" => {
            let p = take_f64(&mut map, "p")?;
            let alpha = take_f64(&mut map, "alpha")?;
            meta.insert("p".into(), format!("{}", round_sig(p)));
            meta.insert("alpha".into(), format!("{}", round_sig(alpha)));
            states::family_rho(p, alpha).map_err(as_usage)?
        }
        "file" => {
            let path = map
                .remove("path")
                .or_else(|| map.remove(""))
                .ok_or_else(|| Error::InvalidInput("file needs a path".into()))?;
            let src = StateFile::load(Path::new(&path))?;
            let rho = src.to_density()?;
            meta.extend(src.metadata.into_iter().filter(|(k, _)| k != "family"));
            meta.insert("source".into(), path);
            rho
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown family '{other}' (expected bell, werner, mems, rho_family, file)"
            )))
        }
    };
    reject_leftovers(&map)?;
    Ok(StateFile::from_density(&rho, meta))
}

/// Channels accepted by [`apply`]. Single-qubit channels act on qubit A of a
/// two-qubit input (`Φ ⊗ 𝟙`) or directly on a one-qubit input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelName {
    SpaPt,
    SpaTranspose,
    SpaInversion,
    Depolarize,
    Identity,
}

impl ChannelName {
    pub fn name(self) -> &'static str {
        match self {
            Self::SpaPt => "spa_pt",
            Self::SpaTranspose => "spa_transpose",
            Self::SpaInversion => "spa_inversion",
            Self::Depolarize => "depolarize",
            Self::Identity => "identity",
        }
    }

    /// The channel acting on a `dim`-dimensional input.
    pub fn build(self, dim: usize) -> Result<QuantumChannel> {
        let local = match self {
            Self::SpaPt => {
                return if dim == 4 {
                    Ok(channels::spa_pt())
                } else {
                    Err(Error::UnsupportedDimension(dim))
                }
            }
            Self::Identity => return Ok(channels::identity(dim)),
            Self::SpaTranspose => QuantumChannel::MeasurePrepare(channels::spa_transpose()),
            Self::SpaInversion => QuantumChannel::MeasurePrepare(channels::spa_inversion()),
            Self::Depolarize => channels::depolarize(),
        };
        match dim {
            2 => Ok(local),
            4 => Ok(QuantumChannel::tensor(local, channels::identity(2))),
            d => Err(Error::UnsupportedDimension(d)),
        }
    }
}

impl fmt::Display for ChannelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = [
            Self::SpaPt,
            Self::SpaTranspose,
            Self::SpaInversion,
            Self::Depolarize,
            Self::Identity,
        ];
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        all.into_iter().find(|c| c.name() == key).ok_or_else(|| {
            Error::InvalidInput(format!(
                "unknown channel '{s}' (expected spa_pt, spa_transpose, spa_inversion, depolarize, identity)"
            ))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ApplyMode {
    #[default]
    Exact,
    /// Shot-by-shot simulation of the local protocol; `spa_pt` only.
    Trajectory,
}

impl ApplyMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Trajectory => "trajectory",
        }
    }
}

impl FromStr for ApplyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(Self::Exact),
            "trajectory" => Ok(Self::Trajectory),
            other => Err(Error::InvalidInput(format!(
                "unknown mode '{other}' (expected exact or trajectory)"
            ))),
        }
    }
}

/// Output of [`apply`].
#[derive(Debug, Clone)]
pub struct ApplyOutcome {
    pub state: DensityMatrix,
    pub exact: DensityMatrix,
    pub spectrum: Vec<f64>,
    pub min_eigenvalue: f64,
    /// Fidelity between the simulated and exact outputs; trajectory mode only.
    pub fidelity_to_exact: Option<f64>,
    pub report: Report,
}

pub fn apply(
    rho: &DensityMatrix,
    channel: ChannelName,
    mode: ApplyMode,
    cfg: &RunConfig,
) -> Result<ApplyOutcome> {
    let exact = channel.build(rho.dim())?.apply(rho)?;
    let (state, fid) = match mode {
        ApplyMode::Exact => (exact.clone(), None),
        ApplyMode::Trajectory => {
            if channel != ChannelName::SpaPt {
                return Err(Error::InvalidInput(format!(
                    "trajectory mode is only defined for spa_pt, not {channel}"
                )));
            }
            let sim = tomography::trajectory_spa_pt(rho, &cfg.shot_config()?)?;
            let f = states::fidelity(&sim, &exact)?;
            (sim, Some(f))
        }
    };
    let spectrum = state.spectrum();
    let min = spectrum.iter().copied().fold(f64::INFINITY, f64::min);

    let mut cols = vec![
        "channel",
        "mode",
        "dim",
        "min_eigenvalue",
        "fidelity_to_exact",
    ];
    let eig_names: Vec<String> = (0..spectrum.len())
        .map(|k| format!("eigenvalue_{k}"))
        .collect();
    cols.extend(eig_names.iter().map(String::as_str));
    let mut report = Report::new(cfg.clone(), &cols);
    let mut row = vec![
        channel.name().into(),
        mode.name().into(),
        Cell::Int(state.dim() as u64),
        min.into(),
        fid.into(),
    ];
    row.extend(spectrum.iter().map(|&x| Cell::Num(x)));
    report.push(row);
    Ok(ApplyOutcome {
        state,
        exact,
        spectrum,
        min_eigenvalue: min,
        fidelity_to_exact: fid,
        report,
    })
}

/// Detection routes offered by [`detect`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectMethod {
    Ppt,
    SpaSpectrum,
    /// Measurement-only operator from the exact Born-rule table.
    FHatIdeal,
    /// Measurement-only operator from a finite-shot table.
    FHatSampled,
}

impl DetectMethod {
    pub const ALL: [DetectMethod; 4] = [
        Self::Ppt,
        Self::SpaSpectrum,
        Self::FHatIdeal,
        Self::FHatSampled,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ppt => "ppt",
            Self::SpaSpectrum => "spa_spectrum",
            Self::FHatIdeal => "f_hat_ideal",
            Self::FHatSampled => "f_hat_sampled",
        }
    }
}

impl fmt::Display for DetectMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown method '{s}' (expected ppt, spa_spectrum, f_hat_ideal, f_hat_sampled)"
                ))
            })
    }
}

pub const DETECT_COLUMNS: [&str; 7] = [
    "method",
    "lambda_min",
    "threshold",
    "margin",
    "verdict",
    "shots",
    "seed",
];

pub fn detect(rho: &DensityMatrix, method: DetectMethod, cfg: &RunConfig) -> Result<Report> {
    let verdict = match method {
        DetectMethod::Ppt => detection::detect_state(rho, Method::Ppt)?,
        DetectMethod::SpaSpectrum => detection::detect_state(rho, Method::SpaSpectrum)?,
        DetectMethod::FHatIdeal => detection::detect_state(rho, Method::FHat)?,
        DetectMethod::FHatSampled => {
            let table = tomography::sample_table(rho, &cfg.shot_config()?)?;
            detection::detect(Evidence::Table(&table), Method::FHat)?
        }
    };
    let mut report = Report::new(cfg.clone(), &DETECT_COLUMNS);
    report.push(vec![
        method.name().into(),
        verdict.lambda_min.into(),
        verdict.threshold.into(),
        verdict.margin.into(),
        verdict.verdict.to_string().into(),
        verdict.shots.into(),
        cfg.seed.into(),
    ]);
    Ok(report)
}

/// Minimum output eigenvalue recovered from a simulated experiment: trajectory
/// simulation of the protocol, then Pauli tomography of the emitted ensemble,
/// projection to a physical state, and its spectrum.
pub fn lambda_exp(rho: &DensityMatrix, trajectory: &ShotConfig, qst: &ShotConfig) -> Result<f64> {
    let out = tomography::trajectory_spa_pt(rho, trajectory)?;
    let expectations = PauliExpectations::sampled(&out, qst)?;
    let raw = tomography::qst_linear_inversion(&expectations);
    Ok(tomography::project_to_physical(&raw)?.min_eigenvalue())
}

/// Minimum eigenvalue of the measurement-only operator built from a sampled table.
pub fn lambda_d_sampled(rho: &DensityMatrix, cfg: &ShotConfig) -> Result<f64> {
    let table = tomography::sample_table(rho, cfg)?;
    detection::lambda_min_d(&detection::f_hat(&table))
}

pub fn lambda_d_ideal(rho: &DensityMatrix) -> Result<f64> {
    let table = tomography::ideal_probabilities(rho)?;
    detection::lambda_min_d(&detection::f_hat(&table))
}

/// Exact minimum eigenvalue of the SPA-PT output.
pub fn lambda_th(rho: &DensityMatrix) -> Result<f64> {
    Ok(channels::spa_pt().apply(rho)?.min_eigenvalue())
}

pub const TABLE1_COLUMNS: [&str; 5] = ["state", "lambda_th", "lambda_exp", "lambda_d", "threshold"];

/// Minimum eigenvalues for the four Bell states by the exact channel, the
/// simulated experiment and the measurement-only operator. Bell state `k`
/// uses derived seeds `3k`, `3k+1` (trajectory, tomography) and `3k+2` (table).
pub fn table1(cfg: &RunConfig) -> Result<Report> {
    let mut report = Report::new(cfg.clone(), &TABLE1_COLUMNS);
    for (k, kind) in BellKind::ALL.into_iter().enumerate() {
        let rho = states::bell(kind);
        let base = 3 * k as u64;
        let th = lambda_th(&rho)?;
        let exp = lambda_exp(&rho, &cfg.child(base)?, &cfg.child(base + 1)?)?;
        let d = lambda_d_sampled(&rho, &cfg.child(base + 2)?)?;
        report.push(vec![
            kind.name().into(),
            th.into(),
            exp.into(),
            d.into(),
            SPA_PT_THRESHOLD.into(),
        ]);
    }
    Ok(report)
}

pub const FIG3_COLUMNS: [&str; 10] = [
    "family",
    "p",
    "alpha",
    "tangle",
    "linear_entropy",
    "lambda_th",
    "lambda_d_ideal",
    "lambda_d_sampled",
    "verdict",
    "tangle_positive",
];

/// `(family, p, alpha, state)` for one sweep row.
pub type SweepItem = (&'static str, f64, Option<f64>, DensityMatrix);

/// States of the sweep in output order: the nine `ρ(p, α)`, then the Werner
/// and MEMS curves on [`CURVE_POINTS`] evenly spaced `p`.
pub fn fig3_states() -> Result<Vec<SweepItem>> {
    let mut out = Vec::new();
    for (p, alpha) in states::SWEEP_STATES {
        out.push(("rho_family", p, Some(alpha), states::family_rho(p, alpha)?));
    }
    let grid = |i: usize| i as f64 / (CURVE_POINTS - 1) as f64;
    for i in 0..CURVE_POINTS {
        out.push(("werner", grid(i), None, states::werner(grid(i))?));
    }
    for i in 0..CURVE_POINTS {
        out.push(("mems", grid(i), None, states::mems(grid(i))?));
    }
    Ok(out)
}

/// Sweep over the state families in the tangle / linear-entropy plane. Row
/// `i` samples its table with derived seed `i`. Rows are evaluated on a
/// bounded set of scoped threads and assembled in input order.
pub fn fig3(cfg: &RunConfig) -> Result<Report> {
    let items = fig3_states()?;
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .clamp(1, 8);
    let chunk = items.len().div_ceil(workers);
    let rows: Vec<Result<Vec<Cell>>> = std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .enumerate()
            .map(|(c, part)| {
                s.spawn(move || {
                    part.iter()
                        .enumerate()
                        .map(|(j, item)| fig3_row(item, cfg, (c * chunk + j) as u64))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let mut report = Report::new(cfg.clone(), &FIG3_COLUMNS);
    for row in rows {
        report.push(row?);
    }
    Ok(report)
}

fn fig3_row(
    item: &SweepItem,
    cfg: &RunConfig,
    index: u64,
) -> Result<Vec<Cell>> {
    let (family, p, alpha, rho) = item;
    let tangle = states::tangle(rho)?;
    let th = lambda_th(rho)?;
    let verdict = detection::DetectionVerdict::new(th, Method::SpaSpectrum, 0).verdict;
    Ok(vec![
        (*family).into(),
        (*p).into(),
        (*alpha).into(),
        tangle.into(),
        states::linear_entropy(rho)?.into(),
        th.into(),
        lambda_d_ideal(rho)?.into(),
        lambda_d_sampled(rho, &cfg.child(index)?)?.into(),
        verdict.to_string().into(),
        (tangle > TANGLE_TOL).into(),
    ])
}

/// Result of one self-test suite.
#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub seconds: f64,
    pub detail: String,
}

pub const SELFTEST_COLUMNS: [&str; 4] = ["suite", "passed", "seconds", "detail"];

type Suite = fn(&RunConfig) -> std::result::Result<String, String>;

const SUITES: [(&str, Suite); 10] = [
    ("decomposition_identity", suite_identity),
    ("channel_physicality", suite_physicality),
    ("transpose_branch_affine", suite_transpose_affine),
    ("verdict_equivalence", suite_verdict_equivalence),
    ("output_range", suite_range),
    ("werner_closed_form", suite_werner),
    ("basis_independence", suite_basis_independence),
    ("tomography_round_trip", suite_tomography),
    ("f_hat_matches_channel", suite_f_hat),
    ("trajectory_fidelity", suite_trajectory),
];

/// Runs every invariant suite and returns the per-suite results with timing.
pub fn selftest(cfg: &RunConfig) -> (Report, Vec<SuiteResult>) {
    let mut results = Vec::new();
    for (name, suite) in SUITES {
        let t0 = Instant::now();
        let outcome = suite(cfg);
        let seconds = t0.elapsed().as_secs_f64();
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        results.push(SuiteResult {
            name,
            passed,
            seconds,
            detail,
        });
    }
    let mut report = Report::new(cfg.clone(), &SELFTEST_COLUMNS);
    for r in &results {
        report.push(vec![
            r.name.into(),
            r.passed.into(),
            r.seconds.into(),
            r.detail.clone().into(),
        ]);
    }
    (report, results)
}

type SuiteOutcome = std::result::Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn str_err(e: Error) -> String {
    e.to_string()
}

fn random_states(seed: u64, n: usize) -> Vec<DensityMatrix> {
    let mut rng = tomography::substream(seed, 0);
    (0..n).map(|_| DensityMatrix::random(&mut rng)).collect()
}

fn suite_identity(_: &RunConfig) -> SuiteOutcome {
    let built = channels::spa_pt().superoperator().map_err(str_err)?;
    let dev = built.max_abs_diff(&channels::spa_pt_closed_form());
    check(dev < 1e-10, || format!("max deviation {dev:e}"))?;
    Ok(format!("max deviation {dev:.3e}"))
}

fn suite_physicality(_: &RunConfig) -> SuiteOutcome {
    let named = [
        ("spa_pt", channels::spa_pt()),
        (
            "spa_transpose",
            QuantumChannel::MeasurePrepare(channels::spa_transpose()),
        ),
        (
            "spa_inversion",
            QuantumChannel::MeasurePrepare(channels::spa_inversion()),
        ),
        ("depolarize", channels::depolarize()),
    ];
    for (name, ch) in &named {
        let choi = ch.choi().map_err(str_err)?;
        let min = choi.min_eigenvalue().map_err(str_err)?;
        check(min >= -1e-9, || {
            format!("{name}: Choi min eigenvalue {min:e}")
        })?;
        check(ch.is_tp().map_err(str_err)?, || {
            format!("{name}: not trace preserving")
        })?;
    }
    let raw = channels::partial_transpose_map().choi().map_err(str_err)?;
    let min = raw.min_eigenvalue().map_err(str_err)?;
    check((min + 0.5).abs() < 1e-9, || {
        format!("raw partial transpose Choi min {min}")
    })?;
    Ok(format!("raw partial transpose Choi min {min:.6}"))
}

fn suite_transpose_affine(cfg: &RunConfig) -> SuiteOutcome {
    let t = QuantumChannel::MeasurePrepare(channels::spa_transpose());
    let mut rng = tomography::substream(cfg.seed, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let psi = PureState::random(2, &mut rng);
        let rho = DensityMatrix::from_pure(&psi);
        let out = t.apply_raw(rho.matrix()).map_err(str_err)?;
        let want = &rho.matrix().transpose().scale_real(1.0 / 3.0)
            + &ComplexMatrix::identity(2).scale_real(1.0 / 3.0);
        worst = worst.max(out.max_abs_diff(&want));
    }
    check(worst < 1e-12, || format!("deviation {worst:e}"))?;
    Ok(format!("200 states, max deviation {worst:.3e}"))
}

fn suite_verdict_equivalence(cfg: &RunConfig) -> SuiteOutcome {
    let ch = channels::spa_pt();
    let mut worst: f64 = 0.0;
    let mut entangled = 0;
    for (i, rho) in random_states(cfg.seed, 1000).iter().enumerate() {
        let ppt = detection::detect_state(rho, Method::Ppt).map_err(str_err)?;
        let spa = detection::detect_state(rho, Method::SpaSpectrum).map_err(str_err)?;
        check(ppt.verdict == spa.verdict, || {
            format!("state {i}: verdicts differ")
        })?;
        entangled += usize::from(ppt.is_entangled());
        let pt = qmath::eigvalsh(&channels::ideal_pt(rho).map_err(str_err)?).map_err(str_err)?;
        let out = ch.apply(rho).map_err(str_err)?.spectrum();
        for (a, b) in pt.iter().zip(&out) {
            worst = worst.max((SPA_PT_SCALE * a + SPA_PT_THRESHOLD - b).abs());
        }
    }
    check(worst < 1e-10, || format!("affine law deviation {worst:e}"))?;
    Ok(format!(
        "1000 states ({entangled} entangled), affine deviation {worst:.3e}"
    ))
}

fn suite_range(cfg: &RunConfig) -> SuiteOutcome {
    let ch = channels::spa_pt();
    for (i, rho) in random_states(cfg.seed ^ 0x5eed, 500).iter().enumerate() {
        let min = ch.apply(rho).map_err(str_err)?.min_eigenvalue();
        check(min >= 1.0 / 6.0 - 1e-10, || {
            format!("state {i}: min eigenvalue {min}")
        })?;
    }
    for kind in BellKind::ALL {
        let min = lambda_th(&states::bell(kind)).map_err(str_err)?;
        check((min - 1.0 / 6.0).abs() < 1e-10, || format!("{kind}: {min}"))?;
    }
    let zero = PureState::basis(4, 0).map_err(str_err)?;
    let min = lambda_th(&DensityMatrix::from_pure(&zero)).map_err(str_err)?;
    check((min - SPA_PT_THRESHOLD).abs() < 1e-10, || {
        format!("|00>: {min}")
    })?;
    Ok("500 random states in range; Bell 1/6, product 2/9".into())
}

fn suite_werner(_: &RunConfig) -> SuiteOutcome {
    for i in 0..CURVE_POINTS {
        let p = i as f64 / (CURVE_POINTS - 1) as f64;
        let rho = states::werner(p).map_err(str_err)?;
        let min = lambda_th(&rho).map_err(str_err)?;
        let want = (p + 2.0) / 12.0;
        check((min - want).abs() < 1e-10, || {
            format!("p={p}: {min} vs {want}")
        })?;
    }
    let below = detection::detect_state(
        &states::werner(2.0 / 3.0 - 1e-6).map_err(str_err)?,
        Method::SpaSpectrum,
    )
    .map_err(str_err)?;
    let at = detection::detect_state(
        &states::werner(2.0 / 3.0).map_err(str_err)?,
        Method::SpaSpectrum,
    )
    .map_err(str_err)?;
    check(below.is_entangled() && !at.is_entangled(), || {
        "verdict does not flip at p = 2/3".into()
    })?;
    Ok("21-point grid; flip at p = 2/3".into())
}

fn suite_basis_independence(_: &RunConfig) -> SuiteOutcome {
    let mut vals = Vec::new();
    for kind in BellKind::ALL {
        let rho = states::bell(kind);
        vals.push(lambda_th(&rho).map_err(str_err)?);
        vals.push(lambda_d_ideal(&rho).map_err(str_err)?);
    }
    let spread = vals
        .iter()
        .map(|v| (v - 1.0 / 6.0).abs())
        .fold(0.0, f64::max);
    check(spread < 1e-10, || {
        format!("Bell eigenvalues spread {spread:e}")
    })?;
    let q = detection::witness_projector_for(&states::bell(BellKind::PhiPlus))
        .map_err(str_err)?
        .ok_or("no witness for phi+")?;
    let hits: Vec<bool> = BellKind::ALL
        .iter()
        .map(|&k| detection::witness_expectation(&states::bell(k), &q).map(|w| w < 0.0))
        .collect::<Result<_>>()
        .map_err(str_err)?;
    check(hits == [true, false, false, false], || {
        format!("fixed witness hits {hits:?}")
    })?;
    Ok("all Bell states at 1/6; fixed witness detects phi+ only".into())
}

fn suite_tomography(cfg: &RunConfig) -> SuiteOutcome {
    let mut worst: f64 = 0.0;
    for rho in random_states(cfg.seed ^ 0x7057, 100) {
        let e = PauliExpectations::exact(&rho).map_err(str_err)?;
        worst = worst.max(tomography::qst_linear_inversion(&e).max_abs_diff(rho.matrix()));
    }
    check(worst < 1e-10, || format!("round-trip deviation {worst:e}"))?;
    Ok(format!("100 states, max deviation {worst:.3e}"))
}

fn suite_f_hat(cfg: &RunConfig) -> SuiteOutcome {
    let ch = channels::spa_pt();
    let mut worst: f64 = 0.0;
    for rho in random_states(cfg.seed ^ 0xf4a7, 200) {
        let table = tomography::ideal_probabilities(&rho).map_err(str_err)?;
        let f = detection::f_hat(&table);
        let out = ch.apply(&rho).map_err(str_err)?;
        worst = worst.max(f.matrix().max_abs_diff(out.matrix()));
    }
    check(worst < 1e-10, || format!("deviation {worst:e}"))?;
    Ok(format!("200 states, max deviation {worst:.3e}"))
}

fn suite_trajectory(cfg: &RunConfig) -> SuiteOutcome {
    let shots = ShotConfig::new(20_000, cfg.seed).map_err(str_err)?;
    let mut lowest: f64 = 1.0;
    for kind in BellKind::ALL {
        let rho = states::bell(kind);
        let sim = tomography::trajectory_spa_pt(&rho, &shots).map_err(str_err)?;
        let exact = channels::spa_pt().apply(&rho).map_err(str_err)?;
        lowest = lowest.min(states::fidelity(&sim, &exact).map_err(str_err)?);
    }
    check(lowest > 0.99, || format!("fidelity {lowest}"))?;
    Ok(format!("20000 trajectories, min fidelity {lowest:.6}"))
}

/// `Verdict` for a bare eigenvalue against the SPA-PT threshold.
pub fn verdict_for(lambda: f64) -> Verdict {
    detection::DetectionVerdict::new(lambda, Method::SpaSpectrum, 0).verdict
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_sig_keeps_twelve_digits() {
        assert_eq!(round_sig(1.0 / 6.0), 0.166666666667);
        assert_eq!(round_sig(-2.0 / 9.0), -0.222222222222);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(123456.7890123456), 123456.789012);
    }

    #[test]
    fn prepare_bell_has_coherence_one_half() {
        let sf = prepare("bell", &["phi+".to_string()]).unwrap();
        assert_eq!(sf.dim, 4);
        assert_eq!(sf.re[0][3], 0.5);
        assert_eq!(sf.metadata["family"], "bell");
    }

    #[test]
    fn prepare_rejects_bad_input() {
        let e = prepare("werner", &["p=1.5".to_string()]).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(prepare("nope", &[]).is_err());
        assert!(prepare("werner", &["q=0.2".to_string()]).is_err());
        assert!(prepare("werner", &["p=0.2".into(), "x=1".into()]).is_err());
    }

    #[test]
    fn rho_family_state_file_validates() {
        let sf = prepare("rho_family", &["p=0.12".into(), "alpha=0.71".into()]).unwrap();
        let rho = sf.to_density().unwrap();
        let direct = states::family_rho(0.12, 0.71).unwrap();
        assert!(rho.matrix().max_abs_diff(direct.matrix()) < 1e-12);
        assert_eq!(sf.metadata["alpha"], "0.71");
    }

    #[test]
    fn state_file_diagnostics_name_invariant() {
        let mut sf = prepare("bell", &["psi-".to_string()]).unwrap();
        sf.re[0][0] = 2.0;
        let msg = sf.to_density().unwrap_err().to_string();
        assert!(msg.contains("trace"), "{msg}");

        let mut sf = prepare("bell", &["psi-".to_string()]).unwrap();
        sf.im.pop();
        let msg = sf.to_density().unwrap_err().to_string();
        assert!(msg.contains("'im'"), "{msg}");
    }

    #[test]
    fn state_file_json_round_trip() {
        let sf = prepare("mems", &["p=0.4".to_string()]).unwrap();
        let back = StateFile::parse(&sf.to_json().unwrap()).unwrap();
        assert_eq!(sf, back);
    }

    #[test]
    fn apply_spa_pt_to_maximally_mixed_is_fixed_point() {
        let rho = DensityMatrix::maximally_mixed(4).unwrap();
        let out = apply(
            &rho,
            ChannelName::SpaPt,
            ApplyMode::Exact,
            &RunConfig::new("apply"),
        )
        .unwrap();
        assert!(out.state.matrix().max_abs_diff(rho.matrix()) < 1e-12);
        assert!(out.fidelity_to_exact.is_none());
    }

    #[test]
    fn trajectory_mode_needs_spa_pt() {
        let rho = states::bell(BellKind::PhiPlus);
        let cfg = RunConfig::new("apply").with_shots(100);
        assert!(apply(&rho, ChannelName::Depolarize, ApplyMode::Trajectory, &cfg).is_err());
    }

    #[test]
    fn local_channels_lift_to_two_qubits() {
        let rho = states::bell(BellKind::PhiPlus);
        let cfg = RunConfig::new("apply");
        let out = apply(&rho, ChannelName::Depolarize, ApplyMode::Exact, &cfg).unwrap();
        assert!(
            out.state
                .matrix()
                .max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25))
                < 1e-12
        );
    }

    #[test]
    fn detect_report_columns() {
        let rho = states::bell(BellKind::PsiMinus);
        let r = detect(&rho, DetectMethod::SpaSpectrum, &RunConfig::new("detect")).unwrap();
        assert!((r.f64_at(0, "lambda_min").unwrap() - 1.0 / 6.0).abs() < 1e-10);
        assert_eq!(
            r.get(0, "verdict").and_then(Cell::as_str),
            Some("entangled")
        );
    }

    #[test]
    fn csv_and_json_carry_identical_numbers() {
        let rho = states::werner(0.3).unwrap();
        let r = detect(&rho, DetectMethod::Ppt, &RunConfig::new("detect")).unwrap();
        let csv_text = r.to_csv().unwrap();
        assert!(!csv_text.contains('\r'));
        let mut rd = csv::Reader::from_reader(csv_text.as_bytes());
        let rec = rd.records().next().unwrap().unwrap();
        let csv_lambda: f64 = rec[1].parse().unwrap();
        let json: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(json["rows"][0]["lambda_min"].as_f64().unwrap(), csv_lambda);
        assert_eq!(json["config"]["seed"], 42);
    }

    #[test]
    fn selftest_passes() {
        let (_, results) = selftest(&RunConfig::new("selftest"));
        for r in &results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
