//! Command-line front end.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::depstats::{CiMethod, VarianceMode};
use crate::dwt1d::{LevelLabel, Scheme};
use crate::error::Error;
use crate::filterbank::{Family, FilterBank};
use crate::multiscale::{
    average_correlogram, correlogram, correlogram_from_levels, image_level_sets, scale_decomposition,
    transform_series, Correlogram, CorrelogramOptions, LevelEstimate, LevelStatus, Measure,
    ScaleDecomposition,
};
use crate::simgen::{self, ARSystem, ImagePairConfig};
use crate::wt2d::{block_ranges, wt2d_forward, Grid};

pub const THREADS_ENV: &str = "WAVECORR_THREADS";

#[derive(Debug, Parser)]
#[command(name = "wavecorr", version, about = "Wavelet-based multiscale correlation analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Wavelet transform of a series (or an image with --image).
    Transform(TransformArgs),
    /// Levelwise correlogram of two series.
    Correlate(CorrelateArgs),
    /// Levelwise correlogram over the diagonal hierarchy of two images.
    Correlate2d(Correlate2dArgs),
    /// Simulate one of the coupled AR(1) systems.
    Simulate(SimulateArgs),
    /// Simulate a synthetic image pair.
    SimulateImages(SimulateImagesArgs),
    /// Split the correlation of two series into weighted levelwise terms.
    Decompose(DecomposeArgs),
}

#[derive(Debug, Args)]
pub struct WaveletArgs {
    /// Wavelet family: haar, db4, la8 or coif6.
    #[arg(long, default_value = "haar")]
    pub wavelet: Family,
    /// Number of detail levels.
    #[arg(long)]
    pub levels: usize,
    /// dwt (orthogonal) or ndwt (non-decimated).
    #[arg(long, default_value = "dwt")]
    pub scheme: Scheme,
}

#[derive(Debug, Args)]
pub struct EstimatorArgs {
    /// pearson, kendall or blomqvist.
    #[arg(long, default_value = "pearson")]
    pub measure: Measure,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Kendall interval variance: asymptotic, exact or exact-or-asymptotic.
    #[arg(long, default_value = "asymptotic", value_parser = parse_variance_mode)]
    pub kendall_variance: VarianceMode,
    /// Plain Pearson levels with fewer coefficients use the bias-corrected
    /// Fisher interval (0 disables).
    #[arg(long, default_value_t = 30)]
    pub bias_correction_below: usize,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub wavelet: WaveletArgs,
    /// Treat the input as a square matrix and run the 2D transform.
    #[arg(long)]
    pub image: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// X and Y series (single-column CSV).
    #[arg(num_args = 2, required = true, value_names = ["X", "Y"])]
    pub inputs: Vec<PathBuf>,
    /// Control series, removed in the order given.
    #[arg(long = "control")]
    pub controls: Vec<PathBuf>,
    #[command(flatten)]
    pub wavelet: WaveletArgs,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Correlogram JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional per-level CSV table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Correlate2dArgs {
    /// Images A and B (square CSV matrices).
    #[arg(num_args = 2, value_names = ["A", "B"], required_unless_present = "average")]
    pub inputs: Vec<PathBuf>,
    /// Control image.
    #[arg(long, conflicts_with = "average")]
    pub control: Option<PathBuf>,
    /// Manifest with one `a,b[,control]` line per run; results are averaged.
    #[arg(long)]
    pub average: Option<PathBuf>,
    #[arg(long, default_value = "coif6")]
    pub wavelet: Family,
    #[arg(long, default_value_t = 5)]
    pub levels: usize,
    #[arg(long, default_value = "ndwt")]
    pub scheme: Scheme,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub system: u8,
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = simgen::DEFAULT_BURN_IN)]
    pub burn_in: usize,
    /// Directory receiving x.csv, y.csv and meta.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateImagesArgs {
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(8..))]
    pub n: u64,
    #[arg(long)]
    pub dependence: f64,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving a.csv, b.csv and meta.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(num_args = 2, required = true, value_names = ["X", "Y"])]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "haar")]
    pub wavelet: Family,
    #[arg(long)]
    pub levels: usize,
    /// Decomposition table (CSV).
    #[arg(long)]
    pub out: PathBuf,
    /// Optional full decomposition as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

fn parse_variance_mode(s: &str) -> Result<VarianceMode, String> {
    match s {
        "asymptotic" => Ok(VarianceMode::Asymptotic),
        "exact" => Ok(VarianceMode::Exact),
        "exact-or-asymptotic" => Ok(VarianceMode::ExactOrAsymptotic),
        _ => Err("expected asymptotic, exact or exact-or-asymptotic".into()),
    }
}

/// Failure of a command, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

/// Parses `WAVECORR_THREADS` and sizes the global pool (0 or unset = auto).
pub fn configure_threads() -> CliResult<usize> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v.trim().parse::<usize>().map_err(|_| {
            CliError::Usage(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`"))
        })?,
        _ => 0,
    };
    #[cfg(feature = "parallel")]
    if threads > 0 {
        // Fails only if a pool already exists, which keeps the earlier setting.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(threads)
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match configure_threads().and_then(|_| run(&cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Transform(a) => cmd_transform(a),
        Command::Correlate(a) => cmd_correlate(a),
        Command::Correlate2d(a) => cmd_correlate2d(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::SimulateImages(a) => cmd_simulate_images(a),
        Command::Decompose(a) => cmd_decompose(a),
    }
}

// ---------- formatting and files ----------

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Pretty JSON whose numbers carry 17 significant digits.
struct SigFigs(PrettyFormatter<'static>);

impl Formatter for SigFigs {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt_f64(v).as_bytes())
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFigs(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report types always serialize");
    out.push(b'\n');
    out
}

/// Writes via a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_error(path, e))?;
    tmp.write_all(bytes).map_err(|e| io_error(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_error(path, e))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

fn parse_number(field: &str, path: &Path, line: u64) -> CliResult<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| CliError::Data(format!("{}:{line}: `{field}` is not a number", path.display())))?;
    if !v.is_finite() {
        return Err(CliError::Data(format!("{}:{line}: non-finite value", path.display())));
    }
    Ok(v)
}

fn csv_records(path: &Path) -> CliResult<Vec<(u64, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| io_error(path, e))?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| io_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let fields: Vec<String> = rec.iter().map(str::to_string).collect();
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        rows.push((line, fields));
    }
    Ok(rows)
}

/// Single-column CSV with an optional header line.
pub fn read_series(path: &Path) -> CliResult<Vec<f64>> {
    let rows = csv_records(path)?;
    let mut out = Vec::with_capacity(rows.len());
    for (i, (line, fields)) in rows.iter().enumerate() {
        if fields.len() != 1 {
            return Err(CliError::Data(format!(
                "{}:{line}: expected one column, found {}",
                path.display(),
                fields.len()
            )));
        }
        if i == 0 && fields[0].parse::<f64>().is_err() {
            continue;
        }
        out.push(parse_number(&fields[0], path, *line)?);
    }
    if out.is_empty() {
        return Err(CliError::Data(format!("{}: no values", path.display())));
    }
    Ok(out)
}

/// Plain CSV matrix, one image row per line.
pub fn read_matrix(path: &Path) -> CliResult<Grid> {
    let rows = csv_records(path)?;
    let cols = rows.first().map_or(0, |r| r.1.len());
    let mut data = Vec::with_capacity(rows.len() * cols);
    for (line, fields) in &rows {
        if fields.len() != cols {
            return Err(CliError::Data(format!(
                "{}:{line}: expected {cols} columns, found {}",
                path.display(),
                fields.len()
            )));
        }
        for f in fields {
            data.push(parse_number(f, path, *line)?);
        }
    }
    if data.is_empty() {
        return Err(CliError::Data(format!("{}: no values", path.display())));
    }
    Ok(Grid::new(rows.len(), cols, data)?)
}

fn series_csv(header: &str, values: &[f64]) -> Vec<u8> {
    let mut s = String::with_capacity(values.len() * 24);
    s.push_str(header);
    s.push('\n');
    for v in values {
        s.push_str(&fmt_f64(*v));
        s.push('\n');
    }
    s.into_bytes()
}

fn matrix_csv(g: &Grid) -> Vec<u8> {
    let mut s = String::new();
    for r in 0..g.rows {
        let row: Vec<String> = g.row(r).iter().map(|v| fmt_f64(*v)).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s.into_bytes()
}

// ---------- transform ----------

#[derive(Serialize)]
struct CoefficientGroup {
    level: LevelLabel,
    length: usize,
    energy: f64,
    coefficients: Vec<f64>,
}

#[derive(Serialize)]
struct TransformReport {
    tool: &'static str,
    version: &'static str,
    kind: &'static str,
    wavelet: String,
    scheme: Scheme,
    n: usize,
    levels: usize,
    /// Layout order: smooth, then details coarsest to finest.
    groups: Vec<CoefficientGroup>,
}

#[derive(Serialize)]
struct DiagonalBlock {
    level: LevelLabel,
    start: usize,
    side: usize,
    energy: f64,
}

#[derive(Serialize)]
struct Transform2dReport {
    tool: &'static str,
    version: &'static str,
    kind: &'static str,
    wavelet: String,
    scheme: Scheme,
    n: usize,
    levels: usize,
    diagonal_blocks: Vec<DiagonalBlock>,
    coefficients: Vec<Vec<f64>>,
}

fn layout_label(levels: usize, b: usize) -> LevelLabel {
    if b == 0 {
        LevelLabel::Smooth
    } else {
        LevelLabel::Detail(levels + 1 - b)
    }
}

fn cmd_transform(a: &TransformArgs) -> CliResult<()> {
    let fb = a.wavelet.wavelet.filter();
    let (levels, scheme) = (a.wavelet.levels, a.wavelet.scheme);
    let mut summary = String::from("level\tlength\tenergy\n");
    let bytes = if a.image {
        let img = read_matrix(&a.input)?;
        let dec = wt2d_forward(&img, &fb, levels, scheme)?;
        let diagonal_blocks: Vec<DiagonalBlock> = block_ranges(dec.n, levels, scheme)
            .into_iter()
            .zip(&dec.diagonal_blocks)
            .enumerate()
            .map(|(b, ((start, side), g))| DiagonalBlock {
                level: layout_label(levels, b),
                start,
                side,
                energy: g.data.iter().map(|v| v * v).sum(),
            })
            .collect();
        for d in &diagonal_blocks {
            let _ = writeln!(summary, "{}\t{}x{}\t{}", d.level, d.side, d.side, fmt_f64(d.energy));
        }
        to_json(&Transform2dReport {
            tool: "wavecorr",
            version: env!("CARGO_PKG_VERSION"),
            kind: "transform2d",
            wavelet: dec.wavelet.clone(),
            scheme,
            n: dec.n,
            levels,
            diagonal_blocks,
            coefficients: (0..dec.full.rows).map(|r| dec.full.row(r).to_vec()).collect(),
        })
    } else {
        let y = read_series(&a.input)?;
        let dec = transform_series(&y, &fb, levels, scheme)?;
        let groups: Vec<CoefficientGroup> = std::iter::once(&dec.smooth)
            .chain(&dec.details)
            .enumerate()
            .map(|(b, v)| CoefficientGroup {
                level: layout_label(levels, b),
                length: v.len(),
                energy: v.iter().map(|c| c * c).sum(),
                coefficients: v.clone(),
            })
            .collect();
        for g in &groups {
            let _ = writeln!(summary, "{}\t{}\t{}", g.level, g.length, fmt_f64(g.energy));
        }
        to_json(&TransformReport {
            tool: "wavecorr",
            version: env!("CARGO_PKG_VERSION"),
            kind: "transform",
            wavelet: dec.wavelet.clone(),
            scheme,
            n: dec.n,
            levels,
            groups,
        })
    };
    write_atomic(&a.out, &bytes)?;
    print!("{summary}");
    Ok(())
}

// ---------- correlograms ----------

#[derive(Debug, Serialize)]
struct Cell {
    estimate: Option<f64>,
    lower: Option<f64>,
    upper: Option<f64>,
    status: LevelStatus,
    method: Option<CiMethod>,
    note: Option<String>,
}

impl From<&LevelEstimate> for Cell {
    fn from(e: &LevelEstimate) -> Self {
        Cell {
            estimate: e.estimate,
            lower: e.lower(),
            upper: e.upper(),
            status: e.status,
            method: e.interval.map(|c| c.method),
            note: e.note.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
struct LevelRow {
    level: LevelLabel,
    n_eff: usize,
    corr: Cell,
    #[serde(skip_serializing_if = "Option::is_none")]
    partial_corr: Option<Cell>,
}

#[derive(Debug, Serialize)]
struct CorrelogramReport {
    tool: &'static str,
    version: &'static str,
    kind: &'static str,
    measure: Measure,
    scheme: Scheme,
    wavelet: String,
    levels: usize,
    alpha: f64,
    controls: usize,
    runs: usize,
    /// Finest detail first, smooth last.
    results: Vec<LevelRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decomposition: Option<ScaleDecomposition>,
}

fn report(kind: &'static str, corr: &Correlogram, partial: Option<&Correlogram>) -> CorrelogramReport {
    let results = corr
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| LevelRow {
            level: e.level,
            n_eff: e.n_eff,
            corr: e.into(),
            partial_corr: partial.map(|p| (&p.entries[i]).into()),
        })
        .collect();
    CorrelogramReport {
        tool: "wavecorr",
        version: env!("CARGO_PKG_VERSION"),
        kind,
        measure: corr.measure,
        scheme: corr.scheme,
        wavelet: corr.wavelet.clone(),
        levels: corr.levels,
        alpha: corr.alpha,
        controls: partial.map_or(0, |p| p.controls.len()),
        runs: corr.runs,
        results,
        decomposition: corr.decomposition.clone(),
    }
}

/// Per-level table; reports the partial correlation when controls are present.
fn correlogram_csv(c: &Correlogram) -> Vec<u8> {
    let mut s = String::from("level,estimate,lower,upper,n_eff,status\n");
    for e in &c.entries {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            e.level,
            fmt_opt(e.estimate),
            fmt_opt(e.lower()),
            fmt_opt(e.upper()),
            e.n_eff,
            e.status
        );
    }
    s.into_bytes()
}

fn summarize(c: &Correlogram) {
    println!("level\tn_eff\testimate\tlower\tupper\tstatus");
    for e in &c.entries {
        let f = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
        println!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            e.level,
            e.n_eff,
            f(e.estimate),
            f(e.lower()),
            f(e.upper()),
            e.status
        );
        if e.status != LevelStatus::Ok {
            if let Some(note) = &e.note {
                eprintln!("warning: level {}: {note}", e.level);
            }
        }
    }
}

fn options(fb: FilterBank, levels: usize, scheme: Scheme, est: &EstimatorArgs) -> CliResult<CorrelogramOptions> {
    if !(est.alpha > 0.0 && est.alpha < 1.0) {
        return Err(CliError::Usage(format!("--alpha must lie in (0, 1), got {}", est.alpha)));
    }
    Ok(CorrelogramOptions {
        alpha: est.alpha,
        kendall_variance: est.kendall_variance,
        bias_correction_below: est.bias_correction_below,
        ..CorrelogramOptions::new(fb, levels, scheme, est.measure)
    })
}

fn write_correlograms(
    kind: &'static str,
    corr: &Correlogram,
    partial: Option<&Correlogram>,
    out: &Path,
    csv_out: Option<&PathBuf>,
) -> CliResult<()> {
    write_atomic(out, &to_json(&report(kind, corr, partial)))?;
    let primary = partial.unwrap_or(corr);
    if let Some(path) = csv_out {
        write_atomic(path, &correlogram_csv(primary))?;
    }
    summarize(primary);
    Ok(())
}

fn cmd_correlate(a: &CorrelateArgs) -> CliResult<()> {
    let opts = options(a.wavelet.wavelet.filter(), a.wavelet.levels, a.wavelet.scheme, &a.estimator)?;
    let x = read_series(&a.inputs[0])?;
    let y = read_series(&a.inputs[1])?;
    let controls = a
        .controls
        .iter()
        .map(|p| read_series(p))
        .collect::<CliResult<Vec<_>>>()?;
    let control_refs: Vec<&[f64]> = controls.iter().map(Vec::as_slice).collect();
    let corr = correlogram(&x, &y, &[], &opts)?;
    let partial = if controls.is_empty() {
        None
    } else {
        Some(correlogram(&x, &y, &control_refs, &opts)?)
    };
    write_correlograms("correlogram", &corr, partial.as_ref(), &a.out, a.csv.as_ref())
}

type ImageRun = (PathBuf, PathBuf, Option<PathBuf>);

/// Reads `a,b[,control]` lines; relative paths resolve against the manifest.
pub fn read_manifest(path: &Path) -> CliResult<Vec<ImageRun>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut runs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<PathBuf> = line.split(',').map(|p| base.join(p.trim())).collect();
        match parts.as_slice() {
            [a, b] => runs.push((a.clone(), b.clone(), None)),
            [a, b, c] => runs.push((a.clone(), b.clone(), Some(c.clone()))),
            _ => {
                return Err(CliError::Data(format!(
                    "{}:{}: expected `a,b` or `a,b,control`",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    if runs.is_empty() {
        return Err(CliError::Data(format!("{}: manifest lists no images", path.display())));
    }
    if runs.iter().any(|r| r.2.is_some()) != runs.iter().all(|r| r.2.is_some()) {
        return Err(CliError::Data(format!(
            "{}: either every line or no line must name a control image",
            path.display()
        )));
    }
    Ok(runs)
}

fn cmd_correlate2d(a: &Correlate2dArgs) -> CliResult<()> {
    let opts = options(a.wavelet.filter(), a.levels, a.scheme, &a.estimator)?;
    let runs: Vec<ImageRun> = match &a.average {
        Some(manifest) => read_manifest(manifest)?,
        None => vec![(a.inputs[0].clone(), a.inputs[1].clone(), a.control.clone())],
    };
    let mut corrs = Vec::with_capacity(runs.len());
    let mut partials = Vec::new();
    for (pa, pb, pc) in &runs {
        let img_a = read_matrix(pa)?;
        let img_b = read_matrix(pb)?;
        let control = pc.as_deref().map(read_matrix).transpose()?;
        let controls: Vec<&Grid> = control.iter().collect();
        let sets = image_level_sets(&img_a, &img_b, &controls, &opts)?;
        corrs.push(correlogram_from_levels(&sets[0], &sets[1], &[], &opts)?);
        if !controls.is_empty() {
            partials.push(correlogram_from_levels(&sets[0], &sets[1], &sets[2..], &opts)?);
        }
    }
    let corr = average_correlogram(&corrs)?;
    let partial = if partials.is_empty() {
        None
    } else {
        Some(average_correlogram(&partials)?)
    };
    write_correlograms("correlogram2d", &corr, partial.as_ref(), &a.out, a.csv.as_ref())
}

// ---------- simulation ----------

#[derive(Serialize)]
struct SimulationMeta {
    tool: &'static str,
    version: &'static str,
    kind: &'static str,
    system: u8,
    n: usize,
    seed: u64,
    burn_in: usize,
    generator: &'static str,
    stationary_correlation: f64,
}

#[derive(Serialize)]
struct ImageMeta {
    tool: &'static str,
    version: &'static str,
    kind: &'static str,
    n: usize,
    dependence: f64,
    noise: f64,
    seed: u64,
    generator: &'static str,
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn cmd_simulate(a: &SimulateArgs) -> CliResult<()> {
    let cfg = ARSystem {
        system_id: a.system,
        n: a.n as usize,
        seed: a.seed,
        burn_in: a.burn_in,
    };
    let (x, y) = simgen::simulate_ar_pair(&cfg)?;
    ensure_dir(&a.out_dir)?;
    write_atomic(&a.out_dir.join("x.csv"), &series_csv("x", &x))?;
    write_atomic(&a.out_dir.join("y.csv"), &series_csv("y", &y))?;
    let meta = SimulationMeta {
        tool: "wavecorr",
        version: env!("CARGO_PKG_VERSION"),
        kind: "simulation",
        system: cfg.system_id,
        n: cfg.n,
        seed: cfg.seed,
        burn_in: cfg.burn_in,
        generator: simgen::GENERATOR,
        stationary_correlation: simgen::stationary_correlation(cfg.system_id)?,
    };
    write_atomic(&a.out_dir.join("meta.json"), &to_json(&meta))?;
    println!("wrote {} samples of system {} to {}", cfg.n, cfg.system_id, a.out_dir.display());
    Ok(())
}

fn cmd_simulate_images(a: &SimulateImagesArgs) -> CliResult<()> {
    let cfg = ImagePairConfig {
        n: a.n as usize,
        dependence: a.dependence,
        noise: a.noise,
        seed: a.seed,
    };
    if !(0.0..=1.0).contains(&cfg.dependence) || !(cfg.noise >= 0.0) {
        return Err(CliError::Usage("--dependence must lie in [0, 1] and --noise must be non-negative".into()));
    }
    let (img_a, img_b) = simgen::simulate_image_pair(&cfg)?;
    ensure_dir(&a.out_dir)?;
    write_atomic(&a.out_dir.join("a.csv"), &matrix_csv(&img_a))?;
    write_atomic(&a.out_dir.join("b.csv"), &matrix_csv(&img_b))?;
    let meta = ImageMeta {
        tool: "wavecorr",
        version: env!("CARGO_PKG_VERSION"),
        kind: "image_simulation",
        n: cfg.n,
        dependence: cfg.dependence,
        noise: cfg.noise,
        seed: cfg.seed,
        generator: simgen::GENERATOR,
    };
    write_atomic(&a.out_dir.join("meta.json"), &to_json(&meta))?;
    println!("wrote {0}x{0} image pair to {1}", cfg.n, a.out_dir.display());
    Ok(())
}

// ---------- decomposition ----------

fn decomposition_csv(d: &ScaleDecomposition) -> Vec<u8> {
    let mut s = String::from("level,weight,level_correlation,weighted_contribution\n");
    for t in &d.terms {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            t.level,
            fmt_f64(t.weight),
            fmt_opt(t.correlation),
            fmt_f64(t.weighted_correlation)
        );
    }
    let _ = writeln!(s, "recovered_rho,,,{}", fmt_f64(d.rho_recovered));
    let _ = writeln!(s, "direct_rho,,,{}", fmt_f64(d.rho_direct));
    s.into_bytes()
}

fn cmd_decompose(a: &DecomposeArgs) -> CliResult<()> {
    let x = read_series(&a.inputs[0])?;
    let y = read_series(&a.inputs[1])?;
    let d = scale_decomposition(&x, &y, &a.wavelet.filter(), a.levels)?;
    write_atomic(&a.out, &decomposition_csv(&d))?;
    if let Some(path) = &a.json {
        write_atomic(path, &to_json(&d))?;
    }
    println!("level\tweight\tcorrelation\tcontribution");
    for t in &d.terms {
        let r = t.correlation.map_or_else(|| "-".to_string(), |r| format!("{r:.6}"));
        println!("{}\t{:.6}\t{r}\t{:.6}", t.level, t.weight, t.weighted_correlation);
    }
    println!("sum of weights\t{}", fmt_f64(d.weight_sum));
    println!("recovered_rho\t{}", fmt_f64(d.rho_recovered));
    println!("direct_rho\t{}", fmt_f64(d.rho_direct));
    Ok(())
}
