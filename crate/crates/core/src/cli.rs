//! The `qwalk` command line.
//!
//! Every command writes its data to `--out` (or stdout) and, when `--out` is
//! given, a sidecar `<out>.manifest.json` holding the resolved parameters.
//! `qwalk replay <manifest>` re-executes a manifest; the data file it
//! produces is byte-identical to the original.
//!
//! Exit codes: 0 success, 2 validation or usage error, 3 I/O error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    self, check_ergodicity, chi_square_uniformity, ds_entropy_bound, empirical_distribution, entropy_scan,
    fourier_coefficients, lag_joint, mutual_information, scan_maximum, shannon_entropy, tv_to_uniform, ChiSquare,
    CosetWitness, ErgodicityVerdict, ScanMode,
};
use crate::coin::{CoinKind, CoinOperator, CoinState};
use crate::error::Error;
use crate::io::{self, fmt_f64, Format};
use crate::protocols::{
    run_cesaro_protocol, run_direct_protocol, run_reset_protocol_with, transition_kernel, RandomSource, ResetTarget,
};
use crate::spectral::{decompose, limiting_correction_closed_form};
use crate::walk::{CycleConfig, WalkerState};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(#[from] clap::Error),
    #[error("{0}")]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) => e.exit_code(),
            CliError::Core(Error::Io(_)) => 3,
            CliError::Core(_) => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "qwalk", version, about = "Quantum-walk sampling on the N-cycle")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a sample sequence with one of the protocols.
    Sample(SampleArgs),
    /// Transition kernel, Fourier moduli, ergodicity verdict and entropy bound.
    Kernel(KernelArgs),
    /// Entropy of the exact (direct or time-averaged) distribution versus T.
    Scan(ScanArgs),
    /// Diagnostics report for a stored sequence.
    Analyze(AnalyzeArgs),
    /// Eigenphases, degeneracy groups and the limiting time-averaged distribution.
    Spectrum(SpectrumArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

fn parse_coin(s: &str) -> Result<CoinOperator, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_coin_state(s: &str) -> Result<CoinState, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct WalkArgs {
    /// Number of cycle vertices N (>= 3).
    #[arg(short = 'N', long, default_value_t = 25)]
    pub nodes: usize,
    /// symmetric | hadamard | custom:<re00,im00,re01,im01,re10,im10,re11,im11>
    #[arg(long, default_value = "symmetric", value_parser = parse_coin)]
    pub coin: CoinOperator,
    /// Initial coin state as re_up,im_up,re_down,im_down.
    #[arg(long, value_parser = parse_coin_state, default_value = "0.7071067811865476,0,0.7071067811865476,0")]
    pub coin0: CoinState,
    /// Starting vertex.
    #[arg(long, default_value_t = 0)]
    pub x0: usize,
}

impl WalkArgs {
    fn config(&self) -> CliResult<CycleConfig> {
        Ok(CycleConfig::new(self.nodes, self.coin)?)
    }

    fn canonical(&self, args: &mut Vec<String>) {
        args.extend([
            "--nodes".into(),
            self.nodes.to_string(),
            "--coin".into(),
            self.coin.to_string(),
            "--coin0".into(),
            self.coin0.to_string(),
            "--x0".into(),
            self.x0.to_string(),
        ]);
    }

    fn params(&self, p: &mut BTreeMap<String, serde_json::Value>) {
        p.insert("nodes".into(), self.nodes.into());
        p.insert("coin".into(), self.coin.to_string().into());
        p.insert("coin0".into(), self.coin0.to_string().into());
        p.insert("x0".into(), self.x0.into());
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// csv | json
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    Direct,
    Cesaro,
    Reset,
    ResetUniform,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[arg(value_enum)]
    pub protocol: ProtocolArg,
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Walk steps m per round (reset protocols).
    #[arg(short = 'm', long)]
    pub steps: Option<usize>,
    /// Time T (direct) or time range 0..=T (cesaro).
    #[arg(short = 'T', long)]
    pub t_max: Option<usize>,
    #[arg(short = 'S', long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    #[arg(short = 'm', long)]
    pub steps: usize,
    /// Support threshold for the ergodicity check.
    #[arg(long, default_value_t = analysis::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Largest convolution power for the entropy-bound curve.
    #[arg(long, default_value_t = 100)]
    pub ds_max: u32,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanModeArg {
    Direct,
    Cesaro,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    #[arg(short = 'T', long)]
    pub t_max: usize,
    #[arg(long, value_enum, default_value_t = ScanModeArg::Cesaro)]
    pub mode: ScanModeArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Sequence file (CSV or JSON).
    pub input: PathBuf,
    /// Lags for the joint counts and mutual information.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub lags: Vec<usize>,
    /// Output file for the JSON report; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Require the closed-form limit (odd N, symmetric coin only).
    #[arg(long)]
    pub closed_form: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Where to write the regenerated output (defaults to the recorded one).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Sidecar written next to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments that reproduce the run, without `--out`.
    pub args: Vec<String>,
    pub params: BTreeMap<String, serde_json::Value>,
    pub output: Option<String>,
    pub version: String,
    pub timestamp: String,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

struct Rendered {
    text: String,
    command: &'static str,
    args: Vec<String>,
    params: BTreeMap<String, serde_json::Value>,
}

/// Parses `argv` (including the program name) and executes the command.
pub fn run<I, T>(argv: I) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    execute(cli.command)
}

pub fn execute(command: Command) -> CliResult<()> {
    let (rendered, out) = match command {
        Command::Sample(a) => {
            let out = a.output.out.clone();
            (cmd_sample(&a)?, out)
        }
        Command::Kernel(a) => {
            let out = a.output.out.clone();
            (cmd_kernel(&a)?, out)
        }
        Command::Scan(a) => {
            let out = a.output.out.clone();
            (cmd_scan(&a)?, out)
        }
        Command::Analyze(a) => {
            let out = a.out.clone();
            (cmd_analyze(&a)?, out)
        }
        Command::Spectrum(a) => {
            let out = a.output.out.clone();
            (cmd_spectrum(&a)?, out)
        }
        Command::Replay(a) => return replay(&a),
    };
    emit(rendered, out.as_deref())
}

fn emit(rendered: Rendered, out: Option<&Path>) -> CliResult<()> {
    let Some(path) = out else {
        print!("{}", rendered.text);
        return Ok(());
    };
    std::fs::write(path, &rendered.text).map_err(Error::from)?;
    let manifest = RunManifest {
        command: rendered.command.to_string(),
        args: rendered.args,
        params: rendered.params,
        output: Some(path.display().to_string()),
        version: VERSION.to_string(),
        timestamp: chrono::Utc::now().to_rfc3339(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(manifest_path(path), json + "\n").map_err(Error::from)?;
    Ok(())
}

fn replay(args: &ReplayArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.manifest).map_err(Error::from)?;
    let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let out = args.out.clone().or_else(|| manifest.output.as_ref().map(PathBuf::from));
    let mut argv = vec!["qwalk".to_string()];
    argv.extend(manifest.args);
    if let Some(out) = out {
        argv.push("--out".into());
        argv.push(out.display().to_string());
    }
    let cli = Cli::try_parse_from(argv)?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(Error::validation("a manifest cannot record a replay").into());
    }
    execute(cli.command)
}

fn meta_lines(out: &mut String, title: &str, meta: &[(&str, String)]) {
    let _ = writeln!(out, "# {title}");
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}={v}");
    }
}

// ---------------------------------------------------------------- sample

fn cmd_sample(a: &SampleArgs) -> CliResult<Rendered> {
    let config = a.walk.config()?;
    let mut rng = RandomSource::new(a.seed);
    let (seq, time_flag, time_value) = match a.protocol {
        ProtocolArg::Reset | ProtocolArg::ResetUniform => {
            let m = a
                .steps
                .ok_or_else(|| Error::validation("reset sampling requires --steps m (m >= 1)"))?;
            if m == 0 {
                return Err(Error::validation("--steps must satisfy m >= 1").into());
            }
            if a.walk.x0 != 0 {
                return Err(Error::validation("reset sampling starts at x0 = 0").into());
            }
            let target = if a.protocol == ProtocolArg::Reset {
                ResetTarget::Measured
            } else {
                ResetTarget::Uniform
            };
            let seq = run_reset_protocol_with(&config, m, a.walk.coin0, a.samples, target, &mut rng)?;
            (seq, "--steps", m)
        }
        ProtocolArg::Direct | ProtocolArg::Cesaro => {
            let t = a
                .t_max
                .ok_or_else(|| Error::validation("direct and cesaro sampling require --t-max T"))?;
            let seq = if a.protocol == ProtocolArg::Direct {
                if t == 0 {
                    return Err(Error::validation("--t-max must satisfy T >= 1 for direct sampling").into());
                }
                run_direct_protocol(&config, t, a.walk.coin0, a.walk.x0, a.samples, &mut rng)?
            } else {
                run_cesaro_protocol(&config, t, a.walk.coin0, a.walk.x0, a.samples, &mut rng)?
            };
            (seq, "--t-max", t)
        }
    };

    let protocol = seq.meta().protocol.to_string();
    let mut args = vec!["sample".to_string(), protocol.clone()];
    a.walk.canonical(&mut args);
    args.extend([
        time_flag.to_string(),
        time_value.to_string(),
        "--samples".into(),
        a.samples.to_string(),
        "--seed".into(),
        a.seed.to_string(),
        "--format".into(),
        format_name(a.output.format).into(),
    ]);
    let mut params = BTreeMap::new();
    a.walk.params(&mut params);
    params.insert("protocol".into(), protocol.into());
    params.insert(time_flag.trim_start_matches("--").replace('-', "_"), time_value.into());
    params.insert("samples".into(), a.samples.into());
    params.insert("seed".into(), a.seed.into());
    params.insert("format".into(), format_name(a.output.format).into());
    params.insert("rng".into(), crate::protocols::RNG_ALGORITHM.into());
    Ok(Rendered {
        text: io::sequence_to_string(&seq, a.output.format),
        command: "sample",
        args,
        params,
    })
}

// ---------------------------------------------------------------- kernel

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMeta {
    pub nodes: usize,
    pub steps: usize,
    pub coin: String,
    pub coin0: String,
    pub epsilon: f64,
    pub ds_max: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub n: u32,
    pub bound: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelData {
    pub mu: Vec<f64>,
    pub fourier_re: Vec<f64>,
    pub fourier_im: Vec<f64>,
    pub fourier_abs: Vec<f64>,
    pub ergodicity: ErgodicityVerdict,
    pub ds_bound: Vec<BoundPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub meta: KernelMeta,
    pub data: KernelData,
}

pub fn kernel_report(walk: &WalkArgs, steps: usize, epsilon: f64, ds_max: u32) -> CliResult<KernelReport> {
    let config = walk.config()?;
    let kernel = transition_kernel(&config, steps, walk.coin0)?;
    let spectrum = fourier_coefficients(kernel.mu());
    let ergodicity = check_ergodicity(kernel.mu(), epsilon)?;
    let mut ds_bound = Vec::with_capacity(ds_max as usize);
    let mut power = kernel.mu().clone();
    for n in 1..=ds_max {
        if n > 1 {
            power = crate::protocols::convolve(kernel.mu(), &power)?;
        }
        ds_bound.push(BoundPoint {
            n,
            bound: ds_entropy_bound(&spectrum, n),
            entropy: shannon_entropy(&power),
        });
    }
    let coeffs = spectrum.coefficients();
    Ok(KernelReport {
        meta: KernelMeta {
            nodes: config.nodes(),
            steps,
            coin: config.coin().to_string(),
            coin0: walk.coin0.to_string(),
            epsilon,
            ds_max,
        },
        data: KernelData {
            mu: kernel.mu().weights().to_vec(),
            fourier_re: coeffs.iter().map(|z| z.re).collect(),
            fourier_im: coeffs.iter().map(|z| z.im).collect(),
            fourier_abs: coeffs.iter().map(|z| z.norm()).collect(),
            ergodicity,
            ds_bound,
        },
    })
}

fn witness_text(w: Option<CosetWitness>) -> String {
    match w {
        Some(w) => format!("d={};r={}", w.divisor, w.offset),
        None => "none".into(),
    }
}

impl KernelReport {
    pub fn to_csv(&self) -> String {
        let m = &self.meta;
        let d = &self.data;
        let mut out = String::new();
        meta_lines(
            &mut out,
            "qwalk transition kernel",
            &[
                ("nodes", m.nodes.to_string()),
                ("steps", m.steps.to_string()),
                ("coin", m.coin.clone()),
                ("coin0", m.coin0.clone()),
                ("epsilon", fmt_f64(m.epsilon)),
                ("ds_max", m.ds_max.to_string()),
                ("ergodic", d.ergodicity.ergodic.to_string()),
                ("witness", witness_text(d.ergodicity.witness)),
            ],
        );
        out.push_str("x,mu,fourier_re,fourier_im,fourier_abs\n");
        for x in 0..d.mu.len() {
            let _ = writeln!(
                out,
                "{x},{},{},{},{}",
                fmt_f64(d.mu[x]),
                fmt_f64(d.fourier_re[x]),
                fmt_f64(d.fourier_im[x]),
                fmt_f64(d.fourier_abs[x])
            );
        }
        out.push('\n');
        out.push_str("n,ds_bound,entropy\n");
        for p in &d.ds_bound {
            let _ = writeln!(out, "{},{},{}", p.n, fmt_f64(p.bound), fmt_f64(p.entropy));
        }
        out
    }

    pub fn from_csv(text: &str) -> crate::Result<Self> {
        let doc = SectionedCsv::parse(text)?;
        let get = |k: &str| doc.meta(k);
        let witness = match get("witness")?.as_str() {
            "none" => None,
            w => {
                let parsed = w.split_once(';').and_then(|(a, b)| {
                    Some(CosetWitness {
                        divisor: a.strip_prefix("d=")?.parse().ok()?,
                        offset: b.strip_prefix("r=")?.parse().ok()?,
                    })
                });
                Some(parsed.ok_or_else(|| Error::parse(0, format!("invalid witness '{w}'")))?)
            }
        };
        let epsilon: f64 = parse_field(&get("epsilon")?, "epsilon")?;
        let table = doc.table(0, &["x", "mu", "fourier_re", "fourier_im", "fourier_abs"])?;
        let bounds = doc.table(1, &["n", "ds_bound", "entropy"])?;
        let col = |t: &[Vec<String>], c: usize| -> crate::Result<Vec<f64>> {
            t.iter().map(|r| parse_field(&r[c], "number")).collect()
        };
        let mu = col(table, 1)?;
        crate::dist::ProbDist::new(mu.clone())?;
        Ok(KernelReport {
            meta: KernelMeta {
                nodes: parse_field(&get("nodes")?, "nodes")?,
                steps: parse_field(&get("steps")?, "steps")?,
                coin: get("coin")?,
                coin0: get("coin0")?,
                epsilon,
                ds_max: parse_field(&get("ds_max")?, "ds_max")?,
            },
            data: KernelData {
                mu,
                fourier_re: col(table, 2)?,
                fourier_im: col(table, 3)?,
                fourier_abs: col(table, 4)?,
                ergodicity: ErgodicityVerdict {
                    ergodic: parse_field(&get("ergodic")?, "ergodic")?,
                    witness,
                    support_threshold: epsilon,
                },
                ds_bound: bounds
                    .iter()
                    .map(|r| {
                        Ok(BoundPoint {
                            n: parse_field(&r[0], "n")?,
                            bound: parse_field(&r[1], "ds_bound")?,
                            entropy: parse_field(&r[2], "entropy")?,
                        })
                    })
                    .collect::<crate::Result<_>>()?,
            },
        })
    }
}

fn parse_field<T: std::str::FromStr>(raw: &str, what: &str) -> crate::Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>()
        .map_err(|e| Error::parse(0, format!("invalid {what} '{raw}': {e}")))
}

/// `# key=value` metadata followed by blank-line separated tables.
struct SectionedCsv {
    meta: BTreeMap<String, String>,
    tables: Vec<(Vec<String>, Vec<Vec<String>>)>,
}

impl SectionedCsv {
    fn parse(text: &str) -> crate::Result<Self> {
        let mut meta = BTreeMap::new();
        let mut tables: Vec<(Vec<String>, Vec<Vec<String>>)> = Vec::new();
        let mut in_table = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(c) = line.strip_prefix('#') {
                if let Some((k, v)) = c.split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            if line.is_empty() {
                in_table = false;
                continue;
            }
            let cells: Vec<String> = line.split(',').map(str::to_string).collect();
            if !in_table {
                tables.push((cells, Vec::new()));
                in_table = true;
            } else {
                let (header, rows) = tables.last_mut().expect("table started");
                if cells.len() != header.len() {
                    return Err(Error::parse(
                        i + 1,
                        format!("expected {} columns, found {}", header.len(), cells.len()),
                    ));
                }
                rows.push(cells);
            }
        }
        Ok(Self { meta, tables })
    }

    fn meta(&self, key: &str) -> crate::Result<String> {
        self.meta
            .get(key)
            .cloned()
            .ok_or_else(|| Error::parse(0, format!("missing metadata '{key}'")))
    }

    fn table(&self, idx: usize, columns: &[&str]) -> crate::Result<&[Vec<String>]> {
        let (header, rows) = self
            .tables
            .get(idx)
            .ok_or_else(|| Error::parse(0, format!("missing table {}", idx + 1)))?;
        if header.iter().map(String::as_str).ne(columns.iter().copied()) {
            return Err(Error::parse(0, format!("unexpected header {header:?}")));
        }
        Ok(rows)
    }
}

fn cmd_kernel(a: &KernelArgs) -> CliResult<Rendered> {
    if a.walk.x0 != 0 {
        return Err(Error::validation("the transition kernel is defined from x0 = 0").into());
    }
    let report = kernel_report(&a.walk, a.steps, a.epsilon, a.ds_max)?;
    let text = match a.output.format {
        Format::Csv => report.to_csv(),
        Format::Json => json_line(&report),
    };
    let mut args = vec!["kernel".to_string()];
    a.walk.canonical(&mut args);
    args.extend([
        "--steps".into(),
        a.steps.to_string(),
        "--epsilon".into(),
        fmt_f64(a.epsilon),
        "--ds-max".into(),
        a.ds_max.to_string(),
        "--format".into(),
        format_name(a.output.format).into(),
    ]);
    let mut params = BTreeMap::new();
    a.walk.params(&mut params);
    params.insert("steps".into(), a.steps.into());
    params.insert("epsilon".into(), a.epsilon.into());
    params.insert("ds_max".into(), a.ds_max.into());
    params.insert("format".into(), format_name(a.output.format).into());
    Ok(Rendered {
        text,
        command: "kernel",
        args,
        params,
    })
}

fn json_line<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("report serializes");
    s.push('\n');
    s
}

// ---------------------------------------------------------------- scan

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanMeta {
    pub nodes: usize,
    pub coin: String,
    pub coin0: String,
    pub x0: usize,
    pub t_max: usize,
    pub mode: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub t: usize,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanData {
    pub rows: Vec<ScanRow>,
    pub max: ScanRow,
    pub log2_nodes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub meta: ScanMeta,
    pub data: ScanData,
}

impl ScanReport {
    pub fn to_csv(&self) -> String {
        let m = &self.meta;
        let mut out = String::new();
        meta_lines(
            &mut out,
            "qwalk entropy scan",
            &[
                ("nodes", m.nodes.to_string()),
                ("coin", m.coin.clone()),
                ("coin0", m.coin0.clone()),
                ("x0", m.x0.to_string()),
                ("t_max", m.t_max.to_string()),
                ("mode", m.mode.clone()),
                ("log2_nodes", fmt_f64(self.data.log2_nodes)),
                ("max_t", self.data.max.t.to_string()),
                ("max_entropy", fmt_f64(self.data.max.entropy)),
            ],
        );
        out.push_str("T,entropy\n");
        for r in &self.data.rows {
            let _ = writeln!(out, "{},{}", r.t, fmt_f64(r.entropy));
        }
        out
    }

    pub fn from_csv(text: &str) -> crate::Result<Self> {
        let doc = SectionedCsv::parse(text)?;
        let rows = doc
            .table(0, &["T", "entropy"])?
            .iter()
            .map(|r| {
                Ok(ScanRow {
                    t: parse_field(&r[0], "T")?,
                    entropy: parse_field(&r[1], "entropy")?,
                })
            })
            .collect::<crate::Result<Vec<_>>>()?;
        Ok(ScanReport {
            meta: ScanMeta {
                nodes: parse_field(&doc.meta("nodes")?, "nodes")?,
                coin: doc.meta("coin")?,
                coin0: doc.meta("coin0")?,
                x0: parse_field(&doc.meta("x0")?, "x0")?,
                t_max: parse_field(&doc.meta("t_max")?, "t_max")?,
                mode: doc.meta("mode")?,
            },
            data: ScanData {
                rows,
                max: ScanRow {
                    t: parse_field(&doc.meta("max_t")?, "max_t")?,
                    entropy: parse_field(&doc.meta("max_entropy")?, "max_entropy")?,
                },
                log2_nodes: parse_field(&doc.meta("log2_nodes")?, "log2_nodes")?,
            },
        })
    }
}

pub fn scan_report(walk: &WalkArgs, t_max: usize, mode: ScanModeArg) -> CliResult<ScanReport> {
    let config = walk.config()?;
    let scan_mode = match mode {
        ScanModeArg::Direct => ScanMode::Direct,
        ScanModeArg::Cesaro => ScanMode::Cesaro,
    };
    let scan = entropy_scan(&config, walk.coin0, walk.x0, t_max, scan_mode)?;
    let (max_t, max_h) = scan_maximum(&scan).expect("scan is non-empty");
    Ok(ScanReport {
        meta: ScanMeta {
            nodes: config.nodes(),
            coin: config.coin().to_string(),
            coin0: walk.coin0.to_string(),
            x0: walk.x0,
            t_max,
            mode: match mode {
                ScanModeArg::Direct => "direct".into(),
                ScanModeArg::Cesaro => "cesaro".into(),
            },
        },
        data: ScanData {
            rows: scan.into_iter().map(|(t, entropy)| ScanRow { t, entropy }).collect(),
            max: ScanRow {
                t: max_t,
                entropy: max_h,
            },
            log2_nodes: (config.nodes() as f64).log2(),
        },
    })
}

fn cmd_scan(a: &ScanArgs) -> CliResult<Rendered> {
    let report = scan_report(&a.walk, a.t_max, a.mode)?;
    let text = match a.output.format {
        Format::Csv => report.to_csv(),
        Format::Json => json_line(&report),
    };
    let mut args = vec!["scan".to_string()];
    a.walk.canonical(&mut args);
    args.extend([
        "--t-max".into(),
        a.t_max.to_string(),
        "--mode".into(),
        report.meta.mode.clone(),
        "--format".into(),
        format_name(a.output.format).into(),
    ]);
    let mut params = BTreeMap::new();
    a.walk.params(&mut params);
    params.insert("t_max".into(), a.t_max.into());
    params.insert("mode".into(), report.meta.mode.clone().into());
    params.insert("format".into(), format_name(a.output.format).into());
    Ok(Rendered {
        text,
        command: "scan",
        args,
        params,
    })
}

// ---------------------------------------------------------------- analyze

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagReport {
    pub lag: usize,
    pub counts: Vec<Vec<u64>>,
    pub frequencies: Vec<Vec<f64>>,
    pub mutual_information: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeData {
    pub empirical: Vec<f64>,
    pub entropy: f64,
    pub tv_to_uniform: f64,
    /// Absent when the sequence is shorter than 5N.
    pub chi_square: Option<ChiSquare>,
    pub lags: Vec<LagReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub meta: crate::protocols::SequenceMeta,
    pub data: AnalyzeData,
}

pub fn analyze_report(seq: &crate::protocols::SampleSequence, lags: &[usize]) -> crate::Result<AnalyzeReport> {
    let empirical = empirical_distribution(seq)?;
    let chi_square = if seq.len() >= 5 * seq.nodes() {
        Some(chi_square_uniformity(seq)?)
    } else {
        None
    };
    let lags = lags
        .iter()
        .map(|&lag| {
            let joint = lag_joint(seq, lag)?;
            Ok(LagReport {
                lag,
                counts: joint.rows(),
                frequencies: joint.frequencies(),
                mutual_information: mutual_information(&joint),
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(AnalyzeReport {
        meta: seq.meta().clone(),
        data: AnalyzeData {
            entropy: shannon_entropy(&empirical),
            tv_to_uniform: tv_to_uniform(&empirical),
            empirical: empirical.into_vec(),
            chi_square,
            lags,
        },
    })
}

fn cmd_analyze(a: &AnalyzeArgs) -> CliResult<Rendered> {
    let text = std::fs::read_to_string(&a.input).map_err(Error::from)?;
    let seq = io::sequence_from_str(&text)?;
    let report = analyze_report(&seq, &a.lags)?;
    let lags: Vec<String> = a.lags.iter().map(usize::to_string).collect();
    let args = vec![
        "analyze".to_string(),
        a.input.display().to_string(),
        "--lags".into(),
        lags.join(","),
    ];
    let mut params = BTreeMap::new();
    params.insert("input".into(), a.input.display().to_string().into());
    params.insert("lags".into(), serde_json::to_value(&a.lags).expect("lags serialize"));
    Ok(Rendered {
        text: json_line(&report),
        command: "analyze",
        args,
        params,
    })
}

// ---------------------------------------------------------------- spectrum

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub nodes: usize,
    pub coin: String,
    pub coin0: String,
    pub x0: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPhases {
    pub k: usize,
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub group_plus: usize,
    pub group_minus: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumData {
    pub eigenphases: Vec<BlockPhases>,
    /// Each group lists `[k, branch]` pairs, branch 0 = λ⁺.
    pub groups: Vec<Vec<[usize; 2]>>,
    pub limiting_generic: Vec<f64>,
    pub limiting_closed_form: Option<Vec<f64>>,
    pub tv_to_uniform: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub meta: SpectrumMeta,
    pub data: SpectrumData,
}

pub fn spectrum_report(walk: &WalkArgs, require_closed_form: bool) -> CliResult<SpectrumReport> {
    let config = walk.config()?;
    let decomp = decompose(&config);
    let initial = WalkerState::localized(config, walk.x0, walk.coin0)?;
    let limit = decomp.limiting_distribution(&initial)?;

    let applicable = config.nodes() % 2 == 1 && config.coin().kind() == CoinKind::Symmetric;
    let closed = if require_closed_form || applicable {
        // Closed form is for a start at 0; other starts are its translate.
        let cf = limiting_correction_closed_form(&config, walk.coin0)?;
        Some(cf.distribution.shifted(walk.x0).into_vec())
    } else {
        None
    };

    let mut group_of = BTreeMap::new();
    for (g, members) in decomp.groups().iter().enumerate() {
        for idx in members {
            group_of.insert((idx.k, idx.branch), g);
        }
    }
    let eigenphases = decomp
        .blocks()
        .iter()
        .map(|b| {
            let [p, m] = b.phases();
            BlockPhases {
                k: b.k(),
                theta_plus: p,
                theta_minus: m,
                group_plus: group_of[&(b.k(), 0)],
                group_minus: group_of[&(b.k(), 1)],
            }
        })
        .collect();
    Ok(SpectrumReport {
        meta: SpectrumMeta {
            nodes: config.nodes(),
            coin: config.coin().to_string(),
            coin0: walk.coin0.to_string(),
            x0: walk.x0,
        },
        data: SpectrumData {
            eigenphases,
            groups: decomp
                .groups()
                .iter()
                .map(|g| g.iter().map(|i| [i.k, i.branch]).collect())
                .collect(),
            tv_to_uniform: tv_to_uniform(&limit),
            limiting_generic: limit.into_vec(),
            limiting_closed_form: closed,
        },
    })
}

impl SpectrumReport {
    pub fn to_csv(&self) -> String {
        let m = &self.meta;
        let d = &self.data;
        let mut out = String::new();
        meta_lines(
            &mut out,
            "qwalk spectrum",
            &[
                ("nodes", m.nodes.to_string()),
                ("coin", m.coin.clone()),
                ("coin0", m.coin0.clone()),
                ("x0", m.x0.to_string()),
                ("groups", d.groups.len().to_string()),
                ("tv_to_uniform", fmt_f64(d.tv_to_uniform)),
            ],
        );
        out.push_str("k,theta_plus,theta_minus,group_plus,group_minus\n");
        for b in &d.eigenphases {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                b.k,
                fmt_f64(b.theta_plus),
                fmt_f64(b.theta_minus),
                b.group_plus,
                b.group_minus
            );
        }
        out.push('\n');
        match &d.limiting_closed_form {
            Some(cf) => {
                out.push_str("v,pi_generic,pi_closed_form\n");
                for (v, (g, c)) in d.limiting_generic.iter().zip(cf).enumerate() {
                    let _ = writeln!(out, "{v},{},{}", fmt_f64(*g), fmt_f64(*c));
                }
            }
            None => {
                out.push_str("v,pi_generic\n");
                for (v, g) in d.limiting_generic.iter().enumerate() {
                    let _ = writeln!(out, "{v},{}", fmt_f64(*g));
                }
            }
        }
        out
    }
}

fn cmd_spectrum(a: &SpectrumArgs) -> CliResult<Rendered> {
    let report = spectrum_report(&a.walk, a.closed_form)?;
    let text = match a.output.format {
        Format::Csv => report.to_csv(),
        Format::Json => json_line(&report),
    };
    let mut args = vec!["spectrum".to_string()];
    a.walk.canonical(&mut args);
    if a.closed_form {
        args.push("--closed-form".into());
    }
    args.extend(["--format".into(), format_name(a.output.format).into()]);
    let mut params = BTreeMap::new();
    a.walk.params(&mut params);
    params.insert("closed_form".into(), a.closed_form.into());
    params.insert("format".into(), format_name(a.output.format).into());
    Ok(Rendered {
        text,
        command: "spectrum",
        args,
        params,
    })
}
