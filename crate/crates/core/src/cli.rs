//! Command-line front end.
//!
//! Machine formats print every number in shortest round-trip form, so a JSON
//! or CSV value parses back to the exact `f64` that was computed.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::broadcast::{run_broadcast, run_phase_conjugate, run_purify, BroadcastReport};
use crate::error::Error;
use crate::fock::{
    oracle_broadcast, oracle_phase_conjugate, oracle_purify, OracleOptions, OracleReport,
};

/// Environment variable naming the directory that receives output files when
/// `--output` is not given.
pub const OUT_DIR_ENV: &str = "CVBROADCAST_OUT_DIR";

/// Header of the `sweep` CSV.
pub const CSV_HEADER: &str = "nbar_in,N,M,gamma_in,gamma_out,bound,nbar_out,superbroadcast";

/// Minimum fidelity of each oracle copy to its predicted Gaussian state.
pub const MIN_FIDELITY: f64 = 0.999;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "cvbroadcast",
    version,
    about = "Optimal broadcasting of continuous-variable states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal N → M broadcasting (M > N).
    Broadcast(MapArgs),
    /// Optimal purification (M ≤ N).
    Purify(MapArgs),
    /// Phase-conjugating broadcast by heterodyne and re-preparation.
    Conjugate(MapArgs),
    /// Broadcast/purify over a grid of thermal photon numbers and (N, M).
    Sweep(SweepArgs),
    /// Re-run circuits in truncated Fock space and compare with closed forms.
    Verify(VerifyArgs),
    /// Print the optimal-noise bounds.
    Bounds(BoundsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Text => "txt",
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MapArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 0.0)]
    pub nbar: f64,
    /// Input amplitude, e.g. `0.3`, `0.3+0.1i`, `-0.2i`.
    #[arg(long, default_value = "0", value_parser = parse_complex, allow_hyphen_values = true)]
    pub alpha: Complex64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 0.0)]
    pub nbar_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub nbar_max: f64,
    /// Number of grid points between `nbar-min` and `nbar-max` inclusive.
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
    /// Explicit photon numbers; overrides the min/max/steps grid.
    #[arg(long, value_delimiter = ',')]
    pub nbar_list: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub n_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "3")]
    pub m_list: Vec<usize>,
    #[arg(long, value_parser = parse_complex, default_value = "0", allow_hyphen_values = true)]
    pub alpha: Complex64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleMap {
    Broadcast,
    Purify,
    Conjugate,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Oracle for a single case; the default suite runs when `--n` is absent.
    #[arg(long, value_enum, default_value = "broadcast")]
    pub map: OracleMap,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub nbar: f64,
    #[arg(long, value_parser = parse_complex, default_value = "0", allow_hyphen_values = true)]
    pub alpha: Complex64,
    /// Fock levels per mode; overrides the per-case defaults of the suite.
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long)]
    pub working_cutoff: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 0.0)]
    pub nbar: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Parses `a`, `bi`, `a+bi` or `a-bi` (`j` is accepted for `i`).
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse complex number {s:?}; expected e.g. 0.3+0.1i");
    if t.is_empty() {
        return Err(bad());
    }
    let num = |p: &str| -> Result<f64, String> {
        let v = match p {
            "" | "+" => 1.0,
            "-" => -1.0,
            _ => p.parse::<f64>().map_err(|_| bad())?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad())
        }
    };
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        let re = t.parse::<f64>().map_err(|_| bad())?;
        return if re.is_finite() {
            Ok(Complex64::new(re, 0.0))
        } else {
            Err(bad())
        };
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = &body[..k];
            if re.is_empty() || re == "+" || re == "-" {
                return Err(bad());
            }
            Ok(Complex64::new(num(re)?, num(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, num(body)?)),
    }
}

/// JSON form of a map report; field order is part of the interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportJson {
    pub n: usize,
    pub m: usize,
    pub nbar_in: f64,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub gamma_in: f64,
    pub gamma_out: f64,
    pub nbar_out: f64,
    pub bound: f64,
    pub saturated: bool,
    pub superbroadcast: bool,
    /// `C_ij` as `[re, im]` pairs.
    pub correlations: Vec<Vec<[f64; 2]>>,
}

impl From<&BroadcastReport> for ReportJson {
    fn from(r: &BroadcastReport) -> Self {
        let c = &r.correlations;
        Self {
            n: r.n,
            m: r.m,
            nbar_in: r.nbar_in,
            alpha_re: r.alpha_in.re,
            alpha_im: r.alpha_in.im,
            gamma_in: r.gamma_in,
            gamma_out: r.gamma_out,
            nbar_out: r.nbar_out,
            bound: r.bound,
            saturated: r.saturated,
            superbroadcast: r.superbroadcast,
            correlations: (0..c.nrows())
                .map(|i| {
                    (0..c.ncols())
                        .map(|j| [c[(i, j)].re, c[(i, j)].im])
                        .collect()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub nbar_in: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub gamma_in: f64,
    pub gamma_out: f64,
    pub bound: f64,
    pub nbar_out: f64,
    pub superbroadcast: bool,
}

impl SweepRow {
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.nbar_in,
            self.n,
            self.m,
            self.gamma_in,
            self.gamma_out,
            self.bound,
            self.nbar_out,
            self.superbroadcast
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopyJson {
    pub amplitude_re: f64,
    pub amplitude_im: f64,
    pub noise_sum: f64,
    pub nbar_eff: f64,
    pub fidelity: f64,
}

/// One `verify` case: either an oracle comparison or the error that stopped it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyCase {
    pub map: String,
    pub n: usize,
    pub m: usize,
    pub nbar: f64,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub cutoff: usize,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub predicted_nbar: Option<f64>,
    pub copies: Vec<CopyJson>,
    pub noise_error: Option<f64>,
    pub noise_tolerance: Option<f64>,
    pub amplitude_error: Option<f64>,
    pub amplitude_tolerance: Option<f64>,
    pub min_fidelity: Option<f64>,
    pub trace_deficit: Option<f64>,
    pub predicted_tail: Option<f64>,
    pub noise_stderr: Option<f64>,
    pub amplitude_stderr: Option<f64>,
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy)]
struct OracleCase {
    map: OracleMap,
    n: usize,
    m: usize,
    nbar: f64,
    alpha: Complex64,
    cutoff: usize,
}

fn map_name(map: OracleMap) -> &'static str {
    match map {
        OracleMap::Broadcast => "broadcast",
        OracleMap::Purify => "purify",
        OracleMap::Conjugate => "conjugate",
    }
}

/// The default `verify` suite.
fn default_suite() -> Vec<OracleCase> {
    let c = |map, n, m, nbar, re, cutoff| OracleCase {
        map,
        n,
        m,
        nbar,
        alpha: Complex64::new(re, 0.0),
        cutoff,
    };
    use OracleMap::*;
    vec![
        c(Broadcast, 2, 2, 0.5, 0.3, 12),
        c(Broadcast, 2, 3, 0.5, 0.2, 10),
        c(Broadcast, 1, 2, 0.0, 0.4, 10),
        c(Purify, 2, 1, 1.0, 0.3, 14),
        c(Purify, 3, 1, 0.6, 0.0, 10),
        c(Purify, 2, 2, 1.0, 0.0, 14),
        c(Conjugate, 2, 1, 1.0, 0.3, 12),
        c(Conjugate, 1, 1, 0.0, 0.0, 12),
    ]
}

/// Outcome of a command: the rendered output and the exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub output: String,
    pub code: i32,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DeficitBudget { .. } => EXIT_FAILURE,
        _ => EXIT_USAGE,
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn render_report(r: &BroadcastReport, format: Format) -> String {
    match format {
        Format::Json => json(&ReportJson::from(r)),
        Format::Csv => {
            let row = SweepRow {
                nbar_in: r.nbar_in,
                n: r.n,
                m: r.m,
                gamma_in: r.gamma_in,
                gamma_out: r.gamma_out,
                bound: r.bound,
                nbar_out: r.nbar_out,
                superbroadcast: r.superbroadcast,
            };
            format!("{CSV_HEADER}\n{}\n", row.csv())
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "map             {:?}", r.kind);
            let _ = writeln!(s, "N -> M          {} -> {}", r.n, r.m);
            let _ = writeln!(
                s,
                "alpha           {:.9}{:+.9}i",
                r.alpha_in.re, r.alpha_in.im
            );
            let _ = writeln!(s, "nbar_in         {:.9}", r.nbar_in);
            let _ = writeln!(s, "gamma_in        {:.9}", r.gamma_in);
            let _ = writeln!(s, "gamma_out       {:.9}", r.gamma_out);
            let _ = writeln!(s, "nbar_out        {:.9}", r.nbar_out);
            let _ = writeln!(s, "bound           {:.9}", r.bound);
            let _ = writeln!(s, "saturated       {}", r.saturated);
            let _ = writeln!(s, "superbroadcast  {}", r.superbroadcast);
            let a = r.per_copy_amplitude[0];
            let _ = writeln!(s, "copy amplitude  {:.9}{:+.9}i", a.re, a.im);
            let _ = writeln!(s, "correlations");
            let c = &r.correlations;
            for i in 0..c.nrows() {
                let row: Vec<String> = (0..c.ncols())
                    .map(|j| format!("{:.9}{:+.9}i", c[(i, j)].re, c[(i, j)].im))
                    .collect();
                let _ = writeln!(s, "  {}", row.join("  "));
            }
            s
        }
    }
}

pub fn cmd_map(kind: &Command) -> Outcome {
    let (args, result) = match kind {
        Command::Broadcast(a) => (a, run_broadcast(a.n, a.m, a.nbar, a.alpha)),
        Command::Purify(a) => (a, run_purify(a.n, a.m, a.nbar, a.alpha)),
        Command::Conjugate(a) => (a, run_phase_conjugate(a.n, a.m, a.nbar, a.alpha)),
        _ => unreachable!("cmd_map is only called for map commands"),
    };
    match result {
        Ok(r) => Outcome {
            output: render_report(&r, args.out.format),
            code: EXIT_OK,
        },
        Err(e) => error_outcome(&e),
    }
}

fn error_outcome(e: &Error) -> Outcome {
    Outcome {
        output: format!("error: {e}\n"),
        code: exit_code(e),
    }
}

/// Grid rows in `nbar`, then `N`, then `M` order. Pairs with `M ≤ N` use the
/// purification map; the others use broadcasting.
pub fn sweep_rows(args: &SweepArgs) -> Result<Vec<SweepRow>, Error> {
    let nbars: Vec<f64> = match &args.nbar_list {
        Some(list) => list.clone(),
        None => match args.steps {
            0 => return Err(Error::Domain("sweep needs at least one step".into())),
            1 => vec![args.nbar_min],
            k => (0..k)
                .map(|i| {
                    args.nbar_min + (args.nbar_max - args.nbar_min) * i as f64 / (k - 1) as f64
                })
                .collect(),
        },
    };
    let mut grid = Vec::new();
    for &nbar in &nbars {
        for &n in &args.n_list {
            for &m in &args.m_list {
                grid.push((nbar, n, m));
            }
        }
    }
    grid.par_iter()
        .map(|&(nbar, n, m)| {
            let r = if m <= n {
                run_purify(n, m, nbar, args.alpha)?
            } else {
                run_broadcast(n, m, nbar, args.alpha)?
            };
            Ok(SweepRow {
                nbar_in: nbar,
                n,
                m,
                gamma_in: r.gamma_in,
                gamma_out: r.gamma_out,
                bound: r.bound,
                nbar_out: r.nbar_out,
                superbroadcast: r.superbroadcast,
            })
        })
        .collect()
}

pub fn cmd_sweep(args: &SweepArgs) -> Outcome {
    let rows = match sweep_rows(args) {
        Ok(rows) => rows,
        Err(e) => return error_outcome(&e),
    };
    let output = match args.format {
        Format::Json => json(&rows),
        Format::Csv | Format::Text => {
            let mut s = format!("{CSV_HEADER}\n");
            for row in &rows {
                s.push_str(&row.csv());
                s.push('\n');
            }
            s
        }
    };
    Outcome {
        output,
        code: EXIT_OK,
    }
}

fn run_case(case: &OracleCase, args: &VerifyArgs) -> Result<OracleReport, Error> {
    let opts = OracleOptions {
        cutoff: case.cutoff,
        working_cutoff: args.working_cutoff,
        samples: args.samples,
        seed: args.seed,
        ..OracleOptions::default()
    };
    match case.map {
        OracleMap::Broadcast => oracle_broadcast(case.n, case.m, case.nbar, case.alpha, &opts),
        OracleMap::Purify => oracle_purify(case.n, case.m, case.nbar, case.alpha, &opts),
        OracleMap::Conjugate => {
            oracle_phase_conjugate(case.n, case.m, case.nbar, case.alpha, &opts)
        }
    }
}

fn verify_case(case: &OracleCase, args: &VerifyArgs) -> (VerifyCase, Option<i32>) {
    let conj = case.map == OracleMap::Conjugate;
    let mut out = VerifyCase {
        map: map_name(case.map).to_string(),
        n: case.n,
        m: case.m,
        nbar: case.nbar,
        alpha_re: case.alpha.re,
        alpha_im: case.alpha.im,
        cutoff: case.cutoff,
        samples: conj.then_some(args.samples),
        seed: conj.then_some(args.seed),
        predicted_nbar: None,
        copies: Vec::new(),
        noise_error: None,
        noise_tolerance: None,
        amplitude_error: None,
        amplitude_tolerance: None,
        min_fidelity: None,
        trace_deficit: None,
        predicted_tail: None,
        noise_stderr: None,
        amplitude_stderr: None,
        error: None,
        pass: false,
    };
    match run_case(case, args) {
        Ok(r) => {
            out.predicted_nbar = Some(r.predicted.nbar_eff);
            out.copies = r
                .copies
                .iter()
                .map(|c| CopyJson {
                    amplitude_re: c.stats.amplitude.re,
                    amplitude_im: c.stats.amplitude.im,
                    noise_sum: c.stats.noise_sum,
                    nbar_eff: c.stats.nbar_eff,
                    fidelity: c.fidelity,
                })
                .collect();
            out.noise_error = Some(r.max_noise_error());
            out.noise_tolerance = Some(r.noise_tolerance());
            out.amplitude_error = Some(r.max_amplitude_error());
            out.amplitude_tolerance = Some(r.amplitude_tolerance());
            out.min_fidelity = Some(r.min_fidelity());
            out.trace_deficit = Some(r.trace_deficit);
            out.predicted_tail = Some(r.predicted_tail);
            out.noise_stderr = r.noise_stderr;
            out.amplitude_stderr = r.amplitude_stderr;
            out.pass = r.passes(MIN_FIDELITY);
            (out, None)
        }
        Err(e) => {
            out.error = Some(e.to_string());
            (out, Some(exit_code(&e)))
        }
    }
}

fn render_verify(cases: &[VerifyCase], format: Format) -> String {
    match format {
        Format::Json => json(&cases),
        Format::Csv => {
            let mut s = String::from(
                "map,N,M,nbar,alpha_re,alpha_im,cutoff,predicted_nbar,noise_error,noise_tolerance,amplitude_error,min_fidelity,trace_deficit,pass\n",
            );
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            for c in cases {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    c.map,
                    c.n,
                    c.m,
                    c.nbar,
                    c.alpha_re,
                    c.alpha_im,
                    c.cutoff,
                    opt(c.predicted_nbar),
                    opt(c.noise_error),
                    opt(c.noise_tolerance),
                    opt(c.amplitude_error),
                    opt(c.min_fidelity),
                    opt(c.trace_deficit),
                    c.pass
                );
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for c in cases {
                let head = format!(
                    "{:<9} N={} M={} nbar={} alpha={}{:+}i D={}",
                    c.map, c.n, c.m, c.nbar, c.alpha_re, c.alpha_im, c.cutoff
                );
                match &c.error {
                    Some(e) => {
                        let _ = writeln!(s, "FAIL {head}\n     {e}");
                    }
                    None => {
                        let _ = writeln!(
                            s,
                            "{} {head}\n     predicted nbar {:.6}  |d noise| {:.3e} (tol {:.1e})  |d amp| {:.3e}  min fidelity {:.6}  deficit {:.3e}",
                            if c.pass { "PASS" } else { "FAIL" },
                            c.predicted_nbar.unwrap_or(f64::NAN),
                            c.noise_error.unwrap_or(f64::NAN),
                            c.noise_tolerance.unwrap_or(f64::NAN),
                            c.amplitude_error.unwrap_or(f64::NAN),
                            c.min_fidelity.unwrap_or(f64::NAN),
                            c.trace_deficit.unwrap_or(f64::NAN),
                        );
                        for (i, copy) in c.copies.iter().enumerate() {
                            let _ = writeln!(
                                s,
                                "     copy {i}: nbar_eff {:.6}  amplitude {:.6}{:+.6}i  fidelity {:.6}",
                                copy.nbar_eff, copy.amplitude_re, copy.amplitude_im, copy.fidelity
                            );
                        }
                    }
                }
            }
            let passed = cases.iter().filter(|c| c.pass).count();
            let _ = writeln!(s, "{passed}/{} cases within tolerance", cases.len());
            s
        }
    }
}

pub fn cmd_verify(args: &VerifyArgs) -> Outcome {
    let cases: Vec<OracleCase> = match (args.n, args.m) {
        (Some(n), Some(m)) => vec![OracleCase {
            map: args.map,
            n,
            m,
            nbar: args.nbar,
            alpha: args.alpha,
            cutoff: args.cutoff.unwrap_or(10),
        }],
        (None, None) => default_suite()
            .into_iter()
            .map(|c| OracleCase {
                cutoff: args.cutoff.unwrap_or(c.cutoff),
                ..c
            })
            .collect(),
        _ => {
            return Outcome {
                output: "error: --n and --m must be given together\n".into(),
                code: EXIT_USAGE,
            }
        }
    };
    let results: Vec<(VerifyCase, Option<i32>)> =
        cases.par_iter().map(|c| verify_case(c, args)).collect();
    let code = if results.iter().any(|(_, e)| *e == Some(EXIT_USAGE)) {
        EXIT_USAGE
    } else if results.iter().all(|(c, _)| c.pass) {
        EXIT_OK
    } else {
        EXIT_FAILURE
    };
    let cases: Vec<VerifyCase> = results.into_iter().map(|(c, _)| c).collect();
    Outcome {
        output: render_verify(&cases, args.out.format),
        code,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsJson {
    pub n: usize,
    pub m: usize,
    pub nbar_in: f64,
    pub gamma_in: f64,
    pub broadcast: Option<f64>,
    pub purification: f64,
    pub phase_conjugation: f64,
    pub superbroadcast_threshold: Option<f64>,
}

pub fn cmd_bounds(args: &BoundsArgs) -> Outcome {
    let gamma = args.nbar + 0.5;
    let result = (|| -> Result<BoundsJson, Error> {
        let purification = bounds::purification_bound(gamma, args.n)?;
        let phase_conjugation = bounds::phase_conj_bound(gamma, args.n)?;
        let broadcast = (args.m > args.n)
            .then(|| bounds::broadcast_bound(gamma, args.n, args.m))
            .transpose()?;
        let superbroadcast_threshold = (args.m > args.n && args.n > 1)
            .then(|| bounds::superbroadcast_threshold(args.n, args.m))
            .transpose()?;
        Ok(BoundsJson {
            n: args.n,
            m: args.m,
            nbar_in: args.nbar,
            gamma_in: gamma,
            broadcast,
            purification,
            phase_conjugation,
            superbroadcast_threshold,
        })
    })();
    let b = match result {
        Ok(b) => b,
        Err(e) => return error_outcome(&e),
    };
    let opt = |v: Option<f64>, fmt: fn(f64) -> String| v.map(fmt).unwrap_or_else(|| "n/a".into());
    let output = match args.out.format {
        Format::Json => json(&b),
        Format::Csv => format!(
            "nbar_in,N,M,gamma_in,broadcast,purification,phase_conjugation,superbroadcast_threshold\n{},{},{},{},{},{},{},{}\n",
            b.nbar_in,
            b.n,
            b.m,
            b.gamma_in,
            opt(b.broadcast, |x| x.to_string()),
            b.purification,
            b.phase_conjugation,
            opt(b.superbroadcast_threshold, |x| x.to_string()),
        ),
        Format::Text => format!(
            "N -> M                    {} -> {}\ngamma_in                  {:.9}\nbroadcast                 {}\npurification              {:.9}\nphase conjugation         {:.9}\nsuperbroadcast threshold  {}\n",
            b.n,
            b.m,
            b.gamma_in,
            opt(b.broadcast, |x| format!("{x:.9}")),
            b.purification,
            b.phase_conjugation,
            opt(b.superbroadcast_threshold, |x| format!("{x:.9}")),
        ),
    };
    Outcome {
        output,
        code: EXIT_OK,
    }
}

fn destination(command: &Command) -> (Option<PathBuf>, &'static str, Format) {
    match command {
        Command::Broadcast(a) => (a.out.output.clone(), "broadcast", a.out.format),
        Command::Purify(a) => (a.out.output.clone(), "purify", a.out.format),
        Command::Conjugate(a) => (a.out.output.clone(), "conjugate", a.out.format),
        Command::Sweep(a) => (a.output.clone(), "sweep", a.format),
        Command::Verify(a) => (a.out.output.clone(), "verify", a.out.format),
        Command::Bounds(a) => (a.out.output.clone(), "bounds", a.out.format),
    }
}

pub fn execute(command: &Command) -> Outcome {
    match command {
        Command::Broadcast(_) | Command::Purify(_) | Command::Conjugate(_) => cmd_map(command),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bounds(a) => cmd_bounds(a),
    }
}

/// Runs a parsed command line, writing successful output to stdout, to
/// `--output`, or into the directory named by [`OUT_DIR_ENV`].
pub fn run(cli: &Cli) -> i32 {
    let outcome = execute(&cli.command);
    if outcome.code == EXIT_USAGE {
        eprint!("{}", outcome.output);
        return outcome.code;
    }
    let (path, stem, format) = destination(&cli.command);
    let path = path.or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{stem}.{}", format.extension())))
    });
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                if let Err(e) = std::fs::create_dir_all(dir) {
                    eprintln!("error: cannot create {}: {e}", dir.display());
                    return EXIT_FAILURE;
                }
            }
            if let Err(e) = std::fs::write(&p, &outcome.output) {
                eprintln!("error: cannot write {}: {e}", p.display());
                return EXIT_FAILURE;
            }
            log::info!("wrote {}", p.display());
        }
        None => print!("{}", outcome.output),
    }
    outcome.code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_syntax() {
        let ok = |s: &str, re: f64, im: f64| {
            assert_eq!(parse_complex(s).unwrap(), Complex64::new(re, im), "{s}");
        };
        ok("0.3", 0.3, 0.0);
        ok("0.3+0.0i", 0.3, 0.0);
        ok("0.3-0.2i", 0.3, -0.2);
        ok("-0.3+0.2i", -0.3, 0.2);
        ok("-0.2i", 0.0, -0.2);
        ok("i", 0.0, 1.0);
        ok("1-i", 1.0, -1.0);
        ok("1e-3+2E+1i", 1e-3, 20.0);
        ok("-1.5e-2-3e-1j", -1.5e-2, -0.3);
        ok(" 0.5 + 0.5i ", 0.5, 0.5);
        for bad in ["", "abc", "0,3", "1+", "+i+i", "nan", "inf+1i", "0.3+0.2"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn sweep_dispatches_purify_below_diagonal() {
        let args = SweepArgs {
            nbar_min: 0.0,
            nbar_max: 1.0,
            steps: 2,
            nbar_list: None,
            n_list: vec![4],
            m_list: vec![2, 5],
            alpha: Complex64::new(0.0, 0.0),
            format: Format::Csv,
            output: None,
        };
        let rows = sweep_rows(&args).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!((rows[0].nbar_in, rows[0].m), (0.0, 2));
        assert_eq!((rows[3].nbar_in, rows[3].m), (1.0, 5));
        assert!((rows[2].nbar_out - 0.25).abs() < 1e-12);
    }
}
