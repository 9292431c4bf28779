//! Command-line front end. `run` maps subcommands to library calls and
//! returns the process exit code; all output goes through the given writers.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::dispersion::{critical_point, resonance_sigma, roots_k, WaveParams};
use crate::error::Error;
use crate::funcspace::{TermFunction, YKind};
use crate::indices::{
    bf_coefficients, bubble_coefficients, find_kappa1, find_kappa2, ind1, ind2, ind2_mu0_variant_from,
    nu_bridges_mielke, series_at_resonance, series_at_zero, bubble_spectrum, Bubble,
};
use crate::monodromy::{build_series, VALIDITY_GUARD};
use crate::reduction::ReductionContext;
use crate::stokes::{build_stokes, stokes_residual, CollocationGrid};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_CONSISTENCY: i32 = 3;
/// Output files could not be written.
pub const EXIT_IO: i32 = 4;

/// Largest `ε` accepted for spectrum output.
pub const EPS_MAX: f64 = 0.01;

const TOOL: &str = concat!("wavestab ", env!("CARGO_PKG_VERSION"));

#[derive(Parser, Debug)]
#[command(name = "wavestab", version, about = "Spectral instability indices of small-amplitude Stokes waves")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Roots k_j(σ) of the dispersion relation.
    Dispersion {
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
    },
    /// Stokes expansion coefficient tables.
    Stokes {
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..=3))]
        order: u32,
    },
    /// Monodromy coefficients a^(m,n)(T) with per-entry provenance.
    Monodromy {
        #[arg(long)]
        kappa: f64,
        /// A frequency value or `res:N` for the N-th resonance.
        #[arg(long, default_value = "0")]
        sigma: SigmaSpec,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(0..=2))]
        order: u32,
    },
    /// Instability indices and thresholds.
    Indices(IndicesArgs),
    /// Spectrum tracing.
    Spectrum {
        #[command(subcommand)]
        cmd: SpectrumCmd,
    },
    /// Parallel sweep over a kappa grid.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
#[command(args_conflicts_with_subcommands = true)]
struct IndicesArgs {
    #[command(subcommand)]
    find: Option<FindCmd>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long, value_enum, default_value_t = Which::Both)]
    which: Which,
}

#[derive(Subcommand, Debug)]
enum FindCmd {
    /// Zero of ind₁ on [1, 2].
    FindKappa1,
    /// Zero of ind₂ via its two sign witnesses.
    FindKappa2,
}

#[derive(Subcommand, Debug)]
enum SpectrumCmd {
    /// Leading-order unstable bubble near the second resonance.
    Bubble {
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        eps: f64,
        /// CSV path; a JSON sidecar is written next to it.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Which {
    Ind1,
    Ind2,
    Both,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Ind1,
    Ind2,
    Resonances,
    Bubble,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// `lo:hi:count`.
    #[arg(long)]
    kappa: KappaRange,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ind1")]
    targets: Vec<Target>,
    #[arg(long, default_value_t = 0.001)]
    eps: f64,
    /// Output path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum SigmaSpec {
    Value(f64),
    Resonance(i32),
}

impl FromStr for SigmaSpec {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Some(n) = s.strip_prefix("res:") {
            return n.parse().map(SigmaSpec::Resonance).map_err(|e| format!("bad resonance order {n:?}: {e}"));
        }
        s.parse().map(SigmaSpec::Value).map_err(|e| format!("bad sigma {s:?}: {e}"))
    }
}

/// `lo:hi:count` grid, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KappaRange {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl FromStr for KappaRange {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts[..] else {
            return Err(format!("expected lo:hi:count, got {s:?}"));
        };
        let lo: f64 = lo.parse().map_err(|e| format!("bad lo: {e}"))?;
        let hi: f64 = hi.parse().map_err(|e| format!("bad hi: {e}"))?;
        let count: usize = count.parse().map_err(|e| format!("bad count: {e}"))?;
        if !(lo > 0.0) || !(hi >= lo) || count == 0 || (count == 1 && hi != lo) {
            return Err(format!("need 0 < lo <= hi and count >= 1 (count = 1 only when lo = hi), got {s:?}"));
        }
        Ok(Self { lo, hi, count })
    }
}

impl KappaRange {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.hi } else { self.lo + step * i as f64 }).collect()
    }
}

enum CliError {
    Lib(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Lib(Error::Domain(_) | Error::UnsupportedDegree(_)) => EXIT_DOMAIN,
            CliError::Lib(_) => EXIT_CONSISTENCY,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Lib(e) => e.to_string(),
            CliError::Io(e) => format!("i/o error: {e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Runs the tool on `argv` (including the program name).
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{shown}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{shown}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.cmd, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.code()
        }
    }
}

fn dispatch(cmd: Cmd, out: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Cmd::Dispersion { kappa, sigma } => emit(out, &dispersion_json(kappa, sigma)?),
        Cmd::Stokes { kappa, order } => emit(out, &stokes_json(kappa, order as usize)?),
        Cmd::Monodromy { kappa, sigma, order } => emit(out, &monodromy_json(kappa, sigma, order)?),
        Cmd::Indices(a) => match (a.find, a.kappa) {
            (Some(FindCmd::FindKappa1), _) => {
                let k = find_kappa1()?;
                writeln!(out, "{}", sig_digits(k, 10))?;
                Ok(())
            }
            (Some(FindCmd::FindKappa2), _) => {
                let k = find_kappa2()?;
                writeln!(out, "{}", sig_digits(k.kappa2, 13))?;
                Ok(())
            }
            (None, Some(kappa)) => emit(out, &indices_json(kappa, a.which)?),
            (None, None) => Err(Error::Domain("indices needs --kappa or a find-kappa subcommand".into()).into()),
        },
        Cmd::Spectrum { cmd: SpectrumCmd::Bubble { kappa, eps, out: path, samples } } => {
            let summary = write_bubble(kappa, eps, samples, &path)?;
            emit(out, &summary)
        }
        Cmd::Sweep(a) => run_sweep(&a, out),
    }
}

fn emit(out: &mut dyn Write, v: &Value) -> CliResult<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("json values serialize"))?;
    Ok(())
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("library types serialize")
}

fn envelope(command: &str, inputs: Value, outputs: Value, provenance: Value) -> Value {
    json!({ "tool": TOOL, "command": command, "inputs": inputs, "outputs": outputs, "provenance": provenance })
}

fn guard_json() -> Value {
    json!({ "delta_max": VALIDITY_GUARD, "gamma_max": VALIDITY_GUARD, "eps_max": EPS_MAX })
}

/// `v` rounded to `n` significant digits, without exponent for moderate
/// magnitudes.
pub fn sig_digits(v: f64, n: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i64;
    let decimals = (n as i64 - 1 - mag).max(0) as usize;
    format!("{v:.decimals$}")
}

/// Fixed 17-significant-digit rendering for CSV cells.
pub fn csv_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn dispersion_json(kappa: f64, sigma: f64) -> CliResult<Value> {
    let wp = WaveParams::new(kappa)?;
    let p = roots_k(&wp, sigma)?;
    let (k_c, sigma_c) = critical_point(&wp)?;
    let mut res = BTreeMap::new();
    for n in [2, 3] {
        if let Ok(r) = resonance_sigma(&wp, n) {
            res.insert(n.to_string(), to_value(&r));
        }
    }
    Ok(envelope(
        "dispersion",
        json!({ "kappa": kappa, "sigma": sigma }),
        json!({
            "wave": to_value(&wp),
            "roots": [p.k1, p.k2, p.k3, p.k4],
            "point": to_value(&p),
            "critical": { "k_c": k_c, "sigma_c": sigma_c },
            "resonances": res,
        }),
        json!({ "roots": "bracketed Newton on the dispersion relation" }),
    ))
}

#[derive(Serialize)]
struct TermRow {
    coeff: C64,
    x_freq: String,
    x_power: u32,
    y_kind: &'static str,
    y_rate: String,
    y_power: u32,
}

fn term_table(f: &TermFunction) -> Vec<TermRow> {
    f.terms()
        .map(|t| TermRow {
            coeff: t.coeff,
            x_freq: t.key.x_freq.to_string(),
            x_power: t.key.x_power,
            y_kind: match t.key.y_kind {
                YKind::Const => "const",
                YKind::Cosh => "cosh",
                YKind::Sinh => "sinh",
            },
            y_rate: t.key.y_rate.to_string(),
            y_power: t.key.y_power,
        })
        .collect()
}

fn stokes_json(kappa: f64, order: usize) -> CliResult<Value> {
    let wp = WaveParams::new(kappa)?;
    let se = build_stokes(&wp)?;
    let grid = CollocationGrid::default();
    let mut orders = Vec::new();
    for n in 1..=order {
        orders.push(json!({
            "order": n,
            "phibar": se.phibar[n - 1],
            "mu": se.mu[n],
            "phi": term_table(&se.phi[n - 1]),
            "eta": term_table(&se.eta[n - 1]),
            "u": term_table(&se.u[n - 1]),
            "residual": stokes_residual(&se, n, &grid)?,
        }));
    }
    Ok(envelope(
        "stokes",
        json!({ "kappa": kappa, "order": order }),
        json!({
            "mu0": se.mu[0],
            "frequency_basis": "(n_kappa,n_k2,n_k4,n_unit)",
            "orders": orders,
        }),
        json!({ "coefficients": "closed_form", "cross_check": "re-derived by undetermined coefficients" }),
    ))
}

fn monodromy_json(kappa: f64, sigma: SigmaSpec, order: u32) -> CliResult<Value> {
    let wp = WaveParams::new(kappa)?;
    let ctx = match sigma {
        SigmaSpec::Value(s) => ReductionContext::new(&wp, s)?,
        SigmaSpec::Resonance(n) => ReductionContext::at_resonance(&wp, n)?,
    };
    let ms = build_series(ctx, order)?;
    let inputs = match sigma {
        SigmaSpec::Value(s) => json!({ "kappa": kappa, "sigma": s, "order": order }),
        SigmaSpec::Resonance(n) => json!({ "kappa": kappa, "resonance": n, "order": order }),
    };
    Ok(envelope(
        "monodromy",
        inputs,
        json!({
            "sigma": ms.sigma,
            "dim": ms.dim,
            "period": ms.period,
            "resonance": to_value(&ms.resonance),
            "coeffs": to_value(&ms.coeffs),
        }),
        json!({ "entries": to_value(&ms.provenance), "layout": "row-major, row = mode, column = driving column" }),
    ))
}

fn indices_json(kappa: f64, which: Which) -> CliResult<Value> {
    let wp = WaveParams::new(kappa)?;
    let mut outputs = serde_json::Map::new();
    if matches!(which, Which::Ind1 | Which::Both) {
        let ms = series_at_zero(&wp, true)?;
        let bf = bf_coefficients(&ms)?;
        outputs.insert("ind1".into(), json!(ind1(kappa)));
        outputs.insert("nu".into(), json!(nu_bridges_mielke(&wp)?));
        outputs.insert("benjamin_feir".into(), to_value(&bf));
    }
    if matches!(which, Which::Ind2 | Which::Both) {
        let ms = series_at_resonance(&wp, 2, true)?;
        let bc = bubble_coefficients(&ms)?;
        outputs.insert("ind2".into(), json!(bc.ind2));
        outputs.insert("ind2_mu0_variant".into(), json!(ind2_mu0_variant_from(&ms)?));
        outputs.insert("bubble".into(), to_value(&bc));
    }
    Ok(envelope(
        "indices",
        json!({ "kappa": kappa, "which": format!("{which:?}").to_lowercase() }),
        Value::Object(outputs),
        json!({
            "ind1": "closed polynomial",
            "coefficients": "closed-form entries where available, pipeline elsewhere",
            "guard": guard_json(),
        }),
    ))
}

fn bubble_for(kappa: f64, eps: f64, samples: usize) -> CliResult<(crate::indices::BubbleCoeffs, Bubble)> {
    let wp = WaveParams::new(kappa)?;
    let ms = series_at_resonance(&wp, 2, true)?;
    let bc = bubble_coefficients(&ms)?;
    let b = bubble_spectrum(&bc, eps, samples)?;
    Ok((bc, b))
}

fn write_bubble(kappa: f64, eps: f64, samples: usize, path: &Path) -> CliResult<Value> {
    let (bc, b) = bubble_for(kappa, eps, samples)?;
    let mut csv = String::from("gamma,re_delta,im_delta\n");
    for p in &b.points {
        csv.push_str(&format!("{},{},{}\n", csv_float(p.gamma), csv_float(p.delta.re), csv_float(p.delta.im)));
    }
    std::fs::write(path, csv)?;
    let sidecar = sidecar_path(path);
    let v = envelope(
        "spectrum bubble",
        json!({ "kappa": kappa, "eps": eps, "samples": samples }),
        json!({
            "csv": path.display().to_string(),
            "rows": b.points.len(),
            "interval": b.interval,
            "gamma_star": b.gamma_star,
            "max_re": b.max_re,
            "sqrt_ind2_eps2": bc.ind2.max(0.0).sqrt() * eps * eps,
            "coefficients": to_value(&bc),
        }),
        json!({
            "curve": "leading-order Weierstrass roots; upper branch then lower branch",
            "coefficients": "closed-form entries where available, pipeline elsewhere",
            "guard": guard_json(),
        }),
    );
    std::fs::write(&sidecar, serde_json::to_string_pretty(&v).expect("json values serialize") + "\n")?;
    Ok(json!({ "csv": path.display().to_string(), "sidecar": sidecar.display().to_string(), "rows": b.points.len() }))
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// One sweep row; absent fields were not requested.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SweepRow {
    pub kappa: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ind1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ind2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bubble_max_re: Option<f64>,
}

fn sweep_row(kappa: f64, targets: &[Target], eps: f64) -> crate::Result<SweepRow> {
    let wp = WaveParams::new(kappa)?;
    let mut row = SweepRow { kappa, ..Default::default() };
    for t in targets {
        match t {
            Target::Ind1 => row.ind1 = Some(ind1(kappa)),
            Target::Ind2 => {
                let bc = ind2(&wp)?;
                row.ind2 = Some(bc.ind2);
                row.witnesses = Some(bc.witnesses);
            }
            Target::Resonances => {
                row.sigma2 = Some(resonance_sigma(&wp, 2)?.sigma_n);
                row.sigma3 = Some(resonance_sigma(&wp, 3)?.sigma_n);
            }
            Target::Bubble => {
                let bc = ind2(&wp)?;
                row.bubble_max_re = Some(bubble_spectrum(&bc, eps, 3)?.max_re);
            }
        }
    }
    Ok(row)
}

/// Rows in grid order; the first failing row (by index) is reported.
pub fn sweep_rows(range: &KappaRange, targets: &[Target], eps: f64) -> crate::Result<Vec<SweepRow>> {
    let mut targets = targets.to_vec();
    targets.sort();
    targets.dedup();
    let results: Vec<_> = range.values().into_par_iter().map(|k| sweep_row(k, &targets, eps)).collect();
    results.into_iter().collect()
}

fn sweep_csv(rows: &[SweepRow], targets: &[Target]) -> String {
    let has = |t: Target| targets.contains(&t);
    let mut header = vec!["kappa"];
    if has(Target::Ind1) {
        header.push("ind1");
    }
    if has(Target::Ind2) {
        header.extend(["ind2", "witness1", "witness2"]);
    }
    if has(Target::Resonances) {
        header.extend(["sigma2", "sigma3"]);
    }
    if has(Target::Bubble) {
        header.push("bubble_max_re");
    }
    let mut s = header.join(",") + "\n";
    for r in rows {
        let mut cells = vec![csv_float(r.kappa)];
        let mut put = |v: Option<f64>| {
            if let Some(v) = v {
                cells.push(csv_float(v));
            }
        };
        put(r.ind1);
        put(r.ind2);
        put(r.witnesses.map(|w| w[0]));
        put(r.witnesses.map(|w| w[1]));
        put(r.sigma2);
        put(r.sigma3);
        put(r.bubble_max_re);
        s += &cells.join(",");
        s.push('\n');
    }
    s
}

fn run_sweep(a: &SweepArgs, out: &mut dyn Write) -> CliResult<()> {
    if !(a.eps >= 0.0) || a.eps > EPS_MAX {
        return Err(Error::Domain(format!("eps must lie in [0, {EPS_MAX}], got {}", a.eps)).into());
    }
    if a.targets.contains(&Target::Bubble) && a.eps == 0.0 {
        return Err(Error::Domain("bubble target needs eps > 0".into()).into());
    }
    let rows = sweep_rows(&a.kappa, &a.targets, a.eps)?;
    let text = match a.format {
        Format::Csv => sweep_csv(&rows, &a.targets),
        Format::Json => {
            let v = envelope(
                "sweep",
                json!({ "kappa": to_value(&a.kappa), "targets": to_value(&a.targets), "eps": a.eps }),
                json!({ "rows": to_value(&rows) }),
                json!({ "coefficients": "pipeline with closed-form entries where available", "guard": guard_json() }),
            );
            serde_json::to_string_pretty(&v).expect("json values serialize") + "\n"
        }
    };
    match &a.out {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}
