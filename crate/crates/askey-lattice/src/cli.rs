//! Command-line front-end: every computation as a reproducible, scriptable
//! command with stable outputs.
//!
//! Exit codes: 0 success, 1 domain error (error name on stderr) or failed
//! verification, 2 usage error. Numbers are serialized with 17 significant
//! digits in both CSV and JSON so outputs round-trip to the exact double.

use crate::error::Error;
use crate::families::{validate, FamilyId, FamilyInstance, FamilyParams, LatticeRequest};
use crate::fermion;
use crate::spectral::{analytic_eigensystem, verify};
use crate::spin::{self, Variant};
use crate::stochastic;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;
use std::fmt::Write as _;
use std::path::PathBuf;

/// Entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap uses 0 for --help/--version and 2 for usage errors
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(msg) = init_threads() {
        eprintln!("usage error: {msg}");
        return 2;
    }
    match dispatch(cli) {
        Ok(code) => code,
        Err(RunError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            2
        }
        Err(RunError::Domain(e)) => {
            eprintln!("{}: {}", e.name(), e);
            1
        }
    }
}

/// Honor ASKEY_LATTICE_THREADS (0 or unset = automatic).
fn init_threads() -> Result<(), String> {
    match std::env::var("ASKEY_LATTICE_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .map_err(|_| format!("ASKEY_LATTICE_THREADS must be a nonnegative integer, got `{raw}`"))?;
            if n > 0 {
                // a failure here can only mean the global pool exists already
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            Ok(())
        }
    }
}

enum RunError {
    Usage(String),
    Domain(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> RunError {
        RunError::Domain(e)
    }
}

fn usage(msg: impl Into<String>) -> RunError {
    RunError::Usage(msg.into())
}

#[derive(Parser)]
#[command(
    name = "askey-lattice",
    version,
    about = "Exactly solvable inhomogeneous lattice fermion, XX-spin and birth-death systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List family tags, parameter names, and admissibility constraints
    ListFamilies(OutputArgs),
    /// Closed-form single-particle spectrum 𝓔(n)
    Spectrum(JobArgs),
    /// Orthonormal eigenvector matrix, one row per mode
    Eigvecs(JobArgs),
    /// Cross-check the analytic eigensystem against the numerical oracle
    Verify(JobArgs),
    /// Ground-state correlation matrix at chemical potential μ
    Correlation(JobArgs),
    /// Entanglement entropy sweep over leading blocks {0..L}
    Entropy(JobArgs),
    /// Time evolution: BD trajectory, quantum walk, or magnon amplitudes
    Evolve(JobArgs),
    /// Export the XX spin-chain couplings and fields as JSON
    SpinExport(JobArgs),
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output format
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to a file instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct JobArgs {
    /// JSON config file; its keys override the flags below
    #[arg(long)]
    config: Option<PathBuf>,
    /// Family tag (see list-families)
    #[arg(long)]
    family: Option<String>,
    /// Lattice size: points are x = 0..N
    #[arg(long = "N")]
    n: Option<usize>,
    /// Tail mass certified to be dropped when truncating a semi-infinite
    /// lattice
    #[arg(long = "eps-tail")]
    eps_tail: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Chemical potential
    #[arg(long)]
    mu: Option<f64>,
    /// Verification tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated time grid, e.g. 0,0.5,1
    #[arg(long)]
    times: Option<String>,
    /// Evolution kind
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Lattice site (delta start for bd/walk)
    #[arg(long)]
    site: Option<usize>,
    /// Comma-separated magnon mode coefficients β_n (default: mode 0)
    #[arg(long)]
    coeffs: Option<String>,
    /// Spin-chain sign convention
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Largest block end L for the entropy sweep (default: full lattice)
    #[arg(long = "l-max")]
    l_max: Option<usize>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Bd,
    Walk,
    Magnon,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Standard,
    Alternative,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Standard => Variant::Standard,
            VariantArg::Alternative => Variant::Alternative,
        }
    }
}

/// Fully resolved job: flags merged with (and overridden by) the config file.
struct Job {
    inst: FamilyInstance,
    mu: Option<f64>,
    tol: Option<f64>,
    times: Option<Vec<f64>>,
    kind: Option<Kind>,
    site: Option<usize>,
    coeffs: Option<Vec<f64>>,
    p0: Option<Vec<f64>>,
    variant: Variant,
    l_max: Option<usize>,
    format: Format,
    output: Option<PathBuf>,
}

fn dispatch(cli: Cli) -> Result<i32, RunError> {
    match cli.command {
        Command::ListFamilies(out) => cmd_list_families(&out),
        Command::Spectrum(args) => cmd_spectrum(Job::resolve(args)?),
        Command::Eigvecs(args) => cmd_eigvecs(Job::resolve(args)?),
        Command::Verify(args) => cmd_verify(Job::resolve(args)?),
        Command::Correlation(args) => cmd_correlation(Job::resolve(args)?),
        Command::Entropy(args) => cmd_entropy(Job::resolve(args)?),
        Command::Evolve(args) => cmd_evolve(Job::resolve(args)?),
        Command::SpinExport(args) => cmd_spin_export(Job::resolve(args)?),
    }
}

impl Job {
    fn resolve(mut args: JobArgs) -> Result<Job, RunError> {
        let config: Option<Value> = match &args.config {
            None => None,
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
                let value: Value = serde_json::from_str(&text)
                    .map_err(|e| usage(format!("config {}: {e}", path.display())))?;
                Some(value)
            }
        };
        let cfg = |key: &str| config.as_ref().and_then(|v| v.get(key));
        let cfg_f64 = |key: &str| -> Result<Option<f64>, RunError> {
            match cfg(key) {
                None => Ok(None),
                Some(v) => v
                    .as_f64()
                    .map(Some)
                    .ok_or_else(|| usage(format!("config field `{key}` must be a number"))),
            }
        };

        // family + parameters
        if let Some(v) = cfg("family") {
            args.family = Some(
                v.as_str()
                    .ok_or_else(|| usage("config field `family` must be a string"))?
                    .to_string(),
            );
        }
        let tag = args.family.as_deref().ok_or_else(|| usage("--family is required"))?;
        let id = FamilyId::from_tag(tag)
            .ok_or_else(|| usage(format!("unknown family `{tag}` (see list-families)")))?;

        let params_cfg = cfg("params").cloned();
        if let Some(p) = &params_cfg {
            if !p.is_object() {
                return Err(usage("config field `params` must be an object"));
            }
        }
        let lookup = |name: &str| -> Result<Option<f64>, RunError> {
            if let Some(p) = &params_cfg {
                if let Some(v) = p.get(name) {
                    return v
                        .as_f64()
                        .map(Some)
                        .ok_or_else(|| usage(format!("config param `{name}` must be a number")));
                }
            }
            Ok(match name {
                "q" => args.q,
                "p" => args.p,
                "a" => args.a,
                "b" => args.b,
                "c" => args.c,
                "d" => args.d,
                "beta" => args.beta,
                _ => None,
            })
        };
        let mut values = Vec::new();
        for &name in id.param_names() {
            let v = lookup(name)?
                .ok_or_else(|| usage(format!("family `{tag}` needs parameter --{name}")))?;
            values.push(v);
        }
        let params = build_params(id, &values);

        // lattice
        if let Some(v) = cfg("N") {
            args.n = Some(
                v.as_u64()
                    .ok_or_else(|| usage("config field `N` must be a nonnegative integer"))?
                    as usize,
            );
        }
        if let Some(v) = cfg_f64("eps_tail")? {
            args.eps_tail = Some(v);
        }
        let request = if id.is_finite() {
            let n = args.n.ok_or_else(|| usage(format!("finite family `{tag}` needs --N")))?;
            LatticeRequest::Finite { n }
        } else {
            if args.n.is_some() {
                return Err(usage(format!(
                    "semi-infinite family `{tag}` takes --eps-tail, not --N"
                )));
            }
            match args.eps_tail {
                None => LatticeRequest::semi_infinite_default(),
                Some(eps) => LatticeRequest::SemiInfinite { eps_tail: eps },
            }
        };
        let inst = validate(id, params, request)?;

        // command options
        if let Some(v) = cfg_f64("mu")? {
            args.mu = Some(v);
        }
        if let Some(v) = cfg_f64("tol")? {
            args.tol = Some(v);
        }
        let times = match cfg("times") {
            Some(v) => Some(json_f64_array(v, "times")?),
            None => match &args.times {
                None => None,
                Some(raw) => Some(parse_f64_list(raw, "--times")?),
            },
        };
        if let Some(v) = cfg("kind") {
            let s = v.as_str().ok_or_else(|| usage("config field `kind` must be a string"))?;
            args.kind = Some(
                Kind::from_str(s, true).map_err(|_| usage(format!("unknown kind `{s}`")))?,
            );
        }
        if let Some(v) = cfg("site") {
            args.site = Some(
                v.as_u64().ok_or_else(|| usage("config field `site` must be a nonnegative integer"))?
                    as usize,
            );
        }
        let coeffs = match cfg("coeffs") {
            Some(v) => Some(json_f64_array(v, "coeffs")?),
            None => match &args.coeffs {
                None => None,
                Some(raw) => Some(parse_f64_list(raw, "--coeffs")?),
            },
        };
        let p0 = match cfg("p0") {
            Some(v) => Some(json_f64_array(v, "p0")?),
            None => None,
        };
        if let Some(v) = cfg("variant") {
            let s = v
                .as_str()
                .ok_or_else(|| usage("config field `variant` must be a string"))?;
            args.variant = Some(
                VariantArg::from_str(s, true)
                    .map_err(|_| usage(format!("unknown variant `{s}`")))?,
            );
        }
        if let Some(v) = cfg("l_max") {
            args.l_max = Some(
                v.as_u64().ok_or_else(|| usage("config field `l_max` must be a nonnegative integer"))?
                    as usize,
            );
        }
        if let Some(v) = cfg("format") {
            let s = v.as_str().ok_or_else(|| usage("config field `format` must be a string"))?;
            args.out.format = Some(
                Format::from_str(s, true).map_err(|_| usage(format!("unknown format `{s}`")))?,
            );
        }
        if let Some(v) = cfg("output") {
            let s = v.as_str().ok_or_else(|| usage("config field `output` must be a string"))?;
            args.out.output = Some(PathBuf::from(s));
        }

        Ok(Job {
            inst,
            mu: args.mu,
            tol: args.tol,
            times,
            kind: args.kind,
            site: args.site,
            coeffs,
            p0,
            variant: args.variant.map(Variant::from).unwrap_or(Variant::Standard),
            l_max: args.l_max,
            format: args.out.format.unwrap_or(Format::Json),
            output: args.out.output,
        })
    }

    fn mu(&self) -> Result<f64, RunError> {
        self.mu.ok_or_else(|| usage("this command needs --mu"))
    }

    fn emit(&self, text: String) -> Result<i32, RunError> {
        write_output(&self.output, text)
    }
}

fn build_params(id: FamilyId, v: &[f64]) -> FamilyParams {
    // values arrive in the canonical param_names order
    match id {
        FamilyId::Krawtchouk => FamilyParams::Krawtchouk { p: v[0] },
        FamilyId::Hahn => FamilyParams::Hahn { a: v[0], b: v[1] },
        FamilyId::DualHahn => FamilyParams::DualHahn { a: v[0], b: v[1] },
        FamilyId::Racah => FamilyParams::Racah { d: v[0], a: v[1], b: v[2] },
        FamilyId::Meixner => FamilyParams::Meixner { beta: v[0], c: v[1] },
        FamilyId::Charlier => FamilyParams::Charlier { a: v[0] },
        FamilyId::QuantumQKrawtchouk => FamilyParams::QuantumQKrawtchouk { q: v[0], p: v[1] },
        FamilyId::QKrawtchouk => FamilyParams::QKrawtchouk { q: v[0], p: v[1] },
        FamilyId::AffineQKrawtchouk => FamilyParams::AffineQKrawtchouk { q: v[0], p: v[1] },
        FamilyId::QHahn => FamilyParams::QHahn { q: v[0], a: v[1], b: v[2] },
        FamilyId::DualQHahn => FamilyParams::DualQHahn { q: v[0], a: v[1], b: v[2] },
        FamilyId::QRacah => FamilyParams::QRacah { q: v[0], d: v[1], a: v[2], b: v[3] },
        FamilyId::LittleQJacobi => FamilyParams::LittleQJacobi { q: v[0], a: v[1], b: v[2] },
        FamilyId::LittleQLaguerre => FamilyParams::LittleQLaguerre { q: v[0], a: v[1] },
        FamilyId::AlSalamCarlitzII => FamilyParams::AlSalamCarlitzII { q: v[0], a: v[1] },
    }
}

fn parse_f64_list(raw: &str, what: &str) -> Result<Vec<f64>, RunError> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("{what}: `{s}` is not a number")))
        })
        .collect()
}

fn json_f64_array(v: &Value, key: &str) -> Result<Vec<f64>, RunError> {
    v.as_array()
        .ok_or_else(|| usage(format!("config field `{key}` must be an array of numbers")))?
        .iter()
        .map(|x| {
            x.as_f64()
                .ok_or_else(|| usage(format!("config field `{key}` must be an array of numbers")))
        })
        .collect()
}

fn write_output(path: &Option<PathBuf>, text: String) -> Result<i32, RunError> {
    match path {
        None => {
            print!("{text}");
            Ok(0)
        }
        Some(p) => {
            std::fs::write(p, text)
                .map_err(|e| usage(format!("cannot write {}: {e}", p.display())))?;
            Ok(0)
        }
    }
}

// ---------------------------------------------------------------------
// serialization: 17 significant digits everywhere
// ---------------------------------------------------------------------

fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Render a JSON value with floats at 17 significant digits. Object keys
/// come out in serde_json's sorted order, so output is deterministic.
fn render_json(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                out.push_str(&fmt_num(n.as_f64().unwrap()));
            }
        }
        Value::String(s) => {
            let _ = write!(out, "{}", Value::String(s.clone()));
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                render_json(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}:", Value::String(k.clone()));
                render_json(item, out);
            }
            out.push('}');
        }
    }
}

fn json_text<T: serde::Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable");
    let mut out = String::new();
    render_json(&v, &mut out);
    out.push('\n');
    out
}

struct Csv {
    text: String,
}

impl Csv {
    fn new(header: &[&str]) -> Csv {
        Csv { text: header.join(",") + "\n" }
    }

    fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    fn num_row(&mut self, ints: &[usize], nums: &[f64]) {
        let mut cells: Vec<String> = ints.iter().map(|i| i.to_string()).collect();
        cells.extend(nums.iter().map(|&v| fmt_num(v)));
        self.row(&cells);
    }
}

// ---------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------

fn cmd_list_families(out: &OutputArgs) -> Result<i32, RunError> {
    let format = out.format.unwrap_or(Format::Json);
    let text = match format {
        Format::Csv => {
            let mut csv = Csv::new(&["tag", "parameters", "lattice", "constraints"]);
            for id in FamilyId::ALL {
                csv.row(&[
                    id.tag().to_string(),
                    id.param_names().join(" "),
                    if id.is_finite() { "finite" } else { "semi-infinite" }.to_string(),
                    format!("\"{}\"", id.constraints()),
                ]);
            }
            csv.text
        }
        Format::Json => {
            let rows: Vec<Value> = FamilyId::ALL
                .iter()
                .map(|id| {
                    serde_json::json!({
                        "tag": id.tag(),
                        "parameters": id.param_names(),
                        "lattice": if id.is_finite() { "finite" } else { "semi-infinite" },
                        "constraints": id.constraints(),
                    })
                })
                .collect();
            json_text(&rows)
        }
    };
    write_output(&out.output, text)
}

fn cmd_spectrum(job: Job) -> Result<i32, RunError> {
    let energies: Vec<f64> = (0..=job.inst.n_max())
        .map(|n| job.inst.energy(n))
        .collect::<Result<_, _>>()?;
    let text = match job.format {
        Format::Csv => {
            let mut csv = Csv::new(&["n", "energy"]);
            for (n, &e) in energies.iter().enumerate() {
                csv.num_row(&[n], &[e]);
            }
            csv.text
        }
        Format::Json => {
            let rows: Vec<Value> = energies
                .iter()
                .enumerate()
                .map(|(n, &e)| serde_json::json!({"n": n, "energy": e}))
                .collect();
            json_text(&rows)
        }
    };
    job.emit(text)
}

fn cmd_eigvecs(job: Job) -> Result<i32, RunError> {
    let eig = analytic_eigensystem(&job.inst);
    let text = match job.format {
        Format::Csv => {
            let header: Vec<String> = std::iter::once("n".to_string())
                .chain((0..job.inst.n_points()).map(|x| format!("x{x}")))
                .collect();
            let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
            let mut csv = Csv::new(&header_refs);
            for (n, mode) in eig.modes.iter().enumerate() {
                csv.num_row(&[n], mode);
            }
            csv.text
        }
        Format::Json => json_text(&serde_json::json!({
            "energies": eig.energies,
            "modes": eig.modes,
        })),
    };
    job.emit(text)
}

fn cmd_verify(job: Job) -> Result<i32, RunError> {
    let tol = job.tol.unwrap_or(1e-9);
    let report = verify(&job.inst, tol)?;
    let text = match job.format {
        Format::Csv => {
            let mut csv = Csv::new(&["check", "defect", "tolerance", "pass"]);
            for c in &report.checks {
                csv.row(&[
                    c.name.clone(),
                    fmt_num(c.defect),
                    fmt_num(c.tolerance),
                    c.pass.to_string(),
                ]);
            }
            csv.text
        }
        Format::Json => json_text(&report),
    };
    let code = job.emit(text)?;
    Ok(if report.pass { code } else { 1 })
}

fn cmd_correlation(job: Job) -> Result<i32, RunError> {
    let mu = job.mu()?;
    let corr = fermion::correlation_matrix(&job.inst, mu)?;
    let text = match job.format {
        Format::Csv => {
            let header: Vec<String> = (0..corr.dim()).map(|y| format!("c{y}")).collect();
            let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
            let mut csv = Csv::new(&header_refs);
            for row in &corr.entries {
                csv.num_row(&[], row);
            }
            csv.text
        }
        Format::Json => json_text(&serde_json::json!({
            "mu": mu,
            "fermi_modes": corr.fermi.k + 1,
            "entries": corr.entries,
        })),
    };
    job.emit(text)
}

fn cmd_entropy(job: Job) -> Result<i32, RunError> {
    use rayon::prelude::*;
    let mu = job.mu()?;
    let l_max = job.l_max.unwrap_or(job.inst.n_points() - 1);
    let entropies: Vec<f64> = (0..=l_max)
        .into_par_iter()
        .map(|l| fermion::entanglement_entropy(&job.inst, mu, l))
        .collect::<Result<_, _>>()?;
    let text = match job.format {
        Format::Csv => {
            let mut csv = Csv::new(&["L", "entropy"]);
            for (l, &s) in entropies.iter().enumerate() {
                csv.num_row(&[l], &[s]);
            }
            csv.text
        }
        Format::Json => {
            let rows: Vec<Value> = entropies
                .iter()
                .enumerate()
                .map(|(l, &s)| serde_json::json!({"L": l, "entropy": s}))
                .collect();
            json_text(&rows)
        }
    };
    job.emit(text)
}

fn cmd_evolve(job: Job) -> Result<i32, RunError> {
    let kind = job.kind.ok_or_else(|| usage("evolve needs --kind {bd, walk, magnon}"))?;
    let times = job
        .times
        .clone()
        .ok_or_else(|| usage("evolve needs --times t1,t2,..."))?;
    match kind {
        Kind::Bd => {
            let p0 = match &job.p0 {
                Some(p) => stochastic::Distribution::new(p.clone())?,
                None => {
                    let site = job
                        .site
                        .ok_or_else(|| usage("evolve --kind bd needs --site (or `p0` in the config)"))?;
                    stochastic::Distribution::delta(job.inst.n_points(), site)?
                }
            };
            let traj = stochastic::bd_evolve(&job.inst, &p0, &times)?;
            let text = match job.format {
                Format::Csv => {
                    let mut csv = Csv::new(&["t", "x", "probability"]);
                    for (k, dist) in traj.iter().enumerate() {
                        for (x, &v) in dist.p.iter().enumerate() {
                            csv.row(&[fmt_num(times[k]), x.to_string(), fmt_num(v)]);
                        }
                    }
                    csv.text
                }
                Format::Json => {
                    let rows: Vec<Value> = traj
                        .iter()
                        .zip(&times)
                        .map(|(dist, &t)| serde_json::json!({"t": t, "p": dist.p}))
                        .collect();
                    json_text(&rows)
                }
            };
            job.emit(text)
        }
        Kind::Walk => {
            let site = job.site.ok_or_else(|| usage("evolve --kind walk needs --site"))?;
            let profiles: Vec<Vec<f64>> = times
                .iter()
                .map(|&t| stochastic::fermion_walk_single(&job.inst, site, t))
                .collect::<Result<_, _>>()?;
            let text = match job.format {
                Format::Csv => {
                    let mut csv = Csv::new(&["t", "x", "coefficient"]);
                    for (k, profile) in profiles.iter().enumerate() {
                        for (x, &v) in profile.iter().enumerate() {
                            csv.row(&[fmt_num(times[k]), x.to_string(), fmt_num(v)]);
                        }
                    }
                    csv.text
                }
                Format::Json => {
                    let rows: Vec<Value> = profiles
                        .iter()
                        .zip(&times)
                        .map(|(p, &t)| serde_json::json!({"t": t, "coefficients": p}))
                        .collect();
                    json_text(&rows)
                }
            };
            job.emit(text)
        }
        Kind::Magnon => {
            let mu = job.mu()?;
            let mut beta = job.coeffs.clone().unwrap_or_else(|| vec![1.0]);
            let n_modes = job.inst.n_max() + 1;
            if beta.len() > n_modes {
                return Err(usage(format!(
                    "--coeffs lists {} values but only {} modes are exposed",
                    beta.len(),
                    n_modes
                )));
            }
            beta.resize(n_modes, 0.0);
            let states: Vec<spin::MagnonState> = times
                .iter()
                .map(|&t| spin::magnon_state(&job.inst, mu, &beta, t, job.variant))
                .collect::<Result<_, _>>()?;
            let text = match job.format {
                Format::Csv => {
                    let mut csv = Csv::new(&["t", "x", "re", "im"]);
                    for state in &states {
                        for (x, &(re, im)) in state.amplitudes.iter().enumerate() {
                            csv.row(&[fmt_num(state.t), x.to_string(), fmt_num(re), fmt_num(im)]);
                        }
                    }
                    csv.text
                }
                Format::Json => json_text(&states),
            };
            job.emit(text)
        }
    }
}

fn cmd_spin_export(job: Job) -> Result<i32, RunError> {
    if job.format == Format::Csv {
        return Err(usage("spin-export emits the JSON interchange record; csv is not available"));
    }
    let mu = job.mu()?;
    let spec = spin::export_chain(&job.inst, mu, job.variant);
    job.emit(json_text(&spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn capture(args: &[&str]) -> (i32, String) {
        // route through a temp file so tests can inspect the bytes
        let dir = std::env::temp_dir().join(format!("askey-cli-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("out-{}.txt", args.join("_").replace(['/', '.'], "-")));
        let mut argv = vec!["askey-lattice"];
        argv.extend_from_slice(args);
        let path_str = path.to_str().unwrap().to_string();
        argv.push("--output");
        argv.push(&path_str);
        let code = run(argv);
        let text = std::fs::read_to_string(&path).unwrap_or_default();
        (code, text)
    }

    #[test]
    fn spectrum_hand_case() {
        let (code, text) = capture(&[
            "spectrum", "--family", "krawtchouk", "--p", "0.5", "--N", "4", "--format", "csv",
        ]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,energy");
        assert_eq!(lines.len(), 6);
        for n in 0..5usize {
            let row: Vec<&str> = lines[n + 1].split(',').collect();
            assert_eq!(row[0], n.to_string());
            assert_eq!(row[1].parse::<f64>().unwrap(), n as f64);
        }
    }

    #[test]
    fn correlation_hand_case() {
        let (code, text) = capture(&[
            "correlation", "--family", "krawtchouk", "--p", "0.5", "--N", "1", "--mu", "0.5",
            "--format", "csv",
        ]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "c0,c1");
        for line in &lines[1..] {
            for cell in line.split(',') {
                assert!((cell.parse::<f64>().unwrap() - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn verify_exit_codes_and_determinism() {
        let args = [
            "verify", "--family", "q-racah", "--q", "0.7", "--d", "0.5", "--a", "0.01", "--b",
            "0.8", "--N", "8", "--tol", "1e-9",
        ];
        let (code, first) = capture(&args);
        assert_eq!(code, 0);
        let (_, second) = capture(&args);
        assert_eq!(first, second, "outputs must be byte-identical");
        assert!(first.contains("\"pass\":true"));

        // impossible tolerance → failing report → exit 1
        let (code, text) = capture(&[
            "verify", "--family", "krawtchouk", "--p", "0.5", "--N", "8", "--tol", "1e-30",
        ]);
        assert_eq!(code, 1);
        assert!(text.contains("\"pass\":false"));
    }

    #[test]
    fn usage_and_domain_errors() {
        // missing required parameter → usage
        assert_eq!(run(["askey-lattice", "spectrum", "--family", "krawtchouk", "--N", "4"]), 2);
        // unknown family → usage
        assert_eq!(
            run(["askey-lattice", "spectrum", "--family", "nope", "--p", "0.5", "--N", "4"]),
            2
        );
        // inadmissible parameter → domain
        assert_eq!(
            run(["askey-lattice", "spectrum", "--family", "krawtchouk", "--p", "1.5", "--N", "4"]),
            1
        );
        // degenerate chemical potential → domain
        assert_eq!(
            run([
                "askey-lattice", "correlation", "--family", "krawtchouk", "--p", "0.5", "--N",
                "4", "--mu", "2.0",
            ]),
            1
        );
    }

    #[test]
    fn config_overrides_flags() {
        let dir = std::env::temp_dir().join(format!("askey-cli-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let cfg = dir.join("job.json");
        std::fs::write(&cfg, r#"{"family":"krawtchouk","params":{"p":0.5},"N":2}"#).unwrap();
        let (code, text) = capture(&[
            "spectrum", "--family", "hahn", "--a", "1", "--b", "1", "--N", "9", "--format", "csv",
            "--config", cfg.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        assert_eq!(text.lines().count(), 4); // header + n = 0,1,2
    }

    #[test]
    fn spin_export_round_trip() {
        let (code, text) = capture(&[
            "spin-export", "--family", "charlier", "--a", "2", "--mu", "1.5", "--variant",
            "alternative",
        ]);
        assert_eq!(code, 0);
        let spec: spin::SpinChainSpec = serde_json::from_str(&text).unwrap();
        let inst = validate(
            FamilyId::Charlier,
            FamilyParams::Charlier { a: 2.0 },
            LatticeRequest::semi_infinite_default(),
        )
        .unwrap();
        let direct = spin::export_chain(&inst, 1.5, Variant::Alternative);
        assert_eq!(spec.couplings, direct.couplings);
        assert_eq!(spec.fields, direct.fields);
        assert_eq!(spec.variant, direct.variant);
        assert_eq!(spec.mu, direct.mu);
    }

    #[test]
    fn evolve_kinds() {
        let (code, text) = capture(&[
            "evolve", "--kind", "bd", "--family", "krawtchouk", "--p", "0.5", "--N", "1",
            "--site", "0", "--times", "0,1", "--format", "csv",
        ]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x,probability");
        assert_eq!(lines.len(), 5);
        let p00: f64 = lines[3].split(',').nth(2).unwrap().parse().unwrap();
        assert!((p00 - (0.5 + 0.5 * (-1.0f64).exp())).abs() < 1e-15);

        let (code, _) = capture(&[
            "evolve", "--kind", "walk", "--family", "krawtchouk", "--p", "0.5", "--N", "4",
            "--site", "2", "--times", "0.5",
        ]);
        assert_eq!(code, 0);

        let (code, text) = capture(&[
            "evolve", "--kind", "magnon", "--family", "krawtchouk", "--p", "0.5", "--N", "4",
            "--mu", "0.5", "--coeffs", "1,0,0,0,0", "--times", "0,0.7", "--format", "csv",
        ]);
        assert_eq!(code, 0);
        assert!(text.starts_with("t,x,re,im\n"));
    }

    #[test]
    fn list_families_covers_all() {
        let (code, text) = capture(&["list-families", "--format", "csv"]);
        assert_eq!(code, 0);
        assert_eq!(text.lines().count(), 16); // header + 15 families
        assert!(text.contains("al-salam-carlitz-ii"));
    }
}
