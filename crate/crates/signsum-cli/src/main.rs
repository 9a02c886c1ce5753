//! Command-line harness over the `signsum` library: exact ball
//! probabilities for CSV vector files and structured families, extremal
//! construction emitters, scan/report generators, and the sign-balancing
//! tools, all with deterministic output.
//!
//! Conventions: probabilities print as `count/denominator` with the
//! denominator expanded (e.g. `24/128`); report subcommands print a JSON
//! document with a `schema` field and arbitrary-precision counts as
//! decimal strings; failures print a JSON diagnostic on stderr and exit 1
//! (usage errors exit 2). `RLO_THREADS` caps the worker-thread count.

use std::fs::{File, OpenOptions};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::{json, Value};

use signsum::balance::{certificate, swanepoel_signs};
use signsum::binom::{franel_asymptotic_log2, franel_sum_exact, log2_biguint};
use signsum::enumerate::{local_search_minimize, prob_ball_mitm, prob_ball_naive};
use signsum::structured::{
    check_f_range, f0, f1, make_counterexample, make_mixed, make_orthogonal, make_triangle,
    prob_mixed_exact, prob_orthogonal_exact, prob_perturbed_exact, prob_simplicial_exact,
    scan_counterexample_row, MixedConfig, OrthogonalConfig, PerturbedBasisConfig,
    SimplicialConfig,
};
use signsum::vectors::{norm_sq_point, BallQuery, ExactProbability, UnitVectorConfig};
use signsum::{Error, Result};

#[derive(Parser)]
#[command(name = "signsum", version, about = "Exact and asymptotic ball probabilities for random ±1 sums of unit vectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact P(‖Σεᵢvᵢ‖² ≤ r²) for vectors read from CSV
    Enum(EnumArgs),
    /// Exact probability for a structured family via its closed form
    Structured(StructuredArgs),
    /// Build a balanced extremal configuration, optionally writing CSV
    Construct(ConstructArgs),
    /// Stream per-n scan rows for a constructed family to CSV
    Scan(ScanArgs),
    /// Emit a signing certificate for a planar configuration as JSON
    Certify(CertifyArgs),
    /// Print a sign assignment landing the signed sum in the unit ball
    Balance(BalanceArgs),
    /// Verification report for the zero-count minima f₀/f₁ and their tail
    Tables(TablesArgs),
    /// Exact vs asymptotic central binomial power sums
    Franel(FranelArgs),
    /// Monte Carlo average of the exact ball probability over random
    /// planar directions
    Rayleigh(RayleighArgs),
    /// Local search for a configuration minimizing the exact probability
    Minimize(MinimizeArgs),
}

#[derive(clap::Args)]
struct EnumArgs {
    /// Headerless CSV, one unit vector per row
    #[arg(long)]
    vectors: PathBuf,
    /// Squared radius of the ball
    #[arg(long)]
    r2: f64,
    /// Boundary tolerance added to the squared radius
    #[arg(long)]
    tol: Option<f64>,
    /// Counting strategy
    #[arg(long, value_enum, default_value_t = Method::Mitm)]
    method: Method,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Enumerate all 2^n signings
    Naive,
    /// Meet-in-the-middle over the two halves
    Mitm,
}

#[derive(clap::Args)]
struct StructuredArgs {
    /// Family whose closed form to evaluate
    #[arg(long = "type", value_enum)]
    kind: StructuredKind,
    /// JSON parameters: explicit multiplicities (e.g. '{"m":[3,4]}') or
    /// the balanced shorthand '{"d":2,"n":7}'
    #[arg(long)]
    params: String,
    /// Squared radius (mixed and perturbed forms fix it to d and d−1)
    #[arg(long)]
    r2: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum StructuredKind {
    /// Multiplicities on orthonormal axes
    Ortho,
    /// Multiplicities on regular simplex vertices
    Simplex,
    /// Planar triangle plus orthogonal axes
    Mixed,
    /// Tilted basis with doubled first direction
    Perturbed,
}

#[derive(clap::Args)]
struct ConstructArgs {
    /// Which balanced family to build
    #[arg(long, value_enum)]
    kind: ConstructKind,
    /// Ambient dimension (triangle is always planar)
    #[arg(long)]
    d: Option<usize>,
    /// Number of vectors
    #[arg(long)]
    n: u64,
    /// Zero-coordinate count override (orthogonal only)
    #[arg(long)]
    t: Option<usize>,
    /// Write the vectors to this CSV path
    #[arg(long)]
    emit: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructKind {
    Counterexample,
    Triangle,
    Orthogonal,
    Mixed,
}

#[derive(clap::Args)]
struct ScanArgs {
    /// Family to scan
    #[arg(long, value_enum)]
    family: ScanFamily,
    /// Ambient dimension
    #[arg(long)]
    d: usize,
    /// Inclusive n range `lo:hi`, stepped by 2 from lo
    #[arg(long = "n-odd")]
    n_odd: String,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    /// Continue an interrupted scan from the last complete row
    #[arg(long)]
    resume: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScanFamily {
    Counterexample,
}

#[derive(clap::Args)]
struct CertifyArgs {
    /// Headerless CSV, one unit vector per row (planar, odd count)
    #[arg(long)]
    vectors: PathBuf,
    /// Output JSON path
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct BalanceArgs {
    /// Headerless CSV, one unit vector per row (planar, odd count)
    #[arg(long)]
    vectors: PathBuf,
}

#[derive(clap::Args)]
struct TablesArgs {
    /// Largest dimension for the f₀/f₁ table
    #[arg(long = "max-d", default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
    max_d: u64,
}

#[derive(clap::Args)]
struct FranelArgs {
    /// Common multiplicity m of the q factors
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    m: u64,
    /// Power q of the binomial coefficients
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    q: u32,
}

#[derive(clap::Args)]
struct RayleighArgs {
    /// Number of vectors per sampled configuration
    #[arg(long)]
    n: usize,
    /// Number of sampled configurations
    #[arg(long)]
    samples: u64,
    /// RNG seed
    #[arg(long)]
    seed: u64,
}

#[derive(clap::Args)]
struct MinimizeArgs {
    /// Number of vectors
    #[arg(long)]
    n: usize,
    /// Ambient dimension
    #[arg(long)]
    d: usize,
    /// Squared radius of the ball
    #[arg(long)]
    r2: f64,
    /// Number of local-search restarts
    #[arg(long, default_value_t = 8)]
    restarts: u32,
    /// RNG seed
    #[arg(long)]
    seed: u64,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("{}", json!({ "schema": 1, "error": e.to_string() }));
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Enum(args) => cmd_enum(args),
        Command::Structured(args) => cmd_structured(args),
        Command::Construct(args) => cmd_construct(args),
        Command::Scan(args) => cmd_scan(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Balance(args) => cmd_balance(args),
        Command::Tables(args) => cmd_tables(args),
        Command::Franel(args) => cmd_franel(args),
        Command::Rayleigh(args) => cmd_rayleigh(args),
        Command::Minimize(args) => cmd_minimize(args),
    }
}

/// Caps the global worker pool when RLO_THREADS is set.
fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("RLO_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&k| k >= 1)
        .ok_or_else(|| Error::Domain(format!("RLO_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))
}

/// `count/denominator` with the power of two expanded, e.g. `24/128`.
fn fraction(p: &ExactProbability) -> String {
    format!("{}/{}", p.count(), BigUint::from(1u8) << p.exponent())
}

fn cmd_enum(args: EnumArgs) -> Result<()> {
    let config = UnitVectorConfig::from_csv_path(&args.vectors)?;
    let query = match args.tol {
        Some(tol) => BallQuery::with_tol(args.r2, tol)?,
        None => BallQuery::new(args.r2)?,
    };
    let p = match args.method {
        Method::Naive => prob_ball_naive(&config, &query)?,
        Method::Mitm => prob_ball_mitm(&config, &query)?,
    };
    println!("{}", fraction(&p));
    Ok(())
}

fn cmd_structured(args: StructuredArgs) -> Result<()> {
    let params = parse_params(&args.params)?;
    let r2 = args.r2;
    let p = match args.kind {
        StructuredKind::Ortho => {
            let cfg = if params.has("m") {
                params.allow(&["m"])?;
                OrthogonalConfig::new(params.vec_u64("m")?)?
            } else {
                params.allow(&["d", "n", "t"])?;
                make_orthogonal(params.usize("d")?, params.u64("n")?, params.opt_usize("t")?)?
            };
            prob_orthogonal_exact(&cfg, r2)?
        }
        StructuredKind::Simplex => {
            let cfg = if params.has("m") {
                params.allow(&["m"])?;
                SimplicialConfig::new(params.vec_u64("m")?)?
            } else {
                params.allow(&["d", "n"])?;
                if let Some(d) = params.opt_usize("d")? {
                    if d != 2 {
                        return Err(Error::Domain(format!(
                            "the balanced simplex shorthand is planar (d = 2), got d = {d}"
                        )));
                    }
                }
                make_triangle(params.u64("n")?)?
            };
            prob_simplicial_exact(&cfg, r2)?
        }
        StructuredKind::Mixed => {
            let cfg = if params.has("a") || params.has("b") {
                params.allow(&["a", "b"])?;
                let a: [u64; 3] = params.vec_u64("a")?.try_into().map_err(|_| {
                    Error::Domain("'a' must list exactly 3 triangle multiplicities".into())
                })?;
                MixedConfig::new(a, params.vec_u64("b")?)?
            } else {
                params.allow(&["d", "n"])?;
                make_mixed(params.usize("d")?, params.u64("n")?)?
            };
            let dim = cfg.dim() as u64;
            if r2 != dim {
                return Err(Error::Domain(format!(
                    "the mixed closed form is evaluated at squared radius d = {dim}, got {r2}"
                )));
            }
            prob_mixed_exact(&cfg)?
        }
        StructuredKind::Perturbed => {
            let cfg = if params.has("k") {
                params.allow(&["k1_plus", "k1_minus", "k", "beta"])?;
                PerturbedBasisConfig::new(
                    params.u64("k1_plus")?,
                    params.u64("k1_minus")?,
                    params.vec_u64("k")?,
                    params.f64("beta")?,
                )?
            } else {
                params.allow(&["d", "n"])?;
                make_counterexample(params.usize("d")?, params.u64("n")?)?
            };
            let dim = cfg.dim() as u64;
            if r2 != dim - 1 {
                return Err(Error::Domain(format!(
                    "the perturbed closed form is evaluated at squared radius d − 1 = {}, got {r2}",
                    dim - 1
                )));
            }
            prob_perturbed_exact(&cfg)?
        }
    };
    println!("{}", fraction(&p));
    Ok(())
}

fn cmd_construct(args: ConstructArgs) -> Result<()> {
    if args.t.is_some() && !matches!(args.kind, ConstructKind::Orthogonal) {
        return Err(Error::Domain("--t only applies to --kind orthogonal".into()));
    }
    let n = args.n;
    let require_d = || {
        args.d
            .ok_or_else(|| Error::Domain("--d is required for this kind".into()))
    };
    let (config, label) = match args.kind {
        ConstructKind::Counterexample => {
            let d = require_d()?;
            (
                make_counterexample(d, n)?.to_config()?,
                format!("counterexample d={d} n={n}"),
            )
        }
        ConstructKind::Triangle => {
            if let Some(d) = args.d {
                if d != 2 {
                    return Err(Error::Domain(format!("the triangle is planar, got --d {d}")));
                }
            }
            (make_triangle(n)?.to_config()?, format!("triangle n={n}"))
        }
        ConstructKind::Orthogonal => {
            let d = require_d()?;
            (
                make_orthogonal(d, n, args.t)?.to_config()?,
                format!("orthogonal d={d} n={n}"),
            )
        }
        ConstructKind::Mixed => {
            let d = require_d()?;
            (make_mixed(d, n)?.to_config()?, format!("mixed d={d} n={n}"))
        }
    };
    match args.emit {
        Some(path) => {
            config.to_csv_path(&path)?;
            println!(
                "{label}: wrote {} unit vectors in R^{} to {}",
                config.n(),
                config.dim(),
                path.display()
            );
        }
        None => println!("{label}: {} unit vectors in R^{}", config.n(), config.dim()),
    }
    Ok(())
}

const SCAN_HEADER: [&str; 4] = ["n", "count", "exponent", "scaled"];

fn cmd_scan(args: ScanArgs) -> Result<()> {
    let ScanFamily::Counterexample = args.family;
    let (lo, hi) = parse_span(&args.n_odd)?;
    if lo % 2 == args.d as u64 % 2 {
        return Err(Error::Domain(format!(
            "the family needs n and d of opposite parity; n-odd starts at {lo} with d = {}",
            args.d
        )));
    }
    // A resumed scan continues after the last row already on disk; a fresh
    // one truncates and writes the header.
    let mut start = lo;
    let file = if args.resume && args.out.exists() {
        start = last_scanned_n(&args.out)?.map_or(lo, |n| n + 2);
        OpenOptions::new().append(true).open(&args.out)?
    } else {
        let mut file = File::create(&args.out)?;
        {
            use std::io::Write;
            writeln!(file, "{}", SCAN_HEADER.join(","))?;
        }
        file
    };
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    let mut written = 0u64;
    let mut n = start;
    while n <= hi {
        let row = scan_counterexample_row(args.d, n)?;
        writer.write_record([
            row.n.to_string(),
            row.count,
            row.exponent.to_string(),
            row.scaled.to_string(),
        ])?;
        writer.flush()?;
        written += 1;
        n += 2;
    }
    println!(
        "scan: {written} new rows, range {lo}:{hi} complete in {}",
        args.out.display()
    );
    Ok(())
}

/// Largest n among the complete rows of an existing scan file.
fn last_scanned_n(path: &Path) -> Result<Option<u64>> {
    let mut reader = csv::Reader::from_path(path)?;
    {
        let headers = reader.headers()?;
        if headers != &csv::StringRecord::from(SCAN_HEADER.as_slice()) {
            return Err(Error::Domain(format!(
                "{} does not look like a scan file (header {:?})",
                path.display(),
                headers
            )));
        }
    }
    let mut last = None;
    for record in reader.records() {
        let record = record?;
        let n: u64 = record
            .get(0)
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| Error::Domain(format!("{}: malformed row", path.display())))?;
        last = Some(last.map_or(n, |prev: u64| prev.max(n)));
    }
    Ok(last)
}

fn cmd_certify(args: CertifyArgs) -> Result<()> {
    let config = UnitVectorConfig::from_csv_path(&args.vectors)?;
    let cert = certificate(&config)?;
    let doc = json!({
        "schema": 1,
        "n": config.n(),
        "radius_sq": cert.radius_sq(),
        "max_norm": cert.max_norm(),
        "base": cert.base().signs(),
        "flip_pairs": cert.flip_pairs(),
        "size": cert.size().to_string(),
        "size_log2": cert.size_log2(),
    });
    write_json(&args.out, &doc)?;
    println!(
        "certificate: {} signings from {} flip pairs, max norm {}; wrote {}",
        cert.size(),
        cert.flip_pairs().len(),
        cert.max_norm(),
        args.out.display()
    );
    Ok(())
}

fn cmd_balance(args: BalanceArgs) -> Result<()> {
    let config = UnitVectorConfig::from_csv_path(&args.vectors)?;
    let signs = swanepoel_signs(&config)?;
    let norm = norm_sq_point(&config.signed_sum(&signs)?).sqrt();
    let pattern: String = signs
        .signs()
        .iter()
        .map(|&s| if s > 0 { '+' } else { '-' })
        .collect();
    println!("signs: {pattern}");
    println!("norm: {norm}");
    Ok(())
}

fn cmd_tables(args: TablesArgs) -> Result<()> {
    let mut minima = Vec::new();
    for d in 1..=args.max_d as usize {
        minima.push(json!({
            "d": d,
            "f0": f0(d)?.to_string(),
            "f1": f1(d)?.to_string(),
        }));
    }
    let tail = check_f_range()?;
    let doc = json!({
        "schema": 1,
        "minima": minima,
        "tail": { "rows": tail.rows, "all_ok": tail.all_ok },
    });
    println!("{}", to_pretty(&doc)?);
    if !tail.all_ok {
        return Err(Error::Domain(
            "tail check failed: a minimizing zero count escapes the tabulated range".into(),
        ));
    }
    Ok(())
}

fn cmd_franel(args: FranelArgs) -> Result<()> {
    let exact = franel_sum_exact(args.m, args.q);
    let exact_log2 = log2_biguint(&exact);
    let asymptotic_log2 = franel_asymptotic_log2(args.m, args.q);
    let doc = json!({
        "schema": 1,
        "m": args.m,
        "q": args.q,
        "exact": exact.to_string(),
        "exact_log2": exact_log2,
        "asymptotic_log2": asymptotic_log2,
        "ratio": (exact_log2 - asymptotic_log2).exp2(),
    });
    println!("{}", to_pretty(&doc)?);
    Ok(())
}

fn cmd_rayleigh(args: RayleighArgs) -> Result<()> {
    let est = signsum::enumerate::rayleigh_mc(args.n, args.samples, args.seed)?;
    let doc = json!({
        "schema": 1,
        "n": est.n,
        "samples": est.samples,
        "seed": args.seed,
        "mean": est.mean,
        "std_err": est.std_err,
        "expected": est.expected,
    });
    println!("{}", to_pretty(&doc)?);
    Ok(())
}

fn cmd_minimize(args: MinimizeArgs) -> Result<()> {
    let (config, p) = local_search_minimize(args.n, args.d, args.r2, args.restarts, args.seed)?;
    let mut doc = json!({
        "schema": 1,
        "n": args.n,
        "d": args.d,
        "r2": args.r2,
        "restarts": args.restarts,
        "seed": args.seed,
        "count": p.count().to_string(),
        "exponent": p.exponent(),
        "vectors": config.vectors(),
    });
    // log₂ of a zero probability would serialize as null; leave it out.
    if !p.is_zero() {
        doc["log2"] = json!(p.log2());
    }
    println!("{}", to_pretty(&doc)?);
    Ok(())
}

// ───────────────────────────────── helpers ─────────────────────────────────

fn to_pretty(doc: &Value) -> Result<String> {
    serde_json::to_string_pretty(doc).map_err(|e| Error::Domain(format!("serialize: {e}")))
}

fn write_json(path: &Path, doc: &Value) -> Result<()> {
    use std::io::Write;
    let mut file = File::create(path)?;
    writeln!(file, "{}", to_pretty(doc)?)?;
    Ok(())
}

/// `lo:hi` as an inclusive pair.
fn parse_span(s: &str) -> Result<(u64, u64)> {
    let parse = |part: &str| {
        part.parse::<u64>()
            .map_err(|_| Error::Domain(format!("range '{s}' must be lo:hi with integers")))
    };
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| Error::Domain(format!("range '{s}' must be lo:hi")))?;
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo > hi {
        return Err(Error::Domain(format!("empty range {lo}:{hi}")));
    }
    Ok((lo, hi))
}

/// Typed, key-checked access to the --params JSON object.
struct Params(serde_json::Map<String, Value>);

fn parse_params(raw: &str) -> Result<Params> {
    match serde_json::from_str(raw) {
        Ok(Value::Object(map)) => Ok(Params(map)),
        Ok(_) => Err(Error::Domain("--params must be a JSON object".into())),
        Err(e) => Err(Error::Domain(format!("--params: {e}"))),
    }
}

impl Params {
    fn has(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    /// Rejects keys outside `keys`, so typos fail instead of being ignored.
    fn allow(&self, keys: &[&str]) -> Result<()> {
        for present in self.0.keys() {
            if !keys.contains(&present.as_str()) {
                return Err(Error::Domain(format!(
                    "unknown parameter '{present}'; expected {}",
                    keys.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Result<&Value> {
        self.0
            .get(key)
            .ok_or_else(|| Error::Domain(format!("missing parameter '{key}'")))
    }

    fn u64(&self, key: &str) -> Result<u64> {
        self.get(key)?
            .as_u64()
            .ok_or_else(|| Error::Domain(format!("parameter '{key}' must be a nonnegative integer")))
    }

    fn usize(&self, key: &str) -> Result<usize> {
        Ok(self.u64(key)? as usize)
    }

    fn opt_usize(&self, key: &str) -> Result<Option<usize>> {
        if self.has(key) {
            Ok(Some(self.usize(key)?))
        } else {
            Ok(None)
        }
    }

    fn f64(&self, key: &str) -> Result<f64> {
        self.get(key)?
            .as_f64()
            .ok_or_else(|| Error::Domain(format!("parameter '{key}' must be a real number")))
    }

    fn vec_u64(&self, key: &str) -> Result<Vec<u64>> {
        let bad = || Error::Domain(format!("parameter '{key}' must be a list of nonnegative integers"));
        self.get(key)?
            .as_array()
            .ok_or_else(bad)?
            .iter()
            .map(|v| v.as_u64().ok_or_else(bad))
            .collect()
    }
}
