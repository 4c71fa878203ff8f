//! Command-line front end. Every command prints JSON (default) or CSV and is
//! deterministic for a fixed configuration and seed.
//!
//! Exit codes: 0 on success, 2 on malformed input, 3 when a computation fails.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bases::{family_basis, homogeneous_basis, rectangular_basis, Family, ModuleBasis};
use crate::contiguity::{quad_oracle, ExponentVector5, PeriodTable};
use crate::diameter::{
    closed_form_diameter, eta_critical, fekete_maximize, fekete_maximize_family, intuitive_threshold,
    rank_identity_check, tau_eps_bounds, tau_eps_crossover, zeta2_region_bound, FeketeConfig, Region,
};
use crate::exactnum::{parse_rational, rational_to_string, BigRational, LinearForm};
use crate::gram::{
    build_gram, montecarlo_det_identity, positivity_check, report, report_for, GramReport, ReportConfig,
};
use crate::lattice::{
    denominator_asymptotics, det_criterion_series, extract_small_form, integerize, DenominatorScheme,
};
use crate::linalg::rational_det;
use crate::vandermonde::{amalgam, amalgam_det_formula, h_constant};

/// Environment variable naming the integral cache; it takes precedence over `--cache`.
pub const CACHE_ENV: &str = "PERIODGRAM_CACHE";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "periodgram", version, about = "Gram determinants of period integrals and related bounds")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GlobalArgs {
    /// Decimal digits for numeric output.
    #[arg(long, global = true, default_value_t = 50)]
    precision: u32,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Largest rank for exact determinant polynomials.
    #[arg(long, global = true, default_value_t = crate::gram::DEFAULT_EXACT_LIMIT)]
    exact_limit: usize,
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    #[arg(long, global = true)]
    csv: bool,
    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// JSON file memoising integrals across runs.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact value of one integral.
    Integral {
        /// Exponents `s1,…,s5`.
        #[arg(long)]
        s: String,
        /// Also evaluate by quadrature.
        #[arg(long)]
        oracle: bool,
    },
    /// Per-level metrics of a family.
    Table {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n_max: u32,
        #[arg(long, default_value_t = 1)]
        n_min: u32,
    },
    /// Gram matrix and determinant of one level.
    Gram {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: u32,
        /// Include the matrix entries.
        #[arg(long)]
        matrix: bool,
    },
    /// Point configurations with large Vandermonde determinant.
    Fekete(FeketeArgs),
    /// Closed-form diameters and bounds.
    Bounds(BoundsArgs),
    /// Small integral linear form from the integerised Gram matrix.
    Minkowski {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: u32,
    },
    /// Compares the permutation-sum formula with direct determinants.
    AmalgamCheck {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Compares exact integrals with quadrature.
    OracleCheck {
        /// Largest `s1 + … + s5`.
        #[arg(long, default_value_t = 8)]
        max_total: u32,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Sampled estimate of the Gram determinant.
    Montecarlo {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// `d_n·|det Q_n|` for successive levels.
    Criterion {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n_max: u32,
    },
}

#[derive(Args, Debug)]
struct FeketeArgs {
    /// Family basis, optimised over the image of the unit square.
    #[arg(long, conflicts_with = "basis")]
    family: Option<Family>,
    #[arg(long)]
    n: Option<u32>,
    /// `rect:n1,n2,…` or `hom:n,r`.
    #[arg(long)]
    basis: Option<String>,
    /// Region spec; `image` for families.
    #[arg(long, default_value = "image")]
    region: String,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    #[arg(long, default_value_t = 60)]
    sweeps: usize,
    #[arg(long, default_value_t = 512)]
    pool: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Which {
    TauEps,
    Crossover,
    Zeta2Region,
    Eta,
    Intuitive,
    ClosedForm,
    Denominators,
    RankIdentity,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    which: Which,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    r: Option<u32>,
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    region: Option<String>,
    /// `rect:r,w`, `g_basis` or `five_param`.
    #[arg(long, default_value = "rect:2,2")]
    scheme: String,
    #[arg(long, default_value_t = 2000)]
    grid: u32,
    #[arg(long, default_value_t = 4)]
    n: u32,
}

/// Resolved run settings.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub precision: u32,
    pub workers: usize,
    pub seed: u64,
    pub exact_limit: usize,
    pub csv: bool,
    pub output: Option<PathBuf>,
    pub cache: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Compute(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Compute(_) => EXIT_COMPUTE,
        }
    }
}

fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

/// Output of a command: a JSON document and, where meaningful, CSV.
struct Rendered {
    json: Value,
    csv: Option<String>,
}

impl Rendered {
    fn json(v: Value) -> Self {
        Rendered { json: v, csv: None }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Compute(m) => eprintln!("computation failed: {m}"),
            }
            e.code()
        }
    }
}

fn resolve(g: &GlobalArgs) -> Result<RunConfig, CliError> {
    if g.precision < 10 {
        return Err(usage("--precision must be at least 10"));
    }
    let workers = g.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    let cache = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from).or_else(|| g.cache.clone());
    Ok(RunConfig {
        precision: g.precision,
        workers,
        seed: g.seed,
        exact_limit: g.exact_limit,
        csv: g.csv,
        output: g.output.clone(),
        cache,
    })
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve(&cli.global)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build().map_err(compute)?;
    let table = PeriodTable::new();
    if let Some(path) = &cfg.cache {
        load_cache(&table, path)?;
    }
    let rendered = pool.install(|| dispatch(&cli.command, &cfg, &table))?;
    if let Some(path) = &cfg.cache {
        save_cache(&table, path)?;
    }
    let text = if cfg.csv {
        rendered.csv.ok_or_else(|| usage("this command has no CSV form; use --json"))?
    } else {
        serde_json::to_string_pretty(&rendered.json).map_err(compute)? + "\n"
    };
    match &cfg.output {
        Some(p) => std::fs::write(p, text).map_err(|e| compute(format!("writing {}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(compute),
    }
}

fn load_cache(table: &PeriodTable, path: &PathBuf) -> Result<(), CliError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(compute(format!("reading cache {}: {e}", path.display()))),
    };
    let doc: Value = serde_json::from_str(&text).map_err(|e| usage(format!("cache {}: {e}", path.display())))?;
    let entries = doc["entries"].as_array().ok_or_else(|| usage("cache has no entries array"))?;
    let mut parsed = Vec::with_capacity(entries.len());
    for e in entries {
        let field = |k: &str| e[k].as_str().ok_or_else(|| usage(format!("cache entry lacks {k}")));
        let s: ExponentVector5 = field("s")?.parse().map_err(usage)?;
        let c = parse_rational(field("const_part")?).ok_or_else(|| usage("bad rational in cache"))?;
        let x = parse_rational(field("xi_part")?).ok_or_else(|| usage("bad rational in cache"))?;
        parsed.push((s, LinearForm::new(c, x)));
    }
    table.import(parsed);
    Ok(())
}

fn save_cache(table: &PeriodTable, path: &PathBuf) -> Result<(), CliError> {
    let entries: Vec<Value> = table
        .export()
        .into_iter()
        .map(|(s, f)| {
            json!({
                "s": s.to_string(),
                "const_part": rational_to_string(&f.const_part),
                "xi_part": rational_to_string(&f.xi_part),
            })
        })
        .collect();
    let doc = json!({ "version": 1, "entries": entries });
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, serde_json::to_string(&doc).map_err(compute)?)
        .and_then(|_| std::fs::rename(&tmp, path))
        .map_err(|e| compute(format!("writing cache {}: {e}", path.display())))
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(compute)
}

fn dispatch(cmd: &Command, cfg: &RunConfig, table: &PeriodTable) -> Result<Rendered, CliError> {
    match cmd {
        Command::Integral { s, oracle } => cmd_integral(s, *oracle, cfg, table),
        Command::Table { family, n_max, n_min } => cmd_table(*family, *n_min, *n_max, cfg, table),
        Command::Gram { family, n, matrix } => cmd_gram(*family, *n, *matrix, cfg, table),
        Command::Fekete(a) => cmd_fekete(a, cfg),
        Command::Bounds(a) => cmd_bounds(a, cfg),
        Command::Minkowski { family, n } => cmd_minkowski(*family, *n, cfg, table),
        Command::AmalgamCheck { m, n, trials } => cmd_amalgam_check(*m, *n, *trials, cfg),
        Command::OracleCheck { max_total, tol } => cmd_oracle_check(*max_total, *tol, table),
        Command::Montecarlo { family, n, samples } => {
            let r = montecarlo_det_identity(table, *family, *n, *samples, cfg.seed).map_err(compute)?;
            Ok(Rendered::json(to_value(&r)?))
        }
        Command::Criterion { family, n_max } => {
            let rc = ReportConfig { precision: cfg.precision, exact_limit: cfg.exact_limit };
            let pts = det_criterion_series(table, *family, *n_max, &rc).map_err(compute)?;
            let mut csv = String::from("n,d_n,d_n_exact,det,value\n");
            for p in &pts {
                let _ = writeln!(csv, "{},{},{},{},{:e}", p.n, p.d_n, p.d_n_exact, p.det.to_decimal_string(6), p.value);
            }
            Ok(Rendered { json: to_value(&pts)?, csv: Some(csv) })
        }
    }
}

fn cmd_integral(s: &str, oracle: bool, cfg: &RunConfig, table: &PeriodTable) -> Result<Rendered, CliError> {
    let s: ExponentVector5 = s.parse().map_err(usage)?;
    let v = table.mellin_integral(&s).map_err(compute)?;
    let numeric = v.eval(cfg.precision).to_decimal_string(cfg.precision);
    let mut doc = json!({
        "s": s.to_string(),
        "const_part": rational_to_string(&v.const_part),
        "xi_part": rational_to_string(&v.xi_part),
        "display": v.to_string(),
        "numeric": numeric,
    });
    let mut csv_header = String::from("s,const_part,xi_part,numeric");
    let mut csv_row =
        format!("\"{}\",{},{},{}", s, rational_to_string(&v.const_part), rational_to_string(&v.xi_part), numeric);
    if oracle {
        let q = quad_oracle(&s, 1e-12).map_err(compute)?;
        let err = (q - v.to_f64()).abs();
        doc["oracle"] = json!({ "quadrature": q, "abs_error": err });
        csv_header.push_str(",quadrature,abs_error");
        let _ = write!(csv_row, ",{q:e},{err:e}");
    }
    Ok(Rendered { json: doc, csv: Some(format!("{csv_header}\n{csv_row}\n")) })
}

pub const TABLE_CSV_HEADER: &str = "n,rank,e_n,det,d_n,d_n_exact,proxy,log_d_per_e,product,threshold,error";

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

fn table_row(r: &GramReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},",
        r.n,
        r.rank,
        r.e_n,
        r.det_numeric.to_decimal_string(6),
        r.d_n,
        r.d_n_exact,
        fmt_opt(r.proxy),
        fmt_opt(r.log_d_per_e),
        fmt_opt(r.product),
        fmt_opt(r.threshold)
    )
}

fn cmd_table(
    family: Family,
    n_min: u32,
    n_max: u32,
    cfg: &RunConfig,
    table: &PeriodTable,
) -> Result<Rendered, CliError> {
    if n_max < n_min {
        return Err(usage("--n-max must be at least --n-min"));
    }
    let rc = ReportConfig { precision: cfg.precision, exact_limit: cfg.exact_limit };
    let start = n_min.max(family.min_level()).max(1);
    let mut rows = Vec::new();
    let mut csv = format!("{TABLE_CSV_HEADER}\n");
    for n in start..=n_max {
        match report(table, family, n, &rc) {
            Ok(r) => {
                csv.push_str(&table_row(&r));
                csv.push('\n');
                rows.push(to_value(&r)?);
            }
            Err(e) => {
                let msg = e.to_string().replace([',', '\n'], ";");
                let _ = writeln!(csv, "{n},,,,,,,,,,{msg}");
                rows.push(json!({ "n": n, "error": e.to_string() }));
            }
        }
    }
    Ok(Rendered { json: json!({ "family": family, "rows": rows }), csv: Some(csv) })
}

fn cmd_gram(family: Family, n: u32, matrix: bool, cfg: &RunConfig, table: &PeriodTable) -> Result<Rendered, CliError> {
    if n < family.min_level().max(1) {
        return Err(usage(format!("level {n} is below the minimum for {family}")));
    }
    let g = build_gram(table, family, n).map_err(compute)?;
    let rc = ReportConfig { precision: cfg.precision, exact_limit: cfg.exact_limit };
    let r = report_for(&g, &rc).map_err(compute)?;
    let mut doc = json!({
        "report": to_value(&r)?,
        "det_poly_display": r.det_poly.as_ref().map(|p| p.to_string()),
        "positive_definite": positivity_check(&g, cfg.precision),
        "symmetric": g.is_symmetric(),
    });
    if matrix {
        doc["entries"] = to_value(&g.entries)?;
        doc["basis"] = to_value(&g.basis)?;
    }
    let csv = format!("{TABLE_CSV_HEADER}\n{}\n", table_row(&r));
    Ok(Rendered { json: doc, csv: Some(csv) })
}

fn parse_basis(spec: &str) -> Result<ModuleBasis, CliError> {
    let (kind, args) = spec.split_once(':').ok_or_else(|| usage(format!("basis {spec:?}: expected kind:args")))?;
    let nums: Vec<u32> = args
        .split(',')
        .map(|x| x.trim().parse::<u32>().map_err(|e| usage(format!("basis {spec:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    match kind {
        "rect" if !nums.is_empty() && nums.iter().all(|&k| k >= 1) => Ok(rectangular_basis(&nums)),
        "hom" if nums.len() == 2 && nums.iter().all(|&k| k >= 1) => Ok(homogeneous_basis(nums[0], nums[1])),
        _ => Err(usage(format!("basis {spec:?}: use rect:n1,n2,… or hom:n,r with positive sizes"))),
    }
}

fn cmd_fekete(a: &FeketeArgs, cfg: &RunConfig) -> Result<Rendered, CliError> {
    let fc =
        FeketeConfig { restarts: a.restarts, max_sweeps: a.sweeps, seed: cfg.seed, pool_size: a.pool, polish: true };
    let result = match (a.family, &a.basis) {
        (Some(family), None) => {
            let n = a.n.ok_or_else(|| usage("--family needs --n"))?;
            if n < family.min_level().max(1) {
                return Err(usage(format!("level {n} is below the minimum for {family}")));
            }
            if a.region == "image" || a.region == "two_param_image" {
                fekete_maximize_family(family, n, &fc).map_err(compute)?
            } else {
                let region: Region = a.region.parse().map_err(usage)?;
                fekete_maximize(&family_basis(family, n), &region, &fc).map_err(compute)?
            }
        }
        (None, Some(spec)) => {
            let basis = parse_basis(spec)?;
            let region: Region = a.region.parse().map_err(usage)?;
            fekete_maximize(&basis, &region, &fc).map_err(|e| match e {
                crate::diameter::DiameterError::DimensionMismatch { .. } => usage(e),
                other => compute(other),
            })?
        }
        _ => return Err(usage("give either --family with --n, or --basis")),
    };
    let mut csv = String::from("proxy,log_abs_det,rank,e_n,iterations,restarts\n");
    let _ = writeln!(
        csv,
        "{:.9},{:.9},{},{},{},{}",
        result.proxy, result.log_abs_det, result.rank, result.e_n, result.iterations, result.restarts
    );
    Ok(Rendered { json: to_value(&result)?, csv: Some(csv) })
}

fn parse_scheme(s: &str) -> Result<DenominatorScheme, CliError> {
    match s.replace('-', "_").as_str() {
        "g_basis" => Ok(DenominatorScheme::GBasis),
        "five_param" => Ok(DenominatorScheme::FiveParam),
        other => {
            let args = other.strip_prefix("rect:").ok_or_else(|| usage(format!("unknown scheme {s:?}")))?;
            let v: Vec<u32> = args.split(',').map(|x| x.trim().parse().map_err(usage)).collect::<Result<_, _>>()?;
            match v[..] {
                [r, w] if r >= 1 => Ok(DenominatorScheme::Rectangular { r, w }),
                _ => Err(usage("rect scheme needs r,w with r ≥ 1")),
            }
        }
    }
}

fn cmd_bounds(a: &BoundsArgs, _cfg: &RunConfig) -> Result<Rendered, CliError> {
    let v = match a.which {
        Which::TauEps => {
            let eps = a.eps.ok_or_else(|| usage("--which tau-eps needs --eps"))?;
            to_value(&tau_eps_bounds(eps).map_err(usage)?)?
        }
        Which::Crossover => json!({ "crossover": tau_eps_crossover(),
            "closed_form": crate::diameter::tau_eps_crossover_closed_form() }),
        Which::Zeta2Region => to_value(&zeta2_region_bound())?,
        Which::Eta => to_value(&eta_critical(a.grid))?,
        Which::Intuitive => {
            let r = a.r.ok_or_else(|| usage("--which intuitive needs --r"))?;
            let w = a.w.ok_or_else(|| usage("--which intuitive needs --w"))?;
            to_value(&intuitive_threshold(r, w).map_err(usage)?)?
        }
        Which::ClosedForm => {
            let spec = a.region.as_deref().ok_or_else(|| usage("--which closed-form needs --region"))?;
            let region: Region = spec.parse().map_err(usage)?;
            to_value(&closed_form_diameter(&region).map_err(compute)?)?
        }
        Which::Denominators => {
            let scheme = parse_scheme(&a.scheme)?;
            to_value(&denominator_asymptotics(scheme, &[10, 100, 400]))?
        }
        Which::RankIdentity => {
            if a.n == 0 {
                return Err(usage("--n must be positive"));
            }
            let r = rank_identity_check(a.n);
            json!({ "report": to_value(&r)?, "holds": r.holds() })
        }
    };
    Ok(Rendered::json(v))
}

fn cmd_minkowski(family: Family, n: u32, cfg: &RunConfig, table: &PeriodTable) -> Result<Rendered, CliError> {
    if n < family.min_level().max(1) {
        return Err(usage(format!("level {n} is below the minimum for {family}")));
    }
    let g = build_gram(table, family, n).map_err(compute)?;
    let ig = integerize(&g);
    let s = extract_small_form(&ig, cfg.precision).map_err(compute)?;
    let mut doc = to_value(&s)?;
    doc["value_display"] = json!(s.value.to_string());
    doc["delta"] = json!(rational_to_string(&ig.delta));
    doc["delta_factored"] = json!(format!("{}/{}", ig.delta_numerator, ig.delta_denominator));
    doc["d_left"] = json!(ig.d_left.iter().map(rational_to_string).collect::<Vec<_>>());
    doc["d_right"] = json!(ig.d_right.iter().map(rational_to_string).collect::<Vec<_>>());
    Ok(Rendered::json(doc))
}

fn random_rational_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<BigRational>> {
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    BigRational::new(BigInt::from(rng.gen_range(-9i64..=9)), BigInt::from(rng.gen_range(1i64..=5)))
                })
                .collect()
        })
        .collect()
}

/// Compares the amalgam formula with the direct determinant on random inputs.
pub fn amalgam_trials(m: usize, n: usize, trials: usize, seed: u64) -> Result<Vec<(String, String)>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let a = random_rational_matrix(&mut rng, m * n, m);
            let b = random_rational_matrix(&mut rng, m * n, n);
            let direct = rational_det(&amalgam(&a, &b).map_err(|e| e.to_string())?);
            let formula = amalgam_det_formula(&a, &b).map_err(|e| e.to_string())?;
            Ok((rational_to_string(&direct), rational_to_string(&formula)))
        })
        .collect()
}

fn cmd_amalgam_check(m: usize, n: usize, trials: usize, cfg: &RunConfig) -> Result<Rendered, CliError> {
    if m == 0 || n == 0 {
        return Err(usage("--m and --n must be positive"));
    }
    if m * n > 8 {
        return Err(usage(format!("m·n = {} exceeds 8", m * n)));
    }
    let results = amalgam_trials(m, n, trials, cfg.seed).map_err(compute)?;
    let mismatches: Vec<usize> = results.iter().enumerate().filter(|(_, (d, f))| d != f).map(|(i, _)| i).collect();
    let mut csv = String::from("trial,direct,formula,equal\n");
    for (i, (d, f)) in results.iter().enumerate() {
        let _ = writeln!(csv, "{i},{d},{f},{}", d == f);
    }
    let doc = json!({
        "m": m,
        "n": n,
        "trials": trials,
        "h": h_constant(m as u32, n as u32).to_string(),
        "all_equal": mismatches.is_empty(),
        "mismatches": mismatches,
        "results": results.iter().map(|(d, f)| json!({ "direct": d, "formula": f })).collect::<Vec<_>>(),
    });
    Ok(Rendered { json: doc, csv: Some(csv) })
}

/// All exponent vectors with `s1 + … + s5 ≤ max_total`, in lexicographic order.
pub fn exponent_vectors_up_to(max_total: u32) -> Vec<ExponentVector5> {
    let mut out = Vec::new();
    let m = max_total;
    for a in 0..=m {
        for b in 0..=m - a {
            for c in 0..=m - a - b {
                for d in 0..=m - a - b - c {
                    for e in 0..=m - a - b - c - d {
                        out.push(ExponentVector5([a, b, c, d, e]));
                    }
                }
            }
        }
    }
    out
}

fn cmd_oracle_check(max_total: u32, tol: f64, table: &PeriodTable) -> Result<Rendered, CliError> {
    let cases = exponent_vectors_up_to(max_total);
    type Outcome = Result<(f64, f64), String>;
    let results: Vec<(ExponentVector5, Outcome)> = cases
        .par_iter()
        .map(|s| {
            let r = table
                .mellin_integral(s)
                .map_err(|e| e.to_string())
                .and_then(|v| quad_oracle(s, tol * 1e-2).map(|q| (v.to_f64(), q)).map_err(|e| e.to_string()));
            (*s, r)
        })
        .collect();
    let mut max_err: f64 = 0.0;
    let mut failures = Vec::new();
    let mut csv = String::from("s,exact,quadrature,abs_error\n");
    for (s, r) in &results {
        match r {
            Ok((e, q)) => {
                let err = (e - q).abs();
                max_err = max_err.max(err);
                if err > tol {
                    failures.push(json!({ "s": s.to_string(), "exact": e, "quadrature": q }));
                }
                let _ = writeln!(csv, "\"{s}\",{e:e},{q:e},{err:e}");
            }
            Err(msg) => {
                failures.push(json!({ "s": s.to_string(), "error": msg }));
                let _ = writeln!(csv, "\"{s}\",,,{}", msg.replace(',', ";"));
            }
        }
    }
    let doc = json!({
        "cases": results.len(),
        "tolerance": tol,
        "max_abs_error": max_err,
        "failures": failures,
        "passed": failures.is_empty(),
    });
    if failures.is_empty() {
        Ok(Rendered { json: doc, csv: Some(csv) })
    } else {
        let _ = std::io::stdout().write_all((serde_json::to_string_pretty(&doc).map_err(compute)? + "\n").as_bytes());
        Err(compute(format!("{} of {} cases disagree", failures.len(), results.len())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_enumeration_counts() {
        assert_eq!(exponent_vectors_up_to(0).len(), 1);
        assert_eq!(exponent_vectors_up_to(8).len(), 1287);
    }

    #[test]
    fn basis_specs() {
        assert_eq!(parse_basis("rect:3,2").unwrap().rank(), 6);
        assert_eq!(parse_basis("hom:3,2").unwrap().rank(), 6);
        assert!(parse_basis("rect:0").is_err() && parse_basis("cube:2").is_err());
    }

    #[test]
    fn schemes() {
        assert_eq!(parse_scheme("g-basis").unwrap(), DenominatorScheme::GBasis);
        assert_eq!(parse_scheme("rect:2,2").unwrap(), DenominatorScheme::Rectangular { r: 2, w: 2 });
        assert!(parse_scheme("rect:0,1").is_err());
    }

    #[test]
    fn amalgam_small() {
        for (d, f) in amalgam_trials(2, 2, 5, 3).unwrap() {
            assert_eq!(d, f);
        }
    }

    #[test]
    fn bad_arguments_exit_two() {
        assert_eq!(run(["periodgram", "integral", "--s", "1,2"]), EXIT_USAGE);
        assert_eq!(run(["periodgram", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["periodgram", "--precision", "5", "integral", "--s", "0,0,0,0,0"]), EXIT_USAGE);
    }
}
