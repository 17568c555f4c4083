//! Command-line surface: graph weights, star products, verification suites,
//! and the Duflo map.
//!
//! Every command is deterministic under a fixed seed and cache state; stdout
//! carries exactly one JSON report and stderr carries JSON diagnostics only.
//! Exit codes: 0 success, 2 unparseable or invalid input, 3 budget exceeded,
//! 4 verification failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::algebra::{bivector, Ef64, Poly, PolyVectorField, Rat, Scalar};
use crate::duflo::{duflo_map, kks_bivector, DufloError, LieAlgebra};
use crate::formality::{star, FormalityError, TruncationPolicy, WeightBook};
use crate::graphs::AdmissibleGraph;
use crate::integrate::{default_cache_path, kontsevich_weight, shoikhet_weight, WeightCache};
use crate::verify::{resolve_algebra, run_suite, SUITE_NAMES};

const EXIT_PARSE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(
    name = "fkit",
    version,
    about = "Graph calculus for deformation quantization: weights, star products, \
             tangent maps, and the Duflo isomorphism"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    run: RunFlags,
}

/// Run configuration shared by every command.
#[derive(Args)]
struct RunFlags {
    /// Highest ħ power kept in series results
    #[arg(long, global = true)]
    order: Option<usize>,
    /// QMC sample budget per graph weight
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Base seed for every weight integral
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Per-order tolerance used by the verification suites
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Weight cache path (default: $FKIT_CACHE, else ./fkit-weights.ldjson)
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Also write the report to this path; `.csv` selects a coefficient
    /// table for `star`
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Weight of one admissible graph (file path, or inline JSON)
    Weight {
        /// Path to a graph JSON file, or the JSON itself when it starts with '{'
        graph: String,
    },
    /// ħ-series of f ⋆ g for a Poisson structure
    Star {
        /// Builtin structure (const2, sl2, heisenberg, so3, abelian) or
        /// Poisson JSON (path or inline)
        poisson: String,
        /// Left factor, e.g. "x1^2*x2"
        f: String,
        /// Right factor
        g: String,
    },
    /// Run a named verification suite; exits 4 when any check fails
    Verify {
        /// assoc | commutator | hkr | wheels | strata | cap | duflo | angles
        suite: String,
        /// Suite argument (duflo: builtin algebra name or JSON path)
        target: Option<String>,
    },
    /// Apply the Duflo isomorphism 𝒟 and print the image in the PBW basis
    Duflo {
        /// Builtin algebra name or Lie-algebra JSON path
        algebra: String,
        /// Symmetric-algebra element, e.g. "x1*x3 + 1/4*x2^2"
        element: String,
        /// PBW truncation degree (default: the element's own degree)
        #[arg(long)]
        degree: Option<u32>,
    },
}

/// A classified failure: exit code plus the JSON diagnostic for stderr.
struct Failure {
    code: u8,
    diagnostic: serde_json::Value,
}

fn fail(code: u8, kind: &str, message: impl Into<String>) -> Failure {
    Failure {
        code,
        diagnostic: serde_json::json!({ "error": kind, "message": message.into() }),
    }
}

fn map_formality(e: FormalityError) -> Failure {
    let code = match &e {
        FormalityError::BudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_PARSE,
    };
    fail(code, "formality", e.to_string())
}

fn map_duflo(e: DufloError) -> Failure {
    fail(EXIT_PARSE, "duflo", e.to_string())
}

/// Entry point used by `main`; returns the process exit code.
pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let diag = serde_json::json!({ "error": "usage", "message": e.to_string() });
            eprintln!("{diag}");
            return ExitCode::from(EXIT_PARSE);
        }
    };
    init_rayon(cli.run.jobs);
    match execute(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{}", f.diagnostic);
            ExitCode::from(f.code)
        }
    }
}

/// Sizes the global worker pool; repeated initialization (tests) is a no-op.
fn init_rayon(jobs: Option<usize>) {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let _ = builder.build_global();
}

fn policy_from(run: &RunFlags) -> Result<TruncationPolicy, Failure> {
    let mut p = TruncationPolicy::default();
    if let Some(o) = run.order {
        p.order = o;
    }
    if let Some(s) = run.samples {
        if s == 0 {
            return Err(fail(EXIT_PARSE, "config", "sample budget must be positive"));
        }
        p.samples = s;
    }
    if let Some(k) = run.seed {
        p.seed = k;
    }
    if let Some(t) = run.tol {
        if t <= 0.0 {
            return Err(fail(EXIT_PARSE, "config", "tolerance must be positive"));
        }
        p.tol = t;
    }
    Ok(p)
}

fn cache_path(run: &RunFlags) -> PathBuf {
    run.cache.clone().unwrap_or_else(default_cache_path)
}

fn load_cache(path: &Path) -> Result<WeightCache, Failure> {
    WeightCache::load(path).map_err(|e| fail(EXIT_PARSE, "cache", e.to_string()))
}

fn flush_cache(cache: &WeightCache, path: &Path) -> Result<(), Failure> {
    cache.flush(path).map_err(|e| fail(EXIT_PARSE, "cache", e.to_string()))
}

/// The argument itself when it is inline JSON, else the named file's text.
fn read_spec(spec: &str) -> Result<String, Failure> {
    if spec.trim_start().starts_with('{') {
        return Ok(spec.to_string());
    }
    std::fs::read_to_string(spec)
        .map_err(|e| fail(EXIT_PARSE, "io", format!("cannot read {spec:?}: {e}")))
}

fn parse_poly(src: &str, dim: usize) -> Result<Poly<Ef64>, Failure> {
    Poly::<Rat>::parse(src, dim)
        .map(|p| p.to_numeric())
        .map_err(|e| fail(EXIT_PARSE, "polynomial", format!("{src:?}: {e}")))
}

#[derive(Deserialize)]
struct PoissonFile {
    dim: usize,
    /// Components as [i, j, expression] with 1-based indices, i < j.
    pi: Vec<(usize, usize, String)>,
}

/// Builtin structure name, or Poisson JSON (inline or a file path).
fn resolve_poisson(spec: &str) -> Result<PolyVectorField<Ef64>, Failure> {
    if spec == "const2" {
        return Ok(bivector(2, &[(0, 1, Poly::one(2))]));
    }
    if let Some(l) = LieAlgebra::builtin(spec) {
        return Ok(kks_bivector(&l).map_scalars(|r| Ef64::exact(r.value_f64())));
    }
    let text = read_spec(spec)?;
    let pf: PoissonFile = serde_json::from_str(&text)
        .map_err(|e| fail(EXIT_PARSE, "poisson", e.to_string()))?;
    if pf.dim < 2 {
        return Err(fail(EXIT_PARSE, "poisson", "a bivector needs dim >= 2"));
    }
    let mut comps = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (i, j, expr) in &pf.pi {
        if *i < 1 || *j <= *i || *j > pf.dim {
            return Err(fail(
                EXIT_PARSE,
                "poisson",
                format!("component ({i},{j}) needs 1 <= i < j <= {}", pf.dim),
            ));
        }
        if !seen.insert((*i, *j)) {
            return Err(fail(EXIT_PARSE, "poisson", format!("duplicate component ({i},{j})")));
        }
        let p = Poly::<Rat>::parse(expr, pf.dim)
            .map_err(|e| fail(EXIT_PARSE, "poisson", format!("{expr:?}: {e}")))?;
        comps.push((i - 1, j - 1, p.to_numeric()));
    }
    Ok(bivector(pf.dim, &comps))
}

fn execute(cli: &Cli) -> Result<ExitCode, Failure> {
    let policy = policy_from(&cli.run)?;
    let csv_out = cli.run.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "csv"));
    if csv_out && !matches!(cli.command, Command::Star { .. }) {
        return Err(fail(
            EXIT_PARSE,
            "output",
            "CSV output is only defined for star coefficient tables",
        ));
    }
    match &cli.command {
        Command::Weight { graph } => {
            let report = cmd_weight(graph, &cli.run, &policy)?;
            emit(&report, &cli.run, false)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Star { poisson, f, g } => {
            let (report, csv) = cmd_star(poisson, f, g, &cli.run, &policy)?;
            emit_with_csv(&report, csv.as_deref(), &cli.run)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, target } => {
            let report = cmd_verify(suite, target.as_deref(), &cli.run, &policy)?;
            let passed = report["passed"].as_bool().unwrap_or(false);
            emit(&report, &cli.run, true)?;
            if passed {
                Ok(ExitCode::SUCCESS)
            } else {
                let failed: Vec<&str> = report["checks"]
                    .as_array()
                    .into_iter()
                    .flatten()
                    .filter(|c| c["pass"] == false)
                    .filter_map(|c| c["name"].as_str())
                    .collect();
                Err(fail(
                    EXIT_VERIFY,
                    "verification",
                    format!("suite {suite} failed: {}", failed.join(", ")),
                ))
            }
        }
        Command::Duflo { algebra, element, degree } => {
            let report = cmd_duflo(algebra, element, *degree)?;
            emit(&report, &cli.run, true)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Prints the report to stdout (compact or pretty) and mirrors it to --out.
fn emit(report: &serde_json::Value, run: &RunFlags, pretty: bool) -> Result<(), Failure> {
    let text = if pretty {
        serde_json::to_string_pretty(report).expect("report serializes")
    } else {
        serde_json::to_string(report).expect("report serializes")
    };
    println!("{text}");
    if let Some(path) = &run.out {
        std::fs::write(path, text + "\n")
            .map_err(|e| fail(EXIT_PARSE, "io", format!("cannot write {path:?}: {e}")))?;
    }
    Ok(())
}

/// Star reports may write a CSV coefficient table instead of mirrored JSON.
fn emit_with_csv(
    report: &serde_json::Value,
    csv: Option<&str>,
    run: &RunFlags,
) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report).expect("report serializes");
    println!("{text}");
    if let Some(path) = &run.out {
        let payload = if path.extension().is_some_and(|e| e == "csv") {
            csv.expect("star always builds its table").to_string()
        } else {
            text + "\n"
        };
        std::fs::write(path, payload)
            .map_err(|e| fail(EXIT_PARSE, "io", format!("cannot write {path:?}: {e}")))?;
    }
    Ok(())
}

fn cmd_weight(
    graph_spec: &str,
    run: &RunFlags,
    policy: &TruncationPolicy,
) -> Result<serde_json::Value, Failure> {
    let text = read_spec(graph_spec)?;
    let g: AdmissibleGraph =
        serde_json::from_str(&text).map_err(|e| fail(EXIT_PARSE, "graph", e.to_string()))?;
    let path = cache_path(run);
    let mut cache = load_cache(&path)?;
    let est = if g.has_special {
        shoikhet_weight(&g, policy.samples, policy.seed, Some(&mut cache))
    } else {
        kontsevich_weight(&g, policy.samples, policy.seed, Some(&mut cache))
    }
    .map_err(|e| fail(EXIT_PARSE, "weight", e.to_string()))?;
    flush_cache(&cache, &path)?;
    Ok(serde_json::to_value(&est).expect("estimate serializes"))
}

fn cmd_star(
    poisson: &str,
    f: &str,
    g: &str,
    run: &RunFlags,
    policy: &TruncationPolicy,
) -> Result<(serde_json::Value, Option<String>), Failure> {
    let pi = resolve_poisson(poisson)?;
    let fp = parse_poly(f, pi.dim())?;
    let gp = parse_poly(g, pi.dim())?;
    let path = cache_path(run);
    let mut book = WeightBook::with_cache(load_cache(&path)?);
    let s = star(&pi, policy, &mut book).map_err(map_formality)?;
    let series = s.apply(&fp, &gp);
    if let Some(cache) = book.into_cache() {
        flush_cache(&cache, &path)?;
    }

    let mut display = String::new();
    let mut coefficients = Vec::new();
    for k in 0..=series.order() {
        let c = series.coeff(k);
        if k == 0 {
            display = c.to_string();
        } else if !c.is_zero() {
            display.push_str(&format!(" + ħ^{k}*({c})"));
        }
        coefficients.push(serde_json::json!({
            "k": k,
            "poly": c.to_string(),
            "max_err": c.max_err(),
        }));
    }
    let report = serde_json::json!({
        "poisson": poisson,
        "f": f,
        "g": g,
        "order": policy.order,
        "samples": policy.samples,
        "seed": policy.seed,
        "coefficients": coefficients,
        "display": display,
    });

    // CSV coefficient table: one row per (order, monomial)
    let mut csv = String::from("k,monomial,value,stderr\n");
    for k in 0..=series.order() {
        let c = series.coeff(k);
        for (expo, coeff) in c.terms() {
            let mono: Vec<String> = expo
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{e}", i + 1)
                    }
                })
                .collect();
            let mono = if mono.is_empty() { "1".to_string() } else { mono.join("*") };
            csv.push_str(&format!("{k},{mono},{},{}\n", coeff.value_f64(), coeff.err_f64()));
        }
    }
    Ok((report, Some(csv)))
}

fn cmd_verify(
    suite: &str,
    target: Option<&str>,
    run: &RunFlags,
    policy: &TruncationPolicy,
) -> Result<serde_json::Value, Failure> {
    if !SUITE_NAMES.contains(&suite) {
        return Err(fail(
            EXIT_PARSE,
            "suite",
            format!("unknown suite {suite:?}; expected one of: {}", SUITE_NAMES.join(", ")),
        ));
    }
    let path = cache_path(run);
    let mut book = WeightBook::with_cache(load_cache(&path)?);
    let report = run_suite(suite, target, policy, &mut book).map_err(map_formality)?;
    if let Some(cache) = book.into_cache() {
        flush_cache(&cache, &path)?;
    }
    Ok(report.to_json())
}

fn cmd_duflo(
    algebra: &str,
    element: &str,
    degree: Option<u32>,
) -> Result<serde_json::Value, Failure> {
    let l = resolve_algebra(algebra).map_err(map_formality)?;
    let p = Poly::<Rat>::parse(element, l.dim())
        .map_err(|e| fail(EXIT_PARSE, "polynomial", format!("{element:?}: {e}")))?;
    let degree = degree.unwrap_or_else(|| p.degree());
    let image = duflo_map(&l, &p, degree).map_err(map_duflo)?;
    Ok(serde_json::json!({
        "algebra": algebra,
        "element": element,
        "degree": degree,
        "duflo": image.to_string(),
        "exact": true,
    }))
}
