//! Command line driver: parse, evaluate, linearize, certify, bound, and
//! reproduce the stored worked examples, emitting versioned JSON reports.
//!
//! Exit codes: 0 success, 1 verdict failure, 2 input error. Input errors
//! are reported as JSON on stderr. Reports are deterministic given the
//! same config and seed.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::json;

use freeball::linalg::derive_seed;
use freeball::linearize::{self, AtomCertificate};
use freeball::ncball::{BallSpec, Budget};
use freeball::ratexpr::{self, Equivalence};
use freeball::realization;
use freeball::{gallery, ngn, pencil, CMatrix, MatPoly, MatrixTuple};

const DEFAULT_SEED: u64 = 17;

#[derive(Parser)]
#[command(name = "freeball", version, about = "Free function theory toolkit")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// RNG seed; falls back to FREEBALL_SEED, then a fixed default.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Matrix levels to sample, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Samples per level for scans and estimates.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Dilation grid for supremum scans, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    r_grid: Option<Vec<f64>>,
    /// Residual tolerance for identity checks.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Cap the worker thread count.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a rational expression at a matrix tuple.
    Eval {
        #[arg(long)]
        expr: String,
        /// JSON file holding the MatrixTuple evaluation point.
        #[arg(long)]
        point: PathBuf,
    },
    /// Linearize a matrix polynomial into a monic pencil.
    Linearize {
        #[arg(long)]
        poly: PathBuf,
        /// Also verify the factorization identity numerically.
        #[arg(long)]
        verify: bool,
    },
    /// Atomhood certificate via pencil irreducibility.
    Atom {
        #[arg(long)]
        poly: PathBuf,
    },
    /// Burnside irreducibility of a coefficient tuple.
    Irreducible {
        #[arg(long)]
        tuple: PathBuf,
    },
    /// Joint spectral radius of a tuple over the row ball.
    Specrad {
        #[arg(long)]
        tuple: PathBuf,
        #[arg(long, default_value = "rowball")]
        ball: String,
    },
    /// Sampled stability scan of an expression over a ball.
    Stable {
        #[arg(long)]
        expr: String,
        #[arg(long)]
        ball: String,
    },
    /// Full norm-bound ledger for a matrix polynomial.
    Ngn {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        ball: String,
    },
    /// Synthesize a descriptor realization for an expression.
    Realize {
        #[arg(long)]
        expr: String,
    },
    /// Verify an inverse-system realization of a polynomial.
    FmCheck {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        fm: PathBuf,
    },
    /// Parallel-sum accretivity suites.
    Psum {
        /// Contractivity and accretivity over sampled bidisk points.
        #[arg(long)]
        check: bool,
        /// Norm blow-up along the decoupled witness family.
        #[arg(long)]
        decoupled: bool,
    },
    /// Recompute a stored worked example and diff against expected values.
    Reproduce {
        id: String,
        /// Directory of expected-value files; defaults to the bundled set.
        #[arg(long)]
        expected_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Serialize)]
struct RunConfig {
    seed: u64,
    levels: Vec<usize>,
    samples_per_level: usize,
    r_grid: Vec<f64>,
    tolerance: f64,
    output: Option<String>,
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    version: String,
    config: RunConfig,
    result: T,
}

enum CliError {
    Input(String),
    Verdict(String),
}

impl From<freeball::Error> for CliError {
    fn from(e: freeball::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.run.jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Verdict(msg)) => {
            eprintln!("{}", json!({ "error": msg, "kind": "verdict" }));
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("{}", json!({ "error": msg, "kind": "input" }));
            ExitCode::from(2)
        }
    }
}

fn config_from(args: &RunArgs) -> RunConfig {
    let seed = args
        .seed
        .or_else(|| {
            std::env::var("FREEBALL_SEED")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(DEFAULT_SEED);
    RunConfig {
        seed,
        levels: args.levels.clone().unwrap_or_else(|| vec![1, 2, 3]),
        samples_per_level: args.samples.unwrap_or(40),
        r_grid: args.r_grid.clone().unwrap_or_else(ngn::default_r_grid),
        tolerance: args.tolerance.unwrap_or(1e-8),
        output: args
            .output
            .as_ref()
            .map(|p| p.to_string_lossy().into_owned()),
    }
}

fn budget_from(cfg: &RunConfig) -> Budget {
    Budget {
        levels: cfg.levels.clone(),
        samples_per_level: cfg.samples_per_level,
        hill_steps: 30,
    }
}

fn parse_ball(text: &str, d: usize) -> Result<BallSpec, CliError> {
    let (kind, dim) = match text.split_once(':') {
        Some((k, n)) => (
            k,
            n.parse::<usize>()
                .map_err(|_| CliError::Input(format!("bad ball dimension in {text:?}")))?,
        ),
        None => (text, d),
    };
    match kind {
        "rowball" => Ok(BallSpec::row_ball(dim.max(1))),
        "polydisk" => Ok(BallSpec::polydisk(dim.max(1))),
        _ => Err(CliError::Input(format!(
            "unknown ball spec {text:?}; expected rowball[:d] or polydisk[:d]"
        ))),
    }
}

/// Number of variables an expression mentions, read off the raw text.
fn scan_var_count(text: &str) -> usize {
    let bytes = text.as_bytes();
    let mut max = 0usize;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'Z' {
            let start = i + 1;
            let mut end = start;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            if end > start {
                if let Ok(j) = text[start..end].parse::<usize>() {
                    max = max.max(j);
                }
            }
            i = end;
        } else {
            i += 1;
        }
    }
    max.max(1)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(cfg: &RunConfig, result: T) -> Result<(), CliError> {
    let report = Report {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        result,
    };
    let text = serde_json::to_string_pretty(&report)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn equivalence_json(e: &Equivalence) -> serde_json::Value {
    match e {
        Equivalence::Equivalent { samples_compared } => {
            json!({ "verdict": "equivalent", "samples_compared": samples_compared })
        }
        Equivalence::Distinct {
            witness,
            discrepancy,
        } => json!({ "verdict": "distinct", "discrepancy": discrepancy, "witness": witness }),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = config_from(&cli.run);
    match &cli.command {
        Command::Eval { expr, point } => {
            let x: MatrixTuple = read_json(point)?;
            let e = ratexpr::parse_expr(expr, x.d)?;
            let value = ratexpr::eval_expr(&e, &x)?;
            emit(&cfg, json!({ "expr": ratexpr::print_expr(&e), "value": value }))
        }
        Command::Linearize { poly, verify } => {
            let p: MatPoly = read_json(poly)?;
            let lin = linearize::trim(&linearize::linearize(&p)?)?;
            let verify_report = if *verify {
                Some(linearize::verify(&lin, 20, cfg.seed)?)
            } else {
                None
            };
            emit(&cfg, json!({ "linearization": lin, "verify": verify_report }))
        }
        Command::Atom { poly } => {
            let p: MatPoly = read_json(poly)?;
            let cert = linearize::atom_certificate(&p)?;
            let result = match cert {
                AtomCertificate::Atom {
                    linearization,
                    algebra_dim,
                } => json!({
                    "verdict": "atom",
                    "algebra_dim": algebra_dim,
                    "pencil_size": linearization.p.k + linearization.pad,
                }),
                AtomCertificate::Inconclusive {
                    reason,
                    algebra_dim,
                    linearization,
                } => json!({
                    "verdict": "inconclusive",
                    "reason": reason,
                    "algebra_dim": algebra_dim,
                    "pencil_size": linearization.p.k + linearization.pad,
                }),
            };
            emit(&cfg, result)
        }
        Command::Irreducible { tuple } => {
            let a: MatrixTuple = read_json(tuple)?;
            emit(&cfg, pencil::irreducible(&a))
        }
        Command::Specrad { tuple, ball } => {
            if ball != "rowball" {
                return Err(CliError::Input(
                    "joint spectral radius is defined over the row ball only".into(),
                ));
            }
            let a: MatrixTuple = read_json(tuple)?;
            emit(
                &cfg,
                json!({ "jsr": pencil::jsr_rowball(&a), "d": a.d, "level": a.level }),
            )
        }
        Command::Stable { expr, ball } => {
            let d = scan_var_count(expr);
            let e = ratexpr::parse_expr(expr, d)?;
            let spec = parse_ball(ball, d)?;
            let scan = ngn::stability_scan(
                &|x: &MatrixTuple| ratexpr::eval_expr(&e, x),
                &spec,
                &cfg.levels,
                cfg.samples_per_level,
                cfg.seed,
            )?;
            let singular = matches!(scan.verdict, ngn::StabilityVerdict::SingularWitness { .. });
            emit(&cfg, scan)?;
            if singular {
                return Err(CliError::Verdict("singular point found in the ball".into()));
            }
            Ok(())
        }
        Command::Ngn { poly, ball } => {
            let p: MatPoly = read_json(poly)?;
            let spec = parse_ball(ball, p.d)?;
            let opts = ngn::BoundOptions {
                r_grid: Some(cfg.r_grid.clone()),
                budget: Some(budget_from(&cfg)),
                ..Default::default()
            };
            let report = ngn::bound_report(&p, &spec, &opts, cfg.seed)?;
            let inconsistent = matches!(report.verdict, ngn::Verdict::Inconsistent { .. });
            emit(&cfg, report)?;
            if inconsistent {
                return Err(CliError::Verdict(
                    "empirical supremum exceeds an exact bound".into(),
                ));
            }
            Ok(())
        }
        Command::Realize { expr } => {
            let d = scan_var_count(expr);
            let e = ratexpr::parse_expr(expr, d)?;
            let (desc, coherence) = realization::synth_verified(&e, d, cfg.seed)?;
            emit(
                &cfg,
                json!({ "dimension": desc.dim(), "descriptor": desc, "coherence": coherence }),
            )
        }
        Command::FmCheck { poly, fm } => {
            let p: MatPoly = read_json(poly)?;
            let fmr: realization::FMRealization = read_json(fm)?;
            let spec = BallSpec::polydisk(p.d.max(1));
            let report = realization::fm_check(&p, &fmr, &spec, 100, cfg.seed)?;
            let ok = report.max_residual <= cfg.tolerance;
            emit(&cfg, report)?;
            if !ok {
                return Err(CliError::Verdict(
                    "realization does not reproduce the inverse".into(),
                ));
            }
            Ok(())
        }
        Command::Psum { check, decoupled } => {
            if !check && !decoupled {
                return Err(CliError::Input(
                    "pass --check and/or --decoupled".into(),
                ));
            }
            let mut out = serde_json::Map::new();
            if *check {
                let report = ngn::psum_check(&budget_from(&cfg), cfg.seed)?;
                let forms = [
                    ratexpr::parallel_sum(),
                    ratexpr::parallel_sum_harmonic(),
                    ratexpr::parallel_sum_reversed(),
                ];
                let mut pairs = Vec::new();
                for i in 0..forms.len() {
                    for j in i + 1..forms.len() {
                        let eq = ratexpr::equivalent(
                            &forms[i],
                            &forms[j],
                            200,
                            derive_seed(cfg.seed, i as u64, j as u64),
                        )?;
                        pairs.push(equivalence_json(&eq));
                    }
                }
                out.insert("accretivity".into(), serde_json::to_value(&report)?);
                out.insert("form_equivalences".into(), json!(pairs));
            }
            if *decoupled {
                let grid = [0.6, 0.45, 0.3, 0.2, 0.1, 0.05];
                let rows = ngn::decoupled_psum_demo(&grid)?;
                let swap = ratexpr::equivalent(
                    &ratexpr::parallel_sum_left(),
                    &ratexpr::swap_vars(&ratexpr::parallel_sum_left()),
                    200,
                    cfg.seed,
                )?;
                out.insert("witness_family".into(), serde_json::to_value(&rows)?);
                out.insert("swapped_arguments".into(), equivalence_json(&swap));
            }
            emit(&cfg, serde_json::Value::Object(out))
        }
        Command::Reproduce { id, expected_dir } => reproduce(&cfg, id, expected_dir.as_ref()),
    }
}

// ---------------------------------------------------------------------------
// Reproduction of the stored worked examples

#[derive(Serialize, serde::Deserialize)]
struct ExpectedFile {
    id: String,
    checks: Vec<Check>,
}

#[derive(Clone, Serialize, serde::Deserialize)]
struct Check {
    name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    expect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max: Option<f64>,
}

#[derive(Serialize)]
struct CheckOutcome {
    #[serde(flatten)]
    check: Check,
    actual: f64,
    pass: bool,
}

fn reproduce(cfg: &RunConfig, id: &str, dir: Option<&PathBuf>) -> Result<(), CliError> {
    let dir = dir
        .cloned()
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("expected"));
    let path = dir.join(format!("{id}.json"));
    let expected: ExpectedFile = read_json(&path)?;
    if expected.id != id {
        return Err(CliError::Input(format!(
            "expected file {} declares id {:?}",
            path.display(),
            expected.id
        )));
    }

    let values = compute_example(cfg, id)?;
    let mut outcomes = Vec::new();
    let mut all_pass = true;
    for check in &expected.checks {
        let actual = *values.get(check.name.as_str()).ok_or_else(|| {
            CliError::Input(format!("example {id} does not produce value {:?}", check.name))
        })?;
        let mut pass = true;
        if let Some(e) = check.expect {
            pass &= (actual - e).abs() <= check.tol.unwrap_or(0.0);
        }
        if let Some(lo) = check.min {
            pass &= actual >= lo;
        }
        if let Some(hi) = check.max {
            pass &= actual <= hi;
        }
        all_pass &= pass;
        outcomes.push(CheckOutcome {
            check: check.clone(),
            actual,
            pass,
        });
    }
    emit(
        cfg,
        json!({
            "id": id,
            "values": values,
            "checks": outcomes,
            "verdict": if all_pass { "pass" } else { "fail" },
        }),
    )?;
    if !all_pass {
        return Err(CliError::Verdict(format!("example {id} deviates from stored values")));
    }
    Ok(())
}

fn matrix_unit(i: usize, j: usize) -> CMatrix {
    let mut e = CMatrix::zeros(3, 3);
    e[(i, j)] = C64::new(1.0, 0.0);
    e
}

fn compute_example(cfg: &RunConfig, id: &str) -> Result<BTreeMap<&'static str, f64>, CliError> {
    let mut v: BTreeMap<&'static str, f64> = BTreeMap::new();
    let budget = budget_from(cfg);
    match id {
        "eg2.6" => {
            let p = gallery::example_symmetrized_product();
            let lin = linearize::trim(&linearize::linearize(&p)?)?;
            let reference = gallery::symmetrized_product_pencil();
            let mismatch = (0..2)
                .map(|j| lin.a.matrices[j].max_abs_diff(&reference.matrices[j]))
                .fold(0.0, f64::max);
            let report = linearize::verify(&lin, 100, cfg.seed)?;
            let az = &lin.a.matrices[0];
            let aw = &lin.a.matrices[1];
            let s = 8.0_f64.sqrt();
            let unit_err = [
                ((az * &(aw * aw)).scale_re(s), matrix_unit(0, 1)),
                ((aw * &(az * az)).scale_re(s), matrix_unit(0, 2)),
                ((&(az * az) * aw).scale_re(s), matrix_unit(1, 0)),
                ((&(aw * aw) * az).scale_re(s), matrix_unit(2, 0)),
            ]
            .iter()
            .map(|(prod, unit)| prod.max_abs_diff(unit))
            .fold(0.0, f64::max);
            v.insert("pencil_mismatch", mismatch);
            v.insert("pad", lin.pad as f64);
            v.insert("coeff_residual", report.max_coeff_residual);
            v.insert("numeric_residual", report.max_numeric_residual);
            v.insert("matrix_unit_residual", unit_err);
        }
        "ex3.3" => {
            let rows = ngn::jordan_demo(&[0.5, 0.9, 0.99, 0.9999])?;
            let gap = rows
                .iter()
                .map(|r| (r.top_right_closed_form - r.top_right_numeric).abs())
                .fold(0.0, f64::max);
            v.insert("closed_numeric_gap", gap);
            v.insert("top_right_r05", rows[0].top_right_numeric);
            v.insert("top_right_r099", rows[2].top_right_numeric);
            v.insert("top_right_r09999", rows[3].top_right_numeric);
        }
        "ex3.7-1" => {
            let thm = ngn::bound_theorem_a(2.0, 2.0, 1, 2.0, 2.0, 1);
            v.insert("thm_left", thm.left);
            v.insert("thm_right", thm.right);
            v.insert("prop_bound", ngn::bound_prop36(1.0, 2.0));
            let p = gallery::example_symmetrized_product();
            let sup = ngn::empirical_sup(
                &p,
                &BallSpec::polydisk(2),
                &cfg.r_grid,
                &budget,
                cfg.seed,
            )?;
            let probe = MatrixTuple::new(vec![
                CMatrix::identity(sup.sup_left.witness.level)
                    .scale(C64::new(0.0, 1.0));
                2
            ])
            .unwrap();
            let dist = (0..2)
                .map(|j| sup.sup_left.witness.matrices[j].max_abs_diff(&probe.matrices[j]))
                .fold(0.0, f64::max);
            v.insert("sup_left", sup.sup_left.value);
            v.insert("sup_right", sup.sup_right.value);
            v.insert("witness_r", sup.sup_left.r);
            v.insert("witness_dist", dist);
        }
        "ex3.7-2" => {
            let p = gallery::example_boundary_zero();
            let lin = linearize::trim(&linearize::linearize(&p)?)?;
            let spec = BallSpec::polydisk(2);
            let sim = pencil::similarity_to_dual_ball(&lin.a, &spec, &budget, cfg.seed)?;
            let reference = gallery::boundary_zero_dual_tuple();
            let b_mismatch = (0..2)
                .map(|j| sim.b.matrices[j].max_abs_diff(&reference.matrices[j]))
                .fold(0.0, f64::max);
            let (u, vv) = gallery::boundary_zero_dual_vectors();
            let mut uv = CMatrix::zeros(2, 2);
            uv.set_block(0, 0, &u);
            uv.set_block(0, 1, &vv);
            let scan = ngn::stability_scan(
                &|x: &MatrixTuple| p.eval(x),
                &spec,
                &[1, 2, 3, 4],
                cfg.samples_per_level.max(100),
                cfg.seed,
            )?;
            let stable = matches!(scan.verdict, ngn::StabilityVerdict::NoWitness);
            let ones = MatrixTuple::scalars(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
            v.insert("kappa", sim.kappa);
            v.insert("b_mismatch", b_mismatch);
            v.insert("dual_frame_norm_sq", uv.opnorm().powi(2));
            v.insert("prop_bound", ngn::bound_prop36(sim.kappa, 2.0));
            v.insert("stable", if stable { 1.0 } else { 0.0 });
            v.insert("boundary_value", p.eval(&ones)?.max_abs());
        }
        "sec6.1" => {
            let p = gallery::example_symmetrized_product();
            let lin = linearize::trim(&linearize::linearize(&p)?)?;
            let fm = realization::fm_from_linearization(&lin, cfg.seed)?;
            let spec = BallSpec::polydisk(2);
            let check = realization::fm_check(&p, &fm, &spec, 100, cfg.seed)?;
            let bound = realization::fm_bound(&fm, &spec, 2.0, 1.0, &budget, cfg.seed)?;
            v.insert("fm_max_residual", check.max_residual);
            v.insert("c_factor", bound.c_factor);
            v.insert("b_factor", bound.b_factor);
            v.insert("headline", bound.headline);
        }
        "psum" => {
            let wide = Budget {
                levels: vec![1, 2, 3, 4],
                samples_per_level: cfg.samples_per_level.max(250),
                hill_steps: 0,
            };
            let report = ngn::psum_check(&wide, cfg.seed)?;
            let forms = [
                ratexpr::parallel_sum(),
                ratexpr::parallel_sum_harmonic(),
                ratexpr::parallel_sum_reversed(),
            ];
            let mut equivalent = true;
            for i in 0..forms.len() {
                for j in i + 1..forms.len() {
                    let eq = ratexpr::equivalent(
                        &forms[i],
                        &forms[j],
                        200,
                        derive_seed(cfg.seed, i as u64, j as u64),
                    )?;
                    equivalent &= matches!(eq, Equivalence::Equivalent { .. });
                }
            }
            v.insert("samples", report.samples as f64);
            v.insert("max_norm", report.max_norm);
            v.insert("min_re_eig", report.min_re_eig);
            v.insert("min_re_eig_inv_gap", report.min_re_eig_inv_gap);
            v.insert("min_re_eig_halfplane_gap", report.min_re_eig_halfplane_gap);
            v.insert("forms_equivalent", if equivalent { 1.0 } else { 0.0 });
        }
        "ex5.6" => {
            let grid = [0.6, 0.45, 0.3, 0.2, 0.1, 0.05];
            let rows = ngn::decoupled_psum_demo(&grid)?;
            let in_ball = rows.iter().all(|r| r.in_ball);
            let increasing = rows.windows(2).all(|w| w[1].norm_left > w[0].norm_left);
            let swap = ratexpr::equivalent(
                &ratexpr::parallel_sum_left(),
                &ratexpr::swap_vars(&ratexpr::parallel_sum_left()),
                200,
                cfg.seed,
            )?;
            v.insert("in_ball", if in_ball { 1.0 } else { 0.0 });
            v.insert("norm_left_final", rows.last().unwrap().norm_left);
            v.insert("monotone_increase", if increasing { 1.0 } else { 0.0 });
            v.insert(
                "swapped_distinct",
                if matches!(swap, Equivalence::Distinct { .. }) {
                    1.0
                } else {
                    0.0
                },
            );
        }
        other => {
            return Err(CliError::Input(format!(
                "unknown example id {other:?}; known ids: eg2.6, ex3.3, ex3.7-1, ex3.7-2, sec6.1, psum, ex5.6"
            )))
        }
    }
    Ok(v)
}
