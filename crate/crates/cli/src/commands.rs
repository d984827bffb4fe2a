use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nalgebra::Complex;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use milnor::complex::fusion_order_invariance_check;
use milnor::flow::milnor::element_line;
use milnor::flow::{compare_milnor, milnor_metric, CriticalElement};
use milnor::rs_circle::{bz_check_circle, CircleRSSpec, HurwitzParams};
use milnor::verify::selfcheck;
use milnor::zeta::{check_prop, log_abs_ruelle, order_at, ruelle_eval, zeros_poles_in_rect, Rect, ZetaSpec, ZetaValue};

use crate::error::CliError;
use crate::report::{fmt_f64, num, Check, Format, RunReport, Table};
use crate::schema::{parse_circle, parse_system, sha256_hex};

/// Threshold for the fusion-order and surgery comparisons.
pub const COMPARISON_TOL: f64 = 1e-9;
/// Threshold for `‖1‖ = |R(0)|^{-1}`.
pub const ZETA_TOL: f64 = 1e-10;
/// Threshold for the Ray-Singer versus Milnor comparison on the circle.
pub const CIRCLE_TOL: f64 = 1e-8;
/// Random fusion orders tried by `milnor`.
pub const FUSION_TRIALS: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "milnor", version, about = "Torsion invariants of Morse-Smale flows twisted by flat bundles")]
pub struct Cli {
    /// Rank and matching tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Euler-Maclaurin truncation point for the Hurwitz zeta function.
    #[arg(long = "hurwitz-M", global = true, default_value_t = 50)]
    pub hurwitz_m: usize,
    /// Number of Bernoulli corrections for the Hurwitz zeta function.
    #[arg(long = "hurwitz-K", global = true, default_value_t = 6)]
    pub hurwitz_k: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Milnor metric on the determinant line of twisted cohomology.
    Milnor { file: PathBuf },
    /// Ruelle zeta function: point values, grids, zeros and poles.
    Zeta {
        file: PathBuf,
        /// Evaluation point `re,im`.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0,0")]
        s: Complex<f64>,
        /// Grid along the real axis: `min,max,n`.
        #[arg(long, value_parser = parse_axis, allow_hyphen_values = true)]
        grid_re: Option<Axis>,
        /// Grid along the imaginary axis: `min,max,n`.
        #[arg(long, value_parser = parse_axis, allow_hyphen_values = true)]
        grid_im: Option<Axis>,
        /// List zeros and poles in `re_min,re_max,im_min,im_max`.
        #[arg(long, value_parser = parse_rect, allow_hyphen_values = true)]
        rect: Option<Rect<f64>>,
    },
    /// Milnor metrics before and after Franks surgery on every closed orbit.
    FranksCompare { file: PathBuf },
    /// Ray-Singer metric of a unitary flat bundle on the circle.
    RsCircle {
        /// JSON file with a `holonomy` matrix.
        #[arg(required_unless_present = "phases")]
        file: Option<PathBuf>,
        /// Phases `α_j ∈ [0, 1)` of a diagonal holonomy.
        #[arg(long, value_delimiter = ',', conflicts_with = "file")]
        phases: Option<Vec<f64>>,
    },
    /// Runs every property suite with a fixed seed.
    Selfcheck,
}

/// Evenly spaced points `min..=max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    fn single(x: f64) -> Self {
        Self { min: x, max: x, n: 1 }
    }

    fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.n - 1) as f64;
        (0..self.n).map(|i| self.min + step * i as f64).collect()
    }
}

fn floats(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, found {}", v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok(v)
}

fn parse_complex(s: &str) -> Result<Complex<f64>, String> {
    let v = floats(s, 2)?;
    Ok(Complex::new(v[0], v[1]))
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    let (head, n) = s.rsplit_once(',').ok_or("expected min,max,n")?;
    let n: usize = n.trim().parse().map_err(|e| format!("`{n}`: {e}"))?;
    if n == 0 {
        return Err("n must be at least 1".into());
    }
    let v = floats(head, 2)?;
    Ok(Axis { min: v[0], max: v[1], n })
}

fn parse_rect(s: &str) -> Result<Rect<f64>, String> {
    let v = floats(s, 4)?;
    if v[0] > v[1] || v[2] > v[3] {
        return Err("expected re_min <= re_max and im_min <= im_max".into());
    }
    Ok(Rect {
        re_min: v[0],
        re_max: v[1],
        im_min: v[2],
        im_max: v[3],
    })
}

pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return Err(CliError::Usage(format!("--tol must be positive, found {}", cli.tol)));
    }
    let hurwitz = HurwitzParams::new(cli.hurwitz_m, cli.hurwitz_k)
        .map_err(|e| CliError::invalid("--hurwitz-M/--hurwitz-K", e))?;
    match &cli.command {
        Command::Milnor { file } => cmd_milnor(file, cli.tol, cli.seed),
        Command::Zeta {
            file,
            s,
            grid_re,
            grid_im,
            rect,
        } => cmd_zeta(file, cli.tol, *s, *grid_re, *grid_im, *rect),
        Command::FranksCompare { file } => cmd_franks_compare(file, cli.tol),
        Command::RsCircle { file, phases } => cmd_rs_circle(file.as_deref(), phases.as_deref(), cli.tol, hurwitz),
        Command::Selfcheck => Ok(cmd_selfcheck(cli.seed.unwrap_or(0), cli.tol)),
    }
}

fn betti_value(betti: &[usize]) -> Value {
    json!(betti)
}

pub fn cmd_milnor(file: &Path, tol: f64, seed: Option<u64>) -> Result<RunReport, CliError> {
    let loaded = parse_system(file)?;
    let sys = &loaded.system;
    let mut report = RunReport::new("milnor", loaded.digest.clone(), tol);
    let m = milnor_metric(sys, tol).map_err(|e| CliError::numerical("milnor metric", e))?;
    let acyclic = m.betti.iter().all(|&b| b == 0);
    report.output("betti", betti_value(&m.betti));
    report.output("acyclic", acyclic);
    if acyclic {
        let l = m
            .log_norm_of_unit(tol)
            .map_err(|e| CliError::numerical("milnor metric", e))?;
        report.output("log_norm_of_unit", num(l));
        report.output("norm_of_unit", num(l.exp()));
    } else {
        // norm of the wedge of orthonormal harmonic representatives
        report.output("generator_log_norm", num(m.line.log_norm));
    }
    let elements: Vec<Value> = sys
        .elements()
        .iter()
        .map(|e| {
            let kind = match e {
                CriticalElement::Fixed(_) => "fixed",
                CriticalElement::Orbit(_) => "orbit",
            };
            json!({ "id": e.id(), "kind": kind, "index": e.index() })
        })
        .collect();
    report.output("elements", elements);

    if let Some(model) = sys.chain_model().filter(|f| f.n_levels() >= 3) {
        let seed = seed.unwrap_or(0);
        report.seed = Some(seed);
        let lines = sys
            .elements()
            .iter()
            .map(|e| element_line(e, sys.degrees(), tol))
            .collect::<milnor::Result<Vec<_>>>()
            .map_err(|e| CliError::numerical("element lines", e))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let worst = fusion_order_invariance_check(model, &lines, FUSION_TRIALS, &mut rng, tol)
            .map_err(|e| CliError::numerical("fusion order check", e))?;
        report.check(Check::below("fusion_order_invariance", worst, COMPARISON_TOL));
    }
    Ok(report)
}

struct ZetaPoint {
    s: Complex<f64>,
    /// `None` at a pole.
    value: Option<Complex<f64>>,
    log_abs: f64,
    order: i64,
}

fn zeta_point(spec: &ZetaSpec<f64>, s: Complex<f64>, tol: f64) -> Result<ZetaPoint, CliError> {
    let ctx = || format!("zeta at s = {} + {}i", s.re, s.im);
    let order = order_at(spec, s, tol).map_err(|e| CliError::numerical(ctx(), e))?;
    let value = match ruelle_eval(spec, s, tol).map_err(|e| CliError::numerical(ctx(), e))? {
        ZetaValue::Finite(z) => Some(z),
        ZetaValue::Pole { .. } => None,
    };
    let log_abs = match order {
        0 => log_abs_ruelle(spec, s).map_err(|e| CliError::numerical(ctx(), e))?,
        o if o > 0 => f64::NEG_INFINITY,
        _ => f64::INFINITY,
    };
    Ok(ZetaPoint { s, value, log_abs, order })
}

pub fn cmd_zeta(
    file: &Path,
    tol: f64,
    s: Complex<f64>,
    grid_re: Option<Axis>,
    grid_im: Option<Axis>,
    rect: Option<Rect<f64>>,
) -> Result<RunReport, CliError> {
    let loaded = parse_system(file)?;
    let spec = ZetaSpec::from_system(&loaded.system);
    let mut report = RunReport::new("zeta", loaded.digest.clone(), tol);

    let re_axis = grid_re.unwrap_or(Axis::single(s.re));
    let im_axis = grid_im.unwrap_or(Axis::single(s.im));
    let mut points = Vec::new();
    for re in re_axis.points() {
        for im in im_axis.points() {
            points.push(zeta_point(&spec, Complex::new(re, im), tol)?);
        }
    }
    let values: Vec<Value> = points
        .iter()
        .map(|p| {
            json!({
                "re_s": num(p.s.re),
                "im_s": num(p.s.im),
                "re_R": p.value.map_or(Value::Null, |z| num(z.re)),
                "im_R": p.value.map_or(Value::Null, |z| num(z.im)),
                "log_abs_R": num(p.log_abs),
                "order": p.order,
            })
        })
        .collect();
    report.output("values", values);
    report.table = Some(Table {
        header: vec!["re_s", "im_s", "re_R", "im_R", "log_abs_R", "order_flag"],
        rows: points
            .iter()
            .map(|p| {
                vec![
                    fmt_f64(p.s.re),
                    fmt_f64(p.s.im),
                    p.value.map_or(String::new(), |z| fmt_f64(z.re)),
                    p.value.map_or(String::new(), |z| fmt_f64(z.im)),
                    fmt_f64(p.log_abs),
                    p.order.to_string(),
                ]
            })
            .collect(),
    });

    if let Some(rect) = rect {
        let found = zeros_poles_in_rect(&spec, rect).map_err(|e| CliError::numerical("zeros and poles", e))?;
        let list: Vec<Value> = found
            .iter()
            .map(|z| json!({ "re_s": num(z.s.re), "im_s": num(z.s.im), "order": z.order }))
            .collect();
        report.output("zeros_poles", list);
    }

    match check_prop(&loaded.system, tol) {
        Ok(p) => {
            report.output(
                "norm_vs_zeta",
                json!({
                    "milnor": num(p.milnor),
                    "zeta_inverse": num(p.zeta_inverse),
                    "residual": num(p.residual),
                }),
            );
            report.check(Check::below("milnor_equals_inverse_zeta", p.residual, ZETA_TOL));
        }
        Err(milnor::Error::HypothesisViolation { id, reason }) => {
            report.output("norm_vs_zeta_skipped", format!("{id}: {reason}"));
        }
        Err(e) => return Err(CliError::numerical("milnor norm versus zeta", e)),
    }
    Ok(report)
}

pub fn cmd_franks_compare(file: &Path, tol: f64) -> Result<RunReport, CliError> {
    let loaded = parse_system(file)?;
    let mut report = RunReport::new("franks-compare", loaded.digest.clone(), tol);
    let cmp = compare_milnor(&loaded.system, &loaded.surgery, tol)
        .map_err(|e| CliError::numerical("surgery comparison", e))?;
    let betti = milnor_metric(&loaded.system, tol)
        .map_err(|e| CliError::numerical("milnor metric", e))?
        .betti;
    report.output("betti", betti_value(&betti));
    report.output("lhs", num(cmp.lhs));
    report.output("rhs", num(cmp.rhs));
    report.output("residual", num(cmp.residual));
    report.check(Check::below("surgery_comparison", cmp.residual, COMPARISON_TOL));
    Ok(report)
}

pub fn cmd_rs_circle(
    file: Option<&Path>,
    phases: Option<&[f64]>,
    tol: f64,
    hurwitz: HurwitzParams,
) -> Result<RunReport, CliError> {
    let (spec, digest) = match (file, phases) {
        (Some(path), _) => {
            let (holonomy, digest) = parse_circle(path)?;
            let spec = CircleRSSpec::from_unitary(holonomy).map_err(|e| CliError::invalid("holonomy", e))?;
            (spec, digest)
        }
        (None, Some(phases)) => {
            let spec = CircleRSSpec::from_phases(phases.to_vec()).map_err(|e| CliError::invalid("--phases", e))?;
            let canonical: Vec<String> = phases.iter().map(|a| fmt_f64(*a)).collect();
            (spec, sha256_hex(format!("phases={}", canonical.join(",")).as_bytes()))
        }
        (None, None) => return Err(CliError::Usage("either a holonomy file or --phases is required".into())),
    };
    let mut report = RunReport::new("rs-circle", digest, tol);
    let check = bz_check_circle(&spec, hurwitz, tol).map_err(|e| CliError::numerical("circle comparison", e))?;
    report.output("phases", spec.phases().iter().map(|&a| num(a)).collect::<Vec<_>>());
    report.output("hurwitz", json!({ "M": hurwitz.m, "K": hurwitz.k }));
    report.output("rs_norm_sq", num(check.rs));
    report.output("milnor_norm_sq", num(check.milnor));
    report.output("residual", num(check.residual));
    report.check(Check::below("ray_singer_equals_milnor", check.residual, CIRCLE_TOL));
    Ok(report)
}

pub fn cmd_selfcheck(seed: u64, tol: f64) -> RunReport {
    let mut report = RunReport::new("selfcheck", sha256_hex(format!("selfcheck seed={seed}").as_bytes()), tol);
    report.seed = Some(seed);
    let suites = selfcheck(seed);
    let mut rows = Vec::new();
    let mut listed = Vec::new();
    for s in &suites {
        report.checks.push(Check {
            name: s.name.into(),
            value: s.max_error,
            threshold: s.tolerance,
            passed: s.passed,
        });
        report.passed &= s.passed;
        listed.push(json!({
            "name": s.name,
            "cases": s.cases,
            "max_error": num(s.max_error),
            "tolerance": num(s.tolerance),
            "passed": s.passed,
            "failure": s.failure,
        }));
        rows.push(vec![
            s.name.to_string(),
            s.cases.to_string(),
            fmt_f64(s.max_error),
            fmt_f64(s.tolerance),
            if s.passed { "PASS" } else { "FAIL" }.to_string(),
            s.failure.clone().unwrap_or_default(),
        ]);
    }
    report.output("suites", listed);
    report.table = Some(Table {
        header: vec!["suite", "cases", "max_error", "tolerance", "result", "failure"],
        rows,
    });
    report
}
