//! Command-line front end for the adelic-heights library.
//!
//! Every subcommand prints one report, JSON by default or a flat CSV of
//! (quantity, n, value) rows with --format csv. Exit codes: 0 on success,
//! 1 when a computation fails (torsion degeneration, work limits, lost
//! convergence), 2 when the input itself is malformed.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use adelic_heights::adelic::{
    self, ActionKind, DiagonalAction, EdsFilter, EntropyTrace, PlaceFilter,
};
use adelic_heights::elliptic::{self, CurvePoint, PointStatus, WeierstrassCurve};
use adelic_heights::heights;
use adelic_heights::julia;
use adelic_heights::morphic::{self, PolyMap};
use adelic_heights::places::{self, rat_from_str, rat_to_string};
use adelic_heights::{ExactRational, Place, RateFunction};

#[derive(Parser)]
#[command(
    name = "adelic-heights",
    version,
    about = "Canonical heights and adelic entropy traces, exactly",
    arg_required_else_help = true
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy data for multiplication by a/b on the b-adic solenoid:
    /// Mahler height, Jensen quadrature, periodic-point counts.
    Solenoid {
        /// Numerator of the map (integer).
        #[arg(long)]
        a: String,
        /// Denominator of the map (integer, coprime to a).
        #[arg(long)]
        b: String,
        /// Count periodic points for periods 1..=n.
        #[arg(long, default_value_t = 12)]
        n: u64,
        /// Panels for the Jensen quadrature.
        #[arg(long, default_value_t = 4096)]
        panels: u64,
    },
    /// Elliptic divisibility sequence attached to a rational point:
    /// w, q = w^2 and u = |w at powers of two|, with structure checks.
    Eds {
        /// Curve coefficients a1,a2,a3,a4,a6 (integers).
        #[arg(long)]
        curve: String,
        /// Base point "x;y", coordinates rational.
        #[arg(long)]
        point: String,
        /// Compute terms 1..=n.
        #[arg(long, default_value_t = 20)]
        n: u64,
    },
    /// Canonical height of a rational point with its decomposition into
    /// local heights over the relevant places.
    Height {
        /// Curve coefficients a1,a2,a3,a4,a6 (integers).
        #[arg(long)]
        curve: String,
        /// Point "x;y", or "identity".
        #[arg(long)]
        point: String,
        /// Doubling depth for the canonical-height limit.
        #[arg(long, default_value_t = 10)]
        depth: u64,
        /// Division-polynomial index for the archimedean psi limit.
        #[arg(long, default_value_t = 300)]
        psi_n: u64,
    },
    /// Volume-growth entropy trace of a diagonal action on the adeles.
    Entropy {
        #[arg(long, value_enum)]
        action: EntropyAction,
        /// Normalizing rate: n, nlogn, n^2, logn, or c^n
        /// (fixed by the action when omitted).
        #[arg(long)]
        rate: Option<String>,
        /// Final index of the trace (sequence actions only).
        #[arg(long)]
        horizon: Option<u64>,
        /// all, a single place, subset:p1,p2,..., or complement:p1,...;
        /// for eds-u-inverse instead one of all, singular, quotient.
        #[arg(long, default_value = "all")]
        place_filter: String,
        /// Curve a1,a2,a3,a4,a6 (elliptic actions).
        #[arg(long)]
        curve: Option<String>,
        /// Base point "x;y" (elliptic actions).
        #[arg(long)]
        point: Option<String>,
        /// Doubling or power-of-two depth (elliptic actions).
        #[arg(long)]
        depth: Option<u64>,
        /// Place for flip-local.
        #[arg(long)]
        place: Option<String>,
        /// Comma-separated rational multipliers (explicit action).
        #[arg(long)]
        thetas: Option<String>,
    },
    /// Morphic height of a point under a polynomial map: the global
    /// height, or one local height plus its entropy trace with --place.
    Morphic {
        /// Coefficients c_d,...,c_0 (descending, rational).
        #[arg(long)]
        poly: String,
        /// Base point (rational).
        #[arg(long)]
        q: String,
        /// Orbit depth.
        #[arg(long, default_value_t = 24)]
        depth: u64,
        /// Restrict to one place and include the entropy trace.
        #[arg(long)]
        place: Option<String>,
    },
    /// Archimedean morphic height as a sum over periodic points near the
    /// Julia set, checked against the direct orbit logarithm.
    Julia {
        /// Coefficients c_d,...,c_0 (descending, rational).
        #[arg(long)]
        poly: String,
        /// Base point (rational).
        #[arg(long)]
        q: String,
        /// Period: uses the roots of f^level(z) = z.
        #[arg(long, default_value_t = 8)]
        level: u32,
        /// Relative tolerance for the periodic-point solver.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Panels for the arcsine-measure quadrature (Chebyshev map only).
        #[arg(long, default_value_t = 4096)]
        arcsine_panels: u32,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EntropyAction {
    Primorial,
    InversePrimorial,
    PrimesUpToIndex,
    IdentityIndex,
    Factorial,
    Explicit,
    EllipticB,
    EllipticTheta,
    EdsUInverse,
    FlipLocal,
}

enum CliError {
    Usage(String),
    Math(String),
}

fn usage(msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(msg.to_string())
}

fn math(e: adelic_heights::Error) -> CliError {
    CliError::Math(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Math(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let report = match &cli.command {
        Command::Solenoid { a, b, n, panels } => run_solenoid(a, b, *n, *panels)?,
        Command::Eds { curve, point, n } => run_eds(curve, point, *n)?,
        Command::Height { curve, point, depth, psi_n } => {
            run_height(curve, point, *depth, *psi_n)?
        }
        Command::Entropy {
            action,
            rate,
            horizon,
            place_filter,
            curve,
            point,
            depth,
            place,
            thetas,
        } => run_entropy(EntropyArgs {
            action: *action,
            rate: rate.as_deref(),
            horizon: *horizon,
            place_filter,
            curve: curve.as_deref(),
            point: point.as_deref(),
            depth: *depth,
            place: place.as_deref(),
            thetas: thetas.as_deref(),
        })?,
        Command::Morphic { poly, q, depth, place } => {
            run_morphic(poly, q, *depth, place.as_deref())?
        }
        Command::Julia { poly, q, level, tol, arcsine_panels } => {
            run_julia(poly, q, *level, *tol, *arcsine_panels)?
        }
    };
    emit(cli, &report)
}

// ---------------------------------------------------------------- parsing

fn parse_bigint(s: &str) -> Result<BigInt, CliError> {
    BigInt::from_str(s.trim()).map_err(|_| usage(format!("expected an integer, got {s:?}")))
}

fn parse_rat(s: &str) -> Result<ExactRational, CliError> {
    rat_from_str(s).map_err(math_as_usage)
}

fn math_as_usage(e: adelic_heights::Error) -> CliError {
    usage(e)
}

fn parse_curve(s: &str) -> Result<WeierstrassCurve, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 5 {
        return Err(usage("curve wants five comma-separated integers a1,a2,a3,a4,a6"));
    }
    let c: Vec<BigInt> = parts.iter().map(|t| parse_bigint(t)).collect::<Result<_, _>>()?;
    WeierstrassCurve::new(c[0].clone(), c[1].clone(), c[2].clone(), c[3].clone(), c[4].clone())
        .map_err(math_as_usage)
}

fn parse_point(e: &WeierstrassCurve, s: &str) -> Result<CurvePoint, CliError> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("o") || t.eq_ignore_ascii_case("identity") {
        return Ok(CurvePoint::Identity);
    }
    let (x, y) = t
        .split_once(';')
        .ok_or_else(|| usage("point wants \"x;y\" with rational coordinates, or identity"))?;
    let p = CurvePoint::affine(parse_rat(x)?, parse_rat(y)?);
    if !e.contains(&p) {
        return Err(usage(format!("point {t:?} does not lie on the curve")));
    }
    Ok(p)
}

fn parse_poly(s: &str) -> Result<PolyMap, CliError> {
    let coeffs: Vec<ExactRational> =
        s.split(',').map(parse_rat).collect::<Result<_, _>>()?;
    PolyMap::new(coeffs).map_err(math_as_usage)
}

fn parse_place(s: &str) -> Result<Place, CliError> {
    Place::from_str(s).map_err(math_as_usage)
}

// ------------------------------------------------------------- rendering

/// Finite floats rounded to 12 significant digits; non-finite to null.
fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{x:.12e}").parse().expect("rounded float");
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    serde_json::Number::from_f64(rounded).map(Value::Number).unwrap_or(Value::Null)
}

fn opt_num(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

fn rat_value(q: &ExactRational) -> Value {
    Value::String(rat_to_string(q))
}

fn trace_rows<I: IntoIterator<Item = (u64, f64)>>(rows: I) -> Value {
    Value::Array(
        rows.into_iter().map(|(n, v)| json!({ "n": n, "value": num(v) })).collect(),
    )
}

fn entropy_value(t: &EntropyTrace) -> Value {
    let per_place: Vec<Value> = t
        .per_place
        .iter()
        .map(|pv| {
            json!({
                "place": pv.place.to_string(),
                "log_volume": num(pv.log_volume),
                "valuation_max": pv.valuation_max.map(Value::from).unwrap_or(Value::Null),
            })
        })
        .collect();
    json!({
        "label": t.label,
        "rate": t.rate,
        "estimate": num(t.estimate),
        "target": opt_num(t.target),
        "stabilized": t.stabilized,
        "arch_log_volume": num(t.arch_log_volume),
        "finite_log_volume": num(t.finite_log_volume),
        "per_place": per_place,
        "per_place_truncated": t.per_place_truncated,
        "trace": trace_rows(t.indices.iter().copied().zip(t.quotients.iter().copied())),
    })
}

fn emit(cli: &Cli, report: &Value) -> Result<(), CliError> {
    let text = match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => to_csv(report),
    };
    match &cli.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Math(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => unreachable!("composite handled by caller"),
    }
}

/// Flatten the JSON report into (quantity, n, value) rows. Arrays of
/// {n, value} pairs keep their own index column; everything else gets a
/// dotted path.
fn to_csv(report: &Value) -> String {
    let mut rows: Vec<[String; 3]> =
        vec![["quantity".into(), "n".into(), "value".into()]];
    flatten("", report, &mut rows);
    let mut out = String::new();
    for row in rows {
        out.push_str(&csv_field(&row[0]));
        out.push(',');
        out.push_str(&csv_field(&row[1]));
        out.push(',');
        out.push_str(&csv_field(&row[2]));
        out.push('\n');
    }
    out
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<[String; 3]>) {
    let join = |key: &str| {
        if prefix.is_empty() {
            key.to_string()
        } else {
            format!("{prefix}.{key}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                flatten(&join(k), val, rows);
            }
        }
        Value::Array(arr) => {
            for (i, item) in arr.iter().enumerate() {
                if let Value::Object(m) = item {
                    if m.len() == 2 && m.contains_key("n") && m.contains_key("value") {
                        rows.push([
                            prefix.to_string(),
                            scalar_text(&m["n"]),
                            scalar_text(&m["value"]),
                        ]);
                        continue;
                    }
                }
                flatten(&join(&(i + 1).to_string()), item, rows);
            }
        }
        scalar => rows.push([prefix.to_string(), String::new(), scalar_text(scalar)]),
    }
}

// -------------------------------------------------------------- commands

fn run_solenoid(a: &str, b: &str, n: u64, panels: u64) -> Result<Value, CliError> {
    if n == 0 {
        return Err(usage("n must be at least 1"));
    }
    let a = parse_bigint(a)?;
    let b = parse_bigint(b)?;
    let height = solenoid_height(&a, &b)?;
    let quadrature = adelic_heights::solenoid::jensen_quadrature(&a, &b, panels).map_err(math)?;
    let mut counts = Vec::with_capacity(n as usize);
    let mut growth = Vec::with_capacity(n as usize);
    for k in 1..=n {
        let count = adelic_heights::solenoid::periodic_count(&a, &b, k).map_err(math)?;
        growth.push((k, places::ln_abs_bigint(&count) / k as f64));
        counts.push(count);
    }
    let congruence = adelic_heights::solenoid::mobius_congruence(&counts, n).map_err(math)?;
    Ok(json!({
        "a": a.to_string(),
        "b": b.to_string(),
        "height": num(height),
        "quadrature": num(quadrature),
        "quadrature_gap": num((quadrature - height).abs()),
        "counts": counts.iter().map(|c| Value::String(c.to_string())).collect::<Vec<_>>(),
        "congruence": {
            "n": congruence.n,
            "sum": congruence.sum.to_string(),
            "residue": congruence.residue,
            "nonnegative": congruence.nonnegative,
            "passes": congruence.passes(),
        },
        "trace": trace_rows(growth),
    }))
}

fn solenoid_height(a: &BigInt, b: &BigInt) -> Result<f64, CliError> {
    adelic_heights::solenoid::projective_height(a, b).map_err(math)
}

fn curve_value(e: &WeierstrassCurve) -> Value {
    Value::Array(
        [&e.a1, &e.a2, &e.a3, &e.a4, &e.a6]
            .iter()
            .map(|c| Value::String(c.to_string()))
            .collect(),
    )
}

fn point_value(q: &CurvePoint) -> Value {
    match q {
        CurvePoint::Identity => Value::String("identity".into()),
        CurvePoint::Affine { x, y } => json!({ "x": rat_value(x), "y": rat_value(y) }),
    }
}

fn run_eds(curve: &str, point: &str, n: u64) -> Result<Value, CliError> {
    if n == 0 {
        return Err(usage("n must be at least 1"));
    }
    let e = parse_curve(curve)?;
    let q = parse_point(&e, point)?;
    let seqs = elliptic::eds_sequences(&e, &q, n).map_err(math)?;
    let div = &seqs.division;

    // strong divisibility spot check: w_m | w_n whenever m | n
    let mut divisibility_ok = true;
    for m in 1..=n {
        let wm = &div.w_int[(m - 1) as usize];
        if wm.is_zero() {
            continue;
        }
        let mut k = 2 * m;
        while k <= n {
            if !(&div.w_int[(k - 1) as usize] % wm).is_zero() {
                divisibility_ok = false;
            }
            k += m;
        }
    }
    let square_ok = (1..=n).all(|k| {
        let w = &div.w_int[(k - 1) as usize];
        BigInt::from(div.q_value(k)) == w * w
    });

    let mut trace = Vec::new();
    for k in 1..=n {
        if !div.w_int[(k - 1) as usize].is_zero() {
            trace.push((k, div.log_abs_w(k) / (k * k) as f64));
        }
    }
    Ok(json!({
        "curve": curve_value(&e),
        "point": point_value(&q),
        "s": div.s.to_string(),
        "w": div.w_int.iter().map(|w| Value::String(w.to_string())).collect::<Vec<_>>(),
        "q": (1..=n).map(|k| Value::String(div.q_value(k).to_string())).collect::<Vec<_>>(),
        "u": seqs.u_seq.iter().map(|u| Value::String(u.to_string())).collect::<Vec<_>>(),
        "torsion_indices": div.torsion_indices.clone(),
        "divisibility_ok": divisibility_ok,
        "square_ok": square_ok,
        "trace": trace_rows(trace),
    }))
}

fn run_height(curve: &str, point: &str, depth: u64, psi_n: u64) -> Result<Value, CliError> {
    let e = parse_curve(curve)?;
    let q = parse_point(&e, point)?;
    let report = heights::height_decomposition(&e, &q, depth, psi_n).map_err(math)?;
    let locals: Vec<Value> = report
        .locals
        .iter()
        .map(|l| {
            let reduction = l.reduction.as_ref().map(|r| {
                json!({
                    "curve_type": r.curve_type.label(),
                    "point_status": match r.point_status {
                        PointStatus::Nonsingular => "nonsingular",
                        PointStatus::Singular => "singular",
                    },
                    "model_sensitive": r.model_sensitive,
                })
            });
            json!({
                "place": l.place.to_string(),
                "value": num(l.value),
                "method": l.method.label(),
                "epsilon": l.epsilon,
                "reduction": reduction.unwrap_or(Value::Null),
            })
        })
        .collect();
    let locals_sum: f64 = report.locals.iter().map(|l| l.value).sum();
    Ok(json!({
        "curve": curve_value(&e),
        "point": point_value(&q),
        "naive": num(heights::naive_height(&q)),
        "hhat": num(report.hhat),
        "torsion": report.torsion,
        "locals": locals,
        "locals_sum": num(locals_sum),
        "residual": num(report.residual),
        "arch_psi": num(report.arch_psi),
        "arch_subtraction": num(report.arch_subtraction),
        "arch_gap": num(report.arch_gap),
        "trace": trace_rows(
            report.trace.iter().enumerate().map(|(i, t)| (i as u64, *t)),
        ),
    }))
}

struct EntropyArgs<'a> {
    action: EntropyAction,
    rate: Option<&'a str>,
    horizon: Option<u64>,
    place_filter: &'a str,
    curve: Option<&'a str>,
    point: Option<&'a str>,
    depth: Option<u64>,
    place: Option<&'a str>,
    thetas: Option<&'a str>,
}

fn run_entropy(args: EntropyArgs) -> Result<Value, CliError> {
    use EntropyAction::*;
    let needs_curve = matches!(args.action, EllipticB | EllipticTheta | EdsUInverse | FlipLocal);
    if !needs_curve && (args.curve.is_some() || args.point.is_some() || args.depth.is_some()) {
        return Err(usage("--curve, --point and --depth apply only to elliptic actions"));
    }
    if needs_curve && args.rate.is_some() {
        return Err(usage("the rate is fixed for elliptic actions"));
    }
    if args.thetas.is_some() && args.action != Explicit {
        return Err(usage("--thetas applies only to the explicit action"));
    }
    if args.place.is_some() && args.action != FlipLocal {
        return Err(usage("--place applies only to flip-local"));
    }

    let curve_point = |args: &EntropyArgs| -> Result<(WeierstrassCurve, CurvePoint), CliError> {
        let c = args.curve.ok_or_else(|| usage("this action needs --curve"))?;
        let p = args.point.ok_or_else(|| usage("this action needs --point"))?;
        let e = parse_curve(c)?;
        let q = parse_point(&e, p)?;
        Ok((e, q))
    };

    let trace = match args.action {
        Primorial | InversePrimorial | PrimesUpToIndex | IdentityIndex | Factorial
        | Explicit => {
            let kind = match args.action {
                Primorial => ActionKind::Primorial,
                InversePrimorial => ActionKind::InversePrimorial,
                PrimesUpToIndex => ActionKind::PrimesUpToIndex,
                IdentityIndex => ActionKind::IdentityIndex,
                Factorial => ActionKind::Factorial,
                Explicit => {
                    let list = args
                        .thetas
                        .ok_or_else(|| usage("the explicit action needs --thetas"))?;
                    let thetas: Vec<ExactRational> =
                        list.split(',').map(parse_rat).collect::<Result<_, _>>()?;
                    ActionKind::Explicit(thetas)
                }
                EllipticB | EllipticTheta | EdsUInverse | FlipLocal => unreachable!(),
            };
            let default_rate = match &kind {
                ActionKind::Primorial | ActionKind::Factorial | ActionKind::InversePrimorial => {
                    RateFunction::NLogN
                }
                ActionKind::PrimesUpToIndex | ActionKind::Explicit(_) => RateFunction::Linear,
                ActionKind::IdentityIndex => RateFunction::LogN,
            };
            let rate = match args.rate {
                Some(r) => RateFunction::from_str(r).map_err(math_as_usage)?,
                None => default_rate,
            };
            let filter = PlaceFilter::from_str(args.place_filter).map_err(math_as_usage)?;
            let horizon = args.horizon.unwrap_or(match &kind {
                ActionKind::Explicit(thetas) => thetas.len() as u64,
                _ => 10_000,
            });
            let action = DiagonalAction { kind, rate, filter };
            adelic::entropy_trace(&action, horizon).map_err(math)?
        }
        EllipticB | EllipticTheta => {
            let (e, q) = curve_point(&args)?;
            if args.horizon.is_some() {
                return Err(usage("use --depth for elliptic actions"));
            }
            let depth = args.depth.unwrap_or(10);
            if args.action == EllipticB {
                adelic::elliptic_real_entropy(&e, &q, depth).map_err(math)?
            } else {
                adelic::elliptic_adelic_entropy(&e, &q, depth).map_err(math)?
            }
        }
        EdsUInverse => {
            let (e, q) = curve_point(&args)?;
            if args.horizon.is_some() {
                return Err(usage("use --depth for elliptic actions"));
            }
            let depth = args.depth.unwrap_or(8);
            let filter = EdsFilter::from_str(args.place_filter).map_err(math_as_usage)?;
            adelic::eds_entropy(&e, &q, depth, filter).map_err(math)?
        }
        FlipLocal => {
            let (e, q) = curve_point(&args)?;
            let v = parse_place(args.place.ok_or_else(|| usage("flip-local needs --place"))?)?;
            if args.place_filter != "all" {
                return Err(usage("flip-local selects its place with --place"));
            }
            let n_max = args.horizon.unwrap_or(150);
            adelic::local_flip_entropy(&e, &q, v, n_max).map_err(math)?
        }
    };
    Ok(entropy_value(&trace))
}

fn run_morphic(poly: &str, q: &str, depth: u64, place: Option<&str>) -> Result<Value, CliError> {
    let f = parse_poly(poly)?;
    let q = parse_rat(q)?;
    let poly_json: Vec<Value> = f.coefficients().iter().map(rat_value).collect();
    match place {
        Some(v) => {
            let v = parse_place(v)?;
            let local = morphic::morphic_local_height(&f, &q, v, depth).map_err(math)?;
            let entropy = morphic::morphic_entropy(&f, &q, v, depth).map_err(math)?;
            Ok(json!({
                "poly": poly_json,
                "q": rat_value(&q),
                "degree": f.degree(),
                "place": v.to_string(),
                "value": num(local.value),
                "preperiodic": local.preperiodic,
                "truncated": local.truncated,
                "entropy": entropy_value(&entropy),
                "trace": trace_rows(
                    local.trace.iter().enumerate().map(|(i, t)| (i as u64, *t)),
                ),
            }))
        }
        None => {
            let global = morphic::morphic_global_height(&f, &q, depth).map_err(math)?;
            let locals: Vec<Value> = global
                .locals
                .iter()
                .map(|(v, value)| json!({ "place": v.to_string(), "value": num(*value) }))
                .collect();
            Ok(json!({
                "poly": poly_json,
                "q": rat_value(&q),
                "degree": f.degree(),
                "value": num(global.value),
                "locals": locals,
                "preperiodic": global.preperiodic,
                "truncated": global.truncated,
                "trace": Value::Array(vec![]),
            }))
        }
    }
}

fn run_julia(
    poly: &str,
    q: &str,
    level: u32,
    tol: f64,
    arcsine_panels: u32,
) -> Result<Value, CliError> {
    let f = parse_poly(poly)?;
    let q = parse_rat(q)?;
    let report = julia::julia_local_height(&f, &q, level, tol).map_err(math)?;

    // the Chebyshev-like map 2z^2 - 1 has the closed form and the
    // arcsine-measure quadrature as cross checks
    let chebyshev_coeffs = [
        ExactRational::from_integer(2.into()),
        ExactRational::zero(),
        ExactRational::from_integer((-1).into()),
    ];
    let is_chebyshev = f.coefficients() == chebyshev_coeffs.as_slice();
    let (closed_form, arcsine) = if is_chebyshev {
        let qc = Complex64::new(q.to_f64().unwrap_or(f64::NAN), 0.0);
        let closed = julia::chebyshev_closed_form(qc);
        let arcsine = julia::arcsine_integral(qc, arcsine_panels).ok();
        (Some(closed), arcsine)
    } else {
        (None, None)
    };

    Ok(json!({
        "poly": f.coefficients().iter().map(rat_value).collect::<Vec<_>>(),
        "q": rat_value(&q),
        "level": report.level,
        "base_degree": f.degree(),
        "degree": report.degree,
        "root_sum": num(report.root_sum),
        "direct": num(report.direct),
        "gap": num((report.root_sum - report.direct).abs()),
        "residual_max": num(report.residual_max),
        "excluded": report.excluded,
        "converged": report.converged,
        "closed_form": opt_num(closed_form),
        "arcsine": opt_num(arcsine),
        "trace": Value::Array(vec![]),
    }))
}
