//! Local and global canonical heights on elliptic curves.
//!
//! The global height is the doubling limit 4^-n h(2^n Q); local heights
//! come in four flavors: the closed form (1/2) log+ |x|_p at nonsingular
//! finite places, the Tate-curve piecewise formula at split multiplicative
//! places, the division-polynomial limit N^-2 log|W_N|_v valid at every
//! place, and the archimedean value recovered by subtracting the exact
//! finite part from the global height. The decomposition report carries
//! two independent archimedean estimators and their gap.

use std::collections::BTreeSet;



use crate::elliptic::{
    self, CurvePoint, DivisionSequence, PointStatus, ReductionInfo, WeierstrassCurve,
};
use crate::error::{Error, Result};
use crate::places::{self, Place};

/// How a local height value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeightMethod {
    ClosedForm,
    PsiLimit,
    TateFormula,
    Subtraction,
}

impl HeightMethod {
    pub fn label(&self) -> &'static str {
        match self {
            HeightMethod::ClosedForm => "closed-form",
            HeightMethod::PsiLimit => "psi-limit",
            HeightMethod::TateFormula => "tate-formula",
            HeightMethod::Subtraction => "subtraction",
        }
    }
}

#[derive(Clone, Debug)]
pub struct LocalHeightReport {
    pub place: Place,
    /// lambda_v(Q) in nats.
    pub value: f64,
    pub method: HeightMethod,
    /// Reduction data at finite places; absent at infinity.
    pub reduction: Option<ReductionInfo>,
    /// +1 iff the value is non-negative.
    pub epsilon: i8,
}

fn epsilon_of(value: f64) -> i8 {
    if value >= 0.0 {
        1
    } else {
        -1
    }
}

/// Doubling-limit estimate of the canonical height.
#[derive(Clone, Debug)]
pub struct CanonicalHeight {
    pub estimate: f64,
    /// 4^-n h(2^n Q) for n = 0..=depth; empty for torsion points.
    pub trace: Vec<f64>,
    pub torsion: bool,
}

#[derive(Clone, Debug)]
pub struct GlobalHeightReport {
    /// Canonical height from the doubling limit.
    pub hhat: f64,
    pub trace: Vec<f64>,
    /// Local heights at every relevant place, finite places first.
    pub locals: Vec<LocalHeightReport>,
    /// hhat minus the sum of the local values.
    pub residual: f64,
    /// Archimedean estimate from the division-polynomial limit.
    pub arch_psi: f64,
    /// Archimedean estimate as hhat minus the exact finite part.
    pub arch_subtraction: f64,
    pub arch_gap: f64,
    pub torsion: bool,
}

/// h(Q) = (1/2) log max(|a|, |b|) for x(Q) = a/b in lowest terms; the
/// identity has height zero.
pub fn naive_height(q: &CurvePoint) -> f64 {
    match q.x() {
        None => 0.0,
        Some(x) => {
            0.5 * places::ln_abs_bigint(x.numer()).max(places::ln_abs_bigint(x.denom()))
        }
    }
}

/// Canonical height as the limit of 4^-n h(2^n Q). Torsion points give
/// exactly zero, flagged rather than an error.
pub fn canonical_height(e: &WeierstrassCurve, q: &CurvePoint, depth: u64) -> Result<CanonicalHeight> {
    if elliptic::is_torsion(e, q, elliptic::TORSION_BOUND)? {
        return Ok(CanonicalHeight { estimate: 0.0, trace: vec![], torsion: true });
    }
    let seq = elliptic::double_iterates(e, q, depth)?;
    let mut trace = Vec::with_capacity(depth as usize + 1);
    trace.push(naive_height(q));
    for (n, theta) in seq.theta.iter().enumerate() {
        let h = 0.5 * places::ln_abs_bigint(theta.numer()).max(places::ln_abs_bigint(theta.denom()));
        trace.push(h / 4f64.powi(n as i32 + 1));
    }
    let estimate = *trace.last().expect("depth 0 still yields the naive term");
    Ok(CanonicalHeight { estimate, trace, torsion: false })
}

/// Closed form at a finite place with nonsingular reduction:
/// lambda_p = (1/2) log+ |x(Q)|_p, an exact multiple of log p.
pub fn local_height_nonsingular(e: &WeierstrassCurve, q: &CurvePoint, p: u64) -> Result<LocalHeightReport> {
    if q.is_identity() {
        return Err(Error::IdentityPoint);
    }
    let info = elliptic::reduction_analysis(e, q, p)?;
    if info.point_status == PointStatus::Singular {
        return Err(Error::SingularReduction { p, detail: "use tate/psi-limit path".into() });
    }
    let x = q.x().expect("affine");
    let value = 0.5 * places::log_plus(x, Place::Finite(p));
    Ok(LocalHeightReport {
        place: Place::Finite(p),
        value,
        method: HeightMethod::ClosedForm,
        reduction: Some(info),
        epsilon: epsilon_of(value),
    })
}

/// Tate-curve local height on the fundamental domain p^-k = |l|_p <
/// |u|_p <= 1, where r = -v_p(u) picks the piece: interior points give
/// the quadratic -(k/2)(r/k - (r/k)^2) log p, and the boundary r = 0
/// needs the distance |1 - u|_p.
pub fn tate_local_height(p: u64, k: u64, r: u64, unit_dist: Option<f64>) -> Result<f64> {
    if !places::is_prime(p) {
        return Err(Error::domain("tate_local_height", format!("{p} is not prime")));
    }
    if k == 0 {
        return Err(Error::domain("tate_local_height", "period k must be positive"));
    }
    if r >= k {
        return Err(Error::domain("tate_local_height", format!("r = {r} must lie below k = {k}")));
    }
    if r == 0 {
        let dist = unit_dist.ok_or_else(|| {
            Error::domain("tate_local_height", "r = 0 requires the unit distance |1 - u|_p")
        })?;
        if !(dist > 0.0 && dist <= 1.0) {
            return Err(Error::domain(
                "tate_local_height",
                "unit distance must lie in (0, 1]",
            ));
        }
        return Ok(-dist.ln());
    }
    let t = r as f64 / k as f64;
    Ok(-(k as f64 / 2.0) * (t - t * t) * (p as f64).ln())
}

/// Division-polynomial estimate with its full trace.
#[derive(Clone, Debug)]
pub struct PsiLimitHeight {
    pub estimate: f64,
    /// (n, n^-2 log|W_n(Q)|_v) for every computed index.
    pub trace: Vec<(u64, f64)>,
}

/// n^-2 log|W_n|_v from a precomputed sequence; exact valuation
/// arithmetic at finite places.
pub fn psi_quotient(seq: &DivisionSequence, v: Place, n: u64) -> Result<f64> {
    match v {
        Place::Infinity => {
            let val = seq.log_abs_w(n);
            if val == f64::NEG_INFINITY {
                return Err(Error::Torsion(format!("W_{n} vanishes; the base point is torsion")));
            }
            Ok(val / (n * n) as f64)
        }
        Place::Finite(p) => {
            let v_w = seq.w_valuation(n, p).map_err(|_| {
                Error::Torsion(format!("W_{n} vanishes; the base point is torsion"))
            })?;
            Ok(-(v_w as f64) * (p as f64).ln() / (n * n) as f64)
        }
    }
}

/// Estimate at the last index of a precomputed sequence.
pub fn psi_limit_with_sequence(seq: &DivisionSequence, v: Place) -> Result<f64> {
    if let Some(n) = seq.torsion_indices.first() {
        return Err(Error::Torsion(format!("W_{n} vanishes; the base point is torsion")));
    }
    psi_quotient(seq, v, seq.len())
}

/// lambda_v(Q) as the limit of n^-2 log|W_n(Q)|_v, with the quotient
/// trace at every index. Valid at any place; at finite nonsingular
/// places it reproduces the closed form.
pub fn local_height_psi_limit(
    e: &WeierstrassCurve,
    q: &CurvePoint,
    v: Place,
    n_max: u64,
) -> Result<PsiLimitHeight> {
    let seq = elliptic::division_poly_values(e, q, n_max)?;
    if let Some(n) = seq.torsion_indices.first() {
        return Err(Error::Torsion(format!("W_{n} vanishes; the base point is torsion")));
    }
    let mut trace = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        trace.push((n, psi_quotient(&seq, v, n)?));
    }
    Ok(PsiLimitHeight { estimate: trace.last().expect("n_max >= 1").1, trace })
}

/// The finite places that can carry a nonzero local height: divisors of
/// the x-denominator and of the discriminant.
fn relevant_finite_primes(e: &WeierstrassCurve, q: &CurvePoint) -> Result<Vec<u64>> {
    let mut primes = BTreeSet::new();
    if let Some(x) = q.x() {
        for (p, _) in places::factor_biguint(x.denom().magnitude())? {
            primes.insert(p);
        }
    }
    for (p, _) in places::factor_biguint(e.discriminant.magnitude())? {
        primes.insert(p);
    }
    Ok(primes.into_iter().collect())
}

/// lambda_infinity as hhat minus the exact finite-place sum. Every
/// finite place must be nonsingular (closed form applies) or appear in
/// `supplied` as a (p, lambda_p) pair.
pub fn archimedean_by_subtraction(
    e: &WeierstrassCurve,
    q: &CurvePoint,
    depth: u64,
    supplied: &[(u64, f64)],
) -> Result<f64> {
    let hhat = canonical_height(e, q, depth)?.estimate;
    let mut finite_sum = 0.0;
    let mut blocking = Vec::new();
    for p in relevant_finite_primes(e, q)? {
        match local_height_nonsingular(e, q, p) {
            Ok(report) => finite_sum += report.value,
            Err(Error::SingularReduction { .. }) => {
                if let Some((_, v)) = supplied.iter().find(|(sp, _)| *sp == p) {
                    finite_sum += v;
                } else {
                    blocking.push(p);
                }
            }
            Err(other) => return Err(other),
        }
    }
    if !blocking.is_empty() {
        return Err(Error::domain(
            "archimedean_by_subtraction",
            format!("singular reduction at primes {blocking:?} requires supplied local heights"),
        ));
    }
    Ok(hhat - finite_sum)
}

/// Full place-by-place decomposition of the canonical height. Finite
/// nonsingular places use the closed form; singular places and the
/// archimedean place use the division-polynomial limit at index `psi_n`.
/// The residual hhat - sum(lambda_v) is the headline cross-check.
pub fn height_decomposition(
    e: &WeierstrassCurve,
    q: &CurvePoint,
    depth: u64,
    psi_n: u64,
) -> Result<GlobalHeightReport> {
    let canonical = canonical_height(e, q, depth)?;
    if canonical.torsion {
        return Ok(GlobalHeightReport {
            hhat: 0.0,
            trace: vec![],
            locals: vec![],
            residual: 0.0,
            arch_psi: 0.0,
            arch_subtraction: 0.0,
            arch_gap: 0.0,
            torsion: true,
        });
    }
    let seq = elliptic::division_poly_values(e, q, psi_n)?;
    let mut locals = Vec::new();
    let mut finite_sum = 0.0;
    for p in relevant_finite_primes(e, q)? {
        let report = match local_height_nonsingular(e, q, p) {
            Ok(report) => report,
            Err(Error::SingularReduction { .. }) => {
                let value = psi_limit_with_sequence(&seq, Place::Finite(p))?;
                LocalHeightReport {
                    place: Place::Finite(p),
                    value,
                    method: HeightMethod::PsiLimit,
                    reduction: Some(elliptic::reduction_analysis(e, q, p)?),
                    epsilon: epsilon_of(value),
                }
            }
            Err(other) => return Err(other),
        };
        finite_sum += report.value;
        locals.push(report);
    }
    let arch_psi = psi_limit_with_sequence(&seq, Place::Infinity)?;
    locals.push(LocalHeightReport {
        place: Place::Infinity,
        value: arch_psi,
        method: HeightMethod::PsiLimit,
        reduction: None,
        epsilon: epsilon_of(arch_psi),
    });
    let arch_subtraction = canonical.estimate - finite_sum;
    let residual = canonical.estimate - finite_sum - arch_psi;
    Ok(GlobalHeightReport {
        hhat: canonical.estimate,
        trace: canonical.trace,
        locals,
        residual,
        arch_psi,
        arch_subtraction,
        arch_gap: (arch_subtraction - arch_psi).abs(),
        torsion: false,
    })
}
