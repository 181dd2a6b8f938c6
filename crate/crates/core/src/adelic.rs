//! Diagonal sequential actions on the adeles and their volume-growth
//! entropy.
//!
//! An action is a sequence of multiplications x -> theta_n x; the entropy
//! against a rate r(n) is -(1/r(n)) log of the measure of the box
//! (-eps, eps) x prod Z_p intersected with every preimage. Each finite
//! place contributes -max(0, max_n log|theta_n|_p), an exact non-negative
//! integer multiple of log p; the archimedean place contributes
//! log(2 eps) - max(0, max_n log|theta_n|). The constant log(2 eps) is
//! killed by every diverging rate, so traces discard it and record only
//! the growing parts.
//!
//! Degenerate compact-group cases (an action that is eventually the
//! identity on a compact quotient has zero growth at every rate) are
//! excluded: every builtin here has unbounded volume decay somewhere.

use std::str::FromStr;

use num_traits::Zero;

use crate::elliptic::{self, CurvePoint, WeierstrassCurve};
use crate::error::{Error, Result};
use crate::heights;
use crate::places::{self, ExactRational, Place, RateFunction};

/// Cap on the u-sequence index: u_9 already needs division-polynomial
/// values at index 512.
pub const MAX_EDS_ENTROPY_DEPTH: u64 = 9;

/// Which places enter the aggregated log-volume.
#[derive(Clone, Debug, PartialEq)]
pub enum PlaceFilter {
    All,
    Single(Place),
    /// Finite places from the listed primes only.
    Subset(Vec<u64>),
    /// Everything except the listed primes (archimedean included).
    Complement(Vec<u64>),
}

impl PlaceFilter {
    fn admits_arch(&self) -> bool {
        match self {
            PlaceFilter::All | PlaceFilter::Complement(_) => true,
            PlaceFilter::Single(v) => *v == Place::Infinity,
            PlaceFilter::Subset(_) => false,
        }
    }

    fn admits_finite(&self, p: u64) -> bool {
        match self {
            PlaceFilter::All => true,
            PlaceFilter::Single(v) => *v == Place::Finite(p),
            PlaceFilter::Subset(s) => s.contains(&p),
            PlaceFilter::Complement(s) => !s.contains(&p),
        }
    }
}

impl FromStr for PlaceFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<PlaceFilter> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("all") {
            return Ok(PlaceFilter::All);
        }
        let parse_primes = |list: &str| -> Result<Vec<u64>> {
            list.split(',')
                .map(|tok| {
                    let p: u64 = tok
                        .trim()
                        .parse()
                        .map_err(|_| Error::domain("place filter", format!("bad prime {tok:?}")))?;
                    if places::is_prime(p) {
                        Ok(p)
                    } else {
                        Err(Error::domain("place filter", format!("{p} is not prime")))
                    }
                })
                .collect()
        };
        if let Some(rest) = t.strip_prefix("subset:") {
            return Ok(PlaceFilter::Subset(parse_primes(rest)?));
        }
        if let Some(rest) = t.strip_prefix("complement:") {
            return Ok(PlaceFilter::Complement(parse_primes(rest)?));
        }
        Ok(PlaceFilter::Single(t.parse()?))
    }
}

/// The named multiplication sequences, plus explicit user data.
#[derive(Clone, Debug)]
pub enum ActionKind {
    /// theta_n = p_1 p_2 ... p_n.
    Primorial,
    /// theta_n = 1 / (p_1 p_2 ... p_n).
    InversePrimorial,
    /// theta_n = product of primes up to n.
    PrimesUpToIndex,
    /// theta_n = n.
    IdentityIndex,
    /// theta_n = n!.
    Factorial,
    Explicit(Vec<ExactRational>),
}

impl ActionKind {
    pub fn label(&self) -> &'static str {
        match self {
            ActionKind::Primorial => "primorial",
            ActionKind::InversePrimorial => "inverse-primorial",
            ActionKind::PrimesUpToIndex => "primes-up-to-index",
            ActionKind::IdentityIndex => "identity-index",
            ActionKind::Factorial => "factorial",
            ActionKind::Explicit(_) => "explicit",
        }
    }

    /// The rate against which the builtin has a known limit.
    fn canonical_rate(&self) -> Option<RateFunction> {
        match self {
            ActionKind::Primorial | ActionKind::Factorial => Some(RateFunction::NLogN),
            ActionKind::InversePrimorial => Some(RateFunction::NLogN),
            ActionKind::PrimesUpToIndex => Some(RateFunction::Linear),
            ActionKind::IdentityIndex => Some(RateFunction::LogN),
            ActionKind::Explicit(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DiagonalAction {
    pub kind: ActionKind,
    pub rate: RateFunction,
    pub filter: PlaceFilter,
}

/// One place's aggregate contribution at the horizon.
#[derive(Clone, Debug)]
pub struct PlaceVolume {
    pub place: Place,
    pub log_volume: f64,
    /// Finite places: the valuation maximum m with volume -m log p.
    pub valuation_max: Option<i64>,
}

/// Trace of entropy quotients e_n = -(1/r(n)) (selected log-volume at n).
#[derive(Clone, Debug)]
pub struct EntropyTrace {
    pub label: String,
    pub rate: String,
    /// Checkpoint indices (at most 256 plus the horizon).
    pub indices: Vec<u64>,
    pub quotients: Vec<f64>,
    pub estimate: f64,
    /// Known limit for the traced quantity, when the rate matches.
    pub target: Option<f64>,
    /// Set when the selected log-volume is provably eventually constant,
    /// certifying limit 0 against any diverging rate.
    pub stabilized: bool,
    pub arch_log_volume: f64,
    pub finite_log_volume: f64,
    pub per_place: Vec<PlaceVolume>,
    pub per_place_truncated: bool,
}

/// Exact local log-volume of the common preimage box for one place.
pub fn local_log_volume(thetas: &[ExactRational], v: Place, eps: f64) -> Result<f64> {
    if thetas.iter().any(|t| t.is_zero()) {
        return Err(Error::domain("local_log_volume", "zero multiplier"));
    }
    match v {
        Place::Finite(p) => {
            let mut vmax: i64 = 0;
            for t in thetas {
                vmax = vmax.max(-places::valuation(t, p)?);
            }
            Ok(-(vmax as f64) * (p as f64).ln())
        }
        Place::Infinity => {
            if eps <= 0.0 {
                return Err(Error::domain("local_log_volume", "radius must be positive"));
            }
            let mut lmax: f64 = 0.0;
            for t in thetas {
                lmax = lmax.max(places::log_abs(t, Place::Infinity)?);
            }
            Ok((2.0 * eps).ln() - lmax)
        }
    }
}

/// Checkpoint schedule: every index up to 256, then an even stride with
/// the horizon always last.
fn checkpoints(horizon: u64) -> Vec<u64> {
    if horizon <= 256 {
        return (1..=horizon).collect();
    }
    let stride = horizon.div_ceil(256);
    let mut out: Vec<u64> = (1..=horizon / stride).map(|k| k * stride).collect();
    if *out.last().unwrap() != horizon {
        out.push(horizon);
    }
    out
}

fn finish_trace(
    label: &str,
    rate: &RateFunction,
    indices: Vec<u64>,
    quotients: Vec<f64>,
    target: Option<f64>,
    stabilized: bool,
    arch_log_volume: f64,
    finite_log_volume: f64,
    per_place: Vec<PlaceVolume>,
    per_place_truncated: bool,
) -> Result<EntropyTrace> {
    let estimate = if stabilized {
        0.0
    } else {
        *quotients
            .last()
            .ok_or_else(|| Error::domain("entropy_trace", "no usable indices"))?
    };
    Ok(EntropyTrace {
        label: label.to_string(),
        rate: rate.to_string(),
        indices,
        quotients,
        estimate,
        target,
        stabilized,
        arch_log_volume,
        finite_log_volume,
        per_place,
        per_place_truncated,
    })
}

const PER_PLACE_CAP: usize = 64;

/// Entropy of a named or explicit diagonal action. Builtins stream in
/// log space; the explicit path works place-by-place on exact valuations.
pub fn entropy_trace(action: &DiagonalAction, horizon: u64) -> Result<EntropyTrace> {
    if horizon < 2 {
        return Err(Error::domain("entropy_trace", "horizon must be at least 2"));
    }
    let target = if action.canonical_target_applies() {
        action.builtin_target()
    } else {
        None
    };
    match &action.kind {
        ActionKind::Explicit(thetas) => explicit_trace(action, thetas, horizon, target),
        ActionKind::InversePrimorial => inverse_primorial_trace(action, horizon, target),
        _ => integer_builtin_trace(action, horizon, target),
    }
}

impl DiagonalAction {
    fn canonical_target_applies(&self) -> bool {
        self.kind.canonical_rate().is_some_and(|r| r == self.rate)
    }

    fn builtin_target(&self) -> Option<f64> {
        match (&self.kind, &self.filter) {
            // a place filter that drops the archimedean place removes all
            // growth for the integer builtins
            (
                ActionKind::Primorial
                | ActionKind::PrimesUpToIndex
                | ActionKind::IdentityIndex
                | ActionKind::Factorial,
                f,
            ) => {
                if f.admits_arch() {
                    match self.kind {
                        ActionKind::PrimesUpToIndex => None,
                        _ => Some(1.0),
                    }
                } else {
                    Some(0.0)
                }
            }
            (ActionKind::InversePrimorial, PlaceFilter::All | PlaceFilter::Complement(_)) => {
                Some(1.0)
            }
            (ActionKind::InversePrimorial, _) => Some(0.0),
            (ActionKind::Explicit(_), _) => None,
        }
    }
}

/// Primorial, primes-up-to-index, identity-index, factorial: integer
/// sequences, so every finite place has volume 0 and only the running
/// archimedean log matters.
fn integer_builtin_trace(
    action: &DiagonalAction,
    horizon: u64,
    target: Option<f64>,
) -> Result<EntropyTrace> {
    let include_arch = action.filter.admits_arch();
    let primes: Vec<u64> = match action.kind {
        ActionKind::Primorial => places::first_primes(horizon as usize),
        ActionKind::PrimesUpToIndex => places::primes_up_to(horizon),
        _ => vec![],
    };
    let mut prime_cursor = 0usize;
    let mut log_theta: f64 = 0.0;
    let marks = checkpoints(horizon);
    let mut mark_cursor = 0usize;
    let mut indices = Vec::with_capacity(marks.len());
    let mut quotients = Vec::with_capacity(marks.len());
    for n in 1..=horizon {
        match action.kind {
            ActionKind::Primorial => log_theta += (primes[(n - 1) as usize] as f64).ln(),
            ActionKind::PrimesUpToIndex => {
                while prime_cursor < primes.len() && primes[prime_cursor] <= n {
                    log_theta += (primes[prime_cursor] as f64).ln();
                    prime_cursor += 1;
                }
            }
            ActionKind::IdentityIndex => log_theta = (n as f64).ln(),
            ActionKind::Factorial => log_theta += (n as f64).ln(),
            _ => unreachable!("dispatched above"),
        }
        if marks.get(mark_cursor) == Some(&n) {
            mark_cursor += 1;
            let rate = action.rate.eval(n);
            if rate <= 0.0 {
                continue;
            }
            let volume = if include_arch { -log_theta.max(0.0) } else { 0.0 };
            indices.push(n);
            quotients.push(-volume / rate);
        }
    }
    let arch = if include_arch { -log_theta.max(0.0) } else { 0.0 };
    let per_place = vec![PlaceVolume {
        place: Place::Infinity,
        log_volume: -log_theta.max(0.0),
        valuation_max: None,
    }];
    finish_trace(
        action.kind.label(),
        &action.rate,
        indices,
        quotients,
        target,
        false,
        arch,
        0.0,
        per_place,
        false,
    )
}

/// theta_n = 1/(p_1 ... p_n): the archimedean volume is 0 and the place
/// p_k contributes exactly -log p_k from index k on. Restricting to a
/// fixed finite place therefore freezes the volume, which certifies a
/// zero limit against any diverging rate.
fn inverse_primorial_trace(
    action: &DiagonalAction,
    horizon: u64,
    target: Option<f64>,
) -> Result<EntropyTrace> {
    let primes = places::first_primes(horizon as usize);
    let selected: Vec<(usize, u64)> = primes
        .iter()
        .enumerate()
        .filter(|(_, &p)| action.filter.admits_finite(p))
        .map(|(i, &p)| (i, p))
        .collect();
    let structural_freeze = matches!(
        action.filter,
        PlaceFilter::Single(_) | PlaceFilter::Subset(_)
    );
    let mut volume: f64 = 0.0;
    let mut cursor = 0usize;
    let marks = checkpoints(horizon);
    let mut mark_cursor = 0usize;
    let mut indices = Vec::with_capacity(marks.len());
    let mut quotients = Vec::with_capacity(marks.len());
    for n in 1..=horizon {
        while cursor < selected.len() && selected[cursor].0 < n as usize {
            volume -= (selected[cursor].1 as f64).ln();
            cursor += 1;
        }
        if marks.get(mark_cursor) == Some(&n) {
            mark_cursor += 1;
            let rate = action.rate.eval(n);
            if rate <= 0.0 {
                continue;
            }
            indices.push(n);
            quotients.push(-volume / rate);
        }
    }
    let per_place: Vec<PlaceVolume> = selected
        .iter()
        .take(PER_PLACE_CAP)
        .map(|&(_, p)| PlaceVolume {
            place: Place::Finite(p),
            log_volume: -(p as f64).ln(),
            valuation_max: Some(1),
        })
        .collect();
    let truncated = selected.len() > PER_PLACE_CAP;
    finish_trace(
        action.kind.label(),
        &action.rate,
        indices,
        quotients,
        target,
        structural_freeze,
        0.0,
        volume,
        per_place,
        truncated,
    )
}

/// Exact path for explicit multiplier lists: per-place valuation maxima
/// plus the archimedean running log, all places discovered from the data.
fn explicit_trace(
    action: &DiagonalAction,
    thetas: &[ExactRational],
    horizon: u64,
    target: Option<f64>,
) -> Result<EntropyTrace> {
    let horizon = horizon.min(thetas.len() as u64);
    if horizon < 2 {
        return Err(Error::domain("entropy_trace", "need at least 2 multipliers"));
    }
    let thetas = &thetas[..horizon as usize];
    let finite: Vec<u64> = places::relevant_places(thetas)?
        .into_iter()
        .filter_map(|v| match v {
            Place::Finite(p) => Some(p),
            Place::Infinity => None,
        })
        .collect();
    let mut vmax: Vec<i64> = vec![0; finite.len()];
    let mut arch_max: f64 = 0.0;
    let marks = checkpoints(horizon);
    let mut mark_cursor = 0usize;
    let mut indices = Vec::new();
    let mut quotients = Vec::new();
    let mut volume_history: Vec<f64> = Vec::new();
    for (i, theta) in thetas.iter().enumerate() {
        let n = i as u64 + 1;
        for (j, &p) in finite.iter().enumerate() {
            vmax[j] = vmax[j].max(-places::valuation(theta, p)?);
        }
        arch_max = arch_max.max(places::log_abs(theta, Place::Infinity)?);
        if marks.get(mark_cursor) == Some(&n) {
            mark_cursor += 1;
            let mut volume = 0.0;
            for (j, &p) in finite.iter().enumerate() {
                if action.filter.admits_finite(p) {
                    volume -= (vmax[j] as f64) * (p as f64).ln();
                }
            }
            if action.filter.admits_arch() {
                volume -= arch_max.max(0.0);
            }
            volume_history.push(volume);
            let rate = action.rate.eval(n);
            if rate <= 0.0 {
                continue;
            }
            indices.push(n);
            quotients.push(-volume / rate);
        }
    }
    // exact constancy of the selected volume over the final quarter
    let tail = volume_history.len() / 4;
    let stabilized = tail >= 2
        && volume_history[volume_history.len() - tail..]
            .windows(2)
            .all(|w| w[0] == w[1]);
    let mut finite_volume = 0.0;
    let mut per_place = Vec::new();
    for (j, &p) in finite.iter().enumerate() {
        if action.filter.admits_finite(p) {
            let lv = -(vmax[j] as f64) * (p as f64).ln();
            finite_volume += lv;
            if per_place.len() < PER_PLACE_CAP {
                per_place.push(PlaceVolume {
                    place: Place::Finite(p),
                    log_volume: lv,
                    valuation_max: Some(vmax[j]),
                });
            }
        }
    }
    let arch_volume = if action.filter.admits_arch() { -arch_max.max(0.0) } else { 0.0 };
    if action.filter.admits_arch() {
        per_place.push(PlaceVolume {
            place: Place::Infinity,
            log_volume: -arch_max.max(0.0),
            valuation_max: None,
        });
    }
    let truncated = finite.len() > PER_PLACE_CAP;
    finish_trace(
        action.kind.label(),
        &action.rate,
        indices,
        quotients,
        target,
        stabilized,
        arch_volume,
        finite_volume,
        per_place,
        truncated,
    )
}

/// Real-line doubling action T_j(x) = b_j x against r(n) = 4^n: the
/// entropy quotient is log(b_n)/4^n and the limit is the canonical
/// height of the base point.
pub fn elliptic_real_entropy(e: &WeierstrassCurve, q: &CurvePoint, depth: u64) -> Result<EntropyTrace> {
    let seq = elliptic::double_iterates(e, q, depth)?;
    let hhat = heights::canonical_height(e, q, depth)?.estimate;
    let rate = RateFunction::exponential(ExactRational::from_integer(4.into()))?;
    let mut running: f64 = 0.0;
    let mut indices = Vec::new();
    let mut quotients = Vec::new();
    for (i, b) in seq.b.iter().enumerate() {
        let n = i as u64 + 1;
        running = running.max(places::ln_abs_bigint(b));
        indices.push(n);
        quotients.push(running / 4f64.powi(n as i32));
    }
    let arch = -running;
    finish_trace(
        "elliptic-b",
        &rate,
        indices,
        quotients,
        Some(hhat),
        false,
        arch,
        0.0,
        vec![PlaceVolume { place: Place::Infinity, log_volume: arch, valuation_max: None }],
        false,
    )
}

/// Adelic doubling action T_j(x) = theta_j x with theta_j = x(2^j Q),
/// r(n) = 4^n. Strong divisibility of (b_j) makes the total finite-place
/// volume at step n exactly -2 log b_n (every denominator prime tops out
/// at its b_n valuation), so no factorization is needed. The archimedean
/// term is the running max of log|theta_j|, which grows slower than the
/// rate. The limit is twice the canonical height.
pub fn elliptic_adelic_entropy(e: &WeierstrassCurve, q: &CurvePoint, depth: u64) -> Result<EntropyTrace> {
    let seq = elliptic::double_iterates(e, q, depth)?;
    let hhat = heights::canonical_height(e, q, depth)?.estimate;
    let rate = RateFunction::exponential(ExactRational::from_integer(4.into()))?;
    let mut arch_max: f64 = 0.0;
    let mut indices = Vec::new();
    let mut quotients = Vec::new();
    let mut finite_volume = 0.0;
    for (i, theta) in seq.theta.iter().enumerate() {
        let n = i as u64 + 1;
        arch_max = arch_max.max(places::log_abs(theta, Place::Infinity)?);
        finite_volume = -2.0 * places::ln_abs_bigint(&seq.b[i]);
        let volume = finite_volume - arch_max.max(0.0);
        indices.push(n);
        quotients.push(-volume / 4f64.powi(n as i32));
    }
    finish_trace(
        "elliptic-theta",
        &rate,
        indices,
        quotients,
        Some(2.0 * hhat),
        false,
        -arch_max.max(0.0),
        finite_volume,
        vec![PlaceVolume {
            place: Place::Infinity,
            log_volume: -arch_max.max(0.0),
            valuation_max: None,
        }],
        false,
    )
}

/// Place selection for the u-sequence action.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdsFilter {
    /// Every place: the limit is hhat minus the singular local heights.
    All,
    /// Only the singular-reduction primes S: the limit is -sum of their
    /// local heights, a non-negative number.
    SingularSet,
    /// The quotient action on the complement of S: the limit is hhat.
    QuotientComplement,
}

impl FromStr for EdsFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<EdsFilter> {
        match s.trim().to_ascii_lowercase().as_str() {
            "all" => Ok(EdsFilter::All),
            "singular" | "s" => Ok(EdsFilter::SingularSet),
            "quotient" | "complement" => Ok(EdsFilter::QuotientComplement),
            other => Err(Error::domain("eds filter", format!("unknown filter {other:?}"))),
        }
    }
}

/// Inverse u-sequence action U_j(x) = u_j^-1 x against r(n) = 4^n, with
/// u_m = |w_(2^m)|. The u_m are positive integers forming a divisibility
/// chain, so the archimedean place contributes nothing and the total
/// finite volume at step m is exactly -log u_m; the S-restricted volume
/// needs only the valuations of u_m over the finitely many primes in S.
pub fn eds_entropy(
    e: &WeierstrassCurve,
    q: &CurvePoint,
    depth: u64,
    filter: EdsFilter,
) -> Result<EntropyTrace> {
    if depth == 0 || depth > MAX_EDS_ENTROPY_DEPTH {
        return Err(Error::work_limit(
            "eds_entropy",
            format!("depth must lie in 1..={MAX_EDS_ENTROPY_DEPTH}"),
        ));
    }
    let psi_n = (1u64 << depth).max(256);
    let division = elliptic::division_poly_values(e, q, psi_n)?;
    if let Some(n) = division.torsion_indices.first() {
        return Err(Error::Torsion(format!("W_{n} vanishes; the u-sequence degenerates")));
    }
    let singular = elliptic::singular_reduction_primes(e, q)?;
    let hhat = heights::canonical_height(e, q, 10)?.estimate;
    let lambda_singular: f64 = singular
        .iter()
        .map(|&p| heights::psi_limit_with_sequence(&division, Place::Finite(p)))
        .sum::<Result<f64>>()?;
    let target = match filter {
        EdsFilter::All => Some(hhat - lambda_singular),
        EdsFilter::SingularSet => Some(-lambda_singular),
        EdsFilter::QuotientComplement => Some(hhat),
    };
    let rate = RateFunction::exponential(ExactRational::from_integer(4.into()))?;
    let mut indices = Vec::new();
    let mut quotients = Vec::new();
    let mut total_volume = 0.0;
    let mut s_volume = 0.0;
    let mut per_place = Vec::new();
    for m in 1..=depth {
        let u = division.u_value(m as u32);
        let log_u = places::ln_biguint(&u);
        let s_part: f64 = singular
            .iter()
            .map(|&p| (places::biguint_valuation(&u, p) as f64) * (p as f64).ln())
            .sum();
        total_volume = -log_u;
        s_volume = -s_part;
        let volume = match filter {
            EdsFilter::All => total_volume,
            EdsFilter::SingularSet => s_volume,
            EdsFilter::QuotientComplement => total_volume - s_volume,
        };
        indices.push(m);
        quotients.push(-volume / 4f64.powi(m as i32));
        if m == depth {
            for &p in &singular {
                per_place.push(PlaceVolume {
                    place: Place::Finite(p),
                    log_volume: -(places::biguint_valuation(&u, p) as f64) * (p as f64).ln(),
                    valuation_max: Some(places::biguint_valuation(&u, p) as i64),
                });
            }
        }
    }
    per_place.push(PlaceVolume { place: Place::Infinity, log_volume: 0.0, valuation_max: None });
    let finite_volume = match filter {
        EdsFilter::All => total_volume,
        EdsFilter::SingularSet => s_volume,
        EdsFilter::QuotientComplement => total_volume - s_volume,
    };
    finish_trace(
        "eds-u-inverse",
        &rate,
        indices,
        quotients,
        target,
        false,
        0.0,
        finite_volume,
        per_place,
        false,
    )
}

/// Sign-flipped single-place action T_j(x) = q_j^(eps) x with
/// q_j = |W_j(Q)| and r(n) = n^2. The sign eps is chosen so the
/// restriction decays: eps = +1 iff lambda_v(Q) >= 0. The entropy is
/// eps lambda_v(Q), always non-negative.
pub fn local_flip_entropy(
    e: &WeierstrassCurve,
    q: &CurvePoint,
    v: Place,
    n_max: u64,
) -> Result<EntropyTrace> {
    let division = elliptic::division_poly_values(e, q, n_max)?;
    if let Some(n) = division.torsion_indices.first() {
        return Err(Error::Torsion(format!("W_{n} vanishes; the base point is torsion")));
    }
    let lambda = heights::psi_limit_with_sequence(&division, v)?;
    let eps: f64 = if lambda >= 0.0 { 1.0 } else { -1.0 };
    let target = Some(eps * lambda);
    let mut running: f64 = 0.0;
    let mut indices = Vec::new();
    let mut quotients = Vec::new();
    for n in 1..=n_max {
        let log_w = match v {
            Place::Infinity => division.log_abs_w(n),
            Place::Finite(p) => {
                -(division.w_valuation(n, p).expect("no torsion index") as f64) * (p as f64).ln()
            }
        };
        running = running.max(eps * log_w);
        indices.push(n);
        quotients.push(running.max(0.0) / (n * n) as f64);
    }
    let volume = -running.max(0.0);
    let (arch_volume, finite_volume, valuation) = match v {
        Place::Infinity => (volume, 0.0, None),
        Place::Finite(p) => {
            (0.0, volume, Some((-volume / (p as f64).ln()).round() as i64))
        }
    };
    finish_trace(
        "flip-local",
        &RateFunction::NSquared,
        indices,
        quotients,
        target,
        false,
        arch_volume,
        finite_volume,
        vec![PlaceVolume { place: v, log_volume: volume, valuation_max: valuation }],
        false,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_traits::One;

    fn rat(n: i64, d: i64) -> ExactRational {
        ExactRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn curve_37a() -> WeierstrassCurve {
        WeierstrassCurve::from_i64([0, 0, 1, -1, 0]).unwrap()
    }

    fn origin() -> CurvePoint {
        CurvePoint::affine(rat(0, 1), rat(0, 1))
    }

    fn action(kind: ActionKind, rate: RateFunction, filter: PlaceFilter) -> DiagonalAction {
        DiagonalAction { kind, rate, filter }
    }

    #[test]
    fn local_volume_examples() {
        let ln2 = 2f64.ln();
        let v = local_log_volume(&[rat(1, 2)], Place::Finite(2), 1.0).unwrap();
        assert!((v + ln2).abs() < 1e-12);
        let v = local_log_volume(&[rat(2, 1)], Place::Finite(2), 1.0).unwrap();
        assert_eq!(v, 0.0);
        // radius 1/2 kills the log(2 eps) term, leaving -max log|theta|
        let v = local_log_volume(&[rat(3, 1), rat(9, 1)], Place::Infinity, 0.5).unwrap();
        assert!((v + 9f64.ln()).abs() < 1e-12);
        assert!(local_log_volume(&[rat(0, 1)], Place::Infinity, 1.0).is_err());
    }

    #[test]
    fn explicit_volumes_are_monotone() {
        let thetas: Vec<ExactRational> =
            [rat(1, 2), rat(3, 1), rat(1, 8), rat(5, 2)].to_vec();
        let mut last = 0.0;
        for n in 1..=thetas.len() {
            let v = local_log_volume(&thetas[..n], Place::Finite(2), 1.0).unwrap();
            assert!(v <= last + 1e-15, "volume grew at n = {n}");
            last = v;
        }
    }

    #[test]
    fn primorial_entropy_near_one() {
        let a = action(ActionKind::Primorial, RateFunction::NLogN, PlaceFilter::All);
        let t = entropy_trace(&a, 10_000).unwrap();
        assert_eq!(t.target, Some(1.0));
        // slow loglog/log convergence: the documented value at this horizon
        assert!((t.estimate - 1.1334).abs() < 0.01, "estimate {}", t.estimate);
        assert_eq!(t.finite_log_volume, 0.0);
    }

    #[test]
    fn inverse_primorial_matches_primorial_total() {
        let fwd = action(ActionKind::Primorial, RateFunction::NLogN, PlaceFilter::All);
        let inv = action(ActionKind::InversePrimorial, RateFunction::NLogN, PlaceFilter::All);
        let tf = entropy_trace(&fwd, 2_000).unwrap();
        let ti = entropy_trace(&inv, 2_000).unwrap();
        assert!((tf.estimate - ti.estimate).abs() < 1e-9);
        assert_eq!(ti.arch_log_volume, 0.0);
        assert!(!ti.stabilized);
    }

    #[test]
    fn inverse_primorial_single_places_stabilize_to_zero() {
        for place in ["2", "5", "13", "inf"] {
            let a = action(
                ActionKind::InversePrimorial,
                RateFunction::NLogN,
                PlaceFilter::Single(place.parse().unwrap()),
            );
            let t = entropy_trace(&a, 2_000).unwrap();
            assert_eq!(t.estimate, 0.0, "place {place}");
            assert_eq!(t.target, Some(0.0));
        }
    }

    #[test]
    fn identity_index_is_exactly_one() {
        let a = action(ActionKind::IdentityIndex, RateFunction::LogN, PlaceFilter::All);
        let t = entropy_trace(&a, 200).unwrap();
        assert_eq!(t.estimate, 1.0);
        // n = 1 has rate 0 and is skipped
        assert_eq!(t.indices.first(), Some(&2));
        assert!(t.quotients.iter().all(|&q| q == 1.0));
        let big = entropy_trace(&a, 100_000).unwrap();
        assert_eq!(big.estimate, 1.0);
    }

    #[test]
    fn factorial_entropy_near_one() {
        let a = action(ActionKind::Factorial, RateFunction::NLogN, PlaceFilter::All);
        let t = entropy_trace(&a, 10_000).unwrap();
        // Stirling: e_N = 1 - 1/log N + O(1/N); documented value at 10^4
        assert!((t.estimate - 0.8915).abs() < 0.01, "estimate {}", t.estimate);
    }

    #[test]
    fn primes_up_to_index_stays_in_chebyshev_range() {
        let a = action(ActionKind::PrimesUpToIndex, RateFunction::Linear, PlaceFilter::All);
        let t = entropy_trace(&a, 10_000).unwrap();
        assert!(t.estimate > 0.0 && t.estimate <= 2.0 * 2f64.ln());
        assert!((t.estimate - 0.9896).abs() < 0.01, "estimate {}", t.estimate);
    }

    #[test]
    fn explicit_action_matches_builtin() {
        // first few primorial values as explicit data
        let thetas: Vec<ExactRational> = {
            let primes = places::first_primes(12);
            let mut acc = rat(1, 1);
            primes
                .iter()
                .map(|&p| {
                    acc = &acc * rat(p as i64, 1);
                    acc.clone()
                })
                .collect()
        };
        let ex = action(ActionKind::Explicit(thetas), RateFunction::NLogN, PlaceFilter::All);
        let te = entropy_trace(&ex, 12).unwrap();
        let bi = action(ActionKind::Primorial, RateFunction::NLogN, PlaceFilter::All);
        let tb = entropy_trace(&bi, 12).unwrap();
        assert!((te.estimate - tb.estimate).abs() < 1e-9);
        assert!(!te.per_place_truncated);
    }

    #[test]
    fn explicit_inverse_single_place_stabilizes() {
        // 1/2, 1/2, 1/2, ... at place 2: volume freezes at -log 2
        let thetas = vec![rat(1, 2); 16];
        let a = action(
            ActionKind::Explicit(thetas),
            RateFunction::NSquared,
            PlaceFilter::Single(Place::Finite(2)),
        );
        let t = entropy_trace(&a, 16).unwrap();
        assert!(t.stabilized);
        assert_eq!(t.estimate, 0.0);
        assert!((t.finite_log_volume + 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn real_entropy_approaches_canonical_height() {
        let e = curve_37a();
        let t = elliptic_real_entropy(&e, &origin(), 10).unwrap();
        let hhat = t.target.unwrap();
        assert!((hhat - 0.0255557).abs() < 1e-4);
        assert!(
            (t.estimate - hhat).abs() < 0.05 * hhat,
            "estimate {} vs {hhat}",
            t.estimate
        );
        // n = 1: e_1 = log(b_1)/4
        assert_eq!(t.quotients[0], 0.0);
    }

    #[test]
    fn adelic_entropy_approaches_twice_height() {
        let e = curve_37a();
        let t = elliptic_adelic_entropy(&e, &origin(), 10).unwrap();
        let target = t.target.unwrap();
        assert!(
            (t.estimate - target).abs() < 0.05 * target,
            "estimate {} vs {target}",
            t.estimate
        );
    }

    #[test]
    fn adelic_finite_total_matches_denominators_exactly() {
        // the closed finite-volume formula -2 log b_n must agree with a
        // place-by-place valuation maximum; checkable by factoring small b_n
        let e = curve_37a();
        let seq = elliptic::double_iterates(&e, &origin(), 5).unwrap();
        for n in 1..=5usize {
            let mut place_sum = 0.0;
            let bn = seq.b[n - 1].magnitude();
            if !bn.is_one() {
                for (p, _) in places::factor_biguint(bn).unwrap() {
                    let vmax: i64 = (0..n)
                        .map(|j| -places::valuation(&seq.theta[j], p).unwrap())
                        .max()
                        .unwrap();
                    place_sum -= (vmax as f64) * (p as f64).ln();
                }
            }
            let closed = -2.0 * places::ln_abs_bigint(&seq.b[n - 1]);
            assert!(
                (place_sum - closed).abs() < 1e-9,
                "n = {n}: {place_sum} vs {closed}"
            );
        }
    }

    #[test]
    fn eds_entropy_all_matches_height_when_nonsingular() {
        let e = curve_37a();
        let t = eds_entropy(&e, &origin(), 6, EdsFilter::All).unwrap();
        let target = t.target.unwrap();
        assert!(
            (t.estimate - target).abs() < 0.05 * target.max(0.01),
            "estimate {} vs {target}",
            t.estimate
        );
        // S is empty here, so the S-restricted trace is identically zero
        let ts = eds_entropy(&e, &origin(), 6, EdsFilter::SingularSet).unwrap();
        assert!(ts.quotients.iter().all(|&v| v == 0.0));
        assert_eq!(ts.target, Some(0.0));
    }

    #[test]
    fn eds_decomposition_with_singular_prime() {
        let e = WeierstrassCurve::short(3, 11).unwrap();
        let q = CurvePoint::affine(rat(2, 1), rat(5, 1));
        let all = eds_entropy(&e, &q, 7, EdsFilter::All).unwrap();
        let s = eds_entropy(&e, &q, 7, EdsFilter::SingularSet).unwrap();
        let quotient = eds_entropy(&e, &q, 7, EdsFilter::QuotientComplement).unwrap();
        // part 2 is non-negative and the three parts telescope
        assert!(s.estimate >= 0.0);
        assert!((all.estimate - s.estimate - quotient.estimate).abs() < 1e-9);
        let hhat = quotient.target.unwrap();
        assert!(
            (quotient.estimate - hhat).abs() < 0.1 * hhat,
            "quotient {} vs {hhat}",
            quotient.estimate
        );
        assert!(
            (s.estimate - s.target.unwrap()).abs() < 0.1 * s.estimate.max(0.1),
            "S part {} vs {:?}",
            s.estimate,
            s.target
        );
    }

    #[test]
    fn eds_entropy_rejects_torsion_and_depth() {
        let e = WeierstrassCurve::short(-1, 0).unwrap();
        assert!(matches!(
            eds_entropy(&e, &origin(), 4, EdsFilter::All),
            Err(Error::Torsion(_))
        ));
        let e = curve_37a();
        assert!(eds_entropy(&e, &origin(), 10, EdsFilter::All).is_err());
    }

    #[test]
    fn flip_entropy_finite_place() {
        // 8Q has x = 21/25: |x|_5 = 25 > 1, lambda_5 = log 5
        let e = curve_37a();
        let base = e.multiply(&origin(), 8).unwrap();
        let t = local_flip_entropy(&e, &base, Place::Finite(5), 150).unwrap();
        let target = 5f64.ln();
        assert!(
            (t.estimate - target).abs() < 0.03 * target,
            "estimate {} vs {target}",
            t.estimate
        );
    }

    #[test]
    fn flip_entropy_unit_place_is_zero() {
        let e = curve_37a();
        let t = local_flip_entropy(&e, &origin(), Place::Finite(2), 4).unwrap();
        assert_eq!(t.estimate, 0.0);
    }

    #[test]
    fn flip_entropy_archimedean() {
        let e = curve_37a();
        let t = local_flip_entropy(&e, &origin(), Place::Infinity, 300).unwrap();
        let lambda = t.target.unwrap();
        assert!((t.estimate - lambda).abs() < 0.02, "estimate {} vs {lambda}", t.estimate);
        assert!(t.estimate >= 0.0);
    }

    #[test]
    fn flip_entropy_negative_lambda_flips_sign() {
        let e = WeierstrassCurve::short(3, 11).unwrap();
        let q = CurvePoint::affine(rat(2, 1), rat(5, 1));
        let t = local_flip_entropy(&e, &q, Place::Finite(5), 200).unwrap();
        // lambda_5 < 0, so the flip gives -lambda_5 = (1/3) log 5
        let target = 5f64.ln() / 3.0;
        assert!(
            (t.estimate - target).abs() < 0.05 * target,
            "estimate {} vs {target}",
            t.estimate
        );
    }

    #[test]
    fn filter_parsing() {
        assert_eq!("all".parse::<PlaceFilter>().unwrap(), PlaceFilter::All);
        assert_eq!(
            "inf".parse::<PlaceFilter>().unwrap(),
            PlaceFilter::Single(Place::Infinity)
        );
        assert_eq!(
            "subset:2,3".parse::<PlaceFilter>().unwrap(),
            PlaceFilter::Subset(vec![2, 3])
        );
        assert_eq!(
            "complement:5".parse::<PlaceFilter>().unwrap(),
            PlaceFilter::Complement(vec![5])
        );
        assert!("subset:4".parse::<PlaceFilter>().is_err());
        assert_eq!("quotient".parse::<EdsFilter>().unwrap(), EdsFilter::QuotientComplement);
    }
}
