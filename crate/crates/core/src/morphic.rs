//! Morphic heights: canonical heights attached to iteration of a fixed
//! rational self-map of the line.
//!
//! For a polynomial f of degree d >= 2 the local morphic height at a
//! place v is lim d^(-n) log+ |f^n(q)|_v, and the global morphic height
//! is the sum over the places of q and of the coefficients; every other
//! place has good reduction and contributes nothing. Preperiodic points
//! have height exactly zero at every place.
//!
//! The x-coordinate duplication map of an elliptic curve is the motivating
//! degree-4 example: it is a proper rational map rather than a polynomial,
//! so its canonical height is taken through the projective naive height,
//! and it recovers twice the canonical height of the curve point.

use std::collections::HashMap;

use num_traits::{One, Zero};

use crate::adelic::{EntropyTrace, PlaceVolume};
use crate::elliptic::WeierstrassCurve;
use crate::error::{Error, Result};
use crate::places::{self, ExactRational, Place, RateFunction};

/// Orbit values are abandoned once numerator plus denominator exceed
/// this many bits; deep iteration squares the size each step.
pub const MAX_ORBIT_BITS: u64 = 1 << 20;

/// A polynomial self-map of degree at least 2, stored leading-first.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMap {
    coeffs: Vec<ExactRational>,
}

impl PolyMap {
    /// Coefficients in descending degree order, c_d first.
    pub fn new(coeffs: Vec<ExactRational>) -> Result<PolyMap> {
        if coeffs.len() < 3 {
            return Err(Error::domain("poly map", "degree must be at least 2"));
        }
        if coeffs[0].is_zero() {
            return Err(Error::domain("poly map", "leading coefficient is zero"));
        }
        Ok(PolyMap { coeffs })
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<PolyMap> {
        PolyMap::new(
            coeffs
                .iter()
                .map(|&c| ExactRational::from_integer(c.into()))
                .collect(),
        )
    }

    pub fn degree(&self) -> u64 {
        (self.coeffs.len() - 1) as u64
    }

    pub fn coefficients(&self) -> &[ExactRational] {
        &self.coeffs
    }

    pub fn eval(&self, z: &ExactRational) -> ExactRational {
        let mut acc = ExactRational::zero();
        for c in &self.coeffs {
            acc = acc * z + c;
        }
        acc
    }
}

/// Forward orbit q, f(q), f^2(q), ... with early exits recorded.
#[derive(Clone, Debug)]
pub struct OrbitRecord {
    pub values: Vec<ExactRational>,
    /// Stopped by the bit guard before reaching the requested depth.
    pub truncated: bool,
    /// (tail length, period) when a value repeats.
    pub preperiod: Option<(usize, usize)>,
}

fn rational_bits(q: &ExactRational) -> u64 {
    q.numer().bits() + q.denom().bits()
}

/// Cheap non-recursive stand-in for hashing the rational itself: the
/// library Hash walks the continued fraction, whose length grows linearly
/// in the bit size, and orbit values get huge. Collisions are resolved by
/// exact comparison.
fn fingerprint(q: &ExactRational) -> u64 {
    let low = |b: &num_bigint::BigInt| b.iter_u64_digits().next().unwrap_or(0);
    let mut h = low(q.numer()).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    h ^= low(q.denom()).rotate_left(32).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h ^= q.numer().bits().wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^= q.denom().bits().rotate_left(17);
    h ^ u64::from(q.numer().sign() == num_bigint::Sign::Minus)
}

pub fn orbit(f: &PolyMap, q: &ExactRational, depth: u64) -> OrbitRecord {
    let mut values = vec![q.clone()];
    let mut seen: HashMap<u64, Vec<usize>> = HashMap::new();
    seen.insert(fingerprint(q), vec![0]);
    let mut truncated = false;
    let mut preperiod = None;
    'outer: for _ in 0..depth {
        let last = values.last().unwrap();
        if rational_bits(last) > MAX_ORBIT_BITS {
            truncated = true;
            break;
        }
        let next = f.eval(last);
        let key = fingerprint(&next);
        let bucket = seen.entry(key).or_default();
        for &first in bucket.iter() {
            if values[first] == next {
                preperiod = Some((first, values.len() - first));
                break 'outer;
            }
        }
        bucket.push(values.len());
        values.push(next);
    }
    OrbitRecord { values, truncated, preperiod }
}

#[derive(Clone, Debug)]
pub struct MorphicLocalHeight {
    pub place: Place,
    pub value: f64,
    /// d^(-n) log+ |f^n(q)|_v for each computed n.
    pub trace: Vec<f64>,
    pub truncated: bool,
    pub preperiodic: bool,
}

fn local_from_orbit(orbit: &OrbitRecord, degree: u64, v: Place) -> MorphicLocalHeight {
    let d = degree as f64;
    let mut trace = Vec::with_capacity(orbit.values.len());
    for (n, value) in orbit.values.iter().enumerate() {
        trace.push(places::log_plus(value, v) / d.powi(n as i32));
    }
    let preperiodic = orbit.preperiod.is_some();
    // a finite orbit keeps log+ bounded, so the quotient dies under d^n
    let value = if preperiodic { 0.0 } else { *trace.last().unwrap() };
    MorphicLocalHeight {
        place: v,
        value,
        trace,
        truncated: orbit.truncated,
        preperiodic,
    }
}

/// Local morphic height lim d^(-n) log+ |f^n(q)|_v.
pub fn morphic_local_height(
    f: &PolyMap,
    q: &ExactRational,
    v: Place,
    depth: u64,
) -> Result<MorphicLocalHeight> {
    if depth == 0 {
        return Err(Error::domain("morphic height", "depth must be positive"));
    }
    Ok(local_from_orbit(&orbit(f, q, depth), f.degree(), v))
}

#[derive(Clone, Debug)]
pub struct MorphicGlobalHeight {
    pub value: f64,
    pub locals: Vec<(Place, f64)>,
    pub truncated: bool,
    pub preperiodic: bool,
}

/// Global morphic height: the sum of local heights over the places where
/// q or a coefficient is not a unit. Outside that set the coefficients
/// are integral with unit leading term and |q|_p <= 1, so the orbit stays
/// integral and the local height vanishes.
pub fn morphic_global_height(
    f: &PolyMap,
    q: &ExactRational,
    depth: u64,
) -> Result<MorphicGlobalHeight> {
    if depth == 0 {
        return Err(Error::domain("morphic height", "depth must be positive"));
    }
    let mut generators: Vec<ExactRational> = vec![q.clone()];
    generators.extend(f.coefficients().iter().cloned());
    generators.retain(|g| !g.is_zero());
    let support = places::relevant_places(&generators)?;
    let orb = orbit(f, q, depth);
    let mut locals = Vec::with_capacity(support.len());
    let mut value = 0.0;
    let mut truncated = orb.truncated;
    let mut preperiodic = false;
    for v in support {
        let local = local_from_orbit(&orb, f.degree(), v);
        value += local.value;
        truncated |= local.truncated;
        preperiodic |= local.preperiodic;
        locals.push((v, local.value));
    }
    if preperiodic {
        value = 0.0;
    }
    Ok(MorphicGlobalHeight { value, locals, truncated, preperiodic })
}

/// The local morphic height as a volume-growth entropy: the diagonal
/// action by theta_n = f^n(q) at the single place v against rate d^n.
/// The running maximum of log |theta_n|_v reproduces the log+ quotients
/// once the orbit escapes; zero multipliers are skipped, which only
/// happens on preperiodic orbits through the origin.
pub fn morphic_entropy(
    f: &PolyMap,
    q: &ExactRational,
    v: Place,
    depth: u64,
) -> Result<EntropyTrace> {
    if depth == 0 {
        return Err(Error::domain("morphic entropy", "depth must be positive"));
    }
    let rate = RateFunction::exponential(ExactRational::from_integer(f.degree().into()))?;
    let orb = orbit(f, q, depth);
    let mut running: f64 = 0.0;
    let mut indices = Vec::new();
    let mut quotients = Vec::new();
    for (n, value) in orb.values.iter().enumerate() {
        if !value.is_zero() {
            running = running.max(places::log_abs(value, v)?);
        }
        indices.push(n as u64);
        quotients.push(running.max(0.0) / (f.degree() as f64).powi(n as i32));
    }
    let estimate = if orb.preperiod.is_some() { 0.0 } else { *quotients.last().unwrap() };
    let volume = -running.max(0.0);
    let (arch, finite) = match v {
        Place::Infinity => (volume, 0.0),
        Place::Finite(_) => (0.0, volume),
    };
    Ok(EntropyTrace {
        label: "morphic".to_string(),
        rate: rate.to_string(),
        indices,
        quotients,
        estimate,
        target: None,
        stabilized: orb.preperiod.is_some(),
        arch_log_volume: arch,
        finite_log_volume: finite,
        per_place: vec![PlaceVolume { place: v, log_volume: volume, valuation_max: None }],
        per_place_truncated: false,
    })
}

/// x-coordinate duplication as a degree-4 rational map,
///   f(x) = (x^4 - b4 x^2 - 2 b6 x - b8) / (4 x^3 + b2 x^2 + 2 b4 x + b6),
/// stored as numerator and denominator coefficient rows, leading-first.
/// On y^2 = x^3 + ax + b this is
/// (x^4 - 2a x^2 - 8b x + a^2) / (4 (x^3 + ax + b)); the factor 4 in the
/// denominator is essential, without it f is not the x-map of doubling.
#[derive(Clone, Debug)]
pub struct DuplicationMap {
    pub num: [ExactRational; 5],
    pub den: [ExactRational; 4],
}

impl DuplicationMap {
    pub fn from_curve(e: &WeierstrassCurve) -> DuplicationMap {
        let r = |b: &num_bigint::BigInt| ExactRational::from_integer(b.clone());
        DuplicationMap {
            num: [
                ExactRational::one(),
                ExactRational::zero(),
                -r(&e.b4),
                -r(&e.b6) * ExactRational::from_integer(2.into()),
                -r(&e.b8),
            ],
            den: [
                ExactRational::from_integer(4.into()),
                r(&e.b2),
                r(&e.b4) * ExactRational::from_integer(2.into()),
                r(&e.b6),
            ],
        }
    }

    pub fn degree(&self) -> u64 {
        4
    }

    pub fn eval(&self, z: &ExactRational) -> Result<ExactRational> {
        let horner = |cs: &[ExactRational]| {
            let mut acc = ExactRational::zero();
            for c in cs {
                acc = acc * z + c;
            }
            acc
        };
        let den = horner(&self.den);
        if den.is_zero() {
            return Err(Error::Torsion(
                "duplication denominator vanishes: 2-torsion x-coordinate".into(),
            ));
        }
        Ok(horner(&self.num) / den)
    }
}

#[derive(Clone, Debug)]
pub struct DuplicationHeight {
    pub value: f64,
    /// h(f^n(q)) / 4^n with h the projective naive height on the line.
    pub trace: Vec<f64>,
    pub truncated: bool,
}

/// log max(|numerator|, |denominator|): the naive height on the
/// projective line.
fn line_height(q: &ExactRational) -> f64 {
    places::ln_abs_bigint(q.numer()).max(places::ln_abs_bigint(q.denom()))
}

/// Canonical height of the duplication map through the naive height:
/// lim 4^(-n) h(f^n(q)). Equals twice the canonical height of any curve
/// point with x-coordinate q.
pub fn duplication_global_height(
    f: &DuplicationMap,
    q: &ExactRational,
    depth: u64,
) -> Result<DuplicationHeight> {
    if depth == 0 {
        return Err(Error::domain("duplication height", "depth must be positive"));
    }
    let mut value = q.clone();
    let mut trace = vec![line_height(&value)];
    let mut truncated = false;
    for n in 1..=depth {
        if rational_bits(&value) > MAX_ORBIT_BITS {
            truncated = true;
            break;
        }
        value = f.eval(&value)?;
        trace.push(line_height(&value) / 4f64.powi(n as i32));
    }
    Ok(DuplicationHeight { value: *trace.last().unwrap(), trace, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{self, CurvePoint};
    use crate::heights;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> ExactRational {
        ExactRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn squaring() -> PolyMap {
        PolyMap::from_i64(&[1, 0, 0]).unwrap()
    }

    #[test]
    fn squaring_map_exact_heights() {
        let f = squaring();
        for (q, expected) in [
            (rat(2, 1), 2f64.ln()),
            (rat(3, 1), 3f64.ln()),
            (rat(1, 2), 2f64.ln()),
            (rat(2, 3), 3f64.ln()),
        ] {
            let g = morphic_global_height(&f, &q, 10).unwrap();
            assert!(
                (g.value - expected).abs() < 1e-12,
                "q = {q}: {} vs {expected}",
                g.value
            );
            assert!(!g.truncated && !g.preperiodic);
        }
    }

    #[test]
    fn squaring_map_local_split() {
        let f = squaring();
        let at_inf = morphic_local_height(&f, &rat(2, 1), Place::Infinity, 10).unwrap();
        assert!((at_inf.value - 2f64.ln()).abs() < 1e-12);
        let at_two = morphic_local_height(&f, &rat(2, 1), Place::Finite(2), 10).unwrap();
        assert_eq!(at_two.value, 0.0);
        // the quotient is constant for a monomial map
        assert!(at_inf.trace.iter().skip(1).all(|&t| (t - 2f64.ln()).abs() < 1e-12));

        let g = morphic_global_height(&f, &rat(2, 3), 10).unwrap();
        let at3 = g.locals.iter().find(|(v, _)| *v == Place::Finite(3)).unwrap();
        assert!((at3.1 - 3f64.ln()).abs() < 1e-12);
        let at2 = g.locals.iter().find(|(v, _)| *v == Place::Finite(2)).unwrap();
        assert_eq!(at2.1, 0.0);
    }

    #[test]
    fn preperiodic_orbit_has_zero_height() {
        // 0 -> -1 -> 0 under z^2 - 1
        let f = PolyMap::from_i64(&[1, 0, -1]).unwrap();
        let orb = orbit(&f, &rat(0, 1), 20);
        assert_eq!(orb.preperiod, Some((0, 2)));
        assert_eq!(orb.values.len(), 2);
        let g = morphic_global_height(&f, &rat(0, 1), 20).unwrap();
        assert_eq!(g.value, 0.0);
        assert!(g.preperiodic);
    }

    #[test]
    fn fixed_point_is_preperiodic_with_no_tail() {
        let f = squaring();
        let orb = orbit(&f, &rat(1, 1), 10);
        assert_eq!(orb.preperiod, Some((0, 1)));
        let g = morphic_global_height(&f, &rat(1, 1), 10).unwrap();
        assert_eq!(g.value, 0.0);
    }

    #[test]
    fn height_is_functorial_under_the_map() {
        let f = PolyMap::from_i64(&[1, 0, -1]).unwrap();
        let q = rat(2, 1);
        let hq = morphic_global_height(&f, &q, 12).unwrap().value;
        let hfq = morphic_global_height(&f, &f.eval(&q), 11).unwrap().value;
        assert!((hfq - 2.0 * hq).abs() < 1e-6, "{hfq} vs {}", 2.0 * hq);
    }

    #[test]
    fn rational_coefficients_pull_in_their_places() {
        let f = PolyMap::new(vec![rat(3, 2), rat(0, 1), rat(1, 2)]).unwrap();
        let g = morphic_global_height(&f, &rat(5, 1), 12).unwrap();
        let support: Vec<Place> = g.locals.iter().map(|(v, _)| *v).collect();
        assert!(support.contains(&Place::Finite(2)));
        assert!(support.contains(&Place::Finite(3)));
        assert!(support.contains(&Place::Finite(5)));
        assert_eq!(support.last(), Some(&Place::Infinity));
        // consistency: the same limit through the naive height of iterates
        let orb = orbit(&f, &rat(5, 1), 12);
        let n = orb.values.len() - 1;
        let direct = line_height(&orb.values[n]) / 2f64.powi(n as i32);
        assert!((g.value - direct).abs() < 1e-6, "{} vs {direct}", g.value);
    }

    #[test]
    fn orbit_truncates_on_bit_guard() {
        let f = squaring();
        let orb = orbit(&f, &rat(2, 1), 64);
        assert!(orb.truncated);
        assert!(orb.preperiod.is_none());
        // 2^(2^n) passes a million bits just beyond n = 20
        assert!(orb.values.len() < 24);
        let g = morphic_global_height(&f, &rat(2, 1), 64).unwrap();
        assert!(g.truncated);
        assert!((g.value - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn entropy_reproduces_local_height() {
        let f = squaring();
        for (q, v) in [
            (rat(2, 3), Place::Finite(3)),
            (rat(2, 3), Place::Infinity),
            (rat(5, 2), Place::Infinity),
        ] {
            let t = morphic_entropy(&f, &q, v, 12).unwrap();
            let l = morphic_local_height(&f, &q, v, 12).unwrap();
            assert!(
                (t.estimate - l.value).abs() < 1e-12,
                "q = {q}, v = {v}: {} vs {}",
                t.estimate,
                l.value
            );
        }
    }

    #[test]
    fn entropy_of_preperiodic_point_is_zero() {
        let f = PolyMap::from_i64(&[1, 0, -1]).unwrap();
        let t = morphic_entropy(&f, &rat(0, 1), Place::Infinity, 20).unwrap();
        assert_eq!(t.estimate, 0.0);
        assert!(t.stabilized);
    }

    #[test]
    fn poly_map_validation() {
        assert!(PolyMap::from_i64(&[1, 0]).is_err());
        assert!(PolyMap::from_i64(&[0, 1, 1]).is_err());
        assert!(PolyMap::from_i64(&[2, 0, 1]).is_ok());
    }

    #[test]
    fn short_curve_duplication_coefficients() {
        // y^2 = x^3 + ax + b gives (x^4 - 2a x^2 - 8b x + a^2) / (4(x^3 + ax + b))
        let (a, b) = (3i64, 11i64);
        let e = WeierstrassCurve::short(a, b).unwrap();
        let f = DuplicationMap::from_curve(&e);
        let expect_num = [rat(1, 1), rat(0, 1), rat(-2 * a, 1), rat(-8 * b, 1), rat(a * a, 1)];
        let expect_den = [rat(4, 1), rat(0, 1), rat(4 * a, 1), rat(4 * b, 1)];
        assert_eq!(f.num, expect_num);
        assert_eq!(f.den, expect_den);
    }

    #[test]
    fn duplication_orbit_matches_double_iterates() {
        let e = WeierstrassCurve::from_i64([0, 0, 1, -1, 0]).unwrap();
        let q = CurvePoint::affine(rat(0, 1), rat(0, 1));
        let f = DuplicationMap::from_curve(&e);
        let seq = elliptic::double_iterates(&e, &q, 6).unwrap();
        let mut x = rat(0, 1);
        for theta in &seq.theta {
            x = f.eval(&x).unwrap();
            assert_eq!(&x, theta);
        }
    }

    #[test]
    fn duplication_height_is_twice_canonical() {
        let e = WeierstrassCurve::from_i64([0, 0, 1, -1, 0]).unwrap();
        let q = CurvePoint::affine(rat(0, 1), rat(0, 1));
        let f = DuplicationMap::from_curve(&e);
        let hhat = heights::canonical_height(&e, &q, 10).unwrap().estimate;
        let dup = duplication_global_height(&f, &rat(0, 1), 8).unwrap();
        assert!(
            (dup.value - 2.0 * hhat).abs() < 1e-3,
            "{} vs {}",
            dup.value,
            2.0 * hhat
        );
        assert!(!dup.truncated);
    }

    #[test]
    fn duplication_rejects_two_torsion() {
        // y^2 = x^3 - x has 2-torsion at x = 0
        let e = WeierstrassCurve::short(-1, 0).unwrap();
        let f = DuplicationMap::from_curve(&e);
        assert!(matches!(f.eval(&rat(0, 1)), Err(Error::Torsion(_))));
    }
}
