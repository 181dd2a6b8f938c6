//! Exact rational arithmetic, p-adic valuations, and logarithms at all
//! places of the rationals.
//!
//! Everything downstream reduces to two primitives kept here: exact
//! valuations of arbitrary-precision rationals at finite primes, and
//! natural logs of huge integers computed from bit length plus a mantissa
//! correction. All logarithms in this crate are natural logs (nats).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// The universal exact scalar: an arbitrary-precision reduced fraction
/// with positive denominator (both invariants maintained by the type).
pub type ExactRational = BigRational;

/// Trial-division bound used before the Pollard-rho fallback.
pub const TRIAL_DIVISION_BOUND: u64 = 1_000_000;

/// Largest input accepted by [`mobius`].
pub const MOBIUS_BOUND: u64 = 1_000_000_000;

/// A place of the rationals: a finite prime or the archimedean place.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Place {
    Finite(u64),
    Infinity,
}

impl Place {
    /// A verified finite place; rejects composite or unit `p`.
    pub fn finite(p: u64) -> Result<Place> {
        if is_prime(p) {
            Ok(Place::Finite(p))
        } else {
            Err(Error::domain("place", format!("{p} is not prime")))
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Place::Finite(_))
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{p}"),
            Place::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;

    fn from_str(s: &str) -> Result<Place> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(Place::Infinity);
        }
        let p: u64 = s
            .parse()
            .map_err(|_| Error::domain("place", format!("cannot parse place {s:?}")))?;
        Place::finite(p)
    }
}

/// Growth rate r(n) against which volume decay is normalized.
/// Non-decreasing and diverging for n >= 2 by construction.
#[derive(Clone, Debug, PartialEq)]
pub enum RateFunction {
    Linear,
    NLogN,
    NSquared,
    LogN,
    /// c^n with rational c > 1.
    Exponential(ExactRational),
}

impl RateFunction {
    /// Exponential rate with base validation.
    pub fn exponential(c: ExactRational) -> Result<RateFunction> {
        if c > ExactRational::one() {
            Ok(RateFunction::Exponential(c))
        } else {
            Err(Error::domain("rate", "exponential base must exceed 1"))
        }
    }

    /// r(n); rates that start at 0 (log n at n = 1) return 0 and callers
    /// skip those indices.
    pub fn eval(&self, n: u64) -> f64 {
        let x = n as f64;
        match self {
            RateFunction::Linear => x,
            RateFunction::NLogN => x * x.ln(),
            RateFunction::NSquared => x * x,
            RateFunction::LogN => x.ln(),
            RateFunction::Exponential(c) => {
                let ln_c = ln_abs_bigint(c.numer()) - ln_abs_bigint(c.denom());
                (x * ln_c).exp()
            }
        }
    }
}

impl fmt::Display for RateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateFunction::Linear => write!(f, "n"),
            RateFunction::NLogN => write!(f, "n log n"),
            RateFunction::NSquared => write!(f, "n^2"),
            RateFunction::LogN => write!(f, "log n"),
            RateFunction::Exponential(c) => write!(f, "{}^n", rat_to_string(c)),
        }
    }
}

impl FromStr for RateFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<RateFunction> {
        let t = s.trim().to_ascii_lowercase().replace([' ', '*'], "");
        match t.as_str() {
            "n" | "linear" => Ok(RateFunction::Linear),
            "nlogn" => Ok(RateFunction::NLogN),
            "n^2" | "n2" | "nsquared" => Ok(RateFunction::NSquared),
            "logn" => Ok(RateFunction::LogN),
            _ => {
                if let Some(base) = t.strip_prefix("exp:") {
                    return RateFunction::exponential(rat_from_str(base)?);
                }
                if let Some(base) = t.strip_suffix("^n") {
                    return RateFunction::exponential(rat_from_str(base)?);
                }
                Err(Error::domain("rate", format!("unknown rate {s:?}")))
            }
        }
    }
}

/// Parse "a/b" or "a" in base 10.
pub fn rat_from_str(s: &str) -> Result<ExactRational> {
    let s = s.trim();
    let bad = |_| Error::domain("rational", format!("cannot parse rational {s:?}"));
    match s.split_once('/') {
        Some((num, den)) => {
            let n: BigInt = num.trim().parse().map_err(bad)?;
            let d: BigInt = den.trim().parse().map_err(bad)?;
            if d.is_zero() {
                return Err(Error::domain("rational", "zero denominator"));
            }
            Ok(ExactRational::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(bad)?;
            Ok(ExactRational::from_integer(n))
        }
    }
}

/// Print "a/b", or "a" alone for integers.
pub fn rat_to_string(q: &ExactRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// p-adic valuation of a nonzero rational: q = p^v * (u/w) with p coprime
/// to u and w.
pub fn valuation(q: &ExactRational, p: u64) -> Result<i64> {
    if q.is_zero() {
        return Err(Error::domain("valuation", "valuation of zero"));
    }
    if !is_prime(p) {
        return Err(Error::domain("valuation", format!("{p} is not prime")));
    }
    let vn = biguint_valuation(q.numer().magnitude(), p);
    let vd = biguint_valuation(q.denom().magnitude(), p);
    Ok(vn as i64 - vd as i64)
}

/// v_p of a nonzero BigUint. Strips p in an exact-division ladder of
/// squared powers so the cost stays near-linear in the bit length even
/// for huge valuations.
pub fn biguint_valuation(n: &BigUint, p: u64) -> u64 {
    debug_assert!(!n.is_zero());
    let mut n = n.clone();
    strip_factor(&mut n, p)
}

/// Removes every factor p from n in place and returns the multiplicity.
pub fn strip_factor(n: &mut BigUint, p: u64) -> u64 {
    let mut v: u64 = 0;
    let mut ladder: Vec<BigUint> = vec![BigUint::from(p)];
    // climb: each successful division doubles the chunk size
    loop {
        let last = ladder.last().unwrap().clone();
        let (q, r) = n.div_rem(&last);
        if r.is_zero() {
            *n = q;
            v += 1u64 << (ladder.len() - 1);
            ladder.push(&last * &last);
        } else {
            break;
        }
    }
    // walk back down through the smaller chunks
    for i in (0..ladder.len().saturating_sub(1)).rev() {
        let (q, r) = n.div_rem(&ladder[i]);
        if r.is_zero() {
            *n = q;
            v += 1u64 << i;
        }
    }
    v
}

/// Natural log of |n| for a nonzero big integer, from bit length plus a
/// 64-bit mantissa. Relative error is below 2^-50 (the mantissa carries
/// 53 significant bits and the shift term is exact to one ulp of ln 2),
/// so results carry at least 50 significant bits at any operand size.
/// Returns negative infinity for 0.
pub fn ln_abs_bigint(n: &BigInt) -> f64 {
    ln_biguint(n.magnitude())
}

/// Natural log of a nonzero BigUint; negative infinity for 0.
pub fn ln_biguint(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 1023 {
        // fits in an f64 exponent; conversion keeps full 53-bit precision
        return n.to_f64().expect("fits f64 range").ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().expect("top 64 bits");
    (top as f64).ln() + (shift as f64) * std::f64::consts::LN_2
}

/// log|q|_v in nats. Finite v: -valuation(q, p) * ln p, exact up to the
/// final multiplication. Archimedean: ln|numerator| - ln|denominator|.
pub fn log_abs(q: &ExactRational, v: Place) -> Result<f64> {
    if q.is_zero() {
        return Err(Error::domain("log_abs", "log of zero"));
    }
    match v {
        Place::Finite(p) => Ok(-(valuation(q, p)? as f64) * (p as f64).ln()),
        Place::Infinity => Ok(ln_abs_bigint(q.numer()) - ln_abs_bigint(q.denom())),
    }
}

/// max(0, log|q|_v); 0 for q = 0.
pub fn log_plus(q: &ExactRational, v: Place) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    log_abs(q, v).expect("nonzero").max(0.0)
}

/// The finitely many places where any of the inputs can have nontrivial
/// absolute value: the primes dividing some numerator or denominator,
/// plus the archimedean place (always last in the returned order).
pub fn relevant_places(qs: &[ExactRational]) -> Result<Vec<Place>> {
    let mut primes = BTreeSet::new();
    for q in qs {
        if q.is_zero() {
            return Err(Error::domain("relevant_places", "zero entry"));
        }
        for part in [q.numer().magnitude(), q.denom().magnitude()] {
            for (p, _) in factor_biguint(part)? {
                primes.insert(p);
            }
        }
    }
    let mut out: Vec<Place> = primes.into_iter().map(Place::Finite).collect();
    out.push(Place::Infinity);
    Ok(out)
}

/// Mobius function via factorization; inputs capped at 10^9.
pub fn mobius(n: u64) -> Result<i64> {
    if n == 0 {
        return Err(Error::domain("mobius", "mobius of zero"));
    }
    if n > MOBIUS_BOUND {
        return Err(Error::work_limit("mobius", format!("{n} exceeds {MOBIUS_BOUND}")));
    }
    let mut parity = 1i64;
    for (_, e) in factor_u64(n) {
        if e >= 2 {
            return Ok(0);
        }
        parity = -parity;
    }
    Ok(parity)
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc: u64 = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for all u64 (the 12 smallest prime
/// bases decide primality below 3.3 * 10^24).
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Pollard-Brent rho; n must be odd, composite, and not a prime power of
/// interest below the trial bound. Always succeeds for u64 inputs.
fn pollard_brent(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c: u64 = 1;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut x: u64 = 2;
        let mut y: u64 = 2;
        let mut d: u64 = 1;
        let mut count = 0u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
            count += 1;
            if count > 1 << 24 {
                break;
            }
        }
        if d != n && d != 1 {
            return d;
        }
        c += 1; // deterministic restart with the next polynomial offset
    }
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if a == 0 {
        b
    } else {
        gcd_u64(b % a, a)
    }
}

/// Full factorization of n >= 1 as sorted (prime, multiplicity) pairs.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1, "factor_u64 requires n >= 1");
    let mut out = std::collections::BTreeMap::new();
    let mut rest = n;
    for p in 2..=65_536u64 {
        if p * p > rest {
            break;
        }
        while rest % p == 0 {
            *out.entry(p).or_insert(0u32) += 1;
            rest /= p;
        }
    }
    let mut stack = vec![];
    if rest > 1 {
        stack.push(rest);
    }
    while let Some(m) = stack.pop() {
        if is_prime(m) {
            *out.entry(m).or_insert(0) += 1;
        } else {
            let d = pollard_brent(m);
            stack.push(d);
            stack.push(m / d);
        }
    }
    out.into_iter().collect()
}

/// Factorization for arbitrary-precision positive integers: trial division
/// to the configured bound, Miller-Rabin certification, then Pollard rho
/// with an iteration cap. A leftover that resists both is an error rather
/// than a silent mis-factorization.
pub fn factor_biguint(n: &BigUint) -> Result<Vec<(u64, u32)>> {
    if n.is_zero() {
        return Err(Error::domain("factor", "factor of zero"));
    }
    if let Some(small) = n.to_u64() {
        return Ok(factor_u64(small));
    }
    let mut out = std::collections::BTreeMap::new();
    let mut rest = n.clone();
    for p in primes_up_to(TRIAL_DIVISION_BOUND) {
        let v = strip_factor(&mut rest, p);
        if v > 0 {
            *out.entry(p).or_insert(0u32) += v as u32;
        }
        if let Some(small) = rest.to_u64() {
            for (q, e) in factor_u64(small) {
                *out.entry(q).or_insert(0) += e;
            }
            return Ok(out.into_iter().collect());
        }
    }
    Err(Error::work_limit(
        "factor",
        format!("cofactor with {} bits resists the trial bound {TRIAL_DIVISION_BOUND}", rest.bits()),
    ))
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return vec![];
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2usize;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(i, &is_p)| if is_p { Some(i as u64) } else { None })
        .collect()
}

/// The first `count` primes.
pub fn first_primes(count: usize) -> Vec<u64> {
    if count == 0 {
        return vec![];
    }
    // p_k < k (ln k + ln ln k) for k >= 6; pad the small cases
    let k = count.max(6) as f64;
    let bound = (k * (k.ln() + k.ln().ln())).ceil() as u64 + 16;
    let mut primes = primes_up_to(bound);
    primes.truncate(count);
    assert_eq!(primes.len(), count, "prime bound was insufficient");
    primes
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> ExactRational {
        ExactRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation(&rat(8, 3), 2).unwrap(), 3);
        assert_eq!(valuation(&rat(8, 3), 3).unwrap(), -1);
        assert_eq!(valuation(&rat(7, 5), 2).unwrap(), 0);
        assert!(valuation(&rat(0, 1), 2).is_err());
        assert!(valuation(&rat(1, 2), 4).is_err());
    }

    #[test]
    fn log_abs_examples() {
        let ln2 = 2f64.ln();
        assert!((log_abs(&rat(8, 3), Place::Finite(2)).unwrap() + 3.0 * ln2).abs() < 1e-12);
        assert!((log_abs(&rat(-5, 7), Place::Finite(7)).unwrap() - 7f64.ln()).abs() < 1e-12);
        assert!((log_abs(&rat(8, 3), Place::Infinity).unwrap() - (8f64 / 3.0).ln()).abs() < 1e-12);
        assert!(log_abs(&rat(0, 1), Place::Infinity).is_err());
    }

    #[test]
    fn log_plus_examples() {
        assert!((log_plus(&rat(3, 2), Place::Infinity) - 1.5f64.ln()).abs() < 1e-12);
        assert!((log_plus(&rat(1, 2), Place::Finite(2)) - 2f64.ln()).abs() < 1e-12);
        assert_eq!(log_plus(&rat(3, 1), Place::Finite(5)), 0.0);
        assert_eq!(log_plus(&rat(0, 1), Place::Infinity), 0.0);
    }

    #[test]
    fn relevant_places_examples() {
        let places = relevant_places(&[rat(8, 3)]).unwrap();
        assert_eq!(places, vec![Place::Finite(2), Place::Finite(3), Place::Infinity]);
        assert_eq!(relevant_places(&[rat(1, 1)]).unwrap(), vec![Place::Infinity]);
        let places = relevant_places(&[rat(6, 1), rat(1, 10)]).unwrap();
        assert_eq!(
            places,
            vec![Place::Finite(2), Place::Finite(3), Place::Finite(5), Place::Infinity]
        );
        assert_eq!(relevant_places(&[]).unwrap(), vec![Place::Infinity]);
        assert!(relevant_places(&[rat(0, 1)]).is_err());
    }

    #[test]
    fn mobius_examples() {
        assert_eq!(mobius(1).unwrap(), 1);
        assert_eq!(mobius(6).unwrap(), 1);
        assert_eq!(mobius(12).unwrap(), 0);
        assert_eq!(mobius(30).unwrap(), -1);
        assert!(mobius(0).is_err());
    }

    #[test]
    fn huge_integer_logs() {
        let n = BigInt::from(2).pow(20_000u32);
        let expected = 20_000f64 * std::f64::consts::LN_2;
        assert!((ln_abs_bigint(&n) - expected).abs() / expected < 1e-13);

        let n = BigInt::from(10).pow(5_000u32);
        let expected = 5_000f64 * 10f64.ln();
        assert!((ln_abs_bigint(&n) - expected).abs() / expected < 1e-13);

        assert_eq!(ln_abs_bigint(&BigInt::from(0)), f64::NEG_INFINITY);
        assert_eq!(ln_abs_bigint(&BigInt::from(1)), 0.0);
    }

    #[test]
    fn strip_factor_large_multiplicity() {
        let mut n = BigUint::from(3u32).pow(12_345u32) * BigUint::from(7u32);
        assert_eq!(strip_factor(&mut n, 3), 12_345);
        assert_eq!(n, BigUint::from(7u32));
    }

    #[test]
    fn primality_and_factorization() {
        assert!(is_prime(2) && is_prime(37) && is_prime(104_729));
        assert!(!is_prime(1) && !is_prime(561) && !is_prime(104_730));
        assert_eq!(factor_u64(104_729 * 104_729), vec![(104_729, 2)]);
        assert_eq!(factor_u64(1), vec![]);
        let big = BigUint::from(2u32).pow(80u32) * BigUint::from(3u32).pow(5u32);
        assert_eq!(factor_biguint(&big).unwrap(), vec![(2, 80), (3, 5)]);
    }

    #[test]
    fn prime_listing() {
        assert_eq!(primes_up_to(13), vec![2, 3, 5, 7, 11, 13]);
        let ps = first_primes(10_000);
        assert_eq!(ps.len(), 10_000);
        assert_eq!(*ps.last().unwrap(), 104_729);
    }

    #[test]
    fn rational_round_trip() {
        assert_eq!(rat_to_string(&rat_from_str("21/25").unwrap()), "21/25");
        assert_eq!(rat_to_string(&rat_from_str("-6/4").unwrap()), "-3/2");
        assert_eq!(rat_to_string(&rat_from_str("7").unwrap()), "7");
        assert_eq!(rat_to_string(&rat_from_str("6/3").unwrap()), "2");
        assert!(rat_from_str("1/0").is_err());
    }

    #[test]
    fn rate_functions() {
        assert_eq!(RateFunction::LogN.eval(1), 0.0);
        assert!((RateFunction::NLogN.eval(100) - 100.0 * 100f64.ln()).abs() < 1e-9);
        let four = RateFunction::exponential(rat(4, 1)).unwrap();
        assert!((four.eval(5) - 1024.0).abs() < 1e-6);
        assert!(RateFunction::exponential(rat(1, 1)).is_err());
        assert_eq!("nlogn".parse::<RateFunction>().unwrap(), RateFunction::NLogN);
        assert_eq!("exp:4".parse::<RateFunction>().unwrap(), four);
    }

    fn nonzero_rational() -> impl Strategy<Value = ExactRational> {
        (-100_000i64..100_000, 1i64..100_000)
            .prop_filter("nonzero", |(n, _)| *n != 0)
            .prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

        // product formula: the log absolute values over all relevant places sum to zero
        #[test]
        fn product_formula(q in nonzero_rational()) {
            let places = relevant_places(std::slice::from_ref(&q)).unwrap();
            let total: f64 = places.iter().map(|&v| log_abs(&q, v).unwrap()).sum();
            prop_assert!(total.abs() < 1e-9);
        }

        #[test]
        fn valuation_is_additive(
            q in nonzero_rational(),
            r in nonzero_rational(),
            idx in 0usize..4,
        ) {
            let p = [2u64, 3, 5, 7][idx];
            let product = &q * &r;
            prop_assert_eq!(
                valuation(&product, p).unwrap(),
                valuation(&q, p).unwrap() + valuation(&r, p).unwrap()
            );
        }

        #[test]
        fn log_plus_difference_is_log_abs(q in nonzero_rational(), idx in 0usize..5) {
            let v = [Place::Finite(2), Place::Finite(3), Place::Finite(5), Place::Finite(7), Place::Infinity][idx];
            let inv = q.recip();
            let lhs = log_plus(&q, v) - log_plus(&inv, v);
            prop_assert!((lhs - log_abs(&q, v).unwrap()).abs() < 1e-9);
        }
    }
}
