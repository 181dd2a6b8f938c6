//! Genus-0 baseline on the projective line: projective heights, Jensen's
//! integral by quadrature, periodic-point counts |a^n - b^n| for the map
//! dual to multiplication by a/b, and the Mobius congruence test that any
//! realizable periodic-count sequence must satisfy.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::places::{ln_abs_bigint, log_plus, mobius, relevant_places, ExactRational};

/// log max(|a|, |b|) for a coprime pair, cross-checked against the sum of
/// local contributions log+|a/b|_v over every relevant place.
pub fn projective_height(a: &BigInt, b: &BigInt) -> Result<f64> {
    if a.is_zero() && b.is_zero() {
        return Err(Error::domain("projective_height", "(0, 0) is not a projective point"));
    }
    if !a.gcd(b).is_one() {
        return Err(Error::domain("projective_height", "inputs must be coprime"));
    }
    // coprimality forces the other coordinate to be a unit when one vanishes
    if a.is_zero() || b.is_zero() {
        return Ok(0.0);
    }
    let h = ln_abs_bigint(a).max(ln_abs_bigint(b));
    let q = ExactRational::new(a.clone(), b.clone());
    let places = relevant_places(std::slice::from_ref(&q))?;
    let local_sum: f64 = places.iter().map(|&v| log_plus(&q, v)).sum();
    assert!(
        (local_sum - h).abs() <= 1e-9 * (1.0 + h.abs()),
        "product formula violated: locals {local_sum}, height {h}"
    );
    Ok(h)
}

/// Composite trapezoid value of the circle integral of log|b x - a| with
/// K panels. The integrand is analytic when |a| != |b|, so the error
/// decays exponentially in K; the limit is log max(|a|, |b|).
pub fn jensen_quadrature(a: &BigInt, b: &BigInt, panels: u64) -> Result<f64> {
    if panels < 16 {
        return Err(Error::domain("jensen_quadrature", "need at least 16 panels"));
    }
    if a.magnitude() == b.magnitude() {
        return Err(Error::domain("jensen_quadrature", "logarithmic singularity on contour"));
    }
    // scale both coordinates into [-1, 1] so squares cannot overflow
    let m = a.magnitude().max(b.magnitude()).clone();
    let scale = ln_abs_bigint(&BigInt::from(m.clone()));
    let m = BigInt::from(m);
    let ra = ExactRational::new(a.clone(), m.clone()).to_f64().expect("ratio in unit range");
    let rb = ExactRational::new(b.clone(), m).to_f64().expect("ratio in unit range");
    let mut sum = 0.0;
    for j in 0..panels {
        let theta = 2.0 * std::f64::consts::PI * (j as f64) / (panels as f64);
        // |rb e^{i theta} - ra|^2, strictly positive since |ra| != |rb|
        sum += 0.5 * (ra * ra + rb * rb - 2.0 * ra * rb * theta.cos()).ln();
    }
    Ok(scale + sum / panels as f64)
}

/// Number of points of period n for the coprime pair (a, b): |a^n - b^n|.
pub fn periodic_count(a: &BigInt, b: &BigInt, n: u64) -> Result<BigInt> {
    if n == 0 {
        return Err(Error::domain("periodic_count", "index must be at least 1"));
    }
    if !a.gcd(b).is_one() {
        return Err(Error::domain("periodic_count", "inputs must be coprime"));
    }
    if a.magnitude() == b.magnitude() {
        return Err(Error::domain("periodic_count", "degenerate count for |a| = |b|"));
    }
    let n = u32::try_from(n).map_err(|_| Error::work_limit("periodic_count", "index exceeds u32"))?;
    Ok((a.pow(n) - b.pow(n)).abs())
}

/// Result of the Mobius inversion test at index n.
#[derive(Clone, Debug)]
pub struct MobiusCongruence {
    pub n: u64,
    /// Unreduced sum over divisors d of n of mobius(n/d) * seq[d].
    pub sum: BigInt,
    /// sum mod n, in [0, n).
    pub residue: u64,
    pub nonnegative: bool,
}

impl MobiusCongruence {
    /// A sequence of genuine periodic-point counts passes at every n.
    pub fn passes(&self) -> bool {
        self.nonnegative && self.residue == 0
    }
}

/// Mobius inversion applied to a candidate periodic-count sequence
/// (indexed from 1): sum over d | n of mobius(n/d) * seq[d]. For counts
/// coming from an actual map this recovers n times the number of points
/// of exact period n, hence is non-negative and divisible by n.
pub fn mobius_congruence(seq: &[BigInt], n: u64) -> Result<MobiusCongruence> {
    if n == 0 {
        return Err(Error::domain("mobius_congruence", "index must be at least 1"));
    }
    if n > seq.len() as u64 {
        return Err(Error::domain(
            "mobius_congruence",
            format!("index {n} exceeds sequence length {}", seq.len()),
        ));
    }
    let mut sum = BigInt::zero();
    for d in 1..=n {
        if n % d == 0 {
            sum += mobius(n / d)? * &seq[(d - 1) as usize];
        }
    }
    let residue = sum
        .mod_floor(&BigInt::from(n))
        .to_u64()
        .expect("residue below n");
    Ok(MobiusCongruence { n, sum: sum.clone(), residue, nonnegative: !sum.is_negative() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn height_examples() {
        assert!((projective_height(&big(3), &big(2)).unwrap() - 3f64.ln()).abs() < 1e-12);
        assert_eq!(projective_height(&big(1), &big(1)).unwrap(), 0.0);
        assert!((projective_height(&big(10), &big(3)).unwrap() - 10f64.ln()).abs() < 1e-12);
        assert_eq!(projective_height(&big(1), &big(0)).unwrap(), 0.0);
        assert_eq!(projective_height(&big(0), &big(-1)).unwrap(), 0.0);
        assert!(projective_height(&big(4), &big(2)).is_err());
        assert!(projective_height(&big(0), &big(0)).is_err());
    }

    #[test]
    fn height_splits_into_finite_and_archimedean_parts() {
        // (10, 3): the only positive finite contribution is at p = 3
        let q = ExactRational::new(big(10), big(3));
        let finite: f64 = [2u64, 3, 5]
            .iter()
            .map(|&p| log_plus(&q, crate::places::Place::Finite(p)))
            .sum();
        let arch = log_plus(&q, crate::places::Place::Infinity);
        assert!((finite - 3f64.ln()).abs() < 1e-12);
        assert!((arch - (10f64 / 3.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn quadrature_examples() {
        assert!((jensen_quadrature(&big(3), &big(2), 2048).unwrap() - 3f64.ln()).abs() < 1e-6);
        assert!((jensen_quadrature(&big(1), &big(2), 2048).unwrap() - 2f64.ln()).abs() < 1e-6);
        assert!((jensen_quadrature(&big(7), &big(4), 2048).unwrap() - 7f64.ln()).abs() < 1e-6);
        assert!(jensen_quadrature(&big(3), &big(2), 8).is_err());
        let err = jensen_quadrature(&big(2), &big(-2), 2048).unwrap_err();
        assert!(err.to_string().contains("logarithmic singularity on contour"));
    }

    #[test]
    fn quadrature_matches_exact_telescoped_product() {
        // the trapezoid sum telescopes: (1/K) sum_j log|b w^j - a| over the
        // K-th roots of unity w^j equals (1/K) log|a^K - b^K| exactly
        let k = 1u64 << 16;
        for (a, b) in [(3i64, 2i64), (7, 4), (-5, 3), (1, 2), (12, 35)] {
            let quad = jensen_quadrature(&big(a), &big(b), k).unwrap();
            let exact = ln_abs_bigint(&(big(a).pow(k as u32) - big(b).pow(k as u32))) / k as f64;
            assert!((quad - exact).abs() < 1e-9, "pair ({a}, {b}): {quad} vs {exact}");
        }
    }

    #[test]
    fn count_examples() {
        assert_eq!(periodic_count(&big(3), &big(2), 3).unwrap(), big(19));
        assert_eq!(periodic_count(&big(2), &big(1), 6).unwrap(), big(63));
        assert_eq!(periodic_count(&big(3), &big(2), 1).unwrap(), big(1));
        assert!(periodic_count(&big(2), &big(2), 3).is_err());
        assert!(periodic_count(&big(4), &big(2), 3).is_err());
        assert!(periodic_count(&big(3), &big(2), 0).is_err());
    }

    #[test]
    fn count_growth_rate_recovers_height() {
        let h = 3f64.ln();
        for n in [500u64, 750, 1000] {
            let c = periodic_count(&big(3), &big(2), n).unwrap();
            let rate = ln_abs_bigint(&c) / n as f64;
            assert!((rate - h).abs() < 0.01, "n = {n}: rate {rate}");
        }
    }

    #[test]
    fn congruence_examples() {
        let seq: Vec<BigInt> = [1, 1, 1, 1, 5].iter().map(|&v| big(v)).collect();
        let c = mobius_congruence(&seq, 5).unwrap();
        assert_eq!(c.sum, big(4));
        assert_eq!(c.residue, 4);
        assert!(!c.passes());

        let seq: Vec<BigInt> = (1..=6u32).map(|d| big(2).pow(d) - 1).collect();
        let c = mobius_congruence(&seq, 6).unwrap();
        assert_eq!(c.sum, big(54));
        assert_eq!(c.residue, 0);
        assert!(c.passes());

        let c = mobius_congruence(&seq, 1).unwrap();
        assert_eq!(c.residue, 0);

        assert!(mobius_congruence(&seq, 7).is_err());
        assert!(mobius_congruence(&seq, 0).is_err());
    }

    #[test]
    fn genuine_counts_pass_congruence_everywhere() {
        let seq: Vec<BigInt> =
            (1..=30).map(|n| periodic_count(&big(3), &big(2), n).unwrap()).collect();
        for n in 1..=30u64 {
            let c = mobius_congruence(&seq, n).unwrap();
            assert!(c.passes(), "congruence failed at n = {n}: {c:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 20, ..ProptestConfig::default() })]

        #[test]
        fn quadrature_converges_to_height(
            (a, b) in (2i64..300, 2i64..300).prop_filter(
                "coprime, distinct moduli",
                |(a, b)| a.abs() != b.abs() && num_integer::gcd(*a, *b) == 1,
            ),
            sign_a in prop::bool::ANY,
        ) {
            let a = if sign_a { -a } else { a };
            let h = projective_height(&big(a), &big(b)).unwrap();
            let quad = jensen_quadrature(&big(a), &big(b), 1 << 16).unwrap();
            prop_assert!((quad - h).abs() < 1e-6);
        }

        #[test]
        fn counts_always_pass_congruence(
            (a, b) in (1i64..50, 1i64..50).prop_filter(
                "coprime, distinct moduli",
                |(a, b)| a.abs() != b.abs() && num_integer::gcd(*a, *b) == 1,
            ),
            n in 1u64..20,
        ) {
            let seq: Vec<BigInt> =
                (1..=n).map(|k| periodic_count(&big(a), &big(b), k).unwrap()).collect();
            let c = mobius_congruence(&seq, n).unwrap();
            prop_assert!(c.passes(), "failed at n = {}: {:?}", n, c);
        }
    }
}
