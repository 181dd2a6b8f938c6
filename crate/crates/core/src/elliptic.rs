//! Elliptic curves over the rationals in generalized Weierstrass form:
//! exact group law, duplication iterates, division-polynomial values,
//! elliptic divisibility sequences, and reduction analysis at primes.
//!
//! Input coefficients follow y^2 + a1 x y + a3 y = x^3 + a2 x^2 + a4 x + a6
//! with integer a_i. Models are used as given; nothing is minimalized, so
//! all local quantities downstream are model-relative.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::places::{self, ExactRational};

/// Doubling depth guard: coordinates of 2^N Q carry on the order of 4^N
/// digits, so this cap keeps a single sequence under a few megabytes.
pub const MAX_DOUBLING_DEPTH: u64 = 12;

/// Division-polynomial index guard; values at the cap carry n^2-scale
/// digit counts.
pub const MAX_DIVISION_INDEX: u64 = 4096;

/// Any rational torsion point has order at most 12, so checking multiples
/// up to this bound is an unconditional torsion test over the rationals.
pub const TORSION_BOUND: u64 = 12;

/// A nonsingular curve y^2 + a1 x y + a3 y = x^3 + a2 x^2 + a4 x + a6
/// with integer coefficients, carrying the standard derived quantities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeierstrassCurve {
    pub a1: BigInt,
    pub a2: BigInt,
    pub a3: BigInt,
    pub a4: BigInt,
    pub a6: BigInt,
    pub b2: BigInt,
    pub b4: BigInt,
    pub b6: BigInt,
    pub b8: BigInt,
    pub c4: BigInt,
    pub c6: BigInt,
    pub discriminant: BigInt,
}

/// A rational point: the identity, or an affine pair satisfying the curve
/// equation exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurvePoint {
    Identity,
    Affine { x: ExactRational, y: ExactRational },
}

impl CurvePoint {
    pub fn affine(x: ExactRational, y: ExactRational) -> CurvePoint {
        CurvePoint::Affine { x, y }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, CurvePoint::Identity)
    }

    pub fn x(&self) -> Option<&ExactRational> {
        match self {
            CurvePoint::Identity => None,
            CurvePoint::Affine { x, .. } => Some(x),
        }
    }

    pub fn y(&self) -> Option<&ExactRational> {
        match self {
            CurvePoint::Identity => None,
            CurvePoint::Affine { y, .. } => Some(y),
        }
    }
}

impl WeierstrassCurve {
    pub fn new(a1: BigInt, a2: BigInt, a3: BigInt, a4: BigInt, a6: BigInt) -> Result<Self> {
        let b2: BigInt = &a1 * &a1 + &a2 * 4;
        let b4: BigInt = &a4 * 2 + &a1 * &a3;
        let b6: BigInt = &a3 * &a3 + &a6 * 4;
        let b8: BigInt = &a1 * &a1 * &a6 + &a2 * &a6 * 4 - &a1 * &a3 * &a4 + &a2 * &a3 * &a3
            - &a4 * &a4;
        let c4: BigInt = &b2 * &b2 - &b4 * 24;
        let c6: BigInt = -(&b2 * &b2 * &b2) + &b2 * &b4 * 36 - &b6 * 216;
        let discriminant: BigInt = -(&b2 * &b2 * &b8) - (&b4 * &b4 * &b4) * 8
            - (&b6 * &b6) * 27
            + &b2 * &b4 * &b6 * 9;
        assert_eq!(&b8 * 4, &b2 * &b6 - &b4 * &b4, "b-quantity relation violated");
        if discriminant.is_zero() {
            return Err(Error::domain("curve", "zero discriminant: the model is singular"));
        }
        Ok(WeierstrassCurve { a1, a2, a3, a4, a6, b2, b4, b6, b8, c4, c6, discriminant })
    }

    /// Coefficients in the order (a1, a2, a3, a4, a6).
    pub fn from_i64(a: [i64; 5]) -> Result<Self> {
        Self::new(
            BigInt::from(a[0]),
            BigInt::from(a[1]),
            BigInt::from(a[2]),
            BigInt::from(a[3]),
            BigInt::from(a[4]),
        )
    }

    /// Short form y^2 = x^3 + a x + b.
    pub fn short(a: i64, b: i64) -> Result<Self> {
        Self::from_i64([0, 0, 0, a, b])
    }

    pub fn j_invariant(&self) -> ExactRational {
        ExactRational::new(&self.c4 * &self.c4 * &self.c4, self.discriminant.clone())
    }

    pub fn contains(&self, point: &CurvePoint) -> bool {
        match point {
            CurvePoint::Identity => true,
            CurvePoint::Affine { x, y } => {
                let a1 = ExactRational::from_integer(self.a1.clone());
                let a2 = ExactRational::from_integer(self.a2.clone());
                let a3 = ExactRational::from_integer(self.a3.clone());
                let a4 = ExactRational::from_integer(self.a4.clone());
                let a6 = ExactRational::from_integer(self.a6.clone());
                y * y + &a1 * x * y + &a3 * y == x * x * x + &a2 * x * x + &a4 * x + &a6
            }
        }
    }

    /// The group inverse: (x, y) goes to (x, -y - a1 x - a3).
    pub fn negate(&self, point: &CurvePoint) -> CurvePoint {
        match point {
            CurvePoint::Identity => CurvePoint::Identity,
            CurvePoint::Affine { x, y } => {
                let a1 = ExactRational::from_integer(self.a1.clone());
                let a3 = ExactRational::from_integer(self.a3.clone());
                CurvePoint::affine(x.clone(), -y - a1 * x - a3)
            }
        }
    }

    /// Exact chord-tangent addition.
    pub fn add(&self, p: &CurvePoint, q: &CurvePoint) -> Result<CurvePoint> {
        if !self.contains(p) || !self.contains(q) {
            return Err(Error::NotOnCurve);
        }
        let (x1, y1) = match p {
            CurvePoint::Identity => return Ok(q.clone()),
            CurvePoint::Affine { x, y } => (x, y),
        };
        let (x2, y2) = match q {
            CurvePoint::Identity => return Ok(p.clone()),
            CurvePoint::Affine { x, y } => (x, y),
        };
        let a1 = ExactRational::from_integer(self.a1.clone());
        let a2 = ExactRational::from_integer(self.a2.clone());
        let a3 = ExactRational::from_integer(self.a3.clone());
        let a4 = ExactRational::from_integer(self.a4.clone());

        let lambda = if x1 == x2 {
            if *y2 == -y1 - &a1 * x1 - &a3 {
                return Ok(CurvePoint::Identity);
            }
            // same x and not inverse forces y1 = y2: tangent slope
            let three = ExactRational::from_integer(BigInt::from(3));
            let two = ExactRational::from_integer(BigInt::from(2));
            (three * x1 * x1 + &two * &a2 * x1 + &a4 - &a1 * y1)
                / (&two * y1 + &a1 * x1 + &a3)
        } else {
            (y2 - y1) / (x2 - x1)
        };
        let nu = y1 - &lambda * x1;
        let x3 = &lambda * &lambda + &a1 * &lambda - &a2 - x1 - x2;
        let y3 = -(&lambda + &a1) * &x3 - nu - a3;
        let sum = CurvePoint::affine(x3, y3);
        debug_assert!(self.contains(&sum));
        Ok(sum)
    }

    /// k-fold multiple by binary double-and-add; k may be negative.
    pub fn multiply(&self, point: &CurvePoint, k: i64) -> Result<CurvePoint> {
        if !self.contains(point) {
            return Err(Error::NotOnCurve);
        }
        let base = if k < 0 { self.negate(point) } else { point.clone() };
        let mut k = k.unsigned_abs();
        let mut acc = CurvePoint::Identity;
        let mut pow = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &pow)?;
            }
            k >>= 1;
            if k > 0 {
                pow = self.add(&pow, &pow)?;
            }
        }
        Ok(acc)
    }
}

/// True iff m Q is the identity for some 1 <= m <= bound. With the
/// default bound this is an unconditional rational-torsion test.
pub fn is_torsion(e: &WeierstrassCurve, q: &CurvePoint, bound: u64) -> Result<bool> {
    if !e.contains(q) {
        return Err(Error::NotOnCurve);
    }
    let mut acc = q.clone();
    for _ in 1..=bound {
        if acc.is_identity() {
            return Ok(true);
        }
        acc = e.add(&acc, q)?;
    }
    Ok(false)
}

/// The duplication iterates x(2^n Q) = theta_n = a_n / b_n^2 in lowest
/// terms with b_n > 0, for n = 1..=depth.
#[derive(Clone, Debug)]
pub struct DoublingSequence {
    pub theta: Vec<ExactRational>,
    /// Positive square roots of the theta denominators; a strong
    /// divisibility sequence: b_i | b_j for i <= j.
    pub b: Vec<BigInt>,
}

/// Repeated x-only duplication. Works on one numerator/denominator pair
/// of big integers with a single gcd per step; the rational group law is
/// never invoked.
pub fn double_iterates(e: &WeierstrassCurve, q: &CurvePoint, depth: u64) -> Result<DoublingSequence> {
    if depth > MAX_DOUBLING_DEPTH {
        return Err(Error::work_limit(
            "double_iterates",
            format!("depth {depth} exceeds {MAX_DOUBLING_DEPTH}"),
        ));
    }
    if is_torsion(e, q, TORSION_BOUND)? {
        return Err(Error::Torsion("torsion point; sequence degenerates".into()));
    }
    let x = q.x().expect("torsion test rejects the identity");
    let mut u = x.numer().clone();
    let mut w = x.denom().clone();
    let mut theta = Vec::with_capacity(depth as usize);
    let mut b = Vec::with_capacity(depth as usize);
    for _ in 0..depth {
        let u2 = &u * &u;
        let u3 = &u2 * &u;
        let w2 = &w * &w;
        let w3 = &w2 * &w;
        // x(2P) = (x^4 - b4 x^2 - 2 b6 x - b8) / (4 x^3 + b2 x^2 + 2 b4 x + b6)
        let num: BigInt =
            &u2 * &u2 - &e.b4 * &u2 * &w2 - &e.b6 * &u * &w3 * 2 - &e.b8 * &w2 * &w2;
        let den: BigInt =
            &u3 * &w * 4 + &e.b2 * &u2 * &w2 + &e.b4 * &u * &w3 * 2 + &e.b6 * &w3 * &w;
        let g = num.gcd(&den);
        u = &num / &g;
        w = &den / &g;
        if w.is_negative() {
            u = -u;
            w = -w;
        }
        let root = w.sqrt();
        if &root * &root != w {
            return Err(Error::domain("double_iterates", "x-denominator is not a perfect square"));
        }
        theta.push(ExactRational::new_raw(u.clone(), w.clone()));
        b.push(root);
    }
    Ok(DoublingSequence { theta, b })
}

/// Division-polynomial values W_n(Q) stored in integer-normalized form:
/// with x(Q) = a / s^2 in lowest terms, w_n = s^(n^2-1) W_n(Q) is an
/// integer and the w_n form a strong divisibility sequence.
#[derive(Clone, Debug)]
pub struct DivisionSequence {
    /// Positive square root of the x-denominator of the base point.
    pub s: BigInt,
    /// w_n for n = 1..=N.
    pub w_int: Vec<BigInt>,
    /// Indices n with W_n(Q) = 0; nonempty exactly when Q is torsion of
    /// some order dividing a computed index.
    pub torsion_indices: Vec<u64>,
}

impl DivisionSequence {
    pub fn len(&self) -> u64 {
        self.w_int.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.w_int.is_empty()
    }

    fn w_ref(&self, n: u64) -> &BigInt {
        assert!(n >= 1 && n <= self.len(), "index {n} out of range");
        &self.w_int[(n - 1) as usize]
    }

    /// The rational value W_n(Q) = w_n / s^(n^2-1).
    pub fn w(&self, n: u64) -> ExactRational {
        let w = self.w_ref(n).clone();
        if self.s.is_one() {
            return ExactRational::from_integer(w);
        }
        ExactRational::new(w, self.s.pow((n * n - 1) as u32))
    }

    /// q_n = |b^(n^2-1) W_n(Q)^2| = w_n^2, always a perfect square.
    pub fn q_value(&self, n: u64) -> BigUint {
        let w = self.w_ref(n);
        (w * w).magnitude().clone()
    }

    /// u_m = |w_(2^m)|, so that u_m^2 = q_(2^m).
    pub fn u_value(&self, m: u32) -> BigUint {
        self.w_ref(1u64 << m).magnitude().clone()
    }

    /// ln|W_n(Q)|; negative infinity when W_n(Q) = 0.
    pub fn log_abs_w(&self, n: u64) -> f64 {
        let w = self.w_ref(n);
        if w.is_zero() {
            return f64::NEG_INFINITY;
        }
        places::ln_abs_bigint(w) - ((n * n - 1) as f64) * places::ln_abs_bigint(&self.s)
    }

    /// p-adic valuation of W_n(Q); errors when W_n(Q) = 0.
    pub fn w_valuation(&self, n: u64, p: u64) -> Result<i64> {
        let w = self.w_ref(n);
        if w.is_zero() {
            return Err(Error::domain("division sequence", format!("W_{n} vanishes")));
        }
        let vw = places::biguint_valuation(w.magnitude(), p) as i64;
        let vs = if self.s.is_one() {
            0
        } else {
            places::biguint_valuation(self.s.magnitude(), p) as i64
        };
        Ok(vw - ((n * n - 1) as i64) * vs)
    }
}

fn exact_bigint(q: &ExactRational, context: &'static str) -> Result<BigInt> {
    if q.denom().is_one() {
        Ok(q.numer().clone())
    } else {
        Err(Error::domain(context, format!("expected an integer, got {q}")))
    }
}

/// Values W_1..W_N by the standard duplication recurrences from the four
/// seed polynomials, carried on the integer normalization throughout.
/// A vanishing W_n signals n-torsion and is recorded, not an error.
pub fn division_poly_values(e: &WeierstrassCurve, q: &CurvePoint, n_max: u64) -> Result<DivisionSequence> {
    if q.is_identity() {
        return Err(Error::IdentityPoint);
    }
    if !e.contains(q) {
        return Err(Error::NotOnCurve);
    }
    if n_max == 0 {
        return Err(Error::domain("division_poly_values", "need at least one index"));
    }
    if n_max > MAX_DIVISION_INDEX {
        return Err(Error::work_limit(
            "division_poly_values",
            format!("index {n_max} exceeds {MAX_DIVISION_INDEX}"),
        ));
    }
    let x = q.x().expect("affine");
    let y = q.y().expect("affine");
    let s = x.denom().sqrt();
    if &s * &s != *x.denom() {
        return Err(Error::domain("division_poly_values", "x-denominator is not a perfect square"));
    }

    let b2 = ExactRational::from_integer(e.b2.clone());
    let b4 = ExactRational::from_integer(e.b4.clone());
    let b6 = ExactRational::from_integer(e.b6.clone());
    let b8 = ExactRational::from_integer(e.b8.clone());
    let a1 = ExactRational::from_integer(e.a1.clone());
    let a3 = ExactRational::from_integer(e.a3.clone());

    let x2 = x * x;
    let x3 = &x2 * x;
    let x4 = &x2 * &x2;
    // seed polynomials in (x, y)
    let w2_rat = ExactRational::from_integer(BigInt::from(2)) * y + &a1 * x + &a3;
    let w3_rat = ExactRational::from_integer(BigInt::from(3)) * &x4
        + &b2 * &x3
        + ExactRational::from_integer(BigInt::from(3)) * &b4 * &x2
        + ExactRational::from_integer(BigInt::from(3)) * &b6 * x
        + &b8;
    let w4_rat = &w2_rat
        * (ExactRational::from_integer(BigInt::from(2)) * &x4 * &x2
            + &b2 * &x4 * x
            + ExactRational::from_integer(BigInt::from(5)) * &b4 * &x4
            + ExactRational::from_integer(BigInt::from(10)) * &b6 * &x3
            + ExactRational::from_integer(BigInt::from(10)) * &b8 * &x2
            + (&b2 * &b8 - &b4 * &b6) * x
            + (&b4 * &b8 - &b6 * &b6));

    // integer normalization: w_n = s^(n^2-1) W_n is integral for points
    // on an integral model
    let s_rat = ExactRational::from_integer(s.clone());
    let s3 = &s_rat * &s_rat * &s_rat;
    let s8 = {
        let s4 = &s3 * &s_rat;
        &s4 * &s4
    };
    let s15 = &s8 * &s3 * &s3 * &s_rat;
    // internal table with a w_0 = 0 sentinel so recurrences index freely
    let mut w: Vec<BigInt> = Vec::with_capacity((n_max + 1) as usize);
    w.push(BigInt::zero());
    w.push(BigInt::one());
    if n_max >= 2 {
        w.push(exact_bigint(&(&w2_rat * &s3), "division_poly_values")?);
    }
    if n_max >= 3 {
        w.push(exact_bigint(&(&w3_rat * &s8), "division_poly_values")?);
    }
    if n_max >= 4 {
        w.push(exact_bigint(&(&w4_rat * &s15), "division_poly_values")?);
    }
    for n in 5..=n_max {
        let n = n as usize;
        let next = if n % 2 == 1 {
            // w_(2m+1) = w_(m+2) w_m^3 - w_(m-1) w_(m+1)^3
            let m = (n - 1) / 2;
            &w[m + 2] * (&w[m] * &w[m] * &w[m]) - &w[m - 1] * (&w[m + 1] * &w[m + 1] * &w[m + 1])
        } else {
            // w_2 w_(2m) = w_m (w_(m+2) w_(m-1)^2 - w_(m-2) w_(m+1)^2)
            let m = n / 2;
            if w[2].is_zero() {
                // 2-torsion: every even-index value vanishes
                BigInt::zero()
            } else {
                let t = &w[m]
                    * (&w[m + 2] * (&w[m - 1] * &w[m - 1]) - &w[m - 2] * (&w[m + 1] * &w[m + 1]));
                let (quot, rem) = t.div_rem(&w[2]);
                assert!(rem.is_zero(), "even recurrence division must be exact");
                quot
            }
        };
        w.push(next);
    }
    let w_int: Vec<BigInt> = w.into_iter().skip(1).collect();
    let torsion_indices = w_int
        .iter()
        .enumerate()
        .filter_map(|(i, v)| if v.is_zero() { Some(i as u64 + 1) } else { None })
        .collect();
    Ok(DivisionSequence { s, w_int, torsion_indices })
}

/// The integer sequences derived from division-polynomial values.
#[derive(Clone, Debug)]
pub struct EdsSequences {
    pub division: DivisionSequence,
    /// q_n = w_n^2 for n = 1..=N.
    pub q_seq: Vec<BigUint>,
    /// u_m = |w_(2^m)| for 1 <= m <= floor(log2 N).
    pub u_seq: Vec<BigUint>,
}

pub fn eds_sequences(e: &WeierstrassCurve, q: &CurvePoint, n_max: u64) -> Result<EdsSequences> {
    let division = division_poly_values(e, q, n_max)?;
    let q_seq = (1..=n_max).map(|n| division.q_value(n)).collect();
    let mut u_seq = Vec::new();
    let mut m = 1u32;
    while (1u64 << m) <= n_max {
        u_seq.push(division.u_value(m));
        m += 1;
    }
    Ok(EdsSequences { division, q_seq, u_seq })
}

/// Reduction type of the curve at a prime, for the model as given.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveReduction {
    Good,
    MultiplicativeSplit,
    MultiplicativeNonsplit,
    Additive,
}

impl CurveReduction {
    pub fn label(&self) -> &'static str {
        match self {
            CurveReduction::Good => "good",
            CurveReduction::MultiplicativeSplit => "multiplicative-split",
            CurveReduction::MultiplicativeNonsplit => "multiplicative-nonsplit",
            CurveReduction::Additive => "additive",
        }
    }
}

/// Whether the reduced point avoids the singular point of the reduced
/// curve. Points reducing to the identity are always nonsingular.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointStatus {
    Nonsingular,
    Singular,
}

#[derive(Clone, Debug)]
pub struct ReductionInfo {
    pub p: u64,
    pub curve_type: CurveReduction,
    pub point_status: PointStatus,
    /// Set at p = 2, 3 in the additive case, where the unminimalized
    /// classification depends on the chosen model.
    pub model_sensitive: bool,
}

fn red_mod(v: &BigInt, p: u64) -> u64 {
    v.mod_floor(&BigInt::from(p)).to_u64().expect("residue below p")
}

fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    places::pow_mod(a, p - 2, p)
}

/// Singular point (x0, y0) of the reduced curve mod p, where one exists.
fn singular_point_mod_p(e: &WeierstrassCurve, p: u64, multiplicative: bool) -> (u64, u64) {
    if p >= 5 {
        // complete the square and cube: the singular xi satisfies
        // 3 xi^2 = c4 / 48, giving xi = -c6/(12 c4) at a node and 0 at a cusp
        let xi = if multiplicative {
            let c4 = red_mod(&e.c4, p);
            let c6 = red_mod(&e.c6, p);
            let denom_inv = inv_mod(places::mul_mod(12 % p, c4, p), p);
            places::mul_mod(p - c6 % p, denom_inv, p).wrapping_rem(p)
        } else {
            0
        };
        let b2 = red_mod(&e.b2, p);
        let x0 = (xi + p - places::mul_mod(b2, inv_mod(12 % p, p), p)) % p;
        let a1 = red_mod(&e.a1, p);
        let a3 = red_mod(&e.a3, p);
        let y0 = places::mul_mod(
            (2 * p - places::mul_mod(a1, x0, p) - a3) % p,
            inv_mod(2, p),
            p,
        );
        return (x0, y0);
    }
    // p = 2, 3: scan the finitely many residue pairs
    for x in 0..p {
        for y in 0..p {
            if curve_eq_mod(e, x, y, p) == 0 && partials_vanish(e, x, y, p) {
                return (x, y);
            }
        }
    }
    unreachable!("singular reduction must expose a rational singular point");
}

fn curve_eq_mod(e: &WeierstrassCurve, x: u64, y: u64, p: u64) -> u64 {
    let a1 = red_mod(&e.a1, p);
    let a2 = red_mod(&e.a2, p);
    let a3 = red_mod(&e.a3, p);
    let a4 = red_mod(&e.a4, p);
    let a6 = red_mod(&e.a6, p);
    let m = |a, b| places::mul_mod(a, b, p);
    let lhs = (m(y, y) + m(m(a1, x), y) + m(a3, y)) % p;
    let rhs = (m(m(x, x), x) + m(m(a2, x), x) + m(a4, x) + a6) % p;
    (lhs + p - rhs) % p
}

fn partials_vanish(e: &WeierstrassCurve, x: u64, y: u64, p: u64) -> bool {
    let a1 = red_mod(&e.a1, p);
    let a2 = red_mod(&e.a2, p);
    let a3 = red_mod(&e.a3, p);
    let a4 = red_mod(&e.a4, p);
    let m = |a, b| places::mul_mod(a, b, p);
    // d/dy: 2y + a1 x + a3
    let fy = (2 * y % p + m(a1, x) + a3) % p;
    // d/dx: a1 y - 3x^2 - 2 a2 x - a4
    let fx = (m(a1, y) + 5 * p - 3 * m(x, x) % p - 2 * m(a2, x) % p - a4) % p;
    fy == 0 && fx == 0
}

/// Split test at a node (x0, y0): the tangent slopes satisfy
/// t^2 + a1 t - (3 x0 + a2) = 0, and the type is split exactly when the
/// roots lie in the prime field.
fn node_is_split(e: &WeierstrassCurve, x0: u64, p: u64) -> bool {
    let a1 = red_mod(&e.a1, p);
    let a2 = red_mod(&e.a2, p);
    let c = (3 * places::mul_mod(1, x0, p) % p + a2) % p;
    if p == 2 {
        // count distinct roots over {0, 1}
        let f = |t: u64| (t * t % 2 + a1 * t % 2 + 2 - c) % 2;
        return f(0) == 0 && f(1) == 0;
    }
    let disc = (places::mul_mod(a1, a1, p) + 4 * c % p) % p;
    debug_assert!(disc != 0, "node tangents are always distinct");
    places::pow_mod(disc, (p - 1) / 2, p) == 1
}

/// Classifies the reduction of the given model at p and locates the point
/// relative to the singular locus. The model is used as-is.
pub fn reduction_analysis(e: &WeierstrassCurve, q: &CurvePoint, p: u64) -> Result<ReductionInfo> {
    if !places::is_prime(p) {
        return Err(Error::domain("reduction_analysis", format!("{p} is not prime")));
    }
    if !e.contains(q) {
        return Err(Error::NotOnCurve);
    }
    let v_disc = places::biguint_valuation(e.discriminant.magnitude(), p);
    let curve_type = if v_disc == 0 {
        CurveReduction::Good
    } else if places::biguint_valuation(e.c4.magnitude(), p) == 0 {
        let (x0, _) = singular_point_mod_p(e, p, true);
        if node_is_split(e, x0, p) {
            CurveReduction::MultiplicativeSplit
        } else {
            CurveReduction::MultiplicativeNonsplit
        }
    } else {
        CurveReduction::Additive
    };
    let model_sensitive = curve_type == CurveReduction::Additive && (p == 2 || p == 3);

    let point_status = match q {
        CurvePoint::Identity => PointStatus::Nonsingular,
        _ if curve_type == CurveReduction::Good => PointStatus::Nonsingular,
        CurvePoint::Affine { x, y } => {
            if places::biguint_valuation(x.denom().magnitude(), p) > 0 {
                // reduces to the identity, away from the affine singular point
                PointStatus::Nonsingular
            } else {
                let xr = places::mul_mod(
                    red_mod(x.numer(), p),
                    inv_mod(red_mod(x.denom(), p), p),
                    p,
                );
                let yr = places::mul_mod(
                    red_mod(y.numer(), p),
                    inv_mod(red_mod(y.denom(), p), p),
                    p,
                );
                if partials_vanish(e, xr, yr, p) {
                    PointStatus::Singular
                } else {
                    PointStatus::Nonsingular
                }
            }
        }
    };
    Ok(ReductionInfo { p, curve_type, point_status, model_sensitive })
}

/// Primes where the point lands on the singular locus of the reduced
/// model; always a subset of the primes dividing the discriminant.
pub fn singular_reduction_primes(e: &WeierstrassCurve, q: &CurvePoint) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for (p, _) in places::factor_biguint(e.discriminant.magnitude())? {
        let info = reduction_analysis(e, q, p)?;
        if info.point_status == PointStatus::Singular {
            out.push(p);
        }
    }
    Ok(out)
}
