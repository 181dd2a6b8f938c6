//! Archimedean morphic heights through periodic points.
//!
//! For a polynomial f of degree d >= 2, the period-n points are the roots
//! of F_n(z) = f^n(z) - z, and factoring F_n gives
//!
//!   (1/d^n) log|f^n(q) - q| = (1/d^n) [ log B_n + sum_i log|q - x_i| ]
//!
//! with B_n the leading coefficient of F_n. Both sides converge to the
//! archimedean local morphic height of q, the left through the orbit and
//! the right as a discrete integral of log|q - w| against the measure
//! equidistributed on periodic points, which converges to the equilibrium
//! measure of the Julia set. The Chebyshev-like map 2z^2 - 1 has Julia set
//! [-1, 1] with the arcsine measure, giving two more closed forms to test
//! against.
//!
//! Coefficients of f^n and values of F_n overflow f64 long before the
//! degree guard, so all polynomial arithmetic runs on complex mantissas
//! with an explicit power-of-two exponent.

use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::morphic::{PolyMap, MAX_ORBIT_BITS};
use crate::places::{self, ExactRational, Place};

/// Composed degree cap: d^level may not exceed this.
pub const MAX_COMPOSED_DEGREE: u64 = 1 << 14;

/// Aberth sweeps before giving up.
pub const MAX_SWEEPS: u32 = 3000;

/// Complex number (re + i im) * 2^e with mantissa kept near unit size,
/// so products and million-term Horner sums never leave f64 range.
#[derive(Clone, Copy, Debug)]
pub struct ScaledComplex {
    pub re: f64,
    pub im: f64,
    pub e: i64,
}

const RENORM_HI: f64 = 1e150;
const RENORM_LO: f64 = 1e-150;

impl ScaledComplex {
    pub fn zero() -> ScaledComplex {
        ScaledComplex { re: 0.0, im: 0.0, e: 0 }
    }

    pub fn one() -> ScaledComplex {
        ScaledComplex { re: 1.0, im: 0.0, e: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    pub fn from_complex(c: Complex64) -> ScaledComplex {
        ScaledComplex { re: c.re, im: c.im, e: 0 }.renormed()
    }

    pub fn from_rational(q: &ExactRational) -> ScaledComplex {
        // split into mantissa and exponent exactly, avoiding f64 overflow
        // for huge integers
        let ln = places::log_abs(q, Place::Infinity).unwrap_or(f64::NEG_INFINITY);
        if ln == f64::NEG_INFINITY {
            return ScaledComplex::zero();
        }
        let e = (ln / std::f64::consts::LN_2).floor() as i64;
        let mantissa = (ln - (e as f64) * std::f64::consts::LN_2).exp();
        let sign = if q.is_negative() { -1.0 } else { 1.0 };
        ScaledComplex { re: sign * mantissa, im: 0.0, e }.renormed()
    }

    fn renormed(mut self) -> ScaledComplex {
        let m = self.re.abs().max(self.im.abs());
        if m == 0.0 {
            self.e = 0;
            return self;
        }
        if m >= RENORM_HI {
            let k = (m.log2().floor() as i64) - 8;
            let s = (-(k as f64)).exp2();
            self.re *= s;
            self.im *= s;
            self.e += k;
        } else if m <= RENORM_LO {
            let k = (m.log2().floor() as i64) + 8;
            let s = (-(k as f64)).exp2();
            self.re *= s;
            self.im *= s;
            self.e += k;
        }
        self
    }

    pub fn mul(&self, o: &ScaledComplex) -> ScaledComplex {
        ScaledComplex {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
            e: self.e + o.e,
        }
        .renormed()
    }

    pub fn add(&self, o: &ScaledComplex) -> ScaledComplex {
        if self.is_zero() {
            return *o;
        }
        if o.is_zero() {
            return *self;
        }
        let d = self.e - o.e;
        if d > 120 {
            return *self;
        }
        if d < -120 {
            return *o;
        }
        // align the smaller exponent; the shift stays well inside range
        if d >= 0 {
            let s = (d as f64).exp2();
            ScaledComplex {
                re: self.re * s + o.re,
                im: self.im * s + o.im,
                e: o.e,
            }
            .renormed()
        } else {
            let s = (-d as f64).exp2();
            ScaledComplex {
                re: self.re + o.re * s,
                im: self.im + o.im * s,
                e: self.e,
            }
            .renormed()
        }
    }

    pub fn neg(&self) -> ScaledComplex {
        ScaledComplex { re: -self.re, im: -self.im, e: self.e }
    }

    /// Quotient as an ordinary complex number; None when the divisor is
    /// zero or the quotient leaves f64 range.
    pub fn div_to_complex(&self, o: &ScaledComplex) -> Option<Complex64> {
        if o.is_zero() {
            return None;
        }
        let n2 = o.re * o.re + o.im * o.im;
        let re = (self.re * o.re + self.im * o.im) / n2;
        let im = (self.im * o.re - self.re * o.im) / n2;
        let e = self.e - o.e;
        if e.abs() > 1000 {
            return if e < 0 { Some(Complex64::new(0.0, 0.0)) } else { None };
        }
        let s = (e as f64).exp2();
        let out = Complex64::new(re * s, im * s);
        out.is_finite().then_some(out)
    }

    /// ln of the modulus.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.re.hypot(self.im).ln() + (self.e as f64) * std::f64::consts::LN_2
    }
}

/// Coefficients of f composed with itself `level` times, descending
/// degree order. Guarded by MAX_COMPOSED_DEGREE.
pub fn compose_self(f: &PolyMap, level: u32) -> Result<Vec<ScaledComplex>> {
    if level == 0 {
        return Err(Error::domain("compose_self", "level must be positive"));
    }
    let out_degree = f
        .degree()
        .checked_pow(level)
        .filter(|&d| d <= MAX_COMPOSED_DEGREE)
        .ok_or_else(|| {
            Error::work_limit(
                "compose_self",
                format!("degree {}^{level} exceeds {MAX_COMPOSED_DEGREE}", f.degree()),
            )
        })?;
    let base: Vec<ScaledComplex> =
        f.coefficients().iter().map(ScaledComplex::from_rational).collect();
    let mut current = base.clone();
    for _ in 1..level {
        // f(g): Horner in polynomial arithmetic, acc = acc * g + c
        let mut acc = vec![base[0]];
        for c in &base[1..] {
            acc = poly_mul(&acc, &current);
            let last = acc.len() - 1;
            acc[last] = acc[last].add(c);
        }
        current = acc;
    }
    debug_assert_eq!(current.len() as u64, out_degree + 1);
    if current.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::domain("compose_self", "coefficient overflow"));
    }
    Ok(current)
}

fn poly_mul(a: &[ScaledComplex], b: &[ScaledComplex]) -> Vec<ScaledComplex> {
    let n = a.len() + b.len() - 1;
    let convolve = |k: usize| {
        let lo = (k + 1).saturating_sub(b.len());
        let hi = k.min(a.len() - 1);
        let mut s = ScaledComplex::zero();
        for i in lo..=hi {
            s = s.add(&a[i].mul(&b[k - i]));
        }
        s
    };
    if n >= 2048 {
        (0..n).into_par_iter().map(convolve).collect()
    } else {
        (0..n).map(convolve).collect()
    }
}

fn poly_derivative(p: &[ScaledComplex]) -> Vec<ScaledComplex> {
    let deg = p.len() - 1;
    (0..deg)
        .map(|i| {
            let k = ScaledComplex { re: (deg - i) as f64, im: 0.0, e: 0 }.renormed();
            p[i].mul(&k)
        })
        .collect()
}

fn poly_eval(p: &[ScaledComplex], z: &ScaledComplex) -> ScaledComplex {
    let mut acc = p[0];
    for c in &p[1..] {
        acc = acc.mul(z).add(c);
    }
    acc
}

/// Radius beyond which |f(z)| > |z|, so no periodic point of any level
/// lives outside: for |z| >= max(1, (1 + sum of lower |c_i|) / |c_d|),
/// |f(z)| >= |z|^(d-1) (|c_d||z| - sum |c_i|) > |z|.
fn escape_radius(f: &PolyMap) -> f64 {
    let abs = |c: &ExactRational| {
        places::log_abs(c, Place::Infinity).map_or(0.0, f64::exp)
    };
    let lead = abs(&f.coefficients()[0]);
    let lower: f64 = f.coefficients()[1..].iter().map(abs).sum();
    ((1.0 + lower) / lead).max(1.0)
}

/// Roots of f^level(z) - z: all points of period dividing `level`.
#[derive(Clone, Debug)]
pub struct PeriodicPointSet {
    pub level: u32,
    pub degree: u64,
    pub points: Vec<Complex64>,
    /// Final Newton-step size per point.
    pub residuals: Vec<f64>,
    pub sweeps: u32,
    pub converged: bool,
}

/// F(z) = f^level(z) - z and its derivative, evaluated by iterating the
/// base map with the chain rule. Never expands f^level in coefficient
/// form: the expanded coefficients are astronomically larger than values
/// on the Julia set, and the cancellation would drown the Newton steps;
/// iterated evaluation keeps the step noise near machine precision.
fn eval_periodic(
    base: &[ScaledComplex],
    dbase: &[ScaledComplex],
    level: u32,
    zs: &ScaledComplex,
) -> (ScaledComplex, ScaledComplex) {
    let mut val = *zs;
    let mut der = ScaledComplex::one();
    for _ in 0..level {
        der = der.mul(&poly_eval(dbase, &val));
        val = poly_eval(base, &val);
    }
    (val.add(&zs.neg()), der.add(&ScaledComplex::one().neg()))
}

/// One full Aberth-Ehrlich run (Jacobi sweeps) at a fixed composition
/// level from the given seeds. Returns the refined points, final step
/// sizes, sweeps used, and whether every point froze.
fn aberth(
    base: &[ScaledComplex],
    dbase: &[ScaledComplex],
    level: u32,
    mut points: Vec<Complex64>,
    tol: f64,
) -> (Vec<Complex64>, Vec<f64>, u32, bool) {
    let count = points.len();
    let mut residuals: Vec<f64> = vec![f64::INFINITY; count];
    let mut frozen: Vec<bool> = vec![false; count];
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let snapshot = points.clone();
        let updates: Vec<(Complex64, f64, bool)> = (0..count)
            .into_par_iter()
            .map(|i| {
                if frozen[i] {
                    return (snapshot[i], residuals[i], true);
                }
                let z = snapshot[i];
                let zs = ScaledComplex::from_complex(z);
                let (fv, dv) = eval_periodic(base, dbase, level, &zs);
                if fv.is_zero() {
                    return (z, 0.0, true);
                }
                let w = match fv.div_to_complex(&dv) {
                    Some(w) => w,
                    // critical-point collision: nudge and retry next sweep
                    None => return (z * 1.000_000_1 + Complex64::new(1e-9, 1e-9), f64::INFINITY, false),
                };
                let mut repulsion = Complex64::new(0.0, 0.0);
                for (j, other) in snapshot.iter().enumerate() {
                    if j != i {
                        let d = z - other;
                        if d.norm_sqr() > 0.0 {
                            repulsion += d.inv();
                        }
                    }
                }
                let denom = Complex64::new(1.0, 0.0) - w * repulsion;
                let step = if denom.norm_sqr() > 1e-30 { w / denom } else { w };
                let next = z - step;
                let size = step.norm();
                (next, size, size <= tol * (1.0 + next.norm()))
            })
            .collect();
        for (i, (z, r, done)) in updates.into_iter().enumerate() {
            points[i] = z;
            residuals[i] = r;
            frozen[i] = done;
        }
        if frozen.iter().all(|&d| d) {
            converged = true;
            break;
        }
    }
    (points, residuals, sweeps, converged)
}

// irrational angular step breaks the symmetry of the root set
const GOLDEN_FRACTION: f64 = 0.381_966_011_250_105_1;

/// Simultaneous root refinement, warm-started level by level. Periodic
/// points of every level accumulate near the same invariant set, so the
/// converged level-(L-1) points, each split into d jittered children,
/// seed level L already next to its roots; cold circle seeds would have
/// to migrate across the plane collectively, which costs hundreds of
/// sweeps once the roots cluster.
pub fn periodic_points(f: &PolyMap, level: u32, tol: f64) -> Result<PeriodicPointSet> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::domain("periodic_points", "tolerance must lie in (0, 1)"));
    }
    if level == 0 {
        return Err(Error::domain("periodic_points", "level must be positive"));
    }
    let d = f.degree() as usize;
    let degree = f
        .degree()
        .checked_pow(level)
        .filter(|&d| d <= MAX_COMPOSED_DEGREE)
        .ok_or_else(|| {
            Error::work_limit(
                "periodic_points",
                format!("degree {}^{level} exceeds {MAX_COMPOSED_DEGREE}", f.degree()),
            )
        })? as usize;
    let base: Vec<ScaledComplex> =
        f.coefficients().iter().map(ScaledComplex::from_rational).collect();
    let dbase = poly_derivative(&base);
    let radius = escape_radius(f) * 1.1;
    let circle = |count: usize| -> Vec<Complex64> {
        (0..count)
            .map(|k| {
                let theta = std::f64::consts::TAU * ((k as f64 * GOLDEN_FRACTION).fract());
                Complex64::new(radius * theta.cos(), radius * theta.sin())
            })
            .collect()
    };
    let mut points = circle(d);
    let mut residuals = Vec::new();
    let mut total_sweeps = 0;
    let mut converged = false;
    for lv in 1..=level {
        if lv > 1 {
            let mut seeds = Vec::with_capacity(points.len() * d);
            for (i, p) in points.iter().enumerate() {
                let spread = 1e-3 * (1.0 + p.norm());
                for k in 0..d {
                    let angle = std::f64::consts::TAU
                        * (k as f64 / d as f64 + GOLDEN_FRACTION * i as f64).fract();
                    seeds.push(p + Complex64::new(spread * angle.cos(), spread * angle.sin()));
                }
            }
            points = seeds;
        }
        let run = aberth(&base, &dbase, lv, points, tol);
        points = run.0;
        residuals = run.1;
        total_sweeps += run.2;
        converged = run.3;
        // a cold restart would not do better than these warm points, so
        // carry them forward even when a level exhausts its sweep budget
    }
    Ok(PeriodicPointSet {
        level,
        degree: degree as u64,
        points,
        residuals,
        sweeps: total_sweeps,
        converged,
    })
}

/// The two evaluations of the archimedean local morphic height at level n.
#[derive(Clone, Debug)]
pub struct JuliaHeightReport {
    pub level: u32,
    pub degree: u64,
    /// (1/d^n) [ log B_n + sum over periodic points of log|q - x_i| ].
    pub root_sum: f64,
    /// (1/d^n) log|f^n(q) - q| from the exact orbit.
    pub direct: f64,
    pub residual_max: f64,
    /// Points dropped by the principal-value exclusion window around q.
    pub excluded: usize,
    pub converged: bool,
}

/// log B_n: the leading coefficient of f^n is a^(1 + d + ... + d^(n-1)).
fn log_leading(f: &PolyMap, level: u32) -> f64 {
    let d = f.degree() as f64;
    let exponent = (d.powi(level as i32) - 1.0) / (d - 1.0);
    let a = &f.coefficients()[0];
    exponent * places::log_abs(a, Place::Infinity).expect("leading coefficient is nonzero")
}

/// Archimedean local morphic height of q computed through the period-n
/// points and checked against the direct orbit logarithm.
pub fn julia_local_height(
    f: &PolyMap,
    q: &ExactRational,
    level: u32,
    tol: f64,
) -> Result<JuliaHeightReport> {
    let set = periodic_points(f, level, tol)?;
    let dn = (f.degree() as f64).powi(level as i32);

    // exact orbit for the direct logarithm
    let mut x = q.clone();
    for _ in 0..level {
        if x.numer().bits() + x.denom().bits() > MAX_ORBIT_BITS {
            return Err(Error::work_limit("julia_local_height", "orbit exceeded the bit guard"));
        }
        x = f.eval(&x);
    }
    let diff = &x - q;
    if diff.is_zero() {
        return Err(Error::domain(
            "julia_local_height",
            "q is a periodic point at this level; the direct logarithm diverges",
        ));
    }
    let direct = places::log_abs(&diff, Place::Infinity)? / dn;

    let qf = q.to_f64().filter(|v| v.is_finite()).unwrap_or_else(|| {
        let sign = if q.is_negative() { -1.0 } else { 1.0 };
        sign * places::log_abs(q, Place::Infinity).map_or(0.0, f64::exp)
    });
    let qc = Complex64::new(qf, 0.0);
    let window = f64::EPSILON.sqrt() * (1.0 + qc.norm());
    let mut sum = 0.0;
    let mut excluded = 0;
    for x in &set.points {
        let dist = (qc - x).norm();
        if dist < window {
            excluded += 1;
        } else {
            sum += dist.ln();
        }
    }
    let root_sum = (sum + log_leading(f, level)) / dn;
    let residual_max = set.residuals.iter().cloned().fold(0.0, f64::max);
    Ok(JuliaHeightReport {
        level,
        degree: set.degree,
        root_sum,
        direct,
        residual_max,
        excluded,
        converged: set.converged,
    })
}

/// Closed form for the map 2z^2 - 1: the height is the Green's function
/// of [-1, 1], namely log of the larger of |q +- sqrt(q^2 - 1)|, zero
/// exactly on the segment.
pub fn chebyshev_closed_form(q: Complex64) -> f64 {
    let s = (q * q - Complex64::new(1.0, 0.0)).sqrt();
    let big = (q + s).norm().max((q - s).norm());
    big.ln().max(0.0)
}

/// Discrete logarithmic potential of the arcsine measure on [-1, 1]:
/// (1/K) sum_j log|cos(2 pi j / K) - q|. Exceeds the closed form by
/// exactly -log 2 (the capacity of the segment) in the limit.
pub fn arcsine_integral(q: Complex64, panels: u32) -> Result<f64> {
    if panels < 16 {
        return Err(Error::domain("arcsine_integral", "need at least 16 panels"));
    }
    if q.im == 0.0 && q.re.abs() <= 1.0 {
        return Err(Error::domain(
            "arcsine_integral",
            "logarithmic singularity on the segment",
        ));
    }
    let k = panels as f64;
    let mut sum = 0.0;
    for j in 0..panels {
        let w = (std::f64::consts::TAU * j as f64 / k).cos();
        sum += (Complex64::new(w, 0.0) - q).norm().ln();
    }
    Ok(sum / k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> ExactRational {
        ExactRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn chebyshev() -> PolyMap {
        PolyMap::from_i64(&[2, 0, -1]).unwrap()
    }

    #[test]
    fn scaled_arithmetic_survives_huge_magnitudes() {
        // (3 * 2^400)^2 = 9 * 2^800, far beyond f64
        let a = ScaledComplex { re: 3.0, im: 0.0, e: 400 };
        let sq = a.mul(&a);
        let expect = 9f64.ln() + 800.0 * std::f64::consts::LN_2;
        assert!((sq.ln_abs() - expect).abs() < 1e-9);
        // adding a tiny term leaves the big one intact
        let sum = sq.add(&ScaledComplex { re: 1.0, im: 0.0, e: -900 });
        assert!((sum.ln_abs() - expect).abs() < 1e-9);
        // exact cancellation
        let z = a.add(&a.neg());
        assert!(z.is_zero());
        assert_eq!(z.ln_abs(), f64::NEG_INFINITY);
    }

    #[test]
    fn composition_squares_the_chebyshev_tower() {
        // f^(n+1)(0) follows the cosine doubling orbit: f^n(cos t) = cos(2^n t)
        let f = chebyshev();
        let c = compose_self(&f, 5).unwrap();
        assert_eq!(c.len(), 33);
        // leading coefficient 2^31
        assert!((c[0].ln_abs() - 31.0 * 2f64.ln()).abs() < 1e-9);
        // evaluate at cos(1): expect cos(32)
        let z = ScaledComplex::from_complex(Complex64::new(1f64.cos(), 0.0));
        let v = poly_eval(&c, &z);
        assert!((v.ln_abs() - 32f64.cos().abs().ln()).abs() < 1e-6);
    }

    #[test]
    fn composed_degree_guard_trips() {
        let f = chebyshev();
        assert!(compose_self(&f, 14).is_ok());
        assert!(compose_self(&f, 15).is_err());
        let cubic = PolyMap::from_i64(&[1, 0, 0, 0]).unwrap();
        assert!(compose_self(&cubic, 9).is_err());
    }

    #[test]
    fn quartic_fixed_points() {
        // z^4 - z = z (z^3 - 1): fixed points 0, 1, omega, conj(omega)
        let f = PolyMap::from_i64(&[1, 0, 0, 0, 0]).unwrap();
        let set = periodic_points(&f, 1, 1e-12).unwrap();
        assert!(set.converged);
        assert_eq!(set.points.len(), 4);
        let mut expected = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(-0.5, 0.75f64.sqrt()),
            Complex64::new(-0.5, -0.75f64.sqrt()),
        ];
        for p in &set.points {
            let (best, dist) = expected
                .iter()
                .enumerate()
                .map(|(i, e)| (i, (p - e).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(dist < 1e-9, "{p} not matched, nearest {dist}");
            expected.remove(best);
        }
    }

    #[test]
    fn chebyshev_level_one_fixed_points() {
        // 2z^2 - z - 1 = (2z + 1)(z - 1)
        let set = periodic_points(&chebyshev(), 1, 1e-12).unwrap();
        let mut xs: Vec<f64> = set.points.iter().map(|p| p.re).collect();
        xs.sort_by(f64::total_cmp);
        assert!((xs[0] + 0.5).abs() < 1e-10);
        assert!((xs[1] - 1.0).abs() < 1e-10);
        assert!(set.points.iter().all(|p| p.im.abs() < 1e-10));
    }

    #[test]
    fn deep_level_points_stay_on_the_segment() {
        // the Julia set of 2z^2 - 1 is [-1, 1]
        let set = periodic_points(&chebyshev(), 8, 1e-10).unwrap();
        assert!(set.converged, "sweeps {}", set.sweeps);
        assert_eq!(set.degree, 256);
        for p in &set.points {
            assert!(p.im.abs() < 1e-6, "imaginary part {}", p.im);
            assert!(p.re.abs() < 1.0 + 1e-6, "escaped the segment: {}", p.re);
        }
        let rmax = set.residuals.iter().cloned().fold(0.0, f64::max);
        assert!(rmax < 1e-8, "residual {rmax}");
    }

    #[test]
    fn chebyshev_height_against_closed_form() {
        // lambda(2) = log(2 + sqrt 3); level 9 carries an O(1/2^9) tail
        let report = julia_local_height(&chebyshev(), &rat(2, 1), 9, 1e-12).unwrap();
        assert!(report.converged);
        assert_eq!(report.excluded, 0);
        let closed = chebyshev_closed_form(Complex64::new(2.0, 0.0));
        assert!((closed - (2.0 + 3f64.sqrt()).ln()).abs() < 1e-12);
        assert!(
            (report.root_sum - closed).abs() < 5e-3,
            "root sum {} vs {closed}",
            report.root_sum
        );
        // the two evaluations factor the same polynomial value
        assert!(
            (report.root_sum - report.direct).abs() < 1e-6,
            "{} vs {}",
            report.root_sum,
            report.direct
        );
    }

    #[test]
    fn squaring_map_height_is_log_q() {
        let f = PolyMap::from_i64(&[1, 0, 0]).unwrap();
        let report = julia_local_height(&f, &rat(3, 1), 10, 1e-12).unwrap();
        assert!(
            (report.root_sum - 3f64.ln()).abs() < 1e-2,
            "root sum {}",
            report.root_sum
        );
        assert!((report.direct - 3f64.ln()).abs() < 1e-2);
    }

    #[test]
    fn closed_form_is_log_two_plus_arcsine_potential() {
        for q in [
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(1.5, 0.5),
            Complex64::new(-3.0, 0.25),
        ] {
            let closed = chebyshev_closed_form(q);
            let potential = arcsine_integral(q, 1 << 14).unwrap();
            assert!(
                (closed - (2f64.ln() + potential)).abs() < 1e-6,
                "q = {q}: {closed} vs {}",
                2f64.ln() + potential
            );
        }
    }

    #[test]
    fn arcsine_potential_at_i() {
        let v = arcsine_integral(Complex64::new(0.0, 1.0), 1 << 12).unwrap();
        let expect = ((1.0 + 2f64.sqrt()) / 2.0).ln();
        assert!((v - expect).abs() < 1e-9, "{v} vs {expect}");
    }

    #[test]
    fn closed_form_vanishes_on_the_segment() {
        for x in [-1.0, -0.3, 0.0, 0.99, 1.0] {
            let v = chebyshev_closed_form(Complex64::new(x, 0.0));
            assert!(v.abs() < 1e-9, "x = {x}: {v}");
        }
        assert!(chebyshev_closed_form(Complex64::new(1.000001, 0.0)) > 0.0);
    }

    #[test]
    fn arcsine_integral_rejections() {
        assert!(arcsine_integral(Complex64::new(0.5, 0.0), 1 << 10).is_err());
        assert!(arcsine_integral(Complex64::new(2.0, 0.0), 8).is_err());
        assert!(arcsine_integral(Complex64::new(2.0, 0.0), 16).is_ok());
    }

    #[test]
    fn leading_coefficient_identity() {
        // B_n of 2z^2 - 1 is 2^(2^n - 1); compare formula against the
        // composed polynomial's actual leading coefficient
        let f = chebyshev();
        for level in [3u32, 6, 9] {
            let composed = compose_self(&f, level).unwrap();
            let formula = log_leading(&f, level);
            assert!(
                (composed[0].ln_abs() - formula).abs() < 1e-9,
                "level {level}"
            );
        }
    }

    #[test]
    fn periodic_base_point_is_rejected() {
        // q = 1 is fixed by 2z^2 - 1
        assert!(julia_local_height(&chebyshev(), &rat(1, 1), 4, 1e-10).is_err());
    }
}
