//! Multiprecision complex arithmetic on top of MPFR floats.
//!
//! Degenerating families push zeros to hyperbolic depth well past what `f64`
//! resolves, so the numeric modules work with [`Cx`] at a thread-local
//! working precision.

use num_complex::Complex64;
use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;
use std::cell::Cell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub const DEFAULT_PRECISION: u32 = 192;

thread_local! {
    static PREC: Cell<u32> = const { Cell::new(DEFAULT_PRECISION) };
}

/// Current working precision in bits for this thread.
pub fn precision() -> u32 {
    PREC.with(|p| p.get())
}

/// Sets the working precision and returns a guard that restores the old one.
#[must_use]
pub fn push_precision(bits: u32) -> PrecisionGuard {
    let old = PREC.with(|p| p.replace(bits.max(64)));
    PrecisionGuard { old }
}

pub struct PrecisionGuard {
    old: u32,
}

impl Drop for PrecisionGuard {
    fn drop(&mut self) {
        PREC.with(|p| p.set(self.old));
    }
}

/// Bits needed to resolve points at hyperbolic distance `depth` from 0 with
/// headroom for the fixed-point solve in their shadows.
pub fn bits_for_depth(depth: f64) -> u32 {
    let extra = (depth.max(0.0) * std::f64::consts::LOG2_E).ceil() as u32;
    96 + 2 * extra
}

pub fn fl(x: f64) -> Float {
    Float::with_val(precision(), x)
}

pub fn fl_int(x: i64) -> Float {
    Float::with_val(precision(), x)
}

pub fn pi() -> Float {
    Float::with_val(precision(), Constant::Pi)
}

pub fn two_pi() -> Float {
    pi() * 2u32
}

/// Smallest relative step that is still meaningful at working precision.
pub fn epsilon() -> Float {
    Float::with_val(precision(), Float::i_exp(1, 1 - precision() as i32))
}

/// Reduces a value in turns to `[0, 1)`.
pub fn frac_turns(t: &Float) -> Float {
    let mut r = Float::with_val(t.prec(), t - t.clone().floor());
    if r >= 1 {
        r -= 1u32;
    }
    if r < 0 {
        r = Float::with_val(t.prec(), 0);
    }
    r
}

/// Complex number with MPFR components.
#[derive(Clone, PartialEq)]
pub struct Cx {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.to_c64();
        write!(f, "Cx({:.17e}, {:.17e})", c.re, c.im)
    }
}

impl Cx {
    pub fn new(re: Float, im: Float) -> Self {
        Cx { re, im }
    }

    pub fn from_f64(re: f64, im: f64) -> Self {
        Cx::new(fl(re), fl(im))
    }

    pub fn from_c64(z: Complex64) -> Self {
        Cx::from_f64(z.re, z.im)
    }

    pub fn real(x: Float) -> Self {
        let p = x.prec();
        Cx::new(x, Float::new(p))
    }

    pub fn zero() -> Self {
        Cx::from_f64(0.0, 0.0)
    }

    pub fn one() -> Self {
        Cx::from_f64(1.0, 0.0)
    }

    /// `e^{2πi t}` for `t` in turns.
    pub fn expi_turns(t: &Float) -> Self {
        let ang = Float::with_val(precision(), t * two_pi());
        let (s, c) = ang.sin_cos(Float::new(precision()));
        Cx::new(c, s)
    }

    pub fn expi_turns_f64(t: f64) -> Self {
        Cx::expi_turns(&fl(t))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn conj(&self) -> Cx {
        Cx::new(self.re.clone(), Float::with_val(self.im.prec(), -&self.im))
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        let mut r = Float::with_val(p, self.re.square_ref());
        r += Float::with_val(p, self.im.square_ref());
        r
    }

    pub fn abs(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.hypot_ref(&self.im))
    }

    /// Principal argument in `(-π, π]`.
    pub fn arg(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.im.atan2_ref(&self.re))
    }

    /// Argument in turns, reduced to `[0, 1)`.
    pub fn arg_turns(&self) -> Float {
        let t = self.arg() / two_pi();
        frac_turns(&t)
    }

    /// `1 - |z|^2`, computed without cancellation beyond working precision.
    pub fn one_minus_norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, 1u32 - self.norm_sqr())
    }

    pub fn scale(&self, k: &Float) -> Cx {
        let p = self.prec();
        Cx::new(Float::with_val(p, &self.re * k), Float::with_val(p, &self.im * k))
    }

    pub fn scale_f64(&self, k: f64) -> Cx {
        self.scale(&fl(k))
    }

    /// Unit vector in the direction of `self`; zero stays zero.
    pub fn unit(&self) -> Cx {
        let a = self.abs();
        if a.is_zero() {
            return Cx::zero();
        }
        let inv = Float::with_val(a.prec(), 1u32 / a);
        self.scale(&inv)
    }

    pub fn recip(&self) -> Cx {
        let n = self.norm_sqr();
        let p = self.prec();
        Cx::new(
            Float::with_val(p, &self.re / &n),
            Float::with_val(p, -(self.im.clone()) / n),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn powu(&self, n: u32) -> Cx {
        let mut acc = Cx::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Cx {
        let r = self.abs();
        if r.is_zero() {
            return Cx::zero();
        }
        let p = self.prec();
        let half = Float::with_val(p, 0.5);
        let a = Float::with_val(p, (Float::with_val(p, &r + &self.re) * &half).sqrt());
        let b = Float::with_val(p, (Float::with_val(p, &r - &self.re) * &half).sqrt());
        if self.im < 0 {
            Cx::new(a, -b)
        } else {
            Cx::new(a, b)
        }
    }

    /// Rotation by `e^{iφ}` given as a real power of a unit complex number.
    pub fn pow_real(&self, e: &Float) -> Cx {
        let p = self.prec();
        let r = Float::with_val(p, self.abs().pow(e));
        let ang = Float::with_val(p, self.arg() * e);
        let (s, c) = ang.sin_cos(Float::new(p));
        Cx::new(c * &r, s * r)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a, 'b> $tr<&'b Cx> for &'a Cx {
            type Output = Cx;
            fn $m(self, o: &'b Cx) -> Cx {
                let f: fn(&Cx, &Cx) -> Cx = $body;
                f(self, o)
            }
        }
        impl $tr<Cx> for Cx {
            type Output = Cx;
            fn $m(self, o: Cx) -> Cx {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Cx> for Cx {
            type Output = Cx;
            fn $m(self, o: &'a Cx) -> Cx {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<Cx> for &'a Cx {
            type Output = Cx;
            fn $m(self, o: Cx) -> Cx {
                self.$m(&o)
            }
        }
    };
}

binop!(Add, add, |a, b| {
    let p = a.prec().max(b.prec());
    Cx::new(Float::with_val(p, &a.re + &b.re), Float::with_val(p, &a.im + &b.im))
});

binop!(Sub, sub, |a, b| {
    let p = a.prec().max(b.prec());
    Cx::new(Float::with_val(p, &a.re - &b.re), Float::with_val(p, &a.im - &b.im))
});

binop!(Mul, mul, |a, b| {
    let p = a.prec().max(b.prec());
    let rr = Float::with_val(p, &a.re * &b.re);
    let ii = Float::with_val(p, &a.im * &b.im);
    let ri = Float::with_val(p, &a.re * &b.im);
    let ir = Float::with_val(p, &a.im * &b.re);
    Cx::new(rr - ii, ri + ir)
});

binop!(Div, div, |a, b| {
    let p = a.prec().max(b.prec());
    let n = b.norm_sqr();
    let rr = Float::with_val(p, &a.re * &b.re);
    let ii = Float::with_val(p, &a.im * &b.im);
    let ir = Float::with_val(p, &a.im * &b.re);
    let ri = Float::with_val(p, &a.re * &b.im);
    Cx::new((rr + ii) / &n, (ir - ri) / n)
});

impl Neg for Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx::new(-self.re, -self.im)
    }
}

impl<'a> Neg for &'a Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        -(self.clone())
    }
}

/// Evaluates a polynomial with coefficients in increasing degree order.
pub fn horner(coeffs: &[Cx], z: &Cx) -> Cx {
    let mut acc = Cx::zero();
    for c in coeffs.iter().rev() {
        acc = &(&acc * z) + c;
    }
    acc
}

/// Product of linear factors `∏ (z - r_i)` as increasing-degree coefficients.
pub fn poly_from_roots(roots: &[Cx]) -> Vec<Cx> {
    let mut c = vec![Cx::one()];
    for r in roots {
        let mut next = vec![Cx::zero(); c.len() + 1];
        for (i, ci) in c.iter().enumerate() {
            next[i + 1] = &next[i + 1] + ci;
            next[i] = &next[i] - &(ci * r);
        }
        c = next;
    }
    c
}

pub fn poly_mul(a: &[Cx], b: &[Cx]) -> Vec<Cx> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Cx::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

pub fn poly_add(a: &[Cx], b: &[Cx]) -> Vec<Cx> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => x + y,
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => Cx::zero(),
        })
        .collect()
}

pub fn poly_deriv(a: &[Cx]) -> Vec<Cx> {
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.scale(&fl_int(i as i64)))
        .collect()
}

/// Drops leading coefficients that vanish relative to the largest one.
pub fn poly_trim(mut a: Vec<Cx>) -> Vec<Cx> {
    let big = a.iter().map(|c| c.abs()).fold(fl(0.0), |m, x| if x > m { x } else { m });
    let tiny = Float::with_val(precision(), &big * epsilon()) * 16u32;
    while a.len() > 1 && a.last().map(|c| c.abs() <= tiny).unwrap_or(false) {
        a.pop();
    }
    a
}

/// All roots of a polynomial by Aberth–Ehrlich simultaneous iteration.
///
/// Starting values come from `f64` companion-matrix eigenvalues, perturbed
/// apart so that coincident seeds do not stall the repulsion term.
pub fn poly_roots(coeffs: &[Cx]) -> Option<Vec<Cx>> {
    let c = poly_trim(coeffs.to_vec());
    let n = c.len() - 1;
    if n == 0 {
        return Some(Vec::new());
    }
    let lead = c[n].clone();
    let monic: Vec<Cx> = c.iter().map(|x| x / &lead).collect();
    let seeds = companion_seeds(&monic);
    let mut z: Vec<Cx> = seeds
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let jitter = Complex64::from_polar(1e-9 * (1.0 + s.norm()), 0.7 + 2.39996 * k as f64);
            Cx::from_c64(s + jitter)
        })
        .collect();
    let dm = poly_deriv(&monic);
    let tol = Float::with_val(precision(), epsilon() * 64u32);
    for _ in 0..2000 {
        let mut max_step = fl(0.0);
        for i in 0..n {
            let pv = horner(&monic, &z[i]);
            if pv.is_zero() {
                continue;
            }
            let dv = horner(&dm, &z[i]);
            let ratio = &pv / &dv;
            let mut rep = Cx::zero();
            for j in 0..n {
                if j != i {
                    let diff = &z[i] - &z[j];
                    if !diff.is_zero() {
                        rep = &rep + &diff.recip();
                    }
                }
            }
            let denom = &Cx::one() - &(&ratio * &rep);
            let step = &ratio / &denom;
            let rel = Float::with_val(precision(), step.abs() / (Float::with_val(precision(), z[i].abs() + 1u32)));
            if rel > max_step {
                max_step = rel;
            }
            z[i] = &z[i] - &step;
        }
        if max_step <= tol {
            return Some(z);
        }
    }
    // Converged roots of high multiplicity settle slowly; accept if the residual is tiny.
    let scale: Float = monic.iter().map(|x| x.abs()).fold(fl(0.0), |a, b| a + b);
    let ok = z.iter().all(|r| {
        let rv = horner(&monic, r).abs();
        let bound = Float::with_val(precision(), &scale * epsilon()) * fl(1e6);
        rv <= bound * Float::with_val(precision(), r.abs() + 1u32).pow(n as u32)
    });
    if ok {
        Some(z)
    } else {
        None
    }
}

fn companion_seeds(monic: &[Cx]) -> Vec<Complex64> {
    let n = monic.len() - 1;
    let cf: Vec<Complex64> = monic.iter().map(|c| c.to_c64()).collect();
    if cf.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return circle_seeds(n, 1.0);
    }
    let mut m = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -cf[i];
    }
    // near-defective companions can stall an uncapped QR sweep
    let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 2000);
    match schur.and_then(|sc| sc.eigenvalues()) {
        Some(ev) if ev.iter().all(|v| v.re.is_finite() && v.im.is_finite()) => ev.iter().cloned().collect(),
        _ => {
            let r = cf.iter().take(n).map(|c| c.norm()).fold(0.0f64, f64::max).max(1.0);
            circle_seeds(n, r)
        }
    }
}

fn circle_seeds(n: usize, r: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(r, 0.4 + std::f64::consts::TAU * k as f64 / n as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_cubic() {
        let _g = push_precision(128);
        let r = vec![Cx::from_f64(0.5, 0.0), Cx::from_f64(-0.25, 0.5), Cx::from_f64(2.0, -1.0)];
        let p = poly_from_roots(&r);
        let found = poly_roots(&p).unwrap();
        for want in &r {
            let best = found.iter().map(|z| (z - want).abs().to_f64()).fold(f64::MAX, f64::min);
            assert!(best < 1e-30, "{best}");
        }
    }

    #[test]
    fn reflection_pair_is_separated() {
        let _g = push_precision(256);
        // roots at 1 - 1e-20 and its reflection, far below f64 resolution
        let a = Float::with_val(256, 1) - Float::with_val(256, Float::parse("1e-20").unwrap());
        let ra = Cx::real(a.clone());
        let rb = Cx::real(Float::with_val(256, 1u32 / a));
        let p = poly_from_roots(&[ra.clone(), rb.clone(), Cx::from_f64(0.0, 0.3)]);
        let found = poly_roots(&p).unwrap();
        let inside = found.iter().filter(|z| z.norm_sqr() < 1).count();
        assert_eq!(inside, 2);
        let best = found.iter().map(|z| (z - &ra).abs().to_f64()).fold(f64::MAX, f64::min);
        assert!(best < 1e-40);
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = Cx::from_f64(0.3, -0.7);
        let b = Cx::from_f64(-1.25, 0.5);
        let q = &(&a * &b) / &b;
        assert!((&q - &a).abs().to_f64() < 1e-50);
    }
}
