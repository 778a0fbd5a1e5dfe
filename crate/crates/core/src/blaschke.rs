//! Anti-Blaschke products `f(z) = λ ∏ (z̄ − b_i)/(1 − b̄_i z̄)` on the unit disk.
//!
//! The normalized family `BP⁻_d` has `λ = 1` and `b_0 = 0`; the remaining
//! `d − 1` parameters are the `a_i` of the JSON format. Conjugates by disk
//! automorphisms (rescalings) share the representation with general `λ`.
//! Writing `f = B ∘ conj` with the holomorphic `B(w) = λ ∏ (w − b)/(1 − b̄w)`,
//! zeros of `f` sit at `conj(b_i)` and `∂f/∂z̄ (z) = B'(z̄)`.

use crate::error::{Error, Result};
use crate::hypdisk::{dist_cx, to_origin_cx, DiskPoint, IdealPoint};
use crate::mp::{self, fl, fl_int, Cx};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;
use serde::{Deserialize, Serialize};

/// Hyperbolic radius below which critical points are merged into one root.
pub const MERGE_RADIUS: f64 = 1e-7;

/// Minimal circular separation (turns) of traced fixed points.
pub const EPS_SEP: f64 = 1e-3;

/// Regression constant of the pared sweep: the largest critical displacement
/// seen over 200 seeded maps in `BP⁻_3(3)` (seed 0).
pub const PARED_SWEEP_M_EMP: f64 = 2.7632479021261185;

#[derive(Clone, Debug, PartialEq)]
pub struct AntiBlaschke {
    lambda: Cx,
    params: Vec<Cx>,
}

/// `(z̄ − b)/(1 − b̄ z̄)`.
pub fn anti_mobius(b: &Cx, z: &Cx) -> Cx {
    mobius(b, &z.conj())
}

fn mobius(b: &Cx, w: &Cx) -> Cx {
    let num = w - b;
    let den = &Cx::one() - &(&b.conj() * w);
    &num / &den
}

fn check_inside(b: &Cx) -> Result<()> {
    if !b.re.is_finite() || !b.im.is_finite() || b.norm_sqr() >= 1 {
        return Err(Error::OutsideDisk(format!("{b:?}"), 0.0));
    }
    Ok(())
}

impl AntiBlaschke {
    /// Normalized map `z̄ ∏ (z̄ − a_i)/(1 − ā_i z̄)`.
    pub fn new(zeros: &[Complex64]) -> Result<Self> {
        Self::from_zeros(zeros.iter().map(|&z| Cx::from_c64(z)).collect())
    }

    pub fn from_zeros(zeros: Vec<Cx>) -> Result<Self> {
        let mut params = vec![Cx::zero()];
        params.extend(zeros);
        Self::from_parts(Cx::one(), params)
    }

    /// `z̄^d`.
    pub fn monomial(d: usize) -> Self {
        AntiBlaschke { lambda: Cx::one(), params: vec![Cx::zero(); d] }
    }

    /// General proper map `λ ∏ M_{b_i}` with `|λ| = 1`.
    pub fn from_parts(lambda: Cx, params: Vec<Cx>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::Invalid("an anti-Blaschke product needs degree ≥ 1".into()));
        }
        for b in &params {
            check_inside(b)?;
        }
        let lambda = lambda.unit();
        Ok(AntiBlaschke { lambda, params })
    }

    pub fn degree(&self) -> usize {
        self.params.len()
    }

    pub fn lambda(&self) -> &Cx {
        &self.lambda
    }

    pub fn params(&self) -> &[Cx] {
        &self.params
    }

    /// Whether `λ = 1` and some parameter is exactly 0 (the `BP⁻_d` form).
    pub fn is_normal(&self) -> bool {
        let one = (&self.lambda - &Cx::one()).abs();
        one <= Float::with_val(mp::precision(), mp::epsilon() * 64u32) && self.params.iter().any(|b| b.is_zero())
    }

    /// The `a_i` of a normalized map: every parameter except one zero.
    pub fn zeros(&self) -> Vec<Cx> {
        let mut out = self.params.clone();
        if let Some(i) = out.iter().position(|b| b.is_zero()) {
            out.remove(i);
        }
        out
    }

    /// Points of the disk mapped to 0.
    pub fn zero_points(&self) -> Vec<Cx> {
        self.params.iter().map(|b| b.conj()).collect()
    }

    pub fn eval(&self, z: &Cx) -> Cx {
        self.holo(&z.conj())
    }

    pub fn eval_c64(&self, z: Complex64) -> Complex64 {
        self.eval(&Cx::from_c64(z)).to_c64()
    }

    /// The holomorphic `B` with `f = B ∘ conj`.
    pub fn holo(&self, w: &Cx) -> Cx {
        self.params.iter().fold(self.lambda.clone(), |acc, b| &acc * &mobius(b, w))
    }

    /// `B'(w) = λ Σ_i (1 − |b_i|²)/(1 − b̄_i w)² ∏_{j≠i} m_{b_j}(w)`.
    pub fn holo_deriv(&self, w: &Cx) -> Cx {
        let factors: Vec<Cx> = self.params.iter().map(|b| mobius(b, w)).collect();
        let mut total = Cx::zero();
        for (i, b) in self.params.iter().enumerate() {
            let den = &Cx::one() - &(&b.conj() * w);
            let mut term = Cx::real(b.one_minus_norm_sqr()) / (&den * &den);
            for (j, m) in factors.iter().enumerate() {
                if j != i {
                    term = &term * m;
                }
            }
            total = &total + &term;
        }
        &self.lambda * &total
    }

    /// Antiholomorphic derivative `∂f/∂z̄`.
    pub fn dzbar(&self, z: &Cx) -> Cx {
        self.holo_deriv(&z.conj())
    }

    /// `|f'|` on the circle at angle `t` turns: `Σ (1 − |b|²)/|e^{−2πit} − b|²`.
    pub fn boundary_speed(&self, t: &Float) -> Float {
        let w = Cx::expi_turns(t).conj();
        let mut s = fl(0.0);
        for b in &self.params {
            s += b.one_minus_norm_sqr() / (&w - b).norm_sqr();
        }
        s
    }

    /// Critical points in the disk with multiplicities, `d − 1` in total.
    pub fn critical_points(&self) -> Result<Vec<(DiskPoint, usize)>> {
        let d = self.degree();
        if d == 1 {
            return Ok(Vec::new());
        }
        let n = self.critical_numerator();
        // exact zero coefficients come from zero parameters: roots exactly at 0
        let z0 = n.iter().take_while(|c| c.is_zero()).count();
        let roots = mp::poly_roots(&n[z0..]).ok_or_else(|| Error::RootFindFailure("Aberth iteration did not converge".into()))?;
        let mut inside: Vec<Cx> = vec![Cx::zero(); z0];
        inside.extend(roots.into_iter().filter(|r| r.norm_sqr() < 1));
        if inside.len() != d - 1 {
            return Err(Error::RootFindFailure(format!("found {} critical points inside, expected {}", inside.len(), d - 1)));
        }
        let wind = winding_on_circle(&n);
        if wind != (d - 1) as i64 {
            return Err(Error::RootFindFailure(format!("argument principle counts {wind}, expected {}", d - 1)));
        }
        let mut out: Vec<(Cx, usize)> = Vec::new();
        for r in inside.drain(..) {
            let c = r.conj();
            match out.iter_mut().find(|(q, _)| dist_cx(q, &c).to_f64() < MERGE_RADIUS) {
                Some(slot) => slot.1 += 1,
                None => out.push((c, 1)),
            }
        }
        out.into_iter()
            .map(|(c, m)| Ok((DiskPoint::from_cx(c)?, m)))
            .collect()
    }

    /// Critical points repeated by multiplicity, as raw complex numbers.
    pub fn critical_list(&self) -> Result<Vec<Cx>> {
        Ok(self
            .critical_points()?
            .into_iter()
            .flat_map(|(p, m)| std::iter::repeat(p.into_cx()).take(m))
            .collect())
    }

    /// `N(w) = Σ_i (1 − |b_i|²) ∏_{j≠i} (w − b_j)(1 − b̄_j w)`, the numerator of `B'`.
    pub fn critical_numerator(&self) -> Vec<Cx> {
        let lin: Vec<Vec<Cx>> = self
            .params
            .iter()
            .map(|b| mp::poly_mul(&[-b, Cx::one()], &[Cx::one(), -b.conj()]))
            .collect();
        let mut total = vec![Cx::zero()];
        for (i, b) in self.params.iter().enumerate() {
            let mut p = vec![Cx::real(b.one_minus_norm_sqr())];
            for (j, q) in lin.iter().enumerate() {
                if j != i {
                    p = mp::poly_mul(&p, q);
                }
            }
            total = mp::poly_add(&total, &p);
        }
        total
    }

    /// Lifted fixed-point equation `Φ(t) = (D+1)t − α/2π − (1/π) Σ Arg(1 − b e^{2πit})`,
    /// strictly increasing with `Φ(t+1) = Φ(t) + D + 1`.
    fn lift(&self, t: &Float) -> Float {
        let d = self.degree() as i64;
        let e = Cx::expi_turns(t);
        let mut s = fl(0.0);
        for b in &self.params {
            let q = &Cx::one() - &(b * &e);
            s += q.arg();
        }
        let alpha = self.lambda.arg();
        Float::with_val(mp::precision(), t * fl_int(d + 1)) - alpha / mp::two_pi() - s / mp::pi()
    }

    /// Lifted position (turns) of the label-`k` fixed point: `Φ(t) = k`.
    pub fn fixed_point_lift(&self, k: usize) -> Result<Float> {
        let d = self.degree() as f64;
        let prec = mp::precision();
        let a = Float::with_val(prec, self.lambda.arg() / mp::two_pi());
        let kf = fl(k as f64);
        let width = fl(d + 1.0);
        let mut lo = Float::with_val(prec, (Float::with_val(prec, &kf + &a) - fl(d / 2.0)) / &width);
        let mut hi = Float::with_val(prec, (Float::with_val(prec, &kf + &a) + fl(d / 2.0)) / &width);
        let target = kf;
        let tol = Float::with_val(prec, mp::epsilon() * 16u32);
        if self.lift(&lo) > target || self.lift(&hi) < target {
            return Err(Error::BracketFailure(format!("label {k} not bracketed")));
        }
        let mut t = Float::with_val(prec, Float::with_val(prec, &lo + &hi) / 2u32);
        for _ in 0..(4 * prec as usize + 200) {
            let v = Float::with_val(prec, self.lift(&t) - &target);
            if v.is_zero() {
                return Ok(t);
            }
            if v > 0 {
                hi = t.clone();
            } else {
                lo = t.clone();
            }
            if Float::with_val(prec, &hi - &lo) <= tol {
                return Ok(Float::with_val(prec, Float::with_val(prec, &lo + &hi) / 2u32));
            }
            let slope = Float::with_val(prec, self.boundary_speed(&t) + 1u32);
            let step = Float::with_val(prec, &v / &slope);
            let cand = Float::with_val(prec, &t - &step);
            if step.clone().abs() <= tol {
                return Ok(cand);
            }
            t = if cand > lo && cand < hi && step.clone().abs() < Float::with_val(prec, &hi - &lo) / 2u32 {
                cand
            } else {
                Float::with_val(prec, Float::with_val(prec, &lo + &hi) / 2u32)
            };
        }
        Err(Error::BracketFailure(format!("label {k} did not converge")))
    }

    /// The `d + 1` boundary fixed points in marking order: label `k` is
    /// `η_f(k/(d+1))`, label 0 the marked repelling fixed point.
    pub fn boundary_fixed_points(&self) -> Result<MarkedFixedPoints> {
        let n = self.degree() + 1;
        let mut lifts = Vec::with_capacity(n);
        let mut residuals = Vec::with_capacity(n);
        for k in 0..n {
            let t = self.fixed_point_lift(k)?;
            let z = Cx::expi_turns(&t);
            residuals.push((&self.eval(&z) - &z).abs().to_f64());
            lifts.push(t);
        }
        for w in lifts.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::BracketFailure("fixed points are not strictly ordered".into()));
            }
        }
        let points = lifts.iter().map(|t| IdealPoint::from_turns(t.clone())).collect();
        Ok(MarkedFixedPoints { points, lifts, marking: 0, residuals })
    }

    /// Multiplier `L_f(x) = ln |∂f/∂z̄ (η_f(x))|` at `x = k/(d+1)`.
    pub fn multiplier(&self, k: usize) -> Result<f64> {
        if k > self.degree() {
            return Err(Error::Invalid(format!("fixed point label {k} out of range")));
        }
        let t = self.fixed_point_lift(k)?;
        Ok(self.boundary_speed(&t).ln().to_f64())
    }

    pub fn multipliers(&self) -> Result<Vec<f64>> {
        (0..=self.degree()).map(|k| self.multiplier(k)).collect()
    }

    pub fn pared_membership(&self, k: f64) -> Result<bool> {
        Ok(self.multipliers()?.into_iter().all(|l| l <= k))
    }

    /// Largest `d(c, f(c))` over critical points (0 in degree 1).
    pub fn critical_displacement(&self) -> Result<f64> {
        let mut m = 0.0f64;
        for (c, _) in self.critical_points()? {
            m = m.max(dist_cx(c.cx(), &self.eval(c.cx())).to_f64());
        }
        Ok(m)
    }

    pub fn qf_membership(&self, m: f64) -> Result<bool> {
        Ok(self.critical_displacement()? <= m)
    }

    /// `T ∘ f ∘ T⁻¹` with `T` the isometry sending `base` to 0.
    ///
    /// With `S(w) = (w + c̄)/(1 + c w)`, the holomorphic part is `T ∘ B ∘ S`,
    /// whose zeros are `S⁻¹` of the solutions of `B(u) = c`.
    pub fn rescale(&self, base: &DiskPoint) -> Result<AntiBlaschke> {
        let c = base.cx().clone();
        if c.is_zero() {
            return Ok(self.clone());
        }
        // λ ∏(u − b) − c ∏(1 − b̄u) = 0
        let mut num = vec![self.lambda.clone()];
        let mut den = vec![Cx::one()];
        for b in &self.params {
            num = mp::poly_mul(&num, &[-b, Cx::one()]);
            den = mp::poly_mul(&den, &[Cx::one(), -b.conj()]);
        }
        let den_c: Vec<Cx> = den.iter().map(|x| x * &c).collect();
        let eq: Vec<Cx> = num.iter().zip(den_c.iter()).map(|(a, b)| a - b).collect();
        let us = mp::poly_roots(&eq).ok_or_else(|| Error::RootFindFailure("rescale preimages".into()))?;
        if us.len() != self.degree() || us.iter().any(|u| u.norm_sqr() >= 1) {
            return Err(Error::RootFindFailure("rescale preimages left the disk".into()));
        }
        let t = to_origin_cx(&c);
        // S⁻¹ = conj-coefficient version of T
        let s_inv = to_origin_cx(&c.conj());
        let params: Vec<Cx> = us.iter().map(|u| s_inv.apply(u)).collect();
        let probe = Cx::from_f64(0.125, 0.0625);
        let s = to_origin_cx(&c.conj());
        let target = t.apply(&self.holo(&s.invert(&probe)));
        let prod = params.iter().fold(Cx::one(), |acc, b| &acc * &mobius(b, &probe));
        AntiBlaschke::from_parts(&target / &prod, params)
    }

    /// Conjugate by the rotation `z ↦ ωz`: `ω̄ f(ωz) = λω̄^{D+1} ∏ M_{ωb}`.
    pub fn rotate(&self, omega: &Cx) -> AntiBlaschke {
        let wb = omega.conj().powu(self.degree() as u32 + 1);
        AntiBlaschke {
            lambda: (&self.lambda * &wb).unit(),
            params: self.params.iter().map(|b| omega * b).collect(),
        }
    }

    /// Topological degree of the boundary map `θ ↦ arg f(e^{2πiθ})`.
    pub fn boundary_degree(&self) -> i64 {
        let n = 64 * (self.degree() + 1);
        let mut total = 0.0;
        let mut prev = self.eval(&Cx::expi_turns_f64(0.0)).arg().to_f64();
        for i in 1..=n {
            let t = fl(i as f64 / n as f64);
            let a = self.eval(&Cx::expi_turns(&t)).arg().to_f64();
            let mut da = a - prev;
            while da > std::f64::consts::PI {
                da -= std::f64::consts::TAU;
            }
            while da < -std::f64::consts::PI {
                da += std::f64::consts::TAU;
            }
            total += da;
            prev = a;
        }
        (total / std::f64::consts::TAU).round() as i64
    }

    /// Fixed points traced from `z̄^d` along the coefficient segment `t·a`.
    pub fn continuation_marking(&self) -> Result<MarkedFixedPoints> {
        let zeros = self.zeros();
        let path = |t: &Float| AntiBlaschke::from_zeros(zeros.iter().map(|a| a.scale(t)).collect());
        trace_fixed_points(self.degree(), &path)
    }

    pub fn to_json(&self) -> BlaschkeJson {
        let zeros = self.zeros();
        BlaschkeJson {
            d: self.degree(),
            zeros: zeros.iter().map(|z| {
                let c = z.to_c64();
                [c.re, c.im]
            }).collect(),
            zeros_mp: if mp::precision() > 64 {
                Some(zeros.iter().map(|z| [z.re.to_string_radix(10, None), z.im.to_string_radix(10, None)]).collect())
            } else {
                None
            },
        }
    }

    pub fn from_json(j: &BlaschkeJson) -> Result<Self> {
        if j.d < 1 {
            return Err(Error::Invalid("degree must be at least 1".into()));
        }
        let zeros: Vec<Cx> = match &j.zeros_mp {
            Some(z) => z.iter().map(|[re, im]| Ok(Cx::new(parse_float(re)?, parse_float(im)?))).collect::<Result<_>>()?,
            None => j.zeros.iter().map(|&[re, im]| Cx::from_f64(re, im)).collect(),
        };
        if zeros.len() + 1 != j.d {
            return Err(Error::Invalid(format!("d = {} needs {} zeros, got {}", j.d, j.d - 1, zeros.len())));
        }
        Self::from_zeros(zeros)
    }
}

fn parse_float(s: &str) -> Result<Float> {
    let p = Float::parse(s).map_err(|e| Error::Invalid(format!("bad number {s}: {e}")))?;
    Ok(Float::with_val(mp::precision(), p))
}

/// Wire format `{ "d": d, "zeros": [[re, im], ...] }`; the optional decimal
/// strings carry full working precision for deep maps.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlaschkeJson {
    pub d: usize,
    pub zeros: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeros_mp: Option<Vec<[String; 2]>>,
}

/// Argument-principle count of zeros of a polynomial inside the unit circle.
fn winding_on_circle(p: &[Cx]) -> i64 {
    let arg_at = |t: f64| mp::horner(p, &Cx::expi_turns_f64(t)).arg().to_f64();
    let wrap = |mut x: f64| {
        while x > std::f64::consts::PI {
            x -= std::f64::consts::TAU;
        }
        while x < -std::f64::consts::PI {
            x += std::f64::consts::TAU;
        }
        x
    };
    fn walk(a: f64, b: f64, aa: f64, ab: f64, depth: u32, arg_at: &dyn Fn(f64) -> f64, wrap: &dyn Fn(f64) -> f64) -> f64 {
        let da = wrap(ab - aa);
        if da.abs() < 1.0 || depth == 0 {
            return da;
        }
        let m = 0.5 * (a + b);
        let am = arg_at(m);
        walk(a, m, aa, am, depth - 1, arg_at, wrap) + walk(m, b, am, ab, depth - 1, arg_at, wrap)
    }
    let n = 16 * p.len().max(1);
    let mut total = 0.0;
    let mut prev = arg_at(0.0);
    for i in 1..=n {
        let t = i as f64 / n as f64;
        let a = arg_at(t);
        total += walk((i - 1) as f64 / n as f64, t, prev, a, 30, &arg_at, &wrap);
        prev = a;
    }
    (total / std::f64::consts::TAU).round() as i64
}

#[derive(Clone, Debug)]
pub struct MarkedFixedPoints {
    /// Fixed points in ccw order starting at the marked one.
    pub points: Vec<IdealPoint>,
    /// Lifted angles (turns), strictly increasing within one period.
    pub lifts: Vec<Float>,
    /// Index of `η_f(1)` in `points`.
    pub marking: usize,
    /// `|f(ξ) − ξ|` per point.
    pub residuals: Vec<f64>,
}

impl MarkedFixedPoints {
    pub fn turns_f64(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.turns_f64()).collect()
    }

    pub fn cx(&self, k: usize) -> Cx {
        self.points[k].cx()
    }
}

/// Continuation of the boundary fixed points along `t ↦ path(t)`, `t ∈ [0,1]`,
/// starting from the fixed points `k/(d+1)` of `path(0)`, which must be `z̄^d`.
/// Steps adapt so that no point moves more than `EPS_SEP/4` per step.
pub fn trace_fixed_points(d: usize, path: &dyn Fn(&Float) -> Result<AntiBlaschke>) -> Result<MarkedFixedPoints> {
    let n = d + 1;
    let mut pos: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
    let mut t = 0.0f64;
    let mut dt = 1.0 / 16.0;
    let mut refinements = 0;
    while t < 1.0 {
        let next = (t + dt).min(1.0);
        let f = path(&fl(next))?;
        let mut moved = Vec::with_capacity(n);
        let mut ok = true;
        for &x in &pos {
            match circle_newton(&f, x) {
                Some(y) if circ_dist(x, y) <= EPS_SEP / 4.0 => moved.push(y),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            dt /= 2.0;
            refinements += 1;
            if refinements > 30 {
                return Err(Error::ContinuationStepCollision(format!("step underflow at t = {t}")));
            }
            continue;
        }
        for i in 0..n {
            for j in i + 1..n {
                if circ_dist(moved[i], moved[j]) < EPS_SEP {
                    return Err(Error::ContinuationStepCollision(format!("points {i} and {j} at t = {next}")));
                }
            }
        }
        pos = moved;
        t = next;
        refinements = 0;
        dt = (dt * 1.5).min(0.25);
    }
    let f = path(&fl(1.0))?;
    // lift positions to a strictly increasing sequence from the marked one
    let mut lifts = Vec::with_capacity(n);
    let mut prev = pos[0] - pos[0].floor();
    lifts.push(prev);
    for &x in &pos[1..] {
        let mut y = x - x.floor();
        while y <= prev {
            y += 1.0;
        }
        lifts.push(y);
        prev = y;
    }
    let mut points = Vec::new();
    let mut residuals = Vec::new();
    let mut lifts_mp = Vec::new();
    for &l in &lifts {
        let tf = fl(l);
        let z = Cx::expi_turns(&tf);
        residuals.push((&f.eval(&z) - &z).abs().to_f64());
        points.push(IdealPoint::from_turns(tf.clone()));
        lifts_mp.push(tf);
    }
    Ok(MarkedFixedPoints { points, lifts: lifts_mp, marking: 0, residuals })
}

fn circ_dist(a: f64, b: f64) -> f64 {
    let x = (a - b).rem_euclid(1.0);
    x.min(1.0 - x)
}

/// Newton on `θ ↦ arg f(e^{2πiθ})/2π − θ (mod 1)` from `x`.
fn circle_newton(f: &AntiBlaschke, x: f64) -> Option<f64> {
    let mut t = fl(x);
    for _ in 0..60 {
        let z = Cx::expi_turns(&t);
        let fz = f.eval(&z);
        let r = (&fz / &z).arg_turns();
        let mut r = r.to_f64();
        if r > 0.5 {
            r -= 1.0;
        }
        let slope = -(f.boundary_speed(&t).to_f64()) - 1.0;
        let step = r / slope;
        t -= fl(step);
        if step.abs() < 1e-15 {
            return Some(t.to_f64());
        }
    }
    None
}

/// Degree-drop limit of a normalized map whose zeros converge to `zero_limits`.
#[derive(Clone, Debug)]
pub struct SymbolicLimit {
    /// Surviving product, including the unimodular constant `∏ (−a_∞)`.
    pub factor: AntiBlaschke,
    /// Holes `conj(a_∞)` of the unit-modulus limits.
    pub holes: Vec<Complex64>,
}

/// For each unit-modulus limit `a_∞`, `(z̄ − a)/(1 − āz̄)` degenerates to the
/// constant `−a_∞` away from the hole `conj(a_∞)`.
pub fn symbolic_limit(zero_limits: &[Complex64]) -> Result<SymbolicLimit> {
    let tol = 1e-12;
    let mut lambda = Cx::one();
    let mut params = vec![Cx::zero()];
    let mut holes = Vec::new();
    for &a in zero_limits {
        let r = a.norm();
        if r > 1.0 + tol {
            return Err(Error::OutsideDisk(format!("{a}"), 0.0));
        }
        if (r - 1.0).abs() <= tol {
            let u = a / r;
            lambda = &lambda * &Cx::from_c64(-u);
            holes.push(u.conj());
        } else {
            params.push(Cx::from_c64(a));
        }
    }
    Ok(SymbolicLimit { factor: AntiBlaschke::from_parts(lambda, params)?, holes })
}

/// Sampled maxima of the pared sweep.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub accepted: usize,
    pub tried: usize,
    pub max_displacement: f64,
}

/// Random maps of `BP⁻_d` (zeros at hyperbolic radius uniform in `[0, 6]`,
/// uniform angle) kept when every multiplier is at most `k`; reports the
/// largest critical displacement among the first `samples` accepted maps.
pub fn pared_sweep(d: usize, k: f64, samples: usize, seed: u64) -> Result<SweepResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted = 0;
    let mut tried = 0;
    let mut best = 0.0f64;
    while accepted < samples {
        tried += 1;
        if tried > 200 * samples + 1000 {
            return Err(Error::SizeLimit("pared sweep acceptance rate too low".into()));
        }
        let zeros: Vec<Complex64> = (0..d - 1)
            .map(|_| {
                let rho: f64 = rng.gen_range(0.0..6.0);
                Complex64::from_polar((rho / 2.0).tanh(), rng.gen_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        let f = AntiBlaschke::new(&zeros)?;
        if !f.pared_membership(k)? {
            continue;
        }
        accepted += 1;
        best = best.max(f.critical_displacement()?);
    }
    Ok(SweepResult { accepted, tried, max_displacement: best })
}

/// Random normalized map with zeros at hyperbolic radius at most `rho_max`.
pub fn random_map<R: Rng>(d: usize, rho_max: f64, rng: &mut R) -> AntiBlaschke {
    let zeros: Vec<Complex64> = (0..d - 1)
        .map(|_| {
            let rho: f64 = rng.gen_range(0.0..rho_max);
            Complex64::from_polar((rho / 2.0).tanh(), rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    AntiBlaschke::new(&zeros).expect("zeros inside the disk")
}

/// `2δ_a^{1−α} − |M_a(z) + a/|a||` for the single factor `M_a(z) = (z̄ − a)/(1 − āz̄)`,
/// `δ_a = 1 − |a|`. Nonnegative whenever `|z| < 1 − δ_a^α`.
pub fn end_approach_margin(a: &Cx, alpha: &Float, z: &Cx) -> Result<Float> {
    let p = a.prec();
    let m = AntiBlaschke::from_parts(Cx::one(), vec![a.clone()])?;
    let delta = Float::with_val(p, 1u32 - a.abs());
    let bound = Float::with_val(p, rug::ops::Pow::pow(&delta, Float::with_val(p, 1u32 - alpha))) * 2u32;
    Ok(bound - (&m.eval(z) + &a.unit()).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_fixed_points() {
        let f = AntiBlaschke::monomial(3);
        let fp = f.boundary_fixed_points().unwrap();
        for (k, t) in fp.turns_f64().iter().enumerate() {
            assert!((t - k as f64 / 4.0).abs() < 1e-30);
        }
    }

    #[test]
    fn rotation_preserves_multipliers() {
        let f = AntiBlaschke::new(&[Complex64::new(0.3, 0.2), Complex64::new(-0.5, 0.1)]).unwrap();
        let mut a = f.multipliers().unwrap();
        let g = f.rotate(&Cx::expi_turns_f64(0.25));
        let mut b = g.multipliers().unwrap();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
