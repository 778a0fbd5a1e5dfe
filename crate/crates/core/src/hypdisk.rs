//! Hyperbolic geometry of the unit disk in closed form.
//!
//! Every formula transports one endpoint to the origin first, which keeps the
//! arithmetic well conditioned even for points very close to the circle.

use crate::error::{Error, Result};
use crate::mp::{self, fl, Cx};
use num_complex::Complex64;
use rand::Rng;
use rug::Float;

/// Default rejection margin for points entered in double precision.
pub const DEFAULT_MARGIN: f64 = 1e-14;

/// Arclength cap used when a geodesic runs out to an ideal point.
pub const DEFAULT_ARCLENGTH_CAP: f64 = 40.0;

#[derive(Clone, Debug, PartialEq)]
pub struct DiskPoint(Cx);

impl DiskPoint {
    /// Validates a double-precision point against [`DEFAULT_MARGIN`].
    pub fn new(z: Complex64) -> Result<Self> {
        Self::with_margin(z, DEFAULT_MARGIN)
    }

    pub fn with_margin(z: Complex64, margin: f64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) || z.norm() >= 1.0 - margin {
            return Err(Error::OutsideDisk(format!("{z}"), margin));
        }
        Ok(DiskPoint(Cx::from_c64(z)))
    }

    /// Validates a multiprecision point; the margin shrinks with the working
    /// precision so that deep points produced by the solvers remain valid.
    pub fn from_cx(z: Cx) -> Result<Self> {
        let margin = Float::with_val(z.prec(), Float::i_exp(1, 8 - z.prec() as i32));
        if !z.re.is_finite() || !z.im.is_finite() || z.one_minus_norm_sqr() <= margin {
            return Err(Error::OutsideDisk(format!("{z:?}"), margin.to_f64()));
        }
        Ok(DiskPoint(z))
    }

    pub fn origin() -> Self {
        DiskPoint(Cx::zero())
    }

    pub fn cx(&self) -> &Cx {
        &self.0
    }

    pub fn into_cx(self) -> Cx {
        self.0
    }

    pub fn to_c64(&self) -> Complex64 {
        self.0.to_c64()
    }

    /// Hyperbolic distance from the origin.
    pub fn depth(&self) -> f64 {
        dist_cx(&Cx::zero(), &self.0).to_f64()
    }
}

/// A point of the circle at infinity, stored as an angle in turns in `[0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IdealPoint {
    turns: Float,
}

impl IdealPoint {
    pub fn new(turns: f64) -> Self {
        IdealPoint { turns: mp::frac_turns(&fl(turns)) }
    }

    pub fn from_turns(turns: Float) -> Self {
        IdealPoint { turns: mp::frac_turns(&turns) }
    }

    pub fn from_cx(z: &Cx) -> Self {
        IdealPoint { turns: z.arg_turns() }
    }

    pub fn turns(&self) -> &Float {
        &self.turns
    }

    pub fn turns_f64(&self) -> f64 {
        self.turns.to_f64()
    }

    pub fn cx(&self) -> Cx {
        Cx::expi_turns(&self.turns)
    }
}

/// Either kind of endpoint accepted by the geometric operations.
#[derive(Clone, Debug, PartialEq)]
pub enum Pt {
    Disk(DiskPoint),
    Ideal(IdealPoint),
}

impl Pt {
    pub fn cx(&self) -> Cx {
        match self {
            Pt::Disk(p) => p.cx().clone(),
            Pt::Ideal(q) => q.cx(),
        }
    }

    pub fn is_ideal(&self) -> bool {
        matches!(self, Pt::Ideal(_))
    }
}

impl From<DiskPoint> for Pt {
    fn from(p: DiskPoint) -> Self {
        Pt::Disk(p)
    }
}

impl From<IdealPoint> for Pt {
    fn from(q: IdealPoint) -> Self {
        Pt::Ideal(q)
    }
}

/// Disk automorphism `z ↦ (z − c)/(1 − c̄ z)` sending `c` to the origin.
#[derive(Clone, Debug)]
pub struct DiskIsometry {
    c: Cx,
}

impl DiskIsometry {
    pub fn center(&self) -> &Cx {
        &self.c
    }

    pub fn apply(&self, z: &Cx) -> Cx {
        let num = z - &self.c;
        let den = &Cx::one() - &(&self.c.conj() * z);
        &num / &den
    }

    /// Inverse map `z ↦ (z + c)/(1 + c̄ z)`, sending 0 back to `c`.
    pub fn invert(&self, z: &Cx) -> Cx {
        let num = z + &self.c;
        let den = &Cx::one() + &(&self.c.conj() * z);
        &num / &den
    }

    pub fn apply_pt(&self, p: &Pt) -> Pt {
        match p {
            Pt::Disk(d) => Pt::Disk(DiskPoint(self.apply(d.cx()))),
            Pt::Ideal(q) => Pt::Ideal(IdealPoint::from_cx(&self.apply(&q.cx()))),
        }
    }

    pub fn invert_pt(&self, p: &Pt) -> Pt {
        match p {
            Pt::Disk(d) => Pt::Disk(DiskPoint(self.invert(d.cx()))),
            Pt::Ideal(q) => Pt::Ideal(IdealPoint::from_cx(&self.invert(&q.cx()))),
        }
    }
}

pub fn to_origin(c: &DiskPoint) -> DiskIsometry {
    DiskIsometry { c: c.cx().clone() }
}

pub fn to_origin_cx(c: &Cx) -> DiskIsometry {
    DiskIsometry { c: c.clone() }
}

/// `2 artanh |(a − b)/(1 − b̄ a)|` evaluated as `ln((1+x)^2 / (1−x^2))` with
/// `1 − x^2 = (1−|a|^2)(1−|b|^2)/|1 − b̄a|^2`, which avoids cancellation.
pub fn dist_cx(a: &Cx, b: &Cx) -> Float {
    let den = &Cx::one() - &(&b.conj() * a);
    let num = a - b;
    let p = a.prec().max(b.prec());
    let dn = den.norm_sqr();
    if dn.is_zero() {
        return Float::with_val(p, 0);
    }
    let x = Float::with_val(p, (num.norm_sqr() / &dn).sqrt());
    let one_minus = Float::with_val(p, a.one_minus_norm_sqr() * b.one_minus_norm_sqr()) / dn;
    let one_plus = Float::with_val(p, 1u32 + x);
    let lhs = Float::with_val(p, one_plus.square_ref()).ln();
    lhs - one_minus.ln()
}

pub fn dist(a: &DiskPoint, b: &DiskPoint) -> f64 {
    dist_cx(a.cx(), b.cx()).to_f64()
}

pub fn dist_mp(a: &DiskPoint, b: &DiskPoint) -> Float {
    dist_cx(a.cx(), b.cx())
}

/// Point at hyperbolic distance `r` from the origin in the direction of `dir`.
pub fn radial_point(dir: &Cx, r: &Float) -> Cx {
    let p = dir.prec().max(r.prec());
    let half = Float::with_val(p, r / 2u32);
    dir.unit().scale(&half.tanh())
}

/// Point at distance `r` from `from` along the geodesic toward `toward`.
pub fn point_toward(from: &Cx, toward: &Pt, r: &Float) -> Cx {
    let t = to_origin_cx(from);
    let dir = match toward {
        Pt::Disk(d) => t.apply(d.cx()),
        Pt::Ideal(q) => t.apply(&q.cx()),
    };
    t.invert(&radial_point(&dir, r))
}

/// Point of the geodesic from `a` to `b` at parameter `t`.
///
/// Finite segments are parametrized by arclength fraction. A segment with one
/// ideal end is cut at `cap` units from its finite end; a bi-infinite geodesic
/// is cut at `cap/2` on both sides of its point closest to the origin.
pub fn geodesic(a: &Pt, b: &Pt, t: f64, cap: f64) -> Result<DiskPoint> {
    let (ac, bc) = (a.cx(), b.cx());
    if (&ac - &bc).abs().to_f64() == 0.0 {
        return Err(Error::DegenerateGeodesic);
    }
    let t = t.clamp(0.0, 1.0);
    match (a, b) {
        (Pt::Disk(pa), Pt::Disk(pb)) => {
            let len = dist_mp(pa, pb);
            Ok(DiskPoint(point_toward(pa.cx(), b, &(len * fl(t)))))
        }
        (Pt::Disk(pa), Pt::Ideal(_)) => Ok(DiskPoint(point_toward(pa.cx(), b, &fl(t * cap)))),
        (Pt::Ideal(_), Pt::Disk(_)) => geodesic(b, a, 1.0 - t, cap),
        (Pt::Ideal(_), Pt::Ideal(_)) => {
            let mid = closest_to_origin_ideal(&ac, &bc);
            let s = (t - 0.5) * cap;
            if s <= 0.0 {
                Ok(DiskPoint(point_toward(&mid, a, &fl(-s))))
            } else {
                Ok(DiskPoint(point_toward(&mid, b, &fl(s))))
            }
        }
    }
}

/// Foot of the perpendicular from 0 to the geodesic with ideal ends `p`, `q`.
fn closest_to_origin_ideal(p: &Cx, q: &Cx) -> Cx {
    let s = p + q;
    let n = s.abs();
    if n.is_zero() {
        return Cx::zero();
    }
    // the geodesic is a circle orthogonal to S¹ with center (p+q)/(1+Re p̄q)
    let re = Float::with_val(n.prec(), 1u32 + (&p.conj() * q).re);
    let center_abs = Float::with_val(n.prec(), &n / &re);
    let radius = (Float::with_val(n.prec(), center_abs.square_ref()) - 1u32).sqrt();
    let foot = Float::with_val(n.prec(), &center_abs - radius);
    s.unit().scale(&foot)
}

/// Conformal angle at `v` between the geodesics toward `a` and `b`, in `[0, π]`.
pub fn angle_at(v: &DiskPoint, a: &Pt, b: &Pt) -> Result<f64> {
    let t = to_origin(v);
    let da = t.apply(&a.cx());
    let db = t.apply(&b.cx());
    if da.abs().to_f64() == 0.0 || db.abs().to_f64() == 0.0 {
        return Err(Error::DegenerateGeodesic);
    }
    let x = (&db / &da).arg().to_f64();
    Ok(x.abs())
}

/// Direction at `v` of the geodesic toward `a`, in turns.
pub fn direction_at(v: &Cx, a: &Pt) -> Float {
    to_origin_cx(v).apply(&a.cx()).arg_turns()
}

/// Nearest point of the hyperbolic convex hull of `pts` to `x`.
///
/// The hull of a finite set is the union of the geodesic triangles on its
/// triples, so `x` lies in the hull iff it lies in one of them; otherwise the
/// nearest point sits on a hull edge and the closed-form foot on each segment
/// is compared. For ideal `x` the Busemann function replaces distance.
pub fn project_to_hull(x: &Pt, pts: &[Pt]) -> Result<DiskPoint> {
    if pts.is_empty() {
        return Err(Error::Invalid("project_to_hull needs at least one point".into()));
    }
    if let Pt::Disk(xd) = x {
        if pts.iter().any(|p| matches!(p, Pt::Disk(q) if q.cx() == xd.cx())) {
            return Ok(xd.clone());
        }
        if in_some_triangle(xd, pts) {
            return Ok(xd.clone());
        }
    }
    let mut best: Option<(Float, Cx)> = None;
    let mut consider = |cand: Cx| {
        let score = match x {
            Pt::Disk(xd) => dist_cx(xd.cx(), &cand),
            Pt::Ideal(q) => busemann(&q.cx(), &cand),
        };
        if best.as_ref().map(|(s, _)| score < *s).unwrap_or(true) {
            best = Some((score, cand));
        }
    };
    let finite: Vec<&Pt> = pts.iter().collect();
    if finite.len() == 1 {
        consider(truncate_ideal(finite[0]));
    }
    for i in 0..finite.len() {
        for j in (i + 1)..finite.len() {
            if let Some(c) = segment_foot(x, finite[i], finite[j]) {
                consider(c);
            }
        }
    }
    let (_, c) = best.ok_or_else(|| Error::Invalid("no hull candidates".into()))?;
    Ok(DiskPoint(c))
}

fn truncate_ideal(p: &Pt) -> Cx {
    match p {
        Pt::Disk(d) => d.cx().clone(),
        Pt::Ideal(q) => radial_point(&q.cx(), &fl(DEFAULT_ARCLENGTH_CAP)),
    }
}

/// Busemann function of the ideal point `xi`, normalized to vanish at 0.
pub fn busemann(xi: &Cx, y: &Cx) -> Float {
    let p = y.prec().max(xi.prec());
    let num = (xi - y).norm_sqr();
    Float::with_val(p, num / y.one_minus_norm_sqr()).ln()
}

fn in_some_triangle(x: &DiskPoint, pts: &[Pt]) -> bool {
    if pts.len() < 3 {
        return false;
    }
    let t = to_origin(x);
    let moved: Vec<Cx> = pts.iter().map(|p| t.apply(&p.cx())).collect();
    let n = moved.len();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                if origin_in_geodesic_triangle(&moved[i], &moved[j], &moved[k]) {
                    return true;
                }
            }
        }
    }
    false
}

/// Geodesics through two points bound the same side of 0 as the chord between
/// their Klein images, so the sign of `Im(p̄ q)` decides containment.
fn origin_in_geodesic_triangle(a: &Cx, b: &Cx, c: &Cx) -> bool {
    let s1 = (&a.conj() * b).im.to_f64();
    let s2 = (&b.conj() * c).im.to_f64();
    let s3 = (&c.conj() * a).im.to_f64();
    (s1 >= 0.0 && s2 >= 0.0 && s3 >= 0.0) || (s1 <= 0.0 && s2 <= 0.0 && s3 <= 0.0)
}

/// Closest point of the segment `[p, q]` to `x` (or Busemann-closest for ideal
/// `x`), in closed form after moving `p` to 0 and `q` onto the positive axis.
fn segment_foot(x: &Pt, p: &Pt, q: &Pt) -> Option<Cx> {
    let (p, q) = if p.is_ideal() && !q.is_ideal() { (q, p) } else { (p, q) };
    let base = match p {
        Pt::Disk(d) => d.cx().clone(),
        Pt::Ideal(_) => {
            // both ends ideal: start from the point nearest the origin
            closest_to_origin_ideal(&p.cx(), &q.cx())
        }
    };
    let t = to_origin_cx(&base);
    let qd = t.apply(&q.cx());
    let rot = qd.unit();
    if rot.is_zero() {
        return None;
    }
    let unrot = rot.conj();
    let qlen = qd.abs();
    let y = &t.apply(&x.cx()) * &unrot;
    let prec = y.prec();
    let foot = match x {
        Pt::Disk(_) => {
            let re2 = Float::with_val(prec, &y.re * 2u32);
            let one_plus = Float::with_val(prec, 1u32 + y.norm_sqr());
            let disc = Float::with_val(prec, one_plus.square_ref()) - Float::with_val(prec, re2.square_ref());
            let den = Float::with_val(prec, &one_plus + disc.sqrt());
            re2 / den
        }
        Pt::Ideal(_) => {
            let c = y.re.clone();
            if c <= 0 {
                Float::new(prec)
            } else {
                let s = Float::with_val(prec, y.im.abs_ref());
                Float::with_val(prec, 1u32 - s) / c
            }
        }
    };
    let lo = if p.is_ideal() && q.is_ideal() { Float::with_val(prec, -&qlen) } else { Float::new(prec) };
    let mut f = foot;
    if f < lo {
        f = lo;
    }
    if f > qlen {
        f = qlen;
    }
    let on_axis = Cx::real(f);
    Some(t.invert(&(&on_axis * &rot)))
}

/// Margins of the depth-power comparison for `|z| = 1 − δ`, `|z′| = 1 − δ^α`:
/// `(d(0,z′) − α·d(0,z), α·d(0,z) + ln 2 − d(0,z′))`. Both are nonnegative
/// for `0 < α < 1`.
pub fn depth_power_margins(delta: &Float, alpha: &Float) -> (Float, Float) {
    let p = delta.prec();
    let r = Float::with_val(p, 1u32 - delta);
    let r2 = Float::with_val(p, 1u32 - Float::with_val(p, rug::ops::Pow::pow(delta, alpha)));
    let d = dist_cx(&Cx::zero(), &Cx::real(r));
    let d2 = dist_cx(&Cx::zero(), &Cx::real(r2));
    let ad = Float::with_val(p, alpha * &d);
    let ln2 = Float::with_val(p, rug::float::Constant::Log2);
    (Float::with_val(p, &d2 - &ad), ad + ln2 - d2)
}

/// Asymptotic thin-triangle constant: for legs of any length meeting at angle
/// θ, `d(A,B) + d(B,C) − d(A,C) < 2 ln(1/sin(θ/2))`.
pub fn thin_triangle_bound(theta: f64) -> f64 {
    2.0 * (1.0 / (theta / 2.0).sin()).ln()
}

/// Largest observed defect over random triangles with angle at least θ at B.
pub fn calibrate_thin_triangle<R: Rng>(theta: f64, samples: usize, rng: &mut R) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let la = rng.gen_range(0.01..12.0);
        let lc = rng.gen_range(0.01..12.0);
        let ang = rng.gen_range(theta..std::f64::consts::PI);
        let a = radial_point(&Cx::from_f64(1.0, 0.0), &fl(la));
        let c = radial_point(&Cx::from_c64(Complex64::from_polar(1.0, ang)), &fl(lc));
        let defect = la + lc - dist_cx(&a, &c).to_f64();
        worst = worst.max(defect);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dp(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(Complex64::new(re, im)).unwrap()
    }

    #[test]
    fn distance_closed_forms() {
        assert_eq!(dist(&dp(0.0, 0.0), &dp(0.0, 0.0)), 0.0);
        assert!((dist(&dp(0.0, 0.0), &dp(0.5, 0.0)) - 3f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn rejects_boundary_points() {
        assert!(DiskPoint::new(Complex64::new(1.0 - 1e-15, 0.0)).is_err());
        assert!(DiskPoint::new(Complex64::new(0.999, 0.0)).is_ok());
    }

    #[test]
    fn geodesic_midpoint_is_origin() {
        let m = geodesic(&dp(-0.5, 0.0).into(), &dp(0.5, 0.0).into(), 0.5, 40.0).unwrap();
        assert!(m.to_c64().norm() < 1e-15);
    }

    #[test]
    fn geodesic_to_ideal_is_radial() {
        for t in [0.1, 0.5, 0.9] {
            let p = geodesic(&DiskPoint::origin().into(), &IdealPoint::new(0.0).into(), t, 40.0).unwrap();
            let c = p.to_c64();
            assert!(c.im.abs() < 1e-15 && c.re > 0.0);
        }
    }

    #[test]
    fn angles_at_origin() {
        let o = DiskPoint::origin();
        let a = angle_at(&o, &dp(0.5, 0.0).into(), &dp(0.0, 0.5).into()).unwrap();
        assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
        let b = angle_at(&o, &dp(0.5, 0.0).into(), &dp(-0.5, 0.0).into()).unwrap();
        assert!((b - std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn hull_projection_simple_cases() {
        let x: Pt = dp(0.0, 0.5).into();
        let p = project_to_hull(&x, &[dp(-0.5, 0.0).into(), dp(0.5, 0.0).into()]).unwrap();
        assert!(p.to_c64().norm() < 1e-15);
        let q = project_to_hull(&x, &[x.clone()]).unwrap();
        assert!((q.to_c64() - Complex64::new(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn to_origin_round_trip() {
        let c = dp(0.3, -0.4);
        let t = to_origin(&c);
        assert!(t.apply(c.cx()).abs().to_f64() < 1e-15);
        let z = Cx::from_f64(0.1, 0.2);
        assert!((&t.invert(&t.apply(&z)) - &z).abs().to_f64() < 1e-15);
    }
}
