//! Markov pieces of the boundary circle, continuation of periodic points
//! along paths of anti-Blaschke products, and the piece permutation and braid
//! word a path induces.
//!
//! Strands live on the unit circle, so their cyclic order never changes. The
//! braid is read in the chart that cuts the circle at angle 0: a strand that
//! passes the cut moves from one end of the linear order to the other, which
//! is recorded as `d` consecutive generators.

use crate::blaschke::{AntiBlaschke, BlaschkeJson, EPS_SEP};
use crate::error::{Error, Result};
use crate::lamination::{m_minus_d, Angle};
use crate::mp::{self, fl, Cx};
use rug::Float;
use serde::{Deserialize, Serialize};

/// Bisections allowed per sample interval before giving up.
pub const MAX_REFINEMENTS: usize = 20;

/// Largest denominator `|(−d)^p − 1|` accepted by the seed search.
const MAX_DENOMINATOR: i64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovLabeling {
    pub d: usize,
    /// Piece `k` is the arc `[k/(d+1), (k+1)/(d+1)]`.
    pub pieces: Vec<(Angle, Angle)>,
    pub transition: Vec<Vec<u8>>,
}

/// Markov partition of `m_{−d}` by its fixed points. The transition matrix is
/// read off the dynamics: piece `k` covers piece `j` when the midpoint of `j`
/// has a preimage inside `k`.
pub fn markov_base(d: usize) -> Result<MarkovLabeling> {
    if d < 2 {
        return Err(Error::Invalid("Markov partition needs d ≥ 2".into()));
    }
    let n = d as i64 + 1;
    let pieces: Vec<(Angle, Angle)> = (0..n).map(|k| (Angle::new(k, n), Angle::new(k + 1, n))).collect();
    let mut transition = vec![vec![0u8; d + 1]; d + 1];
    for (j, _) in pieces.iter().enumerate() {
        let mid = Angle::new(2 * j as i64 + 1, 2 * n);
        for p in crate::lamination::preimages(mid, d) {
            let k = p.piece(d);
            if Angle::new(k as i64, n) != p {
                transition[k][j] = 1;
            }
        }
    }
    Ok(MarkovLabeling { d, pieces, transition })
}

/// One angle of exact period `period` under `m_{−d}` inside each open piece,
/// the one nearest the middle of the piece.
pub fn seed_periodic_points(d: usize, period: usize) -> Result<Vec<Angle>> {
    if d < 2 || period < 3 {
        return Err(Error::Invalid("seeds need d ≥ 2 and period ≥ 3".into()));
    }
    let mut pow: i64 = 1;
    for _ in 0..period {
        pow = pow.checked_mul(-(d as i64)).filter(|x| x.abs() <= MAX_DENOMINATOR).ok_or_else(|| {
            Error::SizeLimit(format!("denominator of period-{period} points for d = {d} exceeds {MAX_DENOMINATOR}"))
        })?;
    }
    let den = (pow - 1).abs();
    let n = d as i64 + 1;
    let mut best: Vec<Option<(i64, Angle)>> = vec![None; d + 1];
    for j in 0..den {
        let t = Angle::new(j, den);
        if exact_period(t, d, period) != Some(period) {
            continue;
        }
        let k = t.piece(d);
        if Angle::new(k as i64, n) == t {
            continue;
        }
        // distance to the midpoint, in units of 1/(2·den·n)
        let off = (2 * j * n - (2 * k as i64 + 1) * den).abs();
        if best[k].map(|(o, _)| off < o).unwrap_or(true) {
            best[k] = Some((off, t));
        }
    }
    best.into_iter()
        .enumerate()
        .map(|(k, b)| b.map(|x| x.1).ok_or_else(|| Error::Invalid(format!("no period-{period} point in piece {k}"))))
        .collect()
}

fn exact_period(t: Angle, d: usize, max: usize) -> Option<usize> {
    let mut x = t;
    for k in 1..=max {
        x = m_minus_d(x, d);
        if x == t {
            return Some(k);
        }
    }
    None
}

/// Interpolates parameters linearly and the rotation `λ` along the shorter arc.
pub fn interpolate(a: &AntiBlaschke, b: &AntiBlaschke, t: f64) -> Result<AntiBlaschke> {
    if a.degree() != b.degree() {
        return Err(Error::Invalid("maps along a path must share a degree".into()));
    }
    let tf = fl(t);
    let params: Vec<Cx> = a
        .params()
        .iter()
        .zip(b.params())
        .map(|(x, y)| x + &(&(y - x) * &Cx::real(tf.clone())))
        .collect();
    let turn = (b.lambda() * &a.lambda().conj()).arg_turns();
    let turn = if turn > 0.5 { turn - 1u32 } else { turn };
    let rot = Cx::expi_turns(&Float::with_val(mp::precision(), turn * &tf));
    AntiBlaschke::from_parts(a.lambda() * &rot, params)
}

/// The loop `e^{2πiθ} z̄^d`, `θ` from 0 to `turns`, in `steps` samples.
pub fn rotation_loop(d: usize, turns: i64, steps: usize) -> Vec<AntiBlaschke> {
    let base = AntiBlaschke::monomial(d);
    (0..=steps)
        .map(|k| {
            let th = Float::with_val(mp::precision(), turns * k as i64) / steps as u32;
            AntiBlaschke::from_parts(Cx::expi_turns(&th), base.params().to_vec()).expect("monomial parameters are inside")
        })
        .collect()
}

/// Straight segment from `f0` to `f1` in `steps` samples; `λ` takes the
/// shorter arc plus `winding` full turns.
pub fn line_path(f0: &AntiBlaschke, f1: &AntiBlaschke, winding: i64, steps: usize) -> Result<Vec<AntiBlaschke>> {
    if steps == 0 {
        return Err(Error::Invalid("a path needs at least one step".into()));
    }
    let prec = mp::precision();
    let turn = (f1.lambda() * &f0.lambda().conj()).arg_turns();
    let turn = if turn > 0.5 { turn - 1u32 } else { turn } + Float::with_val(prec, winding);
    (0..=steps)
        .map(|k| {
            let s = k as f64 / steps as f64;
            let mid = interpolate(f0, f1, s)?;
            let rot = Cx::expi_turns(&Float::with_val(prec, Float::with_val(prec, &turn * k as u32) / steps as u32));
            AntiBlaschke::from_parts(f0.lambda() * &rot, mid.params().to_vec())
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct TracedPath {
    pub d: usize,
    pub period: usize,
    /// Input samples, endpoints included.
    pub maps: Vec<AntiBlaschke>,
    /// Strand `j` starts in piece `j`; positions in turns per accepted step.
    pub tracked: Vec<Vec<f64>>,
    pub start: Vec<Float>,
    pub end: Vec<Float>,
    /// Piece of the end map holding the end of each strand.
    pub end_pieces: Vec<usize>,
    /// `s` with `𝒦_{s(i)}(1) = 𝒦_i(0)`: the strand that ends in piece `i`.
    pub permutation: Vec<usize>,
    /// Signed generator indices, `±i` for `σ_i^{±1}`.
    pub braid: Vec<i32>,
    /// Largest `|f^p(x) − x|` (turns) per input sample.
    pub residuals: Vec<f64>,
    pub refinements: usize,
}

impl TracedPath {
    /// End positions ordered by piece, the seeds of a path continuing this one.
    pub fn end_seeds(&self) -> Vec<Float> {
        self.permutation.iter().map(|&j| self.end[j].clone()).collect()
    }

    pub fn to_json(&self) -> TraceJson {
        TraceJson {
            d: self.d,
            period: self.period,
            permutation: self.permutation.clone(),
            braid: self.braid.clone(),
            residuals: self.residuals.clone(),
            refinements: self.refinements,
            start: self.start.iter().map(|x| x.to_f64()).collect(),
            end: self.end.iter().map(|x| x.to_f64()).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceJson {
    pub d: usize,
    pub period: usize,
    pub permutation: Vec<usize>,
    pub braid: Vec<i32>,
    pub residuals: Vec<f64>,
    pub refinements: usize,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
}

/// One sample of a path file: parameter stamp, rotation `λ = e^{2πi·rotation}`
/// and the normalized map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathRecord {
    pub t: f64,
    #[serde(default)]
    pub rotation: f64,
    pub map: BlaschkeJson,
}

pub fn path_from_json(records: &[PathRecord]) -> Result<Vec<AntiBlaschke>> {
    if records.len() < 2 {
        return Err(Error::Invalid("a path needs at least two samples".into()));
    }
    if records.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::Invalid("path stamps must increase".into()));
    }
    records
        .iter()
        .map(|r| {
            let f = AntiBlaschke::from_json(&r.map)?;
            AntiBlaschke::from_parts(Cx::expi_turns_f64(r.rotation), f.params().to_vec())
        })
        .collect()
}

/// Signed distance `x − y` reduced to `(−1/2, 1/2]` turns.
fn wrap(x: &Float) -> Float {
    let p = x.prec();
    let mut r = Float::with_val(p, x - Float::with_val(p, x.round_ref()));
    if r <= -0.5 {
        r += 1u32;
    }
    r
}

/// `f^p(e^{2πit})` angle minus `t`, and the derivative of the lifted map minus 1.
fn periodic_defect(f: &AntiBlaschke, p: usize, t: &Float) -> (Float, Float) {
    let prec = mp::precision();
    let mut z = Cx::expi_turns(t);
    let mut slope = fl(1.0);
    for _ in 0..p {
        // circle speed Σ (1 − |b|²)/|z̄ − b|², read off the point itself
        let w = z.conj();
        let mut sp = fl(0.0);
        for b in f.params() {
            sp += b.one_minus_norm_sqr() / (&w - b).norm_sqr();
        }
        slope *= sp;
        z = f.eval(&z);
    }
    if p % 2 == 1 {
        slope = -slope;
    }
    let h = wrap(&Float::with_val(prec, z.arg_turns() - t));
    (h, slope - 1u32)
}

/// Newton from `guess` for a period-`p` point; `None` if it leaves the window
/// of half the separation around `t0` or does not settle.
fn newton_periodic(f: &AntiBlaschke, p: usize, t0: &Float, guess: &Float) -> Option<Float> {
    let prec = mp::precision();
    let tol = Float::with_val(prec, mp::epsilon() * 1024u32);
    let mut t = guess.clone();
    for _ in 0..60 {
        let (h, dh) = periodic_defect(f, p, &t);
        let step = Float::with_val(prec, &h / &dh);
        t -= &step;
        if wrap(&Float::with_val(prec, &t - t0)).abs() > EPS_SEP / 2.0 {
            return None;
        }
        // quadratic convergence: the next correction would be below `tol`
        if Float::with_val(prec, step.square_ref()) <= tol {
            return Some(t);
        }
    }
    None
}

fn piece_of(fix: &[Float], x: &Float) -> usize {
    // piece k runs ccw from label k to label k + 1
    let n = fix.len();
    let frac = |y: &Float| mp::frac_turns(y);
    let xs = frac(x);
    for k in 0..n {
        let a = frac(&fix[k]);
        let len = frac(&Float::with_val(mp::precision(), &fix[(k + 1) % n] - &a));
        let off = frac(&Float::with_val(mp::precision(), &xs - &a));
        if off > 0 && off < len {
            return k;
        }
    }
    n
}

fn min_separation(pos: &[Float]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            m = m.min(wrap(&Float::with_val(mp::precision(), &pos[i] - &pos[j])).abs().to_f64());
        }
    }
    m
}

struct Tracer {
    period: usize,
    lifts: Vec<Float>,
    tracked: Vec<Vec<f64>>,
    braid: Vec<i32>,
    refinements: usize,
    level: usize,
    streak: usize,
    /// Last motion per unit of sub-step, for the Newton predictor.
    velocity: Vec<Float>,
}

impl Tracer {
    fn try_step(&mut self, g: &AntiBlaschke, step: u64) -> Result<bool> {
        let prec = mp::precision();
        let next: Option<Vec<Float>> = self
            .lifts
            .iter()
            .zip(&self.velocity)
            .map(|(t, v)| {
                let guess = Float::with_val(prec, t + Float::with_val(prec, v * step));
                newton_periodic(g, self.period, t, &guess)
            })
            .collect();
        let Some(next) = next else { return Ok(false) };
        for ((v, x), t) in self.velocity.iter_mut().zip(&next).zip(&self.lifts) {
            *v = Float::with_val(prec, Float::with_val(prec, x - t) / step);
        }
        let sep = min_separation(&next);
        if sep < EPS_SEP {
            return Err(Error::Collision(format!("strands within {sep:e} turns")));
        }
        self.record_crossings(&next);
        for (tr, x) in self.tracked.iter_mut().zip(&next) {
            tr.push(x.to_f64());
        }
        self.lifts = next;
        Ok(true)
    }

    /// Crosses one sample interval in dyadic sub-steps of size `2^{−level}`.
    /// The level is kept between intervals, drops by one after a success and
    /// may not exceed the refinement cap.
    fn advance(&mut self, a: &AntiBlaschke, b: &AntiBlaschke) -> Result<()> {
        // position in units of 2^{−MAX_REFINEMENTS}
        let full = 1u64 << MAX_REFINEMENTS;
        let mut u = 0u64;
        while u < full {
            let step = full >> self.level;
            let v = u + step;
            let g = if v == full { b.clone() } else { interpolate(a, b, v as f64 / full as f64)? };
            if self.try_step(&g, step)? {
                u = v;
                self.streak += 1;
                if self.level > 0 && self.streak >= 4 && (u / step).is_multiple_of(2) {
                    self.level -= 1;
                    self.streak = 0;
                }
            } else if self.level >= MAX_REFINEMENTS {
                return Err(Error::StepTooLarge(MAX_REFINEMENTS));
            } else {
                self.level += 1;
                self.refinements += 1;
                self.streak = 0;
            }
        }
        Ok(())
    }

    /// Passing the cut at angle 0 ccw moves a strand from the top of the
    /// linear order to the bottom: `σ_d ⋯ σ_1`; cw is the inverse word.
    fn record_crossings(&mut self, next: &[Float]) {
        let n = self.lifts.len() as i32;
        for (old, new) in self.lifts.iter().zip(next) {
            let (fo, fnw) = (old.clone().floor(), new.clone().floor());
            if fnw > fo {
                self.braid.extend((1..n).rev());
            } else if fnw < fo {
                self.braid.extend((1..n).map(|i| -i));
            }
        }
    }
}

/// Follows one period-`period` point per piece along the sampled path.
/// `seeds[k]` must lie in piece `k` of the first map.
pub fn trace(path: &[AntiBlaschke], seeds: &[Float], period: usize) -> Result<TracedPath> {
    if path.len() < 2 {
        return Err(Error::Invalid("a path needs at least two samples".into()));
    }
    let d = path[0].degree();
    if seeds.len() != d + 1 {
        return Err(Error::Invalid(format!("need {} seeds, got {}", d + 1, seeds.len())));
    }
    if period < 3 {
        return Err(Error::Invalid("periodic points of period ≥ 3 are required".into()));
    }
    let fix0 = path[0].boundary_fixed_points()?.lifts;
    let mut start = Vec::with_capacity(d + 1);
    for (k, s) in seeds.iter().enumerate() {
        let x = newton_periodic(&path[0], period, s, s).ok_or_else(|| Error::Invalid(format!("seed {k} is not near a period-{period} point")))?;
        if piece_of(&fix0, &x) != k {
            return Err(Error::Invalid(format!("seed {k} is not in piece {k}")));
        }
        start.push(mp::frac_turns(&x));
    }
    let mut tr = Tracer {
        period,
        lifts: start.clone(),
        tracked: start.iter().map(|x| vec![x.to_f64()]).collect(),
        braid: Vec::new(),
        refinements: 0,
        level: 0,
        streak: 0,
        velocity: vec![Float::new(mp::precision()); d + 1],
    };
    let order0 = linear_order(&start);
    let mut residuals = vec![max_residual(&path[0], period, &start)];
    for w in path.windows(2) {
        tr.advance(&w[0], &w[1])?;
        residuals.push(max_residual(&w[1], period, &tr.lifts));
    }
    let end: Vec<Float> = tr.lifts.iter().map(mp::frac_turns).collect();
    let fix1 = path[path.len() - 1].boundary_fixed_points()?.lifts;
    let end_pieces: Vec<usize> = end.iter().map(|x| piece_of(&fix1, x)).collect();
    let mut permutation = vec![usize::MAX; d + 1];
    for (j, &k) in end_pieces.iter().enumerate() {
        if k > d || permutation[k] != usize::MAX {
            return Err(Error::Collision("strands do not end in distinct pieces".into()));
        }
        permutation[k] = j;
    }
    // the braid must carry the start order of strands to the end order
    if apply_word(&order0, &tr.braid) != linear_order(&end) {
        return Err(Error::Collision("strand order disagrees with the braid word".into()));
    }
    Ok(TracedPath {
        d,
        period,
        maps: path.to_vec(),
        tracked: tr.tracked,
        start,
        end,
        end_pieces,
        permutation,
        braid: tr.braid,
        residuals,
        refinements: tr.refinements,
    })
}

fn max_residual(f: &AntiBlaschke, p: usize, pos: &[Float]) -> f64 {
    pos.iter().map(|t| periodic_defect(f, p, t).0.abs().to_f64()).fold(0.0, f64::max)
}

/// Strand indices sorted by angle in `[0, 1)`.
fn linear_order(pos: &[Float]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pos.len()).collect();
    idx.sort_by(|&a, &b| mp::frac_turns(&pos[a]).partial_cmp(&mp::frac_turns(&pos[b])).unwrap());
    idx
}

/// Applies the position swaps of a braid word to a linear order of strands.
pub fn apply_word(order: &[usize], word: &[i32]) -> Vec<usize> {
    let mut o = order.to_vec();
    for &g in word {
        let i = g.unsigned_abs() as usize;
        o.swap(i - 1, i);
    }
    o
}

/// Cancels adjacent `σ_i σ_i^{-1}` pairs until none remain.
pub fn free_reduce(word: &[i32]) -> Vec<i32> {
    let mut out: Vec<i32> = Vec::with_capacity(word.len());
    for &g in word {
        if out.last() == Some(&-g) {
            out.pop();
        } else {
            out.push(g);
        }
    }
    out
}

pub fn inverse_word(word: &[i32]) -> Vec<i32> {
    word.iter().rev().map(|g| -g).collect()
}

pub fn inverse_permutation(p: &[usize]) -> Vec<usize> {
    let mut q = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        q[x] = i;
    }
    q
}

fn same_map(a: &AntiBlaschke, b: &AntiBlaschke) -> bool {
    let close = |x: &Cx, y: &Cx| (x - y).abs().to_f64() < 1e-12;
    a.degree() == b.degree() && close(a.lambda(), b.lambda()) && a.params().iter().zip(b.params()).all(|(x, y)| close(x, y))
}

/// `a` followed by `b`. The end map and end positions of `a` must be the
/// start map and seeds of `b`.
pub fn compose(a: &TracedPath, b: &TracedPath) -> Result<TracedPath> {
    if a.d != b.d || a.period != b.period {
        return Err(Error::EndpointMismatch);
    }
    if !same_map(a.maps.last().unwrap(), &b.maps[0]) {
        return Err(Error::EndpointMismatch);
    }
    let seeds = a.end_seeds();
    for (x, y) in seeds.iter().zip(&b.start) {
        if wrap(&Float::with_val(mp::precision(), x - y)).abs().to_f64() > 1e-9 {
            return Err(Error::EndpointMismatch);
        }
    }
    let tracked = (0..=a.d)
        .map(|j| {
            let mut t = a.tracked[j].clone();
            t.extend_from_slice(&b.tracked[a.end_pieces[j]][1..]);
            t
        })
        .collect();
    let end: Vec<Float> = (0..=a.d).map(|j| b.end[a.end_pieces[j]].clone()).collect();
    let end_pieces: Vec<usize> = (0..=a.d).map(|j| b.end_pieces[a.end_pieces[j]]).collect();
    let permutation: Vec<usize> = b.permutation.iter().map(|&k| a.permutation[k]).collect();
    let mut braid = a.braid.clone();
    braid.extend_from_slice(&b.braid);
    let mut maps = a.maps.clone();
    maps.extend_from_slice(&b.maps[1..]);
    let mut residuals = a.residuals.clone();
    residuals.extend_from_slice(&b.residuals[1..]);
    Ok(TracedPath {
        d: a.d,
        period: a.period,
        maps,
        tracked,
        start: a.start.clone(),
        end,
        end_pieces,
        permutation,
        braid: free_reduce(&braid),
        residuals,
        refinements: a.refinements + b.refinements,
    })
}

/// Seeds for [`trace`] from exact angles.
pub fn seeds_from_angles(angles: &[Angle]) -> Vec<Float> {
    angles
        .iter()
        .map(|a| {
            let r = a.ratio();
            Float::with_val(mp::precision(), *r.numer()) / *r.denom() as f64
        })
        .collect()
}

/// Period-`period` seeds for `f`, one per piece, carried from the exact
/// angles of `z̄^d` along the straight path to `f`.
pub fn seeds_for(f: &AntiBlaschke, period: usize, steps: usize) -> Result<Vec<Float>> {
    let d = f.degree();
    let base = seeds_from_angles(&seed_periodic_points(d, period)?);
    let t = trace(&line_path(&AntiBlaschke::monomial(d), f, 0, steps)?, &base, period)?;
    Ok(t.end_seeds())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_helpers() {
        assert_eq!(free_reduce(&[1, 2, -2, -1, 3]), vec![3]);
        assert_eq!(inverse_word(&[1, -2, 3]), vec![-3, 2, -1]);
        assert_eq!(apply_word(&[0, 1, 2], &[2, 1]), vec![2, 0, 1]);
        assert_eq!(inverse_permutation(&[1, 2, 0]), vec![2, 0, 1]);
    }

    #[test]
    fn wrap_is_centered() {
        let _g = mp::push_precision(128);
        assert_eq!(wrap(&fl(0.75)).to_f64(), -0.25);
        assert_eq!(wrap(&fl(-0.75)).to_f64(), 0.25);
        assert_eq!(wrap(&fl(0.5)).to_f64(), 0.5);
    }
}
