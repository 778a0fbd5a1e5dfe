//! Exact circle dynamics of `m_{-d}(t) = -d·t mod 1`, its 2-cycles, the
//! invariant laminations they generate, and dual trees.

use crate::error::{Error, Result};
use crate::ribbontree::RibbonTree;
use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub const DEFAULT_DEPTH_LIMIT: usize = 8;

/// Exact angle in turns, normalized to `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Angle(Ratio<i64>);

impl Angle {
    pub fn new(p: i64, q: i64) -> Self {
        Angle::from_ratio(Ratio::new(p, q))
    }

    pub fn from_ratio(r: Ratio<i64>) -> Self {
        let f = r - r.floor();
        Angle(f)
    }

    pub fn zero() -> Self {
        Angle(Ratio::from_integer(0))
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let r = match s.split_once('/') {
            Some((p, q)) => {
                let p: i64 = p.trim().parse().map_err(|_| Error::Invalid(format!("bad angle {s}")))?;
                let q: i64 = q.trim().parse().map_err(|_| Error::Invalid(format!("bad angle {s}")))?;
                if q == 0 {
                    return Err(Error::Invalid(format!("bad angle {s}")));
                }
                Ratio::new(p, q)
            }
            None => Ratio::from_integer(s.parse().map_err(|_| Error::Invalid(format!("bad angle {s}")))?),
        };
        Ok(Angle::from_ratio(r))
    }

    /// Markov piece index: `floor(t·(d+1))`.
    pub fn piece(&self, d: usize) -> usize {
        (self.0 * Ratio::from_integer(d as i64 + 1)).floor().to_integer() as usize
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self.0.denom() == 1 {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

pub fn m_minus_d(t: Angle, d: usize) -> Angle {
    Angle::from_ratio(-t.0 * Ratio::from_integer(d as i64))
}

/// All `d` preimages of `t` under `m_{-d}`, sorted.
pub fn preimages(t: Angle, d: usize) -> Vec<Angle> {
    let dd = Ratio::from_integer(d as i64);
    let mut v: Vec<Angle> = (0..d as i64).map(|j| Angle::from_ratio((Ratio::from_integer(j) - t.0) / dd)).collect();
    v.sort();
    v
}

pub fn fixed_points(d: usize) -> Vec<Angle> {
    (0..=d as i64).map(|k| Angle::new(k, d as i64 + 1)).collect()
}

/// Unordered pair of distinct angles, stored with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Chord {
    pub a: Angle,
    pub b: Angle,
}

impl Chord {
    pub fn new(x: Angle, y: Angle) -> Result<Self> {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => Ok(Chord { a: x, b: y }),
            std::cmp::Ordering::Greater => Ok(Chord { a: y, b: x }),
            std::cmp::Ordering::Equal => Err(Error::Invalid(format!("chord endpoints coincide at {x}"))),
        }
    }

    /// Strict interleaving of endpoints; shared endpoints never cross.
    pub fn crosses(&self, o: &Chord) -> bool {
        let inside = |t: Angle| self.a < t && t < self.b;
        let on = |t: Angle| t == self.a || t == self.b;
        if on(o.a) || on(o.b) {
            return false;
        }
        inside(o.a) != inside(o.b)
    }

    /// Whether `t` lies strictly in the arc `(a, b)`.
    pub fn arc_contains(&self, t: Angle) -> bool {
        self.a < t && t < self.b
    }

    /// Whether fixed points of `m_{-d}` lie strictly on both sides.
    pub fn separates_fixed_points(&self, d: usize) -> bool {
        let fp = fixed_points(d);
        let inner = fp.iter().filter(|&&t| self.arc_contains(t)).count();
        let outer = fp.iter().filter(|&&t| t != self.a && t != self.b && !self.arc_contains(t)).count();
        inner > 0 && outer > 0
    }

    pub fn image(&self, d: usize) -> Option<Chord> {
        Chord::new(m_minus_d(self.a, d), m_minus_d(self.b, d)).ok()
    }
}

impl fmt::Display for Chord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.a, self.b)
    }
}

/// All 2-cycles of `m_{-d}` as chords, sorted.
pub fn two_cycles(d: usize) -> Vec<Chord> {
    let q = (d * d - 1) as i64;
    let mut out = BTreeSet::new();
    for k in 0..q {
        let t = Angle::new(k, q);
        let s = m_minus_d(t, d);
        if s != t {
            out.insert(Chord::new(t, s).unwrap());
        }
    }
    out.into_iter().collect()
}

/// The 2-cycle joining Markov pieces `i` and `j`.
pub fn two_cycle_between(d: usize, i: usize, j: usize) -> Option<Chord> {
    two_cycles(d).into_iter().find(|c| {
        let (p, q) = (c.a.piece(d), c.b.piece(d));
        (p == i && q == j) || (p == j && q == i)
    })
}

pub fn check_simple(gens: &[Chord]) -> Result<()> {
    for (i, c) in gens.iter().enumerate() {
        for e in &gens[i + 1..] {
            let share = c.a == e.a || c.a == e.b || c.b == e.a || c.b == e.b;
            if c.crosses(e) || share {
                return Err(Error::NotSimple(format!("{c} and {e}")));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lamination {
    pub d: usize,
    pub generators: Vec<Chord>,
    /// Leaves in insertion order; `level[i]` is the pullback depth of leaf `i`.
    pub leaves: Vec<Chord>,
    pub level: Vec<usize>,
    pub depth: usize,
}

impl Lamination {
    pub fn contains(&self, c: &Chord) -> bool {
        self.leaves.contains(c)
    }

    pub fn new_leaf_counts(&self) -> Vec<usize> {
        let mut v = vec![0; self.depth + 1];
        for &l in &self.level {
            v[l] += 1;
        }
        v
    }

    /// Pairs of crossing leaves (empty for a valid lamination).
    pub fn crossings(&self) -> Vec<(Chord, Chord)> {
        let mut out = Vec::new();
        for (i, c) in self.leaves.iter().enumerate() {
            for e in &self.leaves[i + 1..] {
                if c.crosses(e) {
                    out.push((*c, *e));
                }
            }
        }
        out
    }

    /// Checks forward invariance: every leaf above depth 0 maps to a leaf one
    /// level shallower, generators map to themselves.
    pub fn invariance_violations(&self) -> Vec<Chord> {
        let mut out = Vec::new();
        for (c, &lv) in self.leaves.iter().zip(&self.level) {
            let ok = match c.image(self.d) {
                None => true,
                Some(img) => {
                    if lv == 0 {
                        img == *c
                    } else {
                        self.leaves
                            .iter()
                            .zip(&self.level)
                            .any(|(l, &ll)| *l == img && (ll + 1 == lv || ll == 0))
                    }
                }
            };
            if !ok {
                out.push(*c);
            }
        }
        out
    }

    pub fn to_json(&self) -> LaminationJson {
        let s = |c: &Chord| [c.a.to_string(), c.b.to_string()];
        LaminationJson {
            d: self.d,
            depth: self.depth,
            generators: self.generators.iter().map(s).collect(),
            leaves: self.leaves.iter().map(s).collect(),
            level: self.level.clone(),
        }
    }

    pub fn from_json(j: &LaminationJson) -> Result<Self> {
        let p = |v: &[String; 2]| -> Result<Chord> { Chord::new(Angle::parse(&v[0])?, Angle::parse(&v[1])?) };
        let generators = j.generators.iter().map(p).collect::<Result<Vec<_>>>()?;
        let leaves = j.leaves.iter().map(p).collect::<Result<Vec<_>>>()?;
        if leaves.len() != j.level.len() {
            return Err(Error::Invalid("leaf and level lists differ in length".into()));
        }
        Ok(Lamination { d: j.d, generators, leaves, level: j.level.clone(), depth: j.depth })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LaminationJson {
    pub d: usize,
    pub depth: usize,
    pub generators: Vec<[String; 2]>,
    pub leaves: Vec<[String; 2]>,
    pub level: Vec<usize>,
}

/// Perfect matchings between `xs` and `ys` (as permutations of `ys`).
fn matchings(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    fn rec(k: usize, perm: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == perm.len() {
            out.push(perm.clone());
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            rec(k + 1, perm, out);
            perm.swap(k, i);
        }
    }
    rec(0, &mut perm, &mut out);
    out
}

/// Generators plus all pullbacks up to `depth`. Each pullback step must
/// admit exactly one matching of preimage endpoints that is non-crossing,
/// avoids existing leaves and does not separate fixed points (except by
/// reproducing an existing leaf).
pub fn generate(generators: &[Chord], d: usize, depth: usize) -> Result<Lamination> {
    if d < 2 {
        return Err(Error::Invalid("d must be at least 2".into()));
    }
    if depth > DEFAULT_DEPTH_LIMIT {
        return Err(Error::SizeLimit(format!("depth {depth} exceeds limit {DEFAULT_DEPTH_LIMIT}")));
    }
    if d > 7 {
        return Err(Error::SizeLimit(format!("pullback matching limited to d ≤ 7 (got {d})")));
    }
    check_simple(generators)?;
    let mut gens = generators.to_vec();
    gens.sort();
    let mut lam = Lamination { d, generators: gens.clone(), leaves: gens.clone(), level: vec![0; gens.len()], depth };
    let mut present: BTreeSet<Chord> = gens.iter().copied().collect();
    let perms = matchings(d);
    let mut frontier = gens;
    for k in 1..=depth {
        let mut next = Vec::new();
        for leaf in &frontier {
            let xs = preimages(leaf.a, d);
            let ys = preimages(leaf.b, d);
            let mut good: Vec<Vec<Chord>> = Vec::new();
            for p in &perms {
                let cand: Option<Vec<Chord>> = xs.iter().zip(p).map(|(&x, &j)| Chord::new(x, ys[j]).ok()).collect();
                let Some(cand) = cand else { continue };
                let ok = cand.iter().enumerate().all(|(i, c)| {
                    let existing = present.contains(c);
                    let fresh_ok = existing || !c.separates_fixed_points(d);
                    fresh_ok
                        && (existing || present.iter().all(|l| !l.crosses(c)))
                        && cand[i + 1..].iter().all(|e| !e.crosses(c))
                });
                if ok {
                    good.push(cand);
                }
            }
            if good.len() != 1 {
                return Err(Error::NonUniqueMatching(good.len()));
            }
            for c in good.pop().unwrap() {
                if present.insert(c) {
                    lam.leaves.push(c);
                    lam.level.push(k);
                    next.push(c);
                }
            }
        }
        frontier = next;
    }
    Ok(lam)
}

/// Complementary regions of the closed disk minus the generator chords.
/// Each region lists its boundary events in ccw order: `Ok(k)` for fixed
/// point `k`, `Err(c)` for crossing generator `c` into a neighbor.
fn regions(gens: &[Chord], d: usize) -> Vec<Vec<std::result::Result<usize, usize>>> {
    // cut points: chord endpoints, each tagged (angle, chord index)
    let mut cuts: Vec<(Angle, usize)> = gens.iter().enumerate().flat_map(|(i, c)| [(c.a, i), (c.b, i)]).collect();
    cuts.sort();
    let m = cuts.len();
    let fps = fixed_points(d);
    if m == 0 {
        return vec![(0..=d).map(Ok).collect()];
    }
    // arc i runs from cuts[i] to cuts[i+1] (cyclically)
    let arc_fps = |i: usize| -> Vec<usize> {
        let lo = cuts[i].0;
        let hi = cuts[(i + 1) % m].0;
        let mut v: Vec<(Angle, usize)> = fps
            .iter()
            .enumerate()
            .filter(|(_, &t)| if lo < hi { lo < t && t < hi } else { t > lo || t < hi })
            .map(|(k, &t)| {
                // order along the arc: shift angles below lo by one turn
                let key = if t > lo { t.ratio() } else { t.ratio() + 1 };
                (Angle(key), k)
            })
            .collect();
        v.sort();
        v.into_iter().map(|(_, k)| k).collect()
    };
    let partner = |i: usize| -> usize {
        let (t, c) = cuts[i];
        let other = if gens[c].a == t { gens[c].b } else { gens[c].a };
        cuts.iter().position(|&(s, e)| s == other && e == c).unwrap()
    };
    let mut seen = vec![false; m];
    let mut out = Vec::new();
    for start in 0..m {
        if seen[start] {
            continue;
        }
        let mut events = Vec::new();
        let mut arc = start;
        while !seen[arc] {
            seen[arc] = true;
            events.extend(arc_fps(arc).into_iter().map(Ok));
            let end = (arc + 1) % m;
            events.push(Err(cuts[end].1));
            arc = partner(end);
        }
        out.push(events);
    }
    out
}

/// Dual tree of a simple generator collection: one vertex per region, an
/// edge across each chord, one end per fixed point; fixed point 0 is marked.
pub fn dual_tree(generators: &[Chord], d: usize) -> Result<RibbonTree> {
    check_simple(generators)?;
    let regs = regions(generators, d);
    let r = regs.len();
    // vertices: regions 0..r, then ends r..r+d+1 (end k is vertex r+k)
    let mut rot: Vec<Vec<usize>> = vec![Vec::new(); r + d + 1];
    let mut chord_regions: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (ri, ev) in regs.iter().enumerate() {
        for e in ev {
            if let Err(c) = e {
                chord_regions.entry(*c).or_default().push(ri);
            }
        }
    }
    for (ri, ev) in regs.iter().enumerate() {
        for e in ev {
            match *e {
                Ok(k) => {
                    rot[ri].push(r + k);
                    rot[r + k].push(ri);
                }
                Err(c) => {
                    let other = chord_regions[&c].iter().copied().find(|&x| x != ri).unwrap();
                    rot[ri].push(other);
                }
            }
        }
    }
    RibbonTree::new(rot, r, None)
}

/// Inverse of [`dual_tree`]: the 2-cycle chords dual to the core edges of `t`.
pub fn dual_lamination(t: &RibbonTree) -> Result<Vec<Chord>> {
    if t.inserted().is_some() {
        return Err(Error::Invalid("dual lamination needs a tree without inserted point".into()));
    }
    let d = t.degree_d();
    let labels = t.end_labels();
    let par = t.parents();
    let mut out = Vec::new();
    for v in t.core() {
        let Some(p) = par[v] else { continue };
        if t.is_end(p) {
            continue;
        }
        // ends below v (away from the marked end) form a contiguous label interval
        let mut stack = vec![v];
        let mut below = Vec::new();
        while let Some(u) = stack.pop() {
            for &w in t.neighbors(u) {
                if par[w] == Some(u) {
                    if t.is_end(w) {
                        below.push(labels[&w]);
                    } else {
                        stack.push(w);
                    }
                }
            }
        }
        below.sort();
        let (i, j) = (below[0], *below.last().unwrap());
        if j - i + 1 != below.len() || i == 0 {
            return Err(Error::Invalid("end labels below a core edge are not an interval".into()));
        }
        let c = two_cycle_between(d, i - 1, j).ok_or_else(|| Error::Invalid(format!("no 2-cycle between pieces {} and {j}", i - 1)))?;
        out.push(c);
    }
    out.sort();
    Ok(out)
}

/// Union-find partition of `angles` (together with all leaf endpoints) by
/// chains of leaves; only classes meeting `angles` are returned.
pub fn quotient_classes(lam: &Lamination, angles: &[Angle]) -> Vec<Vec<Angle>> {
    let mut idx: BTreeMap<Angle, usize> = BTreeMap::new();
    for &a in angles.iter().chain(lam.leaves.iter().flat_map(|c| [&c.a, &c.b])) {
        let n = idx.len();
        idx.entry(a).or_insert(n);
    }
    let mut parent: Vec<usize> = (0..idx.len()).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let n = p[y];
            p[y] = r;
            y = n;
        }
        r
    }
    for c in &lam.leaves {
        let (x, y) = (find(&mut parent, idx[&c.a]), find(&mut parent, idx[&c.b]));
        parent[x.max(y)] = x.min(y);
    }
    let query: BTreeSet<Angle> = angles.iter().copied().collect();
    let mut classes: BTreeMap<usize, Vec<Angle>> = BTreeMap::new();
    for (&a, &i) in &idx {
        if query.contains(&a) {
            let r = find(&mut parent, i);
            classes.entry(r).or_default().push(a);
        }
    }
    classes.into_values().collect()
}

/// Smallest common denominator of a set of angles.
pub fn common_denominator(angles: &[Angle]) -> i64 {
    angles.iter().fold(1, |acc, a| acc.lcm(a.ratio().denom()))
}

/// SVG drawing: unit circle, leaves as arcs orthogonal to it, fixed points,
/// and optionally the dual tree of the generators.
pub fn to_svg(lam: &Lamination, with_dual: bool) -> String {
    let r = 256.0;
    let c = r + 16.0;
    let pt = |t: f64| {
        let a = std::f64::consts::TAU * t;
        (c + r * a.cos(), c - r * a.sin())
    };
    let mut s = String::new();
    let size = 2.0 * c;
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
    ));
    s.push_str(&format!("<circle cx=\"{c}\" cy=\"{c}\" r=\"{r}\" fill=\"none\" stroke=\"black\"/>\n"));
    for (leaf, &lv) in lam.leaves.iter().zip(&lam.level) {
        let (ta, tb) = (leaf.a.to_f64(), leaf.b.to_f64());
        let (x1, y1) = pt(ta);
        let (x2, y2) = pt(tb);
        let span = (tb - ta).min(1.0 - (tb - ta));
        let color = if lv == 0 { "red" } else { "blue" };
        if (span - 0.5).abs() < 1e-12 {
            s.push_str(&format!("<line x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\" stroke=\"{color}\"/>\n"));
        } else {
            let rad = r * (std::f64::consts::PI * span).tan();
            // sweep so the arc bows toward the center
            let sweep = if tb - ta < 0.5 { 0 } else { 1 };
            s.push_str(&format!(
                "<path d=\"M {x1:.3} {y1:.3} A {rad:.3} {rad:.3} 0 0 {sweep} {x2:.3} {y2:.3}\" fill=\"none\" stroke=\"{color}\"/>\n"
            ));
        }
    }
    for t in fixed_points(lam.d) {
        let (x, y) = pt(t.to_f64());
        s.push_str(&format!("<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"4\" fill=\"black\"/>\n"));
    }
    if with_dual {
        let regs = regions(&lam.generators, lam.d);
        let centers: Vec<(f64, f64)> = regs
            .iter()
            .map(|ev| {
                let mut pts: Vec<f64> = Vec::new();
                for e in ev {
                    match *e {
                        Ok(k) => pts.push(k as f64 / (lam.d + 1) as f64),
                        Err(ci) => {
                            let g = &lam.generators[ci];
                            pts.push(g.a.to_f64());
                            pts.push(g.b.to_f64());
                        }
                    }
                }
                let (mut x, mut y) = (0.0, 0.0);
                for t in &pts {
                    let (px, py) = pt(*t);
                    x += px;
                    y += py;
                }
                let n = pts.len() as f64;
                (x / n, y / n)
            })
            .collect();
        for (ri, ev) in regs.iter().enumerate() {
            let (cx, cy) = centers[ri];
            for e in ev {
                let (x, y) = match *e {
                    Ok(k) => pt(k as f64 / (lam.d + 1) as f64),
                    Err(ci) => {
                        let other = regs.iter().position(|o| !std::ptr::eq(o, ev) && o.contains(&Err(ci))).unwrap();
                        centers[other]
                    }
                };
                s.push_str(&format!(
                    "<line x1=\"{cx:.3}\" y1=\"{cy:.3}\" x2=\"{x:.3}\" y2=\"{y:.3}\" stroke=\"green\"/>\n"
                ));
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m_minus_d_examples() {
        assert_eq!(m_minus_d(Angle::new(1, 8), 3), Angle::new(5, 8));
        for d in 2..6 {
            for t in fixed_points(d) {
                assert_eq!(m_minus_d(t, d), t);
            }
        }
    }

    #[test]
    fn two_cycle_counts() {
        assert!(two_cycles(2).is_empty());
        let c3 = two_cycles(3);
        assert_eq!(c3, vec![Chord::new(Angle::new(1, 8), Angle::new(5, 8)).unwrap(), Chord::new(Angle::new(3, 8), Angle::new(7, 8)).unwrap()]);
        for d in 2..=7 {
            assert_eq!(two_cycles(d).len(), (d + 1) * (d - 2) / 2);
        }
    }

    #[test]
    fn crossing_is_strict() {
        let a = Chord::new(Angle::new(1, 8), Angle::new(5, 8)).unwrap();
        let b = Chord::new(Angle::new(3, 8), Angle::new(7, 8)).unwrap();
        let c = Chord::new(Angle::new(5, 8), Angle::new(7, 8)).unwrap();
        assert!(a.crosses(&b));
        assert!(!a.crosses(&c));
    }
}
