//! Degenerating families of anti-Blaschke products and the quasi-fixed trees
//! they converge to.
//!
//! [`realize`] builds a family for a pointed metric ribbon tree by running the
//! tree's reduction chain backwards: each regluing multiplies the current map
//! by one anti-Möbius factor whose zero sits at a controlled distance from the
//! regluing point, then rotates back to normal form. [`extract_tree`] goes the
//! other way, reading the tree off the critical clusters and boundary fixed
//! points of the family at the top of the grid.

use crate::blaschke::{AntiBlaschke, BlaschkeJson};
use crate::error::{Error, Result};
use crate::hypdisk::{busemann, direction_at, dist_cx, point_toward, project_to_hull, radial_point, to_origin_cx, DiskPoint, Pt};
use crate::mp::{self, fl, Cx};
use crate::ribbontree::{Length, PointedMetricTree, RibbonTree};
use num_complex::Complex64;
use rug::Float;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const DEFAULT_GRID: [f64; 7] = [1.0, 2.0, 4.0, 8.0, 12.0, 16.0, 20.0];

/// Hyperbolic single-linkage threshold for critical clusters.
pub const DEFAULT_SPLIT: f64 = 6.0;

/// Radius of the ball around a placed vertex that must hold its critical points.
pub const DEFAULT_BALL: f64 = 3.0;

/// A family `s ↦ f_s` sampled on an increasing grid.
#[derive(Clone, Debug)]
pub struct Family {
    pub d: usize,
    pub grid: Vec<f64>,
    pub maps: Vec<AntiBlaschke>,
    /// Working precision (bits) the maps were built at.
    pub precision: u32,
}

impl Family {
    pub fn new(grid: Vec<f64>, maps: Vec<AntiBlaschke>, precision: u32) -> Result<Self> {
        check_grid(&grid)?;
        if maps.len() != grid.len() {
            return Err(Error::Invalid(format!("{} maps for {} grid points", maps.len(), grid.len())));
        }
        let d = maps[0].degree();
        if maps.iter().any(|f| f.degree() != d) {
            return Err(Error::Invalid("maps of a family must share the degree".into()));
        }
        Ok(Family { d, grid, maps, precision })
    }

    /// Evaluates `sampler` at every grid point under the given precision.
    pub fn from_sampler(grid: Vec<f64>, precision: u32, sampler: impl Fn(f64) -> Result<AntiBlaschke>) -> Result<Self> {
        check_grid(&grid)?;
        let _g = mp::push_precision(precision);
        let maps = grid.iter().map(|&s| sampler(s)).collect::<Result<Vec<_>>>()?;
        Family::new(grid, maps, precision)
    }

    pub fn constant(f: AntiBlaschke, grid: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        Family::new(grid, vec![f; n], mp::precision())
    }

    /// Indices of the upper half of the grid, where stability is demanded.
    pub fn top_half(&self) -> std::ops::Range<usize> {
        self.grid.len() / 2..self.grid.len()
    }

    pub fn index_of(&self, s: f64) -> Option<usize> {
        self.grid.iter().position(|&x| (x - s).abs() <= 1e-9 * s.abs().max(1.0))
    }

    pub fn to_json(&self) -> FamilyJson {
        let _g = mp::push_precision(self.precision);
        FamilyJson {
            d: self.d,
            grid: self.grid.clone(),
            precision: self.precision,
            maps: self.maps.iter().map(|f| f.to_json()).collect(),
        }
    }

    pub fn from_json(j: &FamilyJson) -> Result<Self> {
        let _g = mp::push_precision(j.precision);
        let maps = j.maps.iter().map(AntiBlaschke::from_json).collect::<Result<Vec<_>>>()?;
        let fam = Family::new(j.grid.clone(), maps, j.precision)?;
        if fam.d != j.d {
            return Err(Error::Invalid(format!("family declares d = {} but maps have degree {}", j.d, fam.d)));
        }
        Ok(fam)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyJson {
    pub d: usize,
    pub grid: Vec<f64>,
    pub precision: u32,
    pub maps: Vec<BlaschkeJson>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::Invalid("a family grid needs at least 3 points".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || !(grid[0] > 0.0) {
        return Err(Error::Invalid("grid must be positive and strictly increasing".into()));
    }
    if grid[grid.len() - 1] < 8.0 * grid[0] {
        return Err(Error::Invalid("grid must span at least a factor of 8".into()));
    }
    Ok(())
}

/// A tree together with its placement in the disk at each grid value.
///
/// `placements[k][v]` is a disk point for core vertices and the boundary fixed
/// point for ends.
#[derive(Clone, Debug)]
pub struct EmbeddedTree {
    pub tree: PointedMetricTree,
    pub grid: Vec<f64>,
    pub placements: Vec<Vec<Pt>>,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Diagnostics {
    /// Largest `d(x, f(x))` over placed core vertices, per grid value.
    pub vertex_displacement: Vec<f64>,
    /// Largest distance from a cluster member to its representative.
    pub cluster_radius: Vec<f64>,
    /// Smallest distance between two placed core vertices.
    pub min_separation: Vec<f64>,
}

impl EmbeddedTree {
    pub fn core_point(&self, k: usize, v: usize) -> Result<&Cx> {
        match &self.placements[k][v] {
            Pt::Disk(p) => Ok(p.cx()),
            Pt::Ideal(_) => Err(Error::Invalid(format!("vertex {v} is an end"))),
        }
    }

    /// Moves vertex `v` by `amount` at every grid value, in the direction that
    /// stays farthest from its edges.
    pub fn nudged(&self, v: usize, amount: f64) -> Result<EmbeddedTree> {
        if self.tree.tree.is_end(v) {
            return Err(Error::Invalid(format!("vertex {v} is an end")));
        }
        let mut out = self.clone();
        for (k, place) in out.placements.iter_mut().enumerate() {
            let x = self.core_point(k, v)?.clone();
            let dirs: Vec<f64> = self.tree.tree.neighbors(v).iter().map(|&w| turns(&direction_at(&x, &self.placements[k][w]))).collect();
            let u = widest_gap(&dirs);
            let dir = Cx::expi_turns_f64(u);
            let moved = to_origin_cx(&x).invert(&radial_point(&dir, &fl(amount)));
            place[v] = Pt::Disk(DiskPoint::from_cx(moved)?);
        }
        Ok(out)
    }
}

fn turns(t: &Float) -> f64 {
    t.to_f64().rem_euclid(1.0)
}

fn circ(a: f64, b: f64) -> f64 {
    let x = (a - b).rem_euclid(1.0);
    x.min(1.0 - x)
}

/// Midpoint of the widest gap between the given directions (turns).
fn widest_gap(dirs: &[f64]) -> f64 {
    if dirs.is_empty() {
        return 0.0;
    }
    let mut s: Vec<f64> = dirs.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best = (-1.0, 0.0);
    for i in 0..s.len() {
        let a = s[i];
        let b = if i + 1 < s.len() { s[i + 1] } else { s[0] + 1.0 };
        if b - a > best.0 {
            best = (b - a, a + (b - a) / 2.0);
        }
    }
    best.1.rem_euclid(1.0)
}

fn disk(z: Cx) -> Result<Pt> {
    Ok(Pt::Disk(DiskPoint::from_cx(z)?))
}

fn depth_cx(z: &Cx) -> Float {
    dist_cx(&Cx::zero(), z)
}

// ---------------------------------------------------------------------------
// Realization

/// A realized family together with the placement used to build it.
#[derive(Clone, Debug)]
pub struct Realization {
    pub family: Family,
    pub embedded: EmbeddedTree,
}

/// End labels and attachment vertices of one tree of the reduction chain, in
/// the vertex numbering of the tree being realized.
#[derive(Clone, Debug)]
struct Stage {
    labels: BTreeMap<usize, usize>,
    attach: BTreeMap<usize, usize>,
}

fn stage(tree: &RibbonTree, to_top: &[usize]) -> Stage {
    let mut labels = BTreeMap::new();
    let mut attach = BTreeMap::new();
    for (v, k) in tree.end_labels() {
        labels.insert(to_top[v], k);
        attach.insert(to_top[v], to_top[tree.neighbors(v)[0]]);
    }
    Stage { labels, attach }
}

/// One regluing, from `small` up to `big`.
#[derive(Clone, Debug)]
struct Step {
    small: Stage,
    big: Stage,
    w: usize,
    before: usize,
    after: usize,
    toward_p: usize,
    merged: Option<usize>,
    edge_to_p: f64,
}

#[derive(Clone, Debug)]
struct Plan {
    base_degree: usize,
    special: usize,
    steps: Vec<Step>,
    top: Stage,
    depth_per_s: f64,
}

fn plan(t: &PointedMetricTree) -> Result<Plan> {
    let chain = t.reduction_chain();
    let n = t.tree.vertex_count();
    let mut to_top: Vec<Vec<usize>> = vec![(0..n).collect()];
    for k in 1..chain.len() {
        let reg = chain[k].1.as_ref().expect("reduced trees carry their regluing");
        let mut m = vec![0; chain[k].0.tree.vertex_count()];
        for (old, new) in reg.old_to_new.iter().enumerate() {
            if let Some(new) = new {
                m[*new] = to_top[k - 1][old];
            }
        }
        to_top.push(m);
    }
    let mut steps = Vec::new();
    let last = &chain.last().unwrap().0;
    let lm = to_top.last().unwrap();
    let base_degree = if last.tree.core().len() == 1 {
        last.tree.valence(last.special) - 1
    } else if last.is_extended() && last.tree.core().len() == 2 {
        // the chain stops one short: the 2-ended star at p is not a ribbon tree
        steps.push(extended_base_step(last, lm)?);
        1
    } else {
        return Err(Error::Invalid("reduction chain does not end at a star".into()));
    };
    for k in (0..chain.len() - 1).rev() {
        let reg = chain[k + 1].1.as_ref().unwrap();
        let m = &to_top[k];
        steps.push(Step {
            small: stage(&chain[k + 1].0.tree, &to_top[k + 1]),
            big: stage(&chain[k].0.tree, m),
            w: m[reg.w],
            before: m[reg.before],
            after: m[reg.after],
            toward_p: m[reg.toward_p],
            merged: reg.merged_end.map(|x| m[x]),
            edge_to_p: reg.edge_to_p,
        });
    }
    let r_max = t.tree.core().iter().map(|&v| t.radius(v)).fold(0.0, f64::max);
    Ok(Plan { base_degree, special: t.special, steps, top: stage(&t.tree, &to_top[0]), depth_per_s: 2.0 * r_max })
}

/// First step of an extended tree: `z̄` with two ends at `p`, reglued into
/// `p–v` with two ends at `v`.
fn extended_base_step(last: &PointedMetricTree, m: &[usize]) -> Result<Step> {
    let tr = &last.tree;
    let p = last.special;
    let v = *tr.neighbors(p).iter().find(|&&x| !tr.is_end(x)).ok_or_else(|| Error::Invalid("extended tree without a core edge".into()))?;
    let e_p = *tr.neighbors(p).iter().find(|&&x| tr.is_end(x)).unwrap();
    let rot = tr.neighbors(v);
    let y = *rot.iter().filter(|&&x| x != p && x != tr.marked_end()).min().unwrap();
    let other = *rot.iter().find(|&&x| x != p && x != y).unwrap();
    let iy = rot.iter().position(|&x| x == y).unwrap();
    let before = rot[(iy + rot.len() - 1) % rot.len()];
    let after = rot[(iy + 1) % rot.len()];
    let (l0, l1) = if tr.marked_end() == other { (other, e_p) } else { (e_p, other) };
    let small = Stage {
        labels: BTreeMap::from([(m[l0], 0), (m[l1], 1)]),
        attach: BTreeMap::from([(m[e_p], m[p]), (m[other], m[p])]),
    };
    Ok(Step {
        small,
        big: stage(tr, m),
        w: m[v],
        before: m[before],
        after: m[after],
        toward_p: m[p],
        merged: Some(m[other]),
        edge_to_p: last.edge_length(v, p).finite().unwrap_or(1.0),
    })
}

/// Realizes a pointed metric tree whose special point is a branch point.
pub fn realize(t: &PointedMetricTree, grid: &[f64]) -> Result<Realization> {
    if t.is_extended() {
        return Err(Error::Invalid("extended trees are realized by realize_extended".into()));
    }
    realize_tree(t, grid)
}

/// Realizes an extended tree (valence-2 special point), starting from `z̄`.
pub fn realize_extended(t: &PointedMetricTree, grid: &[f64]) -> Result<Realization> {
    if !t.is_extended() {
        return Err(Error::Invalid("realize_extended needs a valence-2 special point".into()));
    }
    realize_tree(t, grid)
}

fn realize_tree(t: &PointedMetricTree, grid: &[f64]) -> Result<Realization> {
    let d = t.tree.degree_d();
    if d > 6 {
        return Err(Error::SizeLimit(format!("realization limited to d ≤ 6 (got {d})")));
    }
    check_grid(grid)?;
    let plan = plan(t)?;
    let s_max = grid[grid.len() - 1];
    let prec = mp::bits_for_depth(plan.depth_per_s * s_max + 16.0);
    let _g = mp::push_precision(prec);
    let mut maps = Vec::new();
    let mut placements = Vec::new();
    let mut disp = Vec::new();
    let mut sep = Vec::new();
    for &s in grid {
        let (f, phi) = realize_at(&plan, s)?;
        let fix = f.boundary_fixed_points()?;
        let mut place = Vec::with_capacity(t.tree.vertex_count());
        for v in 0..t.tree.vertex_count() {
            place.push(match plan.top.labels.get(&v) {
                Some(&k) => Pt::Ideal(fix.points[k].clone()),
                None => disk(phi[&v].clone())?,
            });
        }
        let core: Vec<&Cx> = phi.values().collect();
        disp.push(phi.values().map(|x| dist_cx(x, &f.eval(x)).to_f64()).fold(0.0, f64::max));
        sep.push(min_pairwise(&core));
        maps.push(f);
        placements.push(place);
    }
    let family = Family::new(grid.to_vec(), maps, prec)?;
    let diagnostics = Diagnostics { vertex_displacement: disp, cluster_radius: vec![0.0; grid.len()], min_separation: sep };
    let embedded = EmbeddedTree { tree: t.clone(), grid: grid.to_vec(), placements, diagnostics };
    Ok(Realization { family, embedded })
}

fn min_pairwise(pts: &[&Cx]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            m = m.min(dist_cx(pts[i], pts[j]).to_f64());
        }
    }
    m
}

fn realize_at(plan: &Plan, s: f64) -> Result<(AntiBlaschke, BTreeMap<usize, Cx>)> {
    let mut f = AntiBlaschke::monomial(plan.base_degree);
    let mut phi: BTreeMap<usize, Cx> = BTreeMap::from([(plan.special, Cx::zero())]);
    // zeros attributed to each vertex, by parameter index
    let mut owned: BTreeMap<usize, Vec<usize>> = BTreeMap::from([(plan.special, (0..plan.base_degree).collect())]);
    for step in &plan.steps {
        let fix = f.boundary_fixed_points()?;
        let target = |v: usize| -> Result<Pt> {
            match step.small.labels.get(&v) {
                Some(&k) => Ok(Pt::Ideal(fix.points[k].clone())),
                None => disk(phi[&v].clone()),
            }
        };
        let w = step.w;
        let mut params = f.params().to_vec();
        let z_s = match step.merged {
            None => {
                let q = phi[&w].clone();
                let rho = depth_cx(&f.eval(&q));
                let db = turns(&direction_at(&q, &target(step.before)?));
                let da = turns(&direction_at(&q, &target(step.after)?));
                let mut len = (da - db).rem_euclid(1.0);
                if len <= 0.0 {
                    len = 1.0;
                }
                let zdirs: Vec<f64> = owned[&w].iter().map(|&i| turns(&direction_at(&q, &Pt::Disk(DiskPoint::from_cx(params[i].conj()).unwrap())))).collect();
                let mut theta = 0.5f64;
                for i in 0..zdirs.len() {
                    for j in (i + 1)..zdirs.len() {
                        theta = theta.min(circ(zdirs[i], zdirs[j]));
                    }
                }
                // a zero aimed at another placed vertex would land on it
                let vdirs: Vec<f64> = phi.iter().filter(|&(&v, _)| v != w).map(|(_, x)| Ok(turns(&direction_at(&q, &disk(x.clone())?)))).collect::<Result<_>>()?;
                let sep = |u: f64| zdirs.iter().map(|&z| circ(u, z)).fold(1.0, f64::min);
                let clear = |u: f64| vdirs.iter().map(|&z| circ(u, z)).fold(1.0, f64::min);
                let mut best = (-1.0, db);
                let n = 720;
                for i in 0..=n {
                    let u = db + len * i as f64 / n as f64;
                    let score = sep(u).min(clear(u));
                    if score > best.0 {
                        best = (score, u);
                    }
                }
                let u = best.1;
                if sep(u) < theta / 3.0 {
                    return Err(Error::AngleStarvation(w));
                }
                to_origin_cx(&q).invert(&radial_point(&Cx::expi_turns_f64(u), &rho))
            }
            Some(e) => {
                let a = phi[&step.toward_p].clone();
                let q = point_toward(&a, &target(e)?, &fl(s * step.edge_to_p));
                let rho = depth_cx(&f.eval(&q));
                let r0 = depth_cx(&q);
                let z = radial_point(&q, &Float::with_val(mp::precision(), r0 + rho));
                phi.insert(w, q);
                owned.insert(w, vec![0]);
                z
            }
        };
        owned.get_mut(&w).unwrap().push(params.len());
        params.push(z_s.conj());
        let lambda = &(-&z_s.unit()) * f.lambda();
        f = AntiBlaschke::from_parts(lambda, params)?;
        let (g, moved) = normalize(&f, &phi, &step.big)?;
        f = g;
        phi = moved;
    }
    Ok((f, phi))
}

/// Rotates `f` into normal form (`λ = 1`). Of the `D + 1` admissible
/// rotations, the one whose labelled fixed points attach to the expected
/// vertices of `big` (Busemann-nearest placed vertex) is chosen.
fn normalize(f: &AntiBlaschke, phi: &BTreeMap<usize, Cx>, big: &Stage) -> Result<(AntiBlaschke, BTreeMap<usize, Cx>)> {
    let n = f.degree() + 1;
    let prec = mp::precision();
    let a = Float::with_val(prec, f.lambda().arg_turns() / n as u32);
    let omega0 = Cx::expi_turns(&a);
    let g0 = f.rotate(&omega0);
    let off = (&g0.lambda().clone() - &Cx::one()).abs().to_f64();
    if off > 1e-20 {
        return Err(Error::NormalFormFailure(format!("phase residual {off:e}")));
    }
    let g0 = AntiBlaschke::from_parts(Cx::one(), g0.params().to_vec())?;
    let back0 = omega0.conj();
    let phi0: BTreeMap<usize, Cx> = phi.iter().map(|(&v, x)| (v, x * &back0)).collect();
    let fix = g0.boundary_fixed_points()?;
    let mut best = (f64::INFINITY, 0usize);
    for j in 0..n {
        let mut score = 0.0;
        for (end, &label) in &big.labels {
            let xi = fix.cx((label + j) % n);
            let want = busemann(&xi, &phi0[&big.attach[end]]).to_f64();
            let min = phi0.values().map(|x| busemann(&xi, x).to_f64()).fold(f64::INFINITY, f64::min);
            score += want - min;
        }
        if score < best.0 {
            best = (score, j);
        }
    }
    let zeta = Cx::expi_turns(&Float::with_val(prec, Float::with_val(prec, best.1 as u32) / n as u32));
    let g = AntiBlaschke::from_parts(Cx::one(), g0.rotate(&zeta).params().to_vec())?;
    let back = zeta.conj();
    Ok((g, phi0.into_iter().map(|(v, x)| (v, &x * &back)).collect()))
}

// ---------------------------------------------------------------------------
// Critical clusters

#[derive(Clone, Debug)]
pub struct Cluster {
    pub members: Vec<(DiskPoint, usize)>,
    /// Critical points with multiplicity plus one.
    pub degree: usize,
    /// Medoid of the members.
    pub rep: DiskPoint,
    pub radius: f64,
    /// `d(rep, f(rep))`.
    pub displacement: f64,
}

#[derive(Clone, Debug)]
pub struct ClusterReport {
    pub grid: Vec<f64>,
    pub clusters: Vec<Vec<Cluster>>,
    /// Cluster sizes agree over the top half of the grid.
    pub stable: bool,
    /// Per cluster at the top of the grid: displacement grows past `split`.
    pub active: Vec<bool>,
}

fn clusters_of(f: &AntiBlaschke, split: f64) -> Result<Vec<Cluster>> {
    let crit = f.critical_points()?;
    let n = crit.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if dist_cx(crit[i].0.cx(), crit[j].0.cx()).to_f64() < split {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out = Vec::new();
    for idx in groups.values() {
        let members: Vec<(DiskPoint, usize)> = idx.iter().map(|&i| crit[i].clone()).collect();
        let mut best = (f64::INFINITY, 0);
        for (i, (x, _)) in members.iter().enumerate() {
            let tot: f64 = members.iter().map(|(y, m)| *m as f64 * dist_cx(x.cx(), y.cx()).to_f64()).sum();
            if tot < best.0 {
                best = (tot, i);
            }
        }
        let rep = members[best.1].0.clone();
        let radius = members.iter().map(|(y, _)| dist_cx(rep.cx(), y.cx()).to_f64()).fold(0.0, f64::max);
        let displacement = dist_cx(rep.cx(), &f.eval(rep.cx())).to_f64();
        let degree = members.iter().map(|(_, m)| m).sum::<usize>() + 1;
        out.push(Cluster { members, degree, rep, radius, displacement });
    }
    out.sort_by(|a, b| {
        let ka = (a.rep.depth(), a.rep.cx().arg_turns().to_f64());
        let kb = (b.rep.depth(), b.rep.cx().arg_turns().to_f64());
        ka.partial_cmp(&kb).unwrap()
    });
    Ok(out)
}

/// Position rescaled by `1/s`, used to follow a cluster along the grid.
fn normalized(x: &Cx, s: f64) -> num_complex::Complex64 {
    let depth = depth_cx(x).to_f64();
    if depth == 0.0 {
        return num_complex::Complex64::new(0.0, 0.0);
    }
    let u = x.unit().to_c64();
    u * (depth / s / 2.0).tanh()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

/// Critical clusters at every grid value, with the stability and activity
/// report over the top half of the grid.
pub fn cluster_critical_points(fam: &Family, split: f64) -> Result<ClusterReport> {
    let _g = mp::push_precision(fam.precision);
    let clusters = fam.maps.iter().map(|f| clusters_of(f, split)).collect::<Result<Vec<_>>>()?;
    let top = fam.top_half();
    let sizes = |cs: &Vec<Cluster>| {
        let mut v: Vec<usize> = cs.iter().map(|c| c.degree).collect();
        v.sort();
        v
    };
    let want = sizes(&clusters[top.end - 1]);
    let stable = top.clone().all(|i| sizes(&clusters[i]) == want);
    if !stable {
        return Err(Error::UnstableClustering);
    }
    let last = top.end - 1;
    let s_top = fam.grid[last];
    let mut active = Vec::new();
    for c in &clusters[last] {
        let anchor = normalized(c.rep.cx(), s_top);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in top.clone() {
            let s = fam.grid[i];
            let m = clusters[i]
                .iter()
                .min_by(|a, b| {
                    let da = (normalized(a.rep.cx(), s) - anchor).norm();
                    let db = (normalized(b.rep.cx(), s) - anchor).norm();
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            xs.push(s);
            ys.push(m.displacement);
        }
        active.push(c.displacement > split && slope(&xs, &ys) > 0.0);
    }
    Ok(ClusterReport { grid: fam.grid.clone(), clusters, stable, active })
}

// ---------------------------------------------------------------------------
// Extraction

struct Extracted {
    tree: RibbonTree,
    special: usize,
    place: Vec<Pt>,
}

fn extract_at(f: &AntiBlaschke, clusters: &[Cluster], split: f64) -> Result<Extracted> {
    let margin = split / 2.0;
    let m = clusters.len();
    let reps: Vec<Cx> = clusters.iter().map(|c| c.rep.cx().clone()).collect();
    let fix = f.boundary_fixed_points()?;
    let n_end = fix.points.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m + n_end];
    // core: grow from the cluster nearest the origin, always adding the
    // cluster nearest the current hull
    let mut inserted = vec![(0..m).min_by(|&a, &b| clusters[a].rep.depth().partial_cmp(&clusters[b].rep.depth()).unwrap()).unwrap_or(0)];
    while inserted.len() < m {
        let hull: Vec<Pt> = inserted.iter().map(|&i| Pt::Disk(clusters[i].rep.clone())).collect();
        let mut best: Option<(f64, usize, DiskPoint)> = None;
        for c in (0..m).filter(|c| !inserted.contains(c)) {
            let proj = project_to_hull(&Pt::Disk(clusters[c].rep.clone()), &hull)?;
            let dd = dist_cx(proj.cx(), &reps[c]).to_f64();
            if best.as_ref().map(|b| dd < b.0).unwrap_or(true) {
                best = Some((dd, c, proj));
            }
        }
        let (_, c, proj) = best.unwrap();
        let l = nearest_unique(proj.cx(), &inserted, &reps, margin)?;
        adj[l].push(c);
        adj[c].push(l);
        inserted.push(c);
    }
    let all: Vec<usize> = (0..m).collect();
    let hull: Vec<Pt> = clusters.iter().map(|c| Pt::Disk(c.rep.clone())).collect();
    for k in 0..n_end {
        let xi = Pt::Ideal(fix.points[k].clone());
        let proj = project_to_hull(&xi, &hull)?;
        let v = nearest_unique(proj.cx(), &all, &reps, margin)?;
        adj[v].push(m + k);
        adj[m + k].push(v);
    }
    let mut place: Vec<Pt> = clusters.iter().map(|c| Pt::Disk(c.rep.clone())).collect();
    place.extend(fix.points.iter().map(|p| Pt::Ideal(p.clone())));
    let mut rot = vec![Vec::new(); m + n_end];
    for v in 0..m {
        let mut nb: Vec<(f64, usize)> = adj[v].iter().map(|&w| (turns(&direction_at(&reps[v], &place[w])), w)).collect();
        nb.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        rot[v] = nb.into_iter().map(|x| x.1).collect();
    }
    for k in 0..n_end {
        rot[m + k] = adj[m + k].clone();
    }
    for v in 0..m {
        if rot[v].len() != clusters[v].degree + 1 {
            return Err(Error::RealizationMismatch(format!(
                "cluster of degree {} has valence {}",
                clusters[v].degree,
                rot[v].len()
            )));
        }
    }
    let tree = RibbonTree::new(rot, m, None)?;
    let near = (0..m).filter(|&v| clusters[v].rep.depth() < split / 2.0).min_by(|&a, &b| clusters[a].rep.depth().partial_cmp(&clusters[b].rep.depth()).unwrap());
    if let Some(p) = near {
        return Ok(Extracted { tree, special: p, place });
    }
    // no vertex stays near the origin: insert one on the edge closest to it
    let origin = Pt::Disk(DiskPoint::origin());
    let mut best: Option<(f64, usize, usize, DiskPoint)> = None;
    for a in 0..m {
        for &b in tree.neighbors(a) {
            if b < m && b < a {
                continue;
            }
            let foot = project_to_hull(&origin, &[place[a].clone(), place[b].clone()])?;
            let dd = foot.depth();
            if best.as_ref().map(|x| dd < x.0).unwrap_or(true) {
                best = Some((dd, a, b, foot));
            }
        }
    }
    let (_, a, b, foot) = best.ok_or_else(|| Error::Invalid("tree has no edges".into()))?;
    let (tree, p) = tree.insert_on_edge(a, b)?;
    place.push(Pt::Disk(foot));
    Ok(Extracted { tree, special: p, place })
}

/// Index among `cands` of the representative nearest `x`; fails when the
/// runner-up is within `margin` of the winner.
fn nearest_unique(x: &Cx, cands: &[usize], reps: &[Cx], margin: f64) -> Result<usize> {
    let mut ds: Vec<(f64, usize)> = cands.iter().map(|&c| (dist_cx(x, &reps[c]).to_f64(), c)).collect();
    ds.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if ds.len() > 1 && ds[1].0 - ds[0].0 < margin {
        return Err(Error::AmbiguousProjection(format!(
            "vertices {} and {} at distances {:.3} and {:.3}",
            ds[0].1, ds[1].1, ds[0].0, ds[1].0
        )));
    }
    Ok(ds[0].1)
}

/// Quasi-fixed tree of a family, read off at each grid value of the top half
/// and required to agree there. Core edge lengths are the slopes of the
/// placed distances against `s`.
pub fn extract_tree(fam: &Family, split: f64) -> Result<EmbeddedTree> {
    let report = cluster_critical_points(fam, split)?;
    let _g = mp::push_precision(fam.precision);
    let top = fam.top_half();
    let mut key: Option<(Vec<u32>, usize)> = None;
    let mut tree: Option<(RibbonTree, usize)> = None;
    let mut placements = Vec::new();
    let mut diag = Diagnostics::default();
    for i in top.clone() {
        let ex = extract_at(&fam.maps[i], &report.clusters[i], split)?;
        let (ct, num) = ex.tree.canonical_relabel();
        let k = (ct.canonical(), num[ex.special]);
        match &key {
            None => {
                key = Some(k);
                tree = Some((ct, num[ex.special]));
            }
            Some(k0) if *k0 != k => return Err(Error::UnstableClustering),
            _ => {}
        }
        let mut place = vec![Pt::Disk(DiskPoint::origin()); ex.place.len()];
        for (old, p) in ex.place.into_iter().enumerate() {
            place[num[old]] = p;
        }
        let core: Vec<Cx> = place.iter().filter_map(|p| if let Pt::Disk(d) = p { Some(d.cx().clone()) } else { None }).collect();
        let f = &fam.maps[i];
        diag.vertex_displacement.push(core.iter().map(|x| dist_cx(x, &f.eval(x)).to_f64()).fold(0.0, f64::max));
        diag.cluster_radius.push(report.clusters[i].iter().map(|c| c.radius).fold(0.0, f64::max));
        diag.min_separation.push(min_pairwise(&core.iter().collect::<Vec<_>>()));
        placements.push(place);
    }
    let (rt, special) = tree.unwrap();
    let grid: Vec<f64> = top.clone().map(|i| fam.grid[i]).collect();
    let mut pt = PointedMetricTree::new(rt.clone(), special)?;
    for a in rt.core() {
        for &b in rt.neighbors(a) {
            if b <= a || rt.is_end(b) {
                continue;
            }
            let ys: Vec<f64> = placements.iter().map(|pl| dist_cx(&pl[a].cx(), &pl[b].cx()).to_f64()).collect();
            let l = slope(&grid, &ys);
            if l > 0.0 {
                pt = pt.with_length(a, b, l)?;
            }
        }
    }
    Ok(EmbeddedTree { tree: pt, grid, placements, diagnostics: diag })
}

// ---------------------------------------------------------------------------
// Verification

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub ball_radius: f64,
    /// Fixed quasi-fixed bound; when absent it is fitted on the lower half of
    /// the grid and must then hold on all of it.
    pub m_bound: Option<f64>,
    /// Added to the fitted bound.
    pub slack: f64,
    /// Relative tolerance on separation slopes.
    pub slope_tol: f64,
    /// Separation slopes are fitted over grid values at least this large.
    pub slope_from: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { ball_radius: DEFAULT_BALL, m_bound: None, slack: 1.0, slope_tol: 0.05, slope_from: 4.0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub grid: Vec<f64>,
    /// Largest sampled `d(x, f(x))` along the placed tree, per grid value.
    pub displacement: Vec<f64>,
    pub m_fit: f64,
    pub quasi_fixed: bool,
    pub ball_radius: f64,
    /// Per grid value: (vertex, critical points in the ball, expected). Only
    /// grid values whose balls are pairwise disjoint are judged.
    pub critical_counts: Vec<Vec<(usize, usize, usize)>>,
    pub critically_approximating: bool,
    /// (u, v, fitted slope, tree distance) for pairs of branch points.
    pub separation_slopes: Vec<(usize, usize, f64, f64)>,
    pub min_separation: Vec<f64>,
    pub affine_separation: bool,
    /// Largest `|d(φ_s u, φ_s v) − s·d(u, v)|` over core pairs and the grid.
    pub qi_defect: f64,
    /// Per grid value: largest Busemann excess of the attached vertex over
    /// the nearest placed vertex, for the fixed point of each end.
    pub end_excess: Vec<f64>,
    /// Per grid value: largest `|f(ξ) − ξ|` over the fixed points.
    pub end_residual: Vec<f64>,
    /// Excess within 1e-9 on the top half of the grid.
    pub ends_approximating: bool,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.quasi_fixed && self.critically_approximating && self.affine_separation && self.ends_approximating
    }
}

/// Einstein midpoint of weighted points, computed in the frame where `frame`
/// is the origin. Symmetric in its inputs, unlike a medoid.
fn barycenter(pts: &[(Cx, usize)], frame: &Cx) -> Option<Cx> {
    if pts.is_empty() {
        return None;
    }
    let iso = to_origin_cx(frame);
    let (mut num, mut den) = (Complex64::new(0.0, 0.0), 0.0);
    for (x, m) in pts {
        let z = iso.apply(x).to_c64();
        let k = 2.0 * z / (1.0 + z.norm_sqr());
        let g = *m as f64 / (1.0 - k.norm_sqr()).sqrt();
        num += g * k;
        den += g;
    }
    let k = num / den;
    let z = k / (1.0 + (1.0 - k.norm_sqr()).sqrt());
    Some(iso.invert(&Cx::from_c64(z)))
}

/// Checks the placed tree against the family: quasi-fixed along edges,
/// critical points near branch points, affine separation, ends at the
/// Busemann-nearest vertex.
pub fn verify(e: &EmbeddedTree, fam: &Family, opts: &VerifyOptions) -> Result<VerifyReport> {
    let _g = mp::push_precision(fam.precision);
    let t = &e.tree;
    let tr = &t.tree;
    let core = tr.core();
    let labels = tr.end_labels();
    let idx: Vec<usize> = e
        .grid
        .iter()
        .map(|&s| fam.index_of(s).ok_or_else(|| Error::Invalid(format!("grid value {s} missing from the family"))))
        .collect::<Result<_>>()?;
    let mut displacement = Vec::new();
    let mut counts = Vec::new();
    let mut centers: Vec<BTreeMap<usize, Cx>> = Vec::new();
    let mut end_excess = Vec::new();
    let mut end_residual = Vec::new();
    let mut qi_defect = 0.0f64;
    let mut min_sep = Vec::new();
    for (k, &i) in idx.iter().enumerate() {
        let f = &fam.maps[i];
        let s = e.grid[k];
        let fix = f.boundary_fixed_points()?;
        let end_pt = |v: usize| Pt::Ideal(fix.points[labels[&v]].clone());
        let mut worst = 0.0f64;
        for &a in &core {
            let pa = e.core_point(k, a)?.clone();
            for &b in tr.neighbors(a) {
                let samples: Vec<Cx> = if tr.is_end(b) {
                    let cap = s + 8.0;
                    (0..=8).map(|j| point_toward(&pa, &end_pt(b), &fl(cap * j as f64 / 8.0))).collect()
                } else if b > a {
                    let pb = e.core_point(k, b)?;
                    let len = dist_cx(&pa, pb);
                    (0..=8).map(|j| point_toward(&pa, &Pt::Disk(DiskPoint::from_cx(pb.clone()).unwrap()), &Float::with_val(len.prec(), &len * (j as f64 / 8.0)))).collect()
                } else {
                    Vec::new()
                };
                for x in samples {
                    worst = worst.max(dist_cx(&x, &f.eval(&x)).to_f64());
                }
            }
        }
        displacement.push(worst);
        let crit = f.critical_points()?;
        let mut row = Vec::new();
        let mut cen = BTreeMap::new();
        for &v in &core {
            let pv = e.core_point(k, v)?;
            let inside: Vec<(Cx, usize)> = crit
                .iter()
                .filter(|(c, _)| dist_cx(c.cx(), pv).to_f64() < opts.ball_radius)
                .map(|(c, m)| (c.cx().clone(), *m))
                .collect();
            let found: usize = inside.iter().map(|x| x.1).sum();
            row.push((v, found, tr.valence(v) - 2));
            // centres take only the critical points for which v is the nearest vertex
            let mut own = Vec::new();
            for (c, m) in &inside {
                let dv = dist_cx(c, pv);
                let mut nearest = true;
                for &u in &core {
                    if u != v && dist_cx(c, e.core_point(k, u)?) < dv {
                        nearest = false;
                    }
                }
                if nearest {
                    own.push((c.clone(), *m));
                }
            }
            cen.insert(v, barycenter(&own, pv).unwrap_or_else(|| pv.clone()));
        }
        counts.push(row);
        centers.push(cen);
        let mut excess = 0.0f64;
        let mut resid = 0.0f64;
        for (&v, &lab) in &labels {
            let xi = fix.cx(lab);
            let att = tr.neighbors(v)[0];
            let want = busemann(&xi, e.core_point(k, att)?).to_f64();
            let mut min = f64::INFINITY;
            for &u in &core {
                min = min.min(busemann(&xi, e.core_point(k, u)?).to_f64());
            }
            excess = excess.max(want - min);
            resid = resid.max((&f.eval(&xi) - &xi).abs().to_f64());
        }
        end_excess.push(excess);
        end_residual.push(resid);
        let mut ms = f64::INFINITY;
        for (ai, &a) in core.iter().enumerate() {
            for &b in &core[ai + 1..] {
                let dd = dist_cx(e.core_point(k, a)?, e.core_point(k, b)?).to_f64();
                if let Length::Finite(l) = t.distance(a, b) {
                    qi_defect = qi_defect.max((dd - s * l).abs());
                }
                ms = ms.min(dd);
            }
        }
        min_sep.push(ms);
    }
    let half = e.grid.len() / 2;
    let m_fit = match opts.m_bound {
        Some(m) => m,
        None => displacement[..half.max(1)].iter().cloned().fold(0.0, f64::max) + opts.slack,
    };
    let quasi_fixed = displacement.iter().all(|&x| x <= m_fit);
    // Counts are meaningful once the balls around placed vertices are disjoint.
    let disjoint: Vec<usize> = (0..e.grid.len()).filter(|&k| min_sep[k] > 2.0 * opts.ball_radius).collect();
    let critically_approximating = !disjoint.is_empty()
        && disjoint.iter().all(|&k| counts[k].iter().all(|&(_, a, b)| a == b));
    let branch = tr.branch_points();
    let fit: Vec<usize> = (0..e.grid.len()).filter(|&k| e.grid[k] >= opts.slope_from).collect();
    let mut slopes = Vec::new();
    let mut affine = true;
    if fit.len() >= 2 {
        for (bi, &u) in branch.iter().enumerate() {
            for &v in &branch[bi + 1..] {
                let l = t.distance(u, v).finite().unwrap_or(f64::INFINITY);
                let xs: Vec<f64> = fit.iter().map(|&k| e.grid[k]).collect();
                let ys: Vec<f64> = fit.iter().map(|&k| dist_cx(&centers[k][&u], &centers[k][&v]).to_f64()).collect();
                let sl = slope(&xs, &ys);
                if !((sl - l).abs() <= opts.slope_tol * l) {
                    affine = false;
                }
                slopes.push((u, v, sl, l));
            }
        }
    } else if branch.len() > 1 {
        affine = false;
    }
    // as with clustering, end attachment is read on the top half of the grid
    let ends_approximating = end_excess[half..].iter().all(|&x| x <= 1e-9);
    Ok(VerifyReport {
        grid: e.grid.clone(),
        displacement,
        m_fit,
        quasi_fixed,
        ball_radius: opts.ball_radius,
        critical_counts: counts,
        critically_approximating,
        separation_slopes: slopes,
        min_separation: min_sep,
        affine_separation: affine,
        qi_defect,
        end_excess,
        end_residual,
        ends_approximating,
    })
}

// ---------------------------------------------------------------------------
// Real parabolic family

/// Odd real cubic family `f_c(z) = B(z̄)`, `B(w) = w(w² − c)/(1 − c w²)`,
/// whose critical points `±r` sit at hyperbolic distance `t` from 0.
///
/// The tree must be extended with core `v1–p–v2`, both branch points of
/// valence 3 and equal edge lengths `ℓ`; grid value `s` gives `t = s·ℓ`.
pub fn realize_parabolic_real(t: &PointedMetricTree, grid: &[f64]) -> Result<Family> {
    check_grid(grid)?;
    let tr = &t.tree;
    let p = t.special;
    let core = tr.core();
    if tr.degree_d() != 3 || !t.is_extended() || core.len() != 3 {
        return Err(Error::Invalid("expected an extended d = 3 tree with three core vertices".into()));
    }
    let nb = tr.neighbors(p);
    if tr.is_end(nb[0]) || tr.is_end(nb[1]) || tr.valence(nb[0]) != 3 || tr.valence(nb[1]) != 3 {
        return Err(Error::Invalid("special point must sit between two trivalent vertices".into()));
    }
    let l1 = t.edge_length(p, nb[0]).finite().unwrap();
    let l2 = t.edge_length(p, nb[1]).finite().unwrap();
    if (l1 - l2).abs() > 1e-12 * l1.max(l2) {
        return Err(Error::Invalid("real symmetric family needs equal edge lengths at p".into()));
    }
    let prec = mp::bits_for_depth(2.0 * grid[grid.len() - 1] * l1 + 16.0);
    Family::from_sampler(grid.to_vec(), prec, |s| {
        let c = solve_parabolic_c(s * l1)?;
        let r = c.sqrt();
        AntiBlaschke::from_zeros(vec![Cx::real(r.clone()), Cx::real(-r)])
    })
}

/// Critical radius `r(c)` with `r² = [(3 − c²) − √((3 − c²)² − 4c²)]/(2c)`.
pub fn parabolic_critical_radius(c: &Float) -> Float {
    let p = c.prec();
    let c2 = Float::with_val(p, c.square_ref());
    let a = Float::with_val(p, 3u32 - &c2);
    let disc = Float::with_val(p, a.square_ref()) - Float::with_val(p, &c2 * 4u32);
    let num = a - disc.sqrt();
    let r2 = num / Float::with_val(p, c * 2u32);
    r2.sqrt()
}

/// `c ∈ (0, 1)` with `d(0, r(c)) = t`; the depth is increasing in `c`.
pub fn solve_parabolic_c(t: f64) -> Result<Float> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::SolveFailure(format!("target depth {t} must be positive")));
    }
    let prec = mp::precision();
    let depth = |c: &Float| depth_cx(&Cx::real(parabolic_critical_radius(c)));
    let target = fl(t);
    // work in u = −ln(1 − c), which is roughly affine in the depth
    let c_of = |u: &Float| Float::with_val(prec, 1u32 - Float::with_val(prec, -u).exp());
    let mut lo = fl(1e-12);
    let mut hi = Float::with_val(prec, Float::with_val(prec, &target * 2u32) + 8u32);
    if depth(&c_of(&lo)) > target || depth(&c_of(&hi)) < target {
        return Err(Error::SolveFailure(format!("depth {t} not bracketed")));
    }
    let tol = Float::with_val(prec, mp::epsilon() * 1024u32);
    for _ in 0..(2 * prec as usize + 100) {
        let mid = Float::with_val(prec, Float::with_val(prec, &lo + &hi) / 2u32);
        if depth(&c_of(&mid)) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if Float::with_val(prec, &hi - &lo) <= tol {
            return Ok(c_of(&lo));
        }
    }
    Err(Error::SolveFailure(format!("depth {t} did not converge")))
}

/// Log-multiplier `L` of the map rescaled at `base`, at the fixed point
/// nearest the image of `xi`. Parabolic behaviour is `L → 0`; `e^L` itself
/// is within f64 rounding of 1 once `L < 1e-16`.
pub fn rescaled_multiplier(f: &AntiBlaschke, base: &DiskPoint, xi: &Cx) -> Result<f64> {
    let g = f.rescale(base)?;
    let target = to_origin_cx(base.cx()).apply(xi);
    let fix = g.boundary_fixed_points()?;
    let k = (0..fix.points.len())
        .min_by(|&a, &b| {
            let da = (&fix.cx(a) - &target).abs().to_f64();
            let db = (&fix.cx(b) - &target).abs().to_f64();
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    g.multiplier(k)
}

/// The d = 3 extended tree `v1–p–v2` with two ends at each `v_i`.
pub fn parabolic_tree(len: f64) -> Result<PointedMetricTree> {
    // 0 = p, 1 = v1, 2 = v2, ends 3, 4 at v1 and 5, 6 at v2
    let rot = vec![vec![1, 2], vec![0, 3, 4], vec![0, 5, 6], vec![1], vec![1], vec![2], vec![2]];
    let tree = RibbonTree::new(rot, 3, Some(0))?;
    PointedMetricTree::new(tree, 0)?.with_length(0, 1, len)?.with_length(0, 2, len)
}
