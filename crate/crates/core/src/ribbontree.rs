//! Marked `(d+1)`-ended ribbon trees, pointed metric trees and the reduction
//! that drives the realization induction.
//!
//! A tree is stored as ccw neighbor lists. Ends are valence-1 vertices, branch
//! points have valence at least 3, and an extended tree may carry one
//! valence-2 special point.

use crate::error::{Error, Result};
use crate::planegraph::{canonical_code, PlaneGraph};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};

#[derive(Clone, Debug, PartialEq)]
pub struct RibbonTree {
    rot: Vec<Vec<usize>>,
    marked: usize,
    inserted: Option<usize>,
}

impl RibbonTree {
    /// Validates a ribbon tree given by ccw neighbor lists. `inserted` names the
    /// one vertex allowed to have valence 2.
    pub fn new(rot: Vec<Vec<usize>>, marked: usize, inserted: Option<usize>) -> Result<Self> {
        let n = rot.len();
        if n < 2 || marked >= n {
            return Err(Error::Invalid("tree needs at least two vertices and a valid marked end".into()));
        }
        let edges: usize = rot.iter().map(|r| r.len()).sum::<usize>() / 2;
        if edges != n - 1 {
            return Err(Error::Invalid("neighbor lists do not describe a tree".into()));
        }
        for (v, r) in rot.iter().enumerate() {
            for &w in r {
                if w >= n || w == v || !rot[w].contains(&v) {
                    return Err(Error::Invalid(format!("neighbor lists are not symmetric at vertex {v}")));
                }
            }
            let ok = r.len() == 1 || r.len() >= 3 || (r.len() == 2 && inserted == Some(v));
            if !ok {
                return Err(Error::Invalid(format!("vertex {v} has valence {}", r.len())));
            }
        }
        if rot[marked].len() != 1 {
            return Err(Error::Invalid("marked vertex is not an end".into()));
        }
        let t = RibbonTree { rot, marked, inserted };
        if t.bfs_order(marked).len() != n {
            return Err(Error::Invalid("tree is disconnected".into()));
        }
        if t.ends().len() < 3 {
            return Err(Error::Invalid("a ribbon tree needs at least three ends".into()));
        }
        Ok(t)
    }

    /// The star with `k` ends; vertex 0 is the center, ends `1..=k` ccw, end 1 marked.
    pub fn star(k: usize) -> Self {
        let mut rot = vec![(1..=k).collect::<Vec<_>>()];
        rot.extend((1..=k).map(|_| vec![0]));
        RibbonTree::new(rot, 1, None).expect("star is a valid ribbon tree")
    }

    pub fn vertex_count(&self) -> usize {
        self.rot.len()
    }

    pub fn degree_d(&self) -> usize {
        self.ends().len() - 1
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.rot[v]
    }

    pub fn valence(&self, v: usize) -> usize {
        self.rot[v].len()
    }

    pub fn marked_end(&self) -> usize {
        self.marked
    }

    pub fn inserted(&self) -> Option<usize> {
        self.inserted
    }

    pub fn is_end(&self, v: usize) -> bool {
        self.rot[v].len() == 1
    }

    /// Ends in ccw order starting at the marked end (label `k` is position `k`).
    pub fn ends(&self) -> Vec<usize> {
        let mut out = vec![self.marked];
        let mut prev = self.marked;
        let mut cur = self.rot[self.marked][0];
        loop {
            // walk the single face: at `cur`, leave along the ccw successor of `prev`
            let r = &self.rot[cur];
            if r.len() == 1 {
                if cur == self.marked {
                    break;
                }
                out.push(cur);
                let next = r[0];
                prev = cur;
                cur = next;
                continue;
            }
            let i = r.iter().position(|&x| x == prev).unwrap();
            let next = r[(i + 1) % r.len()];
            prev = cur;
            cur = next;
        }
        out
    }

    /// Label of every end (its position in [`RibbonTree::ends`]).
    pub fn end_labels(&self) -> BTreeMap<usize, usize> {
        self.ends().into_iter().enumerate().map(|(k, v)| (v, k)).collect()
    }

    /// Core vertices: everything except the ends.
    pub fn core(&self) -> Vec<usize> {
        (0..self.rot.len()).filter(|&v| !self.is_end(v)).collect()
    }

    pub fn branch_points(&self) -> Vec<usize> {
        (0..self.rot.len()).filter(|&v| self.rot[v].len() >= 3).collect()
    }

    fn bfs_order(&self, root: usize) -> Vec<usize> {
        let mut seen = vec![false; self.rot.len()];
        let mut order = vec![root];
        seen[root] = true;
        let mut i = 0;
        while i < order.len() {
            let u = order[i];
            i += 1;
            for &w in &self.rot[u] {
                if !seen[w] {
                    seen[w] = true;
                    order.push(w);
                }
            }
        }
        order
    }

    /// Parent pointers of the tree rooted at the marked end.
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut par = vec![None; self.rot.len()];
        let mut seen = vec![false; self.rot.len()];
        let mut queue = VecDeque::from([self.marked]);
        seen[self.marked] = true;
        while let Some(u) = queue.pop_front() {
            for &w in &self.rot[u] {
                if !seen[w] {
                    seen[w] = true;
                    par[w] = Some(u);
                    queue.push_back(w);
                }
            }
        }
        par
    }

    /// Path of vertices from `a` to `b`.
    pub fn path(&self, a: usize, b: usize) -> Vec<usize> {
        let n = self.rot.len();
        let mut prev = vec![usize::MAX; n];
        let mut queue = VecDeque::from([a]);
        prev[a] = a;
        while let Some(u) = queue.pop_front() {
            if u == b {
                break;
            }
            for &w in &self.rot[u] {
                if prev[w] == usize::MAX {
                    prev[w] = u;
                    queue.push_back(w);
                }
            }
        }
        let mut out = vec![b];
        let mut x = b;
        while x != a {
            x = prev[x];
            out.push(x);
        }
        out.reverse();
        out
    }

    /// Rotation system as a plane graph (vertex numbering preserved).
    pub fn to_plane_graph(&self) -> PlaneGraph {
        PlaneGraph::from_adjacency(&self.rot).expect("tree rotation is a plane graph")
    }

    /// Canonical code of the marked tree: the plane-graph code anchored at the
    /// unique dart leaving the marked end.
    pub fn canonical(&self) -> Vec<u32> {
        let n = self.rot.len();
        let mut num = vec![u32::MAX; n];
        let mut order = vec![self.marked];
        num[self.marked] = 0;
        let mut code = vec![n as u32];
        let mut i = 0;
        while i < order.len() {
            let u = order[i];
            i += 1;
            let r = &self.rot[u];
            // start each rotation at the edge toward the parent (or the only edge)
            let start = if u == self.marked {
                0
            } else {
                r.iter().position(|&w| num[w] != u32::MAX && num[w] < num[u]).unwrap_or(0)
            };
            code.push(r.len() as u32);
            for k in 0..r.len() {
                let w = r[(start + k) % r.len()];
                if num[w] == u32::MAX {
                    num[w] = order.len() as u32;
                    order.push(w);
                }
            }
        }
        if let Some(p) = self.inserted {
            code.push(u32::MAX);
            code.push(num[p]);
        }
        code
    }

    pub fn isomorphic(&self, other: &RibbonTree) -> bool {
        self.canonical() == other.canonical()
    }

    /// Plane-graph code ignoring the marking.
    pub fn unmarked_code(&self) -> Vec<u32> {
        canonical_code(&self.to_plane_graph())
    }

    /// Relabels vertices so that BFS from the marked end in rotation order
    /// numbers them; two isomorphic trees then become identical.
    pub fn canonical_relabel(&self) -> (RibbonTree, Vec<usize>) {
        let n = self.rot.len();
        let mut num = vec![usize::MAX; n];
        let mut order = vec![self.marked];
        num[self.marked] = 0;
        let mut i = 0;
        while i < order.len() {
            let u = order[i];
            i += 1;
            let r = &self.rot[u];
            let start = if u == self.marked { 0 } else { r.iter().position(|&w| num[w] < num[u]).unwrap_or(0) };
            for k in 0..r.len() {
                let w = r[(start + k) % r.len()];
                if num[w] == usize::MAX {
                    num[w] = order.len();
                    order.push(w);
                }
            }
        }
        let mut rot = vec![Vec::new(); n];
        for v in 0..n {
            let mut r: Vec<usize> = self.rot[v].iter().map(|&w| num[w]).collect();
            let k = (0..r.len()).min_by_key(|&i| r[i]).unwrap_or(0);
            r.rotate_left(k);
            rot[num[v]] = r;
        }
        let t = RibbonTree { rot, marked: 0, inserted: self.inserted.map(|p| num[p]) };
        (t, num)
    }

    /// Drops the extended special point, merging its two edges.
    pub fn forget_inserted(&self) -> Result<RibbonTree> {
        let p = match self.inserted {
            Some(p) => p,
            None => return Ok(self.clone()),
        };
        let (a, b) = (self.rot[p][0], self.rot[p][1]);
        let mut rot = self.rot.clone();
        for (x, y) in [(a, b), (b, a)] {
            let i = rot[x].iter().position(|&z| z == p).unwrap();
            rot[x][i] = y;
        }
        rot[p].clear();
        let (rot, marked, _) = compact(rot, self.marked, &[]);
        RibbonTree::new(rot, marked, None)
    }

    /// Inserts a valence-2 vertex on the edge `a–b`, returning the new tree and
    /// the index of the inserted vertex.
    pub fn insert_on_edge(&self, a: usize, b: usize) -> Result<(RibbonTree, usize)> {
        if !self.rot[a].contains(&b) {
            return Err(Error::Invalid(format!("{a}–{b} is not an edge")));
        }
        if self.inserted.is_some() {
            return Err(Error::Invalid("tree already has an inserted point".into()));
        }
        let p = self.rot.len();
        let mut rot = self.rot.clone();
        for (x, y) in [(a, b), (b, a)] {
            let i = rot[x].iter().position(|&z| z == y).unwrap();
            rot[x][i] = p;
        }
        rot.push(vec![a, b]);
        Ok((RibbonTree::new(rot, self.marked, Some(p))?, p))
    }

    pub fn to_json(&self) -> TreeJson {
        let par = self.parents();
        TreeJson {
            d: self.degree_d(),
            parent: par.iter().map(|p| p.map(|x| x as i64).unwrap_or(-1)).collect(),
            rotation: self.rot.clone(),
            marked_end: self.marked,
            special: None,
            lengths: Vec::new(),
        }
    }
}

/// Removes cleared vertices and renumbers. Returns the new lists, the new
/// marked end and the old→new map.
fn compact(rot: Vec<Vec<usize>>, marked: usize, keep_empty: &[usize]) -> (Vec<Vec<usize>>, usize, Vec<Option<usize>>) {
    let n = rot.len();
    let mut map = vec![None; n];
    let mut next = 0;
    for v in 0..n {
        if !rot[v].is_empty() || keep_empty.contains(&v) {
            map[v] = Some(next);
            next += 1;
        }
    }
    let mut out = vec![Vec::new(); next];
    for v in 0..n {
        if let Some(nv) = map[v] {
            out[nv] = rot[v].iter().map(|&w| map[w].expect("neighbor of live vertex is live")).collect();
        }
    }
    (out, map[marked].expect("marked end survives"), map)
}

/// Edge length, either a finite multiple of the unit or the symbolic length of
/// an end edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Length {
    Finite(f64),
    Infinite,
}

impl Length {
    pub fn scale(self, s: f64) -> Length {
        match self {
            Length::Finite(x) => Length::Finite(x * s),
            Length::Infinite => Length::Infinite,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Length::Finite(x) => Some(x),
            Length::Infinite => None,
        }
    }
}

/// Ribbon tree with a special point and a core edge metric (default 1 per edge).
#[derive(Clone, Debug, PartialEq)]
pub struct PointedMetricTree {
    pub tree: RibbonTree,
    pub special: usize,
    lengths: BTreeMap<(usize, usize), f64>,
}

impl PointedMetricTree {
    pub fn new(tree: RibbonTree, special: usize) -> Result<Self> {
        if special >= tree.vertex_count() || tree.is_end(special) {
            return Err(Error::Invalid("special point must be an interior vertex".into()));
        }
        if tree.valence(special) == 2 && tree.inserted() != Some(special) {
            return Err(Error::Invalid("valence-2 special point must be the inserted vertex".into()));
        }
        if let Some(p) = tree.inserted() {
            if p != special {
                return Err(Error::Invalid("inserted vertex must be the special point".into()));
            }
        }
        Ok(PointedMetricTree { tree, special, lengths: BTreeMap::new() })
    }

    pub fn with_length(mut self, a: usize, b: usize, len: f64) -> Result<Self> {
        if !self.tree.neighbors(a).contains(&b) || self.tree.is_end(a) || self.tree.is_end(b) {
            return Err(Error::Invalid(format!("{a}–{b} is not a core edge")));
        }
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::Invalid("core edge lengths must be positive".into()));
        }
        self.lengths.insert((a.min(b), a.max(b)), len);
        Ok(self)
    }

    pub fn is_extended(&self) -> bool {
        self.tree.valence(self.special) == 2
    }

    pub fn edge_length(&self, a: usize, b: usize) -> Length {
        if self.tree.is_end(a) || self.tree.is_end(b) {
            Length::Infinite
        } else {
            Length::Finite(*self.lengths.get(&(a.min(b), a.max(b))).unwrap_or(&1.0))
        }
    }

    pub fn distance(&self, a: usize, b: usize) -> Length {
        let path = self.tree.path(a, b);
        let mut total = 0.0;
        for w in path.windows(2) {
            match self.edge_length(w[0], w[1]) {
                Length::Finite(x) => total += x,
                Length::Infinite => return Length::Infinite,
            }
        }
        Length::Finite(total)
    }

    /// `r(v) = d(p, v)` on core vertices.
    pub fn radius(&self, v: usize) -> f64 {
        self.distance(self.special, v).finite().unwrap_or(f64::INFINITY)
    }

    /// Scaled metric on all vertex pairs; pairs involving ends stay infinite.
    pub fn dilate(&self, s: f64) -> Result<BTreeMap<(usize, usize), Length>> {
        if !(s > 0.0) {
            return Err(Error::Invalid("dilation factor must be positive".into()));
        }
        let n = self.tree.vertex_count();
        let mut out = BTreeMap::new();
        for a in 0..n {
            for b in a..n {
                out.insert((a, b), self.distance(a, b).scale(s));
            }
        }
        Ok(out)
    }

    /// Reduction: drop one non-marked end next to a farthest vertex from the
    /// special point, unvertexing that vertex if it falls to valence 2.
    pub fn reduce(&self) -> Result<(PointedMetricTree, Regluing)> {
        let core = self.tree.core();
        if core.len() <= 1 {
            return Err(Error::Irreducible);
        }
        let mut w = usize::MAX;
        let mut best = -1.0;
        for &v in &core {
            if v == self.special {
                continue;
            }
            let r = self.radius(v);
            if r > best + 1e-12 {
                best = r;
                w = v;
            }
        }
        let y = *self.tree.rot[w]
            .iter()
            .filter(|&&x| self.tree.is_end(x) && x != self.tree.marked)
            .min()
            .ok_or_else(|| Error::Invalid(format!("farthest vertex {w} carries no unmarked end")))?;
        let r = &self.tree.rot[w];
        let iy = r.iter().position(|&x| x == y).unwrap();
        let before = r[(iy + r.len() - 1) % r.len()];
        let after = r[(iy + 1) % r.len()];
        let toward_p = self.tree.path(w, self.special)[1];
        let mut rot = self.tree.rot.clone();
        rot[w].remove(iy);
        rot[y].clear();
        let remained = rot[w].len() >= 3;
        let mut lengths = self.lengths.clone();
        let mut merged_end = None;
        if !remained {
            let other = *rot[w].iter().find(|&&x| x != toward_p).unwrap();
            merged_end = Some(other);
            for (x, z) in [(toward_p, other), (other, toward_p)] {
                let i = rot[x].iter().position(|&q| q == w).unwrap();
                rot[x][i] = z;
            }
            rot[w].clear();
            lengths.retain(|&(a, b), _| a != w && b != w);
        }
        let (rot, marked, map) = compact(rot, self.tree.marked, &[]);
        let inserted = self.tree.inserted.and_then(|p| map[p]);
        let tree = RibbonTree::new(rot, marked, inserted)?;
        let special = map[self.special].expect("special point survives reduction");
        let lengths = lengths
            .into_iter()
            .filter_map(|((a, b), l)| match (map[a], map[b]) {
                (Some(x), Some(y)) => Some(((x.min(y), x.max(y)), l)),
                _ => None,
            })
            .collect();
        let reduced = PointedMetricTree { tree, special, lengths };
        let reg = Regluing {
            w,
            y,
            before,
            after,
            toward_p,
            remained,
            merged_end,
            edge_to_p: self.edge_length(w, toward_p).finite().unwrap_or(1.0),
            old_to_new: map,
        };
        Ok((reduced, reg))
    }

    /// Reduction chain down to a single core vertex; element `k` is the tree
    /// after `k` reductions together with the data that produced it.
    pub fn reduction_chain(&self) -> Vec<(PointedMetricTree, Option<Regluing>)> {
        let mut out = vec![(self.clone(), None)];
        loop {
            let cur = &out.last().unwrap().0;
            match cur.reduce() {
                Ok((next, reg)) => out.push((next, Some(reg))),
                Err(_) => break,
            }
        }
        out
    }

    /// Inverse of [`PointedMetricTree::reduce`], up to isomorphism.
    pub fn reglue(&self, reg: &Regluing) -> Result<PointedMetricTree> {
        let inv = invert_map(&reg.old_to_new);
        let n_old = reg.old_to_new.len();
        let mut rot = vec![Vec::new(); n_old];
        for (new, &old) in inv.iter().enumerate() {
            rot[old] = self.tree.rot[new].iter().map(|&x| inv[x]).collect();
        }
        if !reg.remained {
            let other = reg.merged_end.unwrap();
            for (x, z) in [(reg.toward_p, other), (other, reg.toward_p)] {
                let i = rot[x].iter().position(|&q| q == z).unwrap();
                rot[x][i] = reg.w;
            }
            // rotation at w: toward_p, then the two ends in their original order
            rot[reg.w] = if reg.after == reg.toward_p {
                vec![reg.toward_p, other, reg.y]
            } else {
                vec![reg.toward_p, reg.y, other]
            };
        } else {
            let r = &mut rot[reg.w];
            let i = r.iter().position(|&x| x == reg.before).unwrap();
            r.insert(i + 1, reg.y);
        }
        rot[reg.y] = vec![reg.w];
        let marked = inv[self.tree.marked];
        let inserted = self.tree.inserted.map(|p| inv[p]);
        let tree = RibbonTree::new(rot, marked, inserted)?;
        let mut out = PointedMetricTree::new(tree, inv[self.special])?;
        for (&(a, b), &l) in &self.lengths {
            out = out.with_length(inv[a], inv[b], l)?;
        }
        if !reg.remained {
            out = out.with_length(reg.w, reg.toward_p, reg.edge_to_p)?;
        }
        Ok(out)
    }

    pub fn isomorphic(&self, other: &PointedMetricTree) -> bool {
        let (a, na) = self.tree.canonical_relabel();
        let (b, nb) = other.tree.canonical_relabel();
        a == b && na[self.special] == nb[other.special]
    }

    pub fn to_json(&self) -> TreeJson {
        let mut j = self.tree.to_json();
        j.special = Some(SpecialJson { vertex: self.special, extended: self.is_extended() });
        j.lengths = self.lengths.iter().map(|(&(a, b), &l)| (a, b, l)).collect();
        j
    }

    pub fn from_json(j: &TreeJson) -> Result<Self> {
        let special = j.special.as_ref().map(|s| s.vertex);
        let inserted = special.filter(|&p| j.rotation.get(p).map(|r| r.len() == 2).unwrap_or(false));
        let tree = RibbonTree::new(j.rotation.clone(), j.marked_end, inserted)?;
        if tree.degree_d() != j.d {
            return Err(Error::Invalid(format!("tree has {} ends but d = {}", tree.ends().len(), j.d)));
        }
        let special = match special {
            Some(p) => p,
            None => tree.branch_points()[0],
        };
        let mut t = PointedMetricTree::new(tree, special)?;
        for &(a, b, l) in &j.lengths {
            t = t.with_length(a, b, l)?;
        }
        Ok(t)
    }
}

fn invert_map(map: &[Option<usize>]) -> Vec<usize> {
    let n = map.iter().filter(|x| x.is_some()).count();
    let mut inv = vec![0; n];
    for (old, m) in map.iter().enumerate() {
        if let Some(new) = m {
            inv[*new] = old;
        }
    }
    inv
}

/// Data recorded by a reduction, in the vertex numbering of the larger tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Regluing {
    /// Regluing point.
    pub w: usize,
    /// Removed end.
    pub y: usize,
    /// Neighbors of `y` at `w`: ccw predecessor and successor.
    pub before: usize,
    pub after: usize,
    /// Neighbor of `w` on the path to the special point.
    pub toward_p: usize,
    /// Whether `w` is still a vertex of the reduced tree.
    pub remained: bool,
    /// When `w` is unvertexed: the end now joined directly to `toward_p`.
    pub merged_end: Option<usize>,
    pub edge_to_p: f64,
    /// Vertex numbering of the larger tree mapped into the reduced one.
    pub old_to_new: Vec<Option<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpecialJson {
    pub vertex: usize,
    #[serde(default)]
    pub extended: bool,
}

/// Wire format `{ d, parent, rotation, marked_end, special, lengths }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeJson {
    pub d: usize,
    pub parent: Vec<i64>,
    pub rotation: Vec<Vec<usize>>,
    pub marked_end: usize,
    #[serde(default)]
    pub special: Option<SpecialJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lengths: Vec<(usize, usize, f64)>,
}

/// Planted shape: a leaf or a node with at least two ordered children.
#[derive(Clone, Debug)]
enum Shape {
    Leaf,
    Node(Vec<Shape>),
}

fn shapes(leaves: usize, memo: &mut BTreeMap<usize, Vec<Shape>>) -> Vec<Shape> {
    if let Some(s) = memo.get(&leaves) {
        return s.clone();
    }
    let mut out = Vec::new();
    if leaves == 1 {
        out.push(Shape::Leaf);
    } else {
        for comp in compositions(leaves) {
            if comp.len() < 2 {
                continue;
            }
            let mut partial: Vec<Vec<Shape>> = vec![Vec::new()];
            for &part in &comp {
                let subs = shapes(part, memo);
                let mut next = Vec::new();
                for p in &partial {
                    for s in &subs {
                        let mut q = p.clone();
                        q.push(s.clone());
                        next.push(q);
                    }
                }
                partial = next;
            }
            out.extend(partial.into_iter().map(Shape::Node));
        }
    }
    memo.insert(leaves, out.clone());
    out
}

fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn build(shape: &Shape, parent: usize, rot: &mut Vec<Vec<usize>>) -> usize {
    let v = rot.len();
    rot.push(vec![parent]);
    if let Shape::Node(children) = shape {
        for c in children {
            let w = build(c, v, rot);
            rot[v].push(w);
        }
    }
    v
}

/// All marked `(d+1)`-ended ribbon trees up to marked plane isomorphism.
pub fn enumerate_trees(d: usize) -> Result<Vec<RibbonTree>> {
    if d > 6 {
        return Err(Error::SizeLimit(format!("tree enumeration limited to d ≤ 6 (got {d})")));
    }
    if d < 2 {
        return Err(Error::Invalid("d must be at least 2".into()));
    }
    let mut memo = BTreeMap::new();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for s in shapes(d, &mut memo) {
        if matches!(s, Shape::Leaf) {
            continue;
        }
        let mut rot = vec![Vec::new()];
        let c = build(&s, 0, &mut rot);
        rot[0].push(c);
        let t = RibbonTree::new(rot, 0, None)?;
        if seen.insert(t.canonical()) {
            out.push(t);
        }
    }
    Ok(out)
}

/// Every tree from [`enumerate_trees`] paired with each choice of branch point.
pub fn enumerate_pointed(d: usize) -> Result<Vec<PointedMetricTree>> {
    let mut out = Vec::new();
    for t in enumerate_trees(d)? {
        for p in t.branch_points() {
            out.push(PointedMetricTree::new(t.clone(), p)?);
        }
    }
    Ok(out)
}

/// Extended pointed trees: a valence-2 special point on each edge of each
/// tree from [`enumerate_trees`], up to isomorphism.
pub fn enumerate_extended(d: usize) -> Result<Vec<PointedMetricTree>> {
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for t in enumerate_trees(d)? {
        for a in 0..t.vertex_count() {
            for &b in t.neighbors(a) {
                if b < a {
                    continue;
                }
                let (ext, p) = t.insert_on_edge(a, b)?;
                let (ct, num) = ext.canonical_relabel();
                if seen.insert((ct.canonical(), num[p])) {
                    out.push(PointedMetricTree::new(ext, p)?);
                }
            }
        }
    }
    Ok(out)
}
