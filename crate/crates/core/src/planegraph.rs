//! Plane graphs as rotation systems on the sphere.
//!
//! A graph is stored dart by dart: every edge contributes two darts swapped by
//! `opposite`, and `next_ccw` cycles through the darts at each vertex in
//! counterclockwise order. Faces are the orbits of `next_ccw ∘ opposite`,
//! which walks each face with the face on its left.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneGraph {
    n: usize,
    vertex_of: Vec<usize>,
    opposite: Vec<usize>,
    next_ccw: Vec<usize>,
    labels: BTreeMap<String, String>,
}

/// Wire format: `{ "vertices", "darts", "opposite", "next_ccw", "labels" }`,
/// where `darts[i]` is the vertex carrying dart `i`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: usize,
    pub darts: Vec<usize>,
    pub opposite: Vec<usize>,
    pub next_ccw: Vec<usize>,
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
}

impl PlaneGraph {
    /// Builds and validates a graph from raw dart data.
    pub fn new(n: usize, vertex_of: Vec<usize>, opposite: Vec<usize>, next_ccw: Vec<usize>) -> Result<Self> {
        let g = PlaneGraph { n, vertex_of, opposite, next_ccw, labels: BTreeMap::new() };
        g.validate()?;
        Ok(g)
    }

    /// Builds a graph from edges and per-vertex ccw dart lists. Dart `2e` sits
    /// at `edges[e].0`, dart `2e + 1` at `edges[e].1`.
    pub fn from_rotation(n: usize, edges: &[(usize, usize)], rotation: &[Vec<usize>]) -> Result<Self> {
        let nd = 2 * edges.len();
        let mut vertex_of = vec![usize::MAX; nd];
        let mut opposite = vec![0; nd];
        for (e, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::Invalid(format!("edge {e} references a missing vertex")));
            }
            vertex_of[2 * e] = u;
            vertex_of[2 * e + 1] = v;
            opposite[2 * e] = 2 * e + 1;
            opposite[2 * e + 1] = 2 * e;
        }
        if rotation.len() != n {
            return Err(Error::Invalid("rotation must list every vertex".into()));
        }
        let mut next_ccw = vec![usize::MAX; nd];
        for (v, darts) in rotation.iter().enumerate() {
            for (i, &d) in darts.iter().enumerate() {
                if d >= nd || vertex_of[d] != v || next_ccw[d] != usize::MAX {
                    return Err(Error::Invalid(format!("rotation at vertex {v} is inconsistent")));
                }
                next_ccw[d] = darts[(i + 1) % darts.len()];
            }
        }
        PlaneGraph::new(n, vertex_of, opposite, next_ccw)
    }

    /// Builds a simple graph from neighbor lists given in ccw order.
    pub fn from_adjacency(adj: &[Vec<usize>]) -> Result<Self> {
        let n = adj.len();
        let mut edge_id: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        for (u, nb) in adj.iter().enumerate() {
            for &v in nb {
                let key = (u.min(v), u.max(v));
                if u == v {
                    return Err(Error::Invalid("from_adjacency takes simple graphs".into()));
                }
                if !edge_id.contains_key(&key) {
                    edge_id.insert(key, edges.len());
                    edges.push(key);
                }
            }
        }
        let rotation: Vec<Vec<usize>> = adj
            .iter()
            .enumerate()
            .map(|(u, nb)| {
                nb.iter()
                    .map(|&v| {
                        let e = edge_id[&(u.min(v), u.max(v))];
                        if edges[e].0 == u {
                            2 * e
                        } else {
                            2 * e + 1
                        }
                    })
                    .collect()
            })
            .collect();
        PlaneGraph::from_rotation(n, &edges, &rotation)
    }

    /// Cycle on `n` vertices, drawn as a convex polygon.
    pub fn cycle(n: usize) -> Self {
        let adj: Vec<Vec<usize>> = (0..n).map(|i| vec![(i + 1) % n, (i + n - 1) % n]).collect();
        PlaneGraph::from_adjacency(&adj).expect("cycle is a valid plane graph")
    }

    /// Tetrahedron: triangle 0,1,2 counterclockwise with vertex 3 in the middle.
    pub fn k4() -> Self {
        PlaneGraph::from_adjacency(&[vec![1, 3, 2], vec![2, 3, 0], vec![0, 3, 1], vec![0, 1, 2]])
            .expect("K4 is a valid plane graph")
    }

    /// Square with the chord 0–2.
    pub fn c4_chord() -> Self {
        PlaneGraph::from_adjacency(&[vec![1, 2, 3], vec![2, 0], vec![3, 0, 1], vec![0, 2]])
            .expect("C4 plus chord is a valid plane graph")
    }

    /// Two vertices joined by `k` parallel edges.
    pub fn bouquet_dual(k: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..k).map(|_| (0, 1)).collect();
        let r0: Vec<usize> = (0..k).map(|e| 2 * e).collect();
        let r1: Vec<usize> = (0..k).rev().map(|e| 2 * e + 1).collect();
        PlaneGraph::from_rotation(2, &edges, &[r0, r1]).expect("parallel-edge graph is valid")
    }

    pub fn validate(&self) -> Result<()> {
        let nd = self.opposite.len();
        if self.vertex_of.len() != nd || self.next_ccw.len() != nd {
            return Err(Error::Invalid("dart arrays differ in length".into()));
        }
        if nd == 0 {
            if self.n == 1 {
                return Ok(());
            }
            return Err(Error::Invalid("graph without edges must be a single vertex".into()));
        }
        let mut seen = vec![false; nd];
        for d in 0..nd {
            let o = self.opposite[d];
            if o >= nd || o == d || self.opposite[o] != d {
                return Err(Error::Invalid(format!("opposite is not a fixed-point-free involution at dart {d}")));
            }
            let nx = self.next_ccw[d];
            if nx >= nd || seen[nx] {
                return Err(Error::Invalid("next_ccw is not a permutation".into()));
            }
            seen[nx] = true;
            if self.vertex_of[nx] != self.vertex_of[d] {
                return Err(Error::Invalid(format!("next_ccw leaves the vertex of dart {d}")));
            }
            if self.vertex_of[d] >= self.n {
                return Err(Error::Invalid(format!("dart {d} references a missing vertex")));
            }
        }
        // every vertex orbit of next_ccw must be exactly the darts of that vertex
        let mut orbit_of = vec![usize::MAX; nd];
        let mut orbits_per_vertex = vec![0usize; self.n];
        for d in 0..nd {
            if orbit_of[d] != usize::MAX {
                continue;
            }
            let mut x = d;
            loop {
                orbit_of[x] = d;
                x = self.next_ccw[x];
                if x == d {
                    break;
                }
            }
            orbits_per_vertex[self.vertex_of[d]] += 1;
        }
        if orbits_per_vertex.iter().any(|&c| c != 1) {
            return Err(Error::Invalid("each vertex needs exactly one rotation cycle".into()));
        }
        if !self.darts_connected() {
            return Err(Error::Invalid("graph is disconnected".into()));
        }
        let chi = self.n as i64 - self.edge_count() as i64 + self.face_count() as i64;
        if chi != 2 {
            return Err(Error::Invalid(format!("rotation system is not spherical (V−E+F = {chi})")));
        }
        Ok(())
    }

    fn darts_connected(&self) -> bool {
        let nd = self.dart_count();
        let mut seen = vec![false; nd];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(d) = stack.pop() {
            for y in [self.opposite[d], self.next_ccw[d]] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == nd
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn dart_count(&self) -> usize {
        self.opposite.len()
    }

    pub fn edge_count(&self) -> usize {
        self.opposite.len() / 2
    }

    pub fn vertex_of(&self, d: usize) -> usize {
        self.vertex_of[d]
    }

    pub fn opposite(&self, d: usize) -> usize {
        self.opposite[d]
    }

    pub fn next_ccw(&self, d: usize) -> usize {
        self.next_ccw[d]
    }

    /// Face successor: continue along the face lying to the left of `d`.
    pub fn face_next(&self, d: usize) -> usize {
        self.next_ccw[self.opposite[d]]
    }

    pub fn labels(&self) -> &BTreeMap<String, String> {
        &self.labels
    }

    pub fn with_labels(mut self, labels: BTreeMap<String, String>) -> Self {
        self.labels = labels;
        self
    }

    /// Head vertex of a dart (the vertex at the other end).
    pub fn head(&self, d: usize) -> usize {
        self.vertex_of[self.opposite[d]]
    }

    /// Darts at `v` in ccw order, starting from the smallest dart id.
    pub fn darts_at(&self, v: usize) -> Vec<usize> {
        let start = match (0..self.dart_count()).find(|&d| self.vertex_of[d] == v) {
            Some(d) => d,
            None => return Vec::new(),
        };
        self.rotation_from(start)
    }

    pub fn rotation_from(&self, start: usize) -> Vec<usize> {
        let mut out = vec![start];
        let mut x = self.next_ccw[start];
        while x != start {
            out.push(x);
            x = self.next_ccw[x];
        }
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.vertex_of.iter().filter(|&&u| u == v).count()
    }

    /// Edge index of a dart; edges are numbered by their smaller dart.
    pub fn edge_of(&self, d: usize) -> usize {
        d.min(self.opposite[d])
    }

    /// Representative dart (the smaller one) of each edge.
    pub fn edges(&self) -> Vec<usize> {
        (0..self.dart_count()).filter(|&d| d < self.opposite[d]).collect()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.darts_at(v).iter().map(|&d| self.head(d)).collect()
    }

    /// Faces as dart cycles, each starting at its smallest dart.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        let nd = self.dart_count();
        let mut seen = vec![false; nd];
        let mut out = Vec::new();
        for d in 0..nd {
            if seen[d] {
                continue;
            }
            let mut f = Vec::new();
            let mut x = d;
            while !seen[x] {
                seen[x] = true;
                f.push(x);
                x = self.face_next(x);
            }
            out.push(f);
        }
        out
    }

    pub fn face_count(&self) -> usize {
        self.faces().len()
    }

    /// Face index containing each dart (face on the left of the dart).
    pub fn face_of_darts(&self) -> Vec<usize> {
        let mut fo = vec![0; self.dart_count()];
        for (i, f) in self.faces().iter().enumerate() {
            for &d in f {
                fo[d] = i;
            }
        }
        fo
    }

    pub fn has_self_loop(&self) -> bool {
        (0..self.dart_count()).any(|d| self.head(d) == self.vertex_of[d])
    }

    pub fn is_simple(&self) -> bool {
        if self.has_self_loop() {
            return false;
        }
        let mut seen = HashSet::new();
        for d in self.edges() {
            let (u, v) = (self.vertex_of[d], self.head(d));
            if !seen.insert((u.min(v), u.max(v))) {
                return false;
            }
        }
        true
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            vertices: self.n,
            darts: self.vertex_of.clone(),
            opposite: self.opposite.clone(),
            next_ccw: self.next_ccw.clone(),
            labels: self.labels.clone(),
        }
    }

    pub fn from_json(j: &GraphJson) -> Result<Self> {
        Ok(PlaneGraph::new(j.vertices, j.darts.clone(), j.opposite.clone(), j.next_ccw.clone())?
            .with_labels(j.labels.clone()))
    }

    /// Adjacency sets of the underlying simple graph.
    fn simple_adjacency(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.n];
        for d in 0..self.dart_count() {
            let (u, v) = (self.vertex_of[d], self.head(d));
            if u != v {
                adj[u].insert(v);
            }
        }
        adj
    }

    /// Graphviz rendering with one comment line per face.
    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("graph {name} {{\n");
        for v in 0..self.n {
            let label = self.labels.get(&v.to_string()).cloned().unwrap_or_else(|| v.to_string());
            s.push_str(&format!("  v{v} [label=\"{label}\"];\n"));
        }
        for d in self.edges() {
            s.push_str(&format!("  v{} -- v{} [id=\"e{d}\"];\n", self.vertex_of[d], self.head(d)));
        }
        for (i, f) in self.faces().iter().enumerate() {
            let verts: Vec<String> = f.iter().map(|&d| self.vertex_of[d].to_string()).collect();
            s.push_str(&format!("  // face {i}: {}\n", verts.join(" ")));
        }
        s.push_str("}\n");
        s
    }
}

/// Planar dual: faces become vertices and the dart set is shared. The dual
/// rotation is the face permutation, so `dual(dual(G))` is `G` itself.
pub fn dual(g: &PlaneGraph) -> PlaneGraph {
    let vertex_of = g.face_of_darts();
    let n = g.face_count();
    let next: Vec<usize> = (0..g.dart_count()).map(|d| g.face_next(d)).collect();
    PlaneGraph::new(n, vertex_of, g.opposite.clone(), next).expect("dual of a plane graph is a plane graph")
}

fn connected_without(adj: &[BTreeSet<usize>], removed: &[usize]) -> bool {
    let n = adj.len();
    let start = match (0..n).find(|v| !removed.contains(v)) {
        Some(v) => v,
        None => return true,
    };
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &w in &adj[u] {
            if !seen[w] && !removed.contains(&w) {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    (0..n).all(|v| seen[v] || removed.contains(&v))
}

/// `true` iff `|V| > k` and removing any `k − 1` vertices leaves a connected graph.
pub fn is_k_connected(g: &PlaneGraph, k: usize) -> bool {
    let n = g.vertex_count();
    if n <= k {
        return false;
    }
    let adj = g.simple_adjacency();
    if !connected_without(&adj, &[]) {
        return false;
    }
    let mut subset = Vec::new();
    fn rec(adj: &[BTreeSet<usize>], start: usize, left: usize, subset: &mut Vec<usize>) -> bool {
        if left == 0 {
            return connected_without(adj, subset);
        }
        for v in start..adj.len() {
            subset.push(v);
            let ok = rec(adj, v + 1, left - 1, subset);
            subset.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    rec(&adj, 0, k - 1, &mut subset)
}

/// Pair of parallel edges bounding a vertex-free region, given by one dart of each.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bigon {
    pub u: usize,
    pub v: usize,
    pub darts: (usize, usize),
}

/// Trivial bigons: parallel edges `e`, `e′` with one complementary region
/// containing no vertex. At `u` the region swept ccw from `e` to `e′` meets
/// the region swept ccw from `e′` to `e` at `v`.
pub fn trivial_bigons(g: &PlaneGraph) -> Vec<Bigon> {
    let mut out = Vec::new();
    let nd = g.dart_count();
    for a in 0..nd {
        for a2 in (a + 1)..nd {
            let (u, v) = (g.vertex_of(a), g.head(a));
            if u == v || g.vertex_of(a2) != u || g.head(a2) != v || g.edge_of(a) == g.edge_of(a2) {
                continue;
            }
            if u > v {
                continue;
            }
            let (b, b2) = (g.opposite(a), g.opposite(a2));
            let empty1 = sector_is_empty(g, a, a2, u, v) && sector_is_empty(g, b2, b, u, v);
            let empty2 = sector_is_empty(g, a2, a, u, v) && sector_is_empty(g, b, b2, u, v);
            if empty1 || empty2 {
                out.push(Bigon { u, v, darts: (a, a2) });
            }
        }
    }
    out
}

/// Whether every dart strictly between `from` and `to` (ccw) leads into `{u, v}`.
fn sector_is_empty(g: &PlaneGraph, from: usize, to: usize, u: usize, v: usize) -> bool {
    let mut x = g.next_ccw(from);
    while x != to {
        let h = g.head(x);
        if h != u && h != v {
            return false;
        }
        x = g.next_ccw(x);
    }
    true
}

pub fn is_pseudo_simple(g: &PlaneGraph) -> bool {
    !g.has_self_loop() && trivial_bigons(g).is_empty()
}

/// Dart bijection `G → H` commuting with `opposite` and `next_ccw` that sends
/// `anchor_g` to `anchor_h`, if one exists.
fn extend_from_anchor(g: &PlaneGraph, h: &PlaneGraph, anchor_g: usize, anchor_h: usize) -> Option<Vec<usize>> {
    let nd = g.dart_count();
    let mut map = vec![usize::MAX; nd];
    let mut used = vec![false; h.dart_count()];
    map[anchor_g] = anchor_h;
    used[anchor_h] = true;
    let mut queue = VecDeque::from([anchor_g]);
    while let Some(d) = queue.pop_front() {
        let md = map[d];
        for (x, y) in [(g.opposite(d), h.opposite(md)), (g.next_ccw(d), h.next_ccw(md))] {
            if map[x] == usize::MAX {
                if used[y] {
                    return None;
                }
                map[x] = y;
                used[y] = true;
                queue.push_back(x);
            } else if map[x] != y {
                return None;
            }
        }
    }
    Some(map)
}

pub fn plane_isomorphic(g: &PlaneGraph, h: &PlaneGraph) -> Option<Vec<usize>> {
    if g.vertex_count() != h.vertex_count() || g.dart_count() != h.dart_count() {
        return None;
    }
    if g.dart_count() == 0 {
        return Some(Vec::new());
    }
    (0..h.dart_count()).find_map(|t| extend_from_anchor(g, h, 0, t))
}

/// Orientation-preserving plane automorphisms as dart permutations.
pub fn automorphisms(g: &PlaneGraph) -> Vec<Vec<usize>> {
    if g.dart_count() == 0 {
        return vec![Vec::new()];
    }
    (0..g.dart_count()).filter_map(|t| extend_from_anchor(g, g, 0, t)).collect()
}

/// Vertex map induced by a dart map.
pub fn induced_vertex_map(g: &PlaneGraph, h: &PlaneGraph, darts: &[usize]) -> Vec<usize> {
    let mut vm = vec![usize::MAX; g.vertex_count()];
    for (d, &m) in darts.iter().enumerate() {
        vm[g.vertex_of(d)] = h.vertex_of(m);
    }
    vm
}

/// Canonical code: minimum over start darts of the BFS relabelling of
/// `(opposite, next_ccw)`. Equal codes iff plane isomorphic.
pub fn canonical_code(g: &PlaneGraph) -> Vec<u32> {
    let nd = g.dart_count();
    let mut best: Option<Vec<u32>> = None;
    for s in 0..nd {
        let mut num = vec![u32::MAX; nd];
        let mut order = Vec::with_capacity(nd);
        num[s] = 0;
        order.push(s);
        let mut i = 0;
        while i < order.len() {
            let x = order[i];
            i += 1;
            for y in [g.opposite(x), g.next_ccw(x)] {
                if num[y] == u32::MAX {
                    num[y] = order.len() as u32;
                    order.push(y);
                }
            }
        }
        let mut code = Vec::with_capacity(2 * nd + 1);
        code.push(g.vertex_count() as u32);
        for &x in &order {
            code.push(num[g.opposite(x)]);
            code.push(num[g.next_ccw(x)]);
        }
        if best.as_ref().map(|b| code < *b).unwrap_or(true) {
            best = Some(code);
        }
    }
    best.unwrap_or_else(|| vec![g.vertex_count() as u32])
}

/// A plane-graph embedding `G ↪ H` recorded on darts, vertices and edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphEmbedding {
    pub vertex_map: Vec<usize>,
    /// Image dart of every dart of `G`.
    pub dart_map: Vec<usize>,
}

impl GraphEmbedding {
    /// Edge map on edge indices (smaller dart of each edge).
    pub fn edge_map(&self, g: &PlaneGraph, h: &PlaneGraph) -> BTreeMap<usize, usize> {
        g.edges().into_iter().map(|d| (d, h.edge_of(self.dart_map[d]))).collect()
    }
}

/// All embeddings `G ↪ H` between graphs with equal vertex counts: vertex
/// bijections, injective incidence-preserving edge maps, and the requirement
/// that at every vertex the ccw order of image darts restricts to the ccw
/// order of `G`.
pub fn embeddings(g: &PlaneGraph, h: &PlaneGraph) -> Vec<GraphEmbedding> {
    let n = g.vertex_count();
    if n != h.vertex_count() || g.edge_count() > h.edge_count() {
        return Vec::new();
    }
    let gdeg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let hdeg: Vec<usize> = (0..n).map(|v| h.degree(v)).collect();
    let mut out = Vec::new();
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn assign(
        i: usize,
        g: &PlaneGraph,
        h: &PlaneGraph,
        gdeg: &[usize],
        hdeg: &[usize],
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<GraphEmbedding>,
    ) {
        let n = perm.len();
        if i == n {
            edge_choices(g, h, perm, out);
            return;
        }
        for t in 0..n {
            if used[t] || hdeg[t] < gdeg[i] {
                continue;
            }
            perm[i] = t;
            // adjacency multiplicities must fit among already assigned vertices
            let fits = (0..i).all(|j| {
                let mg = count_between(g, i, j);
                mg == 0 || count_between(h, t, perm[j]) >= mg
            }) && count_between(g, i, i) <= count_between(h, t, t);
            if fits {
                used[t] = true;
                assign(i + 1, g, h, gdeg, hdeg, perm, used, out);
                used[t] = false;
            }
        }
        perm[i] = usize::MAX;
    }
    assign(0, g, h, &gdeg, &hdeg, &mut perm, &mut used, &mut out);
    out
}

fn count_between(g: &PlaneGraph, u: usize, v: usize) -> usize {
    g.edges().into_iter().filter(|&d| {
        let (a, b) = (g.vertex_of(d), g.head(d));
        (a == u && b == v) || (a == v && b == u)
    }).count()
}

fn edge_choices(g: &PlaneGraph, h: &PlaneGraph, perm: &[usize], out: &mut Vec<GraphEmbedding>) {
    let gedges = g.edges();
    let mut dart_map = vec![usize::MAX; g.dart_count()];
    let mut used = vec![false; h.dart_count()];
    fn rec(
        k: usize,
        gedges: &[usize],
        g: &PlaneGraph,
        h: &PlaneGraph,
        perm: &[usize],
        dart_map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<GraphEmbedding>,
    ) {
        if k == gedges.len() {
            if cyclic_orders_respected(g, h, dart_map) {
                out.push(GraphEmbedding { vertex_map: perm.to_vec(), dart_map: dart_map.clone() });
            }
            return;
        }
        let d = gedges[k];
        let (u, v) = (perm[g.vertex_of(d)], perm[g.head(d)]);
        for t in 0..h.dart_count() {
            if used[t] || h.vertex_of(t) != u || h.head(t) != v {
                continue;
            }
            let ot = h.opposite(t);
            used[t] = true;
            used[ot] = true;
            dart_map[d] = t;
            dart_map[g.opposite(d)] = ot;
            rec(k + 1, gedges, g, h, perm, dart_map, used, out);
            used[t] = false;
            used[ot] = false;
        }
        dart_map[d] = usize::MAX;
        dart_map[g.opposite(d)] = usize::MAX;
    }
    rec(0, &gedges, g, h, perm, &mut dart_map, &mut used, out);
}

fn cyclic_orders_respected(g: &PlaneGraph, h: &PlaneGraph, dart_map: &[usize]) -> bool {
    for v in 0..g.vertex_count() {
        let gd = g.darts_at(v);
        if gd.len() <= 2 {
            continue;
        }
        let images: HashSet<usize> = gd.iter().map(|&d| dart_map[d]).collect();
        let start = dart_map[gd[0]];
        let seq: Vec<usize> = h.rotation_from(start).into_iter().filter(|x| images.contains(x)).collect();
        let want: Vec<usize> = gd.iter().map(|&d| dart_map[d]).collect();
        if seq != want {
            return false;
        }
    }
    true
}

/// Audit that an embedding maps each face of `H` into a single face of `G`:
/// every face walk of `H` crosses image darts only from one face of `G`.
/// Returns the offending `H` face indices.
pub fn face_coherence_violations(g: &PlaneGraph, h: &PlaneGraph, emb: &GraphEmbedding) -> Vec<usize> {
    let gface = g.face_of_darts();
    let mut inverse = vec![usize::MAX; h.dart_count()];
    for (d, &m) in emb.dart_map.iter().enumerate() {
        inverse[m] = d;
    }
    let mut bad = Vec::new();
    for (i, f) in h.faces().iter().enumerate() {
        let owners: HashSet<usize> = f.iter().filter(|&&d| inverse[d] != usize::MAX).map(|&d| gface[inverse[d]]).collect();
        if owners.len() > 1 {
            bad.push(i);
        }
    }
    bad
}

/// Number of `Aut(G) × Aut(H)` orbits on the embeddings `G ↪ H`.
pub fn count_double_cosets(g: &PlaneGraph, h: &PlaneGraph) -> usize {
    let embs = embeddings(g, h);
    double_coset_orbits(g, h, &embs).len()
}

/// Orbits of `Aut(G) × Aut(H)` acting by `e ↦ β ∘ e ∘ α⁻¹`, as index lists.
pub fn double_coset_orbits(g: &PlaneGraph, h: &PlaneGraph, embs: &[GraphEmbedding]) -> Vec<Vec<usize>> {
    let ag = automorphisms(g);
    let ah = automorphisms(h);
    let index: HashMap<&Vec<usize>, usize> = embs.iter().enumerate().map(|(i, e)| (&e.dart_map, i)).collect();
    let mut orbit_of = vec![usize::MAX; embs.len()];
    let mut orbits = Vec::new();
    for i in 0..embs.len() {
        if orbit_of[i] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut members = Vec::new();
        for a in &ag {
            let mut ainv = vec![0; a.len()];
            for (x, &y) in a.iter().enumerate() {
                ainv[y] = x;
            }
            for b in &ah {
                let img: Vec<usize> = (0..g.dart_count()).map(|d| b[embs[i].dart_map[ainv[d]]]).collect();
                if let Some(&j) = index.get(&img) {
                    if orbit_of[j] == usize::MAX {
                        orbit_of[j] = id;
                        members.push(j);
                    }
                }
            }
        }
        members.sort_unstable();
        orbits.push(members);
    }
    orbits
}

/// Plane triangulations on `n ≥ 4` vertices, one per plane isomorphism class,
/// reached by edge flips from the bipyramid.
pub fn triangulations(n: usize) -> Vec<Vec<Vec<usize>>> {
    let start: Vec<Vec<usize>> = if n == 4 {
        vec![vec![1, 3, 2], vec![2, 3, 0], vec![0, 3, 1], vec![0, 1, 2]]
    } else {
        let m = n - 2;
        let (top, bottom) = (m, m + 1);
        let mut adj: Vec<Vec<usize>> = (0..m).map(|i| vec![bottom, (i + 1) % m, top, (i + m - 1) % m]).collect();
        adj.push((0..m).collect());
        adj.push((0..m).rev().collect());
        adj
    };
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::from([start]);
    while let Some(adj) = queue.pop_front() {
        let g = PlaneGraph::from_adjacency(&adj).expect("flip keeps a triangulation");
        if !seen.insert(canonical_code(&g)) {
            continue;
        }
        for u in 0..n {
            for &v in &adj[u] {
                if u < v {
                    if let Some(next) = flip(&adj, u, v) {
                        queue.push_back(next);
                    }
                }
            }
        }
        out.push(adj);
    }
    out
}

fn flip(adj: &[Vec<usize>], u: usize, v: usize) -> Option<Vec<Vec<usize>>> {
    let pos = |x: usize, y: usize| adj[x].iter().position(|&z| z == y).unwrap();
    let k = adj[u].len();
    let iv = pos(u, v);
    let a = adj[u][(iv + 1) % k];
    let b = adj[u][(iv + k - 1) % k];
    if a == b || adj[a].contains(&b) || adj[u].len() <= 3 || adj[v].len() <= 3 {
        return None;
    }
    let mut out = adj.to_vec();
    out[u].retain(|&z| z != v);
    out[v].retain(|&z| z != u);
    for (x, y) in [(a, b), (b, a)] {
        // u and v are cyclically adjacent around x; y goes between them
        let l = out[x].len();
        let iu = out[x].iter().position(|&z| z == u).unwrap();
        let ivx = out[x].iter().position(|&z| z == v).unwrap();
        let at = if (iu + 1) % l == ivx { iu + 1 } else { ivx + 1 };
        out[x].insert(at, y);
    }
    match PlaneGraph::from_adjacency(&out) {
        Ok(_) => Some(out),
        Err(_) => None,
    }
}

/// All 2-connected simple plane graphs on `n` vertices up to plane isomorphism.
///
/// Every simple plane graph extends to a plane triangulation on the same
/// vertices, so the classes are the 2-connected spanning subgraphs of the
/// triangulations, deduplicated by canonical code.
pub fn enumerate_atlas(n: usize) -> Result<Vec<PlaneGraph>> {
    if n > 7 {
        return Err(Error::SizeLimit(format!("atlas limited to n ≤ 7 (got {n})")));
    }
    if n < 4 {
        return Err(Error::Invalid(format!("atlas needs n ≥ 4 (got {n})")));
    }
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut out = Vec::new();
    for tri in triangulations(n) {
        let edges: Vec<(usize, usize)> =
            (0..n).flat_map(|u| tri[u].iter().filter(move |&&v| u < v).map(move |&v| (u, v))).collect();
        let m = edges.len();
        for mask in 0u32..(1u32 << m) {
            // keep at least n edges: fewer cannot be 2-connected
            if (m as u32 - mask.count_ones()) < n as u32 {
                continue;
            }
            let removed: HashSet<(usize, usize)> =
                (0..m).filter(|&i| mask & (1 << i) != 0).map(|i| edges[i]).collect();
            let adj: Vec<Vec<usize>> = (0..n)
                .map(|u| tri[u].iter().copied().filter(|&v| !removed.contains(&(u.min(v), u.max(v)))).collect())
                .collect();
            if adj.iter().any(|a| a.len() < 2) {
                continue;
            }
            let g = match PlaneGraph::from_adjacency(&adj) {
                Ok(g) => g,
                Err(_) => continue,
            };
            if !is_k_connected(&g, 2) {
                continue;
            }
            if seen.insert(canonical_code(&g)) {
                out.push(g);
            }
        }
    }
    out.sort_by_key(|g| (g.edge_count(), canonical_code(g)));
    Ok(out)
}

/// Hamiltonian cycles as vertex sequences starting at 0, one per cycle
/// (rotations and reversals identified).
pub fn hamiltonian_cycles(g: &PlaneGraph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    if n < 3 {
        return Vec::new();
    }
    let adj = g.simple_adjacency();
    let mut out = Vec::new();
    let mut path = vec![0];
    let mut used = vec![false; n];
    used[0] = true;
    fn rec(adj: &[BTreeSet<usize>], path: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let n = adj.len();
        let last = *path.last().unwrap();
        if path.len() == n {
            if adj[last].contains(&0) && path[1] < path[n - 1] {
                out.push(path.clone());
            }
            return;
        }
        for &w in &adj[last] {
            if !used[w] {
                used[w] = true;
                path.push(w);
                rec(adj, path, used, out);
                path.pop();
                used[w] = false;
            }
        }
    }
    rec(&adj, &mut path, &mut used, &mut out);
    out
}

/// Embeds the cycle `C_n` along a Hamiltonian cycle of `h`, returning the
/// embedding of `PlaneGraph::cycle(n)` that maps vertex `i` to `cycle[i]`.
pub fn cycle_embedding_along(h: &PlaneGraph, cycle: &[usize]) -> Option<GraphEmbedding> {
    let c = PlaneGraph::cycle(cycle.len());
    embeddings(&c, h).into_iter().find(|e| e.vertex_map == cycle)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_and_duals_of_small_graphs() {
        let k4 = PlaneGraph::k4();
        assert_eq!(k4.face_count(), 4);
        assert!(plane_isomorphic(&dual(&k4), &k4).is_some());
        let c5 = PlaneGraph::cycle(5);
        let d = dual(&c5);
        assert_eq!(d.vertex_count(), 2);
        assert_eq!(d.edge_count(), 5);
        assert!(plane_isomorphic(&d, &PlaneGraph::bouquet_dual(5)).is_some());
    }

    #[test]
    fn connectivity_examples() {
        let c4 = PlaneGraph::cycle(4);
        assert!(is_k_connected(&c4, 2));
        assert!(!is_k_connected(&c4, 3));
        assert!(is_k_connected(&PlaneGraph::k4(), 3));
        let p3 = PlaneGraph::from_adjacency(&[vec![1], vec![0, 2], vec![1]]).unwrap();
        assert!(!is_k_connected(&p3, 2));
    }

    #[test]
    fn bigons() {
        assert!(is_pseudo_simple(&PlaneGraph::k4()));
        assert!(!is_pseudo_simple(&PlaneGraph::bouquet_dual(2)));
    }

    #[test]
    fn automorphism_counts() {
        assert_eq!(automorphisms(&PlaneGraph::cycle(4)).len(), 8);
        assert_eq!(automorphisms(&PlaneGraph::k4()).len(), 12);
        let edge = PlaneGraph::from_adjacency(&[vec![1], vec![0]]).unwrap();
        assert_eq!(automorphisms(&edge).len(), 2);
    }

    #[test]
    fn atlas_four() {
        let a = enumerate_atlas(4).unwrap();
        assert_eq!(a.len(), 3);
        assert!(enumerate_atlas(8).is_err());
    }

    #[test]
    fn hamiltonian_counts() {
        assert_eq!(hamiltonian_cycles(&PlaneGraph::k4()).len(), 3);
        assert_eq!(hamiltonian_cycles(&PlaneGraph::cycle(4)).len(), 1);
        let star = PlaneGraph::from_adjacency(&[vec![1, 2, 3], vec![0], vec![0], vec![0]]).unwrap();
        assert!(hamiltonian_cycles(&star).is_empty());
    }
}
