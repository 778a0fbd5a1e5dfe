//! Tischler graphs, enrichments and the combinatorial verdicts built on them:
//! admissibility, boundedness, bifurcation, and arrow-structure compatibility.

use crate::error::{Error, Result};
use crate::planegraph::{
    automorphisms, count_double_cosets, cycle_embedding_along, double_coset_orbits, dual, embeddings,
    hamiltonian_cycles, induced_vertex_map, is_k_connected, plane_isomorphic, GraphEmbedding, PlaneGraph,
};
use crate::ribbontree::{enumerate_trees, RibbonTree};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Dual of a simple 2-connected plane graph; vertex `v` has local degree
/// `valence(v) − 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TischlerGraph {
    pub graph: PlaneGraph,
    pub degrees: Vec<usize>,
}

impl TischlerGraph {
    pub fn from_graph(graph: PlaneGraph) -> Result<Self> {
        let d = dual(&graph);
        if !d.is_simple() || !is_k_connected(&d, 2) {
            return Err(Error::NotRealizable("planar dual is not simple and 2-connected".into()));
        }
        let degrees = (0..graph.vertex_count()).map(|v| graph.degree(v) - 1).collect();
        Ok(TischlerGraph { graph, degrees })
    }

    /// Total degree `d`: one less than the number of faces.
    pub fn degree(&self) -> usize {
        self.graph.face_count() - 1
    }
}

pub fn tischler_of(gamma: &PlaneGraph) -> Result<TischlerGraph> {
    if gamma.vertex_count() < 3 {
        return Err(Error::NotRealizable("need at least 3 vertices".into()));
    }
    if !gamma.is_simple() {
        return Err(Error::NotRealizable("graph is not simple".into()));
    }
    if !is_k_connected(gamma, 2) {
        return Err(Error::NotRealizable("graph is not 2-connected".into()));
    }
    TischlerGraph::from_graph(dual(gamma))
}

/// Blowup of one vertex: a ribbon tree whose end with label `j` is glued to
/// dart `attach[j]` at that vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Blowup {
    pub tree: RibbonTree,
    pub attach: Vec<usize>,
}

impl Blowup {
    /// Trivial blowup: a star glued in rotation order.
    pub fn star(g: &PlaneGraph, v: usize) -> Blowup {
        Blowup { tree: RibbonTree::star(g.degree(v)), attach: g.darts_at(v) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Enrichment {
    pub base: TischlerGraph,
    pub blowups: Vec<Blowup>,
    pub result: PlaneGraph,
    /// Base vertex each result vertex came from.
    pub origin: Vec<usize>,
}

impl Enrichment {
    /// Crossing darts of the result keep the dart ids of the base graph.
    pub fn is_crossing(&self, dart: usize) -> bool {
        dart < self.base.graph.dart_count()
    }

    /// `Γ^{En}`: the planar dual of the enriched graph.
    pub fn dual_graph(&self) -> PlaneGraph {
        dual(&self.result)
    }

    /// The graph `Γ` whose Tischler graph is the base, sharing dart ids.
    pub fn gamma(&self) -> PlaneGraph {
        dual(&self.base.graph)
    }

    /// Embedding `Γ ↪ Γ^{En}` read off from the crossing darts.
    pub fn extract_embedding(&self) -> GraphEmbedding {
        let gamma = self.gamma();
        let en = self.dual_graph();
        let dart_map: Vec<usize> = (0..gamma.dart_count()).collect();
        let vertex_map = induced_vertex_map(&gamma, &en, &dart_map);
        GraphEmbedding { vertex_map, dart_map }
    }

    pub fn to_svg(&self) -> String {
        enrichment_svg(self)
    }
}

/// Replaces each vertex of `t` by its blowup tree.
pub fn enrich(t: &TischlerGraph, blowups: Vec<Blowup>) -> Result<Enrichment> {
    let g = &t.graph;
    if blowups.len() != g.vertex_count() {
        return Err(Error::Invalid("one blowup per vertex required".into()));
    }
    let nd = g.dart_count();
    // core vertex (v, c) -> result vertex id
    let mut vid: Vec<BTreeMap<usize, usize>> = Vec::new();
    let mut origin = Vec::new();
    for (v, b) in blowups.iter().enumerate() {
        let want = g.degree(v);
        let got = b.tree.ends().len();
        if got != want || b.attach.len() != want {
            return Err(Error::EndCountMismatch { vertex: v, got, want });
        }
        if b.attach.iter().any(|&x| x >= nd || g.vertex_of(x) != v) || g.rotation_from(b.attach[0]) != b.attach {
            return Err(Error::CyclicOrderViolation(v));
        }
        let mut m = BTreeMap::new();
        for c in b.tree.core() {
            m.insert(c, origin.len());
            origin.push(v);
        }
        vid.push(m);
    }
    let mut vertex_of = vec![usize::MAX; nd];
    let mut opposite: Vec<usize> = (0..nd).map(|x| g.opposite(x)).collect();
    // internal darts: (v, c, c2) -> id
    let mut internal: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
    for (v, b) in blowups.iter().enumerate() {
        for c in b.tree.core() {
            for &w in b.tree.neighbors(c) {
                if !b.tree.is_end(w) {
                    let id = vertex_of.len();
                    internal.insert((v, c, w), id);
                    vertex_of.push(vid[v][&c]);
                    opposite.push(usize::MAX);
                }
            }
        }
    }
    for (&(v, c, w), &id) in &internal {
        opposite[id] = internal[&(v, w, c)];
    }
    let total = vertex_of.len();
    let mut next_ccw = vec![usize::MAX; total];
    for (v, b) in blowups.iter().enumerate() {
        let labels = b.tree.end_labels();
        for c in b.tree.core() {
            let darts: Vec<usize> = b
                .tree
                .neighbors(c)
                .iter()
                .map(|&w| if b.tree.is_end(w) { b.attach[labels[&w]] } else { internal[&(v, c, w)] })
                .collect();
            for (i, &x) in darts.iter().enumerate() {
                if x < nd {
                    vertex_of[x] = vid[v][&c];
                }
                next_ccw[x] = darts[(i + 1) % darts.len()];
            }
        }
    }
    let result = PlaneGraph::new(origin.len(), vertex_of, opposite, next_ccw)?;
    if result.face_count() != g.face_count() {
        return Err(Error::Invalid("enrichment changed the face count".into()));
    }
    Ok(Enrichment { base: t.clone(), blowups, result, origin })
}

pub fn trivial_enrichment(t: &TischlerGraph) -> Enrichment {
    let b = (0..t.graph.vertex_count()).map(|v| Blowup::star(&t.graph, v)).collect();
    enrich(t, b).expect("stars always enrich")
}

/// Why an enrichment fails admissibility.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certificate {
    /// Dual edge from a vertex to itself (an essential curve cutting one edge).
    SelfLoop { dart: usize },
    /// Two dual edges joining the same vertices (a curve cutting two edges).
    Bigon { u: usize, v: usize, darts: (usize, usize) },
    CutVertex(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub certificate: Option<Certificate>,
}

/// Admissible iff the dual of the enriched graph is simple and 2-connected.
pub fn is_admissible(e: &Enrichment) -> Admissibility {
    let d = e.dual_graph();
    let cert = graph_defect(&d);
    Admissibility { admissible: cert.is_none(), certificate: cert }
}

fn graph_defect(d: &PlaneGraph) -> Option<Certificate> {
    for x in 0..d.dart_count() {
        if d.vertex_of(x) == d.head(x) {
            return Some(Certificate::SelfLoop { dart: x });
        }
    }
    let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for x in d.edges() {
        let (a, b) = (d.vertex_of(x), d.head(x));
        let key = (a.min(b), a.max(b));
        if let Some(&y) = seen.get(&key) {
            return Some(Certificate::Bigon { u: key.0, v: key.1, darts: (y, x) });
        }
        seen.insert(key, x);
    }
    if !is_k_connected(d, 2) {
        let adj = d.neighbors_sets();
        for v in 0..d.vertex_count() {
            if !connected_without(&adj, v) {
                return Some(Certificate::CutVertex(v));
            }
        }
        return Some(Certificate::CutVertex(0));
    }
    None
}

fn connected_without(adj: &[BTreeSet<usize>], removed: usize) -> bool {
    let n = adj.len();
    let Some(start) = (0..n).find(|&v| v != removed) else { return true };
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &w in &adj[u] {
            if w != removed && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    (0..n).all(|v| v == removed || seen[v])
}

/// Every enrichment of `t`: at each vertex, every marked ribbon tree with the
/// right end count, its marked end glued to the first dart at the vertex.
/// Returns `None` past `limit` combinations.
pub fn enumerate_blowups(t: &TischlerGraph, limit: usize) -> Result<Vec<Vec<Blowup>>> {
    let g = &t.graph;
    let mut per_vertex: Vec<Vec<Blowup>> = Vec::new();
    let mut total: usize = 1;
    for v in 0..g.vertex_count() {
        let k = g.degree(v);
        let attach = g.darts_at(v);
        let trees = if k < 3 { return Err(Error::Invalid(format!("vertex {v} has valence {k}"))) } else { enumerate_trees(k - 1)? };
        total = total.saturating_mul(trees.len());
        if total > limit {
            return Err(Error::SizeLimit(format!("more than {limit} enrichments")));
        }
        per_vertex.push(trees.into_iter().map(|tree| Blowup { tree, attach: attach.clone() }).collect());
    }
    let mut out: Vec<Vec<Blowup>> = vec![Vec::new()];
    for choices in per_vertex {
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for partial in &out {
            for c in &choices {
                let mut p = partial.clone();
                p.push(c.clone());
                next.push(p);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Adds an edge inside the face to the left of `at_u` and `at_v`, which must
/// both leave vertices on that face; the new edge leaves along the corner
/// before each of them.
pub fn add_chord(g: &PlaneGraph, at_u: usize, at_v: usize) -> Result<PlaneGraph> {
    let faces = g.face_of_darts();
    if faces[at_u] != faces[at_v] {
        return Err(Error::Invalid("chord endpoints are not on a common face".into()));
    }
    let nd = g.dart_count();
    let (a, b) = (nd, nd + 1);
    let mut vertex_of: Vec<usize> = (0..nd).map(|x| g.vertex_of(x)).collect();
    let mut opposite: Vec<usize> = (0..nd).map(|x| g.opposite(x)).collect();
    let mut next: Vec<usize> = (0..nd).map(|x| g.next_ccw(x)).collect();
    vertex_of.extend([g.vertex_of(at_u), g.vertex_of(at_v)]);
    opposite.extend([b, a]);
    next.extend([0, 0]);
    for (new, out) in [(a, at_u), (b, at_v)] {
        // predecessor of `out` in the rotation gets the new dart as successor
        let pred = (0..nd).find(|&x| g.next_ccw(x) == out).unwrap();
        next[pred] = new;
        next[new] = out;
    }
    PlaneGraph::new(g.vertex_count(), vertex_of, opposite, next)
}

/// Enrichment realizing an embedding `Γ ↪ Γ′`: inside each face of `Γ` the
/// extra edges of `Γ′` cut the face into chambers, and the blowup tree is the
/// tree of chambers.
pub fn enrichment_from_embedding(gamma: &PlaneGraph, gamma2: &PlaneGraph, emb: &GraphEmbedding) -> Result<Enrichment> {
    let t = tischler_of(gamma)?;
    let chambers = chamber_map(gamma, gamma2, emb)?;
    let faces2 = gamma2.face_of_darts();
    let mut image_of = vec![usize::MAX; gamma2.dart_count()];
    for (d, &m) in emb.dart_map.iter().enumerate() {
        image_of[m] = d;
    }
    let mut blowups = Vec::new();
    for v in 0..t.graph.vertex_count() {
        let ch: Vec<usize> = chambers.iter().enumerate().filter(|(_, &f)| f == v).map(|(c, _)| c).collect();
        let idx: BTreeMap<usize, usize> = ch.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let darts_v = t.graph.darts_at(v);
        let m = ch.len();
        // vertices: chambers 0..m, then one end per dart of v
        let end_of: BTreeMap<usize, usize> = darts_v.iter().enumerate().map(|(i, &x)| (x, m + i)).collect();
        let mut rot: Vec<Vec<usize>> = vec![Vec::new(); m + darts_v.len()];
        let all_faces = gamma2.faces();
        for (i, &c) in ch.iter().enumerate() {
            for &x in &all_faces[c] {
                if image_of[x] != usize::MAX {
                    let e = end_of[&image_of[x]];
                    rot[i].push(e);
                    rot[e].push(i);
                } else {
                    rot[i].push(idx[&faces2[gamma2.opposite(x)]]);
                }
            }
        }
        let marked = end_of[&darts_v[0]];
        let tree = RibbonTree::new(rot, marked, None)
            .map_err(|e| Error::NotRealizable(format!("chambers in face {v} do not form a ribbon tree: {e}")))?;
        let attach: Vec<usize> = tree.ends().iter().map(|&e| darts_v[e - m]).collect();
        blowups.push(Blowup { tree, attach });
    }
    enrich(&t, blowups)
}

/// Face of `Γ` containing each face of `Γ′` under the embedding.
fn chamber_map(gamma: &PlaneGraph, gamma2: &PlaneGraph, emb: &GraphEmbedding) -> Result<Vec<usize>> {
    let gface = gamma.face_of_darts();
    let faces2 = gamma2.face_of_darts();
    let nf2 = gamma2.face_count();
    let mut image_of = vec![usize::MAX; gamma2.dart_count()];
    for (d, &m) in emb.dart_map.iter().enumerate() {
        image_of[m] = d;
    }
    let mut parent: Vec<usize> = (0..nf2).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for x in 0..gamma2.dart_count() {
        if image_of[x] == usize::MAX {
            let (a, b) = (find(&mut parent, faces2[x]), find(&mut parent, faces2[gamma2.opposite(x)]));
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    for x in 0..gamma2.dart_count() {
        if image_of[x] != usize::MAX {
            let r = find(&mut parent, faces2[x]);
            let f = gface[image_of[x]];
            if *owner.entry(r).or_insert(f) != f {
                return Err(Error::NotRealizable("embedding is not face coherent".into()));
            }
        }
    }
    (0..nf2)
        .map(|c| {
            let r = find(&mut parent, c);
            owner.get(&r).copied().ok_or_else(|| Error::NotRealizable("chamber without boundary edge".into()))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Bounded,
    Unbounded { cut: (usize, usize), witness: Box<Enrichment> },
}

/// Bounded iff `Γ` is 3-connected; otherwise a non-admissible enrichment
/// built from a 2-cut.
pub fn boundedness_verdict(gamma: &PlaneGraph) -> Result<Verdict> {
    tischler_of(gamma)?;
    if is_k_connected(gamma, 3) {
        return Ok(Verdict::Bounded);
    }
    let n = gamma.vertex_count();
    let adj = gamma.neighbors_sets();
    for u in 0..n {
        for v in (u + 1)..n {
            if !two_removed_connected(&adj, u, v) {
                if let Some(w) = two_cut_witness(gamma, u, v)? {
                    return Ok(Verdict::Unbounded { cut: (u, v), witness: Box::new(w) });
                }
            }
        }
    }
    Err(Error::NotRealizable("no usable 2-cut found".into()))
}

fn two_removed_connected(adj: &[BTreeSet<usize>], a: usize, b: usize) -> bool {
    let n = adj.len();
    let Some(start) = (0..n).find(|&v| v != a && v != b) else { return true };
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for &w in &adj[x] {
            if w != a && w != b && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    (0..n).all(|v| v == a || v == b || seen[v])
}

/// Chords `u–v` in faces where `u`, `v` are not consecutive; one chord if
/// `u`, `v` are already adjacent, two otherwise, so the result has a
/// non-trivial parallel pair.
fn two_cut_witness(gamma: &PlaneGraph, u: usize, v: usize) -> Result<Option<Enrichment>> {
    let adjacent = gamma.neighbors(u).contains(&v);
    let need = if adjacent { 1 } else { 2 };
    let mut g2 = gamma.clone();
    let mut added = 0;
    let face_count = gamma.face_count();
    for fi in 0..face_count {
        if added == need {
            break;
        }
        // faces of g2 with index < face_count keep their identity only loosely;
        // recompute from the original face walk each time
        let face = &gamma.faces()[fi];
        let verts: Vec<usize> = face.iter().map(|&x| gamma.vertex_of(x)).collect();
        let k = verts.len();
        let (Some(iu), Some(iv)) = (verts.iter().position(|&x| x == u), verts.iter().position(|&x| x == v)) else {
            continue;
        };
        if (iu + 1) % k == iv || (iv + 1) % k == iu {
            continue;
        }
        g2 = add_chord(&g2, face[iu], face[iv])?;
        added += 1;
    }
    if added < need {
        return Ok(None);
    }
    let emb = GraphEmbedding {
        vertex_map: (0..gamma.vertex_count()).collect(),
        dart_map: (0..gamma.dart_count()).collect(),
    };
    let e = enrichment_from_embedding(gamma, &g2, &emb)?;
    Ok(if is_admissible(&e).admissible { None } else { Some(e) })
}

#[derive(Clone, Debug)]
pub struct Bifurcation {
    pub bifurcates: bool,
    pub embeddings: Vec<GraphEmbedding>,
    /// Double-coset orbits as indices into `embeddings`.
    pub orbits: Vec<Vec<usize>>,
    /// One enrichment per orbit.
    pub enrichments: Vec<Enrichment>,
}

/// `Γ′` strictly dominates `Γ`: an embedding exists and `Γ′` has more edges.
pub fn bifurcates(gamma: &PlaneGraph, gamma2: &PlaneGraph) -> Result<Bifurcation> {
    if gamma.vertex_count() != gamma2.vertex_count() {
        return Err(Error::Invalid("graphs must have the same vertex count".into()));
    }
    let embs = embeddings(gamma, gamma2);
    let strict = gamma2.edge_count() > gamma.edge_count();
    if embs.is_empty() || !strict {
        return Ok(Bifurcation { bifurcates: false, embeddings: embs, orbits: Vec::new(), enrichments: Vec::new() });
    }
    let orbits = double_coset_orbits(gamma, gamma2, &embs);
    let enrichments = orbits
        .iter()
        .map(|o| enrichment_from_embedding(gamma, gamma2, &embs[o[0]]))
        .collect::<Result<Vec<_>>>()?;
    Ok(Bifurcation { bifurcates: true, embeddings: embs, orbits, enrichments })
}

/// `N(Γ ↪ Γ′)`, a lower bound on the number of root-locus components.
pub fn embedding_class_count(gamma: &PlaneGraph, gamma2: &PlaneGraph) -> usize {
    count_double_cosets(gamma, gamma2)
}

/// Face decoration of `Γ′`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Decoration {
    Dot,
    /// Arrow toward the edge of this dart (which lies on the face).
    Arrow(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArrowedGraph {
    pub graph: PlaneGraph,
    /// One decoration per face, indexed like `graph.faces()`.
    pub decoration: Vec<Decoration>,
}

/// Degeneration diagram: an embedding `Γ ↪ Γ′`.
#[derive(Clone, Debug)]
pub struct Diagram {
    pub gamma: PlaneGraph,
    pub gamma2: PlaneGraph,
    pub emb: GraphEmbedding,
}

impl Diagram {
    /// Chambers (faces of `Γ′`) grouped by the face of `Γ` containing them.
    pub fn chambers(&self) -> Result<Vec<Vec<usize>>> {
        let owner = chamber_map(&self.gamma, &self.gamma2, &self.emb)?;
        let mut out = vec![Vec::new(); self.gamma.face_count()];
        for (c, &f) in owner.iter().enumerate() {
            out[f].push(c);
        }
        Ok(out)
    }

    fn image_darts(&self) -> BTreeSet<usize> {
        self.emb.dart_map.iter().copied().collect()
    }
}

fn validate_decoration(g: &PlaneGraph, dec: &[Decoration]) -> Result<()> {
    let faces = g.face_of_darts();
    if dec.len() != g.face_count() {
        return Err(Error::DecorationMismatch(format!("{} decorations for {} faces", dec.len(), g.face_count())));
    }
    for (f, d) in dec.iter().enumerate() {
        if let Decoration::Arrow(x) = *d {
            if x >= g.dart_count() || faces[x] != f {
                return Err(Error::DecorationMismatch(format!("arrow in face {f} names dart {x} off the face")));
            }
        }
    }
    Ok(())
}

/// Within each face of `Γ`, the arrows must all flow to one sink: a dotted
/// chamber, an edge of `Γ`, or a chord that both of its chambers aim at.
pub fn arrow_compatible(diagram: &Diagram, arrows: &ArrowedGraph) -> Result<bool> {
    if plane_isomorphic(&diagram.gamma2, &arrows.graph).is_none() || arrows.graph != diagram.gamma2 {
        return Err(Error::DecorationMismatch("decorated graph differs from the diagram".into()));
    }
    validate_decoration(&arrows.graph, &arrows.decoration)?;
    let image = diagram.image_darts();
    let faces2 = diagram.gamma2.face_of_darts();
    for group in diagram.chambers()? {
        let mut sinks = 0;
        let mut target: BTreeMap<usize, usize> = BTreeMap::new();
        for &c in &group {
            match arrows.decoration[c] {
                Decoration::Dot => sinks += 1,
                Decoration::Arrow(x) if image.contains(&x) => sinks += 1,
                Decoration::Arrow(x) => {
                    target.insert(c, faces2[diagram.gamma2.opposite(x)]);
                }
            }
        }
        // two chambers pointing at each other aim at their common edge
        let mutual: Vec<usize> = target.iter().filter(|&(&a, &b)| a < b && target.get(&b) == Some(&a)).map(|(&a, _)| a).collect();
        if sinks + mutual.len() != 1 {
            return Ok(false);
        }
        for &c in &group {
            let mut cur = c;
            let mut steps = 0;
            while let Some(&n) = target.get(&cur) {
                if target.get(&n) == Some(&cur) {
                    break;
                }
                cur = n;
                steps += 1;
                if steps > group.len() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// All decorations compatible with a diagram, built face by face of `Γ`.
pub fn compatible_decorations(diagram: &Diagram, limit: usize) -> Result<Vec<Vec<Decoration>>> {
    let g2 = &diagram.gamma2;
    let faces = g2.faces();
    let faces2 = g2.face_of_darts();
    let image = diagram.image_darts();
    let mut partial: Vec<Vec<Decoration>> = vec![vec![Decoration::Dot; g2.face_count()]];
    for group in diagram.chambers()? {
        let set: BTreeSet<usize> = group.iter().copied().collect();
        // chamber adjacency: dart from c into neighbor
        let mut toward: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &c in &group {
            for &x in &faces[c] {
                let o = faces2[g2.opposite(x)];
                if !image.contains(&x) && set.contains(&o) {
                    toward.insert((c, o), x);
                }
            }
        }
        let mut local: Vec<Vec<(usize, Decoration)>> = Vec::new();
        for &s in &group {
            let mut sink_options = vec![Decoration::Dot];
            sink_options.extend(faces[s].iter().filter(|x| image.contains(x)).map(|&x| Decoration::Arrow(x)));
            // orient all other chambers toward s by BFS over the chamber tree
            let mut dec = vec![(s, Decoration::Dot)];
            let mut queue = std::collections::VecDeque::from([s]);
            let mut seen = BTreeSet::from([s]);
            while let Some(c) = queue.pop_front() {
                for (&(a, b), _) in toward.range((c, 0)..(c + 1, 0)) {
                    debug_assert_eq!(a, c);
                    if seen.insert(b) {
                        dec.push((b, Decoration::Arrow(toward[&(b, c)])));
                        queue.push_back(b);
                    }
                }
            }
            for opt in sink_options {
                let mut d = dec.clone();
                d[0] = (s, opt);
                local.push(d);
            }
            // sink on the chord between s and a neighbor: both aim at it
            for (&(a, b), &x) in toward.range((s, 0)..(s + 1, 0)) {
                debug_assert_eq!(a, s);
                let mut d = dec.clone();
                d[0] = (s, Decoration::Arrow(x));
                if let Some(slot) = d.iter_mut().find(|(c, _)| *c == b) {
                    slot.1 = Decoration::Arrow(toward[&(b, s)]);
                }
                // keep each chord sink once: only from its smaller chamber
                if s < b {
                    local.push(d);
                }
            }
        }
        let mut next = Vec::new();
        for p in &partial {
            for l in &local {
                let mut q = p.clone();
                for &(c, d) in l {
                    q[c] = d;
                }
                next.push(q);
            }
        }
        if next.len() > limit {
            return Err(Error::SizeLimit(format!("more than {limit} decorations")));
        }
        partial = next;
    }
    Ok(partial)
}

/// Decorations compatible with both diagrams on the same `Γ′`.
pub fn common_arrow_structures(a: &Diagram, b: &Diagram) -> Result<Vec<Vec<Decoration>>> {
    let cands = compatible_decorations(a, 1 << 20)?;
    let mut out = Vec::new();
    for dec in cands {
        let ag = ArrowedGraph { graph: b.gamma2.clone(), decoration: dec };
        if arrow_compatible(b, &ag)? {
            out.push(ag.decoration);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatingPair {
    pub a: usize,
    pub b: usize,
    /// A decoration compatible with both diagrams, if one exists.
    pub common: Option<Vec<Decoration>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatingReport {
    pub cycles: Vec<Vec<usize>>,
    /// Orbits of Hamiltonian cycles under plane automorphisms (indices into `cycles`).
    pub orbits: Vec<Vec<usize>>,
    /// One entry per pair of orbit representatives.
    pub pairs: Vec<MatingPair>,
}

fn cycle_key(cycle: &[usize]) -> BTreeSet<(usize, usize)> {
    let n = cycle.len();
    (0..n).map(|i| (cycle[i].min(cycle[(i + 1) % n]), cycle[i].max(cycle[(i + 1) % n]))).collect()
}

pub fn diagram_along(gamma2: &PlaneGraph, cycle: &[usize]) -> Result<Diagram> {
    let emb = cycle_embedding_along(gamma2, cycle)
        .ok_or_else(|| Error::Invalid("cycle does not embed as a plane cycle".into()))?;
    Ok(Diagram { gamma: PlaneGraph::cycle(cycle.len()), gamma2: gamma2.clone(), emb })
}

/// Hamiltonian cycles of `Γ′` up to automorphism, and for each pair of
/// inequivalent cycles whether one arrow structure fits both matings.
pub fn shared_mating_report(gamma2: &PlaneGraph) -> Result<MatingReport> {
    let cycles = hamiltonian_cycles(gamma2);
    let keys: Vec<BTreeSet<(usize, usize)>> = cycles.iter().map(|c| cycle_key(c)).collect();
    let auts = automorphisms(gamma2);
    let vmaps: Vec<Vec<usize>> = auts.iter().map(|a| induced_vertex_map(gamma2, gamma2, a)).collect();
    let mut orbit_of = vec![usize::MAX; cycles.len()];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for i in 0..cycles.len() {
        if orbit_of[i] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut members = Vec::new();
        for vm in &vmaps {
            let img: Vec<usize> = cycles[i].iter().map(|&v| vm[v]).collect();
            let k = cycle_key(&img);
            if let Some(j) = keys.iter().position(|x| *x == k) {
                if orbit_of[j] == usize::MAX {
                    orbit_of[j] = id;
                    members.push(j);
                }
            }
        }
        members.sort_unstable();
        orbits.push(members);
    }
    let mut pairs = Vec::new();
    for a in 0..orbits.len() {
        for b in (a + 1)..orbits.len() {
            let (ca, cb) = (orbits[a][0], orbits[b][0]);
            let da = diagram_along(gamma2, &cycles[ca])?;
            let db = diagram_along(gamma2, &cycles[cb])?;
            let common = common_arrow_structures(&da, &db)?.into_iter().next();
            pairs.push(MatingPair { a: ca, b: cb, common });
        }
    }
    Ok(MatingReport { cycles, orbits, pairs })
}

fn enrichment_svg(e: &Enrichment) -> String {
    let g = &e.result;
    let nb = e.base.graph.vertex_count();
    let (c, r) = (272.0, 200.0);
    let mut pos = vec![(0.0, 0.0); g.vertex_count()];
    for v in 0..nb {
        let members: Vec<usize> = (0..g.vertex_count()).filter(|&x| e.origin[x] == v).collect();
        let a = std::f64::consts::TAU * v as f64 / nb as f64;
        let (bx, by) = (c + r * a.cos(), c - r * a.sin());
        let k = members.len();
        for (i, &x) in members.iter().enumerate() {
            let b = std::f64::consts::TAU * i as f64 / k.max(1) as f64;
            let rr = if k == 1 { 0.0 } else { 36.0 };
            pos[x] = (bx + rr * b.cos(), by - rr * b.sin());
        }
    }
    let mut s = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"544\" height=\"544\" viewBox=\"0 0 544 544\">\n",
    );
    let mut multiplicity: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for x in g.edges() {
        let (a, b) = (g.vertex_of(x), g.head(x));
        let k = multiplicity.entry((a.min(b), a.max(b))).or_insert(0);
        let bend = 24.0 * (*k as f64) * if *k % 2 == 0 { 1.0 } else { -1.0 };
        *k += 1;
        let ((x1, y1), (x2, y2)) = (pos[a], pos[b]);
        let (mx, my) = ((x1 + x2) / 2.0, (y1 + y2) / 2.0);
        let (dx, dy) = (x2 - x1, y2 - y1);
        let l = (dx * dx + dy * dy).sqrt().max(1e-9);
        let (qx, qy) = (mx - dy / l * bend, my + dx / l * bend);
        let style = if e.is_crossing(x) { "stroke=\"red\" stroke-dasharray=\"6 3\"" } else { "stroke=\"black\"" };
        if a == b {
            s.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"14\" fill=\"none\" {style}/>\n",
                x1 + 14.0,
                y1
            ));
        } else {
            s.push_str(&format!(
                "<path d=\"M {x1:.2} {y1:.2} Q {qx:.2} {qy:.2} {x2:.2} {y2:.2}\" fill=\"none\" {style}/>\n"
            ));
        }
    }
    for (x, y) in &pos {
        s.push_str(&format!("<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"5\" fill=\"blue\"/>\n"));
    }
    s.push_str("</svg>\n");
    s
}

/// Graphs and enrichments drawn from worked pictures, rebuilt combinatorially.
pub mod fixtures {
    use super::*;

    /// Both vertices of the Tischler graph of `z̄³` (two vertices, four
    /// parallel edges) split by the same 4-ended tree, so that the two new
    /// edges of `Γ^{En}` are parallel chords of the square.
    pub fn nsg() -> Result<Enrichment> {
        let c4 = PlaneGraph::cycle(4);
        let faces = c4.faces();
        // chord 0–2 inside each face of the square
        let mut g2 = c4.clone();
        for f in &faces {
            let at = |v: usize| *f.iter().find(|&&x| c4.vertex_of(x) == v).unwrap();
            g2 = add_chord(&g2, at(0), at(2))?;
        }
        let emb = GraphEmbedding { vertex_map: (0..4).collect(), dart_map: (0..c4.dart_count()).collect() };
        enrichment_from_embedding(&c4, &g2, &emb)
    }

    fn graph(adj: &[Vec<usize>]) -> PlaneGraph {
        PlaneGraph::from_adjacency(adj).expect("fixture graph is a valid plane graph")
    }

    /// Self-bump pair: `Γ` embeds into `Γ′` in two inequivalent ways (both
    /// automorphism groups are trivial), each face of `Γ` is cut into at most
    /// two chambers, and the decoration is compatible with both diagrams.
    pub fn sb1a() -> (PlaneGraph, PlaneGraph, Vec<Decoration>) {
        let gamma = graph(&[vec![4, 3], vec![2, 3], vec![1, 4, 3], vec![0, 1, 2], vec![0, 2]]);
        let gamma2 = graph(&[vec![3, 2], vec![4, 2, 3], vec![0, 3, 1, 4], vec![0, 1, 2], vec![1, 2]]);
        let dec = vec![Decoration::Dot, Decoration::Dot, Decoration::Arrow(6), Decoration::Arrow(11)];
        (gamma, gamma2, dec)
    }

    /// Shared mating: a six-vertex graph with trivial automorphism group and
    /// exactly two Hamiltonian cycles, plus an arrow structure compatible
    /// with both mating diagrams.
    pub fn sb2() -> (PlaneGraph, Vec<Decoration>) {
        let g = graph(&[vec![1, 4, 3], vec![0, 3, 4], vec![5, 4], vec![0, 4, 5, 1], vec![0, 1, 2, 3], vec![2, 3]]);
        let dec = [6, 2, 4, 8, 15].into_iter().map(Decoration::Arrow).collect();
        (g, dec)
    }

    /// Disconnected roots: a seven-vertex graph with trivial automorphism
    /// group and exactly two Hamiltonian cycles admitting no common arrow
    /// structure.
    pub fn nsb() -> PlaneGraph {
        graph(&[vec![1, 5, 4], vec![0, 6, 2, 5], vec![1, 5], vec![6, 4, 5], vec![0, 5, 3, 6], vec![0, 1, 2, 3, 4], vec![1, 4, 3]])
    }
}

trait NeighborSets {
    fn neighbors_sets(&self) -> Vec<BTreeSet<usize>>;
}

impl NeighborSets for PlaneGraph {
    fn neighbors_sets(&self) -> Vec<BTreeSet<usize>> {
        (0..self.vertex_count())
            .map(|v| self.neighbors(v).into_iter().filter(|&w| w != v).collect())
            .collect()
    }
}
