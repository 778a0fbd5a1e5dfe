use clap::{Args, Parser, Subcommand};
use paredlab::blaschke::{AntiBlaschke, BlaschkeJson};
use paredlab::degeneration::{self as degen, Family, FamilyJson, VerifyOptions, DEFAULT_GRID, DEFAULT_SPLIT};
use paredlab::hypdisk::Pt;
use paredlab::lamination::{self, Chord};
use paredlab::monodromy::{self as mono, PathRecord, TracedPath};
use paredlab::mp::{self, Cx};
use paredlab::planegraph::{self as pg, GraphJson, PlaneGraph};
use paredlab::ribbontree::{PointedMetricTree, TreeJson};
use paredlab::tischler::{self, fixtures, Blowup, Enrichment, Verdict};
use paredlab::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Parser, Serialize)]
#[command(name = "paredlab", version, about = "Pared deformation spaces of critically fixed anti-rational maps")]
struct Cli {
    /// Directory for artifacts and the manifest.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Seed for randomized sweeps, recorded in the manifest.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
enum Command {
    /// Plane graph classes on n vertices, verdicts and the domination poset.
    Atlas {
        #[arg(long)]
        n: usize,
    },
    /// Bounded or Unbounded, with a witness enrichment when unbounded.
    Verdict(GraphArg),
    /// Whether the deformation space of Γ bifurcates into that of Γ′.
    Bifurcates {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        into: PathBuf,
    },
    /// Enrich the Tischler graph of Γ by blowup trees (trivial by default).
    Enrich {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        blowups: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Admissibility of one enrichment, or a search over all of them.
    Admissible {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        blowups: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        limit: usize,
    },
    /// Hamiltonian cycles of Γ′ and common arrow structures of their matings.
    MatingReport(GraphArg),
    /// Pullback lamination of `m_{-d}` from simple generators.
    Lamination {
        #[arg(long)]
        d: usize,
        /// Leaves as `a:b`, comma separated, e.g. `1/8:5/8`.
        #[arg(long)]
        gens: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        dual: bool,
    },
    #[command(subcommand)]
    Blaschke(BlaschkeCmd),
    #[command(subcommand)]
    Degen(DegenCmd),
    #[command(subcommand)]
    Mono(MonoCmd),
    /// Human-readable summary of the artifacts in a run directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Args, Serialize)]
struct GraphArg {
    /// Plane graph JSON file.
    #[arg(long, conflicts_with = "fixture")]
    graph: Option<PathBuf>,
    /// Built-in graph: C<n>, K4, C4+chord, nsb, sb2.
    #[arg(long)]
    fixture: Option<String>,
}

#[derive(Subcommand, Serialize)]
enum BlaschkeCmd {
    /// Fixed points, multipliers and critical points of one map.
    Analyze {
        /// Map JSON file.
        #[arg(long, conflicts_with = "zeros")]
        map: Option<PathBuf>,
        /// Zeros other than the origin as `re,im` separated by spaces.
        #[arg(long, allow_hyphen_values = true)]
        zeros: Option<String>,
        /// Pared bound on multipliers.
        #[arg(long)]
        k: Option<f64>,
        /// Quasi-fixed bound on critical displacement.
        #[arg(long)]
        m: Option<f64>,
    },
}

#[derive(Subcommand, Serialize)]
enum DegenCmd {
    /// Family of maps degenerating along a pointed or extended tree.
    Realize {
        #[arg(long)]
        tree: PathBuf,
        /// Comma-separated grid of scales.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Tree read off the critical clusters of a family.
    Extract {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SPLIT)]
        split: f64,
    },
    /// Checks a family against a tree.
    Verify {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        family: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SPLIT)]
        split: f64,
        /// Fixed quasi-fixed bound instead of the fitted one.
        #[arg(long)]
        m: Option<f64>,
    },
}

#[derive(Subcommand, Serialize)]
enum MonoCmd {
    /// Traces periodic points along a path and reports ρ of it.
    Trace {
        #[arg(long, conflicts_with = "rotation_loop")]
        path: Option<PathBuf>,
        /// Trace the loop e^{2πiθ} z̄^d instead, for this d.
        #[arg(long)]
        rotation_loop: Option<usize>,
        #[arg(long, default_value_t = 1)]
        turns: i64,
        #[arg(long, default_value_t = 64)]
        steps: usize,
        #[arg(long, default_value_t = 3)]
        period: usize,
        #[arg(long, default_value_t = 128)]
        precision: u32,
    },
    /// Traces several paths end to end and composes them.
    Compose {
        #[arg(long = "path", required = true, num_args = 1..)]
        paths: Vec<PathBuf>,
        #[arg(long, default_value_t = 3)]
        period: usize,
        #[arg(long, default_value_t = 128)]
        precision: u32,
    },
}

/// Artifacts written by one command, plus its summary for the manifest.
struct Run {
    out: PathBuf,
    artifacts: Vec<(String, String)>,
    summary: Value,
}

impl Run {
    fn write(&mut self, name: &str, bytes: &str) -> Result<()> {
        let p = self.out.join(name);
        fs::write(&p, bytes).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        let digest = Sha256::digest(bytes.as_bytes());
        self.artifacts.push((name.to_string(), digest.iter().map(|b| format!("{b:02x}")).collect()));
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        self.write(name, &s)
    }

    /// An artifact named by the user: written where they asked, recorded by name.
    fn write_to(&mut self, path: &Path, bytes: &str) -> Result<()> {
        fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let digest = Sha256::digest(bytes.as_bytes());
        self.artifacts.push((path.display().to_string(), digest.iter().map(|b| format!("{b:02x}")).collect()));
        Ok(())
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(p: &Path) -> Result<T> {
    let text = fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", p.display())))
}

fn load_graph(p: &Path) -> Result<PlaneGraph> {
    PlaneGraph::from_json(&read_json::<GraphJson>(p)?)
}

fn fixture_graph(name: &str) -> Result<PlaneGraph> {
    match name {
        "K4" => Ok(PlaneGraph::k4()),
        "C4+chord" => Ok(PlaneGraph::c4_chord()),
        "nsb" => Ok(fixtures::nsb()),
        "sb2" => Ok(fixtures::sb2().0),
        _ => match name.strip_prefix('C').and_then(|n| n.parse::<usize>().ok()) {
            Some(n) if n >= 3 => Ok(PlaneGraph::cycle(n)),
            _ => Err(Error::Invalid(format!("unknown fixture {name}"))),
        },
    }
}

fn graph_arg(g: &GraphArg) -> Result<PlaneGraph> {
    match (&g.graph, &g.fixture) {
        (Some(p), _) => load_graph(p),
        (None, Some(f)) => fixture_graph(f),
        (None, None) => Err(Error::Invalid("give --graph or --fixture".into())),
    }
}

/// Short names: cycles, complete graphs and a cycle with one chord.
fn graph_name(g: &PlaneGraph, index: usize) -> String {
    let n = g.vertex_count();
    let m = g.edge_count();
    if m == n && (0..n).all(|v| g.degree(v) == 2) {
        format!("C{n}")
    } else if m == n * (n - 1) / 2 {
        format!("K{n}")
    } else if m == n + 1 && !pg::hamiltonian_cycles(g).is_empty() {
        format!("C{n}+chord")
    } else {
        format!("n{n}e{m}#{index}")
    }
}

#[derive(Serialize, Deserialize)]
struct BlowupJson {
    tree: TreeJson,
    attach: Vec<usize>,
}

fn load_blowups(p: &Path) -> Result<Vec<Blowup>> {
    read_json::<Vec<BlowupJson>>(p)?
        .into_iter()
        .map(|b| Ok(Blowup { tree: PointedMetricTree::from_json(&b.tree)?.tree, attach: b.attach }))
        .collect()
}

fn enrichment_json(e: &Enrichment) -> Value {
    json!({
        "enriched": e.result.to_json(),
        "dual": e.dual_graph().to_json(),
        "origin": e.origin,
        "admissibility": tischler::is_admissible(e),
    })
}

fn atlas(run: &mut Run, n: usize) -> Result<()> {
    let graphs = pg::enumerate_atlas(n)?;
    let names: Vec<String> = graphs.iter().enumerate().map(|(i, g)| graph_name(g, i)).collect();
    let mut classes = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        let file = format!("graph_{i}.json");
        run.write_json(&file, &g.clone().with_labels([("name".to_string(), names[i].clone())].into()).to_json())?;
        let verdict = match tischler::boundedness_verdict(g) {
            Ok(Verdict::Bounded) => "Bounded".to_string(),
            Ok(Verdict::Unbounded { .. }) => "Unbounded".to_string(),
            Err(e) => format!("NotRealizable: {e}"),
        };
        classes.push(json!({
            "name": names[i], "file": file, "edges": g.edge_count(),
            "three_connected": pg::is_k_connected(g, 3),
            "automorphisms": pg::automorphisms(g).len(), "verdict": verdict,
        }));
    }
    let mut dominations = Vec::new();
    for (i, a) in graphs.iter().enumerate() {
        for (j, b) in graphs.iter().enumerate() {
            if i != j && tischler::bifurcates(a, b)?.bifurcates {
                dominations.push((i, j, tischler::embedding_class_count(a, b)));
            }
        }
    }
    // cover relations of the domination order
    let covers: Vec<&(usize, usize, usize)> = dominations
        .iter()
        .filter(|&&(i, j, _)| !dominations.iter().any(|&(a, b, _)| a == i && dominations.iter().any(|&(c, e, _)| c == b && e == j)))
        .collect();
    let mut dot = String::from("digraph atlas {\n  rankdir=BT;\n");
    for (i, nm) in names.iter().enumerate() {
        dot.push_str(&format!("  g{i} [label=\"{nm}\"];\n"));
    }
    for &&(i, j, k) in &covers {
        dot.push_str(&format!("  g{i} -> g{j} [label=\"N={k}\"];\n"));
    }
    dot.push_str("}\n");
    run.write("poset.dot", &dot)?;
    let doms: Vec<Value> = dominations.iter().map(|&(i, j, k)| json!({"from": names[i], "to": names[j], "classes": k})).collect();
    run.summary = json!({"kind": "atlas", "n": n, "classes": classes, "dominations": doms});
    run.write_json("atlas.json", &run.summary.clone())?;
    println!("{} classes on {n} vertices", graphs.len());
    Ok(())
}

fn verdict(run: &mut Run, g: &PlaneGraph) -> Result<()> {
    match tischler::boundedness_verdict(g)? {
        Verdict::Bounded => {
            println!("Bounded");
            run.summary = json!({"kind": "verdict", "verdict": "Bounded"});
        }
        Verdict::Unbounded { cut, witness } => {
            println!("Unbounded (2-cut {{{}, {}}})", cut.0, cut.1);
            run.write_json("witness.json", &enrichment_json(&witness))?;
            run.summary = json!({"kind": "verdict", "verdict": "Unbounded", "cut": [cut.0, cut.1]});
        }
    }
    Ok(())
}

fn bifurcates(run: &mut Run, a: &PlaneGraph, b: &PlaneGraph) -> Result<()> {
    let r = tischler::bifurcates(a, b)?;
    println!("bifurcates: {}", r.bifurcates);
    println!("embeddings: {}, classes N: {}", r.embeddings.len(), r.orbits.len());
    for (i, e) in r.enrichments.iter().enumerate() {
        run.write_json(&format!("enrichment_{i}.json"), &enrichment_json(e))?;
    }
    run.summary = json!({
        "kind": "bifurcates", "bifurcates": r.bifurcates,
        "embeddings": r.embeddings.len(), "classes": r.orbits.len(), "orbits": r.orbits,
    });
    Ok(())
}

fn enrich(run: &mut Run, g: &PlaneGraph, blowups: Option<&Path>, svg: Option<&Path>) -> Result<()> {
    let t = tischler::tischler_of(g)?;
    let e = match blowups {
        Some(p) => tischler::enrich(&t, load_blowups(p)?)?,
        None => tischler::trivial_enrichment(&t),
    };
    let v = enrichment_json(&e);
    run.write_json("enrichment.json", &v)?;
    if let Some(p) = svg {
        run.write_to(p, &e.to_svg())?;
    }
    let adm = tischler::is_admissible(&e);
    println!("enriched graph: {} vertices, {} edges; admissible: {}", e.result.vertex_count(), e.result.edge_count(), adm.admissible);
    run.summary = json!({"kind": "enrich", "admissibility": adm});
    Ok(())
}

fn admissible(run: &mut Run, g: &PlaneGraph, blowups: Option<&Path>, limit: usize) -> Result<()> {
    let t = tischler::tischler_of(g)?;
    if let Some(p) = blowups {
        let adm = tischler::is_admissible(&tischler::enrich(&t, load_blowups(p)?)?);
        println!("admissible: {}", adm.admissible);
        if let Some(c) = &adm.certificate {
            println!("certificate: {c:?}");
        }
        run.summary = json!({"kind": "admissible", "admissibility": adm});
        return Ok(());
    }
    let trivial = tischler::is_admissible(&tischler::trivial_enrichment(&t));
    let all = tischler::enumerate_blowups(&t, limit)?;
    let total = all.len();
    let mut witness = None;
    for b in all {
        let e = tischler::enrich(&t, b)?;
        let a = tischler::is_admissible(&e);
        if !a.admissible {
            witness = Some((e, a));
            break;
        }
    }
    let three = pg::is_k_connected(g, 3);
    println!("trivial enrichment admissible: {}", trivial.admissible);
    println!("3-connected: {three}; non-admissible enrichment exists: {}", witness.is_some());
    if let Some((e, _)) = &witness {
        run.write_json("non_admissible.json", &enrichment_json(e))?;
    }
    run.summary = json!({
        "kind": "admissible", "trivial": trivial, "enrichments": total, "three_connected": three,
        "certificate": witness.map(|w| w.1.certificate),
    });
    Ok(())
}

fn mating(run: &mut Run, g: &PlaneGraph) -> Result<()> {
    let r = tischler::shared_mating_report(g)?;
    println!("{} Hamiltonian cycles in {} classes", r.cycles.len(), r.orbits.len());
    for p in &r.pairs {
        match &p.common {
            Some(dec) => println!("cycles {} and {}: common arrow structure {dec:?}", p.a, p.b),
            None => println!("cycles {} and {}: no common arrow structure", p.a, p.b),
        }
    }
    run.write_json("mating.json", &r)?;
    run.summary = json!({
        "kind": "mating-report", "cycles": r.cycles.len(), "classes": r.orbits.len(),
        "pairs": r.pairs.iter().map(|p| json!({"a": p.a, "b": p.b, "common": p.common.is_some()})).collect::<Vec<_>>(),
    });
    Ok(())
}

fn parse_gens(s: &str) -> Result<Vec<Chord>> {
    s.split(',')
        .map(|leaf| {
            let (a, b) = leaf.split_once(':').ok_or_else(|| Error::Invalid(format!("leaf {leaf} is not a:b")))?;
            Chord::new(lamination::Angle::parse(a.trim())?, lamination::Angle::parse(b.trim())?)
        })
        .collect()
}

fn lamination_cmd(run: &mut Run, d: usize, gens: &str, depth: usize, svg: Option<&Path>, dual: bool) -> Result<()> {
    let gens = parse_gens(gens)?;
    let lam = lamination::generate(&gens, d, depth)?;
    let j = lam.to_json();
    for ((leaf, lvl), _) in j.leaves.iter().zip(&j.level).zip(0..) {
        println!("{} {} (depth {lvl})", leaf[0], leaf[1]);
    }
    run.write_json("lamination.json", &j)?;
    if let Some(p) = svg {
        run.write_to(p, &lamination::to_svg(&lam, dual))?;
    }
    run.summary = json!({"kind": "lamination", "d": d, "depth": depth, "leaves": j.leaves.len(), "new_per_depth": lam.new_leaf_counts()});
    Ok(())
}

fn parse_zeros(s: &str) -> Result<Vec<Cx>> {
    s.split_whitespace()
        .map(|p| {
            let (re, im) = p.split_once(',').ok_or_else(|| Error::Invalid(format!("zero {p} is not re,im")))?;
            let num = |x: &str| x.trim().parse::<f64>().map_err(|_| Error::Invalid(format!("bad number {x}")));
            Ok(Cx::from_f64(num(re)?, num(im)?))
        })
        .collect()
}

fn analyze(run: &mut Run, f: &AntiBlaschke, k: Option<f64>, m: Option<f64>) -> Result<()> {
    let fix = f.boundary_fixed_points()?;
    let mult = f.multipliers()?;
    let crit: Vec<Value> = f
        .critical_points()?
        .iter()
        .map(|(c, n)| {
            let z = c.to_c64();
            json!({"z": [z.re, z.im], "depth": c.depth(), "multiplicity": n})
        })
        .collect();
    let disp = f.critical_displacement()?;
    println!("degree {}", f.degree());
    for (i, (t, l)) in fix.turns_f64().iter().zip(&mult).enumerate() {
        println!("fixed point {i}: {t:.12} turns, multiplier {l:.10}");
    }
    println!("critical displacement {disp:.10}");
    let mut v = json!({
        "kind": "blaschke-analyze", "map": f.to_json(), "fixed_points": fix.turns_f64(), "fixed_residuals": fix.residuals,
        "multipliers": mult, "critical_points": crit, "critical_displacement": disp, "boundary_degree": f.boundary_degree(),
    });
    if let Some(k) = k {
        v["pared"] = json!(f.pared_membership(k)?);
    }
    if let Some(m) = m {
        v["quasi_fixed"] = json!(f.qf_membership(m)?);
    }
    run.write_json("analysis.json", &v)?;
    run.summary = v;
    Ok(())
}

fn parse_grid(s: Option<&str>) -> Result<Vec<f64>> {
    match s {
        None => Ok(DEFAULT_GRID.to_vec()),
        Some(s) => s
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Invalid(format!("bad grid value {x}"))))
            .collect(),
    }
}

fn pt_json(p: &Pt) -> [f64; 2] {
    let z = p.cx().to_c64();
    [z.re, z.im]
}

fn verify_summary(rep: &degen::VerifyReport) -> Value {
    json!({
        "passed": rep.passed(), "M": rep.m_fit, "R": rep.ball_radius, "K_prime": rep.qi_defect,
        "quasi_fixed": rep.quasi_fixed, "critically_approximating": rep.critically_approximating,
        "affine_separation": rep.affine_separation, "ends_approximating": rep.ends_approximating,
    })
}

fn realize(run: &mut Run, tree: &Path, grid: Option<&str>) -> Result<()> {
    let t = PointedMetricTree::from_json(&read_json(tree)?)?;
    let grid = parse_grid(grid)?;
    let r = if t.is_extended() { degen::realize_extended(&t, &grid)? } else { degen::realize(&t, &grid)? };
    run.write_json("family.json", &r.family.to_json())?;
    let placements: Vec<Vec<[f64; 2]>> = r.embedded.placements.iter().map(|row| row.iter().map(pt_json).collect()).collect();
    run.write_json("realization.json", &json!({"tree": t.to_json(), "grid": grid, "placements": placements, "diagnostics": r.embedded.diagnostics}))?;
    let rep = degen::verify(&r.embedded, &r.family, &VerifyOptions::default())?;
    run.write_json("verify.json", &rep)?;
    let s = verify_summary(&rep);
    println!("realized d = {} on {} grid values; verify passed: {}", r.family.maps[0].degree(), grid.len(), rep.passed());
    println!("M = {:.4}, R = {:.4}, K' = {:.4}", rep.m_fit, rep.ball_radius, rep.qi_defect);
    run.summary = json!({"kind": "degen-realize", "verify": s});
    Ok(())
}

fn load_family(p: &Path) -> Result<Family> {
    Family::from_json(&read_json::<FamilyJson>(p)?)
}

fn extract(run: &mut Run, family: &Path, split: f64) -> Result<()> {
    let fam = load_family(family)?;
    let e = degen::extract_tree(&fam, split)?;
    run.write_json("tree.json", &e.tree.to_json())?;
    run.write_json("extraction.json", &json!({"diagnostics": e.diagnostics}))?;
    println!("extracted tree: d = {}, {} vertices", e.tree.tree.degree_d(), e.tree.tree.vertex_count());
    run.summary = json!({"kind": "degen-extract", "d": e.tree.tree.degree_d(), "vertices": e.tree.tree.vertex_count()});
    Ok(())
}

/// The placement is not stored, so it is re-extracted from the family and
/// must carry the given tree.
fn verify_cmd(run: &mut Run, tree: &Path, family: &Path, split: f64, m: Option<f64>) -> Result<()> {
    let t = PointedMetricTree::from_json(&read_json(tree)?)?;
    let fam = load_family(family)?;
    let e = degen::extract_tree(&fam, split)?;
    if !e.tree.isomorphic(&t) {
        return Err(Error::RealizationMismatch("the family degenerates along a different tree".into()));
    }
    let opts = VerifyOptions { m_bound: m, ..VerifyOptions::default() };
    let rep = degen::verify(&e, &fam, &opts)?;
    run.write_json("verify.json", &rep)?;
    println!("verify passed: {}", rep.passed());
    println!("M = {:.4}, R = {:.4}, K' = {:.4}", rep.m_fit, rep.ball_radius, rep.qi_defect);
    run.summary = json!({"kind": "degen-verify", "verify": verify_summary(&rep)});
    if !rep.passed() {
        return Err(Error::RealizationMismatch("verification failed; see verify.json".into()));
    }
    Ok(())
}

fn load_path(p: &Path) -> Result<Vec<AntiBlaschke>> {
    mono::path_from_json(&read_json::<Vec<PathRecord>>(p)?)
}

fn print_trace(t: &TracedPath) {
    println!("permutation {:?}", t.permutation);
    println!("braid {:?}", t.braid);
    println!("max residual {:.3e}, refinements {}", t.residuals.iter().cloned().fold(0.0, f64::max), t.refinements);
}

fn trace_cmd(run: &mut Run, path: Option<&Path>, rot: Option<usize>, turns: i64, steps: usize, period: usize) -> Result<()> {
    let maps = match (path, rot) {
        (Some(p), _) => load_path(p)?,
        (None, Some(d)) => mono::rotation_loop(d, turns, steps),
        (None, None) => return Err(Error::Invalid("give --path or --rotation-loop".into())),
    };
    let seeds = mono::seeds_for(&maps[0], period, 16)?;
    let t = mono::trace(&maps, &seeds, period)?;
    print_trace(&t);
    run.write_json("trace.json", &t.to_json())?;
    run.summary = json!({"kind": "mono-trace", "permutation": t.permutation, "braid": t.braid});
    Ok(())
}

fn compose_cmd(run: &mut Run, paths: &[PathBuf], period: usize) -> Result<()> {
    let first = load_path(&paths[0])?;
    let mut acc = mono::trace(&first, &mono::seeds_for(&first[0], period, 16)?, period)?;
    for p in &paths[1..] {
        let maps = load_path(p)?;
        let next = mono::trace(&maps, &acc.end_seeds(), period)?;
        acc = mono::compose(&acc, &next)?;
    }
    print_trace(&acc);
    run.write_json("trace.json", &acc.to_json())?;
    run.summary = json!({"kind": "mono-compose", "permutation": acc.permutation, "braid": acc.braid});
    Ok(())
}

fn report(dir: &Path) -> Result<()> {
    let mp = dir.join("manifest.json");
    if !mp.exists() {
        return Err(Error::MissingArtifact(mp.display().to_string()));
    }
    let m: Value = read_json(&mp)?;
    for a in m["artifacts"].as_array().into_iter().flatten() {
        let name = a["path"].as_str().unwrap_or_default();
        let p = if Path::new(name).is_absolute() { PathBuf::from(name) } else { dir.join(name) };
        if !p.exists() {
            return Err(Error::MissingArtifact(p.display().to_string()));
        }
    }
    let s = &m["summary"];
    println!("paredlab {} · seed {}", m["version"].as_str().unwrap_or("?"), m["seed"]);
    match s["kind"].as_str().unwrap_or("") {
        "atlas" => {
            println!("{:<14} {:>5} {:>5} {:>5}  verdict", "class", "edges", "3-con", "|Aut|");
            for c in s["classes"].as_array().into_iter().flatten() {
                println!(
                    "{:<14} {:>5} {:>5} {:>5}  {}",
                    c["name"].as_str().unwrap_or(""),
                    c["edges"],
                    c["three_connected"],
                    c["automorphisms"],
                    c["verdict"].as_str().unwrap_or("")
                );
            }
            println!("dominations N(Γ↪Γ′):");
            for d in s["dominations"].as_array().into_iter().flatten() {
                println!("  {} < {}  N = {}", d["from"].as_str().unwrap_or(""), d["to"].as_str().unwrap_or(""), d["classes"]);
            }
            for chain in chains(s) {
                println!("chain: {}", chain.join(" < "));
            }
        }
        "degen-realize" | "degen-verify" => {
            let v = &s["verify"];
            println!("{:>10} {:>10} {:>10}  passed", "M", "R", "K'");
            println!("{:>10.4} {:>10.4} {:>10.4}  {}", v["M"].as_f64().unwrap_or(f64::NAN), v["R"].as_f64().unwrap_or(f64::NAN), v["K_prime"].as_f64().unwrap_or(f64::NAN), v["passed"]);
        }
        "mating-report" => {
            let pairs = s["pairs"].as_array().cloned().unwrap_or_default();
            if pairs.iter().all(|p| p["common"] == json!(false)) {
                println!("no common arrow structure");
            } else {
                for p in pairs {
                    println!("cycles {} and {}: common arrow structure {}", p["a"], p["b"], p["common"]);
                }
            }
        }
        _ => println!("{}", serde_json::to_string_pretty(s).unwrap_or_default()),
    }
    Ok(())
}

/// Maximal chains of the cover relation in an atlas summary.
fn chains(s: &Value) -> Vec<Vec<String>> {
    let edges: Vec<(String, String)> = s["dominations"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|d| (d["from"].as_str().unwrap_or("").to_string(), d["to"].as_str().unwrap_or("").to_string()))
        .collect();
    let has = |a: &str, b: &str| edges.iter().any(|(x, y)| x == a && y == b);
    let covers: Vec<&(String, String)> =
        edges.iter().filter(|(a, b)| !edges.iter().any(|(x, m)| x == a && has(m, b))).collect();
    let mut out = Vec::new();
    let mut stack: Vec<Vec<String>> = covers
        .iter()
        .filter(|(a, _)| !covers.iter().any(|(_, y)| y == a))
        .map(|(a, _)| vec![a.clone()])
        .collect();
    stack.dedup();
    while let Some(ch) = stack.pop() {
        let last = ch.last().unwrap().clone();
        let next: Vec<&String> = covers.iter().filter(|(a, _)| *a == last).map(|(_, b)| b).collect();
        if next.is_empty() {
            out.push(ch);
        } else {
            for b in next {
                let mut c = ch.clone();
                c.push(b.clone());
                stack.push(c);
            }
        }
    }
    out.sort();
    out
}

fn execute(cli: &Cli, run: &mut Run) -> Result<()> {
    match &cli.command {
        Command::Atlas { n } => atlas(run, *n),
        Command::Verdict(g) => verdict(run, &graph_arg(g)?),
        Command::Bifurcates { graph, into } => bifurcates(run, &load_graph(graph)?, &load_graph(into)?),
        Command::Enrich { graph, blowups, svg } => enrich(run, &graph_arg(graph)?, blowups.as_deref(), svg.as_deref()),
        Command::Admissible { graph, blowups, limit } => admissible(run, &graph_arg(graph)?, blowups.as_deref(), *limit),
        Command::MatingReport(g) => mating(run, &graph_arg(g)?),
        Command::Lamination { d, gens, depth, svg, dual } => lamination_cmd(run, *d, gens, *depth, svg.as_deref(), *dual),
        Command::Blaschke(BlaschkeCmd::Analyze { map, zeros, k, m }) => {
            let _g = mp::push_precision(128);
            let f = match (map, zeros) {
                (Some(p), _) => AntiBlaschke::from_json(&read_json::<BlaschkeJson>(p)?)?,
                (None, Some(z)) => AntiBlaschke::from_zeros(parse_zeros(z)?)?,
                (None, None) => return Err(Error::Invalid("give --map or --zeros".into())),
            };
            analyze(run, &f, *k, *m)
        }
        Command::Degen(DegenCmd::Realize { tree, grid }) => realize(run, tree, grid.as_deref()),
        Command::Degen(DegenCmd::Extract { family, split }) => extract(run, family, *split),
        Command::Degen(DegenCmd::Verify { tree, family, split, m }) => verify_cmd(run, tree, family, *split, *m),
        Command::Mono(MonoCmd::Trace { path, rotation_loop, turns, steps, period, precision }) => {
            let _g = mp::push_precision(*precision);
            trace_cmd(run, path.as_deref(), *rotation_loop, *turns, *steps, *period)
        }
        Command::Mono(MonoCmd::Compose { paths, period, precision }) => {
            let _g = mp::push_precision(*precision);
            compose_cmd(run, paths, *period)
        }
        Command::Report { dir } => report(dir),
    }
}

fn write_manifest(cli: &Cli, run: &Run) -> Result<()> {
    let artifacts: Vec<Value> = run.artifacts.iter().map(|(p, h)| json!({"path": p, "sha256": h})).collect();
    let m = json!({
        "tool": "paredlab", "version": env!("CARGO_PKG_VERSION"), "seed": cli.seed,
        "config": cli, "artifacts": artifacts, "summary": run.summary,
    });
    let mut s = serde_json::to_string_pretty(&m).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    fs::write(run.out.join("manifest.json"), s).map_err(|e| Error::Io(e.to_string()))
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("PAREDLAB_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // only fails if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let mut run = Run { out: cli.out.clone(), artifacts: Vec::new(), summary: Value::Null };
    let result = fs::create_dir_all(&cli.out)
        .map_err(|e| Error::Io(e.to_string()))
        .and_then(|_| execute(&cli, &mut run))
        .and_then(|_| if matches!(cli.command, Command::Report { .. }) { Ok(()) } else { write_manifest(&cli, &run) });
    if let Err(e) = result {
        if !matches!(cli.command, Command::Report { .. }) && !run.artifacts.is_empty() {
            let _ = write_manifest(&cli, &run);
        }
        eprintln!("{}", json!({"error": e.kind(), "message": e.to_string(), "exit_code": e.exit_code()}));
        std::process::exit(e.exit_code());
    }
}
