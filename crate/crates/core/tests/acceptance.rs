//! One PASS/FAIL line per acceptance criterion. Run a subset by number:
//! `cargo test --test acceptance -- 5 12`.

use paredlab::blaschke::{end_approach_margin, random_map, AntiBlaschke, PARED_SWEEP_M_EMP};
use paredlab::degeneration::{self as degen, VerifyOptions, DEFAULT_GRID, DEFAULT_SPLIT};
use paredlab::hypdisk::depth_power_margins;
use paredlab::lamination::{self, Angle, Chord};
use paredlab::monodromy as mono;
use paredlab::mp::{self, fl, Cx};
use paredlab::planegraph::{self as pg, PlaneGraph};
use paredlab::ribbontree::{enumerate_pointed, enumerate_trees};
use paredlab::tischler::{self, fixtures, Certificate, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let picked: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let all = [
        Criterion { id: 1, name: "atlas and verdicts", budget: Some(Duration::from_secs(1)), run: c1_atlas },
        Criterion { id: 2, name: "duality involution", budget: Some(Duration::from_secs(30)), run: c2_duality },
        Criterion { id: 3, name: "embedding classes and automorphisms", budget: Some(Duration::from_secs(60)), run: c3_counting },
        Criterion { id: 4, name: "two-cycle law", budget: Some(Duration::from_secs(60)), run: c4_two_cycles },
        Criterion { id: 5, name: "lamination generation", budget: Some(Duration::from_secs(60)), run: c5_lamination },
        Criterion { id: 6, name: "dual-tree round trip", budget: Some(Duration::from_secs(60)), run: c6_dual_tree },
        Criterion { id: 7, name: "admissibility fixtures", budget: Some(Duration::from_secs(300)), run: c7_admissibility },
        Criterion { id: 8, name: "Blaschke numerics", budget: Some(Duration::from_secs(60)), run: c8_blaschke },
        Criterion { id: 9, name: "quasi-equivalence sweep", budget: Some(Duration::from_secs(60)), run: c9_sweep },
        Criterion { id: 10, name: "realization round trip", budget: None, run: c10_round_trip },
        Criterion { id: 11, name: "parabolic real realization", budget: Some(Duration::from_secs(60)), run: c11_parabolic },
        Criterion { id: 12, name: "monodromy", budget: Some(Duration::from_secs(30)), run: c12_monodromy },
        Criterion { id: 13, name: "hyperbolic inequalities", budget: Some(Duration::from_secs(60)), run: c13_hyperbolic },
    ];
    let mut failed = 0;
    for c in all.iter().filter(|c| picked.is_empty() || picked.contains(&c.id)) {
        let t0 = Instant::now();
        let r = std::panic::catch_unwind(c.run).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let dt = t0.elapsed();
        let r = match (r, c.budget) {
            (Ok(_), Some(b)) if dt > b => Err(format!("took {:.1}s, budget {}s", dt.as_secs_f64(), b.as_secs())),
            (r, _) => r,
        };
        let (tag, detail) = match &r {
            Ok(d) => ("PASS", d.clone()),
            Err(e) => ("FAIL", e.clone()),
        };
        failed += usize::from(r.is_err());
        println!("criterion {:>2} {tag} {:>7.2}s  {}: {detail}", c.id, dt.as_secs_f64(), c.name);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn c1_atlas() -> Outcome {
    let atlas = ok(pg::enumerate_atlas(4))?;
    ensure!(atlas.len() == 3, "{} classes", atlas.len());
    let chain = [PlaneGraph::cycle(4), PlaneGraph::c4_chord(), PlaneGraph::k4()];
    for g in &atlas {
        let pos = chain.iter().position(|c| pg::plane_isomorphic(c, g).is_some());
        ensure!(pos.is_some(), "atlas class with {} edges is outside the chain", g.edge_count());
        let bounded = matches!(ok(tischler::boundedness_verdict(g))?, Verdict::Bounded);
        ensure!(bounded == (pos == Some(2)), "verdict of chain member {pos:?}");
    }
    for (i, g) in chain.iter().enumerate() {
        for (j, h) in chain.iter().enumerate() {
            let b = ok(tischler::bifurcates(g, h))?.bifurcates;
            ensure!(b == (i < j), "bifurcates {i} -> {j} = {b}");
        }
    }
    Ok("3 classes; Bounded only for K4; C4 < C4+chord < K4".into())
}

fn c2_duality() -> Outcome {
    let mut graphs = vec![PlaneGraph::cycle(3)];
    for n in 4..=6 {
        graphs.extend(ok(pg::enumerate_atlas(n))?);
    }
    for (i, g) in graphs.iter().enumerate() {
        ensure!(pg::plane_isomorphic(&pg::dual(&pg::dual(g)), g).is_some(), "graph {i} fails");
    }
    Ok(format!("{} graphs with n ≤ 6", graphs.len()))
}

/// Neighbors of `v` in ccw order, for simple graphs.
fn rotation(g: &PlaneGraph, v: usize) -> Vec<usize> {
    g.darts_at(v).into_iter().map(|d| g.head(d)).collect()
}

fn same_cycle(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && (a.is_empty() || (0..b.len()).any(|s| (0..a.len()).all(|i| a[i] == b[(s + i) % b.len()])))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn rec(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == p.len() {
            out.push(p.clone());
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(k + 1, p, out);
            p.swap(k, i);
        }
    }
    rec(0, &mut p, &mut out);
    out
}

/// Vertex bijections `π` of a simple plane graph `g` into `h` sending edges
/// to edges with each rotation, restricted to the image, kept ccw.
fn brute_embeddings(g: &PlaneGraph, h: &PlaneGraph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    permutations(n)
        .into_iter()
        .filter(|pi| {
            (0..n).all(|v| {
                let img: Vec<usize> = rotation(g, v).iter().map(|&w| pi[w]).collect();
                let hr = rotation(h, pi[v]);
                let restricted: Vec<usize> = hr.into_iter().filter(|x| img.contains(x)).collect();
                img.iter().all(|x| restricted.contains(x)) && same_cycle(&img, &restricted)
            })
        })
        .collect()
}

fn compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    b.iter().map(|&x| a[x]).collect()
}

fn inverse(p: &[usize]) -> Vec<usize> {
    let mut q = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        q[x] = i;
    }
    q
}

fn brute_orbits(g: &PlaneGraph, h: &PlaneGraph) -> usize {
    let embs = brute_embeddings(g, h);
    let ag = brute_embeddings(g, g);
    let ah = brute_embeddings(h, h);
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut orbits = 0;
    for e in &embs {
        if seen.contains(e) {
            continue;
        }
        orbits += 1;
        for a in &ag {
            for b in &ah {
                seen.insert(compose(b, &compose(e, &inverse(a))));
            }
        }
    }
    orbits
}

fn c3_counting() -> Outcome {
    let (c4, k4) = (PlaneGraph::cycle(4), PlaneGraph::k4());
    let n = pg::count_double_cosets(&c4, &k4);
    let brute = brute_orbits(&c4, &k4);
    ensure!(n == 1 && brute == 1, "N(C4 ↪ K4) = {n}, brute force {brute}");
    let (ac4, ak4) = (brute_embeddings(&c4, &c4).len(), brute_embeddings(&k4, &k4).len());
    ensure!(ac4 == 8 && ak4 == 12, "brute |Aut| = {ac4}, {ak4}");
    ensure!(pg::automorphisms(&c4).len() == 8 && pg::automorphisms(&k4).len() == 12, "automorphisms disagree with the oracle");
    // the double-coset count agrees with brute force on every n = 5 pair
    let atlas = ok(pg::enumerate_atlas(5))?;
    let mut pairs = 0;
    for g in &atlas {
        for h in &atlas {
            let (a, b) = (pg::count_double_cosets(g, h), brute_orbits(g, h));
            ensure!(a == b, "n = 5 pair: {a} vs brute {b}");
            pairs += 1;
        }
    }
    Ok(format!("N(C4↪K4) = 1, |Aut| = 8, 12; {pairs} n = 5 pairs agree"))
}

fn c4_two_cycles() -> Outcome {
    for d in 2..=8usize {
        let got = lamination::two_cycles(d).len();
        let formula = (d + 1) * (d - 2) / 2;
        let n = d + 1;
        let nonadjacent = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| j - i != 1 && !(i == 0 && j == n - 1)).count();
        // independent count: exact period-2 orbits of m_{-d} on k/(d²−1)
        let q = (d * d - 1) as i64;
        let mut orbits = BTreeSet::new();
        for k in 0..q {
            let t = Angle::new(k, q);
            let s = lamination::m_minus_d(t, d);
            if s != t && lamination::m_minus_d(s, d) == t {
                orbits.insert((t.min(s), t.max(s)));
            }
        }
        ensure!(got == formula && got == nonadjacent && got == orbits.len(), "d = {d}: {got}, {formula}, {nonadjacent}, {}", orbits.len());
    }
    Ok("2 ≤ d ≤ 8".into())
}

fn ch(p: i64, q: i64, r: i64, s: i64) -> Chord {
    Chord::new(Angle::new(p, q), Angle::new(r, s)).unwrap()
}

fn c5_lamination() -> Outcome {
    let g = ch(1, 8, 5, 8);
    let lam = ok(lamination::generate(&[g], 3, 1))?;
    let got: BTreeSet<Chord> = lam.leaves.iter().copied().collect();
    let want: BTreeSet<Chord> = [g, ch(7, 24, 11, 24), ch(19, 24, 23, 24)].into_iter().collect();
    ensure!(got == want, "depth 1 leaves {got:?}");
    let deep = ok(lamination::generate(&[g], 3, 6))?;
    ensure!(deep.crossings().is_empty(), "crossings at depth 6");
    ensure!(deep.invariance_violations().is_empty(), "invariance violations at depth 6");
    Ok(format!("unique depth-1 selection; {} leaves through depth 6", deep.leaves.len()))
}

fn c6_dual_tree() -> Outcome {
    let mut count = 0;
    for d in 2..=4 {
        for t in ok(enumerate_trees(d))? {
            let back = ok(lamination::dual_tree(&ok(lamination::dual_lamination(&t))?, d))?;
            ensure!(back.isomorphic(&t), "d = {d} tree fails");
            count += 1;
        }
    }
    Ok(format!("{count} marked trees"))
}

fn c7_admissibility() -> Outcome {
    let nsg = ok(fixtures::nsg())?;
    ensure!(matches!(tischler::is_admissible(&nsg).certificate, Some(Certificate::Bigon { .. })), "NSG fixture not rejected by a bigon");
    let mut trivial = 0;
    for n in 4..=6 {
        for g in ok(pg::enumerate_atlas(n))? {
            let t = ok(tischler::tischler_of(&g))?;
            ensure!(tischler::is_admissible(&tischler::trivial_enrichment(&t)).admissible, "trivial enrichment rejected");
            trivial += 1;
        }
    }
    let mut graphs = 0;
    for n in 4..=5 {
        for g in ok(pg::enumerate_atlas(n))? {
            let t = ok(tischler::tischler_of(&g))?;
            let mut bad = false;
            for b in ok(tischler::enumerate_blowups(&t, 1_000_000))? {
                if !tischler::is_admissible(&ok(tischler::enrich(&t, b))?).admissible {
                    bad = true;
                    break;
                }
            }
            ensure!(bad == !pg::is_k_connected(&g, 3), "n = {n}: non-admissible exists = {bad}");
            graphs += 1;
        }
    }
    Ok(format!("bigon certificate; {trivial} trivial enrichments; {graphs} graphs exhaustive"))
}

fn circle_map_slope(f: &AntiBlaschke, t: f64, h: f64) -> f64 {
    let a = f.eval(&Cx::expi_turns_f64(t + h));
    let b = f.eval(&Cx::expi_turns_f64(t - h));
    (&a / &b).arg().to_f64() / std::f64::consts::TAU / (2.0 * h)
}

fn c8_blaschke() -> Outcome {
    for d in 2..=6 {
        let f = AntiBlaschke::monomial(d);
        for (k, t) in ok(f.boundary_fixed_points())?.turns_f64().iter().enumerate() {
            ensure!((t - k as f64 / (d + 1) as f64).abs() < 1e-10, "d = {d}, k = {k}: {t}");
        }
        for l in ok(f.multipliers())? {
            ensure!((l - (d as f64).ln()).abs() < 1e-10, "d = {d}: multiplier {l}");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let f = random_map(3, 3.0, &mut rng);
        for (k, t) in ok(f.boundary_fixed_points())?.turns_f64().iter().enumerate() {
            let fd = circle_map_slope(&f, *t, 1e-6).abs().ln();
            worst = worst.max((ok(f.multiplier(k))? - fd).abs());
        }
    }
    ensure!(worst < 1e-6, "finite-difference gap {worst:e}");
    Ok(format!("monomials exact; 20 random maps, worst gap {worst:.1e}"))
}

fn c9_sweep() -> Outcome {
    let a = ok(paredlab::blaschke::pared_sweep(3, 3.0, 200, 0))?;
    let b = ok(paredlab::blaschke::pared_sweep(3, 3.0, 400, 0))?;
    ensure!(a.max_displacement.is_finite(), "not finite");
    let rel = (b.max_displacement - a.max_displacement).abs() / a.max_displacement;
    ensure!(rel <= 0.05, "200 → 400 samples moved the maximum by {:.1}%", 100.0 * rel);
    ensure!((a.max_displacement - PARED_SWEEP_M_EMP).abs() < 1e-9, "regression constant {PARED_SWEEP_M_EMP} vs {}", a.max_displacement);
    Ok(format!("M_emp = {:.6} (200), {:.6} (400)", a.max_displacement, b.max_displacement))
}

fn c10_round_trip() -> Outcome {
    let mut total = 0;
    for d in 2..=4 {
        let trees = ok(enumerate_pointed(d))?;
        total += trees.len();
        let fails: Vec<String> = trees
            .par_iter()
            .enumerate()
            .filter_map(|(i, t)| {
                let r = (|| -> Result<(), String> {
                    let r = ok(degen::realize(t, &DEFAULT_GRID))?;
                    let rep = ok(degen::verify(&r.embedded, &r.family, &VerifyOptions::default()))?;
                    ensure!(rep.passed(), "verify: qf={} crit={} aff={} ends={}", rep.quasi_fixed, rep.critically_approximating, rep.affine_separation, rep.ends_approximating);
                    let back = ok(degen::extract_tree(&r.family, DEFAULT_SPLIT))?;
                    ensure!(back.tree.isomorphic(t), "extracted tree differs");
                    Ok(())
                })();
                r.err().map(|e| format!("d = {d} #{i}: {e}"))
            })
            .collect();
        ensure!(fails.is_empty(), "{fails:?}");
    }
    Ok(format!("{total} pointed trees, d ≤ 4"))
}

fn c11_parabolic() -> Outcome {
    let t = ok(degen::parabolic_tree(1.0))?;
    let fam = ok(degen::realize_parabolic_real(&t, &DEFAULT_GRID))?;
    let _g = mp::push_precision(fam.precision);
    let mut prev = f64::INFINITY;
    let mut ls = Vec::new();
    for (i, f) in fam.maps.iter().enumerate() {
        for z in [Cx::zero(), Cx::one(), Cx::real(fl(-1.0))] {
            let r = (&f.eval(&z) - &z).abs().to_f64();
            ensure!(r < 1e-10, "s = {}: fixed point residual {r:e}", fam.grid[i]);
        }
        for z in [Cx::from_f64(0.3, 0.4), Cx::from_f64(-0.7, 0.1)] {
            ensure!(f.eval(&z.conj()) == f.eval(&z).conj(), "conjugation symmetry broken");
        }
        let crit = ok(f.critical_points())?;
        let v1 = crit.iter().map(|c| c.0.clone()).find(|c| c.cx().re > 0).ok_or("no critical point on the positive axis")?;
        let l = ok(degen::rescaled_multiplier(f, &v1, &Cx::new(fl(0.0), fl(1.0))))?;
        ensure!(l > 0.0 && l < prev, "log-multiplier {l} after {prev}");
        prev = l;
        ls.push(l);
    }
    ensure!(prev < 1e-6, "final log-multiplier {prev}");
    Ok(format!("log-multipliers {:.2e} → {:.2e}", ls[0], prev))
}

fn c12_monodromy() -> Outcome {
    let _g = mp::push_precision(128);
    let period = 3;
    for d in 2..=4 {
        let seeds = mono::seeds_from_angles(&ok(mono::seed_periodic_points(d, period))?);
        let l = ok(mono::trace(&mono::rotation_loop(d, 1, 64), &seeds, period))?;
        let n = d + 1;
        // closed form: α = (θ + k)/(d+1), so piece k moves to piece k + 1
        let expect: Vec<usize> = (0..n).map(|i| (i + n - 1) % n).collect();
        ensure!(l.permutation == expect, "d = {d}: permutation {:?}", l.permutation);
        ensure!(l.braid == (1..=d as i32).rev().collect::<Vec<_>>(), "d = {d}: braid {:?}", l.braid);
        let mut rev = l.maps.clone();
        rev.reverse();
        let back = ok(mono::trace(&rev, &l.end_seeds(), period))?;
        let c = ok(mono::compose(&l, &back))?;
        ensure!(c.permutation == (0..n).collect::<Vec<_>>() && c.braid.is_empty(), "d = {d}: loop · reverse = {:?} {:?}", c.permutation, c.braid);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let map = |rng: &mut ChaCha8Rng, d: usize| -> Result<AntiBlaschke, String> {
        let zeros = (1..d).map(|_| Cx::from_c64(num_complex::Complex64::from_polar(rng.gen_range(0.0..0.25), rng.gen_range(0.0..std::f64::consts::TAU)))).collect();
        let f = ok(AntiBlaschke::from_zeros(zeros))?;
        ok(AntiBlaschke::from_parts(Cx::expi_turns_f64(rng.gen_range(-0.1..0.1)), f.params().to_vec()))
    };
    let mut braided = 0;
    for case in 0..10 {
        let d = 2 + case % 2;
        let (f0, f1, f2) = (map(&mut rng, d)?, map(&mut rng, d)?, map(&mut rng, d)?);
        let p1 = ok(mono::line_path(&f0, &f1, rng.gen_range(-1..=1), 24))?;
        let p2 = ok(mono::line_path(&f1, &f2, rng.gen_range(-1..=1), 24))?;
        let s0 = ok(mono::seeds_for(&f0, period, 16))?;
        let a = ok(mono::trace(&p1, &s0, period))?;
        let b = ok(mono::trace(&p2, &a.end_seeds(), period))?;
        let ab = ok(mono::compose(&a, &b))?;
        let mut joined = p1.clone();
        joined.extend_from_slice(&p2[1..]);
        let direct = ok(mono::trace(&joined, &s0, period))?;
        ensure!(ab.permutation == direct.permutation && ab.braid == mono::free_reduce(&direct.braid), "pair {case}: ρ(ab) ≠ ρ(a)ρ(b)");
        let mut rev = p1.clone();
        rev.reverse();
        let r = ok(mono::trace(&rev, &a.end_seeds(), period))?;
        ensure!(r.permutation == mono::inverse_permutation(&a.permutation), "pair {case}: reversal permutation");
        ensure!(mono::free_reduce(&r.braid) == mono::inverse_word(&mono::free_reduce(&a.braid)), "pair {case}: reversal word");
        braided += usize::from(!ab.braid.is_empty());
    }
    Ok(format!("rotation loops d = 2..4; 10 path pairs ({braided} with nontrivial braids)"))
}

fn c13_hyperbolic() -> Outcome {
    const PREC: u32 = 256;
    const TOL: f64 = 1e-60;
    let _g = mp::push_precision(PREC);
    let deltas: Vec<Float> = (2..=8).map(|k| Float::with_val(PREC, Float::with_val(PREC, 10).pow(-(k as i32)))).collect();
    let alphas: Vec<Float> = (1..=9).map(|k| Float::with_val(PREC, k) / 10u32).collect();
    let mut checks = 0;
    for delta in &deltas {
        for alpha in &alphas {
            let (lo, hi) = depth_power_margins(delta, alpha);
            ensure!(lo >= -TOL && hi >= -TOL, "depth comparison at δ = {delta:.2e}, α = {alpha:.1}");
            checks += 1;
            let r = Float::with_val(PREC, 1u32 - Float::with_val(PREC, delta.pow(alpha)));
            for j in 0..6 {
                let ahat = Cx::expi_turns(&(Float::with_val(PREC, j) / 6u32 + 0.01));
                let a = ahat.scale(&Float::with_val(PREC, 1u32 - delta));
                let mut zs = vec![ahat.conj().scale(&Float::with_val(PREC, &r * (1.0 - 1e-30)))];
                for k in 0..12 {
                    for s in [0.0, 0.5, 0.9, 0.999, 1.0 - 1e-20] {
                        zs.push(Cx::expi_turns(&(Float::with_val(PREC, k) / 12u32)).scale(&Float::with_val(PREC, &r * s)));
                    }
                }
                for z in &zs {
                    let m = ok(end_approach_margin(&a, alpha, z))?;
                    ensure!(m >= -TOL, "end approach at δ_a = {delta:.2e}, α = {alpha:.1}: {m:.2e}");
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("{checks} grid checks, zero violations"))
}
