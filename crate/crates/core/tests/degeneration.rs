use paredlab::blaschke::AntiBlaschke;
use paredlab::degeneration::*;
use paredlab::hypdisk::dist_cx;
use paredlab::mp::{self, fl, Cx};
use paredlab::ribbontree::{enumerate_extended, enumerate_pointed, PointedMetricTree, RibbonTree};
use rayon::prelude::*;
use rug::Float;

fn tanh_family() -> Family {
    let prec = mp::bits_for_depth(2.0 * 20.0 + 16.0);
    let _g = mp::push_precision(prec);
    Family::from_sampler(DEFAULT_GRID.to_vec(), prec, |s| {
        let a = Float::with_val(prec, s / 2.0).tanh();
        AntiBlaschke::from_zeros(vec![Cx::real(a)])
    })
    .unwrap()
}

fn two_branch_tree() -> PointedMetricTree {
    // 0, 1 branch points; ends 2..=5, end 2 marked
    let rot = vec![vec![1, 2, 3], vec![0, 4, 5], vec![0], vec![0], vec![1], vec![1]];
    PointedMetricTree::new(RibbonTree::new(rot, 2, None).unwrap(), 0).unwrap()
}

fn round_trip(t: &PointedMetricTree) -> Result<(), String> {
    let r = if t.is_extended() { realize_extended(t, &DEFAULT_GRID) } else { realize(t, &DEFAULT_GRID) }.map_err(|e| e.to_string())?;
    let rep = verify(&r.embedded, &r.family, &VerifyOptions::default()).map_err(|e| e.to_string())?;
    if !rep.passed() {
        return Err(format!(
            "verify: qf={} crit={} aff={} ends={}",
            rep.quasi_fixed, rep.critically_approximating, rep.affine_separation, rep.ends_approximating
        ));
    }
    let back = extract_tree(&r.family, DEFAULT_SPLIT).map_err(|e| e.to_string())?;
    if !back.tree.isomorphic(t) {
        return Err("extracted tree is not isomorphic".into());
    }
    Ok(())
}

#[test]
fn constant_family_is_a_star() {
    for d in 2..=4 {
        let fam = Family::constant(AntiBlaschke::monomial(d), DEFAULT_GRID.to_vec()).unwrap();
        let rep = cluster_critical_points(&fam, DEFAULT_SPLIT).unwrap();
        assert!(rep.stable);
        assert_eq!(rep.active, vec![false]);
        let top = rep.clusters.last().unwrap();
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].degree, d);
        assert_eq!(top[0].rep.depth(), 0.0);

        let e = extract_tree(&fam, DEFAULT_SPLIT).unwrap();
        let star = PointedMetricTree::new(RibbonTree::star(d + 1), 0).unwrap();
        assert!(e.tree.isomorphic(&star));
        assert!(e.diagnostics.vertex_displacement.iter().all(|&x| x == 0.0));
    }
}

#[test]
fn star_realizes_as_the_constant_family() {
    let star = PointedMetricTree::new(RibbonTree::star(4), 0).unwrap();
    let r = realize(&star, &DEFAULT_GRID).unwrap();
    let _g = mp::push_precision(r.family.precision);
    for f in &r.family.maps {
        assert_eq!(f.degree(), 3);
        assert!(f.params().iter().all(|b| b.is_zero()));
    }
}

#[test]
fn tanh_family_has_one_active_cluster() {
    let fam = tanh_family();
    let rep = cluster_critical_points(&fam, DEFAULT_SPLIT).unwrap();
    assert!(rep.stable);
    assert_eq!(rep.active, vec![true]);
    let _g = mp::push_precision(fam.precision);
    for (i, &s) in fam.grid.iter().enumerate() {
        // critical point of w(w − a)/(1 − aw): a w² − 2w + a = 0
        let a = Float::with_val(fam.precision, s / 2.0).tanh();
        let one = fl(1.0);
        let disc = Float::with_val(fam.precision, &one - Float::with_val(fam.precision, a.square_ref())).sqrt();
        let w = Float::with_val(fam.precision, &one - disc) / &a;
        let cs = &rep.clusters[i];
        assert_eq!(cs.len(), 1);
        assert!(dist_cx(cs[0].rep.cx(), &Cx::real(w)).to_f64() < 1e-20, "s = {s}");
    }
    let last = rep.clusters.last().unwrap()[0].displacement;
    let first = rep.clusters[0][0].displacement;
    assert!(last > first + DEFAULT_SPLIT);
}

#[test]
fn tanh_family_extracts_a_tripod() {
    let fam = tanh_family();
    let e = extract_tree(&fam, DEFAULT_SPLIT).unwrap();
    let tr = &e.tree.tree;
    assert_eq!(tr.ends().len(), 3);
    assert_eq!(tr.branch_points().len(), 1);
    let v = tr.branch_points()[0];
    assert_eq!(tr.valence(v), 3);
    // the branch point runs away from the origin, so the special point is
    // either that vertex or an inserted valence-2 point
    assert!(e.tree.special == v || e.tree.is_extended());
}

#[test]
fn two_branch_clusters_separate_affinely() {
    let t = two_branch_tree();
    let r = realize(&t, &DEFAULT_GRID).unwrap();
    let rep = cluster_critical_points(&r.family, DEFAULT_SPLIT).unwrap();
    assert!(rep.stable);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let _g = mp::push_precision(r.family.precision);
    // below the top half the two clusters are closer than `split`
    for i in r.family.top_half() {
        let s = r.family.grid[i];
        let cs = &rep.clusters[i];
        assert_eq!(cs.iter().map(|c| c.degree).collect::<Vec<_>>(), vec![2, 2]);
        xs.push(s);
        ys.push(dist_cx(cs[0].rep.cx(), cs[1].rep.cx()).to_f64());
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    assert!((num / den - 1.0).abs() < 0.05, "slope {}", num / den);

    let v = verify(&r.embedded, &r.family, &VerifyOptions::default()).unwrap();
    assert!(v.passed());
    assert_eq!(v.separation_slopes.len(), 1);
}

#[test]
fn round_trip_pointed_trees_up_to_degree_three() {
    for d in 2..=3 {
        let trees = enumerate_pointed(d).unwrap();
        let fails: Vec<String> = trees
            .par_iter()
            .enumerate()
            .filter_map(|(i, t)| round_trip(t).err().map(|e| format!("d={d} #{i}: {e}")))
            .collect();
        assert!(fails.is_empty(), "{fails:?}");
    }
}

#[test]
fn round_trip_extended_trees_up_to_degree_three() {
    for d in 2..=3 {
        let trees = enumerate_extended(d).unwrap();
        assert!(trees.iter().all(|t| t.is_extended()));
        let fails: Vec<String> = trees
            .par_iter()
            .enumerate()
            .filter_map(|(i, t)| round_trip(t).err().map(|e| format!("d={d} #{i}: {e}")))
            .collect();
        assert!(fails.is_empty(), "{fails:?}");
    }
}

#[test]
fn realize_rejects_the_wrong_kind_of_tree() {
    let t = two_branch_tree();
    assert!(realize_extended(&t, &DEFAULT_GRID).is_err());
    let ext = enumerate_extended(2).unwrap().remove(0);
    assert!(realize(&ext, &DEFAULT_GRID).is_err());
    assert!(realize(&t, &[1.0, 2.0, 4.0]).is_err());
}

#[test]
fn nudged_vertex_breaks_the_quasi_fixed_clause() {
    let t = two_branch_tree();
    let r = realize(&t, &DEFAULT_GRID).unwrap();
    let clean = verify(&r.embedded, &r.family, &VerifyOptions::default()).unwrap();
    assert!(clean.quasi_fixed);
    let bound = clean.displacement.iter().cloned().fold(0.0, f64::max);
    let opts = VerifyOptions { m_bound: Some(bound), ..VerifyOptions::default() };
    assert!(verify(&r.embedded, &r.family, &opts).unwrap().quasi_fixed);
    for v in t.tree.branch_points() {
        let bad = r.embedded.nudged(v, 2.0).unwrap();
        let rep = verify(&bad, &r.family, &opts).unwrap();
        assert!(!rep.quasi_fixed, "vertex {v}");
    }
}

#[test]
fn family_json_round_trip() {
    let r = realize(&two_branch_tree(), &DEFAULT_GRID).unwrap();
    let text = serde_json::to_string(&r.family.to_json()).unwrap();
    let back = Family::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back.grid, r.family.grid);
    let _g = mp::push_precision(r.family.precision);
    for (f, g) in r.family.maps.iter().zip(&back.maps) {
        for (a, b) in f.params().iter().zip(g.params()) {
            assert!(dist_cx(a, b).to_f64() < 1e-20);
        }
    }
}

#[test]
fn parabolic_real_family() {
    let t = parabolic_tree(1.0).unwrap();
    let fam = realize_parabolic_real(&t, &DEFAULT_GRID).unwrap();
    let _g = mp::push_precision(fam.precision);
    let mut prev = f64::INFINITY;
    for (i, f) in fam.maps.iter().enumerate() {
        let s = fam.grid[i];
        for z in [Cx::zero(), Cx::one(), Cx::real(fl(-1.0))] {
            assert!((&f.eval(&z) - &z).abs().to_f64() < 1e-10, "s = {s}");
        }
        // zeros closed under conjugation, and f(z̄) = conj f(z)
        let zs = f.params();
        for b in zs {
            assert!(zs.iter().any(|c| *c == b.conj()));
        }
        for z in [Cx::from_f64(0.3, 0.4), Cx::from_f64(-0.7, 0.1), Cx::from_f64(0.05, -0.9)] {
            assert_eq!(f.eval(&z.conj()), f.eval(&z).conj());
        }
        // critical points ±r at depth s
        let crit = f.critical_points().unwrap();
        assert_eq!(crit.len(), 2);
        for (c, m) in &crit {
            assert_eq!(*m, 1);
            assert!((c.depth() - s).abs() < 1e-9);
        }
        let v1 = crit.iter().map(|c| c.0.clone()).find(|c| c.cx().re > 0).unwrap();
        let l = rescaled_multiplier(f, &v1, &Cx::new(fl(0.0), fl(1.0))).unwrap();
        assert!(l > 0.0 && l < prev, "s = {s}: {l} after {prev}");
        prev = l;
    }
    assert!(prev < 1e-6);
}

#[test]
fn parabolic_depth_solve_matches_target() {
    let _g = mp::push_precision(256);
    for t in [0.5, 3.0, 12.0, 30.0] {
        let c = solve_parabolic_c(t).unwrap();
        let r = parabolic_critical_radius(&c);
        let got = dist_cx(&Cx::zero(), &Cx::real(r)).to_f64();
        assert!((got - t).abs() < 1e-12, "{t}: {got}");
    }
    assert!(solve_parabolic_c(-1.0).is_err());
}

#[test]
fn parabolic_rejects_other_trees() {
    assert!(realize_parabolic_real(&two_branch_tree(), &DEFAULT_GRID).is_err());
    let lopsided = parabolic_tree(1.0).unwrap().with_length(0, 2, 2.0).unwrap();
    assert!(realize_parabolic_real(&lopsided, &DEFAULT_GRID).is_err());
}
