use paredlab::planegraph::*;
use paredlab::tischler::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;

#[test]
fn tischler_duals() {
    for d in 2..=6 {
        let t = tischler_of(&PlaneGraph::cycle(d + 1)).unwrap();
        assert!(plane_isomorphic(&t.graph, &PlaneGraph::bouquet_dual(d + 1)).is_some());
        assert_eq!(t.degrees, vec![d, d]);
        assert_eq!(t.degree(), d);
    }
    let k4 = tischler_of(&PlaneGraph::k4()).unwrap();
    assert!(plane_isomorphic(&k4.graph, &PlaneGraph::k4()).is_some());
    assert_eq!(k4.degrees, vec![2; 4]);
    let path = PlaneGraph::from_adjacency(&[vec![1], vec![0, 2], vec![1]]).unwrap();
    assert!(matches!(tischler_of(&path), Err(paredlab::Error::NotRealizable(_))));
}

#[test]
fn verdicts_on_small_graphs() {
    assert_eq!(boundedness_verdict(&PlaneGraph::k4()).unwrap(), Verdict::Bounded);
    for g in [PlaneGraph::cycle(4), PlaneGraph::c4_chord()] {
        match boundedness_verdict(&g).unwrap() {
            Verdict::Unbounded { witness, .. } => assert!(!is_admissible(&witness).admissible),
            Verdict::Bounded => panic!("2-connected graph reported bounded"),
        }
    }
}

#[test]
fn bifurcation_chain() {
    let chain = [PlaneGraph::cycle(4), PlaneGraph::c4_chord(), PlaneGraph::k4()];
    for (i, g) in chain.iter().enumerate() {
        for (j, h) in chain.iter().enumerate() {
            let b = bifurcates(g, h).unwrap();
            assert_eq!(b.bifurcates, i < j, "{i} -> {j}");
        }
    }
    let b = bifurcates(&chain[0], &chain[2]).unwrap();
    assert_eq!(b.orbits.len(), 1);
    assert_eq!(b.embeddings.len(), 24);
}

#[test]
fn enrichment_round_trip_recovers_double_coset() {
    for n in 4..=5 {
        let atlas = enumerate_atlas(n).unwrap();
        for g in &atlas {
            for h in &atlas {
                let b = bifurcates(g, h).unwrap();
                if !b.bifurcates {
                    continue;
                }
                for (o, e) in b.orbits.iter().zip(&b.enrichments) {
                    let en = e.dual_graph();
                    assert!(is_pseudo_simple(&en));
                    let iso = plane_isomorphic(&en, h).expect("Γ^En ≅ Γ'");
                    let ext = e.extract_embedding();
                    let dart_map: Vec<usize> = ext.dart_map.iter().map(|&x| iso[x]).collect();
                    let back = b.embeddings.iter().position(|x| x.dart_map == dart_map).expect("extracted embedding is an embedding");
                    assert!(o.contains(&back));
                }
            }
        }
    }
}

#[test]
fn trivial_enrichments_admissible() {
    for n in 4..=6 {
        for g in enumerate_atlas(n).unwrap() {
            let t = tischler_of(&g).unwrap();
            let e = trivial_enrichment(&t);
            assert!(plane_isomorphic(&e.result, &t.graph).is_some());
            assert!(is_admissible(&e).admissible);
        }
    }
}

#[test]
fn random_enrichments_preserve_faces() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let atlas = enumerate_atlas(5).unwrap();
    let mut done = 0;
    while done < 50 {
        let g = atlas.choose(&mut rng).unwrap();
        let t = tischler_of(g).unwrap();
        let all = enumerate_blowups(&t, 100_000).unwrap();
        let b = all.choose(&mut rng).unwrap().clone();
        let e = enrich(&t, b).unwrap();
        assert_eq!(e.result.face_count(), t.graph.face_count());
        let en = e.dual_graph();
        assert!(is_pseudo_simple(&en));
        assert!(!embeddings(g, &en).is_empty());
        done += 1;
    }
}

#[test]
fn enrich_rejects_bad_blowups() {
    let t = tischler_of(&PlaneGraph::cycle(4)).unwrap();
    let mut b: Vec<Blowup> = (0..2).map(|v| Blowup::star(&t.graph, v)).collect();
    b[0].tree = paredlab::ribbontree::RibbonTree::star(3);
    b[0].attach.pop();
    assert!(matches!(enrich(&t, b), Err(paredlab::Error::EndCountMismatch { .. })));
    let mut b: Vec<Blowup> = (0..2).map(|v| Blowup::star(&t.graph, v)).collect();
    b[1].attach.swap(0, 1);
    assert!(matches!(enrich(&t, b), Err(paredlab::Error::CyclicOrderViolation(1))));
}

#[test]
fn admissible_enrichments_have_no_short_cuts() {
    for g in enumerate_atlas(5).unwrap() {
        let t = tischler_of(&g).unwrap();
        for b in enumerate_blowups(&t, 100_000).unwrap() {
            let e = enrich(&t, b).unwrap();
            let en = e.dual_graph();
            if is_admissible(&e).admissible {
                assert!(en.is_simple());
            } else {
                assert!(is_k_connected(&g, 2));
            }
        }
    }
}

#[test]
fn figure_fixtures() {
    let e = fixtures::nsg().unwrap();
    assert!(matches!(is_admissible(&e).certificate, Some(Certificate::Bigon { .. })));

    let (g, h, dec) = fixtures::sb1a();
    assert_eq!(automorphisms(&g).len(), 1);
    assert_eq!(automorphisms(&h).len(), 1);
    let b = bifurcates(&g, &h).unwrap();
    assert_eq!(b.orbits.len(), 2);
    let arrows = ArrowedGraph { graph: h.clone(), decoration: dec };
    for o in &b.orbits {
        let d = Diagram { gamma: g.clone(), gamma2: h.clone(), emb: b.embeddings[o[0]].clone() };
        assert!(d.chambers().unwrap().iter().all(|c| c.len() <= 2));
        assert!(arrow_compatible(&d, &arrows).unwrap());
    }

    let (s, dec) = fixtures::sb2();
    let r = shared_mating_report(&s).unwrap();
    assert_eq!(automorphisms(&s).len(), 1);
    assert_eq!(r.cycles.len(), 2);
    assert_eq!(r.orbits.len(), 2);
    let arrows = ArrowedGraph { graph: s.clone(), decoration: dec };
    for c in &r.cycles {
        assert!(arrow_compatible(&diagram_along(&s, c).unwrap(), &arrows).unwrap());
    }
    assert!(r.pairs[0].common.is_some());

    let nsb = fixtures::nsb();
    let r = shared_mating_report(&nsb).unwrap();
    assert_eq!(automorphisms(&nsb).len(), 1);
    assert_eq!(r.cycles.len(), 2);
    assert_eq!(r.orbits.len(), 2);
    assert!(r.pairs[0].common.is_none());
}

#[test]
fn mating_report_k4() {
    let r = shared_mating_report(&PlaneGraph::k4()).unwrap();
    assert_eq!(r.cycles.len(), 3);
    assert_eq!(r.orbits.len(), 1);
}

#[test]
fn all_dots_on_trivial_diagram() {
    let g = PlaneGraph::k4();
    let emb = GraphEmbedding { vertex_map: (0..4).collect(), dart_map: (0..g.dart_count()).collect() };
    let d = Diagram { gamma: g.clone(), gamma2: g.clone(), emb };
    let a = ArrowedGraph { graph: g.clone(), decoration: vec![Decoration::Dot; 4] };
    assert!(arrow_compatible(&d, &a).unwrap());
    let bad = ArrowedGraph { graph: g.clone(), decoration: vec![Decoration::Dot; 3] };
    assert!(matches!(arrow_compatible(&d, &bad), Err(paredlab::Error::DecorationMismatch(_))));
}
