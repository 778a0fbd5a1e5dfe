use paredlab::blaschke::AntiBlaschke;
use paredlab::monodromy::*;
use paredlab::mp::{self, Cx};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;

const PERIOD: usize = 3;

fn loop_trace(d: usize, turns: i64) -> TracedPath {
    let seeds = seeds_from_angles(&seed_periodic_points(d, PERIOD).unwrap());
    trace(&rotation_loop(d, turns, 64), &seeds, PERIOD).unwrap()
}

fn random_map(rng: &mut ChaCha8Rng, d: usize) -> AntiBlaschke {
    let zeros = (1..d)
        .map(|_| {
            let r = rng.gen_range(0.0..0.25);
            let a = rng.gen_range(0.0..1.0);
            Cx::from_f64(r * f64::cos(std::f64::consts::TAU * a), r * f64::sin(std::f64::consts::TAU * a))
        })
        .collect();
    let f = AntiBlaschke::from_zeros(zeros).unwrap();
    AntiBlaschke::from_parts(Cx::expi_turns_f64(rng.gen_range(-0.1..0.1)), f.params().to_vec()).unwrap()
}

#[test]
fn markov_transitions_are_all_but_the_diagonal() {
    for d in 2..=5 {
        let m = markov_base(d).unwrap();
        for (k, row) in m.transition.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                assert_eq!(x, u8::from(k != j), "d = {d}: {k} → {j}");
            }
        }
    }
}

#[test]
fn seeds_have_exact_period_one_per_piece() {
    for d in 2..=4 {
        let seeds = seed_periodic_points(d, PERIOD).unwrap();
        assert_eq!(seeds.len(), d + 1);
        for (k, s) in seeds.iter().enumerate() {
            assert_eq!(s.piece(d), k);
            let mut x = *s;
            for i in 1..=PERIOD {
                x = paredlab::lamination::m_minus_d(x, d);
                assert_eq!(x == *s, i == PERIOD);
            }
        }
    }
    assert!(seed_periodic_points(9, 40).is_err());
}

#[test]
fn rotation_loop_cycles_the_pieces() {
    let _g = mp::push_precision(128);
    for d in 2..=4 {
        let t = loop_trace(d, 1);
        let n = d + 1;
        let expect: Vec<usize> = (0..n).map(|i| (i + n - 1) % n).collect();
        assert_eq!(t.permutation, expect, "d = {d}");
        assert_eq!(t.braid, (1..=d as i32).rev().collect::<Vec<_>>());
        // every periodic point of e^{2πiθ} z̄^d moves by θ/(d+1)
        for (a, b) in t.start.iter().zip(&t.end) {
            let shift = mp::frac_turns(&Float::with_val(128, Float::with_val(128, b - a) - Float::with_val(128, 1) / n as u32));
            let off = shift.to_f64().min(1.0 - shift.to_f64());
            assert!(off < 1e-25, "d = {d}: {off}");
        }
        assert!(t.residuals.iter().all(|&r| r < 1e-25));
    }
}

#[test]
fn full_rotation_of_the_pieces_is_a_full_twist_cycle() {
    let _g = mp::push_precision(128);
    let d = 2;
    let t = loop_trace(d, d as i64 + 1);
    assert_eq!(t.permutation, vec![0, 1, 2]);
    let one = loop_trace(d, 1);
    let mut a = one.clone();
    for _ in 0..d {
        a = compose(&a, &one).unwrap();
    }
    assert_eq!(a.permutation, t.permutation);
    assert_eq!(a.braid, t.braid);
}

#[test]
fn loop_then_reverse_is_trivial() {
    let _g = mp::push_precision(128);
    for d in 2..=3 {
        let fwd = loop_trace(d, 1);
        let mut back_maps = fwd.maps.clone();
        back_maps.reverse();
        let back = trace(&back_maps, &fwd.end_seeds(), PERIOD).unwrap();
        assert_eq!(back.braid, inverse_word(&fwd.braid));
        let c = compose(&fwd, &back).unwrap();
        assert_eq!(c.permutation, (0..=d).collect::<Vec<_>>());
        assert!(c.braid.is_empty(), "{:?}", c.braid);
    }
}

#[test]
fn homomorphism_and_reversal_on_random_paths() {
    let _g = mp::push_precision(128);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut nontrivial = 0;
    for case in 0..10 {
        let d = 2 + case % 2;
        let f0 = random_map(&mut rng, d);
        let f1 = random_map(&mut rng, d);
        let f2 = random_map(&mut rng, d);
        let w1 = rng.gen_range(-1..=1);
        let w2 = rng.gen_range(-1..=1);
        let p1 = line_path(&f0, &f1, w1, 24).unwrap();
        let p2 = line_path(&f1, &f2, w2, 24).unwrap();
        let f0_seeds = seeds_for(&f0, PERIOD, 16).unwrap();

        let a = trace(&p1, &f0_seeds, PERIOD).unwrap();
        let b = trace(&p2, &a.end_seeds(), PERIOD).unwrap();
        let ab = compose(&a, &b).unwrap();
        let mut joined = p1.clone();
        joined.extend_from_slice(&p2[1..]);
        let direct = trace(&joined, &f0_seeds, PERIOD).unwrap();
        assert_eq!(ab.permutation, direct.permutation, "case {case}");
        assert_eq!(ab.braid, free_reduce(&direct.braid), "case {case}");
        nontrivial += usize::from(!ab.braid.is_empty());
        for (x, y) in ab.end.iter().zip(&direct.end) {
            assert!((Float::with_val(128, x - y)).abs().to_f64() < 1e-20, "case {case}");
        }

        let mut rev = p1.clone();
        rev.reverse();
        let r = trace(&rev, &a.end_seeds(), PERIOD).unwrap();
        assert_eq!(r.permutation, inverse_permutation(&a.permutation), "case {case}");
        let id = compose(&a, &r).unwrap();
        assert_eq!(id.permutation, (0..=d).collect::<Vec<_>>(), "case {case}");
        assert!(id.braid.is_empty(), "case {case}: {:?}", id.braid);
    }
    assert!(nontrivial >= 3, "only {nontrivial} pairs braid");
}

#[test]
fn constant_path_is_neutral() {
    let _g = mp::push_precision(128);
    for d in 2..=3 {
        let c = trace(&vec![AntiBlaschke::monomial(d); 5], &seeds_from_angles(&seed_periodic_points(d, PERIOD).unwrap()), PERIOD).unwrap();
        assert_eq!(c.permutation, (0..=d).collect::<Vec<_>>());
        assert!(c.braid.is_empty());
        let l = loop_trace(d, 1);
        let lc = compose(&l, &c).unwrap();
        assert_eq!((lc.permutation, lc.braid), (l.permutation.clone(), l.braid.clone()));
        let mut cl = compose(&c, &l).unwrap();
        assert_eq!(cl.permutation, l.permutation);
        // d + 1 loops return every piece home
        for _ in 0..d {
            cl = compose(&cl, &l).unwrap();
        }
        assert_eq!(cl.permutation, (0..=d).collect::<Vec<_>>());
    }
}

#[test]
fn compose_checks_endpoints() {
    let _g = mp::push_precision(128);
    let a = loop_trace(2, 1);
    let other = trace(
        &line_path(&AntiBlaschke::monomial(2), &AntiBlaschke::from_zeros(vec![Cx::from_f64(0.1, 0.0)]).unwrap(), 0, 8).unwrap(),
        &seeds_from_angles(&seed_periodic_points(2, PERIOD).unwrap()),
        PERIOD,
    )
    .unwrap();
    assert!(matches!(compose(&other, &a), Err(paredlab::Error::EndpointMismatch)));
    assert!(matches!(compose(&a, &loop_trace(3, 1)), Err(paredlab::Error::EndpointMismatch)));
}

#[test]
fn path_records_round_trip() {
    let _g = mp::push_precision(128);
    let f = AntiBlaschke::from_zeros(vec![Cx::from_f64(0.2, -0.1)]).unwrap();
    let recs = vec![
        PathRecord { t: 0.0, rotation: 0.0, map: AntiBlaschke::monomial(2).to_json() },
        PathRecord { t: 1.0, rotation: 0.25, map: f.to_json() },
    ];
    let text = serde_json::to_string(&recs).unwrap();
    let back: Vec<PathRecord> = serde_json::from_str(&text).unwrap();
    let maps = path_from_json(&back).unwrap();
    assert!((maps[1].lambda() - &Cx::from_f64(0.0, 1.0)).abs().to_f64() < 1e-15);
    let bad = vec![back[1].clone(), back[0].clone()];
    assert!(path_from_json(&bad).is_err());
}
