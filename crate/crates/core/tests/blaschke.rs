use num_complex::Complex64;
use paredlab::blaschke::*;
use paredlab::hypdisk::{dist_cx, DiskPoint};
use paredlab::mp::{self, fl, Cx};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Signed speed of the boundary map in turns per turn by central differences.
fn circle_map_slope(f: &AntiBlaschke, t: f64, h: f64) -> f64 {
    let a = f.eval(&Cx::expi_turns_f64(t + h));
    let b = f.eval(&Cx::expi_turns_f64(t - h));
    (&a / &b).arg().to_f64() / TAU / (2.0 * h)
}

#[test]
fn monomial_fixed_points_and_multipliers() {
    for d in 2..=6 {
        let f = AntiBlaschke::monomial(d);
        let fp = f.boundary_fixed_points().unwrap();
        assert_eq!(fp.points.len(), d + 1);
        assert_eq!(fp.marking, 0);
        for (k, t) in fp.turns_f64().iter().enumerate() {
            assert!((t - k as f64 / (d + 1) as f64).abs() < 1e-10, "d={d} k={k} t={t}");
        }
        for l in f.multipliers().unwrap() {
            assert!((l - (d as f64).ln()).abs() < 1e-10);
        }
        assert!(f.pared_membership((d as f64).ln()).unwrap());
        assert!(!f.pared_membership((d as f64).ln() - 0.01).unwrap());
        assert!(f.qf_membership(0.0).unwrap());
    }
}

#[test]
fn evaluation_examples() {
    let f = AntiBlaschke::monomial(3);
    let z = Complex64::from_polar(1.0, TAU / 8.0);
    let w = f.eval_c64(z);
    assert!((w - Complex64::from_polar(1.0, -6.0 * PI / 8.0)).norm() < 1e-14);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let g = random_map(rng.gen_range(2..=5), 4.0, &mut rng);
        assert!(g.eval(&Cx::zero()).abs().to_f64() < 1e-40);
        for i in 0..50 {
            let v = g.eval(&Cx::expi_turns_f64(i as f64 / 50.0));
            assert!((v.abs().to_f64() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn critical_points_of_monomial_and_real_example() {
    for d in 2..=5 {
        let cp = AntiBlaschke::monomial(d).critical_points().unwrap();
        assert_eq!(cp.len(), 1);
        assert_eq!(cp[0].1, d - 1);
        assert!(cp[0].0.cx().abs().to_f64() < 1e-12);
    }
    // d = 2, a = 0.5: |∂f/∂z̄| sampled densely on (0, 0.5)
    let f = AntiBlaschke::new(&[c(0.5, 0.0)]).unwrap();
    let n = 20_000;
    let (mut best, mut arg) = (f64::MAX, 0.0);
    for i in 1..n {
        let x = 0.5 * i as f64 / n as f64;
        let v = f.dzbar(&Cx::from_f64(x, 0.0)).abs().to_f64();
        if v < best {
            best = v;
            arg = x;
        }
    }
    let cp = f.critical_points().unwrap();
    assert_eq!(cp.len(), 1);
    let z = cp[0].0.to_c64();
    assert!(z.im.abs() < 1e-20 && z.re > 0.0 && z.re < 0.5);
    assert!((z.re - arg).abs() < 2.0 * 0.5 / n as f64, "{} vs grid {}", z.re, arg);
}

#[test]
fn symmetric_zeros_give_symmetric_critical_set() {
    let f = AntiBlaschke::new(&[c(0.4, 0.3), c(-0.4, -0.3)]).unwrap();
    let cps = f.critical_list().unwrap();
    assert_eq!(cps.len(), 2);
    for p in &cps {
        let q = -p;
        let best = cps.iter().map(|r| (r - &q).abs().to_f64()).fold(f64::MAX, f64::min);
        assert!(best < 1e-30);
    }
}

#[test]
fn critical_count_audit_on_random_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for d in 2..=6 {
        for _ in 0..10 {
            let f = random_map(d, 8.0, &mut rng);
            let total: usize = f.critical_points().unwrap().iter().map(|(_, m)| m).sum();
            assert_eq!(total, d - 1);
        }
    }
}

#[test]
fn real_map_has_fixed_point_at_zero_angle() {
    let f = AntiBlaschke::new(&[c(0.5, 0.0)]).unwrap();
    let fp = f.boundary_fixed_points().unwrap();
    assert_eq!(fp.points.len(), 3);
    let t = fp.turns_f64();
    assert!(t.iter().any(|x| x.min(1.0 - x) < 1e-12), "{t:?}");
    for r in &fp.residuals {
        assert!(*r < 1e-40);
    }
}

#[test]
fn multipliers_match_finite_differences() {
    // d = 2, a = 0.5 at the fixed point nearest 1/2
    let f = AntiBlaschke::new(&[c(0.5, 0.0)]).unwrap();
    let fp = f.boundary_fixed_points().unwrap();
    let k = (0..3).min_by(|&i, &j| {
        let di = (fp.turns_f64()[i] - 0.5).abs();
        let dj = (fp.turns_f64()[j] - 0.5).abs();
        di.total_cmp(&dj)
    });
    let k = k.unwrap();
    let fd = circle_map_slope(&f, fp.turns_f64()[k], 1e-5).abs();
    assert!((f.multiplier(k).unwrap() - fd.ln()).abs() < 1e-7);

    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let g = random_map(3, 3.0, &mut rng);
        let fp = g.boundary_fixed_points().unwrap();
        for (k, t) in fp.turns_f64().iter().enumerate() {
            let fd = circle_map_slope(&g, *t, 1e-6);
            assert!(fd < 0.0, "boundary map reverses orientation");
            assert!((g.multiplier(k).unwrap() - fd.abs().ln()).abs() < 1e-6);
        }
    }
}

#[test]
fn continuation_marking_agrees_with_lift_and_is_path_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let f = random_map(3, 3.0, &mut rng);
        let lift = f.boundary_fixed_points().unwrap();
        let cont = f.continuation_marking().unwrap();
        let zeros = f.zeros();
        // second path: spiral in before reaching the target coefficients
        let spiral = |t: &rug::Float| {
            let tt = t.to_f64();
            let rot = Cx::expi_turns_f64(0.5 * tt * (1.0 - tt));
            AntiBlaschke::from_zeros(zeros.iter().map(|a| (&rot * a).scale(t)).collect())
        };
        let other = trace_fixed_points(3, &spiral).map_err(|e| format!("{e}")).unwrap();
        for k in 0..4 {
            let a = lift.turns_f64()[k];
            for b in [cont.turns_f64()[k], other.turns_f64()[k]] {
                let dd = (a - b).rem_euclid(1.0);
                assert!(dd.min(1.0 - dd) < 1e-12, "label {k}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn schwarz_property_and_boundary_degree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in 2..=5 {
        let f = random_map(d, 5.0, &mut rng);
        assert_eq!(f.boundary_degree(), -(d as i64));
        for _ in 0..50 {
            let x = Cx::from_c64(Complex64::from_polar(rng.gen_range(0.0..0.99), rng.gen_range(0.0..TAU)));
            let y = Cx::from_c64(Complex64::from_polar(rng.gen_range(0.0..0.99), rng.gen_range(0.0..TAU)));
            let before = dist_cx(&x, &y).to_f64();
            let after = dist_cx(&f.eval(&x), &f.eval(&y)).to_f64();
            assert!(after <= before + 1e-10);
        }
    }
}

#[test]
fn rescaling() {
    let f = AntiBlaschke::new(&[c(0.3, -0.4), c(-0.6, 0.1)]).unwrap();
    assert_eq!(f.rescale(&DiskPoint::origin()).unwrap(), f);
    let (cp, _) = f.critical_points().unwrap()[0].clone();
    let g = f.rescale(&cp).unwrap();
    let at0 = g.critical_list().unwrap().iter().map(|z| z.abs().to_f64()).fold(f64::MAX, f64::min);
    assert!(at0 < 1e-30);
    // conjugate evaluates as T∘f∘T⁻¹
    let t = paredlab::hypdisk::to_origin(&cp);
    let z = Cx::from_f64(0.2, 0.1);
    let want = t.apply(&f.eval(&t.invert(&z)));
    assert!((&g.eval(&z) - &want).abs().to_f64() < 1e-40);
}

#[test]
fn rescaled_active_family_converges() {
    // d = 2, a_s = tanh(s/2), rescaled at its critical point
    let mut prev: Option<Vec<Complex64>> = None;
    let mut gaps = Vec::new();
    for s in [8.0, 12.0, 16.0, 20.0] {
        let _g = mp::push_precision(mp::bits_for_depth(2.0 * s));
        let f = AntiBlaschke::from_zeros(vec![Cx::real(fl(s / 2.0).tanh())]).unwrap();
        let (cp, m) = f.critical_points().unwrap()[0].clone();
        assert_eq!(m, 1);
        let g = f.rescale(&cp).unwrap();
        let mut coeffs: Vec<Complex64> = g.params().iter().map(|b| b.to_c64()).collect();
        coeffs.sort_by(|a, b| a.re.total_cmp(&b.re));
        coeffs.push(g.lambda().to_c64());
        if let Some(p) = &prev {
            gaps.push(coeffs.iter().zip(p).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
        }
        prev = Some(coeffs);
    }
    for w in gaps.windows(2) {
        assert!(w[1] < w[0]);
    }
    // the coefficients tend to ±1 and λ → 1: the algebraic limit carries two
    // holes, matching the cluster degree 2
    let lim = prev.unwrap();
    let holes = symbolic_limit(&[c(lim[0].re.round(), 0.0), c(lim[1].re.round(), 0.0)]).unwrap();
    assert_eq!(holes.holes.len(), 2);
}

#[test]
fn symbolic_limits() {
    let s = symbolic_limit(&[c(1.0, 0.0)]).unwrap();
    assert_eq!(s.holes, vec![c(1.0, 0.0)]);
    assert_eq!(s.factor.degree(), 1);
    let z = Cx::from_f64(0.3, 0.4);
    assert!((&s.factor.eval(&z) - &(-z.conj())).abs().to_f64() < 1e-40);

    let s = symbolic_limit(&[c(0.2, 0.1), c(-0.3, 0.0)]).unwrap();
    assert!(s.holes.is_empty());
    assert_eq!(s.factor, AntiBlaschke::new(&[c(0.2, 0.1), c(-0.3, 0.0)]).unwrap());

    // sup over |z − 1| ≥ 0.1 of |f_n − φ| decays for a_n = 1 − 1/n
    let phi = symbolic_limit(&[c(1.0, 0.0)]).unwrap().factor;
    let mut sups = Vec::new();
    for n in [10.0, 100.0, 1000.0, 10000.0] {
        let f = AntiBlaschke::new(&[c(1.0 - 1.0 / n, 0.0)]).unwrap();
        let mut sup = 0.0f64;
        for i in 0..60 {
            for j in 0..=30 {
                let z = Complex64::from_polar(j as f64 / 30.0, TAU * i as f64 / 60.0);
                if (z - 1.0).norm() < 0.1 {
                    continue;
                }
                sup = sup.max((f.eval_c64(z) - phi.eval_c64(z)).norm());
            }
        }
        sups.push(sup);
    }
    for w in sups.windows(2) {
        assert!(w[1] < w[0] / 5.0, "{sups:?}");
    }
}

#[test]
fn json_round_trip() {
    let f = AntiBlaschke::new(&[c(0.25, -0.5)]).unwrap();
    let j = serde_json::to_string(&f.to_json()).unwrap();
    let g = AntiBlaschke::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
    assert!((&g.params()[1] - &f.params()[1]).abs().to_f64() < 1e-50);
    let bad = BlaschkeJson { d: 3, zeros: vec![[0.1, 0.0]], zeros_mp: None };
    assert!(AntiBlaschke::from_json(&bad).is_err());
}
