mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use tvd::geometry::{
    boundary_inequality, default_edge_tol, natural_rects, project_onto_cone_detailed, witness_c2, witness_expectation, WITNESS_C1,
};
use tvd::{
    cone_membership, gaussian_width_cone, lower_bound_witness, make_signal, project_onto_cone, sign_pattern, tv, EdgeIndex, ImageMatrix,
    SignPattern, SignalKind, SolverConfig,
};

fn pattern(kind: SignalKind, n: usize) -> SignPattern {
    let base = make_signal(&kind.at(n)).unwrap();
    sign_pattern(&base, default_edge_tol(&base)).unwrap()
}

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

/// A cone member built from `theta` by subtracting enough of the base signal.
fn member_from(sp: &SignPattern, theta: &ImageMatrix, extra: f64) -> ImageMatrix {
    let base = sp.base();
    let shift = sp.h(theta).unwrap().max(0.0) / tv(base) + extra;
    theta.axpy(-shift, base).unwrap()
}

#[test]
fn sign_pattern_examples() {
    assert_eq!(sign_pattern(&ImageMatrix::filled(4, 4, 3.0).unwrap(), 0.0).unwrap().active_count(), 0);
    let sp = pattern(SignalKind::Two, 4);
    let active = sp.active();
    assert_eq!(active.len(), 4);
    for (i, (e, s)) in active.iter().enumerate() {
        assert_eq!(*e, EdgeIndex::horizontal(i, 1));
        assert_eq!(*s, 1);
    }
    let neg = sign_pattern(&make_signal(&SignalKind::Two.at(4)).unwrap().scale(-1.0), 1e-9).unwrap();
    assert!(neg.active().iter().zip(&active).all(|((e1, s1), (e2, s2))| e1 == e2 && *s1 == -*s2));
    let tiny = ImageMatrix::from_rows(&[vec![0.0, 1e-12], vec![0.0, 0.0]]).unwrap();
    assert_eq!(sign_pattern(&tiny, default_edge_tol(&tiny)).unwrap().active_count(), 0);
}

#[test]
fn membership_examples() {
    let sp = pattern(SignalKind::Two, 4);
    let base = sp.base().clone();
    let m = cone_membership(&sp, &ImageMatrix::zeros(4, 4).unwrap()).unwrap();
    assert!(m.member && m.slack == 0.0);
    let m = cone_membership(&sp, &base.scale(-1.0)).unwrap();
    assert!(m.member);
    assert_eq!(m.slack, 4.0);
    let m = cone_membership(&sp, &base).unwrap();
    assert!(!m.member);
    assert_eq!(m.slack, -tv(&base));
    assert!(cone_membership(&sp, &ImageMatrix::zeros(3, 4).unwrap()).is_err());
}

#[test]
fn members_project_to_themselves() {
    let mut g = rng(51);
    let sp = pattern(SignalKind::Four, 6);
    let theta = member_from(&sp, &gaussian_matrix(&mut g, 6, 6), 0.1);
    assert_eq!(project_onto_cone(&sp, &theta, &cfg()).unwrap(), theta);
}

#[test]
fn projecting_the_base_lands_on_the_boundary() {
    let sp = pattern(SignalKind::Two, 8);
    let p = project_onto_cone_detailed(&sp, sp.base(), &cfg()).unwrap();
    assert!(p.h <= 0.0 && p.h >= -1e-6 * 64.0, "{}", p.h);
    assert!(cone_membership(&sp, &p.projection).unwrap().member);
}

#[test]
fn flat_base_projects_onto_constants() {
    let base = ImageMatrix::filled(5, 5, 1.0).unwrap();
    let sp = sign_pattern(&base, default_edge_tol(&base)).unwrap();
    let z = gaussian_matrix(&mut rng(52), 5, 5);
    let p = project_onto_cone(&sp, &z, &cfg()).unwrap();
    assert!(p.values().iter().all(|&v| v == z.mean()));
}

#[test]
fn two_by_two_projection_matches_grid_oracle() {
    let mut g = rng(53);
    for kind in SignalKind::ALL {
        let sp = pattern(kind, 2);
        for _ in 0..4 {
            let z = gaussian_matrix(&mut g, 2, 2);
            let got = project_onto_cone(&sp, &z, &cfg()).unwrap();
            let want = cone_projection_grid_oracle(&z, sp.signs());
            assert!(sup_dist(&got, &want) < 3e-2, "{kind}: {got:?} vs {want:?}");
        }
    }
}

#[test]
fn projection_optimality_certificates() {
    let mut g = rng(54);
    for kind in SignalKind::ALL {
        let sp = pattern(kind, 8);
        for _ in 0..3 {
            let z = gaussian_matrix(&mut g, 8, 8);
            let p = project_onto_cone(&sp, &z, &cfg()).unwrap();
            assert!(cone_membership(&sp, &p).unwrap().member);
            let r = z.sub(&p).unwrap();
            assert!(r.dot(&p).unwrap().abs() <= 1e-4 * z.norm_sq());
            for _ in 0..10 {
                let member = member_from(&sp, &gaussian_matrix(&mut g, 8, 8), g.random_range(0.0..1.0));
                assert!(r.dot(&member).unwrap() <= 1e-6 * member.norm().max(1.0) * z.norm());
            }
            let again = project_onto_cone(&sp, &p, &cfg()).unwrap();
            assert!(sup_dist(&again, &p) <= 1e-6);
        }
    }
}

#[test]
fn width_of_the_constant_line() {
    let base = ImageMatrix::filled(6, 6, 0.0).unwrap();
    let sp = sign_pattern(&base, 1e-9).unwrap();
    let w = gaussian_width_cone(&sp, 2000, 3, &cfg()).unwrap();
    let expected = (2.0 / std::f64::consts::PI).sqrt();
    assert!((w.mean - expected).abs() <= 3.0 * w.std_error, "{w:?}");
}

#[test]
fn width_is_reproducible_and_seed_consistent() {
    let sp = pattern(SignalKind::Two, 8);
    let a = gaussian_width_cone(&sp, 2, 9, &cfg()).unwrap();
    let b = gaussian_width_cone(&sp, 2, 9, &cfg()).unwrap();
    assert_eq!(a, b);
    let one = gaussian_width_cone(&sp, 200, 1, &cfg()).unwrap();
    let two = gaussian_width_cone(&sp, 200, 2, &cfg()).unwrap();
    let spread = (one.std_error.powi(2) + two.std_error.powi(2)).sqrt();
    assert!((one.mean - two.mean).abs() <= 3.0 * spread, "{one:?} vs {two:?}");
    assert!(gaussian_width_cone(&sp, 1, 9, &cfg()).is_err());
}

#[test]
fn width_does_not_depend_on_thread_count() {
    let sp = pattern(SignalKind::Four, 6);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| gaussian_width_cone(&sp, 16, 4, &cfg()).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn witness_examples() {
    let n = 16;
    let c1 = WITNESS_C1;
    let c2 = witness_c2(c1);
    let sp = pattern(SignalKind::Two, n);
    for sign in [1.0, -1.0] {
        let z = ImageMatrix::filled(n, n, sign).unwrap();
        let nu = lower_bound_witness(&z, c1).unwrap();
        let mid = if sign > 0.0 { c2 / 4.0 } else { c1 / 16.0 };
        for i in 0..n {
            assert!((0..7).all(|j| nu.get(i, j) == c1 / 16.0));
            assert_eq!(nu.get(i, 7), mid);
            assert!((8..16).all(|j| nu.get(i, j) == 0.0));
        }
        assert!(nu.norm() <= 1.0);
        assert!(cone_membership(&sp, &nu).unwrap().member);
    }
    assert!((witness_expectation(16, c1) - 0.4231).abs() < 1e-3);
    assert!(lower_bound_witness(&ImageMatrix::zeros(9, 9).unwrap(), c1).is_err());
    assert!(lower_bound_witness(&ImageMatrix::zeros(16, 16).unwrap(), 1.5).is_err());
}

#[test]
fn witness_is_a_unit_ball_member_for_random_noise() {
    let mut g = rng(55);
    for n in [4, 16, 36] {
        let sp = pattern(SignalKind::Two, n);
        for _ in 0..100 {
            let c1 = g.random_range(0.05..0.95);
            let nu = lower_bound_witness(&gaussian_matrix(&mut g, n, n), c1).unwrap();
            assert!(nu.norm() <= 1.0 + 1e-12);
            assert!(cone_membership(&sp, &nu).unwrap().member);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn slack_is_homogeneous_and_concave(seed in any::<u64>(), a in 0.01f64..50.0, kind_ix in 0usize..3) {
        let mut g = rng(seed);
        let sp = pattern(SignalKind::ALL[kind_ix], 6);
        let t1 = gaussian_matrix(&mut g, 6, 6);
        let t2 = gaussian_matrix(&mut g, 6, 6);
        let s1 = cone_membership(&sp, &t1).unwrap().slack;
        let s2 = cone_membership(&sp, &t2).unwrap().slack;
        let scaled = cone_membership(&sp, &t1.scale(a)).unwrap();
        prop_assert!((scaled.slack - a * s1).abs() <= 1e-12 * a * tv(&t1).max(1.0));
        let mid = cone_membership(&sp, &t1.add(&t2).unwrap().scale(0.5)).unwrap().slack;
        prop_assert!(mid >= 0.5 * (s1 + s2) - 1e-12 * (tv(&t1) + tv(&t2)).max(1.0));
        let m1 = member_from(&sp, &t1, 0.0);
        let m2 = member_from(&sp, &t2, 0.0);
        prop_assert!(cone_membership(&sp, &m1.add(&m2).unwrap().scale(0.5)).unwrap().member);
        prop_assert!(cone_membership(&sp, &m1.scale(a)).unwrap().member);
    }

    #[test]
    fn members_satisfy_the_boundary_inequality(seed in any::<u64>(), four in any::<bool>(), extra in 0.0f64..2.0) {
        let kind = if four { SignalKind::Four } else { SignalKind::Two };
        let n = 8;
        let sp = pattern(kind, n);
        let theta = member_from(&sp, &gaussian_matrix(&mut rng(seed), n, n), extra);
        let (lhs, rhs) = boundary_inequality(&theta, &natural_rects(kind, n).unwrap()).unwrap();
        prop_assert!(lhs <= rhs + 1e-9, "{} > {}", lhs, rhs);
    }
}
