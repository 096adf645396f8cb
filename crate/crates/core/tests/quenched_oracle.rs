mod common;

use common::{dense_absorb, law_for, random_antichain, small_frozen_tree};
use gwlab::environment::{EnvironmentLaw, TreeArena, VertexId};
use gwlab::quenched::{
    absorb_prob, check_stopping_line, gamma_r_curve, hit_prob_vertex, level_slice, stopping_line,
    ExploreLimits,
};
use proptest::prelude::*;

#[test]
fn absorb_prob_matches_dense_solve() {
    for i in 0..200u64 {
        let a = small_frozen_tree(law_for(i), 1000 + i, 50);
        assert!(a.len() <= 51);
        let set = random_antichain(&a, i);
        if set.is_empty() {
            continue;
        }
        let fast = absorb_prob(&a, &set).unwrap().prob;
        let slow = dense_absorb(&a, &set);
        assert!((fast - slow).abs() < 1e-10, "arena {i}: {fast} vs {slow}");
    }
}

#[test]
fn hit_prob_vertex_matches_dense_solve() {
    for i in 0..200u64 {
        let a = small_frozen_tree(law_for(i), 5000 + i, 50);
        for k in 1..a.len() as u32 {
            let x = VertexId(k);
            let closed = hit_prob_vertex(&a, x).unwrap();
            let slow = dense_absorb(&a, &[x]);
            assert!((closed - slow).abs() < 1e-10, "arena {i} vertex {k}");
        }
    }
}

#[test]
fn level_slices_are_monotone() {
    for i in 0..50u64 {
        let mut a = TreeArena::new(law_for(i), 77 + i, 0);
        a.expand_to_depth(6);
        let mut prev = 1.0;
        for n in 1..=6 {
            let slice = level_slice(&a, n);
            if slice.is_empty() {
                break;
            }
            let p = absorb_prob(&a, &slice).unwrap().prob;
            assert!(p <= prev + 1e-15);
            prev = p;
        }
    }
}

#[test]
fn first_generation_line() {
    // a root whose two children both step up by a: they form the line for r < a
    let law = EnvironmentLaw::two_point();
    let EnvironmentLaw::TwoPoint { jump, .. } = law else {
        unreachable!()
    };
    let mut found = 0;
    for seed in 0..40 {
        let mut a = TreeArena::new(law, seed, 0);
        let kids = a.expand(VertexId::ROOT);
        if kids.clone().any(|c| a.potential(VertexId(c)) < 0.0) {
            continue;
        }
        found += 1;
        let line = stopping_line(&mut a, 1.0, &ExploreLimits::depth(10)).unwrap();
        assert_eq!(line.members.len(), 2);
        for m in &line.members {
            assert_eq!(m.depth, 1);
            assert!((m.overshoot - (jump - 1.0)).abs() < 1e-12);
        }
    }
    assert!(found > 20);
}

#[test]
fn bracket_narrows_with_depth_cap() {
    let rs = [2.0, 4.0, 6.0];
    for seed in 0..6 {
        let mut prev: Option<Vec<(f64, f64)>> = None;
        for cap in [4, 8, 16, 64] {
            let mut a = TreeArena::new(EnvironmentLaw::two_point(), seed, 0);
            let c = gamma_r_curve(&mut a, &rs, &ExploreLimits::depth(cap)).unwrap();
            let now: Vec<(f64, f64)> = c.points.iter().map(|p| (p.lower, p.upper)).collect();
            if let Some(before) = &prev {
                for (b, n) in before.iter().zip(&now) {
                    assert!(n.0 >= b.0 * (1.0 - 1e-12) && n.1 <= b.1 * (1.0 + 1e-12));
                }
            }
            prev = Some(now);
        }
    }
}

#[test]
fn refinement_keeps_brackets_valid() {
    let rs = [4.0, 8.0, 12.0];
    for seed in 0..4 {
        let mut exact = TreeArena::new(EnvironmentLaw::two_point(), seed, 3);
        let truth = gamma_r_curve(&mut exact, &rs, &ExploreLimits::depth(100_000)).unwrap();
        let mut a = TreeArena::new(EnvironmentLaw::two_point(), seed, 3);
        let lim = ExploreLimits::depth(100_000)
            .with_min_log_hit(-6.0)
            .with_refinement(3, 1.0);
        let c = gamma_r_curve(&mut a, &rs, &lim).unwrap();
        for (t, p) in truth.points.iter().zip(&c.points) {
            assert!(t.is_exact());
            assert!(p.lower <= t.lower * (1.0 + 1e-12) && t.lower <= p.upper * (1.0 + 1e-12));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn stopping_lines_are_first_passage_antichains(seed in any::<u64>(), fam in 0u64..4, r in 0.2f64..5.0) {
        let mut a = TreeArena::new(law_for(fam), seed, 0);
        let line = stopping_line(&mut a, r, &ExploreLimits::depth(12)).unwrap();
        prop_assert!(check_stopping_line(&a, &line).is_ok());
        for m in &line.members {
            prop_assert!(m.overshoot >= 0.0);
        }
    }

    #[test]
    fn single_vertex_absorption_is_the_path_formula(seed in any::<u64>(), fam in 0u64..4, pick in any::<u32>()) {
        let a = small_frozen_tree(law_for(fam), seed, 40);
        let x = VertexId(1 + pick % (a.len() as u32 - 1));
        let lhs = absorb_prob(&a, &[x]).unwrap().prob;
        let rhs = hit_prob_vertex(&a, x).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn gamma_is_non_increasing(seed in any::<u64>(), fam in 0u64..4) {
        let mut a = TreeArena::new(law_for(fam), seed, 0);
        let c = gamma_r_curve(&mut a, &[1.0, 2.0, 3.0, 4.0], &ExploreLimits::depth(10)).unwrap();
        for w in c.points.windows(2) {
            prop_assert!(w[1].lower <= w[0].lower * (1.0 + 1e-12));
            prop_assert!(w[1].upper <= w[0].upper * (1.0 + 1e-12));
            prop_assert!(w[1].lower <= w[1].upper * (1.0 + 1e-12));
        }
    }
}
