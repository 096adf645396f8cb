//! The simulated walk against exact quenched hitting probabilities.

use gwlab::environment::{EnvironmentLaw, TreeArena, VertexId};
use gwlab::quenched::{gamma_r_curve, hit_prob_vertex, restricted_line, ExploreLimits, LadderGrid};
use gwlab::rng;
use gwlab::walk::{count_hits, run_excursions, Visit};

#[test]
fn excursion_hit_frequency_matches_gamma() {
    let law = EnvironmentLaw::two_point();
    for seed in 0..3u64 {
        let mut arena = TreeArena::new(law, 100 + seed, 0);
        let r = 3.0;
        let curve = gamma_r_curve(&mut arena, &[r], &ExploreLimits::depth(10_000)).unwrap();
        let point = curve.points[0];
        assert!(point.is_exact());
        let hits = count_hits(&mut arena, 20_000, seed, 100_000_000, true, |a, y| {
            if a.potential(y) >= r {
                Visit::HitReflect
            } else {
                Visit::Pass
            }
        });
        assert_eq!(hits.censored, 0);
        let freq = hits.hit_frequency();
        assert!(
            freq.within(point.lower, 4.0),
            "seed {seed}: {freq:?} vs {}",
            point.lower
        );
    }
}

#[test]
fn zr_mean_matches_first_moment() {
    let law = EnvironmentLaw::two_point();
    let grid = LadderGrid::new(6.0, 0.6, 0.55, 1.2, 1.5, 1.0).unwrap();
    assert_eq!(grid.k, 2);
    for seed in 0..2u64 {
        let mut arena = TreeArena::new(law, 200 + seed, 0);
        let line = restricted_line(&mut arena, &grid, &ExploreLimits::depth(10_000)).unwrap();
        assert!(line.exact);
        let hits = line.count_visits(&mut arena, 20_000, seed, 100_000_000);
        assert_eq!(hits.censored, 0);
        let z = hits.mean_count();
        assert!(
            z.within(line.first_moment, 4.0),
            "seed {seed}: {z:?} vs {}",
            line.first_moment
        );
    }
}

/// Two-sample Kolmogorov-Smirnov statistic.
fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn excursion_maxima_are_exchangeable() {
    let law = EnvironmentLaw::two_point();
    let n = 5_000usize;
    // critical value at level 0.01
    let crit = 1.628 * (2.0 / n as f64).sqrt();
    let mut rejections = 0;
    for seed in 0..4u64 {
        let mut arena = TreeArena::new(law, 300 + seed, 0);
        let mut rg = rng::stream(&[300 + seed]);
        let run = run_excursions(&mut arena, 2 * n as u64, 3.0, &mut rg, 1_000_000_000).unwrap();
        assert!(!run.truncated);
        let maxima: Vec<f64> = run.records.iter().map(|r| r.max_potential).collect();
        let d = ks_statistic(&maxima[..n], &maxima[n..]);
        if d > crit {
            rejections += 1;
        }
        let times = run.return_times();
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        assert!(times
            .iter()
            .enumerate()
            .all(|(k, &t)| t + 1 >= 2 * (k as u64 + 1)));
    }
    assert!(
        rejections <= 1,
        "{rejections} of 4 arenas rejected exchangeability"
    );
}

#[test]
fn fixed_vertex_hit_frequency_matches_formula() {
    let law = EnvironmentLaw::two_point();
    for seed in 0..3u64 {
        let mut arena = TreeArena::new(law, 400 + seed, 0);
        arena.expand_to_depth(3);
        // the most accessible vertex of generation 3
        let x = (0..arena.len() as u32)
            .map(VertexId)
            .filter(|&y| arena.depth(y) == 3)
            .max_by(|&u, &v| {
                hit_prob_vertex(&arena, u)
                    .unwrap()
                    .total_cmp(&hit_prob_vertex(&arena, v).unwrap())
            })
            .expect("generation 3 is never empty");
        let p = hit_prob_vertex(&arena, x).unwrap();
        let hits = count_hits(&mut arena, 20_000, seed, 100_000_000, true, |a, y| {
            if y == x {
                Visit::HitReflect
            } else if a.is_ancestor_or_self(y, x) {
                Visit::Pass
            } else {
                Visit::Reflect
            }
        });
        assert_eq!(hits.censored, 0);
        let freq = hits.hit_frequency();
        assert!(freq.within(p, 4.0), "seed {seed}: {freq:?} vs {p}");
    }
}
