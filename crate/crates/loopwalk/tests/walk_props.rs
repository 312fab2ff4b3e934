//! Walk layer: the pull kernel against exact eigenvalue formulas and
//! brute-force trajectory sums, mass conservation, monotonicity of even
//! return probabilities, and escape times against closed forms, direct
//! residual checks, and Monte Carlo.

mod common;

use loopwalk::looptree::{loop_transform, Looptree};
use loopwalk::offspring::OffspringDistribution;
use loopwalk::tree::PlaneTree;
use loopwalk::{ensemble, spine, walk, Error};

fn graph_of(out: Vec<u32>) -> Looptree {
    loop_transform(&PlaneTree::from_outdegrees(out).unwrap())
}

fn adj_lists(g: &Looptree) -> Vec<Vec<u32>> {
    (0..g.len() as u32).map(|v| g.neighbors(v).to_vec()).collect()
}

#[test]
fn single_vertex_walk_stays_put() {
    let g = graph_of(vec![0]);
    let p = walk::return_probabilities(&g, 5);
    assert_eq!(p, vec![1.0; 6]);
}

#[test]
fn double_edge_alternates() {
    let g = graph_of(vec![1, 0]);
    let p = walk::return_probabilities(&g, 6);
    assert_eq!(p, vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
}

#[test]
fn triangle_matches_eigenvalue_formula() {
    // transition spectrum on the 3-cycle: 1, -1/2, -1/2
    let g = graph_of(vec![2, 0, 0]);
    let p = walk::return_probabilities(&g, 10);
    for (t, &pt) in p.iter().enumerate() {
        let expect = 1.0 / 3.0 + (2.0 / 3.0) * (-0.5f64).powi(t as i32);
        assert!((pt - expect).abs() < 1e-13, "t = {t}: {pt} vs {expect}");
    }
}

#[test]
fn square_even_return_is_one_half() {
    // transition spectrum on the 4-cycle: 1, 0, 0, -1
    let g = graph_of(vec![3, 0, 0, 0]);
    let p = walk::return_probabilities(&g, 8);
    for t in 0..=8 {
        let expect = if t % 2 == 0 { 0.5 } else { 0.0 };
        let expect = if t == 0 { 1.0 } else { expect };
        assert!((p[t] - expect).abs() < 1e-13, "t = {t}: {}", p[t]);
    }
    // independent check by trajectory enumeration
    let adj = adj_lists(&g);
    assert!((common::brute_force_return_probability(&adj, 0, 4) - 0.5).abs() < 1e-13);
}

#[test]
fn kernel_matches_trajectory_enumeration_on_random_graphs() {
    let dist = OffspringDistribution::geometric_half();
    let mut rng = ensemble::substream(50, 0);
    let mut done = 0;
    while done < 25 {
        let t = match loopwalk::tree::sample_gw(&dist, 40, &mut rng) {
            Ok(t) if t.len() >= 2 => t,
            Ok(_) => continue,
            Err(Error::CapExceeded { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        let g = loop_transform(&t);
        let p = walk::return_probabilities(&g, 6);
        let adj = adj_lists(&g);
        for (step, &pt) in p.iter().enumerate() {
            let brute = common::brute_force_return_probability(&adj, 0, step);
            assert!((pt - brute).abs() < 1e-12, "step {step}");
        }
        done += 1;
    }
}

#[test]
fn mass_is_conserved_to_float_precision() {
    let dist = OffspringDistribution::slack(1.5, 0.5).unwrap();
    let mut rng = ensemble::substream(51, 0);
    let ball = spine::sample_ball(&dist, 65, 1 << 24, &mut rng).unwrap();
    let (_, drift) = walk::return_probabilities_checked(&ball.graph, 128);
    assert!(drift <= 1e-12, "drift = {drift}");
}

#[test]
fn even_return_probabilities_never_increase() {
    for seed in 0..5 {
        let dist = OffspringDistribution::slack(1.5, 0.5).unwrap();
        let mut rng = ensemble::substream(52, seed);
        let ball = spine::sample_ball(&dist, 65, 1 << 24, &mut rng).unwrap();
        let p = walk::ball_return_probabilities(&ball, 32).unwrap();
        assert_eq!(p.len(), 65);
        for k in 1..=32usize {
            assert!(
                p[2 * k] <= p[2 * k - 2] + 1e-15,
                "seed {seed} k {k}: {} > {}",
                p[2 * k],
                p[2 * k - 2]
            );
        }
    }
}

#[test]
fn ball_walk_rejects_too_small_radius() {
    let dist = OffspringDistribution::geometric_half();
    let mut rng = ensemble::substream(53, 0);
    let ball = spine::sample_ball(&dist, 9, 1 << 24, &mut rng).unwrap();
    assert!(walk::ball_return_probabilities(&ball, 4).is_ok());
    match walk::ball_return_probabilities(&ball, 5) {
        Err(Error::RadiusTooSmall { radius, needed }) => {
            assert_eq!(radius, 9);
            assert_eq!(needed, 11);
        }
        other => panic!("expected RadiusTooSmall, got {other:?}"),
    }
}

#[test]
fn chain_escape_time_is_exactly_the_square() {
    let dist = OffspringDistribution::tabulated(&[0.0, 1.0]).unwrap();
    for r in [2u64, 4, 8, 16, 32] {
        let mut rng = ensemble::substream(54, r);
        let ball = spine::sample_ball(&dist, r + 1, 1 << 24, &mut rng).unwrap();
        let t = walk::ball_escape_time(&ball, r).unwrap();
        assert!((t - (r * r) as f64).abs() < 1e-8, "r = {r}: {t}");
    }
}

#[test]
fn escape_solution_satisfies_the_defining_equations() {
    // deg(v)*T(v) - sum of T over neighbors = deg(v) on the interior
    for (seed, law) in [
        OffspringDistribution::slack(1.5, 0.5).unwrap(),
        OffspringDistribution::geometric_half(),
    ]
    .into_iter()
    .enumerate()
    {
        let mut rng = ensemble::substream(55, seed as u64);
        let ball = spine::sample_ball(&law, 18, 1 << 24, &mut rng).unwrap();
        let r = 16;
        let t = walk::escape_profile(&ball.graph, &ball.dist, r).unwrap();
        for v in 0..ball.graph.len() {
            if ball.dist[v] >= r {
                assert_eq!(t[v], 0.0);
                continue;
            }
            let deg = ball.graph.degree(v as u32) as f64;
            let pulled: f64 = ball
                .graph
                .neighbors(v as u32)
                .iter()
                .map(|&u| t[u as usize])
                .sum();
            let residual = deg * t[v] - pulled - deg;
            assert!(residual.abs() < 1e-8 * deg * (1.0 + t[v]), "vertex {v}");
        }
    }
}

#[test]
fn escape_monte_carlo_matches_solver() {
    let dist = OffspringDistribution::tabulated(&[0.5, 0.0, 0.5]).unwrap();
    let mut rng = ensemble::substream(56, 0);
    let ball = spine::sample_ball(&dist, 10, 1 << 24, &mut rng).unwrap();
    let r = 8;
    let exact = walk::ball_escape_time(&ball, r).unwrap();
    let (mean, stderr) = walk::ball_escape_samples(&ball, r, 4000, &mut rng).unwrap();
    assert!(stderr > 0.0);
    assert!(
        (mean - exact).abs() < 4.0 * stderr,
        "exact {exact}, mc {mean} +- {stderr}"
    );
}

#[test]
fn escape_requires_one_extra_shell() {
    let dist = OffspringDistribution::geometric_half();
    let mut rng = ensemble::substream(57, 0);
    let ball = spine::sample_ball(&dist, 8, 1 << 24, &mut rng).unwrap();
    assert!(walk::ball_escape_time(&ball, 7).is_ok());
    assert!(matches!(
        walk::ball_escape_time(&ball, 8),
        Err(Error::RadiusTooSmall { .. })
    ));
}

#[test]
fn trajectory_on_a_double_edge_ball_exits_at_once() {
    let dist = OffspringDistribution::tabulated(&[0.0, 1.0]).unwrap();
    let mut rng = ensemble::substream(58, 0);
    let ball = spine::sample_ball(&dist, 2, 1 << 24, &mut rng).unwrap();
    let t = walk::sample_trajectory(&ball, 100, &mut rng);
    assert_eq!(t.steps, 1);
    assert_eq!(t.exit_times, vec![1]);
    assert_eq!(t.max_distance, 1);
    assert!(t.truncated);
}

#[test]
fn trajectory_exit_times_match_chain_escape_law() {
    // on the doubled half-line the expected escape time from B(r) is r^2
    let dist = OffspringDistribution::tabulated(&[0.0, 1.0]).unwrap();
    let mut rng = ensemble::substream(59, 0);
    let ball = spine::sample_ball(&dist, 8, 1 << 24, &mut rng).unwrap();
    let r = 7usize;
    let mut sum = 0.0f64;
    let mut sumsq = 0.0f64;
    let trials = 3000;
    for _ in 0..trials {
        let t = walk::sample_trajectory(&ball, u64::MAX, &mut rng);
        assert!(t.truncated && t.max_distance == r as u64);
        assert_eq!(t.exit_times.len(), r);
        assert!(t.exit_times.windows(2).all(|w| w[0] < w[1]));
        let tau = t.exit_times[r - 1] as f64;
        sum += tau;
        sumsq += tau * tau;
    }
    let mean = sum / trials as f64;
    let stderr =
        ((sumsq - sum * sum / trials as f64) / (trials as f64 - 1.0) / trials as f64).sqrt();
    let exact = (r * r) as f64;
    assert!(
        (mean - exact).abs() < 4.0 * stderr,
        "mean {mean} vs {exact} (stderr {stderr})"
    );
}

#[test]
fn even_returns_stay_positive_once_an_edge_exists() {
    for (seed, law) in [
        OffspringDistribution::slack(1.5, 0.5).unwrap(),
        OffspringDistribution::geometric_half(),
        OffspringDistribution::tabulated(&[0.0, 1.0]).unwrap(),
    ]
    .into_iter()
    .enumerate()
    {
        let mut rng = ensemble::substream(70, seed as u64);
        let ball = spine::sample_ball(&law, 17, 1 << 24, &mut rng).unwrap();
        let p = walk::ball_return_probabilities(&ball, 8).unwrap();
        for k in 1..=8usize {
            assert!(p[2 * k] > 0.0, "law {seed}, k = {k}");
        }
    }
}
