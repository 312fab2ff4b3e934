//! Plane-tree layer: Lukasiewicz coding, exhaustive round-trips against
//! Catalan counts, record-minima structure, and the two Galton-Watson
//! samplers (free and conditioned-on-size via cyclic rotation).

mod common;

use loopwalk::offspring::OffspringDistribution;
use loopwalk::tree::{self, PlaneTree};
use loopwalk::{ensemble, Error};

#[test]
fn star_encodes_to_hand_value() {
    // root with three leaf children
    let t = PlaneTree::from_outdegrees(vec![3, 0, 0, 0]).unwrap();
    assert_eq!(t.len(), 4);
    assert_eq!(tree::encode_lukasiewicz(&t), vec![2, -1, -1, -1]);
    assert_eq!(tree::max_lukasiewicz(&t), 2);
    assert_eq!(t.height(), 1);
    assert_eq!(t.depths(), vec![0, 1, 1, 1]);
    assert_eq!(t.children(0).collect::<Vec<_>>(), vec![1, 2, 3]);
    assert_eq!(t.parent(0), None);
    assert_eq!(t.parent(3), Some(0));
}

#[test]
fn path_encodes_to_hand_value() {
    let t = PlaneTree::from_outdegrees(vec![1, 1, 0]).unwrap();
    assert_eq!(tree::encode_lukasiewicz(&t), vec![0, 0, -1]);
    assert_eq!(tree::max_lukasiewicz(&t), 0);
    assert_eq!(t.height(), 2);
    assert_eq!(t.depths(), vec![0, 1, 2]);
}

#[test]
fn single_vertex_is_valid() {
    let t = PlaneTree::from_outdegrees(vec![0]).unwrap();
    assert_eq!(t.len(), 1);
    assert_eq!(t.height(), 0);
    assert_eq!(tree::encode_lukasiewicz(&t), vec![-1]);
}

#[test]
fn invalid_excursions_are_rejected_with_position() {
    // hits -1 one step early
    match tree::decode_lukasiewicz(&[-1, -1]) {
        Err(Error::InvalidExcursion { index, .. }) => assert_eq!(index, 0),
        other => panic!("expected InvalidExcursion, got {other:?}"),
    }
    // never comes back to -1
    assert!(tree::decode_lukasiewicz(&[0, 0, 0]).is_err());
    // outdegree sums leave the walk above -1 at the end
    assert!(PlaneTree::from_outdegrees(vec![2, 0, 0, 0]).is_err());
    // dries up before listing every vertex
    assert!(PlaneTree::from_outdegrees(vec![1, 0, 1, 0]).is_err());
    assert!(PlaneTree::from_outdegrees(vec![]).is_err());
}

#[test]
fn exhaustive_round_trip_matches_catalan_counts() {
    for n in 1..=8 {
        let seqs = common::enumerate_outdegrees(n);
        assert_eq!(seqs.len() as u64, common::catalan(n - 1), "n = {n}");
        for s in seqs {
            let t = PlaneTree::from_outdegrees(s.clone()).unwrap();
            assert_eq!(t.out(), s.as_slice());
            let steps = tree::encode_lukasiewicz(&t);
            let back = tree::decode_lukasiewicz(&steps).unwrap();
            assert_eq!(back.out(), s.as_slice());
            // parents precede children in depth-first order
            for v in 1..t.len() as u32 {
                assert!(t.parent(v).unwrap() < v);
            }
        }
    }
}

#[test]
fn record_minima_mark_exactly_the_root_children() {
    for n in 1..=8 {
        for s in common::enumerate_outdegrees(n) {
            let t = PlaneTree::from_outdegrees(s).unwrap();
            let steps = tree::encode_lukasiewicz(&t);
            // strict new minima of the partial sums W_1..W_{N-1}, as
            // depth-first positions (the walk index j corresponds to the
            // vertex listed at position j)
            let mut records = Vec::new();
            let mut w = 0i64;
            let mut best = i64::MAX;
            for (j, &x) in steps.iter().enumerate().take(t.len() - 1) {
                w += x;
                if w < best {
                    best = w;
                    records.push(j as u32 + 1);
                }
            }
            let root_children: Vec<u32> = t.children(0).collect();
            assert_eq!(records, root_children);
        }
    }
}

#[test]
fn depths_agree_with_breadth_first_search() {
    let dist = OffspringDistribution::geometric_half();
    let mut rng = ensemble::substream(11, 0);
    for _ in 0..200 {
        let t = tree::sample_gw(&dist, 100_000, &mut rng).unwrap();
        let mut adj = vec![Vec::new(); t.len()];
        for v in 1..t.len() as u32 {
            let p = t.parent(v).unwrap();
            adj[p as usize].push(v);
            adj[v as usize].push(p);
        }
        let bfs = common::bfs_distances(&adj, 0);
        assert_eq!(t.depths(), bfs);
        assert_eq!(t.height() as u32, *bfs.iter().max().unwrap());
    }
}

#[test]
fn free_sampler_singleton_rate_matches_leaf_probability() {
    // P(|tree| = 1) = P(root has no children) = pi_0
    let dist = OffspringDistribution::slack(1.5, 0.5).unwrap();
    let mut rng = ensemble::substream(12, 0);
    let n = 100_000;
    let mut singles = 0u32;
    for _ in 0..n {
        // heavy tail: a rare huge tree hits the cap; retry is fine for a
        // frequency count of the singleton event
        loop {
            match tree::sample_gw(&dist, 1_000_000, &mut rng) {
                Ok(t) => {
                    if t.len() == 1 {
                        singles += 1;
                    }
                    break;
                }
                Err(Error::CapExceeded { .. }) => continue,
                Err(e) => panic!("{e}"),
            }
        }
    }
    let p = f64::from(singles) / f64::from(n);
    let sigma = (0.5 * 0.5 / f64::from(n)).sqrt();
    assert!((p - 0.5).abs() < 4.0 * sigma, "p = {p}");
}

#[test]
fn free_sampler_respects_cap() {
    // deterministic chain law never terminates; the cap must trip
    let dist = OffspringDistribution::tabulated(&[0.0, 1.0]).unwrap();
    let mut rng = ensemble::substream(13, 0);
    match tree::sample_gw(&dist, 1000, &mut rng) {
        Err(Error::CapExceeded { cap }) => assert_eq!(cap, 1000),
        other => panic!("expected CapExceeded, got {other:?}"),
    }
}

#[test]
fn conditioned_sampler_has_exact_size_and_uniform_shapes() {
    let dist = OffspringDistribution::geometric_half();
    let mut rng = ensemble::substream(14, 0);
    // the two shapes on 3 vertices (path, cherry) are equally likely under
    // the geometric law: both outdegree multisets {1,1,0} and {2,0,0} have
    // probability (1/4)(1/4)(1/2) and (1/8)(1/2)(1/2)
    let n = 40_000;
    let mut cherries = 0u32;
    for _ in 0..n {
        let t = tree::sample_gw_conditioned(&dist, 3, 100_000, &mut rng).unwrap();
        assert_eq!(t.len(), 3);
        if t.out()[0] == 2 {
            cherries += 1;
        }
    }
    let p = f64::from(cherries) / f64::from(n);
    let sigma = (0.5 * 0.5 / f64::from(n)).sqrt();
    assert!((p - 0.5).abs() < 4.0 * sigma, "p = {p}");
}

#[test]
fn conditioned_sampler_covers_all_shapes_uniformly_for_binary_law() {
    // full binary law {0, 2}: trees on 5 vertices are the two binary shapes;
    // both get probability proportional to the same product of weights
    let dist = OffspringDistribution::tabulated(&[0.5, 0.0, 0.5]).unwrap();
    let mut rng = ensemble::substream(15, 0);
    let mut seen = std::collections::HashSet::new();
    for _ in 0..200 {
        let t = tree::sample_gw_conditioned(&dist, 5, 100_000, &mut rng).unwrap();
        assert_eq!(t.len(), 5);
        assert!(t.out().iter().all(|&k| k == 0 || k == 2));
        seen.insert(t.out().to_vec());
    }
    // Catalan(2) = 2 binary shapes on 5 vertices... with plane order there
    // are 2 choose... enumerate: the binary plane trees on 5 vertices
    let expected: usize = common::enumerate_outdegrees(5)
        .into_iter()
        .filter(|s| s.iter().all(|&k| k == 0 || k == 2))
        .count();
    assert_eq!(seen.len(), expected);
}

#[test]
fn conditioned_sampler_rejects_impossible_sizes() {
    // binary law: trees have odd size only
    let dist = OffspringDistribution::tabulated(&[0.5, 0.0, 0.5]).unwrap();
    let mut rng = ensemble::substream(16, 0);
    match tree::sample_gw_conditioned(&dist, 4, 100_000, &mut rng) {
        Err(Error::ImpossibleSize { size }) => assert_eq!(size, 4),
        other => panic!("expected ImpossibleSize, got {other:?}"),
    }
    assert!(tree::sample_gw_conditioned(&dist, 0, 100_000, &mut rng).is_err());
    // no leaves: no finite tree at all beyond... chain law has pi_0 = 0
    let chain = OffspringDistribution::tabulated(&[0.0, 1.0]).unwrap();
    assert!(tree::sample_gw_conditioned(&chain, 3, 100_000, &mut rng).is_err());
    // size 1 needs a positive leaf probability
    assert!(tree::sample_gw_conditioned(&chain, 1, 100_000, &mut rng).is_err());
    let geo = OffspringDistribution::geometric_half();
    assert_eq!(
        tree::sample_gw_conditioned(&geo, 1, 100_000, &mut rng)
            .unwrap()
            .len(),
        1
    );
}

#[test]
fn conditioned_sampler_reports_exhausted_attempts() {
    let dist = OffspringDistribution::geometric_half();
    let mut rng = ensemble::substream(17, 0);
    // zero attempts always exhausts
    match tree::sample_gw_conditioned(&dist, 3, 0, &mut rng) {
        Err(Error::AttemptsExhausted { attempts, .. }) => assert_eq!(attempts, 0),
        other => panic!("expected AttemptsExhausted, got {other:?}"),
    }
}

#[test]
fn conditioned_sampler_is_deterministic_per_substream() {
    let dist = OffspringDistribution::slack(1.5, 0.5).unwrap();
    let a = tree::sample_gw_conditioned(&dist, 64, 100_000, &mut ensemble::substream(9, 2))
        .unwrap();
    let b = tree::sample_gw_conditioned(&dist, 64, 100_000, &mut ensemble::substream(9, 2))
        .unwrap();
    assert_eq!(a.out(), b.out());
}
