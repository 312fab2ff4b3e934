//! In-process self checks behind `loopwalk verify`. Each check prints one
//! line; any failure makes the command exit nonzero. `--quick` shrinks the
//! sample counts to run in a few seconds.

use loopwalk::estimate::{self, Window};
use loopwalk::offspring::OffspringDistribution;
use loopwalk::{ensemble, gf, looptree, spine, tree, walk};

struct Suite {
    failures: u32,
}

impl Suite {
    fn check(&mut self, name: &str, outcome: Result<String, String>) {
        match outcome {
            Ok(detail) => println!("ok {name} ({detail})"),
            Err(detail) => {
                self.failures += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
}

pub fn run(quick: bool) -> anyhow::Result<()> {
    let mut s = Suite { failures: 0 };
    let slack = OffspringDistribution::slack(1.5, 0.5).expect("preset");
    let geo = OffspringDistribution::geometric_half();
    let chain = OffspringDistribution::tabulated(&[0.0, 1.0]).expect("preset");

    s.check("lukasiewicz-roundtrip", lukasiewicz_roundtrip(if quick { 7 } else { 8 }));
    s.check(
        "loop-distance-oracle",
        loop_distance_oracle(&geo, if quick { 300 } else { 10_000 }),
    );
    s.check("progeny-fixed-point", progeny_fixed_point(&slack, &geo));
    s.check(
        "gf-volume-ratio",
        gf_volume_ratio(&slack, &geo, if quick { 1 << 10 } else { 1 << 14 }),
    );
    s.check("kernel-mass", kernel_mass(&slack));
    s.check("chain-controls", chain_controls(&chain, if quick { 128 } else { 512 }));
    s.check(
        "height-inequality",
        height_inequality(&[&slack, &geo], if quick { 10_000 } else { 100_000 }),
    );
    s.check(
        "chain-volume-bound",
        chain_volume_bound(&[&slack, &geo], if quick { 10_000 } else { 100_000 }),
    );
    s.check("ensemble-determinism", ensemble_determinism(&slack));

    if s.failures > 0 {
        anyhow::bail!("{} check(s) failed", s.failures);
    }
    println!("all checks passed");
    Ok(())
}

/// Every plane tree on up to `max` vertices survives the encode/decode
/// round trip, and every decoded walk re-encodes to the same steps.
fn lukasiewicz_roundtrip(max: usize) -> Result<String, String> {
    fn gen(out: &mut Vec<u32>, pending: usize, max: usize, count: &mut u64) -> Result<(), String> {
        if pending == 0 {
            *count += 1;
            let t = tree::PlaneTree::from_outdegrees(out.clone())
                .map_err(|e| format!("valid sequence rejected: {e}"))?;
            let steps = tree::encode_lukasiewicz(&t);
            let back = tree::decode_lukasiewicz(&steps)
                .map_err(|e| format!("decode failed: {e}"))?;
            if back.out() != t.out() {
                return Err(format!("round trip changed {:?}", t.out()));
            }
            return Ok(());
        }
        let room = max - out.len();
        if room < pending {
            return Ok(());
        }
        for k in 0..=(room - pending) {
            out.push(k as u32);
            gen(out, pending - 1 + k, max, count)?;
            out.pop();
        }
        Ok(())
    }
    let mut count = 0u64;
    for n in 1..=max {
        let mut out = Vec::with_capacity(n);
        gen(&mut out, 1, n, &mut count)?;
    }
    Ok(format!("{count} trees up to {max} vertices"))
}

/// Loop transform distances match the direct traversal formula on
/// conditioned trees of assorted sizes.
fn loop_distance_oracle(dist: &OffspringDistribution, trees: usize) -> Result<String, String> {
    for i in 0..trees {
        let mut rng = ensemble::substream(11, i as u64);
        let size = 2 + (i % 60);
        let t = tree::sample_gw_conditioned(dist, size, 1 << 24, &mut rng)
            .map_err(|e| format!("sampling size {size}: {e}"))?;
        let g = looptree::loop_transform(&t);
        if g.distances() != looptree::loop_distances(&t) {
            return Err(format!("mismatch on tree {i} (size {size})"));
        }
    }
    Ok(format!("{trees} trees"))
}

/// g(s) = s f(g(s)) and the geometric closed form g(3/4) = 1/2.
fn progeny_fixed_point(
    slack: &OffspringDistribution,
    geo: &OffspringDistribution,
) -> Result<String, String> {
    let g = gf::progeny_pgf(geo, 0.75).map_err(|e| e.to_string())?;
    if (g - 0.5).abs() > 1e-10 {
        return Err(format!("geometric g(3/4) = {g}, want 0.5"));
    }
    for dist in [slack, geo] {
        for s in [0.25, 0.5, 0.9, 0.99] {
            let v = gf::progeny_pgf(dist, s).map_err(|e| e.to_string())?;
            let fixed = s * dist.pgf(v);
            if (v - fixed).abs() > 1e-10 {
                return Err(format!("fixed point off by {} at s={s}", (v - fixed).abs()));
            }
        }
    }
    Ok("geometric closed form and fixed-point identity".into())
}

/// The volume DP ratio E(X^(n)) n / a_n approaches the predicted constant.
fn gf_volume_ratio(
    slack: &OffspringDistribution,
    geo: &OffspringDistribution,
    n: usize,
) -> Result<String, String> {
    let mut details = Vec::new();
    for (name, dist) in [("slack", slack), ("geometric", geo)] {
        let exn = gf::expected_outgrowth_volume(dist, n);
        let m = gf::m_constant(dist);
        let ratio = exn.value(n) * n as f64 / dist.scaling().a(n as f64);
        if (ratio / m - 1.0).abs() > 0.10 {
            return Err(format!("{name}: ratio {ratio:.4} vs M {m:.4} at n={n}"));
        }
        details.push(format!("{name} {:.3}", ratio / m));
    }
    Ok(format!("ratio/M at n={n}: {}", details.join(", ")))
}

/// The evolved kernel conserves mass to 1e-12 and p_2k never increases.
fn kernel_mass(dist: &OffspringDistribution) -> Result<String, String> {
    let mut rng = ensemble::substream(7, 0);
    let ball = spine::sample_ball(dist, 65, 1 << 24, &mut rng).map_err(|e| e.to_string())?;
    let (_, err) = walk::return_probabilities_checked(&ball.graph, 64);
    if err > 1e-12 {
        return Err(format!("mass drift {err:.2e}"));
    }
    let p = walk::ball_return_probabilities(&ball, 32).map_err(|e| e.to_string())?;
    for n in 1..32usize {
        if p[2 * n + 2] > p[2 * n] {
            return Err(format!("p_2k increased at k={}", n + 1));
        }
    }
    Ok(format!("drift {err:.1e}, p_2k monotone to k=32"))
}

/// On the half-line: d_s fits to 1, T_R = R^2 and R_eff = n/2 exactly.
fn chain_controls(chain: &OffspringDistribution, n_max: u64) -> Result<String, String> {
    let est = estimate::estimate_ds_quenched(chain, 1, n_max, Window::UpperHalf)
        .map_err(|e| e.to_string())?;
    if (est.ds - 1.0).abs() > 0.05 {
        return Err(format!("chain d_s {} at n_max {n_max}", est.ds));
    }
    let mut rng = ensemble::substream(1, 0);
    let ball = spine::sample_ball(chain, 66, 1 << 24, &mut rng).map_err(|e| e.to_string())?;
    for r in [4u64, 16, 64] {
        let t = walk::ball_escape_time(&ball, r).map_err(|e| e.to_string())?;
        if ((t - (r * r) as f64) / (r * r) as f64).abs() > 1e-9 {
            return Err(format!("chain T_{r} = {t}, want {}", r * r));
        }
    }
    for n in [4u64, 64] {
        let reff = loopwalk::resistance::ball_effective_resistance(&ball, n)
            .map_err(|e| e.to_string())?;
        if (reff - n as f64 / 2.0).abs() > 1e-9 {
            return Err(format!("chain R_eff({n}) = {reff}, want {}", n as f64 / 2.0));
        }
    }
    Ok(format!("d_s {:.3}, T_R and R_eff exact", est.ds))
}

/// height(t) <= height(Loop(t)) <= height(t) + max of the Lukasiewicz walk,
/// on unconditioned trees.
fn height_inequality(dists: &[&OffspringDistribution], trees: usize) -> Result<String, String> {
    let mut seen = 0u64;
    for (d, dist) in dists.iter().enumerate() {
        for i in 0..trees {
            let mut rng = ensemble::substream(13 + d as u64, i as u64);
            let t = match tree::sample_gw(dist, 100_000, &mut rng) {
                Ok(t) => t,
                Err(_) => continue, // cap hit: skip the rare huge tree
            };
            let lh = looptree::loop_transform(&t).height();
            let ht = t.height();
            let bound = ht + tree::max_lukasiewicz(&t).max(0) as u64;
            if lh < ht || lh > bound {
                return Err(format!("tree {i} of law {d}: {lh} outside [{ht}, {bound}]"));
            }
            seen += 1;
        }
    }
    Ok(format!("{seen} trees, zero violations"))
}

/// Monte Carlo spine volume stays below the 16n+1 bound (99% upper CI).
fn chain_volume_bound(dists: &[&OffspringDistribution], reps: usize) -> Result<String, String> {
    let mut worst = f64::NEG_INFINITY;
    for (d, dist) in dists.iter().enumerate() {
        for n in [4u64, 16, 64] {
            let vols: Vec<f64> = ensemble::pmap(17 + d as u64, reps, |_, rng| {
                let c = spine::sample_chain(dist, n + 1, rng);
                spine::chain_volume(&c, n) as f64
            });
            let mean = vols.iter().sum::<f64>() / reps as f64;
            let var = vols.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (reps as f64 - 1.0);
            let upper = mean + 2.576 * (var / reps as f64).sqrt();
            let bound = (16 * n + 1) as f64;
            if upper > bound {
                return Err(format!("law {d}, n={n}: 99% CI {upper:.1} above {bound}"));
            }
            worst = worst.max(upper / bound);
        }
    }
    Ok(format!("{reps} realizations, worst CI/bound {worst:.3}"))
}

/// Parallel and sequential fan-out produce identical realizations.
fn ensemble_determinism(dist: &OffspringDistribution) -> Result<String, String> {
    let par: Vec<u64> = ensemble::pmap(23, 64, |_, rng| {
        spine::chain_volume(&spine::sample_chain(dist, 33, rng), 32)
    });
    let seq: Vec<u64> = ensemble::pmap_seq(23, 64, |_, rng| {
        spine::chain_volume(&spine::sample_chain(dist, 33, rng), 32)
    });
    if par != seq {
        return Err("parallel and sequential runs differ".into());
    }
    Ok("64 realizations, identical outputs".into())
}
