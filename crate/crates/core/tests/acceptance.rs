//! Acceptance criteria, one PASS/FAIL line each. Every checked value is
//! recomputed here by an oracle that does not go through the code under
//! test (hand-written best responses, brute-force vertex search, grids).

use std::time::Instant;

use incent::bandits::{cover_embeddings, embed_menu, ArmEmbedding};
use incent::general::{
    build_general_menu, enumerate_profiles, polytope_vertices, ResponsePolytope, DEFAULT_VERTEX_ARM_CAP,
};
use incent::harness::{bench, run_scenario, InstanceSource, MenuKind, MenuSpec, PolicySpec, Scenario};
use incent::instances::{
    example_3_2, hard_b1, hard_b1_relaxed, random_greedy_instance, smooth_hard_suite, ArrivalSpec,
};
use incent::single_arm::{build_raw_menu, build_single_arm_menu, perturbation_size};
use incent::smooth::{audit_passes, build_single_arm_grid, gaussian_probabilities_from_scores, lipschitz_audit};
use incent::{GreedyInstance, IncentiveMode, IncentiveVector, InstanceDocument, Menu, MenuItem, Provenance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------- oracles ----------

/// Greedy best response: argmax of `mu + pi` within 1e-12, ties to the
/// highest `tie_priority` rank.
fn oracle_arm(g: &GreedyInstance, j: usize, pi: &[f64]) -> usize {
    let mu = &g.preferences()[j];
    let ranks = &g.tie_priority()[j];
    let scores: Vec<f64> = mu.iter().zip(pi).map(|(m, p)| m + p).collect();
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..scores.len())
        .filter(|&a| scores[a] >= top - 1e-12)
        .max_by_key(|&a| ranks[a])
        .unwrap()
}

fn oracle_u(g: &GreedyInstance, j: usize, pi: &[f64]) -> f64 {
    let a = oracle_arm(g, j, pi);
    g.rewards()[a] - pi[a]
}

fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

fn fit(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome, f64);

// ---------- criteria ----------

fn c1_reduction_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut entries, mut bad) = (0usize, 0usize);
    for _ in 0..100 {
        let n = rng.random_range(2..=6);
        let k = rng.random_range(1..=4);
        let g = random_greedy_instance(n, k, Some(0.05), &mut rng).unwrap();
        let mut menus = vec![build_single_arm_menu(&g, 1000).unwrap()];
        if n <= 3 {
            menus.push(build_general_menu(&g, 1000, 1_000_000, DEFAULT_VERTEX_ARM_CAP).unwrap());
        }
        for menu in menus {
            let emb = embed_menu(&g, &menu).unwrap();
            for (m, pi) in menu.incentives().enumerate() {
                for j in 0..k {
                    // <z^pi, e_j> is the j-th coordinate of the row
                    entries += 1;
                    if emb.row(m)[j] != oracle_u(&g, j, pi.values()) {
                        bad += 1;
                    }
                }
            }
        }
    }
    (bad == 0, format!("{entries} (item, agent) entries, {bad} differ"))
}

fn c2_menu_dominance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let horizon = 1000;
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..20 {
        let n = rng.random_range(2..=5);
        let k = rng.random_range(1..=4);
        let g = random_greedy_instance(n, k, None, &mut rng).unwrap();
        let menu = build_single_arm_menu(&g, horizon).unwrap();
        let tol = 2.0 * perturbation_size(n, &build_raw_menu(&g), horizon).unwrap() + 1e-9;
        let rows: Vec<Vec<f64>> = menu
            .incentives()
            .map(|pi| (0..k).map(|j| oracle_u(&g, j, pi.values())).collect())
            .collect();
        for arm in 0..n {
            for s in 0..=1000 {
                let mut pi = vec![0.0; n];
                pi[arm] = s as f64 / 1000.0;
                let u: Vec<f64> = (0..k).map(|j| oracle_u(&g, j, &pi)).collect();
                let shortfall = rows
                    .iter()
                    .map(|r| r.iter().zip(&u).map(|(m, x)| x - m).fold(f64::NEG_INFINITY, f64::max))
                    .fold(f64::INFINITY, f64::min);
                worst_excess = worst_excess.max(shortfall - tol);
            }
        }
    }
    (
        worst_excess <= 0.0,
        format!("worst per-agent shortfall minus (2 eps_T + 1e-9): {worst_excess:.3e}"),
    )
}

fn c3_example32() -> Outcome {
    let delta = 0.705;
    let (g, _) = example_3_2(delta).unwrap();
    let p = [0.4, 0.6];
    let lib = |x: f64| {
        g.expected_greedy_utility(&IncentiveVector::single(3, 0, x).unwrap(), &p)
            .unwrap()
    };
    let orc = |x: f64| p[0] * oracle_u(&g, 0, &[x, 0.0, 0.0]) + p[1] * oracle_u(&g, 1, &[x, 0.0, 0.0]);
    let at = lib(delta);
    let mut ok = (at - (0.6 * 0.5 + 0.4 * (1.0 - delta))).abs() < 1e-12 && at >= 0.416 && at == orc(delta);
    for x in [0.0, 0.3, 0.7, delta - 1e-3] {
        ok &= lib(x) == 0.3 && orc(x) == 0.3;
    }
    for x in [delta + 1e-3, 0.75, 0.9, 1.0] {
        ok &= lib(x) <= 1.0 - delta && (lib(x) - orc(x)).abs() < 1e-15;
    }
    // Monte-Carlo through the harness
    let doc = InstanceDocument::from_greedy(&g, IncentiveMode::Single).with_arrival(incent::instances::ArrivalDoc {
        spec: ArrivalSpec::Iid {
            probabilities: p.to_vec(),
        },
        seed: None,
    });
    let mut sc = Scenario::from_document(&doc, &MenuSpec::default(), 100_000).unwrap();
    sc.menu = Menu::from_distinct(vec![MenuItem {
        incentive: IncentiveVector::single(3, 0, delta).unwrap(),
        provenance: Provenance::Manual,
    }]);
    let rec = run_scenario(&sc, &PolicySpec::Fixed { index: 0 }, 7, true).unwrap();
    let mc = rec.rounds.iter().map(|r| r.utility).sum::<f64>() / 1e5;
    ok &= (mc - at).abs() <= 0.005;
    (
        ok,
        format!(
            "U(Delta,0,0) = {at:.6}, under = 0.3, over <= {:.3}, Monte-Carlo {mc:.4}",
            1.0 - delta
        ),
    )
}

fn c4_hard_b1() -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for k in [3usize, 5, 10] {
        let horizon = 5000;
        let h = hard_b1(k, 3, horizon).unwrap();
        let table: Vec<Vec<f64>> = h
            .menu
            .incentives()
            .map(|pi| (0..k).map(|j| oracle_u(&h.instance, j, pi.values())).collect())
            .collect();
        let value = |p: &[f64]| -> Vec<f64> {
            table
                .iter()
                .map(|r| r.iter().zip(p).map(|(u, q)| u * q).sum())
                .collect()
        };
        let r = value(&h.base);
        let analytic = h.analytic_rewards(&h.base);
        worst = worst.max((r[0] - (1.0 / 3.0 + h.eps / 6.0)).abs());
        for i in 0..r.len() {
            worst = worst.max((r[i] - analytic[i]).abs());
            if i > 0 {
                worst = worst.max((r[i] - 1.0 / 3.0).abs());
            }
        }
        let mut dists = vec![h.base.clone()];
        for z in 2..k {
            let pz = h.perturbed_for(z).unwrap();
            let rz = value(pz);
            worst_z = worst_z.max((rz[z - 1] - (r[z - 1] + 2.0 * h.gap)).abs());
            dists.push(pz.to_vec());
        }
        // Monte-Carlo: 10^6 arrivals per distribution
        for p in &dists {
            let exact = value(p);
            let cdf: Vec<f64> = p
                .iter()
                .scan(0.0, |s, x| {
                    *s += x;
                    Some(*s)
                })
                .collect();
            let draws = 1_000_000;
            let mut sum = vec![0.0; table.len()];
            let mut sq = vec![0.0; table.len()];
            for _ in 0..draws {
                let u: f64 = rng.random();
                let j = cdf.iter().position(|c| u < *c).unwrap_or(k - 1);
                for (m, row) in table.iter().enumerate() {
                    sum[m] += row[j];
                    sq[m] += row[j] * row[j];
                }
            }
            for m in 0..table.len() {
                let mean = sum[m] / draws as f64;
                let var = sq[m] / draws as f64 - mean * mean;
                let se = (var.max(0.0) / draws as f64).sqrt();
                ok &= (mean - exact[m]).abs() <= 3.0 * se.max(1e-12);
            }
        }
    }
    ok &= worst <= 1e-12 && worst_z <= 1e-12;
    (
        ok,
        format!("max |r - analytic| {worst:.2e}, max |r'_z - r_z - 2 Delta| {worst_z:.2e}, Monte-Carlo within 3 SE"),
    )
}

fn c5_regret_greedy() -> Outcome {
    let horizons: Vec<u64> = (10..=16).map(|e| 1u64 << e).collect();
    let seeds: Vec<u64> = (0..20).collect();
    // hard_b1's strict horizon condition excludes K = 10 below T = 2048
    assert!(hard_b1(10, 3, 1024).is_err() && hard_b1_relaxed(10, 3, 1024).is_ok());
    let src = InstanceSource::HardB1 {
        k: 10,
        n: 3,
        relaxed: true,
    };
    let s = bench(
        &src,
        &MenuSpec::default(),
        &PolicySpec::parse_name("exp3linear").unwrap(),
        &horizons,
        &seeds,
    )
    .unwrap();
    let xs: Vec<f64> = s.rows.iter().map(|r| r.t as f64).collect();
    let ys: Vec<f64> = s.rows.iter().map(|r| r.regret_mean).collect();
    let slope = fit(&xs, &ys);
    let last = *ys.last().unwrap();
    let cap = 0.05 * 65536.0;
    (
        (0.4..=0.65).contains(&slope) && last <= cap,
        format!("slope {slope:.3} (target [0.4, 0.65]), regret at 2^16 = {last:.1} (<= {cap:.0})"),
    )
}

fn c6_linear_regret() -> Outcome {
    let (g, arr) = example_3_2(0.7005).unwrap();
    let doc = InstanceDocument::from_greedy(&g, IncentiveMode::Single)
        .with_arrival(incent::instances::ArrivalDoc { spec: arr, seed: None });
    let menu = MenuSpec {
        kind: MenuKind::Grid,
        eps: Some(0.01),
        cap: None,
    };
    let horizon = 100_000;
    let sc = Scenario::from_document(&doc, &menu, horizon).unwrap();
    let seeds: Vec<u64> = (0..20).collect();
    let recs = incent::harness::run_seeds(&sc, &PolicySpec::Tsallis, &seeds, false).unwrap();
    let mean = recs.iter().map(|r| r.final_regret()).sum::<f64>() / recs.len() as f64;
    // oracle: best grid payment vs best payment overall, by hand
    let best_grid = (0..=100)
        .map(|s| s as f64 / 100.0)
        .map(|x| 0.4 * oracle_u(&g, 0, &[x, 0.0, 0.0]) + 0.6 * oracle_u(&g, 1, &[x, 0.0, 0.0]))
        .fold(f64::NEG_INFINITY, f64::max);
    let best = 0.4 * oracle_u(&g, 0, &[0.7005, 0.0, 0.0]) + 0.6 * oracle_u(&g, 1, &[0.7005, 0.0, 0.0]);
    let frac = mean / horizon as f64;
    (
        frac >= 0.05,
        format!(
            "mean regret {:.0} = {frac:.3} T (>= 0.05 T); best grid item {best_grid:.4}/round vs {best:.4}/round",
            mean
        ),
    )
}

fn c7_smooth_structure() -> Outcome {
    let (n, l, horizon) = (4usize, 8.0, 100_000u64);
    let suite = smooth_hard_suite(n, l, horizon).unwrap();
    let eps = suite.eps;
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut audits_ok = true;
    let mut max_ratio: f64 = 0.0;
    let mut peak_ok = true;
    let mut min_gap = f64::INFINITY;
    let grid_step = eps / 20.0;
    let steps = (1.0 / grid_step).floor() as usize;
    for m in &suite.members {
        let ratio = lipschitz_audit(&m.model, 10_000, &mut rng).unwrap();
        max_ratio = max_ratio.max(ratio);
        audits_ok &= audit_passes(&m.model, ratio);
        // grid search of the expected utility; rewards are 1 except on the last arm
        let inst = m.instance().unwrap();
        let mut best = (f64::NEG_INFINITY, 0usize, 0.0);
        for arm in 0..n {
            for s in 0..=steps {
                let mut pi = vec![0.0; n];
                pi[arm] = (s as f64 * grid_step).min(1.0);
                let u = inst.expected_utility(&pi, 0).unwrap();
                if u > best.0 {
                    best = (u, arm, pi[arm]);
                }
            }
        }
        let p = &m.params;
        let centre = p.interval as f64 * eps + eps / 2.0;
        peak_ok &= best.1 == p.arm && (best.2 - centre).abs() <= eps;
        // flat level by hand: every non-last arm chosen w.p. 1/(16N(1 - x)), paying x on one of them
        let flat = (n - 1) as f64 / (16.0 * n as f64);
        min_gap = min_gap.min(best.0 - flat - (l - 1.0) * eps / 16.0);
    }
    (
        audits_ok && peak_ok && min_gap >= -1e-12,
        format!(
            "{} members: max audit ratio {max_ratio:.3} (L = {l}), peaks on the designated arm near j eps + eps/2: {peak_ok}, min (gap - (L-1) eps/16) {min_gap:.3e}",
            suite.members.len()
        ),
    )
}

fn c8_regret_smooth() -> Outcome {
    let horizons: Vec<u64> = (12..=17).map(|e| 1u64 << e).collect();
    let seeds: Vec<u64> = (0..20).collect();
    let src = InstanceSource::SmoothHard {
        n: 4,
        lipschitz: 8.0,
        arm: 0,
        position: 0.5,
    };
    let s = bench(&src, &MenuSpec::default(), &PolicySpec::Tsallis, &horizons, &seeds).unwrap();
    let xs: Vec<f64> = s.rows.iter().map(|r| r.t as f64).collect();
    let ys: Vec<f64> = s.rows.iter().map(|r| r.regret_mean).collect();
    let slope = fit(&xs, &ys);
    (
        (0.55..=0.8).contains(&slope),
        format!(
            "slope {slope:.3} (target [0.55, 0.8]), regret at 2^17 = {:.0}",
            ys.last().unwrap()
        ),
    )
}

fn line_point(a: (&[f64], f64), b: (&[f64], f64)) -> Option<[f64; 2]> {
    let det = a.0[0] * b.0[1] - a.0[1] * b.0[0];
    if det.abs() < 1e-12 {
        return None;
    }
    Some([(a.1 * b.0[1] - b.1 * a.0[1]) / det, (a.0[0] * b.1 - b.0[0] * a.1) / det])
}

fn c9_general_geometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut vert_ok = true;
    let mut polytopes = 0;
    let mut worst_gap = f64::NEG_INFINITY;
    let mut sequences = 0;
    for inst_no in 0..10 {
        let g = random_greedy_instance(2, 2, None, &mut rng).unwrap();
        for profile in enumerate_profiles(&g, 1_000).unwrap() {
            let poly = ResponsePolytope::new(&g, profile.clone()).unwrap();
            let lib = polytope_vertices(&poly, DEFAULT_VERTEX_ARM_CAP).unwrap();
            // constraints from the instance directly: box, and sigma_j preferred by j
            let mut cons: Vec<(Vec<f64>, f64)> = vec![
                (vec![-1.0, 0.0], 0.0),
                (vec![1.0, 0.0], 1.0),
                (vec![0.0, -1.0], 0.0),
                (vec![0.0, 1.0], 1.0),
            ];
            for (j, &s) in profile.0.iter().enumerate() {
                let o = 1 - s;
                let mu = &g.preferences()[j];
                let mut a = vec![0.0; 2];
                a[o] = 1.0;
                a[s] = -1.0;
                cons.push((a, mu[s] - mu[o]));
            }
            let feasible = |x: &[f64; 2]| cons.iter().all(|(a, b)| a[0] * x[0] + a[1] * x[1] <= b + 1e-9);
            let mut brute: Vec<[f64; 2]> = Vec::new();
            for i in 0..cons.len() {
                for j in i + 1..cons.len() {
                    if let Some(x) = line_point((&cons[i].0, cons[i].1), (&cons[j].0, cons[j].1)) {
                        if feasible(&x)
                            && !brute
                                .iter()
                                .any(|y| (y[0] - x[0]).abs().max((y[1] - x[1]).abs()) <= 1e-7)
                        {
                            brute.push(x);
                        }
                    }
                }
            }
            polytopes += 1;
            vert_ok &= brute.len() == lib.len()
                && brute
                    .iter()
                    .all(|x| lib.iter().any(|y| (y[0] - x[0]).abs().max((y[1] - x[1]).abs()) <= 1e-7));
        }
        if inst_no < 5 {
            let horizon = 200;
            let menu = build_general_menu(&g, horizon, 1_000, DEFAULT_VERTEX_ARM_CAP).unwrap();
            let menu_rows: Vec<[f64; 2]> = menu
                .incentives()
                .map(|pi| [oracle_u(&g, 0, pi.values()), oracle_u(&g, 1, pi.values())])
                .collect();
            let grid_rows: Vec<[f64; 2]> = (0..=1000)
                .flat_map(|a| (0..=1000).map(move |b| [a as f64 / 1000.0, b as f64 / 1000.0]))
                .map(|pi| [oracle_u(&g, 0, &pi), oracle_u(&g, 1, &pi)])
                .collect();
            for _ in 0..10 {
                let p: f64 = rng.random();
                let c0 = (0..horizon).filter(|_| rng.random::<f64>() < p).count() as f64;
                let c1 = horizon as f64 - c0;
                let val = |r: &[f64; 2]| c0 * r[0] + c1 * r[1];
                let menu_best = menu_rows.iter().map(val).fold(f64::NEG_INFINITY, f64::max);
                let grid_best = grid_rows.iter().map(val).fold(f64::NEG_INFINITY, f64::max);
                // the grid supremum is a lower bound on the true supremum
                worst_gap = worst_gap.max(grid_best - menu_best);
                sequences += 1;
            }
        }
    }
    (
        vert_ok && worst_gap <= 2.0,
        format!(
            "{polytopes} polytopes match the pair oracle: {vert_ok}; {sequences} sequences, max (grid sup - menu value) {worst_gap:.4} (<= 2)"
        ),
    )
}

fn c10_covering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut ok = true;
    let mut cases = 0;
    for _ in 0..60 {
        let horizon = [10u64, 100, 1000][rng.random_range(0..3)];
        let tol = 1.0 / horizon as f64;
        let emb = if rng.random::<bool>() {
            let g = random_greedy_instance(rng.random_range(2..=5), rng.random_range(1..=4), None, &mut rng).unwrap();
            embed_menu(&g, &build_single_arm_menu(&g, horizon).unwrap()).unwrap()
        } else {
            let m = rng.random_range(1..60);
            let d = rng.random_range(1..4);
            let rows = (0..m)
                .map(|_| (0..d).map(|_| (rng.random::<f64>() * 20.0).round() / 200.0).collect())
                .collect();
            ArmEmbedding::from_rows(rows).unwrap()
        };
        let cover = cover_embeddings(&emb, tol).unwrap();
        cases += 1;
        ok &= cover.len() <= emb.len()
            && emb.rows().iter().all(|r| {
                cover
                    .rows()
                    .iter()
                    .any(|c| c.iter().zip(r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) <= tol)
            });
    }
    (
        ok,
        format!("{cases} embeddings covered at tol 1/T, never larger than the input"),
    )
}

fn c11_gaussian() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let c1 = rng.random_range(-3.0..3.0);
        let c2 = rng.random_range(-3.0..3.0);
        let p = gaussian_probabilities_from_scores(&[c1, c2]).unwrap();
        worst = worst.max((p[0] - phi((c1 - c2) / 2f64.sqrt())).abs());
        worst = worst.max((p[1] - phi((c2 - c1) / 2f64.sqrt())).abs());
    }
    let sym = gaussian_probabilities_from_scores(&[0.4, 0.4, 0.4]).unwrap();
    let sym_err = sym.iter().map(|x| (x - 1.0 / 3.0).abs()).fold(0.0, f64::max);
    // the single-arm grid feeds these models; sanity check its size by hand
    let grid_ok = build_single_arm_grid(3, 0.1).unwrap().len() == 3 * 10 + 1;
    (
        worst <= 1e-8 && sym_err <= 1e-9 && grid_ok,
        format!("two-arm max error {worst:.2e} (<= 1e-8), symmetric three-arm error {sym_err:.2e} (<= 1e-9)"),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("reduction exactness", c1_reduction_exactness, 10.0),
        ("menu dominance", c2_menu_dominance, 120.0),
        ("example32 values", c3_example32, 30.0),
        ("greedy minimax instance identities", c4_hard_b1, f64::INFINITY),
        ("regret scaling, greedy single-arm", c5_regret_greedy, 600.0),
        ("linear regret of a fixed grid", c6_linear_regret, 300.0),
        ("smooth hard-instance structure", c7_smooth_structure, 120.0),
        ("regret scaling, smooth", c8_regret_smooth, 900.0),
        ("general-incentive geometry", c9_general_geometry, 180.0),
        ("covering", c10_covering, 5.0),
        ("Gaussian-noise model", c11_gaussian, f64::INFINITY),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let id = format!("{}", i + 1);
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = f();
        let secs = start.elapsed().as_secs_f64();
        let ok = ok && secs <= *budget;
        if !ok {
            failed += 1;
        }
        let limit = if budget.is_finite() {
            format!(", budget {budget:.0} s")
        } else {
            String::new()
        };
        println!(
            "{} {:>2} {name}: {detail} [{secs:.1} s{limit}]",
            if ok { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
