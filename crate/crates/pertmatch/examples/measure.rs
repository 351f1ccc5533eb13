//! Temporary measurement harness used while calibrating the acceptance
//! suite; not part of the deliverable.

use std::time::Instant;

use pertmatch::algorithms::{
    run_budget_additive, run_pb, run_pr_integral, RankAssignment,
};
use pertmatch::generators::{
    gen_budgeted_triangle, gen_duplicate, gen_instance1, gen_instance2, gen_random,
};
use pertmatch::instance::Mode;
use pertmatch::oracle::{
    concentration_check, expected_ratio_y0_grid, opt_brute_force, opt_equality_check, opt_exact,
    opt_fractional, validate_run,
};
use pertmatch::perturb::PerturbationFunction;

const GAMMA: f64 = 1.0 - std::f64::consts::E.recip();

fn c1() {
    let f = PerturbationFunction::canonical_unit();
    for &alpha in &[0.25, 0.5, 0.75] {
        for &beta in &[0.25, 0.5, 0.75] {
            let mut prev_dev = f64::INFINITY;
            for (scale, step) in [(1u32, 1e-3), (2, 5e-4), (4, 2.5e-4)] {
                let t = Instant::now();
                let gi = gen_instance1(alpha, beta, 200 * scale, 20 * scale, &f).unwrap();
                let opt = gi.opt_closed_form.unwrap();
                let report = run_pb(&gi.instance, &f, step).unwrap();
                validate_run(&report, &gi.instance).unwrap();
                let ratio = report.value / opt;
                let dev = (ratio - GAMMA).abs();
                println!(
                    "c1 a={alpha} b={beta} scale={scale} n_on={} ratio={ratio:.9} dev={dev:.3e} shrink={} t={:.1}s entries_complete={}",
                    gi.instance.n_online(),
                    dev < prev_dev,
                    t.elapsed().as_secs_f64(),
                    report.allocation.entries_complete,
                );
                prev_dev = dev;
            }
        }
    }
}

fn c2() {
    let f = PerturbationFunction::linear();
    for (scale, step) in [(1u32, 1e-3), (2, 5e-4)] {
        let t = Instant::now();
        let gi = gen_instance1(0.9, 0.9, 200 * scale, 20 * scale, &f).unwrap();
        let opt = gi.opt_closed_form.unwrap();
        let report = run_pb(&gi.instance, &f, step).unwrap();
        let ratio = report.value / opt;
        println!(
            "c2 scale={scale} ratio={ratio:.9} bar={:.9} below={} t={:.1}s",
            GAMMA - 0.005,
            ratio < GAMMA - 0.005,
            t.elapsed().as_secs_f64()
        );
    }
}

fn c3() {
    let f = PerturbationFunction::canonical_unit();
    let t = Instant::now();
    let gi = gen_instance2(0.1, 2000, &f).unwrap();
    let est = expected_ratio_y0_grid(&gi, &f, 2000).unwrap();
    println!(
        "c3 mean={:.6} stderr={:.2e} t={:.1}s in_range={}",
        est.mean,
        est.stderr,
        t.elapsed().as_secs_f64(),
        (0.618..=0.624).contains(&est.mean)
    );
}

fn c5() {
    let f = PerturbationFunction::canonical_unit();
    let t = Instant::now();
    let mut min_ratio = f64::INFINITY;
    let mut min_seed = 0;
    for seed in 0..50u64 {
        let n_off = 3 + (seed % 8) as u32; // 3..=10
        let n_on = 5 + ((seed * 7) % 16) as u32; // 5..=20
        let gi = gen_random(seed, n_off, n_on, Mode::BudgetAdditiveUnknown).unwrap();
        let eq = opt_equality_check(&gi.instance).unwrap();
        assert!(eq.equal, "seed {seed}: {} vs {}", eq.opt_original, eq.opt_stages);
        let report = run_budget_additive(&gi.instance, &f, 1e-3).unwrap();
        validate_run(&report, &gi.instance).unwrap();
        let ratio = report.value / eq.opt_original;
        if ratio < min_ratio {
            min_ratio = ratio;
            min_seed = seed;
        }
    }
    println!(
        "c5 random: min_ratio={min_ratio:.6} at seed {min_seed} (floor {:.6}) t={:.1}s",
        GAMMA - 0.015,
        t.elapsed().as_secs_f64()
    );
    let t = Instant::now();
    let tri = gen_budgeted_triangle(500, Mode::BudgetAdditiveUnknown).unwrap();
    let report = run_budget_additive(&tri.instance, &f, 1e-3).unwrap();
    validate_run(&report, &tri.instance).unwrap();
    let ratio = report.value / tri.opt_closed_form.unwrap();
    println!(
        "c5 triangle n=500: ratio={ratio:.6} dev={:.2e} t={:.1}s",
        (ratio - GAMMA).abs(),
        t.elapsed().as_secs_f64()
    );
}

fn c6() {
    let f = PerturbationFunction::canonical_unit();
    let candidates: Vec<(String, pertmatch::instance::Instance)> = vec![
        ("tri-unit".into(), pertmatch::generators::gen_upper_triangle(3, None).unwrap().instance),
        (
            "tri-weighted".into(),
            pertmatch::generators::gen_upper_triangle(3, Some(&[1.0, 0.6, 0.3]))
                .unwrap()
                .instance,
        ),
        (
            "complete-weighted".into(),
            pertmatch::instance::Instance {
                mode: Mode::VertexWeighted,
                offline_blocks: [1.0, 0.5, 0.25]
                    .iter()
                    .map(|&w| pertmatch::instance::OfflineBlock {
                        count: 1,
                        weight_or_budget: w,
                        budget_known: true,
                        unlimited: false,
                    })
                    .collect(),
                online_blocks: vec![pertmatch::instance::OnlineBlock {
                    count: 3,
                    arrival_rank: 0,
                }],
                edges: [1.0, 0.5, 0.25]
                    .iter()
                    .enumerate()
                    .map(|(k, &w)| pertmatch::instance::EdgeBlock {
                        offline_block: k,
                        online_block: 0,
                        pattern: pertmatch::instance::Pattern::Complete,
                        bid: pertmatch::instance::Bids::Uniform(w),
                    })
                    .collect(),
            },
        ),
    ];
    for (name, parent) in &candidates {
        let t = Instant::now();
        let opt = opt_exact(parent).unwrap();
        let pb = run_pb(parent, &f, 1e-3).unwrap().value;
        let mut monotone_count = 0;
        let mut sample = String::new();
        for master in 0..10u64 {
            let mut last = f64::INFINITY;
            let mut monotone = true;
            for n_copies in [20u32, 80, 320] {
                let dup = gen_duplicate(parent, n_copies).unwrap();
                let mut total = 0.0;
                for draw in 0..500u64 {
                    // Common random numbers: the same per-draw seed at every N.
                    let ranks = RankAssignment::Random { seed: master * 100_000 + draw };
                    total += run_pr_integral(&dup.instance, &f, &ranks).unwrap().value;
                }
                let gap = (total / 500.0 - pb).abs() / opt;
                if master == 0 {
                    sample.push_str(&format!("{gap:.5} "));
                }
                if gap > last {
                    monotone = false;
                }
                last = gap;
            }
            if monotone {
                monotone_count += 1;
            }
        }
        println!(
            "c6 {name} opt={opt:.4} pb={pb:.4} gaps(master0)={sample} monotone {monotone_count}/10 t={:.1}s",
            t.elapsed().as_secs_f64()
        );
    }
}

fn c7() {
    let t = Instant::now();
    let report = concentration_check(10_000, 0.45, 10_000, 20260814).unwrap();
    println!(
        "c7 empirical={:.6} bound={:.6} t={:.1}s",
        report.empirical,
        report.bound,
        t.elapsed().as_secs_f64()
    );
}

fn c8() {
    let t = Instant::now();
    let mut max_diff: f64 = 0.0;
    for seed in 0..20u64 {
        let gi = gen_random(seed, 3, 3, Mode::Adwords).unwrap();
        let lp = opt_fractional(&gi.instance).unwrap();
        let brute = opt_brute_force(&gi.instance, 200).unwrap();
        let diff = (lp - brute).abs();
        println!("c8 seed={seed} lp={lp:.6} brute={brute:.6} diff={diff:.4}");
        max_diff = max_diff.max(diff);
    }
    println!("c8 max_diff={max_diff:.4} t={:.1}s", t.elapsed().as_secs_f64());
}

fn c6_check() {
    let f = PerturbationFunction::canonical_unit();
    for ws in [[0.5, 0.3, 0.5], [0.7, 0.5, 1.0], [0.7, 1.0, 0.5]] {
        let parent =
            pertmatch::generators::gen_upper_triangle(3, Some(&ws)).unwrap().instance;
        let opt = opt_exact(&parent).unwrap();
        let pb = run_pb(&parent, &f, 1e-3).unwrap().value;
        let mut line = format!("c6c weights={ws:?} gaps=");
        for n_copies in [20u32, 80, 320] {
            let dup = gen_duplicate(&parent, n_copies).unwrap();
            let mut total = 0.0;
            for draw in 0..500u64 {
                let ranks = RankAssignment::Random { seed: 4_200_000 + draw };
                total += run_pr_integral(&dup.instance, &f, &ranks).unwrap().value;
            }
            line.push_str(&format!("{:.6} ", (total / 500.0 - pb).abs() / opt));
        }
        println!("{line}");
    }
}

fn c6_trend() {
    let f = PerturbationFunction::canonical_unit();
    for ws in [[0.5, 0.3, 0.5], [0.7, 1.0, 0.5], [0.7, 0.5, 1.0], [1.0, 0.5, 0.1]] {
        let parent =
            pertmatch::generators::gen_upper_triangle(3, Some(&ws)).unwrap().instance;
        let opt = opt_exact(&parent).unwrap();
        let pb = run_pb(&parent, &f, 1e-3).unwrap().value;
        // True bias estimate at each copy count via 20k draws.
        let mut line = format!("c6t weights={ws:?} true-bias=");
        for n_copies in [20u32, 80, 320] {
            let dup = gen_duplicate(&parent, n_copies).unwrap();
            let mut total = 0.0;
            for draw in 0..20_000u64 {
                let ranks = RankAssignment::Random { seed: 7_000_000 + draw };
                total += run_pr_integral(&dup.instance, &f, &ranks).unwrap().value;
            }
            line.push_str(&format!("{:+.5} ", (total / 20_000.0 - pb) / opt));
        }
        // Stability of the 500-draw trend across master seeds.
        let mut monotone_count = 0;
        for master in 0..10u64 {
            let mut last = f64::INFINITY;
            let mut monotone = true;
            for n_copies in [20u32, 80, 320] {
                let dup = gen_duplicate(&parent, n_copies).unwrap();
                let mut total = 0.0;
                for draw in 0..500u64 {
                    let ranks = RankAssignment::Random { seed: master * 100_000 + draw };
                    total += run_pr_integral(&dup.instance, &f, &ranks).unwrap().value;
                }
                let gap = (total / 500.0 - pb).abs() / opt;
                if gap > last {
                    monotone = false;
                }
                last = gap;
            }
            if monotone {
                monotone_count += 1;
            }
        }
        println!("{line} monotone {monotone_count}/10");
    }
}

fn c6_search() {
    let f = PerturbationFunction::canonical_unit();
    let grid = [0.1, 0.3, 0.5, 0.7, 1.0];
    let mut best: Vec<(f64, [f64; 3])> = Vec::new();
    for &a in &grid {
        for &b in &grid {
            for &c in &grid {
                let parent = pertmatch::generators::gen_upper_triangle(3, Some(&[a, b, c]))
                    .unwrap()
                    .instance;
                let opt = opt_exact(&parent).unwrap();
                let pb = run_pb(&parent, &f, 1e-3).unwrap().value;
                let dup = gen_duplicate(&parent, 20).unwrap();
                let mut total = 0.0;
                for draw in 0..500u64 {
                    let ranks = RankAssignment::Random { seed: draw };
                    total += run_pr_integral(&dup.instance, &f, &ranks).unwrap().value;
                }
                let gap = (total / 500.0 - pb).abs() / opt;
                best.push((gap, [a, b, c]));
            }
        }
    }
    best.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    for (gap, w) in best.iter().take(12) {
        println!("c6s gap20={gap:.5} weights={w:?}");
    }
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();
    match which.as_str() {
        "c1" => c1(),
        "c2" => c2(),
        "c3" => c3(),
        "c5" => c5(),
        "c6" => c6(),
        "c6s" => c6_search(),
        "c6t" => c6_trend(),
        "c6c" => c6_check(),
        "c7" => c7(),
        "c8" => c8(),
        other => eprintln!("unknown section {other:?}"),
    }
}
