//! Calibration probe: draw instances from a parameter box and print the
//! distribution of baseline costs, to tune generator defaults.

use streamline_core::bacp::BacpInstance;
use streamline_core::instgen::baseline_cost;
use streamline_core::kernel::SolveStatus;
use streamline_core::seeds;

use rand::Rng;

#[allow(clippy::too_many_arguments)]
fn draw(
    seed: u64,
    i: usize,
    c_range: (u32, u32),
    p_range: (u32, u32),
    load_hi: u32,
    widen: (u32, u32),
    card_widen: (u32, u32),
    dens: (f64, f64),
) -> BacpInstance {
    let mut rng = seeds::rng(seed, &format!("cal/{i}"));
    let c = rng.gen_range(c_range.0..=c_range.1);
    let p = rng.gen_range(p_range.0..=p_range.1);
    let mut loads: Vec<u32> = (0..c).map(|_| rng.gen_range(1..=load_hi)).collect();
    let sort_mode = std::env::var("CAL_SORT").unwrap_or_default();
    if sort_mode == "asc" { loads.sort_unstable(); }
    if sort_mode == "desc" { loads.sort_unstable_by(|a, b| b.cmp(a)); }
    if std::env::var("CAL_EXACT").as_deref() == Ok("1") {
        let total: u64 = loads.iter().map(|&l| l as u64).sum();
        let rem = (total % p as u64) as u32;
        if rem != 0 { loads[0] += p - rem; }
    }
    let total: u64 = loads.iter().map(|&l| l as u64).sum();
    let per_period = total as f64 / p as f64;
    let w = rng.gen_range(widen.0..=widen.1);
    let lb = (per_period.floor() as u32).saturating_sub(w);
    let ub = per_period.ceil() as u32 + w;
    let cw = rng.gen_range(card_widen.0..=card_widen.1);
    let cpp = c as f64 / p as f64;
    let clb = (cpp.floor() as u32).saturating_sub(cw);
    let cub = cpp.ceil() as u32 + cw;
    // prerequisite density scaled so the longest chain stays below the
    // period count: expected chain length grows with c * density
    let d_lo = dens.0 * p as f64 / c as f64;
    let d_hi = dens.1 * p as f64 / c as f64;
    let d = rng.gen_range(d_lo..d_hi);
    // scrambled topological order: the DAG need not follow course indices
    let mut perm: Vec<u32> = (1..=c).collect();
    use rand::seq::SliceRandom;
    perm.shuffle(&mut rng);
    let mut prereq = Vec::new();
    for i in 0..c as usize {
        for j in (i + 1)..c as usize {
            if rng.gen_range(0.0..1.0) < d {
                prereq.push((perm[i], perm[j]));
            }
        }
    }
    BacpInstance::new(c, p, lb, ub, clb, cub, prereq, loads, 0).unwrap()
}

fn probe_streamliners(inst: &BacpInstance, cap: u64) {
    use streamline_core::model::{compile, RANKED_TABLE};
    use streamline_core::streamliner::{generate_candidates, CandidateConfig, StreamlinerSet};
    use streamline_core::bacp::BacpClass;
    use streamline_core::kernel::{solve, SolveBudget};
    let cands = generate_candidates(&BacpClass, &CandidateConfig::default());
    let picks = ["curr is monotonically increasing",
                 "half of the courses map to even periods",
                 "half of the range values of curr are even",
                 "all of the courses map to lower-half periods",
                 "all but at most 2 of the courses map to lower-half periods"];
    for d in picks {
        let id = cands.iter().find(|s| s.description == d).unwrap().id;
        let model = compile(inst, &StreamlinerSet::from_ids([id]), &RANKED_TABLE[0], &cands).unwrap();
        let out = solve(&model.csp, &SolveBudget::nodes(cap)).unwrap();
        println!("      [{d}] -> {:?} {}", out.status, out.cost);
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.get(1).map(|s| s.as_str()) == Some("rate") {
        // sustained node-rate measurement: a deliberately hard instance
        // solved under a fixed large cap
        // scan seeds until a run needs real search, then report its rate
        for i in 0..400 {
            let inst = draw(123, i, (32, 38), (6, 8), 9, (0, 1), (1, 2), (0.08, 0.25));
            let t = std::time::Instant::now();
            let (status, cost) = baseline_cost(&inst, 20_000_000).unwrap();
            let dt = t.elapsed().as_secs_f64();
            if cost > 50_000 {
                println!("i={i} status {status:?} cost {cost} wall {dt:.2}s rate {:.2} M/s", cost as f64 / dt / 1e6);
            }
        }
        return;
    }
    let preset = args.get(1).map(|s| s.as_str()).unwrap_or("train");
    let n: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(60);
    let (c_range, p_range, load_hi, widen, card_widen, dens, cap) = match preset {
        "a" => ((12u32, 18u32), (4u32, 6u32), 8u32, (0u32, 1u32), (1u32, 2u32), (0.1, 0.3), 2_000_000u64),
        "b" => ((14, 20), (4, 6), 8, (0, 0), (1, 2), (0.1, 0.3), 2_000_000),
        "c" => ((16, 24), (5, 7), 8, (0, 1), (1, 2), (0.1, 0.3), 120_000_000),
        "d" => ((20, 28), (5, 7), 8, (0, 0), (1, 2), (0.1, 0.3), 120_000_000),
        "e" => ((13, 17), (4, 6), 6, (0, 1), (1, 2), (0.05, 0.25), 2_000_000),
        "f" => ((18, 26), (5, 8), 6, (0, 1), (1, 2), (0.05, 0.25), 120_000_000),
        "g" => ((28, 40), (6, 9), 9, (0, 1), (1, 2), (0.08, 0.25), 120_000_000),
        "c30" => ((28, 32), (6, 8), 9, (0, 1), (1, 2), (0.08, 0.25), 2_000_000),
        "c36" => ((34, 38), (6, 8), 9, (0, 1), (1, 2), (0.08, 0.25), 2_000_000),
        "c42" => ((40, 44), (7, 9), 9, (0, 1), (1, 2), (0.08, 0.25), 2_000_000),
        "c48" => ((46, 50), (8, 10), 9, (0, 1), (1, 2), (0.08, 0.25), 2_000_000),
        "w1" => ((40, 55), (7, 10), 9, (1, 1), (1, 2), (0.3, 0.8), 2_000_000),
        "w2" => ((40, 55), (7, 10), 9, (0, 1), (1, 2), (0.3, 0.8), 2_000_000),
        "w3" => ((30, 44), (6, 9), 9, (0, 1), (1, 2), (0.3, 0.8), 2_000_000),
        "h" => ((40, 60), (8, 12), 9, (0, 1), (1, 2), (0.05, 0.18), 120_000_000),
        "i" => ((28, 40), (5, 7), 12, (0, 0), (1, 1), (0.08, 0.25), 120_000_000),
        "j" => ((24, 34), (4, 6), 15, (0, 0), (0, 1), (0.05, 0.2), 120_000_000),
        "t1" => ((48, 62), (8, 11), 9, (0, 1), (1, 2), (0.3, 0.8), 120_000_000),
        "t2" => ((55, 70), (9, 12), 9, (0, 1), (1, 2), (0.3, 0.8), 120_000_000),
        "t3" => ((46, 56), (8, 10), 9, (0, 1), (1, 2), (0.3, 0.8), 25_000_000),
        "t4" => ((48, 58), (8, 10), 12, (0, 1), (1, 2), (0.3, 0.8), 25_000_000),
        "t5" => ((52, 62), (8, 10), 9, (0, 1), (1, 2), (0.3, 0.8), 25_000_000),
        other => panic!("unknown preset {other}"),
    };
    use rayon::prelude::*;
    let t0 = std::time::Instant::now();
    let results: Vec<(SolveStatus, u64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let inst = draw(99, i, c_range, p_range, load_hi, widen, card_widen, dens);
            let t = std::time::Instant::now();
            let (status, cost) = baseline_cost(&inst, cap).unwrap();
            (status, cost, t.elapsed().as_secs_f64())
        })
        .collect();
    let mut buckets = [0usize; 12];
    let mut unsat = 0;
    let mut capped = 0;
    for (status, cost, _) in &results {
        match status {
            SolveStatus::Unsat => unsat += 1,
            SolveStatus::Capped => capped += 1,
            SolveStatus::Sat => {
                let b = (*cost as f64).log10().max(0.0).min(11.0) as usize;
                buckets[b] += 1;
            }
        }
    }
    println!("preset {preset}: n={n} unsat={unsat} capped={capped} wall={:.1}s", t0.elapsed().as_secs_f64());
    for (b, count) in buckets.iter().enumerate() {
        if *count > 0 {
            println!("  10^{b}..10^{}: {count}", b + 1);
        }
    }
    if std::env::var("CAL_STREAMLINERS").as_deref() == Ok("1") {
        for (i, (status, cost, _)) in results.iter().enumerate() {
            if *status == SolveStatus::Sat && *cost >= 1000 {
                let inst = draw(99, i, c_range, p_range, load_hi, widen, card_widen, dens);
                println!("    instance {i}: baseline {cost}");
                probe_streamliners(&inst, cap);
            }
        }
    }
    let max_wall = results.iter().map(|r| r.2).fold(0.0, f64::max);
    let nodes: u64 = results.iter().map(|r| r.1).sum();
    let wall: f64 = results.iter().map(|r| r.2).sum();
    println!("  node rate ~ {:.2} M/s, slowest single {:.1}s", nodes as f64 / wall / 1e6, max_wall);
}
