//! Acceptance suite. Prints one line per criterion and exits nonzero if a
//! gating criterion fails. Criterion 9 is a timing report and never gates.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sst_core::bwt_builder::{build_bwt, build_bwt_naive, build_bwt_with_tau, invert_bwt, Pipeline};
use sst_core::inversions::{
    build_reduction_general, build_reduction_small, count_inversions_via_bwt, extract_bitvectors,
    BwtBackend, Variant,
};
use sst_core::lce_index::{build_lce, default_tau};
use sst_core::reference_oracles::{
    fenwick_inversions, naive_bwt, naive_inversions, naive_lce, naive_suffix_array,
    naive_suffix_array_doubling, naive_sync_violation, naive_wavelet_bitvectors,
};
use sst_core::sync_set::{
    compute_q_and_b, construct_deterministic, construct_packed_fast, construct_randomized,
    fast_precondition, validate_sync_set, SyncSet,
};
use sst_core::sync_sort::sort_sync_suffixes;
use sst_core::PackedText;

type Outcome = Result<String, String>;

fn pack(t: &[u32], sigma: u32) -> PackedText {
    PackedText::pack(t, sigma).expect("pack")
}

fn all_binary(n: usize) -> impl Iterator<Item = Vec<u32>> {
    (0u32..1 << n).map(move |m| (0..n).map(|i| (m >> i) & 1).collect())
}

fn random_text(rng: &mut ChaCha8Rng, n: usize, sigma: u32) -> Vec<u32> {
    (0..n).map(|_| rng.gen_range(0..sigma)).collect()
}

fn fibonacci(n: usize) -> Vec<u32> {
    let (mut a, mut b) = (vec![0u32], vec![0u32, 1]);
    while b.len() < n {
        let next = [b.clone(), a].concat();
        a = b;
        b = next;
    }
    b.truncate(n);
    b
}

fn thue_morse(n: usize) -> Vec<u32> {
    (0..n).map(|i| i.count_ones() & 1).collect()
}

fn repeat_unit(unit: &[u32], n: usize) -> Vec<u32> {
    unit.iter().cycle().take(n).copied().collect()
}

fn adversarial() -> Vec<(String, Vec<u32>)> {
    let mut out = Vec::new();
    for n in [1usize, 2, 3, 7, 64, 1000, 4097, 30_000, 100_000] {
        out.push((format!("a^{n}"), vec![0; n]));
        out.push((format!("(ab)^k n={n}"), repeat_unit(&[0, 1], n)));
        out.push((format!("(aab)^k n={n}"), repeat_unit(&[0, 0, 1], n)));
        out.push((format!("fibonacci n={n}"), fibonacci(n)));
        out.push((format!("thue-morse n={n}"), thue_morse(n)));
    }
    out
}

/// Texts shared by criteria 1 and 8: (label, symbols, sigma, tau override).
fn bwt_corpus() -> Vec<(String, Vec<u32>, u32, Option<usize>)> {
    let mut out = Vec::new();
    for n in 1..=14 {
        for t in all_binary(n) {
            out.push((format!("binary {t:?}"), t, 2, None));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xB3_7001);
    for sigma in [2u32, 4, 16, 64] {
        for case in 0..1000 {
            let n = (1e3 * 100f64.powf(rng.gen::<f64>())) as usize;
            let t = random_text(&mut rng, n, sigma);
            let bits = 32 - (sigma - 1).leading_zeros() as usize;
            let max_tau = (128 / (3 * bits)).min((n + 1) / 3).max(1);
            let tau = if case % 2 == 0 {
                None
            } else {
                Some(rng.gen_range(1..=max_tau))
            };
            out.push((
                format!("random sigma={sigma} n={n} case={case}"),
                t,
                sigma,
                tau,
            ));
        }
    }
    for (label, t) in adversarial() {
        out.push((label.clone(), t.clone(), 2, None));
        if t.len() >= 30 {
            out.push((format!("{label} tau=7"), t, 2, Some(7)));
        }
    }
    out
}

fn criteria_1_and_8() -> (Outcome, Outcome) {
    let corpus = bwt_corpus();
    let (mut bad_bwt, mut bad_trip, mut sync_runs) = (Vec::new(), Vec::new(), 0usize);
    for (label, t, sigma, tau) in &corpus {
        let pt = pack(t, *sigma);
        let res = match tau {
            None => build_bwt(&pt),
            Some(_) => build_bwt_with_tau(&pt, *tau),
        };
        let res = match res {
            Ok(r) => r,
            Err(e) => {
                bad_bwt.push(format!("{label}: {e}"));
                continue;
            }
        };
        if res.meta.pipeline == Pipeline::Sync {
            sync_runs += 1;
        }
        let (want, primary) = naive_bwt(t);
        if res.bwt != want || res.primary_index != primary {
            bad_bwt.push(label.clone());
        }
        match invert_bwt(&res) {
            Ok(back) if &back == t => {}
            _ => bad_trip.push(label.clone()),
        }
    }
    let total = corpus.len();
    let summarize = |bad: &[String], what: &str| -> Outcome {
        if bad.is_empty() {
            Ok(format!(
                "{total} texts {what}, {sync_runs} through the sync pipeline"
            ))
        } else {
            Err(format!(
                "{} of {total} texts differ, first: {}",
                bad.len(),
                bad[0]
            ))
        }
    };
    (
        summarize(&bad_bwt, "match naive_bwt"),
        summarize(&bad_trip, "round-trip"),
    )
}

fn check_set(
    pt: &PackedText,
    t: &[u32],
    tau: usize,
    s: &SyncSet,
    what: &str,
) -> Result<(), String> {
    let report = validate_sync_set(pt, tau, s);
    if !report.is_valid() {
        return Err(format!("{what} tau={tau} n={}: {report}", t.len()));
    }
    if t.len() <= 64 {
        if let Some(v) = naive_sync_violation(t, tau, s.positions()) {
            return Err(format!("{what} tau={tau} n={}: oracle says {v}", t.len()));
        }
    }
    Ok(())
}

#[derive(Default)]
struct Bounds {
    worst_30: f64,
    worst_18: f64,
    worst_b: f64,
    checked: usize,
}

fn sync_checks(t: &[u32], sigma: u32, tau: usize, b: &mut Bounds) -> Result<(), String> {
    let n = t.len();
    let pt = pack(t, sigma);
    let det = construct_deterministic(&pt, tau).map_err(|e| e.to_string())?;
    check_set(&pt, t, tau, &det, "det")?;
    let fast = construct_packed_fast(&pt, tau).map_err(|e| e.to_string())?;
    check_set(&pt, t, tau, &fast, "fast")?;
    for seed in 0..10 {
        let r = construct_randomized(&pt, tau, seed).map_err(|e| e.to_string())?;
        check_set(&pt, t, tau, &r, "random")?;
    }
    let ps = compute_q_and_b(&pt, tau).map_err(|e| e.to_string())?;
    let size = det.len() * tau;
    if size > 30 * n {
        return Err(format!("|S|={} > 30n/tau for n={n} tau={tau}", det.len()));
    }
    if ps.q_count() == 0 && size > 18 * n {
        return Err(format!(
            "Q empty but |S|={} > 18n/tau for n={n} tau={tau}",
            det.len()
        ));
    }
    if ps.b_count() * tau > 6 * n {
        return Err(format!("|B|={} > 6n/tau for n={n} tau={tau}", ps.b_count()));
    }
    let ratio = |x: usize| x as f64 * tau as f64 / n as f64;
    b.worst_30 = b.worst_30.max(ratio(det.len()));
    if ps.q_count() == 0 {
        b.worst_18 = b.worst_18.max(ratio(det.len()));
    }
    b.worst_b = b.worst_b.max(ratio(ps.b_count()));
    b.checked += 1;
    Ok(())
}

fn criterion_2() -> Outcome {
    let mut b = Bounds::default();
    for n in 2..=12 {
        for t in all_binary(n) {
            for tau in (1..=3).filter(|&tau| 2 * tau <= n) {
                sync_checks(&t, 2, tau, &mut b)?;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5E_7002);
    for case in 0..3000 {
        let n = rng.gen_range(13..=256);
        let sigma = [2u32, 2, 4, 16][case % 4];
        let t = if case % 3 == 0 {
            let unit = {
                let len = rng.gen_range(1..=3);
                random_text(&mut rng, len, sigma)
            };
            let mut t = repeat_unit(&unit, n);
            for _ in 0..rng.gen_range(0..4) {
                let k = rng.gen_range(0..n);
                t[k] = rng.gen_range(0..sigma);
            }
            t
        } else {
            random_text(&mut rng, n, sigma)
        };
        for tau in 1..=3 {
            sync_checks(&t, sigma, tau, &mut b)?;
        }
        let tau = rng.gen_range(4..=(n / 2).min(12));
        sync_checks(&t, sigma, tau, &mut b)?;
    }
    Ok(format!(
        "{} (text, tau) pairs valid; max |S|tau/n={:.2} (bound 30), Q-empty max={:.2} (bound 18), max |B|tau/n={:.2} (bound 6)",
        b.checked, b.worst_30, b.worst_18, b.worst_b
    ))
}

fn criterion_3_once(master: u64) -> (bool, f64, f64) {
    let (n, tau, sigma) = (10_000usize, 8usize, 16u32);
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    let (mut worst, mut total) = (0f64, 0f64);
    let mut texts = 0;
    while texts < 20 {
        let t = random_text(&mut rng, n, sigma);
        let pt = pack(&t, sigma);
        if compute_q_and_b(&pt, tau).expect("q and b").q_count() != 0 {
            continue;
        }
        texts += 1;
        let sum: usize = (0..30)
            .map(|_| {
                construct_randomized(&pt, tau, rng.gen())
                    .expect("randomized")
                    .len()
            })
            .sum();
        let mean = sum as f64 / 30.0 * tau as f64 / n as f64;
        worst = worst.max(mean);
        total += mean;
    }
    (worst <= 7.5, worst, total / 20.0)
}

fn criterion_3() -> Outcome {
    let (ok, worst, avg) = criterion_3_once(0x7A_7003);
    let line = format!("worst mean |S|tau/n={worst:.3}, average {avg:.3} (bound 7.5)");
    if ok {
        return Ok(line);
    }
    let (ok2, worst2, avg2) = criterion_3_once(0x7A_7013);
    let line2 = format!("{line}; rerun worst={worst2:.3}, average {avg2:.3}");
    if ok2 {
        Ok(line2)
    } else {
        Err(line2)
    }
}

fn filtered_order(t: &[u32], s: &SyncSet) -> Vec<usize> {
    let sa = if t.len() <= 64 {
        naive_suffix_array(t)
    } else {
        naive_suffix_array_doubling(t)
    };
    sa.into_iter().filter(|&p| s.contains(p)).collect()
}

fn criterion_4() -> Outcome {
    let mut checked = 0;
    for n in 2..=14 {
        for t in all_binary(n) {
            let pt = pack(&t, 2);
            for tau in 1..=n / 2 {
                let s = construct_deterministic(&pt, tau).map_err(|e| e.to_string())?;
                let got = sort_sync_suffixes(&pt, &s)
                    .map_err(|e| e.to_string())?
                    .order;
                if got != filtered_order(&t, &s) {
                    return Err(format!("{t:?} tau={tau}"));
                }
                checked += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x50_7004);
    for case in 0..500 {
        let n = rng.gen_range(12..=5000);
        let sigma = [2u32, 4, 16][case % 3];
        let t = if case % 4 == 0 {
            let unit = {
                let len = rng.gen_range(1..=4);
                random_text(&mut rng, len, sigma)
            };
            let mut t = repeat_unit(&unit, n);
            let k = rng.gen_range(0..n);
            t[k] = rng.gen_range(0..sigma);
            t
        } else {
            random_text(&mut rng, n, sigma)
        };
        let tau = rng.gen_range(1..=6);
        let pt = pack(&t, sigma);
        let s = match case % 3 {
            0 => construct_deterministic(&pt, tau),
            1 => construct_packed_fast(&pt, tau),
            _ => construct_randomized(&pt, tau, case as u64),
        }
        .map_err(|e| e.to_string())?;
        let got = sort_sync_suffixes(&pt, &s)
            .map_err(|e| e.to_string())?
            .order;
        if got != filtered_order(&t, &s) {
            return Err(format!("random case {case} n={n} sigma={sigma} tau={tau}"));
        }
        checked += 1;
    }
    Ok(format!(
        "{checked} (text, tau) pairs match the filtered suffix array"
    ))
}

fn mosaic(rng: &mut ChaCha8Rng, n: usize, sigma: u32) -> Vec<u32> {
    let mut t = Vec::with_capacity(n);
    while t.len() < n {
        let unit = {
            let len = rng.gen_range(1..=6);
            random_text(rng, len, sigma)
        };
        let len = rng.gen_range(10..=20_000).min(n - t.len());
        t.extend(unit.iter().cycle().take(len));
    }
    t
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1C_7005);
    let mut queries = 0usize;
    for case in 0..60 {
        let sigma = [2u32, 4][case % 2];
        let n = rng.gen_range(2..=600);
        let t = match case % 3 {
            0 => random_text(&mut rng, n, sigma),
            1 => mosaic(&mut rng, n, sigma),
            _ => {
                let unit = {
                    let len = rng.gen_range(1..=3);
                    random_text(&mut rng, len, sigma)
                };
                let mut t = repeat_unit(&unit, n);
                let k = rng.gen_range(0..n);
                t[k] = rng.gen_range(0..sigma);
                t
            }
        };
        let pt = pack(&t, sigma);
        let tau = if case % 4 == 0 {
            None
        } else {
            Some(rng.gen_range(1..=(n / 2).clamp(1, 10)))
        };
        let idx = build_lce(&pt, tau).map_err(|e| e.to_string())?;
        for i in 0..n {
            for j in 0..n {
                if idx.query(i, j).ok() != naive_lce(&t, i, j).ok() {
                    return Err(format!("case {case} n={n} tau={} lce({i},{j})", idx.tau()));
                }
            }
        }
        queries += n * n;
    }
    let n = 1_000_000;
    for (kind, t) in [
        ("random", random_text(&mut rng, n, 2)),
        ("mosaic", mosaic(&mut rng, n, 2)),
    ] {
        let pt = pack(&t, 2);
        for tau in [None, Some(8)] {
            let idx = build_lce(&pt, tau).map_err(|e| e.to_string())?;
            for q in 0..100_000 {
                let i = rng.gen_range(0..n);
                let j = if q % 2 == 0 {
                    rng.gen_range(0..n)
                } else {
                    (i + rng.gen_range(1..=12)).min(n - 1)
                };
                if idx.query(i, j).ok() != naive_lce(&t, i, j).ok() {
                    return Err(format!("{kind} n={n} tau={} lce({i},{j})", idx.tau()));
                }
            }
            queries += 100_000;
        }
    }
    Ok(format!(
        "{queries} queries match naive_lce (default tau for n=1e6 is {})",
        default_tau(n, 2)
    ))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xFA_7006);
    let mut done = 0;
    let mut nonempty = 0;
    while done < 200 {
        let sigma = [2u32, 2, 4][done % 3];
        let n = 1usize << rng.gen_range(8..=17);
        let n = rng.gen_range(n..2 * n);
        let tau = rng.gen_range(1..=4);
        if !fast_precondition(n, sigma, tau) {
            continue;
        }
        let t = if done % 5 == 0 {
            mosaic(&mut rng, n, sigma)
        } else {
            random_text(&mut rng, n, sigma)
        };
        let pt = pack(&t, sigma);
        let det = construct_deterministic(&pt, tau).map_err(|e| e.to_string())?;
        let fast = construct_packed_fast(&pt, tau).map_err(|e| e.to_string())?;
        if det.positions() != fast.positions() {
            return Err(format!("case {done} n={n} sigma={sigma} tau={tau}"));
        }
        nonempty += usize::from(!det.is_empty());
        done += 1;
    }
    Ok(format!(
        "{done} texts identical ({nonempty} with nonempty sets)"
    ))
}

fn lg_floor(m: usize) -> usize {
    (usize::BITS - 1 - m.max(1).leading_zeros()) as usize
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1B_7007);
    let mut arrays: Vec<Vec<u64>> = Vec::new();
    for m in [1usize, 2, 3, 17, 256, 1000, 4096] {
        arrays.push((0..m as u64).collect());
        arrays.push((0..m as u64).rev().collect());
        arrays.push(vec![5; m]);
        arrays.push(vec![0; m]);
    }
    for _ in 0..1000 {
        let m = (4096f64.powf(rng.gen::<f64>())) as usize;
        let range = [2u64, 8, m as u64 + 1, 1 << 40][rng.gen_range(0..4)];
        arrays.push((0..m).map(|_| rng.gen_range(0..range)).collect());
    }
    let (mut general, mut small, mut wavelets) = (0, 0, 0);
    for (case, a) in arrays.iter().enumerate() {
        let want = naive_inversions(a);
        if fenwick_inversions(a) != want {
            return Err(format!("oracles disagree on case {case}"));
        }
        let got = count_inversions_via_bwt(a, Variant::General, BwtBackend::Sync)
            .map_err(|e| e.to_string())?;
        if got != want {
            return Err(format!(
                "general variant: case {case} m={} got {got} want {want}",
                a.len()
            ));
        }
        general += 1;

        let m = a.len();
        if m >= 2 {
            let k = rng.gen_range(1..=lg_floor(m).min(6));
            let mask = (1u64 << k) - 1;
            let narrow: Vec<u64> = a.iter().map(|&v| v & mask).collect();
            let want = naive_inversions(&narrow);
            let got = count_inversions_via_bwt(&narrow, Variant::Small { k }, BwtBackend::Sync)
                .map_err(|e| e.to_string())?;
            if got != want {
                return Err(format!(
                    "small variant: case {case} m={m} k={k} got {got} want {want}"
                ));
            }
            small += 1;
            if m <= 512 {
                let rt = build_reduction_small(&narrow, k).map_err(|e| e.to_string())?;
                let naive = naive_wavelet_bitvectors(&rt.values, k as u32);
                if extract_bitvectors(&rt, BwtBackend::Sync).map_err(|e| e.to_string())? != naive {
                    return Err(format!("small bitvectors: case {case}"));
                }
                wavelets += 1;
            }
        }
        if (1..=512).contains(&m) && a.iter().all(|&v| v < m as u64) {
            let rt = build_reduction_general(a).map_err(|e| e.to_string())?;
            let naive = naive_wavelet_bitvectors(&rt.values, rt.k as u32);
            if extract_bitvectors(&rt, BwtBackend::Sync).map_err(|e| e.to_string())? != naive {
                return Err(format!("general bitvectors: case {case}"));
            }
            wavelets += 1;
        }
    }
    Ok(format!(
        "{general} general, {small} small counts exact; {wavelets} bitvector sets match"
    ))
}

fn criterion_9() -> Outcome {
    let n = 1usize << 24;
    let mut rng = ChaCha8Rng::seed_from_u64(0x9E_7009);
    let t = random_text(&mut rng, n, 2);
    let pt = pack(&t, 2);
    let tau = default_tau(n, 2);
    let start = Instant::now();
    let sync = build_bwt(&pt).map_err(|e| e.to_string())?;
    let t_sync = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let naive = build_bwt_naive(&pt, tau);
    let t_naive = start.elapsed().as_secs_f64();
    if sync.bwt != naive.bwt || sync.primary_index != naive.primary_index {
        return Err("sync and naive outputs differ".into());
    }
    let speedup = t_naive / t_sync;
    let line = format!("n=2^24 tau={tau}: sync {t_sync:.2}s, naive {t_naive:.2}s, speedup {speedup:.2}x (target 1.5x)");
    if speedup >= 1.5 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn report(id: usize, name: &str, outcome: &Outcome, secs: f64, gating: bool) -> bool {
    match outcome {
        Ok(msg) => {
            println!("criterion {id} [{name}]: PASS ({secs:.1}s) {msg}");
            true
        }
        Err(msg) if gating => {
            println!("criterion {id} [{name}]: FAIL ({secs:.1}s) {msg}");
            false
        }
        Err(msg) => {
            println!("criterion {id} [{name}]: FLAGGED, non-gating ({secs:.1}s) {msg}");
            true
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed().as_secs_f64())
}

fn main() -> ExitCode {
    let filter: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let want = |id: usize| filter.is_empty() || filter.contains(&id);
    let mut ok = true;

    let mut c1_c8 = None;
    if want(1) || want(8) {
        c1_c8 = Some(timed(criteria_1_and_8));
    }
    if let Some(((c1, _), secs)) = &c1_c8 {
        if want(1) {
            ok &= report(1, "BWT equals naive", c1, *secs, true);
        }
    }
    let runs: [(usize, &str, fn() -> Outcome); 5] = [
        (2, "sync-set validity and size", criterion_2),
        (3, "randomized size", criterion_3),
        (4, "sorted sync suffixes", criterion_4),
        (5, "LCE exactness", criterion_5),
        (6, "fast equals deterministic", criterion_6),
    ];
    for (id, name, f) in runs {
        if want(id) {
            let (o, secs) = timed(f);
            ok &= report(id, name, &o, secs, true);
        }
    }
    if want(7) {
        let (o, secs) = timed(criterion_7);
        ok &= report(7, "inversions end-to-end", &o, secs, true);
    }
    if let Some(((_, c8), secs)) = &c1_c8 {
        if want(8) {
            ok &= report(8, "BWT round trip", c8, *secs, true);
        }
    }
    if want(9) {
        let (o, secs) = timed(criterion_9);
        report(9, "performance sanity", &o, secs, false);
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
