//! Acceptance checks. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cubepack::cachemodel::{self, CacheModelParams, ExactParams, Params, RepConstants};
use cubepack::codecs::{BocHeader, LpcHeader, SchcHeader};
use cubepack::diffseq::{build_difference_sequence, reconstruct_positions};
use cubepack::huffman::CodeBook;
use cubepack::{Header, HeaderParams, Relation, Scheme, TableStore, DEFAULT_BLOCK_SIZE};
use cubepack_bench::experiments::{
    build_md_store, estimate, summarize_sweep, sweep, SweepOptions, DEFAULT_MISS_PENALTY_MS,
};
use cubepack_bench::{generate, SynthSpec};
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly increasing positions built from random gaps.
fn random_positions(r: &mut ChaCha8Rng, n: usize, max_gap: u64) -> Vec<u64> {
    let mut p = r.random_range(0..max_gap);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(p);
        p += r.random_range(1..=max_gap);
    }
    out
}

fn runs_oracle(ps: &[u64]) -> usize {
    ps.iter()
        .enumerate()
        .filter(|&(i, &p)| i == 0 || ps[i - 1] + 1 != p)
        .count()
}

const CELL_CAP: u64 = 1 << 15;

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let densities = [0.001, 0.01, 0.1, 0.5, 0.9];
    let mut probes_total = 0u64;
    for case in 0..50 {
        let arity = r.random_range(2..=4);
        let cards: Vec<u64> = loop {
            let c: Vec<u64> = (0..arity).map(|_| r.random_range(2..=64)).collect();
            if c.iter().product::<u64>() <= CELL_CAP {
                break c;
            }
        };
        let density = densities[case % densities.len()];
        let clustering = if case % 2 == 0 {
            0.0
        } else {
            r.random_range(0.3..0.95)
        };
        let spec = SynthSpec::new(cards.clone(), density, clustering, r.random());
        let rel = generate(&spec).map_err(|e| e.to_string())?;
        let mut probes: Vec<Vec<u32>> = rel.iter().map(|(c, _)| c.to_vec()).collect();
        for _ in 0..10_000 {
            probes.push(cards.iter().map(|&k| r.random_range(0..k as u32)).collect());
        }
        let params = HeaderParams {
            s_bits: [4, 8, 16][case % 3],
            stride: [1, 4, 16][case % 3],
            ..Default::default()
        };
        for scheme in Scheme::ALL {
            let (store, _) = build_md_store(&rel, scheme, &params, DEFAULT_BLOCK_SIZE)
                .map_err(|e| e.to_string())?;
            for q in &probes {
                let got = store.point_query(q).map_err(|e| e.to_string())?;
                if got != rel.get(q) {
                    return Err(format!(
                        "case {case} {scheme} at {q:?}: {got:?} vs {:?}",
                        rel.get(q)
                    ));
                }
            }
            probes_total += probes.len() as u64;
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(120) {
        return Err(format!("runtime {elapsed:.1?} exceeds 2 min"));
    }
    Ok(format!(
        "{probes_total} probes, 0 mismatches, {elapsed:.1?}"
    ))
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let mut checked = 0;
    for &s in &[4u8, 8, 12, 16] {
        for _ in 0..1000 {
            let n = r.random_range(1..300);
            let max_gap = 1u64 << r.random_range(1..=(s as u32 + 2));
            let ls = random_positions(&mut r, n, max_gap);
            let seq = build_difference_sequence(&ls, s).map_err(|e| e.to_string())?;
            // Independent check of the definitions: a zero difference exactly
            // at index 0 and at every gap that does not fit in s bits.
            let limit = (1u64 << s) - 1;
            for i in 0..n {
                let want = if i == 0 || ls[i] - ls[i - 1] > limit {
                    0
                } else {
                    ls[i] - ls[i - 1]
                };
                if seq.diffs[i] != want {
                    return Err(format!("s={s}: D_{i} = {} expected {want}", seq.diffs[i]));
                }
            }
            let back = reconstruct_positions(&seq.diffs, &seq.jumps).map_err(|e| e.to_string())?;
            if back != ls {
                return Err(format!("s={s}: reconstruction differs for {ls:?}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} sequences, 0 mismatches"))
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let mut checked = 0;
    let mut strict = 0;
    while checked < 1000 {
        let theta: u8 = r.random_range(1..=2);
        let s = theta * 8;
        let l = r.random_range(1..=32);
        let n = r.random_range(1..400);
        // Mostly small gaps with occasional large ones, some of which land
        // inside a block and make BOC inapplicable.
        let mut ls = Vec::with_capacity(n);
        let mut p = r.random_range(0..1000u64);
        for _ in 0..n {
            ls.push(p);
            p += if r.random_bool(0.05) {
                r.random_range(1..1u64 << (s + 2))
            } else {
                r.random_range(1..1u64 << (s - 3))
            };
        }
        let boc = match BocHeader::build(&ls, l, 8, theta) {
            Ok(b) => b,
            Err(cubepack::Error::OffsetOverflow { .. }) => continue,
            Err(e) => return Err(e.to_string()),
        };
        let jumps = build_difference_sequence(&ls, s)
            .map_err(|e| e.to_string())?
            .jumps
            .len();
        if jumps > boc.base().len() {
            return Err(format!(
                "θ={theta} l={l}: {jumps} jumps > {} bases",
                boc.base().len()
            ));
        }
        strict += usize::from(jumps < boc.base().len());
        checked += 1;
    }
    Ok(format!(
        "{checked} sequences, 0 violations ({strict} strict)"
    ))
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let (mut lpc_smaller, mut schc_smaller) = (0, 0);
    for _ in 0..1000 {
        let n = r.random_range(1..500);
        let run_bias = r.random_range(0.0..1.0);
        let mut ls = Vec::with_capacity(n);
        let mut p = r.random_range(0..10u64);
        for _ in 0..n {
            ls.push(p);
            p += if r.random_bool(run_bias) {
                1
            } else {
                r.random_range(2..50)
            };
        }
        let total = p + 1;
        let width = r.random_range(4..=8);
        let schc = SchcHeader::build(&ls, total, width).map_err(|e| e.to_string())?;
        let lpc = LpcHeader::build(&ls, width).map_err(|e| e.to_string())?;
        let nu = runs_oracle(&ls);
        if schc.run_count() != nu {
            return Err(format!("SCHC holds {} runs, oracle {nu}", schc.run_count()));
        }
        let lpc_wins = lpc.payload_size() < schc.payload_size();
        if lpc_wins != (n as f64 / 2.0 < nu as f64) {
            return Err(format!(
                "N={n} ν={nu}: LPC {} SCHC {}",
                lpc.payload_size(),
                schc.payload_size()
            ));
        }
        let via_header = Header::build(
            Scheme::Lpc,
            &ls,
            total,
            &HeaderParams {
                word_width: width,
                ..Default::default()
            },
        )
        .and_then(|h| {
            let s = Header::build(
                Scheme::Schc,
                &ls,
                total,
                &HeaderParams {
                    word_width: width,
                    ..Default::default()
                },
            )?;
            Ok(h.disk_size() < s.disk_size())
        })
        .map_err(|e| e.to_string())?;
        if via_header != lpc_wins {
            return Err("header disk sizes disagree with payload sizes".into());
        }
        if lpc_wins {
            lpc_smaller += 1;
        } else {
            schc_smaller += 1;
        }
    }
    Ok(format!(
        "1000 relations exact (LPC smaller {lpc_smaller}, SCHC not larger {schc_smaller})"
    ))
}

/// Minimum of Σ f·l over all length vectors satisfying Kraft's inequality.
fn optimal_cost(freqs: &[u64]) -> u64 {
    let k = freqs.len();
    if k == 1 {
        return freqs[0];
    }
    let mut best = u64::MAX;
    let mut lens = vec![1u32; k];
    loop {
        let kraft: f64 = lens.iter().map(|&l| 0.5f64.powi(l as i32)).sum();
        if kraft <= 1.0 + 1e-12 {
            best = best.min(freqs.iter().zip(&lens).map(|(&f, &l)| f * l as u64).sum());
        }
        let mut i = 0;
        loop {
            if i == k {
                return best;
            }
            lens[i] += 1;
            if lens[i] < k as u32 {
                break;
            }
            lens[i] = 1;
            i += 1;
        }
    }
}

fn criterion_5() -> Outcome {
    let mut r = rng(5);
    for case in 0..1000 {
        let k = r.random_range(1..=6);
        let mut freqs = BTreeMap::new();
        while freqs.len() < k {
            freqs.insert(r.random_range(0..1000u32), r.random_range(1..=60u64));
        }
        let book = CodeBook::from_frequencies(&freqs).map_err(|e| e.to_string())?;
        let message: Vec<u32> = freqs
            .iter()
            .flat_map(|(&s, &f)| std::iter::repeat_n(s, f as usize))
            .collect();
        let (stream, _) = book.encode_sequence(&message).map_err(|e| e.to_string())?;
        let fs: Vec<u64> = freqs.values().copied().collect();
        let want = optimal_cost(&fs);
        if stream.bit_len() != want {
            return Err(format!(
                "case {case}: {} bits vs optimal {want} for {fs:?}",
                stream.bit_len()
            ));
        }
    }
    for case in 0..10_000 {
        let alphabet = r.random_range(1..=300u32);
        let len = r.random_range(1..200);
        let skew = r.random_range(0.0..1.0f64);
        let msg: Vec<u32> = (0..len)
            .map(|_| {
                if r.random_bool(skew) {
                    r.random_range(0..alphabet.min(3))
                } else {
                    r.random_range(0..alphabet)
                }
            })
            .collect();
        let mut freqs = BTreeMap::new();
        for &s in &msg {
            *freqs.entry(s).or_insert(0u64) += 1;
        }
        let book = CodeBook::from_frequencies(&freqs).map_err(|e| e.to_string())?;
        let (stream, _) = book.encode_sequence(&msg).map_err(|e| e.to_string())?;
        let back = book
            .decoder(&stream, Default::default())
            .map_err(|e| e.to_string())?
            .collect::<cubepack::Result<Vec<u32>>>()
            .map_err(|e| e.to_string())?;
        if back != msg {
            return Err(format!("round trip {case} differs"));
        }
    }
    Ok("1000 optimal, 10000 round trips".into())
}

fn published(set: usize) -> Params {
    let (mm, mt, dm, dt) = if set == 0 {
        (0.031, 0.021, 6.169, 16.724)
    } else {
        (0.012, 0.128, 6.778, 19.841)
    };
    CacheModelParams::new(
        RepConstants::new(mm, dm).unwrap(),
        RepConstants::new(mt, dt).unwrap(),
        1.0,
        1.0,
        1.0,
    )
    .unwrap()
}

fn published_exact(set: usize) -> ExactParams {
    let q = |n: i64| Rational64::new(n, 1000);
    let (mm, mt, dm, dt) = if set == 0 {
        (q(31), q(21), q(6169), q(16724))
    } else {
        (q(12), q(128), q(6778), q(19841))
    };
    let one = Rational64::from_integer(1);
    CacheModelParams::new(
        RepConstants::new(mm, dm).unwrap(),
        RepConstants::new(mt, dt).unwrap(),
        one,
        one,
        one,
    )
    .unwrap()
}

fn criterion_6() -> Outcome {
    let close = |name: &str, got: f64, want: f64| -> Result<(), String> {
        if (got - want).abs() <= 0.001 {
            Ok(())
        } else {
            Err(format!("{name}: {got:.5} vs {want}"))
        }
    };
    let (a_set, b_set) = (published(0), published(1));
    close(
        "md threshold set A",
        cachemodel::md_sufficient_threshold(&a_set),
        0.632,
    )?;
    close(
        "md threshold set B",
        cachemodel::md_sufficient_threshold(&b_set),
        0.663,
    )?;
    close(
        "table threshold set A",
        cachemodel::table_sufficient_threshold(&a_set)
            .ok_or("table threshold undefined for set A")?,
        0.999,
    )?;
    close(
        "p_m threshold set B",
        cachemodel::md_pm_sufficient_threshold(&b_set).ok_or("p_m threshold undefined for set B")?,
        0.983,
    )?;
    let (a, b) = cachemodel::boundary_line(&a_set);
    close("set A slope", a, 0.368)?;
    close("set A intercept", b, 0.632)?;
    let (a, b) = cachemodel::boundary_line(&b_set);
    close("set B slope", a, 0.343)?;
    close("set B intercept", b, 0.663)?;
    Ok("8 values within ±0.001".into())
}

fn criterion_7() -> Outcome {
    let mut md_wins = 0;
    for set in 0..2 {
        let p = published_exact(set);
        for i in 0..=100 {
            for j in 0..=100 {
                let (pm, pt) = (Rational64::new(i, 100), Rational64::new(j, 100));
                let tm = pm * p.md.m() + (Rational64::from_integer(1) - pm) * p.md.d();
                let tt = pt * p.tbl.m() + (Rational64::from_integer(1) - pt) * p.tbl.d();
                let direct = tm < tt;
                if cachemodel::md_faster(pm, pt, &p) != direct {
                    return Err(format!("set {set} at p_m={pm} p_t={pt}"));
                }
                md_wins += usize::from(direct);
            }
        }
    }
    Ok(format!("2×101×101 grid exact ({md_wins} md-faster points)"))
}

fn desk_relation() -> Relation<f64> {
    generate(&SynthSpec::new(vec![250, 200, 200], 0.01, 0.8, 8)).expect("synthetic relation")
}

fn criterion_8(rel: &Relation<f64>) -> Outcome {
    if rel.len() < 100_000 {
        return Err(format!("only {} nonempty cells", rel.len()));
    }
    let params = HeaderParams::default();
    let disk = |scheme| -> Result<(u64, u64), String> {
        let (st, _) =
            build_md_store(rel, scheme, &params, DEFAULT_BLOCK_SIZE).map_err(|e| e.to_string())?;
        let r = st.size_report();
        Ok((r.disk(), r.memory()))
    };
    let (dhc, dhc_mem) = disk(Scheme::Dhc)?;
    let (dsc, _) = disk(Scheme::Dsc)?;
    let (boc, _) = disk(Scheme::Boc)?;
    let overhead = (dhc_mem - dhc) as f64 / dhc as f64;
    let line = format!(
        "DHC {dhc} < DSC {dsc} < BOC {boc}; DHC memory +{:.3}%",
        overhead * 100.0
    );
    if dhc < dsc && dsc < boc && dhc_mem > dhc && overhead < 0.05 {
        Ok(line)
    } else {
        Err(line)
    }
}

/// The sweep runs on DHC with 8-bit differences so that lookups stay short.
fn sweep_params() -> HeaderParams {
    HeaderParams {
        s_bits: 8,
        ..Default::default()
    }
}

fn criterion_9_10(rel: &Relation<f64>) -> (Outcome, Outcome) {
    let start = Instant::now();
    let setup = || -> Result<_, String> {
        let (md, _) = build_md_store(rel, Scheme::Dhc, &sweep_params(), DEFAULT_BLOCK_SIZE)
            .map_err(|e| e.to_string())?;
        let table =
            TableStore::build_with_page_size(rel, DEFAULT_BLOCK_SIZE).map_err(|e| e.to_string())?;
        Ok((md, table))
    };
    let (mut md, mut table) = match setup() {
        Ok(x) => x,
        Err(e) => return (Err(e.clone()), Err(e)),
    };
    let est = match estimate(&mut md, &mut table, rel, 1000, 10, DEFAULT_MISS_PENALTY_MS) {
        Ok(e) => e,
        Err(e) => return (Err(e.to_string()), Err(e.to_string())),
    };

    let c10 = {
        let md_max = est.md.cold_misses.iter().max().copied().unwrap_or(0);
        let tbl_min = est.table.cold_misses.iter().min().copied().unwrap_or(0);
        let line = format!("1000 probes: md max {md_max} misses, table min {tbl_min} misses");
        if md_max <= 1 && tbl_min >= 2 {
            Ok(line)
        } else {
            Err(line)
        }
    };

    let c9 = (|| {
        let rows = sweep(&mut md, &mut table, rel, &est, &SweepOptions::default())
            .map_err(|e| e.to_string())?;
        // The model, restated from its definition at each pass's memory use.
        let model = |rep: &str, used: f64| -> f64 {
            let (m, d, p) = if rep == "md" {
                (
                    est.md.m_hat_ms,
                    est.md.d_hat_ms,
                    ((used - est.h as f64) / est.c as f64).clamp(0.0, 1.0),
                )
            } else {
                (
                    est.table.m_hat_ms,
                    est.table.d_hat_ms,
                    (used / est.s as f64).min(1.0),
                )
            };
            p * m + (1.0 - p) * d
        };
        let mut worst = [0.0f64; 2];
        for (k, (rep, tol)) in [("md", 0.10), ("table", 0.20)].into_iter().enumerate() {
            let points = summarize_sweep(&rows, rep);
            if points.len() != 20 {
                return Err(format!("{rep}: {} budget points", points.len()));
            }
            for (budget, sim, _, _) in points {
                let mine: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.rep == rep && r.budget_octets == budget)
                    .map(|r| model(rep, r.used_octets as f64))
                    .collect();
                let expected = mine.iter().sum::<f64>() / mine.len() as f64;
                let dev = (sim - expected).abs() / expected;
                worst[k] = worst[k].max(dev);
                if dev > tol {
                    return Err(format!("{rep} at {budget} octets: sim {sim:.4} ms vs model {expected:.4} ms ({:.1}%)", dev * 100.0));
                }
            }
        }
        let elapsed = start.elapsed();
        if elapsed > Duration::from_secs(300) {
            return Err(format!("runtime {elapsed:.1?} exceeds 5 min"));
        }
        Ok(format!(
            "worst deviation md {:.2}% table {:.2}%, {elapsed:.1?}",
            worst[0] * 100.0,
            worst[1] * 100.0
        ))
    })();
    (c9, c10)
}

fn report(id: &str, what: &str, outcome: &Outcome) -> bool {
    match outcome {
        Ok(msg) => println!("PASS criterion {id:>2} {what}: {msg}"),
        Err(msg) => println!("FAIL criterion {id:>2} {what}: {msg}"),
    }
    outcome.is_ok()
}

fn main() -> ExitCode {
    let mut ok = true;
    ok &= report("1", "scheme lookups match the relation", &criterion_1());
    ok &= report("2", "difference sequence reconstruction", &criterion_2());
    ok &= report("3", "jumps never exceed BOC bases", &criterion_3());
    ok &= report("4", "LPC/SCHC size law", &criterion_4());
    ok &= report("5", "Huffman optimality and round trip", &criterion_5());
    ok &= report(
        "6",
        "threshold values from published constants",
        &criterion_6(),
    );
    ok &= report(
        "7",
        "boundary test matches direct comparison",
        &criterion_7(),
    );
    let rel = desk_relation();
    ok &= report("8", "size ordering on clustered data", &criterion_8(&rel));
    let (c9, c10) = criterion_9_10(&rel);
    ok &= report("9", "model fit across memory sweep", &c9);
    ok &= report("10", "cold-cache block touches", &c10);
    println!(
        "SKIP criterion 11 absolute sizes, times and speedup factors: declared not reproducible at desk scale"
    );
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
