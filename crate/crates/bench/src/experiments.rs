//! Size reports, constant estimation and memory sweeps over a
//! multidimensional store and a table store built from one relation.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use cubepack::cachemodel::{self, ModelConfig};
use cubepack::{
    BlockObserver, Error, HeaderParams, MultidimStore, Relation, Result, Scheme, TableStore,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::simcache::SimCache;

/// Simulated cost of one block miss when no estimate is supplied.
pub const DEFAULT_MISS_PENALTY_MS: f64 = 6.0;

pub trait PointStore {
    fn query(&self, coords: &[u32]) -> Result<Option<f64>>;
    fn set_observer(&mut self, observer: Option<Arc<dyn BlockObserver>>);
}

impl PointStore for MultidimStore<f64> {
    fn query(&self, coords: &[u32]) -> Result<Option<f64>> {
        self.point_query(coords)
    }

    fn set_observer(&mut self, observer: Option<Arc<dyn BlockObserver>>) {
        MultidimStore::set_observer(self, observer)
    }
}

impl PointStore for TableStore<f64> {
    fn query(&self, coords: &[u32]) -> Result<Option<f64>> {
        self.point_query(coords)
    }

    fn set_observer(&mut self, observer: Option<Arc<dyn BlockObserver>>) {
        TableStore::set_observer(self, observer)
    }
}

/// Builds a store, widening the BOC offset by one octet at a time when a
/// block's span does not fit.
pub fn build_md_store(
    rel: &Relation<f64>,
    scheme: Scheme,
    params: &HeaderParams,
    block_size: usize,
) -> Result<(MultidimStore<f64>, HeaderParams)> {
    let mut p = *params;
    loop {
        match MultidimStore::build_with_block_size(rel, scheme, &p, block_size) {
            Err(Error::OffsetOverflow { .. })
                if scheme == Scheme::Boc
                    && p.offset_width < 7
                    && p.offset_width + 1 < p.word_width =>
            {
                p.offset_width += 1;
            }
            other => return other.map(|s| (s, p)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeRow {
    pub representation: String,
    pub octets: u64,
    /// Percent of the table representation's size.
    pub percent: f64,
}

#[derive(Clone, Debug)]
pub struct SizeTable {
    pub rows: Vec<SizeRow>,
    /// θ actually used for BOC after any widening.
    pub boc_offset_width: u8,
}

impl SizeTable {
    pub fn octets(&self, label: &str) -> Option<u64> {
        self.rows
            .iter()
            .find(|r| r.representation == label)
            .map(|r| r.octets)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn size_table(
    rel: &Relation<f64>,
    params: &HeaderParams,
    block_size: usize,
) -> Result<SizeTable> {
    let table = TableStore::build_with_page_size(rel, block_size)?
        .size_report()
        .total();
    let mut rows = vec![("table".to_string(), table)];
    let mut boc_offset_width = params.offset_width;
    for scheme in Scheme::ALL {
        let (st, used) = build_md_store(rel, scheme, params, block_size)?;
        let r = st.size_report();
        if scheme == Scheme::Boc {
            boc_offset_width = used.offset_width;
        }
        if scheme == Scheme::Dhc {
            rows.push(("DHC disk".into(), r.disk()));
            rows.push(("DHC memory".into(), r.memory()));
        } else {
            rows.push((scheme.to_string(), r.disk()));
        }
    }
    Ok(SizeTable {
        rows: rows
            .into_iter()
            .map(|(representation, octets)| SizeRow {
                representation,
                octets,
                percent: 100.0 * octets as f64 / table as f64,
            })
            .collect(),
        boc_offset_width,
    })
}

/// `n` stored cells drawn uniformly with replacement.
pub fn sample_stored(rel: &Relation<f64>, n: usize, seed: u64) -> Vec<Vec<u32>> {
    let cells: Vec<&[u32]> = rel.iter().map(|(c, _)| c).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| cells[rng.random_range(0..cells.len())].to_vec())
        .collect()
}

#[derive(Clone, Debug)]
pub struct RepEstimate {
    /// Warm-pass average wall-clock time per query.
    pub m_hat_ms: f64,
    /// `M̂` plus the average cold miss count times the miss penalty.
    pub d_hat_ms: f64,
    pub cold_wall_ms: f64,
    pub cold_misses: Vec<u64>,
    pub mean_cold_misses: f64,
    pub warm_misses: u64,
}

/// Times below this are treated as the clock's resolution.
const MIN_TIME_MS: f64 = 1e-6;

pub fn estimate_rep<S: PointStore + ?Sized>(
    store: &mut S,
    sample: &[Vec<u32>],
    miss_penalty_ms: f64,
) -> Result<RepEstimate> {
    if sample.is_empty() {
        return Err(Error::InvalidParameter(
            "sample size must be at least 1".into(),
        ));
    }
    let cache = Arc::new(SimCache::unbounded());
    store.set_observer(Some(cache.clone()));
    let result = (|| {
        let mut cold_misses = Vec::with_capacity(sample.len());
        let mut cold_wall = 0.0;
        for q in sample {
            cache.clear();
            let before = cache.misses();
            let t = Instant::now();
            store.query(q)?;
            cold_wall += t.elapsed().as_secs_f64() * 1e3;
            cold_misses.push(cache.misses() - before);
        }
        cache.clear();
        for q in sample {
            store.query(q)?;
        }
        let before = cache.misses();
        let t = Instant::now();
        for q in sample {
            store.query(q)?;
        }
        let warm = t.elapsed().as_secs_f64() * 1e3;
        let n = sample.len() as f64;
        let m_hat = (warm / n).max(MIN_TIME_MS);
        let mean_cold = cold_misses.iter().sum::<u64>() as f64 / n;
        Ok(RepEstimate {
            m_hat_ms: m_hat,
            d_hat_ms: m_hat + mean_cold * miss_penalty_ms,
            cold_wall_ms: cold_wall / n,
            cold_misses,
            mean_cold_misses: mean_cold,
            warm_misses: cache.misses() - before,
        })
    })();
    store.set_observer(None);
    result
}

#[derive(Clone, Debug)]
pub struct Estimate {
    pub md: RepEstimate,
    pub table: RepEstimate,
    /// `H`: multidimensional preload.
    pub h: u64,
    /// `C`: compressed cell array.
    pub c: u64,
    /// `S`: table representation total.
    pub s: u64,
    /// Index pages the table keeps in memory.
    pub table_preload: u64,
}

impl Estimate {
    pub fn config(&self) -> ModelConfig {
        ModelConfig {
            m_m: self.md.m_hat_ms,
            d_m: self.md.d_hat_ms,
            m_t: self.table.m_hat_ms,
            d_t: self.table.d_hat_ms,
            h: self.h as f64,
            c: self.c as f64,
            s: self.s as f64,
        }
    }
}

pub fn estimate(
    md: &mut MultidimStore<f64>,
    table: &mut TableStore<f64>,
    rel: &Relation<f64>,
    samples: usize,
    seed: u64,
    miss_penalty_ms: f64,
) -> Result<Estimate> {
    let sample = sample_stored(rel, samples, seed);
    let md_est = estimate_rep(md, &sample, miss_penalty_ms)?;
    let tbl_est = estimate_rep(table, &sample, miss_penalty_ms)?;
    let mr = md.size_report();
    let tr = table.size_report();
    Ok(Estimate {
        md: md_est,
        table: tbl_est,
        h: mr.preload(),
        c: mr.cells,
        s: tr.total(),
        table_preload: tr.preload,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub rep: &'static str,
    pub budget_octets: u64,
    pub pass: usize,
    pub used_octets: u64,
    pub misses: u64,
    pub avg_sim_ms: f64,
    pub model_ms: f64,
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    /// Total memory budgets; when absent, `points` evenly spaced budgets
    /// from the preload size up to full residency.
    pub budgets: Option<Vec<u64>>,
    pub points: usize,
    pub samples: usize,
    pub passes: usize,
    pub seed: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            budgets: None,
            points: 20,
            samples: 300,
            passes: 100,
            seed: 1,
        }
    }
}

fn even_budgets(preload: u64, span: u64, points: usize) -> Vec<u64> {
    if points <= 1 {
        return vec![preload + span];
    }
    (0..points)
        .map(|i| preload + (span as u128 * i as u128 / (points as u128 - 1)) as u64)
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn sweep_rep<S: PointStore + ?Sized>(
    store: &mut S,
    rep: &'static str,
    cells: &[&[u32]],
    preload: u64,
    budgets: &[u64],
    est: &RepEstimate,
    model: &dyn Fn(f64) -> Result<f64>,
    opts: &SweepOptions,
    out: &mut Vec<SweepRow>,
) -> Result<()> {
    let per_miss = (est.d_hat_ms - est.m_hat_ms) / est.mean_cold_misses.max(f64::MIN_POSITIVE);
    for &budget in budgets {
        let cache = Arc::new(SimCache::new(budget.saturating_sub(preload)));
        store.set_observer(Some(cache.clone()));
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for pass in 0..opts.passes {
            let before = cache.misses();
            let mut resident_sum = 0u128;
            for _ in 0..opts.samples {
                resident_sum += cache.resident() as u128;
                let q = cells[rng.random_range(0..cells.len())];
                if let Err(e) = store.query(q) {
                    store.set_observer(None);
                    return Err(e);
                }
            }
            let n = opts.samples as f64;
            let misses = cache.misses() - before;
            let used = preload as f64 + resident_sum as f64 / n;
            out.push(SweepRow {
                rep,
                budget_octets: budget,
                pass,
                used_octets: used.round() as u64,
                misses,
                avg_sim_ms: est.m_hat_ms + misses as f64 / n * per_miss,
                model_ms: model(used)?,
            });
        }
    }
    store.set_observer(None);
    Ok(())
}

/// Replays uniform samples of stored cells through a bounded [`SimCache`]
/// at each budget and compares the simulated time per query with the
/// model curves at the memory actually in use.
pub fn sweep(
    md: &mut MultidimStore<f64>,
    table: &mut TableStore<f64>,
    rel: &Relation<f64>,
    est: &Estimate,
    opts: &SweepOptions,
) -> Result<Vec<SweepRow>> {
    if opts.samples == 0 || opts.passes == 0 {
        return Err(Error::InvalidParameter(
            "samples and passes must be positive".into(),
        ));
    }
    let params = est.config().params()?;
    let cells: Vec<&[u32]> = rel.iter().map(|(c, _)| c).collect();
    let mut rows = Vec::new();

    let md_budgets = opts
        .budgets
        .clone()
        .unwrap_or_else(|| even_budgets(est.h, est.c, opts.points));
    let md_model = |x: f64| cachemodel::t_m(x.max(params.h), &params);
    sweep_rep(
        md,
        "md",
        &cells,
        est.h,
        &md_budgets,
        &est.md,
        &md_model,
        opts,
        &mut rows,
    )?;

    let tbl_budgets = opts
        .budgets
        .clone()
        .unwrap_or_else(|| even_budgets(est.table_preload, est.s - est.table_preload, opts.points));
    let tbl_model = |x: f64| cachemodel::t_t(x, &params);
    sweep_rep(
        table,
        "table",
        &cells,
        est.table_preload,
        &tbl_budgets,
        &est.table,
        &tbl_model,
        opts,
        &mut rows,
    )?;
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Per budget: mean simulated time, mean model time, relative deviation.
pub fn summarize_sweep(rows: &[SweepRow], rep: &str) -> Vec<(u64, f64, f64, f64)> {
    let mut out: Vec<(u64, f64, f64, usize)> = Vec::new();
    for r in rows.iter().filter(|r| r.rep == rep) {
        match out.last_mut() {
            Some(last) if last.0 == r.budget_octets => {
                last.1 += r.avg_sim_ms;
                last.2 += r.model_ms;
                last.3 += 1;
            }
            _ => out.push((r.budget_octets, r.avg_sim_ms, r.model_ms, 1)),
        }
    }
    out.into_iter()
        .map(|(b, sim, model, n)| {
            let (sim, model) = (sim / n as f64, model / n as f64);
            (b, sim, model, (sim - model).abs() / model)
        })
        .collect()
}
