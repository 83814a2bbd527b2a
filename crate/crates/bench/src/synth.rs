//! Deterministic synthetic relations.
//!
//! `clustering = 0` scatters the nonempty cells uniformly over the
//! linearized array; `clustering = 1` packs them into one contiguous run.
//! In between, cells come in runs whose lengths are `1 + Geometric(1 − κ)`
//! (mean `1/(1 − κ)`), separated by gaps with exponentially distributed
//! weights.

use cubepack::{DimensionSchema, LogicalPosition, Relation, Result};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Geometric};

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub cardinalities: Vec<u64>,
    /// Fraction of nonempty cells, in (0, 1].
    pub density: f64,
    /// κ in [0, 1].
    pub clustering: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(cardinalities: Vec<u64>, density: f64, clustering: f64, seed: u64) -> Self {
        SynthSpec {
            cardinalities,
            density,
            clustering,
            seed,
        }
    }
}

/// Sorted logical positions for `spec`.
pub fn positions(spec: &SynthSpec) -> Result<Vec<u64>> {
    let schema = DimensionSchema::from_cardinalities(&spec.cardinalities)?;
    let total = schema.total_cells();
    if !(spec.density > 0.0 && spec.density <= 1.0) {
        return Err(cubepack::Error::InvalidParameter(format!(
            "density {} outside (0, 1]",
            spec.density
        )));
    }
    if !(0.0..=1.0).contains(&spec.clustering) {
        return Err(cubepack::Error::InvalidParameter(format!(
            "clustering {} outside [0, 1]",
            spec.clustering
        )));
    }
    let n = ((spec.density * total as f64).round() as u64).clamp(1, total);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let empties = total - n;

    if spec.clustering == 0.0 || n == total {
        let total = usize::try_from(total)
            .map_err(|_| cubepack::Error::InvalidParameter("array too large to sample".into()))?;
        let mut ps: Vec<u64> = index::sample(&mut rng, total, n as usize)
            .into_iter()
            .map(|i| i as u64)
            .collect();
        ps.sort_unstable();
        return Ok(ps);
    }

    let mut runs: Vec<u64> = if spec.clustering >= 1.0 {
        vec![n]
    } else {
        let geo = Geometric::new(1.0 - spec.clustering).expect("p in (0, 1]");
        let mut runs = Vec::new();
        let mut left = n;
        while left > 0 {
            let len = (1 + geo.sample(&mut rng)).min(left);
            runs.push(len);
            left -= len;
        }
        runs
    };
    // Runs need a separating empty cell between them.
    while runs.len() as u64 > empties + 1 {
        let last = runs.pop().unwrap();
        *runs.last_mut().unwrap() += last;
    }

    // Gap slots: before the first run, between runs, after the last.
    let slots = runs.len() + 1;
    let spare = empties - (runs.len() as u64 - 1);
    let weights: Vec<f64> = (0..slots).map(|_| Exp1.sample(&mut rng)).collect();
    let sum: f64 = weights.iter().sum();
    let mut gaps = Vec::with_capacity(slots);
    let (mut acc, mut given) = (0.0, 0u64);
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        let upto = if i + 1 == slots {
            spare
        } else {
            ((acc / sum) * spare as f64).floor().min(spare as f64) as u64
        };
        let g = upto.saturating_sub(given);
        given += g;
        gaps.push(g + u64::from(i > 0 && i < slots - 1));
    }

    let mut out = Vec::with_capacity(n as usize);
    let mut p = 0u64;
    for (len, gap) in runs.iter().zip(&gaps) {
        p += gap;
        out.extend(p..p + len);
        p += len;
    }
    debug_assert_eq!(p + gaps[slots - 1], total);
    Ok(out)
}

/// A relation over `d0, d1, …` with values `"0", "1", …` and uniform
/// random measures.
pub fn generate(spec: &SynthSpec) -> Result<Relation<f64>> {
    let ps = positions(spec)?;
    let schema = DimensionSchema::from_cardinalities(&spec.cardinalities)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut rel = Relation::new(schema);
    for p in ps {
        let coords = rel.schema().decode(LogicalPosition(p))?;
        let v = (rng.random_range(0.0..1_000_000.0f64) * 100.0).round() / 100.0;
        rel.insert(coords, v)?;
    }
    Ok(rel)
}
