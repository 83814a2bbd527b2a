//! Loading relations from delimited text.
//!
//! Each row is `dimval_1,…,dimval_n,measure`. Dimension value lists are
//! collected in first-seen order unless sorted order is requested.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::relation::{Dimension, DimensionSchema, Relation};

#[derive(Clone, Debug)]
pub struct IngestOptions {
    /// Skip the first line.
    pub has_header: bool,
    /// Order each dimension's values lexicographically instead of by first
    /// appearance.
    pub sorted_values: bool,
    pub delimiter: u8,
    /// Names for the dimension columns; `d0, d1, …` when absent.
    pub dimension_names: Option<Vec<String>>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            has_header: false,
            sorted_values: false,
            delimiter: b',',
            dimension_names: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Ingested<V> {
    pub relation: Relation<V>,
    /// Rows whose key had already been seen (the later row wins).
    pub duplicates: u64,
}

pub fn ingest_path<V: Measure>(path: &Path, opts: &IngestOptions) -> Result<Ingested<V>> {
    ingest_delimited(File::open(path)?, opts)
}

pub fn ingest_delimited<V: Measure, R: Read>(
    input: R,
    opts: &IngestOptions,
) -> Result<Ingested<V>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .delimiter(opts.delimiter)
        .flexible(true)
        .from_reader(input);

    let mut arity = opts.dimension_names.as_ref().map(Vec::len);
    let mut values: Vec<Vec<String>> = Vec::new();
    let mut seen: Vec<HashMap<String, u32>> = Vec::new();
    // Rows keyed by first-seen value indices; remapped if sorting is requested.
    let mut rows: HashMap<Vec<u32>, V> = HashMap::new();
    let mut duplicates = 0u64;

    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.is_empty() || (record.len() == 1 && record[0].trim().is_empty()) {
            continue;
        }
        let n = *arity.get_or_insert(record.len().saturating_sub(1));
        if n == 0 || record.len() != n + 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected {} columns, found {}", n + 1, record.len()),
            });
        }
        if values.is_empty() {
            values = vec![Vec::new(); n];
            seen = vec![HashMap::new(); n];
        }
        let raw = record[n].trim();
        let measure: V = raw.parse().map_err(|_| Error::Parse {
            line,
            message: format!("measure {raw:?} is not numeric"),
        })?;
        let key = (0..n)
            .map(|k| {
                let v = record[k].trim();
                if let Some(&i) = seen[k].get(v) {
                    i
                } else {
                    let i = values[k].len() as u32;
                    values[k].push(v.to_string());
                    seen[k].insert(v.to_string(), i);
                    i
                }
            })
            .collect::<Vec<u32>>();
        if rows.insert(key, measure).is_some() {
            duplicates += 1;
        }
    }

    if values.is_empty() {
        return Err(Error::EmptyRelation);
    }

    let n = values.len();
    let names = opts
        .dimension_names
        .clone()
        .unwrap_or_else(|| (0..n).map(|k| format!("d{k}")).collect());

    // remap[k][first_seen_index] = final index
    let remap: Vec<Vec<u32>> = if opts.sorted_values {
        values
            .iter_mut()
            .map(|vals| {
                let mut order: Vec<u32> = (0..vals.len() as u32).collect();
                order.sort_by(|&a, &b| vals[a as usize].cmp(&vals[b as usize]));
                let mut inv = vec![0u32; vals.len()];
                for (new, &old) in order.iter().enumerate() {
                    inv[old as usize] = new as u32;
                }
                let sorted = order.iter().map(|&i| vals[i as usize].clone()).collect();
                *vals = sorted;
                inv
            })
            .collect()
    } else {
        Vec::new()
    };

    let dims = names
        .into_iter()
        .zip(values)
        .map(|(name, vals)| Dimension::new(name, vals))
        .collect::<Result<Vec<_>>>()?;
    let mut relation = Relation::new(DimensionSchema::new(dims)?);
    for (mut key, v) in rows {
        if opts.sorted_values {
            for (k, c) in key.iter_mut().enumerate() {
                *c = remap[k][*c as usize];
            }
        }
        relation.insert(key, v)?;
    }
    Ok(Ingested {
        relation,
        duplicates,
    })
}
