//! Dimension schemas, relations, and the row-major logical position.
//!
//! A relation maps coordinate vectors (one value index per dimension) to a
//! measure. Cells are linearized row-major with the last dimension varying
//! fastest, so the logical position of `(i_0, …, i_{n-1})` is
//! `Σ i_k · Π_{j>k} |D_j|`.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::wire::{self, Reader};

/// Index of a cell in the uncompressed, linearized array.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LogicalPosition(pub u64);

impl LogicalPosition {
    pub fn get(self) -> u64 {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dimension {
    name: String,
    values: Vec<String>,
    lookup: HashMap<String, u32>,
}

impl Dimension {
    pub fn new(name: impl Into<String>, values: Vec<String>) -> Result<Self> {
        let name = name.into();
        if values.is_empty() {
            return Err(Error::Schema(format!("dimension {name:?} has no values")));
        }
        if values.len() > u32::MAX as usize {
            return Err(Error::Schema(format!(
                "dimension {name:?} has too many values"
            )));
        }
        let mut lookup = HashMap::with_capacity(values.len());
        for (i, v) in values.iter().enumerate() {
            if lookup.insert(v.clone(), i as u32).is_some() {
                return Err(Error::Schema(format!(
                    "dimension {name:?} repeats value {v:?}"
                )));
            }
        }
        Ok(Dimension {
            name,
            values,
            lookup,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn cardinality(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn index_of(&self, value: &str) -> Option<u32> {
        self.lookup.get(value).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionSchema {
    dims: Vec<Dimension>,
    /// `strides[k] = Π_{j>k} |D_j|`
    strides: Vec<u64>,
    total_cells: u64,
}

impl DimensionSchema {
    pub fn new(dims: Vec<Dimension>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Schema("schema needs at least one dimension".into()));
        }
        let mut strides = vec![0u64; dims.len()];
        let mut acc: u64 = 1;
        for k in (0..dims.len()).rev() {
            strides[k] = acc;
            acc = acc
                .checked_mul(dims[k].cardinality())
                .ok_or(Error::CellCountOverflow)?;
        }
        Ok(DimensionSchema {
            dims,
            strides,
            total_cells: acc,
        })
    }

    /// Schema whose dimension values are the decimal strings `0..card`.
    pub fn from_cardinalities(cards: &[u64]) -> Result<Self> {
        let dims = cards
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let values = (0..c).map(|v| v.to_string()).collect();
                Dimension::new(format!("d{k}"), values)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims)
    }

    pub fn dims(&self) -> &[Dimension] {
        &self.dims
    }

    pub fn arity(&self) -> usize {
        self.dims.len()
    }

    pub fn cardinalities(&self) -> Vec<u64> {
        self.dims.iter().map(Dimension::cardinality).collect()
    }

    pub fn total_cells(&self) -> u64 {
        self.total_cells
    }

    pub fn check_coords(&self, coords: &[u32]) -> Result<()> {
        if coords.len() != self.dims.len() {
            return Err(Error::Arity {
                expected: self.dims.len(),
                got: coords.len(),
            });
        }
        for (dim, (&c, d)) in coords.iter().zip(&self.dims).enumerate() {
            if c as u64 >= d.cardinality() {
                return Err(Error::InvalidCoordinate {
                    dim,
                    index: c as u64,
                    cardinality: d.cardinality(),
                });
            }
        }
        Ok(())
    }

    pub fn encode(&self, coords: &[u32]) -> Result<LogicalPosition> {
        self.check_coords(coords)?;
        Ok(LogicalPosition(
            coords
                .iter()
                .zip(&self.strides)
                .map(|(&c, &s)| c as u64 * s)
                .sum(),
        ))
    }

    pub fn decode(&self, pos: LogicalPosition) -> Result<Vec<u32>> {
        if pos.0 >= self.total_cells {
            return Err(Error::InvalidPosition {
                position: pos.0,
                total: self.total_cells,
            });
        }
        let mut rest = pos.0;
        Ok(self
            .strides
            .iter()
            .map(|&s| {
                let c = rest / s;
                rest %= s;
                c as u32
            })
            .collect())
    }

    /// Resolves dimension values to coordinate indices.
    pub fn resolve<S: AsRef<str>>(&self, values: &[S]) -> Result<Vec<u32>> {
        if values.len() != self.dims.len() {
            return Err(Error::Arity {
                expected: self.dims.len(),
                got: values.len(),
            });
        }
        values
            .iter()
            .zip(&self.dims)
            .map(|(v, d)| {
                d.index_of(v.as_ref()).ok_or_else(|| {
                    Error::Schema(format!(
                        "value {:?} not in dimension {:?}",
                        v.as_ref(),
                        d.name()
                    ))
                })
            })
            .collect()
    }

    pub(crate) fn write_to(&self, out: &mut Vec<u8>) {
        wire::put_u32(out, self.dims.len() as u32);
        for d in &self.dims {
            wire::put_str(out, &d.name);
            wire::put_u64(out, d.values.len() as u64);
            for v in &d.values {
                wire::put_str(out, v);
            }
        }
    }

    pub(crate) fn read_from(r: &mut Reader<'_>) -> Result<Self> {
        let n = r.u32()? as usize;
        let mut dims = Vec::with_capacity(n);
        for _ in 0..n {
            let name = r.str()?;
            let count = r.len()?;
            let values = (0..count).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
            dims.push(Dimension::new(name, values)?);
        }
        Self::new(dims)
    }
}

/// A set of (coordinates → measure) entries over a schema.
///
/// Cells are keyed by their coordinate vectors; lexicographic order on the
/// keys coincides with logical-position order.
#[derive(Clone, Debug)]
pub struct Relation<V> {
    schema: DimensionSchema,
    cells: BTreeMap<Vec<u32>, V>,
}

impl<V: Measure> Relation<V> {
    pub fn new(schema: DimensionSchema) -> Self {
        Relation {
            schema,
            cells: BTreeMap::new(),
        }
    }

    pub fn schema(&self) -> &DimensionSchema {
        &self.schema
    }

    /// Inserts a cell, returning the previous measure if the key existed.
    pub fn insert(&mut self, coords: Vec<u32>, value: V) -> Result<Option<V>> {
        self.schema.check_coords(&coords)?;
        Ok(self.cells.insert(coords, value))
    }

    pub fn get(&self, coords: &[u32]) -> Option<V> {
        self.cells.get(coords).copied()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], V)> + '_ {
        self.cells.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    /// The strictly increasing logical positions of the nonempty cells.
    pub fn logical_positions(&self) -> Result<Vec<u64>> {
        Ok(self
            .entries_by_position()?
            .into_iter()
            .map(|(p, _)| p)
            .collect())
    }

    /// Nonempty cells as `(logical position, measure)` in position order.
    pub fn entries_by_position(&self) -> Result<Vec<(u64, V)>> {
        if self.cells.is_empty() {
            return Err(Error::EmptyRelation);
        }
        let mut out = self
            .cells
            .iter()
            .map(|(k, &v)| Ok((self.schema.encode(k)?.0, v)))
            .collect::<Result<Vec<_>>>()?;
        // Already sorted for row-major order; the sort is a no-op guard.
        out.sort_unstable_by_key(|&(p, _)| p);
        Ok(out)
    }
}
