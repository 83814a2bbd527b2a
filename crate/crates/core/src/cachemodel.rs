//! Expected retrieval time under partial caching.
//!
//! A representation answers a query in time `M` when the needed data is
//! cached and `D` when it must go to disk; with cached fraction `p` the
//! expectation is `p·M + (1 − p)·D`. The functions here compare the
//! multidimensional representation (`M_m`, `D_m`) with the table
//! representation (`M_t`, `D_t`) and trace both as functions of available
//! memory.
//!
//! Everything is generic over [`ModelScalar`], so the same formulas run in
//! `f64` or in exact rational arithmetic.

use std::cmp::Ordering;
use std::fmt::Debug;
use std::path::Path;

use num_rational::Rational64;
use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait ModelScalar: Num + PartialOrd + Copy + Debug {}

impl<T: Num + PartialOrd + Copy + Debug> ModelScalar for T {}

fn min<T: ModelScalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

fn check_probability<T: ModelScalar>(p: T) -> Result<()> {
    if p < T::zero() || p > T::one() {
        return Err(Error::Domain(format!("probability {p:?} outside [0, 1]")));
    }
    Ok(())
}

/// In-memory (`m`) and disk-path (`d`) retrieval times of one representation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RepConstants<T> {
    m: T,
    d: T,
}

impl<T: ModelScalar> RepConstants<T> {
    pub fn new(m: T, d: T) -> Result<Self> {
        if !(T::zero() < m && m < d) {
            return Err(Error::Domain(format!(
                "need 0 < M < D, got M={m:?} D={d:?}"
            )));
        }
        Ok(RepConstants { m, d })
    }

    pub fn m(&self) -> T {
        self.m
    }

    pub fn d(&self) -> T {
        self.d
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CacheModelParams<T> {
    pub md: RepConstants<T>,
    pub tbl: RepConstants<T>,
    /// Size preloaded for the multidimensional representation.
    pub h: T,
    /// Size of the compressed cell array.
    pub c: T,
    /// Total size of the table representation.
    pub s: T,
}

impl<T: ModelScalar> CacheModelParams<T> {
    pub fn new(md: RepConstants<T>, tbl: RepConstants<T>, h: T, c: T, s: T) -> Result<Self> {
        if !(h > T::zero() && c > T::zero() && s > T::zero()) {
            return Err(Error::Domain("H, C and S must be positive".into()));
        }
        Ok(CacheModelParams { md, tbl, h, c, s })
    }
}

/// Which representation is faster once fully cached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InMemoryWinner {
    /// `M_t < M_m`
    Table,
    /// `M_m < M_t`
    Multidim,
    Tie,
}

pub fn in_memory_winner<T: ModelScalar>(p: &CacheModelParams<T>) -> InMemoryWinner {
    if p.tbl.m < p.md.m {
        InMemoryWinner::Table
    } else if p.md.m < p.tbl.m {
        InMemoryWinner::Multidim
    } else {
        InMemoryWinner::Tie
    }
}

/// `p·M + (1 − p)·D`
pub fn expected_time<T: ModelScalar>(p: T, c: &RepConstants<T>) -> Result<T> {
    check_probability(p)?;
    Ok(p * c.m + (T::one() - p) * c.d)
}

pub fn cache_fraction<T: ModelScalar>(cached: T, total: T) -> Result<T> {
    if total.partial_cmp(&T::zero()) != Some(Ordering::Greater)
        || cached < T::zero()
        || cached > total
    {
        return Err(Error::Domain(format!(
            "cached size {cached:?} must lie in [0, {total:?}]"
        )));
    }
    Ok(cached / total)
}

/// `(D_t − D_m)/(D_t − M_t)`: below this `p_t`, the multidimensional
/// representation is faster whatever `p_m` is.
pub fn md_sufficient_threshold<T: ModelScalar>(p: &CacheModelParams<T>) -> T {
    (p.tbl.d - p.md.d) / (p.tbl.d - p.tbl.m)
}

/// `(D_t − M_m)/(D_t − M_t)`: above this `p_t`, the table representation is
/// faster whatever `p_m` is. Only meaningful when `M_t ≤ M_m`.
pub fn table_sufficient_threshold<T: ModelScalar>(p: &CacheModelParams<T>) -> Option<T> {
    (p.tbl.m <= p.md.m).then(|| (p.tbl.d - p.md.m) / (p.tbl.d - p.tbl.m))
}

/// `(D_m − M_t)/(D_m − M_m)`: above this `p_m`, the multidimensional
/// representation is faster whatever `p_t` is. Only meaningful when
/// `M_m ≤ M_t`.
pub fn md_pm_sufficient_threshold<T: ModelScalar>(p: &CacheModelParams<T>) -> Option<T> {
    (p.md.m <= p.tbl.m).then(|| (p.md.d - p.tbl.m) / (p.md.d - p.md.m))
}

/// `(slope, intercept)` of the boundary line `p_t = slope·p_m + intercept`.
pub fn boundary_line<T: ModelScalar>(p: &CacheModelParams<T>) -> (T, T) {
    let span = p.tbl.d - p.tbl.m;
    ((p.md.d - p.md.m) / span, (p.tbl.d - p.md.d) / span)
}

/// True iff the multidimensional representation has the strictly smaller
/// expected time, decided by the boundary line. The comparison is
/// multiplied through by `D_t − M_t > 0` so it stays exact.
pub fn md_faster<T: ModelScalar>(p_m: T, p_t: T, p: &CacheModelParams<T>) -> bool {
    p_t * (p.tbl.d - p.tbl.m) < (p.md.d - p.md.m) * p_m + (p.tbl.d - p.md.d)
}

/// `T_m(x) = M_m·p + D_m·(1 − p)` with `p = min((x − H)/C, 1)`.
pub fn t_m<T: ModelScalar>(x: T, p: &CacheModelParams<T>) -> Result<T> {
    if x < p.h {
        return Err(Error::Domain(format!(
            "memory {x:?} is below the preload size {:?}",
            p.h
        )));
    }
    expected_time(min((x - p.h) / p.c, T::one()), &p.md)
}

/// `T_t(x) = M_t·p + D_t·(1 − p)` with `p = min(x/S, 1)`.
pub fn t_t<T: ModelScalar>(x: T, p: &CacheModelParams<T>) -> Result<T> {
    if x < T::zero() {
        return Err(Error::Domain(format!("memory {x:?} is negative")));
    }
    expected_time(min(x / p.s, T::one()), &p.tbl)
}

pub type Params = CacheModelParams<f64>;
pub type ExactParams = CacheModelParams<Rational64>;

/// Flat key-value form of the model constants, as written by the
/// benchmark's estimation step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub m_m: f64,
    pub d_m: f64,
    pub m_t: f64,
    pub d_t: f64,
    pub h: f64,
    pub c: f64,
    pub s: f64,
}

impl ModelConfig {
    pub fn params(&self) -> Result<Params> {
        CacheModelParams::new(
            RepConstants::new(self.m_m, self.d_m)?,
            RepConstants::new(self.m_t, self.d_t)?,
            self.h,
            self.c,
            self.s,
        )
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat struct of floats serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set_a() -> Params {
        CacheModelParams::new(
            RepConstants::new(0.031, 6.169).unwrap(),
            RepConstants::new(0.021, 16.724).unwrap(),
            1000.0,
            2000.0,
            10_000.0,
        )
        .unwrap()
    }

    fn set_b() -> Params {
        CacheModelParams::new(
            RepConstants::new(0.012, 6.778).unwrap(),
            RepConstants::new(0.128, 19.841).unwrap(),
            1000.0,
            2000.0,
            10_000.0,
        )
        .unwrap()
    }

    #[test]
    fn expected_time_ends_and_midpoint() {
        let c = RepConstants::new(0.021, 16.724).unwrap();
        assert_eq!(expected_time(1.0, &c).unwrap(), 0.021);
        assert_eq!(expected_time(0.0, &c).unwrap(), 16.724);
        assert!((expected_time(0.5f64, &c).unwrap() - 8.3725).abs() < 1e-12);
        assert!(expected_time(1.5, &c).is_err());
    }

    #[test]
    fn constants_validated() {
        assert!(RepConstants::new(2.0, 1.0).is_err());
        assert!(RepConstants::new(0.0, 1.0).is_err());
    }

    #[test]
    fn fractions() {
        assert_eq!(cache_fraction(0.0, 8.0).unwrap(), 0.0);
        assert_eq!(cache_fraction(8.0, 8.0).unwrap(), 1.0);
        assert_eq!(cache_fraction(2.0, 8.0).unwrap(), 0.25);
        assert!(cache_fraction(9.0, 8.0).is_err());
    }

    #[test]
    fn case_applicability() {
        assert_eq!(in_memory_winner(&set_a()), InMemoryWinner::Table);
        assert!(table_sufficient_threshold(&set_a()).is_some());
        assert!(md_pm_sufficient_threshold(&set_a()).is_none());
        assert_eq!(in_memory_winner(&set_b()), InMemoryWinner::Multidim);
        assert!(table_sufficient_threshold(&set_b()).is_none());
        assert!(md_pm_sufficient_threshold(&set_b()).is_some());
    }

    #[test]
    fn boundaries_at_equal_constants() {
        let mut p = set_a();
        p.md = RepConstants::new(p.tbl.m, p.md.d).unwrap();
        assert_eq!(table_sufficient_threshold(&p), Some(1.0));
        assert_eq!(md_pm_sufficient_threshold(&p), Some(1.0));
        p.md = RepConstants::new(p.md.m, p.tbl.d).unwrap();
        assert_eq!(md_sufficient_threshold(&p), 0.0);
    }

    #[test]
    fn zero_zero_point() {
        assert!(md_faster(0.0, 0.0, &set_a()));
        let mut p = set_a();
        p.md = RepConstants::new(0.031, 16.724).unwrap();
        assert!(!md_faster(0.0, 0.0, &p));
    }

    #[test]
    fn memory_curves() {
        let p = set_a();
        assert_eq!(t_m(p.h, &p).unwrap(), p.md.d);
        assert_eq!(t_m(p.h + p.c, &p).unwrap(), p.md.m);
        assert_eq!(t_m(p.h + 5.0 * p.c, &p).unwrap(), p.md.m);
        assert!((t_m(p.h + p.c / 2.0, &p).unwrap() - 3.1).abs() < 1e-12);
        assert!(t_m(p.h - 1.0, &p).is_err());
        assert_eq!(t_t(0.0, &p).unwrap(), p.tbl.d);
        assert_eq!(t_t(p.s, &p).unwrap(), p.tbl.m);
        let a = set_b();
        assert!((t_t(a.s / 2.0, &a).unwrap() - 9.9845).abs() < 1e-12);
    }

    #[test]
    fn exact_arithmetic() {
        let r = |n: i64, d: i64| Rational64::new(n, d);
        let p: ExactParams = CacheModelParams::new(
            RepConstants::new(r(31, 1000), r(6169, 1000)).unwrap(),
            RepConstants::new(r(21, 1000), r(16724, 1000)).unwrap(),
            r(1, 1),
            r(2, 1),
            r(3, 1),
        )
        .unwrap();
        assert_eq!(md_sufficient_threshold(&p), r(10555, 16703));
        // On the line itself the inequality is strict.
        let (slope, icpt) = boundary_line(&p);
        let pm = r(1, 2);
        assert!(!md_faster(pm, slope * pm + icpt, &p));
    }

    #[test]
    fn config_roundtrip_ignores_unknown_keys() {
        let text = "m_m = 0.031\nd_m = 6.169\nm_t = 0.021\nd_t = 16.724\nh = 10.0\nc = 20.0\ns = 30.0\nnote = 'x'\n";
        let c = ModelConfig::from_toml(text).unwrap();
        assert_eq!(c.d_t, 16.724);
        assert_eq!(ModelConfig::from_toml(&c.to_toml()).unwrap(), c);
        assert!(c.params().is_ok());
        assert!(ModelConfig::from_toml("m_m = 1.0").is_err());
    }
}
