//! Benchmark harness for cubepack: synthetic relations, a simulated block
//! cache, and the size, estimation and memory-sweep experiments.

pub mod experiments;
pub mod simcache;
pub mod synth;

pub use experiments::{Estimate, SizeTable, SweepOptions, SweepRow};
pub use simcache::SimCache;
pub use synth::{generate, SynthSpec};
