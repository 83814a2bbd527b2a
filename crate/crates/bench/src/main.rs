use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use cubepack::ingest::{ingest_path, IngestOptions};
use cubepack::{HeaderParams, LoadOptions, MultidimStore, Relation, Scheme, TableStore};
use cubepack_bench::experiments::{self, SweepOptions, DEFAULT_MISS_PENALTY_MS};
use cubepack_bench::{generate, SynthSpec};

#[derive(Parser)]
#[command(
    name = "cubepack",
    version,
    about = "Compressed multidimensional storage benchmark"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic relation as CSV.
    Gen {
        #[command(flatten)]
        synth: SynthArgs,
        /// Output CSV (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load a CSV relation, report its shape, and optionally write stores.
    Ingest {
        input: PathBuf,
        #[arg(long)]
        has_header: bool,
        /// Order dimension values lexicographically instead of by first appearance.
        #[arg(long)]
        sorted: bool,
        #[command(flatten)]
        layout: LayoutArgs,
        /// Store base path; writes the multidimensional and table files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build both representations from a relation and save them.
    Build {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        layout: LayoutArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Point query against a saved store.
    Query {
        base: PathBuf,
        /// Comma-separated dimension values.
        #[arg(long)]
        coords: String,
        /// Query the table representation instead.
        #[arg(long)]
        table: bool,
        #[arg(long, default_value_t = cubepack::DEFAULT_BLOCK_SIZE)]
        block_size: usize,
    },
    /// Disk and memory sizes of every representation.
    Sizes {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        layout: LayoutArgs,
        /// CSV output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the model constants from cold and warm query passes.
    Estimate {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        layout: LayoutArgs,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_MISS_PENALTY_MS)]
        miss_penalty_ms: f64,
        /// Model config (TOML) output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep memory budgets and compare simulated times with the model.
    Sweep {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        layout: LayoutArgs,
        /// Comma-separated total memory budgets in octets.
        #[arg(long, value_delimiter = ',')]
        budget_list: Option<Vec<u64>>,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 300)]
        samples: usize,
        #[arg(long, default_value_t = 100)]
        passes: usize,
        #[arg(long, default_value_t = 1000)]
        estimate_samples: usize,
        #[arg(long, default_value_t = DEFAULT_MISS_PENALTY_MS)]
        miss_penalty_ms: f64,
        /// CSV output (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct SynthArgs {
    /// Comma-separated dimension cardinalities.
    #[arg(long, value_delimiter = ',', default_value = "64,64,32")]
    dims: Vec<u64>,
    #[arg(long, default_value_t = 0.01)]
    density: f64,
    #[arg(long, default_value_t = 0.0)]
    clustering: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Clone)]
struct SourceArgs {
    /// Relation CSV; a synthetic relation is generated when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    has_header: bool,
    #[command(flatten)]
    synth: SynthArgs,
}

#[derive(Args, Clone)]
struct LayoutArgs {
    #[arg(long, default_value = "dhc")]
    scheme: Scheme,
    #[arg(long, default_value_t = 16)]
    s_bits: u8,
    #[arg(long, default_value_t = 16)]
    stride: usize,
    #[arg(long, default_value_t = cubepack::DEFAULT_BLOCK_SIZE)]
    block_size: usize,
    /// BOC offset width θ in octets.
    #[arg(long, default_value_t = 2)]
    offset_octets: u8,
    /// BOC block length.
    #[arg(long, default_value_t = 16)]
    block_len: usize,
    /// Logical position width ι in octets.
    #[arg(long, default_value_t = 8)]
    word_octets: u8,
}

impl LayoutArgs {
    fn params(&self) -> HeaderParams {
        HeaderParams {
            word_width: self.word_octets,
            offset_width: self.offset_octets,
            block_len: self.block_len,
            s_bits: self.s_bits,
            stride: self.stride,
        }
    }
}

/// Bad invocation detected after argument parsing.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn load_relation(src: &SourceArgs) -> anyhow::Result<Relation<f64>> {
    match &src.input {
        Some(path) => {
            let opts = IngestOptions {
                has_header: src.has_header,
                ..Default::default()
            };
            let got =
                ingest_path(path, &opts).with_context(|| format!("reading {}", path.display()))?;
            if got.duplicates > 0 {
                eprintln!("note: {} duplicate rows (last value kept)", got.duplicates);
            }
            Ok(got.relation)
        }
        None => {
            let s = &src.synth;
            Ok(generate(&SynthSpec::new(
                s.dims.clone(),
                s.density,
                s.clustering,
                s.seed,
            ))?)
        }
    }
}

fn build_both(
    rel: &Relation<f64>,
    layout: &LayoutArgs,
) -> anyhow::Result<(MultidimStore<f64>, TableStore<f64>)> {
    let (md, used) =
        experiments::build_md_store(rel, layout.scheme, &layout.params(), layout.block_size)?;
    if used.offset_width != layout.offset_octets {
        eprintln!("note: BOC offsets widened to {} octets", used.offset_width);
    }
    let table = TableStore::build_with_page_size(rel, layout.block_size)?;
    Ok((md, table))
}

fn output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn save_both(rel: &Relation<f64>, layout: &LayoutArgs, base: &Path) -> anyhow::Result<()> {
    let (md, table) = build_both(rel, layout)?;
    md.save(base)?;
    table.save(base)?;
    let r = md.size_report();
    println!(
        "saved {} store: {} cells, header {} octets, cells {} octets; table {} octets",
        md.scheme(),
        md.len(),
        r.header_disk,
        r.cells,
        table.size_report().total()
    );
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::Gen { synth, out } => {
            let rel = generate(&SynthSpec::new(
                synth.dims,
                synth.density,
                synth.clustering,
                synth.seed,
            ))?;
            let mut w = csv::Writer::from_writer(output(&out)?);
            for (coords, v) in rel.iter() {
                let mut rec: Vec<String> = coords.iter().map(|c| c.to_string()).collect();
                rec.push(v.to_string());
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
        Cmd::Ingest {
            input,
            has_header,
            sorted,
            layout,
            out,
        } => {
            let opts = IngestOptions {
                has_header,
                sorted_values: sorted,
                ..Default::default()
            };
            let got = ingest_path::<f64>(&input, &opts)?;
            let rel = &got.relation;
            let total = rel.schema().total_cells();
            println!("dimensions: {:?}", rel.schema().cardinalities());
            println!(
                "cells: {} of {} ({:.6} dense)",
                rel.len(),
                total,
                rel.len() as f64 / total as f64
            );
            println!("duplicate rows: {}", got.duplicates);
            if let Some(base) = out {
                save_both(rel, &layout, &base)?;
            }
        }
        Cmd::Build {
            source,
            layout,
            out,
        } => {
            let rel = load_relation(&source)?;
            save_both(&rel, &layout, &out)?;
        }
        Cmd::Query {
            base,
            coords,
            table,
            block_size,
        } => {
            let values: Vec<&str> = coords.split(',').map(str::trim).collect();
            let t = Instant::now();
            let result = if table {
                let st = TableStore::<f64>::load(&base, None)?;
                let c = st
                    .schema()
                    .resolve(&values)
                    .map_err(|e| Usage(e.to_string()))?;
                st.point_query(&c)?
            } else {
                let st = MultidimStore::<f64>::load(
                    &base,
                    &LoadOptions {
                        block_size,
                        preload_cells: false,
                    },
                )?;
                let c = st
                    .schema()
                    .resolve(&values)
                    .map_err(|e| Usage(e.to_string()))?;
                st.point_query(&c)?
            };
            let elapsed = t.elapsed();
            match result {
                Some(v) => println!("{v}"),
                None => println!("empty"),
            }
            eprintln!(
                "elapsed: {:.3} ms (including load)",
                elapsed.as_secs_f64() * 1e3
            );
        }
        Cmd::Sizes {
            source,
            layout,
            out,
        } => {
            let rel = load_relation(&source)?;
            let t = experiments::size_table(&rel, &layout.params(), layout.block_size)?;
            println!("{:<12} {:>14} {:>9}", "rep", "octets", "percent");
            for r in &t.rows {
                println!(
                    "{:<12} {:>14} {:>8.2}%",
                    r.representation, r.octets, r.percent
                );
            }
            if let Some(p) = out {
                t.write_csv(output(&Some(p))?)?;
            }
        }
        Cmd::Estimate {
            source,
            layout,
            samples,
            miss_penalty_ms,
            out,
        } => {
            if samples == 0 {
                return Err(Usage("--samples must be at least 1".into()).into());
            }
            let rel = load_relation(&source)?;
            let (mut md, mut table) = build_both(&rel, &layout)?;
            let e = experiments::estimate(
                &mut md,
                &mut table,
                &rel,
                samples,
                source.synth.seed,
                miss_penalty_ms,
            )?;
            for (name, r) in [("md", &e.md), ("table", &e.table)] {
                println!(
                    "{name}: M={:.6} ms D={:.6} ms cold misses/query={:.3} warm misses={} cold wall={:.6} ms",
                    r.m_hat_ms, r.d_hat_ms, r.mean_cold_misses, r.warm_misses, r.cold_wall_ms
                );
            }
            println!("H={} C={} S={}", e.h, e.c, e.s);
            if let Some(p) = out {
                std::fs::write(&p, e.config().to_toml())?;
            }
        }
        Cmd::Sweep {
            source,
            layout,
            budget_list,
            points,
            samples,
            passes,
            estimate_samples,
            miss_penalty_ms,
            out,
        } => {
            if samples == 0 || passes == 0 || estimate_samples == 0 || points == 0 {
                return Err(Usage("sample, pass and point counts must be positive".into()).into());
            }
            let rel = load_relation(&source)?;
            let (mut md, mut table) = build_both(&rel, &layout)?;
            let seed = source.synth.seed;
            let e = experiments::estimate(
                &mut md,
                &mut table,
                &rel,
                estimate_samples,
                seed,
                miss_penalty_ms,
            )?;
            let opts = SweepOptions {
                budgets: budget_list,
                points,
                samples,
                passes,
                seed,
            };
            let rows = experiments::sweep(&mut md, &mut table, &rel, &e, &opts)?;
            experiments::write_sweep_csv(&rows, output(&out)?)?;
            for rep in ["md", "table"] {
                for (b, sim, model, dev) in experiments::summarize_sweep(&rows, rep) {
                    eprintln!("{rep:<5} budget {b:>12}: sim {sim:>10.4} ms model {model:>10.4} ms dev {:>6.2}%", dev * 100.0);
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
