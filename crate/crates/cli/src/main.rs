use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use helix_core::channel::{sample_readset, stats::read_stats, ChannelConfig};
use helix_core::config::RunConfig;
use helix_core::formats::{apply_truth, parse_fasta, parse_fastq, write_fasta, write_fastq, write_truth};
use helix_core::pipeline::{decode_reads, encode_file, Manifest, PRIMER_3, PRIMER_5};
use helix_core::sweep::{run_sweep, sweep_csv};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Channel-coded DNA storage: encode files to oligos, simulate sequencing, decode.
#[derive(Parser)]
#[command(name = "helix", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Encode a file into a FASTA design and a JSON manifest.
    Encode {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Defaults to <out> with a .manifest.json extension.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Attach the primer pair to every record.
        #[arg(long)]
        primers: bool,
    },
    /// Sample and corrupt reads from a design.
    Simulate {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        coverage: f64,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to <out> with a .truth.csv extension.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Channel parameters and master seed; defaults otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Attach the primer pair to every read.
        #[arg(long)]
        primers: bool,
    },
    /// Recover a file from reads.
    Decode {
        #[arg(long)]
        reads: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Trim primers from every read.
        #[arg(long)]
        primers: bool,
    },
    /// Success-rate curve over the configured coverage grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error-rate, edit-count and length tables from simulated reads.
    Stats {
        #[arg(long)]
        reads: PathBuf,
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Trim primers from every read.
        #[arg(long)]
        primers: bool,
    },
}

const SIMULATE: u64 = 3;

fn read_text(p: &Path) -> Result<String> {
    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn write(p: &Path, data: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(p, data).with_context(|| format!("writing {}", p.display()))
}

fn pick(flag: Option<PathBuf>, fallback: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    flag.or_else(|| fallback.clone()).with_context(|| format!("no {what} path given on the command line or in the config"))
}

fn sibling(p: &Path, ext: &str) -> PathBuf {
    p.with_extension(ext)
}

fn trim(primers: bool) -> (usize, usize) {
    if primers {
        (PRIMER_5.len(), PRIMER_3.len())
    } else {
        (0, 0)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Encode { config, input, out, manifest, primers } => {
            let run = RunConfig::load(&config)?;
            let cfg = run.scheme_config()?;
            let data = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let out = pick(out, &run.outputs.design, "design")?;
            let manifest = manifest.or(run.outputs.manifest.clone()).unwrap_or_else(|| sibling(&out, "manifest.json"));
            let primers = primers || run.primers;
            let enc = encode_file(&data, &cfg)?;
            let pair = primers.then_some((PRIMER_5, PRIMER_3));
            write(&out, write_fasta(&enc.design, pair))?;
            let m = Manifest::new(&cfg, enc.report, primers);
            write(&manifest, serde_json::to_string_pretty(&m)? + "\n")?;
            eprintln!(
                "{} oligos from {} seeds (acceptance {:.4}), net density {} bits/nt",
                m.report.accepted,
                m.report.seeds_tried,
                m.report.acceptance_rate,
                m.density_text()
            );
        }
        Cmd::Simulate { design, coverage, out, truth, config, seed, primers } => {
            let mut run = match &config {
                Some(c) => Some(RunConfig::load(c)?),
                None => None,
            };
            let master = seed.or(run.as_ref().map(|r| r.master_seed)).unwrap_or(0);
            let primers = primers || run.as_ref().is_some_and(|r| r.primers);
            let channel = match run.as_mut() {
                Some(r) => {
                    r.master_seed = master;
                    r.channel_for(&[SIMULATE])
                }
                None => ChannelConfig {
                    master_seed: helix_core::channel::derive_seed(master, &[SIMULATE]),
                    ..ChannelConfig::default()
                },
            };
            let d = parse_fasta(&read_text(&design)?, Some((PRIMER_5, PRIMER_3)))?;
            let oligos: Vec<&[u8]> = d.entries.iter().map(|(_, o)| o.as_slice()).collect();
            let reads = sample_readset(&oligos, coverage, &channel)?;
            let pair = primers.then_some((PRIMER_5, PRIMER_3));
            write(&out, write_fastq(&reads, pair))?;
            write(&truth.unwrap_or_else(|| sibling(&out, "truth.csv")), write_truth(&reads))?;
            eprintln!("{} reads", reads.reads.len());
        }
        Cmd::Decode { reads, config, out, report, primers } => {
            let run = RunConfig::load(&config)?;
            let cfg = run.scheme_config()?;
            let out = pick(out, &run.outputs.recovered, "output")?;
            let report = report.or(run.outputs.report.clone()).unwrap_or_else(|| sibling(&out, "report.json"));
            let rs = parse_fastq(&read_text(&reads)?, trim(primers || run.primers))?;
            let (result, rep) = decode_reads(&rs.seqs(), &cfg, run.mode);
            write(&report, serde_json::to_string_pretty(&rep)? + "\n")?;
            let data = result?;
            write(&out, &data)?;
            eprintln!("recovered {} bytes", data.len());
        }
        Cmd::Sweep { config, out } => {
            let run = RunConfig::load(&config)?;
            let out = pick(out, &run.outputs.curve, "curve")?;
            let rows = run_sweep(&run)?;
            write(&out, sweep_csv(&rows))?;
        }
        Cmd::Stats { reads, design, truth, out, primers } => {
            if !truth.exists() {
                bail!("truth sidecar {} not found; statistics need read origins", truth.display());
            }
            let d = parse_fasta(&read_text(&design)?, Some((PRIMER_5, PRIMER_3)))?;
            let mut rs = parse_fastq(&read_text(&reads)?, trim(primers))?;
            apply_truth(&mut rs, &read_text(&truth)?)?;
            let oligos: Vec<&[u8]> = d.entries.iter().map(|(_, o)| o.as_slice()).collect();
            let rep = read_stats(&rs, &oligos)?;
            write(&out.join("base_rates.csv"), rep.base_rates_csv())?;
            write(&out.join("read_edits.csv"), rep.read_edits_csv())?;
            write(&out.join("length_hist.csv"), rep.length_csv())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("HELIX_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: HELIX_THREADS ignored: {e}");
        }
    }
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
