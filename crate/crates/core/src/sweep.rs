//! Monte Carlo success-rate curves over coverage.

use crate::bfa::{build_in_order, oracle_ub, sge_baseline};
use crate::channel::sample_readset;
use crate::config::RunConfig;
use crate::editecc::InnerMode;
use crate::error::Result;
use crate::fountain::{lt_encode, recover_source, EncodedSymbol, IntermediateBlock, PrecodeSpec};
use crate::pipeline::{desegment, encode_file, inner_decode, outer_decode, SchemeConfig};
use rand::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::fmt::Write;
use std::time::Instant;

const FILE: u64 = 1;
const TRIAL: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub coverage: f64,
    pub mode: InnerMode,
    pub success_rate: f64,
    pub ub_rate: f64,
    pub sge_rate: f64,
    /// Seconds per decode (inner plus outer).
    pub mean_runtime: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Trial {
    success: bool,
    ub: bool,
    sge: bool,
    seconds: f64,
}

/// Ground truth for judging decoded symbols.
struct Truth<'a> {
    file: &'a [u8],
    block: &'a IntermediateBlock,
    spec: &'a PrecodeSpec,
    payloads: HashMap<u16, &'a crate::gf2::BitVec>,
}

impl Truth<'_> {
    fn correct(&self, s: &EncodedSymbol) -> bool {
        match self.payloads.get(&s.seed) {
            Some(p) => **p == s.payload,
            None => lt_encode(s.seed, self.block).payload == s.payload,
        }
    }

    fn recovered(&self, block: Result<IntermediateBlock>) -> bool {
        block.and_then(|b| desegment(&recover_source(&b, self.spec))).is_ok_and(|f| f == self.file)
    }
}

fn run_trial(reads: &[&[u8]], cfg: &SchemeConfig, mode: InnerMode, truth: &Truth, seeds: &HashSet<u16>) -> Trial {
    let l_d = cfg.segment_bits();
    let start = Instant::now();
    let inner = inner_decode(reads, cfg, mode, Some(seeds));
    let success = truth.recovered(outer_decode(&inner.symbols, truth.spec, l_d));
    let seconds = start.elapsed().as_secs_f64();
    let good = inner.symbols.iter().filter(|(s, _)| truth.correct(s)).map(|(s, _)| s.seed);
    let ub = oracle_ub(truth.spec, good);
    let sge = truth.recovered(sge_baseline(&build_in_order(truth.spec, &inner.symbols, l_d)));
    Trial { success, ub, sge, seconds }
}

/// Random test file of `len` bytes derived from the master seed.
pub fn sweep_file(master_seed: u64, len: usize) -> Vec<u8> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(crate::channel::derive_seed(master_seed, &[FILE]));
    let mut v = vec![0u8; len];
    rng.fill_bytes(&mut v);
    v
}

/// Encodes one random file, then for every coverage and trial draws a fresh
/// read set and decodes it in each mode. Rows follow the coverage grid, modes
/// in configured order.
pub fn run_sweep(run: &RunConfig) -> Result<Vec<SweepRow>> {
    run.validate()?;
    let cfg = run.scheme_config()?;
    let file = sweep_file(run.master_seed, run.sweep.file_bytes.unwrap_or(cfg.capacity_bytes()));
    let enc = encode_file(&file, &cfg)?;
    let oligos: Vec<&[u8]> = enc.design.entries.iter().map(|(_, o)| o.as_slice()).collect();
    let symbols: Vec<EncodedSymbol> = enc.design.entries.iter().map(|(s, _)| lt_encode(*s, &enc.block)).collect();
    let truth = Truth {
        file: &file,
        block: &enc.block,
        spec: &enc.spec,
        payloads: symbols.iter().map(|s| (s.seed, &s.payload)).collect(),
    };
    let seeds: HashSet<u16> = enc.report.accepted_seeds.iter().copied().collect();
    let grid = &run.sweep;
    let jobs: Vec<(usize, usize)> =
        (0..grid.coverages.len()).flat_map(|c| (0..grid.trials).map(move |t| (c, t))).collect();
    let results: Vec<Result<Vec<Trial>>> = jobs
        .par_iter()
        .map(|&(c, t)| {
            let ch = run.channel_for(&[TRIAL, c as u64, t as u64]);
            let rs = sample_readset(&oligos, grid.coverages[c], &ch)?;
            let reads = rs.seqs();
            Ok(grid.modes.iter().map(|&m| run_trial(&reads, &cfg, m, &truth, &seeds)).collect())
        })
        .collect();
    let mut acc: Vec<Vec<Trial>> = vec![Vec::new(); grid.coverages.len() * grid.modes.len()];
    for (&(c, _), r) in jobs.iter().zip(results) {
        for (m, t) in r?.into_iter().enumerate() {
            acc[c * grid.modes.len() + m].push(t);
        }
    }
    let rate = |v: &[Trial], f: fn(&Trial) -> bool| v.iter().filter(|t| f(t)).count() as f64 / v.len() as f64;
    Ok(acc
        .iter()
        .enumerate()
        .map(|(i, v)| SweepRow {
            coverage: grid.coverages[i / grid.modes.len()],
            mode: grid.modes[i % grid.modes.len()],
            success_rate: rate(v, |t| t.success),
            ub_rate: rate(v, |t| t.ub),
            sge_rate: rate(v, |t| t.sge),
            mean_runtime: v.iter().map(|t| t.seconds).sum::<f64>() / v.len() as f64,
        })
        .collect())
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("coverage,mode,success_rate,ub_rate,sge_rate,mean_runtime\n");
    for r in rows {
        let mode = match r.mode {
            InnerMode::Detection => "detection",
            InnerMode::Decoding => "decoding",
        };
        let _ = writeln!(
            out,
            "{},{mode},{:.4},{:.4},{:.4},{:.6}",
            r.coverage, r.success_rate, r.ub_rate, r.sge_rate, r.mean_runtime
        );
    }
    out
}

/// Largest downward step between consecutive coverages, per mode.
pub fn max_drop(rows: &[SweepRow], mode: InnerMode) -> f64 {
    let v: Vec<f64> = rows.iter().filter(|r| r.mode == mode).map(|r| r.success_rate).collect();
    v.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
}
