//! Insertion/deletion/substitution channel with read-count sampling.

pub mod stats;

use crate::error::{Error, Result};
use crate::quatseq::QuatSeq;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, WeightedIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ReadCountModel {
    /// Every oligo gets floor(N) reads; the remainder goes to random oligos.
    Uniform,
    /// Oligo weights drawn from a gamma law with this mean/sd ratio, then
    /// reads assigned multinomially.
    Gamma { mean: f64, sd: f64 },
}

impl Default for ReadCountModel {
    fn default() -> Self {
        ReadCountModel::Gamma { mean: 404.0, sd: 234.8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelConfig {
    pub p_ins: f64,
    pub p_del: f64,
    pub p_sub: f64,
    pub dropout: f64,
    pub read_counts: ReadCountModel,
    /// Set from the run configuration, not from JSON.
    #[serde(skip)]
    pub master_seed: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            p_ins: 4.31e-5,
            p_del: 2.56e-4,
            p_sub: 6.25e-4,
            dropout: 0.0,
            read_counts: ReadCountModel::default(),
            master_seed: 0,
        }
    }
}

impl ChannelConfig {
    pub fn noiseless() -> Self {
        ChannelConfig { p_ins: 0.0, p_del: 0.0, p_sub: 0.0, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let ps = [self.p_ins, self.p_del, self.p_sub, self.dropout];
        if ps.iter().any(|p| !(0.0..1.0).contains(p)) || self.p_ins + self.p_del + self.p_sub >= 1.0 {
            return Err(Error::InvalidConfig(format!("bad channel probabilities {self:?}")));
        }
        if let ReadCountModel::Gamma { mean, sd } = self.read_counts {
            if !(mean > 0.0 && sd > 0.0) {
                return Err(Error::InvalidConfig("gamma read counts need positive mean and sd".into()));
            }
        }
        Ok(())
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Mixes a master seed with labels into a child seed.
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(splitmix(master), |acc, &l| splitmix(acc ^ splitmix(l)))
}

/// Independent generator for item `index` of a keyed family.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

/// Failures before the first success of a Bernoulli(p) sequence.
fn geometric(rng: &mut impl Rng, p: f64) -> usize {
    if p <= 0.0 {
        return usize::MAX;
    }
    let u: f64 = rng.gen();
    let g = ((1.0 - u).ln() / (1.0 - p).ln()).floor();
    if g >= usize::MAX as f64 {
        usize::MAX
    } else {
        g as usize
    }
}

/// Applies the channel to one oligo. Each of the n+1 slots (before every
/// position and after the last) receives a geometric number of random
/// insertions; each position is deleted with p_del, substituted with p_sub,
/// else copied. Events are located by geometric skips, which is equivalent in
/// distribution to testing every position.
pub fn corrupt(oligo: &[u8], cfg: &ChannelConfig, rng: &mut impl Rng) -> QuatSeq {
    let n = oligo.len();
    let mut ins: Vec<usize> = Vec::new();
    let mut slot = geometric(rng, cfg.p_ins);
    while slot <= n {
        let mut k = 1;
        while rng.gen::<f64>() < cfg.p_ins {
            k += 1;
        }
        ins.extend(std::iter::repeat_n(slot, k));
        slot = slot.saturating_add(1).saturating_add(geometric(rng, cfg.p_ins));
    }
    let p_event = cfg.p_del + cfg.p_sub;
    let mut events: Vec<(usize, Option<u8>)> = Vec::new();
    let mut pos = geometric(rng, p_event);
    while pos < n {
        if rng.gen::<f64>() * p_event < cfg.p_del {
            events.push((pos, None));
        } else {
            let v = (oligo[pos] + rng.gen_range(1..4)) % 4;
            events.push((pos, Some(v)));
        }
        pos = pos.saturating_add(1).saturating_add(geometric(rng, p_event));
    }
    let mut out = Vec::with_capacity(n + ins.len());
    let (mut ii, mut ei) = (0, 0);
    for i in 0..=n {
        while ii < ins.len() && ins[ii] == i {
            out.push(rng.gen_range(0..4));
            ii += 1;
        }
        if i == n {
            break;
        }
        if ei < events.len() && events[ei].0 == i {
            if let Some(v) = events[ei].1 {
                out.push(v);
            }
            ei += 1;
        } else {
            out.push(oligo[i]);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Read {
    pub seq: QuatSeq,
    pub origin: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadSet {
    pub reads: Vec<Read>,
}

impl ReadSet {
    pub fn seqs(&self) -> Vec<&[u8]> {
        self.reads.iter().map(|r| r.seq.as_slice()).collect()
    }
}

const ASSIGN: u64 = 1;
const READS: u64 = 2;

/// Origin index of every read, in read order.
pub fn sample_origins(n_oligos: usize, coverage: f64, cfg: &ChannelConfig) -> Result<Vec<usize>> {
    cfg.validate()?;
    if !(coverage > 0.0) {
        return Err(Error::InvalidConfig(format!("coverage must be positive, got {coverage}")));
    }
    let mut rng = stream_rng(derive_seed(cfg.master_seed, &[ASSIGN]), 0);
    let survivors: Vec<usize> = (0..n_oligos).filter(|_| rng.gen::<f64>() >= cfg.dropout).collect();
    let total = (n_oligos as f64 * coverage).round() as usize;
    if survivors.is_empty() {
        return Ok(Vec::new());
    }
    let mut origins = Vec::with_capacity(total);
    match cfg.read_counts {
        ReadCountModel::Uniform => {
            let base = total / survivors.len();
            for &o in &survivors {
                origins.extend(std::iter::repeat_n(o, base));
            }
            let extra = total - base * survivors.len();
            for i in rand::seq::index::sample(&mut rng, survivors.len(), extra) {
                origins.push(survivors[i]);
            }
        }
        ReadCountModel::Gamma { mean, sd } => {
            let shape = (mean / sd).powi(2);
            let gamma = Gamma::new(shape, 1.0).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            let w: Vec<f64> = survivors.iter().map(|_| gamma.sample(&mut rng)).collect();
            let pick = WeightedIndex::new(&w).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            origins.extend((0..total).map(|_| survivors[pick.sample(&mut rng)]));
        }
    }
    origins.shuffle(&mut rng);
    Ok(origins)
}

/// Draws round(n * coverage) reads and passes each through the channel.
pub fn sample_readset<S: AsRef<[u8]> + Sync>(design: &[S], coverage: f64, cfg: &ChannelConfig) -> Result<ReadSet> {
    let origins = sample_origins(design.len(), coverage, cfg)?;
    let seed = derive_seed(cfg.master_seed, &[READS]);
    let reads = origins
        .par_iter()
        .enumerate()
        .map(|(j, &o)| {
            let mut rng = stream_rng(seed, j as u64);
            Read { seq: corrupt(design[o].as_ref(), cfg, &mut rng), origin: Some(o) }
        })
        .collect();
    Ok(ReadSet { reads })
}
