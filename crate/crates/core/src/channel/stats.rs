//! Read statistics from banded alignment against the origin oligo.

use super::ReadSet;
use crate::error::{Error, Result};
use crate::quatseq::to_text;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write;

pub const BAND: usize = 5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EditCounts {
    pub ins: usize,
    pub del: usize,
    pub sub: usize,
}

impl EditCounts {
    pub fn total(&self) -> usize {
        self.ins + self.del + self.sub
    }
}

/// Per-nucleotide edit tallies from one alignment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Alignment {
    pub counts: EditCounts,
    /// Insertions by inserted symbol, deletions and substitutions by reference symbol.
    pub ins_by: [usize; 4],
    pub del_by: [usize; 4],
    pub sub_by: [usize; 4],
}

/// Minimum edit alignment with |i - j| <= band; None when the lengths differ
/// by more than the band.
pub fn align(reference: &[u8], read: &[u8], band: usize) -> Option<Alignment> {
    let (n, m) = (reference.len(), read.len());
    if n.abs_diff(m) > band {
        return None;
    }
    const INF: u32 = u32::MAX / 2;
    let w = 2 * band + 1;
    // cell (i, j) stored at row i, column j + band - i
    let idx = |i: usize, j: usize| i * w + (j + band - i);
    let mut dp = vec![INF; (n + 1) * w];
    let inside = |i: usize, j: usize| j + band >= i && j <= i + band && j <= m;
    for i in 0..=n {
        let lo = i.saturating_sub(band);
        let hi = (i + band).min(m);
        for j in lo..=hi {
            let v = if i == 0 && j == 0 {
                0
            } else {
                let mut best = INF;
                if i > 0 && j > 0 && inside(i - 1, j - 1) {
                    best = best.min(dp[idx(i - 1, j - 1)] + (reference[i - 1] != read[j - 1]) as u32);
                }
                if i > 0 && inside(i - 1, j) {
                    best = best.min(dp[idx(i - 1, j)] + 1);
                }
                if j > 0 && inside(i, j - 1) {
                    best = best.min(dp[idx(i, j - 1)] + 1);
                }
                best
            };
            dp[idx(i, j)] = v;
        }
    }
    let mut a = Alignment::default();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dp[idx(i, j)];
        if i > 0 && j > 0 && inside(i - 1, j - 1) {
            let cost = (reference[i - 1] != read[j - 1]) as u32;
            if dp[idx(i - 1, j - 1)] + cost == here {
                if cost == 1 {
                    a.counts.sub += 1;
                    a.sub_by[reference[i - 1] as usize] += 1;
                }
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && inside(i - 1, j) && dp[idx(i - 1, j)] + 1 == here {
            a.counts.del += 1;
            a.del_by[reference[i - 1] as usize] += 1;
            i -= 1;
            continue;
        }
        a.counts.ins += 1;
        a.ins_by[read[j - 1] as usize] += 1;
        j -= 1;
    }
    Some(a)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub reads: usize,
    pub reference_bases: usize,
    pub ins_by: [usize; 4],
    pub del_by: [usize; 4],
    pub sub_by: [usize; 4],
    pub edits: BTreeMap<EditCounts, usize>,
    pub beyond_band: usize,
    pub lengths: BTreeMap<usize, usize>,
}

pub fn read_stats<S: AsRef<[u8]>>(reads: &ReadSet, design: &[S]) -> Result<StatsReport> {
    let mut rep = StatsReport::default();
    for (k, r) in reads.reads.iter().enumerate() {
        let o = r.origin.filter(|&o| o < design.len()).ok_or(Error::MissingTruth(k))?;
        let reference = design[o].as_ref();
        rep.reads += 1;
        *rep.lengths.entry(r.seq.len()).or_default() += 1;
        match align(reference, &r.seq, BAND) {
            Some(a) => {
                rep.reference_bases += reference.len();
                for s in 0..4 {
                    rep.ins_by[s] += a.ins_by[s];
                    rep.del_by[s] += a.del_by[s];
                    rep.sub_by[s] += a.sub_by[s];
                }
                *rep.edits.entry(a.counts).or_default() += 1;
            }
            None => rep.beyond_band += 1,
        }
    }
    Ok(rep)
}

impl StatsReport {
    pub fn rates(&self) -> (f64, f64, f64) {
        let b = self.reference_bases.max(1) as f64;
        let sum = |v: &[usize; 4]| v.iter().sum::<usize>() as f64 / b;
        (sum(&self.ins_by), sum(&self.del_by), sum(&self.sub_by))
    }

    pub fn zero_edit_fraction(&self) -> f64 {
        *self.edits.get(&EditCounts::default()).unwrap_or(&0) as f64 / self.reads.max(1) as f64
    }

    /// nucleotide,ins_rate,del_rate,sub_rate over all aligned reference bases.
    pub fn base_rates_csv(&self) -> String {
        let b = self.reference_bases.max(1) as f64;
        let mut out = String::from("nucleotide,ins_rate,del_rate,sub_rate\n");
        for s in 0..4u8 {
            let i = s as usize;
            let _ = writeln!(
                out,
                "{},{:.6e},{:.6e},{:.6e}",
                to_text(&[s]),
                self.ins_by[i] as f64 / b,
                self.del_by[i] as f64 / b,
                self.sub_by[i] as f64 / b
            );
        }
        let (i, d, s) = self.rates();
        let _ = writeln!(out, "Total,{i:.6e},{d:.6e},{s:.6e}");
        out
    }

    /// edits,ins,del,sub,count,rate per read; a final row holds reads outside the band.
    pub fn read_edits_csv(&self) -> String {
        let n = self.reads.max(1) as f64;
        let mut rows: Vec<(&EditCounts, &usize)> = self.edits.iter().collect();
        rows.sort_by_key(|(e, _)| (e.total(), e.ins, e.del, e.sub));
        let mut out = String::from("edits,ins,del,sub,count,rate\n");
        for (e, c) in rows {
            let _ = writeln!(out, "{},{},{},{},{},{:.6}", e.total(), e.ins, e.del, e.sub, c, *c as f64 / n);
        }
        let _ = writeln!(out, ">band,,,,{},{:.6}", self.beyond_band, self.beyond_band as f64 / n);
        out
    }

    /// length,count,rate
    pub fn length_csv(&self) -> String {
        let n = self.reads.max(1) as f64;
        let mut out = String::from("length,count,rate\n");
        for (l, c) in &self.lengths {
            let _ = writeln!(out, "{l},{c},{:.6}", *c as f64 / n);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::{sample_readset, ChannelConfig, Read, ReadCountModel};
    use super::*;

    /// Full quadratic edit distance, no band.
    fn edit_distance(a: &[u8], b: &[u8]) -> usize {
        let mut prev: Vec<usize> = (0..=b.len()).collect();
        for i in 1..=a.len() {
            let mut cur = vec![i; b.len() + 1];
            for j in 1..=b.len() {
                cur[j] = (prev[j - 1] + (a[i - 1] != b[j - 1]) as usize).min(prev[j] + 1).min(cur[j - 1] + 1);
            }
            prev = cur;
        }
        prev[b.len()]
    }

    #[test]
    fn alignment_examples() {
        let r = [0, 1, 2, 3, 0, 1, 2, 3];
        assert_eq!(align(&r, &r, 5).unwrap().counts, EditCounts::default());
        let a = align(&r, &[0, 1, 2, 3, 0, 1, 2], 5).unwrap();
        assert_eq!(a.counts, EditCounts { ins: 0, del: 1, sub: 0 });
        assert_eq!(a.del_by[3], 1);
        let a = align(&r, &[0, 1, 1, 3, 0, 1, 2, 3], 5).unwrap();
        assert_eq!(a.counts, EditCounts { ins: 0, del: 0, sub: 1 });
        assert_eq!(a.sub_by[2], 1);
        let a = align(&r, &[0, 1, 2, 3, 3, 0, 1, 2, 3], 5).unwrap();
        assert_eq!(a.counts.total(), 1);
        assert_eq!(a.counts.ins, 1);
        assert!(align(&r, &r[..2], 5).is_none());
    }

    #[test]
    fn banded_matches_full_distance() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let cfg = ChannelConfig { p_ins: 0.01, p_del: 0.01, p_sub: 0.01, ..Default::default() };
        for _ in 0..300 {
            let o: Vec<u8> = (0..120).map(|_| rng.gen_range(0..4)).collect();
            let r = super::super::corrupt(&o, &cfg, &mut rng);
            if let Some(a) = align(&o, &r, BAND) {
                let d = edit_distance(&o, &r);
                if d <= BAND {
                    assert_eq!(a.counts.total(), d);
                }
            }
        }
    }

    #[test]
    fn zero_rate_report() {
        let design: Vec<Vec<u8>> = vec![vec![0, 1, 2, 3, 2, 1]; 3];
        let cfg = ChannelConfig { read_counts: ReadCountModel::Uniform, ..ChannelConfig::noiseless() };
        let rs = sample_readset(&design, 2.0, &cfg).unwrap();
        let rep = read_stats(&rs, &design).unwrap();
        assert_eq!(rep.zero_edit_fraction(), 1.0);
        assert_eq!(rep.lengths.keys().copied().collect::<Vec<_>>(), vec![6]);
        assert!(rep.base_rates_csv().starts_with("nucleotide,ins_rate,del_rate,sub_rate\nA,"));
        assert!(rep.read_edits_csv().starts_with("edits,ins,del,sub,count,rate\n0,0,0,0,6,1.000000\n"));
        assert_eq!(rep.length_csv(), "length,count,rate\n6,6,1.000000\n");
        let bad = ReadSet { reads: vec![Read { seq: vec![0], origin: None }] };
        assert!(read_stats(&bad, &design).is_err());
    }
}
