//! Quaternary sequences over {A,T,C,G} = {0,1,2,3}.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Symbols in {0,1,2,3}.
pub type QuatSeq = Vec<u8>;

const LETTERS: [u8; 4] = *b"ATCG";

pub fn map_symbols(text: &str) -> Result<QuatSeq> {
    text.chars()
        .enumerate()
        .map(|(index, ch)| match ch.to_ascii_uppercase() {
            'A' => Ok(0),
            'T' => Ok(1),
            'C' => Ok(2),
            'G' => Ok(3),
            _ => Err(Error::InvalidNucleotide { index, ch }),
        })
        .collect()
}

pub fn to_text(s: &[u8]) -> String {
    s.iter().map(|&v| LETTERS[v as usize] as char).collect()
}

pub fn max_homopolymer_run(s: &[u8]) -> usize {
    let mut best = 0;
    let mut run = 0;
    for (i, &v) in s.iter().enumerate() {
        run = if i > 0 && s[i - 1] == v { run + 1 } else { 1 };
        best = best.max(run);
    }
    best
}

pub fn gc_fraction(s: &[u8]) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(gc_count(s) as f64 / s.len() as f64)
}

fn gc_count(s: &[u8]) -> usize {
    s.iter().filter(|&&v| v >= 2).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScreenPolicy {
    pub max_run: usize,
    pub gc_lo: f64,
    pub gc_hi: f64,
}

impl Default for ScreenPolicy {
    fn default() -> Self {
        ScreenPolicy { max_run: 3, gc_lo: 0.45, gc_hi: 0.55 }
    }
}

impl ScreenPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.max_run < 1 || !(0.0 <= self.gc_lo && self.gc_lo <= self.gc_hi && self.gc_hi <= 1.0) {
            return Err(Error::InvalidConfig(format!("bad screen policy {self:?}")));
        }
        Ok(())
    }
}

pub fn screen(s: &[u8], p: &ScreenPolicy) -> bool {
    if s.is_empty() || max_homopolymer_run(s) > p.max_run {
        return false;
    }
    // Compare counts against bounds scaled by length so 0.45 * 250 style
    // boundaries are not lost to float rounding.
    let gc = gc_count(s) as f64;
    let n = s.len() as f64;
    let eps = 1e-9;
    gc + eps >= p.gc_lo * n && gc - eps <= p.gc_hi * n
}

pub fn differential(x: &[u8]) -> QuatSeq {
    let mut y = Vec::with_capacity(x.len());
    let mut prev = 0u8;
    for &v in x {
        y.push(v ^ prev);
        prev = v;
    }
    y
}

pub fn inverse_differential(y: &[u8]) -> QuatSeq {
    let mut acc = 0u8;
    y.iter()
        .map(|&v| {
            acc ^= v;
            acc
        })
        .collect()
}

/// Big-endian, two bits per symbol.
pub fn bits_to_symbols(bits: &[bool]) -> QuatSeq {
    assert!(bits.len() % 2 == 0, "odd bit count");
    bits.chunks_exact(2).map(|c| (c[0] as u8) << 1 | c[1] as u8).collect()
}

pub fn symbols_to_bits(s: &[u8]) -> Vec<bool> {
    s.iter().flat_map(|&v| [v & 2 != 0, v & 1 != 0]).collect()
}

/// Complement 0<->3, 1<->2 (A<->G, T<->C under this mapping, so GC count is mirrored).
pub fn complement(s: &[u8]) -> QuatSeq {
    s.iter().map(|&v| 3 - v).collect()
}
