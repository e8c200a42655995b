//! Fountain outer code: R10-style pre-code and seeded LT symbols.

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};
use crate::mt19937::Mt19937;
use serde::{Deserialize, Serialize};

/// Cumulative degree thresholds over 2^20 and their degrees.
const DEGREE_TABLE: [(u32, usize); 7] =
    [(10241, 1), (491582, 2), (712794, 3), (831695, 4), (948446, 10), (1032189, 11), (1048576, 40)];

pub const DEGREES: [usize; 7] = [1, 2, 3, 4, 10, 11, 40];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecodeParams {
    pub k: usize,
    pub x: usize,
    pub s: usize,
    pub h: usize,
    pub n_p: usize,
}

fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

pub fn precode_params(k: usize) -> Result<PrecodeParams> {
    if !(4..=65536).contains(&k) {
        return Err(Error::SourceCountOutOfRange(k));
    }
    let x = (1..).find(|&x: &usize| x * (x - 1) >= 2 * k).expect("unbounded");
    let s = (k.div_ceil(100) + x..).find(|&s| is_prime(s)).expect("primes are unbounded");
    let h = (1..).find(|&h| binomial(h, h.div_ceil(2)) >= (k + s) as u128).expect("unbounded");
    Ok(PrecodeParams { k, x, s, h, n_p: k + s + h })
}

#[derive(Debug, Clone)]
pub struct PrecodeSpec {
    pub params: PrecodeParams,
    /// (S + H) x n_p constraint matrix.
    pub hp: BitMatrix,
    /// Column lists for each constraint row, without the identity column.
    ldpc: Vec<Vec<usize>>,
    half: Vec<Vec<usize>>,
}

/// Width-`h` words of weight ceil(h/2), in Gray-code order.
fn gray_words(h: usize, count: usize) -> Vec<u64> {
    let w = h.div_ceil(2) as u32;
    (0u64..)
        .map(|i| i ^ (i >> 1))
        .filter(|g| g.count_ones() == w)
        .take(count)
        .collect()
}

pub fn build_precode(k: usize) -> Result<PrecodeSpec> {
    let params = precode_params(k)?;
    let PrecodeParams { s, h, n_p, .. } = params;
    let mut ldpc = vec![Vec::new(); s];
    for i in 0..k {
        let a = 1 + (i / s) % (s - 1);
        let b = i % s;
        for r in [b, (b + a) % s, (b + 2 * a) % s] {
            ldpc[r].push(i);
        }
    }
    let mut half = vec![Vec::new(); h];
    for (j, g) in gray_words(h, k + s).into_iter().enumerate() {
        for (r, cols) in half.iter_mut().enumerate() {
            if g >> r & 1 == 1 {
                cols.push(j);
            }
        }
    }
    let mut hp = BitMatrix::zeros(s + h, n_p);
    for (r, cols) in ldpc.iter().chain(&half).enumerate() {
        for &c in cols {
            hp.set(r, c, true);
        }
        hp.set(r, k + r, true);
    }
    Ok(PrecodeSpec { params, hp, ldpc, half })
}

/// n_p x l_d intermediate symbols; the first k rows are the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntermediateBlock {
    pub d: BitMatrix,
}

pub fn precode_encode(source: &BitMatrix, spec: &PrecodeSpec) -> IntermediateBlock {
    let PrecodeParams { k, s, n_p, .. } = spec.params;
    assert_eq!(source.nrows(), k, "source symbol count");
    let mut d = BitMatrix::zeros(n_p, source.cols);
    d.rows[..k].clone_from_slice(&source.rows);
    for (r, cols) in spec.ldpc.iter().enumerate() {
        let mut acc = BitVec::zeros(source.cols);
        for &c in cols {
            acc.xor_assign(&d.rows[c]);
        }
        d.rows[k + r] = acc;
    }
    for (r, cols) in spec.half.iter().enumerate() {
        let mut acc = BitVec::zeros(source.cols);
        for &c in cols {
            acc.xor_assign(&d.rows[c]);
        }
        d.rows[k + s + r] = acc;
    }
    IntermediateBlock { d }
}

pub fn recover_source(block: &IntermediateBlock, spec: &PrecodeSpec) -> BitMatrix {
    BitMatrix { rows: block.d.rows[..spec.params.k].to_vec(), cols: block.d.cols }
}

/// Positions of the ones in the generator vector for `seed`, in draw order.
pub fn generator_positions(seed: u16, n_p: usize) -> Vec<usize> {
    let mut mt = Mt19937::new(seed as u32);
    let v = mt.next_u32() & 0xF_FFFF;
    let d = DEGREE_TABLE.iter().find(|(t, _)| v < *t).map(|&(_, d)| d).expect("table covers 2^20");
    let d = d.min(n_p);
    let mut out = Vec::with_capacity(d);
    while out.len() < d {
        let p = (mt.next_u32() as u64 % n_p as u64) as usize;
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

pub fn generator_vector(seed: u16, n_p: usize) -> BitVec {
    let mut g = BitVec::zeros(n_p);
    for p in generator_positions(seed, n_p) {
        g.set(p, true);
    }
    g
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EncodedSymbol {
    pub seed: u16,
    pub payload: BitVec,
}

pub fn lt_encode(seed: u16, block: &IntermediateBlock) -> EncodedSymbol {
    let mut payload = BitVec::zeros(block.d.cols);
    for p in generator_positions(seed, block.d.nrows()) {
        payload.xor_assign(&block.d.rows[p]);
    }
    EncodedSymbol { seed, payload }
}
