//! Inner codes: an interleaved VT-style single-edit code (scheme 1) and a
//! two-symbol parity code that detects single edits (scheme 2), plus one-edit
//! candidate generation and cluster reconstruction.

use crate::error::{Error, Result};
use crate::quatseq::QuatSeq;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Scheme {
    One,
    Two,
}

impl TryFrom<u8> for Scheme {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Scheme::One),
            2 => Ok(Scheme::Two),
            _ => Err(format!("scheme must be 1 or 2, got {v}")),
        }
    }
}

impl From<Scheme> for u8 {
    fn from(s: Scheme) -> u8 {
        match s {
            Scheme::One => 1,
            Scheme::Two => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerMode {
    Detection,
    #[default]
    Decoding,
}

/// Sum of i * y_i over 1-indexed positions, reduced mod `modulus`.
pub fn vt_syndrome(y: &[bool], modulus: usize) -> usize {
    y.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i + 1).sum::<usize>() % modulus
}

pub fn interleave(odd: &[bool], even: &[bool]) -> Result<QuatSeq> {
    if odd.len() != even.len() {
        return Err(Error::LengthMismatch { expected: odd.len(), got: even.len() });
    }
    Ok(odd.iter().zip(even).map(|(&o, &e)| (o as u8) << 1 | e as u8).collect())
}

pub fn deinterleave(s: &[u8]) -> (Vec<bool>, Vec<bool>) {
    (s.iter().map(|&v| v & 2 != 0).collect(), s.iter().map(|&v| v & 1 != 0).collect())
}

/// Codeword layout and arithmetic for one scheme at length `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditCode {
    scheme: Scheme,
    n: usize,
    /// 1-indexed redundancy positions, ascending.
    redundancy: Vec<usize>,
    /// 1-indexed information positions, ascending.
    info: Vec<usize>,
    /// Powers of two below n (scheme 1 only).
    powers: Vec<usize>,
}

impl EditCode {
    pub fn new(scheme: Scheme, n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidConfig(format!("codeword length {n} too short")));
        }
        let (redundancy, powers) = match scheme {
            Scheme::One => {
                let powers: Vec<usize> = (0..).map(|j| 1usize << j).take_while(|&p| p < n).collect();
                let mut r = powers.clone();
                r.push(n);
                (r, powers)
            }
            Scheme::Two => (vec![n - 1, n], Vec::new()),
        };
        let info = (1..=n).filter(|i| !redundancy.contains(i)).collect();
        Ok(EditCode { scheme, n, redundancy, info, powers })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn redundancy_positions(&self) -> &[usize] {
        &self.redundancy
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info
    }

    pub fn info_len(&self) -> usize {
        self.info.len()
    }

    fn modulus(&self) -> usize {
        2 * self.n
    }

    /// Places `x` at the information positions and fills the redundancy.
    pub fn encode(&self, x: &[u8]) -> QuatSeq {
        assert_eq!(x.len(), self.info.len(), "information length");
        let mut y = vec![0u8; self.n];
        for (&p, &v) in self.info.iter().zip(x) {
            y[p - 1] = v;
        }
        match self.scheme {
            Scheme::One => {
                let (mut odd, mut even) = deinterleave(&y);
                self.fill_half(&mut odd);
                self.fill_half(&mut even);
                y = interleave(&odd, &even).expect("equal halves");
            }
            Scheme::Two => {
                let (a, b) = class_xor(&y[..self.n - 2]);
                // Position n-1 closes its own parity class, position n the other.
                let (own, other) = if (self.n - 1) % 2 == 1 { (a, b) } else { (b, a) };
                y[self.n - 2] = own;
                y[self.n - 1] = other;
            }
        }
        y
    }

    fn fill_half(&self, h: &mut [bool]) {
        let m = self.modulus();
        let s: usize = self.info.iter().filter(|&&p| h[p - 1]).sum();
        for &p in &self.redundancy {
            h[p - 1] = false;
        }
        for p in self.redundancy_set((m - s % m) % m) {
            h[p - 1] = true;
        }
    }

    /// Redundancy positions summing to `t` mod 2n: the binary expansion of
    /// t, or position n plus the expansion of t - n when t is too large.
    fn redundancy_set(&self, mut t: usize) -> Vec<usize> {
        let mut out = Vec::new();
        if t > (1usize << self.powers.len()) - 1 {
            out.push(self.n);
            t -= self.n;
        }
        out.extend(self.powers.iter().copied().filter(|&p| t & p != 0));
        out
    }

    pub fn strip(&self, cw: &[u8]) -> QuatSeq {
        self.info.iter().map(|&p| cw[p - 1]).collect()
    }

    pub fn validate(&self, s: &[u8]) -> bool {
        if s.len() != self.n {
            return false;
        }
        match self.scheme {
            Scheme::One => {
                let m = self.modulus();
                let (mut so, mut se) = (0, 0);
                for (i, &v) in s.iter().enumerate() {
                    if v & 2 != 0 {
                        so += i + 1;
                    }
                    if v & 1 != 0 {
                        se += i + 1;
                    }
                }
                so % m == 0 && se % m == 0
            }
            Scheme::Two => class_xor(s) == (0, 0),
        }
    }

    /// Valid codewords within one edit of `read`, sorted and deduplicated.
    pub fn candidates(&self, read: &[u8]) -> Vec<QuatSeq> {
        if self.validate(read) {
            return vec![read.to_vec()];
        }
        let mut out = match self.scheme {
            Scheme::One => self.candidates_vt(read),
            Scheme::Two => self.candidates_parity(read),
        };
        out.sort_unstable();
        out.dedup();
        out
    }

    fn candidates_vt(&self, r: &[u8]) -> Vec<QuatSeq> {
        let n = self.n;
        let m = self.modulus() as i64;
        let len = r.len();
        let mut out = Vec::new();
        if len + 1 < n || len > n + 1 {
            return out;
        }
        let bit = |v: u8, half: usize| if half == 0 { (v >> 1) as i64 } else { (v & 1) as i64 };
        let mut syn = [0i64; 2];
        for (i, &v) in r.iter().enumerate() {
            for (h, s) in syn.iter_mut().enumerate() {
                *s += (i as i64 + 1) * bit(v, h);
            }
        }
        // ones_after[h][i] = number of ones at 0-indexed positions >= i
        let mut ones_after = [vec![0i64; len + 1], vec![0i64; len + 1]];
        for i in (0..len).rev() {
            for (h, w) in ones_after.iter_mut().enumerate() {
                w[i] = w[i + 1] + bit(r[i], h);
            }
        }
        let zero = |x: i64| x.rem_euclid(m) == 0;
        if len == n + 1 {
            for i in 0..len {
                let p = i as i64 + 1;
                if (0..2).all(|h| zero(syn[h] - p * bit(r[i], h) - ones_after[h][i + 1])) {
                    let mut c = r.to_vec();
                    c.remove(i);
                    out.push(c);
                }
            }
        } else if len == n {
            for i in 0..len {
                let p = i as i64 + 1;
                for v in 0..4u8 {
                    if v != r[i] && (0..2).all(|h| zero(syn[h] + p * (bit(v, h) - bit(r[i], h)))) {
                        let mut c = r.to_vec();
                        c[i] = v;
                        out.push(c);
                    }
                }
            }
        } else {
            for g in 0..=len {
                let p = g as i64 + 1;
                for v in 0..4u8 {
                    if (0..2).all(|h| zero(syn[h] + p * bit(v, h) + ones_after[h][g])) {
                        let mut c = r.to_vec();
                        c.insert(g, v);
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    fn candidates_parity(&self, r: &[u8]) -> Vec<QuatSeq> {
        let n = self.n;
        let len = r.len();
        let mut out = Vec::new();
        if len + 1 < n || len > n + 1 {
            return out;
        }
        // pre[i] = class XORs (odd, even 1-indexed) of r[..i]
        let mut pre = vec![(0u8, 0u8); len + 1];
        for i in 0..len {
            let (a, b) = pre[i];
            pre[i + 1] = if i % 2 == 0 { (a ^ r[i], b) } else { (a, b ^ r[i]) };
        }
        let total = pre[len];
        let suffix = |i: usize| (total.0 ^ pre[i].0, total.1 ^ pre[i].1);
        if len == n + 1 {
            for i in 0..len {
                // Symbols after i move one place left and swap classes.
                let (sa, sb) = suffix(i + 1);
                let (pa, pb) = pre[i];
                if (pa ^ sb, pb ^ sa) == (0, 0) {
                    let mut c = r.to_vec();
                    c.remove(i);
                    out.push(c);
                }
            }
        } else if len == n {
            let (a, b) = total;
            for i in 0..len {
                let d = if i % 2 == 0 { a } else { b };
                let other = if i % 2 == 0 { b } else { a };
                if other == 0 && d != 0 {
                    let mut c = r.to_vec();
                    c[i] ^= d;
                    out.push(c);
                }
            }
        } else {
            for g in 0..=len {
                let (sa, sb) = suffix(g);
                let (pa, pb) = pre[g];
                let (a, b) = (pa ^ sb, pb ^ sa);
                // The new symbol lands at 1-indexed g + 1.
                let (need, rest) = if g % 2 == 0 { (a, b) } else { (b, a) };
                if rest == 0 {
                    let mut c = r.to_vec();
                    c.insert(g, need);
                    out.push(c);
                }
            }
        }
        out
    }
}

/// XOR of symbols at odd and even 1-indexed positions.
fn class_xor(s: &[u8]) -> (u8, u8) {
    s.iter().enumerate().fold((0, 0), |(a, b), (i, &v)| if i % 2 == 0 { (a ^ v, b) } else { (a, b ^ v) })
}

/// Fixed-width scheme-1 half encoder (239 bits to 248).
pub fn enc1_half(x: &[bool]) -> Vec<bool> {
    let code = EditCode::new(Scheme::One, 248).expect("static length");
    let nts: Vec<u8> = x.iter().map(|&b| (b as u8) << 1).collect();
    deinterleave(&code.encode(&nts)).0
}

/// 478 input bits as 239 (odd, even) pairs.
pub fn enc1(x: &[bool]) -> QuatSeq {
    assert_eq!(x.len(), 478);
    let code = EditCode::new(Scheme::One, 248).expect("static length");
    code.encode(&crate::quatseq::bits_to_symbols(x))
}

pub fn enc2(x: &[u8]) -> QuatSeq {
    assert_eq!(x.len(), 246);
    EditCode::new(Scheme::Two, 248).expect("static length").encode(x)
}

/// Most frequent codeword across the reads' candidate lists, if unique.
pub fn reconstruct_cluster<S: AsRef<[u8]>>(
    reads: &[S],
    code: &EditCode,
    mode: InnerMode,
) -> Option<(QuatSeq, usize)> {
    let mut distinct: HashMap<&[u8], usize> = HashMap::new();
    for r in reads {
        *distinct.entry(r.as_ref()).or_default() += 1;
    }
    let mut votes: HashMap<QuatSeq, usize> = HashMap::new();
    for (read, k) in distinct {
        match mode {
            InnerMode::Detection => {
                if code.validate(read) {
                    *votes.entry(read.to_vec()).or_default() += k;
                }
            }
            InnerMode::Decoding => {
                for c in code.candidates(read) {
                    *votes.entry(c).or_default() += k;
                }
            }
        }
    }
    let best = *votes.values().max()?;
    let mut top = votes.into_iter().filter(|(_, v)| *v == best);
    let winner = top.next()?;
    if top.next().is_some() {
        return None;
    }
    Some(winner)
}
