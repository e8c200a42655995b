//! Dense GF(2) vectors and matrices packed into u64 words.

use serde::{Deserialize, Serialize};

#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl std::fmt::Debug for BitVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: String = (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect();
        write!(f, "BitVec({s})")
    }
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        debug_assert!(i < self.len);
        let m = 1u64 << (i & 63);
        if b {
            self.words[i >> 6] |= m;
        } else {
            self.words[i >> 6] &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Lowest set bit strictly below `limit`.
    #[inline]
    pub fn first_one_below(&self, limit: usize) -> Option<usize> {
        let limit = limit.min(self.len);
        for (wi, &w) in self.words.iter().enumerate() {
            if wi * 64 >= limit {
                break;
            }
            if w != 0 {
                let i = wi * 64 + w.trailing_zeros() as usize;
                return (i < limit).then_some(i);
            }
        }
        None
    }

    pub fn first_one(&self) -> Option<usize> {
        self.first_one_below(self.len)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            })
        })
    }

    pub fn concat(&self, other: &BitVec) -> BitVec {
        let mut v = BitVec::zeros(self.len + other.len);
        v.words[..self.words.len()].copy_from_slice(&self.words);
        for i in other.ones() {
            v.set(self.len + i, true);
        }
        v
    }

    pub fn slice(&self, start: usize, end: usize) -> BitVec {
        let mut v = BitVec::zeros(end - start);
        for i in start..end {
            if self.get(i) {
                v.set(i - start, true);
            }
        }
        v
    }

    pub fn dot(&self, other: &BitVec) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitMatrix {
    pub rows: Vec<BitVec>,
    pub cols: usize,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix { rows: vec![BitVec::zeros(cols); rows], cols }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, b: bool) {
        self.rows[r].set(c, b)
    }

    /// Row vector times matrix: XOR of the rows selected by `g`.
    pub fn combine(&self, g: &BitVec) -> BitVec {
        debug_assert_eq!(g.len(), self.nrows());
        let mut acc = BitVec::zeros(self.cols);
        for r in g.ones() {
            acc.xor_assign(&self.rows[r]);
        }
        acc
    }

    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.nrows());
        BitMatrix { rows: self.rows.iter().map(|r| other.combine(r)).collect(), cols: other.cols }
    }

    pub fn rank(&self) -> usize {
        let mut e = Echelon::new(self.cols, self.cols);
        self.rows.iter().filter(|r| e.insert((*r).clone()).is_some()).count()
    }
}

/// Incremental row echelon form; each stored row's pivot is its lowest set
/// bit below `limit`. Bits at or above `limit` ride along (e.g. a payload).
#[derive(Clone, Debug)]
pub struct Echelon {
    limit: usize,
    width: usize,
    pivot_row: Vec<Option<usize>>,
    rows: Vec<BitVec>,
    pivots: Vec<usize>,
}

impl Echelon {
    pub fn new(limit: usize, width: usize) -> Self {
        Echelon { limit, width, pivot_row: vec![None; limit], rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.limit
    }

    /// Reduces `v` against stored rows. Returns the residual and the stored
    /// row indices used.
    pub fn reduce(&self, mut v: BitVec, used: Option<&mut Vec<usize>>) -> BitVec {
        let mut used = used;
        while let Some(p) = v.first_one_below(self.limit) {
            match self.pivot_row[p] {
                Some(r) => {
                    v.xor_assign(&self.rows[r]);
                    if let Some(u) = used.as_deref_mut() {
                        u.push(r);
                    }
                }
                None => break,
            }
        }
        v
    }

    /// Inserts `v` if it is independent below `limit`; returns its pivot.
    pub fn insert(&mut self, v: BitVec) -> Option<usize> {
        debug_assert_eq!(v.len(), self.width);
        let v = self.reduce(v, None);
        self.push_reduced(v)
    }

    /// Stores an already reduced row.
    pub fn push_reduced(&mut self, v: BitVec) -> Option<usize> {
        let p = v.first_one_below(self.limit)?;
        debug_assert!(self.pivot_row[p].is_none());
        self.pivot_row[p] = Some(self.rows.len());
        self.rows.push(v);
        self.pivots.push(p);
        Some(p)
    }

    /// Back-substitution once the echelon is full rank: returns, for each
    /// column c < limit, the bits of the stored rows beyond `limit`
    /// (the unique solution of the system).
    pub fn solve(&self) -> Option<Vec<BitVec>> {
        if !self.is_full() {
            return None;
        }
        let out_w = self.width - self.limit;
        let mut sol: Vec<Option<BitVec>> = vec![None; self.limit];
        for p in (0..self.limit).rev() {
            let row = &self.rows[self.pivot_row[p]?];
            let mut x = row.slice(self.limit, self.width);
            debug_assert_eq!(x.len(), out_w);
            for c in row.ones() {
                if c >= self.limit {
                    break;
                }
                if c > p {
                    x.xor_assign(sol[c].as_ref().expect("higher pivots solved first"));
                }
            }
            sol[p] = Some(x);
        }
        Some(sol.into_iter().map(|x| x.expect("full rank")).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn random_matrix(rng: &mut impl Rng, r: usize, c: usize, density: f64) -> BitMatrix {
        let mut m = BitMatrix::zeros(r, c);
        for i in 0..r {
            for j in 0..c {
                if rng.gen_bool(density) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Textbook elimination on Vec<Vec<bool>>, independent of the packed code.
    fn rank_oracle(m: &BitMatrix) -> usize {
        let mut a: Vec<Vec<bool>> = m.rows.iter().map(|r| r.to_bools()).collect();
        let mut rank = 0;
        for c in 0..m.cols {
            let Some(p) = (rank..a.len()).find(|&i| a[i][c]) else { continue };
            a.swap(rank, p);
            for i in 0..a.len() {
                if i != rank && a[i][c] {
                    let pr = a[rank].clone();
                    for (x, y) in a[i].iter_mut().zip(pr) {
                        *x ^= y;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn rank_matches_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for &(r, c, d) in &[(50, 60, 0.5), (60, 50, 0.5), (80, 130, 0.05), (10, 200, 0.3)] {
            for _ in 0..20 {
                let m = random_matrix(&mut rng, r, c, d);
                assert_eq!(m.rank(), rank_oracle(&m));
            }
        }
    }

    #[test]
    fn solve_random_system() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let n = 70;
        let x = random_matrix(&mut rng, n, 90, 0.5);
        let mut e = Echelon::new(n, n + 90);
        while !e.is_full() {
            let g = random_matrix(&mut rng, 1, n, 0.1).rows.pop().unwrap();
            let rhs = x.combine(&g);
            e.insert(g.concat(&rhs));
        }
        let sol = e.solve().unwrap();
        assert_eq!(sol, x.rows);
    }

    #[test]
    fn bit_ops() {
        let mut v = BitVec::zeros(130);
        v.set(0, true);
        v.set(64, true);
        v.set(129, true);
        assert_eq!(v.ones().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert_eq!(v.first_one_below(1), Some(0));
        v.flip(0);
        assert_eq!(v.first_one_below(64), None);
        assert_eq!(v.first_one_below(65), Some(64));
        assert_eq!(v.count_ones(), 2);
        let w = BitVec::from_bools(&[true, false, true]);
        let c = w.concat(&v);
        assert_eq!(c.len(), 133);
        assert_eq!(c.ones().collect::<Vec<_>>(), vec![0, 2, 67, 132]);
        assert_eq!(c.slice(3, 133), v);
    }

    proptest! {
        #[test]
        fn bools_round_trip(bits in prop::collection::vec(any::<bool>(), 0..300)) {
            let v = BitVec::from_bools(&bits);
            prop_assert_eq!(v.to_bools(), bits.clone());
            prop_assert_eq!(v.count_ones(), bits.iter().filter(|&&b| b).count());
        }

        #[test]
        fn duplicate_rows_do_not_raise_rank(seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut m = random_matrix(&mut rng, 20, 40, 0.4);
            let r0 = m.rank();
            let dup = m.rows[3].clone();
            m.rows.push(dup);
            prop_assert_eq!(m.rank(), r0);
        }
    }
}
