//! Outer decoding: basis finding with representation-frequency voting, the
//! plain elimination baseline, and the rank oracle used as an upper bound.

use crate::error::{Error, Result};
use crate::fountain::{generator_positions, EncodedSymbol, IntermediateBlock, PrecodeSpec};
use crate::gf2::{BitMatrix, BitVec, Echelon};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOrigin {
    Constraint(usize),
    Symbol { seed: u16, frequency: usize },
}

/// Rows are generator part (n_p bits) followed by payload (l_d bits), most
/// reliable first; constraint rows always lead.
#[derive(Debug, Clone)]
pub struct ReceivedMatrix {
    pub rows: Vec<BitVec>,
    pub origins: Vec<RowOrigin>,
    pub n_p: usize,
    pub l_d: usize,
}

impl ReceivedMatrix {
    pub fn constraint_count(&self) -> usize {
        self.origins.iter().take_while(|o| matches!(o, RowOrigin::Constraint(_))).count()
    }
}

fn symbol_row(sym: &EncodedSymbol, n_p: usize, l_d: usize) -> BitVec {
    let mut row = BitVec::zeros(n_p + l_d);
    for p in generator_positions(sym.seed, n_p) {
        row.set(p, true);
    }
    for i in sym.payload.ones() {
        row.set(n_p + i, true);
    }
    row
}

/// Constraint rows, then symbols by frequency descending, seed ascending.
pub fn build_received(spec: &PrecodeSpec, symbols: &[(EncodedSymbol, usize)], l_d: usize) -> ReceivedMatrix {
    let mut order: Vec<usize> = (0..symbols.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(symbols[i].1), symbols[i].0.seed));
    build_in_order(spec, order.into_iter().map(|i| &symbols[i]), l_d)
}

/// Constraint rows followed by the symbols exactly as given.
pub fn build_in_order<'a>(
    spec: &PrecodeSpec,
    symbols: impl IntoIterator<Item = &'a (EncodedSymbol, usize)>,
    l_d: usize,
) -> ReceivedMatrix {
    let n_p = spec.params.n_p;
    let mut rows = Vec::new();
    let mut origins = Vec::new();
    for (r, h) in spec.hp.rows.iter().enumerate() {
        rows.push(h.concat(&BitVec::zeros(l_d)));
        origins.push(RowOrigin::Constraint(r));
    }
    for (sym, f) in symbols {
        assert_eq!(sym.payload.len(), l_d, "payload width");
        rows.push(symbol_row(sym, n_p, l_d));
        origins.push(RowOrigin::Symbol { seed: sym.seed, frequency: *f });
    }
    ReceivedMatrix { rows, origins, n_p, l_d }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    /// Indices into R of the basis rows, in scan order.
    pub rows: Vec<usize>,
}

/// Basis rows plus how often each one takes part in representing a row of R.
fn basis_with_counts(r: &ReceivedMatrix) -> (Basis, Vec<usize>) {
    let width = r.n_p + r.l_d;
    let cap = r.rows.len().min(width);
    let mut ech = Echelon::new(width, width);
    // Combination of basis members making up each stored echelon row.
    let mut combos: Vec<BitVec> = Vec::new();
    let mut basis = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut used = Vec::new();
    for (i, row) in r.rows.iter().enumerate() {
        used.clear();
        let residual = ech.reduce(row.clone(), Some(&mut used));
        let mut combo = BitVec::zeros(cap);
        for &u in &used {
            combo.xor_assign(&combos[u]);
        }
        if residual.is_zero() {
            for j in combo.ones() {
                counts[j] += 1;
            }
        } else {
            let j = basis.len();
            combo.flip(j);
            ech.push_reduced(residual);
            combos.push(combo);
            basis.push(i);
            counts.push(1);
        }
    }
    (Basis { rows: basis }, counts)
}

pub fn find_basis(r: &ReceivedMatrix) -> Basis {
    basis_with_counts(r).0
}

/// Count per basis vector (aligned with `b.rows`).
pub fn representation_frequencies(r: &ReceivedMatrix, b: &Basis) -> Vec<usize> {
    let (own, counts) = basis_with_counts(r);
    if own == *b {
        return counts;
    }
    // A basis from elsewhere: expand every row over it directly.
    let width = r.n_p + r.l_d;
    let mut ech = Echelon::new(width, width);
    let mut combos: Vec<BitVec> = Vec::new();
    let mut used = Vec::new();
    for (j, &i) in b.rows.iter().enumerate() {
        used.clear();
        let residual = ech.reduce(r.rows[i].clone(), Some(&mut used));
        let mut combo = BitVec::zeros(b.rows.len());
        for &u in &used {
            combo.xor_assign(&combos[u]);
        }
        combo.flip(j);
        assert!(ech.push_reduced(residual).is_some(), "basis rows must be independent");
        combos.push(combo);
    }
    let mut counts = vec![0; b.rows.len()];
    for row in &r.rows {
        used.clear();
        let residual = ech.reduce(row.clone(), Some(&mut used));
        assert!(residual.is_zero(), "row outside the span of the basis");
        let mut combo = BitVec::zeros(b.rows.len());
        for &u in &used {
            combo.xor_assign(&combos[u]);
        }
        for j in combo.ones() {
            counts[j] += 1;
        }
    }
    counts
}

/// Admits rows of R in `order` while they raise the generator rank, then
/// solves for the intermediate symbols.
fn solve_in_order(r: &ReceivedMatrix, order: impl IntoIterator<Item = usize>) -> Result<IntermediateBlock> {
    let mut ech = Echelon::new(r.n_p, r.n_p + r.l_d);
    for i in order {
        if ech.is_full() {
            break;
        }
        ech.insert(r.rows[i].clone());
    }
    let rank = ech.rank();
    let sol = ech.solve().ok_or(Error::DecodeFailure { rank_achieved: rank, needed: r.n_p })?;
    Ok(IntermediateBlock { d: BitMatrix { rows: sol, cols: r.l_d } })
}

pub fn bfa_solve(r: &ReceivedMatrix, b: &Basis, counts: &[usize]) -> Result<IntermediateBlock> {
    let nc = r.constraint_count();
    let mut cand: Vec<(usize, usize)> = b.rows.iter().zip(counts).map(|(&i, &c)| (i, c)).collect();
    // Constraints first, then by count, then by reliability rank.
    cand.sort_by_key(|&(i, c)| (i >= nc, std::cmp::Reverse(c), i));
    let constraints = (0..nc).filter(|i| !b.rows.contains(i));
    solve_in_order(r, constraints.chain(cand.into_iter().map(|(i, _)| i)))
}

/// Full basis-finding decode of R.
pub fn bfa_decode(r: &ReceivedMatrix) -> Result<IntermediateBlock> {
    let (b, counts) = basis_with_counts(r);
    bfa_solve(r, &b, &counts)
}

/// Constraints plus symbols in the row order of R, until full rank.
pub fn sge_baseline(r: &ReceivedMatrix) -> Result<IntermediateBlock> {
    solve_in_order(r, 0..r.rows.len())
}

/// Whether the generator vectors of `seeds` together with the constraints
/// reach rank n_p.
pub fn oracle_ub(spec: &PrecodeSpec, seeds: impl IntoIterator<Item = u16>) -> bool {
    generator_rank(spec, seeds) == spec.params.n_p
}

pub fn generator_rank(spec: &PrecodeSpec, seeds: impl IntoIterator<Item = u16>) -> usize {
    let n_p = spec.params.n_p;
    let mut ech = Echelon::new(n_p, n_p);
    for h in &spec.hp.rows {
        ech.insert(h.clone());
    }
    for s in seeds {
        if ech.is_full() {
            break;
        }
        let mut g = BitVec::zeros(n_p);
        for p in generator_positions(s, n_p) {
            g.set(p, true);
        }
        ech.insert(g);
    }
    ech.rank()
}

/// Fraction of symbol rows whose payload agrees with `block`.
pub fn consistency(r: &ReceivedMatrix, block: &IntermediateBlock) -> f64 {
    let sym: Vec<&BitVec> = r
        .rows
        .iter()
        .zip(&r.origins)
        .filter(|(_, o)| matches!(o, RowOrigin::Symbol { .. }))
        .map(|(row, _)| row)
        .collect();
    if sym.is_empty() {
        return 1.0;
    }
    let ok = sym
        .iter()
        .filter(|row| {
            let g = row.slice(0, r.n_p);
            block.d.combine(&g) == row.slice(r.n_p, r.n_p + r.l_d)
        })
        .count();
    ok as f64 / sym.len() as f64
}
