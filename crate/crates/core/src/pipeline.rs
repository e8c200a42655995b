//! Frame layout and end-to-end encode/decode.
//!
//! Oligo layout: indicator, then a 248-nt edit codeword whose information part
//! is the 8-nt seed followed by the SRT-coded payload, then the indicator again.

use crate::bfa::{bfa_decode, build_received};
use crate::editecc::{reconstruct_cluster, EditCode, InnerMode, Scheme};
use crate::error::{Error, Result};
use crate::fountain::{build_precode, lt_encode, precode_encode, recover_source, EncodedSymbol, IntermediateBlock, PrecodeSpec};
use crate::gf2::{BitMatrix, BitVec};
use crate::quatseq::{bits_to_symbols, map_symbols, screen, symbols_to_bits, QuatSeq, ScreenPolicy};
use crate::srt::{srt_decode, srt_encode, SrtConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

pub const PRIMER_5: &str = "GCAGCCCAATGTGTTCGGTCTAC";
pub const PRIMER_3: &str = "ACTGGGTGTTGTCTCTTCGAGCC";
const SEED_SPACE: usize = 1 << 16;
const HEADER_BITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub payload_nt: usize,
    pub seed_nt: usize,
    pub srt: SrtConfig,
    pub codeword_nt: usize,
    pub screen: ScreenPolicy,
    pub k_p: usize,
    pub n_oligos: usize,
    pub primer_5: String,
    pub primer_3: String,
}

impl SchemeConfig {
    /// Full-scale parameters for a scheme: 30000 oligos.
    pub fn full(scheme: Scheme) -> Self {
        match scheme {
            Scheme::One => Self::desk(scheme, 28500, 30000),
            Scheme::Two => Self::desk(scheme, 28970, 30000),
        }
    }

    pub fn desk(scheme: Scheme, k_p: usize, n_oligos: usize) -> Self {
        SchemeConfig {
            scheme,
            payload_nt: match scheme {
                Scheme::One => 226,
                Scheme::Two => 233,
            },
            seed_nt: 8,
            srt: SrtConfig::default(),
            codeword_nt: 248,
            screen: ScreenPolicy::default(),
            k_p,
            n_oligos,
            primer_5: PRIMER_5.into(),
            primer_3: PRIMER_3.into(),
        }
    }

    pub fn segment_bits(&self) -> usize {
        2 * self.payload_nt
    }

    pub fn srt_len(&self) -> usize {
        self.srt.encoded_len(self.payload_nt)
    }

    pub fn indicator(&self) -> u8 {
        match self.scheme {
            Scheme::One => 0,
            Scheme::Two => 2,
        }
    }

    pub fn edit_code(&self) -> EditCode {
        EditCode::new(self.scheme, self.codeword_nt).expect("validated length")
    }

    pub fn oligo_len(&self, primers: bool) -> usize {
        let core = self.codeword_nt + 2;
        if primers {
            core + self.primer_5.len() + self.primer_3.len()
        } else {
            core
        }
    }

    /// Net information density in bits per nucleotide, indicators excluded.
    pub fn density(&self) -> f64 {
        2.0 * self.payload_nt as f64 / self.codeword_nt as f64 * self.k_p as f64 / self.n_oligos as f64
    }

    pub fn capacity_bytes(&self) -> usize {
        (self.k_p * self.segment_bits()).saturating_sub(HEADER_BITS) / 8
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        self.srt.validate()?;
        self.screen.validate()?;
        if self.seed_nt != 8 {
            return bad(format!("seed must be 8 nt, got {}", self.seed_nt));
        }
        let code = EditCode::new(self.scheme, self.codeword_nt)?;
        let info = self.srt_len() + self.seed_nt;
        if info != code.info_len() {
            return bad(format!(
                "{} payload + {} SRT + {} seed = {info} does not fill {} information symbols",
                self.payload_nt,
                self.srt_len() - self.payload_nt,
                self.seed_nt,
                code.info_len()
            ));
        }
        if self.k_p < 4 || self.n_oligos == 0 || self.n_oligos > SEED_SPACE {
            return bad(format!("k_p = {}, n_oligos = {}", self.k_p, self.n_oligos));
        }
        map_symbols(&self.primer_5)?;
        map_symbols(&self.primer_3)?;
        Ok(())
    }
}

/// Keystream seed for whitening the source block.
pub const WHITENING_SEED: u32 = 0x5EED_D7A1;

/// XORs the block with a fixed MT19937 keystream so sparse or constant files
/// still yield balanced payloads. Applying it twice is the identity.
pub fn whiten(m: &mut BitMatrix) {
    let mut mt = crate::mt19937::Mt19937::new(WHITENING_SEED);
    for row in &mut m.rows {
        let mut key = BitVec::zeros(row.len());
        for i in 0..row.len() {
            if i % 32 == 0 {
                let w = mt.next_u32();
                for b in 0..32.min(row.len() - i) {
                    key.set(i + b, w >> b & 1 == 1);
                }
            }
        }
        row.xor_assign(&key);
    }
}

/// Prepends a 64-bit big-endian length, zero-pads to k_p rows of l_d bits and
/// whitens the result.
pub fn segment_file(data: &[u8], cfg: &SchemeConfig) -> Result<BitMatrix> {
    let cap = cfg.capacity_bytes();
    if data.len() > cap {
        return Err(Error::FileTooLarge { size: data.len(), capacity: cap });
    }
    let l = cfg.segment_bits();
    let mut m = BitMatrix::zeros(cfg.k_p, l);
    let header = (data.len() as u64).to_be_bytes();
    for (i, byte) in header.iter().chain(data).enumerate() {
        for b in 0..8 {
            if byte >> (7 - b) & 1 == 1 {
                let bit = i * 8 + b;
                m.set(bit / l, bit % l, true);
            }
        }
    }
    whiten(&mut m);
    Ok(m)
}

pub fn desegment(m: &BitMatrix) -> Result<Vec<u8>> {
    let mut m = m.clone();
    whiten(&mut m);
    let l = m.cols;
    let total = m.nrows() * l;
    let byte = |i: usize| (0..8).fold(0u8, |acc, b| {
        let bit = i * 8 + b;
        acc << 1 | m.get(bit / l, bit % l) as u8
    });
    let len = u64::from_be_bytes(std::array::from_fn(byte)) as usize;
    if len > (total - HEADER_BITS) / 8 {
        return Err(Error::InvalidConfig(format!("length header {len} exceeds block capacity")));
    }
    Ok((0..len).map(|i| byte(i + 8)).collect())
}

fn seed_symbols(seed: u16, n: usize) -> QuatSeq {
    (0..n).map(|i| (seed >> (2 * (n - 1 - i)) & 3) as u8).collect()
}

fn symbols_seed(s: &[u8]) -> u16 {
    s.iter().fold(0u16, |acc, &v| acc << 2 | v as u16)
}

/// Builds the 250-nt oligo (indicators included, primers excluded).
pub fn frame(sym: &EncodedSymbol, cfg: &SchemeConfig, code: &EditCode) -> QuatSeq {
    assert_eq!(sym.payload.len(), cfg.segment_bits(), "payload width");
    let payload = bits_to_symbols(&sym.payload.to_bools());
    let mut info = seed_symbols(sym.seed, cfg.seed_nt);
    info.extend(srt_encode(&payload, &cfg.srt));
    let cw = code.encode(&info);
    let ind = cfg.indicator();
    let mut out = Vec::with_capacity(cw.len() + 2);
    out.push(ind);
    out.extend(cw);
    out.push(ind);
    out
}

/// Seed and payload from a valid codeword (indicators already removed).
pub fn decode_codeword(cw: &[u8], cfg: &SchemeConfig, code: &EditCode) -> Result<EncodedSymbol> {
    let info = code.strip(cw);
    let seed = symbols_seed(&info[..cfg.seed_nt]);
    let payload = srt_decode(&info[cfg.seed_nt..], &cfg.srt, cfg.payload_nt)?;
    Ok(EncodedSymbol { seed, payload: BitVec::from_bools(&symbols_to_bits(&payload)) })
}

pub fn deframe(oligo: &[u8], cfg: &SchemeConfig, code: &EditCode) -> Result<EncodedSymbol> {
    if oligo.len() != cfg.codeword_nt + 2 {
        return Err(Error::LengthMismatch { expected: cfg.codeword_nt + 2, got: oligo.len() });
    }
    let cw = &oligo[1..oligo.len() - 1];
    if !code.validate(cw) {
        return Err(Error::InvalidSequence);
    }
    decode_codeword(cw, cfg, code)
}

/// Seed read at its nominal systematic positions.
pub fn extract_seed(read: &[u8], cfg: &SchemeConfig, code: &EditCode) -> u16 {
    let nts: Vec<u8> = code.info_positions()[..cfg.seed_nt]
        .iter()
        .map(|&p| read.get(p - 1).copied().unwrap_or(0))
        .collect();
    symbols_seed(&nts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFile {
    pub scheme: Scheme,
    pub entries: Vec<(u16, QuatSeq)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodeReport {
    pub scheme: Scheme,
    pub k_p: usize,
    pub n_oligos: usize,
    pub file_bytes: usize,
    pub seeds_tried: usize,
    pub accepted: usize,
    pub acceptance_rate: f64,
    pub net_density: f64,
    pub oligo_len: usize,
    pub accepted_seeds: Vec<u16>,
}

/// What `encode` records next to a design: the frame ledger and the run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub payload_nt: usize,
    pub srt_nt: usize,
    pub seed_nt: usize,
    pub ecc_nt: usize,
    pub codeword_nt: usize,
    pub oligo_nt: usize,
    pub oligo_nt_with_primers: usize,
    pub primers_attached: bool,
    #[serde(flatten)]
    pub report: EncodeReport,
}

impl Manifest {
    pub fn new(cfg: &SchemeConfig, report: EncodeReport, primers_attached: bool) -> Self {
        let srt = cfg.srt_len();
        Manifest {
            payload_nt: cfg.payload_nt,
            srt_nt: srt - cfg.payload_nt,
            seed_nt: cfg.seed_nt,
            ecc_nt: cfg.codeword_nt - srt - cfg.seed_nt,
            codeword_nt: cfg.codeword_nt,
            oligo_nt: cfg.oligo_len(false),
            oligo_nt_with_primers: cfg.oligo_len(true),
            primers_attached,
            report,
        }
    }

    /// Density rounded to the three decimals quoted for each scheme.
    pub fn density_text(&self) -> String {
        format!("{:.3}", self.report.net_density)
    }
}

/// Everything the encoder produced, including the intermediate block.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub design: DesignFile,
    pub block: IntermediateBlock,
    pub spec: PrecodeSpec,
    pub report: EncodeReport,
}

pub fn encode_file(data: &[u8], cfg: &SchemeConfig) -> Result<Encoded> {
    cfg.validate()?;
    let source = segment_file(data, cfg)?;
    let spec = build_precode(cfg.k_p)?;
    let block = precode_encode(&source, &spec);
    let code = cfg.edit_code();
    let mut entries = Vec::with_capacity(cfg.n_oligos);
    let mut tried = 0;
    const CHUNK: usize = 2048;
    while entries.len() < cfg.n_oligos && tried < SEED_SPACE {
        let hi = (tried + CHUNK).min(SEED_SPACE);
        let batch: Vec<Option<(u16, QuatSeq)>> = (tried..hi)
            .into_par_iter()
            .map(|s| {
                let seed = s as u16;
                let oligo = frame(&lt_encode(seed, &block), cfg, &code);
                screen(&oligo, &cfg.screen).then_some((seed, oligo))
            })
            .collect();
        for (s, hit) in (tried..hi).zip(batch) {
            if entries.len() == cfg.n_oligos {
                break;
            }
            tried = s + 1;
            if let Some(e) = hit {
                entries.push(e);
            }
        }
    }
    let rate = entries.len() as f64 / tried.max(1) as f64;
    if entries.len() < cfg.n_oligos {
        return Err(Error::EncodingStalled { accepted: entries.len(), wanted: cfg.n_oligos, rate });
    }
    let report = EncodeReport {
        scheme: cfg.scheme,
        k_p: cfg.k_p,
        n_oligos: cfg.n_oligos,
        file_bytes: data.len(),
        seeds_tried: tried,
        accepted: entries.len(),
        acceptance_rate: rate,
        net_density: cfg.density(),
        oligo_len: cfg.oligo_len(true),
        accepted_seeds: entries.iter().map(|e| e.0).collect(),
    };
    Ok(Encoded { design: DesignFile { scheme: cfg.scheme, entries }, block, spec, report })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InnerReport {
    pub reads: usize,
    pub length_filtered: usize,
    pub indicator_mismatches: usize,
    pub clusters: usize,
    pub out_of_set_clusters: usize,
    pub reconstruction_failures: usize,
    pub srt_invalid: usize,
    pub symbols: usize,
}

#[derive(Debug, Clone)]
pub struct InnerResult {
    /// Distinct (seed, payload) symbols with summed frequencies.
    pub symbols: Vec<(EncodedSymbol, usize)>,
    pub report: InnerReport,
}

/// Length filter, clustering by seed, reconstruction and SRT decoding.
/// `known_seeds`, when given, only feeds the out-of-set diagnostic.
pub fn inner_decode<S: AsRef<[u8]> + Sync>(
    reads: &[S],
    cfg: &SchemeConfig,
    mode: InnerMode,
    known_seeds: Option<&std::collections::HashSet<u16>>,
) -> InnerResult {
    let code = cfg.edit_code();
    let l0 = cfg.codeword_nt + 2;
    let ind = cfg.indicator();
    let mut report = InnerReport { reads: reads.len(), ..Default::default() };
    let mut clusters: BTreeMap<u16, Vec<&[u8]>> = BTreeMap::new();
    for r in reads {
        let r = r.as_ref();
        if r.len() + 1 < l0 || r.len() > l0 + 1 {
            report.length_filtered += 1;
            continue;
        }
        if r[0] != ind || r[r.len() - 1] != ind {
            report.indicator_mismatches += 1;
        }
        let body = &r[1..r.len() - 1];
        clusters.entry(extract_seed(body, cfg, &code)).or_default().push(body);
    }
    report.clusters = clusters.len();
    if let Some(k) = known_seeds {
        report.out_of_set_clusters = clusters.keys().filter(|s| !k.contains(s)).count();
    }
    let decoded: Vec<Option<Result<(EncodedSymbol, usize)>>> = clusters
        .par_iter()
        .map(|(_, reads)| {
            reconstruct_cluster(reads, &code, mode)
                .map(|(cw, f)| decode_codeword(&cw, cfg, &code).map(|s| (s, f)))
        })
        .collect();
    let mut merged: HashMap<EncodedSymbol, usize> = HashMap::new();
    for d in decoded {
        match d {
            None => report.reconstruction_failures += 1,
            Some(Err(_)) => report.srt_invalid += 1,
            Some(Ok((s, f))) => *merged.entry(s).or_default() += f,
        }
    }
    let mut symbols: Vec<(EncodedSymbol, usize)> = merged.into_iter().collect();
    symbols.sort_by(|a, b| (a.0.seed, a.0.payload.words()).cmp(&(b.0.seed, b.0.payload.words())));
    report.symbols = symbols.len();
    InnerResult { symbols, report }
}

pub fn outer_decode(symbols: &[(EncodedSymbol, usize)], spec: &PrecodeSpec, l_d: usize) -> Result<IntermediateBlock> {
    bfa_decode(&build_received(spec, symbols, l_d))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecodeReport {
    #[serde(flatten)]
    pub inner: InnerReport,
    pub rank_needed: usize,
    pub rank_achieved: usize,
    pub success: bool,
    pub error: Option<String>,
}

pub fn decode_reads<S: AsRef<[u8]> + Sync>(
    reads: &[S],
    cfg: &SchemeConfig,
    mode: InnerMode,
) -> (Result<Vec<u8>>, DecodeReport) {
    let mut report = DecodeReport::default();
    if reads.is_empty() {
        report.error = Some(Error::EmptyReadSet.to_string());
        return (Err(Error::EmptyReadSet), report);
    }
    let result = (|| {
        cfg.validate()?;
        let spec = build_precode(cfg.k_p)?;
        report.rank_needed = spec.params.n_p;
        let inner = inner_decode(reads, cfg, mode, None);
        report.inner = inner.report.clone();
        let block = outer_decode(&inner.symbols, &spec, cfg.segment_bits()).inspect_err(|e| {
            if let Error::DecodeFailure { rank_achieved, .. } = e {
                report.rank_achieved = *rank_achieved;
            }
        })?;
        report.rank_achieved = spec.params.n_p;
        desegment(&recover_source(&block, &spec))
    })();
    report.success = result.is_ok();
    report.error = result.as_ref().err().map(|e| e.to_string());
    (result, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quatseq::max_homopolymer_run;
    use rand::{Rng, SeedableRng};

    #[test]
    fn frame_arithmetic() {
        let c1 = SchemeConfig::full(Scheme::One);
        let c2 = SchemeConfig::full(Scheme::Two);
        c1.validate().unwrap();
        c2.validate().unwrap();
        assert_eq!((c1.payload_nt, c1.srt_len(), c1.srt_len() + 8, c1.codeword_nt), (226, 231, 239, 248));
        assert_eq!((c2.payload_nt, c2.srt_len(), c2.srt_len() + 8, c2.codeword_nt), (233, 238, 246, 248));
        assert_eq!((c1.oligo_len(false), c1.oligo_len(true)), (250, 296));
        assert_eq!(format!("{:.3}", c1.density()), "1.731");
        assert_eq!(format!("{:.3}", c2.density()), "1.815");
        assert_eq!(c1.segment_bits(), 452);
        assert_eq!(c2.segment_bits(), 466);
        assert_eq!(c1.capacity_bytes(), (28500 * 452 - 64) / 8);
        let mut bad = c1.clone();
        bad.payload_nt = 227;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn segmentation_round_trip() {
        let cfg = SchemeConfig::desk(Scheme::One, 20, 30);
        let mut m = segment_file(&[], &cfg).unwrap();
        whiten(&mut m);
        assert!(m.rows.iter().all(|r| r.is_zero()));
        whiten(&mut m);
        assert_eq!(desegment(&m).unwrap(), Vec::<u8>::new());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for len in [1, 7, 100, cfg.capacity_bytes()] {
            let f: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
            assert_eq!(desegment(&segment_file(&f, &cfg).unwrap()).unwrap(), f);
        }
        let too_big = vec![0u8; cfg.capacity_bytes() + 1];
        assert!(matches!(segment_file(&too_big, &cfg), Err(Error::FileTooLarge { .. })));
    }

    #[test]
    fn frame_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for scheme in [Scheme::One, Scheme::Two] {
            let cfg = SchemeConfig::full(scheme);
            let code = cfg.edit_code();
            for _ in 0..2000 {
                let bits: Vec<bool> = (0..cfg.segment_bits()).map(|_| rng.gen()).collect();
                let sym = EncodedSymbol { seed: rng.gen(), payload: BitVec::from_bools(&bits) };
                let o = frame(&sym, &cfg, &code);
                assert_eq!(o.len(), 250);
                assert_eq!((o[0], o[249]), (cfg.indicator(), cfg.indicator()));
                assert_eq!(extract_seed(&o[1..249], &cfg, &code), sym.seed);
                assert_eq!(deframe(&o, &cfg, &code).unwrap(), sym);
            }
        }
    }

    #[test]
    fn seed_positions() {
        let cfg = SchemeConfig::full(Scheme::One);
        let code = cfg.edit_code();
        assert_eq!(&code.info_positions()[..8], &[3, 5, 6, 7, 9, 10, 11, 12]);
        let cfg2 = SchemeConfig::full(Scheme::Two);
        assert_eq!(&cfg2.edit_code().info_positions()[..8], &[1, 2, 3, 4, 5, 6, 7, 8]);
        assert_eq!(seed_symbols(0x1234, 8), vec![0, 1, 0, 2, 0, 3, 1, 0]);
        assert_eq!(symbols_seed(&seed_symbols(0xBEEF, 8)), 0xBEEF);
    }

    #[test]
    fn encode_decode_clean() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for scheme in [Scheme::One, Scheme::Two] {
            let cfg = SchemeConfig::desk(scheme, 100, 110);
            let f: Vec<u8> = (0..2000).map(|_| rng.gen()).collect();
            let enc = encode_file(&f, &cfg).unwrap();
            assert_eq!(enc.design.entries.len(), 110);
            let m = Manifest::new(&cfg, enc.report.clone(), false);
            let ledger = (m.payload_nt, m.srt_nt, m.seed_nt, m.ecc_nt, m.codeword_nt);
            match scheme {
                Scheme::One => assert_eq!(ledger, (226, 5, 8, 9, 248)),
                Scheme::Two => assert_eq!(ledger, (233, 5, 8, 2, 248)),
            }
            assert_eq!(m.payload_nt + m.srt_nt + m.seed_nt + m.ecc_nt, m.codeword_nt);
            assert!(enc.design.entries.windows(2).all(|w| w[0].0 < w[1].0));
            for (_, o) in &enc.design.entries {
                assert!(screen(o, &cfg.screen));
                assert!(max_homopolymer_run(o) <= 3);
            }
            let reads: Vec<&QuatSeq> = enc.design.entries.iter().map(|e| &e.1).collect();
            for mode in [InnerMode::Detection, InnerMode::Decoding] {
                let (out, rep) = decode_reads(&reads, &cfg, mode);
                assert_eq!(out.unwrap(), f);
                assert!(rep.success);
                assert_eq!(rep.inner.symbols, 110);
            }
        }
    }

    #[test]
    fn sparse_files_still_encode() {
        let cfg = SchemeConfig::desk(Scheme::One, 1000, 1053);
        let enc = encode_file(&[], &cfg).unwrap();
        assert!(enc.report.acceptance_rate > 0.4, "{}", enc.report.acceptance_rate);
        let reads: Vec<&QuatSeq> = enc.design.entries.iter().map(|e| &e.1).collect();
        assert_eq!(decode_reads(&reads, &cfg, InnerMode::Detection).0.unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn erasures_and_rank_deficit() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        // Rate 1000/1180: a 10% loss still leaves enough symbols.
        let cfg = SchemeConfig::desk(Scheme::One, 1000, 1180);
        let f: Vec<u8> = (0..50_000).map(|_| rng.gen()).collect();
        let enc = encode_file(&f, &cfg).unwrap();
        let keep: Vec<&QuatSeq> = enc.design.entries.iter().filter(|_| rng.gen_bool(0.9)).map(|e| &e.1).collect();
        assert_eq!(decode_reads(&keep, &cfg, InnerMode::Detection).0.unwrap(), f);
        // Reads from only half the oligos of a rate-0.95 design cannot reach full rank.
        let cfg = SchemeConfig::desk(Scheme::One, 1000, 1053);
        let enc = encode_file(&f, &cfg).unwrap();
        let half: Vec<&QuatSeq> = enc.design.entries.iter().step_by(2).map(|e| &e.1).collect();
        let (out, rep) = decode_reads(&half, &cfg, InnerMode::Detection);
        assert!(matches!(out, Err(Error::DecodeFailure { .. })));
        assert!(rep.rank_achieved < rep.rank_needed);
        assert!(decode_reads::<QuatSeq>(&[], &cfg, InnerMode::Detection).0.is_err());
    }
}
