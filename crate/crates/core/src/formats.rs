//! FASTA designs, FASTQ reads and the truth sidecar.

use crate::channel::{Read, ReadSet};
use crate::editecc::Scheme;
use crate::error::{Error, Result};
use crate::pipeline::DesignFile;
use crate::quatseq::{map_symbols, to_text, QuatSeq};
use std::collections::HashMap;
use std::fmt::Write;

const QUALITY: char = 'I';

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l)).enumerate().map(|(i, l)| (i + 1, l))
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// One record per oligo, id `scheme<k>_seed<v>`, sequence on a single line.
/// Primers wrap each sequence when given.
pub fn write_fasta(design: &DesignFile, primers: Option<(&str, &str)>) -> String {
    let (p5, p3) = primers.unwrap_or(("", ""));
    let mut out = String::new();
    for (seed, seq) in &design.entries {
        let _ = writeln!(out, ">scheme{}_seed{}\n{p5}{}{p3}", u8::from(design.scheme), seed, to_text(seq));
    }
    out
}

/// Inverse of [`write_fasta`]; primers are stripped when both are present on a record.
pub fn parse_fasta(text: &str, primers: Option<(&str, &str)>) -> Result<DesignFile> {
    let mut scheme = None;
    let mut entries: Vec<(u16, QuatSeq)> = Vec::new();
    let mut pending: Option<(usize, u16)> = None;
    for (ln, line) in lines(text) {
        if line.is_empty() && pending.is_none() {
            continue;
        }
        if let Some(id) = line.strip_prefix('>') {
            if let Some((l, _)) = pending {
                return Err(parse_err(l, "record without sequence"));
            }
            let (s, seed) = id
                .strip_prefix("scheme")
                .and_then(|r| r.split_once("_seed"))
                .ok_or_else(|| parse_err(ln, format!("bad record id {id:?}")))?;
            let s = match s {
                "1" => Scheme::One,
                "2" => Scheme::Two,
                _ => return Err(parse_err(ln, format!("unknown scheme {s:?}"))),
            };
            if scheme.is_some_and(|x| x != s) {
                return Err(parse_err(ln, "mixed schemes in one design"));
            }
            scheme = Some(s);
            let seed = seed.parse().map_err(|_| parse_err(ln, format!("bad seed {seed:?}")))?;
            pending = Some((ln, seed));
        } else {
            let (_, seed) = pending.take().ok_or_else(|| parse_err(ln, "sequence without header"))?;
            let mut s = line;
            if let Some((p5, p3)) = primers {
                if s.len() >= p5.len() + p3.len() && s.starts_with(p5) && s.ends_with(p3) {
                    s = &s[p5.len()..s.len() - p3.len()];
                }
            }
            let seq = map_symbols(s).map_err(|e| parse_err(ln, e.to_string()))?;
            entries.push((seed, seq));
        }
    }
    if let Some((l, _)) = pending {
        return Err(parse_err(l, "record without sequence"));
    }
    let scheme = scheme.ok_or_else(|| parse_err(0, "empty design"))?;
    Ok(DesignFile { scheme, entries })
}

pub fn read_id(i: usize) -> String {
    format!("read{i}")
}

/// Four-line records with a constant quality string.
pub fn write_fastq(reads: &ReadSet, primers: Option<(&str, &str)>) -> String {
    let (p5, p3) = primers.unwrap_or(("", ""));
    let mut out = String::new();
    for (i, r) in reads.reads.iter().enumerate() {
        let q: String = std::iter::repeat_n(QUALITY, r.seq.len() + p5.len() + p3.len()).collect();
        let _ = writeln!(out, "@{}\n{p5}{}{p3}\n+\n{q}", read_id(i), to_text(&r.seq));
    }
    out
}

/// Reads with unknown origin. `trim` drops that many symbols from each end.
pub fn parse_fastq(text: &str, trim: (usize, usize)) -> Result<ReadSet> {
    let mut all: Vec<(usize, &str)> = lines(text).collect();
    while all.len() % 4 != 0 && all.last().is_some_and(|l| l.1.is_empty()) {
        all.pop();
    }
    if all.len() % 4 != 0 {
        return Err(parse_err(all.last().map_or(0, |l| l.0), "truncated FASTQ record"));
    }
    let mut reads = Vec::with_capacity(all.len() / 4);
    for rec in all.chunks(4) {
        let (ln, head) = rec[0];
        if !head.starts_with('@') {
            return Err(parse_err(ln, "expected '@' header"));
        }
        if !rec[2].1.starts_with('+') {
            return Err(parse_err(rec[2].0, "expected '+' separator"));
        }
        if rec[3].1.len() != rec[1].1.len() {
            return Err(parse_err(rec[3].0, "quality length differs from sequence"));
        }
        let s = rec[1].1;
        let s = if s.len() >= trim.0 + trim.1 { &s[trim.0..s.len() - trim.1] } else { "" };
        let seq = map_symbols(s).map_err(|e| parse_err(rec[1].0, e.to_string()))?;
        reads.push(Read { seq, origin: None });
    }
    Ok(ReadSet { reads })
}

/// `read_id,origin` rows; unknown origins are left blank.
pub fn write_truth(reads: &ReadSet) -> String {
    let mut out = String::from("read_id,origin\n");
    for (i, r) in reads.reads.iter().enumerate() {
        let o = r.origin.map(|o| o.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{o}", read_id(i));
    }
    out
}

/// Fills in origins from a truth sidecar, matching reads by position id.
pub fn apply_truth(reads: &mut ReadSet, text: &str) -> Result<()> {
    let mut map: HashMap<&str, Option<usize>> = HashMap::new();
    for (ln, line) in lines(text).skip(1) {
        if line.is_empty() {
            continue;
        }
        let (id, o) = line.split_once(',').ok_or_else(|| parse_err(ln, "expected read_id,origin"))?;
        let o = if o.is_empty() { None } else { Some(o.parse().map_err(|_| parse_err(ln, format!("bad origin {o:?}")))?) };
        map.insert(id, o);
    }
    for (i, r) in reads.reads.iter_mut().enumerate() {
        r.origin = *map.get(read_id(i).as_str()).ok_or(Error::MissingTruth(i))?;
    }
    Ok(())
}
