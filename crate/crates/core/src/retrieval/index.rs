//! Inverted index over analyzed document text.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::{Cursor, Read};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rayon::prelude::*;

use crate::corpus::ParsedDocument;
use crate::error::{Error, Result};
use crate::text::tokenize;

const MAGIC: &[u8; 4] = b"ARIX";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

/// Immutable inverted index. Documents are numbered by input order.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedCorpus {
    doc_ids: Vec<String>,
    doc_lengths: Vec<u32>,
    /// Sorted vocabulary; term ids index into it.
    terms: Vec<String>,
    /// Postings per term id, sorted by document ordinal.
    postings: Vec<Vec<Posting>>,
    avgdl: f64,
    total_terms: u64,
    /// Per document: (term id, tf), sorted by term id. Derived from postings.
    forward: Vec<Vec<(u32, u32)>>,
    ordinals: HashMap<String, u32>,
}

impl IndexedCorpus {
    /// Index analyzed text. Tokenization runs in parallel; the result
    /// depends only on the input order.
    pub fn build<I>(docs: I) -> Result<Self>
    where
        I: IntoIterator<Item = ParsedDocument>,
    {
        let docs: Vec<ParsedDocument> = docs.into_iter().collect();
        let mut seen = HashSet::with_capacity(docs.len());
        for d in &docs {
            if !seen.insert(d.doc_id.as_str()) {
                return Err(Error::DuplicateDocument(d.doc_id.clone()));
            }
        }
        let analyzed: Vec<Vec<String>> = docs.par_iter().map(|d| tokenize(&d.text)).collect();

        let mut by_term: BTreeMap<&str, Vec<Posting>> = BTreeMap::new();
        let mut doc_lengths = Vec::with_capacity(docs.len());
        for (ord, tokens) in analyzed.iter().enumerate() {
            doc_lengths.push(tokens.len() as u32);
            let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
            for t in tokens {
                *counts.entry(t.as_str()).or_default() += 1;
            }
            for (t, tf) in counts {
                by_term.entry(t).or_default().push(Posting {
                    doc: ord as u32,
                    tf,
                });
            }
        }
        let (terms, postings): (Vec<String>, Vec<Vec<Posting>>) =
            by_term.into_iter().map(|(t, p)| (t.to_owned(), p)).unzip();
        let doc_ids = docs.into_iter().map(|d| d.doc_id).collect();
        Ok(Self::assemble(doc_ids, doc_lengths, terms, postings))
    }

    fn assemble(
        doc_ids: Vec<String>,
        doc_lengths: Vec<u32>,
        terms: Vec<String>,
        postings: Vec<Vec<Posting>>,
    ) -> Self {
        let total_terms: u64 = doc_lengths.iter().map(|&l| l as u64).sum();
        let avgdl = if doc_lengths.is_empty() {
            0.0
        } else {
            total_terms as f64 / doc_lengths.len() as f64
        };
        let mut forward = vec![Vec::new(); doc_ids.len()];
        for (tid, plist) in postings.iter().enumerate() {
            for p in plist {
                forward[p.doc as usize].push((tid as u32, p.tf));
            }
        }
        let ordinals = doc_ids
            .iter()
            .enumerate()
            .map(|(i, d)| (d.clone(), i as u32))
            .collect();
        IndexedCorpus {
            doc_ids,
            doc_lengths,
            terms,
            postings,
            avgdl,
            total_terms,
            forward,
            ordinals,
        }
    }

    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn avgdl(&self) -> f64 {
        self.avgdl
    }

    pub fn vocabulary_size(&self) -> usize {
        self.terms.len()
    }

    pub fn total_terms(&self) -> u64 {
        self.total_terms
    }

    pub fn doc_id(&self, ord: u32) -> &str {
        &self.doc_ids[ord as usize]
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_ordinal(&self, doc_id: &str) -> Option<u32> {
        self.ordinals.get(doc_id).copied()
    }

    pub fn doc_length(&self, ord: u32) -> u32 {
        self.doc_lengths[ord as usize]
    }

    pub fn term_id(&self, term: &str) -> Option<u32> {
        self.terms
            .binary_search_by(|t| t.as_str().cmp(term))
            .ok()
            .map(|i| i as u32)
    }

    pub fn term(&self, id: u32) -> &str {
        &self.terms[id as usize]
    }

    pub fn postings(&self, term_id: u32) -> &[Posting] {
        &self.postings[term_id as usize]
    }

    pub fn doc_freq(&self, term_id: u32) -> usize {
        self.postings[term_id as usize].len()
    }

    /// Collection frequency of a term.
    pub fn coll_freq(&self, term_id: u32) -> u64 {
        self.postings[term_id as usize]
            .iter()
            .map(|p| p.tf as u64)
            .sum()
    }

    /// (term id, tf) pairs of one document, sorted by term id.
    pub fn doc_terms(&self, ord: u32) -> &[(u32, u32)] {
        &self.forward[ord as usize]
    }

    /// Little-endian binary serialization: header (magic, version, N,
    /// avgdl, vocabulary size), documents, then postings.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.write_u32::<LittleEndian>(FORMAT_VERSION).unwrap();
        out.write_u64::<LittleEndian>(self.doc_ids.len() as u64)
            .unwrap();
        out.write_f64::<LittleEndian>(self.avgdl).unwrap();
        out.write_u64::<LittleEndian>(self.terms.len() as u64)
            .unwrap();
        for (id, len) in self.doc_ids.iter().zip(&self.doc_lengths) {
            write_str(&mut out, id);
            out.write_u32::<LittleEndian>(*len).unwrap();
        }
        for (term, plist) in self.terms.iter().zip(&self.postings) {
            write_str(&mut out, term);
            out.write_u32::<LittleEndian>(plist.len() as u32).unwrap();
            for p in plist {
                out.write_u32::<LittleEndian>(p.doc).unwrap();
                out.write_u32::<LittleEndian>(p.tf).unwrap();
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Cursor::new(bytes);
        let bad = |m: &str| Error::IndexFormat(m.to_owned());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)
            .map_err(|_| bad("truncated header"))?;
        if &magic != MAGIC {
            return Err(bad("not an index file"));
        }
        let version = r
            .read_u32::<LittleEndian>()
            .map_err(|_| bad("truncated header"))?;
        if version != FORMAT_VERSION {
            return Err(Error::IndexFormat(format!(
                "unsupported index version {version}"
            )));
        }
        let read = |r: &mut Cursor<&[u8]>| -> Result<(u64, f64, u64)> {
            Ok((
                r.read_u64::<LittleEndian>()
                    .map_err(|_| bad("truncated header"))?,
                r.read_f64::<LittleEndian>()
                    .map_err(|_| bad("truncated header"))?,
                r.read_u64::<LittleEndian>()
                    .map_err(|_| bad("truncated header"))?,
            ))
        };
        let (n, avgdl, vocab) = read(&mut r)?;
        let mut doc_ids = Vec::new();
        let mut doc_lengths = Vec::new();
        for _ in 0..n {
            doc_ids.push(read_str(&mut r)?);
            doc_lengths.push(
                r.read_u32::<LittleEndian>()
                    .map_err(|_| bad("truncated documents"))?,
            );
        }
        let mut terms = Vec::new();
        let mut postings = Vec::new();
        for _ in 0..vocab {
            terms.push(read_str(&mut r)?);
            let count = r
                .read_u32::<LittleEndian>()
                .map_err(|_| bad("truncated postings"))?;
            let mut plist = Vec::with_capacity(count as usize);
            for _ in 0..count {
                let doc = r
                    .read_u32::<LittleEndian>()
                    .map_err(|_| bad("truncated postings"))?;
                let tf = r
                    .read_u32::<LittleEndian>()
                    .map_err(|_| bad("truncated postings"))?;
                if doc as u64 >= n {
                    return Err(bad("posting refers to unknown document"));
                }
                plist.push(Posting { doc, tf });
            }
            postings.push(plist);
        }
        if (r.position() as usize) != bytes.len() {
            return Err(bad("trailing bytes"));
        }
        let index = Self::assemble(doc_ids, doc_lengths, terms, postings);
        if index.avgdl.to_bits() != avgdl.to_bits() {
            return Err(bad("header avgdl disagrees with document lengths"));
        }
        Ok(index)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

fn write_str(out: &mut Vec<u8>, s: &str) {
    out.write_u32::<LittleEndian>(s.len() as u32).unwrap();
    out.extend_from_slice(s.as_bytes());
}

fn read_str(r: &mut Cursor<&[u8]>) -> Result<String> {
    let len = r
        .read_u32::<LittleEndian>()
        .map_err(|_| Error::IndexFormat("truncated string".into()))?;
    let mut buf = vec![0u8; len as usize];
    r.read_exact(&mut buf)
        .map_err(|_| Error::IndexFormat("truncated string".into()))?;
    String::from_utf8(buf).map_err(|_| Error::IndexFormat("invalid utf-8".into()))
}
