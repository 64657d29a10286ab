//! Sentence-level distortions and the content-word shuffle over POS-tagged
//! text.
//!
//! Input is one token per line, `surface<TAB>coarse<TAB>fine`, with a blank
//! line between sentences.

use std::collections::{BTreeMap, HashMap};

use crate::corpus::TokenSequence;
use crate::error::{Error, Result};
use crate::stream::{derive_stream, RandomStream, SeedSpec};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaggedToken {
    pub surface: String,
    pub coarse_pos: String,
    pub fine_pos: String,
    /// First character is uppercase.
    pub is_capitalized: bool,
}

fn starts_upper(s: &str) -> bool {
    s.chars().next().is_some_and(char::is_uppercase)
}

impl TaggedToken {
    pub fn new(surface: impl Into<String>, coarse_pos: impl Into<String>, fine_pos: impl Into<String>) -> Result<Self> {
        let surface = surface.into();
        if surface.is_empty() {
            return Err(Error::param("token surface must be non-empty"));
        }
        Ok(Self {
            is_capitalized: starts_upper(&surface),
            surface,
            coarse_pos: coarse_pos.into(),
            fine_pos: fine_pos.into(),
        })
    }

    fn with_surface(&self, surface: String) -> Self {
        Self {
            is_capitalized: starts_upper(&surface),
            surface,
            coarse_pos: self.coarse_pos.clone(),
            fine_pos: self.fine_pos.clone(),
        }
    }
}

/// Sentences of tagged tokens; no sentence is empty.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TaggedDocument {
    sentences: Vec<Vec<TaggedToken>>,
}

impl TaggedDocument {
    pub fn new(sentences: Vec<Vec<TaggedToken>>) -> Result<Self> {
        if let Some(i) = sentences.iter().position(Vec::is_empty) {
            return Err(Error::param(format!("sentence {i} is empty")));
        }
        Ok(Self { sentences })
    }

    pub fn sentences(&self) -> &[Vec<TaggedToken>] {
        &self.sentences
    }

    pub fn into_sentences(self) -> Vec<Vec<TaggedToken>> {
        self.sentences
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    /// Applies `f` to each sentence; `f` never empties a sentence.
    fn map_sentences(&self, f: impl FnMut(&[TaggedToken]) -> Vec<TaggedToken>) -> Self {
        Self {
            sentences: self.sentences.iter().map(Vec::as_slice).map(f).collect(),
        }
    }

    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut sentences = Vec::new();
        let mut current = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                if !current.is_empty() {
                    sentences.push(std::mem::take(&mut current));
                }
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [surface, coarse, fine] = fields[..] else {
                return Err(Error::parse(i + 1, format!("expected 3 tab-separated fields, got {}", fields.len())));
            };
            if surface.is_empty() || coarse.is_empty() || fine.is_empty() {
                return Err(Error::parse(i + 1, "empty field"));
            }
            current.push(TaggedToken::new(surface, coarse, fine)?);
        }
        if !current.is_empty() {
            sentences.push(current);
        }
        Ok(Self { sentences })
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, sentence) in self.sentences.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            for t in sentence {
                out.push_str(&format!("{}\t{}\t{}\n", t.surface, t.coarse_pos, t.fine_pos));
            }
        }
        out
    }

    /// Surface tokens of each sentence.
    pub fn to_sequences(&self) -> Result<Vec<TokenSequence>> {
        self.sentences
            .iter()
            .map(|s| TokenSequence::from_tokens(s.iter().map(|t| t.surface.as_str())))
            .collect()
    }
}

/// Permutation of `0..len` determined by `(master_seed, len)` alone.
pub fn window_permutation(master_seed: u64, len: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..len).collect();
    derive_stream(SeedSpec::new(master_seed, len as u64)).shuffle(&mut perm);
    perm
}

/// Splits each sentence into consecutive windows of `window` tokens (the last
/// possibly shorter) and reorders each window by the permutation for its
/// length, so equal-length windows are permuted identically.
pub fn deterministic_shuffle(doc: &TaggedDocument, window: usize, master_seed: u64) -> Result<TaggedDocument> {
    if window == 0 {
        return Err(Error::param("shuffle window must be at least 1"));
    }
    let mut perms: HashMap<usize, Vec<usize>> = HashMap::new();
    Ok(doc.map_sentences(|sentence| {
        sentence
            .chunks(window)
            .flat_map(|chunk| {
                let perm = perms
                    .entry(chunk.len())
                    .or_insert_with(|| window_permutation(master_seed, chunk.len()));
                perm.iter().map(|&j| chunk[j].clone()).collect::<Vec<_>>()
            })
            .collect()
    }))
}

pub fn full_reverse(doc: &TaggedDocument) -> TaggedDocument {
    doc.map_sentences(|s| s.iter().rev().cloned().collect())
}

pub const VERB: &str = "VERB";
pub const PUNCT: &str = "PUNCT";
/// Coarse and fine tag carried by inserted hop markers.
pub const MARKER_TAG: &str = "HOP";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopParams {
    pub distance: usize,
    pub marker: String,
    /// Leave punctuation out of the word count.
    pub skip_punct: bool,
}

impl Default for HopParams {
    fn default() -> Self {
        Self {
            distance: 4,
            marker: "MARK".into(),
            skip_punct: true,
        }
    }
}

impl HopParams {
    fn marker_token(&self) -> TaggedToken {
        TaggedToken::new(self.marker.clone(), MARKER_TAG, MARKER_TAG).expect("validated marker")
    }

    fn validate(&self) -> Result<()> {
        if self.distance == 0 {
            return Err(Error::param("hop distance must be at least 1"));
        }
        if self.marker.is_empty() || self.marker.chars().any(char::is_whitespace) {
            return Err(Error::param(format!("invalid marker surface {:?}", self.marker)));
        }
        Ok(())
    }
}

/// Index after which the marker for the verb at `verb` goes: the
/// `distance`-th counted word to its right, or the sentence end.
fn hop_target(sentence: &[TaggedToken], verb: usize, params: &HopParams) -> usize {
    let mut seen = 0;
    for (j, t) in sentence.iter().enumerate().skip(verb + 1) {
        if params.skip_punct && t.coarse_pos == PUNCT {
            continue;
        }
        seen += 1;
        if seen == params.distance {
            return j;
        }
    }
    sentence.len() - 1
}

/// Inserts one marker per VERB token, `distance` words after it (clamped to
/// the sentence end). Targets are computed on the original sentence.
pub fn word_hop(doc: &TaggedDocument, params: &HopParams) -> Result<TaggedDocument> {
    params.validate()?;
    let marker = params.marker_token();
    Ok(doc.map_sentences(|sentence| {
        let mut targets: Vec<usize> = sentence
            .iter()
            .enumerate()
            .filter(|(_, t)| t.coarse_pos == VERB)
            .map(|(i, _)| hop_target(sentence, i, params))
            .collect();
        targets.sort_unstable();
        let mut out = sentence.to_vec();
        for &t in targets.iter().rev() {
            out.insert(t + 1, marker.clone());
        }
        out
    }))
}

/// Inverse of [`word_hop`]: drops every token carrying the marker tag.
pub fn remove_markers(doc: &TaggedDocument, marker: &str) -> TaggedDocument {
    doc.map_sentences(|s| {
        s.iter()
            .filter(|t| !(t.fine_pos == MARKER_TAG && t.coarse_pos == MARKER_TAG && t.surface == marker))
            .cloned()
            .collect()
    })
}

pub const CONTENT_POS: [&str; 4] = ["NOUN", "VERB", "ADJ", "ADV"];

pub fn is_content(t: &TaggedToken) -> bool {
    CONTENT_POS.contains(&t.coarse_pos.as_str())
}

/// `surface` with its first character upper- or lower-cased.
fn recase(surface: &str, capitalized: bool) -> String {
    let mut chars = surface.chars();
    let Some(first) = chars.next() else {
        return String::new();
    };
    let mut out: String = if capitalized {
        first.to_uppercase().collect()
    } else {
        first.to_lowercase().collect()
    };
    out.push_str(chars.as_str());
    out
}

/// Shuffles content words within fine-tag buckets. Buckets span the whole
/// document, or runs of `batch_sentences` sentences when given. Replacements
/// take the capitalization of the word they replace.
pub fn jabberwocky(
    doc: &TaggedDocument,
    stream: &mut RandomStream,
    batch_sentences: Option<usize>,
) -> Result<TaggedDocument> {
    let batch = match batch_sentences {
        Some(0) => return Err(Error::param("batch size must be at least 1")),
        Some(n) => n,
        None => doc.sentences.len().max(1),
    };
    let mut sentences = doc.sentences.clone();
    for start in (0..sentences.len()).step_by(batch) {
        let end = (start + batch).min(sentences.len());
        let mut buckets: BTreeMap<&str, Vec<(usize, usize)>> = BTreeMap::new();
        for (si, sentence) in doc.sentences[start..end].iter().enumerate() {
            for (ti, t) in sentence.iter().enumerate() {
                if is_content(t) {
                    buckets.entry(t.fine_pos.as_str()).or_default().push((start + si, ti));
                }
            }
        }
        for positions in buckets.values() {
            let mut surfaces: Vec<&str> = positions
                .iter()
                .map(|&(s, t)| doc.sentences[s][t].surface.as_str())
                .collect();
            stream.shuffle(&mut surfaces);
            for (&(s, t), surface) in positions.iter().zip(surfaces) {
                let original = &doc.sentences[s][t];
                sentences[s][t] = original.with_surface(recase(surface, original.is_capitalized));
            }
        }
    }
    Ok(TaggedDocument { sentences })
}
