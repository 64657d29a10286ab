//! Token sequences, corpus records and the two corpus file formats.
//!
//! * `plain`: one sequence per line, tokens joined by a single space.
//! * `jsonl`: one object per line with keys `tokens`, `language_tag`,
//!   `master_seed`, `stream_id`, `params_digest` and `metadata`.
//!
//! Both formats terminate every record with `\n`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::stream::{SeedSpec, RNG_ALGORITHM};

/// Ordered list of whitespace-free, non-empty tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct TokenSequence(Vec<String>);

fn check_token(tok: &str) -> Result<()> {
    if tok.is_empty() {
        return Err(Error::param("empty token"));
    }
    if tok.chars().any(char::is_whitespace) {
        return Err(Error::param(format!("token {tok:?} contains whitespace")));
    }
    Ok(())
}

impl TokenSequence {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        for t in &tokens {
            check_token(t)?;
        }
        Ok(Self(tokens))
    }

    /// Splits on any run of whitespace; never fails.
    pub fn from_text(text: &str) -> Self {
        Self(text.split_whitespace().map(str::to_owned).collect())
    }

    /// Crate-internal constructor for generator output, whose tokens are
    /// drawn from fixed whitespace-free inventories.
    pub(crate) fn from_vec_unchecked(tokens: Vec<String>) -> Self {
        debug_assert!(tokens.iter().all(|t| check_token(t).is_ok()));
        Self(tokens)
    }

    pub fn push(&mut self, token: impl Into<String>) -> Result<()> {
        let token = token.into();
        check_token(&token)?;
        self.0.push(token);
        Ok(())
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    pub fn extend(&mut self, other: TokenSequence) {
        self.0.extend(other.0);
    }

    pub fn truncate(&mut self, len: usize) {
        self.0.truncate(len);
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(t)?;
        }
        Ok(())
    }
}

impl<'de> Deserialize<'de> for TokenSequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let tokens = Vec::<String>::deserialize(d)?;
        TokenSequence::from_tokens(tokens).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LanguageTag {
    Dyck1,
    Ksd,
    Mpstruct,
    MpstructAblated,
    Core,
    GenericKsd,
    Perturbed,
    /// Records read from plain text, which carries no tag.
    Unlabeled,
}

impl LanguageTag {
    pub fn as_str(self) -> &'static str {
        match self {
            LanguageTag::Dyck1 => "dyck1",
            LanguageTag::Ksd => "ksd",
            LanguageTag::Mpstruct => "mpstruct",
            LanguageTag::MpstructAblated => "mpstruct_ablated",
            LanguageTag::Core => "core",
            LanguageTag::GenericKsd => "generic_ksd",
            LanguageTag::Perturbed => "perturbed",
            LanguageTag::Unlabeled => "unlabeled",
        }
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LanguageTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.replace('-', "_").as_str() {
            "dyck1" => LanguageTag::Dyck1,
            "ksd" => LanguageTag::Ksd,
            "mpstruct" => LanguageTag::Mpstruct,
            "mpstruct_ablated" => LanguageTag::MpstructAblated,
            "core" => LanguageTag::Core,
            "generic_ksd" => LanguageTag::GenericKsd,
            "perturbed" => LanguageTag::Perturbed,
            "unlabeled" => LanguageTag::Unlabeled,
            other => return Err(Error::param(format!("unknown language tag {other:?}"))),
        })
    }
}

pub type Metadata = BTreeMap<String, serde_json::Value>;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusRecord {
    pub sequence: TokenSequence,
    pub language_tag: LanguageTag,
    pub seed: SeedSpec,
    pub params_digest: String,
    pub metadata: Metadata,
}

impl CorpusRecord {
    /// A record with no provenance, as produced by the plain format.
    pub fn bare(sequence: TokenSequence) -> Self {
        Self {
            sequence,
            language_tag: LanguageTag::Unlabeled,
            seed: SeedSpec::new(0, 0),
            params_digest: String::new(),
            metadata: Metadata::new(),
        }
    }
}

/// On-disk shape of a jsonl record.
#[derive(Serialize, Deserialize)]
struct JsonRecord {
    tokens: TokenSequence,
    language_tag: LanguageTag,
    master_seed: u64,
    stream_id: u64,
    params_digest: String,
    #[serde(default)]
    metadata: Metadata,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorpusFormat {
    Plain,
    Jsonl,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(CorpusFormat::Plain),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(Error::param(format!("unknown corpus format {other:?}"))),
        }
    }
}

/// Canonical digest of a parameter set.
///
/// The parameters are encoded as JSON with object keys sorted, wrapped together
/// with [`RNG_ALGORITHM`], and hashed with SHA-256.
pub fn params_digest<P: Serialize>(params: &P) -> String {
    let value = serde_json::to_value(params).expect("parameters serialize to JSON");
    let canonical = serde_json::json!({ "params": value, "rng": RNG_ALGORITHM });
    // serde_json's default map is a BTreeMap, so keys come out sorted.
    let encoded = serde_json::to_string(&canonical).expect("JSON value encodes");
    let hash = Sha256::digest(encoded.as_bytes());
    format!("sha256:{}", hex::encode(&hash[..16]))
}

pub fn write_record(out: &mut Vec<u8>, record: &CorpusRecord, format: CorpusFormat) {
    match format {
        CorpusFormat::Plain => {
            out.extend_from_slice(record.sequence.to_string().as_bytes());
        }
        CorpusFormat::Jsonl => {
            let json = JsonRecord {
                tokens: record.sequence.clone(),
                language_tag: record.language_tag,
                master_seed: record.seed.master_seed,
                stream_id: record.seed.stream_id,
                params_digest: record.params_digest.clone(),
                metadata: record.metadata.clone(),
            };
            serde_json::to_writer(&mut *out, &json).expect("record encodes");
        }
    }
    out.push(b'\n');
}

pub fn serialize_corpus(records: &[CorpusRecord], format: CorpusFormat) -> Vec<u8> {
    let mut out = Vec::new();
    for r in records {
        write_record(&mut out, r, format);
    }
    out
}

pub fn parse_record_line(line: &str, line_no: usize, format: CorpusFormat) -> Result<CorpusRecord> {
    match format {
        CorpusFormat::Plain => Ok(CorpusRecord::bare(TokenSequence::from_text(line))),
        CorpusFormat::Jsonl => {
            let json: JsonRecord =
                serde_json::from_str(line).map_err(|e| Error::parse(line_no, e.to_string()))?;
            Ok(CorpusRecord {
                sequence: json.tokens,
                language_tag: json.language_tag,
                seed: SeedSpec::new(json.master_seed, json.stream_id),
                params_digest: json.params_digest,
                metadata: json.metadata,
            })
        }
    }
}

/// Splits a corpus into records. Blank lines are empty sequences in `plain`
/// and are skipped in `jsonl`.
pub fn parse_corpus(data: &[u8], format: CorpusFormat) -> Result<Vec<CorpusRecord>> {
    let text = std::str::from_utf8(data).map_err(|e| Error::parse(0, e.to_string()))?;
    let body = text.strip_suffix('\n').unwrap_or(text);
    if body.is_empty() && text.is_empty() {
        return Ok(Vec::new());
    }
    let mut records = Vec::new();
    for (i, line) in body.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if format == CorpusFormat::Jsonl && line.trim().is_empty() {
            continue;
        }
        records.push(parse_record_line(line, i + 1, format)?);
    }
    Ok(records)
}
