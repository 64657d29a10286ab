//! MP-Struct: single-clause derivations built with Merge, Agree and Move and
//! linearized into lexically stripped bracket sequences.
//!
//! The pipeline is [`build_base`] → [`apply_agree`] → [`apply_move`] →
//! [`linearize`]; [`gen_mpstruct`] runs all four and wraps the result in a
//! [`CorpusRecord`]. Each random step has a `*_with` twin taking the draws
//! explicitly, which is how fixed derivations (e.g. golden strings) are built.
//!
//! Surface grammar, for a clause without wh-movement:
//!
//! ```text
//! [ CP [ C ] [ [ TP [ [ DP[Num:pl] [ D ] [ N ] ] ] [ T(+EPP,uNum:pl) ] [ [ VP V [ [ DP[Num:pl] [ D ] [ N ] ] ] [ TR[DP] ] ] ] ] ] ]
//! ```
//!
//! Phrases open with `[` plus their label token; a phrase in argument
//! position is wrapped in one more bracket pair, which also carries the
//! `[-wh]` mark of a DP; heads C, T, D and N render as `[ X ]`, the verb as a
//! bare `V`; traces render as `[ TR[..] ]`. Inside the verbal projection the
//! V' is spelled out before the specifier.

mod derive;
mod linearize;
mod tree;
mod validate;

use serde::{Deserialize, Serialize};

pub use derive::{
    apply_agree, apply_agree_with, apply_move, apply_move_traced, apply_move_with, build_base,
    build_base_with, AgreeDraw, BaseDraw, MoveDraw, MoveReport, WhTarget,
};
pub use linearize::linearize;
pub use tree::{Category, DerivationTree, FeatureBundle, Num, Wh};
pub use validate::validate_mpstruct;

use crate::corpus::{params_digest, CorpusRecord, LanguageTag, Metadata, TokenSequence};
use crate::error::{Error, Result};
use crate::stream::RandomStream;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    #[default]
    None,
    NoMerge,
    NoMove,
    NoAgree,
}

impl Ablation {
    pub fn as_str(self) -> &'static str {
        match self {
            Ablation::None => "none",
            Ablation::NoMerge => "no_merge",
            Ablation::NoMove => "no_move",
            Ablation::NoAgree => "no_agree",
        }
    }
}

/// How A-movement traces are labelled. Wh-traces are always `TR[wh]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStyle {
    /// `TR[-wh]` when the moved DP carries `[-wh]`, otherwise `TR[DP]`.
    #[default]
    MirrorWh,
    /// Always `TR[DP]`.
    Category,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LexiconSizes {
    pub nouns: u32,
    pub verbs: u32,
    pub dets: u32,
}

impl Default for LexiconSizes {
    fn default() -> Self {
        Self {
            nouns: 50,
            verbs: 20,
            dets: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpStructParams {
    /// P(C[+wh]).
    pub p_wh: f64,
    /// P(DP[-wh]), drawn independently per DP.
    pub p_dp_neg_wh: f64,
    /// Number prior P(sg).
    pub p_sg: f64,
    pub agreement_match_ratio: f64,
    pub epp_on_t: bool,
    pub strip_lexical: bool,
    pub max_len: usize,
    pub lexicon_sizes: LexiconSizes,
    pub ablation: Ablation,
    pub trace_style: TraceStyle,
}

impl Default for MpStructParams {
    fn default() -> Self {
        Self {
            p_wh: 0.2,
            p_dp_neg_wh: 0.2,
            p_sg: 0.5,
            agreement_match_ratio: 1.0,
            epp_on_t: true,
            strip_lexical: true,
            max_len: 1024,
            lexicon_sizes: LexiconSizes::default(),
            ablation: Ablation::None,
            trace_style: TraceStyle::MirrorWh,
        }
    }
}

impl MpStructParams {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_wh", self.p_wh),
            ("p_dp_neg_wh", self.p_dp_neg_wh),
            ("p_sg", self.p_sg),
            ("agreement_match_ratio", self.agreement_match_ratio),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        let l = self.lexicon_sizes;
        if l.nouns == 0 || l.verbs == 0 || l.dets == 0 {
            return Err(Error::param("lexicon sizes must all be at least 1"));
        }
        if self.max_len == 0 {
            return Err(Error::param("max_len must be positive"));
        }
        Ok(())
    }

    pub fn language_tag(&self) -> LanguageTag {
        if self.ablation == Ablation::None {
            LanguageTag::Mpstruct
        } else {
            LanguageTag::MpstructAblated
        }
    }
}

/// Regeneration attempts for over-length sequences.
pub const MAX_LEN_RETRIES: usize = 8;

/// Runs the full derivation once, returning the sequence and its metadata.
fn derive_once(stream: &mut RandomStream, params: &MpStructParams) -> Result<(TokenSequence, Metadata)> {
    let base = build_base(stream, params)?;
    let tp = apply_agree(base, stream, params)?;
    let inum = derive::subject_num(&tp);
    let (cp, report) = apply_move_traced(tp, stream, params)?;
    let seq = linearize(&cp, params);

    let mut meta = Metadata::new();
    meta.insert("ablation".into(), params.ablation.as_str().into());
    meta.insert("wh".into(), if report.wh { "+" } else { "-" }.into());
    meta.insert("inum".into(), inum.as_str().into());
    meta.insert("moves".into(), report.moves.into());
    meta.insert(
        "wh_target".into(),
        match report.target {
            Some(WhTarget::Subject) => "subject".into(),
            Some(WhTarget::Object) => "object".into(),
            None => serde_json::Value::Null,
        },
    );
    meta.insert("wh_redraws".into(), report.redraws.into());
    meta.insert("wh_fallback".into(), report.fallback.into());
    Ok((seq, meta))
}

/// Algorithm end to end: one clause per record.
pub fn gen_mpstruct(stream: &mut RandomStream, params: &MpStructParams) -> Result<CorpusRecord> {
    params.validate()?;
    for _ in 0..=MAX_LEN_RETRIES {
        let (sequence, metadata) = derive_once(stream, params)?;
        if sequence.len() <= params.max_len {
            return Ok(CorpusRecord {
                sequence,
                language_tag: params.language_tag(),
                seed: stream.seed(),
                params_digest: params_digest(params),
                metadata,
            });
        }
    }
    Err(Error::Generation(format!(
        "no derivation within max_len = {} after {} retries",
        params.max_len, MAX_LEN_RETRIES
    )))
}
