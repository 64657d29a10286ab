//! 1-Dyck and k-Shuffle Dyck: samplers, recognizers and an enumeration oracle.
//!
//! Surface forms: `(` / `)` for 1-Dyck, `(i` / `)i` (i = 1..=k) for typed
//! brackets. A sequence is in k-Shuffle Dyck when every per-type projection is
//! a balanced 1-Dyck word.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::TokenSequence;
use crate::error::{Error, Result};
use crate::report::{Rule, ValidationReport};
use crate::stream::RandomStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyckParams {
    pub k: u32,
    pub target_len: usize,
    /// Probability of opening when both opening and closing are legal.
    pub p_open: f64,
    /// Bound on the total number of simultaneously open brackets.
    pub max_depth: Option<usize>,
}

impl Default for DyckParams {
    fn default() -> Self {
        Self {
            k: 1,
            target_len: 1024,
            p_open: 0.49,
            max_depth: None,
        }
    }
}

impl DyckParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::param("k must be at least 1"));
        }
        check_walk(self.target_len, self.p_open, self.max_depth)
    }
}

pub(crate) fn check_walk(target_len: usize, p_open: f64, max_depth: Option<usize>) -> Result<()> {
    if target_len == 0 || target_len % 2 != 0 {
        return Err(Error::param(format!(
            "target length must be a positive even number, got {target_len}"
        )));
    }
    if !(p_open > 0.0 && p_open < 1.0) {
        return Err(Error::param(format!("p_open must lie in (0, 1), got {p_open}")));
    }
    if max_depth == Some(0) {
        return Err(Error::param("max_depth must be positive"));
    }
    Ok(())
}

/// Open/close surface forms for a set of bracket types, indexed from 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BracketInventory {
    pairs: Vec<(String, String)>,
}

impl BracketInventory {
    pub fn from_pairs(pairs: Vec<(String, String)>) -> Self {
        Self { pairs }
    }

    /// `(1 )1` .. `(k )k`.
    pub fn typed_round(k: u32) -> Self {
        Self::from_pairs((1..=k).map(|i| (format!("({i}"), format!("){i}"))).collect())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn open(&self, ty: usize) -> &str {
        &self.pairs[ty].0
    }

    pub fn close(&self, ty: usize) -> &str {
        &self.pairs[ty].1
    }
}

/// Budget-respecting random walk over a typed bracket inventory.
///
/// At every position closing is forced when the remaining budget equals the
/// number of open brackets, opening is forced when nothing is open, and
/// otherwise the walk opens a uniformly chosen type with probability `p_open`
/// (unless `max_depth` is reached) or closes a uniformly chosen open type.
pub(crate) fn sample_walk(
    stream: &mut RandomStream,
    inventory: &BracketInventory,
    target_len: usize,
    p_open: f64,
    max_depth: Option<usize>,
) -> TokenSequence {
    let n_types = inventory.len();
    let mut open_counts = vec![0usize; n_types];
    let mut open_types: Vec<usize> = Vec::with_capacity(n_types);
    let mut depth = 0usize;
    let mut out = Vec::with_capacity(target_len);
    for pos in 0..target_len {
        let remaining = target_len - pos;
        let must_close = depth == remaining || max_depth.is_some_and(|m| depth >= m);
        let open = if depth == 0 {
            true
        } else if must_close {
            false
        } else {
            stream.bernoulli(p_open)
        };
        if open {
            let ty = stream.index(n_types);
            if open_counts[ty] == 0 {
                open_types.push(ty);
            }
            open_counts[ty] += 1;
            depth += 1;
            out.push(inventory.open(ty).to_owned());
        } else {
            let slot = stream.index(open_types.len());
            let ty = open_types[slot];
            open_counts[ty] -= 1;
            if open_counts[ty] == 0 {
                open_types.swap_remove(slot);
            }
            depth -= 1;
            out.push(inventory.close(ty).to_owned());
        }
    }
    debug_assert_eq!(depth, 0);
    TokenSequence::from_vec_unchecked(out)
}

pub fn gen_dyck1(stream: &mut RandomStream, params: &DyckParams) -> Result<TokenSequence> {
    if params.k != 1 {
        return Err(Error::param(format!("1-Dyck requires k = 1, got {}", params.k)));
    }
    params.validate()?;
    let inventory = BracketInventory::from_pairs(vec![("(".into(), ")".into())]);
    Ok(sample_walk(stream, &inventory, params.target_len, params.p_open, params.max_depth))
}

pub fn gen_shuffle_dyck(stream: &mut RandomStream, params: &DyckParams) -> Result<TokenSequence> {
    params.validate()?;
    let inventory = BracketInventory::typed_round(params.k);
    Ok(sample_walk(stream, &inventory, params.target_len, params.p_open, params.max_depth))
}

/// Splits a bracket token into `(is_open, type)` given its open and close
/// characters. The type suffix must be a canonical decimal number.
pub(crate) fn classify_typed(tok: &str, open: char, close: char) -> Option<(bool, u32)> {
    let mut chars = tok.chars();
    let first = chars.next()?;
    let is_open = if first == open {
        true
    } else if first == close {
        false
    } else {
        return None;
    };
    let suffix = chars.as_str();
    if suffix.is_empty() || !suffix.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if suffix.len() > 1 && suffix.starts_with('0') {
        return None;
    }
    suffix.parse().ok().map(|ty| (is_open, ty))
}

pub fn recognize_dyck1(seq: &TokenSequence) -> bool {
    let mut count = 0usize;
    for tok in seq.iter() {
        match tok {
            "(" => count += 1,
            ")" => {
                if count == 0 {
                    return false;
                }
                count -= 1;
            }
            _ => return false,
        }
    }
    count == 0
}

pub fn recognize_shuffle_dyck(seq: &TokenSequence, k: u32) -> bool {
    let mut counts = vec![0usize; k as usize + 1];
    for tok in seq.iter() {
        let Some((is_open, ty)) = classify_typed(tok, '(', ')') else {
            return false;
        };
        if ty == 0 || ty > k {
            return false;
        }
        let c = &mut counts[ty as usize];
        if is_open {
            *c += 1;
        } else if *c == 0 {
            return false;
        } else {
            *c -= 1;
        }
    }
    counts.iter().all(|&c| c == 0)
}

/// Report form of [`recognize_dyck1`].
pub fn validate_dyck1(seq: &TokenSequence) -> ValidationReport {
    let mut report = ValidationReport::new();
    let mut open = 0usize;
    for (i, tok) in seq.iter().enumerate() {
        match tok {
            "(" => open += 1,
            ")" if open > 0 => open -= 1,
            ")" => report.push(Rule::Balance, Some(i), "close without a matching open"),
            other => report.push(Rule::Token, Some(i), format!("token {other:?} is not a bracket")),
        }
    }
    if open > 0 {
        report.push(Rule::Balance, None, format!("{open} unclosed"));
    }
    report
}

/// Report form of [`recognize_shuffle_dyck`]. Without `k`, any type id of at
/// least 1 is accepted.
pub fn validate_shuffle_dyck(seq: &TokenSequence, k: Option<u32>) -> ValidationReport {
    let mut report = ValidationReport::new();
    let mut open: BTreeMap<u32, usize> = BTreeMap::new();
    for (i, tok) in seq.iter().enumerate() {
        match classify_typed(tok, '(', ')') {
            Some((_, ty)) if ty == 0 || k.is_some_and(|k| ty > k) => {
                report.push(Rule::Token, Some(i), format!("bracket type {ty} out of range"));
            }
            Some((true, ty)) => *open.entry(ty).or_default() += 1,
            Some((false, ty)) => match open.get_mut(&ty) {
                Some(c) if *c > 0 => *c -= 1,
                _ => report.push(Rule::Balance, Some(i), format!("){ty} without a matching open")),
            },
            None => report.push(Rule::Token, Some(i), format!("token {tok:?} is not a typed bracket")),
        }
    }
    for (ty, c) in open {
        if c > 0 {
            report.push(Rule::Balance, None, format!("type {ty}: {c} unclosed"));
        }
    }
    report
}

/// Type-`ty` projection renamed to untyped `(` / `)`; other tokens dropped.
pub fn project(seq: &TokenSequence, ty: u32) -> TokenSequence {
    let tokens = seq
        .iter()
        .filter_map(|tok| match classify_typed(tok, '(', ')') {
            Some((true, t)) if t == ty => Some("(".to_owned()),
            Some((false, t)) if t == ty => Some(")".to_owned()),
            _ => None,
        })
        .collect();
    TokenSequence::from_vec_unchecked(tokens)
}

/// Upper bound on `max_len` accepted by [`enumerate_shuffle_dyck`].
pub const ENUMERATION_MAX_LEN: usize = 10;
/// Upper bound on `k` accepted by [`enumerate_shuffle_dyck`].
pub const ENUMERATION_MAX_K: u32 = 4;

/// All k-Shuffle Dyck words of length at most `max_len`.
///
/// Built constructively: 1-Dyck words come from the grammar
/// `S -> ε | ( S ) S`, one word is picked per type, and every interleaving of
/// the chosen words is emitted. No recognizer is involved, so the result can
/// serve as ground truth for the recognizers and samplers.
pub fn enumerate_shuffle_dyck(k: u32, max_len: usize) -> Result<BTreeSet<TokenSequence>> {
    if k == 0 || k > ENUMERATION_MAX_K {
        return Err(Error::param(format!(
            "enumeration supports 1 <= k <= {ENUMERATION_MAX_K}, got {k}"
        )));
    }
    if max_len > ENUMERATION_MAX_LEN {
        return Err(Error::param(format!(
            "enumeration supports max_len <= {ENUMERATION_MAX_LEN}, got {max_len}"
        )));
    }
    let by_len = dyck_words_by_len(max_len / 2);
    let mut out = BTreeSet::new();
    let mut chosen: Vec<Vec<String>> = Vec::new();
    choose_words(k, max_len, &by_len, &mut chosen, &mut out);
    Ok(out)
}

/// `by_len[m]` holds every 1-Dyck word with `m` pairs, as `bool` opens.
fn dyck_words_by_len(max_pairs: usize) -> Vec<Vec<Vec<bool>>> {
    let mut by_len: Vec<Vec<Vec<bool>>> = vec![vec![Vec::new()]];
    for m in 1..=max_pairs {
        let mut words = Vec::new();
        for a in 0..m {
            let b = m - 1 - a;
            for inner in &by_len[a] {
                for rest in &by_len[b] {
                    let mut w = Vec::with_capacity(2 * m);
                    w.push(true);
                    w.extend_from_slice(inner);
                    w.push(false);
                    w.extend_from_slice(rest);
                    words.push(w);
                }
            }
        }
        by_len.push(words);
    }
    by_len
}

fn choose_words(
    k: u32,
    budget: usize,
    by_len: &[Vec<Vec<bool>>],
    chosen: &mut Vec<Vec<String>>,
    out: &mut BTreeSet<TokenSequence>,
) {
    if chosen.len() == k as usize {
        let mut cursors = vec![0usize; chosen.len()];
        let mut prefix = Vec::new();
        interleave(chosen, &mut cursors, &mut prefix, out);
        return;
    }
    let ty = chosen.len() + 1;
    for pairs in 0..=budget / 2 {
        for word in &by_len[pairs] {
            let typed = word
                .iter()
                .map(|&o| if o { format!("({ty}") } else { format!("){ty}") })
                .collect();
            chosen.push(typed);
            choose_words(k, budget - 2 * pairs, by_len, chosen, out);
            chosen.pop();
        }
    }
}

fn interleave(
    words: &[Vec<String>],
    cursors: &mut [usize],
    prefix: &mut Vec<String>,
    out: &mut BTreeSet<TokenSequence>,
) {
    let mut done = true;
    for i in 0..words.len() {
        if cursors[i] < words[i].len() {
            done = false;
            prefix.push(words[i][cursors[i]].clone());
            cursors[i] += 1;
            interleave(words, cursors, prefix, out);
            cursors[i] -= 1;
            prefix.pop();
        }
    }
    if done {
        out.insert(TokenSequence::from_vec_unchecked(prefix.clone()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{derive_stream, SeedSpec};

    fn seq(s: &str) -> TokenSequence {
        TokenSequence::from_text(s)
    }

    fn params(k: u32, len: usize) -> DyckParams {
        DyckParams {
            k,
            target_len: len,
            ..DyckParams::default()
        }
    }

    #[test]
    fn dyck1_len2_is_unique() {
        let mut s = derive_stream(SeedSpec::new(0, 0));
        assert_eq!(gen_dyck1(&mut s, &params(1, 2)).unwrap().to_string(), "( )");
    }

    #[test]
    fn dyck1_len4_within_admissible_set() {
        let admissible = ["( ( ) )", "( ) ( )"];
        let mut seen = BTreeSet::new();
        for id in 0..200 {
            let mut s = derive_stream(SeedSpec::new(5, id));
            let out = gen_dyck1(&mut s, &params(1, 4)).unwrap().to_string();
            assert!(admissible.contains(&out.as_str()), "{out}");
            seen.insert(out);
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn odd_length_is_rejected() {
        let mut s = derive_stream(SeedSpec::new(0, 0));
        assert!(matches!(gen_dyck1(&mut s, &params(1, 7)), Err(Error::Param(_))));
        assert!(matches!(gen_shuffle_dyck(&mut s, &params(3, 5)), Err(Error::Param(_))));
        assert!(gen_dyck1(&mut s, &params(2, 4)).is_err());
    }

    #[test]
    fn long_dyck1_is_recognized() {
        let mut s = derive_stream(SeedSpec::new(11, 0));
        let out = gen_dyck1(&mut s, &params(1, 1024)).unwrap();
        assert_eq!(out.len(), 1024);
        assert!(recognize_dyck1(&out));
    }

    #[test]
    fn max_depth_is_respected() {
        let p = DyckParams {
            k: 3,
            target_len: 200,
            p_open: 0.9,
            max_depth: Some(3),
        };
        for id in 0..50 {
            let mut s = derive_stream(SeedSpec::new(8, id));
            let out = gen_shuffle_dyck(&mut s, &p).unwrap();
            let mut depth = 0i64;
            for t in out.iter() {
                depth += if t.starts_with('(') { 1 } else { -1 };
                assert!(depth <= 3);
            }
            assert!(recognize_shuffle_dyck(&out, 3));
        }
    }

    #[test]
    fn k1_shuffle_is_typed_dyck1() {
        let mut s = derive_stream(SeedSpec::new(3, 3));
        let out = gen_shuffle_dyck(&mut s, &params(1, 64)).unwrap();
        assert!(out.iter().all(|t| t == "(1" || t == ")1"));
        assert!(recognize_dyck1(&project(&out, 1)));
    }

    #[test]
    fn recognize_dyck1_cases() {
        assert!(recognize_dyck1(&seq("( ( ) )")));
        assert!(!recognize_dyck1(&seq(") (")));
        assert!(!recognize_dyck1(&seq("( ( )")));
        assert!(!recognize_dyck1(&seq("( x )")));
        assert!(recognize_dyck1(&seq("")));
    }

    #[test]
    fn recognize_shuffle_cases() {
        assert!(recognize_shuffle_dyck(&seq("(1 (2 )1 )2"), 2));
        assert!(!recognize_shuffle_dyck(&seq("(1 )2"), 2));
        assert!(!recognize_shuffle_dyck(&seq("(3 )3"), 2));
        assert!(!recognize_shuffle_dyck(&seq("(0 )0"), 2));
        assert!(!recognize_shuffle_dyck(&seq("(01 )01"), 2));
        assert!(!recognize_shuffle_dyck(&seq("( )"), 2));
    }

    #[test]
    fn enumeration_small_cases() {
        let e = enumerate_shuffle_dyck(1, 2).unwrap();
        assert_eq!(e, BTreeSet::from([seq(""), seq("(1 )1")]));

        let e = enumerate_shuffle_dyck(1, 4).unwrap();
        let mut by_len = [0usize; 5];
        for w in &e {
            by_len[w.len()] += 1;
        }
        assert_eq!(by_len, [1, 0, 1, 0, 2]);

        let e = enumerate_shuffle_dyck(2, 2).unwrap();
        assert_eq!(e, BTreeSet::from([seq(""), seq("(1 )1"), seq("(2 )2")]));
    }

    #[test]
    fn enumeration_bounds() {
        assert!(enumerate_shuffle_dyck(0, 4).is_err());
        assert!(enumerate_shuffle_dyck(2, 12).is_err());
        assert!(enumerate_shuffle_dyck(5, 2).is_err());
    }

    #[test]
    fn typed_token_classification() {
        assert_eq!(classify_typed("(12", '(', ')'), Some((true, 12)));
        assert_eq!(classify_typed(")3", '(', ')'), Some((false, 3)));
        assert_eq!(classify_typed("]0", '[', ']'), Some((false, 0)));
        assert_eq!(classify_typed("(", '(', ')'), None);
        assert_eq!(classify_typed("(a", '(', ')'), None);
        assert_eq!(classify_typed("H_C", '(', ')'), None);
    }

    #[test]
    fn reports_agree_with_recognizers() {
        for (k, max_len) in [(1, 8), (2, 6)] {
            let words = enumerate_shuffle_dyck(k, max_len).unwrap();
            for w in &words {
                assert!(validate_shuffle_dyck(w, Some(k)).is_clean());
            }
        }
        for bad in ["(1 )2", ")1 (1", "(1", "(0 )0", "( )"] {
            assert!(!validate_shuffle_dyck(&seq(bad), None).is_clean(), "{bad}");
        }
        assert!(validate_shuffle_dyck(&seq("(64 )64"), None).is_clean());
        assert!(!validate_shuffle_dyck(&seq("(64 )64"), Some(63)).is_clean());
        assert!(validate_dyck1(&seq("( ( ) )")).is_clean());
        assert!(validate_dyck1(&seq(")")).has(Rule::Balance));
        assert!(validate_dyck1(&seq("(1")).has(Rule::Token));
    }
}
