//! Abstract clause language with functional landmarks, and its unstructured
//! contrast condition.
//!
//! Surface inventory: structural brackets `[s` / `]s` (s = 0..k_struct),
//! typed dependency brackets `(i` / `)i` (i = 1..=k_dep) and the landmarks
//! `H_C`, `H_T`, `H_V`. Every Core clause has the fixed shape CP > TP > vP and
//! each dependency open is immediately preceded by the landmark licensing it.

mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{params_digest, CorpusRecord, LanguageTag, Metadata, TokenSequence};
use crate::dyck::{check_walk, classify_typed, sample_walk, BracketInventory};
use crate::error::{Error, Result};
use crate::stream::RandomStream;

pub use validate::{validate_core, validate_core_with};

pub const H_C: &str = "H_C";
pub const H_T: &str = "H_T";
pub const H_V: &str = "H_V";

/// Long-form landmark names, accepted as aliases on input.
pub const LANDMARK_ALIASES: [(&str, &str); 3] = [("H_CP", H_C), ("H_TP", H_T), ("H_VP", H_V)];

/// Tokens in every Core clause, independent of the draws.
pub const CLAUSE_LEN: usize = 19;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DependencyRole {
    AgrA,
    AgrB,
    Move,
    Sel,
}

impl DependencyRole {
    pub const ALL: [DependencyRole; 4] = [
        DependencyRole::AgrA,
        DependencyRole::AgrB,
        DependencyRole::Move,
        DependencyRole::Sel,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DependencyRole::AgrA => "AGR_A",
            DependencyRole::AgrB => "AGR_B",
            DependencyRole::Move => "MOVE",
            DependencyRole::Sel => "SEL",
        }
    }

    /// The landmark that licenses this role.
    pub fn landmark(self) -> Landmark {
        match self {
            DependencyRole::Move => Landmark::C,
            DependencyRole::AgrA | DependencyRole::AgrB => Landmark::T,
            DependencyRole::Sel => Landmark::V,
        }
    }
}

impl fmt::Display for DependencyRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Landmark {
    C,
    T,
    V,
}

impl Landmark {
    pub fn as_str(self) -> &'static str {
        match self {
            Landmark::C => H_C,
            Landmark::T => H_T,
            Landmark::V => H_V,
        }
    }

    pub fn parse(tok: &str) -> Option<Landmark> {
        let tok = LANDMARK_ALIASES
            .iter()
            .find(|(alias, _)| *alias == tok)
            .map_or(tok, |(_, short)| short);
        match tok {
            H_C => Some(Landmark::C),
            H_T => Some(Landmark::T),
            H_V => Some(Landmark::V),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DependencyType {
    pub id: u32,
    pub role: DependencyRole,
}

/// Dependency-type id assigned to each role. Ids are distinct and 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RoleMap {
    pub agr_a: u32,
    pub agr_b: u32,
    pub mv: u32,
    pub sel: u32,
}

impl Default for RoleMap {
    fn default() -> Self {
        Self {
            agr_a: 1,
            agr_b: 2,
            mv: 3,
            sel: 4,
        }
    }
}

impl RoleMap {
    pub fn id(&self, role: DependencyRole) -> u32 {
        match role {
            DependencyRole::AgrA => self.agr_a,
            DependencyRole::AgrB => self.agr_b,
            DependencyRole::Move => self.mv,
            DependencyRole::Sel => self.sel,
        }
    }

    pub fn role_of(&self, id: u32) -> Option<DependencyRole> {
        DependencyRole::ALL.into_iter().find(|&r| self.id(r) == id)
    }

    pub fn types(&self) -> [DependencyType; 4] {
        DependencyRole::ALL.map(|role| DependencyType {
            id: self.id(role),
            role,
        })
    }

    fn validate(&self, k_dep: u32) -> Result<()> {
        let mut ids: Vec<u32> = DependencyRole::ALL.iter().map(|&r| self.id(r)).collect();
        if ids.iter().any(|&id| id == 0 || id > k_dep) {
            return Err(Error::param(format!("role ids must lie in 1..={k_dep}, got {ids:?}")));
        }
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != 4 {
            return Err(Error::param("role ids must be distinct"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreParams {
    /// Minimum corpus length `L`.
    pub target_len: usize,
    pub p_wh: f64,
    /// Probability of AGR_A over AGR_B.
    pub p_agr_a: f64,
    pub k_struct: u32,
    pub k_dep: u32,
    pub shuffle_vp: bool,
    /// Cut the corpus to exactly `target_len`, leaving the last clause broken.
    pub trim_to_l: bool,
    pub roles: RoleMap,
}

impl Default for CoreParams {
    fn default() -> Self {
        Self {
            target_len: 1024,
            p_wh: 0.2,
            p_agr_a: 0.5,
            k_struct: 1,
            k_dep: 4,
            shuffle_vp: true,
            trim_to_l: false,
            roles: RoleMap::default(),
        }
    }
}

fn probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must lie in [0, 1], got {p}")))
    }
}

impl CoreParams {
    pub fn validate(&self) -> Result<()> {
        if self.target_len == 0 {
            return Err(Error::param("target length must be positive"));
        }
        probability("p_wh", self.p_wh)?;
        probability("p_agr_a", self.p_agr_a)?;
        if self.k_struct == 0 {
            return Err(Error::param("k_struct must be at least 1"));
        }
        self.roles.validate(self.k_dep)
    }

    fn validate_corpus(&self) -> Result<()> {
        self.validate()?;
        if self.target_len < CLAUSE_LEN {
            return Err(Error::param(format!(
                "target length {} is shorter than one clause ({CLAUSE_LEN} tokens)",
                self.target_len
            )));
        }
        Ok(())
    }

    /// `[s` for structural type `s`.
    pub fn struct_open(s: u32) -> String {
        format!("[{s}")
    }

    pub fn struct_close(s: u32) -> String {
        format!("]{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VpOrder {
    /// Head unit, then the subject slot.
    HeadFirst,
    SubjectFirst,
}

/// Random choices for one clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClauseDraw {
    pub wh: bool,
    /// `AgrA` or `AgrB`.
    pub agr: DependencyRole,
    pub vp_order: VpOrder,
}

impl ClauseDraw {
    pub fn sample(stream: &mut RandomStream, params: &CoreParams) -> Self {
        let wh = stream.bernoulli(params.p_wh);
        let agr = if stream.bernoulli(params.p_agr_a) {
            DependencyRole::AgrA
        } else {
            DependencyRole::AgrB
        };
        let vp_order = if params.shuffle_vp {
            let mut slots = [VpOrder::HeadFirst, VpOrder::SubjectFirst];
            stream.shuffle(&mut slots);
            slots[0]
        } else {
            VpOrder::HeadFirst
        };
        Self { wh, agr, vp_order }
    }
}

struct Emitter<'p> {
    out: Vec<String>,
    depth: u32,
    params: &'p CoreParams,
}

impl Emitter<'_> {
    fn tok(&mut self, t: &str) {
        self.out.push(t.to_owned());
    }

    fn open(&mut self) {
        self.out.push(CoreParams::struct_open(self.depth % self.params.k_struct));
        self.depth += 1;
    }

    fn close(&mut self) {
        self.depth -= 1;
        self.out.push(CoreParams::struct_close(self.depth % self.params.k_struct));
    }

    fn dep_open(&mut self, role: DependencyRole) {
        self.out.push(format!("({}", self.params.roles.id(role)));
    }

    fn dep_close(&mut self, role: DependencyRole) {
        self.out.push(format!("){}", self.params.roles.id(role)));
    }

    /// `[ H_V (SEL [ ] )SEL`: head and selected object stay together.
    fn head_unit(&mut self) {
        self.tok(H_V);
        self.dep_open(DependencyRole::Sel);
        self.open();
        self.close();
        self.dep_close(DependencyRole::Sel);
    }

    /// Empty for wh=-, the subject trace closing AGR and MOVE for wh=+.
    fn subject_slot(&mut self, draw: &ClauseDraw) {
        self.open();
        if draw.wh {
            self.dep_close(draw.agr);
            self.dep_close(DependencyRole::Move);
        }
        self.close();
    }

    fn vp(&mut self, draw: &ClauseDraw) {
        self.open();
        match draw.vp_order {
            VpOrder::HeadFirst => {
                self.head_unit();
                self.subject_slot(draw);
            }
            VpOrder::SubjectFirst => {
                self.subject_slot(draw);
                self.head_unit();
            }
        }
        self.close();
    }

    fn clause(&mut self, draw: &ClauseDraw) {
        self.open();
        self.tok(H_C);
        if draw.wh {
            self.dep_open(DependencyRole::Move);
        }
        self.open();
        self.tok(H_T);
        self.dep_open(draw.agr);
        if !draw.wh {
            // Subject in Spec-TP closes the agreement dependency.
            self.open();
            self.dep_close(draw.agr);
            self.close();
        }
        self.vp(draw);
        self.close();
        self.close();
    }
}

/// One clause for fixed draws.
pub fn core_clause_with(draw: &ClauseDraw, params: &CoreParams) -> TokenSequence {
    let mut e = Emitter {
        out: Vec::with_capacity(CLAUSE_LEN),
        depth: 0,
        params,
    };
    e.clause(draw);
    debug_assert_eq!(e.out.len(), CLAUSE_LEN);
    TokenSequence::from_vec_unchecked(e.out)
}

pub fn gen_core_clause(stream: &mut RandomStream, params: &CoreParams) -> Result<TokenSequence> {
    params.validate()?;
    let draw = ClauseDraw::sample(stream, params);
    Ok(core_clause_with(&draw, params))
}

/// Clauses are concatenated until the length reaches `target_len`.
pub fn gen_core_corpus(stream: &mut RandomStream, params: &CoreParams) -> Result<CorpusRecord> {
    params.validate_corpus()?;
    let mut sequence = TokenSequence::new();
    let mut wh = Vec::new();
    let mut agr = Vec::new();
    while sequence.len() < params.target_len {
        let draw = ClauseDraw::sample(stream, params);
        sequence.extend(core_clause_with(&draw, params));
        wh.push(serde_json::Value::from(draw.wh));
        agr.push(serde_json::Value::from(draw.agr.as_str()));
    }
    let mut metadata = Metadata::new();
    metadata.insert("clauses".into(), wh.len().into());
    metadata.insert("clause_wh".into(), wh.into());
    metadata.insert("clause_agr".into(), agr.into());
    if params.trim_to_l {
        sequence.truncate(params.target_len);
        metadata.insert("trimmed".into(), true.into());
    }
    Ok(CorpusRecord {
        sequence,
        language_tag: LanguageTag::Core,
        seed: stream.seed(),
        params_digest: params_digest(params),
        metadata,
    })
}

/// Structural types followed by dependency types, in inventory order.
fn generic_inventory(params: &CoreParams) -> BracketInventory {
    let structural = (0..params.k_struct).map(|s| (CoreParams::struct_open(s), CoreParams::struct_close(s)));
    let deps = (1..=params.k_dep).map(|i| (format!("({i}"), format!("){i}")));
    BracketInventory::from_pairs(structural.chain(deps).collect())
}

#[derive(Serialize)]
struct GenericDigest<'a> {
    core: &'a CoreParams,
    p_open: f64,
}

/// Random shuffle-Dyck mix over the Core bracket inventory, without landmarks.
/// The length is `target_len` rounded up to an even number.
pub fn gen_generic_ksd(stream: &mut RandomStream, params: &CoreParams, p_open: f64) -> Result<CorpusRecord> {
    params.validate()?;
    let len = params.target_len + params.target_len % 2;
    check_walk(len, p_open, None)?;
    let sequence = sample_walk(stream, &generic_inventory(params), len, p_open, None);
    let mut metadata = Metadata::new();
    metadata.insert("p_open".into(), p_open.into());
    Ok(CorpusRecord {
        sequence,
        language_tag: LanguageTag::GenericKsd,
        seed: stream.seed(),
        params_digest: params_digest(&GenericDigest { core: params, p_open }),
        metadata,
    })
}

/// Renames structural type `s` to dependency type `k_dep + 1 + s`, so that a
/// landmark-free sequence can be checked as `(k_dep + k_struct)`-Shuffle Dyck.
/// Returns `None` for tokens outside the inventory.
pub fn as_typed_alphabet(seq: &TokenSequence, params: &CoreParams) -> Option<TokenSequence> {
    let mut out = Vec::with_capacity(seq.len());
    for tok in seq.iter() {
        if let Some((is_open, s)) = classify_typed(tok, '[', ']') {
            if s >= params.k_struct {
                return None;
            }
            let ty = params.k_dep + 1 + s;
            out.push(if is_open { format!("({ty}") } else { format!("){ty}") });
        } else if classify_typed(tok, '(', ')').is_some() {
            out.push(tok.to_owned());
        } else {
            return None;
        }
    }
    Some(TokenSequence::from_vec_unchecked(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyck::recognize_shuffle_dyck;
    use crate::stream::{derive_stream, SeedSpec};

    fn fixed(wh: bool, agr: DependencyRole, vp_order: VpOrder) -> TokenSequence {
        core_clause_with(&ClauseDraw { wh, agr, vp_order }, &CoreParams::default())
    }

    #[test]
    fn clause_templates() {
        assert_eq!(
            fixed(false, DependencyRole::AgrB, VpOrder::HeadFirst).to_string(),
            "[0 H_C [0 H_T (2 [0 )2 ]0 [0 H_V (4 [0 ]0 )4 [0 ]0 ]0 ]0 ]0"
        );
        assert_eq!(
            fixed(true, DependencyRole::AgrA, VpOrder::SubjectFirst).to_string(),
            "[0 H_C (3 [0 H_T (1 [0 [0 )1 )3 ]0 H_V (4 [0 ]0 )4 ]0 ]0 ]0"
        );
    }

    #[test]
    fn clause_length_is_constant() {
        for wh in [false, true] {
            for agr in [DependencyRole::AgrA, DependencyRole::AgrB] {
                for order in [VpOrder::HeadFirst, VpOrder::SubjectFirst] {
                    assert_eq!(fixed(wh, agr, order).len(), CLAUSE_LEN);
                }
            }
        }
    }

    #[test]
    fn structural_types_cycle_with_depth() {
        let p = CoreParams {
            k_struct: 2,
            ..Default::default()
        };
        let draw = ClauseDraw {
            wh: false,
            agr: DependencyRole::AgrA,
            vp_order: VpOrder::HeadFirst,
        };
        assert_eq!(
            core_clause_with(&draw, &p).to_string(),
            "[0 H_C [1 H_T (1 [0 )1 ]0 [0 H_V (4 [1 ]1 )4 [1 ]1 ]0 ]1 ]0"
        );
    }

    #[test]
    fn forced_wh_always_moves() {
        let p = CoreParams {
            p_wh: 1.0,
            ..Default::default()
        };
        let mut s = derive_stream(SeedSpec::new(5, 0));
        for _ in 0..200 {
            let c = gen_core_clause(&mut s, &p).unwrap();
            assert!(c.iter().any(|t| t == "(3") && c.iter().any(|t| t == ")3"));
        }
    }

    #[test]
    fn corpus_reaches_target_without_splitting() {
        let p = CoreParams::default();
        let r = gen_core_corpus(&mut derive_stream(SeedSpec::new(1, 2)), &p).unwrap();
        let n = r.sequence.len();
        assert!(n >= 1024 && n - 1024 < CLAUSE_LEN);
        assert_eq!(n % CLAUSE_LEN, 0);
        assert_eq!(r.metadata["clauses"], n / CLAUSE_LEN);
        assert_eq!(r.language_tag, LanguageTag::Core);
    }

    #[test]
    fn one_clause_at_clause_length() {
        let p = CoreParams {
            target_len: CLAUSE_LEN,
            ..Default::default()
        };
        let r = gen_core_corpus(&mut derive_stream(SeedSpec::new(1, 2)), &p).unwrap();
        assert_eq!(r.sequence.len(), CLAUSE_LEN);
        assert_eq!(r.metadata["clauses"], 1);
    }

    #[test]
    fn trimming_hits_exact_length() {
        let p = CoreParams {
            trim_to_l: true,
            target_len: 1000,
            ..Default::default()
        };
        let r = gen_core_corpus(&mut derive_stream(SeedSpec::new(1, 2)), &p).unwrap();
        assert_eq!(r.sequence.len(), 1000);
        assert_eq!(r.metadata["trimmed"], true);
    }

    #[test]
    fn params_are_checked() {
        let mut s = derive_stream(SeedSpec::new(1, 0));
        let short = CoreParams {
            target_len: 5,
            ..Default::default()
        };
        assert!(matches!(gen_core_corpus(&mut s, &short), Err(Error::Param(_))));
        let narrow = CoreParams {
            k_dep: 3,
            ..Default::default()
        };
        assert!(matches!(gen_core_clause(&mut s, &narrow), Err(Error::Param(_))));
        let clash = CoreParams {
            roles: RoleMap {
                agr_a: 1,
                agr_b: 1,
                mv: 3,
                sel: 4,
            },
            ..Default::default()
        };
        assert!(clash.validate().is_err());
        assert!(gen_generic_ksd(&mut s, &CoreParams::default(), 1.0).is_err());
    }

    #[test]
    fn role_map_is_a_bijection_at_four_types() {
        let roles = RoleMap::default();
        for t in roles.types() {
            assert_eq!(roles.role_of(t.id), Some(t.role));
        }
        assert_eq!(roles.role_of(5), None);
    }

    #[test]
    fn generic_is_shuffle_dyck_over_shared_inventory() {
        let p = CoreParams::default();
        let mut s = derive_stream(SeedSpec::new(3, 0));
        for _ in 0..50 {
            let r = gen_generic_ksd(&mut s, &p, 0.49).unwrap();
            assert_eq!(r.sequence.len(), 1024);
            assert!(!r.sequence.iter().any(|t| t.starts_with("H_")));
            let typed = as_typed_alphabet(&r.sequence, &p).unwrap();
            assert!(recognize_shuffle_dyck(&typed, 5));
        }
        let odd = CoreParams {
            target_len: 1025,
            ..Default::default()
        };
        assert_eq!(gen_generic_ksd(&mut s, &odd, 0.49).unwrap().sequence.len(), 1026);
    }

    #[test]
    fn landmark_aliases_parse() {
        assert_eq!(Landmark::parse("H_CP"), Some(Landmark::C));
        assert_eq!(Landmark::parse("H_T"), Some(Landmark::T));
        assert_eq!(Landmark::parse("H_X"), None);
    }
}
