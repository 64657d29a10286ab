//! Well-formedness checks for linearized MP-Struct clauses.
//!
//! The sequence is first checked for bracket balance, then parsed against the
//! clause skeleton (bracketed, or flat for the w/o-Merge ablation) into a
//! [`Clause`], on which agreement, trace and lexical rules are evaluated.

use super::linearize::NEG_WH;
use super::tree::Num;
use super::{Ablation, MpStructParams, TraceStyle};
use crate::corpus::TokenSequence;
use crate::report::{Rule, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Dp {
    idx: usize,
    num: Num,
    neg_wh: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TraceKind {
    /// A-movement trace; `neg` when rendered `TR[-wh]`.
    A { neg: bool },
    Wh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Dp(Dp),
    Trace { idx: usize, kind: TraceKind },
}

impl Slot {
    fn idx(&self) -> usize {
        match *self {
            Slot::Dp(d) => d.idx,
            Slot::Trace { idx, .. } => idx,
        }
    }

    fn dp(&self) -> Option<Dp> {
        match *self {
            Slot::Dp(d) => Some(d),
            Slot::Trace { .. } => None,
        }
    }

    fn trace_kind(&self) -> Option<TraceKind> {
        match *self {
            Slot::Trace { kind, .. } => Some(kind),
            Slot::Dp(_) => None,
        }
    }
}

#[derive(Debug, Default)]
struct Heads {
    /// Positions of D/N/V heads without a lexical item.
    bare: Vec<usize>,
    /// Positions of lexical items.
    lexical: Vec<usize>,
}

#[derive(Debug)]
struct Clause {
    spec_cp: Option<Slot>,
    c_idx: usize,
    c_wh: bool,
    spec_tp: Option<Slot>,
    t_idx: usize,
    t_epp: bool,
    t_num: Num,
    obj: Slot,
    subj: Slot,
    heads: Heads,
}

type Shape<T> = Result<T, (usize, String)>;

fn is_lexical(tok: &str, prefix: char) -> bool {
    let mut chars = tok.chars();
    chars.next() == Some(prefix)
        && chars.next() == Some('_')
        && !chars.as_str().is_empty()
        && chars.as_str().bytes().all(|b| b.is_ascii_digit())
}

fn any_lexical(tok: &str) -> bool {
    ['D', 'N', 'V'].into_iter().any(|p| is_lexical(tok, p))
}

fn parse_num(s: &str) -> Option<Num> {
    match s {
        "sg" => Some(Num::Sg),
        "pl" => Some(Num::Pl),
        "u" => Some(Num::Unvalued),
        _ => None,
    }
}

fn parse_dp_label(tok: &str) -> Option<Num> {
    let num = parse_num(tok.strip_prefix("DP[Num:")?.strip_suffix(']')?)?;
    (num != Num::Unvalued).then_some(num)
}

fn parse_t(tok: &str) -> Option<(bool, Num)> {
    let inner = tok.strip_prefix("T(")?.strip_suffix(')')?;
    let (epp, num) = inner.split_once(',')?;
    let epp = match epp {
        "+EPP" => true,
        "-EPP" => false,
        _ => return None,
    };
    Some((epp, parse_num(num.strip_prefix("uNum:")?)?))
}

fn parse_c(tok: &str) -> Option<bool> {
    match tok {
        "C" => Some(false),
        "C[+wh]" => Some(true),
        _ => None,
    }
}

fn parse_trace(tok: &str) -> Option<TraceKind> {
    match tok {
        "TR[DP]" => Some(TraceKind::A { neg: false }),
        "TR[-wh]" => Some(TraceKind::A { neg: true }),
        "TR[wh]" => Some(TraceKind::Wh),
        _ => None,
    }
}

#[derive(Debug)]
enum Node<'a> {
    Atom(usize, &'a str),
    Group(usize, Vec<Node<'a>>),
}

impl Node<'_> {
    fn idx(&self) -> usize {
        match self {
            Node::Atom(i, _) | Node::Group(i, _) => *i,
        }
    }
}

/// Reports unmatched brackets; returns `true` when balanced.
fn check_balance(tokens: &[String], report: &mut ValidationReport) -> bool {
    let mut stack = Vec::new();
    let mut ok = true;
    for (i, t) in tokens.iter().enumerate() {
        match t.as_str() {
            "[" => stack.push(i),
            "]" => {
                if stack.pop().is_none() {
                    report.push(Rule::Balance, Some(i), "closing bracket without an open bracket");
                    ok = false;
                }
            }
            _ => {}
        }
    }
    for i in stack {
        report.push(Rule::Balance, Some(i), "bracket never closed");
        ok = false;
    }
    ok
}

/// Groups a balanced token slice into nested bracket nodes.
fn group(tokens: &[String]) -> Vec<Node<'_>> {
    let mut stack: Vec<(usize, Vec<Node>)> = vec![(0, Vec::new())];
    for (i, t) in tokens.iter().enumerate() {
        match t.as_str() {
            "[" => stack.push((i, Vec::new())),
            "]" => {
                let (open, items) = stack.pop().expect("balanced");
                stack.last_mut().expect("balanced").1.push(Node::Group(open, items));
            }
            tok => stack.last_mut().expect("balanced").1.push(Node::Atom(i, tok)),
        }
    }
    stack.pop().expect("root").1
}

fn atom<'a>(node: &Node<'a>, what: &str) -> Shape<(usize, &'a str)> {
    match node {
        Node::Atom(i, t) => Ok((*i, t)),
        Node::Group(i, _) => Err((*i, format!("expected {what}, found a bracket"))),
    }
}

fn items<'n, 'a>(node: &'n Node<'a>, what: &str) -> Shape<&'n [Node<'a>]> {
    match node {
        Node::Group(_, items) => Ok(items),
        Node::Atom(i, t) => Err((*i, format!("expected bracketed {what}, found {t}"))),
    }
}

/// `[ X ]` or `[ X item ]` for a head `X`.
fn head<'a>(node: &Node<'a>, what: &str, lex: Option<char>, heads: &mut Heads) -> Shape<(usize, &'a str)> {
    let it = items(node, what)?;
    let (idx, tok) = atom(it.first().ok_or((node.idx(), format!("empty {what}")))?, what)?;
    match (it.len(), lex) {
        (1, Some(_)) => heads.bare.push(idx),
        (1, None) => {}
        (2, Some(p)) => {
            let (li, lt) = atom(&it[1], "lexical item")?;
            if !is_lexical(lt, p) {
                return Err((li, format!("unexpected {lt} in {what}")));
            }
            heads.lexical.push(li);
        }
        _ => return Err((node.idx(), format!("malformed {what}"))),
    }
    Ok((idx, tok))
}

fn dp_group(node: &Node<'_>, heads: &mut Heads) -> Shape<(usize, Num)> {
    let it = items(node, "DP")?;
    if it.len() != 3 {
        return Err((node.idx(), "DP must hold a label, D and N".into()));
    }
    let (idx, label) = atom(&it[0], "DP label")?;
    let num = parse_dp_label(label).ok_or((idx, format!("bad DP label {label}")))?;
    let (di, d) = head(&it[1], "D head", Some('D'), heads)?;
    if d != "D" {
        return Err((di, format!("expected D, found {d}")));
    }
    let (ni, n) = head(&it[2], "N head", Some('N'), heads)?;
    if n != "N" {
        return Err((ni, format!("expected N, found {n}")));
    }
    Ok((idx, num))
}

/// An argument position: `[ DP.. ]` optionally followed by `[-wh]`, or `[ TR[..] ]`.
fn slot(node: &Node<'_>, heads: &mut Heads) -> Shape<Slot> {
    let it = items(node, "argument")?;
    match it {
        [Node::Atom(i, t)] => {
            let kind = parse_trace(t).ok_or((*i, format!("unexpected {t} in argument position")))?;
            Ok(Slot::Trace { idx: *i, kind })
        }
        [dp @ Node::Group(..), rest @ ..] => {
            let (idx, num) = dp_group(dp, heads)?;
            let neg_wh = match rest {
                [] => false,
                [Node::Atom(_, t)] if *t == NEG_WH => true,
                [other, ..] => return Err((other.idx(), "unexpected material after DP".into())),
            };
            Ok(Slot::Dp(Dp { idx, num, neg_wh }))
        }
        _ => Err((node.idx(), "malformed argument".into())),
    }
}

/// `[ [ LABEL ... ] ]`: a complement phrase in its wrapper.
fn wrapped<'n, 'a>(node: &'n Node<'a>, label: &str) -> Shape<&'n [Node<'a>]> {
    match items(node, label)? {
        [inner] => {
            let it = items(inner, label)?;
            let (i, t) = atom(it.first().ok_or((inner.idx(), format!("empty {label}")))?, label)?;
            if t != label {
                return Err((i, format!("expected {label}, found {t}")));
            }
            Ok(&it[1..])
        }
        _ => Err((node.idx(), format!("{label} complement must be wrapped once"))),
    }
}

fn bracketed_clause(tokens: &[String]) -> Shape<Clause> {
    let roots = group(tokens);
    let root = match roots.as_slice() {
        [root] => root,
        [] => return Err((0, "empty sequence".into())),
        [_, second, ..] => return Err((second.idx(), "material outside the CP".into())),
    };
    let mut heads = Heads::default();
    let cp = items(root, "CP")?;
    let (ci, cl) = atom(cp.first().ok_or((root.idx(), "empty CP".to_string()))?, "CP label")?;
    if cl != "CP" {
        return Err((ci, format!("root must be CP, found {cl}")));
    }
    let (spec_cp, c_node, tp_node) = match &cp[1..] {
        [c, tp] => (None, c, tp),
        [spec, c, tp] => (Some(slot(spec, &mut heads)?), c, tp),
        _ => return Err((root.idx(), "CP must hold C and TP".into())),
    };
    let (c_idx, ctok) = head(c_node, "C head", None, &mut heads)?;
    let c_wh = parse_c(ctok).ok_or((c_idx, format!("expected C, found {ctok}")))?;

    let tp = wrapped(tp_node, "TP")?;
    let (spec_tp, t_node, vp_node) = match tp {
        [t, vp] => (None, t, vp),
        [spec, t, vp] => (Some(slot(spec, &mut heads)?), t, vp),
        _ => return Err((tp_node.idx(), "TP must hold T and VP".into())),
    };
    let (t_idx, ttok) = head(t_node, "T head", None, &mut heads)?;
    let (t_epp, t_num) = parse_t(ttok).ok_or((t_idx, format!("expected T, found {ttok}")))?;

    let vp = wrapped(vp_node, "VP")?;
    let (vi, vtok) = atom(vp.first().ok_or((vp_node.idx(), "empty VP".to_string()))?, "V")?;
    if vtok != "V" {
        return Err((vi, format!("expected V, found {vtok}")));
    }
    let args = match &vp[1..] {
        [Node::Atom(li, lt), rest @ ..] => {
            if !is_lexical(lt, 'V') {
                return Err((*li, format!("unexpected {lt} after V")));
            }
            heads.lexical.push(*li);
            rest
        }
        rest => {
            heads.bare.push(vi);
            rest
        }
    };
    let (obj, subj) = match args {
        [o, s] => (slot(o, &mut heads)?, slot(s, &mut heads)?),
        _ => return Err((vi, "VP must hold an object and a subject position".into())),
    };
    Ok(Clause {
        spec_cp,
        c_idx,
        c_wh,
        spec_tp,
        t_idx,
        t_epp,
        t_num,
        obj,
        subj,
        heads,
    })
}

struct Flat<'a> {
    tokens: &'a [String],
    pos: usize,
    heads: Heads,
}

impl Flat<'_> {
    fn peek(&self) -> Option<&str> {
        self.tokens.get(self.pos).map(String::as_str)
    }

    fn here(&self) -> usize {
        self.pos.min(self.tokens.len().saturating_sub(1))
    }

    fn expect(&mut self, want: &str) -> Shape<usize> {
        match self.peek() {
            Some(t) if t == want => {
                self.pos += 1;
                Ok(self.pos - 1)
            }
            Some(t) => Err((self.pos, format!("expected {want}, found {t}"))),
            None => Err((self.here(), format!("expected {want}, found end of sequence"))),
        }
    }

    fn head(&mut self, cat: &str, lex: char) -> Shape<()> {
        let idx = self.expect(cat)?;
        match self.peek() {
            Some(t) if is_lexical(t, lex) => {
                self.heads.lexical.push(self.pos);
                self.pos += 1;
            }
            _ => self.heads.bare.push(idx),
        }
        Ok(())
    }

    fn dp_body(&mut self) -> Shape<(usize, Num)> {
        self.head("D", 'D')?;
        self.head("N", 'N')?;
        let idx = self.pos;
        let tok = self.peek().ok_or((self.here(), "expected DP label".to_string()))?;
        let num = parse_dp_label(tok).ok_or((idx, format!("bad DP label {tok}")))?;
        self.pos += 1;
        Ok((idx, num))
    }

    fn item(&mut self) -> Shape<Option<Slot>> {
        match self.peek() {
            Some("[") => {
                self.pos += 1;
                let (idx, num) = self.dp_body()?;
                self.expect(NEG_WH)?;
                self.expect("]")?;
                Ok(Some(Slot::Dp(Dp { idx, num, neg_wh: true })))
            }
            Some("D") => {
                let (idx, num) = self.dp_body()?;
                Ok(Some(Slot::Dp(Dp { idx, num, neg_wh: false })))
            }
            Some(t) if t.starts_with("TR[") => {
                let kind = parse_trace(t).ok_or((self.pos, format!("unknown trace {t}")))?;
                self.pos += 1;
                Ok(Some(Slot::Trace { idx: self.pos - 1, kind }))
            }
            _ => Ok(None),
        }
    }

    fn required_item(&mut self, what: &str) -> Shape<Slot> {
        self.item()?
            .ok_or_else(|| (self.here(), format!("expected {what}")))
    }
}

fn flat_clause(tokens: &[String]) -> Shape<Clause> {
    let mut f = Flat {
        tokens,
        pos: 0,
        heads: Heads::default(),
    };
    let spec_cp = f.item()?;
    let c_idx = f.pos;
    let ctok = f.peek().ok_or((f.here(), "expected C".to_string()))?;
    let c_wh = parse_c(ctok).ok_or((c_idx, format!("expected C, found {ctok}")))?;
    f.pos += 1;
    let spec_tp = f.item()?;
    let t_idx = f.pos;
    let ttok = f.peek().ok_or((f.here(), "expected T".to_string()))?;
    let (t_epp, t_num) = parse_t(ttok).ok_or((t_idx, format!("expected T, found {ttok}")))?;
    f.pos += 1;
    f.head("V", 'V')?;
    let obj = f.required_item("object")?;
    let subj = f.required_item("subject position")?;
    if f.pos != tokens.len() {
        return Err((f.pos, "material after the clause".into()));
    }
    Ok(Clause {
        spec_cp,
        c_idx,
        c_wh,
        spec_tp,
        t_idx,
        t_epp,
        t_num,
        obj,
        subj,
        heads: f.heads,
    })
}

/// The DP that controls agreement, following trace chains upward.
fn subject(cl: &Clause) -> Option<Dp> {
    let spec_cp = || cl.spec_cp.and_then(|s| s.dp());
    match cl.subj {
        Slot::Dp(d) => Some(d),
        Slot::Trace { kind: TraceKind::Wh, .. } => spec_cp(),
        Slot::Trace { kind: TraceKind::A { .. }, .. } => match cl.spec_tp? {
            Slot::Dp(d) => Some(d),
            Slot::Trace { kind: TraceKind::Wh, .. } => spec_cp(),
            Slot::Trace { .. } => None,
        },
    }
}

fn check_agreement(cl: &Clause, params: &MpStructParams, report: &mut ValidationReport) {
    if params.ablation == Ablation::NoAgree {
        if cl.t_num != Num::Unvalued {
            report.push(Rule::Agreement, Some(cl.t_idx), "T is valued although Agree is ablated");
        }
        return;
    }
    if cl.t_num == Num::Unvalued {
        report.push(Rule::Agreement, Some(cl.t_idx), "T carries an unvalued uNum");
        return;
    }
    let Some(subj) = subject(cl) else {
        report.push(Rule::Agreement, Some(cl.t_idx), "no subject DP to agree with");
        return;
    };
    let ratio = params.agreement_match_ratio;
    if ratio == 1.0 && cl.t_num != subj.num {
        report.push(
            Rule::Agreement,
            Some(cl.t_idx),
            format!("T has uNum:{} but the subject is {}", cl.t_num.as_str(), subj.num.as_str()),
        );
    } else if ratio == 0.0 && cl.t_num == subj.num {
        report.push(
            Rule::Agreement,
            Some(cl.t_idx),
            "T matches the subject although agreement is forced to mismatch",
        );
    }
}

fn check_traces(cl: &Clause, params: &MpStructParams, report: &mut ValidationReport) {
    let no_move = params.ablation == Ablation::NoMove;
    let slots = [cl.spec_cp, cl.spec_tp, Some(cl.obj), Some(cl.subj)];
    let traces: Vec<(usize, TraceKind)> = slots
        .iter()
        .flatten()
        .filter_map(|s| s.trace_kind().map(|k| (s.idx(), k)))
        .collect();

    if no_move {
        for &(idx, _) in &traces {
            report.push(Rule::Trace, Some(idx), "trace in a corpus without Move");
        }
        if let Some(s) = cl.spec_tp.or(cl.spec_cp) {
            report.push(Rule::Trace, Some(s.idx()), "moved constituent in a corpus without Move");
        }
        if cl.c_wh {
            report.push(Rule::Trace, Some(cl.c_idx), "C[+wh] in a corpus without Move");
        }
        return;
    }

    if cl.t_epp != cl.spec_tp.is_some() {
        let msg = if cl.t_epp {
            "T has EPP but Spec-TP is empty"
        } else {
            "Spec-TP filled although T lacks EPP"
        };
        report.push(Rule::Trace, Some(cl.t_idx), msg);
    }

    if let Some(Slot::Trace { idx, .. }) = cl.spec_cp {
        report.push(Rule::Trace, Some(idx), "trace in Spec-CP");
    }
    if let Some(Slot::Trace { idx, kind: TraceKind::A { .. } }) = cl.spec_tp {
        report.push(Rule::Trace, Some(idx), "A-trace in Spec-TP");
    }
    if let Slot::Trace { idx, kind: TraceKind::A { .. } } = cl.obj {
        report.push(Rule::Trace, Some(idx), "A-trace in object position");
    }

    // A-chain: Spec-TP binds the vP subject position.
    match (cl.spec_tp, cl.subj) {
        (Some(_), Slot::Dp(d)) => {
            report.push(Rule::Trace, Some(d.idx), "raised subject leaves no trace");
        }
        (Some(_), Slot::Trace { kind: TraceKind::Wh, idx }) => {
            report.push(Rule::Trace, Some(idx), "wh-trace where the subject's A-trace belongs");
        }
        (None, Slot::Trace { kind: TraceKind::A { .. }, idx }) => {
            report.push(Rule::Trace, Some(idx), "A-trace without an antecedent in Spec-TP");
        }
        (Some(spec), Slot::Trace { kind: TraceKind::A { neg }, idx }) => {
            let antecedent_neg = spec.dp().is_some_and(|d| d.neg_wh);
            let expected = params.trace_style == TraceStyle::MirrorWh && antecedent_neg;
            if neg != expected {
                report.push(Rule::Trace, Some(idx), "trace label disagrees with its antecedent");
            }
        }
        _ => {}
    }

    // Wh-chain: C[+wh] <=> a DP in Spec-CP <=> exactly one wh-trace.
    let wh_dp = cl.spec_cp.and_then(|s| s.dp());
    let wh_traces: Vec<usize> = traces
        .iter()
        .filter(|(_, k)| *k == TraceKind::Wh)
        .map(|&(i, _)| i)
        .collect();
    if cl.c_wh != wh_dp.is_some() {
        let msg = if cl.c_wh {
            "C[+wh] without a moved DP"
        } else {
            "DP in Spec-CP under C[-wh]"
        };
        report.push(Rule::Trace, Some(cl.c_idx), msg);
    }
    if let Some(d) = wh_dp {
        if d.neg_wh {
            report.push(Rule::Trace, Some(d.idx), "[-wh] DP was wh-moved");
        }
    }
    let expected = usize::from(wh_dp.is_some());
    if wh_traces.len() != expected {
        let idx = wh_traces.first().copied().or(wh_dp.map(|d| d.idx));
        report.push(
            Rule::Trace,
            idx,
            format!("{} wh-trace(s) for {} wh-moved DP(s)", wh_traces.len(), expected),
        );
    }
}

pub fn validate_mpstruct(seq: &TokenSequence, params: &MpStructParams) -> ValidationReport {
    let mut report = ValidationReport::new();
    let tokens = seq.tokens();
    if !check_balance(tokens, &mut report) {
        return report;
    }
    if params.strip_lexical {
        for (i, t) in tokens.iter().enumerate() {
            if any_lexical(t) {
                report.push(Rule::Lexical, Some(i), format!("lexical item {t} in a stripped corpus"));
            }
        }
    }
    let parsed = if params.ablation == Ablation::NoMerge {
        flat_clause(tokens)
    } else {
        bracketed_clause(tokens)
    };
    let clause = match parsed {
        Ok(c) => c,
        Err((idx, msg)) => {
            report.push(Rule::Label, Some(idx), msg);
            return report;
        }
    };
    if !params.strip_lexical {
        for &i in &clause.heads.bare {
            report.push(Rule::Lexical, Some(i), "head without a lexical item");
        }
    }
    if clause.t_epp != params.epp_on_t {
        report.push(Rule::Label, Some(clause.t_idx), "EPP on T disagrees with the corpus parameters");
    }
    check_agreement(&clause, params, &mut report);
    check_traces(&clause, params, &mut report);
    report
}
