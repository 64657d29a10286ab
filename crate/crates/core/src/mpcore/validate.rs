use super::{CoreParams, DependencyRole, Landmark};
use crate::corpus::TokenSequence;
use crate::dyck::classify_typed;
use crate::report::{Rule, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok {
    StructOpen(u32),
    StructClose(u32),
    DepOpen(u32),
    DepClose(u32),
    Land(Landmark),
    Unknown,
}

fn classify(tok: &str, params: &CoreParams) -> Tok {
    if let Some((open, s)) = classify_typed(tok, '[', ']') {
        if s < params.k_struct {
            return if open { Tok::StructOpen(s) } else { Tok::StructClose(s) };
        }
    } else if let Some((open, i)) = classify_typed(tok, '(', ')') {
        if (1..=params.k_dep).contains(&i) {
            return if open { Tok::DepOpen(i) } else { Tok::DepClose(i) };
        }
    } else if let Some(l) = Landmark::parse(tok) {
        return Tok::Land(l);
    }
    Tok::Unknown
}

/// Per-type projection balance. `ty` maps a token to its counter slot and
/// direction.
fn projection_balance(
    toks: &[Tok],
    n_types: usize,
    ty: impl Fn(Tok) -> Option<(usize, bool)>,
    rule: Rule,
    what: &str,
    report: &mut ValidationReport,
) {
    let mut counts = vec![0usize; n_types];
    for (i, &t) in toks.iter().enumerate() {
        let Some((slot, open)) = ty(t) else { continue };
        if open {
            counts[slot] += 1;
        } else if counts[slot] == 0 {
            report.push(rule, Some(i), format!("{what} close without a matching open"));
        } else {
            counts[slot] -= 1;
        }
    }
    for (slot, &c) in counts.iter().enumerate() {
        if c > 0 {
            report.push(rule, None, format!("{what} type {slot}: {c} unclosed"));
        }
    }
}

/// Validator with the default inventory and role map.
pub fn validate_core(seq: &TokenSequence) -> ValidationReport {
    validate_core_with(seq, &CoreParams::default())
}

pub fn validate_core_with(seq: &TokenSequence, params: &CoreParams) -> ValidationReport {
    let mut report = ValidationReport::new();
    let toks: Vec<Tok> = seq.iter().map(|t| classify(t, params)).collect();
    for (i, t) in toks.iter().enumerate() {
        if *t == Tok::Unknown {
            report.push(Rule::Token, Some(i), format!("token {:?} outside the inventory", seq.tokens()[i]));
        }
    }
    projection_balance(
        &toks,
        params.k_struct as usize,
        |t| match t {
            Tok::StructOpen(s) => Some((s as usize, true)),
            Tok::StructClose(s) => Some((s as usize, false)),
            _ => None,
        },
        Rule::Balance,
        "structural",
        &mut report,
    );
    projection_balance(
        &toks,
        params.k_dep as usize + 1,
        |t| match t {
            Tok::DepOpen(i) => Some((i as usize, true)),
            Tok::DepClose(i) => Some((i as usize, false)),
            _ => None,
        },
        Rule::Dependency,
        "dependency",
        &mut report,
    );

    if !toks.iter().any(|t| matches!(t, Tok::Land(_))) {
        for check in ["adjacency", "topology", "clause_scope"] {
            report.skip(format!("{check}: not applicable, landmarks absent"));
        }
        return report;
    }
    let clauses = check_topology(&toks, &mut report);
    check_adjacency(&toks, &clauses, params, &mut report);
    check_clause_scope(&toks, &clauses, params, &mut report);
    report
}

/// Top-level structural spans as half-open token ranges.
fn clause_spans(toks: &[Tok]) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        match t {
            Tok::StructOpen(_) => {
                if depth == 0 {
                    start = i;
                }
                depth += 1;
            }
            Tok::StructClose(_) if depth > 0 => {
                depth -= 1;
                if depth == 0 {
                    spans.push((start, i + 1));
                }
            }
            _ => {}
        }
    }
    if depth > 0 {
        spans.push((start, toks.len()));
    }
    spans
}

/// Proper nesting of structural brackets, and one `H_C > H_T > H_V` chain
/// per clause with each landmark's group strictly inside the previous one's.
fn check_topology(toks: &[Tok], report: &mut ValidationReport) -> Vec<(usize, usize)> {
    // Each open group gets an id; `path` is the chain of ids enclosing a token.
    let mut path: Vec<(u32, usize)> = Vec::new();
    let mut next_id = 0usize;
    // (landmark, index, enclosing path of group ids) for the current clause.
    let mut found: Vec<(Landmark, usize, Vec<usize>)> = Vec::new();
    for (i, &t) in toks.iter().enumerate() {
        match t {
            Tok::StructOpen(s) => {
                path.push((s, next_id));
                next_id += 1;
            }
            Tok::StructClose(s) => match path.last() {
                Some(&(top, _)) if top == s => {
                    path.pop();
                    if path.is_empty() {
                        check_clause_chain(&found, i, report);
                        found.clear();
                    }
                }
                Some(_) => report.push(Rule::Topology, Some(i), "crossing structural brackets"),
                None => {}
            },
            Tok::Land(l) => {
                if path.is_empty() {
                    report.push(Rule::Topology, Some(i), format!("{} outside any clause", l.as_str()));
                } else {
                    found.push((l, i, path.iter().map(|&(_, id)| id).collect()));
                }
            }
            Tok::DepOpen(_) | Tok::DepClose(_) if path.is_empty() => {
                report.push(Rule::Topology, Some(i), "dependency bracket outside any clause");
            }
            _ => {}
        }
    }
    if !path.is_empty() {
        check_clause_chain(&found, toks.len(), report);
    }
    clause_spans(toks)
}

fn check_clause_chain(found: &[(Landmark, usize, Vec<usize>)], end: usize, report: &mut ValidationReport) {
    let of = |l: Landmark| found.iter().filter(move |(m, _, _)| *m == l);
    for l in [Landmark::C, Landmark::T, Landmark::V] {
        let n = of(l).count();
        if n != 1 {
            report.push(
                Rule::Topology,
                Some(end),
                format!("clause has {n} {} landmarks, expected 1", l.as_str()),
            );
        }
    }
    let (Some(c), Some(t), Some(v)) = (of(Landmark::C).next(), of(Landmark::T).next(), of(Landmark::V).next())
    else {
        return;
    };
    if c.2.len() != 1 {
        report.push(Rule::Topology, Some(c.1), "H_C is not a daughter of the clause bracket");
    }
    let strictly_inside = |inner: &[usize], outer: &[usize]| inner.len() > outer.len() && inner.starts_with(outer);
    if !strictly_inside(&t.2, &c.2) {
        report.push(Rule::Topology, Some(t.1), "H_T is not inside the CP domain");
    }
    if !strictly_inside(&v.2, &t.2) {
        report.push(Rule::Topology, Some(v.1), "H_V is not inside the TP domain");
    }
}

fn licenses(l: Landmark, role: Option<DependencyRole>) -> bool {
    role.is_some_and(|r| r.landmark() == l)
}

/// Landmarks sit immediately before the dependency opens they license.
/// `H_C` stands bare in a clause without a MOVE dependency.
fn check_adjacency(toks: &[Tok], clauses: &[(usize, usize)], params: &CoreParams, report: &mut ValidationReport) {
    let role = |t: Tok| match t {
        Tok::DepOpen(i) | Tok::DepClose(i) => params.roles.role_of(i),
        _ => None,
    };
    let clause_has_move = |i: usize| {
        clauses
            .iter()
            .find(|&&(s, e)| (s..e).contains(&i))
            .is_some_and(|&(s, e)| {
                toks[s..e]
                    .iter()
                    .any(|&t| matches!(t, Tok::DepOpen(_)) && role(t) == Some(DependencyRole::Move))
            })
    };
    for (i, &t) in toks.iter().enumerate() {
        match t {
            Tok::Land(l) => {
                let next = toks.get(i + 1).copied();
                let ok = match next {
                    Some(n @ Tok::DepOpen(_)) => licenses(l, role(n)),
                    _ => l == Landmark::C && !clause_has_move(i),
                };
                if !ok {
                    report.push(
                        Rule::Adjacency,
                        Some(i),
                        format!("{} not followed by the dependency it licenses", l.as_str()),
                    );
                }
            }
            Tok::DepOpen(id) => {
                let Some(r) = params.roles.role_of(id) else { continue };
                let prev = i.checked_sub(1).map(|p| toks[p]);
                if prev != Some(Tok::Land(r.landmark())) {
                    report.push(
                        Rule::Adjacency,
                        Some(i),
                        format!("({id} ({r}) not preceded by {}", r.landmark().as_str()),
                    );
                }
            }
            _ => {}
        }
    }
}

/// Every dependency opens and closes inside a single clause.
fn check_clause_scope(toks: &[Tok], clauses: &[(usize, usize)], params: &CoreParams, report: &mut ValidationReport) {
    for &(s, e) in clauses {
        let mut counts = vec![0i64; params.k_dep as usize + 1];
        for (i, &t) in toks[s..e].iter().enumerate() {
            match t {
                Tok::DepOpen(id) => counts[id as usize] += 1,
                Tok::DepClose(id) => {
                    counts[id as usize] -= 1;
                    if counts[id as usize] < 0 {
                        report.push(Rule::ClauseScope, Some(s + i), format!("){id} closes a dependency from an earlier clause"));
                        counts[id as usize] = 0;
                    }
                }
                _ => {}
            }
        }
        for (id, &c) in counts.iter().enumerate() {
            if c > 0 {
                report.push(Rule::ClauseScope, Some(e - 1), format!("({id} left open at clause end"));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpcore::{core_clause_with, ClauseDraw, VpOrder};

    fn seq(s: &str) -> TokenSequence {
        TokenSequence::from_text(s)
    }

    const WH_MINUS: &str = "[0 H_C [0 H_T (2 [0 )2 ]0 [0 H_V (4 [0 ]0 )4 [0 ]0 ]0 ]0 ]0";
    const WH_PLUS: &str = "[0 H_C (3 [0 H_T (1 [0 H_V (4 [0 ]0 )4 [0 )1 )3 ]0 ]0 ]0 ]0";

    #[test]
    fn templates_validate() {
        for s in [WH_MINUS, WH_PLUS] {
            let r = validate_core(&seq(s));
            assert!(r.is_clean(), "{s}: {:?}", r.violations);
            assert!(r.not_applicable.is_empty());
        }
        let both = format!("{WH_MINUS} {WH_PLUS}");
        assert!(validate_core(&seq(&both)).is_clean());
    }

    #[test]
    fn generic_example_balances_without_landmark_checks() {
        let r = validate_core(&seq("[0 (1 (2 (4 ]0 )4 )1 [0 )2 ]0"));
        assert!(r.is_clean());
        assert_eq!(r.not_applicable.len(), 3);
    }

    #[test]
    fn printed_core_example_is_flagged() {
        // Four structural opens against five closes, and H_V without a
        // following dependency open.
        let printed = "[0 H_C (1 [0 H_T (2 [0 (4 ]0 )4 ]0 )2 ]0 )1 [0 H_V ]0 ]0";
        let r = validate_core(&seq(printed));
        assert!(r.has(Rule::Balance));
        assert!(r.has(Rule::Adjacency));
    }

    #[test]
    fn separated_landmark_is_flagged() {
        let bad = WH_MINUS.replace("H_T (2", "H_T [0 (2");
        let r = validate_core(&seq(&bad));
        assert!(r.has(Rule::Adjacency));
        let swapped = WH_PLUS.replace("H_C (3", "(3 H_C");
        assert!(validate_core(&seq(&swapped)).has(Rule::Adjacency));
        let bare_c = WH_PLUS.replace("H_C (3 [0", "H_C [0 (3");
        assert!(validate_core(&seq(&bare_c)).has(Rule::Adjacency));
    }

    #[test]
    fn topology_faults() {
        let no_t = WH_MINUS.replace("H_T ", "");
        assert!(validate_core(&seq(&no_t)).has(Rule::Topology));
        let flat_t = "[0 H_C H_T (2 [0 )2 ]0 [0 H_V (4 [0 ]0 )4 [0 ]0 ]0 ]0";
        assert!(validate_core(&seq(flat_t)).has(Rule::Topology));
        let p = CoreParams {
            k_struct: 2,
            ..Default::default()
        };
        assert!(validate_core_with(&seq("[0 H_C [1 H_T (1 ]0 )1 ]1 [0 H_V (4 )4 ]0"), &p).has(Rule::Topology));
    }

    #[test]
    fn cross_clause_dependency_is_flagged() {
        let a = "[0 H_C [0 H_T (2 [0 ]0 [0 H_V (4 [0 ]0 )4 [0 ]0 ]0 ]0 ]0";
        let b = "[0 H_C [0 H_T (1 [0 )2 )1 ]0 [0 H_V (4 [0 ]0 )4 [0 ]0 ]0 ]0 ]0";
        let r = validate_core(&seq(&format!("{a} {b}")));
        assert!(r.has(Rule::ClauseScope));
        assert!(!r.has(Rule::Dependency));
    }

    #[test]
    fn foreign_tokens_are_flagged() {
        assert!(validate_core(&seq("[0 ( ]0 )")).has(Rule::Token));
        assert!(validate_core(&seq("[0 (5 ]0 )5")).has(Rule::Token));
        assert!(validate_core(&seq("(1 )1 )1")).has(Rule::Dependency));
    }

    #[test]
    fn custom_role_map_is_respected() {
        let p = CoreParams {
            k_dep: 6,
            roles: crate::mpcore::RoleMap {
                agr_a: 6,
                agr_b: 5,
                mv: 2,
                sel: 1,
            },
            ..Default::default()
        };
        let draw = ClauseDraw {
            wh: true,
            agr: DependencyRole::AgrB,
            vp_order: VpOrder::HeadFirst,
        };
        let c = core_clause_with(&draw, &p);
        assert_eq!(c.to_string(), "[0 H_C (2 [0 H_T (5 [0 H_V (1 [0 ]0 )1 [0 )5 )2 ]0 ]0 ]0 ]0");
        assert!(validate_core_with(&c, &p).is_clean());
        assert!(!validate_core(&c).is_clean());
    }
}
