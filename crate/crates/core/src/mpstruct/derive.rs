use super::tree::{Category, DerivationTree, Num, Wh};
use super::{Ablation, MpStructParams};
use crate::error::{Error, Result};
use crate::stream::RandomStream;

/// Lexical indices (0-based) and `[-wh]` marks drawn for the base vP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaseDraw {
    pub verb: u32,
    pub subj_det: u32,
    pub subj_noun: u32,
    pub obj_det: u32,
    pub obj_noun: u32,
    pub subj_neg_wh: bool,
    pub obj_neg_wh: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgreeDraw {
    pub subj_num: Num,
    pub obj_num: Num,
    /// Whether Agree copies the subject's value (otherwise the opposite value).
    pub matched: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WhTarget {
    Subject,
    Object,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoveDraw {
    pub wh: bool,
    pub target: Option<WhTarget>,
}

impl MoveDraw {
    pub const NONE: MoveDraw = MoveDraw {
        wh: false,
        target: None,
    };
}

/// What [`apply_move_traced`] did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoveReport {
    pub wh: bool,
    pub target: Option<WhTarget>,
    /// Movement operations performed (= traces created).
    pub moves: usize,
    /// Times the `[-wh]` marks were re-drawn for lack of a wh-eligible DP.
    pub redraws: usize,
    /// `true` when wh=+ was drawn but abandoned after the redraw budget.
    pub fallback: bool,
}

/// Re-draw budget when wh=+ finds no eligible DP.
pub const WH_REDRAWS: usize = 8;

fn dp(det: u32, noun: u32, neg_wh: bool) -> DerivationTree {
    let mut node = DerivationTree::merge(
        Category::DP,
        DerivationTree::head(Category::D, format!("D_{}", det + 1)),
        DerivationTree::head(Category::N, format!("N_{}", noun + 1)),
    );
    if neg_wh {
        node.features.wh = Wh::Minus;
    }
    node
}

pub fn build_base(stream: &mut RandomStream, params: &MpStructParams) -> Result<DerivationTree> {
    params.validate()?;
    let l = params.lexicon_sizes;
    let draw = BaseDraw {
        verb: stream.below(l.verbs.into()) as u32,
        subj_det: stream.below(l.dets.into()) as u32,
        subj_noun: stream.below(l.nouns.into()) as u32,
        obj_det: stream.below(l.dets.into()) as u32,
        obj_noun: stream.below(l.nouns.into()) as u32,
        subj_neg_wh: stream.bernoulli(params.p_dp_neg_wh),
        obj_neg_wh: stream.bernoulli(params.p_dp_neg_wh),
    };
    Ok(build_base_with(&draw))
}

/// `vP = Merge(DP_subj, V')`, `V' = Merge(V, DP_obj)`.
pub fn build_base_with(draw: &BaseDraw) -> DerivationTree {
    let subj = dp(draw.subj_det, draw.subj_noun, draw.subj_neg_wh);
    let obj = dp(draw.obj_det, draw.obj_noun, draw.obj_neg_wh);
    let v = DerivationTree::head(Category::V, format!("V_{}", draw.verb + 1));
    DerivationTree::merge(Category::VP, subj, DerivationTree::merge(Category::VBar, v, obj))
}

fn expect_base_vp(tree: &DerivationTree) -> Result<()> {
    let ok = tree.label == Category::VP
        && tree.children.len() == 2
        && tree.children[0].label == Category::DP
        && tree.children[1].label == Category::VBar
        && tree.children[1].children.len() == 2
        && tree.children[1].children[1].label == Category::DP;
    if ok {
        Ok(())
    } else {
        Err(Error::Structure(format!("Agree expects a base vP, got {}", tree.shape())))
    }
}

pub fn apply_agree(
    tree: DerivationTree,
    stream: &mut RandomStream,
    params: &MpStructParams,
) -> Result<DerivationTree> {
    expect_base_vp(&tree)?;
    let mut num = || if stream.bernoulli(params.p_sg) { Num::Sg } else { Num::Pl };
    let subj_num = num();
    let obj_num = num();
    let matched = stream.bernoulli(params.agreement_match_ratio);
    apply_agree_with(
        tree,
        &AgreeDraw {
            subj_num,
            obj_num,
            matched,
        },
        params,
    )
}

/// Values the DPs' `iNum`, merges `T[uNum]` above the vP and runs Agree.
pub fn apply_agree_with(
    mut tree: DerivationTree,
    draw: &AgreeDraw,
    params: &MpStructParams,
) -> Result<DerivationTree> {
    expect_base_vp(&tree)?;
    tree.children[0].features.num = Some(draw.subj_num);
    tree.children[1].children[1].features.num = Some(draw.obj_num);

    let mut t = DerivationTree::leaf(Category::T);
    t.features.epp = params.epp_on_t;
    t.features.num = Some(if params.ablation == Ablation::NoAgree {
        Num::Unvalued
    } else if draw.matched {
        draw.subj_num
    } else {
        draw.subj_num.opposite()
    });
    Ok(DerivationTree::merge(Category::TP, t, tree))
}

/// `iNum` of the subject in a Step-2 TP.
pub(crate) fn subject_num(tp: &DerivationTree) -> Num {
    tp.children[1].children[0]
        .features
        .num
        .unwrap_or(Num::Unvalued)
}

fn expect_step2_tp(tree: &DerivationTree) -> Result<()> {
    let ok = tree.label == Category::TP
        && tree.children.len() == 2
        && tree.children[0].label == Category::T
        && expect_base_vp(&tree.children[1]).is_ok();
    if ok {
        Ok(())
    } else {
        Err(Error::Structure(format!("Move expects a Step-2 TP, got {}", tree.shape())))
    }
}

pub fn apply_move(
    tree: DerivationTree,
    stream: &mut RandomStream,
    params: &MpStructParams,
) -> Result<DerivationTree> {
    apply_move_traced(tree, stream, params).map(|(t, _)| t)
}

/// [`apply_move`] that also reports the wh draw and the movement count.
pub fn apply_move_traced(
    mut tree: DerivationTree,
    stream: &mut RandomStream,
    params: &MpStructParams,
) -> Result<(DerivationTree, MoveReport)> {
    expect_step2_tp(&tree)?;
    if params.ablation == Ablation::NoMove {
        let (tree, moves) = apply_move_with(tree, &MoveDraw::NONE, params)?;
        return Ok((
            tree,
            MoveReport {
                wh: false,
                target: None,
                moves,
                redraws: 0,
                fallback: false,
            },
        ));
    }

    let mut wh = stream.bernoulli(params.p_wh);
    let mut target = None;
    let mut redraws = 0;
    let mut fallback = false;
    if wh {
        loop {
            let vp = &tree.children[1];
            let subj_ok = vp.children[0].features.wh != Wh::Minus;
            let obj_ok = vp.children[1].children[1].features.wh != Wh::Minus;
            let eligible: Vec<WhTarget> = [(subj_ok, WhTarget::Subject), (obj_ok, WhTarget::Object)]
                .into_iter()
                .filter_map(|(ok, t)| ok.then_some(t))
                .collect();
            if let Some(&t) = stream.choose(&eligible) {
                target = Some(t);
                break;
            }
            if redraws == WH_REDRAWS {
                wh = false;
                fallback = true;
                break;
            }
            redraws += 1;
            let subj_neg = stream.bernoulli(params.p_dp_neg_wh);
            let obj_neg = stream.bernoulli(params.p_dp_neg_wh);
            let vp = &mut tree.children[1];
            vp.children[0].features.wh = if subj_neg { Wh::Minus } else { Wh::None };
            vp.children[1].children[1].features.wh = if obj_neg { Wh::Minus } else { Wh::None };
        }
    }
    let (tree, moves) = apply_move_with(tree, &MoveDraw { wh, target }, params)?;
    Ok((
        tree,
        MoveReport {
            wh,
            target,
            moves,
            redraws,
            fallback,
        },
    ))
}

/// Subject raising to Spec-TP (when T has EPP), C merge, and wh-movement of
/// `draw.target` to Spec-CP. Returns the CP and the number of movements.
pub fn apply_move_with(
    mut tree: DerivationTree,
    draw: &MoveDraw,
    params: &MpStructParams,
) -> Result<(DerivationTree, usize)> {
    expect_step2_tp(&tree)?;
    let no_move = params.ablation == Ablation::NoMove;
    if no_move && draw.wh {
        return Err(Error::param("wh-movement requested under the no_move ablation"));
    }
    let mut vp = tree.children.pop().expect("TP has a vP");
    let t = tree.children.pop().expect("TP has a T");
    let mut next_link = 1u32;
    let mut moves = 0usize;

    let mut spec_tp = None;
    if !no_move && t.features.epp {
        let placeholder = DerivationTree::leaf(Category::TR);
        let mut subj = std::mem::replace(&mut vp.children[0], placeholder);
        let link = next_link;
        next_link += 1;
        subj.trace_link = Some(link);
        vp.children[0] = DerivationTree::trace(link, subj.features.wh);
        spec_tp = Some(subj);
        moves += 1;
    }

    let mut spec_cp = None;
    if draw.wh {
        let target = draw
            .target
            .ok_or_else(|| Error::param("wh=+ requires a wh target"))?;
        let mut moved = match (target, spec_tp.take()) {
            (WhTarget::Subject, Some(raised)) => {
                let link = raised.trace_link.expect("raised subject is linked");
                spec_tp = Some(DerivationTree::trace(link, Wh::Plus));
                raised
            }
            (WhTarget::Subject, None) => {
                let link = next_link;
                let mut subj =
                    std::mem::replace(&mut vp.children[0], DerivationTree::trace(link, Wh::Plus));
                subj.trace_link = Some(link);
                subj
            }
            (WhTarget::Object, raised) => {
                spec_tp = raised;
                let link = next_link;
                let slot = &mut vp.children[1].children[1];
                let mut obj = std::mem::replace(slot, DerivationTree::trace(link, Wh::Plus));
                obj.trace_link = Some(link);
                obj
            }
        };
        if moved.features.wh == Wh::Minus {
            return Err(Error::param("wh target carries [-wh]"));
        }
        moved.features.wh = Wh::Plus;
        spec_cp = Some(moved);
        moves += 1;
    }

    let tp = match spec_tp {
        Some(spec) => DerivationTree::merge(
            Category::TP,
            spec,
            DerivationTree::merge(Category::TBar, t, vp),
        ),
        None => DerivationTree::merge(Category::TP, t, vp),
    };
    let mut c = DerivationTree::leaf(Category::C);
    c.features.wh = if draw.wh { Wh::Plus } else { Wh::Minus };
    let cp = match spec_cp {
        Some(spec) => DerivationTree::merge(
            Category::CP,
            spec,
            DerivationTree::merge(Category::CBar, c, tp),
        ),
        None => DerivationTree::merge(Category::CP, c, tp),
    };
    Ok((cp, moves))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{derive_stream, SeedSpec};

    fn base() -> BaseDraw {
        BaseDraw {
            verb: 0,
            subj_det: 0,
            subj_noun: 1,
            obj_det: 0,
            obj_noun: 2,
            subj_neg_wh: false,
            obj_neg_wh: false,
        }
    }

    fn agree(subj: Num, matched: bool) -> AgreeDraw {
        AgreeDraw {
            subj_num: subj,
            obj_num: Num::Pl,
            matched,
        }
    }

    fn t_num(tp: &DerivationTree) -> Num {
        tp.children[0].features.num.unwrap()
    }

    #[test]
    fn base_is_vp_over_dp_and_vbar() {
        let p = MpStructParams::default();
        let tree = build_base(&mut derive_stream(SeedSpec::new(1, 0)), &p).unwrap();
        assert_eq!(tree.label, Category::VP);
        assert_eq!(tree.children.len(), 2);
        assert_eq!(tree.children[0].label, Category::DP);
        let vbar = &tree.children[1];
        assert_eq!(vbar.label, Category::VBar);
        assert_eq!(vbar.children[0].label, Category::V);
        assert_eq!(vbar.children[1].label, Category::DP);
        assert!(tree.check_invariants().is_ok());
    }

    #[test]
    fn base_shape_is_stable_across_streams() {
        let p = MpStructParams::default();
        let reference = build_base(&mut derive_stream(SeedSpec::new(1, 0)), &p).unwrap().shape();
        let mut lexical = std::collections::BTreeSet::new();
        for id in 0..100 {
            let t = build_base(&mut derive_stream(SeedSpec::new(1, id)), &p).unwrap();
            assert_eq!(t.shape(), reference);
            lexical.insert(t.children[1].children[0].lexical.clone());
        }
        assert!(lexical.len() > 1);
    }

    #[test]
    fn degenerate_lexicon_still_builds() {
        let p = MpStructParams {
            lexicon_sizes: super::super::LexiconSizes {
                nouns: 1,
                verbs: 1,
                dets: 1,
            },
            ..Default::default()
        };
        let t = build_base(&mut derive_stream(SeedSpec::new(1, 0)), &p).unwrap();
        let subj_d = &t.children[0].children[0].lexical;
        let obj_d = &t.children[1].children[1].children[0].lexical;
        assert_eq!(subj_d, obj_d);
    }

    #[test]
    fn agree_copies_or_flips_number() {
        let p = MpStructParams::default();
        let tp = apply_agree_with(build_base_with(&base()), &agree(Num::Pl, true), &p).unwrap();
        assert_eq!(t_num(&tp), Num::Pl);
        let tp = apply_agree_with(build_base_with(&base()), &agree(Num::Sg, false), &p).unwrap();
        assert_eq!(t_num(&tp), Num::Pl);
        let no_agree = MpStructParams {
            ablation: Ablation::NoAgree,
            ..Default::default()
        };
        let tp = apply_agree_with(build_base_with(&base()), &agree(Num::Sg, true), &no_agree).unwrap();
        assert_eq!(t_num(&tp), Num::Unvalued);
    }

    #[test]
    fn match_ratio_zero_forces_mismatch() {
        let p = MpStructParams {
            agreement_match_ratio: 0.0,
            ..Default::default()
        };
        for id in 0..50 {
            let mut s = derive_stream(SeedSpec::new(4, id));
            let tp = apply_agree(build_base(&mut s, &p).unwrap(), &mut s, &p).unwrap();
            assert_eq!(t_num(&tp), subject_num(&tp).opposite());
        }
    }

    #[test]
    fn agree_rejects_non_vp() {
        let p = MpStructParams::default();
        let tp = apply_agree_with(build_base_with(&base()), &agree(Num::Pl, true), &p).unwrap();
        let err = apply_agree(tp, &mut derive_stream(SeedSpec::new(0, 0)), &p).unwrap_err();
        assert!(matches!(err, Error::Structure(_)));
    }

    #[test]
    fn subject_raises_and_leaves_linked_trace() {
        let p = MpStructParams::default();
        let tp = apply_agree_with(build_base_with(&base()), &agree(Num::Pl, true), &p).unwrap();
        let (cp, moves) = apply_move_with(tp, &MoveDraw::NONE, &p).unwrap();
        assert_eq!(moves, 1);
        assert_eq!(cp.label, Category::CP);
        let tp = &cp.children[1];
        assert_eq!(tp.label, Category::TP);
        assert_eq!(tp.children[0].label, Category::DP);
        let vp = &tp.children[1].children[1];
        assert!(vp.children[0].is_trace());
        assert_eq!(vp.children[0].trace_link, tp.children[0].trace_link);
        assert!(cp.check_invariants().is_ok());
    }

    #[test]
    fn forced_wh_moves_the_only_eligible_dp() {
        let p = MpStructParams {
            p_wh: 1.0,
            ..Default::default()
        };
        let draw = BaseDraw {
            subj_neg_wh: true,
            ..base()
        };
        let tp = apply_agree_with(build_base_with(&draw), &agree(Num::Sg, true), &p).unwrap();
        let (cp, report) = apply_move_traced(tp, &mut derive_stream(SeedSpec::new(0, 0)), &p).unwrap();
        assert!(report.wh);
        assert_eq!(report.target, Some(WhTarget::Object));
        assert_eq!(report.moves, 2);
        assert_eq!(cp.count_traces(), 2);
        assert_eq!(cp.children[0].label, Category::DP);
        assert_eq!(cp.children[0].features.wh, Wh::Plus);
        assert!(cp.check_invariants().is_ok());
    }

    #[test]
    fn wh_subject_leaves_two_traces_in_one_chain() {
        let p = MpStructParams::default();
        let tp = apply_agree_with(build_base_with(&base()), &agree(Num::Sg, true), &p).unwrap();
        let draw = MoveDraw {
            wh: true,
            target: Some(WhTarget::Subject),
        };
        let (cp, moves) = apply_move_with(tp, &draw, &p).unwrap();
        assert_eq!(moves, 2);
        assert_eq!(cp.count_traces(), 2);
        assert!(cp.check_invariants().is_ok());
    }

    #[test]
    fn all_negative_wh_falls_back_after_redraws() {
        let p = MpStructParams {
            p_wh: 1.0,
            p_dp_neg_wh: 1.0,
            ..Default::default()
        };
        let mut s = derive_stream(SeedSpec::new(3, 0));
        let tp = apply_agree(build_base(&mut s, &p).unwrap(), &mut s, &p).unwrap();
        let (cp, report) = apply_move_traced(tp, &mut s, &p).unwrap();
        assert!(!report.wh && report.fallback);
        assert_eq!(report.redraws, WH_REDRAWS);
        assert_eq!(cp.children[0].label, Category::C);
    }

    #[test]
    fn no_move_keeps_dps_in_place() {
        let p = MpStructParams {
            ablation: Ablation::NoMove,
            p_wh: 1.0,
            ..Default::default()
        };
        let mut s = derive_stream(SeedSpec::new(3, 0));
        let tp = apply_agree(build_base(&mut s, &p).unwrap(), &mut s, &p).unwrap();
        let (cp, report) = apply_move_traced(tp, &mut s, &p).unwrap();
        assert_eq!(report.moves, 0);
        assert_eq!(cp.count_traces(), 0);
    }

    #[test]
    fn move_rejects_vp_input() {
        let p = MpStructParams::default();
        let err = apply_move(build_base_with(&base()), &mut derive_stream(SeedSpec::new(0, 0)), &p);
        assert!(matches!(err, Err(Error::Structure(_))));
    }
}
