use mpstruct::mpstruct::{
    apply_agree_with, apply_move_with, build_base_with, linearize, validate_mpstruct, Ablation,
    AgreeDraw, BaseDraw, MoveDraw, MpStructParams, Num, TraceStyle, WhTarget,
};
use mpstruct::report::Rule;
use mpstruct::TokenSequence;

const FULL: &str = "[ CP [ C ] [ [ TP [ [ DP[Num:pl] [ D ] [ N ] ] ] [ T(+EPP,uNum:pl) ] [ [ VP V [ [ DP[Num:pl] [ D ] [ N ] ] ] [ TR[DP] ] ] ] ] ] ]";
const NO_MERGE: &str = "C [ D N DP[Num:pl] [-wh] ] T(+EPP,uNum:pl) V D N DP[Num:pl] TR[-wh]";
const NO_MOVE: &str = "[ CP [ C ] [ [ TP [ T(+EPP,uNum:pl) ] [ [ VP V [ [ DP[Num:pl] [ D ] [ N ] ] [-wh] ] [ [ DP[Num:pl] [ D ] [ N ] ] ] ] ] ] ] ]";
const NO_AGREE: &str = "[ CP [ C ] [ [ TP [ [ DP[Num:pl] [ D ] [ N ] ] [-wh] ] [ T(+EPP,uNum:u) ] [ [ VP V [ [ DP[Num:pl] [ D ] [ N ] ] ] [ TR[-wh] ] ] ] ] ] ]";

fn params(ablation: Ablation) -> MpStructParams {
    MpStructParams {
        ablation,
        ..MpStructParams::default()
    }
}

/// wh = -, plural subject and object, matched agreement.
fn derive(params: &MpStructParams, subj_neg_wh: bool, obj_neg_wh: bool) -> TokenSequence {
    derive_wh(params, subj_neg_wh, obj_neg_wh, MoveDraw::NONE)
}

fn derive_wh(params: &MpStructParams, subj_neg_wh: bool, obj_neg_wh: bool, mv: MoveDraw) -> TokenSequence {
    let base = build_base_with(&BaseDraw {
        verb: 3,
        subj_det: 0,
        subj_noun: 7,
        obj_det: 1,
        obj_noun: 9,
        subj_neg_wh,
        obj_neg_wh,
    });
    let agree = AgreeDraw {
        subj_num: Num::Pl,
        obj_num: Num::Pl,
        matched: true,
    };
    let tp = apply_agree_with(base, &agree, params).unwrap();
    let (cp, _) = apply_move_with(tp, &mv, params).unwrap();
    linearize(&cp, params)
}

fn text(s: &str) -> TokenSequence {
    TokenSequence::from_text(s)
}

#[test]
fn full_row_is_reproduced_token_for_token() {
    let p = params(Ablation::None);
    assert_eq!(derive(&p, false, false).to_string(), FULL);
}

#[test]
fn ablation_rows_are_reproduced() {
    assert_eq!(derive(&params(Ablation::NoMerge), true, false).to_string(), NO_MERGE);
    assert_eq!(derive(&params(Ablation::NoMove), false, true).to_string(), NO_MOVE);
    assert_eq!(derive(&params(Ablation::NoAgree), true, false).to_string(), NO_AGREE);
}

#[test]
fn category_trace_style_always_prints_tr_dp() {
    let p = MpStructParams {
        trace_style: TraceStyle::Category,
        ..params(Ablation::NoAgree)
    };
    let out = derive(&p, true, false);
    assert!(out.iter().any(|t| t == "TR[DP]"));
    assert!(!out.iter().any(|t| t == "TR[-wh]"));
    assert!(validate_mpstruct(&out, &p).is_clean());
}

#[test]
fn golden_rows_validate_clean() {
    for (row, ablation) in [
        (FULL, Ablation::None),
        (NO_MERGE, Ablation::NoMerge),
        (NO_MOVE, Ablation::NoMove),
        (NO_AGREE, Ablation::NoAgree),
    ] {
        let report = validate_mpstruct(&text(row), &params(ablation));
        assert!(report.is_clean(), "{ablation:?}: {:?}", report.violations);
    }
}

#[test]
fn flipped_agreement_is_flagged() {
    let bad = FULL.replace("uNum:pl", "uNum:sg");
    let report = validate_mpstruct(&text(&bad), &params(Ablation::None));
    assert!(report.has(Rule::Agreement), "{:?}", report.violations);
}

#[test]
fn deleted_bracket_is_flagged() {
    let mut tokens: Vec<&str> = FULL.split(' ').collect();
    let pos = tokens.iter().rposition(|t| *t == "]").unwrap();
    tokens.remove(pos);
    let report = validate_mpstruct(&text(&tokens.join(" ")), &params(Ablation::None));
    assert!(report.has(Rule::Balance));
}

#[test]
fn orphaned_trace_is_flagged() {
    let bad = FULL.replace("TR[DP]", "TR[wh]");
    let report = validate_mpstruct(&text(&bad), &params(Ablation::None));
    assert!(report.has(Rule::Trace), "{:?}", report.violations);
}

#[test]
fn lexical_items_respect_strip_flag() {
    let p = MpStructParams {
        strip_lexical: false,
        ..params(Ablation::None)
    };
    let lexical = derive(&p, false, false);
    assert!(lexical.iter().any(|t| t == "V_4"));
    assert!(lexical.iter().any(|t| t == "N_8"));
    assert!(validate_mpstruct(&lexical, &p).is_clean());

    let stripped = params(Ablation::None);
    let report = validate_mpstruct(&lexical, &stripped);
    assert!(report.has(Rule::Lexical));
    let report = validate_mpstruct(&text(FULL), &p);
    assert!(report.has(Rule::Lexical));

    let flat = MpStructParams {
        strip_lexical: false,
        ..params(Ablation::NoMerge)
    };
    let out = derive(&flat, true, false);
    assert!(validate_mpstruct(&out, &flat).is_clean(), "{out}");
}

#[test]
fn wh_movement_surfaces_in_spec_cp() {
    let p = params(Ablation::None);
    let obj = derive_wh(
        &p,
        false,
        false,
        MoveDraw {
            wh: true,
            target: Some(WhTarget::Object),
        },
    );
    assert_eq!(
        obj.to_string(),
        "[ CP [ [ DP[Num:pl] [ D ] [ N ] ] ] [ C[+wh] ] [ [ TP [ [ DP[Num:pl] [ D ] [ N ] ] ] \
         [ T(+EPP,uNum:pl) ] [ [ VP V [ TR[wh] ] [ TR[DP] ] ] ] ] ] ]"
    );
    assert!(validate_mpstruct(&obj, &p).is_clean());

    let subj = derive_wh(
        &p,
        false,
        false,
        MoveDraw {
            wh: true,
            target: Some(WhTarget::Subject),
        },
    );
    assert_eq!(
        subj.to_string(),
        "[ CP [ [ DP[Num:pl] [ D ] [ N ] ] ] [ C[+wh] ] [ [ TP [ TR[wh] ] [ T(+EPP,uNum:pl) ] \
         [ [ VP V [ [ DP[Num:pl] [ D ] [ N ] ] ] [ TR[DP] ] ] ] ] ] ]"
    );
    assert!(validate_mpstruct(&subj, &p).is_clean());

    let flat = params(Ablation::NoMerge);
    let out = derive_wh(
        &flat,
        false,
        true,
        MoveDraw {
            wh: true,
            target: Some(WhTarget::Subject),
        },
    );
    assert_eq!(out.to_string(), "D N DP[Num:pl] C[+wh] TR[wh] T(+EPP,uNum:pl) V [ D N DP[Num:pl] [-wh] ] TR[DP]");
    assert!(validate_mpstruct(&out, &flat).is_clean());
}

#[test]
fn without_epp_subject_stays_low() {
    let p = MpStructParams {
        epp_on_t: false,
        ..params(Ablation::None)
    };
    let out = derive(&p, false, false);
    assert!(out.iter().any(|t| t == "T(-EPP,uNum:pl)"));
    assert!(!out.iter().any(|t| t.starts_with("TR[")));
    assert!(validate_mpstruct(&out, &p).is_clean());
    let wh = derive_wh(
        &p,
        false,
        false,
        MoveDraw {
            wh: true,
            target: Some(WhTarget::Subject),
        },
    );
    assert!(validate_mpstruct(&wh, &p).is_clean(), "{wh}");
}

#[test]
fn validator_rejects_foreign_shapes() {
    let p = params(Ablation::None);
    for bad in ["", "[ TP ]", "[ CP [ C ] ] [ CP [ C ] ]", "( )"] {
        assert!(!validate_mpstruct(&text(bad), &p).is_clean(), "{bad:?}");
    }
    assert!(!validate_mpstruct(&text(FULL), &params(Ablation::NoMerge)).is_clean());
    assert!(!validate_mpstruct(&text(NO_MOVE), &p).is_clean());
}
