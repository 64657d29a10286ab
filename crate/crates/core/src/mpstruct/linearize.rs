use super::tree::{Category, DerivationTree, Num, Wh};
use super::{Ablation, MpStructParams, TraceStyle};
use crate::corpus::TokenSequence;

pub(crate) const NEG_WH: &str = "[-wh]";

/// Children in spell-out order: the verbal projection puts its V' before
/// the specifier, everything else is left to right.
fn spellout(node: &DerivationTree) -> Box<dyn Iterator<Item = &DerivationTree> + '_> {
    if node.label == Category::VP {
        Box::new(node.children.iter().rev())
    } else {
        Box::new(node.children.iter())
    }
}

fn label_token(node: &DerivationTree) -> String {
    match node.label {
        Category::CP => "CP".into(),
        Category::TP => "TP".into(),
        Category::VP => "VP".into(),
        Category::DP => format!("DP[Num:{}]", node.features.num.unwrap_or(Num::Unvalued).as_str()),
        Category::C => match node.features.wh {
            Wh::Plus => "C[+wh]".into(),
            _ => "C".into(),
        },
        Category::T => format!(
            "T({},uNum:{})",
            if node.features.epp { "+EPP" } else { "-EPP" },
            node.features.num.unwrap_or(Num::Unvalued).as_str()
        ),
        Category::D => "D".into(),
        Category::N => "N".into(),
        Category::V => "V".into(),
        Category::TR => trace_token(node.features.wh, TraceStyle::MirrorWh).into(),
        Category::CBar | Category::TBar | Category::VBar => unreachable!("bar levels have no label token"),
    }
}

pub(crate) fn trace_token(wh: Wh, style: TraceStyle) -> &'static str {
    match (wh, style) {
        (Wh::Plus, _) => "TR[wh]",
        (Wh::Minus, TraceStyle::MirrorWh) => "TR[-wh]",
        _ => "TR[DP]",
    }
}

struct Writer<'p> {
    out: Vec<String>,
    params: &'p MpStructParams,
}

impl Writer<'_> {
    fn emit(&mut self, tok: impl Into<String>) {
        self.out.push(tok.into());
    }

    fn lexical(&mut self, node: &DerivationTree) {
        if !self.params.strip_lexical {
            if let Some(item) = &node.lexical {
                self.emit(item.clone());
            }
        }
    }

    fn trace(&mut self, node: &DerivationTree) {
        self.emit(trace_token(node.features.wh, self.params.trace_style));
    }

    fn bracketed(&mut self, node: &DerivationTree) {
        match node.label {
            l if l.is_phrase() => {
                self.emit("[");
                self.emit(label_token(node));
                for child in spellout(node) {
                    self.constituent(child);
                }
                self.emit("]");
            }
            l if l.is_bar() => {
                for child in spellout(node) {
                    self.constituent(child);
                }
            }
            Category::V => {
                self.emit("V");
                self.lexical(node);
            }
            Category::TR => {
                self.emit("[");
                self.trace(node);
                self.emit("]");
            }
            _ => {
                self.emit("[");
                self.emit(label_token(node));
                self.lexical(node);
                self.emit("]");
            }
        }
    }

    /// A child position: phrases get an extra wrapper that also holds `[-wh]`.
    fn constituent(&mut self, node: &DerivationTree) {
        if node.label.is_phrase() {
            self.emit("[");
            self.bracketed(node);
            if node.label == Category::DP && node.features.wh == Wh::Minus {
                self.emit(NEG_WH);
            }
            self.emit("]");
        } else {
            self.bracketed(node);
        }
    }

    /// w/o-Merge rendering: no projection brackets or labels; a DP is spelled
    /// `D N DP[..]` and only a `[-wh]` DP keeps a grouping bracket.
    fn flat(&mut self, node: &DerivationTree) {
        match node.label {
            Category::DP => {
                let marked = node.features.wh == Wh::Minus;
                if marked {
                    self.emit("[");
                }
                for child in &node.children {
                    self.flat(child);
                }
                self.emit(label_token(node));
                if marked {
                    self.emit(NEG_WH);
                    self.emit("]");
                }
            }
            Category::TR => self.trace(node),
            l if l.is_phrase() || l.is_bar() => {
                for child in spellout(node) {
                    self.flat(child);
                }
            }
            _ => {
                self.emit(label_token(node));
                self.lexical(node);
            }
        }
    }
}

/// Pre-order spell-out of a derived clause.
pub fn linearize(tree: &DerivationTree, params: &MpStructParams) -> TokenSequence {
    let mut w = Writer {
        out: Vec::new(),
        params,
    };
    if params.ablation == Ablation::NoMerge {
        w.flat(tree);
    } else {
        w.bracketed(tree);
    }
    TokenSequence::from_vec_unchecked(w.out)
}
