//! Derivation trees with feature bundles and trace links.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Num {
    Sg,
    Pl,
    Unvalued,
}

impl Num {
    pub fn as_str(self) -> &'static str {
        match self {
            Num::Sg => "sg",
            Num::Pl => "pl",
            Num::Unvalued => "u",
        }
    }

    pub fn opposite(self) -> Num {
        match self {
            Num::Sg => Num::Pl,
            Num::Pl => Num::Sg,
            Num::Unvalued => Num::Unvalued,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wh {
    Plus,
    Minus,
    #[default]
    None,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureBundle {
    /// `iNum` on DPs, `uNum` on T; absent elsewhere.
    pub num: Option<Num>,
    /// `[-wh]` marking on DPs, `[+wh]` on C and on wh-moved copies.
    pub wh: Wh,
    pub epp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Category {
    CP,
    /// C' (C plus its TP complement), present only below a filled Spec-CP.
    CBar,
    C,
    TP,
    /// T' (T plus its vP complement), present only below a filled Spec-TP.
    TBar,
    T,
    /// The verbal projection; surfaces as `VP`.
    VP,
    VBar,
    DP,
    D,
    N,
    V,
    /// Trace left by Move.
    TR,
}

impl Category {
    pub fn is_phrase(self) -> bool {
        matches!(self, Category::CP | Category::TP | Category::VP | Category::DP)
    }

    pub fn is_bar(self) -> bool {
        matches!(self, Category::CBar | Category::TBar | Category::VBar)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationTree {
    pub label: Category,
    pub features: FeatureBundle,
    pub children: Vec<DerivationTree>,
    /// Chain identifier shared by a moved constituent and all of its traces.
    pub trace_link: Option<u32>,
    /// Lexical item on D, N and V heads (`D_3`, `N_12`, ...).
    pub lexical: Option<String>,
}

impl DerivationTree {
    pub fn leaf(label: Category) -> Self {
        Self {
            label,
            features: FeatureBundle::default(),
            children: Vec::new(),
            trace_link: None,
            lexical: None,
        }
    }

    pub fn head(label: Category, lexical: impl Into<String>) -> Self {
        Self {
            lexical: Some(lexical.into()),
            ..Self::leaf(label)
        }
    }

    /// Binary Merge: a new node labelled `label` dominating `left` and `right`.
    pub fn merge(label: Category, left: DerivationTree, right: DerivationTree) -> Self {
        Self {
            children: vec![left, right],
            ..Self::leaf(label)
        }
    }

    pub fn trace(link: u32, wh: Wh) -> Self {
        Self {
            features: FeatureBundle {
                wh,
                ..FeatureBundle::default()
            },
            trace_link: Some(link),
            ..Self::leaf(Category::TR)
        }
    }

    pub fn is_trace(&self) -> bool {
        self.label == Category::TR
    }

    /// Pre-order iterator over all nodes.
    pub fn nodes(&self) -> Vec<&DerivationTree> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children.iter().rev());
        }
        out
    }

    pub fn count_traces(&self) -> usize {
        self.nodes().iter().filter(|n| n.is_trace()).count()
    }

    /// Shape with features and lexical items erased, for structural comparison.
    pub fn shape(&self) -> String {
        let mut s = format!("{:?}", self.label);
        if !self.children.is_empty() {
            s.push('(');
            let inner: Vec<String> = self.children.iter().map(|c| c.shape()).collect();
            s.push_str(&inner.join(","));
            s.push(')');
        }
        s
    }

    /// Checks binary branching and that every trace link names exactly one
    /// overt (non-trace) node.
    pub fn check_invariants(&self) -> Result<(), String> {
        let nodes = self.nodes();
        if let Some(n) = nodes.iter().find(|n| n.children.len() > 2) {
            return Err(format!("{:?} has {} children", n.label, n.children.len()));
        }
        for t in nodes.iter().filter(|n| n.is_trace()) {
            let link = t.trace_link.ok_or("trace without link")?;
            let overt = nodes
                .iter()
                .filter(|n| !n.is_trace() && n.trace_link == Some(link))
                .count();
            if overt != 1 {
                return Err(format!("trace link {link} has {overt} overt antecedents"));
            }
        }
        Ok(())
    }
}
