//! Validation findings shared by the MP-Struct and Core validators.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Bracket balance and proper nesting.
    Balance,
    /// Category / label grammar of the clause skeleton.
    Label,
    /// Agreement between T and the subject.
    Agreement,
    /// Trace licensing and wh-coupling.
    Trace,
    /// Lexical material left in a stripped corpus.
    Lexical,
    /// A dependency type whose projection is unbalanced.
    Dependency,
    /// Landmark not adjacent to the dependency it licenses.
    Adjacency,
    /// CP > TP > vP nesting.
    Topology,
    /// Dependency pair spanning two clauses.
    ClauseScope,
    /// Token not in the language's inventory.
    Token,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Balance => "balance",
            Rule::Label => "label",
            Rule::Agreement => "agreement",
            Rule::Trace => "trace",
            Rule::Lexical => "lexical",
            Rule::Dependency => "dependency",
            Rule::Adjacency => "adjacency",
            Rule::Topology => "topology",
            Rule::ClauseScope => "clause_scope",
            Rule::Token => "token",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    /// Offending token position, when one can be named.
    pub index: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Checks that were skipped, with the reason.
    pub not_applicable: Vec<String>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, rule: Rule, index: Option<usize>, message: impl Into<String>) {
        self.violations.push(Violation {
            rule,
            index,
            message: message.into(),
        });
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    pub fn skip(&mut self, what: impl Into<String>) {
        self.not_applicable.push(what.into());
    }

    /// One JSON object per violation: `{"rule":..,"index":..,"message":..}`.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for v in &self.violations {
            out.push_str(&serde_json::to_string(v).expect("violation encodes"));
            out.push('\n');
        }
        out
    }
}
