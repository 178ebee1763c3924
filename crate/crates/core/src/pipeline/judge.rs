//! Deciding whether a repaired method is a correct application of a pattern.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::detector::{detect, filter_already_applied};
use crate::error::Result;
use crate::fgpdg::{build_closed, Fgpdg, GraphOptions};
use crate::graph::embeds;
use crate::lang::{build_type_env, parse_method, Ast, NodeId, NodeKind, Signatures};
use crate::miner::Sep;
use crate::detector::fgpdg_lgraph;

/// Why an incorrect repair is incorrect, most severe first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    InvalidSyntax,
    ExcessiveTransplant,
    MissingInsertion,
    InsufficientDeletion,
    LostContext,
}

impl FailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureKind::InvalidSyntax => "invalid-syntax",
            FailureKind::ExcessiveTransplant => "excessive-transplant",
            FailureKind::MissingInsertion => "missing-insertion",
            FailureKind::InsufficientDeletion => "insufficient-deletion",
            FailureKind::LostContext => "lost-context",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    /// The repaired graph contains the pattern's new graph.
    pub cond1: bool,
    /// No unapplied occurrence of the old graph is left.
    pub cond2: bool,
    /// Context kept and nothing foreign added.
    pub cond3: bool,
    pub correct: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_kind: Option<FailureKind>,
}

impl Verdict {
    fn invalid() -> Self {
        Verdict {
            cond1: false,
            cond2: false,
            cond3: false,
            correct: false,
            failure_kind: Some(FailureKind::InvalidSyntax),
        }
    }
}

/// Multiset of `(kind, label)` over the AST nodes not in `skip`.
pub type Tokens = BTreeMap<(NodeKind, String), usize>;

pub fn tokens(ast: &Ast, skip: &BTreeSet<NodeId>) -> Tokens {
    let mut out = Tokens::new();
    for n in ast.preorder() {
        if !skip.contains(&n) {
            *out.entry((ast.kind(n), ast.label(n).to_string())).or_default() += 1;
        }
    }
    out
}

fn minus(a: &Tokens, b: &Tokens) -> Tokens {
    a.iter()
        .filter_map(|(k, &n)| {
            let left = n.saturating_sub(b.get(k).copied().unwrap_or(0));
            (left > 0).then(|| (k.clone(), left))
        })
        .collect()
}

fn intersect(a: &Tokens, b: &Tokens) -> Tokens {
    a.iter()
        .filter_map(|(k, &n)| {
            let m = n.min(b.get(k).copied().unwrap_or(0));
            (m > 0).then(|| (k.clone(), m))
        })
        .collect()
}

fn sub_multiset(a: &Tokens, b: &Tokens) -> bool {
    a.iter().all(|(k, &n)| b.get(k).copied().unwrap_or(0) >= n)
}

struct Parsed {
    ast: Ast,
    graph: Fgpdg,
}

fn analyse(src: &str, sigs: &Signatures, opts: &GraphOptions) -> Result<Parsed> {
    let ast = parse_method(src)?;
    let env = build_type_env(&ast, sigs)?;
    let graph = build_closed(&ast, &env, opts)?;
    Ok(Parsed { ast, graph })
}

/// Judges `m_repaired` against the true new version `m_new` of `m_old`.
pub fn judge_repair(
    m_old: &str,
    m_new: &str,
    m_repaired: &str,
    sep: &Sep,
    sigs: &Signatures,
    opts: &GraphOptions,
) -> Result<Verdict> {
    let old = analyse(m_old, sigs, opts)?;
    let new = analyse(m_new, sigs, opts)?;
    let Ok(rep) = analyse(m_repaired, sigs, opts) else {
        return Ok(Verdict::invalid());
    };

    let cond1 = embeds(&sep.new_graph.to_lgraph(), &fgpdg_lgraph(&rep.graph));
    let left = filter_already_applied(&rep.graph, sep, detect(&rep.graph, sep)?);
    let cond2 = left.is_empty();

    let mut pattern_anchors = BTreeSet::new();
    for m in detect(&old.graph, sep)? {
        for &c in &m.g_map {
            pattern_anchors.extend(old.graph.node(c).anchors.iter().copied());
        }
    }
    let t_old = tokens(&old.ast, &BTreeSet::new());
    let t_new = tokens(&new.ast, &BTreeSet::new());
    let t_rep = tokens(&rep.ast, &BTreeSet::new());
    let unchanged = intersect(&tokens(&old.ast, &pattern_anchors), &t_new);
    let context_kept = sub_multiset(&unchanged, &t_rep);
    let nothing_foreign = sub_multiset(&minus(&t_rep, &t_old), &minus(&t_new, &t_old));
    let cond3 = context_kept && nothing_foreign;

    let failure_kind = if !nothing_foreign {
        Some(FailureKind::ExcessiveTransplant)
    } else if !cond1 {
        Some(FailureKind::MissingInsertion)
    } else if !cond2 {
        Some(FailureKind::InsufficientDeletion)
    } else if !context_kept {
        Some(FailureKind::LostContext)
    } else {
        None
    };
    Ok(Verdict {
        cond1,
        cond2,
        cond3,
        correct: failure_kind.is_none(),
        failure_kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset_helpers() {
        let k = |s: &str| (NodeKind::Identifier, s.to_string());
        let a: Tokens = [(k("x"), 2), (k("y"), 1)].into();
        let b: Tokens = [(k("x"), 1)].into();
        assert_eq!(minus(&a, &b), [(k("x"), 1), (k("y"), 1)].into());
        assert_eq!(intersect(&a, &b), b);
        assert!(sub_multiset(&b, &a));
        assert!(!sub_multiset(&a, &b));
    }
}
