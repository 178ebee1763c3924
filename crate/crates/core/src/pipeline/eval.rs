//! Leave-one-change-out cross-validation with chronological filtering.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::corpus::{build_change_graphs, ChangeExample, Corpus};
use super::judge::{judge_repair, FailureKind, Verdict};
use crate::change_graph::{ChangeGraph, ChangeId};
use crate::error::{Error, Result};
use crate::fgpdg::GraphOptions;
use crate::miner::{mine_seps, MinerConfig, Sep};
use crate::transformer::{repair_all, Client};
use crate::FORMAT_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalConfig {
    pub min_support: usize,
    pub max_nodes: usize,
    pub graph: GraphOptions,
    /// When set, trials are started in a shuffled order; the report is
    /// the same either way.
    pub schedule_seed: Option<u64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            min_support: 3,
            max_nodes: MinerConfig::default().max_nodes,
            graph: GraphOptions::default(),
            schedule_seed: None,
        }
    }
}

impl EvalConfig {
    /// Support used when re-mining from a trial's training changes.
    pub fn retrain_support(&self) -> usize {
        2.max(self.min_support.saturating_sub(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialOutcome {
    Correct,
    Incorrect,
    /// Too few earlier changes to re-mine from.
    NoTraining,
    /// Re-mining produced no related pattern.
    NoPattern,
    /// The re-mined pattern does not occur in the test method.
    NoMatch,
    /// The transformer could not place the pattern code.
    RepairError,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trial {
    pub sep_id: String,
    pub size: usize,
    pub test: ChangeId,
    pub training: Vec<ChangeId>,
    pub produced: bool,
    pub outcome: TrialOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub trials: usize,
    pub produced: usize,
    pub correct: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    pub fn from_counts(trials: usize, produced: usize, correct: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(correct, produced);
        let recall = ratio(correct, trials);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Metrics {
            trials,
            produced,
            correct,
            precision,
            recall,
            f1,
        }
    }

    fn of<'a>(trials: impl Iterator<Item = &'a Trial>) -> Self {
        let (mut n, mut p, mut c) = (0, 0, 0);
        for t in trials {
            n += 1;
            p += usize::from(t.produced);
            c += usize::from(t.outcome == TrialOutcome::Correct);
        }
        Self::from_counts(n, p, c)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Bucket {
    pub name: &'static str,
    pub patterns: usize,
    #[serde(flatten)]
    pub metrics: Metrics,
}

/// Pattern-size buckets by total node count.
pub const BUCKETS: [(&str, usize, usize); 4] = [
    ("s<=4", 0, 4),
    ("5-10", 5, 10),
    ("11-20", 11, 20),
    (">=21", 21, usize::MAX),
];

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub format_version: u32,
    pub mode: String,
    pub closure_depth: usize,
    pub min_support: usize,
    pub retrain_min_support: usize,
    pub changes: usize,
    pub patterns: usize,
    pub total: Metrics,
    pub buckets: Vec<Bucket>,
    pub failures: BTreeMap<&'static str, usize>,
    pub trials: Vec<Trial>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    /// Plain-text summary table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<8} {:>8} {:>7} {:>9} {:>8} {:>10} {:>7} {:>7}",
            "size", "patterns", "trials", "produced", "correct", "precision", "recall", "f1"
        );
        let row = |out: &mut String, name: &str, patterns: usize, m: &Metrics| {
            let _ = writeln!(
                out,
                "{:<8} {:>8} {:>7} {:>9} {:>8} {:>10.3} {:>7.3} {:>7.3}",
                name, patterns, m.trials, m.produced, m.correct, m.precision, m.recall, m.f1
            );
        };
        for b in &self.buckets {
            row(&mut out, b.name, b.patterns, &b.metrics);
        }
        row(&mut out, "total", self.patterns, &self.total);
        out
    }
}

/// The re-mined pattern sharing the most edge descriptors with `p`.
pub fn related_pattern<'a>(p: &Sep, candidates: &'a [Sep]) -> Option<&'a Sep> {
    let want = p.edge_descriptors();
    let mut best: Option<(usize, &Sep)> = None;
    for q in candidates {
        let overlap = want.intersection(&q.edge_descriptors()).count();
        if overlap > 0 && best.is_none_or(|(b, _)| overlap > b) {
            best = Some((overlap, q));
        }
    }
    best.map(|(_, q)| q)
}

struct Ctx<'a> {
    cfg: &'a EvalConfig,
    corpus: &'a Corpus,
    graphs: &'a [ChangeGraph],
    index: BTreeMap<&'a ChangeId, usize>,
}

impl Ctx<'_> {
    fn example(&self, id: &ChangeId) -> &ChangeExample {
        &self.corpus.examples[self.index[id]]
    }

    fn run_trial(&self, p: &Sep, test: &ChangeId) -> Result<Trial> {
        let instance_ids: BTreeSet<&ChangeId> = p.instances.iter().map(|i| &i.change_id).collect();
        let training: Vec<ChangeId> = instance_ids
            .into_iter()
            .filter(|c| *c != test && c.time <= test.time)
            .cloned()
            .collect();
        let mut trial = Trial {
            sep_id: p.id.clone(),
            size: p.size(),
            test: test.clone(),
            training,
            produced: false,
            outcome: TrialOutcome::NoTraining,
            verdict: None,
        };
        let support = self.cfg.retrain_support();
        if trial.training.len() < support {
            return Ok(trial);
        }
        let train_graphs: Vec<ChangeGraph> = trial
            .training
            .iter()
            .map(|c| self.graphs[self.index[c]].clone())
            .collect();
        let mined = mine_seps(
            &train_graphs,
            &MinerConfig {
                min_support: support,
                max_nodes: self.cfg.max_nodes,
                all_frequent: false,
            },
        );
        let Some(q) = related_pattern(p, &mined) else {
            trial.outcome = TrialOutcome::NoPattern;
            return Ok(trial);
        };
        let ex = self.example(test);
        let sigs = &self.corpus.signatures;
        let client = Client::parse(&ex.old_source, sigs, &self.cfg.graph)?;
        if client.matches(q)?.is_empty() {
            trial.outcome = TrialOutcome::NoMatch;
            return Ok(trial);
        }
        let reference = train_graphs
            .iter()
            .find(|g| g.change_id == q.instances[0].change_id)
            .ok_or_else(|| Error::Invariant("reference instance outside training set".into()))?;
        let repaired = repair_all(&client, q, reference, &self.cfg.graph)?;
        if repaired.applied() == 0 {
            let invalid = repaired
                .outcomes
                .iter()
                .any(|o| o.error.as_deref() == Some("invalid-result"));
            if invalid {
                trial.produced = true;
                trial.outcome = TrialOutcome::Incorrect;
                trial.verdict = Some(Verdict {
                    cond1: false,
                    cond2: false,
                    cond3: false,
                    correct: false,
                    failure_kind: Some(FailureKind::InvalidSyntax),
                });
            } else {
                trial.outcome = TrialOutcome::RepairError;
            }
            return Ok(trial);
        }
        let verdict = judge_repair(&ex.old_source, &ex.new_source, &repaired.text, p, sigs, &self.cfg.graph)?;
        trial.produced = true;
        trial.outcome = if verdict.correct {
            TrialOutcome::Correct
        } else {
            TrialOutcome::Incorrect
        };
        trial.verdict = Some(verdict);
        Ok(trial)
    }
}

/// Mines the whole corpus, then runs one trial per (pattern, instance change).
pub fn cross_validate(corpus: &Corpus, cfg: &EvalConfig) -> Result<Report> {
    let graphs = build_change_graphs(&corpus.examples, &corpus.signatures, &cfg.graph)?;
    let mut index = BTreeMap::new();
    for (i, ex) in corpus.examples.iter().enumerate() {
        index.entry(&ex.change_id).or_insert(i);
    }
    let seps = mine_seps(
        &graphs,
        &MinerConfig {
            min_support: cfg.min_support,
            max_nodes: cfg.max_nodes,
            all_frequent: false,
        },
    );
    let ctx = Ctx {
        cfg,
        corpus,
        graphs: &graphs,
        index,
    };
    let jobs: Vec<(&Sep, &ChangeId)> = seps
        .iter()
        .flat_map(|p| {
            let ids: BTreeSet<&ChangeId> = p.instances.iter().map(|i| &i.change_id).collect();
            ids.into_iter().map(move |c| (p, c))
        })
        .collect();
    let mut jobs = jobs;
    if let Some(seed) = cfg.schedule_seed {
        jobs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut trials: Vec<Trial> = jobs
        .par_iter()
        .map(|(p, c)| ctx.run_trial(p, c))
        .collect::<Result<_>>()?;
    trials.sort_by(|a, b| (&a.sep_id, &a.test).cmp(&(&b.sep_id, &b.test)));
    for t in &trials {
        if t.training.iter().any(|c| c.time > t.test.time) {
            return Err(Error::Invariant(format!("future change used to test {}", t.test)));
        }
    }

    let size_of: BTreeMap<&str, usize> = seps.iter().map(|s| (s.id.as_str(), s.size())).collect();
    let buckets = BUCKETS
        .iter()
        .map(|&(name, lo, hi)| {
            let inside = |s: usize| (lo..=hi).contains(&s);
            Bucket {
                name,
                patterns: size_of.values().filter(|&&s| inside(s)).count(),
                metrics: Metrics::of(trials.iter().filter(|t| inside(t.size))),
            }
        })
        .collect();
    let mut failures = BTreeMap::new();
    for t in &trials {
        if let Some(k) = t.verdict.as_ref().and_then(|v| v.failure_kind) {
            *failures.entry(k.as_str()).or_default() += 1;
        }
    }
    Ok(Report {
        format_version: FORMAT_VERSION,
        mode: cfg.graph.mode.to_string(),
        closure_depth: cfg.graph.closure_depth,
        min_support: cfg.min_support,
        retrain_min_support: cfg.retrain_support(),
        changes: corpus.examples.len(),
        patterns: seps.len(),
        total: Metrics::of(trials.iter()),
        buckets,
        failures,
        trials,
    })
}
