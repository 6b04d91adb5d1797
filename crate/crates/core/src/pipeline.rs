//! Straight decision pipelines.
//!
//! A pipeline is an ordered list of stages. Stage `t` computes a decision
//! from the record and the decisions of stages `k_t..t-1`; every stage but
//! the last applies a rule to its decision, and the first rule that returns
//! false terminates the run with [`Status::Fail`].
//!
//! Randomized deciders draw from the generator handed to them. That
//! generator is derived from the run seed and the record id, so a record's
//! outcome never depends on which other records are evaluated alongside it.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::metrics::{Cell, OutcomeDistribution};
use crate::rng::{self, Domain};
use crate::scalar::Rational;

pub type Decision = u32;

pub type Decider = Arc<dyn Fn(&Record, &[Decision], &mut ChaCha8Rng) -> Decision + Send + Sync>;

pub type Rule = Arc<dyn Fn(Decision) -> bool + Send + Sync>;

/// Wraps a closure as a [`Decider`].
pub fn decider<F>(f: F) -> Decider
where
    F: Fn(&Record, &[Decision], &mut ChaCha8Rng) -> Decision + Send + Sync + 'static,
{
    Arc::new(f)
}

/// Protected-attribute values with one designated majority.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSet {
    labels: Vec<String>,
    majority: usize,
}

impl GroupSet {
    pub fn new<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        majority: &str,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidGroups("no group labels".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidGroups(format!("duplicate label `{l}`")));
            }
        }
        let majority = labels.iter().position(|l| l == majority).ok_or_else(|| {
            Error::InvalidGroups(format!("majority `{majority}` is not a listed group"))
        })?;
        Ok(GroupSet { labels, majority })
    }

    /// Majority `"0"`, minority `"1"`.
    pub fn binary() -> Self {
        GroupSet {
            labels: vec!["0".into(), "1".into()],
            majority: 0,
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn majority(&self) -> usize {
        self.majority
    }

    pub fn majority_label(&self) -> &str {
        &self.labels[self.majority]
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownGroup(label.to_string()))
    }

    /// Indices of every group except the majority, in label order.
    pub fn protected(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.labels.len()).filter(move |&i| i != self.majority)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub id: String,
    pub group: String,
    /// `truths[t - 1]` is the ground truth for stage `t`.
    pub truths: Vec<bool>,
}

impl Record {
    pub fn new(id: impl Into<String>, group: impl Into<String>, truths: Vec<bool>) -> Self {
        Record {
            id: id.into(),
            group: group.into(),
            truths,
        }
    }

    /// Truth bit of 1-based `stage`.
    pub fn truth(&self, stage: usize) -> Option<bool> {
        stage
            .checked_sub(1)
            .and_then(|i| self.truths.get(i).copied())
    }
}

/// The decision set `D_t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecisionDomain {
    Binary,
    /// `{0, 1, …, n-1}`.
    Finite(u32),
}

impl DecisionDomain {
    pub fn contains(self, d: Decision) -> bool {
        match self {
            DecisionDomain::Binary => d <= 1,
            DecisionDomain::Finite(n) => d < n,
        }
    }
}

impl fmt::Display for DecisionDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecisionDomain::Binary => write!(f, "{{0, 1}}"),
            DecisionDomain::Finite(n) => write!(f, "{{0..{}}}", n.saturating_sub(1)),
        }
    }
}

#[derive(Clone)]
pub struct StageSpec {
    decide: Decider,
    rule: Option<Rule>,
    lookback: usize,
    domain: DecisionDomain,
}

impl StageSpec {
    /// A final stage (no rule). `lookback` is the 1-based first visible stage.
    pub fn new(domain: DecisionDomain, lookback: usize, decide: Decider) -> Self {
        StageSpec {
            decide,
            rule: None,
            lookback,
            domain,
        }
    }

    pub fn with_rule(mut self, rule: Rule) -> Self {
        self.rule = Some(rule);
        self
    }

    pub fn domain(&self) -> DecisionDomain {
        self.domain
    }

    pub fn lookback(&self) -> usize {
        self.lookback
    }

    pub fn has_rule(&self) -> bool {
        self.rule.is_some()
    }

    /// Whether a decision lets the record proceed. The final stage passes everything.
    pub fn passes(&self, d: Decision) -> bool {
        self.rule.as_ref().is_none_or(|rule| rule(d))
    }
}

impl fmt::Debug for StageSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StageSpec")
            .field("lookback", &self.lookback)
            .field("domain", &self.domain)
            .field("has_rule", &self.rule.is_some())
            .finish()
    }
}

#[derive(Clone, Debug)]
pub struct PipelineSpec {
    stages: Vec<StageSpec>,
}

impl PipelineSpec {
    pub fn new(stages: Vec<StageSpec>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidSpec(
                "a pipeline needs at least one stage".into(),
            ));
        }
        let last = stages.len();
        for (i, stage) in stages.iter().enumerate() {
            let t = i + 1;
            if stage.lookback < 1 || stage.lookback > t {
                return Err(Error::InvalidSpec(format!(
                    "stage {t}: lookback {} outside 1..={t}",
                    stage.lookback
                )));
            }
            match (t == last, stage.rule.is_some()) {
                (true, true) => {
                    return Err(Error::InvalidSpec(
                        "the final stage must not have a rule".into(),
                    ));
                }
                (false, false) => {
                    return Err(Error::InvalidSpec(format!("stage {t} has no rule")));
                }
                _ => {}
            }
        }
        Ok(PipelineSpec { stages })
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// 1-based.
    pub fn stage(&self, t: usize) -> &StageSpec {
        &self.stages[t - 1]
    }

    /// The first `t` stages, with the new final stage's rule removed.
    pub fn truncated(&self, t: usize) -> Result<Self> {
        if t == 0 || t > self.stages.len() {
            return Err(Error::InvalidSpec(format!(
                "cannot truncate a {}-stage pipeline to {t} stages",
                self.stages.len()
            )));
        }
        let mut stages = self.stages[..t].to_vec();
        stages[t - 1].rule = None;
        PipelineSpec::new(stages)
    }

    /// Binary domains with `rule(0) = 0`, `rule(1) = 1` on every ruled stage.
    pub fn is_filtering(&self) -> bool {
        self.stages.iter().all(|s| {
            s.domain == DecisionDomain::Binary
                && (s.rule.is_none() || (!s.passes(0) && s.passes(1)))
        })
    }
}

/// A filtering pipeline: binary deciders, each seeing every earlier
/// decision, where only positive decisions proceed.
pub fn make_filtering(deciders: Vec<Decider>) -> Result<PipelineSpec> {
    if deciders.is_empty() {
        return Err(Error::InvalidSpec(
            "a filtering pipeline needs at least one decider".into(),
        ));
    }
    let last = deciders.len();
    let stages = deciders
        .into_iter()
        .enumerate()
        .map(|(i, decide)| {
            let stage = StageSpec::new(DecisionDomain::Binary, 1, decide);
            if i + 1 < last {
                stage.with_rule(Arc::new(|d| d == 1))
            } else {
                stage
            }
        })
        .collect();
    PipelineSpec::new(stages)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Passed,
    Fail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Passed => "PASSED",
            Status::Fail => "FAIL",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub status: Status,
    pub final_decision: Option<Decision>,
    pub stage_decisions: Vec<Decision>,
    pub failed_at: Option<usize>,
}

impl Outcome {
    /// Decision of 1-based `stage`, if the record reached it.
    pub fn decision(&self, stage: usize) -> Option<Decision> {
        stage
            .checked_sub(1)
            .and_then(|i| self.stage_decisions.get(i).copied())
    }

    pub fn reached(&self, stage: usize) -> bool {
        stage >= 1 && stage <= self.stage_decisions.len()
    }
}

fn record_rng(seed: u64, record: &Record) -> ChaCha8Rng {
    rng::stream(
        seed,
        Domain::Decisions,
        rng::stable_hash(record.id.as_bytes()),
    )
}

pub fn run_pipeline(spec: &PipelineSpec, record: &Record, seed: u64) -> Result<Outcome> {
    let total = spec.len();
    if record.truths.len() < total {
        return Err(Error::MissingTruth {
            record: record.id.clone(),
            stage: record.truths.len() + 1,
        });
    }
    let mut rng = record_rng(seed, record);
    let mut decisions = Vec::with_capacity(total);
    for (i, stage) in spec.stages.iter().enumerate() {
        let t = i + 1;
        let visible = &decisions[stage.lookback - 1..i];
        let d = (stage.decide)(record, visible, &mut rng);
        if !stage.domain.contains(d) {
            return Err(Error::DomainViolation {
                stage: t,
                value: d,
                domain: stage.domain.to_string(),
            });
        }
        decisions.push(d);
        if !stage.passes(d) {
            return Ok(Outcome {
                status: Status::Fail,
                final_decision: None,
                stage_decisions: decisions,
                failed_at: Some(t),
            });
        }
    }
    Ok(Outcome {
        status: Status::Passed,
        final_decision: decisions.last().copied(),
        stage_decisions: decisions,
        failed_at: None,
    })
}

/// Records plus the group set they are audited against.
#[derive(Clone, Debug)]
pub struct Population {
    pub groups: GroupSet,
    pub records: Vec<Record>,
}

impl Population {
    /// Groups are taken in order of first appearance; the majority defaults
    /// to the first of them.
    pub fn new(records: Vec<Record>, majority: Option<&str>) -> Result<Self> {
        let mut labels: Vec<String> = Vec::new();
        for r in &records {
            if !labels.contains(&r.group) {
                labels.push(r.group.clone());
            }
        }
        if labels.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        let majority = majority.unwrap_or(&labels[0]).to_string();
        let groups = GroupSet::new(labels, &majority)?;
        Ok(Population { groups, records })
    }

    pub fn with_groups(groups: GroupSet, records: Vec<Record>) -> Result<Self> {
        for r in &records {
            groups.index_of(&r.group)?;
        }
        Ok(Population { groups, records })
    }
}

/// Per-group tallies for one stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StageCounts {
    pub records: u64,
    pub reached: u64,
    /// Reached and let through by the rule (every reached record, at the final stage).
    pub passed: u64,
    /// Reached and decided 1.
    pub positive: u64,
    pub qualified: u64,
    pub qualified_reached: u64,
    pub qualified_positive: u64,
}

#[derive(Clone, Debug)]
pub struct OutcomeRow {
    pub record: Record,
    pub group: usize,
    pub outcome: Outcome,
}

#[derive(Clone, Debug)]
pub struct OutcomeTable {
    groups: GroupSet,
    stages: usize,
    rows: Vec<OutcomeRow>,
    /// `counts[group][stage - 1]`
    counts: Vec<Vec<StageCounts>>,
}

impl OutcomeTable {
    /// Builds the tallies for already-computed outcomes.
    pub fn from_rows(groups: GroupSet, stages: usize, rows: Vec<OutcomeRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        if stages == 0 {
            return Err(Error::InvalidSpec("zero stages".into()));
        }
        let mut counts = vec![vec![StageCounts::default(); stages]; groups.len()];
        for row in &rows {
            if row.record.truths.len() < stages {
                return Err(Error::MissingTruth {
                    record: row.record.id.clone(),
                    stage: row.record.truths.len() + 1,
                });
            }
            let per_stage = &mut counts[row.group];
            for t in 1..=stages {
                let c = &mut per_stage[t - 1];
                let qualified = row.record.truths[t - 1];
                let decision = row.outcome.decision(t);
                let positive = decision == Some(1);
                let passed = decision.is_some() && row.outcome.failed_at != Some(t);
                c.records += 1;
                c.reached += u64::from(decision.is_some());
                c.passed += u64::from(passed);
                c.positive += u64::from(positive);
                c.qualified += u64::from(qualified);
                c.qualified_reached += u64::from(qualified && decision.is_some());
                c.qualified_positive += u64::from(qualified && positive);
            }
        }
        Ok(OutcomeTable {
            groups,
            stages,
            rows,
            counts,
        })
    }

    pub fn groups(&self) -> &GroupSet {
        &self.groups
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn rows(&self) -> &[OutcomeRow] {
        &self.rows
    }

    pub fn counts(&self, group: usize, stage: usize) -> StageCounts {
        self.counts[group][stage - 1]
    }

    /// Records let through stage `t`, over all groups.
    pub fn pass_count(&self, stage: usize) -> u64 {
        self.counts.iter().map(|g| g[stage - 1].passed).sum()
    }

    /// `Pr{decision_t = 1 | truth_t = 1, A = group}`; with `given_reached`,
    /// additionally conditioned on the record having reached stage `t`.
    pub fn stage_rate(&self, stage: usize, group: usize, given_reached: bool) -> Result<Rational> {
        if stage == 0 || stage > self.stages {
            return Err(Error::InvalidSpec(format!("no stage {stage}")));
        }
        let c = self.counts(group, stage);
        let denom = if given_reached {
            c.qualified_reached
        } else {
            c.qualified
        };
        if denom == 0 {
            let reached = if given_reached {
                format!(", reached stage {stage}")
            } else {
                String::new()
            };
            return Err(Error::undefined(format!(
                "truth_{stage} = 1{reached}, A = {}",
                self.groups.label(group)
            )));
        }
        Ok(Rational::new(
            BigInt::from(c.qualified_positive),
            BigInt::from(denom),
        ))
    }

    /// Empirical joint distribution over `(A, X, Y, X̂, Ŷ)` with `X`/`X̂` from
    /// stage 1 and `Y`/`Ŷ` from the final stage; `Ŷ = 1` iff the record
    /// passed with final decision 1.
    pub fn empirical_distribution(&self) -> Result<OutcomeDistribution<Rational>> {
        if self.stages < 2 {
            return Err(Error::InvalidSpec(
                "an (X, Y) distribution needs at least two stages".into(),
            ));
        }
        let mut tally = vec![0u64; self.groups.len() * 16];
        for row in &self.rows {
            let cell = Cell {
                group: row.group,
                x: row.record.truths[0],
                y: row.record.truths[self.stages - 1],
                xhat: row.outcome.decision(1) == Some(1),
                yhat: row.outcome.status == Status::Passed && row.outcome.final_decision == Some(1),
            };
            tally[cell.index()] += 1;
        }
        let weights = tally
            .into_iter()
            .map(|n| Rational::from_integer(BigInt::from(n)))
            .collect();
        OutcomeDistribution::from_weight_vec(self.groups.clone(), weights)
    }
}

/// Runs the pipeline on every record. Outcomes are identical across
/// execution modes.
pub fn evaluate_population(
    spec: &PipelineSpec,
    population: &Population,
    seed: u64,
    exec: Execution,
) -> Result<OutcomeTable> {
    if population.records.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let rows = exec
        .map(population.records.len(), |i| {
            let record = &population.records[i];
            let group = population.groups.index_of(&record.group)?;
            let outcome = run_pipeline(spec, record, seed)?;
            Ok(OutcomeRow {
                record: record.clone(),
                group,
                outcome,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    OutcomeTable::from_rows(population.groups.clone(), spec.len(), rows)
}
