//! Equal-opportunity measurements on joint outcome distributions.
//!
//! An [`OutcomeDistribution`] is a table of probability masses over
//! `(A, X, Y, X̂, Ŷ)`: group, stage-1 truth, final truth, stage-1 decision,
//! final decision. All rates are conditional probabilities read off that
//! table; a condition with zero mass is an error, never a silent zero.
//!
//! The *slack* of a predictor for group `g` is
//! `TPR_g / TPR_majority - 1`, the largest `eps` for which
//! `(1+eps) * TPR_majority <= TPR_g` holds.

use std::fmt;

use crate::error::{Error, Result};
use crate::pipeline::GroupSet;
use crate::scalar::{one, zero, Prob, Rational};

/// One cell of the joint table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub group: usize,
    pub x: bool,
    pub y: bool,
    pub xhat: bool,
    pub yhat: bool,
}

impl Cell {
    pub fn index(&self) -> usize {
        self.group * 16
            + (usize::from(self.x) << 3)
            + (usize::from(self.y) << 2)
            + (usize::from(self.xhat) << 1)
            + usize::from(self.yhat)
    }

    pub fn from_index(i: usize) -> Cell {
        Cell {
            group: i / 16,
            x: i & 8 != 0,
            y: i & 4 != 0,
            xhat: i & 2 != 0,
            yhat: i & 1 != 0,
        }
    }

    fn predicted(&self, p: Predictor) -> bool {
        match p {
            Predictor::XHat => self.xhat,
            Predictor::YHat => self.yhat,
        }
    }

    fn truth(&self, t: Truth) -> bool {
        match t {
            Truth::X => self.x,
            Truth::Y => self.y,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Predictor {
    /// Stage-1 decision.
    XHat,
    /// Final decision.
    YHat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truth {
    X,
    Y,
}

impl fmt::Display for Predictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Predictor::XHat => "xhat",
            Predictor::YHat => "yhat",
        })
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::X => "x",
            Truth::Y => "y",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution<T> {
    groups: GroupSet,
    mass: Vec<T>,
}

impl<T: Prob> OutcomeDistribution<T> {
    /// Masses must be non-negative and sum to one; omitted cells are 0.
    pub fn new(groups: GroupSet, cells: impl IntoIterator<Item = (Cell, T)>) -> Result<Self> {
        let mass = Self::collect(&groups, cells)?;
        let dist = OutcomeDistribution { groups, mass };
        let total = dist.total();
        if !total.is_unit_total() {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {}, not 1",
                total.to_f64()
            )));
        }
        Ok(dist)
    }

    /// Normalizes non-negative weights into a distribution.
    pub fn from_weights(
        groups: GroupSet,
        cells: impl IntoIterator<Item = (Cell, T)>,
    ) -> Result<Self> {
        let mass = Self::collect(&groups, cells)?;
        Self::from_weight_vec(groups, mass)
    }

    pub(crate) fn from_weight_vec(groups: GroupSet, mut mass: Vec<T>) -> Result<Self> {
        debug_assert_eq!(mass.len(), groups.len() * 16);
        if mass.iter().any(|m| m.is_negative()) {
            return Err(Error::InvalidDistribution("negative mass".into()));
        }
        let total = mass.iter().fold(zero::<T>(), |acc, m| acc + m);
        if total.is_zero() {
            return Err(Error::InvalidDistribution("all masses are zero".into()));
        }
        for m in &mut mass {
            *m = m.clone() / total.clone();
        }
        Ok(OutcomeDistribution { groups, mass })
    }

    fn collect(groups: &GroupSet, cells: impl IntoIterator<Item = (Cell, T)>) -> Result<Vec<T>> {
        let mut mass = vec![zero::<T>(); groups.len() * 16];
        let mut seen = vec![false; mass.len()];
        for (cell, m) in cells {
            if cell.group >= groups.len() {
                return Err(Error::InvalidDistribution(format!(
                    "group index {} out of range",
                    cell.group
                )));
            }
            if m.is_negative() {
                return Err(Error::InvalidDistribution(format!(
                    "negative mass at {cell:?}"
                )));
            }
            let i = cell.index();
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidDistribution(format!(
                    "cell {cell:?} listed twice"
                )));
            }
            mass[i] = m;
        }
        Ok(mass)
    }

    pub fn uniform(groups: GroupSet) -> Self {
        let n = groups.len() * 16;
        let m = one::<T>() / T::from_count(n as u64);
        OutcomeDistribution {
            groups,
            mass: vec![m; n],
        }
    }

    pub fn groups(&self) -> &GroupSet {
        &self.groups
    }

    pub fn mass(&self, cell: &Cell) -> &T {
        &self.mass[cell.index()]
    }

    pub fn cells(&self) -> impl Iterator<Item = (Cell, &T)> {
        self.mass
            .iter()
            .enumerate()
            .map(|(i, m)| (Cell::from_index(i), m))
    }

    pub fn total(&self) -> T {
        self.mass.iter().fold(zero::<T>(), |acc, m| acc + m)
    }

    pub fn probability(&self, event: impl Fn(&Cell) -> bool) -> T {
        self.cells()
            .filter(|(c, _)| event(c))
            .fold(zero::<T>(), |acc, (_, m)| acc + m)
    }

    /// `Pr{event | given}`.
    pub fn conditional_rate(
        &self,
        event: impl Fn(&Cell) -> bool,
        given: impl Fn(&Cell) -> bool,
    ) -> Result<T> {
        self.rate(event, given, || "given".to_string())
    }

    fn rate(
        &self,
        event: impl Fn(&Cell) -> bool,
        given: impl Fn(&Cell) -> bool,
        describe: impl FnOnce() -> String,
    ) -> Result<T> {
        let (mut joint, mut cond) = (zero::<T>(), zero::<T>());
        for (c, m) in self.cells() {
            if given(&c) {
                cond = cond + m;
                if event(&c) {
                    joint = joint + m;
                }
            }
        }
        if cond.is_zero() {
            return Err(Error::undefined(describe()));
        }
        Ok(joint / cond)
    }

    /// `Pr{pred = 1 | truth = 1, A = group}`.
    pub fn true_positive_rate(
        &self,
        predictor: Predictor,
        truth: Truth,
        group: usize,
    ) -> Result<T> {
        self.rate(
            |c| c.predicted(predictor),
            |c| c.group == group && c.truth(truth),
            || format!("{truth} = 1, A = {}", self.groups.label(group)),
        )
    }

    /// `Pr{Ŷ = 1 | X̂ = 1, Y = 1, A = group}`.
    pub fn stage2_rate(&self, group: usize) -> Result<T> {
        self.rate(
            |c| c.yhat,
            |c| c.group == group && c.xhat && c.y,
            || format!("xhat = 1, y = 1, A = {}", self.groups.label(group)),
        )
    }

    pub fn map_mass<U: Prob>(&self, f: impl Fn(&T) -> U) -> OutcomeDistribution<U> {
        OutcomeDistribution {
            groups: self.groups.clone(),
            mass: self.mass.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> OutcomeDistribution<f64> {
        self.map_mass(Prob::to_f64)
    }
}

impl OutcomeDistribution<f64> {
    pub fn from_exact(dist: &OutcomeDistribution<Rational>) -> Self {
        dist.to_f64()
    }
}

fn slack_from_rates<T: Prob>(group_rate: T, majority_rate: &T, label: &str) -> Result<T> {
    if majority_rate.is_zero() {
        return Err(Error::InfeasibleSlack {
            group: label.to_string(),
        });
    }
    Ok(group_rate / majority_rate.clone() - one::<T>())
}

/// Slack of `predictor` with respect to `truth` for `group` against the majority.
pub fn epsilon_slack<T: Prob>(
    dist: &OutcomeDistribution<T>,
    predictor: Predictor,
    truth: Truth,
    group: &str,
) -> Result<T> {
    let g = dist.groups.index_of(group)?;
    let maj = dist.true_positive_rate(predictor, truth, dist.groups.majority())?;
    let rate = dist.true_positive_rate(predictor, truth, g)?;
    slack_from_rates(rate, &maj, group)
}

/// Second-stage slack, conditioned on passing stage 1 and being qualified.
pub fn stage2_conditional_slack<T: Prob>(dist: &OutcomeDistribution<T>, group: &str) -> Result<T> {
    let g = dist.groups.index_of(group)?;
    let maj = dist.stage2_rate(dist.groups.majority())?;
    let rate = dist.stage2_rate(g)?;
    slack_from_rates(rate, &maj, group)
}

/// Stage-1 decision measured against the final-stage truth `Y`.
pub fn stage1_cross_slack<T: Prob>(dist: &OutcomeDistribution<T>, group: &str) -> Result<T> {
    epsilon_slack(dist, Predictor::XHat, Truth::Y, group)
}

/// `Pr{X̂=1 | X=1, A=g} / Pr{X̂=1 | Y=1, A=g}`. Equal to 1 when stage-1
/// qualification and final qualification coincide.
pub fn decoupling_ratio<T: Prob>(dist: &OutcomeDistribution<T>, group: &str) -> Result<T> {
    let g = dist.groups.index_of(group)?;
    let num = dist.true_positive_rate(Predictor::XHat, Truth::X, g)?;
    let den = dist.true_positive_rate(Predictor::XHat, Truth::Y, g)?;
    if den.is_zero() {
        return Err(Error::UndefinedRatio {
            group: group.to_string(),
        });
    }
    Ok(num / den)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

/// Which `eps` each protected group is tested at.
#[derive(Clone, Debug, PartialEq)]
pub enum EpsTargets<T> {
    Untested,
    Uniform(T),
    PerGroup(Vec<(String, T)>),
}

impl<T: Clone> EpsTargets<T> {
    pub fn for_group(&self, label: &str) -> Option<T> {
        match self {
            EpsTargets::Untested => None,
            EpsTargets::Uniform(e) => Some(e.clone()),
            EpsTargets::PerGroup(list) => list
                .iter()
                .find(|(l, _)| l == label)
                .map(|(_, e)| e.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlackRow<T> {
    pub group: String,
    pub slack: T,
    pub tested_eps: Option<T>,
    pub verdict: Option<Verdict>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlackReport<T> {
    pub rows: Vec<SlackRow<T>>,
}

impl<T> SlackReport<T> {
    pub fn any_fail(&self) -> bool {
        self.rows.iter().any(|r| r.verdict == Some(Verdict::Fail))
    }

    pub fn row(&self, group: &str) -> Option<&SlackRow<T>> {
        self.rows.iter().find(|r| r.group == group)
    }
}

/// Builds a report from any per-group rate (index into `groups`), testing
/// each protected group at its target. The side condition
/// `(1+eps) * majority_rate ∈ [0, 1]` is enforced for tested groups.
pub fn slack_report<T: Prob>(
    groups: &GroupSet,
    rate: impl Fn(usize) -> Result<T>,
    targets: &EpsTargets<T>,
) -> Result<SlackReport<T>> {
    let maj = rate(groups.majority())?;
    let mut rows = Vec::new();
    for g in groups.protected() {
        let label = groups.label(g);
        let slack = slack_from_rates(rate(g)?, &maj, label)?;
        let tested_eps = targets.for_group(label);
        let verdict = match &tested_eps {
            None => None,
            Some(eps) => {
                let scaled = (one::<T>() + eps) * &maj;
                if !(scaled.at_least(&zero()) && one::<T>().at_least(&scaled)) {
                    return Err(Error::InfeasibleEpsilon {
                        group: label.to_string(),
                        eps: eps.to_f64(),
                        scaled: scaled.to_f64(),
                    });
                }
                Some(if slack.at_least(eps) {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                })
            }
        };
        rows.push(SlackRow {
            group: label.to_string(),
            slack,
            tested_eps,
            verdict,
        });
    }
    Ok(SlackReport { rows })
}

/// Tests `(1+eps_t)`-equal opportunity of `predictor` for every protected group.
pub fn check_eps_eo<T: Prob>(
    dist: &OutcomeDistribution<T>,
    predictor: Predictor,
    truth: Truth,
    eps: &EpsTargets<T>,
) -> Result<SlackReport<T>> {
    slack_report(
        &dist.groups,
        |g| dist.true_positive_rate(predictor, truth, g),
        eps,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hiring::HiringScenario;
    use crate::scalar::{int, ratio};

    fn cell(group: usize, x: u8, y: u8, xhat: u8, yhat: u8) -> Cell {
        Cell {
            group,
            x: x == 1,
            y: y == 1,
            xhat: xhat == 1,
            yhat: yhat == 1,
        }
    }

    /// Two groups, everyone qualified, given true-positive rates for `pred`.
    fn with_rates(
        pred: Predictor,
        majority: Rational,
        minority: Rational,
    ) -> OutcomeDistribution<Rational> {
        let mut cells = Vec::new();
        for (g, rate) in [(0, majority), (1, minority)] {
            let half = ratio(1, 2);
            let (pos, neg) = match pred {
                Predictor::XHat => (cell(g, 1, 1, 1, 0), cell(g, 1, 1, 0, 0)),
                Predictor::YHat => (cell(g, 1, 1, 1, 1), cell(g, 1, 1, 1, 0)),
            };
            cells.push((pos, &half * &rate));
            cells.push((neg, &half * (int(1) - &rate)));
        }
        OutcomeDistribution::new(GroupSet::binary(), cells).unwrap()
    }

    #[test]
    fn uniform_rate_is_one_half() {
        let d = OutcomeDistribution::<Rational>::uniform(GroupSet::binary());
        assert_eq!(
            d.conditional_rate(|c| c.yhat, |c| c.y).unwrap(),
            ratio(1, 2)
        );
        let d = OutcomeDistribution::<f64>::uniform(GroupSet::binary());
        assert_eq!(d.conditional_rate(|c| c.yhat, |c| c.y).unwrap(), 0.5);
    }

    #[test]
    fn point_mass_rate_is_one() {
        let d =
            OutcomeDistribution::new(GroupSet::binary(), [(cell(1, 1, 1, 1, 1), int(1))]).unwrap();
        assert_eq!(d.conditional_rate(|c| c.yhat, |c| c.y).unwrap(), int(1));
    }

    #[test]
    fn hand_arithmetic_rate() {
        // Pr{yhat=1, y=1, a=0} = 0.06 and Pr{y=1, a=0} = 0.24.
        let d = OutcomeDistribution::new(
            GroupSet::binary(),
            [
                (cell(0, 0, 1, 1, 1), ratio(6, 100)),
                (cell(0, 0, 1, 0, 0), ratio(18, 100)),
                (cell(1, 1, 1, 1, 1), ratio(76, 100)),
            ],
        )
        .unwrap();
        let r = d
            .conditional_rate(|c| c.yhat, |c| c.y && c.group == 0)
            .unwrap();
        assert_eq!(r, ratio(6, 100) / ratio(24, 100));
        assert_eq!(r, ratio(1, 4));
    }

    #[test]
    fn zero_mass_condition_errors() {
        let d =
            OutcomeDistribution::new(GroupSet::binary(), [(cell(0, 1, 1, 1, 1), int(1))]).unwrap();
        assert!(matches!(
            d.conditional_rate(|c| c.yhat, |c| c.group == 1),
            Err(Error::UndefinedConditional { .. })
        ));
        assert!(matches!(
            epsilon_slack(&d, Predictor::YHat, Truth::Y, "1"),
            Err(Error::UndefinedConditional { .. })
        ));
    }

    #[test]
    fn rejects_bad_tables() {
        let g = GroupSet::binary();
        assert!(OutcomeDistribution::new(g.clone(), [(cell(0, 1, 1, 1, 1), ratio(1, 2))]).is_err());
        assert!(OutcomeDistribution::new(
            g.clone(),
            [
                (cell(0, 1, 1, 1, 1), int(2)),
                (cell(1, 1, 1, 1, 1), int(-1))
            ]
        )
        .is_err());
        assert!(OutcomeDistribution::new(
            g.clone(),
            [(cell(0, 1, 1, 1, 1), int(1)), (cell(0, 1, 1, 1, 1), int(0))]
        )
        .is_err());
        assert!(OutcomeDistribution::new(g.clone(), [(cell(2, 1, 1, 1, 1), int(1))]).is_err());
        assert!(OutcomeDistribution::<f64>::from_weights(g, []).is_err());
    }

    #[test]
    fn slack_examples() {
        let d = with_rates(Predictor::YHat, ratio(1, 4), ratio(3, 4));
        assert_eq!(
            epsilon_slack(&d, Predictor::YHat, Truth::Y, "1").unwrap(),
            int(2)
        );
        let d = with_rates(Predictor::YHat, ratio(2, 5), ratio(2, 5));
        assert_eq!(
            epsilon_slack(&d, Predictor::YHat, Truth::Y, "1").unwrap(),
            int(0)
        );
        let d = with_rates(Predictor::XHat, ratio(3, 10), ratio(1, 10));
        assert_eq!(
            epsilon_slack(&d, Predictor::XHat, Truth::X, "1").unwrap(),
            ratio(-2, 3)
        );
        let f = d.to_f64();
        assert!(
            (epsilon_slack(&f, Predictor::XHat, Truth::X, "1").unwrap() + 2.0 / 3.0).abs() < 1e-12
        );
    }

    #[test]
    fn majority_rate_zero_is_infeasible() {
        let d = with_rates(Predictor::YHat, int(0), ratio(1, 2));
        assert!(matches!(
            epsilon_slack(&d, Predictor::YHat, Truth::Y, "1"),
            Err(Error::InfeasibleSlack { .. })
        ));
    }

    #[test]
    fn check_verdicts_and_side_condition() {
        let d = with_rates(Predictor::YHat, ratio(1, 4), ratio(3, 4));
        let r = check_eps_eo(&d, Predictor::YHat, Truth::Y, &EpsTargets::Uniform(int(2))).unwrap();
        assert_eq!(r.rows[0].verdict, Some(Verdict::Pass));
        let r = check_eps_eo(
            &d,
            Predictor::YHat,
            Truth::Y,
            &EpsTargets::Uniform(ratio(21, 10)),
        )
        .unwrap();
        assert_eq!(r.rows[0].verdict, Some(Verdict::Fail));
        assert!(r.any_fail());

        let d = with_rates(Predictor::YHat, ratio(2, 5), ratio(2, 5));
        let r = check_eps_eo(&d, Predictor::YHat, Truth::Y, &EpsTargets::Uniform(int(0))).unwrap();
        assert_eq!(r.rows[0].verdict, Some(Verdict::Pass));

        let d = with_rates(Predictor::YHat, ratio(6, 10), ratio(9, 10));
        let err = check_eps_eo(
            &d,
            Predictor::YHat,
            Truth::Y,
            &EpsTargets::Uniform(ratio(9, 10)),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InfeasibleEpsilon { ref group, .. } if group == "1"));
    }

    #[test]
    fn multi_class_targets() {
        let groups = GroupSet::new(["a", "b", "m"], "m").unwrap();
        let rates = [ratio(1, 2), ratio(1, 5), ratio(1, 4)];
        let cells = (0..3).flat_map(|g| {
            let r = rates[g].clone();
            [
                (cell(g, 1, 1, 1, 1), ratio(1, 3) * &r),
                (cell(g, 1, 1, 1, 0), ratio(1, 3) * (int(1) - &r)),
            ]
        });
        let d = OutcomeDistribution::new(groups, cells).unwrap();
        let targets = EpsTargets::PerGroup(vec![("a".into(), int(1)), ("b".into(), ratio(-1, 5))]);
        let r = check_eps_eo(&d, Predictor::YHat, Truth::Y, &targets).unwrap();
        assert_eq!(r.row("a").unwrap().slack, int(1));
        assert_eq!(r.row("a").unwrap().verdict, Some(Verdict::Pass));
        assert_eq!(r.row("b").unwrap().slack, ratio(-1, 5));
        assert_eq!(r.row("b").unwrap().verdict, Some(Verdict::Pass));
        assert!(r.row("m").is_none());
    }

    #[test]
    fn table1_stage_slacks() {
        let case = |n| {
            HiringScenario::table1_case(n)
                .unwrap()
                .outcome_distribution()
                .unwrap()
        };
        assert_eq!(
            stage2_conditional_slack(&case(1), "minority").unwrap(),
            int(0)
        );
        assert_eq!(
            stage2_conditional_slack(&case(2), "minority").unwrap(),
            int(2)
        );
        assert_eq!(stage1_cross_slack(&case(1), "minority").unwrap(), int(2));
        assert_eq!(
            stage1_cross_slack(&case(4), "minority").unwrap(),
            ratio(-2, 3)
        );
    }

    #[test]
    fn stage2_slack_is_zero_when_yhat_is_xhat_and_y() {
        let mut w = Vec::new();
        for i in 0..32 {
            let mut c = Cell::from_index(i);
            c.yhat = c.xhat && c.y;
            w.push((c, int(i as i64 % 5 + 1)));
        }
        w.sort_by_key(|(c, _)| c.index());
        w.dedup_by_key(|(c, _)| c.index());
        let d = OutcomeDistribution::from_weights(GroupSet::binary(), w).unwrap();
        assert_eq!(stage2_conditional_slack(&d, "1").unwrap(), int(0));
    }

    #[test]
    fn cross_slack_zero_when_xhat_independent() {
        // xhat ~ Bernoulli(1/3) independent of (a, x, y).
        let cells = (0..32).map(|i| {
            let c = Cell::from_index(i);
            let base = int(1 + (c.group as i64) * 2 + i64::from(c.x) + 3 * i64::from(c.y));
            let w = if c.yhat {
                int(0)
            } else if c.xhat {
                base
            } else {
                base * int(2)
            };
            (c, w)
        });
        let d = OutcomeDistribution::from_weights(GroupSet::binary(), cells).unwrap();
        assert_eq!(stage1_cross_slack(&d, "1").unwrap(), int(0));
    }

    #[test]
    fn decoupling_ratio_is_one_when_x_equals_y() {
        let cells = (0..32).filter_map(|i| {
            let c = Cell::from_index(i);
            (c.x == c.y).then(|| (c, int(i as i64 + 1)))
        });
        let d = OutcomeDistribution::from_weights(GroupSet::binary(), cells).unwrap();
        assert_eq!(decoupling_ratio(&d, "0").unwrap(), int(1));
        assert_eq!(decoupling_ratio(&d, "1").unwrap(), int(1));
    }

    #[test]
    fn decoupling_ratio_by_enumeration() {
        // x ⫫ y within each group; xhat depends only on x.
        let px = [ratio(3, 10), ratio(7, 10)];
        let py = [ratio(1, 2), ratio(1, 5)];
        let q = [[ratio(1, 10), ratio(9, 10)], [ratio(2, 5), ratio(3, 5)]]; // Pr{xhat=1 | x} per group
        let mut cells = Vec::new();
        for g in 0..2 {
            for x in 0..2u8 {
                for y in 0..2u8 {
                    for xh in 0..2u8 {
                        let fx = if x == 1 {
                            px[g].clone()
                        } else {
                            int(1) - &px[g]
                        };
                        let fy = if y == 1 {
                            py[g].clone()
                        } else {
                            int(1) - &py[g]
                        };
                        let fq = if xh == 1 {
                            q[g][x as usize].clone()
                        } else {
                            int(1) - &q[g][x as usize]
                        };
                        cells.push((cell(g, x, y, xh, 0), ratio(1, 2) * fx * fy * fq));
                    }
                }
            }
        }
        let d = OutcomeDistribution::new(GroupSet::binary(), cells).unwrap();
        for g in 0..2usize {
            // Brute-force sums over all 32 cells.
            let (mut num_x, mut den_x, mut num_y, mut den_y) = (int(0), int(0), int(0), int(0));
            for i in 0..32 {
                let c = Cell::from_index(i);
                let m = d.mass(&c).clone();
                if c.group != g {
                    continue;
                }
                if c.x {
                    den_x += &m;
                    if c.xhat {
                        num_x += &m;
                    }
                }
                if c.y {
                    den_y += &m;
                    if c.xhat {
                        num_y += &m;
                    }
                }
            }
            let oracle = (num_x / den_x) / (num_y / den_y);
            assert_eq!(decoupling_ratio(&d, &g.to_string()).unwrap(), oracle);
        }
        // group 0: Pr{xhat|x=1}=0.9, Pr{xhat}=0.3*0.9+0.7*0.1=0.34
        assert_eq!(decoupling_ratio(&d, "0").unwrap(), ratio(90, 34));
    }

    #[test]
    fn decoupling_ratio_two() {
        // group 0: Pr{xhat=1 | x=1} = 8/10, Pr{xhat=1 | y=1} = 2/5.
        let cells = [
            (cell(0, 1, 1, 1, 0), int(2)),
            (cell(0, 1, 1, 0, 0), int(1)),
            (cell(0, 1, 0, 1, 0), int(6)),
            (cell(0, 1, 0, 0, 0), int(1)),
            (cell(0, 0, 1, 0, 0), int(2)),
            (cell(1, 1, 1, 1, 1), int(8)),
        ];
        let d = OutcomeDistribution::from_weights(GroupSet::binary(), cells).unwrap();
        assert_eq!(
            d.true_positive_rate(Predictor::XHat, Truth::X, 0).unwrap(),
            ratio(8, 10)
        );
        assert_eq!(
            d.true_positive_rate(Predictor::XHat, Truth::Y, 0).unwrap(),
            ratio(4, 10)
        );
        assert_eq!(decoupling_ratio(&d, "0").unwrap(), int(2));
    }

    #[test]
    fn zero_denominator_ratio() {
        let cells = [(cell(0, 1, 1, 0, 0), int(1)), (cell(1, 1, 1, 1, 1), int(1))];
        let d = OutcomeDistribution::from_weights(GroupSet::binary(), cells).unwrap();
        assert!(matches!(
            decoupling_ratio(&d, "0"),
            Err(Error::UndefinedRatio { .. })
        ));
    }
}
