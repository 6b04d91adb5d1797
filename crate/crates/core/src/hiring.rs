//! Two-stage hiring toy model: interview, then hire.
//!
//! Rates are solved so that the stage constraints hold with equality:
//!
//! ```text
//! p_min = (1 + eps) * p_maj,    n_maj * p_maj + n_min * p_min = n_interview
//! h_min = (1 + delta) * h_maj,  I_maj * h_maj + I_min * h_min = n_hire
//! ```
//!
//! where `I_g = n_g * p_g` are the expected interview pools. Group sizes are
//! scaled by the qualification rate first; unqualified applicants are never
//! selected. Everything analytic is exact rational arithmetic.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::metrics::{Cell, OutcomeDistribution};
use crate::pipeline::GroupSet;
use crate::rng::{self, Domain};
use crate::scalar::{format_exact, ratio, Prob, Rational};

pub const MAJORITY: usize = 0;
pub const MINORITY: usize = 1;
pub const GROUP_LABELS: [&str; 2] = ["majority", "minority"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SamplingModel {
    /// Every applicant is selected independently at its group's solved rate.
    #[default]
    Bernoulli,
    /// Exactly `n_interview` interviews and `n_hire` hires per trial.
    FixedQuota,
}

impl SamplingModel {
    pub fn as_str(self) -> &'static str {
        match self {
            SamplingModel::Bernoulli => "bernoulli",
            SamplingModel::FixedQuota => "quota",
        }
    }
}

impl FromStr for SamplingModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bernoulli" => Ok(SamplingModel::Bernoulli),
            "quota" | "fixed_quota" | "fixed-quota" => Ok(SamplingModel::FixedQuota),
            other => Err(Error::InvalidScenario(format!(
                "unknown sampling model `{other}`"
            ))),
        }
    }
}

impl fmt::Display for SamplingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HiringScenario {
    pub n_majority: u64,
    pub n_minority: u64,
    pub n_interview: u64,
    pub n_hire: u64,
    pub eps: Rational,
    pub delta: Rational,
    pub qualification_rate: Rational,
    pub model: SamplingModel,
}

impl HiringScenario {
    pub fn new(
        n_majority: u64,
        n_minority: u64,
        n_interview: u64,
        n_hire: u64,
        eps: Rational,
        delta: Rational,
    ) -> Result<Self> {
        let s = HiringScenario {
            n_majority,
            n_minority,
            n_interview,
            n_hire,
            eps,
            delta,
            qualification_rate: Rational::one(),
            model: SamplingModel::Bernoulli,
        };
        s.validate()?;
        Ok(s)
    }

    /// 90 majority and 10 minority applicants, 20 interviews, 2 hires.
    /// Cases: 1 = (2, 0), 2 = (0, 2), 3 = (2, -2/3), 4 = (-2/3, 2).
    pub fn table1_case(case: u8) -> Result<Self> {
        let (eps, delta) = match case {
            1 => (ratio(2, 1), ratio(0, 1)),
            2 => (ratio(0, 1), ratio(2, 1)),
            3 => (ratio(2, 1), ratio(-2, 3)),
            4 => (ratio(-2, 3), ratio(2, 1)),
            _ => return Err(Error::InvalidScenario(format!("no table case {case}"))),
        };
        HiringScenario::new(90, 10, 20, 2, eps, delta)
    }

    pub fn with_model(mut self, model: SamplingModel) -> Self {
        self.model = model;
        self
    }

    pub fn with_qualification_rate(mut self, q: Rational) -> Result<Self> {
        self.qualification_rate = q;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let minus_one = -Rational::one();
        if self.eps <= minus_one || self.delta <= minus_one {
            return Err(Error::InvalidScenario(
                "eps and delta must exceed -1".into(),
            ));
        }
        let q = &self.qualification_rate;
        if !q.is_positive() || *q > Rational::one() {
            return Err(Error::InvalidScenario(format!(
                "qualification_rate {} outside (0, 1]",
                format_exact(q)
            )));
        }
        if self.n_interview > self.n_majority + self.n_minority {
            return Err(Error::InvalidScenario(format!(
                "n_interview {} exceeds the {} applicants",
                self.n_interview,
                self.n_majority + self.n_minority
            )));
        }
        if self.n_hire > self.n_interview {
            return Err(Error::InvalidScenario(format!(
                "n_hire {} exceeds n_interview {}",
                self.n_hire, self.n_interview
            )));
        }
        Ok(())
    }

    /// Qualified applicants per group, `n_g * q`.
    pub fn effective_pools(&self) -> [Rational; 2] {
        [self.n_majority, self.n_minority].map(|n| count(n) * &self.qualification_rate)
    }

    /// Exact `(A, X, Y, X̂, Ŷ)` law of one applicant drawn uniformly from
    /// the pool, with `X = Y = qualified` and the solved selection rates.
    pub fn outcome_distribution(&self) -> Result<OutcomeDistribution<Rational>> {
        let rates = solve_rates(self)?;
        let total = count(self.n_majority + self.n_minority);
        let groups = GroupSet::new(GROUP_LABELS, GROUP_LABELS[MAJORITY])?;
        let q = &self.qualification_rate;
        let mut cells = Vec::new();
        for (g, n) in [self.n_majority, self.n_minority].into_iter().enumerate() {
            let share = count(n) / &total;
            let (p, h) = (&rates.interview[g], &rates.hire[g]);
            let cell = |qual: bool, xhat: bool, yhat: bool| Cell {
                group: g,
                x: qual,
                y: qual,
                xhat,
                yhat,
            };
            let qualified = &share * q;
            cells.push((cell(false, false, false), &share * (Rational::one() - q)));
            cells.push((cell(true, false, false), &qualified * (Rational::one() - p)));
            cells.push((
                cell(true, true, false),
                &qualified * p * (Rational::one() - h),
            ));
            cells.push((cell(true, true, true), &qualified * p * h));
        }
        OutcomeDistribution::new(groups, cells)
    }
}

fn count(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Per-group selection probabilities, indexed by [`MAJORITY`] / [`MINORITY`].
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionRates {
    /// Interview probability of a qualified applicant.
    pub interview: [Rational; 2],
    /// Hire probability of an interviewed applicant.
    pub hire: [Rational; 2],
}

fn boosted_split(
    pools: &[Rational; 2],
    boost: &Rational,
    quota: u64,
    stage: &str,
) -> Result<[Rational; 2]> {
    let one_plus = Rational::one() + boost;
    let weight = &pools[MAJORITY] + &pools[MINORITY] * &one_plus;
    if weight.is_zero() {
        if quota == 0 {
            return Ok([Rational::zero(), Rational::zero()]);
        }
        return Err(Error::InfeasibleScenario(format!(
            "{stage} quota {quota} but the {stage} pool is empty"
        )));
    }
    let base = count(quota) / weight;
    Ok([base.clone(), base * one_plus])
}

fn check_rate(rate: &Rational, pool: &Rational, what: &str) -> Result<()> {
    if pool.is_positive() && *rate > Rational::one() {
        return Err(Error::InfeasibleScenario(format!(
            "{what} rate {} exceeds 1",
            format_exact(rate)
        )));
    }
    Ok(())
}

pub fn solve_rates(scenario: &HiringScenario) -> Result<SelectionRates> {
    scenario.validate()?;
    let pools = scenario.effective_pools();
    let interview = boosted_split(&pools, &scenario.eps, scenario.n_interview, "interview")?;
    check_rate(&interview[MAJORITY], &pools[MAJORITY], "majority interview")?;
    check_rate(&interview[MINORITY], &pools[MINORITY], "minority interview")?;
    let interviewed = [
        &pools[MAJORITY] * &interview[MAJORITY],
        &pools[MINORITY] * &interview[MINORITY],
    ];
    let hire = boosted_split(&interviewed, &scenario.delta, scenario.n_hire, "hire")?;
    check_rate(&hire[MAJORITY], &interviewed[MAJORITY], "majority hire")?;
    check_rate(&hire[MINORITY], &interviewed[MINORITY], "minority hire")?;
    Ok(SelectionRates { interview, hire })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpectedOutcome {
    pub interviewed: [Rational; 2],
    pub hired: [Rational; 2],
}

pub fn expected_counts(scenario: &HiringScenario) -> Result<ExpectedOutcome> {
    let rates = solve_rates(scenario)?;
    let pools = scenario.effective_pools();
    let interviewed = [0, 1].map(|g| &pools[g] * &rates.interview[g]);
    let hired = [0, 1].map(|g| &interviewed[g] * &rates.hire[g]);
    Ok(ExpectedOutcome { interviewed, hired })
}

/// `(group, stage, expected_count)` rows; stage is `interviewed` or `hired`.
pub fn figure_rows(expected: &ExpectedOutcome) -> Vec<(&'static str, &'static str, Rational)> {
    let mut rows = Vec::with_capacity(4);
    for g in [MAJORITY, MINORITY] {
        rows.push((
            GROUP_LABELS[g],
            "interviewed",
            expected.interviewed[g].clone(),
        ));
        rows.push((GROUP_LABELS[g], "hired", expected.hired[g].clone()));
    }
    rows
}

/// Sample moments of an integer count over trials.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountStats {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub se_mean: f64,
    /// Large-sample standard error of the sample variance.
    pub se_variance: f64,
}

/// Raw power sums; integer so merging is exact and order-independent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct PowerSums([u128; 5]);

impl PowerSums {
    fn push(&mut self, c: u64) {
        let c = u128::from(c);
        let mut p = 1u128;
        for s in &mut self.0 {
            *s += p;
            p *= c;
        }
    }

    fn merge(mut self, other: PowerSums) -> PowerSums {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
        self
    }

    fn stats(&self) -> CountStats {
        let n = self.0[0] as f64;
        if n == 0.0 {
            return CountStats {
                mean: f64::NAN,
                variance: f64::NAN,
                se_mean: f64::NAN,
                se_variance: f64::NAN,
            };
        }
        let [_, s1, s2, s3, s4] = self.0.map(|s| s as f64);
        let mean = s1 / n;
        let m2 = (s2 / n - mean * mean).max(0.0);
        let m4 = (s4 / n - 4.0 * mean * s3 / n + 6.0 * mean * mean * s2 / n - 3.0 * mean.powi(4))
            .max(0.0);
        if n < 2.0 {
            return CountStats {
                mean,
                variance: 0.0,
                se_mean: f64::NAN,
                se_variance: f64::NAN,
            };
        }
        let variance = m2 * n / (n - 1.0);
        let se_mean = (variance / n).sqrt();
        let se_variance = if n > 3.0 {
            ((m4 - variance * variance * (n - 3.0) / (n - 1.0)) / n)
                .max(0.0)
                .sqrt()
        } else {
            f64::NAN
        };
        CountStats {
            mean,
            variance,
            se_mean,
            se_variance,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct TrialSums {
    interviewed: [PowerSums; 2],
    hired: [PowerSums; 2],
}

impl TrialSums {
    fn merge(self, o: TrialSums) -> TrialSums {
        TrialSums {
            interviewed: [0, 1].map(|g| self.interviewed[g].merge(o.interviewed[g])),
            hired: [0, 1].map(|g| self.hired[g].merge(o.hired[g])),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloSummary {
    pub model: SamplingModel,
    pub trials: u64,
    pub seed: u64,
    pub interviewed: [CountStats; 2],
    pub hired: [CountStats; 2],
}

struct TrialPlan {
    n: [u64; 2],
    q: f64,
    interview: [f64; 2],
    hire: [f64; 2],
    stage_weights: [[f64; 2]; 2],
    quotas: [u64; 2],
}

/// Simulates `trials` independent hiring rounds. Trial `i` draws from its
/// own stream, so the summary is identical for any execution mode.
pub fn monte_carlo(
    scenario: &HiringScenario,
    trials: u64,
    seed: u64,
    exec: Execution,
) -> Result<MonteCarloSummary> {
    if trials == 0 {
        return Err(Error::InvalidScenario("trials must be at least 1".into()));
    }
    let rates = solve_rates(scenario)?;
    let plan = TrialPlan {
        n: [scenario.n_majority, scenario.n_minority],
        q: scenario.qualification_rate.to_f64(),
        interview: rates.interview.clone().map(|r| r.to_f64().min(1.0)),
        hire: rates.hire.clone().map(|r| r.to_f64().min(1.0)),
        stage_weights: [
            [1.0, (Rational::one() + &scenario.eps).to_f64()],
            [1.0, (Rational::one() + &scenario.delta).to_f64()],
        ],
        quotas: [scenario.n_interview, scenario.n_hire],
    };
    let model = scenario.model;
    let sums = exec.fold(
        usize::try_from(trials).map_err(|_| Error::InvalidScenario("too many trials".into()))?,
        TrialSums::default(),
        |acc, i| {
            let mut rng = rng::stream(seed, Domain::HiringTrials, i as u64);
            let (interviewed, hired) = match model {
                SamplingModel::Bernoulli => bernoulli_trial(&plan, &mut rng),
                SamplingModel::FixedQuota => quota_trial(&plan, &mut rng),
            };
            for g in 0..2 {
                acc.interviewed[g].push(interviewed[g]);
                acc.hired[g].push(hired[g]);
            }
        },
        TrialSums::merge,
    );
    Ok(MonteCarloSummary {
        model,
        trials,
        seed,
        interviewed: sums.interviewed.map(|s| s.stats()),
        hired: sums.hired.map(|s| s.stats()),
    })
}

fn qualified_count(n: u64, q: f64, rng: &mut ChaCha8Rng) -> u64 {
    if q >= 1.0 {
        n
    } else {
        (0..n).filter(|_| rng.random_bool(q)).count() as u64
    }
}

fn bernoulli_trial(plan: &TrialPlan, rng: &mut ChaCha8Rng) -> ([u64; 2], [u64; 2]) {
    let mut interviewed = [0u64; 2];
    let mut hired = [0u64; 2];
    for g in 0..2 {
        for _ in 0..plan.n[g] {
            if plan.q < 1.0 && !rng.random_bool(plan.q) {
                continue;
            }
            if rng.random_bool(plan.interview[g]) {
                interviewed[g] += 1;
                if rng.random_bool(plan.hire[g]) {
                    hired[g] += 1;
                }
            }
        }
    }
    (interviewed, hired)
}

fn quota_trial(plan: &TrialPlan, rng: &mut ChaCha8Rng) -> ([u64; 2], [u64; 2]) {
    let qualified = [0, 1].map(|g| qualified_count(plan.n[g], plan.q, rng));
    let interviewed = systematic_select(qualified, plan.stage_weights[0], plan.quotas[0], rng);
    let hired = systematic_select(interviewed, plan.stage_weights[1], plan.quotas[1], rng);
    (interviewed, hired)
}

const SNAP: f64 = 1e-9;

/// Systematic sampling of exactly `quota` units (or the whole pool if it is
/// smaller) from two groups, with per-unit inclusion probability
/// proportional to the group weight and capped at 1.
fn systematic_select(
    pools: [u64; 2],
    weights: [f64; 2],
    quota: u64,
    rng: &mut ChaCha8Rng,
) -> [u64; 2] {
    let total = pools[0] + pools[1];
    if quota >= total {
        return pools;
    }
    let quota_f = quota as f64;
    let mut inclusion = [0.0f64; 2];
    let weight_sum = pools[0] as f64 * weights[0] + pools[1] as f64 * weights[1];
    for g in 0..2 {
        inclusion[g] = quota_f * weights[g] / weight_sum;
    }
    // Redistribute once if a group saturates; with two groups one pass suffices.
    for g in 0..2 {
        if inclusion[g] > 1.0 {
            let other = 1 - g;
            inclusion[g] = 1.0;
            inclusion[other] = (quota_f - pools[g] as f64) / pools[other] as f64;
        }
    }
    let mut first_len = pools[0] as f64 * inclusion[0];
    let nearest = first_len.round();
    if (first_len - nearest).abs() < SNAP {
        first_len = nearest;
    }
    let u: f64 = rng.random();
    let first = if first_len - u > 0.0 {
        (first_len - u).ceil() as u64
    } else {
        0
    };
    let first = first.min(pools[0]).max(quota.saturating_sub(pools[1]));
    [first, quota - first]
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityReport {
    /// Expected minority interviews (capped at the qualified pool if stage 1 is infeasible).
    pub expected_minority_interviewed: Rational,
    /// Minority hires the delta target asks for, given the interview pools.
    pub requested_minority_hires: Rational,
    /// Most minority hires achievable: hiring every interviewed minority member.
    pub max_minority_hires: Rational,
    pub interview_feasible: bool,
    pub hire_feasible: bool,
    /// At most two expected minority interviews.
    pub small_pool: bool,
    pub binding: Option<String>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.interview_feasible && self.hire_feasible
    }
}

pub fn feasibility_check(scenario: &HiringScenario) -> FeasibilityReport {
    let pools = scenario.effective_pools();
    let mut binding = None;
    let (interviewed, interview_feasible) =
        match boosted_split(&pools, &scenario.eps, scenario.n_interview, "interview") {
            Ok(rates) => {
                let over = (0..2).find(|&g| pools[g].is_positive() && rates[g] > Rational::one());
                match over {
                    None => ([0, 1].map(|g| &pools[g] * &rates[g]), true),
                    Some(g) => {
                        binding = Some(format!(
                            "{} interview rate {} exceeds 1",
                            GROUP_LABELS[g],
                            format_exact(&rates[g])
                        ));
                        // Saturate the binding group; the rest of the quota goes to the other.
                        let mut capped = pools.clone();
                        let rest = count(scenario.n_interview) - &pools[g];
                        capped[1 - g] = if rest < pools[1 - g] {
                            rest
                        } else {
                            pools[1 - g].clone()
                        };
                        (capped, false)
                    }
                }
            }
            Err(e) => {
                binding = Some(e.to_string());
                ([Rational::zero(), Rational::zero()], false)
            }
        };
    let one_plus = Rational::one() + &scenario.delta;
    let weight = &interviewed[MAJORITY] + &interviewed[MINORITY] * &one_plus;
    let requested = if weight.is_zero() {
        Rational::zero()
    } else {
        count(scenario.n_hire) * &interviewed[MINORITY] * &one_plus / &weight
    };
    let requested_majority = count(scenario.n_hire) - &requested;
    let hire_feasible = requested <= interviewed[MINORITY]
        && requested_majority <= interviewed[MAJORITY]
        && (scenario.n_hire == 0 || weight.is_positive());
    if !hire_feasible && binding.is_none() {
        binding = Some(if requested > interviewed[MINORITY] {
            format!(
                "delta target asks for {} minority hires but only {} minority applicants are interviewed",
                format_exact(&requested),
                format_exact(&interviewed[MINORITY])
            )
        } else {
            "hire quota exceeds the interview pool".to_string()
        });
    }
    FeasibilityReport {
        small_pool: interviewed[MINORITY] <= ratio(2, 1),
        expected_minority_interviewed: interviewed[MINORITY].clone(),
        max_minority_hires: interviewed[MINORITY].clone(),
        requested_minority_hires: requested,
        interview_feasible,
        hire_feasible,
        binding,
    }
}
