//! Composition of per-stage slacks in a two-stage filtering pipeline.
//!
//! With `eps` the stage-1 slack measured against the final truth `Y`,
//! `delta` the stage-2 slack conditioned on passing stage 1, and `Ŷ = 1`
//! implying `X̂ = 1`, the pipeline slack `alpha` of `Ŷ` satisfies
//! `alpha >= (1+eps)(1+delta) - 1`.
//!
//! The bound needs the stage-1 slack against `Y`. Measured against the
//! stage's own truth `X` instead, both stages can look perfectly fair while
//! the pipeline is not; [`search_counterexample`] finds such tables.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::exec::Execution;
use crate::metrics::{
    epsilon_slack, stage1_cross_slack, stage2_conditional_slack, Cell, OutcomeDistribution,
    Predictor, Truth,
};
use crate::pipeline::GroupSet;
use crate::rng::{self, Domain};
use crate::scalar::{one, ratio, Prob, Rational};

/// `(1+eps)(1+delta) - 1`.
pub fn compose_slack<T: Prob>(eps: &T, delta: &T) -> T {
    (one::<T>() + eps) * &(one::<T>() + delta) - one::<T>()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompositionReport<T> {
    /// Stage-1 slack being tested (the observed one unless given).
    pub eps: T,
    pub delta: T,
    pub alpha: T,
    pub bound: T,
    pub observed_eps: T,
    pub observed_delta: T,
    /// Stage-1 bound, stage-2 bound, and `Ŷ=1 ⟹ X̂=1`.
    pub assumptions: [bool; 3],
    /// `Pr{Ŷ=1, X̂=0}`; zero iff assumption 3 holds.
    pub offending_mass: T,
    /// `alpha >= bound`; present only when all assumptions hold.
    pub verdict: Option<bool>,
}

impl<T: Prob> CompositionReport<T> {
    /// `alpha - bound`.
    pub fn gap(&self) -> T {
        self.alpha.clone() - self.bound.clone()
    }
}

/// Cells with `Ŷ = 1, X̂ = 0` and positive mass.
pub fn assumption3_violations<T: Prob>(dist: &OutcomeDistribution<T>) -> Vec<(Cell, T)> {
    dist.cells()
        .filter(|(c, m)| c.yhat && !c.xhat && m.is_positive())
        .map(|(c, m)| (c, m.clone()))
        .collect()
}

/// Checks the composition bound with `eps` and `delta` set to the observed slacks.
pub fn verify_composition<T: Prob>(
    dist: &OutcomeDistribution<T>,
    group: &str,
) -> Result<CompositionReport<T>> {
    let eps = stage1_cross_slack(dist, group)?;
    let delta = stage2_conditional_slack(dist, group)?;
    verify_composition_at(dist, group, eps, delta)
}

/// Checks the composition bound for tested slacks `eps`, `delta`; the first
/// two assumptions hold when the observed slacks are at least these.
pub fn verify_composition_at<T: Prob>(
    dist: &OutcomeDistribution<T>,
    group: &str,
    eps: T,
    delta: T,
) -> Result<CompositionReport<T>> {
    let observed_eps = stage1_cross_slack(dist, group)?;
    let observed_delta = stage2_conditional_slack(dist, group)?;
    let alpha = epsilon_slack(dist, Predictor::YHat, Truth::Y, group)?;
    let offending_mass = dist.probability(|c| c.yhat && !c.xhat);
    let assumptions = [
        observed_eps.at_least(&eps),
        observed_delta.at_least(&delta),
        offending_mass.is_zero(),
    ];
    let bound = compose_slack(&eps, &delta);
    let verdict = assumptions
        .iter()
        .all(|&a| a)
        .then(|| alpha.at_least(&bound));
    Ok(CompositionReport {
        eps,
        delta,
        alpha,
        bound,
        observed_eps,
        observed_delta,
        assumptions,
        offending_mass,
        verdict,
    })
}

fn rational(n: u64, d: u64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Random exact two-group filtering distribution.
///
/// Cell weights are integers, uniform on `1..=1000` and zero with
/// probability 1/10, normalized over the 32 cells. Mass on `(Ŷ=1, X̂=0)`
/// is then moved to the matching `(Ŷ=0, X̂=0)` cell so that `Ŷ=1 ⟹ X̂=1`.
pub fn random_filtering_distribution(rng: &mut ChaCha8Rng) -> OutcomeDistribution<Rational> {
    let mut weights = [0u64; 32];
    for w in &mut weights {
        *w = if rng.random_bool(0.1) {
            0
        } else {
            rng.random_range(1..=1000)
        };
    }
    for i in 0..32 {
        let c = Cell::from_index(i);
        if c.yhat && !c.xhat {
            let target = Cell { yhat: false, ..c }.index();
            weights[target] += std::mem::take(&mut weights[i]);
        }
    }
    if weights.iter().all(|&w| w == 0) {
        weights[0] = 1;
    }
    let weights = weights.iter().map(|&w| rational(w, 1)).collect();
    OutcomeDistribution::from_weight_vec(GroupSet::binary(), weights)
        .expect("non-negative, non-zero weights")
}

/// Outcome of a randomized sweep of the composition bound.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TheoremSweep {
    /// Distributions whose slacks were all defined.
    pub checked: u64,
    /// Distributions with an undefined conditional or zero majority rate.
    pub skipped: u64,
    /// Checks with tested `eps, delta >= 0`.
    pub nonnegative: u64,
    /// Checks with a negative tested slack.
    pub negative: u64,
    pub nonnegative_violations: u64,
    pub negative_violations: u64,
    /// Checks at the observed slacks where `alpha` differed from the bound.
    pub inexact_at_observed: u64,
}

impl TheoremSweep {
    fn merge(mut self, o: TheoremSweep) -> TheoremSweep {
        self.checked += o.checked;
        self.skipped += o.skipped;
        self.nonnegative += o.nonnegative;
        self.negative += o.negative;
        self.nonnegative_violations += o.nonnegative_violations;
        self.negative_violations += o.negative_violations;
        self.inexact_at_observed += o.inexact_at_observed;
        self
    }
}

/// A tested slack no larger than the observed one: drawn from
/// `[0, observed]` when the observed slack is non-negative, else from
/// `(-1, observed]`.
fn tested_slack(observed: &Rational, rng: &mut ChaCha8Rng) -> Rational {
    let u = rational(rng.random_range(0..1000), 1000);
    let floor = if observed.is_negative() {
        -Rational::one()
    } else {
        Rational::zero()
    };
    observed - (observed - &floor) * u
}

/// Generates `trials` random filtering distributions and checks the bound
/// exactly, both at the observed slacks and at random smaller ones.
pub fn theorem_sweep(trials: u64, seed: u64, exec: Execution) -> TheoremSweep {
    exec.fold(
        trials as usize,
        TheoremSweep::default(),
        |acc, i| {
            let mut rng = rng::stream(seed, Domain::TheoremCheck, i as u64);
            let dist = random_filtering_distribution(&mut rng);
            let observed = match verify_composition(&dist, "1") {
                Ok(r) => r,
                Err(_) => {
                    acc.skipped += 1;
                    return;
                }
            };
            acc.checked += 1;
            if observed.verdict != Some(true) || observed.alpha != observed.bound {
                acc.inexact_at_observed += 1;
            }
            let eps = tested_slack(&observed.observed_eps, &mut rng);
            let delta = tested_slack(&observed.observed_delta, &mut rng);
            let nonnegative = !eps.is_negative() && !delta.is_negative();
            let report =
                verify_composition_at(&dist, "1", eps, delta).expect("slacks already defined");
            let violated = report.verdict != Some(true);
            if nonnegative {
                acc.nonnegative += 1;
                acc.nonnegative_violations += u64::from(violated);
            } else {
                acc.negative += 1;
                acc.negative_violations += u64::from(violated);
            }
        },
        TheoremSweep::merge,
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub seed: u64,
    pub trials: u64,
    /// Restrict to tables where stage-1 and final qualification coincide.
    pub x_equals_y: bool,
    /// Report a table only if its pipeline slack is strictly below this.
    pub alpha_below: Rational,
}

impl SearchConfig {
    pub fn new(seed: u64, trials: u64) -> Self {
        SearchConfig {
            seed,
            trials,
            x_equals_y: false,
            alpha_below: Rational::zero(),
        }
    }
}

/// A table where both stages look fair on their own terms but the pipeline is not.
#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub trial: u64,
    pub dist: OutcomeDistribution<Rational>,
    /// Stage-1 slack against its own truth `X`.
    pub naive_eps: Rational,
    pub delta: Rational,
    pub alpha: Rational,
}

fn pick(rng: &mut ChaCha8Rng, lo: u64, hi: u64) -> Rational {
    rational(rng.random_range(lo..=hi), 100)
}

/// One candidate: groups share `Pr{X̂=1 | X=1}` and `Pr{Ŷ=1 | X̂=1, Y=1}`
/// exactly, everything else random. `None` if the draw cannot meet the
/// shared stage-1 rate.
fn candidate(rng: &mut ChaCha8Rng, x_equals_y: bool) -> Option<OutcomeDistribution<Rational>> {
    let stage1_rate = pick(rng, 1, 99);
    let stage2_rate = pick(rng, 1, 99);
    let mut weights = vec![Rational::zero(); 32];
    for g in 0..2 {
        let group_weight = rational(rng.random_range(1..=10), 1);
        // Joint law of (x, y) within the group, indexed [x][y].
        let mut xy = [
            [Rational::zero(), Rational::zero()],
            [Rational::zero(), Rational::zero()],
        ];
        for (x, row) in xy.iter_mut().enumerate() {
            for (y, w) in row.iter_mut().enumerate() {
                if !x_equals_y || x == y {
                    *w = rational(rng.random_range(1..=100), 1);
                }
            }
        }
        // Pr{xhat = 1 | x, y}, indexed [x][y]; the x = 1 row averages to stage1_rate.
        let mut pass = [
            [pick(rng, 0, 100), pick(rng, 0, 100)],
            [Rational::zero(), Rational::zero()],
        ];
        let qualified = &xy[1][0] + &xy[1][1];
        if xy[1][0].is_zero() {
            pass[1][1] = stage1_rate.clone();
        } else {
            let both = pick(rng, 0, 100);
            let rest = (&stage1_rate * &qualified - &xy[1][1] * &both) / &xy[1][0];
            if rest.is_negative() || rest > Rational::one() {
                return None;
            }
            pass[1] = [rest, both];
        }
        // Pr{yhat = 1 | xhat = 1, y = 0, x}; for y = 1 it is stage2_rate.
        let hire_unqualified = [pick(rng, 0, 100), pick(rng, 0, 100)];
        for x in 0..2 {
            for y in 0..2 {
                let base = &group_weight * &xy[x][y];
                let p = &pass[x][y];
                let h = if y == 1 {
                    stage2_rate.clone()
                } else {
                    hire_unqualified[x].clone()
                };
                let cell = |xhat, yhat| {
                    Cell {
                        group: g,
                        x: x == 1,
                        y: y == 1,
                        xhat,
                        yhat,
                    }
                    .index()
                };
                weights[cell(false, false)] = &base * (Rational::one() - p);
                weights[cell(true, false)] = &base * p * (Rational::one() - &h);
                weights[cell(true, true)] = &base * p * &h;
            }
        }
    }
    OutcomeDistribution::from_weight_vec(GroupSet::binary(), weights).ok()
}

/// Searches random tables with naive stage-1 slack 0 and stage-2 slack 0
/// for one whose pipeline slack is below `alpha_below`. Returns the lowest
/// trial index that qualifies, independent of execution mode.
pub fn search_counterexample(config: &SearchConfig, exec: Execution) -> Option<Counterexample> {
    exec.find_first(config.trials as usize, |i| {
        let mut rng = rng::stream(config.seed, Domain::CounterexampleSearch, i as u64);
        let dist = candidate(&mut rng, config.x_equals_y)?;
        let naive_eps = epsilon_slack(&dist, Predictor::XHat, Truth::X, "1").ok()?;
        let delta = stage2_conditional_slack(&dist, "1").ok()?;
        let alpha = epsilon_slack(&dist, Predictor::YHat, Truth::Y, "1").ok()?;
        let fair_stages = naive_eps.is_zero() && delta.is_zero();
        (fair_stages && alpha < config.alpha_below).then_some(Counterexample {
            trial: i as u64,
            dist,
            naive_eps,
            delta,
            alpha,
        })
    })
}

/// Minority applicants are hire-qualified but rarely interview-qualified,
/// and interviews go only to the interview-qualified. Both stages are
/// exactly fair on their own terms, the pipeline halves minority hiring.
pub fn bad_resume_example() -> OutcomeDistribution<Rational> {
    let c = |group, x, y, xhat, yhat| Cell {
        group,
        x,
        y,
        xhat,
        yhat,
    };
    let cells = [
        // Majority: x = y for everyone, interviews the qualified, hires half of them.
        (c(0, true, true, true, true), ratio(1, 8)),
        (c(0, true, true, true, false), ratio(1, 8)),
        (c(0, false, false, false, false), ratio(1, 4)),
        // Minority: half of the hire-qualified have x = 0 and are never interviewed.
        (c(1, true, true, true, true), ratio(1, 16)),
        (c(1, true, true, true, false), ratio(1, 16)),
        (c(1, false, true, false, false), ratio(1, 8)),
        (c(1, false, false, false, false), ratio(1, 4)),
    ];
    OutcomeDistribution::new(GroupSet::binary(), cells).expect("masses sum to 1")
}
