use fairpipe::hiring::{expected_counts, monte_carlo, HiringScenario, SamplingModel, MINORITY};
use fairpipe::metrics::{
    epsilon_slack, stage1_cross_slack, stage2_conditional_slack, Cell, OutcomeDistribution,
    Predictor, Truth,
};
use fairpipe::pipeline::{
    decider, evaluate_population, make_filtering, GroupSet, Population, Record,
};
use fairpipe::scalar::ratio;
use fairpipe::{Execution, Prob, Rational};
use rand::{Rng, SeedableRng};

/// Group share, joint (x, y) law, and stage pass rates of a two-group population.
struct Model {
    share: [Rational; 2],
    /// `xy[g][x][y]`
    xy: [[[Rational; 2]; 2]; 2],
    /// `Pr{X̂=1 | g, x, y}`
    pass1: [[[Rational; 2]; 2]; 2],
    /// `Pr{Ŷ=1 | X̂=1, g, x, y}`
    pass2: [[[Rational; 2]; 2]; 2],
}

fn model() -> Model {
    let r = |n, d| ratio(n, d);
    Model {
        share: [r(3, 5), r(2, 5)],
        xy: [
            [[r(2, 5), r(1, 10)], [r(1, 10), r(2, 5)]],
            [[r(3, 10), r(1, 5)], [r(1, 5), r(3, 10)]],
        ],
        pass1: [
            [[r(1, 10), r(1, 5)], [r(1, 2), r(7, 10)]],
            [[r(1, 5), r(1, 10)], [r(3, 5), r(1, 2)]],
        ],
        pass2: [
            [[r(1, 20), r(2, 5)], [r(1, 10), r(1, 2)]],
            [[r(1, 10), r(3, 10)], [r(1, 5), r(3, 5)]],
        ],
    }
}

impl Model {
    fn exact(&self) -> OutcomeDistribution<Rational> {
        let one = Rational::from_integer(1.into());
        let mut cells = Vec::new();
        for g in 0..2 {
            for x in 0..2 {
                for y in 0..2 {
                    let base = &self.share[g] * &self.xy[g][x][y];
                    let (p, h) = (&self.pass1[g][x][y], &self.pass2[g][x][y]);
                    let c = |xhat, yhat| Cell {
                        group: g,
                        x: x == 1,
                        y: y == 1,
                        xhat,
                        yhat,
                    };
                    cells.push((c(false, false), &base * (&one - p)));
                    cells.push((c(true, false), &base * p * (&one - h)));
                    cells.push((c(true, true), &base * p * h));
                }
            }
        }
        OutcomeDistribution::new(GroupSet::binary(), cells).unwrap()
    }

    fn sample(&self, n: usize, seed: u64) -> Population {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let weights: Vec<(usize, bool, bool, f64)> = (0..8)
            .map(|i| {
                let (g, x, y) = (i >> 2, (i >> 1) & 1, i & 1);
                (
                    g,
                    x == 1,
                    y == 1,
                    (&self.share[g] * &self.xy[g][x][y]).to_f64(),
                )
            })
            .collect();
        let records = (0..n)
            .map(|i| {
                let mut u: f64 = rng.random();
                let mut pick = weights[7];
                for w in &weights {
                    if u < w.3 {
                        pick = *w;
                        break;
                    }
                    u -= w.3;
                }
                let (g, x, y, _) = pick;
                Record::new(format!("r{i}"), g.to_string(), vec![x, y])
            })
            .collect();
        Population::with_groups(GroupSet::binary(), records).unwrap()
    }

    fn pipeline(&self) -> fairpipe::pipeline::PipelineSpec {
        let table = |t: &[[[Rational; 2]; 2]; 2]| {
            let f: Vec<f64> = (0..8)
                .map(|i| t[i >> 2][(i >> 1) & 1][i & 1].to_f64())
                .collect();
            move |rec: &Record| {
                let g: usize = rec.group.parse().unwrap();
                f[g * 4 + usize::from(rec.truths[0]) * 2 + usize::from(rec.truths[1])]
            }
        };
        let (p1, p2) = (table(&self.pass1), table(&self.pass2));
        make_filtering(vec![
            decider(move |rec, _, rng| u32::from(rng.random_bool(p1(rec)))),
            decider(move |rec, _, rng| u32::from(rng.random_bool(p2(rec)))),
        ])
        .unwrap()
    }
}

/// Delta-method standard error of `p_g / p_m - 1` for rates estimated from
/// `n_g` and `n_m` conditioning records.
fn slack_se(pg: f64, ng: f64, pm: f64, nm: f64) -> f64 {
    let r = pg / pm;
    r * ((1.0 - pg) / (pg * ng) + (1.0 - pm) / (pm * nm)).sqrt()
}

#[test]
fn empirical_slacks_converge_to_exact() {
    let n = 1_000_000;
    let m = model();
    let exact = m.exact();
    let pop = m.sample(n, 7);
    let table = evaluate_population(&m.pipeline(), &pop, 11, Execution::Parallel).unwrap();
    let empirical = table.empirical_distribution().unwrap();
    let n = n as f64;

    type Rate = fn(&OutcomeDistribution<Rational>, usize) -> (Rational, Rational);
    type Slack = fn(&OutcomeDistribution<Rational>) -> Rational;
    let checks: [(&str, Rate, Slack); 4] = [
        (
            "stage1",
            |d, g| {
                (
                    d.true_positive_rate(Predictor::XHat, Truth::X, g).unwrap(),
                    d.probability(|c| c.group == g && c.x),
                )
            },
            |d| epsilon_slack(d, Predictor::XHat, Truth::X, "1").unwrap(),
        ),
        (
            "stage1_cross",
            |d, g| {
                (
                    d.true_positive_rate(Predictor::XHat, Truth::Y, g).unwrap(),
                    d.probability(|c| c.group == g && c.y),
                )
            },
            |d| stage1_cross_slack(d, "1").unwrap(),
        ),
        (
            "stage2",
            |d, g| {
                (
                    d.stage2_rate(g).unwrap(),
                    d.probability(|c| c.group == g && c.xhat && c.y),
                )
            },
            |d| stage2_conditional_slack(d, "1").unwrap(),
        ),
        (
            "pipeline",
            |d, g| {
                (
                    d.true_positive_rate(Predictor::YHat, Truth::Y, g).unwrap(),
                    d.probability(|c| c.group == g && c.y),
                )
            },
            |d| epsilon_slack(d, Predictor::YHat, Truth::Y, "1").unwrap(),
        ),
    ];
    for (name, rate, slack) in checks {
        let (pm, wm) = rate(&exact, 0);
        let (pg, wg) = rate(&exact, 1);
        let se = slack_se(pg.to_f64(), wg.to_f64() * n, pm.to_f64(), wm.to_f64() * n);
        let (want, got) = (slack(&exact).to_f64(), slack(&empirical).to_f64());
        assert!(
            (got - want).abs() < 3.0 * se,
            "{name}: {got} vs {want} (se {se})"
        );
    }
}

#[test]
fn monte_carlo_means_match_expectations() {
    for case in 1..=4 {
        for model in [SamplingModel::Bernoulli, SamplingModel::FixedQuota] {
            let s = HiringScenario::table1_case(case).unwrap().with_model(model);
            let expected = expected_counts(&s).unwrap();
            let mc = monte_carlo(&s, 10_000, 3, Execution::Parallel).unwrap();
            for g in 0..2 {
                for (stats, want) in [
                    (&mc.interviewed[g], &expected.interviewed[g]),
                    (&mc.hired[g], &expected.hired[g]),
                ] {
                    let dev = (stats.mean - want.to_f64()).abs();
                    // Fixed quotas make some counts constant, with zero standard error.
                    assert!(
                        dev <= 3.0 * stats.se_mean || dev < 1e-12,
                        "{model} case {case} group {g}: {} vs {}",
                        stats.mean,
                        want.to_f64()
                    );
                }
            }
        }
    }
}

#[test]
fn bernoulli_minority_hire_variance_is_stage_independent() {
    let run = |case| {
        let s = HiringScenario::table1_case(case).unwrap();
        monte_carlo(&s, 100_000, 5, Execution::Parallel)
            .unwrap()
            .hired[MINORITY]
    };
    let (a, b) = (run(1), run(2));
    let se = (a.se_variance.powi(2) + b.se_variance.powi(2)).sqrt();
    assert!(
        (a.variance - b.variance).abs() < 3.0 * se,
        "{} vs {} (se {se})",
        a.variance,
        b.variance
    );
}
