use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use fairpipe::composition::{
    assumption3_violations, search_counterexample, verify_composition, verify_composition_at,
    CompositionReport, SearchConfig,
};
use fairpipe::feedback::{
    beta_grid, classify_fixed_point, exponent_stability_scan, iterate, stability_boundaries,
    FeedbackSystem, IncentiveRule, DEFAULT_SPACING,
};
use fairpipe::hiring::{
    expected_counts, feasibility_check, figure_rows, monte_carlo, HiringScenario, SamplingModel,
    GROUP_LABELS,
};
use fairpipe::io::{
    read_distribution, read_labeled_outcomes, write_distribution, Document, ScenarioConfig, Table,
};
use fairpipe::metrics::{
    decoupling_ratio, slack_report, Cell, EpsTargets, OutcomeDistribution, Predictor, SlackReport,
    Truth,
};
use fairpipe::scalar::{format_decimal, format_exact, parse_rational};
use fairpipe::{Error, Execution, Prob, Rational};

use crate::{Global, Status};

const DEFAULT_TRIALS: u64 = 10_000;

pub struct Report {
    pub doc: Option<Document>,
    pub status: Status,
    /// Diagnostics for stderr.
    pub notes: Vec<String>,
}

impl Report {
    fn ok(doc: Document) -> Self {
        Report {
            doc: Some(doc),
            status: Status::Success,
            notes: Vec::new(),
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            status: Status::Input,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InfeasibleScenario(_)
            | Error::InfeasibleEpsilon { .. }
            | Error::Divergence { .. } => Status::Verdict,
            _ => Status::Input,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<Report, Failure>;

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn in_file(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    }
}

fn rational_arg(text: &str, flag: &str) -> Result<Rational, Failure> {
    parse_rational(text).map_err(|e| Failure::input(format!("--{flag}: {e}")))
}

/// `2`, `-2/3`, or `groupA=2,groupB=1/2`.
fn targets_arg(text: Option<&str>, flag: &str) -> Result<EpsTargets<Rational>, Failure> {
    let Some(text) = text else {
        return Ok(EpsTargets::Untested);
    };
    if !text.contains('=') {
        return Ok(EpsTargets::Uniform(rational_arg(text, flag)?));
    }
    text.split(',')
        .map(|pair| match pair.split_once('=') {
            Some((g, v)) => Ok((g.trim().to_string(), rational_arg(v, flag)?)),
            None => Err(Failure::input(format!(
                "--{flag}: expected group=value, found `{pair}`"
            ))),
        })
        .collect::<Result<Vec<_>, _>>()
        .map(EpsTargets::PerGroup)
}

fn key_values<K: Display, V: Display>(pairs: impl IntoIterator<Item = (K, V)>) -> Table {
    let mut t = Table::new(["key", "value"]);
    for (k, v) in pairs {
        t.push([k.to_string(), v.to_string()]);
    }
    t
}

fn cell_table<'a>(
    dist: &OutcomeDistribution<Rational>,
    cells: impl IntoIterator<Item = (Cell, &'a Rational)>,
) -> Table {
    let mut t = Table::new(["group", "x", "y", "xhat", "yhat", "mass"]);
    let bit = |b: bool| u8::from(b).to_string();
    for (c, m) in cells {
        t.push([
            dist.groups().label(c.group).to_string(),
            bit(c.x),
            bit(c.y),
            bit(c.xhat),
            bit(c.yhat),
            format_exact(m),
        ]);
    }
    t
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Labeled outcomes (`id,group,truth_*,status,failed_at,decision_*`) or a
    /// distribution (`group,x,y,xhat,yhat,mass`).
    #[arg(long)]
    pub input: PathBuf,
    /// Stage-1 target: one value for every group, or `group=value,...`.
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<String>,
    /// Target for later stages, conditioned on reaching them.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    /// Target for the end-to-end pipeline.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Reference group [default: first group in the file].
    #[arg(long)]
    pub majority: Option<String>,
}

type RateFn<'a> = Box<dyn Fn(usize) -> fairpipe::Result<Rational> + 'a>;

fn is_distribution(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|header| header.split(',').any(|c| c.trim() == "mass"))
}

fn push_slacks(table: &mut Table, metric: &str, report: &SlackReport<Rational>) {
    for row in &report.rows {
        table.push([
            metric.to_string(),
            row.group.clone(),
            format_decimal(row.slack.to_f64()),
            format_exact(&row.slack),
            row.tested_eps
                .as_ref()
                .map(format_exact)
                .unwrap_or_default(),
            row.verdict
                .map(|v| v.as_str().to_string())
                .unwrap_or_default(),
        ]);
    }
}

pub fn audit(args: &AuditArgs, _global: &Global) -> Outcome {
    let text = read_file(&args.input)?;
    let eps = targets_arg(args.eps.as_deref(), "eps")?;
    let delta = targets_arg(args.delta.as_deref(), "delta")?;
    let alpha = targets_arg(args.alpha.as_deref(), "alpha")?;
    let majority = args.majority.as_deref();
    let wrap = in_file(&args.input);
    let mut slacks = Table::new([
        "metric",
        "group",
        "slack",
        "slack_exact",
        "tested_eps",
        "verdict",
    ]);
    let mut any_fail = false;
    let mut doc = Document::new("audit");

    if is_distribution(&text) {
        let dist = read_distribution(text.as_bytes(), majority).map_err(&wrap)?;
        let groups = dist.groups().clone();
        let untested = EpsTargets::Untested;
        let metrics: [(&str, RateFn, &EpsTargets<Rational>); 4] = [
            (
                "stage1",
                Box::new(|g| dist.true_positive_rate(Predictor::XHat, Truth::X, g)),
                &eps,
            ),
            (
                "stage1_cross",
                Box::new(|g| dist.true_positive_rate(Predictor::XHat, Truth::Y, g)),
                &untested,
            ),
            ("stage2", Box::new(|g| dist.stage2_rate(g)), &delta),
            (
                "pipeline",
                Box::new(|g| dist.true_positive_rate(Predictor::YHat, Truth::Y, g)),
                &alpha,
            ),
        ];
        for (name, rate, targets) in &metrics {
            let report = slack_report(&groups, rate, targets)?;
            any_fail |= report.any_fail();
            push_slacks(&mut slacks, name, &report);
        }
        doc.section("slack", slacks);
        let mut ratios = Table::new(["group", "decoupling_ratio", "decoupling_ratio_exact"]);
        for label in groups.labels() {
            match decoupling_ratio(&dist, label) {
                Ok(r) => ratios.push([label.clone(), format_decimal(r.to_f64()), format_exact(&r)]),
                Err(_) => ratios.push([label.as_str(), "undefined", "undefined"]),
            }
        }
        doc.section("decoupling", ratios);
    } else {
        let table = read_labeled_outcomes(text.as_bytes(), majority).map_err(&wrap)?;
        let stages = table.stages();
        for t in 1..=stages {
            let targets = if t == 1 { &eps } else { &delta };
            let report = slack_report(table.groups(), |g| table.stage_rate(t, g, t > 1), targets)?;
            any_fail |= report.any_fail();
            push_slacks(&mut slacks, &format!("stage{t}"), &report);
        }
        if stages > 1 {
            let report = slack_report(
                table.groups(),
                |g| table.stage_rate(stages, g, false),
                &alpha,
            )?;
            any_fail |= report.any_fail();
            push_slacks(&mut slacks, "pipeline", &report);
        } else if !matches!(alpha, EpsTargets::Untested) {
            return Err(Failure::input("--alpha needs at least two stages"));
        }
        doc.section("slack", slacks);
        let mut counts = Table::new([
            "group",
            "stage",
            "records",
            "reached",
            "passed",
            "qualified",
            "qualified_positive",
        ]);
        for (g, label) in table.groups().labels().iter().enumerate() {
            for t in 1..=stages {
                let c = table.counts(g, t);
                counts.push([
                    label.clone(),
                    t.to_string(),
                    c.records.to_string(),
                    c.reached.to_string(),
                    c.passed.to_string(),
                    c.qualified.to_string(),
                    c.qualified_positive.to_string(),
                ]);
            }
        }
        doc.section("counts", counts);
    }

    let mut report = Report::ok(doc);
    if any_fail {
        report.status = Status::Verdict;
        report
            .notes
            .push("audit: at least one tested target is not met".into());
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Bernoulli,
    Quota,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file (TOML).
    #[arg(long, conflicts_with = "table1", required_unless_present = "table1")]
    pub input: Option<PathBuf>,
    /// One of the four cases of the 90/10 applicant example.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub table1: Option<u8>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    #[arg(long)]
    pub qualification_rate: Option<String>,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// Monte Carlo rounds; 0 prints the analytic sections only [default: 10000].
    #[arg(long)]
    pub trials: Option<u64>,
    /// Also write the scenario's exact outcome distribution here.
    #[arg(long)]
    pub distribution: Option<PathBuf>,
}

fn load_scenario(
    args: &SimulateArgs,
) -> Result<(HiringScenario, Option<u64>, Option<u64>), Failure> {
    let (mut scenario, trials, seed) = match (&args.input, args.table1) {
        (Some(path), _) => {
            let config = ScenarioConfig::parse(&read_file(path)?).map_err(in_file(path))?;
            (
                config.scenario().map_err(in_file(path))?,
                config.trials,
                config.seed,
            )
        }
        (None, Some(case)) => (HiringScenario::table1_case(case)?, None, None),
        (None, None) => return Err(Failure::input("simulate needs --input or --table1")),
    };
    if args.eps.is_some() || args.delta.is_some() {
        let eps = match &args.eps {
            Some(e) => rational_arg(e, "eps")?,
            None => scenario.eps.clone(),
        };
        let delta = match &args.delta {
            Some(d) => rational_arg(d, "delta")?,
            None => scenario.delta.clone(),
        };
        let rebuilt = HiringScenario::new(
            scenario.n_majority,
            scenario.n_minority,
            scenario.n_interview,
            scenario.n_hire,
            eps,
            delta,
        )?;
        scenario = rebuilt
            .with_qualification_rate(scenario.qualification_rate.clone())?
            .with_model(scenario.model);
    }
    if let Some(q) = &args.qualification_rate {
        scenario = scenario.with_qualification_rate(rational_arg(q, "qualification-rate")?)?;
    }
    if let Some(m) = args.model {
        scenario = scenario.with_model(match m {
            ModelArg::Bernoulli => SamplingModel::Bernoulli,
            ModelArg::Quota => SamplingModel::FixedQuota,
        });
    }
    Ok((scenario, trials, seed))
}

pub fn simulate(args: &SimulateArgs, global: &Global, exec: Execution) -> Outcome {
    let (scenario, config_trials, config_seed) = load_scenario(args)?;
    let trials = args.trials.or(config_trials).unwrap_or(DEFAULT_TRIALS);
    let seed = global.seed.or(config_seed).unwrap_or(0);

    let mut doc = Document::new("simulate");
    doc.section(
        "scenario",
        key_values([
            ("n_majority", scenario.n_majority.to_string()),
            ("n_minority", scenario.n_minority.to_string()),
            ("n_interview", scenario.n_interview.to_string()),
            ("n_hire", scenario.n_hire.to_string()),
            ("eps", format_exact(&scenario.eps)),
            ("delta", format_exact(&scenario.delta)),
            (
                "qualification_rate",
                format_exact(&scenario.qualification_rate),
            ),
            ("model", scenario.model.as_str().to_string()),
            ("trials", trials.to_string()),
            ("seed", seed.to_string()),
        ]),
    );

    let feasibility = feasibility_check(&scenario);
    let feasibility_table = key_values([
        ("feasible", feasibility.feasible().to_string()),
        (
            "interview_feasible",
            feasibility.interview_feasible.to_string(),
        ),
        ("hire_feasible", feasibility.hire_feasible.to_string()),
        ("small_pool", feasibility.small_pool.to_string()),
        (
            "expected_minority_interviewed",
            format_exact(&feasibility.expected_minority_interviewed),
        ),
        (
            "requested_minority_hires",
            format_exact(&feasibility.requested_minority_hires),
        ),
        (
            "max_minority_hires",
            format_exact(&feasibility.max_minority_hires),
        ),
        ("binding", feasibility.binding.clone().unwrap_or_default()),
    ]);

    if !feasibility.feasible() {
        doc.section("feasibility", feasibility_table);
        let binding = feasibility
            .binding
            .unwrap_or_else(|| "unknown constraint".into());
        return Ok(Report {
            doc: Some(doc),
            status: Status::Verdict,
            notes: vec![format!("infeasible scenario: {binding}")],
        });
    }

    let expected = expected_counts(&scenario)?;
    let mut exp = Table::new([
        "group",
        "interviewed",
        "hired",
        "interviewed_exact",
        "hired_exact",
    ]);
    for (g, label) in GROUP_LABELS.iter().enumerate() {
        exp.push([
            label.to_string(),
            format_decimal(expected.interviewed[g].to_f64()),
            format_decimal(expected.hired[g].to_f64()),
            format_exact(&expected.interviewed[g]),
            format_exact(&expected.hired[g]),
        ]);
    }
    doc.section("expected", exp);

    if trials > 0 {
        let summary = monte_carlo(&scenario, trials, seed, exec)?;
        let mut mc = Table::new([
            "group",
            "stage",
            "mean",
            "variance",
            "se_mean",
            "se_variance",
        ]);
        for (g, label) in GROUP_LABELS.iter().enumerate() {
            for (stage, stats) in [
                ("interviewed", &summary.interviewed[g]),
                ("hired", &summary.hired[g]),
            ] {
                mc.push([
                    label.to_string(),
                    stage.to_string(),
                    format_decimal(stats.mean),
                    format_decimal(stats.variance),
                    format_decimal(stats.se_mean),
                    format_decimal(stats.se_variance),
                ]);
            }
        }
        doc.section("monte_carlo", mc);
    }

    doc.section("feasibility", feasibility_table);

    let mut figure = Table::new(["group", "stage", "count", "count_exact"]);
    for (group, stage, value) in figure_rows(&expected) {
        figure.push([
            group,
            stage,
            &format_decimal(value.to_f64()),
            &format_exact(&value),
        ]);
    }
    doc.section("figure1", figure);

    if let Some(path) = &args.distribution {
        let dist = scenario.outcome_distribution()?;
        let file = fs::File::create(path)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        write_distribution(file, &dist)?;
    }

    let mut report = Report::ok(doc);
    if feasibility.small_pool {
        report.notes.push(
            "note: two or fewer minority interviews expected; per-trial counts are very noisy"
                .into(),
        );
    }
    Ok(report)
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    /// Distribution (`group,x,y,xhat,yhat,mass`).
    #[arg(long, required_unless_present = "search")]
    pub input: Option<PathBuf>,
    /// Check one protected group [default: all].
    #[arg(long)]
    pub group: Option<String>,
    /// Test these stage slacks instead of the observed ones.
    #[arg(long, allow_hyphen_values = true, requires = "delta")]
    pub eps: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "eps")]
    pub delta: Option<String>,
    #[arg(long)]
    pub majority: Option<String>,
    /// Search this many random tables for a stage-fair, pipeline-unfair one.
    #[arg(long)]
    pub search: Option<u64>,
    /// Search only tables where stage-1 and final qualification coincide.
    #[arg(long)]
    pub x_equals_y: bool,
    /// Report a table only if its pipeline slack is below this.
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    pub alpha_below: String,
}

fn verdict_label(report: &CompositionReport<Rational>) -> &'static str {
    match report.verdict {
        Some(true) => "pass",
        Some(false) => "fail",
        None => "inapplicable",
    }
}

pub fn compose(args: &ComposeArgs, global: &Global, exec: Execution) -> Outcome {
    let mut doc = Document::new("compose");
    let mut report = Report {
        doc: None,
        status: Status::Success,
        notes: Vec::new(),
    };

    if let Some(path) = &args.input {
        let dist = read_distribution(read_file(path)?.as_bytes(), args.majority.as_deref())
            .map_err(in_file(path))?;
        let tested = match (&args.eps, &args.delta) {
            (Some(e), Some(d)) => Some((rational_arg(e, "eps")?, rational_arg(d, "delta")?)),
            _ => None,
        };
        let groups: Vec<String> = match &args.group {
            Some(g) => {
                dist.groups().index_of(g)?;
                vec![g.clone()]
            }
            None => dist
                .groups()
                .protected()
                .map(|g| dist.groups().label(g).to_string())
                .collect(),
        };
        let mut table = Table::new([
            "group", "eps", "delta", "alpha", "bound", "gap", "a1", "a2", "a3", "verdict",
        ]);
        for group in &groups {
            let r = match &tested {
                Some((e, d)) => verify_composition_at(&dist, group, e.clone(), d.clone())?,
                None => verify_composition(&dist, group)?,
            };
            if r.verdict != Some(true) {
                report.status = Status::Verdict;
            }
            table.push([
                group.clone(),
                format_exact(&r.eps),
                format_exact(&r.delta),
                format_exact(&r.alpha),
                format_exact(&r.bound),
                format_exact(&r.gap()),
                r.assumptions[0].to_string(),
                r.assumptions[1].to_string(),
                r.assumptions[2].to_string(),
                verdict_label(&r).to_string(),
            ]);
        }
        doc.section("composition", table);
        let offending = assumption3_violations(&dist);
        if !offending.is_empty() {
            report.notes.push(format!(
                "assumption 3 violated: {} cells with yhat=1, xhat=0 carry mass",
                offending.len()
            ));
            doc.section(
                "offending_cells",
                cell_table(&dist, offending.iter().map(|(c, m)| (*c, m))),
            );
        }
        if report.status == Status::Verdict {
            report
                .notes
                .push("compose: the composition bound does not hold for every group".into());
        }
    }

    if let Some(trials) = args.search {
        let seed = global.seed.unwrap_or(0);
        let mut config = SearchConfig::new(seed, trials);
        config.x_equals_y = args.x_equals_y;
        config.alpha_below = rational_arg(&args.alpha_below, "alpha-below")?;
        let found = search_counterexample(&config, exec);
        let mut summary = vec![
            ("trials", trials.to_string()),
            ("seed", seed.to_string()),
            ("x_equals_y", args.x_equals_y.to_string()),
            ("alpha_below", format_exact(&config.alpha_below)),
            ("found", found.is_some().to_string()),
        ];
        if let Some(cx) = &found {
            let ratio = decoupling_ratio(&cx.dist, "1")
                .map(|r| format_exact(&r))
                .unwrap_or_else(|_| "undefined".into());
            summary.extend([
                ("trial", cx.trial.to_string()),
                ("naive_eps", format_exact(&cx.naive_eps)),
                ("delta", format_exact(&cx.delta)),
                ("alpha", format_exact(&cx.alpha)),
                ("alpha_decimal", format_decimal(cx.alpha.to_f64())),
                ("decoupling_ratio", ratio),
            ]);
        }
        doc.section("search", key_values(summary));
        if let Some(cx) = &found {
            let cells = cx
                .dist
                .cells()
                .filter(|(_, m)| !num_traits::Zero::is_zero(*m));
            doc.section("certificate", cell_table(&cx.dist, cells));
        }
    }

    report.doc = Some(doc);
    Ok(report)
}

#[derive(Debug, Args)]
pub struct FeedbackArgs {
    /// `sqrt`, `inverse`, `linear`, or `pow:<beta>`.
    #[arg(long, default_value = "sqrt")]
    pub rule: String,
    /// Adjustment rate in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Initial minority share in (0, 1).
    #[arg(long, default_value_t = 0.1)]
    pub r0: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tolerance: f64,
    /// Classify the 50:50 fixed point across power-law rules instead.
    #[arg(long)]
    pub scan: bool,
    /// Exponents to scan, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "beta_range"
    )]
    pub betas: Vec<f64>,
    /// Evenly spaced exponents, `lo:hi:points` [default: -1:3:41].
    #[arg(long, allow_hyphen_values = true)]
    pub beta_range: Option<String>,
}

fn parse_range(text: &str) -> Result<Vec<f64>, Failure> {
    let bad = || {
        Failure::input(format!(
            "--beta-range: expected lo:hi:points, found `{text}`"
        ))
    };
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    Ok(beta_grid(lo, hi, n)?)
}

pub fn feedback(args: &FeedbackArgs, exec: Execution) -> Outcome {
    let mut doc = Document::new("feedback");
    if args.scan {
        let betas = if !args.betas.is_empty() {
            args.betas.clone()
        } else {
            parse_range(args.beta_range.as_deref().unwrap_or("-1:3:41"))?
        };
        let rows = exponent_stability_scan(args.lambda, &betas, exec)?;
        let mut scan = Table::new(["beta", "lambda", "derivative", "class"]);
        for r in &rows {
            scan.push([
                format_decimal(r.beta),
                format_decimal(r.lambda),
                format_decimal(r.derivative),
                r.class.as_str().to_string(),
            ]);
        }
        doc.section("scan", scan);
        let mut bounds = Table::new(["beta"]);
        for b in stability_boundaries(&rows) {
            bounds.push([format_decimal(b)]);
        }
        doc.section("boundaries", bounds);
        return Ok(Report::ok(doc));
    }

    let rule: IncentiveRule = args.rule.parse()?;
    let system = FeedbackSystem::new(rule, args.lambda, args.r0)?;
    let trajectory = iterate(&system, args.steps, args.tolerance)?;
    let mut rows = Table::new(["t", "r"]);
    for (t, r) in trajectory.shares.iter().enumerate() {
        rows.push([t.to_string(), format_decimal(*r)]);
    }
    doc.section("trajectory", rows);

    let outcome = if trajectory.converged {
        "converged"
    } else if trajectory.cycle.is_some() {
        "cycle"
    } else {
        "unsettled"
    };
    let fmt_opt = |v: Option<f64>| v.map(format_decimal).unwrap_or_default();
    let mut summary = vec![
        ("rule", system.rule.to_string()),
        ("lambda", format_decimal(system.lambda)),
        ("r0", format_decimal(system.r0)),
        ("steps", (trajectory.shares.len() - 1).to_string()),
        ("outcome", outcome.to_string()),
        ("limit", fmt_opt(trajectory.limit)),
        (
            "cycle_low",
            fmt_opt(trajectory.cycle.map(|c| c[0].min(c[1]))),
        ),
        (
            "cycle_high",
            fmt_opt(trajectory.cycle.map(|c| c[0].max(c[1]))),
        ),
    ];
    match classify_fixed_point(&system, 0.5, DEFAULT_SPACING) {
        Ok(fp) => summary.extend([
            ("parity_derivative", format_decimal(fp.derivative)),
            ("parity_class", fp.class.as_str().to_string()),
        ]),
        Err(_) => summary.extend([
            ("parity_derivative", String::new()),
            ("parity_class", "NOT_FIXED".to_string()),
        ]),
    }
    doc.section("summary", key_values(summary));
    Ok(Report::ok(doc))
}
