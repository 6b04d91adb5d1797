//! Participation-incentive feedback loops.
//!
//! Two classes split a fixed prize. With participation share `r` for the
//! tracked class and incentive rule `g`, that class receives the payout
//! share `s(r) = g(r) / (g(r) + g(1 - r))`. Next round's participation moves
//! towards the payout share:
//!
//! ```text
//! r' = (1 - lambda) * r + lambda * s(r)
//! ```
//!
//! `r = 1/2` is a fixed point of every rule. For `g(r) = r^beta` and
//! `lambda = 1` the map's slope there is exactly `beta`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec::Execution;

/// Slack around `|f'| = 1` inside which a fixed point counts as neutral.
pub const STABILITY_MARGIN: f64 = 1e-3;

/// Tolerance on `|step(r*) - r*|` for `r*` to count as a fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-9;

/// Default finite-difference spacing.
pub const DEFAULT_SPACING: f64 = 1e-5;

#[derive(Clone)]
pub enum IncentiveRule {
    Sqrt,
    Inverse,
    Linear,
    /// `r^beta`.
    Power(f64),
    Custom(String, Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl IncentiveRule {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            IncentiveRule::Sqrt => r.sqrt(),
            IncentiveRule::Inverse => 1.0 / r,
            IncentiveRule::Linear => r,
            IncentiveRule::Power(beta) => r.powf(*beta),
            IncentiveRule::Custom(_, g) => g(r),
        }
    }
}

impl fmt::Debug for IncentiveRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IncentiveRule({self})")
    }
}

impl fmt::Display for IncentiveRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IncentiveRule::Sqrt => f.write_str("sqrt"),
            IncentiveRule::Inverse => f.write_str("inverse"),
            IncentiveRule::Linear => f.write_str("linear"),
            IncentiveRule::Power(beta) => write!(f, "pow:{beta}"),
            IncentiveRule::Custom(name, _) => f.write_str(name),
        }
    }
}

impl FromStr for IncentiveRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sqrt" => Ok(IncentiveRule::Sqrt),
            "inverse" => Ok(IncentiveRule::Inverse),
            "linear" => Ok(IncentiveRule::Linear),
            other => match other.strip_prefix("pow:") {
                Some(beta) => beta
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|b| b.is_finite())
                    .map(IncentiveRule::Power)
                    .ok_or_else(|| Error::InvalidRule(format!("bad exponent in `{other}`"))),
                None => Err(Error::InvalidRule(format!(
                    "unknown rule `{other}` (expected sqrt, inverse, linear, pow:<beta>)"
                ))),
            },
        }
    }
}

fn check_share(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidRule(format!(
            "participation share {r} outside (0, 1)"
        )))
    }
}

/// The tracked class's fraction of the total purse.
pub fn payout_share(rule: &IncentiveRule, r: f64) -> Result<f64> {
    check_share(r)?;
    let (mine, theirs) = (rule.eval(r), rule.eval(1.0 - r));
    if !(mine > 0.0 && theirs > 0.0 && mine.is_finite() && theirs.is_finite()) {
        return Err(Error::InvalidRule(format!(
            "{rule} must be positive and finite at {r} and {} (got {mine}, {theirs})",
            1.0 - r
        )));
    }
    Ok(mine / (mine + theirs))
}

/// Expected individual payout relative to an equal split: `s(r) / r`.
pub fn per_capita_payout(rule: &IncentiveRule, r: f64) -> Result<f64> {
    Ok(payout_share(rule, r)? / r)
}

#[derive(Clone, Debug)]
pub struct FeedbackSystem {
    pub rule: IncentiveRule,
    pub lambda: f64,
    pub r0: f64,
}

impl FeedbackSystem {
    pub fn new(rule: IncentiveRule, lambda: f64, r0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidRule(format!(
                "lambda {lambda} outside [0, 1]"
            )));
        }
        check_share(r0)?;
        Ok(FeedbackSystem { rule, lambda, r0 })
    }

    pub fn step(&self, r: f64) -> Result<f64> {
        step(self, r)
    }
}

pub fn step(system: &FeedbackSystem, r: f64) -> Result<f64> {
    let s = payout_share(&system.rule, r)?;
    Ok((1.0 - system.lambda) * r + system.lambda * s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub shares: Vec<f64>,
    pub converged: bool,
    pub limit: Option<f64>,
    /// `[r_t, r_{t+1}]` when a period-2 orbit was detected.
    pub cycle: Option<[f64; 2]>,
}

/// Iterates from `r0` until `|Δr| < tolerance`, a period-2 orbit shows up,
/// or `max_steps` steps have been taken.
pub fn iterate(system: &FeedbackSystem, max_steps: usize, tolerance: f64) -> Result<Trajectory> {
    if max_steps == 0 {
        return Err(Error::InvalidRule("max_steps must be at least 1".into()));
    }
    let mut shares = vec![system.r0];
    for t in 1..=max_steps {
        let r = shares[t - 1];
        let next = step(system, r).map_err(|_| Error::Divergence { step: t, last: r })?;
        if !(next > 0.0 && next < 1.0) {
            return Err(Error::Divergence { step: t, last: r });
        }
        shares.push(next);
        // Settling against 0 or 1 is a collapse, not a fixed point; keep going
        // until the share leaves the open interval.
        let interior = next > tolerance && next < 1.0 - tolerance;
        if interior && (next - r).abs() < tolerance {
            return Ok(Trajectory {
                shares,
                converged: true,
                limit: Some(next),
                cycle: None,
            });
        }
        if t >= 2 {
            let before = shares[t - 2];
            if (next - before).abs() < tolerance && (r - before).abs() >= tolerance {
                return Ok(Trajectory {
                    shares,
                    converged: false,
                    limit: None,
                    cycle: Some([before, r]),
                });
            }
        }
    }
    Ok(Trajectory {
        shares,
        converged: false,
        limit: None,
        cycle: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stability {
    Attractive,
    Repulsive,
    Neutral,
}

impl Stability {
    pub fn from_slope(slope: f64) -> Self {
        if slope.abs() < 1.0 - STABILITY_MARGIN {
            Stability::Attractive
        } else if slope.abs() > 1.0 + STABILITY_MARGIN {
            Stability::Repulsive
        } else {
            Stability::Neutral
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Attractive => "ATTRACTIVE",
            Stability::Repulsive => "REPULSIVE",
            Stability::Neutral => "NEUTRAL",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointReport {
    pub r_star: f64,
    pub derivative: f64,
    pub class: Stability,
}

/// Central-difference slope of the update map at a fixed point.
pub fn classify_fixed_point(
    system: &FeedbackSystem,
    r_star: f64,
    h: f64,
) -> Result<FixedPointReport> {
    check_share(r_star)?;
    if !(h > 0.0 && r_star - h > 0.0 && r_star + h < 1.0) {
        return Err(Error::InvalidRule(format!(
            "spacing {h} leaves (0, 1) around {r_star}"
        )));
    }
    let image = step(system, r_star)?;
    if (image - r_star).abs() > FIXED_POINT_TOL {
        return Err(Error::NotFixedPoint { r: r_star, image });
    }
    let derivative = (step(system, r_star + h)? - step(system, r_star - h)?) / (2.0 * h);
    Ok(FixedPointReport {
        r_star,
        derivative,
        class: Stability::from_slope(derivative),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRow {
    pub beta: f64,
    pub lambda: f64,
    pub derivative: f64,
    pub class: Stability,
}

/// `points` evenly spaced values from `lo` to `hi` inclusive.
pub fn beta_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::InvalidRule(
            "a scan grid needs at least 2 points".into(),
        ));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| lo + step * i as f64).collect())
}

/// Classifies the parity fixed point for `g(r) = r^beta` at each beta.
pub fn exponent_stability_scan(
    lambda: f64,
    betas: &[f64],
    exec: Execution,
) -> Result<Vec<ScanRow>> {
    exec.map(betas.len(), |i| {
        let beta = betas[i];
        let system = FeedbackSystem::new(IncentiveRule::Power(beta), lambda, 0.5)?;
        let fp = classify_fixed_point(&system, 0.5, DEFAULT_SPACING)?;
        Ok(ScanRow {
            beta,
            lambda,
            derivative: fp.derivative,
            class: fp.class,
        })
    })
    .into_iter()
    .collect()
}

/// Midpoints between consecutive scan rows whose classes differ.
pub fn stability_boundaries(rows: &[ScanRow]) -> Vec<f64> {
    rows.windows(2)
        .filter(|w| w[0].class != w[1].class)
        .map(|w| 0.5 * (w[0].beta + w[1].beta))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn system(rule: IncentiveRule, lambda: f64, r0: f64) -> FeedbackSystem {
        FeedbackSystem::new(rule, lambda, r0).unwrap()
    }

    #[test]
    fn worked_payout_shares() {
        assert_eq!(payout_share(&IncentiveRule::Sqrt, 0.1).unwrap(), 0.25);
        assert_eq!(payout_share(&IncentiveRule::Inverse, 0.1).unwrap(), 0.9);
        for r in [0.01, 0.1, 0.37, 0.5, 0.93] {
            assert!((payout_share(&IncentiveRule::Linear, r).unwrap() - r).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_rules_and_shares() {
        let neg = IncentiveRule::Custom("neg".into(), Arc::new(|r| r - 0.5));
        assert!(matches!(
            payout_share(&neg, 0.2),
            Err(Error::InvalidRule(_))
        ));
        assert!(payout_share(&IncentiveRule::Sqrt, 0.0).is_err());
        assert!(payout_share(&IncentiveRule::Sqrt, 1.0).is_err());
        assert!("cube".parse::<IncentiveRule>().is_err());
        assert!("pow:x".parse::<IncentiveRule>().is_err());
        assert!(FeedbackSystem::new(IncentiveRule::Sqrt, 1.5, 0.2).is_err());
    }

    #[test]
    fn rule_names_round_trip() {
        for name in ["sqrt", "inverse", "linear", "pow:0.25", "pow:-1"] {
            assert_eq!(name.parse::<IncentiveRule>().unwrap().to_string(), name);
        }
    }

    #[test]
    fn step_examples() {
        assert_eq!(
            step(&system(IncentiveRule::Inverse, 1.0, 0.1), 0.1).unwrap(),
            0.9
        );
        assert_eq!(
            step(&system(IncentiveRule::Sqrt, 1.0, 0.1), 0.1).unwrap(),
            0.25
        );
        assert_eq!(
            step(&system(IncentiveRule::Sqrt, 0.0, 0.1), 0.3).unwrap(),
            0.3
        );
    }

    #[test]
    fn sqrt_converges_to_parity() {
        let t = iterate(&system(IncentiveRule::Sqrt, 1.0, 0.1), 50, 1e-12).unwrap();
        assert!(t.converged);
        assert!((t.limit.unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn inverse_cycles() {
        let t = iterate(&system(IncentiveRule::Inverse, 1.0, 0.1), 50, 1e-12).unwrap();
        assert!(!t.converged);
        let [a, b] = t.cycle.unwrap();
        assert!((a - 0.1).abs() < 1e-12 && (b - 0.9).abs() < 1e-12);
        assert_eq!(t.shares.len(), 3);
    }

    #[test]
    fn parity_start_is_constant() {
        for rule in [
            IncentiveRule::Sqrt,
            IncentiveRule::Inverse,
            IncentiveRule::Power(3.0),
        ] {
            let t = iterate(&system(rule, 1.0, 0.5), 10, 1e-12).unwrap();
            assert!(t.converged);
            assert!(t.shares.iter().all(|&r| r == 0.5));
        }
    }

    #[test]
    fn strongly_repulsive_rule_diverges() {
        let err = iterate(&system(IncentiveRule::Power(4.0), 1.0, 0.2), 1000, 1e-15).unwrap_err();
        assert!(matches!(err, Error::Divergence { last, .. } if last > 0.0 && last < 1.0));
    }

    #[test]
    fn classification_examples() {
        let fp = classify_fixed_point(&system(IncentiveRule::Sqrt, 1.0, 0.5), 0.5, 1e-5).unwrap();
        assert_eq!(fp.class, Stability::Attractive);
        assert!((fp.derivative - 0.5).abs() < 1e-8);

        let fp =
            classify_fixed_point(&system(IncentiveRule::Inverse, 1.0, 0.5), 0.5, 1e-5).unwrap();
        assert_eq!(fp.class, Stability::Neutral);
        assert!((fp.derivative + 1.0).abs() < 1e-8);

        for r in [0.2, 0.5, 0.8] {
            let fp =
                classify_fixed_point(&system(IncentiveRule::Linear, 1.0, 0.5), r, 1e-5).unwrap();
            assert_eq!(fp.class, Stability::Neutral);
        }
    }

    #[test]
    fn non_fixed_point_is_rejected() {
        let err =
            classify_fixed_point(&system(IncentiveRule::Sqrt, 1.0, 0.5), 0.3, 1e-5).unwrap_err();
        assert!(matches!(err, Error::NotFixedPoint { .. }));
    }

    #[test]
    fn scan_examples() {
        let rows = exponent_stability_scan(1.0, &[0.5, -1.0, 0.0], Execution::Sequential).unwrap();
        assert_eq!(rows[0].class, Stability::Attractive);
        assert_eq!(rows[1].class, Stability::Neutral);
        assert_eq!(rows[2].class, Stability::Attractive);
        assert!(rows[2].derivative.abs() < 1e-12);
        let t = iterate(&system(IncentiveRule::Power(0.0), 1.0, 0.1), 5, 1e-12).unwrap();
        assert_eq!(t.shares[1], 0.5);
    }

    #[test]
    fn boundary_at_unit_exponent() {
        let betas = beta_grid(0.0, 2.0, 21).unwrap();
        let rows = exponent_stability_scan(1.0, &betas, Execution::Parallel).unwrap();
        for row in &rows {
            assert!((row.derivative - row.beta).abs() < 1e-6);
        }
        let bounds = stability_boundaries(&rows);
        // Attractive below 1, neutral at 1, repulsive above.
        assert_eq!(bounds.len(), 2);
        assert!((bounds[0] - 0.95).abs() < 1e-9 && (bounds[1] - 1.05).abs() < 1e-9);
    }

    #[test]
    fn damped_slope() {
        let fp =
            classify_fixed_point(&system(IncentiveRule::Inverse, 0.5, 0.5), 0.5, 1e-5).unwrap();
        assert!(fp.derivative.abs() < 1e-8);
    }

    #[test]
    fn per_capita_signal() {
        assert!((per_capita_payout(&IncentiveRule::Linear, 0.1).unwrap() - 1.0).abs() < 1e-12);
        assert!((per_capita_payout(&IncentiveRule::Sqrt, 0.1).unwrap() - 2.5).abs() < 1e-12);
    }
}
