//! Expected utility and risk of forecasts, response-surface gradients,
//! capability-allocation optimization and robustness classification.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coalitions::{victory_matrix, VictoryMatrix};
use crate::error::{Error, Result};
use crate::markov::{limiting_distribution, OutcomeDistribution, SolverConfig};
use crate::model::{utility_of, Actor, IssueSet, OptionId, Scenario, UtilitySpec};

pub const DEFAULT_ROBUST_THRESHOLD: f64 = 0.1;

/// Relative finite-difference step.
pub const DEFAULT_RELATIVE_STEP: f64 = 1e-4;

/// Backtracking halvings tried before an ascent step is abandoned.
pub const MAX_HALVINGS: usize = 20;

fn check_len(distribution: &OutcomeDistribution, issue_set: &IssueSet) -> Result<()> {
    if distribution.len() != issue_set.option_count() {
        return Err(Error::Config(format!(
            "distribution over {} options for an issue set of {}",
            distribution.len(),
            issue_set.option_count()
        )));
    }
    Ok(())
}

/// `Σ p_o U(o)`.
pub fn expected_utility(actor: &Actor, distribution: &OutcomeDistribution, issue_set: &IssueSet) -> Result<f64> {
    check_len(distribution, issue_set)?;
    issue_set
        .options()
        .zip(distribution.probabilities())
        .map(|(o, p)| Ok(p * utility_of(actor, o, issue_set)?))
        .sum()
}

/// RMS deviation of the forecast from the actor's goal.
///
/// On a grid the deviation is the coordinate distance from the actor's
/// ideal (or its position when the utility has no explicit ideal); on other
/// issue sets it is the utility shortfall `1 − U(o)`.
pub fn outcome_risk_rms(actor: &Actor, distribution: &OutcomeDistribution, issue_set: &IssueSet) -> Result<f64> {
    check_len(distribution, issue_set)?;
    let goal = match (&actor.utility, issue_set) {
        (UtilitySpec::Distance1D { ideal, .. }, IssueSet::Grid1D { .. }) => Some(*ideal),
        (_, IssueSet::Grid1D { .. }) => issue_set.coordinate(actor.position),
        _ => None,
    };
    let mut mean_sq = 0.0;
    for (o, p) in issue_set.options().zip(distribution.probabilities()) {
        let d = match goal {
            Some(g) => g - issue_set.coordinate(o).expect("grid option"),
            None => 1.0 - utility_of(actor, o, issue_set)?,
        };
        mean_sq += p * d * d;
    }
    Ok(mean_sq.sqrt())
}

/// Which parameter of an actor a strategy component moves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyTarget {
    #[default]
    Capability,
    VoteWeight,
}

/// One adjustable component: a delta on an actor's parameter within bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyDim {
    pub actor: String,
    #[serde(default)]
    pub target: StrategyTarget,
    pub lower: f64,
    pub upper: f64,
}

/// The strategist's options: deltas with `Σ |δ| ≤ budget` and per-component bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpace {
    pub strategist: String,
    pub dims: Vec<StrategyDim>,
    pub budget: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrategyVector(pub Vec<f64>);

impl StrategyVector {
    pub fn zero(len: usize) -> Self {
        StrategyVector(vec![0.0; len])
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|d| d.abs()).sum()
    }
}

impl StrategySpace {
    fn base_value(&self, scenario: &Scenario, dim: &StrategyDim) -> Result<f64> {
        let actor = &scenario.actors[scenario.actor_index(&dim.actor)?];
        Ok(match dim.target {
            StrategyTarget::Capability => actor.capability,
            StrategyTarget::VoteWeight => actor.vote_weight(),
        })
    }

    /// Bounds tightened so perturbed parameters stay non-negative.
    pub fn effective_bounds(&self, scenario: &Scenario) -> Result<Vec<(f64, f64)>> {
        self.dims
            .iter()
            .map(|dim| Ok((dim.lower.max(-self.base_value(scenario, dim)?), dim.upper)))
            .collect()
    }

    /// Errors unless some vector satisfies the bounds and the budget.
    pub fn check(&self, scenario: &Scenario) -> Result<Vec<(f64, f64)>> {
        scenario.actor_index(&self.strategist)?;
        if !(self.budget >= 0.0 && self.budget.is_finite()) {
            return Err(Error::Domain(format!(
                "strategy budget must be finite and non-negative, got {}",
                self.budget
            )));
        }
        let bounds = self.effective_bounds(scenario)?;
        for (dim, &(lo, hi)) in self.dims.iter().zip(&bounds) {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(Error::Domain(format!(
                    "empty bounds [{lo}, {hi}] for {:?} of `{}`",
                    dim.target, dim.actor
                )));
            }
        }
        let needed: f64 = bounds.iter().map(|&(lo, hi)| distance_to_box(lo, hi)).sum();
        if needed > self.budget {
            return Err(Error::Domain(format!(
                "bounds need a budget of at least {needed}, only {} available",
                self.budget
            )));
        }
        Ok(bounds)
    }

    pub fn is_feasible(&self, scenario: &Scenario, x: &StrategyVector) -> bool {
        let Ok(bounds) = self.effective_bounds(scenario) else {
            return false;
        };
        x.0.len() == bounds.len()
            && x.0.iter().zip(&bounds).all(|(v, &(lo, hi))| lo <= *v && *v <= hi)
            && x.l1_norm() <= self.budget
    }

    /// The scenario with the deltas applied.
    pub fn apply(&self, scenario: &Scenario, x: &StrategyVector) -> Result<Scenario> {
        if x.0.len() != self.dims.len() {
            return Err(Error::Config(format!(
                "strategy vector of length {} for {} dimensions",
                x.0.len(),
                self.dims.len()
            )));
        }
        let mut out = scenario.clone();
        for (dim, delta) in self.dims.iter().zip(&x.0) {
            let idx = out.actor_index(&dim.actor)?;
            let actor = &mut out.actors[idx];
            match dim.target {
                StrategyTarget::Capability => actor.capability = (actor.capability + delta).max(0.0),
                StrategyTarget::VoteWeight => actor.vote_weight = Some((actor.vote_weight() + delta).max(0.0)),
            }
        }
        Ok(out)
    }
}

fn distance_to_box(lo: f64, hi: f64) -> f64 {
    if lo > 0.0 {
        lo
    } else if hi < 0.0 {
        -hi
    } else {
        0.0
    }
}

fn soft_threshold(y: f64, lambda: f64) -> f64 {
    y.signum() * (y.abs() - lambda).max(0.0)
}

fn shrink_and_clip(y: &[f64], bounds: &[(f64, f64)], lambda: f64) -> Vec<f64> {
    y.iter()
        .zip(bounds)
        .map(|(&v, &(lo, hi))| soft_threshold(v, lambda).clamp(lo, hi))
        .collect()
}

fn l1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

/// Euclidean projection onto `{x : lo ≤ x ≤ hi, Σ|x| ≤ budget}`.
///
/// The budget multiplier is found by bisection and the result always lies
/// on the feasible side.
pub fn project(y: &[f64], bounds: &[(f64, f64)], budget: f64) -> Vec<f64> {
    let clipped = shrink_and_clip(y, bounds, 0.0);
    if l1(&clipped) <= budget {
        return clipped;
    }
    let (mut lo, mut hi) = (0.0, y.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if l1(&shrink_and_clip(y, bounds, mid)) <= budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    shrink_and_clip(y, bounds, hi)
}

/// Solves the full pipeline and returns the forecast.
pub fn forecast(scenario: &Scenario, solver: &SolverConfig) -> Result<(VictoryMatrix, OutcomeDistribution)> {
    let matrix = victory_matrix(scenario)?;
    let (p, diagnostics) = limiting_distribution(&matrix, &scenario.challenge_model, solver)?;
    if !diagnostics.converged {
        return Err(Error::NonConvergence {
            iterations: diagnostics.iterations,
            residual: diagnostics.final_residual,
        });
    }
    Ok((matrix, p))
}

/// The strategist's expected utility after applying `x`.
pub fn strategy_value(scenario: &Scenario, space: &StrategySpace, x: &StrategyVector, solver: &SolverConfig) -> Result<f64> {
    let strategist = &scenario.actors[scenario.actor_index(&space.strategist)?];
    let perturbed = space.apply(scenario, x)?;
    let (_, p) = forecast(&perturbed, solver)?;
    expected_utility(strategist, &p, &scenario.issue_set)
}

/// Default per-component steps: `1e-4` times the parameter's magnitude.
pub fn default_steps(scenario: &Scenario, space: &StrategySpace) -> Result<Vec<f64>> {
    space
        .dims
        .iter()
        .map(|dim| {
            let base = space.base_value(scenario, dim)?.abs();
            Ok(DEFAULT_RELATIVE_STEP * if base > 0.0 { base } else { 1.0 })
        })
        .collect()
}

/// Central finite-difference gradient of [`strategy_value`] at `x`.
///
/// Where the backward probe would push a parameter below zero, a
/// second-order forward stencil is used instead.
pub fn response_gradient(
    scenario: &Scenario,
    space: &StrategySpace,
    x: &StrategyVector,
    steps: &[f64],
    solver: &SolverConfig,
) -> Result<Vec<f64>> {
    if steps.len() != space.dims.len() || steps.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::Domain("finite-difference steps must be positive, one per dimension".into()));
    }
    let mut probes = Vec::new();
    let mut stencils = Vec::new();
    for (k, dim) in space.dims.iter().enumerate() {
        let h = steps[k];
        let at = |offset: f64| {
            let mut y = x.clone();
            y.0[k] += offset;
            y
        };
        let base = space.base_value(scenario, dim)?;
        let start = probes.len();
        if base + x.0[k] - h >= 0.0 {
            probes.extend([at(h), at(-h)]);
            stencils.push((start, false));
        } else {
            probes.extend([at(0.0), at(h), at(2.0 * h)]);
            stencils.push((start, true));
        }
    }
    let values = probes
        .par_iter()
        .map(|y| strategy_value(scenario, space, y, solver))
        .collect::<Result<Vec<f64>>>()?;
    Ok(stencils
        .iter()
        .zip(steps)
        .map(|(&(s, forward), h)| {
            if forward {
                (-3.0 * values[s] + 4.0 * values[s + 1] - values[s + 2]) / (2.0 * h)
            } else {
                (values[s] - values[s + 1]) / (2.0 * h)
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Absolute finite-difference steps; defaults to [`default_steps`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<f64>>,
    #[serde(default)]
    pub solver: SolverConfig,
}

fn default_iterations() -> usize {
    50
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            iterations: default_iterations(),
            steps: None,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub strategy: StrategyVector,
    /// Expected utility with no deltas applied.
    pub baseline: f64,
    pub achieved: f64,
    /// Objective after each accepted iterate, starting point first.
    pub trace: Vec<f64>,
}

/// Projected gradient ascent with backtracking.
pub fn optimize_strategy(scenario: &Scenario, space: &StrategySpace, config: &OptimizerConfig) -> Result<OptimizationResult> {
    let bounds = space.check(scenario)?;
    let steps = match &config.steps {
        Some(s) => s.clone(),
        None => default_steps(scenario, space)?,
    };
    let n = space.dims.len();
    let value = |x: &StrategyVector| strategy_value(scenario, space, x, &config.solver);

    let baseline = value(&StrategyVector::zero(n))?;
    let mut x = StrategyVector(project(&vec![0.0; n], &bounds, space.budget));
    let mut current = if x.0.iter().all(|&v| v == 0.0) { baseline } else { value(&x)? };
    let mut trace = vec![current];

    if space.budget > 0.0 {
        for _ in 0..config.iterations {
            let g = response_gradient(scenario, space, &x, &steps, &config.solver)?;
            let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !(scale > 0.0) {
                break;
            }
            let mut t = space.budget / scale;
            let mut accepted = None;
            for _ in 0..=MAX_HALVINGS {
                let trial: Vec<f64> = x.0.iter().zip(&g).map(|(a, b)| a + t * b).collect();
                let candidate = StrategyVector(project(&trial, &bounds, space.budget));
                if candidate != x {
                    let v = value(&candidate)?;
                    if v > current {
                        accepted = Some((candidate, v));
                        break;
                    }
                }
                t *= 0.5;
            }
            let Some((next, v)) = accepted else {
                break;
            };
            x = next;
            current = v;
            trace.push(current);
        }
    }
    Ok(OptimizationResult {
        strategy: x,
        baseline,
        achieved: current,
        trace,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobustnessLabel {
    Robust,
    Marginal,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub winner: Option<OptionId>,
    /// `min_j P_wj − 1/2` for the winner, or for the best row when there is none.
    pub margin: f64,
    pub label: RobustnessLabel,
    /// Difference between the two largest entries of the distribution.
    pub probability_gap: f64,
    pub threshold: f64,
}

pub fn classify_robustness(
    matrix: &VictoryMatrix,
    distribution: &OutcomeDistribution,
    robust_threshold: f64,
) -> Result<RobustnessReport> {
    let n = matrix.len();
    if distribution.len() != n {
        return Err(Error::Config(format!(
            "distribution over {} options for a {n}×{n} matrix",
            distribution.len()
        )));
    }
    let row_margin = |i: usize| {
        (0..n)
            .filter(|&j| j != i)
            .map(|j| matrix.get(i, j) - 0.5)
            .fold(0.5, f64::min)
    };
    let margins: Vec<f64> = (0..n).map(row_margin).collect();
    let best = (0..n).fold(0, |b, i| if margins[i] > margins[b] { i } else { b });
    let winner = (n > 0 && margins[best] > 0.0).then_some(OptionId(best));
    let margin = margins.get(best).copied().unwrap_or(0.0);
    let label = match winner {
        None => RobustnessLabel::None,
        Some(_) if margin >= robust_threshold => RobustnessLabel::Robust,
        Some(_) => RobustnessLabel::Marginal,
    };
    let mut sorted = distribution.probabilities().to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let probability_gap = match sorted.as_slice() {
        [] => 0.0,
        [only] => *only,
        [a, b, ..] => a - b,
    };
    Ok(RobustnessReport {
        winner,
        margin,
        label,
        probability_gap,
        threshold: robust_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DistanceShape;
    use crate::voting::VotingRule;
    use proptest::prelude::*;

    fn grid(steps: usize) -> IssueSet {
        IssueSet::Grid1D { min: 0.0, max: 1.0, steps }
    }

    fn near(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn expected_utility_examples() {
        let set = IssueSet::ExplicitList { labels: vec!["a".into(), "b".into()] };
        let actor = Actor::new("x", 1.0, 1, UtilitySpec::table([0.0, 1.0]));
        assert_eq!(expected_utility(&actor, &OutcomeDistribution::point(2, 1), &set).unwrap(), 1.0);
        assert_eq!(expected_utility(&actor, &OutcomeDistribution::uniform(2), &set).unwrap(), 0.5);
    }

    #[test]
    fn risk_examples() {
        let set = grid(2);
        let actor = Actor::new("x", 1.0, 0, UtilitySpec::Distance1D { ideal: 0.0, shape: DistanceShape::Linear });
        assert_eq!(outcome_risk_rms(&actor, &OutcomeDistribution::point(2, 0), &set).unwrap(), 0.0);
        let r = outcome_risk_rms(&actor, &OutcomeDistribution::uniform(2), &set).unwrap();
        assert!(near(r, 0.5f64.sqrt(), 1e-15));
    }

    #[test]
    fn wider_spread_is_riskier() {
        let set = grid(5);
        let actor = Actor::new("x", 1.0, 2, UtilitySpec::Distance1D { ideal: 0.5, shape: DistanceShape::Linear });
        let tight = OutcomeDistribution::new(vec![0.0, 0.2, 0.6, 0.2, 0.0]).unwrap();
        let wide = OutcomeDistribution::new(vec![0.2, 0.0, 0.6, 0.0, 0.2]).unwrap();
        assert_eq!(tight.mode(), wide.mode());
        assert!(outcome_risk_rms(&actor, &wide, &set).unwrap() > outcome_risk_rms(&actor, &tight, &set).unwrap());
    }

    #[test]
    fn projection_respects_budget_and_bounds() {
        let bounds = [(-1.0, 1.0), (-1.0, 1.0), (-0.1, 0.1)];
        let x = project(&[0.9, -0.6, 5.0], &bounds, 1.0);
        assert!(l1(&x) <= 1.0);
        assert!(x.iter().zip(&bounds).all(|(v, (lo, hi))| lo <= v && v <= hi));
        assert!(near(l1(&x), 1.0, 1e-9));
        assert_eq!(project(&[0.2, 0.1, 0.0], &bounds, 1.0), vec![0.2, 0.1, 0.0]);
    }

    proptest! {
        #[test]
        fn projection_is_always_feasible(
            y in prop::collection::vec(-10.0..10.0f64, 1..6),
            widths in prop::collection::vec((0.0..3.0f64, 0.0..3.0f64), 6),
            budget in 0.0..5.0f64,
        ) {
            let bounds: Vec<(f64, f64)> = widths[..y.len()].iter().map(|&(a, b)| (-a, b)).collect();
            let x = project(&y, &bounds, budget);
            prop_assert!(l1(&x) <= budget);
            for (v, (lo, hi)) in x.iter().zip(&bounds) {
                prop_assert!(lo <= v && v <= hi);
            }
        }

        #[test]
        fn expected_utility_is_linear(
            a in prop::collection::vec(0.01..1.0f64, 4),
            b in prop::collection::vec(0.01..1.0f64, 4),
            u in prop::collection::vec(0.0..=1.0f64, 4),
            lambda in 0.0..=1.0f64,
        ) {
            let set = IssueSet::ExplicitList { labels: (0..4).map(|i| i.to_string()).collect() };
            let actor = Actor::new("x", 1.0, 0, UtilitySpec::table(u));
            let norm = |v: &[f64]| { let s: f64 = v.iter().sum(); v.iter().map(|x| x / s).collect::<Vec<_>>() };
            let (p, q) = (norm(&a), norm(&b));
            let mix: Vec<f64> = p.iter().zip(&q).map(|(x, y)| lambda * x + (1.0 - lambda) * y).collect();
            let e = |v: Vec<f64>| expected_utility(&actor, &OutcomeDistribution::new(v).unwrap(), &set).unwrap();
            let lhs = e(mix);
            let rhs = lambda * e(p) + (1.0 - lambda) * e(q);
            prop_assert!(near(lhs, rhs, 1e-12));
        }
    }

    fn symmetric_pair() -> Scenario {
        let set = grid(2);
        let actors = vec![
            Actor::new("L", 1.0, 0, UtilitySpec::table([1.0, 0.0])),
            Actor::new("R", 1.0, 1, UtilitySpec::table([0.0, 1.0])),
        ];
        Scenario::new(set, actors, VotingRule::Proportional)
    }

    fn ally_scenario() -> Scenario {
        let set = grid(3);
        let actors = vec![
            Actor::new("S", 1.0, 0, UtilitySpec::table([1.0, 0.4, 0.0])),
            Actor::new("A", 0.5, 0, UtilitySpec::table([0.9, 0.5, 0.1])),
            Actor::new("O", 1.5, 2, UtilitySpec::table([0.0, 0.3, 1.0])),
        ];
        Scenario::new(set, actors, VotingRule::Proportional)
    }

    fn dims(actor: &str, lower: f64, upper: f64) -> StrategyDim {
        StrategyDim { actor: actor.into(), target: StrategyTarget::Capability, lower, upper }
    }

    #[test]
    fn symmetric_perturbation_has_zero_gradient() {
        let s = symmetric_pair();
        let space = StrategySpace {
            strategist: "L".into(),
            dims: vec![dims("L", -1.0, 1.0), dims("R", -1.0, 1.0)],
            budget: 1.0,
        };
        // Moving both capabilities together leaves the contest unchanged.
        let mut joint = space.clone();
        joint.dims = vec![dims("L", -1.0, 1.0)];
        let g = response_gradient(&s, &space, &StrategyVector::zero(2), &[1e-4, 1e-4], &SolverConfig::default()).unwrap();
        assert!(near(g[0] + g[1], 0.0, 1e-6), "{g:?}");
    }

    #[test]
    fn boosting_an_ally_helps() {
        let s = ally_scenario();
        let space = StrategySpace { strategist: "S".into(), dims: vec![dims("A", -0.5, 1.0)], budget: 1.0 };
        let steps = default_steps(&s, &space).unwrap();
        let g = response_gradient(&s, &space, &StrategyVector::zero(1), &steps, &SolverConfig::default()).unwrap();
        assert!(g[0] > 0.0);
    }

    #[test]
    fn zero_budget_keeps_baseline() {
        let s = ally_scenario();
        let space = StrategySpace { strategist: "S".into(), dims: vec![dims("A", -0.5, 1.0)], budget: 0.0 };
        let r = optimize_strategy(&s, &space, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.strategy, StrategyVector::zero(1));
        assert_eq!(r.achieved, r.baseline);
    }

    #[test]
    fn monotone_dimension_takes_full_budget() {
        let s = ally_scenario();
        let space = StrategySpace { strategist: "S".into(), dims: vec![dims("A", -0.5, 2.0)], budget: 0.75 };
        let r = optimize_strategy(&s, &space, &OptimizerConfig::default()).unwrap();
        assert!(near(r.strategy.0[0], 0.75, 1e-12), "{:?}", r.strategy);
        assert!(r.achieved > r.baseline);
        assert!(r.trace.windows(2).all(|w| w[1] >= w[0]));
        assert!(space.is_feasible(&s, &r.strategy));
    }

    #[test]
    fn infeasible_bounds_are_rejected() {
        let s = ally_scenario();
        let space = StrategySpace { strategist: "S".into(), dims: vec![dims("A", 0.5, 1.0)], budget: 0.25 };
        assert!(matches!(optimize_strategy(&s, &space, &OptimizerConfig::default()), Err(Error::Domain(_))));
        let inverted = StrategySpace { strategist: "S".into(), dims: vec![dims("A", 1.0, 0.5)], budget: 5.0 };
        assert!(matches!(inverted.check(&s), Err(Error::Domain(_))));
    }

    #[test]
    fn forward_stencil_near_zero_capability() {
        let mut s = ally_scenario();
        s.actors[1].capability = 0.0;
        let space = StrategySpace { strategist: "S".into(), dims: vec![dims("A", 0.0, 1.0)], budget: 1.0 };
        let g = response_gradient(&s, &space, &StrategyVector::zero(1), &[1e-3], &SolverConfig::default()).unwrap();
        assert!(g[0].is_finite() && g[0] > 0.0);
    }

    #[test]
    fn robustness_labels() {
        let marginal = VictoryMatrix::from_rows(vec![
            vec![0.5, 0.51, 0.51],
            vec![0.49, 0.5, 0.7],
            vec![0.49, 0.3, 0.5],
        ])
        .unwrap();
        let p = OutcomeDistribution::new(vec![0.4, 0.35, 0.25]).unwrap();
        let r = classify_robustness(&marginal, &p, DEFAULT_ROBUST_THRESHOLD).unwrap();
        assert_eq!(r.winner, Some(OptionId(0)));
        assert_eq!(r.label, RobustnessLabel::Marginal);
        assert!(near(r.margin, 0.01, 1e-12));
        assert!(near(r.probability_gap, 0.05, 1e-12));

        let cycle = VictoryMatrix::from_rows(vec![
            vec![0.5, 0.9, 0.1],
            vec![0.1, 0.5, 0.9],
            vec![0.9, 0.1, 0.5],
        ])
        .unwrap();
        let r = classify_robustness(&cycle, &OutcomeDistribution::uniform(3), DEFAULT_ROBUST_THRESHOLD).unwrap();
        assert_eq!(r.winner, None);
        assert_eq!(r.label, RobustnessLabel::None);

        let strong = VictoryMatrix::from_rows(vec![vec![0.5, 0.8], vec![0.2, 0.5]]).unwrap();
        let r = classify_robustness(&strong, &OutcomeDistribution::new(vec![0.8, 0.2]).unwrap(), 0.1).unwrap();
        assert_eq!(r.label, RobustnessLabel::Robust);
    }
}
