//! Issue-set constructors and the parliament domain-specific utility model.
//!
//! A government is valued by simulating its consequences: for each policy
//! issue, the parties in government contest their ideal positions in a
//! nested one-dimensional election, and an evaluator scores the resulting
//! outcome distribution by its RMS deviation from the evaluator's ideal.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coalitions::{victory_matrix, Commitment};
use crate::error::{Error, Result};
use crate::markov::{limiting_distribution, ChallengeModel, OutcomeDistribution, SolveDiagnostics, SolverConfig};
use crate::model::{
    Actor, DistanceShape, IssueSet, IssueStance, OptionId, Scenario, UtilitySpec, DEFAULT_EPSILON_SCALE,
    MAX_SUBSET_MEMBERS,
};
use crate::voting::VotingRule;

pub fn gen_grid_1d(min: f64, max: f64, steps: usize) -> Result<IssueSet> {
    let set = IssueSet::Grid1D { min, max, steps };
    set.check()?;
    Ok(set)
}

pub fn gen_subset_space(members: usize, include_empty: bool) -> Result<IssueSet> {
    if members > MAX_SUBSET_MEMBERS {
        return Err(Error::Capacity {
            what: "subset space",
            requested: 1u128 << members.min(127),
            limit: 1 << MAX_SUBSET_MEMBERS,
        });
    }
    let set = IssueSet::SubsetSpace {
        members,
        include_empty,
    };
    set.check()?;
    Ok(set)
}

pub fn gen_matching_space(seats: usize, factions: usize) -> Result<IssueSet> {
    let set = IssueSet::MatchingSpace { seats, factions };
    set.check()?;
    Ok(set)
}

/// A one-dimensional policy issue decided inside a government.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyIssue {
    pub label: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl PolicyIssue {
    pub fn grid(&self) -> IssueSet {
        IssueSet::Grid1D {
            min: self.min,
            max: self.max,
            steps: self.steps,
        }
    }

    fn width(&self) -> f64 {
        self.max - self.min
    }
}

/// A party or evaluator with one stance per policy issue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DsumActor {
    pub id: String,
    pub capability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vote_weight: Option<f64>,
    pub issues: Vec<IssueStance>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GovernmentStructure {
    /// Options are coalitions: non-empty subsets of parties.
    #[default]
    Coalition,
    /// Options assign each issue (a cabinet seat) to a single party.
    Cabinet,
}

fn proportional() -> VotingRule {
    VotingRule::Proportional
}

fn default_epsilon_scale() -> f64 {
    DEFAULT_EPSILON_SCALE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParliamentSpec {
    pub issues: Vec<PolicyIssue>,
    pub parties: Vec<DsumActor>,
    pub evaluators: Vec<DsumActor>,
    #[serde(default = "proportional")]
    pub voting_rule: VotingRule,
    #[serde(default)]
    pub commitment: Commitment,
    #[serde(default)]
    pub abstention_enabled: bool,
    #[serde(default = "default_epsilon_scale")]
    pub epsilon_scale: f64,
    #[serde(default)]
    pub sub_solver: SolverConfig,
    /// How party utilities decline with distance in the nested contests.
    #[serde(default)]
    pub utility_shape: DistanceShape,
    #[serde(default)]
    pub structure: GovernmentStructure,
}

impl ParliamentSpec {
    pub fn new(issues: Vec<PolicyIssue>, parties: Vec<DsumActor>, evaluators: Vec<DsumActor>) -> Self {
        ParliamentSpec {
            issues,
            parties,
            evaluators,
            voting_rule: VotingRule::Proportional,
            commitment: Commitment::Uncommitted,
            abstention_enabled: false,
            epsilon_scale: DEFAULT_EPSILON_SCALE,
            sub_solver: SolverConfig::default(),
            utility_shape: DistanceShape::Linear,
            structure: GovernmentStructure::Coalition,
        }
    }

    pub fn evaluator(&self, id: &str) -> Result<&DsumActor> {
        self.evaluators
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::Config(format!("no evaluator with id `{id}`")))
    }

    /// The first-stage issue set.
    pub fn issue_set(&self) -> Result<IssueSet> {
        match self.structure {
            GovernmentStructure::Coalition => gen_subset_space(self.parties.len(), false),
            GovernmentStructure::Cabinet => gen_matching_space(self.issues.len(), self.parties.len()),
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.issues.is_empty() {
            return Err(Error::Config("parliament needs at least one issue".into()));
        }
        if self.parties.is_empty() {
            return Err(Error::Config("parliament needs at least one party".into()));
        }
        for issue in &self.issues {
            issue
                .grid()
                .check()
                .map_err(|e| Error::Config(format!("issue `{}`: {e}", issue.label)))?;
        }
        for (role, list) in [("party", &self.parties), ("evaluator", &self.evaluators)] {
            for actor in list {
                if !(actor.capability >= 0.0) {
                    return Err(Error::Config(format!(
                        "{role} `{}` has negative capability {}",
                        actor.id, actor.capability
                    )));
                }
                if actor.issues.len() != self.issues.len() {
                    return Err(Error::Config(format!(
                        "{role} `{}` has {} issue stances for {} issues",
                        actor.id,
                        actor.issues.len(),
                        self.issues.len()
                    )));
                }
                for (stance, issue) in actor.issues.iter().zip(&self.issues) {
                    if !(issue.min..=issue.max).contains(&stance.ideal) {
                        return Err(Error::Config(format!(
                            "{role} `{}` has ideal {} outside issue `{}`",
                            actor.id, stance.ideal, issue.label
                        )));
                    }
                    if !(stance.salience >= 0.0) {
                        return Err(Error::Config(format!(
                            "{role} `{}` has negative salience on issue `{}`",
                            actor.id, issue.label
                        )));
                    }
                }
            }
        }
        for evaluator in &self.evaluators {
            if !(evaluator.issues.iter().map(|s| s.salience).sum::<f64>() > 0.0) {
                return Err(Error::Config(format!(
                    "evaluator `{}` has no positive salience",
                    evaluator.id
                )));
            }
        }
        Ok(())
    }
}

/// A non-empty set of parties forming a government.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GovernmentOption {
    membership: Vec<bool>,
}

impl GovernmentOption {
    pub fn new(membership: Vec<bool>) -> Result<Self> {
        if !membership.iter().any(|&m| m) {
            return Err(Error::Domain("a government needs at least one party".into()));
        }
        Ok(GovernmentOption { membership })
    }

    pub fn membership(&self) -> &[bool] {
        &self.membership
    }

    pub fn members(&self) -> Vec<usize> {
        self.membership
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect()
    }
}

/// Outcome distribution of one issue under one government.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NestedOutcome {
    pub issue: String,
    pub coordinates: Vec<f64>,
    pub distribution: OutcomeDistribution,
    /// Absent when a single position was on the table.
    pub diagnostics: Option<SolveDiagnostics>,
}

impl NestedOutcome {
    /// RMS deviation from `ideal`, as a fraction of the issue range.
    pub fn normalized_rms(&self, ideal: f64, width: f64) -> f64 {
        let mean_sq: f64 = self
            .coordinates
            .iter()
            .zip(self.distribution.probabilities())
            .map(|(x, p)| p * (ideal - x).powi(2))
            .sum();
        (mean_sq.sqrt() / width).min(1.0)
    }
}

/// Solves the nested contest among `members` on issue `issue`.
pub fn nested_outcome(spec: &ParliamentSpec, members: &[usize], issue: usize) -> Result<NestedOutcome> {
    let policy = &spec.issues[issue];
    let grid = policy.grid();
    let total: f64 = members.iter().map(|&m| spec.parties[m].capability).sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateGovernment {
            members: members.iter().map(|&m| spec.parties[m].id.clone()).collect(),
        });
    }

    let snapped: Vec<OptionId> = members
        .iter()
        .map(|&m| grid.nearest_option(spec.parties[m].issues[issue].ideal).expect("grid issue"))
        .collect();
    let mut positions = snapped.clone();
    positions.sort();
    positions.dedup();
    let coordinates: Vec<f64> = positions.iter().map(|&o| grid.coordinate(o).expect("grid option")).collect();

    if positions.len() == 1 {
        return Ok(NestedOutcome {
            issue: policy.label.clone(),
            coordinates,
            distribution: OutcomeDistribution::point(1, 0),
            diagnostics: None,
        });
    }

    let actors = members
        .iter()
        .zip(&snapped)
        .map(|(&m, at)| {
            let party = &spec.parties[m];
            let ideal = party.issues[issue].ideal;
            let values = coordinates
                .iter()
                .map(|x| spec.utility_shape.utility((x - ideal).abs() / policy.width()))
                .collect::<Vec<_>>();
            Actor {
                id: party.id.clone(),
                capability: party.capability,
                position: OptionId(positions.binary_search(at).expect("own position")),
                vote_weight: party.vote_weight,
                utility: UtilitySpec::Table { values },
                issues: Vec::new(),
            }
        })
        .collect();
    let scenario = Scenario {
        issue_set: IssueSet::ExplicitList {
            labels: coordinates.iter().map(|x| x.to_string()).collect(),
        },
        actors,
        voting_rule: spec.voting_rule,
        commitment: spec.commitment,
        abstention_enabled: spec.abstention_enabled,
        challenge_model: ChallengeModel::Uniform,
        epsilon_scale: spec.epsilon_scale,
    };
    let matrix = victory_matrix(&scenario)?;
    let (distribution, diagnostics) = limiting_distribution(&matrix, &ChallengeModel::Uniform, &spec.sub_solver)?;
    if !diagnostics.converged {
        return Err(Error::NonConvergence {
            iterations: diagnostics.iterations,
            residual: diagnostics.final_residual,
        });
    }
    Ok(NestedOutcome {
        issue: policy.label.clone(),
        coordinates,
        distribution,
        diagnostics: Some(diagnostics),
    })
}

/// Salience-weighted mean of `1 − rms` over the issues.
pub fn utility_from_outcomes(spec: &ParliamentSpec, outcomes: &[NestedOutcome], evaluator: &DsumActor) -> Result<f64> {
    if evaluator.issues.len() != spec.issues.len() {
        return Err(Error::Config(format!(
            "evaluator `{}` has {} stances for {} issues",
            evaluator.id,
            evaluator.issues.len(),
            spec.issues.len()
        )));
    }
    let total: f64 = evaluator.issues.iter().map(|s| s.salience).sum();
    if !(total > 0.0) {
        return Err(Error::Config(format!("evaluator `{}` has no positive salience", evaluator.id)));
    }
    let weighted: f64 = outcomes
        .iter()
        .zip(&evaluator.issues)
        .zip(&spec.issues)
        .map(|((outcome, stance), issue)| stance.salience * (1.0 - outcome.normalized_rms(stance.ideal, issue.width())))
        .sum();
    Ok((weighted / total).clamp(0.0, 1.0))
}

/// Nested outcomes of every issue for a government.
pub fn government_outcomes(spec: &ParliamentSpec, government: &GovernmentOption) -> Result<Vec<NestedOutcome>> {
    if government.membership().len() != spec.parties.len() {
        return Err(Error::Config(format!(
            "government over {} parties in a parliament of {}",
            government.membership().len(),
            spec.parties.len()
        )));
    }
    let members = government.members();
    (0..spec.issues.len()).map(|s| nested_outcome(spec, &members, s)).collect()
}

/// Nested outcomes when each issue is run solely by the party holding its seat.
pub fn cabinet_outcomes(spec: &ParliamentSpec, assignment: &[usize]) -> Result<Vec<NestedOutcome>> {
    if assignment.len() != spec.issues.len() || assignment.iter().any(|&p| p >= spec.parties.len()) {
        return Err(Error::Config("cabinet assignment does not match the parliament".into()));
    }
    assignment
        .iter()
        .enumerate()
        .map(|(s, &party)| nested_outcome(spec, &[party], s))
        .collect()
}

/// An evaluator's utility of a government.
pub fn dsum_government_utility(spec: &ParliamentSpec, government: &GovernmentOption, evaluator: &DsumActor) -> Result<f64> {
    utility_from_outcomes(spec, &government_outcomes(spec, government)?, evaluator)
}

/// First-stage scenario with DSUM utility tables and per-option nested outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct ParliamentModel {
    pub scenario: Scenario,
    /// Indexed by first-stage option, then by issue.
    pub outcomes: Vec<Vec<NestedOutcome>>,
}

pub fn build_parliament_model(spec: &ParliamentSpec) -> Result<ParliamentModel> {
    spec.check()?;
    let issue_set = spec.issue_set()?;
    let outcomes = issue_set
        .options()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|option| match spec.structure {
            GovernmentStructure::Coalition => {
                let government = GovernmentOption::new(issue_set.decode_subset(option).expect("subset option"))?;
                government_outcomes(spec, &government)
            }
            GovernmentStructure::Cabinet => cabinet_outcomes(spec, &issue_set.decode_matching(option).expect("matching option")),
        })
        .collect::<Result<Vec<_>>>()?;

    let actors = spec
        .evaluators
        .iter()
        .map(|evaluator| {
            let values = outcomes
                .iter()
                .map(|o| utility_from_outcomes(spec, o, evaluator))
                .collect::<Result<Vec<f64>>>()?;
            let best = values
                .iter()
                .enumerate()
                .fold(0, |best, (i, &v)| if v > values[best] { i } else { best });
            Ok(Actor {
                id: evaluator.id.clone(),
                capability: evaluator.capability,
                position: OptionId(best),
                vote_weight: evaluator.vote_weight,
                utility: UtilitySpec::Table { values },
                issues: evaluator.issues.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let scenario = Scenario {
        issue_set,
        actors,
        voting_rule: spec.voting_rule,
        commitment: spec.commitment,
        abstention_enabled: spec.abstention_enabled,
        challenge_model: ChallengeModel::Uniform,
        epsilon_scale: spec.epsilon_scale,
    };
    Ok(ParliamentModel { scenario, outcomes })
}

pub fn build_parliament_scenario(spec: &ParliamentSpec) -> Result<Scenario> {
    Ok(build_parliament_model(spec)?.scenario)
}
