//! Individual and group voting rules, social utility and Condorcet winners.

use serde::{Deserialize, Serialize};

use crate::coalitions::VictoryMatrix;
use crate::error::{Error, Result};
use crate::model::{utility_of, Actor, IssueSet, OptionId};

/// Votes smaller than this are indistinguishable from abstention.
pub const VOTE_TOLERANCE: f64 = 1e-12;

/// Default bound on the options `condorcet_classify` compares pairwise.
pub const CLASSIFY_BOUND: usize = 4096;

/// Maps an actor's stake in a contest to the effort it exerts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VotingRule {
    /// Full weight behind whichever side is preferred.
    Binary,
    /// Effort in strict proportion to the utility difference.
    Proportional,
    /// Cube of the utility difference: indifferent to small stakes.
    Cubic,
}

impl VotingRule {
    /// Effort of weight `weight` given a stake `delta` in favour of the first option.
    pub fn apply(self, weight: f64, delta: f64) -> f64 {
        match self {
            VotingRule::Binary => {
                if delta.abs() < VOTE_TOLERANCE {
                    0.0
                } else {
                    weight * delta.signum()
                }
            }
            VotingRule::Proportional => weight * delta,
            VotingRule::Cubic => weight * (delta * delta * delta),
        }
    }
}

/// `v_i(a:b)`: positive favours `a`.
pub fn individual_vote(
    rule: VotingRule,
    actor: &Actor,
    a: OptionId,
    b: OptionId,
    issue_set: &IssueSet,
) -> Result<f64> {
    let delta = utility_of(actor, a, issue_set)? - utility_of(actor, b, issue_set)?;
    Ok(rule.apply(actor.capability, delta))
}

/// `V(a:b)`, the sum of individual votes.
pub fn group_vote(
    rule: VotingRule,
    actors: &[Actor],
    a: OptionId,
    b: OptionId,
    issue_set: &IssueSet,
) -> Result<f64> {
    if actors.is_empty() {
        return Err(Error::Domain("group vote needs at least one actor".into()));
    }
    actors
        .iter()
        .map(|actor| individual_vote(rule, actor, a, b, issue_set))
        .sum()
}

/// Capability-weighted social utility `ω(x) = Σ c_i U_i(x)`.
pub fn social_utility(actors: &[Actor], option: OptionId, issue_set: &IssueSet) -> Result<f64> {
    actors
        .iter()
        .map(|actor| Ok(actor.capability * utility_of(actor, option, issue_set)?))
        .sum()
}

/// Probability that `actor` votes for `a` over `b` under the Luce model
/// with unit-scaled utilities.
pub fn luce_vote_probability(
    actor: &Actor,
    a: OptionId,
    b: OptionId,
    issue_set: &IssueSet,
) -> Result<f64> {
    let delta = utility_of(actor, a, issue_set)? - utility_of(actor, b, issue_set)?;
    Ok((1.0 + delta) / 2.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "options", rename_all = "snake_case")]
pub enum CondorcetOutcome {
    StrongWinner(OptionId),
    WeakWinners(Vec<OptionId>),
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondorcetClassification {
    pub outcome: CondorcetOutcome,
    /// Options in the order they were classified.
    pub options: Vec<OptionId>,
    /// `min` over rivals of the option's net vote; infinite without rivals.
    pub margins: Vec<f64>,
}

impl CondorcetClassification {
    pub fn strong_winner(&self) -> Option<OptionId> {
        match self.outcome {
            CondorcetOutcome::StrongWinner(o) => Some(o),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.outcome {
            CondorcetOutcome::StrongWinner(_) => "strong",
            CondorcetOutcome::WeakWinners(_) => "weak",
            CondorcetOutcome::None => "none",
        }
    }
}

/// Deterministic classification of `options` by exhaustive pairwise group votes.
pub fn condorcet_classify(
    rule: VotingRule,
    actors: &[Actor],
    options: &[OptionId],
    issue_set: &IssueSet,
) -> Result<CondorcetClassification> {
    condorcet_classify_bounded(rule, actors, options, issue_set, CLASSIFY_BOUND)
}

pub fn condorcet_classify_bounded(
    rule: VotingRule,
    actors: &[Actor],
    options: &[OptionId],
    issue_set: &IssueSet,
    bound: usize,
) -> Result<CondorcetClassification> {
    check_option_count(options.len(), bound)?;
    if actors.is_empty() {
        return Err(Error::Domain("classification needs at least one actor".into()));
    }
    let utilities = actors
        .iter()
        .map(|actor| {
            options
                .iter()
                .map(|&o| utility_of(actor, o, issue_set))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let n = options.len();
    let votes = |a: usize, b: usize| -> f64 {
        actors
            .iter()
            .zip(&utilities)
            .map(|(actor, u)| rule.apply(actor.capability, u[a] - u[b]))
            .sum()
    };
    Ok(classify_by(options, n, votes))
}

/// Classification read off a victory matrix: `i` beats `j` when `P_ij > 1/2`.
pub fn condorcet_classify_matrix(matrix: &VictoryMatrix) -> CondorcetClassification {
    let n = matrix.len();
    let options: Vec<OptionId> = (0..n).map(OptionId).collect();
    classify_by(&options, n, |i, j| matrix.get(i, j) - 0.5)
}

fn check_option_count(count: usize, bound: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::Domain("classification needs at least one option".into()));
    }
    if count > bound {
        return Err(Error::Capacity {
            what: "Condorcet classification",
            requested: count as u128,
            limit: bound as u128,
        });
    }
    Ok(())
}

fn classify_by(
    options: &[OptionId],
    n: usize,
    net: impl Fn(usize, usize) -> f64,
) -> CondorcetClassification {
    let mut margins = vec![f64::INFINITY; n];
    let mut beats_some = vec![false; n];
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let mut v = net(a, b);
            if v.abs() < VOTE_TOLERANCE {
                v = 0.0;
            }
            margins[a] = margins[a].min(v);
            beats_some[a] |= v > 0.0;
        }
    }
    let strong = (0..n).find(|&a| margins[a] > 0.0);
    let outcome = match strong {
        Some(a) => CondorcetOutcome::StrongWinner(options[a]),
        None => {
            let weak: Vec<OptionId> = (0..n)
                .filter(|&a| margins[a] >= 0.0 && beats_some[a])
                .map(|a| options[a])
                .collect();
            if weak.is_empty() {
                CondorcetOutcome::None
            } else {
                CondorcetOutcome::WeakWinners(weak)
            }
        }
    };
    CondorcetClassification {
        outcome,
        options: options.to_vec(),
        margins,
    }
}

/// Capability-weighted median of the actors' grid positions: the lowest
/// coordinate at which cumulative capability reaches half the total.
pub fn median_voter_position(actors: &[Actor], grid: &IssueSet) -> Result<OptionId> {
    if actors.is_empty() {
        return Err(Error::Domain("median voter of an empty actor list".into()));
    }
    if grid.range().is_none() {
        return Err(Error::Config("median voter needs a one-dimensional grid".into()));
    }
    let mut mass = vec![0.0; grid.option_count()];
    for actor in actors {
        grid.expect_option(actor.position)?;
        mass[actor.position.0] += actor.capability;
    }
    let total: f64 = mass.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Domain("median voter needs positive total capability".into()));
    }
    let mut cumulative = 0.0;
    for (i, m) in mass.iter().enumerate() {
        cumulative += m;
        if cumulative >= total / 2.0 {
            return Ok(OptionId(i));
        }
    }
    Ok(OptionId(mass.len() - 1))
}
