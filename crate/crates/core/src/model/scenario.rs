use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::actor::{utility_of, Actor};
use super::issue::{IssueSet, OptionId};
use crate::coalitions::Commitment;
use crate::error::{Error, Result};
use crate::markov::ChallengeModel;
use crate::voting::VotingRule;

pub const DEFAULT_EPSILON_SCALE: f64 = 1e-6;

fn default_epsilon_scale() -> f64 {
    DEFAULT_EPSILON_SCALE
}

/// Everything needed to assemble a victory matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub issue_set: IssueSet,
    pub actors: Vec<Actor>,
    pub voting_rule: VotingRule,
    #[serde(default)]
    pub commitment: Commitment,
    #[serde(default)]
    pub abstention_enabled: bool,
    #[serde(default)]
    pub challenge_model: ChallengeModel,
    /// Fraction of the RMS coalition strength added to both sides of every contest.
    #[serde(default = "default_epsilon_scale")]
    pub epsilon_scale: f64,
}

impl Scenario {
    pub fn new(issue_set: IssueSet, actors: Vec<Actor>, voting_rule: VotingRule) -> Self {
        Scenario {
            issue_set,
            actors,
            voting_rule,
            commitment: Commitment::Uncommitted,
            abstention_enabled: false,
            challenge_model: ChallengeModel::Uniform,
            epsilon_scale: DEFAULT_EPSILON_SCALE,
        }
    }

    pub fn option_count(&self) -> usize {
        self.issue_set.option_count()
    }

    pub fn actor_index(&self, id: &str) -> Result<usize> {
        self.actors
            .iter()
            .position(|a| a.id == id)
            .ok_or_else(|| Error::Config(format!("no actor with id `{id}`")))
    }

    /// Evaluates every actor's utility of every option, row per actor.
    pub fn utility_table(&self) -> Result<UtilityTable> {
        let options = self.option_count();
        let rows = self
            .actors
            .par_iter()
            .map(|actor| {
                (0..options)
                    .map(|o| utility_of(actor, OptionId(o), &self.issue_set))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(UtilityTable { rows })
    }
}

/// Precomputed `U_actor(option)` values.
#[derive(Clone, Debug, PartialEq)]
pub struct UtilityTable {
    rows: Vec<Vec<f64>>,
}

impl UtilityTable {
    pub fn get(&self, actor: usize, option: OptionId) -> f64 {
        self.rows[actor][option.0]
    }

    pub fn row(&self, actor: usize) -> &[f64] {
        &self.rows[actor]
    }
}

/// One violated invariant, located by a field path such as `actors[1].capability`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }

    /// Prefixes every path, for embedding a report inside a larger document.
    pub fn nested(mut self, prefix: &str) -> Self {
        for v in &mut self.violations {
            v.path = format!("{prefix}.{}", v.path);
        }
        self
    }
}

/// Collects every invariant violation in `s`. Never fails.
pub fn validate_scenario(s: &Scenario) -> ValidationReport {
    let mut report = ValidationReport::default();
    let issue_ok = match s.issue_set.check() {
        Ok(()) => true,
        Err(e) => {
            report.push("issue_set", e.to_string());
            false
        }
    };
    if s.actors.len() < 2 {
        report.push(
            "actors",
            format!("a scenario needs at least 2 actors, found {}", s.actors.len()),
        );
    }
    if !(s.epsilon_scale > 0.0 && s.epsilon_scale.is_finite()) {
        report.push("epsilon_scale", format!("must be positive, got {}", s.epsilon_scale));
    }

    let mut seen = std::collections::HashSet::new();
    for (i, actor) in s.actors.iter().enumerate() {
        let at = |field: &str| format!("actors[{i}].{field}");
        if !seen.insert(actor.id.as_str()) {
            report.push(at("id"), format!("duplicate actor id `{}`", actor.id));
        }
        if !(actor.capability >= 0.0 && actor.capability.is_finite()) {
            report.push(
                at("capability"),
                format!("actor `{}` has capability {}, must be >= 0", actor.id, actor.capability),
            );
        }
        if let Some(w) = actor.vote_weight {
            if !(w >= 0.0 && w.is_finite()) {
                report.push(
                    at("vote_weight"),
                    format!("actor `{}` has vote weight {w}, must be >= 0", actor.id),
                );
            }
        }
        for (k, stance) in actor.issues.iter().enumerate() {
            if !(stance.salience >= 0.0) {
                report.push(
                    format!("actors[{i}].issues[{k}].salience"),
                    format!("actor `{}` has negative salience {}", actor.id, stance.salience),
                );
            }
        }
        if !actor.issues.is_empty() && actor.issues.iter().all(|s| s.salience <= 0.0) {
            report.push(
                at("issues"),
                format!("actor `{}` needs at least one positive salience", actor.id),
            );
        }
        if issue_ok {
            if !s.issue_set.contains(actor.position) {
                report.push(
                    at("position"),
                    format!(
                        "actor `{}` holds option {} of {}",
                        actor.id,
                        actor.position.0,
                        s.issue_set.option_count()
                    ),
                );
            }
            if let Err(e) = actor.utility.check_against(&s.issue_set) {
                report.push(at("utility"), format!("actor `{}`: {e}", actor.id));
            }
        }
    }

    if let ChallengeModel::Matrix { probabilities } = &s.challenge_model {
        if issue_ok {
            for (path, message) in probabilities_violations(probabilities, s.option_count()) {
                report.push(format!("challenge_model.{path}"), message);
            }
        }
    }
    report
}

pub(crate) fn probabilities_violations(rows: &[Vec<f64>], n: usize) -> Vec<(String, String)> {
    let mut out = Vec::new();
    if rows.len() != n {
        out.push((
            "probabilities".to_string(),
            format!("expected {n} rows, found {}", rows.len()),
        ));
        return out;
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            out.push((
                format!("probabilities[{i}]"),
                format!("expected {n} entries, found {}", row.len()),
            ));
            continue;
        }
        if let Some((j, c)) = row.iter().enumerate().find(|(_, c)| !(**c >= 0.0)) {
            out.push((
                format!("probabilities[{i}][{j}]"),
                format!("challenge probability {c} is negative"),
            ));
        }
        let total: f64 = row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, c)| c).sum();
        if total > 1.0 + 1e-12 {
            out.push((
                format!("probabilities[{i}]"),
                format!("challenges to option {i} sum to {total} > 1"),
            ));
        }
    }
    out
}

/// Returns `s` unchanged when valid, or a configuration error listing every violation.
pub fn require_valid(s: &Scenario) -> Result<()> {
    let report = validate_scenario(s);
    if report.is_valid() {
        Ok(())
    } else {
        let text = report
            .violations
            .iter()
            .map(|v| format!("{}: {}", v.path, v.message))
            .collect::<Vec<_>>()
            .join("; ");
        Err(Error::Config(text))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::UtilitySpec;

    fn pair() -> Scenario {
        let issue_set = IssueSet::ExplicitList {
            labels: vec!["a".into(), "b".into()],
        };
        let actors = vec![
            Actor::new("A", 1.0, 0, UtilitySpec::table([1.0, 0.0])),
            Actor::new("B", 1.0, 1, UtilitySpec::table([0.0, 1.0])),
        ];
        Scenario::new(issue_set, actors, VotingRule::Proportional)
    }

    #[test]
    fn well_formed_scenario_is_clean() {
        assert!(validate_scenario(&pair()).is_valid());
    }

    #[test]
    fn negative_capability_names_actor_and_field() {
        let mut s = pair();
        s.actors[1].capability = -1.0;
        let report = validate_scenario(&s);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].path, "actors[1].capability");
        assert!(report.violations[0].message.contains("`B`"));
    }

    #[test]
    fn short_table_is_one_violation() {
        let mut s = pair();
        s.actors[0].utility = UtilitySpec::table([1.0]);
        let report = validate_scenario(&s);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].path, "actors[0].utility");
    }

    #[test]
    fn overloaded_challenge_rows_are_reported() {
        let mut s = pair();
        s.challenge_model = ChallengeModel::Matrix {
            probabilities: vec![vec![0.0, 1.5], vec![0.5, 0.0]],
        };
        let report = validate_scenario(&s);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].path, "challenge_model.probabilities[0]");
    }

    #[test]
    fn single_actor_and_bad_position() {
        let mut s = pair();
        s.actors.truncate(1);
        s.actors[0].position = OptionId(5);
        let paths: Vec<_> = validate_scenario(&s)
            .violations
            .into_iter()
            .map(|v| v.path)
            .collect();
        assert_eq!(paths, vec!["actors", "actors[0].position"]);
    }
}
