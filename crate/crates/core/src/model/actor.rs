use serde::{Deserialize, Serialize};

use super::issue::{IssueSet, OptionId};
use crate::error::{Error, Result};
use crate::generators::{self, ParliamentSpec};

/// An actor's stance on one policy issue of a parliament model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IssueStance {
    pub ideal: f64,
    #[serde(default = "one")]
    pub salience: f64,
}

fn one() -> f64 {
    1.0
}

/// Shape of the decline of a distance-based utility.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceShape {
    #[default]
    Linear,
    Quadratic,
}

impl DistanceShape {
    /// Utility of a point at normalized distance `d ∈ [0, 1]` from the ideal.
    pub fn utility(self, d: f64) -> f64 {
        let d = d.clamp(0.0, 1.0);
        match self {
            DistanceShape::Linear => 1.0 - d,
            DistanceShape::Quadratic => 1.0 - d * d,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Knot {
    pub coordinate: f64,
    pub utility: f64,
}

/// Utility of a government computed by nested per-issue solves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DsumUtility {
    pub parliament: ParliamentSpec,
    /// Id of the evaluating actor inside `parliament.evaluators`.
    pub evaluator: String,
}

/// How an actor values each option. All evaluations lie in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum UtilitySpec {
    #[serde(rename = "table")]
    Table { values: Vec<f64> },

    /// Declines with normalized distance from `ideal` on a grid.
    #[serde(rename = "distance_1d")]
    Distance1D {
        ideal: f64,
        #[serde(default)]
        shape: DistanceShape,
    },

    /// Linear interpolation between knots; flat beyond the end knots.
    #[serde(rename = "piecewise_peaks")]
    PiecewisePeaks { knots: Vec<Knot> },

    #[serde(rename = "dsum_government")]
    DsumGovernment(Box<DsumUtility>),
}

impl UtilitySpec {
    pub fn table(values: impl Into<Vec<f64>>) -> Self {
        UtilitySpec::Table {
            values: values.into(),
        }
    }

    pub fn peaks(knots: &[(f64, f64)]) -> Self {
        UtilitySpec::PiecewisePeaks {
            knots: knots
                .iter()
                .map(|&(coordinate, utility)| Knot {
                    coordinate,
                    utility,
                })
                .collect(),
        }
    }

    /// Checks that this spec can be evaluated on `issue_set`.
    pub fn check_against(&self, issue_set: &IssueSet) -> Result<()> {
        match self {
            UtilitySpec::Table { values } => {
                if values.len() != issue_set.option_count() {
                    return Err(Error::Config(format!(
                        "utility table has {} entries but the issue set has {} options",
                        values.len(),
                        issue_set.option_count()
                    )));
                }
                if let Some((i, v)) = values
                    .iter()
                    .enumerate()
                    .find(|(_, v)| !(0.0..=1.0).contains(*v))
                {
                    return Err(Error::Config(format!(
                        "utility table entry {i} is {v}, outside [0, 1]"
                    )));
                }
            }
            UtilitySpec::Distance1D { ideal, .. } => {
                let Some((min, max)) = issue_set.range() else {
                    return Err(Error::Config(
                        "distance utility needs a one-dimensional grid".into(),
                    ));
                };
                if !(min..=max).contains(ideal) {
                    return Err(Error::Config(format!(
                        "ideal {ideal} lies outside the grid range [{min}, {max}]"
                    )));
                }
            }
            UtilitySpec::PiecewisePeaks { knots } => {
                if issue_set.range().is_none() {
                    return Err(Error::Config(
                        "piecewise utility needs a one-dimensional grid".into(),
                    ));
                }
                if knots.is_empty() {
                    return Err(Error::Config("piecewise utility needs at least one knot".into()));
                }
                if knots.windows(2).any(|w| w[0].coordinate >= w[1].coordinate) {
                    return Err(Error::Config(
                        "piecewise knots must be strictly increasing in coordinate".into(),
                    ));
                }
                if let Some(k) = knots.iter().find(|k| !(0.0..=1.0).contains(&k.utility)) {
                    return Err(Error::Config(format!(
                        "knot at {} has utility {}, outside [0, 1]",
                        k.coordinate, k.utility
                    )));
                }
            }
            UtilitySpec::DsumGovernment(dsum) => {
                let parties = dsum.parliament.parties.len();
                if *issue_set
                    != (IssueSet::SubsetSpace {
                        members: parties,
                        include_empty: false,
                    })
                {
                    return Err(Error::Config(format!(
                        "government utility needs a subset space over {parties} parties without the empty subset"
                    )));
                }
                dsum.parliament.evaluator(&dsum.evaluator)?;
            }
        }
        Ok(())
    }
}

/// A participant: its capability to exert influence, the option it holds,
/// and how it values every option.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Actor {
    pub id: String,
    pub capability: f64,
    pub position: OptionId,
    /// Multiplier on third-party votes; falls back to `capability`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vote_weight: Option<f64>,
    pub utility: UtilitySpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub issues: Vec<IssueStance>,
}

impl Actor {
    pub fn new(id: impl Into<String>, capability: f64, position: usize, utility: UtilitySpec) -> Self {
        Actor {
            id: id.into(),
            capability,
            position: OptionId(position),
            vote_weight: None,
            utility,
            issues: Vec::new(),
        }
    }

    pub fn vote_weight(&self) -> f64 {
        self.vote_weight.unwrap_or(self.capability)
    }
}

/// `U_actor(option)`.
pub fn utility_of(actor: &Actor, option: OptionId, issue_set: &IssueSet) -> Result<f64> {
    issue_set.expect_option(option)?;
    let value = match &actor.utility {
        UtilitySpec::Table { values } => {
            if values.len() != issue_set.option_count() {
                return Err(Error::Config(format!(
                    "actor `{}` has a utility table of {} entries for {} options",
                    actor.id,
                    values.len(),
                    issue_set.option_count()
                )));
            }
            values[option.0]
        }
        UtilitySpec::Distance1D { ideal, shape } => {
            let (x, (min, max)) = grid_point(actor, option, issue_set)?;
            shape.utility((x - ideal).abs() / (max - min))
        }
        UtilitySpec::PiecewisePeaks { knots } => {
            let (x, _) = grid_point(actor, option, issue_set)?;
            interpolate(knots, x).ok_or_else(|| {
                Error::Config(format!("actor `{}` has no utility knots", actor.id))
            })?
        }
        UtilitySpec::DsumGovernment(dsum) => {
            let membership = issue_set.decode_subset(option).ok_or_else(|| {
                Error::Config(format!(
                    "actor `{}` values governments but the issue set is not a subset space",
                    actor.id
                ))
            })?;
            let evaluator = dsum.parliament.evaluator(&dsum.evaluator)?;
            let government = generators::GovernmentOption::new(membership)?;
            generators::dsum_government_utility(&dsum.parliament, &government, evaluator)?
        }
    };
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::Config(format!(
            "actor `{}` values option {option} at {value}, outside [0, 1]",
            actor.id
        )));
    }
    Ok(value)
}

/// Utility of a state: the sum of the utilities of every held position.
pub fn state_utility(actor: &Actor, positions: &[OptionId], issue_set: &IssueSet) -> Result<f64> {
    if positions.is_empty() {
        return Err(Error::Domain("state utility of an empty position list".into()));
    }
    positions
        .iter()
        .map(|&p| utility_of(actor, p, issue_set))
        .sum()
}

fn grid_point(actor: &Actor, option: OptionId, issue_set: &IssueSet) -> Result<(f64, (f64, f64))> {
    match (issue_set.coordinate(option), issue_set.range()) {
        (Some(x), Some(range)) => Ok((x, range)),
        _ => Err(Error::Config(format!(
            "actor `{}` has a spatial utility on a non-spatial issue set",
            actor.id
        ))),
    }
}

fn interpolate(knots: &[Knot], x: f64) -> Option<f64> {
    let first = knots.first()?;
    let last = knots.last()?;
    if x <= first.coordinate {
        return Some(first.utility);
    }
    if x >= last.coordinate {
        return Some(last.utility);
    }
    knots.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        (x <= b.coordinate).then(|| {
            let t = (x - a.coordinate) / (b.coordinate - a.coordinate);
            a.utility + t * (b.utility - a.utility)
        })
    })
}
