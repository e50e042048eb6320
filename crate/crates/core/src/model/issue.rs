use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the number of options an enumerated issue set may hold.
pub const ENUMERATION_BOUND: u128 = 1 << 20;

/// Largest party count accepted by a subset space.
pub const MAX_SUBSET_MEMBERS: usize = 20;

/// Index of an option inside its [`IssueSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OptionId(pub usize);

impl OptionId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for OptionId {
    fn from(index: usize) -> Self {
        OptionId(index)
    }
}

impl std::fmt::Display for OptionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A finite enumeration of the outcomes a group can settle on.
///
/// Combinatorial kinds are never materialized; options are decoded from
/// their index on demand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum IssueSet {
    #[serde(rename = "explicit_list")]
    ExplicitList { labels: Vec<String> },

    /// `steps` evenly spaced coordinates covering `[min, max]`.
    #[serde(rename = "grid_1d")]
    Grid1D { min: f64, max: f64, steps: usize },

    /// Every subset of `members` parties. Bit `b` of the membership mask is
    /// party `b`. Without the empty subset, option `o` has mask `o + 1`.
    #[serde(rename = "subset_space")]
    SubsetSpace {
        members: usize,
        #[serde(default)]
        include_empty: bool,
    },

    /// Every assignment of `seats` seats to `factions` factions, encoded
    /// base-`factions` with seat 0 as the most significant digit.
    #[serde(rename = "matching_space")]
    MatchingSpace { seats: usize, factions: usize },
}

impl IssueSet {
    /// Checks the structural invariants of the set.
    pub fn check(&self) -> Result<()> {
        match *self {
            IssueSet::ExplicitList { ref labels } => {
                if labels.is_empty() {
                    return Err(Error::Domain("explicit list needs at least one label".into()));
                }
            }
            IssueSet::Grid1D { min, max, steps } => {
                if !(min.is_finite() && max.is_finite()) || min >= max {
                    return Err(Error::Domain(format!(
                        "grid bounds must satisfy min < max, got [{min}, {max}]"
                    )));
                }
                if steps < 2 {
                    return Err(Error::Domain(format!("grid needs at least 2 steps, got {steps}")));
                }
            }
            IssueSet::SubsetSpace { members, .. } => {
                if members == 0 {
                    return Err(Error::Domain("subset space needs at least one member".into()));
                }
                if members > MAX_SUBSET_MEMBERS {
                    return Err(Error::Capacity {
                        what: "subset space",
                        requested: 1u128 << members.min(127),
                        limit: 1 << MAX_SUBSET_MEMBERS,
                    });
                }
            }
            IssueSet::MatchingSpace { seats, factions } => {
                if seats == 0 || factions == 0 {
                    return Err(Error::Domain(
                        "matching space needs at least one seat and one faction".into(),
                    ));
                }
                let count = checked_power(factions, seats);
                if count.map_or(true, |c| c > ENUMERATION_BOUND) {
                    return Err(Error::Capacity {
                        what: "matching space",
                        requested: count.unwrap_or(u128::MAX),
                        limit: ENUMERATION_BOUND,
                    });
                }
            }
        }
        Ok(())
    }

    /// Number of options. Assumes [`IssueSet::check`] passes.
    pub fn option_count(&self) -> usize {
        match *self {
            IssueSet::ExplicitList { ref labels } => labels.len(),
            IssueSet::Grid1D { steps, .. } => steps,
            IssueSet::SubsetSpace {
                members,
                include_empty,
            } => {
                let all = 1usize << members;
                if include_empty {
                    all
                } else {
                    all - 1
                }
            }
            IssueSet::MatchingSpace { seats, factions } => factions.pow(seats as u32),
        }
    }

    pub fn contains(&self, option: OptionId) -> bool {
        option.0 < self.option_count()
    }

    pub fn options(&self) -> impl Iterator<Item = OptionId> {
        (0..self.option_count()).map(OptionId)
    }

    pub(crate) fn expect_option(&self, option: OptionId) -> Result<()> {
        if self.contains(option) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "option {option} is outside an issue set of {} options",
                self.option_count()
            )))
        }
    }

    /// Grid coordinate of an option, `None` for non-spatial sets.
    pub fn coordinate(&self, option: OptionId) -> Option<f64> {
        match *self {
            IssueSet::Grid1D { min, max, steps } if option.0 < steps => {
                if option.0 == steps - 1 {
                    Some(max)
                } else {
                    Some(min + option.0 as f64 * (max - min) / (steps - 1) as f64)
                }
            }
            _ => None,
        }
    }

    /// Width of the coordinate range, `None` for non-spatial sets.
    pub fn range(&self) -> Option<(f64, f64)> {
        match *self {
            IssueSet::Grid1D { min, max, .. } => Some((min, max)),
            _ => None,
        }
    }

    /// Grid point closest to `coordinate` (lower index on ties).
    pub fn nearest_option(&self, coordinate: f64) -> Option<OptionId> {
        let IssueSet::Grid1D { min, max, steps } = *self else {
            return None;
        };
        let t = ((coordinate - min) / (max - min)).clamp(0.0, 1.0);
        let raw = t * (steps - 1) as f64;
        let lower = raw.floor();
        let index = if raw - lower > 0.5 { lower + 1.0 } else { lower };
        Some(OptionId((index as usize).min(steps - 1)))
    }

    pub fn label(&self, option: OptionId) -> String {
        match self {
            IssueSet::ExplicitList { labels } => labels
                .get(option.0)
                .cloned()
                .unwrap_or_else(|| option.to_string()),
            IssueSet::Grid1D { .. } => match self.coordinate(option) {
                Some(x) => format!("{x}"),
                None => option.to_string(),
            },
            IssueSet::SubsetSpace { .. } => match self.decode_subset(option) {
                Some(bits) => bits.iter().map(|&b| if b { '1' } else { '0' }).collect(),
                None => option.to_string(),
            },
            IssueSet::MatchingSpace { .. } => match self.decode_matching(option) {
                Some(seats) => seats
                    .iter()
                    .map(|f| f.to_string())
                    .collect::<Vec<_>>()
                    .join("-"),
                None => option.to_string(),
            },
        }
    }

    /// Membership vector of a subset option, indexed by party.
    pub fn decode_subset(&self, option: OptionId) -> Option<Vec<bool>> {
        let IssueSet::SubsetSpace {
            members,
            include_empty,
        } = *self
        else {
            return None;
        };
        if !self.contains(option) {
            return None;
        }
        let mask = if include_empty { option.0 } else { option.0 + 1 };
        Some((0..members).map(|b| mask >> b & 1 == 1).collect())
    }

    pub fn encode_subset(&self, membership: &[bool]) -> Option<OptionId> {
        let IssueSet::SubsetSpace {
            members,
            include_empty,
        } = *self
        else {
            return None;
        };
        if membership.len() != members {
            return None;
        }
        let mask = membership
            .iter()
            .enumerate()
            .fold(0usize, |acc, (b, &on)| acc | (usize::from(on) << b));
        match (mask, include_empty) {
            (0, false) => None,
            (m, true) => Some(OptionId(m)),
            (m, false) => Some(OptionId(m - 1)),
        }
    }

    /// Faction index holding each seat.
    pub fn decode_matching(&self, option: OptionId) -> Option<Vec<usize>> {
        let IssueSet::MatchingSpace { seats, factions } = *self else {
            return None;
        };
        if !self.contains(option) {
            return None;
        }
        let mut rest = option.0;
        let mut out = vec![0; seats];
        for slot in out.iter_mut().rev() {
            *slot = rest % factions;
            rest /= factions;
        }
        Some(out)
    }

    pub fn encode_matching(&self, assignment: &[usize]) -> Option<OptionId> {
        let IssueSet::MatchingSpace { seats, factions } = *self else {
            return None;
        };
        if assignment.len() != seats || assignment.iter().any(|&f| f >= factions) {
            return None;
        }
        Some(OptionId(
            assignment.iter().fold(0usize, |acc, &f| acc * factions + f),
        ))
    }
}

fn checked_power(base: usize, exp: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base as u128)?;
        if acc > ENUMERATION_BOUND {
            return Some(acc);
        }
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_coordinates_are_evenly_spaced() {
        let grid = IssueSet::Grid1D {
            min: 0.0,
            max: 1.0,
            steps: 3,
        };
        let coords: Vec<f64> = grid.options().map(|o| grid.coordinate(o).unwrap()).collect();
        assert_eq!(coords, vec![0.0, 0.5, 1.0]);
        assert_eq!(grid.nearest_option(0.74), Some(OptionId(1)));
        assert_eq!(grid.nearest_option(0.76), Some(OptionId(2)));
        assert_eq!(grid.nearest_option(-3.0), Some(OptionId(0)));
    }

    #[test]
    fn subset_decode_matches_binary() {
        let with_empty = IssueSet::SubsetSpace {
            members: 3,
            include_empty: true,
        };
        assert_eq!(with_empty.option_count(), 8);
        assert_eq!(with_empty.decode_subset(OptionId(5)).unwrap(), vec![true, false, true]);

        let without = IssueSet::SubsetSpace {
            members: 3,
            include_empty: false,
        };
        assert_eq!(without.option_count(), 7);
        assert_eq!(without.decode_subset(OptionId(0)).unwrap(), vec![true, false, false]);
        assert_eq!(without.encode_subset(&[false, false, false]), None);
    }

    #[test]
    fn matching_decode_is_base_factions() {
        let space = IssueSet::MatchingSpace {
            seats: 2,
            factions: 3,
        };
        assert_eq!(space.option_count(), 9);
        assert_eq!(space.decode_matching(OptionId(7)).unwrap(), vec![2, 1]);
        assert_eq!(space.label(OptionId(7)), "2-1");
    }

    #[test]
    fn oversized_spaces_are_rejected() {
        let subset = IssueSet::SubsetSpace {
            members: 21,
            include_empty: false,
        };
        assert!(matches!(subset.check(), Err(Error::Capacity { .. })));
        let matching = IssueSet::MatchingSpace {
            seats: 30,
            factions: 4,
        };
        assert!(matches!(matching.check(), Err(Error::Capacity { .. })));
    }

    proptest! {
        #[test]
        fn subset_round_trip(members in 1usize..12, raw in 0usize..4096, include_empty: bool) {
            let set = IssueSet::SubsetSpace { members, include_empty };
            let option = OptionId(raw % set.option_count());
            let bits = set.decode_subset(option).unwrap();
            prop_assert_eq!(set.encode_subset(&bits), Some(option));
        }

        #[test]
        fn matching_round_trip(seats in 1usize..5, factions in 1usize..6, raw in 0usize..10_000) {
            let set = IssueSet::MatchingSpace { seats, factions };
            let option = OptionId(raw % set.option_count());
            let assignment = set.decode_matching(option).unwrap();
            prop_assert_eq!(set.encode_matching(&assignment), Some(option));
        }
    }
}
