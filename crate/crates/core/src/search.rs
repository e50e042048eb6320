//! Local search for a Condorcet winner in issue sets too large to enumerate.
//!
//! Options are compared in pairs: a neighbour replaces the retained option
//! only if it wins the group vote outright, so ties keep the incumbent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{IssueSet, OptionId, Scenario};
use crate::voting::{group_vote, social_utility};

/// Options adjacent to a given option.
pub trait Neighborhood: Sync {
    fn neighbors(&self, option: OptionId) -> Vec<OptionId>;
}

impl<F> Neighborhood for F
where
    F: Fn(OptionId) -> Vec<OptionId> + Sync,
{
    fn neighbors(&self, option: OptionId) -> Vec<OptionId> {
        self(option)
    }
}

/// Grid ±1 step, single bit-flip, single-seat reassignment, or every other
/// option of an explicit list.
#[derive(Clone, Copy, Debug)]
pub struct StandardNeighborhood<'a>(pub &'a IssueSet);

impl Neighborhood for StandardNeighborhood<'_> {
    fn neighbors(&self, option: OptionId) -> Vec<OptionId> {
        let set = self.0;
        match *set {
            IssueSet::ExplicitList { ref labels } => (0..labels.len()).filter(|&o| o != option.0).map(OptionId).collect(),
            IssueSet::Grid1D { steps, .. } => {
                let mut out = Vec::with_capacity(2);
                if option.0 > 0 {
                    out.push(OptionId(option.0 - 1));
                }
                if option.0 + 1 < steps {
                    out.push(OptionId(option.0 + 1));
                }
                out
            }
            IssueSet::SubsetSpace { members, .. } => {
                let Some(bits) = set.decode_subset(option) else {
                    return Vec::new();
                };
                (0..members)
                    .filter_map(|b| {
                        let mut flipped = bits.clone();
                        flipped[b] = !flipped[b];
                        set.encode_subset(&flipped)
                    })
                    .collect()
            }
            IssueSet::MatchingSpace { seats, factions } => {
                let Some(assignment) = set.decode_matching(option) else {
                    return Vec::new();
                };
                let mut out = Vec::new();
                for seat in 0..seats {
                    for faction in (0..factions).filter(|&f| f != assignment[seat]) {
                        let mut moved = assignment.clone();
                        moved[seat] = faction;
                        out.extend(set.encode_matching(&moved));
                    }
                }
                out
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub option: OptionId,
    /// The retained option after each comparison.
    pub trace: Vec<OptionId>,
    /// `true` when no neighbour of `option` defeats it; `false` if the
    /// comparison budget ran out first.
    pub terminal: bool,
}

fn climb(
    neighborhood: &dyn Neighborhood,
    start: OptionId,
    max_steps: usize,
    mut beats: impl FnMut(OptionId, OptionId) -> Result<bool>,
) -> Result<SearchResult> {
    let mut current = start;
    let mut trace = Vec::new();
    loop {
        let mut moved = false;
        for challenger in neighborhood.neighbors(current) {
            if trace.len() >= max_steps {
                return Ok(SearchResult { option: current, trace, terminal: false });
            }
            if beats(challenger, current)? {
                current = challenger;
                moved = true;
            }
            trace.push(current);
            if moved {
                break;
            }
        }
        if !moved {
            return Ok(SearchResult { option: current, trace, terminal: true });
        }
    }
}

fn check_start(scenario: &Scenario, start: OptionId) -> Result<()> {
    if !scenario.issue_set.contains(start) {
        return Err(Error::Domain(format!("start option {start} is outside the issue set")));
    }
    if scenario.actors.is_empty() {
        return Err(Error::Domain("local search needs at least one actor".into()));
    }
    Ok(())
}

/// First-improvement pairwise retention under the scenario's voting rule.
pub fn local_search_cw(
    scenario: &Scenario,
    neighborhood: &dyn Neighborhood,
    start: OptionId,
    max_steps: usize,
) -> Result<SearchResult> {
    check_start(scenario, start)?;
    climb(neighborhood, start, max_steps, |challenger, incumbent| {
        Ok(group_vote(scenario.voting_rule, &scenario.actors, challenger, incumbent, &scenario.issue_set)? > 0.0)
    })
}

/// First-improvement hill-climbing on `ω`.
pub fn hill_climb_social_utility(
    scenario: &Scenario,
    neighborhood: &dyn Neighborhood,
    start: OptionId,
    max_steps: usize,
) -> Result<SearchResult> {
    check_start(scenario, start)?;
    let omega = |o| social_utility(&scenario.actors, o, &scenario.issue_set);
    climb(neighborhood, start, max_steps, |challenger, incumbent| Ok(omega(challenger)? > omega(incumbent)?))
}

/// Independent searches from several starts, results in start order.
pub fn local_search_restarts(
    scenario: &Scenario,
    neighborhood: &dyn Neighborhood,
    starts: &[OptionId],
    max_steps: usize,
) -> Result<Vec<SearchResult>> {
    starts
        .par_iter()
        .map(|&s| local_search_cw(scenario, neighborhood, s, max_steps))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Actor, DistanceShape, UtilitySpec};
    use crate::voting::VotingRule;
    use proptest::prelude::*;

    #[test]
    fn grid_neighbors() {
        let set = IssueSet::Grid1D { min: 0.0, max: 1.0, steps: 3 };
        let nb = StandardNeighborhood(&set);
        assert_eq!(nb.neighbors(OptionId(0)), vec![OptionId(1)]);
        assert_eq!(nb.neighbors(OptionId(1)), vec![OptionId(0), OptionId(2)]);
    }

    #[test]
    fn bit_flip_skips_empty_subset() {
        let set = IssueSet::SubsetSpace { members: 3, include_empty: false };
        let nb = StandardNeighborhood(&set);
        let single = set.encode_subset(&[false, true, false]).unwrap();
        assert_eq!(nb.neighbors(single).len(), 2);
        let with_empty = IssueSet::SubsetSpace { members: 3, include_empty: true };
        let single = with_empty.encode_subset(&[false, true, false]).unwrap();
        assert_eq!(StandardNeighborhood(&with_empty).neighbors(single).len(), 3);
    }

    #[test]
    fn seat_reassignment_neighbors() {
        let set = IssueSet::MatchingSpace { seats: 2, factions: 3 };
        let nb = StandardNeighborhood(&set);
        let n = nb.neighbors(OptionId(0));
        assert_eq!(n.len(), 4);
        assert!(n.iter().all(|o| set.contains(*o) && *o != OptionId(0)));
    }

    fn shared_quadratic(steps: usize, ideal: f64) -> Scenario {
        let set = IssueSet::Grid1D { min: 0.0, max: 1.0, steps };
        let actors = (0..3)
            .map(|i| Actor::new(format!("a{i}"), 1.0 + i as f64, 0, UtilitySpec::Distance1D { ideal, shape: DistanceShape::Quadratic }))
            .collect();
        Scenario::new(set, actors, VotingRule::Proportional)
    }

    #[test]
    fn concave_surface_reaches_global_maximum_from_anywhere() {
        let s = shared_quadratic(21, 0.35);
        let nb = StandardNeighborhood(&s.issue_set);
        for start in s.issue_set.options() {
            let r = local_search_cw(&s, &nb, start, 1000).unwrap();
            assert!(r.terminal);
            assert_eq!(r.option, OptionId(7));
        }
    }

    #[test]
    fn two_basins_give_path_dependence() {
        let set = IssueSet::Grid1D { min: 0.0, max: 1.0, steps: 11 };
        let actor = Actor::new("a", 1.0, 0, UtilitySpec::peaks(&[(0.0, 0.2), (0.2, 0.9), (0.5, 0.1), (0.8, 1.0), (1.0, 0.3)]));
        let s = Scenario::new(set, vec![actor], VotingRule::Proportional);
        let nb = StandardNeighborhood(&s.issue_set);
        let left = local_search_cw(&s, &nb, OptionId(0), 1000).unwrap();
        let right = local_search_cw(&s, &nb, OptionId(10), 1000).unwrap();
        assert_eq!(left.option, OptionId(2));
        assert_eq!(right.option, OptionId(8));
    }

    #[test]
    fn step_budget_exhaustion_is_flagged() {
        let s = shared_quadratic(21, 1.0);
        let nb = StandardNeighborhood(&s.issue_set);
        let r = local_search_cw(&s, &nb, OptionId(0), 3).unwrap();
        assert!(!r.terminal);
        assert_eq!(r.trace.len(), 3);
    }

    #[test]
    fn ties_keep_the_incumbent() {
        let set = IssueSet::ExplicitList { labels: vec!["x".into(), "y".into()] };
        let s = Scenario::new(set, vec![Actor::new("a", 1.0, 0, UtilitySpec::table([0.5, 0.5]))], VotingRule::Proportional);
        let r = local_search_cw(&s, &StandardNeighborhood(&s.issue_set), OptionId(0), 10).unwrap();
        assert_eq!(r.option, OptionId(0));
        assert!(r.terminal);
    }

    #[test]
    fn closures_are_neighborhoods() {
        let s = shared_quadratic(5, 1.0);
        let jump = |o: OptionId| if o.0 == 0 { vec![OptionId(4)] } else { vec![] };
        let r = local_search_cw(&s, &jump, OptionId(0), 10).unwrap();
        assert_eq!(r.option, OptionId(4));
    }

    #[test]
    fn restarts_preserve_order() {
        let s = shared_quadratic(11, 0.5);
        let nb = StandardNeighborhood(&s.issue_set);
        let starts = [OptionId(0), OptionId(10), OptionId(3)];
        let rs = local_search_restarts(&s, &nb, &starts, 100).unwrap();
        for (r, &start) in rs.iter().zip(&starts) {
            assert_eq!(*r, local_search_cw(&s, &nb, start, 100).unwrap());
        }
    }

    proptest! {
        #[test]
        fn proportional_retention_matches_omega_climb(
            tables in prop::collection::vec(prop::collection::vec(0.0..=1.0f64, 16), 1..5),
            caps in prop::collection::vec(0.1..3.0f64, 5),
            start in 0usize..16,
        ) {
            let set = IssueSet::SubsetSpace { members: 4, include_empty: true };
            let actors = tables
                .iter()
                .zip(&caps)
                .enumerate()
                .map(|(i, (t, &c))| Actor::new(format!("a{i}"), c, 0, UtilitySpec::table(t.clone())))
                .collect();
            let s = Scenario::new(set, actors, VotingRule::Proportional);
            let nb = StandardNeighborhood(&s.issue_set);
            let a = local_search_cw(&s, &nb, OptionId(start), 10_000).unwrap();
            let b = hill_climb_social_utility(&s, &nb, OptionId(start), 10_000).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
