use serde::{Deserialize, Serialize};

use super::actor::{utility_of, Actor};
use super::issue::{IssueSet, OptionId};
use crate::error::{Error, Result};

/// Largest option count for which every ordering is enumerated.
pub const EMBEDDING_BOUND: usize = 8;

/// An ordering ruled out because one actor's utility is not unimodal along it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refutation {
    pub ordering: Vec<OptionId>,
    pub actor: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub embeddable: bool,
    /// A common ordering along which every actor is single-peaked.
    pub witness: Option<Vec<OptionId>>,
    /// When not embeddable: one refuting actor for each of the `n!` orderings.
    pub refutations: Vec<Refutation>,
}

/// Searches for a line on which every actor's utility over `options` is
/// single-peaked (ties allowed) by exhaustive enumeration of orderings.
pub fn validate_spatial_embedding(
    options: &[OptionId],
    actors: &[Actor],
    issue_set: &IssueSet,
) -> Result<EmbeddingReport> {
    if options.len() > EMBEDDING_BOUND {
        return Err(Error::Capacity {
            what: "spatial embedding enumeration",
            requested: options.len() as u128,
            limit: EMBEDDING_BOUND as u128,
        });
    }
    let utilities = actors
        .iter()
        .map(|a| {
            options
                .iter()
                .map(|&o| utility_of(a, o, issue_set))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut order: Vec<usize> = (0..options.len()).collect();
    let mut refutations = Vec::new();
    loop {
        let failing = utilities
            .iter()
            .position(|u| !is_unimodal(order.iter().map(|&i| u[i])));
        let as_options = || order.iter().map(|&i| options[i]).collect::<Vec<_>>();
        match failing {
            None => {
                return Ok(EmbeddingReport {
                    embeddable: true,
                    witness: Some(as_options()),
                    refutations: Vec::new(),
                })
            }
            Some(a) => refutations.push(Refutation {
                ordering: as_options(),
                actor: actors[a].id.clone(),
            }),
        }
        if !next_permutation(&mut order) {
            break;
        }
    }
    Ok(EmbeddingReport {
        embeddable: false,
        witness: None,
        refutations,
    })
}

/// Non-decreasing up to a peak, non-increasing after it.
fn is_unimodal(values: impl Iterator<Item = f64>) -> bool {
    let mut descending = false;
    let mut prev: Option<f64> = None;
    for v in values {
        if let Some(p) = prev {
            if v > p {
                if descending {
                    return false;
                }
            } else if v < p {
                descending = true;
            }
        }
        prev = Some(v);
    }
    true
}

/// Lexicographic successor, `false` once the last ordering is passed.
fn next_permutation(xs: &mut [usize]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let Some(pivot) = (0..xs.len() - 1).rev().find(|&i| xs[i] < xs[i + 1]) else {
        return false;
    };
    let swap = (pivot + 1..xs.len()).rev().find(|&j| xs[j] > xs[pivot]).unwrap();
    xs.swap(pivot, swap);
    xs[pivot + 1..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DistanceShape, UtilitySpec};
    use proptest::prelude::*;

    fn troops() -> (IssueSet, Vec<Actor>) {
        let set = IssueSet::Grid1D {
            min: 0.0,
            max: 1.0,
            steps: 3,
        };
        // Options 0, 1, 2 are L, M, H.
        let a = Actor::new("A", 1.0, 2, UtilitySpec::peaks(&[(0.0, 0.6), (0.5, 0.1), (1.0, 1.0)]));
        let b = Actor::new("B", 1.0, 0, UtilitySpec::peaks(&[(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)]));
        (set, vec![a, b])
    }

    fn all(set: &IssueSet) -> Vec<OptionId> {
        set.options().collect()
    }

    #[test]
    fn troop_orders_share_the_line_m_l_h() {
        let (set, actors) = troops();
        let report = validate_spatial_embedding(&all(&set), &actors, &set).unwrap();
        assert!(report.embeddable);
        let witness = report.witness.unwrap();
        assert_eq!(witness, vec![OptionId(1), OptionId(0), OptionId(2)]);
        for a in &actors {
            assert!(is_unimodal(witness.iter().map(|&o| utility_of(a, o, &set).unwrap())));
        }
    }

    #[test]
    fn three_distinct_worst_options_cannot_share_a_line() {
        // Each actor's worst option must sit at an end of the line.
        let (set, mut actors) = troops();
        actors.push(Actor::new("C", 1.0, 1, UtilitySpec::peaks(&[(0.0, 0.0), (0.5, 1.0), (1.0, 0.5)])));
        let report = validate_spatial_embedding(&all(&set), &actors, &set).unwrap();
        assert!(!report.embeddable);
        assert_eq!(report.refutations.len(), 6);
        assert!(report.witness.is_none());
    }

    #[test]
    fn single_actor_is_always_embeddable() {
        let (set, actors) = troops();
        let report = validate_spatial_embedding(&all(&set), &actors[..1], &set).unwrap();
        assert!(report.embeddable);
        assert!(report.witness.is_some());
    }

    #[test]
    fn identical_tables_share_an_order() {
        let set = IssueSet::ExplicitList {
            labels: vec!["x".into(), "y".into(), "z".into(), "w".into()],
        };
        let u = UtilitySpec::table([0.1, 0.9, 0.3, 0.6]);
        let actors = vec![Actor::new("p", 1.0, 0, u.clone()), Actor::new("q", 2.0, 1, u)];
        assert!(validate_spatial_embedding(&all(&set), &actors, &set).unwrap().embeddable);
    }

    #[test]
    fn more_than_eight_options_is_capacity_error() {
        let set = IssueSet::Grid1D {
            min: 0.0,
            max: 1.0,
            steps: 9,
        };
        assert!(matches!(
            validate_spatial_embedding(&all(&set), &[], &set),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn unimodality_allows_ties() {
        assert!(is_unimodal([0.1, 0.5, 0.5, 0.2, 0.2].into_iter()));
        assert!(!is_unimodal([0.5, 0.1, 0.5].into_iter()));
    }

    proptest! {
        #[test]
        fn distance_utilities_embed_on_the_grid(
            ideals in prop::collection::vec(0.0..=1.0f64, 1..5),
            quadratic: bool,
            steps in 2usize..=6,
        ) {
            let set = IssueSet::Grid1D { min: 0.0, max: 1.0, steps };
            let shape = if quadratic { DistanceShape::Quadratic } else { DistanceShape::Linear };
            let actors: Vec<Actor> = ideals
                .iter()
                .enumerate()
                .map(|(i, &ideal)| Actor::new(format!("a{i}"), 1.0, 0, UtilitySpec::Distance1D { ideal, shape }))
                .collect();
            let report = validate_spatial_embedding(&all(&set), &actors, &set).unwrap();
            prop_assert!(report.embeddable);
        }
    }
}
