use npce_core::coalitions::{victory_matrix, VictoryMatrix};
use npce_core::markov::{limiting_distribution, monte_carlo_oracle, ChallengeModel, MonteCarloConfig, SolverConfig};
use npce_core::model::{Actor, DistanceShape, IssueSet, OptionId, Scenario, UtilitySpec};
use npce_core::strategy::{classify_robustness, expected_utility, RobustnessLabel, DEFAULT_ROBUST_THRESHOLD};
use npce_core::voting::{
    condorcet_classify, condorcet_classify_matrix, group_vote, median_voter_position, CondorcetOutcome, VotingRule,
};
use proptest::prelude::*;

fn published() -> VictoryMatrix {
    VictoryMatrix::from_rows(vec![
        vec![0.5000, 0.4192, 0.1814, 0.8272, 0.5211],
        vec![0.5808, 0.5000, 0.3326, 0.7129, 0.1856],
        vec![0.8186, 0.6674, 0.5000, 0.7674, 0.5043],
        vec![0.1728, 0.2871, 0.2326, 0.5000, 0.1777],
        vec![0.4789, 0.8144, 0.4957, 0.8223, 0.5000],
    ])
    .unwrap()
}

fn five() -> IssueSet {
    IssueSet::ExplicitList { labels: (1..=5).map(|i| i.to_string()).collect() }
}

#[test]
fn published_matrix_forecast() {
    let m = published();
    let (p, _) = limiting_distribution(&m, &ChallengeModel::Uniform, &SolverConfig::default()).unwrap();
    assert_eq!(p.mode(), 2);

    let first = Actor::new("x", 1.0, 0, UtilitySpec::table([1.0, 0.0, 0.0, 0.0, 0.0]));
    let eu = expected_utility(&first, &p, &five()).unwrap();
    assert!((eu - 0.1597).abs() < 1e-4);

    assert_eq!(condorcet_classify_matrix(&m).outcome, CondorcetOutcome::StrongWinner(OptionId(2)));
    let r = classify_robustness(&m, &p, DEFAULT_ROBUST_THRESHOLD).unwrap();
    assert_eq!(r.winner, Some(OptionId(2)));
    // The middle row beats option 5 only barely.
    assert_eq!(r.label, RobustnessLabel::Marginal);
    assert!((r.margin - 0.0043).abs() < 1e-12);
}

#[test]
fn published_matrix_simulation() {
    let m = published();
    let (p, _) = limiting_distribution(&m, &ChallengeModel::Uniform, &SolverConfig { tolerance: 1e-13, max_iters: 100_000 }).unwrap();
    let est = monte_carlo_oracle(&m, &ChallengeModel::Uniform, &MonteCarloConfig::new(10_000, 100, 7)).unwrap();
    for ((a, b), se) in est.distribution.probabilities().iter().zip(p.probabilities()).zip(&est.standard_errors) {
        assert!((a - b).abs() <= 3.0 * se, "{a} vs {b} (se {se})");
    }
}

#[test]
fn median_voter_is_the_condorcet_winner_on_a_line() {
    let grid = IssueSet::Grid1D { min: 0.0, max: 1.0, steps: 11 };
    let ideals = [(0.1, 1.0), (0.4, 2.0), (0.6, 0.5), (0.9, 1.5)];
    let actors: Vec<Actor> = ideals
        .iter()
        .enumerate()
        .map(|(k, &(ideal, c))| {
            let at = grid.nearest_option(ideal).unwrap().0;
            Actor::new(format!("a{k}"), c, at, UtilitySpec::Distance1D { ideal, shape: DistanceShape::Linear })
        })
        .collect();
    let median = median_voter_position(&actors, &grid).unwrap();
    assert_eq!(median, OptionId(4));
    let options: Vec<OptionId> = grid.options().collect();
    let c = condorcet_classify(VotingRule::Binary, &actors, &options, &grid).unwrap();
    assert_eq!(c.strong_winner(), Some(median));
}

fn deterministic_scenario(tables: &[Vec<f64>], caps: &[f64]) -> Scenario {
    let n = tables[0].len();
    let actors = tables
        .iter()
        .zip(caps)
        .enumerate()
        .map(|(k, (t, &c))| Actor::new(format!("a{k}"), c, k % n, UtilitySpec::table(t.clone())))
        .collect();
    Scenario::new(
        IssueSet::ExplicitList { labels: (0..n).map(|i| i.to_string()).collect() },
        actors,
        VotingRule::Proportional,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn robustness_winner_agrees_with_deterministic_margins(
        tables in prop::collection::vec(prop::collection::vec(0.0..=1.0f64, 4), 2..5),
        caps in prop::collection::vec(0.1..2.0f64, 5),
    ) {
        let s = deterministic_scenario(&tables, &caps);
        // A matrix whose entries only encode the sign of each group vote.
        let options: Vec<OptionId> = s.issue_set.options().collect();
        let c = condorcet_classify(s.voting_rule, &s.actors, &options, &s.issue_set).unwrap();
        let rows = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| {
                        let m = group_vote(s.voting_rule, &s.actors, OptionId(i), OptionId(j), &s.issue_set).unwrap();
                        if i == j || m == 0.0 { 0.5 } else if m > 0.0 { 0.75 } else { 0.25 }
                    })
                    .collect()
            })
            .collect();
        let m = VictoryMatrix::from_rows(rows).unwrap();
        let (p, _) = limiting_distribution(&m, &ChallengeModel::Uniform, &SolverConfig::default()).unwrap();
        let r = classify_robustness(&m, &p, DEFAULT_ROBUST_THRESHOLD).unwrap();
        prop_assert_eq!(r.winner, c.strong_winner());
    }

    #[test]
    fn small_capability_changes_move_the_forecast_little(
        tables in prop::collection::vec(prop::collection::vec(0.05..=0.95f64, 4), 3..5),
        caps in prop::collection::vec(0.5..2.0f64, 5),
        who in 0usize..3,
    ) {
        let s = deterministic_scenario(&tables, &caps);
        let solve = |s: &Scenario| {
            let m = victory_matrix(s).unwrap();
            limiting_distribution(&m, &ChallengeModel::Uniform, &SolverConfig::default()).unwrap().0
        };
        let base = solve(&s);
        let mut nudged = s.clone();
        nudged.actors[who].capability *= 1.0 + 1e-6;
        let moved = solve(&nudged);
        for (a, b) in base.probabilities().iter().zip(moved.probabilities()) {
            prop_assert!((a - b).abs() < 1e-3);
        }
    }
}
