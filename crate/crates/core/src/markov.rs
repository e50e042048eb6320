//! Challenge-and-contest Markov chain over options and its limiting distribution.
//!
//! At every turn the incumbent option `i` is challenged by `j` with
//! probability `c_ji`, or left alone with the remaining probability. A
//! challenge is won by `i` with probability `P_ij`; otherwise `j` becomes
//! the incumbent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coalitions::VictoryMatrix;
use crate::error::{Error, Result};
use crate::model::probabilities_violations;

/// Who challenges whom.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChallengeModel {
    /// Every option, the incumbent included, challenges with probability `1/n`.
    #[default]
    Uniform,
    /// `probabilities[i][j]` is the probability that incumbent `i` is
    /// challenged by `j`. Diagonal entries are ignored; off-diagonal row
    /// sums are at most 1.
    Matrix { probabilities: Vec<Vec<f64>> },
}

impl ChallengeModel {
    fn check(&self, n: usize) -> Result<()> {
        if let ChallengeModel::Matrix { probabilities } = self {
            if let Some((path, message)) = probabilities_violations(probabilities, n).into_iter().next() {
                return Err(Error::Domain(format!("challenge model {path}: {message}")));
            }
        }
        Ok(())
    }

    /// Probability that incumbent `incumbent` is challenged by `challenger`.
    pub fn probability(&self, n: usize, incumbent: usize, challenger: usize) -> f64 {
        if incumbent == challenger {
            return 0.0;
        }
        match self {
            ChallengeModel::Uniform => 1.0 / n as f64,
            ChallengeModel::Matrix { probabilities } => probabilities[incumbent][challenger],
        }
    }
}

/// A probability vector over the options of an issue set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutcomeDistribution(Vec<f64>);

/// Tolerance on `Σ p = 1` for a valid distribution.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

impl OutcomeDistribution {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Domain("distribution over zero options".into()));
        }
        if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::Domain(format!("p[{i}] = {v} is negative")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(Error::Domain(format!("distribution sums to {total}")));
        }
        Ok(OutcomeDistribution(p))
    }

    pub fn uniform(n: usize) -> Self {
        OutcomeDistribution(vec![1.0 / n as f64; n])
    }

    pub fn point(n: usize, at: usize) -> Self {
        let mut p = vec![0.0; n];
        p[at] = 1.0;
        OutcomeDistribution(p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Most probable option (lowest index on ties).
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.0.iter().enumerate() {
            if p > self.0[best] {
                best = i;
            }
        }
        best
    }

    fn normalized(mut p: Vec<f64>) -> Self {
        let total: f64 = p.iter().sum();
        if total > 0.0 {
            p.iter_mut().for_each(|v| *v /= total);
        }
        OutcomeDistribution(p)
    }
}

/// One application of the transition operator `T(P, p)`.
pub fn transition_step(
    matrix: &VictoryMatrix,
    p: &OutcomeDistribution,
    challenges: &ChallengeModel,
) -> Result<OutcomeDistribution> {
    let n = matrix.len();
    if p.len() != n {
        return Err(Error::Domain(format!(
            "distribution over {} options for a {n}x{n} victory matrix",
            p.len()
        )));
    }
    challenges.check(n)?;
    Ok(OutcomeDistribution(step(matrix, p.probabilities(), challenges)))
}

fn step(matrix: &VictoryMatrix, p: &[f64], challenges: &ChallengeModel) -> Vec<f64> {
    let n = p.len();
    match challenges {
        ChallengeModel::Uniform => (0..n)
            .map(|i| {
                let row = &matrix.rows()[i];
                row.iter().zip(p).map(|(pij, pj)| pij * (p[i] + pj)).sum::<f64>() / n as f64
            })
            .collect(),
        ChallengeModel::Matrix { probabilities: c } => (0..n)
            .map(|i| {
                let row = &matrix.rows()[i];
                let mut defended = 0.0;
                let mut challenged = 0.0;
                let mut captured = 0.0;
                for k in (0..n).filter(|&k| k != i) {
                    defended += c[i][k] * row[k];
                    challenged += c[i][k];
                    captured += c[k][i] * row[k] * p[k];
                }
                p[i] * defended + p[i] * (1.0 - challenged) + captured
            })
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

fn default_tolerance() -> f64 {
    1e-10
}

fn default_max_iters() -> usize {
    10_000
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: default_tolerance(),
            max_iters: default_max_iters(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    /// Max-norm of `p − T(P, p)` at the returned iterate.
    pub final_residual: f64,
    pub converged: bool,
}

/// Fixed point of `T` by averaged iteration `p ← (p + T(P, p)) / 2` from
/// the uniform distribution. A non-converged solve returns the last iterate.
pub fn limiting_distribution(
    matrix: &VictoryMatrix,
    challenges: &ChallengeModel,
    config: &SolverConfig,
) -> Result<(OutcomeDistribution, SolveDiagnostics)> {
    if !(config.tolerance > 0.0) {
        return Err(Error::Domain(format!(
            "solver tolerance must be positive, got {}",
            config.tolerance
        )));
    }
    let n = matrix.len();
    challenges.check(n)?;
    let mut p = vec![1.0 / n as f64; n];
    let mut iterations = 0;
    loop {
        let next = step(matrix, &p, challenges);
        let residual = p
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if residual <= config.tolerance || iterations >= config.max_iters {
            return Ok((
                OutcomeDistribution(p),
                SolveDiagnostics {
                    iterations,
                    final_residual: residual,
                    converged: residual <= config.tolerance,
                },
            ));
        }
        let averaged = p.iter().zip(&next).map(|(a, b)| 0.5 * (a + b)).collect();
        p = OutcomeDistribution::normalized(averaged).into_inner();
        iterations += 1;
    }
}

/// Limiting distribution with two options, from the coalition strengths.
pub fn two_option_closed_form(c12: f64, c21: f64) -> Result<OutcomeDistribution> {
    if !(c12 >= 0.0 && c21 >= 0.0) {
        return Err(Error::Domain(format!("coalition strengths must be >= 0, got ({c12}, {c21})")));
    }
    let total = c12 + c21;
    if !(total > 0.0) {
        return Err(Error::Domain("both coalition strengths are zero".into()));
    }
    Ok(OutcomeDistribution(vec![c12 / total, c21 / total]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    /// Recorded transitions per replication.
    pub steps: usize,
    pub replications: usize,
    /// Transitions discarded at the start of each replication.
    pub burn_in: usize,
    pub seed: u64,
}

impl MonteCarloConfig {
    pub fn new(steps: usize, replications: usize, seed: u64) -> Self {
        MonteCarloConfig {
            steps,
            replications,
            burn_in: steps / 10,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub distribution: OutcomeDistribution,
    /// Standard error per option, from the spread across replications.
    pub standard_errors: Vec<f64>,
    pub samples: usize,
}

/// Occupancy of simulated chains. Replication `r` draws from a ChaCha
/// stream `r` keyed by the seed, so results do not depend on scheduling.
pub fn monte_carlo_oracle(
    matrix: &VictoryMatrix,
    challenges: &ChallengeModel,
    config: &MonteCarloConfig,
) -> Result<MonteCarloEstimate> {
    if config.steps == 0 || config.replications == 0 {
        return Err(Error::Domain("oracle needs at least one step and one replication".into()));
    }
    let n = matrix.len();
    challenges.check(n)?;
    let occupancies: Vec<Vec<f64>> = (0..config.replications)
        .into_par_iter()
        .map(|r| simulate(matrix, challenges, config, r as u64))
        .collect();

    let reps = config.replications as f64;
    let mut mean = vec![0.0; n];
    for occ in &occupancies {
        for (m, o) in mean.iter_mut().zip(occ) {
            *m += o;
        }
    }
    mean.iter_mut().for_each(|m| *m /= reps);
    let standard_errors = (0..n)
        .map(|i| {
            if config.replications < 2 {
                return f64::NAN;
            }
            let var = occupancies.iter().map(|o| (o[i] - mean[i]).powi(2)).sum::<f64>() / (reps - 1.0);
            (var / reps).sqrt()
        })
        .collect();
    Ok(MonteCarloEstimate {
        distribution: OutcomeDistribution::normalized(mean),
        standard_errors,
        samples: config.steps * config.replications,
    })
}

fn simulate(matrix: &VictoryMatrix, challenges: &ChallengeModel, config: &MonteCarloConfig, stream: u64) -> Vec<f64> {
    let n = matrix.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);
    let mut state = rng.gen_range(0..n);
    let mut counts = vec![0u64; n];
    for t in 0..config.burn_in + config.steps {
        if let Some(challenger) = draw_challenger(&mut rng, challenges, n, state) {
            if rng.gen::<f64>() >= matrix.get(state, challenger) {
                state = challenger;
            }
        }
        if t >= config.burn_in {
            counts[state] += 1;
        }
    }
    counts.iter().map(|&c| c as f64 / config.steps as f64).collect()
}

fn draw_challenger(rng: &mut ChaCha8Rng, challenges: &ChallengeModel, n: usize, incumbent: usize) -> Option<usize> {
    match challenges {
        ChallengeModel::Uniform => {
            let j = rng.gen_range(0..n);
            (j != incumbent).then_some(j)
        }
        ChallengeModel::Matrix { probabilities } => {
            let u: f64 = rng.gen();
            let mut cumulative = 0.0;
            for (j, &c) in probabilities[incumbent].iter().enumerate() {
                if j == incumbent {
                    continue;
                }
                cumulative += c;
                if u < cumulative {
                    return Some(j);
                }
            }
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn matrix(rows: Vec<Vec<f64>>) -> VictoryMatrix {
        VictoryMatrix::from_rows(rows).unwrap()
    }

    fn even(n: usize) -> VictoryMatrix {
        matrix(vec![vec![0.5; n]; n])
    }

    #[test]
    fn indifference_pulls_towards_uniform() {
        // With every P = 1/2: p_i' = p_i / 2 + 1 / (2n).
        let p = OutcomeDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        let next = transition_step(&even(3), &p, &ChallengeModel::Uniform).unwrap();
        for (a, b) in next.probabilities().iter().zip(p.probabilities()) {
            assert!((a - (0.5 * b + 0.5 / 3.0)).abs() < 1e-15, "{a} vs {b}");
        }
        let (limit, diag) = limiting_distribution(&even(4), &ChallengeModel::Uniform, &SolverConfig::default()).unwrap();
        assert!(diag.converged);
        assert_eq!(limit, OutcomeDistribution::uniform(4));
    }

    #[test]
    fn two_option_step_by_hand() {
        let m = matrix(vec![vec![0.5, 0.75], vec![0.25, 0.5]]);
        let next = transition_step(&m, &OutcomeDistribution::point(2, 0), &ChallengeModel::Uniform).unwrap();
        assert_eq!(next.probabilities(), &[0.875, 0.125]);
    }

    #[test]
    fn dimension_mismatch_is_domain_error() {
        let err = transition_step(&even(3), &OutcomeDistribution::uniform(2), &ChallengeModel::Uniform);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn closed_form_cases() {
        assert_eq!(two_option_closed_form(2.0, 2.0).unwrap().probabilities(), &[0.5, 0.5]);
        assert_eq!(two_option_closed_form(3.0, 1.0).unwrap().probabilities(), &[0.75, 0.25]);
        assert!(two_option_closed_form(0.0, 0.0).is_err());
    }

    #[test]
    fn solver_matches_closed_form_for_two() {
        let m = matrix(vec![vec![0.5, 0.3], vec![0.7, 0.5]]);
        let (p, _) = limiting_distribution(&m, &ChallengeModel::Uniform, &SolverConfig::default()).unwrap();
        let expected = two_option_closed_form(0.3, 0.7).unwrap();
        for (a, b) in p.probabilities().iter().zip(expected.probabilities()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let m = matrix(vec![vec![0.5, 0.9, 0.2], vec![0.1, 0.5, 0.6], vec![0.8, 0.4, 0.5]]);
        let config = SolverConfig { tolerance: 1e-14, max_iters: 3 };
        let (p, diag) = limiting_distribution(&m, &ChallengeModel::Uniform, &config).unwrap();
        assert!(!diag.converged);
        assert_eq!(diag.iterations, 3);
        assert!((p.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(limiting_distribution(&m, &ChallengeModel::Uniform, &SolverConfig { tolerance: 0.0, max_iters: 5 }).is_err());
    }

    #[test]
    fn absorbing_option_collects_all_mass() {
        let m = matrix(vec![vec![0.5, 1.0, 1.0], vec![0.0, 0.5, 0.5], vec![0.0, 0.5, 0.5]]);
        let est = monte_carlo_oracle(&m, &ChallengeModel::Uniform, &MonteCarloConfig::new(2000, 8, 3)).unwrap();
        assert!(est.distribution.probabilities()[0] > 0.95);
    }

    #[test]
    fn oracle_is_reproducible() {
        let m = matrix(vec![vec![0.5, 0.9, 0.2], vec![0.1, 0.5, 0.6], vec![0.8, 0.4, 0.5]]);
        let config = MonteCarloConfig::new(500, 16, 42);
        let a = monte_carlo_oracle(&m, &ChallengeModel::Uniform, &config).unwrap();
        let b = monte_carlo_oracle(&m, &ChallengeModel::Uniform, &config).unwrap();
        assert_eq!(a, b);
        let other = monte_carlo_oracle(&m, &ChallengeModel::Uniform, &MonteCarloConfig { seed: 43, ..config }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn oracle_tracks_matrix_challenges() {
        let m = matrix(vec![vec![0.5, 0.9, 0.2], vec![0.1, 0.5, 0.6], vec![0.8, 0.4, 0.5]]);
        let c = ChallengeModel::Matrix {
            probabilities: vec![vec![0.0, 0.5, 0.1], vec![0.3, 0.0, 0.3], vec![0.2, 0.6, 0.0]],
        };
        let (p, diag) = limiting_distribution(&m, &c, &SolverConfig::default()).unwrap();
        assert!(diag.converged);
        let est = monte_carlo_oracle(&m, &c, &MonteCarloConfig::new(20_000, 50, 7)).unwrap();
        for i in 0..3 {
            let z = (est.distribution.probabilities()[i] - p.probabilities()[i]) / est.standard_errors[i];
            assert!(z.abs() < 4.0, "option {i}: z = {z}");
        }
    }

    fn arb_matrix() -> impl Strategy<Value = VictoryMatrix> {
        (1usize..7).prop_flat_map(|n| {
            prop::collection::vec(0.0..=1.0f64, n * n).prop_map(move |raw| {
                let mut rows = vec![vec![0.5; n]; n];
                for i in 0..n {
                    for j in i + 1..n {
                        rows[i][j] = raw[i * n + j];
                        rows[j][i] = 1.0 - raw[i * n + j];
                    }
                }
                VictoryMatrix::from_rows(rows).unwrap()
            })
        })
    }

    fn arb_distribution(n: usize) -> impl Strategy<Value = OutcomeDistribution> {
        prop::collection::vec(0.01..1.0f64, n).prop_map(OutcomeDistribution::normalized)
    }

    proptest! {
        #[test]
        fn step_preserves_mass_and_sign(m in arb_matrix(), seed in any::<u64>()) {
            let n = m.len();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = OutcomeDistribution::normalized((0..n).map(|_| rng.gen::<f64>() + 1e-3).collect());
            let next = transition_step(&m, &p, &ChallengeModel::Uniform).unwrap();
            prop_assert!((next.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(next.probabilities().iter().all(|&v| v >= 0.0));
        }

        #[test]
        fn uniform_fast_path_matches_general_form(m in arb_matrix(), p in arb_distribution(6)) {
            let n = m.len();
            let p = OutcomeDistribution::normalized(p.probabilities()[..n].to_vec());
            let general = ChallengeModel::Matrix { probabilities: vec![vec![1.0 / n as f64; n]; n] };
            let a = transition_step(&m, &p, &ChallengeModel::Uniform).unwrap();
            let b = transition_step(&m, &p, &general).unwrap();
            for (x, y) in a.probabilities().iter().zip(b.probabilities()) {
                prop_assert!((x - y).abs() < 1e-14);
            }
        }

        #[test]
        fn limit_is_a_fixed_point(m in arb_matrix()) {
            let config = SolverConfig { tolerance: 1e-10, max_iters: 200_000 };
            let (p, diag) = limiting_distribution(&m, &ChallengeModel::Uniform, &config).unwrap();
            prop_assert!(diag.converged);
            let next = transition_step(&m, &p, &ChallengeModel::Uniform).unwrap();
            let residual = p.probabilities().iter().zip(next.probabilities()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(residual <= 1e-10);
            prop_assert!((p.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
