//! Third-party support, coalition strengths and pairwise victory probabilities.
//!
//! A contest `i:j` is fought between two options. The principals of a side
//! are the actors holding that option; every other actor is a third party
//! whose support depends on its commitment model. Principal capability
//! `c_i` is the total capability of the actors holding `θ_i` (zero for an
//! option nobody holds).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{require_valid, utility_of, Actor, IssueSet, OptionId, Scenario, UtilityTable};
use crate::voting::VotingRule;

/// What a third party risks by supporting a side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Commitment {
    /// Keeps its own position whatever the result.
    #[default]
    Uncommitted,
    /// Keeps its position if its side wins, adopts the winner's otherwise.
    SemiCommitted,
    /// Always adopts the winner's position.
    FullyCommitted,
}

/// One side of a contest: the option and the capability standing behind it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Principal {
    pub capability: f64,
    pub position: OptionId,
}

/// Third party `k`'s view of contest `i:j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriadStakes {
    pub cap_i: f64,
    pub cap_j: f64,
    pub cap_k: f64,
    pub weight_k: f64,
    /// `U_k(θ_i)`
    pub u_i: f64,
    /// `U_k(θ_j)`
    pub u_j: f64,
    /// `U_k(θ_k)`
    pub u_own: f64,
}

impl TriadStakes {
    pub fn new(third: &Actor, i: &Principal, j: &Principal, issue_set: &IssueSet) -> Result<Self> {
        if third.position == i.position || third.position == j.position {
            return Err(Error::Domain(format!(
                "actor `{}` holds a contested position and is not a third party",
                third.id
            )));
        }
        Ok(TriadStakes {
            cap_i: i.capability,
            cap_j: j.capability,
            cap_k: third.capability,
            weight_k: third.vote_weight(),
            u_i: utility_of(third, i.position, issue_set)?,
            u_j: utility_of(third, j.position, issue_set)?,
            u_own: utility_of(third, third.position, issue_set)?,
        })
    }

    fn total(&self) -> f64 {
        self.cap_i + self.cap_j + self.cap_k
    }

    /// Expected utility of sitting the contest out.
    pub fn abstain_utility(&self) -> f64 {
        let (wi, wj) = if self.cap_i + self.cap_j > 0.0 {
            let s = self.cap_i + self.cap_j;
            (self.cap_i / s, self.cap_j / s)
        } else {
            (0.5, 0.5)
        };
        wi * (2.0 * self.u_i + self.u_own) + wj * (2.0 * self.u_j + self.u_own)
    }

    /// Expected utilities of supporting `i` and of supporting `j`.
    pub fn support_utilities(&self, commitment: Commitment) -> (f64, f64) {
        let s = self.total();
        if !(s > 0.0) {
            let a = self.abstain_utility();
            return (a, a);
        }
        let (ci, cj, ck) = (self.cap_i, self.cap_j, self.cap_k);
        let (ui, uj, uk) = (self.u_i, self.u_j, self.u_own);
        // Value of the (i wins, j wins) end states for each choice.
        let (for_i, for_j) = match commitment {
            Commitment::Uncommitted => ((2.0 * ui + uk, 2.0 * uj + uk), (2.0 * ui + uk, 2.0 * uj + uk)),
            Commitment::SemiCommitted => ((2.0 * ui + uk, 3.0 * uj), (3.0 * ui, 2.0 * uj + uk)),
            Commitment::FullyCommitted => ((3.0 * ui, 3.0 * uj), (3.0 * ui, 3.0 * uj)),
        };
        let support_i = (ci + ck) / s * for_i.0 + cj / s * for_i.1;
        let support_j = ci / s * for_j.0 + (cj + ck) / s * for_j.1;
        (support_i, support_j)
    }

    /// `U_k(i,k:j) − U_k(j,k:i)` in closed form.
    pub fn support_difference(&self, commitment: Commitment) -> f64 {
        let s = self.total();
        if !(s > 0.0) {
            return 0.0;
        }
        let stake = self.u_i - self.u_j;
        match commitment {
            Commitment::Uncommitted => 2.0 * self.cap_k / s * stake,
            Commitment::SemiCommitted => {
                let risk = self.cap_i * (self.u_own - self.u_i) - self.cap_j * (self.u_own - self.u_j);
                2.0 * self.cap_k / s * stake + risk / s
            }
            Commitment::FullyCommitted => 3.0 * self.cap_k / s * stake,
        }
    }

    pub fn vote(&self, commitment: Commitment, rule: VotingRule) -> f64 {
        rule.apply(self.weight_k, self.support_difference(commitment))
    }

    pub fn abstention(&self, commitment: Commitment) -> AbstentionDecision {
        let abstain_utility = self.abstain_utility();
        let (support_i, support_j) = self.support_utilities(commitment);
        AbstentionDecision {
            abstain: abstain_utility >= support_i && abstain_utility >= support_j,
            abstain_utility,
            support_i,
            support_j,
        }
    }
}

/// `v_k(i:j)` for a third party `k` under `commitment`.
pub fn third_party_vote(
    third: &Actor,
    i: &Principal,
    j: &Principal,
    commitment: Commitment,
    rule: VotingRule,
    issue_set: &IssueSet,
) -> Result<f64> {
    Ok(TriadStakes::new(third, i, j, issue_set)?.vote(commitment, rule))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbstentionDecision {
    pub abstain: bool,
    pub abstain_utility: f64,
    pub support_i: f64,
    pub support_j: f64,
}

pub fn abstention_decision(
    third: &Actor,
    i: &Principal,
    j: &Principal,
    commitment: Commitment,
    issue_set: &IssueSet,
) -> Result<AbstentionDecision> {
    Ok(TriadStakes::new(third, i, j, issue_set)?.abstention(commitment))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    PrincipalFor,
    PrincipalAgainst,
    ThirdParty,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActorVote {
    pub actor: String,
    pub role: Role,
    pub vote: f64,
}

/// Who supports which side of `i:j`, and how strongly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoalitionBreakdown {
    pub option_for: OptionId,
    pub option_against: OptionId,
    /// `C_ij` before the epsilon floor.
    pub strength_for: f64,
    /// `C_ji` before the epsilon floor.
    pub strength_against: f64,
    pub epsilon: f64,
    pub votes: Vec<ActorVote>,
    pub abstainers: Vec<String>,
}

impl CoalitionBreakdown {
    pub fn from_strengths(strength_for: f64, strength_against: f64, epsilon: f64) -> Self {
        CoalitionBreakdown {
            option_for: OptionId(0),
            option_against: OptionId(1),
            strength_for,
            strength_against,
            epsilon,
            votes: Vec::new(),
            abstainers: Vec::new(),
        }
    }

    /// `V(i:j) = C_ij − C_ji`.
    pub fn net_vote(&self) -> f64 {
        self.strength_for - self.strength_against
    }
}

/// `P[i ≻ j] = C_ij / (C_ij + C_ji)` with epsilon added to both strengths.
pub fn victory_probability(breakdown: &CoalitionBreakdown) -> f64 {
    ratio(
        breakdown.strength_for + breakdown.epsilon,
        breakdown.strength_against + breakdown.epsilon,
    )
}

fn ratio(x: f64, y: f64) -> f64 {
    let total = x + y;
    if total > 0.0 {
        x / total
    } else {
        0.5
    }
}

/// Coalition tally for one contest, shared by the breakdown and the matrix.
struct Contest<'a> {
    scenario: &'a Scenario,
    table: &'a UtilityTable,
    held: &'a [f64],
}

impl Contest<'_> {
    fn new<'a>(scenario: &'a Scenario, table: &'a UtilityTable, held: &'a [f64]) -> Contest<'a> {
        Contest {
            scenario,
            table,
            held,
        }
    }

    fn tally(&self, i: OptionId, j: OptionId, mut record: impl FnMut(usize, Role, f64, bool)) -> (f64, f64) {
        if i == j {
            return (0.0, 0.0);
        }
        let s = self.scenario;
        let (mut c_for, mut c_against) = (0.0, 0.0);
        for (k, actor) in s.actors.iter().enumerate() {
            let (u_i, u_j) = (self.table.get(k, i), self.table.get(k, j));
            let (vote, role, abstained) = if actor.position == i || actor.position == j {
                let role = if actor.position == i {
                    Role::PrincipalFor
                } else {
                    Role::PrincipalAgainst
                };
                (s.voting_rule.apply(actor.capability, u_i - u_j), role, false)
            } else {
                let stakes = TriadStakes {
                    cap_i: self.held[i.0],
                    cap_j: self.held[j.0],
                    cap_k: actor.capability,
                    weight_k: actor.vote_weight(),
                    u_i,
                    u_j,
                    u_own: self.table.get(k, actor.position),
                };
                if s.abstention_enabled && stakes.abstention(s.commitment).abstain {
                    (0.0, Role::ThirdParty, true)
                } else {
                    (stakes.vote(s.commitment, s.voting_rule), Role::ThirdParty, false)
                }
            };
            if vote > 0.0 {
                c_for += vote;
            } else if vote < 0.0 {
                c_against -= vote;
            }
            record(k, role, vote, abstained);
        }
        (c_for, c_against)
    }
}

fn held_capability(scenario: &Scenario) -> Vec<f64> {
    let mut held = vec![0.0; scenario.option_count()];
    for actor in &scenario.actors {
        held[actor.position.0] += actor.capability;
    }
    held
}

/// Raw `(C_ij, C_ji)` for every pair `i < j`, row-major by `i`.
fn raw_strengths(scenario: &Scenario, table: &UtilityTable) -> Vec<Vec<(f64, f64)>> {
    let held = held_capability(scenario);
    let contest = Contest::new(scenario, table, &held);
    let n = scenario.option_count();
    (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| contest.tally(OptionId(i), OptionId(j), |_, _, _, _| {}))
                .collect()
        })
        .collect()
}

/// `epsilon_scale × RMS` of every raw strength, or `epsilon_scale` itself
/// when the RMS vanishes.
fn epsilon_for(scale: f64, strengths: &[Vec<(f64, f64)>]) -> f64 {
    let (mut sum_sq, mut count) = (0.0, 0usize);
    for row in strengths {
        for &(a, b) in row {
            sum_sq += a * a + b * b;
            count += 2;
        }
    }
    let rms = if count > 0 { (sum_sq / count as f64).sqrt() } else { 0.0 };
    if rms > 0.0 {
        scale * rms
    } else {
        scale
    }
}

fn check_scenario(scenario: &Scenario) -> Result<()> {
    require_valid(scenario)
}

/// Breakdown of contest `i:j`, with the epsilon the full matrix would use.
pub fn coalition_breakdown(scenario: &Scenario, i: OptionId, j: OptionId) -> Result<CoalitionBreakdown> {
    check_scenario(scenario)?;
    scenario.issue_set.expect_option(i)?;
    scenario.issue_set.expect_option(j)?;
    let table = scenario.utility_table()?;
    let epsilon = epsilon_for(scenario.epsilon_scale, &raw_strengths(scenario, &table));
    let held = held_capability(scenario);
    let mut votes = Vec::with_capacity(scenario.actors.len());
    let mut abstainers = Vec::new();
    let (strength_for, strength_against) = Contest::new(scenario, &table, &held).tally(i, j, |k, role, vote, abstained| {
        let id = scenario.actors[k].id.clone();
        if abstained {
            abstainers.push(id.clone());
        }
        votes.push(ActorVote { actor: id, role, vote });
    });
    Ok(CoalitionBreakdown {
        option_for: i,
        option_against: j,
        strength_for,
        strength_against,
        epsilon,
        votes,
        abstainers,
    })
}

/// Pairwise victory probabilities `P_ij` over the options of an issue set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VictoryMatrix {
    rows: Vec<Vec<f64>>,
}

/// Tolerance for `P_ij + P_ji = 1` on externally supplied matrices.
pub const MATRIX_INPUT_TOLERANCE: f64 = 1e-9;

impl VictoryMatrix {
    /// Validates a user-supplied matrix.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Domain("victory matrix must have at least one option".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Domain(format!(
                    "victory matrix row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Domain(format!("P[{i}][{j}] = {p} is not a probability")));
                }
            }
        }
        for i in 0..n {
            for j in i..n {
                let sum = rows[i][j] + rows[j][i];
                if (sum - 1.0).abs() > MATRIX_INPUT_TOLERANCE {
                    return Err(Error::Domain(format!(
                        "P[{i}][{j}] + P[{j}][{i}] = {sum}, expected 1"
                    )));
                }
            }
        }
        Ok(VictoryMatrix { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].iter().sum()
    }
}

/// Assembles `P` over every pair of options of the scenario's issue set.
pub fn victory_matrix(scenario: &Scenario) -> Result<VictoryMatrix> {
    check_scenario(scenario)?;
    let table = scenario.utility_table()?;
    Ok(assemble(scenario, &table))
}

/// Like [`victory_matrix`] but skips validation and reuses a utility table.
pub(crate) fn assemble(scenario: &Scenario, table: &UtilityTable) -> VictoryMatrix {
    let strengths = raw_strengths(scenario, table);
    let epsilon = epsilon_for(scenario.epsilon_scale, &strengths);
    let n = scenario.option_count();
    let mut rows = vec![vec![0.5; n]; n];
    for (i, row) in strengths.iter().enumerate() {
        for (offset, &(a, b)) in row.iter().enumerate() {
            let j = i + 1 + offset;
            let (x, y) = (a + epsilon, b + epsilon);
            rows[i][j] = ratio(x, y);
            rows[j][i] = ratio(y, x);
        }
    }
    VictoryMatrix { rows }
}

fn stake_effort(actor: &Actor, own: OptionId, other: OptionId, issue_set: &IssueSet) -> Result<f64> {
    let delta = utility_of(actor, own, issue_set)? - utility_of(actor, other, issue_set)?;
    Ok((actor.capability * delta).abs())
}

/// Purely bilateral contest between `i` and `j` with stake-scaled
/// proportional efforts.
pub fn bilateral_victory_probability(i: &Actor, j: &Actor, issue_set: &IssueSet) -> Result<f64> {
    let v_i = stake_effort(i, i.position, j.position, issue_set)?;
    let v_j = stake_effort(j, j.position, i.position, issue_set)?;
    Ok(ratio(v_i, v_j))
}

/// Gain in expected utility for `i` from forcing a bilateral contest on `j`.
pub fn challenge_incentive(i: &Actor, j: &Actor, issue_set: &IssueSet) -> Result<f64> {
    let v_i = stake_effort(i, i.position, j.position, issue_set)?;
    let v_j = stake_effort(j, j.position, i.position, issue_set)?;
    if !(v_i + v_j > 0.0) {
        return Ok(0.0);
    }
    let stake = utility_of(i, i.position, issue_set)? - utility_of(i, j.position, issue_set)?;
    Ok((v_i - v_j) / (v_i + v_j) * stake)
}
