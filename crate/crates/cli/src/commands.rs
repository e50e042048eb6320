//! Command implementations and their reports.

use npce_core::coalitions::{coalition_breakdown, victory_matrix, Commitment, VictoryMatrix};
use npce_core::generators::{build_parliament_model, GovernmentStructure, NestedOutcome};
use npce_core::markov::{
    limiting_distribution, monte_carlo_oracle, ChallengeModel, MonteCarloConfig, OutcomeDistribution, SolveDiagnostics,
    SolverConfig,
};
use npce_core::model::{OptionId, Scenario};
use npce_core::strategy::{
    classify_robustness, expected_utility, forecast, optimize_strategy, outcome_risk_rms, OptimizerConfig,
    RobustnessReport, StrategyTarget,
};
use npce_core::voting::{condorcet_classify, condorcet_classify_matrix, CondorcetClassification, VotingRule, CLASSIFY_BOUND};
use rayon::prelude::*;
use serde::Serialize;

use crate::file::{MatrixInput, ScenarioFile};
use crate::CliError;

/// Settings shared by every command after flag overrides.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub solver: SolverConfig,
}

pub trait Report: Serialize {
    fn csv(&self) -> Result<String, CliError>;

    /// `false` when some solve stopped short of its tolerance.
    fn converged(&self) -> bool {
        true
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: Option<u64>,
}

impl Meta {
    fn new(command: &'static str, options: &RunOptions) -> Self {
        Meta {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: options.seed,
        }
    }
}

/// Enough configuration to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub input_mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub voting_rule: Option<VotingRule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub commitment: Option<Commitment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abstention_enabled: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_scale: Option<f64>,
    /// The additive term actually used in every contest.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub challenge_model: ChallengeModel,
    pub solver: SolverConfig,
    pub robust_threshold: f64,
}

impl ConfigEcho {
    fn for_scenario(s: &Scenario, solver: SolverConfig, robust_threshold: f64) -> Result<Self, CliError> {
        let epsilon = if s.option_count() >= 2 {
            Some(coalition_breakdown(s, OptionId(0), OptionId(1))?.epsilon)
        } else {
            None
        };
        Ok(ConfigEcho {
            input_mode: "scenario",
            voting_rule: Some(s.voting_rule),
            commitment: Some(s.commitment),
            abstention_enabled: Some(s.abstention_enabled),
            epsilon_scale: Some(s.epsilon_scale),
            epsilon,
            challenge_model: s.challenge_model.clone(),
            solver,
            robust_threshold,
        })
    }

    fn for_matrix(m: &MatrixInput, solver: SolverConfig, robust_threshold: f64) -> Self {
        ConfigEcho {
            input_mode: "victory_matrix",
            voting_rule: None,
            commitment: None,
            abstention_enabled: None,
            epsilon_scale: None,
            epsilon: None,
            challenge_model: m.challenge_model.clone(),
            solver,
            robust_threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ActorForecast {
    pub id: String,
    pub position: String,
    pub expected_utility: f64,
    pub risk: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    #[serde(flatten)]
    pub meta: Meta,
    pub config: ConfigEcho,
    pub options: Vec<String>,
    pub victory_matrix: VictoryMatrix,
    pub distribution: OutcomeDistribution,
    pub diagnostics: SolveDiagnostics,
    pub condorcet: CondorcetClassification,
    pub robustness: RobustnessReport,
    pub actors: Vec<ActorForecast>,
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_table(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(&header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

impl Report for RunReport {
    fn csv(&self) -> Result<String, CliError> {
        let header = vec!["option".to_string(), "label".into(), "probability".into()];
        let rows = self
            .options
            .iter()
            .zip(self.distribution.probabilities())
            .enumerate()
            .map(|(i, (label, p))| vec![i.to_string(), label.clone(), num(*p)])
            .collect();
        csv_table(header, rows)
    }

    fn converged(&self) -> bool {
        self.diagnostics.converged
    }
}

fn option_labels(s: &Scenario) -> Vec<String> {
    s.issue_set.options().map(|o| s.issue_set.label(o)).collect()
}

fn actor_forecasts(s: &Scenario, p: &OutcomeDistribution) -> Result<Vec<ActorForecast>, CliError> {
    s.actors
        .iter()
        .map(|a| {
            Ok(ActorForecast {
                id: a.id.clone(),
                position: s.issue_set.label(a.position),
                expected_utility: expected_utility(a, p, &s.issue_set)?,
                risk: outcome_risk_rms(a, p, &s.issue_set)?,
            })
        })
        .collect()
}

fn deterministic_classification(s: &Scenario, m: &VictoryMatrix) -> Result<CondorcetClassification, CliError> {
    if s.option_count() <= CLASSIFY_BOUND {
        let options: Vec<OptionId> = s.issue_set.options().collect();
        Ok(condorcet_classify(s.voting_rule, &s.actors, &options, &s.issue_set)?)
    } else {
        Ok(condorcet_classify_matrix(m))
    }
}

fn solve_scenario(s: &Scenario, options: &RunOptions, robust_threshold: f64, command: &'static str) -> Result<RunReport, CliError> {
    let matrix = victory_matrix(s)?;
    let (distribution, diagnostics) = limiting_distribution(&matrix, &s.challenge_model, &options.solver)?;
    Ok(RunReport {
        meta: Meta::new(command, options),
        config: ConfigEcho::for_scenario(s, options.solver, robust_threshold)?,
        options: option_labels(s),
        condorcet: deterministic_classification(s, &matrix)?,
        robustness: classify_robustness(&matrix, &distribution, robust_threshold)?,
        actors: actor_forecasts(s, &distribution)?,
        victory_matrix: matrix,
        distribution,
        diagnostics,
    })
}

fn solve_matrix(m: &MatrixInput, options: &RunOptions, robust_threshold: f64) -> Result<RunReport, CliError> {
    let matrix = VictoryMatrix::from_rows(m.probabilities.clone())?;
    let (distribution, diagnostics) = limiting_distribution(&matrix, &m.challenge_model, &options.solver)?;
    Ok(RunReport {
        meta: Meta::new("solve", options),
        config: ConfigEcho::for_matrix(m, options.solver, robust_threshold),
        options: m.labels(),
        condorcet: condorcet_classify_matrix(&matrix),
        robustness: classify_robustness(&matrix, &distribution, robust_threshold)?,
        actors: Vec::new(),
        victory_matrix: matrix,
        distribution,
        diagnostics,
    })
}

pub fn cmd_solve(file: &ScenarioFile, options: &RunOptions) -> Result<RunReport, CliError> {
    match (&file.scenario, &file.victory_matrix) {
        (Some(s), None) => solve_scenario(s, options, file.robust_threshold, "solve"),
        (None, Some(m)) => solve_matrix(m, options, file.robust_threshold),
        (Some(_), Some(_)) => Err(CliError::Invalid(vec![
            "give either `scenario` or `victory_matrix`, not both".into(),
        ])),
        (None, None) => Err(CliError::Invalid(vec!["solve needs `scenario` or `victory_matrix`".into()])),
    }
}

fn require_scenario<'a>(file: &'a ScenarioFile, command: &str) -> Result<&'a Scenario, CliError> {
    file.scenario
        .as_ref()
        .ok_or_else(|| CliError::Invalid(vec![format!("{command} needs a `scenario`")]))
}

/// A sweepable scenario parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Parameter {
    EpsilonScale,
    Actor { index: usize, target: StrategyTarget },
}

impl Parameter {
    pub fn parse(path: &str, s: &Scenario) -> Result<Self, CliError> {
        let invalid = || CliError::Invalid(vec![format!("sweep.parameter: unknown parameter path `{path}`")]);
        if path == "epsilon_scale" {
            return Ok(Parameter::EpsilonScale);
        }
        let rest = path.strip_prefix("actors[").ok_or_else(invalid)?;
        let (key, field) = rest.split_once("].").ok_or_else(invalid)?;
        let index = match key.parse::<usize>() {
            Ok(i) if i < s.actors.len() => i,
            Ok(_) => return Err(invalid()),
            Err(_) => s.actor_index(key).map_err(|_| invalid())?,
        };
        let target = match field {
            "capability" => StrategyTarget::Capability,
            "vote_weight" => StrategyTarget::VoteWeight,
            _ => return Err(invalid()),
        };
        Ok(Parameter::Actor { index, target })
    }

    pub fn apply(self, s: &mut Scenario, value: f64) {
        match self {
            Parameter::EpsilonScale => s.epsilon_scale = value,
            Parameter::Actor { index, target: StrategyTarget::Capability } => s.actors[index].capability = value,
            Parameter::Actor { index, target: StrategyTarget::VoteWeight } => s.actors[index].vote_weight = Some(value),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub distribution: OutcomeDistribution,
    pub expected_utilities: Vec<f64>,
    /// Label of the strong winner of `P`, or `none`.
    pub winner: String,
    pub robustness: RobustnessReport,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    #[serde(flatten)]
    pub meta: Meta,
    pub config: ConfigEcho,
    pub parameter: String,
    pub options: Vec<String>,
    pub actors: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl Report for SweepReport {
    fn csv(&self) -> Result<String, CliError> {
        let mut header = vec![self.parameter.clone()];
        header.extend(self.options.iter().map(|o| format!("p_{o}")));
        header.extend(self.actors.iter().map(|a| format!("eu_{a}")));
        header.push("winner".into());
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![num(r.value)];
                row.extend(r.distribution.probabilities().iter().map(|p| num(*p)));
                row.extend(r.expected_utilities.iter().map(|u| num(*u)));
                row.push(r.winner.clone());
                row
            })
            .collect();
        csv_table(header, rows)
    }

    fn converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }
}

pub fn cmd_sweep(file: &ScenarioFile, options: &RunOptions) -> Result<SweepReport, CliError> {
    let base = require_scenario(file, "sweep")?;
    let sweep = file
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Invalid(vec!["sweep needs a `sweep` spec".into()]))?;
    let parameter = Parameter::parse(&sweep.parameter, base)?;
    let labels = option_labels(base);
    let rows = sweep
        .values()
        .into_par_iter()
        .map(|value| {
            let mut s = base.clone();
            parameter.apply(&mut s, value);
            let report = solve_scenario(&s, options, file.robust_threshold, "sweep")?;
            Ok(SweepRow {
                value,
                expected_utilities: report.actors.iter().map(|a| a.expected_utility).collect(),
                winner: report
                    .robustness
                    .winner
                    .map_or_else(|| "none".to_string(), |w| labels[w.0].clone()),
                robustness: report.robustness,
                converged: report.diagnostics.converged,
                distribution: report.distribution,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(SweepReport {
        meta: Meta::new("sweep", options),
        config: ConfigEcho::for_scenario(base, options.solver, file.robust_threshold)?,
        parameter: sweep.parameter.clone(),
        options: labels,
        actors: base.actors.iter().map(|a| a.id.clone()).collect(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GovernmentRow {
    pub option: usize,
    pub label: String,
    /// Parties in government, or seat holders in issue order for cabinets.
    pub members: Vec<String>,
    /// One value per evaluator.
    pub utilities: Vec<f64>,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParliamentReport {
    #[serde(flatten)]
    pub meta: Meta,
    pub config: ConfigEcho,
    pub structure: GovernmentStructure,
    pub evaluators: Vec<String>,
    pub governments: Vec<GovernmentRow>,
    pub victory_matrix: VictoryMatrix,
    pub distribution: OutcomeDistribution,
    pub diagnostics: SolveDiagnostics,
    pub robustness: RobustnessReport,
    pub modal_government: String,
    /// Per-issue outcome distributions under the modal government.
    pub modal_outcomes: Vec<NestedOutcome>,
}

impl Report for ParliamentReport {
    fn csv(&self) -> Result<String, CliError> {
        let mut header = vec!["option".to_string(), "government".into(), "probability".into()];
        header.extend(self.evaluators.iter().map(|e| format!("u_{e}")));
        let rows = self
            .governments
            .iter()
            .map(|g| {
                let mut row = vec![g.option.to_string(), g.label.clone(), num(g.probability)];
                row.extend(g.utilities.iter().map(|u| num(*u)));
                row
            })
            .collect();
        csv_table(header, rows)
    }

    fn converged(&self) -> bool {
        self.diagnostics.converged
    }
}

pub fn cmd_parliament(file: &ScenarioFile, options: &RunOptions) -> Result<ParliamentReport, CliError> {
    let spec = file
        .parliament
        .as_ref()
        .ok_or_else(|| CliError::Invalid(vec!["parliament needs a `parliament` spec".into()]))?;
    let model = build_parliament_model(spec)?;
    let s = &model.scenario;
    let run = solve_scenario(s, options, file.robust_threshold, "parliament")?;

    let governments = s
        .issue_set
        .options()
        .map(|o| {
            let members: Vec<String> = match spec.structure {
                GovernmentStructure::Coalition => s
                    .issue_set
                    .decode_subset(o)
                    .expect("subset option")
                    .iter()
                    .zip(&spec.parties)
                    .filter(|(m, _)| **m)
                    .map(|(_, p)| p.id.clone())
                    .collect(),
                GovernmentStructure::Cabinet => s
                    .issue_set
                    .decode_matching(o)
                    .expect("matching option")
                    .iter()
                    .map(|&p| spec.parties[p].id.clone())
                    .collect(),
            };
            let label = match spec.structure {
                GovernmentStructure::Coalition => members.join("+"),
                GovernmentStructure::Cabinet => spec
                    .issues
                    .iter()
                    .zip(&members)
                    .map(|(issue, party)| format!("{}:{party}", issue.label))
                    .collect::<Vec<_>>()
                    .join(","),
            };
            Ok(GovernmentRow {
                option: o.0,
                label,
                members,
                utilities: s
                    .actors
                    .iter()
                    .map(|a| npce_core::model::utility_of(a, o, &s.issue_set))
                    .collect::<Result<Vec<_>, _>>()?,
                probability: run.distribution.probabilities()[o.0],
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let mode = run.distribution.mode();
    let mut config = run.config;
    config.input_mode = "parliament";
    Ok(ParliamentReport {
        meta: run.meta,
        config,
        structure: spec.structure,
        evaluators: s.actors.iter().map(|a| a.id.clone()).collect(),
        modal_government: governments[mode].label.clone(),
        modal_outcomes: model.outcomes[mode].clone(),
        governments,
        victory_matrix: run.victory_matrix,
        distribution: run.distribution,
        diagnostics: run.diagnostics,
        robustness: run.robustness,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimResult {
    pub actor: String,
    pub target: StrategyTarget,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizeReport {
    #[serde(flatten)]
    pub meta: Meta,
    pub config: ConfigEcho,
    pub strategist: String,
    pub budget: f64,
    pub strategy: Vec<DimResult>,
    pub baseline_expected_utility: f64,
    pub achieved_expected_utility: f64,
    pub baseline_risk: f64,
    pub achieved_risk: f64,
    pub baseline_distribution: OutcomeDistribution,
    pub achieved_distribution: OutcomeDistribution,
    pub trace: Vec<f64>,
}

impl Report for OptimizeReport {
    fn csv(&self) -> Result<String, CliError> {
        let rows = self
            .trace
            .iter()
            .enumerate()
            .map(|(i, v)| vec![i.to_string(), num(*v)])
            .collect();
        csv_table(vec!["iteration".into(), "expected_utility".into()], rows)
    }
}

pub fn cmd_optimize(file: &ScenarioFile, options: &RunOptions) -> Result<OptimizeReport, CliError> {
    let s = require_scenario(file, "optimize")?;
    let spec = file
        .strategy
        .as_ref()
        .ok_or_else(|| CliError::Invalid(vec!["optimize needs a `strategy` spec".into()]))?;
    let space = spec.space();
    space
        .check(s)
        .map_err(|e| CliError::Invalid(vec![format!("strategy: {e}")]))?;
    if spec.steps.as_ref().is_some_and(|h| h.len() != spec.dims.len()) {
        return Err(CliError::Invalid(vec!["strategy.steps: one step per dimension required".into()]));
    }
    let config = OptimizerConfig {
        iterations: spec.iterations,
        steps: spec.steps.clone(),
        solver: options.solver,
    };
    let result = optimize_strategy(s, &space, &config)?;
    let strategist = &s.actors[s.actor_index(&spec.strategist)?];
    let (_, baseline_distribution) = forecast(s, &options.solver)?;
    let (_, achieved_distribution) = forecast(&space.apply(s, &result.strategy)?, &options.solver)?;
    Ok(OptimizeReport {
        meta: Meta::new("optimize", options),
        config: ConfigEcho::for_scenario(s, options.solver, file.robust_threshold)?,
        strategist: spec.strategist.clone(),
        budget: spec.budget,
        strategy: space
            .dims
            .iter()
            .zip(&result.strategy.0)
            .map(|(d, &delta)| DimResult { actor: d.actor.clone(), target: d.target, delta })
            .collect(),
        baseline_expected_utility: result.baseline,
        achieved_expected_utility: result.achieved,
        baseline_risk: outcome_risk_rms(strategist, &baseline_distribution, &s.issue_set)?,
        achieved_risk: outcome_risk_rms(strategist, &achieved_distribution, &s.issue_set)?,
        baseline_distribution,
        achieved_distribution,
        trace: result.trace,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    #[serde(flatten)]
    pub meta: Meta,
    pub config: ConfigEcho,
    pub monte_carlo: MonteCarloConfig,
    pub options: Vec<String>,
    pub solver_distribution: OutcomeDistribution,
    pub diagnostics: SolveDiagnostics,
    pub simulated_distribution: OutcomeDistribution,
    pub standard_errors: Vec<f64>,
    pub samples: usize,
    /// `|simulated − solver| / SE` per option.
    pub z_scores: Vec<f64>,
}

impl Report for OracleReport {
    fn csv(&self) -> Result<String, CliError> {
        let header = ["option", "label", "solver", "simulated", "standard_error", "z"]
            .map(String::from)
            .to_vec();
        let rows = (0..self.options.len())
            .map(|i| {
                vec![
                    i.to_string(),
                    self.options[i].clone(),
                    num(self.solver_distribution.probabilities()[i]),
                    num(self.simulated_distribution.probabilities()[i]),
                    num(self.standard_errors[i]),
                    num(self.z_scores[i]),
                ]
            })
            .collect();
        csv_table(header, rows)
    }

    fn converged(&self) -> bool {
        self.diagnostics.converged
    }
}

/// Simulation settings for `oracle`; the seed is mandatory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleSettings {
    pub steps: usize,
    pub replications: usize,
    pub burn_in: Option<usize>,
}

pub fn cmd_oracle(file: &ScenarioFile, options: &RunOptions, settings: OracleSettings) -> Result<OracleReport, CliError> {
    let seed = options
        .seed
        .ok_or_else(|| CliError::Invalid(vec!["oracle is stochastic: --seed is required".into()]))?;
    let (matrix, challenges, labels, config) = match (&file.scenario, &file.victory_matrix) {
        (Some(s), None) => (
            victory_matrix(s)?,
            s.challenge_model.clone(),
            option_labels(s),
            ConfigEcho::for_scenario(s, options.solver, file.robust_threshold)?,
        ),
        (None, Some(m)) => (
            VictoryMatrix::from_rows(m.probabilities.clone())?,
            m.challenge_model.clone(),
            m.labels(),
            ConfigEcho::for_matrix(m, options.solver, file.robust_threshold),
        ),
        _ => {
            return Err(CliError::Invalid(vec![
                "oracle needs exactly one of `scenario` or `victory_matrix`".into(),
            ]))
        }
    };
    let mut mc = MonteCarloConfig::new(settings.steps, settings.replications, seed);
    if let Some(b) = settings.burn_in {
        mc.burn_in = b;
    }
    let (solver_distribution, diagnostics) = limiting_distribution(&matrix, &challenges, &options.solver)?;
    let estimate = monte_carlo_oracle(&matrix, &challenges, &mc)?;
    let z_scores = estimate
        .distribution
        .probabilities()
        .iter()
        .zip(solver_distribution.probabilities())
        .zip(&estimate.standard_errors)
        .map(|((a, b), se)| if *se > 0.0 { (a - b).abs() / se } else if a == b { 0.0 } else { f64::INFINITY })
        .collect();
    Ok(OracleReport {
        meta: Meta::new("oracle", options),
        config,
        monte_carlo: mc,
        options: labels,
        solver_distribution,
        diagnostics,
        simulated_distribution: estimate.distribution,
        standard_errors: estimate.standard_errors,
        samples: estimate.samples,
        z_scores,
    })
}
