//! Actors, issue sets, utility specifications and scenario validation.

mod actor;
mod embedding;
mod issue;
mod scenario;

pub use actor::{
    state_utility, utility_of, Actor, DistanceShape, DsumUtility, IssueStance, Knot, UtilitySpec,
};
pub use embedding::{validate_spatial_embedding, EmbeddingReport, Refutation, EMBEDDING_BOUND};
pub use issue::{IssueSet, OptionId, ENUMERATION_BOUND, MAX_SUBSET_MEMBERS};
pub use scenario::{
    require_valid, validate_scenario, Scenario, UtilityTable, ValidationReport, Violation,
    DEFAULT_EPSILON_SCALE,
};
pub(crate) use scenario::probabilities_violations;
