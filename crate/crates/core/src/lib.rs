//! Categorized "next-step" visualization recommendations over tabular data.
//!
//! A [`Dataset`] is loaded once from CSV and treated as an immutable snapshot.
//! The user's current visualization is a [`VizSpec`]; the [`lattice`] module
//! enumerates every visualization one move away from it along the attribute
//! and value hierarchies, [`interest`] scores each candidate with an objective
//! chosen by chart type, and [`recommend`] groups the ranked results into
//! non-overlapping categories.
//!
//! Scoring is data-parallel over candidates when the `parallel` feature is
//! enabled (the default). [`Execution::Sequential`] forces the single-threaded
//! path at runtime.

pub mod aggregate;
pub mod dataset;
mod error;
pub mod interest;
pub mod lattice;
pub mod orchestrator;
mod par;
pub mod spec;

pub use aggregate::{aggregate, filtered_values, AggregatedData, Series, HISTOGRAM_BINS};
pub use dataset::{
    column_stats, infer_schema, load_csv, Aggregation, ColumnMeta, ColumnOverride, ColumnStats,
    DataType, Dataset, Field, LoadOptions, RawColumn, Role, Schema, SchemaOverride,
};
pub use error::{Error, Result};
pub use interest::{CorrelationMetric, DropReason, InterestingnessScore, Objective, ScoringOptions};
pub use lattice::{Action, ActionCategory, CategoryKind};
pub use orchestrator::{
    applicable_categories, flatten_baseline, generate_category, rank_category, recommend,
    Mode, RecommendConfig, RecommendationCategory, RecommendationItem, RecommendationSet,
    SortOrder,
};
pub use par::Execution;
pub use spec::{auto_encode, spec_diff, Channel, DiffElement, FilterPredicate, Mark, SpecDiff, SpecInput, VizSpec};
