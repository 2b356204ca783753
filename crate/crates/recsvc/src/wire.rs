//! JSON shapes exchanged with clients.

use serde::{Deserialize, Serialize};

use nextview_core::{
    AggregatedData, ActionCategory, ColumnMeta, ColumnStats, RecommendationItem, RecommendationSet, VizSpec,
};

pub const PROTOCOL_VERSION: &str = "1";

/// Most points shipped inline with any one chart.
pub const POINT_CAP: usize = 2000;

/// Every response body. Exactly one of `data` and `error` is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiEnvelope<T> {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
    pub version: String,
}

impl<T> ApiEnvelope<T> {
    pub fn ok(data: T) -> Self {
        ApiEnvelope { ok: true, data: Some(data), error: None, version: PROTOCOL_VERSION.into() }
    }
}

impl ApiEnvelope<()> {
    pub fn err(code: &str, message: String) -> Self {
        ApiEnvelope { ok: false, data: None, error: Some(ErrorBody { code: code.into(), message }), version: PROTOCOL_VERSION.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub dataset_id: String,
    pub row_count: usize,
    pub columns: Vec<ColumnMeta>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaInfo {
    pub dataset_id: String,
    pub row_count: usize,
    pub columns: Vec<ColumnMeta>,
    pub stats: Vec<ColumnStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
    pub dataset_id: String,
}

/// The current view in canonical form with its chart data. Both are `null`
/// for the empty view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewPayload {
    pub view: Option<VizSpec>,
    pub key: Option<String>,
    pub data: Option<AggregatedData>,
}

/// A recommendation with its chart data inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartItem {
    #[serde(flatten)]
    pub item: RecommendationItem,
    pub data: AggregatedData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartCategory {
    pub category: ActionCategory,
    pub k: usize,
    pub items: Vec<ChartItem>,
}

/// [`RecommendationSet`] with chart data attached to every item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ChartSet {
    Categorized { categories: Vec<ChartCategory> },
    Baseline { items: Vec<ChartItem> },
}

impl ChartSet {
    /// Drops the chart data, recovering the orchestrator's output.
    pub fn without_data(&self) -> RecommendationSet {
        let strip = |items: &[ChartItem]| items.iter().map(|c| c.item.clone()).collect();
        match self {
            ChartSet::Categorized { categories } => RecommendationSet::Categorized {
                categories: categories
                    .iter()
                    .map(|c| nextview_core::RecommendationCategory { category: c.category.clone(), items: strip(&c.items), k: c.k })
                    .collect(),
            },
            ChartSet::Baseline { items } => RecommendationSet::Baseline { items: strip(items) },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyRequest {
    pub key: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarRequest {
    pub key: String,
    #[serde(default = "yes")]
    pub starred: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToggleRequest {
    pub category: nextview_core::CategoryKind,
    /// Flips the current state when absent.
    #[serde(default)]
    pub enabled: Option<bool>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSession {
    pub dataset_id: String,
}
