//! Per-session state and the operations on it. Handlers only lock, call
//! into here and serialize, so every response can be reproduced offline.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use nextview_core::{
    aggregate, recommend, CategoryKind, CorrelationMetric, Dataset, Mode, RecommendConfig, RecommendationSet,
    SortOrder, SpecInput, VizSpec,
};

use crate::error::ServiceError;
use crate::wire::{ChartCategory, ChartItem, ChartSet, ViewPayload, POINT_CAP};

/// One line of the interaction log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    /// Milliseconds since the Unix epoch.
    pub ts: u64,
    pub session: String,
    pub kind: String,
    pub payload: Value,
}

impl Event {
    pub fn now(session: &str, kind: &str, payload: Value) -> Self {
        let ts = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64);
        Event { ts, session: session.into(), kind: kind.into(), payload }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionContext {
    pub session_id: String,
    pub dataset_ref: String,
    pub current_view: Option<VizSpec>,
    /// Categories switched off by the user; absent means on.
    pub category_toggles: BTreeMap<CategoryKind, bool>,
    pub starred: BTreeSet<String>,
    /// Every spec ever recommended to this session, by canonical key.
    pub served: BTreeMap<String, VizSpec>,
    pub interaction_log: Vec<Event>,
}

/// Query parameters of a recommendations request.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecQuery {
    pub mode: Option<Mode>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub metric: Option<CorrelationMetric>,
    pub similarity_order: Option<SortOrder>,
    pub category_order_seed: Option<u64>,
    pub cardinality_cap: Option<usize>,
}

impl RecQuery {
    pub fn config(&self, toggles: &BTreeMap<CategoryKind, bool>) -> RecommendConfig {
        let mut c = RecommendConfig::default();
        c.mode = self.mode.unwrap_or(c.mode);
        c.k = self.k.unwrap_or(c.k);
        c.seed = self.seed.unwrap_or(c.seed);
        c.scoring.metric = self.metric.unwrap_or(c.scoring.metric);
        c.similarity_order = self.similarity_order.unwrap_or(c.similarity_order);
        c.category_order_seed = self.category_order_seed;
        c.cardinality_cap = self.cardinality_cap.unwrap_or(c.cardinality_cap);
        c.disabled = toggles.iter().filter(|(_, on)| !**on).map(|(k, _)| *k).collect();
        c
    }
}

impl SessionContext {
    pub fn new(session_id: String, dataset_ref: String) -> Self {
        let mut s = SessionContext {
            session_id,
            dataset_ref,
            current_view: None,
            category_toggles: BTreeMap::new(),
            starred: BTreeSet::new(),
            served: BTreeMap::new(),
            interaction_log: Vec::new(),
        };
        let payload = json!({ "dataset_id": s.dataset_ref });
        s.log("session_created", payload);
        s
    }

    pub fn log(&mut self, kind: &str, payload: Value) -> &Event {
        let event = Event::now(&self.session_id, kind, payload);
        self.interaction_log.push(event);
        self.interaction_log.last().expect("just pushed")
    }

    pub fn view_payload(&self, ds: &Dataset) -> ViewPayload {
        view_payload(ds, self.current_view.as_ref())
    }

    /// Replaces the current view after validating it against the dataset.
    pub fn set_view(&mut self, ds: &Dataset, input: &SpecInput) -> Result<ViewPayload, ServiceError> {
        let view = input.resolve(ds.schema()).map_err(ServiceError::from_core)?;
        self.current_view = view;
        let payload = json!({ "key": self.current_view.as_ref().map(VizSpec::key) });
        self.log("set_view", payload);
        Ok(self.view_payload(ds))
    }

    /// Makes a previously served recommendation the current view.
    pub fn promote(&mut self, ds: &Dataset, key: &str) -> Result<ViewPayload, ServiceError> {
        let spec = self.served.get(key).cloned().ok_or_else(|| ServiceError::NotServed(key.into()))?;
        self.current_view = Some(spec);
        self.log("promote", json!({ "key": key }));
        Ok(self.view_payload(ds))
    }

    pub fn star(&mut self, key: &str, starred: bool) -> Result<&BTreeSet<String>, ServiceError> {
        if !self.served.contains_key(key) {
            return Err(ServiceError::NotServed(key.into()));
        }
        if starred {
            self.starred.insert(key.into());
        } else {
            self.starred.remove(key);
        }
        self.log("star", json!({ "key": key, "starred": starred }));
        Ok(&self.starred)
    }

    pub fn toggle(&mut self, kind: CategoryKind, enabled: Option<bool>) -> &BTreeMap<CategoryKind, bool> {
        let now = self.category_toggles.get(&kind).copied().unwrap_or(true);
        let next = enabled.unwrap_or(!now);
        self.category_toggles.insert(kind, next);
        self.log("toggle_category", json!({ "category": kind, "enabled": next }));
        &self.category_toggles
    }

    /// Recommendations for the current view. Every returned key is remembered
    /// so it can later be promoted or starred.
    pub fn recommendations(&mut self, ds: &Dataset, query: &RecQuery) -> ChartSet {
        let config = query.config(&self.category_toggles);
        let set = recommend(self.current_view.as_ref(), ds, &config);
        let charts = with_charts(ds, &set);
        for item in set.items() {
            self.served.entry(item.key.clone()).or_insert_with(|| item.spec.clone());
        }
        let payload = json!({
            "view": self.current_view.as_ref().map(VizSpec::key),
            "mode": config.mode,
            "k": config.k,
            "keys": set.items().map(|i| i.key.as_str()).collect::<Vec<_>>(),
        });
        self.log("recommendations", payload);
        charts
    }
}

pub fn view_payload(ds: &Dataset, view: Option<&VizSpec>) -> ViewPayload {
    let data = view.and_then(|v| aggregate(ds, v).ok()).map(|d| d.capped(POINT_CAP));
    ViewPayload { key: view.map(VizSpec::key), view: view.cloned(), data }
}

/// Attaches chart data (capped at [`POINT_CAP`] points) to every item.
pub fn with_charts(ds: &Dataset, set: &RecommendationSet) -> ChartSet {
    let chart = |item: &nextview_core::RecommendationItem| ChartItem {
        data: aggregate(ds, &item.spec).expect("recommended specs are materializable").capped(POINT_CAP),
        item: item.clone(),
    };
    match set {
        RecommendationSet::Categorized { categories } => ChartSet::Categorized {
            categories: categories
                .iter()
                .map(|c| ChartCategory { category: c.category.clone(), k: c.k, items: c.items.iter().map(chart).collect() })
                .collect(),
        },
        RecommendationSet::Baseline { items } => ChartSet::Baseline { items: items.iter().map(chart).collect() },
    }
}
