//! Category selection, ranking and cross-category deduplication.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aggregate::{aggregate, AggregatedData};
use crate::dataset::{Dataset, Schema};
use crate::interest::{score_viz, InterestingnessScore, ScoreContext, ScoringOptions};
use crate::lattice::{self, Action, ActionCategory, CategoryKind};
use crate::par::{self, Execution};
use crate::spec::{spec_diff, DiffElement, Mark, SpecDiff, VizSpec};

pub use crate::interest::CorrelationMetric;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Categorized,
    Baseline,
}

/// Sort direction of the Similarity category: ascending distance shows the
/// most similar charts first, descending the most different.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortOrder {
    #[default]
    Ascending,
    Descending,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecommendConfig {
    /// Items shown per category.
    pub k: usize,
    pub mode: Mode,
    /// Seed for the baseline shuffle.
    pub seed: u64,
    /// When set, categories are displayed in a seeded random order instead of
    /// the fixed precedence order.
    pub category_order_seed: Option<u64>,
    pub scoring: ScoringOptions,
    /// Dimensions with more distinct values than this are not enumerated as
    /// filters or distribution charts.
    pub cardinality_cap: usize,
    pub similarity_order: SortOrder,
    /// Categories the user has toggled off.
    pub disabled: BTreeSet<CategoryKind>,
    pub execution: Execution,
}

impl Default for RecommendConfig {
    fn default() -> Self {
        RecommendConfig {
            k: 10,
            mode: Mode::Categorized,
            seed: 0,
            category_order_seed: None,
            scoring: ScoringOptions::default(),
            cardinality_cap: 50,
            similarity_order: SortOrder::Ascending,
            disabled: BTreeSet::new(),
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationItem {
    pub key: String,
    pub spec: VizSpec,
    pub action: Action,
    pub score: InterestingnessScore,
    pub diff: SpecDiff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationCategory {
    pub category: ActionCategory,
    pub items: Vec<RecommendationItem>,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RecommendationSet {
    Categorized { categories: Vec<RecommendationCategory> },
    /// A single unlabeled, shuffled list.
    Baseline { items: Vec<RecommendationItem> },
}

impl RecommendationSet {
    pub fn mode(&self) -> Mode {
        match self {
            RecommendationSet::Categorized { .. } => Mode::Categorized,
            RecommendationSet::Baseline { .. } => Mode::Baseline,
        }
    }

    pub fn items(&self) -> Box<dyn Iterator<Item = &RecommendationItem> + '_> {
        match self {
            RecommendationSet::Categorized { categories } => Box::new(categories.iter().flat_map(|c| c.items.iter())),
            RecommendationSet::Baseline { items } => Box::new(items.iter()),
        }
    }

    pub fn categories(&self) -> &[RecommendationCategory] {
        match self {
            RecommendationSet::Categorized { categories } => categories,
            RecommendationSet::Baseline { .. } => &[],
        }
    }

    pub fn category(&self, kind: CategoryKind) -> Option<&RecommendationCategory> {
        self.categories().iter().find(|c| c.category.kind == kind)
    }
}

/// Categories to show for a view.
///
/// With nothing selected only the overview categories (Correlation and
/// Distribution) apply. Once an attribute is selected the context-dependent
/// categories take over: Enhance, Filter, Generalize, Pivot, and Similarity
/// for bar, line and histogram views. A category whose enumerator is empty is
/// never applicable.
pub fn applicable_categories(view: Option<&VizSpec>, schema: &Schema, cardinality_cap: usize) -> Vec<ActionCategory> {
    let kinds: &[CategoryKind] = match view {
        None => &[CategoryKind::Correlation, CategoryKind::Distribution],
        Some(_) => &[
            CategoryKind::Enhance,
            CategoryKind::Filter,
            CategoryKind::Generalize,
            CategoryKind::Pivot,
            CategoryKind::Similarity,
        ],
    };
    kinds
        .iter()
        .filter(|k| !lattice::candidates(**k, view, schema, cardinality_cap).is_empty())
        .map(|k| k.category())
        .collect()
}

fn diff_from(view: Option<&VizSpec>, spec: &VizSpec) -> SpecDiff {
    match view {
        Some(v) => spec_diff(v, spec),
        None => SpecDiff {
            added: spec.attrs().iter().map(|a| DiffElement::Attr { name: a.clone() }).collect(),
            ..SpecDiff::default()
        },
    }
}

/// Unfiltered data for every filtered bar/line/histogram candidate, keyed
/// by the unfiltered spec's key, so each baseline is aggregated once.
fn deviation_baselines(ds: &Dataset, specs: &[&VizSpec], exec: Execution) -> BTreeMap<String, AggregatedData> {
    let bases: BTreeMap<String, VizSpec> = specs
        .iter()
        .filter(|s| !s.filters().is_empty() && s.mark() != Mark::Scatter)
        .map(|s| {
            let b = s.without_filters();
            (b.key(), b)
        })
        .collect();
    let bases: Vec<(String, VizSpec)> = bases.into_iter().collect();
    let data = par::map(exec, &bases, |(_, b)| aggregate(ds, b).ok());
    bases.into_iter().zip(data).filter_map(|((k, _), d)| Some((k, d?))).collect()
}

/// Every scorable candidate of a category, fully ranked. Ties break on the
/// canonical key. Descending Similarity is the exact reverse of ascending.
pub fn rank_category(kind: CategoryKind, view: Option<&VizSpec>, ds: &Dataset, config: &RecommendConfig) -> Vec<RecommendationItem> {
    let current = view.and_then(|v| aggregate(ds, v).ok());
    rank_with(kind, view, current.as_ref(), ds, config)
}

fn rank_with(
    kind: CategoryKind,
    view: Option<&VizSpec>,
    current: Option<&AggregatedData>,
    ds: &Dataset,
    config: &RecommendConfig,
) -> Vec<RecommendationItem> {
    let candidates = lattice::candidates(kind, view, ds.schema(), config.cardinality_cap);
    let specs: Vec<&VizSpec> = candidates.iter().map(|c| &c.spec).collect();
    let baselines = if kind.is_operational() { deviation_baselines(ds, &specs, config.execution) } else { BTreeMap::new() };
    let ctx = ScoreContext { ds, category: kind, current, baselines: Some(&baselines), options: config.scoring };
    let scores = par::map(config.execution, &candidates, |c| score_viz(&c.spec, &ctx).ok());

    let mut items: Vec<RecommendationItem> = candidates
        .into_iter()
        .zip(scores)
        .filter_map(|(c, score)| {
            let score = score?;
            Some(RecommendationItem { key: c.spec.key(), diff: diff_from(view, &c.spec), spec: c.spec, action: c.action, score })
        })
        .collect();
    items.sort_by(|a, b| {
        let by_score = a.score.value.total_cmp(&b.score.value);
        let by_score = if a.score.higher_is_better { by_score.reverse() } else { by_score };
        by_score.then_with(|| a.key.cmp(&b.key))
    });
    if kind == CategoryKind::Similarity && config.similarity_order == SortOrder::Descending {
        items.reverse();
        for it in &mut items {
            it.action = Action::Difference;
        }
    }
    items
}

/// Top-k of one category, or `None` when nothing is scorable.
pub fn generate_category(kind: CategoryKind, view: Option<&VizSpec>, ds: &Dataset, config: &RecommendConfig) -> Option<RecommendationCategory> {
    let mut items = rank_category(kind, view, ds, config);
    items.truncate(config.k);
    (!items.is_empty()).then(|| RecommendationCategory { category: kind.category(), items, k: config.k })
}

/// All categories for a view.
///
/// Categories are filled in precedence order (Enhance, Filter, Generalize,
/// Pivot, Similarity, Correlation, Distribution); a spec already shown by an
/// earlier category is skipped and the next-ranked one takes its place.
/// Categories left empty are omitted.
pub fn recommend(view: Option<&VizSpec>, ds: &Dataset, config: &RecommendConfig) -> RecommendationSet {
    let view = view.filter(|v| !v.attrs().is_empty());
    let kinds: Vec<CategoryKind> = applicable_categories(view, ds.schema(), config.cardinality_cap)
        .into_iter()
        .map(|c| c.kind)
        .filter(|k| !config.disabled.contains(k))
        .collect();
    let current = view.and_then(|v| aggregate(ds, v).ok());
    let ranked = par::map(config.execution, &kinds, |&k| rank_with(k, view, current.as_ref(), ds, config));
    let mut ranked: BTreeMap<CategoryKind, Vec<RecommendationItem>> = kinds.into_iter().zip(ranked).collect();

    let mut shown: HashSet<String> = HashSet::new();
    let mut categories = Vec::new();
    for kind in CategoryKind::PRECEDENCE {
        let Some(all) = ranked.remove(&kind) else { continue };
        let items: Vec<RecommendationItem> =
            all.into_iter().filter(|it| !shown.contains(&it.key)).take(config.k).collect();
        if items.is_empty() {
            continue;
        }
        shown.extend(items.iter().map(|it| it.key.clone()));
        categories.push(RecommendationCategory { category: kind.category(), items, k: config.k });
    }
    if let Some(seed) = config.category_order_seed {
        categories.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }

    let set = RecommendationSet::Categorized { categories };
    match config.mode {
        Mode::Categorized => set,
        Mode::Baseline => flatten_baseline(&set, config.seed),
    }
}

/// Drops category labels and shuffles every item into one list
/// (Fisher–Yates, seeded).
pub fn flatten_baseline(set: &RecommendationSet, seed: u64) -> RecommendationSet {
    let mut items: Vec<RecommendationItem> = set.items().cloned().collect();
    items.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    RecommendationSet::Baseline { items }
}
