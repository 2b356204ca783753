//! Candidate enumeration for each analytical action.
//!
//! A view sits at one node of the attribute hierarchy (its attribute set) and
//! one node of the value hierarchy (its filter set). The operational actions
//! are single moves from that position: Enhance and Generalize move down and
//! up the attribute hierarchy, Pivot moves across it, and Filter drills down,
//! swaps, or (through Generalize) rolls up on the value hierarchy. Every list
//! returned here is sorted by canonical key and never contains the view itself.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::dataset::Schema;
use crate::spec::{encode_names, FilterPredicate, Mark, VizSpec, MAX_ATTRS};

/// The seven recommendation categories shown to the user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoryKind {
    Enhance,
    Filter,
    Generalize,
    Pivot,
    Similarity,
    Correlation,
    Distribution,
}

/// The ten taxonomy actions that the categories consolidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Enhance,
    FilterAdd,
    FilterSwap,
    GeneralizeAttribute,
    GeneralizeValue,
    Pivot,
    Correlation,
    Distribution,
    Similarity,
    Difference,
}

impl CategoryKind {
    /// Fixed order used for cross-category deduplication and default display.
    pub const PRECEDENCE: [CategoryKind; 7] = [
        CategoryKind::Enhance,
        CategoryKind::Filter,
        CategoryKind::Generalize,
        CategoryKind::Pivot,
        CategoryKind::Similarity,
        CategoryKind::Correlation,
        CategoryKind::Distribution,
    ];

    pub fn sub_kinds(self) -> &'static [Action] {
        match self {
            CategoryKind::Enhance => &[Action::Enhance],
            CategoryKind::Filter => &[Action::FilterAdd, Action::FilterSwap],
            CategoryKind::Generalize => &[Action::GeneralizeAttribute, Action::GeneralizeValue],
            CategoryKind::Pivot => &[Action::Pivot],
            CategoryKind::Similarity => &[Action::Similarity, Action::Difference],
            CategoryKind::Correlation => &[Action::Correlation],
            CategoryKind::Distribution => &[Action::Distribution],
        }
    }

    pub fn is_operational(self) -> bool {
        matches!(self, CategoryKind::Enhance | CategoryKind::Filter | CategoryKind::Generalize | CategoryKind::Pivot)
    }

    /// Context-independent categories ignore the current view.
    pub fn is_context_dependent(self) -> bool {
        !matches!(self, CategoryKind::Correlation | CategoryKind::Distribution)
    }

    pub fn category(self) -> ActionCategory {
        ActionCategory { kind: self, sub_kinds: self.sub_kinds().to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionCategory {
    pub kind: CategoryKind,
    pub sub_kinds: Vec<Action>,
}

/// A view's position on the attribute and value hierarchies.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePosition {
    pub attr_node: BTreeSet<String>,
    pub value_node: BTreeSet<FilterPredicate>,
}

impl From<&VizSpec> for LatticePosition {
    fn from(v: &VizSpec) -> Self {
        LatticePosition {
            attr_node: v.attrs().iter().cloned().collect(),
            value_node: v.filters().iter().cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub spec: VizSpec,
    pub action: Action,
}

/// Sorts by key, drops duplicates and the view itself.
fn finish(view: Option<&VizSpec>, specs: impl IntoIterator<Item = VizSpec>) -> Vec<VizSpec> {
    let own = view.map(VizSpec::key);
    let by_key: BTreeMap<String, VizSpec> =
        specs.into_iter().map(|s| (s.key(), s)).filter(|(k, _)| Some(k) != own.as_ref()).collect();
    by_key.into_values().collect()
}

fn with_attrs(schema: &Schema, attrs: &BTreeSet<&str>, filters: &[FilterPredicate]) -> Option<VizSpec> {
    encode_names(schema, attrs.iter().copied(), filters.to_vec()).ok()
}

/// Attributes that may join the view: not already visualized, not filtered.
fn free_attrs<'a>(view: &'a VizSpec, schema: &'a Schema) -> impl Iterator<Item = &'a str> + 'a {
    schema
        .columns()
        .map(|m| m.name.as_str())
        .filter(move |n| !view.has_attr(n) && view.filter_on(n).is_none())
}

/// Adds one attribute. Views already at the attribute limit yield nothing.
pub fn enhance(view: &VizSpec, schema: &Schema) -> Vec<VizSpec> {
    if view.attrs().len() >= MAX_ATTRS {
        return Vec::new();
    }
    let base: BTreeSet<&str> = view.attrs().iter().map(String::as_str).collect();
    let specs = free_attrs(view, schema).filter_map(|c| {
        let mut attrs = base.clone();
        attrs.insert(c);
        with_attrs(schema, &attrs, view.filters())
    });
    finish(Some(view), specs.collect::<Vec<_>>())
}

/// Adds a filter `D = v` for every filterable dimension `D` that is neither
/// visualized nor already filtered, and every value `v` of it.
pub fn filter_add(view: &VizSpec, schema: &Schema, cardinality_cap: usize) -> Vec<VizSpec> {
    let mut specs = Vec::new();
    for field in schema.filterable(cardinality_cap) {
        let name = &field.meta.name;
        if view.has_attr(name) || view.filter_on(name).is_some() {
            continue;
        }
        for v in &field.levels {
            let mut filters = view.filters().to_vec();
            filters.push(FilterPredicate::new(name.clone(), v.clone()));
            specs.push(view.with_filters(filters));
        }
    }
    finish(Some(view), specs)
}

/// Replaces the value of one existing filter with each other value of the
/// same attribute.
pub fn filter_swap(view: &VizSpec, schema: &Schema) -> Vec<VizSpec> {
    let mut specs = Vec::new();
    for (i, f) in view.filters().iter().enumerate() {
        let Some(field) = schema.field(&f.attr) else { continue };
        for v in field.levels.iter().filter(|v| **v != f.value) {
            let mut filters = view.filters().to_vec();
            filters[i] = FilterPredicate::new(f.attr.clone(), v.clone());
            specs.push(view.with_filters(filters));
        }
    }
    finish(Some(view), specs)
}

/// Removes one attribute (only when at least one remains).
pub fn generalize_attribute(view: &VizSpec, schema: &Schema) -> Vec<VizSpec> {
    if view.attrs().len() < 2 {
        return Vec::new();
    }
    let specs = view.attrs().iter().filter_map(|a| {
        let attrs: BTreeSet<&str> = view.attrs().iter().map(String::as_str).filter(|x| x != a).collect();
        with_attrs(schema, &attrs, view.filters())
    });
    finish(Some(view), specs.collect::<Vec<_>>())
}

/// Removes one filter.
pub fn generalize_value(view: &VizSpec) -> Vec<VizSpec> {
    let specs = (0..view.filters().len()).map(|i| {
        let mut filters = view.filters().to_vec();
        filters.remove(i);
        view.with_filters(filters)
    });
    finish(Some(view), specs.collect::<Vec<_>>())
}

/// Removes either one attribute or one filter.
pub fn generalize(view: &VizSpec, schema: &Schema) -> Vec<VizSpec> {
    finish(Some(view), generalize_attribute(view, schema).into_iter().chain(generalize_value(view)))
}

/// Replaces one visualized attribute with one attribute not in the view.
/// Filtered attributes are never swapped in.
pub fn pivot(view: &VizSpec, schema: &Schema) -> Vec<VizSpec> {
    let mut specs = Vec::new();
    for out in view.attrs() {
        for inn in free_attrs(view, schema) {
            let attrs: BTreeSet<&str> =
                view.attrs().iter().map(String::as_str).filter(|a| a != out).chain([inn]).collect();
            specs.extend(with_attrs(schema, &attrs, view.filters()));
        }
    }
    finish(Some(view), specs)
}

/// One uncolored scatterplot per unordered pair of measures.
pub fn correlation_candidates(schema: &Schema) -> Vec<VizSpec> {
    let measures: Vec<&str> = schema.measures().map(|m| m.name.as_str()).collect();
    let mut specs = Vec::new();
    for (i, a) in measures.iter().enumerate() {
        for b in &measures[i + 1..] {
            specs.extend(with_attrs(schema, &BTreeSet::from([*a, *b]), &[]));
        }
    }
    finish(None, specs)
}

/// One univariate chart per measure (histogram) and per filterable dimension
/// (count bar, or count line when temporal).
pub fn distribution_candidates(schema: &Schema, cardinality_cap: usize) -> Vec<VizSpec> {
    let measures = schema.measures().map(|m| m.name.as_str());
    let dims = schema.filterable(cardinality_cap).map(|f| f.meta.name.as_str());
    let specs = measures.chain(dims).filter_map(|a| with_attrs(schema, &BTreeSet::from([a]), &[]));
    finish(None, specs.collect::<Vec<_>>())
}

/// Charts comparable to a bar, line or histogram view: same mark and x
/// attribute, with either a different y measure or one added filter. The
/// view's filters are kept on every candidate. Scatter views have no family.
pub fn similarity_candidates(view: &VizSpec, schema: &Schema, cardinality_cap: usize) -> Vec<VizSpec> {
    if view.mark() == Mark::Scatter {
        return Vec::new();
    }
    let mut specs = Vec::new();
    if let Some(y) = view.y() {
        for m in schema.measures().filter(|m| m.name != y) {
            let attrs: BTreeSet<&str> =
                view.attrs().iter().map(String::as_str).filter(|a| *a != y).chain([m.name.as_str()]).collect();
            specs.extend(
                with_attrs(schema, &attrs, view.filters()).filter(|s| s.mark() == view.mark() && s.x() == view.x()),
            );
        }
    }
    specs.extend(filter_add(view, schema, cardinality_cap));
    finish(Some(view), specs)
}

/// Tagged candidates for one category. Context-dependent categories yield
/// nothing without a view.
pub fn candidates(kind: CategoryKind, view: Option<&VizSpec>, schema: &Schema, cardinality_cap: usize) -> Vec<Candidate> {
    let tag = |action: Action| move |spec: VizSpec| Candidate { spec, action };
    match (kind, view) {
        (CategoryKind::Correlation, _) => correlation_candidates(schema).into_iter().map(tag(Action::Correlation)).collect(),
        (CategoryKind::Distribution, _) => {
            distribution_candidates(schema, cardinality_cap).into_iter().map(tag(Action::Distribution)).collect()
        }
        (_, None) => Vec::new(),
        (CategoryKind::Enhance, Some(v)) => enhance(v, schema).into_iter().map(tag(Action::Enhance)).collect(),
        (CategoryKind::Filter, Some(v)) if v.filters().is_empty() => {
            filter_add(v, schema, cardinality_cap).into_iter().map(tag(Action::FilterAdd)).collect()
        }
        (CategoryKind::Filter, Some(v)) => filter_swap(v, schema).into_iter().map(tag(Action::FilterSwap)).collect(),
        (CategoryKind::Generalize, Some(v)) => {
            let mut out: Vec<Candidate> =
                generalize_attribute(v, schema).into_iter().map(tag(Action::GeneralizeAttribute)).collect();
            out.extend(generalize_value(v).into_iter().map(tag(Action::GeneralizeValue)));
            out.sort_by_key(|c| c.spec.key());
            out
        }
        (CategoryKind::Pivot, Some(v)) => pivot(v, schema).into_iter().map(tag(Action::Pivot)).collect(),
        (CategoryKind::Similarity, Some(v)) => {
            similarity_candidates(v, schema, cardinality_cap).into_iter().map(tag(Action::Similarity)).collect()
        }
    }
}
