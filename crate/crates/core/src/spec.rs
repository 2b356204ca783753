//! The visualization-state value type shared by the current view and every
//! recommendation.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::dataset::{Aggregation, ColumnMeta, Schema};
use crate::error::{Error, Result};

/// Upper bound on attributes in one visualization.
pub const MAX_ATTRS: usize = 3;

/// A single-value equality filter `attr = value` on a dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FilterPredicate {
    pub attr: String,
    pub value: String,
}

impl FilterPredicate {
    pub fn new(attr: impl Into<String>, value: impl Into<String>) -> Self {
        FilterPredicate { attr: attr.into(), value: value.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mark {
    Bar,
    Histogram,
    Line,
    Scatter,
}

impl Mark {
    pub fn as_str(self) -> &'static str {
        match self {
            Mark::Bar => "bar",
            Mark::Histogram => "histogram",
            Mark::Line => "line",
            Mark::Scatter => "scatter",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    X,
    Y,
    Color,
}

/// A fully encoded visualization.
///
/// Construct through [`auto_encode`] or [`SpecInput::resolve`]; both keep
/// `attrs` sorted and `filters` sorted by attribute so that structurally equal
/// specs compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VizSpec {
    attrs: Vec<String>,
    filters: Vec<FilterPredicate>,
    mark: Mark,
    channels: BTreeMap<String, Channel>,
    agg: Aggregation,
}

impl VizSpec {
    pub fn attrs(&self) -> &[String] {
        &self.attrs
    }

    pub fn filters(&self) -> &[FilterPredicate] {
        &self.filters
    }

    pub fn mark(&self) -> Mark {
        self.mark
    }

    pub fn agg(&self) -> Aggregation {
        self.agg
    }

    pub fn channels(&self) -> &BTreeMap<String, Channel> {
        &self.channels
    }

    fn on(&self, ch: Channel) -> Option<&str> {
        self.channels.iter().find(|(_, c)| **c == ch).map(|(a, _)| a.as_str())
    }

    pub fn x(&self) -> &str {
        self.on(Channel::X).expect("every encoded spec has an x channel")
    }

    pub fn y(&self) -> Option<&str> {
        self.on(Channel::Y)
    }

    pub fn color(&self) -> Option<&str> {
        self.on(Channel::Color)
    }

    pub fn has_attr(&self, name: &str) -> bool {
        self.attrs.iter().any(|a| a == name)
    }

    pub fn filter_on(&self, attr: &str) -> Option<&FilterPredicate> {
        self.filters.iter().find(|f| f.attr == attr)
    }

    /// Order-insensitive identity: mark, sorted attributes, sorted filters.
    pub fn key(&self) -> String {
        let attrs = serde_json::to_string(&self.attrs).expect("strings serialize");
        let filters: Vec<(&str, &str)> = self.filters.iter().map(|f| (f.attr.as_str(), f.value.as_str())).collect();
        let filters = serde_json::to_string(&filters).expect("strings serialize");
        format!("{}|{}|{}", self.mark.as_str(), attrs, filters)
    }

    /// Same encoding with a different filter set.
    pub fn with_filters(&self, mut filters: Vec<FilterPredicate>) -> VizSpec {
        filters.sort();
        VizSpec { filters, ..self.clone() }
    }

    pub fn without_filters(&self) -> VizSpec {
        self.with_filters(Vec::new())
    }
}

/// Canonical key for deduplication and promote references.
pub fn canonicalize(spec: &VizSpec) -> String {
    spec.key()
}

/// Picks the mark and channel assignment for a set of attributes.
///
/// | measures | dimensions | mark                         |
/// |----------|------------|------------------------------|
/// | 1        | 0          | histogram of counts          |
/// | 0        | 1–2        | bar of counts (line if x is temporal), 2nd dim on color |
/// | 1        | 1–2        | bar of the measure (line if x is temporal), 2nd dim on color |
/// | 2        | 0–1        | scatter, dimension on color  |
///
/// Two measures put the alphabetically earlier one on x. Among dimensions a
/// temporal one takes x, otherwise the alphabetically earlier one does.
pub fn auto_encode(attrs: &[&ColumnMeta], mut filters: Vec<FilterPredicate>) -> Result<VizSpec> {
    if attrs.is_empty() || attrs.len() > MAX_ATTRS {
        return Err(Error::UnsupportedSpec(format!("{} attributes (expected 1 to {MAX_ATTRS})", attrs.len())));
    }
    let mut names = BTreeSet::new();
    for a in attrs {
        if !names.insert(a.name.as_str()) {
            return Err(Error::UnsupportedSpec(format!("attribute `{}` repeated", a.name)));
        }
    }
    let mut measures: Vec<&ColumnMeta> = attrs.iter().copied().filter(|a| a.is_measure()).collect();
    let mut dims: Vec<&ColumnMeta> = attrs.iter().copied().filter(|a| a.is_dimension()).collect();
    measures.sort_by(|a, b| a.name.cmp(&b.name));
    dims.sort_by(|a, b| (!a.is_temporal(), &a.name).cmp(&(!b.is_temporal(), &b.name)));

    let mut channels = BTreeMap::new();
    let (mark, agg) = match (measures.len(), dims.len()) {
        (1, 0) => {
            channels.insert(measures[0].name.clone(), Channel::X);
            (Mark::Histogram, Aggregation::Count)
        }
        (0, 1 | 2) | (1, 1 | 2) => {
            let x = dims[0];
            channels.insert(x.name.clone(), Channel::X);
            if let Some(c) = dims.get(1) {
                channels.insert(c.name.clone(), Channel::Color);
            }
            let agg = match measures.first() {
                Some(m) => {
                    channels.insert(m.name.clone(), Channel::Y);
                    m.default_agg
                }
                None => Aggregation::Count,
            };
            (if x.is_temporal() { Mark::Line } else { Mark::Bar }, agg)
        }
        (2, 0 | 1) => {
            channels.insert(measures[0].name.clone(), Channel::X);
            channels.insert(measures[1].name.clone(), Channel::Y);
            if let Some(c) = dims.first() {
                channels.insert(c.name.clone(), Channel::Color);
            }
            (Mark::Scatter, Aggregation::Mean)
        }
        (3, _) => return Err(Error::UnsupportedSpec("three measures".into())),
        (_, _) => return Err(Error::UnsupportedSpec("three dimensions".into())),
    };
    filters.sort();
    Ok(VizSpec { attrs: names.into_iter().map(str::to_string).collect(), filters, mark, channels, agg })
}

/// Encodes attributes looked up by name; the schema must contain them.
pub(crate) fn encode_names<'a>(
    schema: &Schema,
    attrs: impl IntoIterator<Item = &'a str>,
    filters: Vec<FilterPredicate>,
) -> Result<VizSpec> {
    let metas = attrs
        .into_iter()
        .map(|a| schema.meta(a).ok_or_else(|| Error::UnknownColumn(a.to_string())))
        .collect::<Result<Vec<_>>>()?;
    auto_encode(&metas, filters)
}

/// The wire form of a requested view: attributes and filters only. Mark and
/// channels are derived, so any extra fields a client sends are ignored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecInput {
    #[serde(default)]
    pub attrs: Vec<String>,
    #[serde(default)]
    pub filters: Vec<FilterPredicate>,
}

impl From<&VizSpec> for SpecInput {
    fn from(s: &VizSpec) -> Self {
        SpecInput { attrs: s.attrs.clone(), filters: s.filters.clone() }
    }
}

impl SpecInput {
    /// Validates against `schema` and encodes. An input with no attributes and
    /// no filters is the empty view.
    pub fn resolve(&self, schema: &Schema) -> Result<Option<VizSpec>> {
        if self.attrs.is_empty() {
            return match self.filters.first() {
                None => Ok(None),
                Some(f) => Err(Error::InvalidFilter {
                    attr: f.attr.clone(),
                    reason: "a filter needs at least one attribute in the view".into(),
                }),
            };
        }
        let mut seen = HashSet::new();
        for f in &self.filters {
            let invalid = |reason: &str| Error::InvalidFilter { attr: f.attr.clone(), reason: reason.into() };
            let field = schema.field(&f.attr).ok_or_else(|| Error::UnknownColumn(f.attr.clone()))?;
            if !field.meta.is_dimension() {
                return Err(invalid("filters apply to dimensions only"));
            }
            if field.level_index(&f.value).is_none() {
                return Err(invalid(&format!("`{}` is not a value of this attribute", f.value)));
            }
            if !seen.insert(f.attr.as_str()) {
                return Err(invalid("at most one filter per attribute"));
            }
            if self.attrs.contains(&f.attr) {
                return Err(invalid("attribute is both visualized and filtered"));
            }
        }
        encode_names(schema, self.attrs.iter().map(String::as_str), self.filters.clone()).map(Some)
    }
}

/// One element of a visualization: an attribute or a filter predicate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiffElement {
    Attr { name: String },
    Filter { attr: String, value: String },
}

/// Element-wise difference of a recommendation from the current view.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecDiff {
    pub added: Vec<DiffElement>,
    pub removed: Vec<DiffElement>,
    /// `(in current, in recommendation)` pairs.
    pub swapped: Vec<(DiffElement, DiffElement)>,
}

impl SpecDiff {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty() && self.swapped.is_empty()
    }

    /// Number of single lattice moves the diff represents.
    pub fn moves(&self) -> usize {
        self.added.len() + self.removed.len() + self.swapped.len()
    }
}

/// Diff of `rec` against `current`.
///
/// Attributes added and removed in equal numbers are reported as swaps,
/// paired in sorted order. A filter whose attribute is kept but whose value
/// changes is a swap.
pub fn spec_diff(current: &VizSpec, rec: &VizSpec) -> SpecDiff {
    let cur: BTreeSet<&String> = current.attrs.iter().collect();
    let new: BTreeSet<&String> = rec.attrs.iter().collect();
    let added_a: Vec<&String> = new.difference(&cur).copied().collect();
    let removed_a: Vec<&String> = cur.difference(&new).copied().collect();

    let attr = |n: &String| DiffElement::Attr { name: n.clone() };
    let filt = |f: &FilterPredicate| DiffElement::Filter { attr: f.attr.clone(), value: f.value.clone() };

    let mut diff = SpecDiff::default();
    if !added_a.is_empty() && added_a.len() == removed_a.len() {
        diff.swapped.extend(removed_a.iter().zip(&added_a).map(|(r, a)| (attr(r), attr(a))));
    } else {
        diff.added.extend(added_a.iter().map(|a| attr(a)));
        diff.removed.extend(removed_a.iter().map(|r| attr(r)));
    }

    for f in &rec.filters {
        match current.filter_on(&f.attr) {
            None => diff.added.push(filt(f)),
            Some(old) if old.value != f.value => diff.swapped.push((filt(old), filt(f))),
            Some(_) => {}
        }
    }
    for f in &current.filters {
        if rec.filter_on(&f.attr).is_none() {
            diff.removed.push(filt(f));
        }
    }
    diff
}
