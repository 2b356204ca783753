//! Interestingness objectives and the chart-type dispatch that picks one.
//!
//! | candidate                                  | objective                     |
//! |--------------------------------------------|-------------------------------|
//! | Correlation category                       | \|Spearman\| (or MI)          |
//! | Distribution category                      | \|skewness\|                  |
//! | Similarity category                        | Euclidean distance to view    |
//! | uncolored scatter                          | \|Spearman\| (or MI)          |
//! | colored scatter                            | mean silhouette               |
//! | bar / line / histogram, no filter          | non-uniformity                |
//! | bar / line / histogram, filtered           | deviation from unfiltered     |
//!
//! Scorers return `None` when the objective is undefined for the input. The
//! candidate is then dropped instead of being scored as zero.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::aggregate::{aggregate, filtered_values, AggregatedData};
use crate::dataset::Dataset;
use crate::lattice::CategoryKind;
use crate::spec::{Mark, VizSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Skew,
    Monotonicity,
    NonUniformity,
    Deviation,
    Correlation,
    Separability,
    SimilarityDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterestingnessScore {
    pub value: f64,
    pub objective: Objective,
    pub higher_is_better: bool,
}

impl InterestingnessScore {
    fn new(value: f64, objective: Objective) -> Result<Self, DropReason> {
        if !value.is_finite() {
            return Err(DropReason::NonFinite);
        }
        Ok(InterestingnessScore { value, objective, higher_is_better: objective != Objective::SimilarityDistance })
    }
}

/// Why a candidate received no score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// No rows survive the candidate's filters.
    EmptyResult,
    /// Fewer values than the objective needs.
    TooFewValues,
    /// Constant input where spread is required.
    ZeroVariance,
    /// All-zero bars.
    ZeroMass,
    /// Fewer than two color categories.
    SingleLabel,
    /// Similarity scoring without a comparable current view.
    NoReference,
    NonFinite,
    /// The candidate could not be materialized.
    Invalid,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMetric {
    #[default]
    Spearman,
    #[serde(alias = "mi")]
    MutualInformation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoringOptions {
    pub metric: CorrelationMetric,
    pub mi_bins: usize,
    /// Points kept (by deterministic stride) before computing silhouettes.
    pub silhouette_cap: usize,
}

impl Default for ScoringOptions {
    fn default() -> Self {
        ScoringOptions { metric: CorrelationMetric::Spearman, mi_bins: 10, silhouette_cap: 2000 }
    }
}

/// Absolute adjusted Fisher–Pearson skewness `G1`.
pub fn skewness(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 3 {
        return None;
    }
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    if lo == hi {
        return None;
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3) = (0.0, 0.0);
    for v in values {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= nf;
    m3 /= nf;
    if m2 <= 0.0 {
        return None;
    }
    let g1 = m3 / m2.powf(1.5);
    Some((g1 * (nf * (nf - 1.0)).sqrt() / (nf - 2.0)).abs())
}

/// Fractional ranks starting at 1; ties share the average of their positions.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman's rank correlation, in [-1, 1]. Needs at least 3 pairs and
/// non-constant inputs.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "spearman needs paired samples");
    if x.len() < 3 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    // Identical or mirrored rankings are exactly ±1; the general formula can
    // land an ulp away.
    let top = x.len() as f64 + 1.0;
    let distinct = rx.iter().any(|r| *r != rx[0]);
    if distinct && rx == ry {
        return Some(1.0);
    }
    if distinct && rx.iter().zip(&ry).all(|(a, b)| a + b == top) {
        return Some(-1.0);
    }
    pearson(&rx, &ry)
}

fn bin_index(v: f64, lo: f64, hi: f64, bins: usize) -> usize {
    (((v - lo) / (hi - lo) * bins as f64) as usize).min(bins - 1)
}

/// Plug-in mutual information (nats) over a `bins × bins` equal-width grid.
/// Zero when either variable is constant.
pub fn mutual_information(x: &[f64], y: &[f64], bins: usize) -> f64 {
    assert_eq!(x.len(), y.len(), "mutual information needs paired samples");
    assert!(bins >= 2, "need at least two bins");
    let n = x.len();
    if n == 0 {
        return 0.0;
    }
    let range = |v: &[f64]| v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &a| (l.min(a), h.max(a)));
    let ((xl, xh), (yl, yh)) = (range(x), range(y));
    if xl == xh || yl == yh {
        return 0.0;
    }
    let mut joint = vec![0usize; bins * bins];
    let mut px = vec![0usize; bins];
    let mut py = vec![0usize; bins];
    for (a, b) in x.iter().zip(y) {
        let (i, j) = (bin_index(*a, xl, xh, bins), bin_index(*b, yl, yh, bins));
        joint[i * bins + j] += 1;
        px[i] += 1;
        py[j] += 1;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for i in 0..bins {
        for j in 0..bins {
            let c = joint[i * bins + j];
            if c > 0 {
                let p = c as f64 / nf;
                mi += p * (p * nf * nf / (px[i] as f64 * py[j] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

fn l1_normalized(v: &[f64]) -> Option<Vec<f64>> {
    let mass: f64 = v.iter().map(|x| x.abs()).sum();
    (mass > 0.0).then(|| v.iter().map(|x| x.abs() / mass).collect())
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// L2 distance between the L1-normalized magnitudes and the uniform vector.
pub fn non_uniformity(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let p = l1_normalized(values)?;
    if values.iter().all(|v| v.abs() == values[0].abs()) {
        return Some(0.0);
    }
    let u = vec![1.0 / values.len() as f64; values.len()];
    Some(l2(&p, &u))
}

/// L2 distance between two L1-normalized, already aligned vectors.
pub fn deviation_vectors(filtered: &[f64], overall: &[f64]) -> Option<f64> {
    Some(l2(&l1_normalized(filtered)?, &l1_normalized(overall)?))
}

/// Aligns two charts on the union of their `(series, label)` keys, filling
/// missing entries with 0.
pub fn align(a: &AggregatedData, b: &AggregatedData) -> (Vec<f64>, Vec<f64>) {
    let (ka, kb) = (a.keyed_values(), b.keyed_values());
    let mut keys: Vec<_> = ka.keys().chain(kb.keys()).copied().collect();
    keys.sort();
    keys.dedup();
    keys.iter().map(|k| (ka.get(k).copied().unwrap_or(0.0), kb.get(k).copied().unwrap_or(0.0))).unzip()
}

/// Deviation of a filtered chart from its unfiltered counterpart.
pub fn deviation(filtered: &AggregatedData, overall: &AggregatedData) -> Option<f64> {
    if filtered.is_empty() || overall.is_empty() {
        return None;
    }
    let (f, o) = align(filtered, overall);
    deviation_vectors(&f, &o)
}

fn min_max_normalized(v: &[f64]) -> Vec<f64> {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &a| (l.min(a), h.max(a)));
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return vec![0.0; v.len()];
    }
    v.iter().map(|x| (x - lo) / (hi - lo)).collect()
}

/// Euclidean distance between the min-max normalized values of two aligned
/// vectors. A constant vector normalizes to all zeros.
pub fn euclidean_vectors(a: &[f64], b: &[f64]) -> f64 {
    l2(&min_max_normalized(a), &min_max_normalized(b))
}

/// Shape distance between two charts: 0 for identical normalized shapes.
pub fn euclidean_similarity(a: &AggregatedData, b: &AggregatedData) -> f64 {
    let (x, y) = align(a, b);
    euclidean_vectors(&x, &y)
}

/// Mean silhouette over points with integer cluster labels. Singleton
/// clusters contribute 0. `None` with fewer than two clusters.
pub fn silhouette(points: &[[f64; 2]], labels: &[usize]) -> Option<f64> {
    assert_eq!(points.len(), labels.len());
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return None;
    }
    let mut total = 0.0;
    let mut sums = vec![0.0; k];
    for (i, p) in points.iter().enumerate() {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for (q, &l) in points.iter().zip(labels) {
            sums[l] += ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        }
        let own = labels[i];
        if sizes[own] < 2 {
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    Some(total / points.len() as f64)
}

/// Mean silhouette of colored scatter points after per-axis min-max scaling.
pub fn separability(points: &[[f64; 2]], labels: &[String]) -> Option<f64> {
    let xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = points.iter().map(|p| p[1]).collect();
    let scaled: Vec<[f64; 2]> =
        min_max_normalized(&xs).into_iter().zip(min_max_normalized(&ys)).map(|(x, y)| [x, y]).collect();
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut sorted: Vec<&str> = labels.iter().map(String::as_str).collect();
    sorted.sort_unstable();
    sorted.dedup();
    for (i, l) in sorted.into_iter().enumerate() {
        ids.insert(l, i);
    }
    let codes: Vec<usize> = labels.iter().map(|l| ids[l.as_str()]).collect();
    silhouette(&scaled, &codes)
}

/// What score_viz needs beyond the candidate itself.
pub struct ScoreContext<'a> {
    pub ds: &'a Dataset,
    pub category: CategoryKind,
    /// Chart data of the current view, for Similarity.
    pub current: Option<&'a AggregatedData>,
    /// Unfiltered chart data by canonical key, consulted before recomputing
    /// a deviation baseline.
    pub baselines: Option<&'a BTreeMap<String, AggregatedData>>,
    pub options: ScoringOptions,
}

fn correlation_score(ctx: &ScoreContext<'_>, spec: &VizSpec, data: &AggregatedData, objective: Objective) -> Result<InterestingnessScore, DropReason> {
    let AggregatedData::Points { points, .. } = data else { return Err(DropReason::Invalid) };
    let value = match ctx.options.metric {
        CorrelationMetric::Spearman => {
            let cached = spec.filters().is_empty().then(|| ctx.ds.correlations().get(spec.x(), spec.y()?)).flatten();
            match cached {
                Some(r) => r.abs(),
                None => {
                    if points.len() < 3 {
                        return Err(DropReason::TooFewValues);
                    }
                    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|p| (p[0], p[1])).unzip();
                    spearman(&xs, &ys).ok_or(DropReason::ZeroVariance)?.abs()
                }
            }
        }
        CorrelationMetric::MutualInformation => {
            if points.len() < 3 {
                return Err(DropReason::TooFewValues);
            }
            let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|p| (p[0], p[1])).unzip();
            mutual_information(&xs, &ys, ctx.options.mi_bins)
        }
    };
    let objective = match (objective, ctx.options.metric) {
        (Objective::Monotonicity, CorrelationMetric::MutualInformation) => Objective::Correlation,
        (o, _) => o,
    };
    InterestingnessScore::new(value, objective)
}

/// Scores one candidate for the given category.
pub fn score_viz(candidate: &VizSpec, ctx: &ScoreContext<'_>) -> Result<InterestingnessScore, DropReason> {
    let data = aggregate(ctx.ds, candidate).map_err(|_| DropReason::Invalid)?;
    if data.is_empty() {
        return Err(DropReason::EmptyResult);
    }
    match ctx.category {
        CategoryKind::Similarity => {
            let current = ctx.current.ok_or(DropReason::NoReference)?;
            InterestingnessScore::new(euclidean_similarity(&data, current), Objective::SimilarityDistance)
        }
        CategoryKind::Correlation => correlation_score(ctx, candidate, &data, Objective::Monotonicity),
        CategoryKind::Distribution => {
            let values = match candidate.mark() {
                Mark::Histogram => filtered_values(ctx.ds, candidate, candidate.x()).map_err(|_| DropReason::Invalid)?,
                _ => data.flat_values(),
            };
            if values.len() < 3 {
                return Err(DropReason::TooFewValues);
            }
            InterestingnessScore::new(skewness(&values).ok_or(DropReason::ZeroVariance)?, Objective::Skew)
        }
        _ => match candidate.mark() {
            Mark::Scatter => match &data {
                AggregatedData::Points { points, labels: Some(labels), .. } => {
                    let capped = data.capped(ctx.options.silhouette_cap);
                    let (points, labels) = match &capped {
                        AggregatedData::Points { points, labels: Some(l), .. } => (points, l),
                        _ => (points, labels),
                    };
                    let s = separability(points, labels).ok_or(DropReason::SingleLabel)?;
                    InterestingnessScore::new(s, Objective::Separability)
                }
                _ => correlation_score(ctx, candidate, &data, Objective::Correlation),
            },
            _ if candidate.filters().is_empty() => {
                let v = data.flat_values();
                if v.len() < 2 {
                    return Err(DropReason::TooFewValues);
                }
                InterestingnessScore::new(non_uniformity(&v).ok_or(DropReason::ZeroMass)?, Objective::NonUniformity)
            }
            _ => {
                let base = candidate.without_filters();
                let overall = match ctx.baselines.and_then(|b| b.get(&base.key())) {
                    Some(o) => o.clone(),
                    None => aggregate(ctx.ds, &base).map_err(|_| DropReason::Invalid)?,
                };
                InterestingnessScore::new(deviation(&data, &overall).ok_or(DropReason::ZeroMass)?, Objective::Deviation)
            }
        },
    }
}
