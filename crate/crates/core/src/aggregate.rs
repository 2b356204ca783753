//! Materializes the data behind a [`VizSpec`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{format_number, Aggregation, Dataset};
use crate::error::{Error, Result};
use crate::spec::{Mark, VizSpec};

/// Equal-width bins per histogram, spanning the column's full [min, max].
pub const HISTOGRAM_BINS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    /// Color-category label; `None` for uncolored charts.
    pub key: Option<String>,
    /// One value per x label. Groups with no rows are 0.
    pub values: Vec<f64>,
}

/// Chart data for one visualization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AggregatedData {
    /// Bars, lines and histograms.
    Grouped { x_labels: Vec<String>, series: Vec<Series>, n_underlying: usize },
    /// Scatterplots: raw `[x, y]` points, with color labels when colored.
    Points { points: Vec<[f64; 2]>, labels: Option<Vec<String>>, n_underlying: usize },
}

impl AggregatedData {
    pub fn n_underlying(&self) -> usize {
        match self {
            AggregatedData::Grouped { n_underlying, .. } | AggregatedData::Points { n_underlying, .. } => *n_underlying,
        }
    }

    /// True when no row survived the filters.
    pub fn is_empty(&self) -> bool {
        self.n_underlying() == 0
    }

    /// Values keyed by `(series, x label)`, for label-aligned comparisons.
    pub fn keyed_values(&self) -> BTreeMap<(Option<&str>, &str), f64> {
        let mut out = BTreeMap::new();
        if let AggregatedData::Grouped { x_labels, series, .. } = self {
            for s in series {
                for (label, v) in x_labels.iter().zip(&s.values) {
                    out.insert((s.key.as_deref(), label.as_str()), *v);
                }
            }
        }
        out
    }

    /// All y values, series after series.
    pub fn flat_values(&self) -> Vec<f64> {
        match self {
            AggregatedData::Grouped { series, .. } => series.iter().flat_map(|s| s.values.iter().copied()).collect(),
            AggregatedData::Points { .. } => Vec::new(),
        }
    }

    /// Deterministic stride subsample of scatter points down to `cap`.
    pub fn capped(&self, cap: usize) -> AggregatedData {
        match self {
            AggregatedData::Points { points, labels, n_underlying } if points.len() > cap => {
                let idx = stride_indices(points.len(), cap);
                AggregatedData::Points {
                    points: idx.iter().map(|&i| points[i]).collect(),
                    labels: labels.as_ref().map(|l| idx.iter().map(|&i| l[i].clone()).collect()),
                    n_underlying: *n_underlying,
                }
            }
            other => other.clone(),
        }
    }

    fn empty(mark: Mark) -> AggregatedData {
        match mark {
            Mark::Scatter => AggregatedData::Points { points: Vec::new(), labels: None, n_underlying: 0 },
            _ => AggregatedData::Grouped { x_labels: Vec::new(), series: Vec::new(), n_underlying: 0 },
        }
    }
}

/// `cap` evenly spaced indices out of `0..len`.
pub fn stride_indices(len: usize, cap: usize) -> Vec<usize> {
    if len <= cap {
        return (0..len).collect();
    }
    (0..cap).map(|i| i * len / cap).collect()
}

/// Applies filters conjunctively, groups and aggregates. Rows with a null in
/// any referenced column are dropped. A filter on a value the column does not
/// contain yields an empty result rather than an error.
pub fn aggregate(ds: &Dataset, spec: &VizSpec) -> Result<AggregatedData> {
    let n = ds.row_count();
    let mut keep = vec![true; n];
    for f in spec.filters() {
        let (field, data) = ds.column(&f.attr)?;
        let codes = data.codes.as_deref().ok_or_else(|| Error::InvalidFilter {
            attr: f.attr.clone(),
            reason: "not a dimension".into(),
        })?;
        let Some(level) = field.level_index(&f.value) else {
            return Ok(AggregatedData::empty(spec.mark()));
        };
        let level = Some(level as u32);
        for (k, c) in keep.iter_mut().zip(codes) {
            *k &= *c == level;
        }
    }

    match spec.mark() {
        Mark::Histogram => histogram(ds, spec, &keep),
        Mark::Bar | Mark::Line => grouped(ds, spec, &keep),
        Mark::Scatter => scatter(ds, spec, &keep),
    }
}

/// Non-null numeric values of `column` on rows passing the spec's filters.
pub fn filtered_values(ds: &Dataset, spec: &VizSpec, column: &str) -> Result<Vec<f64>> {
    let values = numbers(ds, column)?;
    let mut keep = vec![true; ds.row_count()];
    for f in spec.filters() {
        let (field, _) = ds.column(&f.attr)?;
        let level = field.level_index(&f.value).map(|l| l as u32);
        for (k, c) in keep.iter_mut().zip(codes(ds, &f.attr)?) {
            *k &= level.is_some() && *c == level;
        }
    }
    Ok(values.iter().zip(&keep).filter_map(|(v, k)| if *k { *v } else { None }).collect())
}

fn numbers<'a>(ds: &'a Dataset, name: &str) -> Result<&'a [Option<f64>]> {
    ds.numbers(name)?.ok_or_else(|| Error::UnsupportedSpec(format!("`{name}` has no numeric values")))
}

fn codes<'a>(ds: &'a Dataset, name: &str) -> Result<&'a [Option<u32>]> {
    ds.codes(name)?.ok_or_else(|| Error::UnsupportedSpec(format!("`{name}` is not a dimension")))
}

fn histogram(ds: &Dataset, spec: &VizSpec, keep: &[bool]) -> Result<AggregatedData> {
    let (field, _) = ds.column(spec.x())?;
    let values = numbers(ds, spec.x())?;
    let (Some(min), Some(max)) = (field.meta.min, field.meta.max) else {
        return Ok(AggregatedData::empty(Mark::Histogram));
    };
    let bins = if max > min { HISTOGRAM_BINS } else { 1 };
    let width = (max - min) / bins as f64;
    let mut counts = vec![0.0; bins];
    let mut n_underlying = 0;
    for (v, _) in values.iter().zip(keep).filter(|(_, k)| **k) {
        let Some(v) = v else { continue };
        let b = if bins == 1 { 0 } else { (((v - min) / width) as usize).min(bins - 1) };
        counts[b] += 1.0;
        n_underlying += 1;
    }
    let x_labels = (0..bins)
        .map(|i| {
            let lo = min + width * i as f64;
            let hi = if i + 1 == bins { max } else { min + width * (i + 1) as f64 };
            let close = if i + 1 == bins { ']' } else { ')' };
            format!("[{}, {}{close}", format_number(lo), format_number(hi))
        })
        .collect();
    if n_underlying == 0 {
        return Ok(AggregatedData::empty(Mark::Histogram));
    }
    Ok(AggregatedData::Grouped { x_labels, series: vec![Series { key: None, values: counts }], n_underlying })
}

fn grouped(ds: &Dataset, spec: &VizSpec, keep: &[bool]) -> Result<AggregatedData> {
    let (x_field, _) = ds.column(spec.x())?;
    let x_codes = codes(ds, spec.x())?;
    let color = spec.color().map(|c| Ok::<_, Error>((ds.column(c)?.0, codes(ds, c)?))).transpose()?;
    let y = spec.y().map(|m| numbers(ds, m)).transpose()?;

    // (color level, x level) -> (sum, count)
    let mut groups: BTreeMap<(Option<u32>, u32), (f64, usize)> = BTreeMap::new();
    let mut n_underlying = 0;
    for row in (0..keep.len()).filter(|&r| keep[r]) {
        let Some(x) = x_codes[row] else { continue };
        let c = match &color {
            Some((_, codes)) => match codes[row] {
                Some(c) => Some(c),
                None => continue,
            },
            None => None,
        };
        let v = match y {
            Some(ys) => match ys[row] {
                Some(v) => v,
                None => continue,
            },
            None => 1.0,
        };
        let g = groups.entry((c, x)).or_insert((0.0, 0));
        g.0 += v;
        g.1 += 1;
        n_underlying += 1;
    }
    if n_underlying == 0 {
        return Ok(AggregatedData::empty(spec.mark()));
    }

    let mut xs: Vec<u32> = groups.keys().map(|(_, x)| *x).collect();
    xs.sort_unstable();
    xs.dedup();
    let mut cs: Vec<Option<u32>> = groups.keys().map(|(c, _)| *c).collect();
    cs.dedup();
    let agg = spec.agg();
    let series = cs
        .iter()
        .map(|&c| Series {
            key: c.map(|c| color.as_ref().expect("color codes imply a color field").0.levels[c as usize].clone()),
            values: xs
                .iter()
                .map(|&x| match groups.get(&(c, x)) {
                    None => 0.0,
                    Some(&(sum, count)) => match agg {
                        Aggregation::Mean => sum / count as f64,
                        Aggregation::Sum => sum,
                        Aggregation::Count => count as f64,
                    },
                })
                .collect(),
        })
        .collect();
    let x_labels = xs.iter().map(|&x| x_field.levels[x as usize].clone()).collect();
    Ok(AggregatedData::Grouped { x_labels, series, n_underlying })
}

fn scatter(ds: &Dataset, spec: &VizSpec, keep: &[bool]) -> Result<AggregatedData> {
    let xs = numbers(ds, spec.x())?;
    let ys = numbers(ds, spec.y().expect("scatter has a y channel"))?;
    let color = spec.color().map(|c| Ok::<_, Error>((ds.column(c)?.0, codes(ds, c)?))).transpose()?;
    let mut points = Vec::new();
    let mut labels = color.as_ref().map(|_| Vec::new());
    for row in (0..keep.len()).filter(|&r| keep[r]) {
        let (Some(x), Some(y)) = (xs[row], ys[row]) else { continue };
        if let (Some((field, codes)), Some(out)) = (&color, labels.as_mut()) {
            let Some(c) = codes[row] else { continue };
            out.push(field.levels[c as usize].clone());
        }
        points.push([x, y]);
    }
    let n_underlying = points.len();
    Ok(AggregatedData::Points { points, labels, n_underlying })
}
