//! Independent reference implementations and a random-dataset generator,
//! shared by the integration tests and the acceptance harness.
//!
//! Nothing in here calls the library's scorers or enumerators. The oracles
//! are written for clarity over speed (quadratic rank computation, entropy
//! form of mutual information, and so on).

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nextview_core::{load_csv, Dataset, FilterPredicate, LoadOptions, Role, Schema, SpecInput, VizSpec};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

// ---------------------------------------------------------------- scorers

pub fn skewness(v: &[f64]) -> Option<f64> {
    let n = v.len() as f64;
    if v.len() < 3 {
        return None;
    }
    let mean = v.iter().sum::<f64>() / n;
    let m2 = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = v.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    if v.iter().all(|x| *x == v[0]) || m2 == 0.0 {
        return None;
    }
    let b1 = m3 / m2.sqrt().powi(3);
    Some((b1 * (n * (n - 1.0)).sqrt() / (n - 2.0)).abs())
}

/// Rank of each value: 1 + (number strictly smaller) + (ties - 1) / 2.
pub fn avg_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|x| {
            let less = v.iter().filter(|y| *y < x).count() as f64;
            let equal = v.iter().filter(|y| *y == x).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 3 {
        return None;
    }
    let (rx, ry) = (avg_ranks(x), avg_ranks(y));
    let n = x.len() as f64;
    let (sx, sy) = (rx.iter().sum::<f64>(), ry.iter().sum::<f64>());
    let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| a * b).sum();
    let sxx: f64 = rx.iter().map(|a| a * a).sum();
    let syy: f64 = ry.iter().map(|a| a * a).sum();
    let cov = sxy - sx * sy / n;
    let vx = sxx - sx * sx / n;
    let vy = syy - sy * sy / n;
    if vx <= 1e-12 || vy <= 1e-12 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts.filter(|c| *c > 0).map(|c| c as f64 / n).map(|p| -p * p.ln()).sum()
}

/// MI as H(X) + H(Y) - H(X, Y) over an equal-width grid.
pub fn mutual_information(x: &[f64], y: &[f64], bins: usize) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let edges = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let ((xl, xh), (yl, yh)) = (edges(x), edges(y));
    if xl == xh || yl == yh {
        return 0.0;
    }
    let bin = |v: f64, lo: f64, hi: f64| -> usize {
        let width = (hi - lo) / bins as f64;
        let b = ((v - lo) / width).floor() as i64;
        b.clamp(0, bins as i64 - 1) as usize
    };
    let mut hx = BTreeMap::new();
    let mut hy = BTreeMap::new();
    let mut hxy = BTreeMap::new();
    for (a, b) in x.iter().zip(y) {
        let (i, j) = (bin(*a, xl, xh), bin(*b, yl, yh));
        *hx.entry(i).or_insert(0usize) += 1;
        *hy.entry(j).or_insert(0usize) += 1;
        *hxy.entry((i, j)).or_insert(0usize) += 1;
    }
    let n = x.len() as f64;
    (entropy(hx.into_values(), n) + entropy(hy.into_values(), n) - entropy(hxy.into_values(), n)).max(0.0)
}

fn normalize_l1(v: &[f64]) -> Option<Vec<f64>> {
    let total: f64 = v.iter().map(|a| a.abs()).sum();
    if total == 0.0 {
        return None;
    }
    Some(v.iter().map(|a| a.abs() / total).collect())
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    s.sqrt()
}

pub fn non_uniformity(v: &[f64]) -> Option<f64> {
    if v.len() < 2 {
        return None;
    }
    let p = normalize_l1(v)?;
    let u = 1.0 / v.len() as f64;
    Some(p.iter().map(|x| (x - u).powi(2)).sum::<f64>().sqrt())
}

/// Deviation between two labeled bar vectors, aligned on the union of
/// labels with missing bars read as zero.
pub fn deviation(filtered: &BTreeMap<String, f64>, overall: &BTreeMap<String, f64>) -> Option<f64> {
    let labels: BTreeSet<&String> = filtered.keys().chain(overall.keys()).collect();
    let f: Vec<f64> = labels.iter().map(|l| filtered.get(*l).copied().unwrap_or(0.0)).collect();
    let o: Vec<f64> = labels.iter().map(|l| overall.get(*l).copied().unwrap_or(0.0)).collect();
    Some(euclid(&normalize_l1(&f)?, &normalize_l1(&o)?))
}

fn min_max(v: &[f64]) -> Vec<f64> {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return vec![0.0; v.len()];
    }
    v.iter().map(|x| (x - lo) / (hi - lo)).collect()
}

pub fn euclidean_similarity(a: &[f64], b: &[f64]) -> f64 {
    euclid(&min_max(a), &min_max(b))
}

/// Textbook silhouette: s(i) = (b - a) / max(a, b), with s(i) = 0 for points
/// in singleton clusters, averaged over all points.
pub fn silhouette(points: &[[f64; 2]], labels: &[String]) -> Option<f64> {
    let clusters: BTreeSet<&String> = labels.iter().collect();
    if clusters.len() < 2 {
        return None;
    }
    let dist = |i: usize, j: usize| (points[i][0] - points[j][0]).hypot(points[i][1] - points[j][1]);
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let own: Vec<usize> = (0..n).filter(|&j| j != i && labels[j] == labels[i]).collect();
        if own.is_empty() {
            continue;
        }
        let a = own.iter().map(|&j| dist(i, j)).sum::<f64>() / own.len() as f64;
        let mut b = f64::INFINITY;
        for c in &clusters {
            if **c == labels[i] {
                continue;
            }
            let members: Vec<usize> = (0..n).filter(|&j| labels[j] == **c).collect();
            b = b.min(members.iter().map(|&j| dist(i, j)).sum::<f64>() / members.len() as f64);
        }
        if a.max(b) > 0.0 {
            total += (b - a) / a.max(b);
        }
    }
    Some(total / n as f64)
}

/// Silhouette after scaling each axis to [0, 1].
pub fn separability(points: &[[f64; 2]], labels: &[String]) -> Option<f64> {
    let xs = min_max(&points.iter().map(|p| p[0]).collect::<Vec<_>>());
    let ys = min_max(&points.iter().map(|p| p[1]).collect::<Vec<_>>());
    let scaled: Vec<[f64; 2]> = xs.into_iter().zip(ys).map(|(x, y)| [x, y]).collect();
    silhouette(&scaled, labels)
}

// ---------------------------------------------------------------- lattice

/// A spec reduced to what the lattice cares about.
pub type Sig = (BTreeSet<String>, BTreeSet<(String, String)>);

pub fn sig(spec: &VizSpec) -> Sig {
    (
        spec.attrs().iter().cloned().collect(),
        spec.filters().iter().map(|f| (f.attr.clone(), f.value.clone())).collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Enhance,
    FilterAdd,
    FilterSwap,
    Generalize,
    Pivot,
}

/// Supported encodings: up to 2 measures, up to 2 dimensions, 1 to 3 attributes.
fn encodable(schema: &Schema, attrs: &BTreeSet<String>) -> bool {
    let m = attrs.iter().filter(|a| schema.meta(a).unwrap().role == Role::Measure).count();
    let d = attrs.len() - m;
    (1..=3).contains(&attrs.len()) && m <= 2 && d <= 2
}

fn subsets(items: &[String], max: usize) -> Vec<BTreeSet<String>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << items.len()) {
        if mask.count_ones() as usize <= max {
            out.push((0..items.len()).filter(|i| mask & (1 << i) != 0).map(|i| items[i].clone()).collect());
        }
    }
    out
}

/// Every filter set that differs from `current` on at most one attribute,
/// drawn from the given per-attribute value lists.
fn filter_neighbourhood(dims: &[(String, Vec<String>)], current: &BTreeSet<(String, String)>) -> Vec<BTreeSet<(String, String)>> {
    let mut out = vec![(BTreeSet::new(), 0usize)];
    for (dim, values) in dims {
        let now = current.iter().find(|(a, _)| a == dim).map(|(_, v)| v.clone());
        let mut next = Vec::new();
        for (set, changed) in &out {
            let choices = std::iter::once(None).chain(values.iter().map(Some));
            for choice in choices {
                let differs = choice.cloned() != now;
                if *changed + differs as usize > 1 {
                    continue;
                }
                let mut s: BTreeSet<(String, String)> = set.clone();
                if let Some(v) = choice {
                    s.insert((dim.clone(), v.clone()));
                }
                next.push((s, changed + differs as usize));
            }
        }
        out = next;
    }
    out.into_iter().map(|(s, _)| s).collect()
}

/// Brute-force candidate set for one move: scans every attribute subset and
/// every nearby filter set and keeps those that satisfy the move's definition.
pub fn lattice_oracle(mv: Move, view: &VizSpec, schema: &Schema, cap: usize) -> BTreeSet<Sig> {
    let (a0, f0) = sig(view);
    let names: Vec<String> = schema.columns().map(|c| c.name.clone()).collect();
    let filterable: Vec<(String, Vec<String>)> = schema
        .fields()
        .iter()
        .filter(|f| f.meta.role == Role::Dimension && f.meta.cardinality >= 1 && f.meta.cardinality <= cap)
        .map(|f| (f.meta.name.clone(), f.levels.clone()))
        .collect();
    // Filtered attributes that fell out of the cap still take part in swaps.
    let mut dims = filterable.clone();
    for (a, _) in &f0 {
        if !dims.iter().any(|(d, _)| d == a) {
            dims.push((a.clone(), schema.field(a).unwrap().levels.clone()));
        }
    }
    let filterable_names: BTreeSet<&String> = filterable.iter().map(|(d, _)| d).collect();

    let mut out = BTreeSet::new();
    for attrs in subsets(&names, 3) {
        if !encodable(schema, &attrs) {
            continue;
        }
        for filters in filter_neighbourhood(&dims, &f0) {
            let fattrs: BTreeSet<&String> = filters.iter().map(|(a, _)| a).collect();
            if fattrs.iter().any(|a| attrs.contains(*a)) || (attrs == a0 && filters == f0) {
                continue;
            }
            let same_attrs = attrs == a0;
            let same_filters = filters == f0;
            let keep = match mv {
                Move::Enhance => same_filters && attrs.len() == a0.len() + 1 && a0.is_subset(&attrs),
                Move::Pivot => same_filters && attrs.len() == a0.len() && attrs.intersection(&a0).count() + 1 == a0.len(),
                Move::Generalize => {
                    (same_filters && attrs.len() + 1 == a0.len() && attrs.is_subset(&a0))
                        || (same_attrs && filters.len() + 1 == f0.len() && filters.is_subset(&f0))
                }
                Move::FilterAdd => {
                    same_attrs
                        && filters.len() == f0.len() + 1
                        && f0.is_subset(&filters)
                        && filters.difference(&f0).all(|(a, _)| filterable_names.contains(a))
                }
                Move::FilterSwap => {
                    let fa0: BTreeSet<&String> = f0.iter().map(|(a, _)| a).collect();
                    same_attrs && fattrs == fa0 && filters.difference(&f0).count() == 1
                }
            };
            if keep {
                out.insert((attrs.clone(), filters));
            }
        }
    }
    out
}

// ---------------------------------------------------------------- fuzzing

pub struct FuzzCase {
    pub seed: u64,
    pub ds: Dataset,
    pub view: Option<VizSpec>,
    pub cap: usize,
}

const NAMES: [&str; 12] = ["alpha", "Beta", "gamma", "delta", "Eps", "zeta", "eta", "theta", "iota", "kappa", "lam", "mu"];

/// A random table of 2 to 8 columns mixing measures, nominal, ordinal and
/// temporal dimensions, with occasional nulls.
pub fn random_dataset(r: &mut ChaCha8Rng, rows: usize) -> Dataset {
    let ncols = r.random_range(2..=8);
    let names: Vec<&str> = NAMES.choose_multiple(r, ncols).copied().collect();
    let mut cols: Vec<Vec<String>> = Vec::new();
    for _ in 0..ncols {
        let kind = r.random_range(0..10);
        let col: Vec<String> = match kind {
            0..=3 => {
                let scale = r.random_range(1.0..1000.0);
                let shift = r.random_range(-50.0..50.0);
                (0..rows).map(|_| format!("{:.4}", shift + scale * r.random::<f64>().powi(r.random_range(1..4)))).collect()
            }
            4..=6 => {
                let card = r.random_range(1..=6);
                (0..rows).map(|_| format!("v{}", r.random_range(0..card))).collect()
            }
            7 | 8 => {
                let card = r.random_range(2..=5);
                (0..rows).map(|_| format!("{}", r.random_range(0..card) * 2 + 1)).collect()
            }
            _ => {
                let card = r.random_range(2..=4);
                (0..rows).map(|_| format!("20{:02}-0{}-15", 10 + r.random_range(0..card), r.random_range(1..=2))).collect()
            }
        };
        let col = col.into_iter().map(|c| if r.random_bool(0.03) { String::new() } else { c }).collect();
        cols.push(col);
    }
    let mut text = names.join(",");
    text.push('\n');
    for i in 0..rows {
        let row: Vec<&str> = cols.iter().map(|c| c[i].as_str()).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    load_csv(text.as_bytes(), &LoadOptions::default()).expect("fuzz csv loads")
}

/// A random valid view (possibly empty) with up to two filters.
pub fn random_view(r: &mut ChaCha8Rng, schema: &Schema, cap: usize) -> Option<VizSpec> {
    let names: Vec<String> = schema.columns().map(|c| c.name.clone()).collect();
    for _ in 0..50 {
        let n = r.random_range(0..=3.min(names.len()));
        if n == 0 && r.random_bool(0.7) {
            continue;
        }
        let attrs: Vec<String> = names.choose_multiple(r, n).cloned().collect();
        let mut filters = Vec::new();
        if !attrs.is_empty() {
            let pool: Vec<_> = schema.filterable(cap).filter(|f| !attrs.contains(&f.meta.name)).collect();
            let nf = r.random_range(0..=2.min(pool.len()));
            for f in pool.choose_multiple(r, nf) {
                filters.push(FilterPredicate::new(f.meta.name.clone(), f.levels.choose(r).unwrap().clone()));
            }
        }
        if let Ok(v) = (SpecInput { attrs, filters }).resolve(schema) {
            return v;
        }
    }
    None
}

pub fn fuzz_case(seed: u64) -> FuzzCase {
    let mut r = rng(seed);
    let ds = random_dataset(&mut r, 48);
    let cap = r.random_range(2..=6);
    let view = random_view(&mut r, ds.schema(), cap);
    FuzzCase { seed, ds, view, cap }
}

/// Same corpus for every consumer: seeds 0..n.
pub fn fuzz_corpus(n: u64) -> impl Iterator<Item = FuzzCase> {
    (0..n).map(fuzz_case)
}

// ---------------------------------------------------------------- fixtures

pub fn data_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn load_fixture(name: &str) -> Dataset {
    let file = std::fs::File::open(data_dir().join(name)).expect("fixture exists");
    load_csv(file, &LoadOptions::default()).expect("fixture loads")
}

pub fn view_of(ds: &Dataset, attrs: &[&str], filters: &[(&str, &str)]) -> VizSpec {
    SpecInput {
        attrs: attrs.iter().map(|s| s.to_string()).collect(),
        filters: filters.iter().map(|(a, v)| FilterPredicate::new(*a, *v)).collect(),
    }
    .resolve(ds.schema())
    .expect("valid view")
    .expect("non-empty view")
}

/// Parses a CSV into header-keyed string columns without the library.
pub fn raw_csv(name: &str) -> BTreeMap<String, Vec<String>> {
    let mut rdr = csv::Reader::from_path(data_dir().join(name)).unwrap();
    let headers: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    let mut cols: BTreeMap<String, Vec<String>> = headers.iter().map(|h| (h.clone(), Vec::new())).collect();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        for (h, v) in headers.iter().zip(rec.iter()) {
            cols.get_mut(h).unwrap().push(v.to_string());
        }
    }
    cols
}
