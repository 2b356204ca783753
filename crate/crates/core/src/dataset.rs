//! Tabular data loading, schema inference and per-column statistics.

use std::collections::{HashMap, HashSet};
use std::io::Read;
use std::sync::OnceLock;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numeric columns with at most this many distinct values are dimensions,
/// unless 1% of the row count is larger.
pub const MEASURE_MIN_CARDINALITY: usize = 12;

const NULL_MARKERS: &[&str] = &["", "NA", "N/A", "NaN", "nan", "null", "NULL", "None"];

const DATE_FORMATS: &[&str] = &["%Y-%m-%d", "%Y/%m/%d", "%m/%d/%Y"];
const DATETIME_FORMATS: &[&str] = &["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataType {
    Quantitative,
    Nominal,
    Ordinal,
    Temporal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Measure,
    Dimension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Mean,
    Sum,
    Count,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub dtype: DataType,
    pub role: Role,
    /// Distinct non-null values.
    pub cardinality: usize,
    /// Numeric bounds; temporal columns report seconds since the Unix epoch.
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub default_agg: Aggregation,
}

impl ColumnMeta {
    pub fn is_measure(&self) -> bool {
        self.role == Role::Measure
    }

    pub fn is_dimension(&self) -> bool {
        self.role == Role::Dimension
    }

    pub fn is_temporal(&self) -> bool {
        self.dtype == DataType::Temporal
    }
}

/// A column as read from the source, before typing. `None` marks a null cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RawColumn {
    pub name: String,
    pub cells: Vec<Option<String>>,
}

/// A column's metadata together with its ordered distinct values (dimensions only).
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub meta: ColumnMeta,
    pub levels: Vec<String>,
}

impl Field {
    pub fn level_index(&self, value: &str) -> Option<usize> {
        // Levels are not always in byte order (numeric and temporal dimensions),
        // so this is a linear scan. Dimension cardinalities are small.
        self.levels.iter().position(|l| l == value)
    }
}

/// Column metadata for a dataset, addressable by name.
#[derive(Debug, Clone)]
pub struct Schema {
    fields: Vec<Field>,
    index: HashMap<String, usize>,
}

impl PartialEq for Schema {
    fn eq(&self, other: &Self) -> bool {
        self.fields == other.fields
    }
}

impl Schema {
    pub fn new(fields: Vec<Field>) -> Result<Self> {
        let mut index = HashMap::with_capacity(fields.len());
        for (i, f) in fields.iter().enumerate() {
            if index.insert(f.meta.name.clone(), i).is_some() {
                return Err(Error::DuplicateColumn(f.meta.name.clone()));
            }
        }
        Ok(Schema { fields, index })
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn field(&self, name: &str) -> Option<&Field> {
        self.index.get(name).map(|&i| &self.fields[i])
    }

    pub fn meta(&self, name: &str) -> Option<&ColumnMeta> {
        self.field(name).map(|f| &f.meta)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn columns(&self) -> impl Iterator<Item = &ColumnMeta> {
        self.fields.iter().map(|f| &f.meta)
    }

    pub fn measures(&self) -> impl Iterator<Item = &ColumnMeta> {
        self.columns().filter(|m| m.is_measure())
    }

    pub fn dimensions(&self) -> impl Iterator<Item = &ColumnMeta> {
        self.columns().filter(|m| m.is_dimension())
    }

    /// Dimensions small enough to enumerate as filters or count charts.
    pub fn filterable(&self, cardinality_cap: usize) -> impl Iterator<Item = &Field> {
        self.fields
            .iter()
            .filter(move |f| f.meta.is_dimension() && f.meta.cardinality >= 1 && f.meta.cardinality <= cardinality_cap)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ColumnOverride {
    pub name: String,
    #[serde(default)]
    pub dtype: Option<DataType>,
    #[serde(default)]
    pub role: Option<Role>,
}

/// Sidecar file overriding inferred types, e.g.
/// `{"columns":[{"name":"Cylinders","dtype":"ordinal","role":"dimension"}]}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SchemaOverride {
    pub columns: Vec<ColumnOverride>,
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub schema_override: Option<SchemaOverride>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ColumnData {
    /// Present when every non-null cell is numeric or the column is temporal.
    pub numbers: Option<Vec<Option<f64>>>,
    /// Level index per row, for dimensions.
    pub codes: Option<Vec<Option<u32>>>,
}

/// Pairwise Spearman correlations between measures, computed on
/// pairwise-complete rows. Symmetric with a unit diagonal; `None` where the
/// correlation is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCache {
    pub measures: Vec<String>,
    pub matrix: Vec<Vec<Option<f64>>>,
}

impl CorrelationCache {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.measures.iter().position(|m| m == a)?;
        let j = self.measures.iter().position(|m| m == b)?;
        self.matrix[i][j]
    }
}

/// An immutable, in-memory table with inferred metadata.
#[derive(Debug)]
pub struct Dataset {
    schema: Schema,
    columns: Vec<ColumnData>,
    row_count: usize,
    corr_cache: OnceLock<CorrelationCache>,
}

/// Clones start with a cold correlation cache.
impl Clone for Dataset {
    fn clone(&self) -> Self {
        Dataset {
            schema: self.schema.clone(),
            columns: self.columns.clone(),
            row_count: self.row_count,
            corr_cache: OnceLock::new(),
        }
    }
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.row_count == other.row_count && self.schema == other.schema && self.columns == other.columns
    }
}

impl Dataset {
    /// Builds a dataset from untyped columns of equal length.
    pub fn from_raw(raw: Vec<RawColumn>, overrides: Option<&SchemaOverride>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut seen = HashSet::new();
        for c in &raw {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::DuplicateColumn(c.name.clone()));
            }
        }
        let row_count = raw[0].cells.len();
        if row_count == 0 {
            return Err(Error::NoRows);
        }
        debug_assert!(raw.iter().all(|c| c.cells.len() == row_count));

        let mut metas = infer_schema(&raw);
        if let Some(ov) = overrides {
            apply_overrides(&raw, &mut metas, ov)?;
        }

        let mut fields = Vec::with_capacity(raw.len());
        let mut columns = Vec::with_capacity(raw.len());
        for (col, meta) in raw.iter().zip(metas) {
            let (field, data) = build_column(col, meta);
            fields.push(field);
            columns.push(data);
        }
        Ok(Dataset { schema: Schema::new(fields)?, columns, row_count, corr_cache: OnceLock::new() })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub(crate) fn column(&self, name: &str) -> Result<(&Field, &ColumnData)> {
        let i = self.schema.position(name).ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
        Ok((&self.schema.fields[i], &self.columns[i]))
    }

    /// Numeric values of a column (measures, numeric dimensions, temporal as epoch seconds).
    pub fn numbers(&self, name: &str) -> Result<Option<&[Option<f64>]>> {
        Ok(self.column(name)?.1.numbers.as_deref())
    }

    /// Level codes of a dimension column.
    pub fn codes(&self, name: &str) -> Result<Option<&[Option<u32>]>> {
        Ok(self.column(name)?.1.codes.as_deref())
    }

    /// Measure-pair Spearman correlations, computed on first use.
    pub fn correlations(&self) -> &CorrelationCache {
        self.corr_cache.get_or_init(|| {
            let measures: Vec<String> = self.schema.measures().map(|m| m.name.clone()).collect();
            let n = measures.len();
            let mut matrix = vec![vec![None; n]; n];
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            let values = crate::par::map(crate::par::Execution::Parallel, &pairs, |&(i, j)| {
                let (xs, ys) = self.complete_pairs(&measures[i], &measures[j]).unwrap_or_default();
                crate::interest::spearman(&xs, &ys)
            });
            for (&(i, j), v) in pairs.iter().zip(values) {
                matrix[i][j] = v;
                matrix[j][i] = v;
            }
            for (i, row) in matrix.iter_mut().enumerate() {
                row[i] = Some(1.0);
            }
            CorrelationCache { measures, matrix }
        })
    }

    pub(crate) fn complete_pairs(&self, a: &str, b: &str) -> Result<(Vec<f64>, Vec<f64>)> {
        let xs = self.numbers(a)?.ok_or_else(|| Error::UnknownColumn(a.to_string()))?;
        let ys = self.numbers(b)?.ok_or_else(|| Error::UnknownColumn(b.to_string()))?;
        Ok(xs.iter().zip(ys).filter_map(|(x, y)| Some(((*x)?, (*y)?))).unzip())
    }
}

/// Reads RFC-4180 CSV with a header row.
pub fn load_csv<R: Read>(source: R, options: &LoadOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(source);
    let headers = reader.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyInput);
    }
    let mut raw: Vec<RawColumn> =
        headers.iter().map(|h| RawColumn { name: h.trim().to_string(), cells: Vec::new() }).collect();
    for record in reader.records() {
        let record = record?;
        if record.len() == 1 && record[0].is_empty() && raw.len() > 1 {
            continue;
        }
        for (i, col) in raw.iter_mut().enumerate() {
            col.cells.push(record.get(i).and_then(clean_cell));
        }
    }
    Dataset::from_raw(raw, options.schema_override.as_ref())
}

fn clean_cell(s: &str) -> Option<String> {
    let t = s.trim();
    if NULL_MARKERS.contains(&t) {
        None
    } else {
        Some(t.to_string())
    }
}

fn parse_number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite()).map(|v| if v == 0.0 { 0.0 } else { v })
}

/// Seconds since the Unix epoch for the whitelisted date formats.
pub fn parse_temporal(s: &str) -> Option<f64> {
    for f in DATE_FORMATS {
        if let Ok(d) = NaiveDate::parse_from_str(s, f) {
            return Some(d.and_hms_opt(0, 0, 0)?.and_utc().timestamp() as f64);
        }
    }
    for f in DATETIME_FORMATS {
        if let Ok(d) = NaiveDateTime::parse_from_str(s, f) {
            return Some(d.and_utc().timestamp() as f64);
        }
    }
    DateTime::parse_from_rfc3339(s).ok().map(|d| d.timestamp() as f64)
}

enum Kind {
    Numeric(Vec<f64>),
    Temporal(Vec<f64>),
    Text,
}

fn classify(cells: &[Option<String>]) -> Kind {
    let present: Vec<&str> = cells.iter().flatten().map(String::as_str).collect();
    if present.is_empty() {
        return Kind::Text;
    }
    if let Some(nums) = present.iter().map(|s| parse_number(s)).collect::<Option<Vec<_>>>() {
        return Kind::Numeric(nums);
    }
    if let Some(ts) = present.iter().map(|s| parse_temporal(s)).collect::<Option<Vec<_>>>() {
        return Kind::Temporal(ts);
    }
    Kind::Text
}

fn distinct_numbers(values: &[f64]) -> usize {
    values.iter().map(|v| v.to_bits()).collect::<HashSet<_>>().len()
}

fn bounds(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let min = values.iter().copied().reduce(f64::min);
    let max = values.iter().copied().reduce(f64::max);
    (min, max)
}

/// Assigns type, role and default aggregation to each column.
///
/// A numeric column is a measure when its cardinality exceeds
/// `max(12, 1% of rows)`; otherwise it is an ordinal dimension. Columns whose
/// values all parse as dates are temporal dimensions and everything else is
/// nominal. Empty columns become nominal dimensions of cardinality 0.
pub fn infer_schema(raw: &[RawColumn]) -> Vec<ColumnMeta> {
    raw.iter()
        .map(|col| {
            let rows = col.cells.len();
            let threshold = (MEASURE_MIN_CARDINALITY as f64).max(rows as f64 * 0.01);
            match classify(&col.cells) {
                Kind::Numeric(nums) => {
                    let cardinality = distinct_numbers(&nums);
                    if cardinality as f64 > threshold {
                        let (min, max) = bounds(&nums);
                        ColumnMeta {
                            name: col.name.clone(),
                            dtype: DataType::Quantitative,
                            role: Role::Measure,
                            cardinality,
                            min,
                            max,
                            default_agg: Aggregation::Mean,
                        }
                    } else {
                        dimension_meta(&col.name, DataType::Ordinal, cardinality, (None, None))
                    }
                }
                Kind::Temporal(ts) => {
                    let cardinality = distinct_strings(&col.cells);
                    dimension_meta(&col.name, DataType::Temporal, cardinality, bounds(&ts))
                }
                Kind::Text => dimension_meta(&col.name, DataType::Nominal, distinct_strings(&col.cells), (None, None)),
            }
        })
        .collect()
}

fn distinct_strings(cells: &[Option<String>]) -> usize {
    cells.iter().flatten().collect::<HashSet<_>>().len()
}

fn dimension_meta(name: &str, dtype: DataType, cardinality: usize, (min, max): (Option<f64>, Option<f64>)) -> ColumnMeta {
    ColumnMeta {
        name: name.to_string(),
        dtype,
        role: Role::Dimension,
        cardinality,
        min,
        max,
        default_agg: Aggregation::Count,
    }
}

fn apply_overrides(raw: &[RawColumn], metas: &mut [ColumnMeta], ov: &SchemaOverride) -> Result<()> {
    for o in &ov.columns {
        let i = metas
            .iter()
            .position(|m| m.name == o.name)
            .ok_or_else(|| Error::UnknownColumn(o.name.clone()))?;
        let invalid = |reason: &str| Error::InvalidOverride { column: o.name.clone(), reason: reason.to_string() };
        let dtype = match (o.dtype, o.role) {
            (Some(d), _) => d,
            (None, Some(Role::Measure)) => DataType::Quantitative,
            (None, Some(Role::Dimension)) if metas[i].dtype == DataType::Quantitative => DataType::Ordinal,
            (None, _) => metas[i].dtype,
        };
        let role = o.role.unwrap_or(if dtype == DataType::Quantitative { Role::Measure } else { Role::Dimension });
        if role == Role::Measure && dtype != DataType::Quantitative {
            return Err(invalid("a measure must be quantitative"));
        }
        let kind = classify(&raw[i].cells);
        let cells = &raw[i].cells;
        let meta = match dtype {
            DataType::Quantitative | DataType::Ordinal if matches!(kind, Kind::Numeric(_)) => {
                let Kind::Numeric(nums) = kind else { unreachable!() };
                let b = if dtype == DataType::Quantitative { bounds(&nums) } else { (None, None) };
                ColumnMeta {
                    name: o.name.clone(),
                    dtype,
                    role,
                    cardinality: distinct_numbers(&nums),
                    min: b.0,
                    max: b.1,
                    default_agg: if role == Role::Measure { Aggregation::Mean } else { Aggregation::Count },
                }
            }
            DataType::Quantitative => return Err(invalid("column has non-numeric values")),
            DataType::Temporal => {
                let ts: Option<Vec<f64>> = cells.iter().flatten().map(|s| parse_temporal(s)).collect();
                let ts = ts.ok_or_else(|| invalid("column has values that are not dates"))?;
                ColumnMeta { role, ..dimension_meta(&o.name, dtype, distinct_strings(cells), bounds(&ts)) }
            }
            DataType::Ordinal | DataType::Nominal => {
                ColumnMeta { role, ..dimension_meta(&o.name, dtype, distinct_strings(cells), (None, None)) }
            }
        };
        metas[i] = meta;
    }
    Ok(())
}

/// Shortest round-trip rendering, used for numeric dimension levels.
pub(crate) fn format_number(v: f64) -> String {
    format!("{v}")
}

fn build_column(col: &RawColumn, meta: ColumnMeta) -> (Field, ColumnData) {
    let numbers: Option<Vec<Option<f64>>> = if meta.dtype == DataType::Temporal {
        Some(col.cells.iter().map(|c| c.as_deref().and_then(parse_temporal)).collect())
    } else if col.cells.iter().flatten().all(|s| parse_number(s).is_some()) && col.cells.iter().any(Option::is_some) {
        Some(col.cells.iter().map(|c| c.as_deref().and_then(parse_number)).collect())
    } else {
        None
    };

    if meta.is_measure() {
        return (Field { meta, levels: Vec::new() }, ColumnData { numbers, codes: None });
    }

    // Each row's level label and a sort key placing levels in natural order.
    let labelled: Vec<Option<String>> = match (&numbers, meta.dtype) {
        (Some(nums), dt) if dt != DataType::Temporal => nums.iter().map(|v| v.map(format_number)).collect(),
        _ => col.cells.clone(),
    };
    let mut levels: Vec<(Option<f64>, String)> = Vec::new();
    let mut seen = HashSet::new();
    for (i, label) in labelled.iter().enumerate() {
        if let Some(l) = label {
            if seen.insert(l.clone()) {
                levels.push((numbers.as_ref().and_then(|n| n[i]), l.clone()));
            }
        }
    }
    levels.sort_by(|a, b| match (a.0, b.0) {
        (Some(x), Some(y)) => x.total_cmp(&y).then_with(|| a.1.cmp(&b.1)),
        _ => a.1.cmp(&b.1),
    });
    let levels: Vec<String> = levels.into_iter().map(|(_, l)| l).collect();
    let lookup: HashMap<&str, u32> = levels.iter().enumerate().map(|(i, l)| (l.as_str(), i as u32)).collect();
    let codes = labelled.iter().map(|l| l.as_deref().map(|s| lookup[s])).collect();
    let meta = ColumnMeta { cardinality: levels.len(), ..meta };
    (Field { meta, levels }, ColumnData { numbers, codes: Some(codes) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub name: String,
    pub count: usize,
    pub cardinality: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    /// Sample standard deviation; 0 for a single value.
    pub std: Option<f64>,
    /// Distinct values, dimensions only.
    pub values: Option<Vec<String>>,
}

/// Summary statistics over the non-null values of one column.
pub fn column_stats(ds: &Dataset, col: &str) -> Result<ColumnStats> {
    let (field, data) = ds.column(col)?;
    let present: Vec<f64> = data.numbers.as_deref().map(|n| n.iter().flatten().copied().collect()).unwrap_or_default();
    let count = match (&data.numbers, &data.codes) {
        (_, Some(codes)) => codes.iter().flatten().count(),
        (Some(_), None) => present.len(),
        (None, None) => 0,
    };
    let (mut min, mut max, mut mean, mut std) = (None, None, None, None);
    if !present.is_empty() {
        let n = present.len() as f64;
        let m = present.iter().sum::<f64>() / n;
        let var = if present.len() > 1 {
            present.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        (min, max) = bounds(&present);
        mean = Some(m);
        std = Some(var.sqrt());
        if min == max {
            std = Some(0.0);
        }
    }
    Ok(ColumnStats {
        name: field.meta.name.clone(),
        count,
        cardinality: field.meta.cardinality,
        min,
        max,
        mean,
        std,
        values: field.meta.is_dimension().then(|| field.levels.clone()),
    })
}
