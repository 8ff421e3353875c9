//! Typed tabular data with a binary target, category statistics, stratified
//! splitting and attribute concatenation.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Separator used when concatenating categorical attributes. Tokens that
/// contain it are rejected at load time.
pub const CONCAT_SEPARATOR: &str = "|";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnKind {
    Categorical,
    Numeric,
    BinaryTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Feature,
    Protected,
    Target,
    Ignored,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub role: Role,
}

impl ColumnSchema {
    pub fn new(name: impl Into<String>, kind: ColumnKind, role: Role) -> Self {
        Self {
            name: name.into(),
            kind,
            role,
        }
    }

    pub fn categorical(name: impl Into<String>, role: Role) -> Self {
        Self::new(name, ColumnKind::Categorical, role)
    }

    pub fn numeric(name: impl Into<String>, role: Role) -> Self {
        Self::new(name, ColumnKind::Numeric, role)
    }

    pub fn target(name: impl Into<String>) -> Self {
        Self::new(name, ColumnKind::BinaryTarget, Role::Target)
    }
}

/// Checks the schema invariants: unique names and exactly one binary target
/// carrying the target role.
pub fn validate_schema(schema: &[ColumnSchema]) -> Result<()> {
    let mut seen = HashMap::new();
    for col in schema {
        if col.name.is_empty() {
            return Err(Error::InvalidSchema("empty column name".into()));
        }
        if seen.insert(col.name.as_str(), ()).is_some() {
            return Err(Error::InvalidSchema(format!(
                "duplicate column name {:?}",
                col.name
            )));
        }
        let is_target_kind = col.kind == ColumnKind::BinaryTarget;
        let is_target_role = col.role == Role::Target;
        if is_target_kind != is_target_role {
            return Err(Error::InvalidSchema(format!(
                "column {:?}: binary-target kind and target role must go together",
                col.name
            )));
        }
        if col.role == Role::Protected && col.kind != ColumnKind::Categorical {
            return Err(Error::InvalidSchema(format!(
                "protected column {:?} must be categorical",
                col.name
            )));
        }
    }
    let targets = schema
        .iter()
        .filter(|c| c.kind == ColumnKind::BinaryTarget)
        .count();
    if targets != 1 {
        return Err(Error::InvalidSchema(format!(
            "expected exactly one binary-target column, found {targets}"
        )));
    }
    Ok(())
}

/// Dictionary-encoded categorical column. `levels` holds every token in the
/// order it was first seen when the column was built; row subsets keep the
/// full level table.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalColumn {
    levels: Vec<String>,
    codes: Vec<u32>,
}

impl CategoricalColumn {
    pub fn from_values<S: AsRef<str>>(values: &[S]) -> Self {
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut levels = Vec::new();
        let codes = values
            .iter()
            .map(|v| {
                let v = v.as_ref();
                if let Some(&c) = index.get(v) {
                    c
                } else {
                    let c = levels.len() as u32;
                    levels.push(v.to_string());
                    index.insert(v.to_string(), c);
                    c
                }
            })
            .collect();
        Self { levels, codes }
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn value(&self, row: usize) -> &str {
        &self.levels[self.codes[row] as usize]
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> + '_ {
        self.codes.iter().map(|&c| self.levels[c as usize].as_str())
    }

    /// Distinct values in first-appearance order over the rows.
    pub fn observed(&self) -> Vec<&str> {
        let mut seen = vec![false; self.levels.len()];
        let mut out = Vec::new();
        for &c in &self.codes {
            if !seen[c as usize] {
                seen[c as usize] = true;
                out.push(self.levels[c as usize].as_str());
            }
        }
        out
    }

    fn take(&self, rows: &[usize]) -> Self {
        Self {
            levels: self.levels.clone(),
            codes: rows.iter().map(|&r| self.codes[r]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Categorical(CategoricalColumn),
    Numeric(Vec<f64>),
    Target(Vec<u8>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Categorical(c) => c.len(),
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Target(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn kind(&self) -> ColumnKind {
        match self {
            ColumnData::Categorical(_) => ColumnKind::Categorical,
            ColumnData::Numeric(_) => ColumnKind::Numeric,
            ColumnData::Target(_) => ColumnKind::BinaryTarget,
        }
    }

    fn take(&self, rows: &[usize]) -> Self {
        match self {
            ColumnData::Categorical(c) => ColumnData::Categorical(c.take(rows)),
            ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Target(v) => ColumnData::Target(rows.iter().map(|&r| v[r]).collect()),
        }
    }
}

/// An immutable, validated table. Storage is columnar; row order is the
/// order rows were loaded or selected in.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<ColumnSchema>,
    columns: Vec<ColumnData>,
    n: usize,
}

impl Dataset {
    pub fn new(schema: Vec<ColumnSchema>, columns: Vec<ColumnData>) -> Result<Self> {
        validate_schema(&schema)?;
        if schema.len() != columns.len() {
            return Err(Error::InvalidSchema(format!(
                "{} schema entries for {} columns",
                schema.len(),
                columns.len()
            )));
        }
        let n = columns.first().map(ColumnData::len).unwrap_or(0);
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        for (col, data) in schema.iter().zip(&columns) {
            if data.kind() != col.kind {
                return Err(Error::InvalidSchema(format!(
                    "column {:?} declared {:?} but holds {:?} data",
                    col.name,
                    col.kind,
                    data.kind()
                )));
            }
            if data.len() != n {
                return Err(Error::InvalidSchema(format!(
                    "column {:?} has {} rows, expected {n}",
                    col.name,
                    data.len()
                )));
            }
            match data {
                ColumnData::Categorical(c) => {
                    // the separator is only reserved in loaded files, since
                    // concatenated columns contain it by construction
                    if let Some(row) = c.iter().position(str::is_empty) {
                        return Err(Error::InvalidCategory {
                            column: col.name.clone(),
                            row,
                            reason: "missing value".into(),
                        });
                    }
                }
                ColumnData::Numeric(v) => {
                    if let Some(row) = v.iter().position(|x| !x.is_finite()) {
                        return Err(Error::NonFiniteNumeric {
                            column: col.name.clone(),
                            row,
                            value: v[row].to_string(),
                        });
                    }
                }
                ColumnData::Target(v) => {
                    if let Some(row) = v.iter().position(|&y| y > 1) {
                        return Err(Error::UnparseableTarget {
                            row,
                            value: v[row].to_string(),
                        });
                    }
                }
            }
        }
        Ok(Self { schema, columns, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        &self.schema
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.schema
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&ColumnData> {
        Ok(&self.columns[self.column_index(name)?])
    }

    pub fn columns(&self) -> impl Iterator<Item = (&ColumnSchema, &ColumnData)> {
        self.schema.iter().zip(&self.columns)
    }

    pub fn categorical(&self, name: &str) -> Result<&CategoricalColumn> {
        match self.column(name)? {
            ColumnData::Categorical(c) => Ok(c),
            _ => Err(Error::NotCategorical(name.to_string())),
        }
    }

    pub fn target_name(&self) -> &str {
        let idx = self
            .schema
            .iter()
            .position(|c| c.role == Role::Target)
            .expect("validated schema has a target");
        &self.schema[idx].name
    }

    pub fn target(&self) -> &[u8] {
        self.columns
            .iter()
            .find_map(|c| match c {
                ColumnData::Target(v) => Some(v.as_slice()),
                _ => None,
            })
            .expect("validated schema has a target")
    }

    /// Rows `rows` in the given order.
    pub fn take(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(&r) = rows.iter().find(|&&r| r >= self.n) {
            return Err(Error::InvalidArgument(format!(
                "row {r} out of range for {} rows",
                self.n
            )));
        }
        Ok(Self {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.take(rows)).collect(),
            n: rows.len(),
        })
    }

    /// Copy with the role of one column changed.
    pub fn with_role(&self, name: &str, role: Role) -> Result<Self> {
        let idx = self.column_index(name)?;
        let mut schema = self.schema.clone();
        schema[idx].role = role;
        validate_schema(&schema)?;
        Ok(Self {
            schema,
            columns: self.columns.clone(),
            n: self.n,
        })
    }

    /// Copy with the labels replaced, used to probe for label leakage.
    pub fn with_target(&self, labels: Vec<u8>) -> Result<Self> {
        let idx = self.column_index(self.target_name())?;
        let mut columns = self.columns.clone();
        columns[idx] = ColumnData::Target(labels);
        Self::new(self.schema.clone(), columns)
    }

    fn with_column(&self, schema: ColumnSchema, data: ColumnData) -> Result<Self> {
        let mut s = self.schema.clone();
        let mut c = self.columns.clone();
        s.push(schema);
        c.push(data);
        Self::new(s, c)
    }
}

fn check_token(column: &str, row: usize, v: &str) -> Result<()> {
    let reason = if v.is_empty() {
        "missing value"
    } else if v.contains(CONCAT_SEPARATOR) {
        "contains the reserved separator '|'"
    } else {
        return Ok(());
    };
    Err(Error::InvalidCategory {
        column: column.to_string(),
        row,
        reason: reason.to_string(),
    })
}

/// Loads a comma-separated file whose header matches the schema names.
pub fn load_csv(path: impl AsRef<Path>, schema: &[ColumnSchema]) -> Result<Dataset> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(file, schema)
}

pub fn parse_csv<R: Read>(reader: R, schema: &[ColumnSchema]) -> Result<Dataset> {
    validate_schema(schema)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .quoting(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(h) => h?,
        None => return Err(Error::EmptyFile),
    };
    let header: Vec<&str> = header.iter().collect();
    if header.len() == 1 && header[0].is_empty() {
        return Err(Error::EmptyFile);
    }
    // position of each schema column in the file
    let mut positions = Vec::with_capacity(schema.len());
    for col in schema {
        let pos = header
            .iter()
            .position(|h| *h == col.name)
            .ok_or_else(|| Error::HeaderMismatch(format!("column {:?} not in header", col.name)))?;
        positions.push(pos);
    }
    if header.len() != schema.len() {
        let extra: Vec<_> = header
            .iter()
            .filter(|h| !schema.iter().any(|c| c.name == **h))
            .collect();
        return Err(Error::HeaderMismatch(format!(
            "header has {} columns, schema has {} (unexpected: {:?})",
            header.len(),
            schema.len(),
            extra
        )));
    }

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); schema.len()];
    for (row, rec) in records.enumerate() {
        let rec = rec?;
        if rec.iter().any(|f| f.contains('"')) {
            return Err(Error::Csv(format!("quoted field at row {row}")));
        }
        for (j, &pos) in positions.iter().enumerate() {
            raw[j].push(rec[pos].to_string());
        }
    }
    if raw[0].is_empty() {
        return Err(Error::EmptyFile);
    }

    let mut columns = Vec::with_capacity(schema.len());
    for (col, cells) in schema.iter().zip(raw) {
        let data = match col.kind {
            ColumnKind::Categorical => {
                for (row, v) in cells.iter().enumerate() {
                    check_token(&col.name, row, v)?;
                }
                ColumnData::Categorical(CategoricalColumn::from_values(&cells))
            }
            ColumnKind::Numeric => {
                let mut out = Vec::with_capacity(cells.len());
                for (row, v) in cells.iter().enumerate() {
                    match v.parse::<f64>() {
                        Ok(x) if x.is_finite() => out.push(x),
                        _ => {
                            return Err(Error::NonFiniteNumeric {
                                column: col.name.clone(),
                                row,
                                value: v.clone(),
                            })
                        }
                    }
                }
                ColumnData::Numeric(out)
            }
            ColumnKind::BinaryTarget => {
                let mut out = Vec::with_capacity(cells.len());
                for (row, v) in cells.iter().enumerate() {
                    match v.as_str() {
                        "0" => out.push(0),
                        "1" => out.push(1),
                        _ => {
                            return Err(Error::UnparseableTarget {
                                row,
                                value: v.clone(),
                            })
                        }
                    }
                }
                ColumnData::Target(out)
            }
        };
        columns.push(data);
    }
    Dataset::new(schema.to_vec(), columns)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCount {
    pub value: String,
    /// n_i
    pub count: u64,
    /// n_{i,Y}
    pub positives: u64,
}

impl CategoryCount {
    /// Observed fraction of positives, n_{i,Y} / n_i.
    pub fn rate(&self) -> f64 {
        self.positives as f64 / self.count as f64
    }
}

/// Sufficient statistics of one categorical attribute against the target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryStatistics {
    pub attribute: String,
    pub categories: Vec<CategoryCount>,
    pub n: u64,
    pub n_positive: u64,
}

impl CategoryStatistics {
    /// Global positive rate n_Y / n.
    pub fn prior(&self) -> f64 {
        self.n_positive as f64 / self.n as f64
    }

    pub fn get(&self, value: &str) -> Option<&CategoryCount> {
        self.categories.iter().find(|c| c.value == value)
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    /// Field-wise sum. Categories of `self` keep their order; new ones from
    /// `other` are appended.
    pub fn combine(&self, other: &Self) -> Result<Self> {
        if self.attribute != other.attribute {
            return Err(Error::AttributeMismatch {
                fitted: self.attribute.clone(),
                requested: other.attribute.clone(),
            });
        }
        let mut categories = self.categories.clone();
        for c in &other.categories {
            match categories.iter_mut().find(|x| x.value == c.value) {
                Some(x) => {
                    x.count += c.count;
                    x.positives += c.positives;
                }
                None => categories.push(c.clone()),
            }
        }
        Ok(Self {
            attribute: self.attribute.clone(),
            categories,
            n: self.n + other.n,
            n_positive: self.n_positive + other.n_positive,
        })
    }
}

/// Counts n_i and n_{i,Y} per category, in first-appearance order.
pub fn category_stats(data: &Dataset, attribute: &str) -> Result<CategoryStatistics> {
    let col = data.categorical(attribute)?;
    let y = data.target();
    let mut slot: Vec<Option<usize>> = vec![None; col.levels().len()];
    let mut categories: Vec<CategoryCount> = Vec::new();
    for (&code, &label) in col.codes().iter().zip(y) {
        let i = *slot[code as usize].get_or_insert_with(|| {
            categories.push(CategoryCount {
                value: col.levels()[code as usize].clone(),
                count: 0,
                positives: 0,
            });
            categories.len() - 1
        });
        categories[i].count += 1;
        categories[i].positives += label as u64;
    }
    Ok(CategoryStatistics {
        attribute: attribute.to_string(),
        categories,
        n: data.n() as u64,
        n_positive: y.iter().map(|&v| v as u64).sum(),
    })
}

/// Protected attribute plus the reference group r that every other observed
/// category is compared against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub attribute: String,
    pub reference: String,
}

impl GroupSpec {
    /// Validates that the reference occurs in `train`.
    pub fn new(train: &Dataset, attribute: &str, reference: &str) -> Result<Self> {
        let col = train.categorical(attribute)?;
        if !col.iter().any(|v| v == reference) {
            return Err(Error::MissingGroup(reference.to_string()));
        }
        Ok(Self {
            attribute: attribute.to_string(),
            reference: reference.to_string(),
        })
    }
}

/// Per-category split. Within every category the train share is
/// `round(fraction * n_i)` (singletons always go to train), and that share is
/// itself divided between positives and negatives as evenly as rounding
/// permits, so each part's prevalence is within `0.5 / part_size` of the
/// category's prevalence.
pub fn stratified_split(
    data: &Dataset,
    train_fraction: f64,
    stratify_by: &str,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let col = data.categorical(stratify_by)?;
    let y = data.target();

    // rows per (category, label) in row order
    let mut buckets: Vec<[Vec<usize>; 2]> = vec![[Vec::new(), Vec::new()]; col.levels().len()];
    let mut order = Vec::new();
    for (row, &code) in col.codes().iter().enumerate() {
        let b = &mut buckets[code as usize];
        if b[0].is_empty() && b[1].is_empty() {
            order.push(code as usize);
        }
        b[y[row] as usize].push(row);
    }

    let mut rng = rng::seeded(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for code in order {
        let [neg, pos] = &mut buckets[code];
        let n_i = neg.len() + pos.len();
        let n_train = if n_i == 1 {
            1
        } else {
            (train_fraction * n_i as f64).round() as usize
        };
        let share = n_train as f64 * pos.len() as f64 / n_i as f64;
        let pos_train = (share.round() as usize)
            .min(pos.len())
            .max(n_train.saturating_sub(neg.len()));
        let neg_train = n_train - pos_train;
        neg.shuffle(&mut rng);
        pos.shuffle(&mut rng);
        train.extend_from_slice(&pos[..pos_train]);
        train.extend_from_slice(&neg[..neg_train]);
        test.extend_from_slice(&pos[pos_train..]);
        test.extend_from_slice(&neg[neg_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    if test.is_empty() {
        return Err(Error::InvalidArgument(
            "split leaves the evaluation part empty".into(),
        ));
    }
    Ok((data.take(&train)?, data.take(&test)?))
}

/// Adds a categorical column holding the listed attributes joined by `|`.
/// The new column takes the protected role and the source columns become
/// ignored.
pub fn concat_attributes(data: &Dataset, attributes: &[&str], new_name: &str) -> Result<Dataset> {
    if attributes.len() < 2 {
        return Err(Error::InvalidArgument(
            "concatenation needs at least two attributes".into(),
        ));
    }
    if data.column_index(new_name).is_ok() {
        return Err(Error::NameCollision(new_name.to_string()));
    }
    let cols = attributes
        .iter()
        .map(|a| data.categorical(a))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<String> = (0..data.n())
        .map(|row| {
            cols.iter()
                .map(|c| c.value(row))
                .collect::<Vec<_>>()
                .join(CONCAT_SEPARATOR)
        })
        .collect();
    let mut out = data.clone();
    for a in attributes {
        out = out.with_role(a, Role::Ignored)?;
    }
    out.with_column(
        ColumnSchema::categorical(new_name, Role::Protected),
        ColumnData::Categorical(CategoricalColumn::from_values(&values)),
    )
}
