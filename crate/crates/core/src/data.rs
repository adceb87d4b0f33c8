//! Sparse labelled datasets: libsvm ingestion, min/max feature scaling and
//! deterministic holdout / k-fold partitioning.
//!
//! ```text
//! +1 1:0.5 3:-1.0
//! -1 2:1.0
//! ```
//!
//! Feature indices are 1-based and must be strictly increasing within a line.
//! Labels must be `+1`/`-1`; `0`/`1` files are accepted only with
//! [`LabelEncoding::ZeroOne`], which maps `0` to `-1`.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// What went wrong on a single libsvm line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    MissingLabel,
    BadLabel(String),
    CommentNotSupported,
    FeatureNoColon(String),
    BadIndex(String),
    BadValue(String),
    NonIncreasingIndex { previous: u32, current: u32 },
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::MissingLabel => write!(f, "missing label"),
            ParseErrorKind::BadLabel(tok) => write!(f, "unsupported label {tok:?}"),
            ParseErrorKind::CommentNotSupported => write!(f, "'#' comments are not supported"),
            ParseErrorKind::FeatureNoColon(tok) => write!(f, "feature token {tok:?} has no ':'"),
            ParseErrorKind::BadIndex(tok) => {
                write!(f, "feature index {tok:?} is not a positive integer")
            }
            ParseErrorKind::BadValue(tok) => write!(f, "feature value {tok:?} is not a finite real"),
            ParseErrorKind::NonIncreasingIndex { previous, current } => write!(
                f,
                "feature index {current} does not increase (previous index {previous})"
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {kind}")]
    Parse { line: usize, kind: ParseErrorKind },
    #[error("dataset is empty")]
    Empty,
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("label must be -1 or +1, got {0}")]
    InvalidLabel(i64),
    #[error("cannot split {n} instances into {k} folds")]
    TooManyFolds { n: usize, k: usize },
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("validation instance {index} has an all-zero input vector")]
    ZeroValidationInstance { index: usize },
}

/// How labels in a libsvm file are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelEncoding {
    /// Only `-1` and `+1` are accepted.
    #[default]
    PlusMinusOne,
    /// Only `0` and `1` are accepted; `0` becomes `-1`.
    ZeroOne,
}

/// Sparse feature vector with 1-based, strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Builds a vector from `(index, value)` pairs.
    ///
    /// Returns `None` when an index is 0 or the indices are not strictly
    /// increasing.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, f64)>) -> Option<Self> {
        let mut v = SparseVector::default();
        for (idx, val) in pairs {
            if idx == 0 || v.indices.last().is_some_and(|&last| last >= idx) {
                return None;
            }
            v.indices.push(idx);
            v.values.push(val);
        }
        Some(v)
    }

    /// Dense slice `x[0..]` maps to indices `1..`. Exact zeros are dropped.
    pub fn from_dense(values: &[f64]) -> Self {
        let mut v = SparseVector::default();
        for (j, &x) in values.iter().enumerate() {
            if x != 0.0 {
                v.indices.push(j as u32 + 1);
                v.values.push(x);
            }
        }
        v
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn max_index(&self) -> u32 {
        self.indices.last().copied().unwrap_or(0)
    }

    /// True when every stored value is zero (or nothing is stored).
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Inner product with a dense vector whose slot `j` holds index `j + 1`.
    /// Indices beyond the dense length contribute nothing.
    pub fn dot(&self, dense: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (idx, val) in self.iter() {
            if let Some(w) = dense.get(idx as usize - 1) {
                acc += w * val;
            }
        }
        acc
    }

    /// `dense += scale * self`.
    pub fn add_scaled_to(&self, dense: &mut [f64], scale: f64) {
        for (idx, val) in self.iter() {
            if let Some(slot) = dense.get_mut(idx as usize - 1) {
                *slot += scale * val;
            }
        }
    }

    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn to_dense(&self, dimension: usize) -> Vec<f64> {
        let mut out = vec![0.0; dimension];
        self.add_scaled_to(&mut out, 1.0);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledInstance {
    pub features: SparseVector,
    label: i8,
}

impl LabeledInstance {
    pub fn new(features: SparseVector, label: i64) -> Result<Self, DataError> {
        match label {
            1 | -1 => Ok(LabeledInstance {
                features,
                label: label as i8,
            }),
            other => Err(DataError::InvalidLabel(other)),
        }
    }

    /// The label, `-1` or `+1`.
    pub fn label(&self) -> i8 {
        self.label
    }

    /// The label as a real, for arithmetic.
    pub fn y(&self) -> f64 {
        f64::from(self.label)
    }
}

/// An ordered, immutable collection of labelled instances.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    instances: Vec<LabeledInstance>,
    dimension: usize,
}

impl Dataset {
    /// `dimension` is raised to the largest feature index if it is smaller.
    pub fn new(instances: Vec<LabeledInstance>, dimension: usize) -> Result<Self, DataError> {
        if instances.is_empty() {
            return Err(DataError::Empty);
        }
        let max_index = instances
            .iter()
            .map(|inst| inst.features.max_index() as usize)
            .max()
            .unwrap_or(0);
        Ok(Dataset {
            instances,
            dimension: dimension.max(max_index),
        })
    }

    /// Convenience constructor from dense rows.
    pub fn from_dense(rows: &[Vec<f64>], labels: &[i64]) -> Result<Self, DataError> {
        let dimension = rows.iter().map(Vec::len).max().unwrap_or(0);
        let instances = rows
            .iter()
            .zip(labels)
            .map(|(row, &y)| LabeledInstance::new(SparseVector::from_dense(row), y))
            .collect::<Result<Vec<_>, _>>()?;
        Dataset::new(instances, dimension)
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn instances(&self) -> &[LabeledInstance] {
        &self.instances
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledInstance> {
        self.instances.iter()
    }

    /// Same instances, declared dimension raised to at least `dimension`.
    pub fn with_dimension(mut self, dimension: usize) -> Self {
        self.dimension = self.dimension.max(dimension);
        self
    }

    /// Number of `+1` and `-1` labels.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.instances.iter().filter(|i| i.label > 0).count();
        (pos, self.instances.len() - pos)
    }

    /// Subset in the given index order.
    pub fn select(&self, indices: &[usize]) -> Result<Dataset, DataError> {
        let instances = indices.iter().map(|&i| self.instances[i].clone()).collect();
        Dataset::new(instances, self.dimension)
    }

    /// Fails on the first instance whose input vector is entirely zero. Such
    /// instances are always scored 0 and cannot serve as validation data.
    pub fn ensure_nonzero_inputs(&self) -> Result<(), DataError> {
        match self.instances.iter().position(|i| i.features.is_zero()) {
            Some(index) => Err(DataError::ZeroValidationInstance { index }),
            None => Ok(()),
        }
    }
}

fn parse_label(token: &str, encoding: LabelEncoding) -> Result<i64, ParseErrorKind> {
    let value: f64 = token
        .parse()
        .map_err(|_| ParseErrorKind::BadLabel(token.to_string()))?;
    match (encoding, value) {
        (LabelEncoding::PlusMinusOne, v) if v == 1.0 => Ok(1),
        (LabelEncoding::PlusMinusOne, v) if v == -1.0 => Ok(-1),
        (LabelEncoding::ZeroOne, v) if v == 1.0 => Ok(1),
        (LabelEncoding::ZeroOne, v) if v == 0.0 => Ok(-1),
        _ => Err(ParseErrorKind::BadLabel(token.to_string())),
    }
}

fn parse_line(line: &str, encoding: LabelEncoding) -> Result<LabeledInstance, ParseErrorKind> {
    if line.contains('#') {
        return Err(ParseErrorKind::CommentNotSupported);
    }
    let mut tokens = line.split_ascii_whitespace();
    let label = parse_label(tokens.next().ok_or(ParseErrorKind::MissingLabel)?, encoding)?;
    let mut features = SparseVector::default();
    for tok in tokens {
        let (idx_str, val_str) = tok
            .split_once(':')
            .ok_or_else(|| ParseErrorKind::FeatureNoColon(tok.to_string()))?;
        let idx: u32 = idx_str
            .parse()
            .ok()
            .filter(|&i| i > 0)
            .ok_or_else(|| ParseErrorKind::BadIndex(idx_str.to_string()))?;
        let val: f64 = val_str
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| ParseErrorKind::BadValue(val_str.to_string()))?;
        if let Some(&previous) = features.indices.last() {
            if idx <= previous {
                return Err(ParseErrorKind::NonIncreasingIndex {
                    previous,
                    current: idx,
                });
            }
        }
        features.indices.push(idx);
        features.values.push(val);
    }
    // label already validated by parse_label
    Ok(LabeledInstance {
        features,
        label: label as i8,
    })
}

/// Parses libsvm text. Blank lines are skipped; LF and CRLF are both accepted.
pub fn parse_libsvm<R: BufRead>(reader: R, encoding: LabelEncoding) -> Result<Dataset, DataError> {
    let mut instances = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let inst = parse_line(line, encoding).map_err(|kind| DataError::Parse {
            line: lineno + 1,
            kind,
        })?;
        instances.push(inst);
    }
    Dataset::new(instances, 0)
}

/// Opens and parses a libsvm file; errors carry the path.
pub fn read_libsvm_file(path: &Path, encoding: LabelEncoding) -> Result<Dataset, DataError> {
    let file = File::open(path).map_err(|source| DataError::File {
        path: path.to_path_buf(),
        source,
    })?;
    parse_libsvm(BufReader::new(file), encoding)
}

/// Writes libsvm text that [`parse_libsvm`] reads back to an identical dataset.
pub fn write_libsvm<W: Write>(dataset: &Dataset, mut writer: W) -> io::Result<()> {
    for inst in dataset.iter() {
        write!(writer, "{}", if inst.label > 0 { "+1" } else { "-1" })?;
        for (idx, val) in inst.features.iter() {
            write!(writer, " {idx}:{val}")?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

/// Per-column affine map onto `[-1, 1]` fitted on one dataset.
///
/// Implicit zeros count as observed values. Columns that are constant in the
/// fitted data map to 0. Applying the map to other data (a validation set)
/// uses the fitted minima and maxima, so values may fall outside `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl Standardizer {
    pub fn fit(dataset: &Dataset) -> Self {
        let d = dataset.dimension();
        let n = dataset.len();
        let mut mins = vec![f64::INFINITY; d];
        let mut maxs = vec![f64::NEG_INFINITY; d];
        let mut nnz = vec![0usize; d];
        for inst in dataset.iter() {
            for (idx, val) in inst.features.iter() {
                let j = idx as usize - 1;
                mins[j] = mins[j].min(val);
                maxs[j] = maxs[j].max(val);
                nnz[j] += 1;
            }
        }
        for j in 0..d {
            if nnz[j] < n {
                mins[j] = mins[j].min(0.0);
                maxs[j] = maxs[j].max(0.0);
            }
        }
        Standardizer { mins, maxs }
    }

    pub fn dimension(&self) -> usize {
        self.mins.len()
    }

    /// Column minimum and maximum seen during fitting.
    pub fn range(&self, column: usize) -> (f64, f64) {
        (self.mins[column], self.maxs[column])
    }

    fn map(&self, j: usize, v: f64) -> f64 {
        match (self.mins.get(j), self.maxs.get(j)) {
            (Some(&lo), Some(&hi)) if hi > lo => 2.0 * (v - lo) / (hi - lo) - 1.0,
            _ => 0.0,
        }
    }

    pub fn transform_vector(&self, x: &SparseVector, dimension: usize) -> SparseVector {
        let mut dense = x.to_dense(dimension);
        for (j, v) in dense.iter_mut().enumerate() {
            *v = self.map(j, *v);
        }
        SparseVector::from_dense(&dense)
    }

    pub fn transform(&self, dataset: &Dataset) -> Dataset {
        let d = dataset.dimension().max(self.dimension());
        let instances = dataset
            .iter()
            .map(|inst| LabeledInstance {
                features: self.transform_vector(&inst.features, d),
                label: inst.label,
            })
            .collect();
        Dataset {
            instances,
            dimension: d,
        }
    }
}

/// Fits a [`Standardizer`] on `dataset` and applies it.
pub fn standardize(dataset: &Dataset) -> (Dataset, Standardizer) {
    let scaler = Standardizer::fit(dataset);
    (scaler.transform(dataset), scaler)
}

/// How to partition a dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitSpec {
    /// `validation_fraction` of the instances (rounded, at least one on each
    /// side) go to validation.
    Holdout { validation_fraction: f64, seed: u64 },
    /// `k` disjoint folds whose sizes differ by at most one.
    KFold { k: usize, seed: u64 },
}

/// One train/validation pair.
#[derive(Debug, Clone)]
pub struct Fold {
    pub train: Dataset,
    pub validation: Dataset,
    /// Positions of the validation instances in the source dataset, ascending.
    pub validation_indices: Vec<usize>,
}

#[derive(Debug, Clone)]
pub enum Split {
    Holdout(Fold),
    KFold(Vec<Fold>),
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

fn make_fold(dataset: &Dataset, mut validation: Vec<usize>) -> Result<Fold, DataError> {
    validation.sort_unstable();
    let mut is_val = vec![false; dataset.len()];
    for &i in &validation {
        is_val[i] = true;
    }
    let train: Vec<usize> = (0..dataset.len()).filter(|&i| !is_val[i]).collect();
    let val_set = dataset.select(&validation)?;
    if let Err(DataError::ZeroValidationInstance { index }) = val_set.ensure_nonzero_inputs() {
        return Err(DataError::ZeroValidationInstance {
            index: validation[index],
        });
    }
    Ok(Fold {
        train: dataset.select(&train)?,
        validation: val_set,
        validation_indices: validation,
    })
}

/// Sizes of `k` almost-equal parts of `n`: the first `n % k` parts get one extra.
pub fn fold_sizes(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|i| n / k + usize::from(i < n % k)).collect()
}

pub fn holdout_split(
    dataset: &Dataset,
    validation_fraction: f64,
    seed: u64,
) -> Result<Fold, DataError> {
    let n = dataset.len();
    if !(validation_fraction > 0.0 && validation_fraction < 1.0) {
        return Err(DataError::InvalidSplit(format!(
            "holdout fraction {validation_fraction} is not in (0, 1)"
        )));
    }
    if n < 2 {
        return Err(DataError::InvalidSplit(
            "holdout needs at least two instances".into(),
        ));
    }
    let n_val = ((n as f64 * validation_fraction).round() as usize).clamp(1, n - 1);
    let order = shuffled(n, seed);
    make_fold(dataset, order[..n_val].to_vec())
}

pub fn kfold_split(dataset: &Dataset, k: usize, seed: u64) -> Result<Vec<Fold>, DataError> {
    let n = dataset.len();
    if k < 2 {
        return Err(DataError::InvalidSplit(format!("k = {k} must be at least 2")));
    }
    if k > n {
        return Err(DataError::TooManyFolds { n, k });
    }
    let order = shuffled(n, seed);
    let mut start = 0;
    let mut folds = Vec::with_capacity(k);
    for size in fold_sizes(n, k) {
        folds.push(make_fold(dataset, order[start..start + size].to_vec())?);
        start += size;
    }
    Ok(folds)
}

pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<Split, DataError> {
    match *spec {
        SplitSpec::Holdout {
            validation_fraction,
            seed,
        } => holdout_split(dataset, validation_fraction, seed).map(Split::Holdout),
        SplitSpec::KFold { k, seed } => kfold_split(dataset, k, seed).map(Split::KFold),
    }
}
