//! Datasets of labelled compositions: CSV input/output, class bookkeeping and
//! replicated train/test splitting.
//!
//! Input CSV: a header row, a label column (named by the caller), an optional
//! id column that is ignored, and numeric feature columns. Columns named
//! `weight` and `provenance` are read back as sample weights and provenance
//! tags, which makes [`write_csv`] output loadable again. Rows are closed to
//! the simplex on load.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::augment::{ClassId, LabeledSample, Provenance};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::preprocess::{normalize_rows, LibrarySize};
use crate::rng::stream;
use crate::scalar::Scalar;

pub const WEIGHT_COLUMN: &str = "weight";
pub const PROVENANCE_COLUMN: &str = "provenance";
pub const LABEL_COLUMN: &str = "label";

/// Labelled compositions sharing a feature set and a class catalogue.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub samples: Vec<LabeledSample<T>>,
    pub feature_names: Vec<String>,
    /// Class names indexed by [`ClassId`].
    pub class_names: Vec<String>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(
        samples: Vec<LabeledSample<T>>,
        feature_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let p = feature_names.len();
        for (i, s) in samples.iter().enumerate() {
            if s.x.dim() != p {
                return Err(Error::DimensionMismatch { left: p, right: s.x.dim() });
            }
            if s.y.0 >= class_names.len() {
                return Err(Error::InvalidConfig(format!("sample {i} has unknown class {}", s.y.0)));
            }
            if !(s.weight > T::zero()) {
                return Err(Error::InvalidConfig(format!("sample {i} has non-positive weight")));
            }
        }
        Ok(Self { samples, feature_names, class_names })
    }

    /// Closes raw nonnegative rows (counts or proportions) into original
    /// samples of weight one, recording each row's library size.
    pub fn from_rows(
        raw_rows: &[Vec<T>],
        labels: &[ClassId],
        feature_names: Vec<String>,
        class_names: Vec<String>,
        default_library_size: LibrarySize,
    ) -> Result<Self> {
        if raw_rows.len() != labels.len() {
            return Err(Error::DimensionMismatch { left: raw_rows.len(), right: labels.len() });
        }
        let (comps, sizes) = normalize_rows(raw_rows, default_library_size)?;
        let samples = comps
            .into_iter()
            .zip(sizes)
            .zip(labels)
            .map(|((x, l), &y)| LabeledSample::original(x, y).with_library_size(l))
            .collect();
        Self::new(samples, feature_names, class_names)
    }

    /// Like [`Dataset::from_rows`] with string labels; classes are numbered in
    /// order of first appearance and features are named `f0, f1, ...`.
    pub fn from_labelled_rows<S: AsRef<str>>(
        raw_rows: &[Vec<T>],
        labels: &[S],
        default_library_size: LibrarySize,
    ) -> Result<Self> {
        let p = raw_rows.first().map_or(0, Vec::len);
        let mut class_names: Vec<String> = Vec::new();
        let ids = labels
            .iter()
            .map(|l| {
                let l = l.as_ref();
                ClassId(class_names.iter().position(|c| c == l).unwrap_or_else(|| {
                    class_names.push(l.to_string());
                    class_names.len() - 1
                }))
            })
            .collect::<Vec<_>>();
        Self::from_rows(raw_rows, &ids, (0..p).map(|j| format!("f{j}")).collect(), class_names, default_library_size)
    }

    /// Number of samples `n`.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Number of parts `p`.
    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn labels(&self) -> Vec<ClassId> {
        self.samples.iter().map(|s| s.y).collect()
    }

    /// Per-sample library sizes, if every sample has one.
    pub fn library_sizes(&self) -> Option<Vec<LibrarySize>> {
        self.samples.iter().map(|s| s.library_size).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_names.len()];
        for s in &self.samples {
            counts[s.y.0] += 1;
        }
        counts
    }

    /// Same features and catalogue, different samples.
    pub fn with_samples(&self, samples: Vec<LabeledSample<T>>) -> Self {
        Self {
            samples,
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
        }
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        self.with_samples(indices.iter().map(|&i| self.samples[i].clone()).collect())
    }
}

/// Column layout of an input CSV.
#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub label_column: String,
    pub id_column: Option<String>,
    pub delimiter: u8,
    pub default_library_size: LibrarySize,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            label_column: LABEL_COLUMN.to_string(),
            id_column: None,
            delimiter: b',',
            default_library_size: LibrarySize::default(),
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse { line, column: 0, message: e.to_string() }
}

/// Loads a dataset, closing every row and mapping labels to a class catalogue
/// in first-appearance order.
pub fn load_csv<T: Scalar>(path: &Path, options: &CsvOptions) -> Result<Dataset<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, options)
}

/// [`load_csv`] over any reader.
pub fn read_csv<T: Scalar, R: std::io::Read>(reader: R, options: &CsvOptions) -> Result<Dataset<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers().map_err(csv_error)?.iter().map(|h| h.trim().to_string()).collect();
    let label_idx = header
        .iter()
        .position(|h| *h == options.label_column)
        .ok_or_else(|| Error::MissingLabelColumn(options.label_column.clone()))?;
    let id_idx = match &options.id_column {
        Some(name) => Some(header.iter().position(|h| h == name).ok_or_else(|| {
            Error::InvalidConfig(format!("id column {name:?} not found in header"))
        })?),
        None => None,
    };
    let reserved = |name: &str| name == WEIGHT_COLUMN || name == PROVENANCE_COLUMN;
    let weight_idx = header.iter().position(|h| h == WEIGHT_COLUMN).filter(|&i| i != label_idx);
    let prov_idx = header.iter().position(|h| h == PROVENANCE_COLUMN).filter(|&i| i != label_idx);
    let feature_idx: Vec<usize> = (0..header.len())
        .filter(|&i| i != label_idx && Some(i) != id_idx && !reserved(&header[i]))
        .collect();
    if feature_idx.len() < 2 {
        return Err(Error::DimensionTooSmall(feature_idx.len()));
    }

    let mut raw_rows: Vec<Vec<T>> = Vec::new();
    let mut labels: Vec<ClassId> = Vec::new();
    let mut weights: Vec<T> = Vec::new();
    let mut provenance: Vec<Provenance> = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    let mut class_lookup: HashMap<String, usize> = HashMap::new();

    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(Error::RaggedRow { line, expected: header.len(), found: record.len() });
        }
        let mut values = Vec::with_capacity(feature_idx.len());
        for &i in &feature_idx {
            let cell = record[i].trim();
            let v: T = cell.parse().map_err(|_| Error::NonNumericFeature {
                row,
                column: header[i].clone(),
                value: cell.to_string(),
            })?;
            values.push(v);
        }
        raw_rows.push(values);

        let label = record[label_idx].trim().to_string();
        let next = class_names.len();
        let id = *class_lookup.entry(label.clone()).or_insert_with(|| {
            class_names.push(label);
            next
        });
        labels.push(ClassId(id));

        let weight = match weight_idx {
            Some(i) => {
                let cell = record[i].trim();
                match cell.parse::<T>() {
                    Ok(w) if w > T::zero() && w.is_finite() => w,
                    _ => {
                        return Err(Error::Parse {
                            line,
                            column: i + 1,
                            message: format!("weight {cell:?} is not a positive number"),
                        })
                    }
                }
            }
            None => T::one(),
        };
        weights.push(weight);

        let prov = match prov_idx {
            Some(i) => record[i].trim().parse().map_err(|_| Error::Parse {
                line,
                column: i + 1,
                message: format!("unknown provenance {:?}", &record[i]),
            })?,
            None => Provenance::Original,
        };
        provenance.push(prov);
    }

    let feature_names = feature_idx.iter().map(|&i| header[i].clone()).collect();
    let mut ds = Dataset::from_rows(&raw_rows, &labels, feature_names, class_names, options.default_library_size)?;
    for (s, (weight, provenance)) in ds.samples.iter_mut().zip(weights.into_iter().zip(provenance)) {
        s.weight = weight;
        s.provenance = provenance;
    }
    Ok(ds)
}

/// Renders a dataset as CSV text: the features, then `label`, `weight` and
/// `provenance`. Numbers carry enough digits to parse back bit-exactly.
pub fn to_csv_bytes<T: Scalar>(ds: &Dataset<T>, delimiter: u8) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(Vec::new());
    let mut header: Vec<&str> = ds.feature_names.iter().map(String::as_str).collect();
    header.extend([LABEL_COLUMN, WEIGHT_COLUMN, PROVENANCE_COLUMN]);
    let io_err = |e: csv::Error| Error::Parse { line: 0, column: 0, message: e.to_string() };
    w.write_record(&header).map_err(io_err)?;
    for s in &ds.samples {
        let mut record: Vec<String> = s.x.parts().iter().map(|v| v.render()).collect();
        record.push(ds.class_names[s.y.0].clone());
        record.push(s.weight.render());
        record.push(s.provenance.to_string());
        w.write_record(&record).map_err(io_err)?;
    }
    w.into_inner().map_err(|e| Error::Parse { line: 0, column: 0, message: e.to_string() })
}

/// Writes [`to_csv_bytes`] output atomically.
pub fn write_csv<T: Scalar>(ds: &Dataset<T>, path: &Path) -> Result<()> {
    write_atomic(path, &to_csv_bytes(ds, b',')?)
}

/// Empirical class frequencies, indexed by [`ClassId`].
pub fn class_prior<T: Scalar>(ds: &Dataset<T>) -> Result<Vec<T>> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = T::lit(ds.len() as f64);
    Ok(ds.class_counts().into_iter().map(|c| T::lit(c as f64) / n).collect())
}

/// Replicated train/test splitting.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub replicates: usize,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { test_fraction: 0.2, replicates: 20, seed: 0, stratified: true }
    }
}

fn test_count(size: usize, fraction: f64) -> usize {
    ((size as f64 * fraction).round() as usize).clamp(1, size - 1)
}

/// Train/test index sets for replicate `replicate`; both sorted.
pub fn split_indices<T: Scalar>(
    ds: &Dataset<T>,
    spec: &SplitSpec,
    replicate: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "test fraction must lie in (0, 1), got {}",
            spec.test_fraction
        )));
    }
    let groups: Vec<(String, Vec<usize>)> = if spec.stratified {
        ds.class_names
            .iter()
            .enumerate()
            .map(|(c, name)| {
                let members = (0..ds.len()).filter(|&i| ds.samples[i].y.0 == c).collect();
                (name.clone(), members)
            })
            .filter(|(_, m): &(String, Vec<usize>)| !m.is_empty())
            .collect()
    } else {
        vec![("<all>".to_string(), (0..ds.len()).collect())]
    };
    let mut rng = stream(spec.seed, "split", replicate as u64);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, mut members) in groups {
        if members.len() < 2 {
            return Err(Error::ClassTooSmall { class, count: members.len() });
        }
        let t = test_count(members.len(), spec.test_fraction);
        members.shuffle(&mut rng);
        test.extend_from_slice(&members[..t]);
        train.extend_from_slice(&members[t..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// `spec.replicates` independent train/test splits; replicate `r` depends
/// only on `(spec.seed, r)`.
pub fn split<T: Scalar>(ds: &Dataset<T>, spec: &SplitSpec) -> Result<Vec<(Dataset<T>, Dataset<T>)>> {
    (0..spec.replicates)
        .map(|r| {
            let (train, test) = split_indices(ds, spec, r)?;
            Ok((ds.subset(&train), ds.subset(&test)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::Composition;

    fn toy(labels: &[usize], names: &[&str]) -> Dataset<f64> {
        let samples = labels
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                let a = 1.0 + i as f64;
                LabeledSample::original(
                    crate::composition::close(&[a, 2.0, 3.0]).unwrap(),
                    ClassId(y),
                )
            })
            .collect();
        Dataset::new(
            samples,
            vec!["f1".into(), "f2".into(), "f3".into()],
            names.iter().map(|s| s.to_string()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn loads_counts_and_maps_labels() {
        let text = "f1,f2,label\n2,2,a\n1,3,a\n4,4,b\n";
        let ds: Dataset<f64> = read_csv(text.as_bytes(), &CsvOptions::default()).unwrap();
        assert_eq!((ds.len(), ds.dim()), (3, 2));
        assert_eq!(ds.class_names, vec!["a", "b"]);
        assert_eq!(ds.samples[0].x.parts(), &[0.5, 0.5]);
        assert_eq!(ds.samples[1].x.parts(), &[0.25, 0.75]);
        assert_eq!(ds.samples[2].x.parts(), &[0.5, 0.5]);
        assert_eq!(ds.labels(), vec![ClassId(0), ClassId(0), ClassId(1)]);
        let sizes: Vec<u64> = ds.library_sizes().unwrap().iter().map(|l| l.get()).collect();
        assert_eq!(sizes, vec![4, 4, 8]);
        assert!(ds.samples.iter().all(|s| s.weight == 1.0));
    }

    #[test]
    fn id_column_and_delimiter() {
        let text = "id;x;y;z;grp\ns1;1;1;2;u\ns2;0;3;1;v\n";
        let opts = CsvOptions {
            label_column: "grp".into(),
            id_column: Some("id".into()),
            delimiter: b';',
            ..CsvOptions::default()
        };
        let ds: Dataset<f64> = read_csv(text.as_bytes(), &opts).unwrap();
        assert_eq!(ds.feature_names, vec!["x", "y", "z"]);
        assert_eq!(ds.samples[0].x.parts(), &[0.25, 0.25, 0.5]);
    }

    #[test]
    fn proportion_rows_keep_values_and_default_depth() {
        let text = "a,b,c,label\n0.5,0.3,0.2,x\n0.1,0.6,0.3,y\n";
        let ds: Dataset<f64> = read_csv(text.as_bytes(), &CsvOptions::default()).unwrap();
        assert_eq!(ds.samples[0].x.parts(), &[0.5, 0.3, 0.2]);
        assert_eq!(ds.samples[1].x.parts(), &[0.1, 0.6, 0.3]);
        assert!(ds.library_sizes().unwrap().iter().all(|l| l.get() == 10_000));
    }

    #[test]
    fn load_errors() {
        let opts = CsvOptions::default();
        let err = read_csv::<f64, _>("a,b,label\n1,x,q\n".as_bytes(), &opts).unwrap_err();
        match &err {
            Error::NonNumericFeature { row, column, value } => {
                assert_eq!((*row, column.as_str(), value.as_str()), (0, "b", "x"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            read_csv::<f64, _>("a,b,class\n1,2,q\n".as_bytes(), &opts),
            Err(Error::MissingLabelColumn(_))
        ));
        assert!(matches!(
            read_csv::<f64, _>("a,b,label\n1,2,q\n1,2\n".as_bytes(), &opts),
            Err(Error::RaggedRow { line: 3, expected: 3, found: 2 })
        ));
        assert!(matches!(
            read_csv::<f64, _>("a,b,label\n0,0,q\n".as_bytes(), &opts),
            Err(Error::AllZeroRow { row: 0 })
        ));
        assert!(matches!(
            read_csv::<f64, _>("a,label\n1,q\n".as_bytes(), &opts),
            Err(Error::DimensionTooSmall(1))
        ));
    }

    #[test]
    fn write_then_read_is_identity() {
        let mut ds = toy(&[0, 1, 0, 1], &["left", "right"]);
        ds.samples[1].weight = 0.1;
        ds.samples[1].provenance = Provenance::Synthetic(crate::augment::Strategy::CompositionalCutMix);
        ds.samples[2].x = Composition::new(vec![1.0 / 3.0, 0.0, 2.0 / 3.0]).unwrap();
        let bytes = to_csv_bytes(&ds, b',').unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("f1,f2,f3,label,weight,provenance\n"));
        assert!(text.contains("synthetic:cutmix"));
        let back: Dataset<f64> = read_csv(&bytes[..], &CsvOptions::default()).unwrap();
        assert_eq!(back.class_names, ds.class_names);
        for (a, b) in back.samples.iter().zip(&ds.samples) {
            assert_eq!(a.x, b.x);
            assert_eq!((a.y, a.weight, a.provenance), (b.y, b.weight, b.provenance));
        }
    }

    #[test]
    fn empty_dataset_writes_header_only() {
        let ds = toy(&[], &["a"]);
        let text = String::from_utf8(to_csv_bytes(&ds, b',').unwrap()).unwrap();
        assert_eq!(text, "f1,f2,f3,label,weight,provenance\n");
    }

    #[test]
    fn class_prior_examples() {
        let p = class_prior(&toy(&[0, 0, 1], &["a", "b"])).unwrap();
        assert_eq!(p, vec![2.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(class_prior(&toy(&[0, 0], &["a"])).unwrap(), vec![1.0]);
        assert_eq!(class_prior(&toy(&[0, 1, 0, 1], &["a", "b"])).unwrap(), vec![0.5, 0.5]);
        assert!(matches!(class_prior(&toy(&[], &["a"])), Err(Error::EmptyDataset)));
    }

    #[test]
    fn stratified_split_arithmetic() {
        let ds = toy(&[0, 0, 0, 0, 0, 1, 1, 1, 1, 1], &["a", "b"]);
        let splits = split(&ds, &SplitSpec { replicates: 3, ..SplitSpec::default() }).unwrap();
        assert_eq!(splits.len(), 3);
        for (train, test) in &splits {
            assert_eq!((train.len(), test.len()), (8, 2));
            assert_eq!(test.class_counts(), vec![1, 1]);
        }
        let again = split(&ds, &SplitSpec { replicates: 3, ..SplitSpec::default() }).unwrap();
        assert_eq!(splits, again);
    }

    #[test]
    fn table_one_sizes() {
        let labels: Vec<usize> = (0..140).map(|i| usize::from(i >= 78)).collect();
        let ds = toy(&labels, &["crohn", "without"]);
        for stratified in [true, false] {
            let spec = SplitSpec { stratified, replicates: 2, ..SplitSpec::default() };
            for (train, test) in split(&ds, &spec).unwrap() {
                assert_eq!((train.len(), test.len()), (112, 28));
            }
        }
    }

    #[test]
    fn small_classes_are_rejected() {
        let ds = toy(&[0, 0, 1], &["a", "b"]);
        assert!(matches!(
            split(&ds, &SplitSpec::default()),
            Err(Error::ClassTooSmall { count: 1, .. })
        ));
        let bad = SplitSpec { test_fraction: 1.0, ..SplitSpec::default() };
        assert!(split(&toy(&[0, 0], &["a"]), &bad).is_err());
    }
}
