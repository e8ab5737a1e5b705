use std::path::Path;

use crate::boolfn::BooleanFunction;
use crate::error::{Error, Result};

/// Labelled real-valued rows, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    n: usize,
    features: Vec<f64>,
    labels: Vec<f64>,
}

impl Dataset {
    pub fn new(n: usize, features: Vec<f64>, labels: Vec<f64>) -> Result<Self> {
        if features.len() != n * labels.len() {
            return Err(Error::DimensionMismatch {
                expected: n * labels.len(),
                got: features.len(),
            });
        }
        Ok(Dataset { n, features, labels })
    }

    /// Every point of `{±1}^n` labelled by `f`, in table order.
    pub fn truth_table(f: &BooleanFunction) -> Result<Self> {
        let table = f.truth_table()?;
        let n = f.n();
        let mut features = Vec::with_capacity(table.len() * n);
        for t in 0..table.len() {
            features.extend((0..n).map(|i| if (t >> i) & 1 == 1 { -1.0 } else { 1.0 }));
        }
        let labels = table.iter().map(|&v| v as f64).collect();
        Dataset::new(n, features, labels)
    }

    /// CSV with a header row. The label column is picked by name, or the last
    /// column when `label` is `None`; all other columns are features.
    pub fn from_csv(path: &Path, label: Option<&str>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::io(path, io),
                other => Error::InvalidArgument(format!("{}: {other:?}", path.display())),
            })?;
        let header = reader.headers()?.clone();
        if header.len() < 2 {
            return Err(Error::parse(
                path.display().to_string(),
                "need at least one feature column and a label column",
            ));
        }
        let label_col = match label {
            Some(name) => header.iter().position(|h| h == name).ok_or_else(|| {
                Error::parse(path.display().to_string(), format!("no column named `{name}`"))
            })?,
            None => header.len() - 1,
        };
        let n = header.len() - 1;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != header.len() {
                return Err(Error::DimensionMismatch {
                    expected: header.len(),
                    got: record.len(),
                });
            }
            for (c, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| {
                    Error::parse(
                        path.display().to_string(),
                        format!("row {}: `{field}` is not a number", row + 2),
                    )
                })?;
                if c == label_col {
                    labels.push(v);
                } else {
                    features.push(v);
                }
            }
        }
        Dataset::new(n, features, labels)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n..(i + 1) * self.n]
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }
}

/// What a network is trained or evaluated on.
#[derive(Clone, Copy, Debug)]
pub enum Target<'a> {
    /// Fresh uniform samples from `{±1}^n` labelled by `f`.
    Boolean(&'a BooleanFunction),
    /// Rows sampled with replacement.
    Dataset(&'a Dataset),
}

impl Target<'_> {
    pub fn n(&self) -> usize {
        match self {
            Target::Boolean(f) => f.n(),
            Target::Dataset(d) => d.n(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn csv_round() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "a,b,y\n1,-1,1\n# comment\n-1,1,-1").unwrap();
        let d = Dataset::from_csv(file.path(), None).unwrap();
        assert_eq!((d.n(), d.len()), (2, 2));
        assert_eq!(d.row(1), &[-1.0, 1.0]);
        assert_eq!(d.labels(), &[1.0, -1.0]);
        let by_name = Dataset::from_csv(file.path(), Some("a")).unwrap();
        assert_eq!(by_name.row(0), &[-1.0, 1.0]);
        assert_eq!(by_name.labels(), &[1.0, -1.0]);
        assert!(Dataset::from_csv(file.path(), Some("z")).is_err());
        assert!(matches!(
            Dataset::from_csv(Path::new("/nonexistent/x.csv"), None),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn ragged_rows() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "a,b,y\n1,-1,1\n1,1").unwrap();
        assert!(Dataset::from_csv(file.path(), None).is_err());
    }

    #[test]
    fn truth_table_rows() {
        let f = BooleanFunction::monomial(3, &[1]).unwrap();
        let d = Dataset::truth_table(&f).unwrap();
        assert_eq!(d.len(), 8);
        for i in 0..8 {
            assert_eq!(d.label(i), d.row(i)[1]);
        }
    }
}
