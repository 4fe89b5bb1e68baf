//! Feature files: UTF-8 CSV with header `label,f0,...,f{d-1}` and one sample
//! per row.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::pool::{FeatureVector, LabeledPool};

/// Reads a feature CSV into a pool. Row order is preserved within classes.
pub fn ingest_feature_file(path: &Path) -> Result<LabeledPool> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_features(file, &path.display().to_string())
}

/// Parses feature CSV text from any reader; `name` is used in error messages.
pub fn read_features<R: Read>(reader: R, name: &str) -> Result<LabeledPool> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: name.to_owned(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        None => return Err(parse_err(1, "empty file".into())),
        Some(r) => r.map_err(|e| parse_err(csv_line(&e), e.to_string()))?,
    };
    let line_of = |r: &csv::StringRecord| r.position().map_or(0, |p| p.line() as usize);
    let header_line = line_of(&header);
    if header.get(0).map(str::trim) != Some("label") {
        return Err(parse_err(
            header_line,
            "missing header: expected `label,f0,f1,...`".into(),
        ));
    }
    let dim = header.len() - 1;
    if dim == 0 {
        return Err(parse_err(header_line, "header declares no feature columns".into()));
    }
    for (j, name) in header.iter().skip(1).enumerate() {
        if name.trim() != format!("f{j}") {
            return Err(parse_err(
                header_line,
                format!("header column {} is `{}`, expected `f{j}`", j + 2, name.trim()),
            ));
        }
    }

    let mut rows = Vec::new();
    for record in records {
        let record = record.map_err(|e| parse_err(csv_line(&e), e.to_string()))?;
        let line = line_of(&record);
        if record.len() != dim + 1 {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", dim + 1, record.len()),
            ));
        }
        let label = record[0].trim();
        if label.is_empty() {
            return Err(parse_err(line, "empty label".into()));
        }
        let mut values = Vec::with_capacity(dim);
        for (j, cell) in record.iter().skip(1).enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("column f{j}: `{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("column f{j}: non-finite value `{cell}`")));
            }
            values.push(v);
        }
        rows.push((label.to_owned(), FeatureVector::new(values)?));
    }
    if rows.is_empty() {
        return Err(parse_err(header_line + 1, "no data rows after the header".into()));
    }
    LabeledPool::from_records(rows)
}

fn csv_line(e: &csv::Error) -> usize {
    e.position().map_or(0, |p| p.line() as usize)
}

/// Writes `pool` as feature CSV, class by class. Floats use the shortest
/// representation that reads back exactly.
pub fn write_features<W: Write>(pool: &LabeledPool, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["label".to_owned()];
    header.extend((0..pool.dim()).map(|j| format!("f{j}")));
    w.write_record(&header).map_err(csv_to_io)?;
    for class in pool.classes() {
        let label = pool.label(class.class_id());
        for x in class.samples() {
            let mut row = Vec::with_capacity(x.len() + 1);
            row.push(label.to_owned());
            row.extend(x.iter().map(|v| v.to_string()));
            w.write_record(&row).map_err(csv_to_io)?;
        }
    }
    w.flush().map_err(|e| Error::io("<feature csv>", e))
}

pub fn write_feature_file(pool: &LabeledPool, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_features(pool, std::io::BufWriter::new(file))
}

fn csv_to_io(e: csv::Error) -> Error {
    Error::io("<feature csv>", std::io::Error::other(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LabeledPool> {
        read_features(text.as_bytes(), "mem.csv")
    }

    fn line_of(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn small_fixture() {
        let pool = parse("label,f0\na,0.5\nb,-1\na,2e-3\n").unwrap();
        assert_eq!(pool.num_classes(), 2);
        assert_eq!(pool.dim(), 1);
        assert_eq!(pool.class(0).sample(1), &[2e-3]);
        assert_eq!(pool.labels(), &["a".to_owned(), "b".to_owned()]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of(parse("label,f0,f1\na,1\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("label,f0\na,1\nb,x\n").unwrap_err()), 3);
        assert_eq!(line_of(parse("a,1\nb,2\n").unwrap_err()), 1);
        assert_eq!(line_of(parse("").unwrap_err()), 1);
        assert_eq!(line_of(parse("label,f0\n").unwrap_err()), 2);
        assert_eq!(line_of(parse("label,f1\na,1\n").unwrap_err()), 1);
        assert_eq!(line_of(parse("label,f0\na,NaN\n").unwrap_err()), 2);
    }

    #[test]
    fn write_then_read() {
        let pool = LabeledPool::from_class_data(
            vec!["x".into(), "y".into()],
            2,
            vec![vec![0.1, 1.0 / 3.0], vec![-2.5, 1e-300, 7.0, 8.0]],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_features(&pool, &mut buf).unwrap();
        let back = read_features(&buf[..], "buf").unwrap();
        assert_eq!(back, pool);
    }
}
