//! Comma-separated scattered data: one record per line, `x1,…,xd,f`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rbftune_core::data::{DataSet, PointSet};

use crate::{Error, Result};

/// Parses records into a data set without checking that locations are
/// distinct; rows keep their file order.
///
/// Row numbers in errors are 1-based physical line numbers, so a header line
/// counts as row 1.
pub fn read_records<R: Read>(reader: R, dim: usize, header: bool) -> Result<DataSet> {
    if dim == 0 {
        return Err(Error::Config("dimension must be at least 1".into()));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut coords = Vec::new();
    let mut values = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let row = e.position().map_or(0, |p| p.line());
                return Err(Error::Parse {
                    row,
                    message: e.to_string(),
                });
            }
        }
        let row = record.position().map_or(0, |p| p.line());
        if record.len() != dim + 1 {
            return Err(Error::Parse {
                row,
                message: format!("expected {} fields, found {}", dim + 1, record.len()),
            });
        }
        for (k, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row,
                message: format!("field {} is not a number: `{field}`", k + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    message: format!("field {} is not finite", k + 1),
                });
            }
            if k < dim {
                coords.push(v);
            } else {
                values.push(v);
            }
        }
    }
    if values.is_empty() {
        return Err(Error::Config("no data rows".into()));
    }
    Ok(DataSet::new(PointSet::new(dim, coords)?, values)?)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Loads interpolation data: duplicate locations are an error that lists the
/// offending (0-based) record indices.
pub fn load_csv(path: impl AsRef<Path>, dim: usize, header: bool) -> Result<DataSet> {
    let ds = read_records(open(path.as_ref())?, dim, header)?;
    ds.require_distinct()?;
    Ok(ds)
}

/// Loads an evaluation set, where repeated locations are tolerated; they are
/// returned alongside so the caller can warn about them.
pub fn load_evaluation_csv(
    path: impl AsRef<Path>,
    dim: usize,
    header: bool,
) -> Result<(DataSet, Vec<(usize, usize)>)> {
    let ds = read_records(open(path.as_ref())?, dim, header)?;
    let dups = ds.locations().duplicates();
    Ok((ds, dups))
}

/// Writes `x1,…,xd,f` records, optionally preceded by a header line.
pub fn write_records<W: Write>(writer: W, data: &DataSet, header: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let dim = data.locations().dim();
    if header {
        let mut names: Vec<String> = (1..=dim).map(|k| format!("x{k}")).collect();
        names.push("f".into());
        w.write_record(&names)?;
    }
    for (p, v) in data.locations().iter().zip(data.values()) {
        let mut fields: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        fields.push(v.to_string());
        w.write_record(&fields)?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_and_crlf() {
        let ds = read_records("0,0,1\n0.5,0.5,2\n1,1,3".as_bytes(), 2, false).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.values(), &[1.0, 2.0, 3.0]);
        let crlf = read_records("0,0,1\r\n1,1,3\r\n".as_bytes(), 2, false).unwrap();
        assert_eq!(crlf.locations().point(1), &[1.0, 1.0]);
    }

    #[test]
    fn header_is_skipped() {
        let ds = read_records("x,y,z\n0.25,0.75,4\n".as_bytes(), 2, true).unwrap();
        assert_eq!(ds.len(), 1);
        let err = read_records("x,y,z\n0.25,0.75,4\n".as_bytes(), 2, false).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, .. }));
    }

    #[test]
    fn arity_error_names_row() {
        let err = read_records("0,0".as_bytes(), 2, false).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, .. }), "{err}");
        let err = read_records("0,0,1\n0,0.5,1,7\n".as_bytes(), 2, false).unwrap_err();
        assert!(err.to_string().starts_with("row 2:"), "{err}");
    }

    #[test]
    fn write_then_read_is_lossless() {
        let ds = read_records(
            "0.1,0.30000000000000004,-2.5e-7\n1,0,3\n".as_bytes(),
            2,
            false,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, &ds, true).unwrap();
        let back = read_records(buf.as_slice(), 2, true).unwrap();
        assert_eq!(back, ds);
    }
}
