//! Matrix file formats.
//!
//! `EMB1` layout (all little-endian):
//!
//! ```text
//! b"EMB1" | rows: u32 | cols: u32 | rows*cols f32, row-major
//! ```
//!
//! The CSV alternative has a `f0,f1,...` header and one sample per line.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::{DataMatrix, Error, Result};

pub const EMB1_MAGIC: &[u8; 4] = b"EMB1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Emb1,
    Csv,
}

impl MatrixFormat {
    /// `.csv` paths are CSV, anything else is EMB1.
    pub fn from_extension(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => MatrixFormat::Csv,
            _ => MatrixFormat::Emb1,
        }
    }
}

pub fn write_emb1<W: Write>(mut w: W, m: &DataMatrix) -> Result<()> {
    let rows = u32::try_from(m.rows())
        .map_err(|_| Error::Format("row count exceeds u32".into()))?;
    let cols = u32::try_from(m.cols())
        .map_err(|_| Error::Format("column count exceeds u32".into()))?;
    w.write_all(EMB1_MAGIC)?;
    w.write_all(&rows.to_le_bytes())?;
    w.write_all(&cols.to_le_bytes())?;
    for v in m.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf).map_err(truncated)?;
    Ok(u32::from_le_bytes(buf))
}

pub(crate) fn read_f32s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f32>> {
    let mut out = Vec::with_capacity(n.min(1 << 20));
    let mut buf = [0u8; 4];
    for _ in 0..n {
        r.read_exact(&mut buf).map_err(truncated)?;
        out.push(f32::from_le_bytes(buf));
    }
    Ok(out)
}

pub(crate) fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("file is truncated".into())
    } else {
        Error::Io(e)
    }
}

pub(crate) fn expect_eof<R: Read>(r: &mut R) -> Result<()> {
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => Ok(()),
        _ => Err(Error::Format("trailing bytes after payload".into())),
    }
}

pub fn read_emb1<R: Read>(mut r: R) -> Result<DataMatrix> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != EMB1_MAGIC {
        return Err(Error::Format("missing EMB1 magic".into()));
    }
    let rows = read_u32(&mut r)? as usize;
    let cols = read_u32(&mut r)? as usize;
    let n = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Format("matrix size overflows".into()))?;
    let data = read_f32s(&mut r, n)?;
    expect_eof(&mut r)?;
    DataMatrix::new(rows, cols, data)
}

pub fn write_csv<W: Write>(w: W, m: &DataMatrix) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record((0..m.cols()).map(|j| format!("f{j}")))?;
    for row in m.iter_rows() {
        out.write_record(row.iter().map(|v| v.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let cols = reader.headers()?.len();
    let mut data = Vec::new();
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != cols {
            return Err(Error::Format(format!(
                "line {} has {} fields, header has {cols}",
                i + 2,
                record.len()
            )));
        }
        for field in record.iter() {
            let v: f32 = field.trim().parse().map_err(|_| {
                Error::Format(format!("line {}: cannot parse {field:?} as a number", i + 2))
            })?;
            data.push(v);
        }
        rows += 1;
    }
    DataMatrix::new(rows, cols, data)
}

/// Reads a matrix, detecting EMB1 by its magic bytes and falling back to CSV.
pub fn read_matrix(path: &Path) -> Result<DataMatrix> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.starts_with(EMB1_MAGIC) {
        read_emb1(bytes.as_slice())
    } else {
        read_csv(bytes.as_slice())
    }
}

pub fn write_matrix<W: Write>(w: W, m: &DataMatrix, format: MatrixFormat) -> Result<()> {
    match format {
        MatrixFormat::Emb1 => write_emb1(BufWriter::new(w), m),
        MatrixFormat::Csv => write_csv(w, m),
    }
}

/// Reads a one-column CSV with a header line.
pub fn read_column<T: std::str::FromStr, R: Read>(r: R) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(BufReader::new(r));
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 1 {
            return Err(Error::Format(format!("line {}: expected one field", i + 2)));
        }
        let v = record[0].trim().parse().map_err(|_| {
            Error::Format(format!("line {}: cannot parse {:?}", i + 2, &record[0]))
        })?;
        out.push(v);
    }
    Ok(out)
}

pub fn write_column<T: std::fmt::Display, W: Write>(w: W, header: &str, values: &[T]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([header])?;
    for v in values {
        out.write_record([v.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn emb1_layout_is_exact() {
        let m = DataMatrix::from_rows(&[[1.0f32, -2.0]]).unwrap();
        let mut buf = Vec::new();
        write_emb1(&mut buf, &m).unwrap();
        let mut expected = b"EMB1".to_vec();
        expected.extend_from_slice(&[1, 0, 0, 0, 2, 0, 0, 0]);
        expected.extend_from_slice(&1.0f32.to_le_bytes());
        expected.extend_from_slice(&(-2.0f32).to_le_bytes());
        assert_eq!(buf, expected);
    }

    #[test]
    fn emb1_rejects_garbage() {
        assert!(matches!(read_emb1(&b"EMB2\0\0\0\0\0\0\0\0"[..]), Err(Error::Format(_))));
        let mut short = b"EMB1".to_vec();
        short.extend_from_slice(&[2, 0, 0, 0, 2, 0, 0, 0, 0, 0]);
        assert!(matches!(read_emb1(short.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn csv_header_and_parse_errors() {
        let m = DataMatrix::from_rows(&[[0.5f32, 1.0, 2.0], [3.0, 4.0, 5.25]]).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &m).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "f0,f1,f2\n0.5,1,2\n3,4,5.25\n");

        assert!(matches!(read_csv(&b"f0,f1\n1,x\n"[..]), Err(Error::Format(_))));
        assert!(read_csv(&b"f0,f1\n1,2,3\n"[..]).is_err());
        assert!(matches!(read_csv(&b"f0\nNaN\n"[..]), Err(Error::Format(_))));
    }

    proptest! {
        #[test]
        fn both_formats_round_trip(rows in 0usize..6, cols in 1usize..5, seed: u64) {
            let mut rng = crate::Rng::new(seed);
            let data: Vec<f32> = (0..rows * cols).map(|_| (rng.next_f64() * 200.0 - 100.0) as f32).collect();
            let m = DataMatrix::new(rows, cols, data).unwrap();
            let mut emb = Vec::new();
            write_emb1(&mut emb, &m).unwrap();
            prop_assert_eq!(read_emb1(emb.as_slice()).unwrap(), m.clone());
            let mut text = Vec::new();
            write_csv(&mut text, &m).unwrap();
            prop_assert_eq!(read_csv(text.as_slice()).unwrap(), m);
        }
    }
}
