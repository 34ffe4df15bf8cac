//! Tidy plot-data bundle: `fig1_fps.csv`, `fig1_random.csv`, `fig2.csv`.

use std::path::Path;

use crate::{data_err, open, write_atomic, CliError, CliResult};

pub const BATCH_TOKENS: [&str; 3] = ["unselected", "first_quarter", "last_quarter"];

struct CurveRow {
    strategy: String,
    fraction: f64,
    mae: f64,
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> CliResult<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| data_err(path, format!("missing `{name}` column")))
}

fn parse<T: std::str::FromStr>(field: &str, path: &Path, line: usize) -> CliResult<T> {
    field
        .trim()
        .parse()
        .map_err(|_| data_err(path, format!("line {line}: cannot parse {field:?}")))
}

fn read_curve(path: &Path) -> CliResult<Vec<CurveRow>> {
    let mut reader = csv::Reader::from_reader(open(path)?);
    let headers = reader.headers().map_err(|e| data_err(path, e))?.clone();
    let (s, f, m) = (
        column(&headers, "strategy", path)?,
        column(&headers, "fraction", path)?,
        column(&headers, "mae", path)?,
    );
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| data_err(path, e))?;
        let row = CurveRow {
            strategy: record[s].to_string(),
            fraction: parse(&record[f], path, i + 2)?,
            mae: parse(&record[m], path, i + 2)?,
        };
        if !(row.fraction.is_finite() && row.mae.is_finite()) {
            return Err(data_err(path, format!("line {}: non-finite value", i + 2)));
        }
        rows.push(row);
    }
    rows.sort_by(|a, b| {
        a.strategy
            .cmp(&b.strategy)
            .then(a.fraction.total_cmp(&b.fraction))
    });
    Ok(rows)
}

/// `(pc1, pc2, batch token)` per dataset row.
fn read_projection(path: &Path) -> CliResult<Vec<(f32, f32, &'static str)>> {
    let mut reader = csv::Reader::from_reader(open(path)?);
    let headers = reader.headers().map_err(|e| data_err(path, e))?.clone();
    let (p1, p2, b) = (
        column(&headers, "pc1", path)?,
        column(&headers, "pc2", path)?,
        column(&headers, "selected_batch", path)?,
    );
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| data_err(path, e))?;
        let batch: u8 = parse(&record[b], path, i + 2)?;
        let token = match batch {
            0 | 2 | 3 => BATCH_TOKENS[0],
            1 => BATCH_TOKENS[1],
            4 => BATCH_TOKENS[2],
            other => return Err(data_err(path, format!("line {}: batch {other} not in 0..=4", i + 2))),
        };
        let x: f32 = parse(&record[p1], path, i + 2)?;
        let y: f32 = parse(&record[p2], path, i + 2)?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(data_err(path, format!("line {}: non-finite value", i + 2)));
        }
        rows.push((x, y, token));
    }
    Ok(rows)
}

/// Parses every input before writing anything.
pub(crate) fn write_bundle(curve: &Path, fps: &Path, random: &Path, out_dir: &Path) -> CliResult<()> {
    let curve_rows = read_curve(curve)?;
    let fps_rows = read_projection(fps)?;
    let random_rows = read_projection(random)?;
    if fps_rows.len() != random_rows.len() {
        return Err(CliError::Data(format!(
            "projection files disagree on row count ({} vs {})",
            fps_rows.len(),
            random_rows.len()
        )));
    }
    for (name, rows) in [("fig1_fps.csv", &fps_rows), ("fig1_random.csv", &random_rows)] {
        write_atomic(&out_dir.join(name), |w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["pc1", "pc2", "batch"])?;
            for (x, y, token) in rows {
                out.write_record([x.to_string(), y.to_string(), token.to_string()])?;
            }
            out.flush()?;
            Ok(())
        })?;
    }
    write_atomic(&out_dir.join("fig2.csv"), |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["strategy", "fraction", "mae"])?;
        for r in &curve_rows {
            out.write_record([r.strategy.clone(), r.fraction.to_string(), r.mae.to_string()])?;
        }
        out.flush()?;
        Ok(())
    })
}
