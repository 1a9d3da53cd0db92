//! CSV datasets.
//!
//! Header: `f0,…,f{p-1}`, then either `t0,…,t{q-1}` (Euclidean targets) or
//! `angle_deg` (one circular target in degrees), then an optional `group`
//! column. Rows and columns in error messages are 1-based; the header is row 1.

use std::io::{Read, Write};
use std::path::Path;

use crate::dataset::{Dataset, Features};
use crate::error::{Error, Result};
use crate::target_space::{TargetPoint, TargetSpace};

use super::atomic_write;

struct Layout {
    p: usize,
    space: TargetSpace,
    has_group: bool,
}

fn parse_error(row: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        row,
        column,
        message: message.into(),
    }
}

fn parse_header(header: &csv::StringRecord) -> Result<Layout> {
    let cols: Vec<&str> = header.iter().map(str::trim).collect();
    let p = cols
        .iter()
        .enumerate()
        .take_while(|(i, c)| **c == format!("f{i}"))
        .count();
    if p == 0 {
        return Err(parse_error(1, 1, "missing header: expected f0,... feature columns"));
    }
    let rest = &cols[p..];
    let (space, used) = if rest.first() == Some(&"angle_deg") {
        (TargetSpace::Circular, 1)
    } else {
        let q = rest
            .iter()
            .enumerate()
            .take_while(|(i, c)| **c == format!("t{i}"))
            .count();
        if q == 0 {
            return Err(parse_error(1, p + 1, "expected target columns t0,... or angle_deg"));
        }
        (TargetSpace::Euclidean { dim: q }, q)
    };
    let tail = &rest[used..];
    let has_group = match tail {
        [] => false,
        ["group"] => true,
        _ => return Err(parse_error(1, p + used + 1, format!("unexpected column {:?}", tail[0]))),
    };
    Ok(Layout { p, space, has_group })
}

/// Reads a dataset from CSV text.
pub fn read_csv<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(h) => h?,
        None => return Err(parse_error(1, 1, "missing header")),
    };
    let layout = parse_header(&header)?;
    let width = header.len();
    let q = layout.space.dim();

    let mut features = Vec::new();
    let mut targets = Vec::new();
    let mut groups = Vec::new();
    for (i, record) in records.enumerate() {
        let record = record?;
        let row = i + 2;
        if record.len() != width {
            return Err(parse_error(
                row,
                record.len().min(width) + 1,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        let number = |c: usize| -> Result<f64> {
            let cell = record[c].trim();
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(parse_error(row, c + 1, format!("not a finite number: {cell:?}"))),
            }
        };
        for c in 0..layout.p {
            features.push(number(c)?);
        }
        let t: Vec<f64> = (layout.p..layout.p + q).map(&number).collect::<Result<_>>()?;
        targets.push(match layout.space {
            TargetSpace::Circular => TargetPoint::from_degrees(t[0]),
            TargetSpace::Euclidean { .. } => TargetPoint::euclidean(t),
        });
        if layout.has_group {
            groups.push(record[layout.p + q].trim().to_string());
        }
    }
    if targets.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = targets.len();
    let data = Dataset::new(Features::new(features, n, layout.p)?, targets, layout.space)?;
    if layout.has_group {
        data.with_groups(groups)
    } else {
        Ok(data)
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    read_csv(std::fs::File::open(path)?)
}

/// Writes a dataset as CSV. Numbers use the shortest representation that
/// parses back to the same `f64`.
pub fn write_csv<W: Write>(data: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (0..data.num_features()).map(|j| format!("f{j}")).collect();
    match data.space {
        TargetSpace::Circular => header.push("angle_deg".into()),
        TargetSpace::Euclidean { dim } => header.extend((0..dim).map(|j| format!("t{j}"))),
    }
    if data.groups.is_some() {
        header.push("group".into());
    }
    w.write_record(&header)?;

    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for i in 0..data.len() {
        row.clear();
        row.extend(data.features.row(i).iter().map(|v| v.to_string()));
        match data.space {
            TargetSpace::Circular => row.push(data.targets[i].degrees().to_string()),
            TargetSpace::Euclidean { .. } => {
                row.extend(data.targets[i].values().iter().map(|v| v.to_string()))
            }
        }
        if let Some(g) = &data.groups {
            row.push(g[i].clone());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_csv(data, &mut buf)?;
    atomic_write(path.as_ref(), &buf)
}

/// Reads only the `f0,…` columns of a CSV file; any later columns are ignored.
pub fn read_features<R: Read>(reader: R) -> Result<Features> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(h) => h?,
        None => return Err(parse_error(1, 1, "missing header")),
    };
    let p = header
        .iter()
        .enumerate()
        .take_while(|(i, c)| c.trim() == format!("f{i}"))
        .count();
    if p == 0 {
        return Err(parse_error(1, 1, "missing header: expected f0,... feature columns"));
    }
    let mut values = Vec::new();
    let mut n = 0;
    for (i, record) in records.enumerate() {
        let record = record?;
        let row = i + 2;
        if record.len() < p {
            return Err(parse_error(row, record.len() + 1, format!("expected at least {p} fields")));
        }
        for c in 0..p {
            let cell = record[c].trim();
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => return Err(parse_error(row, c + 1, format!("not a finite number: {cell:?}"))),
            }
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    Features::new(values, n, p)
}

pub fn load_features(path: impl AsRef<Path>) -> Result<Features> {
    read_features(std::fs::File::open(path)?)
}

/// Writes predictions with the target columns of `space` (`t0,…` or `angle_deg`).
pub fn write_predictions<W: Write>(space: TargetSpace, preds: &[TargetPoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    match space {
        TargetSpace::Circular => w.write_record(["angle_deg"])?,
        TargetSpace::Euclidean { dim } => w.write_record((0..dim).map(|j| format!("t{j}")))?,
    }
    for p in preds {
        match space {
            TargetSpace::Circular => w.write_record([p.degrees().to_string()])?,
            TargetSpace::Euclidean { .. } => w.write_record(p.values().iter().map(|v| v.to_string()))?,
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_predictions(space: TargetSpace, preds: &[TargetPoint], path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_predictions(space, preds, &mut buf)?;
    atomic_write(path.as_ref(), &buf)
}
