//! Path files.
//!
//! CSV: a header row, then one point per row. Coordinate columns are named
//! `c0..c{D-1}`, optionally followed by `label` (classification points) or
//! `target` (regression points); symbol paths use a single `symbol` column.
//! Reals are written with 17 significant digits so they parse back exactly.
//!
//! Binary: a 16-byte header (`b"GPTH"`, `n` as u64 LE, `D` as u32 LE),
//! then `n·D` little-endian f64 values row by row. Only coordinate paths
//! have a binary form.

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::geometry::{Point, PointKind, SamplePath};

pub const BIN_MAGIC: [u8; 4] = *b"GPTH";

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `path` as CSV.
pub fn write_csv<W: Write>(path: &SamplePath, mut out: W) -> Result<()> {
    let kind = path.kind();
    let coord_header = |d: usize| (0..d).map(|i| format!("c{i}")).collect::<Vec<_>>();
    let header = match kind {
        PointKind::Symbol => vec!["symbol".to_string()],
        PointKind::Coords(d) => coord_header(d),
        PointKind::Labeled(d) => {
            let mut h = coord_header(d);
            h.push("label".into());
            h
        }
        PointKind::Paired(d) => {
            let mut h = coord_header(d);
            h.push("target".into());
            h
        }
    };
    writeln!(out, "{}", header.join(","))?;
    for p in path.points() {
        let row: Vec<String> = match p {
            Point::Symbol(s) => vec![s.to_string()],
            Point::Coords(c) => c.iter().map(|&v| real(v)).collect(),
            Point::Labeled { coords, label } => {
                let mut r: Vec<String> = coords.iter().map(|&v| real(v)).collect();
                r.push(label.to_string());
                r
            }
            Point::Paired { coords, target } => {
                let mut r: Vec<String> = coords.iter().map(|&v| real(v)).collect();
                r.push(real(*target));
                r
            }
        };
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Reads a CSV path written by [`write_csv`] (or any file in the same dialect).
pub fn read_csv<R: BufRead>(input: R) -> Result<SamplePath> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty CSV file".into()))??;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    enum Layout {
        Symbol,
        Coords(usize),
        Labeled(usize),
        Paired(usize),
    }
    let layout = if cols == ["symbol"] {
        Layout::Symbol
    } else {
        let (coord_cols, extra) = match cols.last() {
            Some(&"label") => (&cols[..cols.len() - 1], Some("label")),
            Some(&"target") => (&cols[..cols.len() - 1], Some("target")),
            _ => (&cols[..], None),
        };
        for (i, c) in coord_cols.iter().enumerate() {
            if *c != format!("c{i}") {
                return Err(Error::Format(format!("unexpected header column `{c}` at position {i}")));
            }
        }
        let d = coord_cols.len();
        if d == 0 {
            return Err(Error::Format("no coordinate columns".into()));
        }
        match extra {
            Some("label") => Layout::Labeled(d),
            Some(_) => Layout::Paired(d),
            None => Layout::Coords(d),
        }
    };
    let parse_real = |s: &str, line: usize| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Format(format!("line {line}: cannot parse `{s}` as a real")))
    };
    let mut points = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let lineno = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::Format(format!(
                "line {lineno}: expected {} fields, got {}",
                cols.len(),
                fields.len()
            )));
        }
        let coords = |d: usize| -> Result<Vec<f64>> { fields[..d].iter().map(|f| parse_real(f, lineno)).collect() };
        let point = match layout {
            Layout::Symbol => Point::Symbol(
                fields[0]
                    .trim()
                    .parse()
                    .map_err(|_| Error::Format(format!("line {lineno}: bad symbol `{}`", fields[0])))?,
            ),
            Layout::Coords(d) => Point::Coords(coords(d)?),
            Layout::Labeled(d) => Point::Labeled {
                coords: coords(d)?,
                label: fields[d]
                    .trim()
                    .parse()
                    .map_err(|_| Error::Format(format!("line {lineno}: bad label `{}`", fields[d])))?,
            },
            Layout::Paired(d) => Point::Paired {
                coords: coords(d)?,
                target: parse_real(fields[d], lineno)?,
            },
        };
        points.push(point);
    }
    SamplePath::new(points)
}

/// Writes a coordinate path in the binary format.
pub fn write_bin<W: Write>(path: &SamplePath, mut out: W) -> Result<()> {
    let PointKind::Coords(d) = path.kind() else {
        return Err(Error::Format("binary paths hold plain coordinates only".into()));
    };
    out.write_all(&BIN_MAGIC)?;
    out.write_all(&(path.len() as u64).to_le_bytes())?;
    out.write_all(&(d as u32).to_le_bytes())?;
    for p in path.points() {
        for v in p.coord_slice().unwrap_or(&[]) {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_bin<R: Read>(mut input: R) -> Result<SamplePath> {
    let mut header = [0u8; 16];
    input
        .read_exact(&mut header)
        .map_err(|_| Error::Format("truncated binary header".into()))?;
    if header[..4] != BIN_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let n = u64::from_le_bytes(header[4..12].try_into().expect("8 bytes")) as usize;
    let d = u32::from_le_bytes(header[12..16].try_into().expect("4 bytes")) as usize;
    if d == 0 {
        return Err(Error::Format("dimension 0".into()));
    }
    let mut buf = [0u8; 8];
    let mut points = Vec::with_capacity(n);
    for row in 0..n {
        let mut c = Vec::with_capacity(d);
        for _ in 0..d {
            input
                .read_exact(&mut buf)
                .map_err(|_| Error::Format(format!("truncated payload at row {row}")))?;
            c.push(f64::from_le_bytes(buf));
        }
        points.push(Point::Coords(c));
    }
    let mut rest = Vec::new();
    input.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Format(format!("{} trailing bytes", rest.len())));
    }
    SamplePath::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layouts() {
        let text = "c0\n0\n1\n0.5\n0.25\n";
        let path = read_csv(text.as_bytes()).unwrap();
        assert_eq!(path, SamplePath::from_scalars(&[0.0, 1.0, 0.5, 0.25]).unwrap());

        let labeled = SamplePath::new(vec![
            Point::Labeled { coords: vec![0.1, 0.2], label: -1 },
            Point::Labeled { coords: vec![0.3, 0.4], label: 1 },
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&labeled, &mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("c0,c1,label\n"));
        assert_eq!(read_csv(&buf[..]).unwrap(), labeled);

        let syms = SamplePath::from_symbols(&[3, 1, 4]).unwrap();
        let mut buf = Vec::new();
        write_csv(&syms, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "symbol\n3\n1\n4\n");
        assert_eq!(read_csv(&buf[..]).unwrap(), syms);
    }

    #[test]
    fn csv_errors() {
        assert!(read_csv("".as_bytes()).is_err());
        assert!(read_csv("x,y\n1,2\n".as_bytes()).is_err());
        assert!(read_csv("c0,c1\n1\n".as_bytes()).is_err());
        assert!(read_csv("c0\nabc\n".as_bytes()).is_err());
    }

    #[test]
    fn binary_header_layout() {
        let path = SamplePath::new(vec![Point::Coords(vec![1.0, -2.0]), Point::Coords(vec![0.5, 0.25])]).unwrap();
        let mut buf = Vec::new();
        write_bin(&path, &mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 4 * 8);
        assert_eq!(&buf[..4], b"GPTH");
        assert_eq!(u64::from_le_bytes(buf[4..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(buf[12..16].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 1.0);
        assert_eq!(read_bin(&buf[..]).unwrap(), path);
        assert!(read_bin(&buf[..20]).is_err());
        assert!(write_bin(&SamplePath::from_symbols(&[1]).unwrap(), Vec::new()).is_err());
    }
}
