//! Plain CSV tables with a `# key = value` preamble.
//!
//! Numbers are written in the shortest form that parses back to the same
//! `f64`, so a write/read cycle is lossless.

use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};
use crate::gamma::GammaTrajectory;
use crate::udist::{UDensity, UGrid};

/// Ordered `key = value` pairs written above a table.
pub type Header = Vec<(String, String)>;

/// Value of the last entry named `key`; later entries override earlier ones.
pub fn header_value<'a>(header: &'a Header, key: &str) -> Option<&'a str> {
    header
        .iter()
        .rev()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
}

/// Shortest round-trip decimal, in scientific notation outside
/// `[1e-4, 1e15)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn write_header<W: Write>(w: &mut W, header: &Header) -> Result<()> {
    for (k, v) in header {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

/// Writes `header`, a column line and numeric rows.
pub fn write_table<W: Write>(
    mut w: W,
    header: &Header,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<()> {
    write_header(&mut w, header)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(columns).map_err(csv_error)?;
    for row in rows {
        if row.len() != columns.len() {
            return Err(Error::domain(format!(
                "row of {} values for {} columns",
                row.len(),
                columns.len()
            )));
        }
        out.write_record(row.iter().map(|v| fmt_f64(*v)))
            .map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::parse(0, format!("{other:?}")),
    }
}

/// A table read back: preamble, column names and rows, each row tagged with
/// its 1-based line number.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Header,
    pub columns: Vec<String>,
    pub rows: Vec<(usize, Vec<f64>)>,
}

pub fn read_table<R: Read>(r: R) -> Result<Table> {
    let mut header = Header::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (idx, line) in BufReader::new(r).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::parse(lineno, "not valid UTF-8"),
            _ => Error::Io(e),
        })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if columns.is_none() {
                if let Some((k, v)) = rest.split_once('=') {
                    header.push((k.trim().to_string(), v.trim().to_string()));
                }
            }
            continue;
        }
        let mut rec = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(line.as_bytes());
        let record = rec
            .records()
            .next()
            .transpose()
            .map_err(|e| Error::parse(lineno, e.to_string()))?
            .ok_or_else(|| Error::parse(lineno, "empty record"))?;
        match &columns {
            None => columns = Some(record.iter().map(|c| c.trim().to_string()).collect()),
            Some(cols) => {
                if record.len() != cols.len() {
                    return Err(Error::parse(
                        lineno,
                        format!("{} fields, expected {}", record.len(), cols.len()),
                    ));
                }
                let row = record
                    .iter()
                    .map(|f| {
                        f.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::parse(lineno, format!("`{f}` is not a number")))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                rows.push((lineno, row));
            }
        }
    }
    let columns = columns.ok_or_else(|| Error::parse(0, "no column line"))?;
    Ok(Table {
        header,
        columns,
        rows,
    })
}

fn expect_columns(table: &Table, names: &[&str]) -> Result<()> {
    if table
        .columns
        .iter()
        .map(String::as_str)
        .ne(names.iter().copied())
    {
        return Err(Error::parse(
            0,
            format!("columns {:?}, expected {names:?}", table.columns),
        ));
    }
    if table.rows.is_empty() {
        return Err(Error::parse(0, "table has no rows"));
    }
    Ok(())
}

pub fn write_density<W: Write>(w: W, p: &UDensity, header: &Header) -> Result<()> {
    let grid = p.grid();
    let mut full = header.clone();
    full.push(("h".into(), fmt_f64(grid.h())));
    full.push(("n_bins".into(), grid.n_bins().to_string()));
    let rows = grid
        .nodes()
        .zip(p.values())
        .map(|(u, v)| vec![u, *v])
        .collect::<Vec<_>>();
    write_table(w, &full, &["u", "p"], rows)
}

/// Reads a `u,p` table on a uniform grid starting at 0. The spacing comes
/// from an `h` header entry when present, else from the last node.
pub fn read_density<R: Read>(r: R) -> Result<(UDensity, Header)> {
    let table = read_table(r)?;
    expect_columns(&table, &["u", "p"])?;
    let n = table.rows.len() - 1;
    if n == 0 {
        return Err(Error::parse(
            table.rows[0].0,
            "a density needs at least two nodes",
        ));
    }
    let h = match header_value(&table.header, "h") {
        Some(v) => v
            .parse::<f64>()
            .map_err(|_| Error::parse(0, format!("header h = `{v}` is not a number")))?,
        None => table.rows[n].1[0] / n as f64,
    };
    let grid = UGrid::with_bins(n, h).map_err(|e| Error::parse(0, e.to_string()))?;
    let mut values = Vec::with_capacity(n + 1);
    for (i, (line, row)) in table.rows.iter().enumerate() {
        let expect = grid.node(i);
        if !((row[0] - expect).abs() <= 1e-9 * h) {
            return Err(Error::parse(
                *line,
                format!("u = {} off the grid node {expect}", row[0]),
            ));
        }
        values.push(row[1]);
    }
    let p = UDensity::new(grid, values).map_err(|e| Error::parse(0, e.to_string()))?;
    Ok((p, table.header))
}

pub fn write_trajectory<W: Write>(w: W, g: &GammaTrajectory, header: &Header) -> Result<()> {
    let mut full = header.clone();
    full.push(("g0".into(), fmt_f64(g.g0())));
    let rows = g
        .tau_nodes()
        .iter()
        .zip(g.values())
        .map(|(t, v)| vec![*t, *v])
        .collect::<Vec<_>>();
    write_table(w, &full, &["tau", "g"], rows)
}

/// Reads a `tau,g` table. `g0` comes from the header when present, else
/// from the first row.
pub fn read_trajectory<R: Read>(r: R) -> Result<(GammaTrajectory, Header)> {
    let table = read_table(r)?;
    expect_columns(&table, &["tau", "g"])?;
    let g0 = match header_value(&table.header, "g0") {
        Some(v) => v
            .parse::<f64>()
            .map_err(|_| Error::parse(0, format!("header g0 = `{v}` is not a number")))?,
        None => table.rows[0].1[1],
    };
    let (taus, gs) = table.rows.iter().map(|(_, r)| (r[0], r[1])).unzip();
    let traj = GammaTrajectory::new(g0, taus, gs).map_err(|e| Error::parse(0, e.to_string()))?;
    Ok((traj, table.header))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::udist::InitialProfile;

    #[test]
    fn number_format_round_trips() {
        for x in [
            0.0,
            1.0,
            0.1,
            1.0 / 3.0,
            1e-300,
            -2.5e-7,
            6.02e23,
            12345.678,
        ] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(fmt_f64(0.25), "0.25");
        assert_eq!(fmt_f64(1e-6), "1e-6");
    }

    #[test]
    fn density_round_trip_is_exact() {
        let p =
            UDensity::from_profile(UGrid::new(30.0, 0.01).unwrap(), InitialProfile::UExpU).unwrap();
        let mut buf = Vec::new();
        write_density(&mut buf, &p, &vec![("run".into(), "test".into())]).unwrap();
        let (q, header) = read_density(buf.as_slice()).unwrap();
        assert_eq!(p, q);
        assert_eq!(header_value(&header, "run"), Some("test"));
        assert_eq!(p.mean().unwrap().to_bits(), q.mean().unwrap().to_bits());
    }

    #[test]
    fn trajectory_round_trip_is_exact() {
        let g = GammaTrajectory::closed(0.0025, 5.0, 0.01).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &g, &Header::new()).unwrap();
        let (back, _) = read_trajectory(buf.as_slice()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn parse_errors_carry_lines() {
        let bad = "# h = 0.5\nu,p\n0,1\n0.5,x\n";
        assert!(matches!(
            read_density(bad.as_bytes()),
            Err(Error::Parse { line: 4, .. })
        ));
        let off = "u,p\n0,1\n0.7,1\n1.0,1\n";
        assert!(matches!(
            read_density(off.as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(read_density("tau,g\n0,0\n".as_bytes()).is_err());
        assert!(read_density("u,p\n0,1\n0.5,-1\n".as_bytes()).is_err());
        assert!(read_trajectory("tau,g\n0,0.1\n0,0.2\n".as_bytes()).is_err());
        assert!(read_trajectory("tau,g\n0,0.1,3\n".as_bytes()).is_err());
        assert!(read_trajectory("".as_bytes()).is_err());
    }
}
