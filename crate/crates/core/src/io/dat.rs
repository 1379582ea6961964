//! Whitespace-separated `.dat` tables. Blank lines and `#` comments are skipped.

use std::path::Path;

use crate::error::{Error, Result};

/// Non-empty rows with their 1-based line numbers.
pub fn read_rows(path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::load(path, 0, e.to_string()))?;
    Ok(parse_rows(&text))
}

pub fn parse_rows(text: &str) -> Vec<(usize, Vec<String>)> {
    text.lines()
        .enumerate()
        .filter_map(|(k, line)| {
            let line = line.split('#').next().unwrap_or("");
            let cols: Vec<String> = line.split([' ', '\t', ',']).filter(|c| !c.is_empty()).map(str::to_owned).collect();
            (!cols.is_empty()).then_some((k + 1, cols))
        })
        .collect()
}

fn index(path: &Path, line: usize, s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::load(path, line, format!("expected a site index, got {s:?}")))
}

fn real(path: &Path, line: usize, s: &str) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(Error::load(path, line, format!("expected a finite number, got {s:?}"))),
    }
}

fn check_width(path: &Path, line: usize, cols: &[String], want: usize) -> Result<()> {
    if cols.len() != want {
        return Err(Error::load(path, line, format!("expected {want} columns, found {}", cols.len())));
    }
    Ok(())
}

/// Rows `i j v1 .. vk` with site indices below `n`.
pub fn read_pair_table(path: &Path, values: usize, n: usize) -> Result<Vec<(usize, usize, Vec<f64>)>> {
    let mut out = Vec::new();
    for (line, cols) in read_rows(path)? {
        check_width(path, line, &cols, 2 + values)?;
        let i = index(path, line, &cols[0])?;
        let j = index(path, line, &cols[1])?;
        if i >= n || j >= n || i == j {
            return Err(Error::load(path, line, format!("pair ({i}, {j}) needs two distinct sites below {n}")));
        }
        let v = cols[2..].iter().map(|c| real(path, line, c)).collect::<Result<_>>()?;
        out.push((i, j, v));
    }
    Ok(out)
}

/// Rows `i value` covering each site below `n` at most once; the value is left as text.
pub fn read_site_table(path: &Path, n: usize) -> Result<Vec<(usize, usize, String)>> {
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for (line, cols) in read_rows(path)? {
        check_width(path, line, &cols, 2)?;
        let i = index(path, line, &cols[0])?;
        if i >= n {
            return Err(Error::load(path, line, format!("site {i} is out of range for {n} sites")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::load(path, line, format!("site {i} is listed twice")));
        }
        out.push((line, i, cols[1].clone()));
    }
    Ok(out)
}

/// Rows `i value` with a real value.
pub fn read_site_values(path: &Path, n: usize) -> Result<Vec<(usize, f64)>> {
    read_site_table(path, n)?.into_iter().map(|(line, i, v)| Ok((i, real(path, line, &v)?))).collect()
}
