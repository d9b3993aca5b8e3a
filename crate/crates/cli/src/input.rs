//! CSV ingestion.
//!
//! Observation files have a header whose first column is `group`, followed
//! by one numeric column per coordinate (or per grid point for curves). Group
//! labels are mapped to indices in order of first appearance.

use std::io::Read;
use std::path::Path;

use hdmanova::data::PairSet;
use nalgebra::DMatrix;

use crate::error::CliError;

/// Rows of a grouped CSV file, grouped by label.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedTable {
    pub labels: Vec<String>,
    pub columns: Vec<String>,
    pub groups: Vec<DMatrix<f64>>,
}

impl GroupedTable {
    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(DMatrix::nrows).collect()
    }
}

pub fn read_grouped_csv_path(path: &Path) -> Result<GroupedTable, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    read_grouped_csv(file)
}

pub fn read_grouped_csv<R: Read>(reader: R) -> Result<GroupedTable, CliError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("group") {
        return Err(CliError::Input("first CSV column must be named `group`".into()));
    }
    let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if columns.is_empty() {
        return Err(CliError::Input("CSV has no numeric columns".into()));
    }
    let mut labels: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<Vec<f64>>> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        // header is line 1
        let line = line + 2;
        if rec.len() != columns.len() + 1 {
            return Err(CliError::Input(format!(
                "line {line}: expected {} fields, found {}",
                columns.len() + 1,
                rec.len()
            )));
        }
        let label = rec[0].to_string();
        let values = rec
            .iter()
            .skip(1)
            .enumerate()
            .map(|(c, v)| {
                v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| {
                    CliError::Input(format!("line {line}, column `{}`: `{v}` is not a finite number", columns[c]))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let idx = match labels.iter().position(|l| *l == label) {
            Some(i) => i,
            None => {
                labels.push(label);
                rows.push(Vec::new());
                labels.len() - 1
            }
        };
        rows[idx].push(values);
    }
    let p = columns.len();
    let groups = rows
        .iter()
        .map(|r| DMatrix::from_fn(r.len(), p, |i, j| r[i][j]))
        .collect();
    Ok(GroupedTable { labels, columns, groups })
}

/// Grid values separated by commas, whitespace or newlines.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Input(format!("grid value `{s}` is not a number")))
        })
        .collect()
}

/// `all` or a comma-separated list of 1-based `k-l` pairs.
pub fn parse_pairs(spec: &str, num_groups: usize) -> Result<PairSet, CliError> {
    let spec = spec.trim();
    if spec.eq_ignore_ascii_case("all") {
        return Ok(PairSet::all(num_groups));
    }
    let mut pairs = Vec::new();
    for item in spec.split(',') {
        let (a, b) = item
            .trim()
            .split_once('-')
            .ok_or_else(|| CliError::Input(format!("pair `{item}` is not of the form k-l")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .ok()
                .filter(|&v| v >= 1)
                .ok_or_else(|| CliError::Input(format!("`{s}` is not a group index (1-based)")))
        };
        pairs.push((parse(a)? - 1, parse(b)? - 1));
    }
    Ok(PairSet::new(pairs, num_groups)?)
}

/// Comma-separated list of reals.
pub fn parse_list(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("`{s}` is not a number")))
        })
        .collect()
}
