//! Categorical-data diagnostics over count tables: Wilson score intervals,
//! Pearson χ² tests of independence, and Cramér's V.

use std::io::Read;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::special::{chi2_log10_sf, chi2_sf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContingencyTable {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    counts: Vec<Vec<u64>>,
}

impl ContingencyTable {
    pub fn new(row_labels: Vec<String>, col_labels: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        let rows = counts.len();
        let cols = counts.first().map_or(0, Vec::len);
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidTable(format!(
                "need at least 2x2 counts, got {rows}x{cols}"
            )));
        }
        if counts.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidTable("rows have different lengths".into()));
        }
        if row_labels.len() != rows || col_labels.len() != cols {
            return Err(Error::InvalidTable("label count does not match table shape".into()));
        }
        let table = Self {
            row_labels,
            col_labels,
            counts,
        };
        if let Some(i) = table.row_totals().iter().position(|&t| t == 0) {
            return Err(Error::InvalidTable(format!("row '{}' is all zero", table.row_labels[i])));
        }
        if let Some(j) = table.col_totals().iter().position(|&t| t == 0) {
            return Err(Error::InvalidTable(format!("column '{}' is all zero", table.col_labels[j])));
        }
        Ok(table)
    }

    /// Table with labels `r0, r1, ...` and `c0, c1, ...`.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let rows = counts.len();
        let cols = counts.first().map_or(0, Vec::len);
        Self::new(
            (0..rows).map(|i| format!("r{i}")).collect(),
            (0..cols).map(|j| format!("c{j}")).collect(),
            counts,
        )
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.counts.len(), self.counts[0].len())
    }

    pub fn row_totals(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_totals(&self) -> Vec<u64> {
        let cols = self.counts.first().map_or(0, Vec::len);
        (0..cols).map(|j| self.counts.iter().map(|r| r[j]).sum()).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn transposed(&self) -> Self {
        let (rows, cols) = self.shape();
        Self {
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
            counts: (0..cols)
                .map(|j| (0..rows).map(|i| self.counts[i][j]).collect())
                .collect(),
        }
    }
}

/// Parse a table from CSV: the header holds a corner cell then the column
/// labels; each following row holds a row label then non-negative integer counts.
pub fn read_table_csv<R: Read>(reader: R) -> Result<ContingencyTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| Error::InvalidTable("empty table file".into()))??;
    let col_labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut row_labels = Vec::new();
    let mut counts = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != col_labels.len() + 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, got {}", col_labels.len() + 1, record.len()),
            });
        }
        row_labels.push(record[0].to_string());
        let row = record
            .iter()
            .skip(1)
            .map(|f| {
                f.parse::<u64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("count '{f}' is not a non-negative integer"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        counts.push(row);
    }
    ContingencyTable::new(row_labels, col_labels, counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilsonInterval {
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub confidence: f64,
}

/// Two-sided standard normal quantile for `confidence`, e.g. 1.95996 for 0.95.
pub fn normal_quantile(confidence: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + confidence / 2.0)
}

pub fn wilson_interval(successes: u64, n: u64, confidence: f64) -> Result<WilsonInterval> {
    if n == 0 {
        return Err(Error::InvalidInput("Wilson interval needs n >= 1".into()));
    }
    if successes > n {
        return Err(Error::InvalidInput(format!("successes {successes} exceed n {n}")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidInput(format!("confidence must be in (0, 1), got {confidence}")));
    }
    let z = normal_quantile(confidence);
    let nf = n as f64;
    let point = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (point + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (point * (1.0 - point) / nf + z2 / (4.0 * nf * nf)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (center - half).clamp(0.0, point) };
    let hi = if successes == n { 1.0 } else { (center + half).clamp(point, 1.0) };
    Ok(WilsonInterval {
        point,
        lo,
        hi,
        confidence,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chi2Result {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub log10_p: f64,
    pub cramers_v: f64,
    pub n: u64,
    /// Whether the Yates continuity correction was applied (only for one degree of freedom).
    pub yates_corrected: bool,
    pub expected: Vec<Vec<f64>>,
}

/// Pearson χ² test of independence. One-degree-of-freedom tables get the
/// Yates continuity correction; larger tables are uncorrected.
pub fn chi2_independence(table: &ContingencyTable) -> Chi2Result {
    let (rows, cols) = table.shape();
    chi2_with_correction(table, (rows - 1) * (cols - 1) == 1)
}

/// Pearson χ² test without any continuity correction.
pub fn chi2_independence_uncorrected(table: &ContingencyTable) -> Chi2Result {
    chi2_with_correction(table, false)
}

fn chi2_with_correction(table: &ContingencyTable, yates: bool) -> Chi2Result {
    let (rows, cols) = table.shape();
    let row_totals = table.row_totals();
    let col_totals = table.col_totals();
    let n = table.total();
    let nf = n as f64;
    let expected: Vec<Vec<f64>> = row_totals
        .iter()
        .map(|&r| col_totals.iter().map(|&c| r as f64 * c as f64 / nf).collect())
        .collect();
    let mut statistic = 0.0;
    for (obs_row, exp_row) in table.counts().iter().zip(&expected) {
        for (&obs, &exp) in obs_row.iter().zip(exp_row) {
            let mut diff = (obs as f64 - exp).abs();
            if yates {
                diff = (diff - 0.5).max(0.0);
            }
            statistic += diff * diff / exp;
        }
    }
    let dof = (rows - 1) * (cols - 1);
    let k = rows.min(cols) - 1;
    Chi2Result {
        statistic,
        dof,
        p_value: chi2_sf(statistic, dof as f64),
        log10_p: chi2_log10_sf(statistic, dof as f64),
        cramers_v: (statistic / (nf * k as f64)).sqrt(),
        n,
        yates_corrected: yates,
        expected,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Condition on the row: each cell over its row total.
    Rows,
    /// Condition on the column: each cell over its column total.
    Cols,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellProportion {
    pub count: u64,
    pub n: u64,
    pub proportion: f64,
    pub interval: WilsonInterval,
}

/// Conditional proportions along `axis`, each with a Wilson interval against
/// its marginal. The result has the table's shape.
pub fn conditional_proportions(
    table: &ContingencyTable,
    axis: Axis,
    confidence: f64,
) -> Result<Vec<Vec<CellProportion>>> {
    let row_totals = table.row_totals();
    let col_totals = table.col_totals();
    table
        .counts()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &count)| {
                    let n = match axis {
                        Axis::Rows => row_totals[i],
                        Axis::Cols => col_totals[j],
                    };
                    let interval = wilson_interval(count, n, confidence)?;
                    Ok(CellProportion {
                        count,
                        n,
                        proportion: interval.point,
                        interval,
                    })
                })
                .collect()
        })
        .collect()
}
