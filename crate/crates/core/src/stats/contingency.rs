//! Cross-tabulation and Pearson's chi-square test of independence.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::special::chi_square_sf;
use super::StatsError;
use crate::scalar::Scalar;

/// r×c table of non-negative counts with labeled axes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    /// Items dropped because one of the two labels was missing.
    #[serde(default)]
    pub excluded: u64,
}

impl ContingencyTable {
    pub fn new(
        rows: Vec<String>,
        columns: Vec<String>,
        counts: Vec<Vec<u64>>,
    ) -> Result<Self, StatsError> {
        if counts.len() != rows.len() || counts.iter().any(|r| r.len() != columns.len()) {
            return Err(StatsError::Shape(format!(
                "counts do not match {}x{} labels",
                rows.len(),
                columns.len()
            )));
        }
        Ok(Self { rows, columns, counts, excluded: 0 })
    }

    /// Unlabeled table, convenient for tests and ad-hoc use.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self, StatsError> {
        let r = counts.len();
        let c = counts.first().map_or(0, Vec::len);
        let rows = (0..r).map(|i| format!("r{i}")).collect();
        let columns = (0..c).map(|j| format!("c{j}")).collect();
        Self::new(rows, columns, counts)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn row_totals(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_totals(&self) -> Vec<u64> {
        (0..self.n_cols()).map(|j| self.counts.iter().map(|r| r[j]).sum()).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn transpose(&self) -> Self {
        let counts = (0..self.n_cols())
            .map(|j| self.counts.iter().map(|r| r[j]).collect())
            .collect();
        Self {
            rows: self.columns.clone(),
            columns: self.rows.clone(),
            counts,
            excluded: self.excluded,
        }
    }

    /// CSV with one row per row label: the row total, then for each column
    /// the raw count and the within-row percentage.
    pub fn to_row_percent_csv(&self, row_header: &str) -> String {
        let mut out = String::new();
        out.push_str(row_header);
        out.push_str(",total");
        for c in &self.columns {
            let _ = write!(out, ",{}_n,{}_pct", csv_field(c), csv_field(c));
        }
        out.push('\n');
        for (label, row) in self.rows.iter().zip(&self.counts) {
            let total: u64 = row.iter().sum();
            let _ = write!(out, "{},{}", csv_field(label), total);
            for &v in row {
                let pct = if total == 0 { 0.0 } else { 100.0 * v as f64 / total as f64 };
                let _ = write!(out, ",{v},{pct:.4}");
            }
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Tabulate `(row, column)` label pairs. Pairs with either side missing are
/// counted in `excluded`. Axis order follows `row_order` / `column_order`
/// (labels absent from the data are dropped); labels not listed there are
/// appended in sorted order.
pub fn cross_tabulate<I>(
    pairs: I,
    row_order: &[String],
    column_order: &[String],
) -> Result<ContingencyTable, StatsError>
where
    I: IntoIterator<Item = (Option<String>, Option<String>)>,
{
    let mut cells: BTreeMap<(String, String), u64> = BTreeMap::new();
    let mut excluded = 0u64;
    for pair in pairs {
        match pair {
            (Some(r), Some(c)) => *cells.entry((r, c)).or_default() += 1,
            _ => excluded += 1,
        }
    }
    if cells.is_empty() {
        return Err(StatsError::Empty("no labeled items to tabulate"));
    }
    let present_rows: std::collections::BTreeSet<&String> = cells.keys().map(|(r, _)| r).collect();
    let present_cols: std::collections::BTreeSet<&String> = cells.keys().map(|(_, c)| c).collect();
    let rows = ordered_axis(row_order, &present_rows);
    let columns = ordered_axis(column_order, &present_cols);
    let counts = rows
        .iter()
        .map(|r| {
            columns
                .iter()
                .map(|c| cells.get(&(r.clone(), c.clone())).copied().unwrap_or(0))
                .collect()
        })
        .collect();
    Ok(ContingencyTable { rows, columns, counts, excluded })
}

fn ordered_axis(order: &[String], present: &std::collections::BTreeSet<&String>) -> Vec<String> {
    let mut axis: Vec<String> = order.iter().filter(|l| present.contains(l)).cloned().collect();
    for label in present {
        if !order.contains(label) {
            axis.push((*label).clone());
        }
    }
    axis
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChiSquareOptions {
    /// Apply Yates' continuity correction to 2×2 tables.
    pub yates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult<T> {
    pub statistic: T,
    pub df: usize,
    pub p_value: T,
    pub expected: Vec<Vec<T>>,
    /// Cells with expected count below 5.
    pub small_expected_cells: usize,
    pub yates: bool,
}

/// Pearson chi-square test of independence.
pub fn chi_square<T: Scalar>(
    table: &ContingencyTable,
    options: ChiSquareOptions,
) -> Result<ChiSquareResult<T>, StatsError> {
    let (r, c) = (table.n_rows(), table.n_cols());
    if r < 2 || c < 2 {
        return Err(StatsError::Degenerate(format!(
            "chi-square needs at least 2x2, got {r}x{c} (df = 0)"
        )));
    }
    let row_totals = table.row_totals();
    let col_totals = table.col_totals();
    if let Some(i) = row_totals.iter().position(|&t| t == 0) {
        return Err(StatsError::ZeroMarginal(format!("row {:?}", table.rows[i])));
    }
    if let Some(j) = col_totals.iter().position(|&t| t == 0) {
        return Err(StatsError::ZeroMarginal(format!("column {:?}", table.columns[j])));
    }
    let n = T::lit(table.total() as f64);
    let df = (r - 1) * (c - 1);
    let yates = options.yates && df == 1;
    let half = T::lit(0.5);

    let mut statistic = T::zero();
    let mut small = 0;
    let mut expected = Vec::with_capacity(r);
    for i in 0..r {
        let mut row = Vec::with_capacity(c);
        for j in 0..c {
            let e = T::lit(row_totals[i] as f64) * T::lit(col_totals[j] as f64) / n;
            if e < T::lit(5.0) {
                small += 1;
            }
            let mut diff = (T::lit(table.counts[i][j] as f64) - e).abs();
            if yates {
                diff = (diff - half).max(T::zero());
            }
            statistic = statistic + diff * diff / e;
            row.push(e);
        }
        expected.push(row);
    }
    if small > 0 {
        log::warn!("chi-square: {small} cell(s) with expected count < 5");
    }
    let p_value = chi_square_sf(statistic, T::from_count(df)).min(T::one()).max(T::zero());
    Ok(ChiSquareResult { statistic, df, p_value, expected, small_expected_cells: small, yates })
}
