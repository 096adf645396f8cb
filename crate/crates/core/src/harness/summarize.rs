//! Aggregation of experiment CSVs: medians, IQRs and least-squares slopes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::output::Table;
use crate::estimate::{ols, quantile};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnSummary {
    pub count: usize,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub iqr: f64,
}

impl ColumnSummary {
    fn of(xs: &[f64]) -> Self {
        let (q25, q75) = (quantile(xs, 0.25), quantile(xs, 0.75));
        Self {
            count: xs.len(),
            median: quantile(xs, 0.5),
            q25,
            q75,
            iqr: q75 - q25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fit {
    pub x: String,
    pub y: String,
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub files: usize,
    pub rows: usize,
    /// Numeric columns only; a column is numeric if every cell parses as a float.
    pub columns: BTreeMap<String, ColumnSummary>,
    pub fit: Option<Fit>,
}

/// Merge tables with identical headers and summarize every numeric column.
///
/// With `fit = Some((x, y))`, fit `y = intercept + slope * x` by ordinary least
/// squares over all rows where both cells are finite.
pub fn summarize_tables(tables: &[Table], fit: Option<(&str, &str)>) -> Result<Summary> {
    let first = tables
        .first()
        .ok_or_else(|| Error::Usage("nothing to summarize".into()))?;
    for (i, t) in tables.iter().enumerate().skip(1) {
        if t.header != first.header {
            return Err(Error::Schema(format!(
                "table {i} has columns {:?}, expected {:?}",
                t.header, first.header
            )));
        }
    }
    let rows: Vec<&Vec<String>> = tables.iter().flat_map(|t| &t.rows).collect();
    let numeric = |j: usize| -> Option<Vec<f64>> {
        rows.iter()
            .map(|r| r[j].trim().parse::<f64>().ok())
            .collect()
    };
    let mut columns = BTreeMap::new();
    for (j, name) in first.header.iter().enumerate() {
        if let Some(v) = numeric(j).filter(|v| !v.is_empty()) {
            let finite: Vec<f64> = v.into_iter().filter(|x| !x.is_nan()).collect();
            columns.insert(name.clone(), ColumnSummary::of(&finite));
        }
    }
    let fit = match fit {
        None => None,
        Some((x, y)) => {
            let (jx, jy) = (first.column(x)?, first.column(y)?);
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter_map(|r| {
                    let a = r[jx].trim().parse::<f64>().ok()?;
                    let b = r[jy].trim().parse::<f64>().ok()?;
                    (a.is_finite() && b.is_finite()).then_some((a, b))
                })
                .unzip();
            let (slope, intercept) = ols(&xs, &ys).ok_or_else(|| {
                Error::Usage(format!(
                    "cannot fit `{y}` on `{x}`: need two distinct x values"
                ))
            })?;
            Some(Fit {
                x: x.into(),
                y: y.into(),
                slope,
                intercept,
                points: xs.len(),
            })
        }
    };
    Ok(Summary {
        files: tables.len(),
        rows: rows.len(),
        columns,
        fit,
    })
}

pub fn summarize<P: AsRef<Path>>(paths: &[P], fit: Option<(&str, &str)>) -> Result<Summary> {
    let tables = paths
        .iter()
        .map(|p| Table::read_csv(p.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    summarize_tables(&tables, fit)
}
