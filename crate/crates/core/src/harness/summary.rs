use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::run::ResultRow;
use crate::error::Result;

/// Mean and standard error of one metric for one curve point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub model: String,
    pub regime: String,
    pub method: String,
    pub rho: f64,
    pub degree: Option<f64>,
    pub auc_mean: Option<f64>,
    pub auc_se: Option<f64>,
    pub auc_count: usize,
    pub tau_mean: Option<f64>,
    pub tau_se: Option<f64>,
    pub tau_count: usize,
}

/// `(mean, standard error)`; the standard error is absent below two values.
fn mean_se(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (Some(mean), Some((var / n as f64).sqrt()))
}

/// Aggregates rows per (model, regime, method, rho, degree), in first-seen
/// order of models and methods and ascending order of the grid values.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    type Key = (usize, usize, usize, u64, Option<u64>);
    let mut names: Vec<Vec<String>> = vec![Vec::new(), Vec::new(), Vec::new()];
    let mut index = |slot: usize, s: &str| -> usize {
        let list = &mut names[slot];
        list.iter().position(|x| x == s).unwrap_or_else(|| {
            list.push(s.to_owned());
            list.len() - 1
        })
    };
    // Grid values are nonnegative, so their bit patterns sort numerically.
    let mut groups: BTreeMap<Key, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for row in rows {
        let key = (
            index(0, &row.model),
            index(1, &row.regime),
            index(2, &row.method),
            row.rho.to_bits(),
            row.degree.map(f64::to_bits),
        );
        let entry = groups.entry(key).or_default();
        entry.0.extend(row.auc);
        entry.1.extend(row.kendall_tau);
    }
    groups
        .into_iter()
        .map(|((m, g, meth, rho, degree), (aucs, taus))| {
            let (auc_mean, auc_se) = mean_se(&aucs);
            let (tau_mean, tau_se) = mean_se(&taus);
            SummaryRow {
                model: names[0][m].clone(),
                regime: names[1][g].clone(),
                method: names[2][meth].clone(),
                rho: f64::from_bits(rho),
                degree: degree.map(f64::from_bits),
                auc_mean,
                auc_se,
                auc_count: aucs.len(),
                tau_mean,
                tau_se,
                tau_count: taus.len(),
            }
        })
        .collect()
}

pub fn write_summary_csv(rows: &[SummaryRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: &str, auc: f64) -> ResultRow {
        ResultRow {
            model: "sbm".into(),
            regime: "egocentric".into(),
            method: method.into(),
            rho: 0.2,
            degree: Some(60.0),
            replication: 0,
            seed: 1,
            auc: Some(auc),
            kendall_tau: None,
            selected_rank: None,
            wall_time_ms: None,
            note: None,
        }
    }

    #[test]
    fn single_row_has_no_standard_error() {
        let s = summarize(&[row("se", 0.7)]);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].auc_mean, Some(0.7));
        assert_eq!(s[0].auc_se, None);
        assert_eq!(s[0].tau_mean, None);
    }

    #[test]
    fn two_rows_closed_form() {
        let s = summarize(&[row("se", 0.6), row("se", 0.8), row("cur", 0.5)]);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].method, "se");
        assert!((s[0].auc_mean.unwrap() - 0.7).abs() < 1e-12);
        assert!((s[0].auc_se.unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(s[0].auc_count, 2);
    }
}
