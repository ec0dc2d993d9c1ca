//! WAIC from posterior draws and model comparison tables.
//!
//! With `ll[s, n] = log p(y_n | θ⁽ˢ⁾)`:
//!
//! ```text
//! lppd   = Σ_n log( (1/S) Σ_s exp ll[s, n] )
//! p_WAIC = Σ_n Var_s ll[s, n]          (divisor S - 1)
//! WAIC   = -2 (lppd - p_WAIC)
//! ```
//!
//! The pointwise density conditions on the latent `w` of each draw.

use std::fmt::Write as _;
use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{Dataset, PosteriorDraws};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// `S × 2k` matrix of pointwise log-likelihoods; column `i·k + j` is
/// disease `i` in region `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseLogLik {
    values: DMatrix<f64>,
}

impl PointwiseLogLik {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "pointwise log-likelihood matrix is empty".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite pointwise log-likelihood".into()));
        }
        Ok(Self { values })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn draws(&self) -> usize {
        self.values.nrows()
    }

    pub fn points(&self) -> usize {
        self.values.ncols()
    }
}

pub fn normal_log_density(y: f64, mean: f64, variance: f64) -> f64 {
    let d = y - mean;
    -0.5 * (LN_2PI + variance.ln()) - 0.5 * d * d / variance
}

/// Evaluates `log N(y_ij; x_ijᵀβ_i + w_ij, σ_i²)` for every draw and observation.
pub fn pointwise_log_lik(draws: &PosteriorDraws, data: &Dataset) -> Result<PointwiseLogLik> {
    let k = data.k();
    if draws.meta.k() != k {
        return Err(Error::Dimension {
            expected: k,
            found: draws.meta.k(),
        });
    }
    if draws.meta.disease_names != data.disease_names {
        return Err(Error::Data(format!(
            "draws were fitted with disease order {:?}, dataset has {:?}",
            draws.meta.disease_names, data.disease_names
        )));
    }
    for i in 0..2 {
        if draws.meta.covariate_names[i].len() != data.p(i) {
            return Err(Error::Dimension {
                expected: data.p(i),
                found: draws.meta.covariate_names[i].len(),
            });
        }
    }
    let mut values = DMatrix::zeros(draws.len(), 2 * k);
    for (s, d) in draws.draws.iter().enumerate() {
        for i in 0..2 {
            let x = &data.covariates[i];
            for j in 0..k {
                let xb: f64 = x.row(j).iter().zip(&d.beta[i]).map(|(a, b)| a * b).sum();
                values[(s, i * k + j)] = normal_log_density(data.outcomes[i][j], xb + d.w[i * k + j], d.sigma2[i]);
            }
        }
    }
    PointwiseLogLik::new(values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaicReport {
    pub lppd: f64,
    pub p_waic: f64,
    pub waic: f64,
    /// Per-observation `-2(lppd_n - p_n)`; not serialised.
    #[serde(skip)]
    pub per_point: Option<Vec<f64>>,
}

impl WaicReport {
    pub fn from_parts(lppd: f64, p_waic: f64) -> Self {
        Self {
            lppd,
            p_waic,
            waic: -2.0 * (lppd - p_waic),
            per_point: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn log_mean_exp(col: impl Iterator<Item = f64> + Clone, n: usize) -> f64 {
    let max = col.clone().fold(f64::NEG_INFINITY, f64::max);
    max + (col.map(|v| (v - max).exp()).sum::<f64>() / n as f64).ln()
}

pub fn waic(ll: &PointwiseLogLik) -> Result<WaicReport> {
    let m = ll.matrix();
    let s = m.nrows();
    if s == 0 || m.ncols() == 0 {
        return Err(Error::InvalidParameter("empty log-likelihood matrix".into()));
    }
    let mut lppd = 0.0;
    let mut p_waic = 0.0;
    let mut per_point = Vec::with_capacity(m.ncols());
    for col in m.column_iter() {
        let l = log_mean_exp(col.iter().copied(), s);
        let v = if s > 1 {
            let mean = col.mean();
            col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (s - 1) as f64
        } else {
            0.0
        };
        lppd += l;
        p_waic += v;
        per_point.push(-2.0 * (l - v));
    }
    let mut report = WaicReport::from_parts(lppd, p_waic);
    report.per_point = Some(per_point);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub name: String,
    pub report: WaicReport,
    pub best: bool,
}

/// Models sorted by WAIC (ties by name), best first.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

pub fn compare(reports: &[(String, WaicReport)]) -> Result<ComparisonTable> {
    if reports.is_empty() {
        return Err(Error::InvalidParameter("nothing to compare".into()));
    }
    let mut rows: Vec<ComparisonRow> = reports
        .iter()
        .map(|(name, r)| ComparisonRow {
            name: name.clone(),
            report: r.clone(),
            best: false,
        })
        .collect();
    rows.sort_by(|a, b| {
        a.report
            .waic
            .total_cmp(&b.report.waic)
            .then_with(|| a.name.cmp(&b.name))
    });
    rows[0].best = true;
    Ok(ComparisonTable { rows })
}

impl ComparisonTable {
    /// Aligned plain text with columns `Model lppd p_WAIC WAIC`; the best
    /// row is marked with `*`.
    pub fn to_text(&self) -> String {
        let header = ["Model", "lppd", "p_WAIC", "WAIC", ""];
        let cells: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.name.clone(),
                    format!("{:.2}", r.report.lppd),
                    format!("{:.2}", r.report.p_waic),
                    format!("{:.2}", r.report.waic),
                    if r.best { "*".into() } else { String::new() },
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, row: [&str; 5]| {
            let _ = writeln!(
                out,
                "{:<w0$}  {:>w1$}  {:>w2$}  {:>w3$}  {}",
                row[0],
                row[1],
                row[2],
                row[3],
                row[4],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2],
                w3 = widths[3]
            );
        };
        line(&mut out, header);
        for r in &cells {
            line(&mut out, [&r[0], &r[1], &r[2], &r[3], &r[4]]);
        }
        out.lines().map(|l| l.trim_end().to_string() + "\n").collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        wtr.write_record(["model", "lppd", "p_waic", "waic", "best"])?;
        for r in &self.rows {
            wtr.write_record([
                r.name.clone(),
                format!("{:.2}", r.report.lppd),
                format!("{:.2}", r.report.p_waic),
                format!("{:.2}", r.report.waic),
                r.best.to_string(),
            ])?;
        }
        wtr.flush().map_err(|e| Error::io("comparison.csv", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_density_points() {
        assert!((normal_log_density(0.0, 0.0, 1.0) + 0.918_938_533_204_672_7).abs() < 1e-15);
        let v = 2.7;
        let expect = -0.5 * (2.0 * std::f64::consts::PI * v).ln();
        assert!((normal_log_density(1.3, 1.3, v) - expect).abs() < 1e-15);
    }

    #[test]
    fn single_draw_has_no_penalty() {
        let ll = PointwiseLogLik::new(DMatrix::from_row_slice(1, 3, &[-1.0, -2.0, -0.5])).unwrap();
        let r = waic(&ll).unwrap();
        assert_eq!(r.p_waic, 0.0);
        assert_eq!(r.waic, -2.0 * r.lppd);
        assert!((r.lppd + 3.5).abs() < 1e-15);
    }

    #[test]
    fn two_draw_hand_computation() {
        let ll = PointwiseLogLik::new(DMatrix::from_column_slice(2, 1, &[0.5f64.ln(), 0.25f64.ln()])).unwrap();
        let r = waic(&ll).unwrap();
        assert!((r.lppd - 0.375f64.ln()).abs() < 1e-14);
        assert!((r.lppd + 0.980_829_253_011_726).abs() < 1e-12);
        let d = 0.5f64.ln() - 0.25f64.ln();
        assert!((r.p_waic - d * d / 2.0).abs() < 1e-14);
        assert!((r.p_waic - 0.240_226_506_959_100_7).abs() < 1e-12);
        assert!((r.waic - 2.442_111_519_941_653).abs() < 1e-12);
    }

    #[test]
    fn arithmetic_anchor() {
        let r = WaicReport::from_parts(-158.25, 50.27);
        assert!((r.waic - 417.04).abs() < 1e-9);
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(PointwiseLogLik::new(DMatrix::zeros(0, 0)).is_err());
        assert!(PointwiseLogLik::new(DMatrix::from_element(2, 2, f64::NEG_INFINITY)).is_err());
    }

    #[test]
    fn json_has_three_fields() {
        let r = WaicReport::from_parts(-1.0, 0.5);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["lppd", "p_waic", "waic"]);
    }

    #[test]
    fn comparison_ordering() {
        let t = compare(&[("only".into(), WaicReport::from_parts(-1.0, 0.5))]).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(t.rows[0].best);

        let t = compare(&[
            (
                "BDAGAR (esophagus | lung)".into(),
                WaicReport::from_parts(-273.87, 44.62),
            ),
            (
                "BDAGAR (lung | esophagus)".into(),
                WaicReport::from_parts(-158.25, 50.27),
            ),
        ])
        .unwrap();
        assert_eq!(t.rows[0].name, "BDAGAR (lung | esophagus)");
        assert!(t.rows[0].best && !t.rows[1].best);
        assert_eq!(format!("{:.2}", t.rows[1].report.waic), "636.98");

        let same = WaicReport::from_parts(-2.0, 1.0);
        let t = compare(&[("b".into(), same.clone()), ("a".into(), same)]).unwrap();
        assert_eq!(t.rows[0].name, "a");
    }

    #[test]
    fn text_table_layout() {
        let t = compare(&[
            ("m2".into(), WaicReport::from_parts(-10.0, 2.0)),
            ("m1".into(), WaicReport::from_parts(-5.0, 1.0)),
        ])
        .unwrap();
        let text = t.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("Model"));
        assert!(lines[1].starts_with("m1") && lines[1].ends_with('*'));
        assert!(lines[2].starts_with("m2") && lines[2].ends_with("24.00"));
    }
}
