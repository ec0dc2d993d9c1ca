//! Posterior means and equal-tailed 95% credible intervals.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::inference::diagnostics::{effective_sample_size, parameter_ess};
use crate::inference::draws::PosteriorDraws;
use crate::io::fmt_sig;

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
    /// `None` when there are too few draws to estimate it.
    pub ess: Option<f64>,
}

fn two_dp(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

impl ParameterSummary {
    /// `"mean (lo, hi)"` at two decimals.
    pub fn formatted(&self) -> String {
        format!("{} ({}, {})", two_dp(self.mean), two_dp(self.lo), two_dp(self.hi))
    }

    pub fn covers(&self, value: f64) -> bool {
        self.lo <= value && value <= self.hi
    }
}

/// Linear-interpolation quantile of sorted data (`h = (n - 1)p`).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Summary of one sample of values.
pub fn summarize_values(name: &str, values: &[f64]) -> Result<ParameterSummary> {
    if values.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "summaries need at least 2 draws, got {}",
            values.len()
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let ess = effective_sample_size(values).ok().map(|e| e.ess);
    Ok(ParameterSummary {
        name: name.to_string(),
        mean,
        lo: quantile(&sorted, 0.025),
        hi: quantile(&sorted, 0.975),
        ess,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub rows: Vec<ParameterSummary>,
    pub disease_names: [String; 2],
    pub covariate_names: [Vec<String>; 2],
}

impl Summary {
    pub fn get(&self, name: &str) -> Option<&ParameterSummary> {
        self.rows.iter().find(|r| r.name == name)
    }

    /// CSV `parameter,mean,lo,hi,ess` at six significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        wtr.write_record(["parameter", "mean", "lo", "hi", "ess"])?;
        for r in &self.rows {
            let ess = r.ess.map(fmt_sig).unwrap_or_default();
            wtr.write_record([r.name.clone(), fmt_sig(r.mean), fmt_sig(r.lo), fmt_sig(r.hi), ess])?;
        }
        wtr.flush().map_err(|e| Error::io("summary.csv", e))?;
        Ok(())
    }

    /// Side-by-side table of the two diseases, one `mean (lo, hi)` cell per
    /// parameter, followed by the linking parameters.
    pub fn table_text(&self) -> String {
        let cell = |name: String| self.get(&name).map(ParameterSummary::formatted).unwrap_or_default();
        let mut rows: Vec<[String; 3]> = Vec::new();
        let mut covs: Vec<&String> = self.covariate_names[0].iter().collect();
        for c in &self.covariate_names[1] {
            if !covs.contains(&c) {
                covs.push(c);
            }
        }
        for c in covs {
            rows.push([c.clone(), cell(format!("beta1_{c}")), cell(format!("beta2_{c}"))]);
        }
        rows.push(["sigma2".into(), cell("sigma2_1".into()), cell("sigma2_2".into())]);
        rows.push(["tau".into(), cell("tau1".into()), cell("tau2".into())]);
        rows.push(["rho".into(), cell("rho1".into()), cell("rho2".into())]);
        let header = [
            "parameter".to_string(),
            self.disease_names[0].clone(),
            self.disease_names[1].clone(),
        ];
        let mut widths = [0; 3];
        for r in std::iter::once(&header).chain(rows.iter()) {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        for r in std::iter::once(&header).chain(rows.iter()) {
            let line = format!(
                "{:<w0$}  {:<w1$}  {:<w2$}",
                r[0],
                r[1],
                r[2],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2]
            );
            let _ = writeln!(out, "{}", line.trim_end());
        }
        for name in ["eta0", "eta1"] {
            let _ = writeln!(out, "{name}: {}", cell(name.into()));
        }
        out
    }
}

/// Summarises every parameter (including `w`). ESS is summed over chains.
pub fn summarize(draws: &PosteriorDraws) -> Result<Summary> {
    if draws.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "summaries need at least 2 draws, got {}",
            draws.len()
        )));
    }
    let names = draws.parameter_names();
    let rows_values: Vec<Vec<f64>> = draws.draws.iter().map(|d| d.values()).collect();
    let mut rows = Vec::with_capacity(names.len());
    for (j, name) in names.iter().enumerate() {
        let col: Vec<f64> = rows_values.iter().map(|r| r[j]).collect();
        let mut s = summarize_values(name, &col)?;
        s.ess = parameter_ess(draws, name).ok().map(|e| e.ess);
        rows.push(s);
    }
    Ok(Summary {
        rows,
        disease_names: draws.meta.disease_names.clone(),
        covariate_names: draws.meta.covariate_names.clone(),
    })
}
