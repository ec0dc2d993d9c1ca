use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::OrderedRegionGraph;
use crate::inference::Dataset;
use crate::io::config::{RunConfig, Transform};

/// Reads a dataset CSV and graph file, applying the configured vertex order,
/// disease order, covariate selection and outcome transform.
pub fn load_dataset(data: impl AsRef<Path>, graph: impl AsRef<Path>, config: &RunConfig) -> Result<Dataset> {
    let graph = OrderedRegionGraph::from_file(graph)?;
    let path = data.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_dataset_from(file, &graph, config)
}

/// Like [`load_dataset`] with the graph already in memory.
///
/// The CSV needs a `region` column and one `y_<disease>` column per disease;
/// every other column is a candidate covariate. An intercept is prepended to
/// each design matrix.
pub fn load_dataset_from<R: Read>(input: R, graph: &OrderedRegionGraph, config: &RunConfig) -> Result<Dataset> {
    let graph = match &config.vertex_order {
        Some(order) => graph.reorder(order)?,
        None => graph.clone(),
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut columns: HashMap<&str, usize> = HashMap::new();
    for (c, name) in header.iter().enumerate() {
        if columns.insert(name, c).is_some() {
            return Err(Error::Data(format!("header: duplicate column {name:?}")));
        }
    }
    let region_col = *columns
        .get("region")
        .ok_or_else(|| Error::Data("header: no \"region\" column".into()))?;
    let outcome_names: Vec<&str> = header.iter().filter_map(|h| h.strip_prefix("y_")).collect();

    let diseases: [String; 2] = match &config.disease_order {
        Some([a, b]) => {
            for d in [a, b] {
                if !columns.contains_key(format!("y_{d}").as_str()) {
                    return Err(Error::Data(format!("header: no outcome column \"y_{d}\"")));
                }
            }
            [a.clone(), b.clone()]
        }
        None if outcome_names.len() == 2 => [outcome_names[0].to_string(), outcome_names[1].to_string()],
        None => {
            return Err(Error::Data(format!(
                "header: expected exactly two y_<disease> columns, found {}; set disease_order",
                outcome_names.len()
            )))
        }
    };
    for name in config.covariates.keys() {
        if !diseases.contains(name) {
            return Err(Error::Config(format!("covariates given for unknown disease {name:?}")));
        }
    }

    let free: Vec<&str> = header
        .iter()
        .map(String::as_str)
        .filter(|h| *h != "region" && !h.starts_with("y_"))
        .collect();
    let any_prefixed = free
        .iter()
        .any(|c| diseases.iter().any(|d| c.starts_with(&format!("{d}_"))));
    let mut selected: [Vec<String>; 2] = Default::default();
    for (i, d) in diseases.iter().enumerate() {
        selected[i] = match config.covariates.get(d) {
            Some(cols) => {
                for c in cols {
                    if !free.contains(&c.as_str()) {
                        return Err(Error::Data(format!("unknown covariate column {c:?} for {d}")));
                    }
                }
                cols.clone()
            }
            None => {
                let prefix = format!("{d}_");
                free.iter()
                    .filter(|c| !any_prefixed || c.starts_with(&prefix))
                    .map(|c| c.to_string())
                    .collect()
            }
        };
    }

    let k = graph.len();
    let mut rows: Vec<Option<Vec<f64>>> = vec![None; k];
    let numeric_cols: Vec<usize> = (0..header.len()).filter(|&c| c != region_col).collect();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(n as u64 + 2);
        let region = rec.get(region_col).unwrap_or("");
        let Some(r) = graph.index_of(region) else {
            return Err(Error::Data(format!(
                "line {line}: region {region:?} is not in the graph"
            )));
        };
        if rows[r].is_some() {
            return Err(Error::Data(format!("line {line}: duplicate region {region:?}")));
        }
        let mut values = vec![f64::NAN; header.len()];
        for &c in &numeric_cols {
            let field = rec.get(c).unwrap_or("");
            if field.is_empty() || field.eq_ignore_ascii_case("na") {
                return Err(Error::Data(format!(
                    "line {line}: missing value in column {:?}",
                    header[c]
                )));
            }
            values[c] = field.parse().map_err(|_| {
                Error::Data(format!(
                    "line {line}: column {:?}: cannot parse {field:?} as a number",
                    header[c]
                ))
            })?;
        }
        rows[r] = Some(values);
    }
    if let Some(r) = rows.iter().position(Option::is_none) {
        return Err(Error::Data(format!(
            "region {:?} has no data row",
            graph.region_ids()[r]
        )));
    }
    let rows: Vec<Vec<f64>> = rows.into_iter().map(Option::unwrap).collect();

    let mut outcomes: [DVector<f64>; 2] = Default::default();
    let mut covariates: [DMatrix<f64>; 2] = Default::default();
    let mut covariate_names: [Vec<String>; 2] = Default::default();
    for i in 0..2 {
        let yc = columns[format!("y_{}", diseases[i]).as_str()];
        let mut y = DVector::from_iterator(k, rows.iter().map(|row| row[yc]));
        if config.transform == Transform::Log {
            if let Some(j) = y.iter().position(|v| *v <= 0.0) {
                return Err(Error::Data(format!(
                    "log transform of non-positive y_{} in region {:?}",
                    diseases[i],
                    graph.region_ids()[j]
                )));
            }
            y.apply(|v| *v = v.ln());
        }
        outcomes[i] = y;
        let cols: Vec<usize> = selected[i].iter().map(|c| columns[c.as_str()]).collect();
        covariates[i] = DMatrix::from_fn(
            k,
            cols.len() + 1,
            |r, c| if c == 0 { 1.0 } else { rows[r][cols[c - 1]] },
        );
        covariate_names[i] = std::iter::once("intercept".to_string())
            .chain(selected[i].iter().cloned())
            .collect();
    }
    Dataset::new(graph, diseases, outcomes, covariates, covariate_names)
}

/// Writes `region,y_<d1>,y_<d2>,<covariates>` in region index order with
/// full-precision floats. Covariates shared by name across diseases are
/// written once.
pub fn write_dataset_csv<W: Write>(data: &Dataset, out: W) -> Result<()> {
    let mut names: Vec<(&str, usize, usize)> = Vec::new();
    for i in 0..2 {
        for (c, name) in data.covariate_names[i].iter().enumerate().skip(1) {
            match names.iter().find(|(n, _, _)| n == name) {
                Some(&(_, i0, c0)) => {
                    if data.covariates[i].column(c) != data.covariates[i0].column(c0) {
                        return Err(Error::Data(format!("covariate {name:?} differs between diseases")));
                    }
                }
                None => names.push((name, i, c)),
            }
        }
    }
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header = vec![
        "region".to_string(),
        format!("y_{}", data.disease_names[0]),
        format!("y_{}", data.disease_names[1]),
    ];
    header.extend(names.iter().map(|(n, _, _)| n.to_string()));
    wtr.write_record(&header)?;
    for (r, id) in data.graph.region_ids().iter().enumerate() {
        let mut row = vec![
            id.clone(),
            data.outcomes[0][r].to_string(),
            data.outcomes[1][r].to_string(),
        ];
        row.extend(names.iter().map(|&(_, i, c)| data.covariates[i][(r, c)].to_string()));
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|e| Error::io("dataset.csv", e))?;
    Ok(())
}
