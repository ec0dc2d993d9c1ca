use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::io::fmt_sig;

/// A per-region posterior summary ready for mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionValue {
    pub region: String,
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Writes `region,mean,lo,hi` sorted by region id, six significant digits.
pub fn write_values_csv<W: Write>(values: &[RegionValue], out: W) -> Result<()> {
    let mut sorted: Vec<&RegionValue> = values.iter().collect();
    sorted.sort_by(|a, b| a.region.cmp(&b.region));
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    wtr.write_record(["region", "mean", "lo", "hi"])?;
    for v in sorted {
        wtr.write_record([v.region.clone(), fmt_sig(v.mean), fmt_sig(v.lo), fmt_sig(v.hi)])?;
    }
    wtr.flush().map_err(|e| Error::io("values.csv", e))?;
    Ok(())
}

pub fn export_values_csv(values: &[RegionValue], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_values_csv(values, std::io::BufWriter::new(file))
}

pub fn read_values_csv<R: Read>(input: R) -> Result<Vec<RegionValue>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != ["region", "mean", "lo", "hi"] {
        return Err(Error::Data(format!(
            "values header must be region,mean,lo,hi, got {}",
            header.join(",")
        )));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let num = |c: usize| {
            rec[c].parse::<f64>().map_err(|_| {
                Error::Data(format!(
                    "line {line}: cannot parse {:?} in column {}",
                    &rec[c], header[c]
                ))
            })
        };
        out.push(RegionValue {
            region: rec[0].to_string(),
            mean: num(1)?,
            lo: num(2)?,
            hi: num(3)?,
        });
    }
    Ok(out)
}

fn feature_id(feature: &Value, id_property: &str) -> Option<String> {
    match feature.get("properties")?.get(id_property)? {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Adds `<field>`, `<field>_lo` and `<field>_hi` to the properties of every
/// feature, matched on `properties[id_property]`. Fails if any feature is
/// missing the id, any feature id has no value, or any value has no feature.
pub fn join_geojson(values: &[RegionValue], geojson: &str, id_property: &str, field: &str) -> Result<String> {
    let mut doc: Value =
        serde_json::from_str(geojson).map_err(|e| Error::Data(format!("GeoJSON does not parse: {e}")))?;
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(Error::Data("GeoJSON top level must be a FeatureCollection".into()));
    }
    let by_id: HashMap<&str, &RegionValue> = values.iter().map(|v| (v.region.as_str(), v)).collect();
    let features = doc
        .get_mut("features")
        .and_then(Value::as_array_mut)
        .ok_or_else(|| Error::Data("GeoJSON FeatureCollection has no features array".into()))?;
    let mut seen = BTreeSet::new();
    let mut unmatched = Vec::new();
    for (n, feature) in features.iter_mut().enumerate() {
        let id = feature_id(feature, id_property)
            .ok_or_else(|| Error::Data(format!("feature {n} has no string or numeric property {id_property:?}")))?;
        let Some(v) = by_id.get(id.as_str()) else {
            unmatched.push(id);
            continue;
        };
        let props = feature["properties"].as_object_mut().expect("checked by feature_id");
        props.insert(field.to_string(), Value::from(v.mean));
        props.insert(format!("{field}_lo"), Value::from(v.lo));
        props.insert(format!("{field}_hi"), Value::from(v.hi));
        seen.insert(id);
    }
    if !unmatched.is_empty() {
        return Err(Error::Data(format!(
            "features without a value: {}",
            unmatched.join(", ")
        )));
    }
    let missing: Vec<&str> = values
        .iter()
        .map(|v| v.region.as_str())
        .filter(|r| !seen.contains(*r))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Data(format!("values without a feature: {}", missing.join(", "))));
    }
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

/// File-level wrapper around [`join_geojson`].
pub fn export_choropleth(
    values: &[RegionValue],
    geojson_in: impl AsRef<Path>,
    id_property: &str,
    field: &str,
    out: impl AsRef<Path>,
) -> Result<()> {
    let input = geojson_in.as_ref();
    let text = std::fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
    let joined = join_geojson(values, &text, id_property, field)?;
    let out = out.as_ref();
    std::fs::write(out, joined).map_err(|e| Error::io(out, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values() -> Vec<RegionValue> {
        vec![
            RegionValue {
                region: "b".into(),
                mean: 0.5,
                lo: 0.1,
                hi: 0.9,
            },
            RegionValue {
                region: "a".into(),
                mean: -1.0 / 3.0,
                lo: -0.5,
                hi: 0.0,
            },
        ]
    }

    const GEO: &str = r#"{"type": "FeatureCollection", "features": [
        {"type": "Feature", "properties": {"NAME": "a", "pop": 3}, "geometry": null},
        {"type": "Feature", "properties": {"NAME": "b"}, "geometry": {"type": "Point", "coordinates": [1, 2]}}
    ]}"#;

    #[test]
    fn csv_sorted_and_rounded() {
        let mut buf = Vec::new();
        write_values_csv(&values(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "region,mean,lo,hi\na,-0.333333,-0.500000,0\nb,0.500000,0.100000,0.900000\n"
        );
        let back = read_values_csv(text.as_bytes()).unwrap();
        assert_eq!(back[0].region, "a");
        assert_eq!(back[1].hi, 0.9);
    }

    #[test]
    fn join_adds_fields_and_keeps_the_rest() {
        let out = join_geojson(&values(), GEO, "NAME", "corr").unwrap();
        let doc: Value = serde_json::from_str(&out).unwrap();
        let f0 = &doc["features"][0]["properties"];
        assert_eq!(f0["pop"], 3);
        assert_eq!(f0["corr_lo"], -0.5);
        assert_eq!(doc["features"][1]["properties"]["corr"], 0.5);
        assert_eq!(doc["features"][1]["geometry"]["coordinates"][1], 2);
        let mut stripped = doc.clone();
        for f in stripped["features"].as_array_mut().unwrap() {
            let p = f["properties"].as_object_mut().unwrap();
            for k in ["corr", "corr_lo", "corr_hi"] {
                p.remove(k);
            }
        }
        assert_eq!(stripped, serde_json::from_str::<Value>(GEO).unwrap());
    }

    #[test]
    fn mismatches_rejected() {
        let e = join_geojson(&values()[..1], GEO, "NAME", "v").unwrap_err();
        assert!(e.to_string().contains("features without a value: a"));
        let mut extra = values();
        extra.push(RegionValue {
            region: "zz".into(),
            mean: 0.0,
            lo: 0.0,
            hi: 0.0,
        });
        assert!(join_geojson(&extra, GEO, "NAME", "v")
            .unwrap_err()
            .to_string()
            .contains("zz"));
        assert!(join_geojson(&values(), GEO, "GEOID", "v")
            .unwrap_err()
            .to_string()
            .contains("feature 0"));
        assert!(join_geojson(&values(), r#"{"type": "Feature"}"#, "NAME", "v").is_err());
    }

    #[test]
    fn numeric_ids_match() {
        let geo = r#"{"type": "FeatureCollection", "features": [{"type": "Feature", "properties": {"fips": 6001}}]}"#;
        let v = vec![RegionValue {
            region: "6001".into(),
            mean: 1.0,
            lo: 0.0,
            hi: 2.0,
        }];
        assert!(join_geojson(&v, geo, "fips", "x").is_ok());
    }
}
