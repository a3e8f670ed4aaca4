use super::rate::{PerN, RateRow, RateRun, RateRunConfig};
use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Serialize, Deserialize)]
struct FitJson {
    slope: f64,
    intercept: f64,
    r2: f64,
}

#[derive(Serialize)]
struct RateJson<'a> {
    config: &'a RateRunConfig,
    per_n: &'a [PerN],
    fit: FitJson,
}

/// Rate tables: CSV `rep,n,delta,hyperplanes,rounds,overflow` sorted by
/// `(rep, n)`, or the JSON summary `{config, per_n, fit}`.
pub fn persist(run: &RateRun, path: &Path, format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            let mut rows: Vec<&RateRow> = run.rows.iter().collect();
            rows.sort_by_key(|r| (r.rep, r.n));
            let mut w = csv::Writer::from_path(path)?;
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let doc = RateJson {
                config: &run.config,
                per_n: &run.per_n,
                fit: FitJson { slope: run.fit.slope, intercept: run.fit.intercept, r2: run.fit.r_squared },
            };
            write_json(&doc, path)?;
        }
    }
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Serializable rows as CSV (header from field names).
pub fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rate_csv(path: &Path) -> Result<Vec<RateRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<RateRow>, _>>()?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::WindowPolicy;
    use crate::direction::DirectionalDistribution;
    use crate::experiment::run_rate;
    use crate::geom::Body;

    fn run() -> RateRun {
        run_rate(&RateRunConfig {
            body: Body::ball(vec![0.0, 0.0], 1.0).unwrap(),
            distribution: DirectionalDistribution::isotropic(2).unwrap(),
            n_grid: vec![8, 32, 128],
            reps: 5,
            seed: 99,
            expected_exponent: Some(2.0 / 3.0),
            policy: WindowPolicy::default(),
        })
        .unwrap()
    }

    #[test]
    fn csv_round_trip_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rate.csv");
        let r = run();
        persist(&r, &p, Format::Csv).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().next().unwrap(), "rep,n,delta,hyperplanes,rounds,overflow");
        assert_eq!(read_rate_csv(&p).unwrap(), r.rows);
    }

    #[test]
    fn json_has_config_and_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
        persist(&run(), &a, Format::Json).unwrap();
        persist(&run(), &b, Format::Json).unwrap();
        let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        assert_eq!(ta, tb);
        let v: serde_json::Value = serde_json::from_slice(&ta).unwrap();
        assert_eq!(v["config"]["seed"], 99);
        assert_eq!(v["per_n"].as_array().unwrap().len(), 3);
        assert!(v["fit"]["r2"].is_number());
    }
}
