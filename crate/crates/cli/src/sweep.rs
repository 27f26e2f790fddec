//! Parameter sweeps: a Cartesian product of up to two axes over a base
//! config, one RunRecord row per point, emitted as RFC-4180 CSV.

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde_json::Value;

use crate::experiments::run_named;
use crate::record::RunRecord;

#[derive(Debug, Clone)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<f64>,
}

/// `key=start:stop:count` (inclusive linspace) or `key=v1,v2,...`.
pub fn parse_axis(spec: &str) -> Result<SweepAxis> {
    let (key, rest) = spec
        .split_once('=')
        .with_context(|| format!("axis `{spec}` must be key=start:stop:count or key=v1,v2,..."))?;
    let values: Vec<f64> = if rest.contains(':') {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            bail!("axis `{spec}`: ranges are start:stop:count");
        }
        let start: f64 = parts[0].parse().context("range start")?;
        let stop: f64 = parts[1].parse().context("range stop")?;
        let count: usize = parts[2].parse().context("range count")?;
        if count == 0 {
            bail!("axis `{spec}`: empty range");
        }
        if count == 1 {
            vec![start]
        } else {
            (0..count)
                .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                .collect()
        }
    } else {
        rest.split(',')
            .map(|v| v.parse().with_context(|| format!("axis value `{v}`")))
            .collect::<Result<_>>()?
    };
    if values.is_empty() {
        bail!("axis `{spec}`: empty range");
    }
    Ok(SweepAxis {
        key: key.to_string(),
        values,
    })
}

pub struct SweepOutcome {
    pub rows: Vec<(Vec<(String, f64)>, RunRecord)>,
    pub passed: bool,
}

/// Run the Cartesian product of the axes; row order matches the input
/// enumeration regardless of execution order.
pub fn run_sweep(
    experiment: &str,
    base: &Value,
    axes: &[SweepAxis],
) -> Result<SweepOutcome> {
    if axes.is_empty() || axes.len() > 2 {
        bail!("sweeps take one or two --axis arguments, got {}", axes.len());
    }
    let mut points: Vec<Vec<(String, f64)>> = Vec::new();
    match axes {
        [a] => {
            for &v in &a.values {
                points.push(vec![(a.key.clone(), v)]);
            }
        }
        [a, b] => {
            for &va in &a.values {
                for &vb in &b.values {
                    points.push(vec![(a.key.clone(), va), (b.key.clone(), vb)]);
                }
            }
        }
        _ => unreachable!(),
    }
    // validate keys against the config before spawning work
    for axis in axes {
        let obj = base.as_object().context("config must be a JSON object")?;
        if !obj.contains_key(&axis.key) {
            bail!(
                "unknown sweep key `{}`; known keys: {:?}",
                axis.key,
                obj.keys().collect::<Vec<_>>()
            );
        }
    }
    let rows: Vec<Result<(Vec<(String, f64)>, RunRecord)>> = points
        .into_par_iter()
        .map(|assignment| {
            let mut cfg = base.clone();
            let obj = cfg.as_object_mut().unwrap();
            for (k, v) in &assignment {
                obj.insert(k.clone(), serde_json::json!(v));
            }
            let record = run_named(experiment, &cfg)?;
            Ok((assignment, record))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let passed = rows.iter().all(|(_, r)| r.passed);
    Ok(SweepOutcome { rows, passed })
}

/// One CSV row per sweep point: index, axis values, pass flag, duration, then
/// value/reference/error/pass per comparison (column set fixed by the first
/// row).
pub fn write_csv<W: std::io::Write>(out: W, outcome: &SweepOutcome) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let first = outcome
        .rows
        .first()
        .context("sweep produced no rows")?;
    let mut header: Vec<String> = vec!["index".into()];
    header.extend(first.0.iter().map(|(k, _)| k.clone()));
    header.push("passed".into());
    header.push("duration_seconds".into());
    for cmp in &first.1.comparisons {
        header.push(format!("{}_value", cmp.name));
        header.push(format!("{}_reference", cmp.name));
        header.push(format!("{}_abs_err", cmp.name));
        header.push(format!("{}_pass", cmp.name));
    }
    w.write_record(&header)?;
    for (idx, (assignment, record)) in outcome.rows.iter().enumerate() {
        let mut row: Vec<String> = vec![idx.to_string()];
        row.extend(assignment.iter().map(|(_, v)| format!("{v}")));
        row.push(record.passed.to_string());
        row.push(format!("{}", record.duration_seconds));
        for cmp in &record.comparisons {
            row.push(format!("{}", cmp.value));
            row.push(format!("{}", cmp.reference));
            row.push(format!("{}", cmp.abs_err));
            row.push(cmp.pass.to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        let a = parse_axis("theta=0.0:1.0:5").unwrap();
        assert_eq!(a.key, "theta");
        assert_eq!(a.values.len(), 5);
        assert!((a.values[4] - 1.0).abs() < 1e-15);
        let b = parse_axis("j=1,2,5").unwrap();
        assert_eq!(b.values, vec![1.0, 2.0, 5.0]);
        assert!(parse_axis("nope").is_err());
        assert!(parse_axis("x=0:1:0").is_err());
    }
}
