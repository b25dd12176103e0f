//! Search sweeps over the pool capacity `L`, their CSV form, and
//! comparison tables at a fixed recall.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::search::{batch_search, SearchGraph};
use crate::truth::GroundTruth;
use crate::vectors::VectorSet;

pub const SWEEP_SCHEMA: &str = "# schema: sweep/1";
pub const REPORT_SCHEMA: &str = "# schema: report/1";

/// One point of an `L` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "L")]
    pub l: usize,
    pub recall: f64,
    pub qps: f64,
    pub mean_hops: f64,
    pub mean_visited: f64,
}

/// Runs `batch_search` once per value in `ls`. Recall, hops and visited are
/// deterministic; QPS is the median over `reps` repetitions.
pub fn sweep<G: SearchGraph + Sync + ?Sized>(
    graph: &G,
    queries: &VectorSet,
    truth: &GroundTruth,
    k: usize,
    ls: &[usize],
    threads: usize,
    reps: usize,
) -> Result<Vec<SweepRow>> {
    if truth.k() < k {
        return Err(invalid(format!("ground truth has k={} but recall@{k} was requested", truth.k())));
    }
    let reps = reps.max(1);
    let mut rows = Vec::with_capacity(ls.len());
    for &l in ls {
        let mut qps = Vec::with_capacity(reps);
        let mut first = None;
        for _ in 0..reps {
            let r = batch_search(graph, queries, l, k, threads, Some(truth))?;
            qps.push(r.qps);
            first.get_or_insert(r);
        }
        let r = first.expect("at least one repetition");
        qps.sort_by(f64::total_cmp);
        rows.push(SweepRow {
            l,
            recall: r.mean_recall.unwrap_or(0.0),
            qps: qps[qps.len() / 2],
            mean_hops: r.mean_hops,
            mean_visited: r.mean_visited,
        });
    }
    Ok(rows)
}

/// Linear interpolation of `value` at the point where recall first reaches
/// `target`, walking rows in increasing `L`. `None` if it is never reached.
pub fn at_recall(rows: &[SweepRow], target: f64, value: impl Fn(&SweepRow) -> f64) -> Option<f64> {
    let mut sorted = rows.to_vec();
    sorted.sort_by_key(|r| r.l);
    let i = sorted.iter().position(|r| r.recall >= target)?;
    if i == 0 {
        return Some(value(&sorted[0]));
    }
    let (a, b) = (&sorted[i - 1], &sorted[i]);
    let t = if b.recall > a.recall {
        (target - a.recall) / (b.recall - a.recall)
    } else {
        1.0
    };
    Some(value(a) + t * (value(b) - value(a)))
}

pub fn write_sweep_csv(w: impl Write, rows: &[SweepRow]) -> Result<()> {
    write_csv(w, SWEEP_SCHEMA, rows)
}

pub fn read_sweep_csv(r: impl Read) -> Result<Vec<SweepRow>> {
    read_csv(r, SWEEP_SCHEMA)
}

/// One line of a comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub target_recall: f64,
    /// Empty when the sweep never reaches the target.
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub qps: Option<f64>,
    pub mean_hops: Option<f64>,
    pub mean_visited: Option<f64>,
}

/// Interpolates every labelled sweep at every target recall.
pub fn report(sweeps: &[(String, Vec<SweepRow>)], targets: &[f64]) -> Vec<ReportRow> {
    let mut out = Vec::new();
    for &target in targets {
        for (label, rows) in sweeps {
            out.push(ReportRow {
                label: label.clone(),
                target_recall: target,
                l: at_recall(rows, target, |r| r.l as f64),
                qps: at_recall(rows, target, |r| r.qps),
                mean_hops: at_recall(rows, target, |r| r.mean_hops),
                mean_visited: at_recall(rows, target, |r| r.mean_visited),
            });
        }
    }
    out
}

pub fn write_report_csv(w: impl Write, rows: &[ReportRow]) -> Result<()> {
    write_csv(w, REPORT_SCHEMA, rows)
}

pub fn read_report_csv(r: impl Read) -> Result<Vec<ReportRow>> {
    read_csv(r, REPORT_SCHEMA)
}

fn write_csv<T: Serialize>(mut w: impl Write, schema: &str, rows: &[T]) -> Result<()> {
    writeln!(w, "{schema}")?;
    let mut csv = csv::Writer::from_writer(w);
    for r in rows {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(())
}

fn read_csv<T: for<'de> Deserialize<'de>>(mut r: impl Read, schema: &str) -> Result<Vec<T>> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let first = text.lines().next().unwrap_or("");
    if first.trim_end() != schema {
        return Err(invalid(format!("expected {schema:?} as the first line, found {first:?}")));
    }
    let mut csv = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in csv.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(l: usize, recall: f64, qps: f64, hops: f64) -> SweepRow {
        SweepRow {
            l,
            recall,
            qps,
            mean_hops: hops,
            mean_visited: hops * 10.0,
        }
    }

    #[test]
    fn sweep_csv_golden() {
        let rows = vec![row(10, 0.5, 1000.0, 12.0), row(20, 0.75, 600.5, 22.25)];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "# schema: sweep/1\n\
             L,recall,qps,mean_hops,mean_visited\n\
             10,0.5,1000.0,12.0,120.0\n\
             20,0.75,600.5,22.25,222.5\n"
        );
        assert_eq!(read_sweep_csv(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn schema_line_is_checked() {
        assert!(read_sweep_csv("L,recall\n1,0.5\n".as_bytes()).is_err());
        assert!(read_report_csv("# schema: sweep/1\n".as_bytes()).is_err());
    }

    #[test]
    fn interpolation() {
        let rows = vec![row(40, 0.95, 500.0, 40.0), row(10, 0.8, 1000.0, 10.0), row(20, 0.9, 800.0, 20.0)];
        let h = at_recall(&rows, 0.85, |r| r.mean_hops).unwrap();
        assert!((h - 15.0).abs() < 1e-9, "{h}");
        assert_eq!(at_recall(&rows, 0.9, |r| r.qps), Some(800.0));
        assert_eq!(at_recall(&rows, 0.5, |r| r.l as f64), Some(10.0));
        assert_eq!(at_recall(&rows, 0.99, |r| r.qps), None);
    }

    #[test]
    fn report_golden() {
        let sweeps = vec![
            ("roar".to_string(), vec![row(10, 0.8, 1000.0, 10.0), row(20, 1.0, 500.0, 20.0)]),
            ("base".to_string(), vec![row(10, 0.5, 900.0, 12.0)]),
        ];
        let rows = report(&sweeps, &[0.9]);
        let mut buf = Vec::new();
        write_report_csv(&mut buf, &rows).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "# schema: report/1\n\
             label,target_recall,L,qps,mean_hops,mean_visited\n\
             roar,0.9,15.0,750.0,15.0,150.0\n\
             base,0.9,,,,\n"
        );
        assert_eq!(read_report_csv(&buf[..]).unwrap(), rows);
    }
}
