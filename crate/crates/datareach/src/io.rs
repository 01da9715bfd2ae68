//! CSV emission and ingestion for trajectories, tubes and control steps.

use crate::interval::{IVector, Interval};
use crate::knowledge::Sample;
use crate::reach::ReachTube;
use crate::systems::StepRow;
use std::io::{Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad header: {0}")]
    Header(String),
    #[error("row {row}: {msg}")]
    Row { row: usize, msg: String },
}

fn count_prefixed(h: &csv::StringRecord, prefix: &str) -> usize {
    h.iter()
        .filter(|c| c.strip_prefix(prefix).is_some_and(|d| !d.is_empty() && d.chars().all(|ch| ch.is_ascii_digit())))
        .count()
}

fn parse_row(rec: &csv::StringRecord, row: usize) -> Result<Vec<f64>, IoError> {
    rec.iter()
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| IoError::Row { row, msg: format!("{s:?}: {e}") })
        })
        .collect()
}

/// Header `t,x1..xn,xdot1..xdotn,u1..um`.
pub fn write_trajectory<W: Write>(w: W, samples: &[Sample<f64>]) -> Result<(), IoError> {
    let mut wr = csv::Writer::from_writer(w);
    let (n, m) = samples.first().map_or((0, 0), |s| (s.x.len(), s.u.len()));
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|k| format!("x{k}")));
    header.extend((1..=n).map(|k| format!("xdot{k}")));
    header.extend((1..=m).map(|l| format!("u{l}")));
    wr.write_record(&header)?;
    for s in samples {
        let mut row = vec![s.t.to_string()];
        row.extend(s.x.iter().chain(&s.xdot).chain(&s.u).map(f64::to_string));
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_trajectory<R: Read>(r: R) -> Result<Vec<Sample<f64>>, IoError> {
    let mut rd = csv::Reader::from_reader(r);
    let h = rd.headers()?.clone();
    let n = count_prefixed(&h, "x");
    let nd = count_prefixed(&h, "xdot");
    let m = count_prefixed(&h, "u");
    if h.get(0) != Some("t") || n != nd || h.len() != 1 + 2 * n + m {
        return Err(IoError::Header(format!("expected t,x1..xn,xdot1..xdotn,u1..um, got {:?}", h)));
    }
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let v = parse_row(&rec?, i + 1)?;
        out.push(Sample::new(v[0], v[1..=n].to_vec(), v[n + 1..=2 * n].to_vec(), v[2 * n + 1..].to_vec()));
    }
    Ok(out)
}

/// One parsed tube row.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeRow {
    pub i: usize,
    pub t: f64,
    pub r: IVector<f64>,
    pub s: IVector<f64>,
    pub beta: f64,
}

/// Header `i,t,lo_1..lo_n,hi_1..hi_n,S_lo_1..S_lo_n,S_hi_1..S_hi_n,beta`.
pub fn write_tube<W: Write>(w: W, tube: &ReachTube<f64>) -> Result<(), IoError> {
    let mut wr = csv::Writer::from_writer(w);
    let n = tube.steps.first().map_or(0, |s| s.r.len());
    let mut header = vec!["i".to_string(), "t".to_string()];
    for p in ["lo_", "hi_", "S_lo_", "S_hi_"] {
        header.extend((1..=n).map(|k| format!("{p}{k}")));
    }
    header.push("beta".into());
    wr.write_record(&header)?;
    for (i, st) in tube.steps.iter().enumerate() {
        let mut row = vec![i.to_string(), st.t.to_string()];
        row.extend(st.r.lo().iter().chain(&st.r.hi()).chain(&st.s.lo()).chain(&st.s.hi()).map(f64::to_string));
        row.push(st.beta.to_string());
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_tube<R: Read>(r: R) -> Result<Vec<TubeRow>, IoError> {
    let mut rd = csv::Reader::from_reader(r);
    let h = rd.headers()?.clone();
    let n = count_prefixed(&h, "lo_");
    if h.get(0) != Some("i") || h.get(1) != Some("t") || h.len() != 3 + 4 * n {
        return Err(IoError::Header(format!("unexpected tube header {:?}", h)));
    }
    let boxes = |lo: &[f64], hi: &[f64], row: usize| -> Result<IVector<f64>, IoError> {
        lo.iter()
            .zip(hi)
            .map(|(&a, &b)| Interval::new(a, b).map_err(|e| IoError::Row { row, msg: e.to_string() }))
            .collect()
    };
    let mut out = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let v = parse_row(&rec?, k + 1)?;
        out.push(TubeRow {
            i: v[0] as usize,
            t: v[1],
            r: boxes(&v[2..2 + n], &v[2 + n..2 + 2 * n], k + 1)?,
            s: boxes(&v[2 + 2 * n..2 + 3 * n], &v[2 + 3 * n..2 + 4 * n], k + 1)?,
            beta: v[2 + 4 * n],
        });
    }
    Ok(out)
}

/// Header `i,t,u_1..u_m,cost,bound,solver_iters,micros,predicted_cost`.
pub fn write_steps<W: Write>(w: W, rows: &[StepRow], m: usize) -> Result<(), IoError> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["i".to_string(), "t".to_string()];
    header.extend((1..=m).map(|l| format!("u_{l}")));
    header.extend(["cost", "bound", "solver_iters", "micros", "predicted_cost"].map(String::from));
    wr.write_record(&header)?;
    for r in rows {
        let mut row = vec![r.i.to_string(), r.t.to_string()];
        row.extend(r.u.iter().map(f64::to_string));
        row.extend([
            r.cost.to_string(),
            r.bound.to_string(),
            r.solver_iters.to_string(),
            r.micros.to_string(),
            r.predicted_cost.to_string(),
        ]);
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

/// Parses a step file; `x_next` is not part of the format and comes back empty.
pub fn read_steps<R: Read>(r: R) -> Result<Vec<StepRow>, IoError> {
    let mut rd = csv::Reader::from_reader(r);
    let h = rd.headers()?.clone();
    let m = count_prefixed(&h, "u_");
    if h.get(0) != Some("i") || h.len() != 7 + m {
        return Err(IoError::Header(format!("unexpected step header {:?}", h)));
    }
    let mut out = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let v = parse_row(&rec?, k + 1)?;
        out.push(StepRow {
            i: v[0] as usize,
            t: v[1],
            u: v[2..2 + m].to_vec(),
            cost: v[2 + m],
            bound: v[3 + m],
            solver_iters: v[4 + m] as usize,
            micros: v[5 + m] as u128,
            predicted_cost: v[6 + m],
            x_next: Vec::new(),
        });
    }
    Ok(out)
}
