//! CSV emission and parsing for trial logs, Q-table snapshots and sweeps.
//!
//! Numbers use Rust's shortest round-trip decimal form, so reading a file
//! back reproduces every value bit for bit.

use std::io::{Read, Write};

use crate::agent::{Action, QTable, State, StateSpace, TrialRecord};
use crate::error::{Error, Result};
use crate::experiments::SweepRow;

pub const TRIAL_COLUMNS: [&str; 9] =
    ["trial", "coherence", "choice", "correct", "rt_steps", "rt_ms", "terminal_state", "reward", "timed_out"];

pub const SNAPSHOT_COLUMNS: [&str; 4] = ["state", "Q_left", "Q_right", "Q_wait"];

pub const SWEEP_COLUMNS: [&str; 8] = ["param", "value", "condition", "metric", "mean", "std", "sem", "n"];

fn bad(reason: impl Into<String>) -> Error {
    Error::Malformed(reason.into())
}

fn csv_err(e: csv::Error) -> Error {
    bad(format!("csv: {e}"))
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn write_trials<W: Write>(out: W, records: &[TrialRecord<f64>], dt_ms: f64) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIAL_COLUMNS).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.trial.to_string(),
            r.coherence.to_string(),
            r.choice.code().to_string(),
            flag(r.correct).to_string(),
            r.rt_steps.to_string(),
            r.rt_ms(dt_ms).to_string(),
            r.terminal_value.to_string(),
            r.reward.to_string(),
            flag(r.timed_out).to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| bad(format!("csv flush: {e}")))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    let raw = rec.get(i).ok_or_else(|| bad(format!("line {line}: missing column {}", i + 1)))?;
    raw.parse().map_err(|_| bad(format!("line {line}: cannot parse `{raw}`")))
}

fn bool_field(rec: &csv::StringRecord, i: usize, line: usize) -> Result<bool> {
    match rec.get(i) {
        Some("1") => Ok(true),
        Some("0") => Ok(false),
        other => Err(bad(format!("line {line}: expected 0 or 1, found {other:?}"))),
    }
}

fn check_header<R: Read>(r: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let h = r.headers().map_err(csv_err)?;
    if h.iter().ne(expected.iter().copied()) {
        return Err(bad(format!("header {:?}, expected {expected:?}", h.iter().collect::<Vec<_>>())));
    }
    Ok(())
}

/// Parse a trial log written by [`write_trials`]. Terminal states must lie
/// on the lattice of `space`, and `rt_ms` must equal `rt_steps * dt_ms`.
pub fn read_trials<R: Read>(input: R, space: &StateSpace<f64>, dt_ms: f64) -> Result<Vec<TrialRecord<f64>>> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, &TRIAL_COLUMNS)?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let choice = match rec.get(2).and_then(Action::from_code) {
            Some(a) if a.is_terminating() => a,
            _ => return Err(bad(format!("line {line}: choice must be L or R"))),
        };
        let terminal_value: f64 = field(&rec, 6, line)?;
        let state = State((terminal_value / space.delta()).round() as i64);
        if !space.contains(state) || space.value(state) != terminal_value {
            return Err(bad(format!("line {line}: terminal_state {terminal_value} is not a lattice value")));
        }
        let record = TrialRecord {
            trial: field(&rec, 0, line)?,
            coherence: field(&rec, 1, line)?,
            choice,
            correct: bool_field(&rec, 3, line)?,
            rt_steps: field(&rec, 4, line)?,
            terminal_state: state,
            terminal_value,
            reward: field(&rec, 7, line)?,
            timed_out: bool_field(&rec, 8, line)?,
        };
        let rt_ms: f64 = field(&rec, 5, line)?;
        if rt_ms != record.rt_ms(dt_ms) {
            return Err(bad(format!("line {line}: rt_ms {rt_ms} disagrees with rt_steps")));
        }
        out.push(record);
    }
    Ok(out)
}

pub fn write_snapshot<W: Write>(out: W, q: &QTable<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SNAPSHOT_COLUMNS).map_err(csv_err)?;
    for (s, row) in q.rows() {
        w.write_record([q.space().value(s).to_string(), row[0].to_string(), row[1].to_string(), row[2].to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| bad(format!("csv flush: {e}")))
}

/// Parse a snapshot; rows must cover the lattice of `space` in ascending order.
pub fn read_snapshot<R: Read>(input: R, space: StateSpace<f64>) -> Result<QTable<f64>> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, &SNAPSHOT_COLUMNS)?;
    let mut values = Vec::with_capacity(space.len());
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let v: f64 = field(&rec, 0, line)?;
        if space.value(space.state_at(i)) != v {
            return Err(bad(format!("line {line}: expected state {}", space.value(space.state_at(i)))));
        }
        values.push([field(&rec, 1, line)?, field(&rec, 2, line)?, field(&rec, 3, line)?]);
    }
    QTable::from_rows(space, values).ok_or_else(|| bad(format!("snapshot needs {} rows", space.len())))
}

pub fn write_sweep<W: Write>(out: W, param: &str, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            param.to_string(),
            r.value.to_string(),
            r.condition.clone(),
            r.metric.to_string(),
            r.mean.to_string(),
            r.std.to_string(),
            r.sem.to_string(),
            r.n.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| bad(format!("csv flush: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn space() -> StateSpace<f64> {
        StateSpace::new(10.0, 0.1).unwrap()
    }

    fn record(i: u64) -> TrialRecord<f64> {
        let sp = space();
        let s = State(i as i64 % 50 - 25);
        TrialRecord {
            trial: i,
            coherence: [-0.064, 0.0, 0.512][i as usize % 3],
            choice: if i % 2 == 0 { Action::Left } else { Action::Right },
            correct: i % 3 == 0,
            rt_steps: (i * 7) as usize,
            terminal_state: s,
            terminal_value: sp.value(s),
            reward: -50.0,
            timed_out: i % 5 == 0,
        }
    }

    fn emit(records: &[TrialRecord<f64>]) -> String {
        let mut buf = Vec::new();
        write_trials(&mut buf, records, 1.0).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_records_give_header_only() {
        assert_eq!(emit(&[]), "trial,coherence,choice,correct,rt_steps,rt_ms,terminal_state,reward,timed_out\n");
    }

    #[test]
    fn one_record_gives_two_lines() {
        let text = emit(&[record(3)]);
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().nth(1).unwrap(), "3,-0.064,R,1,21,21,-2.2,-50,0");
    }

    #[test]
    fn rt_ms_column_is_derived() {
        let mut buf = Vec::new();
        write_trials(&mut buf, &(0..20).map(record).collect::<Vec<_>>(), 2.5).unwrap();
        let mut r = csv::Reader::from_reader(buf.as_slice());
        for rec in r.records() {
            let rec = rec.unwrap();
            let steps: f64 = rec[4].parse().unwrap();
            let ms: f64 = rec[5].parse().unwrap();
            assert_eq!(ms, steps * 2.5);
        }
    }

    #[test]
    fn trials_round_trip() {
        let records: Vec<_> = (0..40).map(record).collect();
        let text = emit(&records);
        assert_eq!(read_trials(text.as_bytes(), &space(), 1.0).unwrap(), records);
    }

    #[test]
    fn corrupt_trials_are_rejected() {
        let text = emit(&[record(1)]);
        assert!(read_trials(text.replace(",R,", ",W,").as_bytes(), &space(), 1.0).is_err());
        assert!(read_trials(text.replace("-2.4", "-2.45").as_bytes(), &space(), 1.0).is_err());
        assert!(read_trials(text.replace("trial,", "tri,").as_bytes(), &space(), 1.0).is_err());
        assert!(read_trials(text.as_bytes(), &space(), 2.0).is_err());
    }

    #[test]
    fn zero_snapshot() {
        let q = QTable::zeros(StateSpace::new(3.0, 1.0).unwrap());
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &q).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "state,Q_left,Q_right,Q_wait");
        assert_eq!(text.lines().nth(1).unwrap(), "-3,0,0,0");
        assert_eq!(text.lines().count(), 8);
        for line in text.lines().skip(1) {
            assert!(line.split(',').skip(1).all(|v| v == "0"));
        }
    }

    proptest! {
        #[test]
        fn snapshot_round_trips_bitwise(vals in proptest::collection::vec(-1e6f64..1e6, 21 * 3)) {
            let sp = StateSpace::new(1.0, 0.1).unwrap();
            let rows: Vec<[f64; 3]> = vals.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
            let q = QTable::from_rows(sp, rows).unwrap();
            let mut buf = Vec::new();
            write_snapshot(&mut buf, &q).unwrap();
            prop_assert_eq!(read_snapshot(buf.as_slice(), sp).unwrap(), q);
        }
    }
}
