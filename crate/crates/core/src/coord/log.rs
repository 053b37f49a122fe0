use super::{LearnerRecord, Message, SlotLog};
use crate::env::{Choice, Context};
use crate::learner::{ActivationNotice, Phase};
use crate::partition::{Cell, Hypercube};
use std::io::{Read, Write};

const BASE_COLUMNS: [&str; 9] = [
    "t",
    "learner",
    "phase",
    "choice",
    "delegated_arm",
    "reward",
    "cost",
    "cell",
    "oracle",
];

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(String::new, |v| v.to_string())
}

/// Writes slot logs as CSV, one row per learner per slot.
pub struct SlotLogWriter<W: Write> {
    out: csv::Writer<W>,
    dim: usize,
}

impl<W: Write> SlotLogWriter<W> {
    pub fn new(out: W, dim: usize) -> csv::Result<Self> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let mut header: Vec<String> = BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
        header.extend((1..=dim).map(|d| format!("x_{d}")));
        out.write_record(&header)?;
        Ok(Self { out, dim })
    }

    pub fn write(&mut self, log: &SlotLog) -> csv::Result<()> {
        for r in &log.records {
            let mut row = vec![
                log.t.to_string(),
                r.learner.to_string(),
                r.phase.to_string(),
                opt(&r.choice),
                opt(&r.delegated_arm),
                opt(&r.reward),
                r.cost.to_string(),
                opt(&r.cell),
                opt(&r.oracle),
            ];
            match &r.context {
                Some(x) => row.extend(x.coords().iter().map(|c| c.to_string())),
                None => row.extend(std::iter::repeat_n(String::new(), self.dim)),
            }
            self.out.write_record(&row)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.out.flush()?;
        self.out.into_inner().map_err(|e| e.into_error())
    }
}

/// Writes the activation broadcasts of slot logs as `t,origin,parent`.
pub struct ActivationWriter<W: Write> {
    out: csv::Writer<W>,
}

impl<W: Write> ActivationWriter<W> {
    pub fn new(out: W) -> csv::Result<Self> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        out.write_record(["t", "origin", "parent"])?;
        Ok(Self { out })
    }

    pub fn write(&mut self, log: &SlotLog) -> csv::Result<()> {
        for m in &log.transcript {
            if let Message::Activate(n) = m {
                self.out
                    .write_record([n.slot.to_string(), n.origin.to_string(), n.parent.to_string()])?;
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.out.flush()?;
        self.out.into_inner().map_err(|e| e.into_error())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LogReadError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {msg}")]
    Field { line: u64, msg: String },
}

fn field<T: std::str::FromStr>(raw: &str, line: u64, name: &str) -> Result<Option<T>, LogReadError> {
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse().map(Some).map_err(|_| LogReadError::Field {
        line,
        msg: format!("bad `{name}` value `{raw}`"),
    })
}

fn required<T: std::str::FromStr>(raw: &str, line: u64, name: &str) -> Result<T, LogReadError> {
    field(raw, line, name)?.ok_or_else(|| LogReadError::Field {
        line,
        msg: format!("missing `{name}`"),
    })
}

/// Reads a slot-log CSV back into per-slot logs. Transcripts are not part of
/// the CSV and come back empty.
pub fn read_slot_logs<R: Read>(input: R) -> Result<Vec<SlotLog>, LogReadError> {
    let mut rdr = csv::Reader::from_reader(input);
    let dim = rdr.headers()?.len().saturating_sub(BASE_COLUMNS.len());
    let mut logs: Vec<SlotLog> = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let t: u64 = required(&row[0], line, "t")?;
        let phase: Phase = required(&row[2], line, "phase")?;
        let coords: Option<Vec<f64>> = (0..dim)
            .map(|d| field::<f64>(&row[BASE_COLUMNS.len() + d], line, "x"))
            .collect::<Result<Option<Vec<_>>, _>>()?;
        let context = coords.map(Context::new).transpose().map_err(|e| LogReadError::Field {
            line,
            msg: e.to_string(),
        })?;
        let rec = LearnerRecord {
            learner: required(&row[1], line, "learner")?,
            context,
            phase,
            choice: field::<Choice>(&row[3], line, "choice")?,
            delegated_arm: field(&row[4], line, "delegated_arm")?,
            reward: field(&row[5], line, "reward")?,
            cost: required(&row[6], line, "cost")?,
            cell: field::<Cell>(&row[7], line, "cell")?,
            oracle: field(&row[8], line, "oracle")?,
        };
        match logs.last_mut() {
            Some(last) if last.t == t => last.records.push(rec),
            _ => logs.push(SlotLog {
                t,
                records: vec![rec],
                transcript: Vec::new(),
            }),
        }
    }
    Ok(logs)
}

/// Reads an activation CSV written by [`ActivationWriter`].
pub fn read_activations<R: Read>(input: R) -> Result<Vec<ActivationNotice>, LogReadError> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        out.push(ActivationNotice {
            slot: required(&row[0], line, "t")?,
            origin: required(&row[1], line, "origin")?,
            parent: required::<Hypercube>(&row[2], line, "parent")?,
        });
    }
    Ok(out)
}
