use super::{Context, Coords};
use std::collections::BTreeMap;
use std::io::Read;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("line 1: bad header: {0}")]
    Header(String),
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("line {line}: column `{column}` value {value} is outside [0, 1]")]
    Range { line: u64, column: String, value: f64 },
    #[error("line {line}: slot {t} does not increase past previous slot {prev}")]
    Monotonicity { line: u64, t: u64, prev: u64 },
    #[error("trace has no rows")]
    Empty,
}

/// One trace row.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub t: u64,
    pub context: Context,
    /// `rewards[i][f]` for learner `i`, arm `f`.
    pub rewards: Vec<Vec<f64>>,
}

/// A validated sequence of trace rows with strictly increasing slots.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    dim: usize,
    arms_per_learner: Vec<usize>,
    records: Vec<TraceRecord>,
}

impl Trace {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn arms_per_learner(&self) -> &[usize] {
        &self.arms_per_learner
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn last_slot(&self) -> u64 {
        self.records.last().map_or(0, |r| r.t)
    }

    /// `Ok(None)` for a gap inside the trace, `Err(())` past its end.
    #[allow(clippy::result_unit_err)]
    pub fn record(&self, t: u64) -> Result<Option<&TraceRecord>, ()> {
        if t > self.last_slot() {
            return Err(());
        }
        Ok(self
            .records
            .binary_search_by_key(&t, |r| r.t)
            .ok()
            .map(|k| &self.records[k]))
    }

    pub fn reward(&self, t: u64, learner: usize, arm: usize) -> Option<f64> {
        self.record(t).ok().flatten().map(|r| r.rewards[learner][arm])
    }
}

enum Column {
    Slot,
    Coord(usize),
    Reward(usize, usize),
}

fn parse_header(header: &csv::StringRecord) -> Result<(usize, Vec<usize>, Vec<Column>), TraceError> {
    let mut columns = Vec::with_capacity(header.len());
    let mut coords = Vec::new();
    let mut rewards: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, name) in header.iter().enumerate() {
        let name = name.trim();
        if k == 0 {
            if name != "t" {
                return Err(TraceError::Header(format!("first column must be `t`, found `{name}`")));
            }
            columns.push(Column::Slot);
        } else if let Some(d) = name.strip_prefix("x_") {
            let d: usize = d
                .parse()
                .ok()
                .filter(|&d| d >= 1)
                .ok_or_else(|| TraceError::Header(format!("bad context column `{name}`")))?;
            coords.push(d);
            columns.push(Column::Coord(d - 1));
        } else if let Some(rest) = name.strip_prefix("r_") {
            let parsed = rest
                .split_once('_')
                .and_then(|(i, f)| Some((i.parse::<usize>().ok()?, f.parse::<usize>().ok()?)));
            let (i, f) = parsed.ok_or_else(|| TraceError::Header(format!("bad reward column `{name}`")))?;
            rewards.entry(i).or_default().push(f);
            columns.push(Column::Reward(i, f));
        } else {
            return Err(TraceError::Header(format!("unknown column `{name}`")));
        }
    }
    let dim = coords.len();
    if dim == 0 {
        return Err(TraceError::Header("no context columns `x_1..x_D`".into()));
    }
    let mut sorted = coords.clone();
    sorted.sort_unstable();
    if sorted != (1..=dim).collect::<Vec<_>>() {
        return Err(TraceError::Header(format!(
            "context columns must be x_1..x_{dim} exactly once"
        )));
    }
    if rewards.is_empty() {
        return Err(TraceError::Header("no reward columns `r_<i>_<f>`".into()));
    }
    let learners = rewards.keys().max().unwrap() + 1;
    let mut arms = Vec::with_capacity(learners);
    for i in 0..learners {
        let mut fs = rewards
            .remove(&i)
            .ok_or_else(|| TraceError::Header(format!("missing reward columns for learner {i}")))?;
        fs.sort_unstable();
        let n = fs.len();
        if fs != (0..n).collect::<Vec<_>>() {
            return Err(TraceError::Header(format!(
                "learner {i}: reward columns must be r_{i}_0..r_{i}_{} exactly once",
                n - 1
            )));
        }
        arms.push(n);
    }
    Ok((dim, arms, columns))
}

/// Parses a trace CSV with header `t,x_1..x_D,r_<i>_<f>..`.
pub fn load_trace<R: Read>(reader: R) -> Result<Trace, TraceError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| TraceError::Header(e.to_string()))?.clone();
    let (dim, arms, columns) = parse_header(&header)?;
    let mut records: Vec<TraceRecord> = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| TraceError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let mut t = 0u64;
        let mut coords: Coords = smallvec::smallvec![0.0; dim];
        let mut rewards: Vec<Vec<f64>> = arms.iter().map(|&n| vec![0.0; n]).collect();
        for (k, col) in columns.iter().enumerate() {
            let raw = &row[k];
            let name = &header[k];
            match *col {
                Column::Slot => {
                    t = raw.parse().map_err(|_| TraceError::Parse {
                        line,
                        msg: format!("slot `{raw}` is not a positive integer"),
                    })?;
                    if t == 0 {
                        return Err(TraceError::Parse {
                            line,
                            msg: "slots start at 1".into(),
                        });
                    }
                }
                Column::Coord(d) => coords[d] = unit_value(raw, name, line)?,
                Column::Reward(i, f) => rewards[i][f] = unit_value(raw, name, line)?,
            }
        }
        if let Some(prev) = records.last() {
            if t <= prev.t {
                return Err(TraceError::Monotonicity { line, t, prev: prev.t });
            }
        }
        records.push(TraceRecord {
            t,
            context: Context::from_coords_unchecked(coords),
            rewards,
        });
    }
    if records.is_empty() {
        return Err(TraceError::Empty);
    }
    Ok(Trace {
        dim,
        arms_per_learner: arms,
        records,
    })
}

fn unit_value(raw: &str, column: &str, line: u64) -> Result<f64, TraceError> {
    let v: f64 = raw.parse().map_err(|_| TraceError::Parse {
        line,
        msg: format!("column `{column}`: `{raw}` is not a number"),
    })?;
    if !(0.0..=1.0).contains(&v) {
        return Err(TraceError::Range {
            line,
            column: column.to_string(),
            value: v,
        });
    }
    Ok(v)
}
