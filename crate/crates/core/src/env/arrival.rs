use super::{Context, Coords, EnvError, Trace};
use crate::partition::{AdaptivePartition, Hypercube};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Axis-aligned box `[lo, hi]` inside the unit cube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Region {
    pub fn unit(dim: usize) -> Self {
        Self {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
        }
    }

    fn validate(&self, dim: usize) -> Result<(), EnvError> {
        if self.lo.len() != dim || self.hi.len() != dim {
            return Err(EnvError::InvalidArrivals(format!(
                "region bounds must have {dim} coordinates"
            )));
        }
        for d in 0..dim {
            let (lo, hi) = (self.lo[d], self.hi[d]);
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(EnvError::InvalidArrivals(format!(
                    "region axis {d}: need 0 <= lo <= hi <= 1, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Context {
        let coords: Coords = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(&lo, &hi)| (lo + (hi - lo) * rng.gen::<f64>()).min(hi))
            .collect();
        Context::from_coords_unchecked(coords)
    }
}

/// Where a single shared context comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Uniform(Region),
    Fixed(Context),
}

impl Source {
    fn validate(&self, dim: usize) -> Result<(), EnvError> {
        match self {
            Source::Uniform(r) => r.validate(dim),
            Source::Fixed(c) => c.check_dim(dim),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Context {
        match self {
            Source::Uniform(r) => r.sample(rng),
            Source::Fixed(c) => c.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum ArrivalKind {
    /// Independent uniform draws per learner.
    IidUniform { region: Region },
    /// One draw shared by every learner.
    Identical { source: Source },
    /// Only `target` receives arrivals.
    Solo { target: usize, source: Source },
    /// Centres of the lowest-level active cells of the viewed partition, round-robin.
    /// `target = None` sends the same context to every learner.
    WorstCaseDcza { target: Option<usize> },
    /// Contexts replayed from a trace; `target = None` sends each row to every learner.
    FixedTrace { trace: Arc<Trace>, target: Option<usize> },
}

/// A context-arrival process for `learners` learners in dimension `dim`.
#[derive(Clone, Debug)]
pub struct ArrivalProcess {
    kind: ArrivalKind,
    learners: usize,
    dim: usize,
    last_served: Option<Hypercube>,
}

impl ArrivalProcess {
    pub fn new(kind: ArrivalKind, learners: usize, dim: usize) -> Result<Self, EnvError> {
        if learners == 0 || dim == 0 {
            return Err(EnvError::InvalidArrivals(
                "need at least one learner and one dimension".into(),
            ));
        }
        let check_target = |t: usize| {
            if t < learners {
                Ok(())
            } else {
                Err(EnvError::InvalidArrivals(format!(
                    "target learner {t} out of range for {learners} learners"
                )))
            }
        };
        match &kind {
            ArrivalKind::IidUniform { region } => region.validate(dim)?,
            ArrivalKind::Identical { source } => source.validate(dim)?,
            ArrivalKind::Solo { target, source } => {
                check_target(*target)?;
                source.validate(dim)?;
            }
            ArrivalKind::WorstCaseDcza { target } => {
                if let Some(t) = target {
                    check_target(*t)?;
                }
            }
            ArrivalKind::FixedTrace { trace, target } => {
                if trace.dim() != dim {
                    return Err(EnvError::DimensionMismatch {
                        expected: dim,
                        got: trace.dim(),
                    });
                }
                if let Some(t) = target {
                    check_target(*t)?;
                }
            }
        }
        Ok(Self {
            kind,
            learners,
            dim,
            last_served: None,
        })
    }

    pub fn kind(&self) -> &ArrivalKind {
        &self.kind
    }

    pub fn learners(&self) -> usize {
        self.learners
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn needs_partition_view(&self) -> bool {
        matches!(self.kind, ArrivalKind::WorstCaseDcza { .. })
    }

    /// Learner whose partition the worst-case generator watches.
    pub fn view_learner(&self) -> usize {
        match self.kind {
            ArrivalKind::WorstCaseDcza { target } => target.unwrap_or(0),
            _ => 0,
        }
    }

    /// Last slot with data, for trace-driven processes.
    pub fn horizon(&self) -> Option<u64> {
        match &self.kind {
            ArrivalKind::FixedTrace { trace, .. } => Some(trace.last_slot()),
            _ => None,
        }
    }

    /// Contexts for slot `t`, one entry per learner; `None` marks no arrival.
    pub fn next_contexts<R: Rng + ?Sized>(
        &mut self,
        t: u64,
        view: Option<&AdaptivePartition>,
        rng: &mut R,
    ) -> Result<Vec<Option<Context>>, EnvError> {
        let m = self.learners;
        let out = match &self.kind {
            ArrivalKind::IidUniform { region } => (0..m).map(|_| Some(region.sample(rng))).collect(),
            ArrivalKind::Identical { source } => vec![Some(source.draw(rng)); m],
            ArrivalKind::Solo { target, source } => {
                let mut v = vec![None; m];
                v[*target] = Some(source.draw(rng));
                v
            }
            ArrivalKind::WorstCaseDcza { target } => {
                let target = *target;
                let part = view.ok_or(EnvError::MissingPartitionView)?;
                let cell = self.next_worst_case_cell(part);
                let x = Context::from_coords_unchecked(cell.center());
                self.last_served = Some(cell);
                spread(m, target, x)
            }
            ArrivalKind::FixedTrace { trace, target } => match trace.record(t) {
                Ok(Some(rec)) => spread(m, *target, rec.context.clone()),
                Ok(None) => vec![None; m],
                Err(()) => return Err(EnvError::EndOfTrace(t)),
            },
        };
        Ok(out)
    }

    fn next_worst_case_cell(&self, part: &AdaptivePartition) -> Hypercube {
        let min_level = part.active().map(|c| c.level()).min().unwrap_or(0);
        let mut lowest = part.active().filter(|c| c.level() == min_level);
        let after_last = self.last_served.as_ref().and_then(|last| {
            if last.level() != min_level {
                return None;
            }
            part.active().find(|c| c.level() == min_level && *c > last).cloned()
        });
        after_last.unwrap_or_else(|| lowest.next().expect("partition has active cells").clone())
    }
}

fn spread(m: usize, target: Option<usize>, x: Context) -> Vec<Option<Context>> {
    match target {
        Some(i) => {
            let mut v = vec![None; m];
            v[i] = Some(x);
            v
        }
        None => vec![Some(x); m],
    }
}
