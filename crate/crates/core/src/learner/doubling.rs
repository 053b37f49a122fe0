use super::{theorem1_params, AlgoParams};

/// Phase `τ ≥ 1` covers slots `[2^τ − 1, 2^{τ+1} − 2]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DoublingPhase {
    pub index: u32,
    pub start: u64,
    pub len: u64,
}

impl DoublingPhase {
    pub fn end(&self) -> u64 {
        self.start + self.len - 1
    }

    /// Slot counted from 1 within the phase.
    pub fn local_slot(&self, t: u64) -> u64 {
        t - self.start + 1
    }
}

/// Horizon-free restart schedule: a fresh CLUP instance tuned for `T = 2^τ` in phase `τ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoublingSchedule {
    pub alpha: f64,
    pub dim: usize,
    pub f_max: usize,
}

impl DoublingSchedule {
    pub fn new(alpha: f64, dim: usize, f_max: usize) -> Self {
        Self { alpha, dim, f_max }
    }

    pub fn phase(index: u32) -> DoublingPhase {
        assert!((1..63).contains(&index), "phase index out of range");
        DoublingPhase {
            index,
            start: (1u64 << index) - 1,
            len: 1u64 << index,
        }
    }

    pub fn phase_of(t: u64) -> DoublingPhase {
        assert!(t >= 1, "slots start at 1");
        Self::phase((t + 1).ilog2())
    }

    pub fn phases() -> impl Iterator<Item = DoublingPhase> {
        (1..63).map(Self::phase)
    }

    pub fn params(&self, phase: &DoublingPhase) -> AlgoParams {
        let mut p = theorem1_params(self.alpha, self.dim, phase.len, self.f_max);
        p.doubling = true;
        p
    }
}
