//! Exact Gibbs computations by full enumeration of the state space.

mod cavity;
mod correlation;
mod gibbs;
mod overlap;
pub mod poly;
mod wht;

pub use cavity::{cavity_contractions, CavityContractions};
pub use correlation::{correlation_matrix, CorrelationMatrix};
pub use gibbs::{coupled_tables, gibbs_table, log_partition, CoupledParams, GibbsTable};
pub use overlap::{overlap_law, overlap_moment, OverlapLaw, Spectrum};
pub use wht::{wht, wht_in_place};

use crate::error::{Result, SkError};

/// Largest `n` accepted by the exact engine (a `2^24` table is 128 MiB of f64).
pub const EXACT_CAP: usize = 24;

pub(crate) fn check_cap(n: usize) -> Result<()> {
    if n > EXACT_CAP {
        return Err(SkError::Capacity { n, cap: EXACT_CAP });
    }
    if n == 0 {
        return Err(SkError::SizeTooSmall { n, min: 1 });
    }
    Ok(())
}

/// Kahan–Babuška compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn scale(&mut self, f: f64) {
        self.sum *= f;
        self.comp *= f;
    }

    #[inline]
    pub fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}
