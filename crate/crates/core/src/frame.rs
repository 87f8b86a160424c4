//! Null frame conventions.
//!
//! Frame index `0` is `ℓ`, `1` is `n`, and `2..d` are the transverse spacelike
//! vectors `m_i`. The only nonzero inner products are `g(ℓ, n) = 1` and
//! `g(m_i, m_j) = δ_ij`, so the inverse frame metric has the same shape.

use crate::error::{Error, Result};

/// Spacetime dimension together with the null-frame metric it implies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrameConvention {
    d: usize,
}

impl FrameConvention {
    pub fn new(d: usize) -> Result<Self> {
        if d < 4 {
            return Err(Error::Config(format!(
                "dimension must be at least 4, got {d}"
            )));
        }
        Ok(Self { d })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of transverse frame vectors, `d - 2`.
    #[inline]
    pub fn transverse(&self) -> usize {
        self.d - 2
    }

    /// Frame metric `g_ab`. Equal to its own inverse.
    #[inline]
    pub fn metric(&self, a: usize, b: usize) -> f64 {
        match (a, b) {
            (0, 1) | (1, 0) => 1.0,
            (a, b) if a >= 2 && a == b => 1.0,
            _ => 0.0,
        }
    }

    /// Inverse frame metric `g^ab`.
    #[inline]
    pub fn inverse_metric(&self, a: usize, b: usize) -> f64 {
        self.metric(a, b)
    }
}

/// Boost weight of a frame component: number of `0` (ℓ) indices minus number
/// of `1` (n) indices.
pub fn boost_weight_of(idx: [usize; 4]) -> i32 {
    idx.iter().fold(0, |w, &a| match a {
        0 => w + 1,
        1 => w - 1,
        _ => w,
    })
}
