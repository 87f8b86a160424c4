use std::fmt;

use crate::error::{Error, Result};
use crate::frame::FrameConvention;

use super::validate::{ValidationReport, Violation, ViolationKind};

/// Frame components `C_abce` of a Weyl tensor.
///
/// Each independent component is stored once: indices are sorted within the
/// two antisymmetric pairs (tracking the sign), then the pairs are sorted.
/// Antisymmetry and pair symmetry therefore hold by construction; the first
/// Bianchi identity and tracelessness are properties of the values and are
/// checked by [`validate_weyl`](super::validate_weyl).
#[derive(Clone, PartialEq)]
pub struct WeylTensor {
    frame: FrameConvention,
    n_pairs: usize,
    values: Vec<f64>,
}

/// Canonical location of a component: storage slot and the sign relating the
/// requested ordering to the stored one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Canonical {
    pub slot: usize,
    pub sign: f64,
}

impl WeylTensor {
    pub fn zeros(frame: FrameConvention) -> Self {
        let d = frame.dim();
        let n_pairs = d * (d - 1) / 2;
        Self {
            frame,
            n_pairs,
            values: vec![0.0; n_pairs * (n_pairs + 1) / 2],
        }
    }

    pub fn zeros_in(d: usize) -> Result<Self> {
        Ok(Self::zeros(FrameConvention::new(d)?))
    }

    #[inline]
    pub fn frame(&self) -> FrameConvention {
        self.frame
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    #[inline]
    fn pair_index(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < b);
        let d = self.dim();
        a * d - a * (a + 1) / 2 + (b - a - 1)
    }

    pub(crate) fn canonical(&self, [a, b, c, e]: [usize; 4]) -> Option<Canonical> {
        let d = self.dim();
        assert!(
            a < d && b < d && c < d && e < d,
            "frame index out of range for d = {d}"
        );
        if a == b || c == e {
            return None;
        }
        let mut sign = 1.0;
        let (a, b) = if a < b {
            (a, b)
        } else {
            sign = -sign;
            (b, a)
        };
        let (c, e) = if c < e {
            (c, e)
        } else {
            sign = -sign;
            (e, c)
        };
        let p = self.pair_index(a, b);
        let q = self.pair_index(c, e);
        let (p, q) = if p <= q { (p, q) } else { (q, p) };
        // rows k < p of the upper triangle hold n_pairs - k entries each
        let slot = p * self.n_pairs - p * p.saturating_sub(1) / 2 + (q - p);
        Some(Canonical { slot, sign })
    }

    /// Component `C_abce` for arbitrary index order.
    #[inline]
    pub fn get(&self, idx: [usize; 4]) -> f64 {
        match self.canonical(idx) {
            Some(c) => c.sign * self.values[c.slot],
            None => 0.0,
        }
    }

    /// Sets `C_abce` (and through the symmetries every equivalent ordering).
    /// Setting a component with a repeated index within a pair to a nonzero
    /// value is a symmetry violation and panics.
    pub fn set(&mut self, idx: [usize; 4], value: f64) {
        match self.canonical(idx) {
            Some(c) => self.values[c.slot] = c.sign * value,
            None => assert!(value == 0.0, "component {idx:?} vanishes by antisymmetry"),
        }
    }

    /// Builds a tensor from a list of components, as read from a file.
    ///
    /// Entries that restate the same independent component must agree; an
    /// entry with a repeated index inside an antisymmetric pair must be zero.
    pub fn from_entries(
        d: usize,
        entries: impl IntoIterator<Item = ([usize; 4], f64)>,
    ) -> Result<Self> {
        let mut t = Self::zeros_in(d)?;
        let mut seen = vec![false; t.values.len()];
        let mut antisym = 0.0f64;
        let mut pair = 0.0f64;
        for (idx, val) in entries {
            if idx.iter().any(|&a| a >= d) {
                return Err(Error::Config(format!(
                    "index {idx:?} out of range for d = {d}"
                )));
            }
            match t.canonical(idx) {
                None => antisym = antisym.max(val.abs()),
                Some(c) => {
                    let v = c.sign * val;
                    if seen[c.slot] {
                        let diff = (t.values[c.slot] - v).abs();
                        // a sign flip points at an antisymmetry clash, anything else at the pair swap
                        if (t.values[c.slot] + v).abs() < diff {
                            antisym = antisym.max(diff);
                        } else {
                            pair = pair.max(diff);
                        }
                    } else {
                        seen[c.slot] = true;
                        t.values[c.slot] = v;
                    }
                }
            }
        }
        let mut report = ValidationReport::default();
        if antisym > 0.0 {
            report.push(Violation {
                kind: ViolationKind::Antisymmetry,
                max_violation: antisym,
            });
        }
        if pair > 0.0 {
            report.push(Violation {
                kind: ViolationKind::PairSymmetry,
                max_violation: pair,
            });
        }
        if report.is_empty() {
            Ok(t)
        } else {
            Err(Error::Validation(report))
        }
    }

    /// Independent components in canonical order, skipping exact zeros.
    pub fn nonzero_entries(&self) -> Vec<([usize; 4], f64)> {
        let d = self.dim();
        let mut out = Vec::new();
        for a in 0..d {
            for b in a + 1..d {
                for c in 0..d {
                    for e in c + 1..d {
                        let p = self.pair_index(a, b);
                        let q = self.pair_index(c, e);
                        if q < p {
                            continue;
                        }
                        let v = self.get([a, b, c, e]);
                        if v != 0.0 {
                            out.push(([a, b, c, e], v));
                        }
                    }
                }
            }
        }
        out
    }

    /// Raw canonical storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }
}

impl fmt::Debug for WeylTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeylTensor")
            .field("d", &self.dim())
            .field("nonzero", &self.nonzero_entries())
            .finish()
    }
}
