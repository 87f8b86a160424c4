use std::io::Write;
use std::ops::Range;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};

use super::system::EnvelopeCheck;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct IntegrationStats {
    pub rtol: f64,
    pub atol: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evals: usize,
}

/// Samples of a state vector on a log-spaced radial grid.
///
/// Slopes `dy/d(ln r)` are kept alongside the states so the trajectory can be
/// evaluated between samples by cubic Hermite interpolation in `ln r`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    radii: Vec<f64>,
    log_radii: Vec<f64>,
    states: Vec<DVector<f64>>,
    slopes: Vec<DVector<f64>>,
    /// Set when the state norm crossed the overflow guard; the last sample is
    /// the truncation point.
    pub diverged: bool,
    pub stats: IntegrationStats,
    pub envelope: Option<EnvelopeCheck>,
}

/// Which scalar to extract from each sample.
#[derive(Debug, Clone, PartialEq)]
pub enum Selector {
    Component(usize),
    /// Euclidean norm of the whole state.
    Norm,
    /// Euclidean norm of a contiguous block of components.
    Block(Range<usize>),
}

impl Trajectory {
    pub(crate) fn new(stats: IntegrationStats) -> Self {
        Self {
            radii: Vec::new(),
            log_radii: Vec::new(),
            states: Vec::new(),
            slopes: Vec::new(),
            diverged: false,
            stats,
            envelope: None,
        }
    }

    pub(crate) fn push(&mut self, s: f64, y: DVector<f64>, slope: DVector<f64>) {
        debug_assert!(self.log_radii.last().is_none_or(|&l| s > l));
        self.log_radii.push(s);
        self.radii.push(s.exp());
        self.states.push(y);
        self.slopes.push(slope);
    }

    /// Builds a trajectory from externally computed samples (used for exact
    /// profiles). Slopes are taken as zero, so interpolation is not meaningful.
    pub fn from_samples(radii: Vec<f64>, states: Vec<DVector<f64>>) -> Result<Self> {
        if radii.len() != states.len() {
            return Err(Error::Config("radii and states differ in length".into()));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) || radii.first().is_some_and(|&r| r <= 0.0) {
            return Err(Error::Config(
                "radii must be positive and strictly increasing".into(),
            ));
        }
        let dim = states.first().map_or(0, |s| s.len());
        let mut t = Self::new(IntegrationStats::default());
        for (r, y) in radii.into_iter().zip(states) {
            t.push(r.ln(), y, DVector::zeros(dim));
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, |s| s.len())
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn states(&self) -> &[DVector<f64>] {
        &self.states
    }

    pub fn last_state(&self) -> Option<&DVector<f64>> {
        self.states.last()
    }

    pub fn r_range(&self) -> (f64, f64) {
        (
            self.radii.first().copied().unwrap_or(f64::NAN),
            self.radii.last().copied().unwrap_or(f64::NAN),
        )
    }

    pub fn select(&self, sel: &Selector) -> Vec<f64> {
        self.states
            .iter()
            .map(|y| match sel {
                Selector::Component(i) => y[*i],
                Selector::Norm => y.norm(),
                Selector::Block(r) => y.rows_range(r.clone()).norm(),
            })
            .collect()
    }

    /// Supremum of the selected quantity's magnitude.
    pub fn sup(&self, sel: &Selector) -> f64 {
        self.select(sel)
            .into_iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// State at `r` by cubic Hermite interpolation in `ln r`.
    pub fn interpolate_into(&self, r: f64, out: &mut [f64]) -> Result<()> {
        let (lo, hi) = self.r_range();
        let s = r.ln();
        let (slo, shi) = (lo.ln(), hi.ln());
        let slack = 1e-9 * (1.0 + shi.abs());
        if !(s >= slo - slack && s <= shi + slack) {
            return Err(Error::CoverageGap { r, lo, hi });
        }
        let s = s.clamp(slo, shi);
        let k = match self
            .log_radii
            .binary_search_by(|v| v.partial_cmp(&s).expect("finite"))
        {
            Ok(k) => {
                out.copy_from_slice(self.states[k].as_slice());
                return Ok(());
            }
            Err(k) => k.clamp(1, self.len() - 1) - 1,
        };
        let h = self.log_radii[k + 1] - self.log_radii[k];
        let t = (s - self.log_radii[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let (y0, y1) = (&self.states[k], &self.states[k + 1]);
        let (f0, f1) = (&self.slopes[k], &self.slopes[k + 1]);
        for (i, o) in out.iter_mut().enumerate() {
            *o = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
        }
        Ok(())
    }

    pub fn interpolate(&self, r: f64) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(self.dim());
        self.interpolate_into(r, out.as_mut_slice())?;
        Ok(out)
    }

    /// Writes `r, y_0, …, y_{n-1}` rows at full precision.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.write_csv_with_header(writer, None)
    }

    /// As [`write_csv`](Self::write_csv) with custom column names after `r`.
    pub fn write_csv_with_header<W: Write>(
        &self,
        writer: W,
        names: Option<&[String]>,
    ) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["r".to_string()];
        match names {
            Some(n) => header.extend(n.iter().cloned()),
            None => header.extend((0..self.dim()).map(|i| format!("y_{i}"))),
        }
        w.write_record(&header)?;
        for (r, y) in self.radii.iter().zip(&self.states) {
            let mut row = vec![format!("{r:e}")];
            row.extend(y.iter().map(|v| format!("{v:e}")));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
