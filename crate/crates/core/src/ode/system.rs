use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Default tolerance on eigenvalue real parts; zero counts as nonpositive.
pub const EIGEN_TOL: f64 = 1e-9;

pub type CouplingFn = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;
/// Writes `b(r)` into the (zeroed) output slice. Must be pure.
pub type SourceFn = Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>;

/// The perturbation `B(r)`.
#[derive(Clone)]
pub enum Coupling {
    Zero,
    /// `B(r) = matrix · r^{-power}`.
    InversePower {
        matrix: DMatrix<f64>,
        power: f64,
    },
    Function(CouplingFn),
}

/// The inhomogeneous term `b(r)`.
#[derive(Clone)]
pub enum Source {
    Zero,
    /// `b(r) = vector · r^{-power}`.
    InversePower {
        vector: DVector<f64>,
        power: f64,
    },
    Function(SourceFn),
}

/// `dy/dr = (A/r + B(r)) y + b(r)` on `r >= r0`.
#[derive(Clone)]
pub struct LinearRadialSystem {
    a: DMatrix<f64>,
    coupling: Coupling,
    source: Source,
    /// Declared `k` in `B = O(r^{-k})`.
    pub decay_order_coupling: f64,
    /// Declared `k` in `b = O(r^{-k})`.
    pub decay_order_source: f64,
    r0: f64,
}

impl fmt::Debug for LinearRadialSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearRadialSystem")
            .field("n", &self.dim())
            .field("a", &self.a)
            .field("decay_order_coupling", &self.decay_order_coupling)
            .field("decay_order_source", &self.decay_order_source)
            .field("r0", &self.r0)
            .finish_non_exhaustive()
    }
}

impl LinearRadialSystem {
    /// Homogeneous system `dy/dr = A y / r` starting at `r0`.
    pub fn new(a: DMatrix<f64>, r0: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NonSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::Config(format!(
                "initial radius must be positive, got {r0}"
            )));
        }
        Ok(Self {
            a,
            coupling: Coupling::Zero,
            source: Source::Zero,
            decay_order_coupling: f64::INFINITY,
            decay_order_source: f64::INFINITY,
            r0,
        })
    }

    pub fn with_coupling(mut self, coupling: Coupling, decay_order: f64) -> Result<Self> {
        if let Coupling::InversePower { matrix, .. } = &coupling {
            if matrix.shape() != self.a.shape() {
                return Err(Error::Config("coupling matrix shape differs from A".into()));
            }
        }
        self.coupling = coupling;
        self.decay_order_coupling = decay_order;
        Ok(self)
    }

    pub fn with_source(mut self, source: Source, decay_order: f64) -> Result<Self> {
        if let Source::InversePower { vector, .. } = &source {
            if vector.len() != self.dim() {
                return Err(Error::Config(
                    "source length differs from state dimension".into(),
                ));
            }
        }
        self.source = source;
        self.decay_order_source = decay_order;
        Ok(self)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn a_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.a
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn has_source(&self) -> bool {
        !matches!(self.source, Source::Zero)
    }

    pub fn coupling_at(&self, r: f64) -> DMatrix<f64> {
        match &self.coupling {
            Coupling::Zero => DMatrix::zeros(self.dim(), self.dim()),
            Coupling::InversePower { matrix, power } => matrix * r.powf(-power),
            Coupling::Function(f) => f(r),
        }
    }

    pub fn source_at(&self, r: f64) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        match &self.source {
            Source::Zero => {}
            Source::InversePower { vector, power } => out.copy_from(&(vector * r.powf(-power))),
            Source::Function(f) => f(r, out.as_mut_slice()),
        }
        out
    }

    /// Same system with the source removed.
    pub fn without_source(&self) -> Self {
        let mut s = self.clone();
        s.source = Source::Zero;
        s.decay_order_source = f64::INFINITY;
        s
    }

    /// Right-hand side in `s = ln r`: `dy/ds = (A + r B(r)) y + r b(r)`.
    pub(crate) fn rhs_log(
        &self,
        s: f64,
        y: &DVector<f64>,
        out: &mut DVector<f64>,
        scratch: &mut DVector<f64>,
    ) {
        let r = s.exp();
        out.gemv(1.0, &self.a, y, 0.0);
        match &self.coupling {
            Coupling::Zero => {}
            Coupling::InversePower { matrix, power } => {
                out.gemv(r.powf(1.0 - power), matrix, y, 1.0)
            }
            Coupling::Function(f) => out.gemv(r, &f(r), y, 1.0),
        }
        match &self.source {
            Source::Zero => {}
            Source::InversePower { vector, power } => out.axpy(r.powf(1.0 - power), vector, 1.0),
            Source::Function(f) => {
                scratch.fill(0.0);
                f(r, scratch.as_mut_slice());
                out.axpy(r, scratch, 1.0);
            }
        }
    }

    /// Samples `‖B(r)‖ r^k` and `‖b(r)‖ r^k` on a log grid over `[r0, r_max]`
    /// and checks that neither grows.
    pub fn envelope_check(&self, r_max: f64) -> EnvelopeCheck {
        let lo = self.r0.ln();
        let hi = r_max.max(self.r0 * 10.0).ln();
        let m = (((hi - lo) / std::f64::consts::LN_10) * 10.0)
            .ceil()
            .max(20.0) as usize;
        let grid: Vec<f64> = (0..=m)
            .map(|k| (lo + (hi - lo) * k as f64 / m as f64).exp())
            .collect();
        let coupling: Vec<f64> = grid
            .iter()
            .map(|&r| self.coupling_at(r).norm() * r.powf(self.decay_order_coupling.min(1e3)))
            .collect();
        let source: Vec<f64> = grid
            .iter()
            .map(|&r| self.source_at(r).norm() * r.powf(self.decay_order_source.min(1e3)))
            .collect();
        let coupling_slope = envelope_slope(&grid, &coupling);
        let source_slope = envelope_slope(&grid, &source);
        EnvelopeCheck {
            coupling_slope,
            source_slope,
            coupling_ok: coupling_slope.is_none_or(|s| s <= SLOPE_TOL),
            source_ok: source_slope.is_none_or(|s| s <= SLOPE_TOL),
        }
    }
}

const SLOPE_TOL: f64 = 0.05;

/// Log-log slope over the upper half (in `ln r`) of the probe grid; `None` if
/// the sampled quantity vanishes there.
fn envelope_slope(r: &[f64], g: &[f64]) -> Option<f64> {
    let start = r.len() / 2;
    let pts: Vec<(f64, f64)> = r[start..]
        .iter()
        .zip(&g[start..])
        .filter(|(_, &v)| v > 0.0 && v.is_finite())
        .map(|(&r, &v)| (r.ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    Some(super::fit::least_squares_slope(&pts).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeCheck {
    pub coupling_ok: bool,
    pub source_ok: bool,
    pub coupling_slope: Option<f64>,
    pub source_slope: Option<f64>,
}

impl EnvelopeCheck {
    pub fn ok(&self) -> bool {
        self.coupling_ok && self.source_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenCheck {
    pub satisfied: bool,
    pub eigen_real_parts: Vec<f64>,
}

/// Whether every eigenvalue of `a` has real part `<= tol`. Triangular
/// matrices use their diagonal directly.
pub fn check_eigenvalue_condition(a: &DMatrix<f64>, tol: f64) -> Result<EigenCheck> {
    if !a.is_square() {
        return Err(Error::NonSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("matrix has non-finite entries".into()));
    }
    let n = a.nrows();
    let upper = (0..n).all(|i| (0..i).all(|j| a[(i, j)] == 0.0));
    let lower = (0..n).all(|i| (i + 1..n).all(|j| a[(i, j)] == 0.0));
    let eigen_real_parts: Vec<f64> = if upper || lower {
        (0..n).map(|i| a[(i, i)]).collect()
    } else {
        a.clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .collect()
    };
    let satisfied = eigen_real_parts.iter().all(|&re| re <= tol);
    Ok(EigenCheck {
        satisfied,
        eigen_real_parts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_fails_condition() {
        let c = check_eigenvalue_condition(&DMatrix::identity(3, 3), EIGEN_TOL).unwrap();
        assert!(!c.satisfied);
    }

    #[test]
    fn triangular_uses_diagonal() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 5.0, 0.0, 0.1]);
        let c = check_eigenvalue_condition(&a, EIGEN_TOL).unwrap();
        assert!(!c.satisfied);
        assert_eq!(c.eigen_real_parts, vec![-1.0, 0.1]);
    }

    #[test]
    fn general_matrix_uses_schur() {
        // rotation generator plus damping: eigenvalues -0.5 ± i
        let a = DMatrix::from_row_slice(2, 2, &[-0.5, 1.0, -1.0, -0.5]);
        let c = check_eigenvalue_condition(&a, EIGEN_TOL).unwrap();
        assert!(c.satisfied);
        for re in c.eigen_real_parts {
            assert!((re + 0.5).abs() < 1e-12);
        }
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(check_eigenvalue_condition(&a, EIGEN_TOL).unwrap().satisfied);
    }

    #[test]
    fn non_square_rejected() {
        assert!(matches!(
            check_eigenvalue_condition(&DMatrix::zeros(2, 3), EIGEN_TOL),
            Err(Error::NonSquare { .. })
        ));
    }

    #[test]
    fn envelope_probe_detects_slow_coupling() {
        let sys = LinearRadialSystem::new(DMatrix::zeros(1, 1), 1.0)
            .unwrap()
            .with_coupling(
                Coupling::InversePower {
                    matrix: DMatrix::from_element(1, 1, 1.0),
                    power: 1.0,
                },
                2.0,
            )
            .unwrap();
        assert!(!sys.envelope_check(1e6).coupling_ok);
        let sys = sys
            .with_coupling(
                Coupling::InversePower {
                    matrix: DMatrix::from_element(1, 1, 1.0),
                    power: 2.0,
                },
                2.0,
            )
            .unwrap();
        assert!(sys.envelope_check(1e6).ok());
    }
}
