use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::weyl::symmetric_traceless;

use super::config::CascadeConfig;
use super::seed_for;

const TRACE_TOL: f64 = 1e-12;

/// `Ĥ_ij(r) = h_ij r^{-ν}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HatHProfile {
    h: DMatrix<f64>,
    nu: f64,
}

impl HatHProfile {
    pub fn new(h: DMatrix<f64>, nu: f64) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::NonSquare {
                rows: h.nrows(),
                cols: h.ncols(),
            });
        }
        let scale = h.amax().max(1.0);
        if (&h - h.transpose()).amax() > TRACE_TOL * scale {
            return Err(Error::Config("hat_h amplitude must be symmetric".into()));
        }
        if h.trace().abs() > TRACE_TOL * scale * h.nrows() as f64 {
            return Err(Error::Config(format!(
                "hat_h amplitude must be traceless, trace = {:e}",
                h.trace()
            )));
        }
        Ok(Self { h, nu })
    }

    pub fn amplitude(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn at(&self, r: f64) -> DMatrix<f64> {
        &self.h * r.powf(-self.nu)
    }

    pub fn is_zero(&self) -> bool {
        self.h.iter().all(|&v| v == 0.0)
    }
}

/// The prescribed `Ĥ` for `cfg`: the configured amplitude, or a seeded
/// symmetric traceless matrix of unit Frobenius norm.
pub fn hat_h_profile(cfg: &CascadeConfig) -> Result<HatHProfile> {
    let n = cfg.n();
    let h = match &cfg.hat_h {
        Some(rows) => DMatrix::from_fn(n, n, |i, j| rows[i][j]),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed_for(cfg.seed, &["hatH"]));
            let s = symmetric_traceless(n, &mut rng);
            let m = DMatrix::from_fn(n, n, |i, j| s[[i, j]]);
            let norm = m.norm();
            if norm > 0.0 {
                m / norm
            } else {
                m
            }
        }
    };
    HatHProfile::new(h, cfg.nu as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_evaluation() {
        let cfg = CascadeConfig {
            d: 5,
            hat_h: Some(vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, -1.0, 0.0],
                vec![0.0, 0.0, 0.0],
            ]),
            ..Default::default()
        };
        let p = hat_h_profile(&cfg).unwrap();
        let h = p.at(10.0);
        assert!((h[(0, 0)] - 1e-4).abs() < 1e-18);
        assert!((h[(1, 1)] + 1e-4).abs() < 1e-18);
        assert_eq!(h[(2, 2)], 0.0);
    }

    #[test]
    fn seeded_default_is_traceless_unit() {
        let p = hat_h_profile(&CascadeConfig::new(6, 5, Default::default(), 3)).unwrap();
        assert!((p.amplitude().norm() - 1.0).abs() < 1e-12);
        assert!(p.amplitude().trace().abs() < 1e-12);
    }

    #[test]
    fn traced_amplitude_rejected() {
        let cfg = CascadeConfig {
            d: 4,
            hat_h: Some(vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
            ..Default::default()
        };
        assert!(hat_h_profile(&cfg).is_err());
    }
}
