//! Least-squares power-law fits in log–log space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::trajectory::{Selector, Trajectory};

/// Values below this magnitude are treated as numerically zero.
pub const DEFAULT_FLOOR: f64 = 1e-140;
pub const MIN_FIT_SAMPLES: usize = 20;
/// Half-width of the band around zero exponent classified as bounded-nonzero.
pub const BOUNDED_BAND: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitWindow {
    /// The last `decades` decades of the sampled range.
    TailDecades(f64),
    Range {
        lo: f64,
        hi: f64,
    },
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow::TailDecades(2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub window: FitWindow,
    pub floor: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            window: FitWindow::default(),
            floor: DEFAULT_FLOOR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayClass {
    Decaying,
    BoundedNonzero,
    Growing,
    BelowFloor,
}

impl DecayClass {
    pub fn as_str(self) -> &'static str {
        match self {
            DecayClass::Decaying => "decaying",
            DecayClass::BoundedNonzero => "bounded-nonzero",
            DecayClass::Growing => "growing",
            DecayClass::BelowFloor => "below-floor",
        }
    }

    fn from_exponent(alpha: f64) -> Self {
        if alpha < -BOUNDED_BAND {
            DecayClass::Growing
        } else if alpha <= BOUNDED_BAND {
            DecayClass::BoundedNonzero
        } else {
            DecayClass::Decaying
        }
    }
}

/// Fitted `|y| ~ C r^{-exponent}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayEstimate {
    /// `None` when every sample in the window is below the floor.
    pub exponent: Option<f64>,
    /// RMS residual of the fit in natural-log units.
    pub residual: f64,
    pub window: (f64, f64),
    pub class: DecayClass,
    pub samples: usize,
}

/// Slope and intercept of the least-squares line through `(x, y)` points.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Fits `|values| ~ r^{-α}` over the chosen window.
pub fn fit_power_law(radii: &[f64], values: &[f64], opts: &FitOptions) -> Result<DecayEstimate> {
    assert_eq!(radii.len(), values.len());
    let Some(&r_hi_all) = radii.last() else {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_SAMPLES,
            found: 0,
        });
    };
    let (lo, hi) = match opts.window {
        FitWindow::TailDecades(dec) => (r_hi_all / 10f64.powf(dec), r_hi_all),
        FitWindow::Range { lo, hi } => (lo, hi),
    };
    let slack = 1e-9;
    let in_window: Vec<(f64, f64)> = radii
        .iter()
        .zip(values)
        .filter(|(&r, _)| r >= lo * (1.0 - slack) && r <= hi * (1.0 + slack))
        .map(|(&r, &v)| (r, v.abs()))
        .collect();
    if in_window.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_SAMPLES,
            found: in_window.len(),
        });
    }
    let usable: Vec<(f64, f64)> = in_window
        .iter()
        .filter(|(_, v)| *v >= opts.floor && v.is_finite())
        .map(|&(r, v)| (r.ln(), v.ln()))
        .collect();
    if usable.is_empty() {
        return Ok(DecayEstimate {
            exponent: None,
            residual: 0.0,
            window: (lo, hi),
            class: DecayClass::BelowFloor,
            samples: 0,
        });
    }
    if usable.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_SAMPLES,
            found: usable.len(),
        });
    }
    let (slope, icpt) = least_squares_slope(&usable);
    let rss: f64 = usable
        .iter()
        .map(|&(x, y)| (y - (icpt + slope * x)).powi(2))
        .sum();
    let residual = (rss / usable.len() as f64).sqrt();
    let alpha = -slope;
    Ok(DecayEstimate {
        exponent: Some(alpha),
        residual,
        window: (lo, hi),
        class: DecayClass::from_exponent(alpha),
        samples: usable.len(),
    })
}

/// Decay exponent of one component (or a norm) of a trajectory.
pub fn estimate_decay_exponent(
    traj: &Trajectory,
    sel: &Selector,
    opts: &FitOptions,
) -> Result<DecayEstimate> {
    fit_power_law(traj.radii(), &traj.select(sel), opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
        let m = ((hi / lo).log10() * per_decade as f64).round() as usize;
        (0..=m)
            .map(|k| lo * 10f64.powf(k as f64 / per_decade as f64))
            .collect()
    }

    #[test]
    fn pure_power_law() {
        let r = grid(1.0, 1e6, 50);
        let y: Vec<f64> = r.iter().map(|r| r.powi(-3)).collect();
        let e = fit_power_law(&r, &y, &FitOptions::default()).unwrap();
        assert!((e.exponent.unwrap() - 3.0).abs() < 0.01);
        assert_eq!(e.class, DecayClass::Decaying);
        assert!(e.residual < 1e-10);
    }

    #[test]
    fn subleading_term_is_negligible() {
        let r = grid(1.0, 1e6, 50);
        let y: Vec<f64> = r.iter().map(|r| (2.0 + 1.0 / r) / (r * r)).collect();
        let opts = FitOptions {
            window: FitWindow::Range { lo: 1e4, hi: 1e6 },
            ..Default::default()
        };
        assert!((fit_power_law(&r, &y, &opts).unwrap().exponent.unwrap() - 2.0).abs() < 0.02);
    }

    #[test]
    fn classification_bands() {
        let r = grid(1.0, 1e6, 50);
        let flat: Vec<f64> = r.iter().map(|_| 1.0).collect();
        assert_eq!(
            fit_power_law(&r, &flat, &FitOptions::default())
                .unwrap()
                .class,
            DecayClass::BoundedNonzero
        );
        let grow: Vec<f64> = r.iter().map(|r| r.sqrt()).collect();
        assert_eq!(
            fit_power_law(&r, &grow, &FitOptions::default())
                .unwrap()
                .class,
            DecayClass::Growing
        );
        let zero: Vec<f64> = r.iter().map(|_| 0.0).collect();
        let e = fit_power_law(&r, &zero, &FitOptions::default()).unwrap();
        assert_eq!(e.class, DecayClass::BelowFloor);
        assert!(e.exponent.is_none());
    }

    #[test]
    fn too_few_samples() {
        let r = grid(1.0, 1e6, 2);
        let y: Vec<f64> = r.iter().map(|r| 1.0 / r).collect();
        assert!(matches!(
            fit_power_law(&r, &y, &FitOptions::default()),
            Err(Error::InsufficientSamples { .. })
        ));
        // partially below the floor
        let r = grid(1.0, 1e6, 50);
        let y: Vec<f64> = r
            .iter()
            .enumerate()
            .map(|(k, _)| if k % 10 == 0 { 1.0 } else { 0.0 })
            .collect();
        assert!(fit_power_law(&r, &y, &FitOptions::default()).is_err());
    }
}
