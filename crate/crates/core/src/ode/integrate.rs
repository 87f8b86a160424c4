//! Adaptive Dormand–Prince 5(4) integration in `s = ln r`.
//!
//! In the log variable the system reads `dy/ds = (A + r B(r)) y + r b(r)`, so
//! power laws become exponentials and the step count scales with
//! `ln(r_max / r0)`.

use std::f64::consts::LN_10;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::system::LinearRadialSystem;
use super::trajectory::{IntegrationStats, Trajectory};

/// State norm beyond which the integration is truncated as divergent.
pub const OVERFLOW_GUARD: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Largest step in `ln r`.
    pub max_step: f64,
    /// Output samples per decade of `r`.
    pub samples_per_decade: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-14,
            max_step: 0.25,
            samples_per_decade: 50,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Workspace {
    k: [DVector<f64>; 7],
    tmp: DVector<f64>,
    scratch: DVector<f64>,
    y_new: DVector<f64>,
}

/// Integrates `sys` from `r0` to `r_max`, sampling on a log grid.
pub fn integrate(
    sys: &LinearRadialSystem,
    y0: &DVector<f64>,
    r_max: f64,
    tol: &Tolerances,
) -> Result<Trajectory> {
    let n = sys.dim();
    if y0.len() != n {
        return Err(Error::Config(format!(
            "initial state has length {}, system has {n}",
            y0.len()
        )));
    }
    if r_max.is_nan() || r_max <= sys.r0() {
        return Err(Error::Config(format!(
            "r_max = {r_max} must exceed r0 = {}",
            sys.r0()
        )));
    }
    if !(tol.rtol > 0.0 && tol.atol >= 0.0 && tol.max_step > 0.0 && tol.samples_per_decade > 0) {
        return Err(Error::Config("tolerances must be positive".into()));
    }

    let s0 = sys.r0().ln();
    let s_end = r_max.ln();
    let ds = LN_10 / tol.samples_per_decade as f64;
    let n_samples = ((s_end - s0) / ds).ceil() as usize;
    let sample_at = |k: usize| {
        if k >= n_samples {
            s_end
        } else {
            s0 + k as f64 * ds
        }
    };

    let mut ws = Workspace {
        k: std::array::from_fn(|_| DVector::zeros(n)),
        tmp: DVector::zeros(n),
        scratch: DVector::zeros(n),
        y_new: DVector::zeros(n),
    };
    let mut stats = IntegrationStats {
        rtol: tol.rtol,
        atol: tol.atol,
        ..Default::default()
    };
    let mut traj = Trajectory::new(stats);
    traj.envelope = Some(sys.envelope_check(r_max));

    let mut s = s0;
    let mut y = y0.clone();
    sys.rhs_log(s, &y, &mut ws.k[0], &mut ws.scratch);
    stats.rhs_evals += 1;
    traj.push(s, y.clone(), ws.k[0].clone());

    let mut next = 1usize;
    let mut h = tol.max_step.min(ds);
    let min_step = 1e-13 * (1.0 + s_end.abs());

    while next <= n_samples {
        let target = sample_at(next);
        let remaining = target - s;
        let hit = h >= remaining;
        let step = if hit { remaining } else { h };

        let err = dopri_step(sys, s, &y, step, &mut ws, tol);
        stats.rhs_evals += 6;
        if err <= 1.0 {
            stats.accepted_steps += 1;
            s = if hit { target } else { s + step };
            std::mem::swap(&mut y, &mut ws.y_new);
            // FSAL: k7 is the slope at the new point
            ws.k.swap(0, 6);
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            // a short step that only lands on a sample point should not shrink h
            h = (if hit { h.max(step * fac) } else { step * fac }).min(tol.max_step);
            let norm = y.norm();
            if !norm.is_finite() || norm > OVERFLOW_GUARD {
                if y.iter().all(|v| v.is_finite()) {
                    traj.push(s, y.clone(), ws.k[0].clone());
                }
                traj.diverged = true;
                break;
            }
            if hit {
                traj.push(s, y.clone(), ws.k[0].clone());
                next += 1;
            }
        } else {
            stats.rejected_steps += 1;
            h = step * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            if h < min_step {
                return Err(Error::Stiffness {
                    r: s.exp(),
                    step: h,
                });
            }
        }
    }
    traj.stats = stats;
    Ok(traj)
}

/// One Dormand–Prince step. Leaves the 5th-order solution in `ws.y_new`,
/// the end-point slope in `ws.k[6]` and returns the scaled error norm.
fn dopri_step(
    sys: &LinearRadialSystem,
    s: f64,
    y: &DVector<f64>,
    h: f64,
    ws: &mut Workspace,
    tol: &Tolerances,
) -> f64 {
    let Workspace {
        k,
        tmp,
        scratch,
        y_new,
    } = ws;
    let [k1, k2, k3, k4, k5, k6, k7] = k;

    tmp.copy_from(y);
    tmp.axpy(h * A21, k1, 1.0);
    sys.rhs_log(s + C2 * h, tmp, k2, scratch);

    tmp.copy_from(y);
    tmp.axpy(h * A31, k1, 1.0);
    tmp.axpy(h * A32, k2, 1.0);
    sys.rhs_log(s + C3 * h, tmp, k3, scratch);

    tmp.copy_from(y);
    tmp.axpy(h * A41, k1, 1.0);
    tmp.axpy(h * A42, k2, 1.0);
    tmp.axpy(h * A43, k3, 1.0);
    sys.rhs_log(s + C4 * h, tmp, k4, scratch);

    tmp.copy_from(y);
    tmp.axpy(h * A51, k1, 1.0);
    tmp.axpy(h * A52, k2, 1.0);
    tmp.axpy(h * A53, k3, 1.0);
    tmp.axpy(h * A54, k4, 1.0);
    sys.rhs_log(s + C5 * h, tmp, k5, scratch);

    tmp.copy_from(y);
    tmp.axpy(h * A61, k1, 1.0);
    tmp.axpy(h * A62, k2, 1.0);
    tmp.axpy(h * A63, k3, 1.0);
    tmp.axpy(h * A64, k4, 1.0);
    tmp.axpy(h * A65, k5, 1.0);
    sys.rhs_log(s + h, tmp, k6, scratch);

    y_new.copy_from(y);
    y_new.axpy(h * A71, k1, 1.0);
    y_new.axpy(h * A73, k3, 1.0);
    y_new.axpy(h * A74, k4, 1.0);
    y_new.axpy(h * A75, k5, 1.0);
    y_new.axpy(h * A76, k6, 1.0);
    sys.rhs_log(s + h, y_new, k7, scratch);

    let n = y.len();
    if n == 0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
        let q = e / sc;
        acc += q * q;
    }
    let err = (acc / n as f64).sqrt();
    if err.is_finite() {
        err
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::system::{Coupling, Source};
    use nalgebra::DMatrix;

    fn scalar(a: f64) -> LinearRadialSystem {
        LinearRadialSystem::new(DMatrix::from_element(1, 1, a), 1.0).unwrap()
    }

    fn max_rel_err(t: &Trajectory, exact: impl Fn(f64) -> f64) -> f64 {
        t.radii()
            .iter()
            .zip(t.states())
            .skip(1)
            .map(|(&r, y)| ((y[0] - exact(r)) / exact(r)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn inverse_r_decay() {
        let t = integrate(
            &scalar(-1.0),
            &DVector::from_element(1, 1.0),
            1e6,
            &Tolerances::default(),
        )
        .unwrap();
        assert!(max_rel_err(&t, |r| 1.0 / r) < 1e-8);
        assert!(!t.diverged);
        assert!(t.radii().windows(2).all(|w| w[1] > w[0]));
        assert!((t.r_range().1 - 1e6).abs() < 1e-3);
    }

    #[test]
    fn log_over_r_with_source() {
        let sys = scalar(-1.0)
            .with_source(
                Source::InversePower {
                    vector: DVector::from_element(1, 1.0),
                    power: 2.0,
                },
                2.0,
            )
            .unwrap();
        let t = integrate(&sys, &DVector::zeros(1), 1e6, &Tolerances::default()).unwrap();
        assert!(max_rel_err(&t, |r| r.ln() / r) < 1e-6);
    }

    #[test]
    fn zero_data_zero_trajectory() {
        let sys =
            LinearRadialSystem::new(DMatrix::from_row_slice(2, 2, &[-1.0, 0.3, 0.0, 0.0]), 1.0)
                .unwrap()
                .with_coupling(
                    Coupling::InversePower {
                        matrix: DMatrix::from_element(2, 2, 0.5),
                        power: 2.0,
                    },
                    2.0,
                )
                .unwrap();
        let t = integrate(&sys, &DVector::zeros(2), 1e6, &Tolerances::default()).unwrap();
        assert!(t.states().iter().all(|y| y.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn overflow_truncates_with_flag() {
        let t = integrate(
            &scalar(40.0),
            &DVector::from_element(1, 1.0),
            1e6,
            &Tolerances::default(),
        )
        .unwrap();
        assert!(t.diverged);
        assert!(t.r_range().1 < 1e6);
        assert!(t.states().iter().all(|y| y[0].is_finite()));
    }

    #[test]
    fn bad_arguments_rejected() {
        let sys = scalar(-1.0);
        assert!(integrate(&sys, &DVector::zeros(2), 10.0, &Tolerances::default()).is_err());
        assert!(integrate(&sys, &DVector::zeros(1), 0.5, &Tolerances::default()).is_err());
    }

    #[test]
    fn hermite_interpolation_between_samples() {
        let t = integrate(
            &scalar(-2.0),
            &DVector::from_element(1, 1.0),
            1e3,
            &Tolerances::default(),
        )
        .unwrap();
        for r in [1.37, 12.9, 555.5] {
            let y = t.interpolate(r).unwrap()[0];
            assert!((y * r * r - 1.0).abs() < 1e-6, "r = {r}: {y}");
        }
        assert!(t.interpolate(2e3).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let t = integrate(
            &scalar(-1.0),
            &DVector::from_element(1, 1.0),
            10.0,
            &Tolerances::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("r,y_0"));
        assert_eq!(lines.count(), t.len());
    }
}
