//! Conversion between frame components and boost-weight irreducible parts.

use crate::error::{Error, Result};

use super::parts::IrreducibleParts;
use super::transverse::{delta, TMatrix, TRank3, TRank4, TVector};
use super::validate::{validate_weyl, IDENTITY_TOL};
use super::WeylTensor;

// transverse index i <-> frame index i + 2
const T0: usize = 2;

/// Splits a valid Weyl tensor into its ten irreducible parts.
///
/// For `d = 4` the rank-3 parts, `S̄` and `C̄` are returned as exact zeros.
pub fn decompose(c: &WeylTensor) -> Result<IrreducibleParts> {
    let report = validate_weyl(c);
    if !report.is_empty() {
        return Err(Error::Validation(report));
    }
    let frame = c.frame();
    let d = frame.dim();
    let n = frame.transverse();
    let dm3 = (d - 3) as f64;
    let tol = IDENTITY_TOL * c.max_abs().max(1.0);

    let mut p = IrreducibleParts::zeros(frame);
    p.hat_h = TMatrix::from_fn(n, |[i, j]| c.get([0, i + T0, 0, j + T0]));
    p.check_h = TMatrix::from_fn(n, |[i, j]| c.get([1, i + T0, 1, j + T0]));

    // boost weight ±1: C_010i = -(d-3) v̂_i, cross-checked against the trace of C_0ijk
    for (lead, other, v, t, name) in [
        (0usize, 1usize, &mut p.hat_v, &mut p.hat_t, "hatv"),
        (1, 0, &mut p.check_v, &mut p.check_t, "checkv"),
    ] {
        *v = TVector::from_fn(n, |[i]| -c.get([lead, other, lead, i + T0]) / dm3);
        for i in 0..n {
            let via_trace: f64 = (0..n)
                .map(|j| c.get([lead, j + T0, j + T0, i + T0]))
                .sum::<f64>()
                / dm3;
            if (via_trace - v[[i]]).abs() > tol {
                return Err(Error::Inconsistent(format!(
                    "{name}_{i}: -C_{lead}{other}{lead}i/(d-3) = {} but trace gives {via_trace}",
                    v[[i]]
                )));
            }
        }
        if d > 4 {
            let vv = v.clone();
            *t = TRank3::from_fn(n, |[i, j, k]| {
                c.get([lead, i + T0, j + T0, k + T0]) - delta(i, j) * vv[[k]]
                    + delta(i, k) * vv[[j]]
            });
        }
    }

    p.a = TMatrix::from_fn(n, |[i, j]| c.get([0, 1, i + T0, j + T0]));
    p.bar_r = -2.0 * c.get([0, 1, 0, 1]);

    // R̄_ij = C^k_ikj over the transverse block
    let ricci = TMatrix::from_fn(n, |[i, j]| {
        (0..n)
            .map(|k| c.get([k + T0, i + T0, k + T0, j + T0]))
            .sum()
    });
    if (ricci.trace() - p.bar_r).abs() > tol {
        return Err(Error::Inconsistent(format!(
            "barR = -2 C_0101 = {} but the transverse trace gives {}",
            p.bar_r,
            ricci.trace()
        )));
    }
    if d > 4 {
        let nf = n as f64;
        p.bar_s = TMatrix::from_fn(n, |[i, j]| ricci[[i, j]] - p.bar_r * delta(i, j) / nf);
        let rb = p.bar_ricci();
        let bar_r = p.bar_r;
        p.bar_c = TRank4::from_fn(n, |[i, j, k, l]| {
            c.get([i + T0, j + T0, k + T0, l + T0]) - ricci_part(&rb, bar_r, d, [i, j, k, l])
        });
    }
    Ok(p)
}

/// Assembles the Weyl tensor with the given irreducible parts.
pub fn reconstruct(p: &IrreducibleParts) -> Result<WeylTensor> {
    p.check_invariants()?;
    let frame = p.frame;
    let d = frame.dim();
    let n = frame.transverse();
    let dm3 = (d - 3) as f64;
    let mut c = WeylTensor::zeros(frame);

    // boost weight 0 scalars and A
    c.set([0, 1, 0, 1], -0.5 * p.bar_r);
    let rb = p.bar_ricci();
    for i in 0..n {
        c.set([0, 1, 0, i + T0], -dm3 * p.hat_v[[i]]);
        c.set([1, 0, 1, i + T0], -dm3 * p.check_v[[i]]);
        for j in 0..n {
            c.set([0, i + T0, 0, j + T0], p.hat_h[[i, j]]);
            c.set([1, i + T0, 1, j + T0], p.check_h[[i, j]]);
            if i < j {
                c.set([0, 1, i + T0, j + T0], p.a[[i, j]]);
            }
            c.set([0, i + T0, 1, j + T0], 0.5 * p.a[[i, j]] - 0.5 * rb[[i, j]]);
            for k in j + 1..n {
                c.set(
                    [0, i + T0, j + T0, k + T0],
                    delta(i, j) * p.hat_v[[k]] - delta(i, k) * p.hat_v[[j]] + p.hat_t[[i, j, k]],
                );
                c.set(
                    [1, i + T0, j + T0, k + T0],
                    delta(i, j) * p.check_v[[k]] - delta(i, k) * p.check_v[[j]]
                        + p.check_t[[i, j, k]],
                );
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                for l in k + 1..n {
                    let v = if d == 4 {
                        0.5 * p.bar_r * (delta(i, k) * delta(j, l) - delta(i, l) * delta(j, k))
                    } else {
                        p.bar_c[[i, j, k, l]] + ricci_part(&rb, p.bar_r, d, [i, j, k, l])
                    };
                    c.set([i + T0, j + T0, k + T0, l + T0], v);
                }
            }
        }
    }
    Ok(c)
}

/// `2/(d-4) (δ_i[k R̄_l]j - δ_j[k R̄_l]i) - 2/((d-3)(d-4)) R̄ δ_i[k δ_l]j`, for `d > 4`.
pub(crate) fn ricci_part(rb: &TMatrix, bar_r: f64, d: usize, [i, j, k, l]: [usize; 4]) -> f64 {
    debug_assert!(d > 4);
    let dm4 = (d - 4) as f64;
    let dm3 = (d - 3) as f64;
    let ricci = (delta(i, k) * rb[[l, j]] - delta(i, l) * rb[[k, j]] - delta(j, k) * rb[[l, i]]
        + delta(j, l) * rb[[k, i]])
        / dm4;
    let scalar = bar_r * (delta(i, k) * delta(l, j) - delta(i, l) * delta(k, j)) / (dm3 * dm4);
    ricci - scalar
}
