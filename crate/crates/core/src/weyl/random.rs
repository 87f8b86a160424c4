use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::frame::FrameConvention;

use super::decompose::reconstruct;
use super::parts::IrreducibleParts;
use super::transverse::{delta, TMatrix, TRank3, TRank4, TVector};
use super::WeylTensor;

fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen_range(-1.0..=1.0)
}

pub(crate) fn symmetric_traceless<R: Rng + ?Sized>(n: usize, rng: &mut R) -> TMatrix {
    let raw = TMatrix::from_fn(n, |_| uniform(rng));
    let tr = raw.trace() / n as f64;
    TMatrix::from_fn(n, |[i, j]| {
        0.5 * (raw[[i, j]] + raw[[j, i]]) - tr * delta(i, j)
    })
}

fn antisymmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> TMatrix {
    let raw = TMatrix::from_fn(n, |_| uniform(rng));
    TMatrix::from_fn(n, |[i, j]| 0.5 * (raw[[i, j]] - raw[[j, i]]))
}

/// Projects onto rank-3 tensors antisymmetric in the last pair, with zero
/// cyclic sum and zero trace `δ^{ij} T_ijk`.
pub(crate) fn project_rank3(raw: &TRank3) -> TRank3 {
    let n = raw.n();
    let anti = TRank3::from_fn(n, |[i, j, k]| 0.5 * (raw[[i, j, k]] - raw[[i, k, j]]));
    let cyclic = TRank3::from_fn(n, |[i, j, k]| {
        anti[[i, j, k]] - (anti[[i, j, k]] + anti[[j, k, i]] + anti[[k, i, j]]) / 3.0
    });
    if n < 2 {
        return cyclic;
    }
    let tau: Vec<f64> = (0..n)
        .map(|k| (0..n).map(|i| cyclic[[i, i, k]]).sum())
        .collect();
    let c = 1.0 / (n as f64 - 1.0);
    TRank3::from_fn(n, |[i, j, k]| {
        cyclic[[i, j, k]] - c * (delta(i, j) * tau[k] - delta(i, k) * tau[j])
    })
}

fn random_rank3<R: Rng + ?Sized>(n: usize, rng: &mut R) -> TRank3 {
    project_rank3(&TRank3::from_fn(n, |_| uniform(rng)))
}

/// Traceless algebraic curvature tensor in `n >= 3` dimensions, built from a
/// sum of `K_ik K_jl - K_il K_jk` terms with the Ricci part removed.
fn random_transverse_weyl<R: Rng + ?Sized>(n: usize, rng: &mut R) -> TRank4 {
    let mut r = TRank4::zeros(n);
    for _ in 0..3 {
        let raw = TMatrix::from_fn(n, |_| uniform(rng));
        let k = TMatrix::from_fn(n, |[i, j]| 0.5 * (raw[[i, j]] + raw[[j, i]]));
        for [i, j, a, b] in r.clone().indices() {
            r[[i, j, a, b]] += k[[i, a]] * k[[j, b]] - k[[i, b]] * k[[j, a]];
        }
    }
    let ricci = TMatrix::from_fn(n, |[j, l]| (0..n).map(|i| r[[i, j, i, l]]).sum());
    let scalar = ricci.trace();
    let nf = n as f64;
    let mut w = TRank4::from_fn(n, |[i, j, k, l]| {
        let ric = (delta(i, k) * ricci[[j, l]]
            - delta(i, l) * ricci[[j, k]]
            - delta(j, k) * ricci[[i, l]]
            + delta(j, l) * ricci[[i, k]])
            / (nf - 2.0);
        let sc = scalar * (delta(i, k) * delta(j, l) - delta(i, l) * delta(j, k))
            / ((nf - 1.0) * (nf - 2.0));
        r[[i, j, k, l]] - ric + sc
    });
    // normalise to unit scale
    let m = w.max_abs();
    if m > 1e-8 {
        w.scale(1.0 / m);
    } else {
        w.set_zero();
    }
    w
}

/// Random parts satisfying every invariant, entries of order one.
pub fn random_parts<R: Rng + ?Sized>(d: usize, rng: &mut R) -> IrreducibleParts {
    let frame = FrameConvention::new(d).expect("d >= 4");
    let n = frame.transverse();
    let mut p = IrreducibleParts::zeros(frame);
    p.hat_h = symmetric_traceless(n, rng);
    p.hat_v = TVector::from_fn(n, |_| uniform(rng));
    p.a = antisymmetric(n, rng);
    p.bar_r = uniform(rng);
    p.check_v = TVector::from_fn(n, |_| uniform(rng));
    p.check_h = symmetric_traceless(n, rng);
    if d > 4 {
        p.hat_t = random_rank3(n, rng);
        p.check_t = random_rank3(n, rng);
        p.bar_s = symmetric_traceless(n, rng);
        if n == 3 {
            // 3-dimensional traceless curvature tensors vanish identically
            p.bar_c = TRank4::zeros(n);
        } else {
            p.bar_c = random_transverse_weyl(n, rng);
        }
    }
    p
}

/// Deterministic random Weyl tensor in dimension `d`.
pub fn random_weyl(d: usize, seed: u64) -> Result<WeylTensor> {
    FrameConvention::new(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    reconstruct(&random_parts(d, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::parts::{rank3_defects, rank4_defects};

    #[test]
    fn projections_satisfy_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=6 {
            let t = random_rank3(n, &mut rng);
            let (a, tr, cyc) = rank3_defects(&t);
            assert!(a < 1e-14 && tr < 1e-14 && cyc < 1e-14, "n = {n}");
            if n >= 3 {
                let w = random_transverse_weyl(n, &mut rng);
                let (s, tr) = rank4_defects(&w);
                assert!(s < 1e-13 && tr < 1e-13);
            }
        }
    }

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(random_weyl(6, 42).unwrap(), random_weyl(6, 42).unwrap());
        assert_ne!(random_weyl(6, 42).unwrap(), random_weyl(6, 43).unwrap());
    }

    #[test]
    fn two_dimensional_rank3_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert!(random_rank3(2, &mut rng).max_abs() < 1e-15);
    }
}
