//! Brute-force references that share no code with `weyl::decompose`:
//! every part is computed from the full `d⁴` component array by explicit
//! symmetrization and trace subtraction, and random tensors are built from
//! curvature-like sums with the Lorentzian frame metric.

use rand::Rng;

use crate::error::Result;
use crate::frame::FrameConvention;
use crate::weyl::{IrreducibleParts, TMatrix, TRank3, TRank4, TVector, WeylTensor};

fn kd(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

struct Full {
    d: usize,
    w: Vec<f64>,
}

impl Full {
    fn of(c: &WeylTensor) -> Self {
        let d = c.dim();
        let mut w = vec![0.0; d.pow(4)];
        for a in 0..d {
            for b in 0..d {
                for e in 0..d {
                    for f in 0..d {
                        w[((a * d + b) * d + e) * d + f] = c.get([a, b, e, f]);
                    }
                }
            }
        }
        Self { d, w }
    }

    fn at(&self, a: usize, b: usize, c: usize, e: usize) -> f64 {
        let d = self.d;
        self.w[((a * d + b) * d + c) * d + e]
    }
}

fn sym_traceless(n: usize, m: impl Fn(usize, usize) -> f64) -> TMatrix {
    let tr: f64 = (0..n).map(|i| m(i, i)).sum::<f64>() / n as f64;
    TMatrix::from_fn(n, |[i, j]| 0.5 * (m(i, j) + m(j, i)) - tr * kd(i, j))
}

/// Vector and trace-free rank-3 parts of `K_ijk = C_{lead, i, j, k}`.
fn weight_one(full: &Full, lead: usize) -> (TVector, TRank3) {
    let n = full.d - 2;
    let k = |i: usize, j: usize, l: usize| full.at(lead, i + 2, j + 2, l + 2);
    // antisymmetrize the last pair, then drop the totally antisymmetric piece
    let anti = TRank3::from_fn(n, |[i, j, l]| 0.5 * (k(i, j, l) - k(i, l, j)));
    let mut cyc = TRank3::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let total = anti[[i, j, l]] + anti[[j, l, i]] + anti[[l, i, j]];
                cyc[[i, j, l]] = anti[[i, j, l]] - total / 3.0;
            }
        }
    }
    let mut tau = vec![0.0; n];
    for (l, t) in tau.iter_mut().enumerate() {
        for i in 0..n {
            *t += cyc[[i, i, l]];
        }
    }
    let m = n as f64 - 1.0;
    let v = TVector::from_fn(n, |[l]| tau[l] / m);
    let t = TRank3::from_fn(n, |[i, j, l]| {
        cyc[[i, j, l]] - (kd(i, j) * v[[l]] - kd(i, l) * v[[j]])
    });
    (v, t)
}

/// Reference decomposition by exhaustive loops over the full array.
pub fn oracle_decompose(c: &WeylTensor) -> IrreducibleParts {
    let full = Full::of(c);
    let d = full.d;
    let n = d - 2;
    let frame = c.frame();
    let mut p = IrreducibleParts::zeros(frame);

    p.hat_h = sym_traceless(n, |i, j| full.at(0, i + 2, 0, j + 2));
    p.check_h = sym_traceless(n, |i, j| full.at(1, i + 2, 1, j + 2));
    (p.hat_v, p.hat_t) = weight_one(&full, 0);
    (p.check_v, p.check_t) = weight_one(&full, 1);

    // C_0i1j = (A_ij - R̄_ij) / 2
    let m = |i: usize, j: usize| full.at(0, i + 2, 1, j + 2);
    p.a = TMatrix::from_fn(n, |[i, j]| m(i, j) - m(j, i));
    let ricci = TMatrix::from_fn(n, |[i, j]| -(m(i, j) + m(j, i)));
    p.bar_r = ricci.trace();
    p.bar_s = TMatrix::from_fn(n, |[i, j]| ricci[[i, j]] - p.bar_r * kd(i, j) / n as f64);

    if n >= 3 {
        let q = |i: usize, j: usize, k: usize, l: usize| full.at(i + 2, j + 2, k + 2, l + 2);
        let rho = TMatrix::from_fn(n, |[j, l]| (0..n).map(|i| q(i, j, i, l)).sum());
        let rs = rho.trace();
        let nf = n as f64;
        p.bar_c = TRank4::from_fn(n, |[i, j, k, l]| {
            q(i, j, k, l)
                - (kd(i, k) * rho[[j, l]] - kd(i, l) * rho[[j, k]] - kd(j, k) * rho[[i, l]]
                    + kd(j, l) * rho[[i, k]])
                    / (nf - 2.0)
                + rs * (kd(i, k) * kd(j, l) - kd(i, l) * kd(j, k)) / ((nf - 1.0) * (nf - 2.0))
        });
    }
    p
}

/// A random Weyl tensor built as the trace-free part (with the null-frame
/// metric) of `Σ K_ac K_bd - K_ad K_bc` for random symmetric `K`, scaled to
/// unit max-norm.
pub fn oracle_random_weyl<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<WeylTensor> {
    let frame = FrameConvention::new(d)?;
    let g = |a: usize, b: usize| frame.metric(a, b);
    let idx = |a: usize, b: usize, c: usize, e: usize| ((a * d + b) * d + c) * d + e;
    let mut r = vec![0.0; d.pow(4)];
    for _ in 0..3 {
        let mut k = vec![0.0; d * d];
        for a in 0..d {
            for b in a..d {
                let v: f64 = rng.gen_range(-1.0..=1.0);
                k[a * d + b] = v;
                k[b * d + a] = v;
            }
        }
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        r[idx(a, b, c, e)] +=
                            k[a * d + c] * k[b * d + e] - k[a * d + e] * k[b * d + c];
                    }
                }
            }
        }
    }
    let ginv = |a: usize, b: usize| frame.inverse_metric(a, b);
    let mut ric = vec![0.0; d * d];
    for b in 0..d {
        for e in 0..d {
            let mut s = 0.0;
            for a in 0..d {
                for c in 0..d {
                    s += ginv(a, c) * r[idx(a, b, c, e)];
                }
            }
            ric[b * d + e] = s;
        }
    }
    let mut scalar = 0.0;
    for b in 0..d {
        for e in 0..d {
            scalar += ginv(b, e) * ric[b * d + e];
        }
    }
    let df = d as f64;
    let mut entries = Vec::new();
    let mut max = 0.0f64;
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    let w = r[idx(a, b, c, e)]
                        - (g(a, c) * ric[b * d + e]
                            - g(a, e) * ric[b * d + c]
                            - g(b, c) * ric[a * d + e]
                            + g(b, e) * ric[a * d + c])
                            / (df - 2.0)
                        + scalar * (g(a, c) * g(b, e) - g(a, e) * g(b, c))
                            / ((df - 1.0) * (df - 2.0));
                    max = max.max(w.abs());
                    entries.push(([a, b, c, e], w));
                }
            }
        }
    }
    let scale = if max > 0.0 { 1.0 / max } else { 1.0 };
    // keep one representative per canonical slot
    let reps = entries
        .into_iter()
        .filter(|([a, b, c, e], _)| a < b && c < e && (a, b) <= (c, e));
    WeylTensor::from_entries(d, reps.map(|(i, w)| (i, w * scale)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::{decompose, random_weyl, validate_weyl};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_tensors_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 4..=7 {
            let c = oracle_random_weyl(d, &mut rng).unwrap();
            assert!(validate_weyl(&c).is_empty(), "d={d}: {}", validate_weyl(&c));
            assert!((c.max_abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn agrees_with_decompose() {
        for d in 4..=7 {
            let c = random_weyl(d, 9).unwrap();
            let diff = oracle_decompose(&c).max_abs_diff(&decompose(&c).unwrap());
            assert!(diff < 1e-12, "d={d}: {diff}");
        }
    }
}
