//! Boundedness verdicts for systems satisfying the eigenvalue hypothesis,
//! and the random systems used to exercise them.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

use super::fit::{fit_power_law, FitOptions, BOUNDED_BAND};
use super::integrate::{integrate, Tolerances};
use super::system::{check_eigenvalue_condition, Coupling, LinearRadialSystem, Source, EIGEN_TOL};
use super::trajectory::{Selector, Trajectory};

/// Minimum envelope order for the boundedness conclusion to apply.
pub const MIN_DECAY_ORDER: f64 = 2.0;

#[derive(Debug, Clone, Serialize)]
pub struct Boundedness {
    pub bounded: bool,
    pub sup_norm: f64,
    /// Log-log slope of `‖y‖` over the tail window (positive means growth).
    pub tail_slope: f64,
}

/// Sup and tail slope of `‖y‖` over an existing trajectory.
pub fn boundedness_of(traj: &Trajectory, opts: &FitOptions) -> Result<Boundedness> {
    let sup_norm = traj.sup(&Selector::Norm);
    if traj.diverged || !sup_norm.is_finite() {
        return Ok(Boundedness {
            bounded: false,
            sup_norm: f64::INFINITY,
            tail_slope: f64::INFINITY,
        });
    }
    let est = fit_power_law(traj.radii(), &traj.select(&Selector::Norm), opts)?;
    let tail_slope = est.exponent.map_or(f64::NEG_INFINITY, |a| -a);
    Ok(Boundedness {
        bounded: tail_slope <= BOUNDED_BAND,
        sup_norm,
        tail_slope,
    })
}

/// Integrates `sys` from `y0` and decides boundedness. Fails if the
/// hypotheses do not hold.
pub fn prop1_verify(
    sys: &LinearRadialSystem,
    y0: &DVector<f64>,
    r_max: f64,
) -> Result<Boundedness> {
    prop1_verify_with(sys, y0, r_max, &Tolerances::default())
}

pub fn prop1_verify_with(
    sys: &LinearRadialSystem,
    y0: &DVector<f64>,
    r_max: f64,
    tol: &Tolerances,
) -> Result<Boundedness> {
    let eig = check_eigenvalue_condition(sys.a(), EIGEN_TOL)?;
    if !eig.satisfied {
        let worst = eig
            .eigen_real_parts
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::Precondition(format!(
            "A has an eigenvalue with real part {worst:.3e} > 0"
        )));
    }
    if sys.decay_order_coupling < MIN_DECAY_ORDER || sys.decay_order_source < MIN_DECAY_ORDER {
        return Err(Error::Precondition(format!(
            "declared decay orders ({}, {}) below {MIN_DECAY_ORDER}",
            sys.decay_order_coupling, sys.decay_order_source
        )));
    }
    let mut traj = integrate(sys, y0, r_max, tol)?;
    traj.envelope = Some(sys.envelope_check(r_max));
    boundedness_of(&traj, &FitOptions::default())
}

/// A random system meeting the hypotheses, with its initial data.
///
/// `A` is upper triangular. Each diagonal entry is either exactly 0 or
/// uniform in `[-3, -0.5]`, off-diagonal entries are uniform in `[-1, 1]`.
/// Draws whose zero eigenvalue is defective are rejected: a Jordan block at
/// 0 produces `ln r` growth even though every eigenvalue is nonpositive.
/// `B = B₂/r²` and `b = b₂/r²` with entries uniform in `[-1, 1]`.
pub fn random_prop1_system(n: usize, seed: u64) -> Result<(LinearRadialSystem, DVector<f64>)> {
    if n == 0 {
        return Err(Error::Config("state dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = loop {
        let diag: Vec<f64> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.2) {
                    0.0
                } else {
                    rng.gen_range(-3.0..=-0.5)
                }
            })
            .collect();
        let a = DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => diag[i],
            std::cmp::Ordering::Less => rng.gen_range(-1.0..=1.0),
            std::cmp::Ordering::Greater => 0.0,
        });
        let zeros = diag.iter().filter(|&&x| x == 0.0).count();
        if zero_eigenvalue_is_semisimple(&a, zeros) {
            break a;
        }
    };
    let b2 = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
    let src = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..=1.0));
    let y0 = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..=1.0));
    let sys = LinearRadialSystem::new(a, 1.0)?
        .with_coupling(
            Coupling::InversePower {
                matrix: b2,
                power: 2.0,
            },
            2.0,
        )?
        .with_source(
            Source::InversePower {
                vector: src,
                power: 2.0,
            },
            2.0,
        )?;
    Ok((sys, y0))
}

/// True when the kernel of `a` has the full dimension `zeros`, the
/// algebraic multiplicity of the eigenvalue 0.
pub fn zero_eigenvalue_is_semisimple(a: &DMatrix<f64>, zeros: usize) -> bool {
    a.clone().rank(1e-9) + zeros == a.nrows()
}

/// Copy of `sys` with `A[k][k]` replaced by `mu`, used to check that the
/// verdict is sensitive to a violated hypothesis.
pub fn plant_eigenvalue(sys: &LinearRadialSystem, k: usize, mu: f64) -> LinearRadialSystem {
    let mut s = sys.clone();
    let a = s.a_mut();
    for j in 0..a.ncols() {
        if j != k {
            a[(j, k)] = 0.0;
        }
    }
    a[(k, k)] = mu;
    s
}

/// Growth exponent (`-α`) of `‖y‖` for an unchecked system.
pub fn growth_exponent(sys: &LinearRadialSystem, y0: &DVector<f64>, r_max: f64) -> Result<f64> {
    let traj = integrate(sys, y0, r_max, &Tolerances::default())?;
    let est = fit_power_law(
        traj.radii(),
        &traj.select(&Selector::Norm),
        &FitOptions::default(),
    )?;
    est.exponent
        .map(|a| -a)
        .ok_or_else(|| Error::Internal("trajectory vanished below the floor".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_source_integral_is_bounded() {
        let sys = LinearRadialSystem::new(DMatrix::zeros(1, 1), 1.0)
            .unwrap()
            .with_source(
                Source::InversePower {
                    vector: DVector::from_element(1, 1.0),
                    power: 2.0,
                },
                2.0,
            )
            .unwrap();
        let b = prop1_verify(&sys, &DVector::from_element(1, 0.3), 1e6).unwrap();
        assert!(b.bounded);
        // y = y0 + 1 - 1/r
        assert!((b.sup_norm - (1.3 - 1e-6)).abs() < 1e-8);
    }

    #[test]
    fn positive_eigenvalue_is_rejected() {
        let sys = LinearRadialSystem::new(DMatrix::from_element(1, 1, 0.5), 1.0).unwrap();
        let y0 = DVector::from_element(1, 1.0);
        assert!(matches!(
            prop1_verify(&sys, &y0, 1e6),
            Err(Error::Precondition(_))
        ));
        assert!((growth_exponent(&sys, &y0, 1e6).unwrap() - 0.5).abs() < 0.05);
    }

    #[test]
    fn slow_envelope_is_rejected() {
        let sys = LinearRadialSystem::new(DMatrix::zeros(1, 1), 1.0)
            .unwrap()
            .with_source(
                Source::InversePower {
                    vector: DVector::from_element(1, 1.0),
                    power: 1.0,
                },
                1.0,
            )
            .unwrap();
        assert!(prop1_verify(&sys, &DVector::zeros(1), 1e6).is_err());
    }

    #[test]
    fn random_systems_are_reproducible() {
        let (a, y) = random_prop1_system(5, 11).unwrap();
        let (b, z) = random_prop1_system(5, 11).unwrap();
        assert_eq!(a.a(), b.a());
        assert_eq!(y, z);
        assert!(
            check_eigenvalue_condition(a.a(), EIGEN_TOL)
                .unwrap()
                .satisfied
        );
    }

    #[test]
    fn jordan_block_at_zero_grows_logarithmically() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let sys = LinearRadialSystem::new(a, 1.0).unwrap();
        let y0 = DVector::from_vec(vec![0.0, 1.0]);
        let b = prop1_verify(&sys, &y0, 1e6).unwrap();
        // y = (ln r, 1): slope ≈ 1/ln r at the window, above the band
        assert!(!b.bounded);
        assert!(b.tail_slope > 0.05 && b.tail_slope < 0.1);
    }

    #[test]
    fn zero_chain_through_decaying_slot_is_defective() {
        // 0 -> -1 -> 0 couples the two zero slots indirectly
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0]);
        assert!(!zero_eigenvalue_is_semisimple(&a, 2));
        let sys = LinearRadialSystem::new(a, 1.0).unwrap();
        let b = prop1_verify(&sys, &DVector::from_vec(vec![0.0, 0.0, 1.0]), 1e6).unwrap();
        assert!(!b.bounded);
    }

    #[test]
    fn generated_systems_are_nondefective() {
        for seed in 0..40 {
            let (sys, _) = random_prop1_system(1 + seed as usize % 12, seed).unwrap();
            let zeros = (0..sys.dim()).filter(|&i| sys.a()[(i, i)] == 0.0).count();
            assert!(zero_eigenvalue_is_semisimple(sys.a(), zeros));
        }
    }
}
