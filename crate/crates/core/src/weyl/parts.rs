use crate::error::{Error, Result};
use crate::frame::FrameConvention;

use super::transverse::{delta, TMatrix, TRank3, TRank4, TVector};
use super::validate::IDENTITY_TOL;

/// Boost-weight irreducible pieces of a Weyl tensor under the orthogonal
/// group of the transverse frame.
///
/// All transverse indices run over `0..d-2` (frame indices `2..d`).
#[derive(Debug, Clone, PartialEq)]
pub struct IrreducibleParts {
    pub frame: FrameConvention,
    /// Boost weight +2, `C_0i0j`.
    pub hat_h: TMatrix,
    /// Boost weight +1 vector part.
    pub hat_v: TVector,
    /// Boost weight +1 rank-3 part.
    pub hat_t: TRank3,
    /// Boost weight 0, `C_01ij`.
    pub a: TMatrix,
    /// Boost weight 0 scalar, `C_0101 = -R̄/2`.
    pub bar_r: f64,
    /// Traceless part of the transverse Ricci-like tensor.
    pub bar_s: TMatrix,
    /// Transverse Weyl-like part; zero unless `d >= 6`.
    pub bar_c: TRank4,
    pub check_v: TVector,
    pub check_t: TRank3,
    pub check_h: TMatrix,
}

impl IrreducibleParts {
    pub fn zeros(frame: FrameConvention) -> Self {
        let n = frame.transverse();
        Self {
            frame,
            hat_h: TMatrix::zeros(n),
            hat_v: TVector::zeros(n),
            hat_t: TRank3::zeros(n),
            a: TMatrix::zeros(n),
            bar_r: 0.0,
            bar_s: TMatrix::zeros(n),
            bar_c: TRank4::zeros(n),
            check_v: TVector::zeros(n),
            check_t: TRank3::zeros(n),
            check_h: TMatrix::zeros(n),
        }
    }

    pub fn zeros_in(d: usize) -> Result<Self> {
        Ok(Self::zeros(FrameConvention::new(d)?))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    /// `R̄_ij = S̄_ij + R̄ δ_ij / (d - 2)`.
    pub fn bar_ricci(&self) -> TMatrix {
        let n = self.frame.transverse();
        TMatrix::from_fn(n, |[i, j]| {
            self.bar_s[[i, j]] + self.bar_r * delta(i, j) / n as f64
        })
    }

    /// Largest componentwise difference across all ten parts.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        [
            self.hat_h.max_abs_diff(&other.hat_h),
            self.hat_v.max_abs_diff(&other.hat_v),
            self.hat_t.max_abs_diff(&other.hat_t),
            self.a.max_abs_diff(&other.a),
            (self.bar_r - other.bar_r).abs(),
            self.bar_s.max_abs_diff(&other.bar_s),
            self.bar_c.max_abs_diff(&other.bar_c),
            self.check_v.max_abs_diff(&other.check_v),
            self.check_t.max_abs_diff(&other.check_t),
            self.check_h.max_abs_diff(&other.check_h),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        [
            self.hat_h.max_abs(),
            self.hat_v.max_abs(),
            self.hat_t.max_abs(),
            self.a.max_abs(),
            self.bar_r.abs(),
            self.bar_s.max_abs(),
            self.bar_c.max_abs(),
            self.check_v.max_abs(),
            self.check_t.max_abs(),
            self.check_h.max_abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Checks every algebraic constraint on the parts, relative to their
    /// max-norm. Returns a description of the first failures.
    pub fn check_invariants(&self) -> Result<()> {
        let mut problems = Vec::new();
        let finite = self.hat_h.is_finite()
            && self.hat_v.is_finite()
            && self.hat_t.is_finite()
            && self.a.is_finite()
            && self.bar_r.is_finite()
            && self.bar_s.is_finite()
            && self.bar_c.is_finite()
            && self.check_v.is_finite()
            && self.check_t.is_finite()
            && self.check_h.is_finite();
        if !finite {
            return Err(Error::InvalidParts("non-finite entries".into()));
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            return Ok(());
        }
        let tol = IDENTITY_TOL * scale;
        let d = self.dim();

        for (name, m) in [
            ("hatH", &self.hat_h),
            ("barS", &self.bar_s),
            ("checkH", &self.check_h),
        ] {
            let asym = symmetric_defect(m);
            if asym > tol {
                problems.push(format!("{name} not symmetric ({asym:.2e})"));
            }
            if m.trace().abs() > tol {
                problems.push(format!("{name} not traceless ({:.2e})", m.trace()));
            }
        }
        let a_sym = antisymmetric_defect(&self.a);
        if a_sym > tol {
            problems.push(format!("A not antisymmetric ({a_sym:.2e})"));
        }
        for (name, t) in [("hatT", &self.hat_t), ("checkT", &self.check_t)] {
            let (anti, tr, cyc) = rank3_defects(t);
            if anti > tol {
                problems.push(format!(
                    "{name} not antisymmetric in its last pair ({anti:.2e})"
                ));
            }
            if tr > tol {
                problems.push(format!("{name} not traceless ({tr:.2e})"));
            }
            if cyc > tol {
                problems.push(format!(
                    "{name} has a totally antisymmetric part ({cyc:.2e})"
                ));
            }
        }
        let (rsym, rtrace) = rank4_defects(&self.bar_c);
        if rsym > tol {
            problems.push(format!("barC lacks Riemann symmetries ({rsym:.2e})"));
        }
        if rtrace > tol {
            problems.push(format!("barC not traceless ({rtrace:.2e})"));
        }
        if d == 4 {
            for (name, v) in [
                ("hatT", self.hat_t.max_abs()),
                ("checkT", self.check_t.max_abs()),
                ("barS", self.bar_s.max_abs()),
                ("barC", self.bar_c.max_abs()),
            ] {
                if v > tol {
                    problems.push(format!("{name} must vanish for d = 4 ({v:.2e})"));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParts(problems.join("; ")))
        }
    }
}

pub(crate) fn symmetric_defect(m: &TMatrix) -> f64 {
    m.indices()
        .fold(0.0, |acc, [i, j]| acc.max((m[[i, j]] - m[[j, i]]).abs()))
}

pub(crate) fn antisymmetric_defect(m: &TMatrix) -> f64 {
    m.indices()
        .fold(0.0, |acc, [i, j]| acc.max((m[[i, j]] + m[[j, i]]).abs()))
}

/// (antisymmetry in jk, trace δ^{ij} T_ijk, cyclic sum) defects.
pub(crate) fn rank3_defects(t: &TRank3) -> (f64, f64, f64) {
    let n = t.n();
    let mut anti = 0.0f64;
    let mut cyc = 0.0f64;
    for [i, j, k] in t.indices() {
        anti = anti.max((t[[i, j, k]] + t[[i, k, j]]).abs());
        cyc = cyc.max((t[[i, j, k]] + t[[j, k, i]] + t[[k, i, j]]).abs());
    }
    let mut tr = 0.0f64;
    for k in 0..n {
        let s: f64 = (0..n).map(|i| t[[i, i, k]]).sum();
        tr = tr.max(s.abs());
    }
    (anti, tr, cyc)
}

/// (Riemann symmetries incl. first Bianchi, trace δ^{jl} C_ijkl) defects.
pub(crate) fn rank4_defects(c: &TRank4) -> (f64, f64) {
    let n = c.n();
    let mut sym = 0.0f64;
    for [i, j, k, l] in c.indices() {
        let v = c[[i, j, k, l]];
        sym = sym
            .max((v + c[[j, i, k, l]]).abs())
            .max((v + c[[i, j, l, k]]).abs())
            .max((v - c[[k, l, i, j]]).abs())
            .max((v + c[[i, k, l, j]] + c[[i, l, j, k]]).abs());
    }
    let mut tr = 0.0f64;
    for i in 0..n {
        for k in 0..n {
            let s: f64 = (0..n).map(|j| c[[i, j, k, j]]).sum();
            tr = tr.max(s.abs());
        }
    }
    (sym, tr)
}
