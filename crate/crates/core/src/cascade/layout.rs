//! State-vector layouts of the four boost-weight stages.
//!
//! Each stage state is a concatenation of slot groups. Transverse indices are
//! flattened as follows (`n = d - 2`, pairs `j < k` in lexicographic order):
//!
//! * vector `v_i`: `i`
//! * antisymmetric pair `A_jk`: pair index
//! * symmetric `S_ij`, `i <= j`: upper triangle, row-major
//! * pair × vector `T_ijk`: `i * P + pair(j, k)` with `P = n(n-1)/2`
//! * `C̄`: upper triangle of the pair × pair matrix, row-major
//! * `N_ij`: row-major `n × n`

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::weyl::TRank3;

use super::table::Family;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Stage {
    Plus1,
    Zero,
    Minus1,
    Minus2,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Plus1, Stage::Zero, Stage::Minus1, Stage::Minus2];

    pub fn boost_weight(self) -> i32 {
        1 - self.index() as i32
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Short label used in file names.
    pub fn key(self) -> &'static str {
        match self {
            Stage::Plus1 => "plus1",
            Stage::Zero => "zero",
            Stage::Minus1 => "minus1",
            Stage::Minus2 => "minus2",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.boost_weight() {
            w if w > 0 => write!(f, "+{w}"),
            w => write!(f, "{w}"),
        }
    }
}

/// A contiguous block of the stage state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotGroup {
    pub name: &'static str,
    /// The Weyl family carried here, `None` for frame quantities.
    pub family: Option<Family>,
    /// Power of `r` multiplying the physical quantity.
    pub weight: i32,
    /// Diagonal entry of the constant matrix.
    pub eigenvalue: f64,
    pub offset: usize,
    pub len: usize,
    /// Pair × vector slots whose initial data is projected onto the
    /// trace-free, cyclic-free subspace.
    pub rank3: bool,
}

impl SlotGroup {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }

    /// Decay rate `w - λ` of the physical quantity without any forcing.
    pub fn homogeneous_rate(&self) -> f64 {
        self.weight as f64 - self.eigenvalue
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageLayout {
    pub stage: Stage,
    pub d: usize,
    pub groups: Vec<SlotGroup>,
    /// Off-diagonal entries of the constant matrix: `(row group, column
    /// group, value)`, each an identity block between equal-size groups.
    pub links: Vec<(usize, usize, f64)>,
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Index of `(j, k)`, `j < k`, among pairs of `0..n`.
pub fn pair_index(n: usize, j: usize, k: usize) -> usize {
    debug_assert!(j < k && k < n);
    j * n - j * (j + 1) / 2 + (k - j - 1)
}

impl StageLayout {
    pub fn new(stage: Stage, d: usize) -> Self {
        assert!(d >= 4, "d = {d} below 4");
        let n = d - 2;
        let p = pair_count(n);
        let df = d as f64;
        let sym = n * (n + 1) / 2;
        let mut groups = Vec::new();
        let mut links = Vec::new();
        let mut push = |name, family: Option<Family>, weight, eigenvalue, len, rank3| {
            if family.is_none_or(|f| f.present(d)) {
                groups.push(SlotGroup {
                    name,
                    family,
                    weight,
                    eigenvalue,
                    offset: 0,
                    len,
                    rank3,
                });
            }
        };
        match stage {
            Stage::Plus1 => {
                push("omega", None, 0, -1.0, n, false);
                push("r_xi", None, 1, 0.0, n, false);
                push("r_L1i", None, 1, 0.0, n, false);
                push("r_M", None, 1, 0.0, n * p, false);
                push("r3_hatv", Some(Family::HatV), 3, -(df - 3.0), n, false);
                push("r3_hatT", Some(Family::HatT), 3, 0.0, n * p, true);
                links.push(("omega", "r_L1i", -1.0));
            }
            Stage::Zero => {
                push("rinv_U", None, -1, 0.0, 1, false);
                push("L11", None, 0, 0.0, 1, false);
                push("M_j1", None, 0, 0.0, p, false);
                push("X", None, 0, 0.0, 1, false);
                push("r_N", None, 1, 0.0, n * n, false);
                push("r_Li1", None, 1, 0.0, n, false);
                push("r2_A", Some(Family::A), 2, -1.0, p, false);
                push("r2_barR", Some(Family::BarR), 2, -(df - 3.0), 1, false);
                push(
                    "r2_barS",
                    Some(Family::BarS),
                    2,
                    -(df / 2.0 - 2.0),
                    sym,
                    false,
                );
                push(
                    "r2_barC",
                    Some(Family::BarC),
                    2,
                    0.0,
                    p * (p + 1) / 2,
                    false,
                );
                links.push(("rinv_U", "L11", -1.0));
            }
            Stage::Minus1 => {
                push("rinv_Ni1", None, -1, 0.0, n, false);
                push("r_checkv", Some(Family::CheckV), 1, -(df - 3.0), n, false);
                push("r_checkT", Some(Family::CheckT), 1, -1.0, n * p, true);
            }
            Stage::Minus2 => {
                push("checkH", Some(Family::CheckH), 0, -1.0, sym, false);
            }
        }
        let mut offset = 0;
        for g in &mut groups {
            g.offset = offset;
            offset += g.len;
        }
        let position = |name: &str| {
            groups
                .iter()
                .position(|g| g.name == name)
                .expect("linked group exists")
        };
        let links = links
            .into_iter()
            .map(|(a, b, v)| (position(a), position(b), v))
            .collect();
        Self {
            stage,
            d,
            groups,
            links,
        }
    }

    pub fn dim(&self) -> usize {
        self.groups.last().map_or(0, |g| g.offset + g.len)
    }

    pub fn group(&self, name: &str) -> Option<&SlotGroup> {
        self.groups.iter().find(|g| g.name == name)
    }

    pub fn family_group(&self, f: Family) -> Option<&SlotGroup> {
        self.groups.iter().find(|g| g.family == Some(f))
    }

    pub fn families(&self) -> impl Iterator<Item = Family> + '_ {
        self.groups.iter().filter_map(|g| g.family)
    }

    /// The constant matrix `A`: group eigenvalues on the diagonal plus the
    /// identity-block links. Upper triangular by construction.
    pub fn constant_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.dim(), self.dim());
        for g in &self.groups {
            for i in g.range() {
                a[(i, i)] = g.eigenvalue;
            }
        }
        for &(row, col, v) in &self.links {
            let (gr, gc) = (&self.groups[row], &self.groups[col]);
            assert_eq!(gr.len, gc.len);
            for k in 0..gr.len {
                a[(gr.offset + k, gc.offset + k)] = v;
            }
        }
        a
    }

    /// Column names `group[k]` in state order.
    pub fn component_names(&self) -> Vec<String> {
        self.groups
            .iter()
            .flat_map(|g| (0..g.len).map(move |k| format!("{}[{k}]", g.name)))
            .collect()
    }
}

/// Packs the `j < k` half of a rank-3 tensor antisymmetric in its last pair.
pub fn pack_rank3(t: &TRank3) -> Vec<f64> {
    let n = t.n();
    let mut out = Vec::with_capacity(n * pair_count(n));
    for i in 0..n {
        for j in 0..n {
            for k in j + 1..n {
                out.push(t[[i, j, k]]);
            }
        }
    }
    out
}

/// Inverse of [`pack_rank3`], filling the `k < j` half by antisymmetry.
pub fn unpack_rank3(n: usize, packed: &[f64]) -> TRank3 {
    let p = pair_count(n);
    assert_eq!(packed.len(), n * p);
    TRank3::from_fn(n, |[i, j, k]| match j.cmp(&k) {
        std::cmp::Ordering::Less => packed[i * p + pair_index(n, j, k)],
        std::cmp::Ordering::Greater => -packed[i * p + pair_index(n, k, j)],
        std::cmp::Ordering::Equal => 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{check_eigenvalue_condition, zero_eigenvalue_is_semisimple, EIGEN_TOL};

    #[test]
    fn stage_zero_diagonal_in_six_dimensions() {
        let l = StageLayout::new(Stage::Zero, 6);
        let diag: Vec<f64> = l.groups.iter().map(|g| g.eigenvalue).collect();
        assert_eq!(
            diag,
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, -3.0, -1.0, 0.0]
        );
        let c = check_eigenvalue_condition(&l.constant_matrix(), EIGEN_TOL).unwrap();
        assert!(c.satisfied);
        assert!(c
            .eigen_real_parts
            .iter()
            .all(|&v| [0.0, -1.0, -3.0].contains(&v)));
        let a = l.constant_matrix();
        assert_eq!(a[(0, 1)], -1.0);
        assert_eq!(
            a.iter()
                .filter(|&&v| v != 0.0 && v != -1.0 && v != -3.0)
                .count(),
            0
        );
    }

    #[test]
    fn minus_one_blocks() {
        for d in 4..=8 {
            let l = StageLayout::new(Stage::Minus1, d);
            let n = d - 2;
            let sizes: Vec<usize> = l.groups.iter().map(|g| g.len).collect();
            let expect = if d == 4 {
                vec![n, n]
            } else {
                vec![n, n, n * n * (n - 1) / 2]
            };
            assert_eq!(sizes, expect);
            let diag: Vec<f64> = l.groups.iter().map(|g| g.eigenvalue).collect();
            assert_eq!(diag[..2], [0.0, -(d as f64 - 3.0)]);
        }
    }

    #[test]
    fn every_stage_matrix_is_admissible() {
        for d in 4..=12 {
            for s in Stage::ALL {
                let a = StageLayout::new(s, d).constant_matrix();
                assert!(
                    check_eigenvalue_condition(&a, EIGEN_TOL).unwrap().satisfied,
                    "{s} d={d}"
                );
                let zeros = (0..a.nrows()).filter(|&i| a[(i, i)] == 0.0).count();
                // only the r^{-1}U -> L11 link forms a Jordan pair at 0
                assert_eq!(
                    zero_eigenvalue_is_semisimple(&a, zeros),
                    s != Stage::Zero,
                    "{s} d={d}"
                );
            }
        }
    }

    #[test]
    fn four_dimensions_drop_higher_families() {
        let fams: Vec<Family> = Stage::ALL
            .iter()
            .flat_map(|&s| StageLayout::new(s, 4).families().collect::<Vec<_>>())
            .collect();
        assert_eq!(
            fams,
            vec![
                Family::HatV,
                Family::A,
                Family::BarR,
                Family::CheckV,
                Family::CheckH
            ]
        );
    }

    #[test]
    fn rank3_packing_round_trip() {
        let n = 4;
        let packed: Vec<f64> = (0..n * pair_count(n)).map(|k| k as f64 + 1.0).collect();
        let t = unpack_rank3(n, &packed);
        assert_eq!(pack_rank3(&t), packed);
        assert_eq!(t[[1, 3, 2]], -t[[1, 2, 3]]);
        assert_eq!(pair_index(4, 2, 3), 5);
    }
}
