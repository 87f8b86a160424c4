use std::ops::{Index, IndexMut};

/// Dense tensor of fixed rank over the `n = d - 2` transverse frame indices.
///
/// Index `0` here is frame index `2`. Storage is row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<const R: usize> {
    n: usize,
    data: Vec<f64>,
}

pub type TVector = Tensor<1>;
pub type TMatrix = Tensor<2>;
pub type TRank3 = Tensor<3>;
pub type TRank4 = Tensor<4>;

impl<const R: usize> Tensor<R> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n.pow(R as u32)],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut([usize; R]) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for flat in 0..t.data.len() {
            let idx = t.unflatten(flat);
            t.data[flat] = f(idx);
        }
        t
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn offset(&self, idx: [usize; R]) -> usize {
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.n);
            acc * self.n + i
        })
    }

    fn unflatten(&self, mut flat: usize) -> [usize; R] {
        let mut idx = [0; R];
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    /// All index tuples in storage order.
    pub fn indices(&self) -> impl Iterator<Item = [usize; R]> + '_ {
        (0..self.data.len()).map(|f| self.unflatten(f))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn set_zero(&mut self) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
    }
}

impl<const R: usize> Index<[usize; R]> for Tensor<R> {
    type Output = f64;
    #[inline]
    fn index(&self, idx: [usize; R]) -> &f64 {
        &self.data[self.offset(idx)]
    }
}

impl<const R: usize> IndexMut<[usize; R]> for Tensor<R> {
    #[inline]
    fn index_mut(&mut self, idx: [usize; R]) -> &mut f64 {
        let o = self.offset(idx);
        &mut self.data[o]
    }
}

impl Tensor<1> {
    pub fn from_vec(v: Vec<f64>) -> Self {
        Self {
            n: v.len(),
            data: v,
        }
    }
}

impl Tensor<2> {
    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[[i, i]]).sum()
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |[i, j]| delta(i, j))
    }
}

#[inline]
pub fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}
