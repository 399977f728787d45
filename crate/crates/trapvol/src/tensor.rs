//! Dense rank-3 and rank-4 coordinate arrays.
//!
//! Small helpers for objects like Γ^λ_{μν} and R_{μνρσ} where nalgebra has
//! no natural container. Index order follows the call sites: `Rank3`
//! stores `(a, b, c)` row-major, `Rank4` stores `(a, b, c, d)`.

#[derive(Debug, Clone, PartialEq)]
pub struct Rank3 {
    pub dim: usize,
    data: Vec<f64>,
}

impl Rank3 {
    pub fn zeros(dim: usize) -> Self {
        Rank3 { dim, data: vec![0.0; dim * dim * dim] }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.dim + b) * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        self.data[(a * self.dim + b) * self.dim + c] = v;
    }

    #[inline]
    pub fn add(&mut self, a: usize, b: usize, c: usize, v: f64) {
        self.data[(a * self.dim + b) * self.dim + c] += v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rank4 {
    pub dim: usize,
    data: Vec<f64>,
}

impl Rank4 {
    pub fn zeros(dim: usize) -> Self {
        Rank4 { dim, data: vec![0.0; dim * dim * dim * dim] }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[((a * self.dim + b) * self.dim + c) * self.dim + d]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        self.data[((a * self.dim + b) * self.dim + c) * self.dim + d] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank3_round_trip() {
        let mut t = Rank3::zeros(3);
        t.set(2, 1, 0, 5.0);
        t.add(2, 1, 0, 1.5);
        assert_eq!(t.get(2, 1, 0), 6.5);
        assert_eq!(t.get(0, 1, 2), 0.0);
        assert_eq!(t.max_abs(), 6.5);
    }

    #[test]
    fn rank4_round_trip() {
        let mut t = Rank4::zeros(2);
        t.set(1, 0, 1, 0, -3.0);
        assert_eq!(t.get(1, 0, 1, 0), -3.0);
        assert_eq!(t.max_abs(), 3.0);
    }
}
