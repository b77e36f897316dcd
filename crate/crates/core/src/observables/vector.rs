use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How the entries of an observation vector were sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservationKind {
    Volume,
    Nodal,
}

/// Observations on a `K x K` square partition, stored interleaved: entry
/// `2n` is the first velocity component on square `n` (zero based), entry
/// `2n + 1` the second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationVector {
    pub values: Vec<f64>,
    pub squares: usize,
    pub kind: ObservationKind,
}

impl ObservationVector {
    pub fn zeros(squares: usize, kind: ObservationKind) -> Self {
        Self { values: vec![0.0; 2 * squares * squares], squares, kind }
    }

    pub fn from_values(values: Vec<f64>, squares: usize, kind: ObservationKind) -> Result<Self> {
        let expected = 2 * squares * squares;
        if values.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: values.len() });
        }
        Ok(Self { values, squares, kind })
    }

    /// Number of squares `N = K^2`.
    pub fn count(&self) -> usize {
        self.squares * self.squares
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn pair(&self, n: usize) -> [f64; 2] {
        [self.values[2 * n], self.values[2 * n + 1]]
    }

    pub fn set_pair(&mut self, n: usize, v: [f64; 2]) {
        self.values[2 * n] = v[0];
        self.values[2 * n + 1] = v[1];
    }

    /// One component laid out as a `K x K` array, `x_1` index fastest.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().skip(c).step_by(2).copied().collect()
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.values.len() != other.values.len() {
            return Err(Error::DimensionMismatch { expected: self.values.len(), got: other.values.len() });
        }
        Ok(())
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
        Ok(())
    }

    pub fn scale(&mut self, a: f64) {
        self.values.iter_mut().for_each(|x| *x *= a);
    }
}

/// The square partition of the periodic box into `K^2` squares of side
/// `h = L / K`. Square `n` (zero based) has lower-left corner
/// `h (n mod K, n div K)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Squares {
    pub length: f64,
    pub per_side: usize,
}

impl Squares {
    pub fn new(length: f64, per_side: usize) -> Result<Self> {
        if per_side == 0 || !(length > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "square partition needs K >= 1 and L > 0, got K = {per_side}, L = {length}"
            )));
        }
        Ok(Self { length, per_side })
    }

    pub fn side(&self) -> f64 {
        self.length / self.per_side as f64
    }

    pub fn count(&self) -> usize {
        self.per_side * self.per_side
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + j * self.per_side
    }

    /// `(i, j)` for square `n`, both zero based.
    pub fn position(&self, n: usize) -> (usize, usize) {
        (n % self.per_side, n / self.per_side)
    }

    pub fn corner(&self, n: usize) -> [f64; 2] {
        let (i, j) = self.position(n);
        let h = self.side();
        [i as f64 * h, j as f64 * h]
    }

    pub fn center(&self, n: usize) -> [f64; 2] {
        let c = self.corner(n);
        let h = self.side();
        [c[0] + 0.5 * h, c[1] + 0.5 * h]
    }

    /// Square containing `x`, after reduction into `[0, L)^2`.
    pub fn locate(&self, x: [f64; 2]) -> usize {
        let h = self.side();
        let k = self.per_side as i64;
        let cell = |v: f64| ((v / h).floor() as i64).rem_euclid(k) as usize;
        self.index(cell(x[0]), cell(x[1]))
    }

    /// Whether `x` lies in the half-open square `n` itself (no periodic
    /// reduction).
    pub fn contains(&self, n: usize, x: [f64; 2]) -> bool {
        let c = self.corner(n);
        let h = self.side();
        (0..2).all(|d| x[d] >= c[d] && x[d] < c[d] + h)
    }

    /// Requires `K | M`.
    pub fn check_divides(&self, modes: usize) -> Result<()> {
        if !modes.is_multiple_of(self.per_side) {
            return Err(Error::SquaresDoNotDivideGrid { squares: self.per_side, modes });
        }
        Ok(())
    }
}
