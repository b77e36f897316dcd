use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::vector::{ObservationKind, ObservationVector, Squares};
use crate::spectral::{evaluate_at_points, Fft2, SpectralField, WaveGrid};
use crate::{Error, Result};

/// Where the nodal observation of each square is taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum NodePlacement {
    #[default]
    Centers,
    /// The same relative position in every square, as fractions of `h` in `[0, 1)`.
    Offset([f64; 2]),
    /// One explicit point per square, in square order.
    Points(Vec<[f64; 2]>),
}


impl NodePlacement {
    /// Resolve to one point per square, checking `x_n` lies in `Q_n`.
    pub fn points(&self, squares: &Squares) -> Result<Vec<[f64; 2]>> {
        let h = squares.side();
        match self {
            NodePlacement::Centers => Ok((0..squares.count()).map(|n| squares.center(n)).collect()),
            NodePlacement::Offset(f) => {
                if !f.iter().all(|v| (0.0..1.0).contains(v)) {
                    return Err(Error::InvalidArgument(format!("node offset {f:?} must lie in [0, 1)^2")));
                }
                Ok((0..squares.count())
                    .map(|n| {
                        let c = squares.corner(n);
                        [c[0] + f[0] * h, c[1] + f[1] * h]
                    })
                    .collect())
            }
            NodePlacement::Points(p) => {
                if p.len() != squares.count() {
                    return Err(Error::DimensionMismatch { expected: squares.count(), got: p.len() });
                }
                for (n, x) in p.iter().enumerate() {
                    if !squares.contains(n, *x) {
                        return Err(Error::NodeOutsideSquare { index: n + 1, x: x[0], y: x[1] });
                    }
                }
                Ok(p.clone())
            }
        }
    }
}

/// `int_0^h e^{-i kappa x} dx`.
pub(crate) fn edge_integral(kappa: f64, h: f64) -> Complex64 {
    if kappa == 0.0 {
        Complex64::new(h, 0.0)
    } else {
        (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -kappa * h)) / Complex64::new(0.0, kappa)
    }
}

/// Fourier coefficient at `k` of the periodic indicator of `[0, h)^2`.
pub(crate) fn step_profile(k: [f64; 2], h: f64, length: f64) -> Complex64 {
    edge_integral(k[0], h) * edge_integral(k[1], h) / (length * length)
}

/// Folds `weight(idx) * field_c(idx)` into `K x K` bins by `j mod K` and
/// sums them against `e^{2 pi i m.(i, j) / K}`, giving the value on square
/// `(i, j)` of `sum_k weight(k) field(k) e^{i k.s_n}`.
pub(crate) fn fold_and_sum(
    field: &SpectralField,
    squares: usize,
    weight: impl Fn(usize) -> Complex64,
) -> [Vec<f64>; 2] {
    let grid = field.grid();
    let k = squares as i64;
    let mut bins = [vec![Complex64::new(0.0, 0.0); squares * squares], vec![Complex64::new(0.0, 0.0); squares * squares]];
    for &idx in grid.retained() {
        let j = grid.index_of(idx);
        let bin = j[0].rem_euclid(k) as usize + j[1].rem_euclid(k) as usize * squares;
        let w = weight(idx);
        for c in 0..2 {
            bins[c][bin] += w * field.coeffs()[c][idx];
        }
    }
    let fft = Fft2::new(squares);
    bins.map(|mut b| {
        fft.inverse(&mut b);
        b.into_iter().map(|z| z.re).collect()
    })
}

fn interleave(parts: [Vec<f64>; 2], squares: usize, kind: ObservationKind) -> ObservationVector {
    let mut values = Vec::with_capacity(2 * parts[0].len());
    for (a, b) in parts[0].iter().zip(&parts[1]) {
        values.push(*a);
        values.push(*b);
    }
    ObservationVector { values, squares, kind }
}

/// Volume averages `(N / L^2) int_{Q_n} phi` over the `K x K` squares,
/// integrated exactly mode by mode.
pub fn observe_volumes(phi: &SpectralField, squares: usize) -> Result<ObservationVector> {
    let grid: &WaveGrid = phi.grid();
    let sq = Squares::new(grid.length(), squares)?;
    sq.check_divides(grid.modes())?;
    let (h, l) = (sq.side(), grid.length());
    let n = sq.count() as f64;
    let mut parts = fold_and_sum(phi, squares, |idx| step_profile(grid.wavevector(idx), h, l).conj());
    parts.iter_mut().flatten().for_each(|v| *v *= n);
    Ok(interleave(parts, squares, ObservationKind::Volume))
}

/// Point values `phi(x_n)`, one node per square.
pub fn observe_nodes(phi: &SpectralField, squares: usize, placement: &NodePlacement) -> Result<ObservationVector> {
    let grid = phi.grid();
    let sq = Squares::new(grid.length(), squares)?;
    let offset = match placement {
        NodePlacement::Centers => Some([0.5, 0.5]),
        NodePlacement::Offset(f) => Some(*f),
        NodePlacement::Points(_) => None,
    };
    match offset {
        Some(f) => {
            placement.points(&sq)?;
            let d = [f[0] * sq.side(), f[1] * sq.side()];
            let parts = fold_and_sum(phi, squares, |idx| {
                let k = grid.wavevector(idx);
                Complex64::from_polar(1.0, k[0] * d[0] + k[1] * d[1])
            });
            Ok(interleave(parts, squares, ObservationKind::Nodal))
        }
        None => {
            let pts = placement.points(&sq)?;
            let vals = evaluate_at_points(phi, &pts);
            let values = vals.into_iter().flatten().collect();
            Ok(ObservationVector { values, squares, kind: ObservationKind::Nodal })
        }
    }
}

/// Averages the `q^2` fine pairs inside each coarse square of side `q h`.
pub fn oversample_average(zeta: &ObservationVector, q: usize) -> Result<ObservationVector> {
    let fine = zeta.squares;
    if q == 0 || !fine.is_multiple_of(q) {
        return Err(Error::RefinementMismatch { q, squares: fine });
    }
    let coarse = fine / q;
    let mut out = ObservationVector::zeros(coarse, zeta.kind);
    let w = 1.0 / (q * q) as f64;
    for j in 0..fine {
        for i in 0..fine {
            let n = i + j * fine;
            let m = i / q + (j / q) * coarse;
            out.values[2 * m] += w * zeta.values[2 * n];
            out.values[2 * m + 1] += w * zeta.values[2 * n + 1];
        }
    }
    Ok(out)
}
