use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// The standard bump `rho(z) = K0 exp(-1 / (1 - |z|^2))` on the unit disc,
/// normalised to unit mass.
#[derive(Debug, Clone)]
pub struct Mollifier {
    k0: f64,
    /// Gauss-Legendre nodes `x` on `(-1, 1)` with `w(x) m(x)`, where `m` is
    /// the marginal `int rho(x, y) dy`.
    marginal: Vec<(f64, f64)>,
}

fn bump(s: f64) -> f64 {
    if s < 1.0 {
        (-1.0 / (1.0 - s)).exp()
    } else {
        0.0
    }
}

fn rule(n: usize) -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(n).expect("quadrature degree is positive"))
}

impl Default for Mollifier {
    fn default() -> Self {
        Self::new()
    }
}

impl Mollifier {
    pub fn new() -> Self {
        // Polar form: int_disc bump = pi int_0^1 exp(-1 / (1 - t)) dt.
        let mass = PI * rule(200).integrate(0.0, 1.0, bump);
        let k0 = 1.0 / mass;
        let inner = rule(120);
        let outer = rule(400);
        let marginal = outer
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| {
                let a = (1.0 - x * x).max(0.0).sqrt();
                let m = 2.0 * k0 * inner.integrate(0.0, a, |y| bump(x * x + y * y));
                (x, w * m)
            })
            .collect();
        Self { k0, marginal }
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn value(&self, z: [f64; 2]) -> f64 {
        self.k0 * bump(z[0] * z[0] + z[1] * z[1])
    }

    pub fn gradient(&self, z: [f64; 2]) -> [f64; 2] {
        let s = 1.0 - z[0] * z[0] - z[1] * z[1];
        if s <= 0.0 {
            return [0.0; 2];
        }
        let r = self.k0 * (-1.0 / s).exp();
        let f = -2.0 * r / (s * s);
        [f * z[0], f * z[1]]
    }

    /// `[d11, d12, d22]`.
    pub fn hessian(&self, z: [f64; 2]) -> [f64; 3] {
        let s = 1.0 - z[0] * z[0] - z[1] * z[1];
        if s <= 0.0 {
            return [0.0; 3];
        }
        let r = self.k0 * (-1.0 / s).exp();
        let g = [-2.0 * z[0] / (s * s), -2.0 * z[1] / (s * s)];
        let h = |i: usize, j: usize| {
            let delta = if i == j { 1.0 } else { 0.0 };
            r * (g[i] * g[j] - 2.0 * delta / (s * s) - 8.0 * z[i] * z[j] / (s * s * s))
        };
        [h(0, 0), h(0, 1), h(1, 1)]
    }

    /// Radial Fourier transform `int rho(z) e^{-i xi.z} dz` at `|xi| = s`.
    pub fn transform(&self, s: f64) -> f64 {
        self.marginal.iter().map(|&(x, wm)| wm * (s * x).cos()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_mass_and_decay() {
        let m = Mollifier::new();
        assert!((m.transform(0.0) - 1.0).abs() < 1e-13);
        // Cartesian oracle for the mass.
        let q = rule(300);
        let mass = q.integrate(-1.0, 1.0, |x| {
            let a = (1.0 - x * x).sqrt();
            q.integrate(-a, a, |y| m.value([x, y]))
        });
        assert!((mass - 1.0).abs() < 1e-10);
        assert!(m.transform(5.0).abs() < m.transform(1.0).abs());
        assert!(m.transform(40.0).abs() < 1e-2);
    }

    #[test]
    fn transform_matches_cartesian_quadrature() {
        let m = Mollifier::new();
        let q = rule(300);
        for s in [0.5, 2.0, 7.0] {
            let direct = q.integrate(-1.0, 1.0, |x| {
                let a = (1.0 - x * x).sqrt();
                (s * x).cos() * q.integrate(-a, a, |y| m.value([x, y]))
            });
            assert!((direct - m.transform(s)).abs() < 1e-10, "s = {s}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let m = Mollifier::new();
        let z = [0.31, -0.42];
        let e = 1e-6;
        let g = m.gradient(z);
        let h = m.hessian(z);
        for d in 0..2 {
            let mut p = z;
            let mut n = z;
            p[d] += e;
            n[d] -= e;
            let fd = (m.value(p) - m.value(n)) / (2.0 * e);
            assert!((fd - g[d]).abs() < 1e-7);
            let gp = m.gradient(p);
            let gn = m.gradient(n);
            let fd1 = (gp[0] - gn[0]) / (2.0 * e);
            let fd2 = (gp[1] - gn[1]) / (2.0 * e);
            let want = if d == 0 { [h[0], h[1]] } else { [h[1], h[2]] };
            assert!((fd1 - want[0]).abs() < 1e-6 && (fd2 - want[1]).abs() < 1e-6);
        }
        assert_eq!(m.value([1.0, 0.0]), 0.0);
        assert_eq!(m.gradient([0.0, 1.2]), [0.0; 2]);
    }
}
