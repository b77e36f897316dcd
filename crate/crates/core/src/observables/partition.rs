use std::collections::HashMap;
use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::Serialize;

use super::basis::MOLLIFIER_FRACTION;
use super::mollifier::Mollifier;
use super::vector::Squares;
use crate::Result;

/// One mollified indicator evaluated at one grid point.
#[derive(Debug, Clone, Copy)]
pub struct Entry {
    pub square: u32,
    pub value: f64,
    pub grad: [f64; 2],
    /// `[d11, d12, d22]`.
    pub hess: [f64; 3],
}

/// Polar quadrature on the unit disc for the mollifier convolution.
#[derive(Debug, Clone, Copy)]
pub struct DiscRule {
    pub radial: usize,
    pub angular: usize,
}

impl Default for DiscRule {
    fn default() -> Self {
        Self { radial: 48, angular: 96 }
    }
}

struct Node {
    z: [f64; 2],
    w: f64,
    gw: [f64; 2],
    hw: [f64; 3],
}

/// The mollified indicators `rho_eps * psi_n` sampled on an `M_c x M_c`
/// construction grid, together with their first and second derivatives.
///
/// The convolution is evaluated with a fixed node set on the disc of radius
/// `eps`, whose value weights are normalised to sum to one. Since the
/// indicators partition the plane, every node lands in exactly one square
/// and the partition of unity holds to rounding. Points whose `eps` disc
/// stays inside their own square take the plateau values directly.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    squares: Squares,
    resolution: usize,
    eps: f64,
    offsets: Vec<usize>,
    entries: Vec<Entry>,
}

impl PartitionOfUnity {
    pub fn build(length: f64, per_side: usize, resolution: usize, rule: DiscRule) -> Result<Self> {
        let squares = Squares::new(length, per_side)?;
        squares.check_divides(resolution)?;
        let h = squares.side();
        let eps = MOLLIFIER_FRACTION * h;
        let nodes = disc_nodes(rule, eps);
        let dx = length / resolution as f64;

        let rows: Vec<Vec<Vec<Entry>>> = (0..resolution)
            .into_par_iter()
            .map(|p2| {
                (0..resolution)
                    .map(|p1| {
                        let x = [p1 as f64 * dx, p2 as f64 * dx];
                        point_entries(&squares, eps, &nodes, x)
                    })
                    .collect()
            })
            .collect();
        let mut offsets = Vec::with_capacity(resolution * resolution + 1);
        let mut entries = Vec::new();
        offsets.push(0);
        for row in rows {
            for cell in row {
                entries.extend(cell);
                offsets.push(entries.len());
            }
        }
        Ok(Self { squares, resolution, eps, offsets, entries })
    }

    pub fn squares(&self) -> &Squares {
        &self.squares
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Entries at grid point `p = p2 * M_c + p1`.
    pub fn at(&self, p: usize) -> &[Entry] {
        &self.entries[self.offsets[p]..self.offsets[p + 1]]
    }

    pub fn point(&self, p: usize) -> [f64; 2] {
        let dx = self.squares.length / self.resolution as f64;
        [(p % self.resolution) as f64 * dx, (p / self.resolution) as f64 * dx]
    }

    /// Dense samples of `psi~_n`.
    pub fn values_of(&self, n: usize) -> Vec<f64> {
        (0..self.resolution * self.resolution)
            .map(|p| self.at(p).iter().find(|e| e.square as usize == n).map_or(0.0, |e| e.value))
            .collect()
    }

    /// Periodic distance from `x` to the closed square `n`.
    fn distance_to_square(&self, x: [f64; 2], n: usize) -> f64 {
        let l = self.squares.length;
        let h = self.squares.side();
        let c = self.squares.corner(n);
        let mut d2 = 0.0;
        for d in 0..2 {
            // Shift so the square is centred in the period.
            let mid = c[d] + 0.5 * h;
            let t = (x[d] - mid + 0.5 * l).rem_euclid(l) - 0.5 * l;
            let gap = (t.abs() - 0.5 * h).max(0.0);
            d2 += gap * gap;
        }
        d2.sqrt()
    }

    /// Periodic distance from `x` to the complement of the open square `n`;
    /// zero outside the square.
    fn depth_in_square(&self, x: [f64; 2], n: usize) -> f64 {
        let l = self.squares.length;
        let h = self.squares.side();
        let c = self.squares.corner(n);
        let mut depth = f64::INFINITY;
        for d in 0..2 {
            let t = (x[d] - c[d]).rem_euclid(l);
            if t >= h {
                return 0.0;
            }
            depth = depth.min(t).min(h - t);
        }
        depth
    }

    pub fn report(&self) -> PartitionReport {
        let sq = &self.squares;
        let h = sq.side();
        let l = sq.length;
        let count = sq.count();
        let npts = self.resolution * self.resolution;
        let da = (l / self.resolution as f64).powi(2);
        let mut rep = PartitionReport {
            per_side: sq.per_side,
            resolution: self.resolution,
            min_value: f64::INFINITY,
            max_value: f64::NEG_INFINITY,
            ..Default::default()
        };
        let mut sums = vec![0.0; count];
        let mut sq_norms = vec![0.0; count];
        let mut grad_norms = vec![0.0; count];
        let mut gram: HashMap<(u32, u32), [f64; 2]> = HashMap::new();
        for p in 0..npts {
            let x = self.point(p);
            let es = self.at(p);
            let total: f64 = es.iter().map(|e| e.value).sum();
            rep.partition_error = rep.partition_error.max((total - 1.0).abs());
            let home = sq.locate(x);
            let plateau = self.depth_in_square(x, home) >= self.eps;
            for e in es {
                let n = e.square as usize;
                rep.min_value = rep.min_value.min(e.value);
                rep.max_value = rep.max_value.max(e.value);
                if self.distance_to_square(x, n) >= self.eps && e.value != 0.0 {
                    rep.support_violations += 1;
                }
                let g = (e.grad[0].powi(2) + e.grad[1].powi(2)).sqrt();
                if plateau {
                    let target = if n == home { 1.0 } else { 0.0 };
                    rep.plateau_error = rep.plateau_error.max((e.value - target).abs());
                    rep.plateau_gradient = rep.plateau_gradient.max(g);
                }
                rep.gradient_constant = rep.gradient_constant.max(h * g);
                let hmax = e.hess.iter().fold(0.0f64, |a, b| a.max(b.abs()));
                rep.hessian_constant = rep.hessian_constant.max(h * h * hmax);
                sums[n] += e.value;
                sq_norms[n] += e.value * e.value * da;
                grad_norms[n] += g * g * da;
            }
            for a in es {
                for b in es {
                    let v = gram.entry((a.square, b.square)).or_insert([0.0; 2]);
                    v[0] += a.value * b.value * da;
                    v[1] += (a.grad[0] * b.grad[0] + a.grad[1] * b.grad[1]) * da;
                }
            }
        }
        let target = (h / l).powi(2);
        rep.mean_error = sums.iter().map(|s| (s / npts as f64 - target).abs()).fold(0.0, f64::max);
        rep.l2_ratio_min = sq_norms.iter().map(|s| s.sqrt() / h).fold(f64::INFINITY, f64::min);
        rep.l2_ratio_max = sq_norms.iter().map(|s| s.sqrt() / h).fold(0.0, f64::max);
        rep.gradient_l2 = grad_norms.iter().map(|s| s.sqrt()).fold(0.0, f64::max);
        let k = sq.per_side as i64;
        let allowed = |d: i64| d == 0 || d == 1 || d == -1 || d == k - 1 || d == 1 - k;
        for (&(a, b), v) in &gram {
            let (ai, aj) = sq.position(a as usize);
            let (bi, bj) = sq.position(b as usize);
            let inside = allowed(bi as i64 - ai as i64) && allowed(bj as i64 - aj as i64);
            if inside {
                rep.gram_inside = rep.gram_inside.max(v[0].abs() / (h * h));
                rep.gradient_gram_inside = rep.gradient_gram_inside.max(v[1].abs());
            } else {
                rep.gram_outside = rep.gram_outside.max(v[0].abs());
                rep.gradient_gram_outside = rep.gradient_gram_outside.max(v[1].abs());
            }
        }
        rep
    }
}

/// Measured properties of a mollified partition. Ratios are dimensionless:
/// `gradient_constant = max h |grad psi~|`, `hessian_constant = max h^2
/// |d2 psi~|`, `gram_inside = max |int psi~_n psi~_m| / h^2` over neighbour
/// offsets.
#[derive(Debug, Clone, Default, Serialize)]
pub struct PartitionReport {
    pub per_side: usize,
    pub resolution: usize,
    pub partition_error: f64,
    pub min_value: f64,
    pub max_value: f64,
    pub support_violations: usize,
    pub plateau_error: f64,
    pub plateau_gradient: f64,
    pub mean_error: f64,
    pub l2_ratio_min: f64,
    pub l2_ratio_max: f64,
    pub gradient_constant: f64,
    pub hessian_constant: f64,
    pub gradient_l2: f64,
    pub gram_outside: f64,
    pub gradient_gram_outside: f64,
    pub gram_inside: f64,
    pub gradient_gram_inside: f64,
}

fn disc_nodes(rule: DiscRule, eps: f64) -> Vec<Node> {
    let m = Mollifier::new();
    let radial = GaussLegendre::new(NonZeroUsize::new(rule.radial).expect("radial nodes"));
    let dtheta = 2.0 * PI / rule.angular as f64;
    let mut nodes = Vec::with_capacity(rule.radial * rule.angular);
    for &(x, w) in radial.as_node_weight_pairs() {
        let r = 0.5 * (x + 1.0);
        let wr = 0.5 * w * r * dtheta;
        for a in 0..rule.angular {
            let th = (a as f64 + 0.5) * dtheta;
            let z = [r * th.cos(), r * th.sin()];
            let g = m.gradient(z);
            let hs = m.hessian(z);
            nodes.push(Node {
                z,
                w: m.value(z) * wr,
                gw: [g[0] * wr / eps, g[1] * wr / eps],
                hw: [hs[0] * wr / (eps * eps), hs[1] * wr / (eps * eps), hs[2] * wr / (eps * eps)],
            });
        }
    }
    let total: f64 = nodes.iter().map(|n| n.w).sum();
    for n in &mut nodes {
        n.w /= total;
        n.gw.iter_mut().for_each(|v| *v /= total);
        n.hw.iter_mut().for_each(|v| *v /= total);
    }
    nodes
}

fn point_entries(squares: &Squares, eps: f64, nodes: &[Node], x: [f64; 2]) -> Vec<Entry> {
    let h = squares.side();
    let local = [x[0].rem_euclid(h), x[1].rem_euclid(h)];
    let home = squares.locate(x) as u32;
    if local.iter().all(|&a| a >= eps && a + eps <= h) {
        return vec![Entry { square: home, value: 1.0, grad: [0.0; 2], hess: [0.0; 3] }];
    }
    let mut out: Vec<Entry> = Vec::with_capacity(4);
    for node in nodes {
        let p = [x[0] - eps * node.z[0], x[1] - eps * node.z[1]];
        let n = squares.locate(p) as u32;
        let e = match out.iter_mut().find(|e| e.square == n) {
            Some(e) => e,
            None => {
                out.push(Entry { square: n, value: 0.0, grad: [0.0; 2], hess: [0.0; 3] });
                out.last_mut().expect("just pushed")
            }
        };
        e.value += node.w;
        for d in 0..2 {
            e.grad[d] += node.gw[d];
        }
        for d in 0..3 {
            e.hess[d] += node.hw[d];
        }
    }
    out
}
