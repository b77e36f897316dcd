use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The three error norms tracked for every member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    /// `|v|_H^2`
    H2,
    /// `||v||_V^2`
    V2,
    /// `|A v|_H^2`
    DA2,
}

impl Quantity {
    fn slot(self) -> usize {
        match self {
            Quantity::H2 => 0,
            Quantity::V2 => 1,
            Quantity::DA2 => 2,
        }
    }
}

/// Ensemble mean and sample variance of the squared error norms at each
/// recorded time.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ErrorSeries {
    pub members: usize,
    pub times: Vec<f64>,
    mean: [Vec<f64>; 3],
    var: [Vec<f64>; 3],
}

impl ErrorSeries {
    pub fn new(members: usize) -> Self {
        Self { members, ..Default::default() }
    }

    /// Appends one time level from per-member `[H2, V2, DA2]` values.
    /// Members are summed in index order, so the result does not depend
    /// on how they were computed.
    pub fn push(&mut self, t: f64, per_member: &[[f64; 3]]) -> Result<()> {
        if per_member.len() != self.members {
            return Err(Error::DimensionMismatch { expected: self.members, got: per_member.len() });
        }
        let n = self.members as f64;
        for q in 0..3 {
            let m = per_member.iter().map(|r| r[q]).sum::<f64>() / n;
            let v = if self.members > 1 {
                per_member.iter().map(|r| (r[q] - m).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            self.mean[q].push(m);
            self.var[q].push(v);
        }
        self.times.push(t);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn mean(&self, q: Quantity) -> &[f64] {
        &self.mean[q.slot()]
    }

    /// Standard error of the ensemble mean.
    pub fn standard_error(&self, q: Quantity) -> Vec<f64> {
        let n = self.members.max(1) as f64;
        self.var[q.slot()].iter().map(|v| (v / n).sqrt()).collect()
    }

    /// First index with `t >= t_end - fraction * span`.
    pub fn tail_start(&self, fraction: f64) -> usize {
        let (Some(&t0), Some(&t1)) = (self.times.first(), self.times.last()) else {
            return 0;
        };
        let cut = t1 - fraction * (t1 - t0);
        self.times.iter().position(|&t| t >= cut - 1e-12 * t1.abs().max(1.0)).unwrap_or(0)
    }

    /// Trapezoidal `(1/T) int_{t-T}^{t}` of the mean and of the standard
    /// error, for every recorded `t` with a full window behind it. The
    /// averaged standard error bounds that of the averaged mean by
    /// Minkowski's inequality.
    pub fn window_averages(&self, q: Quantity, window: f64) -> Result<Vec<(f64, f64, f64)>> {
        let span = match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        };
        if !(window > 0.0) || span + 1e-12 * span.max(1.0) < window {
            return Err(Error::WindowTooShort { window, span });
        }
        let mean = self.mean(q);
        let se = self.standard_error(q);
        let cum = |v: &[f64]| {
            let mut c = vec![0.0; v.len()];
            for i in 1..v.len() {
                c[i] = c[i - 1] + 0.5 * (v[i] + v[i - 1]) * (self.times[i] - self.times[i - 1]);
            }
            c
        };
        let (cm, cs) = (cum(mean), cum(&se));
        // Value of the running integral at an arbitrary time, by linear
        // interpolation of the integrand.
        let integral_at = |c: &[f64], v: &[f64], t: f64| -> f64 {
            let i = self.times.partition_point(|&s| s <= t).clamp(1, self.times.len() - 1);
            let (ta, tb) = (self.times[i - 1], self.times[i]);
            let frac = if tb > ta { (t - ta) / (tb - ta) } else { 0.0 };
            let vt = v[i - 1] + frac * (v[i] - v[i - 1]);
            c[i - 1] + 0.5 * (v[i - 1] + vt) * (t - ta)
        };
        let t0 = self.times[0];
        let mut out = Vec::new();
        for (i, &t) in self.times.iter().enumerate() {
            let start = t - window;
            if start < t0 - 1e-12 * t.abs().max(1.0) {
                continue;
            }
            let start = start.max(t0);
            let m = (cm[i] - integral_at(&cm, mean, start)) / window;
            let s = (cs[i] - integral_at(&cs, &se, start)) / window;
            out.push((t, m, s));
        }
        Ok(out)
    }

    /// CSV with columns `t, mean_H2, se_H2, mean_V2, se_V2, mean_DA2, se_DA2`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["t", "mean_H2", "se_H2", "mean_V2", "se_V2", "mean_DA2", "se_DA2"]).map_err(io)?;
        let se: Vec<Vec<f64>> = [Quantity::H2, Quantity::V2, Quantity::DA2].iter().map(|&q| self.standard_error(q)).collect();
        for i in 0..self.len() {
            let mut row = vec![format!("{:e}", self.times[i])];
            for q in 0..3 {
                row.push(format!("{:e}", self.mean[q][i]));
                row.push(format!("{:e}", se[q][i]));
            }
            w.write_record(&row).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    /// Largest relative difference of the means against another series on
    /// the same times, used to compare replayed runs.
    pub fn max_relative_difference(&self, other: &ErrorSeries) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: other.len() });
        }
        let mut worst: f64 = 0.0;
        for q in 0..3 {
            for (a, b) in self.mean[q].iter().zip(&other.mean[q]) {
                let scale = a.abs().max(b.abs());
                if scale > 0.0 {
                    worst = worst.max((a - b).abs() / scale);
                }
            }
        }
        Ok(worst)
    }
}
