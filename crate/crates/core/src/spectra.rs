//! Dense symmetric eigenvalues, empirical spectral measures and the ℓ² spectral distance.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::gaussian::SpectralLine;

pub const MAX_SWEEPS: usize = 60;

/// Eigenvalues of a row-major symmetric n×n matrix, sorted descending (cyclic Jacobi).
pub fn eig_symmetric(a: &[f64], n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n {
        return Err(Error::Dimension { expected: n * n, got: a.len() });
    }
    let fro: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for i in 0..n {
        for j in 0..i {
            if (a[i * n + j] - a[j * n + i]).abs() > 1e-12 * fro.max(1.0) {
                return Err(Error::Input(format!("matrix is not symmetric at ({i},{j})")));
            }
        }
    }
    let mut m = a.to_vec();
    let tol = 1e-12 * fro;
    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&m) > tol {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Numerical(format!("Jacobi did not converge in {MAX_SWEEPS} sweeps")));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (m[p * n + p], m[q * n + q]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(ev)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub n: usize,
}

impl SpectralMeasure {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let n = eigenvalues.len();
        SpectralMeasure { eigenvalues, n }
    }

    /// Spectrum of a graph given by neighbour lists, computed one connected component at a time.
    pub fn from_adjacency(adj: &[Vec<u32>]) -> Result<Self> {
        let n = adj.len();
        let mut comp = vec![usize::MAX; n];
        let mut ev = Vec::with_capacity(n);
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let mut members = vec![s];
            comp[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                for &u in &adj[v] {
                    let u = u as usize;
                    if comp[u] == usize::MAX {
                        comp[u] = members.len();
                        members.push(u);
                        q.push_back(u);
                    }
                }
            }
            let k = members.len();
            if k == 1 {
                ev.push(0.0);
                continue;
            }
            let mut m = vec![0.0; k * k];
            for (i, &v) in members.iter().enumerate() {
                for &u in &adj[v] {
                    m[i * k + comp[u as usize]] = 1.0;
                }
            }
            ev.extend(eig_symmetric(&m, k)?);
        }
        Ok(SpectralMeasure::from_eigenvalues(ev))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SpectralMeasure { eigenvalues: self.eigenvalues.iter().map(|x| x * factor).collect(), n: self.n }
    }

    /// Counts per bin for fixed edges; values outside are dropped.
    pub fn histogram(&self, edges: &[f64]) -> Vec<usize> {
        let mut h = vec![0; edges.len().saturating_sub(1)];
        for &x in &self.eigenvalues {
            if let Some(b) = edges.windows(2).position(|w| x >= w[0] && x < w[1]) {
                h[b] += 1;
            }
        }
        h
    }

    pub fn to_csv(&self) -> String {
        self.eigenvalues.iter().map(|x| format!("{x:.15e}\n")).collect()
    }
}

/// M_{s,N} = (1/N) Σ c_i^s for s = 1..=s_max.
pub fn empirical_moments(sm: &SpectralMeasure, s_max: usize) -> Vec<f64> {
    let n = sm.eigenvalues.len().max(1) as f64;
    (1..=s_max).map(|s| sm.eigenvalues.iter().map(|x| x.powi(s as i32)).sum::<f64>() / n).collect()
}

fn side_distance(emp: &[f64], lim: &[(f64, u128)]) -> f64 {
    // emp and lim both ordered from the outside in.
    let mut total = 0.0;
    let mut it = emp.iter();
    for &(c, mult) in lim {
        let mut left = mult;
        while left > 0 {
            match it.next() {
                Some(&x) => {
                    total += (x - c) * (x - c);
                    left -= 1;
                }
                None => {
                    total += left as f64 * c * c;
                    left = 0;
                }
            }
        }
    }
    total + it.map(|x| x * x).sum::<f64>()
}

/// δ₂ between a scaled empirical spectrum and limit lines: positives matched from the top,
/// negatives from the bottom, zeros padding the middle.
pub fn gk_delta(empirical: &SpectralMeasure, limit: &[SpectralLine]) -> f64 {
    let mut pos: Vec<f64> = empirical.eigenvalues.iter().copied().filter(|&x| x > 0.0).collect();
    let mut neg: Vec<f64> = empirical.eigenvalues.iter().copied().filter(|&x| x < 0.0).collect();
    pos.sort_by(|a, b| b.total_cmp(a));
    neg.sort_by(|a, b| a.total_cmp(b));
    let mut lpos: Vec<(f64, u128)> = limit.iter().filter(|l| l.c > 0.0).map(|l| (l.c, l.multiplicity)).collect();
    let mut lneg: Vec<(f64, u128)> = limit.iter().filter(|l| l.c < 0.0).map(|l| (l.c, l.multiplicity)).collect();
    lpos.sort_by(|a, b| b.0.total_cmp(&a.0));
    lneg.sort_by(|a, b| a.0.total_cmp(&b.0));
    (side_distance(&pos, &lpos) + side_distance(&neg, &lneg)).sqrt()
}

/// Adjacency matrix of the 8-vertex example graph.
pub fn example_graph() -> Vec<f64> {
    let edges = [(0, 1), (1, 2), (1, 4), (1, 5), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)];
    let mut m = vec![0.0; 64];
    for (a, b) in edges {
        m[a * 8 + b] = 1.0;
        m[b * 8 + a] = 1.0;
    }
    m
}

pub const EXAMPLE_SPECTRUM: [f64; 8] = [2.681, 1.301, 0.697, 0.386, -0.343, -0.823, -1.753, -2.146];
