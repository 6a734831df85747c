//! Limiting eigenvalues at a fixed connection level L.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::bessel::RadialKernel;
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use crate::rootdata::{DominantWeight, RootSystem};

/// Window radius in units of ‖λ+ρ‖·L beyond which lines are negligible.
pub const R_MAX: f64 = 40.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    pub lambda: DominantWeight,
    pub c: f64,
    pub multiplicity: u128,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadiusGap {
    pub radius_coeff: f64,
    pub gap_coeff: f64,
    pub maximizer: DominantWeight,
}

pub fn default_cutoff(level: f64) -> f64 {
    R_MAX / level
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < PI) {
        return Err(Error::Domain(format!("level L = {level} must lie in (0, π)")));
    }
    Ok(())
}

/// c_λ through the alternating Bessel sum over the Weyl group.
pub fn limiting_eigenvalue(rs: &RootSystem, lambda: &DominantWeight, level: f64) -> Result<f64> {
    check_level(level)?;
    let dim = rs.weyl_dimension(lambda)? as f64;
    let kernel = RadialKernel::new(rs.rank);
    let rho = rs.rho_e();
    let mu: Vec<f64> = lambda.to_e(rs).iter().zip(&rho).map(|(a, b)| a + b).collect();
    let mut sum = 0.0;
    for w in rs.weyl_iter() {
        let wr = w.apply(&rho);
        let diff: Vec<f64> = mu.iter().zip(&wr).map(|(a, b)| level * (a - b)).collect();
        sum += w.sign as f64 * kernel.eval(rs.norm(&diff));
    }
    let scale = (level / (2.0 * PI).sqrt()).powi(rs.rank as i32);
    Ok(scale * sum / (dim * rs.torus_volume()))
}

/// Closed form of c_k for SU(2).
pub fn su2_closed_form(k: u64, level: f64) -> f64 {
    let s = 2.0 * 2f64.sqrt();
    if k == 0 {
        let a = level / 2f64.sqrt();
        return (a - a.sin()) / (2.0 * PI);
    }
    let kf = k as f64;
    ((kf * level / s).sin() / kf - ((kf + 2.0) * level / s).sin() / (kf + 2.0)) / (PI * (kf + 1.0))
}

fn orthonormal_basis(rs: &RootSystem) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in 0..rs.rank {
        let mut a = vec![0.0; rs.rank];
        a[i] = 1.0;
        let mut v = rs.fundamental_to_e(&a);
        for b in &basis {
            let p = rs.inner(&v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= p * y;
            }
        }
        let nv = rs.norm(&v);
        basis.push(v.iter().map(|x| x / nv).collect());
    }
    basis
}

/// c_λ by direct integration of the character against |Δ|² over the ball of radius L in 𝔱.
pub fn limiting_eigenvalue_quadrature(rs: &RootSystem, lambda: &DominantWeight, level: f64) -> Result<f64> {
    check_level(level)?;
    if rs.rank > 2 {
        return Err(Error::Config("quadrature oracle limited to rank <= 2".into()));
    }
    let dim = rs.weyl_dimension(lambda)? as f64;
    let rho = rs.rho_e();
    let mu: Vec<f64> = lambda.to_e(rs).iter().zip(&rho).map(|(a, b)| a + b).collect();
    let basis = orthonormal_basis(rs);
    let elems: Vec<_> = rs.weyl_iter().collect();
    // Frequencies wμ − w'ρ in orthonormal coordinates, with signs.
    let mut freqs: Vec<(f64, Vec<f64>)> = Vec::new();
    for w in &elems {
        let wm = w.apply(&mu);
        for v in &elems {
            let vr = v.apply(&rho);
            let diff: Vec<f64> = wm.iter().zip(&vr).map(|(a, b)| a - b).collect();
            let coords = basis.iter().map(|b| rs.inner(&diff, b)).collect();
            freqs.push(((w.sign * v.sign) as f64, coords));
        }
    }
    let integrand = |x: &[f64]| -> f64 {
        freqs
            .iter()
            .map(|(s, f)| s * f.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().cos())
            .sum()
    };
    let top = freqs.iter().map(|(_, f)| f.iter().map(|a| a * a).sum::<f64>().sqrt()).fold(0.0, f64::max);
    let order = 24 + (2.0 * top * level) as usize;
    let (gx, gw) = gauss_legendre(order);
    let integral = if rs.rank == 1 {
        gx.iter().zip(&gw).map(|(t, w)| w * level * integrand(&[level * t])).sum::<f64>()
    } else {
        let n_phi = 2 * order + 16;
        let mut acc = 0.0;
        for (t, w) in gx.iter().zip(&gw) {
            let r = 0.5 * level * (t + 1.0);
            let mut ring = 0.0;
            for j in 0..n_phi {
                let phi = 2.0 * PI * j as f64 / n_phi as f64;
                ring += integrand(&[r * phi.cos(), r * phi.sin()]);
            }
            acc += w * 0.5 * level * r * ring * 2.0 * PI / n_phi as f64;
        }
        acc
    };
    let norm = dim * elems.len() as f64 * rs.torus_volume() * (2.0 * PI).powi(rs.rank as i32);
    Ok(integral / norm)
}

/// One line per dominant weight with ‖λ+ρ‖ ≤ cutoff, sorted by c descending.
pub fn limiting_spectrum(rs: &RootSystem, level: f64, cutoff: f64) -> Result<Vec<SpectralLine>> {
    check_level(level)?;
    let weights = rs.enumerate_dominant_weights(cutoff);
    let mut lines: Vec<SpectralLine> = weights
        .into_par_iter()
        .map(|lambda| {
            let c = limiting_eigenvalue(rs, &lambda, level)?;
            let d = rs.weyl_dimension(&lambda)?;
            Ok(SpectralLine { lambda, c, multiplicity: d * d })
        })
        .collect::<Result<Vec<_>>>()?;
    // Values equal to within 1e-14 tie and fall back to lexicographic λ.
    let key = |c: f64| (c * 1e14).round() as i64;
    lines.sort_by(|a, b| key(b.c).cmp(&key(a.c)).then_with(|| a.lambda.cmp(&b.lambda)));
    Ok(lines)
}

/// c₀ and c₀ − max_{λ≠0} c_λ over the window.
pub fn spectral_radius_gap(rs: &RootSystem, level: f64, cutoff: f64) -> Result<RadiusGap> {
    let lines = limiting_spectrum(rs, level, cutoff)?;
    if lines.len() < 2 {
        return Err(Error::Config(format!(
            "cutoff {cutoff} leaves {} line(s); widen it to certify the gap",
            lines.len()
        )));
    }
    let zero = DominantWeight::zero(rs);
    let c0 = lines.iter().find(|l| l.lambda == zero).map(|l| l.c).unwrap_or(0.0);
    let best = lines.iter().find(|l| l.lambda != zero).expect("two lines");
    Ok(RadiusGap { radius_coeff: c0, gap_coeff: c0 - best.c, maximizer: best.lambda.clone() })
}

pub fn spectrum_csv(lines: &[SpectralLine]) -> String {
    let mut out = String::from("lambda_coords,c,multiplicity\n");
    for l in lines {
        let coords: Vec<String> = l.lambda.coords.iter().map(|c| c.to_string()).collect();
        out.push_str(&format!("{},{:.15e},{}\n", coords.join(" "), l.c, l.multiplicity));
    }
    out
}
