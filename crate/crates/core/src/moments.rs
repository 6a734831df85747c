//! Poissonian-limit integrals and the limiting moments assembled from them.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::bessel::{jtilde, RadialKernel};
use crate::circuits::{expansion_table, k_parameter, Component, ReducedCircuit};
use crate::error::{Error, Result};
use crate::gaussian::limiting_eigenvalue;
use crate::geometry::{quat_conj, quat_mul, trial_rng};
use crate::poisson::{embedding_count_estimate, Estimate};
use crate::quad::gauss_legendre;
use crate::rootdata::{DominantWeight, Family, RootSystem};

/// Largest moment order the tables cover.
pub const MAX_MOMENT: usize = 7;
/// Radial panel width for the oscillatory Bessel integrands.
const PANEL: f64 = PI / 2.0;
const PANEL_ORDER: usize = 12;
/// Relative tail tolerance for the truncated radial integrals.
const TAIL_TOL: f64 = 1e-10;
/// Radius used for k = 2, where the tail is added in closed form.
const QUADRATIC_RADIUS: f64 = 4096.0;
const MAX_RADIUS: f64 = 1.0e5;
const TWO_VERTEX_RADIUS: f64 = 200.0;

/// d_λ·c_λ at level L.
pub fn c_coeff(rs: &RootSystem, lambda: &DominantWeight, level: f64) -> Result<f64> {
    Ok(rs.weyl_dimension(lambda)? as f64 * limiting_eigenvalue(rs, lambda, level)?)
}

/// vol(𝔱/𝔱_ℤ)/vol(G), the factor turning Euclidean embedding densities into limit integrals.
pub fn volume_ratio(rs: &RootSystem) -> f64 {
    let v = rs.volumes();
    v.vol_t_mod_tz / v.vol_g_macdonald
}

/// ℓ′ = ℓ/vol(𝔱/𝔱_ℤ).
pub fn ell_prime(rs: &RootSystem, ell: f64) -> f64 {
    ell / rs.torus_volume()
}

fn pi_poly(rs: &RootSystem, x: &[f64]) -> f64 {
    (0..rs.positive_roots.len()).map(|i| rs.inner(x, &rs.root_e(i))).product()
}

/// ∂_{Φ−}J̃(x) = π(x)·J_{d/2}(|x|)/|x|^{d/2}, since π is harmonic.
pub fn partial_phi_minus_radial(rs: &RootSystem, x: &[f64]) -> f64 {
    pi_poly(rs, x) * RadialKernel::new(rs.dim_group()).eval(rs.norm(x))
}

/// Σ_w ε(w) J̃(x − L·wρ) / (−L)^{|Φ+|}, which tends to ∂_{Φ+}J̃(x) as L → 0.
pub fn weyl_difference_quotient(rs: &RootSystem, x: &[f64], level: f64) -> f64 {
    let rho = rs.rho_e();
    let mut sum = 0.0;
    for w in rs.weyl_iter() {
        let wr = w.apply(&rho);
        let y: Vec<f64> = x.iter().zip(&wr).map(|(a, b)| a - level * b).collect();
        sum += w.sign as f64 * jtilde(rs, &y);
    }
    sum / (-level).powi(rs.positive_roots.len() as i32)
}

fn unit(rs: &RootSystem, v: &[f64]) -> Vec<f64> {
    let n = rs.norm(v);
    v.iter().map(|x| x / n).collect()
}

/// ∫ π(x̂)² over the unit directions of the chamber.
fn angular_factor(rs: &RootSystem) -> Result<f64> {
    match rs.rank {
        1 => {
            let w = unit(rs, &rs.fundamental_to_e(&[1.0]));
            Ok(pi_poly(rs, &w).powi(2))
        }
        2 => {
            let ea = unit(rs, &rs.fundamental_to_e(&[1.0, 0.0]));
            let w2 = rs.fundamental_to_e(&[0.0, 1.0]);
            let c = rs.inner(&w2, &ea);
            let perp: Vec<f64> = w2.iter().zip(&ea).map(|(a, b)| a - c * b).collect();
            let eb = unit(rs, &perp);
            let opening = (c / rs.norm(&w2)).clamp(-1.0, 1.0).acos();
            let (nodes, weights) = gauss_legendre(48);
            let half = 0.5 * opening;
            Ok(nodes
                .iter()
                .zip(&weights)
                .map(|(t, wt)| {
                    let phi = half * (t + 1.0);
                    let x: Vec<f64> = ea.iter().zip(&eb).map(|(a, b)| phi.cos() * a + phi.sin() * b).collect();
                    wt * half * pi_poly(rs, &x).powi(2)
                })
                .sum())
        }
        r => Err(Error::Config(format!("chamber integrals are implemented for rank <= 2, got {r}"))),
    }
}

/// ∫_0^R f by Gauss–Legendre panels of width π/2, summed in panel order.
fn radial_panels<F: Fn(f64) -> f64 + Sync>(f: F, radius: f64) -> f64 {
    let n = (radius / PANEL).ceil() as usize;
    let h = radius / n as f64;
    let (nodes, weights) = gauss_legendre(PANEL_ORDER);
    let parts: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = i as f64 * h;
            nodes.iter().zip(&weights).map(|(t, w)| w * f(a + 0.5 * h * (t + 1.0))).sum::<f64>() * 0.5 * h
        })
        .collect();
    parts.iter().sum()
}

fn check_chamber(rs: &RootSystem, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::Domain(format!("one-vertex integrals need k >= 2, got {k}")));
    }
    if rs.rank > 2 {
        return Err(Error::Config(format!("chamber integrals are implemented for rank <= 2, got {}", rs.rank)));
    }
    Ok(())
}

/// I_k truncated at a given radius; k = 2 receives the averaged 1/R tail.
pub fn one_vertex_integral_at_radius(rs: &RootSystem, k: usize, radius: f64) -> Result<f64> {
    check_chamber(rs, k)?;
    let d = rs.dim_group();
    let kernel = RadialKernel::new(d);
    let power = (d - 1) as i32;
    let radial = radial_panels(|r| r.powi(power) * kernel.eval(r).powi(k as i32), radius);
    let tail = if k == 2 {
        // K_d(r)² ~ (2/π) cos²(r − (d+1)π/4) / r^{d+1}
        let chi = radius - (d as f64 + 1.0) * PI / 4.0;
        1.0 / (PI * radius) - (2.0 * chi).sin() / (2.0 * PI * radius * radius)
    } else {
        0.0
    };
    let pi_rho = pi_poly(rs, &rs.rho_e());
    let prefactor = pi_rho.powi(k as i32 - 2) / (2.0 * PI).powf(rs.rank as f64 * k as f64 / 2.0);
    Ok(prefactor * angular_factor(rs)? * (radial + tail))
}

/// Truncation radius from |J_ν(r)| ≤ √(2/(πr)) with a 20% margin per power.
fn truncation_radius(d: usize, k: usize, accumulated: f64) -> Result<f64> {
    if k == 2 {
        return Ok(QUADRATIC_RADIUS);
    }
    let exponent = (d as f64 - 1.0) - k as f64 * (d as f64 + 1.0) / 2.0;
    let amp = (1.2 * (2.0 / PI).sqrt()).powi(k as i32);
    let mut radius: f64 = 64.0;
    while amp * radius.powf(exponent + 1.0) / (-exponent - 1.0) > TAIL_TOL * accumulated {
        radius *= 2.0;
        if radius > MAX_RADIUS {
            return Err(Error::Numerical(format!("no truncation radius below {MAX_RADIUS} for k = {k}")));
        }
    }
    Ok(radius)
}

/// I_k = ∫_C (∂_{Φ−}J̃(x)/(2π)^{r/2})^k dx / δ(x)^{k−2} for rank r ≤ 2.
pub fn one_vertex_integral(rs: &RootSystem, k: usize) -> Result<f64> {
    check_chamber(rs, k)?;
    let d = rs.dim_group();
    let kernel = RadialKernel::new(d);
    let power = (d - 1) as i32;
    let core = radial_panels(|r| r.powi(power) * kernel.eval(r).powi(k as i32), 16.0);
    let radius = truncation_radius(d, k, core.abs())?;
    one_vertex_integral_at_radius(rs, k, radius)
}

fn su2() -> RootSystem {
    RootSystem::new(Family::A, 1).expect("A1 exists")
}

/// Radial profile of ∂_{Φ−}J̃^a/((2π)^{a/2} δ^{a−1}) for SU(2).
struct Su2Profile {
    alpha_norm: f64,
    pi_rho: f64,
    kernel: RadialKernel,
}

impl Su2Profile {
    fn new(rs: &RootSystem) -> Self {
        Su2Profile { alpha_norm: rs.norm(&rs.root_e(0)), pi_rho: pi_poly(rs, &rs.rho_e()), kernel: RadialKernel::new(3) }
    }

    fn eval(&self, a: usize, r: f64) -> f64 {
        self.alpha_norm * r * self.pi_rho.powi(a as i32 - 1) * self.kernel.eval(r).powi(a as i32) / (2.0 * PI).powf(0.5 * a as f64)
    }

    /// ∫_lo^hi of the a = 1 profile, from r·K_3(r) = −K_1′(r).
    fn linear_integral(&self, lo: f64, hi: f64) -> f64 {
        let k1 = RadialKernel::new(1);
        self.alpha_norm * (k1.eval(lo) - k1.eval(hi)) / (2.0 * PI).sqrt()
    }
}

/// Clebsch–Gordan density q_{x,y}(z) for SU(2) in the chamber coordinate.
pub fn su2_cg_density(x: f64, y: f64, z: f64) -> f64 {
    let w = su2().fundamental_to_e(&[1.0]);
    let height = 0.5 / su2().norm(&w);
    if (x - y).abs() <= z && z <= x + y {
        height
    } else {
        0.0
    }
}

fn two_vertex_raw(a: [usize; 3], radius: f64) -> f64 {
    let rs = su2();
    let prof = Su2Profile::new(&rs);
    let height = su2_cg_density(1.0, 1.0, 1.0);
    let n = (radius / PANEL).ceil() as usize;
    let h = radius / n as f64;
    let (nodes, weights) = gauss_legendre(PANEL_ORDER);
    let grid: Vec<(f64, f64)> = (0..n)
        .flat_map(|i| nodes.iter().zip(&weights).map(move |(t, w)| (i as f64 * h + 0.5 * h * (t + 1.0), 0.5 * h * w)))
        .collect();
    let inner = |x: f64, y: f64| -> f64 {
        let (lo, hi) = ((x - y).abs(), x + y);
        if a[2] == 1 {
            return prof.linear_integral(lo, hi);
        }
        let m = ((hi - lo) / PANEL).ceil().max(1.0) as usize;
        let hz = (hi - lo) / m as f64;
        (0..m)
            .map(|j| {
                let z0 = lo + j as f64 * hz;
                nodes.iter().zip(&weights).map(|(t, w)| w * prof.eval(a[2], z0 + 0.5 * hz * (t + 1.0))).sum::<f64>() * 0.5 * hz
            })
            .sum()
    };
    let rows: Vec<f64> = grid
        .par_iter()
        .map(|&(x, wx)| {
            let fx = prof.eval(a[0], x);
            wx * fx * grid.iter().map(|&(y, wy)| wy * prof.eval(a[1], y) * inner(x, y)).sum::<f64>()
        })
        .collect();
    height * rows.iter().sum::<f64>()
}

/// The SU(2) two-vertex integral with edge labels (a₁, a₂, a₃).
pub fn two_vertex_integral_su2(a: [usize; 3]) -> Result<f64> {
    if !(a[0] >= a[1] && a[1] >= 2 && a[2] >= 1) {
        return Err(Error::Domain(format!("two-vertex labels need a1 >= a2 >= 2 and a3 >= 1, got {a:?}")));
    }
    Ok(two_vertex_raw(a, TWO_VERTEX_RADIUS))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Quadrature,
    Simulated,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComponentIntegral {
    pub component: String,
    pub labels: Vec<usize>,
    pub value: f64,
    pub stderr: f64,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentTerm {
    pub reduction: String,
    pub multiplicity: usize,
    pub k: usize,
    /// multiplicity · I_R, the coefficient of (ℓ′)^{k−1}.
    pub coefficient: f64,
    pub stderr: f64,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentEntry {
    pub s: usize,
    pub value: f64,
    pub stderr: f64,
    /// Coefficients of (ℓ′)^j, j = 0..s−1.
    pub coefficients: Vec<f64>,
    pub terms: Vec<MomentTerm>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitMomentTable {
    pub ell: f64,
    pub ell_prime: f64,
    pub one_vertex: Vec<(usize, f64)>,
    pub components: Vec<ComponentIntegral>,
    pub moments: Vec<MomentEntry>,
}

impl LimitMomentTable {
    pub fn moment(&self, s: usize) -> Option<f64> {
        self.moments.iter().find(|m| m.s == s).map(|m| m.value)
    }

    pub fn one_vertex(&self, k: usize) -> Option<f64> {
        self.one_vertex.iter().find(|(j, _)| *j == k).map(|(_, v)| *v)
    }

    /// Same integrals, another ℓ.
    pub fn at_ell(&self, rs: &RootSystem, ell: f64) -> LimitMomentTable {
        let lp = ell_prime(rs, ell);
        let mut out = self.clone();
        out.ell = ell;
        out.ell_prime = lp;
        for m in &mut out.moments {
            m.value = m.coefficients.iter().enumerate().map(|(j, c)| c * lp.powi(j as i32)).sum();
            m.stderr = m.terms.iter().map(|t| (t.stderr * lp.powi(t.k as i32 - 1)).powi(2)).sum::<f64>().sqrt();
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SimulationBudget {
    pub trials: usize,
    pub seed: u64,
}

impl Default for SimulationBudget {
    fn default() -> Self {
        SimulationBudget { trials: 20_000, seed: 17 }
    }
}

fn component_integral(
    comp: &Component,
    rs: &RootSystem,
    one_vertex: &BTreeMap<usize, f64>,
    budget: SimulationBudget,
) -> Result<ComponentIntegral> {
    let labels = comp.labels();
    let name = comp.to_string();
    if comp.is_loop() {
        let v = *one_vertex.get(&labels[0]).ok_or_else(|| Error::Config(format!("missing I_{}", labels[0])))?;
        return Ok(ComponentIntegral { component: name, labels, value: v, stderr: 0.0, provenance: Provenance::Quadrature });
    }
    if comp.n_vertices == 2 && labels.len() == 3 {
        let v = two_vertex_integral_su2([labels[0], labels[1], labels[2]])?;
        return Ok(ComponentIntegral { component: name, labels, value: v, stderr: 0.0, provenance: Provenance::Quadrature });
    }
    let single = ReducedCircuit::new(vec![comp.clone()]);
    let k = k_parameter(&single);
    let pattern = comp.pattern()?;
    let est = embedding_count_estimate(&pattern, rs.dim_group(), 1.0, budget.trials, budget.seed)?;
    let scale = volume_ratio(rs).powi(k as i32 - 1);
    Ok(ComponentIntegral { component: name, labels, value: est.mean * scale, stderr: est.stderr * scale, provenance: Provenance::Simulated })
}

/// M_2 … M_{s_max} for SU(2) at ℓ, with per-term provenance.
pub fn limiting_moments(ell: f64, s_max: usize, budget: SimulationBudget) -> Result<LimitMomentTable> {
    if !(2..=MAX_MOMENT).contains(&s_max) {
        return Err(Error::Domain(format!("s_max must lie in 2..={MAX_MOMENT}, got {s_max}")));
    }
    if !(ell > 0.0) {
        return Err(Error::Domain(format!("ell must be positive, got {ell}")));
    }
    let rs = su2();
    let lp = ell_prime(&rs, ell);
    let mut one_vertex = BTreeMap::new();
    for k in 2..=s_max {
        one_vertex.insert(k, one_vertex_integral(&rs, k)?);
    }
    let mut cache: BTreeMap<Component, ComponentIntegral> = BTreeMap::new();
    let mut moments = Vec::new();
    for s in 2..=s_max {
        let mut terms = Vec::new();
        let mut coefficients = vec![0.0; s];
        for row in expansion_table(s)? {
            let mut value = 1.0;
            let mut rel_var = 0.0;
            let mut provenance = Provenance::Quadrature;
            for comp in &row.reduced.components {
                if !cache.contains_key(comp) {
                    let ci = component_integral(comp, &rs, &one_vertex, budget)?;
                    cache.insert(comp.clone(), ci);
                }
                let ci = &cache[comp];
                value *= ci.value;
                rel_var += (ci.stderr / ci.value).powi(2);
                if ci.provenance == Provenance::Simulated {
                    provenance = Provenance::Simulated;
                }
            }
            let coefficient = row.multiplicity as f64 * value;
            coefficients[row.k - 1] += coefficient;
            terms.push(MomentTerm {
                reduction: row.reduced.to_string(),
                multiplicity: row.multiplicity,
                k: row.k,
                coefficient,
                stderr: coefficient.abs() * rel_var.sqrt(),
                provenance,
            });
        }
        let value = coefficients.iter().enumerate().map(|(j, c)| c * lp.powi(j as i32)).sum();
        let stderr = terms.iter().map(|t| (t.stderr * lp.powi(t.k as i32 - 1)).powi(2)).sum::<f64>().sqrt();
        moments.push(MomentEntry { s, value, stderr, coefficients, terms });
    }
    Ok(LimitMomentTable {
        ell,
        ell_prime: lp,
        one_vertex: one_vertex.into_iter().collect(),
        components: cache.into_values().collect(),
        moments,
    })
}

/// ∏_{t=0}^{2s−2} (t + m₂), the bound on M_{2s} with m₂ = c(dim G)·ℓ/vol(G).
pub fn even_moment_bound(m2: f64, s: usize) -> f64 {
    (0..=2 * s - 2).map(|t| t as f64 + m2).product()
}

/// Edge of a weighted multigraph: (a, b, highest weight k of SU(2)).
pub type WeightedEdge = (usize, usize, u32);

fn su2_character(k: u32, cos_theta: f64) -> f64 {
    let theta = cos_theta.clamp(-1.0, 1.0).acos();
    let s = theta.sin();
    if s < 1e-9 {
        let sign = if cos_theta > 0.0 || k % 2 == 0 { 1.0 } else { -1.0 };
        return sign * (k + 1) as f64;
    }
    ((k + 1) as f64 * theta).sin() / s
}

fn haar_quat<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
    loop {
        let v: [f64; 4] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.map(|x| x / n);
        }
    }
}

/// Monte Carlo mean over Haar tuples of ∏_e χ_{k_e}(g_a g_b^{−1}) for SU(2).
pub fn graph_functional_estimate(n_vertices: usize, edges: &[WeightedEdge], samples: usize, seed: u64) -> Result<Estimate> {
    if samples == 0 {
        return Err(Error::Domain("samples must be positive".into()));
    }
    if let Some(&(a, b, _)) = edges.iter().find(|&&(a, b, _)| a >= n_vertices || b >= n_vertices) {
        return Err(Error::Input(format!("edge ({a}, {b}) leaves the {n_vertices} vertices")));
    }
    const BATCH: usize = 4096;
    let batches = samples.div_ceil(BATCH);
    let values: Vec<Vec<f64>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = trial_rng(seed, b as u64);
            let count = BATCH.min(samples - b * BATCH);
            (0..count)
                .map(|_| {
                    let g: Vec<[f64; 4]> = (0..n_vertices).map(|_| haar_quat(&mut rng)).collect();
                    edges
                        .iter()
                        .map(|&(a, b, k)| su2_character(k, quat_mul(&g[a], &quat_conj(&g[b]))[0]))
                        .product::<f64>()
                })
                .collect()
        })
        .collect();
    Ok(Estimate::from_samples(&values.concat()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::partial_phi_minus_exact;
    use crate::crystal::{lr_oracle, CrystalType};
    use crate::geometry::{ball_fraction, geodesic_distance, haar_sample, SpaceKind, SpaceSpec};
    use crate::poisson::{ball_volume, RootedPattern};
    use crate::quad::integrate;
    use proptest::prelude::*;

    fn lens(r: f64) -> f64 {
        PI / 12.0 * (4.0 + r) * (2.0 - r).powi(2)
    }

    #[test]
    fn radial_form_matches_matching_sum() {
        for (f, n) in [(Family::A, 1), (Family::A, 2), (Family::B, 2), (Family::C, 2), (Family::A, 3)] {
            let rs = RootSystem::new(f, n).unwrap();
            for k in 1..5 {
                let coords: Vec<f64> = (0..rs.rank).map(|i| 0.9 * k as f64 + 0.4 * i as f64).collect();
                let x = rs.fundamental_to_e(&coords);
                let a = partial_phi_minus_radial(&rs, &x);
                let b = partial_phi_minus_exact(&rs, &x).unwrap();
                assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()), "{f}{n} {a} {b}");
            }
        }
    }

    #[test]
    fn c_coeff_trivial_and_su2() {
        let rs = su2();
        for level in [0.5, 1.0, 2.5] {
            let c0 = c_coeff(&rs, &DominantWeight::zero(&rs), level).unwrap();
            assert_eq!(c0, limiting_eigenvalue(&rs, &DominantWeight::zero(&rs), level).unwrap());
            for k in 0..8 {
                let lam = DominantWeight::new(&rs, vec![k]).unwrap();
                let want = (k + 1) as f64 * crate::gaussian::su2_closed_form(k as u64, level);
                assert!((c_coeff(&rs, &lam, level).unwrap() - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn parseval_su2() {
        let rs = su2();
        let sp = SpaceSpec::new(SpaceKind::SU(2)).unwrap();
        for level in [0.7, 1.5, 2.8] {
            let frac = ball_fraction(&sp, level).unwrap();
            let c0 = c_coeff(&rs, &DominantWeight::zero(&rs), level).unwrap();
            assert!((c0 - frac).abs() < 1e-10);
            let sum: f64 = (0..4000).map(|k| c_coeff(&rs, &DominantWeight::new(&rs, vec![k]).unwrap(), level).unwrap().powi(2)).sum();
            assert!(sum <= frac + 1e-12 && sum > frac * 0.999, "{sum} {frac}");
        }
    }

    #[test]
    fn parseval_su3_against_monte_carlo() {
        let rs = RootSystem::new(Family::A, 2).unwrap();
        let sp = SpaceSpec::new(SpaceKind::SU(3)).unwrap();
        let level = 3.0;
        let mut sum = 0.0;
        for w in rs.enumerate_dominant_weights(crate::gaussian::default_cutoff(level) / 2.0) {
            sum += c_coeff(&rs, &w, level).unwrap().powi(2);
        }
        let trials = 100_000;
        let mut rng = trial_rng(3, 0);
        let id = haar_sample(&sp, &mut rng).unwrap();
        let hits = (0..trials).filter(|_| geodesic_distance(&sp, &id, &haar_sample(&sp, &mut rng).unwrap()).unwrap() <= level).count();
        let p = hits as f64 / trials as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!(sum <= p + 4.0 * se, "{sum} vs {p} ± {se}");
    }

    #[test]
    fn quadratic_integral_is_mean_degree() {
        for (n, d) in [(1, 3), (2, 8)] {
            let rs = RootSystem::new(Family::A, n).unwrap();
            let i2 = one_vertex_integral(&rs, 2).unwrap();
            let want = ball_volume(d, 1.0) * volume_ratio(&rs);
            assert!((i2 / want - 1.0).abs() < 1e-4, "A{n}: {i2} vs {want}");
        }
        assert!((one_vertex_integral(&su2(), 2).unwrap() - 1.0 / (12.0 * PI)).abs() < 1e-8);
    }

    #[test]
    fn cubic_integral_matches_lens_volume() {
        let rs = su2();
        let e3 = integrate(|r| 4.0 * PI * r * r * lens(r), 0.0, 1.0, 1e-14, 1e-13).unwrap();
        let want = e3 * volume_ratio(&rs).powi(2);
        let got = one_vertex_integral(&rs, 3).unwrap();
        assert!((got / want - 1.0).abs() < 1e-6, "{got} vs {want}");
    }

    #[test]
    fn cubic_integral_stable_under_doubling() {
        let rs = su2();
        let a = one_vertex_integral_at_radius(&rs, 3, 2048.0).unwrap();
        let b = one_vertex_integral_at_radius(&rs, 3, 4096.0).unwrap();
        assert!(((a - b) / b).abs() < 1e-6);
    }

    #[test]
    fn even_integrals_positive_and_a2_supported() {
        for n in [1, 2] {
            let rs = RootSystem::new(Family::A, n).unwrap();
            for k in [2, 4, 6] {
                assert!(one_vertex_integral(&rs, k).unwrap() > 0.0);
            }
        }
        assert!(one_vertex_integral(&RootSystem::new(Family::A, 3).unwrap(), 2).is_err());
        assert!(one_vertex_integral(&su2(), 1).is_err());
    }

    #[test]
    fn loop_integrals_match_cycle_embeddings() {
        let rs = su2();
        for k in [4, 5] {
            let est = embedding_count_estimate(&RootedPattern::cycle(k).unwrap(), 3, 1.0, 20_000, k as u64).unwrap();
            let want = one_vertex_integral(&rs, k).unwrap() / volume_ratio(&rs).powi(k as i32 - 1);
            assert!((est.mean - want).abs() < 4.0 * est.stderr, "k={k}: {} ± {} vs {want}", est.mean, est.stderr);
        }
    }

    #[test]
    fn weyl_quotient_degenerates_linearly() {
        for n in [1, 2] {
            let rs = RootSystem::new(Family::A, n).unwrap();
            let sign = if rs.positive_roots.len() % 2 == 0 { 1.0 } else { -1.0 };
            let x = rs.fundamental_to_e(&vec![1.3; n]);
            let target = sign * partial_phi_minus_radial(&rs, &x);
            let e1 = (weyl_difference_quotient(&rs, &x, 0.02) - target).abs();
            let e2 = (weyl_difference_quotient(&rs, &x, 0.01) - target).abs();
            assert!(e2 < 0.6 * e1, "A{n}: {e1} {e2}");
        }
    }

    #[test]
    fn two_vertex_matches_lens_oracle() {
        let e221 = integrate(|r| 4.0 * PI * r * r * lens(r).powi(2), 0.0, 1.0, 1e-14, 1e-13).unwrap();
        assert!((e221 - 17.354219).abs() < 1e-5);
        let want = e221 * volume_ratio(&su2()).powi(3);
        let got = two_vertex_integral_su2([2, 2, 1]).unwrap();
        assert!((got / want - 1.0).abs() < 1e-3, "{got} vs {want}");
    }

    #[test]
    fn two_vertex_numeric_inner_agrees_with_closed_form() {
        let rs = su2();
        let prof = Su2Profile::new(&rs);
        let (nodes, weights) = gauss_legendre(PANEL_ORDER);
        for (lo, hi) in [(0.0, 0.7), (0.3, 5.0), (2.0, 40.0)] {
            let m = ((hi - lo) / PANEL).ceil() as usize;
            let h = (hi - lo) / m as f64;
            let num: f64 = (0..m)
                .map(|j| nodes.iter().zip(&weights).map(|(t, w)| w * prof.eval(1, lo + j as f64 * h + 0.5 * h * (t + 1.0))).sum::<f64>() * 0.5 * h)
                .sum();
            assert!((num - prof.linear_integral(lo, hi)).abs() < 1e-12);
        }
    }

    #[test]
    fn cg_density_mass() {
        for (x, y) in [(0.3, 0.8), (2.0, 1.1), (1.5, 1.5)] {
            let mass = integrate(|z| su2_cg_density(x, y, z), 0.0, 5.0, 1e-12, 1e-12).unwrap();
            let want = 2.0 * f64::min(x, y) * su2_cg_density(1.0, 1.0, 1.0);
            assert!((mass - want).abs() < 1e-6, "{mass} {want}");
        }
    }

    #[test]
    fn two_vertex_symmetric_and_checked() {
        let a = two_vertex_raw([3, 2, 1], 60.0);
        let b = two_vertex_raw([2, 3, 1], 60.0);
        assert!((a - b).abs() < 1e-12 * a.abs());
        assert!(two_vertex_integral_su2([2, 3, 1]).is_err());
        assert!(two_vertex_integral_su2([2, 1, 1]).is_err());
    }

    #[test]
    fn low_moments_follow_polynomial_identities() {
        let t = limiting_moments(1.0, 5, SimulationBudget::default()).unwrap();
        let lp = t.ell_prime;
        let i = |k| t.one_vertex(k).unwrap();
        assert!((t.moment(2).unwrap() - i(2) * lp).abs() < 1e-15);
        assert!((t.moment(3).unwrap() - i(3) * lp * lp).abs() < 1e-15);
        let m4 = i(4) * lp.powi(3) + 2.0 * i(2).powi(2) * lp.powi(2) + i(2) * lp;
        assert!((t.moment(4).unwrap() - m4).abs() < 1e-15);
        let m5 = i(5) * lp.powi(4) + 5.0 * i(2) * i(3) * lp.powi(3) + 5.0 * i(3) * lp.powi(2);
        assert!((t.moment(5).unwrap() - m5).abs() < 1e-15);
        let sp = SpaceSpec::new(SpaceKind::SU(2)).unwrap();
        assert!((t.moment(2).unwrap() - ball_volume(3, 1.0) / sp.vol).abs() < 1e-4 * t.moment(2).unwrap());
    }

    #[test]
    fn higher_moments_carry_provenance() {
        let t = limiting_moments(1.0, 7, SimulationBudget { trials: 2000, seed: 1 }).unwrap();
        let m6 = t.moments.iter().find(|m| m.s == 6).unwrap();
        let theta = m6.terms.iter().find(|x| !x.reduction.starts_with("loop")).unwrap();
        assert_eq!(theta.multiplicity, 9);
        assert_eq!(theta.provenance, Provenance::Quadrature);
        let m7 = t.moments.iter().find(|m| m.s == 7).unwrap();
        assert!(m7.terms.iter().any(|x| x.provenance == Provenance::Simulated));
        assert_eq!(m7.terms.iter().filter(|x| x.provenance == Provenance::Simulated).count(), 1);
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"simulated\"") && json.contains("\"quadrature\""));
    }

    #[test]
    fn moments_are_polynomials_in_ell() {
        let rs = su2();
        let base = limiting_moments(1.0, 5, SimulationBudget::default()).unwrap();
        let ells = [0.5, 1.0, 2.0, 4.0];
        for s in 2..=5 {
            let xs: Vec<f64> = ells.iter().map(|&l| ell_prime(&rs, l)).collect();
            let ys: Vec<f64> = ells.iter().map(|&l| base.at_ell(&rs, l).moment(s).unwrap()).collect();
            // least squares for Σ_{j=1}^{s−1} c_j x^j
            let m = s - 1;
            let a = nalgebra::DMatrix::from_fn(xs.len(), m, |i, j| xs[i].powi(j as i32 + 1));
            let b = nalgebra::DVector::from_vec(ys.clone());
            let fit = a.clone().svd(true, true).solve(&b, 1e-300).unwrap();
            let entry = base.moments.iter().find(|e| e.s == s).unwrap();
            let top = entry.coefficients.iter().fold(0.0f64, |a, c| a.max(c.abs()));
            for j in 0..m {
                let want = entry.coefficients[j + 1];
                assert!(want >= 0.0);
                assert!((fit[j] - want).abs() <= 1e-6 * (want.abs() + top), "s={s} j={}: {} {want}", j + 1, fit[j]);
            }
            assert!(entry.coefficients[m] > 0.0);
            assert_eq!(entry.coefficients[0], 0.0);
        }
    }

    #[test]
    fn even_moments_below_bound() {
        let sp = SpaceSpec::new(SpaceKind::SU(2)).unwrap();
        for ell in [0.5, 1.0, 4.0, 50.0] {
            let t = limiting_moments(ell, 6, SimulationBudget::default()).unwrap();
            let m2 = ball_volume(3, 1.0) * ell / sp.vol;
            for s in 1..=3 {
                assert!(t.moment(2 * s).unwrap() <= even_moment_bound(m2, s) * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn graph_functional_dimensions_and_lr() {
        for k in 0..5u32 {
            let e = graph_functional_estimate(1, &[(0, 0, k)], 100, 1).unwrap();
            assert!((e.mean - (k + 1) as f64).abs() < 1e-9);
        }
        for w in [[2u32, 2, 2], [1, 1, 2], [1, 1, 1], [3, 2, 1]] {
            let target = lr_oracle(CrystalType::A1, &[w[0] as i64], &[w[1] as i64], &[w[2] as i64]).unwrap() as f64;
            let e = graph_functional_estimate(2, &[(0, 1, w[0]), (0, 1, w[1]), (0, 1, w[2])], 100_000, 7).unwrap();
            assert!((e.mean - target).abs() < 4.0 * e.stderr.max(1e-3), "{w:?}: {} ± {} vs {target}", e.mean, e.stderr);
        }
        assert!(graph_functional_estimate(2, &[(0, 2, 1)], 10, 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn characters_are_class_functions(k in 0u32..12, seed in 0u64..1000) {
            let mut rng = trial_rng(seed, 0);
            let g = haar_quat(&mut rng);
            let h = haar_quat(&mut rng);
            let conj = quat_mul(&quat_mul(&h, &g), &quat_conj(&h));
            prop_assert!((su2_character(k, g[0]) - su2_character(k, conj[0])).abs() < 1e-9);
        }
    }
}
