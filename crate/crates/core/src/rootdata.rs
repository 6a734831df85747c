//! Cartan–Weyl data for the classical families A_n, B_n, C_n, D_n.
//!
//! Vectors live in the ambient e-basis (length n+1 for A_n, n otherwise).
//! Weights are stored doubled so spin weights stay integral.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "D" => Ok(Family::D),
            _ => Err(Error::Config(format!("unknown family {s:?}"))),
        }
    }
}

/// Which basis a weight vector is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    E,
    Fundamental,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootSystem {
    pub family: Family,
    pub n: usize,
    pub rank: usize,
    /// Length of e-basis vectors.
    pub ambient: usize,
    pub positive_roots: Vec<Vec<i64>>,
    pub simple_roots: Vec<Vec<i64>>,
    /// Doubled e-coordinates.
    pub fundamental_weights: Vec<Vec<i64>>,
    /// Doubled e-coordinates.
    pub rho: Vec<i64>,
    /// ‖e_i‖² as a fraction (numerator, denominator).
    pub e_norm_sq: (i64, i64),
    pub weyl_order: u128,
    /// Restrict to representations of SO(n) rather than Spin(n).
    pub integral_only: bool,
}

/// Element of the Weyl group acting by y_i = signs_i · x_{perm_i}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylElement {
    pub perm: Vec<usize>,
    pub signs: Vec<i8>,
    pub sign: i8,
}

impl WeylElement {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.perm.iter().zip(&self.signs).map(|(&p, &s)| s as f64 * x[p]).collect()
    }
    pub fn apply_int(&self, x: &[i64]) -> Vec<i64> {
        self.perm.iter().zip(&self.signs).map(|(&p, &s)| s as i64 * x[p]).collect()
    }
}

/// Lazy enumeration of a Weyl group.
pub struct WeylIter {
    family: Family,
    perm: Vec<usize>,
    mask: u64,
    done: bool,
}

fn perm_parity(p: &[usize]) -> i8 {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

impl WeylIter {
    fn mask_ok(&self, mask: u64) -> bool {
        match self.family {
            Family::A => mask == 0,
            Family::B | Family::C => true,
            Family::D => mask.count_ones() % 2 == 0,
        }
    }
    fn advance(&mut self) {
        let m = self.perm.len();
        loop {
            self.mask += 1;
            if self.mask >= (1u64 << m) || self.family == Family::A {
                self.mask = 0;
                if !next_permutation(&mut self.perm) {
                    self.done = true;
                    return;
                }
            }
            if self.mask_ok(self.mask) {
                return;
            }
        }
    }
}

impl Iterator for WeylIter {
    type Item = WeylElement;
    fn next(&mut self) -> Option<WeylElement> {
        if self.done {
            return None;
        }
        let m = self.perm.len();
        let signs: Vec<i8> = (0..m).map(|i| if self.mask >> i & 1 == 1 { -1 } else { 1 }).collect();
        let neg = signs.iter().filter(|&&s| s < 0).count();
        let sign = perm_parity(&self.perm) * if neg % 2 == 0 { 1 } else { -1 };
        let out = WeylElement { perm: self.perm.clone(), signs, sign };
        self.advance();
        Some(out)
    }
}

/// Dominant weight given by its fundamental-weight coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DominantWeight {
    pub coords: Vec<i64>,
}

impl DominantWeight {
    pub fn new(rs: &RootSystem, coords: Vec<i64>) -> Result<Self> {
        if coords.len() != rs.rank {
            return Err(Error::Dimension { expected: rs.rank, got: coords.len() });
        }
        if coords.iter().any(|&c| c < 0) {
            return Err(Error::NotDominant(coords));
        }
        Ok(DominantWeight { coords })
    }
    pub fn zero(rs: &RootSystem) -> Self {
        DominantWeight { coords: vec![0; rs.rank] }
    }
    /// Doubled e-coordinates (the partition form, signed for D_n).
    pub fn doubled(&self, rs: &RootSystem) -> Vec<i64> {
        let mut out = vec![0i64; rs.ambient];
        for (a, w) in self.coords.iter().zip(&rs.fundamental_weights) {
            for (o, x) in out.iter_mut().zip(w) {
                *o += a * x;
            }
        }
        out
    }
    /// e-coordinates as reals.
    pub fn to_e(&self, rs: &RootSystem) -> Vec<f64> {
        self.doubled(rs).iter().map(|&x| x as f64 / 2.0).collect()
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Volumes {
    pub vol_t_mod_tz: f64,
    pub vol_g_macdonald: f64,
    pub vol_g_kp: f64,
}

fn unit(m: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; m];
    v[i] = 1;
    v
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Exact running product of fractions.
struct Frac {
    num: i128,
    den: i128,
}

impl Frac {
    fn one() -> Self {
        Frac { num: 1, den: 1 }
    }
    fn mul(&mut self, p: i128, q: i128) -> Result<()> {
        let g = gcd(p, q).max(1);
        let (p, q) = (p / g, q / g);
        let g1 = gcd(p, self.den).max(1);
        let g2 = gcd(q, self.num).max(1);
        let overflow = || Error::Numerical("dimension overflow".into());
        self.num = (self.num / g2).checked_mul(p / g1).ok_or_else(overflow)?;
        self.den = (self.den / g1).checked_mul(q / g2).ok_or_else(overflow)?;
        if self.den < 0 {
            self.num = -self.num;
            self.den = -self.den;
        }
        Ok(())
    }
    fn integer(&self) -> Result<u128> {
        if self.den != 1 || self.num <= 0 {
            return Err(Error::Numerical(format!("non-integral dimension {}/{}", self.num, self.den)));
        }
        Ok(self.num as u128)
    }
}

fn factorial(k: u128) -> u128 {
    (1..=k).product::<u128>().max(1)
}

impl RootSystem {
    pub fn new(family: Family, n: usize) -> Result<Self> {
        let min = match family {
            Family::A => 1,
            Family::B | Family::C => 2,
            Family::D => 3,
        };
        if n < min || n > 12 {
            return Err(Error::Config(format!("{family}_{n} is outside the supported range")));
        }
        let m = if family == Family::A { n + 1 } else { n };
        let e = |i: usize| unit(m, i);
        let add = |a: &[i64], b: &[i64], s: i64| a.iter().zip(b).map(|(x, y)| x + s * y).collect::<Vec<i64>>();
        let mut pos = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                pos.push(add(&e(i), &e(j), -1));
                if family != Family::A {
                    pos.push(add(&e(i), &e(j), 1));
                }
            }
            match family {
                Family::B => pos.push(e(i)),
                Family::C => pos.push(e(i).iter().map(|x| 2 * x).collect()),
                _ => {}
            }
        }
        let mut simple: Vec<Vec<i64>> = Vec::new();
        let chain = if family == Family::A { n } else { n - 1 };
        for i in 0..chain {
            if family == Family::D && i == n - 2 {
                break;
            }
            simple.push(add(&e(i), &e(i + 1), -1));
        }
        match family {
            Family::A => {}
            Family::B => simple.push(e(n - 1)),
            Family::C => simple.push(e(n - 1).iter().map(|x| 2 * x).collect()),
            Family::D => {
                simple.push(add(&e(n - 2), &e(n - 1), 1));
                simple.push(add(&e(n - 2), &e(n - 1), -1));
            }
        }
        let prefix = |i: usize| (0..m).map(|j| if j < i { 2 } else { 0 }).collect::<Vec<i64>>();
        let mut fund = Vec::new();
        for i in 1..=n {
            let w = match family {
                Family::A | Family::C => prefix(i),
                Family::B if i == n => vec![1; m],
                Family::B => prefix(i),
                Family::D if i == n - 1 => vec![1; m],
                Family::D if i == n => {
                    let mut v = vec![1; m];
                    v[m - 1] = -1;
                    v
                }
                Family::D => prefix(i),
            };
            fund.push(w);
        }
        let mut rho = vec![0i64; m];
        for w in &fund {
            for (r, x) in rho.iter_mut().zip(w) {
                *r += x;
            }
        }
        let nn = n as i64;
        let e_norm_sq = match family {
            Family::A => (1, 2 * nn + 2),
            Family::B => (1, 4 * nn - 2),
            Family::C => (1, 4 * nn + 4),
            Family::D => (1, 4 * nn - 4),
        };
        let nf = factorial(n as u128);
        let weyl_order = match family {
            Family::A => factorial(n as u128 + 1),
            Family::B | Family::C => (1u128 << n) * nf,
            Family::D => (1u128 << (n - 1)) * nf,
        };
        Ok(RootSystem {
            family,
            n,
            rank: n,
            ambient: m,
            positive_roots: pos,
            simple_roots: simple,
            fundamental_weights: fund,
            rho,
            e_norm_sq,
            weyl_order,
            integral_only: false,
        })
    }

    /// Same data, restricted to representations of SO(n) (types B and D).
    pub fn integral_sublattice(mut self) -> Self {
        self.integral_only = matches!(self.family, Family::B | Family::D);
        self
    }

    pub fn dim_group(&self) -> usize {
        let n = self.n;
        match self.family {
            Family::A => n * (n + 2),
            Family::B | Family::C => n * (2 * n + 1),
            Family::D => n * (2 * n - 1),
        }
    }

    fn e_norm(&self) -> f64 {
        self.e_norm_sq.0 as f64 / self.e_norm_sq.1 as f64
    }

    /// Killing-dual inner product of two e-basis vectors.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        if self.family == Family::A {
            let sx: f64 = x.iter().sum();
            let sy: f64 = y.iter().sum();
            dot -= sx * sy / self.ambient as f64;
        }
        dot * self.e_norm()
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    /// Converts fundamental coordinates to the e-basis.
    pub fn fundamental_to_e(&self, a: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient];
        for (ai, w) in a.iter().zip(&self.fundamental_weights) {
            for (o, x) in out.iter_mut().zip(w) {
                *o += ai * *x as f64 / 2.0;
            }
        }
        out
    }

    pub fn weight_norm(&self, x: &[f64], basis: Basis) -> Result<f64> {
        let expected = match basis {
            Basis::E => self.ambient,
            Basis::Fundamental => self.rank,
        };
        if x.len() != expected {
            return Err(Error::Dimension { expected, got: x.len() });
        }
        Ok(match basis {
            Basis::E => self.norm(x),
            Basis::Fundamental => self.norm(&self.fundamental_to_e(x)),
        })
    }

    pub fn rho_e(&self) -> Vec<f64> {
        self.rho.iter().map(|&x| x as f64 / 2.0).collect()
    }

    pub fn root_e(&self, i: usize) -> Vec<f64> {
        self.positive_roots[i].iter().map(|&x| x as f64).collect()
    }

    /// ⟨w, α^∨⟩ for a doubled weight and an integral root.
    pub fn coroot_pairing(&self, weight_doubled: &[i64], root: &[i64]) -> f64 {
        let wa: i64 = weight_doubled.iter().zip(root).map(|(a, b)| a * b).sum();
        let aa: i64 = root.iter().map(|a| a * a).sum();
        wa as f64 / aa as f64
    }

    pub fn weyl_iter(&self) -> WeylIter {
        WeylIter { family: self.family, perm: (0..self.ambient).collect(), mask: 0, done: false }
    }

    /// Materialized Weyl group; refused beyond 10! elements.
    pub fn weyl_group(&self) -> Result<Vec<WeylElement>> {
        if self.weyl_order > 3_628_800 {
            return Err(Error::Size(format!("Weyl group of order {} is not materialized", self.weyl_order)));
        }
        Ok(self.weyl_iter().collect())
    }

    pub fn is_dominant_e(&self, x: &[f64]) -> bool {
        self.simple_roots.iter().all(|a| {
            let d: f64 = a.iter().zip(x).map(|(p, q)| *p as f64 * q).sum();
            d >= -1e-12
        })
    }

    /// Weyl dimension ∏⟨α, λ+ρ⟩ / ∏⟨α, ρ⟩ in exact arithmetic.
    pub fn weyl_dimension(&self, lambda: &DominantWeight) -> Result<u128> {
        self.check(lambda)?;
        let lp: Vec<i64> = lambda.doubled(self).iter().zip(&self.rho).map(|(a, b)| a + b).collect();
        let mut f = Frac::one();
        for a in &self.positive_roots {
            let num: i64 = a.iter().zip(&lp).map(|(x, y)| x * y).sum();
            let den: i64 = a.iter().zip(&self.rho).map(|(x, y)| x * y).sum();
            f.mul(num as i128, den as i128)?;
        }
        f.integer()
    }

    /// Weyl dimension through the partition-product closed forms.
    pub fn weyl_dimension_partition(&self, lambda: &DominantWeight) -> Result<u128> {
        self.check(lambda)?;
        let p = lambda.doubled(self);
        let m = self.ambient;
        let n = self.n as i128;
        let mut f = Frac::one();
        for i in 0..m {
            for j in i + 1..m {
                let (pi, pj) = (p[i] as i128, p[j] as i128);
                let gap = (j - i) as i128;
                f.mul(pi - pj + 2 * gap, 2 * gap)?;
            }
        }
        let shift = match self.family {
            Family::A => None,
            Family::B => Some(2 * n + 1),
            Family::C => Some(2 * n + 2),
            Family::D => Some(2 * n),
        };
        if let Some(s) = shift {
            for i in 0..m {
                let start = if self.family == Family::D { i + 1 } else { i };
                for j in start..m {
                    let (i1, j1) = (i as i128 + 1, j as i128 + 1);
                    let base = s - i1 - j1;
                    f.mul(p[i] as i128 + p[j] as i128 + 2 * base, 2 * base)?;
                }
            }
        }
        f.integer()
    }

    fn check(&self, lambda: &DominantWeight) -> Result<()> {
        if lambda.coords.len() != self.rank {
            return Err(Error::Dimension { expected: self.rank, got: lambda.coords.len() });
        }
        if lambda.coords.iter().any(|&c| c < 0) {
            return Err(Error::NotDominant(lambda.coords.clone()));
        }
        Ok(())
    }

    fn in_sublattice(&self, a: &[i64]) -> bool {
        if !self.integral_only {
            return true;
        }
        match self.family {
            Family::B => a[self.n - 1] % 2 == 0,
            Family::D => (a[self.n - 2] + a[self.n - 1]) % 2 == 0,
            _ => true,
        }
    }

    /// Dominant weights with ‖λ+ρ‖ ≤ cutoff, lexicographic on coordinates.
    pub fn enumerate_dominant_weights(&self, cutoff: f64) -> Vec<DominantWeight> {
        if !(cutoff > 0.0) {
            return Vec::new();
        }
        let rho = self.rho_e();
        let bounds: Vec<i64> = (0..self.rank)
            .map(|i| {
                let w = self.fundamental_to_e(&unit(self.rank, i).iter().map(|&x| x as f64).collect::<Vec<_>>());
                (cutoff / self.norm(&w)).floor() as i64
            })
            .collect();
        let mut out = Vec::new();
        let mut a = vec![0i64; self.rank];
        loop {
            let x: Vec<f64> = self
                .fundamental_to_e(&a.iter().map(|&v| v as f64).collect::<Vec<_>>())
                .iter()
                .zip(&rho)
                .map(|(p, q)| p + q)
                .collect();
            if self.norm(&x) <= cutoff && self.in_sublattice(&a) {
                out.push(DominantWeight { coords: a.clone() });
            }
            let mut k = self.rank;
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                if a[k] < bounds[k] {
                    a[k] += 1;
                    for v in a.iter_mut().skip(k + 1) {
                        *v = 0;
                    }
                    break;
                }
            }
        }
    }

    /// Exponents m_i, read off the heights of positive roots.
    pub fn exponents(&self) -> Vec<usize> {
        let mut rho_check = vec![0.0; self.ambient];
        for a in &self.positive_roots {
            let aa: i64 = a.iter().map(|x| x * x).sum();
            for (r, x) in rho_check.iter_mut().zip(a) {
                *r += *x as f64 / aa as f64;
            }
        }
        let mut counts = vec![0usize; 4 * self.ambient + 2];
        for a in &self.positive_roots {
            let h: f64 = a.iter().zip(&rho_check).map(|(x, r)| *x as f64 * r).sum();
            counts[h.round() as usize] += 1;
        }
        let mut out = Vec::new();
        for h in 1..counts.len() - 1 {
            for _ in counts[h + 1]..counts[h] {
                out.push(h);
            }
        }
        out.sort_unstable();
        out
    }

    /// Volume of 𝔱/𝔱_ℤ, the inverse covolume of the weight lattice.
    pub fn torus_volume(&self) -> f64 {
        let d = self.rank;
        let w: Vec<Vec<f64>> = self
            .fundamental_weights
            .iter()
            .map(|v| v.iter().map(|&x| x as f64 / 2.0).collect())
            .collect();
        let gram = nalgebra::DMatrix::from_fn(d, d, |i, j| self.inner(&w[i], &w[j]));
        1.0 / gram.determinant().sqrt()
    }

    pub fn volumes(&self) -> Volumes {
        let vt = self.torus_volume();
        let dim = self.dim_group() as i32;
        let mut mac = vt * 2f64.powi(dim);
        for i in 0..self.positive_roots.len() {
            let a = self.root_e(i);
            mac /= self.inner(&a, &a);
        }
        for m in self.exponents() {
            mac *= PI.powi(m as i32 + 1) / factorial(m as u128) as f64;
        }
        let rho = self.rho_e();
        let mut kp = (2.0 * 2f64.sqrt() * PI).powi(dim);
        for i in 0..self.positive_roots.len() {
            let x = 2.0 * PI * self.inner(&rho, &self.root_e(i));
            kp *= x.sin() / x;
        }
        Volumes { vol_t_mod_tz: vt, vol_g_macdonald: mac, vol_g_kp: kp }
    }

    /// Closed-form value of vol(𝔱/𝔱_ℤ) for each family.
    pub fn torus_volume_closed_form(&self) -> f64 {
        let n = self.n as f64;
        match self.family {
            Family::A => 2f64.powf(n / 2.0) * (n + 1.0).powf((n + 1.0) / 2.0),
            Family::B => 2f64.powf(n / 2.0 + 1.0) * (2.0 * n - 1.0).powf(n / 2.0),
            Family::C => 2f64.powf(n) * (n + 1.0).powf(n / 2.0),
            Family::D => 2f64.powf(n + 1.0) * (n - 1.0).powf(n / 2.0),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("root system serializes")
    }
}
