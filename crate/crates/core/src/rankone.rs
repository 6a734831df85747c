//! Limiting eigenvalues on rank-one symmetric spaces: spheres and projective spaces.

use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta, beta_reg};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::quad::integrate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RankOneSpace {
    SphereR(usize),
    ProjR(usize),
    ProjC(usize),
    ProjH(usize),
    ProjO2,
}

impl fmt::Display for RankOneSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankOneSpace::SphereR(n) => write!(f, "RS{n}"),
            RankOneSpace::ProjR(n) => write!(f, "RP{n}"),
            RankOneSpace::ProjC(n) => write!(f, "CP{n}"),
            RankOneSpace::ProjH(n) => write!(f, "HP{n}"),
            RankOneSpace::ProjO2 => write!(f, "OP2"),
        }
    }
}

impl std::str::FromStr for RankOneSpace {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let up = s.to_ascii_uppercase();
        if up == "OP2" {
            return Ok(RankOneSpace::ProjO2);
        }
        let bad = || Error::Config(format!("unknown rank-one space {s:?}"));
        if up.len() < 3 {
            return Err(bad());
        }
        let n: usize = up[2..].parse().map_err(|_| bad())?;
        let sp = match &up[..2] {
            "RS" => RankOneSpace::SphereR(n),
            "RP" => RankOneSpace::ProjR(n),
            "CP" => RankOneSpace::ProjC(n),
            "HP" => RankOneSpace::ProjH(n),
            _ => return Err(bad()),
        };
        sp.validate()?;
        Ok(sp)
    }
}

impl RankOneSpace {
    pub fn validate(&self) -> Result<()> {
        let n = match *self {
            RankOneSpace::SphereR(n) | RankOneSpace::ProjR(n) => {
                if n < 2 {
                    return Err(Error::Config(format!("{self} needs n >= 2")));
                }
                n
            }
            RankOneSpace::ProjC(n) | RankOneSpace::ProjH(n) => n,
            RankOneSpace::ProjO2 => 2,
        };
        if n == 0 {
            return Err(Error::Config(format!("{self} needs n >= 1")));
        }
        Ok(())
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self, RankOneSpace::SphereR(_))
    }

    /// Parameters (a, b) of the β-law of the spherical coordinate.
    pub fn beta_params(&self) -> Option<(f64, f64)> {
        match *self {
            RankOneSpace::SphereR(_) => None,
            RankOneSpace::ProjR(n) => Some((0.5, n as f64 / 2.0)),
            RankOneSpace::ProjC(n) => Some((1.0, n as f64)),
            RankOneSpace::ProjH(n) => Some((2.0, 2.0 * n as f64)),
            RankOneSpace::ProjO2 => Some((4.0, 8.0)),
        }
    }

    /// Real dimension.
    pub fn dimension(&self) -> usize {
        match *self {
            RankOneSpace::SphereR(n) | RankOneSpace::ProjR(n) => n,
            RankOneSpace::ProjC(n) => 2 * n,
            RankOneSpace::ProjH(n) => 4 * n,
            RankOneSpace::ProjO2 => 16,
        }
    }

    pub fn max_level(&self) -> f64 {
        if self.is_sphere() {
            PI
        } else {
            PI / 2.0
        }
    }

    /// Density of the spherical coordinate (t ∈ [−1,1] for spheres, s ∈ [0,1] otherwise).
    pub fn coordinate_density(&self, x: f64) -> f64 {
        match *self {
            RankOneSpace::SphereR(n) => {
                let h = n as f64 / 2.0;
                (1.0 - x * x).max(0.0).powf(h - 1.0) / beta(0.5, h)
            }
            _ => {
                let (a, b) = self.beta_params().unwrap();
                x.powf(a - 1.0) * (1.0 - x).powf(b - 1.0) / beta(a, b)
            }
        }
    }
}

/// Gegenbauer-based Legendre polynomial P^{n,k} normalized by P^{n,k}(1) = 1.
pub fn legendre(n: usize, k: usize, t: f64) -> f64 {
    let nu = (n as f64 - 1.0) / 2.0;
    if k == 0 {
        return 1.0;
    }
    // Normalized three-term recurrence.
    let (mut p0, mut p1) = (1.0, t);
    for j in 2..=k {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 2.0 * nu - 2.0) * t * p1 - (jf - 1.0) * p0) / (jf + 2.0 * nu - 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Jacobi polynomial P_k^{(α,β)}(x).
pub fn jacobi(k: usize, alpha: f64, beta_: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let ab = alpha + beta_;
    let mut p0 = 1.0;
    let mut p1 = (alpha + 1.0) + (ab + 2.0) * (x - 1.0) / 2.0;
    for j in 2..=k {
        let j = j as f64;
        let c = 2.0 * j + ab;
        let a1 = 2.0 * j * (j + ab) * (c - 2.0);
        let a2 = (c - 1.0) * (c * (c - 2.0) * x + alpha * alpha - beta_ * beta_);
        let a3 = 2.0 * (j + alpha - 1.0) * (j + beta_ - 1.0) * c;
        let p2 = (a2 * p1 - a3 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// J^{(a,b),k}(s), orthogonal for β^{(a,b)} and normalized by J(1) = 1.
pub fn jacobi_normalized(a: f64, b: f64, k: usize, s: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let (alpha, beta_) = (b - 1.0, a - 1.0);
    let norm = gamma(k as f64 + alpha + 1.0) / (gamma(k as f64 + 1.0) * gamma(alpha + 1.0));
    jacobi(k, alpha, beta_, 2.0 * s - 1.0) / norm
}

/// Zonal polynomial of degree k in the spherical coordinate.
pub fn orthopoly_eval(space: &RankOneSpace, k: usize, t: f64) -> Result<f64> {
    space.validate()?;
    match *space {
        RankOneSpace::SphereR(n) => {
            if !(-1.0..=1.0).contains(&t) {
                return Err(Error::Domain(format!("Legendre argument {t} outside [-1, 1]")));
            }
            Ok(legendre(n, k, t))
        }
        _ => {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Domain(format!("Jacobi argument {t} outside [0, 1]")));
            }
            let (a, b) = space.beta_params().unwrap();
            Ok(jacobi_normalized(a, b, k, t))
        }
    }
}

fn check_level(space: &RankOneSpace, level: f64) -> Result<()> {
    space.validate()?;
    if !(level > 0.0 && level < space.max_level()) {
        return Err(Error::Domain(format!("level {level} outside (0, {}) for {space}", space.max_level())));
    }
    Ok(())
}

/// Closed-form limiting eigenvalue c_k.
pub fn rankone_eigenvalue(space: &RankOneSpace, k: usize, level: f64) -> Result<f64> {
    check_level(space, level)?;
    match *space {
        RankOneSpace::SphereR(n) => {
            let h = n as f64 / 2.0;
            if k == 0 {
                return Ok(beta_reg(h, h, (level / 2.0).sin().powi(2)));
            }
            Ok(level.sin().powi(n as i32) * legendre(n + 2, k - 1, level.cos()) / (n as f64 * beta(0.5, h)))
        }
        _ => {
            let (a, b) = space.beta_params().unwrap();
            let s = level.cos().powi(2);
            if k == 0 {
                return Ok(beta_reg(b, a, 1.0 - s));
            }
            let pref = gamma(a + b) / (gamma(a) * gamma(b + 1.0));
            Ok(pref * s.powf(a) * (1.0 - s).powf(b) * jacobi_normalized(a + 1.0, b + 1.0, k - 1, s))
        }
    }
}

/// c_k as the direct integral of the zonal polynomial over the ball.
pub fn rankone_eigenvalue_quadrature(space: &RankOneSpace, k: usize, level: f64) -> Result<f64> {
    check_level(space, level)?;
    let lo = match space {
        RankOneSpace::SphereR(_) => level.cos(),
        _ => level.cos().powi(2),
    };
    let f = |x: f64| space.coordinate_density(x) * orthopoly_eval(space, k, x.min(1.0)).unwrap_or(0.0);
    integrate(f, lo, 1.0, 1e-14, 1e-13)
}

fn binom(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Multiplicity d_{kω₀} of c_k.
pub fn rankone_multiplicity(space: &RankOneSpace, k: usize) -> u128 {
    let k = k as u128;
    let (num, den) = match *space {
        RankOneSpace::SphereR(n) => {
            let n = n as u128;
            ((2 * k + n - 1) * binom(k + n - 1, n - 1), k + n - 1)
        }
        RankOneSpace::ProjR(n) => {
            let n = n as u128;
            ((4 * k + n - 1) * binom(2 * k + n - 1, n - 1), 2 * k + n - 1)
        }
        RankOneSpace::ProjC(n) => {
            let n = n as u128;
            let c = binom(k + n - 1, n - 1);
            ((2 * k + n) * c * c, n)
        }
        RankOneSpace::ProjH(n) => {
            let n = n as u128;
            ((2 * k + 2 * n + 1) * binom(k + 2 * n, 2 * n) * binom(k + 2 * n - 1, 2 * n - 1), (2 * n + 1) * (k + 1))
        }
        RankOneSpace::ProjO2 => ((2 * k + 11) * binom(k + 7, 4) * binom(k + 10, 10), 385),
    };
    debug_assert_eq!(num % den, 0);
    num / den
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankOneRow {
    pub k: usize,
    pub c: f64,
    pub multiplicity: u128,
}

pub fn rankone_table(space: &RankOneSpace, level: f64, k_max: usize) -> Result<Vec<RankOneRow>> {
    (0..=k_max)
        .map(|k| Ok(RankOneRow { k, c: rankone_eigenvalue(space, k, level)?, multiplicity: rankone_multiplicity(space, k) }))
        .collect()
}

pub fn table_csv(rows: &[RankOneRow]) -> String {
    let mut out = String::from("k,c_k,d_k\n");
    for r in rows {
        out.push_str(&format!("{},{:.15e},{}\n", r.k, r.c, r.multiplicity));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootdata::{DominantWeight, Family, RootSystem};
    use rand::SeedableRng;
    use rand_distr::{Beta, Distribution, StandardNormal};

    fn spaces() -> Vec<RankOneSpace> {
        vec![
            RankOneSpace::SphereR(2),
            RankOneSpace::SphereR(3),
            RankOneSpace::SphereR(5),
            RankOneSpace::ProjR(2),
            RankOneSpace::ProjR(3),
            RankOneSpace::ProjC(1),
            RankOneSpace::ProjC(2),
            RankOneSpace::ProjC(3),
            RankOneSpace::ProjH(1),
            RankOneSpace::ProjH(2),
            RankOneSpace::ProjO2,
        ]
    }

    #[test]
    fn degree_zero_and_one() {
        for sp in spaces() {
            assert_eq!(orthopoly_eval(&sp, 0, 0.5).unwrap(), 1.0);
            assert!((orthopoly_eval(&sp, 3, 1.0).unwrap() - 1.0).abs() < 1e-12);
        }
        for i in 0..=20 {
            let t = -1.0 + 0.1 * i as f64;
            assert!((legendre(2, 1, t) - t).abs() < 1e-15);
            // classical Legendre P_2 and P_3
            assert!((legendre(2, 2, t) - (3.0 * t * t - 1.0) / 2.0).abs() < 1e-14);
            assert!((legendre(2, 3, t) - (5.0 * t.powi(3) - 3.0 * t) / 2.0).abs() < 1e-14);
        }
        assert!(orthopoly_eval(&RankOneSpace::ProjC(2), 1, 1.5).is_err());
        assert!(orthopoly_eval(&RankOneSpace::SphereR(2), 1, -1.5).is_err());
    }

    /// Rodrigues formula expanded by repeated differentiation of a polynomial in s.
    fn rodrigues_jacobi(a: usize, b: usize, k: usize, s: f64) -> f64 {
        // s^{a+k-1}(1-s)^{b+k-1} as coefficients in s
        let mut poly = vec![0.0f64; a + b + 2 * k];
        let m = b + k - 1;
        for j in 0..=m {
            let c = binom(m as u128, j as u128) as f64 * if j % 2 == 0 { 1.0 } else { -1.0 };
            poly[a + k - 1 + j] += c;
        }
        for _ in 0..k {
            poly = poly.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect();
        }
        let val: f64 = poly.iter().enumerate().map(|(i, c)| c * s.powi(i as i32)).sum();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign * gamma(b as f64) / gamma((b + k) as f64) * val / (s.powi(a as i32 - 1) * (1.0 - s).powi(b as i32 - 1))
    }

    #[test]
    fn jacobi_matches_rodrigues() {
        for (a, b) in [(1, 2), (2, 4), (4, 8), (1, 3)] {
            for k in 0..=4 {
                for i in 1..7 {
                    let s = i as f64 / 10.0;
                    let want = rodrigues_jacobi(a, b, k, s);
                    let got = jacobi_normalized(a as f64, b as f64, k, s);
                    assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "a={a} b={b} k={k} s={s}");
                }
            }
        }
    }

    #[test]
    fn orthogonality() {
        for sp in spaces() {
            let (lo, hi) = if sp.is_sphere() { (-1.0, 1.0) } else { (0.0, 1.0) };
            for j in 0..=6 {
                for k in 0..j {
                    let f = |x: f64| {
                        sp.coordinate_density(x) * orthopoly_eval(&sp, j, x).unwrap() * orthopoly_eval(&sp, k, x).unwrap()
                    };
                    let v = integrate(f, lo, hi, 1e-12, 1e-12).unwrap();
                    assert!(v.abs() < 1e-8, "{sp} j={j} k={k} v={v}");
                }
            }
        }
    }

    #[test]
    fn table_rows() {
        for level in [0.3, 1.0, 1.4] {
            let s2 = RankOneSpace::SphereR(2);
            assert!((rankone_eigenvalue(&s2, 0, level).unwrap() - (1.0 - level.cos()) / 2.0).abs() < 1e-14);
            for k in 1..8 {
                let want = level.sin().powi(2) / 4.0 * legendre(4, k - 1, level.cos());
                assert!((rankone_eigenvalue(&s2, k, level).unwrap() - want).abs() < 1e-14);
            }
            for n in 1..4 {
                let cp = RankOneSpace::ProjC(n);
                assert!((rankone_eigenvalue(&cp, 0, level).unwrap() - level.sin().powi(2 * n as i32)).abs() < 1e-13);
                let hp = RankOneSpace::ProjH(n);
                let c2 = level.cos().powi(2);
                let want = level.sin().powi(4 * n as i32) * (1.0 + 2.0 * n as f64 * c2);
                assert!((rankone_eigenvalue(&hp, 0, level).unwrap() - want).abs() < 1e-13);
            }
            let c = level.cos().powi(2);
            let want = level.sin().powi(16) * (1.0 + 8.0 * c + 36.0 * c * c + 120.0 * c * c * c);
            assert!((rankone_eigenvalue(&RankOneSpace::ProjO2, 0, level).unwrap() - want).abs() < 1e-13);
            let want = 165.0 * level.cos().powi(8) * level.sin().powi(16) * jacobi_normalized(5.0, 9.0, 2, c);
            assert!((rankone_eigenvalue(&RankOneSpace::ProjO2, 3, level).unwrap() - want).abs() < 1e-13);
        }
        assert!(rankone_eigenvalue(&RankOneSpace::ProjC(2), 1, 1.6).is_err());
        assert!(rankone_eigenvalue(&RankOneSpace::SphereR(2), 1, 3.2).is_err());
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for sp in spaces() {
            for level in [0.4, 1.1] {
                for k in 0..=10 {
                    let a = rankone_eigenvalue(&sp, k, level).unwrap();
                    let b = rankone_eigenvalue_quadrature(&sp, k, level).unwrap();
                    assert!((a - b).abs() < 1e-8, "{sp} k={k} L={level}: {a} {b}");
                }
            }
        }
    }

    #[test]
    fn eigenvalues_bounded_by_c0() {
        for sp in spaces() {
            for level in [0.2, 0.7, 1.3] {
                let c0 = rankone_eigenvalue(&sp, 0, level).unwrap();
                for k in 1..=30 {
                    assert!(rankone_eigenvalue(&sp, k, level).unwrap().abs() <= c0 + 1e-14);
                }
            }
        }
    }

    #[test]
    fn multiplicities() {
        for k in 0..10 {
            assert_eq!(rankone_multiplicity(&RankOneSpace::SphereR(2), k), 2 * k as u128 + 1);
        }
        for sp in spaces() {
            assert_eq!(rankone_multiplicity(&sp, 0), 1);
        }
        assert_eq!(rankone_multiplicity(&RankOneSpace::ProjO2, 1), 26);
        // CP^n: A_n weight (k,0,…,0,k); HP^n: C_{n+1} partition (k,k,0,…).
        for n in 1..4usize {
            let rs = RootSystem::new(Family::A, n).unwrap();
            for k in 0..6i64 {
                let mut c = vec![0; n];
                c[0] += k;
                c[n - 1] += k;
                let d = rs.weyl_dimension(&DominantWeight { coords: c }).unwrap();
                assert_eq!(d, rankone_multiplicity(&RankOneSpace::ProjC(n), k as usize));
            }
        }
        for n in 1..3usize {
            let rs = RootSystem::new(Family::C, n + 1).unwrap();
            for k in 0..6i64 {
                let mut c = vec![0; n + 1];
                c[1] = k;
                let d = rs.weyl_dimension(&DominantWeight { coords: c }).unwrap();
                assert_eq!(d, rankone_multiplicity(&RankOneSpace::ProjH(n), k as usize));
            }
        }
        // RS^n and RP^n: SO(n+1) with kω₁ and 2kω₁.
        for n in [4usize, 5, 6, 7] {
            let m = n + 1;
            let rs = if m % 2 == 1 { RootSystem::new(Family::B, m / 2).unwrap() } else { RootSystem::new(Family::D, m / 2).unwrap() };
            for k in 0..6i64 {
                let mut c = vec![0; rs.rank];
                c[0] = k;
                let d = rs.weyl_dimension(&DominantWeight { coords: c.clone() }).unwrap();
                assert_eq!(d, rankone_multiplicity(&RankOneSpace::SphereR(n), k as usize));
                c[0] = 2 * k;
                let d = rs.weyl_dimension(&DominantWeight { coords: c }).unwrap();
                assert_eq!(d, rankone_multiplicity(&RankOneSpace::ProjR(n), k as usize));
            }
        }
    }

    #[test]
    fn ball_fraction_by_monte_carlo() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let m = 200_000;
        for sp in spaces() {
            let level = 0.9;
            let c0 = rankone_eigenvalue(&sp, 0, level).unwrap();
            let hits = match sp {
                RankOneSpace::SphereR(n) => (0..m)
                    .filter(|_| {
                        let v: Vec<f64> = (0..=n).map(|_| StandardNormal.sample(&mut rng)).collect();
                        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                        (v[n] / r).acos() <= level
                    })
                    .count(),
                _ => {
                    let (a, b) = sp.beta_params().unwrap();
                    let dist = Beta::new(a, b).unwrap();
                    (0..m).filter(|_| dist.sample(&mut rng).sqrt().acos() <= level).count()
                }
            };
            let p = hits as f64 / m as f64;
            let sigma = (c0 * (1.0 - c0) / m as f64).sqrt();
            assert!((p - c0).abs() <= 3.0 * sigma + 1e-9, "{sp}: {p} vs {c0}");
        }
    }

    #[test]
    fn parse_and_csv() {
        assert_eq!("cp2".parse::<RankOneSpace>().unwrap(), RankOneSpace::ProjC(2));
        assert_eq!("OP2".parse::<RankOneSpace>().unwrap(), RankOneSpace::ProjO2);
        assert!("XP2".parse::<RankOneSpace>().is_err());
        assert!("RS1".parse::<RankOneSpace>().is_err());
        let rows = rankone_table(&RankOneSpace::SphereR(2), 0.5, 4).unwrap();
        assert_eq!(table_csv(&rows).lines().count(), 6);
    }
}
