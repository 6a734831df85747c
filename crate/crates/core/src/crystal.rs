//! String polytopes for A₁ and A₂, weight multiplicities and Littlewood–Richardson coefficients.
//!
//! Weights are integer vectors in the fundamental-weight basis. A₂ uses the reduced word s₁s₂s₁.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CrystalType {
    A1,
    A2,
}

impl CrystalType {
    pub fn rank(self) -> usize {
        match self {
            CrystalType::A1 => 1,
            CrystalType::A2 => 2,
        }
    }

    /// Length of the reduced word, i.e. the dimension of the string cone.
    pub fn word_length(self) -> usize {
        match self {
            CrystalType::A1 => 1,
            CrystalType::A2 => 3,
        }
    }

    fn check(self, w: &[i64], dominant: bool) -> Result<()> {
        if w.len() != self.rank() {
            return Err(Error::Dimension { expected: self.rank(), got: w.len() });
        }
        if dominant && w.iter().any(|&c| c < 0) {
            return Err(Error::NotDominant(w.to_vec()));
        }
        Ok(())
    }

    /// Simple roots in the fundamental basis (rows of the Cartan matrix).
    fn simple_root(self, i: usize) -> Vec<i64> {
        match (self, i) {
            (CrystalType::A1, _) => vec![2],
            (CrystalType::A2, 0) => vec![2, -1],
            (CrystalType::A2, _) => vec![-1, 2],
        }
    }

    /// Three times the squared norm, an integer for both types.
    fn norm3(self, w: &[i64]) -> i64 {
        match self {
            CrystalType::A1 => 3 * w[0] * w[0],
            CrystalType::A2 => 2 * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]),
        }
    }

    /// Weyl dimension formula.
    pub fn dimension(self, lambda: &[i64]) -> u64 {
        match self {
            CrystalType::A1 => (lambda[0] + 1) as u64,
            CrystalType::A2 => ((lambda[0] + 1) * (lambda[1] + 1) * (lambda[0] + lambda[1] + 2) / 2) as u64,
        }
    }
}

impl fmt::Display for CrystalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrystalType::A1 => write!(f, "A1"),
            CrystalType::A2 => write!(f, "A2"),
        }
    }
}

impl std::str::FromStr for CrystalType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a1" | "su2" => Ok(CrystalType::A1),
            "a2" | "su3" => Ok(CrystalType::A2),
            _ => Err(Error::Config(format!("string polytopes are implemented for A1 and A2, not {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StringPolytope {
    pub kind: CrystalType,
    pub lambda: Vec<i64>,
}

impl StringPolytope {
    pub fn new(kind: CrystalType, lambda: &[i64]) -> Result<Self> {
        kind.check(lambda, true)?;
        Ok(StringPolytope { kind, lambda: lambda.to_vec() })
    }

    /// String cone plus the λ-dependent bounds.
    pub fn contains(&self, u: &[i64]) -> bool {
        match self.kind {
            CrystalType::A1 => u.len() == 1 && 0 <= u[0] && u[0] <= self.lambda[0],
            CrystalType::A2 => {
                let (y1, y2) = (self.lambda[0], self.lambda[1]);
                u.len() == 3
                    && u.iter().all(|&x| x >= 0)
                    && u[1] >= u[2]
                    && u[2] <= y1
                    && u[1] <= u[2] + y2
                    && u[0] <= y1 - 2 * u[2] + u[1]
            }
        }
    }

    pub fn points(&self) -> Vec<Vec<i64>> {
        match self.kind {
            CrystalType::A1 => (0..=self.lambda[0]).map(|u| vec![u]).collect(),
            CrystalType::A2 => {
                let (y1, y2) = (self.lambda[0], self.lambda[1]);
                let mut out = Vec::new();
                for u3 in 0..=y1 {
                    for u2 in u3..=u3 + y2 {
                        for u1 in 0..=(y1 - 2 * u3 + u2) {
                            out.push(vec![u1, u2, u3]);
                        }
                    }
                }
                out
            }
        }
    }

    /// λ − Σ u_j α_{i_j}.
    pub fn weight(&self, u: &[i64]) -> Vec<i64> {
        let mut w = self.lambda.clone();
        let word: &[usize] = match self.kind {
            CrystalType::A1 => &[0],
            CrystalType::A2 => &[0, 1, 0],
        };
        for (&uj, &i) in u.iter().zip(word) {
            for (wc, a) in w.iter_mut().zip(self.kind.simple_root(i)) {
                *wc -= uj * a;
            }
        }
        w
    }
}

pub fn string_polytope_points(kind: CrystalType, lambda: &[i64]) -> Result<Vec<Vec<i64>>> {
    Ok(StringPolytope::new(kind, lambda)?.points())
}

/// K_{λ,ω}: string points of weight ω.
pub fn weight_multiplicity(kind: CrystalType, lambda: &[i64], omega: &[i64]) -> Result<u64> {
    kind.check(omega, false)?;
    let p = StringPolytope::new(kind, lambda)?;
    Ok(p.points().iter().filter(|u| p.weight(u) == omega).count() as u64)
}

/// 𝒫(μ) cut by the λ-dependent inequalities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelativePolytope {
    pub lambda: Vec<i64>,
    pub base: StringPolytope,
}

impl RelativePolytope {
    pub fn new(kind: CrystalType, lambda: &[i64], mu: &[i64]) -> Result<Self> {
        kind.check(lambda, true)?;
        Ok(RelativePolytope { lambda: lambda.to_vec(), base: StringPolytope::new(kind, mu)? })
    }

    pub fn contains(&self, u: &[i64]) -> bool {
        if !self.base.contains(u) {
            return false;
        }
        match self.base.kind {
            CrystalType::A1 => u[0] <= self.lambda[0],
            CrystalType::A2 => u[0] <= self.lambda[0] && u[1] <= u[0] + self.lambda[1] && u[2] <= self.lambda[1],
        }
    }

    pub fn points(&self) -> Vec<Vec<i64>> {
        self.base.points().into_iter().filter(|u| self.contains(u)).collect()
    }

    /// λ + Ψ_μ(u) for every point, i.e. the highest weights ν counted with multiplicity.
    pub fn decomposition(&self) -> BTreeMap<Vec<i64>, u64> {
        let mut out = BTreeMap::new();
        for u in self.points() {
            let w: Vec<i64> = self.base.weight(&u).iter().zip(&self.lambda).map(|(a, b)| a + b).collect();
            *out.entry(w).or_insert(0) += 1;
        }
        out
    }
}

/// c^{λ,μ}_ν by counting the weight slice ν − λ of the relative polytope.
pub fn lr_polytope(kind: CrystalType, lambda: &[i64], mu: &[i64], nu: &[i64]) -> Result<u64> {
    kind.check(nu, true)?;
    let rp = RelativePolytope::new(kind, lambda, mu)?;
    let target: Vec<i64> = nu.iter().zip(lambda).map(|(a, b)| a - b).collect();
    Ok(rp.points().iter().filter(|u| rp.base.weight(u) == target).count() as u64)
}

/// Finite Weyl-invariant combination of weights.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterElement {
    pub terms: BTreeMap<Vec<i64>, i64>,
}

impl CharacterElement {
    pub fn irreducible(kind: CrystalType, lambda: &[i64]) -> Result<Self> {
        let p = StringPolytope::new(kind, lambda)?;
        let mut terms = BTreeMap::new();
        for u in p.points() {
            *terms.entry(p.weight(&u)).or_insert(0) += 1;
        }
        Ok(CharacterElement { terms })
    }

    pub fn product(&self, other: &CharacterElement) -> CharacterElement {
        let mut terms: BTreeMap<Vec<i64>, i64> = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let w: Vec<i64> = a.iter().zip(b).map(|(p, q)| p + q).collect();
                *terms.entry(w).or_insert(0) += x * y;
            }
        }
        terms.retain(|_, v| *v != 0);
        CharacterElement { terms }
    }

    pub fn dimension(&self) -> i64 {
        self.terms.values().sum()
    }

    /// Coefficients on irreducible characters, removing the largest dominant term each round.
    pub fn decompose(mut self, kind: CrystalType) -> Result<BTreeMap<Vec<i64>, u64>> {
        let mut out = BTreeMap::new();
        loop {
            self.terms.retain(|_, v| *v != 0);
            let top = self
                .terms
                .keys()
                .filter(|w| w.iter().all(|&c| c >= 0))
                .max_by(|a, b| kind.norm3(a).cmp(&kind.norm3(b)).then_with(|| a.cmp(b)))
                .cloned();
            let Some(top) = top else {
                if self.terms.is_empty() {
                    return Ok(out);
                }
                return Err(Error::Numerical("virtual character left without a dominant term".into()));
            };
            let c = self.terms[&top];
            if c < 0 {
                return Err(Error::Numerical(format!("negative coefficient {c} at {top:?}")));
            }
            for (w, m) in CharacterElement::irreducible(kind, &top)?.terms {
                *self.terms.entry(w).or_insert(0) -= c * m;
            }
            out.insert(top, c as u64);
        }
    }
}

/// Full tensor-product decomposition by character multiplication.
pub fn lr_decomposition_oracle(kind: CrystalType, lambda: &[i64], mu: &[i64]) -> Result<BTreeMap<Vec<i64>, u64>> {
    let a = CharacterElement::irreducible(kind, lambda)?;
    let b = CharacterElement::irreducible(kind, mu)?;
    a.product(&b).decompose(kind)
}

pub fn lr_oracle(kind: CrystalType, lambda: &[i64], mu: &[i64], nu: &[i64]) -> Result<u64> {
    kind.check(nu, true)?;
    Ok(lr_decomposition_oracle(kind, lambda, mu)?.get(nu).copied().unwrap_or(0))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LrRow {
    pub lambda: Vec<i64>,
    pub mu: Vec<i64>,
    pub nu: Vec<i64>,
    pub c: u64,
}

/// All nonzero c^{λ,μ}_ν for λ, μ with coordinates up to `max_coord`.
pub fn lr_table(kind: CrystalType, max_coord: i64) -> Result<Vec<LrRow>> {
    let weights: Vec<Vec<i64>> = match kind {
        CrystalType::A1 => (0..=max_coord).map(|a| vec![a]).collect(),
        CrystalType::A2 => (0..=max_coord).flat_map(|a| (0..=max_coord).map(move |b| vec![a, b])).collect(),
    };
    let pairs: Vec<(Vec<i64>, Vec<i64>)> = weights.iter().flat_map(|l| weights.iter().map(move |m| (l.clone(), m.clone()))).collect();
    let rows = pairs
        .par_iter()
        .map(|(l, m)| {
            Ok(RelativePolytope::new(kind, l, m)?
                .decomposition()
                .into_iter()
                .map(|(nu, c)| LrRow { lambda: l.clone(), mu: m.clone(), nu, c })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

pub fn lr_csv(rows: &[LrRow]) -> String {
    let j = |v: &[i64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut out = String::from("lambda,mu,nu,c\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", j(&r.lambda), j(&r.mu), j(&r.nu), r.c));
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScaledSum {
    pub t: i64,
    /// (1/t^l) Σ_ν c_ν f(ν/t) for each test function.
    pub values: Vec<f64>,
}

/// Scaled LR sums for the dilations (tx, ty).
pub fn lr_scaling_check(kind: CrystalType, x: &[i64], y: &[i64], t_list: &[i64], tests: &[&(dyn Fn(&[f64]) -> f64 + Sync)]) -> Result<Vec<ScaledSum>> {
    let l = kind.word_length() as i32;
    t_list
        .iter()
        .map(|&t| {
            if t <= 0 {
                return Err(Error::Domain(format!("dilation t = {t} must be positive")));
            }
            let tx: Vec<i64> = x.iter().map(|c| c * t).collect();
            let ty: Vec<i64> = y.iter().map(|c| c * t).collect();
            let dec = RelativePolytope::new(kind, &tx, &ty)?.decomposition();
            let values = tests
                .iter()
                .map(|f| {
                    dec.iter()
                        .map(|(nu, &c)| {
                            let z: Vec<f64> = nu.iter().map(|&a| a as f64 / t as f64).collect();
                            c as f64 * f(&z)
                        })
                        .sum::<f64>()
                        / (t as f64).powi(l)
                })
                .collect();
            Ok(ScaledSum { t, values })
        })
        .collect()
}
