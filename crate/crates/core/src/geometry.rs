//! Haar sampling, geodesic distances and threshold graphs on compact groups and spheres.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::rankone::{rankone_eigenvalue, RankOneSpace};
use crate::rootdata::{Family, RootSystem};

pub type C64 = Complex<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceKind {
    SU(usize),
    SO(usize),
    USp(usize),
    /// The unit sphere S^n ⊂ ℝ^{n+1}.
    Sphere(usize),
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceKind::SU(n) => write!(f, "su{n}"),
            SpaceKind::SO(n) => write!(f, "so{n}"),
            SpaceKind::USp(n) => write!(f, "usp{n}"),
            SpaceKind::Sphere(n) => write!(f, "s{n}"),
        }
    }
}

impl std::str::FromStr for SpaceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let low = s.to_ascii_lowercase();
        let bad = || Error::Config(format!("unknown space {s:?} (try su2, so3, usp2, s2)"));
        let split = low.find(|c: char| c.is_ascii_digit()).ok_or_else(bad)?;
        let n: usize = low[split..].parse().map_err(|_| bad())?;
        match &low[..split] {
            "su" => Ok(SpaceKind::SU(n)),
            "so" => Ok(SpaceKind::SO(n)),
            "usp" | "sp" => Ok(SpaceKind::USp(n)),
            "s" | "rs" | "sphere" => Ok(SpaceKind::Sphere(n)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub kind: SpaceKind,
    pub dim: usize,
    pub vol: f64,
    pub diameter: f64,
}

impl SpaceSpec {
    pub fn new(kind: SpaceKind) -> Result<Self> {
        let (dim, vol, diameter) = match kind {
            SpaceKind::SU(n) => {
                if n < 2 {
                    return Err(Error::Config("SU(n) needs n >= 2".into()));
                }
                let rs = RootSystem::new(Family::A, n - 1)?;
                (n * n - 1, rs.volumes().vol_g_kp, (2.0 * n as f64 * n as f64).sqrt() * PI)
            }
            SpaceKind::SO(n) => {
                let spin = match n {
                    3 => {
                        let v = RootSystem::new(Family::A, 1)?.volumes().vol_g_kp;
                        v
                    }
                    _ if n >= 5 && n % 2 == 1 => RootSystem::new(Family::B, n / 2)?.volumes().vol_g_kp,
                    _ if n >= 6 => RootSystem::new(Family::D, n / 2)?.volumes().vol_g_kp,
                    _ => return Err(Error::Config(format!("SO({n}) is not supported (n = 3 or n >= 5)"))),
                };
                let c = if n == 3 { 1.0 } else { n as f64 - 2.0 };
                (n * (n - 1) / 2, spin / 2.0, (c * n as f64).sqrt() * PI)
            }
            SpaceKind::USp(n) => {
                if n < 1 {
                    return Err(Error::Config("USp(n) needs n >= 1".into()));
                }
                let v = if n == 1 {
                    RootSystem::new(Family::A, 1)?.volumes().vol_g_kp
                } else {
                    RootSystem::new(Family::C, n)?.volumes().vol_g_kp
                };
                (n * (2 * n + 1), v, ((4 * n + 4) as f64 * n as f64).sqrt() * PI)
            }
            SpaceKind::Sphere(n) => {
                if n < 2 {
                    return Err(Error::Config("spheres need n >= 2".into()));
                }
                let m = (n + 1) as f64;
                (n, 2.0 * PI.powf(m / 2.0) / gamma(m / 2.0), PI)
            }
        };
        Ok(SpaceSpec { kind, dim, vol, diameter })
    }

    /// L_N = (ℓ/N)^{1/dim}.
    pub fn poisson_level(&self, ell: f64, n: usize) -> f64 {
        (ell / n as f64).powf(1.0 / self.dim as f64)
    }

    /// ℓ giving mean degree `deg` in the Poissonian regime.
    pub fn ell_for_mean_degree(&self, deg: f64) -> f64 {
        deg * self.vol / crate::poisson::ball_volume(self.dim, 1.0)
    }
}

/// A point of one of the supported spaces.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    /// Unit quaternion (w, x, y, z) standing for an element of SU(2).
    Quat([f64; 4]),
    Unitary(DMatrix<C64>),
    Orthogonal(DMatrix<f64>),
    Sphere(Vec<f64>),
}

pub fn quat_mul(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

pub fn quat_conj(a: &[f64; 4]) -> [f64; 4] {
    [a[0], -a[1], -a[2], -a[3]]
}

/// The 2×2 special unitary matrix of a unit quaternion.
pub fn quat_to_matrix(q: &[f64; 4]) -> DMatrix<C64> {
    let z1 = C64::new(q[0], q[1]);
    let z2 = C64::new(q[2], q[3]);
    DMatrix::from_row_slice(2, 2, &[z1, z2, -z2.conj(), z1.conj()])
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn random_unit_quat<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
    loop {
        let v = [gaussian(rng), gaussian(rng), gaussian(rng), gaussian(rng)];
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-12 {
            return [v[0] / r, v[1] / r, v[2] / r, v[3] / r];
        }
    }
}

fn orthonormalize_complex(m: &mut DMatrix<C64>) -> bool {
    let n = m.ncols();
    for j in 0..n {
        for k in 0..j {
            let p: C64 = (0..m.nrows()).map(|i| m[(i, k)].conj() * m[(i, j)]).sum();
            for i in 0..m.nrows() {
                let v = m[(i, k)];
                m[(i, j)] -= p * v;
            }
        }
        let nrm = (0..m.nrows()).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if nrm < 1e-10 {
            return false;
        }
        for i in 0..m.nrows() {
            m[(i, j)] /= nrm;
        }
    }
    true
}

fn orthonormalize_real(m: &mut DMatrix<f64>) -> bool {
    let n = m.ncols();
    for j in 0..n {
        for k in 0..j {
            let p: f64 = (0..m.nrows()).map(|i| m[(i, k)] * m[(i, j)]).sum();
            for i in 0..m.nrows() {
                let v = m[(i, k)];
                m[(i, j)] -= p * v;
            }
        }
        let nrm = (0..m.nrows()).map(|i| m[(i, j)].powi(2)).sum::<f64>().sqrt();
        if nrm < 1e-10 {
            return false;
        }
        for i in 0..m.nrows() {
            m[(i, j)] /= nrm;
        }
    }
    true
}

/// Complex 2n×2n embedding [[M1, M2], [−M̄2, M̄1]] of a quaternionic matrix M1 + M2·j.
pub fn quaternionic_embedding(q: &[Vec<[f64; 4]>]) -> DMatrix<C64> {
    let n = q.len();
    let mut m = DMatrix::from_element(2 * n, 2 * n, C64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            let e = q[i][j];
            let z1 = C64::new(e[0], e[1]);
            let z2 = C64::new(e[2], e[3]);
            m[(i, j)] = z1;
            m[(i, j + n)] = z2;
            m[(i + n, j)] = -z2.conj();
            m[(i + n, j + n)] = z1.conj();
        }
    }
    m
}

fn sample_usp<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Option<DMatrix<C64>> {
    // Columns of a quaternionic Gaussian matrix, orthonormalized with right scalars.
    let mut cols: Vec<Vec<[f64; 4]>> = (0..n)
        .map(|_| (0..n).map(|_| [gaussian(rng), gaussian(rng), gaussian(rng), gaussian(rng)]).collect())
        .collect();
    for j in 0..n {
        for k in 0..j {
            let mut p = [0.0; 4];
            for i in 0..n {
                let t = quat_mul(&quat_conj(&cols[k][i]), &cols[j][i]);
                for c in 0..4 {
                    p[c] += t[c];
                }
            }
            for i in 0..n {
                let t = quat_mul(&cols[k][i], &p);
                for c in 0..4 {
                    cols[j][i][c] -= t[c];
                }
            }
        }
        let nrm = cols[j].iter().map(|q| q.iter().map(|x| x * x).sum::<f64>()).sum::<f64>().sqrt();
        if nrm < 1e-10 {
            return None;
        }
        for q in cols[j].iter_mut() {
            for x in q.iter_mut() {
                *x /= nrm;
            }
        }
    }
    let rows: Vec<Vec<[f64; 4]>> = (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect();
    Some(quaternionic_embedding(&rows))
}

/// One Haar-distributed point.
pub fn haar_sample<R: Rng + ?Sized>(space: &SpaceSpec, rng: &mut R) -> Result<Point> {
    for _ in 0..100 {
        match space.kind {
            SpaceKind::SU(2) => return Ok(Point::Quat(random_unit_quat(rng))),
            SpaceKind::SU(n) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let mut m = DMatrix::from_fn(n, n, |_, _| C64::new(s * gaussian(rng), s * gaussian(rng)));
                if !orthonormalize_complex(&mut m) {
                    continue;
                }
                let det = m.determinant();
                let phase = C64::from_polar(1.0, -det.arg() / n as f64);
                return Ok(Point::Unitary(m * phase));
            }
            SpaceKind::SO(n) => {
                let mut m = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
                if !orthonormalize_real(&mut m) {
                    continue;
                }
                if m.determinant() < 0.0 {
                    for i in 0..n {
                        m[(i, 0)] = -m[(i, 0)];
                    }
                }
                return Ok(Point::Orthogonal(m));
            }
            SpaceKind::USp(n) => {
                if let Some(m) = sample_usp(n, rng) {
                    return Ok(Point::Unitary(m));
                }
            }
            SpaceKind::Sphere(n) => {
                let v: Vec<f64> = (0..=n).map(|_| gaussian(rng)).collect();
                let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if r > 1e-12 {
                    return Ok(Point::Sphere(v.iter().map(|x| x / r).collect()));
                }
            }
        }
    }
    Err(Error::Numerical("100 degenerate Gaussian draws in a row".into()))
}

fn unitary_residual(m: &DMatrix<C64>) -> f64 {
    let p = m.adjoint() * m;
    let n = m.nrows();
    (p - DMatrix::<C64>::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn schur_angles(m: DMatrix<C64>) -> Result<Vec<f64>> {
    let schur = nalgebra::linalg::Schur::try_new(m, 1e-14, 10_000)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)].arg()).collect())
}

/// Eigen-angles of p q^{-1}, with the SU branch fixed so they sum to zero.
pub fn eigen_angles(space: &SpaceSpec, p: &Point, q: &Point) -> Result<Vec<f64>> {
    match (space.kind, p, q) {
        (SpaceKind::SU(2), Point::Quat(a), Point::Quat(b)) => {
            let dot = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]).clamp(-1.0, 1.0);
            let t = dot.acos();
            Ok(vec![t, -t])
        }
        (SpaceKind::SU(n), Point::Unitary(a), Point::Unitary(b)) | (SpaceKind::USp(n), Point::Unitary(a), Point::Unitary(b)) => {
            let size = if matches!(space.kind, SpaceKind::SU(_)) { n } else { 2 * n };
            if a.nrows() != size || b.nrows() != size {
                return Err(Error::Dimension { expected: size, got: a.nrows() });
            }
            if unitary_residual(a) > 1e-8 || unitary_residual(b) > 1e-8 {
                return Err(Error::Input("matrix is not unitary".into()));
            }
            let mut angles = schur_angles(a * b.adjoint())?;
            if matches!(space.kind, SpaceKind::SU(_)) {
                let k = (angles.iter().sum::<f64>() / (2.0 * PI)).round() as i64;
                for _ in 0..k.abs() {
                    let idx = if k > 0 {
                        (0..angles.len()).max_by(|&i, &j| angles[i].partial_cmp(&angles[j]).unwrap()).unwrap()
                    } else {
                        (0..angles.len()).min_by(|&i, &j| angles[i].partial_cmp(&angles[j]).unwrap()).unwrap()
                    };
                    angles[idx] -= k.signum() as f64 * 2.0 * PI;
                }
            }
            Ok(angles)
        }
        (SpaceKind::SO(n), Point::Orthogonal(a), Point::Orthogonal(b)) => {
            if a.nrows() != n || b.nrows() != n {
                return Err(Error::Dimension { expected: n, got: a.nrows() });
            }
            let res = (a.transpose() * a - DMatrix::<f64>::identity(n, n)).abs().max();
            if res > 1e-8 {
                return Err(Error::Input("matrix is not orthogonal".into()));
            }
            let m = (a * b.transpose()).map(|x| C64::new(x, 0.0));
            schur_angles(m)
        }
        _ => Err(Error::Input(format!("point type does not match space {}", space.kind))),
    }
}

/// Killing-normalized geodesic distance (arccos for spheres).
pub fn geodesic_distance(space: &SpaceSpec, p: &Point, q: &Point) -> Result<f64> {
    if let (SpaceKind::Sphere(n), Point::Sphere(a), Point::Sphere(b)) = (space.kind, p, q) {
        if a.len() != n + 1 || b.len() != n + 1 {
            return Err(Error::Dimension { expected: n + 1, got: a.len() });
        }
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        return Ok(dot.clamp(-1.0, 1.0).acos());
    }
    let angles = eigen_angles(space, p, q)?;
    let sq: f64 = angles.iter().map(|t| t * t).sum();
    let c = match space.kind {
        SpaceKind::SU(n) => 2.0 * n as f64,
        SpaceKind::SO(3) => 1.0,
        SpaceKind::SO(n) => n as f64 - 2.0,
        // Complex embedding doubles each quaternionic angle.
        SpaceKind::USp(n) => 2.0 * n as f64 + 2.0,
        SpaceKind::Sphere(_) => unreachable!(),
    };
    Ok((c * sq).sqrt())
}

/// Left translation g·p.
pub fn left_mul(g: &Point, p: &Point) -> Result<Point> {
    match (g, p) {
        (Point::Quat(a), Point::Quat(b)) => Ok(Point::Quat(quat_mul(a, b))),
        (Point::Unitary(a), Point::Unitary(b)) => Ok(Point::Unitary(a * b)),
        (Point::Orthogonal(a), Point::Orthogonal(b)) => Ok(Point::Orthogonal(a * b)),
        _ => Err(Error::Input("left translation needs two group elements of the same type".into())),
    }
}

/// Right translation p·g.
pub fn right_mul(p: &Point, g: &Point) -> Result<Point> {
    left_mul(p, g)
}

/// Normalized volume of a geodesic ball, where a closed form is available.
pub fn ball_fraction(space: &SpaceSpec, radius: f64) -> Result<f64> {
    match space.kind {
        SpaceKind::SU(2) => {
            if radius >= space.diameter {
                return Ok(1.0);
            }
            let a = radius / 2f64.sqrt();
            Ok((a - a.sin()) / (2.0 * PI))
        }
        SpaceKind::Sphere(n) => {
            if radius >= PI {
                return Ok(1.0);
            }
            rankone_eigenvalue(&RankOneSpace::SphereR(n), 0, radius)
        }
        _ => Err(Error::Config(format!("no closed-form ball volume for {}", space.kind))),
    }
}

/// A point drawn uniformly from the geodesic ball of the given radius around `center`.
pub fn sample_in_ball<R: Rng + ?Sized>(space: &SpaceSpec, center: &Point, radius: f64, rng: &mut R) -> Result<Point> {
    match (space.kind, center) {
        (SpaceKind::SU(2), Point::Quat(c)) => {
            let tmax = (radius / (2.0 * 2f64.sqrt())).min(PI);
            loop {
                let v = [rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0];
                let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                if r2 > 1.0 {
                    continue;
                }
                let r = r2.sqrt();
                let t = r * tmax;
                let acc = if t < 1e-12 { 1.0 } else { (t.sin() / t).powi(2) };
                if rng.gen::<f64>() >= acc {
                    continue;
                }
                let s = if r < 1e-300 { 0.0 } else { t.sin() / r };
                let e = [t.cos(), s * v[0], s * v[1], s * v[2]];
                return Ok(Point::Quat(quat_mul(c, &e)));
            }
        }
        (SpaceKind::Sphere(n), Point::Sphere(c)) => {
            let lmax = radius.min(PI);
            let phi = loop {
                let u: f64 = rng.gen();
                let phi = lmax * u.powf(1.0 / n as f64);
                let acc = if phi < 1e-12 { 1.0 } else { (phi.sin() / phi).powi(n as i32 - 1) };
                if rng.gen::<f64>() < acc {
                    break phi;
                }
            };
            let mut u: Vec<f64> = loop {
                let g: Vec<f64> = (0..=n).map(|_| gaussian(rng)).collect();
                let proj: f64 = g.iter().zip(c).map(|(a, b)| a * b).sum();
                let t: Vec<f64> = g.iter().zip(c).map(|(a, b)| a - proj * b).collect();
                let nt = t.iter().map(|x| x * x).sum::<f64>().sqrt();
                if nt > 1e-9 {
                    break t.iter().map(|x| x / nt).collect();
                }
            };
            for (ui, ci) in u.iter_mut().zip(c) {
                *ui = phi.cos() * ci + phi.sin() * *ui;
            }
            Ok(Point::Sphere(u))
        }
        _ => Err(Error::Config(format!("ball sampling is available on su2 and spheres, not {}", space.kind))),
    }
}

/// Seeded generator for one trial; trials use disjoint ChaCha streams.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(trial);
    r
}

#[derive(Clone, Debug)]
pub struct GeometricGraph {
    pub space: SpaceKind,
    pub level: f64,
    pub points: Vec<Point>,
    /// Sorted neighbour lists.
    pub adj: Vec<Vec<u32>>,
}

impl GeometricGraph {
    pub fn len(&self) -> usize {
        self.adj.len()
    }
    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&(j as u32)).is_ok()
    }
    /// Dense 0/1 adjacency, row-major.
    pub fn dense(&self) -> Vec<f64> {
        let n = self.len();
        let mut m = vec![0.0; n * n];
        for (i, row) in self.adj.iter().enumerate() {
            for &j in row {
                m[i * n + j as usize] = 1.0;
            }
        }
        m
    }
    /// Edge list "i j" preceded by a JSON header line.
    pub fn export(&self, seed: u64) -> String {
        let header = serde_json::json!({
            "space": self.space.to_string(),
            "N": self.len(),
            "L": self.level,
            "seed": seed,
        });
        let mut out = format!("# {header}\n");
        for (i, row) in self.adj.iter().enumerate() {
            for &j in row {
                if (j as usize) > i {
                    out.push_str(&format!("{i} {j}\n"));
                }
            }
        }
        out
    }
}

fn sweep_key(p: &Point) -> Option<&[f64]> {
    match p {
        Point::Quat(q) => Some(&q[..]),
        Point::Sphere(v) => Some(&v[..]),
        _ => None,
    }
}

/// Threshold graph on given points.
pub fn graph_from_points(space: &SpaceSpec, points: Vec<Point>, level: f64) -> Result<GeometricGraph> {
    if !(level > 0.0) {
        return Err(Error::Domain(format!("level must be positive, got {level}")));
    }
    let n = points.len();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    let keyed = points.iter().all(|p| sweep_key(p).is_some());
    if keyed && matches!(space.kind, SpaceKind::SU(2) | SpaceKind::Sphere(_)) {
        // Unit vectors whose angle is at most t differ by at most the chord 2 sin(t/2)
        // in every coordinate, so a sweep over the first coordinate sees every edge.
        let angle = match space.kind {
            SpaceKind::SU(2) => level / (2.0 * 2f64.sqrt()),
            _ => level,
        };
        let cos_t = if angle >= PI { -2.0 } else { angle.cos() };
        let chord = 2.0 * (angle.min(PI) / 2.0).sin() + 1e-12;
        let vecs: Vec<&[f64]> = points.iter().map(|p| sweep_key(p).unwrap()).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| vecs[a][0].partial_cmp(&vecs[b][0]).unwrap().then(a.cmp(&b)));
        for (pos, &i) in order.iter().enumerate() {
            for &j in &order[pos + 1..] {
                if vecs[j][0] - vecs[i][0] > chord {
                    break;
                }
                let dot: f64 = vecs[i].iter().zip(vecs[j]).map(|(a, b)| a * b).sum();
                if dot >= cos_t {
                    adj[i].push(j as u32);
                    adj[j].push(i as u32);
                }
            }
        }
    } else {
        let rows: Vec<Vec<u32>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = Vec::new();
                for j in i + 1..n {
                    if geodesic_distance(space, &points[i], &points[j])? <= level {
                        row.push(j as u32);
                    }
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, row) in rows.into_iter().enumerate() {
            for j in row {
                adj[i].push(j);
                adj[j as usize].push(i as u32);
            }
        }
    }
    for row in adj.iter_mut() {
        row.sort_unstable();
    }
    Ok(GeometricGraph { space: space.kind, level, points, adj })
}

/// N Haar points joined when their distance is at most L.
pub fn build_geometric_graph<R: Rng + ?Sized>(space: &SpaceSpec, n: usize, level: f64, rng: &mut R) -> Result<GeometricGraph> {
    if n == 0 {
        return Err(Error::Domain("graph needs at least one vertex".into()));
    }
    let points = (0..n).map(|_| haar_sample(space, rng)).collect::<Result<Vec<_>>>()?;
    graph_from_points(space, points, level)
}
