//! Poisson Boolean model, rooted neighbourhoods and local-limit comparisons.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::function::gamma::gamma;
use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{build_geometric_graph, trial_rng, SpaceSpec};

/// Largest rooted neighbourhood that gets canonicalized.
pub const MAX_NEIGHBORHOOD: usize = 64;

/// c(d)·r^d.
pub fn ball_volume(d: usize, r: f64) -> f64 {
    let h = d as f64 / 2.0;
    PI.powf(h) / gamma(1.0 + h) * r.powi(d as i32)
}

#[derive(Clone, Debug)]
pub struct BooleanModelSample {
    pub d: usize,
    pub intensity: f64,
    pub radius: f64,
    /// Window points; the root at the origin is the last entry.
    pub points: Vec<Vec<f64>>,
    pub root: usize,
    pub adj: Vec<Vec<u32>>,
}

fn uniform_in_ball<R: Rng + ?Sized>(d: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = g.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            let r = radius * rng.gen::<f64>().powf(1.0 / d as f64);
            return g.iter().map(|x| x * r / n).collect();
        }
    }
}

/// Poisson process of the given intensity in the ball of radius `radius`, plus the origin.
pub fn sample_boolean_model<R: Rng + ?Sized>(d: usize, intensity: f64, radius: f64, rng: &mut R) -> Result<BooleanModelSample> {
    if d == 0 || !(intensity >= 0.0) || !(radius >= 0.0) {
        return Err(Error::Domain(format!("bad Boolean model parameters d={d} intensity={intensity} R={radius}")));
    }
    let mean = intensity * ball_volume(d, radius);
    let count = if mean > 0.0 {
        Poisson::new(mean).map_err(|e| Error::Numerical(e.to_string()))?.sample(rng) as usize
    } else {
        0
    };
    let mut points: Vec<Vec<f64>> = (0..count).map(|_| uniform_in_ball(d, radius, rng)).collect();
    points.push(vec![0.0; d]);
    let m = points.len();
    let mut adj = vec![Vec::new(); m];
    for i in 0..m {
        for j in i + 1..m {
            let d2: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 <= 1.0 {
                adj[i].push(j as u32);
                adj[j].push(i as u32);
            }
        }
    }
    Ok(BooleanModelSample { d, intensity, radius, points, root: m - 1, adj })
}

/// Canonical form of a rooted graph; the root always gets label 0.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RootedNeighborhood {
    pub radius: usize,
    pub n_vertices: usize,
    /// Edges (i, j) with i < j, sorted.
    pub edges: Vec<(u8, u8)>,
}

impl RootedNeighborhood {
    pub fn key(&self) -> String {
        let e: Vec<String> = self.edges.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        format!("{}|{}", self.n_vertices, e.join(","))
    }

    pub fn hash(&self) -> String {
        let h = Sha256::digest(self.key().as_bytes());
        hex::encode(&h[..8])
    }

    pub fn root_degree(&self) -> usize {
        self.edges.iter().filter(|(a, _)| *a == 0).count()
    }
}

fn refine(adj: &[Vec<usize>], colors: &mut Vec<u32>) {
    let mut classes = colors.iter().collect::<std::collections::BTreeSet<_>>().len();
    loop {
        let sigs: Vec<(u32, Vec<u32>)> = (0..adj.len())
            .map(|v| {
                let mut s: Vec<u32> = adj[v].iter().map(|&u| colors[u]).collect();
                s.sort_unstable();
                (colors[v], s)
            })
            .collect();
        let mut uniq = sigs.clone();
        uniq.sort();
        uniq.dedup();
        for (v, s) in sigs.iter().enumerate() {
            colors[v] = uniq.binary_search(s).unwrap() as u32;
        }
        if uniq.len() == classes {
            return;
        }
        classes = uniq.len();
    }
}

fn are_twins(adj: &[Vec<usize>], u: usize, v: usize) -> bool {
    let a: Vec<usize> = adj[u].iter().copied().filter(|&x| x != v).collect();
    let b: Vec<usize> = adj[v].iter().copied().filter(|&x| x != u).collect();
    a == b
}

fn search(adj: &[Vec<usize>], colors: Vec<u32>, best: &mut Option<Vec<(u8, u8)>>) {
    let n = adj.len();
    let mut count = vec![0usize; n];
    for &c in &colors {
        count[c as usize] += 1;
    }
    let target = (0..n).find(|&c| count[c] > 1);
    let Some(cell) = target else {
        let mut code: Vec<(u8, u8)> = Vec::new();
        for v in 0..n {
            for &u in &adj[v] {
                let (a, b) = (colors[v] as u8, colors[u] as u8);
                if a < b {
                    code.push((a, b));
                }
            }
        }
        code.sort_unstable();
        if best.as_ref().map_or(true, |b| code < *b) {
            *best = Some(code);
        }
        return;
    };
    let members: Vec<usize> = (0..n).filter(|&v| colors[v] as usize == cell).collect();
    let mut tried: Vec<usize> = Vec::new();
    for &v in &members {
        if tried.iter().any(|&t| are_twins(adj, t, v)) {
            continue;
        }
        tried.push(v);
        let mut c: Vec<u32> = colors.iter().enumerate().map(|(u, &c)| 2 * c + u32::from(c as usize == cell && u != v)).collect();
        refine(adj, &mut c);
        search(adj, c, best);
    }
}

/// Canonical form of the rooted graph (adj, root); vertex lists must be symmetric.
pub fn canonical_form(adj: &[Vec<usize>], root: usize, radius: usize) -> Result<RootedNeighborhood> {
    let n = adj.len();
    if n > MAX_NEIGHBORHOOD {
        return Err(Error::Size(format!("neighbourhood has {n} vertices, limit is {MAX_NEIGHBORHOOD}")));
    }
    // Root first, then BFS distance and degree.
    let mut dist = vec![usize::MAX; n];
    dist[root] = 0;
    let mut q = VecDeque::from([root]);
    while let Some(v) = q.pop_front() {
        for &u in &adj[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                q.push_back(u);
            }
        }
    }
    let keys: Vec<(usize, usize)> = (0..n).map(|v| (dist[v], adj[v].len())).collect();
    let mut uniq = keys.clone();
    uniq.sort();
    uniq.dedup();
    let mut colors: Vec<u32> = keys.iter().map(|k| uniq.binary_search(k).unwrap() as u32).collect();
    refine(adj, &mut colors);
    let mut best = None;
    search(adj, colors, &mut best);
    Ok(RootedNeighborhood { radius, n_vertices: n, edges: best.unwrap_or_default() })
}

/// π_n: induced subgraph on vertices within graph distance n of the root, canonicalized.
pub fn rooted_neighborhood(adj: &[Vec<u32>], root: usize, n: usize) -> Result<RootedNeighborhood> {
    if root >= adj.len() {
        return Err(Error::Input(format!("root {root} out of range")));
    }
    let mut dist: BTreeMap<usize, usize> = BTreeMap::new();
    dist.insert(root, 0);
    let mut order = vec![root];
    let mut q = VecDeque::from([root]);
    while let Some(v) = q.pop_front() {
        let dv = dist[&v];
        if dv == n {
            continue;
        }
        for &u in &adj[v] {
            let u = u as usize;
            if !dist.contains_key(&u) {
                dist.insert(u, dv + 1);
                order.push(u);
                if order.len() > MAX_NEIGHBORHOOD {
                    return Err(Error::Size(format!("neighbourhood exceeds {MAX_NEIGHBORHOOD} vertices")));
                }
                q.push_back(u);
            }
        }
    }
    let index: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let sub: Vec<Vec<usize>> = order
        .iter()
        .map(|&v| {
            let mut row: Vec<usize> = adj[v].iter().filter_map(|&u| index.get(&(u as usize)).copied()).collect();
            row.sort_unstable();
            row
        })
        .collect();
    canonical_form(&sub, 0, n)
}

pub type Histogram = BTreeMap<String, usize>;

/// Total variation between two empirical distributions; mass on forms seen on one side only counts fully.
pub fn tv_distance(a: &Histogram, b: &Histogram) -> f64 {
    let na: usize = a.values().sum();
    let nb: usize = b.values().sum();
    if na == 0 || nb == 0 {
        return if na == nb { 0.0 } else { 1.0 };
    }
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .iter()
        .map(|k| {
            let pa = *a.get(*k).unwrap_or(&0) as f64 / na as f64;
            let pb = *b.get(*k).unwrap_or(&0) as f64 / nb as f64;
            (pa - pb).abs()
        })
        .sum::<f64>()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BsComparison {
    pub tv_distance: f64,
    pub graph_histogram: Histogram,
    pub model_histogram: Histogram,
    /// Canonical-form hash to edge list.
    pub forms: BTreeMap<String, String>,
    pub trials: usize,
}

/// Rooted neighbourhood statistics of Γ_geom(N, L_N) against the Boolean model at intensity ℓ/vol.
pub fn bs_compare(space: &SpaceSpec, n_points: usize, ell: f64, radius: usize, trials: usize, seed: u64) -> Result<BsComparison> {
    if trials == 0 {
        return Err(Error::Domain("trials must be positive".into()));
    }
    let level = space.poisson_level(ell, n_points);
    let intensity = ell / space.vol;
    let pairs = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let g = build_geometric_graph(space, n_points, level, &mut rng)?;
            let root = rng.gen_range(0..n_points);
            let a = rooted_neighborhood(&g.adj, root, radius)?;
            let m = sample_boolean_model(space.dim, intensity, radius as f64 + 2.0, &mut rng)?;
            let b = rooted_neighborhood(&m.adj, m.root, radius)?;
            Ok((a, b))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut gh = Histogram::new();
    let mut mh = Histogram::new();
    let mut forms = BTreeMap::new();
    for (a, b) in pairs {
        for (h, f) in [(&mut gh, a), (&mut mh, b)] {
            *h.entry(f.hash()).or_insert(0) += 1;
            forms.entry(f.hash()).or_insert_with(|| f.key());
        }
    }
    Ok(BsComparison { tv_distance: tv_distance(&gh, &mh), graph_histogram: gh, model_histogram: mh, forms, trials })
}

/// TV between the joint law of (π_n(root₁), π_n(root₂)) for two distinct random roots of one
/// graph and the product of its marginals. Each graph contributes `pairs_per_graph` disjoint pairs.
pub fn root_pair_dependence(space: &SpaceSpec, n_points: usize, ell: f64, radius: usize, graphs: usize, pairs_per_graph: usize, seed: u64) -> Result<f64> {
    if 2 * pairs_per_graph > n_points {
        return Err(Error::Domain("not enough vertices for disjoint root pairs".into()));
    }
    let level = space.poisson_level(ell, n_points);
    let samples = (0..graphs)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let g = build_geometric_graph(space, n_points, level, &mut rng)?;
            let roots = rand::seq::index::sample(&mut rng, n_points, 2 * pairs_per_graph).into_vec();
            roots
                .chunks(2)
                .map(|p| Ok((rooted_neighborhood(&g.adj, p[0], radius)?.hash(), rooted_neighborhood(&g.adj, p[1], radius)?.hash())))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(String, String)> = samples.into_iter().flatten().collect();
    let m = pairs.len() as f64;
    let mut joint: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut left = Histogram::new();
    let mut right = Histogram::new();
    for (a, b) in &pairs {
        *joint.entry((a.clone(), b.clone())).or_insert(0) += 1;
        *left.entry(a.clone()).or_insert(0) += 1;
        *right.entry(b.clone()).or_insert(0) += 1;
    }
    let mut tv = 0.0;
    let mut covered = 0.0;
    for (a, ca) in &left {
        for (b, cb) in &right {
            let p = *ca as f64 * *cb as f64 / (m * m);
            let j = *joint.get(&(a.clone(), b.clone())).unwrap_or(&0) as f64 / m;
            tv += (j - p).abs();
            covered += j;
        }
    }
    // Every joint atom has both coordinates in the marginals' supports.
    debug_assert!((covered - 1.0).abs() < 1e-9);
    Ok(tv / 2.0)
}

/// A connected pattern graph rooted at vertex 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootedPattern {
    pub n_vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl RootedPattern {
    pub fn new(n_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut e: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a >= n_vertices || b >= n_vertices {
                return Err(Error::Input(format!("edge ({a},{b}) out of range")));
            }
            if a == b {
                return Err(Error::Input("patterns have no loops".into()));
            }
            e.push((a.min(b), a.max(b)));
        }
        e.sort_unstable();
        e.dedup();
        let p = RootedPattern { n_vertices, edges: e };
        if p.eccentricity().is_none() {
            return Err(Error::Input("pattern must be connected".into()));
        }
        Ok(p)
    }

    /// k-cycle through the root (k = 2 is a single edge).
    pub fn cycle(k: usize) -> Result<Self> {
        match k {
            0 => Err(Error::Input("empty cycle".into())),
            1 => RootedPattern::new(1, vec![]),
            2 => RootedPattern::new(2, vec![(0, 1)]),
            _ => RootedPattern::new(k, (0..k).map(|i| (i, (i + 1) % k)).collect()),
        }
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Largest graph distance from the root; None when disconnected.
    pub fn eccentricity(&self) -> Option<usize> {
        let adj = self.adjacency();
        let mut dist = vec![usize::MAX; self.n_vertices];
        dist[0] = 0;
        let mut q = VecDeque::from([0]);
        while let Some(v) = q.pop_front() {
            for &u in &adj[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    q.push_back(u);
                }
            }
        }
        dist.iter().copied().max().filter(|&m| m != usize::MAX)
    }
}

/// Number of injective edge-preserving maps of the pattern sending vertex 0 to `root`.
pub fn embedding_count(pattern: &RootedPattern, adj: &[Vec<u32>], root: usize) -> u64 {
    let padj = pattern.adjacency();
    // BFS order so every later vertex has an earlier neighbour.
    let mut order = vec![0usize];
    let mut seen = vec![false; pattern.n_vertices];
    seen[0] = true;
    let mut i = 0;
    while i < order.len() {
        for &u in &padj[order[i]] {
            if !seen[u] {
                seen[u] = true;
                order.push(u);
            }
        }
        i += 1;
    }
    let mut image = vec![usize::MAX; pattern.n_vertices];
    image[0] = root;
    fn rec(depth: usize, order: &[usize], padj: &[Vec<usize>], adj: &[Vec<u32>], image: &mut Vec<usize>) -> u64 {
        if depth == order.len() {
            return 1;
        }
        let v = order[depth];
        let anchor = padj[v].iter().copied().find(|&u| image[u] != usize::MAX).unwrap();
        let mut total = 0;
        for &cand in &adj[image[anchor]] {
            let cand = cand as usize;
            if image.contains(&cand) {
                continue;
            }
            let ok = padj[v].iter().all(|&u| image[u] == usize::MAX || adj[image[u]].binary_search(&(cand as u32)).is_ok());
            if ok {
                image[v] = cand;
                total += rec(depth + 1, order, padj, adj, image);
                image[v] = usize::MAX;
            }
        }
        total
    }
    rec(1, &order, &padj, adj, &mut image)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Estimate { mean, stderr: (var / n).sqrt(), samples: xs.len() }
    }
}

/// Monte Carlo mean of the rooted embedding count in the Boolean model.
pub fn embedding_count_estimate(pattern: &RootedPattern, d: usize, intensity: f64, trials: usize, seed: u64) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::Domain("trials must be positive".into()));
    }
    let radius = pattern.eccentricity().unwrap_or(0) as f64;
    let counts = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let m = sample_boolean_model(d, intensity, radius, &mut rng)?;
            Ok(embedding_count(pattern, &m.adj, m.root) as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Estimate::from_samples(&counts))
}
