//! Circuits of length s, their reductions and the moment expansion tables.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{ball_fraction, geodesic_distance, haar_sample, sample_in_ball, trial_rng, Point, SpaceSpec};
use crate::poisson::{Estimate, RootedPattern};

pub const MAX_CIRCUIT_LENGTH: usize = 12;
pub const MAX_TABLE_LENGTH: usize = 8;

/// A closed walk i₁ → i₂ → … → i_s → i₁, given by the restricted growth string of its index pattern.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Circuit {
    pub word: Vec<usize>,
}

impl Circuit {
    pub fn new(word: Vec<usize>) -> Result<Self> {
        let s = word.len();
        if s < 2 {
            return Err(Error::Input("circuits have length >= 2".into()));
        }
        for i in 0..s {
            if word[i] == word[(i + 1) % s] {
                return Err(Error::Input(format!("positions {i} and {} coincide", (i + 1) % s)));
            }
        }
        // Relabel to a restricted growth string.
        let mut map: BTreeMap<usize, usize> = BTreeMap::new();
        let mut order = Vec::new();
        for &w in &word {
            if !map.contains_key(&w) {
                map.insert(w, order.len());
                order.push(w);
            }
        }
        Ok(Circuit { word: word.iter().map(|w| map[w]).collect() })
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn vertices(&self) -> usize {
        self.word.iter().max().map_or(0, |m| m + 1)
    }

    /// Underlying simple undirected edges.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let s = self.word.len();
        let mut e: Vec<(usize, usize)> =
            (0..s).map(|i| (self.word[i].min(self.word[(i + 1) % s]), self.word[i].max(self.word[(i + 1) % s]))).collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    pub fn pattern(&self) -> Result<RootedPattern> {
        RootedPattern::new(self.vertices(), self.edges())
    }
}

/// Set partitions of ℤ/sℤ with no two cyclically adjacent positions in one block.
pub fn enumerate_circuits(s: usize) -> Result<Vec<Circuit>> {
    if s < 2 {
        return Err(Error::Domain("s must be at least 2".into()));
    }
    if s > MAX_CIRCUIT_LENGTH {
        return Err(Error::Size(format!("s = {s} exceeds {MAX_CIRCUIT_LENGTH}")));
    }
    fn rec(prefix: &mut Vec<usize>, max: usize, s: usize, out: &mut Vec<Circuit>) {
        if prefix.len() == s {
            if prefix[s - 1] != prefix[0] {
                out.push(Circuit { word: prefix.clone() });
            }
            return;
        }
        for a in 0..=max + 1 {
            if a == *prefix.last().unwrap() {
                continue;
            }
            prefix.push(a);
            rec(prefix, max.max(a), s, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut vec![0], 0, s, &mut out);
    Ok(out)
}

/// A connected labeled multigraph; a loop component has one vertex and one edge (0, 0, l).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Component {
    pub n_vertices: usize,
    /// (a, b, label) with a ≤ b, sorted.
    pub edges: Vec<(usize, usize, usize)>,
}

impl Component {
    pub fn is_loop(&self) -> bool {
        self.n_vertices == 1
    }

    pub fn labels(&self) -> Vec<usize> {
        let mut l: Vec<usize> = self.edges.iter().map(|e| e.2).collect();
        l.sort_unstable_by(|a, b| b.cmp(a));
        l
    }

    fn canonical(vertices: &[usize], edges: &[(usize, usize, usize)]) -> Result<Self> {
        let n = vertices.len();
        if n > 8 {
            return Err(Error::Size(format!("component with {n} vertices")));
        }
        let idx = |v: usize| vertices.iter().position(|&x| x == v).unwrap();
        let local: Vec<(usize, usize, usize)> = edges.iter().map(|&(a, b, l)| (idx(a), idx(b), l)).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best: Option<Vec<(usize, usize, usize)>> = None;
        loop {
            let mut code: Vec<(usize, usize, usize)> =
                local.iter().map(|&(a, b, l)| (perm[a].min(perm[b]), perm[a].max(perm[b]), l)).collect();
            code.sort_unstable();
            if best.as_ref().map_or(true, |b| code < *b) {
                best = Some(code);
            }
            if !next_perm(&mut perm) {
                break;
            }
        }
        Ok(Component { n_vertices: n, edges: best.unwrap_or_default() })
    }

    /// Labeled edges subdivided into paths; vertex 0 of the component is vertex 0 of the pattern.
    pub fn pattern(&self) -> Result<RootedPattern> {
        let mut n = self.n_vertices;
        let mut edges = Vec::new();
        for &(a, b, l) in &self.edges {
            let mut prev = a;
            for _ in 0..l - 1 {
                edges.push((prev, n));
                prev = n;
                n += 1;
            }
            edges.push((prev, b));
        }
        RootedPattern::new(n, edges)
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_loop() {
            return write!(f, "loop{}", self.edges[0].2);
        }
        let e: Vec<String> = self.edges.iter().map(|(a, b, l)| format!("{a}-{b}:{l}")).collect();
        write!(f, "graph[{}]", e.join(" "))
    }
}

fn next_perm(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Multiset of components, sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ReducedCircuit {
    pub components: Vec<Component>,
}

impl ReducedCircuit {
    pub fn new(mut components: Vec<Component>) -> Self {
        components.sort();
        ReducedCircuit { components }
    }

    pub fn loop_of(label: usize) -> Self {
        ReducedCircuit::new(vec![Component { n_vertices: 1, edges: vec![(0, 0, label)] }])
    }

    pub fn vertex_count(&self) -> usize {
        self.components.iter().map(|c| c.n_vertices).sum()
    }

    pub fn is_loop_only(&self) -> bool {
        self.components.iter().all(|c| c.is_loop())
    }

    /// All labels, descending.
    pub fn labels(&self) -> Vec<usize> {
        let mut l: Vec<usize> = self.components.iter().flat_map(|c| c.labels()).collect();
        l.sort_unstable_by(|a, b| b.cmp(a));
        l
    }

    /// Union of the component multisets.
    pub fn disjoint_union(&self, other: &ReducedCircuit) -> ReducedCircuit {
        ReducedCircuit::new(self.components.iter().chain(&other.components).cloned().collect())
    }
}

impl fmt::Display for ReducedCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Biconnected blocks of a simple graph, as edge-index lists (low-link DFS).
fn blocks(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for (i, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, i));
        adj[b].push((a, i));
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut time = 0;
    fn dfs(
        u: usize,
        parent_edge: usize,
        adj: &[Vec<(usize, usize)>],
        disc: &mut [usize],
        low: &mut [usize],
        time: &mut usize,
        stack: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        disc[u] = *time;
        low[u] = *time;
        *time += 1;
        for &(v, e) in &adj[u] {
            if e == parent_edge {
                continue;
            }
            if disc[v] == usize::MAX {
                stack.push(e);
                dfs(v, e, adj, disc, low, time, stack, out);
                low[u] = low[u].min(low[v]);
                if low[v] >= disc[u] {
                    let mut comp = Vec::new();
                    while let Some(x) = stack.pop() {
                        comp.push(x);
                        if x == e {
                            break;
                        }
                    }
                    out.push(comp);
                }
            } else if disc[v] < disc[u] {
                stack.push(e);
                low[u] = low[u].min(disc[v]);
            }
        }
    }
    for s in 0..n {
        if disc[s] == usize::MAX {
            dfs(s, usize::MAX, &adj, &mut disc, &mut low, &mut time, &mut stack, &mut out);
        }
    }
    out
}

/// Remove degree-2 vertices without loops, adding labels, until none remain.
fn suppress(mut es: Vec<(usize, usize, usize)>) -> Vec<(usize, usize, usize)> {
    loop {
        let mut deg: BTreeMap<usize, usize> = BTreeMap::new();
        let mut looped = std::collections::BTreeSet::new();
        for &(a, b, _) in &es {
            *deg.entry(a).or_insert(0) += 1;
            *deg.entry(b).or_insert(0) += 1;
            if a == b {
                looped.insert(a);
            }
        }
        let Some(v) = deg.iter().find(|(v, &d)| d == 2 && !looped.contains(*v)).map(|(v, _)| *v) else {
            return es;
        };
        let (inc, rest): (Vec<_>, Vec<_>) = es.into_iter().partition(|&(a, b, _)| a == v || b == v);
        let other = |(a, b, _): (usize, usize, usize)| if a == v { b } else { a };
        let (o1, o2) = (other(inc[0]), other(inc[1]));
        es = rest;
        es.push((o1.min(o2), o1.max(o2), inc[0].2 + inc[1].2));
    }
}

fn reduce_edges(n: usize, edges: &[(usize, usize)]) -> Result<ReducedCircuit> {
    let mut comps = Vec::new();
    for block in blocks(n, edges) {
        if block.len() == 1 {
            comps.push(Component { n_vertices: 1, edges: vec![(0, 0, 2)] });
            continue;
        }
        let es = suppress(block.iter().map(|&i| (edges[i].0, edges[i].1, 1)).collect());
        let mut vs: Vec<usize> = es.iter().flat_map(|&(a, b, _)| [a, b]).collect();
        vs.sort_unstable();
        vs.dedup();
        comps.push(Component::canonical(&vs, &es)?);
    }
    Ok(ReducedCircuit::new(comps))
}

/// Forget orientation, collapse multi-edges, split into blocks, suppress degree-2 vertices,
/// and turn bridges into loops labeled 2.
pub fn reduce_circuit(c: &Circuit) -> Result<ReducedCircuit> {
    reduce_edges(c.vertices(), &c.edges())
}

/// Re-run the block and suppression passes on each component of a reduced circuit.
pub fn rereduce(r: &ReducedCircuit) -> Result<ReducedCircuit> {
    let mut comps = Vec::new();
    for c in &r.components {
        if c.is_loop() {
            comps.push(c.clone());
            continue;
        }
        // Components are 2-connected and have no degree-2 vertices, so both passes are identities.
        let es = suppress(c.edges.clone());
        let vs: Vec<usize> = (0..c.n_vertices).collect();
        comps.push(Component::canonical(&vs, &es)?);
    }
    Ok(ReducedCircuit::new(comps))
}

/// k from k − 1 = k′ − c + Σ(l_e − 1).
pub fn k_parameter(r: &ReducedCircuit) -> usize {
    let kp = r.vertex_count();
    let c = r.components.len();
    let extra: usize = r.components.iter().flat_map(|c| c.edges.iter().map(|e| e.2 - 1)).sum();
    kp + extra + 1 - c
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionRow {
    pub reduced: ReducedCircuit,
    pub multiplicity: usize,
    pub k: usize,
}

/// Circuits of length s grouped by reduction; decreasing k, loop-only reductions first,
/// then decreasing label vectors.
pub fn expansion_table(s: usize) -> Result<Vec<ExpansionRow>> {
    if s > MAX_TABLE_LENGTH {
        return Err(Error::Size(format!("tables stop at s = {MAX_TABLE_LENGTH}")));
    }
    let mut counts: BTreeMap<ReducedCircuit, (usize, usize)> = BTreeMap::new();
    for c in enumerate_circuits(s)? {
        let r = reduce_circuit(&c)?;
        let k = c.vertices();
        let entry = counts.entry(r).or_insert((0, k));
        debug_assert_eq!(entry.1, k);
        entry.0 += 1;
    }
    let mut rows: Vec<ExpansionRow> = counts.into_iter().map(|(reduced, (multiplicity, k))| ExpansionRow { reduced, multiplicity, k }).collect();
    rows.sort_by(|a, b| {
        b.k.cmp(&a.k)
            .then(b.reduced.is_loop_only().cmp(&a.reduced.is_loop_only()))
            .then(b.reduced.labels().cmp(&a.reduced.labels()))
            .then(a.reduced.cmp(&b.reduced))
    });
    Ok(rows)
}

pub fn table_json(rows: &[ExpansionRow]) -> serde_json::Value {
    serde_json::Value::Array(
        rows.iter()
            .map(|r| {
                serde_json::json!({
                    "reduction": r.reduced.to_string(),
                    "components": r.reduced.components,
                    "labels": r.reduced.labels(),
                    "multiplicity": r.multiplicity,
                    "k": r.k,
                })
            })
            .collect(),
    )
}

/// Falling factorial (N−1)(N−2)⋯(N−k+1).
pub fn falling(n: usize, k: usize) -> f64 {
    (1..k).map(|j| n as f64 - j as f64).product()
}

/// Glue every component at one vertex and subdivide labels into paths.
pub fn representative_pattern(r: &ReducedCircuit) -> Result<RootedPattern> {
    let mut n = 1;
    let mut edges = Vec::new();
    for c in &r.components {
        let p = c.pattern()?;
        let shift = |v: usize| if v == 0 { 0 } else { v + n - 1 };
        edges.extend(p.edges.iter().map(|&(a, b)| (shift(a), shift(b))));
        n += p.n_vertices - 1;
    }
    RootedPattern::new(n, edges)
}

fn spanning_tree(p: &RootedPattern) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
    // BFS parents, tree edges and the remaining closing edges.
    let mut adj = vec![Vec::new(); p.n_vertices];
    for &(a, b) in &p.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut parent = vec![usize::MAX; p.n_vertices];
    parent[0] = 0;
    let mut order = vec![0];
    let mut tree = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        for &u in &adj[v] {
            if parent[u] == usize::MAX {
                parent[u] = v;
                order.push(u);
                tree.push((v, u));
            }
        }
        i += 1;
    }
    let closing = p.edges.iter().copied().filter(|&(a, b)| parent[b] != a && parent[a] != b).collect();
    (tree, closing)
}

/// E_{R,N}: probability that independent Haar points realize every edge of R at level L_N.
/// Points are drawn along a spanning tree inside the parent's ball, each step weighted by the ball fraction.
pub fn estimate_e_r(space: &SpaceSpec, r: &ReducedCircuit, n_points: usize, ell: f64, trials: usize, seed: u64) -> Result<Estimate> {
    let level = space.poisson_level(ell, n_points);
    let p = ball_fraction(space, level)?;
    let pattern = representative_pattern(r)?;
    let (tree, closing) = spanning_tree(&pattern);
    let weight = p.powi(tree.len() as i32);
    let hits = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let mut pts: Vec<Option<Point>> = vec![None; pattern.n_vertices];
            pts[0] = Some(haar_sample(space, &mut rng)?);
            for &(a, b) in &tree {
                let c = pts[a].clone().unwrap();
                pts[b] = Some(sample_in_ball(space, &c, level, &mut rng)?);
            }
            for &(a, b) in &closing {
                if geodesic_distance(space, pts[a].as_ref().unwrap(), pts[b].as_ref().unwrap())? > level {
                    return Ok(0.0);
                }
            }
            Ok(weight)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Estimate::from_samples(&hits))
}

/// Uniformly random circuit of length s, for property tests.
pub fn random_circuit<R: Rng + ?Sized>(s: usize, rng: &mut R) -> Result<Circuit> {
    let all = enumerate_circuits(s)?;
    Ok(all[rng.gen_range(0..all.len())].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometric_graph, SpaceKind};
    use crate::spectra::{empirical_moments, SpectralMeasure};
    use proptest::prelude::*;

    fn theta(labels: &[usize]) -> ReducedCircuit {
        let es: Vec<(usize, usize, usize)> = labels.iter().map(|&l| (0, 1, l)).collect();
        ReducedCircuit::new(vec![Component::canonical(&[0, 1], &es).unwrap()])
    }

    fn loops(labels: &[usize]) -> ReducedCircuit {
        ReducedCircuit::new(labels.iter().map(|&l| Component { n_vertices: 1, edges: vec![(0, 0, l)] }).collect())
    }

    #[test]
    fn circuit_counts() {
        let counts: Vec<usize> = (2..=8).map(|s| enumerate_circuits(s).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 1, 4, 11, 41, 162, 715]);
        assert!(enumerate_circuits(13).is_err());
        let c4 = enumerate_circuits(4).unwrap();
        let words: Vec<Vec<usize>> = c4.iter().map(|c| c.word.clone()).collect();
        assert!(words.contains(&vec![0, 1, 0, 1]));
        assert!(words.contains(&vec![0, 1, 2, 3]));
    }

    #[test]
    fn simple_cycles_reduce_to_loops() {
        for s in 2..=9 {
            let c = Circuit::new((0..s).collect()).unwrap();
            assert_eq!(reduce_circuit(&c).unwrap(), ReducedCircuit::loop_of(s));
            assert_eq!(k_parameter(&ReducedCircuit::loop_of(s)), s);
        }
        assert_eq!(k_parameter(&loops(&[2, 2])), 3);
    }

    #[test]
    fn twelve_edge_example() {
        // i₂=i₅=i₇, i₃=i₁₁, i₆=i₁₂.
        let w = vec![0, 1, 2, 3, 1, 4, 1, 5, 6, 7, 2, 4];
        let c = Circuit::new(w).unwrap();
        assert_eq!(c.vertices(), 8);
        let r = reduce_circuit(&c).unwrap();
        assert_eq!(k_parameter(&r), 8);
        assert_eq!(r.components.len(), 1);
        let big = &r.components[0];
        assert_eq!(big.n_vertices, 3);
        // Parallel labels {4,2,1} on one pair, {2,1} on another, 1 on the last.
        let mut by_pair: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for &(a, b, l) in &big.edges {
            by_pair.entry((a, b)).or_default().push(l);
        }
        let mut groups: Vec<Vec<usize>> = by_pair.into_values().map(|mut v| {
            v.sort_unstable();
            v
        }).collect();
        groups.sort();
        assert_eq!(groups, vec![vec![1], vec![1, 2], vec![1, 2, 4]]);
    }

    fn table(s: usize) -> Vec<(ReducedCircuit, usize, usize)> {
        expansion_table(s).unwrap().into_iter().map(|r| (r.reduced, r.multiplicity, r.k)).collect()
    }

    #[test]
    fn small_tables() {
        assert_eq!(table(4), vec![(loops(&[4]), 1, 4), (loops(&[2, 2]), 2, 3), (loops(&[2]), 1, 2)]);
        let t5: Vec<usize> = table(5).iter().map(|r| r.1).collect();
        assert_eq!(t5, vec![1, 5, 5]);
        assert_eq!(table(5)[1].0, loops(&[3, 2]));
    }

    #[test]
    fn six_and_seven() {
        let t6 = table(6);
        let want6 = [
            (loops(&[6]), 1),
            (loops(&[4, 2]), 6),
            (loops(&[3, 3]), 3),
            (loops(&[4]), 6),
            (loops(&[2, 2, 2]), 5),
            (theta(&[2, 2, 1]), 9),
            (loops(&[3]), 4),
            (loops(&[2, 2]), 6),
            (loops(&[2]), 1),
        ];
        assert_eq!(t6.len(), want6.len());
        for (r, m) in want6 {
            assert!(t6.iter().any(|x| x.0 == r && x.1 == m), "{r} x{m}");
        }
        let t7 = table(7);
        let want7 = [
            (loops(&[7]), 1),
            (loops(&[5, 2]), 7),
            (loops(&[4, 3]), 7),
            (loops(&[5]), 7),
            (loops(&[3, 2, 2]), 21),
            (theta(&[3, 2, 1]), 21),
            (theta(&[2, 2, 2, 1]), 7),
            (loops(&[3, 2]), 42),
            (theta(&[2, 2, 1]), 28),
            (loops(&[3]), 21),
        ];
        assert_eq!(t7.len(), want7.len());
        for (r, m) in want7 {
            assert!(t7.iter().any(|x| x.0 == r && x.1 == m), "{r} x{m}");
        }
        assert_eq!(t7.iter().map(|r| r.1).sum::<usize>(), 162);
    }

    #[test]
    fn complete_graph_trace_identity() {
        // On K_N every E_R equals 1, so (1/N) tr A^s = Σ (N−1)⋯(N−k+1).
        for nn in [4usize, 5, 9] {
            for s in 2..=8 {
                let lhs = ((nn - 1) as f64).powi(s as i32) + (nn - 1) as f64 * (-1f64).powi(s as i32);
                let rhs: f64 = expansion_table(s).unwrap().iter().map(|r| r.multiplicity as f64 * falling(nn, r.k)).sum();
                assert!((lhs / nn as f64 - rhs).abs() < 1e-9, "N={nn} s={s}");
            }
        }
    }

    #[test]
    fn k_matches_vertex_count() {
        for s in 2..=8 {
            for c in enumerate_circuits(s).unwrap() {
                assert_eq!(k_parameter(&reduce_circuit(&c).unwrap()), c.vertices());
            }
        }
    }

    proptest! {
        #[test]
        fn reduction_is_idempotent(s in 2usize..9, pick in 0usize..10_000) {
            let all = enumerate_circuits(s).unwrap();
            let r = reduce_circuit(&all[pick % all.len()]).unwrap();
            prop_assert_eq!(rereduce(&r).unwrap(), r.clone());
            for c in &r.components {
                if !c.is_loop() {
                    let mut deg = vec![0; c.n_vertices];
                    for &(a, b, _) in &c.edges {
                        deg[a] += 1;
                        deg[b] += 1;
                    }
                    prop_assert!(deg.iter().all(|&d| d >= 3));
                } else {
                    prop_assert!(c.edges[0].2 >= 2);
                }
            }
        }
    }

    #[test]
    fn patterns_have_k_vertices() {
        for row in expansion_table(7).unwrap() {
            let p = representative_pattern(&row.reduced).unwrap();
            assert_eq!(p.n_vertices, row.k);
            let q = reduce_edges(p.n_vertices, &p.edges).unwrap();
            assert_eq!(q, row.reduced);
        }
    }

    #[test]
    fn edge_probability_and_factorisation() {
        let sp = SpaceSpec::new(SpaceKind::SU(2)).unwrap();
        let (n, ell) = (1000, 2.0);
        let e2 = estimate_e_r(&sp, &loops(&[2]), n, ell, 100, 1).unwrap();
        let p = ball_fraction(&sp, sp.poisson_level(ell, n)).unwrap();
        assert!((e2.mean - p).abs() < 1e-15);
        let a = estimate_e_r(&sp, &loops(&[3]), n, ell, 40_000, 2).unwrap();
        let b = estimate_e_r(&sp, &loops(&[2]), n, ell, 10, 3).unwrap();
        let ab = estimate_e_r(&sp, &loops(&[3, 2]), n, ell, 40_000, 4).unwrap();
        let want = a.mean * b.mean;
        let err = (ab.stderr.powi(2) + (a.stderr * b.mean).powi(2)).sqrt();
        assert!((ab.mean - want).abs() < 4.0 * err, "{} {}", ab.mean, want);
    }

    #[test]
    fn loop3_scaling_in_n() {
        let sp = SpaceSpec::new(SpaceKind::SU(2)).unwrap();
        let r = loops(&[3]);
        let a = estimate_e_r(&sp, &r, 1000, 2.0, 40_000, 5).unwrap();
        let b = estimate_e_r(&sp, &r, 4000, 2.0, 40_000, 6).unwrap();
        let (sa, sb) = (a.mean * 1000f64.powi(2), b.mean * 4000f64.powi(2));
        assert!((sa / sb - 1.0).abs() < 0.1, "{sa} {sb}");
    }

    #[test]
    fn moment_identity_su2() {
        let sp = SpaceSpec::new(SpaceKind::SU(2)).unwrap();
        let (n, ell, graphs) = (500, 2.0 * sp.vol / crate::poisson::ball_volume(3, 1.0), 200);
        let level = sp.poisson_level(ell, n);
        let per_graph: Vec<Vec<f64>> = (0..graphs)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(77, t as u64);
                let g = build_geometric_graph(&sp, n, level, &mut rng).unwrap();
                empirical_moments(&SpectralMeasure::from_adjacency(&g.adj).unwrap(), 5)
            })
            .collect();
        for s in 2..=5 {
            let xs: Vec<f64> = per_graph.iter().map(|m| m[s - 1]).collect();
            let emp = Estimate::from_samples(&xs);
            let mut pred = 0.0;
            let mut var = 0.0;
            for (i, row) in expansion_table(s).unwrap().iter().enumerate() {
                let e = estimate_e_r(&sp, &row.reduced, n, ell, 20_000, 100 + i as u64).unwrap();
                let f = row.multiplicity as f64 * falling(n, row.k);
                pred += f * e.mean;
                var += (f * e.stderr).powi(2);
            }
            let tol = 4.0 * (emp.stderr.powi(2) + var).sqrt();
            assert!((emp.mean - pred).abs() < tol, "s={s}: {} vs {pred}", emp.mean);
        }
    }
}
