//! Finite multigraphs, their automorphisms and the induced action on
//! `H_1(X, Z/3Z)`; edge paths and tightening.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};
use crate::homology::Mod3Matrix;

/// Largest edge count accepted by the automorphism enumerator.
pub const EDGE_CAP: usize = 10;

/// An oriented edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Dart {
    pub edge: usize,
    pub reversed: bool,
}

impl Dart {
    pub fn new(edge: usize, reversed: bool) -> Self {
        Dart { edge, reversed }
    }

    pub fn forward(edge: usize) -> Self {
        Dart::new(edge, false)
    }

    pub fn rev(self) -> Self {
        Dart::new(self.edge, !self.reversed)
    }
}

impl fmt::Display for Dart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.edge, if self.reversed { "'" } else { "" })
    }
}

impl std::str::FromStr for Dart {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (body, reversed) = match s.strip_suffix('\'') {
            Some(b) => (b, true),
            None => (s, false),
        };
        let edge = body.parse().map_err(|_| format!("bad edge token {s:?}"))?;
        Ok(Dart::new(edge, reversed))
    }
}

/// A finite graph; loops and parallel edges allowed. Edge `i` runs from
/// `edges[i].0` to `edges[i].1` in its forward orientation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteGraph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl FiniteGraph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::InvalidGraph("no vertices".into()));
        }
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= vertices || v >= vertices) {
            return Err(Error::InvalidGraph(format!("edge ({u}, {v}) has an endpoint out of range")));
        }
        Ok(FiniteGraph { vertices, edges })
    }

    /// One vertex with `k` loops.
    pub fn rose(k: usize) -> Self {
        FiniteGraph {
            vertices: 1,
            edges: vec![(0, 0); k],
        }
    }

    /// A cycle with `k ≥ 1` vertices and edges `i → i+1`.
    pub fn circle(k: usize) -> Self {
        FiniteGraph {
            vertices: k,
            edges: (0..k).map(|i| (i, (i + 1) % k)).collect(),
        }
    }

    /// Two vertices joined by three edges.
    pub fn theta() -> Self {
        FiniteGraph {
            vertices: 2,
            edges: vec![(0, 1); 3],
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn origin(&self, d: Dart) -> usize {
        let (u, v) = self.edges[d.edge];
        if d.reversed {
            v
        } else {
            u
        }
    }

    pub fn terminus(&self, d: Dart) -> usize {
        self.origin(d.rev())
    }

    /// All darts, forward then reversed for each edge.
    pub fn darts(&self) -> impl Iterator<Item = Dart> + '_ {
        (0..self.edges.len()).flat_map(|e| [Dart::new(e, false), Dart::new(e, true)])
    }

    /// Darts with origin `v` (a loop contributes both orientations).
    pub fn darts_at(&self, v: usize) -> Vec<Dart> {
        self.darts().filter(|&d| self.origin(d) == v).collect()
    }

    /// Valence, loops counting twice.
    pub fn valence(&self, v: usize) -> usize {
        self.darts_at(v).len()
    }

    pub fn loops_at(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v && b == v).count()
    }

    /// Number of edges joining `u` and `v` in either orientation.
    pub fn multiplicity(&self, u: usize, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| (a, b) == (u, v) || (a, b) == (v, u))
            .count()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for d in self.darts_at(v) {
                let w = self.terminus(d);
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::Disconnected)
        }
    }

    /// First Betti number `|E| − |V| + 1` of a connected graph.
    pub fn betti(&self) -> usize {
        self.edges.len() + 1 - self.vertices
    }

    /// Connected and every vertex of valence two.
    pub fn is_circle(&self) -> bool {
        self.is_connected() && !self.edges.is_empty() && (0..self.vertices).all(|v| self.valence(v) == 2)
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.vertices).filter(|&v| self.valence(v) == 1).collect()
    }

    /// BFS spanning tree from `root`: for every vertex the dart entering it
    /// from its parent (`None` at the root).
    pub fn spanning_tree(&self, root: usize) -> Result<Vec<Option<Dart>>> {
        let mut parent = vec![None; self.vertices];
        let mut seen = vec![false; self.vertices];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for d in self.darts_at(v) {
                let w = self.terminus(d);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(d);
                    queue.push_back(w);
                }
            }
        }
        if seen.iter().all(|&s| s) {
            Ok(parent)
        } else {
            Err(Error::Disconnected)
        }
    }

    /// Parse `V n` followed by one `u v` line per edge.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (n, header) = lines.next().ok_or_else(|| parse_err(1, "missing `V n` header"))?;
        let vertices = parse_header(n, header)?;
        let mut edges = Vec::new();
        for (n, line) in lines {
            edges.push(parse_pair(n, line)?);
        }
        FiniteGraph::new(vertices, edges)
    }
}

pub(crate) fn parse_header(n: usize, line: &str) -> Result<usize> {
    match line.split_whitespace().collect::<Vec<_>>()[..] {
        ["V", k] => k.parse().map_err(|_| parse_err(n, "bad vertex count")),
        _ => Err(parse_err(n, "expected `V n`")),
    }
}

pub(crate) fn parse_pair(n: usize, line: &str) -> Result<(usize, usize)> {
    let nums: std::result::Result<Vec<usize>, _> = line.split_whitespace().map(str::parse).collect();
    match nums.map_err(|_| parse_err(n, "expected `u v`"))?[..] {
        [u, v] => Ok((u, v)),
        _ => Err(parse_err(n, "expected `u v`")),
    }
}

impl fmt::Display for FiniteGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "V {}", self.vertices)?;
        for (u, v) in &self.edges {
            writeln!(f, "{u} {v}")?;
        }
        Ok(())
    }
}

/// An incidence-preserving bijection: `edge_perm[e]` is the image of the
/// forward dart of `e`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphAutomorphism {
    vertex_perm: Vec<usize>,
    edge_perm: Vec<Dart>,
}

impl GraphAutomorphism {
    pub fn new(graph: &FiniteGraph, vertex_perm: Vec<usize>, edge_perm: Vec<Dart>) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidGraph(format!("not an automorphism: {msg}"));
        if vertex_perm.len() != graph.vertices || edge_perm.len() != graph.edges.len() {
            return Err(bad("wrong permutation length"));
        }
        let mut hit = vec![false; graph.vertices];
        for &v in &vertex_perm {
            if v >= graph.vertices || std::mem::replace(&mut hit[v], true) {
                return Err(bad("vertex map is not a permutation"));
            }
        }
        let mut hit = vec![false; graph.edges.len()];
        for (e, &d) in edge_perm.iter().enumerate() {
            if d.edge >= graph.edges.len() || std::mem::replace(&mut hit[d.edge], true) {
                return Err(bad("edge map is not a permutation"));
            }
            let src = Dart::forward(e);
            if graph.origin(d) != vertex_perm[graph.origin(src)] || graph.terminus(d) != vertex_perm[graph.terminus(src)] {
                return Err(bad(&format!("edge {e} does not respect incidence")));
            }
        }
        Ok(GraphAutomorphism { vertex_perm, edge_perm })
    }

    pub fn identity(graph: &FiniteGraph) -> Self {
        GraphAutomorphism {
            vertex_perm: (0..graph.vertices).collect(),
            edge_perm: (0..graph.edges.len()).map(Dart::forward).collect(),
        }
    }

    pub fn vertex_perm(&self) -> &[usize] {
        &self.vertex_perm
    }

    pub fn edge_perm(&self) -> &[Dart] {
        &self.edge_perm
    }

    pub fn vertex(&self, v: usize) -> usize {
        self.vertex_perm[v]
    }

    pub fn dart(&self, d: Dart) -> Dart {
        let img = self.edge_perm[d.edge];
        Dart::new(img.edge, img.reversed != d.reversed)
    }

    pub fn is_identity(&self) -> bool {
        self.vertex_perm.iter().enumerate().all(|(i, &v)| i == v)
            && self.edge_perm.iter().enumerate().all(|(e, d)| *d == Dart::forward(e))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &GraphAutomorphism) -> GraphAutomorphism {
        GraphAutomorphism {
            vertex_perm: other.vertex_perm.iter().map(|&v| self.vertex_perm[v]).collect(),
            edge_perm: other.edge_perm.iter().map(|&d| self.dart(d)).collect(),
        }
    }

    pub fn inverse(&self) -> GraphAutomorphism {
        let mut vertex_perm = vec![0; self.vertex_perm.len()];
        for (i, &v) in self.vertex_perm.iter().enumerate() {
            vertex_perm[v] = i;
        }
        let mut edge_perm = vec![Dart::forward(0); self.edge_perm.len()];
        for (e, d) in self.edge_perm.iter().enumerate() {
            edge_perm[d.edge] = Dart::new(e, d.reversed);
        }
        GraphAutomorphism { vertex_perm, edge_perm }
    }

    /// Two permutation lines: vertices, then edges with `'` marking
    /// orientation reversal.
    pub fn parse(graph: &FiniteGraph, text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let [(n1, vline), (n2, eline)] = lines[..] else {
            return Err(parse_err(1, "expected two permutation lines"));
        };
        let vertex_perm = vline
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(n1, format!("bad vertex {t:?}"))))
            .collect::<Result<_>>()?;
        let edge_perm = eline
            .split_whitespace()
            .map(|t| t.parse::<Dart>().map_err(|m| parse_err(n2, m)))
            .collect::<Result<_>>()?;
        GraphAutomorphism::new(graph, vertex_perm, edge_perm)
    }
}

impl fmt::Display for GraphAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vs: Vec<String> = self.vertex_perm.iter().map(usize::to_string).collect();
        let es: Vec<String> = self.edge_perm.iter().map(Dart::to_string).collect();
        writeln!(f, "{}", vs.join(" "))?;
        writeln!(f, "{}", es.join(" "))
    }
}

// ---------------------------------------------------------------------------
// Isomorphism search

fn vertex_signature(g: &FiniteGraph, v: usize) -> (usize, usize) {
    (g.valence(v), g.loops_at(v))
}

/// All vertex bijections `X → Y` preserving edge multiplicities.
fn vertex_maps(x: &FiniteGraph, y: &FiniteGraph, first_only: bool) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if x.vertices != y.vertices || x.edges.len() != y.edges.len() {
        return out;
    }
    let mult_x: Vec<Vec<usize>> = (0..x.vertices).map(|u| (0..x.vertices).map(|v| x.multiplicity(u, v)).collect()).collect();
    let mult_y: Vec<Vec<usize>> = (0..y.vertices).map(|u| (0..y.vertices).map(|v| y.multiplicity(u, v)).collect()).collect();
    let sig_x: Vec<_> = (0..x.vertices).map(|v| vertex_signature(x, v)).collect();
    let sig_y: Vec<_> = (0..y.vertices).map(|v| vertex_signature(y, v)).collect();
    let mut map = Vec::with_capacity(x.vertices);
    let mut used = vec![false; y.vertices];

    #[allow(clippy::too_many_arguments)]
    fn go(
        map: &mut Vec<usize>,
        used: &mut [bool],
        mult_x: &[Vec<usize>],
        mult_y: &[Vec<usize>],
        sig_x: &[(usize, usize)],
        sig_y: &[(usize, usize)],
        out: &mut Vec<Vec<usize>>,
        first_only: bool,
    ) {
        let v = map.len();
        if v == sig_x.len() {
            out.push(map.clone());
            return;
        }
        for w in 0..sig_y.len() {
            if used[w] || sig_x[v] != sig_y[w] {
                continue;
            }
            if (0..v).any(|u| mult_x[u][v] != mult_y[map[u]][w]) {
                continue;
            }
            used[w] = true;
            map.push(w);
            go(map, used, mult_x, mult_y, sig_x, sig_y, out, first_only);
            map.pop();
            used[w] = false;
            if first_only && !out.is_empty() {
                return;
            }
        }
    }
    go(&mut map, &mut used, &mult_x, &mult_y, &sig_x, &sig_y, &mut out, first_only);
    out
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..k {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

/// All dart-level extensions of a vertex bijection `X → Y`.
fn edge_extensions(x: &FiniteGraph, y: &FiniteGraph, vmap: &[usize]) -> Vec<Vec<Dart>> {
    // Group X-edges by unordered endpoint pair.
    let mut groups: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (e, &(u, v)) in x.edges.iter().enumerate() {
        groups.entry((u.min(v), u.max(v))).or_default().push(e);
    }
    let mut keys: Vec<_> = groups.keys().copied().collect();
    keys.sort();
    let mut partial: Vec<Vec<Dart>> = vec![vec![Dart::forward(0); x.edges.len()]];
    for key in keys {
        let src = &groups[&key];
        let (a, b) = (vmap[key.0], vmap[key.1]);
        let tgt: Vec<usize> = (0..y.edges.len())
            .filter(|&f| {
                let (p, q) = y.edges[f];
                (p, q) == (a, b) || (p, q) == (b, a)
            })
            .collect();
        debug_assert_eq!(src.len(), tgt.len());
        let is_loop = key.0 == key.1;
        let mut next = Vec::new();
        for base in &partial {
            for perm in permutations(src.len()) {
                let flips: u32 = if is_loop { 1 << src.len() } else { 1 };
                for mask in 0..flips {
                    let mut m = base.clone();
                    for (i, &e) in src.iter().enumerate() {
                        let f = tgt[perm[i]];
                        let reversed = if is_loop {
                            mask >> i & 1 == 1
                        } else {
                            y.edges[f].0 != vmap[x.edges[e].0]
                        };
                        m[e] = Dart::new(f, reversed);
                    }
                    next.push(m);
                }
            }
        }
        partial = next;
    }
    partial
}

/// Every automorphism, by backtracking on vertex images.
pub fn enumerate_automorphisms(graph: &FiniteGraph) -> Result<Vec<GraphAutomorphism>> {
    if graph.edges.len() > EDGE_CAP {
        return Err(Error::SizeCap {
            edges: graph.edges.len(),
            cap: EDGE_CAP,
        });
    }
    let mut out = Vec::new();
    for vmap in vertex_maps(graph, graph, false) {
        for emap in edge_extensions(graph, graph, &vmap) {
            out.push(GraphAutomorphism {
                vertex_perm: vmap.clone(),
                edge_perm: emap,
            });
        }
    }
    Ok(out)
}

/// A vertex bijection extending to an isomorphism, if one exists.
pub fn find_isomorphism(x: &FiniteGraph, y: &FiniteGraph) -> Option<Vec<usize>> {
    vertex_maps(x, y, true).pop()
}

pub fn are_isomorphic(x: &FiniteGraph, y: &FiniteGraph) -> bool {
    find_isomorphism(x, y).is_some()
}

// ---------------------------------------------------------------------------
// Homology

/// Basis of `H_1`: non-tree edges of the BFS tree at vertex 0, with the
/// root-to-vertex tree paths needed to close them up.
pub(crate) struct CycleBasis {
    pub non_tree: Vec<usize>,
    pub index: Vec<Option<usize>>,
    pub root_paths: Vec<Vec<Dart>>,
}

impl CycleBasis {
    pub fn new(graph: &FiniteGraph) -> Result<Self> {
        let parent = graph.spanning_tree(0)?;
        let tree: Vec<bool> = (0..graph.edges.len())
            .map(|e| parent.iter().any(|p| p.is_some_and(|d| d.edge == e)))
            .collect();
        let non_tree: Vec<usize> = (0..graph.edges.len()).filter(|&e| !tree[e]).collect();
        let mut index = vec![None; graph.edges.len()];
        for (i, &e) in non_tree.iter().enumerate() {
            index[e] = Some(i);
        }
        let root_paths = (0..graph.vertices)
            .map(|v| {
                let mut path = Vec::new();
                let mut w = v;
                while let Some(d) = parent[w] {
                    path.push(d);
                    w = graph.origin(d);
                }
                path.reverse();
                path
            })
            .collect();
        Ok(CycleBasis {
            non_tree,
            index,
            root_paths,
        })
    }

    /// The closed loop at the root running through non-tree edge `e`.
    pub fn loop_of(&self, graph: &FiniteGraph, e: usize) -> Vec<Dart> {
        let d = Dart::forward(e);
        let mut path = self.root_paths[graph.origin(d)].clone();
        path.push(d);
        path.extend(self.root_paths[graph.terminus(d)].iter().rev().map(|d| d.rev()));
        path
    }

    /// Coordinates of a cycle given as a dart sequence.
    pub fn coordinates(&self, cycle: impl IntoIterator<Item = Dart>) -> Vec<i64> {
        let mut v = vec![0; self.non_tree.len()];
        for d in cycle {
            if let Some(i) = self.index[d.edge] {
                v[i] += if d.reversed { -1 } else { 1 };
            }
        }
        v
    }
}

/// Matrix of `f_*` on `H_1(X, Z)` in the non-tree-edge basis, columns
/// being images of basis cycles.
pub fn h1_action(graph: &FiniteGraph, f: &GraphAutomorphism) -> Result<Vec<Vec<i64>>> {
    let basis = CycleBasis::new(graph)?;
    let k = basis.non_tree.len();
    let mut m = vec![vec![0; k]; k];
    for (j, &e) in basis.non_tree.iter().enumerate() {
        let image = basis.loop_of(graph, e).into_iter().map(|d| f.dart(d));
        for (i, c) in basis.coordinates(image).into_iter().enumerate() {
            m[i][j] = c;
        }
    }
    Ok(m)
}

pub fn h1_action_mod3(graph: &FiniteGraph, f: &GraphAutomorphism) -> Result<Mod3Matrix> {
    Mod3Matrix::from_rows(&h1_action(graph, f)?)
}

/// Outcome of the graph-automorphism triviality criterion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IvanovOutcome {
    HypothesisFails,
    Identity,
    CircleRotation,
}

/// Orientation-preserving nontrivial map of a circle graph.
fn is_rotation(graph: &FiniteGraph, f: &GraphAutomorphism) -> bool {
    if !graph.is_circle() {
        return false;
    }
    // Walk once around to orient every edge coherently.
    let mut oriented = Vec::with_capacity(graph.edges.len());
    let mut d = Dart::forward(0);
    for _ in 0..graph.edges.len() {
        oriented.push(d);
        let v = graph.terminus(d);
        let back = d.rev();
        d = graph
            .darts_at(v)
            .into_iter()
            .find(|&x| x != back)
            .expect("circle vertices have valence two");
    }
    oriented.iter().all(|&d| oriented.contains(&f.dart(d)))
}

/// If `f` fixes every leaf and acts trivially on `H_1(X, Z/3Z)`, then `f`
/// is the identity or `X` is a circle rotated by `f`. Anything else is
/// reported as a [`Error::TheoremViolation`].
pub fn ivanov_check(graph: &FiniteGraph, f: &GraphAutomorphism) -> Result<IvanovOutcome> {
    graph.require_connected()?;
    if graph.leaves().iter().any(|&v| f.vertex(v) != v) || !h1_action_mod3(graph, f)?.is_identity() {
        return Ok(IvanovOutcome::HypothesisFails);
    }
    if f.is_identity() {
        return Ok(IvanovOutcome::Identity);
    }
    if is_rotation(graph, f) {
        return Ok(IvanovOutcome::CircleRotation);
    }
    Err(Error::TheoremViolation(format!("graph\n{graph}automorphism\n{f}")))
}

/// All connected multigraphs with exactly `edges` edges, one per
/// isomorphism class. Each is obtained from a smaller one by adding a loop,
/// an edge between existing vertices, or a pendant edge.
pub fn connected_multigraphs(max_edges: usize) -> Vec<Vec<FiniteGraph>> {
    let mut levels = vec![vec![FiniteGraph::rose(0)]];
    for _ in 0..max_edges {
        let mut buckets: HashMap<Vec<(usize, usize)>, Vec<FiniteGraph>> = HashMap::new();
        let mut next = Vec::new();
        for g in levels.last().unwrap() {
            let n = g.vertices;
            let mut candidates = Vec::new();
            for u in 0..n {
                for v in u..n {
                    let mut h = g.clone();
                    h.edges.push((u, v));
                    candidates.push(h);
                }
                let mut h = g.clone();
                h.vertices += 1;
                h.edges.push((u, n));
                candidates.push(h);
            }
            for h in candidates {
                let mut key: Vec<_> = (0..h.vertices).map(|v| vertex_signature(&h, v)).collect();
                key.sort();
                let bucket = buckets.entry(key).or_default();
                if !bucket.iter().any(|k| are_isomorphic(k, &h)) {
                    bucket.push(h.clone());
                    next.push(h);
                }
            }
        }
        levels.push(next);
    }
    levels
}

// ---------------------------------------------------------------------------
// Edge paths

/// A dart sequence with an explicit start vertex (so the empty path is
/// based).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgePath {
    pub start: usize,
    pub darts: Vec<Dart>,
}

impl EdgePath {
    pub fn new(graph: &FiniteGraph, start: usize, darts: Vec<Dart>) -> Result<Self> {
        let p = EdgePath { start, darts };
        p.check(graph)?;
        Ok(p)
    }

    pub fn trivial(start: usize) -> Self {
        EdgePath {
            start,
            darts: Vec::new(),
        }
    }

    pub fn check(&self, graph: &FiniteGraph) -> Result<()> {
        if self.start >= graph.vertices {
            return Err(Error::NotConcatenable(0));
        }
        let mut at = self.start;
        for (i, &d) in self.darts.iter().enumerate() {
            if d.edge >= graph.edges.len() || graph.origin(d) != at {
                return Err(Error::NotConcatenable(i));
            }
            at = graph.terminus(d);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.darts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.darts.is_empty()
    }

    pub fn end(&self, graph: &FiniteGraph) -> usize {
        self.darts.last().map_or(self.start, |&d| graph.terminus(d))
    }

    pub fn is_tight(&self) -> bool {
        self.darts.windows(2).all(|w| w[1] != w[0].rev())
    }

    pub fn reversed(&self, graph: &FiniteGraph) -> EdgePath {
        EdgePath {
            start: self.end(graph),
            darts: self.darts.iter().rev().map(|d| d.rev()).collect(),
        }
    }

    /// Concatenation; errors if `self` does not end where `other` starts.
    pub fn concat(&self, graph: &FiniteGraph, other: &EdgePath) -> Result<EdgePath> {
        if self.end(graph) != other.start {
            return Err(Error::NotConcatenable(self.darts.len()));
        }
        let mut darts = self.darts.clone();
        darts.extend_from_slice(&other.darts);
        Ok(EdgePath {
            start: self.start,
            darts,
        })
    }

    /// Cancel backtracks `d · d̄` until none remain.
    pub fn tighten(&self, graph: &FiniteGraph) -> Result<EdgePath> {
        self.check(graph)?;
        let mut stack: Vec<Dart> = Vec::with_capacity(self.darts.len());
        for &d in &self.darts {
            if stack.last() == Some(&d.rev()) {
                stack.pop();
            } else {
                stack.push(d);
            }
        }
        Ok(EdgePath {
            start: self.start,
            darts: stack,
        })
    }
}

impl fmt::Display for EdgePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.darts.is_empty() {
            return write!(f, "({})", self.start);
        }
        let ds: Vec<String> = self.darts.iter().map(Dart::to_string).collect();
        write!(f, "{}", ds.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_edge() -> FiniteGraph {
        FiniteGraph::new(2, vec![(0, 1)]).unwrap()
    }

    fn triangle() -> FiniteGraph {
        FiniteGraph::circle(3)
    }

    #[test]
    fn automorphism_counts() {
        assert_eq!(enumerate_automorphisms(&single_edge()).unwrap().len(), 2);
        assert_eq!(enumerate_automorphisms(&FiniteGraph::rose(2)).unwrap().len(), 8);
        assert_eq!(enumerate_automorphisms(&triangle()).unwrap().len(), 6);
        // 3! edge permutations times the vertex swap.
        assert_eq!(enumerate_automorphisms(&FiniteGraph::theta()).unwrap().len(), 12);
    }

    #[test]
    fn size_cap() {
        assert!(matches!(
            enumerate_automorphisms(&FiniteGraph::rose(11)),
            Err(Error::SizeCap { edges: 11, cap: 10 })
        ));
    }

    #[test]
    fn automorphisms_form_a_group() {
        for g in [FiniteGraph::rose(2), triangle(), FiniteGraph::theta(), single_edge()] {
            let auts = enumerate_automorphisms(&g).unwrap();
            for a in &auts {
                assert!(auts.contains(&a.inverse()));
                assert!(a.compose(&a.inverse()).is_identity());
                for b in &auts {
                    assert!(auts.contains(&a.compose(b)));
                }
            }
        }
    }

    fn petal_swap() -> GraphAutomorphism {
        GraphAutomorphism::new(&FiniteGraph::rose(2), vec![0], vec![Dart::forward(1), Dart::forward(0)]).unwrap()
    }

    fn rotation() -> GraphAutomorphism {
        GraphAutomorphism::new(&triangle(), vec![1, 2, 0], vec![Dart::forward(1), Dart::forward(2), Dart::forward(0)]).unwrap()
    }

    #[test]
    fn h1_examples() {
        let rose = FiniteGraph::rose(2);
        assert!(h1_action_mod3(&rose, &GraphAutomorphism::identity(&rose)).unwrap().is_identity());
        assert_eq!(
            h1_action_mod3(&rose, &petal_swap()).unwrap(),
            Mod3Matrix::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap()
        );
        assert!(h1_action_mod3(&triangle(), &rotation()).unwrap().is_identity());
    }

    #[test]
    fn h1_disconnected() {
        let g = FiniteGraph::new(2, vec![]).unwrap();
        assert_eq!(h1_action_mod3(&g, &GraphAutomorphism::identity(&g)), Err(Error::Disconnected));
    }

    #[test]
    fn ivanov_examples() {
        let theta = FiniteGraph::theta();
        assert_eq!(ivanov_check(&theta, &GraphAutomorphism::identity(&theta)).unwrap(), IvanovOutcome::Identity);
        assert_eq!(ivanov_check(&triangle(), &rotation()).unwrap(), IvanovOutcome::CircleRotation);
        assert_eq!(ivanov_check(&FiniteGraph::rose(2), &petal_swap()).unwrap(), IvanovOutcome::HypothesisFails);
        let loop1 = FiniteGraph::rose(1);
        let invert = GraphAutomorphism::new(&loop1, vec![0], vec![Dart::new(0, true)]).unwrap();
        assert_eq!(ivanov_check(&loop1, &invert).unwrap(), IvanovOutcome::HypothesisFails);
    }

    #[test]
    fn invalid_automorphism_rejected() {
        assert!(GraphAutomorphism::new(&single_edge(), vec![1, 0], vec![Dart::forward(0)]).is_err());
        assert!(GraphAutomorphism::new(&single_edge(), vec![1, 0], vec![Dart::new(0, true)]).is_ok());
    }

    #[test]
    fn text_round_trip() {
        let g = FiniteGraph::parse("V 2\n0 1\n0 1\n1 1\n").unwrap();
        assert_eq!(FiniteGraph::parse(&g.to_string()).unwrap(), g);
        let f = GraphAutomorphism::parse(&triangle(), "1 2 0\n1 2 0\n").unwrap();
        assert_eq!(f, rotation());
        assert_eq!(GraphAutomorphism::parse(&triangle(), &f.to_string()).unwrap(), f);
        assert!(FiniteGraph::parse("V 1\n0 3\n").is_err());
    }

    #[test]
    fn tighten_examples() {
        let rose = FiniteGraph::rose(3);
        let (a, b, c) = (Dart::forward(0), Dart::forward(1), Dart::forward(2));
        let p = EdgePath::new(&rose, 0, vec![a, a.rev()]).unwrap();
        assert_eq!(p.tighten(&rose).unwrap(), EdgePath::trivial(0));
        let p = EdgePath::new(&rose, 0, vec![a, b, b.rev(), c]).unwrap();
        assert_eq!(p.tighten(&rose).unwrap().darts, vec![a, c]);
        let bad = EdgePath {
            start: 0,
            darts: vec![Dart::forward(0), Dart::forward(0)],
        };
        assert_eq!(bad.tighten(&single_edge()), Err(Error::NotConcatenable(1)));
    }

    #[test]
    fn small_graph_counts() {
        // Connected multigraphs with loops: 1, 2, 4 classes on 0, 1, 2 edges.
        let levels = connected_multigraphs(2);
        let counts: Vec<usize> = levels.iter().map(Vec::len).collect();
        assert_eq!(counts, vec![1, 2, 4]);
    }
}
