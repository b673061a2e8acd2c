//! Analytics for topological representatives on marked roses and graphs:
//! filtrations, transition matrices, stratum growth, cyclic classes,
//! turns and legality, relative train track checks and bounded
//! cancellation.

use std::collections::HashMap;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{Dart, EdgePath, FiniteGraph};
use crate::poly::{char_poly, eval_f64};
use crate::splittings::GraphMapRep;

/// Relative tolerance for the eigenvalue iteration.
pub const LAMBDA_TOL: f64 = 1e-10;
/// `λ > 1 + EG_TOL` classifies a stratum as exponentially growing.
pub const EG_TOL: f64 = 1e-8;
/// Default length cap for the connecting-path search.
pub const DEFAULT_PATH_CAP: usize = 20;
const PATH_BUDGET: usize = 200_000;

/// Backtracking-free form of `p`.
pub fn tighten(graph: &FiniteGraph, p: &EdgePath) -> Result<EdgePath> {
    p.tighten(graph)
}

/// Entry `(i, j)` counts occurrences of `edges[i]` (either orientation) in
/// the tight image of `edges[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub edges: Vec<usize>,
    pub entries: Vec<Vec<u64>>,
}

impl TransitionMatrix {
    pub fn new(edges: Vec<usize>, entries: Vec<Vec<u64>>) -> Result<Self> {
        if entries.len() != edges.len() || entries.iter().any(|r| r.len() != edges.len()) {
            return Err(Error::DimensionMismatch);
        }
        Ok(TransitionMatrix { edges, entries })
    }

    /// Matrix indexed by `0..n` from rows.
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self> {
        TransitionMatrix::new((0..rows.len()).collect(), rows)
    }

    /// Restriction of the full transition matrix of `f` to `edges`.
    pub fn of(f: &GraphMapRep, edges: &[usize]) -> Self {
        let pos: HashMap<usize, usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut entries = vec![vec![0u64; edges.len()]; edges.len()];
        for (j, &e) in edges.iter().enumerate() {
            for d in &f.image(e).darts {
                if let Some(&i) = pos.get(&d.edge) {
                    entries[i][j] += 1;
                }
            }
        }
        TransitionMatrix {
            edges: edges.to_vec(),
            entries,
        }
    }

    pub fn dim(&self) -> usize {
        self.edges.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|&x| x == 0)
    }

    pub fn is_permutation(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| self.entries[i].iter().sum::<u64>() == 1)
            && (0..n).all(|j| (0..n).map(|i| self.entries[i][j]).sum::<u64>() == 1)
    }

    fn successors(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim()).filter(move |&i| self.entries[i][j] > 0)
    }

    pub fn is_irreducible(&self) -> bool {
        let n = self.dim();
        if n == 0 || self.is_zero() {
            return false;
        }
        let reach = |transpose: bool| {
            let mut seen = vec![false; n];
            seen[0] = true;
            let mut stack = vec![0];
            while let Some(j) = stack.pop() {
                for i in 0..n {
                    let w = if transpose { self.entries[j][i] } else { self.entries[i][j] };
                    if w > 0 && !seen[i] {
                        seen[i] = true;
                        stack.push(i);
                    }
                }
            }
            seen.iter().all(|&s| s)
        };
        reach(false) && reach(true)
    }

    pub fn square(&self) -> TransitionMatrix {
        let n = self.dim();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.entries[i][k] * self.entries[k][j]).sum())
                    .collect()
            })
            .collect();
        TransitionMatrix {
            edges: self.edges.clone(),
            entries,
        }
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.entries.iter().map(|r| r.iter().sum()).collect()
    }
}

/// Growth type of a stratum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", content = "lambda")]
pub enum StratumClass {
    Zero,
    #[serde(rename = "NEG")]
    Neg,
    #[serde(rename = "EG")]
    Eg(f64),
}

impl StratumClass {
    pub fn lambda(&self) -> f64 {
        match self {
            StratumClass::Zero => 0.0,
            StratumClass::Neg => 1.0,
            StratumClass::Eg(l) => *l,
        }
    }

    pub fn is_eg(&self) -> bool {
        matches!(self, StratumClass::Eg(_))
    }
}

/// Perron–Frobenius eigenvalue of an irreducible matrix: power iteration
/// on `M + I` (primitive, same eigenvector), then bisection of the
/// characteristic polynomial on a bracket around the estimate.
pub fn perron_frobenius(m: &TransitionMatrix) -> Result<f64> {
    let n = m.dim();
    if !m.is_irreducible() {
        return Err(Error::Config("Perron–Frobenius eigenvalue requested for a reducible matrix".into()));
    }
    let mut v = vec![1.0 / n as f64; n];
    let mut estimate = 0.0;
    for _ in 0..100_000 {
        let mut next: Vec<f64> = (0..n)
            .map(|i| v[i] + (0..n).map(|j| m.entries[i][j] as f64 * v[j]).sum::<f64>())
            .collect();
        let norm: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= norm);
        let done = (norm - estimate).abs() <= LAMBDA_TOL * norm;
        estimate = norm;
        v = next;
        if done {
            break;
        }
    }
    let lambda = estimate - 1.0;
    let rows: Vec<Vec<i128>> = m.entries.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let p = match char_poly(&rows) {
        Ok(p) => p,
        Err(Error::Overflow) => return Ok(lambda),
        Err(e) => return Err(e),
    };
    let delta = 1e-6 * lambda.max(1.0);
    let (mut lo, mut hi) = (lambda - delta, lambda + delta);
    let (flo, fhi) = (eval_f64(&p, lo), eval_f64(&p, hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::VerificationFailed(format!(
            "characteristic polynomial has no sign change near λ ≈ {lambda}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = eval_f64(&p, mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Zero, NEG (exactly: an irreducible integer matrix with `λ = 1` is a
/// permutation matrix) or EG with its eigenvalue.
pub fn classify_stratum(m: &TransitionMatrix) -> Result<StratumClass> {
    if m.is_zero() {
        return Ok(StratumClass::Zero);
    }
    if m.is_permutation() {
        return Ok(StratumClass::Neg);
    }
    let lambda = perron_frobenius(m)?;
    Ok(if lambda > 1.0 + EG_TOL {
        StratumClass::Eg(lambda)
    } else {
        StratumClass::Neg
    })
}

/// Cyclic structure of an irreducible transition matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Periodicity {
    Aperiodic,
    Period { d: usize, classes: Vec<Vec<usize>> },
}

impl Periodicity {
    pub fn period(&self) -> usize {
        match self {
            Periodicity::Aperiodic => 1,
            Periodicity::Period { d, .. } => *d,
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period `d` = gcd of cycle lengths; classes are BFS levels mod `d` from
/// the first stratum edge, listed as edge indices. The image of each class
/// is checked to meet the stratum only in the next class.
pub fn aperiodic_partition(m: &TransitionMatrix) -> Result<Periodicity> {
    if !m.is_irreducible() {
        return Err(Error::Config("cyclic classes requested for a reducible matrix".into()));
    }
    let n = m.dim();
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0]);
    while let Some(j) = queue.pop_front() {
        for i in m.successors(j).collect::<Vec<_>>() {
            if level[i] == usize::MAX {
                level[i] = level[j] + 1;
                queue.push_back(i);
            }
        }
    }
    let mut d = 0;
    for j in 0..n {
        for i in m.successors(j) {
            d = gcd(d, (level[j] + 1).abs_diff(level[i]));
        }
    }
    let mut classes = vec![Vec::new(); d];
    for (j, &l) in level.iter().enumerate() {
        classes[l % d].push(j);
    }
    for (c, class) in classes.iter().enumerate() {
        for &j in class {
            if let Some(i) = m.successors(j).find(|i| level[*i] % d != (c + 1) % d) {
                return Err(Error::VerificationFailed(format!(
                    "edge {} in class {c} maps over edge {} outside the next class",
                    m.edges[j], m.edges[i]
                )));
            }
        }
    }
    if d == 1 {
        return Ok(Periodicity::Aperiodic);
    }
    let classes = classes
        .into_iter()
        .map(|c| c.into_iter().map(|j| m.edges[j]).collect())
        .collect();
    Ok(Periodicity::Period { d, classes })
}

/// One stratum `H_r` of a filtration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub edges: Vec<usize>,
    pub matrix: TransitionMatrix,
    pub class: StratumClass,
    pub periodicity: Option<Periodicity>,
}

/// Strata listed bottom-up: the union of the first `r` strata is `X_r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Filtration {
    pub strata: Vec<Stratum>,
}

impl Filtration {
    pub fn height_of(&self, e: usize) -> usize {
        self.strata.iter().position(|s| s.edges.contains(&e)).expect("every edge lies in a stratum")
    }

    /// Edges of `X_r` (strata `0..r`).
    pub fn below(&self, r: usize) -> Vec<usize> {
        self.strata[..r].iter().flat_map(|s| s.edges.iter().copied()).collect()
    }

    /// Every stratum's image lies in itself and lower strata.
    pub fn check_invariant(&self, f: &GraphMapRep) -> Result<()> {
        for (r, s) in self.strata.iter().enumerate() {
            for &e in &s.edges {
                if let Some(d) = f.image(e).darts.iter().find(|d| self.height_of(d.edge) > r) {
                    return Err(Error::VerificationFailed(format!("edge {e} maps over higher edge {}", d.edge)));
                }
            }
        }
        Ok(())
    }
}

/// Maximal filtration from the strongly connected components of the edge
/// transition digraph, ordered so each `X_r` is invariant.
pub fn filtration_of(f: &GraphMapRep) -> Result<Filtration> {
    f.require_tight()?;
    let ne = f.graph().edge_count();
    let mut g = DiGraph::<usize, ()>::with_capacity(ne, 0);
    let nodes: Vec<_> = (0..ne).map(|e| g.add_node(e)).collect();
    for e in 0..ne {
        let mut targets: Vec<usize> = f.image(e).darts.iter().map(|d| d.edge).collect();
        targets.sort_unstable();
        targets.dedup();
        for t in targets {
            g.add_edge(nodes[e], nodes[t], ());
        }
    }
    let mut strata = Vec::new();
    for comp in tarjan_scc(&g) {
        let mut edges: Vec<usize> = comp.iter().map(|&n| g[n]).collect();
        edges.sort_unstable();
        let matrix = TransitionMatrix::of(f, &edges);
        let class = classify_stratum(&matrix)?;
        let periodicity = if matrix.is_zero() { None } else { Some(aperiodic_partition(&matrix)?) };
        strata.push(Stratum {
            edges,
            matrix,
            class,
            periodicity,
        });
    }
    let filtration = Filtration { strata };
    filtration.check_invariant(f)?;
    Ok(filtration)
}

/// The derivative map on directions: first dart of the image of a dart.
pub fn direction_map(f: &GraphMapRep) -> Result<HashMap<Dart, Dart>> {
    f.require_tight()?;
    Ok(f.graph()
        .darts()
        .map(|d| (d, *f.dart_image(d).first().expect("nondegenerate images")))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TurnKind {
    Degenerate,
    Illegal,
    Legal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub vertex: usize,
    pub first: Dart,
    pub second: Dart,
    pub kind: TurnKind,
}

/// Legality of the turn `{d, d'}` under iterates of `df`.
pub fn turn_kind(df: &HashMap<Dart, Dart>, d: Dart, d2: Dart) -> TurnKind {
    if d == d2 {
        return TurnKind::Degenerate;
    }
    let (mut x, mut y) = (d, d2);
    for _ in 0..=df.len() {
        x = df[&x];
        y = df[&y];
        if x == y {
            return TurnKind::Illegal;
        }
    }
    TurnKind::Legal
}

/// Every turn (unordered pair of directions at a vertex, including the
/// degenerate ones) with its classification.
pub fn illegal_turns(f: &GraphMapRep) -> Result<Vec<Turn>> {
    let df = direction_map(f)?;
    let g = f.graph();
    let mut out = Vec::new();
    for v in 0..g.vertex_count() {
        let mut dirs = g.darts_at(v);
        dirs.sort();
        for (i, &d) in dirs.iter().enumerate() {
            for &d2 in &dirs[i..] {
                out.push(Turn {
                    vertex: v,
                    first: d,
                    second: d2,
                    kind: turn_kind(&df, d, d2),
                });
            }
        }
    }
    Ok(out)
}

/// Outcome of one checked condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail")]
pub enum Check {
    Pass,
    /// No violation among paths up to the given length; longer ones unchecked.
    BoundedPass(usize),
    Fail(String),
}

impl Check {
    pub fn is_fail(&self) -> bool {
        matches!(self, Check::Fail(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumRtt {
    pub stratum: usize,
    pub directions: Check,
    pub connecting_paths: Check,
    pub legality: Check,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RttReport {
    pub strata: Vec<StratumRtt>,
}

impl RttReport {
    pub fn passes(&self) -> bool {
        self.strata
            .iter()
            .all(|s| !s.directions.is_fail() && !s.connecting_paths.is_fail() && !s.legality.is_fail())
    }
}

fn path_string(darts: &[Dart]) -> String {
    darts.iter().map(Dart::to_string).collect::<Vec<_>>().join(" ")
}

/// Check the three relative train track conditions on every EG stratum.
pub fn verify_rtt(f: &GraphMapRep, filtration: &Filtration, path_cap: usize) -> Result<RttReport> {
    f.require_tight()?;
    filtration.check_invariant(f)?;
    let df = direction_map(f)?;
    let g = f.graph();
    let mut out = Vec::new();
    for (r, s) in filtration.strata.iter().enumerate() {
        if !s.class.is_eg() {
            continue;
        }
        let in_r = |d: &Dart| s.edges.contains(&d.edge);
        let directions = match g.darts().filter(in_r).find(|d| !in_r(&df[d])) {
            Some(d) => Check::Fail(format!("direction {d} maps to {} outside the stratum", df[&d])),
            None => Check::Pass,
        };
        let connecting_paths = check_connecting_paths(f, filtration, r, path_cap)?;
        let mut legality = Check::Pass;
        'edges: for &e in &s.edges {
            let img = &f.image(e).darts;
            for w in img.windows(2) {
                let (a, b) = (w[0].rev(), w[1]);
                if in_r(&a) && in_r(&b) && turn_kind(&df, a, b) == TurnKind::Illegal {
                    legality = Check::Fail(format!("image of edge {e} takes the illegal turn {{{a}, {b}}}"));
                    break 'edges;
                }
            }
        }
        out.push(StratumRtt {
            stratum: r,
            directions,
            connecting_paths,
            legality,
        });
    }
    Ok(RttReport { strata: out })
}

fn check_connecting_paths(f: &GraphMapRep, filtration: &Filtration, r: usize, cap: usize) -> Result<Check> {
    let g = f.graph();
    let lower = filtration.below(r);
    let stratum = &filtration.strata[r].edges;
    let mut touches = vec![false; g.vertex_count()];
    for &e in stratum {
        let (u, v) = g.edges()[e];
        touches[u] = true;
        touches[v] = true;
    }
    let mut explored = 0usize;
    let mut truncated = false;
    let mut stack: Vec<Vec<Dart>> = Vec::new();
    for v in (0..g.vertex_count()).filter(|&v| touches[v]) {
        for d in g.darts_at(v).into_iter().filter(|d| lower.contains(&d.edge)) {
            stack.push(vec![d]);
        }
    }
    while let Some(path) = stack.pop() {
        explored += 1;
        if explored > PATH_BUDGET {
            truncated = true;
            break;
        }
        let last = *path.last().unwrap();
        let end = g.terminus(last);
        if touches[end] {
            let p = EdgePath {
                start: g.origin(path[0]),
                darts: path.clone(),
            };
            if f.apply(&p).tighten(g)?.is_empty() {
                return Ok(Check::Fail(format!("connecting path {} has degenerate image", path_string(&path))));
            }
        }
        if path.len() >= cap {
            truncated = true;
            continue;
        }
        for d in g.darts_at(end) {
            if lower.contains(&d.edge) && d != last.rev() {
                let mut next = path.clone();
                next.push(d);
                stack.push(next);
            }
        }
    }
    Ok(if truncated { Check::BoundedPass(cap) } else { Check::Pass })
}

/// `Σ_e |f(e)|`, a bounded cancellation constant for `f`.
pub fn bcc_bound(f: &GraphMapRep) -> Result<usize> {
    f.require_tight()?;
    Ok(f.edge_images().iter().map(EdgePath::len).sum())
}

/// Lengths `(ℓ[f(ρ)], ℓ[f(ρ₁)], ℓ[f(ρ₂)])` for the tight path `ρ = ρ₁ρ₂`.
pub fn cancellation_lengths(f: &GraphMapRep, rho1: &EdgePath, rho2: &EdgePath) -> Result<(usize, usize, usize)> {
    let g = f.graph();
    let rho = rho1.concat(g, rho2)?;
    if !rho.is_tight() {
        return Err(Error::NotTight(0));
    }
    let len = |p: &EdgePath| -> Result<usize> { Ok(f.apply(p).tighten(g)?.len()) };
    Ok((len(&rho)?, len(rho1)?, len(rho2)?))
}

/// Random backtracking-free path with `len` edges.
pub fn random_tight_path<R: Rng + ?Sized>(g: &FiniteGraph, len: usize, rng: &mut R) -> EdgePath {
    let start = rng.random_range(0..g.vertex_count());
    let mut darts: Vec<Dart> = Vec::with_capacity(len);
    let mut v = start;
    for _ in 0..len {
        let options: Vec<Dart> = g
            .darts_at(v)
            .into_iter()
            .filter(|d| darts.last().is_none_or(|l| *d != l.rev()))
            .collect();
        if options.is_empty() {
            break;
        }
        let d = options[rng.random_range(0..options.len())];
        v = g.terminus(d);
        darts.push(d);
    }
    EdgePath { start, darts }
}

/// Result of randomized bounded-cancellation trials.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BccTrials {
    pub bound: usize,
    pub trials: usize,
    pub max_cancellation: usize,
    pub violations: Vec<String>,
}

/// Split random tight paths of length ≤ `max_len` and compare the
/// cancellation at the junction with `2·bcc_bound(f)`.
pub fn bcc_trials<R: Rng + ?Sized>(f: &GraphMapRep, trials: usize, max_len: usize, rng: &mut R) -> Result<BccTrials> {
    let c = bcc_bound(f)?;
    let g = f.graph();
    let mut max_cancellation = 0;
    let mut violations = Vec::new();
    for _ in 0..trials {
        let len = rng.random_range(1..=max_len.max(1));
        let rho = random_tight_path(g, len, rng);
        let cut = rng.random_range(0..=rho.len());
        let rho1 = EdgePath {
            start: rho.start,
            darts: rho.darts[..cut].to_vec(),
        };
        let rho2 = EdgePath {
            start: rho1.end(g),
            darts: rho.darts[cut..].to_vec(),
        };
        let (whole, l1, l2) = cancellation_lengths(f, &rho1, &rho2)?;
        let lost = (l1 + l2).saturating_sub(whole);
        max_cancellation = max_cancellation.max(lost);
        if whole + 2 * c < l1 + l2 {
            violations.push(format!("{} | {}", path_string(&rho1.darts), path_string(&rho2.darts)));
        }
    }
    Ok(BccTrials {
        bound: c,
        trials,
        max_cancellation,
        violations,
    })
}

/// Everything `rtt-analyze` reports for one map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub strata: Vec<StratumSummary>,
    pub rtt: RttReport,
    pub bcc: usize,
    pub illegal_turns: Vec<(Dart, Dart)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratumSummary {
    pub edges: Vec<usize>,
    pub class: String,
    pub lambda: f64,
    pub period: Option<usize>,
    pub partition: Option<Vec<Vec<usize>>>,
}

pub fn analyze(f: &GraphMapRep, path_cap: usize) -> Result<Analysis> {
    let filtration = filtration_of(f)?;
    let strata = filtration
        .strata
        .iter()
        .map(|s| StratumSummary {
            edges: s.edges.clone(),
            class: match s.class {
                StratumClass::Zero => "Zero".into(),
                StratumClass::Neg => "NEG".into(),
                StratumClass::Eg(_) => "EG".into(),
            },
            lambda: s.class.lambda(),
            period: s.periodicity.as_ref().map(Periodicity::period),
            partition: match &s.periodicity {
                Some(Periodicity::Period { classes, .. }) => Some(classes.clone()),
                _ => None,
            },
        })
        .collect();
    let illegal = illegal_turns(f)?
        .into_iter()
        .filter(|t| t.kind == TurnKind::Illegal)
        .map(|t| (t.first, t.second))
        .collect();
    Ok(Analysis {
        strata,
        rtt: verify_rtt(f, &filtration, path_cap)?,
        bcc: bcc_bound(f)?,
        illegal_turns: illegal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splittings::MarkedGraph;
    use crate::words::Alphabet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rose_map(images: &[&str]) -> GraphMapRep {
        let rose = MarkedGraph::standard_rose(Alphabet::new(images.len()).unwrap());
        GraphMapRep::rose_map(rose, images).unwrap()
    }

    fn d(s: &str) -> Dart {
        s.parse().unwrap()
    }

    #[test]
    fn tighten_examples() {
        let g = FiniteGraph::rose(3);
        let p = EdgePath::new(&g, 0, vec![d("0"), d("1"), d("1'"), d("2")]).unwrap();
        assert_eq!(tighten(&g, &p).unwrap().darts, vec![d("0"), d("2")]);
        let q = EdgePath::new(&g, 0, vec![d("0"), d("0'")]).unwrap();
        assert!(tighten(&g, &q).unwrap().is_empty());
    }

    #[test]
    fn fibonacci_filtration() {
        let f = rose_map(&["ab", "a"]);
        let filt = filtration_of(&f).unwrap();
        assert_eq!(filt.strata.len(), 1);
        assert_eq!(filt.strata[0].matrix.entries, vec![vec![1, 1], vec![1, 0]]);
        let lambda = filt.strata[0].class.lambda();
        assert!((lambda - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-10, "{lambda}");
        assert_eq!(filt.strata[0].periodicity, Some(Periodicity::Aperiodic));
    }

    #[test]
    fn two_strata() {
        let f = rose_map(&["a", "ba"]);
        let filt = filtration_of(&f).unwrap();
        assert_eq!(filt.strata.len(), 2);
        assert_eq!(filt.strata[0].edges, vec![0]);
        assert_eq!(filt.strata[1].edges, vec![1]);
        assert!(filt.strata.iter().all(|s| s.class == StratumClass::Neg));
        let id = rose_map(&["a", "b", "c"]);
        let filt = filtration_of(&id).unwrap();
        assert_eq!(filt.strata.len(), 3);
        assert!(filt.strata.iter().all(|s| s.matrix.entries == vec![vec![1]]));
    }

    #[test]
    fn classify_examples() {
        let m = TransitionMatrix::from_rows(vec![vec![0, 2], vec![2, 0]]).unwrap();
        match classify_stratum(&m).unwrap() {
            StratumClass::Eg(l) => assert!((l - 2.0).abs() < 1e-10),
            c => panic!("{c:?}"),
        }
        let one = TransitionMatrix::from_rows(vec![vec![1]]).unwrap();
        assert_eq!(classify_stratum(&one).unwrap(), StratumClass::Neg);
        let zero = TransitionMatrix::from_rows(vec![vec![0]]).unwrap();
        assert_eq!(classify_stratum(&zero).unwrap(), StratumClass::Zero);
    }

    #[test]
    fn period_two() {
        let f = rose_map(&["bb", "aa"]);
        let filt = filtration_of(&f).unwrap();
        assert_eq!(
            filt.strata[0].periodicity,
            Some(Periodicity::Period {
                d: 2,
                classes: vec![vec![0], vec![1]]
            })
        );
        let one = TransitionMatrix::from_rows(vec![vec![1]]).unwrap();
        assert_eq!(aperiodic_partition(&one).unwrap(), Periodicity::Aperiodic);
    }

    #[test]
    fn turns() {
        let id = rose_map(&["a", "b"]);
        assert!(illegal_turns(&id).unwrap().iter().all(|t| t.kind != TurnKind::Illegal));
        let f = rose_map(&["ab", "a"]);
        let turns = illegal_turns(&f).unwrap();
        let illegal: Vec<_> = turns.iter().filter(|t| t.kind == TurnKind::Illegal).collect();
        assert_eq!(illegal.len(), 1);
        assert_eq!((illegal[0].first, illegal[0].second), (d("0"), d("1")));
        assert!(turns.iter().filter(|t| t.first == t.second).all(|t| t.kind == TurnKind::Degenerate));
    }

    #[test]
    fn rtt_examples() {
        let f = rose_map(&["ab", "a"]);
        let filt = filtration_of(&f).unwrap();
        let report = verify_rtt(&f, &filt, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(report.strata.len(), 1);
        assert!(report.passes());
        assert_eq!(report.strata[0].connecting_paths, Check::Pass);
        let g = rose_map(&["a", "ba"]);
        let report = verify_rtt(&g, &filtration_of(&g).unwrap(), DEFAULT_PATH_CAP).unwrap();
        assert!(report.strata.is_empty() && report.passes());
        let bad = rose_map(&["a", "b"]);
        let p = EdgePath::new(bad.graph(), 0, vec![d("0"), d("1"), d("1'")]).unwrap();
        let bad = GraphMapRep::new(bad.domain().clone(), vec![0], vec![p, EdgePath::new(bad.graph(), 0, vec![d("1")]).unwrap()]).unwrap();
        assert_eq!(filtration_of(&bad).unwrap_err(), Error::NotTight(0));
    }

    #[test]
    fn legality_failure_is_reported() {
        // Oracle: scan every interior turn of every image directly.
        let f = rose_map(&["aab", "ab"]);
        let filt = filtration_of(&f).unwrap();
        let report = verify_rtt(&f, &filt, DEFAULT_PATH_CAP).unwrap();
        let df = direction_map(&f).unwrap();
        let expect_fail = f.edge_images().iter().any(|p| {
            p.darts
                .windows(2)
                .any(|w| turn_kind(&df, w[0].rev(), w[1]) == TurnKind::Illegal)
        });
        assert_eq!(!report.passes(), expect_fail);
    }

    #[test]
    fn bcc_examples() {
        assert_eq!(bcc_bound(&rose_map(&["ab", "a"])).unwrap(), 3);
        let id = rose_map(&["a", "b"]);
        assert_eq!(bcc_bound(&id).unwrap(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = bcc_trials(&id, 200, 50, &mut rng).unwrap();
        assert_eq!(t.max_cancellation, 0);
        let t = bcc_trials(&rose_map(&["ab", "a"]), 1000, 50, &mut rng).unwrap();
        assert!(t.violations.is_empty());
    }

    #[test]
    fn report_serializes() {
        let a = analyze(&rose_map(&["ab", "a"]), DEFAULT_PATH_CAP).unwrap();
        let json = serde_json::to_value(&a).unwrap();
        assert_eq!(json["bcc"], 3);
        assert_eq!(json["strata"][0]["class"], "EG");
    }
}
