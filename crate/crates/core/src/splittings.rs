//! Marked graphs of groups as free splittings of `F_N`: realization of outer
//! automorphisms by graph automorphisms, splitting periods, induced free
//! factor systems, vertex homology, twist groups and suspensions.

use std::collections::VecDeque;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::aut::{inner_conjugator, FreeAutomorphism, OuterClass};
use crate::error::{parse_err, Error, Result};
use crate::graphs::{enumerate_automorphisms, parse_header, parse_pair, Dart, EdgePath, FiniteGraph, GraphAutomorphism};
use crate::homology::{abelianization, Mod3Subspace};
use crate::subgroups::{image_class_bounded, FreeFactorSystem, OrbitOutcome, SubgroupConjClass};
use crate::words::{apply_endo, Alphabet, Letter, Word};

/// Generators of a vertex group, written `conj · g · conj⁻¹` in `F_N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexGroup {
    pub generators: Vec<Word>,
    pub conjugator: Word,
}

impl VertexGroup {
    pub fn trivial(alphabet: Alphabet) -> Self {
        VertexGroup {
            generators: Vec::new(),
            conjugator: Word::identity(alphabet),
        }
    }

    pub fn new(generators: Vec<Word>) -> Result<Self> {
        let alphabet = generators.first().ok_or(Error::EmptyGenerators)?.alphabet();
        Ok(VertexGroup {
            generators,
            conjugator: Word::identity(alphabet),
        })
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Generators as elements of `F_N`.
    pub fn ambient(&self) -> Vec<Word> {
        self.generators.iter().map(|g| g.conjugate_by(&self.conjugator)).collect()
    }
}

/// A finite graph of groups with trivial edge groups and an identification
/// of its fundamental group (based at vertex 0) with `F_N`.
///
/// The fundamental group is free on the list `L` consisting of the vertex
/// group generators (vertex by vertex) followed by one stable letter per
/// non-tree edge. The marking `θ` sends `x_j` to the `F_N`-word of `L_j`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarkedGraph {
    graph: FiniteGraph,
    tree: Vec<bool>,
    parent: Vec<Option<Dart>>,
    edge_words: Vec<Option<Word>>,
    vertex_groups: Vec<VertexGroup>,
    marking: FreeAutomorphism,
    edge_letter: Vec<Option<usize>>,
    vertex_letters: Vec<Range<usize>>,
}

/// Inverse images when `images` is a signed permutation of the basis.
fn signed_permutation_inverse(images: &[Word]) -> Option<Vec<Word>> {
    let alphabet = images.first()?.alphabet();
    let mut back = vec![None; images.len()];
    for (i, w) in images.iter().enumerate() {
        let [l] = w.letters() else { return None };
        let slot = back.get_mut(l.index())?;
        if slot.is_some() {
            return None;
        }
        *slot = Some(Word::reduce(alphabet, [Letter::new(i, l.is_inverse())]).ok()?);
    }
    back.into_iter().collect()
}

impl MarkedGraph {
    /// `edge_words[e]` must be `Some` exactly for edges outside `tree`.
    /// `inverse` gives `θ⁻¹(x_i)`; it may be omitted when the marking
    /// list is a signed permutation of the basis.
    pub fn new(
        alphabet: Alphabet,
        graph: FiniteGraph,
        tree: &[usize],
        edge_words: Vec<Option<Word>>,
        vertex_groups: Vec<VertexGroup>,
        inverse: Option<Vec<Word>>,
    ) -> Result<Self> {
        let bad = |m: String| Error::InvalidMarking(m);
        graph.require_connected()?;
        let (nv, ne) = (graph.vertex_count(), graph.edge_count());
        if vertex_groups.len() != nv || edge_words.len() != ne {
            return Err(bad("one vertex group per vertex and one word slot per edge required".into()));
        }
        let mut in_tree = vec![false; ne];
        for &e in tree {
            if e >= ne || std::mem::replace(&mut in_tree[e], true) {
                return Err(bad(format!("bad tree edge {e}")));
            }
        }
        if tree.len() + 1 != nv {
            return Err(bad(format!("a spanning tree needs {} edges", nv - 1)));
        }
        let parent = tree_parents(&graph, &in_tree).ok_or_else(|| bad("tree edges do not span".into()))?;
        for (e, w) in edge_words.iter().enumerate() {
            if w.is_some() == in_tree[e] {
                return Err(bad(format!("edge {e}: words are given exactly for non-tree edges")));
            }
        }
        for v in 0..nv {
            if graph.valence(v) == 1 && vertex_groups[v].rank() == 0 {
                return Err(bad(format!("vertex {v} has valence 1 and trivial group (not minimal)")));
            }
        }
        let mut list = Vec::new();
        let mut vertex_letters = Vec::with_capacity(nv);
        for g in &vertex_groups {
            let start = list.len();
            for w in g.ambient() {
                alphabet.check(w.alphabet())?;
                list.push(w);
            }
            vertex_letters.push(start..list.len());
        }
        let mut edge_letter = vec![None; ne];
        for (e, w) in edge_words.iter().enumerate() {
            if let Some(w) = w {
                alphabet.check(w.alphabet())?;
                edge_letter[e] = Some(list.len());
                list.push(w.clone());
            }
        }
        if list.len() != alphabet.rank() {
            return Err(bad(format!(
                "vertex group ranks plus non-tree edges give {}, expected rank {}",
                list.len(),
                alphabet.rank()
            )));
        }
        let inverse = match inverse {
            Some(inv) => inv,
            None => signed_permutation_inverse(&list)
                .ok_or_else(|| bad("marking is not a signed permutation; an inverse must be supplied".into()))?,
        };
        let marking = FreeAutomorphism::certify(list, inverse)?;
        Ok(MarkedGraph {
            graph,
            tree: in_tree,
            parent,
            edge_words,
            vertex_groups,
            marking,
            edge_letter,
            vertex_letters,
        })
    }

    /// The rose whose petals are marked by `words` (a free basis).
    pub fn rose(words: &[Word], inverse: Option<Vec<Word>>) -> Result<Self> {
        let alphabet = words.first().ok_or(Error::EmptyGenerators)?.alphabet();
        MarkedGraph::new(
            alphabet,
            FiniteGraph::rose(words.len()),
            &[],
            words.iter().cloned().map(Some).collect(),
            vec![VertexGroup::trivial(alphabet)],
            inverse,
        )
    }

    /// The rose with the identity marking.
    pub fn standard_rose(alphabet: Alphabet) -> Self {
        let words: Vec<Word> = (0..alphabet.rank()).map(|i| Word::generator(alphabet, i)).collect();
        MarkedGraph::rose(&words, None).expect("standard basis")
    }

    /// Two vertices with the given groups joined by one edge.
    pub fn edge_splitting(left: VertexGroup, right: VertexGroup, inverse: Option<Vec<Word>>) -> Result<Self> {
        let alphabet = left
            .generators
            .first()
            .or(right.generators.first())
            .ok_or(Error::EmptyGenerators)?
            .alphabet();
        let graph = FiniteGraph::new(2, vec![(0, 1)])?;
        MarkedGraph::new(alphabet, graph, &[0], vec![None], vec![left, right], inverse)
    }

    /// Theta graph with tree edge 0 and the other two edges marked `u`, `v`.
    pub fn theta(u: &Word, v: &Word, inverse: Option<Vec<Word>>) -> Result<Self> {
        let alphabet = u.alphabet();
        MarkedGraph::new(
            alphabet,
            FiniteGraph::theta(),
            &[0],
            vec![None, Some(u.clone()), Some(v.clone())],
            vec![VertexGroup::trivial(alphabet); 2],
            inverse,
        )
    }

    /// The same graph of groups with marking `θ ∘ marking`.
    pub fn remarked(&self, theta: &FreeAutomorphism) -> Result<Self> {
        let alphabet = self.alphabet();
        alphabet.check(theta.alphabet())?;
        let edge_words = self
            .edge_words
            .iter()
            .map(|w| w.as_ref().map(|w| theta.apply(w)).transpose())
            .collect::<Result<_>>()?;
        let vertex_groups = self
            .vertex_groups
            .iter()
            .map(|g| {
                Ok(VertexGroup {
                    generators: g.ambient().iter().map(|w| theta.apply(w)).collect::<Result<_>>()?,
                    conjugator: Word::identity(alphabet),
                })
            })
            .collect::<Result<_>>()?;
        let inverse = theta
            .inverse_images()
            .iter()
            .map(|w| self.marking.inverse().apply(w))
            .collect::<Result<_>>()?;
        MarkedGraph::new(alphabet, self.graph.clone(), &self.tree_edges(), edge_words, vertex_groups, Some(inverse))
    }

    pub fn alphabet(&self) -> Alphabet {
        self.marking.alphabet()
    }

    pub fn graph(&self) -> &FiniteGraph {
        &self.graph
    }

    pub fn marking(&self) -> &FreeAutomorphism {
        &self.marking
    }

    pub fn vertex_groups(&self) -> &[VertexGroup] {
        &self.vertex_groups
    }

    pub fn tree_edges(&self) -> Vec<usize> {
        (0..self.tree.len()).filter(|&e| self.tree[e]).collect()
    }

    pub fn is_tree_edge(&self, e: usize) -> bool {
        self.tree[e]
    }

    pub fn edge_word(&self, e: usize) -> Option<&Word> {
        self.edge_words[e].as_ref()
    }

    pub fn has_trivial_vertex_groups(&self) -> bool {
        self.vertex_groups.iter().all(|g| g.rank() == 0)
    }

    /// Tree path from vertex 0 to `v`.
    pub fn tree_path(&self, v: usize) -> Vec<Dart> {
        let mut path = Vec::new();
        let mut w = v;
        while let Some(d) = self.parent[w] {
            path.push(d);
            w = self.graph.origin(d);
        }
        path.reverse();
        path
    }

    /// A loop at vertex 0 as a word in the letters of `L`.
    pub fn loop_letters(&self, darts: &[Dart]) -> Word {
        let letters = darts
            .iter()
            .filter_map(|d| self.edge_letter[d.edge].map(|j| Letter::new(j, d.reversed)));
        Word::reduce(self.alphabet(), letters).expect("letter indices below the rank")
    }

    /// A loop at vertex 0 as an element of `F_N`.
    pub fn loop_word(&self, darts: &[Dart]) -> Result<Word> {
        self.marking.apply(&self.loop_letters(darts))
    }

    /// Close a path from 0 to `v` with the tree path back to 0.
    fn closed_from(&self, mut path: Vec<Dart>, v: usize) -> Vec<Dart> {
        path.extend(self.tree_path(v).iter().rev().map(|d| d.rev()));
        path
    }

    /// Generators, in `L`-letters, of the fundamental group of the subgraph
    /// spanned by `vertices` and `edges` (connected), based at 0 through the
    /// tree path to its least vertex.
    fn component_letters(&self, vertices: &[usize], edges: &[usize]) -> (Vec<Word>, Vec<(usize, Word)>) {
        let c = *vertices.iter().min().expect("nonempty component");
        let mut local: Vec<Option<Vec<Dart>>> = vec![None; self.graph.vertex_count()];
        local[c] = Some(Vec::new());
        let mut used = vec![false; self.graph.edge_count()];
        let mut queue = VecDeque::from([c]);
        while let Some(v) = queue.pop_front() {
            for d in self.graph.darts_at(v) {
                let w = self.graph.terminus(d);
                if edges.contains(&d.edge) && local[w].is_none() {
                    used[d.edge] = true;
                    let mut p = local[v].clone().unwrap();
                    p.push(d);
                    local[w] = Some(p);
                    queue.push_back(w);
                }
            }
        }
        let to_c = self.tree_path(c);
        let from_0 = |v: usize| -> Vec<Dart> {
            let mut p = to_c.clone();
            p.extend_from_slice(local[v].as_ref().expect("connected component"));
            p
        };
        let mut gens = Vec::new();
        let mut conjugators = Vec::new();
        for &v in vertices {
            let w = self.loop_letters(&self.closed_from(from_0(v), v));
            for j in self.vertex_letters[v].clone() {
                gens.push(Word::generator(self.alphabet(), j).conjugate_by(&w));
                conjugators.push((j, w.clone()));
            }
        }
        for &e in edges {
            if used[e] {
                continue;
            }
            let d = Dart::forward(e);
            let mut p = from_0(self.graph.origin(d));
            p.push(d);
            let back: Vec<Dart> = from_0(self.graph.terminus(d)).iter().rev().map(|d| d.rev()).collect();
            p.extend(back);
            gens.push(self.loop_letters(&p));
        }
        (gens, conjugators)
    }

    /// Components of the subgraph with the given vertices and edges.
    fn components(&self, vertices: &[usize], edges: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
        let n = self.graph.vertex_count();
        let mut comp = vec![usize::MAX; n];
        let mut out: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        let mut member = vec![false; n];
        for &v in vertices {
            member[v] = true;
        }
        for &e in edges {
            let (u, v) = self.graph.edges()[e];
            member[u] = true;
            member[v] = true;
        }
        for s in 0..n {
            if !member[s] || comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            comp[s] = id;
            let mut vs = vec![s];
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for d in self.graph.darts_at(v) {
                    let w = self.graph.terminus(d);
                    if edges.contains(&d.edge) && comp[w] == usize::MAX {
                        comp[w] = id;
                        vs.push(w);
                        stack.push(w);
                    }
                }
            }
            vs.sort_unstable();
            out.push((vs, Vec::new()));
        }
        for &e in edges {
            let (u, _) = self.graph.edges()[e];
            out[comp[u]].1.push(e);
        }
        out
    }

    /// Conjugacy classes of the nontrivial fundamental groups of the
    /// components of a subgraph.
    fn subgraph_classes(&self, vertices: &[usize], edges: &[usize]) -> Result<Vec<SubgroupConjClass>> {
        let mut out = Vec::new();
        for (vs, es) in self.components(vertices, edges) {
            let (gens, _) = self.component_letters(&vs, &es);
            if gens.is_empty() {
                continue;
            }
            let ambient = gens.iter().map(|g| self.marking.apply(g)).collect::<Result<Vec<_>>>()?;
            out.push(SubgroupConjClass::from_generators(self.alphabet(), &ambient)?);
        }
        Ok(out)
    }

    /// Parse the marked-graph file format; see the crate README.
    pub fn parse(text: &str) -> Result<Self> {
        Ok(parse_marked(text)?.0)
    }

    /// Render in the file format accepted by [`MarkedGraph::parse`].
    pub fn to_file_format(&self) -> String {
        let mut out = format!("rank {}\nV {}\n", self.alphabet().rank(), self.graph.vertex_count());
        for (u, v) in self.graph.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        let tree: Vec<String> = self.tree_edges().iter().map(usize::to_string).collect();
        out.push_str(&format!("tree {}\n", tree.join(" ")).replace("tree \n", "tree\n"));
        for (e, w) in self.edge_words.iter().enumerate() {
            if let Some(w) = w {
                out.push_str(&format!("word {e} {w}\n"));
            }
        }
        for (v, g) in self.vertex_groups.iter().enumerate() {
            if g.rank() > 0 {
                let gens: Vec<String> = g.generators.iter().map(Word::to_string).collect();
                out.push_str(&format!("group {v} {}\n", gens.join(" ")));
                if !g.conjugator.is_empty() {
                    out.push_str(&format!("conj {v} {}\n", g.conjugator));
                }
            }
        }
        for (i, w) in self.marking.inverse_images().iter().enumerate() {
            out.push_str(&format!("inverse {} -> {w}\n", Letter::generator(i).to_char()));
        }
        out
    }
}

fn tree_parents(graph: &FiniteGraph, in_tree: &[bool]) -> Option<Vec<Option<Dart>>> {
    let n = graph.vertex_count();
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        for d in graph.darts_at(v) {
            let w = graph.terminus(d);
            if in_tree[d.edge] && !seen[w] {
                seen[w] = true;
                parent[w] = Some(d);
                queue.push_back(w);
            }
        }
    }
    seen.iter().all(|&s| s).then_some(parent)
}

type MapLines = (Vec<(usize, Vec<Dart>)>, Vec<(usize, usize)>);

fn parse_marked(text: &str) -> Result<(MarkedGraph, MapLines)> {
    let mut rank = None;
    let mut vertices = None;
    let mut edges = Vec::new();
    let mut tree = Vec::new();
    let mut words: Vec<(usize, usize, String)> = Vec::new();
    let mut groups: Vec<(usize, usize, Vec<String>)> = Vec::new();
    let mut conjs: Vec<(usize, usize, String)> = Vec::new();
    let mut inverse: Vec<(usize, String, String)> = Vec::new();
    let mut maps = Vec::new();
    let mut vmaps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let num = |t: &str| t.parse::<usize>().map_err(|_| parse_err(n, format!("bad number {t:?}")));
        match toks[0] {
            "rank" if toks.len() == 2 => rank = Some(num(toks[1])?),
            "V" => vertices = Some(parse_header(n, line)?),
            "tree" => tree = toks[1..].iter().map(|t| num(t)).collect::<Result<_>>()?,
            "word" if toks.len() == 3 => words.push((n, num(toks[1])?, toks[2].to_string())),
            "group" if toks.len() >= 3 => groups.push((n, num(toks[1])?, toks[2..].iter().map(|s| s.to_string()).collect())),
            "conj" if toks.len() == 3 => conjs.push((n, num(toks[1])?, toks[2].to_string())),
            "inverse" => {
                let (lhs, rhs) = line["inverse".len()..]
                    .split_once("->")
                    .ok_or_else(|| parse_err(n, "expected `inverse x -> word`"))?;
                inverse.push((n, lhs.trim().to_string(), rhs.trim().to_string()));
            }
            "map" => {
                let (lhs, rhs) = line["map".len()..]
                    .split_once("->")
                    .ok_or_else(|| parse_err(n, "expected `map e -> darts`"))?;
                let darts = rhs
                    .split_whitespace()
                    .map(|t| t.parse::<Dart>().map_err(|m| parse_err(n, m)))
                    .collect::<Result<_>>()?;
                maps.push((num(lhs.trim())?, darts));
            }
            "vmap" => {
                let (lhs, rhs) = line["vmap".len()..]
                    .split_once("->")
                    .ok_or_else(|| parse_err(n, "expected `vmap v -> w`"))?;
                vmaps.push((num(lhs.trim())?, num(rhs.trim())?));
            }
            _ => edges.push(parse_pair(n, line)?),
        }
    }
    let rank = rank.ok_or_else(|| parse_err(0, "missing `rank N`"))?;
    let alphabet = Alphabet::new(rank)?;
    let nv = vertices.ok_or_else(|| parse_err(0, "missing `V n`"))?;
    let graph = FiniteGraph::new(nv, edges)?;
    let word = |n: usize, s: &str| Word::parse(alphabet, s).map_err(|e| parse_err(n, e.to_string()));
    let mut edge_words = vec![None; graph.edge_count()];
    for (n, e, w) in words {
        *edge_words.get_mut(e).ok_or_else(|| parse_err(n, format!("no edge {e}")))? = Some(word(n, &w)?);
    }
    let mut vertex_groups = vec![VertexGroup::trivial(alphabet); nv];
    for (n, v, gens) in groups {
        let g = vertex_groups.get_mut(v).ok_or_else(|| parse_err(n, format!("no vertex {v}")))?;
        g.generators = gens.iter().map(|s| word(n, s)).collect::<Result<_>>()?;
    }
    for (n, v, c) in conjs {
        let g = vertex_groups.get_mut(v).ok_or_else(|| parse_err(n, format!("no vertex {v}")))?;
        g.conjugator = word(n, &c)?;
    }
    let inverse = if inverse.is_empty() {
        None
    } else {
        let mut images = vec![None; rank];
        for (n, lhs, rhs) in inverse {
            let l = lhs
                .chars()
                .next()
                .and_then(Letter::from_char)
                .filter(|l| lhs.len() == 1 && !l.is_inverse() && l.index() < rank)
                .ok_or_else(|| parse_err(n, format!("bad basis letter {lhs:?}")))?;
            images[l.index()] = Some(word(n, &rhs)?);
        }
        Some(
            images
                .into_iter()
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| parse_err(0, "inverse must list every basis letter"))?,
        )
    };
    let marked = MarkedGraph::new(alphabet, graph, &tree, edge_words, vertex_groups, inverse)?;
    Ok((marked, (maps, vmaps)))
}

// ---------------------------------------------------------------------------
// Graph maps

/// A graph map `X → X` sending vertices to vertices and edges to edge paths.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphMapRep {
    domain: MarkedGraph,
    vertex_images: Vec<usize>,
    edge_images: Vec<EdgePath>,
}

impl GraphMapRep {
    pub fn new(domain: MarkedGraph, vertex_images: Vec<usize>, edge_images: Vec<EdgePath>) -> Result<Self> {
        let g = domain.graph();
        if vertex_images.len() != g.vertex_count() || edge_images.len() != g.edge_count() {
            return Err(Error::InvalidMap("one image per vertex and per edge required".into()));
        }
        if vertex_images.iter().any(|&v| v >= g.vertex_count()) {
            return Err(Error::InvalidMap("vertex image out of range".into()));
        }
        for (e, p) in edge_images.iter().enumerate() {
            p.check(g).map_err(|_| Error::InvalidMap(format!("image of edge {e} is not an edge path")))?;
            let d = Dart::forward(e);
            if p.start != vertex_images[g.origin(d)] || p.end(g) != vertex_images[g.terminus(d)] {
                return Err(Error::InvalidMap(format!("image of edge {e} has the wrong endpoints")));
            }
        }
        Ok(GraphMapRep {
            domain,
            vertex_images,
            edge_images,
        })
    }

    /// Build from dart lists; vertex images are read off the paths, and
    /// must be supplied in `vertex_hints` for vertices meeting only
    /// degenerate images.
    pub fn from_darts(domain: MarkedGraph, images: Vec<Vec<Dart>>, vertex_hints: &[(usize, usize)]) -> Result<Self> {
        let g = domain.graph().clone();
        let mut vmap: Vec<Option<usize>> = vec![None; g.vertex_count()];
        for &(v, w) in vertex_hints {
            *vmap.get_mut(v).ok_or_else(|| Error::InvalidMap(format!("no vertex {v}")))? = Some(w);
        }
        for (e, darts) in images.iter().enumerate() {
            if let (Some(first), Some(last)) = (darts.first(), darts.last()) {
                let d = Dart::forward(e);
                if first.edge >= g.edge_count() || last.edge >= g.edge_count() {
                    return Err(Error::InvalidMap(format!("image of edge {e} uses an unknown edge")));
                }
                vmap[g.origin(d)].get_or_insert(g.origin(*first));
                vmap[g.terminus(d)].get_or_insert(g.terminus(*last));
            }
        }
        let vertex_images = vmap
            .into_iter()
            .enumerate()
            .map(|(v, w)| w.ok_or_else(|| Error::InvalidMap(format!("image of vertex {v} is undetermined"))))
            .collect::<Result<Vec<_>>>()?;
        let edge_images = images
            .into_iter()
            .enumerate()
            .map(|(e, darts)| EdgePath {
                start: vertex_images[g.origin(Dart::forward(e))],
                darts,
            })
            .collect();
        GraphMapRep::new(domain, vertex_images, edge_images)
    }

    /// Rose map from image words over the petal letters, e.g. `["ab", "a"]`.
    pub fn rose_map(domain: MarkedGraph, images: &[&str]) -> Result<Self> {
        let alphabet = Alphabet::new(domain.graph().edge_count())?;
        let mut out = Vec::new();
        for s in images {
            let w = Word::parse(alphabet, s)?;
            out.push(w.letters().iter().map(|l| Dart::new(l.index(), l.is_inverse())).collect());
        }
        GraphMapRep::from_darts(domain, out, &[(0, 0)])
    }

    pub fn domain(&self) -> &MarkedGraph {
        &self.domain
    }

    pub fn graph(&self) -> &FiniteGraph {
        self.domain.graph()
    }

    pub fn vertex_images(&self) -> &[usize] {
        &self.vertex_images
    }

    pub fn edge_images(&self) -> &[EdgePath] {
        &self.edge_images
    }

    pub fn image(&self, e: usize) -> &EdgePath {
        &self.edge_images[e]
    }

    /// Image of a dart (reversing the path for reversed darts).
    pub fn dart_image(&self, d: Dart) -> Vec<Dart> {
        let p = &self.edge_images[d.edge];
        if d.reversed {
            p.darts.iter().rev().map(|x| x.rev()).collect()
        } else {
            p.darts.clone()
        }
    }

    /// Image of a path, untightened.
    pub fn apply(&self, p: &EdgePath) -> EdgePath {
        EdgePath {
            start: self.vertex_images[p.start],
            darts: p.darts.iter().flat_map(|&d| self.dart_image(d)).collect(),
        }
    }

    pub fn is_tight(&self) -> bool {
        self.edge_images.iter().all(EdgePath::is_tight)
    }

    /// Every edge image tight and nonempty.
    pub fn require_tight(&self) -> Result<()> {
        for (e, p) in self.edge_images.iter().enumerate() {
            if !p.is_tight() {
                return Err(Error::NotTight(e));
            }
            if p.is_empty() {
                return Err(Error::DegenerateImage(e));
            }
        }
        Ok(())
    }

    pub fn tightened(&self) -> Result<GraphMapRep> {
        let g = self.graph();
        let edge_images = self.edge_images.iter().map(|p| p.tighten(g)).collect::<Result<_>>()?;
        Ok(GraphMapRep {
            domain: self.domain.clone(),
            vertex_images: self.vertex_images.clone(),
            edge_images,
        })
    }

    /// `self ∘ other` (apply `other` first), untightened.
    pub fn compose(&self, other: &GraphMapRep) -> GraphMapRep {
        GraphMapRep {
            domain: self.domain.clone(),
            vertex_images: other.vertex_images.iter().map(|&v| self.vertex_images[v]).collect(),
            edge_images: other.edge_images.iter().map(|p| self.apply(p)).collect(),
        }
    }

    /// Parse a marked-graph section followed by `map e -> darts` lines and
    /// optional `vmap v -> w` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let (domain, (maps, vmaps)) = parse_marked(text)?;
        let mut images = vec![None; domain.graph().edge_count()];
        for (e, darts) in maps {
            *images
                .get_mut(e)
                .ok_or_else(|| Error::InvalidMap(format!("no edge {e}")))? = Some(darts);
        }
        let images = images
            .into_iter()
            .enumerate()
            .map(|(e, d)| d.ok_or_else(|| Error::InvalidMap(format!("missing image of edge {e}"))))
            .collect::<Result<_>>()?;
        GraphMapRep::from_darts(domain, images, &vmaps)
    }

    pub fn to_file_format(&self) -> String {
        let mut out = self.domain.to_file_format();
        for (e, p) in self.edge_images.iter().enumerate() {
            let ds: Vec<String> = p.darts.iter().map(Dart::to_string).collect();
            out.push_str(&format!("map {e} -> {}\n", ds.join(" ")));
        }
        for (v, w) in self.vertex_images.iter().enumerate() {
            out.push_str(&format!("vmap {v} -> {w}\n"));
        }
        out
    }
}

/// Action on `π_1` in `L`-letters of a map fixing nothing in particular:
/// each basis loop is pushed forward and returned to vertex 0 along the
/// tree path to the image of vertex 0.
fn letter_action(x: &MarkedGraph, vertex0: usize, push: impl Fn(Dart) -> Vec<Dart>) -> Result<Vec<Word>> {
    if !x.has_trivial_vertex_groups() {
        return Err(Error::InvalidMarking("the action on π_1 needs trivial vertex groups".into()));
    }
    let gamma = x.tree_path(vertex0);
    let mut images = vec![Word::identity(x.alphabet()); x.alphabet().rank()];
    for e in 0..x.graph.edge_count() {
        let Some(j) = x.edge_letter[e] else { continue };
        let d = Dart::forward(e);
        let mut l = x.tree_path(x.graph.origin(d));
        l.push(d);
        let l = x.closed_from(l, x.graph.terminus(d));
        let mut p = gamma.clone();
        p.extend(l.into_iter().flat_map(&push));
        p.extend(gamma.iter().rev().map(|d| d.rev()));
        images[j] = x.loop_letters(&p);
    }
    Ok(images)
}

/// Conjugate a letter action back to `F_N`: `θ ∘ λ ∘ θ⁻¹`.
fn to_ambient(x: &MarkedGraph, lambda: &[Word]) -> Result<Vec<Word>> {
    let ambient: Vec<Word> = lambda.iter().map(|w| x.marking.apply(w)).collect::<Result<_>>()?;
    x.marking.inverse_images().iter().map(|w| w.substitute(&ambient)).collect()
}

/// Given `forward` and a claimed inverse up to inner automorphisms, return
/// the certified automorphism.
fn certify_up_to_inner(forward: Vec<Word>, claimed_inverse: &[Word]) -> Result<FreeAutomorphism> {
    let composite: Vec<Word> = forward.iter().map(|w| apply_endo(claimed_inverse, w)).collect::<Result<_>>()?;
    let s = inner_conjugator(&composite)
        .ok_or_else(|| Error::VerificationFailed("supplied inverse does not invert the map up to inner automorphisms".into()))?;
    let s_inv = s.inverse();
    let backward = claimed_inverse.iter().map(|w| w.conjugate_by(&s_inv)).collect();
    FreeAutomorphism::certify(forward, backward)
}

/// The automorphism of `F_N` induced by a graph automorphism of a marked
/// graph with trivial vertex groups.
pub fn realized_automorphism(x: &MarkedGraph, h: &GraphAutomorphism) -> Result<FreeAutomorphism> {
    let inv = h.inverse();
    let fwd = letter_action(x, h.vertex(0), |d| vec![h.dart(d)])?;
    let bwd = letter_action(x, inv.vertex(0), |d| vec![inv.dart(d)])?;
    certify_up_to_inner(to_ambient(x, &fwd)?, &to_ambient(x, &bwd)?)
}

/// Outer class of a homotopy equivalence; `inverse` gives images of a
/// homotopy inverse on the basis of `F_N`, up to an inner automorphism.
pub fn induced_outer(f: &GraphMapRep, inverse: &[Word]) -> Result<OuterClass> {
    let x = f.domain();
    let lambda = letter_action(x, f.vertex_images[0], |d| f.dart_image(d))?;
    Ok(OuterClass::new(certify_up_to_inner(to_ambient(x, &lambda)?, inverse)?))
}

// ---------------------------------------------------------------------------
// Invariance

/// How invariance of a splitting is decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InvarianceRoute {
    /// Compare `φ` with the automorphism realized by each graph symmetry.
    Marking,
    /// Compare the vertex classes and the free factor systems of all
    /// one-edge collapses.
    Collapse,
}

/// Precomputed data for repeated invariance queries on one marked graph.
pub struct Realizer {
    route: InvarianceRoute,
    candidates: Vec<(GraphAutomorphism, Option<FreeAutomorphism>)>,
    vertex_classes: Vec<SubgroupConjClass>,
    edge_classes: Vec<Vec<SubgroupConjClass>>,
    alphabet: Alphabet,
}

impl Realizer {
    pub fn new(x: &MarkedGraph, route: InvarianceRoute) -> Result<Self> {
        let auts = enumerate_automorphisms(x.graph())?;
        let rank = |v: usize| x.vertex_groups[v].rank();
        let compatible = auts.into_iter().filter(|h| (0..x.graph.vertex_count()).all(|v| rank(v) == rank(h.vertex(v))));
        let mut candidates = Vec::new();
        for h in compatible {
            let phi_h = match route {
                InvarianceRoute::Marking => Some(realized_automorphism(x, &h)?),
                InvarianceRoute::Collapse => None,
            };
            candidates.push((h, phi_h));
        }
        let alphabet = x.alphabet();
        let vertex_classes = x
            .vertex_groups
            .iter()
            .map(|g| SubgroupConjClass::from_generators(alphabet, &g.ambient()))
            .collect::<Result<_>>()?;
        let all: Vec<usize> = (0..x.graph.vertex_count()).collect();
        let edge_classes = (0..x.graph.edge_count())
            .map(|e| {
                let rest: Vec<usize> = (0..x.graph.edge_count()).filter(|&f| f != e).collect();
                x.subgraph_classes(&all, &rest)
            })
            .collect::<Result<_>>()?;
        Ok(Realizer {
            route,
            candidates,
            vertex_classes,
            edge_classes,
            alphabet,
        })
    }

    /// The default route: exact marking comparison when every vertex group
    /// is trivial, one-edge collapses otherwise.
    pub fn for_graph(x: &MarkedGraph) -> Result<Self> {
        let route = if x.has_trivial_vertex_groups() {
            InvarianceRoute::Marking
        } else {
            InvarianceRoute::Collapse
        };
        Realizer::new(x, route)
    }

    pub fn route(&self) -> InvarianceRoute {
        self.route
    }

    /// A graph automorphism realizing `φ`, or `None` (the splitting is not
    /// `φ`-invariant). With the collapse route, `None` may also mean the
    /// images exceeded `length_cap`; see [`Realizer::find_bounded`].
    pub fn find(&self, phi: &FreeAutomorphism) -> Result<Option<GraphAutomorphism>> {
        Ok(self.find_bounded(phi, usize::MAX)?.flatten())
    }

    /// Outer `None` signals that images exceeded `length_cap`.
    pub fn find_bounded(&self, phi: &FreeAutomorphism, length_cap: usize) -> Result<Option<Option<GraphAutomorphism>>> {
        self.alphabet.check(phi.alphabet())?;
        match self.route {
            InvarianceRoute::Marking => {
                let ab = abelianization(phi);
                for (h, phi_h) in &self.candidates {
                    let phi_h = phi_h.as_ref().expect("marking route");
                    if abelianization(phi_h) == ab && phi.outer_eq(phi_h)? {
                        return Ok(Some(Some(h.clone())));
                    }
                }
                Ok(Some(None))
            }
            InvarianceRoute::Collapse => {
                let image = |cs: &[SubgroupConjClass]| -> Result<Option<Vec<SubgroupConjClass>>> {
                    let mut out = Vec::new();
                    for c in cs {
                        match image_class_bounded(phi, c, length_cap)? {
                            Some(i) => out.push(i),
                            None => return Ok(None),
                        }
                    }
                    Ok(Some(out))
                };
                let Some(vimg) = image(&self.vertex_classes)? else {
                    return Ok(None);
                };
                let mut eimg = Vec::new();
                for cs in &self.edge_classes {
                    match image(cs)? {
                        Some(i) => eimg.push(i),
                        None => return Ok(None),
                    }
                }
                for (h, _) in &self.candidates {
                    let vertices_ok = vimg.iter().enumerate().all(|(v, c)| *c == self.vertex_classes[h.vertex(v)]);
                    let edges_ok = vertices_ok
                        && eimg
                            .iter()
                            .enumerate()
                            .all(|(e, cs)| same_set(cs, &self.edge_classes[h.dart(Dart::forward(e)).edge]));
                    if edges_ok {
                        return Ok(Some(Some(h.clone())));
                    }
                }
                Ok(Some(None))
            }
        }
    }
}

fn same_set(a: &[SubgroupConjClass], b: &[SubgroupConjClass]) -> bool {
    a.len() == b.len() && {
        let mut used = vec![false; b.len()];
        a.iter().all(|x| match (0..b.len()).find(|&j| !used[j] && b[j] == *x) {
            Some(j) => {
                used[j] = true;
                true
            }
            None => false,
        })
    }
}

/// A graph automorphism of `X` realizing `φ` (any representative of the
/// outer class), or `None` when `X` is not `φ`-invariant.
pub fn invariance_test(x: &MarkedGraph, phi: &FreeAutomorphism) -> Result<Option<GraphAutomorphism>> {
    Realizer::for_graph(x)?.find(phi)
}

/// Least `p ≤ max_iter` with `X` invariant under `φ^p`.
pub fn splitting_orbit_period(x: &MarkedGraph, phi: &FreeAutomorphism, max_iter: usize, length_cap: usize) -> Result<OrbitOutcome> {
    if max_iter == 0 {
        return Err(Error::Config("max_iter must be at least 1".into()));
    }
    let realizer = Realizer::for_graph(x)?;
    let mut power = phi.clone();
    for p in 1..=max_iter {
        match realizer.find_bounded(&power, length_cap)? {
            None => return Ok(OrbitOutcome::Blowup(length_cap)),
            Some(Some(_)) => return Ok(OrbitOutcome::Period(p)),
            Some(None) => {}
        }
        if p < max_iter {
            match phi.compose_bounded(&power, length_cap)? {
                Some(next) => power = next,
                None => return Ok(OrbitOutcome::Blowup(length_cap)),
            }
        }
    }
    Ok(OrbitOutcome::NoPeriodWithin(max_iter))
}

// ---------------------------------------------------------------------------
// Free factor systems, homology, twists, suspensions

/// A subforest given by its edges plus any isolated vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subforest {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

/// Free factor system of the fundamental groups of the subforest's
/// components, with witness `θ ∘ π` where `π` conjugates each vertex
/// group's letters into place.
pub fn induced_ffs(x: &MarkedGraph, forest: &Subforest) -> Result<FreeFactorSystem> {
    let g = x.graph();
    if let Some(&e) = forest.edges.iter().find(|&&e| e >= g.edge_count()) {
        return Err(Error::InvalidGraph(format!("no edge {e}")));
    }
    let comps = x.components(&forest.vertices, &forest.edges);
    let nv: usize = comps.iter().map(|c| c.0.len()).sum();
    if nv != comps.len() + forest.edges.len() {
        return Err(Error::InvalidGraph("subforest contains a cycle".into()));
    }
    let covered: Vec<usize> = comps.iter().flat_map(|c| c.0.clone()).collect();
    if let Some(v) = (0..g.vertex_count()).find(|&v| x.vertex_groups[v].rank() > 0 && !covered.contains(&v)) {
        return Err(Error::SubforestMissesVertex(v));
    }
    let alphabet = x.alphabet();
    let mut forward: Vec<Word> = (0..alphabet.rank()).map(|i| Word::generator(alphabet, i)).collect();
    let mut backward = forward.clone();
    let mut blocks = Vec::new();
    for (vs, es) in &comps {
        let (_, conjugators) = x.component_letters(vs, es);
        if conjugators.is_empty() {
            continue;
        }
        let mut block = Vec::new();
        for (j, w) in conjugators {
            forward[j] = forward[j].conjugate_by(&w);
            backward[j] = backward[j].conjugate_by(&w.inverse());
            block.push(j);
        }
        blocks.push(block);
    }
    let pi = FreeAutomorphism::certify(forward, backward)?;
    FreeFactorSystem::from_witness(x.marking.compose(&pi)?, blocks)
}

/// Span mod 3 of the abelianized vertex group generators.
pub fn vertex_homology_image(x: &MarkedGraph, v: usize) -> Result<Mod3Subspace> {
    let n = x.alphabet().rank();
    let g = x
        .vertex_groups
        .get(v)
        .ok_or(Error::IndexOutOfRange { index: v, rank: x.graph.vertex_count() })?;
    let vecs: Vec<Vec<i64>> = g.ambient().iter().map(Word::exponent_vector).collect();
    Ok(Mod3Subspace::span(n, &vecs))
}

/// One factor `G_v^{n_v} / Z(G_v)` of the group of twists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistFactor {
    pub vertex: usize,
    pub rank: usize,
    pub valence: usize,
    pub center_rank: usize,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistDescriptor {
    pub factors: Vec<TwistFactor>,
}

impl TwistDescriptor {
    pub fn is_trivial(&self) -> bool {
        self.factors.iter().all(|f| f.description == "1")
    }
}

impl fmt::Display for TwistDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self
            .factors
            .iter()
            .map(|t| t.description.as_str())
            .filter(|d| *d != "1")
            .collect();
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join(" × "))
        }
    }
}

fn power(base: &str, k: usize) -> String {
    match k {
        0 => "1".into(),
        1 => base.into(),
        _ => format!("{base}^{k}"),
    }
}

/// `∏_v G_v^{n_v} / Z(G_v)`: rank one contributes `Z^{n_v − 1}`, rank
/// `r ≥ 2` contributes `F_r^{n_v}`, trivial groups contribute nothing.
pub fn twist_descriptor(x: &MarkedGraph) -> TwistDescriptor {
    let factors = x
        .vertex_groups
        .iter()
        .enumerate()
        .map(|(v, g)| {
            let rank = g.rank();
            let valence = x.graph.valence(v);
            let (center_rank, description) = match rank {
                0 => (0, "1".to_string()),
                1 => (1, power("Z", valence.saturating_sub(1))),
                r => (0, power(&format!("F_{r}"), valence)),
            };
            TwistFactor {
                vertex: v,
                rank,
                valence,
                center_rank,
                description,
            }
        })
        .collect();
    TwistDescriptor { factors }
}

fn stable_letter(rank: usize) -> String {
    if rank < 20 {
        "t".into()
    } else if rank < 26 {
        Letter::generator(rank).to_char().to_string()
    } else {
        "stable".into()
    }
}

fn superscript(w: &Word) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.letters()
        .iter()
        .map(|l| {
            let c = Letter::generator(l.index()).to_char();
            if l.is_inverse() {
                format!("{c}⁻¹")
            } else {
                c.to_string()
            }
        })
        .collect()
}

/// `⟨x_1, …, x_N, t | t x_i t⁻¹ = φ(x_i)⟩`.
pub fn suspension_presentation(phi: &FreeAutomorphism) -> String {
    let t = stable_letter(phi.rank());
    let mut gens: Vec<String> = (0..phi.rank()).map(|i| Letter::generator(i).to_char().to_string()).collect();
    let rels: Vec<String> = phi
        .images()
        .iter()
        .enumerate()
        .map(|(i, w)| format!("{t}{}{t}⁻¹={}", Letter::generator(i).to_char(), superscript(w)))
        .collect();
    gens.push(t);
    format!("⟨{} | {}⟩", gens.join(","), rels.join(", "))
}

/// The same presentation as GAP input.
pub fn suspension_gap(phi: &FreeAutomorphism) -> String {
    let t = stable_letter(phi.rank());
    let names: Vec<String> = (0..phi.rank()).map(|i| Letter::generator(i).to_char().to_string()).collect();
    let mut quoted: Vec<String> = names.iter().map(|n| format!("\"{n}\"")).collect();
    quoted.push(format!("\"{t}\""));
    let mut out = format!("F := FreeGroup({});;\n", quoted.join(", "));
    for (i, n) in names.iter().chain(std::iter::once(&t)).enumerate() {
        out.push_str(&format!("{n} := F.{};;\n", i + 1));
    }
    let gap_word = |w: &Word| -> String {
        if w.is_empty() {
            return "One(F)".into();
        }
        let parts: Vec<String> = w
            .letters()
            .iter()
            .map(|l| {
                let c = Letter::generator(l.index()).to_char();
                if l.is_inverse() {
                    format!("{c}^-1")
                } else {
                    c.to_string()
                }
            })
            .collect();
        parts.join("*")
    };
    let rels: Vec<String> = phi
        .images()
        .iter()
        .enumerate()
        .map(|(i, w)| format!("{t}*{}*{t}^-1*({})^-1", names[i], gap_word(w)))
        .collect();
    out.push_str(&format!("G := F / [ {} ];\n", rels.join(", ")));
    out
}
