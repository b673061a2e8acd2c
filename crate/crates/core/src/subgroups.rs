//! Stallings cores of finitely generated subgroups of `F_N`, conjugacy
//! classes of subgroups, free factor systems and orbit periods under
//! automorphisms.

use std::collections::VecDeque;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::aut::FreeAutomorphism;
use crate::error::{Error, Result};
use crate::homology::{integer_kernel, Sublattice};
use crate::words::{cyclic_reduce, words_up_to, Alphabet, CyclicWord, Letter, Word};

/// Default cap on total core edges (or word length) before an orbit is
/// declared a blowup.
pub const DEFAULT_LENGTH_CAP: usize = 10_000;
pub const DEFAULT_MAX_ITER: usize = 12;

/// A folded labeled graph. `slots[v][l.key()]` is the vertex reached from
/// `v` by reading letter `l`. Vertices are numbered in canonical BFS order
/// from the basepoint `0`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StallingsCore {
    alphabet: Alphabet,
    slots: Vec<Vec<Option<usize>>>,
}

struct Folder {
    parent: Vec<usize>,
    slots: Vec<Vec<Option<usize>>>,
    pending: Vec<(usize, usize)>,
}

impl Folder {
    fn new(width: usize) -> Self {
        Folder {
            parent: vec![0],
            slots: vec![vec![None; width]],
            pending: Vec::new(),
        }
    }

    fn vertex(&mut self) -> usize {
        let v = self.parent.len();
        self.parent.push(v);
        let width = self.slots[0].len();
        self.slots.push(vec![None; width]);
        v
    }

    fn find(&mut self, v: usize) -> usize {
        let mut r = v;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut x = v;
        while self.parent[x] != r {
            let next = self.parent[x];
            self.parent[x] = r;
            x = next;
        }
        r
    }

    fn set(&mut self, u: usize, slot: usize, v: usize) {
        match self.slots[u][slot] {
            None => self.slots[u][slot] = Some(v),
            Some(w) => {
                if self.find(w) != self.find(v) {
                    self.pending.push((w, v));
                }
            }
        }
    }

    fn edge(&mut self, u: usize, l: Letter, v: usize) {
        let (u, v) = (self.find(u), self.find(v));
        self.set(u, l.key(), v);
        self.set(v, l.inverse().key(), u);
        self.settle();
    }

    fn settle(&mut self) {
        while let Some((x, y)) = self.pending.pop() {
            let (x, y) = (self.find(x), self.find(y));
            if x == y {
                continue;
            }
            // Keep the basepoint as a representative.
            let (keep, gone) = if y == 0 { (y, x) } else { (x, y) };
            self.parent[gone] = keep;
            let moved = std::mem::take(&mut self.slots[gone]);
            for (s, t) in moved.into_iter().enumerate() {
                if let Some(t) = t {
                    self.set(keep, s, t);
                }
            }
        }
    }

    fn finish(mut self, alphabet: Alphabet, prune_base: bool) -> StallingsCore {
        let n = self.parent.len();
        let width = 2 * alphabet.rank();
        let mut slots = vec![vec![None; width]; n];
        let mut alive = vec![false; n];
        for v in 0..n {
            if self.find(v) == v {
                alive[v] = true;
                for s in 0..width {
                    if let Some(t) = self.slots[v][s] {
                        slots[v][s] = Some(self.find(t));
                    }
                }
            }
        }
        prune(&mut slots, &mut alive, if prune_base { None } else { Some(0) });
        let root = if prune_base { (0..n).find(|&v| alive[v]) } else { Some(0) };
        let Some(root) = root else {
            return StallingsCore {
                alphabet,
                slots: vec![vec![None; width]],
            };
        };
        StallingsCore {
            alphabet,
            slots: relabel(&slots, root),
        }
    }
}

/// Remove valence ≤ 1 vertices other than `keep` until none remain.
fn prune(slots: &mut [Vec<Option<usize>>], alive: &mut [bool], keep: Option<usize>) {
    let valence = |slots: &[Vec<Option<usize>>], v: usize| slots[v].iter().filter(|s| s.is_some()).count();
    let mut queue: Vec<usize> = (0..slots.len()).filter(|&v| alive[v]).collect();
    while let Some(v) = queue.pop() {
        if !alive[v] || Some(v) == keep || valence(slots, v) > 1 {
            continue;
        }
        alive[v] = false;
        for s in 0..slots[v].len() {
            if let Some(t) = slots[v][s].take() {
                let back = Letter::from_key(s).inverse().key();
                slots[t][back] = None;
                queue.push(t);
            }
        }
    }
}

/// BFS renumbering from `root`, reading slots in letter order.
fn relabel(slots: &[Vec<Option<usize>>], root: usize) -> Vec<Vec<Option<usize>>> {
    let mut index = vec![usize::MAX; slots.len()];
    let mut order = vec![root];
    index[root] = 0;
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        for t in slots[v].iter().flatten() {
            if index[*t] == usize::MAX {
                index[*t] = order.len();
                order.push(*t);
            }
        }
        i += 1;
    }
    order
        .iter()
        .map(|&v| slots[v].iter().map(|s| s.map(|t| index[t])).collect())
        .collect()
}

impl StallingsCore {
    /// Fold the wedge of generator loops; the result depends only on the
    /// subgroup generated.
    pub fn fold(alphabet: Alphabet, generators: &[Word]) -> Result<Self> {
        Self::fold_in_order(alphabet, generators, &mut |_| 0)
    }

    /// As [`StallingsCore::fold`], processing pending identifications in an
    /// order chosen by `pick` (used to test confluence).
    pub fn fold_in_order(alphabet: Alphabet, generators: &[Word], pick: &mut dyn FnMut(usize) -> usize) -> Result<Self> {
        let mut f = Folder::new(2 * alphabet.rank());
        let mut raw = Vec::new();
        for g in generators {
            alphabet.check(g.alphabet())?;
            if g.is_empty() {
                continue;
            }
            let mut at = 0;
            for (i, &l) in g.letters().iter().enumerate() {
                let next = if i + 1 == g.len() { 0 } else { f.vertex() };
                raw.push((at, l, next));
                at = next;
            }
        }
        while !raw.is_empty() {
            let i = pick(raw.len()) % raw.len();
            let (u, l, v) = raw.swap_remove(i);
            f.edge(u, l, v);
        }
        Ok(f.finish(alphabet, false))
    }

    pub fn trivial(alphabet: Alphabet) -> Self {
        StallingsCore {
            alphabet,
            slots: vec![vec![None; 2 * alphabet.rank()]],
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn vertex_count(&self) -> usize {
        self.slots.len()
    }

    pub fn edge_count(&self) -> usize {
        self.slots.iter().map(|s| s.iter().step_by(2).flatten().count()).sum()
    }

    /// Labeled edges `(u, x_i, v)` with positive labels.
    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (u, s) in self.slots.iter().enumerate() {
            for i in 0..self.alphabet.rank() {
                if let Some(v) = s[2 * i] {
                    out.push((u, i, v));
                }
            }
        }
        out
    }

    /// Rank of the subgroup.
    pub fn rank(&self) -> usize {
        self.edge_count() + 1 - self.vertex_count()
    }

    pub fn is_trivial(&self) -> bool {
        self.edge_count() == 0
    }

    /// Endpoint of reading `w` from `start`, if defined.
    pub fn read(&self, start: usize, w: &Word) -> Option<usize> {
        w.letters().iter().try_fold(start, |v, l| self.slots[v][l.key()])
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.read(0, w) == Some(0)
    }

    /// Free basis read off a BFS spanning tree: one generator per non-tree
    /// edge.
    pub fn basis(&self) -> Vec<Word> {
        self.basis_at(0)
    }

    fn tree_paths(&self, root: usize) -> Vec<Vec<Letter>> {
        let mut path: Vec<Option<Vec<Letter>>> = vec![None; self.slots.len()];
        path[root] = Some(Vec::new());
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for (s, t) in self.slots[v].iter().enumerate() {
                if let Some(t) = *t {
                    if path[t].is_none() {
                        let mut p = path[v].clone().unwrap();
                        p.push(Letter::from_key(s));
                        path[t] = Some(p);
                        queue.push_back(t);
                    }
                }
            }
        }
        path.into_iter().map(Option::unwrap_or_default).collect()
    }

    fn basis_at(&self, root: usize) -> Vec<Word> {
        let paths = self.tree_paths(root);
        let mut out = Vec::new();
        for (u, i, v) in self.edges() {
            let l = Letter::generator(i);
            let tree_edge = |a: usize, b: usize, l: Letter| paths[b].len() == paths[a].len() + 1 && paths[b].last() == Some(&l) && paths[b][..paths[a].len()] == paths[a][..];
            if tree_edge(u, v, l) || tree_edge(v, u, l.inverse()) {
                continue;
            }
            let raw = paths[u]
                .iter()
                .copied()
                .chain(std::iter::once(l))
                .chain(paths[v].iter().rev().map(|x| x.inverse()));
            out.push(Word::reduce(self.alphabet, raw).expect("letters from this alphabet"));
        }
        out
    }

    /// The label of the shortest path from the basepoint to `v`.
    pub fn path_to(&self, v: usize) -> Word {
        Word::reduce(self.alphabet, self.tree_paths(0)[v].iter().copied()).expect("same alphabet")
    }

    fn valence(&self, v: usize) -> usize {
        self.slots[v].iter().flatten().count()
    }
}

impl fmt::Debug for StallingsCore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let es: Vec<String> = self
            .edges()
            .into_iter()
            .map(|(u, i, v)| format!("{u}-{}->{v}", Letter::generator(i).to_char()))
            .collect();
        write!(f, "Core[{}]", es.join(", "))
    }
}

/// Fold the core of a subgroup.
pub fn fold_core(alphabet: Alphabet, generators: &[Word]) -> Result<StallingsCore> {
    StallingsCore::fold(alphabet, generators)
}

pub fn membership(w: &Word, h: &StallingsCore) -> bool {
    h.contains(w)
}

// ---------------------------------------------------------------------------
// Conjugacy classes

/// The conjugacy class of a subgroup, represented by its cyclic core (the
/// core with hair at the basepoint removed), numbered from vertex 0. Equality
/// is label-preserving isomorphism of cyclic cores.
#[derive(Clone, Serialize, Deserialize)]
pub struct SubgroupConjClass {
    core: StallingsCore,
}

impl SubgroupConjClass {
    pub fn of(core: &StallingsCore) -> Self {
        let mut f = Folder::new(2 * core.alphabet.rank());
        f.parent = (0..core.slots.len()).collect();
        f.slots = core.slots.clone();
        SubgroupConjClass {
            core: f.finish(core.alphabet, true),
        }
    }

    pub fn from_generators(alphabet: Alphabet, generators: &[Word]) -> Result<Self> {
        Ok(SubgroupConjClass::of(&fold_core(alphabet, generators)?))
    }

    pub fn alphabet(&self) -> Alphabet {
        self.core.alphabet
    }

    /// The cyclic core, based at one of its own vertices.
    pub fn core(&self) -> &StallingsCore {
        &self.core
    }

    pub fn rank(&self) -> usize {
        self.core.rank()
    }

    pub fn edge_count(&self) -> usize {
        self.core.edge_count()
    }

    /// Generators of a representative subgroup.
    pub fn generators(&self) -> Vec<Word> {
        self.core.basis()
    }

    /// Lexicographically least BFS encoding over all roots; quadratic, for
    /// display and small tests.
    pub fn canonical(&self) -> StallingsCore {
        (0..self.core.vertex_count())
            .map(|r| StallingsCore {
                alphabet: self.core.alphabet,
                slots: relabel(&self.core.slots, r),
            })
            .min_by(|a, b| a.slots.cmp(&b.slots))
            .expect("cores have a vertex")
    }

    /// Abelianized span over `Q`, as a saturated lattice.
    pub fn homology_support(&self) -> Result<Sublattice> {
        let gens: Vec<Vec<i64>> = self.generators().iter().map(Word::exponent_vector).collect();
        Sublattice::from_generators(self.alphabet().rank(), &gens)?.saturation()
    }
}

/// A label-preserving map `from → to` sending `from`'s vertex 0 to `target`.
fn morphism_from(from: &StallingsCore, to: &StallingsCore, target: usize, bijective: bool) -> bool {
    let mut map = vec![usize::MAX; from.slots.len()];
    let mut hit = vec![false; to.slots.len()];
    map[0] = target;
    hit[target] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        let w = map[v];
        for (s, t) in from.slots[v].iter().enumerate() {
            let Some(t) = *t else {
                if bijective && to.slots[w][s].is_some() {
                    return false;
                }
                continue;
            };
            let Some(u) = to.slots[w][s] else {
                return false;
            };
            if map[t] == usize::MAX {
                if bijective && hit[u] {
                    return false;
                }
                map[t] = u;
                hit[u] = true;
                queue.push_back(t);
            } else if map[t] != u {
                return false;
            }
        }
    }
    true
}

impl PartialEq for SubgroupConjClass {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (&self.core, &other.core);
        if a.alphabet != b.alphabet || a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
            return false;
        }
        let v0 = a.valence(0);
        (0..b.vertex_count()).any(|t| b.valence(t) == v0 && morphism_from(a, b, t, true))
    }
}

impl Eq for SubgroupConjClass {}

impl Hash for SubgroupConjClass {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.core.alphabet.hash(state);
        self.core.vertex_count().hash(state);
        self.core.edge_count().hash(state);
        let mut valences: Vec<usize> = (0..self.core.vertex_count()).map(|v| self.core.valence(v)).collect();
        valences.sort_unstable();
        valences.hash(state);
    }
}

impl fmt::Debug for SubgroupConjClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.generators().iter().map(Word::to_string).collect();
        write!(f, "[<{}>]", gens.join(", "))
    }
}

pub fn conjugacy_eq(h: &SubgroupConjClass, k: &SubgroupConjClass) -> bool {
    h == k
}

/// `w` with `|w| ≤ conj_bound` such that `w a w⁻¹ ∈ B` for every generator
/// `a` of `A`, found by shortlex search. `None` is inconclusive beyond the
/// bound.
pub fn conjugate_into(a: &StallingsCore, b: &StallingsCore, conj_bound: usize) -> Result<Option<Word>> {
    a.alphabet.check(b.alphabet)?;
    let gens = a.basis();
    Ok(words_up_to(a.alphabet, conj_bound)
        .into_iter()
        .find(|w| gens.iter().all(|g| b.contains(&g.conjugate_by(w)))))
}

/// Exact decision of conjugate containment by searching for a
/// label-preserving morphism of the cyclic core of `A` into the cyclic core
/// of `B`. Returns a conjugator `w` with `w A w⁻¹ ≤ B`.
pub fn conjugator_into(a: &StallingsCore, b: &StallingsCore) -> Result<Option<Word>> {
    a.alphabet.check(b.alphabet)?;
    if a.is_trivial() {
        return Ok(Some(Word::identity(a.alphabet)));
    }
    let ca = SubgroupConjClass::of(a);
    let hair = hair_word(a, &ca);
    for t in 0..b.vertex_count() {
        if morphism_from(&ca.core, b, t, false) {
            return Ok(Some(b.path_to(t).mul(&hair.inverse())));
        }
    }
    Ok(None)
}

/// A word `h` with `A = h C h⁻¹`, `C` the subgroup read at vertex 0 of the
/// cyclic core.
fn hair_word(a: &StallingsCore, ca: &SubgroupConjClass) -> Word {
    for v in 0..a.vertex_count() {
        if morphism_from(&ca.core, a, v, false) {
            return a.path_to(v);
        }
    }
    unreachable!("the cyclic core embeds in the core")
}

// ---------------------------------------------------------------------------
// Free factor systems

/// Certificate that the classes are free factors of a common free
/// decomposition: factor `i` is `θ(⟨x_j : j ∈ blocks[i]⟩)` for one certified
/// automorphism `θ` and disjoint blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FfsWitness {
    pub automorphism: FreeAutomorphism,
    pub blocks: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FreeFactorSystem {
    rank: usize,
    factors: Vec<SubgroupConjClass>,
    witness: FfsWitness,
}

/// Three-valued answer of a bounded search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TriState {
    True,
    False,
    Inconclusive,
}

impl FreeFactorSystem {
    pub fn from_witness(automorphism: FreeAutomorphism, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = automorphism.rank();
        let mut used = vec![false; n];
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidWitness("empty block".into()));
            }
            for &j in b {
                if j >= n {
                    return Err(Error::IndexOutOfRange { index: j, rank: n });
                }
                if std::mem::replace(&mut used[j], true) {
                    return Err(Error::InvalidWitness(format!("letter {j} used twice")));
                }
            }
        }
        let alphabet = automorphism.alphabet();
        let factors = blocks
            .iter()
            .map(|b| {
                let gens: Vec<Word> = b.iter().map(|&j| automorphism.images()[j].clone()).collect();
                SubgroupConjClass::from_generators(alphabet, &gens)
            })
            .collect::<Result<_>>()?;
        Ok(FreeFactorSystem {
            rank: n,
            factors,
            witness: FfsWitness { automorphism, blocks },
        })
    }

    /// Factors spanned by subsets of the standard basis.
    pub fn standard(alphabet: Alphabet, blocks: Vec<Vec<usize>>) -> Result<Self> {
        Self::from_witness(FreeAutomorphism::identity(alphabet), blocks)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn factors(&self) -> &[SubgroupConjClass] {
        &self.factors
    }

    pub fn witness(&self) -> &FfsWitness {
        &self.witness
    }

    /// Rank of the free complement `B` in `F_N = A_1 ∗ ... ∗ A_k ∗ B`.
    pub fn free_rank(&self) -> usize {
        self.rank - self.witness.blocks.iter().map(Vec::len).sum::<usize>()
    }

    /// Grushko rank `ξ = k + rank(B)`.
    pub fn xi(&self) -> usize {
        self.factors.len() + self.free_rank()
    }

    pub fn is_sporadic(&self) -> bool {
        self.xi() <= 2
    }

    /// Re-derive the factor classes from the witness.
    pub fn verify(&self) -> Result<()> {
        let again = FreeFactorSystem::from_witness(self.witness.automorphism.clone(), self.witness.blocks.clone())?;
        if !same_classes(&again.factors, &self.factors) {
            return Err(Error::InvalidWitness("factors differ from witness images".into()));
        }
        Ok(())
    }

    /// Image under `φ`, with witness `φ ∘ θ`; `None` past `length_cap`.
    pub fn image(&self, phi: &FreeAutomorphism, length_cap: usize) -> Result<Option<Self>> {
        match phi.compose_bounded(&self.witness.automorphism, length_cap)? {
            Some(theta) => Ok(Some(FreeFactorSystem::from_witness(theta, self.witness.blocks.clone())?)),
            None => Ok(None),
        }
    }

    pub fn same_as(&self, other: &FreeFactorSystem) -> bool {
        same_classes(&self.factors, &other.factors)
    }
}

fn same_classes(a: &[SubgroupConjClass], b: &[SubgroupConjClass]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(|x| match (0..b.len()).find(|&j| !used[j] && b[j] == *x) {
        Some(j) => {
            used[j] = true;
            true
        }
        None => false,
    })
}

fn supports_refute(a: &SubgroupConjClass, b: &SubgroupConjClass) -> Result<bool> {
    Ok(!a.homology_support()?.is_subset_of(&b.homology_support()?))
}

/// `F1 ⊑ F2`: each class of `F1` conjugates into a class of `F2`.
/// `True` needs a conjugator of length at most `conj_bound`; `False` is
/// certified by rational homology or by the absence of a core morphism;
/// `Inconclusive` means containment holds only via longer conjugators.
pub fn ffs_poset_leq(f1: &FreeFactorSystem, f2: &FreeFactorSystem, conj_bound: usize) -> Result<TriState> {
    if f1.rank != f2.rank {
        return Err(Error::AlphabetMismatch {
            expected: f1.rank,
            found: f2.rank,
        });
    }
    let mut result = TriState::True;
    for a in &f1.factors {
        let mut best = TriState::False;
        for b in &f2.factors {
            if supports_refute(a, b)? {
                continue;
            }
            if conjugate_into(&a.core, &b.core, conj_bound)?.is_some() {
                best = TriState::True;
                break;
            }
            if let Some(w) = conjugator_into(&a.core, &b.core)? {
                best = if w.len() <= conj_bound { TriState::True } else { TriState::Inconclusive };
            }
        }
        match best {
            TriState::False => return Ok(TriState::False),
            TriState::Inconclusive => result = TriState::Inconclusive,
            TriState::True => {}
        }
    }
    if result == TriState::True && f2.xi() > f1.xi() {
        return Err(Error::TheoremViolation(format!(
            "ξ increased along ⊑: {} > {}",
            f2.xi(),
            f1.xi()
        )));
    }
    Ok(result)
}

// ---------------------------------------------------------------------------
// Orbits

pub fn image_class(phi: &FreeAutomorphism, h: &SubgroupConjClass) -> Result<SubgroupConjClass> {
    Ok(image_class_bounded(phi, h, usize::MAX)?.expect("unbounded"))
}

/// `None` when the images exceed `length_cap` letters in total.
pub fn image_class_bounded(phi: &FreeAutomorphism, h: &SubgroupConjClass, length_cap: usize) -> Result<Option<SubgroupConjClass>> {
    phi.alphabet().check(h.alphabet())?;
    let mut images = Vec::new();
    let mut total = 0usize;
    for g in h.generators() {
        match phi.apply_bounded(&g, length_cap.saturating_sub(total))? {
            Some(w) => {
                total += w.len();
                images.push(w);
            }
            None => return Ok(None),
        }
    }
    let c = SubgroupConjClass::from_generators(phi.alphabet(), &images)?;
    Ok((c.edge_count() <= length_cap).then_some(c))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrbitOutcome {
    Period(usize),
    NoPeriodWithin(usize),
    Blowup(usize),
}

/// Serialized as `{input, outcome, period, iterations, core_sizes}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub input: String,
    pub outcome: OrbitOutcome,
    pub period: Option<usize>,
    pub iterations: usize,
    pub core_sizes: Vec<usize>,
}

impl OrbitReport {
    fn new(input: String, outcome: OrbitOutcome, core_sizes: Vec<usize>) -> Self {
        let period = match outcome {
            OrbitOutcome::Period(p) => Some(p),
            _ => None,
        };
        OrbitReport {
            input,
            outcome,
            period,
            iterations: core_sizes.len(),
            core_sizes,
        }
    }
}

fn check_iter(max_iter: usize) -> Result<()> {
    if max_iter == 0 {
        return Err(Error::Config("max_iter must be at least 1".into()));
    }
    Ok(())
}

/// First return of a state to its start under a step function.
fn first_return<S>(
    start: &S,
    max_iter: usize,
    length_cap: usize,
    size: impl Fn(&S) -> usize,
    mut step: impl FnMut(&S) -> Result<Option<S>>,
    same: impl Fn(&S, &S) -> bool,
) -> Result<(OrbitOutcome, Vec<usize>)> {
    check_iter(max_iter)?;
    let mut sizes = Vec::new();
    let mut cur = None::<S>;
    for p in 1..=max_iter {
        let next = step(cur.as_ref().unwrap_or(start))?;
        let Some(next) = next.filter(|n| size(n) <= length_cap) else {
            return Ok((OrbitOutcome::Blowup(length_cap), sizes));
        };
        sizes.push(size(&next));
        if same(&next, start) {
            return Ok((OrbitOutcome::Period(p), sizes));
        }
        cur = Some(next);
    }
    Ok((OrbitOutcome::NoPeriodWithin(max_iter), sizes))
}

/// Orbit of a subgroup conjugacy class.
pub fn orbit_period_class(phi: &FreeAutomorphism, start: &SubgroupConjClass, max_iter: usize, length_cap: usize) -> Result<OrbitReport> {
    let (o, sizes) = first_return(
        start,
        max_iter,
        length_cap,
        SubgroupConjClass::edge_count,
        |h| image_class_bounded(phi, h, length_cap),
        |a, b| a == b,
    )?;
    Ok(OrbitReport::new(format!("{start:?}"), o, sizes))
}

/// Orbit of a conjugacy class of elements.
pub fn orbit_period_word(phi: &FreeAutomorphism, start: &CyclicWord, max_iter: usize, length_cap: usize) -> Result<OrbitReport> {
    let (o, sizes) = first_return(
        start,
        max_iter,
        length_cap,
        CyclicWord::len,
        |c| Ok(phi.apply_bounded(&c.as_word(), length_cap)?.map(|w| cyclic_reduce(&w).0)),
        |a, b| a == b,
    )?;
    Ok(OrbitReport::new(start.to_string(), o, sizes))
}

/// Orbit of an element under the automorphism itself (no conjugation).
pub fn orbit_period_exact(phi: &FreeAutomorphism, start: &Word, max_iter: usize, length_cap: usize) -> Result<OrbitReport> {
    let (o, sizes) = first_return(
        start,
        max_iter,
        length_cap,
        Word::len,
        |w| phi.apply_bounded(w, length_cap),
        |a, b| a == b,
    )?;
    Ok(OrbitReport::new(start.to_string(), o, sizes))
}

/// Orbit of a free factor system.
pub fn orbit_period_ffs(phi: &FreeAutomorphism, start: &FreeFactorSystem, max_iter: usize, length_cap: usize) -> Result<OrbitReport> {
    let size = |f: &FreeFactorSystem| f.factors.iter().map(SubgroupConjClass::edge_count).sum();
    let (o, sizes) = first_return(start, max_iter, length_cap, size, |f| f.image(phi, length_cap), |a, b| a.same_as(b))?;
    Ok(OrbitReport::new(format!("{:?}", start.factors), o, sizes))
}

/// Kernel-based rank check used by tests and witnesses: the abelianized
/// factor generators together with a complement span `Z^N`.
pub fn factor_homology_rank(f: &FreeFactorSystem) -> Result<usize> {
    let rows: Vec<Vec<i128>> = f
        .factors
        .iter()
        .flat_map(|c| c.generators())
        .map(|w| w.exponent_vector().into_iter().map(i128::from).collect())
        .collect();
    let kernel = integer_kernel(rows.len(), &transpose(&rows, f.rank))?;
    Ok(rows.len() - kernel.len())
}

fn transpose(rows: &[Vec<i128>], n: usize) -> Vec<Vec<i128>> {
    (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect()
}
