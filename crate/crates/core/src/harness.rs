//! Seeded experiments: sample automorphisms from a generating family,
//! iterate them on conjugacy classes, free factor systems and splittings,
//! and tally orbit outcomes. Period `p > 1` under `IA(F_N, 3)` hypotheses is
//! recorded as a violation.

use std::path::Path;
use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aut::{sample_with, standard_generators, Family, FreeAutomorphism};
use crate::error::{Error, Result};
use crate::graphs::FiniteGraph;
use crate::homology::abelianization;
use crate::splittings::{splitting_orbit_period, MarkedGraph, VertexGroup};
use crate::subgroups::{orbit_period_exact, orbit_period_ffs, orbit_period_word, FreeFactorSystem, OrbitOutcome};
use crate::words::{cyclic_reduce, words_up_to, Alphabet, CyclicWord, Word};

/// Environment variable fixing the worker thread count.
pub const THREADS_ENV: &str = "APERIODIC_LAB_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Conjugacy,
    Factors,
    Torsion,
    Splittings,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Conjugacy => "conjugacy",
            Experiment::Factors => "factors",
            Experiment::Torsion => "torsion",
            Experiment::Splittings => "splittings",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub rank: usize,
    pub family: Family,
    pub samples: usize,
    /// Sampled automorphisms are products of `1..=budget` generators.
    pub budget: usize,
    /// Longest word in the conjugacy pool.
    pub word_len: usize,
    /// Pool elements tested per sampled automorphism.
    pub pool_draws: usize,
    pub max_iter: usize,
    pub length_cap: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            rank: 2,
            family: Family::Ia3,
            samples: 1000,
            budget: 8,
            word_len: 6,
            pool_draws: 8,
            max_iter: 12,
            length_cap: 10_000,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rank < 2 {
            return Err(Error::RankTooSmall { rank: self.rank, min: 2 });
        }
        let caps = [
            ("samples", self.samples),
            ("budget", self.budget),
            ("word_len", self.word_len),
            ("pool_draws", self.pool_draws),
            ("max_iter", self.max_iter),
            ("length_cap", self.length_cap),
        ];
        if let Some((name, _)) = caps.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        Ok(())
    }

    fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.rank).expect("validated rank")
    }

    /// Independent stream for trial `i`.
    fn rng(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        rng
    }

    fn sample(&self, generators: &[FreeAutomorphism], rng: &mut ChaCha8Rng) -> Result<FreeAutomorphism> {
        let budget = rng.random_range(1..=self.budget);
        sample_with(generators, budget, rng)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub period_1: usize,
    pub period_gt1: usize,
    pub no_period: usize,
    pub blowup: usize,
}

impl Histogram {
    pub fn record(&mut self, o: OrbitOutcome) {
        match o {
            OrbitOutcome::Period(1) => self.period_1 += 1,
            OrbitOutcome::Period(_) => self.period_gt1 += 1,
            OrbitOutcome::NoPeriodWithin(_) => self.no_period += 1,
            OrbitOutcome::Blowup(_) => self.blowup += 1,
        }
    }

    pub fn merge(&self, other: &Histogram) -> Histogram {
        Histogram {
            period_1: self.period_1 + other.period_1,
            period_gt1: self.period_gt1 + other.period_gt1,
            no_period: self.no_period + other.no_period,
            blowup: self.blowup + other.blowup,
        }
    }

    pub fn total(&self) -> usize {
        self.period_1 + self.period_gt1 + self.no_period + self.blowup
    }
}

/// One orbit computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub automorphism: String,
    pub input: String,
    pub outcome: OrbitOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    pub histogram: Histogram,
    pub violations: Vec<TrialRecord>,
}

impl Section {
    fn new(name: &str, records: &[TrialRecord]) -> Self {
        let mut histogram = Histogram::default();
        for r in records {
            histogram.record(r.outcome);
        }
        Section {
            name: name.to_string(),
            histogram,
            violations: records
                .iter()
                .filter(|r| matches!(r.outcome, OrbitOutcome::Period(p) if p > 1))
                .cloned()
                .collect(),
        }
    }
}

/// A run outside the hypotheses (or a trivial case) with a known answer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Control {
    pub name: String,
    pub automorphism: String,
    pub input: String,
    pub outcome: OrbitOutcome,
    pub expected: OrbitOutcome,
    pub satisfied: bool,
}

impl Control {
    fn new(name: &str, phi: &FreeAutomorphism, input: String, outcome: OrbitOutcome, expected: OrbitOutcome) -> Self {
        Control {
            name: name.to_string(),
            automorphism: phi.to_string(),
            input,
            outcome,
            expected,
            satisfied: outcome == expected,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub trials: usize,
    pub histogram: Histogram,
    pub violations: Vec<TrialRecord>,
    pub sections: Vec<Section>,
    pub controls: Vec<Control>,
    /// Wall-clock seconds; the only field that varies between identical runs.
    pub elapsed: f64,
    #[serde(skip)]
    pub records: Vec<(String, TrialRecord)>,
}

impl ExperimentReport {
    fn assemble(experiment: Experiment, config: &ExperimentConfig, sections: Vec<(&str, Vec<TrialRecord>)>, controls: Vec<Control>, start: Instant) -> Self {
        let built: Vec<Section> = sections.iter().map(|(n, r)| Section::new(n, r)).collect();
        let histogram = built.iter().fold(Histogram::default(), |h, s| h.merge(&s.histogram));
        let violations = built.iter().flat_map(|s| s.violations.clone()).collect();
        let records = sections
            .into_iter()
            .flat_map(|(n, rs)| rs.into_iter().map(move |r| (n.to_string(), r)))
            .collect();
        ExperimentReport {
            experiment,
            config: config.clone(),
            trials: config.samples,
            histogram,
            violations,
            sections: built,
            controls,
            elapsed: start.elapsed().as_secs_f64(),
            records,
        }
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// One row per orbit computation.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(["section", "trial", "automorphism", "input", "outcome", "value"]).map_err(io)?;
        for (section, r) in &self.records {
            let (kind, value) = match r.outcome {
                OrbitOutcome::Period(p) => ("period", p),
                OrbitOutcome::NoPeriodWithin(n) => ("no_period_within", n),
                OrbitOutcome::Blowup(c) => ("blowup", c),
            };
            w.write_record([section.as_str(), &r.trial.to_string(), &r.automorphism, &r.input, kind, &value.to_string()])
                .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Run `f` on the pool configured by [`THREADS_ENV`], or rayon's default.
pub fn with_threads<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .parse()
                .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

/// Trials in parallel, records in trial order.
fn run_trials<T, F>(cfg: &ExperimentConfig, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> Result<T> + Sync,
{
    (0..cfg.samples)
        .into_par_iter()
        .map(|i| trial(i, &mut cfg.rng(i)))
        .collect()
}

fn record(trial: usize, phi: &FreeAutomorphism, input: String, outcome: OrbitOutcome) -> TrialRecord {
    TrialRecord {
        trial,
        automorphism: phi.to_string(),
        input,
        outcome,
    }
}

pub fn run(experiment: Experiment, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match experiment {
        Experiment::Conjugacy => run_conjugacy_experiment(cfg),
        Experiment::Factors => run_factor_experiment(cfg),
        Experiment::Torsion => run_torsion_experiment(cfg),
        Experiment::Splittings => run_splitting_experiment(cfg),
    }
}

/// Nontrivial conjugacy classes of length at most `len`.
pub fn class_pool(alphabet: Alphabet, len: usize) -> Vec<CyclicWord> {
    let mut out: Vec<CyclicWord> = words_up_to(alphabet, len)
        .iter()
        .filter(|w| !w.is_empty() && w.is_cyclically_reduced())
        .map(|w| cyclic_reduce(w).0)
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.letters().cmp(b.letters())));
    out.dedup();
    out
}

/// Conjugacy-class orbits (outer version) and exact element orbits under
/// the sampled representative (automorphism version).
pub fn run_conjugacy_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let alphabet = cfg.alphabet();
    let gens = standard_generators(cfg.rank, cfg.family)?;
    let classes = class_pool(alphabet, cfg.word_len);
    let words: Vec<Word> = words_up_to(alphabet, cfg.word_len).into_iter().filter(|w| !w.is_empty()).collect();
    let results = run_trials(cfg, |i, rng| {
        let phi = cfg.sample(&gens, rng)?;
        let mut outer = Vec::new();
        for c in classes.choose_multiple(rng, cfg.pool_draws) {
            let o = orbit_period_word(&phi, c, cfg.max_iter, cfg.length_cap)?.outcome;
            outer.push(record(i, &phi, c.to_string(), o));
        }
        let mut exact = Vec::new();
        for w in words.choose_multiple(rng, cfg.pool_draws) {
            let o = orbit_period_exact(&phi, w, cfg.max_iter, cfg.length_cap)?.outcome;
            exact.push(record(i, &phi, w.to_string(), o));
        }
        Ok((outer, exact))
    })?;
    let (outer, exact): (Vec<Vec<_>>, Vec<Vec<_>>) = results.into_iter().unzip();
    let outer = outer.into_iter().flatten().collect();
    let exact = exact.into_iter().flatten().collect();

    let a = Word::generator(alphabet, 0);
    let ab = Word::parse(alphabet, "ab")?;
    let swap = FreeAutomorphism::transposition(alphabet, 0, 1);
    let inner = FreeAutomorphism::inner(&ab);
    let class_a = cyclic_reduce(&a).0;
    let mut controls = vec![
        Control::new(
            "swap on [a]",
            &swap,
            class_a.to_string(),
            orbit_period_word(&swap, &class_a, cfg.max_iter, cfg.length_cap)?.outcome,
            OrbitOutcome::Period(2),
        ),
        Control::new(
            "swap on a (exact)",
            &swap,
            a.to_string(),
            orbit_period_exact(&swap, &a, cfg.max_iter, cfg.length_cap)?.outcome,
            OrbitOutcome::Period(2),
        ),
    ];
    for c in classes.iter().take(4) {
        controls.push(Control::new(
            "inner automorphism fixes classes",
            &inner,
            c.to_string(),
            orbit_period_word(&inner, c, cfg.max_iter, cfg.length_cap)?.outcome,
            OrbitOutcome::Period(1),
        ));
    }
    Ok(ExperimentReport::assemble(
        Experiment::Conjugacy,
        cfg,
        vec![("classes", outer), ("elements", exact)],
        controls,
        start,
    ))
}

/// Block patterns for the witness pool: basis subsets of sizes that leave
/// proper free factor systems.
pub fn factor_blocks(rank: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = vec![vec![vec![0]], vec![vec![0], vec![1]], vec![vec![0, 1]]];
    if rank >= 3 {
        out.push(vec![vec![0], vec![1, 2]]);
        out.push(vec![vec![0], vec![1], vec![2]]);
    }
    out
}

/// Orbits of free factor systems given by basis subsets pushed through a
/// random element of `Aut(F_N)`.
pub fn run_factor_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let alphabet = cfg.alphabet();
    let gens = standard_generators(cfg.rank, cfg.family)?;
    let nielsen = standard_generators(cfg.rank, Family::Nielsen)?;
    let pool = factor_blocks(cfg.rank);
    let results = run_trials(cfg, |i, rng| {
        let phi = cfg.sample(&gens, rng)?;
        let mut out = Vec::new();
        for _ in 0..cfg.pool_draws {
            let blocks = pool.choose(rng).expect("nonempty pool").clone();
            let depth = rng.random_range(1..=3);
            let theta = sample_with(&nielsen, depth, rng)?;
            let ffs = FreeFactorSystem::from_witness(theta, blocks)?;
            let o = orbit_period_ffs(&phi, &ffs, cfg.max_iter, cfg.length_cap)?.outcome;
            out.push(record(i, &phi, format!("{:?}", ffs.factors()), o));
        }
        Ok(out)
    })?;
    let records = results.into_iter().flatten().collect();

    let mut controls = Vec::new();
    let a_factor = FreeFactorSystem::standard(alphabet, vec![vec![0]])?;
    let cycle: Vec<usize> = (0..cfg.rank).map(|i| (i + 1) % cfg.rank).collect();
    let k = cfg.rank.min(3);
    let rotate = if cfg.rank >= 3 {
        let mut p: Vec<usize> = (0..cfg.rank).collect();
        p[..3].copy_from_slice(&[1, 2, 0]);
        FreeAutomorphism::permutation(alphabet, &p)
    } else {
        FreeAutomorphism::permutation(alphabet, &cycle)
    };
    controls.push(Control::new(
        &format!("{k}-cycle on [<a>]"),
        &rotate,
        format!("{:?}", a_factor.factors()),
        orbit_period_ffs(&rotate, &a_factor, cfg.max_iter, cfg.length_cap)?.outcome,
        OrbitOutcome::Period(k),
    ));
    let id = FreeAutomorphism::identity(alphabet);
    for blocks in &pool {
        let f = FreeFactorSystem::standard(alphabet, blocks.clone())?;
        controls.push(Control::new(
            "identity",
            &id,
            format!("{:?}", f.factors()),
            orbit_period_ffs(&id, &f, cfg.max_iter, cfg.length_cap)?.outcome,
            OrbitOutcome::Period(1),
        ));
    }
    Ok(ExperimentReport::assemble(Experiment::Factors, cfg, vec![("factor_systems", records)], controls, start))
}

/// Powers `φ^k` (`k ≤ max_iter`) of non-inner samples are tested for being
/// inner. When the powers outgrow the cap, an abelianization other than
/// `I` certifies infinite order (it is congruent to `I` mod 3).
pub fn run_torsion_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let alphabet = cfg.alphabet();
    let gens = standard_generators(cfg.rank, cfg.family)?;
    let results = run_trials(cfg, |i, rng| {
        let mut phi = cfg.sample(&gens, rng)?;
        let mut attempts = 1;
        while phi.is_inner().is_some() {
            if attempts == 100 {
                return Ok(Vec::new());
            }
            phi = cfg.sample(&gens, rng)?;
            attempts += 1;
        }
        let o = inner_power(&phi, cfg.max_iter, cfg.length_cap)?;
        Ok(vec![record(i, &phi, "outer class".into(), o)])
    })?;
    let records = results.into_iter().flatten().collect();

    let swap = FreeAutomorphism::transposition(alphabet, 0, 1);
    let id = FreeAutomorphism::identity(alphabet);
    let controls = vec![
        Control::new(
            "swap has order 2",
            &swap,
            "outer class".into(),
            inner_power(&swap, cfg.max_iter, cfg.length_cap)?,
            OrbitOutcome::Period(2),
        ),
        Control::new(
            "identity is excluded (order 1)",
            &id,
            "outer class".into(),
            inner_power(&id, cfg.max_iter, cfg.length_cap)?,
            OrbitOutcome::Period(1),
        ),
    ];
    Ok(ExperimentReport::assemble(Experiment::Torsion, cfg, vec![("powers", records)], controls, start))
}

/// Least `k ≤ max_iter` with `φ^k` inner.
pub fn inner_power(phi: &FreeAutomorphism, max_iter: usize, length_cap: usize) -> Result<OrbitOutcome> {
    let mut power = phi.clone();
    for k in 1..=max_iter {
        if abelianization(&power).is_identity() && power.is_inner().is_some() {
            return Ok(OrbitOutcome::Period(k));
        }
        if k == max_iter {
            break;
        }
        match phi.compose_bounded(&power, length_cap)? {
            Some(next) => power = next,
            None if !abelianization(phi).is_identity() => return Ok(OrbitOutcome::NoPeriodWithin(max_iter)),
            None => return Ok(OrbitOutcome::Blowup(length_cap)),
        }
    }
    Ok(OrbitOutcome::NoPeriodWithin(max_iter))
}

/// Desk-scale marked graphs: the rose, a one-edge splitting
/// `⟨a⟩ ∗ ⟨b, …⟩` and a theta graph with extra petals.
pub fn splitting_pool(rank: usize) -> Result<Vec<MarkedGraph>> {
    let alphabet = Alphabet::new(rank)?;
    let g = |i| Word::generator(alphabet, i);
    let rose = MarkedGraph::standard_rose(alphabet);
    let edge = MarkedGraph::edge_splitting(
        VertexGroup::new(vec![g(0)])?,
        VertexGroup::new((1..rank).map(g).collect())?,
        None,
    )?;
    let mut edges = vec![(0, 1), (0, 1), (0, 1)];
    edges.extend((2..rank).map(|_| (0, 0)));
    let mut words = vec![None, Some(g(0)), Some(g(1))];
    words.extend((2..rank).map(|i| Some(g(i))));
    let theta = MarkedGraph::new(
        alphabet,
        FiniteGraph::new(2, edges)?,
        &[0],
        words,
        vec![VertexGroup::trivial(alphabet); 2],
        None,
    )?;
    Ok(vec![rose, edge, theta])
}

/// Splitting orbits over the pool, each remarked by a random element of
/// `Aut(F_N)` per trial.
pub fn run_splitting_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let alphabet = cfg.alphabet();
    let gens = standard_generators(cfg.rank, cfg.family)?;
    let nielsen = standard_generators(cfg.rank, Family::Nielsen)?;
    let pool = splitting_pool(cfg.rank)?;
    let results = run_trials(cfg, |i, rng| {
        let phi = cfg.sample(&gens, rng)?;
        let mut out = Vec::new();
        for (k, x) in pool.iter().enumerate() {
            let depth = rng.random_range(0..=2);
            let x = if depth == 0 {
                x.clone()
            } else {
                x.remarked(&sample_with(&nielsen, depth, rng)?)?
            };
            let o = splitting_orbit_period(&x, &phi, cfg.max_iter, cfg.length_cap)?;
            out.push(record(i, &phi, format!("pool[{k}] marking {}", x.marking()), o));
        }
        Ok(out)
    })?;
    let records = results.into_iter().flatten().collect();

    let ab = Word::parse(alphabet, "ab")?;
    let mut petals: Vec<Word> = (0..cfg.rank).map(|i| Word::generator(alphabet, i)).collect();
    petals[1] = ab;
    let mut inverse = petals.clone();
    inverse[1] = Word::parse(alphabet, "Ab")?;
    let asym = MarkedGraph::rose(&petals, Some(inverse))?;
    let swap = FreeAutomorphism::transposition(alphabet, 0, 1);
    let mut controls = vec![Control::new(
        "swap on rose with petals a, ab",
        &swap,
        format!("marking {}", asym.marking()),
        splitting_orbit_period(&asym, &swap, cfg.max_iter, cfg.length_cap)?,
        OrbitOutcome::Period(2),
    )];
    let id = FreeAutomorphism::identity(alphabet);
    for (k, x) in pool.iter().enumerate() {
        controls.push(Control::new(
            "identity",
            &id,
            format!("pool[{k}]"),
            splitting_orbit_period(x, &id, cfg.max_iter, cfg.length_cap)?,
            OrbitOutcome::Period(1),
        ));
    }
    Ok(ExperimentReport::assemble(Experiment::Splittings, cfg, vec![("splittings", records)], controls, start))
}
