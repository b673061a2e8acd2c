use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aperiodic_lab::aut::{sample, standard_generators, Family, FreeAutomorphism};
use aperiodic_lab::graphs::{connected_multigraphs, enumerate_automorphisms, h1_action, EdgePath, FiniteGraph};
use aperiodic_lab::homology::{abelianization, fix_subgroup, in_ia3, per_subgroup};
use aperiodic_lab::rtt::{classify_stratum, filtration_of, random_tight_path, TransitionMatrix};
use aperiodic_lab::splittings::{realized_automorphism, GraphMapRep, MarkedGraph};
use aperiodic_lab::subgroups::{image_class, membership, StallingsCore, SubgroupConjClass};
use aperiodic_lab::words::{cyclic_reduce, Alphabet, CyclicWord, Letter, Word};

fn alphabet(rank: usize) -> Alphabet {
    Alphabet::new(rank).unwrap()
}

fn word(rank: usize, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((0..rank, any::<bool>()), 0..=max_len)
        .prop_map(move |raw| Word::reduce(alphabet(rank), raw.into_iter().map(|(i, inv)| Letter::new(i, inv))).unwrap())
}

fn automorphism(rank: usize, family: Family) -> impl Strategy<Value = FreeAutomorphism> {
    (1usize..=6, any::<u64>()).prop_map(move |(budget, seed)| {
        sample(&standard_generators(rank, family).unwrap(), budget, seed).unwrap()
    })
}

fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reduce_is_idempotent(w in word(3, 16)) {
        let again = Word::reduce(w.alphabet(), w.letters().iter().copied()).unwrap();
        prop_assert_eq!(&again, &w);
        prop_assert!(w.letters().windows(2).all(|p| p[0] != p[1].inverse()));
    }

    #[test]
    fn group_laws(u in word(2, 10), v in word(2, 10), w in word(2, 10)) {
        prop_assert_eq!(u.mul(&v).mul(&w), u.mul(&v.mul(&w)));
        prop_assert!(u.mul(&u.inverse()).is_empty());
        prop_assert_eq!(u.inverse().inverse(), u.clone());
        let ev: Vec<i64> = u.exponent_vector().iter().zip(v.exponent_vector()).map(|(a, b)| a + b).collect();
        prop_assert_eq!(u.mul(&v).exponent_vector(), ev);
    }

    #[test]
    fn cyclic_reduction_round_trip(w in word(3, 14), c in word(3, 6)) {
        let (core, conj) = cyclic_reduce(&w);
        prop_assert_eq!(core.as_word().conjugate_by(&conj), w.clone());
        prop_assert_eq!(CyclicWord::of(&w.conjugate_by(&c)), core.clone());
        prop_assert!(core.as_word().is_cyclically_reduced());
    }

    #[test]
    fn automorphisms_are_homomorphisms(phi in automorphism(3, Family::Nielsen), u in word(3, 8), v in word(3, 8)) {
        prop_assert_eq!(phi.apply(&u.mul(&v)).unwrap(), phi.apply(&u).unwrap().mul(&phi.apply(&v).unwrap()));
        prop_assert_eq!(phi.inverse().apply(&phi.apply(&u).unwrap()).unwrap(), u.clone());
    }

    #[test]
    fn composition_acts_right_to_left(phi in automorphism(2, Family::Nielsen), psi in automorphism(2, Family::Nielsen), u in word(2, 8)) {
        let composite = phi.compose(&psi).unwrap();
        prop_assert_eq!(composite.apply(&u).unwrap(), phi.apply(&psi.apply(&u).unwrap()).unwrap());
        prop_assert!(phi.compose(&phi.inverse()).unwrap().is_identity());
    }

    #[test]
    fn inner_twists_are_outer_equal(phi in automorphism(2, Family::Nielsen), w in word(2, 6)) {
        let twisted = FreeAutomorphism::inner(&w).compose(&phi).unwrap();
        prop_assert!(phi.outer_eq(&twisted).unwrap());
        let c = FreeAutomorphism::inner(&w).is_inner().unwrap();
        let (from_c, from_w) = (FreeAutomorphism::inner(&c), FreeAutomorphism::inner(&w));
        prop_assert_eq!(from_c.images(), from_w.images());
        prop_assert!(abelianization(&FreeAutomorphism::inner(&w)).is_identity());
    }

    #[test]
    fn abelianization_is_functorial(phi in automorphism(3, Family::Nielsen), psi in automorphism(3, Family::Nielsen)) {
        let lhs = abelianization(&phi.compose(&psi).unwrap());
        let rhs = abelianization(&phi).mul(&abelianization(&psi)).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(abelianization(&phi.inverse()), abelianization(&phi).inverse().unwrap());
    }

    #[test]
    fn ia3_is_closed(phi in automorphism(3, Family::Ia3), psi in automorphism(3, Family::Ia3)) {
        prop_assert!(in_ia3(&phi) && in_ia3(&psi));
        prop_assert!(in_ia3(&phi.compose(&psi).unwrap()));
        prop_assert!(in_ia3(&phi.inverse()));
    }

    #[test]
    fn fix_inside_per(phi in automorphism(3, Family::Nielsen)) {
        let m = abelianization(&phi);
        let fix = fix_subgroup(&m).unwrap();
        let per = per_subgroup(&m).unwrap();
        prop_assert!(fix.is_subset_of(&per));
        prop_assert!(fix.is_saturated().unwrap() && per.is_saturated().unwrap());
        prop_assert!(fix.is_invariant_under(&m) && per.is_invariant_under(&m));
    }

    #[test]
    fn folding_is_confluent(gens in prop::collection::vec(word(2, 5), 1..=4), seed in any::<u64>()) {
        let a = alphabet(2);
        let canonical = StallingsCore::fold(a, &gens).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shuffled = StallingsCore::fold_in_order(a, &gens, &mut |n| rng.random_range(0..n)).unwrap();
        prop_assert_eq!(&shuffled, &canonical);
        for g in &gens {
            prop_assert!(membership(g, &canonical));
        }
    }

    #[test]
    fn conjugate_subgroups_share_a_class(gens in prop::collection::vec(word(2, 5), 1..=3), c in word(2, 6)) {
        let a = alphabet(2);
        let conj: Vec<Word> = gens.iter().map(|g| g.conjugate_by(&c)).collect();
        prop_assert_eq!(
            SubgroupConjClass::from_generators(a, &gens).unwrap(),
            SubgroupConjClass::from_generators(a, &conj).unwrap()
        );
    }

    #[test]
    fn image_classes_compose(gens in prop::collection::vec(word(2, 4), 1..=2), phi in automorphism(2, Family::Nielsen), psi in automorphism(2, Family::Nielsen)) {
        let h = SubgroupConjClass::from_generators(alphabet(2), &gens).unwrap();
        let lhs = image_class(&phi.compose(&psi).unwrap(), &h).unwrap();
        let rhs = image_class(&phi, &image_class(&psi, &h).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn tighten_is_idempotent(len in 0usize..30, seed in any::<u64>(), extra in prop::collection::vec(any::<bool>(), 0..30)) {
        let g = FiniteGraph::theta();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_tight_path(&g, len, &mut rng);
        // Insert backtracks at random positions.
        let mut darts = Vec::new();
        for (i, d) in p.darts.iter().enumerate() {
            darts.push(*d);
            if extra.get(i).copied().unwrap_or(false) {
                darts.push(d.rev());
                darts.push(*d);
            }
        }
        let noisy = EdgePath::new(&g, p.start, darts).unwrap();
        let t = noisy.tighten(&g).unwrap();
        prop_assert_eq!(&t.tighten(&g).unwrap(), &t);
        prop_assert!(t.len() <= noisy.len());
        prop_assert_eq!(&t, &p);
        prop_assert_eq!(t.end(&g), noisy.end(&g));
    }
}

#[test]
fn h1_action_is_functorial() {
    for level in connected_multigraphs(4) {
        for g in level {
            let auts = enumerate_automorphisms(&g).unwrap();
            for f in auts.iter().take(12) {
                for h in auts.iter().take(12) {
                    let lhs = h1_action(&g, &f.compose(h)).unwrap();
                    let rhs = mat_mul(&h1_action(&g, f).unwrap(), &h1_action(&g, h).unwrap());
                    assert_eq!(lhs, rhs, "graph {g}");
                }
            }
        }
    }
}

#[test]
fn automorphisms_form_a_group() {
    for g in [FiniteGraph::rose(2), FiniteGraph::theta(), FiniteGraph::circle(3)] {
        let auts = enumerate_automorphisms(&g).unwrap();
        for f in &auts {
            assert!(auts.contains(&f.inverse()));
            for h in &auts {
                assert!(auts.contains(&f.compose(h)));
            }
        }
    }
}

#[test]
fn realization_is_a_homomorphism_to_out() {
    let a = alphabet(2);
    let theta = MarkedGraph::theta(&Word::parse(a, "a").unwrap(), &Word::parse(a, "b").unwrap(), None).unwrap();
    for x in [MarkedGraph::standard_rose(a), theta] {
        let auts = enumerate_automorphisms(x.graph()).unwrap();
        for f in &auts {
            for h in &auts {
                let lhs = realized_automorphism(&x, &f.compose(h)).unwrap();
                let rhs = realized_automorphism(&x, f)
                    .unwrap()
                    .compose(&realized_automorphism(&x, h).unwrap())
                    .unwrap();
                assert!(lhs.outer_eq(&rhs).unwrap());
            }
        }
    }
}

fn rose_map(images: &[&str]) -> GraphMapRep {
    let rose = MarkedGraph::standard_rose(alphabet(images.len()));
    GraphMapRep::rose_map(rose, images).unwrap()
}

#[test]
fn transition_matrices_under_iteration() {
    for images in [vec!["ab", "a"], vec!["ab", "bab"], vec!["b", "c", "ca"], vec!["aB", "a"]] {
        let f = rose_map(&images);
        let all: Vec<usize> = (0..images.len()).collect();
        let m = TransitionMatrix::of(&f, &all);
        let ff = f.compose(&f).tightened().unwrap();
        let m2 = TransitionMatrix::of(&ff, &all);
        let sq = m.square();
        let cancels = f.compose(&f).edge_images().iter().any(|p| !p.is_tight());
        for i in 0..all.len() {
            for j in 0..all.len() {
                assert!(m2.entries[i][j] <= sq.entries[i][j]);
            }
        }
        assert_eq!(m2 == sq, !cancels, "{images:?}");
    }
}

#[test]
fn perron_frobenius_bounds() {
    for images in [vec!["ab", "a"], vec!["ab", "bab"], vec!["b", "c", "ca"], vec!["bb", "aa"], vec!["abc", "b", "ca"]] {
        let f = rose_map(&images);
        for s in filtration_of(&f).unwrap().strata {
            if !s.matrix.is_irreducible() {
                continue;
            }
            let lambda = classify_stratum(&s.matrix).unwrap().lambda();
            let sums = s.matrix.row_sums();
            let (lo, hi) = (*sums.iter().min().unwrap() as f64, *sums.iter().max().unwrap() as f64);
            assert!(lo - 1e-9 <= lambda && lambda <= hi + 1e-9, "{images:?}: {lambda} not in [{lo}, {hi}]");
        }
    }
}
