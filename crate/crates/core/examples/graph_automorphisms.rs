//! Graph symmetries, their action on H_1 and the mod-3 rigidity check.
use aperiodic_lab::graphs::{connected_multigraphs, enumerate_automorphisms, h1_action, ivanov_check, FiniteGraph, IvanovOutcome};

fn main() -> aperiodic_lab::Result<()> {
    let theta = FiniteGraph::theta();
    let auts = enumerate_automorphisms(&theta)?;
    println!("theta graph has {} automorphisms", auts.len());
    for f in &auts {
        let outcome = ivanov_check(&theta, f)?;
        if outcome != IvanovOutcome::HypothesisFails {
            println!("  {:?}: acts trivially mod 3 ({outcome:?}), H_1 action {:?}", f.edge_perm(), h1_action(&theta, f)?);
        }
    }

    let counts: Vec<usize> = connected_multigraphs(6).iter().map(Vec::len).collect();
    println!("connected multigraphs without valence-1 vertices for 0..=6 edges: {counts:?}");
    Ok(())
}
