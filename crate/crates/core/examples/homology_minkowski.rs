//! Torsion in the level-3 congruence subgroup and Per = Fix in homology.
use aperiodic_lab::homology::{
    abelian_standing_assumptions_check, congruence_torsion_scan, finite_order, fix_subgroup, per_subgroup,
    IntegerMatrix,
};

fn main() -> aperiodic_lab::Result<()> {
    let level3 = congruence_torsion_scan(2, 4, 3)?;
    println!(
        "level 3, n=2, entries in [-4,4]: {} matrices, {} of finite order > 1",
        level3.enumerated, level3.violations
    );
    let level1 = congruence_torsion_scan(2, 1, 1)?;
    println!("level 1 control: {} finite-order witnesses", level1.violations);

    let swap = IntegerMatrix::from_rows(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]])?;
    println!("order of the swap: {:?}", finite_order(&swap)?);
    let fix = fix_subgroup(&swap)?;
    let per = per_subgroup(&swap)?;
    println!("Fix rank {}, Per rank {}", fix.rank(), per.rank());

    let check = abelian_standing_assumptions_check(2, 3)?;
    println!("Per = Fix over {} level-3 matrices: {} violations", check.enumerated, check.violations);
    Ok(())
}
