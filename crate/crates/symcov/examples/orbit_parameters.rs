//! Edge orbits and orbit parameters for the three canonical group families.
//!
//! The orbit parameters (smallest orbit size O and smallest size-to-degree
//! ratio O_d) control how much sample reuse a symmetry buys: thresholds and
//! penalties shrink by roughly sqrt(O).

use symcov::group::{edge_orbits, orbit_parameters, PermutationGroup};

fn describe(name: &str, group: &PermutationGroup) {
    let partition = edge_orbits(group);
    let params = orbit_parameters(&partition);
    println!("{name} (p = {}):", group.p());
    println!("  group order: {}", group.order().unwrap());
    println!("  distinct edge orbits: {}", partition.n_orbits());
    for (id, orbit) in partition.orbits().iter().enumerate().take(6) {
        println!(
            "    orbit {id}: size {:3}  degree {:2}  representative {:?}",
            orbit.size(),
            orbit.degree,
            orbit.pairs[0]
        );
    }
    if partition.n_orbits() > 6 {
        println!("    ... {} more", partition.n_orbits() - 6);
    }
    println!(
        "  O = {}, O_d = {}/{}",
        params.min_orbit_size,
        params.min_size_to_degree.numer(),
        params.min_size_to_degree.denom()
    );
    println!();
}

fn main() {
    describe("cyclic", &PermutationGroup::cyclic(7).unwrap());
    describe("full symmetric", &PermutationGroup::full_symmetric(7).unwrap());
    describe(
        "product of symmetric groups, blocks [3, 4]",
        &PermutationGroup::product_symmetric(&[3, 4]).unwrap(),
    );

    // For even p the cyclic family has a smaller antipodal orbit.
    describe("cyclic (even p)", &PermutationGroup::cyclic(8).unwrap());
}
