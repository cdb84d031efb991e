//! Projecting a matrix onto the fixed-point subspace of a group by four
//! independent routes: orbit averaging, the explicit group-element sum, a
//! constrained least squares solve, and conjugation through the
//! symmetry-adapted basis.

use symcov::basis::{build_basis, project_via_basis};
use symcov::estimator::{least_squares_project, reynolds_project, reynolds_project_oracle};
use symcov::gauss::random_symmetric_matrix;
use symcov::group::PermutationGroup;
use symcov::linalg::max_abs;

fn main() {
    let p = 6;
    let group = PermutationGroup::cyclic(p).unwrap();
    let basis = build_basis(&group).unwrap();
    let m = random_symmetric_matrix(p, 2024);

    let orbit = reynolds_project(&m, &group).unwrap();
    let group_sum = reynolds_project_oracle(&m, &group).unwrap();
    let least_squares = least_squares_project(&m, &group).unwrap();
    let conjugation = project_via_basis(&m, &basis).unwrap();

    println!("input (first row):      {:?}", row(&m, 0));
    println!("projection (first row): {:?}", row(&orbit, 0));
    println!();
    println!("route disagreements (entrywise max):");
    println!("  orbit vs group sum:      {:.3e}", max_abs(&(&orbit - &group_sum)));
    println!("  orbit vs least squares:  {:.3e}", max_abs(&(&orbit - &least_squares)));
    println!("  orbit vs basis path:     {:.3e}", max_abs(&(&orbit - &conjugation)));
    println!();

    // The projection fixes what it produces and never grows the norm.
    let twice = reynolds_project(&orbit, &group).unwrap();
    println!("idempotence residual:     {:.3e}", max_abs(&(&twice - &orbit)));
    println!(
        "Frobenius contraction:    {:.4} -> {:.4}",
        m.norm(),
        orbit.norm()
    );
}

fn row(m: &symcov::linalg::Mat, i: usize) -> Vec<f64> {
    (0..m.ncols()).map(|j| (m[(i, j)] * 1e3).round() / 1e3).collect()
}
