//! Inputs shared by the benchmarks.

use dziobek_core::{known_solutions, Configuration, MassVector, PotentialParam};

/// The equal-mass square at `a = -3/2` with every coordinate shifted by
/// `offset`, alternating in sign, so Newton has work to do.
pub fn perturbed_square(offset: f64) -> (Configuration, MassVector) {
    let fx = known_solutions(4, PotentialParam::NEWTON).expect("square fixture");
    let mut points = fx[0].0.positions();
    for (k, p) in points.iter_mut().flatten().enumerate() {
        *p += if k % 2 == 0 { offset } else { -offset };
    }
    let x = Configuration::from_points(&points).expect("distinct points");
    (x, MassVector::equal(4).expect("four bodies"))
}
