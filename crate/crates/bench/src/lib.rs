//! Shared fixtures for the criterion benches.

use std::sync::Arc;

use medianlab_core::action::validate_action;
use medianlab_core::measure::group_measure;
use medianlab_core::{GroupAction, GroupMeasure, MedianAlgebra};
use num::BigRational;

/// Xor action of the Klein four-group on the 3-cube, with the uniform step
/// measure on {e, u, v, u v}. Both generators flip an odd number of bits, so
/// the walk alternates between the two parity classes.
pub fn parity_walk() -> (GroupAction, GroupMeasure) {
    let m = Arc::new(MedianAlgebra::hypercube(3).unwrap());
    let xor = |mask: usize| (0..8).map(|x| x ^ mask).collect::<Vec<_>>();
    let action = validate_action(m, &[("u".into(), xor(5)), ("v".into(), xor(6))]).unwrap();
    let quarter = BigRational::new(1.into(), 4.into());
    let mu = group_measure(
        &action,
        &[
            ("e".into(), quarter.clone()),
            ("u".into(), quarter.clone()),
            ("v".into(), quarter.clone()),
            ("u v".into(), quarter),
        ],
    )
    .unwrap();
    (action, mu)
}

/// The 3-cube rebuilt from its full median table, so wall enumeration has to
/// take the dense subset scan instead of reading coordinates off an embedding.
pub fn dense_cube3() -> MedianAlgebra {
    let mut table = vec![0usize; 512];
    for x in 0..8 {
        for y in 0..8 {
            for z in 0..8 {
                table[(x * 8 + y) * 8 + z] = (x & y) | (x & z) | (y & z);
            }
        }
    }
    MedianAlgebra::from_table(8, &table).unwrap()
}
