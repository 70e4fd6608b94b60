//! The counterexample as printed, with four significant digits.

use super::{functional_from_vectors, FamilyParams};
use crate::linalg::HermitianOperator;
use crate::steering::SteeringFunctional;

pub const PUBLISHED_PARAMS: FamilyParams = FamilyParams {
    x: 0.1578,
    m1: 0.2162,
    m2: 0.4363,
};

#[rustfmt::skip]
const RHO: [[f64; 9]; 9] = [
    [0.026,   0.0,     0.0,     0.0,     0.0261, 0.0,     0.0,     0.0,     -0.0261],
    [0.0,     0.0129,  0.0,     0.0261,  0.0369, 0.0,     0.0,     0.0,     0.0369],
    [0.0,     0.0,     0.0129,  0.0,     0.0,    -0.0369, -0.0261, 0.0369,  0.0],
    [0.0,     0.0261,  0.0,     0.0526,  0.0744, 0.0,     0.0,     0.0,     0.0744],
    [0.0261,  0.0369,  0.0,     0.0744,  0.132,  0.0,     0.0,     0.0,     0.0792],
    [0.0,     0.0,     -0.0369, 0.0,     0.0,    0.29,    0.0744,  0.0792,  0.0],
    [0.0,     0.0,     -0.0261, 0.0,     0.0,    0.0744,  0.0526,  -0.0744, 0.0],
    [0.0,     0.0,     0.0369,  0.0,     0.0,    0.0792,  -0.0744, 0.29,    0.0],
    [-0.0261, 0.0369,  0.0,     0.0744,  0.0792, 0.0,     0.0,     0.0,     0.132],
];

/// Printed two-qutrit state. Its trace is 1.001 and its smallest eigenvalue slightly
/// negative, both from rounding.
pub fn published_state() -> HermitianOperator {
    let rows: Vec<&[f64]> = RHO.iter().map(|r| r.as_slice()).collect();
    HermitianOperator::from_real_rows(&rows).expect("printed matrix is symmetric")
}

/// Functional built from the printed vectors q±, s, t at x = 0.1578.
pub fn published_functional() -> SteeringFunctional {
    let mut f = functional_from_vectors(
        PUBLISHED_PARAMS.x,
        [0.8785, 0.2388, -0.4137],
        [0.8785, 0.2388, 0.4137],
        [0.8785, -0.4777, 0.0],
        [0.7361, -0.6769, 0.0],
    )
    .expect("printed vectors are three-dimensional");
    f.x = Some(PUBLISHED_PARAMS.x);
    f
}
