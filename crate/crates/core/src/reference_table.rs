//! The 30 input triplets of the published two-stage campaign with their
//! printed success probabilities (three decimals), in the column order
//! SP, MP, SA, MA.

use num_complex::Complex64;

use crate::chain::{concat3_success_prob, ChainCombo};
use crate::coin::{Coin, Extended};

/// Half a unit in the third decimal.
pub const PRINTED_TOLERANCE: f64 = 5e-4;

/// `computed` rounds to `printed`. Values exactly on a rounding boundary
/// (such as 0.0625 printed as 0.063) count as agreeing.
pub fn agrees_with_printed(computed: f64, printed: f64) -> bool {
    (computed - printed).abs() <= PRINTED_TOLERANCE + 1e-12
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub inputs: [Extended; 3],
    pub printed: [f64; 4],
}

impl ReferenceRow {
    pub fn coins(&self) -> [Coin; 3] {
        self.inputs.map(Coin::from)
    }

    /// `(P_SP, P_MP, P_SA, P_MA)` at the listed inputs.
    pub fn computed(&self) -> [f64; 4] {
        let [z1, z2, z3] = self.coins();
        ChainCombo::ALL.map(|combo| concat3_success_prob(&z1, &z2, &z3, combo))
    }
}

const INF: Extended = Extended::Infinity;

const fn fin(re: f64, im: f64) -> Extended {
    Extended::Finite(Complex64::new(re, im))
}

const fn row(inputs: [Extended; 3], printed: [f64; 4]) -> ReferenceRow {
    ReferenceRow { inputs, printed }
}

pub const ROWS: [ReferenceRow; 30] = [
    row(
        [fin(1.0, 0.0), fin(1.0, 0.0), fin(1.0, 0.0)],
        [0.031, 0.031, 0.031, 0.031],
    ),
    row(
        [fin(1.0, 0.0), fin(-1.0, 0.0), fin(-1.0, 0.0)],
        [0.016, 0.016, 0.016, 0.016],
    ),
    row(
        [fin(-1.0, 0.0), fin(-1.0, 0.0), fin(1.0, 0.0)],
        [0.031, 0.031, 0.031, 0.031],
    ),
    row(
        [fin(-0.0, -1.0), fin(0.0, 1.0), fin(-0.0, -1.0)],
        [0.016, 0.016, 0.016, 0.016],
    ),
    row(
        [fin(-0.0, -1.0), fin(-0.0, -1.0), fin(0.0, 1.0)],
        [0.031, 0.031, 0.031, 0.031],
    ),
    row(
        [fin(-0.0, -1.0), fin(0.0, 0.0), fin(-0.0, -1.0)],
        [0.039, 0.008, 0.039, 0.008],
    ),
    row(
        [fin(0.0, 0.0), fin(0.0, 1.0), fin(-0.0, -1.0)],
        [0.039, 0.008, 0.039, 0.008],
    ),
    row(
        [INF, fin(0.0, 0.0), fin(-0.0, -1.0)],
        [0.016, 0.016, 0.016, 0.016],
    ),
    row(
        [fin(1.0, 0.0), fin(0.0, 0.0), fin(1.0, 0.0)],
        [0.039, 0.008, 0.039, 0.008],
    ),
    row(
        [fin(0.0, 0.0), fin(1.0, 0.0), fin(1.0, 0.0)],
        [0.039, 0.008, 0.039, 0.008],
    ),
    row(
        [INF, fin(0.0, 0.0), fin(1.0, 0.0)],
        [0.016, 0.016, 0.016, 0.016],
    ),
    row(
        [fin(0.0, 0.0), fin(0.0, 0.0), fin(-0.0, -1.0)],
        [0.063, 0.0, 0.063, 0.0],
    ),
    row(
        [fin(0.0, 0.0), fin(0.0, 0.0), fin(1.0, 0.0)],
        [0.062, 0.0, 0.062, 0.0],
    ),
    row(
        [fin(0.0, 0.0), fin(0.0, 0.0), fin(0.0, 0.0)],
        [0.125, 0.0, 0.125, 0.0],
    ),
    row([INF, INF, INF], [0.0, 0.125, 0.0, 0.125]),
    row(
        [fin(-0.13, 0.88), fin(-0.24, -0.15), fin(1.0, 0.0)],
        [0.038, 0.008, 0.038, 0.008],
    ),
    row(
        [fin(-0.27, 0.74), fin(0.0, 0.0), fin(1.0, 0.0)],
        [0.044, 0.006, 0.044, 0.006],
    ),
    row(
        [fin(-0.27, 0.74), fin(1.0, 0.0), fin(1.0, 0.0)],
        [0.024, 0.017, 0.024, 0.017],
    ),
    row(
        [fin(0.0, 0.0), fin(-0.27, -0.74), fin(1.0, 0.0)],
        [0.044, 0.006, 0.044, 0.006],
    ),
    row(
        [fin(1.0, 0.0), fin(-0.27, -0.74), fin(1.0, 0.0)],
        [0.024, 0.017, 0.024, 0.017],
    ),
    row(
        [fin(-0.27, 0.74), fin(0.0, 0.0), fin(-1.0, 0.0)],
        [0.044, 0.006, 0.044, 0.006],
    ),
    row(
        [fin(-0.27, 0.74), fin(1.0, 0.0), fin(-1.0, 0.0)],
        [0.024, 0.017, 0.024, 0.017],
    ),
    row(
        [fin(-0.31, -0.4), fin(-3.25, 0.9), fin(-0.53, 1.15)],
        [0.019, 0.024, 0.019, 0.024],
    ),
    row(
        [fin(1.97, 2.41), fin(0.04, 0.65), fin(2.03, -0.71)],
        [0.024, 0.032, 0.024, 0.032],
    ),
    row(
        [fin(0.06, 0.15), fin(-0.33, 1.77), fin(0.08, -1.33)],
        [0.028, 0.011, 0.028, 0.011],
    ),
    row(
        [fin(-1.09, -1.77), fin(-0.78, 1.02), fin(0.58, -0.33)],
        [0.009, 0.026, 0.009, 0.026],
    ),
    row(
        [fin(-0.49, -0.03), fin(1.1, -0.28), fin(-0.36, -0.95)],
        [0.024, 0.01, 0.024, 0.01],
    ),
    row(
        [fin(0.23, -0.32), fin(0.95, -0.78), fin(-1.37, 0.23)],
        [0.033, 0.016, 0.033, 0.016],
    ),
    row(
        [fin(0.12, 0.06), fin(-1.51, -0.72), fin(-0.2, -0.25)],
        [0.031, 0.017, 0.031, 0.017],
    ),
    row(
        [fin(-0.86, -0.43), fin(-0.44, -0.87), fin(0.53, -0.26)],
        [0.032, 0.028, 0.032, 0.028],
    ),
];
