//! Inversion, product/antiproduct and arithmetic/harmonic mean blocks.
//!
//! Every formula is written in homogeneous coordinates `(a, b)`; the usual
//! `z`-forms are the `b = 1` specialization. Input coins are normalized
//! first, so the unnormalized output matrices below carry the heralding
//! probability as their trace.
//!
//! Partial distinguishability enters through the two-photon label mixture
//! (same internal state with weight `V`, orthogonal with weight `1 − V`):
//!
//! - product: the off-diagonal coherence is scaled by `V`, the diagonal and
//!   the heralding probability are unchanged;
//! - mean blocks: `V·|w⟩⟨w| + (1−V)(|s₁|²|u₂⟩⟨u₂| + |s₂|²|u₁⟩⟨u₁|)`, where
//!   `w` is the ideal output vector and `sₖ` is the trigger amplitude of
//!   photon `k` (`b` for the arithmetic mean, `a` for the harmonic mean).
//!   HOM bunching makes the heralding probability itself depend on `V`; it
//!   reduces to `P_S` / `P_I` at `V = 1`.

use alloc::string::String;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::coin::Coin;
use crate::density::{DensityMatrix2, Mat2};
use crate::error::Indefinite;
use crate::numeric::Visibility;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProductBranch {
    /// `|z₁z₂⟩`
    Plus,
    /// `|−z₁z₂⟩`
    Minus,
}

impl ProductBranch {
    pub fn sign(self) -> f64 {
        match self {
            ProductBranch::Plus => 1.0,
            ProductBranch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SumBranch {
    /// Arithmetic mean `(z₁+z₂)/2`, heralded by `|V⟩` on the trigger.
    S,
    /// Harmonic mean `2z₁z₂/(z₁+z₂)`, heralded by `|H⟩` on the trigger.
    I,
}

impl SumBranch {
    /// Trigger amplitude of a coin for this branch.
    pub(crate) fn trigger_amplitude(self, u: &Coin) -> Complex64 {
        match self {
            SumBranch::S => u.b(),
            SumBranch::I => u.a(),
        }
    }
}

/// Heralded output of a block: the V-corrected state, the post-selection
/// probability and the ideal (V = 1) coin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockOutcome {
    pub state: DensityMatrix2,
    pub success_prob: f64,
    pub ideal: Coin,
}

/// Batch-level result: indefinite inputs are an ordinary variant here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Heralded(BlockOutcome),
    Indefinite,
}

impl Outcome {
    pub fn success_prob(&self) -> f64 {
        match self {
            Outcome::Heralded(o) => o.success_prob,
            Outcome::Indefinite => 0.0,
        }
    }

    pub fn heralded(&self) -> Option<&BlockOutcome> {
        match self {
            Outcome::Heralded(o) => Some(o),
            Outcome::Indefinite => None,
        }
    }
}

impl From<Result<BlockOutcome, Indefinite>> for Outcome {
    fn from(r: Result<BlockOutcome, Indefinite>) -> Self {
        match r {
            Ok(o) => Outcome::Heralded(o),
            Err(_) => Outcome::Indefinite,
        }
    }
}

/// `(a, b) ↦ (b, a)`: a half-wave plate at π/4, deterministic.
pub fn invert(c: &Coin) -> Coin {
    Coin::new(c.b(), c.a()).expect("swap of a valid coin is valid")
}

pub(crate) fn unit(c: &Coin) -> (Complex64, Complex64) {
    let n = c.norm_sqr().sqrt();
    (c.a() / n, c.b() / n)
}

pub fn product_coin(z1: &Coin, z2: &Coin, branch: ProductBranch) -> Option<Coin> {
    let (a1, b1) = unit(z1);
    let (a2, b2) = unit(z2);
    Coin::from_raw(a1 * a2 * branch.sign(), b1 * b2)
}

/// `P₊ = P₋ = (|a₁a₂|² + |b₁b₂|²) / (2 ‖u₁‖² ‖u₂‖²)`.
pub fn product_success_prob(z1: &Coin, z2: &Coin) -> f64 {
    let (a1, b1) = unit(z1);
    let (a2, b2) = unit(z2);
    0.5 * ((b1 * b2).norm_sqr() + (a1 * a2).norm_sqr())
}

/// Heralded product state weighted by its post-selection probability.
pub fn product_matrix(z1: &Coin, z2: &Coin, branch: ProductBranch, v: Visibility) -> Mat2 {
    let (a1, b1) = unit(z1);
    let (a2, b2) = unit(z2);
    let top = a1 * a2;
    let bottom = b1 * b2;
    Mat2::hermitian(
        0.5 * top.norm_sqr(),
        top * bottom.conj() * (0.5 * branch.sign() * v.get()),
        0.5 * bottom.norm_sqr(),
    )
}

pub fn product_output(
    z1: &Coin,
    z2: &Coin,
    branch: ProductBranch,
    v: Visibility,
) -> Result<BlockOutcome, Indefinite> {
    let m = product_matrix(z1, z2, branch, v);
    finish(m, product_coin(z1, z2, branch), || {
        critical_point("product", z1, z2)
    })
}

/// Ideal mean coin: S → `(a₁b₂ + a₂b₁, 2b₁b₂)`, I → `(2a₁a₂, a₁b₂ + a₂b₁)`.
pub fn sum_coin(z1: &Coin, z2: &Coin, branch: SumBranch) -> Option<Coin> {
    let (a, b) = mean_vector_of(z1, z2, branch);
    Coin::from_raw(a, b)
}

pub(crate) fn mean_vector_of(z1: &Coin, z2: &Coin, branch: SumBranch) -> (Complex64, Complex64) {
    let (a1, b1) = unit(z1);
    let (a2, b2) = unit(z2);
    let cross = a1 * b2 + a2 * b1;
    match branch {
        SumBranch::S => (cross, b1 * b2 * 2.0),
        SumBranch::I => (a1 * a2 * 2.0, cross),
    }
}

/// `P_S = (|a₁b₂+a₂b₁|²/4 + |b₁b₂|²) / (4D)`,
/// `P_I = (|a₁b₂+a₂b₁|² + 4|a₁a₂|²) / (16D)`.
pub fn sum_success_prob(z1: &Coin, z2: &Coin, branch: SumBranch) -> f64 {
    let (a1, b1) = unit(z1);
    let (a2, b2) = unit(z2);
    let cross = (a1 * b2 + a2 * b1).norm_sqr();
    match branch {
        SumBranch::S => (cross / 4.0 + (b1 * b2).norm_sqr()) / 4.0,
        SumBranch::I => (cross + 4.0 * (a1 * a2).norm_sqr()) / 16.0,
    }
}

/// Heralded mean-block state weighted by its post-selection probability.
pub fn sum_matrix(z1: &Coin, z2: &Coin, branch: SumBranch, v: Visibility) -> Mat2 {
    let (wa, wb) = mean_vector_of(z1, z2, branch);
    let (a1, b1) = unit(z1);
    let (a2, b2) = unit(z2);
    let u1 = Coin::new(a1, b1).expect("unit coin");
    let u2 = Coin::new(a2, b2).expect("unit coin");
    let s1 = branch.trigger_amplitude(&u1).norm_sqr();
    let s2 = branch.trigger_amplitude(&u2).norm_sqr();
    let v = v.get();
    let coherent = Mat2::outer(wa, wb).scale(v);
    let incoherent = (Mat2::outer(a2, b2).scale(s1) + Mat2::outer(a1, b1).scale(s2)).scale(1.0 - v);
    (coherent + incoherent).scale(1.0 / 16.0)
}

pub fn sum_output(
    z1: &Coin,
    z2: &Coin,
    branch: SumBranch,
    v: Visibility,
) -> Result<BlockOutcome, Indefinite> {
    let m = sum_matrix(z1, z2, branch, v);
    let name = match branch {
        SumBranch::S => "arithmetic mean",
        SumBranch::I => "harmonic mean",
    };
    finish(m, sum_coin(z1, z2, branch), || critical_point(name, z1, z2))
}

pub(crate) fn finish(
    m: Mat2,
    ideal: Option<Coin>,
    describe: impl FnOnce() -> String,
) -> Result<BlockOutcome, Indefinite> {
    match (DensityMatrix2::from_unnormalized(m), ideal) {
        (Some(state), Some(ideal)) => Ok(BlockOutcome {
            state,
            success_prob: m.trace().re,
            ideal,
        }),
        _ => Err(Indefinite { point: describe() }),
    }
}

pub(crate) fn critical_point(op: &str, z1: &Coin, z2: &Coin) -> String {
    alloc::format!("{op} of {} and {}", z1.value(), z2.value())
}

/// `r²/2`: heralding probability of the product near `(0, ∞)` inside a
/// disc of radius `r` in the variables `x = |z₁|`, `y = 1/|z₂|`.
pub fn prob_bound_product(r: f64) -> f64 {
    r * r / 2.0
}

/// `(r²/16)(3 + 4r²)`: the same bound for the mean blocks near their
/// critical points.
pub fn prob_bound_sum(r: f64) -> f64 {
    r * r / 16.0 * (3.0 + 4.0 * r * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::fidelity;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn v(x: f64) -> Visibility {
        Visibility::new(x).unwrap()
    }

    #[test]
    fn inversion() {
        let two = Coin::real(2.0);
        assert!(invert(&two).approx_eq(&Coin::real(0.5)));
        assert_eq!(invert(&Coin::ZERO), Coin::INFINITY);
        assert_eq!(invert(&invert(&two)), two);
    }

    #[test]
    fn product_probabilities() {
        assert_abs_diff_eq!(product_success_prob(&Coin::ZERO, &Coin::ZERO), 0.5);
        assert_eq!(product_success_prob(&Coin::ZERO, &Coin::INFINITY), 0.0);
        assert_abs_diff_eq!(
            product_success_prob(&Coin::ONE, &Coin::ONE),
            0.25,
            epsilon = 1e-15
        );
    }

    #[test]
    fn product_outputs() {
        let o =
            product_output(&Coin::ONE, &Coin::ONE, ProductBranch::Plus, Visibility::ONE).unwrap();
        assert!(o.ideal.approx_eq(&Coin::ONE));
        assert_abs_diff_eq!(o.success_prob, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(
            fidelity(&o.state, &Coin::ONE.density()),
            1.0,
            epsilon = 1e-12
        );

        let o = product_output(&Coin::ONE, &Coin::ONE, ProductBranch::Plus, v(0.84)).unwrap();
        let expect = Mat2::hermitian(0.5, c(0.42, 0.0), 0.5);
        assert!(o.state.matrix().max_abs_diff(&expect) <= 1e-15);

        let err = product_output(&Coin::ZERO, &Coin::INFINITY, ProductBranch::Plus, v(0.9));
        assert!(err.is_err());
        assert!(
            product_output(&Coin::INFINITY, &Coin::ZERO, ProductBranch::Minus, v(1.0)).is_err()
        );
    }

    #[test]
    fn sum_probabilities() {
        assert_abs_diff_eq!(
            sum_success_prob(&Coin::ZERO, &Coin::ZERO, SumBranch::S),
            0.25
        );
        assert_eq!(
            sum_success_prob(&Coin::ZERO, &Coin::ZERO, SumBranch::I),
            0.0
        );
        assert_abs_diff_eq!(
            sum_success_prob(&Coin::INFINITY, &Coin::INFINITY, SumBranch::I),
            0.25
        );
        assert_eq!(
            sum_success_prob(&Coin::INFINITY, &Coin::INFINITY, SumBranch::S),
            0.0
        );
    }

    #[test]
    fn sum_outputs() {
        let o = sum_output(&Coin::ONE, &Coin::real(-1.0), SumBranch::S, Visibility::ONE).unwrap();
        assert!(o.ideal.approx_eq(&Coin::ZERO));
        assert!(o.state.matrix().max_abs_diff(Coin::ZERO.density().matrix()) <= 1e-15);

        let z = Coin::finite(c(0.3, -1.2));
        for vis in [1.0, 0.84, 0.0] {
            let o = sum_output(&z, &z, SumBranch::I, v(vis)).unwrap();
            assert!(o.ideal.approx_eq(&z));
        }
        let o = sum_output(&z, &z, SumBranch::I, Visibility::ONE).unwrap();
        assert!(o.state.matrix().max_abs_diff(z.density().matrix()) <= 1e-12);

        // z₁ = z₂ = 1 at V = 0.84 gives N[[4 − 2·0.16, 2·1.84], [2·1.84, 2·1.84]]
        let o = sum_output(&Coin::ONE, &Coin::ONE, SumBranch::S, v(0.84)).unwrap();
        let raw = Mat2::hermitian(4.0 - 2.0 * 0.16, c(2.0 * 1.84, 0.0), 2.0 * 1.84);
        let expect = raw.scale(1.0 / raw.trace().re);
        assert!(o.state.matrix().max_abs_diff(&expect) <= 1e-15);

        assert!(sum_output(&Coin::INFINITY, &Coin::INFINITY, SumBranch::S, v(0.5)).is_err());
        assert!(sum_output(&Coin::ZERO, &Coin::ZERO, SumBranch::I, v(0.5)).is_err());
    }

    #[test]
    fn bounds() {
        assert_eq!(prob_bound_product(0.0), 0.0);
        assert_abs_diff_eq!(prob_bound_product(0.1), 0.005, epsilon = 1e-15);
        assert_abs_diff_eq!(prob_bound_sum(0.1), 0.0019, epsilon = 1e-15);
    }

    /// Main-text forms of the V-corrected matrices for finite z, written
    /// directly from the published entries.
    fn literal_product(z1: Complex64, z2: Complex64, sign: f64, v: f64) -> Mat2 {
        let p = z1 * z2;
        Mat2::hermitian(p.norm_sqr(), p * sign * v, 1.0)
    }

    fn literal_mean(z1: Complex64, z2: Complex64, branch: SumBranch, v: f64) -> Mat2 {
        let s = z1 + z2;
        let cross = (z1 * z2.conj() + z1.conj() * z2).re;
        let mixed = s.norm_sqr() - cross * (1.0 - v);
        match branch {
            SumBranch::S => Mat2::hermitian(mixed, s * (1.0 + v), 2.0 * (1.0 + v)),
            SumBranch::I => Mat2::hermitian(
                2.0 * (1.0 + v) * (z1 * z2).norm_sqr(),
                z1 * z2 * s.conj() * (1.0 + v),
                mixed,
            ),
        }
    }

    fn normalized(m: Mat2) -> Mat2 {
        m.scale(1.0 / m.trace().re)
    }

    fn arb_z() -> impl Strategy<Value = Complex64> {
        (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(r, i)| c(r, i))
    }

    fn arb_coin() -> impl Strategy<Value = Coin> {
        prop_oneof![
            8 => arb_z().prop_map(Coin::finite),
            1 => Just(Coin::ZERO),
            1 => Just(Coin::INFINITY),
        ]
    }

    proptest! {
        #[test]
        fn homogeneous_matches_literal_forms(z1 in arb_z(), z2 in arb_z(), vis in 0.0..=1.0f64) {
            let (u1, u2) = (Coin::finite(z1), Coin::finite(z2));
            for br in [ProductBranch::Plus, ProductBranch::Minus] {
                let o = product_output(&u1, &u2, br, v(vis)).unwrap();
                let lit = normalized(literal_product(z1, z2, br.sign(), vis));
                prop_assert!(o.state.matrix().max_abs_diff(&lit) <= 1e-12);
            }
            for br in [SumBranch::S, SumBranch::I] {
                if let Ok(o) = sum_output(&u1, &u2, br, v(vis)) {
                    let lit = normalized(literal_mean(z1, z2, br, vis));
                    prop_assert!(o.state.matrix().max_abs_diff(&lit) <= 1e-10);
                }
            }
        }

        #[test]
        fn branch_symmetry(u1 in arb_coin(), u2 in arb_coin()) {
            prop_assert!((product_success_prob(&u1, &u2) - product_success_prob(&u2, &u1)).abs() <= 1e-15);
            for br in [SumBranch::S, SumBranch::I] {
                prop_assert!((sum_success_prob(&u1, &u2, br) - sum_success_prob(&u2, &u1, br)).abs() <= 1e-15);
            }
        }

        #[test]
        fn antiproduct_negates(u1 in arb_coin(), u2 in arb_coin()) {
            if let (Some(p), Some(m)) = (
                product_coin(&u1, &u2, ProductBranch::Plus),
                product_coin(&u1, &u2, ProductBranch::Minus),
            ) {
                let neg = Coin::new(-p.a(), p.b()).unwrap();
                prop_assert!(m.approx_eq(&neg));
            }
        }

        #[test]
        fn unit_visibility_is_pure(u1 in arb_coin(), u2 in arb_coin()) {
            let outs = [
                product_output(&u1, &u2, ProductBranch::Plus, Visibility::ONE),
                product_output(&u1, &u2, ProductBranch::Minus, Visibility::ONE),
                sum_output(&u1, &u2, SumBranch::S, Visibility::ONE),
                sum_output(&u1, &u2, SumBranch::I, Visibility::ONE),
            ];
            for o in outs.iter().flatten() {
                prop_assert!(o.state.eigenvalues()[1] >= 1.0 - 1e-12);
                prop_assert!(fidelity(&o.state, &o.ideal.density()) >= 1.0 - 1e-12);
            }
        }

        #[test]
        fn unit_visibility_probability_matches_formula(u1 in arb_coin(), u2 in arb_coin()) {
            for br in [SumBranch::S, SumBranch::I] {
                let p = sum_success_prob(&u1, &u2, br);
                let o: Outcome = sum_output(&u1, &u2, br, Visibility::ONE).into();
                prop_assert!((o.success_prob() - p).abs() <= 1e-15);
            }
        }

        #[test]
        fn product_probability_ignores_visibility(u1 in arb_coin(), u2 in arb_coin(), vis in 0.0..=1.0f64) {
            let o: Outcome = product_output(&u1, &u2, ProductBranch::Plus, v(vis)).into();
            prop_assert!((o.success_prob() - product_success_prob(&u1, &u2)).abs() <= 1e-15);
        }

        #[test]
        fn product_coherence_linear_in_visibility(z1 in arb_z(), z2 in arb_z(), vis in 0.0..=1.0f64) {
            let (u1, u2) = (Coin::finite(z1), Coin::finite(z2));
            let full = product_output(&u1, &u2, ProductBranch::Plus, Visibility::ONE).unwrap().state;
            let part = product_output(&u1, &u2, ProductBranch::Plus, v(vis)).unwrap().state;
            prop_assert!((full.get(0, 0) - part.get(0, 0)).norm() <= 1e-14);
            prop_assert!((full.get(0, 1) * vis - part.get(0, 1)).norm() <= 1e-14);
        }

        #[test]
        fn harmonic_arithmetic_duality(u1 in arb_coin(), u2 in arb_coin()) {
            let h = sum_coin(&u1, &u2, SumBranch::I);
            let s = sum_coin(&invert(&u1), &invert(&u2), SumBranch::S).map(|c| invert(&c));
            match (h, s) {
                (Some(h), Some(s)) => prop_assert!(h.approx_eq(&s)),
                (None, None) => {}
                _ => prop_assert!(false, "indefinite sets differ"),
            }
        }

        #[test]
        fn outputs_are_density_matrices(u1 in arb_coin(), u2 in arb_coin(), vis in 0.0..=1.0f64) {
            for o in [
                sum_output(&u1, &u2, SumBranch::S, v(vis)),
                sum_output(&u1, &u2, SumBranch::I, v(vis)),
                product_output(&u1, &u2, ProductBranch::Minus, v(vis)),
            ].iter().flatten() {
                prop_assert!(DensityMatrix2::new(*o.state.matrix()).is_ok());
                prop_assert!((0.0..=1.0).contains(&o.success_prob));
            }
        }
    }
}
