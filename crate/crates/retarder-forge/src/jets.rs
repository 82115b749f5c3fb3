//! Exact higher-order derivatives of the composite Jones matrix with respect
//! to φ, via truncated Taylor-series (jet) arithmetic, plus an independent
//! finite-difference oracle used to cross-check the jets.

use num_complex::Complex;

use crate::jones::{mirror_lr, ComplexMat2, PhaseShift};
use crate::scalar::Scalar;
use crate::sequences::{sequence_matrix, PlateSpec, SequenceSpec};

/// Default maximum derivative order; covers the N = 13 designs with margin.
pub const DEFAULT_MAX_ORDER: usize = 16;

/// Truncated Taylor coefficients of a matrix-valued function of φ about an
/// expansion point. Derivative k equals k! × coefficient k.
#[derive(Clone, Debug)]
pub struct JetSeries<T: Scalar> {
    pub expansion_point: PhaseShift<T>,
    pub coefficients: Vec<ComplexMat2<T>>,
}

impl<T: Scalar> JetSeries<T> {
    /// Constant series (all derivatives zero).
    pub fn constant(m: ComplexMat2<T>, expansion_point: PhaseShift<T>, order: usize) -> Self {
        let mut coefficients = vec![ComplexMat2::zero(); order + 1];
        coefficients[0] = m;
        Self { expansion_point, coefficients }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Truncated Cauchy product; both series must share expansion point and
    /// order.
    pub fn mul(&self, rhs: &Self) -> Self {
        let order = self.order().min(rhs.order());
        let mut coefficients = vec![ComplexMat2::zero(); order + 1];
        for k in 0..=order {
            let mut c = ComplexMat2::zero();
            for j in 0..=k {
                c = c.add(&(self.coefficients[j] * rhs.coefficients[k - j]));
            }
            coefficients[k] = c;
        }
        Self { expansion_point: self.expansion_point, coefficients }
    }

    /// k-th derivative of the full matrix at the expansion point.
    pub fn derivative(&self, k: usize) -> ComplexMat2<T> {
        let mut f = T::one();
        for j in 2..=k {
            f *= T::c(j as f64);
        }
        self.coefficients[k].scale(Complex::new(f, T::zero()))
    }

    /// k-th derivative of the J₁₂ entry at the expansion point.
    pub fn j12_derivative(&self, k: usize) -> Complex<T> {
        self.derivative(k).m12
    }
}

/// Closed-form jet of a single plate 𝕁_θ(cφ) about the expansion point:
/// d^n/dφ^n cos(cφ/2) = (c/2)^n cos(cφ/2 + nπ/2) and likewise for sin, so
/// the coefficients are phase-shifted sin/cos values scaled by (c/2)^n / n!.
pub fn jet_of_plate<T: Scalar>(
    plate: &PlateSpec<T>,
    expansion_point: PhaseShift<T>,
    order: usize,
) -> JetSeries<T> {
    jet_of_plate_signed(plate, expansion_point, order, false)
}

fn jet_of_plate_signed<T: Scalar>(
    plate: &PlateSpec<T>,
    expansion_point: PhaseShift<T>,
    order: usize,
    negate_theta: bool,
) -> JetSeries<T> {
    let c = plate.retardance_scale();
    let half = T::c(0.5);
    let x = c * expansion_point.radians() * half;
    let theta = if negate_theta { plate.theta.neg() } else { plate.theta };
    let e2t = Complex::new(T::zero(), T::c(2.0) * theta.radians()).exp();
    let i = Complex::new(T::zero(), T::one());
    let mut coefficients = Vec::with_capacity(order + 1);
    let mut fact = T::one();
    for n in 0..=order {
        if n > 1 {
            fact *= T::c(n as f64);
        }
        let scale = (c * half).powi(n as i32) / fact;
        let arg = x + T::c(n as f64) * T::FRAC_PI_2();
        let (s, co) = arg.sin_cos();
        let diag = Complex::new(scale * co, T::zero());
        let off = i * Complex::new(scale * s, T::zero());
        coefficients.push(ComplexMat2::new(diag, off * e2t, off * e2t.conj(), diag));
    }
    JetSeries { expansion_point, coefficients }
}

/// Jet of the full composite matrix: truncated product of plate jets in
/// propagation order, with σₓ entering as a constant series for mirrored
/// sequences (including the final forward-frame flip, matching
/// [`sequence_matrix`]).
pub fn jet_of_sequence<T: Scalar>(
    seq: &SequenceSpec<T>,
    expansion_point: PhaseShift<T>,
    order: usize,
) -> JetSeries<T> {
    let sx = JetSeries::constant(mirror_lr(), expansion_point, order);
    let mut jet = JetSeries::constant(ComplexMat2::identity(), expansion_point, order);
    for (idx, p) in seq.plates.iter().enumerate() {
        if seq.mirror_after == Some(idx) {
            jet = sx.mul(&jet);
        }
        jet = jet_of_plate_signed(p, expansion_point, order, false).mul(&jet);
    }
    if seq.mirror_after == Some(seq.plates.len()) {
        jet = sx.mul(&jet);
    }
    if seq.mirrored {
        jet = sx.mul(&jet);
        for p in seq.plates.iter().rev() {
            jet = jet_of_plate_signed(p, expansion_point, order, true).mul(&jet);
        }
    }
    if seq.mirrored || seq.mirror_after.is_some() {
        jet = sx.mul(&jet);
    }
    jet
}

/// Independent derivative oracle: Richardson-extrapolated central finite
/// differences of J₁₂, orders 1–4.
pub fn finite_difference_oracle<T: Scalar>(
    seq: &SequenceSpec<T>,
    phi0: PhaseShift<T>,
    k: usize,
) -> Complex<T> {
    assert!((1..=4).contains(&k), "oracle supports orders 1..=4, got {k}");
    let f = |phi: T| sequence_matrix(seq, PhaseShift(phi)).m12;
    let p = phi0.radians();
    let stencil = |h: T| -> Complex<T> {
        let cx = |x: T| Complex::new(x, T::zero());
        match k {
            1 => (f(p + h) - f(p - h)) / cx(T::c(2.0) * h),
            2 => (f(p + h) - f(p).scale(T::c(2.0)) + f(p - h)) / cx(h * h),
            3 => {
                (f(p + T::c(2.0) * h) - f(p + h).scale(T::c(2.0)) + f(p - h).scale(T::c(2.0))
                    - f(p - T::c(2.0) * h))
                    / cx(T::c(2.0) * h * h * h)
            }
            _ => {
                (f(p + T::c(2.0) * h) - f(p + h).scale(T::c(4.0)) + f(p).scale(T::c(6.0))
                    - f(p - h).scale(T::c(4.0))
                    + f(p - T::c(2.0) * h))
                    / cx(h * h * h * h)
            }
        }
    };
    // Three step sizes, two Richardson levels: O(h²) truncation → O(h⁶).
    let h0 = T::c(0.05);
    let d0 = stencil(h0);
    let d1 = stencil(h0 * T::c(0.5));
    let d2 = stencil(h0 * T::c(0.25));
    let r10 = (d1.scale(T::c(4.0)) - d0).unscale(T::c(3.0));
    let r11 = (d2.scale(T::c(4.0)) - d1).unscale(T::c(3.0));
    (r11.scale(T::c(16.0)) - r10).unscale(T::c(15.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jones::Angle;
    use crate::sequences::{build_sequence, Family, Target};
    use proptest::prelude::*;

    const PI: f64 = std::f64::consts::PI;

    fn degs(ds: &[f64]) -> Vec<Angle<f64>> {
        ds.iter().map(|&d| Angle::from_degrees(d)).collect()
    }

    #[test]
    fn half_plate_jet_closed_form() {
        let p = PlateSpec::half(Angle::from_degrees(0.0));
        let jet = jet_of_plate(&p, PhaseShift(PI), 4);
        assert!(jet.coefficients[0].max_abs_diff(&Target::Half.matrix()) < 1e-15);
        // ∂φ J₁₂ = (i/2) cos(φ/2) = 0 at π; ∂²φ J₁₂ = −(i/4) sin(φ/2) = −i/4.
        assert!(jet.j12_derivative(1).norm() < 1e-15);
        assert!((jet.j12_derivative(2) - Complex::new(0.0, -0.25)).norm() < 1e-15);
    }

    #[test]
    fn single_plate_sequence_matches_plate_jet() {
        let seq = build_sequence(Family::A, &degs(&[37.0])).unwrap();
        let js = jet_of_sequence(&seq, PhaseShift(PI), 6);
        let jp = jet_of_plate(&seq.plates[0], PhaseShift(PI), 6);
        for k in 0..=6 {
            assert!(js.coefficients[k].max_abs_diff(&jp.coefficients[k]) < 1e-15);
        }
    }

    #[test]
    fn coefficient_zero_matches_sequence_matrix() {
        let seq = build_sequence(Family::C, &degs(&[26.5, 55.1, 122.7])).unwrap();
        let jet = jet_of_sequence(&seq, PhaseShift(PI), 4);
        let m = sequence_matrix(&seq, PhaseShift(PI));
        assert!(jet.coefficients[0].max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn frozen_derivatives_a5_and_c2() {
        // Regression values computed independently (analytic series in one
        // implementation, FFT spectral differentiation in another).
        let a5 = build_sequence(Family::A, &degs(&[0.0, 52.2, 336.7, 336.7, 52.2])).unwrap();
        let jet = jet_of_sequence(&a5, PhaseShift(PI), 4);
        let d2 = jet.j12_derivative(2);
        assert!((d2 - Complex::new(0.0008739906466594535, -1.3403132398948081e-6)).norm() < 1e-12);
        let d4 = jet.j12_derivative(4);
        assert!((d4 - Complex::new(-0.7308324190295901, 0.002700242641521161)).norm() < 1e-11);

        let c2 = build_sequence(Family::C, &degs(&[30.0, 150.0])).unwrap();
        let jet = jet_of_sequence(&c2, PhaseShift(PI), 2);
        assert!(jet.j12_derivative(1).norm() < 1e-14);
        assert!((jet.j12_derivative(2) - Complex::new(-0.4330127018922195, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn oracle_matches_analytic_single_plate() {
        let seq = build_sequence(Family::A, &degs(&[0.0])).unwrap();
        let d1 = finite_difference_oracle(&seq, PhaseShift(PI), 1);
        assert!(d1.norm() < 1e-8);
        let d2 = finite_difference_oracle(&seq, PhaseShift(PI), 2);
        assert!((d2 - Complex::new(0.0, -0.25)).norm() < 1e-6);
    }

    fn random_custom_seq(rng_vals: &[(f64, bool)], mirrored: bool) -> SequenceSpec<f64> {
        let plates = rng_vals
            .iter()
            .map(|&(th, q)| {
                let a = Angle::from_radians(th);
                if q {
                    PlateSpec::quarter(a)
                } else {
                    PlateSpec::half(a)
                }
            })
            .collect();
        SequenceSpec::custom(plates, mirrored, Target::Half)
    }

    proptest! {
        #[test]
        fn jet_agrees_with_oracle(
            plates in proptest::collection::vec((0.0..PI, prop::bool::ANY), 1..6),
            mirrored in prop::bool::ANY,
            phi0 in 1.0..5.0f64,
        ) {
            let seq = random_custom_seq(&plates, mirrored);
            let jet = jet_of_sequence(&seq, PhaseShift(phi0), 4);
            for k in 1..=4 {
                let a = jet.j12_derivative(k);
                let b = finite_difference_oracle(&seq, PhaseShift(phi0), k);
                let tol = 1e-6 * a.norm().max(1.0);
                prop_assert!((a - b).norm() < tol, "k={k} jet={a} fd={b}");
            }
        }

        #[test]
        fn leibniz_two_plate_convolution(
            t1 in 0.0..PI, t2 in 0.0..PI, q1 in prop::bool::ANY, q2 in prop::bool::ANY,
        ) {
            let seq = random_custom_seq(&[(t1, q1), (t2, q2)], false);
            let js = jet_of_sequence(&seq, PhaseShift(PI), 6);
            let j1 = jet_of_plate(&seq.plates[0], PhaseShift(PI), 6);
            let j2 = jet_of_plate(&seq.plates[1], PhaseShift(PI), 6);
            let prod = j2.mul(&j1);
            for k in 0..=6 {
                prop_assert!(js.coefficients[k].max_abs_diff(&prod.coefficients[k]) < 1e-13);
            }
        }

        #[test]
        fn family_a_odd_derivatives_vanish(
            ths in proptest::collection::vec(0.0..PI, 1..8),
        ) {
            let n = if ths.len() % 2 == 0 { ths.len() - 1 } else { ths.len() };
            let angles: Vec<Angle<f64>> = ths[..n].iter().map(|&t| Angle::from_radians(t)).collect();
            let seq = build_sequence(Family::A, &angles).unwrap();
            let jet = jet_of_sequence(&seq, PhaseShift(PI), 7);
            let omega = seq.derivative_scale();
            for k in [1usize, 3] {
                prop_assert!(jet.j12_derivative(k).norm() < 1e-12, "k={k}");
            }
            // rounding at high orders is amplified by ω^k, so bound the
            // normalized magnitude there
            for k in [5usize, 7] {
                let d = jet.j12_derivative(k).norm() / omega.powi(k as i32).max(1.0);
                prop_assert!(d < 1e-12, "k={k}");
            }
        }
    }
}
