//! Elementary Jones matrices in the HV and LR bases, plus the 2×2 complex
//! matrix carrier used everywhere else.

use num_complex::Complex;

use crate::scalar::Scalar;

/// 2×2 complex matrix; the universal carrier for Jones matrices in either
/// basis. All constructors in this module produce SU(2) members (unitary,
/// determinant one) up to rounding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexMat2<T: Scalar> {
    pub m11: Complex<T>,
    pub m12: Complex<T>,
    pub m21: Complex<T>,
    pub m22: Complex<T>,
}

impl<T: Scalar> ComplexMat2<T> {
    pub fn new(m11: Complex<T>, m12: Complex<T>, m21: Complex<T>, m22: Complex<T>) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub fn identity() -> Self {
        let one = Complex::new(T::one(), T::zero());
        let zero = Complex::new(T::zero(), T::zero());
        Self::new(one, zero, zero, one)
    }

    pub fn zero() -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        Self::new(zero, zero, zero, zero)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::new(self.m11.conj(), self.m21.conj(), self.m12.conj(), self.m22.conj())
    }

    pub fn det(&self) -> Complex<T> {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> Complex<T> {
        self.m11 + self.m22
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.m11 + other.m11,
            self.m12 + other.m12,
            self.m21 + other.m21,
            self.m22 + other.m22,
        )
    }

    /// Largest entrywise absolute difference; the metric behind every
    /// matrix-equality tolerance in the test suite.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let d = |a: Complex<T>, b: Complex<T>| (a - b).norm();
        d(self.m11, other.m11)
            .max(d(self.m12, other.m12))
            .max(d(self.m21, other.m21))
            .max(d(self.m22, other.m22))
    }

    /// Entrywise deviation of `M†M` from the identity.
    pub fn unitarity_defect(&self) -> T {
        let p = self.adjoint() * *self;
        p.max_abs_diff(&Self::identity())
    }
}

impl<T: Scalar> std::ops::Mul for ComplexMat2<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.m11 * rhs.m11 + self.m12 * rhs.m21,
            self.m11 * rhs.m12 + self.m12 * rhs.m22,
            self.m21 * rhs.m11 + self.m22 * rhs.m21,
            self.m21 * rhs.m12 + self.m22 * rhs.m22,
        )
    }
}

/// Rotation angle θ. Radians internally; degrees at every I/O boundary,
/// canonicalized to [0°, 360°). The physical period of a rotated plate
/// is 180°.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Angle<T: Scalar>(T);

impl<T: Scalar> Angle<T> {
    pub fn from_radians(rad: T) -> Self {
        Self(rad)
    }

    pub fn from_degrees(deg: T) -> Self {
        Self(deg * T::PI() / T::c(180.0))
    }

    pub fn radians(&self) -> T {
        self.0
    }

    /// Degrees, canonical in [0°, 360°).
    pub fn degrees(&self) -> T {
        let full = T::c(360.0);
        let d = (self.0 * T::c(180.0) / T::PI()) % full;
        if d < T::zero() {
            d + full
        } else {
            d
        }
    }

    pub fn neg(&self) -> Self {
        Self(-self.0)
    }
}

/// Retardance φ in radians. No range restriction: sweeps cover [0, 2π] and
/// beyond.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct PhaseShift<T: Scalar>(pub T);

impl<T: Scalar> PhaseShift<T> {
    pub fn radians(&self) -> T {
        self.0
    }
}

/// R(θ) = [[cos θ, sin θ], [−sin θ, cos θ]].
pub fn rotation_matrix<T: Scalar>(theta: Angle<T>) -> ComplexMat2<T> {
    let (s, c) = theta.radians().sin_cos();
    let re = |x: T| Complex::new(x, T::zero());
    ComplexMat2::new(re(c), re(s), re(-s), re(c))
}

/// Retarder in the HV basis: R(−θ) · diag(e^{iφ/2}, e^{−iφ/2}) · R(θ).
pub fn retarder_hv<T: Scalar>(phi: PhaseShift<T>, theta: Angle<T>) -> ComplexMat2<T> {
    let half = phi.radians() / T::c(2.0);
    let e = Complex::new(T::zero(), half).exp();
    let zero = Complex::new(T::zero(), T::zero());
    let diag = ComplexMat2::new(e, zero, zero, e.conj());
    rotation_matrix(theta.neg()) * diag * rotation_matrix(theta)
}

/// Retarder in the LR basis:
/// [[cos(φ/2), i sin(φ/2) e^{2iθ}], [i sin(φ/2) e^{−2iθ}, cos(φ/2)]].
pub fn retarder_lr<T: Scalar>(phi: PhaseShift<T>, theta: Angle<T>) -> ComplexMat2<T> {
    let (s, c) = (phi.radians() / T::c(2.0)).sin_cos();
    let e2t = Complex::new(T::zero(), T::c(2.0) * theta.radians()).exp();
    let i = Complex::new(T::zero(), T::one());
    let is = i * Complex::new(s, T::zero());
    let cc = Complex::new(c, T::zero());
    ComplexMat2::new(cc, is * e2t, is * e2t.conj(), cc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisDirection {
    HvToLr,
    LrToHv,
}

fn w_matrix<T: Scalar>() -> ComplexMat2<T> {
    let r = T::c(1.0 / std::f64::consts::SQRT_2);
    let re = Complex::new(r, T::zero());
    let im = Complex::new(T::zero(), r);
    // W = (1/√2) [[1, 1], [−i, i]]
    ComplexMat2::new(re, re, -im, im)
}

/// Change of basis via the unitary W connecting HV and LR:
/// `HvToLr` returns W⁻¹ M W, `LrToHv` returns W M W⁻¹.
pub fn basis_change<T: Scalar>(m: &ComplexMat2<T>, direction: BasisDirection) -> ComplexMat2<T> {
    let w = w_matrix::<T>();
    let winv = w.adjoint(); // W is unitary
    match direction {
        BasisDirection::HvToLr => winv * *m * w,
        BasisDirection::LrToHv => w * *m * winv,
    }
}

/// The mirror in the LR basis: σₓ = [[0, 1], [1, 0]].
pub fn mirror_lr<T: Scalar>() -> ComplexMat2<T> {
    let one = Complex::new(T::one(), T::zero());
    let zero = Complex::new(T::zero(), T::zero());
    ComplexMat2::new(zero, one, one, zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type M = ComplexMat2<f64>;

    fn deg(d: f64) -> Angle<f64> {
        Angle::from_degrees(d)
    }

    #[test]
    fn rotation_basics() {
        let id = rotation_matrix(deg(0.0));
        assert!(id.max_abs_diff(&M::identity()) < 1e-15);

        let r90 = rotation_matrix(deg(90.0));
        let want = M::new(
            Complex::new(0.0, 0.0),
            Complex::new(1.0, 0.0),
            Complex::new(-1.0, 0.0),
            Complex::new(0.0, 0.0),
        );
        assert!(r90.max_abs_diff(&want) < 1e-15);

        let r45 = rotation_matrix(deg(45.0));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r45.m11.re - h).abs() < 1e-15 && (r45.m12.re - h).abs() < 1e-15);
        assert!((r45.det() - Complex::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn retarder_hv_basics() {
        let j = retarder_hv(PhaseShift(std::f64::consts::PI), deg(0.0));
        assert!((j.m11 - Complex::new(0.0, 1.0)).norm() < 1e-15);
        assert!((j.m22 - Complex::new(0.0, -1.0)).norm() < 1e-15);
        assert!(j.m12.norm() < 1e-15 && j.m21.norm() < 1e-15);

        let id = retarder_hv(PhaseShift(0.0), deg(123.4));
        assert!(id.max_abs_diff(&M::identity()) < 1e-15);

        let q = retarder_hv(PhaseShift(std::f64::consts::FRAC_PI_2), deg(0.0));
        let e = Complex::new(0.0, std::f64::consts::FRAC_PI_4).exp();
        assert!((q.m11 - e).norm() < 1e-15 && (q.m22 - e.conj()).norm() < 1e-15);
    }

    #[test]
    fn retarder_lr_half_and_quarter_wave() {
        let h = retarder_lr(PhaseShift(std::f64::consts::PI), deg(0.0));
        let i = Complex::new(0.0, 1.0);
        assert!(h.m11.norm() < 1e-15 && h.m22.norm() < 1e-15);
        assert!((h.m12 - i).norm() < 1e-15 && (h.m21 - i).norm() < 1e-15);

        let q = retarder_lr(PhaseShift(std::f64::consts::FRAC_PI_2), deg(0.0));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((q.m11.re - r).abs() < 1e-15 && (q.m12 - i.scale(r)).norm() < 1e-15);
    }

    #[test]
    fn retarder_lr_matches_basis_changed_hv() {
        let phi = PhaseShift(0.3);
        let th = deg(17.0);
        let via_basis = basis_change(&retarder_hv(phi, th), BasisDirection::HvToLr);
        assert!(retarder_lr(phi, th).max_abs_diff(&via_basis) < 1e-12);
    }

    #[test]
    fn basis_change_identity_and_eq7() {
        let id = M::identity();
        assert!(basis_change(&id, BasisDirection::HvToLr).max_abs_diff(&id) < 1e-15);
        assert!(basis_change(&id, BasisDirection::LrToHv).max_abs_diff(&id) < 1e-15);

        let hv = retarder_hv(PhaseShift(std::f64::consts::PI), deg(0.0));
        let lr = basis_change(&hv, BasisDirection::HvToLr);
        let i = Complex::new(0.0, 1.0);
        let want = M::new(Complex::new(0.0, 0.0), i, i, Complex::new(0.0, 0.0));
        assert!(lr.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn mirror_is_sigma_x_involution() {
        let m = mirror_lr::<f64>();
        assert!((m.m12 - Complex::new(1.0, 0.0)).norm() == 0.0);
        assert!((m.m21 - Complex::new(1.0, 0.0)).norm() == 0.0);
        assert!(m.m11.norm() == 0.0 && m.m22.norm() == 0.0);
        assert!((m * m).max_abs_diff(&M::identity()) == 0.0);
        // pure-L (1,0) reflects to pure-R (0,1)
        assert_eq!(m.m21, Complex::new(1.0, 0.0));
        assert_eq!(m.m11, Complex::new(0.0, 0.0));
    }

    #[test]
    fn angle_degree_round_trip() {
        for d in [0.0, 52.2, 179.95, 336.7, 359.9] {
            let a = Angle::<f64>::from_degrees(d);
            assert!((a.degrees() - d).abs() < 1e-12, "{d}");
        }
        assert!((Angle::<f64>::from_degrees(-10.0).degrees() - 350.0).abs() < 1e-12);
        assert!((Angle::<f64>::from_degrees(370.0).degrees() - 10.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn unitarity_and_det(phi in -10.0..10.0f64, th in -5.0..5.0f64) {
            for m in [
                rotation_matrix(Angle::from_radians(th)),
                retarder_hv(PhaseShift(phi), Angle::from_radians(th)),
                retarder_lr(PhaseShift(phi), Angle::from_radians(th)),
            ] {
                prop_assert!(m.unitarity_defect() < 1e-12);
                prop_assert!((m.det() - Complex::new(1.0, 0.0)).norm() < 1e-12);
                prop_assert!((m.m11.norm_sqr() + m.m12.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn theta_period_pi(phi in -10.0..10.0f64, th in -5.0..5.0f64) {
            let a = retarder_lr(PhaseShift(phi), Angle::from_radians(th));
            let b = retarder_lr(PhaseShift(phi), Angle::from_radians(th + std::f64::consts::PI));
            prop_assert!(a.max_abs_diff(&b) < 1e-14);
        }

        #[test]
        fn lr_equals_basis_changed_hv(phi in -10.0..10.0f64, th in -5.0..5.0f64) {
            let lr = retarder_lr(PhaseShift(phi), Angle::from_radians(th));
            let via = basis_change(&retarder_hv(PhaseShift(phi), Angle::from_radians(th)), BasisDirection::HvToLr);
            prop_assert!(lr.max_abs_diff(&via) < 1e-12);
        }

        #[test]
        fn negative_phase_is_adjoint(phi in -10.0..10.0f64, th in -5.0..5.0f64) {
            let a = retarder_lr(PhaseShift(-phi), Angle::from_radians(th));
            let b = retarder_lr(PhaseShift(phi), Angle::from_radians(th)).adjoint();
            prop_assert!(a.max_abs_diff(&b) < 1e-14);
        }

        #[test]
        fn basis_round_trip(phi in -10.0..10.0f64, th in -5.0..5.0f64) {
            let m = retarder_hv(PhaseShift(phi), Angle::from_radians(th));
            let rt = basis_change(&basis_change(&m, BasisDirection::HvToLr), BasisDirection::LrToHv);
            prop_assert!(rt.max_abs_diff(&m) < 1e-14);
        }
    }
}
