//! Composite retarder stacks: the four design families, mirror folding, and
//! evaluation of the total Jones matrix in the LR basis.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::jones::{mirror_lr, retarder_lr, Angle, ComplexMat2, PhaseShift};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlateKind {
    Half,
    Quarter,
}

impl PlateKind {
    /// Retardance relative to the swept phase φ: a half plate contributes
    /// 𝕁_θ(φ), a quarter plate 𝕁_θ(φ/2) (same material, half thickness).
    pub fn retardance_scale<T: Scalar>(self) -> T {
        match self {
            PlateKind::Half => T::one(),
            PlateKind::Quarter => T::c(0.5),
        }
    }
}

/// One wave plate of a composite stack.
#[derive(Clone, Copy, Debug)]
pub struct PlateSpec<T: Scalar> {
    pub kind: PlateKind,
    pub theta: Angle<T>,
}

impl<T: Scalar> PlateSpec<T> {
    pub fn half(theta: Angle<T>) -> Self {
        Self { kind: PlateKind::Half, theta }
    }

    pub fn quarter(theta: Angle<T>) -> Self {
        Self { kind: PlateKind::Quarter, theta }
    }

    pub fn retardance_scale(&self) -> T {
        self.kind.retardance_scale()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    A,
    B,
    C,
    D,
    Custom,
}

impl std::str::FromStr for Family {
    type Err = SequenceError;

    fn from_str(s: &str) -> Result<Self, SequenceError> {
        match s {
            "a" => Ok(Family::A),
            "b" => Ok(Family::B),
            "c" => Ok(Family::C),
            "d" => Ok(Family::D),
            "custom" => Ok(Family::Custom),
            other => Err(SequenceError::UnknownFamily(other.to_string())),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Family::A => "a",
            Family::B => "b",
            Family::C => "c",
            Family::D => "d",
            Family::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// The retarder a sequence is meant to emulate at φ = π.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Half,
    QuarterPlus,
    QuarterMinus,
}

impl Target {
    /// Target Jones matrix in the LR basis: J₀(π) or J₀(±π/2).
    pub fn matrix<T: Scalar>(self) -> ComplexMat2<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        match self {
            Target::Half => ComplexMat2::new(zero, i, i, zero),
            Target::QuarterPlus | Target::QuarterMinus => {
                let r = T::c(1.0 / std::f64::consts::SQRT_2);
                let re = Complex::new(r, T::zero());
                let im = match self {
                    Target::QuarterPlus => Complex::new(T::zero(), r),
                    _ => Complex::new(T::zero(), -r),
                };
                ComplexMat2::new(re, im, im, re)
            }
        }
    }

    /// Nominal design point; conditions are always evaluated at φ = π, also
    /// for mixed half/quarter stacks.
    pub fn nominal_phase<T: Scalar>(self) -> PhaseShift<T> {
        PhaseShift(T::PI())
    }

    pub fn opposite_sign(self) -> Self {
        match self {
            Target::Half => Target::Half,
            Target::QuarterPlus => Target::QuarterMinus,
            Target::QuarterMinus => Target::QuarterPlus,
        }
    }
}

impl std::str::FromStr for Target {
    type Err = SequenceError;

    fn from_str(s: &str) -> Result<Self, SequenceError> {
        match s {
            "half" => Ok(Target::Half),
            "quarter_plus" => Ok(Target::QuarterPlus),
            "quarter_minus" => Ok(Target::QuarterMinus),
            other => Err(SequenceError::UnknownTarget(other.to_string())),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SequenceError {
    #[error("family {family} needs at least {min} plates, got {got}")]
    ArityMismatch { family: Family, min: usize, got: usize },
    #[error("structural violation for family {family}: {reason}")]
    StructuralViolation { family: Family, reason: String },
    #[error("mirror_expand called on a non-mirrored sequence")]
    NotMirrored,
    #[error("unknown family `{0}` (expected a, b, c, d, or custom)")]
    UnknownFamily(String),
    #[error("unknown target `{0}` (expected half, quarter_plus, or quarter_minus)")]
    UnknownTarget(String),
    #[error("target {target} is not valid for family {family}")]
    TargetMismatch { family: Family, target: String },
}

/// Ordered stack of plates, evaluated first-to-last in propagation order.
///
/// Three forms exist:
/// - plain (`mirrored = false`, `mirror_after = None`);
/// - folded mirrored (`mirrored = true`): the stack terminates in a mirror,
///   light traverses the plates twice, the return pass seeing angle −θ;
/// - expanded (`mirror_after = Some(k)`): an explicit 2N-plate unrolling of a
///   folded form with the σₓ marker after plate `k`.
///
/// Mirrored (folded or expanded) evaluation reports the round-trip matrix in
/// the forward frame, i.e. with the mirror's handedness flip undone by a final
/// σₓ, so a mirrored half-wave stack compares directly against J₀(π).
#[derive(Clone, Debug)]
pub struct SequenceSpec<T: Scalar> {
    pub plates: Vec<PlateSpec<T>>,
    pub mirrored: bool,
    pub mirror_after: Option<usize>,
    pub family: Family,
    pub target: Target,
}

impl<T: Scalar> SequenceSpec<T> {
    /// Free-form stack with no family structure enforced.
    pub fn custom(plates: Vec<PlateSpec<T>>, mirrored: bool, target: Target) -> Self {
        Self { plates, mirrored, mirror_after: None, family: Family::Custom, target }
    }

    pub fn n(&self) -> usize {
        self.plates.len()
    }

    /// Every plate angle shifted by a common offset; used for the
    /// global-rotation symmetry.
    pub fn rotated_by(&self, delta: Angle<T>) -> Self {
        let mut out = self.clone();
        for p in &mut out.plates {
            p.theta = Angle::from_radians(p.theta.radians() + delta.radians());
        }
        out
    }

    /// Half the total retardance scale of the full physical pass, in units of
    /// φ: the derivative of the band-limited J₁₂ at order k is bounded by
    /// this value to the k-th power, which makes it the natural
    /// normalization for derivative magnitudes.
    pub fn derivative_scale(&self) -> T {
        let sum: T = self.plates.iter().map(|p| p.retardance_scale()).sum();
        let passes = if self.mirrored { T::c(2.0) } else { T::one() };
        sum * passes / T::c(2.0)
    }
}

fn structural_error<T: Scalar>(family: Family, reason: &str) -> Result<SequenceSpec<T>, SequenceError> {
    Err(SequenceError::StructuralViolation { family, reason: reason.to_string() })
}

/// Build a family sequence from its Table-style angle list (θ₁ first, in
/// propagation order). The target defaults to J₀(π) for the half-wave
/// families (a, c) and J₀(+π/2) for the quarter-wave families (b, d).
pub fn build_sequence<T: Scalar>(
    family: Family,
    angles: &[Angle<T>],
) -> Result<SequenceSpec<T>, SequenceError> {
    let n = angles.len();
    let arity = |min: usize| SequenceError::ArityMismatch { family, min, got: n };
    match family {
        Family::A => {
            if n < 1 {
                return Err(arity(1));
            }
            if n % 2 == 0 {
                return structural_error(family, "plate count must be odd");
            }
            let plates = angles.iter().map(|&a| PlateSpec::half(a)).collect();
            Ok(SequenceSpec { plates, mirrored: false, mirror_after: None, family, target: Target::Half })
        }
        Family::B => {
            if n < 2 {
                return Err(arity(2));
            }
            let first_deg = angles[0].degrees() % T::c(180.0);
            let off = first_deg.min(T::c(180.0) - first_deg);
            if off > T::c(1e-6) {
                return structural_error(family, "first (quarter) plate must sit at θ = 0");
            }
            let mut plates = vec![PlateSpec::quarter(angles[0])];
            plates.extend(angles[1..].iter().map(|&a| PlateSpec::half(a)));
            Ok(SequenceSpec { plates, mirrored: false, mirror_after: None, family, target: Target::QuarterPlus })
        }
        Family::C => {
            if n < 2 {
                return Err(arity(2));
            }
            let mut plates: Vec<PlateSpec<T>> =
                angles[..n - 1].iter().map(|&a| PlateSpec::half(a)).collect();
            plates.push(PlateSpec::quarter(angles[n - 1]));
            Ok(SequenceSpec { plates, mirrored: true, mirror_after: None, family, target: Target::Half })
        }
        Family::D => {
            if n < 2 {
                return Err(arity(2));
            }
            let mut plates = vec![PlateSpec::quarter(angles[0])];
            plates.extend(angles[1..n - 1].iter().map(|&a| PlateSpec::half(a)));
            plates.push(PlateSpec::quarter(angles[n - 1]));
            Ok(SequenceSpec { plates, mirrored: true, mirror_after: None, family, target: Target::QuarterPlus })
        }
        Family::Custom => {
            structural_error(family, "custom sequences carry explicit plate kinds; use SequenceSpec::custom")
        }
    }
}

/// Total Jones matrix 𝕁_{θ_N}(c_N φ)···𝕁_{θ_1}(c_1 φ) in the LR basis; for
/// mirrored sequences, the doubled product with σₓ at the mirror and the
/// return pass at −θ in reversed order, flipped back into the forward frame.
pub fn sequence_matrix<T: Scalar>(seq: &SequenceSpec<T>, phi: PhaseShift<T>) -> ComplexMat2<T> {
    let plate_matrix = |p: &PlateSpec<T>, neg: bool| {
        let th = if neg { p.theta.neg() } else { p.theta };
        retarder_lr(PhaseShift(p.retardance_scale() * phi.radians()), th)
    };
    let mut m = ComplexMat2::identity();
    for (idx, p) in seq.plates.iter().enumerate() {
        if seq.mirror_after == Some(idx) {
            m = mirror_lr() * m;
        }
        m = plate_matrix(p, false) * m;
    }
    if seq.mirror_after == Some(seq.plates.len()) {
        m = mirror_lr() * m;
    }
    if seq.mirrored {
        m = mirror_lr() * m;
        for p in seq.plates.iter().rev() {
            m = plate_matrix(p, true) * m;
        }
    }
    if seq.mirrored || seq.mirror_after.is_some() {
        m = mirror_lr() * m;
    }
    m
}

/// Unroll a folded mirrored sequence into an explicit 2N-plate stack with the
/// σₓ marker kept visible: plates θ₁…θ_N, then −θ_N…−θ_1, marker after N.
pub fn mirror_expand<T: Scalar>(seq: &SequenceSpec<T>) -> Result<SequenceSpec<T>, SequenceError> {
    if !seq.mirrored {
        return Err(SequenceError::NotMirrored);
    }
    let n = seq.plates.len();
    let mut plates = seq.plates.clone();
    plates.extend(seq.plates.iter().rev().map(|p| PlateSpec { kind: p.kind, theta: p.theta.neg() }));
    Ok(SequenceSpec {
        plates,
        mirrored: false,
        mirror_after: Some(n),
        family: Family::Custom,
        target: seq.target,
    })
}

/// On-disk sequence description consumed by the CLI:
/// `{"family": "...", "target": "...", "angles_deg": [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SequenceFile {
    pub family: Family,
    #[serde(default)]
    pub target: Option<Target>,
    pub angles_deg: Vec<f64>,
}

impl SequenceFile {
    pub fn to_sequence(&self) -> Result<SequenceSpec<f64>, SequenceError> {
        let angles: Vec<Angle<f64>> =
            self.angles_deg.iter().map(|&d| Angle::from_degrees(d)).collect();
        let mut seq = build_sequence(self.family, &angles)?;
        if let Some(t) = self.target {
            let ok = match self.family {
                Family::A | Family::C => t == Target::Half,
                Family::B | Family::D => t != Target::Half,
                Family::Custom => true,
            };
            if !ok {
                return Err(SequenceError::TargetMismatch {
                    family: self.family,
                    target: format!("{t:?}"),
                });
            }
            seq.target = t;
        }
        Ok(seq)
    }
}
