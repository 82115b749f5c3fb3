//! Fidelity, fidelity-vs-φ sweeps, and bandwidth metrics.

use crate::jones::{ComplexMat2, PhaseShift};
use crate::scalar::Scalar;
use crate::sequences::{sequence_matrix, SequenceSpec, Target};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("matrix is not unitary within tolerance (defect {defect})")]
    NonUnitary { defect: f64 },
    #[error("sweep needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sweep range is empty: min {min} >= max {max} (in units of π)")]
    EmptyRange { min: f64, max: f64 },
}

/// Fidelity |½ Tr(J₀† J)| against an explicit target matrix. The magnitude
/// makes the measure insensitive to any global phase of either matrix.
pub fn fidelity_matrix<T: Scalar>(
    j: &ComplexMat2<T>,
    j0: &ComplexMat2<T>,
) -> Result<T, AnalysisError> {
    let defect = j.unitarity_defect();
    if defect > T::unitarity_tol() {
        return Err(AnalysisError::NonUnitary {
            defect: defect.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok((j0.adjoint() * *j).trace().norm() / T::c(2.0))
}

/// Fidelity against one of the named target retarders.
pub fn fidelity<T: Scalar>(j: &ComplexMat2<T>, target: Target) -> Result<T, AnalysisError> {
    fidelity_matrix(j, &target.matrix())
}

/// Bandwidth thresholds reported by default.
pub const DEFAULT_THRESHOLDS: [f64; 3] = [0.9, 0.99, 0.999];

#[derive(Clone, Copy, Debug)]
pub struct BandwidthEntry<T: Scalar> {
    pub threshold: T,
    /// Contiguous interval around φ = π where F ≥ threshold, as φ/π
    /// endpoints; `None` when the fidelity at π itself is below threshold or
    /// π lies outside the sweep range.
    pub interval: Option<(T, T)>,
}

#[derive(Clone, Debug)]
pub struct SweepResult<T: Scalar> {
    /// φ samples in radians.
    pub phi_samples: Vec<T>,
    pub fidelities: Vec<T>,
    pub bandwidth_at: Vec<BandwidthEntry<T>>,
}

impl<T: Scalar> SweepResult<T> {
    pub fn bandwidth(&self, threshold: T) -> Option<(T, T)> {
        self.bandwidth_at
            .iter()
            .find(|e| (e.threshold - threshold).abs() < T::c(1e-12))
            .and_then(|e| e.interval)
    }

    /// Width of the interval at a threshold, in units of π; 0 when absent.
    pub fn bandwidth_width(&self, threshold: T) -> T {
        self.bandwidth(threshold).map_or(T::zero(), |(lo, hi)| hi - lo)
    }
}

/// Fidelity of the sequence against its own target over a uniform φ grid,
/// with bandwidth intervals extracted at the given thresholds by scanning
/// outward from π and linearly interpolating at the crossings.
pub fn sweep_with_thresholds<T: Scalar>(
    seq: &SequenceSpec<T>,
    phi_min: PhaseShift<T>,
    phi_max: PhaseShift<T>,
    samples: usize,
    thresholds: &[T],
) -> Result<SweepResult<T>, AnalysisError> {
    if samples < 2 {
        return Err(AnalysisError::TooFewSamples(samples));
    }
    if phi_min.radians() >= phi_max.radians() {
        return Err(AnalysisError::EmptyRange {
            min: (phi_min.radians() / T::PI()).to_f64().unwrap_or(f64::NAN),
            max: (phi_max.radians() / T::PI()).to_f64().unwrap_or(f64::NAN),
        });
    }
    let j0 = seq.target.matrix();
    let step = (phi_max.radians() - phi_min.radians()) / T::c((samples - 1) as f64);
    let mut phi_samples = Vec::with_capacity(samples);
    let mut fidelities = Vec::with_capacity(samples);
    for i in 0..samples {
        let phi = phi_min.radians() + step * T::c(i as f64);
        let f = fidelity_matrix(&sequence_matrix(seq, PhaseShift(phi)), &j0)?;
        phi_samples.push(phi);
        fidelities.push(f);
    }
    let bandwidth_at = thresholds
        .iter()
        .map(|&t| BandwidthEntry { threshold: t, interval: extract_bandwidth(&phi_samples, &fidelities, t) })
        .collect();
    Ok(SweepResult { phi_samples, fidelities, bandwidth_at })
}

/// [`sweep_with_thresholds`] at the default thresholds {0.9, 0.99, 0.999}.
pub fn sweep<T: Scalar>(
    seq: &SequenceSpec<T>,
    phi_min: PhaseShift<T>,
    phi_max: PhaseShift<T>,
    samples: usize,
) -> Result<SweepResult<T>, AnalysisError> {
    let ts: Vec<T> = DEFAULT_THRESHOLDS.iter().map(|&t| T::c(t)).collect();
    sweep_with_thresholds(seq, phi_min, phi_max, samples, &ts)
}

fn extract_bandwidth<T: Scalar>(phis: &[T], fids: &[T], threshold: T) -> Option<(T, T)> {
    let pi = T::PI();
    if pi < phis[0] || pi > phis[phis.len() - 1] {
        return None;
    }
    // index closest to π
    let mut i0 = 0;
    let mut best = T::infinity();
    for (i, &p) in phis.iter().enumerate() {
        let d = (p - pi).abs();
        if d < best {
            best = d;
            i0 = i;
        }
    }
    if fids[i0] < threshold {
        return None;
    }
    let cross = |inside: usize, outside: usize| -> T {
        // linear interpolation of the threshold crossing between two samples
        let (f_in, f_out) = (fids[inside], fids[outside]);
        let (p_in, p_out) = (phis[inside], phis[outside]);
        if (f_in - f_out).abs() < T::c(1e-300) {
            p_out
        } else {
            p_in + (p_out - p_in) * (threshold - f_in) / (f_out - f_in)
        }
    };
    let mut lo_idx = i0;
    while lo_idx > 0 && fids[lo_idx - 1] >= threshold {
        lo_idx -= 1;
    }
    let lo = if lo_idx == 0 { phis[0] } else { cross(lo_idx, lo_idx - 1) };
    let mut hi_idx = i0;
    while hi_idx + 1 < fids.len() && fids[hi_idx + 1] >= threshold {
        hi_idx += 1;
    }
    let hi = if hi_idx + 1 == fids.len() { phis[hi_idx] } else { cross(hi_idx, hi_idx + 1) };
    Some((lo / pi, hi / pi))
}

/// One row of a bandwidth comparison table.
#[derive(Clone, Debug)]
pub struct CompareRow<T: Scalar> {
    pub label: String,
    pub threshold: T,
    pub interval: Option<(T, T)>,
}

/// Bandwidth table for several sequences at several thresholds, in stable
/// input order. Sweeps run over φ ∈ [0, 2π] with 2001 samples.
pub fn compare<T: Scalar>(
    seqs: &[(String, SequenceSpec<T>)],
    thresholds: &[T],
) -> Result<Vec<CompareRow<T>>, AnalysisError> {
    let mut rows = Vec::new();
    for (label, seq) in seqs {
        let result = sweep_with_thresholds(
            seq,
            PhaseShift(T::zero()),
            PhaseShift(T::c(2.0) * T::PI()),
            2001,
            thresholds,
        )?;
        for entry in &result.bandwidth_at {
            rows.push(CompareRow {
                label: label.clone(),
                threshold: entry.threshold,
                interval: entry.interval,
            });
        }
    }
    Ok(rows)
}

/// Sweep CSV: `phi_over_pi,fidelity[,lambda_over_lambda0]`, ≥12 significant
/// digits. The wavelength column is λ/λ₀ = π/φ under the
/// constant-birefringence model (empty at φ = 0).
pub fn sweep_to_csv<T: Scalar>(result: &SweepResult<T>, wavelength_column: bool) -> String {
    let mut out = String::new();
    out.push_str(if wavelength_column {
        "phi_over_pi,fidelity,lambda_over_lambda0\n"
    } else {
        "phi_over_pi,fidelity\n"
    });
    for (&phi, &f) in result.phi_samples.iter().zip(&result.fidelities) {
        let x = (phi / T::PI()).to_f64().unwrap();
        let fv = f.to_f64().unwrap();
        if wavelength_column {
            let phi_f = phi.to_f64().unwrap();
            if phi_f == 0.0 {
                out.push_str(&format!("{x:.12e},{fv:.12e},\n"));
            } else {
                out.push_str(&format!("{x:.12e},{fv:.12e},{:.12e}\n", std::f64::consts::PI / phi_f));
            }
        } else {
            out.push_str(&format!("{x:.12e},{fv:.12e}\n"));
        }
    }
    out
}

/// Bandwidth table CSV: `label,threshold,phi_lo_over_pi,phi_hi_over_pi`;
/// missing intervals serialize as empty fields.
pub fn compare_to_csv<T: Scalar>(rows: &[CompareRow<T>]) -> String {
    let mut out = String::from("label,threshold,phi_lo_over_pi,phi_hi_over_pi\n");
    for row in rows {
        let t = row.threshold.to_f64().unwrap();
        match row.interval {
            Some((lo, hi)) => out.push_str(&format!(
                "{},{t},{:.12e},{:.12e}\n",
                row.label,
                lo.to_f64().unwrap(),
                hi.to_f64().unwrap()
            )),
            None => out.push_str(&format!("{},{t},,\n", row.label)),
        }
    }
    out
}
