//! Joint eigenvalue extraction from a (nearly) commuting family of matrices
//! through one Schur decomposition of a generic combination.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{schur, ComplexMatrix};
use crate::C64;

/// Triangularity threshold above which an extraction is flagged.
pub const LOW_CONFIDENCE_THRESHOLD: f64 = 1e-6;

/// Quality measures of one Schur extraction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExtractionDiagnostics {
    /// `max ||A B - B A||_F / (||A||_F ||B||_F)` over pairs of the family.
    pub commutator_defect: f64,
    /// `max ||strict_lower(Q^* A Q)||_F / ||A||_F` over the family.
    pub triangularity_defect: f64,
    /// Smallest distance between two diagonal entries of the Schur form,
    /// relative to the largest of them (or 1 when they are all small).
    pub eigen_separation: f64,
    /// Set when the Schur basis of the combination fails to triangularize
    /// the individual matrices, i.e. the recovered points are unreliable.
    pub low_confidence: bool,
}

/// Values `q_s^* A_i q_s` for every Schur vector `q_s` of `sum_i w_i A_i`.
///
/// Returns `values[s][i]` together with diagnostics.
pub(crate) fn joint_values(
    family: &[ComplexMatrix],
    weights: &[f64],
) -> Result<(Vec<Vec<C64>>, ExtractionDiagnostics)> {
    if family.is_empty() || family.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!("{} matrices with {} weights", family.len(), weights.len())));
    }
    if weights.iter().any(|&w| w.is_nan() || w <= 0.0) {
        return Err(Error::InvalidArgument(format!("weights must be positive, got {weights:?}")));
    }
    let r = family[0].rows();
    let mut combo = ComplexMatrix::zeros(r, r);
    for (a, &w) in family.iter().zip(weights) {
        combo.axpy(C64::new(w, 0.0), a)?;
    }
    let pair = schur(&combo)?;
    let vectors: Vec<Vec<C64>> = (0..r).map(|s| pair.vector(s)).collect();
    let values: Vec<Vec<C64>> = vectors.iter().map(|q| family.iter().map(|a| a.rayleigh(q)).collect()).collect();
    if values.iter().flatten().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite("extracted eigenvalues"));
    }
    let diagnostics = diagnose(family, &pair.q, &pair.eigenvalues())?;
    Ok((values, diagnostics))
}

fn diagnose(family: &[ComplexMatrix], q: &ComplexMatrix, eigs: &[C64]) -> Result<ExtractionDiagnostics> {
    let norms: Vec<f64> = family.iter().map(|a| a.frobenius_norm()).collect();
    let mut commutator_defect: f64 = 0.0;
    for i in 0..family.len() {
        for j in (i + 1)..family.len() {
            if norms[i] == 0.0 || norms[j] == 0.0 {
                continue;
            }
            let ab = family[i].matmul(&family[j])?;
            let ba = family[j].matmul(&family[i])?;
            commutator_defect = commutator_defect.max(ab.sub(&ba)?.frobenius_norm() / (norms[i] * norms[j]));
        }
    }
    let qh = q.adjoint();
    let mut triangularity_defect: f64 = 0.0;
    for (a, &na) in family.iter().zip(&norms) {
        if na == 0.0 {
            continue;
        }
        let t = qh.matmul(&a.matmul(q)?)?;
        triangularity_defect = triangularity_defect.max(t.strict_lower_norm() / na);
    }
    let scale = eigs.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut eigen_separation = f64::INFINITY;
    for i in 0..eigs.len() {
        for j in (i + 1)..eigs.len() {
            eigen_separation = eigen_separation.min((eigs[i] - eigs[j]).norm() / scale);
        }
    }
    Ok(ExtractionDiagnostics {
        commutator_defect,
        triangularity_defect,
        eigen_separation,
        low_confidence: triangularity_defect.is_nan() || triangularity_defect > LOW_CONFIDENCE_THRESHOLD,
    })
}
