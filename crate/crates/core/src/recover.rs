//! Recovering a cone signal from the magnitudes `bₖ = |⟨z, fₖ⟩|` of a
//! designed ensemble.
//!
//! For `z` in the cone every `⟨z, fₖ⟩` is nonnegative, so `b` is the signed
//! measurement vector. Undoing the shifts gives `cₖ = ⟨𝔓z, p̃ₖ⟩`, that is
//! `circ(p̃₁ᵀ) 𝔓z = c`, which one circulant solve inverts.

use serde::Serialize;

use crate::cone::ConeGenerator;
use crate::design::MeasurementEnsemble;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm2};
use crate::spectral::{circulant_solve, transform_count};

/// Work done by the fast path, excluding the lift and the residual.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RecoveryStats {
    pub fft_calls: u64,
    /// Entries of `b` and `δ` read while undoing the shifts.
    pub triangular_reads: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveryResult {
    pub z: Vec<f64>,
    /// `maxₖ | |⟨z, fₖ⟩| − bₖ |`.
    pub residual: f64,
    /// `⟨z, f₁⟩ ≥ 0`: the output is the cone-side representative of `±z`.
    pub anchor_measurement_nonnegative: bool,
    pub stats: RecoveryStats,
}

fn check_len(e: &MeasurementEnsemble, b: &[f64]) -> Result<()> {
    if b.len() != e.gamma() {
        return Err(Error::DimensionMismatch {
            expected: e.gamma(),
            found: b.len(),
        });
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("measurements must be finite"));
    }
    Ok(())
}

/// `𝔓ᵀ circ(p̃₁ᵀ)⁻¹ L_δ⁻¹ b` with no sign or range checks. Linear in `b`.
pub fn recover_signal(e: &MeasurementEnsemble, b: &[f64]) -> Result<(Vec<f64>, RecoveryStats)> {
    check_len(e, b)?;
    let before = transform_count();
    let b1 = b[0];
    let mut c = Vec::with_capacity(b.len());
    c.push(b1);
    for (bk, dk) in b[1..].iter().zip(e.deltas()) {
        c.push(bk - dk * b1);
    }
    let triangular_reads = 1 + 2 * (b.len() - 1);
    let w = circulant_solve(e.anchor(), &c)?;
    let stats = RecoveryStats {
        fft_calls: transform_count() - before,
        triangular_reads,
    };
    Ok((e.iso().lift(&w), stats))
}

fn finish(e: &MeasurementEnsemble, b: &[f64], z: Vec<f64>, stats: RecoveryStats) -> RecoveryResult {
    let residual = e
        .vectors()
        .iter()
        .zip(b)
        .map(|(f, bk)| (dot(f, &z).abs() - bk).abs())
        .fold(0.0, f64::max);
    let anchor_measurement_nonnegative = dot(&e.vectors()[0], &z) >= 0.0;
    RecoveryResult {
        z,
        residual,
        anchor_measurement_nonnegative,
        stats,
    }
}

/// Recovery from exact magnitudes; negative entries are rejected.
pub fn recover(e: &MeasurementEnsemble, b: &[f64]) -> Result<RecoveryResult> {
    check_len(e, b)?;
    if let Some(k) = b.iter().position(|&v| v < 0.0) {
        return Err(Error::invalid(format!("measurement {k} is negative ({})", b[k])));
    }
    let (z, stats) = recover_signal(e, b)?;
    Ok(finish(e, b, z, stats))
}

/// Recovery from noise-contaminated magnitudes, which may be negative.
pub fn recover_noisy(e: &MeasurementEnsemble, b: &[f64]) -> Result<RecoveryResult> {
    let (z, stats) = recover_signal(e, b)?;
    Ok(finish(e, b, z, stats))
}

/// `10 log₁₀(min(‖z − r‖, ‖z + r‖) / ‖z‖)` clipped below at −300 dB. `None`
/// for the zero signal.
pub fn relative_error_db(z: &[f64], r: &[f64]) -> Option<f64> {
    let nz = norm2(z);
    if nz == 0.0 {
        return None;
    }
    let minus: Vec<f64> = z.iter().zip(r).map(|(a, b)| a - b).collect();
    let plus: Vec<f64> = z.iter().zip(r).map(|(a, b)| a + b).collect();
    let err = norm2(&minus).min(norm2(&plus)) / nz;
    Some(if err > 0.0 { (10.0 * err.log10()).max(-300.0) } else { -300.0 })
}

/// `min(‖z − r‖₂, ‖z + r‖₂)`.
pub fn sign_invariant_error(z: &[f64], r: &[f64]) -> f64 {
    let minus: Vec<f64> = z.iter().zip(r).map(|(a, b)| a - b).collect();
    let plus: Vec<f64> = z.iter().zip(r).map(|(a, b)| a + b).collect();
    norm2(&minus).min(norm2(&plus))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Roundtrip {
    pub z_true: Vec<f64>,
    pub z_rec: Vec<f64>,
    pub error_db: Option<f64>,
}

/// Builds `X θ`, measures it exactly through the ensemble and recovers it.
pub fn recovery_roundtrip(x: &ConeGenerator, e: &MeasurementEnsemble, coeffs: &[f64]) -> Result<Roundtrip> {
    let z_true = x.combine(coeffs)?;
    let b = e.measure(&z_true);
    let rec = recover(e, &b)?;
    let error_db = relative_error_db(&z_true, &rec.z);
    Ok(Roundtrip {
        z_true,
        z_rec: rec.z,
        error_db,
    })
}
