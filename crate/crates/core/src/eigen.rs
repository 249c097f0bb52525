//! Frequencies from the generalized problem `(K̂(mu) - ω² M̂) q = 0`.
//!
//! `M̂` is diagonal and positive, so the problem is reduced to the standard
//! Hermitian one `H = M̂^{-1/2} K̂ M̂^{-1/2}` and handed to a dense Hermitian
//! eigensolver.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::assembly::{BlochAssembly, ComplexMatrix, Wavevector};
use crate::error::{DispersionError, EigenError};
use crate::model::LatticeModel;

const HERMITIAN_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-9;
/// Eigenvalues below `-NEGATIVE_TOL * norm` mean the stiffness is not PSD,
/// where `norm` is `‖H‖₂` or the uncancelled stiffness scale if larger.
pub const NEGATIVE_TOL: f64 = 1e-9;
/// Modes with `λ < SOFT_MODE_TOL * norm` take their frequency from the
/// spring-energy quadratic form instead of `sqrt(λ)`.
pub const SOFT_MODE_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, one per column, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Spectral norm, `max |λ|`.
    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Ascending eigenvalues and orthonormal eigenvectors of a Hermitian matrix.
pub fn eig_hermitian(h: &ComplexMatrix) -> Result<HermitianEigen, EigenError> {
    assert!(h.is_square(), "eig_hermitian needs a square matrix");
    let n = h.nrows();
    let adjoint = h.adjoint();
    let deviation = max_abs(&(h - &adjoint));
    if deviation > HERMITIAN_TOL * max_abs(h).max(1.0) {
        return Err(EigenError::NotHermitian { deviation });
    }
    if n == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let symmetric = (h + adjoint).scale(0.5);

    let eig = SymmetricEigen::try_new(symmetric.clone(), f64::EPSILON, 1000 * n.max(10))
        .ok_or(EigenError::NoConvergence { residual: f64::NAN })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);

    let out = HermitianEigen { values, vectors };
    let scale = out.norm();
    let mut worst = 0.0f64;
    for (j, &lambda) in out.values.iter().enumerate() {
        let v = out.vectors.column(j);
        let r = &symmetric * v - v * Complex64::from(lambda);
        worst = worst.max(r.norm());
    }
    let gram = out.vectors.adjoint() * &out.vectors - ComplexMatrix::identity(n, n);
    let unitary_err = max_abs(&gram);
    let residual_ok = worst <= RESIDUAL_TOL * scale.max(f64::MIN_POSITIVE);
    let unitary_ok = unitary_err <= RESIDUAL_TOL;
    if !residual_ok || !unitary_ok {
        return Err(EigenError::NoConvergence {
            residual: worst.max(unitary_err),
        });
    }
    Ok(out)
}

/// Frequencies (and optionally mode shapes) at one wavevector.
#[derive(Debug, Clone)]
pub struct ModeSet {
    pub mu: Wavevector,
    /// Ascending angular frequencies, one per unit-cell mass.
    pub omegas: Vec<f64>,
    /// Mode shapes as columns, normalized so that `vᴴ M̂ v = 1`.
    pub vectors: Option<ComplexMatrix>,
}

/// Converts eigenvalues of the mass-normalized problem into frequencies,
/// clamping round-off negatives and rejecting genuine ones.
///
/// `norm` is the magnitude round-off is measured against: `‖H‖₂`, or larger
/// when phases cancel most of the stiffness (a self-spring at `mu = 0`).
pub(crate) fn frequencies(values: &[f64], norm: f64) -> Result<Vec<f64>, EigenError> {
    values
        .iter()
        .map(|&lambda| {
            if lambda < -NEGATIVE_TOL * norm {
                Err(EigenError::IndefiniteStiffness {
                    eigenvalue: lambda,
                    norm,
                })
            } else {
                Ok(lambda.max(0.0).sqrt())
            }
        })
        .collect()
}

/// Replaces `sqrt(λ)` for soft modes by `sqrt(xᴴ K x)` with `x = M^{-1/2} u`.
///
/// A zero eigenvalue comes back from the solver as `O(ε ‖H‖)`, which `sqrt`
/// inflates to `O(sqrt(ε ‖H‖))`. The quadratic form, summed as nonnegative
/// spring energies over an accurate eigenvector, is good to `O(ε)` in ω.
pub(crate) fn refine_soft_modes<F>(
    omegas: &mut [f64],
    eig: &HermitianEigen,
    masses: &[f64],
    norm: f64,
    quadratic_form: F,
) where
    F: Fn(&[Complex64]) -> f64,
{
    let threshold = SOFT_MODE_TOL * norm;
    let mut touched = false;
    for (j, &lambda) in eig.values.iter().enumerate() {
        if lambda >= threshold {
            continue;
        }
        let x: Vec<Complex64> = eig
            .vectors
            .column(j)
            .iter()
            .zip(masses)
            .map(|(u, m)| u / m.sqrt())
            .collect();
        omegas[j] = quadratic_form(&x).max(0.0).sqrt();
        touched = true;
    }
    if touched {
        omegas.sort_by(f64::total_cmp);
    }
}

/// Mass-normalized Hermitian matrix `M^{-1/2} K M^{-1/2}` for diagonal `M`.
pub(crate) fn mass_normalize(stiffness: &ComplexMatrix, masses: &[f64]) -> ComplexMatrix {
    let inv_sqrt: Vec<f64> = masses.iter().map(|m| 1.0 / m.sqrt()).collect();
    ComplexMatrix::from_fn(stiffness.nrows(), stiffness.ncols(), |i, j| {
        stiffness[(i, j)] * (inv_sqrt[i] * inv_sqrt[j])
    })
}

/// Solves the reduced problem with precomputed blocks.
pub fn modes_at(
    assembly: &BlochAssembly,
    mu: &Wavevector,
    with_vectors: bool,
) -> Result<ModeSet, DispersionError> {
    if mu.dimension() != assembly.dimension() {
        return Err(DispersionError::DimensionMismatch {
            expected: assembly.dimension(),
            found: mu.dimension(),
        });
    }
    let wrap = |source| DispersionError::Eigen {
        mu: mu.0.clone(),
        source,
    };
    let masses = assembly.mass_diagonal().as_slice();
    let h = mass_normalize(&assembly.reduced_stiffness(mu), masses);
    let eig = eig_hermitian(&h).map_err(wrap)?;
    let norm = eig.norm().max(assembly.scale());
    let mut omegas = frequencies(&eig.values, norm).map_err(wrap)?;
    refine_soft_modes(&mut omegas, &eig, masses, norm, |x| {
        assembly.quadratic_form(mu, x)
    });
    let vectors = with_vectors.then(|| {
        let mut v = eig.vectors;
        for (mut row, m) in v.row_iter_mut().zip(masses) {
            row /= Complex64::from(m.sqrt());
        }
        v
    });
    Ok(ModeSet {
        mu: mu.clone(),
        omegas,
        vectors,
    })
}

/// Sorted angular frequencies of the model at `mu`.
pub fn dispersion_at(model: &LatticeModel, mu: &Wavevector) -> Result<ModeSet, DispersionError> {
    modes_at(&BlochAssembly::new(model), mu, false)
}
