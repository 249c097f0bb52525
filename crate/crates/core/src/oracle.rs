//! Brute-force check of the Bloch reduction on a finite cyclic supercell.
//!
//! The supercell stiffness is stamped directly from the spring list with
//! periodic wrapping; nothing here touches the per-offset blocks. Its
//! spectrum must equal, as a multiset, the union of Bloch spectra at the
//! commensurate wavevectors `2π k / N`.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::assembly::{BlochAssembly, RealMatrix, Wavevector};
use crate::eigen::{eig_hermitian, frequencies, mass_normalize, modes_at, refine_soft_modes};
use crate::error::OracleError;
use crate::model::LatticeModel;

/// Relative tolerance of the multiset comparison.
pub const ORACLE_TOL: f64 = 1e-8;

/// `N₁ × … × N_d` cells wrapped into a torus.
#[derive(Debug, Clone)]
pub struct SupercellSystem {
    pub cells: Vec<usize>,
    pub nodes: usize,
    pub stiffness: RealMatrix,
    pub mass: DVector<f64>,
    /// Stamped `(p, q, k)` triples; wrapped self-springs are left out.
    pub stamps: Vec<(usize, usize, f64)>,
}

impl SupercellSystem {
    pub fn cell_count(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn size(&self) -> usize {
        self.mass.len()
    }

    /// Row of `node` in cell `cell` (components already reduced mod N).
    pub fn index(&self, cell: &[usize], node: usize) -> usize {
        linear_cell(cell, &self.cells) * self.nodes + node
    }

    /// Mass-normalized frequencies of the whole supercell, ascending.
    pub fn frequencies(&self) -> Result<Vec<f64>, OracleError> {
        let k = self.stiffness.map(Complex64::from);
        let h = mass_normalize(&k, self.mass.as_slice());
        let eig = eig_hermitian(&h)?;
        let scale = (0..self.size())
            .map(|i| self.stiffness[(i, i)] / self.mass[i])
            .fold(eig.norm(), f64::max);
        let mut omegas = frequencies(&eig.values, scale)?;
        refine_soft_modes(&mut omegas, &eig, self.mass.as_slice(), scale, |x| {
            self.stamps
                .iter()
                .map(|&(p, q, k)| k * (x[p] - x[q]).norm_sqr())
                .sum()
        });
        Ok(omegas)
    }
}

fn linear_cell(cell: &[usize], dims: &[usize]) -> usize {
    cell.iter().zip(dims).fold(0, |acc, (&c, &n)| acc * n + c)
}

/// All cell multi-indices, first direction slowest.
fn cell_indices(dims: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = dims.iter().product();
    (0..total)
        .map(|mut i| {
            let mut cell = vec![0; dims.len()];
            for (c, &n) in cell.iter_mut().zip(dims).rev() {
                *c = i % n;
                i /= n;
            }
            cell
        })
        .collect()
}

/// Stamps every spring once per cell with cyclic wrapping.
///
/// Springs whose two ends wrap onto the same coordinate add nothing.
pub fn build_supercell(
    model: &LatticeModel,
    cells: &[usize],
) -> Result<SupercellSystem, OracleError> {
    if cells.len() != model.dimension() || cells.contains(&0) {
        return Err(OracleError::BadCells {
            expected: model.dimension(),
        });
    }
    let n = model.node_count();
    let size = n * cells.iter().product::<usize>();
    let mut stiffness = RealMatrix::zeros(size, size);
    let mass = DVector::from_iterator(size, (0..size).map(|row| model.nodes()[row % n].mass));
    let mut system = SupercellSystem {
        cells: cells.to_vec(),
        nodes: n,
        stiffness: RealMatrix::zeros(0, 0),
        mass,
        stamps: Vec::new(),
    };

    for cell in cell_indices(cells) {
        for spring in model.springs() {
            let target: Vec<usize> = cell
                .iter()
                .zip(&spring.offset)
                .zip(cells)
                .map(|((&c, &o), &len)| (c as i64 + o as i64).rem_euclid(len as i64) as usize)
                .collect();
            let p = system.index(&cell, spring.a);
            let q = system.index(&target, spring.b);
            if p == q {
                continue;
            }
            stiffness[(p, p)] += spring.k;
            stiffness[(q, q)] += spring.k;
            stiffness[(p, q)] -= spring.k;
            stiffness[(q, p)] -= spring.k;
            system.stamps.push((p, q, spring.k));
        }
    }
    system.stiffness = stiffness;
    Ok(system)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub cells: Vec<usize>,
    /// Largest pairwise difference between the sorted spectra.
    pub deviation: f64,
    pub omega_max: f64,
    /// `ORACLE_TOL · (1 + omega_max)`.
    pub tolerance: f64,
    pub passed: bool,
    pub supercell: Vec<f64>,
    pub bloch: Vec<f64>,
}

/// Union of Bloch spectra at `μ_k = 2π k / N`, ascending.
pub fn commensurate_bloch_spectrum(
    model: &LatticeModel,
    cells: &[usize],
) -> Result<Vec<f64>, OracleError> {
    let assembly = BlochAssembly::new(model);
    let points: Vec<Wavevector> = cell_indices(cells)
        .into_iter()
        .map(|k| {
            Wavevector(
                k.iter()
                    .zip(cells)
                    .map(|(&ki, &n)| 2.0 * PI * ki as f64 / n as f64)
                    .collect(),
            )
        })
        .collect();
    let spectra: Vec<Vec<f64>> = points
        .par_iter()
        .map(|mu| modes_at(&assembly, mu, false).map(|m| m.omegas))
        .collect::<Result<_, _>>()?;
    let mut all: Vec<f64> = spectra.into_iter().flatten().collect();
    all.sort_by(f64::total_cmp);
    Ok(all)
}

/// Compares supercell and Bloch spectra as sorted multisets.
pub fn oracle_check(model: &LatticeModel, cells: &[usize]) -> Result<OracleReport, OracleError> {
    let supercell = build_supercell(model, cells)?.frequencies()?;
    let bloch = commensurate_bloch_spectrum(model, cells)?;
    if supercell.len() != bloch.len() {
        return Err(OracleError::SizeMismatch {
            supercell: supercell.len(),
            bloch: bloch.len(),
        });
    }
    let deviation = supercell
        .iter()
        .zip(&bloch)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let omega_max = supercell.iter().chain(&bloch).copied().fold(0.0, f64::max);
    let tolerance = ORACLE_TOL * (1.0 + omega_max);
    Ok(OracleReport {
        cells: cells.to_vec(),
        deviation,
        omega_max,
        tolerance,
        passed: deviation <= tolerance,
        supercell,
        bloch,
    })
}
