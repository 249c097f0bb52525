//! Per-offset stiffness blocks and the reduced Bloch stiffness.
//!
//! Springs are grouped by the cell offset they span. Each group gives a
//! 2n x 2n stiffness over (reference cell, displaced cell) coordinates,
//! stored as three n x n blocks `[[A, B], [Bᵀ, C]]`. Pushing the displaced
//! cell forward with `T = [I; p I]`, `p = exp(i offset·mu)`, and contracting
//! with `Tᴴ` collapses each group to `A + C + p B + p̄ Bᵀ`. The zero offset
//! contributes its internal stiffness `A` directly.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::AssemblyError;
use crate::model::{LatticeModel, Offset};

pub type RealMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;

/// Phase advance per cell along each lattice direction, in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavevector(pub Vec<f64>);

impl Wavevector {
    pub fn new(components: impl Into<Vec<f64>>) -> Self {
        Wavevector(components.into())
    }

    pub fn zero(dimension: usize) -> Self {
        Wavevector(vec![0.0; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl From<Vec<f64>> for Wavevector {
    fn from(v: Vec<f64>) -> Self {
        Wavevector(v)
    }
}

/// Stiffness of all springs sharing one offset, split into the
/// reference-cell block `A`, the coupling block `B` (rows: reference cell,
/// columns: displaced cell) and the displaced-cell block `C`. For the zero
/// offset only `A` is populated.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetBlock {
    pub offset: Offset,
    pub reference: RealMatrix,
    pub coupling: RealMatrix,
    pub displaced: RealMatrix,
}

impl OffsetBlock {
    fn empty(offset: Offset, n: usize) -> Self {
        OffsetBlock {
            offset,
            reference: RealMatrix::zeros(n, n),
            coupling: RealMatrix::zeros(n, n),
            displaced: RealMatrix::zeros(n, n),
        }
    }

    pub fn is_internal(&self) -> bool {
        self.offset.iter().all(|&c| c == 0)
    }

    /// The full 2n x 2n matrix `[[A, B], [Bᵀ, C]]`.
    pub fn full(&self) -> RealMatrix {
        let n = self.reference.nrows();
        let mut k = RealMatrix::zeros(2 * n, 2 * n);
        k.view_mut((0, 0), (n, n)).copy_from(&self.reference);
        k.view_mut((0, n), (n, n)).copy_from(&self.coupling);
        k.view_mut((n, 0), (n, n))
            .copy_from(&self.coupling.transpose());
        k.view_mut((n, n), (n, n)).copy_from(&self.displaced);
        k
    }

    /// `Tᴴ K T` for this block at the given wavevector.
    pub fn contract(&self, mu: &Wavevector) -> ComplexMatrix {
        if self.is_internal() {
            return self.reference.map(Complex64::from);
        }
        let p = phase(&self.offset, mu);
        let n = self.reference.nrows();
        ComplexMatrix::from_fn(n, n, |i, j| {
            Complex64::from(self.reference[(i, j)] + self.displaced[(i, j)])
                + p * self.coupling[(i, j)]
                + p.conj() * self.coupling[(j, i)]
        })
    }
}

/// Groups the model's springs by offset and stamps each block.
///
/// Every model gets a zero-offset entry, even without internal springs.
pub fn offset_blocks(model: &LatticeModel) -> BTreeMap<Offset, OffsetBlock> {
    let n = model.node_count();
    let mut blocks = BTreeMap::new();
    let zero = vec![0; model.dimension()];
    blocks.insert(zero.clone(), OffsetBlock::empty(zero, n));
    for s in model.springs() {
        let block = blocks
            .entry(s.offset.clone())
            .or_insert_with(|| OffsetBlock::empty(s.offset.clone(), n));
        let (a, b, k) = (s.a, s.b, s.k);
        if s.is_internal() {
            block.reference[(a, a)] += k;
            block.reference[(b, b)] += k;
            block.reference[(a, b)] -= k;
            block.reference[(b, a)] -= k;
        } else {
            block.reference[(a, a)] += k;
            block.displaced[(b, b)] += k;
            block.coupling[(a, b)] -= k;
        }
    }
    blocks
}

/// `exp(i offset·mu)`.
pub fn phase(offset: &[i32], mu: &Wavevector) -> Complex64 {
    assert_eq!(
        offset.len(),
        mu.dimension(),
        "offset and wavevector lengths differ"
    );
    let angle: f64 = offset
        .iter()
        .zip(mu.components())
        .map(|(&o, &m)| o as f64 * m)
        .sum();
    Complex64::from_polar(1.0, angle)
}

/// Diagonal reduced mass matrix and reduced stiffness at one wavevector.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMatrices {
    pub mass: DVector<f64>,
    pub stiffness: ComplexMatrix,
}

/// Precomputed blocks for repeated evaluation of the reduced stiffness.
///
/// The wavevector-independent part `A₀ + Σ (A + C)` is folded once; each
/// evaluation only adds the phased coupling blocks.
#[derive(Debug, Clone)]
pub struct BlochAssembly {
    dimension: usize,
    mass: DVector<f64>,
    constant: RealMatrix,
    couplings: Vec<(Offset, RealMatrix)>,
    /// `(a, b, k)` stamps grouped by offset, for the quadratic form.
    stamps: Vec<(Offset, Vec<Stamp>)>,
}

/// `(a, b, k)`: node `a` in the reference cell to node `b` in the displaced one.
type Stamp = (usize, usize, f64);

impl BlochAssembly {
    pub fn new(model: &LatticeModel) -> Self {
        let n = model.node_count();
        let mut constant = RealMatrix::zeros(n, n);
        let mut couplings = Vec::new();
        let mut stamps: BTreeMap<Offset, Vec<Stamp>> = BTreeMap::new();
        for s in model.springs() {
            stamps
                .entry(s.offset.clone())
                .or_default()
                .push((s.a, s.b, s.k));
        }
        for (offset, block) in offset_blocks(model) {
            constant += &block.reference;
            if !block.is_internal() {
                constant += &block.displaced;
                couplings.push((offset, block.coupling));
            }
        }
        BlochAssembly {
            dimension: model.dimension(),
            mass: DVector::from_vec(model.masses()),
            constant,
            couplings,
            stamps: stamps.into_iter().collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn size(&self) -> usize {
        self.mass.len()
    }

    pub fn mass_diagonal(&self) -> &DVector<f64> {
        &self.mass
    }

    /// Largest `Σ k / m` over nodes: the stiffness scale before any phase
    /// cancellation.
    pub fn scale(&self) -> f64 {
        (0..self.size())
            .map(|i| self.constant[(i, i)] / self.mass[i])
            .fold(0.0, f64::max)
    }

    pub fn reduced_stiffness(&self, mu: &Wavevector) -> ComplexMatrix {
        let mut k = self.constant.map(Complex64::from);
        let n = self.size();
        for (offset, b) in &self.couplings {
            let p = phase(offset, mu);
            for i in 0..n {
                for j in 0..n {
                    k[(i, j)] += p * b[(i, j)] + p.conj() * b[(j, i)];
                }
            }
        }
        k
    }

    /// `xᴴ K̂(mu) x`, summed offset by offset as spring energies
    /// `k |x_a - p x_b|²` of the pushed-forward displacement `[x; p x]`.
    ///
    /// Every term is nonnegative, so the sum keeps full relative accuracy
    /// for nearly rigid displacements where `xᴴ (K̂ x)` would not.
    pub fn quadratic_form(&self, mu: &Wavevector, x: &[Complex64]) -> f64 {
        self.stamps
            .iter()
            .map(|(offset, springs)| {
                let p = phase(offset, mu);
                springs
                    .iter()
                    .map(|&(a, b, k)| k * (x[a] - p * x[b]).norm_sqr())
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn reduced(&self, mu: &Wavevector) -> ReducedMatrices {
        ReducedMatrices {
            mass: self.mass.clone(),
            stiffness: self.reduced_stiffness(mu),
        }
    }
}

/// Reduced Hermitian stiffness `K̂(mu)`, one row per unit-cell mass.
pub fn reduced_stiffness(model: &LatticeModel, mu: &Wavevector) -> ComplexMatrix {
    BlochAssembly::new(model).reduced_stiffness(mu)
}

pub fn mass_matrix(model: &LatticeModel) -> RealMatrix {
    RealMatrix::from_diagonal(&DVector::from_vec(model.masses()))
}

/// Result of treating a two-neighbor chain as a single enlarged cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedCell {
    /// Mass factor multiplying `-ω²` (two massive coordinates).
    pub mass: f64,
    pub stiffness: Complex64,
}

/// Assembles a single-mass chain with first and second neighbor springs the
/// wrong way: one three-coordinate cell holding both spring types, reduced by
/// a single push-forward operator `[1, p, p²]`.
///
/// The result is on the two-mass scale (`mass` = 2m). It differs from twice
/// the correct reduced stiffness by `K₂ (2 - 2 cos 2μ)` and exists to
/// demonstrate that failure.
pub fn naive_combined_assembly(
    model: &LatticeModel,
    mu: &Wavevector,
) -> Result<CombinedCell, AssemblyError> {
    if model.dimension() != 1 || model.node_count() != 1 || mu.dimension() != 1 {
        return Err(AssemblyError::NotTwoNeighborChain);
    }
    let (mut k1, mut k2) = (0.0, 0.0);
    for s in model.springs() {
        match s.offset[0] {
            1 => k1 += s.k,
            2 => k2 += s.k,
            _ => return Err(AssemblyError::NotTwoNeighborChain),
        }
    }
    let m = model.nodes()[0].mass;

    // Coordinates q1, q2, q3 at cells 0, 1, 2; q3 carries no mass.
    #[rustfmt::skip]
    let cell = RealMatrix::from_row_slice(3, 3, &[
        k1 + k2, -k1,      -k2,
        -k1,     2.0 * k1, -k1,
        -k2,     -k1,      k1 + k2,
    ]);
    let cell_mass = [m, m, 0.0];
    let p = phase(&[1], mu);
    let t = [Complex64::new(1.0, 0.0), p, p * p];

    let mut stiffness = Complex64::new(0.0, 0.0);
    let mut mass = 0.0;
    for i in 0..3 {
        mass += cell_mass[i] * t[i].norm_sqr();
        for j in 0..3 {
            stiffness += t[i].conj() * cell[(i, j)] * t[j];
        }
    }
    Ok(CombinedCell { mass, stiffness })
}
