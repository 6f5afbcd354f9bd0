//! Density matrices, the cavity partial trace and the X-form concurrence.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, max_abs_diff, min_hermitian_eigenvalue, outer, trace, CMatrix, CVector};
use crate::space::{HilbertSpace, SpaceKind, TQ_00, TQ_01, TQ_10, TQ_11};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-8;
pub const BLOCK_FORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    kind: SpaceKind,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(kind: SpaceKind, matrix: CMatrix) -> Result<Self> {
        let dim = HilbertSpace::from_kind(kind)?.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows() });
        }
        let herm = max_abs_diff(&matrix, &matrix.adjoint());
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let lo = min_hermitian_eigenvalue(&matrix);
        if lo < -POSITIVITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!("eigenvalue {lo:e} below tolerance")));
        }
        Ok(DensityMatrix { kind, matrix })
    }

    pub(crate) fn new_unchecked(kind: SpaceKind, matrix: CMatrix) -> Self {
        DensityMatrix { kind, matrix }
    }

    /// Pure state projector; `psi` is normalized first.
    pub fn from_pure(kind: SpaceKind, psi: &CVector) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::InvalidDensityMatrix("zero state vector".into()));
        }
        DensityMatrix::new(kind, outer(&(psi / c(n, 0.0))))
    }

    pub fn basis(space: &HilbertSpace, index: usize) -> Result<Self> {
        DensityMatrix::from_pure(space.kind(), &space.basis_vector(index)?)
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    pub fn purity(&self) -> f64 {
        trace(&(&self.matrix * &self.matrix)).re
    }
}

/// Traces out the cavity: Restricted4 → TwoQubit, FullLambda → LambdaPair.
pub fn partial_trace_cavity(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let space = HilbertSpace::from_kind(rho.kind)?;
    let target = match rho.kind {
        SpaceKind::Restricted4 => SpaceKind::TwoQubit,
        SpaceKind::FullLambda { .. } => SpaceKind::LambdaPair,
        other => return Err(Error::UnsupportedSpace(other.name())),
    };
    let tdim = HilbertSpace::from_kind(target)?.dim();
    let mut out = CMatrix::zeros(tdim, tdim);
    let states = space.states();
    for (i, si) in states.iter().enumerate() {
        let ai = space.atomic_index(si).expect("cavity spaces map onto atoms");
        for (j, sj) in states.iter().enumerate() {
            if si.photons != sj.photons {
                continue;
            }
            let aj = space.atomic_index(sj).expect("cavity spaces map onto atoms");
            out[(ai, aj)] += rho.matrix[(i, j)];
        }
    }
    Ok(DensityMatrix::new_unchecked(target, out))
}

/// The qubit block of an atoms-only state in |11⟩,|10⟩,|01⟩,|00⟩ order.
/// For LambdaPair the S/D corners are extracted; P populations are dropped.
pub fn two_qubit_block(rho: &DensityMatrix) -> Result<CMatrix> {
    match rho.kind {
        SpaceKind::TwoQubit => Ok(rho.matrix.clone()),
        SpaceKind::LambdaPair => {
            // S=0, D=2 within each ion; index l1*3+l2.
            let idx = [0, 2, 6, 8];
            Ok(CMatrix::from_fn(4, 4, |i, j| rho.matrix[(idx[i], idx[j])]))
        }
        other => Err(Error::UnsupportedSpace(other.name())),
    }
}

/// Largest entry that must vanish for the one-excitation X form.
pub fn x_form_violation(block: &CMatrix) -> f64 {
    let mut worst = block[(TQ_11, TQ_11)].norm();
    for k in [TQ_10, TQ_01, TQ_00] {
        worst = worst.max(block[(TQ_11, k)].norm()).max(block[(k, TQ_11)].norm());
    }
    for k in [TQ_10, TQ_01] {
        worst = worst.max(block[(TQ_00, k)].norm()).max(block[(k, TQ_00)].norm());
    }
    worst
}

/// `2|ρ_{01,10}|` for an atomic state of the one-excitation block form.
pub fn concurrence_x_form(rho_atoms: &DensityMatrix) -> Result<f64> {
    let block = two_qubit_block(rho_atoms)?;
    let v = x_form_violation(&block);
    if v > BLOCK_FORM_TOL {
        return Err(Error::BlockFormViolation(format!("forbidden element of size {v:e}")));
    }
    Ok((2.0 * block[(TQ_01, TQ_10)].norm()).min(1.0))
}
