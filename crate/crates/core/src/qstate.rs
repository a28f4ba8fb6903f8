//! Dense states on one to four qubits.
//!
//! Basis convention: qubit 0 is the most significant bit of a basis index,
//! so `|q0 q1 ... q(n-1)>` has index `q0 * 2^(n-1) + ... + q(n-1)`. A single
//! qubit reads `rho = (I + x sx + y sy + z sz) / 2`, putting `|0><0|` at
//! `z = +1`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::gates::{self, Unitary};
use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Largest supported Hilbert-space dimension (four qubits).
pub const MAX_DIM: usize = 16;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Below this coincidence probability a postselection is treated as empty.
pub const ABORT_TOL: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim > MAX_DIM {
        return Err(Error::DimensionOverflow { dim });
    }
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::InvalidState(format!("dimension {dim} is not 2, 4, 8 or 16")));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// A trace-one, Hermitian, positive semidefinite matrix on 1 to 4 qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Validating constructor: Hermiticity and unit trace to 1e-12, smallest
    /// eigenvalue no lower than -1e-10.
    pub fn new(m: CMatrix) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(m)?;
        rho.check()?;
        Ok(rho)
    }

    /// Wraps a matrix after checking only its shape.
    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidState(format!(
                "matrix is {}x{}, not square",
                m.nrows(),
                m.ncols()
            )));
        }
        qubits_for_dim(m.nrows())?;
        Ok(Self { m })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self { m: psi.projector() }
    }

    /// `|index><index|` on `n_qubits` qubits.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        Ok(Self::from_pure(&PureState::basis(n_qubits, index)?))
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let dim = 1usize.checked_shl(n_qubits as u32).unwrap_or(usize::MAX);
        qubits_for_dim(dim)?;
        Ok(Self {
            m: CMatrix::identity(dim, dim) / Complex64::from(dim as f64),
        })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    /// Largest entrywise `|rho_ij - conj(rho_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs_diff(&self.m, &self.m.adjoint())
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.m + self.m.adjoint()) * Complex64::from(0.5);
        herm.symmetric_eigenvalues().iter().copied().collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Checks the three structural invariants at the library tolerances.
    pub fn check(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, not 1")));
        }
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        max_abs_diff(&self.m, &other.m)
    }

    /// Replaces the matrix by its Hermitian part, removing rounding drift.
    pub(crate) fn hermitize(mut self) -> Self {
        let adj = self.m.adjoint();
        self.m = (&self.m + adj) * Complex64::from(0.5);
        self
    }
}

/// A normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: DVector<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        qubits_for_dim(amplitudes.len())?;
        let amps = DVector::from_vec(amplitudes);
        let norm_sqr = amps.norm_squared();
        if (norm_sqr - 1.0).abs() > HERMITIAN_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { amps })
    }

    /// Real amplitudes, a frequent case here.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| Complex64::from(a)).collect())
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize.checked_shl(n_qubits as u32).unwrap_or(usize::MAX);
        qubits_for_dim(dim)?;
        if index >= dim {
            return Err(Error::InvalidQubits(format!(
                "basis index {index} out of range for dim {dim}"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn projector(&self) -> CMatrix {
        &self.amps * self.amps.adjoint()
    }
}

/// Bloch coordinates of a single-qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(k * self.x, k * self.y, k * self.z)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn max_abs_diff(&self, other: &BlochVector) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }
}

/// Kronecker product `a ⊗ b`; `a` occupies the more significant qubits.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    let dim = a.dim() * b.dim();
    if dim > MAX_DIM {
        return Err(Error::DimensionOverflow { dim });
    }
    Ok(DensityMatrix { m: a.m.kronecker(&b.m) })
}

fn check_index_set(indices: &[usize], n: usize, what: &str) -> Result<()> {
    for (k, &q) in indices.iter().enumerate() {
        if q >= n {
            return Err(Error::InvalidQubits(format!(
                "{what}: qubit {q} out of range for {n} qubits"
            )));
        }
        if indices[..k].contains(&q) {
            return Err(Error::InvalidQubits(format!("{what}: qubit {q} listed twice")));
        }
    }
    Ok(())
}

/// Reduced state on the qubits in `keep`, ordered as listed.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    check_index_set(keep, n, "partial_trace")?;
    if keep.is_empty() || keep.len() >= n {
        return Err(Error::InvalidQubits(format!(
            "partial_trace needs a nonempty proper subset of {n} qubits, got {keep:?}"
        )));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let zeros = vec![0u8; 0];
    Ok(DensityMatrix {
        m: reduce(&rho.m, n, keep, &traced, &zeros),
    })
}

/// Sum over `traced` qubits (which may include fixed `projected` values for a
/// leading prefix) of the block `<e| rho |e>`, indexed on `keep`.
///
/// `projected[k]` pins `traced[k]` to that value on both sides; traced qubits
/// beyond `projected.len()` are summed over.
fn reduce(m: &CMatrix, n: usize, keep: &[usize], traced: &[usize], projected: &[u8]) -> CMatrix {
    let kd = 1usize << keep.len();
    let free = &traced[projected.len()..];
    let mut base = 0usize;
    for (&q, &v) in traced.iter().zip(projected) {
        base |= (v as usize) << (n - 1 - q);
    }
    let spread = |sub: usize, qubits: &[usize]| -> usize {
        let w = qubits.len();
        qubits
            .iter()
            .enumerate()
            .fold(0usize, |acc, (k, &q)| acc | (((sub >> (w - 1 - k)) & 1) << (n - 1 - q)))
    };
    let mut out = CMatrix::zeros(kd, kd);
    for e in 0..(1usize << free.len()) {
        let env = base | spread(e, free);
        for i in 0..kd {
            let row = env | spread(i, keep);
            for j in 0..kd {
                out[(i, j)] += m[(row, env | spread(j, keep))];
            }
        }
    }
    out
}

/// `rho -> U rho U^dag` with `u` acting on `targets` in listed order.
pub fn apply_unitary(rho: &DensityMatrix, u: &Unitary, targets: &[usize]) -> Result<DensityMatrix> {
    let full = gates::embed(u, targets, rho.n_qubits())?;
    Ok(conjugate(rho, full.matrix()))
}

/// `rho -> E rho E^dag` for a full-register operator `e`.
pub(crate) fn conjugate(rho: &DensityMatrix, e: &CMatrix) -> DensityMatrix {
    DensityMatrix {
        m: e * &rho.m * e.adjoint(),
    }
}

/// Bloch vector of a single-qubit state.
pub fn bloch_of(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let off = rho.entry(0, 1);
    // rho_01 = (x - i y) / 2, rho_00 - rho_11 = z
    Ok(BlochVector::new(
        2.0 * off.re,
        -2.0 * off.im,
        (rho.entry(0, 0) - rho.entry(1, 1)).re,
    ))
}

/// Single-qubit state with Bloch vector `r`.
pub fn state_of(r: &BlochVector) -> Result<DensityMatrix> {
    let norm = r.norm();
    if norm > 1.0 + POSITIVITY_TOL {
        return Err(Error::OutsideBlochBall { norm });
    }
    Ok(DensityMatrix { m: state_matrix(r) })
}

/// `(I + r·σ)/2` without the ball check; used for affine images in tests.
pub(crate) fn state_matrix(r: &BlochVector) -> CMatrix {
    let h = Complex64::from(0.5);
    CMatrix::from_row_slice(
        2,
        2,
        &[
            h * (1.0 + r.z),
            Complex64::new(0.5 * r.x, -0.5 * r.y),
            Complex64::new(0.5 * r.x, 0.5 * r.y),
            h * (1.0 - r.z),
        ],
    )
}

/// `<phi+| rho |phi+>` with `|phi+> = (|00> + |11>)/sqrt 2`.
pub fn fidelity_phi_plus(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let v = 0.5 * (rho.entry(0, 0) + rho.entry(0, 3) + rho.entry(3, 0) + rho.entry(3, 3));
    Ok(v.re)
}

/// Outcome of keeping only coinciding target measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct Coincidence {
    /// Renormalized state of the two unmeasured qubits.
    pub state: DensityMatrix,
    /// Probability that the two targets agree.
    pub probability: f64,
    /// Probabilities of the `00` and `11` branches.
    pub branches: [f64; 2],
}

/// Measures `targets` in the computational basis on a 4-qubit state, keeps
/// the `00` and `11` outcomes, and returns the remaining pair.
pub fn postselect_coincide(rho: &DensityMatrix, targets: (usize, usize)) -> Result<Coincidence> {
    if rho.dim() != 16 {
        return Err(Error::DimensionMismatch {
            expected: 16,
            found: rho.dim(),
        });
    }
    let (a, b) = targets;
    check_index_set(&[a, b], 4, "postselect_coincide")?;
    let keep: Vec<usize> = (0..4).filter(|q| *q != a && *q != b).collect();
    let both_zero = reduce(&rho.m, 4, &keep, &[a, b], &[0, 0]);
    let both_one = reduce(&rho.m, 4, &keep, &[a, b], &[1, 1]);
    let branches = [both_zero.trace().re, both_one.trace().re];
    let kept = both_zero + both_one;
    let probability = kept.trace().re;
    if probability.is_nan() || probability < ABORT_TOL {
        return Err(Error::Aborted { probability });
    }
    let state = DensityMatrix {
        m: kept / Complex64::from(probability),
    }
    .hermitize();
    Ok(Coincidence {
        state,
        probability,
        branches,
    })
}
